//! The surface syntax tree produced by the parser, before desugaring.

use crate::diagnostic::Span;
use crate::syntax::{Const, Name, Prim, SchemeExpr, TypeExpr};

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: Name,
    pub ann: Option<TypeExpr>,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Var(Name),
    Const(Const),
    Fun(Vec<Param>, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Op(Name, Box<Expr>),
    /// The continuation of the enclosing operation clause.
    Resume,
    Handle(Box<Expr>, Vec<Clause>),
    Let(Box<LetHead>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    Inl(Box<Expr>),
    Inr(Box<Expr>),
    CaseSum {
        scrut: Box<Expr>,
        left: (Name, Box<Expr>),
        right: (Name, Box<Expr>),
    },
    CaseList {
        scrut: Box<Expr>,
        nil: Box<Expr>,
        cons: (ConsPat, Box<Expr>),
    },
    Nil,
    Cons(Box<Expr>),
    List(Vec<Expr>),
    Fix(Name, Param, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    BinOp(Prim, Box<Expr>, Box<Expr>),
}

/// `let [rec] name params [: scheme] = bound`
#[derive(Clone, Debug)]
pub struct LetHead {
    pub rec: bool,
    pub name: Name,
    pub params: Vec<Param>,
    pub ann: Option<SchemeExpr>,
    pub bound: Expr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum ConsPat {
    Var(Name),
    Split(Name, Name),
}

#[derive(Clone, Debug)]
pub enum Clause {
    Return {
        var: Name,
        body: Expr,
        span: Span,
    },
    Op {
        op: Name,
        param: Name,
        cont: Option<Name>,
        body: Expr,
        span: Span,
    },
}

/// `effect op : forall vars. dom ~> cod`
#[derive(Clone, Debug, PartialEq)]
pub struct OpDecl {
    pub name: Name,
    pub vars: Vec<Name>,
    pub dom: TypeExpr,
    pub cod: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Item {
    Effect(OpDecl),
    Let(LetHead),
    Expr(Expr),
}
