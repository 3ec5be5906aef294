//! Lowering of the surface tree to core terms.
//!
//! Implicit continuations get fresh names, `resume` becomes a variable,
//! list literals and `h :: t` patterns expand to pairs, infix operators become
//! constant applications and `let rec` becomes `fix`.

use std::collections::BTreeSet;

use crate::diagnostic::{Diagnostic, Span};
use crate::syntax::{fresh_name, Const, Handler, Name, OpClause, SchemeExpr, Term};

use super::surface::{Clause, ConsPat, Expr, ExprKind, LetHead, Param};

pub struct Desugar<'a> {
    /// Every name that occurs in the source, plus every name handed out so far.
    used: BTreeSet<Name>,
    known_ops: &'a BTreeSet<Name>,
    pub errors: Vec<Diagnostic>,
}

impl<'a> Desugar<'a> {
    pub fn new(used: BTreeSet<Name>, known_ops: &'a BTreeSet<Name>) -> Self {
        Desugar { used, known_ops, errors: Vec::new() }
    }

    fn fresh(&mut self, base: &str) -> Name {
        let n = fresh_name(base, &self.used);
        self.used.insert(n.clone());
        n
    }

    fn check_op(&mut self, op: &Name, span: Span) {
        if !self.known_ops.contains(op) {
            self.errors.push(Diagnostic::error(span, format!("unbound operation `{op}`")));
        }
    }

    pub fn expr(&mut self, e: &Expr, k: Option<&Name>) -> Term {
        let b = |t: Term| Box::new(t);
        match &e.kind {
            ExprKind::Var(x) => Term::Var(x.clone()),
            ExprKind::Const(c) => Term::Const(c.clone()),
            ExprKind::Fun(params, body) => {
                let body = self.expr(body, k);
                abstract_params(params, body)
            }
            ExprKind::App(f, a) => Term::App(b(self.expr(f, k)), b(self.expr(a, k))),
            ExprKind::Op(op, arg) => {
                self.check_op(op, e.span);
                Term::Op(op.clone(), b(self.expr(arg, k)))
            }
            ExprKind::Resume => match k {
                Some(k) => Term::Var(k.clone()),
                None => {
                    self.errors.push(Diagnostic::error(e.span, "resume outside handler clause"));
                    Term::unit()
                }
            },
            ExprKind::Handle(body, clauses) => {
                let body = self.expr(body, k);
                let h = self.handler(clauses, k);
                Term::Handle(b(body), Box::new(h))
            }
            ExprKind::Let(head, body) => {
                let (name, ann, bound) = self.let_head(head, k);
                Term::Let(name, ann, b(bound), b(self.expr(body, k)))
            }
            ExprKind::Pair(l, r) => Term::Pair(b(self.expr(l, k)), b(self.expr(r, k))),
            ExprKind::Fst(t) => Term::Proj1(b(self.expr(t, k))),
            ExprKind::Snd(t) => Term::Proj2(b(self.expr(t, k))),
            ExprKind::Inl(t) => Term::Inl(b(self.expr(t, k))),
            ExprKind::Inr(t) => Term::Inr(b(self.expr(t, k))),
            ExprKind::CaseSum { scrut, left, right } => Term::CaseSum(
                b(self.expr(scrut, k)),
                left.0.clone(),
                b(self.expr(&left.1, k)),
                right.0.clone(),
                b(self.expr(&right.1, k)),
            ),
            ExprKind::CaseList { scrut, nil, cons } => {
                let scrut = self.expr(scrut, k);
                let nil = self.expr(nil, k);
                let body = self.expr(&cons.1, k);
                let (p, body) = match &cons.0 {
                    ConsPat::Var(p) => (p.clone(), body),
                    ConsPat::Split(h, t) => {
                        let p = self.fresh("p");
                        let pv = || b(Term::Var(p.clone()));
                        let body = Term::Let(
                            h.clone(),
                            None,
                            b(Term::Proj1(pv())),
                            b(Term::Let(t.clone(), None, b(Term::Proj2(pv())), b(body))),
                        );
                        (p, body)
                    }
                };
                Term::CaseList(b(scrut), b(nil), p, b(body))
            }
            ExprKind::Nil => Term::Nil,
            ExprKind::Cons(t) => Term::Cons(b(self.expr(t, k))),
            ExprKind::List(items) => Term::list(items.iter().map(|i| self.expr(i, k)).collect::<Vec<_>>()),
            ExprKind::Fix(f, x, body) => Term::Fix(f.clone(), x.name.clone(), b(self.expr(body, k))),
            ExprKind::If(c, t, f) => {
                Term::If(b(self.expr(c, k)), b(self.expr(t, k)), b(self.expr(f, k)))
            }
            ExprKind::BinOp(p, l, r) => Term::App(
                b(Term::App(b(Term::Const(Const::Prim(*p))), b(self.expr(l, k)))),
                b(self.expr(r, k)),
            ),
        }
    }

    pub fn let_head(&mut self, head: &LetHead, k: Option<&Name>) -> (Name, Option<SchemeExpr>, Term) {
        let bound = self.expr(&head.bound, k);
        let term = if head.rec {
            let mut params = head.params.clone();
            let mut body = bound;
            if params.is_empty() {
                if let Term::Abs(x, ann, inner) = body {
                    params.push(Param { name: x, ann });
                    body = *inner;
                } else {
                    self.errors.push(Diagnostic::error(head.span, "`let rec` must bind a function"));
                    return (head.name.clone(), head.ann.clone(), Term::unit());
                }
            }
            let first = params.remove(0);
            Term::Fix(head.name.clone(), first.name, Box::new(abstract_params(&params, body)))
        } else {
            abstract_params(&head.params, bound)
        };
        (head.name.clone(), head.ann.clone(), term)
    }

    fn handler(&mut self, clauses: &[Clause], outer_k: Option<&Name>) -> Handler {
        let mut ret: Option<(Name, Term)> = None;
        let mut ops = Vec::new();
        for c in clauses {
            match c {
                Clause::Return { var, body, span } => {
                    let body = self.expr(body, outer_k);
                    if ret.is_some() {
                        self.errors.push(Diagnostic::error(*span, "duplicate return clause"));
                    } else {
                        ret = Some((var.clone(), body));
                    }
                }
                Clause::Op { op, param, cont, body, span } => {
                    self.check_op(op, *span);
                    let cont = match cont {
                        Some(k) => k.clone(),
                        None => self.fresh("k"),
                    };
                    let body = self.expr(body, Some(&cont));
                    ops.push((op.clone(), OpClause { param: param.clone(), cont, body }, *span));
                }
            }
        }
        let (rv, rb) = ret.unwrap_or_else(|| {
            let x = self.fresh("x");
            (x.clone(), Term::Var(x))
        });
        let mut h = Handler::new(rv, rb);
        for (op, clause, span) in ops {
            if !h.add_clause(op.clone(), clause) {
                self.errors.push(Diagnostic::error(span, format!("duplicate clause for operation `{op}`")));
            }
        }
        h
    }
}

fn abstract_params(params: &[Param], body: Term) -> Term {
    params
        .iter()
        .rev()
        .fold(body, |acc, p| Term::Abs(p.name.clone(), p.ann.clone(), Box::new(acc)))
}
