//! Concrete syntax: lexing, parsing, desugaring to core terms and printing.

mod desugar;
mod lexer;
mod parser;
mod pretty;
pub mod surface;

use std::collections::BTreeSet;

use crate::diagnostic::{Diagnostic, Span};
use crate::syntax::{Name, SchemeExpr, Term, TypeExpr};

pub use lexer::is_keyword;
pub use pretty::{
    pretty_const, pretty_scheme, pretty_scheme_expr, pretty_signature, pretty_term, pretty_type,
    pretty_type_expr, TypeNamer,
};
pub use surface::OpDecl;

use desugar::Desugar;
use parser::Parser;
use surface::Item;

/// A top-level `let`.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub name: Name,
    pub ann: Option<SchemeExpr>,
    pub term: Term,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Main {
    pub term: Term,
    pub span: Span,
}

/// A parsed and desugared program.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub decls: Vec<OpDecl>,
    pub bindings: Vec<Binding>,
    pub main: Option<Main>,
}

fn source_names(src: &str) -> BTreeSet<Name> {
    lexer::lex(src)
        .map(|toks| {
            toks.into_iter()
                .filter_map(|t| match t.tok {
                    lexer::Tok::Ident(s) => Some(Name::new(&s)),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default()
}

pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    parse_program_with(src, &BTreeSet::new())
}

/// Parses a program in which the operations in `known_ops` are already
/// declared, as in a REPL session.
pub fn parse_program_with(src: &str, known_ops: &BTreeSet<Name>) -> Result<Program, Vec<Diagnostic>> {
    let items = Parser::new(src).and_then(|mut p| p.items()).map_err(|d| vec![d])?;
    let mut errors = Vec::new();
    let mut program = Program::default();
    let mut ops = known_ops.clone();
    for item in &items {
        if let Item::Effect(d) = item {
            if !ops.insert(d.name.clone()) {
                errors.push(Diagnostic::error(
                    d.span,
                    format!("duplicate declaration of operation `{}`", d.name),
                ));
            }
        }
    }
    let mut ds = Desugar::new(source_names(src), &ops);
    let count = items.len();
    for (i, item) in items.into_iter().enumerate() {
        match item {
            Item::Effect(d) => program.decls.push(d),
            Item::Let(head) => {
                let (name, ann, term) = ds.let_head(&head, None);
                program.bindings.push(Binding { name, ann, term, span: head.span });
            }
            Item::Expr(e) => {
                if i + 1 != count {
                    errors.push(Diagnostic::error(
                        e.span,
                        "the main expression must be the last item of a program",
                    ));
                }
                let term = ds.expr(&e, None);
                program.main = Some(Main { term, span: e.span });
            }
        }
    }
    errors.append(&mut ds.errors);
    if errors.is_empty() {
        Ok(program)
    } else {
        Err(errors)
    }
}

/// Parses a single expression; operations are not checked against any
/// declarations.
pub fn parse_term(src: &str) -> Result<Term, Vec<Diagnostic>> {
    let mut p = Parser::new(src).map_err(|d| vec![d])?;
    let e = p.expr().map_err(|d| vec![d])?;
    p.finish().map_err(|d| vec![d])?;
    let mut ops = BTreeSet::new();
    e.kind_ops(&mut ops);
    let mut ds = Desugar::new(source_names(src), &ops);
    let t = ds.expr(&e, None);
    if ds.errors.is_empty() {
        Ok(t)
    } else {
        Err(ds.errors)
    }
}

pub fn parse_type(src: &str) -> Result<TypeExpr, Diagnostic> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_scheme(src: &str) -> Result<SchemeExpr, Diagnostic> {
    let mut p = Parser::new(src)?;
    let s = p.scheme()?;
    p.finish()?;
    Ok(s)
}

impl surface::Expr {
    /// Collects every operation name mentioned in calls and clauses.
    fn kind_ops(&self, out: &mut BTreeSet<Name>) {
        use surface::{Clause, ExprKind::*};
        match &self.kind {
            Var(_) | Const(_) | Resume | Nil => {}
            Op(op, a) => {
                out.insert(op.clone());
                a.kind_ops(out);
            }
            Handle(b, clauses) => {
                b.kind_ops(out);
                for c in clauses {
                    match c {
                        Clause::Return { body, .. } => body.kind_ops(out),
                        Clause::Op { op, body, .. } => {
                            out.insert(op.clone());
                            body.kind_ops(out);
                        }
                    }
                }
            }
            Fun(_, a) | Fst(a) | Snd(a) | Inl(a) | Inr(a) | Cons(a) | Fix(_, _, a) => a.kind_ops(out),
            Let(h, b) => {
                h.bound.kind_ops(out);
                b.kind_ops(out);
            }
            App(a, b) | Pair(a, b) | BinOp(_, a, b) => {
                a.kind_ops(out);
                b.kind_ops(out);
            }
            If(a, b, c) => {
                a.kind_ops(out);
                b.kind_ops(out);
                c.kind_ops(out);
            }
            CaseSum { scrut, left, right } => {
                scrut.kind_ops(out);
                left.1.kind_ops(out);
                right.1.kind_ops(out);
            }
            CaseList { scrut, nil, cons } => {
                scrut.kind_ops(out);
                nil.kind_ops(out);
                cons.1.kind_ops(out);
            }
            List(items) => items.iter().for_each(|i| i.kind_ops(out)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, Const};

    const FILTER: &str = r#"
effect select : forall a. a list ~> a
effect fail : forall a. unit ~> a

let rec map l f = case l of nil -> [] | cons p -> f (fst p) :: map (snd p) f
let rec concat l = case l of [] -> [] | x :: xs -> append x (concat xs)

handle
  let x = #select([3; 5; 10]) in
  if x < 6 then x else #fail()
with
| return z -> [z]
| select l -> concat (map l (fun y -> resume y))
| fail _ -> []
"#;

    #[test]
    fn parses_a_program_with_declarations_and_main() {
        let p = parse_program(FILTER).unwrap();
        assert_eq!(p.decls.len(), 2);
        assert_eq!(p.decls[1].name, Name::new("fail"));
        assert_eq!(p.bindings.len(), 2);
        assert!(matches!(p.bindings[0].term, Term::Fix(..)));
        let Term::Handle(_, h) = &p.main.unwrap().term else { panic!() };
        let sel = h.clause("select").unwrap();
        // resume became the clause's own continuation variable.
        assert!(sel.body.free_vars().contains(&sel.cont));
    }

    #[test]
    fn resume_outside_a_clause_is_rejected() {
        let errs = parse_program("resume 1").unwrap_err();
        assert_eq!(errs[0].message, "resume outside handler clause");
    }

    #[test]
    fn unbound_and_duplicate_operations() {
        let errs = parse_program("#nope(1)").unwrap_err();
        assert!(errs[0].message.contains("unbound operation `nope`"));
        let errs = parse_program("effect e : unit ~> unit\neffect e : unit ~> int").unwrap_err();
        assert!(errs[0].message.contains("duplicate declaration"));
    }

    #[test]
    fn list_literal_expands_to_pairs() {
        let t = parse_term("[3;5;10]").unwrap();
        assert_eq!(t, Term::list([Term::int(3), Term::int(5), Term::int(10)]));
        let Term::Cons(p) = t else { panic!() };
        assert!(matches!(*p, Term::Pair(..)));
    }

    #[test]
    fn precedence() {
        let t = parse_term("1 + 2 * 3 = 7 :: []").unwrap();
        let expect = parse_term("((1 + (2 * 3)) = 7) :: []").unwrap();
        assert_eq!(t, expect);
        assert_eq!(parse_term("(-4)").unwrap(), Term::Const(Const::Int(-4)));
        assert_eq!(parse_term("(+)").unwrap(), Term::Const(Const::Prim(crate::syntax::Prim::Add)));
    }

    #[test]
    fn pretty_examples() {
        assert_eq!(pretty_term(&parse_term("fun x -> x").unwrap()), "fun x -> x");
        let s = parse_scheme("forall a. a list -> a").unwrap();
        assert_eq!(pretty_scheme_expr(&s), "forall a. a list -> a");
        let h = parse_term("handle #select([1]) with return x -> x | select l -> resume 1").unwrap();
        let printed = pretty_term(&h);
        assert!(printed.starts_with("handle #select([1]) with return x -> x | select(l, k"), "{printed}");
    }

    #[test]
    fn round_trips() {
        for src in [
            "fun (x : int -{a,b}-> bool) -> case x of inl y -> (case y of [] -> 1 | cons p -> 2) | inr z -> 3",
            "let rec f x = if x = 0 then 1 else x * f (x - 1) in f 5",
            "handle let y = 1 in y with return x -> (fun u -> u) | op1 v -> (handle v with return w -> w) | op2(v, k) -> k v",
            "fst (1, 2) + snd (3, (4, \"a\\\"b\"))",
            "1 :: 2 :: (fun x -> x) :: []",
            "inl (cons (1, [])) (inr 2)",
            "let f : forall a. a -> a = fun x -> x in f",
            "(1 - 2) - (3 - 4) - (-5)",
        ] {
            let t = parse_term(src).unwrap();
            let printed = pretty_term(&t);
            let back = parse_term(&printed).unwrap_or_else(|e| panic!("{printed}: {e:?}"));
            assert!(alpha_eq(&t, &back), "{src}\n{printed}");
        }
    }
}
