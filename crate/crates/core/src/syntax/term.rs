use std::collections::{BTreeMap, BTreeSet};

use super::constants::Const;
use super::types::{SchemeExpr, TypeExpr};
use super::Name;

/// Terms of the core language after desugaring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(Name),
    Const(Const),
    /// `fun x -> body`, with an optional binder annotation.
    Abs(Name, Option<TypeExpr>, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `#op(arg)`
    Op(Name, Box<Term>),
    Handle(Box<Term>, Box<Handler>),
    /// `let x [: scheme] = bound in body`
    Let(Name, Option<SchemeExpr>, Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Proj1(Box<Term>),
    Proj2(Box<Term>),
    Inl(Box<Term>),
    Inr(Box<Term>),
    /// `case scrut of inl x -> l | inr y -> r`
    CaseSum(Box<Term>, Name, Box<Term>, Name, Box<Term>),
    Nil,
    /// `cons M` where `M` is a pair of head and tail.
    Cons(Box<Term>),
    /// `case scrut of nil -> n | cons p -> c`
    CaseList(Box<Term>, Box<Term>, Name, Box<Term>),
    /// `fix f. fun x -> body`
    Fix(Name, Name, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpClause {
    pub param: Name,
    pub cont: Name,
    pub body: Term,
}

/// One return clause and at most one clause per operation, kept sorted by
/// operation name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Handler {
    pub ret_var: Name,
    pub ret_body: Term,
    pub clauses: BTreeMap<Name, OpClause>,
}

impl Handler {
    pub fn new(ret_var: Name, ret_body: Term) -> Self {
        Handler { ret_var, ret_body, clauses: BTreeMap::new() }
    }

    /// Adds a clause; returns `false` (leaving the handler unchanged) if the
    /// operation already has one.
    pub fn add_clause(&mut self, op: Name, clause: OpClause) -> bool {
        if self.clauses.contains_key(&op) {
            return false;
        }
        self.clauses.insert(op, clause);
        true
    }

    pub fn clause(&self, op: &str) -> Option<&OpClause> {
        self.clauses.get(op)
    }

    pub fn handles(&self, op: &str) -> bool {
        self.clauses.contains_key(op)
    }
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(Name::new(x))
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Const::Int(n))
    }

    pub fn bool(b: bool) -> Term {
        Term::Const(Const::Bool(b))
    }

    pub fn unit() -> Term {
        Term::Const(Const::Unit)
    }

    pub fn abs(x: &str, body: Term) -> Term {
        Term::Abs(Name::new(x), None, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn op(op: &str, arg: Term) -> Term {
        Term::Op(Name::new(op), Box::new(arg))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Cons(Box::new(Term::pair(head, tail)))
    }

    pub fn let_(x: &str, bound: Term, body: Term) -> Term {
        Term::Let(Name::new(x), None, Box::new(bound), Box::new(body))
    }

    /// Builds a list literal from its elements.
    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>) -> Term {
        items.into_iter().rev().fold(Term::Nil, |acc, t| Term::cons(t, acc))
    }

    /// Values: constants, abstractions, and pairs, injections and conses of
    /// values.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Const(_) | Term::Abs(..) | Term::Nil => true,
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            Term::Inl(a) | Term::Inr(a) | Term::Cons(a) => a.is_value(),
            _ => false,
        }
    }

    /// If the term is a fully built list literal, its elements.
    pub fn as_list(&self) -> Option<Vec<&Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Nil => return Some(out),
                Term::Cons(p) => match &**p {
                    Term::Pair(h, t) => {
                        out.push(&**h);
                        cur = t;
                    }
                    _ => return None,
                },
                _ => return None,
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Nil => 1,
            Term::Abs(_, _, b) | Term::Fix(_, _, b) => 1 + b.size(),
            Term::Op(_, a)
            | Term::Proj1(a)
            | Term::Proj2(a)
            | Term::Inl(a)
            | Term::Inr(a)
            | Term::Cons(a) => 1 + a.size(),
            Term::App(a, b) | Term::Pair(a, b) | Term::Let(_, _, a, b) => 1 + a.size() + b.size(),
            Term::Handle(m, h) => {
                1 + m.size()
                    + h.ret_body.size()
                    + h.clauses.values().map(|c| c.body.size()).sum::<usize>()
            }
            Term::CaseSum(s, _, l, _, r) => 1 + s.size() + l.size() + r.size(),
            Term::CaseList(s, n, _, c) => 1 + s.size() + n.size() + c.size(),
            Term::If(c, t, e) => 1 + c.size() + t.size() + e.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Operation names called anywhere in the term or handled by one of its
    /// handlers.
    pub fn mentioned_ops(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Op(op, _) => {
                out.insert(op.clone());
            }
            Term::Handle(_, h) => out.extend(h.clauses.keys().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal of every subterm, including handler clause bodies.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Var(_) | Term::Const(_) | Term::Nil => {}
            Term::Abs(_, _, b) | Term::Fix(_, _, b) => b.visit(f),
            Term::Op(_, a)
            | Term::Proj1(a)
            | Term::Proj2(a)
            | Term::Inl(a)
            | Term::Inr(a)
            | Term::Cons(a) => a.visit(f),
            Term::App(a, b) | Term::Pair(a, b) | Term::Let(_, _, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Handle(m, h) => {
                m.visit(f);
                h.ret_body.visit(f);
                for c in h.clauses.values() {
                    c.body.visit(f);
                }
            }
            Term::CaseSum(s, _, l, _, r) => {
                s.visit(f);
                l.visit(f);
                r.visit(f);
            }
            Term::CaseList(s, n, _, c) => {
                s.visit(f);
                n.visit(f);
                c.visit(f);
            }
            Term::If(c, t, e) => {
                c.visit(f);
                t.visit(f);
                e.visit(f);
            }
        }
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let under = |names: &[&Name], body: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| {
        let n = bound.len();
        bound.extend(names.iter().map(|x| (*x).clone()));
        collect_free(body, bound, out);
        bound.truncate(n);
    };
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Const(_) | Term::Nil => {}
        Term::Abs(x, _, b) => under(&[x], b, bound, out),
        Term::Fix(f, x, b) => under(&[f, x], b, bound, out),
        Term::Op(_, a)
        | Term::Proj1(a)
        | Term::Proj2(a)
        | Term::Inl(a)
        | Term::Inr(a)
        | Term::Cons(a) => collect_free(a, bound, out),
        Term::App(a, b) | Term::Pair(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::Let(x, _, a, b) => {
            collect_free(a, bound, out);
            under(&[x], b, bound, out);
        }
        Term::Handle(m, h) => {
            collect_free(m, bound, out);
            under(&[&h.ret_var], &h.ret_body, bound, out);
            for c in h.clauses.values() {
                under(&[&c.param, &c.cont], &c.body, bound, out);
            }
        }
        Term::CaseSum(s, x, l, y, r) => {
            collect_free(s, bound, out);
            under(&[x], l, bound, out);
            under(&[y], r, bound, out);
        }
        Term::CaseList(s, n, x, c) => {
            collect_free(s, bound, out);
            collect_free(n, bound, out);
            under(&[x], c, bound, out);
        }
        Term::If(c, a, b) => {
            collect_free(c, bound, out);
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
    }
}

/// A variant of `base` (with a numeric suffix) that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|i| Name::from(format!("{stem}{i}")))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many candidates")
}

/// Capture-avoiding substitution `m[n/x]`.
pub fn subst_term(m: &Term, x: &Name, n: &Term) -> Term {
    let fv = n.free_vars();
    Subst { x, n, fv: &fv }.go(m)
}

struct Subst<'a> {
    x: &'a Name,
    n: &'a Term,
    fv: &'a BTreeSet<Name>,
}

impl Subst<'_> {
    /// Handles one binder group scoping over `body`. Returns the (possibly
    /// renamed) binders and the substituted body.
    fn bind(&self, binders: &[&Name], body: &Term) -> (Vec<Name>, Term) {
        let mut names: Vec<Name> = binders.iter().map(|b| (*b).clone()).collect();
        if names.contains(self.x) {
            return (names, body.clone());
        }
        let mut body = body.clone();
        if !self.fv.is_empty() && names.iter().any(|b| self.fv.contains(b)) {
            let body_fv = body.free_vars();
            if body_fv.contains(self.x) {
                let mut avoid: BTreeSet<Name> = self.fv.union(&body_fv).cloned().collect();
                avoid.extend(names.iter().cloned());
                avoid.insert(self.x.clone());
                for i in 0..names.len() {
                    if self.fv.contains(&names[i]) {
                        let fresh = fresh_name(names[i].as_str(), &avoid);
                        avoid.insert(fresh.clone());
                        // Later binders in the group shadow earlier ones.
                        if !names[i + 1..].contains(&names[i]) {
                            body = subst_term(&body, &names[i], &Term::Var(fresh.clone()));
                        }
                        names[i] = fresh;
                    }
                }
            }
        }
        (names, self.go(&body))
    }

    fn go(&self, m: &Term) -> Term {
        let b = |t: &Term| Box::new(self.go(t));
        match m {
            Term::Var(y) => {
                if y == self.x {
                    self.n.clone()
                } else {
                    m.clone()
                }
            }
            Term::Const(_) | Term::Nil => m.clone(),
            Term::Abs(y, ann, body) => {
                let (mut ns, body) = self.bind(&[y], body);
                Term::Abs(ns.remove(0), ann.clone(), Box::new(body))
            }
            Term::Fix(f, y, body) => {
                let (mut ns, body) = self.bind(&[f, y], body);
                let y = ns.remove(1);
                Term::Fix(ns.remove(0), y, Box::new(body))
            }
            Term::App(a, c) => Term::App(b(a), b(c)),
            Term::Op(op, a) => Term::Op(op.clone(), b(a)),
            Term::Handle(body, h) => {
                let (mut rv, rb) = self.bind(&[&h.ret_var], &h.ret_body);
                let mut nh = Handler::new(rv.remove(0), rb);
                for (op, c) in &h.clauses {
                    let (mut ns, cb) = self.bind(&[&c.param, &c.cont], &c.body);
                    let cont = ns.remove(1);
                    nh.clauses.insert(op.clone(), OpClause { param: ns.remove(0), cont, body: cb });
                }
                Term::Handle(b(body), Box::new(nh))
            }
            Term::Let(y, ann, bound, body) => {
                let bound = b(bound);
                let (mut ns, body) = self.bind(&[y], body);
                Term::Let(ns.remove(0), ann.clone(), bound, Box::new(body))
            }
            Term::Pair(a, c) => Term::Pair(b(a), b(c)),
            Term::Proj1(a) => Term::Proj1(b(a)),
            Term::Proj2(a) => Term::Proj2(b(a)),
            Term::Inl(a) => Term::Inl(b(a)),
            Term::Inr(a) => Term::Inr(b(a)),
            Term::Cons(a) => Term::Cons(b(a)),
            Term::CaseSum(s, y1, l, y2, r) => {
                let (mut n1, l) = self.bind(&[y1], l);
                let (mut n2, r) = self.bind(&[y2], r);
                Term::CaseSum(b(s), n1.remove(0), Box::new(l), n2.remove(0), Box::new(r))
            }
            Term::CaseList(s, nil, y, c) => {
                let (mut ns, c) = self.bind(&[y], c);
                Term::CaseList(b(s), b(nil), ns.remove(0), Box::new(c))
            }
            Term::If(c, t, e) => Term::If(b(c), b(t), b(e)),
        }
    }
}

/// Equality up to consistent renaming of bound term variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    AlphaEq::default().eq(a, b)
}

#[derive(Default)]
struct AlphaEq {
    left: Vec<Name>,
    right: Vec<Name>,
}

impl AlphaEq {
    fn lookup(env: &[Name], x: &Name) -> Option<usize> {
        env.iter().rposition(|y| y == x)
    }

    fn under(&mut self, xs: &[&Name], ys: &[&Name], a: &Term, b: &Term) -> bool {
        let n = self.left.len();
        self.left.extend(xs.iter().map(|x| (*x).clone()));
        self.right.extend(ys.iter().map(|y| (*y).clone()));
        let r = self.eq(a, b);
        self.left.truncate(n);
        self.right.truncate(n);
        r
    }

    fn eq(&mut self, a: &Term, b: &Term) -> bool {
        use Term::*;
        match (a, b) {
            (Var(x), Var(y)) => match (Self::lookup(&self.left, x), Self::lookup(&self.right, y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            },
            (Const(c), Const(d)) => c == d,
            (Nil, Nil) => true,
            (Abs(x, ta, m), Abs(y, tb, n)) => ta == tb && self.under(&[x], &[y], m, n),
            (Fix(f, x, m), Fix(g, y, n)) => self.under(&[f, x], &[g, y], m, n),
            (App(a1, a2), App(b1, b2)) | (Pair(a1, a2), Pair(b1, b2)) => {
                self.eq(a1, b1) && self.eq(a2, b2)
            }
            (Op(o1, m), Op(o2, n)) => o1 == o2 && self.eq(m, n),
            (Proj1(m), Proj1(n))
            | (Proj2(m), Proj2(n))
            | (Inl(m), Inl(n))
            | (Inr(m), Inr(n))
            | (Cons(m), Cons(n)) => self.eq(m, n),
            (Let(x, ta, m1, m2), Let(y, tb, n1, n2)) => {
                ta == tb && self.eq(m1, n1) && self.under(&[x], &[y], m2, n2)
            }
            (Handle(m, h), Handle(n, k)) => {
                self.eq(m, n)
                    && self.under(&[&h.ret_var], &[&k.ret_var], &h.ret_body, &k.ret_body)
                    && h.clauses.len() == k.clauses.len()
                    && h.clauses.iter().zip(k.clauses.iter()).all(|((o1, c1), (o2, c2))| {
                        o1 == o2
                            && self.under(&[&c1.param, &c1.cont], &[&c2.param, &c2.cont], &c1.body, &c2.body)
                    })
            }
            (CaseSum(s, x1, l1, y1, r1), CaseSum(t, x2, l2, y2, r2)) => {
                self.eq(s, t) && self.under(&[x1], &[x2], l1, l2) && self.under(&[y1], &[y2], r1, r2)
            }
            (CaseList(s, n1, x1, c1), CaseList(t, n2, x2, c2)) => {
                self.eq(s, t) && self.eq(n1, n2) && self.under(&[x1], &[x2], c1, c2)
            }
            (If(c1, t1, e1), If(c2, t2, e2)) => self.eq(c1, c2) && self.eq(t1, t2) && self.eq(e1, e2),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subst_under_unrelated_binder() {
        let m = Term::abs("y", Term::var("x"));
        let r = subst_term(&m, &Name::new("x"), &Term::var("v"));
        assert_eq!(r, Term::abs("y", Term::var("v")));
    }

    #[test]
    fn subst_respects_shadowing() {
        let m = Term::abs("x", Term::var("x"));
        let r = subst_term(&m, &Name::new("x"), &Term::var("v"));
        assert_eq!(r, m);
    }

    #[test]
    fn subst_avoids_capture() {
        // (fun y -> y x)[y/x] = fun z -> z y
        let m = Term::abs("y", Term::app(Term::var("y"), Term::var("x")));
        let r = subst_term(&m, &Name::new("x"), &Term::var("y"));
        let expected = Term::abs("z", Term::app(Term::var("z"), Term::var("y")));
        assert!(alpha_eq(&r, &expected), "{r:?}");
        assert_ne!(r, Term::abs("y", Term::app(Term::var("y"), Term::var("y"))));
    }

    #[test]
    fn subst_avoids_capture_in_handler_clauses() {
        let mut h = Handler::new(Name::new("r"), Term::var("r"));
        h.add_clause(
            Name::new("op"),
            OpClause { param: Name::new("a"), cont: Name::new("k"), body: Term::app(Term::var("k"), Term::var("x")) },
        );
        let m = Term::Handle(Box::new(Term::unit()), Box::new(h));
        let r = subst_term(&m, &Name::new("x"), &Term::var("k"));
        assert_eq!(r.free_vars(), [Name::new("k")].into_iter().collect());
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_eq(&Term::abs("x", Term::var("x")), &Term::abs("y", Term::var("y"))));
        assert!(!alpha_eq(
            &Term::abs("x", Term::abs("y", Term::var("x"))),
            &Term::abs("a", Term::abs("b", Term::var("b")))
        ));
        assert!(!alpha_eq(&Term::var("x"), &Term::var("y")));
    }

    #[test]
    fn list_helpers() {
        let l = Term::list([Term::int(1), Term::int(2)]);
        assert!(l.is_value());
        assert_eq!(l.as_list().unwrap().len(), 2);
        assert!(Term::Nil.as_list().unwrap().is_empty());
    }

    #[test]
    fn duplicate_clause_rejected() {
        let mut h = Handler::new(Name::new("x"), Term::var("x"));
        let c = OpClause { param: Name::new("a"), cont: Name::new("k"), body: Term::unit() };
        assert!(h.add_clause(Name::new("fail"), c.clone()));
        assert!(!h.add_clause(Name::new("fail"), c));
    }
}
