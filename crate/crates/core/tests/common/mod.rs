//! Generators and runner configuration shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use efflang_core::syntax::{BaseType, Const, Handler, Name, OpClause, Prim, TyVar, Type, Term};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

pub const SEED: u64 = 0x00ef_f1a6_2024;
pub const CASES: u32 = 1000;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        max_shrink_iters: 256,
        ..Config::default()
    }
}

pub fn runner() -> TestRunner {
    TestRunner::new(config())
}

/// Runs `test` on `CASES` values from `strategy`, panicking with the
/// minimized counterexample on failure.
pub fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>)
where
    S::Value: std::fmt::Debug,
{
    if let Err(e) = runner().run(&strategy, test) {
        panic!("{e}");
    }
}

// ------------------------------------------------------------------- types

/// Types over `nvars` unification variables, `int` and `bool`, with at most
/// `depth` levels of constructors above the leaves.
pub fn arb_type(nvars: u32, depth: u32) -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![
        3 => (0..nvars).prop_map(|i| Type::var(TyVar::unif(i))),
        1 => Just(Type::Base(BaseType::Int)),
        1 => Just(Type::Base(BaseType::Bool)),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::arrow(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::prod(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::sum(a, b)),
            inner.prop_map(Type::list),
        ]
    })
}

/// Height of a type: leaves are 1.
pub fn type_depth(t: &Type) -> usize {
    match t {
        Type::Var(_) | Type::Base(_) => 1,
        Type::Arrow(a, b, _) | Type::Prod(a, b) | Type::Sum(a, b) => 1 + type_depth(a).max(type_depth(b)),
        Type::List(a) => 1 + type_depth(a),
    }
}

// ------------------------------------------------------------------- terms

const BINDERS: [&str; 4] = ["x", "y", "f", "k"];
const OPS: [&str; 2] = ["a", "b"];
const PRIMS: [Prim; 6] = [Prim::Add, Prim::Sub, Prim::Eq, Prim::Lt, Prim::Not, Prim::Length];

/// Builds terms by reading choices off a byte tape; reading past the end
/// yields zeros, which always select the smallest option.
pub struct TermGen<'a> {
    tape: &'a [u8],
    pos: usize,
}

impl<'a> TermGen<'a> {
    /// A closed term with at most `size` nodes, as counted by `Term::size`.
    pub fn closed(tape: &'a [u8], size: usize) -> Term {
        TermGen { tape, pos: 0 }.term(&mut Vec::new(), size.max(1))
    }

    fn byte(&mut self) -> u8 {
        let b = self.tape.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    fn pick(&mut self, n: usize) -> usize {
        self.byte() as usize % n
    }

    fn binder(&mut self) -> Name {
        Name::new(BINDERS[self.pick(BINDERS.len())])
    }

    fn op(&mut self) -> Name {
        Name::new(OPS[self.pick(OPS.len())])
    }

    /// Splits `budget` into `k` parts of at least one each.
    fn parts(&mut self, budget: usize, k: usize) -> Option<Vec<usize>> {
        if budget < k {
            return None;
        }
        let mut rest = budget - k;
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let extra = if i + 1 == k { rest } else { self.pick(rest + 1) };
            rest -= extra;
            out.push(1 + extra);
        }
        Some(out)
    }

    fn leaf(&mut self, env: &[Name]) -> Term {
        if !env.is_empty() && self.pick(3) == 0 {
            return Term::Var(env[self.pick(env.len())].clone());
        }
        match self.pick(10) {
            0..=2 => Term::int(self.pick(4) as i64),
            3 => Term::bool(true),
            4 => Term::bool(false),
            5 => Term::unit(),
            6 => Term::Const(Const::str("ab")),
            7 | 8 => Term::Const(Const::Prim(PRIMS[self.pick(PRIMS.len())])),
            _ => Term::Nil,
        }
    }

    fn under(&mut self, env: &mut Vec<Name>, xs: &[Name], budget: usize) -> Term {
        let n = env.len();
        env.extend(xs.iter().cloned());
        let t = self.term(env, budget);
        env.truncate(n);
        t
    }

    fn term(&mut self, env: &mut Vec<Name>, budget: usize) -> Term {
        fn b(t: Term) -> Box<Term> {
            Box::new(t)
        }
        if budget <= 1 {
            return self.leaf(env);
        }
        let inner = budget - 1;
        let arity = |form: usize| match form {
            1 | 3 | 7..=10 | 12 | 14 => 1,
            2 | 4 | 5 | 6 => 2,
            _ => 3,
        };
        let form = self.pick(16);
        if form == 0 {
            return self.leaf(env);
        }
        let Some(p) = self.parts(inner, arity(form)) else { return self.leaf(env) };
        match form {
            1 => {
                let x = self.binder();
                Term::Abs(x.clone(), None, b(self.under(env, &[x], p[0])))
            }
            2 => Term::App(b(self.term(env, p[0])), b(self.term(env, p[1]))),
            3 => Term::Op(self.op(), b(self.term(env, p[0]))),
            4 => {
                let body = self.term(env, p[0]);
                Term::Handle(b(body), Box::new(self.handler(env, p[1])))
            }
            5 => {
                let x = self.binder();
                let bound = self.term(env, p[0]);
                Term::Let(x.clone(), None, b(bound), b(self.under(env, &[x], p[1])))
            }
            6 => Term::Pair(b(self.term(env, p[0])), b(self.term(env, p[1]))),
            7 => Term::Proj1(b(self.term(env, p[0]))),
            8 => Term::Proj2(b(self.term(env, p[0]))),
            9 => Term::Inl(b(self.term(env, p[0]))),
            10 => Term::Inr(b(self.term(env, p[0]))),
            11 => {
                let s = self.term(env, p[0]);
                let (x, y) = (self.binder(), self.binder());
                let l = self.under(env, std::slice::from_ref(&x), p[1]);
                Term::CaseSum(b(s), x, b(l), y.clone(), b(self.under(env, &[y], p[2])))
            }
            12 => Term::Cons(b(self.term(env, p[0]))),
            13 => {
                let s = self.term(env, p[0]);
                let n = self.term(env, p[1]);
                let x = self.binder();
                Term::CaseList(b(s), b(n), x.clone(), b(self.under(env, &[x], p[2])))
            }
            14 => {
                let (f, x) = (Name::new("f"), self.binder());
                let x = if x.as_str() == "f" { Name::new("x") } else { x };
                Term::Fix(f.clone(), x.clone(), b(self.under(env, &[f, x], p[0])))
            }
            _ => Term::If(b(self.term(env, p[0])), b(self.term(env, p[1])), b(self.term(env, p[2]))),
        }
    }

    /// A handler whose clause bodies together have `budget` nodes.
    fn handler(&mut self, env: &mut Vec<Name>, budget: usize) -> Handler {
        let nclauses = self.pick(3).min(budget - 1);
        let p = self.parts(budget, 1 + nclauses).expect("enough budget");
        let x = self.binder();
        let mut h = Handler::new(x.clone(), self.under(env, &[x], p[0]));
        let mut clauses = BTreeMap::new();
        for (i, &size) in p[1..].iter().enumerate() {
            let op = Name::new(OPS[i]);
            let param = self.binder();
            let cont = if param.as_str() == "k" { Name::new("x") } else { Name::new("k") };
            let body = self.under(env, &[param.clone(), cont.clone()], size);
            clauses.insert(op, OpClause { param, cont, body });
        }
        h.clauses = clauses;
        h
    }
}

/// Closed terms of at most `size` nodes.
pub fn arb_term(size: usize) -> impl Strategy<Value = Term> {
    proptest::collection::vec(any::<u8>(), 0..size * 6).prop_map(move |tape| TermGen::closed(&tape, size))
}
