//! Generated-case laws for polarity, unification, decomposition, the
//! evaluators and the printer. Each law runs `CASES` cases from a fixed seed
//! and panics with a minimized counterexample on failure.

use std::cell::Cell;
use std::collections::HashMap;

use crate::common::{arb_term, arb_type, check, type_depth, CASES};
use efflang_core::eval::bigstep::evaluate;
use efflang_core::eval::{decompose, run, Decomposition, Frame, Outcome, Redex};
use efflang_core::infer::unify;
use efflang_core::parse::{parse_term, pretty_term};
use efflang_core::polarity::{occurrence_list, occurrences, OccurrenceReport};
use efflang_core::syntax::{alpha_eq, ftv, subst_type, TyVar, Type, Term};
use proptest::prelude::*;

fn v(i: u32) -> TyVar {
    TyVar::unif(i)
}

// ---------------------------------------------------------------- polarity

fn flags(r: &OccurrenceReport) -> (bool, bool, bool) {
    (r.occurs_positive(), r.occurs_negative(), r.occurs_strictly_positive())
}

pub fn strictly_positive_implies_positive() {
    check((arb_type(4, 3), 0..4u32), |(t, i)| {
        for o in occurrence_list(v(i), &t) {
            prop_assert!(!o.strictly_positive || o.positive, "{o:?} in {t:?}");
        }
        let r = occurrences(v(i), &t);
        prop_assert!(!r.occurs_strictly_positive() || r.occurs_positive());
        Ok(())
    });
}

pub fn absent_variables_have_no_flags() {
    check((arb_type(3, 3), 0..6u32), |(t, i)| {
        let r = occurrences(v(i), &t);
        if !ftv(&t).contains(&v(i)) {
            prop_assert_eq!(flags(&r), (false, false, false));
            prop_assert!(occurrence_list(v(i), &t).is_empty());
        } else {
            prop_assert!(r.occurs_positive() || r.occurs_negative());
        }
        Ok(())
    });
}

pub fn arrow_domain_flips_polarity() {
    check((arb_type(3, 2), arb_type(3, 2), 0..3u32), |(a, b, i)| {
        let (pa, na, _) = flags(&occurrences(v(i), &a));
        let (pb, nb, sb) = flags(&occurrences(v(i), &b));
        let (p, n, s) = flags(&occurrences(v(i), &Type::arrow(a.clone(), b.clone())));
        prop_assert_eq!(p, na || pb);
        prop_assert_eq!(n, pa || nb);
        prop_assert_eq!(s, sb);
        Ok(())
    });
}

pub fn data_constructors_preserve_polarity() {
    check((arb_type(3, 2), arb_type(3, 2), 0..3u32), |(a, b, i)| {
        let (pa, na, sa) = flags(&occurrences(v(i), &a));
        let (pb, nb, sb) = flags(&occurrences(v(i), &b));
        for t in [Type::prod(a.clone(), b.clone()), Type::sum(a.clone(), b.clone())] {
            prop_assert_eq!(flags(&occurrences(v(i), &t)), (pa || pb, na || nb, sa || sb));
        }
        prop_assert_eq!(flags(&occurrences(v(i), &Type::list(a.clone()))), (pa, na, sa));
        Ok(())
    });
}

// ------------------------------------------------------------- unification

/// Robinson's algorithm with eager substitution into the remaining
/// equations; the result is fully resolved.
fn oracle_unify(a: &Type, b: &Type) -> Option<HashMap<TyVar, Type>> {
    let mut eqs = vec![(a.clone(), b.clone())];
    let mut sol: HashMap<TyVar, Type> = HashMap::new();
    while let Some((s, t)) = eqs.pop() {
        match (s, t) {
            (Type::Var(x), Type::Var(y)) if x == y => {}
            (Type::Var(x), t) | (t, Type::Var(x)) => {
                if ftv(&t).contains(&x) {
                    return None;
                }
                let one: HashMap<TyVar, Type> = [(x, t.clone())].into();
                for (l, r) in eqs.iter_mut() {
                    *l = subst_type(l, &one);
                    *r = subst_type(r, &one);
                }
                for img in sol.values_mut() {
                    *img = subst_type(img, &one);
                }
                sol.insert(x, t);
            }
            (Type::Base(x), Type::Base(y)) if x == y => {}
            (Type::Arrow(a1, b1, _), Type::Arrow(a2, b2, _))
            | (Type::Prod(a1, b1), Type::Prod(a2, b2))
            | (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
                eqs.push((*a1, *a2));
                eqs.push((*b1, *b2));
            }
            (Type::List(a), Type::List(b)) => eqs.push((*a, *b)),
            _ => return None,
        }
    }
    Some(sol)
}

/// Replaces the subtrees selected by `cuts` (pre-order, root excluded) with
/// fresh variables numbered from `next`.
fn generalize(t: &Type, cuts: &[bool], pos: &mut usize, next: &mut u32, root: bool) -> Type {
    if !root {
        let cut = cuts.get(*pos).copied().unwrap_or(false);
        *pos += 1;
        if cut {
            *next += 1;
            return Type::var(v(*next - 1));
        }
    }
    let mut g = |t: &Type| Box::new(generalize(t, cuts, pos, next, false));
    match t {
        Type::Var(_) | Type::Base(_) => t.clone(),
        Type::Arrow(a, b, e) => {
            let a = g(a);
            Type::Arrow(a, g(b), e.clone())
        }
        Type::Prod(a, b) => {
            let a = g(a);
            Type::Prod(a, g(b))
        }
        Type::Sum(a, b) => {
            let a = g(a);
            Type::Sum(a, g(b))
        }
        Type::List(a) => Type::List(g(a)),
    }
}

/// Pairs of types of depth at most 4: half independent, half two
/// generalizations of a common type (so always unifiable).
fn type_pair() -> impl Strategy<Value = (Type, Type)> {
    let independent = (arb_type(3, 3), arb_type(3, 3));
    let related = (arb_type(3, 3), prop::collection::vec(prop::bool::weighted(0.3), 16), prop::collection::vec(prop::bool::weighted(0.3), 16))
        .prop_map(|(t, c1, c2)| {
            let mut next = 10;
            let a = generalize(&t, &c1, &mut 0, &mut next, true);
            let b = generalize(&t, &c2, &mut 0, &mut next, true);
            (a, b)
        });
    prop_oneof![independent, related]
}

fn all_vars(a: &Type, b: &Type) -> Vec<TyVar> {
    let mut vs = ftv(a);
    vs.extend(ftv(b));
    vs.into_iter().collect()
}

pub fn unifier_is_sound_and_most_general() {
    let unified = Cell::new(0u32);
    check(type_pair(), |(a, b)| {
        prop_assert!(type_depth(&a) <= 4 && type_depth(&b) <= 4);
        let ours = unify(&a, &b);
        let theirs = oracle_unify(&a, &b);
        prop_assert_eq!(ours.is_ok(), theirs.is_some(), "{:?} vs {:?}", a, b);
        let (Ok(sigma), Some(theta)) = (ours, theirs) else { return Ok(()) };
        unified.set(unified.get() + 1);
        prop_assert_eq!(sigma.apply(&a), sigma.apply(&b));
        // Idempotent.
        prop_assert_eq!(sigma.apply(&sigma.apply(&a)), sigma.apply(&a));
        for x in all_vars(&a, &b) {
            let tx = Type::var(x);
            // theta factors through sigma, and sigma through theta.
            prop_assert_eq!(subst_type(&sigma.apply(&tx), &theta), subst_type(&tx, &theta));
            prop_assert_eq!(sigma.apply(&subst_type(&tx, &theta)), sigma.apply(&tx));
        }
        Ok(())
    });
    assert!(unified.get() >= CASES / 3, "only {} unifiable pairs", unified.get());
}

pub fn unifier_against_a_known_unifier() {
    // `theta` maps the cut variables back to the subtrees they replaced.
    let strategy = (arb_type(3, 3), prop::collection::vec(any::<bool>(), 16));
    check(strategy, |(t, cuts)| {
        let mut next = 10;
        let g = generalize(&t, &cuts, &mut 0, &mut next, true);
        let sigma = unify(&g, &t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(sigma.apply(&g), sigma.apply(&t));
        // `t` is an instance of `g`, so the unifier only touches cut variables.
        for x in ftv(&t) {
            prop_assert_eq!(sigma.apply(&Type::var(x)), Type::var(x));
        }
        prop_assert_eq!(sigma.apply(&g), t);
        Ok(())
    });
}

// ----------------------------------------------------------- decomposition

fn is_val(t: &Term) -> bool {
    match t {
        Term::Const(_) | Term::Abs(..) | Term::Nil => true,
        Term::Pair(a, b) => is_val(a) && is_val(b),
        Term::Inl(a) | Term::Inr(a) | Term::Cons(a) => is_val(a),
        _ => false,
    }
}

/// Every way of writing `m` as `E[n]` with `E` an evaluation context
/// (left to right, call by value), outermost frame first.
fn splits(m: &Term) -> Vec<(Vec<Frame>, Term)> {
    let mut out = vec![(vec![], m.clone())];
    let mut sub = |frame: Frame, child: &Term| {
        for (mut fs, n) in splits(child) {
            fs.insert(0, frame.clone());
            out.push((fs, n));
        }
    };
    match m {
        Term::App(f, a) => {
            sub(Frame::AppFn((**a).clone()), f);
            if is_val(f) {
                sub(Frame::AppArg((**f).clone()), a);
            }
        }
        Term::Op(op, a) => sub(Frame::OpArg(op.clone()), a),
        Term::Handle(body, h) => sub(Frame::Handle((**h).clone()), body),
        Term::Let(x, ann, bound, body) => sub(Frame::LetF(x.clone(), ann.clone(), (**body).clone()), bound),
        Term::Pair(a, b) => {
            sub(Frame::PairL((**b).clone()), a);
            if is_val(a) {
                sub(Frame::PairR((**a).clone()), b);
            }
        }
        Term::Proj1(a) => sub(Frame::Proj1, a),
        Term::Proj2(a) => sub(Frame::Proj2, a),
        Term::Inl(a) => sub(Frame::InlF, a),
        Term::Inr(a) => sub(Frame::InrF, a),
        Term::Cons(a) => sub(Frame::ConsF, a),
        Term::CaseSum(s, x, l, y, r) => {
            sub(Frame::CaseSumF(x.clone(), (**l).clone(), y.clone(), (**r).clone()), s)
        }
        Term::CaseList(s, n, p, c) => sub(Frame::CaseListF((**n).clone(), p.clone(), (**c).clone()), s),
        Term::If(c, t, e) => sub(Frame::IfF((**t).clone(), (**e).clone()), c),
        Term::Var(_) | Term::Const(_) | Term::Abs(..) | Term::Nil | Term::Fix(..) => {}
    }
    out
}

/// A non-value whose evaluated positions all hold values.
fn active(n: &Term) -> bool {
    let children: Vec<&Term> = match n {
        Term::App(f, a) | Term::Pair(f, a) => vec![f, a],
        Term::Op(_, a) | Term::Proj1(a) | Term::Proj2(a) | Term::Inl(a) | Term::Inr(a) | Term::Cons(a) => vec![a],
        Term::Handle(b, _) | Term::Let(_, _, b, _) => vec![b],
        Term::CaseSum(s, ..) | Term::CaseList(s, ..) | Term::If(s, ..) => vec![s],
        _ => vec![],
    };
    !is_val(n) && children.into_iter().all(is_val)
}

fn handles(f: &Frame, op: &str) -> bool {
    matches!(f, Frame::Handle(h) if h.clauses.keys().any(|o| o.as_str() == op))
}

pub fn decomposition_is_unique_and_refills() {
    let redexes = Cell::new(0u32);
    check(arb_term(12), |m| {
        prop_assert!(m.size() <= 12 && m.is_closed(), "{m:?}");
        let candidates: Vec<(Vec<Frame>, Term)> = splits(&m).into_iter().filter(|(_, n)| active(n)).collect();
        match decompose(&m) {
            Decomposition::Value => {
                prop_assert!(is_val(&m));
                prop_assert!(candidates.is_empty());
            }
            d => {
                prop_assert!(!is_val(&m));
                prop_assert_eq!(candidates.len(), 1, "{}", pretty_term(&m));
                let (frames, n) = &candidates[0];
                match d {
                    Decomposition::Redex(ctx, Redex::Simple(r)) => {
                        redexes.set(redexes.get() + 1);
                        prop_assert!(!matches!(r, Term::Op(..)));
                        prop_assert_eq!(&ctx.frames, frames);
                        prop_assert_eq!(&r, n);
                        prop_assert_eq!(ctx.fill(r), m.clone());
                    }
                    Decomposition::Redex(ctx, redex @ Redex::Handle { .. }) => {
                        redexes.set(redexes.get() + 1);
                        let Redex::Handle { handler, inner, op, arg } = &redex else { unreachable!() };
                        prop_assert_eq!(n, &Term::Op(op.clone(), Box::new(arg.clone())));
                        let mut expect = ctx.frames.clone();
                        expect.push(Frame::Handle(handler.clone()));
                        expect.extend(inner.frames.iter().cloned());
                        prop_assert_eq!(&expect, frames);
                        prop_assert!(handler.handles(op.as_str()));
                        prop_assert!(!inner.frames.iter().any(|f| handles(f, op.as_str())));
                        prop_assert_eq!(ctx.fill(redex.to_term()), m.clone());
                    }
                    Decomposition::Unhandled { ctx, op, arg } => {
                        let call = Term::Op(op.clone(), Box::new(arg));
                        prop_assert_eq!(n, &call);
                        prop_assert_eq!(&ctx.frames, frames);
                        prop_assert!(!frames.iter().any(|f| handles(f, op.as_str())));
                        prop_assert_eq!(ctx.fill(call), m.clone());
                    }
                    Decomposition::Value => unreachable!(),
                }
            }
        }
        Ok(())
    });
    assert!(redexes.get() >= CASES / 4, "only {} redexes", redexes.get());
}

// -------------------------------------------------------------- evaluators

/// Same outcome kind and step count, with alpha-equal results.
pub fn agree(m: &Term, fuel: u64) -> Result<bool, TestCaseError> {
    let small = run(m, fuel);
    let (big, steps) = evaluate(m, fuel);
    if small.outcome == Outcome::OutOfFuel {
        return Ok(false);
    }
    let shown = pretty_term(m);
    prop_assert_eq!(small.outcome.kind(), big.kind(), "{}", shown);
    prop_assert_eq!(small.steps, steps, "{}", shown);
    match (&small.outcome, &big) {
        (Outcome::Value(a), Outcome::Value(b)) => prop_assert!(alpha_eq(a, b), "{}", shown),
        (Outcome::UnhandledOp { op: o1, arg: a1 }, Outcome::UnhandledOp { op: o2, arg: a2 }) => {
            prop_assert_eq!(o1, o2);
            prop_assert!(alpha_eq(a1, a2), "{}", shown);
        }
        _ => {}
    }
    Ok(true)
}

pub fn small_step_agrees_with_big_step() {
    let terminated = Cell::new(0u32);
    check(arb_term(20), |m| {
        if agree(&m, 5_000)? {
            terminated.set(terminated.get() + 1);
        }
        Ok(())
    });
    assert!(terminated.get() >= CASES * 9 / 10, "only {} terminated", terminated.get());
}

// ------------------------------------------------------------------ syntax

pub fn pretty_output_reparses() {
    check(arb_term(30), |m| {
        let src = pretty_term(&m);
        let back = parse_term(&src).map_err(|d| TestCaseError::fail(format!("{src}: {}", d[0].message)))?;
        prop_assert!(alpha_eq(&m, &back), "{} reparsed as {}", src, pretty_term(&back));
        Ok(())
    });
}

pub fn alpha_equivalence_is_reflexive_and_sees_renaming() {
    check(arb_term(16), |m| {
        prop_assert!(alpha_eq(&m, &m));
        if let Term::Abs(x, ann, body) = &m {
            let z = efflang_core::syntax::Name::new("z");
            let renamed = Term::Abs(
                z.clone(),
                ann.clone(),
                Box::new(efflang_core::syntax::subst_term(body, x, &Term::Var(z))),
            );
            prop_assert!(alpha_eq(&m, &renamed));
        }
        Ok(())
    });
}

/// Every law, by name.
pub const ALL: [(&str, fn()); 10] = [
    ("strict occurrences are positive", strictly_positive_implies_positive),
    ("absent variables have no flags", absent_variables_have_no_flags),
    ("arrow domains flip polarity", arrow_domain_flips_polarity),
    ("data constructors preserve polarity", data_constructors_preserve_polarity),
    ("unifier is sound and most general", unifier_is_sound_and_most_general),
    ("unifier against a known unifier", unifier_against_a_known_unifier),
    ("decomposition is unique and refills", decomposition_is_unique_and_refills),
    ("small step agrees with big step", small_step_agrees_with_big_step),
    ("printed terms reparse", pretty_output_reparses),
    ("alpha equivalence", alpha_equivalence_is_reflexive_and_sees_renaming),
];
