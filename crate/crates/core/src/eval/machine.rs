//! Small-step reduction by decomposition into an evaluation context and a
//! redex.

use std::fmt;

use crate::parse::pretty_term;
use crate::syntax::{fresh_name, subst_term, zeta, Handler, Name, SchemeExpr, Term};

/// One layer of an evaluation context; the hole sits where the frame's
/// missing subterm goes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    /// `[] M`
    AppFn(Term),
    /// `v []`
    AppArg(Term),
    /// `#op([])`
    OpArg(Name),
    /// `handle [] with H`
    Handle(Handler),
    /// `let x = [] in N`
    LetF(Name, Option<SchemeExpr>, Term),
    /// `([], M)`
    PairL(Term),
    /// `(v, [])`
    PairR(Term),
    Proj1,
    Proj2,
    InlF,
    InrF,
    ConsF,
    /// `case [] of inl x -> M | inr y -> N`
    CaseSumF(Name, Term, Name, Term),
    /// `case [] of [] -> M | cons p -> N`
    CaseListF(Term, Name, Term),
    /// `if [] then M else N`
    IfF(Term, Term),
}

impl Frame {
    pub fn fill(&self, t: Term) -> Term {
        fn b(t: Term) -> Box<Term> {
            Box::new(t)
        }
        match self.clone() {
            Frame::AppFn(a) => Term::App(b(t), b(a)),
            Frame::AppArg(f) => Term::App(b(f), b(t)),
            Frame::OpArg(op) => Term::Op(op, b(t)),
            Frame::Handle(h) => Term::Handle(b(t), Box::new(h)),
            Frame::LetF(x, ann, n) => Term::Let(x, ann, b(t), b(n)),
            Frame::PairL(r) => Term::Pair(b(t), b(r)),
            Frame::PairR(l) => Term::Pair(b(l), b(t)),
            Frame::Proj1 => Term::Proj1(b(t)),
            Frame::Proj2 => Term::Proj2(b(t)),
            Frame::InlF => Term::Inl(b(t)),
            Frame::InrF => Term::Inr(b(t)),
            Frame::ConsF => Term::Cons(b(t)),
            Frame::CaseSumF(x, l, y, r) => Term::CaseSum(b(t), x, b(l), y, b(r)),
            Frame::CaseListF(n, p, c) => Term::CaseList(b(t), b(n), p, b(c)),
            Frame::IfF(m, n) => Term::If(b(t), b(m), b(n)),
        }
    }
}

/// An evaluation context as a stack of frames, outermost first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalContext {
    pub frames: Vec<Frame>,
}

impl EvalContext {
    pub fn fill(&self, t: Term) -> Term {
        self.frames.iter().rev().fold(t, |acc, f| f.fill(acc))
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Whether no frame handles `op`.
    pub fn is_op_free(&self, op: &str) -> bool {
        !self.frames.iter().any(|f| matches!(f, Frame::Handle(h) if h.handles(op)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redex {
    /// Any redex other than an operation call meeting its handler.
    Simple(Term),
    /// `handle E[#op(arg)] with H`, where `E` does not handle `op`.
    Handle { handler: Handler, inner: EvalContext, op: Name, arg: Term },
}

impl Redex {
    pub fn to_term(&self) -> Term {
        match self {
            Redex::Simple(t) => t.clone(),
            Redex::Handle { handler, inner, op, arg } => Term::Handle(
                Box::new(inner.fill(Term::Op(op.clone(), Box::new(arg.clone())))),
                Box::new(handler.clone()),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Value,
    Redex(EvalContext, Redex),
    /// `E[#op(arg)]` with no handler for `op` in `E`.
    Unhandled { ctx: EvalContext, op: Name, arg: Term },
}

/// Splits a closed term into an evaluation context and the redex in its
/// hole, evaluating left to right, call by value.
pub fn decompose(m: &Term) -> Decomposition {
    if m.is_value() {
        return Decomposition::Value;
    }
    let mut frames = Vec::new();
    let mut cur = m;
    loop {
        let (frame, next) = match cur {
            Term::App(f, a) if !f.is_value() => (Frame::AppFn((**a).clone()), &**f),
            Term::App(f, a) if !a.is_value() => (Frame::AppArg((**f).clone()), &**a),
            Term::Op(op, a) if !a.is_value() => (Frame::OpArg(op.clone()), &**a),
            Term::Handle(body, h) if !body.is_value() => (Frame::Handle((**h).clone()), &**body),
            Term::Let(x, ann, b, n) if !b.is_value() => (Frame::LetF(x.clone(), ann.clone(), (**n).clone()), &**b),
            Term::Pair(a, b) if !a.is_value() => (Frame::PairL((**b).clone()), &**a),
            Term::Pair(a, b) if !b.is_value() => (Frame::PairR((**a).clone()), &**b),
            Term::Proj1(a) if !a.is_value() => (Frame::Proj1, &**a),
            Term::Proj2(a) if !a.is_value() => (Frame::Proj2, &**a),
            Term::Inl(a) if !a.is_value() => (Frame::InlF, &**a),
            Term::Inr(a) if !a.is_value() => (Frame::InrF, &**a),
            Term::Cons(a) if !a.is_value() => (Frame::ConsF, &**a),
            Term::CaseSum(s, x, l, y, r) if !s.is_value() => {
                (Frame::CaseSumF(x.clone(), (**l).clone(), y.clone(), (**r).clone()), &**s)
            }
            Term::CaseList(s, n, p, c) if !s.is_value() => {
                (Frame::CaseListF((**n).clone(), p.clone(), (**c).clone()), &**s)
            }
            Term::If(c, t, e) if !c.is_value() => (Frame::IfF((**t).clone(), (**e).clone()), &**c),
            _ => break,
        };
        frames.push(frame);
        cur = next;
    }
    if let Term::Op(op, arg) = cur {
        let found = frames
            .iter()
            .rposition(|f| matches!(f, Frame::Handle(h) if h.handles(op.as_str())));
        return match found {
            None => Decomposition::Unhandled { ctx: EvalContext { frames }, op: op.clone(), arg: (**arg).clone() },
            Some(i) => {
                let inner = EvalContext { frames: frames.split_off(i + 1) };
                let Some(Frame::Handle(handler)) = frames.pop() else { unreachable!() };
                let redex = Redex::Handle { handler, inner, op: op.clone(), arg: (**arg).clone() };
                Decomposition::Redex(EvalContext { frames }, redex)
            }
        };
    }
    Decomposition::Redex(EvalContext { frames }, Redex::Simple(cur.clone()))
}

/// Name of the reduction rule applied by a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Const,
    Beta,
    Return,
    Handle,
    Proj1,
    Proj2,
    CaseL,
    CaseR,
    Nil,
    Cons,
    Fix,
    IfTrue,
    IfFalse,
}

impl Rule {
    pub const ALL: [Rule; 13] = [
        Rule::Const,
        Rule::Beta,
        Rule::Return,
        Rule::Handle,
        Rule::Proj1,
        Rule::Proj2,
        Rule::CaseL,
        Rule::CaseR,
        Rule::Nil,
        Rule::Cons,
        Rule::Fix,
        Rule::IfTrue,
        Rule::IfFalse,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Const => "Const",
            Rule::Beta => "Beta",
            Rule::Return => "Return",
            Rule::Handle => "Handle",
            Rule::Proj1 => "Proj1",
            Rule::Proj2 => "Proj2",
            Rule::CaseL => "CaseL",
            Rule::CaseR => "CaseR",
            Rule::Nil => "Nil",
            Rule::Cons => "Cons",
            Rule::Fix => "Fix",
            Rule::IfTrue => "If-True",
            Rule::IfFalse => "If-False",
        })
    }
}

/// Why no rule applies to a redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stuck {
    pub reason: String,
    pub redex: Term,
}

/// `λy. handle E[y] with H`, the captured continuation.
pub fn continuation(inner: &EvalContext, handler: &Handler) -> Term {
    let probe = Term::Handle(Box::new(inner.fill(Term::unit())), Box::new(handler.clone()));
    let y = fresh_name("y", &probe.free_vars());
    let body = Term::Handle(Box::new(inner.fill(Term::Var(y.clone()))), Box::new(handler.clone()));
    Term::Abs(y, None, Box::new(body))
}

/// `fix f. fun x -> M` unrolled once: `(fun x -> M)[fix f. fun x -> M / f]`.
pub fn unroll_fix(f: &Name, x: &Name, body: &Term) -> Term {
    let fix = Term::Fix(f.clone(), x.clone(), Box::new(body.clone()));
    subst_term(&Term::Abs(x.clone(), None, Box::new(body.clone())), f, &fix)
}

#[allow(clippy::result_large_err)]
pub fn contract(r: &Redex) -> Result<(Term, Rule), Stuck> {
    let stuck = |reason: String, t: &Term| Stuck { reason, redex: t.clone() };
    match r {
        Redex::Handle { handler, inner, op, arg } => {
            let clause = handler.clause(op.as_str()).expect("decompose found a clause");
            let k = continuation(inner, handler);
            let body = subst_term(&clause.body, &clause.param, arg);
            Ok((subst_term(&body, &clause.cont, &k), Rule::Handle))
        }
        Redex::Simple(t) => match t {
            Term::App(f, v) => match (&**f, &**v) {
                (Term::Abs(x, _, body), v) => Ok((subst_term(body, x, v), Rule::Beta)),
                (Term::Const(c), Term::Const(a)) => match zeta(c, a) {
                    Some(r) => Ok((Term::Const(r), Rule::Const)),
                    None => Err(stuck(
                        format!("constant application is undefined: {}", pretty_term(t)),
                        t,
                    )),
                },
                (Term::Const(_), _) => Err(stuck("constant applied to a non-constant".into(), t)),
                _ => Err(stuck("application of a non-function".into(), t)),
            },
            Term::Let(x, _, v, n) => Ok((subst_term(n, x, v), Rule::Beta)),
            Term::Handle(v, h) => Ok((subst_term(&h.ret_body, &h.ret_var, v), Rule::Return)),
            Term::Proj1(p) | Term::Proj2(p) => match &**p {
                Term::Pair(a, b) if matches!(t, Term::Proj1(_)) => Ok(((**a).clone(), Rule::Proj1)),
                Term::Pair(_, b) => Ok(((**b).clone(), Rule::Proj2)),
                _ => Err(stuck("projection from a non-pair".into(), t)),
            },
            Term::CaseSum(s, x, l, y, r) => match &**s {
                Term::Inl(v) => Ok((subst_term(l, x, v), Rule::CaseL)),
                Term::Inr(v) => Ok((subst_term(r, y, v), Rule::CaseR)),
                _ => Err(stuck("sum case on a non-injection".into(), t)),
            },
            Term::CaseList(s, n, p, c) => match &**s {
                Term::Nil => Ok(((**n).clone(), Rule::Nil)),
                Term::Cons(v) => Ok((subst_term(c, p, v), Rule::Cons)),
                _ => Err(stuck("list case on a non-list".into(), t)),
            },
            Term::Fix(f, x, body) => Ok((unroll_fix(f, x, body), Rule::Fix)),
            Term::If(c, a, b) => match &**c {
                Term::Const(crate::syntax::Const::Bool(true)) => Ok(((**a).clone(), Rule::IfTrue)),
                Term::Const(crate::syntax::Const::Bool(false)) => Ok(((**b).clone(), Rule::IfFalse)),
                _ => Err(stuck("condition is not a boolean".into(), t)),
            },
            Term::Var(x) => Err(stuck(format!("free variable `{x}`"), t)),
            _ => Err(stuck("no rule applies".into(), t)),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Value,
    Reduced { term: Term, rule: Rule, redex: Term, contractum: Term },
    UnhandledOp { op: Name, arg: Term, ctx: EvalContext },
    Stuck(Stuck),
}

pub fn step(m: &Term) -> StepResult {
    match decompose(m) {
        Decomposition::Value => StepResult::Value,
        Decomposition::Unhandled { ctx, op, arg } => StepResult::UnhandledOp { op, arg, ctx },
        Decomposition::Redex(ctx, r) => match contract(&r) {
            Ok((contractum, rule)) => StepResult::Reduced {
                term: ctx.fill(contractum.clone()),
                rule,
                redex: r.to_term(),
                contractum,
            },
            Err(s) => StepResult::Stuck(s),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Term),
    UnhandledOp { op: Name, arg: Term },
    Stuck(Stuck),
    OutOfFuel,
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Value(_) => "value",
            Outcome::UnhandledOp { .. } => "unhandled operation",
            Outcome::Stuck(_) => "stuck",
            Outcome::OutOfFuel => "out of fuel",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(v) => f.write_str(&pretty_term(v)),
            Outcome::UnhandledOp { op, arg } => {
                let call = Term::Op(op.clone(), Box::new(arg.clone()));
                write!(f, "unhandled operation {}", pretty_term(&call))
            }
            Outcome::Stuck(s) => write!(f, "stuck: {}\n  at `{}`", s.reason, pretty_term(&s.redex)),
            Outcome::OutOfFuel => f.write_str("out of fuel"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: Outcome,
    pub steps: u64,
}

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// `step N: [RULE] <redex> ↝ <contractum>`
pub fn trace_line(n: u64, rule: Rule, redex: &Term, contractum: &Term) -> String {
    format!("step {n}: [{rule}] {} ↝ {}", pretty_term(redex), pretty_term(contractum))
}

/// Steps `m` until it is a value, stuck or blocked on an unhandled operation,
/// or `max_steps` reductions have been made.
pub fn run(m: &Term, max_steps: u64) -> RunResult {
    run_traced(m, max_steps, &mut |_, _, _, _| {})
}

/// Like [`run`], calling `on_step` with the step number, rule, redex and
/// contractum of every reduction.
pub fn run_traced(m: &Term, max_steps: u64, on_step: &mut dyn FnMut(u64, Rule, &Term, &Term)) -> RunResult {
    let mut cur = m.clone();
    let mut steps = 0;
    loop {
        if steps >= max_steps && !cur.is_value() {
            return RunResult { outcome: Outcome::OutOfFuel, steps };
        }
        match step(&cur) {
            StepResult::Value => return RunResult { outcome: Outcome::Value(cur), steps },
            StepResult::UnhandledOp { op, arg, .. } => {
                return RunResult { outcome: Outcome::UnhandledOp { op, arg }, steps }
            }
            StepResult::Stuck(s) => return RunResult { outcome: Outcome::Stuck(s), steps },
            StepResult::Reduced { term, rule, redex, contractum } => {
                steps += 1;
                on_step(steps, rule, &redex, &contractum);
                cur = term;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn t(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    #[test]
    fn decompose_leftmost() {
        let m = t("(fun x -> x) 1 2");
        let Decomposition::Redex(ctx, Redex::Simple(r)) = decompose(&m) else { panic!() };
        assert_eq!(ctx.frames, vec![Frame::AppFn(Term::int(2))]);
        assert_eq!(r, t("(fun x -> x) 1"));
    }

    #[test]
    fn decompose_finds_the_handler() {
        let m = t("handle #fail() with return x -> [x] | fail _ -> []");
        let Decomposition::Redex(ctx, Redex::Handle { inner, op, .. }) = decompose(&m) else { panic!() };
        assert!(ctx.is_empty() && inner.is_empty());
        assert_eq!(op.as_str(), "fail");
        assert_eq!(run(&m, 10).outcome, Outcome::Value(Term::Nil));
    }

    #[test]
    fn unhandled_operation() {
        let m = t("#select([1])");
        let Decomposition::Unhandled { ctx, op, arg } = decompose(&m) else { panic!() };
        assert!(ctx.is_empty());
        assert_eq!(op.as_str(), "select");
        assert_eq!(arg, Term::list([Term::int(1)]));
    }

    #[test]
    fn innermost_handler_wins() {
        let m = t("handle (handle #e(1) with return x -> x | e v -> 10) with return x -> x | e v -> 20");
        assert_eq!(run(&m, 100).outcome, Outcome::Value(Term::int(10)));
        // A handler without a clause for `e` is skipped.
        let m = t("handle (handle #e(1) with return x -> x | f v -> 10) with return x -> x | e v -> 20");
        assert_eq!(run(&m, 100).outcome, Outcome::Value(Term::int(20)));
    }

    #[test]
    fn beta_then_const() {
        let mut rules = Vec::new();
        let r = run_traced(&t("(fun x -> x + 1) 2"), 100, &mut |_, rule, _, _| rules.push(rule));
        assert_eq!(r.outcome, Outcome::Value(Term::int(3)));
        assert_eq!(rules, vec![Rule::Beta, Rule::Const, Rule::Const]);
    }

    #[test]
    fn continuation_is_deep_and_multi_shot() {
        let m = t("handle #choose() + 1 with return x -> x | choose(u, k) -> k 10 + k 20");
        assert_eq!(run(&m, 100).outcome, Outcome::Value(Term::int(32)));
    }

    #[test]
    fn divergence_runs_out_of_fuel() {
        let m = t("let rec loop x = loop x in loop ()");
        assert_eq!(run(&m, 1000).outcome, Outcome::OutOfFuel);
    }

    #[test]
    fn stuck_on_ill_typed_constant_application() {
        let r = run(&t("true + 1"), 10);
        let Outcome::Stuck(s) = r.outcome else { panic!() };
        assert!(s.reason.contains("undefined"));
        assert!(matches!(run(&t("10 mod 0"), 10).outcome, Outcome::Stuck(_)));
    }

    #[test]
    fn trace_format() {
        let line = trace_line(1, Rule::Beta, &t("(fun x -> x) 1"), &Term::int(1));
        assert_eq!(line, "step 1: [Beta] (fun x -> x) 1 ↝ 1");
    }
}
