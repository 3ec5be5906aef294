//! A direct recursive evaluator, written independently of the small-step
//! machine and used to cross-check it.
//!
//! An operation call that escapes a subterm is returned together with a
//! function rebuilding the context between the call and the current point.

use std::rc::Rc;

use super::machine::{Outcome, Stuck};
use crate::syntax::{fresh_name, subst_term, zeta, Handler, Name, Term};

type Ctx = Rc<dyn Fn(Term) -> Term>;

enum Comp {
    Val(Term),
    Op { op: Name, arg: Term, ctx: Ctx },
    Stuck(Stuck),
    OutOfFuel,
}

struct Eval {
    fuel: u64,
    steps: u64,
}

/// Evaluates `m` with at most `max_steps` contractions.
pub fn evaluate(m: &Term, max_steps: u64) -> (Outcome, u64) {
    let mut ev = Eval { fuel: max_steps, steps: 0 };
    let out = match ev.eval(m) {
        Comp::Val(v) => Outcome::Value(v),
        Comp::Op { op, arg, .. } => Outcome::UnhandledOp { op, arg },
        Comp::Stuck(s) => Outcome::Stuck(s),
        Comp::OutOfFuel => Outcome::OutOfFuel,
    };
    (out, ev.steps)
}

fn stuck(reason: &str, t: &Term) -> Comp {
    Comp::Stuck(Stuck { reason: reason.into(), redex: t.clone() })
}

/// Wraps an escaping operation's context in one more layer.
#[allow(clippy::result_large_err)]
fn wrap(c: Comp, layer: impl Fn(Term) -> Term + 'static) -> Result<Term, Comp> {
    match c {
        Comp::Val(v) => Ok(v),
        Comp::Op { op, arg, ctx } => Err(Comp::Op { op, arg, ctx: Rc::new(move |t| layer(ctx(t))) }),
        other => Err(other),
    }
}

macro_rules! sub {
    ($self:ident, $t:expr, $layer:expr) => {
        match wrap($self.eval($t), $layer) {
            Ok(v) => v,
            Err(c) => return c,
        }
    };
}

impl Eval {
    fn tick(&mut self) -> bool {
        if self.fuel == 0 {
            return false;
        }
        self.fuel -= 1;
        self.steps += 1;
        true
    }

    /// Counts one contraction, then continues with `next`.
    fn then(&mut self, next: &Term) -> Comp {
        if !self.tick() {
            return Comp::OutOfFuel;
        }
        self.eval(next)
    }

    fn eval(&mut self, m: &Term) -> Comp {
        use Term::*;
        let b = Box::new;
        match m {
            Const(_) | Abs(..) | Nil => Comp::Val(m.clone()),
            Var(_) => stuck("free variable", m),
            Fix(f, x, body) => {
                let fix = m.clone();
                let unrolled = subst_term(&Abs(x.clone(), None, body.clone()), f, &fix);
                self.then(&unrolled)
            }
            App(f, a) => {
                let a2 = (**a).clone();
                let fv = sub!(self, f, move |t| App(b(t), b(a2.clone())));
                let fv2 = fv.clone();
                let av = sub!(self, a, move |t| App(b(fv2.clone()), b(t)));
                match (&fv, &av) {
                    (Abs(x, _, body), _) => self.then(&subst_term(body, x, &av)),
                    (Const(c), Const(arg)) => match zeta(c, arg) {
                        Some(r) => self.then(&Term::Const(r)),
                        None => stuck("undefined constant application", &App(b(fv.clone()), b(av.clone()))),
                    },
                    _ => stuck("bad application", &App(b(fv.clone()), b(av.clone()))),
                }
            }
            Let(x, ann, bound, body) => {
                let (x2, ann2, body2) = (x.clone(), ann.clone(), (**body).clone());
                let v = sub!(self, bound, move |t| Let(x2.clone(), ann2.clone(), b(t), b(body2.clone())));
                self.then(&subst_term(body, x, &v))
            }
            Op(op, a) => {
                let op2 = op.clone();
                let v = sub!(self, a, move |t| Op(op2.clone(), b(t)));
                Comp::Op { op: op.clone(), arg: v, ctx: Rc::new(|t| t) }
            }
            Handle(body, h) => self.handle(body, h),
            Pair(l, r) => {
                let r2 = (**r).clone();
                let lv = sub!(self, l, move |t| Pair(b(t), b(r2.clone())));
                let lv2 = lv.clone();
                let rv = sub!(self, r, move |t| Pair(b(lv2.clone()), b(t)));
                Comp::Val(Pair(b(lv), b(rv)))
            }
            Inl(a) => Comp::Val(Inl(b(sub!(self, a, move |t| Inl(b(t)))))),
            Inr(a) => Comp::Val(Inr(b(sub!(self, a, move |t| Inr(b(t)))))),
            Cons(a) => Comp::Val(Cons(b(sub!(self, a, move |t| Cons(b(t)))))),
            Proj1(a) => match sub!(self, a, move |t| Proj1(b(t))) {
                Pair(l, _) => self.then(&l),
                v => stuck("projection from a non-pair", &Proj1(b(v))),
            },
            Proj2(a) => match sub!(self, a, move |t| Proj2(b(t))) {
                Pair(_, r) => self.then(&r),
                v => stuck("projection from a non-pair", &Proj2(b(v))),
            },
            CaseSum(s, x, l, y, r) => {
                let (x2, l2, y2, r2) = (x.clone(), (**l).clone(), y.clone(), (**r).clone());
                let v = sub!(self, s, move |t| CaseSum(b(t), x2.clone(), b(l2.clone()), y2.clone(), b(r2.clone())));
                match v {
                    Inl(v) => self.then(&subst_term(l, x, &v)),
                    Inr(v) => self.then(&subst_term(r, y, &v)),
                    v => stuck("case on a non-injection", &v),
                }
            }
            CaseList(s, n, p, c) => {
                let (n2, p2, c2) = ((**n).clone(), p.clone(), (**c).clone());
                let v = sub!(self, s, move |t| CaseList(b(t), b(n2.clone()), p2.clone(), b(c2.clone())));
                match v {
                    Nil => self.then(n),
                    Cons(v) => self.then(&subst_term(c, p, &v)),
                    v => stuck("case on a non-list", &v),
                }
            }
            If(c, t, e) => {
                let (t2, e2) = ((**t).clone(), (**e).clone());
                match sub!(self, c, move |x| If(b(x), b(t2.clone()), b(e2.clone()))) {
                    Term::Const(crate::syntax::Const::Bool(true)) => self.then(t),
                    Term::Const(crate::syntax::Const::Bool(false)) => self.then(e),
                    v => stuck("condition is not a boolean", &v),
                }
            }
        }
    }

    fn handle(&mut self, body: &Term, h: &Handler) -> Comp {
        match self.eval(body) {
            Comp::Val(v) => self.then(&subst_term(&h.ret_body, &h.ret_var, &v)),
            Comp::Op { op, arg, ctx } => match h.clause(op.as_str()) {
                Some(clause) => {
                    let hb = Box::new(h.clone());
                    let probe = Term::Handle(Box::new(ctx(Term::unit())), hb.clone());
                    let y = fresh_name("y", &probe.free_vars());
                    let k = Term::Abs(
                        y.clone(),
                        None,
                        Box::new(Term::Handle(Box::new(ctx(Term::Var(y))), hb)),
                    );
                    let next = subst_term(&subst_term(&clause.body, &clause.param, &arg), &clause.cont, &k);
                    self.then(&next)
                }
                None => {
                    let h2 = h.clone();
                    Comp::Op {
                        op,
                        arg,
                        ctx: Rc::new(move |t| Term::Handle(Box::new(ctx(t)), Box::new(h2.clone()))),
                    }
                }
            },
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn value(src: &str) -> Term {
        match evaluate(&parse_term(src).unwrap(), 100_000).0 {
            Outcome::Value(v) => v,
            o => panic!("{o}"),
        }
    }

    #[test]
    fn arithmetic_and_functions() {
        assert_eq!(value("let rec f n = if n = 0 then 1 else n * f (n - 1) in f 5"), Term::int(120));
        assert_eq!(value("snd (fst ((1, 2), 3))"), Term::int(2));
    }

    #[test]
    fn handlers() {
        assert_eq!(value("handle #c() + 1 with return x -> x | c(u, k) -> k 10 + k 20"), Term::int(32));
        assert_eq!(
            value("handle (handle #e(1) with return x -> x | f v -> 10) with return x -> x | e v -> 20"),
            Term::int(20)
        );
    }

    #[test]
    fn unhandled_and_fuel() {
        let (o, _) = evaluate(&parse_term("1 + #e(2)").unwrap(), 10);
        assert!(matches!(o, Outcome::UnhandledOp { ref op, .. } if op.as_str() == "e"));
        let (o, steps) = evaluate(&parse_term("let rec l x = l x in l ()").unwrap(), 50);
        assert_eq!((o, steps), (Outcome::OutOfFuel, 50));
    }
}
