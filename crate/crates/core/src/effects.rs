//! Type-and-effect checking.
//!
//! Arrows carry finite sets of operations. Effects of subterms are
//! synthesized bottom-up and propagated into lambdas, operation arguments and
//! annotated lets from the expected type. A let-bound expression is
//! generalized only if every operation it may call satisfies the signature
//! restriction, so declarations themselves are not restricted.
//!
//! There are no effect variables: a function whose latent effect is not
//! determined by its definition or an annotation is taken to be pure.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::diagnostic::{Diagnostic, Span};
use crate::infer::{
    elaborate_signature, elaborate_type, generalize, instantiate, instantiate_signature, show_pair, snippet,
    CheckOptions, Substitution, TypeError, TypeMode, TypingContext, VarSupply,
};
use crate::parse::{Binding, Main, OpDecl, Program, TypeNamer};
use crate::polarity::sr_effect;
use crate::syntax::{
    ftv, subst_type, Effect, Handler, Name, OpSignature, Scheme, SchemeExpr, Term, TyVar, Type, TypeExpr,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EffectError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("cannot generalize `{var}`: its effect {effect} violates the signature restriction")]
    Generalize { var: Name, effect: Effect },
    #[error("effect {actual} exceeds the allowed effect {allowed}")]
    Overflow { actual: Effect, allowed: Effect },
    #[error("handler output effect {out} does not cover {missing}")]
    Handler { out: Effect, missing: Effect },
    #[error("{source}\n  in `{term}`")]
    In { term: String, source: Box<EffectError> },
}

fn at(t: &Term) -> impl Fn(EffectError) -> EffectError + '_ {
    move |e| match e {
        e @ EffectError::In { .. } => e,
        e => EffectError::In { term: snippet(t), source: Box::new(e) },
    }
}

/// Effect inclusion.
pub fn subeffect(e1: &Effect, e2: &Effect) -> bool {
    e1.is_subset(e2)
}

fn latent(e: &Option<Effect>) -> Effect {
    e.clone().unwrap_or_default()
}

/// Number of lambdas directly nested at the top of `m`.
fn lambda_depth(m: &Term) -> usize {
    match m {
        Term::Abs(_, _, b) => 1 + lambda_depth(b),
        _ => 0,
    }
}

/// Checking state for one item.
pub struct EffInfer<'a> {
    pub subst: Substitution,
    pub supply: &'a mut VarSupply,
    sigs: &'a BTreeMap<Name, OpSignature>,
    /// Whether generalization is gated on the signature restriction.
    sr: bool,
    scoped: HashMap<Name, TyVar>,
}

impl<'a> EffInfer<'a> {
    pub fn new(sigs: &'a BTreeMap<Name, OpSignature>, supply: &'a mut VarSupply, sr: bool) -> Self {
        EffInfer { subst: Substitution::new(), supply, sigs, sr, scoped: HashMap::new() }
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), EffectError> {
        Ok(self.subst.unify(a, b)?)
    }

    /// Makes a value of type `actual` usable at `expected`: latent effects may
    /// grow in covariant positions and shrink in contravariant ones.
    fn coerce(&mut self, actual: &Type, expected: &Type) -> Result<(), EffectError> {
        let (a, e) = (self.subst.apply(actual), self.subst.apply(expected));
        match (&a, &e) {
            (Type::Arrow(a1, b1, e1), Type::Arrow(a2, b2, e2)) => {
                let (e1, e2) = (latent(e1), latent(e2));
                if !subeffect(&e1, &e2) {
                    let (x, y) = show_pair(&a, &e);
                    return Err(TypeError::Effect(x, y).into());
                }
                self.coerce(a2, a1)?;
                self.coerce(b1, b2)
            }
            (Type::Prod(a1, b1), Type::Prod(a2, b2)) | (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
                self.coerce(a1, a2)?;
                self.coerce(b1, b2)
            }
            (Type::List(a1), Type::List(a2)) => self.coerce(a1, a2),
            _ => self.unify(&a, &e),
        }
    }

    fn elaborate(&mut self, te: &TypeExpr, bound: &HashMap<Name, TyVar>) -> Result<Type, EffectError> {
        for e in te.effects() {
            if let Some(op) = e.iter().find(|o| !self.sigs.contains_key(o.as_str())) {
                return Err(TypeError::UnboundOp(op.clone()).into());
            }
        }
        Ok(elaborate_type(te, bound, &mut self.scoped, self.supply, TypeMode::Effects))
    }

    fn annotation_scheme(&mut self, s: &SchemeExpr) -> Result<Scheme, EffectError> {
        let mut bound = HashMap::new();
        let mut vars = Vec::new();
        for n in &s.vars {
            let v = self.supply.rigid();
            bound.insert(n.clone(), v);
            vars.push(v);
        }
        let body = self.elaborate(&s.body, &bound)?;
        Ok(Scheme { vars, body })
    }

    fn is_safe(&self, eps: &Effect) -> bool {
        !self.sr || sr_effect(eps, self.sigs).unwrap_or(false)
    }

    /// Synthesizes a type and an effect for `m`.
    pub fn synth(&mut self, ctx: &mut TypingContext, m: &Term) -> Result<(Type, Effect), EffectError> {
        self.synth_inner(ctx, m).map_err(at(m))
    }

    fn synth_inner(&mut self, ctx: &mut TypingContext, m: &Term) -> Result<(Type, Effect), EffectError> {
        let pure = Effect::empty;
        match m {
            Term::Var(x) => match ctx.lookup(x.as_str()) {
                Some(s) => {
                    let s = s.clone();
                    Ok((instantiate(&s, self.supply), pure()))
                }
                None => Err(TypeError::UnboundVar(x.clone()).into()),
            },
            Term::Const(c) => Ok((TypeMode::Effects.adjust(c.type_of()), pure())),
            Term::Abs(x, ann, body) => {
                let dom = match ann {
                    Some(te) => self.elaborate(te, &HashMap::new())?,
                    None => self.supply.fresh(),
                };
                ctx.push(x.clone(), Scheme::mono(dom.clone()));
                let r = self.synth(ctx, body);
                ctx.pop();
                let (cod, eff) = r?;
                Ok((Type::arrow_eff(dom, cod, eff), pure()))
            }
            Term::App(f, a) => {
                let (tf, ef) = self.synth(ctx, f)?;
                match self.subst.apply(&tf) {
                    Type::Arrow(dom, cod, e) => {
                        let ea = self.check(ctx, a, &dom)?;
                        Ok((*cod, ef.union(&ea).union(&latent(&e))))
                    }
                    tf => {
                        let (ta, ea) = self.synth(ctx, a)?;
                        let r = self.supply.fresh();
                        self.unify(&tf, &Type::arrow_eff(ta, r.clone(), pure()))?;
                        Ok((r, ef.union(&ea)))
                    }
                }
            }
            Term::Op(op, arg) => {
                let sig = self.sigs.get(op).ok_or_else(|| TypeError::UnboundOp(op.clone()))?;
                let (dom, cod) = instantiate_signature(sig, self.supply);
                let mut ea = self.check(ctx, arg, &dom)?;
                ea.insert(op.clone());
                Ok((cod, ea))
            }
            Term::Handle(body, h) => self.handle(ctx, body, h, None),
            Term::Let(x, ann, bound, body) => {
                let mut t = None;
                let e = self.let_in(ctx, x, ann.as_ref(), bound, &mut |this, ctx| {
                    let (tb, eb) = this.synth(ctx, body)?;
                    t = Some(tb);
                    Ok(eb)
                })?;
                Ok((t.expect("let body typed"), e))
            }
            Term::Pair(a, b) => {
                let (ta, ea) = self.synth(ctx, a)?;
                let (tb, eb) = self.synth(ctx, b)?;
                Ok((Type::prod(ta, tb), ea.union(&eb)))
            }
            Term::Proj1(p) | Term::Proj2(p) => {
                let (t, e) = self.synth(ctx, p)?;
                let (a, b) = (self.supply.fresh(), self.supply.fresh());
                self.unify(&t, &Type::prod(a.clone(), b.clone()))?;
                Ok((if matches!(m, Term::Proj1(_)) { a } else { b }, e))
            }
            Term::Inl(a) => {
                let (t, e) = self.synth(ctx, a)?;
                Ok((Type::sum(t, self.supply.fresh()), e))
            }
            Term::Inr(b) => {
                let (t, e) = self.synth(ctx, b)?;
                Ok((Type::sum(self.supply.fresh(), t), e))
            }
            Term::Nil => Ok((Type::list(self.supply.fresh()), pure())),
            Term::Cons(p) => {
                let a = self.supply.fresh();
                let e = self.check(ctx, p, &Type::prod(a.clone(), Type::list(a.clone())))?;
                Ok((Type::list(a), e))
            }
            Term::CaseSum(..) | Term::CaseList(..) | Term::If(..) => {
                let r = self.supply.fresh();
                let e = self.check_inner(ctx, m, &r)?;
                Ok((r, e))
            }
            Term::Fix(f, x, body) => {
                // Iterate the assumed latent effects of `f` and of each
                // curried layer of its body up to a fixpoint.
                let depth = lambda_depth(body);
                let mut assumed = vec![pure(); depth + 1];
                loop {
                    let saved = self.subst.clone();
                    let doms: Vec<Type> = (0..=depth).map(|_| self.supply.fresh()).collect();
                    let res = self.supply.fresh();
                    let ft = doms
                        .iter()
                        .zip(&assumed)
                        .rev()
                        .fold(res, |acc, (d, e)| Type::arrow_eff(d.clone(), acc, e.clone()));
                    let Type::Arrow(_, cod, _) = &ft else { unreachable!() };
                    ctx.push(f.clone(), Scheme::mono(ft.clone()));
                    ctx.push(x.clone(), Scheme::mono(doms[0].clone()));
                    let r = self.synth(ctx, body);
                    ctx.pop();
                    ctx.pop();
                    let (tb, eb) = r?;
                    let mut actual = vec![eb];
                    let mut t = self.subst.apply(&tb);
                    for _ in 0..depth {
                        let Type::Arrow(_, c, e) = t else { unreachable!() };
                        actual.push(latent(&e));
                        t = self.subst.apply(&c);
                    }
                    if actual.iter().zip(&assumed).all(|(a, e)| subeffect(a, e)) {
                        self.coerce(&tb, cod)?;
                        return Ok((ft, pure()));
                    }
                    for (e, a) in assumed.iter_mut().zip(&actual) {
                        e.extend(a);
                    }
                    self.subst = saved;
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn fix_body(
        &mut self,
        ctx: &mut TypingContext,
        f: &Name,
        x: &Name,
        ft: &Type,
        a: &Type,
        b: &Type,
        body: &Term,
    ) -> Result<Effect, EffectError> {
        ctx.push(f.clone(), Scheme::mono(ft.clone()));
        ctx.push(x.clone(), Scheme::mono(a.clone()));
        let r = self.check(ctx, body, b);
        ctx.pop();
        ctx.pop();
        r
    }

    /// Checks `m` against `expected`, returning the effect of `m`.
    pub fn check(&mut self, ctx: &mut TypingContext, m: &Term, expected: &Type) -> Result<Effect, EffectError> {
        self.check_inner(ctx, m, expected).map_err(at(m))
    }

    fn check_inner(&mut self, ctx: &mut TypingContext, m: &Term, expected: &Type) -> Result<Effect, EffectError> {
        let exp = self.subst.apply(expected);
        let pure = Effect::empty;
        match (m, &exp) {
            (Term::Abs(x, ann, body), Type::Arrow(d, c, e)) => {
                if let Some(te) = ann {
                    let t = self.elaborate(te, &HashMap::new())?;
                    self.unify(&t, d)?;
                }
                ctx.push(x.clone(), Scheme::mono((**d).clone()));
                let r = self.check(ctx, body, c);
                ctx.pop();
                let eb = r?;
                let allowed = latent(e);
                if !subeffect(&eb, &allowed) {
                    return Err(EffectError::Overflow { actual: eb, allowed });
                }
                Ok(pure())
            }
            (Term::Fix(f, x, body), Type::Arrow(d, c, e)) => {
                let eb = self.fix_body(ctx, f, x, &exp, d, c, body)?;
                let allowed = latent(e);
                if !subeffect(&eb, &allowed) {
                    return Err(EffectError::Overflow { actual: eb, allowed });
                }
                Ok(pure())
            }
            (Term::Op(op, arg), _) => {
                let sig = self.sigs.get(op).ok_or_else(|| TypeError::UnboundOp(op.clone()))?;
                let (dom, cod) = instantiate_signature(sig, self.supply);
                self.coerce(&cod, &exp)?;
                let mut ea = self.check(ctx, arg, &dom)?;
                ea.insert(op.clone());
                Ok(ea)
            }
            (Term::Pair(a, b), Type::Prod(ta, tb)) => {
                let ea = self.check(ctx, a, ta)?;
                Ok(ea.union(&self.check(ctx, b, tb)?))
            }
            (Term::Inl(a), Type::Sum(ta, _)) | (Term::Inr(a), Type::Sum(_, ta)) => self.check(ctx, a, ta),
            (Term::Cons(p), Type::List(t)) => {
                self.check(ctx, p, &Type::prod((**t).clone(), exp.clone()))
            }
            (Term::Let(x, ann, bound, body), _) => {
                self.let_in(ctx, x, ann.as_ref(), bound, &mut |this, ctx| this.check(ctx, body, &exp))
            }
            (Term::If(c, t, e), _) => {
                let ec = self.check(ctx, c, &Type::BOOL)?;
                let et = self.check(ctx, t, &exp)?;
                let ee = self.check(ctx, e, &exp)?;
                Ok(ec.union(&et).union(&ee))
            }
            (Term::CaseSum(s, x, l, y, r), _) => {
                let (a, b) = (self.supply.fresh(), self.supply.fresh());
                let es = self.check(ctx, s, &Type::sum(a.clone(), b.clone()))?;
                ctx.push(x.clone(), Scheme::mono(a));
                let el = self.check(ctx, l, &exp);
                ctx.pop();
                ctx.push(y.clone(), Scheme::mono(b));
                let er = self.check(ctx, r, &exp);
                ctx.pop();
                Ok(es.union(&el?).union(&er?))
            }
            (Term::CaseList(s, n, p, c), _) => {
                let a = self.supply.fresh();
                let es = self.check(ctx, s, &Type::list(a.clone()))?;
                let en = self.check(ctx, n, &exp)?;
                ctx.push(p.clone(), Scheme::mono(Type::prod(a.clone(), Type::list(a))));
                let ec = self.check(ctx, c, &exp);
                ctx.pop();
                Ok(es.union(&en).union(&ec?))
            }
            (Term::Handle(body, h), _) => Ok(self.handle(ctx, body, h, Some(&exp))?.1),
            _ => {
                let (t, e) = self.synth(ctx, m)?;
                self.coerce(&t, &exp)?;
                Ok(e)
            }
        }
    }

    /// Types `let x [: ann] = bound in ...`, with `body` typing the rest in
    /// the extended context. Returns the combined effect.
    fn let_in(
        &mut self,
        ctx: &mut TypingContext,
        x: &Name,
        ann: Option<&SchemeExpr>,
        bound: &Term,
        body: &mut dyn FnMut(&mut Self, &mut TypingContext) -> Result<Effect, EffectError>,
    ) -> Result<Effect, EffectError> {
        let (scheme, e1) = self.binding(ctx, x, ann, bound)?;
        ctx.push(x.clone(), scheme);
        let e2 = body(self, ctx);
        ctx.pop();
        Ok(e1.union(&e2?))
    }

    /// The scheme and effect of a let-bound expression. Quantification is
    /// allowed only when the effect is safe.
    fn binding(
        &mut self,
        ctx: &mut TypingContext,
        x: &Name,
        ann: Option<&SchemeExpr>,
        bound: &Term,
    ) -> Result<(Scheme, Effect), EffectError> {
        match ann {
            Some(s) => {
                let scheme = self.annotation_scheme(s)?;
                let e1 = self.check(ctx, bound, &scheme.body)?;
                if !scheme.vars.is_empty() && !self.is_safe(&e1) {
                    return Err(EffectError::Generalize { var: x.clone(), effect: e1 });
                }
                let leaked = ctx.ftv(&self.subst);
                if scheme.vars.iter().any(|v| leaked.contains(v)) {
                    let mut n = TypeNamer::new();
                    let ann = n.ty(&scheme.body);
                    return Err(TypeError::TooGeneral { ann, inferred: "a less general type".into() }.into());
                }
                Ok((Scheme { vars: scheme.vars, body: self.subst.apply(&scheme.body) }, e1))
            }
            None => {
                let (t, e1) = self.synth(ctx, bound)?;
                let t = self.subst.apply(&t);
                let scheme = if self.is_safe(&e1) {
                    generalize(&ctx.ftv(&self.subst), &t, self.supply)
                } else {
                    Scheme::mono(t)
                };
                Ok((scheme, e1))
            }
        }
    }

    /// `handle body with h`. The output effect is the smallest set closed
    /// under what the clauses do, including resuming.
    fn handle(
        &mut self,
        ctx: &mut TypingContext,
        body: &Term,
        h: &Handler,
        expected: Option<&Type>,
    ) -> Result<(Type, Effect), EffectError> {
        let (input, in_eps) = self.synth(ctx, body)?;
        let out = match expected {
            Some(t) => t.clone(),
            None => self.supply.fresh(),
        };
        let handled: Effect = h.clauses.keys().cloned().collect();
        let mut out_eps = in_eps.difference(&handled);
        loop {
            let saved = self.subst.clone();
            let used = self.clause_effects(ctx, h, &input, &out, &out_eps)?;
            if subeffect(&used, &out_eps) {
                return Ok((out, out_eps));
            }
            out_eps.extend(&used);
            self.subst = saved;
        }
    }

    /// Types every clause of `h` with continuations of latent effect
    /// `out_eps`, returning the union of the clause bodies' effects.
    fn clause_effects(
        &mut self,
        ctx: &mut TypingContext,
        h: &Handler,
        input: &Type,
        out: &Type,
        out_eps: &Effect,
    ) -> Result<Effect, EffectError> {
        ctx.push(h.ret_var.clone(), Scheme::mono(input.clone()));
        let er = self.check(ctx, &h.ret_body, out);
        ctx.pop();
        let mut used = er?;
        for (op, clause) in &h.clauses {
            let sig = self.sigs.get(op).ok_or_else(|| TypeError::UnboundOp(op.clone()))?;
            let skolems: Vec<TyVar> = sig.vars.iter().map(|_| self.supply.rigid()).collect();
            let map: HashMap<TyVar, Type> =
                sig.vars.iter().zip(&skolems).map(|(v, s)| (*v, Type::Var(*s))).collect();
            let dom = subst_type(&sig.dom, &map);
            let cod = subst_type(&sig.cod, &map);
            ctx.push(clause.param.clone(), Scheme::mono(dom));
            ctx.push(clause.cont.clone(), Scheme::mono(Type::arrow_eff(cod, out.clone(), out_eps.clone())));
            let eb = self.check(ctx, &clause.body, out);
            ctx.pop();
            ctx.pop();
            used.extend(&eb?);
            let mut visible = ftv(&self.subst.apply(out));
            visible.extend(ftv(&self.subst.apply(input)));
            visible.extend(ctx.ftv(&self.subst));
            if let Some(i) = skolems.iter().position(|s| visible.contains(s)) {
                return Err(TypeError::Escape { op: op.clone(), var: sig.var_names[i].clone() }.into());
            }
        }
        Ok(used)
    }

    /// Checks that `h` turns a computation of `input | in_eps` into one of
    /// `out | out_eps`: unhandled operations pass through and every clause
    /// stays within `out_eps`.
    pub fn check_eff_handler(
        &mut self,
        ctx: &mut TypingContext,
        h: &Handler,
        input: &Type,
        in_eps: &Effect,
        out: &Type,
        out_eps: &Effect,
    ) -> Result<(), EffectError> {
        let handled: Effect = h.clauses.keys().cloned().collect();
        let mut needed = in_eps.difference(&handled);
        needed.extend(&self.clause_effects(ctx, h, input, out, out_eps)?);
        if !subeffect(&needed, out_eps) {
            return Err(EffectError::Handler { out: out_eps.clone(), missing: needed.difference(out_eps) });
        }
        Ok(())
    }
}

/// Checks `m : a | eps`.
pub fn check_eff(
    sigs: &BTreeMap<Name, OpSignature>,
    supply: &mut VarSupply,
    ctx: &mut TypingContext,
    m: &Term,
    a: &Type,
    eps: &Effect,
) -> Result<(), EffectError> {
    let mut inf = EffInfer::new(sigs, supply, true);
    let e = inf.check(ctx, m, a)?;
    if !subeffect(&e, eps) {
        return Err(EffectError::Overflow { actual: e, allowed: eps.clone() });
    }
    Ok(())
}

/// Effect-mode typing state across top-level items.
#[derive(Clone, Debug, Default)]
pub struct EffChecker {
    pub options: CheckOptions,
    pub sigs: BTreeMap<Name, OpSignature>,
    pub ctx: TypingContext,
    pub supply: VarSupply,
}

/// Result of checking a whole program in effect mode.
#[derive(Clone, Debug)]
pub struct CheckedEffects {
    pub bindings: Vec<(Name, Scheme, Effect)>,
    pub main: Option<(Scheme, Effect)>,
    /// Everything the program may do when run.
    pub effect: Effect,
}

impl EffChecker {
    pub fn new(options: CheckOptions) -> Self {
        EffChecker { options, ..Default::default() }
    }

    /// Declares a group of operations; their signatures may mention each
    /// other and any operation declared earlier.
    pub fn declare_all(&mut self, decls: &[OpDecl]) -> Result<(), Vec<Diagnostic>> {
        let mut known: BTreeSet<Name> = self.sigs.keys().cloned().collect();
        let mut errors = Vec::new();
        for d in decls {
            if !known.insert(d.name.clone()) {
                errors.push(Diagnostic::error(d.span, format!("operation `{}` is already declared", d.name)));
            }
        }
        for d in decls {
            match elaborate_signature(d, &mut self.supply, TypeMode::Effects, &known) {
                Ok(sig) => {
                    self.sigs.entry(d.name.clone()).or_insert(sig);
                }
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    fn item(
        &mut self,
        name: &Name,
        ann: Option<&SchemeExpr>,
        m: &Term,
        span: Span,
    ) -> Result<(Scheme, Effect), Diagnostic> {
        let mut inf = EffInfer::new(&self.sigs, &mut self.supply, self.options.sr);
        let (s, e) = inf
            .binding(&mut self.ctx, name, ann, m)
            .map_err(|e| Diagnostic::error(span, e.to_string()))?;
        let s = Scheme { vars: s.vars.clone(), body: inf.subst.apply(&s.body) };
        Ok((s.normalize(), e))
    }

    pub fn bind(&mut self, b: &Binding) -> Result<(Scheme, Effect), Diagnostic> {
        let (s, e) = self.item(&b.name, b.ann.as_ref(), &b.term, b.span)?;
        self.ctx.push(b.name.clone(), s.clone());
        Ok((s, e))
    }

    pub fn type_of(&mut self, m: &Main) -> Result<(Scheme, Effect), Diagnostic> {
        self.item(&Name::new("it"), None, &m.term, m.span)
    }

    pub fn check_program(&mut self, p: &Program) -> Result<CheckedEffects, Vec<Diagnostic>> {
        self.declare_all(&p.decls)?;
        let mut effect = Effect::empty();
        let mut bindings = Vec::new();
        for b in &p.bindings {
            let (s, e) = self.bind(b).map_err(|d| vec![d])?;
            effect.extend(&e);
            bindings.push((b.name.clone(), s, e));
        }
        let main = match &p.main {
            Some(m) => {
                let (s, e) = self.type_of(m).map_err(|d| vec![d])?;
                effect.extend(&e);
                Some((s, e))
            }
            None => None,
        };
        Ok(CheckedEffects { bindings, main, effect })
    }
}

pub fn check_effects(p: &Program, options: CheckOptions) -> Result<CheckedEffects, Vec<Diagnostic>> {
    EffChecker::new(options).check_program(p)
}
