//! Let-polymorphic type inference.
//!
//! Every let generalizes, whatever the bound expression does. This is sound
//! only because declarations are checked against the signature restriction
//! before any program using them is typed.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::diagnostic::{Diagnostic, Reason, Span};
use crate::parse::{pretty_term, Binding, Main, OpDecl, Program, TypeNamer};
use crate::polarity::check_sr;
use crate::syntax::{
    ftv, subst_type, Effect, Handler, Name, OpSignature, Scheme, SchemeExpr, Term, TyVar, Type,
    TypeExpr, VarKind,
};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TypeError {
    #[error("cannot unify {0} with {1}")]
    Mismatch(String, String),
    #[error("infinite type: {0} occurs in {1}")]
    Occurs(String, String),
    #[error("rigid type variable {0} cannot be unified with {1}")]
    Rigid(String, String),
    #[error("effect {0} does not match effect {1}")]
    Effect(String, String),
    #[error("unbound variable `{0}`")]
    UnboundVar(Name),
    #[error("unbound operation `{0}`")]
    UnboundOp(Name),
    #[error("type variable `{var}` of operation `{op}` escapes its handler clause")]
    Escape { op: Name, var: Name },
    #[error("annotation `{ann}` is more general than the inferred type {inferred}")]
    TooGeneral { ann: String, inferred: String },
    #[error("{source}\n  in `{term}`")]
    In { term: String, source: Box<TypeError> },
}

pub(crate) fn show_pair(a: &Type, b: &Type) -> (String, String) {
    let mut n = TypeNamer::new();
    (n.ty(a), n.ty(b))
}

pub(crate) fn snippet(t: &Term) -> String {
    let s = pretty_term(t);
    if s.chars().count() > 72 {
        let cut: String = s.chars().take(69).collect();
        format!("{cut}...")
    } else {
        s
    }
}

/// An idempotent substitution of unification variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Substitution {
    map: HashMap<TyVar, Type>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: TyVar) -> Option<&Type> {
        self.map.get(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TyVar, &Type)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Type) -> Type {
        if self.map.is_empty() {
            return t.clone();
        }
        subst_type(t, &self.map)
    }

    pub fn apply_scheme(&self, s: &Scheme) -> Scheme {
        let inner: HashMap<TyVar, Type> = self
            .map
            .iter()
            .filter(|(v, _)| !s.vars.contains(v))
            .map(|(v, t)| (*v, t.clone()))
            .collect();
        Scheme { vars: s.vars.clone(), body: subst_type(&s.body, &inner) }
    }

    /// Adds `v := t`, keeping the map idempotent.
    fn extend(&mut self, v: TyVar, t: Type) {
        let t = self.apply(&t);
        let single: HashMap<TyVar, Type> = [(v, t.clone())].into();
        for img in self.map.values_mut() {
            if img.occurs(v) {
                *img = subst_type(img, &single);
            }
        }
        self.map.insert(v, t);
    }

    /// Extends the substitution to a unifier of `a` and `b`. Arrow effects,
    /// where present, must be equal as sets; a missing effect counts as empty.
    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), TypeError> {
        let a = self.apply(a);
        let b = self.apply(b);
        self.unify_applied(&a, &b).map_err(|e| match e {
            // Report the whole types, not just the clashing components.
            TypeError::Mismatch(..) => {
                let (x, y) = show_pair(&self.apply(&a), &self.apply(&b));
                TypeError::Mismatch(x, y)
            }
            e => e,
        })
    }

    fn unify_applied(&mut self, a: &Type, b: &Type) -> Result<(), TypeError> {
        match (a, b) {
            (Type::Var(v), Type::Var(w)) if v == w => Ok(()),
            (Type::Var(v), t) | (t, Type::Var(v)) if v.kind == VarKind::Unif => {
                if t.occurs(*v) {
                    let (x, y) = show_pair(&Type::Var(*v), t);
                    return Err(TypeError::Occurs(x, y));
                }
                self.extend(*v, t.clone());
                Ok(())
            }
            (Type::Var(v), t) | (t, Type::Var(v)) => {
                let (x, y) = show_pair(&Type::Var(*v), t);
                Err(TypeError::Rigid(x, y))
            }
            (Type::Base(x), Type::Base(y)) if x == y => Ok(()),
            (Type::Arrow(a1, b1, e1), Type::Arrow(a2, b2, e2)) => {
                let empty = Effect::empty();
                let (e1, e2) = (e1.as_ref().unwrap_or(&empty), e2.as_ref().unwrap_or(&empty));
                if e1 != e2 {
                    return Err(TypeError::Effect(e1.to_string(), e2.to_string()));
                }
                self.unify_applied(a1, a2)?;
                let (b1, b2) = (self.apply(b1), self.apply(b2));
                self.unify_applied(&b1, &b2)
            }
            (Type::Prod(a1, b1), Type::Prod(a2, b2)) | (Type::Sum(a1, b1), Type::Sum(a2, b2)) => {
                self.unify_applied(a1, a2)?;
                let (b1, b2) = (self.apply(b1), self.apply(b2));
                self.unify_applied(&b1, &b2)
            }
            (Type::List(a), Type::List(b)) => self.unify_applied(a, b),
            _ => {
                let (x, y) = show_pair(a, b);
                Err(TypeError::Mismatch(x, y))
            }
        }
    }
}

/// A most general unifier of `a` and `b`.
pub fn unify(a: &Type, b: &Type) -> Result<Substitution, TypeError> {
    let mut s = Substitution::new();
    s.unify(a, b)?;
    Ok(s)
}

/// Term variables in scope, innermost last.
#[derive(Clone, Debug, Default)]
pub struct TypingContext {
    entries: Vec<(Name, Scheme)>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: Name, s: Scheme) {
        self.entries.push((x, s));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, x: &str) -> Option<&Scheme> {
        self.entries.iter().rev().find(|(n, _)| n.as_str() == x).map(|(_, s)| s)
    }

    /// Free type variables of the context under `subst`.
    pub fn ftv(&self, subst: &Substitution) -> BTreeSet<TyVar> {
        let mut out = BTreeSet::new();
        for (_, s) in &self.entries {
            let fv = s.ftv();
            if fv.is_empty() {
                continue;
            }
            for v in fv {
                out.extend(ftv(&subst.apply(&Type::Var(v))));
            }
        }
        out
    }
}

/// Source of fresh type variables.
#[derive(Clone, Debug, Default)]
pub struct VarSupply {
    next: u32,
}

impl VarSupply {
    pub fn unif(&mut self) -> TyVar {
        self.next += 1;
        TyVar::unif(self.next)
    }

    pub fn rigid(&mut self) -> TyVar {
        self.next += 1;
        TyVar::rigid(self.next)
    }

    pub fn fresh(&mut self) -> Type {
        Type::Var(self.unif())
    }
}

/// Replaces quantified variables by fresh unification variables.
pub fn instantiate(s: &Scheme, supply: &mut VarSupply) -> Type {
    if s.vars.is_empty() {
        return s.body.clone();
    }
    let map: HashMap<TyVar, Type> = s.vars.iter().map(|v| (*v, supply.fresh())).collect();
    subst_type(&s.body, &map)
}

/// Instantiates a signature, sharing the fresh variables between domain and
/// codomain.
pub fn instantiate_signature(sig: &OpSignature, supply: &mut VarSupply) -> (Type, Type) {
    let map: HashMap<TyVar, Type> = sig.vars.iter().map(|v| (*v, supply.fresh())).collect();
    (subst_type(&sig.dom, &map), subst_type(&sig.cod, &map))
}

/// Quantifies the unification variables of `t` that are not free in `ctx`,
/// turning them into fresh rigid variables. Both must already be applied.
pub fn generalize(ctx_ftv: &BTreeSet<TyVar>, t: &Type, supply: &mut VarSupply) -> Scheme {
    let gen: Vec<TyVar> = t
        .vars_in_order()
        .into_iter()
        .filter(|v| v.kind == VarKind::Unif && !ctx_ftv.contains(v))
        .collect();
    if gen.is_empty() {
        return Scheme::mono(t.clone());
    }
    let mut vars = Vec::new();
    let mut map = HashMap::new();
    for v in gen {
        let r = supply.rigid();
        vars.push(r);
        map.insert(v, Type::Var(r));
    }
    Scheme { vars, body: subst_type(t, &map) }
}

/// Whether effect annotations are kept (effect mode) or erased.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeMode {
    Plain,
    Effects,
}

impl TypeMode {
    pub fn adjust(self, t: Type) -> Type {
        match self {
            TypeMode::Plain => t.erase_effects(),
            TypeMode::Effects => t.with_pure_arrows(),
        }
    }
}

/// Resolves a written type. Names in `bound` map to their variables; other
/// names are looked up in (and if need be added to) `scoped` as fresh
/// unification variables.
pub fn elaborate_type(
    te: &TypeExpr,
    bound: &HashMap<Name, TyVar>,
    scoped: &mut HashMap<Name, TyVar>,
    supply: &mut VarSupply,
    mode: TypeMode,
) -> Type {
    fn go(
        te: &TypeExpr,
        bound: &HashMap<Name, TyVar>,
        scoped: &mut HashMap<Name, TyVar>,
        supply: &mut VarSupply,
    ) -> Type {
        match te {
            TypeExpr::Var(n) => {
                let v = match bound.get(n) {
                    Some(v) => *v,
                    None => *scoped.entry(n.clone()).or_insert_with(|| supply.unif()),
                };
                Type::Var(v)
            }
            TypeExpr::Base(b) => Type::Base(*b),
            TypeExpr::Arrow(a, b, e) => Type::Arrow(
                Box::new(go(a, bound, scoped, supply)),
                Box::new(go(b, bound, scoped, supply)),
                e.clone(),
            ),
            TypeExpr::Prod(a, b) => {
                Type::prod(go(a, bound, scoped, supply), go(b, bound, scoped, supply))
            }
            TypeExpr::Sum(a, b) => Type::sum(go(a, bound, scoped, supply), go(b, bound, scoped, supply)),
            TypeExpr::List(a) => Type::list(go(a, bound, scoped, supply)),
        }
    }
    mode.adjust(go(te, bound, scoped, supply))
}

/// Turns a declaration into a closed signature. In effect mode every effect
/// name in it must be declared in `known`.
pub fn elaborate_signature(
    decl: &OpDecl,
    supply: &mut VarSupply,
    mode: TypeMode,
    known: &BTreeSet<Name>,
) -> Result<OpSignature, Diagnostic> {
    let mut bound = HashMap::new();
    let mut vars = Vec::new();
    for n in &decl.vars {
        if bound.contains_key(n) {
            return Err(Diagnostic::error(
                decl.span,
                format!("type variable `{n}` is quantified twice in the signature of `{}`", decl.name),
            ));
        }
        let v = supply.rigid();
        bound.insert(n.clone(), v);
        vars.push(v);
    }
    for t in [&decl.dom, &decl.cod] {
        if let Some(n) = t.var_names().into_iter().find(|n| !bound.contains_key(n)) {
            return Err(Diagnostic::error(
                decl.span,
                format!("unbound type variable `{n}` in the signature of `{}`", decl.name),
            ));
        }
        if mode == TypeMode::Effects {
            for e in t.effects() {
                if let Some(op) = e.iter().find(|o| !known.contains(*o)) {
                    return Err(Diagnostic::error(
                        decl.span,
                        format!("unknown operation `{op}` in the signature of `{}`", decl.name),
                    ));
                }
            }
        }
    }
    let mut scoped = HashMap::new();
    let dom = elaborate_type(&decl.dom, &bound, &mut scoped, supply, mode);
    let cod = elaborate_type(&decl.cod, &bound, &mut scoped, supply, mode);
    Ok(OpSignature { op: decl.name.clone(), vars, var_names: decl.vars.clone(), dom, cod })
}

/// Inference state for one session.
pub struct Infer<'a> {
    pub subst: Substitution,
    pub supply: &'a mut VarSupply,
    sigs: &'a BTreeMap<Name, OpSignature>,
    /// Type-variable names used in annotations of the current item.
    scoped: HashMap<Name, TyVar>,
}

impl<'a> Infer<'a> {
    pub fn new(sigs: &'a BTreeMap<Name, OpSignature>, supply: &'a mut VarSupply) -> Self {
        Infer { subst: Substitution::new(), supply, sigs, scoped: HashMap::new() }
    }

    fn unify_in(&mut self, a: &Type, b: &Type, at: &Term) -> Result<(), TypeError> {
        self.subst.unify(a, b).map_err(|e| TypeError::In { term: snippet(at), source: Box::new(e) })
    }

    fn annotation_scheme(&mut self, s: &SchemeExpr) -> Scheme {
        let mut bound = HashMap::new();
        let mut vars = Vec::new();
        for n in &s.vars {
            let v = self.supply.rigid();
            bound.insert(n.clone(), v);
            vars.push(v);
        }
        let body = elaborate_type(&s.body, &bound, &mut self.scoped, self.supply, TypeMode::Plain);
        Scheme { vars, body }
    }

    pub fn infer_term(&mut self, ctx: &mut TypingContext, m: &Term) -> Result<Type, TypeError> {
        match m {
            Term::Var(x) => match ctx.lookup(x.as_str()) {
                Some(s) => {
                    let s = s.clone();
                    Ok(instantiate(&s, self.supply))
                }
                None => Err(TypeError::UnboundVar(x.clone())),
            },
            Term::Const(c) => Ok(c.type_of()),
            Term::Abs(x, ann, body) => {
                let dom = match ann {
                    Some(te) => {
                        elaborate_type(te, &HashMap::new(), &mut self.scoped, self.supply, TypeMode::Plain)
                    }
                    None => self.supply.fresh(),
                };
                ctx.push(x.clone(), Scheme::mono(dom.clone()));
                let cod = self.infer_term(ctx, body);
                ctx.pop();
                Ok(Type::arrow(dom, cod?))
            }
            Term::App(f, a) => {
                let tf = self.infer_term(ctx, f)?;
                let ta = self.infer_term(ctx, a)?;
                let r = self.supply.fresh();
                self.unify_in(&tf, &Type::arrow(ta, r.clone()), m)?;
                Ok(r)
            }
            Term::Op(op, arg) => {
                let sig = self.sigs.get(op).ok_or_else(|| TypeError::UnboundOp(op.clone()))?;
                let (dom, cod) = instantiate_signature(sig, self.supply);
                let ta = self.infer_term(ctx, arg)?;
                self.unify_in(&ta, &dom, m)?;
                Ok(cod)
            }
            Term::Handle(body, h) => {
                let a = self.infer_term(ctx, body)?;
                self.infer_handler(ctx, h, &a)
            }
            Term::Let(x, ann, bound, body) => {
                let scheme = match ann {
                    None => {
                        let t = self.infer_term(ctx, bound)?;
                        let t = self.subst.apply(&t);
                        generalize(&ctx.ftv(&self.subst), &t, self.supply)
                    }
                    Some(s) => self.check_annotated(ctx, s, bound)?,
                };
                ctx.push(x.clone(), scheme);
                let r = self.infer_term(ctx, body);
                ctx.pop();
                r
            }
            Term::Pair(a, b) => {
                let ta = self.infer_term(ctx, a)?;
                let tb = self.infer_term(ctx, b)?;
                Ok(Type::prod(ta, tb))
            }
            Term::Proj1(p) | Term::Proj2(p) => {
                let t = self.infer_term(ctx, p)?;
                let (a, b) = (self.supply.fresh(), self.supply.fresh());
                self.unify_in(&t, &Type::prod(a.clone(), b.clone()), m)?;
                Ok(if matches!(m, Term::Proj1(_)) { a } else { b })
            }
            Term::Inl(a) => {
                let t = self.infer_term(ctx, a)?;
                Ok(Type::sum(t, self.supply.fresh()))
            }
            Term::Inr(b) => {
                let t = self.infer_term(ctx, b)?;
                Ok(Type::sum(self.supply.fresh(), t))
            }
            Term::CaseSum(s, x, l, y, r) => {
                let t = self.infer_term(ctx, s)?;
                let (a, b) = (self.supply.fresh(), self.supply.fresh());
                self.unify_in(&t, &Type::sum(a.clone(), b.clone()), s)?;
                ctx.push(x.clone(), Scheme::mono(a));
                let tl = self.infer_term(ctx, l);
                ctx.pop();
                ctx.push(y.clone(), Scheme::mono(b));
                let tr = self.infer_term(ctx, r);
                ctx.pop();
                let (tl, tr) = (tl?, tr?);
                self.unify_in(&tl, &tr, m)?;
                Ok(tl)
            }
            Term::Nil => Ok(Type::list(self.supply.fresh())),
            Term::Cons(p) => {
                let t = self.infer_term(ctx, p)?;
                let a = self.supply.fresh();
                self.unify_in(&t, &Type::prod(a.clone(), Type::list(a.clone())), m)?;
                Ok(Type::list(a))
            }
            Term::CaseList(s, n, p, c) => {
                let t = self.infer_term(ctx, s)?;
                let a = self.supply.fresh();
                self.unify_in(&t, &Type::list(a.clone()), s)?;
                let tn = self.infer_term(ctx, n)?;
                ctx.push(p.clone(), Scheme::mono(Type::prod(a.clone(), Type::list(a))));
                let tc = self.infer_term(ctx, c);
                ctx.pop();
                self.unify_in(&tn, &tc?, m)?;
                Ok(tn)
            }
            Term::Fix(f, x, body) => {
                let (a, b) = (self.supply.fresh(), self.supply.fresh());
                ctx.push(f.clone(), Scheme::mono(Type::arrow(a.clone(), b.clone())));
                ctx.push(x.clone(), Scheme::mono(a.clone()));
                let tb = self.infer_term(ctx, body);
                ctx.pop();
                ctx.pop();
                self.unify_in(&tb?, &b, m)?;
                Ok(Type::arrow(a, b))
            }
            Term::If(c, t, e) => {
                let tc = self.infer_term(ctx, c)?;
                self.unify_in(&tc, &Type::BOOL, c)?;
                let tt = self.infer_term(ctx, t)?;
                let te = self.infer_term(ctx, e)?;
                self.unify_in(&tt, &te, m)?;
                Ok(tt)
            }
        }
    }

    /// Checks `bound` against an annotation `forall a. T`: the quantified
    /// variables become rigid while checking and must stay out of the context.
    fn check_annotated(&mut self, ctx: &mut TypingContext, s: &SchemeExpr, bound: &Term) -> Result<Scheme, TypeError> {
        let scheme = self.annotation_scheme(s);
        let t = self.infer_term(ctx, bound)?;
        let (ann, inferred) = {
            let mut n = TypeNamer::new();
            (n.ty(&self.subst.apply(&scheme.body)), n.ty(&self.subst.apply(&t)))
        };
        self.unify_in(&t, &scheme.body, bound)?;
        let leaked = ctx.ftv(&self.subst);
        if scheme.vars.iter().any(|v| leaked.contains(v)) {
            return Err(TypeError::TooGeneral { ann, inferred });
        }
        Ok(Scheme { vars: scheme.vars, body: self.subst.apply(&scheme.body) })
    }

    /// Types a handler over a computation of type `input`, returning the
    /// output type.
    pub fn infer_handler(&mut self, ctx: &mut TypingContext, h: &Handler, input: &Type) -> Result<Type, TypeError> {
        let out = self.supply.fresh();
        ctx.push(h.ret_var.clone(), Scheme::mono(input.clone()));
        let tr = self.infer_term(ctx, &h.ret_body);
        ctx.pop();
        self.unify_in(&tr?, &out, &h.ret_body)?;
        for (op, clause) in &h.clauses {
            let sig = self.sigs.get(op).ok_or_else(|| TypeError::UnboundOp(op.clone()))?;
            let skolems: Vec<TyVar> = sig.vars.iter().map(|_| self.supply.rigid()).collect();
            let map: HashMap<TyVar, Type> =
                sig.vars.iter().zip(&skolems).map(|(v, s)| (*v, Type::Var(*s))).collect();
            let dom = subst_type(&sig.dom, &map);
            let cod = subst_type(&sig.cod, &map);
            ctx.push(clause.param.clone(), Scheme::mono(dom));
            ctx.push(clause.cont.clone(), Scheme::mono(Type::arrow(cod, out.clone())));
            let tb = self.infer_term(ctx, &clause.body);
            ctx.pop();
            ctx.pop();
            self.unify_in(&tb?, &out, &clause.body)?;
            let mut visible = ftv(&self.subst.apply(&out));
            visible.extend(ftv(&self.subst.apply(input)));
            visible.extend(ctx.ftv(&self.subst));
            if let Some(i) = skolems.iter().position(|s| visible.contains(s)) {
                return Err(TypeError::Escape { op: op.clone(), var: sig.var_names[i].clone() });
            }
        }
        Ok(out)
    }

    /// Infers and generalizes a closed top-level item.
    fn top_level(&mut self, ctx: &mut TypingContext, ann: Option<&SchemeExpr>, m: &Term) -> Result<Scheme, TypeError> {
        self.scoped.clear();
        let s = match ann {
            Some(s) => self.check_annotated(ctx, s, m)?,
            None => {
                let t = self.infer_term(ctx, m)?;
                let t = self.subst.apply(&t);
                generalize(&ctx.ftv(&self.subst), &t, self.supply)
            }
        };
        Ok(s.normalize())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Check declarations against the signature restriction.
    pub sr: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { sr: true }
    }
}

/// Accumulated typing state across top-level items, shared by file checking
/// and the REPL.
#[derive(Clone, Debug, Default)]
pub struct Checker {
    pub options: CheckOptions,
    pub sigs: BTreeMap<Name, OpSignature>,
    pub ctx: TypingContext,
    pub supply: VarSupply,
}

/// Result of checking a whole program.
#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub bindings: Vec<(Name, Scheme)>,
    pub main: Option<Scheme>,
}

impl Checker {
    pub fn new(options: CheckOptions) -> Self {
        Checker { options, ..Default::default() }
    }

    pub fn declare(&mut self, decl: &OpDecl) -> Result<&OpSignature, Diagnostic> {
        if self.sigs.contains_key(&decl.name) {
            return Err(Diagnostic::error(
                decl.span,
                format!("operation `{}` is already declared", decl.name),
            ));
        }
        let sig = elaborate_signature(decl, &mut self.supply, TypeMode::Plain, &BTreeSet::new())?;
        if self.options.sr {
            let verdict = check_sr(&sig);
            if !verdict.pass {
                let msgs = verdict.messages();
                return Err(Diagnostic::error(
                    decl.span,
                    format!("operation violates the signature restriction\n  {}", msgs.join("\n  ")),
                )
                .with_reason(Reason::Signature { op: decl.name.clone(), verdict }));
            }
        }
        Ok(self.sigs.entry(decl.name.clone()).or_insert(sig))
    }

    fn item(&mut self, ann: Option<&SchemeExpr>, m: &Term, span: Span) -> Result<Scheme, Diagnostic> {
        let mut inf = Infer::new(&self.sigs, &mut self.supply);
        inf.top_level(&mut self.ctx, ann, m)
            .map_err(|e| Diagnostic::error(span, e.to_string()))
    }

    /// Types a top-level binding and adds it to the context.
    pub fn bind(&mut self, b: &Binding) -> Result<Scheme, Diagnostic> {
        let s = self.item(b.ann.as_ref(), &b.term, b.span)?;
        self.ctx.push(b.name.clone(), s.clone());
        Ok(s)
    }

    /// The generalized type of an expression in the current context.
    pub fn type_of(&mut self, m: &Main) -> Result<Scheme, Diagnostic> {
        self.item(None, &m.term, m.span)
    }

    /// Checks declarations, then bindings in order, then the main expression.
    /// All declaration errors are reported together; inference stops at the
    /// first failing item.
    pub fn check_program(&mut self, p: &Program) -> Result<CheckedProgram, Vec<Diagnostic>> {
        let errors: Vec<Diagnostic> = p.decls.iter().filter_map(|d| self.declare(d).err()).collect();
        if !errors.is_empty() {
            return Err(errors);
        }
        let mut bindings = Vec::new();
        for b in &p.bindings {
            bindings.push((b.name.clone(), self.bind(b).map_err(|d| vec![d])?));
        }
        let main = match &p.main {
            Some(m) => Some(self.type_of(m).map_err(|d| vec![d])?),
            None => None,
        };
        Ok(CheckedProgram { bindings, main })
    }
}

pub fn check_program(p: &Program, options: CheckOptions) -> Result<CheckedProgram, Vec<Diagnostic>> {
    Checker::new(options).check_program(p)
}
