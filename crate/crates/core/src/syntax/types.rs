use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::Name;

/// Whether a type variable may be solved by unification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Solvable by unification.
    Unif,
    /// A type constant: quantified variables of schemes and signatures, and
    /// the skolems introduced while checking handler clauses.
    Rigid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TyVar {
    pub id: u32,
    pub kind: VarKind,
}

impl TyVar {
    pub fn unif(id: u32) -> Self {
        TyVar { id, kind: VarKind::Unif }
    }

    pub fn rigid(id: u32) -> Self {
        TyVar { id, kind: VarKind::Rigid }
    }

    pub fn is_rigid(self) -> bool {
        self.kind == VarKind::Rigid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Bool,
    Int,
    Unit,
    Str,
}

impl BaseType {
    pub fn keyword(self) -> &'static str {
        match self {
            BaseType::Bool => "bool",
            BaseType::Int => "int",
            BaseType::Unit => "unit",
            BaseType::Str => "str",
        }
    }
}

/// A finite set of operation names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Effect(BTreeSet<Name>);

impl Effect {
    pub fn empty() -> Self {
        Effect(BTreeSet::new())
    }

    pub fn singleton(op: Name) -> Self {
        let mut set = BTreeSet::new();
        set.insert(op);
        Effect(set)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, op: &str) -> bool {
        self.0.contains(op)
    }

    pub fn insert(&mut self, op: Name) -> bool {
        self.0.insert(op)
    }

    pub fn remove(&mut self, op: &str) -> bool {
        self.0.remove(op)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Name> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &Effect) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &Effect) -> Effect {
        Effect(self.0.union(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &Effect) -> Effect {
        Effect(self.0.difference(&other.0).cloned().collect())
    }

    pub fn extend(&mut self, other: &Effect) {
        self.0.extend(other.0.iter().cloned());
    }
}

impl FromIterator<Name> for Effect {
    fn from_iter<I: IntoIterator<Item = Name>>(iter: I) -> Self {
        Effect(iter.into_iter().collect())
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, op) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{op}")?;
        }
        f.write_str("}")
    }
}

/// Monotypes. Quantification lives only in [`Scheme`] and [`OpSignature`].
///
/// `Arrow`'s effect is `Some` exactly when the program is processed in
/// effect mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Var(TyVar),
    Base(BaseType),
    Arrow(Box<Type>, Box<Type>, Option<Effect>),
    Prod(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    List(Box<Type>),
}

impl Type {
    pub const INT: Type = Type::Base(BaseType::Int);
    pub const BOOL: Type = Type::Base(BaseType::Bool);
    pub const UNIT: Type = Type::Base(BaseType::Unit);
    pub const STR: Type = Type::Base(BaseType::Str);

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod), None)
    }

    pub fn arrow_eff(dom: Type, cod: Type, eff: Effect) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod), Some(eff))
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn list(a: Type) -> Type {
        Type::List(Box::new(a))
    }

    pub fn var(v: TyVar) -> Type {
        Type::Var(v)
    }

    /// Drops every arrow effect.
    pub fn erase_effects(&self) -> Type {
        self.map_arrow_effects(&|_| None)
    }

    /// Annotates unannotated arrows with the empty effect.
    pub fn with_pure_arrows(&self) -> Type {
        self.map_arrow_effects(&|e| Some(e.cloned().unwrap_or_default()))
    }

    fn map_arrow_effects(&self, f: &dyn Fn(Option<&Effect>) -> Option<Effect>) -> Type {
        match self {
            Type::Var(_) | Type::Base(_) => self.clone(),
            Type::Arrow(a, b, e) => Type::Arrow(
                Box::new(a.map_arrow_effects(f)),
                Box::new(b.map_arrow_effects(f)),
                f(e.as_ref()),
            ),
            Type::Prod(a, b) => Type::prod(a.map_arrow_effects(f), b.map_arrow_effects(f)),
            Type::Sum(a, b) => Type::sum(a.map_arrow_effects(f), b.map_arrow_effects(f)),
            Type::List(a) => Type::list(a.map_arrow_effects(f)),
        }
    }

    pub fn occurs(&self, v: TyVar) -> bool {
        match self {
            Type::Var(w) => *w == v,
            Type::Base(_) => false,
            Type::Arrow(a, b, _) | Type::Prod(a, b) | Type::Sum(a, b) => a.occurs(v) || b.occurs(v),
            Type::List(a) => a.occurs(v),
        }
    }

    fn collect_ftv(&self, out: &mut BTreeSet<TyVar>) {
        match self {
            Type::Var(v) => {
                out.insert(*v);
            }
            Type::Base(_) => {}
            Type::Arrow(a, b, _) | Type::Prod(a, b) | Type::Sum(a, b) => {
                a.collect_ftv(out);
                b.collect_ftv(out);
            }
            Type::List(a) => a.collect_ftv(out),
        }
    }

    /// Free variables in order of first (left-to-right) occurrence.
    pub fn vars_in_order(&self) -> Vec<TyVar> {
        fn go(t: &Type, out: &mut Vec<TyVar>) {
            match t {
                Type::Var(v) => {
                    if !out.contains(v) {
                        out.push(*v);
                    }
                }
                Type::Base(_) => {}
                Type::Arrow(a, b, _) | Type::Prod(a, b) | Type::Sum(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Type::List(a) => go(a, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Node count, used by generators and fuel heuristics.
    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) | Type::Base(_) => 1,
            Type::Arrow(a, b, _) | Type::Prod(a, b) | Type::Sum(a, b) => 1 + a.size() + b.size(),
            Type::List(a) => 1 + a.size(),
        }
    }
}

/// Free type variables of a type.
pub fn ftv(t: &Type) -> BTreeSet<TyVar> {
    let mut out = BTreeSet::new();
    t.collect_ftv(&mut out);
    out
}

/// Simultaneous substitution. Types carry no binders, so no capture can occur.
pub fn subst_type(t: &Type, s: &HashMap<TyVar, Type>) -> Type {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Type::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Type::Base(_) => t.clone(),
        Type::Arrow(a, b, e) => Type::Arrow(
            Box::new(subst_type(a, s)),
            Box::new(subst_type(b, s)),
            e.clone(),
        ),
        Type::Prod(a, b) => Type::prod(subst_type(a, s), subst_type(b, s)),
        Type::Sum(a, b) => Type::sum(subst_type(a, s), subst_type(b, s)),
        Type::List(a) => Type::list(subst_type(a, s)),
    }
}

/// `forall vars. body`; the quantified variables are rigid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub vars: Vec<TyVar>,
    pub body: Type,
}

impl Scheme {
    pub fn mono(body: Type) -> Self {
        Scheme { vars: Vec::new(), body }
    }

    pub fn ftv(&self) -> BTreeSet<TyVar> {
        let mut out = ftv(&self.body);
        for v in &self.vars {
            out.remove(v);
        }
        out
    }

    /// Drops quantifiers that do not occur in the body and orders the rest by
    /// first occurrence.
    pub fn normalize(&self) -> Scheme {
        let vars = self
            .body
            .vars_in_order()
            .into_iter()
            .filter(|v| self.vars.contains(v))
            .collect();
        Scheme { vars, body: self.body.clone() }
    }

    /// Equality up to renaming of quantified variables.
    pub fn alpha_eq(&self, other: &Scheme) -> bool {
        let a = self.normalize();
        let b = other.normalize();
        if a.vars.len() != b.vars.len() {
            return false;
        }
        let canon = |s: &Scheme| {
            let map: HashMap<TyVar, Type> = s
                .vars
                .iter()
                .enumerate()
                .map(|(i, v)| (*v, Type::Var(TyVar::rigid(u32::MAX - i as u32))))
                .collect();
            subst_type(&s.body, &map)
        };
        canon(&a) == canon(&b)
    }
}

/// `forall vars. dom ~> cod`, the declared type of an operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSignature {
    pub op: Name,
    pub vars: Vec<TyVar>,
    /// Source names of `vars`, used for diagnostics and printing.
    pub var_names: Vec<Name>,
    pub dom: Type,
    pub cod: Type,
}

impl OpSignature {
    /// Variables of `dom` or `cod` that are not quantified; empty for a
    /// well-formed signature.
    pub fn unbound_vars(&self) -> BTreeSet<TyVar> {
        let mut free = ftv(&self.dom);
        free.extend(ftv(&self.cod));
        free.into_iter().filter(|v| !self.vars.contains(v)).collect()
    }

    pub fn var_name(&self, v: TyVar) -> Option<&Name> {
        self.vars.iter().position(|w| *w == v).map(|i| &self.var_names[i])
    }
}

/// A type as written in source: variables are still names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Var(Name),
    Base(BaseType),
    Arrow(Box<TypeExpr>, Box<TypeExpr>, Option<Effect>),
    Prod(Box<TypeExpr>, Box<TypeExpr>),
    Sum(Box<TypeExpr>, Box<TypeExpr>),
    List(Box<TypeExpr>),
}

impl TypeExpr {
    pub fn var_names(&self) -> Vec<Name> {
        fn go(t: &TypeExpr, out: &mut Vec<Name>) {
            match t {
                TypeExpr::Var(n) => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                TypeExpr::Base(_) => {}
                TypeExpr::Arrow(a, b, _) | TypeExpr::Prod(a, b) | TypeExpr::Sum(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                TypeExpr::List(a) => go(a, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn effects(&self) -> Vec<&Effect> {
        fn go<'a>(t: &'a TypeExpr, out: &mut Vec<&'a Effect>) {
            match t {
                TypeExpr::Var(_) | TypeExpr::Base(_) => {}
                TypeExpr::Arrow(a, b, e) => {
                    if let Some(e) = e {
                        out.push(e);
                    }
                    go(a, out);
                    go(b, out);
                }
                TypeExpr::Prod(a, b) | TypeExpr::Sum(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                TypeExpr::List(a) => go(a, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

/// An annotation `forall a b. T` as written in source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchemeExpr {
    pub vars: Vec<Name>,
    pub body: TypeExpr,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> TyVar {
        TyVar::rigid(0)
    }
    fn b() -> TyVar {
        TyVar::rigid(1)
    }

    #[test]
    fn ftv_examples() {
        let t = Type::arrow(Type::list(Type::Var(a())), Type::Var(a()));
        assert_eq!(ftv(&t), [a()].into_iter().collect());
        let s = Scheme { vars: vec![a()], body: Type::arrow(Type::Var(a()), Type::Var(b())) };
        assert_eq!(s.ftv(), [b()].into_iter().collect());
        assert!(ftv(&Type::INT).is_empty());
    }

    #[test]
    fn subst_examples() {
        let t = Type::arrow(Type::list(Type::Var(a())), Type::Var(a()));
        let s: HashMap<_, _> = [(a(), Type::INT)].into_iter().collect();
        assert_eq!(subst_type(&t, &s), Type::arrow(Type::list(Type::INT), Type::INT));

        let t = Type::arrow(Type::Var(a()), Type::Var(b()));
        let s: HashMap<_, _> = [(a(), Type::Var(b()))].into_iter().collect();
        assert_eq!(subst_type(&t, &s), Type::arrow(Type::Var(b()), Type::Var(b())));

        let s: HashMap<_, _> = [(a(), Type::INT)].into_iter().collect();
        assert_eq!(subst_type(&Type::UNIT, &s), Type::UNIT);
    }

    #[test]
    fn scheme_alpha_eq() {
        let s1 = Scheme { vars: vec![a()], body: Type::arrow(Type::Var(a()), Type::Var(a())) };
        let s2 = Scheme { vars: vec![b()], body: Type::arrow(Type::Var(b()), Type::Var(b())) };
        assert!(s1.alpha_eq(&s2));
        let s3 = Scheme { vars: vec![a(), b()], body: Type::arrow(Type::Var(a()), Type::Var(b())) };
        assert!(!s1.alpha_eq(&s3));
        // Quantifier order does not matter.
        let s4 = Scheme { vars: vec![b(), a()], body: Type::arrow(Type::Var(a()), Type::Var(b())) };
        assert!(s3.alpha_eq(&s4));
    }

    #[test]
    fn effect_set_ops() {
        let e1: Effect = [Name::new("select")].into_iter().collect();
        let e2: Effect = [Name::new("select"), Name::new("fail")].into_iter().collect();
        assert!(Effect::empty().is_subset(&e1));
        assert!(e1.is_subset(&e2));
        assert!(!Effect::singleton(Name::new("get_id")).is_subset(&e1));
        assert_eq!(e2.to_string(), "{fail,select}");
    }
}
