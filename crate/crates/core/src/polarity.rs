//! Polarity of type-variable occurrences and the signature restriction.
//!
//! An occurrence is positive or negative according to the number of arrow
//! domains above it, and strictly positive when no arrow domain is above it.
//! Products, sums and lists pass polarity through unchanged.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::parse::TypeNamer;
use crate::syntax::{Effect, Name, OpSignature, TyVar, Type};

/// One step from a type to an immediate component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Dom,
    Cod,
    Left,
    Right,
    Elem,
}

/// A position inside a type, written as a string of `d` (domain), `c`
/// (codomain), `l`/`r` (product or sum component) and `e` (list element).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Path(pub Vec<Step>);

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for s in &self.0 {
            let c = match s {
                Step::Dom => 'd',
                Step::Cod => 'c',
                Step::Left => 'l',
                Step::Right => 'r',
                Step::Elem => 'e',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A single occurrence of a variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub positive: bool,
    pub strictly_positive: bool,
    pub path: Path,
}

pub fn occurrence_list(v: TyVar, t: &Type) -> Vec<Occurrence> {
    fn go(v: TyVar, t: &Type, positive: bool, strict: bool, path: &mut Vec<Step>, out: &mut Vec<Occurrence>) {
        let mut sub = |t: &Type, step: Step, positive: bool, strict: bool, out: &mut Vec<Occurrence>| {
            path.push(step);
            go(v, t, positive, strict, path, out);
            path.pop();
        };
        match t {
            Type::Var(w) if *w == v => out.push(Occurrence {
                positive,
                strictly_positive: strict,
                path: Path(path.clone()),
            }),
            Type::Var(_) | Type::Base(_) => {}
            Type::Arrow(a, b, _) => {
                sub(a, Step::Dom, !positive, false, out);
                sub(b, Step::Cod, positive, strict, out);
            }
            Type::Prod(a, b) | Type::Sum(a, b) => {
                sub(a, Step::Left, positive, strict, out);
                sub(b, Step::Right, positive, strict, out);
            }
            Type::List(a) => sub(a, Step::Elem, positive, strict, out),
        }
    }
    let mut out = Vec::new();
    go(v, t, true, true, &mut Vec::new(), &mut out);
    out
}

/// Summary of how a variable occurs in a type, with one witness path per
/// flag that holds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OccurrenceReport {
    pub positive: Option<Path>,
    pub negative: Option<Path>,
    pub strictly_positive: Option<Path>,
}

impl OccurrenceReport {
    pub fn occurs_positive(&self) -> bool {
        self.positive.is_some()
    }

    pub fn occurs_negative(&self) -> bool {
        self.negative.is_some()
    }

    pub fn occurs_strictly_positive(&self) -> bool {
        self.strictly_positive.is_some()
    }
}

pub fn occurrences(v: TyVar, t: &Type) -> OccurrenceReport {
    let mut r = OccurrenceReport::default();
    for o in occurrence_list(v, t) {
        let slot = if o.positive { &mut r.positive } else { &mut r.negative };
        slot.get_or_insert_with(|| o.path.clone());
        if o.strictly_positive {
            r.strictly_positive.get_or_insert(o.path);
        }
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Domain,
    Codomain,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Domain => "domain",
            Side::Codomain => "codomain",
        })
    }
}

/// The polarity that made an occurrence illegal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BadPolarity {
    /// Positive in the domain without being strictly positive.
    NonStrictPositive,
    /// Negative in the codomain.
    Negative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub var: TyVar,
    pub var_name: Name,
    pub side: Side,
    pub polarity: BadPolarity,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SrVerdict {
    pub pass: bool,
    pub violations: Vec<Violation>,
    /// The offending signature, used to print the violations.
    pub sig: OpSignature,
}

impl SrVerdict {
    /// One line per violation, e.g.
    /// `get_id: a occurs negatively in codomain a -> a (at d)`.
    pub fn messages(&self) -> Vec<String> {
        let mut namer = TypeNamer::new();
        for (v, n) in self.sig.vars.iter().zip(&self.sig.var_names) {
            namer.bind(*v, n.as_str());
        }
        self.violations
            .iter()
            .map(|v| {
                let ty = match v.side {
                    Side::Domain => namer.ty(&self.sig.dom),
                    Side::Codomain => namer.ty(&self.sig.cod),
                };
                let how = match v.polarity {
                    BadPolarity::Negative => "negatively",
                    BadPolarity::NonStrictPositive => "positively but not strictly positively",
                };
                format!(
                    "{}: {} occurs {how} in {} {ty} (at {})",
                    self.sig.op, v.var_name, v.side, v.path
                )
            })
            .collect()
    }
}

/// Checks that every quantified variable occurs only negatively or strictly
/// positively in the domain, and only positively in the codomain.
pub fn check_sr(sig: &OpSignature) -> SrVerdict {
    let mut violations = Vec::new();
    for (i, &v) in sig.vars.iter().enumerate() {
        let var_name = sig.var_names.get(i).cloned().unwrap_or_else(|| Name::new("?"));
        for o in occurrence_list(v, &sig.dom) {
            if o.positive && !o.strictly_positive {
                violations.push(Violation {
                    var: v,
                    var_name: var_name.clone(),
                    side: Side::Domain,
                    polarity: BadPolarity::NonStrictPositive,
                    path: o.path,
                });
            }
        }
        for o in occurrence_list(v, &sig.cod) {
            if !o.positive {
                violations.push(Violation {
                    var: v,
                    var_name: var_name.clone(),
                    side: Side::Codomain,
                    polarity: BadPolarity::Negative,
                    path: o.path,
                });
            }
        }
    }
    SrVerdict { pass: violations.is_empty(), violations, sig: sig.clone() }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SrError {
    #[error("unknown operation `{0}` in effect")]
    UnknownOp(Name),
}

/// Effects `ε′` that the effect-aware restriction additionally requires to be
/// safe: those on arrows `C -ε′-> D` at strictly positive positions of the
/// domain whose codomain `D` mentions a quantified variable.
pub fn nested_requirements(sig: &OpSignature) -> Vec<Effect> {
    fn go(t: &Type, strict: bool, vars: &BTreeSet<TyVar>, out: &mut Vec<Effect>) {
        match t {
            Type::Var(_) | Type::Base(_) => {}
            Type::Arrow(a, b, eff) => {
                if strict && crate::syntax::ftv(b).iter().any(|v| vars.contains(v)) {
                    out.push(eff.clone().unwrap_or_default());
                }
                go(a, false, vars, out);
                go(b, strict, vars, out);
            }
            Type::Prod(a, b) | Type::Sum(a, b) => {
                go(a, strict, vars, out);
                go(b, strict, vars, out);
            }
            Type::List(a) => go(a, strict, vars, out),
        }
    }
    let vars = sig.vars.iter().copied().collect();
    let mut out = Vec::new();
    go(&sig.dom, true, &vars, &mut out);
    out
}

/// The largest set of operations in `env` each of which passes [`check_sr`]
/// and whose nested requirements only mention operations of the set.
pub fn sr_safe_ops(env: &BTreeMap<Name, OpSignature>) -> BTreeSet<Name> {
    let mut safe: BTreeSet<Name> =
        env.iter().filter(|(_, s)| check_sr(s).pass).map(|(n, _)| n.clone()).collect();
    loop {
        let drop: Vec<Name> = safe
            .iter()
            .filter(|op| {
                nested_requirements(&env[*op])
                    .iter()
                    .any(|eff| eff.iter().any(|o| !safe.contains(o)))
            })
            .cloned()
            .collect();
        if drop.is_empty() {
            return safe;
        }
        for op in drop {
            safe.remove(&op);
        }
    }
}

/// Whether every operation of `eps` satisfies the effect-aware signature
/// restriction. Cycles through nested effects are read coinductively.
pub fn sr_effect(eps: &Effect, env: &BTreeMap<Name, OpSignature>) -> Result<bool, SrError> {
    if let Some(op) = eps.iter().find(|o| !env.contains_key(o.as_str())) {
        return Err(SrError::UnknownOp(op.clone()));
    }
    let safe = sr_safe_ops(env);
    Ok(eps.iter().all(|o| safe.contains(o)))
}
