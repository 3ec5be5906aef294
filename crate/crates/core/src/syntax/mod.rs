//! Abstract syntax shared by every phase: terms, handlers, types, schemes,
//! operation signatures and the constant table.

mod constants;
mod term;
mod types;

pub use constants::{zeta, Const, Prim};
pub use term::{alpha_eq, fresh_name, subst_term, Handler, OpClause, Term};
pub use types::{
    ftv, subst_type, BaseType, Effect, OpSignature, Scheme, SchemeExpr, TyVar, Type, TypeExpr,
    VarKind,
};

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

/// An identifier: term variables, operation names and type-variable names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}
