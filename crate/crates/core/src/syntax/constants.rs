//! The constant table: literal values, primitive functions, their first-order
//! types and the denotation function used by constant application.

use std::sync::Arc;

use super::types::{BaseType, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Lt,
    Gt,
    Not,
    Length,
    First,
    Last,
}

impl Prim {
    pub const ALL: [Prim; 11] = [
        Prim::Add,
        Prim::Sub,
        Prim::Mul,
        Prim::Mod,
        Prim::Eq,
        Prim::Lt,
        Prim::Gt,
        Prim::Not,
        Prim::Length,
        Prim::First,
        Prim::Last,
    ];

    /// Surface spelling: infix operators are written without parentheses.
    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Mod => "mod",
            Prim::Eq => "=",
            Prim::Lt => "<",
            Prim::Gt => ">",
            Prim::Not => "not",
            Prim::Length => "length",
            Prim::First => "first",
            Prim::Last => "last",
        }
    }

    pub fn is_infix(self) -> bool {
        matches!(
            self,
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Mod | Prim::Eq | Prim::Lt | Prim::Gt
        )
    }

    /// Argument base types, outermost first, and the result base type.
    fn shape(self) -> (&'static [BaseType], BaseType) {
        use BaseType::*;
        match self {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Mod => (&[Int, Int], Int),
            Prim::Eq | Prim::Lt | Prim::Gt => (&[Int, Int], Bool),
            Prim::Not => (&[Bool], Bool),
            Prim::Length => (&[Str], Int),
            Prim::First | Prim::Last => (&[Str], Str),
        }
    }
}

/// Constants. `Partial` is a binary primitive already applied to its first
/// argument; it only arises during evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Unit,
    Bool(bool),
    Int(i64),
    Str(Arc<str>),
    Prim(Prim),
    Partial(Prim, Box<Const>),
}

impl Const {
    pub fn str(s: &str) -> Const {
        Const::Str(Arc::from(s))
    }

    /// The closed first-order type `ι₁ → … → ιₙ₊₁` of the constant, with
    /// unannotated arrows.
    pub fn type_of(&self) -> Type {
        match self {
            Const::Unit => Type::UNIT,
            Const::Bool(_) => Type::BOOL,
            Const::Int(_) => Type::INT,
            Const::Str(_) => Type::STR,
            Const::Prim(p) => {
                let (args, res) = p.shape();
                args.iter()
                    .rev()
                    .fold(Type::Base(res), |acc, a| Type::arrow(Type::Base(*a), acc))
            }
            Const::Partial(p, _) => {
                let (args, res) = p.shape();
                args[1..]
                    .iter()
                    .rev()
                    .fold(Type::Base(res), |acc, a| Type::arrow(Type::Base(*a), acc))
            }
        }
    }

    fn base(&self) -> Option<BaseType> {
        match self {
            Const::Unit => Some(BaseType::Unit),
            Const::Bool(_) => Some(BaseType::Bool),
            Const::Int(_) => Some(BaseType::Int),
            Const::Str(_) => Some(BaseType::Str),
            Const::Prim(_) | Const::Partial(..) => None,
        }
    }
}

/// Denotation of constant application. `None` means the application is
/// undefined, which the evaluator reports as a stuck term.
pub fn zeta(f: &Const, arg: &Const) -> Option<Const> {
    match f {
        Const::Prim(p) => {
            let (args, _) = p.shape();
            if arg.base() != Some(args[0]) {
                return None;
            }
            if args.len() == 2 {
                return Some(Const::Partial(*p, Box::new(arg.clone())));
            }
            match (p, arg) {
                (Prim::Not, Const::Bool(b)) => Some(Const::Bool(!b)),
                (Prim::Length, Const::Str(s)) => Some(Const::Int(s.chars().count() as i64)),
                (Prim::First, Const::Str(s)) => {
                    Some(Const::str(&s.chars().take(1).collect::<String>()))
                }
                (Prim::Last, Const::Str(s)) => {
                    Some(Const::str(&s.chars().skip(1).collect::<String>()))
                }
                _ => None,
            }
        }
        Const::Partial(p, first) => match (p, &**first, arg) {
            (Prim::Add, Const::Int(a), Const::Int(b)) => Some(Const::Int(a.wrapping_add(*b))),
            (Prim::Sub, Const::Int(a), Const::Int(b)) => Some(Const::Int(a.wrapping_sub(*b))),
            (Prim::Mul, Const::Int(a), Const::Int(b)) => Some(Const::Int(a.wrapping_mul(*b))),
            // mod by zero is left undefined.
            (Prim::Mod, Const::Int(_), Const::Int(0)) => None,
            (Prim::Mod, Const::Int(a), Const::Int(b)) => Some(Const::Int(a.wrapping_rem(*b))),
            (Prim::Eq, Const::Int(a), Const::Int(b)) => Some(Const::Bool(a == b)),
            (Prim::Lt, Const::Int(a), Const::Int(b)) => Some(Const::Bool(a < b)),
            (Prim::Gt, Const::Int(a), Const::Int(b)) => Some(Const::Bool(a > b)),
            _ => None,
        },
        _ => None,
    }
}
