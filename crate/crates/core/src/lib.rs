//! An interpreter and typechecker for a small ML-like language with
//! polymorphic algebraic effects and handlers.
//!
//! Operations are declared with signatures `forall a. A ~> B`. Declarations
//! are checked against the signature restriction, which makes it sound to
//! generalize any let-bound expression, effectful or not.

pub mod diagnostic;
pub mod effects;
pub mod eval;
pub mod infer;
pub mod parse;
pub mod polarity;
pub mod session;
pub mod syntax;
