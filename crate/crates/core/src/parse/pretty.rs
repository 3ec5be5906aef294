//! Printing of terms and types in concrete syntax that the parser accepts
//! back.

use std::collections::HashMap;
use std::fmt::Write;

use crate::syntax::{
    Const, Handler, OpSignature, Prim, Scheme, SchemeExpr, Term, TyVar, Type, TypeExpr, VarKind,
};

// Precedence levels, loosest first.
const OPEN: u8 = 0;
const CONS: u8 = 1;
const CMP: u8 = 2;
const ADD: u8 = 3;
const MUL: u8 = 4;
const APP: u8 = 5;
const ATOM: u8 = 6;

fn infix_level(p: Prim) -> u8 {
    match p {
        Prim::Eq | Prim::Lt | Prim::Gt => CMP,
        Prim::Add | Prim::Sub => ADD,
        _ => MUL,
    }
}

fn as_infix(t: &Term) -> Option<(Prim, &Term, &Term)> {
    if let Term::App(f, r) = t {
        if let Term::App(op, l) = &**f {
            if let Term::Const(Const::Prim(p)) = &**op {
                if p.is_infix() {
                    return Some((*p, l, r));
                }
            }
        }
    }
    None
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Let(..)
        | Term::Abs(..)
        | Term::If(..)
        | Term::Handle(..)
        | Term::CaseSum(..)
        | Term::CaseList(..)
        | Term::Fix(..) => OPEN,
        Term::Cons(p) if matches!(**p, Term::Pair(..)) && t.as_list().is_none() => CONS,
        Term::App(..) => as_infix(t).map_or(APP, |(p, _, _)| infix_level(p)),
        Term::Inl(_) | Term::Inr(_) | Term::Proj1(_) | Term::Proj2(_) | Term::Cons(_) => APP,
        Term::Const(Const::Partial(..)) => APP,
        Term::Var(_) | Term::Const(_) | Term::Op(..) | Term::Pair(..) | Term::Nil => ATOM,
    }
}

pub fn pretty_term(t: &Term) -> String {
    let mut out = String::new();
    term(&mut out, t, OPEN);
    out
}

pub fn pretty_const(c: &Const) -> String {
    match c {
        Const::Unit => "()".into(),
        Const::Bool(b) => b.to_string(),
        Const::Int(n) if *n < 0 => format!("(-{})", n.unsigned_abs()),
        Const::Int(n) => n.to_string(),
        Const::Str(s) => {
            let mut out = String::from("\"");
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '\r' => out.push_str("\\r"),
                    '\0' => out.push_str("\\0"),
                    c if c.is_control() => {
                        let _ = write!(out, "\\u{{{:x}}}", c as u32);
                    }
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
        Const::Prim(p) if p.is_infix() => format!("({})", p.symbol()),
        Const::Prim(p) => p.symbol().into(),
        Const::Partial(p, a) => format!("{} {}", pretty_const(&Const::Prim(*p)), pretty_const(a)),
    }
}

/// Prints `t`, parenthesized if it binds looser than `prec`.
fn term(out: &mut String, t: &Term, prec: u8) {
    if level(t) < prec {
        out.push('(');
        term(out, t, OPEN);
        out.push(')');
        return;
    }
    // Open forms followed by more syntax must be closed off.
    let tail = |out: &mut String, t: &Term| {
        if level(t) == OPEN {
            term(out, t, CONS);
        } else {
            term(out, t, OPEN);
        }
    };
    match t {
        Term::Var(x) => out.push_str(x.as_str()),
        Term::Const(c) => out.push_str(&pretty_const(c)),
        Term::Abs(x, ann, body) => {
            out.push_str("fun ");
            binder(out, x.as_str(), ann.as_ref());
            out.push_str(" -> ");
            term(out, body, OPEN);
        }
        Term::App(f, a) => {
            if let Some((p, l, r)) = as_infix(t) {
                let lv = infix_level(p);
                // `=`, `<` and `>` do not associate.
                let lp = if lv == CMP { lv + 1 } else { lv };
                term(out, l, lp);
                let _ = write!(out, " {} ", p.symbol());
                term(out, r, lv + 1);
            } else {
                term(out, f, APP);
                out.push(' ');
                term(out, a, ATOM);
            }
        }
        Term::Op(op, arg) => {
            let _ = write!(out, "#{op}(");
            if **arg != Term::unit() {
                term(out, arg, OPEN);
            }
            out.push(')');
        }
        Term::Handle(body, h) => {
            out.push_str("handle ");
            term(out, body, OPEN);
            out.push_str(" with ");
            handler(out, h);
        }
        Term::Let(x, ann, bound, body) => {
            match (&**bound, ann) {
                (Term::Fix(f, y, fbody), _) if f == x => {
                    let _ = write!(out, "let rec {x} {y}");
                    if let Some(s) = ann {
                        let _ = write!(out, " : {}", pretty_scheme_expr(s));
                    }
                    out.push_str(" = ");
                    term(out, fbody, OPEN);
                }
                _ => {
                    let _ = write!(out, "let {x}");
                    if let Some(s) = ann {
                        let _ = write!(out, " : {}", pretty_scheme_expr(s));
                    }
                    out.push_str(" = ");
                    term(out, bound, OPEN);
                }
            }
            out.push_str(" in ");
            term(out, body, OPEN);
        }
        Term::Pair(a, b) => {
            out.push('(');
            term(out, a, OPEN);
            out.push_str(", ");
            term(out, b, OPEN);
            out.push(')');
        }
        Term::Proj1(a) => prefix(out, "fst", a),
        Term::Proj2(a) => prefix(out, "snd", a),
        Term::Inl(a) => prefix(out, "inl", a),
        Term::Inr(a) => prefix(out, "inr", a),
        Term::CaseSum(s, x, l, y, r) => {
            out.push_str("case ");
            term(out, s, OPEN);
            let _ = write!(out, " of inl {x} -> ");
            tail(out, l);
            let _ = write!(out, " | inr {y} -> ");
            term(out, r, OPEN);
        }
        Term::Nil => out.push_str("[]"),
        Term::Cons(p) => {
            if let Some(items) = t.as_list() {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str("; ");
                    }
                    term(out, item, OPEN);
                }
                out.push(']');
            } else if let Term::Pair(h, tl) = &**p {
                term(out, h, CMP);
                out.push_str(" :: ");
                term(out, tl, CONS);
            } else {
                prefix(out, "cons", p);
            }
        }
        Term::CaseList(s, n, p, c) => {
            out.push_str("case ");
            term(out, s, OPEN);
            out.push_str(" of [] -> ");
            tail(out, n);
            let _ = write!(out, " | cons {p} -> ");
            term(out, c, OPEN);
        }
        Term::Fix(f, x, body) => {
            let _ = write!(out, "fix {f}. fun {x} -> ");
            term(out, body, OPEN);
        }
        Term::If(c, a, b) => {
            out.push_str("if ");
            term(out, c, OPEN);
            out.push_str(" then ");
            term(out, a, OPEN);
            out.push_str(" else ");
            term(out, b, OPEN);
        }
    }
}

fn prefix(out: &mut String, kw: &str, a: &Term) {
    out.push_str(kw);
    out.push(' ');
    term(out, a, ATOM);
}

fn binder(out: &mut String, x: &str, ann: Option<&TypeExpr>) {
    match ann {
        Some(t) => {
            let _ = write!(out, "({x} : {})", pretty_type_expr(t));
        }
        None => out.push_str(x),
    }
}

fn handler(out: &mut String, h: &Handler) {
    let _ = write!(out, "return {} -> ", h.ret_var);
    let last = h.clauses.len();
    if last == 0 {
        term(out, &h.ret_body, OPEN);
    } else {
        term(out, &h.ret_body, if level(&h.ret_body) == OPEN { CONS } else { OPEN });
    }
    for (i, (op, c)) in h.clauses.iter().enumerate() {
        if c.body.free_vars().contains(&c.cont) {
            let _ = write!(out, " | {op}({}, {}) -> ", c.param, c.cont);
        } else {
            let _ = write!(out, " | {op} {} -> ", c.param);
        }
        let final_clause = i + 1 == last;
        if !final_clause && level(&c.body) == OPEN {
            term(out, &c.body, CONS);
        } else {
            term(out, &c.body, OPEN);
        }
    }
}

// ------------------------------------------------------------------- types

/// Assigns printable names to type variables. Quantified and rigid variables
/// get letters in order of first appearance; unsolved unification variables
/// are shown as `?a`, `?b`, … so they cannot be mistaken for quantified ones.
#[derive(Default)]
pub struct TypeNamer {
    names: HashMap<TyVar, String>,
    next_rigid: usize,
    next_unif: usize,
}

fn letter_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

impl TypeNamer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn name(&mut self, v: TyVar) -> String {
        if let Some(n) = self.names.get(&v) {
            return n.clone();
        }
        let n = match v.kind {
            VarKind::Rigid => {
                self.next_rigid += 1;
                letter_name(self.next_rigid - 1)
            }
            VarKind::Unif => {
                self.next_unif += 1;
                format!("?{}", letter_name(self.next_unif - 1))
            }
        };
        self.names.insert(v, n.clone());
        n
    }

    /// Binds a variable to a fixed name.
    pub fn bind(&mut self, v: TyVar, name: &str) {
        self.names.insert(v, name.to_string());
    }

    pub fn ty(&mut self, t: &Type) -> String {
        let mut out = String::new();
        self.ty_at(&mut out, t, 0);
        out
    }

    /// Levels: 0 arrow, 1 sum, 2 product, 3 list postfix / atom.
    fn ty_at(&mut self, out: &mut String, t: &Type, prec: u8) {
        let lv = match t {
            Type::Arrow(..) => 0,
            Type::Sum(..) => 1,
            Type::Prod(..) => 2,
            Type::Var(_) | Type::Base(_) | Type::List(_) => 3,
        };
        if lv < prec {
            out.push('(');
            self.ty_at(out, t, 0);
            out.push(')');
            return;
        }
        match t {
            Type::Var(v) => {
                let n = self.name(*v);
                out.push_str(&n);
            }
            Type::Base(b) => out.push_str(b.keyword()),
            Type::Arrow(a, b, eff) => {
                self.ty_at(out, a, 1);
                match eff {
                    Some(e) => {
                        let _ = write!(out, " -{e}-> ");
                    }
                    None => out.push_str(" -> "),
                }
                self.ty_at(out, b, 0);
            }
            Type::Sum(a, b) => {
                self.ty_at(out, a, 1);
                out.push_str(" + ");
                self.ty_at(out, b, 2);
            }
            Type::Prod(a, b) => {
                self.ty_at(out, a, 2);
                out.push_str(" * ");
                self.ty_at(out, b, 3);
            }
            Type::List(a) => {
                self.ty_at(out, a, 3);
                out.push_str(" list");
            }
        }
    }

    pub fn scheme(&mut self, s: &Scheme) -> String {
        let s = s.normalize();
        let mut out = String::new();
        if !s.vars.is_empty() {
            out.push_str("forall");
            for v in &s.vars {
                let n = self.name(*v);
                out.push(' ');
                out.push_str(&n);
            }
            out.push_str(". ");
        }
        self.ty_at(&mut out, &s.body, 0);
        out
    }
}

pub fn pretty_type(t: &Type) -> String {
    TypeNamer::new().ty(t)
}

/// `forall a b. body`, naming the quantified variables `a`, `b`, … in order
/// of first occurrence.
pub fn pretty_scheme(s: &Scheme) -> String {
    TypeNamer::new().scheme(s)
}

/// `forall a. dom ~> cod` using the declared variable names.
pub fn pretty_signature(sig: &OpSignature) -> String {
    let mut namer = TypeNamer::new();
    for (v, n) in sig.vars.iter().zip(&sig.var_names) {
        namer.bind(*v, n.as_str());
    }
    let mut out = String::new();
    if !sig.vars.is_empty() {
        out.push_str("forall");
        for n in &sig.var_names {
            let _ = write!(out, " {n}");
        }
        out.push_str(". ");
    }
    let dom = namer.ty(&sig.dom);
    let cod = namer.ty(&sig.cod);
    let _ = write!(out, "{dom} ~> {cod}");
    out
}

pub fn pretty_type_expr(t: &TypeExpr) -> String {
    let mut out = String::new();
    type_expr(&mut out, t, 0);
    out
}

fn type_expr(out: &mut String, t: &TypeExpr, prec: u8) {
    let lv = match t {
        TypeExpr::Arrow(..) => 0,
        TypeExpr::Sum(..) => 1,
        TypeExpr::Prod(..) => 2,
        TypeExpr::Var(_) | TypeExpr::Base(_) | TypeExpr::List(_) => 3,
    };
    if lv < prec {
        out.push('(');
        type_expr(out, t, 0);
        out.push(')');
        return;
    }
    match t {
        TypeExpr::Var(n) => out.push_str(n.as_str()),
        TypeExpr::Base(b) => out.push_str(b.keyword()),
        TypeExpr::Arrow(a, b, eff) => {
            type_expr(out, a, 1);
            match eff {
                Some(e) => {
                    let _ = write!(out, " -{e}-> ");
                }
                None => out.push_str(" -> "),
            }
            type_expr(out, b, 0);
        }
        TypeExpr::Sum(a, b) => {
            type_expr(out, a, 1);
            out.push_str(" + ");
            type_expr(out, b, 2);
        }
        TypeExpr::Prod(a, b) => {
            type_expr(out, a, 2);
            out.push_str(" * ");
            type_expr(out, b, 3);
        }
        TypeExpr::List(a) => {
            type_expr(out, a, 3);
            out.push_str(" list");
        }
    }
}

pub fn pretty_scheme_expr(s: &SchemeExpr) -> String {
    let body = pretty_type_expr(&s.body);
    if s.vars.is_empty() {
        body
    } else {
        let vars: Vec<&str> = s.vars.iter().map(|v| v.as_str()).collect();
        format!("forall {}. {body}", vars.join(" "))
    }
}
