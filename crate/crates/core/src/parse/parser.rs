//! Recursive-descent parser producing the surface tree.
//!
//! At the top level a token in column 1 that can begin an item ends the
//! previous item, so files need no separators; `;;` is also accepted.

use crate::diagnostic::{Diagnostic, Span};
use crate::syntax::{BaseType, Const, Effect, Name, Prim, SchemeExpr, TypeExpr};

use super::lexer::{lex, Tok, Token};
use super::surface::{Clause, ConsPat, Expr, ExprKind, Item, LetHead, OpDecl, Param};

type PResult<T> = Result<T, Diagnostic>;

static EOF: Tok = Tok::Eof;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    item_start: usize,
    layout: bool,
}

fn starts_atom(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_)
            | Tok::Int(_)
            | Tok::Str(_)
            | Tok::True
            | Tok::False
            | Tok::Not
            | Tok::Length
            | Tok::First
            | Tok::Last
            | Tok::Nil
            | Tok::Resume
            | Tok::Hash
            | Tok::LParen
            | Tok::LBracket
    )
}

/// Tokens after which an expression or type may be complete.
fn ends_phrase(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_)
            | Tok::Int(_)
            | Tok::Str(_)
            | Tok::True
            | Tok::False
            | Tok::Not
            | Tok::Length
            | Tok::First
            | Tok::Last
            | Tok::Nil
            | Tok::Resume
            | Tok::RParen
            | Tok::RBracket
    )
}

fn starts_item(t: &Tok) -> bool {
    starts_atom(t)
        || matches!(
            t,
            Tok::Effect
                | Tok::Let
                | Tok::Fun
                | Tok::If
                | Tok::Handle
                | Tok::Case
                | Tok::Fix
                | Tok::Inl
                | Tok::Inr
                | Tok::Cons
                | Tok::Fst
                | Tok::Snd
        )
}

fn is_open(t: &Tok) -> bool {
    matches!(t, Tok::Let | Tok::Fun | Tok::If | Tok::Handle | Tok::Case | Tok::Fix)
}

fn binop(t: &Tok) -> Option<Prim> {
    Some(match t {
        Tok::Plus => Prim::Add,
        Tok::Minus => Prim::Sub,
        Tok::Star => Prim::Mul,
        Tok::Mod => Prim::Mod,
        Tok::Equals => Prim::Eq,
        Tok::Less => Prim::Lt,
        Tok::Greater => Prim::Gt,
        _ => return None,
    })
}

impl Parser {
    pub fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, item_start: 0, layout: false })
    }

    fn tok_at(&self, i: usize) -> &Tok {
        let i = i.min(self.toks.len() - 1);
        if self.at_boundary(i) {
            return &EOF;
        }
        &self.toks[i].tok
    }

    fn at_boundary(&self, i: usize) -> bool {
        let t = &self.toks[i.min(self.toks.len() - 1)];
        self.layout
            && i > self.item_start
            && t.span.col == 1
            && starts_item(&t.tok)
            && ends_phrase(&self.toks[i - 1].tok)
    }

    fn peek(&self) -> &Tok {
        self.tok_at(self.pos)
    }

    fn peek2(&self) -> &Tok {
        self.tok_at(self.pos + 1)
    }

    fn span(&self) -> Span {
        self.toks[self.pos.min(self.toks.len() - 1)].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Diagnostic {
        let found = if self.at_boundary(self.pos) {
            "the start of a new top-level item".to_string()
        } else {
            self.peek().describe()
        };
        Diagnostic::error(self.span(), format!("expected {expected}, found {found}"))
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.peek() == &t {
            Ok(self.bump().span)
        } else {
            Err(self.error(&t.describe()))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) => {
                let n = Name::new(s);
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn mk(&self, kind: ExprKind, start: Span) -> Expr {
        Expr { kind, span: start.join(self.prev_span()) }
    }

    // ---------------------------------------------------------------- items

    pub fn items(&mut self) -> PResult<Vec<Item>> {
        let mut items = Vec::new();
        loop {
            self.layout = false;
            while self.eat(&Tok::SemiSemi) {}
            if self.peek() == &Tok::Eof {
                return Ok(items);
            }
            self.item_start = self.pos;
            self.layout = true;
            items.push(self.item()?);
            if !self.eat(&Tok::SemiSemi) && self.peek() != &Tok::Eof {
                return Err(self.error("the end of the item"));
            }
        }
    }

    fn item(&mut self) -> PResult<Item> {
        match self.peek() {
            Tok::Effect => Ok(Item::Effect(self.effect_decl()?)),
            Tok::Let => {
                let start = self.span();
                let head = self.let_head()?;
                if self.eat(&Tok::In) {
                    let body = self.expr()?;
                    Ok(Item::Expr(self.mk(ExprKind::Let(Box::new(head), Box::new(body)), start)))
                } else {
                    Ok(Item::Let(head))
                }
            }
            _ => Ok(Item::Expr(self.expr()?)),
        }
    }

    fn effect_decl(&mut self) -> PResult<OpDecl> {
        let start = self.expect(Tok::Effect)?;
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let vars = self.quantifier()?;
        let dom = self.ty()?;
        self.expect(Tok::SigArrow)?;
        let cod = self.ty()?;
        Ok(OpDecl { name, vars, dom, cod, span: start.join(self.prev_span()) })
    }

    fn quantifier(&mut self) -> PResult<Vec<Name>> {
        let mut vars = Vec::new();
        if self.eat(&Tok::Forall) {
            vars.push(self.ident()?);
            while let Tok::Ident(_) = self.peek() {
                vars.push(self.ident()?);
            }
            self.expect(Tok::Dot)?;
        }
        Ok(vars)
    }

    // ---------------------------------------------------------------- types

    pub fn scheme(&mut self) -> PResult<SchemeExpr> {
        let vars = self.quantifier()?;
        let body = self.ty()?;
        Ok(SchemeExpr { vars, body })
    }

    pub fn ty(&mut self) -> PResult<TypeExpr> {
        let dom = self.sum_ty()?;
        match self.peek() {
            Tok::Arrow => {
                self.bump();
                let cod = self.ty()?;
                Ok(TypeExpr::Arrow(Box::new(dom), Box::new(cod), None))
            }
            Tok::EffOpen => {
                self.bump();
                let mut eff = Effect::empty();
                if self.peek() != &Tok::EffClose {
                    eff.insert(self.ident()?);
                    while self.eat(&Tok::Comma) {
                        eff.insert(self.ident()?);
                    }
                }
                self.expect(Tok::EffClose)?;
                let cod = self.ty()?;
                Ok(TypeExpr::Arrow(Box::new(dom), Box::new(cod), Some(eff)))
            }
            _ => Ok(dom),
        }
    }

    fn sum_ty(&mut self) -> PResult<TypeExpr> {
        let mut l = self.prod_ty()?;
        while self.eat(&Tok::Plus) {
            let r = self.prod_ty()?;
            l = TypeExpr::Sum(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn prod_ty(&mut self) -> PResult<TypeExpr> {
        let mut l = self.post_ty()?;
        while self.eat(&Tok::Star) {
            let r = self.post_ty()?;
            l = TypeExpr::Prod(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn post_ty(&mut self) -> PResult<TypeExpr> {
        let mut t = self.atom_ty()?;
        while matches!(self.peek(), Tok::Ident(s) if s == "list") {
            self.bump();
            t = TypeExpr::List(Box::new(t));
        }
        Ok(t)
    }

    fn atom_ty(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let base = match s.as_str() {
                    "int" => Some(BaseType::Int),
                    "bool" => Some(BaseType::Bool),
                    "unit" => Some(BaseType::Unit),
                    "str" => Some(BaseType::Str),
                    "list" => return Err(self.error("a type")),
                    _ => None,
                };
                self.bump();
                Ok(base.map_or_else(|| TypeExpr::Var(Name::new(&s)), TypeExpr::Base))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.error("a type")),
        }
    }

    // ---------------------------------------------------------- expressions

    pub fn expr(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Let => {
                let start = self.span();
                let head = self.let_head()?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                Ok(self.mk(ExprKind::Let(Box::new(head), Box::new(body)), start))
            }
            Tok::Fun => {
                let start = self.bump().span;
                let params = self.params(true)?;
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                Ok(self.mk(ExprKind::Fun(params, Box::new(body)), start))
            }
            Tok::If => {
                let start = self.bump().span;
                let c = self.expr()?;
                self.expect(Tok::Then)?;
                let t = self.expr()?;
                self.expect(Tok::Else)?;
                let e = self.expr()?;
                Ok(self.mk(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)), start))
            }
            Tok::Handle => self.handle(),
            Tok::Case => self.case(),
            Tok::Fix => {
                let start = self.bump().span;
                let f = self.ident()?;
                self.expect(Tok::Dot)?;
                self.expect(Tok::Fun)?;
                let mut params = self.params(true)?;
                self.expect(Tok::Arrow)?;
                let mut body = self.expr()?;
                let first = params.remove(0);
                if !params.is_empty() {
                    body = Expr { span: body.span, kind: ExprKind::Fun(params, Box::new(body)) };
                }
                Ok(self.mk(ExprKind::Fix(f, first, Box::new(body)), start))
            }
            _ => self.cons_expr(),
        }
    }

    fn let_head(&mut self) -> PResult<LetHead> {
        let start = self.expect(Tok::Let)?;
        let rec = self.eat(&Tok::Rec);
        let name = self.ident()?;
        let params = self.params(false)?;
        let ann = if self.eat(&Tok::Colon) { Some(self.scheme()?) } else { None };
        self.expect(Tok::Equals)?;
        let bound = self.expr()?;
        Ok(LetHead { rec, name, params, ann, bound, span: start.join(self.prev_span()) })
    }

    fn params(&mut self, nonempty: bool) -> PResult<Vec<Param>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::Ident(_) => out.push(Param { name: self.ident()?, ann: None }),
                Tok::LParen => {
                    self.bump();
                    if self.eat(&Tok::RParen) {
                        out.push(Param { name: Name::new("_"), ann: Some(TypeExpr::Base(BaseType::Unit)) });
                        continue;
                    }
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let ann = self.ty()?;
                    self.expect(Tok::RParen)?;
                    out.push(Param { name, ann: Some(ann) });
                }
                _ => break,
            }
        }
        if nonempty && out.is_empty() {
            return Err(self.error("a parameter"));
        }
        Ok(out)
    }

    fn handle(&mut self) -> PResult<Expr> {
        let start = self.expect(Tok::Handle)?;
        let body = self.expr()?;
        self.expect(Tok::With)?;
        self.eat(&Tok::Bar);
        let mut clauses = vec![self.clause()?];
        while self.eat(&Tok::Bar) {
            clauses.push(self.clause()?);
        }
        Ok(self.mk(ExprKind::Handle(Box::new(body), clauses), start))
    }

    fn clause(&mut self) -> PResult<Clause> {
        let start = self.span();
        if self.eat(&Tok::Return) {
            let var = self.ident()?;
            self.expect(Tok::Arrow)?;
            let body = self.expr()?;
            return Ok(Clause::Return { var, body, span: start.join(self.prev_span()) });
        }
        let op = self.ident()?;
        let (param, cont) = if self.eat(&Tok::LParen) {
            if self.eat(&Tok::RParen) {
                (Name::new("_"), None)
            } else {
                let p = self.ident()?;
                let k = if self.eat(&Tok::Comma) { Some(self.ident()?) } else { None };
                self.expect(Tok::RParen)?;
                (p, k)
            }
        } else {
            (self.ident()?, None)
        };
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        Ok(Clause::Op { op, param, cont, body, span: start.join(self.prev_span()) })
    }

    fn case(&mut self) -> PResult<Expr> {
        enum Branch {
            Inl(Name, Expr),
            Inr(Name, Expr),
            Nil(Expr),
            Cons(ConsPat, Expr),
        }
        let start = self.expect(Tok::Case)?;
        let scrut = self.expr()?;
        self.expect(Tok::Of)?;
        self.eat(&Tok::Bar);
        let branch = |p: &mut Self| -> PResult<(Branch, Span)> {
            let at = p.span();
            let b = match p.peek().clone() {
                Tok::Inl | Tok::Inr => {
                    let left = p.bump().tok == Tok::Inl;
                    let x = p.ident()?;
                    p.expect(Tok::Arrow)?;
                    let e = p.expr()?;
                    if left {
                        Branch::Inl(x, e)
                    } else {
                        Branch::Inr(x, e)
                    }
                }
                Tok::Nil | Tok::LBracket => {
                    if p.bump().tok == Tok::LBracket {
                        p.expect(Tok::RBracket)?;
                    }
                    p.expect(Tok::Arrow)?;
                    Branch::Nil(p.expr()?)
                }
                Tok::Cons => {
                    p.bump();
                    let pat = if p.eat(&Tok::LParen) {
                        let h = p.ident()?;
                        p.expect(Tok::Comma)?;
                        let t = p.ident()?;
                        p.expect(Tok::RParen)?;
                        ConsPat::Split(h, t)
                    } else {
                        ConsPat::Var(p.ident()?)
                    };
                    p.expect(Tok::Arrow)?;
                    Branch::Cons(pat, p.expr()?)
                }
                Tok::Ident(_) => {
                    let h = p.ident()?;
                    p.expect(Tok::ColonColon)?;
                    let t = p.ident()?;
                    p.expect(Tok::Arrow)?;
                    Branch::Cons(ConsPat::Split(h, t), p.expr()?)
                }
                _ => return Err(p.error("a case pattern")),
            };
            Ok((b, at))
        };
        let (b1, _) = branch(self)?;
        self.expect(Tok::Bar)?;
        let (b2, at2) = branch(self)?;
        let scrut = Box::new(scrut);
        let kind = match (b1, b2) {
            (Branch::Inl(x, l), Branch::Inr(y, r)) | (Branch::Inr(y, r), Branch::Inl(x, l)) => {
                ExprKind::CaseSum { scrut, left: (x, Box::new(l)), right: (y, Box::new(r)) }
            }
            (Branch::Nil(n), Branch::Cons(p, c)) | (Branch::Cons(p, c), Branch::Nil(n)) => {
                ExprKind::CaseList { scrut, nil: Box::new(n), cons: (p, Box::new(c)) }
            }
            _ => {
                return Err(Diagnostic::error(
                    at2,
                    "case branches must be `inl`/`inr` or `nil`/`cons`, one of each",
                ))
            }
        };
        Ok(self.mk(kind, start))
    }

    /// Right operand of an infix operator; an open form may appear here.
    fn operand(&mut self, level: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        if is_open(self.peek()) {
            self.expr()
        } else {
            level(self)
        }
    }

    fn cons_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let head = self.cmp_expr()?;
        if self.eat(&Tok::ColonColon) {
            let tail = self.expr()?;
            let pair = self.mk(ExprKind::Pair(Box::new(head), Box::new(tail)), start);
            return Ok(self.mk(ExprKind::Cons(Box::new(pair)), start));
        }
        Ok(head)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let l = self.add_expr()?;
        match binop(self.peek()) {
            Some(p @ (Prim::Eq | Prim::Lt | Prim::Gt)) => {
                self.bump();
                let r = self.operand(Self::add_expr)?;
                Ok(self.mk(ExprKind::BinOp(p, Box::new(l), Box::new(r)), start))
            }
            _ => Ok(l),
        }
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut l = self.mul_expr()?;
        while let Some(p @ (Prim::Add | Prim::Sub)) = binop(self.peek()) {
            self.bump();
            let r = self.operand(Self::mul_expr)?;
            l = self.mk(ExprKind::BinOp(p, Box::new(l), Box::new(r)), start);
        }
        Ok(l)
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut l = self.app_expr()?;
        while let Some(p @ (Prim::Mul | Prim::Mod)) = binop(self.peek()) {
            self.bump();
            let r = self.operand(Self::app_expr)?;
            l = self.mk(ExprKind::BinOp(p, Box::new(l), Box::new(r)), start);
        }
        Ok(l)
    }

    fn app_expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut head = match self.peek() {
            Tok::Inl | Tok::Inr | Tok::Cons | Tok::Fst | Tok::Snd => {
                let t = self.bump().tok;
                let a = Box::new(self.atom()?);
                let kind = match t {
                    Tok::Inl => ExprKind::Inl(a),
                    Tok::Inr => ExprKind::Inr(a),
                    Tok::Cons => ExprKind::Cons(a),
                    Tok::Fst => ExprKind::Fst(a),
                    _ => ExprKind::Snd(a),
                };
                self.mk(kind, start)
            }
            _ => self.atom()?,
        };
        while starts_atom(self.peek()) {
            let arg = self.atom()?;
            head = self.mk(ExprKind::App(Box::new(head), Box::new(arg)), start);
        }
        Ok(head)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                ExprKind::Var(Name::new(&s))
            }
            Tok::Int(n) => {
                self.bump();
                ExprKind::Const(Const::Int(n))
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Const(Const::str(&s))
            }
            Tok::True | Tok::False => ExprKind::Const(Const::Bool(self.bump().tok == Tok::True)),
            Tok::Not => self.prim(Prim::Not),
            Tok::Length => self.prim(Prim::Length),
            Tok::First => self.prim(Prim::First),
            Tok::Last => self.prim(Prim::Last),
            Tok::Nil => {
                self.bump();
                ExprKind::Nil
            }
            Tok::Resume => {
                self.bump();
                ExprKind::Resume
            }
            Tok::Hash => {
                self.bump();
                let op = self.ident()?;
                let open = self.expect(Tok::LParen)?;
                let arg = if self.peek() == &Tok::RParen {
                    Expr { kind: ExprKind::Const(Const::Unit), span: open }
                } else {
                    self.expr()?
                };
                self.expect(Tok::RParen)?;
                ExprKind::Op(op, Box::new(arg))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(self.mk(ExprKind::Const(Const::Unit), start));
                }
                if let (Some(p), Tok::RParen) = (binop(self.peek()), self.peek2()) {
                    self.bump();
                    self.bump();
                    return Ok(self.mk(ExprKind::Const(Const::Prim(p)), start));
                }
                if let (Tok::Minus, Tok::Int(n), Tok::RParen) =
                    (self.peek(), self.peek2().clone(), self.tok_at(self.pos + 2))
                {
                    self.bump();
                    self.bump();
                    self.bump();
                    return Ok(self.mk(ExprKind::Const(Const::Int(n.wrapping_neg())), start));
                }
                let first = self.expr()?;
                let mut rest = Vec::new();
                while self.eat(&Tok::Comma) {
                    rest.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                match rest.pop() {
                    None => return Ok(Expr { kind: first.kind, span: start.join(self.prev_span()) }),
                    Some(last) => {
                        let tail = rest.into_iter().rev().fold(last, |acc, e| {
                            let span = e.span.join(acc.span);
                            Expr { kind: ExprKind::Pair(Box::new(e), Box::new(acc)), span }
                        });
                        ExprKind::Pair(Box::new(first), Box::new(tail))
                    }
                }
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Tok::Semi) {
                            if self.eat(&Tok::RBracket) {
                                break;
                            }
                            continue;
                        }
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        return Err(self.error("`;` or `]`"));
                    }
                }
                ExprKind::List(items)
            }
            _ => return Err(self.error("an expression")),
        };
        Ok(self.mk(kind, start))
    }

    fn prim(&mut self, p: Prim) -> ExprKind {
        self.bump();
        ExprKind::Const(Const::Prim(p))
    }

    /// Requires that all input has been consumed.
    pub fn finish(&mut self) -> PResult<()> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(src: &str) -> Vec<Item> {
        Parser::new(src).unwrap().items().unwrap()
    }

    #[test]
    fn layout_splits_items() {
        let src = "effect fail : forall a. unit ~> a\nlet x = 1\n#fail()\n";
        let it = items(src);
        assert_eq!(it.len(), 3);
        assert!(matches!(it[0], Item::Effect(_)));
        assert!(matches!(it[1], Item::Let(_)));
        assert!(matches!(it[2], Item::Expr(_)));
    }

    #[test]
    fn continuation_lines_may_start_in_column_one() {
        let src = "let h = handle 1 with\n| return x -> x\nlet y = 2";
        assert_eq!(items(src).len(), 2);
        let src = "let f = 1 in\nlet g = f in\ng\nlet y = 2";
        assert_eq!(items(src).len(), 2);
    }

    #[test]
    fn mismatched_bracket_is_reported_at_the_bracket() {
        let src = "#select([1;2)";
        let err = Parser::new(src).unwrap().items().unwrap_err();
        assert_eq!(err.span.start, 12);
        assert!(err.message.contains("`;` or `]`"), "{}", err.message);
    }

    #[test]
    fn effect_arrow_types() {
        let mut p = Parser::new("forall a. a -{get_id}-> a * int list").unwrap();
        let s = p.scheme().unwrap();
        assert_eq!(s.vars, vec![Name::new("a")]);
        let TypeExpr::Arrow(_, cod, Some(eff)) = s.body else { panic!() };
        assert!(eff.contains("get_id"));
        assert!(matches!(*cod, TypeExpr::Prod(_, ref r) if matches!(**r, TypeExpr::List(_))));
    }
}
