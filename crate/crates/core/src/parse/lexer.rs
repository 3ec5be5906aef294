use crate::diagnostic::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Effect,
    Handle,
    With,
    Return,
    Resume,
    Let,
    Rec,
    In,
    Fun,
    If,
    Then,
    Else,
    Case,
    Of,
    Inl,
    Inr,
    Nil,
    Cons,
    Forall,
    Fix,
    Fst,
    Snd,
    True,
    False,
    Not,
    Length,
    First,
    Last,
    Mod,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    SemiSemi,
    Colon,
    ColonColon,
    Dot,
    Bar,
    Arrow,
    SigArrow,
    EffOpen,
    EffClose,
    Hash,
    Plus,
    Minus,
    Star,
    Equals,
    Less,
    Greater,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::Effect => "effect",
            Tok::Handle => "handle",
            Tok::With => "with",
            Tok::Return => "return",
            Tok::Resume => "resume",
            Tok::Let => "let",
            Tok::Rec => "rec",
            Tok::In => "in",
            Tok::Fun => "fun",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Case => "case",
            Tok::Of => "of",
            Tok::Inl => "inl",
            Tok::Inr => "inr",
            Tok::Nil => "nil",
            Tok::Cons => "cons",
            Tok::Forall => "forall",
            Tok::Fix => "fix",
            Tok::Fst => "fst",
            Tok::Snd => "snd",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Not => "not",
            Tok::Length => "length",
            Tok::First => "first",
            Tok::Last => "last",
            Tok::Mod => "mod",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::SemiSemi => ";;",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Dot => ".",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::SigArrow => "~>",
            Tok::EffOpen => "-{",
            Tok::EffClose => "}->",
            Tok::Hash => "#",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Equals => "=",
            Tok::Less => "<",
            Tok::Greater => ">",
            Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) | Tok::Eof => "",
        }
    }
}

pub const KEYWORDS: &[(&str, Tok)] = &[
    ("effect", Tok::Effect),
    ("handle", Tok::Handle),
    ("with", Tok::With),
    ("return", Tok::Return),
    ("resume", Tok::Resume),
    ("let", Tok::Let),
    ("rec", Tok::Rec),
    ("in", Tok::In),
    ("fun", Tok::Fun),
    ("if", Tok::If),
    ("then", Tok::Then),
    ("else", Tok::Else),
    ("case", Tok::Case),
    ("of", Tok::Of),
    ("inl", Tok::Inl),
    ("inr", Tok::Inr),
    ("nil", Tok::Nil),
    ("cons", Tok::Cons),
    ("forall", Tok::Forall),
    ("fix", Tok::Fix),
    ("fst", Tok::Fst),
    ("snd", Tok::Snd),
    ("true", Tok::True),
    ("false", Tok::False),
    ("not", Tok::Not),
    ("length", Tok::Length),
    ("first", Tok::First),
    ("last", Tok::Last),
    ("mod", Tok::Mod),
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|(k, _)| *k == s)
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |start: usize, end: usize, msg: String| Diagnostic::error(Span::new(src, start, end), msg);
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("(*") {
            let mut depth = 0usize;
            loop {
                if i >= bytes.len() {
                    return Err(err(start, start + 2, "unterminated block comment".into()));
                }
                if src[i..].starts_with("(*") {
                    depth += 1;
                    i += 2;
                } else if src[i..].starts_with("*)") {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += 1;
                }
            }
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        if ch.is_alphabetic() || ch == '_' {
            let end = src[i..]
                .char_indices()
                .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '\''))
                .map_or(src.len(), |(j, _)| i + j);
            let word = &src[i..end];
            let tok = KEYWORDS
                .iter()
                .find(|(k, _)| *k == word)
                .map_or_else(|| Tok::Ident(word.to_string()), |(_, t)| t.clone());
            out.push(Token { tok, span: Span::new(src, start, end) });
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: i64 = src[start..i]
                .parse()
                .map_err(|_| err(start, i, format!("integer literal `{}` out of range", &src[start..i])))?;
            out.push(Token { tok: Tok::Int(n), span: Span::new(src, start, i) });
            continue;
        }
        if c == b'"' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(err(start, i, "unterminated string literal".into()));
                };
                i += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(e) = src[i..].chars().next() else {
                            return Err(err(start, i, "unterminated string literal".into()));
                        };
                        i += e.len_utf8();
                        match e {
                            'n' => s.push('\n'),
                            't' => s.push('\t'),
                            'r' => s.push('\r'),
                            '0' => s.push('\0'),
                            '\\' => s.push('\\'),
                            '"' => s.push('"'),
                            'u' => {
                                let rest = &src[i..];
                                let close = rest.find('}');
                                let decoded = close
                                    .filter(|_| rest.starts_with('{'))
                                    .and_then(|j| u32::from_str_radix(&rest[1..j], 16).ok().map(|v| (j, v)))
                                    .and_then(|(j, v)| char::from_u32(v).map(|c| (j, c)));
                                match decoded {
                                    Some((j, c)) => {
                                        s.push(c);
                                        i += j + 1;
                                    }
                                    None => return Err(err(i - 2, i, "malformed unicode escape".into())),
                                }
                            }
                            other => {
                                return Err(err(i - 1 - other.len_utf8(), i, format!("unknown escape `\\{other}`")))
                            }
                        }
                    }
                    other => s.push(other),
                }
            }
            out.push(Token { tok: Tok::Str(s), span: Span::new(src, start, i) });
            continue;
        }
        let rest = &src[i..];
        let (tok, len) = if rest.starts_with("}->") {
            (Tok::EffClose, 3)
        } else if rest.starts_with("-{") {
            (Tok::EffOpen, 2)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("~>") {
            (Tok::SigArrow, 2)
        } else if rest.starts_with("::") {
            (Tok::ColonColon, 2)
        } else if rest.starts_with(";;") {
            (Tok::SemiSemi, 2)
        } else {
            let t = match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b',' => Tok::Comma,
                b';' => Tok::Semi,
                b':' => Tok::Colon,
                b'.' => Tok::Dot,
                b'|' => Tok::Bar,
                b'#' => Tok::Hash,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'=' => Tok::Equals,
                b'<' => Tok::Less,
                b'>' => Tok::Greater,
                _ => {
                    return Err(err(start, start + ch.len_utf8(), format!("unexpected character `{ch}`")));
                }
            };
            (t, 1)
        };
        i += len;
        out.push(Token { tok, span: Span::new(src, start, i) });
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(src, src.len(), src.len()) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_effect_arrows() {
        assert_eq!(
            toks("a -{get_id, select}-> b ~> c -> d"),
            vec![
                Tok::Ident("a".into()),
                Tok::EffOpen,
                Tok::Ident("get_id".into()),
                Tok::Comma,
                Tok::Ident("select".into()),
                Tok::EffClose,
                Tok::Ident("b".into()),
                Tok::SigArrow,
                Tok::Ident("c".into()),
                Tok::Arrow,
                Tok::Ident("d".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("1 -- two\n(* three (* nested *) *) 4"), vec![Tok::Int(1), Tok::Int(4), Tok::Eof]);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#""a\n\"b\u{e9}""#), vec![Tok::Str("a\n\"bé".into()), Tok::Eof]);
    }

    #[test]
    fn errors_carry_spans() {
        let e = lex("let x = 1 in\n  x $ 2").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (2, 5));
        assert!(lex("\"abc").is_err());
        assert!(lex("(* open").is_err());
    }
}
