use std::fmt;

use super::diagnostic::{Diagnostic, DiagnosticKind, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    Version,
    Model,
    Exo,
    Var,
    Outcome,
    Utility,
    Default,
    Context,
    Case,
    When,
    Else,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Eq,
    NotEq,
    Arrow,
    LeftArrow,
    Amp,
    Pipe,
    Bang,
    Slash,
    Eof,
}

pub(crate) const KEYWORDS: &[&str] = &[
    "version", "model", "exo", "var", "outcome", "utility", "default", "context", "case", "when", "else",
];

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(v) => return write!(f, "integer `{v}`"),
            Tok::Version => "`version`",
            Tok::Model => "`model`",
            Tok::Exo => "`exo`",
            Tok::Var => "`var`",
            Tok::Outcome => "`outcome`",
            Tok::Utility => "`utility`",
            Tok::Default => "`default`",
            Tok::Context => "`context`",
            Tok::Case => "`case`",
            Tok::When => "`when`",
            Tok::Else => "`else`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Eq => "`=`",
            Tok::NotEq => "`!=`",
            Tok::Arrow => "`->`",
            Tok::LeftArrow => "`<-`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Bang => "`!`",
            Tok::Slash => "`/`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut c = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        while let Some(ch) = c.peek() {
            if ch.is_whitespace() {
                c.bump();
            } else if ch == '/' && c.peek2() == Some('/') {
                while c.peek().is_some_and(|ch| ch != '\n') {
                    c.bump();
                }
            } else {
                break;
            }
        }
        let mut span = c.here();
        let Some(ch) = c.bump() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = match ch {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '=' => Tok::Eq,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '/' => Tok::Slash,
            '!' if c.peek() == Some('=') => {
                c.bump();
                Tok::NotEq
            }
            '!' => Tok::Bang,
            '<' if c.peek() == Some('-') => {
                c.bump();
                Tok::LeftArrow
            }
            '-' if c.peek() == Some('>') => {
                c.bump();
                Tok::Arrow
            }
            '-' | '0'..='9' => {
                if ch == '-' && !c.peek().is_some_and(|d| d.is_ascii_digit()) {
                    span.end = c.pos;
                    let mut d = Diagnostic::new(DiagnosticKind::Lex, "`-` must start `->` or a negative integer", span);
                    d.found = Some("-".into());
                    d.expected = vec!["`->`".into(), "integer".into()];
                    return Err(d);
                }
                while c.peek().is_some_and(|d| d.is_ascii_digit()) {
                    c.bump();
                }
                let text = &src[span.start..c.pos];
                match text.parse::<i64>() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => {
                        span.end = c.pos;
                        let mut d = Diagnostic::new(DiagnosticKind::Lex, "integer literal does not fit in 64 bits", span);
                        d.found = Some(text.to_string());
                        return Err(d);
                    }
                }
            }
            ch if ch.is_ascii_alphabetic() || ch == '_' => {
                while c.peek().is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                    c.bump();
                }
                match &src[span.start..c.pos] {
                    "version" => Tok::Version,
                    "model" => Tok::Model,
                    "exo" => Tok::Exo,
                    "var" => Tok::Var,
                    "outcome" => Tok::Outcome,
                    "utility" => Tok::Utility,
                    "default" => Tok::Default,
                    "context" => Tok::Context,
                    "case" => Tok::Case,
                    "when" => Tok::When,
                    "else" => Tok::Else,
                    s => Tok::Ident(s.to_string()),
                }
            }
            other => {
                span.end = c.pos;
                let mut d = Diagnostic::new(DiagnosticKind::Lex, format!("unexpected character `{other}`"), span);
                d.found = Some(other.to_string());
                return Err(d);
            }
        };
        span.end = c.pos;
        out.push(Token { tok, span });
    }
}
