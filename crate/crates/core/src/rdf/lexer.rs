//! Tokenizer shared by the Turtle and SPARQL-subset parsers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn at(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { line: pos.line, column: pos.column, message: message.into() }
    }

    pub(crate) fn expected(tok: &Token, what: &str) -> Self {
        Self::at(tok.pos, format!("expected {what}, found {}", tok.kind))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    IriRef(String),
    PrefixedName { prefix: String, local: String },
    Blank(String),
    Str(String),
    LangTag(String),
    Directive(String),
    Integer(String),
    Decimal(String),
    Double(String),
    Var(String),
    Name(String),
    Punct(char),
    DoubleCaret,
    Eof,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::IriRef(i) => write!(f, "<{i}>"),
            Kind::PrefixedName { prefix, local } => write!(f, "`{prefix}:{local}`"),
            Kind::Blank(b) => write!(f, "`_:{b}`"),
            Kind::Str(_) => f.write_str("string literal"),
            Kind::LangTag(l) => write!(f, "`@{l}`"),
            Kind::Directive(d) => write!(f, "`@{d}`"),
            Kind::Integer(n) | Kind::Decimal(n) | Kind::Double(n) => write!(f, "number `{n}`"),
            Kind::Var(v) => write!(f, "`?{v}`"),
            Kind::Name(n) => write!(f, "`{n}`"),
            Kind::Punct(c) => write!(f, "`{c}`"),
            Kind::DoubleCaret => f.write_str("`^^`"),
            Kind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: Kind,
    pub pos: Pos,
}

pub(crate) struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    rest: &'a str,
    pos: Pos,
    variables: bool,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{00B7}')
}

impl<'a> Lexer<'a> {
    /// `variables` enables `?x` / `$x` tokens (SPARQL mode).
    pub(crate) fn tokenize(input: &'a str, variables: bool) -> Result<Vec<Token>, SyntaxError> {
        let mut lx = Lexer { chars: input.chars().peekable(), rest: input, pos: Pos { line: 1, column: 1 }, variables };
        let mut out = Vec::new();
        loop {
            let tok = lx.next_token()?;
            let eof = tok.kind == Kind::Eof;
            out.push(tok);
            if eof {
                return Ok(out);
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest.chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, SyntaxError> {
        self.skip_trivia();
        let pos = self.pos;
        let Some(c) = self.peek() else {
            return Ok(Token { kind: Kind::Eof, pos });
        };
        let kind = match c {
            '<' => self.iri_ref(pos)?,
            '"' | '\'' => Kind::Str(self.string(pos)?),
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                match word.as_str() {
                    "" => return Err(SyntaxError::at(pos, "expected language tag or directive after `@`")),
                    "prefix" | "base" => Kind::Directive(word),
                    _ => Kind::LangTag(word),
                }
            }
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(SyntaxError::at(pos, "expected `^^`"));
                }
                Kind::DoubleCaret
            }
            '_' if self.peek_nth(1) == Some(':') => {
                self.bump();
                self.bump();
                let label = self.take_name();
                if label.is_empty() {
                    return Err(SyntaxError::at(pos, "empty blank node label"));
                }
                Kind::Blank(label)
            }
            '?' | '$' if self.variables => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(SyntaxError::at(pos, "empty variable name"));
                }
                Kind::Var(name)
            }
            c if c.is_ascii_digit() => self.number(),
            '+' | '-' if self.peek_nth(1).is_some_and(|d| d.is_ascii_digit() || d == '.') => self.number(),
            '.' if self.peek_nth(1).is_some_and(|d| d.is_ascii_digit()) => self.number(),
            ':' => {
                self.bump();
                Kind::PrefixedName { prefix: String::new(), local: self.local_name(pos)? }
            }
            c if is_name_start(c) => {
                let word = self.take_name();
                if self.peek() == Some(':') {
                    self.bump();
                    Kind::PrefixedName { prefix: word, local: self.local_name(pos)? }
                } else {
                    Kind::Name(word)
                }
            }
            '.' | ';' | ',' | '{' | '}' | '(' | ')' | '[' | ']' | '=' | '*' => {
                self.bump();
                Kind::Punct(c)
            }
            other => return Err(SyntaxError::at(pos, format!("unexpected character `{other}`"))),
        };
        Ok(Token { kind, pos })
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// A name that may contain `.` but never ends with one.
    fn take_name(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c == '.' {
                if self.peek_nth(1).is_some_and(|n| is_name_char(n) && n != '.') {
                    s.push(c);
                    self.bump();
                    continue;
                }
                break;
            }
            if !is_name_char(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn local_name(&mut self, pos: Pos) -> Result<String, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => s.push(c),
                        _ => return Err(SyntaxError::at(pos, "invalid escape in local name")),
                    }
                }
                Some('%') => {
                    s.push('%');
                    self.bump();
                    for _ in 0..2 {
                        match self.bump() {
                            Some(h) if h.is_ascii_hexdigit() => s.push(h),
                            _ => return Err(SyntaxError::at(pos, "invalid percent escape in local name")),
                        }
                    }
                }
                Some('.') if self.peek_nth(1).is_some_and(|n| is_name_char(n) || n == ':' || n == '%' || n == '\\') => {
                    s.push('.');
                    self.bump();
                }
                Some(c) if c != '.' && (is_name_char(c) || c == ':') => {
                    s.push(c);
                    self.bump();
                }
                _ => return Ok(s),
            }
        }
    }

    fn iri_ref(&mut self, pos: Pos) -> Result<Kind, SyntaxError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(Kind::IriRef(s)),
                Some('\\') => s.push(self.unicode_escape(pos)?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(SyntaxError::at(pos, format!("invalid character `{}` in IRI", c.escape_default())))
                }
                Some(c) => s.push(c),
                None => return Err(SyntaxError::at(pos, "unterminated IRI")),
            }
        }
    }

    fn unicode_escape(&mut self, pos: Pos) -> Result<char, SyntaxError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(SyntaxError::at(pos, "invalid escape sequence")),
        };
        let mut hex = String::new();
        for _ in 0..width {
            match self.bump() {
                Some(h) if h.is_ascii_hexdigit() => hex.push(h),
                _ => return Err(SyntaxError::at(pos, "invalid unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| SyntaxError::at(pos, "invalid unicode code point"))
    }

    fn string(&mut self, pos: Pos) -> Result<String, SyntaxError> {
        let quote = self.bump().expect("caller peeked a quote");
        let long = self.peek() == Some(quote) && self.peek_nth(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        } else if self.peek() == Some(quote) {
            self.bump();
            return Ok(String::new());
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(SyntaxError::at(pos, "unterminated string literal")),
                Some(c) if c == quote => {
                    if !long {
                        return Ok(s);
                    }
                    if self.peek() == Some(quote) && self.peek_nth(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        // quotes directly before the closing delimiter belong to the content
                        while self.peek() == Some(quote) {
                            s.push(quote);
                            self.bump();
                        }
                        return Ok(s);
                    }
                    s.push(c);
                }
                Some('\n') | Some('\r') if !long => {
                    return Err(SyntaxError::at(pos, "newline in short string literal"))
                }
                Some('\\') => {
                    let esc = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            s.push(self.unicode_escape(pos)?);
                            continue;
                        }
                        _ => return Err(SyntaxError::at(self.pos, "invalid string escape")),
                    };
                    self.bump();
                    s.push(esc);
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self) -> Kind {
        let mut s = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            s.push(sign);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut decimal = false;
        if self.peek() == Some('.') && self.peek_nth(1).is_some_and(|c| c.is_ascii_digit()) {
            decimal = true;
            s.push('.');
            self.bump();
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        let exp_digits = match (self.peek(), self.peek_nth(1), self.peek_nth(2)) {
            (Some('e' | 'E'), Some(d), _) if d.is_ascii_digit() => true,
            (Some('e' | 'E'), Some('+' | '-'), Some(d)) if d.is_ascii_digit() => true,
            _ => false,
        };
        if exp_digits {
            s.push(self.bump().expect("peeked"));
            if let Some(sign @ ('+' | '-')) = self.peek() {
                s.push(sign);
                self.bump();
            }
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            return Kind::Double(s);
        }
        if decimal {
            Kind::Decimal(s)
        } else {
            Kind::Integer(s)
        }
    }
}

/// Cursor over a token vector with helpers for recursive descent.
pub(crate) struct Tokens {
    toks: Vec<Token>,
    at: usize,
}

impl Tokens {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Tokens { toks, at: 0 }
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat_punct(&mut self, c: char) -> bool {
        if self.peek().kind == Kind::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_punct(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(SyntaxError::expected(self.peek(), &format!("`{c}`")))
        }
    }

    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        match &self.peek().kind {
            Kind::Name(n) if n.eq_ignore_ascii_case(kw) => {
                self.next();
                true
            }
            _ => false,
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.peek().kind == Kind::Eof
    }
}
