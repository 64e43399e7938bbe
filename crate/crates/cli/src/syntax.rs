//! Tokenizer shared by the text formats.
//!
//! Names are bare identifiers (`[A-Za-z0-9_@$]+`) or double-quoted strings;
//! terminals are single-quoted. `#` starts a comment. Newlines are tokens
//! because every format is line oriented.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        SyntaxError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Double-quoted text.
    Quoted(String),
    /// Single-quoted text.
    Terminal(String),
    Punct(&'static str),
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "\"{s}\""),
            Tok::Terminal(s) => write!(f, "'{s}'"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCT: [&str; 15] = [
    ":=", "->", "|", "*", "+", ".", "(", ")", "{", "}", "<", ">", ":", ",", "=",
];

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '@' | '$')
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let lno = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                break;
            } else if c == '"' || c == '\'' {
                let (s, next) = quoted(&chars, i, lno)?;
                let tok = if c == '"' {
                    Tok::Quoted(s)
                } else {
                    Tok::Terminal(s)
                };
                out.push(Spanned { tok, line: lno, col });
                i = next;
            } else if is_ident_char(c) {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: lno,
                    col,
                });
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let p = PUNCT
                    .iter()
                    .find(|p| rest.starts_with(*p))
                    .ok_or_else(|| SyntaxError::new(lno, col, format!("unexpected character `{c}`")))?;
                out.push(Spanned {
                    tok: Tok::Punct(p),
                    line: lno,
                    col,
                });
                i += p.chars().count();
            }
        }
        out.push(Spanned {
            tok: Tok::Newline,
            line: lno,
            col: chars.len() + 1,
        });
    }
    let last = text.lines().count().max(1);
    out.push(Spanned {
        tok: Tok::Eof,
        line: last,
        col: 1,
    });
    Ok(out)
}

fn quoted(chars: &[char], start: usize, line: usize) -> Result<(String, usize), SyntaxError> {
    let q = chars[start];
    let mut s = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' if i + 1 < chars.len() => {
                s.push(chars[i + 1]);
                i += 2;
            }
            c if c == q => return Ok((s, i + 1)),
            c => {
                s.push(c);
                i += 1;
            }
        }
    }
    Err(SyntaxError::new(line, start + 1, "unterminated quote"))
}

/// Cursor over tokens with the helpers the parsers share.
pub struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let (l, c) = self.here();
        SyntaxError::new(l, c, msg)
    }

    pub fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn end_line(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    /// A bare or double-quoted name.
    pub fn name(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn terminal(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Terminal(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a quoted symbol")),
        }
    }
}

/// Renders a name bare when it lexes back as one identifier that is not a
/// keyword, and double-quoted otherwise.
pub fn render_name(s: &str, keywords: &[&str]) -> String {
    if !s.is_empty() && s.chars().all(is_ident_char) && !keywords.contains(&s) {
        s.to_string()
    } else {
        quote(s, '"')
    }
}

pub fn render_terminal(s: &str) -> String {
    quote(s, '\'')
}

pub fn quote(s: &str, q: char) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        if c == q || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(q);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("A := <c1> * \"x y\" # note\n  B -> 'a' . C").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("A".into()));
        assert_eq!(kinds[1], Tok::Punct(":="));
        assert_eq!(kinds[6], Tok::Quoted("x y".into()));
        assert_eq!(kinds[7], Tok::Newline);
        let b = &toks[8];
        assert_eq!((b.line, b.col), (2, 3));
        assert_eq!(kinds[10], Tok::Terminal("a".into()));
    }

    #[test]
    fn errors_carry_positions() {
        let e = tokenize("A := ~").unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
        let e = tokenize("\n 'abc").unwrap_err();
        assert_eq!((e.line, e.col), (2, 2));
    }

    #[test]
    fn quoting_round_trips() {
        for s in ["plain", "with space", "q\"uote", "back\\slash", "(b,0)", ""] {
            let r = render_name(s, &[]);
            let toks = tokenize(&r).unwrap();
            match &toks[0].tok {
                Tok::Ident(x) | Tok::Quoted(x) => assert_eq!(x, s),
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(render_name("eps", &["eps"]), "\"eps\"");
    }
}
