//! S-expression reader and pretty printer.
//!
//! `name[e]` is read as one indexed atom: brackets must follow the name
//! with no space and hold exactly one expression each.

use std::fmt;

use super::{DslError, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SexpKind {
    Atom(String),
    Int(i64),
    List(Vec<Sexp>),
    Indexed(String, Vec<Sexp>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub span: Span,
}

impl Sexp {
    pub fn atom(s: impl Into<String>) -> Sexp {
        Sexp {
            kind: SexpKind::Atom(s.into()),
            span: Span::default(),
        }
    }

    pub fn int(v: i64) -> Sexp {
        Sexp {
            kind: SexpKind::Int(v),
            span: Span::default(),
        }
    }

    pub fn list(items: Vec<Sexp>) -> Sexp {
        Sexp {
            kind: SexpKind::List(items),
            span: Span::default(),
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Renders with line breaks so that no line exceeds `width` where
    /// possible. Lists that fit stay on one line; otherwise the head and any
    /// leading atoms share the first line and the rest go one per line.
    pub fn pretty(&self, width: usize) -> String {
        let mut out = String::new();
        self.pretty_into(&mut out, 0, width);
        out
    }

    fn pretty_into(&self, out: &mut String, indent: usize, width: usize) {
        let flat = self.to_string();
        let items = match &self.kind {
            SexpKind::List(items) if indent + flat.len() > width && items.len() > 1 => items,
            _ => {
                out.push_str(&flat);
                return;
            }
        };
        out.push('(');
        let lead = items
            .iter()
            .take_while(|i| !matches!(i.kind, SexpKind::List(_)))
            .count()
            .max(1);
        for (n, it) in items[..lead].iter().enumerate() {
            if n > 0 {
                out.push(' ');
            }
            out.push_str(&it.to_string());
        }
        for it in &items[lead..] {
            out.push('\n');
            out.push_str(&" ".repeat(indent + 2));
            it.pretty_into(out, indent + 2, width);
        }
        out.push(')');
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Atom(a) => f.write_str(a),
            SexpKind::Int(v) => write!(f, "{v}"),
            SexpKind::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
            SexpKind::Indexed(name, ix) => {
                f.write_str(name)?;
                for i in ix {
                    write!(f, "[{i}]")?;
                }
                Ok(())
            }
        }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

fn is_delim(c: u8) -> bool {
    c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b'[' | b']' | b';')
}

impl<'a> Reader<'a> {
    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }

    fn err(&self, msg: impl Into<String>) -> DslError {
        DslError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) {
        if self.src[self.pos] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b';' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.bump();
                    }
                }
                c if c.is_ascii_whitespace() => self.bump(),
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, DslError> {
        self.skip_ws();
        let mut span = self.here();
        let Some(&c) = self.src.get(self.pos) else {
            return Err(self.err("unexpected end of input"));
        };
        let kind = match c {
            b'(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => return Err(self.err("unexpected end of input, missing `)`")),
                        Some(b')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
                SexpKind::List(items)
            }
            b')' => return Err(self.err("unbalanced `)`")),
            b'[' | b']' => return Err(self.err("index brackets must follow a name")),
            _ => {
                let start = self.pos;
                while self.pos < self.src.len() && !is_delim(self.src[self.pos]) {
                    self.bump();
                }
                let tok = &self.text[start..self.pos];
                if self.src.get(self.pos) == Some(&b'[') {
                    if tok.parse::<i64>().is_ok() {
                        return Err(self.err("an integer cannot be indexed"));
                    }
                    let mut ix = Vec::new();
                    while self.src.get(self.pos) == Some(&b'[') {
                        self.bump();
                        ix.push(self.read()?);
                        self.skip_ws();
                        if self.src.get(self.pos) != Some(&b']') {
                            return Err(self.err("expected `]`"));
                        }
                        self.bump();
                    }
                    SexpKind::Indexed(tok.to_string(), ix)
                } else if let Ok(v) = tok.parse::<i64>() {
                    SexpKind::Int(v)
                } else if tok.starts_with(|c: char| c.is_ascii_digit())
                    || (tok.len() > 1
                        && tok.starts_with(['-', '+'])
                        && tok[1..].starts_with(|c: char| c.is_ascii_digit()))
                {
                    return Err(DslError::Syntax {
                        line: span.line,
                        col: span.col,
                        msg: format!("malformed number `{tok}`"),
                    });
                } else {
                    SexpKind::Atom(tok.to_string())
                }
            }
        };
        span.end = self.pos;
        Ok(Sexp { kind, span })
    }
}

/// Reads every top-level form in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, DslError> {
    let mut r = Reader {
        src: text.as_bytes(),
        text,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_ws();
        if r.pos >= r.src.len() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_indexed_atoms() {
        let f = read_all("(v>= S[(- i 1)] -1) ; trailing comment\nx").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].to_string(), "(v>= S[(- i 1)] -1)");
        let SexpKind::List(items) = &f[0].kind else {
            panic!()
        };
        assert!(matches!(&items[1].kind, SexpKind::Indexed(n, ix) if n == "S" && ix.len() == 1));
        assert_eq!(items[2].kind, SexpKind::Int(-1));
        assert_eq!(f[1].span.line, 2);
    }

    #[test]
    fn reports_positions() {
        match read_all("(tell (= x").unwrap_err() {
            DslError::Syntax { line, col, msg } => {
                assert_eq!((line, col), (1, 11));
                assert!(msg.contains("end of input"));
            }
            e => panic!("{e}"),
        }
        assert!(read_all(")").is_err());
        assert!(read_all("S [1]").is_err());
        assert!(read_all("S[1").is_err());
        assert!(read_all("12abc").is_err());
    }

    #[test]
    fn pretty_breaks_long_lists() {
        let f = read_all("(defproc P (i) (par (tell (= x i)) (tell (= y i))))").unwrap();
        assert_eq!(f[0].pretty(100), f[0].to_string());
        let p = f[0].pretty(20);
        assert!(p.starts_with("(defproc P\n"), "{p}");
        let again = read_all(&p).unwrap();
        assert_eq!(again[0].to_string(), f[0].to_string());
    }
}
