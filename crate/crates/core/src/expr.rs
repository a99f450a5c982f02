//! Ratio expressions: `a*b^2/(c*d)` over named cluster variables.
//!
//! ```text
//! expr   := factor (('*' | '/') factor)*
//! factor := atom ('^' integer)?
//! atom   := name | '1' | '(' expr ')'
//! name   := ident ('[' ... ']')?
//! ```
//! Whitespace is ignored everywhere, including inside brackets.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedRatio {
    /// Exponent per registry id.
    pub vector: Vec<i64>,
    /// Factors in order of appearance with their signed exponents.
    pub factors: Vec<(usize, i64)>,
}

/// Parses `text`; `resolve` maps a whitespace-free name to a registry id.
pub fn parse_ratio(text: &str, len: usize, resolve: &dyn Fn(&str) -> Option<usize>) -> Result<ParsedRatio> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, resolve, factors: Vec::new() };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(Error::Parse { pos: 0, msg: "empty ratio".into() });
    }
    p.expr(1)?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    let mut vector = vec![0i64; len];
    for &(id, e) in &p.factors {
        if id >= len {
            return Err(Error::Contract(format!("name resolved to id {id} outside the registry")));
        }
        vector[id] = vector[id]
            .checked_add(e)
            .ok_or_else(|| Error::Parse { pos: 0, msg: "exponent overflow".into() })?;
    }
    Ok(ParsedRatio { vector, factors: p.factors })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
    factors: Vec<(usize, i64)>,
}

impl Parser<'_> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { pos: self.pos, msg }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self, sign: i64) -> Result<()> {
        self.factor(sign)?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.factor(sign)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.factor(-sign)?;
                }
                _ => return Ok(()),
            }
        }
    }

    fn factor(&mut self, sign: i64) -> Result<()> {
        let start = self.factors.len();
        self.atom(sign)?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.integer()?;
            for f in &mut self.factors[start..] {
                f.1 = f.1.checked_mul(e).ok_or_else(|| Error::Parse { pos: self.pos, msg: "exponent overflow".into() })?;
            }
        }
        Ok(())
    }

    fn atom(&mut self, sign: i64) -> Result<()> {
        match self.peek() {
            None => Err(self.err("expected a name".into())),
            Some(b'(') => {
                self.pos += 1;
                self.expr(sign)?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`".into()));
                }
                self.pos += 1;
                Ok(())
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(())
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let at = self.pos;
                let name = self.name()?;
                let id = (self.resolve)(&name).ok_or(Error::UnknownName { pos: at, name })?;
                self.factors.push((id, sign));
                Ok(())
            }
            Some(c) => Err(self.err(format!("unexpected `{}`", c as char))),
        }
    }

    fn name(&mut self) -> Result<String> {
        let mut out = String::new();
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                out.push(c as char);
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.peek() == Some(b'[') {
            let open = self.pos;
            while let Some(&c) = self.src.get(self.pos) {
                self.pos += 1;
                if !c.is_ascii_whitespace() {
                    out.push(c as char);
                }
                if c == b']' {
                    return Ok(out);
                }
            }
            return Err(Error::Parse { pos: open, msg: "unclosed `[`".into() });
        }
        Ok(out)
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let at = self.pos;
        let mut paren = false;
        if self.src.get(self.pos) == Some(&b'(') {
            paren = true;
            self.pos += 1;
            self.skip_ws();
        }
        let neg = self.src.get(self.pos) == Some(&b'-');
        if neg {
            self.pos += 1;
        }
        let digits_at = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if digits_at == self.pos {
            return Err(Error::Parse { pos: at, msg: "malformed exponent".into() });
        }
        let text = std::str::from_utf8(&self.src[digits_at..self.pos]).unwrap();
        let v: i64 = text.parse().map_err(|_| Error::Parse { pos: at, msg: "malformed exponent".into() })?;
        if paren {
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)`".into()));
            }
            self.pos += 1;
        }
        Ok(if neg { -v } else { v })
    }
}
