//! Initial-condition expressions: sums of `a*x^k`, `a*cos(b*pi*x)` and
//! `a*sin(b*pi*x)` terms.
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := sign? number? "*"? atom | sign? number
//! atom  := "x" ("^" int)? | ("cos" | "sin") "(" (number "*"?)? ("pi" | "π") "*"? "x" ")"
//! ```

use crd_core::{Profile, ProfileTerm};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct IcError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

pub fn parse_profile(text: &str) -> Result<Profile<f64>, IcError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0 };
    let mut terms = Vec::new();
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    terms.push(p.term(1.0)?);
    loop {
        p.skip_ws();
        let sign = match p.peek() {
            None => break,
            Some('+') => 1.0,
            Some('-') => -1.0,
            Some(c) => return Err(p.error(&format!("expected `+` or `-`, found `{c}`"))),
        };
        p.pos += 1;
        terms.push(p.term(sign)?);
    }
    Ok(Profile::new(terms))
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> IcError {
        IcError { column: self.pos + 1, message: message.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), IcError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let n = word.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(word.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<Option<f64>, IcError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Parser| {
            let s = p.pos;
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos > s
        };
        let mut any = digits(self);
        if self.peek() == Some('.') {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return Ok(None);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: f64 =
            text.parse().map_err(|_| IcError { column: start + 1, message: format!("bad number `{text}`") })?;
        if !value.is_finite() {
            return Err(IcError { column: start + 1, message: format!("non-finite number `{text}`") });
        }
        Ok(Some(value))
    }

    fn term(&mut self, outer_sign: f64) -> Result<ProfileTerm<f64>, IcError> {
        let mut sign = outer_sign;
        self.skip_ws();
        while let Some(c @ ('+' | '-')) = self.peek() {
            if c == '-' {
                sign = -sign;
            }
            self.pos += 1;
            self.skip_ws();
        }
        let coeff = self.number()?;
        let starred = coeff.is_some() && self.eat('*');
        let coeff = sign * coeff.unwrap_or(1.0);
        self.skip_ws();
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                let power = if self.eat('^') {
                    self.skip_ws();
                    let start = self.pos;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    let text: String = self.chars[start..self.pos].iter().collect();
                    text.parse::<u32>().map_err(|_| IcError {
                        column: start + 1,
                        message: "expected a non-negative integer exponent".into(),
                    })?
                } else {
                    1
                };
                Ok(ProfileTerm::Monomial { coeff, power })
            }
            Some('c' | 's') => {
                let cos = if self.eat_word("cos") {
                    true
                } else if self.eat_word("sin") {
                    false
                } else {
                    return Err(self.error("expected `x`, `cos` or `sin`"));
                };
                self.expect('(')?;
                let freq = match self.number()? {
                    Some(f) => {
                        self.eat('*');
                        f
                    }
                    None => 1.0,
                };
                if !(self.eat_word("pi") || self.eat_word("π")) {
                    return Err(self.error("expected `pi`"));
                }
                self.eat('*');
                self.expect('x')?;
                self.expect(')')?;
                Ok(if cos { ProfileTerm::Cos { coeff, freq } } else { ProfileTerm::Sin { coeff, freq } })
            }
            _ if starred => Err(self.error("expected `x`, `cos` or `sin` after `*`")),
            _ => {
                if self.at_end() || matches!(self.peek(), Some('+' | '-')) {
                    Ok(ProfileTerm::Monomial { coeff, power: 0 })
                } else {
                    Err(self.error("expected a number, `x`, `cos` or `sin`"))
                }
            }
        }
    }
}
