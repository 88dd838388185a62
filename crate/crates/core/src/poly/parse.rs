//! Text grammar:
//!
//! ```text
//! expression := [sign] term (('+'|'-') term)*
//! term       := coeff | coeff '*' powprod | powprod
//! powprod    := pow ('*' pow)*
//! pow        := 'x' INT ('^' INT)?
//! coeff      := INT | INT '/' INT | INT '.' INT
//! ```
//!
//! Whitespace between tokens is ignored. Error positions are byte offsets.

use num_bigint::BigInt;
use num_traits::{Num, Zero};

use super::{Exponent, PolyError, Polynomial};
use crate::Rational;

/// Parses `text` into a canonical polynomial in `nvars` variables.
pub fn parse_polynomial(text: &str, nvars: usize) -> Result<Polynomial, PolyError> {
    let mut poly = Polynomial::zero(nvars)?;
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        nvars,
    };
    p.skip_ws();
    let mut negative = match p.peek() {
        Some(b'-') => {
            p.pos += 1;
            true
        }
        Some(b'+') => {
            p.pos += 1;
            false
        }
        _ => false,
    };
    loop {
        let (e, mut c) = p.term()?;
        if negative {
            c = -c;
        }
        poly.add_term(e, c);
        p.skip_ws();
        negative = match p.peek() {
            None => break,
            Some(b'+') => false,
            Some(b'-') => true,
            Some(_) => return Err(p.syntax("expected '+', '-' or end of input")),
        };
        p.pos += 1;
    }
    Ok(poly)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn syntax(&self, msg: &str) -> PolyError {
        PolyError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            // ASCII digits only, always valid UTF-8
            let s: &'a [u8] = self.s;
            std::str::from_utf8(&s[start..self.pos]).ok()
        }
    }

    fn term(&mut self) -> Result<(Exponent, Rational), PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let coeff = self.coeff()?;
                self.skip_ws();
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    Ok((self.powprod()?, coeff))
                } else {
                    Ok((Exponent::zero(self.nvars), coeff))
                }
            }
            Some(b'x') => Ok((self.powprod()?, Rational::from_integer(1.into()))),
            _ => Err(self.syntax("expected a coefficient or a variable")),
        }
    }

    fn coeff(&mut self) -> Result<Rational, PolyError> {
        let int = BigInt::from_str_radix(self.digits().unwrap_or("0"), 10)
            .map_err(|_| self.syntax("malformed integer"))?;
        self.skip_ws();
        match self.peek() {
            Some(b'/') => {
                self.pos += 1;
                self.skip_ws();
                let at = self.pos;
                let den = self
                    .digits()
                    .ok_or_else(|| self.syntax("expected denominator"))?;
                let den = BigInt::from_str_radix(den, 10)
                    .map_err(|_| self.syntax("malformed integer"))?;
                if den.is_zero() {
                    return Err(PolyError::Syntax {
                        pos: at,
                        msg: "zero denominator".into(),
                    });
                }
                Ok(Rational::new(int, den))
            }
            Some(b'.') => {
                self.pos += 1;
                let frac = self
                    .digits()
                    .ok_or_else(|| self.syntax("expected digits after decimal point"))?;
                let scale = BigInt::from(10u32).pow(frac.len() as u32);
                let frac = BigInt::from_str_radix(frac, 10)
                    .map_err(|_| self.syntax("malformed decimal"))?;
                Ok(Rational::new(int * &scale + frac, scale))
            }
            _ => Ok(Rational::from_integer(int)),
        }
    }

    fn powprod(&mut self) -> Result<Exponent, PolyError> {
        let mut e = vec![0u32; self.nvars];
        loop {
            self.skip_ws();
            let at = self.pos;
            let (var, k) = self.pow()?;
            e[var] = e[var]
                .checked_add(k)
                .ok_or(PolyError::ExponentOverflow { pos: at })?;
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok(Exponent(e));
            }
        }
    }

    fn pow(&mut self) -> Result<(usize, u32), PolyError> {
        if self.peek() != Some(b'x') {
            return Err(self.syntax("expected variable 'x<i>'"));
        }
        let start = self.pos;
        self.pos += 1;
        let idx = self
            .digits()
            .ok_or_else(|| self.syntax("expected variable index"))?;
        let index: u64 = idx.parse().unwrap_or(u64::MAX);
        if index == 0 || index > self.nvars as u64 {
            return Err(PolyError::VariableOutOfRange {
                pos: start,
                index,
                nvars: self.nvars,
            });
        }
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok((index as usize - 1, 1));
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        if self.peek() == Some(b'-') {
            return Err(PolyError::NegativeExponent { pos: at });
        }
        let digits = self
            .digits()
            .ok_or_else(|| self.syntax("expected exponent"))?;
        let k: u32 = digits
            .parse()
            .map_err(|_| PolyError::ExponentOverflow { pos: at })?;
        if matches!(self.peek(), Some(b'.' | b'/')) {
            return Err(PolyError::NonIntegerExponent { pos: at });
        }
        Ok((index as usize - 1, k))
    }
}
