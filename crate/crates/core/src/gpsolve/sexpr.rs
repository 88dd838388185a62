//! Text dump of a geometric program, one form per line:
//!
//! ```text
//! (vars 2)
//! (min (+ (* (exp 1.386) (^ z0 -1) (^ z1 -2))))
//! (st (<= (+ (* (exp 0) (^ z0 1))) 1))
//! ((= (* (exp 0) (^ z0 1) (^ z1 -1)) 1))
//! ```
//!
//! `(exp c)` holds the natural log of the coefficient. Floats use Rust's
//! shortest round-trip formatting, so `parse_gp(dump_gp(gp)) == gp`.

use std::fmt::Write;

use super::{GeometricProgram, GpError, Monomial, Posynomial};

const MAX_DEPTH: usize = 16;

fn write_mono(out: &mut String, m: &Monomial) {
    write!(out, "(* (exp {:?})", m.log_coeff).unwrap();
    for (v, e) in &m.exponents {
        write!(out, " (^ z{v} {e:?})").unwrap();
    }
    out.push(')');
}

fn write_posy(out: &mut String, p: &Posynomial) {
    out.push_str("(+");
    for m in &p.terms {
        out.push(' ');
        write_mono(out, m);
    }
    out.push(')');
}

pub fn dump_gp(gp: &GeometricProgram) -> String {
    let mut out = String::new();
    writeln!(out, "(vars {})", gp.nvars).unwrap();
    out.push_str("(min ");
    write_posy(&mut out, &gp.objective);
    out.push_str(")\n");
    for p in &gp.inequalities {
        out.push_str("(st (<= ");
        write_posy(&mut out, p);
        out.push_str(" 1))\n");
    }
    for q in &gp.equalities {
        out.push_str("((= ");
        write_mono(&mut out, q);
        out.push_str(" 1))\n");
    }
    out
}

#[derive(Debug)]
enum Sx<'a> {
    Atom(&'a str, usize),
    List(Vec<Sx<'a>>, usize),
}

impl<'a> Sx<'a> {
    fn pos(&self) -> usize {
        match self {
            Sx::Atom(_, p) | Sx::List(_, p) => *p,
        }
    }

    fn list(&self) -> Result<&[Sx<'a>], GpError> {
        match self {
            Sx::List(v, _) => Ok(v),
            Sx::Atom(_, p) => Err(err(*p, "expected a list")),
        }
    }

    fn atom(&self) -> Result<&'a str, GpError> {
        match self {
            Sx::Atom(a, _) => Ok(a),
            Sx::List(_, p) => Err(err(*p, "expected an atom")),
        }
    }

    fn is_atom(&self, s: &str) -> bool {
        matches!(self, Sx::Atom(a, _) if *a == s)
    }
}

fn err(pos: usize, msg: &str) -> GpError {
    GpError::Parse {
        pos,
        msg: msg.to_string(),
    }
}

struct Reader<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<u8> {
        self.s.as_bytes().get(self.pos).copied()
    }

    fn read(&mut self, depth: usize) -> Result<Sx<'a>, GpError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(err(start, "unexpected end of input")),
            Some(b')') => Err(err(start, "unexpected ')'")),
            Some(b'(') => {
                if depth >= MAX_DEPTH {
                    return Err(err(start, "nesting too deep"));
                }
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(err(start, "unclosed '('")),
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Sx::List(items, start));
                        }
                        _ => items.push(self.read(depth + 1)?),
                    }
                }
            }
            Some(_) => {
                let rest = &self.s[start..];
                let len = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                self.pos += len;
                Ok(Sx::Atom(&rest[..len], start))
            }
        }
    }
}

fn number(sx: &Sx) -> Result<f64, GpError> {
    let a = sx.atom()?;
    match a.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err(sx.pos(), "expected a finite number")),
    }
}

fn head<'s, 'a>(sx: &'s Sx<'a>, name: &str, arity: usize) -> Result<&'s [Sx<'a>], GpError> {
    let items = sx.list()?;
    if items.len() != arity + 1 || !items[0].is_atom(name) {
        return Err(err(sx.pos(), &format!("expected ({name} ...) with {arity} argument(s)")));
    }
    Ok(&items[1..])
}

fn mono(sx: &Sx, nvars: usize) -> Result<Monomial, GpError> {
    let items = sx.list()?;
    if items.len() < 2 || !items[0].is_atom("*") {
        return Err(err(sx.pos(), "expected (* (exp c) ...)"));
    }
    let log_coeff = number(&head(&items[1], "exp", 1)?[0])?;
    let mut exps = Vec::new();
    let mut last: Option<usize> = None;
    for f in &items[2..] {
        let args = head(f, "^", 2)?;
        let var = args[0].atom()?;
        let idx: usize = var
            .strip_prefix('z')
            .and_then(|d| d.parse().ok())
            .filter(|&i| i < nvars)
            .ok_or_else(|| err(args[0].pos(), "expected a variable z<i> in range"))?;
        if last.is_some_and(|l| idx <= l) {
            return Err(err(args[0].pos(), "variables must be strictly increasing"));
        }
        last = Some(idx);
        let e = number(&args[1])?;
        if e == 0.0 {
            return Err(err(args[1].pos(), "zero exponent"));
        }
        exps.push((idx, e));
    }
    Ok(Monomial::from_log(log_coeff, exps))
}

fn posy(sx: &Sx, nvars: usize) -> Result<Posynomial, GpError> {
    let items = sx.list()?;
    if items.len() < 2 || !items[0].is_atom("+") {
        return Err(err(sx.pos(), "expected (+ <monomial> ...)"));
    }
    Ok(Posynomial::new(
        items[1..].iter().map(|m| mono(m, nvars)).collect::<Result<_, _>>()?,
    ))
}

fn expect_one(sx: &Sx) -> Result<(), GpError> {
    if number(sx)? == 1.0 {
        Ok(())
    } else {
        Err(err(sx.pos(), "right-hand side must be 1"))
    }
}

/// Parses the output of [`dump_gp`].
pub fn parse_gp(text: &str) -> Result<GeometricProgram, GpError> {
    let mut r = Reader { s: text, pos: 0 };
    let mut forms = Vec::new();
    loop {
        r.skip_ws();
        if r.peek().is_none() {
            break;
        }
        forms.push(r.read(0)?);
    }
    let mut it = forms.iter();
    let vars = it.next().ok_or_else(|| err(0, "empty input"))?;
    let nvars: usize = head(vars, "vars", 1)?[0]
        .atom()?
        .parse()
        .map_err(|_| err(vars.pos(), "expected a variable count"))?;
    let obj = it.next().ok_or_else(|| err(text.len(), "missing (min ...)"))?;
    let objective = posy(&head(obj, "min", 1)?[0], nvars)?;
    let mut inequalities = Vec::new();
    let mut equalities = Vec::new();
    for f in it {
        let items = f.list()?;
        if items.first().is_some_and(|h| h.is_atom("st")) {
            if !equalities.is_empty() {
                return Err(err(f.pos(), "inequalities must precede equalities"));
            }
            let c = head(f, "st", 1)?;
            let args = head(&c[0], "<=", 2)?;
            expect_one(&args[1])?;
            inequalities.push(posy(&args[0], nvars)?);
        } else {
            if items.len() != 1 {
                return Err(err(f.pos(), "expected (st ...) or ((= ...))"));
            }
            let args = head(&items[0], "=", 2)?;
            expect_one(&args[1])?;
            equalities.push(mono(&args[0], nvars)?);
        }
    }
    Ok(GeometricProgram {
        nvars,
        objective,
        inequalities,
        equalities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GeometricProgram {
        GeometricProgram {
            nvars: 3,
            objective: Posynomial::new(vec![
                Monomial::from_log(1.0 / 3.0, [(0, -1.0), (2, -0.25)]),
                Monomial::from_log(-7.5e-300, [(1, 208.0 / 187.0)]),
            ]),
            inequalities: vec![Posynomial::single(Monomial::from_log(0.0, [(0, 1.0)]))],
            equalities: vec![Monomial::from_log(2.0f64.ln(), [(1, 1.0), (2, -1.0)])],
        }
    }

    #[test]
    fn round_trip() {
        let gp = sample();
        let text = dump_gp(&gp);
        assert_eq!(parse_gp(&text).unwrap(), gp);
    }

    #[test]
    fn dump_shape() {
        let text = dump_gp(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "(vars 3)");
        assert!(lines[1].starts_with("(min (+ (* (exp 0.3333333333333333) (^ z0 -1.0)"));
        assert_eq!(lines[2], "(st (<= (+ (* (exp 0.0) (^ z0 1.0))) 1))");
        assert!(lines[3].starts_with("((= (* (exp 0.69314"));
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "(vars 1)",
            "(vars 1) (min (+))",
            "(vars 1) (min (+ (* (exp 0) (^ z1 1))))",
            "(vars 1) (min (+ (* (exp nan))))",
            "(vars 1) (min (+ (* (exp 0))) ",
            "(vars 1) (min (+ (* (exp 0)))) (st (<= (+ (* (exp 0))) 2))",
            "(vars 2) (min (+ (* (exp 0) (^ z1 1) (^ z0 1))))",
            "((((((((((((((((((((((((((((((((((",
        ] {
            assert!(parse_gp(bad).is_err(), "{bad}");
        }
    }
}
