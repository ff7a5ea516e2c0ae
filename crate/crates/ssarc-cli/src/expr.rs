//! Coordinate expressions: rationals, `pi`, `sqrt`, `sin`/`cos`/`tan`,
//! `^`, the four operations and parentheses. Decimal literals are accepted
//! but mark the value inexact.

use anyhow::{anyhow, bail, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Value {
    pub v: f64,
    /// Built only from integers, `pi` and the grammar's exact operations.
    pub exact: bool,
}

impl Value {
    fn new(v: f64, exact: bool) -> Self {
        Self { v, exact }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

pub fn eval(src: &str) -> Result<Value> {
    let mut p = Parser {
        s: src.as_bytes(),
        i: 0,
    };
    let v = p.sum()?;
    p.ws();
    if p.i != p.s.len() {
        bail!("unexpected input at byte {} in {src:?}", p.i);
    }
    if !v.v.is_finite() {
        bail!("{src:?} is not finite");
    }
    Ok(v)
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Value> {
        let mut a = self.product()?;
        loop {
            if self.eat(b'+') {
                let b = self.product()?;
                a = Value::new(a.v + b.v, a.exact && b.exact);
            } else if self.eat(b'-') {
                let b = self.product()?;
                a = Value::new(a.v - b.v, a.exact && b.exact);
            } else {
                return Ok(a);
            }
        }
    }

    fn product(&mut self) -> Result<Value> {
        let mut a = self.unary()?;
        loop {
            if self.eat(b'*') {
                let b = self.unary()?;
                a = Value::new(a.v * b.v, a.exact && b.exact);
            } else if self.eat(b'/') {
                let b = self.unary()?;
                if b.v == 0.0 {
                    bail!("division by zero");
                }
                a = Value::new(a.v / b.v, a.exact && b.exact);
            } else {
                return Ok(a);
            }
        }
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat(b'-') {
            let a = self.unary()?;
            return Ok(Value::new(-a.v, a.exact));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.unary()?;
            if base.v < 0.0 && e.v.fract() != 0.0 {
                bail!("negative base with fractional exponent");
            }
            return Ok(Value::new(base.v.powf(e.v), base.exact && e.exact));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value> {
        self.ws();
        if self.eat(b'(') {
            let v = self.sum()?;
            if !self.eat(b')') {
                bail!("missing ')'");
            }
            return Ok(v);
        }
        let start = self.i;
        let c = *self
            .s
            .get(self.i)
            .ok_or_else(|| anyhow!("unexpected end of expression"))?;
        if c.is_ascii_digit() || c == b'.' {
            while self.i < self.s.len()
                && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.')
            {
                self.i += 1;
            }
            if self.i < self.s.len() && (self.s[self.i] == b'e' || self.s[self.i] == b'E') {
                self.i += 1;
                if self.i < self.s.len() && (self.s[self.i] == b'-' || self.s[self.i] == b'+') {
                    self.i += 1;
                }
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
            }
            let text = std::str::from_utf8(&self.s[start..self.i])?;
            let v: f64 = text.parse().map_err(|_| anyhow!("bad number {text:?}"))?;
            let exact = text.bytes().all(|b| b.is_ascii_digit());
            return Ok(Value::new(v, exact));
        }
        if c.is_ascii_alphabetic() {
            while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                self.i += 1;
            }
            let name = std::str::from_utf8(&self.s[start..self.i])?.to_ascii_lowercase();
            if name == "pi" {
                return Ok(Value::new(std::f64::consts::PI, true));
            }
            if !self.eat(b'(') {
                bail!("unknown name {name:?}");
            }
            let a = self.sum()?;
            if !self.eat(b')') {
                bail!("missing ')' after {name}");
            }
            let v = match name.as_str() {
                "sqrt" if a.v >= 0.0 => a.v.sqrt(),
                "sqrt" => bail!("sqrt of a negative number"),
                "sin" => a.v.sin(),
                "cos" => a.v.cos(),
                "tan" => a.v.tan(),
                _ => bail!("unknown function {name:?}"),
            };
            return Ok(Value::new(v, a.exact));
        }
        bail!("unexpected character {:?}", c as char)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let v = eval("1/2 + sqrt(3)/6").unwrap();
        assert!((v.v - (0.5 + 3f64.sqrt() / 6.0)).abs() < 1e-16 && v.exact);
        let v = eval("(1/2) * tan(pi/18)").unwrap();
        assert!((v.v - 0.5 * (std::f64::consts::PI / 18.0).tan()).abs() < 1e-16);
        let v = eval("(7/15)^(2000/2001)").unwrap();
        assert!((v.v - (7.0f64 / 15.0).powf(2000.0 / 2001.0)).abs() < 1e-16 && v.exact);
        assert!(!eval("0.25").unwrap().exact);
        assert_eq!(eval("-2^2").unwrap().v, -4.0);
        assert!(
            eval("1/0").is_err()
                && eval("foo").is_err()
                && eval("(1").is_err()
                && eval("2 3").is_err()
        );
    }
}
