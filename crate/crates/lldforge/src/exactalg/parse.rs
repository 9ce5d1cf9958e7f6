//! Scalar text syntax: integers, `a/b`, and `+ - * / ^` expressions over the
//! declared variables with parentheses.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::field::Field;
use super::scalar::Scalar;
use crate::error::{Error, Result};

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    field: &'a Field,
}

fn err(col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line: 0, col: col + 1, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Scalar> {
        self.skip_ws();
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.checked_add(&t)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.checked_sub(&t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let t = self.unary()?;
                    acc = acc.checked_mul(&t)?;
                }
                Some(b'/') => {
                    let at = self.pos;
                    self.pos += 1;
                    let t = self.unary()?;
                    acc = acc.checked_div(&t).map_err(|_| err(at, "division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Scalar> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
            let e: u32 = txt.parse().map_err(|_| err(start, "expected exponent"))?;
            if e > 64 {
                return Err(err(start, "exponent too large"));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Scalar> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(err(self.pos, "expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                let n: BigInt = txt.parse().map_err(|_| err(start, "bad integer"))?;
                self.field.embed(&Scalar::Q(BigRational::from_integer(n))).map_err(|_| err(start, "bad integer"))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match self.field.var_index(name) {
                    Some(i) => Ok(self.field.var(i)),
                    None => Err(err(start, format!("unknown variable {name}"))),
                }
            }
            Some(c) => Err(err(start, format!("unexpected character {:?}", c as char))),
            None => Err(err(start, "unexpected end of input")),
        }
    }
}

/// Parses one scalar token in `field`.
pub fn parse_scalar(text: &str, field: &Field) -> Result<Scalar> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, field };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(err(p.pos, "trailing input"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::BaseField;

    #[test]
    fn rationals_and_residues() {
        assert_eq!(parse_scalar("2/3", &Field::Q).unwrap(), Scalar::rational(2, 3));
        assert_eq!(parse_scalar("-1", &Field::Fp(5)).unwrap(), Field::Fp(5).from_i64(4));
        assert_eq!(parse_scalar("12", &Field::Fp(5)).unwrap(), Field::Fp(5).from_i64(2));
    }

    #[test]
    fn char2_fraction_sum() {
        let f = Field::function_field(BaseField::Fp(2), &["t1", "t2"]).unwrap();
        let a = parse_scalar("t1/(t1+t2)", &f).unwrap();
        let b = parse_scalar("(t2)/(t1+t2)", &f).unwrap();
        assert_eq!(a + b, f.one());
    }

    #[test]
    fn roundtrip_display() {
        let f = Field::function_field(BaseField::Q, &["a", "b"]).unwrap();
        for s in ["a^2-3*b+1/2", "(a+b)/(a-b)", "-a*b^3", "(1/3)*a"] {
            let v = parse_scalar(s, &f).unwrap();
            assert_eq!(parse_scalar(&v.to_string(), &f).unwrap(), v, "{s}");
        }
    }

    #[test]
    fn errors_carry_columns() {
        let f = Field::Q;
        match parse_scalar("1+x", &f) {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_scalar("1/0", &f).is_err());
    }
}
