//! Polynomials in the n^2 matrix entries X_{r,s}, evaluable at any complex
//! n x n matrix, with a small textual grammar:
//!
//! ```text
//! expr   := [sign] term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ["^" uint]
//! atom   := number ["i"] | "i" | "det" | "X" digit digit | "(" expr ")"
//! ```
//!
//! Printing is canonical (monomials in exponent-key order, shortest f64
//! literals), and parse(print(p)) == p exactly.

use crate::error::{Error, Result};
use crate::{CMatrix, C64};
use std::collections::BTreeMap;
use std::fmt;

/// A polynomial mu in the entries of an n x n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    n: usize,
    /// exponent matrix (row-major, length n^2) -> coefficient; no zeros kept
    monomials: BTreeMap<Vec<u32>, C64>,
}

impl MatrixPolynomial {
    pub fn zero(n: usize) -> Self {
        MatrixPolynomial {
            n,
            monomials: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        let mut p = Self::zero(n);
        if c != C64::new(0.0, 0.0) {
            p.monomials.insert(vec![0; n * n], c);
        }
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, C64::new(1.0, 0.0))
    }

    /// The single variable X_{r,s} (0-indexed).
    pub fn variable(n: usize, r: usize, s: usize) -> Result<Self> {
        if r >= n || s >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.max(s) + 1,
                context: "matrix entry index out of range".into(),
            });
        }
        let mut exps = vec![0u32; n * n];
        exps[r * n + s] = 1;
        let mut p = Self::zero(n);
        p.monomials.insert(exps, C64::new(1.0, 0.0));
        Ok(p)
    }

    /// The determinant polynomial, expanded over permutations.
    pub fn determinant(n: usize) -> Self {
        let mut p = Self::zero(n);
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let mut exps = vec![0u32; n * n];
            for (r, &c) in perm.iter().enumerate() {
                exps[r * n + c] += 1;
            }
            let sign = permutation_sign(&perm);
            let entry = p
                .monomials
                .entry(exps)
                .or_insert_with(|| C64::new(0.0, 0.0));
            *entry += C64::new(sign as f64, 0.0);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        p.prune();
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Largest total exponent.
    pub fn degree(&self) -> usize {
        self.monomials
            .keys()
            .map(|e| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn monomials(&self) -> &BTreeMap<Vec<u32>, C64> {
        &self.monomials
    }

    fn prune(&mut self) {
        self.monomials.retain(|_, c| *c != C64::new(0.0, 0.0));
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (exps, coeff) in &other.monomials {
            let entry = out
                .monomials
                .entry(exps.clone())
                .or_insert_with(|| C64::new(0.0, 0.0));
            *entry += coeff;
        }
        out.prune();
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for coeff in out.monomials.values_mut() {
            *coeff *= c;
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.monomials {
            for (eb, cb) in &other.monomials {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out
                    .monomials
                    .entry(exps)
                    .or_insert_with(|| C64::new(0.0, 0.0));
                *entry += ca * cb;
            }
        }
        out.prune();
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.n);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Evaluates at a complex matrix.
    pub fn eval(&self, m: &CMatrix) -> C64 {
        debug_assert_eq!(m.nrows(), self.n);
        let mut total = C64::new(0.0, 0.0);
        for (exps, coeff) in &self.monomials {
            let mut term = *coeff;
            for (idx, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term *= m[(idx / self.n, idx % self.n)].powi(e as i32);
                }
            }
            total += term;
        }
        total
    }
}

fn permutation_sign(perm: &[usize]) -> i64 {
    let mut sign = 1i64;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

fn format_coefficient(c: C64) -> (bool, String) {
    // returns (negate_printed_sign, body); body never starts with '-'
    if c.im == 0.0 {
        let neg = c.re < 0.0;
        (neg, format!("{}", c.re.abs()))
    } else if c.re == 0.0 {
        let neg = c.im < 0.0;
        (neg, format!("{}i", c.im.abs()))
    } else {
        let im_sign = if c.im < 0.0 { '-' } else { '+' };
        (
            false,
            format!("({}{}{}i)", c.re, im_sign, c.im.abs()),
        )
    }
}

impl fmt::Display for MatrixPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, coeff) in &self.monomials {
            let mut vars: Vec<String> = Vec::new();
            for (idx, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (r, s) = (idx / self.n + 1, idx % self.n + 1);
                if e == 1 {
                    vars.push(format!("X{r}{s}"));
                } else {
                    vars.push(format!("X{r}{s}^{e}"));
                }
            }
            let (neg, body) = format_coefficient(*coeff);
            let coeff_is_one = body == "1";
            let term = if vars.is_empty() {
                body
            } else if coeff_is_one {
                vars.join("*")
            } else {
                format!("{}*{}", body, vars.join("*"))
            };
            if first {
                if neg {
                    write!(f, "-{term}")?;
                } else {
                    write!(f, "{term}")?;
                }
                first = false;
            } else if neg {
                write!(f, " - {term}")?;
            } else {
                write!(f, " + {term}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    n: usize,
}

/// Parses the textual polynomial grammar at the given matrix size.
pub fn parse_mu(text: &str, n: usize) -> Result<MatrixPolynomial> {
    if n == 0 || n > 9 {
        return Err(Error::Precondition(
            "polynomial parsing supports 1 <= n <= 9".into(),
        ));
    }
    let mut parser = Parser {
        text: text.as_bytes(),
        pos: 0,
        n,
    };
    let poly = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(poly)
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<MatrixPolynomial> {
        let mut negate = false;
        if self.eat(b'-') {
            negate = true;
        } else {
            let _ = self.eat(b'+');
        }
        let mut total = self.term()?;
        if negate {
            total = total.scale(C64::new(-1.0, 0.0));
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    total = total.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    total = total.add(&self.term()?.scale(C64::new(-1.0, 0.0)));
                }
                _ => break,
            }
        }
        Ok(total)
    }

    fn term(&mut self) -> Result<MatrixPolynomial> {
        let mut product = self.factor()?;
        while self.eat(b'*') {
            product = product.mul(&self.factor()?);
        }
        Ok(product)
    }

    fn factor(&mut self) -> Result<MatrixPolynomial> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.uint()?;
            if e > 64 {
                return Err(self.error("exponent larger than 64"));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MatrixPolynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(MatrixPolynomial::constant(self.n, C64::new(0.0, 1.0)))
            }
            Some(b'd') => {
                if self.text[self.pos..].starts_with(b"det") {
                    self.pos += 3;
                    Ok(MatrixPolynomial::determinant(self.n))
                } else {
                    Err(self.error("expected 'det'"))
                }
            }
            Some(b'X') => {
                self.pos += 1;
                let r = self.digit()?;
                let s = self.digit()?;
                if r == 0 || s == 0 || r > self.n || s > self.n {
                    self.pos -= 2;
                    return Err(self.error(&format!(
                        "matrix entry X{r}{s} out of range for n = {}",
                        self.n
                    )));
                }
                MatrixPolynomial::variable(self.n, r - 1, s - 1)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let value = self.number()?;
                if self.pos < self.text.len() && self.text[self.pos] == b'i' {
                    self.pos += 1;
                    Ok(MatrixPolynomial::constant(self.n, C64::new(0.0, value)))
                } else {
                    Ok(MatrixPolynomial::constant(self.n, C64::new(value, 0.0)))
                }
            }
            Some(_) => Err(self.error("expected a number, 'i', 'det', 'X<r><s>', or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digit(&mut self) -> Result<usize> {
        match self.text.get(self.pos) {
            Some(c) if c.is_ascii_digit() => {
                self.pos += 1;
                Ok((c - b'0') as usize)
            }
            _ => Err(self.error("expected a digit")),
        }
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("integer out of range"))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_digit() || self.text[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // exponent part, written as e[+-]digits; only consumed when followed
        // by a digit or sign+digit so that it cannot swallow other tokens
        if self.pos < self.text.len() && (self.text[self.pos] | 32) == b'e' {
            let mut probe = self.pos + 1;
            if probe < self.text.len() && (self.text[probe] == b'+' || self.text[probe] == b'-') {
                probe += 1;
            }
            if probe < self.text.len() && self.text[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("malformed number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parse_constants_and_variables() {
        let one = parse_mu("1", 2).unwrap();
        assert_eq!(one, MatrixPolynomial::one(2));
        let x = parse_mu("X11", 1).unwrap();
        assert_eq!(x, MatrixPolynomial::variable(1, 0, 0).unwrap());
        assert!(parse_mu("X13", 2).is_err());
        assert!(parse_mu("X01", 2).is_err());
    }

    #[test]
    fn parse_det_expands() {
        let det = parse_mu("det", 2).unwrap();
        let by_hand = parse_mu("X11*X22 - X12*X21", 2).unwrap();
        assert_eq!(det, by_hand);
        // evaluation agrees with the matrix determinant
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0), c(2.1, -0.3)]);
        assert!((det.eval(&m) - m.determinant()).norm() < 1e-13);
    }

    #[test]
    fn det3_evaluates_correctly() {
        let det = MatrixPolynomial::determinant(3);
        assert_eq!(det.monomials().len(), 6);
        let m = CMatrix::from_fn(3, 3, |r, s| c((r * 3 + s) as f64 * 0.3 - 1.0, (r + s) as f64 * 0.2));
        assert!((det.eval(&m) - m.determinant()).norm() < 1e-12);
    }

    #[test]
    fn arithmetic_and_powers() {
        let p = parse_mu("(X11 + X22)^2", 2).unwrap();
        let q = parse_mu("X11^2 + 2*X11*X22 + X22^2", 2).unwrap();
        assert_eq!(p, q);
        let r = parse_mu("det^2", 2).unwrap();
        assert_eq!(r, MatrixPolynomial::determinant(2).pow(2));
        assert_eq!(r.degree(), 4);
    }

    #[test]
    fn complex_coefficients() {
        let p = parse_mu("2i*X11 + (1.5-0.25i)", 1).unwrap();
        assert_eq!(
            p.monomials().get(&vec![1u32]).copied(),
            Some(c(0.0, 2.0))
        );
        assert_eq!(
            p.monomials().get(&vec![0u32]).copied(),
            Some(c(1.5, -0.25))
        );
    }

    #[test]
    fn scientific_notation_and_unary_minus() {
        let p = parse_mu("-2.5e-1*X12 + 1e2", 2).unwrap();
        let mut key = vec![0u32; 4];
        key[1] = 1;
        assert_eq!(p.monomials().get(&key).copied(), Some(c(-0.25, 0.0)));
        assert_eq!(
            p.monomials().get(&vec![0u32; 4]).copied(),
            Some(c(100.0, 0.0))
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_mu("X11 + $", 2) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_mu("", 2).is_err());
        assert!(parse_mu("X11 X22", 2).is_err());
    }

    #[test]
    fn print_parse_fixpoint() {
        let inputs = [
            ("1", 2),
            ("0", 2),
            ("det", 2),
            ("det", 3),
            ("-X11^2*X22 + 3*X12 - 0.5", 2),
            ("2i*X11 + (1.5-0.25i)*X21^3", 2),
            ("(X11+X22)^2 - det", 2),
            ("1e-30*X11 + 0.1", 1),
        ];
        for (text, n) in inputs {
            let p = parse_mu(text, n).unwrap();
            let printed = p.to_string();
            let reparsed = parse_mu(&printed, n)
                .unwrap_or_else(|e| panic!("reparse of {printed:?} failed: {e}"));
            assert_eq!(reparsed, p, "fixpoint failed for {text:?} -> {printed:?}");
            assert_eq!(reparsed.to_string(), printed);
        }
    }

    #[test]
    fn eval_examples() {
        // n = 2, mu = det at diag(a, b) gives a*b
        let det = MatrixPolynomial::determinant(2);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(2.0, 1.0);
        m[(1, 1)] = c(-0.5, 0.5);
        assert!((det.eval(&m) - m[(0, 0)] * m[(1, 1)]).norm() < 1e-14);
    }
}
