//! Sparse polynomials in x1..x4 over a number field.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::field::{FieldElement, NumberField, Q};

pub const NVARS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable {name:?} at position {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("field mismatch")]
    FieldMismatch,
    #[error("substituted value involves the substituted variable")]
    SelfSubstitution,
}

/// Exponent vector. Ordered graded-lexicographically with x1 > x2 > x3 > x4.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(pub [u16; NVARS]);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial([0; NVARS])
    }

    /// The variable x_i, with i in 1..=4.
    pub fn var(i: usize) -> Monomial {
        let mut e = [0; NVARS];
        e[i - 1] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (x, y) in e.iter_mut().zip(other.0) {
            *x += y;
        }
        Monomial(e)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0).all(|(x, y)| *x <= y)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (x, y) in e.iter_mut().zip(other.0) {
            *x -= y;
        }
        Monomial(e)
    }

    /// All monomials of total degree exactly `d`, in descending order.
    pub fn of_degree(d: u32) -> Vec<Monomial> {
        let mut out = vec![];
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                for c in (0..=d - a - b).rev() {
                    out.push(Monomial([a as u16, b as u16, c as u16, (d - a - b - c) as u16]));
                }
            }
        }
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}
impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    field: NumberField,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl Polynomial {
    pub fn zero(field: &NumberField) -> Polynomial {
        Polynomial { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: FieldElement) -> Polynomial {
        let mut p = Polynomial::zero(c.field());
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn int(field: &NumberField, n: i64) -> Polynomial {
        Self::constant(field.int(n))
    }

    pub fn one(field: &NumberField) -> Polynomial {
        Self::int(field, 1)
    }

    /// The variable x_i, i in 1..=4.
    pub fn var(field: &NumberField, i: usize) -> Polynomial {
        Self::term(Monomial::var(i), field.one())
    }

    pub fn term(m: Monomial, c: FieldElement) -> Polynomial {
        let mut p = Polynomial::zero(c.field());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// f = x1^3 + x2^3 + x3^3 + x4^3.
    pub fn fermat(field: &NumberField) -> Polynomial {
        Self::fermat_n(field, 4)
    }

    /// f3 = x1^3 + x2^3 + x3^3.
    pub fn fermat3(field: &NumberField) -> Polynomial {
        Self::fermat_n(field, 3)
    }

    fn fermat_n(field: &NumberField, n: usize) -> Polynomial {
        let mut p = Polynomial::zero(field);
        for i in 0..n {
            let mut e = [0; NVARS];
            e[i] = 3;
            p.terms.insert(Monomial(e), field.one());
        }
        p
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> FieldElement {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// The value when the polynomial is a constant (zero included).
    pub fn constant_value(&self) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(self.field.zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &FieldElement)> {
        self.terms.iter().next_back()
    }

    pub fn degree(&self) -> Option<u32> {
        self.leading().map(|(m, _)| m.degree())
    }

    /// Whether every term has the same degree; the degree is `None` for zero.
    pub fn is_homogeneous(&self) -> (bool, Option<u32>) {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => (true, None),
            Some(d) => {
                let h = degs.all(|e| e == d);
                (h, if h { Some(d) } else { None })
            }
        }
    }

    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// The degree-one part.
    pub fn linear_part(&self) -> Polynomial {
        self.homogeneous_part(1)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var - 1] > 0)
    }

    fn check(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(PolyError::FieldMismatch)
        }
    }

    fn add_term(&mut self, m: Monomial, c: FieldElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = Polynomial::zero(&self.field);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.field);
        }
        Polynomial {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(&self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `value` for x_var.
    pub fn restrict(&self, var: usize, value: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(value)?;
        if value.involves(var) {
            return Err(PolyError::SelfSubstitution);
        }
        let mut powers = vec![Polynomial::one(&self.field)];
        let mut out = Polynomial::zero(&self.field);
        for (m, c) in &self.terms {
            let e = m.0[var - 1] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            let mut rest = *m;
            rest.0[var - 1] = 0;
            let t = Polynomial::term(rest, c.clone());
            out = &out + &(&t * &powers[e]);
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[FieldElement; NVARS]) -> FieldElement {
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = &t * &x.pow(e as u32);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Remainder of division by a single polynomial (grlex leading terms).
    pub fn rem(&self, g: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(g)?;
        let (lm, lc) = match g.leading() {
            None => return Ok(self.clone()),
            Some((m, c)) => (*m, c.clone()),
        };
        let lc_inv = lc.inv().expect("nonzero leading coefficient");
        let mut p = self.clone();
        let mut r = Polynomial::zero(&self.field);
        while let Some((m, c)) = p.leading().map(|(m, c)| (*m, c.clone())) {
            if lm.divides(&m) {
                let q = Polynomial::term(m.div(&lm), &c * &lc_inv);
                p = &p - &(&q * g);
            } else {
                p.terms.remove(&m);
                r.add_term(m, c);
            }
        }
        Ok(r)
    }

    pub fn embed(&self, target: &NumberField) -> Result<Polynomial, PolyError> {
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            out.terms.insert(*m, c.embed(target).map_err(|_| PolyError::FieldMismatch)?);
        }
        Ok(out)
    }

    pub fn parse(field: &NumberField, text: &str) -> Result<Polynomial, PolyError> {
        let mut p = Parser { field, src: text.as_bytes(), pos: 0 };
        p.skip_ws();
        if p.pos == p.src.len() {
            return Err(p.err("empty input"));
        }
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected character"));
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let is_const = *m == Monomial::one();
            let (neg, body) = match c.as_rational() {
                Some(q) => {
                    let neg = q.is_negative();
                    let mag = q.abs();
                    let body = if is_const {
                        mag.to_string()
                    } else if mag == Q::from_integer(BigInt::from(1)) {
                        m.to_string()
                    } else {
                        format!("{}*{}", mag, m)
                    };
                    (neg, body)
                }
                None => {
                    let s = if c.term_count() == 1 { c.to_string() } else { format!("({})", c) };
                    let (neg, s) = match s.strip_prefix('-') {
                        Some(rest) => (true, rest.to_string()),
                        None => (false, s),
                    };
                    (neg, if is_const { s } else { format!("{}*{}", s, m) })
                }
            };
            if neg {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            write!(f, "{}", body)?;
            first = false;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a Polynomial> for &'a Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &'a Polynomial) -> Polynomial {
                self.$checked(rhs).expect("field mismatch")
            }
        }
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                self.$checked(&rhs).expect("field mismatch")
            }
        }
        impl<'a> $tr<&'a Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &'a Polynomial) -> Polynomial {
                self.$checked(rhs).expect("field mismatch")
            }
        }
    };
}
binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}
impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

struct Parser<'a> {
    field: &'a NumberField,
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Syntax { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = Polynomial::zero(self.field);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' => {
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let mut q = Q::from_integer(n);
                let save = self.pos;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let d = self.integer()?;
                    if d.is_zero() {
                        self.pos = save;
                        return Err(self.err("zero denominator"));
                    }
                    q /= Q::from_integer(d);
                }
                Ok(Polynomial::constant(FieldElement::from_rational(self.field, q)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                if c == b'x' {
                    self.pos += 1;
                    let ds = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let digits = std::str::from_utf8(&self.src[ds..self.pos]).unwrap();
                    return match digits.parse::<usize>() {
                        Ok(i) if (1..=NVARS).contains(&i) => Ok(Polynomial::var(self.field, i)),
                        _ => Err(PolyError::UnknownVariable {
                            pos: start,
                            name: format!("x{}", digits),
                        }),
                    };
                }
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                // A run of letters may be several generators written side by side.
                self.generator_run(name, start)
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn generator_run(&self, name: &str, start: usize) -> Result<Polynomial, PolyError> {
        if let Some(g) = self.field.generator_by_name(name) {
            return Ok(Polynomial::constant(g));
        }
        let names = self.field.generator_names();
        let mut acc = Polynomial::one(self.field);
        let mut rest = name;
        'outer: while !rest.is_empty() {
            for n in &names {
                if let Some(r) = rest.strip_prefix(n) {
                    acc = &acc * &Polynomial::constant(self.field.generator_by_name(n).unwrap());
                    rest = r;
                    continue 'outer;
                }
            }
            return Err(PolyError::UnknownVariable { pos: start, name: name.to_string() });
        }
        Ok(acc)
    }
}
