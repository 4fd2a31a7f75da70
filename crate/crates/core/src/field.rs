//! Exact arithmetic in towers of algebraic extensions of the rationals.
//!
//! An element of a tower with levels `K_0 = Q ⊂ K_1 ⊂ ... ⊂ K_n` is stored as a
//! flat vector of rationals. At level `k` the vector splits into `deg_k` chunks
//! of length `dim(K_{k-1})`, the chunk `j` being the coefficient of `t_k^j`.
//! Arithmetic recurses over the levels and reduces by the monic moduli.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Q = BigRational;

const MAX_DEGREE: usize = 18;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("malformed tower: {0}")]
    MalformedTower(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("nonzero element is not invertible: the modulus of level {level} is not irreducible")]
    NotIrreducible { level: usize },
    #[error("field mismatch")]
    FieldMismatch,
    #[error("field does not contain a primitive cube root of unity")]
    UnsupportedField,
    #[error("{0}")]
    Parse(String),
}

/// One extension step: generator name and monic modulus, constant term first.
/// Every coefficient is a flat element of the previous level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerLevel {
    pub name: String,
    pub modulus: Vec<Vec<Q>>,
}

impl TowerLevel {
    /// A level whose modulus has rational coefficients (constant term first),
    /// embedded into a previous level of dimension `base_dim`.
    pub fn rational(name: &str, coeffs: &[i64], base_dim: usize) -> TowerLevel {
        let modulus = coeffs
            .iter()
            .map(|&c| {
                let mut v = vec![Q::zero(); base_dim];
                v[0] = Q::from_integer(BigInt::from(c));
                v
            })
            .collect();
        TowerLevel { name: name.to_string(), modulus }
    }

    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Tower {
    levels: Vec<TowerLevel>,
    // dims[k] is the dimension of level k over Q; dims[0] = 1.
    dims: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct NumberField(Arc<Tower>);

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for NumberField {}

/// Builds a tower from its levels. Irreducibility of the moduli is trusted.
pub fn make_tower(levels: Vec<TowerLevel>) -> Result<NumberField, FieldError> {
    let mut dims = vec![1usize];
    for (k, level) in levels.iter().enumerate() {
        let base = dims[k];
        if level.modulus.len() < 3 {
            return Err(FieldError::MalformedTower(format!(
                "level {} ({}) has degree < 2",
                k + 1,
                level.name
            )));
        }
        if level.modulus.iter().any(|c| c.len() != base) {
            return Err(FieldError::MalformedTower(format!(
                "level {} ({}) has coefficients of the wrong size",
                k + 1,
                level.name
            )));
        }
        let lead = level.modulus.last().unwrap();
        if !lead[0].is_one() || lead[1..].iter().any(|c| !c.is_zero()) {
            return Err(FieldError::MalformedTower(format!(
                "level {} ({}) is not monic",
                k + 1,
                level.name
            )));
        }
        if level.name.is_empty()
            || !level.name.chars().all(|c| c.is_ascii_alphabetic())
            || level.name.starts_with('x')
        {
            return Err(FieldError::MalformedTower(format!(
                "bad generator name {:?}",
                level.name
            )));
        }
        if levels[..k].iter().any(|l| l.name == level.name) {
            return Err(FieldError::MalformedTower(format!(
                "duplicate generator name {:?}",
                level.name
            )));
        }
        let d = base * level.degree();
        if d > MAX_DEGREE {
            return Err(FieldError::MalformedTower(format!(
                "total degree {} exceeds {}",
                d, MAX_DEGREE
            )));
        }
        dims.push(d);
    }
    Ok(NumberField(Arc::new(Tower { levels, dims })))
}

impl NumberField {
    pub fn rationals() -> NumberField {
        static F: OnceLock<NumberField> = OnceLock::new();
        F.get_or_init(|| make_tower(vec![]).unwrap()).clone()
    }

    /// Q(w) with w^2 + w + 1 = 0.
    pub fn eisenstein() -> NumberField {
        static F: OnceLock<NumberField> = OnceLock::new();
        F.get_or_init(|| make_tower(vec![TowerLevel::rational("w", &[1, 1, 1], 1)]).unwrap())
            .clone()
    }

    /// Q(w)(g) with w^2 + w + 1 = 0 and g^3 = -2.
    pub fn eisenstein_cbrt2() -> NumberField {
        static F: OnceLock<NumberField> = OnceLock::new();
        F.get_or_init(|| {
            make_tower(vec![
                TowerLevel::rational("w", &[1, 1, 1], 1),
                TowerLevel::rational("g", &[2, 0, 0, 1], 2),
            ])
            .unwrap()
        })
        .clone()
    }

    pub fn degree(&self) -> usize {
        *self.0.dims.last().unwrap()
    }

    pub fn depth(&self) -> usize {
        self.0.levels.len()
    }

    pub fn generator_names(&self) -> Vec<&str> {
        self.0.levels.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn levels(&self) -> &[TowerLevel] {
        &self.0.levels
    }

    /// The generator of level `k` (1-based) as an element of this field.
    pub fn generator(&self, k: usize) -> FieldElement {
        assert!(k >= 1 && k <= self.depth(), "no level {}", k);
        let mut c = vec![Q::zero(); self.degree()];
        c[self.0.dims[k - 1]] = Q::one();
        FieldElement { field: self.clone(), c }
    }

    pub fn generator_by_name(&self, name: &str) -> Option<FieldElement> {
        self.0
            .levels
            .iter()
            .position(|l| l.name == name)
            .map(|k| self.generator(k + 1))
    }

    /// True if `other` is a prefix of this tower, so its elements embed.
    pub fn extends(&self, other: &NumberField) -> bool {
        other.0.levels.len() <= self.0.levels.len()
            && other.0.levels[..] == self.0.levels[..other.0.levels.len()]
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::zero(self)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::one(self)
    }

    pub fn int(&self, n: i64) -> FieldElement {
        FieldElement::from_int(self, n)
    }

    pub fn rat(&self, n: i64, d: i64) -> FieldElement {
        FieldElement::from_rational(self, Q::new(BigInt::from(n), BigInt::from(d)))
    }

    fn mul_at(&self, k: usize, a: &[Q], b: &[Q]) -> Vec<Q> {
        if k == 0 {
            return vec![&a[0] * &b[0]];
        }
        let t = &self.0;
        let s = t.dims[k - 1];
        let d = t.levels[k - 1].degree();
        let chunk_zero = |v: &[Q]| v.iter().all(|x| x.is_zero());
        let mut prod: Vec<Vec<Q>> = vec![vec![Q::zero(); s]; 2 * d - 1];
        for i in 0..d {
            let ai = &a[i * s..(i + 1) * s];
            if chunk_zero(ai) {
                continue;
            }
            for j in 0..d {
                let bj = &b[j * s..(j + 1) * s];
                if chunk_zero(bj) {
                    continue;
                }
                let p = self.mul_at(k - 1, ai, bj);
                for (x, y) in prod[i + j].iter_mut().zip(p) {
                    *x += y;
                }
            }
        }
        let modulus = &t.levels[k - 1].modulus;
        for m in (d..2 * d - 1).rev() {
            let c = std::mem::replace(&mut prod[m], vec![Q::zero(); s]);
            if chunk_zero(&c) {
                continue;
            }
            for (i, mi) in modulus.iter().enumerate().take(d) {
                if chunk_zero(mi) {
                    continue;
                }
                let p = self.mul_at(k - 1, &c, mi);
                for (x, y) in prod[m - d + i].iter_mut().zip(p) {
                    *x -= y;
                }
            }
        }
        prod.truncate(d);
        prod.into_iter().flatten().collect()
    }

    fn inv_at(&self, k: usize, a: &[Q]) -> Result<Vec<Q>, FieldError> {
        if a.iter().all(|x| x.is_zero()) {
            return Err(FieldError::DivisionByZero);
        }
        if k == 0 {
            return Ok(vec![a[0].recip()]);
        }
        let t = &self.0;
        let s = t.dims[k - 1];
        let d = t.levels[k - 1].degree();
        // Extended Euclid in K_{k-1}[t] between the modulus and a(t).
        let mut r0: Vec<Vec<Q>> = t.levels[k - 1].modulus.clone();
        let mut r1: Vec<Vec<Q>> = a.chunks(s).map(|c| c.to_vec()).collect();
        upoly_trim(&mut r1);
        let mut s0: Vec<Vec<Q>> = vec![];
        let mut s1: Vec<Vec<Q>> = vec![unit(s)];
        while !r1.is_empty() {
            let (q, r) = self.upoly_divmod(k - 1, &r0, &r1)?;
            let qs1 = self.upoly_mul(k - 1, &q, &s1);
            let next_s = upoly_sub(&s0, &qs1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, next_s);
        }
        if r0.len() != 1 {
            return Err(FieldError::NotIrreducible { level: k });
        }
        let c = self.inv_at(k - 1, &r0[0])?;
        let mut out = vec![Q::zero(); s * d];
        for (j, coeff) in s0.iter().enumerate() {
            let p = self.mul_at(k - 1, coeff, &c);
            out[j * s..(j + 1) * s].clone_from_slice(&p);
        }
        Ok(out)
    }

    fn upoly_mul(&self, k: usize, a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let s = self.0.dims[k];
        let mut out = vec![vec![Q::zero(); s]; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let p = self.mul_at(k, x, y);
                for (o, v) in out[i + j].iter_mut().zip(p) {
                    *o += v;
                }
            }
        }
        upoly_trim(&mut out);
        out
    }

    fn upoly_divmod(
        &self,
        k: usize,
        a: &[Vec<Q>],
        b: &[Vec<Q>],
    ) -> Result<(Vec<Vec<Q>>, Vec<Vec<Q>>), FieldError> {
        let s = self.0.dims[k];
        let mut r: Vec<Vec<Q>> = a.to_vec();
        upoly_trim(&mut r);
        if r.len() < b.len() {
            return Ok((vec![], r));
        }
        let lead_inv = self.inv_at(k, b.last().unwrap())?;
        let mut q = vec![vec![Q::zero(); s]; r.len() - b.len() + 1];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = self.mul_at(k, r.last().unwrap(), &lead_inv);
            for (i, bi) in b.iter().enumerate() {
                let p = self.mul_at(k, &c, bi);
                for (x, y) in r[shift + i].iter_mut().zip(p) {
                    *x -= y;
                }
            }
            q[shift] = c;
            // The leading chunk is now zero by construction.
            r.pop();
            upoly_trim(&mut r);
        }
        upoly_trim(&mut q);
        Ok((q, r))
    }
}

fn unit(s: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); s];
    v[0] = Q::one();
    v
}

fn upoly_trim(p: &mut Vec<Vec<Q>>) {
    while p.last().is_some_and(|c| c.iter().all(|x| x.is_zero())) {
        p.pop();
    }
}

fn upoly_sub(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len().max(b.len());
    let s = a.first().or(b.first()).map_or(0, |c| c.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = a.get(i).cloned().unwrap_or_else(|| vec![Q::zero(); s]);
        if let Some(bi) = b.get(i) {
            for (x, y) in c.iter_mut().zip(bi) {
                *x -= y;
            }
        }
        out.push(c);
    }
    upoly_trim(&mut out);
    out
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.levels.is_empty() {
            return write!(f, "Q");
        }
        write!(f, "Q")?;
        for l in &self.0.levels {
            write!(f, "({})", l.name)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FieldElement {
    field: NumberField,
    c: Vec<Q>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.field == other.field
    }
}
impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl FieldElement {
    pub fn zero(field: &NumberField) -> FieldElement {
        FieldElement { field: field.clone(), c: vec![Q::zero(); field.degree()] }
    }

    pub fn one(field: &NumberField) -> FieldElement {
        Self::from_rational(field, Q::one())
    }

    pub fn from_int(field: &NumberField, n: i64) -> FieldElement {
        Self::from_rational(field, Q::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(field: &NumberField, q: Q) -> FieldElement {
        let mut c = vec![Q::zero(); field.degree()];
        c[0] = q;
        FieldElement { field: field.clone(), c }
    }

    /// Builds an element from its flat coordinates in the power basis.
    pub fn from_coords(field: &NumberField, c: Vec<Q>) -> Result<FieldElement, FieldError> {
        if c.len() != field.degree() {
            return Err(FieldError::FieldMismatch);
        }
        Ok(FieldElement { field: field.clone(), c })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn coords(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(|x| x.is_zero())
    }

    /// The rational value, if the element lies in the base field.
    pub fn as_rational(&self) -> Option<&Q> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// Embeds into a field that extends this element's tower.
    pub fn embed(&self, target: &NumberField) -> Result<FieldElement, FieldError> {
        if !target.extends(&self.field) {
            return Err(FieldError::FieldMismatch);
        }
        let mut c = self.c.clone();
        c.resize(target.degree(), Q::zero());
        Ok(FieldElement { field: target.clone(), c })
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same(other)?;
        let c = self.c.iter().zip(&other.c).map(|(x, y)| x + y).collect();
        Ok(FieldElement { field: self.field.clone(), c })
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same(other)?;
        let c = self.c.iter().zip(&other.c).map(|(x, y)| x - y).collect();
        Ok(FieldElement { field: self.field.clone(), c })
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.same(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.field));
        }
        if let Some(q) = self.as_rational() {
            return Ok(other.scale_rational(q));
        }
        if let Some(q) = other.as_rational() {
            return Ok(self.scale_rational(q));
        }
        let c = self.field.mul_at(self.field.depth(), &self.c, &other.c);
        Ok(FieldElement { field: self.field.clone(), c })
    }

    pub fn scale_rational(&self, q: &Q) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.iter().map(|x| x * q).collect() }
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if let Some(q) = self.as_rational() {
            if q.is_zero() {
                return Err(FieldError::DivisionByZero);
            }
            return Ok(Self::from_rational(&self.field, q.recip()));
        }
        let c = self.field.inv_at(self.field.depth(), &self.c)?;
        Ok(FieldElement { field: self.field.clone(), c })
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.checked_mul(&other.inv()?)
    }

    pub fn pow(&self, mut e: u32) -> FieldElement {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    fn same(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    /// Parses a field literal: rationals, generator names, `+ - * ^`, parentheses.
    pub fn parse(field: &NumberField, text: &str) -> Result<FieldElement, FieldError> {
        let p = crate::poly::Polynomial::parse(field, text)
            .map_err(|e| FieldError::Parse(e.to_string()))?;
        if p.is_zero() {
            return Ok(Self::zero(field));
        }
        p.constant_value()
            .ok_or_else(|| FieldError::Parse(format!("{:?} is not a field literal", text)))
    }

    /// Exponent vector of the power-basis element with flat index `idx`.
    fn basis_exponents(&self, idx: usize) -> Vec<usize> {
        let t = &self.field.0;
        (0..t.levels.len())
            .map(|k| (idx / t.dims[k]) % t.levels[k].degree())
            .collect()
    }

    /// Number of nonzero power-basis coordinates.
    pub fn term_count(&self) -> usize {
        self.c.iter().filter(|x| !x.is_zero()).count()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.field.generator_names();
        let mut first = true;
        for (idx, q) in self.c.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let mon: Vec<String> = self
                .basis_exponents(idx)
                .iter()
                .zip(&names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { n.to_string() } else { format!("{}^{}", n, e) })
                .collect();
            let neg = q.is_negative();
            let mag = q.abs();
            if !first || neg {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            if mon.is_empty() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", mon.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, mon.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &'a FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field mismatch")
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: FieldElement) -> FieldElement {
                self.$checked(&rhs).expect("field mismatch")
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, rhs: &'a FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field mismatch")
            }
        }
    };
}
binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), c: self.c.iter().map(|x| -x).collect() }
    }
}
impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

/// The roots of unity and of -1 that the families are parametrised by.
#[derive(Clone, Debug)]
pub struct RootTable {
    pub omega: FieldElement,
    pub roots_of_minus_one: [FieldElement; 3],
    pub primitive_cube_roots: [FieldElement; 2],
}

pub fn special_roots(field: &NumberField) -> Result<RootTable, FieldError> {
    let k = field
        .levels()
        .iter()
        .position(|l| {
            l.modulus.len() == 3
                && l.modulus.iter().all(|c| c[0].is_one() && c[1..].iter().all(|x| x.is_zero()))
        })
        .ok_or(FieldError::UnsupportedField)?;
    let w = field.generator(k + 1);
    let w2 = &w * &w;
    Ok(RootTable {
        roots_of_minus_one: [-field.one(), -w.clone(), -w2.clone()],
        primitive_cube_roots: [w.clone(), w2],
        omega: w,
    })
}

/// The three roots of b^3 = -2 in a field holding both w and a cube root of -2.
pub fn cube_roots_of_minus_two(field: &NumberField) -> Result<[FieldElement; 3], FieldError> {
    let table = special_roots(field)?;
    let k = field
        .levels()
        .iter()
        .position(|l| {
            l.modulus.len() == 4
                && l.modulus[0][0] == Q::from_integer(BigInt::from(2))
                && l.modulus[1..3].iter().all(|c| c.iter().all(|x| x.is_zero()))
                && l.modulus[0][1..].iter().all(|x| x.is_zero())
        })
        .ok_or(FieldError::UnsupportedField)?;
    let g = field.generator(k + 1);
    let [w, w2] = table.primitive_cube_roots;
    Ok([g.clone(), &g * &w, &g * &w2])
}
