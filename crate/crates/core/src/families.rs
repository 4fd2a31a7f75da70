//! Constructors for the named forms, ideals and matrix families.
//!
//! Every matrix pair is certified through [`verify_matrix_factorization`];
//! constructors never mark their own output as verified.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::{special_roots, FieldElement, FieldError, NumberField};
use crate::matrix::{verify_matrix_factorization, MatrixError, MatrixFactorization, MfFailure, PolyMatrix};
use crate::moduli6::GammaBlock;
use crate::poly::Polynomial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("invalid sigma ({0},{1},{2}): need a permutation (i,j,s) of 2,3,4 with i<j")]
    InvalidSigma(usize, usize, usize),
    #[error("invalid roots: {0}")]
    InvalidRoots(String),
    #[error("point is not on V(f)")]
    NotOnSurface,
    #[error("point is not on V(f3)")]
    NotOnCurve,
    #[error("the point P0 = [-1:0:1] is excluded")]
    ExcludedPoint,
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("verification failed: {0}")]
    Verification(MfFailure),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl From<MfFailure> for FamilyError {
    fn from(e: MfFailure) -> Self {
        FamilyError::Verification(e)
    }
}

fn x(k: &NumberField, i: usize) -> Polynomial {
    Polynomial::var(k, i)
}

fn cst(c: &FieldElement) -> Polynomial {
    Polynomial::constant(c.clone())
}

fn zero(k: &NumberField) -> Polynomial {
    Polynomial::zero(k)
}

fn mat(k: &NumberField, rows: Vec<Vec<Polynomial>>) -> PolyMatrix {
    PolyMatrix::from_rows(k, rows).expect("well-formed display")
}

fn is_cube_root_of_minus_one(r: &FieldElement) -> bool {
    r.pow(3) == -r.field().one()
}

fn is_primitive_cube_root(u: &FieldElement) -> bool {
    (&(u * u) + u + u.field().one()).is_zero()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SigmaPerm {
    pub i: usize,
    pub j: usize,
    pub s: usize,
}

impl SigmaPerm {
    pub const ALL: [SigmaPerm; 3] = [
        SigmaPerm { i: 2, j: 3, s: 4 },
        SigmaPerm { i: 2, j: 4, s: 3 },
        SigmaPerm { i: 3, j: 4, s: 2 },
    ];

    pub fn new(i: usize, j: usize, s: usize) -> Result<SigmaPerm, FamilyError> {
        let mut v = [i, j, s];
        v.sort();
        if i < j && v == [2, 3, 4] {
            Ok(SigmaPerm { i, j, s })
        } else {
            Err(FamilyError::InvalidSigma(i, j, s))
        }
    }

    pub fn parse(text: &str) -> Result<SigmaPerm, FamilyError> {
        let d: Vec<usize> = text
            .chars()
            .filter(|c| c.is_ascii_digit())
            .map(|c| c.to_digit(10).unwrap() as usize)
            .collect();
        if d.len() != 3 {
            return Err(FamilyError::InvalidParameters(format!("sigma {:?}", text)));
        }
        SigmaPerm::new(d[0], d[1], d[2])
    }
}

impl fmt::Display for SigmaPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.i, self.j, self.s)
    }
}

/// Root parameters. `a`, `b` are cube roots of -1 and `u` a primitive cube
/// root of unity; `c`, `d`, `eps` are present for the three-generated families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootData {
    pub a: FieldElement,
    pub b: FieldElement,
    pub u: FieldElement,
    pub c: Option<FieldElement>,
    pub d: Option<FieldElement>,
    pub eps: Option<FieldElement>,
}

impl RootData {
    pub fn new(a: FieldElement, b: FieldElement, u: FieldElement) -> Result<RootData, FamilyError> {
        if a.field() != b.field() || a.field() != u.field() {
            return Err(FamilyError::Field(FieldError::FieldMismatch));
        }
        if !is_cube_root_of_minus_one(&a) || !is_cube_root_of_minus_one(&b) {
            return Err(FamilyError::InvalidRoots("a and b must satisfy t^3 = -1".into()));
        }
        if !is_primitive_cube_root(&u) {
            return Err(FamilyError::InvalidRoots("u must satisfy u^2+u+1 = 0".into()));
        }
        Ok(RootData { a, b, u, c: None, d: None, eps: None })
    }

    /// Parameters of alpha(b,c,d,eps); `a` is set to bcd/eps.
    pub fn alpha(b: FieldElement, c: FieldElement, d: FieldElement, eps: FieldElement) -> Result<RootData, FamilyError> {
        let a = (&(&b * &c) * &d).checked_div(&eps)?;
        Self::alpha_with_a(a, b, c, d, eps)
    }

    /// As [`RootData::alpha`] but with `a` supplied; requires bcd = eps*a.
    pub fn alpha_with_a(
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        d: FieldElement,
        eps: FieldElement,
    ) -> Result<RootData, FamilyError> {
        for r in [&b, &c, &d] {
            if !is_cube_root_of_minus_one(r) {
                return Err(FamilyError::InvalidRoots("b, c, d must satisfy t^3 = -1".into()));
            }
        }
        if !is_primitive_cube_root(&eps) {
            return Err(FamilyError::InvalidRoots("eps must satisfy eps^3 = 1, eps != 1".into()));
        }
        if &(&b * &c) * &d != &eps * &a {
            return Err(FamilyError::InvalidRoots("bcd != eps*a".into()));
        }
        Ok(RootData { a, b, u: eps.clone(), c: Some(c), d: Some(d), eps: Some(eps) })
    }

    /// Parameters (a,b,c) of eta/theta: distinct cube roots of -1.
    pub fn distinct_triple(
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        eps: Option<FieldElement>,
    ) -> Result<RootData, FamilyError> {
        for r in [&a, &b, &c] {
            if !is_cube_root_of_minus_one(r) {
                return Err(FamilyError::InvalidRoots("a, b, c must satisfy t^3 = -1".into()));
            }
        }
        if a == b || b == c || a == c {
            return Err(FamilyError::InvalidRoots("a, b, c must be distinct".into()));
        }
        let u = match &eps {
            Some(e) if is_primitive_cube_root(e) => e.clone(),
            Some(_) => return Err(FamilyError::InvalidRoots("eps must satisfy eps^3 = 1, eps != 1".into())),
            None => special_roots(a.field())?.omega,
        };
        Ok(RootData { a, b, u, c: Some(c), d: None, eps })
    }

    pub fn field(&self) -> &NumberField {
        self.a.field()
    }

    fn need(&self, v: &Option<FieldElement>, name: &str) -> Result<FieldElement, FamilyError> {
        v.clone().ok_or_else(|| FamilyError::InvalidParameters(format!("missing {}", name)))
    }
}

/// The sigma-forms w, v, v', v''.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaForms {
    pub w1: Polynomial,
    pub w2: Polynomial,
    pub v1: Polynomial,
    pub v2: Polynomial,
    pub v1p: Polynomial,
    pub v1pp: Polynomial,
    pub v2p: Polynomial,
    pub v2pp: Polynomial,
    pub xi: Polynomial,
    pub xj: Polynomial,
    pub xs: Polynomial,
}

pub fn building_blocks(sigma: &SigmaPerm, r: &RootData) -> Result<SigmaForms, FamilyError> {
    let sigma = SigmaPerm::new(sigma.i, sigma.j, sigma.s)?;
    RootData::new(r.a.clone(), r.b.clone(), r.u.clone())?;
    let k = r.field();
    let (x1, xi, xj, xs) = (x(k, 1), x(k, sigma.i), x(k, sigma.j), x(k, sigma.s));
    let (a, b, u) = (cst(&r.a), cst(&r.b), cst(&r.u));
    let one = Polynomial::one(k);
    let quad = |p: &Polynomial, c: &Polynomial, q: &Polynomial| &(&(p * p) + &(&(c * p) * q)) + &(&(c * c) * &(q * q));
    Ok(SigmaForms {
        w1: &x1 - &(&a * &xs),
        w2: &xi - &(&b * &xj),
        v1: quad(&x1, &a, &xs),
        v2: quad(&xi, &b, &xj),
        v1p: &x1 - &(&(&u * &a) * &xs),
        v1pp: &x1 + &(&(&(&one + &u) * &a) * &xs),
        v2p: &xi - &(&(&u * &b) * &xj),
        v2pp: &xi + &(&(&(&one + &u) * &b) * &xj),
        xi,
        xj,
        xs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceChart {
    /// [l1:l2:l3:1]
    Affine,
    /// [l1:l2:1:0]
    Plane,
    /// [l1:1:0:0]
    Line,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfacePoint {
    chart: SurfaceChart,
    coords: Vec<FieldElement>,
}

impl SurfacePoint {
    pub fn new(chart: SurfaceChart, coords: Vec<FieldElement>) -> Result<SurfacePoint, FamilyError> {
        let need = match chart {
            SurfaceChart::Affine => 3,
            SurfaceChart::Plane => 2,
            SurfaceChart::Line => 1,
        };
        if coords.len() != need {
            return Err(FamilyError::ChartMismatch(format!("chart needs {} coordinates", need)));
        }
        let p = SurfacePoint { chart, coords };
        let k = p.field().clone();
        if !Polynomial::fermat(&k).eval(&p.homogeneous()).is_zero() {
            return Err(FamilyError::NotOnSurface);
        }
        Ok(p)
    }

    /// Normalizes projective coordinates into the matching chart.
    pub fn from_projective(h: &[FieldElement; 4]) -> Result<SurfacePoint, FamilyError> {
        let last = (0..4).rev().find(|&i| !h[i].is_zero()).ok_or(FamilyError::NotOnSurface)?;
        let inv = h[last].inv()?;
        let scaled: Vec<FieldElement> = h.iter().map(|c| c * &inv).collect();
        match last {
            3 => Self::new(SurfaceChart::Affine, scaled[..3].to_vec()),
            2 => Self::new(SurfaceChart::Plane, scaled[..2].to_vec()),
            1 => Self::new(SurfaceChart::Line, scaled[..1].to_vec()),
            _ => Err(FamilyError::NotOnSurface),
        }
    }

    pub fn parse(field: &NumberField, text: &str) -> Result<SurfacePoint, FamilyError> {
        let parts: Vec<&str> = text.trim().trim_matches(|c| c == '[' || c == ']').split(':').collect();
        if parts.len() != 4 {
            return Err(FamilyError::InvalidParameters(format!("surface point {:?}", text)));
        }
        let mut h = Vec::new();
        for p in parts {
            h.push(FieldElement::parse(field, p)?);
        }
        Self::from_projective(&[h[0].clone(), h[1].clone(), h[2].clone(), h[3].clone()])
    }

    pub fn chart(&self) -> SurfaceChart {
        self.chart
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.coords
    }

    pub fn field(&self) -> &NumberField {
        self.coords[0].field()
    }

    pub fn homogeneous(&self) -> [FieldElement; 4] {
        let k = self.field();
        let c = &self.coords;
        match self.chart {
            SurfaceChart::Affine => [c[0].clone(), c[1].clone(), c[2].clone(), k.one()],
            SurfaceChart::Plane => [c[0].clone(), c[1].clone(), k.one(), k.zero()],
            SurfaceChart::Line => [c[0].clone(), k.one(), k.zero(), k.zero()],
        }
    }
}

impl fmt::Display for SurfacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self.homogeneous().iter().map(|c| c.to_string()).collect();
        write!(f, "{}", h.join(":"))
    }
}

/// The p/q forms of a surface point, with f = p1 q1 + p2 q2 + p3 q3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointForms {
    pub p: [Polynomial; 3],
    pub q: [Polynomial; 3],
}

pub fn point_forms(lambda: &SurfacePoint) -> PointForms {
    let k = lambda.field();
    let c = lambda.coords();
    let pq = |i: usize, l: &FieldElement, v: usize| {
        let (xi, xv, l) = (x(k, i), x(k, v), cst(l));
        let p = &xi - &(&l * &xv);
        let q = &(&(&xi * &xi) + &(&(&l * &xi) * &xv)) + &(&(&l * &l) * &(&xv * &xv));
        (p, q)
    };
    let sq = |i: usize| (x(k, i), &x(k, i) * &x(k, i));
    let [(p1, q1), (p2, q2), (p3, q3)] = match lambda.chart {
        SurfaceChart::Affine => [pq(1, &c[0], 4), pq(2, &c[1], 4), pq(3, &c[2], 4)],
        SurfaceChart::Plane => [pq(1, &c[0], 3), pq(2, &c[1], 3), sq(4)],
        SurfaceChart::Line => [pq(1, &c[0], 2), sq(3), sq(4)],
    };
    PointForms { p: [p1, p2, p3], q: [q1, q2, q3] }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveChart {
    /// [a:b:1]
    Affine,
    /// [l:1:0]
    Infinity,
}

/// A point of V(f3) other than P0 = [-1:0:1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePoint {
    chart: CurveChart,
    a: FieldElement,
    b: FieldElement,
    e: Option<FieldElement>,
}

impl CurvePoint {
    /// The point [a:b:1].
    pub fn affine(a: FieldElement, b: FieldElement) -> Result<CurvePoint, FamilyError> {
        let k = a.field().clone();
        if !(&(&a.pow(3) + &b.pow(3)) + &k.one()).is_zero() {
            return Err(FamilyError::NotOnCurve);
        }
        if a == -k.one() {
            // a = -1 forces b = 0, which is P0.
            return Err(FamilyError::ExcludedPoint);
        }
        let e = (&b * &b).checked_div(&(&a + &k.one()))?;
        Ok(CurvePoint { chart: CurveChart::Affine, a, b, e: Some(e) })
    }

    /// The point [l:1:0].
    pub fn at_infinity(l: FieldElement) -> Result<CurvePoint, FamilyError> {
        let k = l.field().clone();
        if !(&l.pow(3) + &k.one()).is_zero() {
            return Err(FamilyError::NotOnCurve);
        }
        Ok(CurvePoint { chart: CurveChart::Infinity, a: l, b: k.one(), e: None })
    }

    pub fn from_projective(h: &[FieldElement; 3]) -> Result<CurvePoint, FamilyError> {
        if !h[2].is_zero() {
            let inv = h[2].inv()?;
            Self::affine(&h[0] * &inv, &h[1] * &inv)
        } else if !h[1].is_zero() {
            let inv = h[1].inv()?;
            Self::at_infinity(&h[0] * &inv)
        } else {
            Err(FamilyError::NotOnCurve)
        }
    }

    pub fn parse(field: &NumberField, text: &str) -> Result<CurvePoint, FamilyError> {
        let body = text.trim().trim_matches(|c| c == '[' || c == ']');
        let sep = if body.contains(':') { ':' } else { ',' };
        let parts: Vec<&str> = body.split(sep).collect();
        let vals = parts.iter().map(|p| FieldElement::parse(field, p)).collect::<Result<Vec<_>, _>>()?;
        match (sep, vals.len()) {
            (':', 3) => Self::from_projective(&[vals[0].clone(), vals[1].clone(), vals[2].clone()]),
            // "a,b" shorthand for [a:b:1]
            (',', 2) => Self::affine(vals[0].clone(), vals[1].clone()),
            _ => Err(FamilyError::InvalidParameters(format!("curve point {:?}", text))),
        }
    }

    pub fn chart(&self) -> CurveChart {
        self.chart
    }

    pub fn field(&self) -> &NumberField {
        self.a.field()
    }

    /// First coordinate in the chart ([a:b:1] or [l:1:0]).
    pub fn a(&self) -> &FieldElement {
        &self.a
    }

    pub fn b(&self) -> &FieldElement {
        &self.b
    }

    /// e = b^2/(a+1), defined on the [a:b:1] chart.
    pub fn e(&self) -> Option<&FieldElement> {
        self.e.as_ref()
    }

    pub fn homogeneous(&self) -> [FieldElement; 3] {
        let k = self.field();
        match self.chart {
            CurveChart::Affine => [self.a.clone(), self.b.clone(), k.one()],
            CurveChart::Infinity => [self.a.clone(), k.one(), k.zero()],
        }
    }

    /// The dual point [c:b:a] of [a:b:c].
    pub fn transpose(&self) -> Result<CurvePoint, FamilyError> {
        let [p, q, r] = self.homogeneous();
        Self::from_projective(&[r, q, p])
    }

    pub fn is_self_dual(&self) -> bool {
        self.transpose().map(|t| t == *self).unwrap_or(false)
    }

    pub fn embed(&self, target: &NumberField) -> Result<CurvePoint, FamilyError> {
        let h = self.homogeneous();
        Self::from_projective(&[h[0].embed(target)?, h[1].embed(target)?, h[2].embed(target)?])
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self.homogeneous().iter().map(|c| c.to_string()).collect();
        write!(f, "{}", h.join(":"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank1Kind {
    Alpha3,
    Beta3,
    Eta3,
    Theta3,
}

/// alpha(b,c,d,eps), eta(a,b,c,eps) or theta(a,b,c); beta3 is alpha transposed.
pub fn rank1_matrix(kind: Rank1Kind, r: &RootData) -> Result<PolyMatrix, FamilyError> {
    let k = r.field().clone();
    let (x1, x2, x3, x4) = (x(&k, 1), x(&k, 2), x(&k, 3), x(&k, 4));
    let z = zero(&k);
    match kind {
        Rank1Kind::Alpha3 | Rank1Kind::Beta3 => {
            let (b, c, d, eps) = (r.b.clone(), r.need(&r.c, "c")?, r.need(&r.d, "d")?, r.need(&r.eps, "eps")?);
            let checked = RootData::alpha_with_a(r.a.clone(), b.clone(), c.clone(), d.clone(), eps.clone())?;
            let a = checked.a;
            let e2 = &eps * &eps;
            let (ap, bp, cp, dp) = (cst(&a), cst(&b), cst(&c), cst(&d));
            let m22 = -&(&cst(&(&b * &b)) * &x3) - &(&cst(&(&(&(&a * &b) * &(&c * &c)) * &e2)) * &x4);
            let m23 = &(&cst(&(&(&b * &b) * &(&c * &c))) * &x3) - &(&cst(&(&(&(&a * &b) * &c) * &e2)) * &x4);
            let m32 = &(&(&cst(&(&c * &c)) * &x2) + &(&cst(&(&b * &(&c * &c))) * &x3)) + &(&cst(&(&a * &c)) * &x4);
            let m33 = &(&(-&x1) - &(&cp * &x2)) - &(&ap * &x4);
            let alpha = mat(
                &k,
                vec![
                    vec![z.clone(), &x1 - &(&ap * &x4), &x2 - &(&bp * &x3)],
                    vec![&x1 - &(&cp * &x2), m22, m23],
                    vec![&x3 - &(&dp * &x4), m32, m33],
                ],
            );
            Ok(if kind == Rank1Kind::Beta3 { alpha.transpose() } else { alpha })
        }
        Rank1Kind::Eta3 => {
            let c = r.need(&r.c, "c")?;
            let eps = r.need(&r.eps, "eps")?;
            RootData::distinct_triple(r.a.clone(), r.b.clone(), c.clone(), Some(eps.clone()))?;
            let (a, b, c) = (cst(&r.a), cst(&r.b), cst(&c));
            let (e1, e2) = (cst(&eps), cst(&(&eps * &eps)));
            Ok(mat(
                &k,
                vec![
                    vec![z.clone(), &x1 + &x2, &x3 - &(&a * &x4)],
                    vec![&x1 + &(&e1 * &x2), &(-&x3) + &(&c * &x4), z.clone()],
                    vec![&x3 - &(&b * &x4), z.clone(), &(-&x1) - &(&e2 * &x2)],
                ],
            ))
        }
        Rank1Kind::Theta3 => {
            let c = r.need(&r.c, "c")?;
            RootData::distinct_triple(r.a.clone(), r.b.clone(), c.clone(), None)?;
            let (av, bv) = (&r.a, &r.b);
            let a2b = cst(&(&(av * av) * bv));
            let ab2 = cst(&(av * &(bv * bv)));
            let (a, b, c) = (cst(av), cst(bv), cst(&c));
            Ok(mat(
                &k,
                vec![
                    vec![z.clone(), &x1 + &x3, &x2 - &(&a * &x4)],
                    vec![&x1 - &(&a2b * &x3), &(-&x2) + &(&c * &x4), z.clone()],
                    vec![&x2 - &(&b * &x4), z.clone(), &(-&x1) + &(&ab2 * &x3)],
                ],
            ))
        }
    }
}

/// The three-generated pair (matrix, adjugate), a factorization of f.
pub fn build_rank1_3gen(kind: Rank1Kind, r: &RootData) -> Result<MatrixFactorization, FamilyError> {
    let m = rank1_matrix(kind, r)?;
    let adj = m.adjugate()?;
    Ok(verify_matrix_factorization(&m, &adj, &Polynomial::fermat(r.field()))?)
}

/// alpha_lambda for a point of V(f3) in either chart.
pub fn curve_alpha(lambda: &CurvePoint) -> PolyMatrix {
    let k = lambda.field().clone();
    let (x1, x2, x3) = (x(&k, 1), x(&k, 2), x(&k, 3));
    let z = zero(&k);
    match lambda.chart() {
        CurveChart::Affine => {
            let (a, b) = (cst(lambda.a()), cst(lambda.b()));
            let e = cst(lambda.e().expect("affine chart has e"));
            let one = Polynomial::one(&k);
            mat(
                &k,
                vec![
                    vec![z, &x1 - &(&a * &x3), &x2 - &(&b * &x3)],
                    vec![&x1 + &x3, &(-&x2) - &(&b * &x3), -&(&e * &x3)],
                    vec![x2.clone(), &e * &x3, &(&(&one - &a) * &x3) - &x1],
                ],
            )
        }
        CurveChart::Infinity => {
            let l = cst(lambda.a());
            mat(
                &k,
                vec![
                    vec![z, &x1 - &(&l * &x2), x3.clone()],
                    vec![&x1 + &x3, -&(&l * &x1), &(&l * &x1) + &(&(&l * &l) * &x2)],
                    vec![x2.clone(), &x3 - &x1, -&x1],
                ],
            )
        }
    }
}

/// (alpha_lambda, its adjugate), a factorization of f3.
pub fn build_curve_alpha(lambda: &CurvePoint) -> Result<MatrixFactorization, FamilyError> {
    let m = curve_alpha(lambda);
    let adj = m.adjugate()?;
    Ok(verify_matrix_factorization(&m, &adj, &Polynomial::fermat3(lambda.field()))?)
}

pub fn phi_lambda(lambda: &SurfacePoint) -> PolyMatrix {
    let k = lambda.field().clone();
    let PointForms { p: [p1, p2, p3], q: [q1, q2, q3] } = point_forms(lambda);
    let z = zero(&k);
    mat(
        &k,
        vec![
            vec![z.clone(), p3.clone(), -&p2, -&q1],
            vec![-&p3, z.clone(), -&p1, q2.clone()],
            vec![p2.clone(), p1.clone(), z.clone(), q3.clone()],
            vec![q1, -&q2, -&q3, z],
        ],
    )
}

pub fn psi_lambda(lambda: &SurfacePoint) -> PolyMatrix {
    let k = lambda.field().clone();
    let PointForms { p: [p1, p2, p3], q: [q1, q2, q3] } = point_forms(lambda);
    let z = zero(&k);
    mat(
        &k,
        vec![
            vec![z.clone(), -&q3, q2.clone(), p1.clone()],
            vec![q3, z.clone(), q1.clone(), -&p2],
            vec![-&q2, -&q1, z.clone(), -&p3],
            vec![-&p1, p2, p3, z],
        ],
    )
}

/// phi_{sigma,beta}; the default slot is beta = x_j x_s.
pub fn phi_sigma_beta(s: &SigmaForms, beta: &Polynomial) -> PolyMatrix {
    let k = s.w1.field().clone();
    let z = zero(&k);
    mat(
        &k,
        vec![
            vec![z.clone(), s.w1.clone(), -&s.v2, z.clone()],
            vec![-&s.w1, z.clone(), -beta, s.w2.clone()],
            vec![s.v2.clone(), beta.clone(), z.clone(), s.v1.clone()],
            vec![z.clone(), -&s.w2, -&s.v1, z],
        ],
    )
}

pub fn psi_sigma_beta(s: &SigmaForms, beta: &Polynomial) -> PolyMatrix {
    let k = s.w1.field().clone();
    let z = zero(&k);
    mat(
        &k,
        vec![
            vec![z.clone(), -&s.v1, s.w2.clone(), beta.clone()],
            vec![s.v1.clone(), z.clone(), z.clone(), -&s.v2],
            vec![-&s.w2, z.clone(), z.clone(), -&s.w1],
            vec![-beta, s.v2.clone(), s.w1.clone(), z],
        ],
    )
}

pub fn default_beta(s: &SigmaForms) -> Polynomial {
    &s.xj * &s.xs
}

pub enum Orientable4<'a> {
    Lambda(&'a SurfacePoint),
    Sigma(&'a SigmaPerm, &'a RootData),
}

/// The skew pairs (phi_lambda, psi_lambda) or (phi_sigma, psi_sigma);
/// with `psi` the pair is returned in the order (psi, phi).
pub fn build_orientable_4gen(which: Orientable4<'_>, psi: bool) -> Result<MatrixFactorization, FamilyError> {
    let (p, q, k) = match which {
        Orientable4::Lambda(l) => (phi_lambda(l), psi_lambda(l), l.field().clone()),
        Orientable4::Sigma(sigma, r) => {
            let s = building_blocks(sigma, r)?;
            let beta = default_beta(&s);
            (phi_sigma_beta(&s, &beta), psi_sigma_beta(&s, &beta), r.field().clone())
        }
    };
    let f = Polynomial::fermat(&k);
    Ok(if psi { verify_matrix_factorization(&q, &p, &f)? } else { verify_matrix_factorization(&p, &q, &f)? })
}

/// phi_{t sigma} and psi_{t sigma}, t = 1..4.
pub fn nonorientable_pair(t: u8, s: &SigmaForms) -> Result<(PolyMatrix, PolyMatrix), FamilyError> {
    let k = s.w1.field().clone();
    let z = zero(&k);
    let (w1, w2, v1, v2) = (&s.w1, &s.w2, &s.v1, &s.v2);
    // (a, b, c, d, e, g, h) such that for t = 1 the display reads
    // phi = [0,w1,-v2'',0; -w1,0,-xs,w2; v2,xs v2',0,v1; 0,-w2 v2',-v1,0].
    let (a, b, c, d, e, g, h) = match t {
        1 => (w1, w2, v1, v2, &s.v2p, &s.v2pp, &s.xs),
        2 => (w2, w1, v2, v1, &s.v1pp, &s.v1p, &s.xj),
        3 => (v1, w2, w1, v2, &s.v2pp, &s.v2p, &s.xs),
        4 => (v2, w1, w2, v1, &s.v1p, &s.v1pp, &s.xj),
        _ => return Err(FamilyError::InvalidParameters(format!("t = {} (need 1..4)", t))),
    };
    let phi = mat(
        &k,
        vec![
            vec![z.clone(), a.clone(), -g, z.clone()],
            vec![-a, z.clone(), -h, b.clone()],
            vec![d.clone(), h * e, z.clone(), c.clone()],
            vec![z.clone(), -&(b * e), -c, z.clone()],
        ],
    );
    let psi = mat(
        &k,
        vec![
            vec![z.clone(), -c, b.clone(), h.clone()],
            vec![c.clone(), z.clone(), z.clone(), -g],
            vec![-&(b * e), z.clone(), z.clone(), -a],
            vec![-&(h * e), d.clone(), a.clone(), z],
        ],
    );
    Ok((phi, psi))
}

pub fn build_nonorientable_4gen(t: u8, psi: bool, sigma: &SigmaPerm, r: &RootData) -> Result<MatrixFactorization, FamilyError> {
    let s = building_blocks(sigma, r)?;
    let (p, q) = nonorientable_pair(t, &s)?;
    let f = Polynomial::fermat(r.field());
    Ok(if psi { verify_matrix_factorization(&q, &p, &f)? } else { verify_matrix_factorization(&p, &q, &f)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiveKind {
    Rho,
    Mu,
    Mubar,
}

/// The five-generated pairs (rho, omega), (mu, nu), (mubar, nubar); with
/// `normalized = false` the first two are the "1 sigma" forms.
///
/// The printed omega and omega_1 carry -w1 v2'' at entry (3,2); the identity
/// requires +w1 v2'' (see docs/ERRATA.md).
pub fn five_gen_pair(kind: FiveKind, s: &SigmaForms, normalized: bool) -> Result<(PolyMatrix, PolyMatrix), FamilyError> {
    let k = s.w1.field().clone();
    let z = zero(&k);
    let (w1, w2, v1, v2) = (&s.w1, &s.w2, &s.v1, &s.v2);
    let (v1p, v1pp, v2p, v2pp) = (&s.v1p, &s.v1pp, &s.v2p, &s.v2pp);
    let (xj, xs) = (&s.xj, &s.xs);
    let m = |rows: Vec<Vec<Polynomial>>| mat(&k, rows);
    let pair = match (kind, normalized) {
        (FiveKind::Rho, false) => (
            m(vec![
                vec![z.clone(), -v2pp, -v2p, w1.clone(), z.clone()],
                vec![v1p.clone(), z.clone(), z.clone(), w2.clone(), -&(v2pp * v1pp)],
                vec![-v2pp, z.clone(), v1pp.clone(), z.clone(), z.clone()],
                vec![z.clone(), v1p.clone(), z.clone(), z.clone(), v2.clone()],
                vec![z.clone(), -w2, z.clone(), z.clone(), w1 * v1pp],
            ]),
            m(vec![
                vec![-&(w2 * v1pp), w1 * v1pp, -&(w2 * v2p), z.clone(), v1pp * v2pp],
                vec![z.clone(), z.clone(), z.clone(), w1 * v1pp, -v2],
                vec![-&(w2 * v2pp), w1 * v2pp, w1 * v1p, z.clone(), v2pp * v2pp],
                vec![v1.clone(), v2.clone(), v1p * v2p, v1pp * v2pp, z.clone()],
                vec![z.clone(), z.clone(), z.clone(), w2.clone(), v1p.clone()],
            ]),
        ),
        (FiveKind::Rho, true) => (
            m(vec![
                vec![z.clone(), w1.clone(), -v2p, -xj, z.clone()],
                vec![v1p.clone(), w2.clone(), z.clone(), z.clone(), -&(xj * v1pp)],
                vec![-v2pp, z.clone(), v1pp.clone(), z.clone(), z.clone()],
                vec![z.clone(), z.clone(), z.clone(), v1p.clone(), v2.clone()],
                vec![z.clone(), z.clone(), z.clone(), -w2, w1 * v1pp],
            ]),
            m(vec![
                vec![-&(w2 * v1pp), w1 * v1pp, -&(w2 * v2p), z.clone(), xj * v1pp],
                vec![v1.clone(), v2.clone(), v1p * v2p, xj * v1pp, z.clone()],
                vec![-&(w2 * v2pp), w1 * v2pp, w1 * v1p, z.clone(), xj * v2pp],
                vec![z.clone(), z.clone(), z.clone(), w1 * v1pp, -v2],
                vec![z.clone(), z.clone(), z.clone(), w2.clone(), v1p.clone()],
            ]),
        ),
        (FiveKind::Mu, false) => (
            m(vec![
                vec![v2pp.clone(), z.clone(), z.clone(), z.clone(), w1.clone()],
                vec![z.clone(), v2pp.clone(), -v1p, z.clone(), w2.clone()],
                vec![-v1pp, z.clone(), v2p.clone(), v2pp.clone(), z.clone()],
                vec![z.clone(), -v2p, z.clone(), -v1p, z.clone()],
                vec![z.clone(), -&(v1pp * w1), z.clone(), w2 * v2pp, z.clone()],
            ]),
            m(vec![
                vec![v2p * w2, -&(v2p * w1), -&(v1p * w1), -&(v2pp * w1), z.clone()],
                vec![z.clone(), z.clone(), z.clone(), -&(v2pp * w2), -v1p],
                vec![v1pp * w2, -&(v1pp * w1), w2 * v2pp, z.clone(), -v2pp],
                vec![z.clone(), z.clone(), z.clone(), -&(v1pp * w1), v2p.clone()],
                vec![v1.clone(), v2.clone(), v2pp * v1p, v2pp * v2pp, z.clone()],
            ]),
        ),
        (FiveKind::Mu, true) => (
            m(vec![
                vec![z.clone(), w1.clone(), v2pp.clone(), z.clone(), z.clone()],
                vec![-v1p, w2.clone(), z.clone(), z.clone(), xj.clone()],
                vec![v2p.clone(), z.clone(), -v1pp, xj.clone(), z.clone()],
                vec![z.clone(), z.clone(), z.clone(), -v1p, -v2p],
                vec![z.clone(), z.clone(), z.clone(), w2 * v2pp, -&(v1pp * w1)],
            ]),
            m(vec![
                vec![v1pp * w2, -&(v1pp * w1), v2pp * w2, z.clone(), -xj],
                vec![v1.clone(), v2.clone(), v2pp * v1p, xj * v2pp, z.clone()],
                vec![v2p * w2, -&(v2p * w1), -&(v1p * w1), -&(xj * w1), z.clone()],
                vec![z.clone(), z.clone(), z.clone(), -&(v1pp * w1), v2p.clone()],
                vec![z.clone(), z.clone(), z.clone(), -&(v2pp * w2), -v1p],
            ]),
        ),
        (FiveKind::Mubar, true) => (
            m(vec![
                vec![z.clone(), w2.clone(), v1p.clone(), z.clone(), z.clone()],
                vec![-v2pp, w1.clone(), z.clone(), z.clone(), xs.clone()],
                vec![v1pp.clone(), z.clone(), -v2p, xs.clone(), z.clone()],
                vec![z.clone(), z.clone(), z.clone(), -v2pp, -v1pp],
                vec![z.clone(), z.clone(), z.clone(), w1 * v1p, -&(v2p * w2)],
            ]),
            m(vec![
                vec![v2p * w1, -&(v2p * w2), v1p * w1, z.clone(), -xs],
                vec![v2.clone(), v1.clone(), v1p * v2pp, xs * v1p, z.clone()],
                vec![v1pp * w1, -&(v1pp * w2), -&(v2pp * w2), -&(xs * w2), z.clone()],
                vec![z.clone(), z.clone(), z.clone(), -&(v2p * w2), v1pp.clone()],
                vec![z.clone(), z.clone(), z.clone(), -&(v1p * w1), -v2pp],
            ]),
        ),
        (FiveKind::Mubar, false) => {
            return Err(FamilyError::InvalidParameters("mubar has only the normalized form".into()))
        }
    };
    Ok(pair)
}

pub fn build_5gen(kind: FiveKind, partner: bool, sigma: &SigmaPerm, r: &RootData, normalized: bool) -> Result<MatrixFactorization, FamilyError> {
    let s = building_blocks(sigma, r)?;
    let (p, q) = five_gen_pair(kind, &s, normalized)?;
    let f = Polynomial::fermat(r.field());
    Ok(if partner { verify_matrix_factorization(&q, &p, &f)? } else { verify_matrix_factorization(&p, &q, &f)? })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealKind {
    Lambda(SurfacePoint),
    SigmaBeta(SigmaPerm, RootData, Option<Polynomial>),
    TSigma(u8, SigmaPerm, RootData),
    JSigma(u8, SigmaPerm, RootData),
    TListSigma(u8, SigmaPerm, RootData),
}

/// Generators of the named ideals, in display order.
pub fn build_ideal(kind: &IdealKind) -> Result<Vec<Polynomial>, FamilyError> {
    match kind {
        IdealKind::Lambda(l) => Ok(point_forms(l).p.to_vec()),
        IdealKind::SigmaBeta(sigma, r, beta) => {
            let s = building_blocks(sigma, r)?;
            let beta = beta.clone().unwrap_or_else(|| default_beta(&s));
            Ok(vec![s.w1, s.v2, beta])
        }
        IdealKind::TSigma(t, sigma, r) => {
            let s = building_blocks(sigma, r)?;
            Ok(match t {
                1 => vec![&s.xs * &s.v2p, s.v2, s.w1],
                2 => vec![&s.xj * &s.v1pp, s.v1, s.w2],
                3 => vec![&s.xs * &s.v2pp, s.v2, s.v1],
                4 => vec![&s.xj * &s.v1p, s.v1, s.v2],
                _ => return Err(FamilyError::InvalidParameters(format!("t = {}", t))),
            })
        }
        IdealKind::JSigma(i, sigma, r) => {
            let s = building_blocks(sigma, r)?;
            Ok(match i {
                1 => vec![s.v1.clone(), s.v2.clone(), &s.v1p * &s.v2p, &s.v1pp * &s.v2pp],
                2 => vec![s.v1.clone(), s.v2.clone(), &s.v1p * &s.v2pp, &s.v1pp * &s.v2p],
                _ => return Err(FamilyError::InvalidParameters(format!("J index {}", i))),
            })
        }
        IdealKind::TListSigma(i, sigma, r) => {
            let s = building_blocks(sigma, r)?;
            let (p, q) = match i {
                1 => (&s.v1p * &s.v2pp, &s.v2pp * &s.v2pp),
                2 => (&s.v1pp * &s.v2pp, &s.v2pp * &s.v2pp),
                3 => (&s.v1pp * &s.v2p, &s.v2p * &s.v2p),
                4 => (&s.v1p * &s.v2p, &s.v2p * &s.v2p),
                5 => (&s.v1p * &s.v2pp, &s.v1p * &s.v1p),
                6 => (&s.v1p * &s.v2p, &s.v1p * &s.v1p),
                7 => (&s.v1pp * &s.v2pp, &s.v1pp * &s.v1pp),
                8 => (&s.v1pp * &s.v2p, &s.v1pp * &s.v1pp),
                _ => return Err(FamilyError::InvalidParameters(format!("T index {}", i))),
            };
            Ok(vec![s.v1, s.v2, p, q])
        }
    }
}

/// Lambda(lambda, Gamma) = x4 * Gamma + [[0, -alpha^t], [alpha, 0]].
pub fn build_six_gen(lambda: &CurvePoint, gamma: &GammaBlock) -> Result<PolyMatrix, FamilyError> {
    let k = lambda.field().clone();
    if gamma.field() != &k {
        return Err(FamilyError::Field(FieldError::FieldMismatch));
    }
    let alpha = curve_alpha(lambda);
    let zero3 = PolyMatrix::zeros(&k, 3, 3);
    let base = PolyMatrix::block(&[vec![zero3.clone(), alpha.transpose().neg()], vec![alpha, zero3]])?;
    let g = gamma.matrix().scale(&x(&k, 4));
    Ok(base.add(&g)?)
}

fn const_matrix(k: &NumberField, rows: Vec<Vec<FieldElement>>) -> PolyMatrix {
    mat(k, rows.into_iter().map(|r| r.into_iter().map(Polynomial::constant).collect()).collect())
}

/// (U, V) with U * alpha_lambda^t = alpha_{lambda^t} * V, for lambda = [a:b:1].
pub fn transport_matrices(lambda: &CurvePoint) -> Result<(PolyMatrix, PolyMatrix), FamilyError> {
    if lambda.chart() != CurveChart::Affine {
        return Err(FamilyError::ChartMismatch("transport matrices need lambda = [a:b:1]".into()));
    }
    let k = lambda.field().clone();
    let (a, b) = (lambda.a().clone(), lambda.b().clone());
    let one = k.one();
    let b2 = &b * &b;
    if !a.is_zero() {
        let a1 = &a + &one;
        let ba1 = &b * &a1;
        let a12 = &a1 * &a1;
        let u = const_matrix(
            &k,
            vec![
                vec![b2.clone(), ba1.clone(), -&a12],
                vec![-&a12, b2.clone(), -&ba1],
                vec![ba1.clone(), a12.clone(), b2.clone()],
            ],
        );
        let v = u.transpose();
        Ok((u, v))
    } else {
        let two = k.int(2);
        let u = const_matrix(
            &k,
            vec![
                vec![-&b2, -&b, one.clone()],
                vec![-&(&two * &b), one.clone(), b2.clone()],
                vec![&two * &b2, &two * &b, one.clone()],
            ],
        );
        let v = const_matrix(
            &k,
            vec![
                vec![one.clone(), -&(&two * &b), &two * &b2],
                vec![-&b, -&b2, -&one],
                vec![-&b, -&b2, two.clone()],
            ],
        );
        Ok((u, v))
    }
}

/// U = [[0, T1], [T2, 0]] for lambda = [1:b:0], with the common factor
/// 1/sqrt(3) of T1 and T2 dropped. U * Lambda * U^t is therefore 3 times the
/// transported matrix; [`chart_transport_apply`] divides by 3. The (2,1)
/// entry of T2 is 2b; the printed 2 breaks the target shape (docs/ERRATA.md).
pub fn chart_transport(lambda: &CurvePoint) -> Result<PolyMatrix, FamilyError> {
    let k = lambda.field().clone();
    let [h0, h1, h2] = lambda.homogeneous();
    if !h2.is_zero() {
        return Err(FamilyError::ChartMismatch("chart transport needs lambda = [1:b:0]".into()));
    }
    let b = h1.checked_div(&h0)?;
    let b2 = &b * &b;
    let (zero, one, two) = (k.zero(), k.one(), k.int(2));
    let t1 = const_matrix(
        &k,
        vec![
            vec![b.clone(), b2.clone(), zero.clone()],
            vec![zero.clone(), one.clone(), -&b2],
            vec![two.clone(), zero.clone(), one.clone()],
        ],
    );
    let t2 = const_matrix(
        &k,
        vec![
            vec![-&one, b.clone(), b.clone()],
            vec![&two * &b, b2.clone(), b2.clone()],
            vec![-&(&two * &b2), one.clone(), -&two],
        ],
    );
    let z = PolyMatrix::zeros(&k, 3, 3);
    Ok(PolyMatrix::block(&[vec![z.clone(), t1], vec![t2, z]])?)
}

/// Lambda' = (1/3) * U * Lambda * U^t with U from [`chart_transport`].
pub fn chart_transport_apply(lambda: &CurvePoint, big_lambda: &PolyMatrix) -> Result<PolyMatrix, FamilyError> {
    let u = chart_transport(lambda)?;
    let k = lambda.field();
    let third = k.rat(1, 3);
    Ok(u.mul(big_lambda)?.mul(&u.transpose())?.scale_const(&third))
}

/// Lambda for a point [1:b:0] (alpha from the [l:1:0] chart, l = 1/b).
pub fn build_six_gen_any_chart(lambda: &CurvePoint, gamma: &GammaBlock) -> Result<PolyMatrix, FamilyError> {
    let k = lambda.field().clone();
    let alpha = curve_alpha(lambda);
    let zero3 = PolyMatrix::zeros(&k, 3, 3);
    let base = PolyMatrix::block(&[vec![zero3.clone(), alpha.transpose().neg()], vec![alpha, zero3]])?;
    Ok(base.add(&gamma.matrix().scale(&x(&k, 4)))?)
}

/// The explicit 6x6 skew matrix, the five points and five quadrics of the
/// five-general-points example (u = w).
pub struct FivePointsExample {
    pub a: PolyMatrix,
    pub quadrics: Vec<Polynomial>,
    pub points: Vec<SurfacePoint>,
}

pub fn five_points_example() -> FivePointsExample {
    let k = NumberField::eisenstein();
    let p = |s: &str| Polynomial::parse(&k, &s.replace('u', "w")).expect("literal");
    let entries: [((usize, usize), &str); 15] = [
        ((1, 2), "(-3u-2)x3+(2u-1)x4"),
        ((1, 3), "-u x1+(-2u+1)x2+(u+1)x3+u x4"),
        ((1, 4), "(u-2)x1-x2+(-3u-4)x3+(2u-1)x4"),
        ((1, 5), "(u+1)x3-u x4"),
        ((1, 6), "-u x1+(u+1)x2+(1/7u+3/7)x3+(-3/7u-2/7)x4"),
        ((2, 3), "(u-2)x1-x2+x3+(-u+2)x4"),
        ((2, 4), "(3u+2)x1+(2u+3)x2+4u x3+x4"),
        ((2, 5), "(-3u-1)x3+(u-2)x4"),
        ((2, 6), "(-u-2)x1+(-u+1)x2+(-u-1)x3+u x4"),
        ((3, 4), "-3x3"),
        ((3, 5), "(u+1)x3"),
        ((3, 6), "(-6/7u-4/7)x3+x4"),
        ((4, 5), "(-3u-1)x3"),
        ((4, 6), "-u x3+u x4"),
        ((5, 6), "-x1-u x2"),
    ];
    let mut a = PolyMatrix::zeros(&k, 6, 6);
    for ((i, j), s) in entries {
        let e = p(s);
        a.set(j - 1, i - 1, -&e);
        a.set(i - 1, j - 1, e);
    }
    let quadrics = [
        "x2x4+u x3x4",
        "-u x2x3+u x3x4",
        "x1x4+x4^2-(1-u)x3x4",
        "u(x1+x3)x3+2x3x4",
        "-x3x4-x1^2+u x1x2-u^2x2^2+x3^2+x4^2",
    ]
    .iter()
    .map(|s| p(s))
    .collect();
    let points = ["1:0:0:-1", "1:0:-1:0", "1:-1:0:0", "1:-w:0:0", "1:-w:1:-w"]
        .iter()
        .map(|s| SurfacePoint::parse(&k, s).expect("point on V(f)"))
        .collect();
    FivePointsExample { a, quadrics, points }
}

/// Addressable family members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyId {
    Rank1 { kind: Rank1Kind, roots: RootData },
    CurveAlpha { point: CurvePoint },
    Lambda { psi: bool, point: SurfacePoint },
    Sigma { psi: bool, sigma: SigmaPerm, roots: RootData },
    TSigma { t: u8, psi: bool, sigma: SigmaPerm, roots: RootData },
    FiveGen { kind: FiveKind, partner: bool, sigma: SigmaPerm, roots: RootData, normalized: bool },
    SixGen { point: CurvePoint, gamma: GammaBlock },
}

impl FamilyId {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Rank1 { kind, .. } => match kind {
                Rank1Kind::Alpha3 => "alpha3",
                Rank1Kind::Beta3 => "beta3",
                Rank1Kind::Eta3 => "eta3",
                Rank1Kind::Theta3 => "theta3",
            },
            FamilyId::CurveAlpha { .. } => "curve_alpha",
            FamilyId::Lambda { psi, .. } => if *psi { "psi_lambda" } else { "phi_lambda" },
            FamilyId::Sigma { psi, .. } => if *psi { "psi_sigma" } else { "phi_sigma" },
            FamilyId::TSigma { psi, .. } => if *psi { "psi_t_sigma" } else { "phi_t_sigma" },
            FamilyId::FiveGen { kind, partner, .. } => match (kind, partner) {
                (FiveKind::Rho, false) => "rho",
                (FiveKind::Rho, true) => "omega",
                (FiveKind::Mu, false) => "mu",
                (FiveKind::Mu, true) => "nu",
                (FiveKind::Mubar, false) => "mubar",
                (FiveKind::Mubar, true) => "nubar",
            },
            FamilyId::SixGen { .. } => "six_gen",
        }
    }

    pub fn field(&self) -> NumberField {
        match self {
            FamilyId::Rank1 { roots, .. }
            | FamilyId::Sigma { roots, .. }
            | FamilyId::TSigma { roots, .. }
            | FamilyId::FiveGen { roots, .. } => roots.field().clone(),
            FamilyId::CurveAlpha { point } | FamilyId::SixGen { point, .. } => point.field().clone(),
            FamilyId::Lambda { point, .. } => point.field().clone(),
        }
    }

    /// The matrix, its partner, and the polynomial they factor.
    pub fn build(&self) -> Result<(PolyMatrix, PolyMatrix, Polynomial), FamilyError> {
        let k = self.field();
        let f = Polynomial::fermat(&k);
        let swap = |(p, q): (PolyMatrix, PolyMatrix), flip: bool| if flip { (q, p) } else { (p, q) };
        Ok(match self {
            FamilyId::Rank1 { kind, roots } => {
                let m = rank1_matrix(*kind, roots)?;
                let adj = m.adjugate()?;
                (m, adj, f)
            }
            FamilyId::CurveAlpha { point } => {
                let m = curve_alpha(point);
                let adj = m.adjugate()?;
                (m, adj, Polynomial::fermat3(&k))
            }
            FamilyId::Lambda { psi, point } => {
                let (p, q) = swap((phi_lambda(point), psi_lambda(point)), *psi);
                (p, q, f)
            }
            FamilyId::Sigma { psi, sigma, roots } => {
                let s = building_blocks(sigma, roots)?;
                let beta = default_beta(&s);
                let (p, q) = swap((phi_sigma_beta(&s, &beta), psi_sigma_beta(&s, &beta)), *psi);
                (p, q, f)
            }
            FamilyId::TSigma { t, psi, sigma, roots } => {
                let s = building_blocks(sigma, roots)?;
                let (p, q) = swap(nonorientable_pair(*t, &s)?, *psi);
                (p, q, f)
            }
            FamilyId::FiveGen { kind, partner, sigma, roots, normalized } => {
                let s = building_blocks(sigma, roots)?;
                let (p, q) = swap(five_gen_pair(*kind, &s, *normalized)?, *partner);
                (p, q, f)
            }
            FamilyId::SixGen { point, gamma } => {
                let m = build_six_gen(point, gamma)?;
                let adj = m.pfaffian_adjoint()?;
                (m, adj, f)
            }
        })
    }

    pub fn matrix(&self) -> Result<PolyMatrix, FamilyError> {
        Ok(self.build()?.0)
    }

    pub fn verify(&self) -> Result<MatrixFactorization, FamilyError> {
        let (p, q, f) = self.build()?;
        Ok(verify_matrix_factorization(&p, &q, &f)?)
    }

    /// Parses `name:key=value,...`, e.g. `phi_t_sigma:t=1,sigma=234,a=-1,b=-w,u=w`.
    pub fn parse(text: &str) -> Result<FamilyId, FamilyError> {
        let bad = |m: &str| FamilyError::InvalidParameters(m.to_string());
        let (name, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, val) = item.split_once('=').ok_or_else(|| bad(&format!("expected key=value in {:?}", item)))?;
            if kv.insert(key.trim().to_string(), val.trim().to_string()).is_some() {
                return Err(bad(&format!("duplicate key {}", key.trim())));
            }
        }
        let k = if kv.values().any(|v| v.contains('g')) {
            NumberField::eisenstein_cbrt2()
        } else {
            NumberField::eisenstein()
        };
        let mut take = |key: &str| kv.remove(key).ok_or_else(|| bad(&format!("missing parameter {}", key)));
        let fe = |s: String| FieldElement::parse(&k, &s).map_err(FamilyError::from);
        let sigma_roots = |take: &mut dyn FnMut(&str) -> Result<String, FamilyError>| -> Result<(SigmaPerm, RootData), FamilyError> {
            let sigma = SigmaPerm::parse(&take("sigma")?)?;
            let roots = RootData::new(fe(take("a")?)?, fe(take("b")?)?, fe(take("u")?)?)?;
            Ok((sigma, roots))
        };
        let id = match name {
            "alpha3" | "beta3" => {
                let kind = if name == "alpha3" { Rank1Kind::Alpha3 } else { Rank1Kind::Beta3 };
                let (b, c, d, eps) = (fe(take("b")?)?, fe(take("c")?)?, fe(take("d")?)?, fe(take("eps")?)?);
                let roots = RootData::alpha(b, c, d, eps)?;
                FamilyId::Rank1 { kind, roots }
            }
            "eta3" => {
                let (a, b, c, eps) = (fe(take("a")?)?, fe(take("b")?)?, fe(take("c")?)?, fe(take("eps")?)?);
                FamilyId::Rank1 { kind: Rank1Kind::Eta3, roots: RootData::distinct_triple(a, b, c, Some(eps))? }
            }
            "theta3" => {
                let (a, b, c) = (fe(take("a")?)?, fe(take("b")?)?, fe(take("c")?)?);
                FamilyId::Rank1 { kind: Rank1Kind::Theta3, roots: RootData::distinct_triple(a, b, c, None)? }
            }
            "curve_alpha" => FamilyId::CurveAlpha { point: CurvePoint::parse(&k, &take("lambda")?)? },
            "phi_lambda" | "psi_lambda" => FamilyId::Lambda {
                psi: name == "psi_lambda",
                point: SurfacePoint::parse(&k, &take("lambda")?)?,
            },
            "phi_sigma" | "psi_sigma" => {
                let (sigma, roots) = sigma_roots(&mut take)?;
                FamilyId::Sigma { psi: name == "psi_sigma", sigma, roots }
            }
            "phi_t_sigma" | "psi_t_sigma" => {
                let t: u8 = take("t")?.parse().map_err(|_| bad("t must be 1..4"))?;
                if !(1..=4).contains(&t) {
                    return Err(bad("t must be 1..4"));
                }
                let (sigma, roots) = sigma_roots(&mut take)?;
                FamilyId::TSigma { t, psi: name == "psi_t_sigma", sigma, roots }
            }
            "rho" | "omega" | "mu" | "nu" | "mubar" | "nubar" => {
                let kind = match name {
                    "rho" | "omega" => FiveKind::Rho,
                    "mu" | "nu" => FiveKind::Mu,
                    _ => FiveKind::Mubar,
                };
                let partner = matches!(name, "omega" | "nu" | "nubar");
                let (sigma, roots) = sigma_roots(&mut take)?;
                let normalized = match kv.remove("normalized").as_deref() {
                    None | Some("true") => true,
                    Some("false") => false,
                    Some(v) => return Err(bad(&format!("normalized={}", v))),
                };
                if kind == FiveKind::Mubar && !normalized {
                    return Err(bad("mubar has only the normalized form"));
                }
                FamilyId::FiveGen { kind, partner, sigma, roots, normalized }
            }
            "six_gen" => {
                let point = CurvePoint::parse(&k, &take("lambda")?)?;
                let vals = take("gamma")?;
                let entries = vals.split(';').map(|s| fe(s.to_string())).collect::<Result<Vec<_>, _>>()?;
                let gamma = GammaBlock::from_slice(&k, &entries).map_err(|e| bad(&e))?;
                FamilyId::SixGen { point, gamma }
            }
            _ => return Err(bad(&format!("unknown family {:?}", name))),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(bad(&format!("unexpected parameter {}", extra)));
        }
        Ok(id)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name())?;
        match self {
            FamilyId::Rank1 { kind, roots } => match kind {
                Rank1Kind::Alpha3 | Rank1Kind::Beta3 => write!(
                    f,
                    "b={},c={},d={},eps={}",
                    roots.b,
                    roots.c.as_ref().unwrap(),
                    roots.d.as_ref().unwrap(),
                    roots.eps.as_ref().unwrap()
                ),
                Rank1Kind::Eta3 => write!(
                    f,
                    "a={},b={},c={},eps={}",
                    roots.a,
                    roots.b,
                    roots.c.as_ref().unwrap(),
                    roots.eps.as_ref().unwrap()
                ),
                Rank1Kind::Theta3 => write!(f, "a={},b={},c={}", roots.a, roots.b, roots.c.as_ref().unwrap()),
            },
            FamilyId::CurveAlpha { point } => write!(f, "lambda={}", point),
            FamilyId::Lambda { point, .. } => write!(f, "lambda={}", point),
            FamilyId::Sigma { sigma, roots, .. } => write!(f, "sigma={},a={},b={},u={}", sigma, roots.a, roots.b, roots.u),
            FamilyId::TSigma { t, sigma, roots, .. } => {
                write!(f, "t={},sigma={},a={},b={},u={}", t, sigma, roots.a, roots.b, roots.u)
            }
            FamilyId::FiveGen { sigma, roots, normalized, .. } => {
                write!(f, "sigma={},a={},b={},u={}", sigma, roots.a, roots.b, roots.u)?;
                if !normalized {
                    write!(f, ",normalized=false")?;
                }
                Ok(())
            }
            FamilyId::SixGen { point, gamma } => {
                let g: Vec<String> = gamma.entries().iter().map(|c| c.to_string()).collect();
                write!(f, "lambda={},gamma={}", point, g.join(";"))
            }
        }
    }
}

/// All (sigma, a, b, u) tuples over Q(w): 3 * 3 * 3 * 2 = 54.
pub fn sigma_root_tuples() -> Vec<(SigmaPerm, RootData)> {
    let k = NumberField::eisenstein();
    let t = special_roots(&k).expect("Q(w) has w");
    let mut out = vec![];
    for sigma in SigmaPerm::ALL {
        for a in &t.roots_of_minus_one {
            for b in &t.roots_of_minus_one {
                for u in &t.primitive_cube_roots {
                    out.push((sigma, RootData::new(a.clone(), b.clone(), u.clone()).unwrap()));
                }
            }
        }
    }
    out
}

/// The 108 orientable (phi_sigma, psi_sigma) instances.
pub fn orientable_catalog() -> Vec<FamilyId> {
    let mut out = vec![];
    for psi in [false, true] {
        for (sigma, roots) in sigma_root_tuples() {
            out.push(FamilyId::Sigma { psi, sigma, roots });
        }
    }
    out
}

/// The 432 non-orientable four-generated instances phi_{t sigma}, psi_{t sigma}.
pub fn nonorientable_4gen_catalog() -> Vec<FamilyId> {
    let mut out = vec![];
    for t in 1..=4u8 {
        for psi in [false, true] {
            for (sigma, roots) in sigma_root_tuples() {
                out.push(FamilyId::TSigma { t, psi, sigma, roots });
            }
        }
    }
    out
}

/// The 162 normalized five-generated instances rho, mu, mubar.
pub fn five_gen_catalog() -> Vec<FamilyId> {
    let mut out = vec![];
    for kind in [FiveKind::Rho, FiveKind::Mu, FiveKind::Mubar] {
        for (sigma, roots) in sigma_root_tuples() {
            out.push(FamilyId::FiveGen { kind, partner: false, sigma, roots, normalized: true });
        }
    }
    out
}

/// The "1 sigma" five-generated instances rho_1 and mu_1.
pub fn five_gen_unnormalized_catalog() -> Vec<FamilyId> {
    let mut out = vec![];
    for kind in [FiveKind::Rho, FiveKind::Mu] {
        for (sigma, roots) in sigma_root_tuples() {
            out.push(FamilyId::FiveGen { kind, partner: false, sigma, roots, normalized: false });
        }
    }
    out
}

/// All parameter tuples of the three-generated families: 54 alpha, 54 beta,
/// 12 eta, 6 theta.
pub fn rank1_catalog() -> Vec<FamilyId> {
    let k = NumberField::eisenstein();
    let t = special_roots(&k).expect("Q(w) has w");
    let r = &t.roots_of_minus_one;
    let mut out = vec![];
    for kind in [Rank1Kind::Alpha3, Rank1Kind::Beta3] {
        for b in r {
            for c in r {
                for d in r {
                    for eps in &t.primitive_cube_roots {
                        let roots = RootData::alpha(b.clone(), c.clone(), d.clone(), eps.clone()).unwrap();
                        out.push(FamilyId::Rank1 { kind, roots });
                    }
                }
            }
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in perms {
        for eps in &t.primitive_cube_roots {
            let roots =
                RootData::distinct_triple(r[p[0]].clone(), r[p[1]].clone(), r[p[2]].clone(), Some(eps.clone())).unwrap();
            out.push(FamilyId::Rank1 { kind: Rank1Kind::Eta3, roots });
        }
    }
    for p in perms {
        let roots = RootData::distinct_triple(r[p[0]].clone(), r[p[1]].clone(), r[p[2]].clone(), None).unwrap();
        out.push(FamilyId::Rank1 { kind: Rank1Kind::Theta3, roots });
    }
    out
}

/// Sample points of V(f) in all three charts (at least 20).
pub fn sample_surface_points() -> Vec<SurfacePoint> {
    let k = NumberField::eisenstein();
    let t = special_roots(&k).unwrap();
    let r = &t.roots_of_minus_one;
    let zero = k.zero();
    let mut out = vec![];
    // [l1:l2:l3:1] with one coordinate zero and the others cube roots of -1
    // paired so that the sum of cubes vanishes: l1^3 + l2^3 = 0 needs l2 = -l1 w^k.
    for a in r {
        out.push(SurfacePoint::new(SurfaceChart::Affine, vec![zero.clone(), zero.clone(), a.clone()]).unwrap());
        out.push(SurfacePoint::new(SurfaceChart::Affine, vec![a.clone(), zero.clone(), zero.clone()]).unwrap());
        out.push(SurfacePoint::new(SurfaceChart::Affine, vec![zero.clone(), a.clone(), zero.clone()]).unwrap());
    }
    for a in r {
        for b in r {
            // a^3 + (-b)^3 + ... : [a : -b : -1 ... ] keep f = a^3 - b^3 + 0 + 1 - 1
            let p = SurfacePoint::new(SurfaceChart::Affine, vec![a.clone(), -b, -a.clone() * k.zero() + k.one()]);
            if let Ok(p) = p {
                out.push(p);
            }
        }
    }
    for a in r {
        out.push(SurfacePoint::new(SurfaceChart::Plane, vec![a.clone(), zero.clone()]).unwrap());
        out.push(SurfacePoint::new(SurfaceChart::Plane, vec![zero.clone(), a.clone()]).unwrap());
        out.push(SurfacePoint::new(SurfaceChart::Line, vec![a.clone()]).unwrap());
    }
    for a in r {
        for b in r {
            let c = -(a * b);
            if let Ok(p) = SurfacePoint::new(SurfaceChart::Affine, vec![a.clone(), k.one(), c]) {
                out.push(p);
            }
        }
    }
    out
}
