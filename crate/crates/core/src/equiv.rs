//! Equivalence tools: reduction modulo m^2, scalar equivalence, skew
//! symmetrizers, Fitting-type invariants and class enumeration.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::families::{
    five_gen_catalog, nonorientable_4gen_catalog, rank1_catalog, FamilyError, FamilyId, Rank1Kind,
};
use crate::field::{FieldElement, NumberField};
use crate::linalg::FMatrix;
use crate::matrix::{MatrixError, PolyMatrix};
use crate::poly::{Monomial, Polynomial};

/// Above this many free parameters the determinant test falls back to evaluation.
pub const SYMBOLIC_PARAM_LIMIT: usize = 12;
const FALLBACK_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("field mismatch")]
    FieldMismatch,
    #[error("unknown catalog {0:?}")]
    UnknownCatalog(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// A matrix whose entries are all homogeneous linear forms or zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedMatrix(PolyMatrix);

impl ReducedMatrix {
    pub fn matrix(&self) -> &PolyMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> PolyMatrix {
        self.0
    }
}

/// Entrywise degree-one part.
pub fn linear_reduction(m: &PolyMatrix) -> ReducedMatrix {
    ReducedMatrix(m.map(|p| p.linear_part()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    EquivalentWithWitness,
    NotEquivalent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub outcome: Outcome,
    /// (U, V) for scalar equivalence; (T, Id) for skew symmetrizers.
    pub witness: Option<(FMatrix, FMatrix)>,
    /// Dimension of the solution space of the linear conditions.
    pub parameters: usize,
}

impl EquivalenceVerdict {
    fn new(outcome: Outcome, witness: Option<(FMatrix, FMatrix)>, parameters: usize) -> Self {
        EquivalenceVerdict { outcome, witness, parameters }
    }
}

/// Polynomials in the solution-space parameters t_1..t_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPoly {
    nvars: usize,
    field: NumberField,
    terms: BTreeMap<Vec<u8>, FieldElement>,
}

impl ParamPoly {
    pub fn zero(field: &NumberField, nvars: usize) -> ParamPoly {
        ParamPoly { nvars, field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: FieldElement, nvars: usize) -> ParamPoly {
        let mut p = Self::zero(c.field(), nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// sum_l c_l t_l
    pub fn linear(field: &NumberField, coeffs: &[FieldElement]) -> ParamPoly {
        let n = coeffs.len();
        let mut p = Self::zero(field, n);
        for (l, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; n];
                e[l] = 1;
                p.terms.insert(e, c.clone());
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let v = match out.terms.get(e) {
                Some(x) => x + c,
                None => c.clone(),
            };
            if v.is_zero() {
                out.terms.remove(e);
            } else {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn neg(&self) -> ParamPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut acc: BTreeMap<Vec<u8>, FieldElement> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u8> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let v = c1 * c2;
                let slot = acc.entry(e).or_insert_with(|| self.field.zero());
                *slot = &*slot + &v;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        ParamPoly { nvars: self.nvars, field: self.field.clone(), terms: acc }
    }

    pub fn eval(&self, t: &[FieldElement]) -> FieldElement {
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (x, &k) in t.iter().zip(e) {
                if k > 0 {
                    v = &v * &x.pow(k as u32);
                }
            }
            acc = &acc + &v;
        }
        acc
    }
}

/// Determinant of a square matrix of parameter polynomials by expansion over row prefixes.
pub fn param_determinant(m: &[Vec<ParamPoly>]) -> ParamPoly {
    let n = m.len();
    let (field, nv) = (m[0][0].field.clone(), m[0][0].nvars);
    let mut dp: HashMap<u32, ParamPoly> = HashMap::new();
    dp.insert(0, ParamPoly::constant(field.one(), nv));
    for row in m.iter() {
        let mut next: HashMap<u32, ParamPoly> = HashMap::new();
        for (mask, val) in &dp {
            for (c, entry) in row.iter().enumerate() {
                if mask & (1 << c) != 0 || entry.is_zero() {
                    continue;
                }
                let mut term = val.mul(entry);
                if (mask >> (c + 1)).count_ones() % 2 == 1 {
                    term = term.neg();
                }
                let slot = next.entry(mask | (1 << c)).or_insert_with(|| ParamPoly::zero(&field, nv));
                *slot = slot.add(&term);
            }
        }
        next.retain(|_, v| !v.is_zero());
        dp = next;
    }
    dp.remove(&((1u32 << n) - 1)).unwrap_or_else(|| ParamPoly::zero(&field, nv))
}

/// Linear conditions sum_u z_u P_u = C on unknowns z, matched coefficientwise.
struct LinearPolySystem {
    unknowns: usize,
    exprs: Vec<(Vec<(usize, Polynomial)>, Polynomial)>,
}

impl LinearPolySystem {
    fn matrix(&self, field: &NumberField) -> FMatrix {
        let mut m = FMatrix::zeros(field, 0, self.unknowns + 1);
        for (terms, rhs) in &self.exprs {
            let mut rows: BTreeMap<Monomial, Vec<FieldElement>> = BTreeMap::new();
            let mut touch = |mon: &Monomial| {
                rows.entry(*mon).or_insert_with(|| vec![field.zero(); self.unknowns + 1]);
            };
            for (_, p) in terms {
                p.terms().for_each(|(mon, _)| touch(mon));
            }
            rhs.terms().for_each(|(mon, _)| touch(mon));
            for (u, p) in terms {
                for (mon, c) in p.terms() {
                    let row = rows.get_mut(mon).unwrap();
                    row[*u] = &row[*u] + c;
                }
            }
            for (mon, c) in rhs.terms() {
                let row = rows.get_mut(mon).unwrap();
                row[self.unknowns] = &row[self.unknowns] + c;
            }
            for (_, r) in rows {
                if r.iter().any(|x| !x.is_zero()) {
                    m.push_row(r);
                }
            }
        }
        m
    }

    /// Basis of the homogeneous solution space.
    fn kernel(&self, field: &NumberField) -> Vec<Vec<FieldElement>> {
        let full = self.matrix(field);
        let mut hom = FMatrix::zeros(field, 0, self.unknowns);
        for i in 0..full.rows {
            hom.push_row(full.row(i)[..self.unknowns].to_vec());
        }
        if hom.rows == 0 {
            return (0..self.unknowns)
                .map(|i| (0..self.unknowns).map(|j| if i == j { field.one() } else { field.zero() }).collect())
                .collect();
        }
        hom.nullspace()
    }

    /// One solution of the inhomogeneous system, if any.
    fn particular(&self, field: &NumberField) -> Option<Vec<FieldElement>> {
        let mut m = self.matrix(field);
        if m.rows == 0 {
            return Some(vec![field.zero(); self.unknowns]);
        }
        let pivots = m.rref();
        if pivots.contains(&self.unknowns) {
            return None;
        }
        let mut z = vec![field.zero(); self.unknowns];
        for (r, &p) in pivots.iter().enumerate() {
            z[p] = m.get(r, self.unknowns).clone();
        }
        Some(z)
    }
}

fn unknown_matrix(field: &NumberField, rows: usize, cols: usize, offset: usize, z: &[FieldElement]) -> FMatrix {
    let mut m = FMatrix::zeros(field, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, z[offset + i * cols + j].clone());
        }
    }
    m
}

fn combine(basis: &[Vec<FieldElement>], t: &[FieldElement], field: &NumberField) -> Vec<FieldElement> {
    let n = basis.first().map_or(0, |b| b.len());
    let mut z = vec![field.zero(); n];
    for (b, c) in basis.iter().zip(t) {
        if c.is_zero() {
            continue;
        }
        for i in 0..n {
            z[i] = &z[i] + &(&b[i] * c);
        }
    }
    z
}

fn param_matrix(field: &NumberField, basis: &[Vec<FieldElement>], size: usize, offset: usize) -> Vec<Vec<ParamPoly>> {
    (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let coeffs: Vec<FieldElement> = basis.iter().map(|b| b[offset + i * size + j].clone()).collect();
                    ParamPoly::linear(field, &coeffs)
                })
                .collect()
        })
        .collect()
}

/// Deterministic parameter tuples: all ones, unit-and-ones patterns, then a seeded sequence.
fn witness_tuples(field: &NumberField, k: usize, count: usize) -> impl Iterator<Item = Vec<FieldElement>> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let w = if field.degree() >= 2 { Some(field.generator(1)) } else { None };
    (0..count).map(move |n| match n {
        0 => vec![field.one(); k],
        1 => (0..k).map(|i| field.int(i as i64 + 1)).collect(),
        _ => (0..k)
            .map(|_| {
                let mut v = field.int(rng.gen_range(-9..=9));
                if let Some(w) = &w {
                    v = &v + &(&field.int(rng.gen_range(-9..=9)) * w);
                }
                v
            })
            .collect(),
    })
}

/// Decides whether some point of the span of `basis` makes every listed
/// square block invertible; returns the parameter tuple when found.
fn invertible_point(
    field: &NumberField,
    basis: &[Vec<FieldElement>],
    blocks: &[(usize, usize)],
) -> (Outcome, Option<Vec<FieldElement>>) {
    let k = basis.len();
    if k == 0 {
        return (Outcome::NotEquivalent, None);
    }
    let test = |t: &[FieldElement]| {
        let z = combine(basis, t, field);
        blocks.iter().all(|&(size, off)| !unknown_matrix(field, size, size, off, &z).determinant().is_zero())
    };
    for t in witness_tuples(field, k, FALLBACK_POINTS) {
        if test(&t) {
            return (Outcome::EquivalentWithWitness, Some(t));
        }
    }
    if k > SYMBOLIC_PARAM_LIMIT {
        return (Outcome::Inconclusive, None);
    }
    for &(size, off) in blocks {
        if param_determinant(&param_matrix(field, basis, size, off)).is_zero() {
            return (Outcome::NotEquivalent, None);
        }
    }
    // Every determinant is a nonzero polynomial, so their product is too:
    // keep drawing points until one avoids its zero set.
    for t in witness_tuples(field, k, 4096).skip(FALLBACK_POINTS) {
        if test(&t) {
            return (Outcome::EquivalentWithWitness, Some(t));
        }
    }
    (Outcome::Inconclusive, None)
}

/// Constant invertible U, V with U * a = b * V.
pub fn scalar_equivalence(a: &ReducedMatrix, b: &ReducedMatrix) -> Result<EquivalenceVerdict, EquivError> {
    constant_equivalence(a.matrix(), b.matrix())
}

/// Constant invertible U, V with U * A = B * V for arbitrary polynomial
/// matrices; a witness makes Coker A and Coker B isomorphic.
pub fn constant_equivalence(a: &PolyMatrix, b: &PolyMatrix) -> Result<EquivalenceVerdict, EquivError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(EquivError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.field() != b.field() {
        return Err(EquivError::FieldMismatch);
    }
    let field = a.field().clone();
    let (n, m) = (a.rows(), a.cols());
    let voff = n * n;
    let mut exprs = vec![];
    for i in 0..n {
        for j in 0..m {
            let mut terms = vec![];
            for k in 0..n {
                if !a.get(k, j).is_zero() {
                    terms.push((i * n + k, a.get(k, j).clone()));
                }
            }
            for k in 0..m {
                if !b.get(i, k).is_zero() {
                    terms.push((voff + k * m + j, -b.get(i, k)));
                }
            }
            exprs.push((terms, Polynomial::zero(&field)));
        }
    }
    let sys = LinearPolySystem { unknowns: n * n + m * m, exprs };
    let basis = sys.kernel(&field);
    let (outcome, t) = invertible_point(&field, &basis, &[(n, 0), (m, voff)]);
    let witness = match t {
        Some(t) => {
            let z = combine(&basis, &t, &field);
            let u = unknown_matrix(&field, n, n, 0, &z);
            let v = unknown_matrix(&field, m, m, voff, &z);
            let lhs = const_poly(&u).mul(a)?;
            let rhs = b.mul(&const_poly(&v))?;
            assert!(lhs == rhs && !u.determinant().is_zero() && !v.determinant().is_zero(), "witness re-check");
            Some((u, v))
        }
        None => None,
    };
    Ok(EquivalenceVerdict::new(outcome, witness, basis.len()))
}

fn const_poly(m: &FMatrix) -> PolyMatrix {
    PolyMatrix::from_fn(m.field(), m.rows, m.cols, |i, j| Polynomial::constant(m.get(i, j).clone()))
}

/// Invertible constant T with T * M skew; with a modulus the entries of
/// T*M + (T*M)^t are reduced by division before matching coefficients.
pub fn skew_symmetrizer_exists(m: &PolyMatrix, modulus: Option<&Polynomial>) -> Result<EquivalenceVerdict, EquivError> {
    if !m.is_square() {
        return Err(EquivError::NotSquare);
    }
    let field = m.field().clone();
    let n = m.rows();
    let reduce = |p: Polynomial| -> Result<Polynomial, EquivError> {
        match modulus {
            Some(g) => p.rem(g).map_err(|err| EquivError::Matrix(MatrixError::Entry { row: 0, col: 0, err })),
            None => Ok(p),
        }
    };
    let mut exprs = vec![];
    for i in 0..n {
        for j in i..n {
            // (T M)_{ij} + (T M)_{ji} = sum_k T_ik M_kj + T_jk M_ki
            let mut terms = vec![];
            for k in 0..n {
                if !m.get(k, j).is_zero() {
                    terms.push((i * n + k, reduce(m.get(k, j).clone())?));
                }
                if !m.get(k, i).is_zero() {
                    terms.push((j * n + k, reduce(m.get(k, i).clone())?));
                }
            }
            exprs.push((terms, Polynomial::zero(&field)));
        }
    }
    let sys = LinearPolySystem { unknowns: n * n, exprs };
    let basis = sys.kernel(&field);
    let (outcome, t) = invertible_point(&field, &basis, &[(n, 0)]);
    let witness = t.map(|t| {
        let z = combine(&basis, &t, &field);
        (unknown_matrix(&field, n, n, 0, &z), FMatrix::identity(&field, n))
    });
    Ok(EquivalenceVerdict::new(outcome, witness, basis.len()))
}

fn linear_coords(p: &Polynomial) -> Vec<FieldElement> {
    (1..=4).map(|i| p.coefficient(&Monomial::var(i))).collect()
}

fn span_basis(field: &NumberField, polys: &[Polynomial], monomials: &[Monomial]) -> FMatrix {
    let mut m = FMatrix::zeros(field, 0, monomials.len());
    for p in polys {
        if !p.is_zero() {
            m.push_row(monomials.iter().map(|mon| p.coefficient(mon)).collect());
        }
    }
    m.row_space_basis()
}

/// Reduced basis of the span of the linear parts of all entries.
pub fn fitting_linear_span(m: &PolyMatrix) -> Vec<Polynomial> {
    let field = m.field();
    let mut rows = FMatrix::zeros(field, 0, 4);
    for p in m.entries() {
        let c = linear_coords(p);
        if c.iter().any(|x| !x.is_zero()) {
            rows.push_row(c);
        }
    }
    let b = rows.row_space_basis();
    (0..b.rows)
        .map(|i| {
            (0..4).fold(Polynomial::zero(field), |acc, j| {
                &acc + &Polynomial::term(Monomial::var(j + 1), b.get(i, j).clone())
            })
        })
        .collect()
}

/// Canonical basis of the span of all k x k minors.
pub fn minor_span(m: &PolyMatrix, k: usize) -> Result<FMatrix, EquivError> {
    let field = m.field();
    let mut minors = vec![];
    for rows in subsets(m.rows(), k) {
        for cols in subsets(m.cols(), k) {
            minors.push(m.submatrix(&rows, &cols).determinant()?);
        }
    }
    let degrees: Vec<u32> = minors.iter().filter_map(|p| p.degree()).collect();
    let mut monomials = vec![];
    let (lo, hi) = (degrees.iter().min().copied().unwrap_or(0), degrees.iter().max().copied().unwrap_or(0));
    for d in lo..=hi {
        monomials.extend(Monomial::of_degree(d));
    }
    Ok(span_basis(field, &minors, &monomials))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// Dimension of the K-span of the rows (as vectors of linear forms).
pub fn row_rank(m: &PolyMatrix) -> usize {
    let field = m.field();
    let mut f = FMatrix::zeros(field, 0, 4 * m.cols());
    for i in 0..m.rows() {
        f.push_row((0..m.cols()).flat_map(|j| linear_coords(m.get(i, j))).collect());
    }
    f.rank()
}

pub fn column_rank(m: &PolyMatrix) -> usize {
    row_rank(&m.transpose())
}

/// Unknown A (right factor) and B (left factor) of total degree at most
/// `degree_bound` with W*A + B*V = C.
pub fn matrix_equation_solvable(
    w: &PolyMatrix,
    v: &PolyMatrix,
    c: &PolyMatrix,
    degree_bound: u32,
) -> Result<Option<(PolyMatrix, PolyMatrix)>, EquivError> {
    let (p, q) = (w.rows(), w.cols());
    let (s, r) = (v.rows(), v.cols());
    if c.rows() != p || c.cols() != r {
        return Err(EquivError::DimensionMismatch("C must be rows(W) x cols(V)".into()));
    }
    let field = w.field().clone();
    let mons: Vec<Monomial> = (0..=degree_bound).flat_map(Monomial::of_degree).collect();
    let nm = mons.len();
    // A: q x r, B: p x s
    let a_idx = |i: usize, j: usize, t: usize| (i * r + j) * nm + t;
    let boff = q * r * nm;
    let b_idx = |i: usize, j: usize, t: usize| boff + (i * s + j) * nm + t;
    let mut exprs = vec![];
    for i in 0..p {
        for j in 0..r {
            let mut terms = vec![];
            for k in 0..q {
                if w.get(i, k).is_zero() {
                    continue;
                }
                for (t, mon) in mons.iter().enumerate() {
                    terms.push((a_idx(k, j, t), w.get(i, k) * &Polynomial::term(*mon, field.one())));
                }
            }
            for k in 0..s {
                if v.get(k, j).is_zero() {
                    continue;
                }
                for (t, mon) in mons.iter().enumerate() {
                    terms.push((b_idx(i, k, t), &Polynomial::term(*mon, field.one()) * v.get(k, j)));
                }
            }
            exprs.push((terms, c.get(i, j).clone()));
        }
    }
    let sys = LinearPolySystem { unknowns: boff + p * s * nm, exprs };
    let Some(z) = sys.particular(&field) else { return Ok(None) };
    let build = |rows: usize, cols: usize, idx: &dyn Fn(usize, usize, usize) -> usize| {
        PolyMatrix::from_fn(&field, rows, cols, |i, j| {
            mons.iter().enumerate().fold(Polynomial::zero(&field), |acc, (t, mon)| {
                &acc + &Polynomial::term(*mon, z[idx(i, j, t)].clone())
            })
        })
    };
    let a = build(q, r, &a_idx);
    let b = build(p, s, &b_idx);
    let check = w.mul(&a)?.add(&b.mul(v)?)?;
    assert_eq!(&check, c, "matrix equation witness re-check");
    Ok(Some((a, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Catalog {
    Rank2_3gen,
    Nonorientable4gen,
    Nonorientable5gen,
}

impl Catalog {
    pub fn parse(s: &str) -> Result<Catalog, EquivError> {
        match s {
            "rank2_3gen" => Ok(Catalog::Rank2_3gen),
            "nonorientable_4gen" => Ok(Catalog::Nonorientable4gen),
            "nonorientable_5gen" => Ok(Catalog::Nonorientable5gen),
            _ => Err(EquivError::UnknownCatalog(s.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Catalog::Rank2_3gen => "rank2_3gen",
            Catalog::Nonorientable4gen => "nonorientable_4gen",
            Catalog::Nonorientable5gen => "nonorientable_5gen",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    IdenticalParams,
    ReducedShape,
    FittingSpan,
    MinorSpan,
    ScalarTest,
    /// The reductions are equivalent and the full matrices are equivalent by constants.
    FullScalarTest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairRecord {
    pub pair: (usize, usize),
    pub method: Evidence,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub family: String,
    pub representatives: Vec<String>,
    pub count: usize,
    /// Orbit sizes under the identification rule, by representative.
    pub orbit_sizes: Vec<usize>,
    pub pairs: Vec<PairRecord>,
    pub equivalent: usize,
    pub inconclusive: usize,
    pub distinct: usize,
}

/// (b, c, d, eps) -> (b eps, c eps, d eps, eps^2) on alpha/beta tuples.
pub fn epsilon_twist(id: &FamilyId) -> Option<FamilyId> {
    let FamilyId::Rank1 { kind, roots } = id else { return None };
    if !matches!(kind, Rank1Kind::Alpha3 | Rank1Kind::Beta3) {
        return None;
    }
    let eps = roots.eps.clone()?;
    let tw = |x: &FieldElement| x * &eps;
    let r = crate::families::RootData::alpha(tw(&roots.b), tw(roots.c.as_ref()?), tw(roots.d.as_ref()?), &eps * &eps).ok()?;
    Some(FamilyId::Rank1 { kind: *kind, roots: r })
}

/// Enumerates all parameter tuples and applies the identification rule.
pub fn enumerate_classes(catalog: Catalog) -> ClassReport {
    let ids: Vec<FamilyId> = match catalog {
        Catalog::Rank2_3gen => rank1_catalog(),
        Catalog::Nonorientable4gen => nonorientable_4gen_catalog(),
        Catalog::Nonorientable5gen => five_gen_catalog(),
    };
    let names: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    // union of each tuple with its twist image; representative = least name
    let mut class_of: BTreeMap<String, String> = BTreeMap::new();
    let mut sizes: BTreeMap<String, usize> = BTreeMap::new();
    for (id, name) in ids.iter().zip(&names) {
        let mut orbit = vec![name.clone()];
        if let Some(t) = epsilon_twist(id) {
            orbit.push(t.to_string());
        }
        orbit.sort();
        orbit.dedup();
        class_of.insert(name.clone(), orbit[0].clone());
    }
    for rep in class_of.values() {
        *sizes.entry(rep.clone()).or_default() += 1;
    }
    let reps: Vec<String> = sizes.keys().cloned().collect();
    ClassReport {
        family: catalog.name().to_string(),
        count: reps.len(),
        orbit_sizes: reps.iter().map(|r| sizes[r]).collect(),
        representatives: reps,
        pairs: vec![],
        equivalent: 0,
        inconclusive: 0,
        distinct: 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct InvariantKey {
    rows: usize,
    cols: usize,
    row_rank: usize,
    col_rank: usize,
    fitting: Vec<String>,
    minors2: Vec<String>,
    minors3: Vec<String>,
}

fn fmatrix_key(m: &FMatrix) -> Vec<String> {
    (0..m.rows).map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect()
}

fn invariant_key(m: &PolyMatrix) -> Result<InvariantKey, EquivError> {
    let small = m.rows().min(m.cols());
    Ok(InvariantKey {
        rows: m.rows(),
        cols: m.cols(),
        row_rank: row_rank(m),
        col_rank: column_rank(m),
        fitting: fitting_linear_span(m).iter().map(|p| p.to_string()).collect(),
        minors2: if small >= 2 { fmatrix_key(&minor_span(m, 2)?) } else { vec![] },
        minors3: if small >= 3 { fmatrix_key(&minor_span(m, 3)?) } else { vec![] },
    })
}

fn first_difference(a: &InvariantKey, b: &InvariantKey) -> Option<Evidence> {
    if a.rows != b.rows || a.cols != b.cols || a.row_rank != b.row_rank || a.col_rank != b.col_rank {
        Some(Evidence::ReducedShape)
    } else if a.fitting != b.fitting {
        Some(Evidence::FittingSpan)
    } else if a.minors2 != b.minors2 || a.minors3 != b.minors3 {
        Some(Evidence::MinorSpan)
    } else {
        None
    }
}

fn fmt_fmatrix(m: &FMatrix) -> String {
    (0..m.rows)
        .map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Pairwise distinctness of the reductions of `reps`. Pairs with differing
/// invariants are distinct without further work; pairs with equal invariants
/// go through the scalar test. A reduced witness only counts as an
/// equivalence when the full matrices are constant-equivalent as well;
/// otherwise the pair is inconclusive.
pub fn pairwise_distinctness(family: &str, names: &[String], reps: &[PolyMatrix]) -> Result<ClassReport, EquivError> {
    let reduced: Vec<ReducedMatrix> = reps.iter().map(linear_reduction).collect();
    let keys: Vec<InvariantKey> =
        reduced.par_iter().map(|r| invariant_key(r.matrix())).collect::<Result<Vec<_>, _>>()?;
    let n = reps.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let records: Vec<PairRecord> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<PairRecord, EquivError> {
            if reps[i] == reps[j] {
                return Ok(PairRecord {
                    pair: (i, j),
                    method: Evidence::IdenticalParams,
                    outcome: Outcome::EquivalentWithWitness,
                    witness: None,
                });
            }
            if let Some(ev) = first_difference(&keys[i], &keys[j]) {
                return Ok(PairRecord { pair: (i, j), method: ev, outcome: Outcome::NotEquivalent, witness: None });
            }
            let v = scalar_equivalence(&reduced[i], &reduced[j])?;
            if v.outcome == Outcome::EquivalentWithWitness {
                let full = constant_equivalence(&reps[i], &reps[j])?;
                return Ok(PairRecord {
                    pair: (i, j),
                    method: Evidence::FullScalarTest,
                    outcome: match full.outcome {
                        Outcome::EquivalentWithWitness => Outcome::EquivalentWithWitness,
                        _ => Outcome::Inconclusive,
                    },
                    witness: full.witness.or(v.witness).map(|(u, w)| (fmt_fmatrix(&u), fmt_fmatrix(&w))),
                });
            }
            Ok(PairRecord {
                pair: (i, j),
                method: Evidence::ScalarTest,
                outcome: v.outcome,
                witness: v.witness.map(|(u, w)| (fmt_fmatrix(&u), fmt_fmatrix(&w))),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let equivalent = records.iter().filter(|r| r.outcome == Outcome::EquivalentWithWitness).count();
    let inconclusive = records.iter().filter(|r| r.outcome == Outcome::Inconclusive).count();
    Ok(ClassReport {
        family: family.to_string(),
        representatives: names.to_vec(),
        count: n,
        orbit_sizes: vec![1; n],
        distinct: records.len() - equivalent - inconclusive,
        pairs: records,
        equivalent,
        inconclusive,
    })
}

/// Distinctness sweep over the reductions of a whole catalog.
pub fn catalog_distinctness(catalog: Catalog) -> Result<ClassReport, EquivError> {
    let ids: Vec<FamilyId> = match catalog {
        Catalog::Rank2_3gen => rank1_catalog(),
        Catalog::Nonorientable4gen => nonorientable_4gen_catalog(),
        Catalog::Nonorientable5gen => five_gen_catalog(),
    };
    let mats = ids.par_iter().map(|id| id.matrix()).collect::<Result<Vec<_>, _>>()?;
    let names: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    pairwise_distinctness(catalog.name(), &names, &mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        building_blocks, curve_alpha, nonorientable_pair, phi_lambda, phi_sigma_beta, default_beta, CurvePoint,
        RootData, SigmaPerm, SurfacePoint,
    };

    fn k() -> NumberField {
        NumberField::eisenstein()
    }

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(&k(), s).unwrap()
    }

    fn roots(a: &str, b: &str, u: &str) -> RootData {
        let kk = k();
        RootData::new(
            FieldElement::parse(&kk, a).unwrap(),
            FieldElement::parse(&kk, b).unwrap(),
            FieldElement::parse(&kk, u).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn param_determinant_small() {
        let kk = k();
        // [[t1, t2], [t2, t1]] -> t1^2 - t2^2
        let t1 = ParamPoly::linear(&kk, &[kk.one(), kk.zero()]);
        let t2 = ParamPoly::linear(&kk, &[kk.zero(), kk.one()]);
        let d = param_determinant(&[vec![t1.clone(), t2.clone()], vec![t2.clone(), t1.clone()]]);
        assert_eq!(d.len(), 2);
        assert!(d.eval(&[kk.int(3), kk.int(3)]).is_zero());
        assert_eq!(d.eval(&[kk.int(3), kk.int(1)]), kk.int(8));
        let z = param_determinant(&[vec![t1.clone(), t1.clone()], vec![t2.clone(), t2.clone()]]);
        assert!(z.is_zero());
    }

    #[test]
    fn reduction_shapes() {
        let s = building_blocks(&SigmaPerm::ALL[0], &roots("-1", "-w", "w")).unwrap();
        let (phi, psi) = nonorientable_pair(1, &s).unwrap();
        let r = linear_reduction(&phi);
        for i in 2..4 {
            for j in 0..4 {
                assert!(r.matrix().get(i, j).is_zero());
            }
        }
        let r = linear_reduction(&psi);
        for i in 0..4 {
            for j in 0..2 {
                assert!(r.matrix().get(i, j).is_zero());
            }
        }
        let lin = PolyMatrix::from_rows(&k(), vec![vec![p("x1"), p("x2")], vec![p("x3"), p("x1+x4")]]).unwrap();
        assert_eq!(linear_reduction(&lin).into_matrix(), lin);
    }

    #[test]
    fn reflexive_scalar_equivalence() {
        let s = building_blocks(&SigmaPerm::ALL[1], &roots("-1", "-w", "w")).unwrap();
        let (phi, _) = nonorientable_pair(2, &s).unwrap();
        let r = linear_reduction(&phi);
        let v = scalar_equivalence(&r, &r).unwrap();
        assert_eq!(v.outcome, Outcome::EquivalentWithWitness);
    }

    #[test]
    fn phi1_psi3_not_equivalent() {
        let s = building_blocks(&SigmaPerm::ALL[0], &roots("-1", "-w", "w")).unwrap();
        let t = building_blocks(&SigmaPerm::ALL[2], &roots("-w", "-1", "-1-w")).unwrap();
        let (phi1, _) = nonorientable_pair(1, &s).unwrap();
        let (_, psi3) = nonorientable_pair(3, &t).unwrap();
        let v = scalar_equivalence(&linear_reduction(&phi1), &linear_reduction(&psi3)).unwrap();
        assert_eq!(v.outcome, Outcome::NotEquivalent);
    }

    #[test]
    fn skew_symmetrizers() {
        let kk = k();
        let x1 = PolyMatrix::identity(&kk, 3).scale(&p("x1"));
        assert_eq!(skew_symmetrizer_exists(&x1, None).unwrap().outcome, Outcome::NotEquivalent);
        let l = CurvePoint::parse(&kk, "0:-1:1").unwrap();
        let al = curve_alpha(&l);
        let z = PolyMatrix::zeros(&kk, 3, 3);
        let d = PolyMatrix::block(&[vec![al.clone(), z.clone()], vec![z.clone(), al.transpose()]]).unwrap();
        let v = skew_symmetrizer_exists(&d, Some(&Polynomial::fermat(&kk))).unwrap();
        assert_eq!(v.outcome, Outcome::EquivalentWithWitness);
        let (t, _) = v.witness.unwrap();
        assert!(const_poly(&t).mul(&d).unwrap().is_skew());
        let mu = CurvePoint::parse(&kk, "-w:0:1").unwrap();
        let d2 = PolyMatrix::block(&[vec![al, z.clone()], vec![z, curve_alpha(&mu)]]).unwrap();
        assert_eq!(skew_symmetrizer_exists(&d2, None).unwrap().outcome, Outcome::NotEquivalent);
    }

    #[test]
    fn fitting_spans() {
        let kk = k();
        let l = SurfacePoint::parse(&kk, "0:0:-1:1").unwrap();
        let span = fitting_linear_span(&phi_lambda(&l));
        assert_eq!(span, vec![p("x1"), p("x2"), p("x3+x4")]);
        let s = building_blocks(&SigmaPerm::ALL[0], &roots("-1", "-1", "w")).unwrap();
        let span = fitting_linear_span(&phi_sigma_beta(&s, &default_beta(&s)));
        assert_eq!(span, vec![p("x1+x4"), p("x2+x3")]);
        assert!(fitting_linear_span(&PolyMatrix::zeros(&kk, 2, 2)).is_empty());
    }

    #[test]
    fn matrix_equations() {
        let kk = k();
        let s = building_blocks(&SigmaPerm::ALL[0], &roots("-1", "-w", "w")).unwrap();
        let w = PolyMatrix::from_rows(&kk, vec![vec![s.w1.clone(), -&s.v2], vec![s.w2.clone(), s.v1.clone()]]).unwrap();
        let v = PolyMatrix::from_rows(&kk, vec![vec![s.v1.clone(), s.v2.clone()], vec![-&s.w2, s.w1.clone()]]).unwrap();
        let c = PolyMatrix::identity(&kk, 2).scale(&(&s.xj * &s.xs));
        assert_eq!(matrix_equation_solvable(&w, &v, &c, 1).unwrap(), None);
        let (a, b) = matrix_equation_solvable(&w, &v, &w, 1).unwrap().unwrap();
        assert_eq!(w.mul(&a).unwrap().add(&b.mul(&v).unwrap()).unwrap(), w);
    }

    #[test]
    fn class_counts() {
        let r = enumerate_classes(Catalog::Rank2_3gen);
        assert_eq!(r.count, 72);
        assert_eq!(r.orbit_sizes.iter().sum::<usize>(), 54 + 54 + 12 + 6);
        assert_eq!(enumerate_classes(Catalog::Nonorientable4gen).count, 432);
        assert_eq!(enumerate_classes(Catalog::Nonorientable5gen).count, 162);
    }

    #[test]
    fn duplicate_flagged() {
        let s = building_blocks(&SigmaPerm::ALL[0], &roots("-1", "-w", "w")).unwrap();
        let (phi, psi) = nonorientable_pair(1, &s).unwrap();
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let r = pairwise_distinctness("t", &names, &[phi.clone(), psi, phi]).unwrap();
        let rec = r.pairs.iter().find(|x| x.pair == (0, 2)).unwrap();
        assert_eq!(rec.method, Evidence::IdenticalParams);
        assert_eq!(r.equivalent, 1);
    }

    // v''(u) = v'(conj u), so the t = 1 phi and the t = 3 psi with conjugate u
    // differ only by signed permutations.
    #[test]
    fn phi1_psi3_conjugate_u_equivalent() {
        for sigma in SigmaPerm::ALL {
            for a in ["-1", "-w", "1+w"] {
                for b in ["-1", "-w", "1+w"] {
                    for (u, ubar) in [("w", "-1-w"), ("-1-w", "w")] {
                        let s = building_blocks(&sigma, &roots(a, b, u)).unwrap();
                        let t = building_blocks(&sigma, &roots(a, b, ubar)).unwrap();
                        let phi1 = nonorientable_pair(1, &s).unwrap().0;
                        let psi3 = nonorientable_pair(3, &t).unwrap().1;
                        let v = constant_equivalence(&phi1, &psi3).unwrap();
                        assert_eq!(v.outcome, Outcome::EquivalentWithWitness);
                        let same = nonorientable_pair(3, &s).unwrap().1;
                        let r = scalar_equivalence(&linear_reduction(&phi1), &linear_reduction(&same)).unwrap();
                        assert_eq!(r.outcome, Outcome::NotEquivalent);
                    }
                }
            }
        }
    }
}
