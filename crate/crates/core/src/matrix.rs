//! Small dense matrices of polynomials: products, determinants, adjugates,
//! Pfaffians and matrix-factorization checks.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldElement, NumberField};
use crate::poly::{PolyError, Polynomial};

pub const MAX_DIM: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not skew-symmetric")]
    NotSkew,
    #[error("dimension {0} has the wrong parity")]
    Parity(usize),
    #[error("dimension {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("field mismatch")]
    FieldMismatch,
    #[error("entry ({row},{col}): {err}")]
    Entry { row: usize, col: usize, err: PolyError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    field: NumberField,
    e: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zeros(field: &NumberField, rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix { rows, cols, field: field.clone(), e: vec![Polynomial::zero(field); rows * cols] }
    }

    pub fn identity(field: &NumberField, n: usize) -> PolyMatrix {
        Self::from_fn(field, n, n, |i, j| {
            if i == j {
                Polynomial::one(field)
            } else {
                Polynomial::zero(field)
            }
        })
    }

    pub fn from_fn(
        field: &NumberField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Polynomial,
    ) -> PolyMatrix {
        let mut e = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                e.push(f(i, j));
            }
        }
        PolyMatrix { rows, cols, field: field.clone(), e }
    }

    pub fn from_rows(field: &NumberField, rows: Vec<Vec<Polynomial>>) -> Result<PolyMatrix, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(MatrixError::DimensionMismatch("ragged rows".into()));
        }
        if rows.iter().flatten().any(|p| p.field() != field) {
            return Err(MatrixError::FieldMismatch);
        }
        Ok(PolyMatrix { rows: r, cols: c, field: field.clone(), e: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    /// Entry (i, j), zero-based.
    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        self.e[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.e
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|p| p.is_zero())
    }

    pub fn map(&self, mut f: impl FnMut(&Polynomial) -> Polynomial) -> PolyMatrix {
        PolyMatrix { rows: self.rows, cols: self.cols, field: self.field.clone(), e: self.e.iter().map(&mut f).collect() }
    }

    pub fn transpose(&self) -> PolyMatrix {
        Self::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn neg(&self) -> PolyMatrix {
        self.map(|p| -p)
    }

    pub fn scale(&self, c: &Polynomial) -> PolyMatrix {
        self.map(|p| p * c)
    }

    pub fn scale_const(&self, c: &FieldElement) -> PolyMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch);
        }
        Ok(Self::from_fn(&self.field, self.rows, other.cols, |i, j| {
            let mut acc = Polynomial::zero(&self.field);
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        }))
    }

    fn zip(&self, other: &PolyMatrix, f: impl Fn(&Polynomial, &Polynomial) -> Polynomial) -> Result<PolyMatrix, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch);
        }
        Ok(PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field.clone(),
            e: self.e.iter().zip(&other.e).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix, MatrixError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PolyMatrix) -> Result<PolyMatrix, MatrixError> {
        self.zip(other, |a, b| a - b)
    }

    /// Assembles a matrix from a grid of blocks.
    pub fn block(blocks: &[Vec<PolyMatrix>]) -> Result<PolyMatrix, MatrixError> {
        let first = blocks
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| MatrixError::DimensionMismatch("empty block grid".into()))?;
        let field = first.field.clone();
        let heights: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(MatrixError::DimensionMismatch("ragged block grid".into()));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(MatrixError::DimensionMismatch(format!("block ({},{})", bi, bj)));
                }
                if b.field != field {
                    return Err(MatrixError::FieldMismatch);
                }
            }
        }
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut out = Self::zeros(&field, rows, cols);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out.set(r0 + i, c0 + j, b.get(i, j).clone());
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        Self::from_fn(&self.field, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Deletes row `i` and column `j`.
    pub fn minor_matrix(&self, i: usize, j: usize) -> PolyMatrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.submatrix(&rows, &cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_skew(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.get(i, i).is_zero() && (i + 1..self.cols).all(|j| *self.get(i, j) == -self.get(j, i))
            })
    }

    pub fn restrict(&self, var: usize, value: &Polynomial) -> Result<PolyMatrix, MatrixError> {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let p = self.get(i, j).restrict(var, value).map_err(|err| MatrixError::Entry { row: i, col: j, err })?;
                out.set(i, j, p);
            }
        }
        Ok(out)
    }

    pub fn embed(&self, target: &NumberField) -> Result<PolyMatrix, MatrixError> {
        let e = self.e.iter().map(|p| p.embed(target)).collect::<Result<Vec<_>, _>>().map_err(|_| MatrixError::FieldMismatch)?;
        Ok(PolyMatrix { rows: self.rows, cols: self.cols, field: target.clone(), e })
    }

    fn square_dim(&self) -> Result<usize, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare);
        }
        if self.rows > MAX_DIM {
            return Err(MatrixError::TooLarge(self.rows));
        }
        Ok(self.rows)
    }

    /// Determinant by Laplace expansion over row prefixes, sharing minors.
    pub fn determinant(&self) -> Result<Polynomial, MatrixError> {
        let n = self.square_dim()?;
        let full = (1usize << n) - 1;
        let mut dp: Vec<Option<Polynomial>> = vec![None; 1 << n];
        dp[0] = Some(Polynomial::one(&self.field));
        for mask in 0..full {
            let val = match dp[mask].take() {
                Some(v) if !v.is_zero() => v,
                _ => continue,
            };
            let r = mask.count_ones() as usize;
            for c in 0..n {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let a = self.get(r, c);
                if a.is_zero() {
                    continue;
                }
                let mut t = a * &val;
                if (mask >> (c + 1)).count_ones() % 2 == 1 {
                    t = -t;
                }
                let slot = &mut dp[mask | (1 << c)];
                *slot = Some(match slot.take() {
                    Some(s) => &s + &t,
                    None => t,
                });
            }
        }
        Ok(dp[full].take().unwrap_or_else(|| Polynomial::zero(&self.field)))
    }

    /// The classical adjoint: M * adj(M) = det(M) * Id.
    pub fn adjugate(&self) -> Result<PolyMatrix, MatrixError> {
        let n = self.square_dim()?;
        if n == 0 {
            return Ok(self.clone());
        }
        let mut out = Self::zeros(&self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                let d = self.minor_matrix(j, i).determinant()?;
                out.set(i, j, if (i + j) % 2 == 1 { -d } else { d });
            }
        }
        Ok(out)
    }

    fn check_skew_even(&self) -> Result<usize, MatrixError> {
        let n = self.square_dim()?;
        if n % 2 == 1 {
            return Err(MatrixError::Parity(n));
        }
        if !self.is_skew() {
            return Err(MatrixError::NotSkew);
        }
        Ok(n)
    }

    /// Pfaffian by expansion along the first row; Pf([[0,a],[-a,0]]) = a.
    pub fn pfaffian(&self) -> Result<Polynomial, MatrixError> {
        let n = self.check_skew_even()?;
        let mut memo = HashMap::new();
        Ok(self.pf_mask((1u32 << n) - 1, &mut memo))
    }

    fn pf_mask(&self, mask: u32, memo: &mut HashMap<u32, Polynomial>) -> Polynomial {
        if mask == 0 {
            return Polynomial::one(&self.field);
        }
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let i = mask.trailing_zeros() as usize;
        let mut acc = Polynomial::zero(&self.field);
        let mut between = 0;
        for j in i + 1..self.rows {
            if mask & (1 << j) == 0 {
                continue;
            }
            let a = self.get(i, j);
            if !a.is_zero() {
                let rest = self.pf_mask(mask & !(1 << i) & !(1 << j), memo);
                let t = a * &rest;
                acc = if between % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            between += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }

    /// Pfaffian of the principal submatrix with indices `keep`.
    fn principal_pfaffian(&self, keep: &[usize]) -> Polynomial {
        self.submatrix(keep, keep).pfaffian().expect("principal submatrix of a skew matrix")
    }

    /// The matrix psi of signed sub-Pfaffians with M * psi = psi * M = Pf(M) * Id.
    pub fn pfaffian_adjoint(&self) -> Result<PolyMatrix, MatrixError> {
        let n = self.check_skew_even()?;
        let mut out = Self::zeros(&self.field, n, n);
        for k in 0..n {
            for j in 0..n {
                if j == k {
                    continue;
                }
                let keep: Vec<usize> = (0..n).filter(|&t| t != j && t != k).collect();
                let pf = self.principal_pfaffian(&keep);
                // Cofactor of a_kj in the expansion of Pf along row k.
                let neg = ((k + j + 1) % 2 == 1) != (j < k);
                out.set(j, k, if neg { -pf } else { pf });
            }
        }
        Ok(out)
    }

    /// (Pf(M_1), -Pf(M_2), Pf(M_3), ...) where M_i deletes row and column i.
    pub fn pfaffian_vector(&self) -> Result<Vec<Polynomial>, MatrixError> {
        let n = self.square_dim()?;
        if n % 2 == 0 {
            return Err(MatrixError::Parity(n));
        }
        if !self.is_skew() {
            return Err(MatrixError::NotSkew);
        }
        Ok((0..n)
            .map(|i| {
                let keep: Vec<usize> = (0..n).filter(|&t| t != i).collect();
                let pf = self.principal_pfaffian(&keep);
                if i % 2 == 1 {
                    -pf
                } else {
                    pf
                }
            })
            .collect())
    }

    /// The skew matrix [[d2, v], [-v^t, 0]].
    pub fn assemble_gorenstein_skew(d2: &PolyMatrix, v: &PolyMatrix) -> Result<PolyMatrix, MatrixError> {
        if !d2.is_square() || v.cols != 1 || v.rows != d2.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "block {}x{} with column {}x{}",
                d2.rows, d2.cols, v.rows, v.cols
            )));
        }
        if !d2.is_skew() {
            return Err(MatrixError::NotSkew);
        }
        Self::block(&[
            vec![d2.clone(), v.clone()],
            vec![v.transpose().neg(), Self::zeros(&d2.field, 1, 1)],
        ])
    }

    /// Matrix text format: rows separated by `;`, entries by `,`.
    pub fn parse(field: &NumberField, text: &str) -> Result<PolyMatrix, MatrixError> {
        let rows: Vec<Vec<Polynomial>> = text
            .trim()
            .trim_end_matches(';')
            .split(';')
            .enumerate()
            .map(|(i, row)| {
                row.split(',')
                    .enumerate()
                    .map(|(j, s)| Polynomial::parse(field, s).map_err(|err| MatrixError::Entry { row: i, col: j, err }))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Self::from_rows(field, rows)
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// A pair (phi, psi) with phi * psi = psi * phi = f * Id, certified by
/// [`verify_matrix_factorization`].
#[derive(Clone, Debug)]
pub struct MatrixFactorization {
    phi: PolyMatrix,
    psi: PolyMatrix,
    f: Polynomial,
    verified: bool,
}

impl MatrixFactorization {
    pub fn phi(&self) -> &PolyMatrix {
        &self.phi
    }
    pub fn psi(&self) -> &PolyMatrix {
        &self.psi
    }
    pub fn f(&self) -> &Polynomial {
        &self.f
    }
    pub fn verified(&self) -> bool {
        self.verified
    }
    pub fn size(&self) -> usize {
        self.phi.rows
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ResidualEntry {
    pub product: &'static str,
    pub row: usize,
    pub col: usize,
    pub value: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MfFailure {
    #[error("{0}")]
    Shape(MatrixError),
    #[error("identity fails at {} entries", .0.len())]
    Residual(Vec<ResidualEntry>),
}

/// Checks phi * psi = psi * phi = f * Id. Residual entries are 1-based.
pub fn verify_matrix_factorization(
    phi: &PolyMatrix,
    psi: &PolyMatrix,
    f: &Polynomial,
) -> Result<MatrixFactorization, MfFailure> {
    if !phi.is_square() || !psi.is_square() || phi.rows != psi.rows {
        return Err(MfFailure::Shape(MatrixError::DimensionMismatch("factorization needs equal square sizes".into())));
    }
    let n = phi.rows;
    let target = PolyMatrix::identity(&phi.field, n).scale(f);
    let mut residual = vec![];
    for (name, prod) in [("phi*psi", phi.mul(psi)), ("psi*phi", psi.mul(phi))] {
        let diff = prod.and_then(|p| p.sub(&target)).map_err(MfFailure::Shape)?;
        for i in 0..n {
            for j in 0..n {
                let d = diff.get(i, j);
                if !d.is_zero() {
                    residual.push(ResidualEntry { product: name, row: i + 1, col: j + 1, value: d.to_string() });
                }
            }
        }
    }
    if residual.is_empty() {
        Ok(MatrixFactorization { phi: phi.clone(), psi: psi.clone(), f: f.clone(), verified: true })
    } else {
        Err(MfFailure::Residual(residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> NumberField {
        NumberField::eisenstein()
    }

    fn m(s: &str) -> PolyMatrix {
        PolyMatrix::parse(&k(), s).unwrap()
    }

    #[test]
    fn pfaffian_small_cases() {
        let a = m("0, x1; -x1, 0");
        assert_eq!(a.pfaffian().unwrap().to_string(), "x1");
        assert_eq!(a.pfaffian_adjoint().unwrap(), m("0, -1; 1, 0"));
        let g = m("0, x1, x2, x3; -x1, 0, x4, x1^2; -x2, -x4, 0, x2^2; -x3, -x1^2, -x2^2, 0");
        let expect = Polynomial::parse(&k(), "x1*x2^2 - x2*x1^2 + x3*x4").unwrap();
        assert_eq!(g.pfaffian().unwrap(), expect);
        let psi = g.pfaffian_adjoint().unwrap();
        let id = PolyMatrix::identity(&k(), 4).scale(&expect);
        assert_eq!(g.mul(&psi).unwrap(), id);
        assert_eq!(psi.mul(&g).unwrap(), id);
        assert_eq!(expect.pow(2), g.determinant().unwrap());
    }

    #[test]
    fn determinant_and_adjugate() {
        let d = PolyMatrix::identity(&k(), 4).scale(&Polynomial::var(&k(), 1));
        assert_eq!(d.determinant().unwrap().to_string(), "x1^4");
        let a = m("x1, x2, 0; x3, x4, x1; 1, x2, x3");
        let adj = a.adjugate().unwrap();
        let det = a.determinant().unwrap();
        assert_eq!(a.mul(&adj).unwrap(), PolyMatrix::identity(&k(), 3).scale(&det));
        assert_eq!(a.transpose().determinant().unwrap(), det);
        assert_eq!(PolyMatrix::identity(&k(), 3).adjugate().unwrap(), PolyMatrix::identity(&k(), 3));
    }

    #[test]
    fn errors() {
        assert_eq!(m("0, 1, 2; -1, 0, 3; -2, -3, 0").pfaffian(), Err(MatrixError::Parity(3)));
        assert_eq!(m("0, 1; 1, 0").pfaffian(), Err(MatrixError::NotSkew));
        assert_eq!(m("1, 2").determinant(), Err(MatrixError::NotSquare));
        assert!(m("1, 2").mul(&m("1, 2")).is_err());
        assert!(m("0, 1; -1, 0").pfaffian_vector().is_err());
    }

    #[test]
    fn pfaffian_vector_support() {
        let mut d2 = PolyMatrix::zeros(&k(), 5, 5);
        let block = m("0, x1, x2, x3; -x1, 0, x4, 1; -x2, -x4, 0, x2; -x3, -1, -x2, 0");
        for i in 0..4 {
            for j in 0..4 {
                d2.set(i + 1, j + 1, block.get(i, j).clone());
            }
        }
        let v = d2.pfaffian_vector().unwrap();
        assert_eq!(v[0], block.pfaffian().unwrap());
        assert!(v[1..].iter().all(|p| p.is_zero()));
    }

    #[test]
    fn gorenstein_assembly() {
        let d2 = PolyMatrix::zeros(&k(), 5, 5);
        let mut v = PolyMatrix::zeros(&k(), 5, 1);
        v.set(0, 0, Polynomial::var(&k(), 1));
        let a = PolyMatrix::assemble_gorenstein_skew(&d2, &v).unwrap();
        assert!(a.is_skew());
        for i in 0..6 {
            for j in 0..6 {
                let expect = match (i, j) {
                    (0, 5) => "x1",
                    (5, 0) => "-x1",
                    _ => "0",
                };
                assert_eq!(a.get(i, j).to_string(), expect);
            }
        }
    }

    #[test]
    fn residual_localisation() {
        let f = Polynomial::parse(&k(), "x1*x2").unwrap();
        let phi = m("x1, 0; 0, x2");
        let psi = m("x2, 0; 0, x1");
        assert!(verify_matrix_factorization(&phi, &psi, &f).unwrap().verified());
        let bad = m("x1, 0; 0, -x2");
        match verify_matrix_factorization(&bad, &psi, &f) {
            Err(MfFailure::Residual(r)) => assert!(r.iter().all(|e| e.row == 2 && e.col == 2)),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn text_roundtrip() {
        let a = m("0, (1+w)*x1 - x4; -(1+w)*x1 + x4, 0");
        assert_eq!(m(&a.to_string()), a);
    }
}
