//! Dense linear algebra over a number field: row reduction, rank, kernels.

use crate::field::{FieldElement, NumberField};

/// A dense matrix of field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FMatrix {
    pub rows: usize,
    pub cols: usize,
    field: NumberField,
    e: Vec<FieldElement>,
}

impl FMatrix {
    pub fn zeros(field: &NumberField, rows: usize, cols: usize) -> FMatrix {
        FMatrix { rows, cols, field: field.clone(), e: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &NumberField, n: usize) -> FMatrix {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &NumberField, rows: Vec<Vec<FieldElement>>) -> FMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        FMatrix { rows: r, cols: c, field: field.clone(), e: rows.into_iter().flatten().collect() }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.e[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.e[i * self.cols..(i + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: Vec<FieldElement>) {
        assert_eq!(row.len(), self.cols);
        self.e.extend(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + &(a * b);
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = vec![];
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.e.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let pj = self.get(r, j);
                    if pj.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j) - &(&factor * pj);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// A basis of the right kernel, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<FieldElement>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![self.field.zero(); self.cols];
                v[fc] = self.field.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m.get(r, fc);
                }
                v
            })
            .collect()
    }

    /// The nonzero rows of the reduced echelon form: a canonical basis of the row space.
    pub fn row_space_basis(&self) -> FMatrix {
        let mut m = self.clone();
        let k = m.rref().len();
        m.e.truncate(k * m.cols);
        m.rows = k;
        m
    }

    pub fn determinant(&self) -> FieldElement {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return self.field.zero();
            };
            if p != c {
                for j in 0..n {
                    m.e.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = &det * &piv;
            let inv = piv.inv().unwrap();
            for i in c + 1..n {
                let factor = m.get(i, c) * &inv;
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j) - &(&factor * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<FMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(&self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, self.field.one());
        }
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(&self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank() {
        let k = NumberField::eisenstein();
        let w = k.generator(1);
        let m = FMatrix::from_rows(&k, vec![vec![k.int(1), w.clone(), k.int(0)], vec![w.clone(), &w * &w, k.int(0)]]);
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let col = FMatrix::from_rows(&k, v.iter().map(|x| vec![x.clone()]).collect());
            assert!(m.mul(&col).is_zero());
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let k = NumberField::eisenstein();
        let w = k.generator(1);
        let m = FMatrix::from_rows(&k, vec![vec![k.int(2), w.clone()], vec![k.int(1), k.int(1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), FMatrix::identity(&k, 2));
        assert_eq!(m.determinant(), k.int(2) - w);
        let s = FMatrix::from_rows(&k, vec![vec![k.int(1), k.int(2)], vec![k.int(2), k.int(4)]]);
        assert!(s.inverse().is_none());
        assert!(s.determinant().is_zero());
    }
}
