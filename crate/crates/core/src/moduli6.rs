//! Six-generated skew factorizations Lambda(lambda, Gamma) = x4*Gamma + [[0,-alpha^t],[alpha,0]]:
//! the equation system in the fifteen Gamma parameters, sampling, and group actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::families::{build_six_gen, curve_alpha, transport_matrices, CurveChart, CurvePoint, FamilyError};
use crate::field::{FieldElement, FieldError, NumberField};
use crate::linalg::FMatrix;
use crate::matrix::{MatrixError, PolyMatrix};
use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuliError {
    #[error("the point P0 = [-1:0:1] is excluded")]
    ExcludedPoint,
    #[error("lambda must be in the chart [a:b:1]")]
    ChartMismatch,
    #[error("k must be nonzero")]
    ZeroScalar,
    #[error("H acts only at self-dual points [1:b:1]")]
    NotSelfDual,
    #[error("group law violated: K1*K4 - K2*K3 = {0}")]
    GroupLaw(String),
    #[error("transport matrix is singular")]
    SingularTransport,
    #[error("matrix is not of the six-generated shape: {0}")]
    MalformedShape(String),
    #[error("Pfaffian is neither f nor -f")]
    PfaffianSign,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The constants a1..a15: Gamma1 = skew(a1,a2,a3), Gamma3 = skew(a4,a5,a6),
/// Gamma2 = (a7..a15) row-major; Gamma = [[Gamma1, -Gamma2^t], [Gamma2, Gamma3]].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaBlock {
    field: NumberField,
    a: Vec<FieldElement>,
}

impl GammaBlock {
    pub fn zero(field: &NumberField) -> GammaBlock {
        GammaBlock { field: field.clone(), a: vec![field.zero(); 15] }
    }

    pub fn from_slice(field: &NumberField, a: &[FieldElement]) -> Result<GammaBlock, String> {
        if a.len() != 15 {
            return Err(format!("Gamma needs 15 entries, got {}", a.len()));
        }
        let mut out = Vec::with_capacity(15);
        for x in a {
            out.push(x.embed(field).map_err(|e| e.to_string())?);
        }
        Ok(GammaBlock { field: field.clone(), a: out })
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.a
    }

    /// a_i, 1-based.
    pub fn get(&self, i: usize) -> &FieldElement {
        &self.a[i - 1]
    }

    pub fn set(&mut self, i: usize, v: FieldElement) {
        self.a[i - 1] = v;
    }

    fn skew(&self, off: usize) -> [[FieldElement; 3]; 3] {
        let z = self.field.zero();
        let (p, q, r) = (self.get(off + 1).clone(), self.get(off + 2).clone(), self.get(off + 3).clone());
        [[z.clone(), p.clone(), q.clone()], [-&p, z.clone(), r.clone()], [-&q, -&r, z]]
    }

    pub fn gamma1(&self) -> [[FieldElement; 3]; 3] {
        self.skew(0)
    }

    pub fn gamma3(&self) -> [[FieldElement; 3]; 3] {
        self.skew(3)
    }

    pub fn gamma2(&self) -> [[FieldElement; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.get(7 + 3 * i + j).clone()))
    }

    pub fn gamma13_zero(&self) -> bool {
        self.a[..6].iter().all(|x| x.is_zero())
    }

    /// The 6x6 constant matrix Gamma.
    pub fn matrix(&self) -> PolyMatrix {
        let (g1, g2, g3) = (self.gamma1(), self.gamma2(), self.gamma3());
        PolyMatrix::from_fn(&self.field, 6, 6, |i, j| {
            let c = match (i < 3, j < 3) {
                (true, true) => g1[i][j].clone(),
                (true, false) => -&g2[j - 3][i],
                (false, true) => g2[i - 3][j].clone(),
                (false, false) => g3[i - 3][j - 3].clone(),
            };
            Polynomial::constant(c)
        })
    }

    /// Reads Gamma off a matrix of the six-generated shape (x4-coefficients).
    pub fn from_lambda_matrix(m: &PolyMatrix) -> Result<GammaBlock, ModuliError> {
        if m.rows() != 6 || m.cols() != 6 || !m.is_skew() {
            return Err(ModuliError::MalformedShape("need a 6x6 skew matrix".into()));
        }
        let k = m.field().clone();
        let x4 = Monomial::var(4);
        let c = |i: usize, j: usize| m.get(i, j).coefficient(&x4);
        let mut g = GammaBlock::zero(&k);
        let idx = [(0, 1), (0, 2), (1, 2)];
        for (n, &(i, j)) in idx.iter().enumerate() {
            g.set(1 + n, c(i, j));
            g.set(4 + n, c(i + 3, j + 3));
        }
        for i in 0..3 {
            for j in 0..3 {
                g.set(7 + 3 * i + j, c(3 + i, j));
            }
        }
        Ok(g)
    }
}

fn affine_ab(lambda: &CurvePoint) -> Result<(FieldElement, FieldElement, FieldElement), ModuliError> {
    if lambda.chart() != CurveChart::Affine {
        return Err(ModuliError::ChartMismatch);
    }
    let e = lambda.e().ok_or(ModuliError::ExcludedPoint)?.clone();
    Ok((lambda.a().clone(), lambda.b().clone(), e))
}

/// Coefficients of the six equations I1..I5, I8 in a7..a15 (rows in that order).
pub fn linear_equations(lambda: &CurvePoint) -> Result<FMatrix, ModuliError> {
    let (a, b, e) = affine_ab(lambda)?;
    let k = lambda.field().clone();
    let n = |v: i64| k.int(v);
    let one = k.one();
    let mut rows = vec![vec![k.zero(); 9]; 6];
    // column c holds a_{7+c}
    let mut put = |r: usize, idx: usize, v: FieldElement| {
        let cur = &rows[r][idx - 7] + &v;
        rows[r][idx - 7] = cur;
    };
    put(0, 9, one.clone());
    put(0, 11, -&one);
    put(0, 13, one.clone());
    put(1, 8, one.clone());
    put(1, 10, one.clone());
    put(1, 15, -&one);
    put(2, 7, one.clone());
    put(2, 12, one.clone());
    put(2, 14, one.clone());
    // I4
    put(3, 10, &a + &one);
    put(3, 11, -&e);
    put(3, 12, b.clone());
    put(3, 13, &n(2) * &e);
    put(3, 14, &n(2) * &b);
    put(3, 15, &(&n(-2) * &a) + &one);
    // I5
    put(4, 10, &n(2) * &e);
    put(4, 11, &n(2) * &b);
    put(4, 12, &(&n(-2) * &a) + &one);
    put(4, 13, -&b);
    put(4, 14, &n(2) - &a);
    put(4, 15, -&e);
    // I8
    let e2 = &e * &e;
    let ab = &a * &b;
    put(5, 11, &n(-6) * &e);
    put(5, 12, &(&(&n(2) * &e2) + &(&n(2) * &ab)) - &b);
    put(5, 13, &(&n(-3) * &(&b * &b)) + &(&n(12) * &e));
    put(5, 14, &(&(&n(2) * &e2) - &ab) + &(&n(2) * &b));
    put(5, 15, &(&n(-3) * &(&e * &b)) - &(&n(6) * &a));
    Ok(FMatrix::from_rows(&k, rows))
}

/// Values of the six linear equations I1..I5, I8 at Gamma.
pub fn linear_equation_values(lambda: &CurvePoint, gamma: &GammaBlock) -> Result<Vec<FieldElement>, ModuliError> {
    let m = linear_equations(lambda)?;
    let k = lambda.field();
    let col = FMatrix::from_rows(k, (7..=15).map(|i| vec![gamma.get(i).clone()]).collect());
    let v = m.mul(&col);
    Ok((0..6).map(|i| v.get(i, 0).clone()).collect())
}

/// (rank, nullity) of the six linear equations in the nine unknowns a7..a15.
pub fn linear_system_nullity(lambda: &CurvePoint) -> Result<(usize, usize), ModuliError> {
    let r = linear_equations(lambda)?.rank();
    Ok((r, 9 - r))
}

/// Gamma2 from the three free parameters: (a11, a12, a13) when b = 0 and
/// (a7, a11, a15) otherwise. Gamma1 = Gamma3 = 0 in the output.
pub fn gamma2_solve(lambda: &CurvePoint, free: &[FieldElement; 3]) -> Result<GammaBlock, ModuliError> {
    let (a, b, _) = affine_ab(lambda)?;
    let k = lambda.field().clone();
    let one = k.one();
    let mut g = GammaBlock::zero(&k);
    let free: Vec<FieldElement> = free.iter().map(|x| x.embed(&k)).collect::<Result<_, _>>()?;
    if b.is_zero() {
        let (a11, a12, a13) = (&free[0], &free[1], &free[2]);
        let a2 = &a * &a;
        g.set(7, -&(a12 * &(&a2 + &one)));
        g.set(9, a11 - a13);
        g.set(11, a11.clone());
        g.set(12, a12.clone());
        g.set(13, a13.clone());
        g.set(14, &a2 * a12);
    } else {
        let (a7, a11, a15) = (&free[0], &free[1], &free[2]);
        let a1 = &a + &one;
        let b_a1 = b.checked_div(&a1)?;
        let am1_ba1 = (&a - &one).checked_div(&(&b * &a1))?;
        let a2_b2 = (&a * &a).checked_div(&(&b * &b))?;
        let a1sq = &a1 * &a1;
        g.set(7, a7.clone());
        g.set(8, &(-&(&b_a1 * a7)) + a15);
        g.set(9, &(-&(&am1_ba1 * a7)) - &(&a2_b2 * a15));
        g.set(10, &b_a1 * a7);
        g.set(11, a11.clone());
        let c12 = (&(&a * &a) + &k.int(3)).checked_div(&a1sq)?;
        g.set(12, &(&(-&(&c12 * a7)) + &(&b_a1 * a11)) - &(&am1_ba1 * a15));
        g.set(13, &(&(&am1_ba1 * a7) + a11) + &(&a2_b2 * a15));
        let c14 = (&k.int(2) * &(&one - &a)).checked_div(&a1sq)?;
        g.set(14, &(&(&c14 * a7) - &(&b_a1 * a11)) + &(&am1_ba1 * a15));
        g.set(15, a15.clone());
    }
    Ok(g)
}

type Term = (FieldElement, Vec<usize>);

fn residual_terms(a: &FieldElement, b: &FieldElement, e: &FieldElement) -> [Vec<Term>; 4] {
    let k = a.field().clone();
    let n = |v: i64| k.int(v);
    let t = |c: FieldElement, ix: &[usize]| (c, ix.to_vec());
    let i6 = vec![
        t(n(1), &[3, 4]),
        t(n(-1), &[2, 5]),
        t(n(1), &[1, 6]),
        t(n(1), &[11, 11]),
        t(n(1), &[10, 12]),
        t(n(-1), &[11, 13]),
        t(n(1), &[13, 13]),
        t(n(-1), &[10, 14]),
        t(n(-2), &[12, 15]),
        t(n(-1), &[14, 15]),
    ];
    let i7 = vec![
        t(n(1), &[1, 4]),
        t(n(1), &[3, 5]),
        t(n(1), &[2, 6]),
        t(n(-1), &[10, 10]),
        t(n(1), &[11, 12]),
        t(n(1), &[12, 13]),
        t(n(2), &[11, 14]),
        t(n(-1), &[13, 14]),
        t(n(1), &[10, 15]),
        t(n(-1), &[15, 15]),
    ];
    let i9 = vec![
        t(n(1), &[3, 5, 10]),
        t(n(-1), &[2, 6, 10]),
        t(n(-1), &[2, 5, 11]),
        t(n(-1), &[1, 6, 11]),
        t(n(1), &[1, 5, 12]),
        t(n(1), &[3, 6, 12]),
        t(n(-1), &[2, 5, 13]),
        t(n(2), &[1, 6, 13]),
        t(n(1), &[13, 13, 13]),
        t(n(1), &[2, 4, 14]),
        t(n(1), &[3, 6, 14]),
        t(n(1), &[10, 11, 14]),
        t(n(1), &[12, 12, 14]),
        t(n(-2), &[10, 13, 14]),
        t(n(1), &[12, 14, 14]),
        t(n(1), &[3, 5, 15]),
        t(n(2), &[2, 6, 15]),
        t(n(1), &[11, 14, 15]),
        t(n(-2), &[13, 14, 15]),
        t(n(-1), &[15, 15, 15]),
        t(n(-1), &[]),
    ];
    let (a2, b2, e2) = (&n(2) * a, &n(2) * b, &n(2) * e);
    let i10 = vec![
        t(e2.clone(), &[2, 4]),
        t(-&e2, &[1, 5]),
        t(b2.clone(), &[2, 5]),
        t(-&a2, &[3, 5]),
        t(b2.clone(), &[1, 6]),
        t(&n(-4) * a, &[2, 6]),
        t(-&b2, &[11, 11]),
        t(a2.clone(), &[11, 12]),
        t(e2.clone(), &[12, 12]),
        t(&n(5) * b, &[11, 13]),
        t(&n(-4) * a, &[12, 13]),
        t(-&b2, &[13, 13]),
        t(-&b2, &[10, 14]),
        t(-a, &[11, 14]),
        t(a2.clone(), &[13, 14]),
        t(-&e2, &[14, 14]),
        t(&n(3) * e, &[11, 15]),
        t(&n(-6) * e, &[13, 15]),
        t(-&b2, &[14, 15]),
        t(&n(6) * a, &[15, 15]),
        t(n(4), &[3, 5]),
        t(n(2), &[2, 6]),
        t(n(-1), &[11, 12]),
        t(n(2), &[12, 13]),
        t(n(2), &[11, 14]),
        t(n(-4), &[13, 14]),
        t(n(-6), &[15, 15]),
    ];
    [i6, i7, i9, i10]
}

fn eval_terms(terms: &[Term], g: &GammaBlock) -> FieldElement {
    let mut acc = g.field().zero();
    for (c, ix) in terms {
        let mut v = c.clone();
        for &i in ix {
            v = &v * g.get(i);
        }
        acc = &acc + &v;
    }
    acc
}

/// Values of the four residual equations I6, I7, I9, I10 at (lambda, Gamma).
pub fn residual_equations(lambda: &CurvePoint, gamma: &GammaBlock) -> Result<[FieldElement; 4], ModuliError> {
    let (a, b, e) = affine_ab(lambda)?;
    let terms = residual_terms(&a, &b, &e);
    Ok(std::array::from_fn(|i| eval_terms(&terms[i], gamma)))
}

/// The residual equations as affine functions of (a4, a5, a6), the other
/// parameters fixed by `gamma`: returns the 4x3 coefficient matrix and the
/// constant column.
pub fn residual_affine_system(lambda: &CurvePoint, gamma: &GammaBlock) -> Result<(FMatrix, Vec<FieldElement>), ModuliError> {
    let mut base = gamma.clone();
    let k = lambda.field().clone();
    for i in 4..=6 {
        base.set(i, k.zero());
    }
    let c0 = residual_equations(lambda, &base)?;
    let mut m = FMatrix::zeros(&k, 4, 3);
    for j in 0..3 {
        let mut g = base.clone();
        g.set(4 + j, k.one());
        let v = residual_equations(lambda, &g)?;
        for i in 0..4 {
            m.set(i, j, &v[i] - &c0[i]);
        }
    }
    Ok((m, c0.to_vec()))
}

/// A point of the moduli family; `certified` records det(Lambda) = f^2 and Pf(Lambda) = f.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliPoint {
    lambda: CurvePoint,
    gamma: GammaBlock,
    certified: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ModuliPointLambda {
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ModuliPointReport {
    pub lambda: ModuliPointLambda,
    pub gamma: Vec<String>,
    pub certified: bool,
}

impl ModuliPoint {
    /// Builds the point and runs the exact certification.
    pub fn certify(lambda: &CurvePoint, gamma: &GammaBlock) -> Result<ModuliPoint, ModuliError> {
        affine_ab(lambda)?;
        let m = build_six_gen(lambda, gamma)?;
        let f = Polynomial::fermat(lambda.field());
        let certified = m.pfaffian()? == f && m.determinant()? == &f * &f;
        Ok(ModuliPoint { lambda: lambda.clone(), gamma: gamma.clone(), certified })
    }

    pub fn lambda(&self) -> &CurvePoint {
        &self.lambda
    }

    pub fn gamma(&self) -> &GammaBlock {
        &self.gamma
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn matrix(&self) -> PolyMatrix {
        build_six_gen(&self.lambda, &self.gamma).expect("validated on construction")
    }

    pub fn report(&self) -> ModuliPointReport {
        ModuliPointReport {
            lambda: ModuliPointLambda { a: self.lambda.a().to_string(), b: self.lambda.b().to_string() },
            gamma: self.gamma.entries().iter().map(|x| x.to_string()).collect(),
            certified: self.certified,
        }
    }
}

fn small_element(k: &NumberField, rng: &mut ChaCha8Rng, h: i64) -> FieldElement {
    let mut v = k.int(rng.gen_range(-h..=h));
    if k.degree() >= 2 {
        let w = k.generator(1);
        v = &v + &(&k.int(rng.gen_range(-h..=h)) * &w);
    }
    v
}

fn nonzero_element(k: &NumberField, rng: &mut ChaCha8Rng, h: i64) -> FieldElement {
    loop {
        let v = small_element(k, rng, h);
        if !v.is_zero() {
            return v;
        }
    }
}

/// The residual quadric on the slice a1 = a2 = 0: once a4 and a5 are solved
/// from I6 and I7, I10 no longer involves a3 or a6 and is a quadratic form in
/// the three free Gamma2 parameters. Returns its values as a closure-friendly
/// symmetric coefficient table q[i][j] (Q(t) = sum q[i][j] t_i t_j).
fn slice_quadric(lambda: &CurvePoint) -> Result<[[FieldElement; 3]; 3], ModuliError> {
    let k = lambda.field().clone();
    let q_at = |t: [FieldElement; 3]| -> Result<FieldElement, ModuliError> {
        let mut g = gamma2_solve(lambda, &t)?;
        g.set(3, k.one());
        let (m, c) = residual_affine_system(lambda, &g)?;
        // a3 = 1, a1 = a2 = 0: I6 = a4 + c6, I7 = a5 + c7.
        let a4 = -&c[0];
        let a5 = -&c[1];
        Ok(&(&c[3] + &(m.get(3, 0) * &a4)) + &(m.get(3, 1) * &a5))
    };
    let unit = |i: usize| std::array::from_fn(|j| if i == j { k.one() } else { k.zero() });
    let mut q: [[FieldElement; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| k.zero()));
    for i in 0..3 {
        q[i][i] = q_at(unit(i))?;
    }
    let half = k.rat(1, 2);
    for i in 0..3 {
        for j in i + 1..3 {
            let t = std::array::from_fn(|l| if l == i || l == j { k.one() } else { k.zero() });
            let mixed = &(&(&q_at(t)? - &q[i][i]) - &q[j][j]) * &half;
            q[i][j] = mixed.clone();
            q[j][i] = mixed;
        }
    }
    Ok(q)
}

fn quad_form(q: &[[FieldElement; 3]; 3], s: &[FieldElement; 3], t: &[FieldElement; 3]) -> FieldElement {
    let mut acc = s[0].field().zero();
    for i in 0..3 {
        for j in 0..3 {
            acc = &acc + &(&q[i][j] * &(&s[i] * &t[j]));
        }
    }
    acc
}

/// Small-height integer zeros of the slice quadric, in a fixed order.
fn quadric_base_points(k: &NumberField, q: &[[FieldElement; 3]; 3]) -> Vec<[FieldElement; 3]> {
    let mut out = vec![];
    for h in 1..=3i64 {
        for x in -h..=h {
            for y in -h..=h {
                for z in -h..=h {
                    if x.abs().max(y.abs()).max(z.abs()) != h {
                        continue;
                    }
                    let t = [k.int(x), k.int(y), k.int(z)];
                    if quad_form(q, &t, &t).is_zero() {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// Solves the residual equations for (a4, a5, a6) and certifies. `None` when
/// the system is inconsistent or the certificate fails.
fn complete_and_certify(lambda: &CurvePoint, g: &mut GammaBlock) -> Result<Option<ModuliPoint>, ModuliError> {
    let k = lambda.field().clone();
    let (m, c) = residual_affine_system(lambda, g)?;
    let mut aug = FMatrix::zeros(&k, 4, 4);
    for i in 0..4 {
        for j in 0..3 {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, 3, -&c[i]);
    }
    let pivots = aug.rref();
    if pivots.contains(&3) {
        return Ok(None);
    }
    for i in 4..=6 {
        g.set(i, k.zero());
    }
    for (r, &p) in pivots.iter().enumerate() {
        g.set(4 + p, aug.get(r, 3).clone());
    }
    if residual_equations(lambda, g)?.iter().any(|v| !v.is_zero()) {
        return Ok(None);
    }
    let pt = ModuliPoint::certify(lambda, g)?;
    Ok(if pt.certified() && !g.gamma13_zero() { Some(pt) } else { None })
}

/// Seeded search for a certified point over `lambda`.
///
/// Even trials draw every free parameter (a1, a2, a3 and the three Gamma2
/// parameters) and solve the residual equations for (a4, a5, a6). Odd trials
/// work on the slice a1 = a2 = 0, where consistency reduces to a quadratic
/// form in the Gamma2 parameters; points on it come from lines through a
/// small-height zero.
pub fn sample_moduli_point(lambda: &CurvePoint, seed: u64, budget: usize) -> Result<Option<ModuliPoint>, ModuliError> {
    affine_ab(lambda)?;
    let k = lambda.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = slice_quadric(lambda)?;
    let bases = quadric_base_points(&k, &q);
    for trial in 0..budget {
        if trial % 2 == 0 {
            let free = std::array::from_fn(|_| small_element(&k, &mut rng, 3));
            let mut g = gamma2_solve(lambda, &free)?;
            for i in 1..=3 {
                g.set(i, small_element(&k, &mut rng, 3));
            }
            if let Some(p) = complete_and_certify(lambda, &mut g)? {
                return Ok(Some(p));
            }
            continue;
        }
        if bases.is_empty() {
            continue;
        }
        let p = &bases[rng.gen_range(0..bases.len())];
        let d: [FieldElement; 3] = std::array::from_fn(|_| small_element(&k, &mut rng, 3));
        let qd = quad_form(&q, &d, &d);
        let bpd = quad_form(&q, p, &d);
        let s = if qd.is_zero() {
            if !bpd.is_zero() {
                continue;
            }
            small_element(&k, &mut rng, 3)
        } else {
            -(&k.int(2) * &bpd).checked_div(&qd)?
        };
        let scale = nonzero_element(&k, &mut rng, 3);
        let t: [FieldElement; 3] = std::array::from_fn(|i| &(&p[i] + &(&s * &d[i])) * &scale);
        let mut g = gamma2_solve(lambda, &t)?;
        g.set(3, nonzero_element(&k, &mut rng, 3));
        if let Some(pt) = complete_and_certify(lambda, &mut g)? {
            return Ok(Some(pt));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupAction {
    /// Lambda -> U_k Lambda U_k^t, U_k = diag(k Id, k^-1 Id).
    Uk(FieldElement),
    /// The duality lambda -> lambda^t.
    S2,
    /// (K1, K2, K3, K4) with K1 K4 - K2 K3 = 1, at self-dual lambda.
    H([FieldElement; 4]),
}

fn const_poly_matrix(m: &FMatrix) -> PolyMatrix {
    PolyMatrix::from_fn(m.field(), m.rows, m.cols, |i, j| Polynomial::constant(m.get(i, j).clone()))
}

fn to_fmatrix(m: &PolyMatrix) -> FMatrix {
    let k = m.field();
    let rows = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| m.get(i, j).constant_value().expect("constant matrix"))
                .collect()
        })
        .collect();
    FMatrix::from_rows(k, rows)
}

fn block2(k: &NumberField, tl: &FMatrix, tr: &FMatrix, bl: &FMatrix, br: &FMatrix) -> FMatrix {
    let mut out = FMatrix::zeros(k, 6, 6);
    for i in 0..3 {
        for j in 0..3 {
            out.set(i, j, tl.get(i, j).clone());
            out.set(i, j + 3, tr.get(i, j).clone());
            out.set(i + 3, j, bl.get(i, j).clone());
            out.set(i + 3, j + 3, br.get(i, j).clone());
        }
    }
    out
}

fn scaled(m: &FMatrix, c: &FieldElement) -> FMatrix {
    let mut out = m.clone();
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(i, j, m.get(i, j) * c);
        }
    }
    out
}

/// The constant 6x6 matrix T of the action; the result is T Lambda T^t.
pub fn action_matrix(kind: &GroupAction, lambda: &CurvePoint) -> Result<FMatrix, ModuliError> {
    let k = lambda.field().clone();
    let id = FMatrix::identity(&k, 3);
    let zero = FMatrix::zeros(&k, 3, 3);
    match kind {
        GroupAction::Uk(c) => {
            if c.is_zero() {
                return Err(ModuliError::ZeroScalar);
            }
            let c = c.embed(&k)?;
            Ok(block2(&k, &scaled(&id, &c), &zero, &zero, &scaled(&id, &c.inv()?)))
        }
        GroupAction::S2 => {
            affine_ab(lambda)?;
            let (u, v) = transport_matrices(lambda)?;
            let (u, v) = (to_fmatrix(&u), to_fmatrix(&v));
            let v_inv_t = v.inverse().ok_or(ModuliError::SingularTransport)?.transpose();
            if u.determinant().is_zero() {
                return Err(ModuliError::SingularTransport);
            }
            Ok(block2(&k, &zero, &v_inv_t, &scaled(&u, &-k.one()), &zero))
        }
        GroupAction::H(ks) => {
            let (a, b, _) = affine_ab(lambda)?;
            if !a.is_one() || b.is_zero() {
                return Err(ModuliError::NotSelfDual);
            }
            let ks: Vec<FieldElement> = ks.iter().map(|x| x.embed(&k)).collect::<Result<_, _>>()?;
            let law = &(&ks[0] * &ks[3]) - &(&ks[1] * &ks[2]);
            if !law.is_one() {
                return Err(ModuliError::GroupLaw(law.to_string()));
            }
            let (u, _) = transport_matrices(lambda)?;
            let u = to_fmatrix(&u);
            let u_inv = u.inverse().ok_or(ModuliError::SingularTransport)?;
            let t = block2(
                &k,
                &scaled(&id, &ks[3]),
                &scaled(&u_inv, &-&ks[2]),
                &scaled(&u, &-&ks[1]),
                &scaled(&id, &ks[0]),
            );
            if t.determinant().is_zero() {
                return Err(ModuliError::SingularTransport);
            }
            Ok(t)
        }
    }
}

pub fn group_action(kind: &GroupAction, lambda: &CurvePoint, big_lambda: &PolyMatrix) -> Result<PolyMatrix, ModuliError> {
    if big_lambda.rows() != 6 || big_lambda.cols() != 6 {
        return Err(ModuliError::MalformedShape("need a 6x6 matrix".into()));
    }
    let t = const_poly_matrix(&action_matrix(kind, lambda)?);
    Ok(t.mul(big_lambda)?.mul(&t.transpose())?)
}

/// The image point of the duality: lambda^t.
pub fn dual_point(lambda: &CurvePoint) -> Result<CurvePoint, ModuliError> {
    Ok(lambda.transpose()?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// P = [[0, Id], [Id, 0]] with P * Lambda block diagonal.
    pub witness: PolyMatrix,
    pub first: PolyMatrix,
    pub second: PolyMatrix,
}

fn check_shape(m: &PolyMatrix) -> Result<(), ModuliError> {
    if m.rows() != 6 || m.cols() != 6 || !m.is_skew() {
        return Err(ModuliError::MalformedShape("need a 6x6 skew matrix".into()));
    }
    let k = m.field();
    let zero4 = Polynomial::zero(k);
    for i in 0..6 {
        for j in 0..6 {
            let p = m.get(i, j);
            if p.is_zero() {
                continue;
            }
            if p.is_homogeneous() != (true, Some(1)) {
                return Err(ModuliError::MalformedShape(format!("entry ({},{}) is not linear", i + 1, j + 1)));
            }
            if (i < 3) == (j < 3) && !p.restrict(4, &zero4).map_err(|err| MatrixError::Entry { row: i, col: j, err })?.is_zero() {
                return Err(ModuliError::MalformedShape(format!("diagonal block entry ({},{}) involves x1..x3", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// When Gamma1 = Gamma3 = 0 returns the permutation witness and the diagonal
/// blocks x4*Gamma2 + alpha and -x4*Gamma2^t - alpha^t.
pub fn decompose_if_gamma_zero(m: &PolyMatrix) -> Result<Option<Decomposition>, ModuliError> {
    check_shape(m)?;
    let g = GammaBlock::from_lambda_matrix(m)?;
    if !g.gamma13_zero() {
        return Ok(None);
    }
    let k = m.field().clone();
    let z = PolyMatrix::zeros(&k, 3, 3);
    let id = PolyMatrix::identity(&k, 3);
    let p = PolyMatrix::block(&[vec![z.clone(), id.clone()], vec![id, z]])?;
    let pm = p.mul(m)?;
    let first = pm.submatrix(&[0, 1, 2], &[0, 1, 2]);
    let second = pm.submatrix(&[3, 4, 5], &[3, 4, 5]);
    if !pm.submatrix(&[0, 1, 2], &[3, 4, 5]).is_zero() || !pm.submatrix(&[3, 4, 5], &[0, 1, 2]).is_zero() {
        return Err(ModuliError::MalformedShape("off-diagonal blocks do not vanish".into()));
    }
    Ok(Some(Decomposition { witness: p, first, second }))
}

/// Maps a Pf = -f representative to Pf = +f by conjugating with the
/// transposition of the first two basis vectors. Returns the matrix and the
/// permutation used (identity when Pf = f already).
pub fn normalize_pfaffian_sign(m: &PolyMatrix) -> Result<(PolyMatrix, PolyMatrix), ModuliError> {
    let k = m.field().clone();
    let f = Polynomial::fermat(&k);
    let pf = m.pfaffian()?;
    let n = m.rows();
    if pf == f {
        return Ok((m.clone(), PolyMatrix::identity(&k, n)));
    }
    if pf != -&f {
        return Err(ModuliError::PfaffianSign);
    }
    let p = PolyMatrix::from_fn(&k, n, n, |i, j| {
        let target = match i {
            0 => 1,
            1 => 0,
            _ => i,
        };
        if j == target {
            Polynomial::one(&k)
        } else {
            Polynomial::zero(&k)
        }
    });
    Ok((p.mul(m)?.mul(&p.transpose())?, p))
}

/// alpha_{lambda} read off the x4 = 0 part of a six-generated matrix (lower-left block).
pub fn alpha_block(m: &PolyMatrix) -> Result<PolyMatrix, ModuliError> {
    check_shape(m)?;
    let k = m.field().clone();
    let r = m.restrict(4, &Polynomial::zero(&k))?;
    Ok(r.submatrix(&[3, 4, 5], &[0, 1, 2]))
}

/// True when the x4 = 0 part of `m` is [[0, -alpha^t], [alpha, 0]] with alpha = alpha_{lambda}.
pub fn has_alpha_shape(m: &PolyMatrix, lambda: &CurvePoint) -> Result<bool, ModuliError> {
    let al = alpha_block(m)?;
    let k = m.field().clone();
    let r = m.restrict(4, &Polynomial::zero(&k))?;
    let expect = curve_alpha(lambda);
    Ok(al == expect && r.submatrix(&[0, 1, 2], &[3, 4, 5]) == expect.transpose().neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::cube_roots_of_minus_two;

    fn k() -> NumberField {
        NumberField::eisenstein()
    }

    fn pt(s: &str) -> CurvePoint {
        CurvePoint::parse(&k(), s).unwrap()
    }

    #[test]
    fn gamma2_examples() {
        let kk = k();
        let w = kk.generator(1);
        // b = 0, free = (a11, a12, a13) = (0, 1, 0)
        let l = CurvePoint::affine(-w.clone(), kk.zero()).unwrap();
        let g = gamma2_solve(&l, &[kk.zero(), kk.one(), kk.zero()]).unwrap();
        let a2 = &w * &w;
        assert_eq!(g.get(7), &-(&a2 + &kk.one()));
        assert_eq!(g.get(14), &a2);
        assert!(linear_equation_values(&l, &g).unwrap().iter().all(|v| v.is_zero()));
        // b != 0 at [0:b:1]
        for b in ["-1", "-w", "1+w"] {
            let l = pt(&format!("0:{}:1", b));
            let bv = l.b().clone();
            let g = gamma2_solve(&l, &[kk.one(), kk.zero(), kk.zero()]).unwrap();
            assert_eq!(g.get(8), &-bv.clone());
            assert_eq!(g.get(10), &bv);
            assert_eq!(g.get(9), &bv.inv().unwrap());
            assert_eq!(g.get(13), &-bv.inv().unwrap());
            assert_eq!(g.get(12), &kk.int(-3));
            assert_eq!(g.get(14), &kk.int(2));
            assert!(linear_equation_values(&l, &g).unwrap().iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn nullity_three() {
        assert_eq!(linear_system_nullity(&pt("0:-1:1")).unwrap(), (6, 3));
        let kk = k();
        let w = kk.generator(1);
        assert_eq!(linear_system_nullity(&CurvePoint::affine(-w, kk.zero()).unwrap()).unwrap(), (6, 3));
        let t = NumberField::eisenstein_cbrt2();
        let g = cube_roots_of_minus_two(&t).unwrap();
        let l = CurvePoint::affine(t.one(), g[0].clone()).unwrap();
        assert!(l.is_self_dual());
        assert_eq!(linear_system_nullity(&l).unwrap(), (6, 3));
    }

    #[test]
    fn residual_at_zero() {
        let l = pt("0:-1:1");
        let v = residual_equations(&l, &GammaBlock::zero(&k())).unwrap();
        assert_eq!(v[2], -k().one());
        assert!(v[0].is_zero() && v[1].is_zero() && v[3].is_zero());
        let m = build_six_gen(&l, &GammaBlock::zero(&k())).unwrap();
        assert_eq!(m.pfaffian().unwrap(), Polynomial::fermat3(&k()));
    }

    #[test]
    fn residual_i6_gamma2_zero() {
        let kk = k();
        let mut g = GammaBlock::zero(&kk);
        for i in 1..=6 {
            g.set(i, kk.int(i as i64 + 1));
        }
        let v = residual_equations(&pt("0:-1:1"), &g).unwrap();
        // a3 a4 - a2 a5 + a1 a6 = 4*5 - 3*6 + 2*7
        assert_eq!(v[0], kk.int(16));
    }

    #[test]
    fn sampling_is_deterministic_and_certified() {
        let l = pt("0:-1:1");
        let p1 = sample_moduli_point(&l, 3, 200).unwrap().expect("certified point");
        let p2 = sample_moduli_point(&l, 3, 200).unwrap().unwrap();
        assert_eq!(p1, p2);
        assert!(p1.certified());
        let m = p1.matrix();
        let f = Polynomial::fermat(&k());
        assert_eq!(m.determinant().unwrap(), &f * &f);
        assert!(residual_equations(&l, p1.gamma()).unwrap().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn uk_action() {
        let l = pt("0:-1:1");
        let p = sample_moduli_point(&l, 1, 200).unwrap().unwrap();
        let kk = k();
        let c = &kk.int(2) + &kk.generator(1);
        let m = group_action(&GroupAction::Uk(c.clone()), &l, &p.matrix()).unwrap();
        let g = GammaBlock::from_lambda_matrix(&m).unwrap();
        let c2 = &c * &c;
        for i in 1..=3 {
            assert_eq!(g.get(i), &(p.gamma().get(i) * &c2));
            assert_eq!(&(g.get(i + 3) * &c2), p.gamma().get(i + 3));
        }
        for i in 7..=15 {
            assert_eq!(g.get(i), p.gamma().get(i));
        }
        let back = group_action(&GroupAction::Uk(c.inv().unwrap()), &l, &m).unwrap();
        assert_eq!(back, p.matrix());
        assert!(group_action(&GroupAction::Uk(kk.zero()), &l, &m).is_err());
    }

    #[test]
    fn s2_action_lands_on_dual_point() {
        for s in ["0:-1:1", "0:-w:1", "-w:0:1"] {
            let l = pt(s);
            let m = build_six_gen(&l, &GammaBlock::zero(&k())).unwrap();
            let m2 = group_action(&GroupAction::S2, &l, &m).unwrap();
            assert!(m2.is_skew());
            assert!(has_alpha_shape(&m2, &l.transpose().unwrap()).unwrap(), "{}", s);
        }
    }

    #[test]
    fn h_action_preserves_shape() {
        let t = NumberField::eisenstein_cbrt2();
        let g = cube_roots_of_minus_two(&t).unwrap();
        let l = CurvePoint::affine(t.one(), g[0].clone()).unwrap();
        let m = build_six_gen(&l, &GammaBlock::zero(&t)).unwrap();
        let ks = [t.int(2), t.int(3), t.one(), t.int(2)];
        let m2 = group_action(&GroupAction::H(ks), &l, &m).unwrap();
        assert!(m2.is_skew());
        assert!(has_alpha_shape(&m2, &l).unwrap());
        assert_eq!(m2.determinant().unwrap(), m.determinant().unwrap());
        let bad = [t.int(2), t.int(3), t.one(), t.int(1)];
        assert!(matches!(group_action(&GroupAction::H(bad), &l, &m), Err(ModuliError::GroupLaw(_))));
        let nd = pt("0:-1:1");
        let kk = k();
        let ks = [kk.one(), kk.zero(), kk.zero(), kk.one()];
        let m = build_six_gen(&nd, &GammaBlock::zero(&kk)).unwrap();
        assert_eq!(group_action(&GroupAction::H(ks), &nd, &m), Err(ModuliError::NotSelfDual));
    }

    #[test]
    fn decomposition() {
        let kk = k();
        let l = pt("0:-1:1");
        let g = gamma2_solve(&l, &[kk.one(), kk.int(2), kk.zero()]).unwrap();
        let m = build_six_gen(&l, &g).unwrap();
        let d = decompose_if_gamma_zero(&m).unwrap().unwrap();
        let det1 = d.first.determinant().unwrap();
        let det2 = d.second.determinant().unwrap();
        assert_eq!(&det1 * &det2, -&m.determinant().unwrap());
        let mut g1 = g.clone();
        g1.set(1, kk.one());
        let m1 = build_six_gen(&l, &g1).unwrap();
        assert_eq!(decompose_if_gamma_zero(&m1).unwrap(), None);
    }

    #[test]
    fn sign_normalizer() {
        let kk = k();
        let l = pt("0:-1:1");
        let p = sample_moduli_point(&l, 2, 200).unwrap().unwrap();
        let m = p.matrix();
        let (flip, _) = normalize_pfaffian_sign(&m.neg()).unwrap();
        assert_eq!(flip.pfaffian().unwrap(), Polynomial::fermat(&kk));
        let (same, perm) = normalize_pfaffian_sign(&m).unwrap();
        assert_eq!(same, m);
        assert_eq!(perm, PolyMatrix::identity(&kk, 6));
    }
}
