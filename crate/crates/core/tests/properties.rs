use cubic_mf::field::{FieldElement, NumberField};
use cubic_mf::linalg::FMatrix;
use cubic_mf::matrix::PolyMatrix;
use cubic_mf::poly::{Monomial, Polynomial};
use proptest::prelude::*;

fn tower() -> NumberField {
    NumberField::eisenstein_cbrt2()
}

// c0 + c1 w + c2 g + c3 w g + c4 g^2 + c5 w g^2, over a common denominator
fn element() -> impl Strategy<Value = FieldElement> {
    (prop::array::uniform6(-6i64..=6), 1i64..=4).prop_map(|(c, d)| {
        let k = tower();
        let (w, g) = (k.generator(1), k.generator(2));
        let basis = [k.one(), w.clone(), g.clone(), &w * &g, &g * &g, &(&w * &g) * &g];
        let s = basis.iter().zip(c).fold(k.zero(), |acc, (b, c)| &acc + &(b * &k.int(c)));
        &s * &k.rat(1, d)
    })
}

fn eis_element() -> impl Strategy<Value = FieldElement> {
    (-5i64..=5, -5i64..=5).prop_map(|(a, b)| {
        let k = NumberField::eisenstein();
        &k.int(a) + &(&k.int(b) * &k.generator(1))
    })
}

fn eis_poly(max_terms: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::array::uniform4(0u32..=max_deg), eis_element()), 0..=max_terms).prop_map(|ts| {
        let k = NumberField::eisenstein();
        ts.into_iter().fold(Polynomial::zero(&k), |acc, (e, c)| {
            let m = (1..=4).fold(Monomial::one(), |m, i| {
                (0..e[i - 1]).fold(m, |m, _| m.mul(&Monomial::var(i)))
            });
            &acc + &Polynomial::term(m, c)
        })
    })
}

fn linear_form() -> impl Strategy<Value = Polynomial> {
    prop::array::uniform4(eis_element()).prop_map(|c| {
        let k = NumberField::eisenstein();
        c.into_iter()
            .enumerate()
            .fold(Polynomial::zero(&k), |acc, (i, c)| &acc + &Polynomial::term(Monomial::var(i + 1), c))
    })
}

fn skew(n: usize) -> impl Strategy<Value = PolyMatrix> {
    prop::collection::vec(linear_form(), n * (n - 1) / 2).prop_map(move |v| {
        let k = NumberField::eisenstein();
        let mut m = PolyMatrix::zeros(&k, n, n);
        let mut it = v.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let p = it.next().unwrap();
                m.set(j, i, -&p);
                m.set(i, j, p);
            }
        }
        m
    })
}

fn point() -> impl Strategy<Value = [FieldElement; 4]> {
    prop::array::uniform4(eis_element())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_ring_axioms(a in element(), b in element(), c in element()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn field_inverse(a in element()) {
        prop_assume!(!a.is_zero());
        prop_assert!((&a * &a.inv().unwrap()).is_one());
    }

    #[test]
    fn field_display_parse_roundtrip(a in element()) {
        let k = tower();
        prop_assert_eq!(FieldElement::parse(&k, &a.to_string()).unwrap(), a);
    }

    #[test]
    fn poly_display_parse_roundtrip(p in eis_poly(6, 3)) {
        let k = NumberField::eisenstein();
        prop_assert_eq!(Polynomial::parse(&k, &p.to_string()).unwrap(), p);
    }

    #[test]
    fn eval_is_a_ring_homomorphism(p in eis_poly(5, 2), q in eis_poly(5, 2), x in point()) {
        prop_assert_eq!((&p + &q).eval(&x), &p.eval(&x) + &q.eval(&x));
        prop_assert_eq!((&p * &q).eval(&x), &p.eval(&x) * &q.eval(&x));
    }

    #[test]
    fn restrict_then_eval(p in eis_poly(5, 3), x in point()) {
        let k = NumberField::eisenstein();
        let r = p.restrict(4, &Polynomial::zero(&k)).unwrap();
        let mut y = x.clone();
        y[3] = k.zero();
        prop_assert_eq!(r.eval(&x), p.eval(&y));
    }

    #[test]
    fn remainder_differs_by_a_multiple(p in eis_poly(5, 4)) {
        let k = NumberField::eisenstein();
        let f = Polynomial::fermat(&k);
        let r = p.rem(&f).unwrap();
        // p - r vanishes wherever f does
        let w = k.generator(1);
        for pt in [[k.one(), -k.one(), k.int(2), -k.int(2)], [k.one(), -w.clone(), k.zero(), k.zero()]] {
            prop_assert!(f.eval(&pt).is_zero());
            prop_assert_eq!(p.eval(&pt), r.eval(&pt));
        }
    }

    #[test]
    fn linear_part_is_degree_one(p in eis_poly(6, 3)) {
        let l = p.linear_part();
        prop_assert!(l.is_zero() || l.is_homogeneous() == (true, Some(1)));
        prop_assert_eq!(l, p.homogeneous_part(1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pfaffian_squared_is_determinant(m in prop_oneof![skew(2), skew(4), skew(6)]) {
        let pf = m.pfaffian().unwrap();
        prop_assert_eq!(&pf * &pf, m.determinant().unwrap());
    }

    #[test]
    fn pfaffian_adjoint_identity(m in prop_oneof![skew(2), skew(4), skew(6)]) {
        let k = NumberField::eisenstein();
        let pf = m.pfaffian().unwrap();
        let adj = m.pfaffian_adjoint().unwrap();
        prop_assert_eq!(m.mul(&adj).unwrap(), PolyMatrix::identity(&k, m.rows()).scale(&pf));
        prop_assert_eq!(adj.mul(&m).unwrap(), PolyMatrix::identity(&k, m.rows()).scale(&pf));
    }

    #[test]
    fn adjugate_identity(m in prop_oneof![skew(3), skew(4)]) {
        let k = NumberField::eisenstein();
        let d = m.determinant().unwrap();
        prop_assert_eq!(m.mul(&m.adjugate().unwrap()).unwrap(), PolyMatrix::identity(&k, m.rows()).scale(&d));
    }

    #[test]
    fn pfaffian_vector_in_kernel(m in prop_oneof![skew(3), skew(5)]) {
        let k = NumberField::eisenstein();
        let v = m.pfaffian_vector().unwrap();
        let col = PolyMatrix::from_fn(&k, v.len(), 1, |i, _| v[i].clone());
        prop_assert!(m.mul(&col).unwrap().is_zero());
    }

    #[test]
    fn gorenstein_assembly_is_skew(m in skew(5), v in prop::collection::vec(linear_form(), 5)) {
        let k = NumberField::eisenstein();
        let col = PolyMatrix::from_fn(&k, 5, 1, |i, _| v[i].clone());
        let big = PolyMatrix::assemble_gorenstein_skew(&m, &col).unwrap();
        prop_assert!(big.is_skew());
        prop_assert_eq!(big.rows(), 6);
    }

    #[test]
    fn fmatrix_kernel_is_annihilated(rows in prop::collection::vec(prop::collection::vec(eis_element(), 5), 1..5)) {
        let k = NumberField::eisenstein();
        let m = FMatrix::from_rows(&k, rows);
        let ns = m.nullspace();
        prop_assert_eq!(ns.len() + m.rank(), m.cols);
        for v in ns {
            let col = FMatrix::from_rows(&k, v.into_iter().map(|x| vec![x]).collect());
            prop_assert!(m.mul(&col).is_zero());
        }
    }
}
