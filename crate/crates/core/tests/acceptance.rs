//! Acceptance harness: one PASS/FAIL line per criterion, exact arithmetic only.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cubic_mf::equiv::{catalog_distinctness, enumerate_classes, Catalog, Evidence, Outcome};
use cubic_mf::families::{
    build_six_gen, chart_transport_apply, curve_alpha, five_gen_catalog, five_gen_unnormalized_catalog,
    nonorientable_4gen_catalog, orientable_catalog, phi_lambda, psi_lambda, rank1_catalog, five_points_example,
    sample_surface_points, transport_matrices, CurveChart, CurvePoint, FamilyId,
};
use cubic_mf::field::{cube_roots_of_minus_two, special_roots, FieldElement, NumberField};
use cubic_mf::matrix::{verify_matrix_factorization, PolyMatrix};
use cubic_mf::moduli6::{
    decompose_if_gamma_zero, gamma2_solve, group_action, linear_equation_values, linear_system_nullity,
    sample_moduli_point, GammaBlock, GroupAction,
};
use cubic_mf::poly::{Monomial, Polynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome_ = Result<String, String>;

fn small(k: &NumberField, rng: &mut ChaCha8Rng) -> FieldElement {
    let w = k.generator(1);
    &k.int(rng.gen_range(-3..=3)) + &(&k.int(rng.gen_range(-3..=3)) * &w)
}

fn random_linear(k: &NumberField, rng: &mut ChaCha8Rng) -> Polynomial {
    (1..=4).fold(Polynomial::zero(k), |acc, i| {
        &acc + &Polynomial::term(Monomial::var(i), small(k, rng))
    })
}

fn random_skew(k: &NumberField, n: usize, rng: &mut ChaCha8Rng) -> PolyMatrix {
    let mut m = PolyMatrix::zeros(k, n, n);
    for i in 0..n {
        for j in i + 1..n {
            let p = random_linear(k, rng);
            m.set(j, i, -&p);
            m.set(i, j, p);
        }
    }
    m
}

fn criterion1() -> Outcome_ {
    let start = Instant::now();
    let k = NumberField::eisenstein();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in 0..200 {
        let n = [2, 4, 6][t % 3];
        let m = random_skew(&k, n, &mut rng);
        let pf = m.pfaffian().map_err(|e| e.to_string())?;
        let det = m.determinant().map_err(|e| e.to_string())?;
        if &pf * &pf != det {
            return Err(format!("matrix {} (n={}): Pf^2 != det", t, n));
        }
        let adj = m.pfaffian_adjoint().map_err(|e| e.to_string())?;
        if m.mul(&adj).map_err(|e| e.to_string())? != PolyMatrix::identity(&k, n).scale(&pf) {
            return Err(format!("matrix {} (n={}): M * adjoint != Pf * Id", t, n));
        }
    }
    let el = start.elapsed();
    if el > Duration::from_secs(30) {
        return Err(format!("identities hold but took {:.1?} (limit 30 s)", el));
    }
    Ok(format!("200 skew matrices (n = 2, 4, 6) in {:.1?}", el))
}

fn criterion2() -> Outcome_ {
    let start = Instant::now();
    let mut counts = vec![];
    let sweep = |name: &str, ids: Vec<FamilyId>, counts: &mut Vec<String>| -> Result<(), String> {
        for id in &ids {
            id.verify().map_err(|e| format!("{}: {}", id, e))?;
        }
        counts.push(format!("{} {}", ids.len(), name));
        Ok(())
    };
    sweep("non-orientable 4-gen", nonorientable_4gen_catalog(), &mut counts)?;
    sweep("5-gen", five_gen_catalog(), &mut counts)?;
    sweep("unnormalized 5-gen", five_gen_unnormalized_catalog(), &mut counts)?;
    sweep("orientable phi_sigma/psi_sigma", orientable_catalog(), &mut counts)?;
    sweep("3-gen alpha/beta/eta/theta", rank1_catalog(), &mut counts)?;
    let pts = sample_surface_points();
    let f = Polynomial::fermat(&NumberField::eisenstein());
    let mut charts = std::collections::BTreeSet::new();
    for p in &pts {
        verify_matrix_factorization(&phi_lambda(p), &psi_lambda(p), &f).map_err(|e| format!("phi_lambda {}: {}", p, e))?;
        verify_matrix_factorization(&psi_lambda(p), &phi_lambda(p), &f).map_err(|e| format!("psi_lambda {}: {}", p, e))?;
        charts.insert(format!("{:?}", p.chart()));
    }
    if pts.len() < 20 || charts.len() < 3 {
        return Err(format!("only {} lambda samples over {} charts", pts.len(), charts.len()));
    }
    counts.push(format!("{} lambda points x 2 over 3 charts", pts.len()));
    let el = start.elapsed();
    if el > Duration::from_secs(300) {
        return Err(format!("all identities hold but took {:.1?} (limit 5 min)", el));
    }
    Ok(format!("{} in {:.1?}", counts.join(", "), el))
}

fn criterion3() -> Outcome_ {
    let r = [
        (Catalog::Rank2_3gen, 72),
        (Catalog::Nonorientable4gen, 432),
        (Catalog::Nonorientable5gen, 162),
    ];
    let mut out = vec![];
    for (c, want) in r {
        let rep = enumerate_classes(c);
        if rep.count != want || rep.representatives.len() != rep.count {
            return Err(format!("{}: {} classes, expected {}", c.name(), rep.count, want));
        }
        out.push(format!("{}={}", c.name(), rep.count));
    }
    let rep = enumerate_classes(Catalog::Rank2_3gen);
    let twisted = rep.orbit_sizes.iter().filter(|&&s| s == 2).count();
    if twisted != 54 {
        return Err(format!("{} two-element eps-twist orbits, expected 54", twisted));
    }
    Ok(format!("{} parameter classes (54 eps-twist pairs; module isomorphisms are checked in criterion 4)", out.join(", ")))
}

fn criterion4() -> Outcome_ {
    let start = Instant::now();
    let mut out = vec![];
    let mut ok = true;
    for c in [Catalog::Nonorientable4gen, Catalog::Nonorientable5gen] {
        let rep = catalog_distinctness(c).map_err(|e| e.to_string())?;
        let scalar = rep.pairs.iter().filter(|p| p.method == Evidence::ScalarTest).count();
        if rep.equivalent != 0 || rep.inconclusive != 0 {
            ok = false;
            let lifted = rep.pairs.iter().filter(|p| p.method == Evidence::FullScalarTest).count();
            let bad: Vec<String> = rep
                .pairs
                .iter()
                .filter(|p| p.outcome != Outcome::NotEquivalent)
                .take(2)
                .map(|p| format!("{} ~ {}", rep.representatives[p.pair.0], rep.representatives[p.pair.1]))
                .collect();
            out.push(format!(
                "{}: {} equivalent, {} inconclusive, {} reduced witnesses checked on the full matrices (e.g. {})",
                c.name(),
                rep.equivalent,
                rep.inconclusive,
                lifted,
                bad.join("; ")
            ));
        } else {
            out.push(format!("{}: {} pairs distinct ({} by scalar test)", c.name(), rep.pairs.len(), scalar));
        }
    }
    let el = start.elapsed();
    let msg = format!("{} in {:.1?}", out.join(", "), el);
    if !ok {
        return Err(msg);
    }
    if el > Duration::from_secs(600) {
        return Err(format!("{}; over the 10 min limit", msg));
    }
    Ok(msg)
}

fn criterion5() -> Outcome_ {
    let mut n = 0;
    for p in sample_surface_points() {
        if !phi_lambda(&p).is_skew() || !psi_lambda(&p).is_skew() {
            return Err(format!("phi/psi_lambda at {} not skew", p));
        }
        n += 2;
    }
    for id in orientable_catalog() {
        if !id.matrix().map_err(|e| e.to_string())?.is_skew() {
            return Err(format!("{} not skew", id));
        }
        n += 1;
    }
    let k = NumberField::eisenstein();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in ["0:-1:1", "0:-w:1", "-w:0:1", "1+w:0:1"] {
        let l = CurvePoint::parse(&k, s).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let a: Vec<FieldElement> = (0..15).map(|_| small(&k, &mut rng)).collect();
            let g = GammaBlock::from_slice(&k, &a)?;
            if !build_six_gen(&l, &g).map_err(|e| e.to_string())?.is_skew() {
                return Err(format!("Lambda at {} not skew", s));
            }
            n += 1;
        }
    }
    Ok(format!("{} matrices skew", n))
}

fn criterion6() -> Outcome_ {
    let k = NumberField::eisenstein();
    let t = NumberField::eisenstein_cbrt2();
    let roots = special_roots(&k).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut b0 = vec![];
    for a in &roots.roots_of_minus_one {
        if let Ok(p) = CurvePoint::affine(a.clone(), k.zero()) {
            b0.push(p);
        }
    }
    let mut bn = vec![];
    for b in &roots.roots_of_minus_one {
        bn.push(CurvePoint::affine(k.zero(), b.clone()).map_err(|e| e.to_string())?);
    }
    for g in cube_roots_of_minus_two(&t).map_err(|e| e.to_string())? {
        bn.push(CurvePoint::affine(t.one(), g).map_err(|e| e.to_string())?);
    }
    for l in b0.iter().chain(&bn) {
        let kk = l.field().clone();
        let (rank, nullity) = linear_system_nullity(l).map_err(|e| e.to_string())?;
        if (rank, nullity) != (6, 3) {
            return Err(format!("at {}: rank {}, nullity {}", l, rank, nullity));
        }
        for _ in 0..5 {
            let free: [FieldElement; 3] = std::array::from_fn(|_| small(&kk, &mut rng).embed(&kk).unwrap());
            let g = gamma2_solve(l, &free).map_err(|e| e.to_string())?;
            if linear_equation_values(l, &g).map_err(|e| e.to_string())?.iter().any(|v| !v.is_zero()) {
                return Err(format!("gamma2_solve output at {} misses a linear equation", l));
            }
        }
    }
    let self_dual = bn.iter().filter(|p| p.is_self_dual()).count();
    let detail = format!(
        "b=0: {} points, b!=0: {} points ({} self-dual in the degree-6 tower); nullity 3 and exact annihilation at all",
        b0.len(),
        bn.len(),
        self_dual
    );
    if b0.len() < 3 || bn.len() < 3 || self_dual == 0 {
        return Err(format!(
            "{}; the b=0 branch needs a^3 = -1 with a != -1, which has only {} solutions, so 3 points do not exist",
            detail,
            b0.len()
        ));
    }
    Ok(detail)
}

fn criterion7() -> Outcome_ {
    let k = NumberField::eisenstein();
    let l = CurvePoint::parse(&k, "0:-1:1").map_err(|e| e.to_string())?;
    let f = Polynomial::fermat(&k);
    let mut certified = vec![];
    for seed in 1..=10u64 {
        if let Some(p) = sample_moduli_point(&l, seed, 1000).map_err(|e| e.to_string())? {
            let m = p.matrix();
            let det = m.determinant().map_err(|e| e.to_string())?;
            let pf = m.pfaffian().map_err(|e| e.to_string())?;
            if !p.certified() || det != &f * &f || pf != f {
                return Err(format!("seed {}: returned point fails det = f^2 / Pf = f", seed));
            }
            certified.push(seed);
        }
    }
    if certified.is_empty() {
        return Err("no seed in 1..10 certified a point within 1000 trials".into());
    }
    Ok(format!("seeds certified: {:?}", certified))
}

fn criterion8() -> Outcome_ {
    let k = NumberField::eisenstein();
    let t = NumberField::eisenstein_cbrt2();
    let roots = special_roots(&k).map_err(|e| e.to_string())?;
    let mut a_nonzero = vec![];
    for a in &roots.roots_of_minus_one {
        if let Ok(p) = CurvePoint::affine(a.clone(), k.zero()) {
            a_nonzero.push(p);
        }
    }
    for g in cube_roots_of_minus_two(&t).map_err(|e| e.to_string())? {
        a_nonzero.push(CurvePoint::affine(t.one(), g).map_err(|e| e.to_string())?);
    }
    let a_zero: Vec<CurvePoint> = roots
        .roots_of_minus_one
        .iter()
        .map(|b| CurvePoint::affine(k.zero(), b.clone()).unwrap())
        .collect();
    for l in a_nonzero.iter().chain(&a_zero) {
        let (u, v) = transport_matrices(l).map_err(|e| e.to_string())?;
        let lt = l.transpose().map_err(|e| e.to_string())?;
        let lhs = u.mul(&curve_alpha(l).transpose()).map_err(|e| e.to_string())?;
        let rhs = curve_alpha(&lt).mul(&v).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!("U * alpha^t != alpha_t * V at {}", l));
        }
    }
    // [1:b:0] -> [0:b:1]
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut n63 = 0;
    for b in &roots.roots_of_minus_one {
        let l = CurvePoint::from_projective(&[k.one(), b.clone(), k.zero()]).map_err(|e| e.to_string())?;
        if l.chart() != CurveChart::Infinity {
            return Err("expected the [l:1:0] chart".into());
        }
        let target = CurvePoint::affine(k.zero(), b.clone()).map_err(|e| e.to_string())?;
        for trial in 0..3 {
            let g = if trial == 0 {
                GammaBlock::zero(&k)
            } else {
                GammaBlock::from_slice(&k, &(0..15).map(|_| small(&k, &mut rng)).collect::<Vec<_>>())?
            };
            let big = build_six_gen(&l, &g).map_err(|e| e.to_string())?;
            let moved = chart_transport_apply(&l, &big).map_err(|e| e.to_string())?;
            let shape = cubic_mf::moduli6::has_alpha_shape(&moved, &target).map_err(|e| e.to_string())?;
            if !shape {
                return Err(format!("transport of the [1:{}:0] matrix is not in the [0:{}:1] shape", b, b));
            }
            if moved.determinant().map_err(|e| e.to_string())? != big.determinant().map_err(|e| e.to_string())? {
                return Err(format!("transport at [1:{}:0] changes the determinant", b));
            }
            n63 += 1;
        }
    }
    Ok(format!(
        "U*alpha^t = alpha_t*V at {} points with a!=0 and {} with a=0; {} chart transports keep shape and det",
        a_nonzero.len(),
        a_zero.len(),
        n63
    ))
}

fn criterion9() -> Outcome_ {
    let ex = five_points_example();
    let k = NumberField::eisenstein();
    let f = Polynomial::fermat(&k);
    let a = &ex.a;
    let diag_zero = (0..6).all(|i| a.get(i, i).is_zero());
    let pf = a.pfaffian().map_err(|e| e.to_string())?;
    let det = a.determinant().map_err(|e| e.to_string())?;
    let mut zeros = 0;
    for p in &ex.points {
        if !f.eval(&p.homogeneous()).is_zero() {
            return Err(format!("point {} is not on V(f)", p));
        }
        for q in &ex.quadrics {
            if q.eval(&p.homogeneous()).is_zero() {
                zeros += 1;
            }
        }
    }
    let vec = a.submatrix(&[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4]).pfaffian_vector().map_err(|e| e.to_string())?;
    let quad_rows = cubic_mf::linalg::FMatrix::from_rows(
        &k,
        ex.quadrics.iter().map(|q| Monomial::of_degree(2).iter().map(|m| q.coefficient(m)).collect()).collect(),
    );
    let mut joint = quad_rows.clone();
    for v in &vec {
        joint.push_row(Monomial::of_degree(2).iter().map(|m| v.coefficient(m)).collect());
    }
    let info = format!(
        "skew={} zero diagonal={} points on V(f)=5 quadric zeros={}/25; Pf(A)={}; pfaffian-vector span rank {} vs quadrics {} (joint {})",
        a.is_skew(),
        diag_zero,
        zeros,
        pf,
        vec.len(),
        quad_rows.rank(),
        joint.rank()
    );
    let ok = a.is_skew() && diag_zero && &pf * &pf == det && det == &f * &f && zeros == 25;
    if ok {
        Ok(info)
    } else {
        let scale = pf.coefficient(&Monomial([3, 0, 0, 0]));
        Err(format!("{}; det(A) = ({})^2 * f^2, not f^2", info, scale))
    }
}

fn criterion10() -> Outcome_ {
    let k = NumberField::eisenstein();
    let l = CurvePoint::parse(&k, "0:-1:1").map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let c = loop {
            let c = small(&k, &mut rng);
            if !c.is_zero() {
                break c;
            }
        };
        let g = GammaBlock::from_slice(&k, &(0..15).map(|_| small(&k, &mut rng)).collect::<Vec<_>>())?;
        let m = build_six_gen(&l, &g).map_err(|e| e.to_string())?;
        let m2 = group_action(&GroupAction::Uk(c.clone()), &l, &m).map_err(|e| e.to_string())?;
        let g2 = GammaBlock::from_lambda_matrix(&m2).map_err(|e| e.to_string())?;
        let c2 = &c * &c;
        let c2inv = c2.inv().map_err(|e| e.to_string())?;
        for i in 1..=3 {
            if g2.get(i) != &(g.get(i) * &c2) || g2.get(i + 3) != &(g.get(i + 3) * &c2inv) {
                return Err(format!("Uk with k={} does not scale Gamma1/Gamma3 by k^2/k^-2", c));
            }
        }
        if (7..=15).any(|i| g2.get(i) != g.get(i)) {
            return Err(format!("Uk with k={} changes Gamma2", c));
        }
    }
    // Gamma1 = Gamma3 = 0 with det(Lambda) = f^2
    let f = Polynomial::fermat(&k);
    let g = gamma2_solve(&l, &[k.one(), -k.one(), -k.one()]).map_err(|e| e.to_string())?;
    let m = build_six_gen(&l, &g).map_err(|e| e.to_string())?;
    if m.determinant().map_err(|e| e.to_string())? != &f * &f {
        return Err("decomposable test matrix does not have det f^2".into());
    }
    let d = decompose_if_gamma_zero(&m).map_err(|e| e.to_string())?.ok_or("no decomposition for Gamma1 = Gamma3 = 0")?;
    for b in [&d.first, &d.second] {
        let det = b.determinant().map_err(|e| e.to_string())?;
        if det != f && det != -&f {
            return Err(format!("block determinant {} is not +-f", det));
        }
    }
    let mut g1 = g.clone();
    g1.set(2, k.one());
    let m1 = build_six_gen(&l, &g1).map_err(|e| e.to_string())?;
    if decompose_if_gamma_zero(&m1).map_err(|e| e.to_string())?.is_some() {
        return Err("decomposition returned although Gamma1 != 0".into());
    }
    Ok("20 random (k, Gamma) follow the k^2 / 1 / k^-2 law; Gamma1=Gamma3=0 splits into blocks of det +-f".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome_); 10] = [
        ("pfaffian calculus", criterion1),
        ("catalog identity sweep", criterion2),
        ("class counts", criterion3),
        ("pairwise distinctness", criterion4),
        ("skewness", criterion5),
        ("six-generated linear layer", criterion6),
        ("six-generated sampling", criterion7),
        ("transport identities", criterion8),
        ("five general points example", criterion9),
        ("group action laws", criterion10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        match run() {
            Ok(msg) => println!("criterion {:>2} PASS {}: {}", i + 1, name, msg),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {}: {}", i + 1, name, msg);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", failed);
        ExitCode::FAILURE
    }
}
