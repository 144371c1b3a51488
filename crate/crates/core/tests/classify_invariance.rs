use crnorm_core::algebra::{Monomial, Scalar, TVar, TruncatedSeries, WeightProfile};
use crnorm_core::classify::{classify, phi_from_cubic, ClassifyError, CubicData, ModelInvariants, MATCH_TOL};
use crnorm_core::germ::{apply_transform, HoloTransform, RealDefiningSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<ModelInvariants> {
    vec![
        ModelInvariants::Ai1 { gamma: 0 },
        ModelInvariants::Ai1 { gamma: 1 },
        ModelInvariants::Ai2,
        ModelInvariants::Ai3,
        ModelInvariants::Aii1 { r: Scalar::from_int(2) },
        ModelInvariants::Aii2,
        ModelInvariants::Aii3 { lambda: Scalar::gauss(1, 1) },
        ModelInvariants::Aii4 { mu: Scalar::gauss(0, 2), nu: Scalar::i() },
        ModelInvariants::Aii5 { eta: Scalar::gauss(1, -1) },
    ]
}

fn gauss(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::gauss(rng.gen_range(-2..=2), rng.gen_range(-2..=2))
}

fn random_jet(rng: &mut ChaCha8Rng, p: WeightProfile) -> HoloTransform {
    loop {
        let a: [[Scalar; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| gauss(rng)));
        let det = a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0]));
        let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
        if det.is_zero() {
            continue;
        }
        let lin = HoloTransform::linear(p, a, Scalar::from_int(c));
        let quad = |k: &mut ChaCha8Rng| {
            let terms = [(2, 0), (1, 1), (0, 2)]
                .map(|(x, y)| (Monomial::new(x, y, 0, 0, 0), gauss(k)));
            TruncatedSeries::from_terms(p, TVar::W, terms)
        };
        let f1 = lin.f1.add(&quad(rng));
        let f2 = lin.f2.add(&quad(rng));
        return HoloTransform::from_parts(f1, f2, lin.g).unwrap();
    }
}

#[test]
fn classification_is_invariant_under_random_jets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in models() {
        let germ = m.model_germ(4);
        for n in 0..25 {
            let t = random_jet(&mut rng, germ.profile());
            let g = apply_transform(&germ, &t).unwrap();
            let r = classify(&g).unwrap_or_else(|e| panic!("{m} #{n}: {e}"));
            let res = r.result().unwrap_or_else(|| panic!("{m} #{n}: not classified"));
            assert!(res.invariants.approx_eq(&m, MATCH_TOL), "{m} #{n}: got {}", res.invariants);
        }
    }
}

fn cubic(v: [(i64, i64); 6]) -> CubicData {
    CubicData::from_coeffs(v.map(|(a, b)| Scalar::gauss(a, b)))
}

/// Cubics that land in the reductions random jets rarely reach.
fn special_cubics() -> Vec<(&'static str, CubicData)> {
    vec![
        ("delta_ac zero", cubic([(1, 0), (1, 0), (1, 0), (1, 0), (0, 0), (1, 0)])),
        ("delta_ac zero, generic", cubic([(2, 0), (1, 1), (3, 0), (2, 0), (0, 0), (3, 0)])),
        ("delta_ac zero, complex", cubic([(0, 1), (2, 0), (1, -1), (1, 1), (0, 0), (2, 0)])),
        ("a2 zero", cubic([(1, 0), (1, 0), (1, 0), (0, 0), (0, 0), (1, 0)])),
        ("double root", cubic([(0, 2), (1, 0), (0, 0), (1, 0), (0, 0), (1, 0)])),
        ("double root, b1^2 = a1 c1", cubic([(0, 1), (1, 0), (0, -1), (1, 0), (0, 0), (1, 0)])),
        ("dense", cubic([(1, 2), (-1, 1), (2, 0), (0, 3), (1, -1), (2, 2)])),
    ]
}

#[test]
fn special_cubics_classify_consistently() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = WeightProfile::new(3, 4);
    for (name, c) in special_cubics() {
        let germ = RealDefiningSeries::new(phi_from_cubic(&c, &Scalar::zero(), p)).unwrap();
        let base = match classify(&germ) {
            Ok(r) => r.result().unwrap_or_else(|| panic!("{name}: not classified")).invariants.clone(),
            Err(e) => panic!("{name}: {e}"),
        };
        eprintln!("{name}: {base}");
        for n in 0..5 {
            let t = random_jet(&mut rng, p);
            let g = apply_transform(&germ, &t).unwrap();
            let r = classify(&g).unwrap_or_else(|e| panic!("{name} #{n}: {e}"));
            let inv = &r.result().unwrap().invariants;
            assert!(inv.approx_eq(&base, MATCH_TOL), "{name} #{n}: {inv} vs {base}");
        }
    }
}

#[test]
fn vanishing_c1_subcase_reports_open_question() {
    let p = WeightProfile::new(3, 4);
    let c = cubic([(0, 0), (1, 0), (0, 0), (0, 0), (0, 0), (1, 0)]);
    let germ = RealDefiningSeries::new(phi_from_cubic(&c, &Scalar::zero(), p)).unwrap();
    assert!(matches!(classify(&germ), Err(ClassifyError::OpenQuestion(_))));
}

fn classify_cubic(c: &CubicData, levi: i64) -> ModelInvariants {
    let w = if levi == 0 { 3 } else { 2 };
    let phi = phi_from_cubic(c, &Scalar::from_int(levi), WeightProfile::new(w, 4));
    let germ = RealDefiningSeries::new(phi).unwrap();
    classify(&germ).unwrap().result().expect("classified").invariants.clone()
}

#[test]
fn documented_cubic_examples() {
    let aii1 = classify_cubic(&cubic([(0, 0), (0, -1), (0, 0), (0, -4), (0, 0), (0, 0)]), 0);
    assert_eq!(aii1, ModelInvariants::Aii1 { r: Scalar::from_int(2) });

    // lambda = 2 b1 conj(c2) / |c1|^2 with b1 = 1 + i, c1 = 2, c2 = 3i.
    let aii3 = classify_cubic(&cubic([(0, 0), (1, 1), (2, 0), (0, 0), (0, 0), (0, 3)]), 0);
    assert_eq!(aii3, ModelInvariants::Aii3 { lambda: Scalar::frac(3, 2, -3, 2) });

    // (a1, c2) = (-2i, -2i), a2 = -2i conj(mu), c1 = -2i nu with mu = 2, nu = 1/2 + i.
    let aii4 = classify_cubic(&cubic([(0, -2), (0, 0), (2, -1), (0, -4), (0, 0), (0, -2)]), 0);
    assert_eq!(aii4, ModelInvariants::Aii4 { mu: Scalar::from_int(2), nu: Scalar::frac(1, 2, 1, 1) });

    let ai3 = classify_cubic(&cubic([(0, 0), (0, 0), (0, 0), (5, 3), (0, -1), (0, 0)]), 1);
    assert_eq!(ai3, ModelInvariants::Ai3);

    // b2^2 = a2 c2 with c2 != 0.
    let ai1 = classify_cubic(&cubic([(1, 0), (0, 0), (0, 0), (1, 0), (1, 0), (1, 0)]), 1);
    assert_eq!(ai1, ModelInvariants::Ai1 { gamma: 0 });
    let ai1 = classify_cubic(&cubic([(0, 0), (0, 0), (0, 0), (2, 0), (1, 0), (1, 0)]), 1);
    assert_eq!(ai1, ModelInvariants::Ai1 { gamma: 1 });

    let ai2 = classify_cubic(&cubic([(0, 1), (2, 0), (0, 0), (3, 0), (0, 0), (0, 0)]), 1);
    assert_eq!(ai2, ModelInvariants::Ai2);
}
