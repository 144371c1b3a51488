#[path = "support/gen.rs"]
mod gen;

use crnorm_core::algebra::{Monomial, Scalar, TVar, TruncatedSeries, WeightProfile};
use crnorm_core::corpus::CorpusKey;
use crnorm_core::germ::{pullback, HoloTransform, RealDefiningSeries};
use crnorm_core::normalform::{
    apply_p, aut_dimension_report, equivalence_certificate, fourth_order_invariants, normalize_full, normalize_germ,
    Certificate, ModelType, NormalizationP,
};
use gen::{model_plus, random_normal, random_p, random_t, small, ORDER};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn apply_p_keeps_the_model_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in ModelType::ALL {
        let germ = model_plus(model, &random_normal(model, &mut rng));
        for _ in 0..4 {
            let p = random_p(model, &mut rng);
            let out = apply_p(&germ, &p).unwrap();
            assert_eq!(ModelType::detect(&out), Some(model));
        }
    }
}

#[test]
fn opposite_sign_of_the_quadratic_term_breaks_the_model() {
    let p = WeightProfile::new(2, 5);
    for model in ModelType::ALL {
        let norm = NormalizationP::from_entries(model, &[("D".into(), Scalar::gauss(1, 2))]).unwrap();
        let good = norm.to_holo(p).unwrap();
        let b = Monomial::new(2, 0, 0, 0, 0);
        let coeff = good.f1.coeff(&b);
        assert!(!coeff.is_zero());
        let flipped = good.f1.sub(&TruncatedSeries::monomial(p, TVar::W, b, coeff.scale_int(2)));
        let bad = HoloTransform { f1: flipped, ..good };
        let phi = crnorm_core::germ::pushforward(&model.model_phi(5), &bad).unwrap();
        assert_eq!(ModelType::detect(&RealDefiningSeries::new(phi).unwrap()), None, "{model}");
    }
}

#[test]
fn quartet_fourth_order_invariants() {
    let want = [(-1, 0), (0, 0), (0, 1), (1, 0)];
    for (k, w) in (1..=4).zip(want) {
        let g = CorpusKey::M(k).build(ORDER).unwrap();
        let nf = normalize_germ(&g, None, ORDER).unwrap();
        let inv = fourth_order_invariants(&nf.result).unwrap();
        assert_eq!((inv.delta22, inv.eps22), w, "M{k}");
    }
}

#[test]
fn round_trip_recovers_normal_form_and_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for model in ModelType::ALL {
        for _ in 0..2 {
            let n0 = random_normal(model, &mut rng);
            let t0 = random_t(model, &mut rng);
            assert!(t0.in_g0(model.family()));
            let target = model_plus(model, &n0);
            let m = RealDefiningSeries::new(pullback(&target.phi, &t0.to_holo()).unwrap().chop()).unwrap();
            let nf = normalize_full(&m, &NormalizationP::identity(model), ORDER).unwrap();
            assert_eq!(nf.normal, n0, "{model}");
            assert_eq!(nf.t, t0, "{model}");
        }
    }
}

#[test]
fn fourth_order_transformation_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..4 {
        let quartic = [((1, 1, 1, 1), small(&mut rng).re()), ((0, 2, 0, 2), small(&mut rng).re()), ((1, 1, 0, 2), small(&mut rng))];
        let mut terms = Vec::new();
        for ((a, b, c, d), v) in quartic {
            let m = Monomial::new(a, b, c, d, 0);
            if m != m.mirror() {
                terms.push((m.mirror(), v.conj()));
            }
            terms.push((m, v));
        }
        let n = TruncatedSeries::from_terms(WeightProfile::new(2, ORDER), TVar::S, terms);
        let germ = model_plus(ModelType::Ai2, &n);
        let p = random_p(ModelType::Ai2, &mut rng);
        let base = fourth_order_invariants(&normalize_full(&germ, &NormalizationP::identity(ModelType::Ai2), 4).unwrap()).unwrap();
        let moved = fourth_order_invariants(&normalize_full(&germ, &p, 4).unwrap()).unwrap();
        let lead = p.leading_entries();
        let get = |k: &str| lead.iter().find(|(n, _)| n == k).unwrap().1.clone();
        let (c, u, a) = (get("C"), get("phase"), get("A"));
        // The law for old = P'(new) with P' = P^{-1}, whose parameters are
        // (1/C, conj(u), -A u^-3 C^-1/2).
        assert_eq!(moved.c22, c.mul(&base.c22));
        let rhs = c.sqrt_real().mul(&u.mul(&base.b22).sub(&a.scale_int(2).mul(&u.conj()).mul(&base.c22)));
        assert_eq!(moved.b22, rhs);
        assert_eq!(moved.delta22, base.delta22);
    }
}

#[test]
fn aut_dimension_counts() {
    let r = aut_dimension_report(ModelType::Ai2);
    assert_eq!((r.stated_bound, r.computed_param_count), (45, 45));
    let g0 = aut_dimension_report(ModelType::Ai1 { gamma: 0 });
    let g1 = aut_dimension_report(ModelType::Ai1 { gamma: 1 });
    assert_eq!((g0.stated_bound, g0.computed_param_count), (17, 19));
    assert_eq!((g1.stated_bound, g1.computed_param_count), (19, 17));
    assert!(aut_dimension_report(ModelType::Ai3).agrees());
}

#[test]
fn equivalence_examples() {
    let m = |k| CorpusKey::M(k).build(ORDER).unwrap();
    assert!(matches!(equivalence_certificate(&m(1), &m(4), ORDER).unwrap(), Certificate::NonEquivalent(_)));
    assert!(matches!(equivalence_certificate(&m(2), &m(3), ORDER).unwrap(), Certificate::NonEquivalent(_)));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = random_t(ModelType::Ai2, &mut rng);
    let moved = RealDefiningSeries::new(pullback(&m(2).phi, &t.to_holo()).unwrap().chop()).unwrap();
    match equivalence_certificate(&m(2), &moved, ORDER).unwrap() {
        Certificate::SameNormalForm(pair) => {
            assert!(pair.0.result.t.is_zero());
            assert_eq!(pair.1.result.t, t);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn ai2_model_has_an_unpinned_quadratic_symmetry() {
    // z2 -> z2 + i z1^2 fixes the A.i.2 model exactly.
    let p = WeightProfile::new(2, 6);
    let id = HoloTransform::identity(p);
    let shift = TruncatedSeries::monomial(p, TVar::W, Monomial::new(2, 0, 0, 0, 0), Scalar::i());
    let t = HoloTransform { f2: id.f2.add(&shift), ..id };
    let phi = ModelType::Ai2.model_phi(6);
    assert_eq!(pullback(&phi, &t).unwrap().chop(), phi);
}

#[test]
fn fourth_order_sign_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let germ = model_plus(ModelType::Ai2, &random_normal(ModelType::Ai2, &mut rng));
        let nf = normalize_full(&germ, &NormalizationP::identity(ModelType::Ai2), 4).unwrap();
        let inv = fourth_order_invariants(&nf).unwrap();
        let sign = inv.c22.re_f64().partial_cmp(&0.0).unwrap() as i8;
        assert_eq!(inv.delta22, sign);
        assert_eq!(inv.delta22 * inv.eps22 as i8, 0);
        assert_eq!(inv.eps22 == 1, inv.delta22 == 0 && !inv.b22.is_zero());
        assert!(inv.a22.is_real() && inv.c22.is_real());
    }
}
