#[path = "support/gen.rs"]
mod gen;

use crnorm_core::algebra::{Monomial, Scalar, TVar, TruncatedSeries, Var, WeightProfile};
use crnorm_core::germ::{apply_transform, complexify, is_regular, pullback, realify, verify_reality_identity, RealDefiningSeries};
use crnorm_core::nondeg::{k_nondegeneracy, levi_form};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const OMEGA: u32 = 6;

fn coeff() -> impl Strategy<Value = Scalar> {
    (-3i64..=3, -3i64..=3).prop_map(|(a, b)| Scalar::gauss(a, b))
}

/// Real regular germ: terms `c z^a zb^b s^k` with `|a|, |b| >= 1`, plus
/// conjugates.
fn regular_phi() -> impl Strategy<Value = TruncatedSeries> {
    let mono = (0u8..=2, 0u8..=2, 0u8..=2, 0u8..=2, 0u8..=1).prop_filter("regular, in range", |&(a, b, c, d, t)| {
        a + b >= 1 && c + d >= 1 && Monomial::new(a, b, c, d, t).weighted_degree(2) <= OMEGA
    });
    prop::collection::vec((mono, coeff()), 1..6).prop_map(|raw| {
        let p = WeightProfile::new(2, OMEGA);
        let mut f = TruncatedSeries::zero(p, TVar::S);
        for ((a, b, c, d, t), v) in raw {
            let m = Monomial::new(a, b, c, d, t);
            let c = if m == m.mirror() { v.re() } else { v };
            let term = TruncatedSeries::monomial(p, TVar::S, m, c.clone());
            let mirror = TruncatedSeries::monomial(p, TVar::S, m.mirror(), c.conj());
            f = f.add(&term);
            if m != m.mirror() {
                f = f.add(&mirror);
            }
        }
        f
    })
}

fn is_w(f: &TruncatedSeries) -> bool {
    *f == TruncatedSeries::var(f.profile(), Var::W)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn complexify_gives_complex_regular_form(phi in regular_phi()) {
        let germ = RealDefiningSeries::new(phi).unwrap();
        prop_assert!(is_regular(&germ.phi));
        let cd = complexify(&germ).unwrap();
        prop_assert!(verify_reality_identity(&cd));
        prop_assert!(is_w(&cd.qbar.filter(|m| m.z_degree() == 0)));
        prop_assert!(is_w(&cd.qbar.filter(|m| m.zb_degree() == 0)));
        prop_assert_eq!(realify(&cd).unwrap(), germ);
    }

    #[test]
    fn pullback_respects_composition(phi in regular_phi(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = phi.profile();
        let t1 = gen::random_jet(&mut ChaCha8Rng::seed_from_u64(s1), p);
        let t2 = gen::random_jet(&mut ChaCha8Rng::seed_from_u64(s2), p);
        let stepwise = pullback(&pullback(&phi, &t1).unwrap(), &t2).unwrap();
        let at_once = pullback(&phi, &t1.compose(&t2).unwrap()).unwrap();
        prop_assert_eq!(stepwise.chop(), at_once.chop());
    }

    #[test]
    fn transformed_germs_are_regular_and_real(phi in regular_phi(), seed in any::<u64>()) {
        let germ = RealDefiningSeries::new(phi).unwrap();
        let t = gen::random_jet(&mut ChaCha8Rng::seed_from_u64(seed), germ.profile());
        let moved = apply_transform(&germ, &t).unwrap();
        prop_assert!(is_regular(&moved.phi));
        prop_assert!(verify_reality_identity(&complexify(&moved).unwrap()));
    }

    #[test]
    fn levi_data_is_consistent(phi in regular_phi()) {
        let cd = complexify(&RealDefiningSeries::new(phi).unwrap()).unwrap();
        let levi = levi_form(&cd);
        for j in 0..2 {
            for k in 0..2 {
                prop_assert_eq!(levi.matrix[j][k].clone(), levi.matrix[k][j].conj());
            }
        }
        let (np, nm, nz) = levi.eigen_signature;
        prop_assert_eq!(np + nm + nz, 2);
        let rep = k_nondegeneracy(&cd, 4).unwrap();
        prop_assert_eq!(rep.k == Some(1), nz == 0);
    }
}
