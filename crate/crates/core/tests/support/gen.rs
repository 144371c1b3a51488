//! Random generators shared by the normal-form tests.
#![allow(dead_code)]

use crnorm_core::algebra::{Monomial, Scalar, TVar, TruncatedSeries, WeightProfile};
use crnorm_core::germ::{HoloTransform, RealDefiningSeries};
use crnorm_core::normalform::{DegreeSystem, Membership, ModelType, NormalSpaceSpec, NormalizationP, TransformT};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ORDER: u32 = 8;

pub fn small(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::frac(rng.gen_range(-3..=3), rng.gen_range(1..=2), rng.gen_range(-3..=3), rng.gen_range(1..=2))
}

/// Exact unit complex numbers from Pythagorean triples.
pub fn unit(rng: &mut ChaCha8Rng) -> Scalar {
    let (a, b, c) = [(1, 0, 1), (3, 4, 5), (5, 12, 13), (0, 1, 1), (8, 15, 17)][rng.gen_range(0..5)];
    let s = if rng.gen_bool(0.5) { 1 } else { -1 };
    Scalar::frac(s * a, c, b, c)
}

pub fn random_p(model: ModelType, rng: &mut ChaCha8Rng) -> NormalizationP {
    let c = match model {
        ModelType::Ai1 { gamma: 0 } => [1, 64][rng.gen_range(0..2)],
        ModelType::Ai3 => [1, 16][rng.gen_range(0..2)],
        _ => [1, 4, 9][rng.gen_range(0..3)],
    };
    let mut entries = vec![("D".to_string(), small(rng)), ("C".to_string(), Scalar::from_int(c)), ("phase".to_string(), unit(rng))];
    if model == ModelType::Ai2 {
        entries.push(("A".to_string(), small(rng)));
    }
    entries.retain(|(k, _)| model != (ModelType::Ai1 { gamma: 1 }) || k == "D");
    for (k, _) in NormalizationP::identity(model).q.entries() {
        let v = if k == "r" { small(rng).re() } else { small(rng) };
        entries.push((k, v));
    }
    NormalizationP::from_entries(model, &entries).unwrap()
}

/// Real monomials of weighted degree `nu` with `m <= mirror(m)`.
pub fn canonical_monomials(nu: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for c in 0..=nu / 2 {
        let rest = nu - 2 * c;
        for k in 0..=rest {
            for a1 in 0..=k {
                for b1 in 0..=rest - k {
                    let m = Monomial::new(a1 as u8, (k - a1) as u8, b1 as u8, (rest - k - b1) as u8, c as u8);
                    if m <= m.mirror() {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

pub fn random_normal(model: ModelType, rng: &mut ChaCha8Rng) -> TruncatedSeries {
    let spec = NormalSpaceSpec::for_model(model);
    let p = WeightProfile::new(2, ORDER);
    let mut terms = Vec::new();
    for nu in 4..=ORDER {
        for m in canonical_monomials(nu) {
            if !rng.gen_bool(0.3) {
                continue;
            }
            let c = match spec.membership(&m) {
                Membership::None => continue,
                Membership::Imag => small(rng).im().mul(&Scalar::i()),
                Membership::Full if m == m.mirror() => small(rng).re(),
                Membership::Full => small(rng),
            };
            if c.is_zero() {
                continue;
            }
            if m != m.mirror() {
                terms.push((m.mirror(), c.conj()));
            }
            terms.push((m, c));
        }
    }
    TruncatedSeries::from_terms(p, TVar::S, terms)
}

pub fn random_t(model: ModelType, rng: &mut ChaCha8Rng) -> TransformT {
    let p = WeightProfile::new(2, ORDER);
    let mut t = TransformT::zero(p);
    for nu in 4..=ORDER {
        let sys = DegreeSystem::cached(model, nu).unwrap();
        let x: Vec<Scalar> = (0..sys.cols())
            .map(|_| if rng.gen_bool(0.25) { Scalar::from_int(rng.gen_range(-2..=2)) } else { Scalar::zero() })
            .collect();
        t = t.add(&sys.transform_from_coordinates(&x, p));
    }
    t
}

pub fn model_plus(model: ModelType, n: &TruncatedSeries) -> RealDefiningSeries {
    RealDefiningSeries::new(model.model_phi(ORDER).add(n)).unwrap()
}

fn gauss(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::gauss(rng.gen_range(-2..=2), rng.gen_range(-2..=2))
}

/// Invertible linear map plus random quadratic terms in `f1`, `f2`.
pub fn random_jet(rng: &mut ChaCha8Rng, p: WeightProfile) -> HoloTransform {
    loop {
        let a: [[Scalar; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| gauss(rng)));
        let det = a[0][0].mul(&a[1][1]).sub(&a[0][1].mul(&a[1][0]));
        if det.is_zero() {
            continue;
        }
        let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let lin = HoloTransform::linear(p, a, Scalar::from_int(c));
        let quad = |k: &mut ChaCha8Rng| {
            let terms = [(2, 0), (1, 1), (0, 2)].map(|(x, y)| (Monomial::new(x, y, 0, 0, 0), gauss(k)));
            TruncatedSeries::from_terms(p, TVar::W, terms)
        };
        let f1 = lin.f1.add(&quad(rng));
        let f2 = lin.f2.add(&quad(rng));
        return HoloTransform::from_parts(f1, f2, lin.g).unwrap();
    }
}
