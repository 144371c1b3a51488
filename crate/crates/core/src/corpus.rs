//! Built-in example germs.

use thiserror::Error;

use crate::algebra::{series_root, AlgebraError, Monomial, Scalar, TVar, TruncatedSeries, Var, WeightProfile};
use crate::classify::ModelInvariants;
use crate::germ::{germ_at_point, make_regular, GermError, GlobalPoly, RealDefiningSeries};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CorpusError {
    #[error("unknown corpus key: {0}")]
    UnknownKey(String),
    #[error("point is not on the Freeman cubic")]
    OffSurface,
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CorpusKey {
    /// `Im w = |z1|^2 + |z2|^2`.
    Heisenberg,
    Model(ModelInvariants),
    /// `(Im Z1)^2 + (Im Z2)^2 = (Im Z3)^2` at `(0, i, i)`.
    Lightcone,
    /// `(Im Z1)^3 + (Im Z2)^3 = (Im Z3)^3` at a point.
    Freeman([Scalar; 3]),
    /// The quartet `|z1|^2 + z1^2 zb2 + zb1^2 z2 + q_k`, `k = 1..=4`.
    M(u8),
}

impl CorpusKey {
    /// Keys listed by `corpus-list`.
    pub fn standard() -> Vec<(String, CorpusKey)> {
        let mut v = vec![("heisenberg".to_string(), CorpusKey::Heisenberg), ("lightcone".to_string(), CorpusKey::Lightcone)];
        v.push(("freeman:(0,i,i)".to_string(), CorpusKey::Freeman([Scalar::zero(), Scalar::i(), Scalar::i()])));
        for k in 1..=4 {
            v.push((format!("m{k}"), CorpusKey::M(k)));
        }
        v
    }

    pub fn weight_w(&self) -> u32 {
        match self {
            CorpusKey::Model(m) => m.tag().weight_w(),
            _ => 2,
        }
    }

    pub fn build(&self, order: u32) -> Result<RealDefiningSeries, CorpusError> {
        let p = WeightProfile::new(self.weight_w(), order);
        match self {
            CorpusKey::Heisenberg => Ok(RealDefiningSeries::new(TruncatedSeries::from_terms(
                p,
                TVar::S,
                [(Monomial::new(1, 0, 1, 0, 0), Scalar::one()), (Monomial::new(0, 1, 0, 1, 0), Scalar::one())],
            ))?),
            CorpusKey::Model(m) => Ok(m.model_germ(order)),
            CorpusKey::Lightcone => lightcone(p),
            CorpusKey::Freeman(pt) => freeman(pt, p),
            CorpusKey::M(k) => m_quartet(*k, p),
        }
    }
}

/// Freeman point `(i x1, i x2, i x3)` with `x3` the real cube root of
/// `x1^3 + x2^3`.
pub fn freeman_point(x1: &Scalar, x2: &Scalar) -> [Scalar; 3] {
    let x3 = x1.pow(3).add(&x2.pow(3)).cbrt_real();
    [x1, x2, &x3].map(|x| Scalar::i().mul(x))
}

/// `Im Z_k = (Z_k - Zb_k) / 2i` as a global polynomial.
fn im_z(k: usize) -> GlobalPoly {
    GlobalPoly::var(k).sub(&GlobalPoly::var(k + 3)).scale(&Scalar::frac(0, 1, -1, 2))
}

pub fn freeman_polynomial() -> GlobalPoly {
    im_z(0).pow(3).add(&im_z(1).pow(3)).sub(&im_z(2).pow(3))
}

fn freeman(pt: &[Scalar; 3], p: WeightProfile) -> Result<RealDefiningSeries, CorpusError> {
    germ_at_point(&freeman_polynomial(), pt, p).map_err(|e| match e {
        GermError::NotOnSurface => CorpusError::OffSurface,
        e => e.into(),
    })
}

/// `w - wb = -2i + sqrt((z1 - zb1)^2 + (z2 - zb2 + 2i)^2)` on the branch
/// through `2i`, made regular.
fn lightcone(p: WeightProfile) -> Result<RealDefiningSeries, CorpusError> {
    let v = |x: Var| TruncatedSeries::var(p, x);
    let d1 = v(Var::Z1).sub(&v(Var::Zb1));
    let d2 = v(Var::Z2).sub(&v(Var::Zb2)).add_constant(&Scalar::gauss(0, 2));
    let root = series_root(&d1.mul(&d1).add(&d2.mul(&d2)), 2, &Scalar::gauss(0, 2))?;
    let phi = root.add_constant(&Scalar::gauss(0, -2)).scale(&Scalar::frac(0, 1, -1, 2));
    Ok(make_regular(&phi.chop())?.0)
}

fn m_quartet(k: u8, p: WeightProfile) -> Result<RealDefiningSeries, CorpusError> {
    let m = Monomial::new;
    let one = Scalar::one();
    let mut terms = vec![(m(1, 0, 1, 0, 0), one.clone()), (m(2, 0, 0, 1, 0), one.clone()), (m(0, 1, 2, 0, 0), one.clone())];
    match k {
        1 => terms.push((m(0, 2, 0, 2, 0), Scalar::from_int(-1))),
        2 => {}
        3 => {
            terms.push((m(1, 1, 0, 2, 0), one.clone()));
            terms.push((m(0, 2, 1, 1, 0), one));
        }
        4 => terms.push((m(0, 2, 0, 2, 0), one)),
        _ => return Err(CorpusError::UnknownKey(format!("m{k}"))),
    }
    Ok(RealDefiningSeries::new(TruncatedSeries::from_terms(p, TVar::S, terms))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify, Classification, NotApplicableReason, TypeTag};

    #[test]
    fn lightcone_is_regular_and_exact() {
        let g = CorpusKey::Lightcone.build(5).unwrap();
        assert!(g.regular);
        assert!(g.phi.is_exact());
        assert!(g.phi.coeff(&Monomial::new(1, 0, 1, 0, 0)).is_zero() || g.phi.coeff(&Monomial::new(0, 1, 0, 1, 0)).is_zero());
    }

    #[test]
    fn lightcone_classifies_as_ai2() {
        let g = CorpusKey::Lightcone.build(5).unwrap();
        let r = classify(&g).unwrap();
        assert_eq!(r.result().unwrap().invariants.tag(), TypeTag::Ai2);
    }

    #[test]
    fn freeman_at_origin_is_three_nondegenerate() {
        let g = CorpusKey::Freeman([Scalar::zero(), Scalar::i(), Scalar::i()]).build(5).unwrap();
        match classify(&g).unwrap() {
            Classification::NotApplicable { reason, report } => {
                assert_eq!(reason, NotApplicableReason::KNotTwo(Some(3)));
                assert_eq!(report.levi.eigen_signature, (0, 0, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn off_surface_point_is_rejected() {
        let k = CorpusKey::Freeman([Scalar::i(), Scalar::i(), Scalar::i()]);
        assert_eq!(k.build(4).unwrap_err(), CorpusError::OffSurface);
    }

    #[test]
    fn heisenberg_is_levi_nondegenerate() {
        let g = CorpusKey::Heisenberg.build(4).unwrap();
        assert!(matches!(
            classify(&g).unwrap(),
            Classification::NotApplicable { reason: NotApplicableReason::LeviNondegenerate, .. }
        ));
    }
}
