//! Levi form, order of finite nondegeneracy at the origin, and the Levi
//! degeneracy determinant near the origin.

use thiserror::Error;

use crate::algebra::{
    partial_derivative, series_inverse, weighted_component, AlgebraError, Monomial, Scalar, TVar,
    TruncatedSeries, Var,
};
use crate::germ::{realify, ComplexDefining, GermError};
use crate::linsolve::rank;

pub const DEFAULT_K_MAX: u32 = 4;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NondegError {
    #[error("k_max = {k_max} needs truncation order at least {needed}, have {have}")]
    Truncation { k_max: u32, needed: u32, have: u32 },
    #[error("determinant needs weighted degree {needed}, truncation leaves {have}; raise the order")]
    DeterminantTruncation { needed: u32, have: u32 },
    #[error("Levi form is nondegenerate at the origin")]
    LeviNondegenerate,
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Levi matrix `h[j][k] = (i/2) Qbar_{z_j zb_k}(0)`, which equals the complex
/// Hessian `phi_{z_j zb_k}(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeviData {
    pub matrix: [[Scalar; 2]; 2],
    /// `(n_plus, n_minus, n_zero)`.
    pub eigen_signature: (u32, u32, u32),
}

impl LeviData {
    pub fn rank(&self) -> u32 {
        2 - self.eigen_signature.2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NondegReport {
    pub k: Option<u32>,
    pub levi: LeviData,
    /// `Qbar_{z zb^a}(0)` for `a` = (1,0), (0,1), (2,0), (1,1), (0,2).
    pub two_nondeg_vectors: [[Scalar; 2]; 5],
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// `d_{z_j} d_zb^a Qbar (0)`.
fn derivative_at_zero(qbar: &TruncatedSeries, j: usize, a: [u8; 2]) -> Scalar {
    let mut e = [0u8; 5];
    e[j] = 1;
    e[2] = a[0];
    e[3] = a[1];
    qbar.coeff(&Monomial(e)).scale_int(factorial(a[0] as u32) * factorial(a[1] as u32))
}

fn signature(m: &[[Scalar; 2]; 2]) -> (u32, u32, u32) {
    let scale = m.iter().flatten().map(|x| x.abs_f64()).fold(0.0, f64::max);
    let a = m[0][0].re();
    let d = m[1][1].re();
    let det = a.mul(&d).sub(&m[0][1].norm_sqr());
    let sign = |x: &Scalar, sc: f64| x.real_sign(sc);
    match sign(&det, scale * scale) {
        1 => {
            if sign(&a, scale) > 0 || (sign(&a, scale) == 0 && sign(&d, scale) > 0) {
                (2, 0, 0)
            } else {
                (0, 2, 0)
            }
        }
        -1 => (1, 1, 0),
        _ => {
            let s = match sign(&a, scale) {
                0 => sign(&d, scale),
                s => s,
            };
            match s {
                1 => (1, 0, 1),
                -1 => (0, 1, 1),
                _ => (0, 0, 2),
            }
        }
    }
}

pub fn levi_form(cd: &ComplexDefining) -> LeviData {
    let half_i = Scalar::frac(0, 1, 1, 2);
    let matrix: [[Scalar; 2]; 2] = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let mut a = [0u8; 2];
            a[k] = 1;
            derivative_at_zero(&cd.qbar, j, a).mul(&half_i)
        })
    });
    let eigen_signature = signature(&matrix);
    LeviData { matrix, eigen_signature }
}

/// Smallest `k <= k_max` such that the vectors `Qbar_{z zb^a}(0)`,
/// `1 <= |a| <= k`, span `C^2`.
pub fn k_nondegeneracy(cd: &ComplexDefining, k_max: u32) -> Result<NondegReport, NondegError> {
    let have = cd.qbar.order_cap();
    if k_max + 1 > have {
        return Err(NondegError::Truncation { k_max, needed: k_max + 1, have });
    }
    let vec_of = |a: [u8; 2]| -> Vec<Scalar> { (0..2).map(|j| derivative_at_zero(&cd.qbar, j, a)).collect() };
    let levi = levi_form(cd);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut k = None;
    for order in 1..=k_max {
        for a0 in (0..=order).rev() {
            rows.push(vec_of([a0 as u8, (order - a0) as u8]));
        }
        if rank(&rows) == 2 {
            k = Some(order);
            break;
        }
    }
    let five = [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]].map(|a| {
        let v = vec_of(a);
        [v[0].clone(), v[1].clone()]
    });
    Ok(NondegReport { k, levi, two_nondeg_vectors: five })
}

/// The determinant `D = det(rho_Z, L1 rho_Z, L2 rho_Z)` for
/// `rho = w - wb - 2i phi(z, zb, (w + wb)/2)` and the CR fields
/// `L_k = d_{zb_k} + a_k d_{wb}` normalized by their `d_{zb_k}` coefficient,
/// as a series in `(z, zb, s)` on the surface.
///
/// For `phi = |z1|^2 + p3 + O(4)` its weighted-degree-1 part is
/// `-4 p3_{z2 zb2}`; for `phi = p3 + O(4)` (weight 3) its lowest part is
/// `-4 (p3_{z1 zb1} p3_{z2 zb2} - |p3_{z1 zb2}|^2)`.
pub fn levi_degeneracy_determinant(cd: &ComplexDefining) -> Result<TruncatedSeries, NondegError> {
    if levi_form(cd).eigen_signature.2 == 0 {
        return Err(NondegError::LeviNondegenerate);
    }
    let phi = realify(cd)?.phi;
    determinant_of(&phi)
}

fn determinant_of(phi: &TruncatedSeries) -> Result<TruncatedSeries, NondegError> {
    let d = |f: &TruncatedSeries, v: Var| partial_derivative(f, v, 1);
    let i = Scalar::i();
    let m2i = Scalar::gauss(0, -2);
    let mi = Scalar::gauss(0, -1);
    let mhalf_i = Scalar::frac(0, 1, -1, 2);
    let one = Scalar::one();
    let phi_s = d(phi, Var::S)?;
    let zs = [Var::Z1, Var::Z2];
    let zbs = [Var::Zb1, Var::Zb2];
    let phi_z: Vec<TruncatedSeries> = zs.iter().map(|v| d(phi, *v)).collect::<Result<_, _>>()?;
    let phi_zb: Vec<TruncatedSeries> = zbs.iter().map(|v| d(phi, *v)).collect::<Result<_, _>>()?;
    let unit_inv = series_inverse(&phi_s.scale(&i).add_constant(&one))?;
    let row0 = [
        phi_z[0].scale(&m2i),
        phi_z[1].scale(&m2i),
        phi_s.scale(&mi).add_constant(&one),
    ];
    let mut rows = vec![row0];
    for k in 0..2 {
        let a_k = phi_zb[k].scale(&m2i).mul(&unit_inv);
        let mut row = Vec::with_capacity(3);
        for j in 0..2 {
            let zz = d(&phi_z[j], zbs[k])?.scale(&m2i);
            let zw = d(&phi_z[j], Var::S)?.scale(&mi);
            row.push(zz.add(&a_k.mul(&zw)));
        }
        let wz = d(&phi_s, zbs[k])?.scale(&mi);
        let ww = d(&phi_s, Var::S)?.scale(&mhalf_i);
        row.push(wz.add(&a_k.mul(&ww)));
        rows.push([row[0].clone(), row[1].clone(), row[2].clone()]);
    }
    let m = |r: usize, c: usize| &rows[r][c];
    let det = m(0, 0)
        .mul(&m(1, 1).mul(m(2, 2)).sub(&m(1, 2).mul(m(2, 1))))
        .sub(&m(0, 1).mul(&m(1, 0).mul(m(2, 2)).sub(&m(1, 2).mul(m(2, 0)))))
        .add(&m(0, 2).mul(&m(1, 0).mul(m(2, 1)).sub(&m(1, 1).mul(m(2, 0)))));
    Ok(det.with_tvar(TVar::S).chop())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyReport {
    pub levi: LeviData,
    /// Lowest-order condition: `p3_{z2 zb2} = 0` when the Levi form has rank
    /// one, the vanishing of the 2x2 Hessian determinant of `p3` when it is
    /// zero.
    pub cubic_condition: bool,
    /// Next-order condition `F4_{z2 zb2} = 4 |z1|^2` (rank-one case with the
    /// cubic condition satisfied).
    pub quartic_condition: Option<bool>,
    /// `D` vanishes to the available truncation.
    pub determinant_vanishes: bool,
    /// True when the cubic condition fails, which rules out Levi degeneracy
    /// on a neighbourhood.
    pub certified_not_everywhere_degenerate: bool,
}

/// Evaluates the necessary conditions for Levi degeneracy on a
/// neighbourhood of the origin from the low-order parts of `D`.
pub fn everywhere_degenerate_check(cd: &ComplexDefining) -> Result<DegeneracyReport, NondegError> {
    let levi = levi_form(cd);
    if levi.eigen_signature.2 == 0 {
        let no = DegeneracyReport {
            levi,
            cubic_condition: false,
            quartic_condition: None,
            determinant_vanishes: false,
            certified_not_everywhere_degenerate: true,
        };
        return Ok(no);
    }
    let mut phi = realify(cd)?.phi;
    let rank_one = levi.rank() == 1;
    if !rank_one {
        let order = phi.order_cap();
        phi = phi.reweight(3, order);
    }
    let det = determinant_of(&phi)?;
    let lowest = if rank_one { 1 } else { 2 };
    // Both the cubic and the quartic condition read weighted degree <= 2.
    if det.order_cap() < 2 {
        return Err(NondegError::DeterminantTruncation { needed: 2, have: det.order_cap() });
    }
    let vanishes = |nu: u32| weighted_component(&det, nu).chop().is_zero();
    let cubic = vanishes(lowest);
    let quartic = (rank_one && cubic).then(|| vanishes(2));
    Ok(DegeneracyReport {
        levi,
        cubic_condition: cubic,
        quartic_condition: quartic,
        determinant_vanishes: det.is_zero(),
        certified_not_everywhere_degenerate: !cubic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WeightProfile;
    use crate::germ::{complexify, RealDefiningSeries};

    fn rv(v: Var) -> TruncatedSeries {
        TruncatedSeries::var(WeightProfile::new(2, 6), v).with_tvar(TVar::S)
    }

    fn cd(phi: TruncatedSeries) -> ComplexDefining {
        complexify(&RealDefiningSeries::new(phi).unwrap()).unwrap()
    }

    fn sq(a: Var, b: Var) -> TruncatedSeries {
        rv(a).mul(&rv(b))
    }

    #[test]
    fn heisenberg_is_levi_nondegenerate() {
        let r = k_nondegeneracy(&cd(sq(Var::Z1, Var::Zb1).add(&sq(Var::Z2, Var::Zb2))), 4).unwrap();
        assert_eq!(r.levi.eigen_signature, (2, 0, 0));
        assert_eq!(r.k, Some(1));
        let r = k_nondegeneracy(&cd(sq(Var::Z1, Var::Zb1).sub(&sq(Var::Z2, Var::Zb2))), 4).unwrap();
        assert_eq!(r.levi.eigen_signature, (1, 1, 0));
    }

    #[test]
    fn model_ai2_is_two_nondegenerate() {
        let p3 = rv(Var::Z1).pow(2).mul(&rv(Var::Zb2)).add(&rv(Var::Zb1).pow(2).mul(&rv(Var::Z2)));
        let c = cd(sq(Var::Z1, Var::Zb1).add(&p3));
        let r = k_nondegeneracy(&c, 4).unwrap();
        assert_eq!(r.levi.eigen_signature, (1, 0, 1));
        assert_eq!(r.k, Some(2));
        let rep = everywhere_degenerate_check(&c).unwrap();
        assert!(rep.cubic_condition);
        assert_eq!(rep.quartic_condition, Some(false));
    }

    #[test]
    fn hessian_determinant_at_weight_three() {
        let p = WeightProfile::new(3, 8);
        let v = |x: Var| TruncatedSeries::var(p, x).with_tvar(TVar::S);
        // z1 z2 zb1 + zb1^2 z2 + conjugates: the Hessian determinant of p3 is
        // -|z1 + 2 zb1|^2 up to the factor -4.
        let p3 = [(Var::Z1, Var::Z2, Var::Zb1), (Var::Zb1, Var::Zb1, Var::Z2)]
            .iter()
            .map(|&(a, b, c)| v(a).mul(&v(b)).mul(&v(c)))
            .fold(TruncatedSeries::zero(p, TVar::S), |acc, t| acc.add(&t));
        let phi = p3.add(&crate::algebra::conjugate_series(&p3).with_tvar(TVar::S));
        let rep = everywhere_degenerate_check(&cd(phi.clone())).unwrap();
        assert_eq!(rep.levi.rank(), 0);
        assert!(!rep.cubic_condition);
        let short = complexify(&RealDefiningSeries::new(phi.truncate(6)).unwrap()).unwrap();
        assert!(matches!(everywhere_degenerate_check(&short), Err(NondegError::DeterminantTruncation { .. })));
    }

    #[test]
    fn truncation_guard() {
        let c = cd(sq(Var::Z1, Var::Zb1));
        assert!(matches!(k_nondegeneracy(&c, 6), Err(NondegError::Truncation { .. })));
    }
}
