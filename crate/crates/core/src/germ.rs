//! Hypersurface germs `Im w = phi(z, zb, Re w)` and their complex defining
//! equations `wb = Qbar(zb, z, w)`, holomorphic coordinate changes, and
//! construction of germs from global polynomial equations.
//!
//! Transform convention: a [`HoloTransform`] `t = (f1, f2, g)` expresses the
//! old coordinates in terms of the new ones, `(z, w) = t(z', w')`, and
//! [`apply_transform`] returns the germ in the new coordinates.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{
    conjugate_series, is_real_series, partial_derivative, series_inverse, substitute, AlgebraError,
    Bindings, Monomial, Scalar, TVar, TruncatedSeries, Var, WeightProfile,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GermError {
    #[error("defining function is not real")]
    NotReal,
    #[error("germ is not in regular form")]
    NotRegular,
    #[error("transformation is not invertible")]
    NotInvertible,
    #[error("transformation has a constant term")]
    ConstantTerm,
    #[error("defining function has a constant or linear pure-s term")]
    TiltedTangent,
    #[error("z-linear harmonic terms together with s-dependence are not supported")]
    LinearHarmonic,
    #[error("complex defining equation violates the reality identity")]
    RealityIdentity,
    #[error("point is not on the surface")]
    NotOnSurface,
    #[error("gradient vanishes at the point")]
    DegenerateGradient,
    #[error("iteration did not converge")]
    NoConvergence,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `Im w = phi(z, zb, s)` with `s = Re w`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealDefiningSeries {
    pub phi: TruncatedSeries,
    /// `phi = phi(z, zb, 0) + s * phi_hat`.
    pub phi_hat: TruncatedSeries,
    pub regular: bool,
}

impl RealDefiningSeries {
    pub fn new(phi: TruncatedSeries) -> Result<RealDefiningSeries, GermError> {
        let phi = phi.with_tvar(TVar::S);
        if !is_real_series(&phi) {
            return Err(GermError::NotReal);
        }
        let w = phi.weight_w();
        if phi.terms().iter().any(|(m, _)| {
            m.z_degree() == 0 && m.zb_degree() == 0 && m.weighted_degree(w) <= w
        }) {
            return Err(GermError::TiltedTangent);
        }
        let phi_hat = TruncatedSeries::from_terms(
            phi.profile(),
            TVar::S,
            phi.terms().iter().filter(|(m, _)| m.t() > 0).map(|(m, c)| {
                let mut mm = *m;
                mm.0[4] -= 1;
                (mm, c.clone())
            }),
        );
        let regular = is_regular(&phi);
        Ok(RealDefiningSeries { phi, phi_hat, regular })
    }

    pub fn profile(&self) -> WeightProfile {
        self.phi.profile()
    }
}

/// No harmonic terms: `phi(0, zb, s) = phi(z, 0, s) = 0`.
pub fn is_regular(phi: &TruncatedSeries) -> bool {
    phi.terms().iter().all(|(m, _)| m.z_degree() > 0 && m.zb_degree() > 0)
}

/// `wb = qbar(z, zb, w)` together with its conjugate `w = q(z, zb, wb)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexDefining {
    pub qbar: TruncatedSeries,
    pub q: TruncatedSeries,
}

impl ComplexDefining {
    pub fn from_qbar(qbar: TruncatedSeries) -> ComplexDefining {
        let qbar = qbar.with_tvar(TVar::W);
        let q = conjugate_series(&qbar);
        ComplexDefining { qbar, q }
    }
}

/// Low-order coefficients of a transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearJet {
    /// `a[j][k]` is the coefficient of `z_(k+1)` in `f_(j+1)`.
    pub a: [[Scalar; 2]; 2],
    /// `f1 = ... + b[0] z1^2 + 2 b[1] z1 z2 + b[2] z2^2 + ...`.
    pub b: [Scalar; 3],
    /// Coefficient of `w` in `g`.
    pub c: Scalar,
    /// Coefficient of `w` in `f1`, `f2`.
    pub d: [Scalar; 2],
}

/// `(z, w) -> (f1(z, w), f2(z, w), g(z, w))`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloTransform {
    pub f1: TruncatedSeries,
    pub f2: TruncatedSeries,
    pub g: TruncatedSeries,
}

fn hvar(p: WeightProfile, v: Var) -> TruncatedSeries {
    TruncatedSeries::var(p, v).with_tvar(TVar::W)
}

impl HoloTransform {
    pub fn identity(p: WeightProfile) -> HoloTransform {
        HoloTransform { f1: hvar(p, Var::Z1), f2: hvar(p, Var::Z2), g: hvar(p, Var::W) }
    }

    /// `z -> a z`, `w -> c w`.
    pub fn linear(p: WeightProfile, a: [[Scalar; 2]; 2], c: Scalar) -> HoloTransform {
        let z1 = hvar(p, Var::Z1);
        let z2 = hvar(p, Var::Z2);
        HoloTransform {
            f1: z1.scale(&a[0][0]).add(&z2.scale(&a[0][1])),
            f2: z1.scale(&a[1][0]).add(&z2.scale(&a[1][1])),
            g: hvar(p, Var::W).scale(&c),
        }
    }

    pub fn from_parts(
        f1: TruncatedSeries,
        f2: TruncatedSeries,
        g: TruncatedSeries,
    ) -> Result<HoloTransform, GermError> {
        let t = HoloTransform {
            f1: f1.with_tvar(TVar::W),
            f2: f2.with_tvar(TVar::W),
            g: g.with_tvar(TVar::W),
        };
        for s in [&t.f1, &t.f2, &t.g] {
            if !s.constant_term().is_zero() {
                return Err(GermError::ConstantTerm);
            }
            if s.terms().iter().any(|(m, _)| m.zb_degree() > 0) {
                return Err(GermError::NotInvertible);
            }
        }
        Ok(t)
    }

    pub fn profile(&self) -> WeightProfile {
        self.f1.profile()
    }

    pub fn linear_jet(&self) -> LinearJet {
        let c = |s: &TruncatedSeries, m: Monomial| s.coeff(&m);
        let z1 = Monomial::var(Var::Z1);
        let z2 = Monomial::var(Var::Z2);
        let w = Monomial::var(Var::W);
        let half = Scalar::frac(1, 2, 0, 1);
        LinearJet {
            a: [[c(&self.f1, z1), c(&self.f1, z2)], [c(&self.f2, z1), c(&self.f2, z2)]],
            b: [
                c(&self.f1, Monomial::new(2, 0, 0, 0, 0)),
                c(&self.f1, Monomial::new(1, 1, 0, 0, 0)).mul(&half),
                c(&self.f1, Monomial::new(0, 2, 0, 0, 0)),
            ],
            c: c(&self.g, w),
            d: [c(&self.f1, w), c(&self.f2, w)],
        }
    }

    /// `A11 A22 - A12 A21`.
    pub fn det(&self) -> Scalar {
        let j = self.linear_jet();
        j.a[0][0].mul(&j.a[1][1]).sub(&j.a[0][1].mul(&j.a[1][0]))
    }

    pub fn is_invertible(&self) -> bool {
        let j = self.linear_jet();
        let det = self.det();
        let scale = j.a.iter().flatten().map(|x| x.abs_f64()).fold(0.0, f64::max);
        !det.is_negligible(scale * scale) && !j.c.is_negligible(0.0)
            && self.g.coeff(&Monomial::var(Var::Z1)).is_zero()
            && self.g.coeff(&Monomial::var(Var::Z2)).is_zero()
    }

    pub fn truncate(&self, order: u32) -> HoloTransform {
        HoloTransform { f1: self.f1.truncate(order), f2: self.f2.truncate(order), g: self.g.truncate(order) }
    }

    pub fn is_exact(&self) -> bool {
        self.f1.is_exact() && self.f2.is_exact() && self.g.is_exact()
    }

    /// `self ∘ inner`: first apply `inner`, then `self`.
    pub fn compose(&self, inner: &HoloTransform) -> Result<HoloTransform, GermError> {
        let b = Bindings::new()
            .bind(Var::Z1, inner.f1.clone())
            .bind(Var::Z2, inner.f2.clone())
            .bind(Var::W, inner.g.clone());
        Ok(HoloTransform {
            f1: substitute(&self.f1, &b)?,
            f2: substitute(&self.f2, &b)?,
            g: substitute(&self.g, &b)?,
        })
    }

    /// Formal inverse, by fixed-point iteration on the nonlinear part.
    pub fn inverse(&self) -> Result<HoloTransform, GermError> {
        if !self.is_invertible() {
            return Err(GermError::NotInvertible);
        }
        let p = self.profile();
        let omega = p.truncation_order;
        let j = self.linear_jet();
        let det = self.det();
        let ainv = [
            [j.a[1][1].div(&det)?, j.a[0][1].neg().div(&det)?],
            [j.a[1][0].neg().div(&det)?, j.a[0][0].div(&det)?],
        ];
        let cinv = j.c.inv()?;
        let z1 = hvar(p, Var::Z1);
        let z2 = hvar(p, Var::Z2);
        let w = hvar(p, Var::W);
        let lin1 = z1.scale(&j.a[0][0]).add(&z2.scale(&j.a[0][1])).add(&w.scale(&j.d[0]));
        let lin2 = z1.scale(&j.a[1][0]).add(&z2.scale(&j.a[1][1])).add(&w.scale(&j.d[1]));
        let n1 = self.f1.sub(&lin1);
        let n2 = self.f2.sub(&lin2);
        let ng = self.g.sub(&w.scale(&j.c));
        let mut x = HoloTransform::identity(p);
        for _ in 0..=omega {
            let b = Bindings::new()
                .bind(Var::Z1, x.f1.clone())
                .bind(Var::Z2, x.f2.clone())
                .bind(Var::W, x.g.clone());
            let r1 = z1.sub(&substitute(&n1, &b)?);
            let r2 = z2.sub(&substitute(&n2, &b)?);
            let rg = w.sub(&substitute(&ng, &b)?);
            let yw = rg.scale(&cinv);
            let u1 = r1.sub(&yw.scale(&j.d[0]));
            let u2 = r2.sub(&yw.scale(&j.d[1]));
            let next = HoloTransform {
                f1: u1.scale(&ainv[0][0]).add(&u2.scale(&ainv[0][1])),
                f2: u1.scale(&ainv[1][0]).add(&u2.scale(&ainv[1][1])),
                g: yw,
            };
            let done = next.f1.approx_eq(&x.f1, 1e-60)
                && next.f2.approx_eq(&x.f2, 1e-60)
                && next.g.approx_eq(&x.g, 1e-60);
            x = next;
            if done {
                return Ok(x);
            }
        }
        Err(GermError::NoConvergence)
    }
}

fn real_var(p: WeightProfile, v: Var) -> TruncatedSeries {
    TruncatedSeries::var(p, v).with_tvar(TVar::S)
}

/// The harmonic part `H(z, w) = phi(z, 0, w) - phi(0, 0, w) / 2`, as a
/// holomorphic series in `(z, w)`.
fn harmonic_generator(phi: &TruncatedSeries) -> TruncatedSeries {
    let half = Scalar::frac(1, 2, 0, 1);
    let terms = phi.terms().iter().filter(|(m, _)| m.zb_degree() == 0).map(|(m, c)| {
        if m.z_degree() == 0 {
            (*m, c.mul(&half))
        } else {
            (*m, c.clone())
        }
    });
    TruncatedSeries::from_terms(phi.profile(), TVar::W, terms)
}

/// Puts a real defining function into regular form by absorbing harmonic
/// terms into `w`, returning the germ and the transformation used.
pub fn make_regular(phi_raw: &TruncatedSeries) -> Result<(RealDefiningSeries, HoloTransform), GermError> {
    let mut phi = phi_raw.with_tvar(TVar::S);
    if !is_real_series(&phi) {
        return Err(GermError::NotReal);
    }
    // Validates the tangent plane.
    RealDefiningSeries::new(phi.clone())?;
    let p = phi.profile();
    let mut total = HoloTransform::identity(p);
    for _ in 0..=p.truncation_order + 1 {
        if is_regular(&phi.chop()) {
            let germ = RealDefiningSeries::new(phi.chop())?;
            return Ok((germ, total));
        }
        let h = harmonic_generator(&phi.chop());
        let two_i = Scalar::gauss(0, 2);
        let step = HoloTransform {
            f1: hvar(p, Var::Z1),
            f2: hvar(p, Var::Z2),
            g: hvar(p, Var::W).add(&h.scale(&two_i)),
        };
        if phi.has_t() || h.has_t() {
            if h.order() == Some(1) {
                return Err(GermError::LinearHarmonic);
            }
            phi = pullback(&phi, &step)?;
            total = total.compose(&step)?;
        } else {
            // Without s-dependence the pullback is the subtraction of 2 Re H,
            // and the steps add up in `g`.
            let hz = h.with_tvar(TVar::S);
            phi = phi.sub(&hz).sub(&conjugate_series(&hz).with_tvar(TVar::S));
            total.g = total.g.add(&h.scale(&two_i));
        }
    }
    Err(GermError::NoConvergence)
}

/// The defining function in new coordinates `(z', w')` where the old ones
/// are `t(z', w')`. No re-regularization.
pub fn pullback(phi: &TruncatedSeries, t: &HoloTransform) -> Result<TruncatedSeries, GermError> {
    let p = phi.profile();
    let omega = p.truncation_order.min(t.profile().truncation_order);
    let c = t.g.coeff(&Monomial::var(Var::W));
    if !c.is_real() && !c.im().is_negligible(c.abs_f64()) {
        return Err(GermError::NotInvertible);
    }
    let c = c.re();
    let c_inv = c.inv().map_err(|_| GermError::NotInvertible)?;
    let h = t.g.sub(&hvar(t.profile(), Var::W).scale(&c));
    let f1b = conjugate_series(&t.f1);
    let f2b = conjugate_series(&t.f2);
    let hb = conjugate_series(&h);
    let half = Scalar::frac(1, 2, 0, 1);
    let half_over_i = Scalar::frac(0, 1, -1, 2);
    let i = Scalar::i();
    let mut v = TruncatedSeries::zero(p.with_order(omega), TVar::S);
    let start = p.weight_w.min(2);
    for cap in start..=omega {
        let pc = p.with_order(cap);
        let s = real_var(pc, Var::S);
        let vt = v.truncate(cap).with_order(cap);
        let w_up = s.add(&vt.scale(&i));
        let w_dn = s.sub(&vt.scale(&i));
        let hol = Bindings::new().bind(Var::W, w_up);
        let ahol = Bindings::new().bind(Var::Tau, w_dn);
        let z1 = substitute(&t.f1.truncate(cap), &hol)?;
        let z2 = substitute(&t.f2.truncate(cap), &hol)?;
        let zb1 = substitute(&f1b.truncate(cap), &ahol)?;
        let zb2 = substitute(&f2b.truncate(cap), &ahol)?;
        let hw = substitute(&h.truncate(cap), &hol)?;
        let hbw = substitute(&hb.truncate(cap), &ahol)?;
        let big_s = s.scale(&c).add(&hw.add(&hbw).scale(&half));
        let b = Bindings::new()
            .bind(Var::Z1, z1)
            .bind(Var::Z2, z2)
            .bind(Var::Zb1, zb1)
            .bind(Var::Zb2, zb2)
            .bind(Var::S, big_s);
        let rhs = substitute(&phi.truncate(cap), &b)?;
        let im_h = hw.sub(&hbw).scale(&half_over_i);
        v = rhs.sub(&im_h).scale(&c_inv);
    }
    Ok(v.with_order(omega))
}

/// Pushes the germ forward along `t`: the result describes the same surface
/// in the coordinates `t(z, w)`.
pub fn pushforward(phi: &TruncatedSeries, t: &HoloTransform) -> Result<TruncatedSeries, GermError> {
    pullback(phi, &t.inverse()?)
}

/// Changes coordinates by `t` (old = `t`(new)) and restores regular form.
pub fn apply_transform(germ: &RealDefiningSeries, t: &HoloTransform) -> Result<RealDefiningSeries, GermError> {
    apply_transform_with(germ, t).map(|(g, _)| g)
}

/// As [`apply_transform`], also returning the full transformation including
/// the re-regularization step.
pub fn apply_transform_with(
    germ: &RealDefiningSeries,
    t: &HoloTransform,
) -> Result<(RealDefiningSeries, HoloTransform), GermError> {
    if !t.is_invertible() {
        return Err(GermError::NotInvertible);
    }
    let raw = pullback(&germ.phi, t)?;
    let (g, reg) = make_regular(&raw)?;
    Ok((g, t.compose(&reg)?))
}

/// Solves `w - Qbar = 2i phi(z, zb, (w + Qbar)/2)` by Newton iteration.
pub fn complexify(germ: &RealDefiningSeries) -> Result<ComplexDefining, GermError> {
    let phi = &germ.phi;
    let p = phi.profile();
    let omega = p.truncation_order;
    let w = hvar(p, Var::W);
    let i = Scalar::i();
    let two_i = Scalar::gauss(0, 2);
    let half = Scalar::frac(1, 2, 0, 1);
    let phi_s = partial_derivative(phi, Var::S, 1)?.with_order(omega);
    let eval = |f: &TruncatedSeries, arg: &TruncatedSeries| -> Result<TruncatedSeries, GermError> {
        Ok(substitute(f, &Bindings::new().bind(Var::S, arg.clone()))?)
    };
    let mut q = w.sub(&eval(phi, &w)?.scale(&two_i));
    for _ in 0..=2 * omega {
        let arg = w.add(&q).scale(&half);
        let f = q.sub(&w).add(&eval(phi, &arg)?.scale(&two_i));
        if f.chop().is_zero() || f.max_abs() < 1e-40 * (1.0 + q.max_abs()) {
            return Ok(ComplexDefining::from_qbar(q));
        }
        let fp = eval(&phi_s, &arg)?.scale(&i).add_constant(&Scalar::one());
        q = q.sub(&f.mul(&series_inverse(&fp)?));
    }
    Err(GermError::NoConvergence)
}

/// Recovers `phi` from `Qbar` via `v = (i/2) R(z, zb, s + i v)` where
/// `R = Qbar - w`.
pub fn realify(cd: &ComplexDefining) -> Result<RealDefiningSeries, GermError> {
    if !verify_reality_identity(cd) {
        return Err(GermError::RealityIdentity);
    }
    let p = cd.qbar.profile();
    let omega = p.truncation_order;
    let r = cd.qbar.sub(&hvar(p, Var::W));
    let i = Scalar::i();
    let i_half = Scalar::frac(0, 1, 1, 2);
    let mut v = TruncatedSeries::zero(p, TVar::S);
    for cap in 1..=omega {
        let pc = p.with_order(cap);
        let arg = real_var(pc, Var::S).add(&v.truncate(cap).with_order(cap).scale(&i));
        v = substitute(&r.truncate(cap), &Bindings::new().bind(Var::W, arg))?.scale(&i_half);
    }
    let v = v.with_order(omega).chop();
    if !is_real_series(&v) {
        return Err(GermError::NotReal);
    }
    RealDefiningSeries::new(v)
}

/// Checks `Qbar(zb, z, Q(z, zb, wb)) = wb` to truncation.
pub fn verify_reality_identity(cd: &ComplexDefining) -> bool {
    let Ok(lhs) = substitute(&cd.qbar, &Bindings::new().bind(Var::W, cd.q.clone())) else {
        return false;
    };
    let tau = TruncatedSeries::var(cd.qbar.profile(), Var::Tau);
    lhs.approx_eq(&tau, 1e-25)
}

/// Polynomial in `Z1, Z2, Z3, Zb1, Zb2, Zb3` with exact or float coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GlobalPoly {
    pub terms: BTreeMap<[u8; 6], Scalar>,
}

impl GlobalPoly {
    pub fn constant(c: Scalar) -> GlobalPoly {
        let mut g = GlobalPoly::default();
        g.add_term([0; 6], c);
        g
    }

    /// `Z_(j+1)` for `j < 3`, `Zb_(j-2)` for `3 <= j < 6`.
    pub fn var(j: usize) -> GlobalPoly {
        let mut e = [0; 6];
        e[j] = 1;
        let mut g = GlobalPoly::default();
        g.add_term(e, Scalar::one());
        g
    }

    pub fn add_term(&mut self, e: [u8; 6], c: Scalar) {
        let entry = self.terms.entry(e).or_default();
        entry.add_assign(&c);
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &GlobalPoly) -> GlobalPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn scale(&self, k: &Scalar) -> GlobalPoly {
        let mut r = GlobalPoly::default();
        for (e, c) in &self.terms {
            r.add_term(*e, c.mul(k));
        }
        r
    }

    pub fn sub(&self, o: &GlobalPoly) -> GlobalPoly {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn mul(&self, o: &GlobalPoly) -> GlobalPoly {
        let mut r = GlobalPoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let mut e = *ea;
                for k in 0..6 {
                    e[k] += eb[k];
                }
                r.add_term(e, ca.mul(cb));
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> GlobalPoly {
        let mut r = GlobalPoly::constant(Scalar::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn conj(&self) -> GlobalPoly {
        let mut r = GlobalPoly::default();
        for (e, c) in &self.terms {
            r.add_term([e[3], e[4], e[5], e[0], e[1], e[2]], c.conj());
        }
        r
    }

    pub fn is_real(&self) -> bool {
        let d = self.sub(&self.conj());
        let scale = self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max);
        d.terms.values().all(|c| c.is_negligible(scale))
    }

    pub fn eval(&self, p: &[Scalar; 3]) -> Scalar {
        let pb = [p[0].conj(), p[1].conj(), p[2].conj()];
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..3 {
                t = t.mul(&p[k].pow(e[k] as u32)).mul(&pb[k].pow(e[k + 3] as u32));
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// `d/dZ_(j+1)` evaluated at `p`.
    pub fn gradient_at(&self, p: &[Scalar; 3]) -> [Scalar; 3] {
        std::array::from_fn(|j| {
            let mut d = GlobalPoly::default();
            for (e, c) in &self.terms {
                if e[j] > 0 {
                    let mut ee = *e;
                    ee[j] -= 1;
                    d.add_term(ee, c.scale_int(e[j] as i64));
                }
            }
            d.eval(p)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }
}

/// A polynomial in `(z1, z2, zb1, zb2, s, v)` with `w = s + i v`.
type LocalPoly = BTreeMap<[u8; 6], Scalar>;

fn local_mul(a: &LocalPoly, b: &LocalPoly) -> LocalPoly {
    let mut r = LocalPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let mut e = *ea;
            for k in 0..6 {
                e[k] += eb[k];
            }
            r.entry(e).or_default().add_assign(&ca.mul(cb));
        }
    }
    r.retain(|_, c| !c.is_zero());
    r
}

fn local_linear(coeffs: [(usize, Scalar); 3], constant: Scalar) -> LocalPoly {
    let mut r = LocalPoly::new();
    if !constant.is_zero() {
        r.insert([0; 6], constant);
    }
    for (slot, c) in coeffs {
        if !c.is_zero() {
            let mut e = [0; 6];
            e[slot] = 1;
            r.entry(e).or_default().add_assign(&c);
        }
    }
    r.retain(|_, c| !c.is_zero());
    r
}

/// Builds the regular-form germ of `{rho = 0}` at `p`.
///
/// The frame puts `w` along `conj(grad) * (-i/2) / |grad|^2`, so that
/// `rho = Im w + O(2)`; the two tangent directions come from projecting the
/// standard basis vectors in index order.
pub fn germ_at_point(
    rho: &GlobalPoly,
    p: &[Scalar; 3],
    profile: WeightProfile,
) -> Result<RealDefiningSeries, GermError> {
    if !rho.is_real() {
        return Err(GermError::NotReal);
    }
    let scale = rho.max_abs();
    if !rho.eval(p).is_negligible(scale) {
        return Err(GermError::NotOnSurface);
    }
    let g = rho.gradient_at(p);
    let gnorm = g.iter().fold(Scalar::zero(), |a, x| a.add(&x.norm_sqr()));
    if gnorm.is_negligible(scale * scale) {
        return Err(GermError::DegenerateGradient);
    }
    let gbar: [Scalar; 3] = std::array::from_fn(|k| g[k].conj());
    let normal: [Scalar; 3] =
        std::array::from_fn(|k| gbar[k].mul(&Scalar::frac(0, 1, -1, 2)).div(&gnorm).expect("nonzero"));
    let mut tangents: Vec<[Scalar; 3]> = Vec::new();
    for k in 0..3 {
        let gk = g[k].div(&gnorm).expect("nonzero");
        let e: [Scalar; 3] = std::array::from_fn(|j| {
            let unit = if j == k { Scalar::one() } else { Scalar::zero() };
            unit.sub(&gk.mul(&gbar[j]))
        });
        let independent = match tangents.first() {
            None => e.iter().any(|x| !x.is_negligible(1.0)),
            Some(t0) => {
                // Rank test on the 2x3 matrix [t0; e].
                (0..3).any(|a| {
                    (a + 1..3).any(|b| !t0[a].mul(&e[b]).sub(&t0[b].mul(&e[a])).is_negligible(1.0))
                })
            }
        };
        if independent {
            tangents.push(e);
        }
        if tangents.len() == 2 {
            break;
        }
    }
    // Z_k = p_k + t1_k z1 + t2_k z2 + n_k (s + i v) and its conjugate.
    let i = Scalar::i();
    let zk: Vec<LocalPoly> = (0..3)
        .map(|k| {
            local_linear(
                [(0, tangents[0][k].clone()), (1, tangents[1][k].clone()), (4, normal[k].clone())],
                p[k].clone(),
            )
            .into_iter()
            .chain(std::iter::once(([0, 0, 0, 0, 0, 1], normal[k].mul(&i))))
            .filter(|(_, c)| !c.is_zero())
            .collect()
        })
        .collect();
    let zbk: Vec<LocalPoly> = (0..3)
        .map(|k| {
            local_linear(
                [
                    (2, tangents[0][k].conj()),
                    (3, tangents[1][k].conj()),
                    (4, normal[k].conj()),
                ],
                p[k].conj(),
            )
            .into_iter()
            .chain(std::iter::once(([0, 0, 0, 0, 0, 1], normal[k].conj().mul(&i).neg())))
            .filter(|(_, c)| !c.is_zero())
            .collect()
        })
        .collect();
    let mut local = LocalPoly::new();
    let mut powers: Vec<Vec<LocalPoly>> = Vec::new();
    for k in 0..6 {
        let base = if k < 3 { &zk[k] } else { &zbk[k - 3] };
        let maxe = rho.terms.keys().map(|e| e[k]).max().unwrap_or(0) as usize;
        let mut v = vec![LocalPoly::from([([0; 6], Scalar::one())])];
        for j in 1..=maxe {
            let next = local_mul(&v[j - 1], base);
            v.push(next);
        }
        powers.push(v);
    }
    for (e, c) in &rho.terms {
        let mut t = LocalPoly::from([([0; 6], c.clone())]);
        for k in 0..6 {
            t = local_mul(&t, &powers[k][e[k] as usize]);
        }
        for (ee, cc) in t {
            local.entry(ee).or_default().add_assign(&cc);
        }
    }
    // Constant and linear terms are exact by construction; drop float dust.
    let lscale = local.values().map(|c| c.abs_f64()).fold(0.0, f64::max);
    local.retain(|_, c| !c.is_negligible(lscale));
    let unit_v = [0, 0, 0, 0, 0, 1];
    let lead = local.get(&unit_v).cloned().unwrap_or_default();
    if !lead.approx_eq(&Scalar::one(), 1e-25) {
        return Err(GermError::DegenerateGradient);
    }
    local.remove(&unit_v);
    local.remove(&[0; 6]);
    // v = -sum_k R_k(z, zb, s) v^k.
    let omega = profile.truncation_order;
    let mut by_v: BTreeMap<u8, Vec<(Monomial, Scalar)>> = BTreeMap::new();
    for (e, c) in &local {
        by_v.entry(e[5]).or_default().push((Monomial([e[0], e[1], e[2], e[3], e[4]]), c.neg()));
    }
    let rk: Vec<(u32, TruncatedSeries)> = by_v
        .into_iter()
        .map(|(k, t)| (k as u32, TruncatedSeries::from_terms(profile, TVar::S, t)))
        .collect();
    let mut v = TruncatedSeries::zero(profile, TVar::S);
    for cap in 1..=omega {
        let vt = v.truncate(cap).with_order(cap);
        let mut next = TruncatedSeries::zero(profile.with_order(cap), TVar::S);
        let mut vpow = TruncatedSeries::one(profile.with_order(cap), TVar::S);
        let mut last = 0;
        for (k, r) in &rk {
            while last < *k {
                vpow = vpow.mul(&vt);
                last += 1;
            }
            next = next.add(&r.truncate(cap).mul(&vpow));
        }
        v = next;
    }
    let phi = v.with_order(omega).chop();
    let (germ, _) = make_regular(&phi)?;
    Ok(germ)
}
