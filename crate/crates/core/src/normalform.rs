//! Formal normal forms for the types A.i.1, A.i.2 and A.i.3.
//!
//! A germ `Im w = |z1|^2 + p3 + F` in model form through weighted degree 3
//! is moved first by a polynomial normalization `P` and then by
//! `T = (z + f, w + g)`, with `T` solved degree by degree so that the part of
//! weighted degree `>= 4` lands in the normal space. Unlike [`HoloTransform`]
//! arguments elsewhere in the crate, `P` and `T` send old coordinates to new
//! ones.
//!
//! Each degree is solved as one exact real linear system built from the
//! operator `L(f1, f2, g) = Re(i g + 2 zb1 f1 + 2 p3_z2 f2)` at
//! `w = s + i|z1|^2`. The current degree-`nu` part is always recomputed by
//! pushing the original germ forward along the accumulated map.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::algebra::{
    conjugate_series, is_real_series, partial_derivative, substitute, weighted_component, AlgebraError, Bindings,
    Monomial, Scalar, TVar, TruncatedSeries, Var, WeightProfile,
};
use crate::classify::{classify, classify_with_seed, Classification, ClassifyError, ModelInvariants, TypeTag};
use crate::germ::{pullback, pushforward, GermError, HoloTransform, RealDefiningSeries};
use crate::linsolve::inverse;

pub const DEFAULT_ORDER: u32 = 8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NormalFormError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The per-degree system is not square or not of full rank.
    #[error("degree {nu}: normal-form system is not uniquely solvable ({detail})")]
    Uniqueness { nu: u32, detail: String },
    #[error("internal assertion failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Germ(#[from] GermError),
}

impl From<AlgebraError> for NormalFormError {
    fn from(e: AlgebraError) -> Self {
        NormalFormError::Germ(GermError::Algebra(e))
    }
}

fn precondition(msg: impl Into<String>) -> NormalFormError {
    NormalFormError::Precondition(msg.into())
}

fn internal(msg: impl Into<String>) -> NormalFormError {
    NormalFormError::Internal(msg.into())
}

// ---------------------------------------------------------------------------
// Models

/// The rank one Levi form models that have a normal form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelType {
    Ai1 { gamma: u8 },
    Ai2,
    Ai3,
}

impl ModelType {
    pub const ALL: [ModelType; 4] = [ModelType::Ai1 { gamma: 0 }, ModelType::Ai1 { gamma: 1 }, ModelType::Ai2, ModelType::Ai3];

    /// 1, 2 or 3; selects the normal space and the `G_0` conditions.
    pub fn family(self) -> u8 {
        match self {
            ModelType::Ai1 { .. } => 1,
            ModelType::Ai2 => 2,
            ModelType::Ai3 => 3,
        }
    }

    pub fn tag(self) -> TypeTag {
        self.invariants().tag()
    }

    pub fn invariants(self) -> ModelInvariants {
        match self {
            ModelType::Ai1 { gamma } => ModelInvariants::Ai1 { gamma },
            ModelType::Ai2 => ModelInvariants::Ai2,
            ModelType::Ai3 => ModelInvariants::Ai3,
        }
    }

    pub fn from_invariants(m: &ModelInvariants) -> Option<ModelType> {
        match m {
            ModelInvariants::Ai1 { gamma } => Some(ModelType::Ai1 { gamma: *gamma }),
            ModelInvariants::Ai2 => Some(ModelType::Ai2),
            ModelInvariants::Ai3 => Some(ModelType::Ai3),
            _ => None,
        }
    }

    pub fn model_phi(self, order: u32) -> TruncatedSeries {
        self.invariants().model_phi(order)
    }

    /// `d p3 / d z2` as a real-side series.
    pub fn p3_z2(self, p: WeightProfile) -> TruncatedSeries {
        let phi = self.model_phi(p.truncation_order + 1);
        partial_derivative(&phi, Var::Z2, 1).expect("first derivative").with_order(p.truncation_order)
    }

    /// The model whose terms of weighted degree at most 3 agree with the germ.
    pub fn detect(germ: &RealDefiningSeries) -> Option<ModelType> {
        if germ.profile().weight_w != 2 || germ.profile().truncation_order < 3 {
            return None;
        }
        let low = germ.phi.truncate(3);
        ModelType::ALL.into_iter().find(|m| m.model_phi(3).approx_eq(&low, 1e-25))
    }
}

impl fmt::Display for ModelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelType::Ai1 { gamma } => write!(f, "A.i.1 (gamma={gamma})"),
            m => f.write_str(m.tag().label()),
        }
    }
}

// ---------------------------------------------------------------------------
// Normal spaces

/// Monomial description of the normal space for one family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalSpaceSpec {
    pub family: u8,
}

impl NormalSpaceSpec {
    pub fn for_model(m: ModelType) -> NormalSpaceSpec {
        NormalSpaceSpec { family: m.family() }
    }

    /// Whether the monomial `z^a zb^b s^c` lies in the normal space. Closed
    /// under `z <-> zb`.
    pub fn accepts(&self, m: &Monomial) -> bool {
        self.membership(m) == Membership::Full
    }

    /// How much of the coefficient line of `m` lies in the normal space.
    pub fn membership(&self, m: &Monomial) -> Membership {
        let (k, l) = m.bidegree();
        if k < l {
            return self.membership(&m.mirror());
        }
        if l == 0 {
            return Membership::None;
        }
        let a = (m.0[0], m.0[1]);
        let b = (m.0[2], m.0[3]);
        // f2 = c z2 w^k with c real is mapped by L into the normal space, so
        // one real direction here must be normal as well.
        if self.family == 3 && (a, b) == ((2, 1), (1, 1)) {
            return Membership::Imag;
        }
        let full = if self.family == 2 { type_two(k, l, a, b) } else { types_one_three(self.family, k, l, a, b) };
        if full {
            Membership::Full
        } else {
            Membership::None
        }
    }

    pub fn contains(&self, f: &TruncatedSeries) -> bool {
        f.terms().iter().all(|(m, c)| match self.membership(m) {
            Membership::Full => true,
            Membership::Imag => c.re().is_zero(),
            Membership::None => false,
        })
    }

    /// Splits a series of type `(k, l)` (together with its mirror `(l, k)`)
    /// into its normal part and the rest.
    pub fn project(
        &self,
        f: &TruncatedSeries,
        k: u32,
        l: u32,
    ) -> Result<(TruncatedSeries, TruncatedSeries), NormalFormError> {
        if f.terms().iter().any(|(m, _)| m.bidegree() != (k, l) && m.bidegree() != (l, k)) {
            return Err(precondition(format!("series is not of type ({k},{l})")));
        }
        let normal = TruncatedSeries::from_terms(
            f.profile(),
            f.tvar(),
            f.terms().iter().filter_map(|(m, c)| match self.membership(m) {
                Membership::Full => Some((*m, c.clone())),
                Membership::Imag => Some((*m, c.im().mul(&Scalar::i()))),
                Membership::None => None,
            }),
        );
        let rest = f.sub(&normal);
        Ok((normal, rest))
    }
}

/// Part of a monomial's coefficient line inside a normal space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Full,
    /// Purely imaginary coefficients only.
    Imag,
    None,
}

fn types_one_three(j: u8, k: u32, l: u32, (a1, a2): (u8, u8), (b1, b2): (u8, u8)) -> bool {
    match (k, l) {
        (1, 1) | (3, 3) => a2 >= 1 || b2 >= 1,
        (2, 2) => a2 >= 2 || b2 >= 2 || (a1, a2, b1, b2) == (1, 1, 1, 1),
        (2, 1) => b2 == 1,
        (3, 1) => b2 == 1 || if j == 1 { a1 >= 2 || a2 == 3 } else { a1 == 3 || a2 >= 2 },
        (3, 2) => {
            let (free, pinned) = if j == 1 { ((2, 1), (1, 2)) } else { ((1, 2), (2, 1)) };
            (a1, a2) == free || a2 == 3 || (a1 == 3 && b2 >= 1) || ((a1, a2) == pinned && b2 == 2)
        }
        (4, 2) => {
            b2 == 2
                || (b1 == 2 && a2 == 4)
                || (b1 == 1 && if j == 1 { a1 == 4 || a2 == 4 } else { a2 >= 3 })
        }
        (k, 1) => b2 == 1 && u32::from(if j == 1 { a1 } else { a2 }) == k,
        _ => true,
    }
}

fn type_two(k: u32, l: u32, (a1, a2): (u8, u8), (b1, b2): (u8, u8)) -> bool {
    match (k, l) {
        (1, 1) | (3, 3) | (5, 5) => a2 >= 1 || b2 >= 1,
        (2, 1) => b2 == 1 || a2 >= 1,
        (3, 1) => a2 >= 1 || ((a1, a2) == (3, 0) && b2 == 1),
        (2, 2) => a2 >= 1 && b2 >= 1,
        (4, 3) => b2 >= 1 || (b1 == 3 && a2 >= 3),
        (5, 3) => b2 >= 1 || (b1 == 3 && a2 >= 4),
        (4, 4) => a2 >= 2 || b2 >= 2 || (a1, a2, b1, b2) == (3, 1, 3, 1),
        (5, 4) => a2 >= 1 || (a1 == 5 && b2 >= 2),
        (_, 1) => b2 == 1,
        (_, 2) => b2 >= 1,
        _ => true,
    }
}

// ---------------------------------------------------------------------------
// The map T

/// `T(z, w) = (z1 + f1, z2 + f2, w + g)` with `f1 = O(3)`, `f2 = O(2)`,
/// `g = O(4)`; the fields hold `f1`, `f2`, `g` as series in `(z, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformT {
    pub f1: TruncatedSeries,
    pub f2: TruncatedSeries,
    pub g: TruncatedSeries,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    F1,
    F2,
    G,
}

impl Slot {
    const ALL: [Slot; 3] = [Slot::F1, Slot::F2, Slot::G];

    /// A part of weighted degree `d` in this slot contributes at degree
    /// `d + shift`.
    fn shift(self) -> u32 {
        match self {
            Slot::F1 => 1,
            Slot::F2 => 2,
            Slot::G => 0,
        }
    }
}

/// Which part of a coefficient of `T` the `G_0` conditions set to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pinned {
    Free,
    Real,
    Imag,
    All,
}

fn pinned(family: u8, slot: Slot, m: &Monomial) -> Pinned {
    let (zd, t, z1) = (m.z_degree(), m.t(), m.0[0]);
    let f = |s: Slot| s != Slot::G;
    if family == 2 {
        match (slot, zd, t) {
            (s, 1, 1) | (s, 1, 2) if f(s) => Pinned::All,
            (Slot::F1, 3, 0) | (Slot::F1, 2, 1) | (Slot::F1, 3, 1) => Pinned::All,
            (Slot::F1, 1, 3) if z1 == 1 => Pinned::Real,
            // z2 -> z2 + i t z1^2 preserves the model.
            (Slot::F2, 2, 0) if z1 == 2 => Pinned::Imag,
            _ => Pinned::Free,
        }
    } else if family == 3 && slot == Slot::F2 && zd == 1 && t >= 1 && m.0[1] == 1 {
        Pinned::Real
    } else {
        match (slot, zd, t) {
            (Slot::F2, 2, 0) | (Slot::F1, 3, 0) => Pinned::All,
            (Slot::F1, 1, 1) if z1 == 1 => Pinned::Real,
            _ => Pinned::Free,
        }
    }
}

impl TransformT {
    pub fn zero(p: WeightProfile) -> TransformT {
        let z = TruncatedSeries::zero(p, TVar::W);
        TransformT { f1: z.clone(), f2: z.clone(), g: z }
    }

    pub fn new(f1: TruncatedSeries, f2: TruncatedSeries, g: TruncatedSeries) -> Result<TransformT, NormalFormError> {
        for (s, min, name) in [(&f1, 3, "f1"), (&f2, 2, "f2"), (&g, 4, "g")] {
            if s.weight_w() != 2 || s.variable_kind() != crate::algebra::VariableKind::HoloSide {
                return Err(precondition(format!("{name} must be a series in (z, w) with w-weight 2")));
            }
            if s.order().is_some_and(|o| o < min) {
                return Err(precondition(format!("{name} must have weighted order at least {min}")));
            }
        }
        Ok(TransformT { f1: f1.with_tvar(TVar::W), f2: f2.with_tvar(TVar::W), g: g.with_tvar(TVar::W) })
    }

    pub fn profile(&self) -> WeightProfile {
        self.f1.profile()
    }

    fn slot(&self, s: Slot) -> &TruncatedSeries {
        match s {
            Slot::F1 => &self.f1,
            Slot::F2 => &self.f2,
            Slot::G => &self.g,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.f1.is_zero() && self.f2.is_zero() && self.g.is_zero()
    }

    pub fn is_exact(&self) -> bool {
        self.f1.is_exact() && self.f2.is_exact() && self.g.is_exact()
    }

    pub fn add(&self, o: &TransformT) -> TransformT {
        TransformT { f1: self.f1.add(&o.f1), f2: self.f2.add(&o.f2), g: self.g.add(&o.g) }
    }

    pub fn with_order(&self, order: u32) -> TransformT {
        TransformT { f1: self.f1.with_order(order), f2: self.f2.with_order(order), g: self.g.with_order(order) }
    }

    /// Keeps the parts of `f1`, `f2`, `g` that act at weighted degree `<= nu`.
    pub fn up_to(&self, nu: u32) -> TransformT {
        let cut = |s: &TruncatedSeries, k: u32| s.filter(|m| m.weighted_degree(2) + k <= nu);
        TransformT { f1: cut(&self.f1, 1), f2: cut(&self.f2, 2), g: cut(&self.g, 0) }
    }

    /// The constant terms fixed by `G_0` for the given family vanish.
    pub fn in_g0(&self, family: u8) -> bool {
        Slot::ALL.into_iter().all(|s| {
            self.slot(s).terms().iter().all(|(m, c)| match pinned(family, s, m) {
                Pinned::Free => true,
                Pinned::Real => c.re().is_zero(),
                Pinned::Imag => c.im().is_zero(),
                Pinned::All => false,
            })
        })
    }

    pub fn to_holo(&self) -> HoloTransform {
        let id = HoloTransform::identity(self.profile());
        HoloTransform { f1: id.f1.add(&self.f1), f2: id.f2.add(&self.f2), g: id.g.add(&self.g) }
    }
}

/// `L(f1, f2, g) = Re(i g + 2 zb1 f1 + 2 p3_z2 f2)` at `w = s + i z1 zb1`.
pub fn operator_l(t: &TransformT, model: ModelType) -> Result<TruncatedSeries, NormalFormError> {
    let p = t.profile();
    let v = |x: Var| TruncatedSeries::var(p, x).with_tvar(TVar::S);
    let w_at = v(Var::S).add(&v(Var::Z1).mul(&v(Var::Zb1)).scale(&Scalar::i()));
    let b = Bindings::new().bind(Var::W, w_at);
    let at = |f: &TruncatedSeries| -> Result<TruncatedSeries, NormalFormError> {
        Ok(substitute(f, &b)?.with_tvar(TVar::S))
    };
    let two = Scalar::from_int(2);
    let x = at(&t.g)?
        .scale(&Scalar::i())
        .add(&v(Var::Zb1).mul(&at(&t.f1)?).scale(&two))
        .add(&model.p3_z2(p).mul(&at(&t.f2)?).scale(&two));
    Ok(real_part(&x))
}

fn real_part(x: &TruncatedSeries) -> TruncatedSeries {
    x.add(&conjugate_series(x).with_tvar(TVar::S)).scale(&Scalar::frac(1, 2, 0, 1))
}

// ---------------------------------------------------------------------------
// Per-degree systems

/// Holomorphic monomials `z^a w^t` of weighted degree `d`.
fn holo_monomials(d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for t in 0..=d / 2 {
        let z = d - 2 * t;
        for a1 in (0..=z).rev() {
            out.push(Monomial::new(a1 as u8, (z - a1) as u8, 0, 0, t as u8));
        }
    }
    out
}

/// Monomials `z^a zb^b s^c` of weighted degree `nu`.
fn real_monomials(nu: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for c in 0..=nu / 2 {
        let rest = nu - 2 * c;
        for k in 0..=rest {
            for a1 in 0..=k {
                for b1 in 0..=rest - k {
                    out.push(Monomial::new(a1 as u8, (k - a1) as u8, b1 as u8, (rest - k - b1) as u8, c as u8));
                }
            }
        }
    }
    out
}

fn part(x: &Scalar, imag: bool) -> Scalar {
    if imag {
        x.im()
    } else {
        x.re()
    }
}

#[derive(Clone, Copy, Debug)]
struct Unknown {
    slot: Slot,
    mono: Monomial,
    imag: bool,
}

#[derive(Clone, Copy, Debug)]
struct Equation {
    mono: Monomial,
    imag: bool,
}

/// The real linear system for the weighted-degree `nu` parts
/// `(f1_{nu-1}, f2_{nu-2}, g_nu)` of `T`, restricted to `G_0`, with one
/// equation per real coordinate of the complement of the normal space.
#[derive(Clone, Debug)]
pub struct DegreeSystem {
    pub nu: u32,
    pub model: ModelType,
    unknowns: Vec<Unknown>,
    equations: Vec<Equation>,
    matrix: Vec<Vec<Scalar>>,
    inv: Vec<Vec<Scalar>>,
}

impl DegreeSystem {
    /// Builds the system and checks that it is square and invertible.
    pub fn build(model: ModelType, nu: u32) -> Result<DegreeSystem, NormalFormError> {
        if nu < 4 {
            return Err(precondition("normal-form degrees start at 4"));
        }
        let p = WeightProfile::new(2, nu);
        let family = model.family();
        let spec = NormalSpaceSpec::for_model(model);
        let mut unknowns = Vec::new();
        let mut columns = Vec::new();
        for slot in Slot::ALL {
            for mono in holo_monomials(nu - slot.shift()) {
                let pin = pinned(family, slot, &mono);
                for imag in [false, true] {
                    if pin == Pinned::All || (pin == Pinned::Real && !imag) || (pin == Pinned::Imag && imag) {
                        continue;
                    }
                    let u = Unknown { slot, mono, imag };
                    columns.push(operator_l(&unit_transform(p, &u, &Scalar::one()), model)?);
                    unknowns.push(u);
                }
            }
        }
        let mut equations = Vec::new();
        for mono in real_monomials(nu) {
            let mirror = mono.mirror();
            let member = spec.membership(&mono);
            if mono > mirror || member == Membership::Full {
                continue;
            }
            equations.push(Equation { mono, imag: false });
            if mono != mirror && member == Membership::None {
                equations.push(Equation { mono, imag: true });
            }
        }
        if equations.len() != unknowns.len() {
            return Err(NormalFormError::Uniqueness {
                nu,
                detail: format!("{} equations for {} unknowns", equations.len(), unknowns.len()),
            });
        }
        let matrix: Vec<Vec<Scalar>> = equations
            .iter()
            .map(|e| columns.iter().map(|c| part(&c.coeff(&e.mono), e.imag)).collect())
            .collect();
        let inv = inverse(&matrix).map_err(|e| NormalFormError::Uniqueness { nu, detail: e.to_string() })?;
        Ok(DegreeSystem { nu, model, unknowns, equations, matrix, inv })
    }

    /// Cached [`DegreeSystem::build`].
    pub fn cached(model: ModelType, nu: u32) -> Result<Arc<DegreeSystem>, NormalFormError> {
        type Cache = Mutex<HashMap<(ModelType, u32), Arc<DegreeSystem>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(s) = cache.lock().expect("cache lock").get(&(model, nu)) {
            return Ok(s.clone());
        }
        let s = Arc::new(DegreeSystem::build(model, nu)?);
        cache.lock().expect("cache lock").insert((model, nu), s.clone());
        Ok(s)
    }

    pub fn rows(&self) -> usize {
        self.equations.len()
    }

    pub fn cols(&self) -> usize {
        self.unknowns.len()
    }

    pub fn matrix(&self) -> &[Vec<Scalar>] {
        &self.matrix
    }

    /// Real coordinates of a series on the complement of the normal space,
    /// in equation order.
    pub fn complement_coordinates(&self, f: &TruncatedSeries) -> Vec<Scalar> {
        self.equations.iter().map(|e| part(&f.coeff(&e.mono), e.imag)).collect()
    }

    /// The transform parts with the given real coordinates, in unknown order.
    pub fn transform_from_coordinates(&self, x: &[Scalar], p: WeightProfile) -> TransformT {
        let mut t = TransformT::zero(p);
        for (u, v) in self.unknowns.iter().zip(x) {
            t = t.add(&unit_transform(p, u, v));
        }
        t
    }

    /// Real coordinates of the degree-`nu` parts of `t`, in unknown order.
    pub fn transform_coordinates(&self, t: &TransformT) -> Vec<Scalar> {
        self.unknowns.iter().map(|u| part(&t.slot(u.slot).coeff(&u.mono), u.imag)).collect()
    }

    fn solve(&self, f_nu: &TruncatedSeries) -> Result<DegreeSolution, NormalFormError> {
        let b = self.complement_coordinates(f_nu);
        let x: Vec<Scalar> = self
            .inv
            .iter()
            .map(|row| row.iter().zip(&b).fold(Scalar::zero(), |acc, (a, y)| if a.is_zero() || y.is_zero() { acc } else { acc.add(&a.mul(y)) }))
            .collect();
        let t = self.transform_from_coordinates(&x, f_nu.profile());
        let normal = f_nu.sub(&operator_l(&t, self.model)?);
        if !NormalSpaceSpec::for_model(self.model).contains(&normal.chop()) {
            return Err(internal(format!("degree {}: remainder left the normal space", self.nu)));
        }
        Ok(DegreeSolution { t, normal })
    }
}

fn unit_transform(p: WeightProfile, u: &Unknown, v: &Scalar) -> TransformT {
    let c = if u.imag { v.mul(&Scalar::i()) } else { v.clone() };
    let mut t = TransformT::zero(p);
    let s = TruncatedSeries::monomial(p, TVar::W, u.mono, c);
    match u.slot {
        Slot::F1 => t.f1 = s,
        Slot::F2 => t.f2 = s,
        Slot::G => t.g = s,
    }
    t
}

/// Parts of `T` at one degree and the normal-space remainder they leave.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSolution {
    pub t: TransformT,
    pub normal: TruncatedSeries,
}

/// Solves `L(f1, f2, g) = F_nu` modulo the normal space, uniquely in `G_0`.
pub fn solve_degree(f_nu: &TruncatedSeries, nu: u32, model: ModelType) -> Result<DegreeSolution, NormalFormError> {
    if f_nu.weight_w() != 2 || f_nu.order_cap() < nu {
        return Err(precondition(format!("series must carry w-weight 2 and order at least {nu}")));
    }
    if f_nu.terms().iter().any(|(m, _)| m.weighted_degree(2) != nu) {
        return Err(precondition(format!("series is not homogeneous of weighted degree {nu}")));
    }
    if f_nu.has_t() && f_nu.tvar() != TVar::S || !is_real_series(f_nu) {
        return Err(precondition("series must be real"));
    }
    DegreeSystem::cached(model, nu)?.solve(f_nu)
}

// ---------------------------------------------------------------------------
// The normalization P

/// Leading jet of `P`.
#[derive(Clone, Debug, PartialEq)]
pub enum LeadingJet {
    /// A.i.1 with `gamma = 1`: only `D`.
    Gamma1 { d: Scalar },
    /// A.i.1 with `gamma = 0`.
    Gamma0 { c: Scalar, phase: Scalar, d: Scalar },
    Ai2 { c: Scalar, phase: Scalar, a: Scalar, d: Scalar },
    Ai3 { c: Scalar, phase: Scalar, d: Scalar },
}

/// Free coefficients of the higher part `(q1, q2)` of `P`. Cubic monomials
/// are ordered `z1^3, z1^2 z2, z1 z2^2, z2^3`, quadratic ones
/// `z1^2, z1 z2, z2^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum QParams {
    /// `q1 = r z1 w + sum c_beta z^beta`, `q2 = sum d_alpha z^alpha`.
    OneThree { r: Scalar, c_beta: [Scalar; 4], d_alpha: [Scalar; 3] },
    /// `q1 = b1 z1 w + b2 z2 w + sum c_beta z^beta + sum d_alpha z^alpha w
    /// + e1 z1 w^2 + e2 z2 w^2 + sum f_beta z^beta w + r z1 w^3`,
    /// `q2 = g1 z1 w + g2 z2 w + h1 z1 w^2 + h2 z2 w^2`.
    Two {
        b: [Scalar; 2],
        c_beta: [Scalar; 4],
        d_alpha: [Scalar; 3],
        e: [Scalar; 2],
        f_beta: [Scalar; 4],
        g: [Scalar; 2],
        h: [Scalar; 2],
        r: Scalar,
    },
}

const BETA: [[u8; 2]; 4] = [[3, 0], [2, 1], [1, 2], [0, 3]];
const ALPHA: [[u8; 2]; 3] = [[2, 0], [1, 1], [0, 2]];

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationP {
    pub leading: LeadingJet,
    pub q: QParams,
}

fn zeros<const N: usize>() -> [Scalar; N] {
    std::array::from_fn(|_| Scalar::zero())
}

impl QParams {
    pub fn zero(family: u8) -> QParams {
        if family == 2 {
            QParams::Two {
                b: zeros(),
                c_beta: zeros(),
                d_alpha: zeros(),
                e: zeros(),
                f_beta: zeros(),
                g: zeros(),
                h: zeros(),
                r: Scalar::zero(),
            }
        } else {
            QParams::OneThree { r: Scalar::zero(), c_beta: zeros(), d_alpha: zeros() }
        }
    }

    /// Named coefficients as `(key, value)` pairs.
    pub fn entries(&self) -> Vec<(String, Scalar)> {
        let mut out = Vec::new();
        let mut put = |k: String, v: &Scalar| out.push((k, v.clone()));
        let beta = |p: &str, i: usize| format!("{p}{}{}", BETA[i][0], BETA[i][1]);
        let alpha = |p: &str, i: usize| format!("{p}{}{}", ALPHA[i][0], ALPHA[i][1]);
        match self {
            QParams::OneThree { r, c_beta, d_alpha } => {
                put("r".into(), r);
                c_beta.iter().enumerate().for_each(|(i, v)| put(beta("c", i), v));
                d_alpha.iter().enumerate().for_each(|(i, v)| put(alpha("d", i), v));
            }
            QParams::Two { b, c_beta, d_alpha, e, f_beta, g, h, r } => {
                b.iter().enumerate().for_each(|(i, v)| put(format!("b{}", i + 1), v));
                c_beta.iter().enumerate().for_each(|(i, v)| put(beta("c", i), v));
                d_alpha.iter().enumerate().for_each(|(i, v)| put(alpha("d", i), v));
                e.iter().enumerate().for_each(|(i, v)| put(format!("e{}", i + 1), v));
                f_beta.iter().enumerate().for_each(|(i, v)| put(beta("f", i), v));
                g.iter().enumerate().for_each(|(i, v)| put(format!("g{}", i + 1), v));
                h.iter().enumerate().for_each(|(i, v)| put(format!("h{}", i + 1), v));
                put("r".into(), r);
            }
        }
        out
    }

    fn slot_mut(&mut self, key: &str) -> Option<&mut Scalar> {
        let idx = |k: &str, table: &[[u8; 2]]| {
            let d: Vec<u8> = k.bytes().map(|c| c.wrapping_sub(b'0')).collect();
            table.iter().position(|e| d.len() == 2 && e[0] == d[0] && e[1] == d[1])
        };
        let (head, tail) = key.split_at(1.min(key.len()));
        match self {
            QParams::OneThree { r, c_beta, d_alpha } => match head {
                "r" if tail.is_empty() => Some(r),
                "c" => idx(tail, &BETA).map(|i| &mut c_beta[i]),
                "d" => idx(tail, &ALPHA).map(|i| &mut d_alpha[i]),
                _ => None,
            },
            QParams::Two { b, c_beta, d_alpha, e, f_beta, g, h, r } => {
                let pair = |v: &mut [Scalar; 2]| -> Option<usize> {
                    let _ = v;
                    match tail {
                        "1" => Some(0),
                        "2" => Some(1),
                        _ => None,
                    }
                };
                match head {
                    "r" if tail.is_empty() => Some(r),
                    "b" => pair(b).map(|i| &mut b[i]),
                    "e" => pair(e).map(|i| &mut e[i]),
                    "g" => pair(g).map(|i| &mut g[i]),
                    "h" => pair(h).map(|i| &mut h[i]),
                    "c" => idx(tail, &BETA).map(|i| &mut c_beta[i]),
                    "d" => idx(tail, &ALPHA).map(|i| &mut d_alpha[i]),
                    "f" => idx(tail, &BETA).map(|i| &mut f_beta[i]),
                    _ => None,
                }
            }
        }
    }
}

impl NormalizationP {
    /// `P = id`.
    pub fn identity(model: ModelType) -> NormalizationP {
        let one = Scalar::one;
        let zero = Scalar::zero;
        let leading = match model {
            ModelType::Ai1 { gamma: 1 } => LeadingJet::Gamma1 { d: zero() },
            ModelType::Ai1 { .. } => LeadingJet::Gamma0 { c: one(), phase: one(), d: zero() },
            ModelType::Ai2 => LeadingJet::Ai2 { c: one(), phase: one(), a: zero(), d: zero() },
            ModelType::Ai3 => LeadingJet::Ai3 { c: one(), phase: one(), d: zero() },
        };
        NormalizationP { leading, q: QParams::zero(model.family()) }
    }

    pub fn model(&self) -> ModelType {
        match self.leading {
            LeadingJet::Gamma1 { .. } => ModelType::Ai1 { gamma: 1 },
            LeadingJet::Gamma0 { .. } => ModelType::Ai1 { gamma: 0 },
            LeadingJet::Ai2 { .. } => ModelType::Ai2,
            LeadingJet::Ai3 { .. } => ModelType::Ai3,
        }
    }

    /// Real dimension of the parameter space.
    pub fn real_dimension(model: ModelType) -> u32 {
        let p = NormalizationP::identity(model);
        let lead = match p.leading {
            LeadingJet::Gamma1 { .. } => 2,
            LeadingJet::Gamma0 { .. } | LeadingJet::Ai3 { .. } => 4,
            LeadingJet::Ai2 { .. } => 6,
        };
        // `r` is real, every other q-coefficient complex.
        let q = p.q.entries().iter().map(|(k, _)| if k == "r" { 1 } else { 2 }).sum::<u32>();
        lead + q
    }

    pub fn is_exact(&self) -> bool {
        self.leading_entries().iter().chain(self.q.entries().iter()).all(|(_, v)| v.is_exact())
    }

    pub fn leading_entries(&self) -> Vec<(String, Scalar)> {
        let e = |k: &str, v: &Scalar| (k.to_string(), v.clone());
        match &self.leading {
            LeadingJet::Gamma1 { d } => vec![e("d", d)],
            LeadingJet::Gamma0 { c, phase, d } | LeadingJet::Ai3 { c, phase, d } => {
                vec![e("C", c), e("phase", phase), e("D", d)]
            }
            LeadingJet::Ai2 { c, phase, a, d } => vec![e("C", c), e("phase", phase), e("A", a), e("D", d)],
        }
    }

    /// Builds a normalization from `key = value` pairs; missing keys take
    /// their identity values. Leading keys are `C`, `phase` (or `theta`),
    /// `A`, `D`; the q-coefficients use the names of [`QParams::entries`].
    pub fn from_entries(model: ModelType, entries: &[(String, Scalar)]) -> Result<NormalizationP, NormalFormError> {
        let mut p = NormalizationP::identity(model);
        for (k, v) in entries {
            let slot = match (&mut p.leading, k.as_str()) {
                (LeadingJet::Gamma1 { d }, "D")
                | (LeadingJet::Gamma0 { d, .. }, "D")
                | (LeadingJet::Ai2 { d, .. }, "D")
                | (LeadingJet::Ai3 { d, .. }, "D") => Some(d),
                (LeadingJet::Gamma0 { c, .. }, "C") | (LeadingJet::Ai2 { c, .. }, "C") | (LeadingJet::Ai3 { c, .. }, "C") => {
                    Some(c)
                }
                (LeadingJet::Gamma0 { phase, .. }, "phase")
                | (LeadingJet::Ai2 { phase, .. }, "phase")
                | (LeadingJet::Ai3 { phase, .. }, "phase") => Some(phase),
                (LeadingJet::Ai2 { a, .. }, "A") => Some(a),
                (LeadingJet::Gamma0 { phase, .. }, "theta")
                | (LeadingJet::Ai2 { phase, .. }, "theta")
                | (LeadingJet::Ai3 { phase, .. }, "theta") => {
                    *phase = phase_from_angle(v)?;
                    continue;
                }
                _ => None,
            };
            match slot.or_else(|| p.q.slot_mut(k)) {
                Some(s) => *s = v.clone(),
                None => return Err(precondition(format!("unknown normalization key '{k}' for {model}"))),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), NormalFormError> {
        let (c, phase) = match &self.leading {
            LeadingJet::Gamma1 { .. } => (Scalar::one(), Scalar::one()),
            LeadingJet::Gamma0 { c, phase, .. } | LeadingJet::Ai2 { c, phase, .. } | LeadingJet::Ai3 { c, phase, .. } => {
                (c.clone(), phase.clone())
            }
        };
        if !c.is_real() || c.real_sign(0.0) <= 0 {
            return Err(precondition("C must be a positive real number"));
        }
        if !phase.norm_sqr().approx_eq(&Scalar::one(), 1e-30) {
            return Err(precondition("phase must have modulus 1"));
        }
        let r = self.q.entries().into_iter().find(|(k, _)| k == "r").map(|(_, v)| v).unwrap_or_default();
        if !r.is_real() && !r.im().is_negligible(r.abs_f64()) {
            return Err(precondition("r must be real"));
        }
        Ok(())
    }

    /// `P` as a polynomial map (old coordinates to new).
    pub fn to_holo(&self, p: WeightProfile) -> Result<HoloTransform, NormalFormError> {
        self.validate()?;
        let zero = Scalar::zero;
        let one = Scalar::one;
        let two_i = Scalar::gauss(0, 2);
        // (a11, a21, a22, b, c, e, d): f1 = a11 z1 + d w + b z1^2 + q1,
        // f2 = a21 z1 + a22 z2 + q2, g = c w + e z1 w.
        let (a11, a21, a22, b, c, e, d) = match &self.leading {
            LeadingJet::Gamma1 { d } => {
                let k = two_i.mul(&d.conj());
                (one(), zero(), one(), k.clone(), one(), k, d.clone())
            }
            LeadingJet::Gamma0 { c, phase, d } => {
                let a = c.sqrt_real().mul(phase);
                let k = two_i.mul(&d.conj());
                (a.clone(), zero(), c.cbrt_real(), k.mul(&phase.pow(2)), c.clone(), k.mul(&a), d.clone())
            }
            LeadingJet::Ai2 { c, phase, a: big_a, d } => {
                let root = c.sqrt_real();
                let a = root.mul(phase);
                let k = two_i.mul(&d.conj());
                let b = phase.pow(2).mul(&k.sub(&root.mul(&big_a.conj()).mul(phase)));
                (a.clone(), big_a.clone(), phase.pow(2), b, c.clone(), k.mul(&a), d.clone())
            }
            LeadingJet::Ai3 { c, phase, d } => {
                let root = c.sqrt_real();
                let k = two_i.mul(&d.conj());
                (root.clone(), zero(), root.sqrt_real().mul(phase), k.clone(), c.clone(), k.mul(&root), d.clone())
            }
        };
        let m = |z1: u8, z2: u8, t: u8, v: &Scalar| TruncatedSeries::monomial(p, TVar::W, Monomial::new(z1, z2, 0, 0, t), v.clone());
        let mut f1 = m(1, 0, 0, &a11).add(&m(0, 0, 1, &d)).add(&m(2, 0, 0, &b));
        let mut f2 = m(1, 0, 0, &a21).add(&m(0, 1, 0, &a22));
        let g = m(0, 0, 1, &c).add(&m(1, 0, 1, &e));
        let beta = |v: &[Scalar; 4], t: u8| {
            v.iter().enumerate().fold(TruncatedSeries::zero(p, TVar::W), |acc, (i, x)| acc.add(&m(BETA[i][0], BETA[i][1], t, x)))
        };
        let alpha = |v: &[Scalar; 3], t: u8| {
            v.iter().enumerate().fold(TruncatedSeries::zero(p, TVar::W), |acc, (i, x)| acc.add(&m(ALPHA[i][0], ALPHA[i][1], t, x)))
        };
        let lin = |v: &[Scalar; 2], t: u8| m(1, 0, t, &v[0]).add(&m(0, 1, t, &v[1]));
        match &self.q {
            QParams::OneThree { r, c_beta, d_alpha } => {
                f1 = f1.add(&m(1, 0, 1, r)).add(&beta(c_beta, 0));
                f2 = f2.add(&alpha(d_alpha, 0));
            }
            QParams::Two { b, c_beta, d_alpha, e, f_beta, g, h, r } => {
                f1 = f1
                    .add(&lin(b, 1))
                    .add(&beta(c_beta, 0))
                    .add(&alpha(d_alpha, 1))
                    .add(&lin(e, 2))
                    .add(&beta(f_beta, 1))
                    .add(&m(1, 0, 3, r));
                f2 = f2.add(&lin(g, 1)).add(&lin(h, 2));
            }
        }
        Ok(HoloTransform { f1, f2, g })
    }
}

/// `exp(i theta)`, exact for `theta = 0`.
fn phase_from_angle(theta: &Scalar) -> Result<Scalar, NormalFormError> {
    if !theta.is_real() {
        return Err(precondition("theta must be real"));
    }
    if theta.is_zero() {
        return Ok(Scalar::one());
    }
    let t = theta.re_f64();
    Ok(Scalar::from_f64(t.cos(), t.sin()))
}

/// Pushes a germ in model form forward along `P`. No re-regularization.
pub fn apply_p(germ: &RealDefiningSeries, p: &NormalizationP) -> Result<RealDefiningSeries, NormalFormError> {
    let model = p.model();
    if ModelType::detect(germ) != Some(model) {
        return Err(precondition(format!("germ is not in {model} model form through weighted degree 3")));
    }
    let map = p.to_holo(germ.profile())?;
    let out = RealDefiningSeries::new(pushforward(&germ.phi, &map)?.chop())?;
    if ModelType::detect(&out) != Some(model) {
        return Err(internal(format!("normalization P left the {model} model form")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Full normalization

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormResult {
    pub model: ModelType,
    pub p: NormalizationP,
    /// The map taking the `P`-normalized germ to normal form.
    pub t: TransformT,
    /// Terms of weighted degree `>= 4` of the normal form.
    pub normal: TruncatedSeries,
    /// The full normal form `|z1|^2 + p3 + normal`.
    pub germ: RealDefiningSeries,
    pub order: u32,
}

/// Brings a germ in model form through degree 3 to normal form through
/// weighted degree `order`, after first applying `p`.
pub fn normalize_full(
    germ: &RealDefiningSeries,
    p: &NormalizationP,
    order: u32,
) -> Result<NormalFormResult, NormalFormError> {
    let model = ModelType::detect(germ).ok_or_else(|| precondition("germ is not in A.i model form through degree 3"))?;
    if model != p.model() {
        return Err(precondition(format!("normalization is for {} but the germ is {model}", p.model())));
    }
    if order > germ.profile().truncation_order {
        return Err(precondition(format!("order {order} exceeds the truncation order of the germ")));
    }
    if !germ.phi.is_exact() || !p.is_exact() {
        return Err(precondition("normal forms require exact coefficients"));
    }
    let spec = NormalSpaceSpec::for_model(model);
    let start = apply_p(&RealDefiningSeries::new(germ.phi.truncate(order))?, p)?;
    let prof = WeightProfile::new(2, order);
    let mut t = TransformT::zero(prof);
    let mut current = start.phi.clone();
    for nu in 4..=order {
        let f_nu = weighted_component(&current, nu).truncate(nu);
        let sol = solve_degree(&f_nu, nu, model)?;
        t = t.add(&sol.t.with_order(order));
        current = pushforward(&start.phi, &t.to_holo())?.chop();
        let got = weighted_component(&current, nu);
        if !got.approx_eq(&sol.normal.with_order(order), 1e-25) {
            return Err(internal(format!("degree {nu}: recomposed normal part disagrees with the linear solve")));
        }
    }
    if !is_real_series(&current) {
        return Err(internal("normal form is not real"));
    }
    let normal = current.filter(|m| m.weighted_degree(2) >= 4);
    if !spec.contains(&normal) {
        return Err(internal("normal form left the normal space"));
    }
    let out = RealDefiningSeries::new(current)?;
    if ModelType::detect(&out) != Some(model) {
        return Err(internal("normal form lost the model terms"));
    }
    Ok(NormalFormResult { model, p: p.clone(), t, normal, germ: out, order })
}

/// A germ brought to model form (if needed) and then to normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedGerm {
    /// Old coordinates in terms of model coordinates; `None` when the input
    /// was already in model form.
    pub witness: Option<HoloTransform>,
    pub result: NormalFormResult,
}

/// A germ in model form through weighted degree 3, with the classifier's
/// witness when one was needed.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelForm {
    pub model: ModelType,
    pub germ: RealDefiningSeries,
    pub witness: Option<HoloTransform>,
}

/// Classifies a germ when it is not yet in model form and pulls it back along
/// the witness lifted to `order`. `seed` is passed to the classifier.
pub fn to_model_form(germ: &RealDefiningSeries, order: u32, seed: u64) -> Result<ModelForm, NormalFormError> {
    let (model_form, witness) = match ModelType::detect(germ) {
        Some(_) => (germ.clone(), None),
        None => {
            let c = classify_with_seed(germ, seed)?;
            let r = c.result().ok_or_else(|| precondition(not_classified(&c)))?;
            if ModelType::from_invariants(&r.invariants).is_none() {
                return Err(precondition(format!("{} has no normal form here", r.invariants.tag())));
            }
            let w = &r.witness;
            let lifted = HoloTransform { f1: w.f1.with_order(order), f2: w.f2.with_order(order), g: w.g.with_order(order) };
            let phi = pullback(&germ.phi.truncate(order), &lifted)?.chop();
            (RealDefiningSeries::new(phi)?, Some(w.clone()))
        }
    };
    let model = ModelType::detect(&model_form).ok_or_else(|| internal("witness did not reach model form"))?;
    Ok(ModelForm { model, germ: model_form, witness })
}

/// [`to_model_form`] followed by [`normalize_full`] with `p` (identity if
/// `None`).
pub fn normalize_germ(
    germ: &RealDefiningSeries,
    p: Option<&NormalizationP>,
    order: u32,
) -> Result<NormalizedGerm, NormalFormError> {
    let mf = to_model_form(germ, order, 0)?;
    normalize_model_form(mf, p, order)
}

pub fn normalize_model_form(
    mf: ModelForm,
    p: Option<&NormalizationP>,
    order: u32,
) -> Result<NormalizedGerm, NormalFormError> {
    let id = NormalizationP::identity(mf.model);
    let p = p.unwrap_or(&id);
    if p.model() != mf.model {
        return Err(precondition(format!("normalization is for {}, germ is {}", p.model(), mf.model)));
    }
    let result = normalize_full(&mf.germ, p, order)?;
    Ok(NormalizedGerm { witness: mf.witness, result })
}

fn not_classified(c: &Classification) -> String {
    match c {
        Classification::NotApplicable { reason, .. } => format!("germ is not 2-nondegenerate ({reason})"),
        Classification::Classified(_) => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Invariants

#[derive(Clone, Debug, PartialEq)]
pub struct FourthOrderInvariants {
    pub a22: Scalar,
    pub b22: Scalar,
    pub c22: Scalar,
    pub delta22: i8,
    pub eps22: u8,
}

/// Reads `|z2|^2 (a22 |z1|^2 + b22 z1 zb2 + conj(b22) zb1 z2 + c22 |z2|^2)`
/// off an A.i.2 normal form.
pub fn fourth_order_invariants(nf: &NormalFormResult) -> Result<FourthOrderInvariants, NormalFormError> {
    if nf.model != ModelType::Ai2 {
        return Err(precondition(format!("fourth order invariants are defined for A.i.2, not {}", nf.model)));
    }
    if nf.order < 4 {
        return Err(precondition("normal form must reach weighted degree 4"));
    }
    let n = &nf.normal;
    let a22 = n.coeff(&Monomial::new(1, 1, 1, 1, 0));
    let b22 = n.coeff(&Monomial::new(1, 1, 0, 2, 0));
    let c22 = n.coeff(&Monomial::new(0, 2, 0, 2, 0));
    let scale = n.max_abs();
    let delta22 = c22.real_sign(scale) as i8;
    let eps22 = u8::from(delta22 == 0 && !b22.is_negligible(scale));
    Ok(FourthOrderInvariants { a22, b22, c22, delta22, eps22 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutDimensionReport {
    pub model: ModelType,
    /// Upper bound on `dim_R Aut` stated for the model.
    pub stated_bound: u32,
    /// Real dimension of the normalization parameters.
    pub computed_param_count: u32,
}

impl AutDimensionReport {
    pub fn agrees(&self) -> bool {
        self.stated_bound == self.computed_param_count
    }
}

pub fn aut_dimension_report(model: ModelType) -> AutDimensionReport {
    let stated_bound = match model {
        ModelType::Ai1 { gamma: 0 } => 17,
        ModelType::Ai1 { .. } => 19,
        ModelType::Ai2 => 45,
        ModelType::Ai3 => 19,
    };
    AutDimensionReport { model, stated_bound, computed_param_count: NormalizationP::real_dimension(model) }
}

// ---------------------------------------------------------------------------
// Equivalence

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    NonEquivalent(String),
    /// Identity-normalization normal forms agree; the maps are the two
    /// normalizing transforms.
    SameNormalForm(Box<(NormalizedGerm, NormalizedGerm)>),
    Inconclusive(String),
}

fn invariants_of(germ: &RealDefiningSeries) -> Result<ModelInvariants, NormalFormError> {
    if let Some(m) = ModelType::detect(germ) {
        return Ok(m.invariants());
    }
    let c = classify(germ)?;
    Ok(c.result().ok_or_else(|| precondition(not_classified(&c)))?.invariants.clone())
}

/// Compares two germs by type, model invariants, the fourth order
/// invariants (A.i.2) and finally their identity-normalization normal forms.
pub fn equivalence_certificate(
    g1: &RealDefiningSeries,
    g2: &RealDefiningSeries,
    order: u32,
) -> Result<Certificate, NormalFormError> {
    let (i1, i2) = (invariants_of(g1)?, invariants_of(g2)?);
    if i1.tag() != i2.tag() {
        return Ok(Certificate::NonEquivalent(format!("type: {} vs {}", i1.tag(), i2.tag())));
    }
    if !i1.approx_eq(&i2, 1e-20) {
        return Ok(Certificate::NonEquivalent(format!("model invariants: {i1} vs {i2}")));
    }
    if ModelType::from_invariants(&i1).is_none() {
        return Ok(Certificate::Inconclusive(format!("no normal form is computed for {}", i1.tag())));
    }
    let n1 = normalize_germ(g1, None, order)?;
    let n2 = normalize_germ(g2, None, order)?;
    if n1.result.model == ModelType::Ai2 && order >= 4 {
        let (a, b) = (fourth_order_invariants(&n1.result)?, fourth_order_invariants(&n2.result)?);
        if a.delta22 != b.delta22 {
            return Ok(Certificate::NonEquivalent(format!("delta22: {} vs {}", a.delta22, b.delta22)));
        }
        if a.eps22 != b.eps22 {
            return Ok(Certificate::NonEquivalent(format!("eps22: {} vs {}", a.eps22, b.eps22)));
        }
    }
    if n1.result.normal.approx_eq(&n2.result.normal, 1e-25) {
        return Ok(Certificate::SameNormalForm(Box::new((n1, n2))));
    }
    Ok(Certificate::Inconclusive("normal forms differ for the identity normalization".into()))
}
