//! Classification of 2-nondegenerate germs with degenerate Levi form.
//!
//! The cubic block of `Qbar` is read off as
//! `z1 (a1 zb1^2 + 2 b1 zb1 zb2 + c1 zb2^2) + z2 (a2 zb1^2 + 2 b2 zb1 zb2 + c2 zb2^2)`
//! and driven to one of eight model shapes by explicit linear (and, with a
//! rank one Levi form, quadratic) substitutions. Every result is checked by
//! re-extracting the cubic from the transformed germ.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{AlgebraError, Monomial, Scalar, TVar, TruncatedSeries, Var, WeightProfile};
use crate::germ::{
    apply_transform_with, complexify, make_regular, ComplexDefining, GermError, HoloTransform,
    RealDefiningSeries,
};
use crate::linsolve::{solve_unique, LinError};
use crate::nondeg::{k_nondegeneracy, levi_form, NondegError, NondegReport};

/// Relative tolerance for model matching on the float backend.
pub const MATCH_TOL: f64 = 1e-20;

/// Truncation used while reducing; only the cubic block matters.
const WORK_ORDER: u32 = 4;

const MAX_RETRIES: usize = 8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClassifyError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unresolved subcase: {0}")]
    OpenQuestion(String),
    #[error("internal assertion failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Nondeg(#[from] NondegError),
}

impl From<AlgebraError> for ClassifyError {
    fn from(e: AlgebraError) -> Self {
        ClassifyError::Germ(GermError::Algebra(e))
    }
}

fn internal(msg: impl Into<String>) -> ClassifyError {
    ClassifyError::Internal(msg.into())
}

fn div(a: &Scalar, b: &Scalar) -> Result<Scalar, ClassifyError> {
    a.div(b).map_err(|_| internal("division by zero"))
}

type Mat = [[Scalar; 2]; 2];

fn identity() -> Mat {
    [[Scalar::one(), Scalar::zero()], [Scalar::zero(), Scalar::one()]]
}

fn swap() -> Mat {
    [[Scalar::zero(), Scalar::one()], [Scalar::one(), Scalar::zero()]]
}

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][0].mul(&y[0][j]).add(&x[i][1].mul(&y[1][j]))))
}

fn mat_conj(x: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][j].conj()))
}

fn det(x: &Mat) -> Scalar {
    x[0][0].mul(&x[1][1]).sub(&x[0][1].mul(&x[1][0]))
}

fn mat_scale(x: &Mat) -> f64 {
    x.iter().flatten().map(|v| v.abs_f64()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Cubic data

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeviCase {
    OneNonzero,
    ZeroLevi,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubicData {
    pub a1: Scalar,
    pub b1: Scalar,
    pub c1: Scalar,
    pub a2: Scalar,
    pub b2: Scalar,
    pub c2: Scalar,
    pub delta_ab: Scalar,
    pub delta_bc: Scalar,
    pub delta_ac: Scalar,
}

impl CubicData {
    pub fn new(a1: Scalar, b1: Scalar, c1: Scalar, a2: Scalar, b2: Scalar, c2: Scalar) -> CubicData {
        let delta_ab = a1.mul(&b2).sub(&a2.mul(&b1));
        let delta_bc = b1.mul(&c2).sub(&b2.mul(&c1));
        let delta_ac = a1.mul(&c2).sub(&a2.mul(&c1));
        CubicData { a1, b1, c1, a2, b2, c2, delta_ab, delta_bc, delta_ac }
    }

    /// `(a1, b1, c1, a2, b2, c2)`.
    pub fn coeffs(&self) -> [Scalar; 6] {
        [self.a1.clone(), self.b1.clone(), self.c1.clone(), self.a2.clone(), self.b2.clone(), self.c2.clone()]
    }

    pub fn from_coeffs(c: [Scalar; 6]) -> CubicData {
        let [a1, b1, c1, a2, b2, c2] = c;
        CubicData::new(a1, b1, c1, a2, b2, c2)
    }

    fn matrices(&self) -> [Mat; 2] {
        [
            [[self.a1.clone(), self.b1.clone()], [self.b1.clone(), self.c1.clone()]],
            [[self.a2.clone(), self.b2.clone()], [self.b2.clone(), self.c2.clone()]],
        ]
    }

    pub fn scale(&self) -> f64 {
        self.coeffs().iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs().iter().all(|x| x.is_exact())
    }

    /// Replaces float coefficients below the negligibility threshold by an
    /// exact zero.
    fn cleaned(&self) -> CubicData {
        let s = self.scale();
        CubicData::from_coeffs(self.coeffs().map(|x| if x.is_negligible(s) { Scalar::zero() } else { x }))
    }

    pub fn approx_eq(&self, o: &CubicData, rel: f64) -> bool {
        let s = self.scale().max(o.scale());
        self.coeffs().iter().zip(o.coeffs().iter()).all(|(x, y)| {
            x.approx_eq(y, rel) || (x.sub(y).abs_f64() <= rel * (1.0 + s))
        })
    }

    /// The second row `(a2, b2, c2)`.
    fn second_row_zero(&self) -> bool {
        let s = self.scale();
        [&self.a2, &self.b2, &self.c2].iter().all(|x| x.is_negligible(s))
    }
}

impl fmt::Display for CubicData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a1={} b1={} c1={} a2={} b2={} c2={}",
            self.a1, self.b1, self.c1, self.a2, self.b2, self.c2
        )
    }
}

fn block_monomial(j: usize, zb: [u8; 2]) -> Monomial {
    let mut e = [0u8; 5];
    e[j] = 1;
    e[2] = zb[0];
    e[3] = zb[1];
    Monomial(e)
}

fn read_block(f: &TruncatedSeries, factor: &Scalar) -> CubicData {
    let half = Scalar::frac(1, 2, 0, 1);
    let get = |j: usize, zb: [u8; 2]| f.coeff(&block_monomial(j, zb)).mul(factor);
    CubicData::new(
        get(0, [2, 0]),
        get(0, [1, 1]).mul(&half),
        get(0, [0, 2]),
        get(1, [2, 0]),
        get(1, [1, 1]).mul(&half),
        get(1, [0, 2]),
    )
}

/// Reads the z-linear, zb-quadratic block of `Qbar` after checking the shape
/// of the quadratic part.
pub fn extract_cubic(cd: &ComplexDefining, case: LeviCase) -> Result<CubicData, ClassifyError> {
    let q = &cd.qbar;
    let scale = q.max_abs();
    let quad = |m: &Monomial| m.t() == 0 && m.z_degree() + m.zb_degree() == 2;
    let expected = |m: &Monomial| -> Scalar {
        if case == LeviCase::OneNonzero && *m == Monomial::new(1, 0, 1, 0, 0) {
            Scalar::gauss(0, -2)
        } else {
            Scalar::zero()
        }
    };
    for (m, c) in q.terms().iter().filter(|(m, _)| quad(m)) {
        if !c.sub(&expected(m)).is_negligible(scale) {
            return Err(ClassifyError::Precondition(format!(
                "quadratic part of Qbar is not in reduced form ({case:?})"
            )));
        }
    }
    if case == LeviCase::OneNonzero && q.coeff(&Monomial::new(1, 0, 1, 0, 0)).is_negligible(scale) {
        return Err(ClassifyError::Precondition("Levi form is zero".into()));
    }
    Ok(read_block(q, &Scalar::one()).cleaned())
}

/// Cubic block of `Qbar` computed from `phi` directly: `-2i` times the
/// z-linear, zb-quadratic part.
pub fn cubic_from_phi(phi: &TruncatedSeries) -> CubicData {
    read_block(phi, &Scalar::gauss(0, -2))
}

/// A real `phi` whose cubic block is `c`, plus `levi * |z1|^2`.
pub fn phi_from_cubic(c: &CubicData, levi: &Scalar, profile: WeightProfile) -> TruncatedSeries {
    let k = Scalar::frac(0, 1, 1, 2);
    let two = Scalar::from_int(2);
    let mut terms = vec![(Monomial::new(1, 0, 1, 0, 0), levi.clone())];
    let entries = [
        (0, [2, 0], &c.a1, Scalar::one()),
        (0, [1, 1], &c.b1, two.clone()),
        (0, [0, 2], &c.c1, Scalar::one()),
        (1, [2, 0], &c.a2, Scalar::one()),
        (1, [1, 1], &c.b2, two.clone()),
        (1, [0, 2], &c.c2, Scalar::one()),
    ];
    for (j, zb, v, mult) in entries {
        let m = block_monomial(j, zb);
        let coef = v.mul(&mult).mul(&k);
        terms.push((m.mirror(), coef.conj()));
        terms.push((m, coef));
    }
    TruncatedSeries::from_terms(profile, TVar::S, terms)
}

/// Effect of `z = A z'`, `w = C w'` (with `C` real) on the cubic block:
/// `M'_k = (1/C) sum_j A[j][k] conj(A)^T M_j conj(A)`.
pub fn transform_cubic(c: &CubicData, a: &Mat, cc: &Scalar) -> Result<CubicData, ClassifyError> {
    let ab = mat_conj(a);
    let n: Vec<Mat> = c
        .matrices()
        .iter()
        .map(|m| {
            std::array::from_fn(|p| {
                std::array::from_fn(|q| {
                    let mut acc = Scalar::zero();
                    for r in 0..2 {
                        for s in 0..2 {
                            acc.add_assign(&ab[r][p].mul(&m[r][s]).mul(&ab[s][q]));
                        }
                    }
                    acc
                })
            })
        })
        .collect();
    let inv_c = cc.inv().map_err(|_| internal("zero w-scaling"))?;
    let mk = |k: usize| -> Mat {
        std::array::from_fn(|p| {
            std::array::from_fn(|q| a[0][k].mul(&n[0][p][q]).add(&a[1][k].mul(&n[1][p][q])).mul(&inv_c))
        })
    };
    let (m1, m2) = (mk(0), mk(1));
    Ok(CubicData::new(
        m1[0][0].clone(),
        m1[0][1].clone(),
        m1[1][1].clone(),
        m2[0][0].clone(),
        m2[0][1].clone(),
        m2[1][1].clone(),
    )
    .cleaned())
}

// ---------------------------------------------------------------------------
// Models

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    Ai1,
    Ai2,
    Ai3,
    Aii1,
    Aii2,
    Aii3,
    Aii4,
    Aii5,
}

impl TypeTag {
    pub const ALL: [TypeTag; 8] = [
        TypeTag::Ai1,
        TypeTag::Ai2,
        TypeTag::Ai3,
        TypeTag::Aii1,
        TypeTag::Aii2,
        TypeTag::Aii3,
        TypeTag::Aii4,
        TypeTag::Aii5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TypeTag::Ai1 => "A.i.1",
            TypeTag::Ai2 => "A.i.2",
            TypeTag::Ai3 => "A.i.3",
            TypeTag::Aii1 => "A.ii.1",
            TypeTag::Aii2 => "A.ii.2",
            TypeTag::Aii3 => "A.ii.3",
            TypeTag::Aii4 => "A.ii.4",
            TypeTag::Aii5 => "A.ii.5",
        }
    }

    /// Accepts `A.i.2`, `Ai2`, `ai2`.
    pub fn parse(s: &str) -> Option<TypeTag> {
        let key: String = s.chars().filter(|c| *c != '.').collect::<String>().to_ascii_lowercase();
        TypeTag::ALL.into_iter().find(|t| format!("{t:?}").to_ascii_lowercase() == key)
    }

    /// True for the rank one Levi form types.
    pub fn levi_rank_one(self) -> bool {
        matches!(self, TypeTag::Ai1 | TypeTag::Ai2 | TypeTag::Ai3)
    }

    pub fn weight_w(self) -> u32 {
        if self.levi_rank_one() {
            2
        } else {
            3
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelInvariants {
    Ai1 { gamma: u8 },
    Ai2,
    Ai3,
    Aii1 { r: Scalar },
    Aii2,
    Aii3 { lambda: Scalar },
    Aii4 { mu: Scalar, nu: Scalar },
    Aii5 { eta: Scalar },
}

impl ModelInvariants {
    pub fn tag(&self) -> TypeTag {
        match self {
            ModelInvariants::Ai1 { .. } => TypeTag::Ai1,
            ModelInvariants::Ai2 => TypeTag::Ai2,
            ModelInvariants::Ai3 => TypeTag::Ai3,
            ModelInvariants::Aii1 { .. } => TypeTag::Aii1,
            ModelInvariants::Aii2 => TypeTag::Aii2,
            ModelInvariants::Aii3 { .. } => TypeTag::Aii3,
            ModelInvariants::Aii4 { .. } => TypeTag::Aii4,
            ModelInvariants::Aii5 { .. } => TypeTag::Aii5,
        }
    }

    /// Named continuous or discrete parameters, in display order.
    pub fn params(&self) -> Vec<(&'static str, Scalar)> {
        match self {
            ModelInvariants::Ai1 { gamma } => vec![("gamma", Scalar::from_int(*gamma as i64))],
            ModelInvariants::Aii1 { r } => vec![("r", r.clone())],
            ModelInvariants::Aii3 { lambda } => vec![("lambda", lambda.clone())],
            ModelInvariants::Aii4 { mu, nu } => vec![("mu", mu.clone()), ("nu", nu.clone())],
            ModelInvariants::Aii5 { eta } => vec![("eta", eta.clone())],
            _ => vec![],
        }
    }

    pub fn is_exact(&self) -> bool {
        self.params().iter().all(|(_, v)| v.is_exact())
    }

    /// Same type and parameters; exact comparison on exact values, relative
    /// tolerance `rel` otherwise.
    pub fn approx_eq(&self, o: &ModelInvariants, rel: f64) -> bool {
        self.tag() == o.tag()
            && self.params().iter().zip(o.params().iter()).all(|((_, x), (_, y))| x.approx_eq(y, rel))
    }

    /// Parses parameters given as a list of scalars in display order.
    pub fn from_params(tag: TypeTag, p: &[Scalar]) -> Result<ModelInvariants, ClassifyError> {
        let need = match tag {
            TypeTag::Ai1 | TypeTag::Aii1 | TypeTag::Aii3 | TypeTag::Aii5 => 1,
            TypeTag::Aii4 => 2,
            _ => 0,
        };
        if p.len() != need {
            return Err(ClassifyError::Precondition(format!("{tag} takes {need} parameter(s)")));
        }
        let bad = |m: &str| Err(ClassifyError::Precondition(format!("{tag}: {m}")));
        Ok(match tag {
            TypeTag::Ai1 => {
                if p[0] == Scalar::zero() {
                    ModelInvariants::Ai1 { gamma: 0 }
                } else if p[0] == Scalar::one() {
                    ModelInvariants::Ai1 { gamma: 1 }
                } else {
                    return bad("gamma must be 0 or 1");
                }
            }
            TypeTag::Ai2 => ModelInvariants::Ai2,
            TypeTag::Ai3 => ModelInvariants::Ai3,
            TypeTag::Aii1 => {
                if !p[0].is_real() || p[0].real_sign(0.0) <= 0 {
                    return bad("r must be positive");
                }
                ModelInvariants::Aii1 { r: p[0].clone() }
            }
            TypeTag::Aii2 => ModelInvariants::Aii2,
            TypeTag::Aii3 => {
                if p[0].is_zero() {
                    return bad("lambda must be non-zero");
                }
                ModelInvariants::Aii3 { lambda: p[0].clone() }
            }
            TypeTag::Aii4 => {
                if p[0].mul(&p[1]).approx_eq(&Scalar::one(), 1e-30) {
                    return bad("mu nu must differ from 1");
                }
                ModelInvariants::Aii4 { mu: p[0].clone(), nu: p[1].clone() }
            }
            TypeTag::Aii5 => ModelInvariants::Aii5 { eta: p[0].clone() },
        })
    }

    /// The model defining function `phi`, with `w`-weight 2 for the rank one
    /// types and 3 otherwise.
    pub fn model_phi(&self, order: u32) -> TruncatedSeries {
        let p = WeightProfile::new(self.tag().weight_w(), order);
        let one = Scalar::one;
        let m = Monomial::new;
        // A term `c z^a zb^b` together with its conjugate.
        let mut terms: Vec<(Monomial, Scalar)> = Vec::new();
        let mut pair = |mono: Monomial, c: Scalar| {
            let mirror = mono.mirror();
            if mirror == mono {
                terms.push((mono, c));
            } else {
                terms.push((mirror, c.conj()));
                terms.push((mono, c));
            }
        };
        match self {
            ModelInvariants::Ai1 { gamma } => {
                pair(m(1, 0, 1, 0, 0), one());
                pair(m(0, 2, 0, 1, 0), one());
                pair(m(2, 0, 0, 1, 0), Scalar::from_int(*gamma as i64));
            }
            ModelInvariants::Ai2 => {
                pair(m(1, 0, 1, 0, 0), one());
                pair(m(2, 0, 0, 1, 0), one());
            }
            ModelInvariants::Ai3 => {
                pair(m(1, 0, 1, 0, 0), one());
                pair(m(1, 1, 0, 1, 0), one());
            }
            ModelInvariants::Aii1 { r } => {
                pair(m(1, 1, 1, 0, 0), one());
                pair(m(2, 0, 0, 1, 0), r.clone());
            }
            ModelInvariants::Aii2 => {
                pair(m(1, 1, 1, 0, 0), one());
                pair(m(2, 0, 0, 1, 0), one());
                pair(m(2, 0, 1, 0, 0), Scalar::i());
            }
            ModelInvariants::Aii3 { lambda } => {
                pair(m(1, 1, 1, 0, 0), one());
                pair(m(1, 0, 0, 2, 0), one());
                pair(m(0, 2, 0, 1, 0), lambda.clone());
            }
            ModelInvariants::Aii4 { mu, nu } => {
                pair(m(2, 0, 1, 0, 0), one());
                pair(m(0, 2, 0, 1, 0), one());
                pair(m(2, 0, 0, 1, 0), mu.clone());
                pair(m(1, 0, 0, 2, 0), nu.clone());
            }
            ModelInvariants::Aii5 { eta } => {
                pair(m(2, 0, 1, 0, 0), eta.clone());
                pair(m(2, 0, 0, 1, 0), one());
                pair(m(1, 0, 0, 2, 0), one());
            }
        }
        TruncatedSeries::from_terms(p, TVar::S, terms)
    }

    pub fn model_germ(&self, order: u32) -> RealDefiningSeries {
        RealDefiningSeries::new(self.model_phi(order)).expect("model functions are real")
    }

    pub fn model_cubic(&self) -> CubicData {
        cubic_from_phi(&self.model_phi(3))
    }
}

impl fmt::Display for ModelInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())?;
        for (k, v) in self.params() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Orders an A.ii.4 pair. The swap `z1 <-> z2` maps `(mu, nu)` to
/// `(conj nu, conj mu)`; the representative has the larger `|mu|`, and on a
/// tie the smaller `arg mu` in `[0, 2 pi)`.
pub fn canonicalize_aii4(mu: &Scalar, nu: &Scalar) -> Result<(Scalar, Scalar), ClassifyError> {
    if mu.mul(nu).approx_eq(&Scalar::one(), MATCH_TOL) {
        return Err(ClassifyError::Precondition("mu nu = 1".into()));
    }
    Ok(if aii4_keep(mu, nu) { (mu.clone(), nu.clone()) } else { (nu.conj(), mu.conj()) })
}

fn aii4_keep(mu: &Scalar, nu: &Scalar) -> bool {
    let d = mu.norm_sqr().sub(&nu.norm_sqr());
    let s = mu.abs_f64().max(nu.abs_f64());
    match d.real_sign(s * s) {
        1 => true,
        -1 => false,
        _ => {
            let (a, b) = (mu.arg_f64(), nu.conj().arg_f64());
            a <= b + 1e-12 || mu.approx_eq(&nu.conj(), MATCH_TOL)
        }
    }
}

/// Representative of `{eta, eta w, eta w^2}` (`w` a cube root of unity) with
/// the largest real part, then largest imaginary part.
fn better_eta(cand: &Scalar, best: &Scalar) -> bool {
    let (cr, br) = (cand.re_f64(), best.re_f64());
    let tol = 1e-12 * (1.0 + cr.abs().max(br.abs()));
    if (cr - br).abs() > tol {
        return cr > br;
    }
    cand.im_f64() > best.im_f64() + tol
}

// ---------------------------------------------------------------------------
// Case two solver state

/// Values attached to a ratio `zeta = conj(A^1_2) / conj(A^2_2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseTwoSolverState {
    pub zeta: Scalar,
    /// `b1 |zeta|^2 + c1 conj(zeta) + c2`.
    pub r_val: Scalar,
    /// `a1 |zeta|^2 + b1 conj(zeta) + a2 zeta`.
    pub s_val: Scalar,
    /// `-a2 b1 zeta^2 + delta_ac zeta + b1 c2`.
    pub p1_val: Scalar,
    /// `a1 zeta^2 + 2 b1 zeta + c1`.
    pub p2_val: Scalar,
    /// `a1 + 2 b1 zeta + a2 conj(zeta)`.
    pub l_val: Scalar,
    pub t_ratio: Option<Scalar>,
}

impl CaseTwoSolverState {
    /// Builds the state for cubic data with `b2 = 0`, checking
    /// `p1 = (a1 zeta + b1) r - (b1 zeta + c1) s`.
    pub fn new(c: &CubicData, zeta: Scalar, t_ratio: Option<Scalar>) -> Result<CaseTwoSolverState, ClassifyError> {
        let zb = zeta.conj();
        let n2 = zeta.norm_sqr();
        let r_val = c.b1.mul(&n2).add(&c.c1.mul(&zb)).add(&c.c2);
        let s_val = c.a1.mul(&n2).add(&c.b1.mul(&zb)).add(&c.a2.mul(&zeta));
        let p1_val = c.a2.mul(&c.b1).neg().mul(&zeta).mul(&zeta).add(&c.delta_ac.mul(&zeta)).add(&c.b1.mul(&c.c2));
        let p2_val = c.a1.mul(&zeta).mul(&zeta).add(&c.b1.mul(&zeta).scale_int(2)).add(&c.c1);
        let l_val = c.a1.add(&c.b1.mul(&zeta).scale_int(2)).add(&c.a2.mul(&zb));
        let rhs = c.a1.mul(&zeta).add(&c.b1).mul(&r_val).sub(&c.b1.mul(&zeta).add(&c.c1).mul(&s_val));
        let sc = c.scale() * c.scale() * (1.0 + zeta.abs_f64()).powi(3);
        if !p1_val.sub(&rhs).is_negligible(sc) {
            return Err(internal("p1 identity failed"));
        }
        Ok(CaseTwoSolverState { zeta, r_val, s_val, p1_val, p2_val, l_val, t_ratio })
    }
}

// ---------------------------------------------------------------------------
// Results

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    pub invariants: ModelInvariants,
    /// Old coordinates in terms of model coordinates.
    pub witness: HoloTransform,
    pub model_germ: RealDefiningSeries,
    /// Cubic block of the model germ.
    pub cubic: CubicData,
    pub nondeg: NondegReport,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NotApplicableReason {
    LeviNondegenerate,
    /// `k`-nondegenerate with `k != 2`, or not finitely nondegenerate up to
    /// the available order (`None`).
    KNotTwo(Option<u32>),
}

impl fmt::Display for NotApplicableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotApplicableReason::LeviNondegenerate => f.write_str("Levi nondegenerate"),
            NotApplicableReason::KNotTwo(Some(k)) => write!(f, "{k}-nondegenerate"),
            NotApplicableReason::KNotTwo(None) => f.write_str("not finitely nondegenerate to this order"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Classified(Box<ClassificationResult>),
    NotApplicable { reason: NotApplicableReason, report: NondegReport },
}

impl Classification {
    pub fn result(&self) -> Option<&ClassificationResult> {
        match self {
            Classification::Classified(r) => Some(r),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Driver

/// Runs the nondegeneracy analysis and classifies when `k = 2`.
pub fn classify(germ: &RealDefiningSeries) -> Result<Classification, ClassifyError> {
    classify_with_seed(germ, 0)
}

/// As [`classify`]; `seed` drives the random retries of the one subcase that
/// needs them.
pub fn classify_with_seed(germ: &RealDefiningSeries, seed: u64) -> Result<Classification, ClassifyError> {
    let germ = regularized(germ)?;
    let omega = germ.profile().truncation_order;
    if omega < 3 {
        return Err(ClassifyError::Precondition("truncation order below 3".into()));
    }
    let nd_order = omega.min(5);
    let nd_germ = RealDefiningSeries::new(germ.phi.reweight(2, nd_order))?;
    let cd = complexify(&nd_germ)?;
    let report = k_nondegeneracy(&cd, (nd_order - 1).min(4))?;
    match report.k {
        Some(1) => Ok(Classification::NotApplicable { reason: NotApplicableReason::LeviNondegenerate, report }),
        Some(2) => {
            let mut r = if report.levi.rank() == 1 {
                reduce_levi_one(&germ)?
            } else {
                reduce_levi_zero_seeded(&germ, seed)?
            };
            r.nondeg = report;
            Ok(Classification::Classified(Box::new(r)))
        }
        k => Ok(Classification::NotApplicable { reason: NotApplicableReason::KNotTwo(k), report }),
    }
}

fn regularized(germ: &RealDefiningSeries) -> Result<RealDefiningSeries, ClassifyError> {
    if germ.regular {
        Ok(germ.clone())
    } else {
        Ok(make_regular(&germ.phi)?.0)
    }
}

fn working_germ(germ: &RealDefiningSeries, weight_w: u32) -> Result<RealDefiningSeries, ClassifyError> {
    let g = regularized(germ)?;
    let order = g.profile().truncation_order.min(WORK_ORDER);
    Ok(RealDefiningSeries::new(g.phi.reweight(weight_w, order))?)
}

fn nondeg_of(germ: &RealDefiningSeries) -> Result<NondegReport, ClassifyError> {
    let cd = complexify(germ)?;
    let k_max = (germ.profile().truncation_order - 1).min(2);
    Ok(k_nondegeneracy(&cd, k_max)?)
}

/// Applies `t`, re-extracts the cubic and checks it against the model.
fn finish(
    germ: &RealDefiningSeries,
    t: &HoloTransform,
    case: LeviCase,
    invariants: ModelInvariants,
) -> Result<ClassificationResult, ClassifyError> {
    let (model_germ, witness) = apply_transform_with(germ, t)?;
    let cd = complexify(&model_germ)?;
    let cubic = extract_cubic(&cd, case)
        .map_err(|e| internal(format!("transformed germ lost its quadratic shape: {e}")))?;
    let want = invariants.model_cubic();
    if !cubic.approx_eq(&want, MATCH_TOL) {
        return Err(internal(format!("model mismatch for {invariants}: got {cubic}, want {want}")));
    }
    let nondeg = nondeg_of(&model_germ)?;
    Ok(ClassificationResult { invariants, witness, model_germ, cubic, nondeg })
}

// ---------------------------------------------------------------------------
// Rank one Levi form

/// Reduces a germ with Levi signature `(1,0,1)` (or `(0,1,1)`) and
/// `k = 2` to one of the A.i models.
pub fn reduce_levi_one(germ: &RealDefiningSeries) -> Result<ClassificationResult, ClassifyError> {
    let g = working_germ(germ, 2)?;
    let p = g.profile();
    let levi = levi_form(&complexify(&g)?);
    let sign = match levi.eigen_signature {
        (1, 0, 1) => Scalar::one(),
        (0, 1, 1) => Scalar::from_int(-1),
        s => return Err(ClassifyError::Precondition(format!("Levi signature {s:?} is not rank one"))),
    };
    let h: Mat = std::array::from_fn(|j| std::array::from_fn(|k| levi.matrix[j][k].mul(&sign)));
    let scale = mat_scale(&h);
    let perm = if h[0][0].is_negligible(scale) { swap() } else { identity() };
    let hp = mat_mul(&perm, &mat_mul(&h, &perm));
    let h11 = hp[0][0].re();
    let a = div(&hp[0][1].conj(), &h11)?;
    let q: Mat = [[Scalar::one(), a.neg()], [Scalar::zero(), Scalar::one()]];
    let t0 = HoloTransform::linear(p, mat_mul(&perm, &q), sign.mul(&h11));

    let g1 = crate::germ::apply_transform(&g, &t0)?;
    let c = extract_cubic(&complexify(&g1)?, LeviCase::OneNonzero)?;
    if c.second_row_zero() {
        return Err(ClassifyError::Precondition("not 2-nondegenerate".into()));
    }
    let (lin, cc, inv) = levi_one_linear(&c)?;
    let c2 = transform_cubic(&c, &lin, &cc)?;
    let half_i = Scalar::frac(0, 1, 1, 2);
    let b = [c2.a1.conj().mul(&half_i), c2.b1.conj().mul(&half_i), c2.c1.conj().mul(&half_i)];
    let z = |e: [u8; 2], k: &Scalar| {
        TruncatedSeries::monomial(p, TVar::W, Monomial::new(e[0], e[1], 0, 0, 0), k.clone())
    };
    let f1 = z([1, 0], &Scalar::one()).add(&z([2, 0], &b[0])).add(&z([1, 1], &b[1].scale_int(2))).add(&z([0, 2], &b[2]));
    let tb = HoloTransform::from_parts(
        f1,
        z([0, 1], &Scalar::one()),
        TruncatedSeries::var(p, Var::W).with_tvar(TVar::W),
    )?;
    let total = t0.compose(&HoloTransform::linear(p, lin, cc))?.compose(&tb)?;
    finish(&g, &total, LeviCase::OneNonzero, inv)
}

/// Linear stage for the rank one case: `(A, C)` with `A^1_2 = 0` and
/// `|A^1_1|^2 = C`, normalizing `(a2, b2, c2)`.
fn levi_one_linear(c: &CubicData) -> Result<(Mat, Scalar, ModelInvariants), ClassifyError> {
    let s = c.scale();
    let zero = |x: &Scalar| x.is_negligible(s);
    let o = Scalar::zero;
    if zero(&c.c2) && zero(&c.b2) {
        let a22 = div(&Scalar::gauss(0, -2), &c.a2)?;
        return Ok(([[Scalar::one(), o()], [o(), a22]], Scalar::one(), ModelInvariants::Ai2));
    }
    if zero(&c.c2) {
        let a11 = Scalar::i().mul(&c.b2);
        let a21b = div(&c.a2.mul(&a11.conj()).neg(), &c.b2.scale_int(2))?;
        let cc = c.b2.norm_sqr();
        return Ok(([[a11, o()], [a21b.conj(), Scalar::one()]], cc, ModelInvariants::Ai3));
    }
    let k = div(&c.a2.mul(&c.c2).sub(&c.b2.mul(&c.b2)), &c.c2)?;
    let (a11, a22, cc, gamma) = if k.is_negligible(s) {
        let n = c.c2.norm_sqr();
        (n.scale_int(2), Scalar::gauss(0, 2).mul(&c.c2), n.mul(&n).scale_int(4), 0u8)
    } else {
        let rho = div(&Scalar::from_int(2), &k.abs())?;
        let c2abs = c.c2.abs();
        let a22 = rho.mul(&Scalar::i()).mul(&div(&c.c2, &c2abs)?);
        let cc = rho.pow(3).mul(&c2abs).mul(&Scalar::frac(1, 2, 0, 1));
        let e2 = Scalar::frac(0, 1, 1, 2).mul(&a22).mul(&k);
        let a11 = cc.sqrt_real().mul(&e2.sqrt());
        (a11, a22, cc, 1u8)
    };
    let a21b = div(&c.b2.mul(&a11.conj()).neg(), &c.c2)?;
    Ok(([[a11, o()], [a21b.conj(), a22]], cc, ModelInvariants::Ai1 { gamma }))
}

// ---------------------------------------------------------------------------
// Zero Levi form

/// Reduces a germ with vanishing Levi form and `k = 2` to one of the A.ii
/// models.
pub fn reduce_levi_zero(germ: &RealDefiningSeries) -> Result<ClassificationResult, ClassifyError> {
    reduce_levi_zero_seeded(germ, 0)
}

pub fn reduce_levi_zero_seeded(germ: &RealDefiningSeries, seed: u64) -> Result<ClassificationResult, ClassifyError> {
    let g = working_germ(germ, 3)?;
    let c0 = extract_cubic(&complexify(&g)?, LeviCase::ZeroLevi)?;
    let (acc, inv) = LeviZero::new(c0, seed).run()?;
    finish(&g, &HoloTransform::linear(g.profile(), acc, Scalar::one()), LeviCase::ZeroLevi, inv)
}

enum Step {
    Apply(Mat),
    Done(Mat, ModelInvariants),
    Retry,
}

struct LeviZero {
    cubic: CubicData,
    acc: Mat,
    rng: ChaCha8Rng,
}

impl LeviZero {
    fn new(cubic: CubicData, seed: u64) -> LeviZero {
        LeviZero { cubic, acc: identity(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn zero(&self, x: &Scalar) -> bool {
        x.is_negligible(self.cubic.scale())
    }

    fn zero2(&self, x: &Scalar) -> bool {
        let s = self.cubic.scale();
        x.is_negligible(s * s)
    }

    fn try_step(&self, a: &Mat) -> Result<Option<CubicData>, ClassifyError> {
        if det(a).is_negligible(mat_scale(a).powi(2)) {
            return Ok(None);
        }
        Ok(Some(transform_cubic(&self.cubic, a, &Scalar::one())?))
    }

    fn commit(&mut self, a: &Mat, c: CubicData) {
        self.acc = mat_mul(&self.acc, a);
        self.cubic = c;
    }

    fn run(mut self) -> Result<(Mat, ModelInvariants), ClassifyError> {
        let c = &self.cubic;
        if self.zero2(&c.delta_ab) && self.zero2(&c.delta_bc) && self.zero2(&c.delta_ac) {
            return Err(ClassifyError::Precondition("not 2-nondegenerate".into()));
        }
        self.kill_b2()?;
        let mut retries = 0;
        for _ in 0..4 * MAX_RETRIES + 8 {
            match self.dispatch()? {
                Step::Apply(a) => {
                    let c = self.try_step(&a)?.ok_or_else(|| internal("reduction step is singular"))?;
                    if !self.zero(&c.b2) {
                        return Err(internal("reduction step reintroduced b2"));
                    }
                    self.commit(&a, c);
                }
                Step::Done(a, inv) => {
                    let c = self.try_step(&a)?.ok_or_else(|| internal("final step is singular"))?;
                    self.commit(&a, c);
                    return Ok((self.acc, inv));
                }
                Step::Retry => {
                    retries += 1;
                    if retries > MAX_RETRIES {
                        return Err(ClassifyError::OpenQuestion(
                            "b1 c2 != 0 with a1 = a2 = c1 = 0 persists after random substitutions".into(),
                        ));
                    }
                    self.random_b2_preserving()?;
                }
            }
        }
        Err(internal("reduction did not terminate"))
    }

    /// `(R, S)` with `b2' = conj(A^2_1) R + conj(A^1_1) S` for
    /// `(A^1_2, A^2_2) = (u, v)`.
    fn r_s(&self, u: &Scalar, v: &Scalar) -> (Scalar, Scalar) {
        let c = &self.cubic;
        let (uu, vv, uv, vu) = (u.norm_sqr(), v.norm_sqr(), u.mul(&v.conj()), u.conj().mul(v));
        let r = c.b1.mul(&uu).add(&c.c1.mul(&uv)).add(&c.b2.mul(&vu)).add(&c.c2.mul(&vv));
        let s = c.a1.mul(&uu).add(&c.b1.mul(&uv)).add(&c.a2.mul(&vu)).add(&c.b2.mul(&vv));
        (r, s)
    }

    /// A transform with second column `(u, v)` and `b2' = 0`, given the first
    /// entry `a11` when `R != 0`.
    fn b2_free(&self, u: &Scalar, v: &Scalar, a11: &Scalar) -> Result<Mat, ClassifyError> {
        let (r, s) = self.r_s(u, v);
        let sc = self.cubic.scale() * (1.0 + u.abs_f64() + v.abs_f64()).powi(2);
        Ok(if !r.is_negligible(sc) {
            let a21b = div(&a11.conj().mul(&s).neg(), &r)?;
            [[a11.clone(), u.clone()], [a21b.conj(), v.clone()]]
        } else if !s.is_negligible(sc) {
            [[Scalar::zero(), u.clone()], [Scalar::one(), v.clone()]]
        } else if !v.is_zero() {
            [[Scalar::one(), u.clone()], [Scalar::zero(), v.clone()]]
        } else {
            [[Scalar::zero(), u.clone()], [Scalar::one(), v.clone()]]
        })
    }

    fn kill_b2(&mut self) -> Result<(), ClassifyError> {
        if self.zero(&self.cubic.b2) {
            return Ok(());
        }
        let g = Scalar::gauss;
        let cands = [(0, 0, 1, 0), (1, 0, 0, 0), (1, 0, 1, 0), (1, 0, -1, 0), (1, 0, 0, 1), (1, 0, 0, -1), (1, 0, 2, 0), (2, 0, 1, 0), (1, 0, 3, 0)];
        for (ur, ui, vr, vi) in cands {
            let a = self.b2_free(&g(ur, ui), &g(vr, vi), &Scalar::one())?;
            if let Some(c) = self.try_step(&a)? {
                if self.zero(&c.b2) {
                    self.commit(&a, c);
                    return Ok(());
                }
            }
        }
        Err(internal("no b2-killing substitution found"))
    }

    fn random_b2_preserving(&mut self) -> Result<(), ClassifyError> {
        for _ in 0..64 {
            let mut r = || Scalar::gauss(self.rng.gen_range(-3..=3), self.rng.gen_range(-3..=3));
            let (u, v, a11) = (r(), r(), r());
            if a11.is_zero() {
                continue;
            }
            let a = self.b2_free(&u, &v, &a11)?;
            if let Some(c) = self.try_step(&a)? {
                if self.zero(&c.b2) {
                    self.commit(&a, c);
                    return Ok(());
                }
            }
        }
        Err(internal("no random b2-preserving substitution found"))
    }

    fn dispatch(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let (zab, zbc, zac) = (self.zero2(&c.delta_ab), self.zero2(&c.delta_bc), self.zero2(&c.delta_ac));
        match (zab, zbc, zac) {
            (_, true, true) => self.sec_7_2(),
            (true, _, true) => self.sec_7_3(),
            (true, true, _) => self.sec_7_4(),
            (false, false, true) => self.sec_8_2(),
            (true, false, false) => self.sec_8_3(),
            (false, true, false) => self.sec_8_4(),
            (false, false, false) => self.sec_8_5(),
        }
    }

    /// `c1 = c2 = 0`: A.ii.1 or A.ii.2.
    fn sec_7_2(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let (a1, b1, a2) = (&c.a1, &c.b1, &c.a2);
        let (abs_a2, abs_b1) = (a2.abs(), b1.abs());
        let mut u = div(&abs_a2.mul(&b1.conj()).neg(), &a2.mul(&abs_b1))?.sqrt();
        let r = div(&a2.norm_sqr(), &b1.norm_sqr().scale_int(4))?.sqrt_real();
        let v1 = b1.scale_int(2).add(a2);
        let v2 = Scalar::i().mul(&b1.scale_int(2).sub(a2));
        let real_sys = |p: &Scalar, q: &Scalar| -> Result<Vec<Scalar>, LinError> {
            solve_unique(&[vec![p.re(), q.re()], vec![p.im(), q.im()]], &[a1.re().neg(), a1.im().neg()])
        };
        let zeta = match real_sys(&v1, &v2) {
            Ok(x) => Some(x[0].add(&Scalar::i().mul(&x[1]))),
            Err(_) => {
                let (n, dir) = if !self.zero(&v1) { (v1.clone(), Scalar::one()) } else { (v2.clone(), Scalar::i()) };
                let cross = a1.mul(&n.conj());
                if cross.im().is_negligible(c.scale() * c.scale()) {
                    Some(div(&cross.re().neg(), &n.norm_sqr())?.mul(&dir))
                } else {
                    None
                }
            }
        };
        let (rho, zeta, inv) = match zeta {
            Some(z) => (Scalar::one(), z, ModelInvariants::Aii1 { r }),
            None => {
                let (n, dir) = if !self.zero(&v1) { (v1.clone(), Scalar::one()) } else { (v2.clone(), Scalar::i()) };
                let ub = u.conj();
                let x = real_sys(&n, &ub.neg()).map_err(|_| internal("A.ii.2 phase system is singular"))?;
                let (s, mut t) = (x[0].clone(), x[1].clone());
                if t.real_sign(1.0) > 0 {
                    u = u.neg();
                    t = t.neg();
                }
                let rho = div(&Scalar::from_int(2), &t.neg())?.cbrt_real();
                (rho, s.mul(&dir), ModelInvariants::Aii2)
            }
        };
        let a11b = rho.mul(&u);
        let a21b = zeta.mul(&a11b);
        let a22b = div(&Scalar::gauss(0, -1), &b1.mul(&rho).mul(&rho))?;
        Ok(Step::Done([[a11b.conj(), Scalar::zero()], [a21b.conj(), a22b.conj()]], inv))
    }

    /// `a1 = a2 = 0`: A.ii.3, provided `c1 != 0`.
    fn sec_7_3(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        if self.zero(&c.c1) {
            return Ok(Step::Retry);
        }
        let k = div(&Scalar::gauss(0, 2).mul(&c.b1).mul(&c.b1), &c.c1)?;
        let xabs = div(&Scalar::one(), &k.abs())?.cbrt_real();
        let x2 = xabs.mul(&xabs);
        let x = k.mul(&x2).mul(&x2);
        let y = div(&Scalar::i(), &c.b1.conj().mul(&x2))?;
        let lambda = div(&c.b1.mul(&c.c2.conj()).scale_int(2), &c.c1.norm_sqr())?;
        Ok(Step::Done([[x, Scalar::zero()], [Scalar::zero(), y]], ModelInvariants::Aii3 { lambda }))
    }

    /// `b1 = b2 = 0`: A.ii.4 when `a1 c2 != 0`, else A.ii.5.
    fn sec_7_4(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let o = Scalar::zero;
        let minus_2i = Scalar::gauss(0, -2);
        // conj(x) |x|^2 = -2i / a, returned as x.
        let scale_for = |a: &Scalar| -> Result<Scalar, ClassifyError> {
            let m = div(&Scalar::from_int(2), &a.abs())?.cbrt_real();
            Ok(div(&div(&minus_2i, a)?, &m.mul(&m))?.conj())
        };
        if !self.zero2(&c.a1.mul(&c.c2)) {
            let a: Mat = [[scale_for(&c.a1)?, o()], [o(), scale_for(&c.c2)?]];
            let n = transform_cubic(c, &a, &Scalar::one())?;
            let mu = Scalar::frac(0, 1, 1, 2).mul(&n.a2).conj();
            let nu = Scalar::frac(0, 1, 1, 2).mul(&n.c1);
            let (a, mu, nu) = if aii4_keep(&mu, &nu) { (a, mu, nu) } else { (mat_mul(&a, &swap()), nu.conj(), mu.conj()) };
            return Ok(Step::Done(a, ModelInvariants::Aii4 { mu, nu }));
        }
        let (pre, c) = if self.zero(&c.c2) {
            (identity(), c.clone())
        } else {
            (swap(), transform_cubic(c, &swap(), &Scalar::one())?)
        };
        let x3 = div(&minus_2i.mul(&c.c1), &c.a2.conj().mul(&c.a2.conj()))?;
        let mut best: Option<(Mat, Scalar)> = None;
        for x in x3.cube_roots() {
            let y = div(&minus_2i, &c.a2.mul(&x.conj()).mul(&x.conj()))?;
            let a: Mat = [[x, o()], [o(), y]];
            let n = transform_cubic(&c, &a, &Scalar::one())?;
            let eta = Scalar::frac(0, 1, 1, 2).mul(&n.a1).conj();
            if best.as_ref().is_none_or(|(_, b)| better_eta(&eta, b)) {
                best = Some((a, eta));
            }
        }
        let (a, eta) = best.expect("three roots");
        Ok(Step::Done(mat_mul(&pre, &a), ModelInvariants::Aii5 { eta }))
    }

    /// Root transform for ratio `zeta`: `conj(A^1_2) = zeta`, `A^2_2 = 1`,
    /// `A^1_1 = 1`, `conj(A^2_1) = -s / r`.
    fn root_transform(&self, st: &CaseTwoSolverState) -> Result<Option<Mat>, ClassifyError> {
        let c = &self.cubic;
        let sc = c.scale() * (1.0 + st.zeta.abs_f64()).powi(2);
        if st.r_val.is_negligible(sc) {
            return Ok(None);
        }
        let a21b = div(&st.s_val.neg(), &st.r_val)?;
        let a: Mat = [[Scalar::one(), st.zeta.conj()], [a21b.conj(), Scalar::one()]];
        // det conj(A) = conj(A^1_1) conj(A^2_2) p2 / (b1 zeta + c1) when p1 = 0.
        let den = c.b1.mul(&st.zeta).add(&c.c1);
        if st.p1_val.is_negligible(sc * sc) && !den.is_negligible(sc) {
            let want = div(&st.p2_val, &den)?;
            if !det(&mat_conj(&a)).approx_eq(&want, 1e-25) && !det(&mat_conj(&a)).sub(&want).is_negligible(sc) {
                return Err(internal("determinant formula for root transform failed"));
            }
        }
        Ok(Some(a))
    }

    /// Transform with `conj(A^1_2) = zeta`, `A^2_2 = 1`, `A^2_1 = 1`,
    /// `conj(A^1_1) = t`.
    fn ratio_transform(&self, zeta: &Scalar, t: &Scalar) -> Result<Mat, ClassifyError> {
        CaseTwoSolverState::new(&self.cubic, zeta.clone(), Some(t.clone()))?;
        Ok([[t.conj(), zeta.conj()], [Scalar::one(), Scalar::one()]])
    }

    fn first_valid<F>(&self, cands: Vec<Mat>, ok: F, what: &str) -> Result<Step, ClassifyError>
    where
        F: Fn(&CubicData) -> bool,
    {
        for a in cands {
            if let Some(n) = self.try_step(&a)? {
                if self.zero(&n.b2) && ok(&n) {
                    return Ok(Step::Apply(a));
                }
            }
        }
        Err(ClassifyError::OpenQuestion(format!("no valid transform in {what}")))
    }

    fn sorted_roots(&self, mut roots: Vec<Scalar>) -> Vec<Scalar> {
        roots.sort_by(|x, y| {
            y.re_f64().partial_cmp(&x.re_f64()).unwrap().then(y.im_f64().partial_cmp(&x.im_f64()).unwrap())
        });
        roots
    }

    /// `delta_ac = 0`, the others non-zero: make `b1 = b2 = 0`.
    fn sec_8_2(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let r0 = div(&c.c2, &c.a2)?.sqrt();
        let roots = self.sorted_roots(vec![r0.clone(), r0.neg()]);
        let mut cands = Vec::new();
        for z in &roots {
            let st = CaseTwoSolverState::new(c, z.clone(), None)?;
            let sc = c.scale() * (1.0 + z.abs_f64()).powi(2);
            if !st.p2_val.is_negligible(sc) {
                if let Some(a) = self.root_transform(&st)? {
                    cands.push(a);
                }
            }
        }
        if !self.zero(&c.b1) {
            let t = div(&c.c1.neg(), &c.b1)?;
            for z in &roots {
                cands.push(self.ratio_transform(z, &t)?);
            }
        }
        for (z, other) in [(&roots[0], &roots[1]), (&roots[1], &roots[0])] {
            cands.push(self.ratio_transform(z, other)?);
        }
        self.first_valid(cands, |n| self.zero(&n.b1), "the delta_ac = 0 reduction")
    }

    /// `a2 = 0`: make `b1 = b2 = 0`.
    fn sec_8_3(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let a21b = div(&c.a1.neg(), &c.b1)?;
        let a: Mat = [[Scalar::one(), Scalar::one()], [a21b.conj(), Scalar::zero()]];
        self.first_valid(vec![a], |n| self.zero(&n.b1), "the a2 = 0 reduction")
    }

    /// `c2 = 0`: make `b1 = b2 = 0`.
    fn sec_8_4(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let a12b = div(&c.c1.neg(), &c.b1)?;
        let a: Mat = [[Scalar::zero(), a12b.conj()], [Scalar::one(), Scalar::one()]];
        self.first_valid(vec![a], |n| self.zero(&n.b1), "the c2 = 0 reduction")
    }

    /// All three determinants non-zero.
    fn sec_8_5(&self) -> Result<Step, ClassifyError> {
        let c = &self.cubic;
        let qa = c.a2.mul(&c.b1).neg();
        let disc = c.delta_ac.mul(&c.delta_ac).add(&c.a2.mul(&c.c2).mul(&c.b1).mul(&c.b1).scale_int(4));
        let sd = disc.sqrt();
        let two_qa = qa.scale_int(2);
        let roots = self.sorted_roots(vec![
            div(&c.delta_ac.neg().add(&sd), &two_qa)?,
            div(&c.delta_ac.neg().sub(&sd), &two_qa)?,
        ]);
        let states: Vec<CaseTwoSolverState> =
            roots.iter().map(|z| CaseTwoSolverState::new(c, z.clone(), None)).collect::<Result<_, _>>()?;
        for st in &states {
            let sc = c.scale() * (1.0 + st.zeta.abs_f64()).powi(2);
            if !st.p1_val.is_negligible(sc * sc) {
                return Err(internal("p1 root check failed"));
            }
            if st.r_val.is_negligible(sc) {
                let a: Mat = [[Scalar::one(), st.zeta.conj()], [Scalar::zero(), Scalar::one()]];
                return self.first_valid(vec![a], |n| self.zero(&n.c2), "the common-root reduction");
            }
        }
        let s4 = c.scale().powi(4);
        if !disc.is_negligible(s4) {
            let mut cands = Vec::new();
            for st in &states {
                let sc = c.scale() * (1.0 + st.zeta.abs_f64()).powi(2);
                if !st.p2_val.is_negligible(sc) {
                    if let Some(a) = self.root_transform(st)? {
                        cands.push(a);
                    }
                }
            }
            return self.first_valid(cands, |n| self.zero(&n.b1), "the distinct-root reduction");
        }
        if self.zero2(&c.b1.mul(&c.b1).sub(&c.a1.mul(&c.c1))) {
            let a21b = div(&c.a1.neg(), &c.b1)?;
            let a: Mat = [[Scalar::one(), Scalar::one()], [a21b.conj(), Scalar::zero()]];
            return self.first_valid(vec![a], |n| self.zero(&n.a2), "the double-root reduction");
        }
        let zb = div(&c.a2.mul(&c.c2).scale_int(-2), &c.a1.mul(&c.c2).add(&c.a2.mul(&c.c1)))?;
        let mut cands = Vec::new();
        for z in [zb.conj(), zb] {
            let st = CaseTwoSolverState::new(c, z, None)?;
            if let Some(a) = self.root_transform(&st)? {
                cands.push(a);
            }
        }
        self.first_valid(cands, |n| self.zero(&n.a2), "the double-root reduction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn model_cubics_have_expected_entries() {
        let g = Scalar::gauss;
        let c = ModelInvariants::Aii1 { r: Scalar::from_int(2) }.model_cubic();
        assert_eq!(c.coeffs(), [g(0, 0), g(0, -1), g(0, 0), g(0, -4), g(0, 0), g(0, 0)]);
        let c = ModelInvariants::Ai2.model_cubic();
        assert_eq!(c.coeffs(), [g(0, 0), g(0, 0), g(0, 0), g(0, -2), g(0, 0), g(0, 0)]);
        let c = ModelInvariants::Aii2.model_cubic();
        assert_eq!(c.coeffs(), [g(-2, 0), g(0, -1), g(0, 0), g(0, -2), g(0, 0), g(0, 0)]);
    }

    #[test]
    fn extracted_cubic_matches_phi_block() {
        for m in models() {
            let germ = m.model_germ(4);
            let cd = complexify(&germ).unwrap();
            let case = if m.tag().levi_rank_one() { LeviCase::OneNonzero } else { LeviCase::ZeroLevi };
            assert_eq!(extract_cubic(&cd, case).unwrap(), m.model_cubic(), "{m}");
        }
    }

    #[test]
    fn models_are_fixed_points() {
        for m in models() {
            let r = classify(&m.model_germ(4)).unwrap();
            let res = r.result().unwrap_or_else(|| panic!("{m} not classified"));
            assert_eq!(res.invariants, m, "{m}");
        }
    }

    #[test]
    fn hyperquadric_has_zero_cubic() {
        let p = WeightProfile::new(2, 4);
        let phi = TruncatedSeries::monomial(p, TVar::S, Monomial::new(1, 0, 1, 0, 0), Scalar::one());
        let cd = complexify(&RealDefiningSeries::new(phi).unwrap()).unwrap();
        let c = extract_cubic(&cd, LeviCase::OneNonzero).unwrap();
        assert!(c.coeffs().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn canonical_aii4_examples() {
        let (mu, nu) = canonicalize_aii4(&Scalar::one(), &Scalar::from_int(2)).unwrap();
        assert_eq!((mu, nu), (Scalar::from_int(2), Scalar::one()));
        let (mu, nu) = canonicalize_aii4(&Scalar::i(), &Scalar::i()).unwrap();
        assert_eq!((mu, nu), (Scalar::i(), Scalar::i()));
        assert!(canonicalize_aii4(&Scalar::one(), &Scalar::one()).is_err());
    }

    #[test]
    fn transform_cubic_identity_and_scaling() {
        let c = ModelInvariants::Aii5 { eta: Scalar::gauss(1, -1) }.model_cubic();
        assert_eq!(transform_cubic(&c, &identity(), &Scalar::one()).unwrap(), c);
        let two: Mat = [[Scalar::from_int(2), Scalar::zero()], [Scalar::zero(), Scalar::from_int(2)]];
        let d = transform_cubic(&c, &two, &Scalar::from_int(8)).unwrap();
        assert_eq!(d, c);
    }
}
