//! Truncated multivariate power series in `(z1, z2, zb1, zb2, t)`.
//!
//! The fifth slot `t` is one of `s`, `w` or `tau` (the conjugate of `w`),
//! recorded per series as a [`TVar`]. Weighted degree counts every `z` and
//! `zb` as 1 and `t` as `weight_w`. Terms are kept sorted by weighted degree
//! and then by exponent tuple, with no zero coefficients and nothing above
//! the truncation order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use super::rat::Rat;
use super::scalar::Scalar;
use super::AlgebraError;

/// Multiplicative hasher for packed monomial keys.
#[derive(Default, Clone, Copy)]
pub(crate) struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 = (self.0.rotate_left(5) ^ *b as u64).wrapping_mul(0x517c_c1b7_2722_0a95);
        }
    }
    fn write_u64(&mut self, n: u64) {
        self.0 = (self.0.rotate_left(5) ^ n).wrapping_mul(0x517c_c1b7_2722_0a95);
    }
}

pub(crate) type KeyMap<V> = HashMap<u64, V, BuildHasherDefault<KeyHasher>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z1,
    Z2,
    Zb1,
    Zb2,
    S,
    W,
    Tau,
}

impl Var {
    pub fn slot(self) -> usize {
        match self {
            Var::Z1 => 0,
            Var::Z2 => 1,
            Var::Zb1 => 2,
            Var::Zb2 => 3,
            Var::S | Var::W | Var::Tau => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Z1 => "z1",
            Var::Z2 => "z2",
            Var::Zb1 => "zb1",
            Var::Zb2 => "zb2",
            Var::S => "s",
            Var::W => "w",
            Var::Tau => "wb",
        }
    }

    fn tvar(self) -> Option<TVar> {
        match self {
            Var::S => Some(TVar::S),
            Var::W => Some(TVar::W),
            Var::Tau => Some(TVar::Tau),
            _ => None,
        }
    }
}

/// Which variable occupies the fifth slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TVar {
    S,
    W,
    Tau,
}

impl TVar {
    pub fn var(self) -> Var {
        match self {
            TVar::S => Var::S,
            TVar::W => Var::W,
            TVar::Tau => Var::Tau,
        }
    }

    fn conj(self) -> TVar {
        match self {
            TVar::S => TVar::S,
            TVar::W => TVar::Tau,
            TVar::Tau => TVar::W,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableKind {
    RealSide,
    HoloSide,
    AntiHoloSide,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeightProfile {
    pub weight_w: u32,
    pub truncation_order: u32,
}

impl WeightProfile {
    pub const WEIGHT_Z: u32 = 1;

    pub fn new(weight_w: u32, truncation_order: u32) -> WeightProfile {
        WeightProfile { weight_w, truncation_order }
    }

    pub fn weight_of(&self, v: Var) -> u32 {
        if v.slot() == 4 {
            self.weight_w
        } else {
            Self::WEIGHT_Z
        }
    }

    pub fn with_order(&self, truncation_order: u32) -> WeightProfile {
        WeightProfile { weight_w: self.weight_w, truncation_order }
    }
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile { weight_w: 2, truncation_order: 8 }
    }
}

/// Exponents of `z1, z2, zb1, zb2, t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub [u8; 5]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; 5]);

    pub fn new(z1: u8, z2: u8, zb1: u8, zb2: u8, t: u8) -> Monomial {
        Monomial([z1, z2, zb1, zb2, t])
    }

    pub fn var(v: Var) -> Monomial {
        let mut e = [0; 5];
        e[v.slot()] = 1;
        Monomial(e)
    }

    pub fn z_degree(&self) -> u32 {
        self.0[0] as u32 + self.0[1] as u32
    }

    pub fn zb_degree(&self) -> u32 {
        self.0[2] as u32 + self.0[3] as u32
    }

    pub fn t(&self) -> u32 {
        self.0[4] as u32
    }

    /// `(|z-exponents|, |zb-exponents|)`.
    pub fn bidegree(&self) -> (u32, u32) {
        (self.z_degree(), self.zb_degree())
    }

    pub fn weighted_degree(&self, weight_w: u32) -> u32 {
        self.z_degree() + self.zb_degree() + weight_w * self.t()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0.iter()) {
            *a += *b;
        }
        Monomial(e)
    }

    /// Swaps the `z` and `zb` exponents.
    pub fn mirror(&self) -> Monomial {
        let e = self.0;
        Monomial([e[2], e[3], e[0], e[1], e[4]])
    }

    pub(crate) fn key(&self) -> u64 {
        let e = self.0;
        e[0] as u64 | (e[1] as u64) << 8 | (e[2] as u64) << 16 | (e[3] as u64) << 24 | (e[4] as u64) << 32
    }

    pub(crate) fn from_key(k: u64) -> Monomial {
        Monomial([k as u8, (k >> 8) as u8, (k >> 16) as u8, (k >> 24) as u8, (k >> 32) as u8])
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    profile: WeightProfile,
    tvar: TVar,
    terms: Vec<(Monomial, Scalar)>,
}

/// Accumulates products and sums before a single canonicalizing pass.
pub(crate) struct Accum {
    weight_w: u32,
    cap: u32,
    map: KeyMap<Scalar>,
}

impl Accum {
    pub(crate) fn new(weight_w: u32, cap: u32) -> Accum {
        Accum { weight_w, cap, map: KeyMap::default() }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if m.weighted_degree(self.weight_w) > self.cap || c.is_zero() {
            return;
        }
        self.map.entry(m.key()).or_default().add_assign(c);
    }

    pub(crate) fn add_scaled(&mut self, s: &TruncatedSeries, k: &Scalar) {
        if k.is_zero() {
            return;
        }
        for (m, c) in &s.terms {
            if m.weighted_degree(self.weight_w) > self.cap {
                break;
            }
            let v = if k.is_one() { c.clone() } else { c.mul(k) };
            self.map.entry(m.key()).or_default().add_assign(&v);
        }
    }

    /// Adds `a * b`, truncated.
    pub(crate) fn add_product(&mut self, a: &TruncatedSeries, b: &TruncatedSeries) {
        let w = self.weight_w;
        let bdeg: Vec<u32> = b.terms.iter().map(|(m, _)| m.weighted_degree(w)).collect();
        let bkey: Vec<u64> = b.terms.iter().map(|(m, _)| m.key()).collect();
        for (ma, ca) in &a.terms {
            let da = ma.weighted_degree(w);
            if da > self.cap {
                break;
            }
            let ka = ma.key();
            let room = self.cap - da;
            for (j, (_, cb)) in b.terms.iter().enumerate() {
                if bdeg[j] > room {
                    break;
                }
                let prod = ca.mul(cb);
                self.map.entry(ka + bkey[j]).or_default().add_assign(&prod);
            }
        }
    }

    pub(crate) fn finish(self, profile: WeightProfile, tvar: TVar) -> TruncatedSeries {
        let w = profile.weight_w;
        let mut terms: Vec<(Monomial, Scalar)> = self
            .map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (Monomial::from_key(k), c))
            .collect();
        terms.sort_by_key(|(m, _)| (m.weighted_degree(w), *m));
        TruncatedSeries { profile: profile.with_order(self.cap.min(profile.truncation_order)), tvar, terms }
    }
}

impl TruncatedSeries {
    pub fn zero(profile: WeightProfile, tvar: TVar) -> TruncatedSeries {
        TruncatedSeries { profile, tvar, terms: Vec::new() }
    }

    pub fn constant(profile: WeightProfile, tvar: TVar, c: Scalar) -> TruncatedSeries {
        TruncatedSeries::from_terms(profile, tvar, [(Monomial::ONE, c)])
    }

    pub fn one(profile: WeightProfile, tvar: TVar) -> TruncatedSeries {
        TruncatedSeries::constant(profile, tvar, Scalar::one())
    }

    /// The series consisting of a single variable.
    pub fn var(profile: WeightProfile, v: Var) -> TruncatedSeries {
        let tvar = v.tvar().unwrap_or(TVar::S);
        TruncatedSeries::from_terms(profile, tvar, [(Monomial::var(v), Scalar::one())])
    }

    pub fn monomial(profile: WeightProfile, tvar: TVar, m: Monomial, c: Scalar) -> TruncatedSeries {
        TruncatedSeries::from_terms(profile, tvar, [(m, c)])
    }

    pub fn from_terms<I>(profile: WeightProfile, tvar: TVar, terms: I) -> TruncatedSeries
    where
        I: IntoIterator<Item = (Monomial, Scalar)>,
    {
        let mut acc = Accum::new(profile.weight_w, profile.truncation_order);
        for (m, c) in terms {
            acc.add_term(m, &c);
        }
        acc.finish(profile, tvar)
    }

    pub fn profile(&self) -> WeightProfile {
        self.profile
    }

    pub fn order_cap(&self) -> u32 {
        self.profile.truncation_order
    }

    pub fn weight_w(&self) -> u32 {
        self.profile.weight_w
    }

    pub fn tvar(&self) -> TVar {
        self.tvar
    }

    /// Relabels the fifth slot. Used when a series in `w` is reread in `s`.
    pub fn with_tvar(&self, tvar: TVar) -> TruncatedSeries {
        TruncatedSeries { profile: self.profile, tvar, terms: self.terms.clone() }
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_exact())
    }

    pub fn has_t(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.t() > 0)
    }

    pub fn variable_kind(&self) -> VariableKind {
        let has_z = self.terms.iter().any(|(m, _)| m.z_degree() > 0);
        let has_zb = self.terms.iter().any(|(m, _)| m.zb_degree() > 0);
        match self.tvar {
            TVar::S => VariableKind::RealSide,
            TVar::W if !has_zb => VariableKind::HoloSide,
            TVar::Tau if !has_z => VariableKind::AntiHoloSide,
            _ => VariableKind::Mixed,
        }
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        let w = self.profile.weight_w;
        let key = (m.weighted_degree(w), *m);
        match self.terms.binary_search_by_key(&key, |(mm, _)| (mm.weighted_degree(w), *mm)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn constant_term(&self) -> Scalar {
        match self.terms.first() {
            Some((m, c)) if *m == Monomial::ONE => c.clone(),
            _ => Scalar::zero(),
        }
    }

    /// Lowest weighted degree present, or `None` for the zero series.
    pub fn order(&self) -> Option<u32> {
        self.terms.first().map(|(m, _)| m.weighted_degree(self.profile.weight_w))
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.last().map(|(m, _)| m.weighted_degree(self.profile.weight_w))
    }

    /// Largest coefficient magnitude, as f64.
    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs_f64()).fold(0.0, f64::max)
    }

    pub fn filter<F: Fn(&Monomial) -> bool>(&self, keep: F) -> TruncatedSeries {
        TruncatedSeries {
            profile: self.profile,
            tvar: self.tvar,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).cloned().collect(),
        }
    }

    pub fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> TruncatedSeries {
        TruncatedSeries::from_terms(self.profile, self.tvar, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Drops every term above `order` and lowers the truncation order.
    pub fn truncate(&self, order: u32) -> TruncatedSeries {
        let w = self.profile.weight_w;
        let order = order.min(self.profile.truncation_order);
        TruncatedSeries {
            profile: self.profile.with_order(order),
            tvar: self.tvar,
            terms: self.terms.iter().filter(|(m, _)| m.weighted_degree(w) <= order).cloned().collect(),
        }
    }

    /// Re-grades under another `w`-weight, dropping terms above the order.
    pub fn reweight(&self, weight_w: u32, order: u32) -> TruncatedSeries {
        TruncatedSeries::from_terms(WeightProfile::new(weight_w, order), self.tvar, self.terms.iter().cloned())
    }

    /// Raises the nominal truncation order without adding terms. Only valid
    /// when the caller knows the series is exact beyond its current order
    /// (for example a polynomial).
    pub fn with_order(&self, order: u32) -> TruncatedSeries {
        TruncatedSeries { profile: self.profile.with_order(order), tvar: self.tvar, terms: self.terms.clone() }
    }

    fn joint(&self, o: &TruncatedSeries) -> Result<(WeightProfile, TVar), AlgebraError> {
        if self.profile.weight_w != o.profile.weight_w {
            return Err(AlgebraError::ProfileMismatch(self.profile.weight_w, o.profile.weight_w));
        }
        let order = self.profile.truncation_order.min(o.profile.truncation_order);
        let tvar = match (self.has_t(), o.has_t()) {
            (true, true) if self.tvar != o.tvar => return Err(AlgebraError::VariableMismatch),
            (false, true) => o.tvar,
            _ => self.tvar,
        };
        Ok((self.profile.with_order(order), tvar))
    }

    fn joint_or_panic(&self, o: &TruncatedSeries) -> (WeightProfile, TVar) {
        match self.joint(o) {
            Ok(j) => j,
            Err(e) => panic!("incompatible series: {e}"),
        }
    }

    pub fn add(&self, o: &TruncatedSeries) -> TruncatedSeries {
        let (p, t) = self.joint_or_panic(o);
        let mut acc = Accum::new(p.weight_w, p.truncation_order);
        acc.add_scaled(self, &Scalar::one());
        acc.add_scaled(o, &Scalar::one());
        acc.finish(p, t)
    }

    pub fn sub(&self, o: &TruncatedSeries) -> TruncatedSeries {
        let (p, t) = self.joint_or_panic(o);
        let mut acc = Accum::new(p.weight_w, p.truncation_order);
        acc.add_scaled(self, &Scalar::one());
        acc.add_scaled(o, &Scalar::from_int(-1));
        acc.finish(p, t)
    }

    pub fn neg(&self) -> TruncatedSeries {
        self.scale(&Scalar::from_int(-1))
    }

    pub fn scale(&self, k: &Scalar) -> TruncatedSeries {
        if k.is_one() {
            return self.clone();
        }
        TruncatedSeries {
            profile: self.profile,
            tvar: self.tvar,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c.mul(k)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn add_constant(&self, c: &Scalar) -> TruncatedSeries {
        self.add(&TruncatedSeries::constant(self.profile, self.tvar, c.clone()))
    }

    pub fn mul(&self, o: &TruncatedSeries) -> TruncatedSeries {
        let (p, t) = self.joint_or_panic(o);
        let mut acc = Accum::new(p.weight_w, p.truncation_order);
        acc.add_product(self, o);
        acc.finish(p, t)
    }

    /// Product truncated at `cap` (never above the joint order).
    pub fn mul_capped(&self, o: &TruncatedSeries, cap: u32) -> TruncatedSeries {
        let (p, t) = self.joint_or_panic(o);
        let cap = cap.min(p.truncation_order);
        let mut acc = Accum::new(p.weight_w, cap);
        acc.add_product(self, o);
        let mut r = acc.finish(p, t);
        r.profile = p;
        r
    }

    pub fn pow(&self, k: u32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(self.profile, self.tvar);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Keeps only monomials not involving the given slots, i.e. sets those
    /// variables to zero.
    pub fn set_zero(&self, vars: &[Var]) -> TruncatedSeries {
        self.filter(|m| vars.iter().all(|v| m.0[v.slot()] == 0))
    }

    /// Coefficientwise comparison: exact on exact data, otherwise within
    /// `rel` relative to the largest coefficient.
    pub fn approx_eq(&self, o: &TruncatedSeries, rel: f64) -> bool {
        let d = self.sub(o);
        if self.is_exact() && o.is_exact() {
            return d.is_zero();
        }
        let scale = self.max_abs().max(o.max_abs());
        d.terms.iter().all(|(_, c)| c.abs_f64() <= rel * (1.0 + scale))
    }

    /// Removes float coefficients below `1e-30 * (1 + max |coeff|)`.
    pub fn chop(&self) -> TruncatedSeries {
        let scale = self.max_abs();
        TruncatedSeries {
            profile: self.profile,
            tvar: self.tvar,
            terms: self.terms.iter().filter(|(_, c)| !c.is_negligible(scale)).cloned().collect(),
        }
    }

    /// Snaps float coefficients to nearby small Gaussian rationals.
    pub fn snap(&self, rel: f64) -> TruncatedSeries {
        self.chop().map_coeffs(|c| c.snap(rel))
    }

    pub fn to_float(&self, prec: u32) -> TruncatedSeries {
        self.map_coeffs(|c| c.to_float(prec))
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::to_text(self))
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::to_text(self))
    }
}

pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries, AlgebraError> {
    a.joint(b)?;
    Ok(a.mul(b))
}

/// Variable bindings for [`substitute`]. Unbound variables stay as they are.
#[derive(Clone, Default)]
pub struct Bindings {
    slots: [Option<TruncatedSeries>; 5],
    t_name: Option<TVar>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn bind(mut self, v: Var, s: TruncatedSeries) -> Bindings {
        if let Some(t) = v.tvar() {
            self.t_name = Some(t);
        }
        self.slots[v.slot()] = Some(s);
        self
    }

    pub fn get(&self, v: Var) -> Option<&TruncatedSeries> {
        self.slots[v.slot()].as_ref()
    }
}

/// Formal composition `f(bindings)` truncated at the joint order.
pub fn substitute(f: &TruncatedSeries, b: &Bindings) -> Result<TruncatedSeries, AlgebraError> {
    let w = f.profile.weight_w;
    let mut cap = f.profile.truncation_order;
    if let Some(t) = b.t_name {
        if f.has_t() && t != f.tvar {
            return Err(AlgebraError::VariableMismatch);
        }
    }
    let mut out_t: Option<TVar> = None;
    if b.slots[4].is_none() && f.has_t() {
        out_t = Some(f.tvar);
    }
    for (i, s) in b.slots.iter().enumerate() {
        let Some(s) = s else { continue };
        if s.profile.weight_w != w {
            return Err(AlgebraError::ProfileMismatch(w, s.profile.weight_w));
        }
        let weight = if i == 4 { w } else { 1 };
        if let Some(ord) = s.order() {
            if ord < weight {
                let var = [Var::Z1, Var::Z2, Var::Zb1, Var::Zb2, f.tvar.var()][i];
                return Err(AlgebraError::BindingOrder { var: var.name(), order: ord, weight });
            }
        }
        cap = cap.min(s.profile.truncation_order);
        if s.has_t() {
            match out_t {
                Some(t) if t != s.tvar => return Err(AlgebraError::VariableMismatch),
                _ => out_t = Some(s.tvar),
            }
        }
    }
    let out_t = out_t.unwrap_or(f.tvar);
    let profile = f.profile.with_order(cap);
    Ok(substitute_unchecked(f, b, profile, out_t))
}

fn substitute_unchecked(
    f: &TruncatedSeries,
    b: &Bindings,
    profile: WeightProfile,
    out_t: TVar,
) -> TruncatedSeries {
    let cap = profile.truncation_order;
    let w = profile.weight_w;
    let mut max_e = [0u8; 5];
    for (m, _) in &f.terms {
        for i in 0..5 {
            max_e[i] = max_e[i].max(m.0[i]);
        }
    }
    // Power tables; unbound slots use the bare variable.
    let powers: Vec<Vec<TruncatedSeries>> = (0..5)
        .map(|i| {
            let base = match &b.slots[i] {
                Some(s) => s.clone(),
                None => {
                    let v = [Var::Z1, Var::Z2, Var::Zb1, Var::Zb2, f.tvar.var()][i];
                    TruncatedSeries::var(profile, v).with_tvar(if i == 4 { f.tvar } else { out_t })
                }
            };
            let mut v = vec![TruncatedSeries::one(profile, out_t)];
            for k in 1..=max_e[i] as usize {
                let next = v[k - 1].mul(&base);
                v.push(next);
            }
            v
        })
        .collect();
    let min_ord = |i: usize| -> u32 { powers[i].get(1).and_then(|s| s.order()).unwrap_or(cap + 1) };
    let t_ord = min_ord(4);

    // Group terms by their z-part so the t-part is a single linear combination.
    let mut groups: BTreeMap<[u8; 4], Vec<(u8, &Scalar)>> = BTreeMap::new();
    for (m, c) in &f.terms {
        groups.entry([m.0[0], m.0[1], m.0[2], m.0[3]]).or_default().push((m.0[4], c));
    }
    let mut prefix2: HashMap<[u8; 2], TruncatedSeries> = HashMap::new();
    let mut prefix3: HashMap<[u8; 3], TruncatedSeries> = HashMap::new();
    let mut acc = Accum::new(w, cap);
    for (zp, tl) in &groups {
        let [a, bb, c, d] = *zp;
        let tmin = tl.iter().map(|(e, _)| *e).min().unwrap_or(0) as u32;
        let t_low = if tmin == 0 { 0 } else { tmin * t_ord };
        if t_low > cap {
            continue;
        }
        let room = cap - t_low;
        let p2 = prefix2
            .entry([a, bb])
            .or_insert_with(|| powers[0][a as usize].mul(&powers[1][bb as usize]))
            .clone();
        let p3 = prefix3
            .entry([a, bb, c])
            .or_insert_with(|| p2.mul(&powers[2][c as usize]))
            .clone();
        let p4 = p3.mul_capped(&powers[3][d as usize], room);
        if tl.len() == 1 && tl[0].0 == 0 {
            acc.add_scaled(&p4, tl[0].1);
            continue;
        }
        let mut tacc = Accum::new(w, cap);
        for (e, coef) in tl {
            tacc.add_scaled(&powers[4][*e as usize], coef);
        }
        let tpoly = tacc.finish(profile, out_t);
        acc.add_product(&p4, &tpoly);
    }
    acc.finish(profile, out_t)
}

/// `d^order f / d var^order`. The truncation order of the result drops by
/// `order * weight(var)`, since higher terms of `f` are unknown.
pub fn partial_derivative(f: &TruncatedSeries, var: Var, order: u32) -> Result<TruncatedSeries, AlgebraError> {
    if order == 0 {
        return Err(AlgebraError::DerivativeOrder);
    }
    let slot = var.slot();
    let new_order = f.profile.truncation_order.saturating_sub(order * f.profile.weight_of(var));
    let profile = f.profile.with_order(new_order);
    if slot == 4 && var.tvar() != Some(f.tvar) {
        return Ok(TruncatedSeries::zero(profile, f.tvar));
    }
    let terms = f.terms.iter().filter(|(m, _)| m.0[slot] as u32 >= order).map(|(m, c)| {
        let e = m.0[slot] as i64;
        let falling: i64 = (0..order as i64).map(|j| e - j).product();
        let mut mm = *m;
        mm.0[slot] -= order as u8;
        (mm, c.scale_int(falling))
    });
    Ok(TruncatedSeries::from_terms(profile, f.tvar, terms))
}

/// Swaps `z <-> zb` and `w <-> tau`, conjugating coefficients.
pub fn conjugate_series(f: &TruncatedSeries) -> TruncatedSeries {
    TruncatedSeries::from_terms(
        f.profile,
        f.tvar.conj(),
        f.terms.iter().map(|(m, c)| (m.mirror(), c.conj())),
    )
}

/// Terms with exactly `k` powers of `z` and `l` powers of `zb`.
pub fn type_component(f: &TruncatedSeries, k: u32, l: u32) -> TruncatedSeries {
    f.filter(|m| m.bidegree() == (k, l))
}

/// Terms of weighted degree exactly `nu`.
pub fn weighted_component(f: &TruncatedSeries, nu: u32) -> TruncatedSeries {
    let w = f.profile.weight_w;
    f.filter(|m| m.weighted_degree(w) == nu)
}

/// Multiplicative inverse of a series with non-zero constant term.
pub fn series_inverse(f: &TruncatedSeries) -> Result<TruncatedSeries, AlgebraError> {
    let c0 = f.constant_term();
    let c0_inv = c0.inv().map_err(|_| AlgebraError::ZeroConstantTerm)?;
    let u = f.filter(|m| *m != Monomial::ONE).scale(&c0_inv);
    let one = TruncatedSeries::one(f.profile, f.tvar);
    let mut g = one.clone();
    for _ in 0..f.profile.truncation_order {
        g = one.sub(&u.mul(&g));
    }
    Ok(g.scale(&c0_inv))
}

/// `n`-th root of `f` whose constant term is `anchor`.
pub fn series_root(f: &TruncatedSeries, n: u32, anchor: &Scalar) -> Result<TruncatedSeries, AlgebraError> {
    if n != 2 && n != 3 {
        return Err(AlgebraError::RootDegree(n));
    }
    let c0 = f.constant_term();
    if c0.is_zero() {
        return Err(AlgebraError::ZeroConstantTerm);
    }
    let an = anchor.pow(n);
    let ok = if an.is_exact() && c0.is_exact() { an == c0 } else { an.approx_eq(&c0, 1e-25) };
    if !ok {
        return Err(AlgebraError::BadAnchor);
    }
    let an_inv = an.inv()?;
    let u = f.filter(|m| *m != Monomial::ONE).scale(&an_inv);
    // Binomial coefficients of (1+u)^(1/n).
    let order = f.profile.truncation_order as usize;
    let alpha = Rat::new(1, n as i64);
    let mut coeffs = vec![Rat::ONE];
    for k in 1..=order {
        let prev = coeffs[k - 1].clone();
        let factor = alpha.sub(&Rat::from_int(k as i64 - 1)).div(&Rat::from_int(k as i64));
        coeffs.push(prev.mul(&factor));
    }
    let mut g = TruncatedSeries::constant(f.profile, f.tvar, Scalar::from_rat(coeffs[order].clone()));
    for k in (0..order).rev() {
        g = u.mul(&g).add_constant(&Scalar::from_rat(coeffs[k].clone()));
    }
    Ok(g.scale(anchor))
}

/// True when `f` equals its conjugate (exactly, or to 1e-25 relative on floats).
pub fn is_real_series(f: &TruncatedSeries) -> bool {
    if f.tvar != TVar::S && f.has_t() {
        return false;
    }
    let c = conjugate_series(f).with_tvar(f.tvar);
    f.approx_eq(&c, 1e-25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> WeightProfile {
        WeightProfile::new(2, 8)
    }

    fn v(x: Var) -> TruncatedSeries {
        TruncatedSeries::var(p(), x)
    }

    #[test]
    fn telescoping_product() {
        let one = TruncatedSeries::one(p(), TVar::S);
        let z = v(Var::Z1);
        let prod = one.add(&z).mul(&one.sub(&z));
        assert_eq!(prod, one.sub(&z.mul(&z)));
    }

    #[test]
    fn weighted_degree_of_mixed_product() {
        let m = v(Var::Z1).mul(&v(Var::Zb1)).mul(&v(Var::S));
        assert_eq!(m.order(), Some(4));
    }

    #[test]
    fn truncation_drops_high_terms() {
        let s = v(Var::S);
        assert!(s.pow(5).is_zero());
        assert_eq!(s.pow(4).len(), 1);
    }

    #[test]
    fn w_squared_under_substitution() {
        let prof = p();
        let w = TruncatedSeries::var(prof, Var::W);
        let f = w.mul(&w);
        let bind = v(Var::S).add(&v(Var::Z1).mul(&v(Var::Zb1)).scale(&Scalar::i()));
        let r = substitute(&f, &Bindings::new().bind(Var::W, bind)).unwrap();
        let s = v(Var::S);
        let zz = v(Var::Z1).mul(&v(Var::Zb1));
        let expect = s.mul(&s).add(&s.mul(&zz).scale(&Scalar::gauss(0, 2))).sub(&zz.mul(&zz));
        assert_eq!(r, expect);
    }

    #[test]
    fn derivative_examples() {
        let f = v(Var::Z2).mul(&v(Var::Zb2).pow(2));
        let d = partial_derivative(&f, Var::Zb2, 1).unwrap();
        assert_eq!(d, v(Var::Z2).mul(&v(Var::Zb2)).scale(&Scalar::from_int(2)).truncate(7));
        let w3 = TruncatedSeries::var(p(), Var::W).pow(3);
        let d2 = partial_derivative(&w3, Var::W, 2).unwrap();
        assert_eq!(d2.terms(), TruncatedSeries::var(p(), Var::W).scale(&Scalar::from_int(6)).terms());
        assert_eq!(d2.order_cap(), 4);
    }

    #[test]
    fn inverse_of_one_plus_x() {
        let one = TruncatedSeries::one(p(), TVar::S);
        let x = v(Var::Z1);
        let inv = series_inverse(&one.add(&x)).unwrap();
        for k in 0..=8u8 {
            let c = inv.coeff(&Monomial::new(k, 0, 0, 0, 0));
            assert_eq!(c, Scalar::from_int(if k % 2 == 0 { 1 } else { -1 }));
        }
    }

    #[test]
    fn sqrt_of_perfect_square_with_imaginary_anchor() {
        let u = v(Var::Z1).add(&v(Var::Zb2).mul(&v(Var::S)));
        let base = u.add_constant(&Scalar::gauss(0, 2));
        let sq = base.mul(&base);
        let r = series_root(&sq, 2, &Scalar::gauss(0, 2)).unwrap();
        assert_eq!(r, base);
        assert!(series_root(&sq, 2, &Scalar::from_int(2)).is_err());
    }

    #[test]
    fn conjugation_of_heisenberg_qbar() {
        let prof = p();
        let w = TruncatedSeries::var(prof, Var::W);
        let zz = v(Var::Z1).mul(&v(Var::Zb1));
        let qbar = w.sub(&zz.scale(&Scalar::gauss(0, 2)));
        let q = conjugate_series(&qbar);
        let tau = TruncatedSeries::var(prof, Var::Tau);
        assert_eq!(q, tau.add(&zz.scale(&Scalar::gauss(0, 2))));
    }

    #[test]
    fn reality() {
        let zz = v(Var::Z1).mul(&v(Var::Zb1));
        assert!(is_real_series(&zz));
        assert!(!is_real_series(&zz.scale(&Scalar::i())));
    }

    #[test]
    fn binding_order_checked() {
        let f = v(Var::S).mul(&v(Var::Z1));
        let bad = v(Var::Z1);
        assert!(substitute(&f, &Bindings::new().bind(Var::S, bad)).is_err());
    }
}
