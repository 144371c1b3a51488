//! Command implementations. Each returns a JSON result plus the names of the
//! checks that ran on the way.

use std::fmt;

use crnorm_core::algebra::{weighted_component, Scalar, TruncatedSeries};
use crnorm_core::classify::{classify_with_seed, Classification, ClassifyError};
use crnorm_core::corpus::CorpusKey;
use crnorm_core::germ::{complexify, is_regular, verify_reality_identity, HoloTransform, RealDefiningSeries};
use crnorm_core::nondeg::{everywhere_degenerate_check, k_nondegeneracy, levi_form, NondegError};
use crnorm_core::normalform::{
    equivalence_certificate, fourth_order_invariants, normalize_germ, normalize_model_form, to_model_form,
    Certificate, NormalFormError, NormalizationP, TransformT,
};
use serde_json::{json, Map, Value};

use crate::input::{model_keys, InputError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    Parse,
    Precondition,
    Internal,
    OpenQuestion,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Parse => 2,
            Failure::Precondition => 3,
            Failure::Internal => 4,
            Failure::OpenQuestion => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Failure::Parse => "parse",
            Failure::Precondition => "precondition",
            Failure::Internal => "internal",
            Failure::OpenQuestion => "open-question",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CmdError {
    pub kind: Failure,
    pub message: String,
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.message)
    }
}

impl CmdError {
    pub fn new(kind: Failure, message: impl Into<String>) -> CmdError {
        CmdError { kind, message: message.into() }
    }
}

impl From<InputError> for CmdError {
    fn from(e: InputError) -> Self {
        CmdError::new(Failure::Parse, e.to_string())
    }
}

impl From<ClassifyError> for CmdError {
    fn from(e: ClassifyError) -> Self {
        let kind = match &e {
            ClassifyError::Precondition(_) => Failure::Precondition,
            ClassifyError::OpenQuestion(_) => Failure::OpenQuestion,
            ClassifyError::Nondeg(n) => return n.clone().into(),
            ClassifyError::Internal(_) | ClassifyError::Germ(_) => Failure::Internal,
        };
        CmdError::new(kind, e.to_string())
    }
}

impl From<NondegError> for CmdError {
    fn from(e: NondegError) -> Self {
        let kind = match e {
            NondegError::Truncation { .. } | NondegError::DeterminantTruncation { .. } | NondegError::LeviNondegenerate => {
                Failure::Precondition
            }
            _ => Failure::Internal,
        };
        CmdError::new(kind, e.to_string())
    }
}

impl From<NormalFormError> for CmdError {
    fn from(e: NormalFormError) -> Self {
        match e {
            NormalFormError::Precondition(_) => CmdError::new(Failure::Precondition, e.to_string()),
            NormalFormError::Classify(c) => c.into(),
            _ => CmdError::new(Failure::Internal, e.to_string()),
        }
    }
}

impl From<crnorm_core::germ::GermError> for CmdError {
    fn from(e: crnorm_core::germ::GermError) -> Self {
        CmdError::new(Failure::Internal, e.to_string())
    }
}

pub struct Outcome {
    pub result: Value,
    pub checks: Vec<&'static str>,
}

fn scalar(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

fn series(f: &TruncatedSeries) -> Value {
    Value::String(f.to_string())
}

fn up_to(f: &TruncatedSeries, nu: u32) -> TruncatedSeries {
    (0..=nu).fold(TruncatedSeries::zero(f.profile(), f.tvar()), |acc, k| acc.add(&weighted_component(f, k)))
}

fn holo(t: &HoloTransform) -> Value {
    json!({ "f1": series(&t.f1), "f2": series(&t.f2), "g": series(&t.g) })
}

fn transform(t: &TransformT) -> Value {
    json!({ "f1": series(&t.f1), "f2": series(&t.f2), "g": series(&t.g) })
}

/// Checks that every germ passes before a command runs.
fn input_checks(germ: &RealDefiningSeries) -> Result<Vec<&'static str>, CmdError> {
    if !is_regular(&germ.phi) {
        return Err(CmdError::new(Failure::Internal, "input germ is not in regular form"));
    }
    if !verify_reality_identity(&complexify(germ)?) {
        return Err(CmdError::new(Failure::Internal, "reality identity fails for the input germ"));
    }
    Ok(vec!["real_input", "regular_form", "reality_identity"])
}

pub fn classify(germ: &RealDefiningSeries, seed: u64) -> Result<Outcome, CmdError> {
    let mut checks = input_checks(germ)?;
    let c = classify_with_seed(germ, seed)?;
    let r = match &c {
        Classification::Classified(r) => r,
        Classification::NotApplicable { reason, .. } => {
            return Err(CmdError::new(Failure::Precondition, format!("not 2-nondegenerate: {reason}")));
        }
    };
    let phi = &r.model_germ.phi;
    let model = r.invariants.model_phi(phi.order_cap()).reweight(phi.profile().weight_w, phi.order_cap());
    if !up_to(phi, 3).approx_eq(&up_to(&model, 3), 1e-20) {
        return Err(CmdError::new(Failure::Internal, "witness does not reach the model through degree 3"));
    }
    checks.push("model_through_degree_3");
    let invariants: Map<String, Value> = r.invariants.params().iter().map(|(k, v)| (k.to_string(), scalar(v))).collect();
    let sig = r.nondeg.levi.eigen_signature;
    let result = json!({
        "type": r.invariants.tag().label(),
        "invariants": invariants,
        "levi_signature": [sig.0, sig.1, sig.2],
        "k": r.nondeg.k,
        "witness": holo(&r.witness.truncate(3)),
    });
    Ok(Outcome { result, checks })
}

fn normalization_entries(p: &NormalizationP) -> Value {
    let mut m = Map::new();
    for (k, v) in p.leading_entries().into_iter().chain(p.q.entries()) {
        m.insert(k, scalar(&v));
    }
    Value::Object(m)
}

pub fn normalize(
    germ: &RealDefiningSeries,
    order: u32,
    seed: u64,
    entries: Option<&[(String, Scalar)]>,
) -> Result<Outcome, CmdError> {
    let mut checks = input_checks(germ)?;
    let mf = to_model_form(germ, order, seed)?;
    let p = match entries {
        Some(e) => Some(NormalizationP::from_entries(mf.model, e)?),
        None => None,
    };
    let nf = normalize_model_form(mf, p.as_ref(), order)?;
    checks.extend(["unique_degree_systems", "normal_space_membership", "recomposition", "model_terms_kept"]);
    let r = &nf.result;
    let result = json!({
        "model": r.model.to_string(),
        "order": r.order,
        "normal_form": series(&r.normal),
        "transform": transform(&r.t),
        "normalization": normalization_entries(&r.p),
        "witness_applied": nf.witness.is_some(),
    });
    Ok(Outcome { result, checks })
}

pub fn invariants(germ: &RealDefiningSeries, order: u32) -> Result<Outcome, CmdError> {
    let mut checks = input_checks(germ)?;
    let nf = normalize_germ(germ, None, order)?;
    let inv = fourth_order_invariants(&nf.result)?;
    if inv.delta22 * inv.eps22 as i8 != 0 {
        return Err(CmdError::new(Failure::Internal, "delta22 and eps22 both non-zero"));
    }
    checks.push("delta22_eps22_exclusive");
    let result = json!({
        "model": nf.result.model.to_string(),
        "a22": scalar(&inv.a22),
        "b22": scalar(&inv.b22),
        "c22": scalar(&inv.c22),
        "delta22": inv.delta22,
        "eps22": inv.eps22,
    });
    Ok(Outcome { result, checks })
}

pub fn nondeg(germ: &RealDefiningSeries) -> Result<Outcome, CmdError> {
    let mut checks = input_checks(germ)?;
    let cd = complexify(germ)?;
    let levi = levi_form(&cd);
    let hermitian = (0..2).all(|j| (0..2).all(|k| levi.matrix[j][k] == levi.matrix[k][j].conj()));
    if !hermitian {
        return Err(CmdError::new(Failure::Internal, "Levi matrix is not Hermitian"));
    }
    checks.push("levi_hermitian");
    let k_max = (germ.profile().truncation_order - 1).min(4);
    let rep = k_nondegeneracy(&cd, k_max)?;
    let degeneracy = if levi.rank() < 2 {
        let d = everywhere_degenerate_check(&cd)?;
        json!({
            "cubic_condition": d.cubic_condition,
            "quartic_condition": d.quartic_condition,
            "determinant_vanishes": d.determinant_vanishes,
            "certified_not_everywhere_degenerate": d.certified_not_everywhere_degenerate,
        })
    } else {
        Value::Null
    };
    let sig = levi.eigen_signature;
    let matrix: Vec<Vec<Value>> = levi.matrix.iter().map(|row| row.iter().map(scalar).collect()).collect();
    let result = json!({
        "levi_signature": [sig.0, sig.1, sig.2],
        "levi_matrix": matrix,
        "k": rep.k,
        "k_max": k_max,
        "degeneracy": degeneracy,
    });
    Ok(Outcome { result, checks })
}

pub fn equiv(g1: &RealDefiningSeries, g2: &RealDefiningSeries, order: u32) -> Result<Outcome, CmdError> {
    let mut checks = input_checks(g1)?;
    input_checks(g2)?;
    let cert = equivalence_certificate(g1, g2, order)?;
    let result = match &cert {
        Certificate::NonEquivalent(why) => json!({ "certificate": "non-equivalent", "reason": why, "normal_form": null }),
        Certificate::Inconclusive(why) => json!({ "certificate": "inconclusive", "reason": why, "normal_form": null }),
        Certificate::SameNormalForm(pair) => {
            checks.push("normal_forms_equal");
            json!({ "certificate": "same-normal-form", "reason": null, "normal_form": series(&pair.0.result.normal) })
        }
    };
    Ok(Outcome { result, checks })
}

pub fn corpus_list() -> Outcome {
    let mut keys: Vec<String> = CorpusKey::standard().into_iter().map(|(k, _)| k).collect();
    keys.extend(model_keys());
    Outcome { result: json!({ "keys": keys }), checks: Vec::new() }
}
