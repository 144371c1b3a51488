//! Turning an input argument into a regular germ.

use crnorm_core::algebra::{is_real_series, Monomial, Scalar, TVar, TruncatedSeries, WeightProfile};
use crnorm_core::classify::{ModelInvariants, TypeTag};
use crnorm_core::corpus::{freeman_point, CorpusError, CorpusKey};
use crnorm_core::germ::{complexify, germ_at_point, is_regular, make_regular, GermError, GlobalPoly, RealDefiningSeries};
use crnorm_core::nondeg::levi_form;

use crate::expr::{self, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Two,
    Three,
    Auto,
}

impl std::str::FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Weight, String> {
        match s {
            "2" => Ok(Weight::Two),
            "3" => Ok(Weight::Three),
            "auto" => Ok(Weight::Auto),
            _ => Err(format!("expected 2, 3 or auto, got '{s}'")),
        }
    }
}

/// Errors while reading an input; all map to the parse exit code.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("syntax error {0}")]
    Syntax(#[from] expr::ParseError),
    #[error("unknown corpus key '{0}'")]
    UnknownKey(String),
    #[error("{0}")]
    Invalid(String),
    #[error("expression is not real")]
    NotReal,
    #[error("point is not on the surface")]
    OffSurface,
    #[error(transparent)]
    Germ(GermError),
}

impl From<GermError> for InputError {
    fn from(e: GermError) -> Self {
        match e {
            GermError::NotReal => InputError::NotReal,
            GermError::NotOnSurface => InputError::OffSurface,
            e => InputError::Germ(e),
        }
    }
}

impl From<CorpusError> for InputError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::OffSurface => InputError::OffSurface,
            e => InputError::Invalid(e.to_string()),
        }
    }
}

/// Where a germ came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Corpus(CorpusKey),
    /// `Im w = phi(z, zb, s)`.
    Local(Poly),
    /// `rho(Z, Zb) = 0` near a point; `w`, `wb` stand for `Z3`, `Zb3`.
    Global(Poly),
}

#[derive(Clone, Debug)]
pub struct InputSpec {
    pub source: Source,
    pub point: Option<[Scalar; 3]>,
    pub weight: Weight,
    pub order: u32,
}

/// Model keys listed by `corpus-list`.
pub fn model_keys() -> Vec<String> {
    vec![
        "model:Ai1:gamma=0".into(),
        "model:Ai1:gamma=1".into(),
        "model:Ai2".into(),
        "model:Ai3".into(),
        "model:Aii1:r=2".into(),
        "model:Aii2".into(),
        "model:Aii3:lambda=(1+i)".into(),
        "model:Aii4:mu=(2*i),nu=i".into(),
        "model:Aii5:eta=(1-i)".into(),
    ]
}

fn parse_point(text: &str) -> Result<Vec<Scalar>, InputError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| InputError::Invalid(format!("point '{text}' must look like (a,b,c)")))?;
    inner.split(',').map(|c| Ok(expr::parse_scalar(c)?)).collect()
}

pub fn parse_point3(text: &str) -> Result<[Scalar; 3], InputError> {
    let v = parse_point(text)?;
    <[Scalar; 3]>::try_from(v).map_err(|_| InputError::Invalid(format!("point '{text}' needs three coordinates")))
}

fn parse_model(rest: &str) -> Result<ModelInvariants, InputError> {
    let (tag_text, params) = rest.split_once(':').unwrap_or((rest, ""));
    let tag = TypeTag::parse(tag_text).ok_or_else(|| InputError::UnknownKey(format!("model:{rest}")))?;
    let names: Vec<&str> = match tag {
        TypeTag::Ai1 => vec!["gamma"],
        TypeTag::Aii1 => vec!["r"],
        TypeTag::Aii3 => vec!["lambda"],
        TypeTag::Aii4 => vec!["mu", "nu"],
        TypeTag::Aii5 => vec!["eta"],
        _ => vec![],
    };
    let mut values: Vec<Option<Scalar>> = vec![None; names.len()];
    for (k, item) in params.split(',').filter(|p| !p.trim().is_empty()).enumerate() {
        let (slot, value) = match item.split_once('=') {
            Some((name, v)) => {
                let slot = names
                    .iter()
                    .position(|n| *n == name.trim())
                    .ok_or_else(|| InputError::Invalid(format!("{tag} has no parameter '{}'", name.trim())))?;
                (slot, v)
            }
            None => (k, item),
        };
        if slot >= names.len() {
            return Err(InputError::Invalid(format!("{tag} takes {} parameter(s)", names.len())));
        }
        values[slot] = Some(expr::parse_scalar(value)?);
    }
    let values: Vec<Scalar> = values
        .into_iter()
        .zip(&names)
        .map(|(v, n)| v.ok_or_else(|| InputError::Invalid(format!("{tag} needs '{n}'"))))
        .collect::<Result<_, _>>()?;
    ModelInvariants::from_params(tag, &values).map_err(|e| InputError::Invalid(e.to_string()))
}

fn parse_corpus(text: &str) -> Result<Option<CorpusKey>, InputError> {
    let key = match text {
        "heisenberg" => CorpusKey::Heisenberg,
        "lightcone" => CorpusKey::Lightcone,
        "m1" | "m2" | "m3" | "m4" => CorpusKey::M(text[1..].parse().expect("digit")),
        _ => {
            if let Some(rest) = text.strip_prefix("model:") {
                CorpusKey::Model(parse_model(rest)?)
            } else if let Some(rest) = text.strip_prefix("freeman:") {
                let v = parse_point(rest)?;
                match v.as_slice() {
                    [a, b, c] => CorpusKey::Freeman([a.clone(), b.clone(), c.clone()]),
                    [x1, x2] => CorpusKey::Freeman(freeman_point(x1, x2)),
                    _ => return Err(InputError::Invalid("freeman point needs 2 or 3 coordinates".into())),
                }
            } else {
                return Ok(None);
            }
        }
    };
    Ok(Some(key))
}

/// The series of an expression in `z1 z2 zb1 zb2` and the variable named by
/// `tvar` (`s`, `w` or `wb`); `None` if any other variable occurs. Terms above
/// the truncation order are dropped.
pub fn series_from_poly(poly: &Poly, profile: WeightProfile, tvar: TVar) -> Option<TruncatedSeries> {
    let t = match tvar {
        TVar::S => 4,
        TVar::W => 5,
        TVar::Tau => 6,
    };
    if poly.used().iter().any(|&k| k > 3 && k != t) {
        return None;
    }
    let terms = poly.terms.iter().map(|(e, c)| (Monomial::new(e[0], e[1], e[2], e[3], e[t]), c.clone()));
    Some(TruncatedSeries::from_terms(profile, tvar, terms.collect::<Vec<_>>()))
}

impl InputSpec {
    pub fn parse(text: &str, point: Option<[Scalar; 3]>, weight: Weight, order: u32) -> Result<InputSpec, InputError> {
        let text = text.trim();
        if order < 4 {
            return Err(InputError::Invalid("order must be at least 4".into()));
        }
        let source = match parse_corpus(text)? {
            Some(k) => Source::Corpus(k),
            None => {
                if text.chars().all(|c| c.is_ascii_alphanumeric() || c == ':') && !text.is_empty() && text.contains(':') {
                    return Err(InputError::UnknownKey(text.into()));
                }
                let poly = expr::parse(text)?;
                let used = poly.used();
                let local = used.iter().all(|&k| k <= 4);
                let global = used.iter().all(|&k| k != 4);
                if local {
                    Source::Local(poly)
                } else if global {
                    Source::Global(poly)
                } else {
                    return Err(InputError::Invalid("s cannot be mixed with w, wb or Z variables".into()));
                }
            }
        };
        if point.is_some() && !matches!(source, Source::Global(_)) {
            return Err(InputError::Invalid("--point applies to expressions in Z or w only".into()));
        }
        Ok(InputSpec { source, point, weight, order })
    }

    /// Builds the germ at `w`-weight 2 and re-grades it when weight 3 is asked
    /// for, or under `auto` when the Levi form vanishes.
    pub fn germ(&self) -> Result<RealDefiningSeries, InputError> {
        let base = self.germ_at_weight_two()?;
        let three = match self.weight {
            Weight::Two => false,
            Weight::Three => true,
            Weight::Auto => levi_form(&complexify(&base)?).rank() == 0,
        };
        if three {
            Ok(RealDefiningSeries::new(base.phi.reweight(3, self.order))?)
        } else {
            Ok(base)
        }
    }

    fn germ_at_weight_two(&self) -> Result<RealDefiningSeries, InputError> {
        let p = WeightProfile::new(2, self.order);
        match &self.source {
            Source::Corpus(CorpusKey::Model(m)) => Ok(RealDefiningSeries::new(m.model_phi(self.order).reweight(2, self.order))?),
            Source::Corpus(k) => Ok(k.build(self.order)?),
            Source::Local(poly) => {
                let phi = series_from_poly(poly, p, TVar::S).expect("local expressions use z, zb and s only");
                if !is_real_series(&phi) {
                    return Err(InputError::NotReal);
                }
                if !phi.coeff(&Monomial::ONE).is_zero() {
                    return Err(InputError::OffSurface);
                }
                if is_regular(&phi) {
                    Ok(RealDefiningSeries::new(phi)?)
                } else {
                    Ok(make_regular(&phi)?.0)
                }
            }
            Source::Global(poly) => {
                let mut rho = GlobalPoly::default();
                for (e, c) in &poly.terms {
                    // Z1 Z2 Z3 Zb1 Zb2 Zb3, with w and wb folded into Z3 and Zb3.
                    let g = [e[0] + e[7], e[1] + e[8], e[5] + e[9], e[2] + e[10], e[3] + e[11], e[6] + e[12]];
                    rho.add_term(g, c.clone());
                }
                let origin = [Scalar::zero(), Scalar::zero(), Scalar::zero()];
                Ok(germ_at_point(&rho, self.point.as_ref().unwrap_or(&origin), p)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(t: &str) -> Result<InputSpec, InputError> {
        InputSpec::parse(t, None, Weight::Auto, 6)
    }

    #[test]
    fn corpus_keys() {
        assert!(matches!(spec("m3").unwrap().source, Source::Corpus(CorpusKey::M(3))));
        let Source::Corpus(CorpusKey::Model(m)) = spec("model:Aii1:r=2").unwrap().source else { panic!() };
        assert_eq!(m, ModelInvariants::Aii1 { r: Scalar::from_int(2) });
        let Source::Corpus(CorpusKey::Model(m)) = spec("model:Aii4:nu=i,mu=(2*i)").unwrap().source else { panic!() };
        assert_eq!(m, ModelInvariants::Aii4 { mu: Scalar::gauss(0, 2), nu: Scalar::i() });
        assert!(matches!(spec("model:Aii9"), Err(InputError::UnknownKey(_))));
        assert!(matches!(spec("bogus:key"), Err(InputError::UnknownKey(_))));
        assert!(matches!(spec("model:Aii1:r=-1"), Err(InputError::Invalid(_))));
    }

    #[test]
    fn expressions() {
        let g = spec("z1*zb1 + z1^2*zb2 + zb1^2*z2").unwrap().germ().unwrap();
        assert_eq!(g.phi, ModelInvariants::Ai2.model_phi(6));
        assert!(matches!(spec("i*z1*zb1").unwrap().germ(), Err(InputError::NotReal)));
        assert!(matches!(spec("z1*zb1 + s*w"), Err(InputError::Invalid(_))));
    }

    #[test]
    fn weight_three_for_vanishing_levi_form() {
        let g = spec("model:Aii2").unwrap().germ().unwrap();
        assert_eq!(g.profile().weight_w, 3);
        let g = InputSpec::parse("model:Aii2", None, Weight::Two, 6).unwrap().germ().unwrap();
        assert_eq!(g.profile().weight_w, 2);
    }

    #[test]
    fn global_expression_at_a_point() {
        // rho = 2 Im Z3 - 2|Z1|^2. The frame scales w so that rho = Im w + O(2),
        // which leaves Im w = 2|z1|^2.
        let s = InputSpec::parse("i*(wb - w) - 2*z1*zb1", None, Weight::Auto, 6).unwrap();
        let g = s.germ().unwrap();
        assert_eq!(g.phi.coeff(&Monomial::new(1, 0, 1, 0, 0)), Scalar::from_int(2));
    }

    fn round_trip(f: &TruncatedSeries) {
        let text = f.to_string();
        let back = series_from_poly(&expr::parse(&text).unwrap(), f.profile(), f.tvar()).unwrap();
        assert_eq!(&back, f, "{text}");
        assert_eq!(back.to_string(), text);
    }

    #[test]
    fn corpus_series_round_trip() {
        for (_, key) in CorpusKey::standard() {
            if let Ok(g) = key.build(8) {
                if g.phi.is_exact() {
                    round_trip(&g.phi);
                    round_trip(&complexify(&g).unwrap().qbar);
                }
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn serialize_parse_serialize(
            raw in proptest::collection::vec(((0u8..3, 0u8..3, 0u8..3, 0u8..3, 0u8..3), (-9i64..9, 1i64..5, -9i64..9, 1i64..5)), 0..12),
            use_w in proptest::bool::ANY,
        ) {
            let tvar = if use_w { TVar::W } else { TVar::S };
            let terms: Vec<_> = raw
                .into_iter()
                .map(|((a, b, c, d, t), (p, q, r, u))| (Monomial::new(a, b, c, d, t), Scalar::frac(p, q, r, u)))
                .collect();
            round_trip(&TruncatedSeries::from_terms(WeightProfile::new(2, 6), tvar, terms));
        }
    }
}
