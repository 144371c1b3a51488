//! Exact scalars and truncated multivariate power series.

pub mod bigfloat;
pub mod rat;
pub mod scalar;
pub mod series;
pub mod text;

pub use bigfloat::{BigFloat, DEFAULT_PREC};
pub use rat::Rat;
pub use scalar::Scalar;
pub use series::{
    conjugate_series, is_real_series, partial_derivative, series_inverse, series_mul, series_root,
    substitute, type_component, weighted_component, Bindings, Monomial, TVar, TruncatedSeries,
    Var, VariableKind, WeightProfile,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("weight profiles differ: w-weight {0} vs {1}")]
    ProfileMismatch(u32, u32),
    #[error("series use different third variables")]
    VariableMismatch,
    #[error("binding for {var} has weighted order {order}, below the variable weight {weight}")]
    BindingOrder { var: &'static str, order: u32, weight: u32 },
    #[error("constant term is zero")]
    ZeroConstantTerm,
    #[error("anchor is not a root of the constant term")]
    BadAnchor,
    #[error("unsupported root degree {0}")]
    RootDegree(u32),
    #[error("derivative order must be positive")]
    DerivativeOrder,
}
