//! Exact classification and normal forms for real hypersurface germs in C^3
//! at 2-nondegenerate points.

pub mod algebra;
pub mod classify;
pub mod corpus;
pub mod germ;
pub mod linsolve;
pub mod nondeg;
pub mod normalform;
