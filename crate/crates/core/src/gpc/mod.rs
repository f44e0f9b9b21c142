//! Orthogonal polynomial chaos: Hermite and Legendre families, Gauss
//! quadrature, moment tensors and orthogonal projection.

mod family;
mod projection;
mod quadrature;
mod tensors;

pub use family::{FamilyKind, PolynomialFamily};
pub use projection::{
    convergence_table, evaluate_expansion, project, project_with_nodes, projection_nodes,
    weighted_l2_error, ConvergenceRow, MultiIndexSet, TensorBasis,
};
pub use quadrature::{quadrature, QuadratureRule};
pub use tensors::{default_nodes, moment_tensors, MomentTensors};
