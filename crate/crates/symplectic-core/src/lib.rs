//! Algebraic substrate: the forms `J`, `G`, the Cayley transform `C`, the
//! quaternion structure `I`, membership predicates for the hermitian
//! symplectic groups HS(2L, K) and Haar sampling.

pub mod class;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod random;

pub use class::SymmetryClass;
pub use error::{Result, RppError};
pub use forms::{
    cayley, cayley_conjugate, class_residual, form_residual, g_form, i_form, is_hermitian_symplectic,
    is_hermitian_symplectic_with, is_lorentz, is_quaternion_matrix, j_form, kron, quaternion_project,
    quaternion_residual, quaternion_units, reality_residual, CayleyDirection, ComplexMatrix,
    StructuredConstants,
};
pub use linalg::{c, cr, exp_lie, expm, hs_inverse, max_abs, max_abs_diff, ExpPath, Scalar, C64, I_UNIT, ONE, ZERO};
pub use random::{sample_haar_orthogonal, sample_haar_unitary};

/// Default tolerance of the membership predicates.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
