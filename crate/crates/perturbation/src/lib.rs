//! Weak-disorder perturbation theory: the second-order cocycle expansion,
//! frame moment integrals, the general equidistant Lyapunov formula and its
//! closed forms, and Monte Carlo checks of the Haar moments.

pub mod expansion;
pub mod formulas;
pub mod haar;
pub mod moments;

pub use expansion::{cocycle_expansion, exact_cocycle, expansion_coefficients, ExpansionTerms};
pub use formulas::{
    class_ratios, closed_form_gamma, closed_form_spectrum, elliptic_wavenumbers, equidistant_spacing, term_assembly,
    theorem1_gamma, ClosedForm, ClosedFormKind, GammaFormulaInputs, Wavenumber, DEFAULT_BAND_EDGE_TOL,
};
pub use haar::{haar_moment_check, trace_identity_check, MomentCheck, MomentReport};
pub use moments::{hyperbolic_moment_sum, ipq_coefficient, moment_integral_ip, moment_integral_ipq, ChannelSplit};
