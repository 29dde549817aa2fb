use std::fmt;
use std::str::FromStr;

use crate::error::RppError;

/// Universality class: real (orthogonal), complex (unitary) or
/// quaternion (symplectic) entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Real,
    Complex,
    Quaternion,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 3] = [
        SymmetryClass::Real,
        SymmetryClass::Complex,
        SymmetryClass::Quaternion,
    ];

    /// Number of complex rows of one half of a frame for `l` channels.
    pub fn ambient_size(self, l: usize) -> usize {
        match self {
            SymmetryClass::Quaternion => 2 * l,
            _ => l,
        }
    }

    /// Normalization of the additive cocycle (half trace for quaternions).
    pub fn tau(self) -> f64 {
        match self {
            SymmetryClass::Quaternion => 0.5,
            _ => 1.0,
        }
    }

    /// Width of one channel in complex columns.
    pub fn block(self) -> usize {
        match self {
            SymmetryClass::Quaternion => 2,
            _ => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            SymmetryClass::Real => 'R',
            SymmetryClass::Complex => 'C',
            SymmetryClass::Quaternion => 'H',
        }
    }

    pub(crate) fn delta(self, other: SymmetryClass) -> f64 {
        if self == other {
            1.0
        } else {
            0.0
        }
    }

    /// Kronecker deltas (δ_R, δ_C, δ_H).
    pub fn deltas(self) -> (f64, f64, f64) {
        (
            self.delta(SymmetryClass::Real),
            self.delta(SymmetryClass::Complex),
            self.delta(SymmetryClass::Quaternion),
        )
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for SymmetryClass {
    type Err = RppError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r" | "real" | "orthogonal" => Ok(SymmetryClass::Real),
            "c" | "complex" | "unitary" => Ok(SymmetryClass::Complex),
            "h" | "quaternion" | "symplectic" => Ok(SymmetryClass::Quaternion),
            other => Err(RppError::InvalidArgument(format!(
                "unknown symmetry class '{other}' (expected R, C or H)"
            ))),
        }
    }
}
