//! Wigner surmises `P_β(s) = a_β s^β e^{−b_β s²}` for the circular
//! ensembles.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, gamma_lr};
use symplectic_core::{Result, RppError};

/// The surmise of Dyson index `β ∈ {1, 2, 4}` (COE, CUE, CSE).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurmiseCurve {
    pub beta: u32,
    a: f64,
    b: f64,
}

pub fn surmise(beta: u32) -> Result<SurmiseCurve> {
    let (a, b) = match beta {
        1 => (PI / 2.0, PI / 4.0),
        2 => (32.0 / (PI * PI), 4.0 / PI),
        4 => (2f64.powi(18) / (3f64.powi(6) * PI.powi(3)), 64.0 / (9.0 * PI)),
        _ => return Err(RppError::InvalidArgument(format!("Dyson index must be 1, 2 or 4, got {beta}"))),
    };
    Ok(SurmiseCurve { beta, a, b })
}

impl SurmiseCurve {
    pub fn pdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.a * s.powi(self.beta as i32) * (-self.b * s * s).exp()
    }

    /// `∫₀ˢ P_β = P((β+1)/2, b s²)` (regularized lower incomplete gamma).
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        gamma_lr(0.5 * (self.beta as f64 + 1.0), self.b * s * s)
    }

    /// `k`-th moment in closed form.
    pub fn moment(&self, k: u32) -> f64 {
        let x = 0.5 * (self.beta + k + 1) as f64;
        0.5 * self.a * gamma(x) / self.b.powf(x)
    }

    pub fn name(&self) -> &'static str {
        match self.beta {
            1 => "COE",
            2 => "CUE",
            _ => "CSE",
        }
    }
}
