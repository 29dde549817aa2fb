//! Frame averages `I_p(A)` and `I_{p,q}(B)` under the random phase measure.

use models::NormalFormBundle;
use symplectic_core::{cr, ComplexMatrix, Result, RppError, SymmetryClass};

/// Elliptic/hyperbolic split of the channels of a normal form, hyperbolic
/// channels first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSplit {
    pub class: SymmetryClass,
    /// Per channel: elliptic or not.
    pub elliptic: Vec<bool>,
}

impl ChannelSplit {
    pub fn new(class: SymmetryClass, elliptic: Vec<bool>) -> Result<Self> {
        let l_h = elliptic.iter().take_while(|e| !**e).count();
        if elliptic[l_h..].iter().any(|e| !e) {
            return Err(RppError::InvalidArgument("hyperbolic channels must precede elliptic ones".into()));
        }
        if l_h == elliptic.len() {
            return Err(RppError::InvalidArgument("no elliptic channel".into()));
        }
        Ok(ChannelSplit { class, elliptic })
    }

    /// `L_h` hyperbolic channels followed by `L_e` elliptic ones.
    pub fn with_counts(class: SymmetryClass, l_h: usize, l_e: usize) -> Result<Self> {
        let mut e = vec![false; l_h];
        e.extend(std::iter::repeat_n(true, l_e));
        ChannelSplit::new(class, e)
    }

    pub fn from_bundle(bundle: &NormalFormBundle) -> Result<Self> {
        ChannelSplit::new(bundle.class, bundle.channels.channels.iter().map(|c| c.is_elliptic()).collect())
    }

    pub fn l(&self) -> usize {
        self.elliptic.len()
    }

    pub fn l_e(&self) -> usize {
        self.elliptic.iter().filter(|e| **e).count()
    }

    pub fn l_h(&self) -> usize {
        self.l() - self.l_e()
    }

    pub fn is_elliptic(&self, p: usize) -> bool {
        p >= 1 && p <= self.l() && self.elliptic[p - 1]
    }

    fn require_elliptic(&self, p: usize) -> Result<()> {
        if self.is_elliptic(p) {
            Ok(())
        } else {
            Err(RppError::InvalidArgument(format!("channel {p} is not elliptic (L_h = {})", self.l_h())))
        }
    }

    /// `Π_e` (or `Π_h`) on the `2n`-dimensional phase space.
    pub fn projection(&self, elliptic: bool) -> ComplexMatrix {
        let b = self.class.block();
        let n = b * self.l();
        let mut p = ComplexMatrix::zeros(2 * n, 2 * n);
        for (c, &e) in self.elliptic.iter().enumerate() {
            if e == elliptic {
                for i in b * c..b * (c + 1) {
                    p[(i, i)] = cr(1.0);
                    p[(n + i, n + i)] = cr(1.0);
                }
            }
        }
        p
    }

    /// Trace with the class normalization `τ`.
    pub fn trace(&self, m: &ComplexMatrix) -> f64 {
        self.class.tau() * m.trace().re
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        let n = 2 * self.class.block() * self.l();
        if m.shape() != (n, n) {
            return Err(RppError::dims("phase-space operator", format!("{n}x{n}"), format!("{}x{}", m.nrows(), m.ncols())));
        }
        Ok(())
    }
}

/// `I_p(A) = Tr[A_e]/(2L_e)` for elliptic `p`.
pub fn moment_integral_ip(a: &ComplexMatrix, p: usize, split: &ChannelSplit) -> Result<f64> {
    split.check(a)?;
    split.require_elliptic(p)?;
    let pe = split.projection(true);
    Ok(split.trace(&(&pe * a * &pe)) / (2.0 * split.l_e() as f64))
}

/// Class coefficient `c` in `I_{p,q}(B) = c·Tr[B_e²]`.
pub fn ipq_coefficient(class: SymmetryClass, l_e: usize, same: bool) -> f64 {
    let le = l_e as f64;
    let d = if same { 1.0 } else { 0.0 };
    match class {
        SymmetryClass::Complex => 1.0 / (4.0 * le * le),
        SymmetryClass::Real => (1.0 + d) / (4.0 * le * (le + 1.0)),
        SymmetryClass::Quaternion => (2.0 - d) / (4.0 * le * (2.0 * le - 1.0)),
    }
}

/// `I_{p,q}(B)` for elliptic `p, q`.
pub fn moment_integral_ipq(b: &ComplexMatrix, p: usize, q: usize, split: &ChannelSplit) -> Result<f64> {
    split.check(b)?;
    split.require_elliptic(p)?;
    split.require_elliptic(q)?;
    let pe = split.projection(true);
    let be = &pe * b * &pe;
    Ok(ipq_coefficient(split.class, split.l_e(), p == q) * split.trace(&(&be * &be)))
}

/// `Σ_{q' ≤ L_h} I_{p,q'}(B) = Tr[Π_e B Π_h B Π_e]/(4L_e)`.
pub fn hyperbolic_moment_sum(b: &ComplexMatrix, p: usize, split: &ChannelSplit) -> Result<f64> {
    split.check(b)?;
    split.require_elliptic(p)?;
    let pe = split.projection(true);
    let ph = split.projection(false);
    Ok(split.trace(&(&pe * b * &ph * b * &pe)) / (4.0 * split.l_e() as f64))
}
