//! Kolmogorov–Smirnov distances of raw samples to closed-form laws.

/// `sup_x |F_n(x) − F(x)|`; sorts a copy of the samples.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    ks_sorted(&xs, cdf)
}

/// [`ks_statistic`] for samples already in ascending order.
pub fn ks_sorted(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Uniform law on `(−π, π]`.
pub fn uniform_phase_cdf(theta: f64) -> f64 {
    ((theta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)).clamp(0.0, 1.0)
}

/// Modulus of one entry of a Haar unitary of size `n`: `1 − (1 − r²)^{n−1}`.
pub fn entry_modulus_cdf(n: usize) -> impl Fn(f64) -> f64 {
    move |r: f64| {
        let r = r.clamp(0.0, 1.0);
        1.0 - (1.0 - r * r).powi(n as i32 - 1)
    }
}

/// Density `2(n−1) r (1 − r²)^{n−2}` matching [`entry_modulus_cdf`].
pub fn entry_modulus_pdf(n: usize, r: f64) -> f64 {
    if !(0.0..=1.0).contains(&r) {
        return 0.0;
    }
    2.0 * (n as f64 - 1.0) * r * (1.0 - r * r).powi(n as i32 - 2)
}
