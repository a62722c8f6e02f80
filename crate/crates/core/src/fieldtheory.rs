//! Mass quench m₀ → m₁ of a free bosonic field in d spatial dimensions.
//!
//! Every momentum mode k is an oscillator quench ω₀ₖ → ω₁ₖ with
//! ω_jk = √(k² + m_j²). Volume-extensive quantities are returned as densities
//! (per unit Lᵈ) integrated over |k| ≤ Λ with the measure Ω_d/(2π)ᵈ ∫ kᵈ⁻¹ dk;
//! the only place a volume enters is [`GaussianWorkLaw`].
//!
//! The per-mode log-CF is evaluated as
//! ln G_k = i(ω₀−ω₁)t/2 − ½ ln(1 + i (ω₀−ω₁)²/(2ω₀) · sin(ω₁t)/ω₁ · e^{−iω₁t}),
//! which is algebraically ½ ln(1−η²) − ½ ln(1−η²e^{−2iω₁t}) plus the phase,
//! but has no cancellation at large k and a finite limit at ω₁ → 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ModePair;
use crate::error::{Error, Result};
use crate::krylov::ChainCoefficients;
use crate::lanczos::LanczosCoefficients;
use crate::quadrature::{integrate, integrate_on};
pub use crate::quadrature::QuadratureOptions;
use crate::scalar::Complex;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldQuench {
    pub dim: usize,
    pub m0: f64,
    pub m1: f64,
    pub cutoff: f64,
    /// Lᵈ; `None` for an infinite system, where only densities are available.
    pub volume: Option<f64>,
    pub quadrature: QuadratureOptions,
}

impl FieldQuench {
    pub fn new(dim: usize, m0: f64, m1: f64, cutoff: f64) -> Self {
        FieldQuench { dim, m0, m1, cutoff, volume: None, quadrature: QuadratureOptions::default() }
    }

    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::arg("dimension must be ≥ 1"));
        }
        for (name, v) in [("m0", self.m0), ("m1", self.m1)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if self.m0 == 0.0 && self.m1 == 0.0 {
            return Err(Error::arg("at least one of m0, m1 must be positive"));
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return Err(Error::arg(format!("cutoff must be finite and > 0, got {}", self.cutoff)));
        }
        if let Some(v) = self.volume {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::arg(format!("volume must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn frequencies(&self, k: f64) -> ModePair {
        ModePair::new(k.hypot(self.m0), k.hypot(self.m1))
    }

    /// Ω_d/(2π)ᵈ · kᵈ⁻¹.
    pub fn measure(&self, k: f64) -> f64 {
        solid_angle(self.dim) / (2.0 * PI).powi(self.dim as i32) * k.powi(self.dim as i32 - 1)
    }

    fn require_volume(&self) -> Result<f64> {
        self.volume
            .ok_or_else(|| Error::arg("a finite volume is required for the large-volume limit"))
    }
}

/// Surface area of the unit sphere in d dimensions.
pub fn solid_angle(d: usize) -> f64 {
    let (mut s, start) = if d % 2 == 1 { (2.0, 1) } else { (2.0 * PI, 2) };
    let mut k = start;
    while k < d {
        s *= 2.0 * PI / k as f64;
        k += 2;
    }
    s
}

/// ω₀ − ω₁ without cancellation.
fn omega_gap(m: &ModePair, q: &FieldQuench) -> f64 {
    (q.m0 - q.m1) * (q.m0 + q.m1) / (m.omega0 + m.omega1)
}

/// ln(1+w), with a series for small |w|.
fn ln_1p(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        let mut term = w;
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 1..=6 {
            sum += term / j as f64;
            term *= -w;
        }
        sum
    } else {
        (1.0 + w).ln()
    }
}

fn sinc_t(omega: f64, t: f64) -> f64 {
    let x = omega * t;
    if x.abs() < 1e-8 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / omega
    }
}

/// ln(1 − η²), from the mode frequencies.
fn ln_fidelity(m: &ModePair, gap: f64) -> f64 {
    let eta = gap / (m.omega0 + m.omega1);
    let eta_sq = eta * eta;
    if eta_sq < 0.5 {
        (-eta_sq).ln_1p()
    } else {
        (4.0 * m.omega0 * m.omega1).ln() - 2.0 * (m.omega0 + m.omega1).ln()
    }
}

/// Remainder ln(1−η²e^{−2iω₁t}) − ln(1−η²).
fn ln_dynamic_ratio(m: &ModePair, gap: f64, t: f64) -> Complex64 {
    let w = Complex64::new(0.0, gap * gap / (2.0 * m.omega0) * sinc_t(m.omega1, t))
        * Complex64::from_polar(1.0, -m.omega1 * t);
    ln_1p(w)
}

fn mode_log_cf(m: &ModePair, gap: f64, t: f64) -> Complex64 {
    Complex64::new(0.0, 0.5 * gap * t) - 0.5 * ln_dynamic_ratio(m, gap, t)
}

/// Per-mode characteristic function
/// G_k(t) = e^{i(ω₀−ω₁)t/2} √((1−η²)/(1−η²e^{−2iω₁t})), η = (ω₀−ω₁)/(ω₀+ω₁).
pub fn mode_cf(k: f64, q: &FieldQuench, t: f64) -> Result<Complex64> {
    q.validate()?;
    let m = q.frequencies(k);
    if !(m.omega1 > 0.0 && m.omega0 > 0.0) {
        return Err(Error::domain(format!("mode k = {k} has zero frequency")));
    }
    Ok(mode_log_cf(&m, omega_gap(&m, q), t).exp())
}

/// ln G(t)/Lᵈ split as −(i·bulk·t + 2·boundary + dynamic).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogCfDensity {
    pub total: Complex64,
    /// ½∫(ω₁−ω₀): shift of the vacuum energy density.
    pub bulk: f64,
    /// −¼∫ln(1−η²): log-fidelity density of the two vacua.
    pub boundary: f64,
    /// ½∫ln(1−η²e^{−2iω₁t}); equals −2·boundary at t = 0.
    pub dynamic: Complex64,
}

fn integrate_real<F: Fn(f64) -> f64>(f: F, q: &FieldQuench) -> Result<f64> {
    Ok(integrate(|k| Complex64::new(f(k), 0.0), 0.0, q.cutoff, &q.quadrature)?.value.re)
}

pub fn log_cf_density(q: &FieldQuench, t: f64) -> Result<LogCfDensity> {
    q.validate()?;
    if !t.is_finite() {
        return Err(Error::arg("time must be finite"));
    }
    let total = integrate(
        |k| {
            let m = q.frequencies(k);
            q.measure(k) * mode_log_cf(&m, omega_gap(&m, q), t)
        },
        0.0,
        q.cutoff,
        &q.quadrature,
    )?
    .value;
    let bulk = integrate_real(
        |k| {
            let m = q.frequencies(k);
            -0.5 * q.measure(k) * omega_gap(&m, q)
        },
        q,
    )?;
    let boundary = integrate_real(
        |k| {
            let m = q.frequencies(k);
            -0.25 * q.measure(k) * ln_fidelity(&m, omega_gap(&m, q))
        },
        q,
    )?;
    let dynamic = integrate(
        |k| {
            let m = q.frequencies(k);
            let gap = omega_gap(&m, q);
            0.5 * q.measure(k) * (ln_fidelity(&m, gap) + ln_dynamic_ratio(&m, gap, t))
        },
        0.0,
        q.cutoff,
        &q.quadrature,
    )?
    .value;
    Ok(LogCfDensity { total, bulk, boundary, dynamic })
}

/// Eulerian polynomial A_p(x) = Σ_k ⟨p k⟩ xᵏ, with A₀ = 1.
fn eulerian(p: usize, x: f64) -> f64 {
    let mut row = vec![1.0f64];
    for q in 1..=p {
        let mut next = vec![0.0; q];
        for (k, slot) in next.iter_mut().enumerate() {
            let keep = if k < row.len() { (k + 1) as f64 * row[k] } else { 0.0 };
            let rise = if k >= 1 && k - 1 < row.len() { (q - k) as f64 * row[k - 1] } else { 0.0 };
            *slot = keep + rise;
        }
        row = next;
    }
    row.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Cumulant β_n of one oscillator quench,
/// ½ Σ_{m≥1} η^{2m}(2mω₁)ⁿ/m + δ_{n1}(ω₁−ω₀)/2, summed in closed form as
/// ½ s cⁿ⁻¹ A_{n−1}(η²) with s = (ω₀−ω₁)²/(2ω₀), c = (ω₀+ω₁)²/(2ω₀).
pub fn mode_cumulant(omega0: f64, omega1: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("cumulant order starts at 1"));
    }
    if !(omega0 > 0.0 && omega1 >= 0.0 && omega1.is_finite()) {
        return Err(Error::domain(format!("need ω₀ > 0 and ω₁ ≥ 0, got ({omega0}, {omega1})")));
    }
    Ok(mode_cumulant_gap(omega0, omega1, omega0 - omega1, n))
}

fn mode_cumulant_gap(omega0: f64, omega1: f64, gap: f64, n: usize) -> f64 {
    if n == 1 {
        return -0.5 * gap * (omega0 + omega1) / (2.0 * omega0);
    }
    let sum = omega0 + omega1;
    let eta = gap / sum;
    let s = gap * gap / (2.0 * omega0);
    let c = sum * sum / (2.0 * omega0);
    0.5 * s * c.powi(n as i32 - 1) * eulerian(n - 1, eta * eta)
}

/// Cumulant density with its cutoff sensitivity d(β_n/Lᵈ)/d ln Λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantDensity {
    pub order: usize,
    pub value: f64,
    pub uv_sensitivity: f64,
    /// The sensitivity does not decay when the cutoff is doubled.
    pub divergent: bool,
}

fn cumulant_integrand(q: &FieldQuench, k: f64, n: usize) -> f64 {
    let m = q.frequencies(k);
    q.measure(k) * mode_cumulant_gap(m.omega0, m.omega1, omega_gap(&m, q), n)
}

pub fn cumulant_density(q: &FieldQuench, n: usize) -> Result<CumulantDensity> {
    q.validate()?;
    if n == 0 {
        return Err(Error::arg("cumulant order starts at 1"));
    }
    if q.m0 == 0.0 {
        return Err(Error::Divergence("massless initial state: the k = 0 mode has infinite cumulants".into()));
    }
    let value = integrate_real(|k| cumulant_integrand(q, k, n), q)?;
    let lambda = q.cutoff;
    let here = lambda * cumulant_integrand(q, lambda, n);
    let doubled = 2.0 * lambda * cumulant_integrand(q, 2.0 * lambda, n);
    let divergent = here != 0.0 && (doubled.abs() / here.abs()).log2() > -0.5;
    Ok(CumulantDensity { order: n, value, uv_sensitivity: here, divergent })
}

/// β₁..β_{n_max} densities, computed in parallel.
pub fn cumulant_densities(q: &FieldQuench, n_max: usize) -> Result<Vec<CumulantDensity>> {
    (1..=n_max).into_par_iter().map(|n| cumulant_density(q, n)).collect()
}

/// Finite-difference stencil weights for the `order`-th derivative at 0 on
/// the points `xs` (Fornberg's algorithm).
fn stencil_weights(xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        let mn = i.min(order);
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - xs[i - 1] * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * xs[i - 1] * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (xs[i] * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = xs[i] * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Independent estimate of β_n/Lᵈ = iⁿ dⁿ/dtⁿ (ln G/Lᵈ) at t = 0 by a
/// 13-point central difference with the given step (default 0.05/ω_max).
///
/// All stencil points are integrated on one fixed panel layout, so that the
/// quadrature error varies smoothly with t and does not pollute the
/// derivative.
pub fn cumulant_density_fd(q: &FieldQuench, n: usize, step: Option<f64>) -> Result<f64> {
    q.validate()?;
    if n == 0 || n > 8 {
        return Err(Error::arg("finite-difference cumulants support orders 1..=8"));
    }
    let omega_max = q.cutoff.hypot(q.m0.max(q.m1));
    let h = step.unwrap_or(0.05 / omega_max);
    const HALF: i32 = 6;
    let integrand = |t: f64| {
        move |k: f64| {
            let m = q.frequencies(k);
            q.measure(k) * mode_log_cf(&m, omega_gap(&m, q), t)
        }
    };
    let layout = integrate(integrand(HALF as f64 * h), 0.0, q.cutoff, &q.quadrature)?.panels;
    let xs: Vec<f64> = (-HALF..=HALF).map(|j| j as f64).collect();
    let weights = stencil_weights(&xs, n);
    let mut derivative = Complex64::new(0.0, 0.0);
    for (x, w) in xs.iter().zip(&weights) {
        if *w != 0.0 {
            derivative += *w * integrate_on(integrand(x * h), &layout);
        }
    }
    derivative /= h.powi(n as i32);
    Ok((Complex64::i().powu(n as u32) * derivative).re)
}

/// κ_n of the intensive work W/Lᵈ for a system of the given volume.
pub fn intensive_cumulant(density: f64, n: usize, volume: f64) -> f64 {
    density * volume.powi(1 - n as i32)
}

/// Large-volume Gaussian law of the intensive work W/Lᵈ:
/// G(t) = exp(−iγ₁t − γ₂t²/(2Lᵈ)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianWorkLaw {
    pub gamma1: f64,
    pub gamma2: f64,
    pub volume: f64,
    pub mean_divergent: bool,
    pub variance_divergent: bool,
}

impl GaussianWorkLaw {
    pub fn new(gamma1: f64, gamma2: f64, volume: f64) -> Result<Self> {
        if !(gamma1.is_finite() && gamma2.is_finite() && gamma2 >= 0.0) {
            return Err(Error::arg(format!("need finite γ₁ and γ₂ ≥ 0, got ({gamma1}, {gamma2})")));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::arg(format!("volume must be finite and > 0, got {volume}")));
        }
        Ok(GaussianWorkLaw { gamma1, gamma2, volume, mean_divergent: false, variance_divergent: false })
    }

    /// γ₂/Lᵈ.
    pub fn spread_rate(&self) -> f64 {
        self.gamma2 / self.volume
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        Complex64::new(-0.5 * self.spread_rate() * t * t, -self.gamma1 * t).exp()
    }

    /// M₀..M_{n_max} of the intensive work, from its two nonzero cumulants.
    pub fn moments(&self, n_max: usize) -> Result<Vec<Complex<f64>>> {
        let beta = [Complex::new(self.gamma1, 0.0), Complex::new(self.spread_rate(), 0.0)];
        let padded: Vec<_> = (0..n_max.max(2))
            .map(|i| beta.get(i).cloned().unwrap_or(Complex::new(0.0, 0.0)))
            .collect();
        crate::bell::moments_from_cumulants(&padded, n_max)
    }

    /// a_n = γ₁, b_n = √(nγ₂/Lᵈ); one site when γ₂ = 0.
    pub fn lanczos(&self, n_max: usize) -> Result<LanczosCoefficients<f64>> {
        if n_max == 0 {
            return Err(Error::arg("need at least one coefficient"));
        }
        let sites = if self.gamma2 == 0.0 { 1 } else { n_max };
        Ok(LanczosCoefficients {
            a: vec![self.gamma1; sites],
            b_squared: (1..sites).map(|n| n as f64 * self.spread_rate()).collect(),
            terminated: self.gamma2 == 0.0,
            precision_bits: Some(53),
        })
    }

    /// 𝒞(t) = (γ₂/Lᵈ) t².
    pub fn spread_complexity(&self, t: f64) -> f64 {
        self.spread_rate() * t * t
    }
}

impl ChainCoefficients for GaussianWorkLaw {
    fn a(&self, _n: usize) -> f64 {
        self.gamma1
    }

    fn b(&self, n: usize) -> f64 {
        (n as f64 * self.spread_rate()).sqrt()
    }

    fn length(&self) -> Option<usize> {
        if self.gamma2 == 0.0 {
            Some(1)
        } else {
            None
        }
    }
}

/// γ₁ = β₁/Lᵈ and γ₂ = β₂/Lᵈ at the quench's volume; divergence flags are
/// carried over.
pub fn gaussian_limit(q: &FieldQuench) -> Result<GaussianWorkLaw> {
    q.validate()?;
    let volume = q.require_volume()?;
    let mean = cumulant_density(q, 1)?;
    let var = cumulant_density(q, 2)?;
    let mut law = GaussianWorkLaw::new(mean.value, var.value.max(0.0), volume)?;
    law.mean_divergent = mean.divergent;
    law.variance_divergent = var.divergent;
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{mode_autocorrelation, mode_lanczos};
    use crate::krylov::{evolve, spread_complexity, EvolveOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn solid_angles() {
        assert_eq!(solid_angle(1), 2.0);
        assert_eq!(solid_angle(2), 2.0 * PI);
        assert!(rel(solid_angle(3), 4.0 * PI) < 1e-15);
        assert!(rel(solid_angle(4), 2.0 * PI * PI) < 1e-15);
    }

    #[test]
    fn eulerian_rows() {
        assert_eq!(eulerian(0, 0.3), 1.0);
        assert_eq!(eulerian(1, 0.3), 1.0);
        assert!(rel(eulerian(3, 2.0), 1.0 + 4.0 * 2.0 + 4.0) < 1e-15);
        assert!(rel(eulerian(4, 2.0), 1.0 + 11.0 * 2.0 + 11.0 * 4.0 + 8.0) < 1e-15);
    }

    #[test]
    fn mode_cumulants_at_two_one() {
        assert!(rel(mode_cumulant(2.0, 1.0, 1).unwrap(), -0.375) < 1e-15);
        assert!(rel(mode_cumulant(2.0, 1.0, 2).unwrap(), 9.0 / 32.0) < 1e-15);
        for n in 1..6 {
            assert_eq!(mode_cumulant(1.5, 1.5, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn mode_cumulants_match_geometric_series() {
        let (w0, w1): (f64, f64) = (1.3, 0.7);
        let eta_sq = ((w0 - w1) / (w0 + w1)).powi(2);
        for n in 1..7 {
            let mut s = 0.0;
            for m in 1..400 {
                let m = m as f64;
                s += eta_sq.powf(m) * (2.0 * m * w1).powi(n as i32) / m;
            }
            let mut expect = 0.5 * s;
            if n == 1 {
                expect += 0.5 * (w1 - w0);
            }
            assert!(rel(mode_cumulant(w0, w1, n).unwrap(), expect) < 1e-13, "n={n}");
        }
    }

    #[test]
    fn mode_variance_is_first_lanczos_b_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = ModePair::new(rng.gen_range(0.05..10.0), rng.gen_range(0.0..10.0));
            let lc = mode_lanczos(&m, 2).unwrap();
            let b1_sq = lc.b_squared.first().copied().unwrap_or(0.0);
            let beta2 = mode_cumulant(m.omega0, m.omega1, 2).unwrap();
            assert!((beta2 - b1_sq).abs() <= 1e-12 * b1_sq.max(1e-300), "{m:?}");
        }
    }

    #[test]
    fn mode_cf_limits_and_modulus() {
        let q = FieldQuench::new(1, 1.0, 2.0, 10.0);
        for &t in &[0.0, 0.3, 2.0, 17.0] {
            let g = mode_cf(0.7, &q, t).unwrap();
            let m = q.frequencies(0.7);
            let s = mode_autocorrelation(&m, t).unwrap();
            assert!((g.norm_sqr() - s.norm_sqr()).abs() < 1e-12);

            let eta = (m.omega0 - m.omega1) / (m.omega0 + m.omega1);
            let direct = Complex64::from_polar(1.0, 0.5 * (m.omega0 - m.omega1) * t)
                * ((1.0 - eta * eta) / (1.0 - eta * eta * Complex64::from_polar(1.0, -2.0 * m.omega1 * t))).sqrt();
            assert!((g - direct).norm() < 1e-13);
        }
        assert!((mode_cf(1e12, &q, 3.0).unwrap() - 1.0).norm() < 1e-9);
        let same = FieldQuench::new(2, 1.5, 1.5, 10.0);
        assert_eq!(mode_cf(0.4, &same, 5.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(mode_cf(0.0, &FieldQuench::new(1, 1.0, 0.0, 1.0), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn decomposition_sums_to_total() {
        let q = FieldQuench::new(2, 1.0, 2.0, 8.0);
        for &t in &[0.0, 0.4, 3.0] {
            let l = log_cf_density(&q, t).unwrap();
            let parts = -(Complex64::new(0.0, l.bulk * t) + 2.0 * l.boundary + l.dynamic);
            assert!((parts - l.total).norm() < 1e-9 * (1.0 + l.dynamic.norm()), "t={t}");
        }
        let l0 = log_cf_density(&q, 0.0).unwrap();
        assert!(l0.total.norm() < 1e-15);
        assert!((l0.dynamic.re + 2.0 * l0.boundary).abs() < 1e-9 * l0.boundary.abs());
        assert!(l0.boundary > 0.0);

        let same = FieldQuench::new(3, 1.0, 1.0, 5.0);
        let l = log_cf_density(&same, 2.0).unwrap();
        assert_eq!(l.total, Complex64::new(0.0, 0.0));
        assert!(cumulant_densities(&same, 4).unwrap().iter().all(|c| c.value == 0.0));
    }

    #[test]
    fn discretized_product_matches_integral() {
        // modes k_j = (j − ½)·2π/L on both sides of zero, 10⁴ per side
        let q = FieldQuench::new(1, 1.0, 2.0, 20.0);
        let count = 10_000;
        let dk = q.cutoff / count as f64;
        let length = 2.0 * PI / dk;
        for &t in &[0.5, 1.7] {
            let mut product = Complex64::new(1.0, 0.0);
            for j in 1..=count {
                let g = mode_cf((j as f64 - 0.5) * dk, &q, t).unwrap();
                product *= g * g;
            }
            let integral = (length * log_cf_density(&q, t).unwrap().total).exp();
            assert!(product.norm() > 1e-300);
            assert!((product / integral - 1.0).norm() < 1e-4, "t={t}");
        }
    }

    #[test]
    fn densities_match_finite_differences() {
        for dim in 1..=3 {
            let q = FieldQuench::new(dim, 1.0, 2.0, 5.0);
            for n in 1..=4 {
                let series = cumulant_density(&q, n).unwrap().value;
                let fd = cumulant_density_fd(&q, n, None).unwrap();
                assert!(rel(fd, series) < 1e-6, "d={dim} n={n}: {fd} vs {series}");
            }
        }
    }

    #[test]
    fn critical_final_mass() {
        let q = FieldQuench::new(1, 1.0, 0.0, 5.0);
        let mean = cumulant_density(&q, 1).unwrap().value;
        let fd = cumulant_density_fd(&q, 1, None).unwrap();
        assert!(rel(fd, mean) < 1e-6);
        assert!(log_cf_density(&q, 2.0).unwrap().total.re < 0.0);
        assert!(matches!(
            cumulant_density(&FieldQuench::new(1, 0.0, 1.0, 5.0), 2),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn uv_flags() {
        let d1 = FieldQuench::new(1, 1.0, 2.0, 50.0);
        let flags: Vec<bool> = cumulant_densities(&d1, 4).unwrap().iter().map(|c| c.divergent).collect();
        assert_eq!(flags, vec![true, false, true, true]);
        let d3 = FieldQuench::new(3, 1.0, 2.0, 50.0);
        assert!(cumulant_density(&d3, 1).unwrap().divergent);
    }

    #[test]
    fn mean_density_formula() {
        let q = FieldQuench::new(1, 1.0, 2.0, 5.0);
        let direct = integrate_real(
            |k| {
                let m = q.frequencies(k);
                let eta_sq = ((m.omega0 - m.omega1) / (m.omega0 + m.omega1)).powi(2);
                q.measure(k) * (0.5 * (m.omega1 - m.omega0) + m.omega1 * eta_sq / (1.0 - eta_sq))
            },
            &q,
        )
        .unwrap();
        assert!(rel(cumulant_density(&q, 1).unwrap().value, direct) < 1e-12);
    }

    #[test]
    fn gaussian_law_pieces() {
        let law = GaussianWorkLaw::new(0.7, 2.0, 100.0).unwrap();
        let lc = law.lanczos(4).unwrap();
        assert_eq!(lc.a, vec![0.7; 4]);
        for (n, b2) in lc.b_squared.iter().enumerate() {
            assert!(rel(*b2, 0.02 * (n + 1) as f64) < 1e-15);
        }
        assert!(rel(law.spread_complexity(10.0), 2.0) < 1e-15);
        let zero = GaussianWorkLaw::new(0.7, 0.0, 100.0).unwrap();
        assert_eq!(zero.lanczos(5).unwrap().len(), 1);
        assert_eq!(zero.spread_complexity(3.0), 0.0);

        let m = law.moments(4).unwrap();
        let (g1, r) = (0.7f64, 0.02);
        assert!(rel(m[4].re, g1.powi(4) + 6.0 * g1 * g1 * r + 3.0 * r * r) < 1e-14);
        assert!(m[4].im.abs() < 1e-15);
        let g = law.cf(0.3);
        let series: Complex64 = m.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (n, c)| {
            acc + Complex64::new(c.re, c.im) * 0.3f64.powi(n as i32) / (1..=n).product::<usize>() as f64
        });
        assert!((g - series).norm() < 1e-4);
    }

    #[test]
    fn gaussian_chain_spreads_quadratically() {
        let law = GaussianWorkLaw::new(0.3, 2.0, 100.0).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let states = evolve(&law, &grid, &EvolveOptions { dt_max: 0.05, ..Default::default() }).unwrap();
        for s in states.iter().skip(1) {
            assert!(rel(spread_complexity(s), law.spread_complexity(s.t)) < 1e-3, "t={}", s.t);
        }
    }

    #[test]
    fn gaussian_limit_needs_volume() {
        let q = FieldQuench::new(1, 1.0, 2.0, 5.0);
        assert!(gaussian_limit(&q).is_err());
        let law = gaussian_limit(&q.with_volume(1e3)).unwrap();
        assert!(rel(law.gamma1, cumulant_density(&q, 1).unwrap().value) < 1e-15);
        assert!(law.mean_divergent && !law.variance_divergent);
        let same = gaussian_limit(&FieldQuench::new(2, 1.0, 1.0, 5.0).with_volume(10.0)).unwrap();
        assert_eq!(same.gamma1, 0.0);
    }

    #[test]
    fn intensive_skewness_narrows() {
        let q = FieldQuench::new(1, 1.0, 2.0, 5.0);
        let k2 = cumulant_density(&q, 2).unwrap().value;
        let k3 = cumulant_density(&q, 3).unwrap().value;
        let skew = |v: f64| intensive_cumulant(k3, 3, v) / intensive_cumulant(k2, 2, v).powf(1.5);
        for v in [1e2, 1e4] {
            let slope = (skew(100.0 * v) / skew(v)).log10() / 2.0;
            assert!((slope + 0.5).abs() < 1e-12);
        }
    }
}
