//! Sudden frequency quench of a periodic harmonic chain.
//!
//! The chain decouples into normal modes; each mode is a squeezed oscillator
//! whose Krylov chain is known in closed form. Every quantity below is written
//! in terms of the products Ω₁ω₁ = (ω₀²+ω₁²)/(2ω₀) and Ω̃₁ω₁ = (ω₀²−ω₁²)/(2ω₀)
//! and of sin(ω₁t)/ω₁, which stay finite as ω₁ → 0, so zero modes need no
//! separate code path.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::ChainCoefficients;
use crate::lanczos::LanczosCoefficients;
use crate::scalar::{Complex, RealScalar};
use crate::series::TimeSeries;
use crate::workstats::{Convention, MomentSequence};

/// Chain of `n` sites with on-site frequency λ₀ → λ₁ and fixed nearest-neighbour
/// coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainQuench {
    pub n: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub coupling: f64,
}

impl ChainQuench {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::arg("chain needs at least one site"));
        }
        for (name, v) in [("lambda0", self.lambda0), ("lambda1", self.lambda1), ("coupling", self.coupling)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if self.lambda0 == 0.0 && self.lambda1 == 0.0 {
            return Err(Error::arg("λ₀ = λ₁ = 0 (doubly critical quench) is not supported"));
        }
        Ok(())
    }
}

/// Pre- and post-quench frequency of one normal mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    pub omega0: f64,
    pub omega1: f64,
}

impl ModePair {
    pub fn new(omega0: f64, omega1: f64) -> Self {
        ModePair { omega0, omega1 }
    }

    fn require_massive_initial(&self) -> Result<()> {
        if !(self.omega0 > 0.0) {
            return Err(Error::Divergence(
                "pre-quench frequency is zero: all Lanczos coefficients and the complexity diverge".into(),
            ));
        }
        if !(self.omega1 >= 0.0) {
            return Err(Error::domain(format!("post-quench frequency {} < 0", self.omega1)));
        }
        Ok(())
    }

    pub fn is_zero_mode(&self) -> bool {
        self.omega1 == 0.0
    }

    /// Ω₁ω₁ = (ω₀²+ω₁²)/(2ω₀).
    pub fn omega_sum_scaled(&self) -> f64 {
        (self.omega0 * self.omega0 + self.omega1 * self.omega1) / (2.0 * self.omega0)
    }

    /// Ω̃₁ω₁ = (ω₀²−ω₁²)/(2ω₀).
    pub fn omega_diff_scaled(&self) -> f64 {
        (self.omega0 - self.omega1) * (self.omega0 + self.omega1) / (2.0 * self.omega0)
    }

    /// Ω₁ = (ω₀²+ω₁²)/(2ω₀ω₁).
    pub fn big_omega(&self) -> f64 {
        self.omega_sum_scaled() / self.omega1
    }

    /// Ω̃₁ = (ω₀²−ω₁²)/(2ω₀ω₁).
    pub fn big_omega_tilde(&self) -> f64 {
        self.omega_diff_scaled() / self.omega1
    }

    /// Bogoliubov coefficient 𝒰 = (ω₁+ω₀)/(2√(ω₁ω₀)).
    pub fn bogoliubov_u(&self) -> f64 {
        (self.omega1 + self.omega0) / (2.0 * (self.omega1 * self.omega0).sqrt())
    }

    /// Bogoliubov coefficient 𝒱 = (ω₁−ω₀)/(2√(ω₁ω₀)).
    pub fn bogoliubov_v(&self) -> f64 {
        (self.omega1 - self.omega0) / (2.0 * (self.omega1 * self.omega0).sqrt())
    }

    /// ⟨H₁⟩ in the initial ground state, which is also a₀.
    pub fn mean_energy(&self) -> f64 {
        0.5 * self.omega_sum_scaled()
    }

    /// Energy variance of the initial state, which is also b₁².
    pub fn energy_variance(&self) -> f64 {
        0.5 * self.omega_diff_scaled().powi(2)
    }

    /// f₁(t) = cos ω₁t + iΩ₁ sin ω₁t.
    fn f1(&self, t: f64) -> Complex64 {
        Complex64::new((self.omega1 * t).cos(), self.omega_sum_scaled() * sinc_t(self.omega1, t))
    }

    /// arg f₁(t), continuous in t with value 0 at t = 0.
    fn f1_phase(&self, t: f64) -> f64 {
        if self.omega1 == 0.0 {
            return (self.omega0 * t / 2.0).atan();
        }
        let theta = self.omega1 * t;
        let m = ((theta + PI / 2.0) / PI).floor();
        (self.big_omega() * (theta - m * PI).tan()).atan() + m * PI
    }
}

/// The infinite closed-form chain of one mode, for [`crate::krylov::evolve`].
impl ChainCoefficients for ModePair {
    fn a(&self, n: usize) -> f64 {
        (2.0 * n as f64 + 0.5) * self.omega_sum_scaled()
    }

    fn b(&self, l: usize) -> f64 {
        let l = l as f64;
        0.5 * (2.0 * (2.0 * l * l - l)).sqrt() * self.omega_diff_scaled().abs()
    }

    fn length(&self) -> Option<usize> {
        None
    }
}

/// sin(ωt)/ω, equal to t at ω = 0.
fn sinc_t(omega: f64, t: f64) -> f64 {
    let x = omega * t;
    if x.abs() < 1e-8 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / omega
    }
}

/// Normal-mode frequencies ω_{jk}² = λ_j² + 4k₀ sin²(πk/N), k = 1..N.
/// Mode k = N carries λ_j exactly.
pub fn normal_modes(q: &ChainQuench) -> Result<Vec<ModePair>> {
    q.validate()?;
    let n = q.n as f64;
    Ok((1..=q.n)
        .map(|k| {
            let disp = if k == q.n {
                0.0
            } else {
                4.0 * q.coupling * (PI * k as f64 / n).sin().powi(2)
            };
            ModePair {
                omega0: (q.lambda0 * q.lambda0 + disp).sqrt(),
                omega1: (q.lambda1 * q.lambda1 + disp).sqrt(),
            }
        })
        .collect())
}

/// Return amplitude 𝒮(t) = ⟨ψ(t)|ψ(0)⟩ of one mode, hamiltonian convention:
/// 𝒮 = (f₁*)^{−1/2} with the phase of f₁ followed continuously from f₁(0) = 1.
pub fn mode_autocorrelation(m: &ModePair, t: f64) -> Result<Complex64> {
    m.require_massive_initial()?;
    let modulus = m.f1(t).norm().powf(-0.5);
    Ok(Complex64::from_polar(modulus, 0.5 * m.f1_phase(t)))
}

/// Characteristic function G(t) = ⟨e^{−iWt}⟩ of one mode, which is the
/// complex conjugate of [`mode_autocorrelation`].
pub fn mode_characteristic(m: &ModePair, t: f64) -> Result<Complex64> {
    Ok(mode_autocorrelation(m, t)?.conj())
}

/// Closed-form Lanczos coefficients a_n = (2n+½)Ω₁ω₁,
/// b_l² = ½(2l²−l)(Ω̃₁ω₁)², in any real arithmetic. An identity quench gives a
/// one-site chain.
pub fn mode_lanczos_in<T: RealScalar>(omega0: &T, omega1: &T, n_max: usize) -> Result<LanczosCoefficients<T>> {
    if !(omega0.to_f64() > 0.0) {
        return Err(Error::Divergence(
            "pre-quench frequency is zero: all Lanczos coefficients diverge".into(),
        ));
    }
    if n_max == 0 {
        return Err(Error::arg("need at least one coefficient"));
    }
    let two = omega0.from_i64_like(2);
    let sum = (omega0.clone() * omega0.clone() + omega1.clone() * omega1.clone()) / (two.clone() * omega0.clone());
    let diff = (omega0.clone() * omega0.clone() - omega1.clone() * omega1.clone()) / (two.clone() * omega0.clone());
    let diff_sq = diff.clone() * diff;
    let a: Vec<T> = (0..n_max)
        .map(|n| omega0.from_i64_like(4 * n as i64 + 1) / two.clone() * sum.clone())
        .collect();
    if diff_sq.is_zero() {
        return Ok(LanczosCoefficients {
            a: a[..1].to_vec(),
            b_squared: vec![],
            terminated: true,
            precision_bits: omega0.precision_bits(),
        });
    }
    let b_squared = (1..n_max)
        .map(|l| {
            let l = l as i64;
            omega0.from_i64_like(2 * l * l - l) / two.clone() * diff_sq.clone()
        })
        .collect();
    Ok(LanczosCoefficients { a, b_squared, terminated: false, precision_bits: omega0.precision_bits() })
}

/// [`mode_lanczos_in`] in double precision.
pub fn mode_lanczos(m: &ModePair, n_max: usize) -> Result<LanczosCoefficients<f64>> {
    m.require_massive_initial()?;
    mode_lanczos_in(&m.omega0, &m.omega1, n_max)
}

/// Taylor moments M₀..M_{n_max} of G(t) = f₁(t)^{−1/2}, computed from the
/// power series of f₁ in any real arithmetic.
pub fn mode_taylor_moments<T: RealScalar>(omega0: &T, omega1: &T, n_max: usize) -> Result<MomentSequence<T>> {
    if !(omega0.to_f64() > 0.0) {
        return Err(Error::Divergence("pre-quench frequency is zero".into()));
    }
    let zero = omega0.zero_like();
    let one = omega0.one_like();
    let two = omega0.from_i64_like(2);
    let sum = (omega0.clone() * omega0.clone() + omega1.clone() * omega1.clone()) / (two * omega0.clone());
    // f_n: coefficient of tⁿ in f₁(t).
    let mut f: Vec<Complex<T>> = Vec::with_capacity(n_max + 1);
    let mut inv_fact = one.clone();
    for n in 0..=n_max {
        if n > 0 {
            inv_fact = inv_fact / omega0.from_i64_like(n as i64);
        }
        let c = if n % 2 == 0 {
            let sign = if (n / 2) % 2 == 0 { one.clone() } else { -one.clone() };
            Complex::real(sign * omega1.powi(n as u32) * inv_fact.clone())
        } else {
            let sign = if ((n - 1) / 2) % 2 == 0 { one.clone() } else { -one.clone() };
            Complex::new(zero.clone(), sign * sum.clone() * omega1.powi(n as u32 - 1) * inv_fact.clone())
        };
        f.push(c);
    }
    // g = f^α with α = −½ via g_n = (1/n) Σ_k ((α+1)k − n) f_k g_{n−k}.
    let half = one.clone() / omega0.from_i64_like(2);
    let mut g: Vec<Complex<T>> = vec![Complex::real(one.clone())];
    for n in 1..=n_max {
        let mut acc = Complex::real(zero.clone());
        for k in 1..=n {
            let w = half.clone() * omega0.from_i64_like(k as i64) - omega0.from_i64_like(n as i64);
            acc = acc + f[k].clone() * g[n - k].clone() * Complex::real(w);
        }
        g.push(acc * Complex::real(one.clone() / omega0.from_i64_like(n as i64)));
    }
    let mut fact = one;
    let entries = g
        .into_iter()
        .enumerate()
        .map(|(n, gn)| {
            if n > 0 {
                fact = fact.clone() * omega0.from_i64_like(n as i64);
            }
            gn * Complex::real(fact.clone())
        })
        .collect();
    Ok(MomentSequence::exact(entries, Convention::Hamiltonian))
}

/// Krylov amplitude φ_n(t) = 𝒩_n φ₀ (A⁺)ⁿ with 𝒩_n² = Γ(n+½)/(n!√π),
/// φ₀ = f₁^{−1/2} and A⁺ = iΩ̃₁ sin(ω₁t)/f₁.
pub fn mode_phi(m: &ModePair, t: f64, n: usize) -> Result<Complex64> {
    Ok(mode_phi_all(m, t, n)?[n])
}

/// `[φ₀(t), …, φ_{n_max}(t)]`.
pub fn mode_phi_all(m: &ModePair, t: f64, n_max: usize) -> Result<Vec<Complex64>> {
    let phi0 = mode_characteristic(m, t)?;
    let ratio = Complex64::new(0.0, m.omega_diff_scaled() * sinc_t(m.omega1, t)) / m.f1(t);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut norm_sq = 1.0;
    let mut power = Complex64::new(1.0, 0.0);
    out.push(phi0);
    for j in 1..=n_max {
        norm_sq *= (j as f64 - 0.5) / j as f64;
        power *= ratio;
        out.push(phi0 * power * norm_sq.sqrt());
    }
    Ok(out)
}

/// |A⁺(t)|², the ratio of successive |φ_n|² up to the 𝒩_n factors.
pub fn mode_ratio_sq(m: &ModePair, t: f64) -> Result<f64> {
    m.require_massive_initial()?;
    let num = m.omega_diff_scaled() * sinc_t(m.omega1, t);
    Ok(num * num / m.f1(t).norm_sqr())
}

/// 𝒞(t) = ½Ω̃₁² sin²(ω₁t); for a zero mode this is ω₀²t²/8.
pub fn mode_spread_complexity(m: &ModePair, t: f64) -> Result<f64> {
    if !(m.omega0 > 0.0) {
        if t == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Divergence(
            "pre-quench frequency is zero: the spread complexity diverges for t > 0".into(),
        ));
    }
    let s = m.omega_diff_scaled() * sinc_t(m.omega1, t);
    Ok(0.5 * s * s)
}

/// Neumaier-compensated sum in the given order.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Spread complexity of the whole chain: channels `c_zero` (modes with
/// ω₁ = 0), `c_rest` and `c_total`.
pub fn total_spread_complexity(q: &ChainQuench, t_grid: &[f64]) -> Result<TimeSeries> {
    let modes = normal_modes(q)?;
    if let Some(m) = modes.iter().find(|m| !(m.omega0 > 0.0)) {
        m.require_massive_initial()?;
    }
    let mut zero: Vec<ModePair> = modes.iter().copied().filter(ModePair::is_zero_mode).collect();
    let mut rest: Vec<ModePair> = modes.iter().copied().filter(|m| !m.is_zero_mode()).collect();
    let key = |m: &ModePair| m.omega_diff_scaled().abs();
    zero.sort_by(|x, y| key(y).total_cmp(&key(x)));
    rest.sort_by(|x, y| key(y).total_cmp(&key(x)));

    let rows: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let c = |ms: &[ModePair]| {
                compensated_sum(ms.iter().map(|m| mode_spread_complexity(m, t).expect("ω₀ > 0 checked")))
            };
            (c(&zero), c(&rest))
        })
        .collect();
    let (cz, cr): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let total = cz.iter().zip(&cr).map(|(a, b)| a + b).collect();
    TimeSeries::new(t_grid.to_vec())
        .with("c_zero", cz)?
        .with("c_rest", cr)?
        .with("c_total", total)
}

/// Σ over non-zero modes of the per-mode maximum ½Ω̃₁²: an upper bound of
/// `c_rest` at every time.
pub fn rest_complexity_bound(q: &ChainQuench) -> Result<f64> {
    let modes = normal_modes(q)?;
    Ok(compensated_sum(
        modes
            .iter()
            .filter(|m| !m.is_zero_mode())
            .map(|m| 0.5 * m.big_omega_tilde().powi(2)),
    ))
}

/// Time after which the zero-mode channel exceeds [`rest_complexity_bound`]
/// and therefore `c_rest` for good. `None` without zero modes.
pub fn guaranteed_crossover(q: &ChainQuench) -> Result<Option<f64>> {
    let modes = normal_modes(q)?;
    let growth: f64 = modes
        .iter()
        .filter(|m| m.is_zero_mode())
        .map(|m| m.omega0 * m.omega0 / 8.0)
        .sum();
    if growth == 0.0 {
        return Ok(None);
    }
    Ok(Some((rest_complexity_bound(q)? / growth).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lanczos::{hamiltonian_moments, lanczos_from_moments};
    use crate::scalar::{RBig, Real, Scalar};
    use crate::workstats::{characteristic_function, oscillator_overlaps};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn dispersion() {
        let q = ChainQuench { n: 2, lambda0: 1.0, lambda1: 1.0, coupling: 0.0 };
        for m in normal_modes(&q).unwrap() {
            assert_eq!(m.omega0, 1.0);
        }
        let q = ChainQuench { n: 4, lambda0: 1.0, lambda1: 2.0, coupling: 1.0 };
        let w: Vec<f64> = normal_modes(&q).unwrap().iter().map(|m| m.omega0).collect();
        let expect = [3f64.sqrt(), 5f64.sqrt(), 3f64.sqrt(), 1.0];
        for (a, b) in w.iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
        let q = ChainQuench { n: 350, lambda0: 5.0, lambda1: 0.0, coupling: 2.0 };
        let modes = normal_modes(&q).unwrap();
        assert_eq!(modes[349].omega1, 0.0);
        assert!(modes[..349].iter().all(|m| m.omega1 > 0.0));
        let bad = ChainQuench { n: 3, lambda0: 0.0, lambda1: 0.0, coupling: 1.0 };
        assert!(matches!(normal_modes(&bad), Err(Error::Argument(_))));
    }

    #[test]
    fn hyperbolic_identities() {
        for (w0, w1) in [(2.0, 1.0), (0.3, 7.0), (1.0, 1.0), (5.0, 0.01)] {
            let m = ModePair::new(w0, w1);
            let (u, v) = (m.bogoliubov_u(), m.bogoliubov_v());
            assert!(close(u * u - v * v, 1.0, 1e-13));
            let (a, b) = (m.big_omega(), m.big_omega_tilde());
            assert!(close(a * a - b * b, 1.0, 1e-12));
        }
    }

    #[test]
    fn autocorrelation_cases() {
        let m = ModePair::new(1.3, 1.3);
        for i in 0..20 {
            let t = 0.7 * i as f64;
            let s = mode_autocorrelation(&m, t).unwrap();
            assert!(close(s.norm(), 1.0, 1e-14));
            let expect = Complex64::from_polar(1.0, 0.65 * t);
            assert!((s - expect).norm() < 1e-12, "t={t}");
        }
        let m = ModePair::new(2.0, 1.0);
        let s = mode_autocorrelation(&m, PI / 2.0).unwrap();
        assert!(close(s.norm(), (1.25f64).powf(-0.5), 1e-15));
        assert_eq!(mode_autocorrelation(&m, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn autocorrelation_is_continuous() {
        let m = ModePair::new(9.0, 0.5);
        let mut prev = mode_autocorrelation(&m, 0.0).unwrap();
        for i in 1..20_000 {
            let s = mode_autocorrelation(&m, i as f64 * 1e-3).unwrap();
            assert!((s - prev).norm() < 1e-2, "jump at step {i}");
            prev = s;
        }
    }

    #[test]
    fn autocorrelation_matches_spectral_sum() {
        let m = ModePair::new(2.0, 1.0);
        let spec = oscillator_overlaps(2.0, 1.0, 1e-16, Convention::Hamiltonian, 128).unwrap();
        for i in 0..=200 {
            let t = 0.05 * i as f64;
            let s = mode_autocorrelation(&m, t).unwrap();
            let g = characteristic_function(&spec, t);
            assert!((s - g.conj()).norm() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn closed_form_lanczos() {
        let lc = mode_lanczos(&ModePair::new(2.0, 1.0), 4).unwrap();
        assert!(close(lc.a[0], 0.625, 1e-15));
        assert!(close(lc.a[1], 3.125, 1e-15));
        assert!(close(lc.b()[0], 0.530_330_085_889_910_6, 1e-15));
        assert!(close(lc.b()[1], 1.299_038_105_676_658, 1e-15));
        let m = ModePair::new(2.0, 1.0);
        assert!(close(lc.a[0], m.mean_energy(), 1e-15));
        assert!(close(lc.b_squared[0], m.energy_variance(), 1e-15));
        let same = mode_lanczos(&ModePair::new(1.5, 1.5), 5).unwrap();
        assert_eq!(same.a, vec![0.75]);
        assert!(same.b_squared.is_empty() && same.terminated);
        assert!(matches!(mode_lanczos(&ModePair::new(0.0, 1.0), 3), Err(Error::Divergence(_))));
    }

    #[test]
    fn taylor_moments_feed_the_recursion_exactly() {
        let (w0, w1) = (RBig::from(2), RBig::from(1));
        let m = mode_taylor_moments(&w0, &w1, 12).unwrap();
        let h = hamiltonian_moments(&m).unwrap();
        let lc = lanczos_from_moments(&h, 6).unwrap();
        assert_eq!(lc, mode_lanczos_in(&w0, &w1, 6).unwrap());

        let (w0, w1) = (RBig::from(3) / RBig::from(7), RBig::from(5) / RBig::from(2));
        let h = hamiltonian_moments(&mode_taylor_moments(&w0, &w1, 10).unwrap()).unwrap();
        assert_eq!(lanczos_from_moments(&h, 5).unwrap(), mode_lanczos_in(&w0, &w1, 5).unwrap());
    }

    #[test]
    fn taylor_moments_zero_mode() {
        // G = (1 + iω₀t/2)^{−1/2}; h₁ = ω₀/4, h₂ = 3ω₀²/16.
        let w0 = Real::from_i64(5, 256);
        let m = mode_taylor_moments(&w0, &w0.zero_like(), 4).unwrap();
        let h = hamiltonian_moments(&m).unwrap();
        assert!(close(h.0[1].to_f64(), 1.25, 1e-15));
        assert!(close(h.0[2].to_f64(), 75.0 / 16.0, 1e-15));
    }

    #[test]
    fn phi_amplitudes() {
        let m = ModePair::new(2.0, 1.0);
        let phi = mode_phi_all(&m, 0.0, 5).unwrap();
        assert_eq!(phi[0], Complex64::new(1.0, 0.0));
        assert!(phi[1..].iter().all(|p| p.norm() == 0.0));
        assert!(close(mode_ratio_sq(&m, PI / 2.0).unwrap(), 0.36, 1e-15));
        for i in 0..=100 {
            let t = 0.1 * i as f64;
            let phi = mode_phi_all(&m, t, 60).unwrap();
            let norm: f64 = phi.iter().map(|p| p.norm_sqr()).sum();
            assert!(close(norm, 1.0, 1e-10), "t={t} norm={norm}");
            let c: f64 = phi.iter().enumerate().map(|(n, p)| n as f64 * p.norm_sqr()).sum();
            assert!(close(c, mode_spread_complexity(&m, t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn complexity_from_first_amplitude() {
        let m = ModePair::new(2.0, 1.0);
        let t = PI / 2.0;
        let f = mode_ratio_sq(&m, t).unwrap();
        let phi1 = mode_phi(&m, t, 1).unwrap().norm_sqr();
        let c = mode_spread_complexity(&m, t).unwrap();
        assert!(close(c, 0.28125, 1e-15));
        assert!(close(phi1 / (1.0 - f).powf(1.5), c, 1e-14));
    }

    #[test]
    fn complexity_limits() {
        assert_eq!(mode_spread_complexity(&ModePair::new(1.0, 1.0), 3.0).unwrap(), 0.0);
        let zero = ModePair::new(5.0, 0.0);
        assert!(close(mode_spread_complexity(&zero, 2.0).unwrap(), 12.5, 1e-15));
        let tiny = ModePair::new(5.0, 1e-6);
        for t in [0.5, 1.0, 2.5, 5.0] {
            let c = mode_spread_complexity(&tiny, t).unwrap();
            assert!(((c - 25.0 * t * t / 8.0) / c).abs() < 1e-4);
        }
        let bad = ModePair::new(0.0, 1.0);
        assert!(matches!(mode_spread_complexity(&bad, 1.0), Err(Error::Divergence(_))));
        assert_eq!(mode_spread_complexity(&bad, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn prefactor_symmetry() {
        let (a, b) = (ModePair::new(3.0, 1.5), ModePair::new(1.5, 3.0));
        assert!(close(a.big_omega_tilde().powi(2), b.big_omega_tilde().powi(2), 1e-15));
        let t = 0.8;
        let ca = mode_spread_complexity(&a, t).unwrap();
        let expect = 0.5 * b.big_omega_tilde().powi(2) * (a.omega1 * t).sin().powi(2);
        assert!(close(ca, expect, 1e-14));
    }

    #[test]
    fn totals() {
        let grid: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let same = ChainQuench { n: 8, lambda0: 2.0, lambda1: 2.0, coupling: 1.0 };
        let ts = total_spread_complexity(&same, &grid).unwrap();
        assert!(ts.channel("c_total").unwrap().iter().all(|&c| c == 0.0));
        let one = ChainQuench { n: 1, lambda0: 3.0, lambda1: 1.0, coupling: 4.0 };
        let ts = total_spread_complexity(&one, &grid).unwrap();
        for (t, c) in grid.iter().zip(ts.channel("c_total").unwrap()) {
            assert_eq!(*c, mode_spread_complexity(&ModePair::new(3.0, 1.0), *t).unwrap());
        }
        let crit = ChainQuench { n: 350, lambda0: 5.0, lambda1: 0.0, coupling: 2.0 };
        let ts = total_spread_complexity(&crit, &grid).unwrap();
        for (t, c) in grid.iter().zip(ts.channel("c_zero").unwrap()) {
            assert!(close(*c, 3.125 * t * t, 1e-15));
        }
        let bound = rest_complexity_bound(&crit).unwrap();
        assert!(ts.channel("c_rest").unwrap().iter().all(|&c| c <= bound));
        let t_star = guaranteed_crossover(&crit).unwrap().unwrap();
        assert!(close(3.125 * t_star * t_star, bound, 1e-12));
    }

    #[test]
    fn critical_initial_state_diverges() {
        let q = ChainQuench { n: 4, lambda0: 0.0, lambda1: 1.0, coupling: 1.0 };
        assert!(matches!(total_spread_complexity(&q, &[0.0, 1.0]), Err(Error::Divergence(_))));
    }
}
