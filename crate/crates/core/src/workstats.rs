//! Work distributions of sudden quenches starting from the ground state:
//! discrete spectra, characteristic function, moments, cumulants and the
//! survival probability.
//!
//! Sign conventions: G(t) = ⟨e^{−iWt}⟩ = Σ_n M_n tⁿ/n!, so M_n = (−i)ⁿ⟨Wⁿ⟩.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell;
use crate::error::{Error, Result};
use crate::scalar::{Complex, Real, RealScalar, Scalar};

/// Energy reference of a spectrum.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Post-quench eigenvalues as they are; the pre-quench ground energy is
    /// not subtracted.
    #[default]
    Hamiltonian,
    /// Energies measured from the pre-quench ground energy.
    Work,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Hamiltonian => "hamiltonian",
            Convention::Work => "work",
        }
    }
}

/// One atom of a discrete work distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralLine {
    pub energy: Real,
    pub weight: Real,
}

/// Geometric envelope of the discarded lines: the `m`-th dropped line has
/// weight at most `last_weight·ratioᵐ` and energy `last_energy + m·spacing`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEnvelope {
    pub last_weight: f64,
    pub last_energy: f64,
    pub ratio: f64,
    pub spacing: f64,
}

/// Discrete work distribution, sorted by energy.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkSpectrum {
    lines: Vec<SpectralLine>,
    convention: Convention,
    tail_bound: f64,
    tail: Option<TailEnvelope>,
    ground_energy: Option<Real>,
}

impl WorkSpectrum {
    /// Builds a spectrum from `(energy, weight)` pairs. Weights must be
    /// non-negative and sum to at most one; the missing mass becomes the tail
    /// bound.
    pub fn from_lines(lines: Vec<(Real, Real)>, convention: Convention) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::arg("spectrum has no lines"));
        }
        let like = lines[0].1.clone();
        let zero = like.zero_like();
        let mut total = zero.clone();
        for (_, p) in &lines {
            if *p < zero {
                return Err(Error::domain("negative spectral weight"));
            }
            total = total + p.clone();
        }
        let excess = (total.clone() - like.one_like()).to_f64();
        if excess > like.noise_floor().to_f64() {
            return Err(Error::domain(format!("weights sum to 1 + {excess:e}")));
        }
        let mut lines: Vec<SpectralLine> = lines
            .into_iter()
            .map(|(energy, weight)| SpectralLine { energy, weight })
            .collect();
        lines.sort_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energies"));
        Ok(WorkSpectrum {
            lines,
            convention,
            tail_bound: (-excess).max(0.0),
            tail: None,
            ground_energy: None,
        })
    }

    /// Convenience wrapper over [`WorkSpectrum::from_lines`] for doubles.
    pub fn from_f64_lines(lines: &[(f64, f64)], convention: Convention, bits: usize) -> Result<Self> {
        if lines.iter().any(|(w, p)| !w.is_finite() || !p.is_finite()) {
            return Err(Error::arg("non-finite spectral line"));
        }
        Self::from_lines(
            lines
                .iter()
                .map(|&(w, p)| (Real::from_f64(w, bits), Real::from_f64(p, bits)))
                .collect(),
            convention,
        )
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Upper bound on the probability mass not represented by `lines`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn tail_envelope(&self) -> Option<TailEnvelope> {
        self.tail
    }

    pub fn precision_bits(&self) -> usize {
        self.lines[0].weight.precision()
    }

    pub fn total_weight(&self) -> Real {
        let zero = self.lines[0].weight.zero_like();
        self.lines.iter().fold(zero, |acc, l| acc + l.weight.clone())
    }

    /// Same distribution with every energy moved by `shift`.
    pub fn shifted(&self, shift: &Real) -> Self {
        let mut out = self.clone();
        for l in &mut out.lines {
            l.energy = l.energy.clone() + shift.clone();
        }
        if let Some(t) = &mut out.tail {
            t.last_energy += shift.to_f64();
        }
        out
    }

    /// Re-expresses the spectrum in `convention`. Only spectra that know their
    /// pre-quench ground energy can switch.
    pub fn to_convention(&self, convention: Convention) -> Result<Self> {
        if convention == self.convention {
            return Ok(self.clone());
        }
        let e0 = self
            .ground_energy
            .clone()
            .ok_or_else(|| Error::arg("spectrum does not record its ground energy"))?;
        let shift = match convention {
            Convention::Work => -e0,
            Convention::Hamiltonian => e0,
        };
        let mut out = self.shifted(&shift);
        out.convention = convention;
        Ok(out)
    }

    /// Upper estimate of the contribution of discarded lines to ⟨|W|ⁿ⟩.
    pub fn truncation_error(&self, n: usize) -> f64 {
        if self.tail_bound == 0.0 {
            return 0.0;
        }
        match self.tail {
            Some(env) => {
                let mut sum = 0.0;
                let mut weight = env.last_weight;
                for m in 1.. {
                    weight *= env.ratio;
                    let term = weight * (env.last_energy + m as f64 * env.spacing).abs().powi(n as i32);
                    sum += term;
                    if term <= sum * 1e-17 && m > n {
                        break;
                    }
                    if m > 1_000_000 {
                        return f64::INFINITY;
                    }
                }
                sum
            }
            None => {
                let wmax = self
                    .lines
                    .iter()
                    .map(|l| l.energy.to_f64().abs())
                    .fold(0.0, f64::max);
                self.tail_bound * wmax.max(1.0).powi(n as i32)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    convention: Convention,
    tail_bound: f64,
    lines: Vec<[f64; 2]>,
}

impl Serialize for WorkSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumJson {
            convention: self.convention,
            tail_bound: self.tail_bound,
            lines: self
                .lines
                .iter()
                .map(|l| [l.energy.to_f64(), l.weight.to_f64()])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WorkSpectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SpectrumJson::deserialize(d)?;
        let pairs: Vec<(f64, f64)> = raw.lines.iter().map(|l| (l[0], l[1])).collect();
        let mut spec = WorkSpectrum::from_f64_lines(
            &pairs,
            raw.convention,
            crate::scalar::DEFAULT_PRECISION_BITS,
        )
        .map_err(serde::de::Error::custom)?;
        spec.tail_bound = spec.tail_bound.max(raw.tail_bound);
        Ok(spec)
    }
}

/// Work spectrum of a single oscillator whose frequency jumps from `omega0` to
/// `omega1`, truncated once the remaining mass is below `tail_tol`.
///
/// Only even levels are populated: p_{2m} = √(1−η²)·(2m−1)!!/(2m)!!·η^{2m}
/// with η = (ω₀−ω₁)/(ω₀+ω₁).
pub fn oscillator_overlaps(
    omega0: f64,
    omega1: f64,
    tail_tol: f64,
    convention: Convention,
    bits: usize,
) -> Result<WorkSpectrum> {
    if !(omega0 > 0.0 && omega0.is_finite() && omega1 > 0.0 && omega1.is_finite()) {
        return Err(Error::domain(format!(
            "frequencies must be positive and finite, got ω₀={omega0}, ω₁={omega1}"
        )));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::arg(format!("tail tolerance {tail_tol} outside (0,1)")));
    }
    let w0 = Real::from_f64(omega0, bits);
    let w1 = Real::from_f64(omega1, bits);
    let sum = w0.clone() + w1.clone();
    let eta = (w0.clone() - w1.clone()) / sum.clone();
    let eta_sq = eta.clone() * eta;
    let four = w0.from_i64_like(4);
    // 1 − η² = 4ω₀ω₁/(ω₀+ω₁)², formed without cancellation.
    let one_minus = four * w0.clone() * w1.clone() / (sum.clone() * sum);
    let half = w0.from_i64_like(1) / w0.from_i64_like(2);
    let e0 = w0.clone() * half.clone();
    let offset = match convention {
        Convention::Hamiltonian => w0.zero_like(),
        Convention::Work => -e0.clone(),
    };
    let energy = |j: usize| w1.from_i64_like(j as i64) * w1.clone() + half.clone() * w1.clone() + offset.clone();

    let ratio = eta_sq.to_f64();
    let mut p = one_minus.clone().sqrt();
    let mut lines = vec![(energy(0), p.clone())];
    let mut j = 0usize;
    let tail_bound = loop {
        if eta_sq.is_zero() {
            break 0.0;
        }
        // Σ_{m≥1} p_{j+2m} ≤ p_j·η²/(1−η²)
        let bound = (p.clone() * eta_sq.clone() / one_minus.clone()).to_f64();
        if bound < tail_tol {
            break bound;
        }
        let jj = w0.from_i64_like(j as i64);
        p = p * eta_sq.clone() * (jj.clone() + w0.from_i64_like(1)) / (jj + w0.from_i64_like(2));
        j += 2;
        lines.push((energy(j), p.clone()));
    };
    let tail = (tail_bound > 0.0).then(|| TailEnvelope {
        last_weight: p.to_f64(),
        last_energy: energy(j).to_f64(),
        ratio,
        spacing: 2.0 * omega1,
    });
    let mut spec = WorkSpectrum::from_lines(lines, convention)?;
    spec.tail_bound = tail_bound;
    spec.tail = tail;
    spec.ground_energy = Some(e0);
    Ok(spec)
}

/// Moments M₀..M_K with a per-entry truncation error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence<T> {
    pub entries: Vec<Complex<T>>,
    /// Upper bound on |error| of each entry from spectrum truncation.
    pub errors: Vec<f64>,
    pub convention: Convention,
}

impl<T: Scalar> MomentSequence<T> {
    /// Moments known exactly.
    pub fn exact(entries: Vec<Complex<T>>, convention: Convention) -> Self {
        let errors = vec![0.0; entries.len()];
        MomentSequence { entries, errors, convention }
    }

    /// Highest available order K.
    pub fn order(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }
}

/// Cumulants β₁..β_K.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSequence<T> {
    pub entries: Vec<Complex<T>>,
    pub convention: Convention,
}

impl<T: Scalar> CumulantSequence<T> {
    pub fn real_parts(&self) -> Vec<T> {
        self.entries.iter().map(|c| c.re.clone()).collect()
    }
}

/// M_n = (−i)ⁿ Σ_j p_j W_jⁿ for n ≤ `n_max`.
///
/// M₀ is fixed to 1 (the missing mass is carried in `errors[0]`). Fails with
/// a precision error at the first order whose truncation error exceeds
/// `tol·max(1, |M_n|)`.
pub fn work_moments(spec: &WorkSpectrum, n_max: usize, tol: f64) -> Result<MomentSequence<Real>> {
    let like = spec.lines[0].weight.clone();
    let mut powers: Vec<Real> = spec.lines.iter().map(|l| l.weight.clone()).collect();
    let mut entries = vec![Complex::real(like.one_like())];
    let mut errors = vec![spec.tail_bound];
    for n in 1..=n_max {
        let mut acc = like.zero_like();
        for (pw, l) in powers.iter_mut().zip(&spec.lines) {
            *pw = pw.clone() * l.energy.clone();
            acc = acc + pw.clone();
        }
        let err = spec.truncation_error(n);
        let scale = acc.to_f64().abs().max(1.0);
        if !(err <= tol * scale) {
            return Err(Error::Precision {
                index: n,
                detail: format!(
                    "spectrum truncation error {err:e} exceeds tolerance for moment {n}; lower the tail tolerance"
                ),
            });
        }
        entries.push(Complex::real(acc) * Complex::minus_i_pow(n, &like));
        errors.push(err);
    }
    Ok(MomentSequence { entries, errors, convention: spec.convention })
}

/// G(t) = Σ_j p_j e^{−iW_j t}.
pub fn characteristic_function(spec: &WorkSpectrum, t: f64) -> Complex64 {
    spec.lines
        .iter()
        .map(|l| {
            let (p, w) = (l.weight.to_f64(), l.energy.to_f64());
            Complex64::from_polar(p, -w * t)
        })
        .sum()
}

/// Cumulants β₁..β_{n_max} of a moment sequence.
pub fn cumulants<T: Scalar>(m: &MomentSequence<T>, n_max: usize) -> Result<CumulantSequence<T>> {
    Ok(CumulantSequence {
        entries: bell::cumulants_from_moments(&m.entries, n_max)?,
        convention: m.convention,
    })
}

/// Cumulants directly from a spectrum.
pub fn spectrum_cumulants(spec: &WorkSpectrum, n_max: usize, tol: f64) -> Result<CumulantSequence<Real>> {
    cumulants(&work_moments(spec, n_max, tol)?, n_max)
}

/// 𝒫(t) = |G(t)|².
pub fn survival_probability(spec: &WorkSpectrum, t: f64) -> f64 {
    characteristic_function(spec, t).norm_sqr()
}

/// Least-squares fit of 1−𝒫(t) ≈ s·t² + c·t⁴ on `samples` equispaced points of
/// (0, t_max]; returns the quadratic coefficient `s`, which estimates Var W.
pub fn short_time_variance(spec: &WorkSpectrum, t_max: f64, samples: usize) -> Result<f64> {
    if !(t_max > 0.0) || samples < 2 {
        return Err(Error::arg("need t_max > 0 and at least two samples"));
    }
    let norm = spec.total_weight().to_f64().powi(2);
    let (mut s22, mut s24, mut s44, mut y2, mut y4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 1..=samples {
        let t = t_max * i as f64 / samples as f64;
        let y = norm - survival_probability(spec, t);
        let (u, v) = (t * t, t.powi(4));
        s22 += u * u;
        s24 += u * v;
        s44 += v * v;
        y2 += u * y;
        y4 += v * y;
    }
    let det = s22 * s44 - s24 * s24;
    Ok((y2 * s44 - y4 * s24) / det)
}

/// Mean and variance of a spectrum, at its working precision.
pub fn mean_and_variance(spec: &WorkSpectrum) -> (Real, Real) {
    let total = spec.total_weight();
    let zero = total.zero_like();
    let mut m1 = zero.clone();
    let mut m2 = zero;
    for l in &spec.lines {
        let pw = l.weight.clone() * l.energy.clone();
        m1 = m1 + pw.clone();
        m2 = m2 + pw * l.energy.clone();
    }
    let mean = m1 / total.clone();
    let var = m2 / total - mean.clone() * mean.clone();
    (mean, var)
}
