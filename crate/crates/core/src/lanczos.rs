//! Lanczos coefficients from the moments of the initial state.
//!
//! With h_n = ⟨ψ₀|Hⁿ|ψ₀⟩ the Krylov basis of |ψ₀⟩ is the sequence of monic
//! orthogonal polynomials of the spectral measure, and (a_n, b_n) are their
//! recurrence coefficients. They are computed with the classical Chebyshev
//! algorithm on ordinary moments, which only needs field operations and runs
//! unchanged on exact rationals. Only b_n² is produced; b_n itself needs a
//! square root and is available for float types.

use serde::{Deserialize, Serialize};

use crate::bell;
use crate::error::{Error, Result};
use crate::scalar::{Complex, FloatScalar, Real, RealScalar, MAX_PRECISION_BITS};
use crate::workstats::{CumulantSequence, MomentSequence};

/// h₀, h₁, … with h_n = ⟨Hⁿ⟩ = iⁿM_n.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMoments<T>(pub Vec<T>);

impl<T> HamiltonianMoments<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Diagonal a₀..a_{K−1} and squared off-diagonal b₁²..b_{K−1}² of a Jacobi
/// matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LanczosCoefficients<T> {
    pub a: Vec<T>,
    /// `b_squared[i]` is b_{i+1}².
    pub b_squared: Vec<T>,
    /// The chain ends after `a.len()` sites (some b_n vanished).
    pub terminated: bool,
    /// Working precision of the entries; `None` when exact.
    pub precision_bits: Option<usize>,
}

impl<T: RealScalar> LanczosCoefficients<T> {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn to_f64(&self) -> LanczosCoefficients<f64> {
        LanczosCoefficients {
            a: self.a.iter().map(|x| x.to_f64()).collect(),
            b_squared: self.b_squared.iter().map(|x| x.to_f64()).collect(),
            terminated: self.terminated,
            precision_bits: self.precision_bits,
        }
    }
}

impl<T: FloatScalar> LanczosCoefficients<T> {
    /// b₁..b_{K−1}.
    pub fn b(&self) -> Vec<T> {
        self.b_squared.iter().map(|x| x.sqrt()).collect()
    }
}

impl LanczosCoefficients<f64> {
    /// Coefficients given directly as `a` and `b` (not squared).
    pub fn from_ab(a: Vec<f64>, b: Vec<f64>, terminated: bool) -> Result<Self> {
        if a.is_empty() || b.len() + 1 != a.len() {
            return Err(Error::arg(format!(
                "need len(b) = len(a) − 1, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) || b.iter().any(|&x| x < 0.0) {
            return Err(Error::arg("coefficients must be finite with b ≥ 0"));
        }
        Ok(LanczosCoefficients {
            a,
            b_squared: b.iter().map(|x| x * x).collect(),
            terminated,
            precision_bits: Some(53),
        })
    }
}

/// JSON form `{"a": [...], "b": [...], "terminated": bool, "precision_bits": n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosRecord {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub terminated: bool,
    #[serde(default)]
    pub precision_bits: Option<usize>,
}

impl<T: FloatScalar> From<&LanczosCoefficients<T>> for LanczosRecord {
    fn from(lc: &LanczosCoefficients<T>) -> Self {
        LanczosRecord {
            a: lc.a.iter().map(|x| x.to_f64()).collect(),
            b: lc.b().iter().map(|x| x.to_f64()).collect(),
            terminated: lc.terminated,
            precision_bits: lc.precision_bits,
        }
    }
}

impl TryFrom<LanczosRecord> for LanczosCoefficients<f64> {
    type Error = Error;

    fn try_from(r: LanczosRecord) -> Result<Self> {
        let mut lc = LanczosCoefficients::from_ab(r.a, r.b, r.terminated)?;
        lc.precision_bits = r.precision_bits;
        Ok(lc)
    }
}

/// h_n = iⁿM_n. Imaginary residues above the working noise floor (or the
/// recorded truncation error) mean the moments cannot come from a Hermitian
/// problem.
pub fn hamiltonian_moments<T: RealScalar>(m: &MomentSequence<T>) -> Result<HamiltonianMoments<T>> {
    if m.entries.is_empty() {
        return Err(Error::arg("moment sequence is empty"));
    }
    let like = m.entries[0].re.clone();
    if m.entries[0] != Complex::real(like.one_like()) {
        return Err(Error::domain("M₀ must equal 1"));
    }
    let noise = like.noise_floor();
    let mut out = Vec::with_capacity(m.entries.len());
    for (n, mn) in m.entries.iter().enumerate() {
        let h = mn.clone() * Complex::i_pow(n, &like);
        let scale = if h.re.abs() > like.one_like() { h.re.abs() } else { like.one_like() };
        let allowed = noise.clone() * scale.clone();
        let err = m.errors.get(n).copied().unwrap_or(0.0);
        if h.im.abs() > allowed && h.im.abs().to_f64() > err {
            return Err(Error::domain(format!(
                "moment {n} has imaginary part {:e} after rotation; not a Hermitian moment sequence",
                h.im.to_f64()
            )));
        }
        out.push(h.re);
    }
    Ok(HamiltonianMoments(out))
}

enum Failure {
    Negative { index: usize, value: f64 },
    Other(Error),
}

/// Chebyshev algorithm. Uses h₀..h_{2K−1}; when h_{2K} is also supplied,
/// b_K² is evaluated to decide whether the chain ends at K sites.
fn chebyshev<T: RealScalar>(h: &[T], k: usize) -> std::result::Result<LanczosCoefficients<T>, Failure> {
    if k == 0 {
        return Err(Failure::Other(Error::arg("need K ≥ 1")));
    }
    if h.len() < 2 * k {
        return Err(Failure::Other(Error::arg(format!(
            "K = {k} needs {} moments, got {}",
            2 * k,
            h.len()
        ))));
    }
    let one = h[0].one_like();
    let noise = h[0].noise_floor();
    if (h[0].clone() - one.clone()).abs() > noise {
        return Err(Failure::Other(Error::domain("h₀ must equal 1")));
    }
    let lim = h.len().min(2 * k + 1);
    let h2 = if h.len() > 2 { h[2].abs() } else { one.clone() };
    let threshold = noise * if h2 > one { h2 } else { one };

    let zero = h[0].zero_like();
    let mut older: Vec<T> = vec![zero.clone(); lim];
    let mut prev: Vec<T> = h[..lim].to_vec();
    let mut a = vec![h[1].clone() / h[0].clone()];
    let mut b_squared: Vec<T> = Vec::new();
    let mut terminated = false;

    for j in 1..=k {
        if 2 * j + 1 > lim {
            break;
        }
        let bsq_prev = if j >= 2 { b_squared[j - 2].clone() } else { zero.clone() };
        let a_prev = a[j - 1].clone();
        let mut cur = vec![zero.clone(); lim];
        for l in j..lim - j {
            cur[l] = prev[l + 1].clone() - a_prev.clone() * prev[l].clone() - bsq_prev.clone() * older[l].clone();
        }
        let bsq = cur[j].clone() / prev[j - 1].clone();
        if bsq <= threshold {
            if bsq.clone() + threshold.clone() < zero {
                return Err(Failure::Negative { index: j, value: bsq.to_f64() });
            }
            terminated = true;
            break;
        }
        if j == k {
            break;
        }
        b_squared.push(bsq);
        if 2 * j + 2 > lim {
            break;
        }
        a.push(cur[j + 1].clone() / cur[j].clone() - prev[j].clone() / prev[j - 1].clone());
        older = prev;
        prev = cur;
    }
    let precision_bits = h[0].precision_bits();
    Ok(LanczosCoefficients { a, b_squared, terminated, precision_bits })
}

fn failure_to_error(f: Failure, exact: bool) -> Error {
    match f {
        Failure::Other(e) => e,
        Failure::Negative { index, value } if exact => Error::domain(format!(
            "b_{index}² = {value:e} < 0: moments violate Hankel positivity"
        )),
        Failure::Negative { index, value } => Error::Precision {
            index,
            detail: format!("b_{index}² = {value:e} < 0 at working precision; increase the precision"),
        },
    }
}

/// Lanczos coefficients a₀..a_{K−1}, b₁..b_{K−1} from h₀..h_{2K−1} (plus an
/// optional h_{2K} for the termination test).
///
/// A b_n² below 2^{−p/2}·max(1, h₂) ends the chain with `terminated` set; a
/// clearly negative one is a precision error (exact inputs: a domain error).
pub fn lanczos_from_moments<T: RealScalar>(h: &HamiltonianMoments<T>, k: usize) -> Result<LanczosCoefficients<T>> {
    if h.is_empty() {
        return Err(Error::arg("no moments"));
    }
    let exact = h.0[0].precision_bits().is_none();
    chebyshev(&h.0, k).map_err(|f| failure_to_error(f, exact))
}

/// [`lanczos_from_moments`] with the precision-doubling policy: `source` is
/// asked for the moments at `start_bits`, and again at twice the precision
/// whenever a b_n² comes out negative, up to 4096 bits. A negative value that
/// does not shrink with precision is reported as a Hankel violation.
pub fn lanczos_adaptive<F>(k: usize, start_bits: usize, mut source: F) -> Result<LanczosCoefficients<Real>>
where
    F: FnMut(usize) -> Result<HamiltonianMoments<Real>>,
{
    let mut bits = start_bits.max(64);
    let mut last: Option<(usize, f64)> = None;
    loop {
        let h = source(bits)?;
        match chebyshev(&h.0, k) {
            Ok(lc) => return Ok(lc),
            Err(Failure::Negative { index, value }) => {
                if let Some((i0, v0)) = last {
                    if i0 == index && value.abs() > 0.5 * v0.abs() {
                        return Err(Error::domain(format!(
                            "b_{index}² = {value:e} < 0 at {bits} bits: moments violate Hankel positivity"
                        )));
                    }
                }
                if bits * 2 > MAX_PRECISION_BITS {
                    return Err(failure_to_error(Failure::Negative { index, value }, false));
                }
                last = Some((index, value));
                bits *= 2;
            }
            Err(f) => return Err(failure_to_error(f, false)),
        }
    }
}

/// (Jⁿ)₀₀ of the Jacobi matrix with diagonal `a` and off-diagonal b.
///
/// Uses the similar matrix with unit subdiagonal and b² on the
/// superdiagonal, so no square roots are needed and exact inputs give exact
/// results.
pub fn reconstruct_moments<T: RealScalar>(lc: &LanczosCoefficients<T>, n: usize) -> T {
    reconstruct_all(lc, n).pop().expect("n+1 entries")
}

/// `[(J⁰)₀₀, …, (Jⁿ)₀₀]`.
pub fn reconstruct_all<T: RealScalar>(lc: &LanczosCoefficients<T>, n: usize) -> Vec<T> {
    let dim = lc.a.len();
    let zero = lc.a[0].zero_like();
    let mut v = vec![zero.clone(); dim];
    v[0] = zero.one_like();
    let mut out = vec![v[0].clone()];
    for _ in 0..n {
        let mut next = vec![zero.clone(); dim];
        for i in 0..dim {
            let mut acc = lc.a[i].clone() * v[i].clone();
            if i + 1 < dim {
                acc = acc + lc.b_squared[i].clone() * v[i + 1].clone();
            }
            if i > 0 {
                acc = acc + v[i - 1].clone();
            }
            next[i] = acc;
        }
        v = next;
        out.push(v[0].clone());
    }
    out
}

/// Deviations of the computed coefficients from the closed-form moment
/// expressions a₀ = h₁, b₁² = h₂ − h₁², a₁ = (h₃ − h₁³)/(h₂ − h₁²) − 2h₁.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub a0_minus_mean_w: f64,
    pub b1sq_minus_var_w: f64,
    pub a1_check: f64,
}

impl IdentityCheck {
    pub fn max_abs(&self) -> f64 {
        self.a0_minus_mean_w
            .abs()
            .max(self.b1sq_minus_var_w.abs())
            .max(self.a1_check.abs())
    }
}

/// Exact-arithmetic residuals of the three low-order identities.
pub fn identity_residuals<T: RealScalar>(h: &HamiltonianMoments<T>, lc: &LanczosCoefficients<T>) -> Result<[T; 3]> {
    let h = &h.0;
    if h.len() < 4 {
        return Err(Error::arg("identities need h₀..h₃"));
    }
    let zero = h[0].zero_like();
    let (h1, h2, h3) = (h[1].clone(), h[2].clone(), h[3].clone());
    let var = h2 - h1.clone() * h1.clone();
    let r0 = lc.a[0].clone() - h1.clone();
    let r1 = match lc.b_squared.first() {
        Some(b1sq) => b1sq.clone() - var.clone(),
        None if lc.terminated => -var.clone(),
        None => zero.clone(),
    };
    let r2 = match lc.a.get(1) {
        Some(a1) if !var.is_zero() => {
            let third = h3 - h1.clone() * h1.clone() * h1.clone();
            let two = h1.from_i64_like(2);
            a1.clone() - (third / var - two * h1)
        }
        _ => zero,
    };
    Ok([r0, r1, r2])
}

pub fn identity_check<T: RealScalar>(h: &HamiltonianMoments<T>, lc: &LanczosCoefficients<T>) -> Result<IdentityCheck> {
    let [r0, r1, r2] = identity_residuals(h, lc)?;
    Ok(IdentityCheck {
        a0_minus_mean_w: r0.to_f64(),
        b1sq_minus_var_w: r1.to_f64(),
        a1_check: r2.to_f64(),
    })
}

/// Cumulants → moments → Lanczos coefficients. Needs β₁..β_{2K−1}.
pub fn lanczos_from_cumulants<T: RealScalar>(beta: &CumulantSequence<T>, k: usize) -> Result<LanczosCoefficients<T>> {
    if k == 0 || beta.entries.len() < 2 * k - 1 {
        return Err(Error::arg(format!(
            "K = {k} needs {} cumulants, got {}",
            2 * k - 1,
            beta.entries.len()
        )));
    }
    let m = bell::moments_from_cumulants(&beta.entries, 2 * k - 1)?;
    let h = hamiltonian_moments(&MomentSequence::exact(m, beta.convention))?;
    lanczos_from_moments(&h, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{RBig, Scalar};
    use crate::workstats::{oscillator_overlaps, work_moments, Convention};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> RBig {
        RBig::from(n) / RBig::from(d)
    }

    /// ⟨Wⁿ⟩ of a finite rational spectrum.
    fn spectrum_moments(lines: &[(RBig, RBig)], n: usize) -> HamiltonianMoments<RBig> {
        HamiltonianMoments(
            (0..=n)
                .map(|k| {
                    lines
                        .iter()
                        .fold(RBig::ZERO, |acc, (w, p)| acc + p.clone() * w.powi(k as u32))
                })
                .collect(),
        )
    }

    #[test]
    fn delta_terminates_after_one_site() {
        let c = q(7, 4);
        let h = spectrum_moments(&[(c.clone(), RBig::ONE)], 4);
        let lc = lanczos_from_moments(&h, 2).unwrap();
        assert_eq!(lc.a, vec![c]);
        assert!(lc.b_squared.is_empty());
        assert!(lc.terminated);
    }

    #[test]
    fn two_point_law() {
        let h = spectrum_moments(&[(RBig::ZERO, q(1, 2)), (RBig::ONE, q(1, 2))], 6);
        assert_eq!(h.0[1..4], [q(1, 2), q(1, 2), q(1, 2)]);
        let lc = lanczos_from_moments(&h, 3).unwrap();
        assert_eq!(lc.a, vec![q(1, 2), q(1, 2)]);
        assert_eq!(lc.b_squared, vec![q(1, 4)]);
        assert!(lc.terminated);
        let [r0, r1, r2] = identity_residuals(&h, &lc).unwrap();
        assert!(r0.is_zero() && r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn moment_rotation() {
        let m = MomentSequence::exact(
            vec![
                Complex::new(RBig::ONE, RBig::ZERO),
                Complex::new(RBig::ZERO, q(-1, 2)),
                Complex::new(q(-1, 2), RBig::ZERO),
                Complex::new(RBig::ZERO, q(1, 2)),
            ],
            Convention::Work,
        );
        assert_eq!(hamiltonian_moments(&m).unwrap().0, vec![RBig::ONE, q(1, 2), q(1, 2), q(1, 2)]);
        let mut bad = m.clone();
        bad.entries[1] = Complex::new(q(1, 3), q(-1, 2));
        assert!(matches!(hamiltonian_moments(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn reconstruction_small_cases() {
        let lc = LanczosCoefficients {
            a: vec![q(5, 2)],
            b_squared: vec![],
            terminated: true,
            precision_bits: None,
        };
        assert_eq!(reconstruct_moments(&lc, 5), q(5, 2).powi(5));
        let lc = LanczosCoefficients {
            a: vec![q(1, 2), q(1, 2)],
            b_squared: vec![q(1, 4)],
            terminated: true,
            precision_bits: None,
        };
        assert_eq!(reconstruct_moments(&lc, 2), q(1, 2));
    }

    #[test]
    fn oscillator_matches_closed_form() {
        let bits = 256;
        let spec = oscillator_overlaps(2.0, 1.0, 1e-100, Convention::Hamiltonian, bits).unwrap();
        let m = work_moments(&spec, 12, 1e-60).unwrap();
        let h = hamiltonian_moments(&m).unwrap();
        let lc = lanczos_from_moments(&h, 6).unwrap();
        assert!(!lc.terminated);
        let b = lc.b();
        for n in 0..6 {
            let expect = (2.0 * n as f64 + 0.5) * 1.25;
            let got = lc.a[n].to_f64();
            assert!(((got - expect) / expect).abs() < 1e-20, "a_{n}: {got}");
        }
        for l in 1..6 {
            let expect = 0.5 * ((2 * (2 * l * l - l)) as f64).sqrt() * 0.75;
            let got = b[l - 1].to_f64();
            assert!(((got - expect) / expect).abs() < 1e-15, "b_{l}: {got}");
        }
        // Compare wide values against the closed form at full precision.
        let w = Real::from_i64(1, bits);
        let omega_w1 = Real::from_f64(1.25, bits);
        for n in 0..6 {
            let expect = (w.from_i64_like(4 * n as i64 + 1) / w.from_i64_like(2)) * omega_w1.clone();
            let rel = ((lc.a[n].clone() - expect.clone()) / expect).abs().to_f64();
            assert!(rel < 1e-20, "a_{n} rel {rel:e}");
        }
        let ic = identity_check(&h, &lc).unwrap();
        assert!(ic.max_abs() < 1e-60);
    }

    #[test]
    fn inconsistent_exact_moments_are_rejected() {
        // h₂ < h₁² has no probability measure.
        let h = HamiltonianMoments(vec![RBig::ONE, RBig::ONE, q(1, 2), RBig::ONE]);
        assert!(matches!(lanczos_from_moments(&h, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn adaptive_reports_hankel_violation() {
        let res = lanczos_adaptive(2, 256, |bits| {
            Ok(HamiltonianMoments(
                [1.0, 1.0, 0.5, 1.0].iter().map(|&x| Real::from_f64(x, bits)).collect(),
            ))
        });
        assert!(matches!(res, Err(Error::Domain(_))), "{res:?}");
    }

    #[test]
    fn from_cumulants() {
        let (g1, s2) = (q(3, 2), q(4, 9));
        let beta = CumulantSequence {
            entries: vec![
                Complex::real(g1.clone()),
                Complex::real(s2.clone()),
                Complex::real(RBig::ZERO),
            ],
            convention: Convention::Work,
        };
        let lc = lanczos_from_cumulants(&beta, 2).unwrap();
        assert_eq!(lc.a[0], g1);
        assert_eq!(lc.b_squared[0], s2);
    }

    #[test]
    fn cumulant_route_equals_moment_route() {
        let lines = [(RBig::ZERO, q(1, 2)), (RBig::ONE, q(1, 2))];
        let h = spectrum_moments(&lines, 5);
        let m = MomentSequence::exact(
            h.0.iter()
                .enumerate()
                .map(|(n, x)| Complex::real(x.clone()) * Complex::minus_i_pow(n, &RBig::ONE))
                .collect(),
            Convention::Work,
        );
        let beta = crate::workstats::cumulants(&m, 5).unwrap();
        assert_eq!(lanczos_from_cumulants(&beta, 3).unwrap(), lanczos_from_moments(&h, 3).unwrap());
    }

    #[test]
    fn record_round_trip() {
        let lc = LanczosCoefficients::from_ab(vec![0.5, 0.5], vec![0.5], true).unwrap();
        let rec = LanczosRecord::from(&lc);
        let text = serde_json::to_string(&rec).unwrap();
        assert_eq!(text, r#"{"a":[0.5,0.5],"b":[0.5],"terminated":true,"precision_bits":53}"#);
        let back = LanczosCoefficients::try_from(serde_json::from_str::<LanczosRecord>(&text).unwrap()).unwrap();
        assert_eq!(back, lc);
        assert!(LanczosCoefficients::from_ab(vec![1.0], vec![1.0], false).is_err());
    }

    fn rational_spectrum() -> impl Strategy<Value = Vec<(RBig, RBig)>> {
        prop::collection::vec((-40i64..40, 1i64..20), 1..=8).prop_map(|atoms| {
            let total: i64 = atoms.iter().map(|a| a.1).sum();
            let mut seen = std::collections::BTreeMap::new();
            for (w, p) in atoms {
                *seen.entry(w).or_insert(0i64) += p;
            }
            seen.into_iter()
                .map(|(w, p)| (q(w, 4), q(p, total)))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_round_trip(lines in rational_spectrum(), k in 1usize..=8) {
            let h = spectrum_moments(&lines, (2 * k).max(3));
            let lc = lanczos_from_moments(&h, k).unwrap();
            prop_assert!(lc.len() <= lines.len());
            prop_assert_eq!(lc.terminated, lc.len() < k || lines.len() == k);
            let rec = reconstruct_all(&lc, 2 * k - 1);
            prop_assert_eq!(&rec[..], &h.0[..2 * k]);
            let [r0, r1, r2] = identity_residuals(&h, &lc).unwrap();
            prop_assert!(r0.is_zero() && r1.is_zero() && r2.is_zero());
        }

        #[test]
        fn shift_and_scale_covariance(lines in rational_spectrum(), c in -5i64..5, s in 1i64..4) {
            let k = lines.len().min(4);
            let base = lanczos_from_moments(&spectrum_moments(&lines, 2 * k), k).unwrap();
            let moved: Vec<_> = lines.iter().map(|(w, p)| (w.clone() * RBig::from(s) + RBig::from(c), p.clone())).collect();
            let lc = lanczos_from_moments(&spectrum_moments(&moved, 2 * k), k).unwrap();
            prop_assert_eq!(lc.len(), base.len());
            for (x, y) in lc.a.iter().zip(&base.a) {
                prop_assert_eq!(x.clone(), y.clone() * RBig::from(s) + RBig::from(c));
            }
            for (x, y) in lc.b_squared.iter().zip(&base.b_squared) {
                prop_assert_eq!(x.clone(), y.clone() * RBig::from(s * s));
            }
        }
    }
}
