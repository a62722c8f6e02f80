//! Time evolution on the Krylov chain, iφ̇_n = a_nφ_n + b_nφ_{n−1} + b_{n+1}φ_{n+1},
//! with φ(0) = e₀, and the spread complexity Σ n|φ_n|².
//!
//! Integration is classical fourth-order Runge–Kutta. Infinite chains are
//! truncated; the truncation length doubles until the last site stays below
//! the tolerance over the whole time grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lanczos::LanczosCoefficients;

/// Default cap on the truncation length.
pub const DEFAULT_MAX_SITES: usize = 4096;

/// Source of Lanczos coefficients, finite or generated on demand.
pub trait ChainCoefficients {
    fn a(&self, n: usize) -> f64;

    /// Coupling between sites n−1 and n (n ≥ 1).
    fn b(&self, n: usize) -> f64;

    /// Number of sites, `None` for an infinite chain.
    fn length(&self) -> Option<usize>;
}

impl ChainCoefficients for LanczosCoefficients<f64> {
    fn a(&self, n: usize) -> f64 {
        self.a[n]
    }

    fn b(&self, n: usize) -> f64 {
        self.b_squared[n - 1].sqrt()
    }

    fn length(&self) -> Option<usize> {
        Some(self.a.len())
    }
}

/// Infinite chain defined by two closures.
pub struct GeneratedChain<A, B> {
    a: A,
    b: B,
}

impl<A: Fn(usize) -> f64, B: Fn(usize) -> f64> GeneratedChain<A, B> {
    pub fn new(a: A, b: B) -> Self {
        GeneratedChain { a, b }
    }
}

impl<A: Fn(usize) -> f64, B: Fn(usize) -> f64> ChainCoefficients for GeneratedChain<A, B> {
    fn a(&self, n: usize) -> f64 {
        (self.a)(n)
    }

    fn b(&self, n: usize) -> f64 {
        (self.b)(n)
    }

    fn length(&self) -> Option<usize> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Initial truncation length for infinite chains.
    pub n_trunc: usize,
    /// Target for the last-site population and the norm defect.
    pub tol: f64,
    /// Largest step allowed regardless of the coefficients.
    pub dt_max: f64,
    pub max_sites: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { n_trunc: 32, tol: 1e-10, dt_max: f64::INFINITY, max_sites: DEFAULT_MAX_SITES }
    }
}

/// Wavefunction on the Krylov chain at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovState {
    pub phi: Vec<Complex64>,
    pub t: f64,
    /// |1 − Σ|φ_n|²|.
    pub norm_defect: f64,
}

impl KrylovState {
    pub fn initial(n: usize) -> Self {
        let mut phi = vec![Complex64::new(0.0, 0.0); n.max(1)];
        phi[0] = Complex64::new(1.0, 0.0);
        KrylovState { phi, t: 0.0, norm_defect: 0.0 }
    }

    /// Upper estimate of the error of [`spread_complexity`] from truncation
    /// and norm drift.
    pub fn complexity_error(&self) -> f64 {
        let n = self.phi.len();
        n as f64 * self.phi[n - 1].norm_sqr() + spread_complexity(self) * self.norm_defect
    }
}

/// 𝒞 = Σ n|φ_n|².
pub fn spread_complexity(state: &KrylovState) -> f64 {
    state
        .phi
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p.norm_sqr())
        .sum()
}

/// |φ₀|², the survival probability of the initial state.
pub fn survival_from_phi(state: &KrylovState) -> f64 {
    state.phi[0].norm_sqr()
}

/// Tridiagonal generator on a fixed number of sites.
#[derive(Clone, Debug)]
pub struct Propagator {
    a: Vec<f64>,
    /// `b[i]` couples sites i and i+1.
    b: Vec<f64>,
    scale: f64,
}

impl Propagator {
    pub fn new<C: ChainCoefficients + ?Sized>(coeffs: &C, sites: usize) -> Result<Self> {
        let sites = match coeffs.length() {
            Some(l) => sites.min(l),
            None => sites,
        }
        .max(1);
        let a: Vec<f64> = (0..sites).map(|n| coeffs.a(n)).collect();
        let b: Vec<f64> = (1..sites).map(|n| coeffs.b(n)).collect();
        if let Some(bad) = a.iter().chain(&b).position(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite Lanczos coefficient (entry {bad})")));
        }
        let scale = a.iter().chain(&b).fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(Propagator { a, b, scale })
    }

    pub fn sites(&self) -> usize {
        self.a.len()
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// out = −i·J·phi
    fn derivative(&self, phi: &[Complex64], out: &mut [Complex64]) {
        let n = self.a.len();
        for i in 0..n {
            let mut acc = phi[i] * self.a[i];
            if i > 0 {
                acc += phi[i - 1] * self.b[i - 1];
            }
            if i + 1 < n {
                acc += phi[i + 1] * self.b[i];
            }
            out[i] = Complex64::new(acc.im, -acc.re);
        }
    }

    /// Advances `phi` by `duration` in equal RK4 steps no longer than `h_max`.
    /// Returns the number of steps taken.
    pub fn advance(&self, phi: &mut [Complex64], duration: f64, h_max: f64) -> usize {
        if duration <= 0.0 {
            return 0;
        }
        let steps = (duration / h_max).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let n = phi.len();
        let zero = Complex64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
        for _ in 0..steps {
            self.derivative(phi, &mut k1);
            for i in 0..n {
                tmp[i] = phi[i] + k1[i] * (0.5 * h);
            }
            self.derivative(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = phi[i] + k2[i] * (0.5 * h);
            }
            self.derivative(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = phi[i] + k3[i] * h;
            }
            self.derivative(&tmp, &mut k4);
            for i in 0..n {
                phi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        steps
    }
}

fn norm_defect(phi: &[Complex64]) -> f64 {
    (1.0 - phi.iter().map(|p| p.norm_sqr()).sum::<f64>()).abs()
}

/// One pass over the grid at fixed truncation; returns the states and the
/// largest last-site population seen.
fn run(prop: &Propagator, t_grid: &[f64], h_max: f64) -> (Vec<KrylovState>, f64) {
    let sites = prop.sites();
    let mut phi = KrylovState::initial(sites).phi;
    let mut t_now = 0.0;
    let mut tail = 0.0f64;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        prop.advance(&mut phi, t - t_now, h_max);
        t_now = t;
        tail = tail.max(phi[sites - 1].norm_sqr());
        out.push(KrylovState { phi: phi.clone(), t, norm_defect: norm_defect(&phi) });
    }
    (out, tail)
}

/// Evolves e₀ over `t_grid` (non-decreasing, starting at t ≥ 0).
///
/// The step is min(dt_max, 0.01/max|a,b|). Infinite chains are truncated at
/// `n_trunc` sites and the truncation doubles until the last site population,
/// weighted by the site count, stays below `tol`; exceeding `max_sites` is a
/// truncation error. Runs whose
/// norm defect exceeds 10·tol are repeated with halved steps.
pub fn evolve<C: ChainCoefficients + ?Sized>(
    coeffs: &C,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<KrylovState>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] >= w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::arg("time grid must be finite, non-negative and non-decreasing"));
    }
    if !(opts.tol > 0.0) || !(opts.dt_max > 0.0) {
        return Err(Error::arg("tolerance and step bound must be positive"));
    }
    let mut sites = opts.n_trunc.max(2);
    loop {
        let prop = Propagator::new(coeffs, sites)?;
        let closed = coeffs.length().is_some_and(|l| prop.sites() >= l);
        let mut h_max = if prop.scale() > 0.0 { 0.01 / prop.scale() } else { f64::INFINITY };
        h_max = h_max.min(opts.dt_max);
        let mut attempt = 0;
        let (states, tail) = loop {
            let (states, tail) = run(&prop, t_grid, h_max);
            let worst = states.iter().map(|s| s.norm_defect).fold(0.0, f64::max);
            if worst < 10.0 * opts.tol {
                break (states, tail);
            }
            attempt += 1;
            if attempt > 6 || !h_max.is_finite() {
                return Err(Error::Precision {
                    index: prop.sites(),
                    detail: format!("norm defect {worst:e} does not reach 10·tol with refined steps"),
                });
            }
            h_max /= 2.0;
        };
        if closed || tail * (prop.sites() as f64) < opts.tol {
            return Ok(states);
        }
        if sites >= opts.max_sites {
            return Err(Error::Truncation(format!(
                "last-site population {tail:e} ≥ {:e} with {sites} sites",
                opts.tol
            )));
        }
        sites = (sites * 2).min(opts.max_sites);
    }
}
