//! Batch driver behind the `quench-krylov` binary.
//!
//! Every subcommand reads its parameters from flags, from the matching section
//! of a JSON config (`--config`), or both; flags win. Outputs go to `--out`
//! (default: the working directory). CSV values carry 17 significant digits;
//! JSON numbers are doubles unless `--emit-precision full` asks for decimal
//! strings at the working precision.
//!
//! Exit codes: 0 success, 2 invalid input, 3 precision failure,
//! 4 cross-check mismatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bell;
use crate::chain::{
    guaranteed_crossover, mode_lanczos, mode_lanczos_in, mode_taylor_moments, normal_modes, rest_complexity_bound,
    total_spread_complexity, ChainQuench, ModePair, mode_autocorrelation,
};
use crate::error::{Error, Result};
use crate::fieldtheory::{cumulant_densities, gaussian_limit, FieldQuench, QuadratureOptions};
use crate::krylov::{evolve, spread_complexity, survival_from_phi, EvolveOptions, DEFAULT_MAX_SITES};
use crate::lanczos::{
    hamiltonian_moments, identity_check, lanczos_adaptive, reconstruct_all,
    HamiltonianMoments, IdentityCheck, LanczosCoefficients, LanczosRecord,
};
use crate::scalar::{parse_rational, Complex, RBig, Real, DEFAULT_PRECISION_BITS};
use crate::series::{uniform_grid, TimeSeries};
use crate::workstats::{
    cumulants, oscillator_overlaps, survival_probability, work_moments, Convention,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EmitPrecision {
    /// Round-trippable doubles.
    #[default]
    Double,
    /// Decimal strings carrying every digit of the working precision.
    Full,
}

#[derive(Debug, Parser)]
#[command(name = "quench-krylov", version, about = "Work statistics, Lanczos coefficients and spread complexity of sudden quenches")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommonArgs {
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision in bits for arbitrary-precision stages [default: 256].
    #[arg(long, global = true)]
    pub precision_bits: Option<usize>,
    /// Tolerance for cross-checks and truncations [default: 1e-10].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub convention: Option<Convention>,
    /// Seed recorded in the outputs; sampling-based checks use it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub emit_precision: Option<EmitPrecision>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency quench of a periodic harmonic chain.
    Chain(ChainArgs),
    /// Single-oscillator quench, cross-checking closed-form and moment routes.
    Oscillator(OscillatorArgs),
    /// Mass quench of a free boson in d dimensions.
    Field(FieldArgs),
    /// Lanczos coefficients from a moment file.
    Lanczos(LanczosArgs),
    /// Evolve a state on a Lanczos chain read from JSON.
    KrylovEvolve(KrylovArgs),
    /// Moments ↔ cumulants conversion.
    Bell(BellArgs),
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    /// [default: 6]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// [default: 0.01]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Write per-mode Lanczos coefficients to lanczos.json.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub emit_lanczos: Option<bool>,
    /// Coefficients per mode in lanczos.json [default: 8].
    #[arg(long)]
    pub kmax: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorArgs {
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub omega1: Option<f64>,
    /// Number of Lanczos coefficients a₀..a_{K−1} [default: 8].
    #[arg(long)]
    pub kmax: Option<usize>,
    /// [default: 10]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// [default: 0.01]
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub m0: Option<f64>,
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Lᵈ; enables the Gaussian-limit outputs.
    #[arg(long)]
    pub volume: Option<f64>,
    /// Highest cumulant density [default: 4].
    #[arg(long)]
    pub nmax: Option<usize>,
    /// [default: 8]
    #[arg(long)]
    pub kmax: Option<usize>,
    /// [default: 20]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// [default: 0.1]
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanczosArgs {
    /// JSON `{"moments": [h₀, h₁, …]}` with h_n = ⟨Wⁿ⟩; entries are numbers
    /// or exact strings such as "1/3".
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// [default: half the number of moments]
    #[arg(long)]
    pub kmax: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrylovArgs {
    /// JSON `{"a": […], "b": […], "terminated": bool}`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// [default: 10]
    #[arg(long)]
    pub tmax: Option<f64>,
    /// [default: 0.01]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Largest RK4 step [default: dt].
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BellArgs {
    /// JSON with either `"moments"` (M₀, M₁, …) or `"cumulants"` (β₁, β₂, …);
    /// entries are numbers, exact strings, or `[re, im]` pairs.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// [default: as many as the input supports]
    #[arg(long)]
    pub nmax: Option<usize>,
}

/// Layout of a `--config` file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub common: CommonArgs,
    pub chain: ChainArgs,
    pub oscillator: OscillatorArgs,
    pub field: FieldArgs,
    pub lanczos: LanczosArgs,
    pub krylov_evolve: KrylovArgs,
    pub bell: BellArgs,
}

macro_rules! overlay {
    ($ty:ty { $($f:ident),* }) => {
        impl $ty {
            /// Fields set here win over `file`.
            pub fn overlay(self, file: Self) -> Self {
                Self { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

overlay!(CommonArgs { out, precision_bits, tol, convention, seed, emit_precision, config });
overlay!(ChainArgs { n, lambda0, lambda1, coupling, tmax, dt, emit_lanczos, kmax });
overlay!(OscillatorArgs { omega0, omega1, kmax, tmax, dt });
overlay!(FieldArgs { dim, m0, m1, cutoff, volume, nmax, kmax, tmax, dt });
overlay!(LanczosArgs { input, kmax });
overlay!(KrylovArgs { input, tmax, dt, step });
overlay!(BellArgs { input, nmax });

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::arg(format!("missing --{name} (flag or config)")))
}

/// Resolved common settings.
#[derive(Clone, Debug)]
struct Settings {
    out: PathBuf,
    bits: usize,
    tol: f64,
    convention: Convention,
    seed: Option<u64>,
    emit: EmitPrecision,
}

impl Settings {
    fn from_args(c: &CommonArgs) -> Result<Self> {
        let s = Settings {
            out: c.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            bits: c.precision_bits.unwrap_or(DEFAULT_PRECISION_BITS),
            tol: c.tol.unwrap_or(1e-10),
            convention: c.convention.unwrap_or_default(),
            seed: c.seed,
            emit: c.emit_precision.unwrap_or_default(),
        };
        if !(64..=crate::scalar::MAX_PRECISION_BITS).contains(&s.bits) {
            return Err(Error::arg(format!("precision must be within 64..=4096 bits, got {}", s.bits)));
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(Error::arg(format!("tolerance must lie in (0, 1), got {}", s.tol)));
        }
        Ok(s)
    }

    fn real(&self, x: &Real) -> Value {
        match self.emit {
            EmitPrecision::Double => json!(x.to_f64() + 0.0),
            EmitPrecision::Full => Value::String(x.to_string()),
        }
    }

    fn rational(&self, x: &RBig) -> Value {
        match self.emit {
            EmitPrecision::Double => json!(x.to_f64().value() + 0.0),
            EmitPrecision::Full => Value::String(x.to_string()),
        }
    }

    fn reals(&self, xs: &[Real]) -> Value {
        Value::Array(xs.iter().map(|x| self.real(x)).collect())
    }

    fn complex_reals(&self, xs: &[Complex<Real>]) -> Value {
        Value::Array(xs.iter().map(|c| json!([self.real(&c.re), self.real(&c.im)])).collect())
    }
}

/// Files written by one run.
#[derive(Clone, Debug, Default)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

impl Outputs {
    fn json(&mut self, dir: &Path, name: &str, v: &Value) -> Result<()> {
        let path = dir.join(name);
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, dir: &Path, name: &str, s: &TimeSeries) -> Result<()> {
        let path = dir.join(name);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        s.write_csv(&mut f)?;
        f.flush()?;
        self.files.push(path);
        Ok(())
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precision { .. } | Error::Quadrature { .. } | Error::Truncation(_) => 3,
        Error::CrossCheck(_) => 4,
        _ => 2,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code after reporting to stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(out) => {
            for f in out.files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<Outputs> {
    let file = match &cli.common.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<RunConfig>(&text)?
        }
        None => RunConfig::default(),
    };
    let settings = Settings::from_args(&cli.common.clone().overlay(file.common.clone()))?;
    fs::create_dir_all(&settings.out)?;
    let mut out = Outputs::default();
    match cli.command {
        Command::Chain(a) => cmd_chain(&a.overlay(file.chain), &settings, &mut out)?,
        Command::Oscillator(a) => cmd_oscillator(&a.overlay(file.oscillator), &settings, &mut out)?,
        Command::Field(a) => cmd_field(&a.overlay(file.field), &settings, &mut out)?,
        Command::Lanczos(a) => cmd_lanczos(&a.overlay(file.lanczos), &settings, &mut out)?,
        Command::KrylovEvolve(a) => cmd_krylov(&a.overlay(file.krylov_evolve), &settings, &mut out)?,
        Command::Bell(a) => cmd_bell(&a.overlay(file.bell), &settings, &mut out)?,
    }
    Ok(out)
}

fn identity_json(c: &IdentityCheck) -> Value {
    json!({
        "a0_minus_mean_w": c.a0_minus_mean_w + 0.0,
        "b1sq_minus_var_w": c.b1sq_minus_var_w + 0.0,
        "a1_check": c.a1_check + 0.0,
    })
}

fn check_identities(c: &IdentityCheck, tol: f64, what: &str) -> Result<()> {
    if c.max_abs() > tol {
        return Err(Error::CrossCheck(format!(
            "{what}: Lanczos identities violated by {:e} (tolerance {tol:e})",
            c.max_abs()
        )));
    }
    Ok(())
}

fn lanczos_json(lc: &LanczosCoefficients<f64>) -> Value {
    json!({
        "a": lc.a,
        "b": lc.b(),
        "terminated": lc.terminated,
    })
}

fn energy_offset(convention: Convention, omega0: f64) -> f64 {
    match convention {
        Convention::Hamiltonian => 0.0,
        Convention::Work => -0.5 * omega0,
    }
}

fn cmd_chain(a: &ChainArgs, s: &Settings, out: &mut Outputs) -> Result<()> {
    let q = ChainQuench {
        n: required(a.n, "n")?,
        lambda0: required(a.lambda0, "lambda0")?,
        lambda1: required(a.lambda1, "lambda1")?,
        coupling: required(a.coupling, "coupling")?,
    };
    let modes = normal_modes(&q)?;
    let grid = uniform_grid(a.tmax.unwrap_or(6.0), a.dt.unwrap_or(0.01))?;
    let series = total_spread_complexity(&q, &grid)?;

    let mut worst = IdentityCheck { a0_minus_mean_w: 0.0, b1sq_minus_var_w: 0.0, a1_check: 0.0 };
    let mut rows = Vec::with_capacity(modes.len());
    for (idx, m) in modes.iter().enumerate() {
        let w0 = Real::from_f64(m.omega0, s.bits);
        let w1 = Real::from_f64(m.omega1, s.bits);
        let h = hamiltonian_moments(&mode_taylor_moments(&w0, &w1, 4)?)?;
        let lc = mode_lanczos_in(&w0, &w1, 2)?;
        let c = identity_check(&h, &lc)?;
        for (slot, v) in [
            (&mut worst.a0_minus_mean_w, c.a0_minus_mean_w),
            (&mut worst.b1sq_minus_var_w, c.b1sq_minus_var_w),
            (&mut worst.a1_check, c.a1_check),
        ] {
            if v.abs() > slot.abs() {
                *slot = v;
            }
        }
        let shift = energy_offset(s.convention, m.omega0);
        rows.push(json!({
            "k": idx + 1,
            "omega0": m.omega0,
            "omega1": m.omega1,
            "mean_w": m.mean_energy() + shift,
            "var_w": m.energy_variance(),
            "a0": lc.a[0].to_f64() + shift,
            "b1_squared": lc.b_squared.first().map_or(0.0, |x| x.to_f64()),
        }));
    }
    let summary = json!({
        "n": q.n,
        "lambda0": q.lambda0,
        "lambda1": q.lambda1,
        "coupling": q.coupling,
        "convention": s.convention.as_str(),
        "precision_bits": s.bits,
        "seed": s.seed,
        "zero_modes": modes.iter().filter(|m| m.is_zero_mode()).count(),
        "rest_complexity_bound": rest_complexity_bound(&q)?,
        "guaranteed_crossover": guaranteed_crossover(&q)?,
        "modes": rows,
        "identity_check": identity_json(&worst),
    });
    out.csv(&s.out, "complexity.csv", &series)?;
    out.json(&s.out, "summary.json", &summary)?;
    if a.emit_lanczos.unwrap_or(false) {
        let kmax = a.kmax.unwrap_or(8);
        let mut per_mode = Vec::with_capacity(modes.len());
        for (idx, m) in modes.iter().enumerate() {
            let mut lc = mode_lanczos(m, kmax)?;
            let shift = energy_offset(s.convention, m.omega0);
            lc.a.iter_mut().for_each(|x| *x += shift);
            let mut v = lanczos_json(&lc);
            v["k"] = json!(idx + 1);
            v["omega0"] = json!(m.omega0);
            v["omega1"] = json!(m.omega1);
            per_mode.push(v);
        }
        out.json(&s.out, "lanczos.json", &Value::Array(per_mode))?;
    }
    check_identities(&worst, s.tol, "chain")
}

/// Spectrum truncation used for moment-based Lanczos at `bits`: the dropped
/// mass must sit well below the working noise floor.
fn spectrum_tail(bits: usize) -> f64 {
    2f64.powf(-1.3 * bits as f64).max(f64::MIN_POSITIVE)
}

fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

fn cmd_oscillator(a: &OscillatorArgs, s: &Settings, out: &mut Outputs) -> Result<()> {
    let omega0 = required(a.omega0, "omega0")?;
    let omega1 = required(a.omega1, "omega1")?;
    let kmax = a.kmax.unwrap_or(8);
    if kmax == 0 {
        return Err(Error::arg("kmax must be ≥ 1"));
    }
    if !(omega0.is_finite() && omega1.is_finite() && omega1 >= 0.0) {
        return Err(Error::arg(format!("invalid frequencies ω₀={omega0}, ω₁={omega1}")));
    }
    if omega0 == 0.0 {
        return Err(Error::Divergence(
            "ω₀ = 0: the initial state is not normalizable and all the Lanczos coefficients are divergent".into(),
        ));
    }
    let m = ModePair::new(omega0, omega1);
    let shift = energy_offset(s.convention, omega0);

    let mut closed = mode_lanczos_in(&Real::from_f64(omega0, s.bits), &Real::from_f64(omega1, s.bits), kmax)?;
    let shift_real = Real::from_f64(shift, s.bits);
    closed.a.iter_mut().for_each(|x| *x = x.clone() + shift_real.clone());

    let order = 2 * kmax;
    let spectrum = oscillator_overlaps(omega0, omega1, spectrum_tail(s.bits), s.convention, s.bits)?;
    let moments = work_moments(&spectrum, order, s.tol)?;
    let cums = cumulants(&moments, order)?;
    let recursion = lanczos_adaptive(kmax, s.bits, |bits| {
        let spec = oscillator_overlaps(omega0, omega1, spectrum_tail(bits), s.convention, bits)?;
        hamiltonian_moments(&work_moments(&spec, order, s.tol)?)
    })?;
    let h = hamiltonian_moments(&moments)?;
    let identities = identity_check(&h, &recursion)?;

    let (cf, rf) = (closed.to_f64(), recursion.to_f64());
    let mut worst: f64 = 0.0;
    if cf.a.len() != rf.a.len() {
        worst = f64::INFINITY;
    } else {
        for (x, y) in rf.a.iter().zip(&cf.a).chain(rf.b_squared.iter().zip(&cf.b_squared)) {
            worst = worst.max(rel_diff(*x, *y));
        }
    }

    let grid = uniform_grid(a.tmax.unwrap_or(10.0), a.dt.unwrap_or(0.01))?;
    let from_spectrum: Vec<f64> = grid.iter().map(|&t| survival_probability(&spectrum, t)).collect();
    let closed_form = grid
        .iter()
        .map(|&t| mode_autocorrelation(&m, t).map(|z| z.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    let survival = TimeSeries::new(grid).with("survival", from_spectrum)?.with("survival_closed_form", closed_form)?;

    let record = |lc: &LanczosCoefficients<Real>| {
        json!({
            "a": s.reals(&lc.a),
            "b": s.reals(&lc.b()),
            "terminated": lc.terminated,
            "precision_bits": lc.precision_bits,
        })
    };
    let report = json!({
        "omega0": omega0,
        "omega1": omega1,
        "convention": s.convention.as_str(),
        "precision_bits": s.bits,
        "seed": s.seed,
        "moments": s.complex_reals(&moments.entries),
        "moment_errors": moments.errors,
        "cumulants": s.complex_reals(&cums.entries),
        "lanczos_closed_form": record(&closed),
        "lanczos_recursion": record(&recursion),
        "route_max_rel_diff": worst,
        "identity_check": identity_json(&identities),
    });
    out.json(&s.out, "spectrum.json", &serde_json::to_value(&spectrum)?)?;
    out.json(&s.out, "oscillator.json", &report)?;
    out.csv(&s.out, "survival.csv", &survival)?;
    if !(worst <= s.tol) {
        return Err(Error::CrossCheck(format!(
            "closed-form and recursion Lanczos coefficients differ by {worst:e} (tolerance {:e})",
            s.tol
        )));
    }
    check_identities(&identities, s.tol, "oscillator")
}

fn cmd_field(a: &FieldArgs, s: &Settings, out: &mut Outputs) -> Result<()> {
    let q = FieldQuench {
        dim: required(a.dim, "dim")?,
        m0: required(a.m0, "m0")?,
        m1: required(a.m1, "m1")?,
        cutoff: required(a.cutoff, "cutoff")?,
        volume: a.volume,
        quadrature: QuadratureOptions::default(),
    };
    q.validate()?;
    let nmax = a.nmax.unwrap_or(4);
    if nmax == 0 {
        return Err(Error::arg("nmax must be ≥ 1"));
    }
    let densities = cumulant_densities(&q, nmax)?;
    for c in densities.iter().filter(|c| c.divergent) {
        eprintln!(
            "warning: cumulant density β{} is UV divergent in d = {} (d/d ln Λ = {:e})",
            c.order, q.dim, c.uv_sensitivity
        );
    }
    let mut report = json!({
        "d": q.dim,
        "m0": q.m0,
        "m1": q.m1,
        "cutoff": q.cutoff,
        "volume": q.volume,
        "cumulant_densities": densities.iter().map(|c| c.value).collect::<Vec<_>>(),
        "uv_sensitivity": densities.iter().map(|c| c.uv_sensitivity).collect::<Vec<_>>(),
        "uv_divergent": densities.iter().map(|c| c.divergent).collect::<Vec<_>>(),
    });
    if q.volume.is_some() {
        let law = gaussian_limit(&q)?;
        let lc = law.lanczos(a.kmax.unwrap_or(8))?;
        report["gaussian"] = json!({
            "gamma1": law.gamma1,
            "gamma2": law.gamma2,
            "volume": law.volume,
            "spread_rate": law.spread_rate(),
            "mean_divergent": law.mean_divergent,
            "variance_divergent": law.variance_divergent,
        });
        report["lanczos"] = lanczos_json(&lc);
        let grid = uniform_grid(a.tmax.unwrap_or(20.0), a.dt.unwrap_or(0.1))?;
        let c: Vec<f64> = grid.iter().map(|&t| law.spread_complexity(t)).collect();
        out.csv(&s.out, "complexity.csv", &TimeSeries::new(grid).with("complexity", c)?)?;
    }
    out.json(&s.out, "field.json", &report)
}

/// A JSON number or an exact string such as "1/3" or "0.1".
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Exact {
    Number(f64),
    Text(String),
}

impl Exact {
    fn to_rational(&self) -> Result<RBig> {
        match self {
            Exact::Number(x) => RBig::try_from(*x).map_err(|_| Error::arg(format!("not a finite number: {x}"))),
            Exact::Text(t) => parse_rational(t),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ExactComplex {
    Pair([Exact; 2]),
    Real(Exact),
}

impl ExactComplex {
    fn to_complex(&self) -> Result<Complex<RBig>> {
        match self {
            ExactComplex::Pair([re, im]) => Ok(Complex::new(re.to_rational()?, im.to_rational()?)),
            ExactComplex::Real(re) => Ok(Complex::new(re.to_rational()?, RBig::ZERO)),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentFile {
    moments: Vec<Exact>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_lanczos(a: &LanczosArgs, s: &Settings, out: &mut Outputs) -> Result<()> {
    let input: MomentFile = read_json(&required(a.input.clone(), "input")?)?;
    let exact: Vec<RBig> = input.moments.iter().map(Exact::to_rational).collect::<Result<_>>()?;
    let kmax = a.kmax.unwrap_or(exact.len() / 2);
    if kmax == 0 || exact.len() < 2 * kmax {
        return Err(Error::arg(format!("K = {kmax} needs {} moments, got {}", 2 * kmax, exact.len())));
    }
    let at = |bits: usize| HamiltonianMoments(exact.iter().map(|r| Real::from_rational(r, bits)).collect());
    let lc = lanczos_adaptive(kmax, s.bits, |bits| Ok(at(bits)))?;
    let h = at(lc.precision_bits.unwrap_or(s.bits));
    let n = if lc.terminated { h.len() - 1 } else { 2 * lc.len() - 1 };
    let recon = reconstruct_all(&lc, n);
    let residuals: Vec<f64> = recon
        .iter()
        .zip(&h.0)
        .map(|(r, x)| {
            let scale = x.abs().to_f64().max(1.0);
            (r.clone() - x.clone()).to_f64().abs() / scale
        })
        .collect();
    let mut report = json!({
        "a": s.reals(&lc.a),
        "b": s.reals(&lc.b()),
        "terminated": lc.terminated,
        "precision_bits": lc.precision_bits,
        "residuals": residuals,
    });
    if h.len() >= 4 {
        report["identity_check"] = identity_json(&identity_check(&h, &lc)?);
    }
    out.json(&s.out, "lanczos.json", &report)
}

fn cmd_krylov(a: &KrylovArgs, s: &Settings, out: &mut Outputs) -> Result<()> {
    let record: LanczosRecord = read_json(&required(a.input.clone(), "input")?)?;
    let lc = LanczosCoefficients::try_from(record)?;
    let dt = a.dt.unwrap_or(0.01);
    let grid = uniform_grid(a.tmax.unwrap_or(10.0), dt)?;
    let opts = EvolveOptions {
        tol: s.tol,
        dt_max: a.step.unwrap_or(dt),
        max_sites: DEFAULT_MAX_SITES,
        ..EvolveOptions::default()
    };
    let states = evolve(&lc, &grid, &opts)?;
    let series = TimeSeries::new(grid)
        .with("complexity", states.iter().map(spread_complexity).collect())?
        .with("survival", states.iter().map(survival_from_phi).collect())?
        .with("norm_defect", states.iter().map(|x| x.norm_defect).collect())?;
    out.csv(&s.out, "krylov.csv", &series)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BellFile {
    moments: Option<Vec<ExactComplex>>,
    cumulants: Option<Vec<ExactComplex>>,
}

fn cmd_bell(a: &BellArgs, s: &Settings, out: &mut Outputs) -> Result<()> {
    let input: BellFile = read_json(&required(a.input.clone(), "input")?)?;
    let parse = |v: &[ExactComplex]| v.iter().map(ExactComplex::to_complex).collect::<Result<Vec<_>>>();
    let (moments, cums) = match (&input.moments, &input.cumulants) {
        (Some(m), None) => {
            let m = parse(m)?;
            let n = a.nmax.unwrap_or(m.len().saturating_sub(1));
            let c = bell::cumulants_from_moments(&m, n)?;
            (m[..=n.min(m.len() - 1)].to_vec(), c)
        }
        (None, Some(c)) => {
            let c = parse(c)?;
            let n = a.nmax.unwrap_or(c.len());
            (bell::moments_from_cumulants(&c, n)?, c[..n.min(c.len())].to_vec())
        }
        _ => return Err(Error::arg("input must contain exactly one of \"moments\" or \"cumulants\"")),
    };
    let render = |xs: &[Complex<RBig>]| {
        Value::Array(xs.iter().map(|c| json!([s.rational(&c.re), s.rational(&c.im)])).collect())
    };
    out.json(&s.out, "bell.json", &json!({ "moments": render(&moments), "cumulants": render(&cums) }))
}
