//! Partial and complete Bell polynomials and the moment/cumulant conversion.
//!
//! Coefficient slices are 1-indexed in the mathematical sense: `g[0]` holds
//! g₁. Everything is generic over [`Scalar`], so the same code runs on exact
//! rationals, wide floats and their complex extensions.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Scalar};

/// Default upper limit for conversion orders.
pub const DEFAULT_MAX_ORDER: usize = 64;

/// Rows `0..=n` of Pascal's triangle, built by addition so no integer
/// overflow can occur.
fn binomial_rows<T: Scalar>(n: usize, like: &T) -> Vec<Vec<T>> {
    let one = like.one_like();
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    rows.push(vec![one.clone()]);
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = Vec::with_capacity(r + 1);
        row.push(one.clone());
        for c in 1..r {
            row.push(prev[c - 1].clone() + prev[c].clone());
        }
        row.push(one.clone());
        rows.push(row);
    }
    rows
}

/// Table `B[n][k]` of partial Bell polynomials for `0 ≤ k ≤ n ≤ n_max`.
///
/// Row `n` only touches `g[..n]`, so `g` needs at least `n_max` entries
/// (or one entry when `n_max = 0`).
pub fn partial_bell_table<T: Scalar>(n_max: usize, g: &[T]) -> Result<Vec<Vec<T>>> {
    if g.is_empty() {
        return Err(Error::arg("coefficient vector must be non-empty"));
    }
    if g.len() < n_max {
        return Err(Error::arg(format!(
            "need {n_max} coefficients for order {n_max}, got {}",
            g.len()
        )));
    }
    let like = &g[0];
    let zero = like.zero_like();
    let binom = binomial_rows(n_max.saturating_sub(1), like);
    let mut table: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
    let mut row0 = vec![zero.clone(); n_max + 1];
    row0[0] = like.one_like();
    table.push(row0);
    for n in 1..=n_max {
        let mut row = vec![zero.clone(); n_max + 1];
        for k in 1..=n {
            let mut acc = zero.clone();
            for i in 1..=n - k + 1 {
                let prev = &table[n - i][k - 1];
                if prev.is_zero() {
                    continue;
                }
                acc = acc + binom[n - 1][i - 1].clone() * g[i - 1].clone() * prev.clone();
            }
            row[k] = acc;
        }
        table.push(row);
    }
    Ok(table)
}

/// B_{n,k}(g₁, …, g_{n−k+1}).
pub fn partial_bell<T: Scalar>(n: usize, k: usize, g: &[T]) -> Result<T> {
    if k > n {
        return Err(Error::arg(format!("k = {k} exceeds n = {n}")));
    }
    if g.is_empty() {
        return Err(Error::arg("coefficient vector must be non-empty"));
    }
    if n == 0 {
        return Ok(g[0].one_like());
    }
    if k == 0 {
        return Ok(g[0].zero_like());
    }
    let need = n - k + 1;
    if g.len() < need {
        return Err(Error::arg(format!(
            "B_{{{n},{k}}} needs {need} coefficients, got {}",
            g.len()
        )));
    }
    // Pad with zeros: entries past n−k+1 never reach B_{n,k}.
    let mut padded = g[..need].to_vec();
    padded.resize(n, g[0].zero_like());
    Ok(partial_bell_table(n, &padded)?[n][k].clone())
}

/// Complete Bell polynomial Y_n(g₁, …, g_n), with Y₀ = 1.
pub fn complete_bell<T: Scalar>(n: usize, g: &[T]) -> Result<T> {
    Ok(complete_bell_all(n, g)?.pop().expect("n+1 entries"))
}

/// `[Y₀, Y₁, …, Y_{n_max}]`.
pub fn complete_bell_all<T: Scalar>(n_max: usize, g: &[T]) -> Result<Vec<T>> {
    let table = partial_bell_table(n_max, g)?;
    Ok(table
        .into_iter()
        .enumerate()
        .map(|(n, row)| {
            if n == 0 {
                return row[0].clone();
            }
            row.into_iter()
                .skip(1)
                .take(n)
                .reduce(|acc, x| acc + x)
                .expect("n ≥ 1")
        })
        .collect())
}

/// Cumulants β₁..β_{n_max} from moments `m = [M₀, M₁, …]` of a characteristic
/// function G(t) = Σ M_n tⁿ/n!, with G = ⟨e^{−iWt}⟩.
pub fn cumulants_from_moments<T: Scalar>(
    m: &[Complex<T>],
    n_max: usize,
) -> Result<Vec<Complex<T>>> {
    if m.is_empty() {
        return Err(Error::arg("moment sequence is empty"));
    }
    if m[0] != m[0].one_like() {
        return Err(Error::domain("M₀ must equal 1"));
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    if m.len() < n_max + 1 {
        return Err(Error::arg(format!(
            "order {n_max} needs {} moments, got {}",
            n_max + 1,
            m.len()
        )));
    }
    let like = &m[0].re;
    let table = partial_bell_table(n_max, &m[1..=n_max])?;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut acc = m[0].zero_like();
        let mut fact = like.one_like();
        for k in 1..=n {
            if k > 1 {
                fact = fact * like.from_i64_like(k as i64 - 1);
            }
            let term = table[n][k].clone() * Complex::real(fact.clone());
            acc = if k % 2 == 1 { acc + term } else { acc - term };
        }
        out.push(acc * Complex::i_pow(n, like));
    }
    Ok(out)
}

/// Moments `[M₀, …, M_{n_max}]` from cumulants `β = [β₁, β₂, …]`:
/// M_n = (−i)ⁿ Y_n(β).
pub fn moments_from_cumulants<T: Scalar>(
    beta: &[Complex<T>],
    n_max: usize,
) -> Result<Vec<Complex<T>>> {
    if beta.is_empty() {
        return Err(Error::arg("cumulant sequence is empty"));
    }
    let like = &beta[0].re;
    let ys = complete_bell_all(n_max, beta)?;
    Ok(ys
        .into_iter()
        .enumerate()
        .map(|(n, y)| y * Complex::minus_i_pow(n, like))
        .collect())
}
