//! Uniform time grids with named real channels, written as CSV.

use std::io::Write;

use crate::error::{Error, Result};

/// `0, dt, 2dt, …` up to `t_max` (inclusive when `t_max` is a multiple of
/// `dt` up to rounding). Points are `i·dt`, not accumulated sums.
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite() && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::arg(format!("invalid grid t_max={t_max}, dt={dt}")));
    }
    let ratio = t_max / dt;
    let mut n = ratio.round();
    if (n - ratio).abs() > 1e-9 * ratio.max(1.0) {
        n = ratio.floor();
    }
    if n > 1e8 {
        return Err(Error::arg("grid has more than 10⁸ points"));
    }
    Ok((0..=n as usize).map(|i| i as f64 * dt).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

/// One time column plus any number of equally long value columns.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub channels: Vec<Channel>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>) -> Self {
        TimeSeries { t, channels: Vec::new() }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.t.len() {
            return Err(Error::arg(format!(
                "channel {name} has {} values for {} times",
                values.len(),
                self.t.len()
            )));
        }
        self.channels.push(Channel { name: name.to_string(), values });
        Ok(())
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.push(name, values)?;
        Ok(self)
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// CSV with header `t,<channel>,…` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for c in &self.channels {
            write!(w, ",{}", c.name)?;
        }
        writeln!(w)?;
        for (i, t) in self.t.iter().enumerate() {
            write!(w, "{}", fmt17(*t))?;
            for c in &self.channels {
                write!(w, ",{}", fmt17(c.values[i]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(6.0, 0.01).unwrap();
        assert_eq!(g.len(), 601);
        assert_eq!(g[600], 6.0);
        assert_eq!(uniform_grid(1.05, 0.1).unwrap().len(), 11);
        assert!(uniform_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = TimeSeries::new(vec![0.0, 0.5])
            .with("c", vec![1.0, -0.25])
            .unwrap();
        assert_eq!(
            s.to_csv_string(),
            "t,c\n0.0000000000000000e0,1.0000000000000000e0\n5.0000000000000000e-1,-2.5000000000000000e-1\n"
        );
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        assert!(TimeSeries::new(vec![0.0]).with("c", vec![]).is_err());
    }
}
