use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Sorted sample times starting at exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidGrid("grid must start at t = 0".to_string()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(
                "grid contains non-finite times".to_string(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "grid times must be strictly increasing".to_string(),
            ));
        }
        Ok(Self { times })
    }

    /// `0, step, 2·step, …` up to and including `end` (to within a
    /// hundredth of a step). Points are computed as `k·step`, never by
    /// repeated addition.
    pub fn uniform(end: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step {step} must be positive")));
        }
        if !(end.is_finite() && end >= 0.0) {
            return Err(Error::InvalidGrid(format!("end {end} must be nonnegative")));
        }
        let count = (end / step + 0.01).floor() as usize;
        Self::new((0..=count).map(|k| k as f64 * step).collect())
    }

    /// A grid holding 0 and the given positive times (sorted, deduplicated).
    pub fn from_points(points: &[f64]) -> Result<Self> {
        let mut times = vec![0.0];
        times.extend(points.iter().copied().filter(|&t| t != 0.0));
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup();
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    /// Index of a time that is on the grid (exact match, or within 1e-12).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&g| (g - t).abs() <= 1e-12)
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A `t ↦ value` series, optionally with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub t: Vec<f64>,
    pub value: Vec<f64>,
    pub std_err: Option<Vec<f64>>,
}

impl CurveTable {
    pub fn new(t: Vec<f64>, value: Vec<f64>) -> Self {
        debug_assert_eq!(t.len(), value.len());
        Self {
            t,
            value,
            std_err: None,
        }
    }

    /// Evaluates `f` at every grid time.
    pub fn tabulate(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let t = grid.times().to_vec();
        let value = t.iter().map(|&x| f(x)).collect();
        Self::new(t, value)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// CSV with header `t,value` (plus `std_err` when present).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match &self.std_err {
            Some(se) => {
                writeln!(out, "t,value,std_err")?;
                for ((t, v), s) in self.t.iter().zip(&self.value).zip(se) {
                    writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*v), fmt_f64(*s))?;
                }
            }
            None => {
                writeln!(out, "t,value")?;
                for (t, v) in self.t.iter().zip(&self.value) {
                    writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
                }
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_includes_endpoint() {
        let g = TimeGrid::uniform(10.0, 0.01).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.times()[0], 0.0);
        assert!((g.last() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::uniform(1.0, 0.0).is_err());
    }

    #[test]
    fn from_points_sorts_and_adds_zero() {
        let g = TimeGrid::from_points(&[1.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.index_of(0.5), Some(1));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        let mut buf = Vec::new();
        CurveTable::new(vec![0.0], vec![1.0])
            .write_csv(&mut buf)
            .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,value\n0.0000000000000000e0,1.0000000000000000e0\n"
        );
    }
}
