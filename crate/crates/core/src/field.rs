//! Sampled radial fields and cumulative masses.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::{self, Parity};

#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    tail_exponent: Option<f64>,
}

impl RadialField {
    pub fn new(grid: impl Into<Arc<RadialGrid>>, values: Vec<f64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at r = {}", grid.nodes()[i])));
        }
        Ok(Self { grid, values, tail_exponent: None })
    }

    pub fn from_fn(grid: impl Into<Arc<RadialGrid>>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = grid.into();
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: impl Into<Arc<RadialGrid>>) -> Self {
        let grid = grid.into();
        let n = grid.len();
        Self { grid, values: vec![0.0; n], tail_exponent: None }
    }

    /// Declares `u ~ C r^{-p}` beyond the grid.
    pub fn with_tail(mut self, p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParameter(format!("tail exponent {p} must be positive")));
        }
        self.tail_exponent = Some(p);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes() == other.grid.nodes()
    }

    /// Pointwise `a·self + b·other`; the tail is kept only if both agree.
    pub fn combine(&self, a: f64, other: &RadialField, b: f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let tail = match (self.tail_exponent, other.tail_exponent) {
            (Some(p), Some(q)) => Some(p.min(q)),
            _ => None,
        };
        Ok(Self { grid: self.grid.clone(), values, tail_exponent: tail })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            tail_exponent: self.tail_exponent,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cubic interpolation at an arbitrary radius.
    pub fn at(&self, r: f64) -> f64 {
        self.grid.interpolate(&self.values, r)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(w, "{r:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads `r,value` rows; the radii must match `grid`.
    pub fn read_csv<R: BufRead>(grid: impl Into<Arc<RadialGrid>>, reader: R) -> Result<Self> {
        let grid = grid.into();
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if k == 0 || line.is_empty() {
                continue;
            }
            let (r, v) =
                line.split_once(',').ok_or_else(|| Error::Parse(format!("line {}: expected `r,value`", k + 1)))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)));
            let (r, v) = (parse(r)?, parse(v)?);
            let i = values.len();
            match grid.nodes().get(i) {
                Some(&node) if (node - r).abs() <= 1e-12 * (1.0 + node) => values.push(v),
                _ => return Err(Error::GridMismatch),
            }
        }
        Self::new(grid, values)
    }
}

/// Mass inside radius `r`, sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeMass {
    grid: Arc<RadialGrid>,
    m: Vec<f64>,
    total_mass: f64,
}

impl CumulativeMass {
    /// Requires `m[0] = 0`. Monotonicity is not enforced here; see
    /// [`CumulativeMass::is_monotone`].
    pub fn new(grid: impl Into<Arc<RadialGrid>>, m: Vec<f64>, total_mass: f64) -> Result<Self> {
        let grid = grid.into();
        if m.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if m[0] != 0.0 {
            return Err(Error::InvalidParameter(format!("m(0) = {} must vanish", m[0])));
        }
        if m.iter().any(|v| !v.is_finite()) || !total_mass.is_finite() {
            return Err(Error::InvalidParameter("non-finite cumulative mass".into()));
        }
        Ok(Self { grid, m, total_mass })
    }

    pub fn from_fn(grid: impl Into<Arc<RadialGrid>>, f: impl Fn(f64) -> f64, total_mass: f64) -> Result<Self> {
        let grid = grid.into();
        let mut m: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        m[0] = 0.0;
        Self::new(grid, m, total_mass)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.m
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.m
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.m.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Density `u = m_r / (2πr)`; at the origin `u(0) = m_rr(0) / (2π)`.
    pub fn density(&self) -> RadialField {
        let r = self.grid.nodes();
        let (d1, d2) = stencil::r_derivatives(&self.grid, &self.m, Parity::Even);
        let u: Vec<f64> =
            (0..r.len()).map(|i| if i == 0 { d2[0] / (2.0 * PI) } else { d1[i] / (2.0 * PI * r[i]) }).collect();
        RadialField { grid: self.grid.clone(), values: u, tail_exponent: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::geometric_with_core(400, 100.0, 0.1).unwrap())
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = RadialField::from_fn(grid(), |r| (1.0 + r).recip() / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("r,value\n"));
        let back = RadialField::read_csv(f.grid().clone(), buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn rejects_mismatch_and_nan() {
        assert_eq!(RadialField::new(grid(), vec![0.0; 3]).unwrap_err(), Error::GridMismatch);
        let mut v = vec![0.0; 400];
        v[7] = f64::NAN;
        assert!(RadialField::new(grid(), v).is_err());
    }

    #[test]
    fn density_of_bubble_mass() {
        let m = CumulativeMass::from_fn(grid(), |r| 8.0 * PI * r * r / (1.0 + r * r), 8.0 * PI).unwrap();
        let u = m.density();
        for (i, &r) in u.grid().nodes().iter().enumerate() {
            let exact = 8.0 / (1.0 + r * r).powi(2);
            assert!((u.values()[i] - exact).abs() < 1e-6 * 8.0, "r = {r}");
        }
    }
}
