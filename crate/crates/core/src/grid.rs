use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on [-L, L) with N nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    half_length: f64,
    num_points: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: usize,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.l, raw.n)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            l: g.half_length,
            n: g.num_points,
        }
    }
}

impl GridSpec {
    pub fn new(half_length: f64, num_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "L must be positive and finite, got {half_length}"
            )));
        }
        if num_points < 8 || num_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "N must be even and at least 8, got {num_points}"
            )));
        }
        Ok(GridSpec {
            half_length,
            num_points,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.num_points as f64
    }

    /// Node x_m = -L + m h.
    pub fn x(&self, m: usize) -> f64 {
        -self.half_length + m as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|m| self.x(m)).collect()
    }

    /// Index of the node at x = 0.
    pub fn center(&self) -> usize {
        self.num_points / 2
    }

    /// |xi_k| for the DFT bin k (standard layout, bins 0..N).
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.num_points;
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        (std::f64::consts::PI * signed / self.half_length).abs()
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

/// Real samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at node {m}")));
        }
        Ok(Field { grid, values })
    }

    /// Internal constructor for values known to be finite and sized.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field::from_parts(grid, vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Field::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// a*self + b*other.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        Ok(Field::from_parts(self.grid, values))
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// u(-x) on the grid: index m maps to (N - m) mod N.
    pub fn reflect(&self) -> Field {
        let n = self.values.len();
        let values = (0..n).map(|m| self.values[(n - m) % n]).collect();
        Field::from_parts(self.grid, values)
    }

    /// Largest |u(x) - u(-x)|.
    pub fn parity_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|m| (self.values[m] - self.values[(n - m) % n]).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (m, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.x(m), v)?;
        }
        Ok(())
    }

    /// Reads `x,value` rows and checks the abscissae against `grid`.
    pub fn read_csv<R: BufRead>(grid: GridSpec, r: R) -> Result<Field> {
        let mut values = Vec::with_capacity(grid.len());
        let tol = 1e-9 * grid.half_length();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if i == 0 && line.starts_with('x') {
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Csv {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (xs, vs) = line.split_once(',').ok_or_else(|| bad("expected x,value"))?;
            let x: f64 = xs.trim().parse().map_err(|_| bad("bad x"))?;
            let v: f64 = vs.trim().parse().map_err(|_| bad("bad value"))?;
            let m = values.len();
            if m >= grid.len() || (x - grid.x(m)).abs() > tol {
                return Err(bad("abscissa does not match the grid"));
            }
            values.push(v);
        }
        Field::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_node_is_origin() {
        let g = GridSpec::new(3.0, 12).unwrap();
        assert_eq!(g.x(g.center()), 0.0);
        assert_eq!(g.spacing() * 12.0, 6.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1.0, 7).is_err());
        assert!(GridSpec::new(1.0, 6).is_err());
        assert!(GridSpec::new(-1.0, 8).is_err());
        assert!(serde_json::from_str::<GridSpec>(r#"{"L":2.0,"N":9}"#).is_err());
    }

    #[test]
    fn grid_json_uses_short_keys() {
        let g = GridSpec::new(400.0, 32768).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"L":400.0,"N":32768}"#);
        assert_eq!(serde_json::from_str::<GridSpec>(&s).unwrap(), g);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = GridSpec::new(5.0, 16).unwrap();
        let u = Field::from_fn(g, |x| (1.0 / 3.0) * (-x * x).exp()).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = Field::read_csv(g, &buf[..]).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn nonfinite_values_rejected() {
        let g = GridSpec::new(1.0, 8).unwrap();
        assert!(Field::new(g, vec![f64::NAN; 8]).is_err());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = Field::zeros(GridSpec::new(1.0, 8).unwrap());
        let b = Field::zeros(GridSpec::new(2.0, 8).unwrap());
        assert!(matches!(a.combine(1.0, &b, 1.0), Err(Error::GridMismatch { .. })));
    }
}
