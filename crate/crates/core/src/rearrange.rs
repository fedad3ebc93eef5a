//! Symmetric decreasing rearrangement and related inequality checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::spectral;

/// Node offsets from the center in placement order: 0, +1, -1, +2, -2, ...
fn placement(len: usize) -> impl Iterator<Item = usize> {
    let center = len / 2;
    (0..len)
        .map(move |i| {
            let d = i.div_ceil(2);
            if i % 2 == 1 {
                center + d
            } else {
                center - d
            }
        })
        .map(move |m| m % len.max(1))
}

/// Rearranges |values| around index len/2, largest first, right side first.
pub fn rearrange_values(values: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![0.0; values.len()];
    for (v, m) in sorted.into_iter().zip(placement(values.len())) {
        out[m] = v;
    }
    out
}

/// |u|*, even about x = 0 up to the right-first tie rule.
pub fn rearrangement(u: &Field) -> Field {
    Field::from_parts(*u.grid(), rearrange_values(u.values()))
}

/// (||D^{sigma/2}|u|||, ||D^{sigma/2}u||).
pub fn modulus_energy_check(u: &Field, sigma: f64) -> Result<(f64, f64)> {
    let a = spectral::kinetic(&u.abs(), sigma)?.sqrt();
    let b = spectral::kinetic(u, sigma)?.sqrt();
    Ok((a, b))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub r: f64,
    pub lr_norm: f64,
    pub nodes_checked: usize,
    /// max over checked nodes of u(x) - 2^{-1/r} |x|^{-1/r} ||u||_r
    pub max_violation: f64,
    pub holds: bool,
}

/// Checks that `u` is nonnegative, non-increasing in |x| on both sides of the
/// center, and even up to one node (u(-x_k) between u(x_{k+1}) and u(x_{k-1})).
pub fn check_radial_shape(u: &Field, slack: f64) -> Result<()> {
    let v = u.values();
    let n = v.len();
    let c = n / 2;
    let tol = slack * u.max_abs();
    if let Some(m) = v.iter().position(|&x| x < -tol) {
        return Err(Error::Shape(format!("negative value {} at node {m}", v[m])));
    }
    let right = |k: usize| v[c + k];
    let left = |k: usize| v[c - k];
    for k in 1..c {
        if right(k) > right(k - 1) + tol || left(k) > left(k - 1) + tol {
            return Err(Error::Shape(format!("not non-increasing at offset {k}")));
        }
        let hi = right(k - 1).max(left(k - 1));
        let lo = if k + 1 < c { right(k + 1).min(left(k + 1)) } else { 0.0 };
        for w in [left(k), right(k)] {
            if w > hi + tol || w < lo - tol {
                return Err(Error::Shape(format!("not even at offset {k}")));
            }
        }
    }
    Ok(())
}

/// Pointwise decay bound u(x) <= 2^{-1/r} |x|^{-1/r} ||u||_r for |x| >= h.
pub fn decay_bound_check(u: &Field, r: f64) -> Result<DecayReport> {
    check_radial_shape(u, 1e-10)?;
    let lr_norm = spectral::lp_norm(u, r)?;
    let h = u.grid().spacing();
    let mut max_violation = f64::NEG_INFINITY;
    let mut nodes_checked = 0;
    for (m, &v) in u.values().iter().enumerate() {
        let x = u.grid().x(m).abs();
        if x < h * (1.0 - 1e-12) {
            continue;
        }
        let bound = 2f64.powf(-1.0 / r) * x.powf(-1.0 / r) * lr_norm;
        max_violation = max_violation.max(v - bound);
        nodes_checked += 1;
    }
    Ok(DecayReport {
        r,
        lr_norm,
        nodes_checked,
        max_violation,
        holds: max_violation <= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn five_point_layout() {
        assert_eq!(
            rearrange_values(&[0.0, 1.0, 3.0, 2.0, 0.0]),
            vec![0.0, 1.0, 3.0, 2.0, 0.0]
        );
        assert_eq!(
            rearrange_values(&[0.0, 2.0, -3.0, 1.0, 0.0]),
            vec![0.0, 1.0, 3.0, 2.0, 0.0]
        );
    }

    #[test]
    fn even_length_layout() {
        let out = rearrange_values(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(out, vec![1.0, 2.0, 4.0, 6.0, 5.0, 3.0]);
    }

    #[test]
    fn nonnegative_field_has_equal_energies() {
        let g = GridSpec::new(10.0, 128).unwrap();
        let u = Field::from_fn(g, |x| (-x * x).exp()).unwrap();
        let (a, b) = modulus_energy_check(&u, 0.8).unwrap();
        assert_eq!(a, b);
        assert_eq!(modulus_energy_check(&Field::zeros(g), 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn plateau_saturates_the_bound() {
        let g = GridSpec::new(4.0, 64).unwrap();
        let u = Field::from_fn(g, |x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        for r in [1.0, 2.0, 5.0] {
            let rep = decay_bound_check(&u, r).unwrap();
            assert!(rep.holds);
            assert!(rep.max_violation > -0.1, "{}", rep.max_violation);
        }
    }

    #[test]
    fn shape_errors() {
        let g = GridSpec::new(4.0, 16).unwrap();
        let bumpy = Field::from_fn(g, |x| (x * 3.0).cos().abs()).unwrap();
        assert!(matches!(decay_bound_check(&bumpy, 2.0), Err(Error::Shape(_))));
        let neg = Field::from_fn(g, |x| -(-x * x).exp()).unwrap();
        assert!(decay_bound_check(&neg, 2.0).is_err());
    }
}
