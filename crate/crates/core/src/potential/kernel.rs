//! Spherical means of `log|r e_1 - s w|` and their tabulation.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::calculus::poly::binomial;
use crate::error::{Error, Result};
use crate::fields::Dimension;

/// `k_n(r, s)`: mean over the unit sphere `S^{n-1}` of `log|r e_1 - s w|`.
///
/// The mean is `log max(r, s) + sum_{j=1}^{p} a_j rho^{2j}` with
/// `rho = min/max` and `p = (n - 2)/2`, obtained by expanding the Gegenbauer
/// generating function of `|e_1 - rho w|^{2-n}` and integrating in `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularKernel {
    pub dim: Dimension,
    coeffs: Vec<f64>,
}

impl AngularKernel {
    pub fn new(dim: Dimension) -> Self {
        let p = (dim.get() as u64 - 2) / 2;
        let central = binomial(2 * p, p) as f64;
        let coeffs = (1..=p)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * binomial(2 * p, p - j) as f64 / (central * 2.0 * j as f64)
            })
            .collect();
        AngularKernel { dim, coeffs }
    }

    /// Polynomial correction `sum a_j rho^{2j}`.
    pub fn correction(&self, rho: f64) -> f64 {
        let r2 = rho * rho;
        let mut acc = 0.0;
        for a in self.coeffs.iter().rev() {
            acc = (acc + a) * r2;
        }
        acc
    }

    /// `rho d/drho` of the correction.
    pub fn correction_log_derivative(&self, rho: f64) -> f64 {
        let r2 = rho * rho;
        let mut acc = 0.0;
        let mut pw = r2;
        for (j, a) in self.coeffs.iter().enumerate() {
            acc += 2.0 * (j + 1) as f64 * a * pw;
            pw *= r2;
        }
        acc
    }

    pub fn eval(&self, r: f64, s: f64) -> Result<f64> {
        if !(r >= 0.0 && s >= 0.0) || (r == 0.0 && s == 0.0) {
            return Err(Error::Precondition(format!(
                "angular kernel needs r, s >= 0 not both zero, got ({r}, {s})"
            )));
        }
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        Ok(hi.ln() + self.correction(lo / hi))
    }

    /// `d k_n / dr`.
    pub fn d_dr(&self, r: f64, s: f64) -> f64 {
        if s < r {
            // k = log r + P(s/r)
            (1.0 - self.correction_log_derivative(s / r)) / r
        } else {
            // k = log s + P(r/s)
            if r == 0.0 {
                return 0.0;
            }
            self.correction_log_derivative(r / s) / r
        }
    }
}

/// `k_n(r, s)` for the given dimension.
pub fn angular_log_kernel(dim: Dimension, r: f64, s: f64) -> Result<f64> {
    AngularKernel::new(dim).eval(r, s)
}

/// Geometric grid description for a [`KernelTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub per_decade: u32,
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        let decades = (self.r_max / self.r_min).log10();
        let count = (decades * self.per_decade as f64).round() as usize + 1;
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        (0..count)
            .map(|i| {
                if i + 1 == count {
                    self.r_max
                } else {
                    (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                }
            })
            .collect()
    }
}

const MAGIC: &[u8; 8] = b"QFLKTAB1";

/// `k_n` tabulated on a geometric `(r, s)` grid, persistable as a flat binary
/// file whose header repeats every key field.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub dim: Dimension,
    pub grid: GridSpec,
    pub tolerance: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl KernelTable {
    pub fn build(dim: Dimension, grid: GridSpec, tolerance: f64) -> Result<Self> {
        if !(grid.r_min > 0.0 && grid.r_max > grid.r_min && grid.per_decade > 0) {
            return Err(Error::Precondition("kernel grid is degenerate".into()));
        }
        let k = AngularKernel::new(dim);
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(nodes.len() * nodes.len());
        for &r in &nodes {
            for &s in &nodes {
                values.push(k.eval(r, s)?);
            }
        }
        Ok(KernelTable {
            dim,
            grid,
            tolerance,
            nodes,
            values,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nodes.len() + j]
    }

    /// Largest `|k(r_i, s_j) - k(s_j, r_i)|` over the table.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.nodes.len();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(48 + 8 * self.values.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.dim.get() as u32).to_le_bytes());
        buf.extend_from_slice(&self.grid.per_decade.to_le_bytes());
        buf.extend_from_slice(&self.grid.r_min.to_le_bytes());
        buf.extend_from_slice(&self.grid.r_max.to_le_bytes());
        buf.extend_from_slice(&self.tolerance.to_le_bytes());
        buf.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Loads a cache file, rejecting it unless every header field matches.
    pub fn load(path: &Path, dim: Dimension, grid: GridSpec, tolerance: f64) -> Result<Self> {
        let mut buf = Vec::new();
        File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 48 || &buf[..8] != MAGIC {
            return Err(Error::Cache("not a kernel table file".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let n = u32_at(8) as usize;
        let per_decade = u32_at(12);
        let (r_min, r_max, tol) = (f64_at(16), f64_at(24), f64_at(32));
        let count = u64::from_le_bytes(buf[40..48].try_into().unwrap()) as usize;
        if n != dim.get() {
            return Err(Error::Cache(format!("cache is for n = {n}, expected {}", dim.get())));
        }
        if per_decade != grid.per_decade || r_min != grid.r_min || r_max != grid.r_max {
            return Err(Error::Cache("cache grid does not match the requested grid".into()));
        }
        if tol != tolerance {
            return Err(Error::Cache(format!(
                "cache tolerance {tol:e} != requested {tolerance:e}"
            )));
        }
        let nodes = grid.nodes();
        if count != nodes.len() * nodes.len() || buf.len() != 48 + 8 * count {
            return Err(Error::Cache("cache payload has the wrong length".into()));
        }
        let values = (0..count).map(|i| f64_at(48 + 8 * i)).collect();
        Ok(KernelTable {
            dim,
            grid,
            tolerance,
            nodes,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    /// Mean over S^{n-1} by a midpoint rule in the polar angle.
    fn brute_force(n: usize, r: f64, s: f64, nodes: usize) -> f64 {
        let h = std::f64::consts::PI / nodes as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..nodes {
            let th = (i as f64 + 0.5) * h;
            let w = th.sin().powi(n as i32 - 2);
            num += w * (r * r + s * s - 2.0 * r * s * th.cos()).sqrt().ln();
            den += w;
        }
        num / den
    }

    #[test]
    fn examples() {
        assert!((angular_log_kernel(d(2), 2.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        for n in [2, 4, 6, 8] {
            assert_eq!(angular_log_kernel(d(n), 1.0, 0.0).unwrap(), 0.0);
        }
        // n = 4, r = 2, s = 1 against a 10^6-node brute-force oracle
        let oracle = brute_force(4, 2.0, 1.0, 1_000_000);
        let golden = 0.755_647_180_559_945_3;
        assert!((oracle - golden).abs() < 1e-10);
        assert!((angular_log_kernel(d(4), 2.0, 1.0).unwrap() - golden).abs() < 1e-12);
        assert!(angular_log_kernel(d(4), 0.0, 0.0).is_err());
    }

    #[test]
    fn matches_brute_force_off_diagonal() {
        for n in [2usize, 4, 6] {
            let k = AngularKernel::new(d(n as i64));
            for (r, s) in [(0.3, 0.9), (5.0, 0.1), (1.0, 1.2)] {
                let b = brute_force(n, r, s, 200_000);
                assert!((k.eval(r, s).unwrap() - b).abs() < 1e-10, "n={n} r={r} s={s}");
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let k = AngularKernel::new(d(6));
        for (r, s) in [(0.5, 2.0), (3.0, 1.0)] {
            let h = 1e-6;
            let fd = (k.eval(r + h, s).unwrap() - k.eval(r - h, s).unwrap()) / (2.0 * h);
            assert!((k.d_dr(r, s) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn table_round_trip_and_header_validation() {
        let grid = GridSpec {
            r_min: 1e-2,
            r_max: 1e2,
            per_decade: 8,
        };
        let t = KernelTable::build(d(4), grid, 1e-10).unwrap();
        assert!(t.symmetry_defect() <= 1e-10);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k4.bin");
        t.save(&p).unwrap();
        assert_eq!(KernelTable::load(&p, d(4), grid, 1e-10).unwrap(), t);
        assert!(matches!(KernelTable::load(&p, d(2), grid, 1e-10), Err(Error::Cache(_))));
        let other = GridSpec { per_decade: 9, ..grid };
        assert!(matches!(
            KernelTable::load(&p, d(4), other, 1e-10),
            Err(Error::Cache(_))
        ));
        assert!(matches!(KernelTable::load(&p, d(4), grid, 1e-8), Err(Error::Cache(_))));
    }
}
