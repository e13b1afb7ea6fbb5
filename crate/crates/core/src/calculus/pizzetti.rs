//! Pizzetti mean-value expansion and ball means.

use serde::{Deserialize, Serialize};

use crate::calculus::poly::{apply_laplacian_poly, Polynomial};
use crate::error::{Error, Result};
use crate::fields::{Dimension, Point, ScalarField};
use crate::quad::{integrate, sphere_mean_adaptive, QuadConfig};

/// Coefficients `c_i` with `mean_{B_R(x)} h = sum_{i<m} c_i R^{2i} Δ^i h(x)`
/// whenever `Δ^m h = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PizzettiCoefficients {
    pub dim: Dimension,
    pub order: usize,
    pub c: Vec<f64>,
}

/// Solves for `c_0..c_{m-1}` against the radial monomials `|y|^{2i}`.
///
/// The ball mean of `|y|^{2i}` over `B_R(0)` is `n R^{2i} / (n + 2i)`, and
/// `Δ^j |y|^{2i}` at the origin is read off the exact polynomial Laplacian,
/// so the system is lower triangular.
pub fn pizzetti_coeffs(dim: Dimension, m: usize) -> Result<PizzettiCoefficients> {
    if m == 0 {
        return Err(Error::Precondition("Pizzetti order must be at least 1".into()));
    }
    let n = dim.get() as f64;
    let origin = vec![0.0; dim.get()];
    let mut c: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let p = Polynomial::norm_squared_power(dim, i as u32);
        let mean = n / (n + 2.0 * i as f64);
        let mut rhs = mean;
        for (j, cj) in c.iter().enumerate() {
            rhs -= cj * apply_laplacian_poly(&p, j).eval(&origin);
        }
        let diag = apply_laplacian_poly(&p, i).eval(&origin);
        c.push(rhs / diag);
    }
    Ok(PizzettiCoefficients { dim, order: m, c })
}

/// Smallest `m` with `Δ^m p = 0`.
pub fn polyharmonic_order(p: &Polynomial) -> usize {
    let mut m = 0;
    let mut q = p.clone();
    while !q.is_zero() {
        q = q.laplacian();
        m += 1;
    }
    m
}

/// `|mean_{B_R(center)} p - sum_{i<m} c_i R^{2i} Δ^i p(center)|` with `m`
/// the polyharmonic order of `p`; the ball mean is exact.
pub fn pizzetti_check(p: &Polynomial, center: &Point, radius: f64) -> Result<f64> {
    if center.dim() != p.dim.get() {
        return Err(Error::DimensionMismatch {
            expected: p.dim.get(),
            got: center.dim(),
        });
    }
    let m = polyharmonic_order(p);
    let mean = p.ball_mean(center.coords(), radius);
    if m == 0 {
        return Ok(mean.abs());
    }
    let coeffs = pizzetti_coeffs(p.dim, m)?;
    let mut expansion = 0.0;
    let mut q = p.clone();
    for (i, ci) in coeffs.c.iter().enumerate() {
        expansion += ci * radius.powi(2 * i as i32) * q.eval(center.coords());
        q = q.laplacian();
    }
    Ok((mean - expansion).abs())
}

/// Default relative tolerance of [`ball_mean`].
pub const BALL_MEAN_TOL: f64 = 1e-8;

/// `mean_{B_R(center)} f` by nested radial and spherical quadrature.
pub fn ball_mean(f: &ScalarField, center: &Point, radius: f64) -> Result<f64> {
    ball_mean_tol(f, center, radius, BALL_MEAN_TOL)
}

pub fn ball_mean_tol(f: &ScalarField, center: &Point, radius: f64, rel_tol: f64) -> Result<f64> {
    let n = f.dim().get();
    if center.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: center.dim(),
        });
    }
    if !(radius > 0.0) {
        return Err(Error::Precondition(format!(
            "ball radius must be positive, got {radius}"
        )));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let cfg = QuadConfig::with_rel(rel_tol);
    let nf = n as f64;
    let c = center.coords();
    let at_origin = c.iter().all(|v| *v == 0.0);
    // mean = n / R^n int_0^R S(r) r^{n-1} dr = n int_0^1 S(R s) s^{n-1} ds
    let integral = if f.is_radial() && at_origin {
        integrate(
            |s| Ok(f.radial_value(radius * s)? * s.powi(n as i32 - 1)),
            0.0,
            1.0,
            &[],
            &cfg,
        )?
        .0
    } else {
        let mut y = vec![0.0; n];
        integrate(
            |s| {
                if s == 0.0 {
                    return Ok(0.0);
                }
                let r = radius * s;
                let sm = sphere_mean_adaptive(
                    n,
                    |w| {
                        for i in 0..n {
                            y[i] = c[i] + r * w[i];
                        }
                        f.eval_slice(&y)
                    },
                    rel_tol,
                    4,
                    64,
                )?;
                Ok(sm * s.powi(n as i32 - 1))
            },
            0.0,
            1.0,
            &[],
            &cfg,
        )?
        .0
    };
    Ok(nf * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        for n in [2, 4, 6] {
            let c = pizzetti_coeffs(d(n), 3).unwrap();
            assert_eq!(c.c[0], 1.0);
            let c1 = 1.0 / (2.0 * (n as f64 + 2.0));
            assert!((c.c[1] - c1).abs() < 1e-15 * c1);
            assert!(c.c.iter().all(|v| *v > 0.0));
        }
        assert_eq!(pizzetti_coeffs(d(2), 1).unwrap().c, vec![1.0]);
    }

    #[test]
    fn check_examples() {
        let one = Polynomial::constant(d(2), 1.0);
        assert_eq!(pizzetti_check(&one, &Point::origin(d(2)), 1.0).unwrap(), 0.0);
        let h = Polynomial::from_terms(d(2), [(vec![2, 0], 1.0), (vec![0, 2], -1.0)]);
        let c = Point::new(d(2), vec![0.7, -0.2]).unwrap();
        assert!(pizzetti_check(&h, &c, 3.0).unwrap() <= 1e-10);
        let r2 = Polynomial::norm_squared_power(d(4), 1);
        assert!(pizzetti_check(&r2, &Point::origin(d(4)), 1.0).unwrap() <= 1e-10);
    }

    #[test]
    fn ball_mean_examples() {
        let c = ScalarField::constant(d(4), 2.5);
        let p = Point::new(d(4), vec![1.0, 0.0, -1.0, 0.5]).unwrap();
        assert!((ball_mean(&c, &p, 2.0).unwrap() - 2.5).abs() < 1e-12);

        let r2 = ScalarField::parse("r^2", d(2)).unwrap();
        assert!((ball_mean(&r2, &Point::origin(d(2)), 1.0).unwrap() - 0.5).abs() < 1e-12);

        let x1 = ScalarField::parse("x1", d(2)).unwrap();
        assert!(ball_mean(&x1, &Point::origin(d(2)), 5.0).unwrap().abs() < 1e-12);

        // off-centre quadrature path agrees with exact polynomial moments
        let q = ScalarField::parse("x1^2*x2 + 3*x2^2", d(2)).unwrap();
        let poly = Polynomial::from_terms(d(2), [(vec![2, 1], 1.0), (vec![0, 2], 3.0)]);
        let c = Point::new(d(2), vec![0.5, 1.5]).unwrap();
        let exact = poly.ball_mean(c.coords(), 1.3);
        assert!((ball_mean(&q, &c, 1.3).unwrap() - exact).abs() < 1e-8 * exact.abs());
    }
}
