//! Truncated Taylor series arithmetic.
//!
//! A [`Jet`] holds the coefficients `c_0 .. c_K` of `g(t0 + h) = sum c_k h^k`.
//! Arithmetic is exact up to rounding in every retained coefficient, which
//! lets radial Laplacians be applied without finite-difference cancellation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// `t0 + h`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut j = Jet::constant(t0, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        if k >= self.c.len() {
            return 0.0;
        }
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let k = self.order();
        let mut c = vec![0.0; k + 1];
        for i in 0..=k {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=(k - i) {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }

    /// Leading power of `h` with a nonzero coefficient, `None` for the zero jet.
    fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|&v| v != 0.0)
    }

    pub fn div(&self, o: &Jet) -> Result<Jet> {
        let k = self.order();
        if o.c[0] == 0.0 {
            // Division by a jet vanishing at the expansion point is allowed
            // when the numerator vanishes to at least the same order.
            let vo = o.valuation().ok_or_else(|| Error::Domain("division by zero".into()))?;
            let vs = self.valuation().unwrap_or(usize::MAX);
            if vs < vo {
                return Err(Error::Domain("division by zero".into()));
            }
            let num = self.shift_down(vo);
            let den = o.shift_down(vo);
            return num.div(&den);
        }
        let mut c = vec![0.0; k + 1];
        for i in 0..=k {
            let mut s = self.c[i];
            for j in 1..=i {
                s -= o.c[j] * c[i - j];
            }
            c[i] = s / o.c[0];
        }
        Ok(Jet { c })
    }

    /// Divides by `h^v`, padding the lost high-order coefficients with zero.
    /// The top `v` coefficients of the result are unreliable and callers
    /// must carry enough spare order.
    fn shift_down(&self, v: usize) -> Jet {
        let k = self.order();
        let mut c = vec![0.0; k + 1];
        for i in v..=k {
            c[i - v] = self.c[i];
        }
        Jet { c }
    }

    pub fn exp(&self) -> Jet {
        let k = self.order();
        let mut e = vec![0.0; k + 1];
        e[0] = self.c[0].exp();
        // e' = a' e  =>  m e_m = sum_{j=1..m} j a_j e_{m-j}
        for m in 1..=k {
            let mut s = 0.0;
            for j in 1..=m {
                s += j as f64 * self.c[j] * e[m - j];
            }
            e[m] = s / m as f64;
        }
        Jet { c: e }
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.c[0];
        if !(a0 > 0.0) {
            return Err(Error::Domain(format!("log of non-positive value {a0}")));
        }
        let k = self.order();
        let mut l = vec![0.0; k + 1];
        l[0] = a0.ln();
        // a l' = a'  =>  m a0 l_m = m a_m - sum_{j=1..m-1} j l_j a_{m-j}
        for m in 1..=k {
            let mut s = m as f64 * self.c[m];
            for j in 1..m {
                s -= j as f64 * l[j] * self.c[m - j];
            }
            l[m] = s / (m as f64 * a0);
        }
        Ok(Jet { c: l })
    }

    /// Real power with a constant exponent.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let a0 = self.c[0];
        if p == 0.0 {
            return Ok(Jet::constant(1.0, self.order()));
        }
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        if a0 > 0.0 {
            let k = self.order();
            let mut g = vec![0.0; k + 1];
            g[0] = a0.powf(p);
            // a g' = p a' g  =>  m a0 g_m = sum_{j=1..m} (p j - (m - j)) a_j g_{m-j}
            for m in 1..=k {
                let mut s = 0.0;
                for j in 1..=m {
                    s += (p * j as f64 - (m - j) as f64) * self.c[j] * g[m - j];
                }
                g[m] = s / (m as f64 * a0);
            }
            return Ok(Jet { c: g });
        }
        if a0 == 0.0 && p > 0.0 {
            // Even-valuation base (e.g. a sum of squares at the origin).
            if let Some(v) = self.valuation() {
                let q = v as f64 * p;
                if q.fract() == 0.0 && self.c[v] > 0.0 {
                    let inner = self.shift_down(v).powf(p)?;
                    let mut c = vec![0.0; self.order() + 1];
                    let s = q as usize;
                    for i in 0..c.len() {
                        if i >= s {
                            c[i] = inner.c[i - s];
                        }
                    }
                    return Ok(Jet { c });
                }
            } else {
                return Ok(Jet::constant(0.0, self.order()));
            }
        }
        Err(Error::Domain(format!("power {p} of non-positive value {a0}")))
    }

    pub fn powi(&self, p: i32) -> Result<Jet> {
        if p < 0 {
            let pos = self.powi(-p)?;
            return Jet::constant(1.0, self.order()).div(&pos);
        }
        let mut result = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.c[0] < 0.0 {
            return Err(Error::Domain(format!("sqrt of negative value {}", self.c[0])));
        }
        self.powf(0.5)
    }

    pub fn atan(&self) -> Jet {
        // atan(a)' = a' / (1 + a^2)
        let k = self.order();
        let one_plus = self.mul(self).add_scalar(1.0);
        let da = self.derivative_jet();
        let q = da.div(&one_plus).expect("1 + a^2 is never zero");
        let mut c = vec![0.0; k + 1];
        c[0] = self.c[0].atan();
        for m in 1..=k {
            c[m] = q.c[m - 1] / m as f64;
        }
        Jet { c }
    }

    /// Series of the derivative (order reduced by one, padded with zero).
    pub fn derivative_jet(&self) -> Jet {
        let k = self.order();
        let mut c = vec![0.0; k + 1];
        for m in 1..=k {
            c[m - 1] = m as f64 * self.c[m];
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = Jet::variable(0.7, 6);
        let y = x.exp().ln().unwrap();
        for (a, b) in y.c.iter().zip(&x.c) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn derivatives_of_log_one_plus_square() {
        // g(t) = log(1 + t^2) at t = 1: g' = 1, g'' = 0, g''' = -1
        let t = Jet::variable(1.0, 4);
        let g = t.mul(&t).add_scalar(1.0).ln().unwrap();
        assert!(close(g.derivative(1), 1.0, 1e-14));
        assert!(close(g.derivative(2), 0.0, 1e-14));
        assert!(close(g.derivative(3), -1.0, 1e-14));
    }

    #[test]
    fn sqrt_of_square_at_origin() {
        let t = Jet::variable(0.0, 5);
        let s = t.mul(&t).sqrt().unwrap();
        assert_eq!(s.c[1], 1.0);
        assert!(s.c.iter().enumerate().all(|(i, v)| i == 1 || *v == 0.0));
    }

    #[test]
    fn atan_series() {
        let t = Jet::variable(0.0, 7);
        let a = t.atan();
        // atan t = t - t^3/3 + t^5/5 - t^7/7
        assert!(close(a.c[1], 1.0, 1e-15));
        assert!(close(a.c[3], -1.0 / 3.0, 1e-15));
        assert!(close(a.c[5], 0.2, 1e-15));
        assert!(close(a.c[7], -1.0 / 7.0, 1e-15));
    }

    #[test]
    fn log_of_negative_is_domain_error() {
        assert!(Jet::constant(-1.0, 2).ln().is_err());
    }

    #[test]
    fn powf_matches_exp_log() {
        let t = Jet::variable(2.0, 5);
        let a = t.powf(-0.3).unwrap();
        let b = t.ln().unwrap().scale(-0.3).exp();
        for (x, y) in a.c.iter().zip(&b.c) {
            assert!(close(*x, *y, 1e-13));
        }
    }
}
