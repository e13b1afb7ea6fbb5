//! Polynomials in n variables and polyharmonic dimension counts.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use std::sync::Arc;

use crate::error::Result;
use crate::fields::{Dimension, FieldSource, ScalarField};
use crate::jet::Jet;

/// Exponent vector of a monomial.
pub type MultiIndex = Vec<u32>;

/// Sparse polynomial `sum_a c_a x^a` over R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub dim: Dimension,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: Dimension) -> Self {
        Polynomial {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: Dimension, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim.get()], c);
        p
    }

    /// `x_i` (zero-based axis).
    pub fn coordinate(dim: Dimension, i: usize) -> Self {
        let mut a = vec![0; dim.get()];
        a[i] = 1;
        Self::from_terms(dim, [(a, 1.0)])
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, f64)>>(dim: Dimension, terms: I) -> Self {
        let mut p = Self::zero(dim);
        for (a, c) in terms {
            assert_eq!(a.len(), dim.get(), "multi-index length must equal the dimension");
            p.add_term(a, c);
        }
        p
    }

    /// `|x|^{2k}`.
    pub fn norm_squared_power(dim: Dimension, k: u32) -> Self {
        let mut r2 = Self::zero(dim);
        for i in 0..dim.get() {
            let mut a = vec![0; dim.get()];
            a[i] = 2;
            r2.add_term(a, 1.0);
        }
        let mut p = Self::constant(dim, 1.0);
        for _ in 0..k {
            p = p.mul(&r2);
        }
        p
    }

    pub fn add_term(&mut self, a: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.coeffs.entry(a.clone()).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&a);
        }
    }

    pub fn coeff(&self, a: &[u32]) -> f64 {
        self.coeffs.get(a).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|a| a.iter().sum()).max()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(a, c)| c * a.iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (a, c) in &o.coeffs {
            p.add_term(a.clone(), *c);
        }
        p
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut p = Self::zero(self.dim);
        for (a, c) in &self.coeffs {
            p.add_term(a.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        let mut p = Self::zero(self.dim);
        for (a, c) in &self.coeffs {
            for (b, d) in &o.coeffs {
                let e: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                p.add_term(e, c * d);
            }
        }
        p
    }

    /// `Δp`, exact at the coefficient level.
    pub fn laplacian(&self) -> Polynomial {
        let mut p = Self::zero(self.dim);
        for (a, c) in &self.coeffs {
            for i in 0..a.len() {
                if a[i] >= 2 {
                    let mut b = a.clone();
                    b[i] -= 2;
                    p.add_term(b, c * (a[i] * (a[i] - 1)) as f64);
                }
            }
        }
        p
    }

    /// `d p / d x_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut p = Self::zero(self.dim);
        for (a, c) in &self.coeffs {
            if a[i] >= 1 {
                let mut b = a.clone();
                b[i] -= 1;
                p.add_term(b, c * a[i] as f64);
            }
        }
        p
    }

    /// The polynomial as a field with exact Laplacians, gradient and jets.
    pub fn field(&self) -> ScalarField {
        let half = self.dim.half();
        let mut chain = vec![self.clone()];
        for _ in 0..half {
            let next = chain.last().expect("nonempty").laplacian();
            chain.push(next);
        }
        let grad = (0..self.dim.get()).map(|i| self.partial(i)).collect();
        ScalarField::from_source(self.dim, Arc::new(PolySource { chain, grad }))
    }

    /// `p(c + y)` as a polynomial in `y`.
    pub fn translate(&self, c: &[f64]) -> Polynomial {
        let n = self.dim.get();
        let mut out = Self::zero(self.dim);
        for (a, coef) in &self.coeffs {
            // prod_i (c_i + y_i)^{a_i} expanded by the binomial theorem
            let mut acc = Self::constant(self.dim, *coef);
            for i in 0..n {
                if a[i] == 0 {
                    continue;
                }
                let mut factor = Self::zero(self.dim);
                for k in 0..=a[i] {
                    let mut e = vec![0; n];
                    e[i] = k;
                    let w = binomial(a[i] as u64, k as u64) as f64 * c[i].powi((a[i] - k) as i32);
                    factor.add_term(e, w);
                }
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Exact mean of `p` over the ball `B_R(center)` from monomial moments.
    pub fn ball_mean(&self, center: &[f64], radius: f64) -> f64 {
        let n = self.dim.get();
        let q = self.translate(center);
        let mut s = 0.0;
        for (a, c) in &q.coeffs {
            if a.iter().any(|e| e % 2 == 1) {
                continue;
            }
            let k: u32 = a.iter().sum();
            // mean over B_R of y^a is n R^k / (n + k) times the normalized sphere
            // moment prod_i Gamma((a_i+1)/2)/Gamma(1/2) * Gamma(n/2)/Gamma((n+k)/2)
            let mut moment = 1.0;
            for &e in a {
                for j in 1..=e / 2 {
                    moment *= j as f64 - 0.5;
                }
            }
            for j in 0..k / 2 {
                moment /= n as f64 / 2.0 + j as f64;
            }
            s += c * moment * n as f64 / (n as f64 + k as f64) * radius.powi(k as i32);
        }
        s
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, e) in a.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// `Δ^m p`.
/// `chain[k] = Δ^k p` for `k <= n/2`.
#[derive(Debug)]
struct PolySource {
    chain: Vec<Polynomial>,
    grad: Vec<Polynomial>,
}

impl FieldSource for PolySource {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.chain[0].eval(x))
    }
    fn line_jet(&self, x0: &[f64], dir: &[f64], order: usize) -> Option<Result<Jet>> {
        let xs: Vec<Jet> = x0
            .iter()
            .zip(dir)
            .map(|(a, d)| {
                let mut j = Jet::constant(*a, order);
                if order >= 1 {
                    j.c[1] = *d;
                }
                j
            })
            .collect();
        let mut acc = Jet::constant(0.0, order);
        for (a, c) in self.chain[0].terms() {
            let mut t = Jet::constant(*c, order);
            for (x, &e) in xs.iter().zip(a) {
                if e > 0 {
                    match x.powi(e as i32) {
                        Ok(v) => t = t.mul(&v),
                        Err(err) => return Some(Err(err)),
                    }
                }
            }
            acc = acc.add(&t);
        }
        Some(Ok(acc))
    }
    fn chain_len(&self) -> usize {
        self.chain.len() - 1
    }
    fn laplacian_power(&self, x: &[f64], k: usize) -> Option<Result<f64>> {
        self.chain.get(k).map(|p| Ok(p.eval(x)))
    }
    fn gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(Ok(self.grad.iter().map(|p| p.eval(x)).collect()))
    }
    fn laplacian_field(&self, k: usize) -> Option<ScalarField> {
        self.chain.get(k).map(|p| p.field())
    }
    fn is_zero(&self) -> bool {
        self.chain[0].is_zero()
    }
    fn describe(&self) -> String {
        self.chain[0].to_string()
    }
}

pub fn apply_laplacian_poly(p: &Polynomial, m: usize) -> Polynomial {
    let mut q = p.clone();
    for _ in 0..m {
        if q.is_zero() {
            break;
        }
        q = q.laplacian();
    }
    q
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// All exponent vectors of total degree `k` in `n` variables, lexicographic.
pub fn monomials_of_degree(n: usize, k: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=k).rev() {
            prefix.push(e);
            rec(n, k - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// All exponent vectors of total degree at most `d`, by increasing degree.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
    (0..=d).flat_map(|k| monomials_of_degree(n, k)).collect()
}

/// Closed-form `dim PH_d(R^n) = C(n + d, n) - C(d, n)`, `d = floor(d_real)`.
pub fn ph_dimension_closed_form(dim: Dimension, d: f64) -> u64 {
    let n = dim.get() as u64;
    let d = floor_degree(d);
    binomial(n + d, n) - binomial(d, n)
}

fn floor_degree(d: f64) -> u64 {
    if d.is_nan() || d < 0.0 {
        0
    } else {
        d.floor() as u64
    }
}

const PRIMES: [u64; 3] = [(1 << 61) - 1, (1 << 62) - 57, 1_000_000_007];

/// Dimension of the kernel of `Δ^{n/2}` on polynomials of degree at most
/// `floor(d)`, from the exact rank of the coefficient map.
///
/// `Δ^{n/2}` maps homogeneous degree `k` to degree `k - n`, so the kernel
/// splits by degree. Ranks are computed modulo large primes; a modular rank
/// equal to `min(rows, cols)` certifies the rational rank.
pub fn ph_dimension(dim: Dimension, d: f64) -> u64 {
    let n = dim.get();
    let dmax = floor_degree(d) as u32;
    let mut total = 0u64;
    for k in 0..=dmax {
        let cols = monomials_of_degree(n, k);
        if (k as usize) < n {
            total += cols.len() as u64;
            continue;
        }
        let rows = monomials_of_degree(n, k - n as u32);
        let row_pos: BTreeMap<&MultiIndex, usize> = rows.iter().enumerate().map(|(i, a)| (a, i)).collect();
        // Integer matrix of Δ^{n/2}; column j is the image of monomial j.
        let mut mat = vec![vec![0i128; cols.len()]; rows.len()];
        for (j, a) in cols.iter().enumerate() {
            let img = apply_laplacian_poly(&Polynomial::from_terms(dim, [(a.clone(), 1.0)]), n / 2);
            for (b, c) in img.terms() {
                mat[row_pos[b]][j] = *c as i128;
            }
        }
        let full = rows.len().min(cols.len());
        let mut rank = 0;
        for &p in &PRIMES {
            rank = rank.max(rank_mod_p(&mat, p));
            if rank == full {
                break;
            }
        }
        total += (cols.len() - rank) as u64;
    }
    total
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn rank_mod_p(mat: &[Vec<i128>], p: u64) -> usize {
    let rows = mat.len();
    if rows == 0 {
        return 0;
    }
    let cols = mat[0].len();
    let mut m: Vec<Vec<u64>> = mat
        .iter()
        .map(|r| r.iter().map(|&v| v.rem_euclid(p as i128) as u64).collect())
        .collect();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let f = mul_mod(m[r][c], inv, p);
                for k in c..cols {
                    let sub = mul_mod(f, m[rank][k], p);
                    m[r][k] = (m[r][k] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i64) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let x1sq = Polynomial::from_terms(d(2), [(vec![2, 0], 1.0)]);
        assert_eq!(apply_laplacian_poly(&x1sq, 1), Polynomial::constant(d(2), 2.0));

        let r4 = Polynomial::norm_squared_power(d(4), 2);
        let expect = Polynomial::norm_squared_power(d(4), 1).scale(24.0);
        assert_eq!(apply_laplacian_poly(&r4, 1), expect);
        assert_eq!(apply_laplacian_poly(&r4, 2), Polynomial::constant(d(4), 192.0));

        let x1x2 = Polynomial::from_terms(d(2), [(vec![1, 1], 1.0)]);
        assert!(apply_laplacian_poly(&x1x2, 1).is_zero());
    }

    #[test]
    fn ph_dimension_examples() {
        assert_eq!(ph_dimension(d(2), 0.0), 1);
        assert_eq!(ph_dimension(d(2), 2.0), 5);
        assert_eq!(ph_dimension(d(4), 3.0), 35);
        assert_eq!(ph_dimension(d(4), 3.9), 35);
    }

    #[test]
    fn exact_ball_means() {
        // mean of |y|^2 over the unit ball in R^2 is 1/2
        let r2 = Polynomial::norm_squared_power(d(2), 1);
        assert!((r2.ball_mean(&[0.0, 0.0], 1.0) - 0.5).abs() < 1e-15);
        let x1 = Polynomial::coordinate(d(4), 0);
        assert_eq!(x1.ball_mean(&[0.0; 4], 3.0), 0.0);
        // harmonic mean-value property
        let h = Polynomial::from_terms(d(2), [(vec![2, 0], 1.0), (vec![0, 2], -1.0)]);
        let c = [0.3, -1.2];
        assert!((h.ball_mean(&c, 2.5) - h.eval(&c)).abs() < 1e-12);
    }

    #[test]
    fn translation() {
        let p = Polynomial::from_terms(d(2), [(vec![2, 1], 1.0), (vec![0, 0], 3.0)]);
        let q = p.translate(&[1.0, -2.0]);
        for y in [[0.1, 0.2], [-1.0, 3.0]] {
            let x = [y[0] + 1.0, y[1] - 2.0];
            assert!((q.eval(&y) - p.eval(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_of_degree(4, 3).len(), binomial(6, 3) as usize);
        assert_eq!(monomials_up_to(2, 2).len(), 6);
    }
}
