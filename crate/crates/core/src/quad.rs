//! Quadrature primitives: Gauss–Legendre rules, adaptive Gauss–Kronrod,
//! product rules on spheres, and tail integration in the log-radius variable.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&m) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(m));
    cache.lock().unwrap().insert(m, rule.clone());
    rule
}

fn compute_gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Fixed-order Gauss–Legendre on [a, b].
pub fn gl_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, m: usize) -> f64 {
    let rule = gauss_legendre(m);
    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: (integral, error estimate).
pub fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx)?;
        let f2 = f(c + dx)?;
        rk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let res = rk * h;
    let err = ((rk - rg) * h).abs();
    if !res.is_finite() {
        return Err(Error::Overflow(format!("non-finite integrand on [{a:e}, {b:e}]")));
    }
    Ok((res, err))
}

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel(rel_tol: f64) -> Self {
        QuadConfig {
            rel_tol,
            ..Default::default()
        }
    }
}

/// Globally adaptive Gauss–Kronrod on [a, b] with optional interior
/// breakpoints. Returns (integral, error estimate).
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > lo && p < hi).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);

    // (a, b, value, error)
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1])?;
        panels.push((w[0], w[1], v, e));
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= tol {
            return Ok((sign * total, err));
        }
        if panels.len() >= cfg.max_panels {
            // Accept when the remaining error is near the rounding floor.
            let scale: f64 = panels.iter().map(|p| p.2.abs()).sum();
            if err <= 1e3 * f64::EPSILON * scale.max(tol) {
                return Ok((sign * total, err));
            }
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature on [{lo:e}, {hi:e}]: error {err:e} > tolerance {tol:e}"
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::NoConvergence(format!(
                "panel [{pa:e}, {pb:e}] cannot be bisected further"
            )));
        }
        let (v1, e1) = gk15(&mut f, pa, mid)?;
        let (v2, e2) = gk15(&mut f, mid, pb)?;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Product quadrature rule on the unit sphere S^{n-1}; weights sum to 1.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Rule with `order` Gauss–Legendre nodes per polar angle and `2*order`
    /// trapezoid nodes in the azimuth.
    pub fn new(dim: usize, order: usize) -> Arc<SphereRule> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(r) = cache.lock().unwrap().get(&(dim, order)) {
            return r.clone();
        }
        let rule = Arc::new(Self::build(dim, order.max(1)));
        cache.lock().unwrap().insert((dim, order), rule.clone());
        rule
    }

    fn build(dim: usize, order: usize) -> SphereRule {
        assert!(dim >= 2);
        let naz = 2 * order;
        // Start with the circle S^1.
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(naz);
        let mut weights: Vec<f64> = Vec::with_capacity(naz);
        for k in 0..naz {
            let phi = 2.0 * PI * (k as f64 + 0.5) / naz as f64;
            points.push(vec![phi.cos(), phi.sin()]);
            weights.push(1.0 / naz as f64);
        }
        // Lift S^{d-2} to S^{d-1}: in x = cos(theta) the weight is
        // (1 - x^2)^{(d-3)/2}; Gauss–Legendre is exact for odd d and
        // Chebyshev nodes of the second kind absorb the square root for even d.
        let gl = gauss_legendre(order);
        for d in 3..=dim {
            let mut thetas = Vec::with_capacity(order);
            let mut tw = Vec::with_capacity(order);
            if d % 2 == 1 {
                let pw = ((d - 3) / 2) as i32;
                for (x, w) in gl.0.iter().zip(&gl.1) {
                    thetas.push(x.acos());
                    tw.push(w * (1.0 - x * x).powi(pw));
                }
            } else {
                let pw = ((d - 4) / 2) as i32;
                for k in 1..=order {
                    let th = PI * k as f64 / (order + 1) as f64;
                    let s = th.sin();
                    thetas.push(th);
                    tw.push(s * s * (s * s).powi(pw));
                }
            }
            let norm: f64 = tw.iter().sum();
            let mut np = Vec::with_capacity(points.len() * order);
            let mut nw = Vec::with_capacity(points.len() * order);
            for (th, w) in thetas.iter().zip(&tw) {
                let (s, c) = th.sin_cos();
                for (p, pw_) in points.iter().zip(&weights) {
                    let mut q = Vec::with_capacity(d);
                    q.push(c);
                    q.extend(p.iter().map(|v| v * s));
                    np.push(q);
                    nw.push(pw_ * w / norm);
                }
            }
            points = np;
            weights = nw;
        }
        SphereRule { dim, points, weights }
    }

    pub fn mean<F: FnMut(&[f64]) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut s = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            s += w * f(p)?;
        }
        Ok(s)
    }
}

/// Mean of `f` over the unit sphere, doubling the angular order until two
/// successive estimates agree to `tol` (relative to `scale`).
pub fn sphere_mean_adaptive<F: FnMut(&[f64]) -> Result<f64>>(
    dim: usize,
    mut f: F,
    tol: f64,
    start_order: usize,
    max_order: usize,
) -> Result<f64> {
    let mut order = start_order.max(2);
    let mut prev = SphereRule::new(dim, order).mean(&mut f)?;
    loop {
        let next_order = order * 2;
        if next_order > max_order {
            return Err(Error::NoConvergence(format!(
                "sphere mean did not settle by angular order {order}"
            )));
        }
        let cur = SphereRule::new(dim, next_order).mean(&mut f)?;
        if (cur - prev).abs() <= tol * (1.0 + cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
        order = next_order;
    }
}

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// Gamma function (Lanczos, g = 7) for positive arguments; exact for
/// integers and half-integers up to rounding.
pub fn gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && x > 0.0 && x < 171.0 {
        let mut f = 1.0;
        for i in 2..(x as u64) {
            f *= i as f64;
        }
        return f;
    }
    if (x - 0.5).fract() == 0.0 && x > 0.0 && x < 171.0 {
        // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
        let mut g = PI.sqrt();
        let mut t = 0.5;
        while t < x - 0.25 {
            g *= t;
            t += 1.0;
        }
        return g;
    }
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Outcome of integrating to infinity in the log-radius variable.
#[derive(Debug, Clone, PartialEq)]
pub enum TailOutcome {
    /// Convergent, with the integral value (tail extrapolation included).
    Finite(f64),
    /// Segment sums do not decay.
    Infinite,
    /// Segment ratios neither settle below the threshold nor stay at or above one.
    Inconclusive(f64),
}

/// Ratio threshold of the dyadic segment test.
pub const TAIL_RATIO_Q: f64 = 0.97;
/// Consecutive segments the ratio test inspects.
pub const TAIL_SEGMENTS: usize = 6;

/// Integrates `g(t)` over `[t_start, inf)` where `t = log r`.
///
/// The range `[t_start, 8]` is integrated directly; beyond it, segments
/// `[8,16], [16,32], ..., [256,512]` are integrated and the ratios of
/// consecutive segment sums decide convergence: all of the last
/// [`TAIL_SEGMENTS`] ratios `<= TAIL_RATIO_Q` gives a finite value with a
/// geometric tail extrapolation; ratios all `>= 1` (or overflow) gives
/// `Infinite`; anything else is `Inconclusive`. A segment that fails to
/// evaluate (say `r^2` overflowing far out) ends the test early: after
/// decay below rounding it is `Finite`, after at least three
/// non-decreasing segments it is `Infinite`. Two consecutive segments below
/// `rel_tol` of the running total also end the test as `Finite`.
pub fn log_tail_integral<F: FnMut(f64) -> Result<f64>>(
    mut g: F,
    t_start: f64,
    cfg: &QuadConfig,
) -> Result<TailOutcome> {
    let mut total = 0.0;
    let t_mid = 8.0_f64.max(t_start);
    if t_start < t_mid {
        let breaks: Vec<f64> = (t_start.ceil() as i64..t_mid as i64).map(|k| k as f64).collect();
        match integrate(&mut g, t_start, t_mid, &breaks, cfg) {
            Ok((v, _)) => total += v,
            Err(Error::Overflow(_)) => return Ok(TailOutcome::Infinite),
            Err(e) => return Err(e),
        }
    }
    let mut segs: Vec<f64> = Vec::new();
    let mut a = t_mid;
    while a < 512.0 {
        let b = 2.0 * a;
        // segment accuracy is judged against everything accumulated so far
        let acc = total + segs.iter().sum::<f64>();
        let seg_cfg = QuadConfig {
            abs_tol: cfg.abs_tol.max(cfg.rel_tol * acc.abs()),
            ..*cfg
        };
        match integrate(&mut g, a, b, &[], &seg_cfg) {
            Ok((v, _)) => {
                segs.push(v);
                // two segments at the rounding floor of the running total:
                // the integrand has decayed into evaluation noise
                let done = total + segs.iter().sum::<f64>();
                let floor = cfg.rel_tol * done.abs();
                if segs.len() >= 2 && segs[segs.len() - 2..].iter().all(|s| s.abs() <= floor) {
                    return Ok(TailOutcome::Finite(done));
                }
            }
            Err(e) => {
                // Integrands that have already decayed below rounding may fail
                // to evaluate far out (e.g. r^2 overflowing inside a log).
                let done = total + segs.iter().sum::<f64>();
                if let Some(&last) = segs.last() {
                    if last.abs() <= 1e-15 * done.abs()
                        && segs.windows(2).all(|w| w[1].abs() <= TAIL_RATIO_Q * w[0].abs())
                    {
                        return Ok(TailOutcome::Finite(done));
                    }
                }
                let growing = segs.len() >= 3 && segs.windows(2).all(|w| w[1].abs() >= w[0].abs());
                if matches!(e, Error::Overflow(_)) || growing {
                    return Ok(TailOutcome::Infinite);
                }
                return Err(e);
            }
        }
        a = b;
    }
    let head = total;
    let seg_total: f64 = segs.iter().sum();
    total += seg_total;
    let ratios: Vec<f64> = segs
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            // negligible against everything accumulated so far
            let scale = segs[..=i].iter().fold(head.abs(), |m, s| m.max(s.abs()));
            if w[1].abs() <= 1e-300 || w[1].abs() <= 1e-17 * scale {
                0.0
            } else if w[0] == 0.0 {
                f64::INFINITY
            } else {
                (w[1] / w[0]).abs()
            }
        })
        .collect();
    let tail: Vec<f64> = ratios.iter().rev().take(TAIL_SEGMENTS).copied().collect();
    if tail.iter().all(|&q| q <= TAIL_RATIO_Q) {
        let q = tail[0];
        let last = *segs.last().unwrap();
        let extra = if q > 0.0 { last * q / (1.0 - q) } else { 0.0 };
        return Ok(TailOutcome::Finite(total + extra));
    }
    if tail.iter().all(|&q| q >= 1.0) {
        return Ok(TailOutcome::Infinite);
    }
    Ok(TailOutcome::Inconclusive(total))
}
