//! Shared numerical kernels: Gauss-Legendre panels, adaptive Simpson,
//! compensated summation and stable log-gamma ratios.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const GL_N: usize = 32;

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        // Roots of P_32 by Newton iteration from the Chebyshev estimate.
        let n = GL_N;
        let mut xs = vec![0.0; n];
        let mut ws = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            xs[i] = -x;
            ws[i] = w;
            xs[n - 1 - i] = x;
            ws[n - 1 - i] = w;
        }
        (xs, ws)
    })
}

/// 32-point Gauss-Legendre quadrature on [a, b].
pub fn quad_gl32<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (xs, ws) = gl_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in xs.iter().zip(ws.iter()) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Gauss-Legendre over [a, b] split into panels no longer than `max_panel`.
pub fn quad_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_panel: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / max_panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut acc = KahanSum::new();
    for i in 0..n {
        acc.add(quad_gl32(&f, a + i as f64 * h, a + (i + 1) as f64 * h));
    }
    acc.value()
}

/// Adaptive Simpson with mixed relative/absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 {
            if depth == 0 && delta.abs() > 15.0 * tol {
                return Err(Error::Numerical(format!(
                    "adaptive quadrature failed to converge on [{a}, {b}]"
                )));
            }
            return Ok(left + right + delta / 15.0);
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }

    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let tol = abs_tol.max(rel_tol * whole.abs());
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Kahan-Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// ln Gamma(k+a) - ln Gamma(k+b), stable for large k where the direct
/// difference of near-equal log-gammas loses all precision.
pub fn ln_gamma_ratio(k: f64, a: f64, b: f64) -> f64 {
    debug_assert!(k + a > 0.0 && k + b > 0.0);
    if k < 1e7 {
        ln_gamma(k + a) - ln_gamma(k + b)
    } else {
        (a - b) * k.ln() + (a - b) * (a + b - 1.0) / (2.0 * k)
    }
}

/// ln(e + e^v), stable for all v.
pub fn ln_e_plus_exp(v: f64) -> f64 {
    if v > 30.0 {
        v + (1.0 - v).exp().ln_1p()
    } else {
        (E + v.exp()).ln()
    }
}
