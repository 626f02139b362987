//! Analytic oracles for a critical Markov branching process: the generating
//! function f, the slowly varying factor L, the backward-equation flow
//! F(s,t), the pi/rho/q/c stack and the reduced-process generating function,
//! plus closed-form limit laws.
//!
//! Everything funnels through one stable primitive: with s = e^{-lambda},
//!
//!     (f(s) - s)/(1 - s) = L(1/(1-s)) = sum_{k>=1} P(nu>k) (1 - e^{-lambda k}),
//!
//! a series of positive terms that never suffers the catastrophic
//! cancellation of evaluating f(s) - s near s = 1. For the heavy-tailed
//! family the series tail is summed by Euler-Maclaurin against the exact
//! log-substitution integral, so the evaluation stays cheap and accurate out
//! to astronomically large 1/(1-s).

use std::f64::consts::E;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, ln_e_plus_exp, quad_gl32};
use crate::offspring::OffspringLaw;

/// Finite-t oracles are only trusted while Q(t) stays above this floor;
/// beyond it callers must compare against limit laws instead.
const Q_FLOOR: f64 = 1e-12;

/// Explicit terms in the heavy-tail ell series before Euler-Maclaurin.
const ELL_EXPLICIT: usize = 2048;

/// pi switches from direct quadrature of 1/(f(v)-v) to the
/// w = -ln(1-v) substitution above this point.
const PI_SPLIT: f64 = 0.9;

#[derive(Debug)]
enum EllEngine {
    /// tail(k) = c * k^{-1} (ln(e+k))^{-1-beta}; cached values for
    /// k = 1..=ELL_EXPLICIT, Euler-Maclaurin beyond.
    Heavy {
        beta: f64,
        c: f64,
        t0: f64,
        tails: Vec<f64>,
    },
    /// Finite support: tails[k] = P(nu > k).
    Finite { tails: Vec<f64> },
    /// Laws without a usable integrated-tail representation (infinite-mean
    /// reproduction); the ode/pi/q stack is unavailable for them.
    Unsupported,
}

impl EllEngine {
    fn for_law(law: &OffspringLaw) -> Self {
        if let Some(h) = law.as_heavy() {
            Self::Heavy {
                beta: h.beta(),
                c: h.tail_constant(),
                t0: h.p_positive(),
                tails: (1..=ELL_EXPLICIT as u64).map(|k| h.tail(k)).collect(),
            }
        } else if let Some(t) = law.as_table() {
            Self::Finite {
                tails: (1..=64).map(|k| t.tail(k)).take_while(|&v| v > 0.0).collect(),
            }
        } else {
            Self::Unsupported
        }
    }

    fn supported(&self) -> bool {
        !matches!(self, Self::Unsupported)
    }

    /// ell(s) = sum_{k>=1} tail(k)(1 - s^k) for |s| small (including small
    /// negative s, needed when extracting pmf coefficients by finite
    /// differences). Split as sum tail(k) - sum tail(k) s^k; the power
    /// series converges in a handful of terms.
    fn eval_small_s(&self, s: f64) -> f64 {
        debug_assert!(s.abs() < 0.01);
        let (total, tails): (f64, &[f64]) = match self {
            Self::Heavy { t0, tails, .. } => (1.0 - t0, tails),
            Self::Finite { tails } => (tails.iter().sum(), tails),
            Self::Unsupported => return f64::NAN,
        };
        let mut power_part = 0.0;
        let mut sk = 1.0;
        for &t in tails.iter().take(64) {
            sk *= s;
            power_part += t * sk;
            if sk.abs() < 1e-18 {
                break;
            }
        }
        total - power_part
    }

    /// ell(lambda) = sum_{k>=1} tail(k)(1 - e^{-lambda k}), parameterized by
    /// ln(lambda) so that lambda as small as e^{-5000} stays representable.
    fn eval_ln_lambda(&self, ln_lam: f64) -> f64 {
        match self {
            Self::Finite { tails } => {
                let lam = ln_lam.exp();
                tails
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| {
                        let k = (i + 1) as f64;
                        t * (-(-lam * k).exp_m1())
                    })
                    .sum()
            }
            Self::Heavy { beta, c, tails, .. } => heavy_ell(*beta, *c, tails, ln_lam),
            Self::Unsupported => f64::NAN,
        }
    }
}

/// The heavy-tail ell series: explicit head plus Euler-Maclaurin tail with
/// the integral evaluated after the substitution u = e^v.
fn heavy_ell(beta: f64, c: f64, tails: &[f64], ln_lam: f64) -> f64 {
    let lam = if ln_lam > 700.0 { f64::INFINITY } else { ln_lam.exp() };
    let mut head = 0.0;
    if lam.is_infinite() {
        for &t in tails {
            head += t;
        }
    } else {
        for (i, &t) in tails.iter().enumerate() {
            let k = (i + 1) as f64;
            head += t * (-(-lam * k).exp_m1());
        }
    }

    let a = (tails.len() + 1) as f64;
    let la = a.ln();
    // Integration in v = ln u from la up to v_cut, beyond which the
    // (1 - e^{-lambda u}) factor is 1 to within e^{-45} and the remaining
    // integral of (ln(e+e^v))^{-1-beta} is v_cut^{-beta}/beta exactly up to
    // exponentially small terms.
    let v_cut = la.max(40.0).max(45f64.ln() - ln_lam);
    // Below v_lo the factor -expm1(-lam e^v) <= lam e^v contributes less
    // than e^{-50} in total; skip that stretch.
    let v_lo = la.max(-50.0 - ln_lam);
    let integrand = |v: f64| {
        let xi = v + ln_lam; // ln(lambda e^v)
        let fac = if xi > 4.0 {
            1.0
        } else {
            -(-xi.exp()).exp_m1()
        };
        fac * ln_e_plus_exp(v).powf(-(1.0 + beta))
    };
    let quad = crate::numeric::quad_panels(integrand, v_lo, v_cut, 0.5);
    let integral = c * (quad + v_cut.powf(-beta) / beta);

    // Euler-Maclaurin corrections at u = a for
    // psi(u) = c (1-e^{-lambda u}) / (u ln(e+u)^{1+beta}).
    let l = (E + a).ln();
    let kernel = c / (a * l.powf(1.0 + beta));
    let kernel_prime =
        -c / (a * a * l.powf(1.0 + beta)) - c * (1.0 + beta) / (a * (E + a) * l.powf(2.0 + beta));
    let (fac, dfac) = if lam.is_infinite() {
        (1.0, 0.0)
    } else {
        let x = lam * a;
        let fac = if x > 50.0 { 1.0 } else { -(-x).exp_m1() };
        let dfac = if x > 700.0 { 0.0 } else { lam * (-x).exp() };
        (fac, dfac)
    };
    let psi_a = fac * kernel;
    let psi_prime_a = dfac * kernel + fac * kernel_prime;

    head + integral + 0.5 * psi_a - psi_prime_a / 12.0
}

/// ln(-ln(1 - e^{-w})): the log of lambda(w) where s = 1 - e^{-w}.
fn ln_lambda_of_w(w: f64) -> f64 {
    debug_assert!(w >= 0.0);
    if w == 0.0 {
        return f64::INFINITY;
    }
    if w > 30.0 {
        // lambda = -ln(1-e^{-w}) = e^{-w}(1 + e^{-w}/2 + ...)
        -w + 0.5 * (-w).exp()
    } else {
        (-(-(-w).exp()).ln_1p()).ln()
    }
}

/// ln(-ln s) for s in [0,1).
fn ln_lambda_of_s(s: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&s));
    if s == 0.0 {
        return f64::INFINITY;
    }
    let w = -(1.0 - s).ln(); // = -ln(1-s)
    ln_lambda_of_w(w)
}

#[derive(Debug, Default)]
struct RhoGrid {
    /// Checkpoints 0 = w_0 < w_1 < ...  with cumulative integral values.
    ws: Vec<f64>,
    cum: Vec<f64>,
}

/// Analytic function stack for one offspring law.
#[derive(Debug)]
pub struct AnalyticModel {
    law: OffspringLaw,
    ell: EllEngine,
    series_tol: f64,
    quad_rel_tol: f64,
    ode_rel_tol: f64,
    rho_grid: Mutex<RhoGrid>,
}

impl AnalyticModel {
    pub fn new(law: OffspringLaw) -> Self {
        let ell = EllEngine::for_law(&law);
        Self {
            law,
            ell,
            series_tol: 1e-14,
            quad_rel_tol: 1e-11,
            ode_rel_tol: 1e-9,
            rho_grid: Mutex::new(RhoGrid {
                ws: vec![0.0],
                cum: vec![0.0],
            }),
        }
    }

    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }

    fn require_ell(&self) -> Result<()> {
        if self.ell.supported() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "law kind {:?} has no integrated-tail representation; \
                 use the closed-form limit generating functions instead",
                self.law.kind()
            )))
        }
    }

    /// g(w) = L(e^w) extended to slightly negative w (the backward flow
    /// started from s < 0 dips below zero by at most the finite-difference
    /// step used for coefficient extraction).
    fn ell_at_w(&self, w: f64) -> f64 {
        if w >= 0.0 {
            self.ell.eval_ln_lambda(ln_lambda_of_w(w))
        } else {
            debug_assert!(w > -0.01, "flow left the supported range: w = {w}");
            self.ell.eval_small_s(-(-w).exp_m1())
        }
    }

    // -- generating function -------------------------------------------------

    /// f(s) = E[s^nu] by direct series summation, with the geometric bound
    /// tail(K) s^{K+1} driving truncation. Exactly 1 at s = 1.
    pub fn f_eval(&self, s: f64) -> f64 {
        assert!((0.0..=1.0).contains(&s), "s must lie in [0,1]");
        if s == 1.0 {
            return 1.0;
        }
        if s == 0.0 {
            return self.law.pmf(0);
        }
        // Near s = 1 the direct series needs ~1/(1-s) terms; the
        // integrated-tail representation f = s + (1-s) ell is exact and fast.
        if s > 0.99 && self.ell.supported() {
            return s + (1.0 - s) * self.ell.eval_ln_lambda(ln_lambda_of_s(s));
        }
        let mut total = self.law.pmf(0);
        let mut sk = 1.0;
        const MAX_TERMS: u64 = 5_000_000;
        for k in 1..=MAX_TERMS {
            sk *= s;
            total += self.law.pmf(k) * sk;
            if self.law.tail(k) * sk * s < self.series_tol {
                break;
            }
        }
        total
    }

    /// f(s) - s without cancellation, via the integrated-tail series.
    pub fn f_minus_id(&self, s: f64) -> Result<f64> {
        self.require_ell()?;
        assert!((0.0..1.0).contains(&s));
        Ok((1.0 - s) * self.ell.eval_ln_lambda(ln_lambda_of_s(s)))
    }

    /// L(x) = (f(s) - s) x with s = 1 - 1/x: the slowly varying factor in
    /// the critical decomposition, evaluated through the tail-sum series.
    /// Works for arbitrarily large x; lambda = -ln(1-1/x) is formed without
    /// ever rounding s to 1.
    pub fn l_eval(&self, x: f64) -> Result<f64> {
        if !(x > 1.0) {
            return Err(Error::Domain(format!("L is defined for x > 1, got {x}")));
        }
        self.require_ell()?;
        let inv = 1.0 / x;
        let ln_lam = if inv < 1e-8 {
            // lambda = inv (1 + inv/2 + O(inv^2))
            inv.ln() + (0.5 * inv).ln_1p()
        } else {
            (-(-inv).ln_1p()).ln()
        };
        Ok(self.ell.eval_ln_lambda(ln_lam))
    }

    /// g(w) = L(e^w); g(0) = f(0) by continuity.
    pub fn g_eval(&self, w: f64) -> Result<f64> {
        if w < 0.0 {
            return Err(Error::Domain(format!("g is defined for w >= 0, got {w}")));
        }
        self.require_ell()?;
        Ok(self.ell_at_w(w))
    }

    // -- backward Kolmogorov flow --------------------------------------------

    /// F(s, t): the generating function of Z(t) started from one particle,
    /// by adaptive Runge-Kutta on the backward equation. Integration happens
    /// in y = -ln(1-F), whose flow is y' = g(y); this preserves relative
    /// accuracy of 1 - F all the way down to the f64 floor.
    pub fn solve_f(&self, s: f64, t: f64) -> Result<f64> {
        assert!((0.0..=1.0).contains(&s), "s must lie in [0,1]");
        assert!(t >= 0.0, "t must be nonnegative");
        if s == 1.0 {
            return Ok(1.0);
        }
        if t == 0.0 {
            return Ok(s);
        }
        let y0 = -(1.0 - s).ln();
        let y = self.flow_y(y0, t)?;
        Ok(-(-y).exp_m1())
    }

    /// -ln(1 - F(s,t)); the survival exponent when s = 0.
    pub fn flow_y(&self, y0: f64, t: f64) -> Result<f64> {
        self.require_ell()?;
        if t == 0.0 {
            return Ok(y0);
        }
        rk45(|y| self.ell_at_w(y), y0, t, self.ode_rel_tol)
    }

    /// Q(t) = P(Z(t) > 0) and its exponent q = -ln Q, via the ODE route.
    pub fn survival(&self, t: f64) -> Result<Survival> {
        let q = self.flow_y(0.0, t)?;
        Ok(Survival { q, prob: (-q).exp() })
    }

    // -- pi and rho -----------------------------------------------------------

    /// pi(s) = int_0^s dv/(f(v)-v). Direct adaptive quadrature up to
    /// PI_SPLIT; beyond that the w = -ln(1-v) substitution (integrand 1/g)
    /// removes the near-pole growth.
    pub fn pi_eval(&self, s: f64) -> Result<f64> {
        if s == 1.0 {
            return Err(Error::PiDiverges);
        }
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain(format!("pi is defined on [0,1), got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        self.require_ell()?;
        let upper = s.min(PI_SPLIT);
        // Direct route through the f series; probe criticality first.
        for v in [0.0, 0.5 * upper, upper] {
            let gap = self.f_eval(v) - v;
            if !(gap > 0.0) {
                return Err(Error::Domain(format!(
                    "f(v) - v = {gap} at v = {v}; pi requires f > id on [0,1)"
                )));
            }
        }
        let mut total = adaptive_simpson(
            |v| 1.0 / (self.f_eval(v) - v),
            0.0,
            upper,
            self.quad_rel_tol,
            1e-14,
        )?;
        if s > PI_SPLIT {
            let w_lo = -(1.0 - PI_SPLIT).ln();
            let w_hi = -(1.0 - s).ln();
            total += self.rho(w_hi)? - self.rho(w_lo)?;
        }
        Ok(total)
    }

    /// rho(x) = int_0^x dw/g(w) = pi(1 - e^{-x}), maintained on a lazily
    /// extended geometric checkpoint grid so repeated root-solves stay cheap.
    pub fn rho(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("rho is defined for x >= 0, got {x}")));
        }
        self.require_ell()?;
        let g = |w: f64| self.ell_at_w(w);
        let mut grid = self.rho_grid.lock().expect("rho grid lock");
        while *grid.ws.last().unwrap() < x {
            let last = *grid.ws.last().unwrap();
            let next = if last == 0.0 { 0.0625 } else { last * 1.189_207_115_002_721 };
            let seg = quad_gl32(|w| 1.0 / g(w), last, next);
            let cum = grid.cum.last().unwrap() + seg;
            grid.ws.push(next);
            grid.cum.push(cum);
        }
        let i = grid.ws.partition_point(|&w| w <= x) - 1;
        Ok(grid.cum[i] + quad_gl32(|w| 1.0 / g(w), grid.ws[i], x))
    }

    /// q(t) = -ln Q(t) recovered by inverting rho(q) = t (rho strictly
    /// increasing); bracketed Newton with slope 1/g.
    pub fn q_of_t(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("q(t) needs t > 0, got {t}")));
        }
        self.require_ell()?;
        // Bracket by doubling.
        let mut hi = 1.0;
        let mut lo = 0.0;
        let mut iter = 0;
        while self.rho(hi)? < t {
            lo = hi;
            hi *= 2.0;
            iter += 1;
            if iter > 200 {
                return Err(Error::Numerical(format!(
                    "failed to bracket rho(q) = {t}; rho({hi}) still below"
                )));
            }
        }
        let g = |w: f64| self.ell_at_w(w);
        let mut q = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.rho(q)? - t;
            if r > 0.0 {
                hi = q;
            } else {
                lo = q;
            }
            let mut next = q - r * g(q);
            if !(lo..=hi).contains(&next) {
                next = 0.5 * (lo + hi);
            }
            if (next - q).abs() <= 1e-13 * (1.0 + q.abs()) {
                return Ok(next);
            }
            q = next;
        }
        Err(Error::Numerical(format!(
            "q(t) Newton failed to converge at t = {t}"
        )))
    }

    /// The scaling function for ln Z(t) conditioned on survival:
    /// c(t) = q(1/g(q(t))), regularly varying with index beta/(1+beta)^2.
    pub fn c_of_t(&self, t: f64) -> Result<f64> {
        let qt = self.q_of_t(t)?;
        let g = self.g_eval(qt)?;
        if g >= 1.0 {
            return Err(Error::Domain(format!(
                "g(q(t)) = {g} >= 1 at t = {t}: pre-asymptotic regime, take t larger"
            )));
        }
        self.q_of_t(1.0 / g)
    }

    /// Delta(s,t) = rho(q(t) - ln(1-s)) - t.
    pub fn delta(&self, s: f64, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::Domain(format!("delta needs s in [0,1), got {s}")));
        }
        let qt = self.q_of_t(t)?;
        Ok(self.rho(qt - (1.0 - s).ln())? - t)
    }

    // -- reduced process ------------------------------------------------------

    /// E[s^{Z(u,t)} | Z(t) > 0]: the reduced-process generating function at
    /// observation time u with horizon t, via two backward flows.
    pub fn reduced_gf(&self, s: f64, u: f64, t: f64) -> Result<f64> {
        if !(0.0..=t).contains(&u) {
            return Err(Error::Domain(format!("need 0 <= u <= t, got u={u}, t={t}")));
        }
        if s >= 1.0 {
            return Ok(1.0);
        }
        let qt = self.flow_y(0.0, t)?;
        if qt > -Q_FLOOR.ln() {
            return Err(Error::SurvivalUnderflow { t });
        }
        let q_tu = self.flow_y(0.0, t - u)?;
        let y_star = q_tu - (1.0 - s).ln();
        let y_out = self.flow_y(y_star, u)?;
        Ok(-(qt - y_out).exp_m1())
    }

    /// P(Z(u,t) = 1 | Z(t) > 0) = P(tau(t) <= t-u | survival), extracted
    /// from the generating function by central finite difference at s = 0.
    pub fn reduced_marginal_one(&self, u: f64, t: f64) -> Result<f64> {
        const H: f64 = 1e-4;
        let plus = self.reduced_gf(H, u, t)?;
        let minus = self.reduced_gf(-H, u, t)?;
        Ok((plus - minus) / (2.0 * H))
    }
}

/// Survival data at one horizon: q = -ln Q and Q itself.
#[derive(Debug, Clone, Copy)]
pub struct Survival {
    pub q: f64,
    pub prob: f64,
}

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) for the scalar autonomous flow y' = g(y).
// ---------------------------------------------------------------------------

fn rk45(g: impl Fn(f64) -> f64, y0: f64, t_end: f64, rel_tol: f64) -> Result<f64> {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // 4th-order embedded weights.
    const E1: f64 = 5179.0 / 57600.0;
    const E3: f64 = 7571.0 / 16695.0;
    const E4: f64 = 393.0 / 640.0;
    const E5: f64 = -92097.0 / 339200.0;
    const E6: f64 = 187.0 / 2100.0;
    const E7: f64 = 1.0 / 40.0;

    let abs_tol = 1e-12;
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = g(y);
    let mut h = (0.1 * (1.0 + y.abs()) / (k1.abs() + 1e-30)).min(t_end);
    let min_step = t_end * 1e-14;

    while t < t_end {
        if h < min_step {
            return Err(Error::Numerical(format!(
                "RK45 step underflow at t = {t} (y = {y}, h = {h})"
            )));
        }
        h = h.min(t_end - t);
        let k2 = g(y + h * A21 * k1);
        let k3 = g(y + h * (A31 * k1 + A32 * k2));
        let k4 = g(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = g(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = g(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = g(y5);
        let y4 = y + h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let err = (y5 - y4).abs();
        let tol = abs_tol + rel_tol * y5.abs().max(y.abs());
        if err <= tol {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}

// ---------------------------------------------------------------------------
// Closed-form limit laws
// ---------------------------------------------------------------------------

/// The beta-regime limit distributions: MRCA law, its density, the size law
/// and the single-line marginal of the limit genealogy.
#[derive(Debug, Clone, Copy)]
pub struct LimitLaws {
    beta: f64,
}

impl LimitLaws {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// lim P(tau(t) <= t x | survival) = x^{beta/(1+beta)} on [0,1].
    pub fn mrca_cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("mrca_cdf needs x in [0,1], got {x}")));
        }
        Ok(x.powf(self.beta / (1.0 + self.beta)))
    }

    /// Density of the limiting tau(t)/t.
    pub fn phi_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain(format!(
                "phi density needs x in (0,1], got {x}"
            )));
        }
        let b = self.beta;
        Ok(b / (1.0 + b) * x.powf(-1.0 / (1.0 + b)))
    }

    /// lim P(ln Z(t) <= x c(t) | survival) = 1 - e^{-x^{1+beta}} on [0,inf).
    pub fn size_cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("size_cdf needs x >= 0, got {x}")));
        }
        Ok(-(-x.powf(1.0 + self.beta)).exp_m1())
    }

    /// P(R(y) = 1 | R(x) = 1) = ((1-y)/(1-x))^{beta/(1+beta)} for
    /// 0 <= x <= y < 1 in the limit genealogy.
    pub fn marginal_one(&self, x: f64, y: f64) -> Result<f64> {
        if !(0.0 <= x && x <= y && y < 1.0) {
            return Err(Error::Domain(format!(
                "marginal_one needs 0 <= x <= y < 1, got ({x}, {y})"
            )));
        }
        Ok(((1.0 - y) / (1.0 - x)).powf(self.beta / (1.0 + self.beta)))
    }
}

pub fn limit_cdfs(beta: f64) -> Result<LimitLaws> {
    LimitLaws::new(beta)
}

/// Which closed-form limit generating function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedMode {
    /// F_alpha(s,t) = 1 - (1 - e^{-t} + e^{-t}(1-s)^{-alpha})^{-1/alpha},
    /// alpha in (0,1]; alpha = 1 is the Yule/shifted-geometric case.
    Alpha(f64),
    /// F_0(s,t) = 1 - (1-s)^{e^{-t}}.
    Zero,
}

/// Closed-form generating functions of the limit processes Z_alpha and Z_0.
pub fn f_closed(mode: ClosedMode, s: f64, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain(format!("f_closed needs s in [0,1), got {s}")));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("f_closed needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(s);
    }
    match mode {
        ClosedMode::Zero => Ok(-((-t).exp() * (-s).ln_1p()).exp_m1()),
        ClosedMode::Alpha(alpha) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "alpha must lie in (0,1], got {alpha}"
                )));
            }
            // inner - 1 = e^{-t} ((1-s)^{-alpha} - 1), kept as expm1 to
            // survive alpha -> 0 and s -> 0 without precision loss.
            let inner_m1 = (-t).exp() * (-alpha * (-s).ln_1p()).exp_m1();
            Ok(-(-(inner_m1).ln_1p() / alpha).exp_m1())
        }
    }
}
