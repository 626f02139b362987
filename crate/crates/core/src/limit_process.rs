//! Exact samplers for the limit genealogies: the recursive tree built from
//! scale-free branch lengths (uniform in the alpha regime, power-law in the
//! beta regime) with nu_alpha / nu_0 splits, trajectory counting R(x), and
//! direct marginal samplers from the closed-form generating functions.

use rand::distr::OpenClosed01;
use rand::Rng;

use crate::analytic::{f_closed, ClosedMode};
use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitMode {
    /// Zolotarev-Slack regime, alpha in (0,1]; branch fractions are uniform
    /// and splits follow nu_alpha (binary Yule splits at alpha = 1).
    Alpha(f64),
    /// Very-heavy-tail regime with parameter beta > 0; branch fractions
    /// follow the MRCA density and splits follow nu_0.
    Zero(f64),
}

#[derive(Debug, Clone)]
pub struct LimitConfig {
    pub mode: LimitMode,
    /// Smallest tracked interval before the horizon: branches whose
    /// remaining scale drops below this stop splitting.
    pub resolution: f64,
    /// Hard cap on materialized nodes per tree.
    pub node_cap: u32,
}

impl LimitConfig {
    pub fn new(mode: LimitMode) -> Self {
        Self {
            mode,
            resolution: 1e-3,
            node_cap: 2_000_000,
        }
    }

    pub fn with_resolution(mode: LimitMode, resolution: f64, node_cap: u32) -> Self {
        Self {
            mode,
            resolution,
            node_cap,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            LimitMode::Alpha(a) if !(a > 0.0 && a <= 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "alpha must lie in (0,1], got {a}"
                )))
            }
            LimitMode::Zero(b) if !(b > 0.0 && b.is_finite()) => {
                return Err(Error::InvalidParameter(format!(
                    "beta must be positive, got {b}"
                )))
            }
            _ => {}
        }
        if !(self.resolution > 0.0 && self.resolution < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "resolution must lie in (0, 0.5), got {}",
                self.resolution
            )));
        }
        if self.node_cap == 0 || self.node_cap == u32::MAX {
            return Err(Error::InvalidParameter("node cap out of range".into()));
        }
        Ok(())
    }
}

/// One branch of the limit tree. `split` is where the branch ends; nodes
/// with `children == 0` extend past the tracked window (their real split
/// lies beyond 1 - resolution, or their subtree was cut by the node cap).
#[derive(Debug, Clone, Copy)]
pub struct LimitNode {
    pub parent: u32,
    pub split: f64,
    pub children: u32,
}

#[derive(Debug, Clone)]
pub struct LimitTree {
    pub nodes: Vec<LimitNode>,
    /// The node cap cut at least one subtree: every R(x) read from this
    /// tree is a lower bound and statistics must treat it as censored.
    pub truncated: bool,
    pub resolution: f64,
}

/// The scale fraction tau in (0,1): a branch at remaining scale sigma lives
/// (1 - tau) sigma and leaves tau sigma for its offspring.
pub fn tau_from_uniform(mode: LimitMode, u: f64) -> f64 {
    match mode {
        LimitMode::Alpha(_) => u,
        LimitMode::Zero(beta) => u.powf((1.0 + beta) / beta),
    }
}

pub fn sample_tau<R: Rng + ?Sized>(mode: LimitMode, rng: &mut R) -> f64 {
    tau_from_uniform(mode, rng.random::<f64>())
}

/// Limit-genealogy sampler for one mode/resolution/cap configuration.
#[derive(Debug)]
pub struct LimitSampler {
    config: LimitConfig,
    brood: OffspringLaw,
}

impl LimitSampler {
    pub fn new(config: LimitConfig) -> Result<Self> {
        config.validate()?;
        let brood = match config.mode {
            LimitMode::Alpha(a) => OffspringLaw::alpha_limit(a)?,
            LimitMode::Zero(_) => OffspringLaw::zero_limit(),
        };
        Ok(Self { config, brood })
    }

    pub fn config(&self) -> &LimitConfig {
        &self.config
    }

    /// Recursive construction: the root lives 1 - tau_0; a child at
    /// remaining scale sigma lives (1 - tau') sigma and recurses. Splitting
    /// stops below the resolution or at the node cap (tree flagged).
    pub fn sample_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> LimitTree {
        let eps = self.config.resolution;
        let cap = self.config.node_cap as u64;
        let mut nodes: Vec<LimitNode> = Vec::new();
        let mut stack: Vec<(u32, f64)> = vec![(NO_PARENT, 0.0)];
        let mut truncated = false;

        while let Some((parent, birth)) = stack.pop() {
            let idx = nodes.len() as u32;
            let tau = sample_tau(self.config.mode, rng);
            let sigma = 1.0 - birth;
            let split = birth + (1.0 - tau) * sigma;
            let remaining = sigma * tau;
            let mut children = 0u32;
            if remaining >= eps {
                let brood = self.brood.sample(rng);
                // Pending stack entries are committed future nodes.
                let budget = cap
                    .saturating_sub(nodes.len() as u64 + 1)
                    .saturating_sub(stack.len() as u64);
                if brood <= budget {
                    children = brood as u32;
                    for _ in 0..brood {
                        stack.push((idx, split));
                    }
                } else {
                    truncated = true;
                }
            }
            nodes.push(LimitNode {
                parent,
                split,
                children,
            });
        }

        LimitTree {
            nodes,
            truncated,
            resolution: eps,
        }
    }
}

/// R(x) = number of branches crossing each query position: 1 plus the net
/// gain (children - 1) over every materialized split at or before x.
/// Queries must stay inside the tracked window x < 1 - resolution.
pub fn trajectory_at(tree: &LimitTree, xs: &[f64]) -> Result<Vec<u64>> {
    for w in xs.windows(2) {
        if w[0] > w[1] {
            return Err(Error::Domain("query positions must be sorted".into()));
        }
    }
    if let Some(&last) = xs.last() {
        if !(last < 1.0 - tree.resolution) {
            return Err(Error::Domain(format!(
                "query {last} beyond the tracked window [0, {})",
                1.0 - tree.resolution
            )));
        }
    }
    if xs.iter().any(|&x| x < 0.0) {
        return Err(Error::Domain("query positions must be nonnegative".into()));
    }
    let mut splits: Vec<(f64, u64)> = tree
        .nodes
        .iter()
        .filter(|n| n.children >= 1)
        .map(|n| (n.split, n.children as u64 - 1))
        .collect();
    splits.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite split positions"));

    let mut out = Vec::with_capacity(xs.len());
    let mut value = 1u64;
    let mut i = 0;
    for &x in xs {
        while i < splits.len() && splits[i].0 <= x {
            value += splits[i].1;
            i += 1;
        }
        out.push(value);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Direct marginal samplers
// ---------------------------------------------------------------------------

/// Draws R(x) directly from the closed-form marginal law, without building
/// a tree.
#[derive(Debug)]
pub struct MarginalSampler {
    inner: MarginalInner,
}

#[derive(Debug)]
enum MarginalInner {
    /// x = 0 in any mode: a single ancestor.
    One,
    /// Zero mode: Sibuya with gamma = (1-x)^{beta/(1+beta)}.
    Sibuya(OffspringLaw),
    /// Alpha = 1: shifted geometric with success 1-x.
    Geometric { success: f64 },
    /// Alpha in (0,1): inverse transform on the extracted series
    /// coefficients of the closed-form generating function.
    Series { cdf: Vec<f64>, covered: f64 },
}

impl MarginalSampler {
    pub fn new(mode: LimitMode, x: f64, series_cap: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("x must lie in [0,1), got {x}")));
        }
        if x == 0.0 {
            return Ok(Self {
                inner: MarginalInner::One,
            });
        }
        let inner = match mode {
            LimitMode::Zero(beta) => {
                if !(beta > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "beta must be positive, got {beta}"
                    )));
                }
                let gamma = (1.0 - x).powf(beta / (1.0 + beta));
                MarginalInner::Sibuya(OffspringLaw::sibuya(gamma)?)
            }
            LimitMode::Alpha(alpha) if alpha == 1.0 => MarginalInner::Geometric { success: 1.0 - x },
            LimitMode::Alpha(alpha) => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must lie in (0,1], got {alpha}"
                    )));
                }
                let pmf = alpha_marginal_coefficients(alpha, x, series_cap)?;
                let mut cdf = Vec::with_capacity(pmf.len());
                let mut acc = 0.0;
                for p in pmf {
                    acc += p;
                    cdf.push(acc);
                }
                MarginalInner::Series { cdf, covered: acc }
            }
        };
        Ok(Self { inner })
    }

    /// Probability mass covered by the prepared table (1 for closed-form
    /// modes).
    pub fn covered_mass(&self) -> f64 {
        match &self.inner {
            MarginalInner::Series { covered, .. } => *covered,
            _ => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        match &self.inner {
            MarginalInner::One => Ok(1),
            MarginalInner::Sibuya(law) => Ok(law.sample(rng)),
            MarginalInner::Geometric { success } => {
                if *success >= 1.0 {
                    return Ok(1);
                }
                let u: f64 = rng.sample(OpenClosed01);
                Ok(1 + (u.ln() / (1.0 - success).ln()).floor() as u64)
            }
            MarginalInner::Series { cdf, covered } => {
                let u: f64 = rng.sample(OpenClosed01);
                if u > *covered {
                    return Err(Error::SeriesCap {
                        cap: cdf.len(),
                        uncovered: 1.0 - covered,
                    });
                }
                // first index with cdf >= u; index i corresponds to k = i+1
                let i = cdf.partition_point(|&c| c < u);
                Ok((i + 1) as u64)
            }
        }
    }
}

/// Taylor coefficients p_k = P(Z_alpha(t) = k), k = 1..=cap, of the closed
/// form F_alpha(s,t) at t = -ln(1-x), via the power-of-a-series (Miller)
/// recurrence applied to (1 - e^{-t} + e^{-t}(1-s)^{-alpha})^{-1/alpha}.
fn alpha_marginal_coefficients(alpha: f64, x: f64, cap: usize) -> Result<Vec<f64>> {
    if cap < 2 {
        return Err(Error::InvalidParameter("series cap too small".into()));
    }
    let b = 1.0 - x; // e^{-t}
    // u(s) = 1 + b * sum_{k>=1} c_k s^k with c_k = C(k+alpha-1, k)
    let mut u = vec![0.0; cap + 1];
    u[0] = 1.0;
    let mut c = 1.0;
    for (k, slot) in u.iter_mut().enumerate().skip(1) {
        c *= (k as f64 - 1.0 + alpha) / k as f64;
        *slot = b * c;
    }
    // w = u^m, m = -1/alpha; F = 1 - w, so p_k = -w_k for k >= 1.
    let m = -1.0 / alpha;
    let mut w = vec![0.0; cap + 1];
    w[0] = 1.0;
    for n in 1..=cap {
        let mut acc = 0.0;
        for j in 1..=n {
            acc += ((m + 1.0) * j as f64 - n as f64) * u[j] * w[n - j];
        }
        w[n] = acc / n as f64;
    }
    Ok(w[1..].iter().map(|&v| -v).collect())
}
