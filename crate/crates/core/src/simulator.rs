//! Forward simulation of the continuous-time Markov branching process with
//! full genealogy recording, reduction to the surviving skeleton Z(u,t) and
//! extraction of the MRCA time tau(t).

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Observation horizon t.
    pub horizon: f64,
    /// Hard cap on processed particles per replicate.
    pub max_events: u64,
    /// Hard cap on arena size; enormous broods trip it and censor the run.
    pub max_population: u64,
}

impl SimConfig {
    pub fn new(horizon: f64) -> Self {
        assert!(horizon > 0.0, "horizon must be positive");
        Self {
            horizon,
            max_events: 100_000_000,
            max_population: 10_000_000,
        }
    }

    pub fn with_caps(horizon: f64, max_events: u64, max_population: u64) -> Self {
        assert!(horizon > 0.0 && max_events > 0 && max_population > 0);
        assert!(max_population <= u32::MAX as u64 - 1);
        Self {
            horizon,
            max_events,
            max_population,
        }
    }
}

/// One particle: birth at the parent's death, death either by splitting
/// (death < t) or by hitting the horizon (alive, death clamped to t).
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub parent: u32,
    pub birth: f64,
    pub death: f64,
    pub alive: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Genealogy {
    pub nodes: Vec<Node>,
}

impl Genealogy {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub survived: bool,
    /// Population at the horizon (0 unless survived).
    pub z_t: u64,
    pub genealogy: Genealogy,
    /// A cap was hit; the outcome must be excluded from statistics and
    /// counted in the censoring report.
    pub censored: bool,
    /// Particles processed (lifetime draws), the simulator's work measure.
    pub events: u64,
}

/// Event-driven simulation: depth-first over lineages with an explicit
/// stack. Each particle lives Exp(1) and splits into `law`-distributed
/// daughters; particles alive at the horizon are marked.
pub fn simulate<R: Rng + ?Sized>(law: &OffspringLaw, config: &SimConfig, rng: &mut R) -> SimOutcome {
    let t = config.horizon;
    let mut nodes: Vec<Node> = Vec::with_capacity(16);
    let mut stack: Vec<u32> = Vec::with_capacity(16);
    nodes.push(Node {
        parent: NO_PARENT,
        birth: 0.0,
        death: f64::NAN,
        alive: false,
    });
    stack.push(0);

    let mut events = 0u64;
    let mut z_t = 0u64;
    let mut censored = false;

    while let Some(idx) = stack.pop() {
        events += 1;
        if events > config.max_events {
            censored = true;
            break;
        }
        let birth = nodes[idx as usize].birth;
        let lifetime: f64 = rng.sample(Exp1);
        let death = birth + lifetime;
        if death >= t {
            let node = &mut nodes[idx as usize];
            node.death = t;
            node.alive = true;
            z_t += 1;
            continue;
        }
        nodes[idx as usize].death = death;
        let brood = law.sample(rng);
        if nodes.len() as u64 + brood > config.max_population {
            censored = true;
            break;
        }
        for _ in 0..brood {
            let child = nodes.len() as u32;
            nodes.push(Node {
                parent: idx,
                birth: death,
                death: f64::NAN,
                alive: false,
            });
            stack.push(child);
        }
    }

    SimOutcome {
        survived: !censored && z_t > 0,
        z_t,
        genealogy: Genealogy { nodes },
        censored,
        events,
    }
}

/// The reduced process: jump times and values of u -> Z(u,t), plus the MRCA
/// time tau(t) = t - sup{u : Z(u,t) = 1}.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory {
    /// (u_i, Z(u_i, t)) with u_0 = 0; values nondecreasing, first value 1.
    pub jumps: Vec<(f64, u64)>,
    pub mrca_time: f64,
    pub z_t: u64,
    pub horizon: f64,
}

impl ReducedTrajectory {
    /// Z(u, t) for 0 <= u <= t.
    pub fn value_at(&self, u: f64) -> u64 {
        let i = self.jumps.partition_point(|&(ju, _)| ju <= u);
        self.jumps[i.saturating_sub(1)].1
    }
}

/// Single reverse pass marks every node with a descendant alive at the
/// horizon; Z(u,t) then steps at marked nodes' death times.
pub fn reduce(genealogy: &Genealogy, t: f64) -> Result<ReducedTrajectory> {
    let nodes = &genealogy.nodes;
    if nodes.is_empty() {
        return Err(Error::Domain("empty genealogy".into()));
    }
    let mut marked = vec![false; nodes.len()];
    let mut z_t = 0u64;
    // Children are created after their parents, so one reverse sweep
    // propagates marks all the way to the root.
    for i in (0..nodes.len()).rev() {
        if nodes[i].alive {
            marked[i] = true;
            z_t += 1;
        }
        if marked[i] && nodes[i].parent != NO_PARENT {
            marked[nodes[i].parent as usize] = true;
        }
    }
    if !marked[0] || z_t == 0 {
        return Err(Error::Domain(
            "reduced process undefined: no survivors at the horizon".into(),
        ));
    }

    // Count marked children per marked internal node.
    let mut marked_children = vec![0u32; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        if marked[i] && node.parent != NO_PARENT {
            marked_children[node.parent as usize] += 1;
        }
    }
    let mut events: Vec<(f64, u64)> = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if marked[i] && !node.alive && marked_children[i] >= 2 {
            events.push((node.death, (marked_children[i] - 1) as u64));
        }
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("death times are finite"));

    let mut jumps = Vec::with_capacity(events.len() + 1);
    jumps.push((0.0, 1u64));
    let mut value = 1u64;
    for (u, delta) in events {
        value += delta;
        jumps.push((u, value));
    }
    debug_assert_eq!(value, z_t, "reduced trajectory must end at Z(t)");

    // sup{u : Z(u,t) = 1} is the first jump time, or t when the trajectory
    // never leaves 1 (then the lone survivor is its own most recent common
    // ancestor and tau = 0).
    let mrca_time = if jumps.len() > 1 { t - jumps[1].0 } else { 0.0 };

    Ok(ReducedTrajectory {
        jumps,
        mrca_time,
        z_t,
        horizon: t,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MrcaSample {
    pub tau: f64,
    pub z_t: u64,
    /// Non-surviving attempts discarded before this sample.
    pub rejections: u64,
    /// Censored attempts discarded before this sample.
    pub censored: u64,
    pub events: u64,
}

/// Rejection sampling of tau(t) conditional on survival: repeat `simulate`
/// until a replicate survives, then reduce it.
pub fn mrca_sample<R: Rng + ?Sized>(
    law: &OffspringLaw,
    config: &SimConfig,
    rng: &mut R,
    max_attempts: u64,
) -> Result<MrcaSample> {
    let mut rejections = 0u64;
    let mut censored = 0u64;
    let mut events = 0u64;
    for _ in 0..max_attempts {
        let outcome = simulate(law, config, rng);
        events += outcome.events;
        if outcome.censored {
            censored += 1;
            continue;
        }
        if !outcome.survived {
            rejections += 1;
            continue;
        }
        let reduced = reduce(&outcome.genealogy, config.horizon)?;
        return Ok(MrcaSample {
            tau: reduced.mrca_time,
            z_t: reduced.z_t,
            rejections,
            censored,
            events,
        });
    }
    Err(Error::RejectionBudget {
        attempts: max_attempts,
        survivors: 0,
        wanted: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{par_replicates, replicate_rng};

    #[test]
    fn extinct_law_survival_probability() {
        // Point mass at 0: survival to t means the root's Exp(1) lifetime
        // exceeds t, so P = e^{-t}.
        let law = OffspringLaw::point_mass(0);
        let config = SimConfig::new(1.0);
        const N: u64 = 100_000;
        let survived: u64 = par_replicates(N, 11, |_, rng| simulate(&law, &config, rng))
            .iter()
            .filter(|o| o.survived)
            .count() as u64;
        let p = survived as f64 / N as f64;
        let want = (-1.0f64).exp();
        let sigma = (want * (1.0 - want) / N as f64).sqrt();
        assert!((p - want).abs() < 3.0 * sigma, "p={p} want={want}");
    }

    #[test]
    fn immortal_lineage_is_constant_one() {
        let law = OffspringLaw::point_mass(1);
        let config = SimConfig::new(5.0);
        let mut rng = replicate_rng(3, 0);
        let outcome = simulate(&law, &config, &mut rng);
        assert!(outcome.survived);
        assert_eq!(outcome.z_t, 1);
        let reduced = reduce(&outcome.genealogy, 5.0).unwrap();
        assert_eq!(reduced.jumps, vec![(0.0, 1)]);
        assert_eq!(reduced.value_at(3.0), 1);
        // A lone surviving line is its own most recent common ancestor.
        assert_eq!(reduced.mrca_time, 0.0);
    }

    #[test]
    fn binary_law_survival_matches_oracle() {
        // Q(8) = 2/(8+2) = 0.2 for pmf(0)=pmf(2)=1/2.
        let law = OffspringLaw::binary();
        let config = SimConfig::new(8.0);
        const N: u64 = 200_000;
        let survived: u64 = par_replicates(N, 17, |_, rng| simulate(&law, &config, rng))
            .iter()
            .filter(|o| o.survived)
            .count() as u64;
        let p = survived as f64 / N as f64;
        let sigma = (0.2 * 0.8 / N as f64).sqrt();
        assert!((p - 0.2).abs() < 3.0 * sigma, "p={p}");
    }

    #[test]
    fn genealogy_consistency() {
        let law = OffspringLaw::binary();
        let config = SimConfig::new(6.0);
        let mut found_survivor = false;
        for rep in 0..200 {
            let mut rng = replicate_rng(23, rep);
            let outcome = simulate(&law, &config, &mut rng);
            // child's birth equals the parent's death; birth <= death
            for node in &outcome.genealogy.nodes {
                assert!(node.birth <= node.death);
                if node.parent != NO_PARENT {
                    let parent = &outcome.genealogy.nodes[node.parent as usize];
                    assert_eq!(node.birth, parent.death);
                }
            }
            assert_eq!(
                outcome.z_t,
                outcome.genealogy.nodes.iter().filter(|n| n.alive).count() as u64
            );
            assert_eq!(outcome.survived, outcome.z_t > 0);
            if outcome.survived {
                found_survivor = true;
                let reduced = reduce(&outcome.genealogy, 6.0).unwrap();
                // nondecreasing values starting at 1, ending at z_t
                assert_eq!(reduced.jumps[0], (0.0, 1));
                let mut prev = 0;
                for &(_, v) in &reduced.jumps {
                    assert!(v > prev || prev == 0);
                    prev = v;
                }
                assert_eq!(reduced.z_t, outcome.z_t);
                assert_eq!(reduced.value_at(6.0), outcome.z_t);
                assert!(reduced.mrca_time >= 0.0 && reduced.mrca_time <= 6.0);
            } else {
                assert!(reduce(&outcome.genealogy, 6.0).is_err());
            }
        }
        assert!(found_survivor);
    }

    #[test]
    fn two_node_reduction_by_hand() {
        // Root splits at time d = 1.0 into two children that both survive
        // to t = 3: Z is 1 on [0,1), 2 on [1,3]; tau = t - d = 2.
        let genealogy = Genealogy {
            nodes: vec![
                Node { parent: NO_PARENT, birth: 0.0, death: 1.0, alive: false },
                Node { parent: 0, birth: 1.0, death: 3.0, alive: true },
                Node { parent: 0, birth: 1.0, death: 3.0, alive: true },
            ],
        };
        let reduced = reduce(&genealogy, 3.0).unwrap();
        assert_eq!(reduced.jumps, vec![(0.0, 1), (1.0, 2)]);
        assert_eq!(reduced.value_at(0.5), 1);
        assert_eq!(reduced.value_at(1.0), 2);
        assert_eq!(reduced.mrca_time, 2.0);
    }

    #[test]
    fn side_branch_that_dies_is_not_counted() {
        // Root splits at 1.0; child A dies childless at 2.0, child B
        // survives: the reduced trajectory never leaves 1 and tau = 0.
        let genealogy = Genealogy {
            nodes: vec![
                Node { parent: NO_PARENT, birth: 0.0, death: 1.0, alive: false },
                Node { parent: 0, birth: 1.0, death: 2.0, alive: false },
                Node { parent: 0, birth: 1.0, death: 3.0, alive: true },
            ],
        };
        let reduced = reduce(&genealogy, 3.0).unwrap();
        assert_eq!(reduced.jumps, vec![(0.0, 1)]);
        assert_eq!(reduced.mrca_time, 0.0);
    }

    #[test]
    fn determinism_across_replicate_streams() {
        let law = OffspringLaw::heavy_tail(1.0, 1e-10).unwrap();
        let config = SimConfig::new(10.0);
        let run = |rep: u64| {
            let mut rng = replicate_rng(99, rep);
            let o = simulate(&law, &config, &mut rng);
            (o.survived, o.z_t, o.events, o.genealogy.len())
        };
        for rep in 0..20 {
            assert_eq!(run(rep), run(rep));
        }
    }

    #[test]
    fn censoring_flags_huge_broods() {
        let law = OffspringLaw::zero_limit(); // infinite-mean offspring
        let config = SimConfig::with_caps(4.0, 10_000, 2_000);
        let mut censored = 0;
        for rep in 0..300 {
            let mut rng = replicate_rng(5, rep);
            let o = simulate(&law, &config, &mut rng);
            if o.censored {
                censored += 1;
                assert!(!o.survived);
            }
        }
        assert!(censored > 0, "expected some censored replicates");
    }

    #[test]
    fn mean_events_near_horizon_plus_one() {
        // E[particles processed] = t + 1 for a critical law.
        let law = OffspringLaw::binary();
        let t = 20.0;
        let config = SimConfig::new(t);
        const N: u64 = 20_000;
        let total: u64 = par_replicates(N, 31, |_, rng| simulate(&law, &config, rng))
            .iter()
            .map(|o| o.events)
            .sum();
        let mean = total as f64 / N as f64;
        assert!(
            mean < 2.0 * (t + 1.0) && mean > 0.5 * (t + 1.0),
            "mean events {mean} vs t+1 = {}",
            t + 1.0
        );
    }

    #[test]
    fn critical_mean_population_is_one() {
        // E[Z(t)] = 1 unconditionally; binary law has finite variance so a
        // 3-sigma band is meaningful.
        let law = OffspringLaw::binary();
        let config = SimConfig::new(10.0);
        const N: u64 = 200_000;
        let zs: Vec<u64> = par_replicates(N, 41, |_, rng| simulate(&law, &config, rng))
            .iter()
            .map(|o| o.z_t)
            .collect();
        let mean = zs.iter().sum::<u64>() as f64 / N as f64;
        let var = zs
            .iter()
            .map(|&z| (z as f64 - mean).powi(2))
            .sum::<f64>()
            / (N - 1) as f64;
        let sigma = (var / N as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sigma, "mean {mean}, sigma {sigma}");
    }

    #[test]
    fn mrca_sample_point_mass_one() {
        let law = OffspringLaw::point_mass(1);
        let config = SimConfig::new(7.0);
        let mut rng = replicate_rng(2, 0);
        let s = mrca_sample(&law, &config, &mut rng, 10).unwrap();
        assert_eq!(s.tau, 0.0);
        assert_eq!(s.z_t, 1);
        assert_eq!(s.rejections, 0);
    }

    #[test]
    fn mrca_sample_budget_error() {
        let law = OffspringLaw::point_mass(0);
        let config = SimConfig::new(50.0); // survival ~ e^{-50}
        let mut rng = replicate_rng(2, 1);
        match mrca_sample(&law, &config, &mut rng, 100) {
            Err(Error::RejectionBudget { attempts, .. }) => assert_eq!(attempts, 100),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn reduced_marginal_matches_analytic_oracle_binary() {
        // P(Z(u,t)=1 | survival) = (t-u+2)/(t+2) for the binary law.
        let law = OffspringLaw::binary();
        let t = 8.0;
        let config = SimConfig::new(t);
        let u = 3.0;
        const SURVIVORS: u64 = 4_000;
        let samples = par_replicates(SURVIVORS, 57, |_, rng| {
            mrca_sample(&law, &config, rng, 1_000_000).expect("budget")
        });
        let ones = samples
            .iter()
            .filter(|s| s.tau <= t - u)
            .count() as f64;
        let p = ones / SURVIVORS as f64;
        let want = (t - u + 2.0) / (t + 2.0);
        let sigma = (want * (1.0 - want) / SURVIVORS as f64).sqrt();
        assert!((p - want).abs() < 3.5 * sigma, "p={p} want={want}");
    }
}
