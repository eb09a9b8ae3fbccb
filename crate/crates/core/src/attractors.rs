//! Minimal trap spaces and attractor propensity estimation.

use std::collections::HashSet;

use crate::engine::MpNetwork;
use crate::error::{Error, Result};
use crate::model::{ComponentSet, Configuration};
use crate::sampler::{drive, random_stream, SimulationParams, StopPolicy, StopReason};
use crate::subcube::Subhypercube;

/// Search nodes explored before the trap-space search gives up.
pub const DEFAULT_TRAP_BUDGET: usize = 2_000_000;

/// Whether no vertex of `h` has a successor outside `h`.
pub fn is_trap_space(network: &MpNetwork, h: &Subhypercube) -> bool {
    h.len() == network.len()
        && h.fixed().iter().all(|i| {
            let (zero, one) = network.value_range(h.values(), i, h.free());
            if h.values() >> i & 1 == 1 {
                !zero
            } else {
                !one
            }
        })
}

/// The minimal trap spaces of `network`, which are its most permissive attractors.
pub fn minimal_trap_spaces(network: &MpNetwork) -> Result<AttractorSet> {
    minimal_trap_spaces_with_budget(network, DEFAULT_TRAP_BUDGET)
}

pub fn minimal_trap_spaces_with_budget(network: &MpNetwork, budget: usize) -> Result<AttractorSet> {
    let mut candidates = TrapSearch::new(network, budget).run()?;
    candidates.sort_by_key(|h| h.rank());
    let mut minimal: Vec<Subhypercube> = Vec::new();
    for c in candidates {
        if !minimal.iter().any(|m| m.is_smaller_than(&c)) {
            minimal.push(c);
        }
    }
    Ok(AttractorSet::new(minimal))
}

struct TrapSearch<'a> {
    network: &'a MpNetwork,
    budget: usize,
    visited: HashSet<(u64, u64)>,
}

impl<'a> TrapSearch<'a> {
    fn new(network: &'a MpNetwork, budget: usize) -> Self {
        TrapSearch {
            network,
            budget,
            visited: HashSet::new(),
        }
    }

    /// Fix every free component whose function is constant on the region;
    /// `None` if a fixed component is forced to the opposite value.
    fn percolate(&self, mut h: Subhypercube) -> Option<Subhypercube> {
        loop {
            let mut changed = false;
            for i in 0..h.len() {
                let (zero, one) = self.network.value_range(h.values(), i, h.free());
                match h.get(i) {
                    Some(true) if !one => return None,
                    Some(false) if !zero => return None,
                    None if zero != one => {
                        h = h.with_fixed(i, one);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Some(h);
            }
        }
    }

    /// A fixed component that can leave its value, preferring few free inputs.
    fn violated(&self, h: &Subhypercube) -> Option<usize> {
        h.fixed()
            .iter()
            .filter(|&i| {
                let (zero, one) = self.network.value_range(h.values(), i, h.free());
                zero && one
            })
            .min_by_key(|&i| self.network.network().support(i).intersection(h.free()).len())
    }

    /// Every trap space found while refining the full cube. Each minimal trap
    /// space is among them: percolation and branching only ever discard
    /// regions that cannot contain it.
    fn run(&mut self) -> Result<Vec<Subhypercube>> {
        let mut found = Vec::new();
        let mut stack = vec![Subhypercube::full(self.network.len())];
        while let Some(h) = stack.pop() {
            let Some(h) = self.percolate(h) else { continue };
            if !self.visited.insert((h.values(), h.free().bits())) {
                continue;
            }
            if self.visited.len() > self.budget {
                return Err(Error::BudgetExceeded { budget: self.budget });
            }
            let branch: ComponentSet = match self.violated(&h) {
                None => {
                    found.push(h);
                    h.free()
                }
                Some(k) => self.network.network().support(k).intersection(h.free()),
            };
            for j in branch.iter() {
                stack.push(h.with_fixed(j, false));
                stack.push(h.with_fixed(j, true));
            }
        }
        Ok(found)
    }
}

/// Attractors indexed by position, sorted by their `{0,1,*}` rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractorSet {
    spaces: Vec<Subhypercube>,
}

impl AttractorSet {
    pub fn new(mut spaces: Vec<Subhypercube>) -> Self {
        spaces.sort_by_cached_key(|h| h.to_string());
        spaces.dedup();
        AttractorSet { spaces }
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn get(&self, index: usize) -> &Subhypercube {
        &self.spaces[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subhypercube> {
        self.spaces.iter()
    }

    pub fn ids(&self) -> Vec<String> {
        self.spaces.iter().map(|h| h.to_string()).collect()
    }

    /// Index of the attractor containing `x`.
    pub fn find(&self, x: &Configuration) -> Option<usize> {
        self.spaces.iter().position(|h| h.contains(x))
    }

    /// Indices of the attractors reachable from `x`.
    pub fn reachable_from(&self, network: &MpNetwork, x: &Configuration) -> Result<Vec<usize>> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.filter(&all, network, x)
    }

    /// The subset of `candidates` still reachable from `x`: those inside the
    /// smallest trap space containing `x`.
    pub fn filter(&self, candidates: &[usize], network: &MpNetwork, x: &Configuration) -> Result<Vec<usize>> {
        let closure = network.closure(x)?;
        Ok(candidates
            .iter()
            .copied()
            .filter(|&a| self.spaces[a].is_smaller_than(&closure))
            .collect())
    }

    pub fn restrict(&self, indices: &[usize]) -> AttractorSet {
        AttractorSet::new(indices.iter().map(|&a| self.spaces[a]).collect())
    }
}

/// Attractors of `attractors` reachable from `x`.
pub fn filter_reachable_attractors(
    attractors: &AttractorSet,
    network: &MpNetwork,
    x: &Configuration,
) -> Result<AttractorSet> {
    Ok(attractors.restrict(&attractors.reachable_from(network, x)?))
}

pub fn in_attractor(x: &Configuration, attractors: &AttractorSet) -> bool {
    attractors.find(x).is_some()
}

/// Result of one sampled trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Attractor(usize),
    NotConverged,
}

impl From<StopReason> for Outcome {
    fn from(r: StopReason) -> Self {
        match r {
            StopReason::Attractor(a) => Outcome::Attractor(a),
            StopReason::MaxSteps => Outcome::NotConverged,
        }
    }
}

/// Sample until the trajectory enters an attractor.
pub fn sample_reachable_attractor(
    network: &MpNetwork,
    x0: &Configuration,
    params: &SimulationParams,
    attractors: &AttractorSet,
    run: u64,
) -> Result<Outcome> {
    let mut p = params.clone();
    p.stop = StopPolicy::Attractor;
    run_once(network, x0, &p, attractors, run)
}

/// Sample until a single attractor remains reachable.
pub fn sample_reachable_attractor_bis(
    network: &MpNetwork,
    x0: &Configuration,
    params: &SimulationParams,
    attractors: &AttractorSet,
    run: u64,
) -> Result<Outcome> {
    let mut p = params.clone();
    p.stop = StopPolicy::StrongBasin;
    run_once(network, x0, &p, attractors, run)
}

fn run_once(
    network: &MpNetwork,
    x0: &Configuration,
    params: &SimulationParams,
    attractors: &AttractorSet,
    run: u64,
) -> Result<Outcome> {
    let mut rng = random_stream(params.seed, run);
    Ok(drive(network, x0, params, attractors, &mut rng, |_| {})?.0.into())
}

/// Frequencies of the attractors reached by independent trajectories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Propensities {
    pub attractors: AttractorSet,
    pub counts: Vec<u64>,
    pub runs: u64,
    pub not_converged: u64,
}

impl Propensities {
    pub fn converged(&self) -> u64 {
        self.runs - self.not_converged
    }

    /// Fraction of the converged runs ending in attractor `a`.
    pub fn fraction(&self, a: usize) -> f64 {
        match self.converged() {
            0 => 0.0,
            c => self.counts[a] as f64 / c as f64,
        }
    }

    /// `(id, count, fraction)`, most frequent first, ties by id; unreached attractors omitted.
    pub fn ranked(&self) -> Vec<(String, u64, f64)> {
        let mut rows: Vec<_> = (0..self.attractors.len())
            .filter(|&a| self.counts[a] > 0)
            .map(|a| (self.attractors.get(a).to_string(), self.counts[a], self.fraction(a)))
            .collect();
        rows.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        rows
    }
}

/// Run `runs` trajectories from `x0` and count where they end.
///
/// Trajectory `r` uses random stream `r` of `params.seed`, so the result does
/// not depend on `workers`. `None` uses every available core.
pub fn estimate_propensities(
    network: &MpNetwork,
    x0: &Configuration,
    params: &SimulationParams,
    attractors: &AttractorSet,
    runs: u64,
    workers: Option<usize>,
) -> Result<Propensities> {
    params.validate(network.len())?;
    if attractors.is_empty() {
        return Err(Error::Internal("empty attractor set".into()));
    }
    let outcomes = collect_outcomes(runs, workers, |r| run_once(network, x0, params, attractors, r))?;
    let mut counts = vec![0u64; attractors.len()];
    let mut not_converged = 0;
    for o in outcomes {
        match o {
            Outcome::Attractor(a) => counts[a] += 1,
            Outcome::NotConverged => not_converged += 1,
        }
    }
    Ok(Propensities {
        attractors: attractors.clone(),
        counts,
        runs,
        not_converged,
    })
}

#[cfg(feature = "parallel")]
fn collect_outcomes(
    runs: u64,
    workers: Option<usize>,
    f: impl Fn(u64) -> Result<Outcome> + Sync + Send,
) -> Result<Vec<Outcome>> {
    use rayon::prelude::*;
    if workers == Some(1) {
        return (0..runs).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| (0..runs).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn collect_outcomes(runs: u64, _workers: Option<usize>, f: impl Fn(u64) -> Result<Outcome>) -> Result<Vec<Outcome>> {
    (0..runs).map(f).collect()
}

/// Warnings for settings under which minimal trap spaces may not match the
/// attractors of the sampled dynamics. Nothing is reported when every
/// transition has positive probability or every attractor is a single configuration.
pub fn assumption_warnings(params: &SimulationParams, attractors: &AttractorSet) -> Vec<String> {
    if params.full_mp_support() || attractors.iter().all(|a| a.rank() == 0) {
        return Vec::new();
    }
    let n = params.depth.max_depth();
    let mut out = Vec::new();
    if params.depth.probability(n) == 0.0 {
        out.push(format!("depth {n} has probability 0"));
    }
    if !params.weights.all_positive() {
        out.push("some transition weights are 0".to_string());
    }
    let cyclic: Vec<String> = attractors
        .iter()
        .filter(|a| a.rank() > 0)
        .map(|a| a.to_string())
        .collect();
    out.push(format!(
        "trajectories may settle in cyclic attractors strictly inside {} and never converge",
        cyclic.join(", ")
    ));
    out
}
