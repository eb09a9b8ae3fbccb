//! Variable-depth sampling of most permissive transitions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attractors::AttractorSet;
use crate::engine::{binomial, MpNetwork, SpaceSet};
use crate::error::{usage, Error, Result};
use crate::model::Configuration;

/// Per-trajectory random generator.
pub type RandomStream = ChaCha8Rng;

/// Generator for trajectory `index` under `master_seed`: the master seed picks
/// the key, the index picks one of the 2^64 independent ChaCha streams.
pub fn random_stream(master_seed: u64, index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Depth distribution as written on the command line:
/// `const:K`, `exp` or `custom:p1,...,pn`.
#[derive(Clone, Debug, PartialEq)]
pub enum DepthSpec {
    Constant(usize),
    Exponential,
    Custom(Vec<f64>),
}

impl FromStr for DepthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exp" {
            return Ok(DepthSpec::Exponential);
        }
        if let Some(k) = s.strip_prefix("const:") {
            return k
                .trim()
                .parse()
                .map(DepthSpec::Constant)
                .map_err(|_| Error::Usage(format!("invalid constant depth `{k}`")));
        }
        if let Some(ps) = s.strip_prefix("custom:") {
            return parse_list(ps).map(DepthSpec::Custom);
        }
        usage(format!(
            "invalid depth spec `{s}` (expected const:K, exp or custom:p1,...,pn)"
        ))
    }
}

impl fmt::Display for DepthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthSpec::Constant(k) => write!(f, "const:{k}"),
            DepthSpec::Exponential => write!(f, "exp"),
            DepthSpec::Custom(ps) => write!(f, "custom:{}", join(ps)),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Usage(format!("invalid number `{p}`")))
        })
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Probability of each permissive depth `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthDistribution {
    spec: DepthSpec,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DepthDistribution {
    pub fn new(spec: &DepthSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return usage("depth distribution over an empty network");
        }
        let probabilities = match spec {
            DepthSpec::Constant(k) => {
                if *k == 0 || *k > n {
                    return usage(format!("constant depth {k} outside 1..={n}"));
                }
                (1..=n).map(|d| if d == *k { 1.0 } else { 0.0 }).collect()
            }
            DepthSpec::Exponential => {
                // P(d) = 2^-d / M with M = sum_{i=1..n} 2^-i
                let m: f64 = (1..=n).map(|i| 0.5f64.powi(i as i32)).sum();
                (1..=n).map(|d| 0.5f64.powi(d as i32) / m).collect()
            }
            DepthSpec::Custom(ps) => {
                if ps.len() != n {
                    return usage(format!(
                        "custom depth distribution has {} entries, expected {n}",
                        ps.len()
                    ));
                }
                if ps.iter().any(|p| p.is_nan() || *p < 0.0) {
                    return usage("depth probabilities must be nonnegative");
                }
                let sum: f64 = ps.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return usage(format!("depth probabilities sum to {sum}, not 1"));
                }
                ps.clone()
            }
        };
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(DepthDistribution {
            spec: spec.clone(),
            probabilities,
            cumulative,
        })
    }

    pub fn constant(depth: usize, n: usize) -> Result<Self> {
        Self::new(&DepthSpec::Constant(depth), n)
    }

    pub fn exponential(n: usize) -> Self {
        Self::new(&DepthSpec::Exponential, n).expect("n > 0")
    }

    pub fn spec(&self) -> &DepthSpec {
        &self.spec
    }

    pub fn max_depth(&self) -> usize {
        self.probabilities.len()
    }

    /// `P(depth = d)` for `d` in `1..=n`.
    pub fn probability(&self, d: usize) -> f64 {
        if d == 0 {
            0.0
        } else {
            self.probabilities.get(d - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Draw a depth. A distribution concentrated on one depth consumes no randomness.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let DepthSpec::Constant(k) = self.spec {
            return k;
        }
        let total = *self.cumulative.last().unwrap();
        let r = rng.random::<f64>() * total;
        self.cumulative
            .iter()
            .position(|&c| c > r)
            .map(|i| i + 1)
            .unwrap_or_else(|| self.probabilities.iter().rposition(|&p| p > 0.0).unwrap() + 1)
    }
}

/// Transition weights by number of flipped components:
/// `uniform`, `single` or `custom:w1,...,wn`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Uniform,
    Single,
    Custom(Vec<f64>),
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(WeightSpec::Uniform),
            "single" => Ok(WeightSpec::Single),
            other => match other.strip_prefix("custom:") {
                Some(ws) => parse_list(ws).map(WeightSpec::Custom),
                None => usage(format!(
                    "invalid weight spec `{other}` (expected uniform, single or custom:w1,...,wn)"
                )),
            },
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Uniform => write!(f, "uniform"),
            WeightSpec::Single => write!(f, "single"),
            WeightSpec::Custom(ws) => write!(f, "custom:{}", join(ws)),
        }
    }
}

/// `W[m-1]` is the weight of a transition flipping `m` components.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    spec: WeightSpec,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(spec: &WeightSpec, n: usize) -> Result<Self> {
        let weights = match spec {
            WeightSpec::Uniform => vec![1.0; n],
            WeightSpec::Single => (0..n).map(|m| if m == 0 { 1.0 } else { 0.0 }).collect(),
            WeightSpec::Custom(ws) => {
                if ws.len() != n {
                    return usage(format!("custom weight vector has {} entries, expected {n}", ws.len()));
                }
                ws.clone()
            }
        };
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return usage("weights must be finite and nonnegative");
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return usage("at least one weight must be positive");
        }
        Ok(WeightVector {
            spec: spec.clone(),
            weights,
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(&WeightSpec::Uniform, n).expect("n > 0")
    }

    pub fn single(n: usize) -> Self {
        Self::new(&WeightSpec::Single, n).expect("n > 0")
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    /// Weight of a transition flipping `m >= 1` components.
    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn all_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }
}

/// How the rate of the transition flipping exactly `L` is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LRowMode {
    /// `|L| * W[|L|]`, as in the published listing.
    #[default]
    Listing,
    /// `1 * W[|L|]`: one transition flips exactly `L`.
    Count,
}

impl FromStr for LRowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "listing" => Ok(LRowMode::Listing),
            "count" => Ok(LRowMode::Count),
            other => usage(format!("invalid l-row mode `{other}` (expected listing or count)")),
        }
    }
}

impl fmt::Display for LRowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LRowMode::Listing => "listing",
            LRowMode::Count => "count",
        })
    }
}

/// Apparent rate of flipping `m` components from each space.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    n: usize,
    rates: Vec<f64>,
}

impl RateMatrix {
    pub fn spaces(&self) -> usize {
        self.rates.len().checked_div(self.n).unwrap_or(0)
    }

    /// Rate for space `s` (insertion order) and flip count `m` in `1..=n`.
    pub fn get(&self, s: usize, m: usize) -> f64 {
        self.rates[s * self.n + m - 1]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.rates[s * self.n..(s + 1) * self.n]
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// First `(space, m)` whose cumulative rate exceeds `r`, scanning spaces in
    /// insertion order and `m` ascending.
    pub fn select(&self, r: f64) -> Option<(usize, usize)> {
        let mut acc = 0.0;
        let mut last = None;
        for (k, rate) in self.rates.iter().enumerate() {
            if *rate > 0.0 {
                acc += rate;
                last = Some(k);
                if acc > r {
                    return Some((k / self.n, k % self.n + 1));
                }
            }
        }
        // rounding can leave r at the very top of the range
        last.map(|k| (k / self.n, k % self.n + 1))
    }
}

pub fn transition_rates(spaces: &SpaceSet, weights: &WeightVector, mode: LRowMode) -> Result<RateMatrix> {
    let n = spaces.anchor().len();
    if weights.as_slice().len() != n {
        return usage(format!(
            "weight vector has {} entries, network has {n} components",
            weights.as_slice().len()
        ));
    }
    let mut rates = vec![0.0; spaces.len() * n];
    for (s, space) in spaces.spaces().enumerate() {
        let row = &mut rates[s * n..(s + 1) * n];
        let l = space.irreversible.len();
        let rev = space.reversible().len();
        if l > 0 {
            let factor = match mode {
                LRowMode::Listing => l as f64,
                LRowMode::Count => 1.0,
            };
            row[l - 1] = factor * weights.weight(l);
        }
        for j in 1..=rev {
            row[l + j - 1] = binomial(rev, j)? as f64 * weights.weight(l + j);
        }
    }
    Ok(RateMatrix { n, rates })
}

/// When a trajectory stops.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StopPolicy {
    /// The current configuration lies in a minimal trap space.
    Attractor,
    /// A single attractor remains reachable.
    #[default]
    StrongBasin,
    /// Always run the full step budget.
    MaxSteps,
}

impl FromStr for StopPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "attractor" => Ok(StopPolicy::Attractor),
            "strong-basin" => Ok(StopPolicy::StrongBasin),
            "max-steps" => Ok(StopPolicy::MaxSteps),
            other => usage(format!(
                "invalid stop policy `{other}` (expected attractor, strong-basin or max-steps)"
            )),
        }
    }
}

impl fmt::Display for StopPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopPolicy::Attractor => "attractor",
            StopPolicy::StrongBasin => "strong-basin",
            StopPolicy::MaxSteps => "max-steps",
        })
    }
}

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Attractor checks run at every step for small networks, every 10 steps otherwise.
pub fn default_check_interval(n: usize) -> usize {
    if n <= 16 {
        1
    } else {
        10
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationParams {
    pub depth: DepthDistribution,
    pub weights: WeightVector,
    pub l_row_mode: LRowMode,
    pub seed: u64,
    pub max_steps: usize,
    pub check_interval: usize,
    pub stop: StopPolicy,
}

impl SimulationParams {
    pub fn new(depth: DepthDistribution, weights: WeightVector) -> Self {
        let n = depth.max_depth();
        SimulationParams {
            depth,
            weights,
            l_row_mode: LRowMode::default(),
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            check_interval: default_check_interval(n),
            stop: StopPolicy::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.depth.max_depth() != n {
            return usage(format!(
                "depth distribution covers {} depths, network has {n} components",
                self.depth.max_depth()
            ));
        }
        if self.weights.as_slice().len() != n {
            return usage(format!(
                "weight vector has {} entries, network has {n} components",
                self.weights.as_slice().len()
            ));
        }
        if self.max_steps == 0 {
            return usage("max steps must be at least 1");
        }
        if self.check_interval == 0 {
            return usage("check interval must be at least 1");
        }
        Ok(())
    }

    /// Every most permissive transition has a positive probability.
    pub fn full_mp_support(&self) -> bool {
        self.depth.probability(self.depth.max_depth()) > 0.0 && self.weights.all_positive()
    }
}

/// One sampling step from `x`; returns `x` itself when no transition exists at the drawn depth.
pub fn sample_next_configuration<R: Rng + ?Sized>(
    network: &MpNetwork,
    x: &Configuration,
    params: &SimulationParams,
    rng: &mut R,
) -> Result<Configuration> {
    let depth = params.depth.draw(rng);
    let spaces = network.reachable_spaces(x, depth)?;
    let rates = transition_rates(&spaces, &params.weights, params.l_row_mode)?;
    let total = rates.total();
    if total <= 0.0 {
        return Ok(*x);
    }
    let r = rng.random::<f64>() * total;
    let (s, m) = rates
        .select(r)
        .ok_or_else(|| Error::Internal("positive total rate without a positive entry".into()))?;
    spaces.entries()[s].1.sample_target(m, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// Stopped in (or in the strong basin of) the given attractor.
    Attractor(usize),
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    /// Visited configurations, starting with the initial one.
    pub states: Vec<Configuration>,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

/// Run until the stopping policy fires or the step budget is spent.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    network: &MpNetwork,
    x0: &Configuration,
    params: &SimulationParams,
    attractors: &AttractorSet,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut states = vec![*x0];
    let stop = drive(network, x0, params, attractors, rng, |x| states.push(*x))?.0;
    Ok(Trajectory { states, stop })
}

/// Shared sampling loop; returns the stop reason and the final configuration.
pub(crate) fn drive<R: Rng + ?Sized>(
    network: &MpNetwork,
    x0: &Configuration,
    params: &SimulationParams,
    attractors: &AttractorSet,
    rng: &mut R,
    mut visit: impl FnMut(&Configuration),
) -> Result<(StopReason, Configuration)> {
    params.validate(network.len())?;
    network.network().check_len(x0)?;
    let mut x = *x0;
    let mut candidates = match params.stop {
        StopPolicy::StrongBasin => attractors.reachable_from(network, &x)?,
        _ => Vec::new(),
    };
    for step in 0..=params.max_steps {
        if step % params.check_interval == 0 {
            match params.stop {
                StopPolicy::Attractor => {
                    if let Some(a) = attractors.find(&x) {
                        return Ok((StopReason::Attractor(a), x));
                    }
                }
                StopPolicy::StrongBasin => {
                    if step > 0 {
                        candidates = attractors.filter(&candidates, network, &x)?;
                    }
                    match candidates.len() {
                        0 => {
                            return Err(Error::Internal(format!(
                                "no attractor reachable from {x}; the attractor set is incomplete"
                            )))
                        }
                        1 => return Ok((StopReason::Attractor(candidates[0]), x)),
                        _ => {}
                    }
                }
                StopPolicy::MaxSteps => {}
            }
        }
        if step == params.max_steps {
            break;
        }
        x = sample_next_configuration(network, &x, params, rng)?;
        visit(&x);
    }
    if params.stop == StopPolicy::MaxSteps {
        if let Some(a) = attractors.find(&x) {
            return Ok((StopReason::Attractor(a), x));
        }
    }
    Ok((StopReason::MaxSteps, x))
}
