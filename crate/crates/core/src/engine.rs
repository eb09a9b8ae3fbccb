//! Most permissive transitions from a configuration, computed as a set of
//! spaces `(x, H, L)`.
//!
//! A space generates every configuration `y` with `L ⊆ Δ(x, y) ⊆ H`: the
//! irreversible components `L` always flip, any subset of `H \ L` may flip
//! along. Transitions are never materialized in the sampling path, only
//! counted by the number of flipped components.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;

use crate::error::{usage, Error, Result};
use crate::model::{BooleanNetwork, ComponentSet, Configuration, InfluenceGraph, DEFAULT_FANIN_CAP};
use crate::subcube::Subhypercube;

/// Default cap on the number of spaces computed from one configuration.
pub const DEFAULT_MAX_SPACES: usize = 1 << 20;

/// Largest `|H \ L|` for which a space's targets are materialized.
pub const MATERIALIZE_CAP: usize = 20;

/// Local functions reading at most this many components are tabulated.
const TABLE_FANIN: usize = 12;

/// Truth table of one local function over its support.
#[derive(Clone, Debug)]
struct LocalTable {
    support: Vec<usize>,
    bits: Vec<u64>,
}

impl LocalTable {
    fn new(network: &BooleanNetwork, i: usize) -> Option<Self> {
        let support: Vec<usize> = network.support(i).iter().collect();
        if support.len() > TABLE_FANIN {
            return None;
        }
        let rows = 1usize << support.len();
        let mut bits = vec![0u64; rows.div_ceil(64)];
        for row in 0..rows {
            let x = support
                .iter()
                .enumerate()
                .fold(0u64, |acc, (k, &j)| acc | ((row as u64 >> k) & 1) << j);
            if network.eval(i, x) {
                bits[row / 64] |= 1 << (row % 64);
            }
        }
        Some(LocalTable { support, bits })
    }

    #[inline]
    fn eval(&self, x: u64) -> bool {
        let row = self
            .support
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &j)| acc | ((x >> j) as usize & 1) << k);
        self.bits[row / 64] >> (row % 64) & 1 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest support of a local function (influence graph enumeration and
    /// exhaustive flip checks).
    pub fanin_cap: usize,
    /// Largest number of spaces computed from a single configuration.
    pub max_spaces: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            fanin_cap: DEFAULT_FANIN_CAP,
            max_spaces: DEFAULT_MAX_SPACES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Min,
    Max,
}

/// A network prepared for most permissive computations.
///
/// Holds the influence graph so that, for every component whose local
/// function is unate, the extreme values of the function over a
/// sub-hypercube are read from a single evaluation. Other components fall
/// back to enumerating the free part of their support.
#[derive(Clone, Debug)]
pub struct MpNetwork {
    network: BooleanNetwork,
    influence: InfluenceGraph,
    unate: ComponentSet,
    tables: Vec<Option<LocalTable>>,
    limits: Limits,
}

impl MpNetwork {
    pub fn new(network: BooleanNetwork) -> Result<Self> {
        Self::with_limits(network, Limits::default())
    }

    pub fn with_limits(network: BooleanNetwork, limits: Limits) -> Result<Self> {
        let influence = network.influence_graph_with_cap(limits.fanin_cap)?;
        let unate = (0..network.len()).filter(|&i| influence.is_unate(i)).collect();
        let tables = (0..network.len()).map(|i| LocalTable::new(&network, i)).collect();
        Ok(MpNetwork {
            network,
            influence,
            unate,
            tables,
            limits,
        })
    }

    pub fn network(&self) -> &BooleanNetwork {
        &self.network
    }

    pub fn influence_graph(&self) -> &InfluenceGraph {
        &self.influence
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn len(&self) -> usize {
        self.network.len()
    }

    pub fn is_empty(&self) -> bool {
        self.network.is_empty()
    }

    pub fn is_locally_monotone(&self) -> bool {
        self.unate == ComponentSet::full(self.len())
    }

    #[inline]
    fn eval(&self, i: usize, x: u64) -> bool {
        match &self.tables[i] {
            Some(t) => t.eval(x),
            None => self.network.eval(i, x),
        }
    }

    #[inline]
    fn extreme_bits(&self, x: u64, i: usize, free: ComponentSet, polarity: Polarity) -> u64 {
        let pos = self.influence.positive_regulators(i).bits() & free.bits();
        let neg = self.influence.negative_regulators(i).bits() & free.bits();
        let base = x & !(pos | neg);
        match polarity {
            Polarity::Min => base | neg,
            Polarity::Max => base | pos,
        }
    }

    /// Vertex of the sub-hypercube `x` with `free` released minimizing
    /// (or maximizing) the local function of `i`.
    pub fn extreme_configuration(
        &self,
        x: &Configuration,
        i: usize,
        free: ComponentSet,
        polarity: Polarity,
    ) -> Result<Configuration> {
        self.network.check_len(x)?;
        self.check_component(i)?;
        if !self.unate.contains(i) {
            return Err(Error::NotUnate(self.network.name(i).to_string()));
        }
        Ok(Configuration::from_bits(
            self.extreme_bits(x.bits(), i, free, polarity),
            self.len(),
        ))
    }

    /// Which values `f_i` takes over the vertices of `x` with `free` released,
    /// as `(takes 0, takes 1)`.
    #[inline]
    pub(crate) fn value_range(&self, x: u64, i: usize, free: ComponentSet) -> (bool, bool) {
        if self.unate.contains(i) {
            let lo = self.eval(i, self.extreme_bits(x, i, free, Polarity::Min));
            let hi = self.eval(i, self.extreme_bits(x, i, free, Polarity::Max));
            return (!lo, hi);
        }
        // exhaustive check over the free variables the function reads;
        // their number is bounded by the fan-in cap
        let vars = self.network.support(i).bits() & free.bits();
        let base = x & !vars;
        let (mut zero, mut one) = (false, false);
        let mut sub = 0u64;
        loop {
            if self.eval(i, base | sub) {
                one = true;
            } else {
                zero = true;
            }
            if zero && one {
                break;
            }
            sub = sub.wrapping_sub(vars) & vars;
            if sub == 0 {
                break;
            }
        }
        (zero, one)
    }

    #[inline]
    fn can_flip_bits(&self, x: u64, i: usize, free: ComponentSet, v: bool) -> bool {
        let (zero, one) = self.value_range(x, i, free);
        if v {
            zero
        } else {
            one
        }
    }

    /// Whether some vertex `z` of `x` with `free` released has `f_i(z) != v`.
    pub fn can_flip(&self, x: &Configuration, i: usize, free: ComponentSet, v: bool) -> Result<bool> {
        self.network.check_len(x)?;
        self.check_component(i)?;
        Ok(self.can_flip_bits(x.bits(), i, free, v))
    }

    fn spread_bits(&self, x: u64, mut candidates: ComponentSet, depth: usize) -> ComponentSet {
        let mut free = ComponentSet::EMPTY;
        for _ in 0..depth {
            let mut grown = free;
            for i in candidates.iter() {
                if self.can_flip_bits(x, i, free, x >> i & 1 == 1) {
                    grown.insert(i);
                }
            }
            if grown == free {
                break;
            }
            free = grown;
            candidates = candidates.difference(free);
        }
        free
    }

    /// Components of `candidates` that can flip within `depth` closure iterations.
    /// At `depth = n` this is the free set of the smallest `candidates`-closed
    /// sub-hypercube containing `x`.
    pub fn spread(&self, x: &Configuration, candidates: ComponentSet, depth: usize) -> Result<ComponentSet> {
        self.network.check_len(x)?;
        self.check_depth(depth)?;
        Ok(self.spread_bits(x.bits(), candidates, depth))
    }

    fn irreversible_bits(&self, x: u64, free: ComponentSet) -> ComponentSet {
        free.iter()
            .filter(|&i| !self.can_flip_bits(x, i, free, x >> i & 1 == 0))
            .collect()
    }

    /// Components of `free` whose local function never returns the anchor value
    /// on the sub-hypercube `x` with `free` released.
    pub fn irreversible(&self, x: &Configuration, free: ComponentSet) -> Result<ComponentSet> {
        self.network.check_len(x)?;
        Ok(self.irreversible_bits(x.bits(), free))
    }

    /// The smallest trap space containing `x`.
    pub fn closure(&self, x: &Configuration) -> Result<Subhypercube> {
        let free = self.spread(x, ComponentSet::full(self.len()), self.len())?;
        Ok(Subhypercube::new(x, free))
    }

    /// Spaces reachable from `x` with permissive depth `depth`.
    pub fn reachable_spaces(&self, x: &Configuration, depth: usize) -> Result<SpaceSet> {
        self.network.check_len(x)?;
        self.check_depth(depth)?;
        let n = self.len();
        let xb = x.bits();
        let cap = self.limits.max_spaces;

        let mut entries: Vec<(ComponentSet, Space)> = Vec::new();
        let mut seen: HashSet<ComponentSet> = HashSet::new();
        let mut queue: VecDeque<ComponentSet> = VecDeque::new();
        let all = ComponentSet::full(n);
        seen.insert(all);
        queue.push_back(all);

        while let Some(key) = queue.pop_front() {
            let free = self.spread_bits(xb, key, depth);
            let irreversible = if depth > 1 {
                self.irreversible_bits(xb, free)
            } else {
                ComponentSet::EMPTY
            };
            if !irreversible.is_empty() {
                // the 2^|L| - 1 keys below are pairwise distinct
                let l = irreversible.len() as u32;
                if l >= usize::BITS - 1 || (1usize << l) - 1 > cap {
                    return Err(self.explosion(&entries, irreversible));
                }
                for removed in irreversible.nonempty_subsets() {
                    let next = key.difference(removed);
                    if seen.insert(next) {
                        queue.push_back(next);
                        if seen.len() > cap {
                            return Err(self.explosion(&entries, irreversible));
                        }
                    }
                }
            }
            entries.push((
                key,
                Space {
                    anchor: *x,
                    free,
                    irreversible,
                },
            ));
        }
        Ok(SpaceSet { anchor: *x, entries })
    }

    fn explosion(&self, entries: &[(ComponentSet, Space)], current: ComponentSet) -> Error {
        let mut freq: HashMap<usize, usize> = HashMap::new();
        let mut max_irreversible = current.len();
        for (_, s) in entries.iter() {
            max_irreversible = max_irreversible.max(s.irreversible.len());
            for i in s.irreversible.iter() {
                *freq.entry(i).or_default() += 1;
            }
        }
        for i in current.iter() {
            *freq.entry(i).or_default() += 1;
        }
        let mut hot: Vec<(usize, usize)> = freq.into_iter().collect();
        hot.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Error::SpaceExplosion {
            cap: self.limits.max_spaces,
            max_irreversible,
            hot_components: hot
                .into_iter()
                .take(5)
                .map(|(i, _)| self.network.name(i).to_string())
                .collect(),
        }
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth == 0 || depth > self.len() {
            return usage(format!("depth {depth} outside 1..={}", self.len()));
        }
        Ok(())
    }

    fn check_component(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return usage(format!("component index {} outside 1..={}", i + 1, self.len()));
        }
        Ok(())
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 1..=k {
        // c * (n - k + j) / j stays integral at every step
        c = c * (n - k + j) as u128 / j as u128;
        if c > u64::MAX as u128 {
            return Err(Error::BinomialOverflow { n, k });
        }
    }
    Ok(c as u64)
}

/// Anchor `x`, free components `H`, irreversible components `L ⊆ H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub anchor: Configuration,
    pub free: ComponentSet,
    pub irreversible: ComponentSet,
}

impl Space {
    /// `H \ L`.
    pub fn reversible(&self) -> ComponentSet {
        self.free.difference(self.irreversible)
    }

    pub fn subcube(&self) -> Subhypercube {
        Subhypercube::new(&self.anchor, self.free)
    }

    /// Number of generated transitions flipping exactly `m` components (self-loop excluded).
    pub fn transition_count(&self, m: usize) -> Result<u64> {
        let n = self.anchor.len();
        if m == 0 || m > n {
            return usage(format!("flip count {m} outside 1..={n}"));
        }
        let l = self.irreversible.len();
        if m < l || m > self.free.len() {
            return Ok(0);
        }
        binomial(self.reversible().len(), m - l)
    }

    /// Counts for `m = 1..=|H|`.
    pub fn transition_counts(&self) -> Result<Vec<u64>> {
        (1..=self.free.len()).map(|m| self.transition_count(m)).collect()
    }

    pub fn total_transitions(&self) -> Result<u64> {
        self.transition_counts()?
            .into_iter()
            .try_fold(0u64, |acc, c| acc.checked_add(c))
            .ok_or(Error::BinomialOverflow {
                n: self.free.len(),
                k: 0,
            })
    }

    /// Flip `L` and a uniformly chosen `(m - |L|)`-subset of `H \ L`.
    pub fn sample_target<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Configuration> {
        if self.transition_count(m)? == 0 {
            return usage(format!("space generates no transition flipping {m} components"));
        }
        let mut pool: Vec<usize> = self.reversible().iter().collect();
        let k = m - self.irreversible.len();
        // partial Fisher-Yates
        for j in 0..k {
            let r = rng.random_range(j..pool.len());
            pool.swap(j, r);
        }
        let chosen: ComponentSet = pool[..k].iter().copied().collect();
        Ok(self.anchor.flipped(self.irreversible.union(chosen)))
    }

    /// Every generated target, in no particular order.
    pub fn targets(&self) -> Result<Vec<Configuration>> {
        let rev = self.reversible();
        if rev.len() > MATERIALIZE_CAP {
            return usage(format!(
                "{} reversible components exceed the materialization cap of {MATERIALIZE_CAP}",
                rev.len()
            ));
        }
        let mut out = Vec::new();
        if !self.irreversible.is_empty() {
            out.push(self.anchor.flipped(self.irreversible));
        }
        for sub in rev.nonempty_subsets() {
            out.push(self.anchor.flipped(self.irreversible.union(sub)));
        }
        Ok(out)
    }
}

/// Spaces computed from one anchor, keyed by the component set they were closed along.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceSet {
    anchor: Configuration,
    entries: Vec<(ComponentSet, Space)>,
}

impl SpaceSet {
    pub fn anchor(&self) -> &Configuration {
        &self.anchor
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[(ComponentSet, Space)] {
        &self.entries
    }

    pub fn spaces(&self) -> impl Iterator<Item = &Space> {
        self.entries.iter().map(|(_, s)| s)
    }

    pub fn get(&self, key: ComponentSet) -> Option<&Space> {
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, s)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnet::parse_bnet;

    fn net(text: &str) -> MpNetwork {
        MpNetwork::new(parse_bnet(text).unwrap()).unwrap()
    }

    fn toy_a() -> MpNetwork {
        net("x1, 1\nx2, x1\nx3, (!x1 & x2) | x3")
    }

    fn toy_a_no_memory() -> MpNetwork {
        net("x1, 1\nx2, x1\nx3, !x1 & x2")
    }

    fn cfg(s: &str) -> Configuration {
        Configuration::from_bitstring(s).unwrap()
    }

    /// One-based component list.
    fn set(items: &[usize]) -> ComponentSet {
        items.iter().map(|i| i - 1).collect()
    }

    #[test]
    fn extreme_configurations() {
        let a = toy_a();
        let z = a
            .extreme_configuration(&cfg("001"), 2, set(&[1, 2]), Polarity::Min)
            .unwrap();
        assert_eq!(z, cfg("101"));
        assert!(a.network().evaluate(2, &z));
        for p in [Polarity::Min, Polarity::Max] {
            assert_eq!(
                a.extreme_configuration(&cfg("011"), 1, ComponentSet::EMPTY, p).unwrap(),
                cfg("011")
            );
        }
        let z = a
            .extreme_configuration(&cfg("000"), 2, set(&[1, 2]), Polarity::Max)
            .unwrap();
        assert_eq!(z, cfg("010"));
        assert!(a.network().evaluate(2, &z));
    }

    #[test]
    fn extreme_configuration_needs_unate() {
        let xor = net("a, a\nb, b\nc, (a & !b) | (!a & b)");
        assert!(matches!(
            xor.extreme_configuration(&cfg("000"), 2, set(&[1]), Polarity::Min),
            Err(Error::NotUnate(_))
        ));
        // the exhaustive fallback still answers
        assert!(xor.can_flip(&cfg("000"), 2, set(&[1]), false).unwrap());
        assert!(!xor.can_flip(&cfg("000"), 2, ComponentSet::EMPTY, false).unwrap());
    }

    #[test]
    fn can_flip_examples() {
        let a = toy_a();
        assert!(a.can_flip(&cfg("001"), 0, ComponentSet::EMPTY, false).unwrap());
        assert!(!a.can_flip(&cfg("001"), 2, set(&[1, 2]), true).unwrap());
        assert!(a.can_flip(&cfg("001"), 1, set(&[1]), false).unwrap());
    }

    #[test]
    fn spread_examples() {
        let a = toy_a();
        assert_eq!(a.spread(&cfg("001"), set(&[1]), 3).unwrap(), set(&[1]));
        assert_eq!(a.spread(&cfg("011"), set(&[2, 3]), 3).unwrap(), set(&[2]));
        assert_eq!(a.spread(&cfg("000"), set(&[1, 2, 3]), 1).unwrap(), set(&[1]));
        assert!(a.spread(&cfg("000"), set(&[1]), 0).is_err());
        assert!(a.spread(&cfg("000"), set(&[1]), 4).is_err());
    }

    #[test]
    fn irreversible_examples() {
        assert_eq!(
            toy_a_no_memory().irreversible(&cfg("001"), set(&[3])).unwrap(),
            set(&[3])
        );
        assert_eq!(toy_a().irreversible(&cfg("000"), set(&[1, 2, 3])).unwrap(), set(&[1]));
        assert!(toy_a()
            .irreversible(&cfg("000"), ComponentSet::EMPTY)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn reachable_spaces_without_memory() {
        let s = toy_a_no_memory().reachable_spaces(&cfg("001"), 3).unwrap();
        let got: Vec<_> = s
            .entries()
            .iter()
            .map(|(k, sp)| (*k, sp.free, sp.irreversible))
            .collect();
        assert_eq!(
            got,
            vec![
                (set(&[1, 2, 3]), set(&[1, 2, 3]), set(&[1])),
                (set(&[2, 3]), set(&[3]), set(&[3])),
                (set(&[2]), ComponentSet::EMPTY, ComponentSet::EMPTY),
            ]
        );
        let space = s.get(set(&[2, 3])).unwrap();
        assert_eq!(space.targets().unwrap(), vec![cfg("000")]);
    }

    #[test]
    fn reachable_spaces_toy_a() {
        let s = toy_a().reachable_spaces(&cfg("000"), 3).unwrap();
        assert_eq!(s.len(), 2);
        let first = s.get(set(&[1, 2, 3])).unwrap();
        assert_eq!((first.free, first.irreversible), (set(&[1, 2, 3]), set(&[1])));
        let second = s.get(set(&[2, 3])).unwrap();
        assert!(second.free.is_empty() && second.irreversible.is_empty());
        let mut targets: Vec<String> = first.targets().unwrap().iter().map(|c| c.to_string()).collect();
        targets.sort();
        assert_eq!(targets, ["100", "101", "110", "111"]);
    }

    #[test]
    fn fixed_point_has_single_empty_space() {
        let a = toy_a();
        for d in 1..=3 {
            let s = a.reachable_spaces(&cfg("110"), d).unwrap();
            assert_eq!(s.len(), 1);
            let (k, sp) = s.entries()[0];
            assert_eq!(k, ComponentSet::full(3));
            assert!(sp.free.is_empty() && sp.irreversible.is_empty());
        }
    }

    #[test]
    fn transition_counts() {
        let x = cfg("000");
        let s = Space {
            anchor: x,
            free: set(&[1, 2, 3]),
            irreversible: set(&[1]),
        };
        assert_eq!(s.transition_counts().unwrap(), vec![1, 2, 1]);
        let s = Space {
            anchor: x,
            free: set(&[1, 3]),
            irreversible: ComponentSet::EMPTY,
        };
        assert_eq!(s.transition_count(1).unwrap(), 2);
        assert_eq!(s.transition_count(2).unwrap(), 1);
        assert_eq!(s.transition_count(3).unwrap(), 0);
        assert!(s.transition_count(0).is_err());
        assert!(s.transition_count(4).is_err());
        let empty = Space {
            anchor: x,
            free: ComponentSet::EMPTY,
            irreversible: ComponentSet::EMPTY,
        };
        assert!(empty.transition_counts().unwrap().is_empty());
        assert!(empty.targets().unwrap().is_empty());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(3, 4).unwrap(), 0);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert!(binomial(70, 35).is_err());
    }

    #[test]
    fn space_cap_aborts() {
        // eight constant inputs, each irreversible from 0...0
        let text: String = (0..8).map(|i| format!("a{i}, 1\n")).collect();
        let m = MpNetwork::with_limits(
            parse_bnet(&text).unwrap(),
            Limits {
                max_spaces: 16,
                ..Limits::default()
            },
        )
        .unwrap();
        let err = m.reachable_spaces(&Configuration::zeros(8), 2).unwrap_err();
        assert!(matches!(
            err,
            Error::SpaceExplosion {
                max_irreversible: 8,
                ..
            }
        ));
        assert!(err.is_budget());
    }
}
