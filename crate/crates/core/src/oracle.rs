//! Brute-force reference implementations for small networks.
//!
//! Everything here works on the full truth table and follows the definitions
//! literally. It shares no code with the engine or the sampler, so the two can
//! be checked against each other.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{usage, Error, Result};
use crate::model::{BooleanNetwork, ComponentSet, Configuration};
use crate::sampler::LRowMode;
use crate::subcube::Subhypercube;

/// Largest network accepted for transition relations.
pub const DEFAULT_ORACLE_CAP: usize = 14;
/// Largest network accepted for trap-space enumeration and exact propensities.
pub const EXACT_CAP: usize = 10;

pub struct Oracle {
    n: usize,
    table: Vec<u64>,
}

impl Oracle {
    pub fn new(network: &BooleanNetwork) -> Result<Self> {
        Self::with_cap(network, DEFAULT_ORACLE_CAP)
    }

    pub fn with_cap(network: &BooleanNetwork, cap: usize) -> Result<Self> {
        let n = network.len();
        if n > cap {
            return Err(Error::OracleCap { n, cap });
        }
        let table = (0..1u64 << n)
            .map(|x| (0..n).filter(|&i| network.eval(i, x)).fold(0u64, |acc, i| acc | 1 << i))
            .collect();
        Ok(Oracle { n, table })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn all(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    fn config(&self, x: u64) -> Configuration {
        Configuration::from_bits(x, self.n)
    }

    fn check(&self, x: &Configuration) -> Result<u64> {
        if x.len() != self.n {
            return usage(format!("configuration has {} components, expected {}", x.len(), self.n));
        }
        Ok(x.bits())
    }

    /// Vertices of the sub-hypercube with the given values and free set.
    fn vertices(values: u64, free: u64) -> Vec<u64> {
        let base = values & !free;
        let mut out = Vec::with_capacity(1 << free.count_ones());
        let mut sub = 0u64;
        loop {
            out.push(base | sub);
            sub = sub.wrapping_sub(free) & free;
            if sub == 0 {
                return out;
            }
        }
    }

    /// Free set of the smallest sub-hypercube containing `x` that is closed
    /// along the components of `k`.
    fn closure_free(&self, x: u64, k: u64) -> u64 {
        let mut free = 0u64;
        loop {
            let mut grown = free;
            for v in Self::vertices(x, free) {
                grown |= (self.table[v as usize] ^ x) & k;
            }
            if grown == free {
                return free;
            }
            free = grown;
        }
    }

    /// The smallest sub-hypercube containing `x` that is closed along `k`.
    pub fn closure(&self, x: &Configuration, k: ComponentSet) -> Result<Subhypercube> {
        let xb = self.check(x)?;
        let free = self.closure_free(xb, k.bits() & self.all());
        Ok(cube(xb, free, self.n))
    }

    /// Most permissive successors of `x`, including `x` itself.
    pub fn mp_successors(&self, x: &Configuration) -> Result<BTreeSet<Configuration>> {
        let x = self.check(x)?;
        let mut out = BTreeSet::new();
        out.insert(x);
        let all = self.all();
        for k in 0..=all {
            let free = self.closure_free(x, k);
            let verts = Self::vertices(x, free);
            // per component, whether some vertex drives it to 0 / to 1
            let (mut can0, mut can1) = (0u64, 0u64);
            for &v in &verts {
                can1 |= self.table[v as usize];
                can0 |= !self.table[v as usize] & all;
            }
            for y in verts {
                // every component of K takes its value in y somewhere in the closure
                if (y & k) & !can1 == 0 && (!y & k) & !can0 == 0 {
                    out.insert(y);
                }
            }
        }
        Ok(out.into_iter().map(|y| self.config(y)).collect())
    }

    /// General asynchronous successors: flip any nonempty set of components
    /// that disagree with their function.
    pub fn async_successors(&self, x: &Configuration) -> Result<BTreeSet<Configuration>> {
        let x = self.check(x)?;
        let diff = self.table[x as usize] ^ x;
        Ok((1..=self.all())
            .filter(|&s| s & diff == s)
            .map(|s| self.config(x ^ s))
            .collect())
    }

    /// Fully asynchronous successors: flip exactly one disagreeing component.
    pub fn fully_async_successors(&self, x: &Configuration) -> Result<BTreeSet<Configuration>> {
        let x = self.check(x)?;
        let diff = self.table[x as usize] ^ x;
        Ok((0..self.n)
            .filter(|&i| diff >> i & 1 == 1)
            .map(|i| self.config(x ^ 1 << i))
            .collect())
    }

    pub fn mp_relation(&self) -> Result<Vec<(Configuration, Configuration)>> {
        self.relation(|x| self.mp_successors(x))
    }

    pub fn async_relation(&self) -> Result<Vec<(Configuration, Configuration)>> {
        self.relation(|x| self.async_successors(x))
    }

    fn relation(
        &self,
        succ: impl Fn(&Configuration) -> Result<BTreeSet<Configuration>>,
    ) -> Result<Vec<(Configuration, Configuration)>> {
        let mut out = Vec::new();
        for x in 0..=self.all() {
            let x = self.config(x);
            for y in succ(&x)? {
                out.push((x, y));
            }
        }
        Ok(out)
    }

    fn is_trap(&self, values: u64, free: u64) -> bool {
        let fixed = self.all() & !free;
        Self::vertices(values, free)
            .into_iter()
            .all(|v| (self.table[v as usize] ^ values) & fixed == 0)
    }

    /// Minimal trap spaces by enumerating all `3^n` sub-hypercubes.
    pub fn minimal_trap_spaces(&self) -> Result<Vec<Subhypercube>> {
        if self.n > EXACT_CAP {
            return Err(Error::OracleCap {
                n: self.n,
                cap: EXACT_CAP,
            });
        }
        let mut traps = Vec::new();
        for free in 0..=self.all() {
            for values in 0..=self.all() {
                if values & free == 0 && self.is_trap(values, free) {
                    traps.push((values, free));
                }
            }
        }
        let set: HashSet<(u64, u64)> = traps.iter().copied().collect();
        // minimal: no proper sub-hypercube is a trap space
        let has_smaller = |(values, free): (u64, u64)| {
            let mut g = free;
            loop {
                // g: components left free, free & !g: newly fixed, any values
                let fixing = free & !g;
                if fixing != 0 {
                    let mut sub = 0u64;
                    loop {
                        if set.contains(&(values | sub, g)) {
                            return true;
                        }
                        sub = sub.wrapping_sub(fixing) & fixing;
                        if sub == 0 {
                            break;
                        }
                    }
                }
                if g == 0 {
                    return false;
                }
                g = (g - 1) & free;
            }
        };
        let mut out: Vec<Subhypercube> = traps
            .iter()
            .filter(|&&t| !has_smaller(t))
            .map(|&(v, f)| cube(v, f, self.n))
            .collect();
        out.sort_by_cached_key(|h| h.to_string());
        Ok(out)
    }

    /// Spaces reachable from `x` at depth `d`, as `(K, H, L)` in insertion order.
    fn spaces(&self, x: u64, d: usize) -> Vec<(u64, u64, u64)> {
        let spread = |k: u64| {
            let mut h = 0u64;
            let mut k = k;
            for _ in 0..d {
                let mut grown = h;
                for v in Self::vertices(x, h) {
                    grown |= (self.table[v as usize] ^ x) & k;
                }
                if grown == h {
                    break;
                }
                h = grown;
                k &= !h;
            }
            h
        };
        let irreversible = |h: u64| {
            let mut never_back = h;
            for v in Self::vertices(x, h) {
                never_back &= self.table[v as usize] ^ x;
            }
            never_back
        };
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.all()]);
        seen.insert(self.all());
        while let Some(k) = queue.pop_front() {
            let h = spread(k);
            let l = if d > 1 { irreversible(h) } else { 0 };
            out.push((k, h, l));
            let mut m = l;
            while m != 0 {
                if seen.insert(k & !m) {
                    queue.push_back(k & !m);
                }
                m = (m - 1) & l;
            }
        }
        out
    }

    /// Successor distribution of `x` under the variable-depth sampler.
    fn step_distribution(&self, x: u64, depth: &[f64], weights: &[f64], mode: LRowMode) -> BTreeMap<u64, f64> {
        let mut dist = BTreeMap::new();
        for (di, &pd) in depth.iter().enumerate() {
            if pd == 0.0 {
                continue;
            }
            let spaces = self.spaces(x, di + 1);
            // rate of each (space, flip count) and the targets it covers
            let mut rows = Vec::new();
            for &(_, h, l) in &spaces {
                let lc = l.count_ones() as usize;
                let mut by_size: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
                let rev = h & !l;
                let mut sub = 0u64;
                loop {
                    let flip = l | sub;
                    if flip != 0 {
                        by_size.entry(flip.count_ones() as usize).or_default().push(x ^ flip);
                    }
                    sub = sub.wrapping_sub(rev) & rev;
                    if sub == 0 {
                        break;
                    }
                }
                for (m, targets) in by_size {
                    let mult = if m == lc {
                        match mode {
                            LRowMode::Listing => lc as f64,
                            LRowMode::Count => 1.0,
                        }
                    } else {
                        targets.len() as f64
                    };
                    rows.push((mult * weights[m - 1], targets));
                }
            }
            let total: f64 = rows.iter().map(|r| r.0).sum();
            if total == 0.0 {
                *dist.entry(x).or_insert(0.0) += pd;
                continue;
            }
            for (rate, targets) in rows {
                let share = pd * rate / total / targets.len() as f64;
                for y in targets {
                    *dist.entry(y).or_insert(0.0) += share;
                }
            }
        }
        dist
    }

    /// Exact probability of each attractor being the unique reachable one,
    /// by solving the absorbing Markov chain of the sampler from `x0`.
    pub fn exact_propensities(
        &self,
        x0: &Configuration,
        depth: &[f64],
        weights: &[f64],
        mode: LRowMode,
    ) -> Result<ExactPropensities> {
        let x0 = self.check(x0)?;
        if depth.len() != self.n || weights.len() != self.n {
            return usage("depth and weight vectors must have one entry per component");
        }
        let attractors = self.minimal_trap_spaces()?;
        let ids: Vec<String> = attractors.iter().map(|h| h.to_string()).collect();
        // index of the unique attractor inside the closure, if any
        let absorbed = |x: u64| -> Option<usize> {
            let free = self.closure_free(x, self.all());
            let inside: Vec<usize> = attractors
                .iter()
                .enumerate()
                .filter(|(_, a)| a.free().bits() & !free == 0 && (a.values() ^ x) & !free == 0)
                .map(|(i, _)| i)
                .collect();
            (inside.len() == 1).then(|| inside[0])
        };

        let mut probabilities = vec![0.0; attractors.len()];
        if let Some(a) = absorbed(x0) {
            probabilities[a] = 1.0;
            return Ok(ExactPropensities {
                ids,
                probabilities,
                non_converging: 0.0,
            });
        }

        // transient states reachable from x0 and their transitions
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut states = vec![x0];
        let mut edges: Vec<BTreeMap<u64, f64>> = Vec::new();
        index.insert(x0, 0);
        let mut next = 0;
        while next < states.len() {
            let x = states[next];
            let dist = self.step_distribution(x, depth, weights, mode);
            for &y in dist.keys() {
                if absorbed(y).is_none() && !index.contains_key(&y) {
                    index.insert(y, states.len());
                    states.push(y);
                }
            }
            edges.push(dist);
            next += 1;
        }

        // transient states from which absorption is possible
        let t = states.len();
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); t];
        let mut live = vec![false; t];
        let mut work = Vec::new();
        for (s, dist) in edges.iter().enumerate() {
            for (&y, &p) in dist {
                if p <= 0.0 {
                    continue;
                }
                match index.get(&y) {
                    Some(&u) => reverse[u].push(s),
                    None => {
                        if !live[s] {
                            live[s] = true;
                            work.push(s);
                        }
                    }
                }
            }
        }
        while let Some(u) = work.pop() {
            for &s in &reverse[u] {
                if !live[s] {
                    live[s] = true;
                    work.push(s);
                }
            }
        }
        if !live[0] {
            return Ok(ExactPropensities {
                ids,
                probabilities,
                non_converging: 1.0,
            });
        }

        let solvable: Vec<usize> = (0..t).filter(|&s| live[s]).collect();
        let pos: HashMap<usize, usize> = solvable.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let k = solvable.len();
        let a = attractors.len();
        let mut system = DMatrix::<f64>::identity(k, k);
        let mut rhs = DMatrix::<f64>::zeros(k, a);
        for (row, &s) in solvable.iter().enumerate() {
            for (&y, &p) in &edges[s] {
                match index.get(&y) {
                    Some(u) => {
                        if let Some(&col) = pos.get(u) {
                            system[(row, col)] -= p;
                        }
                    }
                    None => rhs[(row, absorbed(y).unwrap())] += p,
                }
            }
        }
        let lu = system.lu();
        for (col, slot) in probabilities.iter_mut().enumerate() {
            let b: DVector<f64> = rhs.column(col).into_owned();
            let sol = lu
                .solve(&b)
                .ok_or_else(|| Error::Internal("singular absorption system".into()))?;
            *slot = sol[pos[&0]];
        }
        let total: f64 = probabilities.iter().sum();
        Ok(ExactPropensities {
            ids,
            probabilities,
            non_converging: (1.0 - total).max(0.0),
        })
    }
}

fn cube(values: u64, free: u64, n: usize) -> Subhypercube {
    Subhypercube::new(&Configuration::from_bits(values, n), ComponentSet::from_bits(free))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactPropensities {
    /// Attractor ids in `{0,1,*}` form, sorted.
    pub ids: Vec<String>,
    pub probabilities: Vec<f64>,
    /// Probability of never reaching a state with a single reachable attractor.
    pub non_converging: f64,
}

impl ExactPropensities {
    pub fn probability(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|i| i == id).map(|k| self.probabilities[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnet::parse_bnet;

    fn oracle(text: &str) -> Oracle {
        Oracle::new(&parse_bnet(text).unwrap()).unwrap()
    }

    fn cfg(s: &str) -> Configuration {
        Configuration::from_bitstring(s).unwrap()
    }

    fn strings(set: BTreeSet<Configuration>) -> Vec<String> {
        let mut v: Vec<String> = set.into_iter().map(|c| c.to_string()).collect();
        v.sort();
        v
    }

    const TOY_A: &str = "x1, 1\nx2, x1\nx3, (!x1 & x2) | x3";
    const TOY_B: &str = "x1, x1 & !x3\nx2, x1\nx3, !x1";

    #[test]
    fn mp_successors_of_toy_a() {
        let o = oracle(TOY_A);
        assert_eq!(
            strings(o.mp_successors(&cfg("000")).unwrap()),
            ["000", "100", "101", "110", "111"]
        );
        assert_eq!(strings(o.fully_async_successors(&cfg("000")).unwrap()), ["100"]);
        let from_011 = o.mp_successors(&cfg("011")).unwrap();
        assert!(from_011.contains(&cfg("001")));
        assert!(strings(o.mp_successors(&cfg("110")).unwrap()) == ["110"]);
    }

    #[test]
    fn mp_successors_of_toy_b() {
        let o = oracle(TOY_B);
        assert_eq!(strings(o.async_successors(&cfg("111")).unwrap()), ["010", "011", "110"]);
        assert_eq!(strings(o.fully_async_successors(&cfg("111")).unwrap()), ["011", "110"]);
        assert_eq!(
            strings(o.mp_successors(&cfg("111")).unwrap()),
            ["000", "001", "010", "011", "100", "101", "110", "111"]
        );
        assert!(o.async_successors(&cfg("001")).unwrap().is_empty());
    }

    #[test]
    fn trap_spaces() {
        let ids = |t: &str| {
            oracle(t)
                .minimal_trap_spaces()
                .unwrap()
                .iter()
                .map(|h| h.to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(ids(TOY_A), ["110", "111"]);
        assert_eq!(ids(TOY_B), ["001", "110"]);
        assert_eq!(ids("a, !a"), ["*"]);
        assert_eq!(ids("a, !b\nb, a\nc, c"), ["**0", "**1"]);
    }

    #[test]
    fn exact_toy_a() {
        let o = oracle(TOY_A);
        let exp = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        let e = o
            .exact_propensities(&cfg("000"), &exp, &[1.0; 3], LRowMode::Listing)
            .unwrap();
        assert!((e.probability("111").unwrap() - 1.0 / 14.0).abs() < 1e-12);
        assert!((e.probability("110").unwrap() - 13.0 / 14.0).abs() < 1e-12);
        assert!(e.non_converging.abs() < 1e-12);

        let full = o
            .exact_propensities(&cfg("000"), &[0.0, 0.0, 1.0], &[1.0; 3], LRowMode::Listing)
            .unwrap();
        assert!((full.probability("111").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_toy_b() {
        let o = oracle(TOY_B);
        let e = o
            .exact_propensities(&cfg("111"), &[1.0, 0.0, 0.0], &[1.0; 3], LRowMode::Listing)
            .unwrap();
        assert!((e.probability("001").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let s = o
            .exact_propensities(&cfg("111"), &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], LRowMode::Listing)
            .unwrap();
        assert!((s.probability("001").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frozen_component_decides_immediately() {
        let o = oracle("a, !b\nb, a\nc, c");
        let e = o
            .exact_propensities(&cfg("000"), &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], LRowMode::Listing)
            .unwrap();
        assert!((e.probability("**0").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn caps() {
        let text: String = (0..15).map(|i| format!("v{i}, v{i}\n")).collect();
        let net = parse_bnet(&text).unwrap();
        assert!(matches!(Oracle::new(&net), Err(Error::OracleCap { n: 15, cap: 14 })));
        let text: String = (0..11).map(|i| format!("v{i}, v{i}\n")).collect();
        let o = Oracle::new(&parse_bnet(&text).unwrap()).unwrap();
        assert!(matches!(o.minimal_trap_spaces(), Err(Error::OracleCap { .. })));
    }
}
