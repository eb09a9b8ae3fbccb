//! Boolean networks: configurations, local functions, influence graph and mutations.
//!
//! Components are addressed by a zero-based index everywhere inside the crate.
//! Names only matter when reading or writing models and configurations.

use std::collections::HashMap;
use std::fmt;

use crate::error::{usage, Error, Result};

/// Largest supported network dimension; configurations and component sets are packed in a `u64`.
pub const MAX_COMPONENTS: usize = 64;

/// Default cap on the number of variables a local function may depend on
/// when the influence graph is enumerated.
pub const DEFAULT_FANIN_CAP: usize = 24;

#[inline]
pub(crate) fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A set of components, stored as a bitmask (bit `i` = component `i`).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentSet(u64);

impl ComponentSet {
    pub const EMPTY: ComponentSet = ComponentSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ComponentSet(bits)
    }

    /// All components `0..n`.
    pub fn full(n: usize) -> Self {
        ComponentSet(mask_of(n))
    }

    pub fn singleton(i: usize) -> Self {
        ComponentSet(1 << i)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    pub fn with(self, i: usize) -> Self {
        ComponentSet(self.0 | 1 << i)
    }

    pub fn union(self, other: Self) -> Self {
        ComponentSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ComponentSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ComponentSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Component indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// All non-empty subsets, each exactly once.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = ComponentSet> {
        let full = self.0;
        let mut sub = full;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = sub;
            sub = (sub.wrapping_sub(1)) & full;
            if sub == 0 {
                done = true;
            }
            Some(ComponentSet(out))
        })
    }

    /// Render as a bitstring of length `n`, component 0 first.
    pub fn to_bitstring(self, n: usize) -> String {
        (0..n).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

impl FromIterator<usize> for ComponentSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = ComponentSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for ComponentSet {
    /// One-based, like the usual mathematical notation: `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// A Boolean state for every component of a network.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    bits: u64,
    len: usize,
}

impl Configuration {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_COMPONENTS);
        Configuration { bits: 0, len }
    }

    /// Bits above `len` are discarded.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        assert!(len <= MAX_COMPONENTS);
        Configuration {
            bits: bits & mask_of(len),
            len,
        }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.bits >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    /// Flip every component of `set`.
    pub fn flipped(&self, set: ComponentSet) -> Self {
        Configuration::from_bits(self.bits ^ set.bits(), self.len)
    }

    /// Components on which `self` and `other` differ.
    pub fn delta(&self, other: &Configuration) -> Result<ComponentSet> {
        if self.len != other.len {
            return usage(format!(
                "configurations of different lengths ({} and {})",
                self.len, other.len
            ));
        }
        Ok(ComponentSet::from_bits(self.bits ^ other.bits))
    }

    /// Parse a plain bitstring, component 0 first.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_COMPONENTS {
            return Err(Error::TooManyComponents {
                n: s.len(),
                max: MAX_COMPONENTS,
            });
        }
        let mut c = Configuration::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => c.set(i, true),
                other => return usage(format!("non-binary value `{other}` in configuration")),
            }
        }
        Ok(c)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Expression tree of a local function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Var(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    /// N-ary conjunction; a single operand is returned as is, none gives `1`.
    pub fn and(mut ops: Vec<Expr>) -> Self {
        match ops.len() {
            0 => Expr::Const(true),
            1 => ops.pop().unwrap(),
            _ => Expr::And(ops),
        }
    }

    /// N-ary disjunction; a single operand is returned as is, none gives `0`.
    pub fn or(mut ops: Vec<Expr>) -> Self {
        match ops.len() {
            0 => Expr::Const(false),
            1 => ops.pop().unwrap(),
            _ => Expr::Or(ops),
        }
    }

    pub fn eval(&self, bits: u64) -> bool {
        match self {
            Expr::Const(v) => *v,
            Expr::Var(i) => bits >> i & 1 == 1,
            Expr::Not(e) => !e.eval(bits),
            Expr::And(es) => es.iter().all(|e| e.eval(bits)),
            Expr::Or(es) => es.iter().any(|e| e.eval(bits)),
        }
    }

    /// Variables occurring syntactically in the expression.
    pub fn support(&self) -> ComponentSet {
        match self {
            Expr::Const(_) => ComponentSet::EMPTY,
            Expr::Var(i) => ComponentSet::singleton(*i),
            Expr::Not(e) => e.support(),
            Expr::And(es) | Expr::Or(es) => es.iter().fold(ComponentSet::EMPTY, |acc, e| acc.union(e.support())),
        }
    }

    fn max_var(&self) -> Option<usize> {
        self.support().iter().last()
    }
}

/// A Boolean network of dimension `n`: one named component and one local function each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanNetwork {
    names: Vec<String>,
    functions: Vec<Expr>,
    supports: Vec<ComponentSet>,
}

impl BooleanNetwork {
    pub fn new(names: Vec<String>, functions: Vec<Expr>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::EmptyModel);
        }
        if n > MAX_COMPONENTS {
            return Err(Error::TooManyComponents { n, max: MAX_COMPONENTS });
        }
        if functions.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{} names but {} local functions",
                n,
                functions.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidNetwork(format!("component {} has an empty name", i + 1)));
            }
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate component name `{name}`")));
            }
        }
        for (i, f) in functions.iter().enumerate() {
            if let Some(v) = f.max_var() {
                if v >= n {
                    return Err(Error::InvalidNetwork(format!(
                        "local function of `{}` refers to component {} (n = {n})",
                        names[i],
                        v + 1
                    )));
                }
            }
        }
        let supports = functions.iter().map(Expr::support).collect();
        Ok(BooleanNetwork {
            names,
            functions,
            supports,
        })
    }

    /// Convenience constructor naming components `x1..xn`.
    pub fn anonymous(functions: Vec<Expr>) -> Result<Self> {
        let names = (1..=functions.len()).map(|i| format!("x{i}")).collect();
        Self::new(names, functions)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn function(&self, i: usize) -> &Expr {
        &self.functions[i]
    }

    pub fn functions(&self) -> &[Expr] {
        &self.functions
    }

    pub fn support(&self, i: usize) -> ComponentSet {
        self.supports[i]
    }

    #[inline]
    pub fn eval(&self, i: usize, bits: u64) -> bool {
        self.functions[i].eval(bits)
    }

    pub fn evaluate(&self, i: usize, x: &Configuration) -> bool {
        self.eval(i, x.bits())
    }

    /// Synchronous image `f(x)`.
    pub fn apply(&self, x: &Configuration) -> Result<Configuration> {
        self.check_len(x)?;
        let mut bits = 0u64;
        for i in 0..self.len() {
            if self.eval(i, x.bits()) {
                bits |= 1 << i;
            }
        }
        Ok(Configuration::from_bits(bits, self.len()))
    }

    pub(crate) fn check_len(&self, x: &Configuration) -> Result<()> {
        if x.len() != self.len() {
            return usage(format!(
                "configuration has {} components, network has {}",
                x.len(),
                self.len()
            ));
        }
        Ok(())
    }

    /// Network where every mutated component has a constant local function.
    pub fn apply_mutations(&self, mutations: &[Mutation]) -> Result<Self> {
        let mut seen = ComponentSet::EMPTY;
        let mut functions = self.functions.clone();
        for m in mutations {
            if m.component >= self.len() {
                return usage(format!("mutation of unknown component {}", m.component + 1));
            }
            if seen.contains(m.component) {
                return usage(format!(
                    "component `{}` mutated more than once",
                    self.names[m.component]
                ));
            }
            seen.insert(m.component);
            functions[m.component] = Expr::Const(m.value);
        }
        Self::new(self.names.clone(), functions)
    }

    /// Signed influence graph, enumerating the syntactic support of each local function.
    pub fn influence_graph(&self) -> Result<InfluenceGraph> {
        self.influence_graph_with_cap(DEFAULT_FANIN_CAP)
    }

    pub fn influence_graph_with_cap(&self, cap: usize) -> Result<InfluenceGraph> {
        let n = self.len();
        let mut positive = vec![ComponentSet::EMPTY; n];
        let mut negative = vec![ComponentSet::EMPTY; n];
        for target in 0..n {
            let support = self.supports[target];
            if support.len() > cap {
                return Err(Error::FanInTooLarge {
                    component: self.names[target].clone(),
                    support: support.len(),
                    cap,
                });
            }
            for source in support.iter() {
                let rest = support.difference(ComponentSet::singleton(source)).bits();
                let bit = 1u64 << source;
                // enumerate every assignment of the other support variables
                let mut sub = 0u64;
                loop {
                    let low = self.eval(target, sub);
                    let high = self.eval(target, sub | bit);
                    if !low && high {
                        positive[target].insert(source);
                    } else if low && !high {
                        negative[target].insert(source);
                    }
                    if positive[target].contains(source) && negative[target].contains(source) {
                        break;
                    }
                    sub = sub.wrapping_sub(rest) & rest;
                    if sub == 0 {
                        break;
                    }
                }
            }
        }
        Ok(InfluenceGraph { positive, negative })
    }

    pub fn is_locally_monotone(&self) -> Result<bool> {
        Ok(self.influence_graph()?.is_locally_monotone())
    }
}

/// Sign of an influence edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn as_int(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Positive => 1,
        }
    }
}

/// Signed digraph of dependencies, stored per target as the sets of
/// positive and negative regulators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfluenceGraph {
    positive: Vec<ComponentSet>,
    negative: Vec<ComponentSet>,
}

impl InfluenceGraph {
    pub fn positive_regulators(&self, target: usize) -> ComponentSet {
        self.positive[target]
    }

    pub fn negative_regulators(&self, target: usize) -> ComponentSet {
        self.negative[target]
    }

    pub fn has_edge(&self, source: usize, sign: Sign, target: usize) -> bool {
        match sign {
            Sign::Positive => self.positive[target].contains(source),
            Sign::Negative => self.negative[target].contains(source),
        }
    }

    /// Edges `(source, sign, target)` sorted by target, then source, then sign.
    pub fn edges(&self) -> Vec<(usize, Sign, usize)> {
        let mut out = Vec::new();
        for target in 0..self.positive.len() {
            let all = self.positive[target].union(self.negative[target]);
            for source in all.iter() {
                if self.negative[target].contains(source) {
                    out.push((source, Sign::Negative, target));
                }
                if self.positive[target].contains(source) {
                    out.push((source, Sign::Positive, target));
                }
            }
        }
        out
    }

    /// Whether the local function of `target` is unate.
    pub fn is_unate(&self, target: usize) -> bool {
        self.positive[target].intersection(self.negative[target]).is_empty()
    }

    pub fn is_locally_monotone(&self) -> bool {
        (0..self.positive.len()).all(|i| self.is_unate(i))
    }
}

/// Forces a component to a constant value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mutation {
    pub component: usize,
    pub value: bool,
}

impl Mutation {
    /// Parse `NAME=0` or `NAME=1` against a network.
    pub fn parse(spec: &str, network: &BooleanNetwork) -> Result<Self> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("mutation `{spec}` is not of the form NAME=0|1")))?;
        let name = name.trim();
        let component = network
            .index_of(name)
            .ok_or_else(|| Error::Usage(format!("mutation of unknown component `{name}`")))?;
        let value = match value.trim() {
            "0" => false,
            "1" => true,
            v => return usage(format!("mutation value `{v}` is not 0 or 1")),
        };
        Ok(Mutation { component, value })
    }
}
