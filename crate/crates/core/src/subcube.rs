use std::fmt;
use std::str::FromStr;

use crate::error::{usage, Error, Result};
use crate::model::{mask_of, ComponentSet, Configuration, MAX_COMPONENTS};

/// A sub-hypercube of `B^n`: every component is fixed to 0, fixed to 1, or free.
///
/// Rendered as a string over `{0,1,*}` in component order, e.g. `**1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subhypercube {
    values: u64,
    free: ComponentSet,
    len: usize,
}

impl Subhypercube {
    /// `anchor` with the components of `free` released.
    pub fn new(anchor: &Configuration, free: ComponentSet) -> Self {
        Self::from_parts(anchor.bits(), free, anchor.len())
    }

    pub(crate) fn from_parts(values: u64, free: ComponentSet, len: usize) -> Self {
        let free = ComponentSet::from_bits(free.bits() & mask_of(len));
        Subhypercube {
            values: values & !free.bits() & mask_of(len),
            free,
            len,
        }
    }

    /// The whole cube `*...*`.
    pub fn full(len: usize) -> Self {
        Self::from_parts(0, ComponentSet::full(len), len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn free(&self) -> ComponentSet {
        self.free
    }

    pub fn fixed(&self) -> ComponentSet {
        ComponentSet::full(self.len).difference(self.free)
    }

    /// Values of the fixed components; free bits are zero.
    pub fn values(&self) -> u64 {
        self.values
    }

    /// `Some(v)` for a fixed component, `None` for a free one.
    pub fn get(&self, i: usize) -> Option<bool> {
        if self.free.contains(i) {
            None
        } else {
            Some(self.values >> i & 1 == 1)
        }
    }

    pub fn rank(&self) -> usize {
        self.free.len()
    }

    pub fn vertex_count(&self) -> u128 {
        1u128 << self.rank()
    }

    pub fn contains(&self, x: &Configuration) -> bool {
        x.len() == self.len && (x.bits() ^ self.values) & !self.free.bits() & mask_of(self.len) == 0
    }

    /// `self` is smaller than `other`: every component fixed in `other`
    /// is fixed to the same value in `self`.
    pub fn is_smaller_than(&self, other: &Subhypercube) -> bool {
        self.len == other.len
            && self.free.is_subset(other.free)
            && (self.values ^ other.values) & other.fixed().bits() == 0
    }

    /// The same sub-hypercube with component `i` fixed to `value`.
    pub fn with_fixed(&self, i: usize, value: bool) -> Self {
        let mut free = self.free;
        free.remove(i);
        let values = if value {
            self.values | 1 << i
        } else {
            self.values & !(1 << i)
        };
        Subhypercube {
            values,
            free,
            len: self.len,
        }
    }

    /// Vertices in increasing order of their free bits.
    pub fn vertices(&self) -> impl Iterator<Item = Configuration> + '_ {
        let free = self.free.bits();
        let mut sub = 0u64;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = Configuration::from_bits(self.values | sub, self.len);
            sub = sub.wrapping_sub(free) & free;
            if sub == 0 {
                done = true;
            }
            Some(out)
        })
    }
}

impl fmt::Display for Subhypercube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(match self.get(i) {
                None => "*",
                Some(true) => "1",
                Some(false) => "0",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Subhypercube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Subhypercube {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_COMPONENTS {
            return Err(Error::TooManyComponents {
                n: s.len(),
                max: MAX_COMPONENTS,
            });
        }
        let mut values = 0u64;
        let mut free = ComponentSet::EMPTY;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => values |= 1 << i,
                '*' => free.insert(i),
                other => return usage(format!("invalid sub-hypercube character `{other}`")),
            }
        }
        Ok(Subhypercube::from_parts(values, free, s.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Subhypercube {
        s.parse().unwrap()
    }

    #[test]
    fn rank_and_vertices() {
        let c = h("0**");
        assert_eq!(c.rank(), 2);
        assert_eq!(c.vertex_count(), 4);
        let vs: Vec<String> = c.vertices().map(|v| v.to_string()).collect();
        assert_eq!(vs, ["000", "010", "001", "011"]);
        assert_eq!(h("101").vertices().count(), 1);
        assert_eq!(c.to_string(), "0**");
    }

    #[test]
    fn smaller_order() {
        assert!(h("1*0").is_smaller_than(&h("**0")));
        assert!(!h("**0").is_smaller_than(&h("1*0")));
        assert!(h("110").is_smaller_than(&h("1*0")));
        assert!(!h("111").is_smaller_than(&h("1*0")));
        assert!(h("01*").is_smaller_than(&h("01*")));
    }

    #[test]
    fn membership() {
        let c = h("*01");
        assert!(c.contains(&Configuration::from_bitstring("101").unwrap()));
        assert!(c.contains(&Configuration::from_bitstring("001").unwrap()));
        assert!(!c.contains(&Configuration::from_bitstring("011").unwrap()));
        assert!(!c.contains(&Configuration::from_bitstring("0011").unwrap()));
    }

    #[test]
    fn parse_errors() {
        assert!("01x".parse::<Subhypercube>().is_err());
    }
}
