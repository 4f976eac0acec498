use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Dominance relation of a two-stage Luce segment. An arc `(a, b)` means
/// `a` dominates `b`: when both are offered, `b` is dropped from the
/// consideration set. Products are 0-based.
#[derive(Clone, Debug)]
pub struct PartialOrder {
    n: usize,
    arcs: Vec<(usize, usize)>,
    derived: OnceLock<Option<Derived>>,
}

#[derive(Clone, Debug)]
struct Derived {
    words: usize,
    // reach[a] has bit b set iff a strictly dominates b
    reach: Vec<u64>,
    topo: Vec<usize>,
    covers: Vec<(usize, usize)>,
    minimal: Vec<usize>,
}

impl PartialEq for PartialOrder {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.arcs == other.arcs
    }
}

impl PartialOrder {
    /// Arcs may contain cycles; check `is_acyclic` before using the
    /// derived views, which panic on a cyclic relation.
    pub fn new(n: usize, arcs: Vec<(usize, usize)>) -> Result<PartialOrder> {
        if let Some(&(a, b)) = arcs.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::InvalidInstance(format!("arc ({a}, {b}) references a product outside 0..{n}")));
        }
        Ok(PartialOrder { n, arcs, derived: OnceLock::new() })
    }

    pub fn empty(n: usize) -> PartialOrder {
        PartialOrder { n, arcs: Vec::new(), derived: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn is_acyclic(&self) -> bool {
        self.derived().is_some()
    }

    fn derived(&self) -> Option<&Derived> {
        self.derived.get_or_init(|| derive(self.n, &self.arcs)).as_ref()
    }

    fn acyclic(&self) -> &Derived {
        self.derived().expect("partial order is cyclic")
    }

    pub fn topological_order(&self) -> Option<&[usize]> {
        self.derived().map(|d| d.topo.as_slice())
    }

    /// Strict transitive dominance: `a` dominates `b` through some path of arcs.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        let d = self.acyclic();
        d.reach[a * d.words + b / 64] >> (b % 64) & 1 == 1
    }

    /// Products strictly dominated by `a`, ascending.
    pub fn dominated_by(&self, a: usize) -> Vec<usize> {
        let d = self.acyclic();
        (0..self.n).filter(|&b| d.reach[a * d.words + b / 64] >> (b % 64) & 1 == 1).collect()
    }

    /// Transitive reduction of the arc set, sorted.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.acyclic().covers
    }

    /// Products dominated by no other product, isolated ones included.
    pub fn minimal(&self) -> &[usize] {
        &self.acyclic().minimal
    }
}

fn derive(n: usize, arcs: &[(usize, usize)]) -> Option<Derived> {
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, b) in arcs {
        if !succ[a].contains(&b) {
            succ[a].push(b);
            indeg[b] += 1;
        }
    }
    let minimal: Vec<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    let mut queue = minimal.clone();
    let mut left = indeg.clone();
    while let Some(a) = queue.pop() {
        topo.push(a);
        for &b in &succ[a] {
            left[b] -= 1;
            if left[b] == 0 {
                queue.push(b);
            }
        }
    }
    if topo.len() < n {
        return None;
    }
    let words = n.div_ceil(64).max(1);
    let mut reach = vec![0u64; n * words];
    for &a in topo.iter().rev() {
        for &b in &succ[a] {
            reach[a * words + b / 64] |= 1 << (b % 64);
            for w in 0..words {
                let v = reach[b * words + w];
                reach[a * words + w] |= v;
            }
        }
    }
    let has = |a: usize, b: usize| reach[a * words + b / 64] >> (b % 64) & 1 == 1;
    let mut covers = Vec::new();
    for a in 0..n {
        for &b in &succ[a] {
            if !succ[a].iter().any(|&c| c != b && has(c, b)) {
                covers.push((a, b));
            }
        }
    }
    covers.sort_unstable();
    Some(Derived { words, reach, topo, covers, minimal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_with_shortcut() {
        let p = PartialOrder::new(4, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(p.covers(), &[(0, 1), (1, 2)]);
        assert_eq!(p.minimal(), &[0, 3]);
        assert!(p.dominates(0, 2));
        assert!(!p.dominates(2, 0));
        assert!(!p.dominates(0, 0));
        assert_eq!(p.dominated_by(0), vec![1, 2]);
    }

    #[test]
    fn empty_order() {
        let p = PartialOrder::empty(3);
        assert!(p.covers().is_empty());
        assert_eq!(p.minimal(), &[0, 1, 2]);
    }

    #[test]
    fn cycles_are_detected() {
        let p = PartialOrder::new(2, vec![(0, 1), (1, 0)]).unwrap();
        assert!(!p.is_acyclic());
        assert!(PartialOrder::new(2, vec![(0, 0)]).unwrap().topological_order().is_none());
        assert!(PartialOrder::new(2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn wide_orders_cross_word_boundaries() {
        let arcs = (0..129).map(|j| (j, j + 1)).collect();
        let p = PartialOrder::new(130, arcs).unwrap();
        assert!(p.dominates(0, 129));
        assert!(p.dominates(63, 64));
        assert_eq!(p.covers().len(), 129);
    }
}
