//! Block systems, the minimal-block primitivity test, and Higman's criterion.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::PermGroup;

/// A `G`-invariant partition into blocks of equal size, each sorted, ordered by
/// least element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockSystem {
    pub blocks: Vec<Vec<usize>>,
    pub block_size: usize,
    pub block_count: usize,
}

impl BlockSystem {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by_label: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (p, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(p);
        }
        let mut blocks: Vec<Vec<usize>> = by_label.into_values().collect();
        blocks.sort();
        BlockSystem {
            block_size: blocks.first().map_or(0, |b| b.len()),
            block_count: blocks.len(),
            blocks,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.block_size <= 1 || self.block_count <= 1
    }

    /// Checks equal block sizes and invariance under every generator.
    pub fn is_invariant_under(&self, g: &PermGroup) -> bool {
        if self.blocks.iter().any(|b| b.len() != self.block_size) {
            return false;
        }
        let mut label = vec![usize::MAX; g.degree()];
        for (k, b) in self.blocks.iter().enumerate() {
            for &p in b {
                label[p] = k;
            }
        }
        g.generators().iter().all(|s| {
            self.blocks.iter().all(|b| {
                let l = label[s.apply(b[0])];
                b.iter().all(|&p| label[s.apply(p)] == l)
            })
        })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the absorbed root if two classes merged.
    fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let (keep, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[gone] = keep;
        Some((keep, gone))
    }
}

/// Finest block system in which `a` and `b` share a block.
pub fn minimal_block_system(g: &PermGroup, a: usize, b: usize) -> BlockSystem {
    let n = g.degree();
    let mut uf = UnionFind::new(n);
    let mut queue = VecDeque::new();
    if let Some(pair) = uf.union(a, b) {
        queue.push_back(pair);
    }
    while let Some((x, y)) = queue.pop_front() {
        for s in g.generators() {
            let (sx, sy) = (s.apply(x), s.apply(y));
            if let Some(pair) = uf.union(sx, sy) {
                queue.push_back(pair);
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|p| uf.find(p)).collect();
    BlockSystem::from_labels(&labels)
}

/// `None` when primitive, otherwise a block system with the smallest possible
/// blocks containing point 0.
pub fn primitivity(g: &PermGroup) -> Result<Option<BlockSystem>> {
    if !g.is_transitive() {
        return Err(Error::NotTransitive);
    }
    if g.degree() <= 2 {
        return Ok(None);
    }
    // one representative per suborbit suffices
    let report = g.suborbits(0)?;
    let mut best: Option<BlockSystem> = None;
    for sub in &report.suborbits {
        let beta = sub.points[0];
        if beta == 0 {
            continue;
        }
        let sys = minimal_block_system(g, 0, beta);
        if sys.block_count > 1 && best.as_ref().is_none_or(|b| sys.block_size < b.block_size) {
            best = Some(sys);
        }
    }
    Ok(best)
}

pub fn is_primitive(g: &PermGroup) -> Result<bool> {
    Ok(primitivity(g)?.is_none())
}

/// Higman's criterion: every orbital graph is connected. Built directly from
/// pair orbits under the generators, independent of the block machinery.
pub fn higman_primitivity(g: &PermGroup) -> Result<bool> {
    if !g.is_transitive() {
        return Err(Error::NotTransitive);
    }
    let n = g.degree();
    let mut covered = vec![false; n];
    covered[0] = true;
    for beta in 1..n {
        if covered[beta] {
            continue;
        }
        let arcs = pair_orbit(g, (0, beta));
        let mut adj = vec![Vec::new(); n];
        for &(x, y) in &arcs {
            if x == 0 {
                covered[y] = true;
            }
            adj[x].push(y);
            adj[y].push(x);
        }
        if !connected(&adj) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn pair_orbit(g: &PermGroup, start: (usize, usize)) -> Vec<(usize, usize)> {
    let n = g.degree();
    let mut seen = vec![false; n * n];
    seen[start.0 * n + start.1] = true;
    let mut out = vec![start];
    let mut idx = 0;
    while idx < out.len() {
        let (x, y) = out[idx];
        for s in g.generators() {
            let (u, v) = (s.apply(x), s.apply(y));
            if !seen[u * n + v] {
                seen[u * n + v] = true;
                out.push((u, v));
            }
        }
        idx += 1;
    }
    out.sort_unstable();
    out
}

fn connected(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    seen[0] = true;
    let mut stack = vec![0];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == adj.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::perm::Permutation;

    // Exhaustive oracle: every set partition via restricted growth strings.
    fn nontrivial_invariant_partitions(g: &PermGroup) -> Vec<BlockSystem> {
        let n = g.degree();
        let mut out = Vec::new();
        let mut labels = vec![0usize; n];
        fn rec(i: usize, max: usize, labels: &mut Vec<usize>, g: &PermGroup, out: &mut Vec<BlockSystem>) {
            if i == labels.len() {
                let sys = BlockSystem::from_labels(labels);
                if !sys.is_trivial() && sys.is_invariant_under(g) {
                    out.push(sys);
                }
                return;
            }
            for l in 0..=max + 1 {
                labels[i] = l;
                rec(i + 1, max.max(l), labels, g, out);
            }
        }
        if n >= 2 {
            rec(1, 0, &mut labels, g, &mut out);
        }
        out
    }

    #[test]
    fn examples() {
        assert!(is_primitive(&catalog::symmetric(3)).unwrap());
        let c4 = primitivity(&catalog::cyclic(4)).unwrap().unwrap();
        assert_eq!(c4.blocks, vec![vec![0, 2], vec![1, 3]]);
        assert!(!higman_primitivity(&catalog::cyclic(4)).unwrap());
        assert!(!higman_primitivity(&catalog::dihedral(4)).unwrap());
        assert!(higman_primitivity(&catalog::symmetric(3)).unwrap());
        let intrans = PermGroup::from_generators(vec![Permutation::from_cycles(3, &[vec![0, 1]]).unwrap()]).unwrap();
        assert_eq!(is_primitive(&intrans), Err(Error::NotTransitive));
    }

    #[test]
    fn agrees_with_exhaustive_partition_scan() {
        for (name, g) in catalog::transitive_catalog(8) {
            let oracle = nontrivial_invariant_partitions(&g);
            let found = primitivity(&g).unwrap();
            assert_eq!(found.is_none(), oracle.is_empty(), "{name}");
            if let Some(sys) = found {
                assert!(sys.is_invariant_under(&g));
                let min = oracle.iter().filter(|s| s.blocks[0].contains(&0)).map(|s| s.block_size).min().unwrap();
                assert_eq!(sys.block_size, min, "{name}");
                assert!(oracle.contains(&sys), "{name}");
            }
        }
    }

    #[test]
    fn higman_agrees_with_blocks() {
        for (name, g) in catalog::transitive_catalog(8) {
            assert_eq!(is_primitive(&g).unwrap(), higman_primitivity(&g).unwrap(), "{name}");
        }
    }
}
