//! Finite permutation groups given by generators.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::schreier::StabChain;

/// Hard limit for explicit element enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// A permutation group on `{0, .., degree-1}` with a stabilizer chain on the
/// natural base order. Immutable after construction.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    chain: StabChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    Regular,
    SemiregularIntransitive,
    Nonregular,
}

/// One orbit of a point stabilizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suborbit {
    pub points: Vec<usize>,
    pub size: usize,
    /// Index (into the report's suborbit list) of the paired suborbit.
    pub paired: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuborbitReport {
    pub base_point: usize,
    /// Sorted by least point, so the trivial suborbit `{base_point}` is not
    /// necessarily first.
    pub suborbits: Vec<Suborbit>,
    /// Minimal nontrivial subdegree; absent for regular groups.
    pub sd: Option<usize>,
}

impl SuborbitReport {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.suborbits.iter().map(|s| s.size).collect();
        s.sort_unstable();
        s
    }

    pub fn sd(&self) -> Result<usize> {
        self.sd.ok_or(Error::RegularGroup)
    }
}

impl PermGroup {
    pub fn from_generators(gens: Vec<Permutation>) -> Result<Self> {
        let degree = gens.first().ok_or(Error::EmptyGenerators)?.degree();
        Self::with_degree(degree, gens)
    }

    /// Like [`PermGroup::from_generators`] but accepts an empty list (the trivial group).
    pub fn with_degree(degree: usize, gens: Vec<Permutation>) -> Result<Self> {
        if let Some(g) = gens.iter().find(|g| g.degree() != degree) {
            return Err(Error::DegreeMismatch {
                expected: degree,
                found: g.degree(),
            });
        }
        let chain = StabChain::new(degree, &gens, &[]);
        Ok(PermGroup {
            degree,
            generators: gens,
            chain,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        Self::with_degree(degree, Vec::new()).expect("no generators")
    }

    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            gens.push(Permutation::from_cycles(degree, &[vec![0, 1]]).unwrap());
        }
        if degree >= 3 {
            gens.push(Permutation::from_cycles(degree, &[(0..degree).collect()]).unwrap());
        }
        Self::with_degree(degree, gens).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn order(&self) -> u128 {
        self.chain.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        self.chain.contains(g)
    }

    pub fn base(&self) -> Vec<usize> {
        self.chain.base()
    }

    /// `true` when every generator of `other` lies in `self`.
    pub fn contains_group(&self, other: &PermGroup) -> bool {
        other.degree == self.degree && other.generators.iter().all(|g| self.contains(g))
    }

    pub fn same_group(&self, other: &PermGroup) -> bool {
        self.order() == other.order() && self.contains_group(other)
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        self.chain.random_element(rng)
    }

    pub fn elements(&self, cap: u128) -> Result<Vec<Permutation>> {
        if self.order() > cap {
            return Err(Error::cap("group order for enumeration", cap, self.order()));
        }
        Ok(self.chain.elements())
    }

    fn check_point(&self, point: usize) -> Result<()> {
        if point >= self.degree {
            return Err(Error::PointOutOfRange {
                point,
                degree: self.degree,
            });
        }
        Ok(())
    }

    /// Orbit of `point`, sorted ascending.
    pub fn orbit(&self, point: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        let mut out = vec![point];
        seen[point] = true;
        let mut idx = 0;
        while idx < out.len() {
            let p = out[idx];
            for g in &self.generators {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    out.push(q);
                }
            }
            idx += 1;
        }
        out.sort_unstable();
        out
    }

    /// All orbits, each sorted, ordered by least element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(self.degree, &self.generators)
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbit(0).len() == self.degree
    }

    /// Element mapping `from` to `to`, if one exists.
    pub fn transporter(&self, from: usize, to: usize) -> Option<Permutation> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.degree];
        let mut seen = vec![false; self.degree];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            if p == to {
                break;
            }
            for (k, g) in self.generators.iter().enumerate() {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    parent[q] = Some((p, k));
                    queue.push_back(q);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut word = Vec::new();
        let mut p = to;
        while let Some((q, k)) = parent[p] {
            word.push(k);
            p = q;
        }
        let mut g = Permutation::identity(self.degree);
        for &k in word.iter().rev() {
            g = g.then(&self.generators[k]);
        }
        Some(g)
    }

    /// Chain with the given points first in the base.
    pub(crate) fn chain_with_base(&self, prefix: &[usize]) -> StabChain {
        StabChain::new(self.degree, &self.generators, prefix)
    }

    /// Pointwise stabilizer of `points` (in order).
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> Result<PermGroup> {
        for &p in points {
            self.check_point(p)?;
        }
        let chain = self.chain_with_base(points);
        // Levels for repeated or fixed prefix points may be trimmed away; find the
        // first level whose base is outside `points`.
        let base = chain.base();
        let mut l = 0;
        while l < base.len() && points.contains(&base[l]) {
            l += 1;
        }
        let gens = chain.stabilizer_gens(l);
        let gens = dedup(gens);
        PermGroup::with_degree(self.degree, gens)
    }

    pub fn point_stabilizer(&self, point: usize) -> Result<PermGroup> {
        self.pointwise_stabilizer(&[point])
    }

    pub fn regularity(&self) -> Regularity {
        let order = self.order();
        let semiregular = self.orbits().iter().all(|o| o.len() as u128 == order);
        match (semiregular, self.is_transitive()) {
            (true, true) => Regularity::Regular,
            (true, false) => Regularity::SemiregularIntransitive,
            _ => Regularity::Nonregular,
        }
    }

    pub fn is_semiregular(&self) -> bool {
        self.regularity() != Regularity::Nonregular
    }

    /// Suborbits of a transitive group at `base_point`, with their pairing.
    pub fn suborbits(&self, base_point: usize) -> Result<SuborbitReport> {
        self.check_point(base_point)?;
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let chain = self.chain_with_base(&[base_point]);
        let stab_gens = if chain.base().first() == Some(&base_point) {
            chain.stabilizer_gens(1)
        } else {
            chain.stabilizer_gens(0)
        };
        let cells = orbits_of(self.degree, &stab_gens);
        let mut cell_of = vec![0usize; self.degree];
        for (k, c) in cells.iter().enumerate() {
            for &p in c {
                cell_of[p] = k;
            }
        }
        let suborbits = cells
            .iter()
            .map(|cell| {
                let beta = cell[0];
                // alpha^g = beta; the pair is (alpha^(g^-1))^{G_alpha}
                let g = self
                    .transporter(base_point, beta)
                    .expect("transitive group");
                let back = g.inverse().apply(base_point);
                Suborbit {
                    points: cell.clone(),
                    size: cell.len(),
                    paired: cell_of[back],
                }
            })
            .collect::<Vec<_>>();
        let sd = suborbits.iter().map(|s| s.size).filter(|&s| s > 1).min();
        Ok(SuborbitReport {
            base_point,
            suborbits,
            sd,
        })
    }

    /// Minimal nontrivial subdegree; an error for regular (or intransitive) groups.
    pub fn sd(&self) -> Result<usize> {
        self.suborbits(0)?.sd()
    }

    /// Group generated by the images of the generators under a point map to a new
    /// degree; `act` must define a homomorphism (an action on `new_degree` objects).
    pub fn induced_action<F>(&self, new_degree: usize, act: F) -> Result<PermGroup>
    where
        F: Fn(&Permutation) -> Result<Permutation>,
    {
        let gens = self
            .generators
            .iter()
            .map(act)
            .collect::<Result<Vec<_>>>()?;
        PermGroup::with_degree(new_degree, dedup(gens))
    }

    /// Group induced on an invariant subset, relabelled by position in `domain`.
    pub fn restrict_to(&self, domain: &[usize]) -> Result<PermGroup> {
        self.induced_action(domain.len(), |g| {
            g.restrict(domain)
                .ok_or_else(|| Error::invalid("domain is not invariant"))
        })
    }
}

pub(crate) fn dedup(gens: Vec<Permutation>) -> Vec<Permutation> {
    let mut out: Vec<Permutation> = Vec::with_capacity(gens.len());
    for g in gens {
        if !g.is_identity() && !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

pub(crate) fn orbits_of(degree: usize, gens: &[Permutation]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; degree];
    let mut out = Vec::new();
    for start in 0..degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start];
        let mut idx = 0;
        while idx < orbit.len() {
            let p = orbit[idx];
            for g in gens {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    orbit.push(q);
                }
            }
            idx += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::collections::HashSet;

    fn closure_size(g: &PermGroup) -> usize {
        // independent of the stabilizer chain: breadth-first multiplication
        let mut seen: HashSet<Permutation> = HashSet::new();
        let id = Permutation::identity(g.degree());
        seen.insert(id.clone());
        let mut queue = vec![id];
        while let Some(x) = queue.pop() {
            for s in g.generators() {
                let y = x.then(s);
                if seen.insert(y.clone()) {
                    queue.push(y);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn small_orders() {
        assert_eq!(catalog::symmetric(3).order(), 6);
        assert_eq!(catalog::cyclic(4).order(), 4);
        let d8 = catalog::dihedral(4);
        assert_eq!(d8.order(), 8);
        assert_eq!(closure_size(&d8), 8);
    }

    #[test]
    fn empty_and_mismatched_generators() {
        assert_eq!(PermGroup::from_generators(vec![]).unwrap_err(), Error::EmptyGenerators);
        let err = PermGroup::from_generators(vec![Permutation::identity(3), Permutation::identity(4)]);
        assert!(matches!(err, Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn orbits_examples() {
        assert_eq!(PermGroup::trivial(3).orbits(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(catalog::symmetric(3).orbits(), vec![vec![0, 1, 2]]);
        let g = PermGroup::from_generators(vec![Permutation::from_cycles(4, &[vec![0, 1]]).unwrap()]).unwrap();
        assert_eq!(g.orbits(), vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn stabilizer_examples() {
        assert_eq!(catalog::symmetric(3).point_stabilizer(0).unwrap().order(), 2);
        assert_eq!(catalog::cyclic(4).point_stabilizer(0).unwrap().order(), 1);
        assert_eq!(catalog::dihedral(4).point_stabilizer(0).unwrap().order(), 2);
        assert!(matches!(
            catalog::symmetric(3).point_stabilizer(3),
            Err(Error::PointOutOfRange { .. })
        ));
    }

    #[test]
    fn suborbit_examples() {
        let s3 = catalog::symmetric(3).suborbits(0).unwrap();
        assert_eq!(s3.sizes(), vec![1, 2]);
        assert_eq!(s3.sd, Some(2));
        let d8 = catalog::dihedral(4).suborbits(0).unwrap();
        assert_eq!(d8.sizes(), vec![1, 1, 2]);
        assert_eq!(d8.sd, Some(2));
        let c5 = catalog::cyclic(5).suborbits(0).unwrap();
        assert_eq!(c5.sizes(), vec![1; 5]);
        assert_eq!(c5.sd(), Err(Error::RegularGroup));
        let intrans = PermGroup::from_generators(vec![Permutation::from_cycles(3, &[vec![0, 1]]).unwrap()]).unwrap();
        assert_eq!(intrans.suborbits(0).unwrap_err(), Error::NotTransitive);
    }

    #[test]
    fn pairing_is_an_involution_with_equal_sizes() {
        for (name, g) in catalog::transitive_catalog(8) {
            let rep = g.suborbits(0).unwrap();
            for (i, s) in rep.suborbits.iter().enumerate() {
                assert_eq!(rep.suborbits[s.paired].paired, i, "{name}");
                assert_eq!(rep.suborbits[s.paired].size, s.size, "{name}");
            }
            assert_eq!(rep.suborbits.iter().map(|s| s.size).sum::<usize>(), g.degree());
        }
    }

    #[test]
    fn regularity_examples() {
        assert_eq!(catalog::cyclic(4).regularity(), Regularity::Regular);
        assert_eq!(catalog::symmetric(3).regularity(), Regularity::Nonregular);
        let g = PermGroup::from_generators(vec![Permutation::from_cycles(4, &[vec![0, 1], vec![2, 3]]).unwrap()]).unwrap();
        assert_eq!(g.regularity(), Regularity::SemiregularIntransitive);
    }

    #[test]
    fn orbit_stabilizer_and_exhaustive_order() {
        for (name, g) in catalog::transitive_catalog(8) {
            for p in 0..g.degree() {
                let stab = g.point_stabilizer(p).unwrap();
                assert_eq!(g.order(), g.orbit(p).len() as u128 * stab.order(), "{name} at {p}");
            }
            if g.order() <= 50_000 {
                assert_eq!(g.order(), closure_size(&g) as u128, "{name}");
            }
        }
    }
}
