//! Permutations of `{0, .., n-1}` acting on the right.
//!
//! The image of a point `a` under `g` is written `a^g`, and the product `g * h`
//! means "first `g`, then `h`", so `a^(g*h) = (a^g)^h`.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    /// Builds a permutation from its image list, rejecting non-bijections.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::NotAPermutation(format!("{images:?}")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Permutation::from_images(images.clone()).is_ok());
        Permutation { images }
    }

    /// Builds a permutation from disjoint cycles. Points not mentioned are fixed.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for &p in cycle {
                if p >= degree {
                    return Err(Error::PointOutOfRange { point: p, degree });
                }
                if touched[p] {
                    return Err(Error::NotAPermutation(format!(
                        "point {p} appears twice in cycles {cycles:?}"
                    )));
                }
                touched[p] = true;
            }
            for (k, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: self.images.iter().map(|&i| other.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// `other^-1 * self * other`, the conjugate `self^other`.
    pub fn conjugate_by(&self, other: &Permutation) -> Permutation {
        other.inverse().then(self).then(other)
    }

    pub fn first_moved_point(&self) -> Option<usize> {
        self.images.iter().enumerate().position(|(i, &j)| i != j)
    }

    pub fn fixes(&self, point: usize) -> bool {
        self.images[point] == point
    }

    pub fn order(&self) -> u128 {
        fn gcd(a: u128, b: u128) -> u128 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles()
            .iter()
            .map(|c| c.len() as u128)
            .fold(1, |acc, l| acc / gcd(acc, l) * l)
    }

    /// Nontrivial cycles, each starting at its least point, in ascending order.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut p = self.images[start];
            while p != start {
                seen[p] = true;
                cycle.push(p);
                p = self.images[p];
            }
            out.push(cycle);
        }
        out
    }

    /// Restriction to an invariant subset, relabelled by position in `domain`.
    ///
    /// Returns `None` if `domain` is not invariant.
    pub fn restrict(&self, domain: &[usize]) -> Option<Permutation> {
        let mut pos = std::collections::HashMap::with_capacity(domain.len());
        for (k, &p) in domain.iter().enumerate() {
            pos.insert(p, k);
        }
        let images = domain
            .iter()
            .map(|&p| pos.get(&self.images[p]).copied())
            .collect::<Option<Vec<_>>>()?;
        Permutation::from_images(images).ok()
    }
}

impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        self.then(rhs)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "(")?;
            for (k, p) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_action_composition() {
        let g = Permutation::from_cycles(3, &[vec![0, 1]]).unwrap();
        let h = Permutation::from_cycles(3, &[vec![1, 2]]).unwrap();
        // 0 -> 1 under g, then 1 -> 2 under h
        assert_eq!((&g * &h).apply(0), 2);
        assert_eq!(g.then(&h).inverse().then(&g.then(&h)), Permutation::identity(3));
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_cycles(3, &[vec![0, 3]]).is_err());
        assert!(Permutation::from_cycles(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn order_and_display() {
        let g = Permutation::from_cycles(5, &[vec![0, 1], vec![2, 3, 4]]).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.to_string(), "(0,1)(2,3,4)");
        assert_eq!(Permutation::identity(2).to_string(), "()");
    }

    #[test]
    fn restriction() {
        let g = Permutation::from_cycles(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(g.restrict(&[2, 3]).unwrap().images(), &[1, 0]);
        assert!(g.restrict(&[0, 2]).is_none());
    }
}
