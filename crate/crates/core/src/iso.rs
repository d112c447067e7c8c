//! Permutation isomorphism by backtracking over point bijections.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::PermGroup;
use crate::perm::Permutation;

pub const DEFAULT_ISO_DEGREE_CAP: usize = 16;

/// A point bijection `theta` with `theta(a^g) = theta(a)^{phi(g)}`, where
/// `phi(g) = theta^-1 g theta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermIsomorphism {
    pub theta: Permutation,
}

impl PermIsomorphism {
    pub fn phi(&self, g: &Permutation) -> Permutation {
        g.conjugate_by(&self.theta)
    }
}

/// Orbital id of every ordered pair, numbered in order of first appearance.
fn orbital_matrix(g: &PermGroup) -> (Vec<usize>, Vec<usize>) {
    let n = g.degree();
    let mut id = vec![usize::MAX; n * n];
    let mut sizes = Vec::new();
    for start in 0..n * n {
        if id[start] != usize::MAX {
            continue;
        }
        let k = sizes.len();
        id[start] = k;
        let mut stack = vec![start];
        let mut size = 1;
        while let Some(c) = stack.pop() {
            let (x, y) = (c / n, c % n);
            for s in g.generators() {
                let d = s.apply(x) * n + s.apply(y);
                if id[d] == usize::MAX {
                    id[d] = k;
                    size += 1;
                    stack.push(d);
                }
            }
        }
        sizes.push(size);
    }
    (id, sizes)
}

pub fn permutation_isomorphism(g: &PermGroup, h: &PermGroup) -> Result<Option<PermIsomorphism>> {
    permutation_isomorphism_with_cap(g, h, DEFAULT_ISO_DEGREE_CAP)
}

pub fn permutation_isomorphism_with_cap(
    g: &PermGroup,
    h: &PermGroup,
    cap: usize,
) -> Result<Option<PermIsomorphism>> {
    let n = g.degree();
    if n.max(h.degree()) > cap {
        return Err(Error::cap("degree for permutation isomorphism", cap as u128, n.max(h.degree()) as u128));
    }
    if n != h.degree() || g.order() != h.order() {
        return Ok(None);
    }
    let (og, sg) = orbital_matrix(g);
    let (oh, sh) = orbital_matrix(h);
    if sg.len() != sh.len() {
        return Ok(None);
    }
    let k = sg.len();
    let mut search = Search {
        n,
        g,
        h,
        og,
        oh,
        sg,
        sh,
        theta: vec![usize::MAX; n],
        used: vec![false; n],
        fwd: vec![usize::MAX; k],
        back: vec![usize::MAX; k],
    };
    Ok(search.run(0))
}

struct Search<'a> {
    n: usize,
    g: &'a PermGroup,
    h: &'a PermGroup,
    og: Vec<usize>,
    oh: Vec<usize>,
    sg: Vec<usize>,
    sh: Vec<usize>,
    theta: Vec<usize>,
    used: Vec<bool>,
    fwd: Vec<usize>,
    back: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, i: usize) -> Option<PermIsomorphism> {
        let n = self.n;
        if i == n {
            let theta = Permutation::from_images(self.theta.clone()).ok()?;
            let ok = self.g.generators().iter().all(|s| self.h.contains(&s.conjugate_by(&theta)));
            return ok.then_some(PermIsomorphism { theta });
        }
        for t in 0..n {
            if self.used[t] {
                continue;
            }
            self.theta[i] = t;
            let mut added = Vec::new();
            let mut consistent = true;
            for j in 0..=i {
                for (a, b) in [(i, j), (j, i)] {
                    let cg = self.og[a * n + b];
                    let ch = self.oh[self.theta[a] * n + self.theta[b]];
                    if self.fwd[cg] == usize::MAX && self.back[ch] == usize::MAX {
                        if self.sg[cg] != self.sh[ch] {
                            consistent = false;
                            break;
                        }
                        self.fwd[cg] = ch;
                        self.back[ch] = cg;
                        added.push(cg);
                    } else if self.fwd[cg] != ch || self.back[ch] != cg {
                        consistent = false;
                        break;
                    }
                }
                if !consistent {
                    break;
                }
            }
            if consistent {
                self.used[t] = true;
                if let Some(found) = self.run(i + 1) {
                    return Some(found);
                }
                self.used[t] = false;
            }
            for cg in added {
                self.back[self.fwd[cg]] = usize::MAX;
                self.fwd[cg] = usize::MAX;
            }
        }
        self.theta[i] = usize::MAX;
        None
    }
}
