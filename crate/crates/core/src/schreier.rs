//! Deterministic Schreier–Sims stabilizer chains with Schreier-vector transversals.

use std::collections::HashSet;

use rand::Rng;

use crate::perm::Permutation;

const NONE: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;

#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub base: usize,
    pub gens: Vec<Permutation>,
    inv_gens: Vec<Permutation>,
    pub orbit: Vec<usize>,
    label: Vec<u32>,
    prev: Vec<usize>,
    checked: HashSet<(usize, usize)>,
}

impl Level {
    fn new(degree: usize, base: usize) -> Self {
        let mut label = vec![NONE; degree];
        label[base] = ROOT;
        Level {
            base,
            gens: Vec::new(),
            inv_gens: Vec::new(),
            orbit: vec![base],
            label,
            prev: vec![usize::MAX; degree],
            checked: HashSet::new(),
        }
    }

    fn add_generator(&mut self, g: Permutation) {
        let gi = self.gens.len() as u32;
        self.inv_gens.push(g.inverse());
        self.gens.push(g);
        let existing = self.orbit.len();
        for idx in 0..existing {
            let p = self.orbit[idx];
            let q = self.gens[gi as usize].apply(p);
            if self.label[q] == NONE {
                self.label[q] = gi;
                self.prev[q] = p;
                self.orbit.push(q);
            }
        }
        let mut idx = existing;
        while idx < self.orbit.len() {
            let p = self.orbit[idx];
            for (k, s) in self.gens.iter().enumerate() {
                let q = s.apply(p);
                if self.label[q] == NONE {
                    self.label[q] = k as u32;
                    self.prev[q] = p;
                    self.orbit.push(q);
                }
            }
            idx += 1;
        }
    }

    #[inline]
    pub fn in_orbit(&self, p: usize) -> bool {
        self.label[p] != NONE
    }

    /// `h * u_p^-1` where `u_p` is the transversal element mapping the base to `p`.
    fn divide_by_rep(&self, h: &Permutation, mut p: usize) -> Permutation {
        let mut images = h.images().to_vec();
        while self.label[p] != ROOT {
            let gi = self.label[p] as usize;
            let inv = &self.inv_gens[gi];
            for x in images.iter_mut() {
                *x = inv.apply(*x);
            }
            p = self.prev[p];
        }
        Permutation::from_images_unchecked(images)
    }

    /// Transversal element mapping the base point to `p`.
    pub fn rep(&self, p: usize) -> Permutation {
        let degree = self.label.len();
        let mut word = Vec::new();
        let mut q = p;
        while self.label[q] != ROOT {
            word.push(self.label[q] as usize);
            q = self.prev[q];
        }
        let mut images: Vec<usize> = (0..degree).collect();
        for &gi in word.iter().rev() {
            let g = &self.gens[gi];
            for x in images.iter_mut() {
                *x = g.apply(*x);
            }
        }
        Permutation::from_images_unchecked(images)
    }
}

/// A base and strong generating set with one transversal per level.
#[derive(Clone, Debug)]
pub(crate) struct StabChain {
    pub degree: usize,
    pub levels: Vec<Level>,
}

impl StabChain {
    pub fn new(degree: usize, gens: &[Permutation], base_prefix: &[usize]) -> Self {
        let gens: Vec<Permutation> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut base: Vec<usize> = Vec::new();
        for &b in base_prefix {
            if !base.contains(&b) {
                base.push(b);
            }
        }
        for g in &gens {
            if base.iter().all(|&b| g.fixes(b)) {
                base.push(g.first_moved_point().expect("nonidentity"));
            }
        }
        let mut levels: Vec<Level> = base.iter().map(|&b| Level::new(degree, b)).collect();
        for (l, level) in levels.iter_mut().enumerate() {
            for g in &gens {
                if base[..l].iter().all(|&b| g.fixes(b)) {
                    level.add_generator(g.clone());
                }
            }
        }
        let mut chain = StabChain { degree, levels };
        chain.complete();
        chain.trim();
        chain
    }

    fn complete(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        'outer: while i >= 0 {
            let li = i as usize;
            let mut b_idx = 0;
            while b_idx < self.levels[li].orbit.len() {
                let beta = self.levels[li].orbit[b_idx];
                let mut s_idx = 0;
                while s_idx < self.levels[li].gens.len() {
                    if !self.levels[li].checked.insert((beta, s_idx)) {
                        s_idx += 1;
                        continue;
                    }
                    let level = &self.levels[li];
                    let s = &level.gens[s_idx];
                    let u_beta = level.rep(beta);
                    let image = s.apply(beta);
                    let h = level.divide_by_rep(&u_beta.then(s), image);
                    let (residue, j) = self.strip(h, li + 1);
                    if j < self.levels.len() || !residue.is_identity() {
                        if j == self.levels.len() {
                            let b = residue.first_moved_point().expect("nonidentity residue");
                            self.levels.push(Level::new(self.degree, b));
                        }
                        for l in li + 1..=j {
                            self.levels[l].add_generator(residue.clone());
                        }
                        i = j as isize;
                        continue 'outer;
                    }
                    s_idx += 1;
                }
                b_idx += 1;
            }
            i -= 1;
        }
    }

    /// Drop trailing levels with trivial orbits (redundant base points from the prefix).
    fn trim(&mut self) {
        while let Some(last) = self.levels.last() {
            if last.orbit.len() == 1 && last.gens.is_empty() {
                self.levels.pop();
            } else {
                break;
            }
        }
    }

    /// Sift `h` starting from level `from`; returns the residue and the level where
    /// sifting stopped (`levels.len()` if it passed every level).
    pub fn strip(&self, mut h: Permutation, from: usize) -> (Permutation, usize) {
        for l in from..self.levels.len() {
            let level = &self.levels[l];
            let beta = h.apply(level.base);
            if !level.in_orbit(beta) {
                return (h, l);
            }
            h = level.divide_by_rep(&h, beta);
        }
        (h, self.levels.len())
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        if g.degree() != self.degree {
            return false;
        }
        let (residue, j) = self.strip(g.clone(), 0);
        j == self.levels.len() && residue.is_identity()
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    /// Generators of the stabilizer of the first `l` base points.
    pub fn stabilizer_gens(&self, l: usize) -> Vec<Permutation> {
        match self.levels.get(l) {
            Some(level) => level.gens.clone(),
            None => Vec::new(),
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let mut g = Permutation::identity(self.degree);
        for level in self.levels.iter().rev() {
            let p = level.orbit[rng.gen_range(0..level.orbit.len())];
            g = g.then(&level.rep(p));
        }
        g
    }

    /// Every element, as `u_{k-1} ... u_1 u_0`. Caller enforces size limits.
    pub fn elements(&self) -> Vec<Permutation> {
        let mut out = vec![Permutation::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let reps: Vec<Permutation> = level.orbit.iter().map(|&p| level.rep(p)).collect();
            let mut next = Vec::with_capacity(out.len() * reps.len());
            for g in &out {
                for u in &reps {
                    next.push(g.then(u));
                }
            }
            out = next;
        }
        out
    }
}
