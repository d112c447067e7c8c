//! Wreath products in both actions, cartesian decompositions, and the embedding
//! of a group with a product normal subgroup into a product-action wreath
//! product.
//!
//! Product-action points are encoded row-major with the last coordinate
//! varying fastest: `(a_0, .., a_{m-1}) <-> sum a_i k^(m-1-i)`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{dedup, PermGroup, DEFAULT_ENUMERATION_CAP};
use crate::perm::Permutation;

pub const DEFAULT_PWR_DEGREE_CAP: usize = 4096;
pub const DEFAULT_DECOMPOSITION_DEGREE_CAP: usize = 64;
const DECOMPOSITION_WORK_CAP: u128 = 2_000_000;

/// `(g_1, .., g_m; h)` with `g_i` acting on `X` and `h` on `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WreathElement {
    pub base: Vec<Permutation>,
    pub top: Permutation,
}

impl WreathElement {
    pub fn new(base: Vec<Permutation>, top: Permutation) -> Result<Self> {
        if base.len() != top.degree() {
            return Err(Error::DegreeMismatch {
                expected: top.degree(),
                found: base.len(),
            });
        }
        if let Some(first) = base.first() {
            if let Some(bad) = base.iter().find(|g| g.degree() != first.degree()) {
                return Err(Error::DegreeMismatch {
                    expected: first.degree(),
                    found: bad.degree(),
                });
            }
        }
        Ok(WreathElement { base, top })
    }

    fn x_degree(&self) -> usize {
        self.base.first().map_or(0, |g| g.degree())
    }

    /// `(a, i) -> (a^{g_i}, i^h)` on points `i * |X| + a`.
    pub fn imprimitive_permutation(&self) -> Permutation {
        let k = self.x_degree();
        let m = self.base.len();
        let images = (0..k * m)
            .map(|p| {
                let (i, a) = (p / k, p % k);
                self.top.apply(i) * k + self.base[i].apply(a)
            })
            .collect();
        Permutation::from_images_unchecked(images)
    }

    /// Coordinate `j` of the image is `a_{j'}^{g_{j'}}` with `j' = j^{h^-1}`.
    pub fn product_permutation(&self) -> Permutation {
        let k = self.x_degree();
        let m = self.base.len();
        let n = k.pow(m as u32);
        let hinv = self.top.inverse();
        let images = (0..n)
            .map(|p| {
                let a = decode(p, k, m);
                let b: Vec<usize> = (0..m)
                    .map(|j| {
                        let src = hinv.apply(j);
                        self.base[src].apply(a[src])
                    })
                    .collect();
                encode(&b, k)
            })
            .collect();
        Permutation::from_images_unchecked(images)
    }
}

pub fn encode(coords: &[usize], k: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * k + c)
}

pub fn decode(mut p: usize, k: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for j in (0..m).rev() {
        out[j] = p % k;
        p /= k;
    }
    out
}

fn generating_elements(g: &PermGroup, h: &PermGroup) -> Vec<WreathElement> {
    let k = g.degree();
    let m = h.degree();
    let mut out = Vec::new();
    for i in 0..m {
        for s in g.generators() {
            let mut base = vec![Permutation::identity(k); m];
            base[i] = s.clone();
            out.push(WreathElement {
                base,
                top: Permutation::identity(m),
            });
        }
    }
    for t in h.generators() {
        out.push(WreathElement {
            base: vec![Permutation::identity(k); m],
            top: t.clone(),
        });
    }
    out
}

fn check_nonzero(g: &PermGroup, h: &PermGroup) -> Result<()> {
    if g.degree() == 0 || h.degree() == 0 {
        return Err(Error::invalid("wreath products need inputs of positive degree"));
    }
    Ok(())
}

/// `G wr H` on `X x {0, .., m-1}`, point `(a, i)` numbered `i * |X| + a`.
pub fn wreath_imprimitive(g: &PermGroup, h: &PermGroup) -> Result<PermGroup> {
    check_nonzero(g, h)?;
    let gens = generating_elements(g, h).iter().map(|w| w.imprimitive_permutation()).collect();
    PermGroup::with_degree(g.degree() * h.degree(), dedup(gens))
}

/// `G Wr H` on `X^m` in the product action.
pub fn wreath_product_action(g: &PermGroup, h: &PermGroup, degree_cap: usize) -> Result<PermGroup> {
    check_nonzero(g, h)?;
    let n = pwr_degree(g.degree(), h.degree())
        .filter(|&n| n <= degree_cap)
        .ok_or_else(|| {
            let actual = (g.degree() as u128).checked_pow(h.degree() as u32).unwrap_or(u128::MAX);
            Error::cap("product-action degree", degree_cap as u128, actual)
        })?;
    let gens = generating_elements(g, h).iter().map(|w| w.product_permutation()).collect();
    PermGroup::with_degree(n, dedup(gens))
}

pub fn pwr_degree(k: usize, m: usize) -> Option<usize> {
    k.checked_pow(m as u32)
}

/// Structural criterion for primitivity of `G Wr H`: `G` primitive and not
/// regular, `H` transitive.
pub fn wr_primitivity_predicate(g: &PermGroup, h: &PermGroup) -> bool {
    let g_ok = g.is_transitive()
        && g.degree() >= 2
        && crate::blocks::is_primitive(g).unwrap_or(false)
        && g.regularity() != crate::group::Regularity::Regular;
    g_ok && h.is_transitive()
}

/// `m` partitions of `Omega` into `k` blocks of size `k^(m-1)` such that every
/// choice of one block per partition meets in exactly one point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CartesianDecomposition {
    pub partitions: Vec<Vec<Vec<usize>>>,
}

impl CartesianDecomposition {
    /// Sorts blocks within partitions and partitions within the decomposition.
    pub fn canonical(mut partitions: Vec<Vec<Vec<usize>>>) -> Self {
        for p in partitions.iter_mut() {
            for b in p.iter_mut() {
                b.sort_unstable();
            }
            p.sort();
        }
        partitions.sort();
        CartesianDecomposition { partitions }
    }

    pub fn m(&self) -> usize {
        self.partitions.len()
    }

    pub fn k(&self) -> usize {
        self.partitions.first().map_or(0, |p| p.len())
    }

    /// Checks the shape and the intersection axiom for a set of size `n`.
    pub fn satisfies_axiom(&self, n: usize) -> bool {
        let m = self.m();
        let k = self.k();
        if m < 2 || k < 2 || pwr_degree(k, m) != Some(n) {
            return false;
        }
        let mut coords = vec![vec![usize::MAX; m]; n];
        for (i, p) in self.partitions.iter().enumerate() {
            if p.len() != k || p.iter().any(|b| b.len() != n / k) {
                return false;
            }
            for (c, b) in p.iter().enumerate() {
                for &x in b {
                    if x >= n || coords[x][i] != usize::MAX {
                        return false;
                    }
                    coords[x][i] = c;
                }
            }
        }
        let distinct: BTreeSet<&Vec<usize>> = coords.iter().collect();
        distinct.len() == n && coords.iter().all(|c| c.iter().all(|&v| v != usize::MAX))
    }

    /// `true` when every generator maps each partition onto some partition.
    pub fn is_invariant_under(&self, g: &PermGroup) -> bool {
        let set: BTreeSet<&Vec<Vec<usize>>> = self.partitions.iter().collect();
        g.generators().iter().all(|s| {
            self.partitions.iter().all(|p| {
                let mut image: Vec<Vec<usize>> = p
                    .iter()
                    .map(|b| {
                        let mut v: Vec<usize> = b.iter().map(|&x| s.apply(x)).collect();
                        v.sort_unstable();
                        v
                    })
                    .collect();
                image.sort();
                set.contains(&image)
            })
        })
    }

    /// Coordinate decomposition of `k^m` points in the row-major encoding.
    pub fn coordinate(k: usize, m: usize) -> Self {
        let n = k.pow(m as u32);
        let partitions = (0..m)
            .map(|i| {
                let mut blocks = vec![Vec::new(); k];
                for p in 0..n {
                    blocks[decode(p, k, m)[i]].push(p);
                }
                blocks
            })
            .collect();
        Self::canonical(partitions)
    }
}

/// Every `G`-invariant nontrivial homogeneous cartesian decomposition,
/// canonically sorted. The coordinate decomposition, when present, comes first.
///
/// The Hamming graph of an invariant decomposition is a union of orbits of `G`
/// on unordered pairs, and it determines the decomposition. We enumerate unions
/// of the right valency, recognise Hamming graphs among them, and read off the
/// partitions.
pub fn find_cartesian_decompositions(g: &PermGroup, degree_cap: usize) -> Result<Vec<CartesianDecomposition>> {
    let n = g.degree();
    if n > degree_cap {
        return Err(Error::cap("degree for cartesian decomposition search", degree_cap as u128, n as u128));
    }
    let shapes: Vec<(usize, usize)> = (2..n)
        .flat_map(|k| (2..=n).map(move |m| (k, m)))
        .filter(|&(k, m)| pwr_degree(k, m) == Some(n))
        .collect();
    if shapes.is_empty() {
        return Ok(Vec::new());
    }
    let orbits = unordered_pair_orbits(g);
    let mut found: BTreeSet<CartesianDecomposition> = BTreeSet::new();
    let mut work = 0u128;
    for &(k, m) in &shapes {
        let valency = m * (k - 1);
        let mut chosen = Vec::new();
        let mut degree = vec![0usize; n];
        let mut candidates = Vec::new();
        select_orbits(&orbits, 0, valency, &mut chosen, &mut degree, &mut candidates, &mut work)?;
        let decomps = crate::par::map(&candidates, |sel: &Vec<usize>| {
            let mut adj = vec![Vec::new(); n];
            for &o in sel {
                for &(x, y) in &orbits[o] {
                    adj[x].push(y);
                    adj[y].push(x);
                }
            }
            recognise_hamming(&adj, k, m)
        });
        for d in decomps.into_iter().flatten() {
            if d.is_invariant_under(g) {
                found.insert(d);
            }
        }
    }
    let mut out: Vec<CartesianDecomposition> = found.into_iter().collect();
    if let Some(pos) = out.iter().position(|d| is_coordinate(d, n)) {
        let coord = out.remove(pos);
        out.insert(0, coord);
    }
    Ok(out)
}

fn is_coordinate(d: &CartesianDecomposition, n: usize) -> bool {
    let (k, m) = (d.k(), d.m());
    pwr_degree(k, m) == Some(n) && *d == CartesianDecomposition::coordinate(k, m)
}

fn unordered_pair_orbits(g: &PermGroup) -> Vec<Vec<(usize, usize)>> {
    let n = g.degree();
    let mut seen = vec![false; n * n];
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if seen[x * n + y] {
                continue;
            }
            seen[x * n + y] = true;
            let mut orbit = vec![(x, y)];
            let mut idx = 0;
            while idx < orbit.len() {
                let (a, b) = orbit[idx];
                for s in g.generators() {
                    let (u, v) = (s.apply(a), s.apply(b));
                    let (u, v) = if u < v { (u, v) } else { (v, u) };
                    if !seen[u * n + v] {
                        seen[u * n + v] = true;
                        orbit.push((u, v));
                    }
                }
                idx += 1;
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
    }
    out
}

fn select_orbits(
    orbits: &[Vec<(usize, usize)>],
    from: usize,
    valency: usize,
    chosen: &mut Vec<usize>,
    degree: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    work: &mut u128,
) -> Result<()> {
    *work += 1;
    if *work > DECOMPOSITION_WORK_CAP {
        return Err(Error::cap("cartesian decomposition search steps", DECOMPOSITION_WORK_CAP, *work));
    }
    if degree.iter().all(|&d| d == valency) {
        out.push(chosen.clone());
        return Ok(());
    }
    for o in from..orbits.len() {
        let fits = {
            for &(x, y) in &orbits[o] {
                degree[x] += 1;
                degree[y] += 1;
            }
            degree.iter().all(|&d| d <= valency)
        };
        if fits {
            chosen.push(o);
            select_orbits(orbits, o + 1, valency, chosen, degree, out, work)?;
            chosen.pop();
        }
        for &(x, y) in &orbits[o] {
            degree[x] -= 1;
            degree[y] -= 1;
        }
    }
    Ok(())
}

/// Recognises the Hamming graph `H(m, k)` and returns its decomposition.
fn recognise_hamming(adj: &[Vec<usize>], k: usize, m: usize) -> Option<CartesianDecomposition> {
    let n = adj.len();
    let mut is_adj = vec![false; n * n];
    for (x, nb) in adj.iter().enumerate() {
        for &y in nb {
            is_adj[x * n + y] = true;
        }
    }
    // neighbourhood of 0 must be m disjoint (k-1)-cliques
    let mut nb0 = adj[0].clone();
    nb0.sort_unstable();
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut placed = vec![false; n];
    for &x in &nb0 {
        if placed[x] {
            continue;
        }
        let clique: Vec<usize> = nb0.iter().copied().filter(|&y| y == x || is_adj[x * n + y]).collect();
        if clique.len() != k - 1 {
            return None;
        }
        for &y in &clique {
            placed[y] = true;
        }
        cliques.push(clique);
    }
    if cliques.len() != m {
        return None;
    }
    let mut coords: Vec<Option<Vec<usize>>> = vec![None; n];
    coords[0] = Some(vec![0; m]);
    for (i, c) in cliques.iter().enumerate() {
        for (v, &x) in c.iter().enumerate() {
            let mut co = vec![0; m];
            co[i] = v + 1;
            coords[x] = Some(co);
        }
    }
    // breadth-first layers; a vertex at distance >= 2 is the componentwise max
    // of its predecessors
    let mut dist = vec![usize::MAX; n];
    dist[0] = 0;
    let mut queue = VecDeque::from([0]);
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    if order.len() != n {
        return None;
    }
    for &v in &order {
        if dist[v] < 2 {
            continue;
        }
        let mut co = vec![0; m];
        for &w in &adj[v] {
            if dist[w] + 1 == dist[v] {
                let cw = coords[w].as_ref()?;
                for i in 0..m {
                    co[i] = co[i].max(cw[i]);
                }
            }
        }
        coords[v] = Some(co);
    }
    let coords: Vec<Vec<usize>> = coords.into_iter().collect::<Option<_>>()?;
    let distinct: BTreeSet<&Vec<usize>> = coords.iter().collect();
    if distinct.len() != n {
        return None;
    }
    for x in 0..n {
        for y in x + 1..n {
            let hd = (0..m).filter(|&i| coords[x][i] != coords[y][i]).count();
            if (hd == 1) != is_adj[x * n + y] {
                return None;
            }
        }
    }
    let partitions = (0..m)
        .map(|i| {
            let mut blocks = vec![Vec::new(); k];
            for (x, c) in coords.iter().enumerate() {
                blocks[c[i]].push(x);
            }
            blocks
        })
        .collect();
    Some(CartesianDecomposition::canonical(partitions))
}

/// Data for the product-action embedding: components `K_1, .., K_m` of a
/// transitive normal subgroup `M = K_1 x .. x K_m` of `G`, and a base point.
#[derive(Debug, Clone)]
pub struct PAEmbedding {
    pub group: PermGroup,
    pub components: Vec<PermGroup>,
    pub alpha: usize,
    pub m: usize,
    /// `Y`, the orbit of `alpha` under `K_1`, sorted; `gamma` is `alpha`.
    pub y: Vec<usize>,
    pub gamma: usize,
    /// `K_1` acting on `Y` (by position in `y`).
    pub k_on_y: PermGroup,
    /// `g_1 = 1, .., g_m` in `G_alpha` with `K_1^{g_i} = K_i`.
    pub transversal: Vec<Permutation>,
    /// `theta(omega)` as an index of `Y^m` in the row-major encoding.
    pub theta: Permutation,
    stabilizer: PermGroup,
    m_group: PermGroup,
    complements: Vec<PermGroup>,
    y_pos: HashMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PAEmbeddingCheck {
    pub theta_alpha_is_gamma_tuple: bool,
    pub relation_holds: bool,
    pub phi_hat_m_is_k_power: bool,
    pub action_of_phi_ga_holds: bool,
    pub action_of_phi_x_holds: bool,
    pub elements_checked: usize,
}

impl PAEmbeddingCheck {
    pub fn all(&self) -> bool {
        self.theta_alpha_is_gamma_tuple
            && self.relation_holds
            && self.phi_hat_m_is_k_power
            && self.action_of_phi_ga_holds
            && self.action_of_phi_x_holds
    }
}

/// `true` when `h` conjugates `a` onto `b` (as subgroups).
fn conjugates_onto(a: &PermGroup, h: &Permutation, b: &PermGroup) -> bool {
    a.order() == b.order() && a.generators().iter().all(|x| b.contains(&x.conjugate_by(h)))
}

pub fn pa_embedding(g: &PermGroup, components: Vec<PermGroup>, alpha: usize) -> Result<PAEmbedding> {
    let n = g.degree();
    let m = components.len();
    if m < 2 {
        return Err(Error::hypothesis("need at least two components"));
    }
    if alpha >= n {
        return Err(Error::PointOutOfRange { point: alpha, degree: n });
    }
    for k in &components {
        if k.degree() != n {
            return Err(Error::DegreeMismatch { expected: n, found: k.degree() });
        }
        if !g.contains_group(k) {
            return Err(Error::hypothesis("component is not a subgroup of G"));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let commute = components[i].generators().iter().all(|a| {
                components[j].generators().iter().all(|b| a.then(b) == b.then(a))
            });
            if !commute {
                return Err(Error::hypothesis(format!("components {i} and {j} do not commute")));
            }
        }
    }
    let m_gens: Vec<Permutation> = components.iter().flat_map(|k| k.generators().to_vec()).collect();
    let m_group = PermGroup::with_degree(n, dedup(m_gens))?;
    let product: u128 = components.iter().map(|k| k.order()).product();
    if m_group.order() != product {
        return Err(Error::hypothesis("M is not the direct product of its components"));
    }
    let normal = g
        .generators()
        .iter()
        .all(|s| m_group.generators().iter().all(|x| m_group.contains(&x.conjugate_by(s))));
    if !normal {
        return Err(Error::hypothesis("M is not normal in G"));
    }
    if !m_group.is_transitive() {
        return Err(Error::hypothesis("M is not transitive"));
    }
    let stabilizer = g.point_stabilizer(alpha)?;
    let component_image = |h: &Permutation, i: usize| -> Option<usize> {
        (0..m).find(|&j| conjugates_onto(&components[i], h, &components[j]))
    };
    // transversal by breadth-first search over generators of G_alpha
    let mut transversal: Vec<Option<Permutation>> = vec![None; m];
    transversal[0] = Some(Permutation::identity(n));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in stabilizer.generators() {
            let j = component_image(s, i)
                .ok_or_else(|| Error::hypothesis("G_alpha does not permute the components"))?;
            if transversal[j].is_none() {
                transversal[j] = Some(transversal[i].as_ref().unwrap().then(s));
                queue.push_back(j);
            }
        }
    }
    let transversal: Vec<Permutation> = transversal
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::hypothesis("G_alpha is not transitive on the components"))?;
    let m_alpha = m_group.point_stabilizer(alpha)?;
    let local: u128 = components
        .iter()
        .map(|k| k.point_stabilizer(alpha).map(|s| s.order()))
        .product::<Result<u128>>()?;
    if m_alpha.order() != local {
        return Err(Error::hypothesis("M_alpha is not the product of its projections"));
    }
    let k1 = &components[0];
    let y = k1.orbit(alpha);
    let k_on_y = k1.restrict_to(&y)?;
    if k_on_y.order() != k1.order() {
        return Err(Error::hypothesis("K_1 is not faithful on Y"));
    }
    let y_pos: HashMap<usize, usize> = y.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let complements = (0..m)
        .map(|i| {
            let gens: Vec<Permutation> = components
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, k)| k.generators().to_vec())
                .collect();
            PermGroup::with_degree(n, dedup(gens))
        })
        .collect::<Result<Vec<_>>>()?;
    let ky = y.len();
    if pwr_degree(ky, m) != Some(n) {
        return Err(Error::hypothesis("|Y|^m differs from the degree"));
    }
    let mut emb = PAEmbedding {
        group: g.clone(),
        components,
        alpha,
        m,
        gamma: alpha,
        k_on_y,
        transversal,
        theta: Permutation::identity(n),
        stabilizer,
        m_group,
        complements,
        y_pos,
        y,
    };
    let gamma_idx = emb.y_pos[&alpha];
    let mut theta = vec![usize::MAX; n];
    for (omega, slot) in theta.iter_mut().enumerate() {
        let x = emb.m_group.transporter(alpha, omega).expect("M transitive");
        let phi = emb.phi(&x)?;
        let coords: Vec<usize> = phi.iter().map(|p| p.apply(gamma_idx)).collect();
        *slot = encode(&coords, ky);
    }
    emb.theta = Permutation::from_images(theta).map_err(|_| Error::hypothesis("theta is not a bijection"))?;
    Ok(emb)
}

impl PAEmbedding {
    fn ky(&self) -> usize {
        self.y.len()
    }

    /// `pi_i(x)` for `x` in `M`.
    pub fn pi(&self, x: &Permutation, i: usize) -> Result<Permutation> {
        if !self.m_group.contains(x) {
            return Err(Error::invalid("element is not in M"));
        }
        let elements = self.components[i].elements(DEFAULT_ENUMERATION_CAP)?;
        elements
            .into_iter()
            .find(|k| self.complements[i].contains(&x.then(&k.inverse())))
            .ok_or_else(|| Error::Internal("projection not found".into()))
    }

    /// `phi(x) = (g_i pi_i(x) g_i^-1 |_Y)_i`, each acting on positions of `Y`.
    pub fn phi(&self, x: &Permutation) -> Result<Vec<Permutation>> {
        (0..self.m)
            .map(|i| {
                let p = self.pi(x, i)?;
                let gi = &self.transversal[i];
                let k = gi.then(&p).then(&gi.inverse());
                k.restrict(&self.y).ok_or_else(|| Error::Internal("conjugate left Y".into()))
            })
            .collect()
    }

    /// `sigma(g)` for `g` in `G_alpha`: `K_i^g = K_{i^sigma}`.
    pub fn sigma(&self, g: &Permutation) -> Result<Permutation> {
        let images = (0..self.m)
            .map(|i| {
                (0..self.m)
                    .find(|&j| conjugates_onto(&self.components[i], g, &self.components[j]))
                    .ok_or_else(|| Error::hypothesis("element does not permute the components"))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_images(images)
    }

    /// `psi(h)` for `h` normalising `K_1` and fixing `alpha`: since `Y` is an
    /// orbit of `K_1` through `gamma = alpha`, this is `h` restricted to `Y`.
    pub fn psi(&self, h: &Permutation) -> Result<Permutation> {
        h.restrict(&self.y).ok_or_else(|| Error::invalid("element does not preserve Y"))
    }

    /// `phi_hat(f) = theta^-1 f theta` on `Y^m`.
    pub fn phi_hat(&self, f: &Permutation) -> Permutation {
        f.conjugate_by(&self.theta)
    }

    pub fn theta_coords(&self, omega: usize) -> Vec<usize> {
        decode(self.theta.apply(omega), self.ky(), self.m)
    }

    /// Image of `delta` under `phi_hat(g)` for `g` in `G_alpha`, computed from
    /// `sigma(g)`, the transversal and `psi` alone.
    pub fn action_of_phi_ga(&self, g: &Permutation, delta: &[usize]) -> Result<Vec<usize>> {
        let sigma = self.sigma(g)?;
        let sinv = sigma.inverse();
        (0..self.m)
            .map(|i| {
                let src = sinv.apply(i);
                let h = self.transversal[src]
                    .then(g)
                    .then(&self.transversal[sigma.apply(src)].inverse());
                Ok(self.psi(&h)?.apply(delta[src]))
            })
            .collect()
    }

    /// Image of `delta` under `phi_hat(x)` for `x` in `M`.
    pub fn action_of_phi_x(&self, x: &Permutation, delta: &[usize]) -> Result<Vec<usize>> {
        let phi = self.phi(x)?;
        Ok(delta.iter().zip(&phi).map(|(&d, p)| p.apply(d)).collect())
    }

    /// The image `phi_hat(G)` acting on `Y^m`.
    pub fn image_group(&self) -> Result<PermGroup> {
        self.group.induced_action(self.group.degree(), |f| Ok(self.phi_hat(f)))
    }

    /// `K^m` in the product action on `Y^m`.
    pub fn k_power(&self) -> Result<PermGroup> {
        let top = PermGroup::trivial(self.m);
        let base_only = generating_elements(&self.k_on_y, &top)
            .into_iter()
            .filter(|w| w.top.is_identity())
            .map(|w| w.product_permutation())
            .collect();
        PermGroup::with_degree(self.group.degree(), dedup(base_only))
    }

    /// Checks the embedding: the defining relation on `elements` (all of `G`
    /// when `None` and small enough), `phi_hat(M) = K^m`, and both action
    /// formulas on generators.
    pub fn verify(&self, elements: Option<&[Permutation]>) -> Result<PAEmbeddingCheck> {
        let owned;
        let elements = match elements {
            Some(e) => e,
            None => {
                owned = self.group.elements(DEFAULT_ENUMERATION_CAP)?;
                &owned
            }
        };
        let gamma_idx = self.y_pos[&self.gamma];
        let theta_alpha = self.theta_coords(self.alpha) == vec![gamma_idx; self.m];
        let relation = crate::par::all(elements, |f| {
            let hat = self.phi_hat(f);
            (0..self.group.degree()).all(|w| self.theta.apply(f.apply(w)) == hat.apply(self.theta.apply(w)))
        });
        let image_m = self.m_group.induced_action(self.group.degree(), |f| Ok(self.phi_hat(f)))?;
        let kp = self.k_power()?;
        let phi_hat_m = image_m.same_group(&kp);
        let n = self.group.degree();
        let ky = self.ky();
        let mut ga_ok = true;
        for g in self.stabilizer.generators() {
            let hat = self.phi_hat(g);
            for d in 0..n {
                let delta = decode(d, ky, self.m);
                ga_ok &= encode(&self.action_of_phi_ga(g, &delta)?, ky) == hat.apply(d);
            }
        }
        let mut x_ok = true;
        for x in self.m_group.generators() {
            let hat = self.phi_hat(x);
            for d in 0..n {
                let delta = decode(d, ky, self.m);
                x_ok &= encode(&self.action_of_phi_x(x, &delta)?, ky) == hat.apply(d);
            }
        }
        Ok(PAEmbeddingCheck {
            theta_alpha_is_gamma_tuple: theta_alpha,
            relation_holds: relation,
            phi_hat_m_is_k_power: phi_hat_m,
            action_of_phi_ga_holds: ga_ok,
            action_of_phi_x_holds: x_ok,
            elements_checked: elements.len(),
        })
    }
}

/// The base-group components of `G Wr H` (product action): `K_i` is `G` acting
/// on coordinate `i`.
pub fn product_action_components(g: &PermGroup, h: &PermGroup) -> Result<Vec<PermGroup>> {
    let k = g.degree();
    let m = h.degree();
    let n = pwr_degree(k, m).ok_or_else(|| Error::cap("product-action degree", u128::MAX, u128::MAX))?;
    (0..m)
        .map(|i| {
            let gens = g
                .generators()
                .iter()
                .map(|s| {
                    let mut base = vec![Permutation::identity(k); m];
                    base[i] = s.clone();
                    WreathElement {
                        base,
                        top: Permutation::identity(m),
                    }
                    .product_permutation()
                })
                .collect();
            PermGroup::with_degree(n, dedup(gens))
        })
        .collect()
}

/// Per-clause outcome of the fibrelobe check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibrelobeReport {
    pub point_transitive: bool,
    pub fibrelobe_transitive: bool,
    pub induced_on_fibrelobe_equal: bool,
    pub induced_on_local_set_equal: bool,
}

impl FibrelobeReport {
    pub fn all(&self) -> bool {
        self.point_transitive
            && self.fibrelobe_transitive
            && self.induced_on_fibrelobe_equal
            && self.induced_on_local_set_equal
    }
}

/// Points and "fibrelobes" (fibres or lobes) of a product structure, with the
/// incidence between them. Used to evaluate the fibrelobe clauses for any
/// subgroup by letting it act on points and fibrelobes simultaneously.
#[derive(Debug, Clone)]
pub struct FibrelobeStructure {
    pub points: usize,
    /// Each fibrelobe as an ordered list of points; the order labels the
    /// local group's domain.
    pub fibrelobes: Vec<Vec<usize>>,
    /// The fibrelobes through a chosen base point, in the order labelling the
    /// top group's domain.
    pub base_point: usize,
    pub through_base: Vec<usize>,
    /// Prescribed group on one fibrelobe (`fibrelobes[through_base[0]]`).
    pub local: PermGroup,
    /// Prescribed group on the fibrelobes through the base point.
    pub top: PermGroup,
}

impl FibrelobeStructure {
    /// Fibres of `X^m`: fibre `(i, rest)` is the line varying coordinate `i`.
    pub fn product_action(g: &PermGroup, f: &PermGroup) -> Result<Self> {
        let k = g.degree();
        let m = f.degree();
        let n = pwr_degree(k, m).ok_or_else(|| Error::invalid("degree overflow"))?;
        let mut fibrelobes = Vec::new();
        let mut through_base = vec![0; m];
        for i in 0..m {
            for p in 0..n {
                let c = decode(p, k, m);
                if c[i] != 0 {
                    continue;
                }
                if p == 0 {
                    through_base[i] = fibrelobes.len();
                }
                let line = (0..k)
                    .map(|v| {
                        let mut d = c.clone();
                        d[i] = v;
                        encode(&d, k)
                    })
                    .collect();
                fibrelobes.push(line);
            }
        }
        Ok(FibrelobeStructure {
            points: n,
            fibrelobes,
            base_point: 0,
            through_base,
            local: g.clone(),
            top: f.clone(),
        })
    }

    fn combined(&self, s: &PermGroup) -> Result<PermGroup> {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        for (j, fl) in self.fibrelobes.iter().enumerate() {
            let mut key = fl.clone();
            key.sort_unstable();
            index.insert(key, j);
        }
        let n = self.points;
        s.induced_action(n + self.fibrelobes.len(), |g| {
            let mut images = g.images().to_vec();
            for fl in &self.fibrelobes {
                let mut key: Vec<usize> = fl.iter().map(|&p| g.apply(p)).collect();
                key.sort_unstable();
                let j = index
                    .get(&key)
                    .ok_or_else(|| Error::invalid("group does not preserve the fibrelobes"))?;
                images.push(n + j);
            }
            Permutation::from_images(images)
        })
    }

    pub fn check(&self, s: &PermGroup) -> Result<FibrelobeReport> {
        let n = self.points;
        let c = self.combined(s)?;
        let point_transitive = c.orbit(0).iter().filter(|&&p| p < n).count() == n;
        let fibrelobe_transitive = c.orbit(n).iter().filter(|&&p| p >= n).count() == self.fibrelobes.len();
        let first = self.through_base[0];
        let fl_stab = c.point_stabilizer(n + first)?;
        let on_fl = fl_stab.restrict_to(&self.fibrelobes[first])?;
        let induced_on_fibrelobe_equal = on_fl.same_group(&self.local);
        let pt_stab = c.point_stabilizer(self.base_point)?;
        let local_set: Vec<usize> = self.through_base.iter().map(|&j| n + j).collect();
        let on_set = pt_stab.restrict_to(&local_set)?;
        let induced_on_local_set_equal = on_set.same_group(&self.top);
        Ok(FibrelobeReport {
            point_transitive,
            fibrelobe_transitive,
            induced_on_fibrelobe_equal,
            induced_on_local_set_equal,
        })
    }
}

/// Fibrelobe clauses for a subgroup `S` of `G Wr F`.
pub fn fibrelobe_full_check_wr(s: &PermGroup, g: &PermGroup, f: &PermGroup) -> Result<FibrelobeReport> {
    let ambient = wreath_product_action(g, f, DEFAULT_PWR_DEGREE_CAP)?;
    if !ambient.contains_group(s) {
        return Err(Error::invalid("S is not a subgroup of the ambient wreath product"));
    }
    FibrelobeStructure::product_action(g, f)?.check(s)
}
