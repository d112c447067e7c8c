//! Truncations of box products on biregular trees.
//!
//! A ball of radius `r` in the `(d1, d2)`-biregular tree is numbered in BFS
//! order from its root. Vertex `v > 0` owns two arcs: `2(v-1)` from its parent
//! to `v` and `2(v-1)+1` back. A legal colouring is stored as the in-colour
//! `kappa(v)` of every vertex: every arc into `v` carries `kappa(v)`, which lies
//! in the colour set `X_i` of the opposite side.
//!
//! Ball automorphisms fix the root (it is the unique centre), so the truncated
//! universal group is the root stabilizer of `U_L(G1, G2)` restricted to the
//! ball. Only interior vertices (depth `< r`) are constrained.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{dedup, PermGroup};
use crate::iso::permutation_isomorphism;
use crate::perm::Permutation;

pub const DEFAULT_BALL_VERTEX_CAP: usize = 100_000;
pub const DEFAULT_ORDER_CAP: u128 = 1_000_000;
pub const TREEBALL_SCHEMA: &str = "permbox.treeball/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    V1,
    V2,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::V1 => Side::V2,
            Side::V2 => Side::V1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallVertex {
    pub side: Side,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub origin: usize,
    pub terminal: usize,
}

/// A ball in the `(d1, d2)`-biregular tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBall {
    pub d1: usize,
    pub d2: usize,
    pub radius: usize,
    pub root_side: Side,
    pub vertices: Vec<BallVertex>,
}

impl TreeBall {
    pub fn build(d1: usize, d2: usize, radius: usize, root_side: Side) -> Result<Self> {
        Self::build_with_cap(d1, d2, radius, root_side, DEFAULT_BALL_VERTEX_CAP)
    }

    pub fn build_with_cap(d1: usize, d2: usize, radius: usize, root_side: Side, cap: usize) -> Result<Self> {
        if d1 < 2 || d2 < 2 {
            return Err(Error::invalid(format!("degenerate degrees ({d1}, {d2}); both must be at least 2")));
        }
        if radius == 0 {
            return Err(Error::invalid("radius must be at least 1"));
        }
        let valency = |s: Side| if s == Side::V1 { d1 } else { d2 };
        // count first so the cap is enforced before allocating
        let mut total: u128 = 1;
        let mut layer: u128 = valency(root_side) as u128;
        let mut side = root_side.other();
        for _ in 1..=radius {
            total += layer;
            if total > cap as u128 {
                return Err(Error::cap("ball vertex count", cap as u128, total));
            }
            layer *= (valency(side) - 1) as u128;
            side = side.other();
        }
        let mut vertices = vec![BallVertex {
            side: root_side,
            depth: 0,
            parent: None,
            children: Vec::new(),
        }];
        let mut idx = 0;
        while idx < vertices.len() {
            let (depth, side, is_root) = (vertices[idx].depth, vertices[idx].side, idx == 0);
            if depth < radius {
                let count = valency(side) - usize::from(!is_root);
                for _ in 0..count {
                    let c = vertices.len();
                    vertices.push(BallVertex {
                        side: side.other(),
                        depth: depth + 1,
                        parent: Some(idx),
                        children: Vec::new(),
                    });
                    vertices[idx].children.push(c);
                }
            }
            idx += 1;
        }
        Ok(TreeBall {
            d1,
            d2,
            radius,
            root_side,
            vertices,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn valency(&self, side: Side) -> usize {
        match side {
            Side::V1 => self.d1,
            Side::V2 => self.d2,
        }
    }

    pub fn side(&self, v: usize) -> Side {
        self.vertices[v].side
    }

    pub fn depth(&self, v: usize) -> usize {
        self.vertices[v].depth
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.vertices[v].depth < self.radius
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_interior(v)).collect()
    }

    pub fn on_side(&self, side: Side) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.side(v) == side).collect()
    }

    /// Parent first (if any), then children.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let vx = &self.vertices[v];
        vx.parent.into_iter().chain(vx.children.iter().copied()).collect()
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut out = Vec::with_capacity(2 * self.len().saturating_sub(1));
        for v in 1..self.len() {
            let p = self.vertices[v].parent.expect("non-root vertex has a parent");
            out.push(Arc { origin: p, terminal: v });
            out.push(Arc { origin: v, terminal: p });
        }
        out
    }

    pub fn distance(&self, mut a: usize, mut b: usize) -> usize {
        let mut d = 0;
        while a != b {
            if self.depth(a) >= self.depth(b) {
                a = self.vertices[a].parent.unwrap();
            } else {
                b = self.vertices[b].parent.unwrap();
            }
            d += 1;
        }
        d
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            return Err(Error::PointOutOfRange { point: v, degree: self.len() });
        }
        Ok(())
    }

    /// `true` when `g` is a root-fixing automorphism of the ball.
    pub fn is_automorphism(&self, g: &Permutation) -> bool {
        g.degree() == self.len()
            && g.apply(0) == 0
            && (1..self.len()).all(|v| {
                let p = self.vertices[v].parent.unwrap();
                self.vertices[g.apply(v)].parent == Some(g.apply(p)) && self.side(g.apply(v)) == self.side(v)
            })
    }
}

/// A legal arc colouring, stored as vertex in-colours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalColouring {
    kappa: Vec<usize>,
}

impl LegalColouring {
    /// `kappa(root) = 0`; each vertex gives its children the least colours not
    /// used by the arc towards its parent.
    pub fn deterministic(ball: &TreeBall) -> Self {
        let mut kappa = vec![0usize; ball.len()];
        for v in 0..ball.len() {
            let vx = &ball.vertices[v];
            let parent_colour = vx.parent.map(|p| kappa[p]);
            let mut colours = (0..ball.valency(vx.side)).filter(|&c| Some(c) != parent_colour);
            for &c in &vx.children {
                kappa[c] = colours.next().expect("enough colours");
            }
        }
        LegalColouring { kappa }
    }

    /// A seeded random legal colouring (the root's in-colour is random too).
    pub fn random(ball: &TreeBall, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kappa = vec![0usize; ball.len()];
        kappa[0] = rng.gen_range(0..ball.valency(ball.root_side.other()));
        for v in 0..ball.len() {
            let vx = &ball.vertices[v];
            let parent_colour = vx.parent.map(|p| kappa[p]);
            let mut colours: Vec<usize> = (0..ball.valency(vx.side)).filter(|&c| Some(c) != parent_colour).collect();
            colours.shuffle(&mut rng);
            for (&c, &col) in vx.children.iter().zip(&colours) {
                kappa[c] = col;
            }
        }
        LegalColouring { kappa }
    }

    /// Validates an arc colouring (indexed like [`TreeBall::arcs`]) and converts it.
    pub fn from_arc_colours(ball: &TreeBall, colours: &[usize]) -> Result<Self> {
        validate_arc_colouring(ball, colours)?;
        let mut kappa = vec![0usize; ball.len()];
        for v in 1..ball.len() {
            kappa[v] = colours[2 * (v - 1)];
        }
        kappa[0] = colours[1];
        Ok(LegalColouring { kappa })
    }

    pub fn from_kappa(ball: &TreeBall, kappa: Vec<usize>) -> Result<Self> {
        if kappa.len() != ball.len() {
            return Err(Error::invalid("in-colour list has the wrong length"));
        }
        let c = LegalColouring { kappa };
        validate_arc_colouring(ball, &c.arc_colours(ball))?;
        Ok(c)
    }

    pub fn kappa(&self, v: usize) -> usize {
        self.kappa[v]
    }

    pub fn arc_colours(&self, ball: &TreeBall) -> Vec<usize> {
        ball.arcs().iter().map(|a| self.kappa[a.terminal]).collect()
    }

    /// The neighbour `u` of `v` whose arc `v -> u` has colour `c`.
    pub fn neighbour_with_colour(&self, ball: &TreeBall, v: usize, c: usize) -> Option<usize> {
        ball.neighbours(v).into_iter().find(|&u| self.kappa[u] == c)
    }
}

/// Legality: out-arcs of every vertex carry distinct colours from its side's
/// set (all of them at interior vertices), in-arcs of every vertex share one colour.
pub fn validate_arc_colouring(ball: &TreeBall, colours: &[usize]) -> Result<()> {
    let arcs = ball.arcs();
    if colours.len() != arcs.len() {
        return Err(Error::invalid(format!("expected {} arc colours, found {}", arcs.len(), colours.len())));
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); ball.len()];
    let mut inc: Vec<Option<usize>> = vec![None; ball.len()];
    for (a, &c) in arcs.iter().zip(colours) {
        let k = ball.valency(ball.side(a.origin));
        if c >= k {
            return Err(Error::invalid(format!("arc {}->{} has colour {c} outside 0..{k}", a.origin, a.terminal)));
        }
        out[a.origin].push(c);
        match inc[a.terminal] {
            Some(prev) if prev != c => {
                return Err(Error::invalid(format!("in-arcs of vertex {} carry colours {prev} and {c}", a.terminal)));
            }
            _ => inc[a.terminal] = Some(c),
        }
    }
    for (v, cs) in out.iter_mut().enumerate() {
        cs.sort_unstable();
        let before = cs.len();
        cs.dedup();
        if cs.len() != before {
            return Err(Error::invalid(format!("out-arcs of vertex {v} repeat a colour")));
        }
        if ball.is_interior(v) && cs.len() != ball.valency(ball.side(v)) {
            return Err(Error::invalid(format!("out-arcs of interior vertex {v} are not bijective")));
        }
    }
    Ok(())
}

pub fn legal_colouring(ball: &TreeBall) -> LegalColouring {
    LegalColouring::deterministic(ball)
}

/// `theta(g, v, L)`: the colour of the arc `v -> u` goes to the colour of
/// `v^g -> u^g`.
pub fn theta(ball: &TreeBall, col: &LegalColouring, g: &Permutation, v: usize) -> Result<Permutation> {
    ball.check_vertex(v)?;
    if !ball.is_interior(v) {
        return Err(Error::BoundaryVertex(v));
    }
    if !ball.is_interior(g.apply(v)) {
        return Err(Error::BoundaryVertex(g.apply(v)));
    }
    let k = ball.valency(ball.side(v));
    let mut images = vec![usize::MAX; k];
    for u in ball.neighbours(v) {
        images[col.kappa(u)] = col.kappa(g.apply(u));
    }
    Permutation::from_images(images).map_err(|_| Error::invalid("element is not a ball automorphism"))
}

/// Transporters `a -> b` inside a local group, indexed `[a][b]`.
#[derive(Debug, Clone)]
struct Transporters {
    table: Vec<Vec<Option<Permutation>>>,
}

impl Transporters {
    fn new(g: &PermGroup) -> Self {
        let n = g.degree();
        let table = (0..n).map(|a| (0..n).map(|b| g.transporter(a, b)).collect()).collect();
        Transporters { table }
    }

    fn get(&self, a: usize, b: usize) -> Option<&Permutation> {
        self.table[a][b].as_ref()
    }
}

/// Local groups and their transporters, indexed by side.
#[derive(Debug, Clone)]
struct Local {
    g1: PermGroup,
    g2: PermGroup,
    t1: Transporters,
    t2: Transporters,
}

impl Local {
    fn new(g1: &PermGroup, g2: &PermGroup) -> Self {
        Local {
            g1: g1.clone(),
            g2: g2.clone(),
            t1: Transporters::new(g1),
            t2: Transporters::new(g2),
        }
    }

    fn group(&self, s: Side) -> &PermGroup {
        match s {
            Side::V1 => &self.g1,
            Side::V2 => &self.g2,
        }
    }

    fn trans(&self, s: Side) -> &Transporters {
        match s {
            Side::V1 => &self.t1,
            Side::V2 => &self.t2,
        }
    }
}

/// Maps `B(x, s)` onto `B(y, s)` as an element of `U(G1, G2)` would, reading
/// colours through `src` at the source and `dst` at the target. Local actions
/// are the identity at `x` and canonical transporters elsewhere. `None` when
/// no such map exists (a parent colour cannot be transported).
fn transport(
    ball: &TreeBall,
    src: &LegalColouring,
    dst: &LegalColouring,
    local: &Local,
    x: usize,
    y: usize,
    s: usize,
) -> Option<Vec<usize>> {
    if ball.side(x) != ball.side(y) {
        return None;
    }
    let mut map = vec![usize::MAX; ball.len()];
    map[x] = y;
    let k = ball.valency(ball.side(x));
    let mut queue = VecDeque::from([(x, None::<usize>, Permutation::identity(k), 0usize)]);
    while let Some((a, from, tau, d)) = queue.pop_front() {
        if d == s {
            continue;
        }
        let b = map[a];
        for u in ball.neighbours(a) {
            if Some(u) == from {
                continue;
            }
            let target = dst.neighbour_with_colour(ball, b, tau.apply(src.kappa(u)))?;
            map[u] = target;
            // u needs a local action even on the rim of B(x, s), or the map
            // does not extend to an element of U
            let t = local.trans(ball.side(u)).get(src.kappa(a), dst.kappa(b))?;
            if d + 1 < s {
                queue.push_back((u, Some(a), t.clone(), d + 1));
            }
        }
    }
    Some(map)
}

/// Root stabilizer of `U_L(G1, G2)` restricted to a ball.
#[derive(Debug, Clone)]
pub struct BoxTruncation {
    pub ball: TreeBall,
    pub colouring: LegalColouring,
    pub g1: PermGroup,
    pub g2: PermGroup,
    /// Acting on ball vertices.
    pub group: PermGroup,
    local: Local,
}

/// `U(G1, G2)` truncated at radius `r` around a `V2` root, with the
/// deterministic colouring.
pub fn truncated_universal_group(g1: &PermGroup, g2: &PermGroup, r: usize) -> Result<BoxTruncation> {
    let ball = TreeBall::build(g1.degree(), g2.degree(), r, Side::V2)?;
    let col = LegalColouring::deterministic(&ball);
    truncated_universal_group_on(&ball, &col, g1, g2, DEFAULT_ORDER_CAP)
}

pub fn truncated_universal_group_on(
    ball: &TreeBall,
    col: &LegalColouring,
    g1: &PermGroup,
    g2: &PermGroup,
    order_cap: u128,
) -> Result<BoxTruncation> {
    if g1.degree() != ball.d1 {
        return Err(Error::DegreeMismatch { expected: ball.d1, found: g1.degree() });
    }
    if g2.degree() != ball.d2 {
        return Err(Error::DegreeMismatch { expected: ball.d2, found: g2.degree() });
    }
    let local = Local::new(g1, g2);
    let root_group = local.group(ball.root_side).clone();
    let mut order = root_group.order();
    let mut stabs: HashMap<usize, PermGroup> = HashMap::new();
    for v in 1..ball.len() {
        if !ball.is_interior(v) {
            continue;
        }
        let p = ball.vertices[v].parent.unwrap();
        let st = local.group(ball.side(v)).point_stabilizer(col.kappa(p))?;
        order = order.saturating_mul(st.order());
        if order > order_cap {
            return Err(Error::cap("truncated group order", order_cap, order));
        }
        stabs.insert(v, st);
    }
    let mut trunc = BoxTruncation {
        ball: ball.clone(),
        colouring: col.clone(),
        g1: g1.clone(),
        g2: g2.clone(),
        group: PermGroup::trivial(ball.len()),
        local,
    };
    let mut gens = Vec::new();
    for s in root_group.generators() {
        gens.push(trunc.extend(s, None));
    }
    let mut interior: Vec<usize> = stabs.keys().copied().collect();
    interior.sort_unstable();
    for v in interior {
        for s in stabs[&v].generators() {
            let id = Permutation::identity(ball.valency(ball.root_side));
            gens.push(trunc.extend(&id, Some((v, s))));
        }
    }
    trunc.group = PermGroup::with_degree(ball.len(), dedup(gens))?;
    debug_assert_eq!(trunc.group.order(), order);
    Ok(trunc)
}

impl BoxTruncation {
    /// Builds the automorphism with local action `root_tau` at the root,
    /// `over.1` at vertex `over.0` (which must then be fixed), and canonical
    /// transporters everywhere else.
    fn extend(&self, root_tau: &Permutation, over: Option<(usize, &Permutation)>) -> Permutation {
        let ball = &self.ball;
        let col = &self.colouring;
        let mut images = vec![usize::MAX; ball.len()];
        images[0] = 0;
        let mut queue = VecDeque::from([(0usize, root_tau.clone())]);
        while let Some((v, tau)) = queue.pop_front() {
            let w = images[v];
            for &c in &ball.vertices[v].children {
                let target = col
                    .neighbour_with_colour(ball, w, tau.apply(col.kappa(c)))
                    .expect("legal colouring");
                images[c] = target;
                if ball.is_interior(c) {
                    let tc = match over {
                        Some((ov, s)) if ov == c => s.clone(),
                        _ => self
                            .local
                            .trans(ball.side(c))
                            .get(col.kappa(v), col.kappa(w))
                            .expect("parent colours lie in one local orbit")
                            .clone(),
                    };
                    queue.push_back((c, tc));
                }
            }
        }
        Permutation::from_images_unchecked(images)
    }

    /// `true` when `g` is a ball automorphism with `theta(g, v)` in the local
    /// group at every interior vertex.
    pub fn admits(&self, g: &Permutation) -> bool {
        self.ball.is_automorphism(g)
            && self.ball.interior().into_iter().all(|v| {
                theta(&self.ball, &self.colouring, g, v)
                    .map(|t| self.local.group(self.ball.side(v)).contains(&t))
                    .unwrap_or(false)
            })
    }

    pub fn theta(&self, g: &Permutation, v: usize) -> Result<Permutation> {
        theta(&self.ball, &self.colouring, g, v)
    }

    /// Map of `B(x, s)` onto `B(y, s)` realisable by an element of `U(G1, G2)`.
    pub fn transport(&self, x: usize, y: usize, s: usize) -> Option<Vec<usize>> {
        transport(&self.ball, &self.colouring, &self.colouring, &self.local, x, y, s)
    }

    /// Whether the box product moves the root to every interior vertex on the
    /// root's side, witnessed by transports of the largest balls that fit.
    pub fn transitive_on_interior(&self, side: Side) -> bool {
        let ball = &self.ball;
        let start = match ball.interior().into_iter().find(|&v| ball.side(v) == side) {
            Some(v) => v,
            None => return true,
        };
        ball.interior().into_iter().filter(|&w| ball.side(w) == side).all(|w| {
            let s = (ball.radius - ball.depth(start)).min(ball.radius - ball.depth(w));
            self.transport(start, w, s).is_some_and(|m| is_partial_isomorphism(ball, &m))
        })
    }
}

fn is_partial_isomorphism(ball: &TreeBall, map: &[usize]) -> bool {
    let mut seen = vec![false; ball.len()];
    for &t in map.iter().filter(|&&t| t != usize::MAX) {
        if seen[t] {
            return false;
        }
        seen[t] = true;
    }
    (1..ball.len()).all(|v| {
        let p = ball.vertices[v].parent.unwrap();
        if map[v] == usize::MAX || map[p] == usize::MAX {
            return true;
        }
        ball.distance(map[v], map[p]) == 1 && ball.side(map[v]) == ball.side(v)
    })
}

/// The box product at the truncation: the root stabilizer acting on the
/// `V2` vertices of the ball.
#[derive(Debug, Clone, Serialize)]
pub struct BoxPointAction {
    /// Ball vertex ids of the points (all `V2` vertices), sorted.
    pub points: Vec<usize>,
    #[serde(skip)]
    pub group: PermGroup,
    /// Orbits of the root stabilizer on points, as ball vertex ids.
    pub suborbits: Vec<Vec<usize>>,
    pub subdegrees: Vec<usize>,
    pub sd: Option<usize>,
    pub transitive_on_interior: bool,
}

pub fn box_point_action(b: &BoxTruncation) -> Result<BoxPointAction> {
    if b.ball.root_side != Side::V2 {
        return Err(Error::invalid("the point action needs a ball centred at a V2 vertex"));
    }
    let points = b.ball.on_side(Side::V2);
    let group = b.group.restrict_to(&points)?;
    let suborbits: Vec<Vec<usize>> = group
        .orbits()
        .into_iter()
        .map(|o| o.into_iter().map(|i| points[i]).collect())
        .collect();
    let mut subdegrees: Vec<usize> = suborbits.iter().map(|o| o.len()).collect();
    subdegrees.sort_unstable();
    let sd = subdegrees.iter().copied().filter(|&s| s > 1).min();
    Ok(BoxPointAction {
        transitive_on_interior: b.transitive_on_interior(Side::V2),
        points,
        group,
        suborbits,
        subdegrees,
        sd,
    })
}

/// Predicted size of the root-stabilizer orbit of `w`: the product along the
/// geodesic `root = v_0, .., v_t = w` of the orbit sizes of `kappa(v_{j+1})`
/// under the stabilizer of `kappa(v_{j-1})` in the local group at `v_j`.
pub fn geodesic_orbit_size(b: &BoxTruncation, w: usize) -> Result<u128> {
    let ball = &b.ball;
    let col = &b.colouring;
    let mut path = vec![w];
    while let Some(p) = ball.vertices[*path.last().unwrap()].parent {
        path.push(p);
    }
    path.reverse();
    let mut size = 1u128;
    for j in 0..path.len().saturating_sub(1) {
        let v = path[j];
        let g = b.local.group(ball.side(v));
        let h = match j {
            0 => g.clone(),
            _ => g.point_stabilizer(col.kappa(path[j - 1]))?,
        };
        size *= h.orbit(col.kappa(path[j + 1])).len() as u128;
    }
    Ok(size)
}

/// A root-fixing conjugator between the truncations for two colourings.
#[derive(Debug, Clone)]
pub struct ColouringConjugacy {
    pub conjugator: Permutation,
    /// `c^-1 U_L c` lies in `U_L'` (on generators).
    pub forward: bool,
    /// `c U_L' c^-1` lies in `U_L` (on generators).
    pub backward: bool,
}

impl ColouringConjugacy {
    pub fn verified(&self) -> bool {
        self.forward && self.backward
    }
}

pub fn colouring_conjugacy(
    ball: &TreeBall,
    l: &LegalColouring,
    l2: &LegalColouring,
    g1: &PermGroup,
    g2: &PermGroup,
) -> Result<ColouringConjugacy> {
    let u = truncated_universal_group_on(ball, l, g1, g2, DEFAULT_ORDER_CAP)?;
    let u2 = truncated_universal_group_on(ball, l2, g1, g2, DEFAULT_ORDER_CAP)?;
    let map = transport(ball, l, l2, &u.local, 0, 0, ball.radius).ok_or_else(|| {
        Error::hypothesis(
            "root in-colours lie in different local orbits, so no root-fixing conjugator exists",
        )
    })?;
    let c = Permutation::from_images(map).map_err(|_| Error::Internal("conjugator is not a bijection".into()))?;
    if !ball.is_automorphism(&c) {
        return Err(Error::Internal("conjugator is not a ball automorphism".into()));
    }
    let cinv = c.inverse();
    let forward = u.group.generators().iter().all(|g| u2.group.contains(&g.conjugate_by(&c)));
    let backward = u2.group.generators().iter().all(|g| u.group.contains(&g.conjugate_by(&cinv)));
    Ok(ColouringConjugacy {
        conjugator: c,
        forward,
        backward,
    })
}

/// Where to read a local action: a vertex of the tree, or (graph form) a lobe
/// `B(v)` for `v` in `V1`, or a point `w` in `V2` acting on its lobes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Vertex(usize),
    Lobe(usize),
    Point(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalAction {
    pub vertex: usize,
    pub side: Side,
    /// Induced group on `B(v)`, labelled by arc colours.
    #[serde(skip)]
    pub on_colours: PermGroup,
    /// Induced group on `B(v)`, labelled by neighbour order.
    #[serde(skip)]
    pub on_neighbours: PermGroup,
    pub equal_to_local_group: bool,
    pub isomorphic_to_local_group: bool,
}

/// Re-centres the truncation at `v` (radius `r - depth(v)`, colouring
/// restricted) and reads off the action of the vertex stabilizer on `B(v)`.
pub fn local_action_verify(b: &BoxTruncation, site: Site) -> Result<LocalAction> {
    let v = match site {
        Site::Vertex(v) => v,
        Site::Lobe(v) => {
            b.ball.check_vertex(v)?;
            if b.ball.side(v) != Side::V1 {
                return Err(Error::invalid("lobes are indexed by V1 vertices"));
            }
            v
        }
        Site::Point(w) => {
            b.ball.check_vertex(w)?;
            if b.ball.side(w) != Side::V2 {
                return Err(Error::invalid("points are V2 vertices"));
            }
            w
        }
    };
    b.ball.check_vertex(v)?;
    if !b.ball.is_interior(v) {
        return Err(Error::BoundaryVertex(v));
    }
    let (sub, sub_col) = recentre(&b.ball, &b.colouring, v)?;
    let t = truncated_universal_group_on(&sub, &sub_col, &b.g1, &b.g2, DEFAULT_ORDER_CAP)?;
    let side = sub.root_side;
    let k = sub.valency(side);
    let on_colours = PermGroup::with_degree(
        k,
        dedup(t.group.generators().iter().map(|g| theta(&sub, &sub_col, g, 0)).collect::<Result<_>>()?),
    )?;
    let on_neighbours = t.group.restrict_to(&sub.vertices[0].children)?;
    let prescribed = t.local.group(side);
    Ok(LocalAction {
        vertex: v,
        side,
        equal_to_local_group: on_colours.same_group(prescribed),
        isomorphic_to_local_group: permutation_isomorphism(&on_neighbours, prescribed)?.is_some(),
        on_colours,
        on_neighbours,
    })
}

/// The ball of radius `r - depth(v)` around `v`, renumbered with `v` as root.
pub fn recentre(ball: &TreeBall, col: &LegalColouring, v: usize) -> Result<(TreeBall, LegalColouring)> {
    let s = ball.radius - ball.depth(v);
    let sub = TreeBall::build(ball.d1, ball.d2, s, ball.side(v))?;
    let mut orig = vec![usize::MAX; sub.len()];
    orig[0] = v;
    let mut kappa = vec![0usize; sub.len()];
    kappa[0] = col.kappa(v);
    for x in 0..sub.len() {
        let y = orig[x];
        let from = sub.vertices[x].parent.map(|p| orig[p]);
        let nbrs: Vec<usize> = ball.neighbours(y).into_iter().filter(|&u| Some(u) != from).collect();
        for (&c, &u) in sub.vertices[x].children.iter().zip(&nbrs) {
            orig[c] = u;
            kappa[c] = col.kappa(u);
        }
    }
    let sub_col = LegalColouring::from_kappa(&sub, kappa)?;
    Ok((sub, sub_col))
}

/// Versioned JSON form of a ball with its colouring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeBallDocument {
    pub schema: String,
    pub d1: usize,
    pub d2: usize,
    pub radius: usize,
    pub root_side: Side,
    pub vertices: Vec<VertexRecord>,
    pub arcs: Vec<ArcRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub side: Side,
    pub depth: usize,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub id: usize,
    pub origin: usize,
    pub terminal: usize,
    pub colour: usize,
}

impl TreeBallDocument {
    pub fn new(ball: &TreeBall, col: &LegalColouring) -> Self {
        let colours = col.arc_colours(ball);
        TreeBallDocument {
            schema: TREEBALL_SCHEMA.into(),
            d1: ball.d1,
            d2: ball.d2,
            radius: ball.radius,
            root_side: ball.root_side,
            vertices: ball
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| VertexRecord {
                    id,
                    side: v.side,
                    depth: v.depth,
                    parent: v.parent,
                })
                .collect(),
            arcs: ball
                .arcs()
                .iter()
                .zip(colours)
                .enumerate()
                .map(|(id, (a, colour))| ArcRecord {
                    id,
                    origin: a.origin,
                    terminal: a.terminal,
                    colour,
                })
                .collect(),
        }
    }

    /// Rebuilds the ball and checks that the stored structure and colouring match.
    pub fn load(&self) -> Result<(TreeBall, LegalColouring)> {
        if self.schema != TREEBALL_SCHEMA {
            return Err(Error::invalid(format!("unsupported schema {}", self.schema)));
        }
        let ball = TreeBall::build(self.d1, self.d2, self.radius, self.root_side)?;
        let same_vertices = self.vertices.len() == ball.len()
            && self.vertices.iter().enumerate().all(|(i, r)| {
                r.id == i && r.side == ball.side(i) && r.depth == ball.depth(i) && r.parent == ball.vertices[i].parent
            });
        let arcs = ball.arcs();
        let same_arcs = self.arcs.len() == arcs.len()
            && self
                .arcs
                .iter()
                .zip(&arcs)
                .enumerate()
                .all(|(i, (r, a))| r.id == i && r.origin == a.origin && r.terminal == a.terminal);
        if !same_vertices || !same_arcs {
            return Err(Error::invalid("document does not describe the canonical ball"));
        }
        let colours: Vec<usize> = self.arcs.iter().map(|a| a.colour).collect();
        let col = LegalColouring::from_arc_colours(&ball, &colours)?;
        Ok((ball, col))
    }
}
