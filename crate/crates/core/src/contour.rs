//! Separating edges, the south-east splitting decomposition into contours,
//! the interface under ±-type boundary conditions and the inverse map from
//! contours back to spins.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{ModelParams, SmallIsing, SpinConfig};
use crate::lattice::{
    source_points, BoundaryCondition, DualEdge, DualVertex, LatticeRegion, Side, Site, Spin, MINUS, PLUS,
};

pub type EdgeSet = BTreeSet<DualEdge>;

const DIRS: [Side; 4] = [Side::North, Side::East, Side::South, Side::West];

/// Which pairs of incident edges are joined at a dual vertex, given the set
/// of directions present. Edges not covered by a pair end their contour there.
pub fn pairing(present: &[Side]) -> Vec<(Side, Side)> {
    let has = |s: Side| present.contains(&s);
    match present.len() {
        2 => vec![(present[0], present[1])],
        3 | 4 => {
            let mut out = Vec::new();
            if has(Side::South) && has(Side::East) {
                out.push((Side::South, Side::East));
            }
            if has(Side::North) && has(Side::West) {
                out.push((Side::North, Side::West));
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Dual edges crossing disagreeing primal edges of `σ ∐ η` that touch the region.
pub fn separating_edges(sigma: &SpinConfig, bc: &BoundaryCondition) -> Result<EdgeSet> {
    let mut out = EdgeSet::new();
    for (i, &v) in sigma.sites().iter().enumerate() {
        let s = sigma.spins()[i];
        for w in v.neighbors() {
            let t = match sigma.get(w) {
                Some(t) => {
                    // interior edges are visited from both ends; keep one
                    if w < v {
                        continue;
                    }
                    t
                }
                None => bc.boundary_spin(w)?,
            };
            if s != t {
                out.insert(DualEdge::crossing(v, w));
            }
        }
    }
    Ok(out)
}

/// Dual vertices of odd degree in an edge set.
pub fn odd_vertices<'a>(edges: impl IntoIterator<Item = &'a DualEdge>) -> BTreeSet<DualVertex> {
    let mut odd = BTreeSet::new();
    for e in edges {
        let (p, q) = e.endpoints();
        for v in [p, q] {
            if !odd.remove(&v) {
                odd.insert(v);
            }
        }
    }
    odd
}

/// A path or loop of dual edges, stored in traversal order.
///
/// Canonical orientation: paths run from their smaller endpoint; loops start
/// at their smallest edge, leaving from that edge's south-west endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Contour {
    edges: Vec<DualEdge>,
    vertices: Vec<DualVertex>,
    closed: bool,
}

impl Contour {
    pub fn edges(&self) -> &[DualEdge] {
        &self.edges
    }

    /// Vertex sequence; for loops the first vertex is repeated at the end.
    pub fn vertices(&self) -> &[DualVertex] {
        &self.vertices
    }

    pub fn is_loop(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Endpoints of an open path.
    pub fn endpoints(&self) -> Option<(DualVertex, DualVertex)> {
        (!self.closed).then(|| (self.vertices[0], *self.vertices.last().unwrap()))
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.iter().copied().collect()
    }

    /// Build a contour from a dual-vertex sequence (closed when the last vertex
    /// equals the first). Geometry only; admissibility is not checked.
    pub fn from_vertices(vertices: &[DualVertex]) -> Result<Contour> {
        if vertices.len() < 2 {
            return Err(Error::NonAdmissible("a contour needs at least one edge".into()));
        }
        let mut edges = Vec::with_capacity(vertices.len() - 1);
        for w in vertices.windows(2) {
            edges.push(
                DualEdge::between(w[0], w[1])
                    .ok_or_else(|| Error::NonAdmissible(format!("{:?} and {:?} are not adjacent", w[0], w[1])))?,
            );
        }
        let closed = vertices.len() > 2 && vertices[0] == *vertices.last().unwrap();
        let c = Contour { edges, vertices: vertices.to_vec(), closed };
        Ok(c.canonical())
    }

    fn canonical(mut self) -> Contour {
        if self.closed {
            let n = self.edges.len();
            let (k, _) = self.edges.iter().enumerate().min_by_key(|(_, e)| **e).unwrap();
            let e = self.edges[k];
            let forward = self.vertices[k] == e.endpoints().0;
            let mut vs = Vec::with_capacity(n + 1);
            let mut es = Vec::with_capacity(n);
            if forward {
                for j in 0..n {
                    es.push(self.edges[(k + j) % n]);
                    vs.push(self.vertices[(k + j) % n]);
                }
            } else {
                for j in 0..n {
                    let idx = (k + n - j) % n;
                    es.push(self.edges[idx]);
                    vs.push(self.vertices[(idx + 1) % n]);
                }
            }
            vs.push(vs[0]);
            self.edges = es;
            self.vertices = vs;
        } else if self.vertices[0] > *self.vertices.last().unwrap() {
            self.edges.reverse();
            self.vertices.reverse();
        }
        self
    }
}

/// Edge-disjoint contours making up one edge set, in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContourCollection {
    contours: Vec<Contour>,
}

impl ContourCollection {
    pub fn new(mut contours: Vec<Contour>) -> Self {
        contours.sort_by(|a, b| a.edges.iter().min().cmp(&b.edges.iter().min()));
        ContourCollection { contours }
    }

    pub fn empty() -> Self {
        ContourCollection::default()
    }

    pub fn contours(&self) -> &[Contour] {
        &self.contours
    }

    pub fn len(&self) -> usize {
        self.contours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }

    pub fn open_paths(&self) -> impl Iterator<Item = &Contour> {
        self.contours.iter().filter(|c| !c.closed)
    }

    pub fn loops(&self) -> impl Iterator<Item = &Contour> {
        self.contours.iter().filter(|c| c.closed)
    }

    /// Union of the edge sets (`None` if two contours share an edge).
    pub fn edge_union(&self) -> Option<EdgeSet> {
        let mut out = EdgeSet::new();
        for c in &self.contours {
            for &e in &c.edges {
                if !out.insert(e) {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// `|ζ|`: total number of edges.
    pub fn total_length(&self) -> usize {
        self.contours.iter().map(Contour::len).sum()
    }

    /// Vertices of odd total degree.
    pub fn boundary(&self) -> BTreeSet<DualVertex> {
        odd_vertices(self.contours.iter().flat_map(|c| c.edges.iter()))
    }

    /// Whether the collection is its own decomposition and lies in `allowed`.
    pub fn is_admissible_in(&self, allowed: &EdgeSet) -> bool {
        self.is_admissible_where(|e| allowed.contains(&e))
    }

    /// As [`ContourCollection::is_admissible_in`], with membership given by a predicate.
    pub fn is_admissible_where(&self, allowed: impl Fn(DualEdge) -> bool) -> bool {
        match self.edge_union() {
            Some(u) => u.iter().all(|&e| allowed(e)) && decompose(&u).is_ok_and(|d| &d == self),
            None => false,
        }
    }
}

/// Split an edge set into contours using the south-east splitting rule.
pub fn decompose(edges: &EdgeSet) -> Result<ContourCollection> {
    let list: Vec<DualEdge> = edges.iter().copied().collect();
    decompose_list(&list)
}

/// As [`decompose`], for an edge list; repeated edges are rejected.
pub fn decompose_list(list: &[DualEdge]) -> Result<ContourCollection> {
    let index: BTreeMap<DualEdge, usize> = list.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    if index.len() != list.len() {
        let mut seen = BTreeSet::new();
        let dup = list.iter().find(|e| !seen.insert(**e)).unwrap();
        return Err(Error::MalformedInput(dup.endpoints().0));
    }
    let mut vertices: BTreeSet<DualVertex> = BTreeSet::new();
    for e in list {
        let (p, q) = e.endpoints();
        vertices.insert(p);
        vertices.insert(q);
    }
    // partner[(edge, end)] for end 0 = first endpoint, 1 = second endpoint
    let mut partner: Vec<[Option<(usize, usize)>; 2]> = vec![[None, None]; list.len()];
    let end_of = |i: usize, v: DualVertex| if list[i].endpoints().0 == v { 0 } else { 1 };
    for &v in &vertices {
        let present: Vec<Side> = DIRS.iter().copied().filter(|&d| index.contains_key(&v.edge(d))).collect();
        for (d1, d2) in pairing(&present) {
            let i = index[&v.edge(d1)];
            let j = index[&v.edge(d2)];
            let (ei, ej) = (end_of(i, v), end_of(j, v));
            partner[i][ei] = Some((j, ej));
            partner[j][ej] = Some((i, ei));
        }
    }

    let mut used = vec![false; list.len()];
    let mut contours = Vec::new();
    let trace = |start: usize, start_end: usize, used: &mut Vec<bool>| -> Contour {
        // leave edge `start` through the end opposite to `start_end`
        let mut edges = vec![list[start]];
        let (p, q) = list[start].endpoints();
        let mut vertices = if start_end == 0 { vec![p, q] } else { vec![q, p] };
        used[start] = true;
        let (mut cur, mut out_end) = (start, 1 - start_end);
        let mut closed = false;
        while let Some((next, next_end)) = partner[cur][out_end] {
            if next == start {
                closed = true;
                break;
            }
            used[next] = true;
            edges.push(list[next]);
            let (p, q) = list[next].endpoints();
            vertices.push(if next_end == 0 { q } else { p });
            cur = next;
            out_end = 1 - next_end;
        }
        Contour { edges, vertices, closed }.canonical()
    };
    // open paths first, starting from unpaired ends
    for i in 0..list.len() {
        for end in 0..2 {
            if !used[i] && partner[i][end].is_none() {
                contours.push(trace(i, end, &mut used));
            }
        }
    }
    for i in 0..list.len() {
        if !used[i] {
            contours.push(trace(i, 0, &mut used));
        }
    }
    Ok(ContourCollection::new(contours))
}

/// The distinguished open contour joining the two source points of a ±-type
/// boundary condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interface {
    path: Contour,
}

impl Interface {
    pub fn from_contour(path: Contour) -> Result<Self> {
        if path.closed {
            return Err(Error::NonAdmissible("an interface is an open path".into()));
        }
        Ok(Interface { path })
    }

    pub fn contour(&self) -> &Contour {
        &self.path
    }

    pub fn edges(&self) -> &[DualEdge] {
        &self.path.edges
    }

    pub fn vertices(&self) -> &[DualVertex] {
        &self.path.vertices
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn endpoints(&self) -> (DualVertex, DualVertex) {
        self.path.endpoints().expect("interfaces are open")
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.path.edge_set()
    }
}

fn two_sources(region: &LatticeRegion, bc: &BoundaryCondition) -> Result<[DualVertex; 2]> {
    let src = source_points(region, bc)?;
    match src.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::InvalidConfig(format!(
            "boundary condition has {} source points, an interface needs 2",
            src.len()
        ))),
    }
}

/// Interface of `σ` under a boundary condition with two source points.
pub fn extract_interface(sigma: &SpinConfig, bc: &BoundaryCondition) -> Result<Interface> {
    let sources = two_sources(sigma.region(), bc)?;
    let collection = decompose(&separating_edges(sigma, bc)?)?;
    interface_of(&collection, sources)
}

/// Contour decomposition of `σ` together with its interface.
pub fn contours_and_interface(
    sigma: &SpinConfig,
    bc: &BoundaryCondition,
) -> Result<(ContourCollection, Interface)> {
    let sources = two_sources(sigma.region(), bc)?;
    let collection = decompose(&separating_edges(sigma, bc)?)?;
    let interface = interface_of(&collection, sources)?;
    Ok((collection, interface))
}

fn interface_of(collection: &ContourCollection, sources: [DualVertex; 2]) -> Result<Interface> {
    let mut open = collection.open_paths();
    let path = open
        .next()
        .ok_or_else(|| Error::InternalInvariant("no open contour under a ±-type condition".into()))?;
    if open.next().is_some() {
        return Err(Error::InternalInvariant("more than one open contour under a ±-type condition".into()));
    }
    if path.endpoints() != Some((sources[0], sources[1])) {
        return Err(Error::InternalInvariant(format!(
            "open contour ends at {:?}, source points are {:?}",
            path.endpoints(),
            sources
        )));
    }
    Interface::from_contour(path.clone())
}

/// The unique configuration whose separating edge set is exactly `edges`.
pub fn spins_from_edges(region: &LatticeRegion, bc: &BoundaryCondition, edges: &EdgeSet) -> Result<SpinConfig> {
    let mut sigma = SpinConfig::constant(region, PLUS);
    let n = sigma.len();
    let sites: Vec<Site> = sigma.sites().to_vec();
    let mut known = vec![0 as Spin; n];
    let mut queue = VecDeque::new();
    for k in 0..n {
        if known[k] != 0 {
            continue;
        }
        let v = sites[k];
        // seed each component from an exterior neighbour when it has one
        let seed = v.neighbors().into_iter().find(|w| !region.contains(*w));
        let s = match seed {
            Some(w) => flip(bc.boundary_spin(w)?, edges.contains(&DualEdge::crossing(v, w))),
            None => continue,
        };
        known[k] = s;
        queue.push_back(k);
        while let Some(i) = queue.pop_front() {
            let u = sites[i];
            for w in u.neighbors() {
                if let Some(j) = sigma.index_of(w) {
                    if known[j] == 0 {
                        known[j] = flip(known[i], edges.contains(&DualEdge::crossing(u, w)));
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    if known.contains(&0) {
        return Err(Error::InconsistentCollection);
    }
    for (k, s) in known.into_iter().enumerate() {
        sigma.set(sites[k], s);
    }
    if &separating_edges(&sigma, bc)? != edges {
        return Err(Error::InconsistentCollection);
    }
    Ok(sigma)
}

fn flip(s: Spin, across: bool) -> Spin {
    if across {
        -s
    } else {
        s
    }
}

/// Inverse of `σ ↦ decompose(separating_edges(σ))`.
pub fn spins_from_contours(
    collection: &ContourCollection,
    region: &LatticeRegion,
    bc: &BoundaryCondition,
) -> Result<SpinConfig> {
    let edges = collection.edge_union().ok_or(Error::InconsistentCollection)?;
    if !collection.is_admissible_where(|e| region.has_dual_edge(e)) {
        return Err(Error::InconsistentCollection);
    }
    let sources: BTreeSet<DualVertex> = source_points(region, bc)?.into_iter().collect();
    if collection.boundary() != sources {
        return Err(Error::InconsistentCollection);
    }
    spins_from_edges(region, bc, &edges)
}

/// `σ(𝓘)`: the configuration whose separating set is exactly the interface.
pub fn interface_configuration(
    interface: &Interface,
    region: &LatticeRegion,
    bc: &BoundaryCondition,
) -> Result<SpinConfig> {
    let sources = two_sources(region, bc)?;
    if interface.endpoints() != (sources[0], sources[1]) {
        return Err(Error::NonAdmissible("interface does not join the source points".into()));
    }
    let edges = interface.edge_set();
    let single = ContourCollection::new(vec![interface.path.clone()]);
    if !single.is_admissible_where(|e| region.has_dual_edge(e)) {
        return Err(Error::NonAdmissible("interface is not its own contour decomposition".into()));
    }
    spins_from_edges(region, bc, &edges).map_err(|_| Error::NonAdmissible("no configuration realizes the interface".into()))
}

/// `(Λ⁺(𝓘), Λ⁻(𝓘))`: plus and minus sites of `σ(𝓘)`.
pub fn interface_sides(
    interface: &Interface,
    region: &LatticeRegion,
    bc: &BoundaryCondition,
) -> Result<(Vec<Site>, Vec<Site>)> {
    let sigma = interface_configuration(interface, region, bc)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (&v, &s) in sigma.sites().iter().zip(sigma.spins()) {
        if s == PLUS {
            plus.push(v)
        } else {
            minus.push(v)
        }
    }
    Ok((plus, minus))
}

/// Sites whose spin equals its `σ(𝓘)` value in every configuration with
/// interface `𝓘`.
///
/// Every configuration with interface `𝓘` is `σ(𝓘)` with a flip pattern
/// `τ` whose separating edges `G` avoid `𝓘` and leave the splitting of `𝓘`
/// intact at each of its vertices. That is a local condition, so it is
/// checked by enumerating `τ` on the four sites around each interface vertex.
///
/// The two sites across an interface edge never flip: flipping one forces
/// flipping the other, then the pair across the next interface edge, and so
/// on until the chain reaches the fixed exterior. With those pinned, the
/// remaining constraint must factor into "these sites never flip"; anything
/// else is reported as an invariant violation.
pub fn frozen_sites(interface: &Interface, region: &LatticeRegion) -> Result<BTreeSet<Site>> {
    let own: EdgeSet = interface.edge_set();
    let mut frozen = BTreeSet::new();
    for e in interface.edges() {
        let (v, w) = e.primal_edge();
        frozen.extend([v, w].into_iter().filter(|s| region.contains(*s)));
    }
    let mut vertex_set: BTreeSet<DualVertex> = BTreeSet::new();
    vertex_set.extend(interface.vertices().iter().copied());
    for &v in &vertex_set {
        let around = v.surrounding_sites();
        let inside: Vec<usize> = (0..4).filter(|&k| region.contains(around[k]) && !frozen.contains(&around[k])).collect();
        let own_dirs: Vec<Side> = DIRS.iter().copied().filter(|&d| own.contains(&v.edge(d))).collect();
        let own_pairs = pairing(&own_dirs);
        let mut allowed_patterns = Vec::new();
        for pattern in 0u32..1 << inside.len() {
            let mut flipped = [false; 4];
            for (bit, &k) in inside.iter().enumerate() {
                flipped[k] = pattern >> bit & 1 == 1;
            }
            if local_pattern_allowed(v, &flipped, &own, &own_dirs, &own_pairs) {
                allowed_patterns.push(flipped);
            }
        }
        let mut forced = [false; 4];
        for &k in &inside {
            forced[k] = allowed_patterns.iter().all(|p| !p[k]);
        }
        // product structure: every pattern vanishing on the forced sites is allowed
        let free: Vec<usize> = inside.iter().copied().filter(|&k| !forced[k]).collect();
        for pattern in 0u32..1 << free.len() {
            let mut flipped = [false; 4];
            for (bit, &k) in free.iter().enumerate() {
                flipped[k] = pattern >> bit & 1 == 1;
            }
            if !allowed_patterns.contains(&flipped) {
                return Err(Error::InternalInvariant(format!(
                    "frozen-site constraint at {v:?} does not factor"
                )));
            }
        }
        for &k in &inside {
            if forced[k] {
                frozen.insert(around[k]);
            }
        }
    }
    Ok(frozen)
}

// sites around v are ordered [sw, se, nw, ne]
fn local_pattern_allowed(
    v: DualVertex,
    flipped: &[bool; 4],
    own: &EdgeSet,
    own_dirs: &[Side],
    own_pairs: &[(Side, Side)],
) -> bool {
    let [sw, se, nw, ne] = *flipped;
    let g_dirs: Vec<Side> = [
        (Side::North, nw != ne),
        (Side::East, ne != se),
        (Side::South, sw != se),
        (Side::West, sw != nw),
    ]
    .into_iter()
    .filter(|(_, d)| *d)
    .map(|(s, _)| s)
    .collect();
    if g_dirs.is_empty() {
        return true;
    }
    if g_dirs.iter().any(|&d| own.contains(&v.edge(d))) {
        return false;
    }
    let mut all: Vec<Side> = own_dirs.to_vec();
    all.extend(&g_dirs);
    let joint = pairing(&all);
    // the interface keeps exactly its own pairs and nothing of G joins it
    let mine = |s: Side| own_dirs.contains(&s);
    for &(a, b) in &joint {
        if mine(a) != mine(b) {
            return false;
        }
    }
    let kept: Vec<(Side, Side)> = joint.iter().copied().filter(|(a, _)| mine(*a)).collect();
    let same = |p: &(Side, Side), q: &(Side, Side)| (p.0 == q.0 && p.1 == q.1) || (p.0 == q.1 && p.1 == q.0);
    kept.len() == own_pairs.len() && own_pairs.iter().all(|p| kept.iter().any(|q| same(p, q)))
}

/// `log` of the unnormalised probability of the interface:
/// `e^{-2β|𝓘|}` times the field weight of the frozen sites times
/// `Z_+` on the unfrozen plus side and `Z_-` on the unfrozen minus side.
/// Dividing by `Z_η` gives `μ(𝓘)` at any field.
pub fn interface_log_weight(
    interface: &Interface,
    region: &LatticeRegion,
    bc: &BoundaryCondition,
    p: &ModelParams,
) -> Result<f64> {
    let sigma = interface_configuration(interface, region, bc)?;
    let frozen = frozen_sites(interface, region)?;
    let mut free_plus = Vec::new();
    let mut free_minus = Vec::new();
    let mut frozen_mag = 0i64;
    for (&v, &s) in sigma.sites().iter().zip(sigma.spins()) {
        if frozen.contains(&v) {
            frozen_mag += s as i64;
        } else if s == PLUS {
            free_plus.push(v);
        } else {
            free_minus.push(v);
        }
    }
    let z_plus = SmallIsing::new(free_plus, |_| Ok(PLUS))?.distribution(p).log_z();
    let z_minus = SmallIsing::new(free_minus, |_| Ok(MINUS))?.distribution(p).log_z();
    Ok(-2.0 * p.beta * interface.len() as f64 + p.lambda * frozen_mag as f64 + z_plus + z_minus)
}

/// Vertex sequences of every contour, for serialization.
pub fn to_vertex_sequences(c: &ContourCollection) -> Vec<Vec<(i32, i32)>> {
    c.contours().iter().map(|k| k.vertices().iter().map(|v| (v.a, v.b)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_region;

    fn dv(a: i32, b: i32) -> DualVertex {
        DualVertex::new(a, b)
    }

    #[test]
    fn plus_config_under_plus_bc_has_no_separating_edges() {
        let region = make_region(4, 4);
        let sigma = SpinConfig::constant(&region, PLUS);
        assert!(separating_edges(&sigma, &BoundaryCondition::AllPlus).unwrap().is_empty());
    }

    #[test]
    fn flat_dobrushin_separating_edges() {
        for n in [0u32, 3, 7] {
            let region = make_region(n, n);
            let sigma = SpinConfig::constant(&region, PLUS);
            let edges = separating_edges(&sigma, &BoundaryCondition::Dobrushin).unwrap();
            let expected: EdgeSet = (0..=n as i32).map(|x| DualEdge::horizontal(x, 0)).collect();
            assert_eq!(edges, expected);
            let i = extract_interface(&sigma, &BoundaryCondition::Dobrushin).unwrap();
            assert_eq!(i.endpoints(), (dv(0, 0), dv(n as i32 + 1, 0)));
            assert_eq!(i.len(), n as usize + 1);
        }
    }

    #[test]
    fn plaquette_is_one_loop() {
        let edges: EdgeSet = [
            DualEdge::horizontal(0, 0),
            DualEdge::horizontal(0, 1),
            DualEdge::vertical(0, 0),
            DualEdge::vertical(1, 0),
        ]
        .into_iter()
        .collect();
        let c = decompose(&edges).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.contours()[0].is_loop());
        assert_eq!(c.contours()[0].vertices().len(), 5);
    }

    /// The configuration of the contour-decomposition figure: 4x4 spins,
    /// rows listed top to bottom.
    fn figure_configuration() -> (LatticeRegion, SpinConfig) {
        // columns x = 0..3, each listed bottom to top
        let cols: [[Spin; 4]; 4] = [
            [PLUS, PLUS, MINUS, MINUS],
            [MINUS, PLUS, MINUS, PLUS],
            [MINUS, MINUS, PLUS, PLUS],
            [MINUS, PLUS, PLUS, PLUS],
        ];
        let region = make_region(3, 3);
        let sigma = SpinConfig::from_fn(&region, |v| cols[v.x as usize][v.y as usize]);
        (region, sigma)
    }

    #[test]
    fn figure_splits_at_shared_vertex() {
        let (_, sigma) = figure_configuration();
        // interior separating edges only, as drawn in the figure
        let all = separating_edges(&sigma, &BoundaryCondition::AllPlus).unwrap();
        let drawn: EdgeSet = all
            .into_iter()
            .filter(|e| {
                let (v, w) = e.primal_edge();
                sigma.get(v).is_some() && sigma.get(w).is_some()
            })
            .collect();
        // the shared vertex is the point (1.5, 1.5), i.e. dual (2, 2)
        let shared = dv(2, 2);
        let degree = drawn.iter().filter(|e| e.endpoints().0 == shared || e.endpoints().1 == shared).count();
        assert_eq!(degree, 4);
        let c = decompose(&drawn).unwrap();
        assert_eq!(c.len(), 2, "{c:?}");
        let green = c.contours().iter().find(|k| k.vertices().contains(&dv(0, 2))).unwrap();
        let purple = c.contours().iter().find(|k| k.vertices().contains(&dv(1, 0))).unwrap();
        assert_ne!(green, purple);
        // green: (-1/2,3/2)->(3/2,3/2)->(3/2,5/2)->(1/2,5/2)->(1/2,7/2)
        let green_pts: Vec<DualVertex> = vec![dv(0, 2), dv(1, 2), dv(2, 2), dv(2, 3), dv(1, 3), dv(1, 4)];
        assert_eq!(green.vertices(), green_pts.as_slice());
        let purple_pts: Vec<DualVertex> = vec![dv(1, 0), dv(1, 1), dv(2, 1), dv(2, 2), dv(3, 2), dv(3, 1), dv(4, 1)];
        assert_eq!(purple.vertices(), purple_pts.as_slice());
    }

    #[test]
    fn degree_three_splits_complete_pair() {
        // edges N, E, S at (5,5): S and E are paired, N ends there
        let v = dv(5, 5);
        let edges: EdgeSet = [v.edge(Side::North), v.edge(Side::East), v.edge(Side::South)].into_iter().collect();
        let c = decompose(&edges).unwrap();
        assert_eq!(c.len(), 2);
        let pair = c.contours().iter().find(|k| k.len() == 2).unwrap();
        assert!(pair.edges().contains(&v.edge(Side::South)));
        assert!(pair.edges().contains(&v.edge(Side::East)));
        // N, E, W: N and W are paired
        let edges: EdgeSet = [v.edge(Side::North), v.edge(Side::East), v.edge(Side::West)].into_iter().collect();
        let c = decompose(&edges).unwrap();
        let pair = c.contours().iter().find(|k| k.len() == 2).unwrap();
        assert!(pair.edges().contains(&v.edge(Side::West)));
    }

    #[test]
    fn duplicate_edges_are_malformed() {
        let e = DualEdge::horizontal(0, 0);
        assert!(matches!(decompose_list(&[e, e]), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn single_minus_is_a_unit_bump() {
        let region = make_region(4, 4);
        let mut sigma = SpinConfig::constant(&region, PLUS);
        sigma.set(Site::new(2, 0), MINUS);
        let i = extract_interface(&sigma, &BoundaryCondition::Dobrushin).unwrap();
        assert_eq!(i.len(), 4 + 1 + 2);
        let (plus, minus) = interface_sides(&i, &region, &BoundaryCondition::Dobrushin).unwrap();
        assert_eq!(minus, vec![Site::new(2, 0)]);
        assert_eq!(plus.len(), 24);
    }

    #[test]
    fn flat_interface_sides() {
        let region = make_region(3, 3);
        let sigma = SpinConfig::constant(&region, PLUS);
        let i = extract_interface(&sigma, &BoundaryCondition::Dobrushin).unwrap();
        let (plus, minus) = interface_sides(&i, &region, &BoundaryCondition::Dobrushin).unwrap();
        assert!(minus.is_empty());
        assert_eq!(plus.len(), 16);
    }

    #[test]
    fn empty_and_flat_collections_give_plus() {
        let region = make_region(3, 2);
        let s = spins_from_contours(&ContourCollection::empty(), &region, &BoundaryCondition::AllPlus).unwrap();
        assert_eq!(s, SpinConfig::constant(&region, PLUS));
        let flat = Contour::from_vertices(&(0..=4).map(|a| dv(a, 0)).collect::<Vec<_>>()).unwrap();
        let c = ContourCollection::new(vec![flat]);
        let s = spins_from_contours(&c, &region, &BoundaryCondition::Dobrushin).unwrap();
        assert_eq!(s, SpinConfig::constant(&region, PLUS));
    }

    #[test]
    fn inconsistent_collection_is_rejected() {
        let region = make_region(3, 2);
        // a lone edge has boundary points that are not source points
        let c = ContourCollection::new(vec![Contour::from_vertices(&[dv(1, 1), dv(2, 1)]).unwrap()]);
        assert!(matches!(
            spins_from_contours(&c, &region, &BoundaryCondition::AllPlus),
            Err(Error::InconsistentCollection)
        ));
    }

    #[test]
    fn interface_needs_two_sources() {
        let region = make_region(2, 2);
        let sigma = SpinConfig::constant(&region, PLUS);
        assert!(extract_interface(&sigma, &BoundaryCondition::AllPlus).is_err());
    }

    #[test]
    fn frozen_sites_of_flat_interface() {
        let region = make_region(3, 3);
        let sigma = SpinConfig::constant(&region, PLUS);
        let i = extract_interface(&sigma, &BoundaryCondition::Dobrushin).unwrap();
        let frozen = frozen_sites(&i, &region).unwrap();
        let bottom: BTreeSet<Site> = (0..=3).map(|x| Site::new(x, 0)).collect();
        assert_eq!(frozen, bottom);
    }

    #[test]
    fn loop_canonical_form_is_orientation_free() {
        let a = Contour::from_vertices(&[dv(0, 0), dv(1, 0), dv(1, 1), dv(0, 1), dv(0, 0)]).unwrap();
        let b = Contour::from_vertices(&[dv(1, 1), dv(1, 0), dv(0, 0), dv(0, 1), dv(1, 1)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interface_weight_identity_on_twelve_sites() {
        use crate::gibbs::exact_distribution;
        let region = make_region(3, 2);
        let bc = BoundaryCondition::Dobrushin;
        for p in [ModelParams::new(0.8, 0.0), ModelParams::new(0.8, 0.3), ModelParams::new(0.6, -0.25)] {
            let d = exact_distribution(&region, &bc, &p).unwrap();
            let mut law: BTreeMap<Vec<DualEdge>, (Interface, f64)> = BTreeMap::new();
            for m in 0..d.n_configs() as u64 {
                let i = extract_interface(&d.config(m), &bc).unwrap();
                law.entry(i.edges().to_vec()).or_insert((i, 0.0)).1 += d.probability(m);
            }
            for (i, mu) in law.values() {
                let w = interface_log_weight(i, &region, &bc, &p).unwrap();
                let predicted = (w - d.log_z()).exp();
                assert!((predicted - mu).abs() < 1e-12, "{predicted} vs {mu}");
            }
        }
    }
}
