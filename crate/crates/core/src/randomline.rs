//! Random-line weights on small dual regions and the duality identities
//! linking them to spin correlations at the dual temperature.
//!
//! Everything here is exact enumeration. Edge sets of a dual region are bit
//! masks over its (at most [`DUAL_EDGE_CAP`]) edges; the region's even
//! subgraphs are generated from a cycle basis, and every edge set with a
//! prescribed odd-vertex set is one particular solution plus an even subgraph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::contour::{decompose, odd_vertices, pairing, ContourCollection, EdgeSet, Interface};
use crate::error::{Error, Result};
use crate::gibbs::{dual_beta, exact_distribution, log_sum_exp, ExactDistribution, ModelParams, SmallIsing};
use crate::lattice::{make_region, source_points, BoundaryCondition, DualEdge, DualVertex, LatticeRegion, Side};

/// Largest dual region enumerated.
pub const DUAL_EDGE_CAP: usize = 24;

const DIRS: [Side; 4] = [Side::North, Side::East, Side::South, Side::West];

/// A finite set of dual edges together with its vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualRegion {
    edges: Vec<DualEdge>,
    vertices: Vec<DualVertex>,
    edge_index: BTreeMap<DualEdge, usize>,
    vertex_index: BTreeMap<DualVertex, usize>,
    ends: Vec<[usize; 2]>,
    incident: Vec<[Option<usize>; 4]>,
}

impl DualRegion {
    pub fn from_edges(edges: impl IntoIterator<Item = DualEdge>) -> Result<Self> {
        let edges: Vec<DualEdge> = edges.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if edges.len() > DUAL_EDGE_CAP {
            return Err(Error::RegionTooLarge { size: edges.len(), cap: DUAL_EDGE_CAP });
        }
        let vertices: Vec<DualVertex> = edges
            .iter()
            .flat_map(|e| {
                let (p, q) = e.endpoints();
                [p, q]
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let edge_index: BTreeMap<DualEdge, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let vertex_index: BTreeMap<DualVertex, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let ends = edges
            .iter()
            .map(|e| {
                let (p, q) = e.endpoints();
                [vertex_index[&p], vertex_index[&q]]
            })
            .collect();
        let incident = vertices
            .iter()
            .map(|v| {
                let mut inc = [None; 4];
                for (k, d) in DIRS.iter().enumerate() {
                    inc[k] = edge_index.get(&v.edge(*d)).copied();
                }
                inc
            })
            .collect();
        Ok(DualRegion { edges, vertices, edge_index, vertex_index, ends, incident })
    }

    /// `Λ*`: dual edges crossing primal edges with an end in `region`.
    pub fn of_region(region: &LatticeRegion) -> Result<Self> {
        DualRegion::from_edges(region.dual_edges())
    }

    /// Dual of the `k x k` primal box at the origin.
    pub fn patch(k: u32) -> Result<Self> {
        assert!(k >= 1);
        DualRegion::of_region(&make_region(k - 1, k - 1))
    }

    pub fn edges(&self) -> &[DualEdge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[DualVertex] {
        &self.vertices
    }

    pub fn contains_edge(&self, e: DualEdge) -> bool {
        self.edge_index.contains_key(&e)
    }

    pub fn contains_vertex(&self, v: DualVertex) -> bool {
        self.vertex_index.contains_key(&v)
    }

    /// Whether every edge of `other` lies in `self`.
    pub fn contains(&self, other: &DualRegion) -> bool {
        other.edges.iter().all(|e| self.contains_edge(*e))
    }

    pub fn mask_of(&self, edges: &EdgeSet) -> Option<u32> {
        let mut m = 0;
        for e in edges {
            m |= 1 << self.edge_index.get(e)?;
        }
        Some(m)
    }

    pub fn edges_of(&self, mask: u32) -> EdgeSet {
        (0..self.edges.len()).filter(|&i| mask >> i & 1 == 1).map(|i| self.edges[i]).collect()
    }

    /// Odd-degree vertices of an edge mask, as a vertex mask.
    pub fn odd_mask(&self, mask: u32) -> u64 {
        let mut odd = 0u64;
        for i in 0..self.edges.len() {
            if mask >> i & 1 == 1 {
                odd ^= 1 << self.ends[i][0];
                odd ^= 1 << self.ends[i][1];
            }
        }
        odd
    }

    /// Edge masks of the contours of `mask`, sorted.
    pub fn components(&self, mask: u32) -> Vec<u32> {
        let n = self.edges.len();
        let mut parent: [u8; DUAL_EDGE_CAP] = [0; DUAL_EDGE_CAP];
        for (i, p) in parent.iter_mut().enumerate().take(n) {
            *p = i as u8;
        }
        fn find(parent: &mut [u8], mut i: usize) -> usize {
            while parent[i] as usize != i {
                parent[i] = parent[parent[i] as usize];
                i = parent[i] as usize;
            }
            i
        }
        let mut touched = 0u64;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                touched |= 1 << self.ends[i][0] | 1 << self.ends[i][1];
            }
        }
        let mut present = Vec::with_capacity(4);
        while touched != 0 {
            let v = touched.trailing_zeros() as usize;
            touched &= touched - 1;
            present.clear();
            for (k, d) in DIRS.iter().enumerate() {
                if let Some(e) = self.incident[v][k] {
                    if mask >> e & 1 == 1 {
                        present.push(*d);
                    }
                }
            }
            for (a, b) in pairing(&present) {
                let ea = self.incident[v][DIRS.iter().position(|d| *d == a).unwrap()].unwrap();
                let eb = self.incident[v][DIRS.iter().position(|d| *d == b).unwrap()].unwrap();
                let (ra, rb) = (find(&mut parent, ea), find(&mut parent, eb));
                if ra != rb {
                    parent[ra] = rb as u8;
                }
            }
        }
        let mut groups = [0u32; DUAL_EDGE_CAP];
        for i in 0..n {
            if mask >> i & 1 == 1 {
                let r = find(&mut parent, i);
                groups[r] |= 1 << i;
            }
        }
        let mut out: Vec<u32> = groups[..n].iter().copied().filter(|&g| g != 0).collect();
        out.sort_unstable();
        out
    }

    /// Whether every contour of `mask` is an open path.
    pub fn loop_free(&self, mask: u32) -> bool {
        self.components(mask).into_iter().all(|c| self.odd_mask(c) != 0)
    }

    /// Spanning forest as parent edges, plus the fundamental cycles.
    fn forest(&self) -> (Vec<Option<(usize, usize)>>, Vec<usize>, Vec<u32>) {
        let nv = self.vertices.len();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
        let mut root = vec![usize::MAX; nv];
        let mut tree = 0u32;
        for r in 0..nv {
            if root[r] != usize::MAX {
                continue;
            }
            root[r] = r;
            let mut queue = VecDeque::from([r]);
            while let Some(v) = queue.pop_front() {
                for e in self.incident[v].iter().flatten() {
                    let w = if self.ends[*e][0] == v { self.ends[*e][1] } else { self.ends[*e][0] };
                    if root[w] == usize::MAX {
                        root[w] = r;
                        parent[w] = Some((v, *e));
                        tree |= 1 << e;
                        queue.push_back(w);
                    }
                }
            }
        }
        let path = |mut v: usize| {
            let mut m = 0u32;
            while let Some((p, e)) = parent[v] {
                m ^= 1 << e;
                v = p;
            }
            m
        };
        let cycles = (0..self.edges.len())
            .filter(|&e| tree >> e & 1 == 0)
            .map(|e| path(self.ends[e][0]) ^ path(self.ends[e][1]) ^ (1 << e))
            .collect();
        (parent, root, cycles)
    }

    /// All even edge masks (every vertex of even degree).
    pub fn even_subgraphs(&self) -> Vec<u32> {
        let (_, _, cycles) = self.forest();
        span(0, &cycles)
    }

    /// All edge masks whose odd-degree vertex set is `boundary`.
    pub fn edge_sets_with_boundary(&self, boundary: &BTreeSet<DualVertex>) -> Result<Vec<u32>> {
        if boundary.len() % 2 == 1 {
            return Err(Error::OddBoundary(boundary.len()));
        }
        if let Some(v) = boundary.iter().find(|v| !self.contains_vertex(**v)) {
            return Err(Error::InvalidRegion(format!("{v:?} is not a vertex of the dual region")));
        }
        let (parent, root, cycles) = self.forest();
        let mut per_root: BTreeMap<usize, usize> = BTreeMap::new();
        let mut particular = 0u32;
        for v in boundary {
            let mut i = self.vertex_index[v];
            *per_root.entry(root[i]).or_default() += 1;
            while let Some((p, e)) = parent[i] {
                particular ^= 1 << e;
                i = p;
            }
        }
        if per_root.values().any(|c| c % 2 == 1) {
            return Ok(Vec::new());
        }
        Ok(span(particular, &cycles))
    }
}

fn span(base: u32, basis: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(1 << basis.len());
    out.push(base);
    for &c in basis {
        for k in 0..out.len() {
            out.push(out[k] ^ c);
        }
    }
    out
}

/// Admissible contour collections with a prescribed boundary.
#[derive(Clone, Debug)]
pub struct AdmissibleFamily {
    region: DualRegion,
    boundary: BTreeSet<DualVertex>,
    masks: Vec<u32>,
}

impl AdmissibleFamily {
    pub fn region(&self) -> &DualRegion {
        &self.region
    }

    pub fn boundary(&self) -> &BTreeSet<DualVertex> {
        &self.boundary
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Edge masks, one per collection.
    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn collections(&self) -> Vec<ContourCollection> {
        self.masks
            .iter()
            .map(|&m| decompose(&self.region.edges_of(m)).expect("sets from a region are well formed"))
            .collect()
    }

    /// Members made of open paths only.
    pub fn loop_free_masks(&self) -> Vec<u32> {
        self.masks.iter().copied().filter(|&m| self.region.loop_free(m)).collect()
    }
}

/// Every admissible collection with boundary `boundary`. Each edge set with
/// that odd-vertex set is its own decomposition, so there is one per set.
pub fn enumerate_contours(region: &DualRegion, boundary: &BTreeSet<DualVertex>) -> Result<AdmissibleFamily> {
    let masks = region.edge_sets_with_boundary(boundary)?;
    Ok(AdmissibleFamily { region: region.clone(), boundary: boundary.clone(), masks })
}

/// Random-line weights of one dual region at one `β`.
#[derive(Clone, Debug)]
pub struct RandomLine {
    region: DualRegion,
    beta: f64,
    evens: Vec<u32>,
    log_z: f64,
}

impl RandomLine {
    pub fn new(region: &DualRegion, beta: f64) -> Self {
        let evens = region.even_subgraphs();
        let log_z = log_sum_exp(evens.iter().map(|g| -2.0 * beta * g.count_ones() as f64));
        RandomLine { region: region.clone(), beta, evens, log_z }
    }

    pub fn region(&self) -> &DualRegion {
        &self.region
    }

    /// `log Z^RL`.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// `log Z^RL(ζ)` for the collection with edge mask `f`.
    pub fn log_z_restricted(&self, f: u32) -> f64 {
        let own = self.region.components(f);
        let terms = self.evens.iter().filter_map(|&g| {
            if g & f != 0 {
                return None;
            }
            let all = self.region.components(f | g);
            own.iter()
                .all(|c| all.binary_search(c).is_ok())
                .then(|| -2.0 * self.beta * (f | g).count_ones() as f64)
        });
        let terms: Vec<f64> = terms.collect();
        log_sum_exp(terms.into_iter())
    }

    /// `q(ζ)` for an edge mask (the collection is its decomposition).
    pub fn q_mask(&self, f: u32) -> f64 {
        (self.log_z_restricted(f) - self.log_z).exp()
    }

    /// `q(ζ)`; zero when `ζ` is not admissible in the region.
    pub fn q(&self, zeta: &ContourCollection) -> f64 {
        match zeta.edge_union().and_then(|u| self.region.mask_of(&u)) {
            Some(m) if zeta.is_admissible_in(&self.region.edges().iter().copied().collect()) => self.q_mask(m),
            _ => 0.0,
        }
    }
}

/// `q_{β*, Λ*}(ζ)` with `β* = dual_beta(β)`; weights carry `e^{-2β|ζ|}`.
pub fn q_weight(zeta: &ContourCollection, region: &DualRegion, beta: f64) -> f64 {
    RandomLine::new(region, beta).q(zeta)
}

/// Free-boundary Ising model on the vertices and edges of a dual region,
/// enumerated once so many correlations can be read off.
pub struct DualIsing {
    index: BTreeMap<DualVertex, usize>,
    dist: ExactDistribution,
}

impl DualIsing {
    pub fn new(region: &DualRegion, beta_star: f64) -> Result<Self> {
        let sys = SmallIsing::on_graph(region.vertices.len(), region.ends.iter().map(|e| (e[0], e[1])).collect())?;
        Ok(DualIsing {
            index: region.vertex_index.iter().map(|(v, i)| (*v, *i)).collect(),
            dist: sys.distribution(&ModelParams::new(beta_star, 0.0)),
        })
    }

    /// `⟨Π_{v ∈ A} σ_v⟩`.
    pub fn correlation(&self, points: &BTreeSet<DualVertex>) -> Result<f64> {
        let mut select = 0u64;
        for v in points {
            let i = self
                .index
                .get(v)
                .ok_or_else(|| Error::InvalidRegion(format!("{v:?} is not a vertex of the dual region")))?;
            select |= 1 << i;
        }
        // a bit set in the mask is a plus spin
        Ok(self.dist.expectation(|m| if (!m & select).count_ones() % 2 == 0 { 1.0 } else { -1.0 }))
    }
}

/// `⟨Π_{v ∈ A} σ_v⟩` of the free-boundary Ising model on the dual region at `β*`.
pub fn correlation_dual(region: &DualRegion, points: &BTreeSet<DualVertex>, beta_star: f64) -> Result<f64> {
    DualIsing::new(region, beta_star)?.correlation(points)
}

/// `⟨σ_v σ_w⟩` at `β*` on the dual region, free boundary.
pub fn two_point_dual(v: DualVertex, w: DualVertex, region: &DualRegion, beta_star: f64) -> Result<f64> {
    if v == w {
        // σ_v² = 1; still reject vertices outside the region
        return correlation_dual(region, &[v].into_iter().collect(), beta_star).map(|_| 1.0);
    }
    correlation_dual(region, &[v, w].into_iter().collect(), beta_star)
}

/// One instance of an exact identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(name: &str, instance: String, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let deviation = (lhs - rhs).abs();
        IdentityCheck { name: name.into(), instance, lhs, rhs, deviation, tolerance, pass: deviation <= tolerance }
    }

    /// Inequality `lhs <= rhs`; the deviation is the size of any violation.
    pub fn at_most(name: &str, instance: String, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let deviation = (lhs - rhs).max(0.0);
        IdentityCheck { name: name.into(), instance, lhs, rhs, deviation, tolerance, pass: deviation <= tolerance }
    }

    /// A count of violations that must be zero.
    pub fn violations(name: &str, instance: String, count: usize) -> Self {
        IdentityCheck::new(name, instance, count as f64, 0.0, 0.0)
    }

    pub fn into_result(self) -> Result<IdentityCheck> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::IdentityViolation(format!(
                "{} [{}]: {} vs {} (deviation {:e})",
                self.name, self.instance, self.lhs, self.rhs, self.deviation
            )))
        }
    }
}

pub const IDENTITY_TOLERANCE: f64 = 1e-10;

fn describe(points: &BTreeSet<DualVertex>) -> String {
    let inner: Vec<String> = points.iter().map(|v| format!("({},{})", v.a, v.b)).collect();
    format!("A*={{{}}}", inner.join(","))
}

/// `Σ_{∂ζ = A*} q(ζ)` over collections of open paths against
/// `⟨Π σ⟩` at `beta_star`. Normally `beta_star = dual_beta(beta)`; the
/// separate argument exists so the check itself can be tested.
pub fn duality_check_at(
    rl: &RandomLine,
    points: &BTreeSet<DualVertex>,
    beta_star: f64,
) -> Result<IdentityCheck> {
    duality_check_with(rl, &DualIsing::new(&rl.region, beta_star)?, points)
}

/// As [`duality_check_at`] with a prepared dual model.
pub fn duality_check_with(rl: &RandomLine, dual: &DualIsing, points: &BTreeSet<DualVertex>) -> Result<IdentityCheck> {
    let family = enumerate_contours(&rl.region, points)?;
    let lhs: f64 = family.loop_free_masks().into_iter().map(|m| rl.q_mask(m)).sum();
    let rhs = dual.correlation(points)?;
    Ok(IdentityCheck::new("random-line identity", describe(points), lhs, rhs, IDENTITY_TOLERANCE))
}

/// The random-line identity for one source set; a mismatch is an error.
pub fn verify_duality(region: &DualRegion, beta: f64, points: &BTreeSet<DualVertex>) -> Result<IdentityCheck> {
    let rl = RandomLine::new(region, beta);
    duality_check_at(&rl, points, dual_beta(beta))?.into_result()
}

/// `Z_{+,β,Λ} = Z^RL_{β*,Λ*}` at zero field.
pub fn partition_identity(region: &LatticeRegion, beta: f64) -> Result<IdentityCheck> {
    let rl = RandomLine::new(&DualRegion::of_region(region)?, beta);
    let z_plus = exact_distribution(region, &BoundaryCondition::AllPlus, &ModelParams::new(beta, 0.0))?.log_z();
    Ok(IdentityCheck::new(
        "plus partition function",
        format!("{} sites", region.site_count()),
        z_plus.exp(),
        rl.log_z().exp(),
        IDENTITY_TOLERANCE * z_plus.exp().max(1.0),
    ))
}

/// `Z_η / Z_+` by exact enumeration.
pub fn partition_ratio(bc: &BoundaryCondition, region: &LatticeRegion, p: &ModelParams) -> Result<f64> {
    let z_eta = exact_distribution(region, bc, p)?.log_z();
    let z_plus = exact_distribution(region, &BoundaryCondition::AllPlus, p)?.log_z();
    Ok((z_eta - z_plus).exp())
}

/// `Σ q(ζ)` over single open paths `ζ` with `∂ζ = ∂η`, at zero field.
pub fn random_line_ratio(bc: &BoundaryCondition, region: &LatticeRegion, beta: f64) -> Result<f64> {
    let dual = DualRegion::of_region(region)?;
    let rl = RandomLine::new(&dual, beta);
    let sources: BTreeSet<DualVertex> = source_points(region, bc)?.into_iter().collect();
    let family = enumerate_contours(&dual, &sources)?;
    Ok(family.loop_free_masks().into_iter().map(|m| rl.q_mask(m)).sum())
}

/// Interface law: `μ(𝓘 = γ) = q(γ) / ⟨σ_W σ_E⟩*` for every admissible
/// interface `γ`, at zero field. One check per interface.
pub fn interface_law_checks(region: &LatticeRegion, bc: &BoundaryCondition, beta: f64) -> Result<Vec<IdentityCheck>> {
    interface_law_checks_at(region, bc, beta, dual_beta(beta))
}

pub fn interface_law_checks_at(
    region: &LatticeRegion,
    bc: &BoundaryCondition,
    beta: f64,
    beta_star: f64,
) -> Result<Vec<IdentityCheck>> {
    use crate::contour::extract_interface;
    let dual = DualRegion::of_region(region)?;
    let rl = RandomLine::new(&dual, beta);
    let sources: Vec<DualVertex> = source_points(region, bc)?;
    let [w, e] = match sources.as_slice() {
        [w, e] => [*w, *e],
        _ => return Err(Error::InvalidConfig("interface law needs a ±-type boundary condition".into())),
    };
    let corr = two_point_dual(w, e, &dual, beta_star)?;
    let dist = exact_distribution(region, bc, &ModelParams::new(beta, 0.0))?;
    let mut law: BTreeMap<EdgeSet, f64> = BTreeMap::new();
    for m in 0..dist.n_configs() as u64 {
        let i = extract_interface(&dist.config(m), bc)?;
        *law.entry(i.edge_set()).or_default() += dist.probability(m);
    }
    let family = enumerate_contours(&dual, &[w, e].into_iter().collect())?;
    let mut out = Vec::new();
    let mut total_q = 0.0;
    for m in family.loop_free_masks() {
        let edges = dual.edges_of(m);
        let q = rl.q_mask(m);
        total_q += q;
        let mu = law.get(&edges).copied().unwrap_or(0.0);
        out.push(IdentityCheck::new("interface law", format!("|γ|={}", edges.len()), mu, q / corr, IDENTITY_TOLERANCE));
    }
    // every interface of the enumeration is accounted for
    out.push(IdentityCheck::new(
        "interface law",
        format!("{} interfaces in total", law.len()),
        1.0,
        total_q / corr,
        IDENTITY_TOLERANCE,
    ));
    Ok(out)
}

/// Whether the interface meets the dual columns of its endpoints only at
/// the endpoints themselves.
pub fn no_backtrack(interface: &Interface) -> bool {
    let (w, e) = interface.endpoints();
    let columns = [w.a, e.a];
    let hits: Vec<&DualVertex> = interface.vertices().iter().filter(|v| columns.contains(&v.a)).collect();
    hits.len() == 2 && hits.iter().all(|v| **v == w || **v == e)
}

/// Odd-degree vertices of a collection's edges.
pub fn boundary_of(edges: &EdgeSet) -> BTreeSet<DualVertex> {
    odd_vertices(edges.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{extract_interface, Contour};
    use crate::gibbs::{self_dual_beta, SpinConfig};
    use crate::lattice::{PLUS, MINUS, Site};

    fn dv(a: i32, b: i32) -> DualVertex {
        DualVertex::new(a, b)
    }

    fn set(vs: &[DualVertex]) -> BTreeSet<DualVertex> {
        vs.iter().copied().collect()
    }

    /// Brute force over all subsets: parity plus self-decomposition.
    fn brute_force_count(region: &DualRegion, boundary: &BTreeSet<DualVertex>) -> usize {
        let n = region.edges().len();
        (0u32..1 << n)
            .filter(|&m| {
                let edges = region.edges_of(m);
                boundary_of(&edges) == *boundary && {
                    let c = decompose(&edges).unwrap();
                    c.is_admissible_in(&region.edges().iter().copied().collect())
                }
            })
            .count()
    }

    #[test]
    fn patch_sizes() {
        assert_eq!(DualRegion::patch(1).unwrap().edges().len(), 4);
        assert_eq!(DualRegion::patch(2).unwrap().edges().len(), 12);
        assert_eq!(DualRegion::patch(3).unwrap().edges().len(), 24);
        assert!(matches!(DualRegion::patch(4), Err(Error::RegionTooLarge { size: 40, cap: 24 })));
    }

    #[test]
    fn single_plaquette_family() {
        let r = DualRegion::patch(1).unwrap();
        let f = enumerate_contours(&r, &BTreeSet::new()).unwrap();
        assert_eq!(f.len(), 2);
        let c = f.collections();
        assert!(c.contains(&ContourCollection::empty()));
        assert!(c.iter().any(|k| k.len() == 1 && k.contours()[0].is_loop()));
    }

    #[test]
    fn counts_match_brute_force() {
        let r = DualRegion::patch(2).unwrap();
        for boundary in [set(&[dv(1, 1), dv(2, 1)]), set(&[dv(0, 0), dv(2, 2)]), BTreeSet::new(), set(&[dv(0, 0), dv(1, 0), dv(2, 1), dv(2, 2)])] {
            let f = enumerate_contours(&r, &boundary).unwrap();
            assert_eq!(f.len(), brute_force_count(&r, &boundary));
            for c in f.collections() {
                assert_eq!(c.boundary(), boundary);
                assert_eq!(decompose(&c.edge_union().unwrap()).unwrap(), c);
            }
            let distinct: BTreeSet<u32> = f.masks().iter().copied().collect();
            assert_eq!(distinct.len(), f.len());
        }
    }

    #[test]
    fn tree_plus_cycle_has_two_even_sets() {
        let edges = [
            DualEdge::horizontal(0, 0),
            DualEdge::horizontal(0, 1),
            DualEdge::vertical(0, 0),
            DualEdge::vertical(1, 0),
            DualEdge::horizontal(1, 0),
            DualEdge::vertical(2, 0),
        ];
        let r = DualRegion::from_edges(edges).unwrap();
        assert_eq!(enumerate_contours(&r, &BTreeSet::new()).unwrap().len(), 2);
    }

    #[test]
    fn odd_boundary_and_cap_errors() {
        let r = DualRegion::patch(2).unwrap();
        assert!(matches!(enumerate_contours(&r, &set(&[dv(0, 0)])), Err(Error::OddBoundary(1))));
    }

    #[test]
    fn q_of_empty_is_one_and_finite_energy() {
        let r = DualRegion::patch(2).unwrap();
        let rl = RandomLine::new(&r, 0.8);
        assert!((rl.q(&ContourCollection::empty()) - 1.0).abs() < 1e-14);
        let zeta = ContourCollection::new(vec![Contour::from_vertices(&[dv(0, 1), dv(1, 1), dv(2, 1)]).unwrap()]);
        let q = rl.q(&zeta);
        // independent value straight from the definition, over all edge subsets
        let f = r.mask_of(&zeta.edge_union().unwrap()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for e in 0u32..1 << r.edges().len() {
            let edges = r.edges_of(e);
            let w = (-1.6 * edges.len() as f64).exp();
            if boundary_of(&edges).is_empty() {
                den += w;
            }
            if e & f == f && boundary_of(&r.edges_of(e & !f)).is_empty() {
                let d = decompose(&edges).unwrap();
                if zeta.contours().iter().all(|c| d.contours().contains(c)) {
                    num += w;
                }
            }
        }
        assert!((q - num / den).abs() < 1e-14, "{q} {}", num / den);
        // finite energy with C = 2β + log 2 on this patch
        assert!(q >= (-2.0 * (1.6 + 2f64.ln())).exp() && q < 1.0, "{q}");
        // outside the region the weight is zero
        let far = ContourCollection::new(vec![Contour::from_vertices(&[dv(7, 7), dv(8, 7)]).unwrap()]);
        assert_eq!(rl.q(&far), 0.0);
    }

    #[test]
    fn q_decreases_with_domain() {
        let small = DualRegion::patch(2).unwrap();
        let large = DualRegion::patch(3).unwrap();
        assert!(large.contains(&small));
        let (rs, rl) = (RandomLine::new(&small, 0.8), RandomLine::new(&large, 0.8));
        let f = enumerate_contours(&small, &set(&[dv(0, 1), dv(2, 2)])).unwrap();
        for zeta in f.collections() {
            assert!(rl.q(&zeta) <= rs.q(&zeta) + 1e-15);
        }
    }

    #[test]
    fn two_point_values() {
        let r = DualRegion::patch(2).unwrap();
        assert!((two_point_dual(dv(1, 1), dv(1, 1), &r, 0.3).unwrap() - 1.0).abs() < 1e-14);
        assert!(two_point_dual(dv(0, 0), dv(2, 2), &r, 0.0).unwrap().abs() < 1e-14);
        let big = DualRegion::patch(3).unwrap();
        let b = dual_beta(0.8);
        assert!(two_point_dual(dv(0, 0), dv(2, 2), &big, b).unwrap() >= two_point_dual(dv(0, 0), dv(2, 2), &r, b).unwrap());
    }

    #[test]
    fn duality_on_small_patch() {
        let r = DualRegion::patch(2).unwrap();
        assert!((verify_duality(&r, 0.8, &BTreeSet::new()).unwrap().lhs - 1.0).abs() < 1e-14);
        verify_duality(&r, 0.8, &set(&[dv(0, 0), dv(2, 2)])).unwrap();
        verify_duality(&r, 0.8, &set(&[dv(0, 0), dv(2, 0)])).unwrap();
        verify_duality(&r, 0.5, &set(&[dv(0, 0), dv(1, 1), dv(2, 0), dv(2, 2)])).unwrap();
        // corrupted dual temperature is caught
        let rl = RandomLine::new(&r, 0.8);
        let bad = duality_check_at(&rl, &set(&[dv(0, 0), dv(2, 2)]), dual_beta(0.8) * 1.1).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn partition_functions_agree() {
        for (n, m) in [(0, 0), (1, 1), (2, 1)] {
            let c = partition_identity(&make_region(n, m), 0.8).unwrap();
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn partition_ratio_values() {
        let region = make_region(2, 1);
        let p = ModelParams::new(0.8, 0.0);
        assert!((partition_ratio(&BoundaryCondition::AllPlus, &region, &p).unwrap() - 1.0).abs() < 1e-14);
        let exact = partition_ratio(&BoundaryCondition::Dobrushin, &region, &p).unwrap();
        let rl = random_line_ratio(&BoundaryCondition::Dobrushin, &region, 0.8).unwrap();
        assert!((exact - rl).abs() < 1e-10, "{exact} {rl}");
    }

    #[test]
    fn interface_law_on_small_box() {
        for c in interface_law_checks(&make_region(2, 1), &BoundaryCondition::Dobrushin, 0.8).unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn concatenation_and_bk() {
        let r = DualRegion::patch(2).unwrap();
        let rl = RandomLine::new(&r, self_dual_beta() + 0.2);
        let all = r.edges().len();
        let admissible: Vec<u32> = (0u32..1 << all).filter(|&m| r.loop_free(m) || r.odd_mask(m) == 0).collect();
        let mut checked = 0;
        for &a in admissible.iter().step_by(37) {
            for &b in admissible.iter().step_by(41) {
                if a & b != 0 || a == 0 || b == 0 {
                    continue;
                }
                let joint = a | b;
                assert!(rl.q_mask(joint) >= rl.q_mask(a) * rl.q_mask(b) - 1e-15);
                checked += 1;
            }
        }
        assert!(checked > 100);
        // BK: paths v1 -> v2 -> v3 against the product of the legs
        let (v1, v2, v3) = (dv(0, 0), dv(1, 1), dv(2, 2));
        let via: f64 = enumerate_contours(&r, &set(&[v1, v3]))
            .unwrap()
            .loop_free_masks()
            .into_iter()
            .filter(|&m| {
                let i = r.vertex_index[&v2];
                (0..all).any(|e| m >> e & 1 == 1 && r.ends[e].contains(&i))
            })
            .map(|m| rl.q_mask(m))
            .sum();
        let leg = |a, b| -> f64 {
            enumerate_contours(&r, &set(&[a, b])).unwrap().loop_free_masks().into_iter().map(|m| rl.q_mask(m)).sum()
        };
        assert!(via <= leg(v1, v2) * leg(v2, v3) + 1e-15);
    }

    #[test]
    fn no_backtrack_cases() {
        let region = make_region(4, 4);
        let flat = extract_interface(&SpinConfig::constant(&region, PLUS), &BoundaryCondition::Dobrushin).unwrap();
        assert!(no_backtrack(&flat));
        let mut sigma = SpinConfig::constant(&region, PLUS);
        sigma.set(Site::new(0, 0), MINUS);
        let up = extract_interface(&sigma, &BoundaryCondition::Dobrushin).unwrap();
        assert!(!no_backtrack(&up));
    }
}
