//! Primal boxes, their duals, boundary conditions and the enlargement
//! regions built around vertical strips.
//!
//! A dual vertex `(a, b)` stands for the point `(a - 1/2, b - 1/2)`, so the
//! unit square around site `(x, y)` has corners `(x, y)`, `(x + 1, y)`,
//! `(x, y + 1)` and `(x + 1, y + 1)`. All dual geometry stays in integers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Spin = i8;
pub const PLUS: Spin = 1;
pub const MINUS: Spin = -1;

/// A vertex of the primal lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    pub fn neighbors(self) -> [Site; 4] {
        [
            Site::new(self.x + 1, self.y),
            Site::new(self.x, self.y + 1),
            Site::new(self.x - 1, self.y),
            Site::new(self.x, self.y - 1),
        ]
    }
}

// Raster order: rows bottom to top, left to right within a row.
impl Ord for Site {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Site {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    North,
    East,
    South,
    West,
}

/// Closed integer rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
}

impl Rect {
    pub fn new(x_min: i32, x_max: i32, y_min: i32, y_max: i32) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::InvalidRegion(format!(
                "empty rectangle [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        Ok(Rect { x_min, x_max, y_min, y_max })
    }

    pub fn contains(&self, v: Site) -> bool {
        (self.x_min..=self.x_max).contains(&v.x) && (self.y_min..=self.y_max).contains(&v.y)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x_min <= other.x_min
            && other.x_max <= self.x_max
            && self.y_min <= other.y_min
            && other.y_max <= self.y_max
    }

    pub fn width(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.y_max - self.y_min + 1) as usize
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        Rect::new(
            self.x_min.max(other.x_min),
            self.x_max.min(other.x_max),
            self.y_min.max(other.y_min),
            self.y_max.min(other.y_max),
        )
        .ok()
    }

    /// Outer boundary segment on one side.
    pub fn outer_side(&self, side: Side) -> Vec<Site> {
        match side {
            Side::West => (self.y_min..=self.y_max).map(|y| Site::new(self.x_min - 1, y)).collect(),
            Side::East => (self.y_min..=self.y_max).map(|y| Site::new(self.x_max + 1, y)).collect(),
            Side::South => (self.x_min..=self.x_max).map(|x| Site::new(x, self.y_min - 1)).collect(),
            Side::North => (self.x_min..=self.x_max).map(|x| Site::new(x, self.y_max + 1)).collect(),
        }
    }

    /// Inner boundary segment on one side (sites of the rectangle touching that side).
    pub fn inner_side(&self, side: Side) -> Vec<Site> {
        match side {
            Side::West => (self.y_min..=self.y_max).map(|y| Site::new(self.x_min, y)).collect(),
            Side::East => (self.y_min..=self.y_max).map(|y| Site::new(self.x_max, y)).collect(),
            Side::South => (self.x_min..=self.x_max).map(|x| Site::new(x, self.y_min)).collect(),
            Side::North => (self.x_min..=self.x_max).map(|x| Site::new(x, self.y_max)).collect(),
        }
    }
}

/// A finite region of `Z^2`: a rectangle or a union of two rectangles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeRegion {
    rects: Vec<Rect>,
}

/// `[0, n] x [0, m]`.
pub fn make_region(n: u32, m: u32) -> LatticeRegion {
    LatticeRegion::from(Rect { x_min: 0, x_max: n as i32, y_min: 0, y_max: m as i32 })
}

impl From<Rect> for LatticeRegion {
    fn from(r: Rect) -> Self {
        LatticeRegion { rects: vec![r] }
    }
}

impl LatticeRegion {
    pub fn rectangle(x_min: i32, x_max: i32, y_min: i32, y_max: i32) -> Result<Self> {
        Ok(Rect::new(x_min, x_max, y_min, y_max)?.into())
    }

    /// Union with another region. At most two constituent rectangles are kept;
    /// a rectangle contained in the other is dropped.
    pub fn union(&self, other: &LatticeRegion) -> Result<LatticeRegion> {
        let mut rects: Vec<Rect> = Vec::new();
        for r in self.rects.iter().chain(other.rects.iter()) {
            if rects.iter().any(|q| q.contains_rect(r)) {
                continue;
            }
            rects.retain(|q| !r.contains_rect(q));
            rects.push(*r);
        }
        if rects.len() > 2 {
            return Err(Error::InvalidRegion("more than two rectangles in a union".into()));
        }
        rects.sort();
        Ok(LatticeRegion { rects })
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// The region as a single rectangle, if it is one.
    pub fn as_rect(&self) -> Option<Rect> {
        match self.rects.as_slice() {
            [r] => Some(*r),
            _ => None,
        }
    }

    pub fn bounding_box(&self) -> Rect {
        let mut it = self.rects.iter();
        let mut bb = *it.next().expect("region has at least one rectangle");
        for r in it {
            bb.x_min = bb.x_min.min(r.x_min);
            bb.x_max = bb.x_max.max(r.x_max);
            bb.y_min = bb.y_min.min(r.y_min);
            bb.y_max = bb.y_max.max(r.y_max);
        }
        bb
    }

    pub fn contains(&self, v: Site) -> bool {
        self.rects.iter().any(|r| r.contains(v))
    }

    /// Sites in raster order.
    pub fn sites(&self) -> Vec<Site> {
        let bb = self.bounding_box();
        let mut out = Vec::new();
        for y in bb.y_min..=bb.y_max {
            for x in bb.x_min..=bb.x_max {
                let v = Site::new(x, y);
                if self.contains(v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn site_count(&self) -> usize {
        match self.rects.as_slice() {
            [r] => r.area(),
            [a, b] => a.area() + b.area() - a.intersect(b).map_or(0, |r| r.area()),
            _ => self.sites().len(),
        }
    }

    /// Edges with both endpoints in the region, each listed once as
    /// `(v, v + e_x)` or `(v, v + e_y)`.
    pub fn interior_edges(&self) -> Vec<(Site, Site)> {
        let mut out = Vec::new();
        for v in self.sites() {
            for w in [Site::new(v.x + 1, v.y), Site::new(v.x, v.y + 1)] {
                if self.contains(w) {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// Pairs `(v, w)` with `v` inside and `w` an exterior neighbour.
    pub fn boundary_edges(&self) -> Vec<(Site, Site)> {
        let mut out = Vec::new();
        for v in self.sites() {
            for w in v.neighbors() {
                if !self.contains(w) {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// `∂Λ`: exterior vertices adjacent to the region.
    pub fn outer_boundary(&self) -> Vec<Site> {
        let set: BTreeSet<Site> = self.boundary_edges().into_iter().map(|(_, w)| w).collect();
        set.into_iter().collect()
    }

    /// Sites of the region adjacent to its complement.
    pub fn inner_boundary(&self) -> Vec<Site> {
        let set: BTreeSet<Site> = self.boundary_edges().into_iter().map(|(v, _)| v).collect();
        set.into_iter().collect()
    }

    /// Dual vertices at the corners of the unit squares around the sites.
    pub fn dual_vertices(&self) -> Vec<DualVertex> {
        let mut set = BTreeSet::new();
        for v in self.sites() {
            for (da, db) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                set.insert(DualVertex::new(v.x + da, v.y + db));
            }
        }
        set.into_iter().collect()
    }

    /// Dual edges crossing primal edges with at least one endpoint in the region.
    pub fn dual_edges(&self) -> Vec<DualEdge> {
        let mut set = BTreeSet::new();
        for v in self.sites() {
            for w in v.neighbors() {
                set.insert(DualEdge::crossing(v, w));
            }
        }
        set.into_iter().collect()
    }

    /// Whether `e` crosses a primal edge with at least one end in the region.
    pub fn has_dual_edge(&self, e: DualEdge) -> bool {
        let (v, w) = e.primal_edge();
        self.contains(v) || self.contains(w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualVertex {
    pub a: i32,
    pub b: i32,
}

impl DualVertex {
    pub const fn new(a: i32, b: i32) -> Self {
        DualVertex { a, b }
    }

    /// Geometric position `(a - 1/2, b - 1/2)`.
    pub fn point(self) -> (f64, f64) {
        (self.a as f64 - 0.5, self.b as f64 - 0.5)
    }

    /// Incident dual edge in the given compass direction.
    pub fn edge(self, dir: Side) -> DualEdge {
        let DualVertex { a, b } = self;
        match dir {
            Side::East => DualEdge { a, b, dir: Orientation::Horizontal },
            Side::West => DualEdge { a: a - 1, b, dir: Orientation::Horizontal },
            Side::North => DualEdge { a, b, dir: Orientation::Vertical },
            Side::South => DualEdge { a, b: b - 1, dir: Orientation::Vertical },
        }
    }

    /// The (up to four) sites around this dual vertex as `[sw, se, nw, ne]`.
    pub fn surrounding_sites(self) -> [Site; 4] {
        let DualVertex { a, b } = self;
        [Site::new(a - 1, b - 1), Site::new(a, b - 1), Site::new(a - 1, b), Site::new(a, b)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A dual edge, stored by its south-west endpoint: `(a, b)-(a+1, b)` when
/// horizontal, `(a, b)-(a, b+1)` when vertical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualEdge {
    pub a: i32,
    pub b: i32,
    pub dir: Orientation,
}

impl DualEdge {
    pub fn horizontal(a: i32, b: i32) -> Self {
        DualEdge { a, b, dir: Orientation::Horizontal }
    }

    pub fn vertical(a: i32, b: i32) -> Self {
        DualEdge { a, b, dir: Orientation::Vertical }
    }

    pub fn endpoints(self) -> (DualVertex, DualVertex) {
        let s = DualVertex::new(self.a, self.b);
        match self.dir {
            Orientation::Horizontal => (s, DualVertex::new(self.a + 1, self.b)),
            Orientation::Vertical => (s, DualVertex::new(self.a, self.b + 1)),
        }
    }

    /// The dual edge between two adjacent dual vertices.
    pub fn between(u: DualVertex, v: DualVertex) -> Option<DualEdge> {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        match (hi.a - lo.a, hi.b - lo.b) {
            (1, 0) => Some(DualEdge::horizontal(lo.a, lo.b)),
            (0, 1) => Some(DualEdge::vertical(lo.a, lo.b)),
            _ => None,
        }
    }

    /// The primal edge this dual edge crosses, as `(lower/left, upper/right)`.
    pub fn primal_edge(self) -> (Site, Site) {
        match self.dir {
            Orientation::Horizontal => (Site::new(self.a, self.b - 1), Site::new(self.a, self.b)),
            Orientation::Vertical => (Site::new(self.a - 1, self.b), Site::new(self.a, self.b)),
        }
    }

    /// The dual edge crossing the primal edge `{v, w}`.
    ///
    /// Panics if `v` and `w` are not nearest neighbours.
    pub fn crossing(v: Site, w: Site) -> DualEdge {
        let (lo, hi) = if v <= w { (v, w) } else { (w, v) };
        match (hi.x - lo.x, hi.y - lo.y) {
            (0, 1) => DualEdge::horizontal(hi.x, hi.y),
            (1, 0) => DualEdge::vertical(hi.x, hi.y),
            _ => panic!("{v:?} and {w:?} are not adjacent"),
        }
    }

    /// Direction of this edge as seen from its endpoint `v`.
    pub fn direction_from(self, v: DualVertex) -> Side {
        let (s, t) = self.endpoints();
        match (self.dir, v == s) {
            (Orientation::Horizontal, true) => Side::East,
            (Orientation::Horizontal, false) => {
                debug_assert_eq!(v, t);
                Side::West
            }
            (Orientation::Vertical, true) => Side::North,
            (Orientation::Vertical, false) => Side::South,
        }
    }
}

/// Exterior spin assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    AllPlus,
    AllMinus,
    /// Plus at `y >= 0`, minus below.
    Dobrushin,
    /// Minus at and below height `h`, plus above.
    PlusMinusAtHeight(i32),
    Explicit(BTreeMap<Site, Spin>),
}

impl BoundaryCondition {
    /// Spin of an exterior vertex.
    pub fn boundary_spin(&self, v: Site) -> Result<Spin> {
        Ok(match self {
            BoundaryCondition::AllPlus => PLUS,
            BoundaryCondition::AllMinus => MINUS,
            BoundaryCondition::Dobrushin => {
                if v.y >= 0 {
                    PLUS
                } else {
                    MINUS
                }
            }
            BoundaryCondition::PlusMinusAtHeight(h) => {
                if v.y > *h {
                    PLUS
                } else {
                    MINUS
                }
            }
            BoundaryCondition::Explicit(map) => *map.get(&v).ok_or(Error::VertexNotCovered(v))?,
        })
    }

    /// Whether the condition switches sign across a single horizontal line.
    pub fn is_plus_minus_type(&self) -> bool {
        matches!(self, BoundaryCondition::Dobrushin | BoundaryCondition::PlusMinusAtHeight(_))
    }

    /// Sitewise order `self <= other` on the exterior of `region`.
    pub fn le_on(&self, other: &BoundaryCondition, region: &LatticeRegion) -> Result<bool> {
        for w in region.outer_boundary() {
            if self.boundary_spin(w)? > other.boundary_spin(w)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Source points `∂η`: dual vertices of odd degree in the boundary part of
/// any separating edge set. They do not depend on the interior spins.
pub fn source_points(region: &LatticeRegion, bc: &BoundaryCondition) -> Result<Vec<DualVertex>> {
    let mut degree: BTreeMap<DualVertex, u32> = BTreeMap::new();
    for (v, w) in region.boundary_edges() {
        // interior spin taken as +1; flipping interior spins preserves parity
        if bc.boundary_spin(w)? == MINUS {
            let (p, q) = DualEdge::crossing(v, w).endpoints();
            *degree.entry(p).or_default() += 1;
            *degree.entry(q).or_default() += 1;
        }
    }
    Ok(degree.into_iter().filter(|(_, d)| d % 2 == 1).map(|(v, _)| v).collect())
}

/// The strip, its enlargement and the derived upper, lower and T-shaped regions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enlargements {
    pub strip: LatticeRegion,
    pub full: LatticeRegion,
    pub upper: LatticeRegion,
    pub lower: LatticeRegion,
    pub t_shape: LatticeRegion,
}

/// Enlargements of the strip `[x_w, x_e] x [0, n]` by `r`, split at height `h`,
/// clipped to the ambient box `[0, n]^2`.
pub fn make_enlargements(x_w: i32, x_e: i32, n: i32, r: i32, h: i32) -> Result<Enlargements> {
    if x_w > x_e {
        return Err(Error::InvalidStrip { x_w, x_e });
    }
    if x_w < 0 || x_e > n || r < 0 || h < 0 || h > n {
        return Err(Error::InvalidRegion(format!(
            "enlargement parameters out of range: x_w={x_w}, x_e={x_e}, n={n}, r={r}, h={h}"
        )));
    }
    let strip = Rect::new(x_w, x_e, 0, n)?;
    let full = Rect::new((x_w - r).max(0), (x_e + r).min(n), 0, n)?;
    let upper = Rect::new(full.x_min, full.x_max, h, n)?;
    let lower = Rect::new(full.x_min, full.x_max, 0, h)?;
    let strip = LatticeRegion::from(strip);
    let t_shape = strip.union(&upper.into())?;
    Ok(Enlargements {
        strip,
        full: full.into(),
        upper: upper.into(),
        lower: lower.into(),
        t_shape,
    })
}
