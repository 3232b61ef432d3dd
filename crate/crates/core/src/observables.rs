//! Interface statistics: column heights and overhangs, area below the
//! interface, the bottom minus cluster, crossings and circuits, multi-point
//! exceedances, stopping domains and spikiness.
//!
//! Heights use the shifted convention: the horizontal dual edge
//! `(a, b)-(a + 1, b)` sits at `y = b - 1/2` and is reported as height `b`,
//! so the flat Dobrushin interface has height 0 everywhere.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::contour::{interface_configuration, Interface};
use crate::error::{Error, Result};
use crate::gibbs::SpinConfig;
use crate::lattice::{BoundaryCondition, LatticeRegion, Orientation, Rect, Site, Spin, MINUS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightProfile {
    x_min: i32,
    plus: Vec<i32>,
    minus: Vec<i32>,
}

impl HeightProfile {
    /// Profile from explicit columns starting at `x_min`.
    pub fn from_columns(x_min: i32, plus: Vec<i32>, minus: Vec<i32>) -> Result<Self> {
        if plus.len() != minus.len() || plus.is_empty() {
            return Err(Error::InvalidConfig("height columns must be nonempty and of equal length".into()));
        }
        if plus.iter().zip(&minus).any(|(p, m)| m > p) {
            return Err(Error::InvalidConfig("hgt_minus exceeds hgt_plus".into()));
        }
        Ok(HeightProfile { x_min, plus, minus })
    }

    pub fn x_min(&self) -> i32 {
        self.x_min
    }

    pub fn x_max(&self) -> i32 {
        self.x_min + self.plus.len() as i32 - 1
    }

    pub fn columns(&self) -> std::ops::RangeInclusive<i32> {
        self.x_min..=self.x_max()
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    fn idx(&self, x: i32) -> usize {
        assert!(self.columns().contains(&x), "column {x} outside the profile");
        (x - self.x_min) as usize
    }

    pub fn hgt_plus(&self, x: i32) -> i32 {
        self.plus[self.idx(x)]
    }

    pub fn hgt_minus(&self, x: i32) -> i32 {
        self.minus[self.idx(x)]
    }

    pub fn overhang(&self, x: i32) -> i32 {
        self.hgt_plus(x) - self.hgt_minus(x)
    }

    pub fn plus(&self) -> &[i32] {
        &self.plus
    }

    pub fn minus(&self) -> &[i32] {
        &self.minus
    }

    /// `max_x hgt⁺_x`.
    pub fn max_height(&self) -> i32 {
        *self.plus.iter().max().unwrap()
    }

    pub fn height(&self, x: i32, kind: HeightKind) -> i32 {
        match kind {
            HeightKind::Plus => self.hgt_plus(x),
            HeightKind::Minus => self.hgt_minus(x),
        }
    }
}

/// Which of the two column heights an event reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeightKind {
    Plus,
    Minus,
}

/// Highest and lowest crossing of every column spanned by the interface.
pub fn height_profile(interface: &Interface) -> Result<HeightProfile> {
    let horizontal = interface.edges().iter().filter(|e| e.dir == Orientation::Horizontal);
    let (mut lo, mut hi) = (i32::MAX, i32::MIN);
    for e in horizontal.clone() {
        lo = lo.min(e.a);
        hi = hi.max(e.a);
    }
    if lo > hi {
        return Err(Error::InternalInvariant("interface crosses no column".into()));
    }
    let width = (hi - lo + 1) as usize;
    let mut plus = vec![i32::MIN; width];
    let mut minus = vec![i32::MAX; width];
    for e in horizontal {
        let k = (e.a - lo) as usize;
        plus[k] = plus[k].max(e.b);
        minus[k] = minus[k].min(e.b);
    }
    if plus.contains(&i32::MIN) {
        return Err(Error::InternalInvariant("interface skips a column".into()));
    }
    Ok(HeightProfile { x_min: lo, plus, minus })
}

/// Scalar summary of one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub area_below: usize,
    pub minus_component: usize,
    pub max_height: i32,
    pub overhang_max: i32,
    pub interface_length: usize,
}

/// `|Λ⁻(𝓘)|`.
pub fn area_below(interface: &Interface, region: &LatticeRegion, bc: &BoundaryCondition) -> Result<usize> {
    let sigma = interface_configuration(interface, region, bc)?;
    Ok(sigma.spins().iter().filter(|&&s| s == MINUS).count())
}

/// `C⁻`: minus sites joined by minus paths to a minus exterior vertex.
pub fn minus_component(sigma: &SpinConfig, bc: &BoundaryCondition) -> Result<Vec<Site>> {
    let sites = sigma.sites();
    let mut seen = vec![false; sites.len()];
    let mut queue = VecDeque::new();
    for (i, &v) in sites.iter().enumerate() {
        if sigma.spins()[i] != MINUS {
            continue;
        }
        for w in v.neighbors() {
            if sigma.get(w).is_none() && bc.boundary_spin(w)? == MINUS {
                seen[i] = true;
                queue.push_back(i);
                break;
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        for w in sites[i].neighbors() {
            if let Some(j) = sigma.index_of(w) {
                if !seen[j] && sigma.spins()[j] == MINUS {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(sites.iter().zip(&seen).filter(|(_, &s)| s).map(|(&v, _)| v).collect())
}

/// All scalar observables of `σ`.
pub fn summarize(sigma: &SpinConfig, interface: &Interface, bc: &BoundaryCondition) -> Result<GeometrySummary> {
    let profile = height_profile(interface)?;
    Ok(GeometrySummary {
        area_below: area_below(interface, sigma.region(), bc)?,
        minus_component: minus_component(sigma, bc)?.len(),
        max_height: profile.max_height(),
        overhang_max: overhang_max(&profile),
        interface_length: interface.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Bottom side to top side.
    Vertical,
    /// West side to east side.
    Horizontal,
}

fn check_inside(sigma: &SpinConfig, rect: &Rect) -> Result<()> {
    let inside = [
        Site::new(rect.x_min, rect.y_min),
        Site::new(rect.x_max, rect.y_max),
        Site::new(rect.x_min, rect.y_max),
        Site::new(rect.x_max, rect.y_min),
    ]
    .iter()
    .all(|&v| sigma.region().contains(v));
    let all = inside && (rect.y_min..=rect.y_max).all(|y| (rect.x_min..=rect.x_max).all(|x| sigma.region().contains(Site::new(x, y))));
    if all {
        Ok(())
    } else {
        Err(Error::InvalidRegion(format!("{rect:?} is not inside the region")))
    }
}

/// Whether sites of sign `sign` connect the two opposite sides of `rect`
/// inside `rect`.
pub fn crossing(sigma: &SpinConfig, rect: &Rect, sign: Spin, dir: Direction) -> Result<bool> {
    check_inside(sigma, rect)?;
    let (w, h) = (rect.width(), rect.height());
    let at = |i: usize, j: usize| sigma.get(Site::new(rect.x_min + i as i32, rect.y_min + j as i32)).unwrap();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let starts: Vec<(usize, usize)> = match dir {
        Direction::Vertical => (0..w).map(|i| (i, 0)).collect(),
        Direction::Horizontal => (0..h).map(|j| (0, j)).collect(),
    };
    for (i, j) in starts {
        if at(i, j) == sign {
            seen[j * w + i] = true;
            queue.push_back((i, j));
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        let done = match dir {
            Direction::Vertical => j + 1 == h,
            Direction::Horizontal => i + 1 == w,
        };
        if done {
            return Ok(true);
        }
        let mut next = Vec::with_capacity(4);
        if i + 1 < w {
            next.push((i + 1, j));
        }
        if i > 0 {
            next.push((i - 1, j));
        }
        if j + 1 < h {
            next.push((i, j + 1));
        }
        if j > 0 {
            next.push((i, j - 1));
        }
        for (a, b) in next {
            if !seen[b * w + a] && at(a, b) == sign {
                seen[b * w + a] = true;
                queue.push_back((a, b));
            }
        }
    }
    Ok(false)
}

/// A `sign` circuit in the annulus `outer \ inner`, detected through the four
/// long-way crossings of the side rectangles of the annulus. Their joint
/// occurrence forces a circuit.
pub fn circuit(sigma: &SpinConfig, outer: &Rect, inner: &Rect, sign: Spin) -> Result<bool> {
    if !(outer.x_min < inner.x_min && inner.x_max < outer.x_max && outer.y_min < inner.y_min && inner.y_max < outer.y_max) {
        return Err(Error::InvalidRegion("inner rectangle must sit strictly inside the outer one".into()));
    }
    let west = Rect::new(outer.x_min, inner.x_min - 1, outer.y_min, outer.y_max)?;
    let east = Rect::new(inner.x_max + 1, outer.x_max, outer.y_min, outer.y_max)?;
    let south = Rect::new(outer.x_min, outer.x_max, outer.y_min, inner.y_min - 1)?;
    let north = Rect::new(outer.x_min, outer.x_max, inner.y_max + 1, outer.y_max)?;
    Ok(crossing(sigma, &west, sign, Direction::Vertical)?
        && crossing(sigma, &east, sign, Direction::Vertical)?
        && crossing(sigma, &south, sign, Direction::Horizontal)?
        && crossing(sigma, &north, sign, Direction::Horizontal)?)
}

/// Number of mesh columns with `hgt⁺ > threshold`.
pub fn multipoint_exceedance(profile: &HeightProfile, mesh: &[i32], threshold: i32) -> usize {
    mesh.iter().filter(|&&x| profile.hgt_plus(x) > threshold).count()
}

/// Mesh `{x_0, x_0 + s, ...}` inside `[lo, hi]`, centred in the interval.
pub fn arithmetic_mesh(lo: i32, hi: i32, spacing: i32) -> Vec<i32> {
    assert!(spacing > 0 && lo <= hi);
    let count = (hi - lo) / spacing + 1;
    let start = lo + (hi - lo - (count - 1) * spacing) / 2;
    (0..count).map(|k| start + k * spacing).collect()
}

/// Innermost `[a, b] ∋ x` whose end columns have `hgt⁻ <= H`. Where no such
/// column exists on one side, the interval runs to that end of the profile.
pub fn stopping_domain(profile: &HeightProfile, x: i32, height: i32) -> (i32, i32) {
    let low = |c: i32| profile.hgt_minus(c) <= height;
    let a = (profile.x_min()..=x).rev().find(|&c| low(c)).unwrap_or(profile.x_min());
    let b = (x..=profile.x_max()).find(|&c| low(c)).unwrap_or(profile.x_max());
    (a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spike {
    Up,
    Down,
}

/// Upward spikiness: both ends at `hgt⁻ <= h` and some `hgt⁺ >= 2h` inside.
/// Downward: both ends at `hgt⁺ >= h` and some `hgt⁻ <= floor(h/2)` inside.
pub fn spikiness(profile: &HeightProfile, x_w: i32, x_e: i32, h: i32, dir: Spike) -> bool {
    match dir {
        Spike::Up => spikiness_with(profile, x_w, x_e, h, dir, HeightKind::Minus, HeightKind::Plus),
        Spike::Down => spikiness_with(profile, x_w, x_e, h, dir, HeightKind::Plus, HeightKind::Minus),
    }
}

/// Spikiness with explicit choices of which height the endpoint and interior
/// clauses read.
pub fn spikiness_with(
    profile: &HeightProfile,
    x_w: i32,
    x_e: i32,
    h: i32,
    dir: Spike,
    ends: HeightKind,
    interior: HeightKind,
) -> bool {
    assert!(x_w <= x_e);
    let e = |x| profile.height(x, ends);
    let mut inside = (x_w..=x_e).map(|x| profile.height(x, interior));
    match dir {
        Spike::Up => e(x_w) <= h && e(x_e) <= h && inside.any(|v| v >= 2 * h),
        Spike::Down => e(x_w) >= h && e(x_e) >= h && inside.any(|v| v <= h.div_euclid(2)),
    }
}

/// `max_x (hgt⁺_x - hgt⁻_x)`.
pub fn overhang_max(profile: &HeightProfile) -> i32 {
    profile.plus.iter().zip(&profile.minus).map(|(p, m)| p - m).max().unwrap_or(0)
}
