use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gibbs::rng::{threshold, StreamKey};
use crate::gibbs::{logistic, ModelParams, SpinConfig};
use crate::lattice::{BoundaryCondition, LatticeRegion, Site, Spin};

/// Single-site heat-bath chain with systematic raster scan.
///
/// Spins live on the bounding box padded by one cell; exterior cells hold the
/// boundary spins, so a site update reads its four neighbours without branching.
#[derive(Clone, Debug)]
pub struct ChainState {
    region: LatticeRegion,
    bc: BoundaryCondition,
    params: ModelParams,
    origin: Site,
    width: usize,
    grid: Vec<Spin>,
    order: Vec<u32>,
    sites: Arc<[Site]>,
    thresholds: [u64; 5],
    stream: StreamKey,
    sweeps: u64,
}

impl ChainState {
    pub fn new(
        init: &SpinConfig,
        bc: &BoundaryCondition,
        params: &ModelParams,
        seed: u64,
        chain: u64,
    ) -> Result<Self> {
        let region = init.region().clone();
        let bb = region.bounding_box();
        let origin = Site::new(bb.x_min - 1, bb.y_min - 1);
        let width = bb.width() + 2;
        let height = bb.height() + 2;
        let mut grid = vec![0; width * height];
        let cell = |v: Site| (v.y - origin.y) as usize * width + (v.x - origin.x) as usize;
        for w in region.outer_boundary() {
            grid[cell(w)] = bc.boundary_spin(w)?;
        }
        let sites = init.shared_sites();
        let mut order = Vec::with_capacity(sites.len());
        for (k, &v) in sites.iter().enumerate() {
            let c = cell(v);
            grid[c] = init.spins()[k];
            order.push(c as u32);
        }
        Ok(ChainState {
            region,
            bc: bc.clone(),
            params: *params,
            origin,
            width,
            grid,
            order,
            sites,
            thresholds: thresholds(params),
            stream: StreamKey::new(seed, chain),
            sweeps: 0,
        })
    }

    /// Chain started from the constant configuration `spin`.
    pub fn constant(
        region: &LatticeRegion,
        spin: Spin,
        bc: &BoundaryCondition,
        params: &ModelParams,
        seed: u64,
        chain: u64,
    ) -> Result<Self> {
        ChainState::new(&SpinConfig::constant(region, spin), bc, params, seed, chain)
    }

    pub fn region(&self) -> &LatticeRegion {
        &self.region
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn stream(&self) -> StreamKey {
        self.stream
    }

    fn cell(&self, v: Site) -> usize {
        (v.y - self.origin.y) as usize * self.width + (v.x - self.origin.x) as usize
    }

    pub fn spin(&self, v: Site) -> Option<Spin> {
        self.region.contains(v).then(|| self.grid[self.cell(v)])
    }

    pub fn config(&self) -> SpinConfig {
        let spins = self.order.iter().map(|&c| self.grid[c as usize]).collect();
        SpinConfig::from_parts(self.region.clone(), self.sites.clone(), spins)
    }

    /// One systematic-scan heat-bath sweep.
    pub fn sweep(&mut self) {
        let key = self.stream.sweep(self.sweeps);
        let w = self.width;
        let t = self.thresholds;
        let g = &mut self.grid;
        for (k, &c) in self.order.iter().enumerate() {
            let i = c as usize;
            let s = g[i - 1] + g[i + 1] + g[i - w] + g[i + w];
            let u = key.draw(k as u64);
            g[i] = if u < t[((s + 4) >> 1) as usize] { 1 } else { -1 };
        }
        self.sweeps += 1;
    }

    pub fn run(&mut self, sweeps: u64) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    /// Sitewise `self <= other` on the region.
    pub fn le(&self, other: &ChainState) -> bool {
        self.order.len() == other.order.len()
            && self.order.iter().all(|&c| self.grid[c as usize] <= other.grid[c as usize])
    }

    fn first_disorder(&self, other: &ChainState) -> Option<Site> {
        self.order
            .iter()
            .position(|&c| self.grid[c as usize] > other.grid[c as usize])
            .map(|k| self.sites[k])
    }

    pub(crate) fn same_spins(&self, other: &ChainState) -> bool {
        self.order.iter().all(|&c| self.grid[c as usize] == other.grid[c as usize])
    }
}

fn thresholds(p: &ModelParams) -> [u64; 5] {
    let mut t = [0; 5];
    for (k, s) in [-4, -2, 0, 2, 4].into_iter().enumerate() {
        t[k] = threshold(logistic(2.0 * p.beta * s as f64 + 2.0 * p.lambda));
    }
    t
}

/// One sweep of two chains driven by the same uniforms (those of `lo`'s
/// stream and sweep counter): each site is set to plus iff its variate falls
/// below the chain's heat-bath probability. Preserves `lo <= hi`.
pub fn coupled_sweep(lo: &mut ChainState, hi: &mut ChainState) -> Result<()> {
    if lo.region != hi.region || lo.params.beta != hi.params.beta {
        return Err(Error::InvalidConfig("coupled chains need the same region and beta".into()));
    }
    if lo.params.lambda > hi.params.lambda {
        return Err(Error::InvalidConfig("coupled chains need lambda_lo <= lambda_hi".into()));
    }
    if !lo.bc.le_on(&hi.bc, &lo.region)? {
        return Err(Error::InvalidConfig("coupled chains need bc_lo <= bc_hi".into()));
    }
    if let Some(v) = lo.first_disorder(hi) {
        return Err(Error::OrderViolation(v));
    }
    coupled_sweep_unchecked(lo, hi);
    Ok(())
}

pub(crate) fn coupled_sweep_unchecked(lo: &mut ChainState, hi: &mut ChainState) {
    let key = lo.stream.sweep(lo.sweeps);
    let w = lo.width;
    let (tl, th) = (lo.thresholds, hi.thresholds);
    let (gl, gh) = (&mut lo.grid, &mut hi.grid);
    for (k, &c) in lo.order.iter().enumerate() {
        let i = c as usize;
        let u = key.draw(k as u64);
        let sl = gl[i - 1] + gl[i + 1] + gl[i - w] + gl[i + w];
        gl[i] = if u < tl[((sl + 4) >> 1) as usize] { 1 } else { -1 };
        let sh = gh[i - 1] + gh[i + 1] + gh[i - w] + gh[i + w];
        gh[i] = if u < th[((sh + 4) >> 1) as usize] { 1 } else { -1 };
    }
    lo.sweeps += 1;
    hi.sweeps = lo.sweeps;
}
