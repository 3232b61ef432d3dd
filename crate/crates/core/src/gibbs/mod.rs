//! The Ising measure with external field on finite regions:
//!
//! `μ(σ) ∝ exp(-2β · #{disagreeing edges touching Λ} + λ Σ_v σ_v)`
//!
//! together with single-site heat-bath dynamics, the monotone grand coupling,
//! exact enumeration on small regions and the Kramers–Wannier duality map.

mod chain;
mod exact;
pub mod rng;
mod sample;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, LatticeRegion, Site, Spin, MINUS, PLUS};

pub use chain::{coupled_sweep, ChainState};
pub use exact::{exact_distribution, log_sum_exp, ExactDistribution, SmallIsing, ENUMERATION_CAP};
pub use sample::{MixingCertificate, Sampler, SamplerSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub lambda: f64,
    /// Set when `lambda = c_lambda / N`.
    pub c_lambda: Option<f64>,
}

impl ModelParams {
    pub fn new(beta: f64, lambda: f64) -> Self {
        ModelParams { beta, lambda, c_lambda: None }
    }

    /// Field at the critical pre-wetting scale `λ = c_λ / N`.
    pub fn critical(beta: f64, c_lambda: f64, n: u32) -> Self {
        ModelParams { beta, lambda: c_lambda / n.max(1) as f64, c_lambda: Some(c_lambda) }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ModelParams { lambda, c_lambda: None, ..self }
    }
}

/// `β*` with `tanh(β*) = e^{-2β}`.
pub fn dual_beta(beta: f64) -> f64 {
    (-2.0 * beta).exp().atanh()
}

/// Fixed point of [`dual_beta`], `½ log(1 + √2)`.
pub fn self_dual_beta() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Spin assignment on a region, stored densely in raster order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfig {
    region: LatticeRegion,
    sites: Arc<[Site]>,
    spins: Vec<Spin>,
}

impl SpinConfig {
    pub fn constant(region: &LatticeRegion, spin: Spin) -> Self {
        let sites: Arc<[Site]> = region.sites().into();
        let spins = vec![spin; sites.len()];
        SpinConfig { region: region.clone(), sites, spins }
    }

    pub fn from_fn(region: &LatticeRegion, mut f: impl FnMut(Site) -> Spin) -> Self {
        let sites: Arc<[Site]> = region.sites().into();
        let spins = sites.iter().map(|&v| f(v)).collect();
        SpinConfig { region: region.clone(), sites, spins }
    }

    pub(crate) fn from_parts(region: LatticeRegion, sites: Arc<[Site]>, spins: Vec<Spin>) -> Self {
        debug_assert_eq!(sites.len(), spins.len());
        SpinConfig { region, sites, spins }
    }

    pub fn region(&self) -> &LatticeRegion {
        &self.region
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub(crate) fn shared_sites(&self) -> Arc<[Site]> {
        self.sites.clone()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn index_of(&self, v: Site) -> Option<usize> {
        if let Some(r) = self.region.as_rect() {
            return r
                .contains(v)
                .then(|| (v.y - r.y_min) as usize * r.width() + (v.x - r.x_min) as usize);
        }
        self.sites.binary_search(&v).ok()
    }

    pub fn get(&self, v: Site) -> Option<Spin> {
        self.index_of(v).map(|i| self.spins[i])
    }

    pub fn set(&mut self, v: Site, s: Spin) {
        let i = self.index_of(v).expect("site outside region");
        self.spins[i] = s;
    }

    /// Spin of `v`, read from the boundary condition when `v` is exterior.
    pub fn spin_or_boundary(&self, v: Site, bc: &BoundaryCondition) -> Result<Spin> {
        match self.get(v) {
            Some(s) => Ok(s),
            None => bc.boundary_spin(v),
        }
    }

    /// Sitewise `self <= other`.
    pub fn le(&self, other: &SpinConfig) -> bool {
        self.spins.len() == other.spins.len()
            && self.spins.iter().zip(&other.spins).all(|(a, b)| a <= b)
    }

    pub fn magnetization(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    /// Encode as a bit mask (bit `i` set iff site `i` is plus). Small regions only.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64);
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == PLUS)
            .fold(0u64, |m, (i, _)| m | (1 << i))
    }

    pub fn from_mask(region: &LatticeRegion, mask: u64) -> Self {
        let sites: Arc<[Site]> = region.sites().into();
        let spins = (0..sites.len()).map(|i| if mask >> i & 1 == 1 { PLUS } else { MINUS }).collect();
        SpinConfig { region: region.clone(), sites, spins }
    }
}

/// Number of disagreeing edges (interior and boundary) of `σ ∐ η`.
pub fn disagreements(sigma: &SpinConfig, bc: &BoundaryCondition) -> Result<u64> {
    let mut count = 0;
    for (i, &v) in sigma.sites().iter().enumerate() {
        let s = sigma.spins[i];
        for w in [Site::new(v.x + 1, v.y), Site::new(v.x, v.y + 1)] {
            if let Some(t) = sigma.get(w) {
                count += (s != t) as u64;
            }
        }
        for w in v.neighbors() {
            if sigma.get(w).is_none() {
                count += (s != bc.boundary_spin(w)?) as u64;
            }
        }
    }
    Ok(count)
}

/// Log of the unnormalised Gibbs weight.
pub fn config_weight(sigma: &SpinConfig, bc: &BoundaryCondition, p: &ModelParams) -> Result<f64> {
    let d = disagreements(sigma, bc)?;
    Ok(-2.0 * p.beta * d as f64 + p.lambda * sigma.magnetization() as f64)
}

/// `P(σ_v = +1 | rest)` under the heat-bath rule.
pub fn heat_bath_probability(
    sigma: &SpinConfig,
    v: Site,
    bc: &BoundaryCondition,
    p: &ModelParams,
) -> Result<f64> {
    if sigma.index_of(v).is_none() {
        return Err(Error::InvalidRegion(format!("{v:?} is not in the region")));
    }
    let mut s = 0i32;
    for w in v.neighbors() {
        s += sigma.spin_or_boundary(w, bc)? as i32;
    }
    Ok(logistic(2.0 * p.beta * s as f64 + 2.0 * p.lambda))
}
