use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gibbs::{ModelParams, SpinConfig};
use crate::lattice::{BoundaryCondition, LatticeRegion, Site, Spin, MINUS, PLUS};

/// Largest number of free spins enumerated exactly.
pub const ENUMERATION_CAP: usize = 20;

/// An Ising system small enough to enumerate: free spins on arbitrary sites
/// (or abstract graph vertices) with fixed exterior neighbours.
#[derive(Clone, Debug)]
pub struct SmallIsing {
    sites: Vec<Site>,
    edges: Vec<(usize, usize)>,
    ext_plus: Vec<u32>,
    ext_minus: Vec<u32>,
}

impl SmallIsing {
    /// Nearest-neighbour system on `sites`; `outside` gives the spin of every
    /// neighbour not in `sites`.
    pub fn new(sites: Vec<Site>, outside: impl Fn(Site) -> Result<Spin>) -> Result<Self> {
        check_cap(sites.len())?;
        let index: HashMap<Site, usize> = sites.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        let mut ext_plus = vec![0; sites.len()];
        let mut ext_minus = vec![0; sites.len()];
        for (i, &v) in sites.iter().enumerate() {
            for w in v.neighbors() {
                match index.get(&w) {
                    Some(&j) => {
                        if i < j {
                            edges.push((i, j));
                        }
                    }
                    None => {
                        if outside(w)? == PLUS {
                            ext_plus[i] += 1;
                        } else {
                            ext_minus[i] += 1;
                        }
                    }
                }
            }
        }
        Ok(SmallIsing { sites, edges, ext_plus, ext_minus })
    }

    /// Free-boundary system on an abstract graph with `n` vertices.
    pub fn on_graph(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        check_cap(n)?;
        Ok(SmallIsing {
            sites: (0..n as i32).map(|i| Site::new(i, 0)).collect(),
            edges,
            ext_plus: vec![0; n],
            ext_minus: vec![0; n],
        })
    }

    pub fn n_spins(&self) -> usize {
        self.sites.len()
    }

    /// Log-weight of the configuration whose plus sites are the set bits of `mask`.
    pub fn log_weight(&self, mask: u64, p: &ModelParams) -> f64 {
        let mut d = 0u32;
        for &(i, j) in &self.edges {
            d += ((mask >> i ^ mask >> j) & 1) as u32;
        }
        for i in 0..self.sites.len() {
            d += if mask >> i & 1 == 1 { self.ext_minus[i] } else { self.ext_plus[i] };
        }
        let plus = mask.count_ones() as i64;
        let mag = 2 * plus - self.sites.len() as i64;
        -2.0 * p.beta * d as f64 + p.lambda * mag as f64
    }

    pub fn distribution(&self, p: &ModelParams) -> ExactDistribution {
        let count = 1u64 << self.sites.len();
        let log_w: Vec<f64> = (0..count).map(|m| self.log_weight(m, p)).collect();
        let log_z = log_sum_exp(log_w.iter().copied());
        ExactDistribution { sites: self.sites.clone(), region: None, log_w, log_z }
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        Err(Error::RegionTooLarge { size: n, cap: ENUMERATION_CAP })
    } else {
        Ok(())
    }
}

/// Stable `log Σ exp(x_i)`; `-inf` for an empty input.
pub fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Full table of Gibbs probabilities, indexed by plus-site bit masks.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    sites: Vec<Site>,
    region: Option<LatticeRegion>,
    log_w: Vec<f64>,
    log_z: f64,
}

/// Exact Gibbs law on a region with at most [`ENUMERATION_CAP`] sites.
pub fn exact_distribution(
    region: &LatticeRegion,
    bc: &BoundaryCondition,
    p: &ModelParams,
) -> Result<ExactDistribution> {
    check_cap(region.site_count())?;
    let sys = SmallIsing::new(region.sites(), |w| bc.boundary_spin(w))?;
    let mut d = sys.distribution(p);
    d.region = Some(region.clone());
    Ok(d)
}

impl ExactDistribution {
    pub fn n_configs(&self) -> usize {
        self.log_w.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn log_weight(&self, mask: u64) -> f64 {
        self.log_w[mask as usize]
    }

    pub fn probability(&self, mask: u64) -> f64 {
        (self.log_w[mask as usize] - self.log_z).exp()
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    /// `log Z(A)` for the event `A` given as a predicate on masks.
    pub fn restricted_log_z(&self, event: impl Fn(u64) -> bool) -> f64 {
        let it = self
            .log_w
            .iter()
            .enumerate()
            .filter(|(m, _)| event(*m as u64))
            .map(|(_, &w)| w);
        log_sum_exp(it)
    }

    pub fn prob_event(&self, event: impl Fn(u64) -> bool) -> f64 {
        (self.restricted_log_z(event) - self.log_z).exp()
    }

    pub fn expectation(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.log_w
            .iter()
            .enumerate()
            .map(|(m, &w)| f(m as u64) * (w - self.log_z).exp())
            .sum()
    }

    /// Spin of site `i` under `mask`.
    pub fn spin(mask: u64, i: usize) -> Spin {
        if mask >> i & 1 == 1 {
            PLUS
        } else {
            MINUS
        }
    }

    pub fn config(&self, mask: u64) -> SpinConfig {
        let region = self.region.as_ref().expect("distribution was not built on a lattice region");
        SpinConfig::from_mask(region, mask)
    }

    /// `(configuration, probability)` pairs in mask order.
    pub fn table(&self) -> Vec<(SpinConfig, f64)> {
        (0..self.n_configs() as u64).map(|m| (self.config(m), self.probability(m))).collect()
    }
}
