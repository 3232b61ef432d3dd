use serde::{Deserialize, Serialize};

use crate::contour::extract_interface;
use crate::error::Result;
use crate::gibbs::chain::coupled_sweep_unchecked;
use crate::gibbs::{ChainState, ModelParams, SpinConfig};
use crate::lattice::{BoundaryCondition, LatticeRegion, MINUS, PLUS};
use crate::observables::{height_profile, HeightProfile};

/// What to sample and how.
#[derive(Clone, Debug)]
pub struct SamplerSpec {
    pub region: LatticeRegion,
    pub bc: BoundaryCondition,
    pub params: ModelParams,
    pub seed: u64,
    pub chain: u64,
    pub samples: usize,
    /// Sweeps between recorded samples.
    pub thinning: u64,
    /// Give up on coalescence after this many sweeps.
    pub burn_in_cap: u64,
    /// Sweeps between coalescence checks.
    pub check_interval: u64,
}

impl SamplerSpec {
    /// Defaults for an `n x n` box: thinning `n²`, cap `200 n²`.
    pub fn new(region: LatticeRegion, bc: BoundaryCondition, params: ModelParams, seed: u64) -> Self {
        let n = region.bounding_box().width().max(region.bounding_box().height()) as u64;
        SamplerSpec {
            region,
            bc,
            params,
            seed,
            chain: 0,
            samples: 0,
            thinning: (n * n).max(1),
            burn_in_cap: 200 * (n * n).max(1),
            check_interval: n.max(1),
        }
    }
}

/// Outcome of the sandwich burn-in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingCertificate {
    /// Whether the top and bottom chains agreed before the cap.
    pub coalesced: bool,
    pub sweeps: u64,
}

/// Thinned sample stream after a sandwich burn-in.
///
/// Burn-in runs the all-minus and all-plus chains under one shared stream
/// until their height profiles agree (whole configurations when the boundary
/// condition has no interface), then continues with the top chain.
pub struct Sampler {
    spec: SamplerSpec,
    state: Option<ChainState>,
    certificate: Option<MixingCertificate>,
    emitted: usize,
}

impl Sampler {
    pub fn new(spec: SamplerSpec) -> Self {
        Sampler { spec, state: None, certificate: None, emitted: 0 }
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    /// Available once the first sample has been requested (or after [`Sampler::burn_in`]).
    pub fn certificate(&self) -> Option<MixingCertificate> {
        self.certificate
    }

    pub fn burn_in(&mut self) -> Result<MixingCertificate> {
        if let Some(c) = self.certificate {
            return Ok(c);
        }
        let s = &self.spec;
        let mut lo = ChainState::constant(&s.region, MINUS, &s.bc, &s.params, s.seed, s.chain)?;
        let mut hi = ChainState::constant(&s.region, PLUS, &s.bc, &s.params, s.seed, s.chain)?;
        let interval = s.check_interval.max(1);
        let mut coalesced = agree(&lo, &hi, &s.bc)?;
        while !coalesced && hi.sweeps() < s.burn_in_cap {
            let steps = interval.min(s.burn_in_cap - hi.sweeps());
            for _ in 0..steps {
                coupled_sweep_unchecked(&mut lo, &mut hi);
            }
            coalesced = agree(&lo, &hi, &s.bc)?;
        }
        let cert = MixingCertificate { coalesced, sweeps: hi.sweeps() };
        self.state = Some(hi);
        self.certificate = Some(cert);
        Ok(cert)
    }

    /// Advance to the next sample and expose the chain without copying it.
    pub fn advance(&mut self) -> Result<Option<&ChainState>> {
        if self.emitted >= self.spec.samples {
            return Ok(None);
        }
        self.burn_in()?;
        let state = self.state.as_mut().expect("burn-in leaves a state");
        if self.emitted > 0 {
            state.run(self.spec.thinning);
        }
        self.emitted += 1;
        Ok(Some(state))
    }
}

impl Iterator for Sampler {
    type Item = Result<SpinConfig>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.advance() {
            Ok(Some(state)) => Some(Ok(state.config())),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

fn profile_of(chain: &ChainState, bc: &BoundaryCondition) -> Result<HeightProfile> {
    height_profile(&extract_interface(&chain.config(), bc)?)
}

fn agree(lo: &ChainState, hi: &ChainState, bc: &BoundaryCondition) -> Result<bool> {
    if bc.is_plus_minus_type() {
        Ok(profile_of(lo, bc)? == profile_of(hi, bc)?)
    } else {
        Ok(lo.same_spins(hi))
    }
}
