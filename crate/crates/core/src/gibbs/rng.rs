//! Counter-based uniform variates keyed by `(seed, chain, sweep, site)`.
//!
//! Each draw is a pure function of its key, so a trajectory does not depend
//! on how chains are scheduled across workers.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream of one chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub chain: u64,
    key: u64,
}

impl StreamKey {
    pub fn new(seed: u64, chain: u64) -> Self {
        let key = mix64(mix64(seed ^ 0x5EED_0000_0000_0001).wrapping_add(chain.wrapping_mul(GOLDEN)));
        StreamKey { seed, chain, key }
    }

    /// Key of one sweep; site draws are taken from it with [`SweepKey::draw`].
    #[inline]
    pub fn sweep(&self, sweep: u64) -> SweepKey {
        SweepKey(mix64(self.key ^ mix64(sweep.wrapping_add(0xA5A5_A5A5_0000_0000))))
    }

    pub fn uniform(&self, sweep: u64, site: u64) -> f64 {
        to_unit(self.sweep(sweep).draw(site))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepKey(u64);

impl SweepKey {
    /// Raw 64-bit draw for the `site`-th update of the sweep.
    #[inline(always)]
    pub fn draw(self, site: u64) -> u64 {
        mix64(self.0.wrapping_add(site.wrapping_add(1).wrapping_mul(GOLDEN)))
    }
}

/// Map a raw draw to `[0, 1)`.
pub fn to_unit(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Smallest `t` such that `u < t` holds with probability `p` for uniform `u: u64`.
pub fn threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_the_key() {
        let a = StreamKey::new(7, 3);
        let b = StreamKey::new(7, 3);
        for sweep in 0..5 {
            for site in 0..50 {
                assert_eq!(a.sweep(sweep).draw(site), b.sweep(sweep).draw(site));
            }
        }
        assert_ne!(a.sweep(0).draw(0), StreamKey::new(7, 4).sweep(0).draw(0));
        assert_ne!(a.sweep(0).draw(0), StreamKey::new(8, 3).sweep(0).draw(0));
        assert_ne!(a.sweep(0).draw(0), a.sweep(1).draw(0));
    }

    #[test]
    fn uniform_moments() {
        let key = StreamKey::new(42, 0);
        let n = 200_000u64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let u = key.uniform(i / 100, i % 100);
            assert!((0.0..1.0).contains(&u));
            s1 += u;
            s2 += u * u;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.002, "{var}");
    }

    #[test]
    fn threshold_matches_probability() {
        assert_eq!(threshold(0.0), 0);
        assert_eq!(threshold(1.0), u64::MAX);
        let t = threshold(0.25);
        assert_eq!(t, 1u64 << 62);
    }
}
