//! Tail-exponent and scaling-exponent fits with bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewest exceedances for a tail level to enter a fit.
pub const MIN_EXCEEDANCES: usize = 30;
/// Fewest samples accepted by [`tail_fit`].
pub const MIN_TAIL_SAMPLES: usize = 1000;

/// Weighted least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// `None` when fewer than two distinct `x` values carry weight.
pub fn weighted_line(points: &[(f64, f64, f64)]) -> Option<LineFit> {
    let w: f64 = points.iter().map(|p| p.2).sum();
    if points.len() < 2 || w <= 0.0 {
        return None;
    }
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 * w {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Some(LineFit { slope, intercept, r_squared })
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    // the bounds touch 0 and 1 exactly at the extremes; avoid rounding past p
    let lo = if k == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

/// One level `t` of the empirical survival function `P(h > t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailLevel {
    pub level: i32,
    /// `t / N^{1/3}`.
    pub r: f64,
    pub exceedances: usize,
    pub survival: f64,
    pub wilson_95: (f64, f64),
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Exponent `α` of the regressor `R^α`.
    pub exponent: f64,
    pub samples: usize,
    pub levels: Vec<TailLevel>,
    /// `None` when the fit is degenerate.
    pub fit: Option<LineFit>,
    /// `[R_min, R_max]` over the levels used.
    pub range: Option<(f64, f64)>,
}

impl TailFit {
    pub fn degenerate(&self) -> bool {
        self.fit.is_none()
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn r_squared(&self) -> Option<f64> {
        self.fit.map(|f| f.r_squared)
    }

    pub fn levels_used(&self) -> usize {
        self.levels.iter().filter(|l| l.used).count()
    }
}

/// Empirical survival levels `t = 0, 1, ...` of integer observations.
pub fn survival_levels(heights: &[i32], n: u32) -> Vec<TailLevel> {
    let scale = (n as f64).cbrt();
    let max = heights.iter().copied().max().unwrap_or(0);
    let total = heights.len();
    let mut sorted = heights.to_vec();
    sorted.sort_unstable();
    (0..max.max(0) + 1)
        .map(|t| {
            let above = total - sorted.partition_point(|&h| h <= t);
            TailLevel {
                level: t,
                r: t as f64 / scale,
                exceedances: above,
                survival: above as f64 / total as f64,
                wilson_95: wilson_interval(above, total, 1.959964),
                used: above >= MIN_EXCEEDANCES,
            }
        })
        .collect()
}

/// Regress `log P(h > R N^{1/3})` on `R^{3/2}`.
pub fn tail_fit(heights: &[i32], n: u32) -> Result<TailFit> {
    tail_fit_with_exponent(heights, n, 1.5)
}

/// As [`tail_fit`] with regressor `R^α`.
pub fn tail_fit_with_exponent(heights: &[i32], n: u32, alpha: f64) -> Result<TailFit> {
    if heights.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "tail fit needs at least {MIN_TAIL_SAMPLES} samples, got {}",
            heights.len()
        )));
    }
    let levels = survival_levels(heights, n);
    let points: Vec<(f64, f64, f64)> =
        levels.iter().filter(|l| l.used).map(|l| (l.r.powf(alpha), l.survival.ln(), 1.0)).collect();
    let varies = points.windows(2).any(|w| w[0].1 != w[1].1);
    let fit = if points.len() >= 3 && varies { weighted_line(&points) } else { None };
    let used: Vec<f64> = levels.iter().filter(|l| l.used).map(|l| l.r).collect();
    let range = fit.and(used.first().zip(used.last()).map(|(a, b)| (*a, *b)));
    Ok(TailFit { exponent: alpha, samples: heights.len(), levels, fit, range })
}

/// Fit of an analytic survival curve given as `(R, S(R), weight)` triples.
pub fn survival_curve_fit(curve: &[(f64, f64, f64)], alpha: f64) -> Option<LineFit> {
    let points: Vec<(f64, f64, f64)> =
        curve.iter().filter(|p| p.1 > 0.0).map(|&(r, s, w)| (r.powf(alpha), s.ln(), w)).collect();
    weighted_line(&points)
}

/// Bootstrap percentile interval of the tail slope.
pub fn tail_slope_ci(heights: &[i32], n: u32, alpha: f64, resamples: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    let data: Vec<f64> = heights.iter().map(|&h| h as f64).collect();
    bootstrap_ci(
        |xs| {
            let hs: Vec<i32> = xs.iter().map(|&x| x as i32).collect();
            tail_fit_with_exponent(&hs, n, alpha).ok().and_then(|f| f.slope()).unwrap_or(f64::NAN)
        },
        &data,
        resamples,
        level,
        seed,
    )
}

/// Percentile bootstrap interval of `stat`. Resamples where `stat` is not
/// finite are dropped.
pub fn bootstrap_ci(
    stat: impl Fn(&[f64]) -> f64,
    samples: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if resamples < 100 {
        return Err(Error::InsufficientData(format!("bootstrap needs at least 100 resamples, got {resamples}")));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("bootstrap of an empty sample".into()));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence level {level} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; samples.len()];
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for b in buf.iter_mut() {
            *b = samples[rng.gen_range(0..samples.len())];
        }
        let s = stat(&buf);
        if s.is_finite() {
            stats.push(s);
        }
    }
    if stats.len() < resamples / 2 {
        return Err(Error::InsufficientData("statistic undefined on most resamples".into()));
    }
    stats.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&stats, (1.0 - level) / 2.0), quantile_sorted(&stats, (1.0 + level) / 2.0)))
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Per-`N` summary entering a scaling fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: u32,
    pub count: usize,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    /// Slope of `log median` against `log N`.
    pub slope: f64,
    pub intercept: f64,
    pub ci: (f64, f64),
    /// Slope after dividing the medians by `(log N)^{2/3}`, when requested.
    pub corrected_slope: Option<f64>,
    pub corrected_ci: Option<(f64, f64)>,
}

fn log_log_slope(points: &[(u32, f64)], correct: bool) -> Option<LineFit> {
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|&(n, m)| {
            let n = n as f64;
            let y = if correct { m / n.ln().powf(2.0 / 3.0) } else { m };
            (n.ln(), y.ln(), 1.0)
        })
        .collect();
    weighted_line(&pts)
}

fn group(pairs: &[(u32, f64)]) -> Vec<(u32, Vec<f64>)> {
    let mut map: std::collections::BTreeMap<u32, Vec<f64>> = Default::default();
    for &(n, v) in pairs {
        map.entry(n).or_default().push(v);
    }
    map.into_iter().collect()
}

/// Power-law exponent of the median statistic in `N`. Pairs may repeat `N`;
/// the interval resamples observations within each `N`.
pub fn scaling_fit(pairs: &[(u32, f64)], correction: bool, resamples: usize, seed: u64) -> Result<ScalingFit> {
    let groups = group(pairs);
    if groups.len() < 3 {
        return Err(Error::InsufficientData(format!("scaling fit needs 3 distinct N, got {}", groups.len())));
    }
    let medians: Vec<(u32, f64)> = groups.iter().map(|(n, v)| (*n, median(v))).collect();
    if medians.iter().any(|p| !(p.1 > 0.0) || p.0 < 2) {
        return Err(Error::InsufficientData("scaling fit needs positive medians and N >= 2".into()));
    }
    let base = log_log_slope(&medians, false).expect("distinct N give distinct log N");
    let corrected = correction.then(|| log_log_slope(&medians, true).unwrap().slope);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(resamples);
    let mut cor = Vec::with_capacity(resamples);
    for _ in 0..resamples.max(100) {
        let boot: Vec<(u32, f64)> = groups
            .iter()
            .map(|(n, v)| {
                let draw: Vec<f64> = (0..v.len()).map(|_| v[rng.gen_range(0..v.len())]).collect();
                (*n, median(&draw))
            })
            .collect();
        // a resampled median of zero has no logarithm; drop that resample
        if boot.iter().any(|p| !(p.1 > 0.0)) {
            continue;
        }
        raw.push(log_log_slope(&boot, false).unwrap().slope);
        if correction {
            cor.push(log_log_slope(&boot, true).unwrap().slope);
        }
    }
    if raw.len() < resamples.max(100) / 2 {
        return Err(Error::InsufficientData("medians vanish on most resamples".into()));
    }
    let interval = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (quantile_sorted(v, 0.025), quantile_sorted(v, 0.975))
    };
    Ok(ScalingFit {
        points: groups
            .iter()
            .zip(&medians)
            .map(|((n, v), (_, m))| ScalingPoint { n: *n, count: v.len(), median: *m })
            .collect(),
        slope: base.slope,
        intercept: base.intercept,
        ci: interval(&mut raw),
        corrected_slope: corrected,
        corrected_ci: correction.then(|| interval(&mut cor)),
    })
}
