//! Exact identities and exhaustive properties on small regions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::contour::{
    contours_and_interface, decompose, interface_sides, odd_vertices, separating_edges, spins_from_contours,
};
use crate::error::Result;
use crate::gibbs::{dual_beta, exact_distribution, heat_bath_probability, ExactDistribution, ModelParams, SpinConfig};
use crate::lattice::{make_region, source_points, BoundaryCondition, DualVertex, LatticeRegion, Rect, PLUS};
use crate::observables::{crossing, height_profile, minus_component, Direction, HeightProfile};
use crate::randomline::{
    duality_check_with, interface_law_checks_at, partition_identity, partition_ratio, random_line_ratio, DualIsing,
    DualRegion, IdentityCheck, RandomLine, DUAL_EDGE_CAP, IDENTITY_TOLERANCE,
};

/// Tolerance for exact inequalities evaluated in floating point.
const SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Multiplies `β*` in the duality checks. Anything but 1 must fail.
    pub beta_star_factor: f64,
    /// Check every even source set on every patch (minutes) rather than a
    /// sample of them (seconds).
    pub exhaustive: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { beta_star_factor: 1.0, exhaustive: true }
    }
}

impl VerifyOptions {
    pub fn quick() -> Self {
        VerifyOptions { exhaustive: false, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<IdentityCheck>,
}

/// Per-name tally of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    pub max_deviation: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> Vec<CheckSummary> {
        let mut out: Vec<CheckSummary> = Vec::new();
        for c in &self.checks {
            let entry = match out.iter_mut().position(|s| s.name == c.name) {
                Some(i) => &mut out[i],
                None => {
                    out.push(CheckSummary { name: c.name.clone(), instances: 0, failures: 0, max_deviation: 0.0 });
                    out.last_mut().unwrap()
                }
            };
            entry.instances += 1;
            entry.failures += (!c.pass) as usize;
            entry.max_deviation = entry.max_deviation.max(c.deviation);
        }
        out
    }

    fn absorb(&mut self, section: &str, result: Result<Vec<IdentityCheck>>) {
        match result {
            Ok(checks) => self.checks.extend(checks),
            Err(e) => self.checks.push(IdentityCheck {
                name: section.into(),
                instance: format!("aborted: {e}"),
                lhs: f64::NAN,
                rhs: f64::NAN,
                deviation: f64::INFINITY,
                tolerance: 0.0,
                pass: false,
            }),
        }
    }
}

pub fn verify_suite() -> VerifyReport {
    verify_suite_with(&VerifyOptions::default())
}

/// Every identity and exhaustive property, in a fixed order.
pub fn verify_suite_with(opts: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport { checks: Vec::new() };
    report.absorb("random-line identity", random_line_checks(0.8, opts.beta_star_factor, opts.exhaustive));
    report.absorb("plus partition function", partition_checks());
    report.absorb("interface law", interface_law_suite(opts.beta_star_factor));
    report.absorb("structure", structural_checks(&make_region(3, 2), &BoundaryCondition::Dobrushin));
    report.absorb("detailed balance", detailed_balance_checks());
    report.absorb("monotonicity", monotonicity_checks());
    report
}

/// Primal `a x b` boxes whose dual regions fit the edge cap.
pub fn dual_patches() -> Vec<LatticeRegion> {
    let mut out = Vec::new();
    for a in 1u32..=8 {
        for b in a..=8 {
            if (2 * a * b + a + b) as usize <= DUAL_EDGE_CAP {
                out.push(make_region(a - 1, b - 1));
            }
        }
    }
    out
}

/// Every even subset of the vertices.
pub fn all_source_sets(vertices: &[DualVertex]) -> Vec<BTreeSet<DualVertex>> {
    let n = vertices.len();
    (0u64..1 << n)
        .filter(|m| m.count_ones() % 2 == 0)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| vertices[i]).collect())
        .collect()
}

/// Source sets for a quick pass: every even subset when there are few,
/// otherwise the empty set, every pair, and a spread of quadruples.
pub fn source_sets(vertices: &[DualVertex]) -> Vec<BTreeSet<DualVertex>> {
    let n = vertices.len();
    let pick = |mask: u64| -> BTreeSet<DualVertex> { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| vertices[i]).collect() };
    if n <= 12 {
        return (0u64..1 << n).filter(|m| m.count_ones() % 2 == 0).map(pick).collect();
    }
    let mut out = vec![BTreeSet::new()];
    for i in 0..n {
        for j in i + 1..n {
            out.push(pick(1 << i | 1 << j));
        }
    }
    let mut k = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                for m in l + 1..n {
                    if k % 37 == 0 {
                        out.push(pick(1 << i | 1 << j | 1 << l | 1 << m));
                    }
                    k += 1;
                }
            }
        }
    }
    out
}

/// `Σ_{∂ζ=A*} q(ζ) = ⟨Π_{A*} σ⟩_{β*}` on every dual patch.
pub fn random_line_checks(beta: f64, beta_star_factor: f64, exhaustive: bool) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    for region in dual_patches() {
        let dual = DualRegion::of_region(&region)?;
        let rl = RandomLine::new(&dual, beta);
        let ising = DualIsing::new(&dual, dual_beta(beta) * beta_star_factor)?;
        let r = region.bounding_box();
        let sets = if exhaustive { all_source_sets(dual.vertices()) } else { source_sets(dual.vertices()) };
        for points in sets {
            let mut c = duality_check_with(&rl, &ising, &points)?;
            c.instance = format!("{}x{} box, {}", r.width(), r.height(), c.instance);
            out.push(c);
        }
    }
    Ok(out)
}

/// `Z_{+,β,Λ} = Z^RL_{β*,Λ*}` on every patch for a few temperatures.
pub fn partition_checks() -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    for region in dual_patches() {
        for beta in [0.3, 0.8, 1.2] {
            let mut c = partition_identity(&region, beta)?;
            // compare on the scale of Z itself
            c.deviation /= c.rhs.abs().max(1.0);
            c.tolerance = IDENTITY_TOLERANCE;
            c.pass = c.deviation <= c.tolerance;
            c.instance = format!("{} at beta={beta}", c.instance);
            out.push(c);
        }
    }
    Ok(out)
}

/// Interface law and the ratio `Z_± / Z_+` on the 3x3 Dobrushin box.
pub fn interface_law_suite(beta_star_factor: f64) -> Result<Vec<IdentityCheck>> {
    let region = make_region(2, 2);
    let bc = BoundaryCondition::Dobrushin;
    let mut out = Vec::new();
    for beta in [0.5, 0.8] {
        out.extend(interface_law_checks_at(&region, &bc, beta, dual_beta(beta) * beta_star_factor)?);
        let exact = partition_ratio(&bc, &region, &ModelParams::new(beta, 0.0))?;
        let rl = random_line_ratio(&bc, &region, beta)?;
        out.push(IdentityCheck::new("Dobrushin partition ratio", format!("3x3 at beta={beta}"), rl, exact, IDENTITY_TOLERANCE));
    }
    Ok(out)
}

fn all_configs(dist: &ExactDistribution) -> Vec<SpinConfig> {
    (0..dist.n_configs() as u64).map(|m| dist.config(m)).collect()
}

/// Exhaustive structural properties under a two-source boundary condition:
/// interface uniqueness, contour round trip, `C⁻ ⊆ Λ⁻`, height
/// monotonicity in `σ`, and source-point parity. One check per property,
/// counting violations.
pub fn structural_checks(region: &LatticeRegion, bc: &BoundaryCondition) -> Result<Vec<IdentityCheck>> {
    let dist = exact_distribution(region, bc, &ModelParams::new(0.0, 0.0))?;
    let configs = all_configs(&dist);
    let sources: BTreeSet<DualVertex> = source_points(region, bc)?.into_iter().collect();
    let r = region.bounding_box();
    let label = format!("{} configurations on {}x{}", configs.len(), r.width(), r.height());

    let (mut unique, mut round_trip, mut inclusion, mut parity) = (0, 0, 0, 0);
    let mut profiles: Vec<Option<HeightProfile>> = Vec::with_capacity(configs.len());
    for sigma in &configs {
        let edges = separating_edges(sigma, bc)?;
        if odd_vertices(edges.iter()) != sources {
            parity += 1;
        }
        match decompose(&edges).and_then(|c| spins_from_contours(&c, region, bc)) {
            Ok(back) if &back == sigma => {}
            _ => round_trip += 1,
        }
        let Ok((_, interface)) = contours_and_interface(sigma, bc) else {
            unique += 1;
            profiles.push(None);
            continue;
        };
        let (_, below) = interface_sides(&interface, region, bc)?;
        let below: BTreeSet<_> = below.into_iter().collect();
        if !minus_component(sigma, bc)?.iter().all(|v| below.contains(v)) {
            inclusion += 1;
        }
        profiles.push(Some(height_profile(&interface)?));
    }

    // σ ≤ σ' runs over submasks of each mask. Plus sits above the interface,
    // so adding plus spins can only lower it: heights are non-increasing.
    let mut monotone = 0;
    for (hi, p_hi) in profiles.iter().enumerate() {
        let mut lo = hi;
        loop {
            if let (Some(a), Some(b)) = (&profiles[lo], p_hi) {
                let ok = a.columns() == b.columns()
                    && a.plus().iter().zip(b.plus()).all(|(x, y)| x >= y)
                    && a.minus().iter().zip(b.minus()).all(|(x, y)| x >= y);
                monotone += (!ok) as usize;
            }
            if lo == 0 {
                break;
            }
            lo = (lo - 1) & hi;
        }
    }
    Ok(vec![
        IdentityCheck::violations("interface uniqueness", label.clone(), unique),
        IdentityCheck::violations("contour round trip", label.clone(), round_trip),
        IdentityCheck::violations("minus component inside minus side", label.clone(), inclusion),
        IdentityCheck::violations("height monotonicity", label.clone(), monotone),
        IdentityCheck::violations("source-point parity", label, parity),
    ])
}

/// `π(σ) P(σ → σ^v) = π(σ^v) P(σ^v → σ)` for every configuration and site.
pub fn detailed_balance(region: &LatticeRegion, bc: &BoundaryCondition, p: &ModelParams) -> Result<IdentityCheck> {
    let dist = exact_distribution(region, bc, p)?;
    let sites = dist.sites().to_vec();
    let mut worst: f64 = 0.0;
    for m in 0..dist.n_configs() as u64 {
        let sigma = dist.config(m);
        for (i, &v) in sites.iter().enumerate() {
            let flipped = m ^ (1 << i);
            if flipped < m {
                continue;
            }
            let to_plus = heat_bath_probability(&sigma, v, bc, p)?;
            // `m` has site i minus, `flipped` has it plus
            let forward = dist.probability(m) * to_plus;
            let backward = dist.probability(flipped) * (1.0 - to_plus);
            worst = worst.max((forward - backward).abs() / forward.max(backward));
        }
    }
    let r = region.bounding_box();
    Ok(IdentityCheck::new(
        "detailed balance",
        format!("{}x{} {:?} beta={} lambda={}", r.width(), r.height(), bc, p.beta, p.lambda),
        worst,
        0.0,
        SLACK,
    ))
}

pub fn detailed_balance_checks() -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    for region in [make_region(1, 1), make_region(2, 1), make_region(2, 2)] {
        for bc in [BoundaryCondition::Dobrushin, BoundaryCondition::AllPlus, BoundaryCondition::PlusMinusAtHeight(0)] {
            for p in [ModelParams::new(0.8, 0.2), ModelParams::new(0.3, -0.4)] {
                out.push(detailed_balance(&region, &bc, &p)?);
            }
        }
    }
    Ok(out)
}

/// Regions of at most 12 sites used by the monotonicity suite.
pub fn small_regions() -> Vec<LatticeRegion> {
    let l_shape = LatticeRegion::from(Rect { x_min: 0, x_max: 2, y_min: 0, y_max: 1 })
        .union(&Rect { x_min: 0, x_max: 0, y_min: 0, y_max: 3 }.into())
        .expect("overlapping rectangles");
    vec![make_region(2, 2), make_region(3, 2), make_region(1, 4), l_shape]
}

/// Increasing test functions of a configuration: single-site indicators,
/// magnetization, and on rectangles the two plus crossings.
fn increasing_functions(configs: &[SpinConfig], region: &LatticeRegion) -> Result<Vec<(String, Vec<f64>)>> {
    let n = configs.first().map_or(0, |c| c.len());
    let mut out = Vec::new();
    for i in 0..n {
        out.push((format!("site {i}"), configs.iter().map(|c| (c.spins()[i] == PLUS) as u8 as f64).collect()));
    }
    out.push(("magnetization".into(), configs.iter().map(|c| c.magnetization() as f64).collect()));
    let Some(b) = region.as_rect() else {
        return Ok(out);
    };
    for dir in [Direction::Horizontal, Direction::Vertical] {
        let values = configs
            .iter()
            .map(|c| crossing(c, &b, PLUS, dir).map(|x| x as u8 as f64))
            .collect::<Result<Vec<f64>>>()?;
        out.push((format!("plus crossing {dir:?}"), values));
    }
    Ok(out)
}

fn mean(dist: &ExactDistribution, f: &[f64]) -> f64 {
    dist.expectation(|m| f[m as usize])
}

fn describe(region: &LatticeRegion, bc: &BoundaryCondition, p: &ModelParams) -> String {
    format!("{} sites {:?} beta={} lambda={}", region.site_count(), bc, p.beta, p.lambda)
}

/// FKG, monotonicity in the boundary condition and in the field, the
/// Radon–Nikodym sandwich, and the tilt inequality, all exact.
pub fn monotonicity_checks() -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let bcs = [
        BoundaryCondition::AllMinus,
        BoundaryCondition::PlusMinusAtHeight(1),
        BoundaryCondition::Dobrushin,
        BoundaryCondition::AllPlus,
    ];
    let fields = [-0.5, -0.1, 0.0, 0.2, 0.6];
    for region in small_regions() {
        let zero = exact_distribution(&region, &BoundaryCondition::AllPlus, &ModelParams::new(0.0, 0.0))?;
        let configs = all_configs(&zero);
        let fs = increasing_functions(&configs, &region)?;
        for beta in [0.3, 0.8] {
            // one distribution per (bc, λ)
            let mut dists = Vec::new();
            for bc in &bcs {
                let row = fields
                    .iter()
                    .map(|&l| exact_distribution(&region, bc, &ModelParams::new(beta, l)))
                    .collect::<Result<Vec<_>>>()?;
                dists.push(row);
            }
            for (b, bc) in bcs.iter().enumerate() {
                for (l, &lambda) in fields.iter().enumerate() {
                    let p = ModelParams::new(beta, lambda);
                    out.push(fkg(&dists[b][l], &fs, describe(&region, bc, &p)));
                    if l + 1 < fields.len() {
                        out.push(ordered("field monotonicity", &dists[b][l], &dists[b][l + 1], &fs, describe(&region, bc, &p)));
                    }
                    if b + 1 < bcs.len() {
                        debug_assert!(bc.le_on(&bcs[b + 1], &region)?);
                        out.push(ordered("boundary monotonicity", &dists[b][l], &dists[b + 1][l], &fs, describe(&region, bc, &p)));
                    }
                    if lambda != 0.0 {
                        let zero_field = &dists[b][fields.iter().position(|&x| x == 0.0).unwrap()];
                        out.push(radon_nikodym(&dists[b][l], zero_field, lambda, describe(&region, bc, &p)));
                    }
                }
            }
        }
    }
    out.extend(tilt_checks()?);
    Ok(out)
}

/// `E[fg] >= E[f] E[g]` over all pairs of test functions.
fn fkg(dist: &ExactDistribution, fs: &[(String, Vec<f64>)], instance: String) -> IdentityCheck {
    let means: Vec<f64> = fs.iter().map(|(_, f)| mean(dist, f)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            let joint = dist.expectation(|m| fs[i].1[m as usize] * fs[j].1[m as usize]);
            worst = worst.max(means[i] * means[j] - joint);
        }
    }
    IdentityCheck::at_most("FKG", instance, worst, 0.0, SLACK)
}

/// `E_lo[f] <= E_hi[f]` for every test function.
fn ordered(name: &str, lo: &ExactDistribution, hi: &ExactDistribution, fs: &[(String, Vec<f64>)], instance: String) -> IdentityCheck {
    let worst = fs.iter().map(|(_, f)| mean(lo, f) - mean(hi, f)).fold(f64::NEG_INFINITY, f64::max);
    IdentityCheck::at_most(name, instance, worst, 0.0, SLACK)
}

/// `e^{-2|λ||Λ|} μ_0(A) <= μ_λ(A) <= e^{2|λ||Λ|} μ_0(A)` for every event `A`.
/// Checking singletons suffices: the bounds add up over any event.
fn radon_nikodym(field: &ExactDistribution, zero: &ExactDistribution, lambda: f64, instance: String) -> IdentityCheck {
    let bound = 2.0 * lambda.abs() * field.sites().len() as f64;
    let worst = (0..field.n_configs() as u64)
        .map(|m| (field.log_weight(m) - field.log_z() - zero.log_weight(m) + zero.log_z()).abs())
        .fold(0.0, f64::max);
    IdentityCheck::at_most("Radon-Nikodym sandwich", instance, worst, bound, SLACK)
}

/// `Z_{±,λ} / Z_{+,λ} <= Z_{±,0} / Z_{+,0}` for `λ >= 0`.
pub fn tilt_checks() -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let bc = BoundaryCondition::Dobrushin;
    for region in [make_region(2, 2), make_region(3, 2)] {
        for beta in [0.5, 0.8, 1.2] {
            let base = partition_ratio(&bc, &region, &ModelParams::new(beta, 0.0))?;
            for lambda in [0.1, 0.5, 1.0] {
                let p = ModelParams::new(beta, lambda);
                let tilted = partition_ratio(&bc, &region, &p)?;
                out.push(IdentityCheck::at_most("tilt inequality", describe(&region, &bc, &p), tilted, base, SLACK * base));
            }
        }
    }
    Ok(out)
}
