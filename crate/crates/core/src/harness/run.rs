//! Running experiments and persisting their records.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    median, scaling_fit, tail_fit_with_exponent, tail_slope_ci, wilson_interval, ScalingFit, TailFit,
    MIN_EXCEEDANCES, MIN_TAIL_SAMPLES,
};
use crate::contour::extract_interface;
use crate::error::{Error, Result};
use crate::gibbs::{coupled_sweep, ChainState, MixingCertificate, ModelParams, Sampler, SamplerSpec};
use crate::harness::config::{ExperimentConfig, ExperimentKind, ParsedConfig};
use crate::harness::plot::{Chart, Mark};
use crate::harness::verify::{verify_suite_with, CheckSummary, VerifyOptions};
use crate::lattice::{make_region, BoundaryCondition, LatticeRegion, MINUS, PLUS};
use crate::observables::{arithmetic_mesh, height_profile, summarize, GeometrySummary, HeightProfile};

/// Fixed leading CSV columns; height columns follow.
pub const CSV_BASE_COLUMNS: [&str; 12] = [
    "run_id",
    "N",
    "beta",
    "c_lambda",
    "seed",
    "chain",
    "sample_index",
    "max_height",
    "area_below",
    "minus_component",
    "overhang_max",
    "interface_length",
];

/// Observables of one recorded sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub n: u32,
    pub chain: u64,
    pub sample_index: usize,
    pub summary: GeometrySummary,
    /// `(x, hgt⁺_x, hgt⁻_x)` at the query columns for this `N`.
    pub heights: Vec<(i32, i32, i32)>,
}

impl ObservableRow {
    pub fn hgt_plus(&self, x: i32) -> Option<i32> {
        self.heights.iter().find(|h| h.0 == x).map(|h| h.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: u32,
    pub chain: u64,
    /// Stream index actually used by the RNG.
    pub stream: u64,
    pub certificate: MixingCertificate,
    pub total_sweeps: u64,
    pub samples: usize,
    pub seconds: f64,
    /// Coupling runs only: whether `lo <= hi` held at every sweep.
    pub order_preserved: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipointLevel {
    pub threshold: i32,
    pub at_least_one: usize,
    pub at_least_two: usize,
    pub p1: f64,
    pub p2: f64,
    pub p1_ci: (f64, f64),
    pub p2_ci: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitSummary {
    Tail {
        n: u32,
        column: i32,
        /// Fits with regressors `R^1`, `R^{3/2}`, `R^2`.
        fits: Vec<TailFit>,
        slope_ci: Option<(f64, f64)>,
    },
    Scaling {
        statistic: String,
        fit: ScalingFit,
        /// Medians divided by the predicted scale, per `N`.
        normalized_medians: Vec<(u32, f64)>,
        /// Largest over smallest normalized median.
        spread: f64,
    },
    Multipoint {
        n: u32,
        mesh: Vec<i32>,
        levels: Vec<MultipointLevel>,
        /// Largest threshold with at least 30 samples exceeding it somewhere on the mesh.
        decisive: Option<i32>,
    },
    Verify {
        passed: bool,
        max_deviation: f64,
        summary: Vec<CheckSummary>,
    },
    Note {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub version: String,
    pub config_echo: Vec<(String, String)>,
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub rows: Vec<ObservableRow>,
    pub row_count: usize,
    pub chains: Vec<ChainReport>,
    pub fits: Vec<FitSummary>,
    pub wall_clock_seconds: f64,
    /// False when any chain hit its burn-in cap before coalescing.
    pub mixing_certified: bool,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

impl RunRecord {
    pub fn verify_passed(&self) -> Option<bool> {
        self.fits.iter().find_map(|f| match f {
            FitSummary::Verify { passed, .. } => Some(*passed),
            _ => None,
        })
    }
}

/// Columns whose heights are recorded at size `n`.
pub fn query_columns(cfg: &ExperimentConfig, n: u32) -> Vec<i32> {
    let mut cols: BTreeSet<i32> = if cfg.columns.is_empty() {
        [n as i32 / 2].into()
    } else {
        cfg.columns.iter().copied().filter(|&x| (0..=n as i32).contains(&x)).collect()
    };
    if cfg.kind == ExperimentKind::Multipoint {
        cols.extend(multipoint_mesh(n, cfg.mesh_r));
    }
    cols.into_iter().collect()
}

/// Mesh over `[0, N]` with spacing `⌈√R⌉ N^{2/3}` rounded up.
pub fn multipoint_mesh(n: u32, r: f64) -> Vec<i32> {
    let spacing = (r.sqrt().ceil() * (n as f64).powf(2.0 / 3.0)).ceil().max(1.0) as i32;
    arithmetic_mesh(0, n as i32, spacing)
}

/// Stream index of chain `c` at size `n`: distinct for every `(n, c)`.
pub fn stream_index(n: u32, chain: u64) -> u64 {
    (n as u64) << 32 | chain
}

struct ChainOutput {
    report: ChainReport,
    rows: Vec<ObservableRow>,
}

fn box_for(n: u32) -> (LatticeRegion, BoundaryCondition) {
    (make_region(n, n), BoundaryCondition::Dobrushin)
}

fn observe(state: &ChainState, bc: &BoundaryCondition) -> Result<(GeometrySummary, HeightProfile)> {
    let sigma = state.config();
    let interface = extract_interface(&sigma, bc)?;
    Ok((summarize(&sigma, &interface, bc)?, height_profile(&interface)?))
}

fn sample_chain(cfg: &ExperimentConfig, n: u32, chain: u64) -> Result<ChainOutput> {
    let start = Instant::now();
    let (region, bc) = box_for(n);
    let stream = stream_index(n, chain);
    let mut spec = SamplerSpec::new(region, bc.clone(), ModelParams::critical(cfg.beta, cfg.c_lambda, n), cfg.seed);
    spec.chain = stream;
    spec.samples = cfg.samples;
    spec.thinning = cfg.thinning.at(n);
    spec.burn_in_cap = cfg.burn_in_cap.at(n);
    spec.check_interval = cfg.check_interval.at(n);
    let columns = query_columns(cfg, n);
    let mut sampler = Sampler::new(spec);
    let certificate = sampler.burn_in()?;
    let mut rows = Vec::with_capacity(cfg.samples);
    let mut total_sweeps = certificate.sweeps;
    while let Some(state) = sampler.advance()? {
        total_sweeps = state.sweeps();
        let (summary, profile) = observe(state, &bc)?;
        let heights = columns.iter().map(|&x| (x, profile.hgt_plus(x), profile.hgt_minus(x))).collect();
        rows.push(ObservableRow { n, chain, sample_index: rows.len(), summary, heights });
    }
    Ok(ChainOutput {
        report: ChainReport {
            n,
            chain,
            stream,
            certificate,
            total_sweeps,
            samples: rows.len(),
            seconds: start.elapsed().as_secs_f64(),
            order_preserved: None,
        },
        rows,
    })
}

/// Coupled all-minus and all-plus chains until their height profiles agree,
/// checking the sitewise order at every sweep.
fn coupling_chain(cfg: &ExperimentConfig, n: u32, chain: u64) -> Result<ChainOutput> {
    let start = Instant::now();
    let (region, bc) = box_for(n);
    let p = ModelParams::critical(cfg.beta, cfg.c_lambda, n);
    let stream = stream_index(n, chain);
    let mut lo = ChainState::constant(&region, MINUS, &bc, &p, cfg.seed, stream)?;
    let mut hi = ChainState::constant(&region, PLUS, &bc, &p, cfg.seed, stream)?;
    let cap = cfg.burn_in_cap.at(n);
    let interval = cfg.check_interval.at(n).max(1);
    let profile = |c: &ChainState| -> Result<HeightProfile> { height_profile(&extract_interface(&c.config(), &bc)?) };
    let mut preserved = true;
    let mut coalesced = profile(&lo)? == profile(&hi)?;
    while !coalesced && hi.sweeps() < cap {
        for _ in 0..interval.min(cap - hi.sweeps()) {
            match coupled_sweep(&mut lo, &mut hi) {
                Ok(()) => {}
                Err(Error::OrderViolation(_)) => {
                    preserved = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !preserved {
            break;
        }
        coalesced = profile(&lo)? == profile(&hi)?;
    }
    preserved &= lo.le(&hi);
    Ok(ChainOutput {
        report: ChainReport {
            n,
            chain,
            stream,
            certificate: MixingCertificate { coalesced, sweeps: hi.sweeps() },
            total_sweeps: hi.sweeps(),
            samples: 0,
            seconds: start.elapsed().as_secs_f64(),
            order_preserved: Some(preserved),
        },
        rows: Vec::new(),
    })
}

/// Run jobs on a small pool of scoped threads; results keep job order.
fn run_jobs<T: Send>(jobs: usize, work: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= jobs {
                    break;
                }
                let out = work(j);
                slots.lock().expect("no worker panics while holding the lock")[j] = Some(out);
            });
        }
    });
    slots.into_inner().expect("workers finished").into_iter().map(|s| s.expect("every job ran")).collect()
}

/// Run a parsed configuration and write `<run_id>.csv`, `<run_id>.json`
/// and, when enabled, `<run_id>.svg` into the output directory.
pub fn run_experiment(parsed: &ParsedConfig) -> Result<RunRecord> {
    let cfg = &parsed.config;
    cfg.validate()?;
    let start = Instant::now();
    let mut chains = Vec::new();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    if cfg.kind == ExperimentKind::Verify {
        let report = verify_suite_with(&VerifyOptions::default());
        fits.push(FitSummary::Verify {
            passed: report.passed(),
            max_deviation: report.max_deviation(),
            summary: report.summary(),
        });
    } else {
        let jobs: Vec<(u32, u64)> = cfg.sizes.iter().flat_map(|&n| (0..cfg.chains).map(move |c| (n, c))).collect();
        let outputs = run_jobs(jobs.len(), |j| {
            let (n, c) = jobs[j];
            if cfg.kind == ExperimentKind::Coupling {
                coupling_chain(cfg, n, c)
            } else {
                sample_chain(cfg, n, c)
            }
        })?;
        for out in outputs {
            chains.push(out.report);
            rows.extend(out.rows);
        }
        fits = analyse(cfg, &rows)?;
    }
    let mixing_certified = chains.iter().all(|c| c.certificate.coalesced);
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    let csv_path = dir.join(format!("{}.csv", cfg.run_id));
    let json_path = dir.join(format!("{}.json", cfg.run_id));
    let svg_path = cfg.svg.then(|| dir.join(format!("{}.svg", cfg.run_id)));

    write_atomic(&csv_path, csv_bytes(cfg, &rows)?.as_slice())?;
    let record = RunRecord {
        run_id: cfg.run_id.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_echo: parsed.echo.clone(),
        config: cfg.clone(),
        row_count: rows.len(),
        rows,
        chains,
        fits,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        mixing_certified,
        csv_path,
        json_path: json_path.clone(),
        svg_path: svg_path.clone(),
    };
    let json = serde_json::to_vec_pretty(&record).map_err(|e| Error::InternalInvariant(format!("record serialisation: {e}")))?;
    write_atomic(&json_path, &json)?;
    if let Some(path) = &svg_path {
        write_atomic(path, diagnostic_chart(&record).to_svg().as_bytes())?;
    }
    Ok(record)
}

/// Write to a temporary file beside `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |source| Error::Io { path: path.into(), source };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// The observable table in its fixed schema.
pub fn csv_bytes(cfg: &ExperimentConfig, rows: &[ObservableRow]) -> Result<Vec<u8>> {
    let columns: BTreeSet<i32> = if cfg.kind.samples_chains() {
        cfg.sizes.iter().flat_map(|&n| query_columns(cfg, n)).collect()
    } else {
        BTreeSet::new()
    };
    let mut header: Vec<String> = CSV_BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for x in &columns {
        header.push(format!("hgt_plus_{x}"));
        header.push(format!("hgt_minus_{x}"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InternalInvariant(format!("csv: {e}"));
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let s = &r.summary;
        let mut rec = vec![
            cfg.run_id.clone(),
            r.n.to_string(),
            cfg.beta.to_string(),
            cfg.c_lambda.to_string(),
            cfg.seed.to_string(),
            r.chain.to_string(),
            r.sample_index.to_string(),
            s.max_height.to_string(),
            s.area_below.to_string(),
            s.minus_component.to_string(),
            s.overhang_max.to_string(),
            s.interface_length.to_string(),
        ];
        let by_x: BTreeMap<i32, (i32, i32)> = r.heights.iter().map(|&(x, p, m)| (x, (p, m))).collect();
        for x in &columns {
            match by_x.get(x) {
                Some((p, m)) => {
                    rec.push(p.to_string());
                    rec.push(m.to_string());
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::InternalInvariant(format!("csv: {e}")))
}

fn rows_for(rows: &[ObservableRow], n: u32) -> impl Iterator<Item = &ObservableRow> {
    rows.iter().filter(move |r| r.n == n)
}

fn scaling_summary(
    cfg: &ExperimentConfig,
    rows: &[ObservableRow],
    statistic: &str,
    value: impl Fn(&ObservableRow) -> f64,
    scale: impl Fn(f64) -> f64,
    correction: bool,
) -> Result<FitSummary> {
    let pairs: Vec<(u32, f64)> = rows.iter().map(|r| (r.n, value(r))).collect();
    let fit = scaling_fit(&pairs, correction, cfg.resamples, cfg.seed)?;
    let normalized: Vec<(u32, f64)> = fit.points.iter().map(|p| (p.n, p.median / scale(p.n as f64))).collect();
    let hi = normalized.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = normalized.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(FitSummary::Scaling { statistic: statistic.into(), fit, normalized_medians: normalized, spread: hi / lo })
}

/// Median of `value` per size.
pub fn medians_by_size(rows: &[ObservableRow], value: impl Fn(&ObservableRow) -> f64) -> Vec<(u32, f64)> {
    let sizes: BTreeSet<u32> = rows.iter().map(|r| r.n).collect();
    sizes.into_iter().map(|n| (n, median(&rows_for(rows, n).map(&value).collect::<Vec<_>>()))).collect()
}

/// Exceedance-count law over thresholds `t = 0, 1, ...` for a mesh.
pub fn multipoint_levels(rows: &[ObservableRow], mesh: &[i32]) -> Vec<MultipointLevel> {
    let counts = |t: i32| -> Vec<usize> {
        rows.iter().map(|r| mesh.iter().filter(|&&x| r.hgt_plus(x).is_some_and(|h| h > t)).count()).collect()
    };
    let total = rows.len();
    let top = rows.iter().flat_map(|r| mesh.iter().filter_map(|&x| r.hgt_plus(x))).max().unwrap_or(0);
    (0..=top.max(0))
        .map(|t| {
            let c = counts(t);
            let one = c.iter().filter(|&&k| k >= 1).count();
            let two = c.iter().filter(|&&k| k >= 2).count();
            let frac = |k: usize| if total == 0 { 0.0 } else { k as f64 / total as f64 };
            MultipointLevel {
                threshold: t,
                at_least_one: one,
                at_least_two: two,
                p1: frac(one),
                p2: frac(two),
                p1_ci: wilson_interval(one, total, 1.959964),
                p2_ci: wilson_interval(two, total, 1.959964),
            }
        })
        .collect()
}

/// Fits that lack data become notes; other errors abort.
fn or_note(fit: Result<FitSummary>) -> Result<FitSummary> {
    match fit {
        Err(Error::InsufficientData(m)) => Ok(FitSummary::Note { message: m }),
        other => other,
    }
}

fn analyse(cfg: &ExperimentConfig, rows: &[ObservableRow]) -> Result<Vec<FitSummary>> {
    let note = |m: String| FitSummary::Note { message: m };
    let mut fits = Vec::new();
    let distinct = cfg.sizes.iter().collect::<BTreeSet<_>>().len();
    match cfg.kind {
        ExperimentKind::Tail => {
            for &n in &cfg.sizes {
                let x = query_columns(cfg, n)[0];
                let heights: Vec<i32> = rows_for(rows, n).filter_map(|r| r.hgt_plus(x)).collect();
                if heights.len() < MIN_TAIL_SAMPLES {
                    fits.push(note(format!("N={n}: {} samples, tail fit needs {MIN_TAIL_SAMPLES}", heights.len())));
                    continue;
                }
                let fits_n = [1.0, 1.5, 2.0]
                    .into_iter()
                    .map(|a| tail_fit_with_exponent(&heights, n, a))
                    .collect::<Result<Vec<_>>>()?;
                let slope_ci = tail_slope_ci(&heights, n, 1.5, cfg.resamples, 0.95, cfg.seed).ok();
                fits.push(FitSummary::Tail { n, column: x, fits: fits_n, slope_ci });
            }
        }
        ExperimentKind::Area | ExperimentKind::MaxHeight if distinct < 3 || rows.is_empty() => {
            fits.push(note(format!("scaling fits need samples at 3 distinct N, have {distinct}")));
        }
        ExperimentKind::Area => {
            fits.push(or_note(scaling_summary(cfg, rows, "area_below", |r| r.summary.area_below as f64, |n| n.powf(4.0 / 3.0), false))?);
            fits.push(or_note(scaling_summary(cfg, rows, "minus_component", |r| r.summary.minus_component as f64, |n| n.powf(4.0 / 3.0), false))?);
        }
        ExperimentKind::MaxHeight => {
            fits.push(or_note(scaling_summary(
                cfg,
                rows,
                "max_height",
                |r| r.summary.max_height as f64,
                |n| n.cbrt() * n.ln().powf(2.0 / 3.0),
                true,
            ))?);
        }
        ExperimentKind::Multipoint => {
            for &n in &cfg.sizes {
                let mesh = multipoint_mesh(n, cfg.mesh_r);
                let sub: Vec<ObservableRow> = rows_for(rows, n).cloned().collect();
                let levels = multipoint_levels(&sub, &mesh);
                let decisive = levels.iter().filter(|l| l.at_least_one >= MIN_EXCEEDANCES).map(|l| l.threshold).max();
                fits.push(FitSummary::Multipoint { n, mesh, levels, decisive });
            }
        }
        ExperimentKind::Sample | ExperimentKind::Coupling | ExperimentKind::Verify => {}
    }
    Ok(fits)
}

fn diagnostic_chart(record: &RunRecord) -> Chart {
    let title = format!("{} ({})", record.run_id, record.config.kind);
    for fit in &record.fits {
        match fit {
            FitSummary::Tail { n, fits, .. } => {
                let Some(f) = fits.iter().find(|f| f.exponent == 1.5) else { continue };
                let pts: Vec<(f64, f64)> = f.levels.iter().filter(|l| l.used).map(|l| (l.r.powf(1.5), l.survival.ln())).collect();
                let mut chart = Chart::new(&format!("{title}: N={n}"), "R^(3/2)", "log P(hgt > R N^(1/3))")
                    .with("empirical", Mark::Points, pts.clone());
                if let Some(l) = f.fit {
                    let line = pts.iter().map(|&(x, _)| (x, l.intercept + l.slope * x)).collect();
                    chart = chart.with(&format!("slope {:.3}, R2 {:.3}", l.slope, l.r_squared), Mark::Line, line);
                }
                return chart;
            }
            FitSummary::Scaling { statistic, fit, .. } => {
                let pts: Vec<(f64, f64)> = fit.points.iter().map(|p| ((p.n as f64).ln(), p.median.ln())).collect();
                let line = pts.iter().map(|&(x, _)| (x, fit.intercept + fit.slope * x)).collect();
                return Chart::new(&title, "log N", &format!("log median {statistic}"))
                    .with("medians", Mark::Points, pts)
                    .with(&format!("slope {:.3}", fit.slope), Mark::Line, line);
            }
            FitSummary::Multipoint { n, levels, .. } => {
                let p1 = levels.iter().map(|l| (l.threshold as f64, l.p1)).collect();
                let p2 = levels.iter().map(|l| (l.threshold as f64, l.p2)).collect();
                return Chart::new(&format!("{title}: N={n}"), "threshold", "probability")
                    .with("P(count >= 1)", Mark::Line, p1)
                    .with("P(count >= 2)", Mark::Line, p2);
            }
            _ => {}
        }
    }
    let sweeps = record.chains.iter().map(|c| ((c.n as f64).ln(), (c.certificate.sweeps.max(1) as f64).ln())).collect();
    Chart::new(&title, "log N", "log burn-in sweeps").with("chains", Mark::Points, sweeps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind, dir: &Path) -> ParsedConfig {
        let cfg = ExperimentConfig {
            kind,
            run_id: format!("t-{kind}"),
            sizes: vec![6, 8, 10],
            samples: 4,
            thinning: "3".parse().unwrap(),
            output_dir: dir.to_path_buf(),
            svg: true,
            ..Default::default()
        };
        ExperimentConfig::parse(&cfg.to_text()).unwrap()
    }

    #[test]
    fn zero_samples_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = small(ExperimentKind::Sample, dir.path());
        p.config.samples = 0;
        let rec = run_experiment(&p).unwrap();
        assert_eq!(rec.row_count, 0);
        let text = std::fs::read_to_string(&rec.csv_path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("run_id,N,beta,c_lambda,seed,chain,sample_index,max_height,area_below"));
        assert!(text.contains("hgt_plus_3,hgt_minus_3"));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = small(ExperimentKind::Area, dir.path());
        let a = std::fs::read(run_experiment(&p).unwrap().csv_path).unwrap();
        let b = std::fs::read(run_experiment(&p).unwrap().csv_path).unwrap();
        assert_eq!(a, b);
        assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 3 * 4);
        let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("t-area.json")).unwrap()).unwrap();
        assert_eq!(json["config_echo"][0][0], "kind");
        assert!(dir.path().join("t-area.svg").exists());
        // no temporary files left behind
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
    }

    #[test]
    fn coupling_preserves_order() {
        let dir = tempfile::tempdir().unwrap();
        let rec = run_experiment(&small(ExperimentKind::Coupling, dir.path())).unwrap();
        assert_eq!(rec.chains.len(), 3);
        assert!(rec.chains.iter().all(|c| c.order_preserved == Some(true)));
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = small(ExperimentKind::Sample, dir.path());
        p.config.beta = 0.3;
        assert!(matches!(run_experiment(&p), Err(Error::InvalidConfig(_))));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn multipoint_counts() {
        let row = |hs: &[(i32, i32)]| ObservableRow {
            n: 8,
            chain: 0,
            sample_index: 0,
            summary: GeometrySummary { area_below: 0, minus_component: 0, max_height: 0, overhang_max: 0, interface_length: 0 },
            heights: hs.iter().map(|&(x, h)| (x, h, h)).collect(),
        };
        let rows = vec![row(&[(0, 3), (4, 0)]), row(&[(0, 2), (4, 2)]), row(&[(0, 0), (4, 0)])];
        let levels = multipoint_levels(&rows, &[0, 4]);
        assert_eq!(levels.len(), 4);
        assert_eq!((levels[0].at_least_one, levels[0].at_least_two), (2, 1));
        assert_eq!((levels[2].at_least_one, levels[2].at_least_two), (1, 0));
        assert!(multipoint_mesh(256, 4.0).windows(2).all(|w| w[1] - w[0] == 81));
    }

    #[test]
    fn streams_are_distinct() {
        let ids: BTreeSet<u64> = [32u32, 64].iter().flat_map(|&n| (0..3).map(move |c| stream_index(n, c))).collect();
        assert_eq!(ids.len(), 6);
    }
}
