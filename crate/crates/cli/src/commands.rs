//! Experiment drivers behind the subcommands.
//!
//! Each `cmd_*` function performs one subcommand end to end and returns the
//! summary printed on stdout; the building blocks are public so tests can
//! run the same pipeline in memory.

use std::fmt::Write as _;
use std::path::Path;

use multiband::combine::{
    bp_combine, omp_combine, raf, sidelobes, pslr, spbp_profile, spbp_search_k1, spbp_select_k0,
    subband_profiles, Lobe, OmpConfig, RangeGrid, RangeProfile, SpbpConfig,
};
use multiband::metrics::{
    align_rigid, coherence_sweep, detect_peaks, empw, mpc, nmpm, CoherenceReport, DetectionSet,
    PeakDetectConfig, SweepConfig,
};
use multiband::preproc::{calibrate, estimate_cfr};
use multiband::scene::RcsModel;
use multiband::subband::{
    gpp_fr3_allocations, plan_from_allocations, sweep_duration, OfdmParams, SubbandPlan, Tiling,
};
use multiband::synth::{modulate, simulate_sweep, Cfr, CfrState, HardwareResponse};
use num_complex::Complex;
use rayon::prelude::*;

use crate::dataset::{CfrDataset, DatasetHeader};
use crate::error::{CliError, CliResult};
use crate::output::{db, num, Csv};
use crate::scenario::{Analysis, HardwareSetting, Scenario, Truth};

/// Combination algorithm of the `combine` and `metrics` subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Bp,
    Spbp,
    Omp,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Bp => "bp",
            Algorithm::Spbp => "spbp",
            Algorithm::Omp => "omp",
        })
    }
}

fn hardware_response(plan: &SubbandPlan<f64>, hw: &HardwareSetting) -> CliResult<HardwareResponse<f64>> {
    match hw {
        HardwareSetting::Identity => Ok(HardwareResponse::identity(plan)),
        HardwareSetting::Ripple(p) => HardwareResponse::generate(plan, p).map_err(CliError::config),
    }
}

/// Synthesizes the scenario's sweep: channel, hardware, clock and noise,
/// then pilot modulation and least-squares estimation.
pub fn simulate(scenario: &Scenario, provenance: &str) -> CliResult<CfrDataset> {
    let plan = &scenario.plan;
    let hw = hardware_response(plan, &scenario.hardware)?;
    let raw = simulate_sweep(
        &scenario.scene,
        plan,
        &hw,
        &scenario.clock,
        &scenario.noise,
        scenario.snapshots,
    )
    .map_err(CliError::config)?;
    let pilots: Vec<Vec<Complex<f64>>> = (0..plan.len())
        .map(|k| plan.ofdm().pilots(plan.subcarrier_count(k)))
        .collect();
    let snapshots = raw
        .into_par_iter()
        .map(|snap| {
            snap.iter()
                .map(|h| {
                    let rx = modulate(&pilots[h.subband], h)?;
                    estimate_cfr(h.subband, &rx, &pilots[h.subband])
                })
                .collect::<multiband::Result<Vec<_>>>()
        })
        .collect::<multiband::Result<Vec<_>>>()
        .map_err(CliError::algorithm)?;
    let target_seeds = scenario
        .scene
        .targets()
        .iter()
        .filter_map(|t| match t.rcs_model() {
            RcsModel::RandomPhase { seed, .. } => Some(*seed),
            _ => None,
        })
        .collect();
    let phase_noise = scenario.clock.phase_noise_floor;
    Ok(CfrDataset {
        header: DatasetHeader {
            plan: plan.clone(),
            snapshots: scenario.snapshots,
            hardware: scenario.hardware.clone(),
            snr_db: scenario.noise.snr_db,
            noise_seed: scenario.noise.seed,
            phase_noise_dbc_hz: phase_noise.is_finite().then_some(phase_noise),
            lo_hz: scenario.clock.lo_frequency,
            target_seeds,
            provenance: provenance.to_string(),
        },
        snapshots,
    })
}

/// Calibrated CFRs of every snapshot.
pub fn calibrate_dataset(dataset: &CfrDataset) -> CliResult<Vec<Vec<Cfr<f64>>>> {
    let hw = dataset.header.hardware_response()?;
    dataset
        .snapshots
        .iter()
        .map(|snap| {
            snap.iter()
                .map(|h| calibrate(h, &hw))
                .collect::<multiband::Result<Vec<_>>>()
        })
        .collect::<multiband::Result<Vec<_>>>()
        .map_err(CliError::algorithm)
}

/// Per-snapshot subband range profiles, `out[s][k]`.
pub fn snapshot_profiles(
    calibrated: &[Vec<Cfr<f64>>],
    plan: &SubbandPlan<f64>,
    grid: &RangeGrid<f64>,
    oversampling: usize,
) -> CliResult<Vec<Vec<RangeProfile<f64>>>> {
    calibrated
        .iter()
        .map(|snap| subband_profiles(snap, plan, grid, oversampling))
        .collect::<multiband::Result<Vec<_>>>()
        .map_err(CliError::algorithm)
}

/// Snapshot mean of each subband's complex profile.
pub fn mean_subband_profiles(per_snapshot: &[Vec<RangeProfile<f64>>]) -> CliResult<Vec<RangeProfile<f64>>> {
    let first = per_snapshot
        .first()
        .ok_or_else(|| CliError::Data("no snapshots".into()))?;
    let n = per_snapshot.len() as f64;
    first
        .iter()
        .enumerate()
        .map(|(k, p0)| {
            let mut acc = vec![Complex::new(0.0, 0.0); p0.samples.len()];
            for snap in per_snapshot {
                for (a, x) in acc.iter_mut().zip(&snap[k].samples) {
                    *a += x;
                }
            }
            let samples = acc.into_iter().map(|a| a / n).collect();
            RangeProfile::new(p0.grid, samples, p0.kind).map_err(CliError::algorithm)
        })
        .collect()
}

/// BP of the snapshot-averaged profiles, equal to the mean of per-snapshot
/// BP profiles because BP is linear.
pub fn bp_average(per_snapshot: &[Vec<RangeProfile<f64>>]) -> CliResult<RangeProfile<f64>> {
    bp_combine(&mean_subband_profiles(per_snapshot)?).map_err(CliError::algorithm)
}

/// Chosen SPBP subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpbpSubsets {
    pub k0: Vec<usize>,
    pub k1: Vec<usize>,
}

pub fn spbp_subsets(plan: &SubbandPlan<f64>, cfg: &SpbpConfig<f64>) -> CliResult<SpbpSubsets> {
    let k0 = spbp_select_k0(plan.len(), cfg.seed).map_err(CliError::algorithm)?;
    let k1 = spbp_search_k1(plan, &k0, cfg).map_err(CliError::algorithm)?;
    Ok(SpbpSubsets { k0, k1 })
}

/// Mean over snapshots of the per-snapshot SPBP magnitude profiles.
pub fn spbp_average(
    per_snapshot: &[Vec<RangeProfile<f64>>],
    subsets: &SpbpSubsets,
) -> CliResult<RangeProfile<f64>> {
    let mut acc: Option<RangeProfile<f64>> = None;
    for snap in per_snapshot {
        let p = spbp_profile(snap, &subsets.k0, &subsets.k1).map_err(CliError::algorithm)?;
        match &mut acc {
            None => acc = Some(p),
            Some(a) => {
                for (x, y) in a.samples.iter_mut().zip(&p.samples) {
                    *x += y;
                }
            }
        }
    }
    let mut out = acc.ok_or_else(|| CliError::Data("no snapshots".into()))?;
    let n = per_snapshot.len() as f64;
    for x in &mut out.samples {
        *x /= n;
    }
    Ok(out)
}

/// Snapshot mean of the calibrated CFRs.
pub fn mean_cfrs(calibrated: &[Vec<Cfr<f64>>]) -> CliResult<Vec<Cfr<f64>>> {
    let first = calibrated
        .first()
        .ok_or_else(|| CliError::Data("no snapshots".into()))?;
    let n = calibrated.len() as f64;
    Ok(first
        .iter()
        .enumerate()
        .map(|(k, c0)| {
            let samples = (0..c0.len())
                .map(|i| calibrated.iter().map(|s| s[k].samples[i]).sum::<Complex<f64>>() / n)
                .collect();
            Cfr::new(c0.subband, samples, CfrState::Calibrated)
        })
        .collect())
}

/// Outcome of one combination run.
#[derive(Debug, Clone)]
pub struct Combined {
    pub algorithm: Algorithm,
    pub profile: RangeProfile<f64>,
    pub detections: DetectionSet<f64>,
    pub notes: Vec<String>,
}

/// Analysis settings resolved against a plan.
#[derive(Debug, Clone)]
pub struct Settings {
    pub grid: RangeGrid<f64>,
    pub oversampling: usize,
    pub peaks: PeakDetectConfig<f64>,
}

impl Settings {
    pub fn resolve(analysis: &Analysis, plan: &SubbandPlan<f64>) -> CliResult<Self> {
        Ok(Self {
            grid: analysis.grid(plan)?,
            oversampling: analysis.oversampling()?,
            peaks: analysis.peaks(plan)?,
        })
    }
}

/// Runs `algorithm` on calibrated snapshots.
///
/// BP averages complex profiles and SPBP magnitude profiles over snapshots;
/// OMP runs once on the snapshot-mean CFRs. Detections always come from
/// [`detect_peaks`] on the resulting profile.
pub fn combine(
    algorithm: Algorithm,
    calibrated: &[Vec<Cfr<f64>>],
    plan: &SubbandPlan<f64>,
    settings: &Settings,
    spbp: Option<&SpbpConfig<f64>>,
    omp: Option<&OmpConfig<f64>>,
    truth: Option<&Truth>,
) -> CliResult<Combined> {
    let mut notes = Vec::new();
    let profile = match algorithm {
        Algorithm::Bp => {
            let per = snapshot_profiles(calibrated, plan, &settings.grid, settings.oversampling)?;
            bp_average(&per)?
        }
        Algorithm::Spbp => {
            let cfg = spbp.ok_or_else(|| CliError::Config("SPBP settings missing".into()))?;
            let subsets = spbp_subsets(plan, cfg)?;
            notes.push(format!("SPBP K0 = {:?}, K1 = {:?}", subsets.k0, subsets.k1));
            let per = snapshot_profiles(calibrated, plan, &settings.grid, settings.oversampling)?;
            spbp_average(&per, &subsets)?
        }
        Algorithm::Omp => {
            let cfg = omp.ok_or_else(|| CliError::Config("OMP settings missing".into()))?;
            let out = omp_combine(&mean_cfrs(calibrated)?, plan, cfg).map_err(CliError::algorithm)?;
            notes.push(format!(
                "OMP selected {} atoms, residual fraction {:.3e}",
                out.atoms.len(),
                out.residual_fraction
            ));
            if out.residual_fraction > cfg.residual_threshold {
                notes.push(format!(
                    "OMP residual stayed above the threshold {:.1e}: the point-scatterer model does not fit",
                    cfg.residual_threshold
                ));
            }
            out.profile
        }
    };
    let detections = detect_peaks(&profile, &settings.peaks).map_err(CliError::algorithm)?;
    if let Some(t) = truth {
        if detections.len() < t.ranges.len() {
            notes.push(format!(
                "under-detection: {} of {} targets detected",
                detections.len(),
                t.ranges.len()
            ));
        }
    }
    Ok(Combined {
        algorithm,
        profile,
        detections,
        notes,
    })
}

fn profile_csv(p: &RangeProfile<f64>) -> Csv {
    let mag = p.magnitudes();
    let peak = mag.iter().copied().fold(0.0, f64::max);
    let mut csv = Csv::new("profile", &["range_m", "magnitude", "magnitude_db"]);
    for (i, &m) in mag.iter().enumerate() {
        let rel = if peak > 0.0 { m / peak } else { 0.0 };
        csv.row(&[num(p.grid.at(i)), num(m), db(rel)]);
    }
    csv
}

fn detections_csv(d: &DetectionSet<f64>) -> Csv {
    let peak = d.detections.iter().map(|x| x.magnitude).fold(0.0, f64::max);
    let mut csv = Csv::new("detections", &["range_m", "magnitude", "magnitude_db"]);
    for x in &d.detections {
        let rel = if peak > 0.0 { x.magnitude / peak } else { 0.0 };
        csv.row(&[num(x.range), num(x.magnitude), db(rel)]);
    }
    csv
}

pub fn cmd_simulate(scenario: &Path, out: &Path) -> CliResult<String> {
    let s = Scenario::load(scenario)?;
    let name = scenario
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let data = simulate(&s, &format!("simulated from scenario {name}"))?;
    crate::output::write_atomic(out, &data.to_text())?;
    Ok(format!(
        "wrote {} snapshots x {} subbands ({} samples) to {}\nsweep duration: {} s\nnominal resolution: {:.4} m (aperture {} Hz)",
        s.snapshots,
        s.plan.len(),
        s.snapshots * s.plan.total_subcarriers(),
        out.display(),
        sweep_duration(&s.plan),
        s.plan.nominal_resolution(),
        s.plan.aperture()
    ))
}

/// Plan source of the `raf` subcommand.
#[derive(Debug, Clone)]
pub enum PlanSource<'a> {
    Scenario(&'a Path),
    Allocations {
        labels: Vec<String>,
        granularity: f64,
        tiling: Tiling,
    },
}

pub fn resolve_plan(src: &PlanSource<'_>) -> CliResult<SubbandPlan<f64>> {
    match src {
        PlanSource::Scenario(p) => Ok(Scenario::load(p)?.plan),
        PlanSource::Allocations {
            labels,
            granularity,
            tiling,
        } => {
            // Subcarrier spacing does not enter the RAF.
            let ofdm = OfdmParams::new(granularity / 64.0, 0).map_err(CliError::config)?;
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            plan_from_allocations(&gpp_fr3_allocations(), &refs, *granularity, ofdm, 0.0, *tiling)
                .map_err(CliError::config)
        }
    }
}

/// RAF profile, PSLR and sidelobes of a plan.
#[derive(Debug, Clone)]
pub struct RafReport {
    pub profile: RangeProfile<f64>,
    pub pslr_db: f64,
    pub lobes: Vec<Lobe<f64>>,
}

pub fn raf_report(plan: &SubbandPlan<f64>, omega: f64, r_max: f64, step: f64) -> CliResult<RafReport> {
    let grid = RangeGrid::symmetric(r_max, step).map_err(CliError::config)?;
    let profile = raf(plan, &grid);
    let pslr_db = pslr(&profile, omega, r_max).map_err(CliError::algorithm)?;
    let lobes = sidelobes(&profile, omega, r_max);
    Ok(RafReport {
        profile,
        pslr_db,
        lobes,
    })
}

pub fn cmd_raf(
    plan: &PlanSource<'_>,
    out: &Path,
    omega: Option<f64>,
    r_max: f64,
    step: Option<f64>,
    lobes_out: Option<&Path>,
) -> CliResult<String> {
    let plan = resolve_plan(plan)?;
    let res = plan.nominal_resolution();
    let omega = omega.unwrap_or(1.2 * res);
    let rep = raf_report(&plan, omega, r_max, step.unwrap_or(res / 16.0))?;
    let mut csv = Csv::new("raf", &["range_m", "magnitude_db"]);
    for (i, m) in rep.profile.magnitudes().into_iter().enumerate() {
        csv.row(&[num(rep.profile.grid.at(i)), db(m)]);
    }
    csv.write(out)?;
    if let Some(path) = lobes_out {
        let mut lc = Csv::new("raf-lobes", &["range_m", "level_db"]);
        for l in &rep.lobes {
            lc.row(&[num(l.range), format!("{:.6}", l.level_db)]);
        }
        lc.write(path)?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "subbands: {}, aperture {} Hz, nominal resolution {:.4} m", plan.len(), plan.aperture(), res);
    let _ = writeln!(s, "PSLR: {:.3} dB (main lobe +-{:.4} m, |R| <= {} m)", rep.pslr_db, omega, r_max);
    let positive: Vec<&Lobe<f64>> = rep.lobes.iter().filter(|l| l.range > 0.0).take(5).collect();
    for l in positive {
        let _ = writeln!(s, "  lobe at +-{:.4} m: {:.2} dB", l.range, l.level_db);
    }
    Ok(s.trim_end().to_string())
}

/// Options of the `combine` subcommand.
#[derive(Debug, Clone)]
pub struct CombineArgs<'a> {
    pub dataset: &'a Path,
    pub algorithm: Algorithm,
    pub config: Option<&'a Path>,
    pub spbp_seed: Option<u64>,
    pub out: &'a Path,
    pub detections_out: &'a Path,
}

fn read_dataset(path: &Path) -> CliResult<CfrDataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    CfrDataset::parse(&text)
}

fn load_analysis(path: Option<&Path>) -> CliResult<Analysis> {
    path.map_or_else(|| Ok(Analysis::default()), Analysis::load)
}

pub fn cmd_combine(args: &CombineArgs<'_>) -> CliResult<String> {
    let data = read_dataset(args.dataset)?;
    let analysis = load_analysis(args.config)?;
    let plan = &data.header.plan;
    let settings = Settings::resolve(&analysis, plan)?;
    let spbp = match args.algorithm {
        Algorithm::Spbp => Some(analysis.spbp(plan, args.spbp_seed)?),
        _ => None,
    };
    let omp = match args.algorithm {
        Algorithm::Omp => Some(analysis.omp(plan)?),
        _ => None,
    };
    let calibrated = calibrate_dataset(&data)?;
    let truth = analysis.truth()?;
    let c = combine(
        args.algorithm,
        &calibrated,
        plan,
        &settings,
        spbp.as_ref(),
        omp.as_ref(),
        truth.as_ref(),
    )?;
    profile_csv(&c.profile).write(args.out)?;
    detections_csv(&c.detections).write(args.detections_out)?;
    let mut s = format!(
        "{}: {} detections at {:?} m",
        c.algorithm,
        c.detections.len(),
        c.detections
            .ranges()
            .iter()
            .map(|r| (r * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    for n in &c.notes {
        s.push('\n');
        s.push_str(n);
    }
    Ok(s)
}

/// Options of the `metrics` subcommand.
#[derive(Debug, Clone)]
pub struct MetricsArgs<'a> {
    pub dataset: &'a Path,
    pub algorithm: Algorithm,
    pub config: Option<&'a Path>,
    pub truth: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub spbp_seed: Option<u64>,
    pub out: &'a Path,
}

/// One row of the metrics table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: &'static str,
    /// Index of the BP detection, or `None` for set-level metrics.
    pub target: Option<usize>,
    pub range: Option<f64>,
    pub value: f64,
    pub unit: &'static str,
}

/// Coherence metrics at each BP detection of the snapshot-averaged profiles.
pub fn coherence_rows(
    means: &[RangeProfile<f64>],
    peaks: &PeakDetectConfig<f64>,
) -> CliResult<Vec<MetricRow>> {
    let combined = bp_combine(means).map_err(CliError::algorithm)?;
    let found = detect_peaks(&combined, peaks).map_err(CliError::algorithm)?;
    let mut rows = Vec::new();
    for (j, d) in found.detections.iter().enumerate() {
        let r = d.range;
        let push = |rows: &mut Vec<MetricRow>, metric, value, unit| {
            rows.push(MetricRow {
                metric,
                target: Some(j),
                range: Some(r),
                value,
                unit,
            })
        };
        push(&mut rows, "mpc", mpc(means, r).map_err(CliError::algorithm)?, "1");
        push(&mut rows, "nmpm", nmpm(&combined, means, r).map_err(CliError::algorithm)?, "dB");
        push(&mut rows, "empw", empw(&combined, r).map_err(CliError::algorithm)?, "m");
    }
    Ok(rows)
}

/// OSPA, detected count and alignment shift after rigid alignment to `truth`.
pub fn ospa_rows(detections: &DetectionSet<f64>, truth: &Truth, step: f64) -> CliResult<Vec<MetricRow>> {
    let a = align_rigid(detections, &truth.ranges, truth.mu, step).map_err(CliError::algorithm)?;
    let row = |metric, value, unit| MetricRow {
        metric,
        target: None,
        range: None,
        value,
        unit,
    };
    Ok(vec![
        row("ospa", a.ospa, "m"),
        row("detected_count", detections.len() as f64, "1"),
        row("true_count", truth.ranges.len() as f64, "1"),
        row("alignment_shift", a.shift, "m"),
    ])
}

pub fn metrics_csv(rows: &[MetricRow]) -> Csv {
    let mut csv = Csv::new("metrics", &["metric", "target", "range_m", "value", "unit"]);
    for r in rows {
        csv.row(&[
            r.metric.to_string(),
            r.target.map(|t| t.to_string()).unwrap_or_default(),
            r.range.map(num).unwrap_or_default(),
            num(r.value),
            r.unit.to_string(),
        ]);
    }
    csv
}

pub fn cmd_metrics(args: &MetricsArgs<'_>) -> CliResult<String> {
    let analysis = load_analysis(args.config)?;
    let truth = match (&args.truth, analysis.truth()?) {
        (Some(ranges), file) => {
            let mu = args.mu.or(file.as_ref().map(|t| t.mu)).ok_or_else(|| {
                CliError::Config("OSPA needs a cutoff: pass --mu or set [truth] mu_m".into())
            })?;
            if !(mu > 0.0) {
                return Err(CliError::Config(format!("--mu must be > 0, got {mu}")));
            }
            Truth {
                ranges: ranges.clone(),
                mu,
            }
        }
        (None, Some(mut t)) => {
            if let Some(mu) = args.mu {
                t.mu = mu;
            }
            t
        }
        (None, None) => {
            return Err(CliError::Config(
                "OSPA needs ground truth: pass --truth or set [truth] in --config".into(),
            ))
        }
    };
    let data = read_dataset(args.dataset)?;
    let plan = &data.header.plan;
    let settings = Settings::resolve(&analysis, plan)?;
    let calibrated = calibrate_dataset(&data)?;
    let per = snapshot_profiles(&calibrated, plan, &settings.grid, settings.oversampling)?;
    let means = mean_subband_profiles(&per)?;
    let mut rows = coherence_rows(&means, &settings.peaks)?;
    let spbp = match args.algorithm {
        Algorithm::Spbp => Some(analysis.spbp(plan, args.spbp_seed)?),
        _ => None,
    };
    let omp = match args.algorithm {
        Algorithm::Omp => Some(analysis.omp(plan)?),
        _ => None,
    };
    let c = combine(
        args.algorithm,
        &calibrated,
        plan,
        &settings,
        spbp.as_ref(),
        omp.as_ref(),
        Some(&truth),
    )?;
    rows.extend(ospa_rows(&c.detections, &truth, settings.grid.step())?);
    metrics_csv(&rows).write(args.out)?;
    let ospa = rows.iter().find(|r| r.metric == "ospa").map_or(f64::NAN, |r| r.value);
    Ok(format!(
        "{}: {} detections vs {} targets, OSPA {:.4} m (mu {} m)",
        c.algorithm,
        c.detections.len(),
        truth.ranges.len(),
        ospa,
        truth.mu
    ))
}

/// Coherence sweep of a scenario.
pub fn sweep_report(scenario: &Scenario, bandwidths: Vec<f64>) -> CliResult<CoherenceReport<f64>> {
    let data = simulate(scenario, "sweep")?;
    let calibrated = calibrate_dataset(&data)?;
    let settings = Settings::resolve(&scenario.analysis, &scenario.plan)?;
    let cfg = SweepConfig {
        total_bandwidths: bandwidths,
        grid: settings.grid,
        peaks: settings.peaks,
        oversampling: settings.oversampling,
    };
    coherence_sweep(&calibrated, &scenario.plan, &cfg).map_err(|e| match e {
        multiband::Error::InvalidArgument(m) => CliError::Config(m),
        other => CliError::algorithm(other),
    })
}

pub fn sweep_csv(report: &CoherenceReport<f64>) -> Csv {
    let mut csv = Csv::new(
        "coherence-sweep",
        &["center_frequency_hz", "total_bandwidth_hz", "mpc", "nmpm_db", "empw_m", "smoothed"],
    );
    for r in &report.rows {
        csv.row(&[
            num(r.center_frequency),
            num(r.total_bandwidth),
            num(r.mpc),
            num(r.nmpm_db),
            num(r.empw),
            r.smoothed.to_string(),
        ]);
    }
    csv
}

pub fn cmd_sweep(scenario: &Path, bandwidths: Option<Vec<f64>>, out: &Path) -> CliResult<String> {
    let s = Scenario::load(scenario)?;
    let bw = bandwidths
        .or_else(|| s.analysis.sweep_bandwidths())
        .ok_or_else(|| {
            CliError::Config("no total bandwidths: pass --total-bandwidths or set [sweep]".into())
        })?;
    let report = sweep_report(&s, bw)?;
    sweep_csv(&report).write(out)?;
    Ok(format!("wrote {} coherence rows to {}", report.rows.len(), out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TARGETS: &str = r#"
snapshots = 2
[plan]
kind = "allocations"
subcarrier_spacing_hz = 15.625e6
pilot_seed = 1
select = ["S1", "S2"]
granularity_hz = 0.5e9
[scene]
reference_frequency_hz = 8e9
[[scene.targets]]
range_m = 1.2
[[scene.targets]]
range_m = 1.4
[grid]
start_m = 0.5
stop_m = 2.5
step_m = 0.002
[truth]
ranges_m = [1.2, 1.4]
mu_m = 0.2
"#;

    fn scenario() -> Scenario {
        Scenario::parse("two.toml", TWO_TARGETS).unwrap()
    }

    #[test]
    fn noiseless_bp_resolves_two_targets() {
        let s = scenario();
        let data = simulate(&s, "test").unwrap();
        let cal = calibrate_dataset(&data).unwrap();
        let settings = Settings::resolve(&s.analysis, &s.plan).unwrap();
        let truth = s.analysis.truth().unwrap().unwrap();
        let c = combine(Algorithm::Bp, &cal, &s.plan, &settings, None, None, Some(&truth)).unwrap();
        assert_eq!(c.detections.len(), 2, "{:?}", c.detections.ranges());
        let rows = ospa_rows(&c.detections, &truth, settings.grid.step()).unwrap();
        assert!(rows[0].value < 0.01);
        let means = mean_subband_profiles(&snapshot_profiles(&cal, &s.plan, &settings.grid, 16).unwrap()).unwrap();
        for r in coherence_rows(&means, &settings.peaks).unwrap() {
            if r.metric == "mpc" {
                assert!(r.value > 0.9);
            }
        }
    }

    #[test]
    fn empty_noiseless_scene_is_zero() {
        let text = "[plan]\nkind = \"sweep\"\nsubcarrier_spacing_hz = 62.5e6\npilot_seed = 0\nfirst_carrier_hz = 7e9\nbandwidth_hz = 0.5e9\ncount = 2\n";
        let s = Scenario::parse("e.toml", text).unwrap();
        let d = simulate(&s, "empty").unwrap();
        assert!(d.snapshots[0].iter().all(|c| c.samples.iter().all(|x| x.norm() == 0.0)));
    }

    #[test]
    fn metrics_rows_render() {
        let rows = vec![MetricRow {
            metric: "ospa",
            target: None,
            range: None,
            value: 0.1,
            unit: "m",
        }];
        let csv = metrics_csv(&rows);
        assert_eq!(
            csv.as_str(),
            "# multiband metrics v1\nmetric,target,range_m,value,unit\nospa,,,1.0000000000000001e-1,m\n"
        );
    }
}
