//! TOML scenario files.
//!
//! A scenario describes the subband plan, the scene, the impairments and
//! the analysis settings of one experiment. Unknown keys are rejected and
//! every error names the line of the offending section.

use std::ops::Range;
use std::path::Path;

use multiband::combine::{OmpConfig, RangeGrid, SpbpConfig};
use multiband::metrics::PeakDetectConfig;
use multiband::preproc::DEFAULT_OVERSAMPLING;
use multiband::scene::{AntennaGains, RcsModel, ScatteringCenter, Scene};
use multiband::subband::{
    gpp_fr3_allocations, make_contiguous_sweep, plan_from_allocations, OfdmParams, Subband,
    SubbandPlan, Tiling,
};
use multiband::synth::{ClockModel, HardwareParams, NoiseModel};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    snapshots: Option<Spanned<usize>>,
    plan: Spanned<PlanSpec>,
    // Not spanned: `[[scene.targets]]` alone defines the table implicitly.
    scene: Option<SceneSpec>,
    hardware: Option<Spanned<HardwareSpec>>,
    clock: Option<Spanned<ClockSpec>>,
    noise: Option<Spanned<NoiseSpec>>,
    grid: Option<Spanned<GridSpec>>,
    peaks: Option<Spanned<PeaksSpec>>,
    spbp: Option<Spanned<SpbpSpec>>,
    omp: Option<Spanned<OmpSpec>>,
    truth: Option<Spanned<TruthSpec>>,
    sweep: Option<Spanned<SweepSpec>>,
}

/// Sections that only configure analysis; also accepted on their own.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisFile {
    grid: Option<Spanned<GridSpec>>,
    peaks: Option<Spanned<PeaksSpec>>,
    spbp: Option<Spanned<SpbpSpec>>,
    omp: Option<Spanned<OmpSpec>>,
    truth: Option<Spanned<TruthSpec>>,
    sweep: Option<Spanned<SweepSpec>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanKind {
    Sweep,
    Explicit,
    Allocations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TilingSpec {
    PerInterval,
    Packed,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub kind: PlanKind,
    pub subcarrier_spacing_hz: f64,
    pub pilot_seed: u64,
    #[serde(default)]
    pub switch_time_s: f64,
    pub first_carrier_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub count: Option<usize>,
    pub subbands: Option<Vec<BandSpec>>,
    pub select: Option<Vec<String>>,
    pub granularity_hz: Option<f64>,
    pub tiling: Option<TilingSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneSpec {
    reference_frequency_hz: Option<f64>,
    gains: Option<GainsSpec>,
    #[serde(default)]
    targets: Vec<TargetSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsSpec {
    tx: Option<f64>,
    rx: Option<f64>,
    per_subband: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModelKind {
    #[default]
    Isotropic,
    PhaseDrift,
    RandomPhase,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetSpec {
    range_m: f64,
    #[serde(default = "one")]
    rcs_m2: f64,
    #[serde(default)]
    model: ModelKind,
    #[serde(default)]
    phase_rad: f64,
    drift_rad_per_hz: Option<f64>,
    drift_reference_hz: Option<f64>,
    phase_std_rad: Option<f64>,
    seed: Option<u64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum HardwareKind {
    Identity,
    #[default]
    Ripple,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardwareSpec {
    #[serde(default)]
    model: HardwareKind,
    ripple_db: Option<f64>,
    phase_ripple_deg: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClockSpec {
    phase_noise_dbc_hz: Option<f64>,
    lo_hz: Option<f64>,
    #[serde(default)]
    timing_offset_s: f64,
    #[serde(default)]
    cfo: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSpec {
    snr_db: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    start_m: Option<f64>,
    stop_m: Option<f64>,
    step_m: Option<f64>,
    oversampling: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeaksSpec {
    threshold_db: Option<f64>,
    min_separation_m: Option<f64>,
    exclusion_m: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpbpSpec {
    omega_m: Option<f64>,
    r_max_m: Option<f64>,
    min_cardinality: Option<usize>,
    min_coverage: Option<f64>,
    step_m: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OmpSpec {
    start_m: Option<f64>,
    stop_m: Option<f64>,
    step_m: Option<f64>,
    max_atoms: Option<usize>,
    residual_threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthSpec {
    ranges_m: Vec<f64>,
    mu_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    total_bandwidths_hz: Vec<f64>,
}

/// Transceiver response used to synthesize and to calibrate.
#[derive(Debug, Clone, PartialEq)]
pub enum HardwareSetting {
    Identity,
    Ripple(HardwareParams<f64>),
}

/// Ground truth for OSPA scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub ranges: Vec<f64>,
    pub mu: f64,
}

/// Analysis settings, resolved lazily against a plan.
#[derive(Debug, Clone, Default)]
pub struct Analysis {
    src: Source,
    file: AnalysisFile,
}

/// Fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub snapshots: usize,
    pub plan: SubbandPlan<f64>,
    pub scene: Scene<f64>,
    pub hardware: HardwareSetting,
    pub clock: ClockModel<f64>,
    pub noise: NoiseModel<f64>,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, Default)]
struct Source {
    name: String,
    text: String,
}

impl Source {
    fn line(&self, span: &Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err(&self, span: &Range<usize>, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{}:{}: {msg}", self.name, self.line(span)))
    }

    /// Line of the `n`-th `[[scene.targets]]` header, if present.
    fn target_line(&self, n: usize) -> Option<usize> {
        self.text
            .lines()
            .enumerate()
            .filter(|(_, l)| l.trim_start().starts_with("[[scene.targets]]"))
            .nth(n)
            .map(|(i, _)| i + 1)
    }

    fn err_at(&self, line: Option<usize>, msg: impl std::fmt::Display) -> CliError {
        match line {
            Some(l) => CliError::Config(format!("{}:{l}: {msg}", self.name)),
            None => CliError::Config(format!("{}: {msg}", self.name)),
        }
    }

    fn parse_error(&self, e: toml::de::Error) -> CliError {
        let msg = e.message().trim().to_string();
        match e.span() {
            Some(span) => self.err(&span, msg),
            None => CliError::Config(format!("{}: {msg}", self.name)),
        }
    }
}

fn read_source(path: &Path) -> CliResult<Source> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(Source {
        name: path.display().to_string(),
        text,
    })
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let src = read_source(path)?;
        Self::parse_source(src)
    }

    /// Parses scenario text; `name` prefixes error messages.
    pub fn parse(name: &str, text: &str) -> CliResult<Self> {
        Self::parse_source(Source {
            name: name.to_string(),
            text: text.to_string(),
        })
    }

    fn parse_source(src: Source) -> CliResult<Self> {
        let file: ScenarioFile = toml::from_str(&src.text).map_err(|e| src.parse_error(e))?;
        let snapshots = match &file.snapshots {
            Some(s) if *s.get_ref() == 0 => return Err(src.err(&s.span(), "snapshots must be >= 1")),
            Some(s) => *s.get_ref(),
            None => 1,
        };
        let plan = build_plan(&src, &file.plan)?;
        let scene = match &file.scene {
            Some(s) => build_scene(&src, s)?,
            None => Scene::empty(),
        };
        let hardware = match &file.hardware {
            Some(h) => build_hardware(&src, h)?,
            None => HardwareSetting::Identity,
        };
        let noise = match &file.noise {
            Some(n) => build_noise(&src, n)?,
            None => NoiseModel::noiseless(),
        };
        let clock = match &file.clock {
            Some(c) => build_clock(&src, c, &file.noise)?,
            None => ClockModel::noiseless(),
        };
        if noise.snr_db.is_some() && scene.is_empty() {
            let span = file.noise.as_ref().map(|n| n.span()).unwrap_or(0..0);
            return Err(src.err(&span, "[noise] finite SNR needs at least one target"));
        }
        let analysis = Analysis {
            src,
            file: AnalysisFile {
                grid: file.grid,
                peaks: file.peaks,
                spbp: file.spbp,
                omp: file.omp,
                truth: file.truth,
                sweep: file.sweep,
            },
        };
        // Surface analysis errors at load time rather than mid-run.
        analysis.grid(&plan)?;
        analysis.peaks(&plan)?;
        analysis.truth()?;
        Ok(Self {
            snapshots,
            plan,
            scene,
            hardware,
            clock,
            noise,
            analysis,
        })
    }
}

fn build_plan(src: &Source, spec: &Spanned<PlanSpec>) -> CliResult<SubbandPlan<f64>> {
    let span = spec.span();
    let p = spec.get_ref();
    let fail = |msg: String| src.err(&span, format!("[plan] {msg}"));
    let ofdm = OfdmParams::new(p.subcarrier_spacing_hz, p.pilot_seed).map_err(|e| fail(e.to_string()))?;
    let require = |name: &str, v: bool| {
        if v {
            Ok(())
        } else {
            Err(fail(format!("kind = {:?} needs `{name}`", p.kind)))
        }
    };
    let forbid = |name: &str, v: bool| {
        if v {
            Err(fail(format!("`{name}` is not used by kind = {:?}", p.kind)))
        } else {
            Ok(())
        }
    };
    let plan = match p.kind {
        PlanKind::Sweep => {
            require("first_carrier_hz", p.first_carrier_hz.is_some())?;
            require("bandwidth_hz", p.bandwidth_hz.is_some())?;
            require("count", p.count.is_some())?;
            forbid("subbands", p.subbands.is_some())?;
            forbid("select", p.select.is_some())?;
            make_contiguous_sweep(
                p.first_carrier_hz.unwrap_or_default(),
                p.bandwidth_hz.unwrap_or_default(),
                p.count.unwrap_or_default(),
                ofdm,
                p.switch_time_s,
            )
        }
        PlanKind::Explicit => {
            require("subbands", p.subbands.is_some())?;
            forbid("select", p.select.is_some())?;
            forbid("count", p.count.is_some())?;
            let bands = p
                .subbands
                .iter()
                .flatten()
                .map(|b| Subband::new(b.carrier_hz, b.bandwidth_hz))
                .collect::<multiband::Result<Vec<_>>>()
                .map_err(|e| fail(e.to_string()))?;
            SubbandPlan::new(bands, ofdm, p.switch_time_s)
        }
        PlanKind::Allocations => {
            require("select", p.select.is_some())?;
            require("granularity_hz", p.granularity_hz.is_some())?;
            forbid("subbands", p.subbands.is_some())?;
            forbid("count", p.count.is_some())?;
            let labels: Vec<&str> = p.select.iter().flatten().map(String::as_str).collect();
            let tiling = match p.tiling.unwrap_or(TilingSpec::PerInterval) {
                TilingSpec::PerInterval => Tiling::PerInterval,
                TilingSpec::Packed => Tiling::Packed,
            };
            plan_from_allocations(
                &gpp_fr3_allocations(),
                &labels,
                p.granularity_hz.unwrap_or_default(),
                ofdm,
                p.switch_time_s,
                tiling,
            )
        }
    };
    plan.map_err(|e| fail(e.to_string()))
}

fn build_scene(src: &Source, s: &SceneSpec) -> CliResult<Scene<f64>> {
    let line = src.target_line(0);
    let mut targets = Vec::with_capacity(s.targets.len());
    for (n, t) in s.targets.iter().enumerate() {
        let fail = |msg: &str| src.err_at(src.target_line(n), format!("[[scene.targets]] #{} {msg}", n + 1));
        let model = match t.model {
            ModelKind::Isotropic => {
                if t.drift_rad_per_hz.is_some() || t.phase_std_rad.is_some() {
                    return Err(fail("isotropic targets take no drift or phase std"));
                }
                RcsModel::Isotropic {
                    rcs: t.rcs_m2,
                    phase: t.phase_rad,
                }
            }
            ModelKind::PhaseDrift => RcsModel::PhaseDrift {
                rcs: t.rcs_m2,
                phase: t.phase_rad,
                rate: t
                    .drift_rad_per_hz
                    .ok_or_else(|| fail("phase-drift needs `drift_rad_per_hz`"))?,
                reference_frequency: t
                    .drift_reference_hz
                    .ok_or_else(|| fail("phase-drift needs `drift_reference_hz`"))?,
            },
            ModelKind::RandomPhase => RcsModel::RandomPhase {
                rcs: t.rcs_m2,
                phase: t.phase_rad,
                std: t
                    .phase_std_rad
                    .ok_or_else(|| fail("random-phase needs `phase_std_rad`"))?,
                seed: t.seed.ok_or_else(|| fail("random-phase needs `seed`"))?,
            },
        };
        if t.model != ModelKind::RandomPhase && t.seed.is_some() {
            return Err(fail("`seed` is only used by random-phase targets"));
        }
        targets.push(ScatteringCenter::new(t.range_m, model).map_err(|e| fail(&e.to_string()))?);
    }
    let gains = match &s.gains {
        None => AntennaGains::unit(),
        Some(g) => match (&g.per_subband, g.tx, g.rx) {
            (Some(list), None, None) => {
                AntennaGains::PerSubband(list.iter().map(|&[tx, rx]| (tx, rx)).collect())
            }
            (None, tx, rx) => AntennaGains::Constant {
                tx: tx.unwrap_or(1.0),
                rx: rx.unwrap_or(1.0),
            },
            _ => return Err(src.err_at(line, "[scene.gains] use either tx/rx or per_subband")),
        },
    };
    let mut scene = Scene::new(targets, gains).map_err(|e| src.err_at(line, format!("[scene] {e}")))?;
    if let Some(f) = s.reference_frequency_hz {
        scene = scene
            .with_reference_frequency(f)
            .map_err(|e| src.err_at(line, format!("[scene] {e}")))?;
    }
    Ok(scene)
}

fn build_hardware(src: &Source, spec: &Spanned<HardwareSpec>) -> CliResult<HardwareSetting> {
    let h = spec.get_ref();
    let fail = |msg: &str| src.err(&spec.span(), format!("[hardware] {msg}"));
    match h.model {
        HardwareKind::Identity => {
            if h.ripple_db.is_some() || h.phase_ripple_deg.is_some() || h.seed.is_some() {
                return Err(fail("identity hardware takes no ripple or seed"));
            }
            Ok(HardwareSetting::Identity)
        }
        HardwareKind::Ripple => {
            let defaults = HardwareParams::<f64>::default();
            let params = HardwareParams {
                ripple_db: h.ripple_db.unwrap_or(defaults.ripple_db),
                phase_ripple_deg: h.phase_ripple_deg.unwrap_or(defaults.phase_ripple_deg),
                seed: h.seed.ok_or_else(|| fail("ripple hardware needs `seed`"))?,
            };
            if !(params.ripple_db >= 0.0) || !(params.phase_ripple_deg >= 0.0) {
                return Err(fail("ripple levels must be >= 0"));
            }
            Ok(HardwareSetting::Ripple(params))
        }
    }
}

fn build_noise(src: &Source, spec: &Spanned<NoiseSpec>) -> CliResult<NoiseModel<f64>> {
    let n = spec.get_ref();
    let fail = |msg: String| src.err(&spec.span(), format!("[noise] {msg}"));
    match n.snr_db {
        None => Ok(NoiseModel {
            snr_db: None,
            seed: n.seed.unwrap_or(0),
        }),
        Some(snr) => {
            let seed = n.seed.ok_or_else(|| fail("finite `snr_db` needs `seed`".into()))?;
            NoiseModel::new(snr, seed).map_err(|e| fail(e.to_string()))
        }
    }
}

fn build_clock(
    src: &Source,
    spec: &Spanned<ClockSpec>,
    noise: &Option<Spanned<NoiseSpec>>,
) -> CliResult<ClockModel<f64>> {
    let c = spec.get_ref();
    let fail = |msg: String| src.err(&spec.span(), format!("[clock] {msg}"));
    let mut clock = match c.phase_noise_dbc_hz {
        None => ClockModel::noiseless(),
        Some(alpha) => {
            let seeded = noise.as_ref().is_some_and(|n| n.get_ref().seed.is_some());
            if !seeded {
                return Err(fail("phase noise draws from the [noise] seed; set `seed` there".into()));
            }
            ClockModel::new(alpha, c.lo_hz.unwrap_or(10e6)).map_err(|e| fail(e.to_string()))?
        }
    };
    if let Some(lo) = c.lo_hz {
        if !(lo > 0.0) {
            return Err(fail(format!("LO frequency must be > 0, got {lo}")));
        }
        clock.lo_frequency = lo;
    }
    clock.timing_offset = c.timing_offset_s;
    clock.cfo = c.cfo;
    Ok(clock)
}

/// Default analysis window when no `[grid]` is given, m.
pub const DEFAULT_GRID_STOP: f64 = 5.0;
/// Default grid step as a fraction of the nominal resolution.
pub const DEFAULT_GRID_STEPS_PER_CELL: f64 = 8.0;

impl Analysis {
    /// Analysis-only TOML file (`[grid]`, `[peaks]`, `[spbp]`, `[omp]`,
    /// `[truth]`, `[sweep]`); a full scenario is also accepted.
    pub fn load(path: &Path) -> CliResult<Self> {
        let src = read_source(path)?;
        let table: toml::Table = toml::from_str(&src.text).map_err(|e| src.parse_error(e))?;
        if table.contains_key("plan") {
            return Ok(Scenario::parse_source(src)?.analysis);
        }
        let file: AnalysisFile = toml::from_str(&src.text).map_err(|e| src.parse_error(e))?;
        Ok(Self { src, file })
    }

    pub fn grid(&self, plan: &SubbandPlan<f64>) -> CliResult<RangeGrid<f64>> {
        let g = self.file.grid.as_ref().map(|g| g.get_ref().clone()).unwrap_or_default();
        let step = g
            .step_m
            .unwrap_or(plan.nominal_resolution() / DEFAULT_GRID_STEPS_PER_CELL);
        RangeGrid::new(
            g.start_m.unwrap_or(0.0),
            g.stop_m.unwrap_or(DEFAULT_GRID_STOP),
            step,
        )
        .map_err(|e| self.section_err(&self.file.grid, "grid", e))
    }

    pub fn oversampling(&self) -> CliResult<usize> {
        let os = self
            .file
            .grid
            .as_ref()
            .and_then(|g| g.get_ref().oversampling)
            .unwrap_or(DEFAULT_OVERSAMPLING);
        if os == 0 {
            return Err(self.section_err(&self.file.grid, "grid", "oversampling must be >= 1"));
        }
        Ok(os)
    }

    pub fn peaks(&self, plan: &SubbandPlan<f64>) -> CliResult<PeakDetectConfig<f64>> {
        let p = self.file.peaks.as_ref().map(|p| p.get_ref().clone()).unwrap_or_default();
        let mut cfg = PeakDetectConfig::for_resolution(plan.nominal_resolution());
        if let Some(t) = p.threshold_db {
            cfg.threshold_db = t;
        }
        if let Some(s) = p.min_separation_m {
            cfg.min_separation = s;
        }
        if let Some(x) = p.exclusion_m {
            cfg.exclusion = x;
        }
        let grid = self.grid(plan)?;
        cfg.validate(grid.step())
            .map_err(|e| self.section_err(&self.file.peaks, "peaks", e))?;
        Ok(cfg)
    }

    /// SPBP settings; a `seed` is required because `K0` is drawn at random.
    pub fn spbp(&self, plan: &SubbandPlan<f64>, fallback_seed: Option<u64>) -> CliResult<SpbpConfig<f64>> {
        let s = self.file.spbp.as_ref().map(|s| s.get_ref().clone()).unwrap_or_default();
        let seed = s.seed.or(fallback_seed).ok_or_else(|| {
            self.section_err(&self.file.spbp, "spbp", "SPBP needs `seed` (K0 is drawn at random)")
        })?;
        let mut cfg = SpbpConfig::for_plan(plan, seed);
        if let Some(v) = s.omega_m {
            cfg.omega = v;
        }
        if let Some(v) = s.r_max_m {
            cfg.r_max = v;
        }
        if let Some(v) = s.min_cardinality {
            cfg.min_cardinality = v;
        }
        if let Some(v) = s.min_coverage {
            cfg.min_coverage = v;
        }
        if let Some(v) = s.step_m {
            cfg.step = v;
        }
        Ok(cfg)
    }

    pub fn omp(&self, plan: &SubbandPlan<f64>) -> CliResult<OmpConfig<f64>> {
        let o = self.file.omp.as_ref().map(|o| o.get_ref().clone()).unwrap_or_default();
        let grid = self.grid(plan)?;
        let fail = |e: multiband::Error| self.section_err(&self.file.omp, "omp", e);
        let mut cfg = OmpConfig::for_plan(
            plan,
            o.start_m.unwrap_or(grid.start()),
            o.stop_m.unwrap_or(grid.stop()),
        )
        .map_err(fail)?;
        if let Some(step) = o.step_m {
            cfg.grid = RangeGrid::new(cfg.grid.start(), cfg.grid.stop(), step).map_err(fail)?;
        }
        if let Some(n) = o.max_atoms {
            cfg.max_atoms = n;
        }
        if let Some(t) = o.residual_threshold {
            cfg.residual_threshold = t;
        }
        Ok(cfg)
    }

    pub fn truth(&self) -> CliResult<Option<Truth>> {
        let Some(t) = &self.file.truth else {
            return Ok(None);
        };
        let spec = t.get_ref();
        if !(spec.mu_m > 0.0) {
            return Err(self.section_err(&self.file.truth, "truth", "`mu_m` must be > 0"));
        }
        Ok(Some(Truth {
            ranges: spec.ranges_m.clone(),
            mu: spec.mu_m,
        }))
    }

    pub fn sweep_bandwidths(&self) -> Option<Vec<f64>> {
        self.file
            .sweep
            .as_ref()
            .map(|s| s.get_ref().total_bandwidths_hz.clone())
    }

    fn section_err<S>(&self, sec: &Option<Spanned<S>>, name: &str, e: impl std::fmt::Display) -> CliError {
        match sec {
            Some(s) => self.src.err(&s.span(), format!("[{name}] {e}")),
            None => CliError::Config(format!("[{name}] defaults: {e}")),
        }
    }
}
