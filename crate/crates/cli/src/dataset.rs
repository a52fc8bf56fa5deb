//! Plain-text CFR dataset files.
//!
//! ```text
//! # multiband cfr-dataset v1
//! # key: value                      (header, see `DatasetHeader`)
//! # subband 0: carrier_hz=... bandwidth_hz=... subcarriers=...
//! snapshot,subband,subcarrier,re,im
//! 0,0,0,1.0000000000000000e0,0.0000000000000000e0
//! ```
//!
//! Samples use 17 significant digits, so a write/read round trip is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use multiband::subband::{OfdmParams, Subband, SubbandPlan};
use multiband::synth::{Cfr, CfrState, HardwareParams, HardwareResponse};
use num_complex::Complex;

use crate::error::{CliError, CliResult};
use crate::scenario::HardwareSetting;

pub const MAGIC: &str = "# multiband cfr-dataset v1";
const COLUMNS: &str = "snapshot,subband,subcarrier,re,im";

/// Everything besides the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub plan: SubbandPlan<f64>,
    pub snapshots: usize,
    pub hardware: HardwareSetting,
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
    pub phase_noise_dbc_hz: Option<f64>,
    pub lo_hz: f64,
    /// Seeds of random-phase targets, in scene order.
    pub target_seeds: Vec<u64>,
    pub provenance: String,
}

/// Measured CFRs, `snapshots[s][k]` for subband `k` of snapshot `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfrDataset {
    pub header: DatasetHeader,
    pub snapshots: Vec<Vec<Cfr<f64>>>,
}

fn data_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("dataset line {line}: {msg}"))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

impl DatasetHeader {
    /// Transceiver response to divide out during calibration.
    pub fn hardware_response(&self) -> CliResult<HardwareResponse<f64>> {
        match &self.hardware {
            HardwareSetting::Identity => Ok(HardwareResponse::identity(&self.plan)),
            HardwareSetting::Ripple(p) => {
                HardwareResponse::generate(&self.plan, p).map_err(|e| CliError::Data(e.to_string()))
            }
        }
    }

    fn write(&self, out: &mut String) {
        let plan = &self.plan;
        let hw = match &self.hardware {
            HardwareSetting::Identity => "identity".to_string(),
            HardwareSetting::Ripple(p) => format!(
                "ripple ripple_db={:?} phase_ripple_deg={:?} seed={}",
                p.ripple_db, p.phase_ripple_deg, p.seed
            ),
        };
        let seeds: Vec<String> = self.target_seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "# provenance: {}", self.provenance.replace('\n', " "));
        let _ = writeln!(out, "# subcarrier_spacing_hz: {:?}", plan.ofdm().subcarrier_spacing());
        let _ = writeln!(out, "# pilot_seed: {}", plan.ofdm().pilot_seed());
        let _ = writeln!(out, "# switch_time_s: {:?}", plan.switch_time());
        let _ = writeln!(out, "# snapshots: {}", self.snapshots);
        let _ = writeln!(out, "# snr_db: {}", opt(self.snr_db));
        let _ = writeln!(out, "# noise_seed: {}", self.noise_seed);
        let _ = writeln!(out, "# phase_noise_dbc_hz: {}", opt(self.phase_noise_dbc_hz));
        let _ = writeln!(out, "# lo_hz: {:?}", self.lo_hz);
        let _ = writeln!(out, "# hardware: {hw}");
        let seeds = if seeds.is_empty() { "none".to_string() } else { seeds.join(",") };
        let _ = writeln!(out, "# target_seeds: {seeds}");
        let _ = writeln!(out, "# subbands: {}", plan.len());
        for (k, s) in plan.subbands().iter().enumerate() {
            let _ = writeln!(
                out,
                "# subband {k}: carrier_hz={:?} bandwidth_hz={:?} subcarriers={}",
                s.carrier(),
                s.bandwidth(),
                plan.subcarrier_count(k)
            );
        }
    }
}

impl CfrDataset {
    /// Serializes header and samples.
    pub fn to_text(&self) -> String {
        let n: usize = self.header.plan.total_subcarriers() * self.snapshots.len();
        let mut out = String::with_capacity(64 * n + 1024);
        self.header.write(&mut out);
        out.push_str(COLUMNS);
        out.push('\n');
        for (s, snap) in self.snapshots.iter().enumerate() {
            for cfr in snap {
                for (i, h) in cfr.samples.iter().enumerate() {
                    let _ = writeln!(out, "{s},{},{i},{:.16e},{:.16e}", cfr.subband, h.re, h.im);
                }
            }
        }
        out
    }

    /// Parses a dataset; every sample must appear exactly once.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim_end() == MAGIC => {}
            _ => return Err(data_err(1, format!("expected `{MAGIC}`"))),
        }
        let mut keys: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut bands: Vec<(usize, String)> = Vec::new();
        let mut header_end = None;
        for (no, line) in lines.by_ref() {
            if line.trim_end() == COLUMNS {
                header_end = Some(no);
                break;
            }
            let Some(body) = line.strip_prefix("# ") else {
                return Err(data_err(no, "expected a `# key: value` header line"));
            };
            let Some((key, value)) = body.split_once(": ") else {
                return Err(data_err(no, "header line without `: `"));
            };
            if key.starts_with("subband ") {
                bands.push((no, body.to_string()));
            } else {
                keys.insert(key.to_string(), (no, value.trim().to_string()));
            }
        }
        let Some(header_end) = header_end else {
            return Err(data_err(0, format!("missing column line `{COLUMNS}`")));
        };
        let header = parse_header(&keys, &bands, header_end)?;

        let plan = &header.plan;
        let mut snapshots: Vec<Vec<Cfr<f64>>> = (0..header.snapshots)
            .map(|_| {
                (0..plan.len())
                    .map(|k| {
                        let n = plan.subcarrier_count(k);
                        Cfr::new(k, vec![Complex::new(0.0, 0.0); n], CfrState::Measured)
                    })
                    .collect()
            })
            .collect();
        let offsets: Vec<usize> = (0..plan.len())
            .scan(0, |acc, k| {
                let o = *acc;
                *acc += plan.subcarrier_count(k);
                Some(o)
            })
            .collect();
        let per_snapshot = plan.total_subcarriers();
        let mut seen = vec![false; per_snapshot * header.snapshots];
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(data_err(no, "expected 5 fields"));
            }
            let idx = |i: usize| {
                f[i].parse::<usize>()
                    .map_err(|e| data_err(no, format!("field {}: {e}", i + 1)))
            };
            let val = |i: usize| {
                f[i].parse::<f64>()
                    .map_err(|e| data_err(no, format!("field {}: {e}", i + 1)))
            };
            let (s, k, i) = (idx(0)?, idx(1)?, idx(2)?);
            if s >= header.snapshots || k >= plan.len() || i >= plan.subcarrier_count(k) {
                return Err(data_err(no, format!("sample ({s}, {k}, {i}) outside the header's shape")));
            }
            let flat = s * per_snapshot + offsets[k] + i;
            if std::mem::replace(&mut seen[flat], true) {
                return Err(data_err(no, format!("duplicate sample ({s}, {k}, {i})")));
            }
            snapshots[s][k].samples[i] = Complex::new(val(3)?, val(4)?);
        }
        if let Some(missing) = seen.iter().position(|&b| !b) {
            let s = missing / per_snapshot;
            let rem = missing % per_snapshot;
            let k = offsets.iter().rposition(|&o| o <= rem).unwrap_or(0);
            return Err(CliError::Data(format!(
                "dataset is missing sample ({s}, {k}, {})",
                rem - offsets[k]
            )));
        }
        Ok(Self { header, snapshots })
    }
}

fn parse_header(
    keys: &BTreeMap<String, (usize, String)>,
    bands: &[(usize, String)],
    header_end: usize,
) -> CliResult<DatasetHeader> {
    let get = |k: &str| {
        keys.get(k)
            .ok_or_else(|| data_err(header_end, format!("header lacks `{k}`")))
    };
    fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        v.parse::<T>()
            .map_err(|e| data_err(line, format!("`{key}`: {e}")))
    }
    let field = |k: &str| -> CliResult<(usize, &str)> {
        let (no, v) = get(k)?;
        Ok((*no, v.as_str()))
    };
    let optional = |k: &str| -> CliResult<Option<f64>> {
        let (no, v) = field(k)?;
        if v == "none" {
            Ok(None)
        } else {
            num(no, k, v).map(Some)
        }
    };
    let parsed = |k: &str| -> CliResult<f64> {
        let (no, v) = field(k)?;
        num(no, k, v)
    };

    let (no, v) = field("pilot_seed")?;
    let pilot_seed: u64 = num(no, "pilot_seed", v)?;
    let (no, v) = field("snapshots")?;
    let snapshots: usize = num(no, "snapshots", v)?;
    let (no, v) = field("noise_seed")?;
    let noise_seed: u64 = num(no, "noise_seed", v)?;
    let (no, v) = field("subbands")?;
    let count: usize = num(no, "subbands", v)?;
    let ofdm = OfdmParams::new(parsed("subcarrier_spacing_hz")?, pilot_seed)
        .map_err(|e| data_err(no, e))?;

    if bands.len() != count {
        return Err(data_err(no, format!("{count} subbands declared, {} listed", bands.len())));
    }
    let mut subbands = Vec::with_capacity(count);
    let mut declared_n = Vec::with_capacity(count);
    for (k, (line, body)) in bands.iter().enumerate() {
        let (label, rest) = body.split_once(": ").unwrap_or((body, ""));
        if label != format!("subband {k}") {
            return Err(data_err(*line, format!("expected `subband {k}`")));
        }
        let mut kv = BTreeMap::new();
        for part in rest.split_whitespace() {
            let (a, b) = part
                .split_once('=')
                .ok_or_else(|| data_err(*line, format!("bad field `{part}`")))?;
            kv.insert(a, b);
        }
        let f = |key: &str| {
            kv.get(key)
                .ok_or_else(|| data_err(*line, format!("missing `{key}`")))
        };
        let carrier: f64 = num(*line, "carrier_hz", f("carrier_hz")?)?;
        let bandwidth: f64 = num(*line, "bandwidth_hz", f("bandwidth_hz")?)?;
        declared_n.push((*line, num::<usize>(*line, "subcarriers", f("subcarriers")?)?));
        subbands.push(Subband::new(carrier, bandwidth).map_err(|e| data_err(*line, e))?);
    }
    let plan = SubbandPlan::new(subbands, ofdm, parsed("switch_time_s")?)
        .map_err(|e| data_err(header_end, e))?;
    for (k, &(line, n)) in declared_n.iter().enumerate() {
        if plan.subcarrier_count(k) != n {
            return Err(data_err(
                line,
                format!("{n} subcarriers declared, the plan implies {}", plan.subcarrier_count(k)),
            ));
        }
    }

    let (no, hw) = field("hardware")?;
    let hardware = if hw == "identity" {
        HardwareSetting::Identity
    } else if let Some(rest) = hw.strip_prefix("ripple ") {
        let kv: BTreeMap<&str, &str> = rest.split_whitespace().filter_map(|p| p.split_once('=')).collect();
        let g = |key: &str| {
            kv.get(key)
                .copied()
                .ok_or_else(|| data_err(no, format!("hardware lacks `{key}`")))
        };
        HardwareSetting::Ripple(HardwareParams {
            ripple_db: num(no, "ripple_db", g("ripple_db")?)?,
            phase_ripple_deg: num(no, "phase_ripple_deg", g("phase_ripple_deg")?)?,
            seed: num(no, "seed", g("seed")?)?,
        })
    } else {
        return Err(data_err(no, format!("unknown hardware `{hw}`")));
    };
    let (no, seeds) = field("target_seeds")?;
    let target_seeds = if seeds == "none" {
        Vec::new()
    } else {
        seeds
            .split(',')
            .map(|s| num(no, "target_seeds", s))
            .collect::<CliResult<Vec<u64>>>()?
    };
    Ok(DatasetHeader {
        plan,
        snapshots,
        hardware,
        snr_db: optional("snr_db")?,
        noise_seed,
        phase_noise_dbc_hz: optional("phase_noise_dbc_hz")?,
        lo_hz: parsed("lo_hz")?,
        target_seeds,
        provenance: field("provenance")?.1.to_string(),
    })
}
