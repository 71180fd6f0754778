//! Parameter sweeps with replications, written to an output directory
//! with a manifest of every file.
//!
//! Layout under the output directory:
//!
//! ```text
//! experiment.toml            normalized experiment (base config + sweep)
//! summary.csv                one row per sweep point
//! manifest.json              every file, its hash and producing config
//! points/<label>/config.toml
//! points/<label>/summary.txt
//! points/<label>/ccdf_{all,dl,ul}.csv
//! points/<label>/sched_ecdf.csv
//! points/<label>/r<k>/config.toml   exact config of replication k
//! points/<label>/r<k>/records.csv
//! points/<label>/r<k>/schedule.csv
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};
use urllc_core::engine::{run, run_with_arrivals, RunOutput};
use urllc_core::metrics::{merge, outage_latency, BreakdownMean, Ecdf, LatencySeries, SeriesTag};
use urllc_core::traffic::offered_load;
use urllc_core::Direction;

use crate::config::{self, sha256_hex, ConfigErrors, ConfigFile, FieldError, Resolved};
use crate::export::{self, write_atomic, Summary};
use crate::SimError;

/// Seed of replication `r`: `seed XOR (r * 0x9E3779B97F4A7C15)`, wrapping.
/// Replication 0 keeps the configured seed, and the same replication index
/// sees the same traffic at every sweep point.
pub fn replication_seed(seed: u64, r: u32) -> u64 {
    seed ^ u64::from(r).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One sweep dimension. With `path`, each value is assigned to that key;
/// without it, each value is a table of `dotted.key = value` overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub values: Vec<Value>,
    /// Directory-friendly names for the values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub replications: u32,
    /// Outage probabilities reported in summaries.
    pub epsilons: Vec<f64>,
    /// Write per-packet records and schedule logs.
    pub records: bool,
    pub axes: Vec<Axis>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { name: "run".into(), replications: 1, epsilons: vec![1e-3, 1e-4, 1e-5], records: true, axes: Vec::new() }
    }
}

/// A base config plus sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub spec: ExperimentSection,
    /// Raw base config; sweep values are applied on top of it.
    pub base: Table,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
}

/// One fully resolved sweep point.
#[derive(Debug, Clone)]
pub struct Point {
    pub label: String,
    /// `(axis name, value label)`.
    pub coords: Vec<(String, String)>,
    pub file: ConfigFile,
    pub resolved: Resolved,
}

impl Experiment {
    /// Split a TOML document into the base config and its optional
    /// `[experiment]` section.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigErrors> {
        let mut base = config::parse_table(text)?;
        let spec = match base.remove("experiment") {
            Some(v) => serde_path_to_error::deserialize(v).map_err(|e| {
                let path = e.path().to_string();
                ConfigErrors(vec![FieldError {
                    path: if path == "." { "experiment".into() } else { format!("experiment.{path}") },
                    message: config::first_line(&e.into_inner().to_string()),
                }])
            })?,
            None => ExperimentSection::default(),
        };
        Ok(Experiment { spec, base, base_dir: base_dir.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Ok(Self::from_toml(&text, dir)?)
    }

    /// Apply a `key.path=value` override to the base config.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigErrors> {
        config::apply_override(&mut self.base, spec)
    }

    /// Normalized text of the whole experiment.
    pub fn to_toml(&self) -> Result<String, ConfigErrors> {
        let base = ConfigFile::from_table(self.base.clone())?;
        let mut t: Table = toml::from_str(&base.to_toml()).expect("normalized config parses");
        t.insert("experiment".into(), Value::try_from(&self.spec).expect("experiment serializes"));
        Ok(toml::to_string(&t).expect("table serializes"))
    }

    /// Every sweep point in axis order (first axis slowest), each validated.
    pub fn points(&self) -> Result<Vec<Point>, ConfigErrors> {
        let mut errs = Vec::new();
        if self.spec.replications == 0 {
            errs.push(FieldError { path: "experiment.replications".into(), message: "must be >= 1".into() });
        }
        for (i, &e) in self.spec.epsilons.iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                errs.push(FieldError { path: format!("experiment.epsilons[{i}]"), message: format!("{e} outside (0, 1)") });
            }
        }
        for (i, a) in self.spec.axes.iter().enumerate() {
            let at = format!("experiment.axes[{i}]");
            if a.values.is_empty() {
                errs.push(FieldError { path: format!("{at}.values"), message: "empty axis".into() });
            }
            if let Some(l) = &a.labels {
                if l.len() != a.values.len() {
                    errs.push(FieldError { path: format!("{at}.labels"), message: "one label per value required".into() });
                }
            }
            if a.path.is_none() && a.values.iter().any(|v| !v.is_table()) {
                errs.push(FieldError { path: format!("{at}.values"), message: "without a path, values must be tables".into() });
            }
        }
        if !errs.is_empty() {
            return Err(ConfigErrors(errs));
        }

        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for a in &self.spec.axes {
            combos = combos.into_iter().flat_map(|c| (0..a.values.len()).map(move |i| [c.clone(), vec![i]].concat())).collect();
        }

        let mut points = Vec::new();
        for combo in combos {
            let mut table = self.base.clone();
            let mut coords = Vec::new();
            for (a, &i) in self.spec.axes.iter().zip(&combo) {
                let v = &a.values[i];
                match &a.path {
                    Some(p) => config::set_path(&mut table, p, v.clone())?,
                    None => {
                        for (k, x) in v.as_table().expect("checked above") {
                            config::set_path(&mut table, k, x.clone())?;
                        }
                    }
                }
                let label = a.labels.as_ref().map_or_else(|| value_label(v), |l| l[i].clone());
                coords.push((a.name.clone(), label));
            }
            let label = if coords.is_empty() {
                "base".to_string()
            } else {
                coords.iter().map(|(n, l)| sanitize(&format!("{n}-{l}"))).collect::<Vec<_>>().join("__")
            };
            let multi = !coords.is_empty();
            let tag = |e: ConfigErrors| {
                if !multi {
                    return e;
                }
                ConfigErrors(
                    e.0.into_iter().map(|f| FieldError { path: f.path, message: format!("{} (point {label})", f.message) }).collect(),
                )
            };
            let file = ConfigFile::from_table(table).map_err(tag)?;
            let resolved = file.resolve(&self.base_dir).map_err(tag)?;
            points.push(Point { label, coords, file, resolved });
        }
        Ok(points)
    }
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Table(t) => t.iter().map(|(k, x)| format!("{}={}", k.rsplit('.').next().unwrap_or(k), value_label(x))).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_' | '=' | ',') { c } else { '-' }).collect()
}

/// Output options.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Concurrent runs; 0 uses every core.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    /// Config file (relative path) that reproduces this file.
    pub config: String,
    pub config_sha256: String,
    pub point: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replication: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub replications: u32,
    pub seed_rule: String,
    pub files: Vec<ManifestEntry>,
}

struct Writer<'a> {
    root: &'a Path,
}

impl Writer<'_> {
    fn put(&self, rel: &str, bytes: &[u8], config: &str, config_sha: &str, point: &str, rep: Option<(u32, u64)>) -> Result<ManifestEntry, SimError> {
        let path = self.root.join(rel);
        write_atomic(&path, bytes).map_err(|e| SimError::io(&path, e))?;
        Ok(ManifestEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            config: config.to_string(),
            config_sha256: config_sha.to_string(),
            point: point.to_string(),
            replication: rep.map(|r| r.0),
            seed: rep.map(|r| r.1),
        })
    }
}

/// Per-replication results kept for merging.
struct RepResult {
    series: [LatencySeries; 2],
    breakdown: [BreakdownMean; 2],
    sched: Vec<u64>,
    packets: usize,
    dropped: usize,
    transmissions: [u64; 2],
    audit_violations: Option<u64>,
    files: Vec<ManifestEntry>,
}

fn dir_idx(d: Direction) -> usize {
    match d {
        Direction::Dl => 0,
        Direction::Ul => 1,
    }
}

fn run_point_rep(w: &Writer, p: &Point, r: u32, write_records: bool) -> Result<RepResult, SimError> {
    let seed = replication_seed(p.file.seed, r);
    let file = ConfigFile { seed, ..p.file.clone() };
    let mut sim = p.resolved.sim.clone();
    sim.seed = seed;
    let out: RunOutput = match &p.resolved.arrivals {
        Some(a) => run_with_arrivals(&sim, a.clone()),
        None => run(&sim),
    }
    .map_err(|e| SimError::Run(e.to_string()))?;

    let dir = format!("points/{}/r{r}", p.label);
    let cfg_text = file.to_toml();
    let cfg_rel = format!("{dir}/config.toml");
    let cfg_sha = sha256_hex(cfg_text.as_bytes());
    let rep = Some((r, seed));
    let mut files = vec![w.put(&cfg_rel, cfg_text.as_bytes(), &cfg_rel, &cfg_sha, &p.label, rep)?];
    if write_records {
        let num = sim.numerology();
        files.push(w.put(&format!("{dir}/records.csv"), &export::records_csv(&out.records, &num), &cfg_rel, &cfg_sha, &p.label, rep)?);
        files.push(w.put(&format!("{dir}/schedule.csv"), &export::schedule_csv(&out.schedule_log), &cfg_rel, &cfg_sha, &p.label, rep)?);
    }

    let series = Direction::BOTH.map(|d| LatencySeries::from_records(&out.records, Some(d), sim.scs));
    let breakdown = Direction::BOTH.map(|d| BreakdownMean::from_records(&out.records, Some(d)));
    let mut transmissions = [0u64; 2];
    for rec in out.records.iter().filter(|r| r.is_delivered()) {
        transmissions[dir_idx(rec.packet.direction)] += u64::from(rec.n_transmissions);
    }
    Ok(RepResult {
        series,
        breakdown,
        sched: out.records.iter().filter(|r| r.is_delivered()).map(|r| r.breakdown.scheduling_delay()).collect(),
        packets: out.records.len(),
        dropped: out.records.iter().filter(|r| !r.is_delivered()).count(),
        transmissions,
        audit_violations: out.audit.map(|a| a.violations),
        files,
    })
}

fn eps_key(e: f64) -> String {
    format!("{e:e}")
}

fn point_summary(exp: &Experiment, p: &Point, reps: &[RepResult]) -> (Summary, [LatencySeries; 3], Option<Ecdf>) {
    let sim = &p.resolved.sim;
    let mut s = Summary::default();
    s.push("point", &p.label);
    for (n, l) in &p.coords {
        s.push(format!("axis.{n}"), l);
    }
    s.push("mode", sim.duplex.name());
    s.push("gamma_slots", sim.duplex.update_period_slots().map_or("none".to_string(), |g| g.to_string()));
    s.push("scs_khz", sim.scs.khz());
    s.push("tti_symbols", sim.tti_symbols);
    s.push("ul_scheme", sim.ul_scheme.as_str());
    s.push("n_cells", sim.n_cells);
    match p.resolved.arrivals {
        Some(_) => s.push("load_mbps", "explicit"),
        None => s.push("load_mbps", offered_load(&sim.traffic).total_bps / 1e6),
    }
    s.push("cli_max_chi", sim.cli.chi.iter().flatten().fold(0.0f64, |a, &b| a.max(b)));
    s.push("replications", reps.len());
    s.push("packets", reps.iter().map(|r| r.packets).sum::<usize>());
    s.push("dropped", reps.iter().map(|r| r.dropped).sum::<usize>());

    let tag = |d| SeriesTag { direction: d, scs: sim.scs };
    let fold = |d: usize| reps.iter().fold(LatencySeries::empty(tag(Some(Direction::BOTH[d]))), |a, r| merge(&a, &r.series[d]).expect("same tag"));
    let (dl, ul) = (fold(0), fold(1));
    let all = LatencySeries::new(tag(None), dl.symbols().iter().chain(ul.symbols()).copied().collect());
    for e in &exp.spec.epsilons {
        for (name, series) in [("all", &all), ("dl", &dl), ("ul", &ul)] {
            let k = format!("outage_{}.{name}", eps_key(*e));
            match outage_latency(series, *e) {
                Ok(o) => {
                    s.push(format!("{k}_symbols"), o.symbols);
                    s.push(format!("{k}_us"), o.us);
                    s.push(format!("{k}_reliable"), o.reliable);
                }
                Err(_) => {
                    for suffix in ["symbols", "us", "reliable"] {
                        s.push(format!("{k}_{suffix}"), "na");
                    }
                }
            }
        }
    }
    for d in Direction::BOTH {
        let i = dir_idx(d);
        let m = reps.iter().fold(BreakdownMean::default(), |a, r| a.merge(&r.breakdown[i]));
        let tx: u64 = reps.iter().map(|r| r.transmissions[i]).sum();
        s.push_breakdown(export_dir(d), &m);
        s.push(format!("{}.mean_transmissions", export_dir(d)), if m.count == 0 { f64::NAN } else { tx as f64 / m.count as f64 });
    }
    let sched = Ecdf::new(reps.iter().flat_map(|r| r.sched.iter().copied()).collect()).ok();
    s.push("sched_delay.median_symbols", sched.as_ref().map_or("na".to_string(), |e| e.median().to_string()));
    s.push("sched_delay.mean_symbols", sched.as_ref().map_or(f64::NAN, Ecdf::mean));
    if let Some(v) = reps.iter().map(|r| r.audit_violations).sum::<Option<u64>>() {
        s.push("audit_violations", v);
    }
    (s, [all, dl, ul], sched)
}

fn export_dir(d: Direction) -> &'static str {
    match d {
        Direction::Dl => "dl",
        Direction::Ul => "ul",
    }
}

/// Run every point and replication, write all artifacts and return the
/// manifest (also written as `manifest.json`).
pub fn run_experiment(exp: &Experiment, opts: &RunOptions) -> Result<Manifest, SimError> {
    let points = exp.points()?;
    let w = Writer { root: &opts.out };
    let reps = exp.spec.replications;
    let tasks: Vec<(usize, u32)> = (0..points.len()).flat_map(|p| (0..reps).map(move |r| (p, r))).collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().map_err(|e| SimError::Run(e.to_string()))?;
    let results: Vec<RepResult> = pool.install(|| {
        tasks.par_iter().map(|&(p, r)| run_point_rep(&w, &points[p], r, exp.spec.records)).collect::<Result<_, _>>()
    })?;

    let exp_text = exp.to_toml()?;
    let exp_sha = sha256_hex(exp_text.as_bytes());
    let mut files = vec![w.put("experiment.toml", exp_text.as_bytes(), "experiment.toml", &exp_sha, "", None)?];
    let mut rows: Vec<Summary> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let reps_p = &results[i * reps as usize..(i + 1) * reps as usize];
        for r in reps_p {
            files.extend(r.files.iter().cloned());
        }
        let dir = format!("points/{}", p.label);
        let cfg_text = p.file.to_toml();
        let cfg_rel = format!("{dir}/config.toml");
        let cfg_sha = sha256_hex(cfg_text.as_bytes());
        files.push(w.put(&cfg_rel, cfg_text.as_bytes(), &cfg_rel, &cfg_sha, &p.label, None)?);
        let (summary, [all, dl, ul], sched) = point_summary(exp, p, reps_p);
        let num = p.resolved.sim.numerology();
        for (name, bytes) in [
            ("summary.txt", summary.to_text().into_bytes()),
            ("ccdf_all.csv", export::ccdf_csv(&all)),
            ("ccdf_dl.csv", export::ccdf_csv(&dl)),
            ("ccdf_ul.csv", export::ccdf_csv(&ul)),
            ("sched_ecdf.csv", export::ecdf_csv(sched.as_ref(), &num)),
        ] {
            files.push(w.put(&format!("{dir}/{name}"), &bytes, &cfg_rel, &cfg_sha, &p.label, None)?);
        }
        rows.push(summary);
    }

    let mut csv_out = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        csv_out.write_record(first.0.iter().map(|(k, _)| k.as_str())).expect("in-memory write");
    }
    for r in &rows {
        csv_out.write_record(r.0.iter().map(|(_, v)| v.as_str())).expect("in-memory write");
    }
    let bytes = csv_out.into_inner().expect("in-memory flush");
    files.push(w.put("summary.csv", &bytes, "experiment.toml", &exp_sha, "", None)?);

    let manifest = Manifest {
        experiment: exp.spec.name.clone(),
        replications: reps,
        seed_rule: "seed_r = seed XOR (r * 0x9E3779B97F4A7C15)".into(),
        files,
    };
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    let path = opts.out.join("manifest.json");
    write_atomic(&path, &json).map_err(|e| SimError::io(&path, e))?;
    Ok(manifest)
}
