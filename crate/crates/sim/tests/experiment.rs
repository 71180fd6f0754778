use std::collections::BTreeMap;
use std::path::Path;

use urllc_sim::config::sha256_hex;
use urllc_sim::export::Summary;
use urllc_sim::{presets, run_experiment, Experiment, Manifest, RunOptions};

const SWEEP: &str = r#"
n_cells = 3
horizon_s = 0.05
ul_scheme = "dynamic_grant"

[traffic]
lambda_dl = 125.0
lambda_ul = 125.0
load_mbps = 1.0

[experiment]
name = "small"
replications = 2
epsilons = [1e-2]

[[experiment.axes]]
name = "mode"
labels = ["fdd", "tdd"]
values = [{ "duplex.mode" = "fdd" }, { "duplex.mode" = "tdd", "duplex.gamma_slots" = 1 }]
"#;

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn run_into(text: &str, out: &Path, jobs: usize) -> Manifest {
    let exp = Experiment::from_toml(text, Path::new(".")).unwrap();
    run_experiment(&exp, &RunOptions { out: out.to_path_buf(), jobs }).unwrap()
}

#[test]
fn artifacts_are_byte_identical_across_runs_and_job_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(SWEEP, a.path(), 1);
    run_into(SWEEP, b.path(), 4);
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(v == &tb[k], "{k} differs");
    }
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_into(SWEEP, dir.path(), 0);
    let files = tree(dir.path());
    let listed: BTreeMap<&str, &str> = m.files.iter().map(|f| (f.path.as_str(), f.sha256.as_str())).collect();
    for (path, bytes) in &files {
        if path == "manifest.json" {
            continue;
        }
        assert_eq!(listed.get(path.as_str()), Some(&sha256_hex(bytes).as_str()), "{path}");
    }
    assert_eq!(listed.len() + 1, files.len());
    for f in &m.files {
        assert_eq!(sha256_hex(&files[&f.config]), f.config_sha256, "{}", f.path);
    }
    let on_disk: Manifest = serde_json::from_slice(&files["manifest.json"]).unwrap();
    assert_eq!(on_disk, m);
}

#[test]
fn replication_config_reproduces_its_records() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_into(SWEEP, dir.path(), 0);
    let rec = m.files.iter().find(|f| f.path.ends_with("r1/records.csv") && f.point == "mode-tdd").unwrap();
    let cfg = std::fs::read_to_string(dir.path().join(&rec.config)).unwrap();
    assert_eq!(rec.seed, Some(urllc_sim::experiment::replication_seed(1, 1)));

    let again = tempfile::tempdir().unwrap();
    let m2 = run_into(&cfg, again.path(), 1);
    let rec2 = m2.files.iter().find(|f| f.path.ends_with("r0/records.csv")).unwrap();
    assert_eq!(rec2.sha256, rec.sha256);
}

#[test]
fn replications_share_traffic_across_points() {
    let dir = tempfile::tempdir().unwrap();
    run_into(SWEEP, dir.path(), 0);
    let arrivals = |point: &str, r: u32| -> Vec<String> {
        let text = std::fs::read_to_string(dir.path().join(format!("points/{point}/r{r}/records.csv"))).unwrap();
        let mut rows: Vec<String> = text.lines().skip(1).map(|l| l.split(',').take(5).collect::<Vec<_>>().join(",")).collect();
        rows.sort();
        rows
    };
    assert_eq!(arrivals("mode-fdd", 0), arrivals("mode-tdd", 0));
    assert_ne!(arrivals("mode-fdd", 0), arrivals("mode-fdd", 1));
}

#[test]
fn point_summaries_report_outage_and_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    run_into(SWEEP, dir.path(), 0);
    let s = Summary::parse(&std::fs::read_to_string(dir.path().join("points/mode-fdd/summary.txt")).unwrap());
    assert_eq!(s.get("mode"), Some("fdd"));
    assert_eq!(s.get("replications"), Some("2"));
    assert_eq!(s.get("ul_scheme"), Some("dg"));
    let n: usize = s.get("packets").unwrap().parse().unwrap();
    assert!(n > 100);
    let ul: f64 = s.get("outage_1e-2.ul_symbols").unwrap().parse().unwrap();
    let gf_floor: f64 = s.get("ul.mean_dg_symbols").unwrap().parse().unwrap();
    assert!(ul >= gf_floor);
    assert_eq!(s.get("ul.mean_tdd_switch_symbols"), Some("0"));
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("point,axis.mode,mode,"));
}

#[test]
fn reference_preset_reproduces_golden_totals() {
    let dir = tempfile::tempdir().unwrap();
    run_into(presets::get("fig2").unwrap(), dir.path(), 1);
    let text = std::fs::read_to_string(dir.path().join("points/base/r0/records.csv")).unwrap();
    let totals: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(16).unwrap()).collect();
    assert_eq!(totals, ["22", "30"]);
}

#[test]
fn trace_import_replays_generated_traffic() {
    let dir = tempfile::tempdir().unwrap();
    let base = Experiment::from_toml(SWEEP, Path::new(".")).unwrap().points().unwrap().remove(0);
    let sim = &base.resolved.sim;
    let arrivals = urllc_core::traffic::generate_arrivals(&sim.traffic, sim.n_cells, &sim.numerology(), sim.horizon_symbols, sim.seed);
    urllc_sim::export::write_atomic(&dir.path().join("trace.csv"), &urllc_sim::export::trace_csv(&arrivals)).unwrap();

    let generated = urllc_core::engine::run(sim).unwrap();
    let cfg = format!("{}\n[arrivals]\ntrace = \"trace.csv\"\n", base.file.to_toml());
    let exp = Experiment::from_toml(&cfg, dir.path()).unwrap();
    let p = exp.points().unwrap().remove(0);
    let replayed = urllc_core::engine::run_with_arrivals(&p.resolved.sim, p.resolved.arrivals.unwrap()).unwrap();
    assert_eq!(generated.records, replayed.records);
}
