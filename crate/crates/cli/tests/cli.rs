use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bemest::building::{load_building, to_toml, validate_building};
use bemest::filtering::{read_estimates, state_ids};
use bemest::inputs::read_truth;
use bemest::state_space::assemble;
use bemest::table::Provenance;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/four_zone").join(name)
}

fn bemest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bemest"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Inputs {
    building: PathBuf,
    weather: PathBuf,
    hvac: PathBuf,
    loads: PathBuf,
}

fn four_zone() -> Inputs {
    Inputs {
        building: data("building.toml"),
        weather: data("weather.csv"),
        hvac: data("hvac.csv"),
        loads: data("loads.csv"),
    }
}

fn simulate(inp: &Inputs, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate",
        "--building",
        p(&inp.building),
        "--weather",
        p(&inp.weather),
        "--hvac",
        p(&inp.hvac),
        "--loads",
        p(&inp.loads),
        "--horizon",
        "120",
        "--out",
        p(out),
    ];
    args.extend_from_slice(extra);
    bemest(&args)
}

fn estimate_args<'a>(inp: &'a Inputs, out: &'a Path, meas: &'a Path) -> Vec<&'a str> {
    vec![
        "--building",
        p(&inp.building),
        "--weather",
        p(&inp.weather),
        "--hvac",
        p(&inp.hvac),
        "--measurements",
        p(meas),
        "--horizon",
        "120",
        "--out",
        p(out),
    ]
}

#[test]
fn validate_reports_block_sizes_of_the_four_zone_example() {
    let o = bemest(&["validate", "--building", p(&data("building.toml"))]);
    assert!(o.status.success());
    let text = stdout(&o);
    for (zone, n_k) in [("A", 32), ("B", 44), ("C", 20), ("D", 32)] {
        assert!(text.contains(&format!("zone {zone}: ")) && text.contains(&format!("n_k = {n_k}")), "{text}");
    }
    assert!(text.contains("N = 128"));
    // One line per surface plus the header.
    assert_eq!(text.lines().filter(|l| l.contains(",exterior,") || l.contains(",interior,") || l.contains(",underground,")).count(), 40);
}

#[test]
fn validate_rejects_a_broken_reference_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("building.toml")).unwrap();
    let broken = text.replacen("adjacent_zone = \"B\"", "adjacent_zone = \"Q\"", 1);
    assert_ne!(broken, text);
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let o = bemest(&["validate", "--building", p(&path)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Q"));
}

#[test]
fn missing_required_input_is_a_validation_error() {
    let o = bemest(&["validate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = bemest(&["cluster", "--building", p(&data("building.toml")), "--out", p(&blocker)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_and_exact_without_noise() {
    let inp = four_zone();
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(simulate(&inp, &a, &["--seed", "4"]).status.success());
    assert!(simulate(&inp, &b, &["--seed", "4"]).status.success());
    for f in ["truth.csv", "measurements.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let header = std::fs::read_to_string(a.join("truth.csv")).unwrap();
    let prov = Provenance::read(&header).unwrap();
    assert_eq!(prov.seed, 4);
    assert_eq!(prov.config_hash.len(), 16);

    assert!(simulate(&inp, &c, &["--max-noise-variance", "0"]).status.success());
    let building = validate_building(load_building(&inp.building).unwrap()).unwrap();
    let ssm = assemble(&building);
    let ids = state_ids(&building, &ssm.layout);
    let (_, states) = read_truth(std::fs::File::open(c.join("truth.csv")).unwrap(), &c, &ids).unwrap();
    let zone_ids: Vec<String> = building.zones.iter().map(|z| z.id.clone()).collect();
    let m = bemest::inputs::read_measurements(
        std::fs::File::open(c.join("measurements.csv")).unwrap(),
        &c,
        &zone_ids,
    )
    .unwrap();
    for (y, x) in m.values.iter().zip(&states) {
        for (k, &i) in ssm.layout.zone_air_indices().iter().enumerate() {
            assert_eq!(y[k], x[i]);
        }
    }
}

#[test]
fn cluster_is_deterministic_and_keeps_uncoupled_zones_apart() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bemest(&["cluster", "--building", p(&data("building.toml")), "--seed", "2", "--out", p(out)]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("modularity Q ="));
    }
    assert_eq!(
        std::fs::read(a.join("partition.csv")).unwrap(),
        std::fs::read(b.join("partition.csv")).unwrap()
    );

    let mut model = bemest::synth::campus(1, 2, 0);
    for z in &mut model.zones {
        z.surfaces.retain(|s| s.adjacent_zone.is_none());
    }
    let path = dir.path().join("two.toml");
    std::fs::write(&path, to_toml(&model)).unwrap();
    let out = dir.path().join("two");
    assert!(bemest(&["cluster", "--building", p(&path), "--out", p(&out)]).status.success());
    let text = std::fs::read_to_string(out.join("clusters.csv")).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let zones = line.split(',').nth(2).unwrap();
        assert!(!zones.contains(';'), "cluster spans zones: {line}");
    }
}

#[test]
fn single_cluster_wcs_matches_full_and_estimates_round_trip() {
    let inp = four_zone();
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert!(simulate(&inp, &sim, &[]).status.success());
    let meas = sim.join("measurements.csv");

    let building = validate_building(load_building(&inp.building).unwrap()).unwrap();
    let ssm = assemble(&building);
    let ids = state_ids(&building, &ssm.layout);
    let single = dir.path().join("single.csv");
    let rows: String = ids.iter().map(|id| format!("{id},0\n")).collect();
    std::fs::write(&single, format!("state_id,cluster_id\n{rows}")).unwrap();

    let out = dir.path().join("est");
    let mut full = vec!["estimate", "--mode", "full", "--truth"];
    let truth = sim.join("truth.csv");
    full.push(p(&truth));
    full.extend(estimate_args(&inp, &out, &meas));
    let o = bemest(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("rmse_full.csv").exists());
    let mut wcs = vec!["estimate", "--mode", "wcs", "--partition", p(&single)];
    wcs.extend(estimate_args(&inp, &out, &meas));
    assert!(bemest(&wcs).status.success());

    let read = |name: &str| {
        let path = out.join(name);
        read_estimates(std::fs::File::open(&path).unwrap(), &path, &ids).unwrap()
    };
    let a = read("estimates_full.csv");
    let b = read("estimates_wcs.csv");
    assert_eq!(a.len(), 120);
    assert!(a.max_abs_diff(&b) <= 1e-12);

    let mut cmp = vec!["compare", "--partition", p(&single), "--burn-in", "0"];
    cmp.extend(estimate_args(&inp, &out, &meas));
    assert!(bemest(&cmp).status.success());
    let emu = std::fs::read_to_string(out.join("emu.csv")).unwrap();
    let values: Vec<f64> = emu
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 120);
    assert!(values.iter().all(|&v| v == 0.0));
}

#[test]
fn misaligned_measurements_are_rejected() {
    let inp = four_zone();
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert!(simulate(&inp, &sim, &[]).status.success());
    let text = std::fs::read_to_string(sim.join("measurements.csv")).unwrap();
    let shifted = text.replace("2021-01-01T00:", "2020-12-31T23:");
    let meas = dir.path().join("m.csv");
    std::fs::write(&meas, shifted).unwrap();
    let mut args = vec!["estimate"];
    let out = dir.path().join("est");
    args.extend(estimate_args(&inp, &out, &meas));
    let o = bemest(&args);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn config_file_supplies_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "building = {:?}\nseed = 5\nout = \"from-config\"\n",
            data("building.toml").to_str().unwrap()
        ),
    )
    .unwrap();
    assert!(bemest(&["cluster", "--config", p(&cfg)]).status.success());
    let first = std::fs::read_to_string(dir.path().join("from-config/partition.csv")).unwrap();
    assert_eq!(Provenance::read(&first).unwrap().seed, 5);

    let out = dir.path().join("cli");
    assert!(bemest(&["cluster", "--config", p(&cfg), "--seed", "7", "--out", p(&out)]).status.success());
    let second = std::fs::read_to_string(out.join("partition.csv")).unwrap();
    let prov = Provenance::read(&second).unwrap();
    assert_eq!(prov.seed, 7);
    assert_ne!(prov.config_hash, Provenance::read(&first).unwrap().config_hash);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seeed = 1\n").unwrap();
    assert_eq!(bemest(&["validate", "--config", p(&bad)]).status.code(), Some(1));
}

#[test]
fn bench_reports_both_timings() {
    let dir = tempfile::tempdir().unwrap();
    let o = bemest(&["bench", "--rows", "3", "--cols", "4", "--hours", "48", "--out", p(dir.path())]);
    let text = stdout(&o);
    assert!(text.contains("full filter") && text.contains("wcs filter"), "{text}");
    assert!(o.status.success(), "{text}");
    let report = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert!(report.contains("wcs_over_full,"));
}

#[test]
fn generate_writes_inputs_that_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = bemest(&["generate", "--rows", "2", "--cols", "2", "--hours", "24", "--out", p(dir.path())]);
    assert!(o.status.success());
    let o = bemest(&["validate", "--building", p(&dir.path().join("building.toml"))]);
    assert!(stdout(&o).contains("N = 80"));
}
