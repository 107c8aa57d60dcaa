use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DVector;

use bemest::building::{load_building, to_toml, validate_building, ValidatedBuilding};
use bemest::filtering::{
    run_filter, state_ids, write_estimates, zone_rmse, FilterModel, FilterState, NoiseSpec,
    RunOptions, Trajectory, UpdateForm,
};
use bemest::inputs::{
    build_input_series, load_hvac, load_loads, load_weather, read_measurements, read_truth,
    simulate_truth, write_hvac, write_measurements, write_truth, write_weather, InputSeries,
    LoadProfiles, MeasurementNoise, Measurements, TruthConfig,
};
use bemest::state_space::{assemble, dump_matrices, StateSpaceModel};
use bemest::synth;
use bemest::wcs::{
    cluster_states, error_metric, extract_subsystems, read_partition, run_wcs_filter,
    write_cluster_summary, write_error_series, write_partition, Partition, Subsystem,
};

use crate::config::{Generated, Mode, RunConfig};

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed model, inputs or configuration (exit 1).
    Validation(String),
    /// Failure while computing or writing results (exit 2).
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<bemest::Error> for Failure {
    fn from(e: bemest::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Create `out/name` and hand a buffered writer to `f`.
fn emit(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

fn load_model(rc: &RunConfig) -> Result<ValidatedBuilding, Failure> {
    let path = rc.require(&rc.building, "building").map_err(invalid)?;
    let model = load_building(path)?;
    validate_building(model).map_err(|v| invalid(format!("{}: invalid building model:\n{v}", path.display())))
}

fn design_flows(b: &ValidatedBuilding) -> Vec<f64> {
    b.zones.iter().map(|z| z.design_mass_flow).collect()
}

fn zone_ids(b: &ValidatedBuilding) -> Vec<&str> {
    b.zones.iter().map(|z| z.id.as_str()).collect()
}

fn load_series(rc: &RunConfig, b: &ValidatedBuilding, ssm: &StateSpaceModel) -> Result<InputSeries, Failure> {
    let weather = load_weather(rc.require(&rc.weather, "weather").map_err(invalid)?)?;
    let hvac = load_hvac(rc.require(&rc.hvac, "hvac").map_err(invalid)?, &zone_ids(b))?;
    let series = build_input_series(b, ssm, &weather, &hvac)?;
    Ok(match rc.horizon {
        Some(h) => series.truncated(h),
        None => series,
    })
}

fn step_options(rc: &RunConfig, series: &InputSeries) -> Result<RunOptions, Failure> {
    let dt = rc.dt.unwrap_or(series.interval);
    series.substeps(dt)?;
    Ok(RunOptions {
        dt,
        form: UpdateForm::Standard,
    })
}

fn maybe_dump(rc: &RunConfig, b: &ValidatedBuilding, ssm: &StateSpaceModel) -> Outcome {
    if rc.dump_matrices {
        let dir = rc.out.join("matrices");
        dump_matrices(ssm, &design_flows(b), &dir)?;
        println!("matrices at design flow written to {}", dir.display());
    }
    Ok(())
}

pub fn validate(rc: &RunConfig) -> Outcome {
    let b = load_model(rc)?;
    let ssm = assemble(&b);
    println!("zone,surface,kind,net_area_m2,r_k_per_w,c_node_j_per_k,r_fict_k_per_w");
    for (k, zone) in b.zones.iter().enumerate() {
        for (j, s) in zone.surfaces.iter().enumerate() {
            let p = b.params(k, j);
            let fict = p.fictitious_resistance.map_or(String::new(), |r| format!("{r:.6e}"));
            println!(
                "{},{},{},{:.3},{:.6e},{:.6e},{fict}",
                zone.id,
                s.id,
                s.kind.as_str(),
                p.net_area,
                p.resistance,
                p.capacitance
            );
        }
    }
    println!();
    for (k, zone) in b.zones.iter().enumerate() {
        println!(
            "zone {}: m_k = {}, n_k = {}",
            zone.id,
            zone.surfaces.len(),
            ssm.layout.block_size(k)
        );
    }
    println!("N = {}", ssm.dim());
    maybe_dump(rc, &b, &ssm)
}

pub fn simulate(rc: &RunConfig) -> Outcome {
    let b = load_model(rc)?;
    let ssm = assemble(&b);
    let series = load_series(rc, &b, &ssm)?;
    let loads = load_loads(rc.require(&rc.loads, "loads").map_err(invalid)?, &b)?;
    let options = step_options(rc, &series)?;
    let truth = simulate_truth(
        &b,
        &ssm,
        &series,
        &loads,
        None,
        &TruthConfig {
            dt: options.dt,
            noise: MeasurementNoise::Uniform {
                max_variance: rc.max_noise_variance,
            },
            seed: rc.seed,
        },
    )?;
    let prov = rc.provenance().with("dt", options.dt);
    let ids = state_ids(&b, &ssm.layout);
    let t = emit(&rc.out, "truth.csv", |w| {
        write_truth(w, &prov, &ids, &series.timestamps, &truth.states)
    })?;
    let m = Measurements {
        timestamps: series.timestamps.clone(),
        values: truth.measurements,
        variances: truth.variances,
    };
    let y = emit(&rc.out, "measurements.csv", |w| {
        write_measurements(w, &prov, &zone_ids(&b), &m)
    })?;
    println!("simulated {} records of {} states", series.len(), ssm.dim());
    println!("truth: {}", t.display());
    println!("measurements: {}", y.display());
    maybe_dump(rc, &b, &ssm)
}

fn clusters_for(rc: &RunConfig, b: &ValidatedBuilding, ssm: &StateSpaceModel) -> Result<Partition, Failure> {
    let h = ssm.h(&design_flows(b))?;
    let (partition, w) = cluster_states(&h, &ssm.layout, rc.seed);
    match &rc.partition {
        None => Ok(partition),
        Some(path) => {
            let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            Ok(read_partition(file, path, &state_ids(b, &ssm.layout), &w)?)
        }
    }
}

pub fn cluster(rc: &RunConfig) -> Outcome {
    let b = load_model(rc)?;
    let ssm = assemble(&b);
    let h = ssm.h(&design_flows(&b))?;
    let (partition, w) = cluster_states(&h, &ssm.layout, rc.seed);
    let prov = rc
        .provenance()
        .with("clusters", partition.count)
        .with("modularity", partition.modularity);
    let ids = state_ids(&b, &ssm.layout);
    let p = emit(&rc.out, "partition.csv", |out| write_partition(out, &prov, &ids, &partition))?;
    let s = emit(&rc.out, "clusters.csv", |out| {
        write_cluster_summary(out, &prov, &b, &ssm.layout, &partition, &w)
    })?;
    println!(
        "{} clusters over {} states, modularity Q = {:.6}",
        partition.count,
        ssm.dim(),
        partition.modularity
    );
    println!("partition: {}", p.display());
    println!("summary: {}", s.display());
    Ok(())
}

/// Everything a filter run needs, loaded and aligned.
struct Problem {
    building: ValidatedBuilding,
    ssm: StateSpaceModel,
    series: InputSeries,
    measurements: Vec<DVector<f64>>,
    noise: NoiseSpec,
    init: FilterState,
    options: RunOptions,
}

fn problem(rc: &RunConfig) -> Result<Problem, Failure> {
    let building = load_model(rc)?;
    let ssm = assemble(&building);
    let series = load_series(rc, &building, &ssm)?;
    let path = rc.require(&rc.measurements, "measurements").map_err(invalid)?;
    let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let ids: Vec<String> = building.zones.iter().map(|z| z.id.clone()).collect();
    let m = read_measurements(file, path, &ids)?;
    if m.timestamps.len() < series.len() || m.timestamps[..series.len()] != series.timestamps[..] {
        return Err(invalid(format!(
            "{}: measurement timestamps do not line up with the weather and HVAC records",
            path.display()
        )));
    }
    let noise = NoiseSpec::with_load_process(&ssm.layout, DVector::from_vec(m.variances), rc.process_noise)?;
    let init = FilterState::initial(&building, &ssm.layout);
    let options = step_options(rc, &series)?;
    let mut measurements = m.values;
    measurements.truncate(series.len());
    Ok(Problem {
        building,
        ssm,
        series,
        measurements,
        noise,
        init,
        options,
    })
}

fn run_full(p: &Problem) -> Result<Trajectory, Failure> {
    Ok(run_filter(
        &FilterModel::full(&p.ssm),
        &p.series,
        Some(&p.measurements),
        &p.noise,
        &p.init,
        p.options,
    )?)
}

fn run_wcs(p: &Problem, subsystems: &[Subsystem]) -> Result<Trajectory, Failure> {
    Ok(run_wcs_filter(
        subsystems,
        &p.series,
        Some(&p.measurements),
        &p.noise,
        &p.init,
        p.options,
    )?)
}

fn timed<T>(f: impl FnOnce() -> Result<T, Failure>) -> Result<(T, Duration), Failure> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed()))
}

pub fn estimate(rc: &RunConfig) -> Outcome {
    let p = problem(rc)?;
    let (traj, clusters) = match rc.mode {
        Mode::Full => (run_full(&p)?, 1),
        Mode::Wcs => {
            let partition = clusters_for(rc, &p.building, &p.ssm)?;
            let subsystems = extract_subsystems(&p.ssm, &partition)?;
            (run_wcs(&p, &subsystems)?, partition.count)
        }
    };
    let mode = rc.mode.as_str();
    let prov = rc.provenance().with("mode", mode).with("clusters", clusters);
    let ids = state_ids(&p.building, &p.ssm.layout);
    let e = emit(&rc.out, &format!("estimates_{mode}.csv"), |w| {
        write_estimates(w, &prov, &ids, &traj)
    })?;
    println!("{mode} filter over {} records, {} states: {}", traj.len(), p.ssm.dim(), e.display());

    if let Some(path) = &rc.truth {
        let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let (ts, states) = read_truth(file, path, &ids)?;
        if ts.len() < traj.len() || ts[..traj.len()] != traj.timestamps[..] {
            return Err(invalid(format!(
                "{}: truth timestamps do not line up with the estimates",
                path.display()
            )));
        }
        let rmse = zone_rmse(&p.ssm.layout, &traj, &states);
        let r = emit(&rc.out, &format!("rmse_{mode}.csv"), |w| {
            prov.write(w)?;
            writeln!(w, "zone_id,rmse_c")?;
            for (z, v) in p.building.zones.iter().zip(&rmse) {
                writeln!(w, "{},{v:?}", z.id)?;
            }
            Ok(())
        })?;
        let worst = rmse.iter().copied().fold(0.0, f64::max);
        println!("zone temperature RMSE: max {worst:.4} °C ({})", r.display());
    }
    Ok(())
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    Some(s[s.len() / 2])
}

pub fn compare(rc: &RunConfig) -> Outcome {
    let p = problem(rc)?;
    let partition = clusters_for(rc, &p.building, &p.ssm)?;
    let subsystems = extract_subsystems(&p.ssm, &partition)?;
    let (full, t_full) = timed(|| run_full(&p))?;
    let (wcs, t_wcs) = timed(|| run_wcs(&p, &subsystems))?;
    let coords = bemest::wcs::EmuStates::from(rc.emu_states).indices(&p.ssm.layout);
    let e = error_metric(&wcs.means, &full.means, &coords, p.building.zones.len())?;
    let prov = rc
        .provenance()
        .with("clusters", partition.count)
        .with("emu_states", format!("{:?}", rc.emu_states).to_lowercase());
    let series_path = emit(&rc.out, "emu.csv", |w| {
        write_error_series(w, &prov, &full.timestamps, &e.values)
    })?;
    let after: &[f64] = e.values.get(rc.burn_in..).unwrap_or(&[]);
    let max = after.iter().copied().fold(f64::NAN, f64::max);
    let med = median(after);
    let speedup = t_full.as_secs_f64() / t_wcs.as_secs_f64();
    let report = emit(&rc.out, "compare.csv", |w| {
        prov.write(w)?;
        writeln!(w, "key,value")?;
        writeln!(w, "states,{}", p.ssm.dim())?;
        writeln!(w, "clusters,{}", partition.count)?;
        writeln!(w, "records,{}", full.len())?;
        writeln!(w, "burn_in,{}", rc.burn_in)?;
        writeln!(w, "emu_max,{max:?}")?;
        writeln!(w, "emu_median,{:?}", med.unwrap_or(f64::NAN))?;
        writeln!(w, "excluded_coordinate_steps,{}", e.excluded)?;
        writeln!(w, "full_seconds,{:?}", t_full.as_secs_f64())?;
        writeln!(w, "wcs_seconds,{:?}", t_wcs.as_secs_f64())?;
        writeln!(w, "speedup,{speedup:?}")
    })?;
    println!("N = {}, {} clusters, {} records", p.ssm.dim(), partition.count, full.len());
    match med {
        Some(med) => println!("e_mu after {} records: max {max:.4}, median {med:.4}", rc.burn_in),
        None => println!("e_mu: no records after the burn-in of {}", rc.burn_in),
    }
    println!(
        "full filter {:.3} s, wcs filter {:.3} s, speedup {speedup:.2}x",
        t_full.as_secs_f64(),
        t_wcs.as_secs_f64()
    );
    println!("series: {}", series_path.display());
    println!("report: {}", report.display());
    Ok(())
}

/// Synthetic building and inputs written by `generate` and used by `bench`
/// when no building is given.
struct Synthetic {
    building: ValidatedBuilding,
    weather: Vec<bemest::inputs::WeatherRecord>,
    hvac: Vec<bemest::inputs::HvacRecord>,
    loads: LoadProfiles,
}

fn synthetic(rc: &RunConfig) -> Result<Synthetic, Failure> {
    let model = match rc.kind {
        Generated::Campus => {
            if rc.rows == 0 || rc.cols == 0 {
                return Err(invalid("--rows and --cols must be at least 1"));
            }
            synth::campus(rc.rows, rc.cols, rc.seed)
        }
        Generated::FourZone => synth::four_zone(),
    };
    if rc.hours < 2 {
        return Err(invalid("--hours must be at least 2"));
    }
    let building = validate_building(model).map_err(|v| invalid(v.to_string()))?;
    let weather = synth::synthetic_weather(&building.location, synth::year_start(), rc.hours, rc.seed);
    let hvac = synth::synthetic_hvac(&building, &weather);
    let loads = synth::synthetic_loads(&building, &weather)?;
    Ok(Synthetic {
        building,
        weather,
        hvac,
        loads,
    })
}

pub fn generate(rc: &RunConfig) -> Outcome {
    let s = synthetic(rc)?;
    let prov = rc.provenance();
    let b = emit(&rc.out, "building.toml", |w| {
        prov.write(w)?;
        w.write_all(to_toml(s.building.model()).as_bytes())
    })?;
    emit(&rc.out, "weather.csv", |w| write_weather(w, &prov, &s.weather))?;
    emit(&rc.out, "hvac.csv", |w| write_hvac(w, &prov, &zone_ids(&s.building), &s.hvac))?;
    emit(&rc.out, "loads.csv", |w| {
        prov.write(w)?;
        s.loads.write(&s.building, w)
    })?;
    let n = assemble(&s.building).dim();
    println!(
        "{} zones, N = {n}, {} hourly records written to {}",
        s.building.zones.len(),
        s.weather.len(),
        b.parent().unwrap_or(Path::new(".")).display()
    );
    Ok(())
}

pub fn bench(rc: &RunConfig) -> Outcome {
    let (building, series, loads) = if rc.building.is_some() {
        let b = load_model(rc)?;
        let ssm = assemble(&b);
        let series = load_series(rc, &b, &ssm)?;
        let loads = match &rc.loads {
            Some(path) => load_loads(path, &b)?,
            None => LoadProfiles::zeros(&b),
        };
        (b, series, loads)
    } else {
        let s = synthetic(rc)?;
        let ssm = assemble(&s.building);
        let series = build_input_series(&s.building, &ssm, &s.weather, &s.hvac)?;
        (s.building, series, s.loads)
    };
    let ssm = assemble(&building);
    let options = step_options(rc, &series)?;
    let truth = simulate_truth(
        &building,
        &ssm,
        &series,
        &loads,
        None,
        &TruthConfig {
            dt: options.dt,
            noise: MeasurementNoise::Uniform {
                max_variance: rc.max_noise_variance,
            },
            seed: rc.seed,
        },
    )?;
    let p = Problem {
        init: FilterState::initial(&building, &ssm.layout),
        noise: NoiseSpec::with_load_process(&ssm.layout, DVector::from_vec(truth.variances), rc.process_noise)?,
        measurements: truth.measurements,
        building,
        ssm,
        series,
        options,
    };
    let (partition, t_cluster) = timed(|| clusters_for(rc, &p.building, &p.ssm))?;
    let subsystems = extract_subsystems(&p.ssm, &partition)?;
    let (_, t_full) = timed(|| run_full(&p))?;
    let (_, t_wcs) = timed(|| run_wcs(&p, &subsystems))?;
    let ratio = t_wcs.as_secs_f64() / t_full.as_secs_f64();
    let prov = rc.provenance().with("clusters", partition.count);
    let report = emit(&rc.out, "bench.csv", |w| {
        prov.write(w)?;
        writeln!(w, "key,value")?;
        writeln!(w, "states,{}", p.ssm.dim())?;
        writeln!(w, "clusters,{}", partition.count)?;
        writeln!(w, "records,{}", p.series.len())?;
        writeln!(w, "cluster_seconds,{:?}", t_cluster.as_secs_f64())?;
        writeln!(w, "full_seconds,{:?}", t_full.as_secs_f64())?;
        writeln!(w, "wcs_seconds,{:?}", t_wcs.as_secs_f64())?;
        writeln!(w, "wcs_over_full,{ratio:?}")
    })?;
    println!("N = {}, {} clusters, {} records", p.ssm.dim(), partition.count, p.series.len());
    println!("clustering   {:>10.3} s", t_cluster.as_secs_f64());
    println!("full filter  {:>10.3} s", t_full.as_secs_f64());
    println!("wcs filter   {:>10.3} s", t_wcs.as_secs_f64());
    println!("wcs / full   {ratio:>10.3}");
    println!("report: {}", report.display());
    if ratio >= 1.0 {
        return Err(Failure::Runtime(format!(
            "wcs filtering was not faster than the full filter (ratio {ratio:.3})"
        )));
    }
    Ok(())
}
