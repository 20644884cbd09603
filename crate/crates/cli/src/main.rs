//! `axial-qcd`: file-emitting runs of the spectrum, dynamics, resource, scaling,
//! mitigation and annealing studies.

mod config;
mod output;

use axial_qcd::anneal::{
    build_qubo, default_deflation_shift, deflate, infidelity, project_hamiltonian, zoom_iterate, AnnealSchedule, Sampler,
    ZoomConfig, ZoomState,
};
use axial_qcd::circuit::{resource_count_closed_form, tally_step, ResourceCount, StepResources, TrotterOptions};
use axial_qcd::evolution::{fit_quadratic, mitigate_depolarizing, QuadraticFit, TrotterScan};
use axial_qcd::model::{build_hamiltonian, ModelParams};
use axial_qcd::pauli::Ket;
use axial_qcd::sector::{
    decompose_energy, enumerate_sector, hadron_states, linear_entropy, occupation, HadronTable, Level, SectorKey,
};
use clap::{Parser, Subcommand, ValueEnum};
use config::ModelArgs;
use output::{opt7, seconds, sig7, write_csv, write_json, RunManifest};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(axial_qcd::Error),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<axial_qcd::Error> for CliError {
    fn from(e: axial_qcd::Error) -> Self {
        CliError::Solver(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "axial-qcd", version, about = "1+1D SU(Nc) lattice QCD in axial gauge on qubits")]
struct Cli {
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vacuum energy, hadron masses and per-state observables.
    Spectrum(SpectrumArgs),
    /// Transition probability curves, exact and Trotterized.
    Evolve(EvolveArgs),
    /// Gate counts of one Trotter step.
    Resources(ResourcesArgs),
    /// Trotter steps needed for a target accuracy, with a quadratic fit.
    TrotterScaling(ScalingArgs),
    /// Depolarizing-noise mitigation of measured probabilities.
    Mitigate(MitigateArgs),
    /// Zooming QUBO eigensolver on the neutral sector.
    Anneal(AnnealArgs),
}

#[derive(clap::Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(clap::Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Trotter step counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10")]
    steps: Vec<usize>,
    /// `vacuum`, `pair:F,C`, `bbar` or `ket:BITS` (qubit 0 rightmost).
    #[arg(long, default_value = "vacuum")]
    source: String,
    #[arg(long, default_value = "vacuum")]
    target: String,
}

#[derive(clap::Args, Debug)]
struct ResourcesArgs {
    #[arg(long, default_value_t = 3)]
    nc: usize,
    #[arg(long, default_value_t = 2)]
    nf: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
}

#[derive(clap::Args, Debug)]
struct ScalingArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 25.0)]
    t_max: f64,
    /// Spacing of both the reported times and the accuracy grid.
    #[arg(long, default_value_t = axial_qcd::evolution::STEP_SCAN_SPACING)]
    spacing: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value = "vacuum")]
    source: String,
    #[arg(long, default_value = "vacuum")]
    target: String,
    /// Fit only points with t at or above this.
    #[arg(long, default_value_t = 1.0)]
    fit_tmin: f64,
    /// Refit an existing `t,n` CSV instead of scanning.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct MitigateArgs {
    /// CSV with columns `p_phys`, `p_mit` and optionally `t`.
    #[arg(long)]
    input: PathBuf,
    /// Fully decohered probability per physical state.
    #[arg(long, default_value_t = 0.125)]
    floor: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum SamplerKind {
    Exhaustive,
    Annealing,
}

#[derive(clap::Args, Debug)]
struct AnnealArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 2)]
    bits: usize,
    #[arg(long, default_value_t = 14)]
    zoom_steps: usize,
    #[arg(long, default_value_t = 2)]
    restarts: usize,
    #[arg(long, default_value_t = 4)]
    restart_stride: u32,
    #[arg(long, value_enum, default_value_t = SamplerKind::Annealing)]
    sampler: SamplerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    reads: usize,
    #[arg(long, default_value_t = 16)]
    sweeps: usize,
    /// Number of lowest states, found one by one with deflation.
    #[arg(long, default_value_t = 1)]
    states: usize,
    /// Also export the first QUBO as `i j value` triplets.
    #[arg(long)]
    qubo_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    let start = Instant::now();
    let args: Vec<String> = std::env::args().collect();
    let finish = |command: &str, params: &dyn erased::Params, seeds: Vec<u64>, outputs: Vec<PathBuf>| {
        let m = RunManifest { command, args: args.clone(), params: params.json(), seeds, version: env!("CARGO_PKG_VERSION"), outputs, wall_seconds: seconds(start.elapsed()) };
        m.write(&cli.out).map(|_| ())
    };
    match &cli.command {
        Command::Spectrum(a) => {
            let p = a.model.resolve()?;
            let outs = spectrum(&p, &cli.out)?;
            finish("spectrum", &p, vec![], outs)
        }
        Command::Evolve(a) => {
            let p = a.model.resolve()?;
            let outs = evolve(&p, a, &cli.out)?;
            finish("evolve", &p, vec![], outs)
        }
        Command::Resources(a) => {
            let outs = resources(a, &cli.out)?;
            finish("resources", &(a.nc, a.nf, a.l), vec![], outs)
        }
        Command::TrotterScaling(a) => {
            let p = a.model.resolve()?;
            let outs = trotter_scaling(&p, a, &cli.out)?;
            finish("trotter-scaling", &p, vec![], outs)
        }
        Command::Mitigate(a) => {
            let outs = mitigate(a, &cli.out)?;
            finish("mitigate", &a.floor, vec![], outs)
        }
        Command::Anneal(a) => {
            let p = a.model.resolve()?;
            let outs = anneal(&p, a, &cli.out)?;
            finish("anneal", &p, vec![a.seed], outs)
        }
    }
}

mod erased {
    pub trait Params {
        fn json(&self) -> serde_json::Value;
    }

    impl<T: serde::Serialize> Params for T {
        fn json(&self) -> serde_json::Value {
            serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
        }
    }
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    params: &'a ModelParams,
    table: HadronTable,
}

fn spectrum(p: &ModelParams, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let states = hadron_states::<f64>(p)?;
    let table = states.table();
    let ham = build_hamiltonian::<f64>(p)?;
    let vac = &states.vacuum;
    let named: Vec<(&str, Option<&Level<f64>>)> = vec![
        ("vacuum", Some(vac)),
        ("sigma", states.sigma.as_ref()),
        ("pi", states.pi.as_ref()),
        ("pi_plus", states.pi_plus.as_ref()),
        ("delta", states.delta.as_ref()),
        ("deltadelta", states.deltadelta.as_ref()),
    ];
    let mut rows = Vec::new();
    for (name, level) in named {
        let Some(l) = level else { continue };
        let d = decompose_energy(&ham, &l.state, &vac.state);
        rows.push(vec![
            name.to_string(),
            sig7(l.energy),
            sig7(l.energy - vac.energy),
            sig7(l.color_casimir),
            opt7(l.isospin),
            sig7(linear_entropy(p, &l.state)),
            sig7(occupation(p, &l.state)),
            sig7(d[0]),
            sig7(d[1]),
            sig7(d[2]),
        ]);
    }
    let csv = dir.join("spectrum_states.csv");
    write_csv(
        &csv,
        &["state", "energy", "mass", "color_casimir", "isospin_casimir", "linear_entropy", "occupation", "d_mass", "d_kinetic", "d_electric"],
        &rows,
    )?;
    let json = dir.join("spectrum.json");
    write_json(&json, &SpectrumReport { params: p, table: table.clone() })?;
    println!("E_vac      {}", sig7(table.e_vac));
    for (k, v) in [("M_sigma", table.m_sigma), ("M_pi", table.m_pi), ("M_delta", table.m_delta), ("M_deltadelta", table.m_deltadelta), ("B_deltadelta", table.b_deltadelta)] {
        println!("{k:<10} {}", opt7(v));
    }
    Ok(vec![json, csv])
}

/// Parses a basis-state name into a ket.
fn parse_state(p: &ModelParams, s: &str) -> Result<Ket, CliError> {
    let vac = p.trivial_vacuum();
    let bad = || CliError::Config(format!("unknown state `{s}`"));
    if s == "vacuum" {
        return Ok(vac);
    }
    if s == "bbar" {
        let flips = (0..p.nc).flat_map(|c| [p.qubit(0, 0, c), p.qubit(1, 0, c)]);
        return Ok(flips.fold(vac, |k, q| k ^ 1 << q));
    }
    if let Some(rest) = s.strip_prefix("pair:") {
        let (f, c) = rest.split_once(',').ok_or_else(bad)?;
        let (f, c): (usize, usize) = (f.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?);
        if f >= p.nf || c >= p.nc {
            return Err(bad());
        }
        return Ok(vac ^ 1 << p.qubit(0, f, c) ^ 1 << p.qubit(1, f, c));
    }
    if let Some(bits) = s.strip_prefix("ket:") {
        if bits.len() != p.nqubits() {
            return Err(CliError::Config(format!("`{bits}` needs {} digits", p.nqubits())));
        }
        return Ket::from_str_radix(bits, 2).map_err(|_| bad());
    }
    Err(bad())
}

fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>, CliError> {
    if !(dt > 0.0 && t_max >= 0.0) {
        return Err(CliError::Config("need dt > 0 and t_max ≥ 0".into()));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}

fn evolve(p: &ModelParams, a: &EvolveArgs, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (src, dst) = (parse_state(p, &a.source)?, parse_state(p, &a.target)?);
    if a.steps.contains(&0) {
        return Err(CliError::Config("Trotter step counts must be positive".into()));
    }
    let grid = time_grid(a.t_max, a.dt)?;
    let scan = TrotterScan::new(p, src, dst, &TrotterOptions::default())?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&t| {
            let mut r = vec![sig7(t), sig7(scan.exact(t))];
            r.extend(a.steps.iter().map(|&n| sig7(if t == 0.0 { scan.exact(0.0) } else { scan.trotter(t, n) })));
            r
        })
        .collect();
    let mut header = vec!["t".to_string(), "exact".to_string()];
    header.extend(a.steps.iter().map(|n| format!("steps_{n}")));
    let path = dir.join("evolve.csv");
    write_csv(&path, &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct ResourceReport {
    nc: usize,
    nf: usize,
    l: usize,
    closed_form: StepResources,
    constructed: StepResources,
    agree: bool,
}

fn resources(a: &ResourcesArgs, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let closed = resource_count_closed_form(a.nc as u64, a.nf as u64, a.l as u64)?;
    let built = tally_step(&ModelParams::new(a.nc, a.nf, a.l, 1.0, 1.0))?;
    let report = ResourceReport { nc: a.nc, nf: a.nf, l: a.l, closed_form: closed, constructed: built, agree: closed == built };
    let line = |name: &str, r: &ResourceCount| println!("{name:<18} RZ {:>10} H {:>10} CNOT {:>10}", r.rz, r.hadamard, r.cnot);
    line("mass", &built.mass);
    line("kinetic", &built.kinetic);
    line("electric", &built.electric);
    line("total", &built.total());
    line("baryon chemical", &built.baryon_chemical);
    line("isospin chemical", &built.isospin_chemical);
    println!("closed form agrees: {}", report.agree);
    let path = dir.join("resources.json");
    write_json(&path, &report)?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct FitReport {
    fit: QuadraticFit,
    t_min: f64,
    epsilon: Option<f64>,
}

#[derive(Deserialize)]
struct PointRow {
    t: f64,
    n: f64,
}

fn trotter_scaling(p: &ModelParams, a: &ScalingArgs, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let points: Vec<(f64, f64)> = if let Some(file) = &a.points {
        let mut r = csv::Reader::from_path(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
        r.deserialize::<PointRow>()
            .map(|row| row.map(|x| (x.t, x.n)).map_err(|e| CliError::Config(format!("{}: {e}", file.display()))))
            .collect::<Result<_, _>>()?
    } else {
        if a.epsilon <= 0.0 {
            return Err(CliError::Config("epsilon must be positive".into()));
        }
        let scan = TrotterScan::new(p, parse_state(p, &a.source)?, parse_state(p, &a.target)?, &TrotterOptions::default())?;
        let mut n = 1;
        let mut out = vec![(0.0, 1.0)];
        for t in time_grid(a.t_max, a.spacing)?.into_iter().skip(1) {
            // The envelope requirement never shrinks as t grows.
            n = scan.required_steps(t, a.epsilon, a.spacing, n, axial_qcd::evolution::STEP_SCAN_CAP)?;
            out.push((t, n as f64));
        }
        out
    };
    let csv = dir.join("trotter_scaling.csv");
    write_csv(&csv, &["t", "n"], &points.iter().map(|&(t, n)| vec![sig7(t), format!("{n}")]).collect::<Vec<_>>())?;
    let mut outs = vec![csv];
    match fit_quadratic(&points, a.fit_tmin) {
        Ok(fit) => {
            println!("N = a t^2 + b t + c");
            for (name, c, (lo, hi)) in [("a", fit.coeffs[0], fit.intervals[0]), ("b", fit.coeffs[1], fit.intervals[1]), ("c", fit.coeffs[2], fit.intervals[2])] {
                println!("{name} = {}  [{}, {}]", sig7(c), sig7(lo), sig7(hi));
            }
            let json = dir.join("trotter_fit.json");
            write_json(&json, &FitReport { fit, t_min: a.fit_tmin, epsilon: a.points.is_none().then_some(a.epsilon) })?;
            outs.push(json);
        }
        Err(e) => eprintln!("no fit: {e}"),
    }
    Ok(outs)
}

#[derive(Deserialize)]
struct MitigationRow {
    t: Option<f64>,
    p_phys: f64,
    p_mit: f64,
}

fn mitigate(a: &MitigateArgs, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut r = csv::Reader::from_path(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let mut rows = Vec::new();
    for row in r.deserialize::<MitigationRow>() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", a.input.display())))?;
        let pred = mitigate_depolarizing(row.p_phys, row.p_mit, a.floor)?;
        rows.push(vec![opt7(row.t), sig7(row.p_phys), sig7(row.p_mit), sig7(pred)]);
    }
    let path = dir.join("mitigated.csv");
    write_csv(&path, &["t", "p_phys", "p_mit", "p_pred"], &rows)?;
    Ok(vec![path])
}

fn anneal(p: &ModelParams, a: &AnnealArgs, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let i3 = (p.nf >= 2).then_some(0);
    let basis = enumerate_sector(p, &SectorKey::uniform(p.nc, 0, i3))?;
    let hp = project_hamiltonian(p, &basis)?;
    let sampler = match a.sampler {
        SamplerKind::Exhaustive => Sampler::Exhaustive,
        SamplerKind::Annealing => Sampler::Annealing(AnnealSchedule { reads: a.reads, sweeps: a.sweeps, seed: a.seed, ..Default::default() }),
    };
    let mut outs = Vec::new();
    if let Some(path) = &a.qubo_out {
        let zs = ZoomState { coeffs: vec![0.0; hp.dim()], zoom: 0, eta: 0.0, bits: a.bits };
        std::fs::write(path, build_qubo(&hp, &zs)?.to_triplets()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        outs.push(path.clone());
    }
    let (exact, vecs) = hp.eigen();
    let shift = default_deflation_shift(&hp);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut rows = Vec::new();
    let mut current = hp.clone();
    for state in 0..a.states.min(hp.dim()) {
        // Above the lowest eigenvalue of the deflated matrix, so F has a descent direction.
        let eta0 = if state == 0 { 0.0 } else { (0..current.dim()).map(|i| current.h[i][i]).fold(f64::INFINITY, f64::min) };
        let cfg = ZoomConfig { bits: a.bits, zoom_steps: a.zoom_steps, restarts: a.restarts, restart_stride: a.restart_stride, eta0, sampler: sampler.clone(), ..Default::default() };
        let outcome = zoom_iterate(&current, &cfg)?;
        for r in &outcome.records {
            rows.push(vec![state.to_string(), r.iteration.to_string(), r.zoom.to_string(), sig7(r.eta), sig7(r.energy), sig7(r.energy - exact[state])]);
        }
        println!(
            "state {state}: E = {}  exact {}  1-fidelity {}",
            sig7(outcome.energy),
            sig7(exact[state]),
            sig7(infidelity(&outcome.coeffs, &vecs[state]))
        );
        found.push(orthonormalize(&found, outcome.coeffs));
        current = deflate(&hp, &found, shift)?;
    }
    let path = dir.join("anneal.csv");
    write_csv(&path, &["state", "iteration", "zoom", "eta", "energy", "delta_exact"], &rows)?;
    outs.push(path);
    Ok(outs)
}

/// Gram–Schmidt against already found states, so deflation sees an orthonormal set.
fn orthonormalize(found: &[Vec<f64>], mut v: Vec<f64>) -> Vec<f64> {
    for u in found {
        let c: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}
