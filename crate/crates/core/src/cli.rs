//! Command-line interface: argument parsing, experiment orchestration and
//! CSV / field-dump output.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flow::drift_interface;
use crate::front_solver::{
    cutoff_distance, evolve_levelset, signed_distance_field, FrontMethod, FrontTrajectory,
    LevelSetOptions,
};
use crate::pde_solver::{simulate, PdeState};
use crate::traveling_wave::{compute_wave, WaveProfile};
use crate::verification::{
    check_comparison, check_flow, check_generation, check_generation_residuals, check_generation_sandwich,
    check_mass_conservation, check_ode_lattice, check_ordering, check_propagation_residuals,
    check_propagation_sandwich, check_wave, circle_benchmark, compare_front_solvers, d_constant_1d,
    d_constant_grid, drifted_front, front_table_1d, run_sweep, sigma_max, GenComparators, PropComparators,
    PropLattice, SandwichRecord, Scenario, Witnesses,
};

/// The only environment override: the output directory.
pub const OUT_ENV: &str = "KPP_SHARP_OUT";

/// Exit code of a failed check.
pub const EXIT_FAIL: u8 = 1;
/// Exit code of a usage or configuration error.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "kpp-sharp", version, about = "Sharp-interface limit of a degenerate Fisher-KPP equation with drift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Shipped preset (ac1 … ac9) used when no file is given.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Output directory, or a `.csv` file for single-file outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the ε of the configuration.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Overrides the exponent m.
    #[arg(long)]
    pub m: Option<f64>,
    /// Overrides the wave tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Front solver.
    #[arg(long, default_value = "markers")]
    pub method: FrontMethod,
    /// Overrides the seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Ode,
    Wave,
    Flow,
    Generation,
    Propagation,
    Ordering,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimal speed and profile of the travelling wave.
    Wave(Common),
    /// Drifted initial interface.
    Flow(Common),
    /// Runs the PDE and writes field dumps and a summary.
    Simulate(Common),
    /// Evolves the drifted front with markers or a level set.
    Front(Common),
    /// ε-sweep of thickness and front distance.
    Sweep(Common),
    /// Runs a verification suite.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        common: Common,
    },
}

/// Loads the configuration of `common`, falling back to `ac1` when no
/// source is given, and applies the command-line overrides.
pub fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => RunConfig::from_path(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::preset("ac1")?,
    };
    if let Some(eps) = common.eps {
        cfg.params.epsilon = eps;
        cfg.sweep.eps.clear();
    }
    if let Some(m) = common.m {
        cfg.params.m = m;
    }
    if let Some(tol) = common.tol {
        cfg.verify.wave_tol = tol;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Output location: `--out`, else the environment override, else `out`.
fn out_root(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// File path for a single-file output: `--out` itself when it names a
/// `.csv` file, otherwise `default_name` inside the output directory.
fn out_file(common: &Common, default_name: &str) -> Result<PathBuf> {
    let root = out_root(common);
    if root.extension().is_some_and(|e| e == "csv") {
        if let Some(parent) = root.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        return Ok(root);
    }
    std::fs::create_dir_all(&root)?;
    Ok(root.join(default_name))
}

fn out_dir(common: &Common) -> Result<PathBuf> {
    let root = out_root(common);
    std::fs::create_dir_all(&root)?;
    Ok(root)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs a command; `Ok(true)` when every check passed.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Wave(c) => cmd_wave(c),
        Command::Flow(c) => cmd_flow(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Front(c) => cmd_front(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Verify { check, common } => cmd_verify(*check, common),
    }
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn cmd_wave(c: &Common) -> Result<bool> {
    let cfg = load_config(c)?;
    let m = cfg.params.m;
    let tol = c.tol.unwrap_or(1e-6);
    let wave = compute_wave(m, tol)?;
    println!("m = {m}  c* = {:.6}  tail rate = {:.6}", wave.c_star, wave.tail_rate);
    let path = out_file(c, &format!("wave_m{m}.csv"))?;
    wave.write_csv(create(&path)?)?;
    println!("profile written to {}", path.display());
    Ok(true)
}

fn cmd_flow(c: &Common) -> Result<bool> {
    let cfg = load_config(c)?;
    let sc = cfg.scenario()?;
    let gamma = drift_interface(&sc.gamma0(), &sc.flow()?, &sc.params)?;
    let traj = FrontTrajectory {
        method: FrontMethod::Markers,
        times: vec![sc.params.generation_time()],
        interfaces: vec![gamma],
        phi: Vec::new(),
    };
    let path = out_file(c, "gamma.csv")?;
    traj.write_csv(create(&path)?)?;
    println!("drifted interface at t = {:.6} written to {}", traj.times[0], path.display());
    Ok(true)
}

/// Measure of `{u ≥ 1/2}`.
fn level_extent(s: &PdeState) -> f64 {
    s.u.values.iter().filter(|&&v| v >= 0.5).count() as f64 * s.u.grid.cell_volume()
}

fn cmd_simulate(c: &Common) -> Result<bool> {
    let cfg = load_config(c)?;
    let sc = cfg.scenario()?;
    let t_final = sc.params.t_final;
    let times: Vec<f64> = cfg.sweep.fractions.iter().map(|f| f * t_final).collect();
    let snaps = simulate(&sc.initial_state()?, &times)?;
    let dir = out_dir(c)?;
    let mut w = csv::Writer::from_writer(create(&dir.join("summary.csv"))?);
    w.write_record(["t", "mass", "min", "max", "extent"])?;
    for (k, s) in snaps.iter().enumerate() {
        w.write_record(&[
            s.t.to_string(),
            s.mass().to_string(),
            s.u.min().to_string(),
            s.u.max().to_string(),
            level_extent(s).to_string(),
        ])?;
        std::fs::write(dir.join(format!("field_{k:03}.txt")), s.u.to_text(s.t))?;
    }
    w.flush()?;
    println!("{} snapshots written to {}", snaps.len(), dir.display());
    Ok(true)
}

fn scenario_wave(cfg: &RunConfig) -> Result<WaveProfile> {
    compute_wave(cfg.params.m, cfg.verify.wave_tol)
}

fn cmd_front(c: &Common) -> Result<bool> {
    let cfg = load_config(c)?;
    let sc = cfg.scenario()?;
    let wave = scenario_wave(&cfg)?;
    let traj = match c.method {
        FrontMethod::Markers => drifted_front(&sc, &wave)?,
        FrontMethod::Levelset => {
            let gamma = drift_interface(&sc.gamma0(), &sc.flow()?, &sc.params)?;
            if gamma.dim != 2 {
                return Err(Error::InvalidParameter(
                    "the level-set solver is two-dimensional".into(),
                ));
            }
            let horizon = (sc.params.t_final - sc.params.generation_time()).max(0.0);
            let phi0 = signed_distance_field(&gamma, sc.build_grid()?);
            let opts = LevelSetOptions {
                snapshots: (1..10).map(|k| horizon * k as f64 / 10.0).collect(),
                ..LevelSetOptions::default()
            };
            evolve_levelset(&phi0, wave.c_star, &sc.chemo, horizon, &opts)?
        }
    };
    let path = out_file(c, "front.csv")?;
    traj.write_csv(create(&path)?)?;
    println!("{} snapshots written to {}", traj.times.len(), path.display());
    Ok(true)
}

fn cmd_sweep(c: &Common) -> Result<bool> {
    let cfg = load_config(c)?;
    let sc = cfg.scenario()?;
    let wave = scenario_wave(&cfg)?;
    let report = run_sweep(&sc, &cfg.eps_list(), &cfg.sweep.fractions, &wave, &[])?;
    let dir = out_dir(c)?;
    report.write_csv(create(&dir.join("convergence.csv"))?)?;
    report.write_summary_csv(create(&dir.join("slopes.csv"))?)?;
    for (t, s) in &report.thickness_slopes {
        println!("t = {t:.4}  thickness slope = {s:.4}");
    }
    for (t, s) in &report.hausdorff_slopes {
        println!("t = {t:.4}  hausdorff slope = {s:.4}");
    }
    Ok(true)
}

/// Collects named results and writes them as `checks.csv`.
struct Ledger {
    rows: Vec<(String, bool, String)>,
}

impl Ledger {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        let (name, detail) = (name.into(), detail.into());
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.rows.push((name, pass, detail));
    }

    fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.1)
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["check", "pass", "detail"])?;
        for (n, p, d) in &self.rows {
            w.write_record([n.as_str(), if *p { "pass" } else { "fail" }, d.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sandwich_holds(records: &[SandwichRecord]) -> (bool, f64) {
    let worst = records
        .iter()
        .map(|r| r.below.max(r.above))
        .fold(f64::NEG_INFINITY, f64::max);
    (records.iter().all(SandwichRecord::holds), worst)
}

fn write_sandwich(path: &Path, records: &[(f64, SandwichRecord)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["eps", "t", "below", "above"])?;
    for (eps, r) in records {
        w.write_record(&[eps.to_string(), r.t.to_string(), r.below.to_string(), r.above.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn verify_ode(cfg: &RunConfig, dir: &Path, ledger: &mut Ledger) -> Result<()> {
    let r = check_ode_lattice(&cfg.verify.ode_lattice())?;
    r.write_csv(create(&dir.join("ode.csv"))?)?;
    for (name, ok) in r.checks() {
        ledger.push(format!("ode.{name}"), ok, format!("{} lattice points", r.rows.len()));
    }
    Ok(())
}

fn verify_wave(cfg: &RunConfig, dir: &Path, ledger: &mut Ledger) -> Result<WaveProfile> {
    let r = check_wave(cfg.params.m, cfg.verify.wave_tol)?;
    r.profile.write_csv(create(&dir.join("wave.csv"))?)?;
    let detail = format!(
        "c* = {:.6}, beta = {:.5} / {:.5}, edge C = {:.4}, |U'(-1e-3)| = {:.4}",
        r.c_star, r.beta, r.beta_refined, r.edge_constant, r.sharpness
    );
    for (name, ok) in r.checks() {
        ledger.push(format!("wave.{name}"), ok, detail.clone());
    }
    Ok(r.profile)
}

fn verify_flow(cfg: &RunConfig, sc: &Scenario, ledger: &mut Ledger) -> Result<()> {
    let t_max = sc.params.t_final.max(0.1);
    let r = check_flow(&sc.flow()?, &sc.params.domain, t_max, cfg.verify.flow_samples, cfg.seed)?;
    let detail = format!(
        "round trip {:.2e}, group {:.2e}, identity {:.2e}, min det {:.4}",
        r.round_trip, r.group, r.identity, r.min_determinant
    );
    for (name, ok) in r.checks() {
        ledger.push(format!("flow.{name}"), ok, detail.clone());
    }
    Ok(())
}

fn verify_generation(cfg: &RunConfig, sc: &Scenario, dir: &Path, ledger: &mut Ledger) -> Result<Vec<Option<f64>>> {
    let mut sand = Vec::new();
    let mut witnesses = Vec::new();
    let mut w = csv::Writer::from_writer(create(&dir.join("generation.csv"))?);
    w.write_record(["eps", "t_gen", "m0", "max_u", "cond_i", "cond_ii", "cond_iii", "c_g", "min_plus", "max_minus"])?;
    for eps in cfg.eps_list() {
        let s = sc.with_epsilon(eps)?;
        let g = check_generation(&s, &cfg.verify.m0)?;
        ledger.push(
            format!("generation.conditions[eps={eps}]"),
            g.passed(),
            format!("M0 = {:?}, max u = {:.6}, conditions {:?}", g.m0, g.max_u, g.conditions),
        );
        witnesses.push(g.m0);
        let r = match check_generation_residuals(&s, &cfg.verify.c_g, cfg.verify.samples, cfg.seed, cfg.verify.tol) {
            Ok(r) => r,
            Err(e @ Error::PerturbationTooLarge { .. }) => {
                ledger.push(format!("generation.comparators[eps={eps}]"), false, e.to_string());
                continue;
            }
            Err(e) => return Err(e),
        };
        ledger.push(
            format!("generation.residual_signs[eps={eps}]"),
            r.passed(),
            format!("C_G = {:?}, min L[w+] = {:.3e}, max L[w-] = {:.3e}", r.c_g, r.min_plus, r.max_minus),
        );
        if let Some(c_g) = r.c_g {
            let gc = GenComparators::new(&s.params, &s, c_g, g.m0.unwrap_or(f64::NAN))?;
            let recs = check_generation_sandwich(&s, &gc, cfg.verify.sandwich_times)?;
            let (ok, worst) = sandwich_holds(&recs);
            ledger.push(format!("generation.sandwich[eps={eps}]"), ok, format!("worst excess {worst:.3e}"));
            sand.extend(recs.into_iter().map(|r| (eps, r)));
        }
        w.write_record(&[
            eps.to_string(),
            g.t_gen.to_string(),
            g.m0.map_or("NaN".into(), |v| v.to_string()),
            g.max_u.to_string(),
            g.conditions[0].to_string(),
            g.conditions[1].to_string(),
            g.conditions[2].to_string(),
            r.c_g.map_or("NaN".into(), |v| v.to_string()),
            r.min_plus.to_string(),
            r.max_minus.to_string(),
        ])?;
    }
    w.flush()?;
    write_sandwich(&dir.join("generation_sandwich.csv"), &sand)?;
    Ok(witnesses)
}

/// Witness of the propagation checks at one ε.
#[derive(Debug, Clone, Copy)]
struct PropWitness {
    pc: Option<PropComparators>,
}

fn verify_propagation(
    cfg: &RunConfig,
    sc: &Scenario,
    wave: &WaveProfile,
    dir: &Path,
    ledger: &mut Ledger,
    ordering_only: bool,
) -> Result<Vec<PropWitness>> {
    let mut out = Vec::new();
    let mut sand = Vec::new();
    for eps in cfg.eps_list() {
        let s = sc.with_epsilon(eps)?;
        let params = s.params;
        let t_gen = params.generation_time();
        let grid = s.build_grid()?;
        let (front, d0) = if params.domain.dim == 1 {
            let table = front_table_1d(&s, wave.c_star)?;
            let d0 = table.d0;
            (table.trajectory(), d0)
        } else {
            (drifted_front(&s, wave)?, s.d0(&grid))
        };
        let d_const = if params.domain.dim == 1 {
            d_constant_1d(d0)
        } else {
            d_constant_grid(&cutoff_distance(&front, 0.0, grid, d0)?.d)
        };
        let s_max = sigma_max(wave.c_star, params.m, d_const, params.eta);
        let lattice = cfg.verify.prop_lattice();
        let (mut sigma, mut l) = (s_max * lattice.sigma_fractions[0], lattice.l[0]);
        if params.domain.dim == 1 && !ordering_only {
            let r = check_propagation_residuals(&s, wave, &lattice, cfg.verify.samples, cfg.seed, cfg.verify.tol)?;
            ledger.push(
                format!("propagation.residual_signs[eps={eps}]"),
                r.passed(),
                format!("witness {:?}, min L[u+] = {:.3e}, max L[u-] = {:.3e}", r.witness, r.min_plus, r.max_minus),
            );
            if let Some(pc) = r.witness.or(r.best) {
                sigma = pc.sigma;
                l = pc.l;
            }
        }
        let n_out = cfg.verify.sandwich_times.max(1);
        let times: Vec<f64> = (0..=n_out)
            .map(|k| t_gen + (params.t_final - t_gen) * k as f64 / n_out as f64)
            .collect();
        let snaps = simulate(&s.initial_state()?, &times)?;
        let at_gen = snaps
            .iter()
            .find(|x| (x.t - t_gen).abs() <= 1e-12)
            .ok_or_else(|| Error::Domain("missing snapshot at the generation time".into()))?;
        let pc = PropComparators { sigma, k: 1.0, l };
        let o = check_ordering(at_gen, &front, wave, &pc, d0, &cfg.verify.k)?;
        ledger.push(
            format!("propagation.ordering[eps={eps}]"),
            o.passed(),
            format!("K = {:?}, below {:.3e}, above {:.3e}", o.k, o.below, o.above),
        );
        let mut witness = o.k.map(|k| PropComparators { k, ..pc });
        if let (Some(pk), false) = (witness, ordering_only) {
            if params.domain.dim == 1 {
                let fixed_k = PropLattice {
                    sigma_fractions: vec![pk.sigma / s_max],
                    l: lattice.l.clone(),
                    k: vec![pk.k],
                };
                let r = check_propagation_residuals(&s, wave, &fixed_k, cfg.verify.samples, cfg.seed, cfg.verify.tol)?;
                ledger.push(
                    format!("propagation.residual_signs_at_ordering_K[eps={eps}]"),
                    r.passed(),
                    format!("witness {:?}, min L[u+] = {:.3e}, max L[u-] = {:.3e}", r.witness, r.min_plus, r.max_minus),
                );
                if let Some(w) = r.witness {
                    witness = Some(w);
                }
            }
        }
        if params.domain.dim == 2 && !ordering_only {
            println!("SKIP propagation.sandwich[eps={eps}]: the residual witness search is one-dimensional");
        } else if let (Some(pk), false) = (witness, ordering_only) {
            let recs = check_propagation_sandwich(&snaps, &front, wave, &pk, d0)?;
            let (ok, worst) = sandwich_holds(&recs);
            ledger.push(format!("propagation.sandwich[eps={eps}]"), ok, format!("worst excess {worst:.3e}"));
            sand.extend(recs.into_iter().map(|r| (eps, r)));
        }
        out.push(PropWitness { pc: witness });
    }
    if !ordering_only {
        write_sandwich(&dir.join("propagation_sandwich.csv"), &sand)?;
    }
    Ok(out)
}

fn verify_structure(cfg: &RunConfig, sc: &Scenario, wave: &WaveProfile, ledger: &mut Ledger) -> Result<()> {
    let dim = sc.params.domain.dim;
    let n = cfg.verify.comparison_cells;
    let cells = if dim == 1 { vec![n] } else { vec![n, n] };
    let grid = crate::model::Grid::new(&sc.params.domain, &cells)?;
    let r = check_comparison(&sc.params, &sc.chemo, grid, cfg.verify.pairs, cfg.verify.steps, cfg.seed)?;
    ledger.push(
        "structure.comparison",
        r.passed(),
        format!("{} pairs x {} steps, max violation {:.3e}", r.pairs, r.steps, r.max_violation),
    );
    let drift = check_mass_conservation(&sc.initial_state()?, cfg.verify.steps)?;
    ledger.push(
        "structure.mass_without_reaction",
        drift <= 1e-8,
        format!("relative drift {drift:.3e} over {} steps", cfg.verify.steps),
    );
    let f = compare_front_solvers(sc, wave.c_star)?;
    ledger.push(
        "fronts.solver_agreement",
        f.passed(),
        format!("markers vs {}: {:.3e} (3h = {:.3e})", f.reference, f.hausdorff, 3.0 * f.h),
    );
    if sc.chemo.is_zero() && matches!(sc.initial.support, crate::model::SupportShape::Disk { .. }) {
        let c = circle_benchmark(sc, wave.c_star)?;
        ledger.push(
            "fronts.circle",
            c.passed(),
            format!("marker error {:.3e}, level-set error {:.3e} (2h = {:.3e})", c.marker_error, c.levelset_error, 2.0 * c.h),
        );
    }
    Ok(())
}

fn cmd_verify(check: Check, c: &Common) -> Result<bool> {
    let cfg = load_config(c)?;
    let dir = out_dir(c)?;
    let mut ledger = Ledger::new();
    match check {
        Check::Ode => verify_ode(&cfg, &dir, &mut ledger)?,
        Check::Wave => {
            verify_wave(&cfg, &dir, &mut ledger)?;
        }
        Check::Flow => verify_flow(&cfg, &cfg.scenario()?, &mut ledger)?,
        Check::Generation => {
            verify_generation(&cfg, &cfg.scenario()?, &dir, &mut ledger)?;
        }
        Check::Propagation | Check::Ordering => {
            let wave = scenario_wave(&cfg)?;
            verify_propagation(&cfg, &cfg.scenario()?, &wave, &dir, &mut ledger, check == Check::Ordering)?;
        }
        Check::All => {
            let sc = cfg.scenario()?;
            verify_ode(&cfg, &dir, &mut ledger)?;
            let wave = verify_wave(&cfg, &dir, &mut ledger)?;
            verify_flow(&cfg, &sc, &mut ledger)?;
            let m0 = verify_generation(&cfg, &sc, &dir, &mut ledger)?;
            let prop = verify_propagation(&cfg, &sc, &wave, &dir, &mut ledger, false)?;
            verify_structure(&cfg, &sc, &wave, &mut ledger)?;
            let eps = cfg.eps_list();
            if eps.len() >= 3 {
                let witnesses: Vec<Witnesses> = m0
                    .iter()
                    .zip(&prop)
                    .map(|(m0, p)| Witnesses {
                        m0: *m0,
                        sigma: p.pc.map(|x| x.sigma),
                        k: p.pc.map(|x| x.k),
                        l: p.pc.map(|x| x.l),
                    })
                    .collect();
                let report = run_sweep(&sc, &eps, &cfg.sweep.fractions, &wave, &witnesses)?;
                report.write_csv(create(&dir.join("convergence.csv"))?)?;
                report.write_summary_csv(create(&dir.join("slopes.csv"))?)?;
                let t = sc.params.t_final;
                let th = report.thickness_slope(t).unwrap_or(f64::NAN);
                ledger.push("sweep.thickness_slope", (0.8..=1.2).contains(&th), format!("{th:.4} at t = {t}"));
                let hd = report.hausdorff_slope(t).unwrap_or(f64::NAN);
                ledger.push("sweep.hausdorff_slope", hd >= 0.8, format!("{hd:.4} at t = {t}"));
                for b in &report.bounds {
                    ledger.push(
                        format!("structure.literal_bound[eps={}]", b.eps),
                        b.literal_holds(),
                        format!("max u = {:.6}, bound {}, running bound {:.6}", b.max_seen, b.literal, b.running),
                    );
                }
            }
        }
    }
    ledger.write(&dir.join("checks.csv"))?;
    Ok(ledger.passed())
}
