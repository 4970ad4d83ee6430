//! The four subcommands. Each returns the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crystal_ground::diagnose::{self, Report, Thresholds};
use crystal_ground::optimize::{initial_psi, minimize_with, IterationRecord};
use crystal_ground::{GroundState, Lattice, MinimizeError, Model, Vec3};
use rayon::prelude::*;

use crate::artifacts::{fields_csv, StateDump, Summary};
use crate::config::{GreenConfig, RunConfig, SweepParameter};
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Thresholds a stored result is judged by. The force balance is not asked
/// of runs with pinned ions.
pub fn thresholds(config: &RunConfig) -> Thresholds {
    Thresholds {
        schrodinger: config.solver.tol_psi,
        force: if config.solver.fix_ions {
            f64::INFINITY
        } else {
            config.solver.tol_force
        },
        ..Thresholds::default()
    }
}

/// Outcome of one minimization: the final state, or `None` when the ions
/// collapsed.
struct Solved {
    model: Model<f64>,
    state: Option<GroundState<f64>>,
}

fn run_solver(config: &RunConfig, verbose: bool) -> Result<Solved, CliError> {
    let lattice = config.lattice()?;
    let ions = config.ions(&lattice)?;
    let model = config.model(&lattice)?;
    let solver = config.solver()?;
    let psi0 = initial_psi(model.basis(), ions.total_charge(), solver.seed, solver.noise)?;
    if verbose {
        eprintln!("{}", IterationRecord::<f64>::HEADER);
    }
    let result = minimize_with(&model, &psi0, &ions, &solver, |rec| {
        if verbose {
            eprintln!("{}", rec.line());
        }
    });
    let state = match result {
        Ok(state) => Some(state),
        Err(MinimizeError::NotConverged(state)) => {
            eprintln!(
                "warning: no convergence after {} iterations (Schrodinger residual {:e}, force residual {:e})",
                state.iterations, state.residuals.schrodinger, state.residuals.force
            );
            Some(*state)
        }
        Err(e @ MinimizeError::IonsCollapsed { .. }) => {
            eprintln!("error: {e}");
            None
        }
        Err(MinimizeError::Model(e)) => return Err(e.into()),
    };
    Ok(Solved { model, state })
}

pub fn solve(config: &RunConfig, out: &Path, verbose: bool) -> Result<i32, CliError> {
    let start = Instant::now();
    let Solved { model, state } = run_solver(config, verbose)?;
    let Some(state) = state else {
        return Ok(EXIT_FAIL);
    };
    let report = diagnose::report(&model, &state, &thresholds(config))?;
    let summary = Summary::new(&model, &state, &report, config, start.elapsed().as_secs_f64());
    create_dir(out)?;
    write(&out.join("summary.toml"), &summary.to_toml())?;
    write(&out.join("state.json"), &StateDump::new(&state, config).to_json())?;
    if config.output.dump_fields {
        let csv = fields_csv(model.basis(), &state.psi, &state.phi, model.params().charge);
        write(&out.join("fields.csv"), &csv)?;
    }
    if config.output.dump_green {
        if let Some(g) = &config.green {
            write(&out.join("green.csv"), &green_table(config, g)?)?;
        }
    }
    if verbose {
        eprintln!(
            "E_r = {:e}, lambda = {:e}, converged = {}",
            state.energy.total, state.lambda, state.converged
        );
    }
    Ok(if state.converged { EXIT_OK } else { EXIT_FAIL })
}

/// Re-verifies a state dump and prints one line per check.
pub fn check(state_path: &Path) -> Result<i32, CliError> {
    let dump = StateDump::load(state_path)?;
    let lattice = dump.config.lattice()?;
    let model = dump.config.model(&lattice)?;
    let state = dump.restore(&model, &lattice)?;
    let report = diagnose::report(&model, &state, &thresholds(&dump.config))?;
    print!("{}", format_report(&report));
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

pub fn format_report(report: &Report) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        writeln!(s, "{verdict} {}: {:e} (threshold {:e})", c.name, c.value, c.threshold).unwrap();
    }
    s
}

/// `G`, `D` and `|∇G|` along the configured segment. `G` and `|∇G|` are
/// written as `inf` on lattice points.
pub fn green_table(config: &RunConfig, g: &GreenConfig) -> Result<String, CliError> {
    if g.samples < 2 {
        return Err(CliError::Config("green: samples must be at least 2".into()));
    }
    let lattice = config.lattice()?;
    let ewald = config.ewald(&lattice)?;
    let (from, to) = segment_ends(&lattice, g);
    let rows: Vec<String> = (0..g.samples)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (g.samples - 1) as f64;
            let x = from + (to - from) * t;
            let green = ewald.green(x).unwrap_or(f64::INFINITY);
            let grad = ewald.green_gradient(x).map_or(f64::INFINITY, |v| v.norm());
            let d = ewald.regularized(x);
            format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t, x[0], x[1], x[2], green, d, grad
            )
        })
        .collect();
    let mut out = String::from("t,x,y,z,G,D,grad_G_norm\n");
    out.extend(rows);
    Ok(out)
}

fn segment_ends(lattice: &Lattice<f64>, g: &GreenConfig) -> (Vec3<f64>, Vec3<f64>) {
    let (a, b) = (Vec3::from_f64(g.from), Vec3::from_f64(g.to));
    if g.fractional {
        (lattice.to_cartesian(a), lattice.to_cartesian(b))
    } else {
        (a, b)
    }
}

pub fn green(config: &RunConfig, out: &Path) -> Result<i32, CliError> {
    let g = config
        .green
        .as_ref()
        .ok_or_else(|| CliError::Config("green: the config has no [green] section".into()))?;
    let table = green_table(config, g)?;
    create_dir(out)?;
    write(&out.join("green.csv"), &table)?;
    Ok(EXIT_OK)
}

/// The run configuration at one sweep point.
pub fn sweep_point(config: &RunConfig, value: f64) -> Result<RunConfig, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: the config has no [sweep] section".into()))?;
    let mut cfg = config.clone();
    match sweep.parameter {
        SweepParameter::Separation => {
            if sweep.ion == 0 || sweep.ion >= cfg.ions.len() {
                return Err(CliError::Config(format!(
                    "sweep: ion index {} must name an ion other than the first",
                    sweep.ion
                )));
            }
            let dir = Vec3::<f64>::from_f64(sweep.direction);
            if !dir.norm().is_finite() || dir.norm() <= 0.0 {
                return Err(CliError::Config("sweep: direction must be nonzero".into()));
            }
            let lattice = cfg.lattice()?;
            let origin = lattice.to_cartesian(Vec3::from_f64(cfg.ions[0].position));
            let x = origin + dir * (value / dir.norm());
            cfg.ions[sweep.ion].position = lattice.to_fractional(x).to_f64();
            cfg.solver.fix_ions = true;
        }
        SweepParameter::LatticeScale => {
            for row in &mut cfg.lattice.vectors {
                for v in row.iter_mut() {
                    *v *= value;
                }
            }
        }
    }
    Ok(cfg)
}

pub const SWEEP_HEADER: &str =
    "parameter,E_r,e1,e2,e3,e4,lambda,res_schrodinger,res_force,res_poisson,res_neutrality\n";

pub fn sweep(config: &RunConfig, out: &Path, verbose: bool) -> Result<i32, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: the config has no [sweep] section".into()))?;
    let points = sweep.points()?;
    let configs = points
        .iter()
        .map(|&v| sweep_point(config, v))
        .collect::<Result<Vec<_>, _>>()?;
    for cfg in &configs {
        let lattice = cfg.lattice()?;
        cfg.ions(&lattice)?;
        cfg.model(&lattice)?;
    }
    let results = configs
        .par_iter()
        .map(|cfg| run_solver(cfg, false).map(|s| s.state))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from(SWEEP_HEADER);
    let mut all_converged = true;
    for (value, state) in points.iter().zip(&results) {
        match state {
            Some(s) => {
                all_converged &= s.converged;
                let (e, r) = (&s.energy, &s.residuals);
                writeln!(
                    csv,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    value, e.total, e.e1, e.e2, e.e3, e.e4, s.lambda, r.schrodinger, r.force, r.poisson, r.neutrality
                )
                .unwrap();
                if verbose {
                    eprintln!("{value:e}: E_r = {:e} after {} iterations", e.total, s.iterations);
                }
            }
            None => {
                all_converged = false;
                writeln!(csv, "{value:.16e}{}", ",NaN".repeat(10)).unwrap();
            }
        }
    }
    create_dir(out)?;
    write(&out.join("sweep.csv"), &csv)?;
    Ok(if all_converged { EXIT_OK } else { EXIT_FAIL })
}
