use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gbenney::experiments::{
    conservation_drift, epsilon_sweep, nls_conservation_drift, rate_fit, wave_convergence_table,
    Drift,
};
use gbenney::initial_data::nls_wave;
use gbenney::integrators::{evolve_gbenney_with, evolve_nls_with};
use gbenney::io::config::{InitialKind, ModelKind};
use gbenney::io::csv::{format_table, format_wave_csv};
use gbenney::io::{
    emit_plot, load_config, read_column, sweep_fits, write_snapshot, write_sweep_outputs, PlotSpec,
    RunConfig, Series, Snapshot,
};
use gbenney::models::{energy_g, energy_nls, mass, zr_from_diagonal, zr_invariants, ZrParams};
use gbenney::norms::lq_norm;
use gbenney::spectral::{antiderivative_zero_mean, derivative_real, ComplexField, RealField};
use gbenney::Error;

/// Simulation laboratory for generalized Benney systems and their NLS limit.
#[derive(Parser, Debug)]
#[command(name = "gbenney", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One run at `model.epsilon`: snapshots and a conservation log.
    Simulate {
        /// TOML run configuration.
        config: PathBuf,
        /// Output directory (default: `output.directory` of the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ε-sweep: result table, rate fits and charts.
    Sweep {
        config: PathBuf,
        /// Output directory (default: `output.directory` of the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between the ε-waves and their NLS limit.
    Waves {
        config: PathBuf,
        /// Output directory (default: `output.directory` of the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conservation and kernel property checks on the configured data.
    Check { config: PathBuf },
    /// Log-log rate fit of one column of an existing table.
    Rate {
        /// Table with an `epsilon` column.
        csv: PathBuf,
        /// Column to fit against ε.
        #[arg(long)]
        column: String,
    },
}

/// Exit status and message of a failed command.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_validation() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Sweep { config, out } => sweep(&config, out),
        Command::Waves { config, out } => waves(&config, out),
        Command::Check { config } => check(&config),
        Command::Rate { csv, column } => rate(&csv, &column),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn output_dir(cfg: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = out.unwrap_or_else(|| cfg.output.directory.clone());
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

/// Initial `u` of an NLS-kind run.
fn nls_initial(cfg: &RunConfig) -> Result<ComplexField, Error> {
    let grid = cfg.grid()?;
    match cfg.initial_kind() {
        InitialKind::Wave => nls_wave(&cfg.wave_spec()?, &cfg.wave_coupling(), &grid, 0.0),
        _ => cfg.initial_u(&grid),
    }
}

fn simulate(path: &Path, out: Option<PathBuf>) -> Outcome {
    let cfg = load_config(path)?;
    let dir = output_dir(&cfg, out)?;
    let step = cfg.step()?;
    let (t_end, save_every) = (cfg.time.t_end, cfg.time.save_every);
    // (t, mass, energy)
    let mut log: Vec<Vec<f64>> = Vec::new();
    let mut index = 0usize;
    let mut save = |snap: Snapshot| -> Result<(), Error> {
        write_snapshot(&snap, &dir.join(format!("snapshot_{index:05}.gbny")))?;
        index += 1;
        Ok(())
    };
    if let Some(nls) = cfg.nls() {
        let u0 = nls_initial(&cfg)?;
        evolve_nls_with(&u0, &nls, t_end, &step, save_every, |t, u| {
            log.push(vec![t, mass(u), energy_nls(u, nls.gamma)]);
            save(Snapshot::from_nls(u, t))
        })?;
    } else {
        let eps = cfg
            .epsilon()
            .unwrap_or(gbenney::io::config::DEFAULT_EPSILON);
        let sweep = cfg.sweep_config_with(vec![eps])?;
        let p = sweep.params_for(eps)?;
        let (state, _) = sweep.initial(&p)?;
        evolve_gbenney_with(&state, &p, t_end, &step, save_every, |s| {
            log.push(vec![s.t, mass(&s.u), energy_g(s, &p)?]);
            save(Snapshot::from_state(s, eps))
        })?;
    }
    write_text(
        &dir.join("conservation.csv"),
        &format_table(&["t", "mass", "energy"], &log),
    )?;

    let (m0, e0) = (log[0][1], log[0][2]);
    let last = &log[log.len() - 1];
    let drift = |x: f64, x0: f64| {
        if x0 == 0.0 {
            (x - x0).abs()
        } else {
            ((x - x0) / x0).abs()
        }
    };
    if cfg.output.emit_svg {
        let series = |k: usize, x0: f64, label: &str| {
            Series::new(label, log.iter().map(|r| (r[0], r[k] - x0)).collect())
        };
        let spec = PlotSpec {
            title: "conservation".into(),
            x_label: "t".into(),
            y_label: "change since t = 0".into(),
            ..PlotSpec::default()
        };
        emit_plot(
            &[series(1, m0, "mass"), series(2, e0, "energy")],
            &spec,
            &dir.join("conservation.svg"),
        )?;
    }
    println!(
        "{} snapshots in {}; t = {}; relative mass change {:.3e}; relative energy change {:.3e}",
        log.len(),
        dir.display(),
        last[0],
        drift(last[1], m0),
        drift(last[2], e0)
    );
    Ok(())
}

fn sweep(path: &Path, out: Option<PathBuf>) -> Outcome {
    let cfg = load_config(path)?;
    let dir = output_dir(&cfg, out)?;
    let result = epsilon_sweep(&cfg.sweep_config()?)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if result.rows.iter().all(|r| r.outcome.is_err()) {
        return Err(Failure::runtime("every run of the sweep failed"));
    }
    let written = write_sweep_outputs(&result, &dir, cfg.output.emit_svg)?;
    for (name, fit) in sweep_fits(&result) {
        match fit {
            Ok(f) => println!("{name}: slope {:.3} (r² {:.4})", f.slope, f.r_squared),
            Err(e) => println!("{name}: no fit ({e})"),
        }
    }
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(())
}

fn waves(path: &Path, out: Option<PathBuf>) -> Outcome {
    let cfg = load_config(path)?;
    if !matches!(cfg.model.kind, ModelKind::Benney | ModelKind::GBenney)
        || cfg.model.alpha_z.is_some()
    {
        return Err(Failure::validation(
            "waves needs a single-channel benney or gbenney model",
        ));
    }
    if cfg.initial_kind() != InitialKind::Wave {
        return Err(Failure::validation("waves needs initial.kind = \"wave\""));
    }
    let dir = output_dir(&cfg, out)?;
    let grid = cfg.grid()?;
    let rows = wave_convergence_table(
        &cfg.wave_spec()?,
        &cfg.wave_coupling(),
        &cfg.epsilon_list(),
        &grid,
    );
    write_text(&dir.join("waves.csv"), &format_wave_csv(&rows))?;
    let ok: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| r.values.as_ref().ok().map(|&(a, n)| (r.epsilon, a, n)))
        .collect();
    let mut table = String::from("epsilon        analytic       numeric        |difference|\n");
    for r in &rows {
        match &r.values {
            Ok((a, n)) => {
                let _ = writeln!(
                    table,
                    "{:<14.6e} {a:<14.6e} {n:<14.6e} {:.3e}",
                    r.epsilon,
                    (a - n).abs()
                );
            }
            Err(e) => {
                let _ = writeln!(table, "{:<14.6e} failed: {e}", r.epsilon);
            }
        }
    }
    print!("{table}");
    if let Ok(f) = rate_fit(&ok.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>()) {
        println!("analytic slope {:.3} (r² {:.4})", f.slope, f.r_squared);
    }
    if cfg.output.emit_svg {
        emit_plot(
            &[
                Series::new("analytic", ok.iter().map(|r| (r.0, r.1)).collect()),
                Series::new("numeric", ok.iter().map(|r| (r.0, r.2)).collect()),
            ],
            &PlotSpec::rate("wave distance to the NLS limit", "L2 distance"),
            &dir.join("waves.svg"),
        )?;
    }
    if ok.is_empty() {
        return Err(Failure::runtime("no row of the wave table could be built"));
    }
    Ok(())
}

/// Tolerances of `check`.
const PARSEVAL_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-10;
const MASS_TOL: f64 = 1e-10;
const HALVING_RATIO: f64 = 3.5;
/// Energy drift below this is roundoff and has no measurable order.
const ENERGY_FLOOR: f64 = 1e-12;
const ZR_TOL: f64 = 1e-12;

fn check(path: &Path) -> Outcome {
    let cfg = load_config(path)?;
    let step = cfg.step()?;
    let half = step.with_h(0.5 * step.h)?;
    let t_end = cfg.time.t_end;
    let mut results: Vec<(bool, String)> = Vec::new();

    let (u0, drift_h, drift_half, zr): (ComplexField, Drift, Drift, Option<(f64, f64)>) =
        if let Some(nls) = cfg.nls() {
            let u0 = nls_initial(&cfg)?;
            let a = nls_conservation_drift(&u0, &nls, t_end, &step)?;
            let b = nls_conservation_drift(&u0, &nls, t_end, &half)?;
            (u0, a, b, None)
        } else {
            let eps = cfg
                .epsilon()
                .unwrap_or(gbenney::io::config::DEFAULT_EPSILON);
            let sweep = cfg.sweep_config_with(vec![eps])?;
            let p = sweep.params_for(eps)?;
            let (state, _) = sweep.initial(&p)?;
            let a = conservation_drift(&state, &p, t_end, &step)?;
            let b = conservation_drift(&state, &p, t_end, &half)?;
            let zr = match (cfg.model.kind, &state.z) {
                (ModelKind::Zr, Some(z)) => {
                    let m = &cfg.model;
                    let zp = ZrParams {
                        a: m.a.unwrap_or_default(),
                        b: m.b.unwrap_or_default(),
                        c: m.c.unwrap_or_default(),
                        k: m.k.unwrap_or(1.0),
                        epsilon: eps,
                        cubic: m.cubic.unwrap_or_default(),
                    };
                    let (rho, phi) = zr_from_diagonal(&state.v, z, zp.b)?;
                    let (_, i2, i3, i4) = zr_invariants(&state.u, &rho, &phi, &zp)?;
                    Some((i4, i2 + zp.b / (2.0 * eps) * i3))
                }
                _ => None,
            };
            (state.u, a, b, zr)
        };

    let grid = u0.grid().clone();
    let norm2 = lq_norm(&u0, 2.0)?.powi(2);
    let coeffs = u0.to_spectral();
    let spectral2 = grid.length() * coeffs.values().iter().map(|c| c.norm_sqr()).sum::<f64>();
    let parseval = (norm2 - spectral2).abs() / norm2.max(f64::MIN_POSITIVE);
    results.push((
        parseval <= PARSEVAL_TOL,
        format!("parseval: relative gap {parseval:.3e}"),
    ));

    // ∂ₓ∘∂ₓ⁻¹ is the identity on fields with neither mean nor Nyquist content.
    let density = u0.modulus_squared();
    let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mean = density.mean();
    let nyq = density
        .values()
        .iter()
        .enumerate()
        .map(|(j, x)| sign(j) * x)
        .sum::<f64>()
        / grid.n() as f64;
    let f = RealField::new(
        grid.clone(),
        density
            .values()
            .iter()
            .enumerate()
            .map(|(j, x)| x - mean - nyq * sign(j))
            .collect(),
    )?;
    let back = derivative_real(&antiderivative_zero_mean(&f)?);
    let diff = back.combine(1.0, &f, -1.0)?;
    let round = lq_norm(&diff, 2.0)? / lq_norm(&f, 2.0)?.max(f64::MIN_POSITIVE);
    results.push((
        round <= ROUND_TRIP_TOL,
        format!("antiderivative round trip: relative error {round:.3e}"),
    ));

    let steps = (t_end / step.h).round();
    results.push((
        drift_h.mass <= MASS_TOL,
        format!("mass drift over {steps} steps: {:.3e}", drift_h.mass),
    ));
    let energy = if drift_h.energy < ENERGY_FLOOR {
        (
            true,
            format!("energy drift {:.3e} is at roundoff", drift_h.energy),
        )
    } else {
        let ratio = drift_h.energy / drift_half.energy;
        (
            ratio >= HALVING_RATIO,
            format!(
                "energy drift {:.3e} -> {:.3e} under h -> h/2: ratio {ratio:.2}",
                drift_h.energy, drift_half.energy
            ),
        )
    };
    results.push(energy);
    if let Some((i4, sum)) = zr {
        let gap = (i4 - sum).abs() / i4.abs().max(1.0);
        results.push((
            gap <= ZR_TOL,
            format!("ZR identity I4 = I2 + (b/2ε) I3: gap {gap:.3e}"),
        ));
    }

    let failed = results.iter().filter(|r| !r.0).count();
    for (ok, line) in &results {
        println!("{} {line}", if *ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        return Err(Failure::runtime(format!(
            "{failed} of {} checks failed",
            results.len()
        )));
    }
    Ok(())
}

fn rate(csv: &Path, column: &str) -> Outcome {
    let pairs = read_column(csv, column)?;
    let fit = rate_fit(&pairs)?;
    println!("{:.3}", fit.slope);
    eprintln!(
        "{column}: {} points, intercept {:.6}, r² {:.6}",
        pairs.len(),
        fit.intercept,
        fit.r_squared
    );
    Ok(())
}
