//! Command-line entry point: theory tables, single runs, epsilon sweeps,
//! Huygens checks, and a built-in invariant suite.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wavelife::config::Config;
use wavelife::fd_solver::{discrete_energy, fd_solve};
use wavelife::linear_kernel::{duhamel_point, free_solution, huygens_residual};
use wavelife::model::{classify, Field, Grid, InitialData, Monomial, Profile};
use wavelife::norms::{norm_report, positivity_identity_check};
use wavelife::rational::Rational;
use wavelife::solver::{registry, solver_by_name};
use wavelife::sweep::{run_sweep, write_outputs, Verdict};
use wavelife::theory::{combined_exponent, improvement_margin, predict, Regime};

#[derive(Parser)]
#[command(
    name = "wavelife",
    about = "Lifespan laboratory for 1D nonlinear waves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// output directory (fallback: WAVELIFE_OUT, then current directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// cap on sweep parallelism (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// dump every k-th time row of a simulate run as CSV
    #[arg(long, global = true)]
    snapshot_stride: Option<usize>,
    /// reserved; the pipeline is deterministic and uses no randomness
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exponent table, prediction, and improvement margin
    Theory { spec: PathBuf },
    /// One solver run with an optional snapshot dump and norm report
    Simulate { config: PathBuf },
    /// Full epsilon sweep with slope fit and verdict
    Sweep { config: PathBuf },
    /// Huygens residual of the free solution on the interior cone
    Huygens { config: PathBuf },
    /// Run the built-in invariant suite
    Verify,
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("WAVELIFE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Theory { spec } => cmd_theory(spec),
        Command::Simulate { config } => cmd_simulate(config, &out_dir(&cli), cli.snapshot_stride),
        Command::Sweep { config } => cmd_sweep(config, &out_dir(&cli)),
        Command::Huygens { config } => cmd_huygens(config),
        Command::Verify => cmd_verify(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

type CmdResult = Result<u8, Box<dyn std::error::Error>>;

fn regime_name(regime: &Regime) -> &'static str {
    match regime {
        Regime::General => "General",
        Regime::ZeroMean => "ZeroMean",
        Regime::VanishingOrders => "VanishingOrders",
        Regime::CombinedImproved => "CombinedImproved",
    }
}

fn cmd_theory(path: &Path) -> CmdResult {
    let config = Config::load(path)?;
    let spec = config.to_spec()?;
    let alpha = spec.alpha as i64;
    let beta0 = spec.beta0.map(|b| b as i64);
    let zero_mean = match config.to_data() {
        Ok(data) => data.g_zero_mean(),
        Err(_) => false,
    };
    println!("nonlinearity: {}", config.summary());
    println!(
        "alpha = {alpha}, beta0 = {}, zero-mean g: {zero_mean}",
        beta0.map_or("-".to_string(), |b| b.to_string())
    );
    println!("exponent table:");
    let half_alpha = Rational::new(alpha, 2)?;
    println!("  general                    alpha/2 = {half_alpha}");
    let zm = Rational::new(alpha * (alpha + 1), alpha + 2)?;
    println!("  zero-mean g                alpha(alpha+1)/(alpha+2) = {zm}");
    if let Some(b0) = beta0 {
        let vanishing = Rational::new(b0, 2)?.min(Rational::from_int(alpha));
        println!("  vanishing orders           min{{beta0/2, alpha}} = {vanishing}");
        let improved = Rational::new((alpha + 1) * b0, b0 + 2)?;
        println!("  combined improved          (alpha+1)beta0/(beta0+2) = {improved}");
        let margin = improvement_margin(alpha, b0)?;
        println!("improvement margin: {margin}");
    }
    let prediction = predict(alpha, beta0, zero_mean)?;
    println!(
        "prediction: T(eps) >~ eps^-({}) [{}]",
        prediction.exponent,
        regime_name(&prediction.regime)
    );
    for cond in &prediction.conditions_used {
        println!("  uses: {cond}");
    }
    Ok(0)
}

fn write_snapshots(field: &Field, stride: usize, dir: &Path) -> std::io::Result<()> {
    use std::io::Write as _;
    std::fs::create_dir_all(dir)?;
    let mut out = std::fs::File::create(dir.join("snapshots.csv"))?;
    writeln!(out, "t,x,u")?;
    let grid = field.grid;
    for i in (0..=field.valid_up_to).step_by(stride.max(1)) {
        for j in 0..grid.nx {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e}",
                grid.t(i),
                grid.x(j),
                field.at(i, j)
            )?;
        }
    }
    Ok(())
}

fn cmd_simulate(path: &Path, out: &Path, snapshot_stride: Option<usize>) -> CmdResult {
    let config = Config::load(path)?;
    let spec = config.to_spec()?;
    let data = config.to_data()?;
    let grid = config.to_grid()?;
    let eps = config.eps.unwrap_or(0.5);
    let solver_name = config.solver.as_deref().unwrap_or("leapfrog");
    let solver = solver_by_name(solver_name).ok_or_else(|| {
        let names: Vec<&str> = registry().iter().map(|s| s.name()).collect();
        format!(
            "unknown solver {solver_name:?}; available: {}",
            names.join(", ")
        )
    })?;
    println!("nonlinearity: {}", config.summary());
    println!(
        "solver {}, eps = {eps}, dx = {}, dt = {}, t_max = {}",
        solver.name(),
        grid.dx,
        grid.dt,
        grid.t_max
    );
    let solution = solver.solve(&spec, &data, eps, grid)?;
    match solution.blowup_time {
        Some(t) if t.is_finite() => println!("threshold exit at t = {t:.6}"),
        Some(_) => println!("run left the convergence region before t_max"),
        None => println!(
            "no blow-up through t_max; sup |u| = {:.6e}",
            solution.field.sup_norm()
        ),
    }
    if let Some(b0) = spec.beta0 {
        if solution.blowup_time.is_none() {
            let report = norm_report(
                &solution.field,
                spec.alpha as i64,
                b0 as i64,
                data.support_radius,
                grid.t_max,
                1,
            )?;
            println!(
                "norms: |u|_1 = {:.6e} (symmetrized {:.6e}), |u|_2 = {:.6e}, D_ST = {:.6e}",
                report.norm1, report.norm1_symmetrized, report.norm2, report.d_st
            );
            println!(
                "weight p = {}, R(E,T) = {:.6e}",
                report.p_weight, report.r_et
            );
        }
    }
    if let Some(stride) = snapshot_stride {
        write_snapshots(&solution.field, stride, out)?;
        println!(
            "snapshots written to {}",
            out.join("snapshots.csv").display()
        );
    }
    Ok(0)
}

fn cmd_sweep(path: &Path, out: &Path) -> CmdResult {
    let config = Config::load(path)?;
    let spec = config.to_spec()?;
    let data = config.to_data()?;
    let sweep_config = config.to_sweep_config()?;
    let zero_mean = data.g_zero_mean();
    let prediction = predict(spec.alpha as i64, spec.beta0.map(|b| b as i64), zero_mean)?;
    println!("nonlinearity: {}", config.summary());
    println!(
        "predicted exponent {} [{}], sweeping {} eps values from {}",
        prediction.exponent,
        regime_name(&prediction.regime),
        sweep_config.n_points,
        sweep_config.eps_max
    );
    let result = run_sweep(
        &spec,
        &data,
        &config.summary(),
        prediction.exponent,
        &sweep_config,
    )?;
    for record in &result.records {
        println!(
            "  eps {:.4}: T = {:.4} (spread {:.2e}, trusted {}, censored {})",
            record.eps, record.extrapolated_t, record.rel_spread, record.trusted, record.censored
        );
    }
    println!(
        "fitted slope {:.4} +- {:.4}, r^2 = {:.5}, predicted {} -> {:?}",
        result.fitted_slope,
        result.slope_stderr,
        result.r_squared,
        result.predicted_exponent,
        result.verdict
    );
    write_outputs(&result, out)?;
    println!("results written to {}", out.display());
    Ok(match result.verdict {
        Verdict::Inconsistent => 2,
        _ => 0,
    })
}

fn cmd_huygens(path: &Path) -> CmdResult {
    let config = Config::load(path)?;
    let data = config.to_data()?;
    let grid = config.to_grid()?;
    let residual = huygens_residual(&data, grid)?;
    let pass = residual <= 1e-10;
    println!(
        "max |u0| over the interior cone to t = {}: {residual:.3e} ({})",
        grid.t_max,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("  [{}] {name}: {detail}", if ok { "ok" } else { "FAIL" });
    ok
}

fn cmd_verify() -> CmdResult {
    println!("invariant suite:");
    let mut all = true;

    // Duhamel closed forms: L(1) = t^2/2, L(s) = t^3/6
    {
        let grid = Grid::cover(0.02, 0.5, 2.0, 1.0);
        let ones = Field::from_fn(grid, |_, _| 1.0);
        let ramp = Field::from_fn(grid, |_, t| t);
        let t = 1.5;
        let e1 = (duhamel_point(&ones, 0.3, t)? - t * t / 2.0).abs();
        let e2 = (duhamel_point(&ramp, 0.3, t)? - t * t * t / 6.0).abs();
        // trapezoid in s is exact for L(1) and O(dt^2) for L(s)
        all &= check(
            "duhamel closed forms",
            e1 < 1e-10 && e2 < 1e-4,
            format!("|L(1)-t^2/2| = {e1:.2e}, |L(s)-t^3/6| = {e2:.2e}"),
        );
    }

    let cubic = classify(
        &[Monomial {
            coeff: 1.0,
            a: 2,
            b: 1,
            d: 0,
            abs_u: false,
            abs_ut: false,
            abs_ux: false,
        }],
        &[],
        &[],
    )?;
    let data = InitialData::new(
        Profile::Bump { amplitude: 1.0 },
        Profile::BumpDerivative { amplitude: 1.0 },
        2.0,
    );

    // linear energy conservation over t = 20
    {
        let mut linear = cubic.clone();
        linear.f_terms.clear();
        let grid = Grid::cover(0.05, 0.5, 20.0, 2.0);
        let outcome = fd_solve(&linear, &data, 0.5, grid, 1e6)?;
        let e0 = discrete_energy(&outcome.field, 0);
        let mut drift = 0.0f64;
        for i in 1..grid.nt - 1 {
            drift = drift.max((discrete_energy(&outcome.field, i) - e0).abs() / e0);
        }
        all &= check(
            "linear energy conservation",
            drift < 1e-6,
            format!("relative drift {drift:.2e} over t = 20"),
        );
    }

    // convergence order of the stencil against the exact free solution
    {
        let mut linear = cubic.clone();
        linear.f_terms.clear();
        let mut errs = Vec::new();
        for dx in [0.02, 0.01] {
            let grid = Grid::cover(dx, 0.5, 2.0, 2.0);
            let outcome = fd_solve(&linear, &data, 0.5, grid, 1e6)?;
            let i = grid.nt - 1;
            let t = grid.t(i);
            let mut err = 0.0f64;
            for j in 0..grid.nx {
                let exact = free_solution(&data, 0.5, grid.x(j), t);
                err = err.max((outcome.field.at(i, j) - exact).abs());
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[1]).log2();
        all &= check(
            "convergence order",
            (1.8..=2.2).contains(&order),
            format!("observed order {order:.3}"),
        );
    }

    // positivity identity over the admissible range
    {
        let mut ok = true;
        for alpha in 2..=12i64 {
            for beta0 in (alpha + 1)..(2 * alpha) {
                ok &= positivity_identity_check(alpha, beta0).is_ok();
            }
        }
        all &= check(
            "positivity identity",
            ok,
            "exact over 2 <= alpha <= 12, alpha+1 <= beta0 < 2 alpha".to_string(),
        );
    }

    // combined-effect exponent consistent with the improved prediction
    {
        let mut ok = true;
        for p in 2..=8i64 {
            for q in 1..=4i64 {
                let alpha = p + q - 1;
                for r in (alpha + 2)..(2 * alpha + 1) {
                    if !(r + 1 < 2 * (p + q)) {
                        continue;
                    }
                    let beta0 = r - 1;
                    let from_pqr = combined_exponent(p, q, r)?;
                    let from_orders = predict(alpha, Some(beta0), true)?.exponent;
                    ok &= from_pqr == from_orders;
                }
            }
        }
        all &= check(
            "combined/new-result consistency",
            ok,
            "(p+q)(r-1)/(r+1) vs (alpha+1)beta0/(beta0+2)".to_string(),
        );
    }

    println!(
        "verdict: {}",
        if all { "all checks passed" } else { "FAILURES" }
    );
    Ok(if all { 0 } else { 1 })
}
