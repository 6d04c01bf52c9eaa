use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use heatsource::cosine::quadrature::simpson_weights;
use heatsource::cutoff::{reconstruct, theta_of};
use heatsource::experiments::{
    builtin_example_with, load_config, run_table1, summarize, write_field_csv, write_profile_csv,
    write_summary_csv, write_table1_csv, BuiltinExample, ExampleId, RunConfig, Table1Config,
};
use heatsource::forward::SeriesField;
use heatsource::iterative::{run_line, run_neumann, write_trace_csv};
use heatsource::line::{line_forward, FreqFunction, FreqGrid};
use heatsource::noise::{perturb, perturb_freq, NoiseSpec};
use heatsource::params::RuleKind;
use heatsource::{hp_norm, l2_norm, Error, Grid1D, GridFunction, Result};

#[derive(Parser, Debug)]
#[command(
    name = "heatsource",
    version,
    about = "Source recovery for the heat equation from final-time data"
)]
struct Cli {
    /// Flat key = value config; its values override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    example: Option<ExampleId>,
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Final time T.
    #[arg(long = "T", global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    noiselv: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Mode cut-off ϑ.
    #[arg(long, global = true)]
    theta: Option<usize>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Source bound M.
    #[arg(long = "M", global = true)]
    bound: Option<f64>,
    /// Relaxation exponent N.
    #[arg(long = "N", global = true)]
    relaxation: Option<u32>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    rule: Option<RuleKind>,
    #[arg(long, global = true)]
    grid_x_cells: Option<usize>,
    #[arg(long, global = true)]
    grid_t_cells: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Space {
    Line,
    Modes,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the direct problem and write u(x, t) as CSV.
    Forward {
        /// Single output time; all t-grid nodes when absent.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cut-off reconstruction from perturbed final data.
    InvertCutoff,
    /// Relaxed iteration with a-priori or discrepancy stopping.
    InvertIter {
        #[arg(long, value_enum, default_value = "modes")]
        space: Space,
        /// Frequency cut-off for the line variant.
        #[arg(long)]
        theta1: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        n_bins: usize,
    },
    /// Perturb a CSV of (x, value) rows.
    Noise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Seeded batch of cut-off runs over noise levels and cut-offs.
    Table1 {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// Describe a built-in example.
    Example { id: ExampleId },
}

impl Cli {
    fn flags(&self) -> RunConfig {
        RunConfig {
            k: self.k,
            horizon: self.horizon,
            noiselv: self.noiselv,
            seed: self.seed,
            theta: self.theta,
            p: self.p,
            sigma: self.sigma,
            bound: self.bound,
            relaxation: self.relaxation,
            tau: self.tau,
            rule: self.rule,
            example: self.example,
            grid_x_cells: self.grid_x_cells,
            grid_t_cells: self.grid_t_cells,
            out_dir: self.out_dir.clone(),
        }
    }
}

struct Setup {
    cfg: RunConfig,
    example: BuiltinExample,
    grid: Grid1D,
    times: Vec<f64>,
}

fn setup(cfg: RunConfig, id: Option<ExampleId>) -> Result<Setup> {
    let id = id.or(cfg.example).unwrap_or(ExampleId::Ex1);
    let example = builtin_example_with(id, cfg.k.unwrap_or(1.0), cfg.horizon.unwrap_or(1.0))?;
    let grid = Grid1D::unit(cfg.grid_x_cells.unwrap_or(50))?;
    let n_t = cfg.grid_t_cells.unwrap_or(20);
    if n_t == 0 {
        return Err(Error::Config("grid_t_cells must be positive".into()));
    }
    let horizon = example.spec.horizon();
    let times = (1..=n_t).map(|i| horizon * i as f64 / n_t as f64).collect();
    Ok(Setup {
        cfg,
        example,
        grid,
        times,
    })
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn out_file(dir: &Path, name: &str) -> Result<csv::Writer<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn noisy_final_data(s: &Setup) -> Result<(GridFunction, GridFunction, f64)> {
    let field = s.example.field()?;
    let mu_t = field.at(s.example.spec.horizon(), &s.grid)?;
    let spec = NoiseSpec::new(s.cfg.noiselv.unwrap_or(0.01), s.cfg.seed.unwrap_or(1))?;
    let (noisy, delta) = perturb(&mu_t, &spec)?;
    Ok((mu_t, noisy, delta))
}

/// Field errors over the t-grid and, when an output directory is set, the
/// profile and field CSVs.
fn report_fields(s: &Setup, f_recon: &GridFunction, recon: &SeriesField<'_>) -> Result<f64> {
    let f_true = s.example.f_on(&s.grid)?;
    let err_f = l2_norm(&f_recon.sub(&f_true)?)?;
    let exact = s.example.field()?;
    let mut u_true = Vec::new();
    let mut u_recon = Vec::new();
    let mut err_u_max: f64 = 0.0;
    for &t in &s.times {
        let a = exact.at(t, &s.grid)?;
        let b = recon.at(t, &s.grid)?;
        err_u_max = err_u_max.max(l2_norm(&b.sub(&a)?)?);
        u_true.push(a);
        u_recon.push(b);
    }
    println!("err_f = {err_f}");
    println!("err_u_max = {err_u_max}");
    if let Some(dir) = &s.cfg.out_dir {
        write_profile_csv(&mut out_file(dir, "profile_f.csv")?, &f_true, f_recon)?;
        write_field_csv(
            &mut out_file(dir, "field_u.csv")?,
            &s.times,
            &u_true,
            &u_recon,
        )?;
    }
    Ok(err_f)
}

fn forward(s: &Setup, t: Option<f64>, output: Option<&Path>) -> Result<()> {
    let field = s.example.field()?;
    let times = match t {
        Some(t) => vec![t],
        None => std::iter::once(0.0)
            .chain(s.times.iter().copied())
            .collect(),
    };
    let mut out = csv::Writer::from_writer(sink(output)?);
    out.write_record(["x", "t", "u"])?;
    for t in times {
        let u = field.at(t, &s.grid)?;
        for (x, v) in s.grid.nodes().zip(u.values()) {
            out.write_record([x.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn invert_cutoff(s: &Setup) -> Result<()> {
    let (_, noisy, delta) = noisy_final_data(s)?;
    let reg = s.cfg.reg_config();
    let spec = &s.example.spec;
    let theta = match reg.theta {
        Some(t) => t,
        None => theta_of(reg.bound, delta, spec.k(), spec.horizon(), reg.p, reg.sigma)?,
    };
    let (result, field) = reconstruct(spec, &noisy, theta, &s.grid)?;
    println!("delta = {delta}");
    println!("theta = {theta}");
    report_fields(s, &result.f_delta, &field)?;
    Ok(())
}

/// Transform `∫₀¹ g(x) e^{-iξx} dx` of data supported on `[0, 1]`.
fn transform(g: &GridFunction, grid: FreqGrid) -> Result<FreqFunction> {
    let w = simpson_weights(g.grid().n_cells(), g.grid().spacing())?;
    FreqFunction::from_fn(grid, |xi| {
        g.grid()
            .nodes()
            .zip(g.values().iter().zip(&w))
            .map(|(x, (v, w))| Complex64::from_polar(w * v, -xi * x))
            .sum()
    })
}

fn invert_iter(s: &Setup, space: Space, theta1: Option<f64>, n_bins: usize) -> Result<()> {
    let mut reg = s.cfg.reg_config();
    let spec = &s.example.spec;
    match space {
        Space::Modes => {
            let (_, noisy, delta) = noisy_final_data(s)?;
            let rec = run_neumann(spec, &noisy, &reg, delta, &s.grid)?;
            println!("delta = {delta}");
            println!("theta = {}", rec.theta);
            println!("rule = {}", rec.rule.kind);
            println!("n_stop = {}", rec.n_stop);
            report_fields(s, &rec.f, &rec.field)?;
            if let Some(dir) = &s.cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                write_trace_csv(&dir.join("residuals.csv"), &rec.trace)?;
            }
        }
        Space::Line => {
            let (k, horizon) = (spec.k(), spec.horizon());
            let level = s.cfg.noiselv.unwrap_or(0.01);
            // band from the noise on the final-data transform; the first pass
            // fixes the frequency grid
            reg.theta1 = theta1;
            let provisional = FreqGrid::new(8.0, n_bins)?;
            let f_hat0 = transform(
                spec.f_true().expect("built-in examples carry f"),
                provisional,
            )?;
            let mu0_hat0 = transform(spec.mu0(), provisional)?;
            let mu_t0 = line_forward(&mu0_hat0, &f_hat0, spec.h(), k, horizon)?;
            let noise = NoiseSpec::new(level, s.cfg.seed.unwrap_or(1))?;
            let (_, delta0) = perturb_freq(&mu_t0, &noise)?;
            let band = reg.theta1_for(delta0, k, horizon)?;
            let grid = FreqGrid::new(4.0 * band, n_bins)?;
            let f_hat = transform(spec.f_true().expect("built-in examples carry f"), grid)?;
            let mu0_hat = transform(spec.mu0(), grid)?;
            let mu_t = line_forward(&mu0_hat, &f_hat, spec.h(), k, horizon)?;
            let (noisy, delta) = perturb_freq(&mu_t, &noise)?;
            reg.theta1 = Some(band);
            let rec = run_line(&mu0_hat, &noisy, spec.h(), k, &reg, delta)?;
            let in_band = FreqFunction::from_fn(grid, |xi| {
                if xi.abs() <= band {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })?;
            let projected = FreqFunction::new(
                grid,
                f_hat
                    .values()
                    .iter()
                    .zip(in_band.values())
                    .map(|(a, b)| a * b)
                    .collect(),
            )?;
            let u_err = rec.u_hat_at(horizon)?.sub(&line_forward(
                &mu0_hat,
                &f_hat,
                spec.h(),
                k,
                horizon,
            )?)?;
            println!("delta = {delta}");
            println!("theta1 = {band}");
            println!("rule = {}", rec.rule.kind);
            println!("n_stop = {}", rec.n_stop);
            println!("err_f_hat_band = {}", rec.f_hat.sub(&projected)?.l2_norm());
            println!("err_f_hat = {}", rec.f_hat.sub(&f_hat)?.l2_norm());
            println!("err_u_hat_final = {}", u_err.l2_norm());
            if let Some(dir) = &s.cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                write_trace_csv(&dir.join("residuals.csv"), &rec.trace)?;
            }
        }
    }
    Ok(())
}

fn noise(cfg: &RunConfig, input: &Path, output: Option<&Path>) -> Result<()> {
    let mut reader = csv::Reader::from_path(input)?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let field = |j: usize| -> Result<f64> {
            row.get(j)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{}: row {} needs numeric x and value columns",
                        input.display(),
                        i + 1
                    ))
                })
        };
        xs.push(field(0)?);
        values.push(field(1)?);
    }
    if xs.len() < 3 {
        return Err(Error::Config(format!(
            "{}: need at least three rows",
            input.display()
        )));
    }
    let grid = Grid1D::new(xs[0], xs[xs.len() - 1], xs.len() - 1)?;
    if xs
        .iter()
        .enumerate()
        .any(|(i, &x)| (x - grid.node(i)).abs() > 1e-9 * (1.0 + x.abs()))
    {
        return Err(Error::InvalidGrid(
            "x column must be uniformly spaced".into(),
        ));
    }
    let data = GridFunction::new(grid, values)?;
    let (noisy, delta) = perturb(
        &data,
        &NoiseSpec::new(cfg.noiselv.unwrap_or(0.01), cfg.seed.unwrap_or(1))?,
    )?;
    let mut out = csv::Writer::from_writer(sink(output)?);
    out.write_record(["x", "value"])?;
    for (x, v) in xs.iter().zip(noisy.values()) {
        out.write_record([x.to_string(), v.to_string()])?;
    }
    out.flush()?;
    eprintln!("delta = {delta}");
    Ok(())
}

fn table1(s: &Setup, seeds: u64) -> Result<()> {
    let dir = s.cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut batch = Table1Config {
        example: s.example.id,
        seeds: (1..=seeds).collect(),
        grid_x_cells: s.grid.n_cells(),
        grid_t_cells: s.times.len(),
        ..Table1Config::default()
    };
    if let (Some(level), Some(theta)) = (s.cfg.noiselv, s.cfg.theta) {
        batch.cells = vec![(level, vec![theta])];
    }
    let mut rows = out_file(&dir, "table1.csv")?;
    let mut first = true;
    let reports = run_table1(&batch, |cell| {
        write_table1_csv(&mut rows, cell, first)?;
        first = false;
        Ok(())
    })?;
    let reg = s.cfg.reg_config();
    let norm = hp_norm(s.example.f_spectrum(), reg.p);
    let summaries = summarize(&reports);
    write_summary_csv(
        &mut out_file(&dir, "table1_summary.csv")?,
        &summaries,
        reg.bound,
        norm,
    )?;
    println!("noise_level theta median_delta median_err_f median_err_u_max");
    for c in &summaries {
        println!(
            "{:<11} {:<5} {:<12.6} {:<12.6} {:.6}",
            c.noise_level, c.theta, c.median_delta, c.median_err_f, c.median_err_u
        );
    }
    println!("M = {}, ||f||_p = {norm}", reg.bound);
    Ok(())
}

fn example(s: &Setup) -> Result<()> {
    let ex = &s.example;
    let h = ex.spec.h();
    println!("example = {}", ex.id);
    println!("k = {}", ex.spec.k());
    println!("T = {}", ex.spec.horizon());
    println!("h single-signed = {}", h.is_single_signed());
    println!("C_h = {}", h.total_abs_mass());
    println!(
        "||f||_p (p = 1/3) = {}",
        hp_norm(ex.f_spectrum(), 1.0 / 3.0)
    );
    println!("breakpoints = {:?}", ex.breakpoints());
    let b = ex.f_spectrum().truncated(8);
    println!("f coefficients b_0..b_8 = {:?}", b.coeffs());
    let mu_t = ex.field()?.at(ex.spec.horizon(), &s.grid)?;
    println!("||mu_T|| = {}", l2_norm(&mu_t)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = cli.flags();
    if let Some(path) = &cli.config {
        cfg = cfg.overlaid_by(load_config(path)?);
    }
    let cfg = cfg.with_env()?;
    let id = match &cli.command {
        Command::Example { id } => Some(*id),
        _ => None,
    };
    match cli.command {
        Command::Noise { input, output } => noise(&cfg, &input, output.as_deref()),
        command => {
            let s = setup(cfg, id)?;
            match command {
                Command::Forward { t, output } => forward(&s, t, output.as_deref()),
                Command::InvertCutoff => invert_cutoff(&s),
                Command::InvertIter {
                    space,
                    theta1,
                    n_bins,
                } => invert_iter(&s, space, theta1, n_bins),
                Command::Table1 { seeds } => table1(&s, seeds),
                Command::Example { .. } => example(&s),
                Command::Noise { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::UnknownExample(_) => ExitCode::from(2),
                e if e.is_numerical() => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
