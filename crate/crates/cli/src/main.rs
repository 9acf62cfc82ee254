use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use randmix::experiments::{curve_csv, emit_curve, run_sim1, run_sim2, uniform_benchmark, Sim1Config, Sim2Config};
use randmix::{
    coeffs_target_scheme, coeffs_uniform_scheme, empirical_sampler, fit_em, sample_basis, seeded_rng, target_f1, target_mass,
    CenterSampler, CenterScheme, Dataset, Domain, FitConfig, Init, MixtureModel, QuadratureConfig,
};

use randmix_cli::ModelDocument;

const CURVE_POINTS: usize = 1001;

#[derive(Parser)]
#[command(name = "randmix", version, about = "Randomized mixture approximation and estimation of densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print KL and squared L2 distance between the target and the uniform density on [0, 1] as JSON
    Benchmark {
        /// Absolute quadrature tolerance
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
    },
    /// Replicated fixed-coefficient approximations over an (n, omega) grid
    Sim1 {
        #[arg(long, value_enum)]
        scheme: Sim1Scheme,
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
        omega: Vec<f64>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replicated EM fits to simulated samples over an (n, N) grid
    Sim2 {
        #[arg(long, value_enum)]
        scheme: Sim2Scheme,
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
        n: Vec<u32>,
        #[arg(long, default_value_t = 200.0, value_parser = positive)]
        omega: f64,
        /// Sample sizes
        #[arg(long = "N", value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
        sample_sizes: Vec<u32>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit mixture weights to a headerless one-column CSV of reals
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, value_parser = positive)]
        omega: f64,
        #[arg(long, value_enum)]
        scheme: Sim2Scheme,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long)]
        model_out: PathBuf,
        /// Write the fitted density on 1001 points over the padded data range
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    /// Build one fixed-coefficient approximation of the target and write its curve
    Approx {
        #[arg(long, value_enum)]
        scheme: Sim1Scheme,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, value_parser = positive)]
        omega: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = CURVE_POINTS as u32, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct EmArgs {
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
    max_iter: u32,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    rel_tol: f64,
}

impl EmArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            max_iter: self.max_iter as usize,
            rel_tol: self.rel_tol,
            init: Init::Uniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sim1Scheme {
    Target,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sim2Scheme {
    Uniform,
    Bootstrap,
}

impl From<Sim1Scheme> for CenterScheme {
    fn from(s: Sim1Scheme) -> Self {
        match s {
            Sim1Scheme::Target => CenterScheme::Target,
            Sim1Scheme::Uniform => CenterScheme::Uniform,
        }
    }
}

impl From<Sim2Scheme> for CenterScheme {
    fn from(s: Sim2Scheme) -> Self {
        match s {
            Sim2Scheme::Uniform => CenterScheme::Uniform,
            Sim2Scheme::Bootstrap => CenterScheme::Bootstrap,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("expected a positive number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn widen(v: Vec<u32>) -> Vec<usize> {
    v.into_iter().map(|x| x as usize).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn read_data(path: &Path) -> Result<Dataset, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        if record.len() != 1 {
            return Err(format!(
                "{}: line {} has {} columns, expected 1",
                path.display(),
                line + 1,
                record.len()
            ));
        }
        let v = record[0]
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("{}: line {}: {e}", path.display(), line + 1))?;
        values.push(v);
    }
    Dataset::from_scalars(values).map_err(|e| format!("{}: {e}", path.display()))
}

/// Bounding interval of the data, widened by 5% of its length on each side.
fn padded_range(data: &Dataset) -> randmix::Result<Domain> {
    let enclosing = Domain::enclosing(data);
    let (lo, hi) = (enclosing.lo()[0], enclosing.hi()[0]);
    let pad = 0.05 * (hi - lo);
    Domain::interval(lo - pad, hi + pad)
}

fn run(cli: Cli) -> Result<(), String> {
    let err = |e: randmix::Error| e.to_string();
    match cli.command {
        Command::Benchmark { tol } => {
            let record = uniform_benchmark(&QuadratureConfig::with_tol(tol)).map_err(err)?;
            println!("{}", serde_json::to_string(&record).map_err(|e| e.to_string())?);
        }
        Command::Sim1 {
            scheme,
            n,
            omega,
            reps,
            seed,
            out,
        } => {
            let cfg = Sim1Config {
                scheme: scheme.into(),
                n_grid: widen(n),
                omega_grid: omega,
                reps: reps as usize,
                seed,
                quad: QuadratureConfig::default(),
            };
            let table = run_sim1(&cfg).map_err(err)?;
            write_file(&out, &table.to_csv())?;
            print!("{table}");
        }
        Command::Sim2 {
            scheme,
            n,
            omega,
            sample_sizes,
            reps,
            seed,
            em,
            out,
        } => {
            let cfg = Sim2Config {
                scheme: scheme.into(),
                n_grid: widen(n),
                sample_sizes: widen(sample_sizes),
                omega,
                reps: reps as usize,
                seed,
                fit: em.config(),
                quad: QuadratureConfig::default(),
            };
            let table = run_sim2(&cfg).map_err(err)?;
            write_file(&out, &table.to_csv())?;
            print!("{table}");
        }
        Command::Fit {
            data,
            n,
            omega,
            scheme,
            seed,
            em,
            model_out,
            curve_out,
        } => {
            let data = read_data(&data)?;
            let range = padded_range(&data).map_err(err)?;
            let sampler = match scheme {
                Sim2Scheme::Bootstrap => empirical_sampler(data.clone()).map_err(err)?,
                Sim2Scheme::Uniform => CenterSampler::uniform(range.clone()),
            };
            let basis = sample_basis(n as usize, 1, omega, &sampler, &mut seeded_rng(seed))
                .map_err(err)?
                .with_seed(seed);
            let report = fit_em(&MixtureModel::uniform(basis.clone()), &data, &em.config()).map_err(err)?;
            let model = MixtureModel::new(basis, report.alpha.clone()).map_err(err)?;
            write_file(&model_out, &ModelDocument::from_model(&model, seed, Some(&report)).to_json())?;
            if let Some(path) = curve_out {
                let curve = emit_curve(|x| model.log_density_1d(x).exp(), range.lo()[0], range.hi()[0], CURVE_POINTS).map_err(err)?;
                let rows: Vec<(f64, Vec<f64>)> = curve.into_iter().map(|(x, y)| (x, vec![y])).collect();
                write_file(&path, &curve_csv(&["density"], &rows))?;
            }
            println!(
                "fitted {} weights to {} points: log-likelihood {:.6}, {} iterations, converged: {}",
                model.alpha().len(),
                data.len(),
                report.final_loglik(),
                report.iterations,
                report.converged
            );
        }
        Command::Approx {
            scheme,
            n,
            omega,
            seed,
            points,
            out,
        } => {
            let target = target_f1();
            let unit = Domain::unit(1);
            let mut rng = seeded_rng(seed);
            let model = match scheme {
                Sim1Scheme::Target => {
                    let c = target_mass(&target, &unit, &QuadratureConfig::default()).map_err(err)?;
                    let sampler = CenterSampler::target(target.clone(), unit).map_err(err)?;
                    coeffs_target_scheme(sample_basis(n as usize, 1, omega, &sampler, &mut rng).map_err(err)?, c)
                }
                Sim1Scheme::Uniform => {
                    let sampler = CenterSampler::uniform(unit);
                    coeffs_uniform_scheme(sample_basis(n as usize, 1, omega, &sampler, &mut rng).map_err(err)?, &target)
                }
            }
            .map_err(err)?;
            let curve = emit_curve(|x| model.log_eval_1d(x).exp(), 0.0, 1.0, points as usize).map_err(err)?;
            let rows: Vec<(f64, Vec<f64>)> = curve.into_iter().map(|(x, y)| (x, vec![y, target.density(x)])).collect();
            write_file(&out, &curve_csv(&["density", "target"], &rows))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
