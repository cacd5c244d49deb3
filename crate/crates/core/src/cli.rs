//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 when the input data or
//! files are rejected.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::flow::LssCurve;
use crate::io::{
    curve_csv, histogram_csv, load_feature_csv, load_manifest, plot_svg, save_truth_json,
    write_feature_csv, write_file, MatchingReport,
};
use crate::lss::{greedy_curve, lss_curve_from_costs};
use crate::select::{
    select_k_known_noise, select_k_unknown_noise_on_curve, separation_rate, NoiseLevel,
    UnknownNoiseParams,
};
use crate::synth::{
    generate_instance, k_hat_histogram, run_precision_sweep, run_selection_sweep, ExperimentTable,
    SelectionMode, SynthConfig,
};
use crate::types::{squared_distance_matrix, FeatureSet};

/// Environment variable supplying the default random seed.
pub const SEED_ENV: &str = "LSSMATCH_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lssmatch", version, about = "Outlier-robust matching of noisy feature sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum sum-of-squares matching of a fixed size.
    Match {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        k: usize,
        /// Output JSON path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal cost for every size, as `k,phi` CSV.
    Curve {
        #[command(flatten)]
        inputs: Inputs,
        /// Largest size (default: min(n, m)).
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose the number of matched pairs.
    Select {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 0.01, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        step: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic instance (x.csv, y.csv, truth.json) to a directory.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Monte-Carlo sweeps and batch selection.
    #[command(subcommand)]
    Bench(Bench),
    /// Print the separation rate.
    Rate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.01, value_parser = parse_alpha)]
        alpha: f64,
    },
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Left feature CSV.
    #[arg(long)]
    pub x: PathBuf,
    /// Right feature CSV.
    #[arg(long)]
    pub y: PathBuf,
    /// Use the greedy approximation instead of the exact solver.
    #[arg(long)]
    pub greedy: bool,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Known total noise variance; without any noise flag the noise is estimated.
    #[arg(long, conflicts_with_all = ["sigma", "sigma_sharp"])]
    pub sigma0_sq: Option<f64>,
    #[arg(long, requires = "sigma_sharp")]
    pub sigma: Option<f64>,
    #[arg(long, requires = "sigma")]
    pub sigma_sharp: Option<f64>,
}

impl NoiseArgs {
    fn level(&self) -> Option<NoiseLevel> {
        match (self.sigma0_sq, self.sigma, self.sigma_sharp) {
            (Some(v), _, _) => Some(NoiseLevel::Total(v)),
            (None, Some(sigma), Some(sigma_sharp)) => Some(NoiseLevel::PerSide { sigma, sigma_sharp }),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long, default_value_t = 60)]
    pub kstar: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_sharp: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    fn config(&self, tau: f64) -> SynthConfig {
        SynthConfig {
            n: self.n,
            m: self.m,
            d: self.d,
            k_star: self.kstar,
            tau,
            sigma: self.sigma,
            sigma_sharp: self.sigma_sharp,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory receiving one `<metric>.svg` per metric.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Known,
    Unknown,
}

#[derive(Debug, Subcommand)]
pub enum Bench {
    /// Precision and subset recovery of the size-k matching along a tau grid.
    Precision {
        /// Comma-separated tau values.
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Matching size (default: kstar).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Size selection along a tau grid, or over the file pairs of a manifest
    /// (then the output is a `k_hat,count` histogram).
    Selection {
        /// Comma-separated tau values.
        #[arg(long, value_delimiter = ',', required_unless_present = "manifest")]
        tau: Vec<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value_t = Mode::Unknown)]
        mode: Mode,
        #[arg(long, default_value_t = 0.01, value_parser = parse_alpha)]
        alpha: f64,
        /// File listing one `x.csv,y.csv` pair per line.
        #[arg(long, conflicts_with_all = ["tau", "plot_dir"])]
        manifest: Option<PathBuf>,
        /// Known total noise variance for manifest runs.
        #[arg(long, requires = "manifest")]
        sigma0_sq: Option<f64>,
    },
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Results go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn load_pair(x: &Path, y: &Path) -> Result<(FeatureSet, FeatureSet)> {
    let x = load_feature_csv(x)?;
    let y = load_feature_csv(y)?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok((x, y))
}

fn solve(x: &FeatureSet, y: &FeatureSet, k_max: usize, greedy: bool) -> Result<LssCurve> {
    let costs = squared_distance_matrix(x, y)?;
    if greedy {
        greedy_curve(&costs, k_max)
    } else {
        lss_curve_from_costs(&costs, k_max)
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Match { inputs, k, out } => {
            let (x, y) = load_pair(&inputs.x, &inputs.y)?;
            let curve = solve(&x, &y, k, inputs.greedy)?;
            let report = MatchingReport::from_matching(curve.matching(k), curve.phi(k));
            emit(out.as_deref(), &(report.to_json() + "\n"), stdout)
        }
        Command::Curve { inputs, kmax, out } => {
            let (x, y) = load_pair(&inputs.x, &inputs.y)?;
            let k_max = kmax.unwrap_or(x.len().min(y.len()));
            let curve = solve(&x, &y, k_max, inputs.greedy)?;
            emit(out.as_deref(), &curve_csv(&curve), stdout)
        }
        Command::Select {
            inputs,
            noise,
            alpha,
            kmin,
            step,
            out,
        } => {
            let (x, y) = load_pair(&inputs.x, &inputs.y)?;
            let (n, m, d) = (x.len(), y.len(), x.dim());
            let curve = solve(&x, &y, n.min(m), inputs.greedy)?;
            let outcome = match noise.level() {
                Some(level) => select_k_known_noise(&curve, level, n.max(m), d, alpha)?,
                None => {
                    let params = UnknownNoiseParams {
                        alpha,
                        k_min: kmin,
                        step: step as usize,
                    };
                    select_k_unknown_noise_on_curve(&curve, n, m, d, params)?
                }
            };
            let report = MatchingReport::from_outcome(&outcome);
            emit(out.as_deref(), &(report.to_json() + "\n"), stdout)
        }
        Command::Synth { model, tau, out_dir } => {
            let inst = generate_instance(&model.config(tau))?;
            std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
                path: out_dir.clone(),
                source,
            })?;
            write_feature_csv(&inst.x, out_dir.join("x.csv"))?;
            write_feature_csv(&inst.y, out_dir.join("y.csv"))?;
            save_truth_json(&inst.truth, out_dir.join("truth.json"))
        }
        Command::Bench(Bench::Precision { tau, sweep, k }) => {
            let template = sweep.model.config(1.0);
            let k = k.unwrap_or(template.k_star);
            let table = run_precision_sweep(&template, &tau, sweep.trials, k)?;
            finish_sweep(&table, &sweep, stdout)
        }
        Command::Bench(Bench::Selection {
            tau,
            sweep,
            mode,
            alpha,
            manifest,
            sigma0_sq,
        }) => {
            if let Some(manifest) = manifest {
                let hist = manifest_histogram(&manifest, sigma0_sq, alpha)?;
                return emit(sweep.out.as_deref(), &histogram_csv(&hist), stdout);
            }
            let mode = match mode {
                Mode::Known => SelectionMode::KnownNoise,
                Mode::Unknown => SelectionMode::UnknownNoise,
            };
            let table = run_selection_sweep(&sweep.model.config(1.0), &tau, sweep.trials, mode, alpha)?;
            finish_sweep(&table, &sweep, stdout)
        }
        Command::Rate { n, m, d, alpha } => {
            let rate = separation_rate(n, m, d, alpha)?;
            emit(None, &format!("{rate}\n"), stdout)
        }
    }
}

fn finish_sweep(table: &ExperimentTable, sweep: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &sweep.plot_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        for metric in table.metrics() {
            write_file(&dir.join(format!("{metric}.svg")), &plot_svg(table, metric)?)?;
        }
    }
    emit(sweep.out.as_deref(), &table.to_csv_string(), stdout)
}

/// Selected sizes over the file pairs of a manifest, as a histogram.
pub fn manifest_histogram(manifest: &Path, sigma0_sq: Option<f64>, alpha: f64) -> Result<Vec<(usize, usize)>> {
    let mut k_hats = Vec::new();
    for (xp, yp) in load_manifest(manifest)? {
        let (x, y) = load_pair(&xp, &yp)?;
        let (n, m, d) = (x.len(), y.len(), x.dim());
        let curve = solve(&x, &y, n.min(m), false)?;
        let outcome = match sigma0_sq {
            Some(v) => select_k_known_noise(&curve, v, n.max(m), d, alpha)?,
            None => select_k_unknown_noise_on_curve(
                &curve,
                n,
                m,
                d,
                UnknownNoiseParams {
                    alpha,
                    ..UnknownNoiseParams::default()
                },
            )?,
        };
        k_hats.push(outcome.k_hat);
    }
    Ok(k_hat_histogram(&k_hats))
}
