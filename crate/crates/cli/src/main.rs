mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bt_arc::cocycle::WordPolicy;
use bt_arc::dimension::{affinity_dimension_estimate, gamma0_series, GammaConfig};
use bt_arc::gasket::{
    points_csv, render, sample_points, Chart, RenderConfig, RenderMode, DEFAULT_BOX_SIZES,
};
use bt_arc::itm::{classify, BtParams, Classification, LengthVector};
use bt_arc::rational::{fmt_q, parse_rational};
use bt_arc::renorm::{
    gauss_step, gauss_via_induction, induction_trace, run_induction, trace_csv, InductionState,
    Perm,
};
use bt_arc::simplicial::arc_graph;
use bt_arc::spectrum::{lyapunov_estimate, LyapunovConfig};
use bt_arc::verify::{verify, Suite, VerifyConfig};
use bt_arc::Execution;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(Box<clap::Error>),
    #[error(transparent)]
    Library(#[from] bt_arc::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("verification failed")]
    Verification,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification => 1,
            CliError::Usage(_) | CliError::Clap(_) | CliError::Library(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Bruin-Troubetzkoy interval translation maps: classification, induction,
/// cocycle spectrum, gasket dimension and rendering.
#[derive(Parser, Debug)]
#[command(name = "btarc", version)]
struct Cli {
    /// Flat key = value file; options on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every randomized command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run on the sequential path.
    #[arg(long, global = true)]
    sequential: bool,
    /// Single-line JSON.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Finite-type verdict from the induction.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Run the induction and print the letters and lengths.
    Induce {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// One step of the Gauss map, directly and through the induction.
    Gauss {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// First-return products and the non-degeneracy condition on the arc graph.
    SimplicialCheck,
    /// Lyapunov exponents of the induction cocycle.
    #[command(alias = "spectrum")]
    Lyapunov(LyapunovArgs),
    /// Dimension estimates.
    #[command(subcommand)]
    Dimension(DimensionCmd),
    /// Gasket rendering and sampling.
    #[command(subcommand)]
    Gasket(GasketCmd),
    /// Lemma verification suites; exits 1 if a required check fails.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 10_000)]
        gamma_samples: usize,
        #[arg(long, default_value_t = 1000)]
        gauss_samples: usize,
    },
    /// Write gasket.ppm, lyapunov.json and dimension.csv into a directory.
    Report {
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 14)]
        depth: usize,
        #[arg(long, default_value_t = 1024)]
        resolution: usize,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        dimension_depth: usize,
    },
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long, conflicts_with_all = ["a", "b", "c"])]
    alpha: Option<String>,
    #[arg(long, conflicts_with_all = ["a", "b", "c"])]
    beta: Option<String>,
    #[arg(long = "a")]
    a: Option<String>,
    #[arg(long = "b")]
    b: Option<String>,
    #[arg(long = "c")]
    c: Option<String>,
}

impl ParamArgs {
    fn params(&self) -> Result<BtParams> {
        let r = |s: &String| parse_rational(s).map_err(|e| CliError::Usage(e.to_string()));
        match (&self.alpha, &self.beta, &self.a, &self.b, &self.c) {
            (Some(al), Some(be), None, None, None) => Ok(BtParams::new(r(al)?, r(be)?)?),
            (None, None, Some(a), Some(b), Some(c)) => Ok(BtParams::from_lengths(
                &LengthVector::new(r(a)?, r(b)?, r(c)?)?,
            )?),
            _ => Err(CliError::Usage(
                "give either --alpha and --beta, or --a, --b and --c".into(),
            )),
        }
    }
}

#[derive(Args, Debug)]
struct LyapunovArgs {
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    /// Steps between re-orthonormalizations.
    #[arg(long, default_value_t = 20)]
    cadence: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Uniform)]
    policy: PolicyArg,
    /// Stay probability at P123 for the weighted policy.
    #[arg(long, default_value_t = 0.5)]
    p_a: f64,
    /// Stay probability at P213 for the weighted policy.
    #[arg(long, default_value_t = 0.5)]
    p_b: f64,
    /// Include the per-trial exponents.
    #[arg(long)]
    per_trial: bool,
}

#[derive(Subcommand, Debug)]
enum DimensionCmd {
    /// Root of the depth-n pressure for each depth up to --depth.
    Affinity {
        #[arg(long, default_value_t = 14)]
        depth: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Partial sums of the singular value function at s = 3/2 over Γ0.
    Gamma0 {
        #[arg(long, default_value_t = 15)]
        max_len: usize,
        #[arg(long, default_value_t = 4)]
        fit_from: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Box-counting slope of a rendered gasket.
    Box {
        #[arg(long, default_value_t = 18)]
        depth: usize,
        #[arg(long, default_value_t = 4096)]
        resolution: usize,
        #[arg(long, default_value = "simplex")]
        chart: Chart,
        /// Box sides in pixels.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
}

#[derive(Subcommand, Debug)]
enum GasketCmd {
    /// Rasterize the depth-d approximation to a PPM file.
    Render {
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, visible_alias = "size", default_value_t = 1024)]
        resolution: usize,
        #[arg(long, default_value = "simplex")]
        chart: Chart,
        #[arg(long, default_value = "fill")]
        mode: RenderMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact rational points inside each depth-d cylinder, as CSV.
    Sample {
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        per_cylinder: usize,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Uniform,
    Weighted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Table1,
    Norms,
    Gamma,
    Zariski,
    Simplicial,
    Gauss,
    Partition,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Table1 => Suite::Table1,
            SuiteArg::Norms => Suite::Norms,
            SuiteArg::Gamma => Suite::Gamma,
            SuiteArg::Zariski => Suite::Zariski,
            SuiteArg::Simplicial => Suite::Simplicial,
            SuiteArg::Gauss => Suite::Gauss,
            SuiteArg::Partition => Suite::Partition,
            SuiteArg::All => Suite::All,
        }
    }
}

struct Ctx {
    seed: u64,
    exec: Execution,
    compact: bool,
}

impl Ctx {
    fn json(&self, v: &Value) -> String {
        if self.compact {
            v.to_string()
        } else {
            serde_json::to_string_pretty(v).expect("JSON values serialize")
        }
    }

    fn print(&self, v: &Value) {
        println!("{}", self.json(v));
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn params_json(p: &BtParams) -> Value {
    let l = p.lengths();
    json!({
        "alpha": fmt_q(p.alpha()), "beta": fmt_q(p.beta()),
        "a": fmt_q(l.a()), "b": fmt_q(l.b()), "c": fmt_q(l.c()),
    })
}

const WORD_PREFIX: usize = 64;

fn cmd_classify(ctx: &Ctx, params: &ParamArgs, max_steps: usize) -> Result<()> {
    let p = params.params()?;
    let run = run_induction(&InductionState::new(Perm::P123, p.lengths()), max_steps);
    let (verdict, steps) = match classify(&p, max_steps) {
        Classification::FiniteType(k) => ("FiniteType", k),
        Classification::InfiniteUpTo(k) => ("InfiniteUpTo", k),
        Classification::Degenerate(k) => ("Degenerate", k),
    };
    let prefix: String = run.word.to_string().chars().take(WORD_PREFIX).collect();
    ctx.print(&json!({ "verdict": verdict, "steps": steps, "word_prefix": prefix, "params": params_json(&p) }));
    Ok(())
}

fn cmd_induce(ctx: &Ctx, params: &ParamArgs, max_steps: usize, format: Format) -> Result<()> {
    let p = params.params()?;
    let start = InductionState::new(Perm::P123, p.lengths());
    let rows = induction_trace(&start, max_steps);
    match format {
        Format::Csv => print!("{}", trace_csv(&rows)),
        Format::Json => {
            let run = run_induction(&start, max_steps);
            ctx.print(&json!({
                "params": params_json(&p),
                "outcome": to_json(&run.outcome),
                "word": to_json(&run.word),
                "final": { "perm": to_json(&run.final_state.perm), "lengths": to_json(&run.final_state.lengths) },
                "trace": to_json(&rows),
            }));
        }
    }
    Ok(())
}

fn cmd_gauss(ctx: &Ctx, alpha: &str, beta: &str) -> Result<()> {
    let r = |s: &str| parse_rational(s).map_err(|e| CliError::Usage(e.to_string()));
    let (alpha, beta) = (r(alpha)?, r(beta)?);
    let direct = gauss_step(&alpha, &beta)?;
    let pair = |(x, y): &(bt_arc::rational::Q, bt_arc::rational::Q)| json!([fmt_q(x), fmt_q(y)]);
    let (via, agree) = match gauss_via_induction(&alpha, &beta) {
        Ok(v) => (pair(&v), v == direct),
        Err(bt_arc::Error::NotApplicable(m)) => (
            json!({ "not_applicable": m }),
            direct.1 < bt_arc::rational::q(0, 1),
        ),
        Err(e) => return Err(e.into()),
    };
    ctx.print(&json!({
        "alpha": fmt_q(&alpha), "beta": fmt_q(&beta),
        "gauss_step": pair(&direct), "via_induction": via, "agree": agree,
    }));
    Ok(())
}

fn cmd_simplicial(ctx: &Ctx) -> Result<()> {
    let report = verify(
        Suite::Simplicial,
        &VerifyConfig {
            seed: ctx.seed,
            ..VerifyConfig::default()
        },
        ctx.exec,
    )?;
    ctx.print(&json!({ "graph": to_json(&arc_graph()), "report": to_json(&report) }));
    if report.ok {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn lyapunov_config(seed: u64, a: &LyapunovArgs) -> LyapunovConfig {
    let policy = match a.policy {
        PolicyArg::Uniform => WordPolicy::UniformEdges,
        PolicyArg::Weighted => WordPolicy::Weighted {
            p_a: a.p_a,
            p_b: a.p_b,
        },
    };
    LyapunovConfig {
        policy,
        steps: a.steps,
        trials: a.trials,
        seed,
        cadence: a.cadence,
    }
}

fn lyapunov_json(cfg: &LyapunovConfig, per_trial: bool, exec: Execution) -> Result<Value> {
    let est = lyapunov_estimate(cfg, exec)?;
    let mut v = json!({ "config": to_json(cfg), "estimate": to_json(&est) });
    if !per_trial {
        v["estimate"]
            .as_object_mut()
            .expect("object")
            .remove("per_trial");
    }
    Ok(v)
}

fn cmd_dimension(ctx: &Ctx, cmd: &DimensionCmd) -> Result<()> {
    match *cmd {
        DimensionCmd::Affinity { depth, tol, format } => {
            let est = affinity_dimension_estimate(depth, tol, ctx.exec)?;
            match format {
                Format::Csv => print!("{}", est.to_csv()),
                Format::Json => {
                    let variation = est.variation(depth.saturating_sub(2), depth);
                    ctx.print(
                        &json!({ "estimate": to_json(&est), "variation_last_three": variation }),
                    );
                }
            }
        }
        DimensionCmd::Gamma0 {
            max_len,
            fit_from,
            format,
        } => {
            let series = gamma0_series(max_len, ctx.exec)?;
            match format {
                Format::Csv => print!("{}", series.to_csv()),
                Format::Json => {
                    let fit = series.log_slope(fit_from, max_len).ok();
                    ctx.print(&json!({
                        "series": to_json(&series),
                        "s_min": series.s_min(fit_from, max_len),
                        "log_slope": to_json(&fit),
                    }));
                }
            }
        }
        DimensionCmd::Box {
            depth,
            resolution,
            chart,
            ref sizes,
        } => {
            let cfg = RenderConfig {
                depth,
                resolution,
                chart,
                mode: RenderMode::Fill,
            };
            let raster = render(&cfg, ctx.exec)?;
            let sizes = sizes.clone().unwrap_or_else(|| DEFAULT_BOX_SIZES.to_vec());
            let b = raster.box_count(&sizes)?;
            ctx.print(&json!({ "render": to_json(&cfg), "set_pixels": raster.count(), "sizes": sizes, "box_count": to_json(&b) }));
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn cmd_gasket(ctx: &Ctx, cmd: &GasketCmd) -> Result<()> {
    match cmd {
        GasketCmd::Render {
            depth,
            resolution,
            chart,
            mode,
            out,
        } => {
            let cfg = RenderConfig {
                depth: *depth,
                resolution: *resolution,
                chart: *chart,
                mode: *mode,
            };
            let raster = render(&cfg, ctx.exec)?;
            write_file(out, &raster.to_ppm())?;
            ctx.print(
                &json!({ "render": to_json(&cfg), "set_pixels": raster.count(), "out": out }),
            );
        }
        GasketCmd::Sample {
            depth,
            per_cylinder,
            out,
        } => {
            let pts = sample_points(*depth, *per_cylinder, ctx.seed, ctx.exec)?;
            let csv = points_csv(&pts);
            match out {
                Some(path) => write_file(path, csv.as_bytes())?,
                None => std::io::stdout()
                    .write_all(csv.as_bytes())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
            }
        }
    }
    Ok(())
}

fn cmd_verify(
    ctx: &Ctx,
    suite: SuiteArg,
    gamma_samples: usize,
    gauss_samples: usize,
) -> Result<()> {
    let cfg = VerifyConfig {
        seed: ctx.seed,
        gamma: GammaConfig {
            sample_size: gamma_samples,
            seed: ctx.seed,
            ..GammaConfig::default()
        },
        gauss_samples,
        ..VerifyConfig::default()
    };
    let report = verify(suite.into(), &cfg, ctx.exec)?;
    ctx.print(&to_json(&report));
    if report.ok {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

struct ReportArgs<'a> {
    out_dir: &'a Path,
    depth: usize,
    resolution: usize,
    steps: usize,
    trials: usize,
    dimension_depth: usize,
}

fn cmd_report(ctx: &Ctx, a: &ReportArgs) -> Result<()> {
    fs::create_dir_all(a.out_dir).map_err(|e| CliError::io(a.out_dir, e))?;
    let cfg = RenderConfig {
        depth: a.depth,
        resolution: a.resolution,
        chart: Chart::Simplex,
        mode: RenderMode::Fill,
    };
    let raster = render(&cfg, ctx.exec)?;
    let lyap = LyapunovConfig {
        policy: WordPolicy::UniformEdges,
        steps: a.steps,
        trials: a.trials,
        seed: ctx.seed,
        ..LyapunovConfig::default()
    };
    let lyap_json = lyapunov_json(&lyap, true, ctx.exec)?;
    let dim = affinity_dimension_estimate(a.dimension_depth, 1e-4, ctx.exec)?;
    let files = [
        ("gasket.ppm", raster.to_ppm()),
        (
            "lyapunov.json",
            format!(
                "{}\n",
                serde_json::to_string_pretty(&lyap_json).expect("serializes")
            )
            .into_bytes(),
        ),
        ("dimension.csv", dim.to_csv().into_bytes()),
    ];
    for (name, bytes) in &files {
        write_file(&a.out_dir.join(name), bytes)?;
    }
    ctx.print(&json!({
        "out_dir": a.out_dir,
        "files": files.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        "set_pixels": raster.count(),
        "lyapunov": lyap_json["estimate"]["exponents"],
        "s_star": dim.s_star,
    }));
    Ok(())
}

fn parse_args() -> Result<Cli> {
    let args: Vec<String> = std::env::args().collect();
    let args = match config::find_path(&args) {
        Some(path) => config::merge(Cli::command(), &args, &config::load(Path::new(&path))?)?,
        None => args,
    };
    Cli::try_parse_from(args).map_err(|e| CliError::Clap(Box::new(e)))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        bt_arc::exec::configure_threads(n);
    }
    let ctx = Ctx {
        seed: cli.seed,
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        compact: cli.compact,
    };
    match &cli.command {
        Cmd::Classify { params, max_steps } => cmd_classify(&ctx, params, *max_steps),
        Cmd::Induce {
            params,
            max_steps,
            format,
        } => cmd_induce(&ctx, params, *max_steps, *format),
        Cmd::Gauss { alpha, beta } => cmd_gauss(&ctx, alpha, beta),
        Cmd::SimplicialCheck => cmd_simplicial(&ctx),
        Cmd::Lyapunov(a) => {
            let v = lyapunov_json(&lyapunov_config(ctx.seed, a), a.per_trial, ctx.exec)?;
            ctx.print(&v);
            Ok(())
        }
        Cmd::Dimension(d) => cmd_dimension(&ctx, d),
        Cmd::Gasket(g) => cmd_gasket(&ctx, g),
        Cmd::Verify {
            suite,
            gamma_samples,
            gauss_samples,
        } => cmd_verify(&ctx, *suite, *gamma_samples, *gauss_samples),
        Cmd::Report {
            out_dir,
            depth,
            resolution,
            steps,
            trials,
            dimension_depth,
        } => cmd_report(
            &ctx,
            &ReportArgs {
                out_dir,
                depth: *depth,
                resolution: *resolution,
                steps: *steps,
                trials: *trials,
                dimension_depth: *dimension_depth,
            },
        ),
    }
}

fn main() -> ExitCode {
    let result = parse_args().and_then(run);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { 2 } else { 0 })
        }
        Err(CliError::Verification) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
