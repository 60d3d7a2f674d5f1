//! `boolmodel`: reproducible experiment driver for the Boolean model
//! toolkit. Every subcommand is a pure function of its config; the primary
//! CSV outputs are byte-identical across runs.

mod config;
mod csvout;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boolmodel::analysis::{self, AnalysisError};
use boolmodel::criteria;
use boolmodel::geom::{diameter_sequence, BodyDoc, ConvexBody};
use boolmodel::grains::{Flag, GrainLaw, TailProfile};
use boolmodel::process::{
    recommended_margin, sample_process, truncation_bias, ProcessError, Window,
};
use boolmodel::rng::StreamKey;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, MarginDoc};
use csvout::MarginRow;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("tainted run: {0}")]
    Tainted(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Tainted(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn from_analysis(e: AnalysisError) -> CliError {
    match &e {
        AnalysisError::ProbeCap { .. } => CliError::Resource(e.to_string()),
        AnalysisError::Process(ProcessError::ResourceCap { .. }) => {
            CliError::Resource(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "boolmodel",
    version,
    about = "Poisson Boolean model: classification and window experiments"
)]
struct Cli {
    /// Worker pool size hint; 0 picks the machine default. Outputs do not
    /// depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a grain law (or an explicit tail profile) as dense/sparse
    /// and robust/non-robust.
    Classify(ClassifyArgs),
    /// Emit the committed classification grid as CSV.
    RegimeTable {
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the diameter sequence of a body document (JSON).
    Diam {
        #[arg(long)]
        body: PathBuf,
    },
    /// Draw one sample (first grid point, replica 0) and write the snapshot.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossing-probability sweep; writes estimates.csv and clusters.csv.
    Percolate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write crossing.svg (derived artifact).
        #[arg(long)]
        svg: bool,
    },
    /// Covered-fraction sweep; writes coverage.csv.
    Coverage {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Palm statistics sweep (M0, N0); writes m0.csv.
    M0 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Palm path-count sweep; writes pathcount.csv.
    Pathcount {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Margin recommendation and truncation bias per grid point.
    Margin {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlagArg {
    True,
    False,
    Unknown,
}

impl From<FlagArg> for Flag {
    fn from(f: FlagArg) -> Flag {
        match f {
            FlagArg::True => Flag::True,
            FlagArg::False => Flag::False,
            FlagArg::Unknown => Flag::Unknown,
        }
    }
}

#[derive(Args)]
struct ClassifyArgs {
    /// long-short | independent-axes | dependent-axes | right-triangle | fixed
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Body document (JSON) for --family fixed.
    #[arg(long)]
    body: Option<PathBuf>,
    /// Explicit tail-index vector, bypassing the family presets.
    #[arg(long = "alpha-vec", value_delimiter = ',')]
    alpha_vec: Option<Vec<f64>>,
    #[arg(long = "vol-l1", value_enum)]
    vol_l1: Option<FlagArg>,
    #[arg(long = "vol-l2", value_enum)]
    vol_l2: Option<FlagArg>,
    #[arg(long = "diam-ld", value_enum)]
    diam_ld: Option<FlagArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Classify(args) => cmd_classify(&args),
        Cmd::RegimeTable { out } => cmd_regime_table(out.as_deref()),
        Cmd::Diam { body } => cmd_diam(&body),
        Cmd::Sample { config, out } => cmd_sample(&config, out.as_deref()),
        Cmd::Percolate { config, out, svg } => cmd_percolate(&config, out.as_deref(), svg),
        Cmd::Coverage { config, out } => cmd_coverage(&config, out.as_deref()),
        Cmd::M0 { config, out } => cmd_m0(&config, out.as_deref()),
        Cmd::Pathcount { config, out } => cmd_pathcount(&config, out.as_deref()),
        Cmd::Margin { config, out } => cmd_margin(&config, out.as_deref()),
    }
}

/// --out flag, then config [output] dir, then $BOOLMODEL_OUT, then cwd.
fn out_dir(flag: Option<&Path>, cfg: Option<&ExperimentConfig>) -> Result<PathBuf, CliError> {
    let dir = flag
        .map(PathBuf::from)
        .or_else(|| cfg.and_then(|c| c.output.dir.as_ref().map(PathBuf::from)))
        .or_else(|| std::env::var_os("BOOLMODEL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_family_law(args: &ClassifyArgs) -> Result<GrainLaw, CliError> {
    let family = args.family.as_deref().ok_or_else(|| {
        CliError::Config("classify needs either --family or --alpha-vec".into())
    })?;
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| CliError::Config(format!("--family {family} needs --{name}")))
    };
    let need_d = || {
        args.d
            .ok_or_else(|| CliError::Config(format!("--family {family} needs --d")))
    };
    let need_betas = || {
        args.betas
            .clone()
            .ok_or_else(|| CliError::Config(format!("--family {family} needs --betas")))
    };
    let law = match family {
        "long-short" => GrainLaw::LongShortEllipsoid {
            d: need_d()?,
            m: args
                .m
                .ok_or_else(|| CliError::Config("--family long-short needs --m".into()))?,
            alpha: need(args.alpha, "alpha")?,
        },
        "independent-axes" => GrainLaw::IndependentAxesEllipsoid {
            d: need_d()?,
            betas: need_betas()?,
        },
        "dependent-axes" => GrainLaw::DependentAxesEllipsoid {
            d: need_d()?,
            betas: need_betas()?,
        },
        "right-triangle" => GrainLaw::RightTriangle {
            alpha: need(args.alpha, "alpha")?,
            beta: need(args.beta, "beta")?,
        },
        "fixed" => {
            let path = args
                .body
                .as_ref()
                .ok_or_else(|| CliError::Config("--family fixed needs --body FILE".into()))?;
            GrainLaw::FixedBody {
                body: load_body(path)?,
            }
        }
        other => return Err(CliError::Config(format!("unknown family {other:?}"))),
    };
    law.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(law)
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let profile = if let Some(alphas) = &args.alpha_vec {
        let d = args.d.unwrap_or(alphas.len());
        TailProfile::new(
            d,
            alphas.clone(),
            args.vol_l1.map_or(Flag::Unknown, Into::into),
            args.vol_l2.map_or(Flag::Unknown, Into::into),
            args.diam_ld.map_or(Flag::Unknown, Into::into),
        )
        .map_err(|e| CliError::Config(e.to_string()))?
    } else {
        let law = parse_family_law(args)?;
        law.theoretical_tail_profile()
            .map_err(|e| CliError::Config(e.to_string()))?
    };
    let verdict = criteria::classify(&profile).map_err(|e| CliError::Config(e.to_string()))?;
    println!("{verdict}");
    println!("reasons: {}", verdict.reasons.join("; "));
    Ok(())
}

fn cmd_regime_table(out: Option<&Path>) -> Result<(), CliError> {
    let grid = criteria::standard_grid();
    let rows = criteria::regime_table(&grid).map_err(|e| CliError::Config(e.to_string()))?;
    let csv = csvout::regime_csv(&rows);
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn load_body(path: &Path) -> Result<ConvexBody, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let doc: BodyDoc = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ConvexBody::from_doc(&doc).map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_diam(body_path: &Path) -> Result<(), CliError> {
    let body = load_body(body_path)?;
    let seq = diameter_sequence(&body).map_err(|e| CliError::Config(e.to_string()))?;
    for (k, v) in seq.values.iter().enumerate() {
        println!("D{} = {v}", k + 1);
    }
    Ok(())
}

fn cmd_sample(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let dir = out_dir(out, Some(&cfg))?;
    let (u, l) = plan.grid[0];
    let margin = match plan.margin {
        boolmodel::analysis::MarginPolicy::Fixed(m) => m,
        boolmodel::analysis::MarginPolicy::Auto { miss_prob } => {
            let probe = Window::new(cfg.dimension, l, 0.0)
                .map_err(|e| CliError::Config(e.to_string()))?;
            recommended_margin(&plan.law, u, &probe, miss_prob)
                .map_err(|e| CliError::Config(e.to_string()))?
                .margin
        }
    };
    let window = Window::new(cfg.dimension, l, margin).map_err(|e| CliError::Config(e.to_string()))?;
    let key = StreamKey::new(plan.root_seed, 0);
    let sample = sample_process(&window, u, &plan.law, key).map_err(|e| match e {
        ProcessError::ResourceCap { .. } => CliError::Resource(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    let doc = sample.to_doc();
    let json = serde_json::to_string(&doc).expect("snapshot serializes");
    write_artifact(&dir, "sample.json", &json)?;
    println!("digest = {:016x}", sample.digest());
    Ok(())
}

fn cmd_percolate(config_path: &Path, out: Option<&Path>, want_svg: bool) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let dir = out_dir(out, Some(&cfg))?;
    let run = analysis::percolation_sweep(&plan).map_err(from_analysis)?;
    write_artifact(&dir, "estimates.csv", &csvout::estimates_csv(&run.estimates))?;
    write_artifact(&dir, "clusters.csv", &csvout::clusters_csv(&run.replica_rows))?;
    if want_svg {
        let plot = svg::estimate_plot(&run.estimates, "crossing probability");
        write_artifact(&dir, "crossing.svg", &plot)?;
    }
    fail_if_gjk_tainted(&run.estimates)
}

/// "gjk" taint means the geometric kernel exceeded its failure budget and
/// the numbers cannot be trusted; that is the exit-4 condition. The
/// "heavy-margin" code stays informational: it reports a policy outcome
/// (quantile margin, unbounded residual), not a numerical failure.
fn fail_if_gjk_tainted(rows: &[analysis::EstimateRow]) -> Result<(), CliError> {
    for r in rows {
        if r.taint.iter().any(|t| t == "gjk") {
            return Err(CliError::Tainted(format!(
                "gjk failure budget exceeded at u={} L={}",
                r.u, r.l
            )));
        }
    }
    Ok(())
}

fn cmd_coverage(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let spacing = cfg.probe_spacing()?;
    let dir = out_dir(out, Some(&cfg))?;
    let rows = analysis::coverage_sweep(&plan, spacing).map_err(from_analysis)?;
    write_artifact(&dir, "coverage.csv", &csvout::estimates_csv(&rows))?;
    fail_if_gjk_tainted(&rows)
}

fn cmd_m0(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let dir = out_dir(out, Some(&cfg))?;
    let rows = analysis::palm_sweep(&plan).map_err(from_analysis)?;
    write_artifact(&dir, "m0.csv", &csvout::estimates_csv(&rows))?;
    fail_if_gjk_tainted(&rows)
}

fn cmd_pathcount(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let n_max = cfg.n_max()?;
    let dir = out_dir(out, Some(&cfg))?;
    let rows = analysis::pathcount_sweep(&plan, n_max).map_err(from_analysis)?;
    write_artifact(&dir, "pathcount.csv", &csvout::estimates_csv(&rows))?;
    fail_if_gjk_tainted(&rows)
}

fn cmd_margin(config_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let dir = out_dir(out, Some(&cfg))?;
    let mut rows = Vec::with_capacity(plan.grid.len());
    for &(u, l) in &plan.grid {
        let row = match cfg.margin {
            MarginDoc::Auto { miss_prob } => {
                let probe = Window::new(cfg.dimension, l, 0.0)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let rep = recommended_margin(&plan.law, u, &probe, miss_prob)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                MarginRow {
                    u,
                    l,
                    margin: rep.margin,
                    residual_relative: rep.residual_relative,
                    heavy_tail: rep.heavy_tail,
                }
            }
            MarginDoc::Fixed { value } => {
                let window = Window::new(cfg.dimension, l, value)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let bias = truncation_bias(&plan.law, u, &window)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let expected = u * l.powi(cfg.dimension as i32);
                MarginRow {
                    u,
                    l,
                    margin: value,
                    residual_relative: bias / expected,
                    heavy_tail: bias.is_infinite(),
                }
            }
        };
        rows.push(row);
    }
    write_artifact(&dir, "margin.csv", &csvout::margin_csv(&rows))?;
    Ok(())
}
