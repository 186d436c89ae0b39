//! `causal-dist`: distances between structural causal models, and the
//! experiments around them.

use causal_cli::{experiments, run};
use clap::{Args, Parser, Subcommand, ValueEnum};
use causal_core::dist::{od, DistanceConfig, SeedMode, WeightScheme};
use causal_core::ot::{BaseDistance, BaseDistanceConfig};
use causal_core::rng::mix;
use causal_core::scm::{random_scm, Parametrization};
use causal_io::{write_scm_json, DistanceReport};
use experiments::*;
use run::{cd_parallel, id_parallel, load_model, write_file, CliError, CliResult};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "causal-dist",
    about = "Observational, interventional and counterfactual distances between causal models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one distance between two model files (.scm/.json or .bif).
    Dist(DistArgs),
    /// Generate a random model file from one of the synthetic families.
    Gen(GenArgs),
    /// Pairwise distance matrices and 2D embeddings of the 20 two-node models.
    Geometry(GeometryArgs),
    /// Self-distance of random models across a grid of sample counts.
    #[command(name = "sample-eff")]
    SampleEff(SampleEffArgs),
    /// Distance growth under mechanism mixing or Markov-equivalent refits.
    Sensitivity(SensitivityArgs),
    /// Score discovery outputs against a ground-truth model.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistKind {
    Od,
    Id,
    Cd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaseKind {
    W2,
    W1,
    Sliced,
}

#[derive(Args, Clone)]
struct DistanceFlags {
    /// Samples per distribution.
    #[arg(long, default_value_t = 1000)]
    k: usize,
    /// Intervention values per node.
    #[arg(long, default_value_t = 100)]
    l: usize,
    /// Evidence values per node.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base distance between sample sets.
    #[arg(long, value_enum, default_value_t = BaseKind::W2)]
    base: BaseKind,
    /// Projections for the sliced base distance.
    #[arg(long, default_value_t = 50)]
    projections: usize,
    /// Largest sample count solved by the exact assignment solver.
    #[arg(long, default_value_t = 1024)]
    exact_cap: usize,
    /// Weights over intervention targets: "uniform" or comma-separated
    /// values, the empty intervention first.
    #[arg(long, default_value = "uniform")]
    mu: String,
    /// Weights over evidence targets, same syntax as --mu.
    #[arg(long, default_value = "uniform")]
    nu: String,
    /// Sample the two models with independent streams instead of common
    /// random numbers.
    #[arg(long)]
    independent_seeds: bool,
}

impl DistanceFlags {
    fn build(&self) -> CliResult<DistanceConfig> {
        let parse_weights = |spec: &str| -> CliResult<WeightScheme> {
            if spec == "uniform" {
                return Ok(WeightScheme::Uniform);
            }
            let ws: Result<Vec<f64>, _> = spec.split(',').map(str::parse::<f64>).collect();
            match ws {
                Ok(ws) => Ok(WeightScheme::Custom(ws)),
                Err(_) => Err(CliError::Usage(format!(
                    "cannot parse weights {spec:?}; expected 'uniform' or comma-separated numbers"
                ))),
            }
        };
        Ok(DistanceConfig {
            k: self.k,
            l: self.l,
            m: self.m,
            seed: self.seed,
            base: BaseDistanceConfig {
                base: match self.base {
                    BaseKind::W2 => BaseDistance::W2,
                    BaseKind::W1 => BaseDistance::W1,
                    BaseKind::Sliced => BaseDistance::SlicedW1 {
                        projections: self.projections,
                    },
                },
                exact_cap: self.exact_cap,
                seed: 0,
            },
            mu: parse_weights(&self.mu)?,
            nu: parse_weights(&self.nu)?,
            seed_mode: if self.independent_seeds {
                SeedMode::Disjoint
            } else {
                SeedMode::Shared
            },
            ..Default::default()
        })
    }
}

#[derive(Args)]
struct DistArgs {
    #[arg(value_enum)]
    kind: DistKind,
    model1: PathBuf,
    model2: PathBuf,
    #[command(flatten)]
    flags: DistanceFlags,
    /// Write the full report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the per-target breakdown.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Model family: linGauss, linNGauss, GPAddit or GP.
    #[arg(long)]
    parametrization: String,
    /// Node count.
    #[arg(short, long)]
    d: usize,
    /// Expected node degree of the random graph.
    #[arg(long, default_value_t = 3.0)]
    degree: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GeometryArgs {
    /// Connection strengths; five values per model type.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0, 2.0, 5.0])]
    betas: Vec<f64>,
    /// Gauss-Hermite nodes for the exact interventional expectation.
    #[arg(long, default_value_t = 128)]
    quadrature: usize,
    /// Directory for the matrix and embedding CSVs.
    #[arg(long, default_value = "geometry-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SampleEffArgs {
    #[arg(long = "k-grid", value_delimiter = ',', default_values_t = [100usize, 400, 1600, 6400])]
    k_grid: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(short, long, default_value_t = 6)]
    d: usize,
    #[arg(long, default_value_t = 3.0)]
    degree: f64,
    #[arg(long, default_value_t = 100)]
    l: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value = "linGauss")]
    parametrization: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which self-distances to measure. The counterfactual distance at the
    /// default l and m is expensive; opt in with od,id,cd.
    #[arg(long, value_delimiter = ',', default_values_t = ["od".to_string(), "id".to_string()])]
    distances: Vec<String>,
    /// Base distance; the default switches to sliced when the grid exceeds
    /// the exact cap so that all cells use the same estimator.
    #[arg(long, value_enum)]
    base: Option<BaseKind>,
    #[arg(long, default_value_t = 50)]
    projections: usize,
    #[arg(long, default_value_t = 1024)]
    exact_cap: usize,
    #[arg(long, default_value = "sample-eff-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SensitivityMode {
    Mix,
    Mec,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long, value_enum)]
    mode: SensitivityMode,
    /// Model file; defaults to a generated model (mix) or a strong-dependence
    /// discrete chain (mec).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Perturbation grid for mix mode.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])]
    epsilons: Vec<f64>,
    /// Node whose mechanism is mixed (mix mode); defaults to the first node
    /// with parents.
    #[arg(long)]
    node: Option<usize>,
    #[arg(short, long, default_value_t = 5)]
    d: usize,
    #[arg(long, default_value_t = 2.0)]
    degree: f64,
    #[arg(long, default_value = "linGauss")]
    parametrization: String,
    /// Training rows for the Markov-equivalence refits (mec mode).
    #[arg(long, default_value_t = 2000)]
    data_size: usize,
    /// Node cap for Markov-equivalence-class enumeration.
    #[arg(long, default_value_t = 8)]
    mec_cap: usize,
    #[command(flatten)]
    flags: DistanceFlags,
    #[arg(long, default_value = "sensitivity-out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth model (.scm/.json or .bif).
    #[arg(long)]
    truth: PathBuf,
    /// Training data CSV used to refit every submission.
    #[arg(long)]
    data: PathBuf,
    /// Edge-list files produced by discovery methods.
    submissions: Vec<PathBuf>,
    /// Cost of a reversed edge in SHD.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2), default_value_t = 1)]
    shd_reversal_cost: u32,
    #[command(flatten)]
    flags: DistanceFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Dist(args) => cmd_dist(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Geometry(args) => cmd_geometry(args),
        Command::SampleEff(args) => cmd_sample_eff(args),
        Command::Sensitivity(args) => cmd_sensitivity(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn parse_parametrization(s: &str) -> CliResult<Parametrization> {
    Parametrization::parse(s).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown parametrization {s:?}; expected linGauss, linNGauss, GPAddit or GP"
        ))
    })
}

fn cmd_dist(args: DistArgs) -> CliResult<()> {
    let m1 = load_model(&args.model1)?;
    let m2 = load_model(&args.model2)?;
    let cfg = args.flags.build()?;
    let t0 = Instant::now();
    let est = match args.kind {
        DistKind::Od => od(&m1, &m2, &cfg)?,
        DistKind::Id => id_parallel(&m1, &m2, &cfg)?,
        DistKind::Cd => cd_parallel(&m1, &m2, &cfg)?,
    };
    let wall = t0.elapsed().as_secs_f64();
    let kind = match args.kind {
        DistKind::Od => "od",
        DistKind::Id => "id",
        DistKind::Cd => "cd",
    };
    let report = DistanceReport::new(kind, &est, m1.graph().labels(), wall);
    println!("{kind} = {:.6}", est.value);
    if args.verbose {
        for row in &report.breakdown {
            let name = row.target.as_deref().unwrap_or("(empty)");
            println!("  target {name:>10}: weight {:.4}, mean {:.6}", row.weight, row.mean);
        }
        eprintln!("wall clock: {wall:.2}s, seed {}, k {}, l {}, m {}", est.seed, est.k, est.l, est.m);
    }
    if let Some(path) = args.out {
        write_file(&path, &report.to_json())?;
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let p = parse_parametrization(&args.parametrization)?;
    if args.d == 0 {
        return Err(CliError::Usage("need at least one node".into()));
    }
    let m = random_scm(p, args.d, args.degree, args.seed);
    write_file(&args.out, &write_scm_json(&m)?)?;
    println!(
        "wrote {} ({} nodes, {} edges, {})",
        args.out.display(),
        m.node_count(),
        m.graph().edge_count(),
        p.name()
    );
    Ok(())
}

fn cmd_geometry(args: GeometryArgs) -> CliResult<()> {
    let out = run_geometry(&args.betas, args.quadrature)?;
    for (name, contents) in &out.files {
        write_file(&args.out.join(name), contents)?;
    }
    println!(
        "geometry: {} models, outputs in {}",
        out.names.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_sample_eff(args: SampleEffArgs) -> CliResult<()> {
    let p = parse_parametrization(&args.parametrization)?;
    let max_k = args.k_grid.iter().copied().max().unwrap_or(0);
    let base_kind = args.base.unwrap_or(if max_k > args.exact_cap {
        BaseKind::Sliced
    } else {
        BaseKind::W2
    });
    let base = BaseDistanceConfig {
        base: match base_kind {
            BaseKind::W2 => BaseDistance::W2,
            BaseKind::W1 => BaseDistance::W1,
            BaseKind::Sliced => BaseDistance::SlicedW1 { projections: args.projections },
        },
        exact_cap: args.exact_cap,
        seed: 0,
    };
    let (rows, report) = run_sample_efficiency(
        &args.k_grid,
        args.repeats,
        args.d,
        args.degree,
        args.l,
        args.m,
        p,
        args.seed,
        &args.distances,
        base,
    )?;
    write_file(&args.out.join("sample_eff.csv"), &sample_eff_csv(&rows))?;
    write_file(&args.out.join("manifest.json"), &report.to_json())?;
    println!(
        "sample-eff: {} cells, outputs in {}",
        rows.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_sensitivity(args: SensitivityArgs) -> CliResult<()> {
    let mut cfg = args.flags.build()?;
    match args.mode {
        SensitivityMode::Mix => {
            let model = match &args.model {
                Some(path) => load_model(path)?,
                None => {
                    let p = parse_parametrization(&args.parametrization)?;
                    random_scm(p, args.d, args.degree, mix(cfg.seed, 0, 0x4D49_58, 0))
                }
            };
            let node = match args.node {
                Some(n) => n,
                None => (0..model.node_count())
                    .find(|&v| !model.graph().parents(v).is_empty())
                    .ok_or_else(|| CliError::Usage("the model has no non-root node to perturb".into()))?,
            };
            let (rows, report) = run_sensitivity_mix(
                &model,
                node,
                &args.epsilons,
                &cfg,
                mix(cfg.seed, 1, 0x4D49_58, 1),
            )?;
            write_file(&args.out.join("sensitivity_mix.csv"), &sensitivity_mix_csv(&rows))?;
            write_file(&args.out.join("manifest.json"), &report.to_json())?;
            println!(
                "sensitivity mix: spearman {}",
                report.params["spearman"]
            );
        }
        SensitivityMode::Mec => {
            let truth = match &args.model {
                Some(path) => load_model(path)?,
                None => run::strong_chain_bayes_net(args.d),
            };
            if cfg.k > cfg.base.exact_cap {
                cfg.base.exact_cap = cfg.k;
            }
            let out = run_sensitivity_mec(&truth, args.data_size, &cfg, args.mec_cap)?;
            write_file(&args.out.join("sensitivity_mec.csv"), &sensitivity_mec_csv(&out.rows))?;
            write_file(&args.out.join("manifest.json"), &out.report.to_json())?;
            println!(
                "sensitivity mec: {} members, floors od {:.4} id {:.4}, outputs in {}",
                out.rows.len(),
                out.floor_od,
                out.floor_id,
                args.out.display()
            );
        }
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    if args.submissions.is_empty() {
        return Err(CliError::Usage("no submissions to score".into()));
    }
    let truth = load_model(&args.truth)?;
    let data = run::read_to_string(&args.data)?;
    let cfg = args.flags.build()?;
    let submissions: Vec<(String, String)> = args
        .submissions
        .iter()
        .map(|p| Ok((p.display().to_string(), run::read_to_string(p)?)))
        .collect::<CliResult<_>>()?;
    let (rows, report) = run_eval(&truth, &data, &submissions, &cfg, args.shd_reversal_cost)?;
    print!("{}", eval_table(&rows));
    if let Some(path) = args.out {
        write_file(&path.join("eval.csv"), &eval_table(&rows))?;
        write_file(&path.join("manifest.json"), &report.to_json())?;
    }
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::Usage("every submission failed to score".into()));
    }
    Ok(())
}
