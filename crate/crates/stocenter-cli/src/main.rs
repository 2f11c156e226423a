use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use stocenter::gkm::{skc_pipeline, SkcOptions, Strategy, WeightedCollection};
use stocenter::grid_coreset::build_additive_coreset;
use stocenter::io::{parse_shape, shape_to_value, to_json17};
use stocenter::jflat::{sjfc_pipeline, SjfcOptions};
use stocenter::model::{Instance, PointId, Shape};
use stocenter::objective::{expected_objective_exact, expected_objective_mc};
use stocenter::oracle::{
    golden_key, oracle_expected_objective, oracle_flat, oracle_kcenter, oracle_partition_masses,
    oracle_sensitivities, OracleGrid,
};
use stocenter::partition_prob::{build_weighted_image, ImageMode, Partition};
use stocenter::Exec;
use stocenter_cli::acceptance::{self, VerifyConfig};
use stocenter_cli::bench::{run_bench, BenchConfig, Problem};
use stocenter_cli::generate::{generate_instance, GenParams, Kind, Model};
use stocenter_cli::{
    exit_code, install_threads, load_instance, resolve_threads, RunConfig, UsageError,
    VerificationFailed,
};

#[derive(Parser)]
#[command(
    name = "stocenter",
    version,
    about = "Stochastic k-center and j-flat-center toolkit"
)]
struct Cli {
    /// Worker threads; STOCENTER_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected objective of a shape.
    Evaluate(EvaluateArgs),
    /// Additive coreset of one realization.
    GridCoreset(GridArgs),
    /// Probability of every coreset class.
    Partition(PartitionArgs),
    /// Stochastic k-center.
    Solve(SolveArgs),
    /// Stochastic j-flat-center.
    Jflat(JflatArgs),
    /// Brute-force reference values.
    Oracle(OracleArgs),
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Parameter sweep as CSV.
    Bench(BenchArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Shape file: {"kind":"centers",...} or {"kind":"flat",...}.
    #[arg(long)]
    shape: PathBuf,
    /// Monte-Carlo samples instead of the exact evaluator.
    #[arg(long, requires = "seed")]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    /// Comma-separated support indices of the realization; all points by default.
    #[arg(long, value_delimiter = ',')]
    ids: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exhaustive,
    Subsets,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Only the probability of this subset (comma-separated support indices).
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Sampling,
    Enumeration,
    Full,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "sampling")]
    strategy: StrategyArg,
    /// Coreset size M.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    l_exp: Option<usize>,
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    #[arg(long)]
    no_polish: bool,
}

#[derive(Args)]
struct JflatArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    j: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    seed: u64,
    /// Sweep directions.
    #[arg(long)]
    net: Option<usize>,
    /// Sampled realizations N.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long)]
    kernel: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    no_polish: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Also write {key, params, result} to this reference file.
    #[arg(long, global = true)]
    golden: Option<PathBuf>,
    #[command(subcommand)]
    command: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Objective by enumerating every realization.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        shape: PathBuf,
    },
    /// Coreset class masses by grouping every realization.
    Partition {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
    },
    /// k-center optimum by grid search.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 24)]
        resolution: usize,
        #[arg(long, default_value_t = 8)]
        zoom: usize,
    },
    /// j-flat-center optimum by grid search.
    Jflat {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 24)]
        resolution: usize,
        #[arg(long, default_value_t = 8)]
        zoom: usize,
    },
    /// Brute-force sensitivities of the weighted coreset image.
    Sensitivity {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 6)]
        resolution: usize,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_enum, default_value = "existential")]
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 0.5)]
    spread: f64,
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 0.1)]
    p_min: f64,
    #[arg(long, default_value_t = 0.9)]
    p_max: f64,
    /// Locations in the locational model.
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    row_support: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "skc")]
    problem: Problem,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "uniform,clustered,annulus"
    )]
    kinds: Vec<Kind>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "existential")]
    models: Vec<Model>,
    #[arg(long, value_delimiter = ',', default_value = "8,16")]
    n: Vec<usize>,
    /// k for skc, j for sjfc.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    oracle_max_n: usize,
    #[arg(long, default_value_t = 500)]
    samples: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: u64,
    /// Scale every computed partition mass by (1 + x).
    #[arg(long, default_value_t = 0.0)]
    perturb_weights: f64,
    /// Additional checks on this instance.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Run only these criteria (1 to 11).
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(output: Option<&Path>, cfg: &RunConfig, result: impl Serialize) -> Result<()> {
    emit(
        output,
        &to_json17(&json!({ "config": cfg, "result": result })),
    )
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(UsageError(format!("--eps {eps} must lie in (0,1)")).into())
    }
}

fn ids_or_all(ids: Option<Vec<usize>>, inst: &Instance) -> Vec<PointId> {
    ids.unwrap_or_else(|| (0..inst.support().len()).collect())
        .into_iter()
        .map(PointId)
        .collect()
}

fn load_shape(path: &Path) -> Result<Shape> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    parse_shape(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}

fn base(command: &str, cli_threads: Option<usize>, output: &Option<PathBuf>) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    cfg.threads = cli_threads;
    cfg.output = output.clone();
    cfg
}

fn run(cli: Cli) -> Result<()> {
    let threads = resolve_threads(cli.threads)?;
    install_threads(threads);
    let exec = Exec::default();
    let out = cli.output.as_deref();
    match cli.command {
        Command::Evaluate(a) => {
            let inst = load_instance(&a.instance)?;
            let shape = load_shape(&a.shape)?;
            let mut cfg =
                base("evaluate", threads, &cli.output).with("shape", shape_to_value(&shape));
            cfg.instance = Some(a.instance);
            cfg.seed = a.seed;
            let value = match a.samples {
                Some(s) => {
                    cfg = cfg.with("samples", s);
                    expected_objective_mc(&inst, &shape, s, a.seed.unwrap_or_default(), exec)?
                }
                None => expected_objective_exact(&inst, &shape),
            };
            emit_json(out, &cfg, value)
        }
        Command::GridCoreset(a) => {
            check_eps(a.eps)?;
            let inst = load_instance(&a.instance)?;
            let ids = ids_or_all(a.ids, &inst);
            let mut cfg = base("grid-coreset", threads, &cli.output).with("ids", &ids);
            (cfg.instance, cfg.k, cfg.eps) = (Some(a.instance), Some(a.k), Some(a.eps));
            let r = build_additive_coreset(&ids, inst.support(), a.k, a.eps)?;
            let cells: Vec<Value> = r
                .cells
                .iter()
                .map(|(c, p)| json!({ "cell": c, "point": p }))
                .collect();
            emit_json(
                out,
                &cfg,
                json!({ "coreset": r.coreset, "grid": r.grid, "cells": cells, "r": r.r, "a": r.a, "stage": r.stage }),
            )
        }
        Command::Partition(a) => {
            check_eps(a.eps)?;
            let inst = load_instance(&a.instance)?;
            let mut cfg = base("partition", threads, &cli.output);
            (cfg.instance, cfg.k, cfg.eps) = (Some(a.instance), Some(a.k), Some(a.eps));
            if let Some(s) = a.subset {
                let s: Vec<PointId> = s.into_iter().map(PointId).collect();
                let part = Partition::new(&inst, a.k, a.eps)?;
                let cfg = cfg.with("subset", &s);
                return emit_json(
                    out,
                    &cfg,
                    json!({ "subset": s, "probability": part.prob(&s)? }),
                );
            }
            let mode = match a.mode {
                ModeArg::Exhaustive => ImageMode::Exhaustive,
                ModeArg::Subsets => ImageMode::SubsetEnumeration,
                ModeArg::Auto => match stocenter::model::RealizationSpace::new(&inst, false) {
                    Ok(s) if s.len() <= 1 << 20 => ImageMode::Exhaustive,
                    _ => ImageMode::SubsetEnumeration,
                },
            };
            let cfg = cfg.with("mode", mode);
            emit_json(
                out,
                &cfg,
                build_weighted_image(&inst, a.k, a.eps, mode, exec)?,
            )
        }
        Command::Solve(a) => {
            check_eps(a.eps)?;
            let inst = load_instance(&a.instance)?;
            let strategy = match a.strategy {
                StrategyArg::Sampling => Strategy::ImportanceSampling,
                StrategyArg::Enumeration => Strategy::Enumeration,
                StrategyArg::Full => Strategy::Full,
            };
            let opts = SkcOptions {
                strategy,
                seed: a.seed,
                m: a.m,
                l_exp: a.l_exp,
                rounds: a.rounds,
                polish: !a.no_polish,
                exec,
                ..Default::default()
            };
            let mut cfg = base("solve", threads, &cli.output)
                .with("m", a.m)
                .with("l_exp", a.l_exp)
                .with("rounds", a.rounds)
                .with("polish", opts.polish);
            (cfg.instance, cfg.k, cfg.eps, cfg.seed) =
                (Some(a.instance), Some(a.k), Some(a.eps), Some(a.seed));
            cfg.strategy = Some(format!("{strategy:?}"));
            emit_json(out, &cfg, skc_pipeline(&inst, a.k, a.eps, &opts)?)
        }
        Command::Jflat(a) => {
            check_eps(a.eps)?;
            let inst = load_instance(&a.instance)?;
            let opts = SjfcOptions {
                seed: a.seed,
                net_size: a.net,
                samples: a.samples,
                kernel_size: a.kernel,
                m: a.m,
                polish: !a.no_polish,
                exec,
                ..Default::default()
            };
            let mut cfg = base("jflat", threads, &cli.output)
                .with("net", a.net)
                .with("samples", a.samples)
                .with("kernel", a.kernel)
                .with("m", a.m)
                .with("polish", opts.polish);
            (cfg.instance, cfg.j, cfg.eps, cfg.seed) =
                (Some(a.instance), Some(a.j), Some(a.eps), Some(a.seed));
            let r = sjfc_pipeline(&inst, a.j, a.eps, &opts)?;
            let flat = shape_to_value(&Shape::Flat(r.flat.clone()));
            emit_json(
                out,
                &cfg,
                json!({
                    "flat": flat,
                    "value": r.value,
                    "value_unpolished": r.value_unpolished,
                    "estimate": r.estimate,
                    "case": r.case,
                    "total_probability": r.total_probability,
                    "coreset_sizes": [r.coreset_sizes.0, r.coreset_sizes.1],
                    "outside_mass": r.outside_mass,
                    "eps_prime": r.eps_prime,
                }),
            )
        }
        Command::Oracle(a) => run_oracle(a, threads, &cli.output, exec),
        Command::Generate(a) => {
            let params = GenParams {
                scale: a.scale,
                clusters: a.clusters,
                spread: a.spread,
                radius: a.radius,
                width: a.width,
                p_min: a.p_min,
                p_max: a.p_max,
                m: a.m,
                row_support: a.row_support,
            };
            if !(0.0..=1.0).contains(&a.p_min)
                || !(a.p_min..=1.0).contains(&a.p_max)
                || a.n == 0
                || a.d == 0
            {
                return Err(UsageError("need n, d ≥ 1 and 0 ≤ p-min ≤ p-max ≤ 1".into()).into());
            }
            let inst = generate_instance(a.kind, a.model, a.n, a.d, a.seed, &params);
            emit(out, &to_json17(&stocenter::io::instance_to_value(&inst)))
        }
        Command::Bench(a) => {
            let cfg = BenchConfig {
                problem: a.problem,
                kinds: a.kinds,
                models: a.models,
                ns: a.n,
                ks: a.k,
                epsilons: a.eps,
                d: a.d,
                seed: a.seed,
                oracle_max_n: a.oracle_max_n,
                samples: a.samples,
                params: GenParams::default(),
            };
            if let Some(e) = cfg.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                return Err(UsageError(format!("--eps {e} must lie in (0,1)")).into());
            }
            let mut run_cfg = base("bench", threads, &cli.output).with("bench", &cfg);
            run_cfg.seed = Some(a.seed);
            let csv = run_bench(&cfg, exec)?;
            let config_text = to_json17(&json!({ "config": run_cfg }));
            match out {
                Some(p) => {
                    emit(Some(p), &csv)?;
                    emit(Some(&p.with_extension("config.json")), &config_text)
                }
                None => {
                    eprint!("{config_text}");
                    emit(None, &csv)
                }
            }
        }
        Command::Verify(a) => {
            let vcfg = VerifyConfig {
                seed: a.seed,
                perturb_weights: a.perturb_weights,
                exec,
            };
            let supplied = a.instance.as_deref().map(load_instance).transpose()?;
            let mut outcomes = Vec::new();
            let print = |o: &acceptance::Outcome| eprintln!("{}", o.line());
            match &a.criteria {
                Some(ids) => {
                    for &id in ids {
                        if !(1..=12).contains(&id) {
                            return Err(UsageError(format!("criterion {id} does not exist")).into());
                        }
                    }
                    for &id in ids.iter().filter(|&&id| id <= 11) {
                        let o = acceptance::run_criterion(id, &vcfg);
                        print(&o);
                        outcomes.push(o);
                    }
                    if ids.contains(&12) {
                        let o = acceptance::run_determinism(&vcfg, &outcomes);
                        print(&o);
                        outcomes.push(o);
                    }
                }
                None => outcomes = acceptance::run_all(&vcfg, print),
            }
            if let Some(inst) = &supplied {
                let o = acceptance::instance_checks(inst, &vcfg)?;
                print(&o);
                outcomes.push(o);
            }
            let mut cfg = base("verify", threads, &cli.output)
                .with("perturb_weights", a.perturb_weights)
                .with("criteria", &a.criteria);
            cfg.seed = Some(a.seed);
            cfg.instance = a.instance;
            let mut report = acceptance::report_json(&vcfg, &outcomes);
            report["config"] = json!(cfg);
            emit(out, &to_json17(&report))?;
            let failed: Vec<String> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| o.id.to_string())
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(VerificationFailed(format!("criteria {}", failed.join(", "))).into())
            }
        }
    }
}

fn run_oracle(
    a: OracleArgs,
    threads: Option<usize>,
    output: &Option<PathBuf>,
    exec: Exec,
) -> Result<()> {
    let mut cfg = base("oracle", threads, output).with("golden", &a.golden);
    let (inst_path, params, result): (PathBuf, String, Value) = match a.command {
        OracleCommand::Evaluate { instance, shape } => {
            let inst = load_instance(&instance)?;
            let s = load_shape(&shape)?;
            let params = format!("evaluate {}", to_json17(&shape_to_value(&s)));
            cfg = cfg
                .with("subcommand", "evaluate")
                .with("shape", shape_to_value(&s));
            (
                instance,
                params,
                json!(oracle_expected_objective(&inst, &s, exec)?),
            )
        }
        OracleCommand::Partition { instance, k, eps } => {
            check_eps(eps)?;
            let inst = load_instance(&instance)?;
            (cfg.k, cfg.eps) = (Some(k), Some(eps));
            cfg = cfg.with("subcommand", "partition");
            (
                instance,
                format!("partition k={k} eps={eps:e}"),
                json!(oracle_partition_masses(&inst, k, eps, exec)?),
            )
        }
        OracleCommand::Solve {
            instance,
            k,
            resolution,
            zoom,
        } => {
            let inst = load_instance(&instance)?;
            let grid = OracleGrid { resolution, zoom };
            cfg.k = Some(k);
            cfg = cfg.with("subcommand", "solve").with("grid", grid);
            let (c, r) = oracle_kcenter(&inst, k, &grid, exec)?;
            (
                instance,
                format!("solve k={k} res={resolution} zoom={zoom}"),
                json!({ "centers": c, "report": r }),
            )
        }
        OracleCommand::Jflat {
            instance,
            j,
            resolution,
            zoom,
        } => {
            let inst = load_instance(&instance)?;
            let grid = OracleGrid { resolution, zoom };
            cfg.j = Some(j);
            cfg = cfg.with("subcommand", "jflat").with("grid", grid);
            let (f, r) = oracle_flat(&inst, j, &grid, exec)?;
            let params = format!("jflat j={j} res={resolution} zoom={zoom}");
            (
                instance,
                params,
                json!({ "flat": shape_to_value(&Shape::Flat(f)), "report": r }),
            )
        }
        OracleCommand::Sensitivity {
            instance,
            k,
            eps,
            resolution,
        } => {
            check_eps(eps)?;
            let inst = load_instance(&instance)?;
            (cfg.k, cfg.eps) = (Some(k), Some(eps));
            cfg = cfg
                .with("subcommand", "sensitivity")
                .with("resolution", resolution);
            let img = build_weighted_image(&inst, k, eps, ImageMode::Exhaustive, exec)?;
            let coll = WeightedCollection::from_image(&inst, &img);
            let s = oracle_sensitivities(&coll, k, resolution)?;
            let params = format!("sensitivity k={k} eps={eps:e} res={resolution}");
            (
                instance,
                params,
                json!({ "values": s.values, "total": s.total() }),
            )
        }
    };
    let inst = load_instance(&inst_path)?;
    cfg.instance = Some(inst_path);
    if let Some(g) = &a.golden {
        let key = golden_key(&inst, &params);
        let text = to_json17(&json!({ "key": key, "params": params, "result": result }));
        std::fs::write(g, text).with_context(|| format!("writing {}", g.display()))?;
    }
    emit_json(output.as_deref(), &cfg, result)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
