//! `dosom`: graph balls, local density of states, measure distances and the
//! verification experiments.
//!
//! Exit codes: 0 when every asserted row passes, 1 when an assertion fails,
//! 2 on usage, configuration or runtime errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use dosom::approx::LipschitzTestFunction;
use dosom::dos::{local_dos_functional, Backend, EigMode};
use dosom::graph::{ball_cardinality, build_ball, GraphFamily};
use dosom::metrics::{d_inf, d_krw, d_w, DiscreteMeasure};
use dosom::operators::assemble_hamiltonian;
use dosom::potentials::PotentialSpec;
use dosom_experiments::{ExperimentConfig, ExperimentId};

#[derive(Parser, Debug)]
#[command(name = "dosom", version, about = "Density of states outer measure experiments")]
struct Cli {
    /// JSON experiment configuration (`experiment` only).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for experiment results.
    #[arg(long, global = true, env = "DOSOM_OUT")]
    out: Option<PathBuf>,
    /// Base seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Same as `--threads 1`.
    #[arg(long, global = true)]
    single_thread: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a rooted ball and print its size; optionally write the edge list.
    Ball {
        #[arg(long)]
        family: GraphFamily,
        #[arg(long)]
        radius: u32,
        /// Write the edge list as CSV to this file.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Local DOS functional `(1/|Λ_L|) Tr(P_L f(H) P_L)` for a tent function `f`.
    Dos {
        #[arg(long)]
        family: GraphFamily,
        #[arg(long)]
        l: u32,
        /// Potential as JSON, e.g. `{"kind":"constant","value":0.5}`.
        #[arg(long, default_value = r#"{"kind":"zero"}"#)]
        potential: String,
        /// `finite-volume`, `ambient` or `moment:<n>`.
        #[arg(long, default_value = "finite-volume")]
        backend: String,
        /// Tent `center:half_width:height`.
        #[arg(long, default_value = "0:1:0.5")]
        tent: String,
    },
    /// Distances between two discrete measures given as `x:w,x:w,...`.
    Metric {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Run one experiment, e.g. `E-LATTICE-LIP`.
    Experiment { id: Option<String> },
    /// Run every experiment with its default configuration.
    All,
}

fn parse_backend(s: &str) -> anyhow::Result<Backend> {
    match s {
        "finite-volume" | "fv" => Ok(Backend::Eig { mode: EigMode::FiniteVolume }),
        "ambient" => Ok(Backend::Eig { mode: EigMode::Ambient }),
        _ => {
            let n = s.strip_prefix("moment:").and_then(|n| n.parse().ok()).ok_or_else(|| anyhow!("bad backend {s:?}"))?;
            Ok(Backend::MomentExact { n_max: n })
        }
    }
}

fn parse_measure(s: &str) -> anyhow::Result<DiscreteMeasure> {
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for part in s.split(',') {
        let (x, w) = part.split_once(':').ok_or_else(|| anyhow!("expected x:w, got {part:?}"))?;
        atoms.push(x.trim().parse::<f64>()?);
        weights.push(w.trim().parse::<f64>()?);
    }
    Ok(DiscreteMeasure::new(atoms, weights)?)
}

fn threads(cli: &Cli, cfg: Option<&ExperimentConfig>) -> usize {
    if cli.single_thread {
        return 1;
    }
    cli.threads
        .or_else(|| cfg.and_then(|c| c.threads))
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("results"))
}

/// Runs one experiment and writes its files; returns whether every assertion held.
fn run_experiment(cli: &Cli, mut cfg: ExperimentConfig) -> anyhow::Result<bool> {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let dir = out_dir(cli, &cfg);
    let out = dosom_experiments::run(&cfg, threads(cli, Some(&cfg)))?;
    let files = out.write(&dir)?;
    let failures = out.failures();
    println!(
        "{}: {} rows, {} asserted, {} failed -> {}",
        out.experiment,
        out.rows.len(),
        out.asserted(),
        failures.len(),
        files.csv.display()
    );
    for r in &failures {
        eprintln!(
            "FAIL {} {} {} [{}]: measured {} {} {} (slack {})",
            r.experiment,
            r.case,
            r.quantity,
            r.params,
            r.measured,
            r.relation,
            r.bound.unwrap_or(f64::NAN),
            r.slack.unwrap_or(0.0)
        );
    }
    Ok(failures.is_empty())
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Ball { family, radius, edges } => {
            let g = build_ball(*family, *radius)?;
            let report = serde_json::json!({
                "family": family.to_string(),
                "radius": radius,
                "vertices": g.len(),
                "edges": g.edge_count(),
                "closed_form": ball_cardinality(*family, *radius)?,
            });
            println!("{report}");
            if let Some(path) = edges {
                g.write_edge_list(fs::File::create(path)?)?;
            }
            Ok(true)
        }
        Command::Dos { family, l, potential, backend, tent } => {
            let spec: PotentialSpec = serde_json::from_str(potential).context("parsing --potential")?;
            let backend = parse_backend(backend)?;
            let t: Vec<f64> = tent.split(':').map(|x| x.parse::<f64>()).collect::<Result<_, _>>()?;
            if t.len() != 3 {
                bail!("--tent expects center:half_width:height");
            }
            let f = LipschitzTestFunction::hat(t[0], t[1], t[2])?;
            let g = Arc::new(build_ball(*family, backend.required_radius(*l))?);
            let h = assemble_hamiltonian(g, &spec)?;
            let est = local_dos_functional(&h, *l, &f, backend, None)?;
            println!("{}", serde_json::to_string(&est)?);
            Ok(true)
        }
        Command::Metric { a, b } => {
            let (a, b) = (parse_measure(a)?, parse_measure(b)?);
            let report = serde_json::json!({
                "d_w": d_w(&a, &b)?,
                "d_krw": d_krw(&a, &b),
                "d_inf": d_inf(&a, &b),
            });
            println!("{report}");
            Ok(true)
        }
        Command::Experiment { id } => {
            let cfg = match (&cli.config, id) {
                (Some(path), None) => load_config(path)?,
                (Some(path), Some(id)) => {
                    let cfg = load_config(path)?;
                    if cfg.id() != id.parse::<ExperimentId>()? {
                        bail!("configuration is for {}, not {id}", cfg.id());
                    }
                    cfg
                }
                (None, Some(id)) => ExperimentConfig::default_for(id.parse()?),
                (None, None) => bail!("give an experiment id or --config"),
            };
            run_experiment(cli, cfg)
        }
        Command::All => {
            let mut ok = true;
            for id in ExperimentId::ALL {
                ok &= run_experiment(cli, ExperimentConfig::default_for(id))?;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
