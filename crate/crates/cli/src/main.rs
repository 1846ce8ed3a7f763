mod anonymize;

use anonymize::{ingest_csv, publish, AnonymizeConfig, AnonymizeError, Mode, Normalization};
use clap::{Parser, Subcommand};
use divclust::gen::{gadget_from_3dm, random_3dm, random_euclidean};
use divclust::instance::{Clustering, Instance};
use divclust::oracle::{exact_solve, exact_solve_outliers, OracleError};
use divclust::outlier::{check_feasible, solve_with_outliers};
use divclust::solver::{solve, SolveError};
use divclust::two_color::{solve_two_color_l, TwoColorError};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

/// Clustering with a diversity constraint: every cluster gets at least l
/// records, all with distinct sensitive values, minimizing the largest
/// cluster radius.
#[derive(Parser)]
#[command(name = "divclust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::ValueEnum, Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct IoArgs {
    /// Instance JSON file.
    #[arg(short, long)]
    input: PathBuf,
    /// Group-size parameter; defaults to the instance's own `l`.
    #[arg(long)]
    l: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance document and test clustering feasibility.
    Check {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        l: Option<usize>,
    },
    /// Cluster with the factor-2 threshold-scan solver.
    Solve(IoArgs),
    /// Exact bottleneck solver for two-color instances (l = 2).
    Solve2c(IoArgs),
    /// Cluster all but the minimum number of outliers.
    SolveOutliers(IoArgs),
    /// Exact solver for tiny instances; reports the optimal radius and
    /// diameter.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        l: Option<usize>,
        /// Drop exactly this many points (optimally chosen).
        #[arg(long)]
        outliers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Anonymize a CSV of microdata: numeric quasi-identifier columns become
    /// coordinates, the sensitive attribute becomes the color.
    Anonymize {
        #[arg(short, long)]
        input: PathBuf,
        /// Comma-separated quasi-identifier column names.
        #[arg(long)]
        qi: String,
        /// Sensitive attribute column name.
        #[arg(long)]
        sa: String,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, value_enum, default_value = "strict")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "minmax")]
        normalize: Normalization,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Uniform points in the unit cube with weighted random colors.
    Euclidean {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated color weights (uniform when omitted).
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a random 3-dimensional-matching instance into a colored graph
    /// whose metric completion is an adversarial 3-color instance (l = 3).
    Gadget {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plant a perfect matching so the optimum is known.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        planted: bool,
        /// Emit one connected component instead of the whole graph.
        #[arg(long)]
        component: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Instance(#[from] divclust::instance::InstanceError),
    #[error("{0}")]
    Solve(SolveError),
    #[error("{0}")]
    TwoColor(TwoColorError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Anonymize(AnonymizeError),
    #[error("instance is infeasible: color {color:?} has {count} of {n} records, more than floor({n}/{l}) = {bound}; use the outlier solver or lower l")]
    Infeasible {
        color: String,
        count: usize,
        n: usize,
        l: usize,
        bound: usize,
    },
    #[error("the gadget expansion is disconnected ({0} components); pick one with --component")]
    Disconnected(usize),
    #[error("no component {0}; the expansion has {1}")]
    NoSuchComponent(usize, usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible { .. } => 2,
            CliError::Solve(SolveError::Infeasible { .. }) => 2,
            CliError::TwoColor(TwoColorError::UnequalClassSizes { .. }) => 2,
            CliError::TwoColor(TwoColorError::UnsupportedL(_)) => 2,
            CliError::Oracle(OracleError::Infeasible) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Check { input, l } => {
            let inst = load_instance(&input)?;
            let l = l.unwrap_or_else(|| inst.l());
            if inst.coords().is_none() {
                // explicit matrices are the only way to smuggle in a non-metric
                inst.check_triangle_inequality()?;
            }
            if check_feasible(&inst, l).map_err(CliError::Solve)? {
                println!(
                    "feasible: {} points, {} colors, l = {l}",
                    inst.n(),
                    inst.color_count()
                );
                Ok(())
            } else {
                let counts = inst.color_counts();
                let (color, &count) = counts
                    .iter()
                    .enumerate()
                    .max_by_key(|(_, &c)| c)
                    .expect("nonempty");
                Err(CliError::Infeasible {
                    color: inst.color_name(color).to_string(),
                    count,
                    n: inst.n(),
                    l,
                    bound: inst.n() / l,
                })
            }
        }
        Command::Solve(io) => {
            let inst = load_instance(&io.input)?;
            let l = io.l.unwrap_or_else(|| inst.l());
            let clustering = solve(&inst, l).map_err(CliError::Solve)?;
            emit_clustering(&clustering, &io)
        }
        Command::Solve2c(io) => {
            let inst = load_instance(&io.input)?;
            let l = io.l.unwrap_or_else(|| inst.l());
            let clustering = solve_two_color_l(&inst, l).map_err(CliError::TwoColor)?;
            emit_clustering(&clustering, &io)
        }
        Command::SolveOutliers(io) => {
            let inst = load_instance(&io.input)?;
            let l = io.l.unwrap_or_else(|| inst.l());
            let clustering = solve_with_outliers(&inst, l).map_err(CliError::Solve)?;
            emit_clustering(&clustering, &io)
        }
        Command::Oracle {
            input,
            l,
            outliers,
            out,
        } => {
            let inst = load_instance(&input)?;
            let l = l.unwrap_or_else(|| inst.l());
            let result = match outliers {
                Some(q) => exact_solve_outliers(&inst, l, q)?,
                None => exact_solve(&inst, l)?,
            };
            let doc = serde_json::json!({
                "optimal_radius": result.optimal_radius,
                "optimal_diameter": result.optimal_diameter,
                "clustering": serde_json::from_str::<serde_json::Value>(
                    &result.clustering.to_json()
                ).expect("clustering is json"),
            });
            write_out(out.as_deref(), &serde_json::to_string_pretty(&doc).unwrap())
        }
        Command::Gen(gen) => match gen {
            GenCommand::Euclidean {
                n,
                k,
                dim,
                seed,
                weights,
                l,
                out,
            } => {
                let weights: Option<Vec<f64>> = weights.map(|w| {
                    w.split(',')
                        .map(|x| x.trim().parse().expect("numeric weight"))
                        .collect()
                });
                let mut inst = random_euclidean(n, k, dim, seed, weights.as_deref());
                inst.set_l(l);
                write_out(out.as_deref(), &inst.to_json())
            }
            GenCommand::Gadget {
                m,
                extra,
                seed,
                planted,
                component,
                out,
            } => {
                let tdm = random_3dm(m, extra, seed, planted);
                let expansion = gadget_from_3dm(&tdm);
                let inst = match component {
                    Some(idx) => {
                        let comps = expansion.component_instances();
                        comps
                            .get(idx)
                            .cloned()
                            .ok_or(CliError::NoSuchComponent(idx, comps.len()))?
                    }
                    None => expansion.instance().map_err(|_| {
                        CliError::Disconnected(expansion.component_instances().len())
                    })?,
                };
                write_out(out.as_deref(), &inst.to_json())
            }
        },
        Command::Anonymize {
            input,
            qi,
            sa,
            l,
            mode,
            normalize,
            out,
            format,
        } => {
            let cfg = AnonymizeConfig {
                qi_columns: qi.split(',').map(|c| c.trim().to_string()).collect(),
                sa_column: sa.trim().to_string(),
                normalization: normalize,
                l,
                mode,
            };
            let file = std::fs::File::open(&input)?;
            let ingested = ingest_csv(file, &cfg).map_err(CliError::Anonymize)?;
            let clustering = match cfg.mode {
                Mode::Strict => solve(&ingested.instance, cfg.l).map_err(CliError::Solve)?,
                Mode::Outliers => {
                    solve_with_outliers(&ingested.instance, cfg.l).map_err(CliError::Solve)?
                }
            };
            let published = publish(&ingested, &clustering, &cfg);
            let text = match format {
                Format::Csv => published.to_csv_sections(),
                Format::Json => published.to_json(),
            };
            write_out(out.as_deref(), &text)
        }
    }
}

fn load_instance(path: &std::path::Path) -> Result<Instance, CliError> {
    let doc = std::fs::read_to_string(path)?;
    Ok(Instance::from_json(&doc)?)
}

fn emit_clustering(clustering: &Clustering, io: &IoArgs) -> Result<(), CliError> {
    let text = match io.format {
        Format::Json => clustering.to_json(),
        Format::Csv => {
            let mut out = String::from("point,cluster,center,radius\n");
            for (ci, cluster) in clustering.clusters.iter().enumerate() {
                for &m in &cluster.members {
                    out.push_str(&format!("{m},{ci},{},{}\n", cluster.center, cluster.radius));
                }
            }
            for &o in &clustering.outliers {
                out.push_str(&format!("{o},suppressed,,\n"));
            }
            out
        }
    };
    write_out(io.out.as_deref(), &text)
}

fn write_out(path: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}{}", if text.ends_with('\n') { "" } else { "\n" }),
    }
    Ok(())
}
