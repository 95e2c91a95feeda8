//! `lrss`: build a grouped repairable sharing on disk, break nodes, repair
//! them, recover the secret and run the threat analyses.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 I/O, 4 protocol or
//! arithmetic failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lrss_core::protocol::{Placement, SetupConfig, SystemState, REGISTRY_FILE};
use lrss_core::threat::{self, CompromiseModel, EnumerationRecord, ProbabilityRecord, Scheme};
use lrss_core::{Error, ErrorKind, Exec, MERSENNE_31};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "lrss",
    version,
    about = "Locally repairable grouped secret sharing"
)]
struct Cli {
    /// Directory holding registry.json and the node files.
    #[arg(
        long,
        env = "LRSS_STATE_DIR",
        default_value = "lrss-state",
        global = true
    )]
    state_dir: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    Random,
    AntiReciprocal,
    Reciprocal,
    None,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Random => Placement::Random,
            PlacementArg::AntiReciprocal => Placement::AntiReciprocal,
            PlacementArg::Reciprocal => Placement::Reciprocal,
            PlacementArg::None => Placement::Withheld,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Analytic,
    Mc,
    Enum,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a secret and write registry plus node files.
    Setup {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        secret: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = MERSENNE_31)]
        modulus: u64,
        /// Never let two groups host each other's sub-share.
        #[arg(long, conflicts_with = "placement")]
        anti_reciprocal: bool,
        #[arg(long, value_enum)]
        placement: Option<PlacementArg>,
    },
    /// Erase a node's private data.
    Fail {
        #[arg(long)]
        node: usize,
    },
    /// Run the repair protocol for a failed node.
    Repair {
        #[arg(long)]
        node: usize,
    },
    /// Recover the secret from the listed participants.
    Recover {
        #[arg(long, value_delimiter = ',', required = true)]
        participants: Vec<usize>,
    },
    /// Compromise probabilities and worst-case compromise sets.
    Attack {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        q: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// enum mode: sweep every anti-reciprocal placement instead of the
        /// stored one.
        #[arg(long)]
        anti_reciprocal: bool,
    },
}

fn emit<T: Serialize>(format: Format, record: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string(record).expect("record serializes")
        ),
        Format::Text => println!("{}", text()),
    }
}

fn load(dir: &Path) -> Result<SystemState, Error> {
    if !dir.join(REGISTRY_FILE).exists() {
        return Err(Error::Config(format!(
            "no system in {}; run `lrss setup` first",
            dir.display()
        )));
    }
    SystemState::load(dir)
}

fn join(ids: &[usize]) -> String {
    ids.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Serialize)]
struct GroupSummary {
    id: usize,
    members: Vec<usize>,
    x_lambda: String,
    digest_hex: String,
}

#[derive(Serialize)]
struct SetupSummary {
    k: usize,
    n: usize,
    m: usize,
    modulus: u64,
    placement: &'static str,
    groups: Vec<GroupSummary>,
    files: usize,
}

#[derive(Serialize)]
struct NodeEvent {
    event: &'static str,
    node: usize,
}

#[derive(Serialize)]
struct RepairRecord {
    node: usize,
    x: String,
    trace: Vec<String>,
}

#[derive(Serialize)]
struct SecretRecord {
    secret: String,
    participants: Vec<usize>,
}

#[derive(Serialize)]
struct SweepRecord {
    #[serde(flatten)]
    enumeration: EnumerationRecord,
    placements: usize,
    max_min_compromise_size: usize,
    worst_placement: Vec<usize>,
}

fn run(cli: Cli) -> Result<(), Error> {
    let dir = cli.state_dir.as_path();
    let format = cli.format;
    match cli.command {
        Command::Setup {
            k,
            n,
            m,
            secret,
            seed,
            modulus,
            anti_reciprocal,
            placement,
        } => {
            let placement = placement
                .map(Placement::from)
                .unwrap_or_else(|| Placement::from_flag(anti_reciprocal));
            let config = SetupConfig {
                k,
                n,
                m,
                modulus,
                secret,
                seed,
                placement,
            };
            let sys = SystemState::setup(&config)?;
            if dir.exists() {
                for entry in fs::read_dir(dir)? {
                    let path = entry?.path();
                    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
                    if name.starts_with("node-") && name.ends_with(".json") {
                        fs::remove_file(&path)?;
                    }
                }
            }
            let files = sys.save(dir)?;
            let reg = sys.registry();
            let summary = SetupSummary {
                k,
                n,
                m,
                modulus,
                placement: placement.name(),
                groups: reg
                    .groups
                    .iter()
                    .map(|g| GroupSummary {
                        id: g.id,
                        members: g.members.clone(),
                        x_lambda: g.x_lambda.to_string(),
                        digest_hex: g.digest.to_hex(),
                    })
                    .collect(),
                files: files.len(),
            };
            emit(format, &summary, || {
                let mut out = format!(
                    "({k},{n}) sharing in {m} groups over GF({modulus}), placement {}; {} files in {}",
                    placement.name(),
                    files.len(),
                    dir.display()
                );
                for g in &summary.groups {
                    out.push_str(&format!(
                        "\ngroup {} members {} x_lambda {} digest {}",
                        g.id,
                        join(&g.members),
                        g.x_lambda,
                        g.digest_hex
                    ));
                }
                out
            });
        }
        Command::Fail { node } => {
            let mut sys = load(dir)?;
            sys.fail(node)?;
            sys.save(dir)?;
            emit(
                format,
                &NodeEvent {
                    event: "failed",
                    node,
                },
                || format!("P{node} failed; private data erased"),
            );
        }
        Command::Repair { node } => {
            let mut sys = load(dir)?;
            let identity = sys.identity(node)?;
            let outcome = sys.request_repair(identity, node)?;
            sys.save(dir)?;
            let record = RepairRecord {
                node,
                x: outcome.share.x.to_string(),
                trace: outcome.trace.lines(),
            };
            emit(format, &record, || {
                format!("{}repaired P{node}", outcome.trace)
            });
        }
        Command::Recover { participants } => {
            let sys = load(dir)?;
            let secret = sys.recover_secret(&participants)?;
            emit(
                format,
                &SecretRecord {
                    secret: secret.to_string(),
                    participants,
                },
                || secret.to_string(),
            );
        }
        Command::Attack {
            mode,
            q,
            trials,
            seed,
            anti_reciprocal,
        } => match mode {
            Mode::Analytic => {
                for q in q {
                    let r = ProbabilityRecord::analytic(q)?;
                    emit(format, &r, || {
                        format!("q={} p1={} p2={}", r.q, r.p1_exact, r.p2_exact)
                    });
                }
            }
            Mode::Mc => {
                let seed =
                    seed.ok_or_else(|| Error::Config("--seed is required for mc mode".into()))?;
                for q in q {
                    let model = CompromiseModel::new(q, trials, seed)?;
                    for scheme in [Scheme::Baseline4, Scheme::Sss5] {
                        let r = ProbabilityRecord::monte_carlo(&model, scheme, Exec::default())?;
                        emit(format, &r, || {
                            format!(
                                "q={} scheme={} p_empirical={:.6} p1={} p2={} trials={} seed={}",
                                r.q,
                                scheme.name(),
                                r.p_empirical.unwrap_or(f64::NAN),
                                r.p1_exact,
                                r.p2_exact,
                                trials,
                                seed
                            )
                        });
                    }
                }
            }
            Mode::Enum => {
                let sys = load(dir)?;
                if anti_reciprocal {
                    let sweep = threat::sweep_placements(&sys, true)?;
                    let r = SweepRecord {
                        enumeration: EnumerationRecord {
                            placement_mode: "anti-reciprocal-sweep".into(),
                            min_compromise_size: Some(sweep.min),
                            witness_subset: sweep.witness.clone(),
                        },
                        placements: sweep.placements,
                        max_min_compromise_size: sweep.max,
                        worst_placement: sweep.worst_placement.clone(),
                    };
                    emit(format, &r, || {
                        format!(
                            "placement=anti-reciprocal-sweep placements={} min_compromise_size={} witness={} worst_placement={}",
                            sweep.placements,
                            sweep.min,
                            join(&sweep.witness),
                            join(&sweep.worst_placement)
                        )
                    });
                } else {
                    let min = threat::min_compromise_size(&sys)?;
                    let r = EnumerationRecord {
                        placement_mode: threat::placement_mode(&sys).into(),
                        min_compromise_size: min.as_ref().map(|m| m.size),
                        witness_subset: min.map(|m| m.witness).unwrap_or_default(),
                    };
                    emit(format, &r, || {
                        format!(
                            "placement={} min_compromise_size={} witness={}",
                            r.placement_mode,
                            r.min_compromise_size
                                .map_or("unreachable".to_string(), |s| s.to_string()),
                            join(&r.witness_subset)
                        )
                    });
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Io => 3,
                ErrorKind::Protocol => 4,
            })
        }
    }
}
