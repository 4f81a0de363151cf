use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gzlef::oracle::DEFAULT_STATE_CAP;
use gzlef_cli::acceptance::Scale;
use gzlef_cli::commands;
use gzlef_cli::config::{Failure, Format, Output, RunConfig};

/// Invariant norms on finite groups and on the lamplighter-type group
/// G_Z = (⊕_Z P) ⋊ Z, with brute-force cross-checks.
///
/// Every command writes one JSON document (or a CSV table with
/// `--format csv`). Exit codes: 0 all checks passed, 1 a check failed,
/// 2 malformed input, 3 a size cap was hit, 4 I/O error.
#[derive(Parser, Debug)]
#[command(name = "gzlef", version)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every randomized selection.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file. For `oracle bfs` this is the binary distance table and
    /// the JSON summary still goes to stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Built-in name (A5, S3, S4, A4, Z2, Z3, Z4) or
    /// {"degree": n, "generators": [[images...], ...]}.
    #[arg(long, global = true, default_value = "A5")]
    group: String,
    /// Thresholds Q as a comma-separated list of rationals, e.g. 0,1/2,1.
    #[arg(long, global = true)]
    q: Option<String>,
    /// Maximum number of states a truncation may have.
    #[arg(long, global = true, env = "GZLEF_STATE_CAP", default_value_t = DEFAULT_STATE_CAP)]
    state_cap: u64,
    /// Maximum bytes for a distance table.
    #[arg(long, global = true, env = "GZLEF_MEMORY_CAP")]
    memory_cap: Option<u64>,
    /// Wall-clock budget in seconds; exceeding it is reported on stderr.
    #[arg(long, global = true, env = "GZLEF_TIME_BUDGET")]
    time_budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Base group statements S1 to S4.
    Props {
        #[command(subcommand)]
        action: PropsAction,
    },
    /// Norms on G_Z and word norms on finite groups.
    Norm {
        #[command(subcommand)]
        action: NormAction,
    },
    /// Exhaustive searches over finite truncations.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Build and verify a commutator witness for a shift-0 element.
    Decompose {
        /// Element JSON, inline or a file path.
        #[arg(long)]
        element: String,
        /// k for a [k,t]-commutator (any nonzero integer) or `pm` for [±,t].
        #[arg(long, allow_hyphen_values = true)]
        kind: String,
    },
    /// The map into a finite truncation.
    AlmostHom {
        #[command(subcommand)]
        action: AlmostHomAction,
    },
    /// Weight-function axioms.
    Axioms {
        #[command(subcommand)]
        action: AxiomsAction,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(value_enum, default_value_t = Scale::Quick)]
        scale: Scale,
    },
}

#[derive(Subcommand, Debug)]
enum PropsAction {
    /// Check all four statements on --group.
    Check {
        /// Enumerate every tuple instead of class representatives.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Subcommand, Debug)]
enum NormAction {
    /// Norm of an element of G_Z over base --group.
    Eval {
        /// Element JSON, inline or a file path.
        #[arg(long)]
        element: String,
        /// Evaluate in the truncation with window [-n, n].
        #[arg(long)]
        truncated: Option<i64>,
    },
    /// Word norm table of --group.
    Table {
        /// Generator indices as a JSON list (default: the group's generators).
        #[arg(long)]
        generators: Option<String>,
        /// Use the generators as given instead of their conjugacy closure.
        #[arg(long)]
        no_closure: bool,
    },
}

#[derive(Subcommand, Debug)]
enum OracleAction {
    /// Breadth-first search over the truncation with window [-n, n].
    Bfs {
        #[arg(long)]
        window: i64,
        /// Also run the norm and invariance validators on the table.
        #[arg(long)]
        validate: bool,
        /// Disable bottom-up sweeps.
        #[arg(long)]
        top_down: bool,
    },
}

#[derive(Subcommand, Debug)]
enum AlmostHomAction {
    /// Check φ on a finite set K against thresholds --q (default 0..5).
    Verify {
        /// JSON list of elements, inline or a file path.
        #[arg(long)]
        k: String,
    },
}

#[derive(Subcommand, Debug)]
enum AxiomsAction {
    /// Check a weight function, or the weight function of a norm table.
    Validate {
        /// Weight-function JSON or norm-table JSON, inline or a file path.
        #[arg(long)]
        input: String,
        /// T_W, T_IPMG or T_IMG.
        #[arg(long, default_value = "T_IMG")]
        theory: String,
    },
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Output, Failure> {
    match &cli.command {
        Command::Props { action: PropsAction::Check { raw } } => commands::props_check(cfg, *raw),
        Command::Norm { action: NormAction::Eval { element, truncated } } => commands::norm_eval(cfg, element, *truncated),
        Command::Norm { action: NormAction::Table { generators, no_closure } } => {
            commands::norm_table(cfg, generators.as_deref(), !no_closure)
        }
        Command::Oracle { action: OracleAction::Bfs { validate, top_down, .. } } => {
            commands::oracle_bfs(cfg, *validate, *top_down)
        }
        Command::Decompose { element, kind } => commands::decompose(cfg, element, kind),
        Command::AlmostHom { action: AlmostHomAction::Verify { k } } => commands::almost_hom_verify(cfg, k),
        Command::Axioms { action: AxiomsAction::Validate { input, theory } } => {
            commands::axioms_validate(cfg, input, theory)
        }
        Command::Selftest { scale } => commands::selftest(cfg, *scale, &mut |line| eprintln!("{}", line)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool set once");
    }
    let start = std::time::Instant::now();
    let window = match &cli.command {
        Command::Oracle { action: OracleAction::Bfs { window, .. } } => Some(*window),
        Command::Norm { action: NormAction::Eval { truncated, .. } } => *truncated,
        _ => None,
    };
    let default_q = matches!(cli.command, Command::AlmostHom { .. }).then(|| "0,1,2,3,4,5".to_string());
    let q_text = cli.q.clone().or(default_q).unwrap_or_default();
    let result = commands::parse_thresholds(&q_text).and_then(|q| {
        let cfg = RunConfig {
            group: cli.group.clone(),
            window,
            thresholds: q.iter().map(|r| r.to_string()).collect(),
            seed: cli.seed,
            out: cli.out.clone(),
            format: cli.format,
            state_cap: cli.state_cap,
            memory_cap: cli.memory_cap,
            time_budget_secs: cli.time_budget,
        };
        run(&cli, &cfg)
    });
    if let Some(budget) = cli.time_budget {
        if start.elapsed().as_secs() > budget {
            eprintln!("time budget of {} s exceeded ({} s)", budget, start.elapsed().as_secs());
        }
    }
    match result {
        Ok(out) => {
            let text = out.render(cli.format);
            let to_file = cli.out.as_ref().filter(|_| !matches!(cli.command, Command::Oracle { .. }));
            let written = match to_file {
                Some(path) => std::fs::write(path, text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("{}", Failure::from(e));
                return ExitCode::from(4);
            }
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(f) => {
            println!("{}", serde_json::to_string_pretty(&f.to_json()).expect("error serializes"));
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
