use std::fmt::Write as _;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maxwelter::closedform;
use maxwelter::periodicity::{self, ScanRecord};
use maxwelter::position::parse_squares;
use maxwelter::reduce;
use maxwelter::verify::{self, PositionSpace, Suite, SuiteOptions};
use maxwelter::welter;
use maxwelter::{Convention, Oracle, Outcome, Position, Ruleset, Square};

#[derive(Debug, Parser)]
#[command(
    name = "maxwelter",
    version,
    about = "Exact engine and verification lab for the Max-Welter coin game"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Grundy value of a position as a bare integer.
    Grundy {
        squares: String,
        #[command(flatten)]
        rules: Rules,
    },
    /// Grundy value, outcome and the matching closed-form case.
    Classify { squares: String },
    /// Winning moves, from the oracle and from the closed form.
    Strategy {
        squares: String,
        #[command(flatten)]
        rules: Rules,
    },
    /// Value-preserving reductions and the canonical form.
    Reduce { squares: String },
    /// Welter function by the mating method.
    Welter { squares: String },
    /// Cross-check closed forms against the oracle over a position space.
    Verify(VerifyArgs),
    /// Scan Grundy sequences of translated families.
    Scan(ScanArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct Rules {
    #[arg(long, default_value = "max-welter", value_parser = parse_ruleset)]
    ruleset: Ruleset,
    #[arg(long, default_value = "normal", value_parser = parse_convention)]
    convention: Convention,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite id (e.g. thm2.1) or `all`.
    #[arg(long)]
    suite: String,
    /// Coin counts, `A..B` (inclusive) or a single number.
    #[arg(long, value_parser = parse_k_range)]
    k: RangeInclusive<usize>,
    #[arg(long)]
    max_square: Square,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "0x5EED", value_parser = parse_seed)]
    seed: u64,
    /// Sample cap for prefix replacements per position.
    #[arg(long, default_value_t = verify::DEFAULT_REPLACEMENT_CAP)]
    replacement_cap: usize,
    /// Indices checked past the shift in the thm6.1 suite.
    #[arg(long, default_value_t = verify::DEFAULT_SHIFT_HORIZON)]
    shift_horizon: u64,
    /// Worker threads; defaults to the number of logical CPUs.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Conjecture {
    #[value(name = "6.1")]
    Translation,
    #[value(name = "6.2")]
    Progression,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    conjecture: Conjecture,
    /// First square of the progression (6.2).
    #[arg(long)]
    a: Option<Square>,
    /// Common difference of the progression (6.2).
    #[arg(long)]
    m: Option<Square>,
    /// The progression has k + 1 coins (6.2).
    #[arg(long)]
    k: Option<u64>,
    /// Base position (6.1).
    #[arg(long)]
    squares: Option<String>,
    #[arg(long)]
    horizon: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Directory of the built web UI.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Maximum number of live game sessions.
    #[arg(long, default_value_t = maxwelter_service::session::DEFAULT_SESSION_CAP)]
    sessions: usize,
}

/// Exit code 1 is reserved for counterexamples; every other failure is 2.
enum Failure {
    Error(String),
    Counterexamples,
}

impl From<maxwelter::Error> for Failure {
    fn from(e: maxwelter::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn parse_ruleset(s: &str) -> Result<Ruleset, String> {
    s.parse().map_err(|e: maxwelter::Error| e.to_string())
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    s.parse().map_err(|e: maxwelter::Error| e.to_string())
}

fn parse_k_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{t}` is not a coin count; expected A..B, e.g. 2..5"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?),
        None => {
            let k = num(s)?;
            (k, k)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("coin-count range `{s}` is empty; need 1 <= A <= B"));
    }
    Ok(lo..=hi)
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("`{s}` is not a seed; use decimal or 0x-prefixed hex"))
}

/// Parses squares, sorting with a warning; duplicates are an error.
fn read_position(s: &str) -> Result<Position, Failure> {
    let squares = parse_squares(s)?;
    if squares.windows(2).any(|w| w[0] > w[1]) {
        eprintln!("warning: squares `{s}` are not ascending; sorting them");
    }
    Ok(Position::new(squares)?)
}

fn write_out(path: Option<&PathBuf>, text: &str) -> CmdResult {
    if let Some(path) = path {
        fs::write(path, text)
            .map_err(|e| Failure::Error(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn install_pool(jobs: Option<usize>) -> CmdResult {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Error("--jobs must be at least 1".into()));
        }
        // Fails only if a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let oracle = Oracle::shared();
    match cli.command {
        Command::Grundy { squares, rules } => {
            let p = read_position(&squares)?;
            println!("{}", oracle.grundy(&p, rules.ruleset, rules.convention)?);
        }
        Command::Classify { squares } => {
            let p = read_position(&squares)?;
            let g = oracle.grundy(&p, Ruleset::MaxWelter, Convention::Normal)?;
            let rule = if p.len() >= 2 {
                closedform::matching_rule(&p)?.tag()
            } else {
                closedform::Rule::None.tag()
            };
            println!("grundy={g} outcome={} rule={rule}", Outcome::of(g));
        }
        Command::Strategy { squares, rules } => strategy(oracle, &squares, &rules)?,
        Command::Reduce { squares } => reduce_cmd(oracle, &squares)?,
        Command::Welter { squares } => {
            let p = read_position(&squares)?;
            let m = welter::mate(&p);
            let pairs = m
                .pairs
                .iter()
                .map(|(a, b)| format!("({a},{b})"))
                .collect::<Vec<_>>()
                .join(" ");
            println!("position={p}");
            println!("pairs={pairs}");
            match m.spinster {
                Some(s) => println!("spinster={s}"),
                None => println!("spinster=none"),
            }
            println!("value={}", m.value);
        }
        Command::Verify(args) => verify_cmd(oracle, args)?,
        Command::Scan(args) => scan(oracle, args)?,
        Command::Serve(args) => serve(args)?,
    }
    Ok(())
}

fn strategy(oracle: &Oracle, squares: &str, rules: &Rules) -> CmdResult {
    let p = read_position(squares)?;
    let (r, c) = (rules.ruleset, rules.convention);
    let g = oracle.grundy(&p, r, c)?;
    println!(
        "position={p} ruleset={r} convention={c} grundy={g} outcome={}",
        Outcome::of(g)
    );
    if maxwelter::position::is_terminal(&p, r) {
        println!("terminal: no moves");
        return Ok(());
    }
    let moves = oracle.optimal_moves(&p, r, c)?;
    let listed = moves
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    println!("winning_moves={listed}");
    if r == Ruleset::MaxWelter && c == Convention::Normal && p.len() >= 2 {
        match closedform::winning_move_closed_form(&p) {
            Ok(mv) => println!("closed_form_move={mv}"),
            Err(maxwelter::Error::AlreadyLosing(_)) => println!("closed_form_move=none"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn reduce_cmd(oracle: &Oracle, squares: &str) -> CmdResult {
    let p = read_position(squares)?;
    let value = |q: &Position| oracle.grundy(q, Ruleset::MaxWelter, Convention::Normal);
    println!("position={p} grundy={}", value(&p)?);
    match reduce::drop_small_coin(&p)? {
        Some(q) => println!("drop_small_coin={q} grundy={}", value(&q)?),
        None => println!("drop_small_coin=none"),
    }
    let pairs = reduce::pair_indices(&p)
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",");
    println!("pair_indices={pairs}");
    println!(
        "admissible_replacements={}",
        reduce::admissible_replacement_count(&p)
    );
    let c = reduce::canonicalize(&p);
    println!("canonical_form={c} grundy={}", value(&c)?);
    Ok(())
}

fn verify_cmd(oracle: &Oracle, args: VerifyArgs) -> CmdResult {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let space = PositionSpace::new(args.k.clone(), args.max_square)?;
    if args.jobs == Some(0) {
        return Err(Failure::Error("--jobs must be at least 1".into()));
    }
    let opts = SuiteOptions {
        seed: args.seed,
        replacement_cap: args.replacement_cap,
        shift_horizon: args.shift_horizon,
        jobs: args.jobs,
    };
    let mut text = String::new();
    let mut failed = false;
    for suite in suites {
        let report = verify::run_suite(oracle, suite, &space, &opts)?;
        failed |= !report.passed();
        println!("{report}");
        writeln!(text, "{report}").expect("writing to a String");
    }
    write_out(args.out.as_ref(), &text)?;
    if failed {
        Err(Failure::Counterexamples)
    } else {
        Ok(())
    }
}

fn scan(oracle: &Oracle, args: ScanArgs) -> CmdResult {
    install_pool(args.jobs)?;
    if args.horizon == 0 {
        return Err(Failure::Error("--horizon must be positive".into()));
    }
    let record = match args.conjecture {
        Conjecture::Progression => {
            if args.squares.is_some() {
                return Err(Failure::Error(
                    "--squares belongs to --conjecture 6.1; 6.2 takes --a, --m and --k".into(),
                ));
            }
            let (Some(m), Some(k)) = (args.m, args.k) else {
                return Err(Failure::Error(
                    "--conjecture 6.2 needs --m and --k (and optionally --a, default 0)".into(),
                ));
            };
            let a = args.a.unwrap_or(0);
            let report = periodicity::scan_arithmetic_progression(oracle, a, m, k, args.horizon)?;
            ScanRecord::progression(a, m, k, args.horizon, report)
        }
        Conjecture::Translation => {
            if args.a.is_some() || args.m.is_some() || args.k.is_some() {
                return Err(Failure::Error(
                    "--a, --m and --k belong to --conjecture 6.2; 6.1 takes --squares".into(),
                ));
            }
            let Some(squares) = args.squares else {
                return Err(Failure::Error("--conjecture 6.1 needs --squares".into()));
            };
            let p = read_position(&squares)?;
            let report = periodicity::scan_translation_period(oracle, &p, args.horizon)?;
            ScanRecord::translation(&p, args.horizon, report)
        }
    };
    println!("{record}");
    write_out(args.out.as_ref(), &format!("{record}\n"))
}

fn serve(args: ServeArgs) -> CmdResult {
    if args.sessions == 0 {
        return Err(Failure::Error("--sessions must be at least 1".into()));
    }
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(Failure::Error(format!(
                "--static-dir {} is not a directory",
                dir.display()
            )));
        }
    }
    let config = maxwelter_service::ServiceConfig {
        session_cap: args.sessions,
        static_dir: args.static_dir,
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::Error(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::Error(format!("cannot bind {addr}: {e}")))?;
        eprintln!("listening on http://{addr}");
        let (router, _) = maxwelter_service::app(&config);
        axum::serve(listener, router)
            .await
            .map_err(|e| Failure::Error(format!("server error: {e}")))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Counterexamples) => ExitCode::from(1),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
