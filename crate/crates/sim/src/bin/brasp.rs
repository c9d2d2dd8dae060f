//! Command-line driver. State lives in `$BRASP_STATE_DIR` (default
//! `.brasp`) between invocations.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use brasp_core::crypto::ShareIndex;
use brasp_core::protocol::{RecoveryMode, SystemConfig};
use brasp_core::spatial::{GridSpec, Rect};
use brasp_sim::eval::bench::{write_csv, Workload};
use brasp_sim::eval::{adversary_linkage, bench, forward_scan, Suite};
use brasp_sim::error::SimResult;
use brasp_sim::persist;
use brasp_sim::records::{read_jsonl, ObjectRecord, QuerySpec, ResultRecord};
use brasp_sim::{simulate, ActorId, Cadence, Deployment, Options, Script, SimError, Transcript};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "brasp", version, about = "Encrypted Boolean range queries over spatial data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Corrected,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum CadenceArg {
    AfterSearch,
    Manual,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Build,
    Search,
    Token,
    Shuffle,
    Update,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Observer {
    Cs1,
    Cs2,
}

#[derive(Subcommand)]
enum Cmd {
    /// Start a new deployment and distribute keys.
    Keygen {
        #[arg(long, default_value_t = 2048)]
        bits: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hilbert curve order of the grid.
        #[arg(long, default_value_t = 3)]
        order: u8,
        #[arg(long, value_enum, default_value_t = Mode::Corrected)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = CadenceArg::AfterSearch)]
        cadence: CadenceArg,
    },
    /// Add objects from a JSONL file before the build.
    Ingest { file: PathBuf },
    /// Encrypt the index and ship it to the servers.
    Build,
    /// Run a scripted session in memory and print its results.
    Simulate {
        script: PathBuf,
        /// Keep the final deployment as the current state.
        #[arg(long)]
        save: bool,
    },
    /// Search, then redistribute (and shuffle, under the default cadence).
    Query {
        /// x1,y1,x2,y2 in the unit square.
        #[arg(long, conflicts_with = "intervals")]
        rect: Option<String>,
        /// Hilbert intervals as lo-hi, comma separated.
        #[arg(long, value_delimiter = ',')]
        intervals: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        keywords: Vec<String>,
    },
    /// Insert one object given as a JSON record.
    Update { file: PathBuf },
    /// Run one shuffle round.
    Shuffle,
    /// Write the transcript of the current state as JSONL.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time a benchmark suite and print CSV.
    Bench {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        bits: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linkage and forward-security analysis of a JSONL transcript.
    Analyze {
        transcript: PathBuf,
        #[arg(long, value_enum, default_value_t = Observer::Cs1)]
        observer: Observer,
        /// Use the saved state for the query history and key ground truth.
        #[arg(long)]
        with_state: bool,
        #[arg(long, default_value_t = 2048)]
        bits: u64,
        #[arg(long, default_value_t = 3)]
        order: u8,
    },
}

fn state_path() -> PathBuf {
    let dir = std::env::var_os("BRASP_STATE_DIR").map_or_else(|| PathBuf::from(".brasp"), PathBuf::from);
    dir.join("state.bin")
}

fn load() -> SimResult<Deployment> {
    let p = state_path();
    if !p.exists() {
        return Err(SimError::Input(format!("no state at {}; run keygen first", p.display())));
    }
    persist::load(&p)
}

fn store(d: &Deployment) -> SimResult<()> {
    let p = state_path();
    if let Some(dir) = p.parent() {
        fs::create_dir_all(dir)?;
    }
    persist::save(d, &p)
}

fn print<T: Serialize>(v: &T) -> SimResult<()> {
    println!("{}", serde_json::to_string(v)?);
    Ok(())
}

fn parse_interval(s: &str) -> SimResult<(u64, u64)> {
    let bad = || SimError::Input(format!("interval {s:?} is not lo-hi"));
    let (a, b) = s.split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_rect(s: &str) -> SimResult<Rect> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| SimError::Input(format!("rect {s:?} is not four numbers")))?;
    match v[..] {
        [x1, y1, x2, y2] => Ok(Rect { x1, y1, x2, y2 }),
        _ => Err(SimError::Input(format!("rect {s:?} is not four numbers"))),
    }
}

fn run(cmd: Cmd) -> SimResult<()> {
    match cmd {
        Cmd::Keygen {
            bits,
            seed,
            order,
            mode,
            cadence,
        } => {
            let mode = match mode {
                Mode::Corrected => RecoveryMode::Corrected,
                Mode::Literal => RecoveryMode::Literal,
            };
            let cadence = match cadence {
                CadenceArg::AfterSearch => Cadence::AfterSearch,
                CadenceArg::Manual => Cadence::Manual,
            };
            let opts = Options::new(GridSpec::unit(order)?, bits, seed)
                .with_mode(mode)
                .with_cadence(cadence);
            let d = Deployment::new(opts)?;
            store(&d)?;
            print(&serde_json::json!({ "state": state_path(), "messages": d.transcript().len() }))
        }
        Cmd::Ingest { file } => {
            let mut d = load()?;
            let records = read_jsonl(BufReader::new(File::open(file)?))?;
            d.ingest_records(&records)?;
            store(&d)?;
            print(&serde_json::json!({ "objects": d.truth().len() }))
        }
        Cmd::Build => {
            let mut d = load()?;
            d.build()?;
            store(&d)?;
            print(&serde_json::json!({ "objects": d.truth().len(), "epoch": d.epoch() }))
        }
        Cmd::Simulate { script, save } => {
            let script: Script = serde_json::from_reader(BufReader::new(File::open(script)?))?;
            let out = simulate(&script)?;
            for rs in &out.results {
                print(&ResultRecord::new(rs, out.deployment.grid())?)?;
            }
            if save {
                store(&out.deployment)?;
            }
            Ok(())
        }
        Cmd::Query {
            rect,
            intervals,
            keywords,
        } => {
            let mut d = load()?;
            let spec = QuerySpec {
                rect: rect.as_deref().map(parse_rect).transpose()?,
                intervals: intervals
                    .map(|v| v.iter().map(|s| parse_interval(s)).collect::<SimResult<_>>())
                    .transpose()?,
                keywords,
            };
            let q = spec
                .to_query(d.grid())
                .map_err(|e| SimError::Input(e.to_string()))?;
            let rs = d.search(&q)?;
            store(&d)?;
            print(&ResultRecord::new(&rs, d.grid())?)
        }
        Cmd::Update { file } => {
            let mut d = load()?;
            let record: ObjectRecord = serde_json::from_reader(BufReader::new(File::open(file)?))?;
            let id = d.update_record(&record)?;
            store(&d)?;
            print(&serde_json::json!({ "id": id, "epoch": d.epoch() }))
        }
        Cmd::Shuffle => {
            let mut d = load()?;
            d.shuffle()?;
            store(&d)?;
            print(&serde_json::json!({ "epoch": d.epoch() }))
        }
        Cmd::Export { out } => {
            let d = load()?;
            match out {
                Some(p) => d.transcript().write_jsonl(BufWriter::new(File::create(p)?)),
                None => d.transcript().write_jsonl(io::stdout().lock()),
            }
        }
        Cmd::Bench {
            suite,
            reps,
            bits,
            seed,
            out,
        } => {
            let suite = match suite {
                SuiteArg::Build => Suite::Build,
                SuiteArg::Search => Suite::Search,
                SuiteArg::Token => Suite::Token,
                SuiteArg::Shuffle => Suite::Shuffle,
                SuiteArg::Update => Suite::Update,
                SuiteArg::All => Suite::All,
            };
            let mut w = Workload::desk();
            w.reps = reps.unwrap_or(w.reps);
            w.paillier_bits = bits.unwrap_or(w.paillier_bits);
            w.seed = seed.unwrap_or(w.seed);
            let records = bench(suite, &w)?;
            match out {
                Some(p) => write_csv(&records, File::create(p)?),
                None => write_csv(&records, io::stdout().lock()),
            }
        }
        Cmd::Analyze {
            transcript,
            observer,
            with_state,
            bits,
            order,
        } => {
            let t = Transcript::read_jsonl(BufReader::new(File::open(transcript)?))?;
            let observer = match observer {
                Observer::Cs1 => ActorId::Cs1,
                Observer::Cs2 => ActorId::Cs2,
            };
            let state = if with_state { Some(load()?) } else { None };
            let config = match &state {
                Some(d) => d.config().clone(),
                None => SystemConfig::new(GridSpec::unit(order)?, bits),
            };
            let history = state.as_ref().map(|d| d.history());
            // the hop the observer cannot undo is its peer's
            let peer_key = state.as_ref().and_then(|d| {
                let peer = if observer == ActorId::Cs1 { ShareIndex::Two } else { ShareIndex::One };
                d.server(peer).keys().map(|k| k.r.clone())
            });
            let report = adversary_linkage(&t, observer, &config, history, peer_key.as_ref())?;
            print(&report)?;
            print(&serde_json::json!({ "forward": forward_scan(&t, &config)? }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("brasp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
