use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use beliefcheck::driver::{render_explain, render_text, verify_source, Options, Verification};
use beliefcheck::entail::{emit_smtlib, smt_file_name, DEFAULT_DEPTH};
use beliefcheck::frontend::Diagnostic;
use beliefcheck::numstat::{load_csv, run_demo};
use beliefcheck::specs::spec_docs;
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_FAILED: u8 = 1;
const EXIT_FRONTEND: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_REFUSED: u8 = 4;

/// Checks hypothesis-testing programs against their belief annotations.
#[derive(Parser)]
#[command(name = "beliefcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every annotated function in a program.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write one SMT-LIB2 script per condition into this directory.
        #[arg(long, value_name = "DIR")]
        emit_smt: Option<PathBuf>,
        /// Record wall time per condition.
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Show hypotheses, goal and proof or failure frontier of one condition.
    Explain {
        file: PathBuf,
        /// Condition id as printed by `verify`, e.g. `ex_hack/6`.
        vc: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Run a verified program on data from a CSV file.
    Demo {
        file: PathBuf,
        csv: PathBuf,
        /// Run even if verification fails.
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print the builtin command specifications as JSON.
    Specs,
}

#[derive(Args)]
struct EngineArgs {
    /// Bound on nested modal reasoning.
    #[arg(long, env = "BHL_DEPTH", default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Worker threads for discharging conditions.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seconds allowed per condition.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
}

impl EngineArgs {
    fn options(&self, timings: bool) -> Options {
        Options {
            depth: self.depth,
            jobs: self.jobs,
            timeout: (self.timeout > 0.0).then(|| Duration::from_secs_f64(self.timeout)),
            timings,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            file,
            format,
            emit_smt,
            timings,
            engine,
        } => verify(&file, format, emit_smt.as_deref(), &engine.options(timings)),
        Command::Explain { file, vc, engine } => explain(&file, &vc, &engine.options(false)),
        Command::Demo {
            file,
            csv,
            force,
            format,
            engine,
        } => demo(&file, &csv, force, format, &engine.options(false)),
        Command::Specs => {
            println!("{}", serde_json::to_string_pretty(&spec_docs()).expect("json"));
            ExitCode::SUCCESS
        }
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })
}

fn report_diagnostics(file: &str, src: &str, diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{}", d.render(file, src));
    }
    ExitCode::from(EXIT_FRONTEND)
}

fn run(path: &Path, opts: &Options) -> Result<(String, Verification), ExitCode> {
    let src = read(path)?;
    let file = path.display().to_string();
    match verify_source(&file, &src, opts) {
        Ok(v) => Ok((src, v)),
        Err(diags) => Err(report_diagnostics(&file, &src, &diags)),
    }
}

fn verify(path: &Path, format: Format, smt_dir: Option<&Path>, opts: &Options) -> ExitCode {
    let (_, v) = match run(path, opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    if let Some(dir) = smt_dir {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::from(EXIT_IO);
        }
        for vc in &v.vcs {
            match emit_smtlib(vc) {
                Ok(text) => {
                    let out = dir.join(smt_file_name(vc));
                    if let Err(e) = std::fs::write(&out, text) {
                        eprintln!("error: cannot write {}: {e}", out.display());
                        return ExitCode::from(EXIT_IO);
                    }
                }
                Err(e) => eprintln!("warning: {}: {e}", vc.id()),
            }
        }
    }
    match format {
        Format::Text => print!("{}", render_text(&v.report)),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&v.report).expect("report serializes")
        ),
    }
    if v.report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn explain(path: &Path, id: &str, opts: &Options) -> ExitCode {
    let (src, v) = match run(path, opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    match v.find(id) {
        Some((vc, r)) => {
            print!("{}", render_explain(&path.display().to_string(), &src, vc, r));
            ExitCode::SUCCESS
        }
        None => {
            eprintln!("error: unknown condition `{id}`");
            let ids: Vec<String> = v.vcs.iter().map(|vc| vc.id()).collect();
            eprintln!("known conditions: {}", ids.join(", "));
            ExitCode::from(EXIT_FRONTEND)
        }
    }
}

fn demo(path: &Path, csv: &Path, force: bool, format: Format, opts: &Options) -> ExitCode {
    let (_, v) = match run(path, opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    if !v.report.passed() {
        if !force {
            eprintln!(
                "error: {} does not verify; refusing to run it (use --force to run anyway)",
                path.display()
            );
            return ExitCode::from(EXIT_REFUSED);
        }
        eprintln!("WARNING: {} does not verify; these numbers are not backed by a proof", path.display());
    }
    let text = match read(csv) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let result = load_csv(&text).and_then(|data| run_demo(&v.program, &data));
    match result {
        Ok(report) => {
            match format {
                Format::Text => print!("{report}"),
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&report).expect("json"))
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
