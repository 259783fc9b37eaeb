//! `morse-extend` command-line tool.
//!
//! Exit status: 0 extendable / valid / accepted, 1 not extendable / invalid /
//! rejected, 2 input or usage error, 3 search budget exceeded.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morse_extend::diagram::export_dot;
use morse_extend::oracle::{random_germ, GeneratorParams, MobiusTarget};
use morse_extend::search::{SearchError, Witness, DEFAULT_BUDGET};
use morse_extend::trace::parse_trace;
use morse_extend::witness::{parse_witness_file, serialize_witness, witness_diagram};
use morse_extend::{
    check_trace, decide, enumerate_witnesses, parse_germ, serialize_germ, validate_germ,
    validate_klein_germ, GermDiagram, Mode, SearchConfig, TransitionChoice, Verdict,
};

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const INPUT_ERROR: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "morse-extend",
    version,
    about = "Decide non-singular extensions of Morse germs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long)]
    mode: Mode,
    /// Maximum number of search nodes.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Accept Klein germs outside the two known Möbius/loop patterns.
    #[arg(long)]
    no_strict: bool,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            budget: self.budget,
            strict: !self.no_strict,
            ..SearchConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a germ file and print its invariants.
    Validate {
        /// Germ file, or `-` for standard input.
        file: PathBuf,
        /// Also check the necessary conditions for a Klein bottle germ.
        #[arg(long)]
        klein: bool,
        #[arg(long)]
        no_strict: bool,
    },
    /// Decide whether the germ extends.
    Decide {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write the first witness as a bundle, optionally with a DOT drawing.
    Witness {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// List accepting runs in canonical order.
    Enumerate {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Replay a trace file against a germ.
    CheckTrace { germ: PathBuf, trace: PathBuf },
    /// Generate a random valid germ.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_vertices: usize,
        #[arg(long, allow_hyphen_values = true)]
        euler: Option<i64>,
        /// Number of Möbius points: 0, 2 or any.
        #[arg(long, default_value = "any")]
        mobius: MobiusTarget,
        #[arg(long)]
        connected: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a germ, or the diagram stored in a witness bundle, as DOT.
    ExportDot {
        file: PathBuf,
        /// Treat the input as a witness bundle.
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: INPUT_ERROR,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| input_error(format!("standard input: {e}")))?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => {
            std::fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display())))
        }
    }
}

fn load_germ(path: &Path) -> Result<GermDiagram, Failure> {
    let text = read_input(path)?;
    parse_germ(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Runs the search. Budget exhaustion and Klein rejections are reported as failures.
fn search(germ: &GermDiagram, args: &SearchArgs) -> Result<Verdict, Failure> {
    decide(germ, args.mode, &args.config()).map_err(search_failure)
}

fn search_failure(e: SearchError) -> Failure {
    let code = match e {
        SearchError::BudgetExceeded { .. } => BUDGET,
        SearchError::Rejected(_) => NEGATIVE,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn choice_text(germ: &GermDiagram, c: &TransitionChoice) -> String {
    let ids = |edges: &[usize]| -> String {
        let names: Vec<&str> = edges.iter().map(|&e| germ.edges()[e].id.as_str()).collect();
        format!("[{}]", names.join(" "))
    };
    let kind = c.kind().name();
    match c {
        TransitionChoice::MMinus { host } => format!("{kind} host {host}"),
        TransitionChoice::GPlus { label }
        | TransitionChoice::GMinus { label }
        | TransitionChoice::OMinus { label } => {
            format!("{kind} {label}")
        }
        TransitionChoice::JMinus { parts, labels } => format!(
            "{kind} {} {} / {} {}",
            ids(&parts[0]),
            labels[0],
            ids(&parts[1]),
            labels[1]
        ),
        _ => kind.to_string(),
    }
}

fn describe(germ: &GermDiagram, w: &Witness) -> String {
    let mut out = String::new();
    if let Some(c) = w.condition {
        let _ = writeln!(out, "  condition: {c}");
    }
    for step in &w.trace.steps {
        let _ = writeln!(
            out,
            "  {}: {}",
            germ.vertices()[step.vertex].id,
            choice_text(germ, &step.choice)
        );
    }
    let labels: Vec<String> = w
        .diagram
        .edges
        .iter()
        .map(|e| format!("{} {}", e.id, e.cls))
        .collect();
    let _ = writeln!(out, "  labels: {}", labels.join(", "));
    out
}

fn mobius_flag(m: MobiusTarget) -> &'static str {
    match m {
        MobiusTarget::Zero => "0",
        MobiusTarget::Two => "2",
        MobiusTarget::Any => "any",
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate {
            file,
            klein,
            no_strict,
        } => {
            let germ = load_germ(&file)?;
            println!("{}", validate_germ(&germ));
            if !klein {
                return Ok(OK);
            }
            match validate_klein_germ(&germ, !no_strict) {
                Ok(warnings) => {
                    for w in warnings {
                        println!("warning: {w}");
                    }
                    println!("valid klein germ");
                    Ok(OK)
                }
                Err(r) => {
                    println!("invalid klein germ: {r}");
                    Ok(NEGATIVE)
                }
            }
        }
        Command::Decide { file, search: args } => {
            let germ = load_germ(&file)?;
            let v = search(&germ, &args)?;
            println!("{v}");
            println!("accepting runs: {}", v.witness_count);
            println!("search nodes: {}", v.nodes);
            if let Some(w) = &v.witness {
                let labels: Vec<String> =
                    w.diagram.edges.iter().map(|e| e.cls.to_string()).collect();
                println!("witness labels: {}", labels.join(" "));
            }
            Ok(if v.extendable { OK } else { NEGATIVE })
        }
        Command::Witness {
            file,
            search: args,
            out,
            dot,
        } => {
            let germ = load_germ(&file)?;
            let v = search(&germ, &args)?;
            println!("{v}");
            let Some(w) = &v.witness else {
                return Ok(NEGATIVE);
            };
            write_output(Some(&out), &serialize_witness(&germ, args.mode, w))?;
            if let Some(dot) = dot {
                write_output(Some(&dot), &export_dot(&w.diagram))?;
            }
            Ok(OK)
        }
        Command::Enumerate {
            file,
            search: args,
            limit,
        } => {
            let germ = load_germ(&file)?;
            let ws = enumerate_witnesses(&germ, args.mode, limit, &args.config())
                .map_err(search_failure)?;
            for (i, w) in ws.iter().enumerate() {
                println!("witness {}:", i + 1);
                print!("{}", describe(&germ, w));
            }
            println!("{} witness(es)", ws.len());
            Ok(if ws.is_empty() { NEGATIVE } else { OK })
        }
        Command::CheckTrace { germ, trace } => {
            if germ == Path::new("-") && trace == Path::new("-") {
                return Err(input_error("only one input may come from standard input"));
            }
            let g = load_germ(&germ)?;
            let text = read_input(&trace)?;
            let t = parse_trace(&g, &text)
                .map_err(|e| input_error(format!("{}: {e}", trace.display())))?;
            match check_trace(&g, &t) {
                Ok(()) => {
                    println!("accepted");
                    Ok(OK)
                }
                Err(r) => {
                    println!("rejected: {r}");
                    Ok(NEGATIVE)
                }
            }
        }
        Command::Random {
            seed,
            max_vertices,
            euler,
            mobius,
            connected,
            out,
        } => {
            let params = GeneratorParams {
                seed,
                max_vertices,
                mobius,
                euler,
                connected,
            };
            let germ = random_germ(&params).map_err(|e| input_error(e.to_string()))?;
            let mut command =
                format!("morse-extend random --seed {seed} --max-vertices {max_vertices}");
            if let Some(e) = euler {
                let _ = write!(command, " --euler {e}");
            }
            let _ = write!(command, " --mobius {}", mobius_flag(mobius));
            if connected {
                command.push_str(" --connected");
            }
            let header = format!("# Generated by `{command}`.\n\n");
            write_output(out.as_deref(), &(header + &serialize_germ(&germ)))?;
            Ok(OK)
        }
        Command::ExportDot { file, witness, out } => {
            let text = if witness {
                let bundle = parse_witness_file(&read_input(&file)?)
                    .map_err(|e| input_error(format!("{}: {e}", file.display())))?;
                let diagram = witness_diagram(&bundle).map_err(|e| input_error(e.to_string()))?;
                export_dot(&diagram)
            } else {
                export_dot(&load_germ(&file)?)
            };
            write_output(out.as_deref(), &text)?;
            Ok(OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
