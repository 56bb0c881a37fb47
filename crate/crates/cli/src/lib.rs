//! The `knotwork` command line. [`run`] executes one invocation in process
//! and returns its exit status and output, so tests can drive it directly.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use knotwork::bracket::{BracketConfig, DEFAULT_CROSSING_CAP};
use knotwork::link_pattern::{PatternConfig, DEFAULT_COMPONENT_CAP};
use serde_json::Value;

mod commands;
mod format;
mod input;

pub use input::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;

const PD_GRAMMAR: &str = "\
Diagram files:
  # comment to end of line
  orient: -7          reverse the component containing arc 7 (optional)
  X[a,b,c,d] ...      one crossing; arcs counterclockwise from the incoming under-strand
  O[k]                k crossing-free circles
A file whose first token is `n=<k>:` is read as a braid word and closed.";

const BRAID_GRAMMAR: &str = "\
Braid words:
  n=<strands>: s<i> s<j>^-1 ...   generators 1 ≤ i < strands; `^-1`, `^{-1}`, `^1` accepted; `#` comments";

const STATE_GRAMMAR: &str = "\
State files:
  ghz <n>                      the n-qubit GHZ state
  <bits> <re> [<im>]           one amplitude per line, qubit 0 leftmost; unlisted amplitudes are 0
Unnormalized states are rescaled on load and a note is printed.";

const PROBLINK_GRAMMAR: &str = "\
Probabilistic link files: diagram text plus
  influence <component> <crossing> [<p>]   cutting <component> switches <crossing> with chance 1/2
  general                                   allow switch chances other than 1/2";

const NETWORK_GRAMMAR: &str = "\
Network files (JSON):
  { \"nodes\": [ { \"id\": 0, \"shape\": [2, 2], \"entries\": [[re, im], ...], \"kind\": \"tensor\" } ],
    \"edges\": [ [[node, slot], [node, slot]] ],
    \"free_ends\": [ [node, slot] ] }
Entries are row-major over the node's ports. `kind` is tensor (default), ket or bra.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "knotwork", version, about = "Knot diagrams, quantum knots, entanglement patterns and tensor networks")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Largest crossing count for the bracket state sum.
    #[arg(long, global = true, env = "KNOTWORK_CROSSING_CAP")]
    crossing_cap: Option<usize>,

    /// Largest component count for link patterns.
    #[arg(long, global = true, env = "KNOTWORK_COMPONENT_CAP")]
    component_cap: Option<usize>,

    /// Run the state sum on one thread.
    #[arg(long, global = true)]
    serial: bool,

    /// Refuse diagrams over the crossing cap instead of using the sweep algorithm.
    #[arg(long, global = true)]
    no_sweep: bool,

    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Link diagrams and their invariants.
    #[command(subcommand)]
    Knot(KnotCmd),
    /// Superpositions of knot classes.
    #[command(subcommand)]
    Qknot(QknotCmd),
    /// Multi-qubit pure states.
    #[command(subcommand)]
    State(StateCmd),
    /// Entanglement patterns of links.
    #[command(subcommand)]
    Link(LinkCmd),
    /// Tensor networks.
    #[command(subcommand)]
    Net(NetCmd),
}

#[derive(Subcommand, Debug)]
enum KnotCmd {
    /// Parse a diagram and summarize it.
    #[command(after_help = format!("{PD_GRAMMAR}\n\n{BRAID_GRAMMAR}"))]
    Parse { input: String },
    /// The bracket polynomial.
    #[command(after_help = PD_GRAMMAR)]
    Bracket {
        input: String,
        /// Multiply by (-A^3)^(-writhe).
        #[arg(long)]
        normalized: bool,
    },
    /// The Jones polynomial in t.
    #[command(after_help = PD_GRAMMAR)]
    Jones { input: String },
    /// List Reidemeister move sites, or apply one.
    #[command(after_help = PD_GRAMMAR)]
    Moves {
        input: String,
        /// Apply the site with this index.
        #[arg(long)]
        apply: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct QknotSource {
    /// Flat diagram; every resolution gets the same amplitude.
    #[arg(long)]
    flat: Option<String>,
    /// Quantum knot JSON as written by `qknot resolve --format json`.
    input: Option<String>,
}

#[derive(Subcommand, Debug)]
enum QknotCmd {
    /// Resolve a flat diagram into a quantum knot.
    #[command(after_help = PD_GRAMMAR)]
    Resolve {
        #[command(flatten)]
        source: QknotSource,
    },
    /// Probability of each knot class.
    Dist {
        #[command(flatten)]
        source: QknotSource,
    },
    /// Sample a class with a seeded generator.
    Measure {
        #[command(flatten)]
        source: QknotSource,
        #[arg(long)]
        seed: u64,
    },
    /// Expand a diagram over its smoothing states.
    #[command(after_help = PD_GRAMMAR)]
    Expand { input: String },
}

#[derive(Subcommand, Debug)]
enum StateCmd {
    /// Measurement pattern of every qubit.
    #[command(after_help = STATE_GRAMMAR)]
    Pattern { input: String },
    /// Measure one qubit and keep one outcome.
    #[command(after_help = STATE_GRAMMAR)]
    Project {
        input: String,
        #[arg(long)]
        qubit: usize,
        #[arg(long)]
        bit: u8,
    },
    /// Change basis on one qubit: c'_y = Σ_x m[y][x] c_x.
    #[command(after_help = STATE_GRAMMAR)]
    BasisChange {
        input: String,
        #[arg(long)]
        qubit: usize,
        /// Row-major `a,b;c,d`; entries may be complex, e.g. `1+2i`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        /// Also print the pattern of the normalized result.
        #[arg(long)]
        pattern: bool,
    },
}

#[derive(Subcommand, Debug)]
enum LinkCmd {
    /// Linked/unlinked flags of the link and of every single deletion.
    #[command(after_help = PD_GRAMMAR)]
    Pattern { input: String },
    /// Decide whether a link is Brunnian.
    #[command(after_help = PD_GRAMMAR)]
    Brunnian { input: String },
    /// Build a Brunnian braid on one more strand.
    #[command(after_help = BRAID_GRAMMAR)]
    Template {
        /// Braid word, or a file holding one.
        #[arg(long, allow_hyphen_values = true)]
        braid: String,
    },
    /// Cut one component of a probabilistic link.
    #[command(after_help = PROBLINK_GRAMMAR)]
    Cutprob {
        input: String,
        #[arg(long)]
        component: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Compare a link's deletion pattern with a state's measurement pattern.
    #[command(after_help = format!("{PD_GRAMMAR}\n\n{PROBLINK_GRAMMAR}\n\n{STATE_GRAMMAR}"))]
    Match {
        link: String,
        state: String,
        /// Try every pairing of components with qubits.
        #[arg(long)]
        search: bool,
    },
}

#[derive(Subcommand, Debug)]
enum NetCmd {
    /// Contract a network.
    #[command(after_help = NETWORK_GRAMMAR)]
    Eval { input: String },
    /// Cut an edge, optionally inserting a ket and a bra at the new ends.
    #[command(after_help = NETWORK_GRAMMAR)]
    Cut {
        input: String,
        #[arg(long)]
        edge: usize,
        /// Ket entries, comma separated; attached to the second new end.
        #[arg(long, allow_hyphen_values = true)]
        ket: Option<String>,
        /// Vector a of the bra ⟨a|, comma separated; attached to the first new end.
        #[arg(long, allow_hyphen_values = true)]
        bra: Option<String>,
    },
    /// The probability network of a single ket/bra insertion.
    #[command(after_help = NETWORK_GRAMMAR)]
    Double { input: String },
    /// Closure network of a braid with one crossing tensor per letter.
    #[command(after_help = BRAID_GRAMMAR)]
    FromBraid {
        /// Braid word, or a file holding one.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// `default` (Bell-basis matrix), `swap`, `identity`, or a JSON file of rows of [re, im].
        #[arg(long, default_value = "default")]
        r: String,
    },
    /// Cut one component of a braid closure network and insert |b⟩⟨a|.
    #[command(after_help = BRAID_GRAMMAR)]
    Measure {
        /// Braid word, or a file holding one.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long)]
        component: usize,
        /// Basis index of the bra ⟨a|.
        #[arg(long)]
        a: usize,
        /// Basis index of the ket |b⟩.
        #[arg(long)]
        b: usize,
        #[arg(long, default_value = "default")]
        r: String,
    },
}

/// Settings shared by every command.
pub(crate) struct Ctx {
    pub format: Format,
    pub bracket: BracketConfig,
    pub pattern: PatternConfig,
    pub notes: Vec<String>,
}

/// A rendered report.
pub(crate) struct Report {
    pub text: String,
    pub json: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    let bracket = BracketConfig {
        cap: cli.crossing_cap.filter(|&c| c > 0).unwrap_or(DEFAULT_CROSSING_CAP),
        parallel: !cli.serial,
    };
    let mut ctx = Ctx {
        format: cli.format,
        bracket,
        pattern: PatternConfig {
            bracket,
            allow_contraction: !cli.no_sweep,
            component_cap: cli.component_cap.filter(|&c| c > 0).unwrap_or(DEFAULT_COMPONENT_CAP),
        },
        notes: Vec::new(),
    };
    let result = dispatch(cli.group, &mut ctx);
    let mut stderr: String = ctx.notes.iter().map(|n| format!("note: {n}\n")).collect();
    match result {
        Ok(report) => {
            let mut body = match ctx.format {
                Format::Text => report.text,
                Format::Json => {
                    serde_json::to_string_pretty(&format::round_json(report.json)).expect("report serializes")
                }
            };
            if !body.ends_with('\n') {
                body.push('\n');
            }
            match cli.output {
                Some(path) => match std::fs::write(&path, &body) {
                    Ok(()) => Outcome {
                        code: EXIT_OK,
                        stdout: String::new(),
                        stderr,
                    },
                    Err(e) => Outcome {
                        code: EXIT_INPUT,
                        stdout: String::new(),
                        stderr: stderr + &format!("error: cannot write {}: {e}\n", path.display()),
                    },
                },
                None => Outcome {
                    code: EXIT_OK,
                    stdout: body,
                    stderr,
                },
            }
        }
        Err(e) => {
            stderr.push_str(&format!("error: {e}\n"));
            Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn dispatch(group: Group, ctx: &mut Ctx) -> Result<Report, CliError> {
    use commands::*;
    match group {
        Group::Knot(c) => match c {
            KnotCmd::Parse { input } => knot_parse(ctx, &input),
            KnotCmd::Bracket { input, normalized } => knot_bracket(ctx, &input, normalized),
            KnotCmd::Jones { input } => knot_jones(ctx, &input),
            KnotCmd::Moves { input, apply } => knot_moves(ctx, &input, apply),
        },
        Group::Qknot(c) => match c {
            QknotCmd::Resolve { source } => qknot_resolve(ctx, source.flat, source.input),
            QknotCmd::Dist { source } => qknot_dist(ctx, source.flat, source.input),
            QknotCmd::Measure { source, seed } => qknot_measure(ctx, source.flat, source.input, seed),
            QknotCmd::Expand { input } => qknot_expand(ctx, &input),
        },
        Group::State(c) => match c {
            StateCmd::Pattern { input } => state_pattern(ctx, &input),
            StateCmd::Project { input, qubit, bit } => state_project(ctx, &input, qubit, bit),
            StateCmd::BasisChange {
                input,
                qubit,
                matrix,
                pattern,
            } => state_basis_change(ctx, &input, qubit, &matrix, pattern),
        },
        Group::Link(c) => match c {
            LinkCmd::Pattern { input } => link_pattern(ctx, &input),
            LinkCmd::Brunnian { input } => link_brunnian(ctx, &input),
            LinkCmd::Template { braid } => link_template(ctx, &braid),
            LinkCmd::Cutprob { input, component, seed } => link_cutprob(ctx, &input, component, seed),
            LinkCmd::Match { link, state, search } => link_match(ctx, &link, &state, search),
        },
        Group::Net(c) => match c {
            NetCmd::Eval { input } => net_eval(ctx, &input),
            NetCmd::Cut { input, edge, ket, bra } => net_cut(ctx, &input, edge, ket.as_deref(), bra.as_deref()),
            NetCmd::Double { input } => net_double(ctx, &input),
            NetCmd::FromBraid { word, r } => net_from_braid(ctx, &word, &r),
            NetCmd::Measure {
                word,
                component,
                a,
                b,
                r,
            } => net_measure(ctx, &word, component, a, b, &r),
        },
    }
}
