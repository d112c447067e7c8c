use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use permbox_cli::{exit_code, run, Command, Format, Options, Verb};

#[derive(Parser)]
#[command(name = "permbox", version, about = "Analyze wreath products, box products and their orbital graphs")]
struct Cli {
    #[command(subcommand)]
    verb: VerbArg,

    /// Radius for box products without an explicit `@r` (at least 2)
    #[arg(long, global = true)]
    radius: Option<usize>,

    /// Largest realized degree (also bounds graph vertex counts)
    #[arg(long, global = true)]
    cap_degree: Option<usize>,

    /// Largest order of a truncated box group
    #[arg(long, global = true)]
    cap_order: Option<u128>,

    /// Seed for the random legal colouring used by `localaction`
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerbArg {
    /// Classify an expression as FIN, PA, BP-candidate or basic/undetermined
    Analyze { expr: String },
    /// Suborbit table with pairing
    Suborbits { expr: String },
    /// Structural and block-search primitivity
    Primitivity { expr: String },
    /// Ends estimate of a graph or of the graph a group realizes
    Ends { expr: String },
    /// Primitivity, sd chain and cartesian decompositions
    Decompose { expr: String },
    /// Local actions at every interior vertex of a box truncation
    Localaction { expr: String },
    /// DOT (or JSON) for a graph or its block-cut-vertex tree
    Render {
        expr: String,
        #[arg(long)]
        bcv: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut bcv = false;
    let (verb, expr) = match cli.verb {
        VerbArg::Analyze { expr } => (Verb::Analyze, expr),
        VerbArg::Suborbits { expr } => (Verb::Suborbits, expr),
        VerbArg::Primitivity { expr } => (Verb::Primitivity, expr),
        VerbArg::Ends { expr } => (Verb::Ends, expr),
        VerbArg::Decompose { expr } => (Verb::Decompose, expr),
        VerbArg::Localaction { expr } => (Verb::LocalAction, expr),
        VerbArg::Render { expr, bcv: b } => {
            bcv = b;
            (Verb::Render, expr)
        }
    };
    let cmd = Command {
        verb,
        expr,
        options: Options {
            radius: cli.radius,
            cap_degree: cli.cap_degree,
            cap_order: cli.cap_order,
            seed: cli.seed,
            format: cli.format.map(|f| match f {
                FormatArg::Json => Format::Json,
                FormatArg::Dot => Format::Dot,
            }),
            bcv,
        },
    };
    match run(&cmd) {
        Ok(text) => {
            if let Some(path) = cli.out {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
