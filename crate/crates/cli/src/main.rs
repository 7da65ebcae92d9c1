use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctfid_cli::{run_fixtures, run_identify, run_oracle_check, Outcome, RunConfig};
use ctfid_core::Format;

#[derive(Parser)]
#[command(
    name = "ctfid",
    version,
    about = "Identify counterfactual queries from a causal diagram"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive an estimand for a query, or explain why none exists.
    Identify(QueryArgs),
    /// Compare the estimand against enumeration on random models.
    OracleCheck {
        #[command(flatten)]
        query: QueryArgs,
        /// Number of random models.
        #[arg(long, default_value_t = 50)]
        seeds: u64,
    },
    /// List the bundled diagrams.
    Fixtures,
}

#[derive(Args)]
struct QueryArgs {
    /// Diagram file (JSON).
    #[arg(long)]
    graph: PathBuf,
    /// Available distributions (JSON); observational data only when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Query such as `P(Y[X=1, M=M[X=0]]=1 | X=0)`.
    #[arg(long)]
    query: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Latex,
    Json,
}

impl QueryArgs {
    fn config(self, seeds: u64) -> RunConfig {
        RunConfig {
            graph: self.graph,
            spec: self.spec,
            query: self.query,
            format: match self.format {
                OutputFormat::Text => Format::Text,
                OutputFormat::Latex => Format::Latex,
                OutputFormat::Json => Format::Json,
            },
            seeds,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Outcome = match cli.command {
        Command::Identify(q) => run_identify(&q.config(0)),
        Command::OracleCheck { query, seeds } => run_oracle_check(&query.config(seeds)),
        Command::Fixtures => run_fixtures(),
    };
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code as u8)
}
