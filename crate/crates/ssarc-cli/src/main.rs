//! `ssarc` command-line front end. Every command prints one JSON report;
//! failures print `{"error": …}` and exit with status 2.

mod commands;
mod expr;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "ssarc",
    version,
    about = "Self-similar arcs from planar basic figures"
)]
struct Cli {
    /// Seed for sampled pair scans.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the basic-figure conditions and the arc test.
    Validate { spec: PathBuf },
    /// Write the depth-k vertex polyline as SVG.
    Render {
        spec: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Similarity dimension.
    Dimension { spec: PathBuf },
    /// Corner angles θ_p, η₁, η₂, ξ.
    Angles { spec: PathBuf },
    /// Conditions W_p and Q_p^t at every corner.
    Conditions(ConditionsArgs),
    /// The Ω_τ family.
    Family {
        #[command(subcommand)]
        cmd: FamilyCmd,
    },
    /// τ constructions.
    Tau {
        #[command(subcommand)]
        cmd: TauCmd,
    },
    /// Measure coordinate f and the Whitney measure weights.
    Measure(MeasureArgs),
}

#[derive(Args)]
pub struct ConditionsArgs {
    pub spec: PathBuf,
    /// Exponents t for Q_p^t (repeatable).
    #[arg(long = "t", default_values_t = vec![1.0])]
    pub t: Vec<f64>,
    /// Scan bound N for 0 ≤ j ≤ N.
    #[arg(long, default_value_t = 10_000)]
    pub bound: u64,
    /// Deepest level for the empirical quasi-arc and modulus tables; 0 skips them.
    #[arg(long, default_value_t = 0)]
    pub depth: usize,
    /// Also write the verdict table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// Classify Λ_τ as a t-quasi-arc by both routes.
    Classify {
        #[arg(long)]
        tau: String,
        #[arg(long = "t")]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
    },
}

#[derive(Subcommand)]
enum TauCmd {
    /// Exponent schedule of a construction.
    Construct {
        #[arg(long)]
        kind: String,
        /// Comma-separated key=value list: a0, a0_log2, nu, terms, budget.
        #[arg(long, default_value = "")]
        params: String,
    },
}

#[derive(Args)]
pub struct MeasureArgs {
    pub spec: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Build the Whitney measure of the strict-Whitney construction.
    #[arg(long)]
    pub whitney: bool,
    #[arg(long, default_value_t = 1.1)]
    pub stilde: f64,
    /// Number of weight levels K.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Replace the system by its k-th iterate first.
    #[arg(long, default_value_t = 1)]
    pub iterate: usize,
    /// Refinement used for the separation bounds ε_k.
    #[arg(long, default_value_t = 2)]
    pub refine: usize,
    /// Prefix and E depth for the exhaustive measure-inequality check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub check_depth: usize,
    /// Also write f at `depth` as CSV, with the Whitney f where the vertex sets coincide.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn threads_from_env() -> Result<(), String> {
    if let Ok(v) = std::env::var("SSARC_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("SSARC_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn emit(report: &Value, path: Option<&PathBuf>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())
        }
    }
}

fn error_report(argv: &[String], msg: String, chain: Vec<String>) -> Value {
    json!({ "command": argv, "error": { "message": msg, "causes": chain } })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let _ = emit(&error_report(&argv, msg.trim().to_string(), vec![]), None);
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = threads_from_env() {
        let _ = emit(&error_report(&argv, msg, vec![]), None);
        return ExitCode::from(2);
    }
    let ctx = commands::Ctx {
        argv: argv.clone(),
        seed: cli.seed,
    };
    let result = match cli.cmd {
        Cmd::Validate { spec } => commands::validate(&ctx, &spec),
        Cmd::Render { spec, depth, out } => commands::render(&ctx, &spec, depth, &out),
        Cmd::Dimension { spec } => commands::dimension(&ctx, &spec),
        Cmd::Angles { spec } => commands::angles(&ctx, &spec),
        Cmd::Conditions(a) => commands::conditions(&ctx, &a),
        Cmd::Family {
            cmd: FamilyCmd::Classify { tau, t, bound },
        } => commands::classify(&ctx, &tau, t, bound),
        Cmd::Tau {
            cmd: TauCmd::Construct { kind, params },
        } => commands::construct(&ctx, &kind, &params),
        Cmd::Measure(a) => commands::measure(&ctx, &a),
    };
    match result {
        Ok(out) => match emit(&out.report, cli.report.as_ref()) {
            Ok(()) => ExitCode::from(out.code),
            Err(e) => {
                let _ = emit(
                    &error_report(&argv, format!("writing report: {e}"), vec![]),
                    None,
                );
                ExitCode::from(2)
            }
        },
        Err(e) => {
            let chain = e.chain().skip(1).map(|c| c.to_string()).collect();
            let _ = emit(&error_report(&argv, e.to_string(), chain), None);
            ExitCode::from(2)
        }
    }
}
