use clap::{Args, Parser, Subcommand};
use levi_loewy::harness::{self, CaseSpec, DiagramFormat, Grid, ModuleKind, Session, Status, Tier, VerifyReport, WeightChoice};
use levi_loewy::series;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "levi-loewy", version, about = "Exact F_p workbench for graded modules of reduced enveloping algebras")]
struct Cli {
    /// directory for the content-addressed module cache
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// memory budget for the dense kernels
    #[arg(long, global = true)]
    budget_mb: Option<usize>,
    /// which checks to run; the exit code only reflects mandatory checks
    #[arg(long, global = true, value_enum, default_value = "mandatory")]
    tier: Tier,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CaseArgs {
    /// Cartan type and rank, e.g. A2, B2
    #[arg(long = "type", default_value = "A2")]
    cartan: String,
    #[arg(long, default_value_t = 5)]
    p: u32,
    /// Levi simple roots, e.g. `a1` or `a1,a2`; `all` or `none`
    #[arg(long, default_value = "a1")]
    levi: String,
    /// `lambda + rho` coordinates (e.g. `1,2`), `interior` or `wall`
    #[arg(long, default_value = "interior")]
    weight: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check one claim (or `all`) on a case and print JSON reports
    Verify {
        claim: String,
        #[command(flatten)]
        case: CaseArgs,
        /// one human-readable line per report instead of JSON
        #[arg(long)]
        text: bool,
    },
    /// Run a claim family over a grid file of `[[case]]` tables
    Scan {
        conj: String,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Composition factors
    Chop {
        #[arg(value_enum)]
        module: ModuleKind,
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Radical and socle series
    Loewy {
        #[arg(value_enum)]
        module: ModuleKind,
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Quasi-simple module of the case weight
    Quasi {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Layered structure diagram
    Diagram {
        #[arg(value_enum)]
        module: ModuleKind,
        #[arg(long, value_enum, default_value = "ascii")]
        format: DiagramFormat,
        #[command(flatten)]
        case: CaseArgs,
    },
}

fn spec(c: &CaseArgs, budget_mb: Option<usize>) -> Result<CaseSpec, Box<dyn std::error::Error>> {
    let weight: WeightChoice = c.weight.parse()?;
    Ok(CaseSpec { cartan: c.cartan.clone(), levi: c.levi.clone(), p: c.p, weight, seed: c.seed, budget_mb })
}

fn exit_for(reports: &[VerifyReport]) -> ExitCode {
    match harness::worst(reports) {
        Status::Fail => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cache = cli.cache_dir.as_deref();
    match cli.cmd {
        Cmd::Verify { claim, case, text } => {
            let s = Session::new(&spec(&case, cli.budget_mb)?, cache)?;
            let claims: Vec<&str> = if claim == "all" { harness::CLAIMS.iter().map(|(id, _)| *id).collect() } else { vec![claim.as_str()] };
            let mut reports = Vec::new();
            for c in claims {
                if cli.tier == Tier::Mandatory && claim == "all" && !harness::is_mandatory(c, &s) {
                    continue;
                }
                let r = harness::verify(c, &s)?;
                if text {
                    println!("{}", r.line());
                } else {
                    println!("{}", serde_json::to_string(&r)?);
                }
                reports.push(r);
            }
            Ok(exit_for(&reports))
        }
        Cmd::Scan { conj, grid, json } => {
            let mut g = Grid::load(&grid)?;
            if let Some(mb) = cli.budget_mb {
                for c in &mut g.cases {
                    c.budget_mb.get_or_insert(mb);
                }
            }
            let r = harness::scan(&conj, &g.cases, cli.tier, cache)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", r.table());
            }
            Ok(exit_for(&r.reports))
        }
        Cmd::Chop { module, case } => {
            let s = Session::new(&spec(&case, cli.budget_mb)?, cache)?;
            let m = s.module(module)?;
            let c = series::chop(&s.wb, &m, s.spec.seed)?;
            println!("{} of dimension {}", module.name(), m.dim());
            for (w, k, d) in &c.factors {
                println!("  {} x{}  (dim {})", s.factor_name(w), k, d);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Loewy { module, case } => {
            let s = Session::new(&spec(&case, cli.budget_mb)?, cache)?;
            let r = s.loewy(module)?;
            let show = |l: &series::Layer| l.factors.iter().map(|(w, k)| if *k == 1 { s.factor_name(w) } else { format!("{}x{}", s.factor_name(w), k) }).collect::<Vec<_>>().join(" + ");
            println!("{} of dimension {}: Loewy length {}, rigid {}", module.name(), r.dim, r.loewy_length, r.rigid);
            println!("radical layers (top down):");
            for l in &r.radical {
                println!("  {}", show(l));
            }
            println!("socle layers (bottom up):");
            for l in &r.socle {
                println!("  {}", show(l));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Quasi { case } => {
            let s = Session::new(&spec(&case, cli.budget_mb)?, cache)?;
            let q = s.wb.quasi_simple(&s.lambda)?;
            let r = series::loewy(&s.wb, &q.module)?;
            println!("quasi-simple of {}: dimension {}, Loewy length {}", s.factor_name(&s.lambda), q.module.dim(), r.loewy_length);
            println!("  built as image from the standard side: {}", q.case_one);
            if !q.partners.is_empty() {
                println!("  socle partners: {}", q.partners.iter().map(|w| s.factor_name(w)).collect::<Vec<_>>().join(", "));
            }
            for (i, l) in r.radical.iter().enumerate() {
                println!("  layer {}: {}", i + 1, l.factors.iter().map(|(w, k)| format!("{}x{}", s.factor_name(w), k)).collect::<Vec<_>>().join(" + "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Diagram { module, format, case } => {
            let s = Session::new(&spec(&case, cli.budget_mb)?, cache)?;
            print!("{}", harness::diagram(&s, module, format)?);
            if format == DiagramFormat::Json {
                println!();
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
