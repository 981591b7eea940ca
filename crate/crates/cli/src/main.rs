use std::process::ExitCode;

use clap::{Parser, Subcommand};
use overrank::oracle::{deviation, RankTable, Which, DEFAULT_ORACLE_RANGE};
use overrank::par::{self, Mode};
use overrank::theorems::is_counted;
use overrank::{QSeries, VerificationReport};
use overrank_cli::expr;
use overrank_cli::verify::{self, Group, Selection};
use serde_json::json;

#[derive(Parser)]
#[command(name = "overrank", version, about = "Exact q-series expansions and rank deviation identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand an expression to O(q^N).
    Expand {
        expr: String,
        #[arg(long, default_value_t = verify::DEFAULT_ORDER)]
        order: i64,
        #[arg(long)]
        json: bool,
    },
    /// The deviation D(a, M) of ranks (or M2-ranks with --m2).
    Dev {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long = "M")]
        modulus: i64,
        #[arg(long)]
        m2: bool,
        #[arg(long, default_value_t = verify::DEFAULT_ORDER)]
        order: i64,
        #[arg(long)]
        json: bool,
    },
    /// Check a group of identities against the enumeration oracle.
    Verify {
        #[arg(value_enum)]
        group: Group,
        #[arg(long = "M")]
        modulus: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        /// Truncation order; defaults to 60 for the formulas and to each
        /// identity's own order elsewhere.
        #[arg(long)]
        order: Option<i64>,
        #[arg(long)]
        json: bool,
        /// Worker threads for independent cases; 1 runs sequentially.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Dump the rank table for overpartitions of n <= N as JSON.
    Oracle {
        #[arg(long, default_value_t = DEFAULT_ORACLE_RANGE)]
        nmax: i64,
        #[arg(long)]
        m2: bool,
    },
}

fn series_json(s: &QSeries, order: i64) -> serde_json::Value {
    let coefficients: Vec<_> = s
        .terms()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| json!({ "exponent": e, "coefficient": c.to_string() }))
        .collect();
    json!({ "order": order, "series": s.to_string(), "coefficients": coefficients })
}

fn print_series(s: &QSeries, order: i64, json: bool, label: serde_json::Value) {
    if json {
        let mut v = series_json(s, order);
        if let (Some(o), Some(l)) = (v.as_object_mut(), label.as_object()) {
            o.extend(l.clone());
        }
        println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
    } else {
        println!("{s}");
    }
}

fn check_order(order: i64) -> Result<(), String> {
    if order < 0 {
        return Err(format!("--order must be non-negative, got {order}"));
    }
    Ok(())
}

fn expand(src: &str, order: i64, json: bool) -> Result<ExitCode, String> {
    check_order(order)?;
    let e = expr::parse(src).map_err(|err| {
        let caret = if err.line == 1 {
            format!("\n  {src}\n  {}^", " ".repeat(err.column - 1))
        } else {
            String::new()
        };
        format!("{err}{caret}")
    })?;
    let s = expr::eval(&e, order).map_err(|err| err.to_string())?;
    print_series(&s, order, json, json!({ "expr": e.to_string() }));
    Ok(ExitCode::SUCCESS)
}

fn dev(a: i64, modulus: i64, m2: bool, order: i64, json: bool) -> Result<ExitCode, String> {
    check_order(order)?;
    let which = if m2 { Which::M2 } else { Which::Rank };
    let s = deviation(a, modulus, which, order, DEFAULT_ORACLE_RANGE).map_err(|e| e.to_string())?;
    print_series(&s, order, json, json!({ "which": which.to_string(), "a": a, "M": modulus }));
    Ok(ExitCode::SUCCESS)
}

fn run_verify(group: Group, sel: Selection, order: Option<i64>, json: bool, jobs: Option<usize>) -> Result<ExitCode, String> {
    if let Some(n) = order {
        check_order(n)?;
    }
    if (sel.modulus.is_some() || sel.a.is_some()) && !matches!(group, Group::Thm1 | Group::Thm2 | Group::All) {
        return Err("--M and --a apply to thm1, thm2 and all only".into());
    }
    match jobs {
        Some(0) => return Err("--jobs must be at least 1".into()),
        Some(1) => par::set_mode(Mode::Sequential),
        // read by rayon when its global pool starts, which has not happened yet
        Some(k) => std::env::set_var("RAYON_NUM_THREADS", k.to_string()),
        None => {}
    }
    let reports = verify::run(group, sel, order);
    let failing: Vec<&VerificationReport> = reports.iter().filter(|r| is_counted(r) && !r.passed()).collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("serializable"));
    } else {
        for r in &reports {
            println!("{}", r.summary_line());
        }
        let informational = reports.len() - reports.iter().filter(|r| is_counted(r)).count();
        println!(
            "{} reports: {} failed, {} informational",
            reports.len(),
            failing.len(),
            informational
        );
    }
    for r in &failing {
        eprintln!("{}", r.summary_line());
    }
    Ok(if failing.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn oracle(nmax: i64, m2: bool) -> Result<ExitCode, String> {
    let which = if m2 { Which::M2 } else { Which::Rank };
    let t = RankTable::cached(which, nmax).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string(&*t).expect("serializable"));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Expand { expr, order, json } => {
            par::set_mode(Mode::Sequential);
            expand(&expr, order, json)
        }
        Command::Dev { a, modulus, m2, order, json } => {
            par::set_mode(Mode::Sequential);
            dev(a, modulus, m2, order, json)
        }
        Command::Verify { group, modulus, a, order, json, jobs } => {
            run_verify(group, Selection { modulus, a }, order, json, jobs)
        }
        Command::Oracle { nmax, m2 } => oracle(nmax, m2),
    };
    result.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    })
}
