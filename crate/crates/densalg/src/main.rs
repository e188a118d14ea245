use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use densalg::expr;
use densalg::manifest::{parse_manifest, Diagnostic, Manifest, ObjectValue};
use densalg::run::{render_text, run_checks, Report};
use densalg_core::pencil::canonical_pencil;
use densalg_core::{Chart, Parity};

#[derive(Parser)]
#[command(
    name = "densalg",
    version,
    about = "Exact checks for second-order operators, brackets and densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a manifest.
    Run {
        manifest: PathBuf,
        /// Overrides the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the JSON report here (`-` for stdout in place of text).
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Parse a manifest and print its canonical form.
    Parse {
        manifest: PathBuf,
        /// Print the resolved structure as JSON instead.
        #[arg(long)]
        ast: bool,
    },
    /// Evaluate expressions line by line. `:chart x:even, xi:odd` switches chart.
    Repl,
    #[command(subcommand)]
    Pencil(PencilCommand),
    #[command(subcommand)]
    Bv(BvCommand),
}

#[derive(Args, Clone)]
struct ChartArg {
    /// Coordinates, e.g. `x:even, xi:odd`.
    #[arg(long, default_value = "x:even, xi:odd")]
    chart: String,
    #[arg(long, default_value = "odd")]
    parity: String,
}

#[derive(Args, Clone)]
struct DataArg {
    #[command(flatten)]
    chart: ChartArg,
    #[arg(long = "s", value_name = "SYMBOL", allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    theta: String,
}

#[derive(Subcommand)]
enum PencilCommand {
    /// Print the canonical pencil of (S, gamma, theta).
    Build {
        #[command(flatten)]
        data: DataArg,
    },
    /// Recover (S, gamma, theta) from an operator on densities of weight w.
    Recover {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        weight: String,
        operator: String,
    },
    CheckSelfadjoint {
        #[command(flatten)]
        data: DataArg,
    },
}

#[derive(Subcommand)]
enum BvCommand {
    Jacobi {
        #[command(flatten)]
        chart: ChartArg,
        operator: String,
    },
    Flatness {
        #[command(flatten)]
        chart: ChartArg,
        operator: String,
    },
    Theorem3 {
        #[command(flatten)]
        data: DataArg,
    },
    Modular {
        #[command(flatten)]
        data: DataArg,
    },
    Reduce {
        #[command(flatten)]
        data: DataArg,
    },
    Master {
        #[command(flatten)]
        chart: ChartArg,
        /// Operator whose bracket is the odd Poisson structure.
        #[arg(long, allow_hyphen_values = true)]
        structure: String,
        #[arg(long, default_value = "1/2")]
        weight: String,
        action: String,
    },
}

fn report_diagnostics(source: &str, diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{source}:{d}");
    }
    ExitCode::from(2)
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn emit(report: &Report, json: bool) -> ExitCode {
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", render_text(report));
    }
    ExitCode::from(report.exit_code() as u8)
}

fn one_object(chart: &ChartArg, objects: &[String], check: &str) -> String {
    format!(
        "[charts]\nM = {}\n\n[objects]\n{}\n\n[checks]\n{check}\n",
        chart.chart,
        objects.join("\n")
    )
}

fn data_line(d: &DataArg) -> String {
    format!(
        "data D @ M {} = S: {}; gamma: {}; theta: {}",
        d.chart.parity, d.s, d.gamma, d.theta
    )
}

/// Run a manifest assembled from command-line arguments; prints JSON.
fn run_inline(text: &str) -> ExitCode {
    match parse_manifest(text) {
        Ok(m) => emit(&run_checks(&m, None), true),
        Err(d) => report_diagnostics("<args>", &d),
    }
}

fn ast(m: &Manifest) -> serde_json::Value {
    json!({
        "seed": m.seed,
        "charts": m.charts.iter().map(|(n, c)| json!({
            "name": n,
            "coords": c.coords().iter().map(|k| json!({"name": k.name, "parity": k.parity.to_string()})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "objects": m.objects.iter().map(|o| {
            let value = match &o.value {
                ObjectValue::Scalar(s) => json!(s.to_string()),
                ObjectValue::Symbol(s) => json!(s.to_string()),
                ObjectValue::Operator(d) => json!({"parity": d.parity().to_string(), "order": d.order(), "text": d.to_string()}),
                ObjectValue::Density(d) => json!(d.to_string()),
                ObjectValue::Data(d) => json!({
                    "parity": d.parity().to_string(),
                    "S": d.s_symbol().to_string(),
                    "gamma": d.gamma.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                    "theta": d.theta.to_string(),
                }),
                ObjectValue::Pencil(p) => json!({
                    "parity": p.parity().to_string(),
                    "delta0": p.delta0().to_string(),
                    "a": p.a().to_string(),
                    "b": p.b().to_string(),
                }),
                ObjectValue::Change { target, forward, inverse } => json!({
                    "target": target,
                    "forward": forward.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "inverse": inverse.as_ref().map(|v| v.iter().map(|f| f.to_string()).collect::<Vec<_>>()),
                }),
            };
            json!({"name": o.name, "kind": o.value.kind(), "chart": o.chart, "value": value})
        }).collect::<Vec<_>>(),
        "checks": m.checks.iter().map(|c| json!({"check": c.kind.name(), "target": c.target, "params": c.params})).collect::<Vec<_>>(),
    })
}

fn repl() -> ExitCode {
    let mut chart = Chart::new(&[("x", Parity::Even), ("xi", Parity::Odd)]).expect("default chart");
    let stdin = io::stdin();
    let mut out = io::stdout();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":quit" {
            break;
        }
        if let Some(spec) = line.strip_prefix(":chart") {
            match parse_manifest(&format!("[charts]\nM = {spec}\n")) {
                Ok(m) => chart = m.charts[0].1.clone(),
                Err(d) => d.iter().for_each(|d| eprintln!("error: {}", d.message)),
            }
            continue;
        }
        match expr::evaluate(line, &chart) {
            Ok(v) => {
                let _ = writeln!(out, "{}: {v}", v.kind());
            }
            Err(e) => eprintln!("{}^ {}", " ".repeat(e.offset), e.message),
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            manifest,
            seed,
            json,
        } => {
            let text = match read(&manifest) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let m = match parse_manifest(&text) {
                Ok(m) => m,
                Err(d) => return report_diagnostics(&manifest.display().to_string(), &d),
            };
            let report = run_checks(&m, seed);
            match json {
                Some(p) if p.as_os_str() == "-" => emit(&report, true),
                Some(p) => {
                    if let Err(e) = fs::write(&p, report.to_json()) {
                        eprintln!("{}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                    emit(&report, false)
                }
                None => emit(&report, false),
            }
        }
        Command::Parse {
            manifest,
            ast: as_ast,
        } => {
            let text = match read(&manifest) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match parse_manifest(&text) {
                Ok(m) if as_ast => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&ast(&m)).expect("serializable")
                    );
                    ExitCode::SUCCESS
                }
                Ok(m) => {
                    print!("{m}");
                    ExitCode::SUCCESS
                }
                Err(d) => report_diagnostics(&manifest.display().to_string(), &d),
            }
        }
        Command::Repl => repl(),
        Command::Pencil(PencilCommand::Build { data }) => {
            let text = one_object(&data.chart, &[data_line(&data)], "");
            let m = match parse_manifest(&text) {
                Ok(m) => m,
                Err(d) => return report_diagnostics("<args>", &d),
            };
            let ObjectValue::Data(d) = &m.objects[0].value else {
                unreachable!("single data object")
            };
            match canonical_pencil(d) {
                Ok(p) => {
                    let v = json!({
                        "S": d.s_symbol().to_string(),
                        "gamma": d.gamma.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                        "theta": d.theta.to_string(),
                        "delta0": p.delta0().to_string(),
                        "a": p.a().to_string(),
                        "b": p.b().to_string(),
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&v).expect("serializable")
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Pencil(PencilCommand::Recover {
            chart,
            weight,
            operator,
        }) => run_inline(&one_object(
            &chart,
            &[format!("operator D @ M {} = {operator}", chart.parity)],
            &format!("recover D weight={weight}"),
        )),
        Command::Pencil(PencilCommand::CheckSelfadjoint { data }) => run_inline(&one_object(
            &data.chart,
            &[data_line(&data)],
            "selfadjoint D",
        )),
        Command::Bv(cmd) => {
            let text = match cmd {
                BvCommand::Jacobi { chart, operator } => one_object(
                    &chart,
                    &[format!("operator D @ M {} = {operator}", chart.parity)],
                    "jacobi D",
                ),
                BvCommand::Flatness { chart, operator } => one_object(
                    &chart,
                    &[format!("operator D @ M {} = {operator}", chart.parity)],
                    "flatness D",
                ),
                BvCommand::Theorem3 { data } => {
                    one_object(&data.chart, &[data_line(&data)], "theorem3 D")
                }
                BvCommand::Modular { data } => {
                    one_object(&data.chart, &[data_line(&data)], "modular D")
                }
                BvCommand::Reduce { data } => {
                    one_object(&data.chart, &[data_line(&data)], "reduce D")
                }
                BvCommand::Master {
                    chart,
                    structure,
                    weight,
                    action,
                } => one_object(
                    &chart,
                    &[
                        format!("operator K @ M {} = {structure}", chart.parity),
                        format!("scalar A @ M = {action}"),
                    ],
                    &format!("master A structure=K weight={weight}"),
                ),
            };
            run_inline(&text)
        }
    }
}
