use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bonnet::config::{RunConfig, MAX_REFINE};
use bonnet::forms2d::SweepOrder;
use bonnet::pipeline::Pipeline;
use bonnet::q_family::QFamily;
use bonnet::surface_embed::export_obj;
use bonnet::verify::{all_passed, failures, run_checks, Report, Stage, VerifyOptions};
use bonnet::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

const EXIT_RESIDUAL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bonnet",
    version,
    about = "Build and verify Bonnet surfaces from a JSON configuration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the six Q families with domains and first-integral constants.
    Families {
        /// Parameter a of the trigonometric and hyperbolic families.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        json: bool,
    },
    /// Solve for ψ and H(s); writes profile.csv, psi.csv and report.json.
    Solve(RunArgs),
    /// Integrate the immersion; writes surface.obj, forms.csv and structure.json.
    Mesh(RunArgs),
    /// Build the deformed surface M*; writes deformed.obj and deform.json.
    Deform {
        #[command(flatten)]
        run: RunArgs,
        /// Deformation parameter t = cot τ at the base corner.
        #[arg(long, allow_negative_numbers = true)]
        t0: f64,
    },
    /// Run every named check; writes verify.json when --out is given.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Deformation parameter for the deform checks (default: config t0, else 1).
        #[arg(long, allow_negative_numbers = true)]
        t0: Option<f64>,
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; the built-in rational demo when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: config `out`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grids in the convergence study; each halves the spacing.
    #[arg(long)]
    refine: Option<u32>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Keep only checks whose name contains this string.
    #[arg(long)]
    only: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_RESIDUAL),
        Err(e) => {
            let kind = if e.is_input_error() { "input" } else { "computation" };
            eprintln!("{}", json!({"error": kind, "message": e.to_string()}));
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn load(args: &RunArgs) -> bonnet::Result<(RunConfig, PathBuf)> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::demo(),
    };
    if let Some(r) = args.refine {
        if r == 0 || r > MAX_REFINE {
            return Err(Error::Config(format!("--refine must be in 1..={MAX_REFINE}")));
        }
        cfg.refine = r;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

fn create(dir: &Path, name: &str) -> bonnet::Result<BufWriter<fs::File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> bonnet::Result<()> {
    let mut w = create(dir, name)?;
    writeln!(w, "{}", serde_json::to_string_pretty(v).expect("json"))?;
    w.flush()?;
    Ok(())
}

fn checks(cfg: &RunConfig, args: &RunArgs, stages: &[Stage], t0: f64, tol_scale: f64) -> bonnet::Result<Report> {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Error::Config("--tol-scale must be positive".into()));
    }
    run_checks(
        cfg,
        &VerifyOptions {
            stages: stages.to_vec(),
            only: args.only.clone(),
            tol_scale,
            t0,
        },
    )
}

fn print_report(report: &Report, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("json"));
        return;
    }
    for (name, c) in report {
        let order = c.observed_order.map_or("-".to_string(), |p| format!("{p:.2}"));
        println!(
            "{:<4} {:<28} {:>11.3e}  tol {:>9.2e}  order {:>5}",
            if c.passed { "ok" } else { "FAIL" },
            name,
            c.max_residual,
            c.tolerance,
            order
        );
    }
    let bad = failures(report);
    if bad.is_empty() {
        println!("{} checks passed", report.len());
    } else {
        println!("{} of {} checks failed: {}", bad.len(), report.len(), bad.join(", "));
    }
}

// JSON has no infinity; -0 prints as 0.
fn bound(x: f64) -> Value {
    if x.is_finite() {
        json!(x + 0.0)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn families(a: f64, as_json: bool) -> bonnet::Result<bool> {
    let rows = QFamily::table(a)?;
    if as_json {
        let v: Vec<Value> = rows
            .iter()
            .map(|f| {
                let (lo, hi) = f.domain();
                json!({
                    "family": f.to_string(),
                    "q": f.formula(),
                    "domain": [bound(lo), bound(hi)],
                    "kappa": f.kappa().ok(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("{:<16} {:<14} {:<24} kappa", "family", "Q(s)", "domain");
        for f in &rows {
            let (lo, hi) = f.domain();
            let kappa = f.kappa()?;
            println!(
                "{:<16} {:<14} {:<24} {}",
                f.to_string(),
                f.formula(),
                format!("({}, {})", bound(lo), bound(hi)),
                kappa
            );
        }
    }
    Ok(true)
}

fn solve(args: &RunArgs) -> bonnet::Result<bool> {
    let (cfg, out) = load(args)?;
    let p = Pipeline::build(&cfg, cfg.grid)?;
    let mut w = create(&out, "profile.csv")?;
    p.profile.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out, "psi.csv")?;
    p.psi.field().write_csv(&mut w, "psi")?;
    w.flush()?;
    let report = checks(&cfg, args, &[Stage::Solve], 1.0, 1.0)?;
    write_json(
        &out,
        "report.json",
        &json!({"checks": report, "psi": p.psi.metadata(cfg.family)}),
    )?;
    print_report(&report, args.json);
    Ok(all_passed(&report))
}

fn write_forms_csv(p: &Pipeline, out: &Path) -> bonnet::Result<()> {
    let ff = p.forms()?;
    let (h, k) = (ff.mean_curvature(), ff.gauss_curvature());
    let g = p.grid;
    let mut w = create(out, "forms.csv")?;
    writeln!(w, "s,t,E,L,M,N,H,K")?;
    for i in 0..g.ns() {
        for j in 0..g.nt() {
            let row = [
                g.s(i),
                g.t(j),
                ff.e_i.at(i, j),
                ff.l.at(i, j),
                ff.m.at(i, j),
                ff.n.at(i, j),
                h.at(i, j),
                k.at(i, j),
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn mesh(args: &RunArgs) -> bonnet::Result<bool> {
    let (cfg, out) = load(args)?;
    let p = Pipeline::build(&cfg, cfg.grid)?;
    fs::create_dir_all(&out)?;
    export_obj(&p.frame(SweepOrder::TEdgeFirst)?, &out.join("surface.obj"))?;
    write_forms_csv(&p, &out)?;
    let report = checks(&cfg, args, &[Stage::Mesh], 1.0, 1.0)?;
    let (structure, rest): (Report, Report) = report
        .clone()
        .into_iter()
        .partition(|(k, _)| k.starts_with("structure_"));
    write_json(&out, "structure.json", &json!({"structure": structure, "checks": rest}))?;
    print_report(&report, args.json);
    Ok(all_passed(&report))
}

fn deform(args: &RunArgs, t0: f64) -> bonnet::Result<bool> {
    if !t0.is_finite() {
        return Err(Error::Config("--t0 must be finite".into()));
    }
    let (cfg, out) = load(args)?;
    let p = Pipeline::build(&cfg, cfg.grid)?;
    let d = p.deform(t0)?;
    fs::create_dir_all(&out)?;
    export_obj(&d.surface.frame, &out.join("deformed.obj"))?;
    let report = checks(&cfg, args, &[Stage::Deform], t0, 1.0)?;
    let r = d.report;
    write_json(
        &out,
        "deform.json",
        &json!({
            "t0": r.t0,
            "metric_deviation": r.metric_deviation,
            "H_deviation": r.h_deviation,
            "II_deviation": r.ii_deviation,
            "checks": report,
        }),
    )?;
    print_report(&report, args.json);
    Ok(all_passed(&report))
}

fn verify(args: &RunArgs, t0: Option<f64>, tol_scale: f64) -> bonnet::Result<bool> {
    let (cfg, _) = load(args)?;
    let t0 = t0.or(cfg.t0).unwrap_or(1.0);
    let report = checks(&cfg, args, &Stage::ALL, t0, tol_scale)?;
    if let Some(dir) = &args.out {
        let mut w = create(dir, "verify.json")?;
        writeln!(w, "{}", bonnet::verify::report_json(&report))?;
        w.flush()?;
    }
    print_report(&report, args.json);
    Ok(all_passed(&report))
}

fn run(cmd: Command) -> bonnet::Result<bool> {
    match cmd {
        Command::Families { a, json } => families(a, json),
        Command::Solve(args) => solve(&args),
        Command::Mesh(args) => mesh(&args),
        Command::Deform { run, t0 } => deform(&run, t0),
        Command::Verify { run, t0, tol_scale } => verify(&run, t0, tol_scale),
    }
}
