//! The `mec-alloc` command line. Exit codes: 0 on success, 1 on usage
//! errors, 2 on runtime errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use super::{
    read_rows, request_popularity, run_suite, summarize, summary_to_csv, svg_plot, write_rows, ClassSpec, ExperimentConfig,
    Preset, SliceName, SliceSpec,
};
use crate::model::{check_feasibility, DEFAULT_TOL};
use crate::policies::{run_policy, PolicyKind, PolicyParams, PolicyReport, RejectCause, DEFAULT_MU};
use crate::scenario::{
    generate_grid_scenario, read_document, read_scenario, sample_service_requests, tiny_instance, write_document, Document,
    Scenario, ServiceRequest,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mec-alloc", version, about = "Service placement and data routing for IoT providers on a MEC slice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a scenario and a request list.
    Generate(GenerateArgs),
    /// Run one policy and print its report as JSON.
    Solve(SolveArgs),
    /// Run several policies on the same instance.
    Compare(CompareArgs),
    /// Run an experiment sweep from a TOML config and write the CSV table.
    Sweep(SweepArgs),
    /// Summarize a sweep table and optionally plot one metric.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// paper-desk, paper or tiny.
    #[arg(long, default_value = "paper-desk")]
    preset: String,
    /// scen-a or scen-b.
    #[arg(long, default_value = "scen-a")]
    slice: String,
    /// Use the slice's per-link backhaul verbatim on the desk preset.
    #[arg(long)]
    no_mesh_backhaul: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    services: usize,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Comma-separated request classes.
    #[arg(long, default_value = "VR", value_delimiter = ',')]
    classes: Vec<String>,
    #[arg(short, long)]
    output: PathBuf,
    /// Write the requests to this file instead of next to the scenario.
    #[arg(long)]
    requests: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Seed of the randomized policies.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time budget of the exact policy, seconds.
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    /// Scenario file, optionally followed by a separate request file.
    #[arg(required = true, num_args = 1..=2)]
    files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    policy: String,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, default_value = "lr,gff,gbf,dsp", value_delimiter = ',')]
    policies: Vec<String>,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Print the reports as a JSON array.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the percentile summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Sweep table written by `sweep`.
    input: PathBuf,
    /// Summary CSV destination; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Plot `metric` into this SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value = "deployed_frac")]
    metric: String,
    #[arg(long)]
    title: Option<String>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock())
}

/// As [`run`], with standard output redirected to `out`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Report(a) => report(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

fn slice_spec(name: &str) -> Result<SliceSpec> {
    match name {
        "scen-a" => Ok(SliceSpec::Named(SliceName::ScenA)),
        "scen-b" => Ok(SliceSpec::Named(SliceName::ScenB)),
        other => Err(Error::Config(format!("unknown slice `{other}` (expected scen-a or scen-b)"))),
    }
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let (s, req) = if a.preset == "tiny" {
        tiny_instance(a.seed)?
    } else {
        let preset = Preset::parse(&a.preset)
            .ok_or_else(|| Error::Config(format!("unknown preset `{}` (expected paper-desk, paper or tiny)", a.preset)))?;
        let params = preset.params(slice_spec(&a.slice)?.capacities(), !a.no_mesh_backhaul);
        let s = generate_grid_scenario(&params, a.seed)?;
        let classes = a
            .classes
            .iter()
            .map(|c| ClassSpec::Named(c.trim().to_string()).resolve())
            .collect::<Result<Vec<_>>>()?;
        let pop = request_popularity(&s, &classes, &[[0.25, 0.25], [0.75, 0.75]], a.alpha)?;
        let req = sample_service_requests(&classes, a.services, &pop, &s.data_types, super::sub_seed(a.seed, 1))?;
        (s, req)
    };
    match &a.requests {
        Some(rp) => {
            write_document(&Document::new(Some(s.clone()), Vec::new()), &a.output)?;
            write_document(&Document::new(None, req.clone()), rp)?;
        }
        None => write_document(&Document::new(Some(s.clone()), req.clone()), &a.output)?,
    }
    emit(
        out,
        &format!(
            "wrote {}: {} cells, {} hosts, {} resources, {} requests\n",
            a.output.display(),
            s.n_cells(),
            s.n_hosts(),
            s.n_resources(),
            req.len()
        ),
    )
}

fn load_instance(files: &[PathBuf]) -> Result<(Scenario, Vec<ServiceRequest>)> {
    let (s, mut req) = read_scenario(&files[0])?;
    if let Some(rp) = files.get(1) {
        req = read_document(rp)?.requests;
        s.validate_requests(&req)?;
    }
    Ok((s, req))
}

fn policy_kind(name: &str) -> Result<PolicyKind> {
    PolicyKind::parse(name.trim())
        .ok_or_else(|| Error::Config(format!("unknown policy `{name}` (expected lr, gff, gbf, dsp or exact)")))
}

fn params(a: &InstanceArgs) -> Result<PolicyParams> {
    if !(0.0..=1.0).contains(&a.mu) {
        return Err(Error::Config(format!("mu must lie in [0, 1], got {}", a.mu)));
    }
    if !(a.budget > 0.0 && a.budget.is_finite()) {
        return Err(Error::Config("budget must be a positive number of seconds".into()));
    }
    Ok(PolicyParams {
        mu: a.mu,
        seed: a.seed,
        exact_budget: Duration::from_secs_f64(a.budget),
    })
}

fn checked(kind: PolicyKind, s: &Scenario, req: &[ServiceRequest], p: &PolicyParams) -> Result<PolicyReport> {
    let rep = run_policy(kind, s, req, p);
    let v = check_feasibility(s, req, &rep.allocation, DEFAULT_TOL);
    if !v.is_empty() {
        return Err(Error::InfeasibleAllocation {
            policy: kind.name().into(),
            detail: format!("{} violated constraints, first {:?}", v.len(), v[0]),
        });
    }
    Ok(rep)
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<()> {
    let kind = policy_kind(&a.policy)?;
    let p = params(&a.instance)?;
    let (s, req) = load_instance(&a.instance.files)?;
    let rep = checked(kind, &s, &req, &p)?;
    let json = serde_json::to_string_pretty(&rep).expect("report serialization is infallible") + "\n";
    match &a.output {
        Some(path) => fs::write(path, json).map_err(io_err(path)),
        None => emit(out, &json),
    }
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let kinds = a.policies.iter().map(|n| policy_kind(n)).collect::<Result<Vec<_>>>()?;
    let p = params(&a.instance)?;
    let (s, req) = load_instance(&a.instance.files)?;
    let reports = kinds.iter().map(|&k| checked(k, &s, &req, &p)).collect::<Result<Vec<_>>>()?;
    if a.json {
        let json = serde_json::to_string_pretty(&reports).expect("report serialization is infallible") + "\n";
        return emit(out, &json);
    }
    let mut text = format!(
        "{:<6} {:>8} {:>10} {:>12} {:>10}  {:>4} {:>4} {:>4} {:>4}\n",
        "policy", "deployed", "J", "J_edge", "runtime_s", "cpu", "sto", "fh", "bh"
    );
    for r in &reports {
        let c = RejectCause::ALL.map(|cause| r.rejects(cause));
        text += &format!(
            "{:<6} {:>4}/{:<3} {:>10.4} {:>12.4} {:>10.4}  {:>4} {:>4} {:>4} {:>4}\n",
            r.policy,
            r.deployed(),
            req.len(),
            r.objective.j,
            r.objective.j_edge,
            r.runtime_s,
            c[0],
            c[1],
            c[2],
            c[3]
        );
    }
    emit(out, &text)
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = ExperimentConfig::from_path(&a.config)?;
    let rows = run_suite(&cfg)?;
    let f = fs::File::create(&a.output).map_err(io_err(&a.output))?;
    write_rows(f, &rows)?;
    if let Some(path) = &a.summary {
        fs::write(path, summary_to_csv(&summarize(&rows))).map_err(io_err(path))?;
    }
    emit(out, &format!("wrote {} rows to {}\n", rows.len(), a.output.display()))
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let rows = read_rows(&a.input)?;
    if rows.is_empty() {
        return Err(Error::Config(format!("{} holds no rows", a.input.display())));
    }
    let summary = summarize(&rows);
    let table = summary_to_csv(&summary);
    match &a.output {
        Some(path) => fs::write(path, &table).map_err(io_err(path))?,
        None => emit(out, &table)?,
    }
    if let Some(path) = &a.svg {
        let title = a.title.clone().unwrap_or_else(|| format!("{} vs {}", a.metric, rows[0].axis.name()));
        let svg = svg_plot(&summary, &a.metric, &title)
            .ok_or_else(|| Error::Config(format!("no metric `{}` in the table", a.metric)))?;
        fs::write(path, svg).map_err(io_err(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run_with(std::iter::once("mec-alloc").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(call(&[]).0, 1);
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["solve", "--bogus", "x.json"]).0, 1);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn runtime_errors_exit_with_two() {
        assert_eq!(call(&["solve", "--policy", "lr", "/nonexistent/s.json"]).0, 2);
        assert_eq!(call(&["solve", "--policy", "nope", "/nonexistent/s.json"]).0, 2);
    }

    #[test]
    fn generate_then_solve() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s.json");
        let r = dir.path().join("r.json");
        let (code, text) = call(&[
            "generate", "--preset", "tiny", "--seed", "3", "-o", s.to_str().unwrap(), "--requests", r.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{text}");
        let (code, text) = call(&["solve", "--policy", "dsp", s.to_str().unwrap(), r.to_str().unwrap()]);
        assert_eq!(code, 0);
        let rep: PolicyReport = serde_json::from_str(&text).unwrap();
        assert_eq!(rep.policy, "dsp");
        let (code, text) = call(&["compare", "--policies", "gff,gbf,exact", s.to_str().unwrap(), r.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 4);
    }
}
