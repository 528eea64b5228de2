use std::io::Write;
use std::path::Path;
use std::time::Instant;

use combtn_core::costmodel::{self, Term};
use combtn_core::engine::{execute, plan_for};
use combtn_core::network::{build_comb, build_mps};
use combtn_core::verify::{self, Grid, VerifyReport};
use combtn_core::{Basis, NetworkParams, Regime, TensorNetwork, ThresholdResult};
use serde::Serialize;

use crate::args::{BenchArgs, Command, ContractArgs, CostArgs, Kind, SweepArgs, ThresholdArgs};
use crate::formats::{self, BenchRow};
use crate::{svg, CliError};

/// The worked example whose upper root is commonly quoted as 28.83.
const EXAMPLE_TEETH: usize = 50;
const EXAMPLE_D: f64 = 30.0;
const QUOTED_X_PLUS: f64 = 28.83;

pub fn run(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Cost(a) => cost(a, out),
        Command::Threshold(a) => threshold(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Verify(a) => {
            let report = verify::verify(a.grid.into(), a.seed);
            print_verify(&report, out)
        }
        Command::Contract(a) => contract(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn w(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text)
        .map_err(|e| CliError::io("<stdout>", e))
}

macro_rules! outln {
    ($out:expr) => {
        w($out, format_args!("\n"))
    };
    ($out:expr, $($arg:tt)*) => {
        w($out, format_args!("{}\n", format_args!($($arg)*)))
    };
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn describe(p: &NetworkParams) -> String {
    format!(
        "N={} M={} D={} d={} x={}",
        p.tooth_len, p.teeth, p.raw_dim, p.comp_dim, p.bond_dim
    )
}

fn print_terms(out: &mut dyn Write, title: &str, terms: &[Term]) -> Result<(), CliError> {
    outln!(out, "{title}")?;
    for t in terms {
        let phase = t.phase.map_or("(no step)", |p| p.tag());
        outln!(out, "  {:<18} {:<14} {:>16}", phase, t.label, t.value)?;
    }
    Ok(())
}

fn cost(a: &CostArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = a.shape.params(a.bond)?;
    let basis: Basis = a.basis.into();
    let regular = costmodel::c_regular(&p)?;
    let schedule = costmodel::c_comb_schedule(&p)?;
    let printed = costmodel::c_comb_printed(&p)?;
    let delta = costmodel::delta_c(&p, basis)?;

    outln!(out, "parameters: {}", describe(&p))?;
    outln!(out, "basis: {}", basis.name())?;
    outln!(out)?;
    outln!(out, "{:<32} {:>16}", "C_regular", regular)?;
    outln!(out, "{:<32} {:>16}", "C_comb (schedule)", schedule)?;
    outln!(out, "{:<32} {:>16}", "C_comb (printed)", printed)?;
    outln!(out, "{:<32} {:>16}", "printed - schedule (M·x²)", printed - schedule)?;
    let verdict = match delta.signum() {
        1 => "comb cheaper",
        -1 => "MPS cheaper",
        _ => "equal",
    };
    outln!(out, "{:<32} {:>16}  {verdict}", format!("ΔC = C_regular - C_comb ({})", basis.name()), delta)?;
    outln!(out)?;
    print_terms(out, "C_regular terms:", &costmodel::regular_terms(&p)?)?;
    let comb_terms = match basis {
        Basis::Schedule => costmodel::comb_schedule_terms(&p)?,
        Basis::Printed => costmodel::comb_printed_terms(&p)?,
    };
    print_terms(out, &format!("C_comb terms ({}):", basis.name()), &comb_terms)
}

#[derive(Debug, Serialize)]
struct ThresholdJson {
    x_minus: Option<f64>,
    x_plus: Option<f64>,
    regime: &'static str,
    discriminant: f64,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn is_worked_example(t: &ThresholdResult) -> bool {
    t.teeth == EXAMPLE_TEETH && t.d == EXAMPLE_D
}

/// Note printed next to the worked example: the quoted 28.83 is not what the closed form gives.
pub fn example_note(x_plus: f64) -> String {
    format!(
        "note: for M=50, d=30 the upper root is often quoted as x+ ≈ {QUOTED_X_PLUS}; \
         evaluating the closed-form root gives {x_plus:.6}, a difference of ≈ {:.2}",
        x_plus - QUOTED_X_PLUS
    )
}

fn threshold(a: &ThresholdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = costmodel::threshold_roots(a.dim_comp, a.teeth)?;
    if a.json {
        let body = ThresholdJson {
            x_minus: t.roots.map(|r| round6(r.0)),
            x_plus: t.roots.map(|r| round6(r.1)),
            regime: t.regime.name(),
            discriminant: round6(t.discriminant),
        };
        outln!(out, "{}", serde_json::to_string(&body).expect("plain struct serializes"))?;
        if let (true, Some((_, hi))) = (is_worked_example(&t), t.roots) {
            eprintln!("{}", example_note(hi));
        }
        return Ok(());
    }
    outln!(out, "M = {}, d = {}", t.teeth, t.d)?;
    if t.teeth == 2 {
        outln!(out, "quadratic degenerates at M = 2 (ΔC = -2x² < 0 for every x)")?;
        outln!(out, "regime: {}; MPS always cheaper", t.regime.name())?;
        return Ok(());
    }
    outln!(out, "quadratic: {}·x² + ({})·x + {} = 0", t.a, t.b, t.c)?;
    outln!(out, "discriminant: {}", t.discriminant)?;
    match t.roots {
        None => {
            outln!(out, "no real roots; MPS always cheaper")?;
            outln!(out, "regime: {}", t.regime.name())?;
        }
        Some((lo, hi)) => {
            outln!(out, "x- = {lo:.2}")?;
            outln!(out, "x+ = {hi:.2}")?;
            match t.regime {
                Regime::CombWindow { .. } => {
                    outln!(out, "regime: CombWindow (comb cheaper for {lo:.2} < x < {hi:.2})")?
                }
                Regime::Degenerate => outln!(out, "regime: Degenerate (double root; comb never strictly cheaper)")?,
                Regime::MpsAlwaysCheaper => {
                    outln!(out, "regime: MpsAlwaysCheaper (roots not positive; MPS always cheaper)")?
                }
            }
            if is_worked_example(&t) {
                outln!(out, "{}", example_note(hi))?;
            }
        }
    }
    Ok(())
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = costmodel::threshold_sweep(a.teeth, a.d_min, a.d_max, a.step)?;
    let csv = formats::sweep_csv(&rows);
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            outln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => w(out, format_args!("{csv}"))?,
    }
    if let Some(path) = &a.svg {
        write_file(path, &svg::threshold_chart(&rows, a.teeth))?;
        if a.out.is_some() {
            outln!(out, "wrote chart to {}", path.display())?;
        }
    }
    Ok(())
}

fn grid_name(g: Grid) -> &'static str {
    match g {
        Grid::Small => "small",
        Grid::Full => "full",
    }
}

/// Prints the verification table; a failed check becomes exit code 1.
pub fn print_verify(report: &VerifyReport, out: &mut dyn Write) -> Result<(), CliError> {
    outln!(
        out,
        "grid: {} ({} tuples), seed {}",
        grid_name(report.grid),
        report.tuples,
        report.seed
    )?;
    outln!(out, "{:<20} {:>8} {:>8} {:>8}  status", "check", "passed", "failed", "skipped")?;
    for c in &report.checks {
        let status = if c.failed > 0 { "FAIL" } else { "PASS" };
        outln!(out, "{:<20} {:>8} {:>8} {:>8}  {status}", c.name, c.passed, c.failed, c.skipped)?;
    }
    match &report.first_failure {
        None => {
            outln!(out, "result: PASS")?;
            Ok(())
        }
        Some(f) => {
            let msg = format!("{} at {}: {}", f.check, describe(&f.params), f.detail);
            outln!(out, "result: FAIL ({msg})")?;
            Err(CliError::Verification(msg))
        }
    }
}

fn build(kind: Kind, params: NetworkParams, seed: u64) -> combtn_core::Result<TensorNetwork> {
    match kind {
        Kind::Mps => build_mps(params, seed),
        Kind::Comb => build_comb(params, seed),
    }
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Mps => "mps",
        Kind::Comb => "comb",
    }
}

#[derive(Debug, Serialize)]
struct ContractJson {
    kind: &'static str,
    scalar: f64,
    measured_mults: u64,
    analytic_printed: u64,
    analytic_schedule: u64,
    residual_printed_minus_measured: i64,
    per_phase: std::collections::BTreeMap<&'static str, u64>,
}

fn contract(a: &ContractArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = a.shape.params(a.bond)?;
    let mut net = build(a.kind, params, a.seed)?;
    if let Some(path) = &a.data {
        let rows = formats::read_data_matrix(path, params.sites(), params.raw_dim)?;
        net = net.attach_data(&rows)?;
    }
    if a.orthonormal_u {
        net = net.set_orthonormal_compressions(a.seed);
    }
    let plan = plan_for(&net)?;
    let (scalar, report) = execute(&net, &plan)?;

    if a.json {
        let body = ContractJson {
            kind: kind_name(a.kind),
            scalar,
            measured_mults: report.total,
            analytic_printed: report.analytic_printed,
            analytic_schedule: report.analytic_schedule,
            residual_printed_minus_measured: report.residual_printed_minus_measured,
            per_phase: report.per_phase.iter().map(|(p, v)| (p.tag(), *v)).collect(),
        };
        return outln!(out, "{}", serde_json::to_string(&body).expect("plain struct serializes"));
    }
    outln!(out, "kind: {}", kind_name(a.kind))?;
    outln!(out, "parameters: {}", describe(&params))?;
    outln!(out, "seed: {}", a.seed)?;
    outln!(out, "scalar: {scalar:?}")?;
    outln!(out, "measured multiplications: {}", report.total)?;
    for (phase, v) in &report.per_phase {
        outln!(out, "  {:<18} {:>16}", phase.tag(), v)?;
    }
    match a.kind {
        Kind::Mps => outln!(out, "analytic C_regular: {}", report.analytic_printed)?,
        Kind::Comb => {
            outln!(out, "analytic C_comb (schedule): {}", report.analytic_schedule)?;
            outln!(out, "analytic C_comb (printed): {}", report.analytic_printed)?;
        }
    }
    outln!(out, "residual (printed - measured): {}", report.residual_printed_minus_measured)?;
    outln!(out, "peak intermediate elements: {}", report.peak_elements)
}

fn median(mut xs: Vec<u128>) -> u128 {
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2
    }
}

pub fn bench_rows(a: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    if a.reps < 3 {
        return Err(CliError::Usage(format!("--reps must be at least 3 (got {})", a.reps)));
    }
    let mut rows = Vec::new();
    for kind in [Kind::Mps, Kind::Comb] {
        for &bond in &a.bond_list {
            let params = a.shape.params(bond)?;
            let net = build(kind, params, a.seed)?;
            let plan = plan_for(&net)?;
            let (_, report) = execute(&net, &plan)?;
            let times = (0..a.reps)
                .map(|_| {
                    let start = Instant::now();
                    let r = execute(&net, &plan);
                    let elapsed = start.elapsed().as_nanos();
                    std::hint::black_box(r).map(|_| elapsed)
                })
                .collect::<combtn_core::Result<Vec<u128>>>()?;
            rows.push(BenchRow {
                kind: kind_name(kind),
                bond,
                measured_mults: report.total,
                median_ns: median(times),
                reps: a.reps,
            });
        }
    }
    Ok(rows)
}

fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = bench_rows(a)?;
    let csv = formats::bench_csv(&rows);
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            outln!(out, "wrote {} rows to {}", rows.len(), path.display())
        }
        None => w(out, format_args!("{csv}")),
    }
}
