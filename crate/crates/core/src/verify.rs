//! Grid verification of measured counts against the closed forms.
//!
//! Each grid tuple `(N, M, d, D, x)` builds both geometries, executes their
//! schedules and checks:
//!
//! - `mps-cost`: measured MPS count equals `C_regular`;
//! - `comb-cost`: measured comb count equals `C_comb − M·x²` (published basis);
//! - `phase-terms`: each phase subtotal equals the matching formula terms;
//! - `value-independence`: a second seed yields an identical cost report;
//! - `oracle-value`: the scalar agrees with [`naive_value_oracle_bounded`];
//! - `delta-invariance`: `ΔC` on both bases equals its value at `N = 1, D = d`.
//!
//! Per distinct `(M, d)` with `M ≥ 3` it also checks the Vieta identities of
//! the threshold roots (`vieta`) and the quadratic sign agreement at integer
//! bond dimensions (`quadratic-sign`).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::costmodel::{self, Basis};
use crate::engine::{execute, naive_value_oracle_bounded, plan_for, CostReport};
use crate::network::{build_comb, build_mps, NetworkParams, TensorNetwork};
use crate::{seed, Error, Result};

/// Intermediate-size limit used by the grid's oracle comparisons.
pub const GRID_ORACLE_LIMIT: u128 = 1 << 12;

/// Relative tolerance for scalar agreement with the oracle.
pub const ORACLE_REL_TOL: f64 = 1e-10;

/// Relative tolerance for the Vieta identities.
pub const VIETA_REL_TOL: f64 = 1e-12;

/// Largest bond dimension probed by `quadratic-sign`.
pub const QUADRATIC_PROBE_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// `N ∈ {1,2,3}, M ∈ {2,3,5}, d ∈ {1,2,3}, D ∈ {d, d+1}, x ∈ {1,2,3}`
    Small,
    /// `N ∈ 1..=8, M ∈ 2..=8, d ∈ {1,2,3}, D ∈ {d, d+1}, x ∈ 1..=6`
    Full,
}

impl Grid {
    pub fn tuples(&self) -> Vec<NetworkParams> {
        let (ns, ms, xs): (Vec<usize>, Vec<usize>, Vec<usize>) = match self {
            Grid::Small => (Vec::from([1, 2, 3]), Vec::from([2, 3, 5]), Vec::from([1, 2, 3])),
            Grid::Full => ((1..=8).collect(), (2..=8).collect(), (1..=6).collect()),
        };
        let mut out = Vec::new();
        for &n in &ns {
            for &m in &ms {
                for d in 1..=3 {
                    for raw in [d, d + 1] {
                        for &x in &xs {
                            out.push(NetworkParams {
                                raw_dim: raw,
                                comp_dim: d,
                                bond_dim: x,
                                teeth: m,
                                tooth_len: n,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// The closed forms under test. Swappable so a corrupted formula can be fed in.
#[derive(Debug, Clone, Copy)]
pub struct Formulas {
    pub c_regular: fn(&NetworkParams) -> Result<u64>,
    pub c_comb_printed: fn(&NetworkParams) -> Result<u64>,
}

impl Default for Formulas {
    fn default() -> Self {
        Self {
            c_regular: costmodel::c_regular,
            c_comb_printed: costmodel::c_comb_printed,
        }
    }
}

pub const CHECKS: [&str; 8] = [
    "mps-cost",
    "comb-cost",
    "phase-terms",
    "value-independence",
    "oracle-value",
    "delta-invariance",
    "vieta",
    "quadratic-sign",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckSummary {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub check: &'static str,
    pub params: NetworkParams,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub grid: Grid,
    pub seed: u64,
    pub tuples: usize,
    pub checks: Vec<CheckSummary>,
    pub first_failure: Option<Failure>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

enum Outcome {
    Pass,
    Skip,
    Fail(String),
}

struct Tally {
    checks: Vec<CheckSummary>,
    first_failure: Option<Failure>,
}

impl Tally {
    fn record(&mut self, check: &'static str, params: &NetworkParams, outcome: Outcome) {
        let entry = self.checks.iter_mut().find(|c| c.name == check).expect("known check");
        match outcome {
            Outcome::Pass => entry.passed += 1,
            Outcome::Skip => entry.skipped += 1,
            Outcome::Fail(detail) => {
                entry.failed += 1;
                self.first_failure.get_or_insert(Failure {
                    check,
                    params: *params,
                    detail,
                });
            }
        }
    }
}

fn outcome(r: Result<Option<String>>) -> Outcome {
    match r {
        Ok(None) => Outcome::Pass,
        Ok(Some(msg)) => Outcome::Fail(msg),
        Err(e) => Outcome::Fail(format!("{e}")),
    }
}

pub fn verify(grid: Grid, seed: u64) -> VerifyReport {
    verify_with(grid, seed, &Formulas::default())
}

pub fn verify_with(grid: Grid, seed: u64, formulas: &Formulas) -> VerifyReport {
    let tuples = grid.tuples();
    let mut tally = Tally {
        checks: CHECKS
            .iter()
            .map(|&name| CheckSummary {
                name,
                passed: 0,
                failed: 0,
                skipped: 0,
            })
            .collect(),
        first_failure: None,
    };

    for (i, params) in tuples.iter().enumerate() {
        let tuple_seed = seed::derive(seed, i as u64);
        let mps = build_mps(*params, tuple_seed).and_then(run);
        let comb = build_comb(*params, tuple_seed).and_then(run);

        tally.record(
            "mps-cost",
            params,
            outcome(mps.as_ref().map_err(Clone::clone).and_then(|r| {
                let expected = (formulas.c_regular)(params)?;
                Ok((r.report.total != expected)
                    .then(|| format!("measured {} != C_regular {}", r.report.total, expected)))
            })),
        );
        tally.record(
            "comb-cost",
            params,
            outcome(comb.as_ref().map_err(Clone::clone).and_then(|r| {
                let printed = (formulas.c_comb_printed)(params)?;
                let mx2 = (params.teeth * params.bond_dim * params.bond_dim) as i128;
                let residual = printed as i128 - r.report.total as i128;
                Ok((residual != mx2).then(|| {
                    format!(
                        "measured {} vs printed C_comb {}: residual {} != M·x² {}",
                        r.report.total, printed, residual, mx2
                    )
                }))
            })),
        );
        tally.record(
            "phase-terms",
            params,
            outcome((|| {
                let mps = mps.as_ref().map_err(Clone::clone)?;
                let comb = comb.as_ref().map_err(Clone::clone)?;
                let want_mps = costmodel::phase_totals(&costmodel::regular_terms(params)?)?;
                let want_comb = costmodel::phase_totals(&costmodel::comb_schedule_terms(params)?)?;
                let got_mps: Vec<_> = mps.report.per_phase.iter().map(|(p, v)| (*p, *v)).collect();
                let got_comb: Vec<_> = comb.report.per_phase.iter().map(|(p, v)| (*p, *v)).collect();
                Ok(if strip_zero(&want_mps) != strip_zero(&got_mps) {
                    Some(format!("mps phases {got_mps:?} != terms {want_mps:?}"))
                } else if strip_zero(&want_comb) != strip_zero(&got_comb) {
                    Some(format!("comb phases {got_comb:?} != terms {want_comb:?}"))
                } else {
                    None
                })
            })()),
        );
        tally.record(
            "value-independence",
            params,
            outcome((|| {
                let other = seed::derive(tuple_seed, u64::MAX);
                for (built, first) in [
                    (build_mps(*params, other)?, mps.as_ref().map_err(Clone::clone)?),
                    (build_comb(*params, other)?, comb.as_ref().map_err(Clone::clone)?),
                ] {
                    let (_, report) = execute(&built, &plan_for(&built)?)?;
                    if report.per_phase != first.report.per_phase || report.total != first.report.total {
                        return Ok(Some(format!("{} cost depends on tensor values", built.geometry().name())));
                    }
                }
                Ok(None)
            })()),
        );
        for run in [&mps, &comb] {
            let out = match run {
                Err(e) => Outcome::Fail(format!("{e}")),
                Ok(r) => match naive_value_oracle_bounded(&r.net, GRID_ORACLE_LIMIT) {
                    Err(Error::OracleGuard { .. }) => Outcome::Skip,
                    Err(e) => Outcome::Fail(format!("{e}")),
                    Ok(v) if rel_close(v, r.value, ORACLE_REL_TOL) => Outcome::Pass,
                    Ok(v) => Outcome::Fail(format!(
                        "{} scalar {} vs oracle {}",
                        r.net.geometry().name(),
                        r.value,
                        v
                    )),
                },
            };
            tally.record("oracle-value", params, out);
        }
        tally.record(
            "delta-invariance",
            params,
            outcome((|| {
                let reference = NetworkParams {
                    raw_dim: params.comp_dim,
                    tooth_len: 1,
                    ..*params
                };
                for basis in [Basis::Schedule, Basis::Printed] {
                    let (a, b) = (costmodel::delta_c(params, basis)?, costmodel::delta_c(&reference, basis)?);
                    if a != b {
                        return Ok(Some(format!("{} ΔC {a} != {b} at N=1, D=d", basis.name())));
                    }
                }
                Ok(None)
            })()),
        );
    }

    let pairs: BTreeSet<(usize, usize)> = tuples.iter().map(|p| (p.teeth, p.comp_dim)).collect();
    for (m, d) in pairs {
        let params = NetworkParams {
            raw_dim: d,
            comp_dim: d,
            bond_dim: 1,
            teeth: m,
            tooth_len: 1,
        };
        if m < 3 {
            tally.record("vieta", &params, Outcome::Skip);
            tally.record("quadratic-sign", &params, Outcome::Skip);
            continue;
        }
        let vieta = match costmodel::threshold_roots(d as f64, m) {
            Err(e) => Outcome::Fail(format!("{e}")),
            Ok(t) => match t.roots {
                None => Outcome::Skip,
                Some(r) => match vieta_violation(r, d as f64, m) {
                    None => Outcome::Pass,
                    Some(msg) => Outcome::Fail(msg),
                },
            },
        };
        tally.record("vieta", &params, vieta);
        let sign = match costmodel::crosscheck_quadratic(m, d, 1..=QUADRATIC_PROBE_MAX) {
            Err(e) => Outcome::Fail(format!("{e}")),
            Ok(cc) => match cc.probes.iter().find(|p| !p.agrees) {
                None => Outcome::Pass,
                Some(p) => Outcome::Fail(format!("ΔC={} at x={} but expected {:?}", p.delta_c, p.x, p.expected)),
            },
        };
        tally.record("quadratic-sign", &params, sign);
    }

    VerifyReport {
        grid,
        seed,
        tuples: tuples.len(),
        checks: tally.checks,
        first_failure: tally.first_failure,
    }
}

struct RunResult {
    net: TensorNetwork,
    value: f64,
    report: CostReport,
}

fn run(net: TensorNetwork) -> Result<RunResult> {
    let plan = plan_for(&net)?;
    let (value, report) = execute(&net, &plan)?;
    Ok(RunResult { net, value, report })
}

fn strip_zero(v: &[(crate::Phase, u64)]) -> Vec<(crate::Phase, u64)> {
    v.iter().copied().filter(|(_, c)| *c != 0).collect()
}

/// `|a − b| ≤ tol · max(|a|, |b|)`; exact equality always passes.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || libm::fabs(a - b) <= tol * libm::fmax(libm::fabs(a), libm::fabs(b))
}

/// Checks `x−·x+ = d` and `x− + x+ = d − 2/(M−2)`.
pub fn vieta_violation(roots: (f64, f64), d: f64, teeth: usize) -> Option<String> {
    let (lo, hi) = roots;
    let sum = d - 2.0 / (teeth as f64 - 2.0);
    if !rel_close(lo * hi, d, VIETA_REL_TOL) {
        return Some(format!("x−·x+ = {} != d = {d}", lo * hi));
    }
    if !rel_close(lo + hi, sum, VIETA_REL_TOL) {
        return Some(format!("x− + x+ = {} != {sum}", lo + hi));
    }
    None
}
