//! Closed-form multiplication counts and the MPS-vs-comb threshold.
//!
//! Three polynomials are carried:
//!
//! - `C_regular = NMDd + 2xd + (NM−2)x²d + (NM−2)x² + x` for the MPS;
//! - `C_comb` as published:
//!   `(NdD + dx + (N−1)dx² + (N−1)x² + x²)M + 2x² + (M−2)x³ + (M−2)x² + x`;
//! - the count of the comb schedule actually executed by [`crate::engine`],
//!   which is the published value minus `M·x²`. No contraction step matches
//!   the per-tooth `+x²` term, and the threshold quadratic below is exactly the
//!   root condition of `C_regular − (C_comb − M·x²)`.
//!
//! With the schedule basis, `ΔC(x) = −x·((M−2)x² + (2 − d(M−2))x + d(M−2))`,
//! so the comb is cheaper strictly between the two roots of the quadratic.

use alloc::format;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::network::NetworkParams;
use crate::{Error, Result};

/// Contraction phase a step (or formula term) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Compress,
    AbsorbPhysical,
    ToothSweep,
    ToothToBackbone,
    ChainSweep,
    FinalDot,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::Compress,
        Phase::AbsorbPhysical,
        Phase::ToothSweep,
        Phase::ToothToBackbone,
        Phase::ChainSweep,
        Phase::FinalDot,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Phase::Compress => "compress",
            Phase::AbsorbPhysical => "absorb-physical",
            Phase::ToothSweep => "tooth-sweep",
            Phase::ToothToBackbone => "tooth-to-backbone",
            Phase::ChainSweep => "chain-sweep",
            Phase::FinalDot => "final-dot",
        }
    }
}

/// Which comb polynomial to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Basis {
    /// The published formula, including the per-tooth `x²`.
    Printed,
    /// The count of the executed schedule.
    #[default]
    Schedule,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Printed => "printed",
            Basis::Schedule => "schedule",
        }
    }
}

fn prod(factors: &[u64]) -> Result<u64> {
    factors
        .iter()
        .try_fold(1u64, |acc, &f| acc.checked_mul(f))
        .ok_or(Error::CountOverflow)
}

fn sum(terms: &[u64]) -> Result<u64> {
    terms
        .iter()
        .try_fold(0u64, |acc, &t| acc.checked_add(t))
        .ok_or(Error::CountOverflow)
}

struct Vars {
    raw: u64,
    d: u64,
    x: u64,
    m: u64,
    n: u64,
}

fn vars(p: &NetworkParams) -> Result<Vars> {
    p.validate()?;
    Ok(Vars {
        raw: p.raw_dim as u64,
        d: p.comp_dim as u64,
        x: p.bond_dim as u64,
        m: p.teeth as u64,
        n: p.tooth_len as u64,
    })
}

/// `C_regular`, evaluated exactly as published.
pub fn c_regular(p: &NetworkParams) -> Result<u64> {
    let Vars { raw, d, x, m, n } = vars(p)?;
    let nm = prod(&[n, m])?;
    sum(&[
        prod(&[n, m, raw, d])?,
        prod(&[2, x, d])?,
        prod(&[nm - 2, x, x, d])?,
        prod(&[nm - 2, x, x])?,
        x,
    ])
}

/// Published `C_comb`, evaluated exactly as printed.
pub fn c_comb_printed(p: &NetworkParams) -> Result<u64> {
    let Vars { raw, d, x, m, n } = vars(p)?;
    let per_tooth = sum(&[
        prod(&[n, d, raw])?,
        prod(&[d, x])?,
        prod(&[n - 1, d, x, x])?,
        prod(&[n - 1, x, x])?,
        prod(&[x, x])?,
    ])?;
    sum(&[
        prod(&[per_tooth, m])?,
        prod(&[2, x, x])?,
        prod(&[m - 2, x, x, x])?,
        prod(&[m - 2, x, x])?,
        x,
    ])
}

/// Comb count of the executed schedule: `c_comb_printed − M·x²`.
pub fn c_comb_schedule(p: &NetworkParams) -> Result<u64> {
    let printed = c_comb_printed(p)?;
    let extra = prod(&[p.teeth as u64, p.bond_dim as u64, p.bond_dim as u64])?;
    Ok(printed - extra)
}

pub fn c_comb(p: &NetworkParams, basis: Basis) -> Result<u64> {
    match basis {
        Basis::Printed => c_comb_printed(p),
        Basis::Schedule => c_comb_schedule(p),
    }
}

/// `C_regular − C_comb` on the chosen basis.
pub fn delta_c(p: &NetworkParams, basis: Basis) -> Result<i64> {
    let diff = c_regular(p)? as i128 - c_comb(p, basis)? as i128;
    i64::try_from(diff).map_err(|_| Error::CountOverflow)
}

/// One additive term of a cost polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub label: &'static str,
    /// `None` for a printed term no schedule step accounts for.
    pub phase: Option<Phase>,
    pub value: u64,
}

fn term(label: &'static str, phase: Option<Phase>, value: u64) -> Term {
    Term { label, phase, value }
}

/// `C_regular` split term by term, each tagged with the MPS phase it counts.
pub fn regular_terms(p: &NetworkParams) -> Result<Vec<Term>> {
    let Vars { raw, d, x, m, n } = vars(p)?;
    let nm = prod(&[n, m])?;
    Ok(Vec::from([
        term("N·M·D·d", Some(Phase::Compress), prod(&[nm, raw, d])?),
        term("2·x·d", Some(Phase::AbsorbPhysical), prod(&[2, x, d])?),
        term("(N·M−2)·x²·d", Some(Phase::AbsorbPhysical), prod(&[nm - 2, x, x, d])?),
        term("(N·M−2)·x²", Some(Phase::ChainSweep), prod(&[nm - 2, x, x])?),
        term("x", Some(Phase::FinalDot), x),
    ]))
}

/// Published `C_comb` split term by term. The per-tooth `M·x²` has no phase.
pub fn comb_printed_terms(p: &NetworkParams) -> Result<Vec<Term>> {
    let Vars { raw, d, x, m, n } = vars(p)?;
    Ok(Vec::from([
        term("M·N·d·D", Some(Phase::Compress), prod(&[m, n, d, raw])?),
        term("M·d·x", Some(Phase::AbsorbPhysical), prod(&[m, d, x])?),
        term("M·(N−1)·d·x²", Some(Phase::AbsorbPhysical), prod(&[m, n - 1, d, x, x])?),
        term("M·(N−1)·x²", Some(Phase::ToothSweep), prod(&[m, n - 1, x, x])?),
        term("M·x²", None, prod(&[m, x, x])?),
        term("2·x²", Some(Phase::ToothToBackbone), prod(&[2, x, x])?),
        term("(M−2)·x³", Some(Phase::ToothToBackbone), prod(&[m - 2, x, x, x])?),
        term("(M−2)·x²", Some(Phase::ChainSweep), prod(&[m - 2, x, x])?),
        term("x", Some(Phase::FinalDot), x),
    ]))
}

/// Schedule-basis comb terms: the published terms minus the unattributed one.
pub fn comb_schedule_terms(p: &NetworkParams) -> Result<Vec<Term>> {
    let mut terms = comb_printed_terms(p)?;
    terms.retain(|t| t.phase.is_some());
    Ok(terms)
}

/// Sums terms per phase, in [`Phase::ALL`] order, dropping empty phases.
pub fn phase_totals(terms: &[Term]) -> Result<Vec<(Phase, u64)>> {
    let mut out = Vec::new();
    for phase in Phase::ALL {
        let vals: Vec<u64> = terms.iter().filter(|t| t.phase == Some(phase)).map(|t| t.value).collect();
        if !vals.is_empty() {
            out.push((phase, sum(&vals)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// No bond dimension makes the comb cheaper.
    MpsAlwaysCheaper,
    /// The comb is cheaper for `x_minus < x < x_plus`.
    CombWindow { x_minus: f64, x_plus: f64 },
    /// Double root: the two costs touch at one `x` but the comb is never strictly cheaper.
    Degenerate,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::MpsAlwaysCheaper => "MpsAlwaysCheaper",
            Regime::CombWindow { .. } => "CombWindow",
            Regime::Degenerate => "Degenerate",
        }
    }
}

/// Coefficients, discriminant and roots of `a·x² + b·x + c = 0` with
/// `a = M−2`, `b = 2 − d(M−2)`, `c = d(M−2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub teeth: usize,
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
    /// `(x−, x+)` with `x− ≤ x+`, when real.
    pub roots: Option<(f64, f64)>,
    pub regime: Regime,
}

/// Real roots of `a·x² + b·x + c` for `a ≠ 0`, ordered, computed without
/// subtracting nearly equal quantities.
fn stable_quadratic_roots(a: f64, b: f64, c: f64, disc: f64) -> Option<(f64, f64)> {
    if disc < 0.0 {
        return None;
    }
    let sq = libm::sqrt(disc);
    let q = -0.5 * (b + libm::copysign(sq, b));
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r1, r2) = (q / a, c / q);
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Threshold roots for `M` teeth and compressed dimension `d`.
///
/// `d` may be any positive real. For `M = 2` the quadratic degenerates; the
/// schedule-basis `ΔC = −2x²` is negative for every bond dimension, so the
/// result carries no roots and `MpsAlwaysCheaper`.
pub fn threshold_roots(d: f64, teeth: usize) -> Result<ThresholdResult> {
    if teeth < 2 {
        return Err(Error::InvalidParams(format!("M >= 2 violated (M={teeth})")));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidParams(format!("d > 0 violated (d={d})")));
    }
    let a = (teeth - 2) as f64;
    let b = 2.0 - d * a;
    let c = d * a;
    let discriminant = b * b - 4.0 * a * c;
    if teeth == 2 {
        return Ok(ThresholdResult {
            teeth,
            d,
            a,
            b,
            c,
            discriminant,
            roots: None,
            regime: Regime::MpsAlwaysCheaper,
        });
    }
    let roots = stable_quadratic_roots(a, b, c, discriminant);
    let regime = match roots {
        None => Regime::MpsAlwaysCheaper,
        Some(_) if discriminant == 0.0 => Regime::Degenerate,
        Some((lo, hi)) if lo > 0.0 => Regime::CombWindow { x_minus: lo, x_plus: hi },
        Some(_) => Regime::MpsAlwaysCheaper,
    };
    Ok(ThresholdResult {
        teeth,
        d,
        a,
        b,
        c,
        discriminant,
        roots,
        regime,
    })
}

/// Schedule-basis `ΔC` as a real polynomial in `x`, for real `d`.
pub fn delta_c_poly(teeth: usize, d: f64, x: f64) -> f64 {
    let a = teeth as f64 - 2.0;
    -x * (a * x * x + (2.0 - d * a) * x + d * a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d: f64,
    pub x_minus: Option<f64>,
    pub x_plus: Option<f64>,
    pub regime: Regime,
}

/// Threshold roots for `d = d_min, d_min + step, …` up to `d_max`.
pub fn threshold_sweep(teeth: usize, d_min: f64, d_max: f64, step: f64) -> Result<Vec<SweepRow>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidRange(format!("step must be positive (step={step})")));
    }
    if !(d_min.is_finite() && d_max.is_finite() && d_min <= d_max) {
        return Err(Error::InvalidRange(format!("need d_min <= d_max (d_min={d_min}, d_max={d_max})")));
    }
    // index-based so the grid does not drift with repeated addition
    let count = libm::floor((d_max - d_min) / step + 1e-9) as usize + 1;
    (0..count)
        .map(|i| {
            let d = d_min + i as f64 * step;
            let t = threshold_roots(d, teeth)?;
            Ok(SweepRow {
                d,
                x_minus: t.roots.map(|r| r.0),
                x_plus: t.roots.map(|r| r.1),
                regime: t.regime,
            })
        })
        .collect()
}

/// Sign the root interval predicts for `ΔC` at a probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Positive,
    Negative,
    /// Within 0.5 of a root; no prediction.
    Guarded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub x: usize,
    pub delta_c: i64,
    pub expected: Expected,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crosscheck {
    pub threshold: ThresholdResult,
    pub probes: Vec<Probe>,
}

impl Crosscheck {
    pub fn all_agree(&self) -> bool {
        self.probes.iter().all(|p| p.agrees)
    }
}

/// Compares the exact integer schedule-basis `ΔC` at each integer bond
/// dimension with the sign predicted by the roots of the quadratic.
pub fn crosscheck_quadratic(teeth: usize, d: usize, xs: RangeInclusive<usize>) -> Result<Crosscheck> {
    let threshold = threshold_roots(d as f64, teeth)?;
    let mut probes = Vec::new();
    for x in xs {
        // ΔC does not depend on N or D; pick the smallest admissible ones.
        let params = NetworkParams::new(d, d, x, teeth, 1)?;
        let delta = delta_c(&params, Basis::Schedule)?;
        let xf = x as f64;
        let expected = match threshold.roots {
            Some((lo, hi)) if threshold.discriminant > 0.0 => {
                if xf > lo + 0.5 && xf < hi - 0.5 {
                    Expected::Positive
                } else if xf < lo - 0.5 || xf > hi + 0.5 {
                    Expected::Negative
                } else {
                    Expected::Guarded
                }
            }
            Some((r, _)) if libm::fabs(xf - r) <= 0.5 => Expected::Guarded,
            _ => Expected::Negative,
        };
        let agrees = match expected {
            Expected::Positive => delta > 0,
            Expected::Negative => delta < 0,
            Expected::Guarded => true,
        };
        probes.push(Probe {
            x,
            delta_c: delta,
            expected,
            agrees,
        });
    }
    Ok(Crosscheck { threshold, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(raw: usize, comp: usize, bond: usize, teeth: usize, tooth_len: usize) -> NetworkParams {
        NetworkParams::new(raw, comp, bond, teeth, tooth_len).unwrap()
    }

    fn example() -> NetworkParams {
        p(100, 30, 10, 50, 5)
    }

    #[test]
    fn example_values() {
        assert_eq!(c_regular(&example()).unwrap(), 1_519_410);
        assert_eq!(c_comb_printed(&example()).unwrap(), 1_443_010);
        assert_eq!(c_comb_schedule(&example()).unwrap(), 1_438_010);
        assert_eq!(delta_c(&example(), Basis::Schedule).unwrap(), 81_400);
        assert_eq!(delta_c(&example(), Basis::Printed).unwrap(), 76_400);
    }

    #[test]
    fn small_values() {
        assert_eq!(c_regular(&p(1, 1, 1, 2, 1)).unwrap(), 5);
        assert_eq!(c_regular(&p(3, 2, 2, 2, 1)).unwrap(), 22);
        assert_eq!(c_comb_printed(&p(3, 2, 2, 2, 2)).unwrap(), 74);
        assert_eq!(c_comb_schedule(&p(3, 2, 2, 2, 2)).unwrap(), 66);
    }

    #[test]
    fn terms_sum_to_formulas() {
        for params in [example(), p(3, 2, 2, 2, 2), p(7, 3, 4, 6, 1)] {
            let reg: u64 = regular_terms(&params).unwrap().iter().map(|t| t.value).sum();
            assert_eq!(reg, c_regular(&params).unwrap());
            let printed: u64 = comb_printed_terms(&params).unwrap().iter().map(|t| t.value).sum();
            assert_eq!(printed, c_comb_printed(&params).unwrap());
            let sched: u64 = comb_schedule_terms(&params).unwrap().iter().map(|t| t.value).sum();
            assert_eq!(sched, c_comb_schedule(&params).unwrap());
        }
    }

    #[test]
    fn overflow_is_reported() {
        let huge = p(1 << 20, 1 << 20, 1 << 22, 4, 1);
        assert_eq!(c_regular(&huge), Err(Error::CountOverflow));
        assert_eq!(c_comb_printed(&huge), Err(Error::CountOverflow));
    }

    #[test]
    fn example_roots() {
        let t = threshold_roots(30.0, 50).unwrap();
        let (lo, hi) = t.roots.unwrap();
        assert!((lo - 1.04).abs() < 0.005, "{lo}");
        // closed form at d=30, M=50: (1438 + sqrt(1791364)) / 96
        assert!((hi - 28.921_025_725_909).abs() < 1e-9, "{hi}");
        assert!((lo - 1.037_307_607_424).abs() < 1e-9, "{lo}");
        assert_eq!(t.discriminant, 1_791_364.0);
        assert!(matches!(t.regime, Regime::CombWindow { .. }));
    }

    #[test]
    fn no_roots_for_small_d() {
        let t = threshold_roots(2.0, 50).unwrap();
        assert!(t.discriminant < 0.0);
        assert_eq!(t.roots, None);
        assert_eq!(t.regime, Regime::MpsAlwaysCheaper);
    }

    #[test]
    fn two_teeth_never_favor_comb() {
        let t = threshold_roots(40.0, 2).unwrap();
        assert_eq!(t.a, 0.0);
        assert_eq!(t.roots, None);
        assert_eq!(t.regime, Regime::MpsAlwaysCheaper);
        for x in 1..20 {
            assert_eq!(delta_c(&p(40, 40, x, 2, 3), Basis::Schedule).unwrap(), -2 * (x * x) as i64);
        }
        assert!(threshold_roots(40.0, 1).is_err());
        assert!(threshold_roots(0.0, 5).is_err());
    }

    #[test]
    fn double_root_is_degenerate() {
        // M=3: the discriminant (d−2)² − 4d vanishes at d = 4 + 2√3; no integer
        // M admits a rational double root, so only a float near-hit is possible.
        let d = 4.0 + 2.0 * libm::sqrt(3.0);
        let t = threshold_roots(d, 3).unwrap();
        assert!(t.discriminant.abs() < 1e-12);
        if t.discriminant == 0.0 {
            assert_eq!(t.regime, Regime::Degenerate);
        }
        assert_eq!(stable_quadratic_roots(1.0, -4.0, 4.0, 0.0), Some((2.0, 2.0)));
    }

    #[test]
    fn sweep_onset_and_monotonicity() {
        let rows = threshold_sweep(50, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.regime == Regime::MpsAlwaysCheaper && r.x_plus.is_none()));

        let rows = threshold_sweep(50, 5.0, 60.0, 1.0).unwrap();
        assert_eq!(rows.len(), 56);
        for w in rows.windows(2) {
            assert!(w[1].x_plus.unwrap() > w[0].x_plus.unwrap());
            assert!(w[1].x_minus.unwrap() < w[0].x_minus.unwrap());
        }
        let last = rows.last().unwrap().x_minus.unwrap();
        assert!(last > 1.0 && last < 1.05, "{last}");
        let row30 = rows.iter().find(|r| r.d == 30.0).unwrap();
        let t = threshold_roots(30.0, 50).unwrap();
        assert_eq!((row30.x_minus.unwrap(), row30.x_plus.unwrap()), t.roots.unwrap());

        assert!(threshold_sweep(50, 5.0, 4.0, 1.0).is_err());
        assert!(threshold_sweep(50, 1.0, 4.0, 0.0).is_err());
        assert_eq!(threshold_sweep(50, 1.0, 2.0, 0.1).unwrap().len(), 11);
    }

    #[test]
    fn crosscheck_example_probes() {
        let cc = crosscheck_quadratic(50, 30, 1..=40).unwrap();
        assert!(cc.all_agree());
        let at = |x: usize| cc.probes.iter().find(|p| p.x == x).unwrap();
        assert_eq!(at(10).expected, Expected::Positive);
        assert_eq!(at(10).delta_c, 81_400);
        assert_eq!(at(40).expected, Expected::Negative);
        assert!(at(40).delta_c < 0);
        // x=1 sits 0.037 below x−, inside the guard band; ΔC is still negative
        assert_eq!(at(1).expected, Expected::Guarded);
        assert!(at(1).delta_c < 0);
    }

    proptest! {
        #[test]
        fn printed_minus_schedule_is_m_x2(raw in 1usize..50, dd in 0usize..50, x in 1usize..40, m in 2usize..40, n in 1usize..20) {
            let params = p(raw + dd, raw, x, m, n);
            prop_assert_eq!(
                c_comb_printed(&params).unwrap() - c_comb_schedule(&params).unwrap(),
                (m * x * x) as u64
            );
        }

        #[test]
        fn delta_c_ignores_n_and_d_raw(d in 1usize..40, x in 1usize..40, m in 2usize..40,
                                       n1 in 1usize..20, n2 in 1usize..20, e1 in 0usize..30, e2 in 0usize..30) {
            for basis in [Basis::Printed, Basis::Schedule] {
                prop_assert_eq!(
                    delta_c(&p(d + e1, d, x, m, n1), basis).unwrap(),
                    delta_c(&p(d + e2, d, x, m, n2), basis).unwrap()
                );
            }
        }

        #[test]
        fn integer_delta_matches_polynomial(d in 1usize..40, x in 1usize..40, m in 2usize..40) {
            let exact = delta_c(&p(d, d, x, m, 1), Basis::Schedule).unwrap();
            prop_assert_eq!(exact as f64, delta_c_poly(m, d as f64, x as f64));
        }

        #[test]
        fn vieta(m in 3usize..500, d in 5.0f64..2000.0) {
            let t = threshold_roots(d, m).unwrap();
            if let Some((lo, hi)) = t.roots {
                prop_assert!(lo <= hi);
                prop_assert!(((lo * hi) - d).abs() <= 1e-12 * d);
                let s = d - 2.0 / (m as f64 - 2.0);
                prop_assert!(((lo + hi) - s).abs() <= 1e-12 * s.abs());
            }
        }

        #[test]
        fn sign_between_and_outside_roots(m in 3usize..200, d in 5.0f64..500.0) {
            let t = threshold_roots(d, m).unwrap();
            if let (Some((lo, hi)), true) = (t.roots, t.discriminant > 0.0) {
                let mid = 0.5 * (lo + hi);
                prop_assert!(delta_c_poly(m, d, mid) > 0.0);
                prop_assert!(delta_c_poly(m, d, 2.0 * hi) < 0.0);
            }
        }
    }
}
