//! Fixed contraction schedules, instrumented execution and a value oracle.
//!
//! MPS schedule: compress every data vector through its `U`, absorb the
//! compressed vectors into the site tensors, sweep the chain left to right
//! with vector×matrix products, finish with a dot product.
//!
//! Comb schedule: per tooth, compress and absorb as above, then sweep from the
//! tooth end toward the backbone, leaving one `x`-vector per tooth. Absorb
//! each tooth vector into its backbone tensor, sweep the backbone left to
//! right, finish with a dot product.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::costmodel::{self, Phase};
use crate::network::{Geometry, NetworkParams, NodeId, TensorNetwork};
use crate::tensor::{contract_pair, contraction_shape, AxisPairing, Tensor};
use crate::{Error, Result};

/// An input of a plan step: a network node or the output of an earlier step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    Node(NodeId),
    /// Output of the step with this index.
    Step(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub lhs: Operand,
    pub rhs: Operand,
    pub pairing: AxisPairing,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionPlan {
    params: NetworkParams,
    geometry: Geometry,
    steps: Vec<PlanStep>,
}

impl ContractionPlan {
    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn count_phase(&self, phase: Phase) -> usize {
        self.steps.iter().filter(|s| s.phase == phase).count()
    }

    /// Per-phase multiplication counts obtained from shapes alone.
    pub fn modeled_costs(&self, net: &TensorNetwork) -> Result<BTreeMap<Phase, u64>> {
        let (_, costs) = run(self, net, |t| t.shape().to_vec(), |a, b, pairing| {
            contraction_shape(a, b, pairing)
        })?;
        Ok(costs)
    }
}

struct PlanBuilder {
    plan: ContractionPlan,
}

impl PlanBuilder {
    fn new(net: &TensorNetwork) -> Self {
        Self {
            plan: ContractionPlan {
                params: *net.params(),
                geometry: net.geometry(),
                steps: Vec::new(),
            },
        }
    }

    fn step(&mut self, lhs: Operand, rhs: Operand, a_axis: usize, b_axis: usize, phase: Phase) -> Operand {
        self.plan.steps.push(PlanStep {
            lhs,
            rhs,
            pairing: AxisPairing::single(a_axis, b_axis),
            phase,
        });
        Operand::Step(self.plan.steps.len() - 1)
    }

    /// Data vector through `U`: `[D]·[D, d] → [d]`.
    fn compress(&mut self, net: &TensorNetwork, site: usize) -> Operand {
        self.step(
            Operand::Node(net.data_nodes()[site]),
            Operand::Node(net.compressions()[site]),
            0,
            0,
            Phase::Compress,
        )
    }
}

/// Schedule for an MPS network. Its count equals `C_regular`.
pub fn mps_plan(net: &TensorNetwork) -> Result<ContractionPlan> {
    let Geometry::Mps { sites: l } = net.geometry() else {
        return Err(Error::WrongGeometry {
            expected: "mps",
            found: net.geometry().name(),
        });
    };
    let mut b = PlanBuilder::new(net);
    let compressed: Vec<Operand> = (0..l).map(|s| b.compress(net, s)).collect();
    // site 0 is [d, x]; others carry the physical leg on axis 1
    let absorbed: Vec<Operand> = (0..l)
        .map(|s| {
            let phys = if s == 0 { 0 } else { 1 };
            b.step(Operand::Node(net.sites()[s]), compressed[s], phys, 0, Phase::AbsorbPhysical)
        })
        .collect();
    let mut carry = absorbed[0];
    for &matrix in &absorbed[1..l - 1] {
        carry = b.step(carry, matrix, 0, 0, Phase::ChainSweep);
    }
    b.step(carry, absorbed[l - 1], 0, 0, Phase::FinalDot);
    Ok(b.plan)
}

/// Schedule for a comb network. Its count equals `C_comb − M·x²`.
pub fn comb_plan(net: &TensorNetwork) -> Result<ContractionPlan> {
    let Geometry::Comb { teeth: m, tooth_len: n } = net.geometry() else {
        return Err(Error::WrongGeometry {
            expected: "comb",
            found: net.geometry().name(),
        });
    };
    let mut b = PlanBuilder::new(net);
    let mut tooth_vectors = Vec::with_capacity(m);
    for t in 0..m {
        let sites = t * n..(t + 1) * n;
        let compressed: Vec<Operand> = sites.clone().map(|s| b.compress(net, s)).collect();
        let absorbed: Vec<Operand> = sites
            .clone()
            .zip(&compressed)
            .map(|(s, &c)| b.step(Operand::Node(net.sites()[s]), c, 1, 0, Phase::AbsorbPhysical))
            .collect();
        // tooth end gives [x_up]; interior tooth matrices are [x_up, x_down]
        let mut carry = absorbed[n - 1];
        for &matrix in absorbed[..n - 1].iter().rev() {
            carry = b.step(carry, matrix, 0, 1, Phase::ToothSweep);
        }
        tooth_vectors.push(carry);
    }
    let backbone: Vec<Operand> = (0..m)
        .map(|t| {
            let down = if t == 0 || t == m - 1 { 1 } else { 2 };
            b.step(Operand::Node(net.backbone()[t]), tooth_vectors[t], down, 0, Phase::ToothToBackbone)
        })
        .collect();
    let mut carry = backbone[0];
    for &matrix in &backbone[1..m - 1] {
        carry = b.step(carry, matrix, 0, 0, Phase::ChainSweep);
    }
    b.step(carry, backbone[m - 1], 0, 0, Phase::FinalDot);
    Ok(b.plan)
}

/// Schedule matching the network's geometry.
pub fn plan_for(net: &TensorNetwork) -> Result<ContractionPlan> {
    match net.geometry() {
        Geometry::Mps { .. } => mps_plan(net),
        Geometry::Comb { .. } => comb_plan(net),
    }
}

/// Walks a plan, checking that every node and intermediate is consumed
/// exactly once, and folds the step costs by phase.
fn run<T>(
    plan: &ContractionPlan,
    net: &TensorNetwork,
    leaf: impl Fn(&Tensor) -> T,
    mut combine: impl FnMut(&T, &T, &AxisPairing) -> Result<(T, crate::StepCost)>,
) -> Result<(T, BTreeMap<Phase, u64>)> {
    if plan.params != *net.params() || plan.geometry != net.geometry() {
        return Err(Error::PlanMismatch(format!(
            "plan built for {:?} {:?}, network is {:?} {:?}",
            plan.geometry,
            plan.params,
            net.geometry(),
            net.params()
        )));
    }
    if plan.steps.is_empty() {
        return Err(Error::PlanMismatch("empty plan".into()));
    }
    let mut node_used = vec![false; net.nodes().len()];
    let mut live: Vec<Option<T>> = Vec::with_capacity(plan.steps.len());
    let mut costs = BTreeMap::new();

    for (i, step) in plan.steps.iter().enumerate() {
        let mut fetch = |op: Operand, live: &mut Vec<Option<T>>| -> Result<T> {
            match op {
                Operand::Node(id) => {
                    let used = node_used.get_mut(id.0).ok_or(Error::UnknownNode(id.0))?;
                    if core::mem::replace(used, true) {
                        return Err(Error::PlanMismatch(format!("node {} consumed twice (step {i})", id.0)));
                    }
                    Ok(leaf(net.node(id)?.tensor()))
                }
                Operand::Step(j) if j < i => live[j]
                    .take()
                    .ok_or_else(|| Error::PlanMismatch(format!("output of step {j} consumed twice (step {i})"))),
                Operand::Step(j) => Err(Error::PlanMismatch(format!("step {i} reads future step {j}"))),
            }
        };
        let lhs = fetch(step.lhs, &mut live)?;
        let rhs = fetch(step.rhs, &mut live)?;
        let (out, cost) = combine(&lhs, &rhs, &step.pairing)?;
        let slot = costs.entry(step.phase).or_insert(0u64);
        *slot = slot.checked_add(cost.multiplications).ok_or(Error::CountOverflow)?;
        live.push(Some(out));
    }

    if let Some(n) = node_used.iter().position(|u| !u) {
        return Err(Error::PlanMismatch(format!("node {n} is never contracted")));
    }
    let last = live.len() - 1;
    if let Some(j) = live[..last].iter().position(Option::is_some) {
        return Err(Error::PlanMismatch(format!("output of step {j} is never consumed")));
    }
    let result = live[last].take().expect("final output present");
    Ok((result, costs))
}

/// Measured multiplication counts of one execution, next to the closed forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub per_phase: BTreeMap<Phase, u64>,
    pub total: u64,
    /// `C_regular` for an MPS, the published `C_comb` for a comb.
    pub analytic_printed: u64,
    /// The schedule polynomial; always equal to `total`.
    pub analytic_schedule: u64,
    pub residual_printed_minus_measured: i64,
    /// Largest number of elements held by a single intermediate.
    pub peak_elements: usize,
}

impl CostReport {
    fn new(net: &TensorNetwork, per_phase: BTreeMap<Phase, u64>, peak_elements: usize) -> Result<Self> {
        let total = per_phase
            .values()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or(Error::CountOverflow)?;
        let p = net.params();
        let (analytic_printed, analytic_schedule) = match net.geometry() {
            Geometry::Mps { .. } => {
                let c = costmodel::c_regular(p)?;
                (c, c)
            }
            Geometry::Comb { .. } => (costmodel::c_comb_printed(p)?, costmodel::c_comb_schedule(p)?),
        };
        let residual = i64::try_from(analytic_printed as i128 - total as i128).map_err(|_| Error::CountOverflow)?;
        Ok(Self {
            per_phase,
            total,
            analytic_printed,
            analytic_schedule,
            residual_printed_minus_measured: residual,
            peak_elements,
        })
    }
}

/// Contracts `net` following `plan`, returning the scalar and the measured counts.
pub fn execute(net: &TensorNetwork, plan: &ContractionPlan) -> Result<(f64, CostReport)> {
    let mut peak = 0usize;
    let (out, costs) = run(plan, net, Tensor::clone, |a, b, pairing| {
        let (t, cost) = contract_pair(a, b, pairing)?;
        peak = peak.max(t.len());
        Ok((t, cost))
    })?;
    let value = out
        .as_scalar()
        .ok_or_else(|| Error::PlanMismatch(format!("plan ends in a tensor of shape {:?}", out.shape())))?;
    Ok((value, CostReport::new(net, costs, peak)?))
}

/// Largest intermediate the oracle accepts, in elements.
pub const ORACLE_GUARD: u128 = 10_000_000;

/// Contracts `net` bond by bond in identifier order, ignoring cost.
///
/// Bond identifiers follow construction order (virtual bonds, then physical
/// legs, then data legs), so the intermediates here differ from those of the
/// schedules. Fails if an intermediate would exceed [`ORACLE_GUARD`] elements.
pub fn naive_value_oracle(net: &TensorNetwork) -> Result<f64> {
    naive_value_oracle_bounded(net, ORACLE_GUARD)
}

/// [`naive_value_oracle`] with a caller-chosen intermediate size limit.
pub fn naive_value_oracle_bounded(net: &TensorNetwork, limit: u128) -> Result<f64> {
    // each group: tensor plus the bond id carried by each of its axes
    let mut groups: Vec<Option<(Tensor, Vec<usize>)>> = net
        .nodes()
        .iter()
        .map(|n| Some((n.tensor().clone(), vec![usize::MAX; n.tensor().rank()])))
        .collect();
    for bond in net.bonds() {
        for end in [bond.a, bond.b] {
            groups[end.node.0].as_mut().expect("fresh group").1[end.axis] = bond.id.0;
        }
    }
    let mut owner: Vec<usize> = (0..net.nodes().len()).collect();

    for bond in net.bonds() {
        let (ga, gb) = (owner[bond.a.node.0], owner[bond.b.node.0]);
        if ga == gb {
            return Err(Error::PlanMismatch(format!("bond {} closes a cycle", bond.id.0)));
        }
        let (ta, la) = groups[ga].take().expect("live group");
        let (tb, lb) = groups[gb].take().expect("live group");
        let pairs: Vec<(usize, usize)> = la
            .iter()
            .enumerate()
            .filter_map(|(i, l)| lb.iter().position(|m| m == l).map(|j| (i, j)))
            .collect();
        let out_labels: Vec<usize> = la
            .iter()
            .filter(|l| !lb.contains(l))
            .chain(lb.iter().filter(|l| !la.contains(l)))
            .copied()
            .collect();
        let elements: u128 = out_labels
            .iter()
            .map(|l| net.bonds()[*l].dim as u128)
            .product();
        if elements > limit {
            return Err(Error::OracleGuard { elements, limit });
        }
        let (t, _) = contract_pair(&ta, &tb, &AxisPairing::new(pairs))?;
        groups[ga] = Some((t, out_labels));
        for o in owner.iter_mut().filter(|o| **o == gb) {
            *o = ga;
        }
    }
    let mut remaining = groups.into_iter().flatten();
    match (remaining.next(), remaining.next()) {
        (Some((t, _)), None) => t
            .as_scalar()
            .ok_or_else(|| Error::PlanMismatch("network has open legs".into())),
        _ => Err(Error::PlanMismatch("network is disconnected".into())),
    }
}
