//! The two network geometries.
//!
//! Axis conventions (`x` bond, `d` compressed physical, `D` raw):
//!
//! ```text
//! MPS site 0        [d, x]        (physical, right)
//! MPS interior      [x, d, x]     (left, physical, right)
//! MPS site L-1      [x, d]        (left, physical)
//! backbone ends     [x, x]        (horizontal, down)
//! backbone interior [x, x, x]     (left, right, down)
//! tooth end         [x, d]        (toward backbone, physical)
//! tooth interior    [x, d, x]     (toward backbone, physical, away from backbone)
//! compression U     [D, d]        (raw, compressed)
//! data              [D]
//! ```
//!
//! Sites are numbered left to right for the MPS. For the comb they are
//! tooth-major: site `m·N + k` is the `k`-th tensor of tooth `m`, counted
//! from the backbone outward, so `k = N-1` is the tooth end.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::seed;
use crate::tensor::{random_tensor, Distribution, Tensor};
use crate::{Error, Result};

/// Dimensions shared by both geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkParams {
    /// `D`, length of a raw data vector.
    pub raw_dim: usize,
    /// `d`, physical dimension after compression.
    pub comp_dim: usize,
    /// `x`
    pub bond_dim: usize,
    /// `M`
    pub teeth: usize,
    /// `N`
    pub tooth_len: usize,
}

impl NetworkParams {
    pub fn new(raw_dim: usize, comp_dim: usize, bond_dim: usize, teeth: usize, tooth_len: usize) -> Result<Self> {
        let p = Self {
            raw_dim,
            comp_dim,
            bond_dim,
            teeth,
            tooth_len,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("D", self.raw_dim),
            ("d", self.comp_dim),
            ("x", self.bond_dim),
            ("N", self.tooth_len),
        ] {
            if v == 0 {
                return Err(Error::InvalidParams(format!("{name} >= 1 violated ({name}=0)")));
            }
        }
        if self.comp_dim > self.raw_dim {
            return Err(Error::InvalidParams(format!(
                "d <= D violated (d={}, D={})",
                self.comp_dim, self.raw_dim
            )));
        }
        if self.teeth < 2 {
            return Err(Error::InvalidParams(format!("M >= 2 violated (M={})", self.teeth)));
        }
        self.teeth
            .checked_mul(self.tooth_len)
            .ok_or_else(|| Error::InvalidParams(format!("M*N overflows (M={}, N={})", self.teeth, self.tooth_len)))?;
        Ok(())
    }

    /// Number of data-bearing sites, `M·N`.
    pub fn sites(&self) -> usize {
        self.teeth * self.tooth_len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Mps { sites: usize },
    Comb { teeth: usize, tooth_len: usize },
}

impl Geometry {
    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Mps { .. } => "mps",
            Geometry::Comb { .. } => "comb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    SiteBoundary,
    SiteInterior,
    BackboneBoundary,
    BackboneInterior,
    ToothEnd,
    ToothInterior,
    Compression,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BondId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    id: NodeId,
    role: NodeRole,
    /// Site index for site, tooth, compression and data nodes; tooth index for backbone nodes.
    position: usize,
    tensor: Tensor,
}

impl Node {
    pub fn id(&self) -> NodeId {
        self.id
    }
    pub fn role(&self) -> NodeRole {
        self.role
    }
    pub fn position(&self) -> usize {
        self.position
    }
    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub node: NodeId,
    pub axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub id: BondId,
    pub a: Endpoint,
    pub b: Endpoint,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorNetwork {
    params: NetworkParams,
    geometry: Geometry,
    nodes: Vec<Node>,
    bonds: Vec<Bond>,
    sites: Vec<NodeId>,
    compressions: Vec<NodeId>,
    data: Vec<NodeId>,
    backbone: Vec<NodeId>,
}

struct Builder {
    net: TensorNetwork,
    rng_seed: u64,
}

impl Builder {
    fn new(params: NetworkParams, geometry: Geometry, seed: u64) -> Self {
        Self {
            net: TensorNetwork {
                params,
                geometry,
                nodes: Vec::new(),
                bonds: Vec::new(),
                sites: Vec::new(),
                compressions: Vec::new(),
                data: Vec::new(),
                backbone: Vec::new(),
            },
            rng_seed: seed,
        }
    }

    fn node(&mut self, role: NodeRole, position: usize, shape: &[usize], dist: Distribution) -> Result<NodeId> {
        let id = NodeId(self.net.nodes.len());
        let tensor = random_tensor(shape, seed::derive(self.rng_seed, id.0 as u64), dist)?;
        self.net.nodes.push(Node {
            id,
            role,
            position,
            tensor,
        });
        Ok(id)
    }

    fn bond(&mut self, a: NodeId, a_axis: usize, b: NodeId, b_axis: usize) {
        let dim = self.net.nodes[a.0].tensor.shape()[a_axis];
        let id = BondId(self.net.bonds.len());
        self.net.bonds.push(Bond {
            id,
            a: Endpoint { node: a, axis: a_axis },
            b: Endpoint { node: b, axis: b_axis },
            dim,
        });
    }

    /// Compression and data nodes for every site, plus the two bonds per site.
    fn compression_layer(&mut self, phys_axis: impl Fn(usize) -> usize) -> Result<()> {
        let p = self.net.params;
        for s in 0..p.sites() {
            let u = self.node(
                NodeRole::Compression,
                s,
                &[p.raw_dim, p.comp_dim],
                Distribution::FanIn { physical_axis: Some(1) },
            )?;
            self.net.compressions.push(u);
        }
        for s in 0..p.sites() {
            let v = self.node(NodeRole::Data, s, &[p.raw_dim], Distribution::Normal { std_dev: 1.0 })?;
            self.net.data.push(v);
        }
        for s in 0..p.sites() {
            self.bond(self.net.sites[s], phys_axis(s), self.net.compressions[s], 1);
        }
        for s in 0..p.sites() {
            self.bond(self.net.compressions[s], 0, self.net.data[s], 0);
        }
        Ok(())
    }
}

/// Builds the compression-layer MPS with `L = M·N` sites.
pub fn build_mps(params: NetworkParams, seed: u64) -> Result<TensorNetwork> {
    params.validate()?;
    let l = params.sites();
    if l < 2 {
        return Err(Error::InvalidParams(format!("M*N >= 2 violated (M*N={l})")));
    }
    let (d, x) = (params.comp_dim, params.bond_dim);
    let mut b = Builder::new(params, Geometry::Mps { sites: l }, seed);
    for s in 0..l {
        let (role, shape, phys): (_, &[usize], _) = if s == 0 {
            (NodeRole::SiteBoundary, &[d, x], 0)
        } else if s == l - 1 {
            (NodeRole::SiteBoundary, &[x, d], 1)
        } else {
            (NodeRole::SiteInterior, &[x, d, x], 1)
        };
        let id = b.node(role, s, shape, Distribution::FanIn { physical_axis: Some(phys) })?;
        b.net.sites.push(id);
    }
    for s in 0..l - 1 {
        let right_axis = if s == 0 { 1 } else { 2 };
        b.bond(b.net.sites[s], right_axis, b.net.sites[s + 1], 0);
    }
    b.compression_layer(|s| if s == 0 { 0 } else { 1 })?;
    Ok(b.net)
}

/// Builds the comb: `M` backbone tensors, each carrying a tooth of `N` tensors.
pub fn build_comb(params: NetworkParams, seed: u64) -> Result<TensorNetwork> {
    params.validate()?;
    let (m, n) = (params.teeth, params.tooth_len);
    let (d, x) = (params.comp_dim, params.bond_dim);
    let mut b = Builder::new(params, Geometry::Comb { teeth: m, tooth_len: n }, seed);
    let backbone_dist = Distribution::FanIn { physical_axis: None };
    for t in 0..m {
        let id = if t == 0 || t == m - 1 {
            b.node(NodeRole::BackboneBoundary, t, &[x, x], backbone_dist)?
        } else {
            b.node(NodeRole::BackboneInterior, t, &[x, x, x], backbone_dist)?
        };
        b.net.backbone.push(id);
    }
    let tooth_dist = Distribution::FanIn { physical_axis: Some(1) };
    for t in 0..m {
        for k in 0..n {
            let s = t * n + k;
            let id = if k == n - 1 {
                b.node(NodeRole::ToothEnd, s, &[x, d], tooth_dist)?
            } else {
                b.node(NodeRole::ToothInterior, s, &[x, d, x], tooth_dist)?
            };
            b.net.sites.push(id);
        }
    }
    let down_axis = |t: usize| if t == 0 || t == m - 1 { 1 } else { 2 };
    for t in 0..m - 1 {
        let right_axis = if t == 0 { 0 } else { 1 };
        b.bond(b.net.backbone[t], right_axis, b.net.backbone[t + 1], 0);
    }
    for t in 0..m {
        b.bond(b.net.backbone[t], down_axis(t), b.net.sites[t * n], 0);
        for k in 0..n - 1 {
            b.bond(b.net.sites[t * n + k], 2, b.net.sites[t * n + k + 1], 0);
        }
    }
    b.compression_layer(|_| 1)?;
    Ok(b.net)
}

impl TensorNetwork {
    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.0).ok_or(Error::UnknownNode(id.0))
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Site tensors in site order.
    pub fn sites(&self) -> &[NodeId] {
        &self.sites
    }

    pub fn compressions(&self) -> &[NodeId] {
        &self.compressions
    }

    pub fn data_nodes(&self) -> &[NodeId] {
        &self.data
    }

    /// Backbone tensors left to right; empty for an MPS.
    pub fn backbone(&self) -> &[NodeId] {
        &self.backbone
    }

    /// Replaces a tensor in place. The shape must not change.
    pub fn set_tensor(&mut self, id: NodeId, tensor: Tensor) -> Result<()> {
        let node = self.nodes.get_mut(id.0).ok_or(Error::UnknownNode(id.0))?;
        if node.tensor.shape() != tensor.shape() {
            return Err(Error::ShapeMismatch {
                node: id.0,
                expected: node.tensor.shape().to_vec(),
                found: tensor.shape().to_vec(),
            });
        }
        node.tensor = tensor;
        Ok(())
    }

    /// Returns a copy whose data vectors are the rows of `rows`, in site order.
    pub fn attach_data<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Self> {
        let d_raw = self.params.raw_dim;
        if rows.len() != self.data.len() {
            return Err(Error::DataShape {
                row: rows.len(),
                expected: format!("{} rows", self.data.len()),
                found: format!("{} rows", rows.len()),
            });
        }
        let mut out = self.clone();
        for (s, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d_raw {
                return Err(Error::DataShape {
                    row: s,
                    expected: format!("{d_raw} columns"),
                    found: format!("{} columns", row.len()),
                });
            }
            out.nodes[self.data[s].0].tensor = Tensor::new(vec![d_raw], row.to_vec())?;
        }
        Ok(out)
    }

    /// Returns a copy whose compression matrices have orthonormal columns,
    /// obtained by Gram–Schmidt on Gaussian columns.
    pub fn set_orthonormal_compressions(&self, seed: u64) -> Self {
        let (rows, cols) = (self.params.raw_dim, self.params.comp_dim);
        let mut out = self.clone();
        for (s, &id) in self.compressions.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, s as u64));
            let q = orthonormal_columns(rows, cols, &mut rng);
            out.nodes[id.0].tensor = Tensor::new(vec![rows, cols], q).expect("shape matches");
        }
        out
    }

    /// Checks that every bond joins axes of equal extent and every axis
    /// carries exactly one bond.
    pub fn check_well_formed(&self) -> Result<()> {
        let mut used: Vec<Vec<u8>> = self.nodes.iter().map(|n| vec![0; n.tensor.rank()]).collect();
        for bond in &self.bonds {
            for end in [bond.a, bond.b] {
                let node = self.node(end.node)?;
                let extent = *node.tensor.shape().get(end.axis).ok_or(Error::AxisOutOfRange {
                    axis: end.axis,
                    rank: node.tensor.rank(),
                })?;
                if extent != bond.dim {
                    return Err(Error::InvalidParams(format!(
                        "bond {} has dim {} but node {} axis {} has extent {}",
                        bond.id.0, bond.dim, end.node.0, end.axis, extent
                    )));
                }
                used[end.node.0][end.axis] += 1;
            }
        }
        for (i, axes) in used.iter().enumerate() {
            if let Some(axis) = axes.iter().position(|&c| c != 1) {
                return Err(Error::InvalidParams(format!(
                    "node {i} axis {axis} carries {} bonds",
                    axes[axis]
                )));
            }
        }
        Ok(())
    }
}

/// Row-major `[rows, cols]` matrix with orthonormal columns.
fn orthonormal_columns<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| StandardNormal.sample(rng)).collect();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let proj: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    let mut out = vec![0.0; rows * cols];
    for (j, col) in basis.iter().enumerate() {
        for (i, &c) in col.iter().enumerate() {
            out[i * cols + j] = c;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(raw: usize, comp: usize, bond: usize, teeth: usize, tooth_len: usize) -> NetworkParams {
        NetworkParams::new(raw, comp, bond, teeth, tooth_len).unwrap()
    }

    fn shapes_of(net: &TensorNetwork, ids: &[NodeId]) -> Vec<Vec<usize>> {
        ids.iter().map(|id| net.node(*id).unwrap().tensor().shape().to_vec()).collect()
    }

    #[test]
    fn param_validation_names_the_invariant() {
        let err = NetworkParams::new(3, 5, 2, 2, 1).unwrap_err();
        assert!(matches!(&err, Error::InvalidParams(m) if m.contains("d <= D")));
        let err = NetworkParams::new(3, 2, 2, 1, 4).unwrap_err();
        assert!(matches!(&err, Error::InvalidParams(m) if m.contains("M >= 2")));
        assert!(NetworkParams::new(3, 2, 0, 2, 1).is_err());
        assert!(NetworkParams::new(3, 2, 2, 2, 0).is_err());
    }

    #[test]
    fn smallest_mps() {
        let net = build_mps(p(3, 2, 2, 2, 1), 0).unwrap();
        assert_eq!(shapes_of(&net, net.sites()), vec![vec![2, 2], vec![2, 2]]);
        assert_eq!(shapes_of(&net, net.compressions()), vec![vec![3, 2]; 2]);
        assert_eq!(shapes_of(&net, net.data_nodes()), vec![vec![3]; 2]);
        assert_eq!(net.nodes().len(), 6);
        assert_eq!(net.bonds().len(), 1 + 2 + 2);
        net.check_well_formed().unwrap();
    }

    #[test]
    fn example_mps() {
        let net = build_mps(p(100, 30, 10, 50, 5), 1).unwrap();
        assert_eq!(net.sites().len(), 250);
        let interior = shapes_of(&net, net.sites())
            .iter()
            .filter(|s| s.as_slice() == [10, 30, 10])
            .count();
        assert_eq!(interior, 248);
        net.check_well_formed().unwrap();
    }

    #[test]
    fn smallest_comb() {
        let net = build_comb(p(3, 2, 2, 2, 2), 0).unwrap();
        assert_eq!(shapes_of(&net, net.backbone()), vec![vec![2, 2]; 2]);
        let roles: Vec<NodeRole> = net.sites().iter().map(|id| net.node(*id).unwrap().role()).collect();
        assert_eq!(
            roles,
            [NodeRole::ToothInterior, NodeRole::ToothEnd, NodeRole::ToothInterior, NodeRole::ToothEnd]
        );
        assert_eq!(
            shapes_of(&net, net.sites()),
            vec![vec![2, 2, 2], vec![2, 2], vec![2, 2, 2], vec![2, 2]]
        );
        assert_eq!(net.compressions().len(), 4);
        assert_eq!(net.data_nodes().len(), 4);
        net.check_well_formed().unwrap();
    }

    #[test]
    fn example_comb() {
        let net = build_comb(p(100, 30, 10, 50, 5), 1).unwrap();
        assert_eq!(net.backbone().len(), 50);
        let interior = shapes_of(&net, net.backbone())
            .iter()
            .filter(|s| s.as_slice() == [10, 10, 10])
            .count();
        assert_eq!(interior, 48);
        assert_eq!(net.sites().len(), 250);
        let mps = build_mps(p(100, 30, 10, 50, 5), 1).unwrap();
        assert_eq!(net.data_nodes().len(), mps.data_nodes().len());
    }

    #[test]
    fn node_and_bond_counts() {
        for (m, n) in [(2, 1), (2, 3), (3, 1), (5, 4)] {
            let l = m * n;
            let mps = build_mps(p(4, 2, 3, m, n), 9).unwrap();
            assert_eq!(mps.nodes().len(), 3 * l);
            assert_eq!(mps.bonds().len(), (l - 1) + 2 * l);
            mps.check_well_formed().unwrap();
            let comb = build_comb(p(4, 2, 3, m, n), 9).unwrap();
            assert_eq!(comb.nodes().len(), m + 3 * l);
            assert_eq!(comb.bonds().len(), (m - 1) + 3 * l);
            comb.check_well_formed().unwrap();
        }
    }

    #[test]
    fn comb_with_unit_teeth() {
        let net = build_comb(p(4, 2, 3, 4, 1), 2).unwrap();
        for id in net.sites() {
            let node = net.node(*id).unwrap();
            assert_eq!(node.role(), NodeRole::ToothEnd);
            assert_eq!(node.tensor().shape(), &[3, 2]);
        }
    }

    #[test]
    fn builders_are_deterministic() {
        let params = p(5, 3, 2, 3, 2);
        assert_eq!(build_mps(params, 7).unwrap(), build_mps(params, 7).unwrap());
        assert_eq!(build_comb(params, 7).unwrap(), build_comb(params, 7).unwrap());
        assert_ne!(build_comb(params, 7).unwrap(), build_comb(params, 8).unwrap());
    }

    #[test]
    fn attach_data_checks_dimensions() {
        let net = build_mps(p(3, 2, 2, 2, 2), 0).unwrap();
        let rows = vec![vec![1.0, 2.0, 3.0]; 4];
        let with = net.attach_data(&rows).unwrap();
        let id = with.data_nodes()[2];
        assert_eq!(with.node(id).unwrap().tensor().data(), &[1.0, 2.0, 3.0]);
        assert!(matches!(net.attach_data(&rows[..3]), Err(Error::DataShape { .. })));
        let mut bad = rows.clone();
        bad[1].pop();
        assert!(matches!(net.attach_data(&bad), Err(Error::DataShape { row: 1, .. })));
    }

    #[test]
    fn set_tensor_rejects_shape_change() {
        let mut net = build_mps(p(3, 2, 2, 2, 1), 0).unwrap();
        let id = net.sites()[0];
        assert!(net.set_tensor(id, Tensor::zeros(vec![4]).unwrap()).is_err());
        net.set_tensor(id, Tensor::zeros(vec![2, 2]).unwrap()).unwrap();
        assert!(net.set_tensor(NodeId(999), Tensor::scalar(0.0)).is_err());
    }

    fn gram(net: &TensorNetwork, id: NodeId) -> Vec<Vec<f64>> {
        let u = net.node(id).unwrap().tensor();
        let (r, c) = (u.shape()[0], u.shape()[1]);
        (0..c)
            .map(|i| (0..c).map(|j| (0..r).map(|k| u.data()[k * c + i] * u.data()[k * c + j]).sum()).collect())
            .collect()
    }

    #[test]
    fn orthonormal_compressions() {
        let net = build_comb(p(6, 4, 2, 3, 2), 0).unwrap().set_orthonormal_compressions(11);
        for &id in net.compressions() {
            for (i, row) in gram(&net, id).iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((v - target).abs() <= 1e-10);
                }
            }
        }
        let again = build_comb(p(6, 4, 2, 3, 2), 0).unwrap().set_orthonormal_compressions(11);
        assert_eq!(net, again);
    }

    /// Partial-pivot LU determinant, test oracle only.
    fn det(mut a: Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        det
    }

    #[test]
    fn square_compression_is_orthogonal() {
        let net = build_mps(p(5, 5, 2, 2, 1), 0).unwrap().set_orthonormal_compressions(3);
        for &id in net.compressions() {
            let u = net.node(id).unwrap().tensor();
            let m: Vec<Vec<f64>> = (0..5).map(|i| u.data()[i * 5..i * 5 + 5].to_vec()).collect();
            assert!((det(m).abs() - 1.0).abs() <= 1e-8);
        }
    }
}
