//! Dense tensors and instrumented pairwise contraction.
//!
//! Elements are `f64` in row-major order. The cost of a pairwise contraction
//! is counted in scalar multiplications only: `product(output extents) ×
//! product(contracted extents)`. Additions are not counted and a fused
//! multiply-add counts as one multiplication.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Number of elements for `shape`, rejecting zero extents.
pub(crate) fn volume(shape: &[usize]) -> Result<usize> {
    shape.iter().enumerate().try_fold(1usize, |acc, (axis, &e)| {
        if e == 0 {
            return Err(Error::ZeroExtent { axis });
        }
        acc.checked_mul(e).ok_or(Error::SizeOverflow)
    })
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = volume(&shape)?;
        if data.len() != expected {
            return Err(Error::ElementCount {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        let n = volume(&shape)?;
        Ok(Self {
            shape,
            data: vec![value; n],
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = volume(&shape)?;
        let mut data = Vec::with_capacity(n);
        let mut index = vec![0usize; shape.len()];
        for _ in 0..n {
            data.push(f(&index));
            increment(&mut index, &shape);
        }
        Ok(Self { shape, data })
    }

    /// `n × n` identity matrix.
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(vec![n, n], |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        if index.len() != self.shape.len() {
            return None;
        }
        let mut offset = 0;
        for (&i, &e) in index.iter().zip(&self.shape) {
            if i >= e {
                return None;
            }
            offset = offset * e + i;
        }
        Some(self.data[offset])
    }

    /// The value of a rank-0 tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        self.shape.is_empty().then(|| self.data[0])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Row-major odometer step.
fn increment(index: &mut [usize], shape: &[usize]) {
    for axis in (0..shape.len()).rev() {
        index[axis] += 1;
        if index[axis] < shape[axis] {
            return;
        }
        index[axis] = 0;
    }
}

/// Which axis of the left operand is summed against which axis of the right one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxisPairing {
    pairs: Vec<(usize, usize)>,
}

impl AxisPairing {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    pub fn single(a_axis: usize, b_axis: usize) -> Self {
        Self {
            pairs: vec![(a_axis, b_axis)],
        }
    }

    /// No contracted axes: the contraction is an outer product.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn validate(&self, a_shape: &[usize], b_shape: &[usize]) -> Result<()> {
        let mut seen_a = vec![false; a_shape.len()];
        let mut seen_b = vec![false; b_shape.len()];
        for &(ia, ib) in &self.pairs {
            if ia >= a_shape.len() {
                return Err(Error::AxisOutOfRange {
                    axis: ia,
                    rank: a_shape.len(),
                });
            }
            if ib >= b_shape.len() {
                return Err(Error::AxisOutOfRange {
                    axis: ib,
                    rank: b_shape.len(),
                });
            }
            if core::mem::replace(&mut seen_a[ia], true) {
                return Err(Error::DuplicateAxis {
                    operand: 'a',
                    axis: ia,
                });
            }
            if core::mem::replace(&mut seen_b[ib], true) {
                return Err(Error::DuplicateAxis {
                    operand: 'b',
                    axis: ib,
                });
            }
            if a_shape[ia] != b_shape[ib] {
                return Err(Error::ExtentMismatch {
                    a_axis: ia,
                    b_axis: ib,
                    a_extent: a_shape[ia],
                    b_extent: b_shape[ib],
                });
            }
        }
        Ok(())
    }

    fn free_axes(&self, a_rank: usize, b_rank: usize) -> (Vec<usize>, Vec<usize>) {
        let a = (0..a_rank)
            .filter(|i| !self.pairs.iter().any(|p| p.0 == *i))
            .collect();
        let b = (0..b_rank)
            .filter(|i| !self.pairs.iter().any(|p| p.1 == *i))
            .collect();
        (a, b)
    }
}

/// Multiplications charged for one pairwise contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StepCost {
    pub multiplications: u64,
}

/// Result shape and cost of contracting operands of the given shapes,
/// without touching any values.
pub fn contraction_shape(
    a_shape: &[usize],
    b_shape: &[usize],
    pairing: &AxisPairing,
) -> Result<(Vec<usize>, StepCost)> {
    pairing.validate(a_shape, b_shape)?;
    let (a_free, b_free) = pairing.free_axes(a_shape.len(), b_shape.len());
    let out_shape: Vec<usize> = a_free
        .iter()
        .map(|&i| a_shape[i])
        .chain(b_free.iter().map(|&i| b_shape[i]))
        .collect();
    let multiplications = out_shape
        .iter()
        .copied()
        .chain(pairing.pairs.iter().map(|p| a_shape[p.0]))
        .try_fold(1u64, |acc, e| acc.checked_mul(e as u64))
        .ok_or(Error::CountOverflow)?;
    Ok((out_shape, StepCost { multiplications }))
}

/// Contracts `a` and `b` over the paired axes.
///
/// The result keeps the unpaired axes of `a` in order, followed by the
/// unpaired axes of `b` in order.
pub fn contract_pair(a: &Tensor, b: &Tensor, pairing: &AxisPairing) -> Result<(Tensor, StepCost)> {
    let (out_shape, cost) = contraction_shape(&a.shape, &b.shape, pairing)?;
    let (a_free, b_free) = pairing.free_axes(a.rank(), b.rank());

    let rows: usize = a_free.iter().map(|&i| a.shape[i]).product();
    let cols: usize = b_free.iter().map(|&i| b.shape[i]).product();
    let inner: usize = pairing.pairs.iter().map(|p| a.shape[p.0]).product();

    let a_perm: Vec<usize> = a_free
        .iter()
        .copied()
        .chain(pairing.pairs.iter().map(|p| p.0))
        .collect();
    let b_perm: Vec<usize> = pairing
        .pairs
        .iter()
        .map(|p| p.1)
        .chain(b_free.iter().copied())
        .collect();
    let lhs = permuted_data(a, &a_perm);
    let rhs = permuted_data(b, &b_perm);

    let mut out = vec![0.0; rows * cols];
    for (i, out_row) in out.chunks_exact_mut(cols).enumerate() {
        let lhs_row = &lhs[i * inner..(i + 1) * inner];
        for (p, &lv) in lhs_row.iter().enumerate() {
            let rhs_row = &rhs[p * cols..(p + 1) * cols];
            for (o, &rv) in out_row.iter_mut().zip(rhs_row) {
                *o += lv * rv;
            }
        }
    }
    Ok((
        Tensor {
            shape: out_shape,
            data: out,
        },
        cost,
    ))
}

fn check_permutation(rank: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != rank {
        return Err(Error::InvalidPermutation { rank });
    }
    let mut seen = vec![false; rank];
    for &p in perm {
        if p >= rank || core::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation { rank });
        }
    }
    Ok(())
}

/// Data of `a` laid out so that new axis `i` is old axis `perm[i]`. `perm` must be valid.
fn permuted_data(a: &Tensor, perm: &[usize]) -> Vec<f64> {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return a.data.clone();
    }
    let old_strides = strides(&a.shape);
    let new_shape: Vec<usize> = perm.iter().map(|&p| a.shape[p]).collect();
    let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
    let mut index = vec![0usize; perm.len()];
    let mut out = Vec::with_capacity(a.data.len());
    for _ in 0..a.data.len() {
        let offset: usize = index.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
        out.push(a.data[offset]);
        increment(&mut index, &new_shape);
    }
    out
}

/// Reorders axes: axis `i` of the result is axis `perm[i]` of `a`.
pub fn transpose(a: &Tensor, perm: &[usize]) -> Result<Tensor> {
    check_permutation(a.rank(), perm)?;
    Ok(Tensor {
        shape: perm.iter().map(|&p| a.shape[p]).collect(),
        data: permuted_data(a, perm),
    })
}

/// Element distribution for [`random_tensor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    /// Gaussian, mean 0, standard deviation `1/sqrt(fan_in)`, where the
    /// fan-in is the product of all extents except `physical_axis`.
    FanIn { physical_axis: Option<usize> },
    Normal { std_dev: f64 },
}

pub fn random_tensor(shape: &[usize], seed: u64, distribution: Distribution) -> Result<Tensor> {
    let n = volume(shape)?;
    let std_dev = match distribution {
        Distribution::FanIn { physical_axis } => {
            if let Some(axis) = physical_axis {
                if axis >= shape.len() {
                    return Err(Error::AxisOutOfRange {
                        axis,
                        rank: shape.len(),
                    });
                }
            }
            let fan_in: f64 = shape
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != physical_axis)
                .map(|(_, &e)| e as f64)
                .product();
            1.0 / libm::sqrt(fan_in)
        }
        Distribution::Normal { std_dev } => std_dev,
    };
    if !(std_dev.is_finite() && std_dev >= 0.0) {
        return Err(Error::InvalidDistribution("standard deviation must be finite and non-negative"));
    }
    let normal = Normal::new(0.0, std_dev).map_err(|_| Error::InvalidDistribution("standard deviation"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Tensor {
        shape: shape.to_vec(),
        data: (0..n).map(|_| normal.sample(&mut rng)).collect(),
    })
}
