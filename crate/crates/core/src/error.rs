use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("extent of axis {axis} is zero; every extent must be at least 1")]
    ZeroExtent { axis: usize },
    #[error("tensor has {found} elements but its shape requires {expected}")]
    ElementCount { expected: usize, found: usize },
    #[error("tensor size overflows the address range")]
    SizeOverflow,
    #[error("axis {axis} is out of range for a rank-{rank} operand")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {axis} of operand {operand} appears more than once in the pairing")]
    DuplicateAxis { operand: char, axis: usize },
    #[error("paired axes ({a_axis}, {b_axis}) have different extents {a_extent} and {b_extent}")]
    ExtentMismatch {
        a_axis: usize,
        b_axis: usize,
        a_extent: usize,
        b_extent: usize,
    },
    #[error("not a permutation of {rank} axes")]
    InvalidPermutation { rank: usize },
    #[error("invalid distribution parameter: {0}")]
    InvalidDistribution(&'static str),
    #[error("multiplication count overflows the 64-bit range")]
    CountOverflow,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("data matrix has {found} at row {row}, expected {expected}")]
    DataShape {
        row: usize,
        expected: String,
        found: String,
    },
    #[error("operation needs a {expected} network, got {found}")]
    WrongGeometry {
        expected: &'static str,
        found: &'static str,
    },
    #[error("replacement for node {node} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        node: usize,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("plan does not match network: {0}")]
    PlanMismatch(String),
    #[error("oracle guard exceeded: intermediate of {elements} elements is above the limit of {limit}")]
    OracleGuard { elements: u128, limit: u128 },
    #[error("invalid range: {0}")]
    InvalidRange(String),
}
