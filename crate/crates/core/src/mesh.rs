//! One-dimensional slab mesh with a node pinned at the interface `x = 0`.

use crate::error::{Error, Result};
use crate::params::Side;

/// Smallest number of elements allowed on each side of the interface.
pub const MIN_ELEMENTS_PER_SIDE: usize = 4;

/// Per-element growth of the element size away from `0` and `±1` at full grading.
const MAX_GROWTH_PER_ELEMENT: f64 = 0.02;

/// Mesh of `[-1, 1]` whose node `interface_index` is exactly `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMesh {
    nodes: Vec<f64>,
    interface_index: usize,
}

impl InterfaceMesh {
    /// Builds a mesh from explicit nodes, checking every invariant.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.first() != Some(&-1.0) || nodes.last() != Some(&1.0) {
            return Err(Error::InvalidMesh("endpoints must be -1 and 1".into()));
        }
        if nodes
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidMesh(
                "nodes must be strictly increasing".into(),
            ));
        }
        let interface_index = nodes
            .iter()
            .position(|&x| x == 0.0)
            .ok_or_else(|| Error::InvalidMesh("no node at x = 0".into()))?;
        let right = nodes.len() - 1 - interface_index;
        if interface_index < MIN_ELEMENTS_PER_SIDE || right < MIN_ELEMENTS_PER_SIDE {
            return Err(Error::InvalidMesh(format!(
                "need at least {MIN_ELEMENTS_PER_SIDE} elements per side"
            )));
        }
        Ok(Self {
            nodes,
            interface_index,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interface_index(&self) -> usize {
        self.interface_index
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Endpoints of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn element_len(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    /// Fluid occupying element `e`.
    pub fn side(&self, e: usize) -> Side {
        if e < self.interface_index {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    /// Index of the element containing `x`; points on a node go to the element
    /// on their right, except `x = 1`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(-1.0..=1.0).contains(&x) {
            return None;
        }
        let idx = self.nodes.partition_point(|&n| n <= x);
        Some(idx.saturating_sub(1).min(self.element_count() - 1))
    }

    /// Mesh reflected through `x = 0`.
    pub fn reflected(&self) -> Self {
        let nodes: Vec<f64> = self.nodes.iter().rev().map(|&x| -x).collect();
        let interface_index = nodes.len() - 1 - self.interface_index;
        Self {
            nodes,
            interface_index,
        }
    }

    pub fn min_element_len(&self) -> f64 {
        (0..self.element_count())
            .map(|e| self.element_len(e))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds a symmetric mesh with `n_per_side` elements on each side of `0`.
///
/// `grading = 0` gives a uniform mesh. For `grading > 0` element sizes grow
/// geometrically, by the factor `1 + 0.02 * grading` per element, away from
/// the interface and from the walls.
pub fn build_mesh(n_per_side: usize, grading: f64) -> Result<InterfaceMesh> {
    if n_per_side < MIN_ELEMENTS_PER_SIDE {
        return Err(Error::InvalidMesh(format!(
            "n_per_side = {n_per_side} < {MIN_ELEMENTS_PER_SIDE}"
        )));
    }
    if !(0.0..=1.0).contains(&grading) {
        return Err(Error::InvalidMesh(format!(
            "grading {grading} outside [0, 1]"
        )));
    }
    let side = side_nodes(n_per_side, grading);
    let mut nodes = Vec::with_capacity(2 * n_per_side + 1);
    nodes.extend(side.iter().rev().map(|&x| -x));
    nodes.extend(side.iter().skip(1).copied());
    Ok(InterfaceMesh {
        nodes,
        interface_index: n_per_side,
    })
}

/// Nodes on `[0, 1]`, starting at exactly 0 and ending at exactly 1.
fn side_nodes(n: usize, grading: f64) -> Vec<f64> {
    if grading == 0.0 {
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        nodes[n] = 1.0;
        return nodes;
    }
    let ratio = 1.0 + MAX_GROWTH_PER_ELEMENT * grading;
    let sizes: Vec<f64> = (0..n)
        .map(|i| ratio.powi(i.min(n - 1 - i) as i32))
        .collect();
    let total: f64 = sizes.iter().sum();
    let mut nodes = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    nodes.push(0.0);
    for s in &sizes[..n - 1] {
        acc += s;
        nodes.push(acc / total);
    }
    nodes.push(1.0);
    nodes
}
