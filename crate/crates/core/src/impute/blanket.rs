//! Markov blankets of missing coordinates in a Gaussian graphical model.
//!
//! For row `i`, vertices are *open* when observed and *closed* when missing.
//! The blanket of a missing vertex is the set of first open vertices hit by
//! walks that start at it and only pass through closed vertices. Conditioning
//! on the blanket is equivalent to conditioning on the whole observed row.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::SparsityGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlanketResult {
    pub node: usize,
    /// Observed vertices in the blanket, ascending.
    pub blanket: Vec<usize>,
    /// Missing vertices traversed, including `node`, ascending.
    pub explored_missing: Vec<usize>,
}

fn check_row(graph: &SparsityGraph, mask_row: &[bool]) -> Result<()> {
    if mask_row.len() != graph.p() {
        return Err(Error::DimensionMismatch(format!(
            "mask row has {} entries, graph has {} nodes",
            mask_row.len(),
            graph.p()
        )));
    }
    Ok(())
}

/// Breadth-first search from `node` through missing vertices. Observed
/// vertices that are reached join the blanket and are not expanded.
pub fn markov_blanket(graph: &SparsityGraph, mask_row: &[bool], node: usize) -> Result<BlanketResult> {
    check_row(graph, mask_row)?;
    if node >= graph.p() {
        return Err(Error::OutOfBounds { row: 0, col: node });
    }
    if mask_row[node] {
        return Err(Error::NodeObserved(node));
    }
    let mut seen = vec![false; graph.p()];
    let mut queue = VecDeque::from([node]);
    seen[node] = true;
    let mut blanket = Vec::new();
    let mut explored = Vec::new();
    while let Some(v) = queue.pop_front() {
        explored.push(v);
        for &w in graph.neighbors(v) {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            if mask_row[w] {
                blanket.push(w);
            } else {
                queue.push_back(w);
            }
        }
    }
    blanket.sort_unstable();
    explored.sort_unstable();
    Ok(BlanketResult {
        node,
        blanket,
        explored_missing: explored,
    })
}

/// All blankets of one row at once.
///
/// Missing vertices in the same connected component of the missing subgraph
/// share a blanket (the open boundary of that component), so each component
/// is searched once.
#[derive(Debug, Clone)]
pub struct RowBlankets {
    /// Component label per vertex; `usize::MAX` for observed vertices.
    component: Vec<usize>,
    blankets: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

impl RowBlankets {
    pub fn compute(graph: &SparsityGraph, mask_row: &[bool]) -> Result<Self> {
        check_row(graph, mask_row)?;
        let p = graph.p();
        let mut component = vec![usize::MAX; p];
        let mut blankets = Vec::new();
        let mut members = Vec::new();
        // Stamp of the last component that added a given open vertex.
        let mut stamp = vec![usize::MAX; p];
        let mut queue = VecDeque::new();
        for start in 0..p {
            if mask_row[start] || component[start] != usize::MAX {
                continue;
            }
            let label = blankets.len();
            let mut blanket = Vec::new();
            let mut comp = Vec::new();
            component[start] = label;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in graph.neighbors(v) {
                    if mask_row[w] {
                        if stamp[w] != label {
                            stamp[w] = label;
                            blanket.push(w);
                        }
                    } else if component[w] == usize::MAX {
                        component[w] = label;
                        queue.push_back(w);
                    }
                }
            }
            blanket.sort_unstable();
            comp.sort_unstable();
            blankets.push(blanket);
            members.push(comp);
        }
        Ok(Self {
            component,
            blankets,
            members,
        })
    }

    /// Blanket of a missing vertex; `None` for observed vertices.
    pub fn blanket_of(&self, node: usize) -> Option<&[usize]> {
        let c = self.component[node];
        (c != usize::MAX).then(|| self.blankets[c].as_slice())
    }

    /// Iterate `(missing vertices, shared blanket)` per component.
    pub fn components(&self) -> impl Iterator<Item = (&[usize], &[usize])> {
        self.members
            .iter()
            .zip(&self.blankets)
            .map(|(m, b)| (m.as_slice(), b.as_slice()))
    }
}
