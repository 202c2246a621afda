//! Global max pooling over the nodes of each graph in a batch.

use super::gat::GraphBatch;
use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub struct PoolCache {
    /// winning node per (graph, feature)
    argmax: Vec<usize>,
    n_nodes: usize,
}

/// [n_nodes, f] -> [n_graphs, f], per-graph column maxima.
pub fn global_max_pool<R: Real>(
    nodes: &Tensor<R>,
    graph: &GraphBatch<R>,
) -> Result<(Tensor<R>, PoolCache)> {
    let s = nodes.shape();
    if s.len() != 2 || s[0] != graph.n_nodes {
        return Err(Error::Shape(format!(
            "global_max_pool expects [{}, f], got {:?}",
            graph.n_nodes, s
        )));
    }
    let f = s[1];
    let mut out = Tensor::zeros(&[graph.n_graphs, f]);
    out.fill(R::neg_infinity());
    let mut argmax = vec![usize::MAX; graph.n_graphs * f];
    for node in 0..graph.n_nodes {
        let g = graph.graph_of_node[node];
        for j in 0..f {
            let v = nodes.data()[node * f + j];
            let slot = g * f + j;
            if argmax[slot] == usize::MAX || v > out.data()[slot] {
                out.data_mut()[slot] = v;
                argmax[slot] = node;
            }
        }
    }
    if argmax.iter().any(|&a| a == usize::MAX) {
        return Err(Error::Graph("a graph in the batch has no nodes".into()));
    }
    Ok((
        out,
        PoolCache {
            argmax,
            n_nodes: graph.n_nodes,
        },
    ))
}

pub fn global_max_pool_backward<R: Real>(dy: &Tensor<R>, cache: &PoolCache) -> Tensor<R> {
    let f = dy.shape()[1];
    let mut dx = Tensor::zeros(&[cache.n_nodes, f]);
    for (slot, &node) in cache.argmax.iter().enumerate() {
        let j = slot % f;
        dx.data_mut()[node * f + j] += dy.data()[slot];
    }
    dx
}
