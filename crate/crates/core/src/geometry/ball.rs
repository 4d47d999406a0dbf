use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::MetricFields;
use crate::error::{Error, Result};

/// Nodes within intrinsic distance `radius` of `center`.
#[derive(Clone, Debug)]
pub struct IntrinsicBall {
    pub center: usize,
    pub radius: f64,
    /// Members in increasing distance order.
    pub nodes: Vec<usize>,
    /// Graph distance from the center for every settled node (infinite elsewhere).
    pub dist: Vec<f64>,
}

impl IntrinsicBall {
    /// Members within a smaller radius.
    pub fn within(&self, radius: f64) -> Vec<usize> {
        self.nodes
            .iter()
            .copied()
            .filter(|&q| self.dist[q] <= radius)
            .collect()
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_length(metric: &MetricFields, p: usize, q: usize, step: &[isize]) -> f64 {
    let h = metric.domain.spacing();
    let len_at = |idx: usize| {
        let g = &metric.g[idx];
        let mut s = 0.0;
        for i in 0..step.len() {
            for j in 0..step.len() {
                s += g[(i, j)] * step[i] as f64 * step[j] as f64;
            }
        }
        s.sqrt()
    };
    0.5 * (len_at(p) + len_at(q)) * h
}

/// Dijkstra distances on the full `3^m - 1` neighbor stencil with edge
/// lengths measured in the induced metric (averaged over both endpoints).
pub fn intrinsic_ball(metric: &MetricFields, center: usize, radius: f64) -> Result<IntrinsicBall> {
    let domain = &metric.domain;
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
    }
    if center >= domain.len() || !domain.is_interior(center) {
        return Err(Error::Domain(format!("ball center {center} is not an interior node")));
    }
    let m = domain.dim();
    let steps: Vec<Vec<isize>> = (0..3usize.pow(m as u32))
        .map(|code| {
            let mut c = code;
            (0..m)
                .map(|_| {
                    let d = (c % 3) as isize - 1;
                    c /= 3;
                    d
                })
                .collect::<Vec<isize>>()
        })
        .filter(|s| s.iter().any(|&d| d != 0))
        .collect();

    let mut dist = vec![f64::INFINITY; domain.len()];
    let mut settled = vec![false; domain.len()];
    let mut nodes = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[center] = 0.0;
    heap.push(Entry(0.0, center));
    while let Some(Entry(d, p)) = heap.pop() {
        if settled[p] || d > dist[p] {
            continue;
        }
        if d > radius {
            break;
        }
        settled[p] = true;
        nodes.push(p);
        for step in &steps {
            let Some(q) = domain.offset(p, step) else {
                continue;
            };
            if settled[q] {
                continue;
            }
            let nd = d + edge_length(metric, p, q, step);
            if nd < dist[q] {
                dist[q] = nd;
                heap.push(Entry(nd, q));
            }
        }
    }
    for (q, s) in settled.iter().enumerate() {
        if !s {
            dist[q] = f64::INFINITY;
        }
    }
    Ok(IntrinsicBall {
        center,
        radius,
        nodes,
        dist,
    })
}
