//! Shortest paths on a 16-neighbour planar grid with trapezoidal edge lengths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::GridBox;

/// Axis, diagonal and knight moves.
pub const OFFSETS: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (1, -2),
    (2, -1),
    (-1, -2),
    (-2, -1),
];

/// Sub-intervals of the trapezoidal rule along each edge.
pub const EDGE_SUBSAMPLES: usize = 4;

/// Smallest accepted number of cells per axis.
pub const MIN_RESOLUTION: usize = 8;

/// `int_a^b w` along the segment by the trapezoidal rule.
pub fn segment_length<W: Fn(&[f64]) -> Result<f64>>(w: &W, a: &[f64], b: &[f64]) -> Result<f64> {
    let len = a.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt();
    if len == 0.0 {
        return Ok(0.0);
    }
    let mut p = vec![0.0; a.len()];
    let mut s = 0.0;
    for k in 0..=EDGE_SUBSAMPLES {
        let t = k as f64 / EDGE_SUBSAMPLES as f64;
        for i in 0..a.len() {
            p[i] = a[i] + t * (b[i] - a[i]);
        }
        let v = w(&p)?;
        s += if k == 0 || k == EDGE_SUBSAMPLES { 0.5 * v } else { v };
    }
    Ok(s * len / EDGE_SUBSAMPLES as f64)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Weighted planar graph: the grid nodes plus up to two attached endpoints.
pub struct GridGraph {
    pub grid: GridBox,
    /// Edge lengths per node in [`OFFSETS`] order (`inf` where the move leaves the box).
    edges: Vec<[f64; 16]>,
}

impl GridGraph {
    pub fn build<W: Fn(&[f64]) -> Result<f64> + Sync>(grid: &GridBox, w: &W) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                n: grid.dim(),
                msg: "the grid distance solver works in the plane".into(),
            });
        }
        if grid.cells < MIN_RESOLUTION {
            return Err(Error::Precondition(format!(
                "grid resolution {} is below {MIN_RESOLUTION} cells per axis",
                grid.cells
            )));
        }
        let m = grid.nodes_per_axis() as i64;
        let edges = (0..grid.node_count())
            .into_par_iter()
            .map(|k| {
                let idx = grid.multi_index(k);
                let a = grid.node(k);
                let mut out = [f64::INFINITY; 16];
                for (e, (di, dj)) in OFFSETS.iter().enumerate() {
                    let (i, j) = (idx[0] as i64 + di, idx[1] as i64 + dj);
                    if i < 0 || j < 0 || i >= m || j >= m {
                        continue;
                    }
                    let b = grid.node(grid.flat_index(&[i as usize, j as usize]));
                    out[e] = segment_length(w, &a, &b)?;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridGraph {
            grid: grid.clone(),
            edges,
        })
    }

    /// Corner nodes of the cell containing `x`.
    fn cell_corners(&self, x: &[f64]) -> Vec<usize> {
        let g = &self.grid;
        let mut base = [0usize; 2];
        for a in 0..2 {
            let h = g.spacing(a);
            let f = ((x[a] - g.lo[a]) / h).floor();
            base[a] = (f.max(0.0) as usize).min(g.cells - 1);
        }
        let mut out = Vec::with_capacity(4);
        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            out.push(g.flat_index(&[base[0] + di, base[1] + dj]));
        }
        out
    }

    /// Shortest path length from `x` to `y`, both attached to the corners of
    /// their cells by straight segments.
    pub fn distance<W: Fn(&[f64]) -> Result<f64>>(&self, w: &W, x: &[f64], y: &[f64]) -> Result<f64> {
        for p in [x, y] {
            if !self.grid.contains(p) {
                return Err(Error::OutOfBox(format!("{p:?} lies outside the grid box")));
            }
        }
        let n_nodes = self.grid.node_count();
        let src = n_nodes;
        let dst = n_nodes + 1;
        let xs: Vec<(usize, f64)> = self
            .cell_corners(x)
            .into_iter()
            .map(|k| Ok((k, segment_length(w, x, &self.grid.node(k))?)))
            .collect::<Result<_>>()?;
        let ys: Vec<(usize, f64)> = self
            .cell_corners(y)
            .into_iter()
            .map(|k| Ok((k, segment_length(w, &self.grid.node(k), y)?)))
            .collect::<Result<_>>()?;
        let mut best = f64::INFINITY;
        if self.cell_corners(x) == self.cell_corners(y) {
            best = segment_length(w, x, y)?;
        }
        let mut dist = vec![f64::INFINITY; n_nodes + 2];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Entry { dist: 0.0, node: src });
        let m = self.grid.nodes_per_axis() as i64;
        while let Some(Entry { dist: d, node }) = heap.pop() {
            if d > dist[node] || d >= best {
                continue;
            }
            if node == dst {
                best = best.min(d);
                break;
            }
            let mut relax = |v: usize, len: f64, heap: &mut BinaryHeap<Entry>| {
                let nd = d + len;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry { dist: nd, node: v });
                }
            };
            if node == src {
                for &(k, len) in &xs {
                    relax(k, len, &mut heap);
                }
                continue;
            }
            let idx = self.grid.multi_index(node);
            for (e, (di, dj)) in OFFSETS.iter().enumerate() {
                let len = self.edges[node][e];
                if len.is_finite() {
                    let (i, j) = ((idx[0] as i64 + di) as usize, (idx[1] as i64 + dj) as usize);
                    debug_assert!((i as i64) < m && (j as i64) < m);
                    relax(self.grid.flat_index(&[i, j]), len, &mut heap);
                }
            }
            for &(k, len) in &ys {
                if k == node {
                    relax(dst, len, &mut heap);
                }
            }
        }
        Ok(best.min(dist[dst]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(_: &[f64]) -> Result<f64> {
        Ok(1.0)
    }

    #[test]
    fn flat_axis_and_chamfer() {
        let g = GridBox::cube(2, 2.0, 16).unwrap();
        let graph = GridGraph::build(&g, &flat).unwrap();
        let d = graph.distance(&flat, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        // worst-case 16-neighbour direction stays within the chamfer bound
        let d = graph.distance(&flat, &[-1.5, -1.5], &[1.5, 0.0]).unwrap();
        let e = (9.0f64 + 2.25).sqrt();
        assert!(d >= e - 1e-12 && d <= 1.03 * e, "{d} vs {e}");
    }

    #[test]
    fn rejects_coarse_grids_and_outside_points() {
        let g = GridBox::cube(2, 1.0, 4).unwrap();
        assert!(matches!(GridGraph::build(&g, &flat), Err(Error::Precondition(_))));
        let g = GridBox::cube(2, 1.0, 8).unwrap();
        let graph = GridGraph::build(&g, &flat).unwrap();
        assert!(matches!(
            graph.distance(&flat, &[0.0, 0.0], &[2.0, 0.0]),
            Err(Error::OutOfBox(_))
        ));
    }
}
