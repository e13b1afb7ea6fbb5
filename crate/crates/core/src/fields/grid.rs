//! Dense samples of a field on an axis-aligned box.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ScalarField;

/// Axis-aligned box `[lo_i, hi_i]` with `cells` cells per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: usize,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: usize) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if cells < 2 {
            return Err(Error::Precondition(format!(
                "resolution must be at least 2 cells per axis, got {cells}"
            )));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && b > a))
        {
            return Err(Error::Precondition("grid box is degenerate".into()));
        }
        Ok(GridBox { lo, hi, cells })
    }

    /// Cube `[-half, half]^n`.
    pub fn cube(n: usize, half: f64, cells: usize) -> Result<Self> {
        Self::new(vec![-half; n], vec![half; n], cells)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Nodes per axis (`cells + 1`).
    pub fn nodes_per_axis(&self) -> usize {
        self.cells + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().pow(self.dim() as u32)
    }

    /// Coordinate of node `i` along `axis`. End nodes are the box faces
    /// exactly; interior nodes are `lo + (hi - lo) * i / cells`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i == 0 {
            return self.lo[axis];
        }
        if i == self.cells {
            return self.hi[axis];
        }
        self.lo[axis] + (self.hi[axis] - self.lo[axis]) * (i as f64) / (self.cells as f64)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells as f64
    }

    /// Multi-index of a flat node index; axis 0 varies fastest.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let m = self.nodes_per_axis();
        let mut idx = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            idx.push(flat % m);
            flat /= m;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let m = self.nodes_per_axis();
        idx.iter().rev().fold(0, |acc, &i| acc * m + i)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coord(a, i))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }
}

/// Field values at every node of a [`GridBox`], flat with axis 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: GridBox,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat_index(idx)]
    }
}

pub fn sample_grid(f: &ScalarField, grid: &GridBox) -> Result<GridField> {
    if grid.dim() != f.dim().get() {
        return Err(Error::DimensionMismatch {
            expected: f.dim().get(),
            got: grid.dim(),
        });
    }
    let values = (0..grid.node_count())
        .into_par_iter()
        .map(|k| {
            f.eval_slice(&grid.node(k)).map_err(|e| Error::AtNode {
                index: k,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GridField {
        grid: grid.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Dimension;

    fn d2() -> Dimension {
        Dimension::new(2).unwrap()
    }

    #[test]
    fn zero_field_samples_to_zero() {
        let g = GridBox::cube(2, 3.0, 7).unwrap();
        let s = sample_grid(&ScalarField::zero(d2()), &g).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
        assert_eq!(s.values.len(), 64);
    }

    #[test]
    fn linear_field_rows() {
        let f = ScalarField::parse("x1", d2()).unwrap();
        let g = GridBox::new(vec![0.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        let s = sample_grid(&f, &g).unwrap();
        for j in 0..3 {
            let row: Vec<f64> = (0..3).map(|i| s.at(&[i, j])).collect();
            assert_eq!(row, vec![0.0, 0.5, 1.0]);
        }
    }

    #[test]
    fn sphere_center_node() {
        let f = ScalarField::parse("log(2/(1+r^2))", d2()).unwrap();
        let g = GridBox::cube(2, 1.0, 4).unwrap();
        let s = sample_grid(&f, &g).unwrap();
        assert_eq!(s.at(&[2, 2]), 2f64.ln());
    }

    #[test]
    fn node_errors_carry_index() {
        let f = ScalarField::parse("log(x1)", d2()).unwrap();
        let g = GridBox::new(vec![-1.0, 0.0], vec![1.0, 1.0], 2).unwrap();
        match sample_grid(&f, &g) {
            Err(Error::AtNode { index, .. }) => assert_eq!(index, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(GridBox::cube(2, 1.0, 1).is_err());
        assert!(GridBox::new(vec![0.0, 1.0], vec![1.0, 1.0], 4).is_err());
    }
}
