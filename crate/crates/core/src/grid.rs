//! Uniform grid on a symmetric truncated line.

use crate::error::{CoreError, Result};

/// Nodes -L + j h for j = 0..=n with h = 2L/n.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGrid {
    pub half_width: f64,
    /// Interval count; the grid has n + 1 nodes including both endpoints.
    pub n: usize,
    pub h: f64,
}

impl LineGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if half_width <= 0.0 {
            return Err(CoreError::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        if n < 16 {
            return Err(CoreError::InvalidGrid(format!("need at least 16 intervals, got {n}")));
        }
        Ok(Self {
            half_width,
            n,
            h: 2.0 * half_width / n as f64,
        })
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=self.n).map(|j| f(self.node(j))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_strictly_increasing_and_symmetric() {
        let g = LineGrid::new(5.0, 100).unwrap();
        let ns = g.nodes();
        assert_eq!(ns.len(), 101);
        assert_eq!(ns[0], -5.0);
        assert!((ns[100] - 5.0).abs() < 1e-14);
        assert!(ns.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(LineGrid::new(1.0, 8).is_err());
        assert!(LineGrid::new(-1.0, 64).is_err());
    }
}
