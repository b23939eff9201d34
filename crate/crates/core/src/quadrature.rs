//! Composite Gauss–Legendre rules for the momentum integrals.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const PANEL_ORDER: usize = 16;
/// Phase a single panel may sweep; sixteen nodes integrate `e^{iθ}` over
/// `4π` to near rounding.
pub const PANEL_PHASE_SPAN: f64 = 4.0 * std::f64::consts::PI;

/// Quadrature nodes and weights on a wavenumber interval.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub k_min: f64,
    pub k_max: f64,
    /// Panel boundaries, ascending.
    pub edges: Vec<f64>,
    pub order: usize,
}

impl KGrid {
    /// `panels` equal panels of `order` Gauss–Legendre nodes on `[k_min, k_max]`.
    pub fn composite(k_min: f64, k_max: f64, panels: usize, order: usize) -> Result<Self> {
        if !(k_max > k_min) || !k_min.is_finite() || !k_max.is_finite() {
            return Err(Error::InvalidConfig(format!("bad momentum interval [{k_min}, {k_max}]")));
        }
        let panels = panels.max(1);
        let width = (k_max - k_min) / panels as f64;
        let mut edges: Vec<f64> = (0..panels).map(|p| k_min + p as f64 * width).collect();
        edges.push(k_max);
        Self::from_edges(&edges, order)
    }

    /// Panels between consecutive ascending edges.
    pub fn from_edges(edges: &[f64], order: usize) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidConfig("panel edges must be finite and strictly ascending".into()));
        }
        let order = NonZeroUsize::new(order).ok_or_else(|| Error::InvalidConfig("panel order must be positive".into()))?;
        let rule = GaussLegendre::new(order);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nodes = Vec::with_capacity((edges.len() - 1) * pairs.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for &(x, wt) in &pairs {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Ok(Self { nodes, weights, k_min: edges[0], k_max: edges[edges.len() - 1], edges: edges.to_vec(), order: order.get() })
    }

    /// Panels no wider than `max_width`.
    pub fn with_max_panel_width(k_min: f64, k_max: f64, max_width: f64) -> Result<Self> {
        if !(max_width > 0.0) {
            return Err(Error::InvalidConfig(format!("panel width must be positive, got {max_width}")));
        }
        let panels = ((k_max - k_min) / max_width).ceil().max(1.0) as usize;
        Self::composite(k_min, k_max, panels, PANEL_ORDER)
    }

    /// Same rule with every panel split in two.
    pub fn bisected(&self) -> Result<Self> {
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for w in self.edges.windows(2) {
            edges.extend([w[0], 0.5 * (w[0] + w[1])]);
        }
        edges.push(self.k_max);
        Self::from_edges(&edges, self.order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&k, &w)| w * f(k)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn graded_panels_integrate_polynomials() {
        let g = KGrid::from_edges(&[0.0, 0.1, 0.5, 2.0], PANEL_ORDER).unwrap();
        assert_abs_diff_eq!(g.integrate(|k| k.powi(7)), 2f64.powi(8) / 8.0, epsilon = 1e-12);
        assert!(KGrid::from_edges(&[0.0, 0.0, 1.0], 8).is_err());
    }

    #[test]
    fn integrates_oscillatory_exponential() {
        // panel width pi / x gives about half a period per panel
        let x = 40.0;
        let g = KGrid::with_max_panel_width(0.0, 10.0, std::f64::consts::PI / x).unwrap();
        let re = g.integrate(|k| (k * x).cos());
        assert_abs_diff_eq!(re, (10.0 * x).sin() / x, epsilon = 1e-12);
    }

    #[test]
    fn nodes_are_increasing_and_inside() {
        let g = KGrid::composite(1.0, 2.0, 3, 8).unwrap();
        assert_eq!(g.len(), 24);
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(g.nodes[0] > 1.0 && *g.nodes.last().unwrap() < 2.0);
        assert_abs_diff_eq!(g.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(KGrid::composite(1.0, 1.0, 3, 8).is_err());
    }
}
