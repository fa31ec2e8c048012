//! Gaussian summation rules from Jacobi matrices (Golub-Welsch).

mod tridiag;

pub use tridiag::{
    cholesky_pivots, refine_positive_definite, tridiag_eigen, TridiagEigen, MAX_SWEEPS,
};

use std::cmp::Ordering;

use crate::compensated::compensated_sum;
use crate::error::{Error, Result};
use crate::measure::{Flavor, MeasureSpec};
use crate::oracle::{stieltjes_coeffs, DiscreteMeasure};
use crate::recurrence::{build_recurrence_table, RecurrenceTable};

/// What a rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleSource {
    /// A discrete lattice measure.
    Discrete(MeasureSpec),
    /// The continuous weight `e^{-s x}` on `[0, inf)`.
    Laguerre { s: f64 },
}

/// Nodes and weights of an `N`-point Gaussian rule.
///
/// Nodes are strictly increasing; weights are positive and sum to the
/// total mass of the underlying measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    source: RuleSource,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn source(&self) -> RuleSource {
        self.source
    }

    pub fn measure(&self) -> Option<&MeasureSpec> {
        match &self.source {
            RuleSource::Discrete(m) => Some(m),
            RuleSource::Laguerre { .. } => None,
        }
    }

    /// `sum_k w_k f(x_k)`, where `f` is the smooth part of the summand (the
    /// measure's exponential is already in the weights).
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(x)),
        )
    }

    /// Iterator over `(node, weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Golub-Welsch on a recurrence table.
///
/// Nodes are the Jacobi-matrix eigenvalues, refined to high relative
/// accuracy when the matrix is positive definite, and
/// `weights[k] = mass * first_components[k]^2`.
pub fn rule_from_table(table: &RecurrenceTable, source: RuleSource) -> Result<QuadratureRule> {
    let eig = tridiag_eigen(&table.diag, &table.offdiag)?;
    let norm = table
        .diag
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let left = if i > 0 {
                table.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let right = table.offdiag.get(i).map_or(0.0, |b| b.abs());
            a.abs() + left + right
        })
        .fold(0.0, f64::max);

    let pivots = match &table.cholesky_pivots {
        Some(p) => Some(p.clone()),
        None => cholesky_pivots(&table.diag, &table.offdiag),
    };
    let nodes = pivots
        .and_then(|p| refine_positive_definite(&p, &table.offdiag, &eig.eigenvalues, norm))
        .unwrap_or(eig.eigenvalues);

    if let Some(index) = nodes
        .windows(2)
        .position(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(Error::NodeOrdering { index: index + 1 });
    }
    let weights = eig
        .first_components
        .iter()
        .map(|c| table.mass * c * c)
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        source,
    })
}

/// `N`-point Gaussian summation rule for a discrete exponential measure.
///
/// Bosonic measures use the closed-form recurrence; fermionic measures
/// take their recurrence from the Stieltjes procedure.
pub fn build_rule(order: usize, measure: &MeasureSpec) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "rule order must be at least 1".into(),
        ));
    }
    let table = match measure.flavor() {
        Flavor::Bosonic => build_recurrence_table(order, measure)?,
        Flavor::Fermionic => stieltjes_coeffs(&DiscreteMeasure::new(*measure), order)?,
    };
    rule_from_table(&table, RuleSource::Discrete(*measure))
}

/// Gauss-Laguerre rule for `int_0^inf f(x) e^{-s x} dx`, the `h -> 0` limit
/// of [`build_rule`].
pub fn gauss_laguerre_rule(order: usize, s: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "rule order must be at least 1".into(),
        ));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "decay rate s must be positive, got {s}"
        )));
    }
    let diag = (0..order).map(|n| (2 * n + 1) as f64 / s).collect();
    let offdiag = (1..order).map(|n| n as f64 / s).collect();
    let mut table = RecurrenceTable::new(diag, offdiag, 1.0 / s)?;
    // Monic Laguerre: -pi_{n+1}(0) / pi_n(0) = (n + 1) / s.
    table.cholesky_pivots = Some((1..=order).map(|n| n as f64 / s).collect());
    rule_from_table(&table, RuleSource::Laguerre { s })
}
