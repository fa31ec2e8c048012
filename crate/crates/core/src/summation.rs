//! Lattice sums `sum' F(n h) h` by Gaussian summation, naive truncation
//! and convergence studies comparing the two.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::measure::{Flavor, MeasureSpec};
use crate::oracle::brute_force_sum;
use crate::quadrature::{build_rule, QuadratureRule, RuleSource};

/// Relative tolerance of the brute-force reference in convergence studies.
pub const STUDY_REFERENCE_TOL: f64 = 1e-14;

/// How a [`Summand`]'s function relates to the full summand `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SummandForm {
    /// The function is `F` itself.
    Full,
    /// The function is the smooth part `f`, with `F(x) = f(x) e^{-decay x}`.
    Smooth { decay: f64 },
}

/// A summand `F(x) = f(x) e^{-s x}`, given either as `F` or as `f`.
#[derive(Clone)]
pub struct Summand {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    form: SummandForm,
    decay_rate_hint: Option<f64>,
    zero_limit: Option<f64>,
}

impl fmt::Debug for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Summand")
            .field("form", &self.form)
            .field("decay_rate_hint", &self.decay_rate_hint)
            .field("zero_limit", &self.zero_limit)
            .finish_non_exhaustive()
    }
}

impl Summand {
    /// Summand given as the full `F(x)`.
    pub fn full<F>(func: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            func: Arc::new(func),
            form: SummandForm::Full,
            decay_rate_hint: None,
            zero_limit: None,
        }
    }

    /// Summand given as its smooth part `f(x)`, with `F(x) = f(x) e^{-decay x}`.
    pub fn smooth<F>(func: F, decay: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            func: Arc::new(func),
            form: SummandForm::Smooth { decay },
            decay_rate_hint: Some(decay),
            zero_limit: None,
        }
    }

    /// Record the asymptotic decay rate `s_0` of `F`.
    pub fn with_decay_hint(mut self, s0: f64) -> Self {
        self.decay_rate_hint = Some(s0);
        self
    }

    /// Supply `lim_{x -> 0+} F(x)`, needed wherever the bosonic origin term
    /// is summed explicitly.
    pub fn with_zero_limit(mut self, value: f64) -> Self {
        self.zero_limit = Some(value);
        self
    }

    pub fn form(&self) -> SummandForm {
        self.form
    }

    pub fn decay_rate_hint(&self) -> Option<f64> {
        self.decay_rate_hint
    }

    pub fn zero_limit(&self) -> Result<f64> {
        self.zero_limit.ok_or(Error::MissingZeroLimit)
    }

    /// `F(x)`.
    pub fn full_value(&self, x: f64) -> f64 {
        match self.form {
            SummandForm::Full => (self.func)(x),
            SummandForm::Smooth { decay } => (self.func)(x) * (-decay * x).exp(),
        }
    }

    /// `F(x) e^{s x}`, the function a rule built for decay rate `s` is
    /// applied to.
    pub fn smooth_value(&self, x: f64, s: f64) -> f64 {
        match self.form {
            SummandForm::Full => (self.func)(x) * (s * x).exp(),
            SummandForm::Smooth { decay } if decay == s => (self.func)(x),
            SummandForm::Smooth { decay } => (self.func)(x) * ((s - decay) * x).exp(),
        }
    }

    /// Wrap the underlying function so every call bumps `counter`.
    fn counted(&self, counter: Arc<AtomicUsize>) -> Self {
        let inner = Arc::clone(&self.func);
        Self {
            func: Arc::new(move |x| {
                counter.fetch_add(1, Ordering::Relaxed);
                inner(x)
            }),
            ..self.clone()
        }
    }
}

/// Apply `rule` to `summand`: `sum_k w_k F(x_k) e^{s x_k}`.
pub fn sum_with_rule(summand: &Summand, rule: &QuadratureRule) -> Result<f64> {
    let s = match rule.source() {
        RuleSource::Discrete(m) => m.s(),
        RuleSource::Laguerre { s } => s,
    };
    let mut acc = NeumaierSum::new();
    for (x, w) in rule.iter() {
        let v = summand.smooth_value(x, s);
        if !v.is_finite() {
            return Err(Error::NonFiniteSummand { x });
        }
        acc.add(w * v);
    }
    Ok(acc.value())
}

/// `N`-point Gaussian estimate of `sum' F(n h) h` using the rule for
/// `measure`. The summand is only ever evaluated at the rule's nodes, which
/// are strictly positive.
pub fn mdl_sum(summand: &Summand, measure: &MeasureSpec, order: usize) -> Result<f64> {
    let rule = build_rule(order, measure)?;
    sum_with_rule(summand, &rule)
}

/// First `N` lattice terms: `F(0+) h/2 + sum_{n=1}^{N-1} F(n h) h` for the
/// bosonic lattice, `sum_{n=0}^{N-1} F((n+1/2) h) h` for the fermionic one.
pub fn naive_partial_sum(summand: &Summand, measure: &MeasureSpec, order: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "naive sum needs at least one term".into(),
        ));
    }
    let mut acc = NeumaierSum::new();
    for n in 0..order {
        let value = if n == 0 && measure.flavor() == Flavor::Bosonic {
            summand.zero_limit()?
        } else {
            summand.full_value(measure.node(n))
        };
        acc.add(value * measure.lattice_weight(n));
    }
    Ok(acc.value())
}

/// One way of estimating a lattice sum with `N` summand evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Gaussian summation with a rule built for decay rate `s`.
    Mdl { s: f64 },
    /// Truncation after `N` lattice terms.
    Naive,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Mdl { s } => write!(f, "mdl:{s}"),
            Strategy::Naive => f.write_str("naive"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "naive" {
            return Ok(Strategy::Naive);
        }
        let bad = || {
            Error::InvalidArgument(format!(
                "unknown strategy `{text}` (expected `naive` or `mdl:<s>`)"
            ))
        };
        let rate = text.strip_prefix("mdl:").ok_or_else(bad)?;
        let s: f64 = rate.parse().map_err(|_| bad())?;
        if !(s.is_finite() && s > 0.0) {
            return Err(bad());
        }
        Ok(Strategy::Mdl { s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub estimate: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Error-versus-cost rows of one strategy against a brute-force reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub strategy: Strategy,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Whether rows of a study may be computed on several threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

fn study_row(
    summand: &Summand,
    measure: &MeasureSpec,
    strategy: Strategy,
    order: usize,
    reference: f64,
) -> Result<ConvergenceRow> {
    let calls = Arc::new(AtomicUsize::new(0));
    let counted = summand.counted(Arc::clone(&calls));
    let (estimate, extra) = match strategy {
        Strategy::Mdl { s } => (mdl_sum(&counted, &measure.with_s(s)?, order)?, 0),
        Strategy::Naive => {
            let origin = usize::from(measure.flavor() == Flavor::Bosonic);
            (naive_partial_sum(&counted, measure, order)?, origin)
        }
    };
    Ok(ConvergenceRow {
        order,
        estimate,
        abs_error: (estimate - reference).abs(),
        evaluations: calls.load(Ordering::Relaxed) + extra,
    })
}

/// Run every strategy at every order in `orders` and compare against a
/// brute-force reference for the lattice of `measure`.
///
/// `measure.s()` is only the nominal decay rate; each `Strategy::Mdl`
/// builds its rule with its own `s` and applies it to `F(x) e^{s x}`.
/// The naive strategy counts the origin limit as one evaluation.
pub fn convergence_study(
    summand: &Summand,
    measure: &MeasureSpec,
    orders: &[usize],
    strategies: &[Strategy],
    execution: Execution,
) -> Result<Vec<ConvergenceReport>> {
    let reference = brute_force_sum(summand, measure, STUDY_REFERENCE_TOL)?.value;
    strategies
        .iter()
        .map(|&strategy| {
            let row = |&order: &usize| study_row(summand, measure, strategy, order, reference);
            let rows = match execution {
                Execution::Parallel => orders.par_iter().map(row).collect::<Result<Vec<_>>>()?,
                Execution::Sequential => orders.iter().map(row).collect::<Result<Vec<_>>>()?,
            };
            Ok(ConvergenceReport {
                strategy,
                reference,
                rows,
            })
        })
        .collect()
}

/// One node of one rule in a root sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootRow {
    pub hs: f64,
    pub k: usize,
    pub node: f64,
    /// `x_k - k h`
    pub node_minus_kh: f64,
}

/// Nodes of the `N`-point bosonic rule with decay rate `s` for each `hs`
/// in `hs_grid` (so `h = hs / s`), alongside their offset from `k h`.
pub fn root_trajectory(order: usize, s: f64, hs_grid: &[f64]) -> Result<Vec<RootRow>> {
    let mut rows = Vec::with_capacity(order * hs_grid.len());
    for &hs in hs_grid {
        if !(hs > 0.0 && hs <= 4.0) {
            return Err(Error::InvalidArgument(format!(
                "hs must lie in (0, 4], got {hs}"
            )));
        }
        let measure = MeasureSpec::bosonic(hs / s, s)?;
        let rule = build_rule(order, &measure)?;
        let h = measure.h();
        rows.extend(rule.nodes().iter().enumerate().map(|(k, &node)| RootRow {
            hs,
            k,
            node,
            node_minus_kh: node - k as f64 * h,
        }));
    }
    Ok(rows)
}
