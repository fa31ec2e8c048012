//! Reference computations that never touch the closed-form recurrence:
//! truncated brute-force series, raw moments, and the discretized
//! Stieltjes procedure.
//!
//! These are the independent side of every cross-check in the test suite,
//! and the Stieltjes procedure is also how fermionic rules get their
//! recurrence.

use crate::compensated::{compensated_sum, NeumaierSum};
use crate::error::{Error, Result};
use crate::measure::MeasureSpec;
use crate::quadrature::build_rule;
use crate::recurrence::RecurrenceTable;
use crate::summation::Summand;

/// Hard cap on the number of terms of a brute-force sum.
pub const MAX_SERIES_TERMS: usize = 10_000_000;
/// Consecutive sub-tolerance terms required before a series is truncated.
pub const SMALL_TERM_GUARD: usize = 3;
/// Relative truncation threshold for moments and inner products.
pub const INNER_PRODUCT_TOL: f64 = 1e-18;
/// Hard cap on the number of atoms visited by moment sums.
pub const MAX_INNER_PRODUCT_TERMS: usize = 1_000_000;
/// Largest order accepted by [`stieltjes_coeffs`].
pub const STIELTJES_MAX_ORDER: usize = 40;
/// Largest moment index accepted by [`moment`].
pub const MAX_MOMENT_INDEX: usize = 16;

/// Lattice atoms of a [`MeasureSpec`], generated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    spec: MeasureSpec,
    pub description: String,
}

impl DiscreteMeasure {
    pub fn new(spec: MeasureSpec) -> Self {
        let description = format!(
            "{} lattice h={} s={}",
            spec.flavor().as_str(),
            spec.h(),
            spec.s()
        );
        Self { spec, description }
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    /// `(location, mass)` pairs in increasing location. Infinite.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..).map(move |n| (self.spec.node(n), self.spec.atom_mass(n)))
    }
}

/// Value of a truncated series with the number of terms that went into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms_used: usize,
}

/// Sum `terms` until `guard` consecutive terms satisfy
/// `|term| <= rel_tol * |partial|`, not stopping before `min_terms`.
pub(crate) fn truncated_series<I>(
    terms: I,
    rel_tol: f64,
    guard: usize,
    min_terms: usize,
    cap: usize,
) -> Result<SeriesValue>
where
    I: IntoIterator<Item = f64>,
{
    let mut acc = NeumaierSum::new();
    let mut small_run = 0;
    for (i, term) in terms.into_iter().enumerate() {
        if i >= cap {
            return Err(Error::SeriesNonConvergence { terms: cap });
        }
        if !term.is_finite() {
            return Err(Error::SeriesNonConvergence { terms: i });
        }
        acc.add(term);
        if term.abs() <= rel_tol * acc.value().abs() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= guard && i + 1 >= min_terms {
            return Ok(SeriesValue {
                value: acc.value(),
                terms_used: i + 1,
            });
        }
    }
    // Finite iterator ran out before the tolerance was met.
    Err(Error::SeriesNonConvergence { terms: cap })
}

/// Brute-force lattice sum `sum' F(x_n) h` of a summand over the
/// measure's nodes, truncated at relative tolerance `rel_tol`.
///
/// The bosonic `n = 0` term uses the summand's `x -> 0+` limit.
pub fn brute_force_sum(
    summand: &Summand,
    measure: &MeasureSpec,
    rel_tol: f64,
) -> Result<SeriesValue> {
    if !(1e-15..1.0).contains(&rel_tol) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must be in [1e-15, 1), got {rel_tol}"
        )));
    }
    let zero = match measure.flavor() {
        crate::measure::Flavor::Bosonic => Some(summand.zero_limit()?),
        crate::measure::Flavor::Fermionic => None,
    };
    let terms = (0..).map(|n| {
        let value = match (n, zero) {
            (0, Some(z)) => z,
            _ => summand.full_value(measure.node(n)),
        };
        value * measure.lattice_weight(n)
    });
    truncated_series(terms, rel_tol, SMALL_TERM_GUARD, 1, MAX_SERIES_TERMS)
}

/// Raw moment `c_m = sum x^m * mass` of a discrete measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord {
    pub m: usize,
    pub value: f64,
}

pub fn moment(measure: &DiscreteMeasure, m: usize) -> Result<MomentRecord> {
    if m > MAX_MOMENT_INDEX {
        return Err(Error::InvalidArgument(format!(
            "moment index {m} exceeds {MAX_MOMENT_INDEX}"
        )));
    }
    let spec = measure.spec();
    // x^m e^{-s x} peaks at x = m / s; the tail test only applies beyond it.
    let past_peak = (m as f64 / spec.hs()).ceil() as usize + 1;
    let terms = measure
        .atoms()
        .map(|(x, w)| if m == 0 { w } else { x.powi(m as i32) * w });
    let s = truncated_series(
        terms,
        INNER_PRODUCT_TOL,
        SMALL_TERM_GUARD,
        past_peak,
        MAX_INNER_PRODUCT_TERMS,
    )?;
    Ok(MomentRecord { m, value: s.value })
}

/// Number of atoms needed so that polynomials up to `degree` integrate
/// against the truncated measure with a relative tail below ~1e-20, and
/// the discarded mass is below `1e-18 mu_0`.
fn stieltjes_atom_count(spec: &MeasureSpec, degree: usize) -> usize {
    let hs = spec.hs();
    let h = spec.h();
    let deg = degree as f64;
    let log_term = |n: f64| -hs * n + deg * (n * h + h).ln();
    let peak = deg / hs;
    let target = log_term(peak) - 46.0;
    let mass_cut = (42.0 / hs).ceil();
    let mut n = peak.ceil().max(mass_cut);
    while log_term(n) > target {
        n += (0.05 * n).max(1.0).floor();
    }
    n as usize + 1
}

/// Recurrence coefficients of the measure by the discretized Stieltjes
/// procedure on orthonormal polynomials.
pub fn stieltjes_coeffs(measure: &DiscreteMeasure, order: usize) -> Result<RecurrenceTable> {
    if order == 0 || order > STIELTJES_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "Stieltjes order must be in 1..={STIELTJES_MAX_ORDER}, got {order}"
        )));
    }
    let count = stieltjes_atom_count(measure.spec(), 2 * order);
    let (x, w): (Vec<f64>, Vec<f64>) = measure.atoms().take(count).unzip();

    let mass = compensated_sum(w.iter().copied());
    let mut q = vec![1.0 / mass.sqrt(); count];
    let mut q_prev = vec![0.0; count];
    let mut beta_prev = 0.0;
    let mut diag = Vec::with_capacity(order);
    let mut offdiag = Vec::with_capacity(order.saturating_sub(1));

    for k in 0..order {
        let alpha = compensated_sum((0..count).map(|i| w[i] * x[i] * q[i] * q[i]));
        diag.push(alpha);
        if k + 1 == order {
            break;
        }
        let next: Vec<f64> = (0..count)
            .map(|i| (x[i] - alpha) * q[i] - beta_prev * q_prev[i])
            .collect();
        let norm_sq = compensated_sum((0..count).map(|i| w[i] * next[i] * next[i]));
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::IllConditioned {
                step: k + 1,
                norm: norm_sq,
            });
        }
        let beta = norm_sq.sqrt();
        offdiag.push(beta);
        q_prev = q;
        q = next.into_iter().map(|v| v / beta).collect();
        beta_prev = beta;
    }
    RecurrenceTable::new(diag, offdiag, mass)
}

/// Per-order deviation of the leading nodes and weights from their limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub order: usize,
    /// `max_{k <= K} |x_k - k|`
    pub max_node_deviation: f64,
    /// `max_{k <= K} |w_k - W(k)|`
    pub max_weight_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub max_index: usize,
    pub rows: Vec<LimitRow>,
}

impl LimitReport {
    /// Both maxima non-increasing along the order list.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].max_node_deviation <= w[0].max_node_deviation
                && w[1].max_weight_deviation <= w[0].max_weight_deviation
        })
    }
}

/// Limit weight at lattice point `k` for `h = s = 1`: `1/2` at the origin,
/// `e^{-k}` elsewhere.
pub fn limit_weight(k: usize) -> f64 {
    if k == 0 {
        0.5
    } else {
        (-(k as f64)).exp()
    }
}

/// For the `h = s = 1` bosonic measure, how close the first `max_index + 1`
/// nodes and weights of each rule in `orders` are to the lattice points
/// `0, 1, 2, ...` and their masses.
pub fn node_weight_limit_check(orders: &[usize], max_index: usize) -> Result<LimitReport> {
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "orders must be strictly increasing".into(),
        ));
    }
    if orders.first().is_some_and(|&n| n <= max_index) {
        return Err(Error::InvalidArgument(format!(
            "every order must exceed max_index = {max_index}"
        )));
    }
    let measure = MeasureSpec::bosonic(1.0, 1.0)?;
    let rows = orders
        .iter()
        .map(|&order| {
            let rule = build_rule(order, &measure)?;
            let (mut node_dev, mut weight_dev) = (0.0f64, 0.0f64);
            for k in 0..=max_index {
                node_dev = node_dev.max((rule.nodes()[k] - k as f64).abs());
                weight_dev = weight_dev.max((rule.weights()[k] - limit_weight(k)).abs());
            }
            Ok(LimitRow {
                order,
                max_node_deviation: node_dev,
                max_weight_deviation: weight_dev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitReport { max_index, rows })
}
