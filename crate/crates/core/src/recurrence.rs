//! Discrete Laguerre (DL) and modified discrete Laguerre (MDL) polynomials.
//!
//! Both families are orthogonal on the non-negative integers with weight
//! `tau^{-n}`; the MDL family additionally halves the weight at `n = 0`.
//! All `tau`-dependent ratios are evaluated in powers of `u = 1/tau`, which
//! stay in `[0, 1]`, so nothing overflows even when `n hs` is in the
//! thousands.

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::measure::{Flavor, MeasureSpec, Tau};

/// Largest DL degree accepted by [`dl_eval`].
pub const DL_MAX_DEGREE: usize = 60;

/// Value of the DL polynomial `L_k` at the lattice point `n`.
///
/// Evaluates the alternating binomial sum
/// `sum_i (-1)^i C(k,i) C(n+i,i) (1 - 1/tau)^i`, or the equivalent
/// `tau^{-k} sum_i (-1)^i C(k,i) C(n,i) (tau-1)^i` when its terms are
/// smaller, since the two cancel badly in opposite corners of `(n, tau)`.
pub fn dl_eval(k: usize, n: usize, tau: Tau) -> Result<f64> {
    if k > DL_MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "DL degree {k} exceeds {DL_MAX_DEGREE}"
        )));
    }
    let (direct, direct_bound) = dl_rising_form(k, n, tau.one_minus_recip());
    let (pfaff, pfaff_bound) = dl_falling_form(k, n, tau.minus_one());
    let scale = tau.recip_pow(k);
    let pfaff_bound = pfaff_bound * scale;
    if pfaff_bound.is_finite() && pfaff_bound < direct_bound {
        Ok(scale * pfaff)
    } else {
        Ok(direct)
    }
}

// sum_i (-1)^i C(k,i) C(n+i,i) v^i with v = 1 - 1/tau; returns (value, sum |terms|).
fn dl_rising_form(k: usize, n: usize, v: f64) -> (f64, f64) {
    let mut acc = NeumaierSum::new();
    let mut abs = 0.0;
    let mut term = 1.0;
    for i in 0..=k {
        acc.add(term);
        abs += term.abs();
        let ip1 = (i + 1) as f64;
        term *= -((k - i) as f64) * ((n + i + 1) as f64) / (ip1 * ip1) * v;
    }
    (acc.value(), abs)
}

// sum_i (-1)^i C(k,i) C(n,i) w^i with w = tau - 1; terminates at min(k, n).
fn dl_falling_form(k: usize, n: usize, w: f64) -> (f64, f64) {
    let mut acc = NeumaierSum::new();
    let mut abs = 0.0;
    let mut term = 1.0;
    for i in 0..=k.min(n) {
        acc.add(term);
        abs += term.abs();
        let ip1 = (i + 1) as f64;
        term *= -((k - i) as f64) * ((n - i) as f64) / (ip1 * ip1) * w;
    }
    (acc.value(), abs)
}

/// `L_n'(0)` and `<L_n', L_n'>'` for the unnormalized MDL polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdlScalarProps {
    pub value_at_zero: f64,
    pub norm_sq: f64,
}

/// Closed forms `L_n'(0) = 2/(1+tau^n)` and
/// `<L_n',L_n'>' = (1+tau^{n+1}) / (tau^n (1+tau^n)(tau-1))`.
pub fn mdl_scalar_props(n: usize, tau: Tau) -> MdlScalarProps {
    let un = tau.recip_pow(n);
    let un1 = un * tau.recip();
    MdlScalarProps {
        value_at_zero: 2.0 * un / (1.0 + un),
        norm_sq: un * (1.0 + un1) / ((1.0 + un) * tau.one_minus_recip()),
    }
}

/// Coefficients of `L_{n+1}' = (-alpha_n x + beta_n) L_n' - gamma_n L_{n-1}'`.
fn mdl_raw_coeffs(n: usize, tau: Tau) -> (f64, f64, f64) {
    let u = tau.recip();
    let un = tau.recip_pow(n);
    let un1 = un * u;
    let nf = n as f64;
    let ratio = nf / (nf + 1.0);
    let alpha = tau.one_minus_recip() / (nf + 1.0);
    let beta = (un1 + u) / (un1 + 1.0) + ratio * (1.0 + un1) / (1.0 + un);
    let gamma = if n == 0 {
        0.0
    } else {
        // u^{n-1} * u == u^n, so (1 + u^{n-1}) u == u + u^n.
        ratio * (1.0 + un1) * (u + un) / ((1.0 + un) * (1.0 + un))
    };
    (alpha, beta, gamma)
}

/// Evaluate the unnormalized MDL polynomial `L_n'` at `x` (lattice units)
/// by forward recurrence from `L_{-1}' = 0`, `L_0' = 1`.
pub fn mdl_eval(n: usize, x: f64, tau: Tau) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let (alpha, beta, gamma) = mdl_raw_coeffs(m, tau);
        let next = (beta - alpha * x) * cur - gamma * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(alpha_hat_n, beta_hat_n)` of the orthonormal MDL recurrence
/// `x L_n = beta_hat_n L_{n+1} + alpha_hat_n L_n + beta_hat_{n-1} L_{n-1}`
/// in lattice units (multiply by `h` for a measure with spacing `h`).
pub fn normalized_coeffs_tau(n: usize, tau: Tau) -> (f64, f64) {
    let u = tau.recip();
    let un = tau.recip_pow(n);
    let un1 = un * u;
    let un2 = un1 * u;
    let nf = n as f64;
    let inv = 1.0 / tau.one_minus_recip();
    let alpha = ((nf + 1.0) * (un1 + u) / (un1 + 1.0) + nf * (1.0 + un1) / (1.0 + un)) * inv;
    let beta =
        (nf + 1.0) * tau.sqrt_recip() * ((1.0 + un) * (1.0 + un2)).sqrt() / (1.0 + un1) * inv;
    (alpha, beta)
}

/// Normalized recurrence coefficients for a bosonic measure.
///
/// Fermionic measures have no closed form here; build them with
/// [`crate::oracle::stieltjes_coeffs`] instead.
pub fn normalized_coeffs(n: usize, measure: &MeasureSpec) -> Result<(f64, f64)> {
    match measure.flavor() {
        Flavor::Bosonic => Ok(normalized_coeffs_tau(n, measure.tau())),
        other => Err(Error::UnsupportedFlavor(other)),
    }
}

/// `n`-th pivot of the Cholesky factorization `J = L D L^T` of the
/// orthonormal MDL Jacobi matrix, in lattice units.
///
/// Equals `-pi_{n+1}(0)/pi_n(0)` for the monic MDL polynomials, which
/// follows from `L_n'(0)` and the leading coefficient `(1/tau - 1)^n / n!`.
/// The subtraction `alpha_n - beta_{n-1}^2 / d_{n-1}` cancels almost
/// completely when `tau` is large; this form does not.
pub fn mdl_cholesky_pivot(n: usize, tau: Tau) -> f64 {
    let u = tau.recip();
    let un1 = tau.recip_pow(n + 1);
    (n as f64 + 1.0) * (un1 + u) / ((un1 + 1.0) * tau.one_minus_recip())
}

/// Values of the orthonormal MDL polynomials `L_hat_0 .. L_hat_{max_degree}`
/// at `x` (lattice units), using the orthonormal recurrence.
///
/// Signs follow the convention with positive leading coefficients.
pub fn mdl_orthonormal_values(max_degree: usize, x: f64, tau: Tau) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0 / mdl_scalar_props(0, tau).norm_sq.sqrt());
    let mut beta_prev = 0.0;
    for n in 0..max_degree {
        let (alpha, beta) = normalized_coeffs_tau(n, tau);
        let prev = if n == 0 { 0.0 } else { out[n - 1] };
        out.push(((x - alpha) * out[n] - beta_prev * prev) / beta);
        beta_prev = beta;
    }
    out
}

/// Extra degrees the backward sweep in [`mdl_orthonormal_lattice_values`]
/// starts beyond the highest requested degree.
const MILLER_LEAD: usize = 60;

/// `L_hat_0 .. L_hat_{max_degree}` at the lattice point `m`.
///
/// At an atom of the measure, `k -> L_hat_k(m)` is the minimal solution of
/// the recurrence once `k` passes `m`. For large `tau` it decays so fast that
/// forward recurrence (as in [`mdl_orthonormal_values`]) loses every digit.
/// Here the forward values are kept up to their first peak and the tail is
/// taken from Miller's backward recurrence, accepted only if two starting
/// depths agree; otherwise the forward values are returned.
pub fn mdl_orthonormal_lattice_values(max_degree: usize, m: usize, tau: Tau) -> Vec<f64> {
    let x = m as f64;
    let forward = mdl_orthonormal_values(max_degree, x, tau);
    let Some(peak) = (0..max_degree).find(|&k| forward[k + 1].abs() <= forward[k].abs()) else {
        return forward;
    };

    let backward = |start: usize| -> Vec<f64> {
        let coeffs: Vec<(f64, f64)> = (0..=start).map(|n| normalized_coeffs_tau(n, tau)).collect();
        let mut z = vec![0.0; start + 1];
        z[start - 1] = 1.0;
        for k in (peak + 1..start).rev() {
            let (alpha, beta) = coeffs[k];
            z[k - 1] = ((x - alpha) * z[k] - beta * z[k + 1]) / coeffs[k - 1].1;
            if z[k - 1].abs() > 1e150 {
                z[k - 1..].iter_mut().for_each(|v| *v *= 1e-150);
            }
        }
        let scale = forward[peak] / z[peak];
        z.truncate(max_degree + 1);
        z.iter_mut().for_each(|v| *v *= scale);
        z
    };
    let near = backward(max_degree + MILLER_LEAD);
    let far = backward(max_degree + 2 * MILLER_LEAD);
    let converged = near
        .iter()
        .zip(&far)
        .skip(peak)
        .all(|(a, b)| a.is_finite() && (a - b).abs() <= 1e-13 * b.abs());
    if !converged {
        return forward;
    }
    let mut out = forward;
    out[peak + 1..].copy_from_slice(&near[peak + 1..]);
    out
}

/// Normalized three-term recurrence of a discrete measure, scaled to the
/// measure's units: the Jacobi matrix has `diag` on the diagonal and
/// `offdiag` beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Total mass `mu_0` of the measure.
    pub mass: f64,
    /// Pivots of `J = L D L^T` when they are known in closed form.
    pub cholesky_pivots: Option<Vec<f64>>,
}

impl RecurrenceTable {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, mass: f64) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument(
                "recurrence table needs at least one entry".into(),
            ));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "offdiag has {} entries, expected {}",
                offdiag.len(),
                diag.len() - 1
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(Self {
            diag,
            offdiag,
            mass,
            cholesky_pivots: None,
        })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// All entries positive and both sequences strictly increasing.
    pub fn is_positive_increasing(&self) -> bool {
        let positive = self.diag.iter().chain(&self.offdiag).all(|&v| v > 0.0);
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        positive && increasing(&self.diag) && increasing(&self.offdiag)
    }
}

/// Closed-form Jacobi matrix of order `order` for a bosonic measure:
/// `diag[n] = h alpha_hat_n`, `offdiag[n] = h beta_hat_n`.
pub fn build_recurrence_table(order: usize, measure: &MeasureSpec) -> Result<RecurrenceTable> {
    if order == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if measure.flavor() != Flavor::Bosonic {
        return Err(Error::UnsupportedFlavor(measure.flavor()));
    }
    let tau = measure.tau();
    let h = measure.h();
    let mut diag = Vec::with_capacity(order);
    let mut offdiag = Vec::with_capacity(order - 1);
    for n in 0..order {
        let (alpha, beta) = normalized_coeffs_tau(n, tau);
        diag.push(h * alpha);
        if n + 1 < order {
            offdiag.push(h * beta);
        }
    }
    let pivots = (0..order).map(|n| h * mdl_cholesky_pivot(n, tau)).collect();
    let mut table = RecurrenceTable::new(diag, offdiag, measure.mass())?;
    table.cholesky_pivots = Some(pivots);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn dl_degree_zero_is_one() {
        let tau = Tau::new(1.7).unwrap();
        for n in [0, 1, 5, 100] {
            assert_eq!(dl_eval(0, n, tau).unwrap(), 1.0);
        }
    }

    #[test]
    fn dl_at_origin_is_inverse_power() {
        for tau in [1.1, E, E.powi(4)] {
            let t = Tau::new(tau).unwrap();
            for k in 0..=20 {
                assert!(
                    rel(dl_eval(k, 0, t).unwrap(), tau.powi(-(k as i32))) < 1e-13,
                    "k={k} tau={tau}"
                );
            }
        }
    }

    #[test]
    fn dl_first_degree_at_one() {
        let v = dl_eval(1, 1, Tau::new(E).unwrap()).unwrap();
        assert!((v - (1.0 - 2.0 * (1.0 - 1.0 / E))).abs() < 1e-15);
        assert!((v + 0.264_241).abs() < 1e-6);
    }

    #[test]
    fn dl_two_forms_agree_where_both_are_benign() {
        let t = Tau::new(1.5).unwrap();
        for k in 0..12 {
            for n in 0..12 {
                let (a, _) = dl_rising_form(k, n, t.one_minus_recip());
                let (b, _) = dl_falling_form(k, n, t.minus_one());
                let b = b * t.recip_pow(k);
                assert!(
                    (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                    "k={k} n={n}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn dl_rejects_large_degree() {
        assert!(dl_eval(61, 0, Tau::new(2.0).unwrap()).is_err());
    }

    #[test]
    fn scalar_props_at_degree_zero() {
        for tau in [1.01, E, 50.0] {
            let p = mdl_scalar_props(0, Tau::new(tau).unwrap());
            assert_eq!(p.value_at_zero, 1.0);
            assert!(rel(p.norm_sq, (tau + 1.0) / (2.0 * tau - 2.0)) < 1e-14);
        }
    }

    #[test]
    fn scalar_props_at_degree_one() {
        let p = mdl_scalar_props(1, Tau::new(E).unwrap());
        assert!((p.value_at_zero - 2.0 / (1.0 + E)).abs() < 1e-15);
        assert!((p.value_at_zero - 0.537_883).abs() < 1e-6);
        let expected = (1.0 + E * E) / (E * (1.0 + E) * (E - 1.0));
        assert!(rel(p.norm_sq, expected) < 1e-14);
    }

    #[test]
    fn scalar_props_vanish_for_large_degree() {
        let p = mdl_scalar_props(5000, Tau::new(E).unwrap());
        assert_eq!(p.value_at_zero, 0.0);
        assert_eq!(p.norm_sq, 0.0);
        let p = mdl_scalar_props(30, Tau::new(E).unwrap());
        assert!(p.value_at_zero > 0.0 && p.value_at_zero < 1e-12);
    }

    #[test]
    fn mdl_origin_matches_closed_form() {
        for tau in [E.powf(0.1), E, E.powi(4)] {
            let t = Tau::new(tau).unwrap();
            assert_eq!(mdl_eval(0, 3.3, t), 1.0);
            for n in 0..=30 {
                let expected = mdl_scalar_props(n, t).value_at_zero;
                // L_n'(0) is the minimal solution at x = 0, so forward
                // recurrence loses accuracy like eps * tau^n.
                let tol = 64.0 * f64::EPSILON * tau.powi(n as i32) * (n + 1) as f64;
                assert!(
                    rel(mdl_eval(n, 0.0, t), expected) < tol.max(1e-15),
                    "n={n} tau={tau}"
                );
            }
        }
    }

    #[test]
    fn first_coefficients_match_geometric_moments() {
        // alpha_hat_0 = m1 / mu0 for the half-weighted measure at h = s = 1.
        let q = (-1.0f64).exp();
        let mu0 = 1.0 / (1.0 - q) - 0.5;
        let m1 = q / ((1.0 - q) * (1.0 - q));
        let (alpha, beta) = normalized_coeffs_tau(0, Tau::from_hs(1.0).unwrap());
        assert!(rel(alpha, m1 / mu0) < 1e-14);
        assert!((alpha - 0.850_918).abs() < 1e-6);
        let expected_beta = E / (E - 1.0) * (2.0 * (1.0 + E * E) / (E * (1.0 + E).powi(2))).sqrt();
        assert!(rel(beta, expected_beta) < 1e-14);
        let expected_alpha = 2.0 * E / ((E - 1.0) * (1.0 + E));
        assert!(rel(alpha, expected_alpha) < 1e-14);
    }

    #[test]
    fn coefficients_approach_laguerre_recurrence() {
        let s = 1.0;
        let mut prev: Option<f64> = None;
        for h in [0.1, 0.05, 0.025] {
            let m = MeasureSpec::bosonic(h, s).unwrap();
            let mut defect: f64 = 0.0;
            for n in 0..6 {
                let (a, b) = normalized_coeffs(n, &m).unwrap();
                defect = defect.max((h * a - (2 * n + 1) as f64 / s).abs());
                defect = defect.max((h * b - (n + 1) as f64 / s).abs());
            }
            if let Some(p) = prev {
                let ratio = p / defect;
                assert!(ratio > 3.5 && ratio < 4.5, "h={h} ratio={ratio}");
            }
            prev = Some(defect);
        }
    }

    #[test]
    fn fermionic_has_no_closed_form() {
        let m = MeasureSpec::fermionic(1.0, 1.0).unwrap();
        assert_eq!(
            normalized_coeffs(0, &m),
            Err(Error::UnsupportedFlavor(Flavor::Fermionic))
        );
        assert!(build_recurrence_table(3, &m).is_err());
    }

    #[test]
    fn table_at_unit_measure() {
        let m = MeasureSpec::bosonic(1.0, 1.0).unwrap();
        let t = build_recurrence_table(1, &m).unwrap();
        assert!((t.mass - 1.081_977).abs() < 1e-6);
        assert!((t.diag[0] - 0.850_918).abs() < 1e-6);
        assert!(t.offdiag.is_empty());
        assert!(build_recurrence_table(0, &m).is_err());
    }

    #[test]
    fn pivots_reproduce_jacobi_matrix() {
        for hs in [0.05, 1.0, 4.0] {
            let t = Tau::from_hs(hs).unwrap();
            let d: Vec<f64> = (0..12).map(|n| mdl_cholesky_pivot(n, t)).collect();
            for n in 0..12 {
                let (a, b) = normalized_coeffs_tau(n, t);
                // (L D L^T)_{n,n+1} = d_n l_n = beta_n; diagonal = d_n + d_{n-1} l_{n-1}^2.
                let recon = if n == 0 {
                    d[0]
                } else {
                    let (_, bp) = normalized_coeffs_tau(n - 1, t);
                    d[n] + bp * bp / d[n - 1]
                };
                assert!(rel(recon, a) < 1e-12, "hs={hs} n={n}");
                assert!(b > 0.0);
            }
        }
    }

    #[test]
    fn orthonormal_values_match_scaled_raw_polynomials() {
        let t = Tau::new(E).unwrap();
        for x in [0.0, 0.7, 3.0, 11.5] {
            let hat = mdl_orthonormal_values(12, x, t);
            for (n, &v) in hat.iter().enumerate() {
                let scale = mdl_scalar_props(n, t).norm_sq.sqrt();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let raw = sign * mdl_eval(n, x, t) / scale;
                assert!(
                    (v - raw).abs() <= 1e-11 * (1.0 + v.abs()),
                    "n={n} x={x}: {v} vs {raw}"
                );
            }
        }
    }

    #[test]
    fn lattice_values_resolve_the_decaying_tail() {
        let t = Tau::new(E.powi(4)).unwrap();
        let p = mdl_orthonormal_lattice_values(30, 0, t);
        for (n, v) in p.iter().enumerate() {
            let props = mdl_scalar_props(n, t);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let expected = sign * props.value_at_zero / props.norm_sq.sqrt();
            assert!(rel(*v, expected) < 1e-12, "n={n} {v:e} vs {expected:e}");
        }
    }

    #[test]
    fn lattice_values_match_forward_where_it_is_stable() {
        let t = Tau::new(E.powf(0.1)).unwrap();
        for m in [0, 3, 40, 400] {
            let a = mdl_orthonormal_lattice_values(20, m, t);
            let b = mdl_orthonormal_values(20, m as f64, t);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "m={m}");
            }
        }
    }
}
