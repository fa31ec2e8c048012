//! The discrete exponential measure behind every rule in this crate.
//!
//! A [`MeasureSpec`] places atoms on an evenly spaced lattice with
//! exponentially decaying masses:
//!
//! * bosonic: atoms at `n h` with mass `e^{-n h s} h`, except the `n = 0`
//!   atom which carries half that mass;
//! * fermionic: atoms at `(n + 1/2) h` with mass `e^{-(n + 1/2) h s} h`.
//!
//! Everything that only depends on the dimensionless product `h s` goes
//! through [`Tau`], which caches `u = 1/tau = e^{-hs}` and `1 - u` in a form
//! that stays accurate both when `hs` is tiny and when `tau^n` would
//! overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which lattice and end-point weighting the measure uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Nodes `n h`, half weight on `n = 0`.
    Bosonic,
    /// Nodes `(n + 1/2) h`, no half weight.
    Fermionic,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Bosonic => "bosonic",
            Flavor::Fermionic => "fermionic",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bosonic" => Ok(Flavor::Bosonic),
            "fermionic" => Ok(Flavor::Fermionic),
            other => Err(Error::InvalidArgument(format!("unknown flavor `{other}`"))),
        }
    }
}

/// Lattice spacing, decay rate and flavor of a discrete exponential measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    h: f64,
    s: f64,
    flavor: Flavor,
}

impl MeasureSpec {
    pub fn new(h: f64, s: f64, flavor: Flavor) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing h must be positive and finite, got {h}"
            )));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "decay rate s must be positive and finite, got {s}"
            )));
        }
        Ok(Self { h, s, flavor })
    }

    pub fn bosonic(h: f64, s: f64) -> Result<Self> {
        Self::new(h, s, Flavor::Bosonic)
    }

    pub fn fermionic(h: f64, s: f64) -> Result<Self> {
        Self::new(h, s, Flavor::Fermionic)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// The dimensionless decay per lattice step, `hs = ln(tau)`.
    pub fn hs(&self) -> f64 {
        self.h * self.s
    }

    pub fn tau(&self) -> Tau {
        Tau::from_hs(self.hs()).expect("validated measure has hs > 0")
    }

    /// Same lattice and flavor, different decay rate.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(self.h, s, self.flavor)
    }

    /// Location of the `n`-th atom.
    pub fn node(&self, n: usize) -> f64 {
        match self.flavor {
            Flavor::Bosonic => n as f64 * self.h,
            Flavor::Fermionic => (n as f64 + 0.5) * self.h,
        }
    }

    /// Weight multiplying `F(node(n))` in the lattice sum: `h`, or `h/2` for
    /// the bosonic origin.
    pub fn lattice_weight(&self, n: usize) -> f64 {
        match (self.flavor, n) {
            (Flavor::Bosonic, 0) => 0.5 * self.h,
            _ => self.h,
        }
    }

    /// Mass of the `n`-th atom, `lattice_weight(n) * e^{-s node(n)}`.
    pub fn atom_mass(&self, n: usize) -> f64 {
        self.lattice_weight(n) * (-self.s * self.node(n)).exp()
    }

    /// Total mass of the measure (zeroth moment).
    ///
    /// bosonic: `h (1/(1 - e^{-hs}) - 1/2)`, fermionic: `h e^{-hs/2} / (1 - e^{-hs})`.
    pub fn mass(&self) -> f64 {
        let one_minus_u = -(-self.hs()).exp_m1();
        match self.flavor {
            Flavor::Bosonic => self.h * (1.0 / one_minus_u - 0.5),
            Flavor::Fermionic => self.h * (-0.5 * self.hs()).exp() / one_minus_u,
        }
    }
}

/// The per-step decay factor `tau = e^{hs} > 1`.
///
/// Stores the reciprocal `u = 1/tau`, `sqrt(u)` and `1 - u` rather than `tau`
/// itself, so every ratio built from it can be written in powers of `u`,
/// which never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau {
    tau: f64,
    tau_minus_one: f64,
    u: f64,
    sqrt_u: f64,
    one_minus_u: f64,
}

impl Tau {
    /// Construct from `tau` directly. Rejects `tau <= 1` and non-finite values.
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be finite and > 1, got {tau}"
            )));
        }
        let u = 1.0 / tau;
        // tau - 1 is exact for tau in (1, 2] (Sterbenz), so this keeps full
        // relative precision near the Laguerre limit.
        let one_minus_u = (tau - 1.0) / tau;
        Ok(Self {
            tau,
            tau_minus_one: tau - 1.0,
            u,
            sqrt_u: u.sqrt(),
            one_minus_u,
        })
    }

    /// Construct from `hs = ln(tau) > 0`, evaluating `1 - e^{-hs}` with `expm1`.
    pub fn from_hs(hs: f64) -> Result<Self> {
        if !(hs.is_finite() && hs > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hs must be finite and > 0, got {hs}"
            )));
        }
        Ok(Self {
            tau: hs.exp(),
            tau_minus_one: hs.exp_m1(),
            u: (-hs).exp(),
            sqrt_u: (-0.5 * hs).exp(),
            one_minus_u: -(-hs).exp_m1(),
        })
    }

    /// `tau` itself; `+inf` once `hs` exceeds the double range.
    pub fn value(&self) -> f64 {
        self.tau
    }

    /// `tau - 1`.
    pub fn minus_one(&self) -> f64 {
        self.tau_minus_one
    }

    /// `u = 1/tau`.
    pub fn recip(&self) -> f64 {
        self.u
    }

    pub fn sqrt_recip(&self) -> f64 {
        self.sqrt_u
    }

    /// `1 - 1/tau`.
    pub fn one_minus_recip(&self) -> f64 {
        self.one_minus_u
    }

    /// `tau^{-n}`.
    pub fn recip_pow(&self, n: usize) -> f64 {
        pow_usize(self.u, n)
    }
}

fn pow_usize(base: f64, n: usize) -> f64 {
    if n <= i32::MAX as usize {
        base.powi(n as i32)
    } else {
        base.powf(n as f64)
    }
}
