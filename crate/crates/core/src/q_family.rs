//! The six closed-form solutions of `Q''Q − Q'² = Q⁴` used to build Bonnet
//! surfaces, together with their analytic derivatives, the first-integral
//! constant κ, the function `C = (1/Q)'`, and an independent RK4 integrator.
//!
//! Each family is `Q(s) = sign · g(s)` with `g` one of `1/s`, `a/sin(as)`,
//! `a/sinh(as)`; `sign = −1` selects the mirrored `s < 0` column, on which
//! `Q₋(s) = Q₊(−s)` and `Q` stays positive.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{rk4_step, step_count};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QKind {
    Rational,
    Trig,
    Hyper,
}

/// One row-and-column entry of the Q table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilySpec", into = "FamilySpec")]
pub struct QFamily {
    kind: QKind,
    sign: i8,
    a: f64,
}

/// Config representation: `{ "kind": "rational|trig|hyper", "sign": 1|-1, "a": <real> }`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: QKind,
    pub sign: i8,
    #[serde(default = "one")]
    pub a: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<FamilySpec> for QFamily {
    type Error = Error;
    fn try_from(f: FamilySpec) -> Result<Self> {
        QFamily::new(f.kind, f.sign, f.a)
    }
}

impl From<QFamily> for FamilySpec {
    fn from(f: QFamily) -> Self {
        FamilySpec {
            kind: f.kind,
            sign: f.sign,
            a: f.a,
        }
    }
}

impl fmt::Display for QFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign > 0 { "+" } else { "-" };
        match self.kind {
            QKind::Rational => write!(f, "rational{sign}"),
            QKind::Trig => write!(f, "trig{sign}(a={})", self.a),
            QKind::Hyper => write!(f, "hyper{sign}(a={})", self.a),
        }
    }
}

/// Analytic `(Q, Q', Q'')` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDerivatives {
    pub q: f64,
    pub qp: f64,
    pub qpp: f64,
}

impl QFamily {
    pub fn new(kind: QKind, sign: i8, a: f64) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParameter(format!("sign must be 1 or -1, got {sign}")));
        }
        let a = match kind {
            QKind::Rational => 1.0,
            _ if a.is_finite() && a > 0.0 => a,
            _ => return Err(Error::InvalidParameter(format!("a must be positive, got {a}"))),
        };
        Ok(Self { kind, sign, a })
    }

    pub fn rational(sign: i8) -> Self {
        Self::new(QKind::Rational, sign, 1.0).expect("valid sign")
    }

    pub fn trig(sign: i8, a: f64) -> Result<Self> {
        Self::new(QKind::Trig, sign, a)
    }

    pub fn hyper(sign: i8, a: f64) -> Result<Self> {
        Self::new(QKind::Hyper, sign, a)
    }

    /// All six table entries for a given `a`.
    pub fn table(a: f64) -> Result<Vec<QFamily>> {
        let mut out = Vec::with_capacity(6);
        for kind in [QKind::Rational, QKind::Trig, QKind::Hyper] {
            for sign in [1, -1] {
                out.push(Self::new(kind, sign, a)?);
            }
        }
        Ok(out)
    }

    pub fn kind(&self) -> QKind {
        self.kind
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// The same kind and `a` on the opposite side of `s = 0`.
    pub fn mirrored(&self) -> QFamily {
        Self {
            sign: -self.sign,
            ..*self
        }
    }

    /// Open natural domain `(lo, hi)`.
    pub fn domain(&self) -> (f64, f64) {
        let pos = match self.kind {
            QKind::Rational | QKind::Hyper => (0.0, f64::INFINITY),
            QKind::Trig => (0.0, PI / self.a),
        };
        if self.sign > 0 {
            pos
        } else {
            (-pos.1, -pos.0)
        }
    }

    /// Length scale used for the default guard: the domain length for the
    /// bounded trig branch, `1/a` (or 1) for the half-lines.
    pub fn characteristic_length(&self) -> f64 {
        match self.kind {
            QKind::Rational => 1.0,
            QKind::Trig => PI / self.a,
            QKind::Hyper => 1.0 / self.a,
        }
    }

    pub fn guard(&self) -> SingularityGuard {
        SingularityGuard::default_for(*self)
    }

    /// Q formula as text (for listings).
    pub fn formula(&self) -> &'static str {
        match (self.kind, self.sign > 0) {
            (QKind::Rational, true) => "1/s",
            (QKind::Rational, false) => "-1/s",
            (QKind::Trig, true) => "a/sin(a s)",
            (QKind::Trig, false) => "-a/sin(a s)",
            (QKind::Hyper, true) => "a/sinh(a s)",
            (QKind::Hyper, false) => "-a/sinh(a s)",
        }
    }

    /// `(Q, Q', Q'')` with no domain check.
    pub(crate) fn raw(&self, s: f64) -> QDerivatives {
        let a = self.a;
        let (g, gp, gpp) = match self.kind {
            QKind::Rational => (1.0 / s, -1.0 / (s * s), 2.0 / (s * s * s)),
            QKind::Trig => {
                let csc = 1.0 / (a * s).sin();
                let cot = (a * s).cos() * csc;
                (a * csc, -a * a * csc * cot, a * a * a * csc * (cot * cot + csc * csc))
            }
            QKind::Hyper => {
                let csch = 1.0 / (a * s).sinh();
                let coth = (a * s).cosh() * csch;
                (
                    a * csch,
                    -a * a * csch * coth,
                    a * a * a * csch * (coth * coth + csch * csch),
                )
            }
        };
        let sg = self.sign as f64;
        QDerivatives {
            q: sg * g,
            qp: sg * gp,
            qpp: sg * gpp,
        }
    }

    /// `(C, C')` with `C = (1/Q)'`, no domain check.
    pub(crate) fn raw_c(&self, s: f64) -> (f64, f64) {
        let a = self.a;
        let sg = self.sign as f64;
        match self.kind {
            QKind::Rational => (sg, 0.0),
            QKind::Trig => (sg * (a * s).cos(), -sg * a * (a * s).sin()),
            QKind::Hyper => (sg * (a * s).cosh(), sg * a * (a * s).sinh()),
        }
    }

    pub fn q(&self, s: f64) -> Result<f64> {
        self.guard().check(s)?;
        Ok(self.raw(s).q)
    }

    pub fn derivatives(&self, s: f64) -> Result<QDerivatives> {
        self.guard().check(s)?;
        Ok(self.raw(s))
    }

    /// `Q''Q − Q'² − Q⁴` from the analytic derivatives.
    pub fn q_ode_residual(&self, s: f64) -> Result<f64> {
        let d = self.derivatives(s)?;
        Ok(d.qpp * d.q - d.qp * d.qp - d.q.powi(4))
    }

    /// κ in `Q'² = Q⁴ + κQ²`: 0, −a², +a² for rational, trig, hyper.
    ///
    /// The value is checked against the closed form at 128 guarded samples.
    pub fn kappa(&self) -> Result<f64> {
        let kappa = match self.kind {
            QKind::Rational => 0.0,
            QKind::Trig => -self.a * self.a,
            QKind::Hyper => self.a * self.a,
        };
        let (lo, hi) = self.guard().sample_interval();
        let n = 128;
        for k in 0..n {
            let s = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let d = self.raw(s);
            let q2 = d.q * d.q;
            let r = d.qp * d.qp - q2 * q2 - kappa * q2;
            let scale = (q2 * q2).max(kappa.abs() * q2).max(d.qp * d.qp).max(1e-300);
            if r.abs() > 1e-10 * scale {
                return Err(Error::Consistency(format!(
                    "first integral violated for {self} at s = {s}: residual {r:e}"
                )));
            }
        }
        Ok(kappa)
    }

    /// `C = (1/Q)'`.
    pub fn c(&self, s: f64) -> Result<f64> {
        self.guard().check(s)?;
        Ok(self.raw_c(s).0)
    }

    /// `C' − Q(C² − 1)`.
    pub fn c_ode_residual(&self, s: f64) -> Result<f64> {
        self.guard().check(s)?;
        let (c, cp) = self.raw_c(s);
        Ok(cp - self.raw(s).q * (c * c - 1.0))
    }
}

/// Keeps sample points a fixed distance away from the poles of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityGuard {
    family: QFamily,
    margin: f64,
}

impl SingularityGuard {
    pub const DEFAULT_RELATIVE_MARGIN: f64 = 1e-3;

    pub fn new(family: QFamily, margin: f64) -> Result<Self> {
        if !(margin > 0.0) || !margin.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "guard margin must be positive, got {margin}"
            )));
        }
        let (lo, hi) = family.domain();
        if hi - lo <= 2.0 * margin {
            return Err(Error::InvalidParameter(format!(
                "guard margin {margin} leaves no room in the domain of {family}"
            )));
        }
        Ok(Self { family, margin })
    }

    pub fn default_for(family: QFamily) -> Self {
        Self {
            family,
            margin: Self::DEFAULT_RELATIVE_MARGIN * family.characteristic_length(),
        }
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Closed guarded interval (may be unbounded on one side).
    pub fn interval(&self) -> (f64, f64) {
        let (lo, hi) = self.family.domain();
        (lo + self.margin, hi - self.margin)
    }

    /// A bounded sub-interval for sweeps: half-lines are cut at 10 length units.
    pub fn sample_interval(&self) -> (f64, f64) {
        let (lo, hi) = self.interval();
        let l = 10.0 * self.family.characteristic_length();
        if self.family.sign > 0 {
            (lo, hi.min(lo + l))
        } else {
            (lo.max(hi - l), hi)
        }
    }

    /// Accepts points inside the guarded interval, with a rounding slack of
    /// `1e-12` length units.
    pub fn check(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.interval();
        let slack = 1e-12 * self.family.characteristic_length();
        let (lo, hi) = (lo - slack, hi + slack);
        if !s.is_finite() || s < lo {
            return Err(Error::Domain {
                family: self.family.to_string(),
                s,
                endpoint: "lower",
            });
        }
        if s > hi {
            return Err(Error::Domain {
                family: self.family.to_string(),
                s,
                endpoint: "upper",
            });
        }
        Ok(())
    }

    pub fn check_interval(&self, s0: f64, s1: f64) -> Result<()> {
        self.check(s0.min(s1))?;
        self.check(s0.max(s1))
    }
}

/// Samples produced by [`integrate_q_ode`].
#[derive(Debug, Clone, PartialEq)]
pub struct QTrajectory {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub qp: Vec<f64>,
    /// The blow-up guard stopped integration before `s1`.
    pub truncated: bool,
}

/// Blow-up guard for [`integrate_q_ode`].
pub const Q_BLOW_UP: f64 = 1e6;

/// Integrates `Q'' = 2Q³ + κQ` with `κ = q0p²/q0² − q0²` from `(s0, q0, q0p)`
/// towards `s1` using classical RK4.
pub fn integrate_q_ode(q0: f64, q0p: f64, s0: f64, s1: f64, step: f64) -> Result<QTrajectory> {
    if !(q0 > 0.0) {
        return Err(Error::InvalidParameter(format!("q0 must be positive, got {q0}")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if ![q0p, s0, s1].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite initial data".into()));
    }
    let kappa = q0p * q0p / (q0 * q0) - q0 * q0;
    let rhs = |_s: f64, y: &[f64; 2]| [y[1], 2.0 * y[0].powi(3) + kappa * y[0]];

    let n = step_count(s1 - s0, step);
    let h = (s1 - s0) / n as f64;
    let mut traj = QTrajectory {
        s: vec![s0],
        q: vec![q0],
        qp: vec![q0p],
        truncated: false,
    };
    let mut y = [q0, q0p];
    for k in 0..n {
        let s = s0 + k as f64 * h;
        y = rk4_step(&rhs, s, &y, h);
        // a positive solution can only leave through a pole; RK4 may jump
        // across it, so a sign change or a huge slope also counts
        if !(y[0] > 0.0 && y[0] <= Q_BLOW_UP && y[1].abs() <= Q_BLOW_UP * Q_BLOW_UP) {
            traj.truncated = true;
            break;
        }
        traj.s.push(if k + 1 == n { s1 } else { s + h });
        traj.q.push(y[0]);
        traj.qp.push(y[1]);
    }
    Ok(traj)
}
