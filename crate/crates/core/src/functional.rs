//! The steering to joint-measurability map and the two-setting steering objective.
//!
//! Alice measures along `n`; Bob's conditional states, whitened by his reduced
//! state, become the binary unsharp observables
//!
//! ```text
//! O_k = 1/2 ((1 + (-1)^k x) I + (-1)^k g.sigma),   g = U n,  x = V.n
//! ```
//!
//! and the assemblage for two directions is unsteerable iff the pair of
//! observables is jointly measurable.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::CanonicalState;
use crate::tolerance::Tolerances;

/// Value returned by the objective when an observable is sharp (F = 0) yet biased.
pub const DEGENERATE_SENTINEL: f64 = -1e18;

/// Which party measures; the other party's state is steered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Alice measures, Bob is steered.
    AtoB,
    /// Bob measures, Alice is steered.
    BtoA,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::AtoB, Direction::BtoA];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AtoB => "AtoB",
            Direction::BtoA => "BtoA",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AtoB" | "atob" | "a2b" => Ok(Direction::AtoB),
            "BtoA" | "btoa" | "b2a" => Ok(Direction::BtoA),
            _ => Err(Error::Parse(format!("unknown direction `{s}`"))),
        }
    }
}

/// Measurement axis in polar angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementDirection {
    pub alpha: f64,
    pub beta: f64,
}

impl MeasurementDirection {
    pub fn new(alpha: f64, beta: f64) -> Self {
        MeasurementDirection { alpha, beta }
    }

    pub const X: MeasurementDirection = MeasurementDirection {
        alpha: std::f64::consts::FRAC_PI_2,
        beta: 0.0,
    };
    pub const Y: MeasurementDirection = MeasurementDirection {
        alpha: std::f64::consts::FRAC_PI_2,
        beta: std::f64::consts::FRAC_PI_2,
    };
    pub const Z: MeasurementDirection = MeasurementDirection {
        alpha: 0.0,
        beta: 0.0,
    };

    pub fn unit(&self) -> Vector3<f64> {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        Vector3::new(sa * cb, sa * sb, ca)
    }

    /// Polar angles of a (not necessarily normalized) vector, alpha in [0, pi], beta in [0, 2 pi).
    pub fn from_vector(n: &Vector3<f64>) -> Self {
        let r = n.norm();
        let alpha = (n.z / r).clamp(-1.0, 1.0).acos();
        let mut beta = n.y.atan2(n.x);
        if beta < 0.0 {
            beta += 2.0 * std::f64::consts::PI;
        }
        if beta >= 2.0 * std::f64::consts::PI {
            beta = 0.0;
        }
        MeasurementDirection { alpha, beta }
    }
}

/// U and V of the whitened assemblage for one steering direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMap {
    pub u: Matrix3<f64>,
    pub v: Vector3<f64>,
    pub direction: Direction,
    pub source: CanonicalState,
}

/// General form of the map. `k` takes Alice's direction to the correlated part of
/// Bob's conditional Bloch vector (`T^T` in Pauli coordinates).
fn map_parts(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    k: &Matrix3<f64>,
    tol: &Tolerances,
) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    let b2 = b.norm_squared();
    let one_minus = 1.0 - b2;
    if !(one_minus >= tol.inv_eps) {
        return Err(Error::SteeredStateSingular {
            one_minus_b2: one_minus,
        });
    }
    let s = one_minus.sqrt();
    // (-1 + s) / (|b|^2 (|b|^2 - 1)) rewritten as 1 / ((1 + s)(1 - |b|^2)), finite at b = 0
    let u = -(b * a.transpose()) / one_minus
        + (b * b.transpose() * k) / ((1.0 + s) * one_minus)
        + k / s;
    let v = (a - k.transpose() * b) / one_minus;
    Ok((u, v))
}

/// Build U and V for the given direction; BtoA exchanges the parties first.
pub fn compute_map(
    state: &CanonicalState,
    direction: Direction,
    tol: &Tolerances,
) -> Result<SteeringMap> {
    let view = match direction {
        Direction::AtoB => *state,
        Direction::BtoA => state.swapped(),
    };
    let k = Matrix3::from_diagonal(&view.c);
    let (u, v) = map_parts(&view.a, &view.b, &k, tol)?;
    Ok(SteeringMap {
        u,
        v,
        direction,
        source: *state,
    })
}

/// Bias `x` and vector `g` of one binary unsharp observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblageObservable {
    pub x: f64,
    pub g: Vector3<f64>,
}

impl AssemblageObservable {
    pub fn new(x: f64, g: Vector3<f64>) -> Self {
        AssemblageObservable { x, g }
    }

    /// |g| - (1 - |x|); positive values mean one POVM effect is not positive.
    pub fn positivity_excess(&self) -> f64 {
        self.g.norm() - (1.0 - self.x.abs())
    }
}

pub fn assemblage(
    map: &SteeringMap,
    n: &MeasurementDirection,
    tol: &Tolerances,
) -> Result<AssemblageObservable> {
    let unit = n.unit();
    let obs = AssemblageObservable::new(map.v.dot(&unit), map.u * unit);
    let excess = obs.positivity_excess();
    if excess > tol.positivity {
        return Err(Error::UnphysicalAssemblage { excess });
    }
    Ok(obs)
}

/// F = 1/2 (sqrt((1+x)^2 - g^2) + sqrt((1-x)^2 - g^2)).
pub fn unsharp_f(x: f64, g_norm: f64, tol: &Tolerances) -> Result<f64> {
    let g2 = g_norm * g_norm;
    let plus = tol.sqrt_clamped((1.0 + x) * (1.0 + x) - g2)?;
    let minus = tol.sqrt_clamped((1.0 - x) * (1.0 - x) - g2)?;
    Ok(0.5 * (plus + minus))
}

/// F with both radicands clamped at zero. Used on the hot path where the
/// inputs come from a validated map.
#[inline]
fn unsharp_f_clamped(x: f64, g2: f64) -> f64 {
    let plus = ((1.0 + x) * (1.0 + x) - g2).max(0.0).sqrt();
    let minus = ((1.0 - x) * (1.0 - x) - g2).max(0.0).sqrt();
    0.5 * (plus + minus)
}

/// Precomputed per-observable quantities entering the criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ObservableTerms {
    pub x: f64,
    pub g: Vector3<f64>,
    pub f2: f64,
    /// x^2 / F^2, or `None` when F vanishes while x does not.
    pub ratio: Option<f64>,
}

#[inline]
pub(crate) fn observable_terms(x: f64, g: Vector3<f64>, tol: &Tolerances) -> ObservableTerms {
    let f = unsharp_f_clamped(x, g.norm_squared());
    let ratio = if f < tol.ratio_eps {
        if x.abs() < tol.ratio_eps {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some(x * x / (f * f))
    };
    ObservableTerms {
        x,
        g,
        f2: f * f,
        ratio,
    }
}

/// S1 - S2 for two precomputed observables, or the sentinel on the degenerate branch.
#[inline]
pub(crate) fn criterion(o0: &ObservableTerms, o1: &ObservableTerms) -> f64 {
    match (o0.ratio, o1.ratio) {
        (Some(r0), Some(r1)) => {
            let s1 = (1.0 - o0.f2 - o1.f2) * (1.0 - r0 - r1);
            let overlap = o0.g.dot(&o1.g) - o0.x * o1.x;
            s1 - overlap * overlap
        }
        _ => DEGENERATE_SENTINEL,
    }
}

/// The two terms S1 and S2 of the joint-measurability criterion.
pub fn objective_parts(
    o0: &AssemblageObservable,
    o1: &AssemblageObservable,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let t0 = observable_terms(o0.x, o0.g, tol);
    let t1 = observable_terms(o1.x, o1.g, tol);
    match (t0.ratio, t1.ratio) {
        (Some(r0), Some(r1)) => {
            let s1 = (1.0 - t0.f2 - t1.f2) * (1.0 - r0 - r1);
            let overlap = o0.g.dot(&o1.g) - o0.x * o1.x;
            Ok((s1, overlap * overlap))
        }
        _ => Err(Error::SharpBiasedDegenerate),
    }
}

/// S1 - S2 at a pair of measurement directions.
///
/// A sharp observable with nonzero bias drives the objective to minus infinity;
/// that branch returns [`DEGENERATE_SENTINEL`].
pub fn steering_objective(
    map: &SteeringMap,
    n0: &MeasurementDirection,
    n1: &MeasurementDirection,
    tol: &Tolerances,
) -> f64 {
    let e0 = n0.unit();
    let e1 = n1.unit();
    let t0 = observable_terms(map.v.dot(&e0), map.u * e0, tol);
    let t1 = observable_terms(map.v.dot(&e1), map.u * e1, tol);
    criterion(&t0, &t1)
}

/// Joint measurability of two binary unsharp observables.
pub fn is_jointly_measurable(
    o0: &AssemblageObservable,
    o1: &AssemblageObservable,
    tol: &Tolerances,
) -> bool {
    let t0 = observable_terms(o0.x, o0.g, tol);
    let t1 = observable_terms(o1.x, o1.g, tol);
    criterion(&t0, &t1) <= tol.joint_measurability
}
