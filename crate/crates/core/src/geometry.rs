//! Steering radius from local hidden-state models, and steering-ellipsoid
//! center and volume for canonical X-states.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::analytic::{check_steered, oriented};
use crate::error::{Error, Result};
use crate::functional::Direction;
use crate::optimizer::{minimize_max, OptimizerConfig};
use crate::qstate::XStateParams;
use crate::tolerance::Tolerances;

/// Free parameters (z1, z3, Z) of the hidden-state construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSearchPoint {
    pub z1: f64,
    pub z3: f64,
    #[serde(rename = "Z")]
    pub zz: f64,
}

impl RadiusSearchPoint {
    pub fn new(z1: f64, z3: f64, zz: f64) -> Self {
        RadiusSearchPoint { z1, z3, zz }
    }
}

/// Which pair of Pauli axes the measuring party uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisPair {
    Xy,
    Xz,
    Yz,
}

/// Weight and Bloch vector of hidden state (mu, v) for measurements along
/// `pair` (xz or yz). `p` is taken as seen by the measuring party.
pub fn hidden_state_bloch(
    p: &XStateParams,
    pt: &RadiusSearchPoint,
    pair: AxisPair,
    mu: f64,
    v: f64,
    tol: &Tolerances,
) -> Result<(f64, Vector3<f64>)> {
    let c = match pair {
        AxisPair::Xz => p.c1,
        AxisPair::Yz => p.c2,
        AxisPair::Xy => {
            return Err(Error::InvalidConfig(
                "hidden states are parametrized for the xz and yz pairs only".into(),
            ))
        }
    };
    let den = 1.0 + mu * p.a3 + v * (p.b3 * pt.z3 + pt.zz);
    if !(den > tol.weight_eps) {
        return Err(Error::DegenerateWeight { denominator: den });
    }
    let s = tol.sqrt_clamped(1.0 - p.b3 * p.b3)?;
    let m_t = mu * v * (c + mu * s * pt.z1);
    let m_z = p.b3 + mu * p.c3 + v * (pt.z3 + p.b3 * pt.zz);
    let bloch = match pair {
        AxisPair::Xz => Vector3::new(m_t, 0.0, m_z),
        _ => Vector3::new(0.0, m_t, m_z),
    } / den;
    Ok((den / 4.0, bloch))
}

const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Hidden-state Bloch norms for the four (mu, v); NaN where a weight vanishes.
fn branch_norms(p: &XStateParams, c: f64, s: f64, z: &[f64; 3], weight_eps: f64) -> [f64; 4] {
    let mut out = [f64::NAN; 4];
    for (k, &(mu, v)) in SIGNS.iter().enumerate() {
        let den = 1.0 + mu * p.a3 + v * (p.b3 * z[1] + z[2]);
        if den > weight_eps {
            let m_t = c + mu * s * z[0];
            let m_z = p.b3 + mu * p.c3 + v * (z[1] + p.b3 * z[2]);
            out[k] = ((m_t * m_t + m_z * m_z) / (den * den)).sqrt();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub radius: f64,
    pub branch: AxisPair,
    /// Optimal (z1, z3, Z) of the winning branch; absent for xy.
    pub point: Option<RadiusSearchPoint>,
    /// (r_xy, r_xz, r_yz).
    pub per_branch: [f64; 3],
}

/// Steering radius as the largest of the three axis-pair radii.
///
/// The construction is exact for zero-states; for other states it is the
/// radius restricted to axis-pair measurements.
pub fn steering_radius(
    p: &XStateParams,
    direction: Direction,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<RadiusResult> {
    let q = oriented(p, direction);
    let one_minus = check_steered(q.b3, tol)?;
    let s = one_minus.sqrt();
    let r_xy = (q.c1 * q.c1 + q.c2 * q.c2 + q.b3 * q.b3).sqrt();
    let eps = tol.weight_eps;
    let xz = minimize_max(|z| branch_norms(&q, q.c1, s, z, eps), cfg, 2.0)?;
    let yz = minimize_max(|z| branch_norms(&q, q.c2, s, z, eps), cfg, 2.0)?;
    let per_branch = [r_xy, xz.value, yz.value];

    let mut best = 0;
    for k in 1..3 {
        if per_branch[k] > per_branch[best] {
            best = k;
        }
    }
    let to_point = |z: [f64; 3]| Some(RadiusSearchPoint::new(z[0], z[1], z[2]));
    let (branch, point) = match best {
        0 => (AxisPair::Xy, None),
        1 => (AxisPair::Xz, to_point(xz.point)),
        _ => (AxisPair::Yz, to_point(yz.point)),
    };
    Ok(RadiusResult {
        radius: per_branch[best],
        branch,
        point,
        per_branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidResult {
    pub center_z: f64,
    /// Volume, with the Bloch ball at 4 pi / 3.
    pub volume: f64,
}

/// Ellipsoid of the steered party's conditional states. AtoB gives Bob's
/// ellipsoid (Alice measures), BtoA gives Alice's.
pub fn steering_ellipsoid(
    p: &XStateParams,
    direction: Direction,
    tol: &Tolerances,
) -> Result<EllipsoidResult> {
    let (measuring, steered) = match direction {
        Direction::AtoB => (p.a3, p.b3),
        Direction::BtoA => (p.b3, p.a3),
    };
    let one_minus = check_steered(measuring, tol)?;
    Ok(EllipsoidResult {
        center_z: (steered - measuring * p.c3) / one_minus,
        volume: 4.0 * PI / 3.0 * (p.c1 * p.c2 * (p.c3 - p.a3 * p.b3)).abs()
            / (one_minus * one_minus),
    })
}
