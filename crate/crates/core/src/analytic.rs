//! Closed-form steerability of canonical X-states and of the named families.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bell::bell_diagonal_steerability;
use crate::error::{Error, Result};
use crate::family::{Family, FamilySpec};
use crate::functional::Direction;
use crate::optimizer::{maximize_canonical, Method, OptimizerConfig, SteeringResult};
use crate::qstate::{CanonicalState, XStateParams};
use crate::tolerance::Tolerances;

/// Diagonal of U and the z-component of V for a canonical X-state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XDerived {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub t3: f64,
}

/// X-state parameters as seen by the measuring party: BtoA exchanges a3 and b3.
pub fn oriented(p: &XStateParams, direction: Direction) -> XStateParams {
    match direction {
        Direction::AtoB => *p,
        Direction::BtoA => p.swapped(),
    }
}

pub(crate) fn check_steered(b3: f64, tol: &Tolerances) -> Result<f64> {
    let one_minus = 1.0 - b3 * b3;
    if !(one_minus >= tol.inv_eps) {
        return Err(Error::SteeredStateSingular {
            one_minus_b2: one_minus,
        });
    }
    Ok(one_minus)
}

pub fn x_derived(p: &XStateParams, direction: Direction, tol: &Tolerances) -> Result<XDerived> {
    let q = oriented(p, direction);
    let one_minus = check_steered(q.b3, tol)?;
    let s = one_minus.sqrt();
    Ok(XDerived {
        u1: q.c1 / s,
        u2: q.c2 / s,
        u3: (q.c3 - q.a3 * q.b3) / one_minus,
        t3: (q.a3 - q.b3 * q.c3) / one_minus,
    })
}

/// (Delta1, Delta2, Delta3): the objective at the xy, xz and yz axis pairs.
pub fn delta_values(d: &XDerived, tol: &Tolerances) -> Result<[f64; 3]> {
    let XDerived { u1, u2, u3, t3 } = *d;
    let radicand = ((1.0 - t3).powi(2) - u3 * u3) * ((1.0 + t3).powi(2) - u3 * u3);
    let root = tol.sqrt_clamped(radicand)?;
    let side = |u: f64| {
        let u2 = u * u;
        0.5 * (u2 * (u3 * u3 - t3 * t3) + u2 + u3 * u3 + t3 * t3 - 1.0 - (1.0 - u2) * root)
    };
    Ok([u1 * u1 + u2 * u2 - 1.0, side(u1), side(u2)])
}

/// Measurement angles (alpha0, beta0, alpha1, beta1) of the xy, xz and yz pairs.
pub const AXIS_PAIR_ANGLES: [[f64; 4]; 3] = [
    [FRAC_PI_2, 0.0, FRAC_PI_2, FRAC_PI_2],
    [FRAC_PI_2, 0.0, 0.0, 0.0],
    [FRAC_PI_2, FRAC_PI_2, 0.0, 0.0],
];

/// Index of the largest value; the earliest wins ties.
fn argmax(values: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

/// Steerability of a canonical X-state from the closed form.
///
/// Exact for zero-states; a lower bound otherwise.
pub fn steerability_x_analytic(
    p: &XStateParams,
    direction: Direction,
    tol: &Tolerances,
) -> Result<SteeringResult> {
    let d = x_derived(p, direction, tol)?;
    let deltas = delta_values(&d, tol)?;
    let k = argmax(&deltas);
    Ok(SteeringResult {
        s: tol.clamp_steerability(deltas[k]),
        direction,
        angles: AXIS_PAIR_ANGLES[k],
        method: Method::AnalyticXstate,
        deltas: Some(deltas),
        objective_at_opt: deltas[k],
    })
}

/// Canonical state with identity frames for X-state parameters.
pub fn x_canonical(p: &XStateParams) -> CanonicalState {
    CanonicalState {
        a: Vector3::new(0.0, 0.0, p.a3),
        b: Vector3::new(0.0, 0.0, p.b3),
        c: Vector3::new(p.c1, p.c2, p.c3),
        rot_a: Matrix3::identity(),
        rot_b: Matrix3::identity(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroVerdict {
    CertifiedT3Zero,
    NumericallyConsistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroStateClass {
    pub verdict: ZeroVerdict,
    /// |analytic - numeric|; `None` when certified without running the optimizer.
    pub gap: Option<f64>,
    pub analytic: SteeringResult,
    pub numeric: Option<SteeringResult>,
}

/// Decide whether the closed form can be trusted for this X-state.
pub fn classify_zero_state(
    p: &XStateParams,
    direction: Direction,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<ZeroStateClass> {
    let d = x_derived(p, direction, tol)?;
    let analytic = steerability_x_analytic(p, direction, tol)?;
    if d.t3.abs() <= tol.t3_zero {
        return Ok(ZeroStateClass {
            verdict: ZeroVerdict::CertifiedT3Zero,
            gap: None,
            analytic,
            numeric: None,
        });
    }
    let numeric = maximize_canonical(&x_canonical(p), direction, cfg, tol)?;
    let gap = (analytic.s - numeric.s).abs();
    let verdict = if gap <= tol.zero_gap {
        ZeroVerdict::NumericallyConsistent
    } else {
        ZeroVerdict::Inconsistent
    };
    Ok(ZeroStateClass {
        verdict,
        gap: Some(gap),
        analytic,
        numeric: Some(numeric),
    })
}

/// Closed-form steerability of a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyClosedForm {
    pub s: f64,
    pub steerable: bool,
    /// Which inequality decides steerability.
    pub threshold_expr: &'static str,
}

fn max0(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

pub fn family_steerability(
    spec: &FamilySpec,
    direction: Direction,
    tol: &Tolerances,
) -> Result<FamilyClosedForm> {
    let family = Family::from_spec(spec)?;
    family_closed_form(&family, direction, tol)
}

pub fn family_closed_form(
    family: &Family,
    direction: Direction,
    tol: &Tolerances,
) -> Result<FamilyClosedForm> {
    // every family is an X-state, so the steered party must be mixed
    let q = oriented(&family.x_params(), direction);
    check_steered(q.b3, tol)?;

    let (raw, threshold_expr) = match *family {
        Family::Pure { a } => {
            let entangled = a.abs() > 0.0 && a.abs() < 1.0;
            (if entangled { 1.0 } else { 0.0 }, "0<|a|<1")
        }
        Family::BellDiagonal { c1, c2, c3 } => (
            bell_diagonal_steerability(&Vector3::new(c1, c2, c3))?,
            "N>2",
        ),
        Family::XState(p) => (steerability_x_analytic(&p, direction, tol)?.s, "theorem"),
        Family::RhoX0 { b3, c3, .. } => match direction {
            Direction::AtoB => (max0(&[(2.0 * c3 - 1.0 - b3) / (1.0 - b3)]), "2c3>1+b3"),
            Direction::BtoA => {
                let den = 2.0 + b3 - c3;
                (
                    max0(&[(b3 + c3) / den, (1.0 + b3) * (b3 + c3) / (den * den)]),
                    "(1+b3)(b3+c3)>0",
                )
            }
        },
        Family::WEtaChi { eta, chi } => match direction {
            Direction::AtoB => {
                let num = 1.0 + eta * (chi - 2.0);
                let den = 1.0 - eta * chi;
                (
                    max0(&[-num / den, eta * num * (chi - 1.0) / (den * den)]),
                    "eta>1/(2-chi)",
                )
            }
            Direction::BtoA => {
                let num = eta + eta * chi - 1.0;
                let den = 1.0 + eta * (chi - 1.0);
                (
                    max0(&[eta * chi * num / (den * den), num / den]),
                    "eta>1/(1+chi)",
                )
            }
        },
        Family::WVTheta { v, theta } => {
            let w2 = (1.0 - 2.0 * v).powi(2);
            match direction {
                Direction::AtoB => (w2, "V!=1/2"),
                Direction::BtoA => {
                    let (s, c) = (2.0 * theta).sin_cos();
                    let den = 1.0 - w2 * c * c;
                    (
                        max0(&[(w2 - c * c) / den, s * s * (w2 - c * c) / (den * den)]),
                        "|cos2theta|<|2V-1|",
                    )
                }
            }
        }
        Family::ColourNoise { v, theta } => {
            let (s, c) = (2.0 * theta).sin_cos();
            let den = 1.0 - v * v * c * c;
            // den vanishes only for product states, which the singularity check rejects
            (v * v * s * s / den, "V*sin2theta!=0")
        }
        Family::GenIsotropic { v, theta } => {
            let (s2, c2) = (2.0 * theta).sin_cos();
            let c4 = (4.0 * theta).cos();
            let den = 1.0 - v * v * c2 * c2;
            let root = (1.0 - v) * tol.sqrt_clamped((1.0 + v).powi(2) - 4.0 * v * v * c2 * c2)?;
            let first = (1.0 - v * v * c4 + root) / (4.0 * den);
            let second = (v * v * (1.0 + 2.0 * s2 * s2) - 1.0 - root) / den;
            (
                max0(&[first * second]),
                "1+(1-V)sqrt((1+V)^2-4V^2cos^2(2theta))<V^2(1+2sin^2(2theta))",
            )
        }
    };
    let s = tol.clamp_steerability(raw);
    Ok(FamilyClosedForm {
        s,
        steerable: s > 0.0,
        threshold_expr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{compute_map, steering_objective, MeasurementDirection};
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn derived_examples() {
        let d = x_derived(
            &XStateParams::new(0.3, 0.0, 0.5, 0.4, 0.7),
            Direction::AtoB,
            &tol(),
        )
        .unwrap();
        assert_eq!((d.u1, d.u2, d.u3, d.t3), (0.5, 0.4, 0.7, 0.3));

        let d = x_derived(
            &XStateParams::new(0.3, 0.6, 0.5, 0.4, 0.7),
            Direction::AtoB,
            &tol(),
        )
        .unwrap();
        for (got, want) in [(d.u1, 0.625), (d.u2, 0.5), (d.u3, 0.8125), (d.t3, -0.1875)] {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }

        let pure = Family::Pure { a: 0.6 }.x_params();
        let d = x_derived(&pure, Direction::AtoB, &tol()).unwrap();
        assert!((d.u1 - 1.0).abs() < 1e-12 && (d.u2 + 1.0).abs() < 1e-12);
        let dl = delta_values(&d, &tol()).unwrap();
        assert!((dl[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derived_matches_map() {
        let p = XStateParams::new(0.3, 0.6, 0.5, 0.4, 0.7);
        for dir in Direction::BOTH {
            let d = x_derived(&p, dir, &tol()).unwrap();
            let map = compute_map(&x_canonical(&p), dir, &tol()).unwrap();
            assert!((map.u[(0, 0)] - d.u1).abs() < 1e-12);
            assert!((map.u[(1, 1)] - d.u2).abs() < 1e-12);
            assert!((map.u[(2, 2)] - d.u3).abs() < 1e-12);
            assert!((map.v.z - d.t3).abs() < 1e-12);
        }
    }

    #[test]
    fn deltas_are_axis_pair_objectives() {
        let p = XStateParams::new(0.2, -0.3, 0.5, -0.4, 0.35);
        for dir in Direction::BOTH {
            let map = compute_map(&x_canonical(&p), dir, &tol()).unwrap();
            let deltas = delta_values(&x_derived(&p, dir, &tol()).unwrap(), &tol()).unwrap();
            for (k, ang) in AXIS_PAIR_ANGLES.iter().enumerate() {
                let v = steering_objective(
                    &map,
                    &MeasurementDirection::new(ang[0], ang[1]),
                    &MeasurementDirection::new(ang[2], ang[3]),
                    &tol(),
                );
                assert!(
                    (v - deltas[k]).abs() < 1e-10,
                    "{dir} pair {k}: {v} vs {}",
                    deltas[k]
                );
            }
        }
    }

    #[test]
    fn spec_examples() {
        let weak = XStateParams::new(0.0, 0.0, 0.2, 0.1, 0.05);
        let r = steerability_x_analytic(&weak, Direction::AtoB, &tol()).unwrap();
        let d = r.deltas.unwrap();
        assert!((d[0] + 0.95).abs() < 1e-12 && d[1] < 0.0 && d[2] < 0.0);
        assert_eq!(r.s, 0.0);

        let bd = XStateParams::bell_diagonal(0.8, -0.8, 0.8);
        let r = steerability_x_analytic(&bd, Direction::AtoB, &tol()).unwrap();
        assert!((r.s - 0.28).abs() < 1e-12);
        assert_eq!(r.angles, AXIS_PAIR_ANGLES[0]);

        let x0 = Family::RhoX0 {
            b3: -0.999,
            c3: 0.5,
            sign: 1.0,
        }
        .x_params();
        let r = steerability_x_analytic(&x0, Direction::AtoB, &tol()).unwrap();
        assert!((r.s - 0.999 / 1.999).abs() < 1e-12);
        let r = steerability_x_analytic(&x0, Direction::BtoA, &tol()).unwrap();
        assert_eq!(r.s, 0.0);
    }

    #[test]
    fn singular_steered_party() {
        let p = XStateParams::new(0.0, 1.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            x_derived(&p, Direction::AtoB, &tol()),
            Err(Error::SteeredStateSingular { .. })
        ));
        assert!(x_derived(&p, Direction::BtoA, &tol()).is_ok());
    }

    #[test]
    fn zero_state_classes() {
        let cfg = OptimizerConfig::default();
        let bd = XStateParams::bell_diagonal(0.5, -0.3, 0.2);
        let c = classify_zero_state(&bd, Direction::AtoB, &cfg, &tol()).unwrap();
        assert_eq!(c.verdict, ZeroVerdict::CertifiedT3Zero);

        let w = Family::WVTheta {
            v: 0.3,
            theta: PI / 6.0,
        }
        .x_params();
        let c = classify_zero_state(&w, Direction::AtoB, &cfg, &tol()).unwrap();
        assert_ne!(c.verdict, ZeroVerdict::Inconsistent);

        let p = XStateParams::new(0.9, 0.0, 0.1, 0.05, 0.02);
        let c = classify_zero_state(&p, Direction::AtoB, &cfg, &tol()).unwrap();
        assert!(c.gap.is_some());
    }

    #[test]
    fn family_examples() {
        let t = tol();
        for theta in [0.1, 0.7, 1.3] {
            let f = family_steerability(
                &FamilySpec::new("w_v_theta")
                    .with("v", 0.5)
                    .with("theta", theta),
                Direction::AtoB,
                &t,
            )
            .unwrap();
            assert_eq!(f.s, 0.0);
            assert!(!f.steerable);
        }
        let f = family_steerability(
            &FamilySpec::new("w_eta_chi")
                .with("eta", 0.8)
                .with("chi", 0.5),
            Direction::AtoB,
            &t,
        )
        .unwrap();
        assert!(f.steerable);
        assert_eq!(f.threshold_expr, "eta>1/(2-chi)");
        let f = family_steerability(
            &FamilySpec::new("colour_noise")
                .with("v", 0.6)
                .with("theta", PI / 4.0),
            Direction::AtoB,
            &t,
        )
        .unwrap();
        assert!((f.s - 0.36).abs() < 1e-12);
        assert!(matches!(
            family_steerability(&FamilySpec::new("nope"), Direction::AtoB, &t),
            Err(Error::UnknownFamily(_))
        ));
    }

    #[test]
    fn closed_forms_match_theorem() {
        let t = tol();
        let families = [
            Family::Pure { a: 0.6 },
            Family::BellDiagonal {
                c1: 0.7,
                c2: -0.6,
                c3: 0.5,
            },
            Family::RhoX0 {
                b3: -0.9,
                c3: 0.4,
                sign: 1.0,
            },
            Family::RhoX0 {
                b3: -0.5,
                c3: 0.8,
                sign: -1.0,
            },
            Family::WEtaChi { eta: 0.8, chi: 0.5 },
            Family::WEtaChi {
                eta: 0.95,
                chi: 0.3,
            },
            Family::WEtaChi { eta: 0.4, chi: 0.6 },
            Family::WVTheta { v: 0.1, theta: 0.4 },
            Family::WVTheta { v: 0.9, theta: 1.2 },
            Family::ColourNoise { v: 0.7, theta: 0.3 },
            Family::GenIsotropic { v: 0.9, theta: 0.3 },
            Family::GenIsotropic {
                v: 0.95,
                theta: 1.1,
            },
            Family::GenIsotropic { v: 0.5, theta: 0.6 },
        ];
        for f in families {
            for dir in Direction::BOTH {
                let closed = family_closed_form(&f, dir, &t).unwrap();
                let theorem = steerability_x_analytic(&f.x_params(), dir, &t).unwrap();
                assert!(
                    (closed.s - theorem.s).abs() < 1e-10,
                    "{f:?} {dir}: {} vs {}",
                    closed.s,
                    theorem.s
                );
            }
        }
    }
}
