//! CHSH violation, its relation to steerability, and the (N, S) region scan.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{classify_zero_state, ZeroVerdict};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::functional::Direction;
use crate::optimizer::OptimizerConfig;
use crate::qstate::{PauliRepresentation, XStateParams};
use crate::tolerance::Tolerances;

const DISCRIMINANT_EPS: f64 = 1e-12;

fn jacobi_eigenvalues(m: &Matrix3<f64>) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..64 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        if off <= 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[(p, q)] == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Matrix3::identity();
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            a = rot.transpose() * a * rot;
        }
    }
    let mut ev = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Eigenvalues of a real symmetric 3x3 matrix, largest first.
///
/// Trigonometric solution of the characteristic cubic; near-degenerate
/// spectra go through Jacobi rotations instead.
pub fn sym3_eigenvalues(m: &Matrix3<f64>) -> [f64; 3] {
    let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
    let q = m.trace() / 3.0;
    let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let b = (m - Matrix3::identity() * q) / p;
    let r = b.determinant() / 2.0;
    let disc = 108.0 * p.powi(6) * (1.0 - r * r);
    if disc.abs() < DISCRIMINANT_EPS || !disc.is_finite() {
        return jacobi_eigenvalues(m);
    }
    let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

/// Maximal CHSH value 2 sqrt(tau1 + tau2) over the two largest eigenvalues of T^T T.
pub fn chsh_max(p: &PauliRepresentation) -> f64 {
    let ev = sym3_eigenvalues(&(p.t.transpose() * p.t));
    2.0 * (ev[0] + ev[1]).max(0.0).sqrt()
}

/// max(N^2/4 - 1, 0) for the Bell-diagonal state with correlations `c`.
pub fn bell_diagonal_steerability(c: &Vector3<f64>) -> Result<f64> {
    let p = XStateParams::bell_diagonal(c.x, c.y, c.z);
    let min_ev = p.min_eigenvalue();
    if min_ev < -1e-10 || c.iter().any(|x| !x.is_finite()) {
        return Err(Error::ParamOutOfDomain {
            name: "c".into(),
            value: min_ev,
            reason: "outside the Bell-diagonal tetrahedron",
        });
    }
    let n = chsh_max(&p.to_pauli());
    Ok((n * n / 4.0 - 1.0).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSample {
    pub n_value: f64,
    pub s_value: f64,
    pub params: XStateParams,
    pub verdict: ZeroVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryCheck {
    /// The upper bound S <= N/2 applies (N <= 2).
    pub applicable: bool,
    pub upper_ok: bool,
    /// N/2 - S.
    pub slack: f64,
}

pub fn corollary_bounds(sample: &RegionSample) -> CorollaryCheck {
    let slack = sample.n_value / 2.0 - sample.s_value;
    let applicable = sample.n_value <= 2.0;
    CorollaryCheck {
        applicable,
        upper_ok: !applicable || slack >= -1e-9,
        slack,
    }
}

/// Which of the three minimizing conditions hold:
/// a3 = b3 = 0, |a3 + b3| = sqrt((1+c3)^2 - (c1-c2)^2), |a3 - b3| = sqrt((1-c3)^2 - (c1+c2)^2).
pub fn corollary2_conditions(p: &XStateParams, eps: f64) -> [bool; 3] {
    let root = |x: f64| if x < 0.0 { f64::NAN } else { x.sqrt() };
    [
        p.a3.abs() <= eps && p.b3.abs() <= eps,
        ((p.a3 + p.b3).abs() - root((1.0 + p.c3).powi(2) - (p.c1 - p.c2).powi(2))).abs() <= eps,
        ((p.a3 - p.b3).abs() - root((1.0 - p.c3).powi(2) - (p.c1 + p.c2).powi(2))).abs() <= eps,
    ]
}

/// Relative weights of the sample kinds drawn by [`region_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMix {
    /// Uniform X-states with a3 = b3 c3, so t3 vanishes.
    pub t3_zero: f64,
    pub bell_diagonal: f64,
    pub rho_x0: f64,
    /// Uniform X-states, kept when the optimizer agrees with the closed form.
    pub generic: f64,
}

impl Default for RegionMix {
    fn default() -> Self {
        RegionMix {
            t3_zero: 0.55,
            bell_diagonal: 0.2,
            rho_x0: 0.15,
            generic: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSampler {
    pub count: usize,
    pub seed: u64,
    pub mix: RegionMix,
    pub direction: Direction,
}

impl RegionSampler {
    pub fn new(count: usize, seed: u64) -> Self {
        RegionSampler {
            count,
            seed,
            mix: RegionMix::default(),
            direction: Direction::AtoB,
        }
    }
}

const MAX_ATTEMPTS: usize = 100_000;

fn draw_candidate(rng: &mut ChaCha8Rng, mix: &RegionMix) -> XStateParams {
    let total = mix.t3_zero + mix.bell_diagonal + mix.rho_x0 + mix.generic;
    let pick = rng.gen::<f64>() * total;
    let mut u = || rng.gen_range(-1.0..=1.0);
    if pick < mix.t3_zero {
        let (b3, c1, c2, c3) = (u(), u(), u(), u());
        XStateParams::new(b3 * c3, b3, c1, c2, c3)
    } else if pick < mix.t3_zero + mix.bell_diagonal {
        XStateParams::bell_diagonal(u(), u(), u())
    } else if pick < mix.t3_zero + mix.bell_diagonal + mix.rho_x0 {
        let b3 = u();
        let c3 = b3 + (1.0 - b3) * (0.5 * (u() + 1.0));
        let sign = if u() < 0.0 { -1.0 } else { 1.0 };
        Family::RhoX0 { b3, c3, sign }.x_params()
    } else {
        XStateParams::new(u(), u(), u(), u(), u())
    }
}

fn draw_sample(
    slot: usize,
    sampler: &RegionSampler,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<RegionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    rng.set_stream(slot as u64);
    for _ in 0..MAX_ATTEMPTS {
        let p = draw_candidate(&mut rng, &sampler.mix);
        if !p.is_physical(tol) {
            continue;
        }
        let class = match classify_zero_state(&p, sampler.direction, cfg, tol) {
            Ok(c) => c,
            Err(Error::SteeredStateSingular { .. }) => continue,
            Err(e) => return Err(e),
        };
        let s_value = match class.verdict {
            ZeroVerdict::CertifiedT3Zero => class.analytic.s,
            ZeroVerdict::NumericallyConsistent => class.numeric.map_or(class.analytic.s, |r| r.s),
            ZeroVerdict::Inconsistent => continue,
        };
        return Ok(RegionSample {
            n_value: chsh_max(&p.to_pauli()),
            s_value,
            params: p,
            verdict: class.verdict,
        });
    }
    Err(Error::InvalidConfig(format!(
        "region sampler found no zero-state in {MAX_ATTEMPTS} draws for slot {slot}"
    )))
}

/// Seeded scan of zero-state X-states, returning (N, S) per sample in slot order.
///
/// Each slot has its own random stream, so the output does not depend on the
/// number of worker threads.
pub fn region_scan(
    sampler: &RegionSampler,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<Vec<RegionSample>> {
    let m = sampler.mix;
    let weights = [m.t3_zero, m.bell_diagonal, m.rho_x0, m.generic];
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidConfig(
            "region mix weights must be non-negative with a positive sum".into(),
        ));
    }
    (0..sampler.count)
        .into_par_iter()
        .map(|slot| draw_sample(slot, sampler, cfg, tol))
        .collect()
}
