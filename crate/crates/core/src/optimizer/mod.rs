//! Deterministic global search over measurement angles, and the min-max solver
//! used by the steering radius.
//!
//! Both searches follow the same pattern: evaluate a fixed grid, keep the best
//! grid-local optima, polish each with Nelder-Mead. Every reduction runs in a
//! fixed order, so results do not depend on the worker count.

pub mod simplex;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{
    compute_map, criterion, observable_terms, Direction, MeasurementDirection, ObservableTerms,
    SteeringMap, DEGENERATE_SENTINEL,
};
use crate::qstate::{canonicalize, to_pauli, CanonicalState, DensityMatrix};
use crate::tolerance::Tolerances;

pub use simplex::{nelder_mead, SimplexOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Grid intervals over alpha in [0, pi]; beta in [0, 2 pi) gets twice as many.
    pub grid_per_angle: usize,
    /// Number of grid-local optima refined by the simplex.
    pub top_k: usize,
    pub refine_max_iters: usize,
    /// Simplex size at which refinement stops.
    pub refine_tol: f64,
    /// Non-zero seeds jitter the refinement starts.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            grid_per_angle: 18,
            top_k: 8,
            refine_max_iters: 400,
            refine_tol: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_per_angle < 4 {
            return Err(Error::InvalidConfig("grid_per_angle must be >= 4".into()));
        }
        if self.top_k < 1 {
            return Err(Error::InvalidConfig("top_k must be >= 1".into()));
        }
        if !(self.refine_tol.is_finite() && self.refine_tol > 0.0) {
            return Err(Error::InvalidConfig("refine_tol must be positive".into()));
        }
        Ok(())
    }
}

/// How a steerability value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Numeric,
    AnalyticXstate,
    ClosedFormFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringResult {
    pub s: f64,
    pub direction: Direction,
    /// (alpha0, beta0, alpha1, beta1) of the measuring party, in the input frame.
    pub angles: [f64; 4],
    pub method: Method,
    pub deltas: Option<[f64; 3]>,
    /// S1 - S2 at the reported angles, before clamping at zero.
    pub objective_at_opt: f64,
}

impl SteeringResult {
    pub fn steerable(&self) -> bool {
        self.s > 0.0
    }
}

/// Observable terms for every direction of an angle grid.
struct DirectionTable {
    angles: Vec<(f64, f64)>,
    terms: Vec<ObservableTerms>,
    n_alpha: usize,
    n_beta: usize,
}

impl DirectionTable {
    fn new(map: &SteeringMap, grid: usize, tol: &Tolerances) -> Self {
        let n_alpha = grid + 1;
        let n_beta = 2 * grid;
        let step = PI / grid as f64;
        let mut angles = Vec::with_capacity(n_alpha * n_beta);
        let mut terms = Vec::with_capacity(n_alpha * n_beta);
        for i in 0..n_alpha {
            for j in 0..n_beta {
                let d = MeasurementDirection::new(i as f64 * step, j as f64 * step);
                let e = d.unit();
                angles.push((d.alpha, d.beta));
                terms.push(observable_terms(map.v.dot(&e), map.u * e, tol));
            }
        }
        DirectionTable {
            angles,
            terms,
            n_alpha,
            n_beta,
        }
    }
}

fn objective_at(map: &SteeringMap, x: &[f64; 4], tol: &Tolerances) -> f64 {
    let e0 = MeasurementDirection::new(x[0], x[1]).unit();
    let e1 = MeasurementDirection::new(x[2], x[3]).unit();
    let t0 = observable_terms(map.v.dot(&e0), map.u * e0, tol);
    let t1 = observable_terms(map.v.dot(&e1), map.u * e1, tol);
    criterion(&t0, &t1)
}

fn normalize_angles(x: &[f64; 4]) -> [f64; 4] {
    let d0 = MeasurementDirection::from_vector(&MeasurementDirection::new(x[0], x[1]).unit());
    let d1 = MeasurementDirection::from_vector(&MeasurementDirection::new(x[2], x[3]).unit());
    [d0.alpha, d0.beta, d1.alpha, d1.beta]
}

fn lex_less(a: &[f64; 4], b: &[f64; 4]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Maximize S1 - S2 over both measurement directions of a fixed map.
///
/// Returns the best value and its angles in the map's (canonical) frame.
pub fn maximize_map(map: &SteeringMap, cfg: &OptimizerConfig, tol: &Tolerances) -> (f64, [f64; 4]) {
    let grid = cfg.grid_per_angle;
    let table = DirectionTable::new(map, grid, tol);
    let (n_alpha, n_beta) = (table.n_alpha, table.n_beta);
    let n_dirs = n_alpha * n_beta;
    // n -> -n leaves the objective unchanged, so alpha0 only needs [0, pi/2]
    let n_alpha0 = grid / 2 + 1;
    let n_first = n_alpha0 * n_beta;

    let values: Vec<f64> = (0..n_first)
        .into_par_iter()
        .flat_map_iter(|d0| {
            let t0 = table.terms[d0];
            let terms = &table.terms;
            (0..n_dirs).map(move |d1| criterion(&t0, &terms[d1]))
        })
        .collect();

    let index =
        |i0: usize, j0: usize, i1: usize, j1: usize| (i0 * n_beta + j0) * n_dirs + i1 * n_beta + j1;
    let is_local_max = |flat: usize| {
        let v = values[flat];
        if v <= DEGENERATE_SENTINEL {
            return false;
        }
        let (d0, d1) = (flat / n_dirs, flat % n_dirs);
        let (i0, j0, i1, j1) = (d0 / n_beta, d0 % n_beta, d1 / n_beta, d1 % n_beta);
        let up = |j: usize| (j + 1) % n_beta;
        let down = |j: usize| (j + n_beta - 1) % n_beta;
        let mut neighbours = vec![
            index(i0, up(j0), i1, j1),
            index(i0, down(j0), i1, j1),
            index(i0, j0, i1, up(j1)),
            index(i0, j0, i1, down(j1)),
        ];
        if i0 > 0 {
            neighbours.push(index(i0 - 1, j0, i1, j1));
        }
        if i0 + 1 < n_alpha0 {
            neighbours.push(index(i0 + 1, j0, i1, j1));
        }
        if i1 > 0 {
            neighbours.push(index(i0, j0, i1 - 1, j1));
        }
        if i1 + 1 < n_alpha {
            neighbours.push(index(i0, j0, i1 + 1, j1));
        }
        neighbours.into_iter().all(|n| values[n] <= v)
    };

    let mut starts: Vec<usize> = (0..values.len())
        .into_par_iter()
        .filter(|&flat| is_local_max(flat))
        .collect();
    starts.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    starts.truncate(cfg.top_k);
    if starts.is_empty() {
        // everything degenerate: fall back to the first grid point
        starts.push(0);
    }

    let grid_point = |flat: usize| {
        let (a0, b0) = table.angles[flat / n_dirs];
        let (a1, b1) = table.angles[flat % n_dirs];
        [a0, b0, a1, b1]
    };
    let best_grid = starts[0];
    let step = PI / grid as f64;

    let refined: Vec<(f64, [f64; 4])> = starts
        .par_iter()
        .enumerate()
        .map(|(k, &flat)| {
            let mut x0 = grid_point(flat);
            if cfg.seed != 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(k as u64);
                for xi in x0.iter_mut() {
                    *xi += rng.gen_range(-0.25..0.25) * step;
                }
            }
            let neg = |x: &[f64; 4]| -objective_at(map, x, tol);
            let mut out = nelder_mead(neg, x0, 0.5 * step, cfg.refine_max_iters, cfg.refine_tol);
            // one restart from the polished point guards against a collapsed simplex
            let again = nelder_mead(
                neg,
                out.x,
                0.05 * step,
                cfg.refine_max_iters,
                cfg.refine_tol,
            );
            if again.value <= out.value {
                out = again;
            }
            (-out.value, out.x)
        })
        .collect();

    let mut best = (values[best_grid], normalize_angles(&grid_point(best_grid)));
    for (v, x) in refined {
        let x = normalize_angles(&x);
        if v > best.0 || (v == best.0 && lex_less(&x, &best.1)) {
            best = (v, x);
        }
    }
    best
}

fn rotate_angles(angles: &[f64; 4], rot: &nalgebra::Matrix3<f64>) -> [f64; 4] {
    let d0 = MeasurementDirection::new(angles[0], angles[1]).unit();
    let d1 = MeasurementDirection::new(angles[2], angles[3]).unit();
    let r0 = MeasurementDirection::from_vector(&(rot * d0));
    let r1 = MeasurementDirection::from_vector(&(rot * d1));
    [r0.alpha, r0.beta, r1.alpha, r1.beta]
}

/// Numeric steerability of a canonical state.
pub fn maximize_canonical(
    state: &CanonicalState,
    direction: Direction,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<SteeringResult> {
    cfg.validate()?;
    let map = compute_map(state, direction, tol)?;
    let (value, angles) = maximize_map(&map, cfg, tol);
    let frame = match direction {
        Direction::AtoB => state.rot_a,
        Direction::BtoA => state.rot_b,
    };
    Ok(SteeringResult {
        s: tol.clamp_steerability(value),
        direction,
        angles: rotate_angles(&angles, &frame),
        method: Method::Numeric,
        deltas: None,
        objective_at_opt: value,
    })
}

/// Two-setting steerability of an arbitrary two-qubit state by global search.
pub fn maximize_steerability(
    state: &DensityMatrix,
    direction: Direction,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<SteeringResult> {
    let canonical = canonicalize(&to_pauli(state));
    maximize_canonical(&canonical, direction, cfg, tol)
}

/// Outcome of [`minimize_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxResult {
    pub point: [f64; 3],
    pub value: f64,
    /// Grid probes where some branch was non-finite.
    pub skipped: usize,
    /// Half-width of the final search box.
    pub half_width: f64,
}

fn pointwise_max(branches: [f64; 4]) -> f64 {
    if branches.iter().any(|b| !b.is_finite()) {
        f64::INFINITY
    } else {
        branches.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn minimize_max_in_box<F>(f: &F, cfg: &OptimizerConfig, half_width: f64) -> Result<MinMaxResult>
where
    F: Fn(&[f64; 3]) -> [f64; 4] + Sync,
{
    let n = cfg.grid_per_angle;
    let step = 2.0 * half_width / n as f64;
    let pts = n + 1;
    let coord = |i: usize| -half_width + i as f64 * step;
    let values: Vec<f64> = (0..pts * pts * pts)
        .into_par_iter()
        .map(|flat| {
            let (i, j, k) = (flat / (pts * pts), (flat / pts) % pts, flat % pts);
            pointwise_max(f(&[coord(i), coord(j), coord(k)]))
        })
        .collect();
    let skipped = values.iter().filter(|v| !v.is_finite()).count();
    if skipped == values.len() {
        return Err(Error::NonFiniteObjective { skipped });
    }

    let is_local_min = |flat: usize| {
        let v = values[flat];
        if !v.is_finite() {
            return false;
        }
        let idx = [flat / (pts * pts), (flat / pts) % pts, flat % pts];
        (0..3).all(|axis| {
            [-1i64, 1].iter().all(|d| {
                let moved = idx[axis] as i64 + d;
                if moved < 0 || moved >= pts as i64 {
                    return true;
                }
                let mut other = idx;
                other[axis] = moved as usize;
                values[(other[0] * pts + other[1]) * pts + other[2]] >= v
            })
        })
    };
    let mut starts: Vec<usize> = (0..values.len()).filter(|&i| is_local_min(i)).collect();
    starts.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    starts.truncate(cfg.top_k);

    let in_box = |x: &[f64; 3]| x.iter().all(|c| c.abs() <= half_width);
    let objective = |x: &[f64; 3]| {
        if in_box(x) {
            pointwise_max(f(x))
        } else {
            f64::INFINITY
        }
    };
    let refined: Vec<SimplexOutcome<3>> = starts
        .par_iter()
        .map(|&flat| {
            let x0 = [
                coord(flat / (pts * pts)),
                coord((flat / pts) % pts),
                coord(flat % pts),
            ];
            let mut out = nelder_mead(
                objective,
                x0,
                0.5 * step,
                cfg.refine_max_iters,
                cfg.refine_tol,
            );
            // the pointwise max has kinks where the simplex can stall; restart until no gain
            for shrink in [0.1, 0.01, 0.1] {
                let again = nelder_mead(
                    objective,
                    out.x,
                    shrink * step,
                    cfg.refine_max_iters,
                    cfg.refine_tol,
                );
                if again.value < out.value {
                    out = again;
                }
            }
            out
        })
        .collect();

    let mut best = MinMaxResult {
        point: [0.0; 3],
        value: f64::INFINITY,
        skipped,
        half_width,
    };
    for out in refined {
        if out.value < best.value {
            best.value = out.value;
            best.point = out.x;
        }
    }
    Ok(best)
}

/// Minimize over (z1, z3, Z) the largest of four branch values.
///
/// The search starts in the box [-half_width, half_width]^3 and is repeated once
/// in a box twice as wide when the optimum sits on the boundary. Probes where a
/// branch is non-finite are skipped and counted.
pub fn minimize_max<F>(f: F, cfg: &OptimizerConfig, half_width: f64) -> Result<MinMaxResult>
where
    F: Fn(&[f64; 3]) -> [f64; 4] + Sync,
{
    cfg.validate()?;
    let first = minimize_max_in_box(&f, cfg, half_width)?;
    let on_boundary = first
        .point
        .iter()
        .any(|c| c.abs() >= half_width * (1.0 - 1e-3));
    if on_boundary {
        let wider = minimize_max_in_box(&f, cfg, 2.0 * half_width)?;
        if wider.value <= first.value {
            return Ok(wider);
        }
    }
    Ok(first)
}
