//! Nelder-Mead downhill simplex on fixed-size points.

/// Result of one simplex run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOutcome<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn combine<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    // a + t (b - a)
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a[i] + t * (b[i] - a[i]);
    }
    out
}

/// Minimize `f` from `x0` with an axis-aligned initial simplex of edge `step`.
///
/// Stops when every vertex lies within `tol` (max-norm) of the best vertex or
/// after `max_iters` iterations. NaN is treated as +inf, so callers can reject
/// points by returning either.
pub fn nelder_mead<const N: usize, F>(
    mut f: F,
    x0: [f64; N],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> SimplexOutcome<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut pts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let v0 = sanitize(f(&x0));
    pts.push((x0, v0));
    for i in 0..N {
        let mut x = x0;
        x[i] += step;
        let v = sanitize(f(&x));
        pts.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        // stable sort keeps earlier vertices first among ties
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = pts[0].0;
        let size = pts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best.iter()).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        if size <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &pts[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let (worst, f_worst) = pts[N];
        let f_best = pts[0].1;
        let f_second = pts[N - 1].1;

        let xr = combine(&centroid, &worst, -REFLECT);
        let fr = sanitize(f(&xr));
        if fr < f_best {
            let xe = combine(&centroid, &worst, -EXPAND);
            let fe = sanitize(f(&xe));
            pts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            pts[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = combine(&centroid, &xr, CONTRACT);
            (xc, sanitize(f(&xc)))
        } else {
            let xc = combine(&centroid, &worst, CONTRACT);
            (xc, sanitize(f(&xc)))
        };
        if fc < f_worst.min(fr) {
            pts[N] = (xc, fc);
            continue;
        }
        let anchor = pts[0].0;
        for p in pts.iter_mut().skip(1) {
            let x = combine(&anchor, &p.0, SHRINK);
            *p = (x, sanitize(f(&x)));
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexOutcome {
        x: pts[0].0,
        value: pts[0].1,
        iterations,
        converged,
    }
}
