#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steerkit::qstate::{Mat2, Mat4, C64};
use steerkit::{DensityMatrix, Tolerances, XStateParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G G^dagger / tr for a random complex G; full rank with probability one.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = Mat4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::validate(m / tr, &Tolerances::default()).expect("Wishart state is physical")
}

/// cos t I + i sin t (n . sigma) for a random axis n.
pub fn random_su2(rng: &mut ChaCha8Rng) -> Mat2 {
    let t = rng.gen_range(0.0..std::f64::consts::PI);
    let n = loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-3 && r2 <= 1.0 {
            let r = r2.sqrt();
            break [v[0] / r, v[1] / r, v[2] / r];
        }
    };
    let i = C64::new(0.0, 1.0);
    let (s, c) = t.sin_cos();
    Mat2::new(
        C64::new(c, 0.0) + i * s * n[2],
        i * s * C64::new(n[0], -n[1]),
        i * s * C64::new(n[0], n[1]),
        C64::new(c, 0.0) - i * s * n[2],
    )
}

/// Uniform X-state parameters, rejected until physical with both parties mixed.
pub fn random_x_state(rng: &mut ChaCha8Rng) -> XStateParams {
    let tol = Tolerances::default();
    loop {
        let mut u = || rng.gen_range(-1.0..1.0);
        let p = XStateParams::new(u(), u(), u(), u(), u());
        if p.is_physical(&tol) && p.a3.abs() < 0.999 && p.b3.abs() < 0.999 {
            return p;
        }
    }
}

/// Correlation vector inside the Bell-diagonal tetrahedron.
pub fn random_bell_c(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let c = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if XStateParams::bell_diagonal(c[0], c[1], c[2]).min_eigenvalue() >= 0.0 {
            return c;
        }
    }
}
