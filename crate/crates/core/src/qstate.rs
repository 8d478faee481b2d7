//! Two-qubit states: validation, Pauli coordinates, local-unitary canonical
//! form and the X-state parametrization.
//!
//! Basis order is |00>, |01>, |10>, |11> with Alice's qubit first. Pauli
//! coordinates follow
//!
//! ```text
//! rho = 1/4 (I + a.sigma (x) I + I (x) b.sigma + sum_ab T_ab sigma_a (x) sigma_b)
//! ```
//!
//! so `a` is Alice's Bloch vector, `b` Bob's, and `T_ab = tr[rho sigma_a (x) sigma_b]`.

use nalgebra::{Complex, Matrix2, Matrix3, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Pauli matrix by index: 0 = I, 1 = x, 2 = y, 3 = z.
pub fn pauli(i: usize) -> Mat2 {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match i {
        0 => Mat2::new(o, z, z, o),
        1 => Mat2::new(z, o, o, z),
        2 => Mat2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
        3 => Mat2::new(o, z, z, -o),
        _ => panic!("pauli index {i} out of range"),
    }
}

/// Kronecker product of two 2x2 matrices, first factor on Alice's qubit.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Mat4,
}

impl DensityMatrix {
    /// Check Hermiticity, unit trace and positivity, in that order.
    pub fn validate(raw: Mat4, tol: &Tolerances) -> Result<Self> {
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotHermitian {
                deviation: f64::INFINITY,
            });
        }
        let deviation = (raw - raw.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > tol.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = raw.trace();
        if (trace - c(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let min_eigenvalue = hermitian_eigenvalues(&raw)[0];
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { m: raw })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Mat4::identity() * c(0.25, 0.0),
        }
    }

    /// Projector onto a (not necessarily normalized) ket.
    pub fn from_ket(psi: [C64; 4]) -> Self {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = psi[i] * psi[j].conj() / norm2;
            }
        }
        DensityMatrix { m }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    /// Ascending spectrum, with eigenvalues inside the tolerance band below 0 clamped to 0.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev = hermitian_eigenvalues(&self.m);
        for e in ev.iter_mut() {
            if *e < 0.0 {
                *e = 0.0;
            }
        }
        ev
    }

    /// (U_A (x) U_B) rho (U_A (x) U_B)^dagger.
    pub fn conjugate_local(&self, ua: &Mat2, ub: &Mat2) -> Self {
        let u = kron(ua, ub);
        DensityMatrix {
            m: u * self.m * u.adjoint(),
        }
    }

    /// Exchange the two qubits.
    pub fn swap_qubits(&self) -> Self {
        let perm = [0usize, 2, 1, 3];
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(perm[i], perm[j])] = self.m[(i, j)];
            }
        }
        DensityMatrix { m }
    }
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &Mat4) -> [f64; 4] {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let ev = h.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(f64::total_cmp);
    out
}

/// Bloch vectors and correlation matrix of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliRepresentation {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl PauliRepresentation {
    pub fn zero() -> Self {
        PauliRepresentation {
            a: Vector3::zeros(),
            b: Vector3::zeros(),
            t: Matrix3::zeros(),
        }
    }
}

pub fn to_pauli(rho: &DensityMatrix) -> PauliRepresentation {
    let m = rho.matrix();
    let expect = |i: usize, j: usize| (m * kron(&pauli(i), &pauli(j))).trace().re;
    let mut p = PauliRepresentation::zero();
    for k in 0..3 {
        p.a[k] = expect(k + 1, 0);
        p.b[k] = expect(0, k + 1);
        for l in 0..3 {
            p.t[(k, l)] = expect(k + 1, l + 1);
        }
    }
    p
}

/// The unvalidated matrix of a set of Pauli coordinates.
pub fn pauli_matrix(p: &PauliRepresentation) -> Mat4 {
    let mut m = Mat4::identity();
    for k in 0..3 {
        m += kron(&pauli(k + 1), &pauli(0)) * c(p.a[k], 0.0);
        m += kron(&pauli(0), &pauli(k + 1)) * c(p.b[k], 0.0);
        for l in 0..3 {
            m += kron(&pauli(k + 1), &pauli(l + 1)) * c(p.t[(k, l)], 0.0);
        }
    }
    m * c(0.25, 0.0)
}

pub fn from_pauli(p: &PauliRepresentation, tol: &Tolerances) -> Result<DensityMatrix> {
    DensityMatrix::validate(pauli_matrix(p), tol)
}

/// Exchange the roles of Alice and Bob: a <-> b, T -> T^T.
pub fn swap_parties(p: &PauliRepresentation) -> PauliRepresentation {
    PauliRepresentation {
        a: p.b,
        b: p.a,
        t: p.t.transpose(),
    }
}

/// A state in the local frame where the correlation matrix is diagonal.
///
/// `rot_a^T T rot_b = diag(c)`, `a = rot_a^T a_original`, `b = rot_b^T b_original`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalState {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
    pub rot_a: Matrix3<f64>,
    pub rot_b: Matrix3<f64>,
}

impl CanonicalState {
    pub fn to_pauli(&self) -> PauliRepresentation {
        PauliRepresentation {
            a: self.a,
            b: self.b,
            t: Matrix3::from_diagonal(&self.c),
        }
    }

    /// The same state with the parties exchanged. The diagonal correlation matrix is
    /// its own transpose, so only the vectors and frames trade places.
    pub fn swapped(&self) -> CanonicalState {
        CanonicalState {
            a: self.b,
            b: self.a,
            c: self.c,
            rot_a: self.rot_b,
            rot_b: self.rot_a,
        }
    }
}

fn is_sorted_diagonal(t: &Matrix3<f64>) -> bool {
    let off = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .all(|(i, j)| t[(i, j)].abs() <= 1e-14);
    off && t[(0, 0)].abs() >= t[(1, 1)].abs() && t[(1, 1)].abs() >= t[(2, 2)].abs()
}

/// Diagonalize the correlation matrix by a pair of proper rotations.
///
/// Singular values are ordered by descending magnitude. Each rotation column is
/// signed so it points along its partner where possible, which leaves an already
/// diagonal, sorted T untouched (signs stay on the c's). A residual reflection is
/// moved into c3.
pub fn canonicalize(p: &PauliRepresentation) -> CanonicalState {
    let t = p.t;
    if t.amax() <= 1e-15 || is_sorted_diagonal(&t) {
        return CanonicalState {
            a: p.a,
            b: p.b,
            c: t.diagonal(),
            rot_a: Matrix3::identity(),
            rot_b: Matrix3::identity(),
        };
    }
    let svd = t.svd(true, true);
    let u = svd.u.expect("svd u requested");
    let v_t = svd.v_t.expect("svd v_t requested");
    let s = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));

    let mut rot_a = Matrix3::zeros();
    let mut rot_b = Matrix3::zeros();
    let mut cvec = Vector3::zeros();
    for (k, &i) in order.iter().enumerate() {
        rot_a.set_column(k, &u.column(i));
        rot_b.set_column(k, &v_t.row(i).transpose());
        cvec[k] = s[i];
    }
    for k in 0..3 {
        let imax = rot_a.column(k).iamax();
        if rot_a[(imax, k)] < 0.0 {
            rot_a.set_column(k, &(-rot_a.column(k)));
            rot_b.set_column(k, &(-rot_b.column(k)));
        }
        if rot_a.column(k).dot(&rot_b.column(k)) < 0.0 {
            rot_b.set_column(k, &(-rot_b.column(k)));
            cvec[k] = -cvec[k];
        }
    }
    if rot_a.determinant() < 0.0 {
        rot_a.set_column(2, &(-rot_a.column(2)));
        cvec[2] = -cvec[2];
    }
    if rot_b.determinant() < 0.0 {
        rot_b.set_column(2, &(-rot_b.column(2)));
        cvec[2] = -cvec[2];
    }
    CanonicalState {
        a: rot_a.transpose() * p.a,
        b: rot_b.transpose() * p.b,
        c: cvec,
        rot_a,
        rot_b,
    }
}

/// Canonical X-state coordinates: a = (0,0,a3), b = (0,0,b3), T = diag(c1,c2,c3).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct XStateParams {
    pub a3: f64,
    pub b3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl XStateParams {
    pub fn new(a3: f64, b3: f64, c1: f64, c2: f64, c3: f64) -> Self {
        XStateParams { a3, b3, c1, c2, c3 }
    }

    pub fn bell_diagonal(c1: f64, c2: f64, c3: f64) -> Self {
        XStateParams::new(0.0, 0.0, c1, c2, c3)
    }

    pub fn to_pauli(&self) -> PauliRepresentation {
        PauliRepresentation {
            a: Vector3::new(0.0, 0.0, self.a3),
            b: Vector3::new(0.0, 0.0, self.b3),
            t: Matrix3::from_diagonal(&Vector3::new(self.c1, self.c2, self.c3)),
        }
    }

    /// Exchange parties (a3 <-> b3).
    pub fn swapped(&self) -> Self {
        XStateParams::new(self.b3, self.a3, self.c1, self.c2, self.c3)
    }

    /// Diagonal populations (|00>, |01>, |10>, |11>) and the two coherences
    /// rho_{00,11}, rho_{01,10}.
    pub fn entries(&self) -> ([f64; 4], f64, f64) {
        let XStateParams { a3, b3, c1, c2, c3 } = *self;
        (
            [
                (1.0 + a3 + b3 + c3) / 4.0,
                (1.0 + a3 - b3 - c3) / 4.0,
                (1.0 - a3 + b3 - c3) / 4.0,
                (1.0 - a3 - b3 + c3) / 4.0,
            ],
            (c1 - c2) / 4.0,
            (c1 + c2) / 4.0,
        )
    }

    /// Smallest eigenvalue, from the two 2x2 blocks of the X pattern.
    pub fn min_eigenvalue(&self) -> f64 {
        let (d, outer, inner) = self.entries();
        let block_min = |p: f64, q: f64, off: f64| {
            let mean = 0.5 * (p + q);
            let half = (0.25 * (p - q) * (p - q) + off * off).sqrt();
            mean - half
        };
        block_min(d[0], d[3], outer).min(block_min(d[1], d[2], inner))
    }

    pub fn is_physical(&self, tol: &Tolerances) -> bool {
        [self.a3, self.b3, self.c1, self.c2, self.c3]
            .iter()
            .all(|x| x.is_finite())
            && self.min_eigenvalue() >= -tol.psd
    }

    pub fn matrix(&self) -> Mat4 {
        let (d, outer, inner) = self.entries();
        let mut m = Mat4::zeros();
        for (i, di) in d.iter().enumerate() {
            m[(i, i)] = c(*di, 0.0);
        }
        m[(0, 3)] = c(outer, 0.0);
        m[(3, 0)] = c(outer, 0.0);
        m[(1, 2)] = c(inner, 0.0);
        m[(2, 1)] = c(inner, 0.0);
        m
    }

    pub fn density(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::validate(self.matrix(), tol)
    }

    /// Recognize an X-state, either directly in the given frame or after
    /// canonicalization and a cyclic relabelling of axes.
    pub fn from_pauli(p: &PauliRepresentation, eps: f64) -> Option<Self> {
        let t = &p.t;
        let off_diag = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .all(|(i, j)| t[(i, j)].abs() <= eps);
        let along = |v: &Vector3<f64>, k: usize| (0..3).all(|i| i == k || v[i].abs() <= eps);
        if off_diag && along(&p.a, 2) && along(&p.b, 2) {
            return Some(XStateParams::new(
                p.a[2],
                p.b[2],
                t[(0, 0)],
                t[(1, 1)],
                t[(2, 2)],
            ));
        }
        let s = canonicalize(p);
        (0..3).rev().find_map(|k| {
            if along(&s.a, k) && along(&s.b, k) {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                Some(XStateParams::new(s.a[k], s.b[k], s.c[i], s.c[j], s.c[k]))
            } else {
                None
            }
        })
    }
}
