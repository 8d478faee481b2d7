//! Named two-qubit state families.
//!
//! Each family is built from its explicit matrix or ket mixture. The X-state
//! coordinates returned by [`Family::x_params`] are worked out separately and
//! the two are cross-checked in tests.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, Mat4, XStateParams, C64};
use crate::tolerance::Tolerances;

pub const FAMILY_NAMES: [&str; 8] = [
    "pure",
    "bell_diagonal",
    "x_state",
    "rho_x0",
    "w_eta_chi",
    "w_v_theta",
    "colour_noise",
    "gen_isotropic",
];

/// A family name plus named real parameters, as read from a file or the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FamilySpec {
    pub fn new(name: &str) -> Self {
        FamilySpec {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_ascii_lowercase(), value);
        self
    }

    pub fn family(&self) -> Result<Family> {
        Family::from_spec(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// a|00> + sqrt(1-a^2)|11>.
    Pure {
        a: f64,
    },
    BellDiagonal {
        c1: f64,
        c2: f64,
        c3: f64,
    },
    XState(XStateParams),
    /// Rank-two family saturating S = N/2 as b3 -> -1; `sign` picks the coherence sign.
    RhoX0 {
        b3: f64,
        c3: f64,
        sign: f64,
    },
    WEtaChi {
        eta: f64,
        chi: f64,
    },
    /// V|psi1><psi1| + (1-V)|psi2><psi2|.
    WVTheta {
        v: f64,
        theta: f64,
    },
    /// Partially entangled state mixed with colour noise.
    ColourNoise {
        v: f64,
        theta: f64,
    },
    /// Partially entangled state mixed with white noise.
    GenIsotropic {
        v: f64,
        theta: f64,
    },
}

fn out_of_domain(name: &str, value: f64, reason: &'static str) -> Error {
    Error::ParamOutOfDomain {
        name: name.to_string(),
        value,
        reason,
    }
}

fn in_range(name: &str, value: f64, lo: f64, hi: f64, reason: &'static str) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(out_of_domain(name, value, reason))
    }
}

struct Params<'a> {
    family: &'a str,
    map: &'a BTreeMap<String, f64>,
    allowed: &'static [&'static str],
}

impl Params<'_> {
    fn check_names(&self) -> Result<()> {
        for key in self.map.keys() {
            if !self.allowed.contains(&key.as_str()) {
                return Err(Error::Parse(format!(
                    "unknown parameter `{key}` for family `{}`",
                    self.family
                )));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| Error::MissingParam(key.to_string()))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }
}

fn ket_projector(psi: [f64; 4]) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = C64::new(psi[i] * psi[j], 0.0);
        }
    }
    m
}

fn basis_projector(i: usize) -> Mat4 {
    let mut psi = [0.0; 4];
    psi[i] = 1.0;
    ket_projector(psi)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl Family {
    pub fn from_spec(spec: &FamilySpec) -> Result<Family> {
        let lowered: BTreeMap<String, f64> = spec
            .params
            .iter()
            .map(|(k, v)| (k.to_ascii_lowercase(), *v))
            .collect();
        let name = spec.name.trim().to_ascii_lowercase();
        let allowed: &'static [&'static str] = match name.as_str() {
            "pure" => &["a"],
            "bell_diagonal" => &["c1", "c2", "c3"],
            "x_state" => &["a3", "b3", "c1", "c2", "c3"],
            "rho_x0" => &["b3", "c3", "sign"],
            "w_eta_chi" => &["eta", "chi"],
            "w_v_theta" | "colour_noise" | "gen_isotropic" => &["v", "theta"],
            _ => return Err(Error::UnknownFamily(spec.name.clone())),
        };
        let p = Params {
            family: &name,
            map: &lowered,
            allowed,
        };
        p.check_names()?;
        let unit = |key: &str| in_range(key, p.get(key)?, 0.0, 1.0, "must lie in [0, 1]");
        let corr = |key: &str| in_range(key, p.get(key)?, -1.0, 1.0, "must lie in [-1, 1]");
        let angle = || {
            in_range(
                "theta",
                p.get("theta")?,
                0.0,
                FRAC_PI_2,
                "must lie in [0, pi/2]",
            )
        };
        let family = match name.as_str() {
            "pure" => Family::Pure { a: corr("a")? },
            "bell_diagonal" => Family::BellDiagonal {
                c1: corr("c1")?,
                c2: corr("c2")?,
                c3: corr("c3")?,
            },
            "x_state" => Family::XState(XStateParams::new(
                corr("a3")?,
                corr("b3")?,
                corr("c1")?,
                corr("c2")?,
                corr("c3")?,
            )),
            "rho_x0" => {
                let b3 = corr("b3")?;
                let c3 = in_range("c3", p.get("c3")?, b3, 1.0, "must lie in [b3, 1]")?;
                let sign = p.get_or("sign", 1.0);
                if sign != 1.0 && sign != -1.0 {
                    return Err(out_of_domain("sign", sign, "must be +1 or -1"));
                }
                Family::RhoX0 { b3, c3, sign }
            }
            "w_eta_chi" => Family::WEtaChi {
                eta: unit("eta")?,
                chi: unit("chi")?,
            },
            "w_v_theta" => Family::WVTheta {
                v: unit("v")?,
                theta: angle()?,
            },
            "colour_noise" => Family::ColourNoise {
                v: unit("v")?,
                theta: angle()?,
            },
            "gen_isotropic" => Family::GenIsotropic {
                v: unit("v")?,
                theta: angle()?,
            },
            _ => unreachable!(),
        };
        Ok(family)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Pure { .. } => "pure",
            Family::BellDiagonal { .. } => "bell_diagonal",
            Family::XState(_) => "x_state",
            Family::RhoX0 { .. } => "rho_x0",
            Family::WEtaChi { .. } => "w_eta_chi",
            Family::WVTheta { .. } => "w_v_theta",
            Family::ColourNoise { .. } => "colour_noise",
            Family::GenIsotropic { .. } => "gen_isotropic",
        }
    }

    /// X-state coordinates of the family member.
    pub fn x_params(&self) -> XStateParams {
        match *self {
            Family::Pure { a } => {
                let z = 2.0 * a * a - 1.0;
                let c1 = 2.0 * a * (1.0 - a * a).max(0.0).sqrt();
                XStateParams::new(z, z, c1, -c1, 1.0)
            }
            Family::BellDiagonal { c1, c2, c3 } => XStateParams::bell_diagonal(c1, c2, c3),
            Family::XState(x) => x,
            Family::RhoX0 { b3, c3, sign } => {
                let c1 = sign * ((1.0 + b3) * (c3 - b3)).max(0.0).sqrt();
                XStateParams::new(1.0 - c3 + b3, b3, c1, -c1, c3)
            }
            Family::WEtaChi { eta, chi } => {
                let c1 = -2.0 * eta * (chi * (1.0 - chi)).max(0.0).sqrt();
                XStateParams::new(
                    1.0 - 2.0 * eta * (1.0 - chi),
                    2.0 * eta * chi - 1.0,
                    c1,
                    -c1,
                    2.0 * eta - 1.0,
                )
            }
            Family::WVTheta { v, theta } => {
                let (s, c) = (2.0 * theta).sin_cos();
                XStateParams::new(
                    (2.0 * v - 1.0) * c,
                    c,
                    s,
                    (1.0 - 2.0 * v) * s,
                    2.0 * v - 1.0,
                )
            }
            Family::ColourNoise { v, theta } => {
                let (s, c) = (2.0 * theta).sin_cos();
                XStateParams::new(v * c, v * c, v * s, -v * s, 1.0)
            }
            Family::GenIsotropic { v, theta } => {
                let (s, c) = (2.0 * theta).sin_cos();
                XStateParams::new(v * c, v * c, v * s, -v * s, v)
            }
        }
    }

    /// The density matrix written out directly from the family's definition.
    pub fn matrix(&self) -> Mat4 {
        match *self {
            Family::Pure { a } => ket_projector([a, 0.0, 0.0, (1.0 - a * a).max(0.0).sqrt()]),
            Family::BellDiagonal { c1, c2, c3 } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let weights = [
                    (1.0 + c1 - c2 + c3) / 4.0,
                    (1.0 - c1 + c2 + c3) / 4.0,
                    (1.0 + c1 + c2 - c3) / 4.0,
                    (1.0 - c1 - c2 - c3) / 4.0,
                ];
                let kets = [
                    [h, 0.0, 0.0, h],
                    [h, 0.0, 0.0, -h],
                    [0.0, h, h, 0.0],
                    [0.0, h, -h, 0.0],
                ];
                weights.iter().zip(kets).fold(Mat4::zeros(), |acc, (w, k)| {
                    acc + ket_projector(k) * real(*w)
                })
            }
            Family::XState(x) => x.matrix(),
            Family::RhoX0 { b3, c3, sign } => {
                let off = sign * ((1.0 + b3) * (c3 - b3)).max(0.0).sqrt() / 2.0;
                let mut m = Mat4::zeros();
                m[(0, 0)] = real((1.0 + b3) / 2.0);
                m[(1, 1)] = real((1.0 - c3) / 2.0);
                m[(3, 3)] = real((c3 - b3) / 2.0);
                m[(0, 3)] = real(off);
                m[(3, 0)] = real(off);
                m
            }
            Family::WEtaChi { eta, chi } => {
                let off = -eta * (chi * (1.0 - chi)).max(0.0).sqrt();
                let mut m = Mat4::zeros();
                m[(0, 0)] = real(eta * chi);
                m[(1, 1)] = real(1.0 - eta);
                m[(3, 3)] = real(eta * (1.0 - chi));
                m[(0, 3)] = real(off);
                m[(3, 0)] = real(off);
                m
            }
            Family::WVTheta { v, theta } => {
                let (s, c) = theta.sin_cos();
                // psi2 = cos|10> + sin|01>
                ket_projector([c, 0.0, 0.0, s]) * real(v)
                    + ket_projector([0.0, s, c, 0.0]) * real(1.0 - v)
            }
            Family::ColourNoise { v, theta } => {
                let (s, c) = theta.sin_cos();
                ket_projector([c, 0.0, 0.0, s]) * real(v)
                    + (basis_projector(0) + basis_projector(3)) * real((1.0 - v) / 2.0)
            }
            Family::GenIsotropic { v, theta } => {
                let (s, c) = theta.sin_cos();
                ket_projector([c, 0.0, 0.0, s]) * real(v) + Mat4::identity() * real((1.0 - v) / 4.0)
            }
        }
    }

    pub fn density(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::validate(self.matrix(), tol)
    }
}

/// Build and validate the density matrix of a named family.
pub fn make_family(spec: &FamilySpec, tol: &Tolerances) -> Result<DensityMatrix> {
    Family::from_spec(spec)?.density(tol)
}
