//! Spin-coherent states, their projectors and the continuous Q-symbol.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::SphereGrid;
use crate::operator::HermitianOperator;
use crate::spin::{rotation_operator, SpinParameter};

/// Tolerance on `|n| - 1` for vectors supplied in Cartesian form.
pub const UNIT_TOL: f64 = 1e-12;

/// Tolerance on the imaginary part of an expectation value, relative to `1 + |value|`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-11;

/// A point on the unit sphere, carrying both its polar angles and Cartesian
/// components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector {
    theta: f64,
    phi: f64,
    xyz: [f64; 3],
}

fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl UnitVector {
    /// Builds the vector `(sin t cos p, sin t sin p, cos t)`. Angles outside
    /// `theta in [0, pi]`, `phi in [0, 2pi)` are folded back into range while
    /// describing the same point.
    ///
    /// Panics on non-finite angles; use [`UnitVector::try_from_angles`] for
    /// untrusted input.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::try_from_angles(theta, phi).expect("finite angles")
    }

    pub fn try_from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::NonFiniteAngle { theta, phi });
        }
        let (mut theta, mut phi) = (theta, phi);
        if !(0.0..=PI).contains(&theta) {
            theta = theta.rem_euclid(TAU);
            if theta > PI {
                theta = TAU - theta;
                phi += PI;
            }
        }
        let phi = wrap_phi(phi);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Ok(Self {
            theta,
            phi,
            xyz: [st * cp, st * sp, ct],
        })
    }

    /// Accepts `(x, y, z)` with `| |n| - 1 | <= 1e-12`, keeping the components
    /// as given. At the poles `phi` is 0.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnitVector { norm });
        }
        Ok(Self::from_cartesian_unchecked(x, y, z))
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotUnitVector { norm });
        }
        Ok(Self::from_cartesian_unchecked(x / norm, y / norm, z / norm))
    }

    fn from_cartesian_unchecked(x: f64, y: f64, z: f64) -> Self {
        let rho = x.hypot(y);
        let theta = rho.atan2(z);
        let phi = if rho == 0.0 {
            0.0
        } else {
            wrap_phi(y.atan2(x))
        };
        Self {
            theta,
            phi,
            xyz: [x, y, z],
        }
    }

    pub fn north() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    pub fn south() -> Self {
        Self::from_angles(PI, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn x(&self) -> f64 {
        self.xyz[0]
    }

    pub fn y(&self) -> f64 {
        self.xyz[1]
    }

    pub fn z(&self) -> f64 {
        self.xyz[2]
    }

    pub fn to_array(&self) -> [f64; 3] {
        self.xyz
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.xyz
            .iter()
            .zip(other.xyz.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean (chord) distance in R^3.
    pub fn chord_distance(&self, other: &UnitVector) -> f64 {
        self.xyz
            .iter()
            .zip(other.xyz.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `-n`, with the Cartesian components negated exactly.
    pub fn antipode(&self) -> Self {
        let [x, y, z] = self.xyz;
        Self::from_cartesian_unchecked(-x, -y, -z)
    }

    /// Applies a 3x3 rotation matrix (row-major).
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        let v = self.xyz;
        let out: Vec<f64> = r
            .iter()
            .map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
            .collect();
        Self::normalized(out[0], out[1], out[2]).expect("rotation preserves norm")
    }

    /// Moves the point along the great circle leaving it in tangent direction
    /// `bearing` (measured from the local `e_theta` towards `e_phi`) by the
    /// geodesic angle `angle`.
    pub fn displaced(&self, angle: f64, bearing: f64) -> Self {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        let e_theta = [ct * cp, ct * sp, -st];
        let e_phi = [-sp, cp, 0.0];
        let (sb, cb) = bearing.sin_cos();
        let (sa, ca) = angle.sin_cos();
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = ca * self.xyz[k] + sa * (cb * e_theta[k] + sb * e_phi[k]);
        }
        Self::normalized(out[0], out[1], out[2]).expect("displacement preserves norm")
    }

    /// Uniform sample from the open geodesic cap of angular radius `radius`
    /// around `self`.
    pub fn sample_in_cap<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> Self {
        let u: f64 = rng.random();
        let bearing = rng.random::<f64>() * TAU;
        // equal-area: sin^2(a/2) = u sin^2(r/2)
        let angle = 2.0 * (u.sqrt() * (radius / 2.0).sin()).asin();
        self.displaced(angle, bearing)
    }

    /// Uniform sample on the whole sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let phi = rng.random::<f64>() * TAU;
        Self::from_angles(z.clamp(-1.0, 1.0).acos(), phi)
    }
}

/// Maximal-weight state `|s, n>` along a direction.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    spin: SpinParameter,
    direction: UnitVector,
    amplitudes: DVector<Complex64>,
}

impl CoherentState {
    pub fn spin(&self) -> SpinParameter {
        self.spin
    }

    pub fn direction(&self) -> &UnitVector {
        &self.direction
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// `<self| A |self>`, with the imaginary residue checked and discarded.
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        if op.dim() != self.spin.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.spin.dim(),
                found: op.dim(),
            });
        }
        let v = &self.amplitudes;
        let z = v.dotc(&(op.matrix() * v));
        if z.im.abs() > IMAG_RESIDUE_TOL * (1.0 + z.re.abs()) {
            return Err(Error::ImaginaryResidue {
                residue: z.im,
                value: z.re,
            });
        }
        Ok(z.re)
    }
}

/// Rank-one projector `|n><n|` on a coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    state: CoherentState,
    mat: HermitianOperator,
}

impl Projector {
    pub fn state(&self) -> &CoherentState {
        &self.state
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.mat
    }
}

/// Rotates `|s, n_z>` by `exp(-i theta m(phi) . s)` and keeps the image of the
/// highest-weight basis vector.
pub fn coherent_state(spin: SpinParameter, n: &UnitVector) -> CoherentState {
    let u = rotation_operator(spin, n.theta(), n.phi());
    CoherentState {
        spin,
        direction: *n,
        amplitudes: u.column(0).into_owned(),
    }
}

pub fn overlap(a: &CoherentState, b: &CoherentState) -> Result<Complex64> {
    if a.spin != b.spin {
        return Err(Error::SpinMismatch {
            left: a.spin.twice_s(),
            right: b.spin.twice_s(),
        });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

pub fn projector(state: &CoherentState) -> Projector {
    let v = &state.amplitudes;
    let mat = HermitianOperator::symmetrize(v * v.adjoint());
    Projector {
        state: state.clone(),
        mat,
    }
}

/// Q-symbol `<n| A |n>` at a single direction.
pub fn q_symbol(op: &HermitianOperator, n: &UnitVector) -> Result<f64> {
    let d = op.dim();
    if d == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let spin = SpinParameter::from_twice(d as u32 - 1);
    coherent_state(spin, n).expectation(op)
}

/// Q-symbol sampled on the regular lattice of [`SphereGrid`].
pub fn q_symbol_grid(op: &HermitianOperator, n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
    SphereGrid::try_evaluate(n_theta, n_phi, |n| q_symbol(op, n))
}
