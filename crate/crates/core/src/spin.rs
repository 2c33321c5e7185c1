//! Matrix representation of the spin-`s` algebra in the `s_z` eigenbasis.
//!
//! Basis index `i` carries magnetic quantum number `mu = s - i`, so the highest
//! weight state `|s, n_z>` is basis vector 0. Ladder matrix elements follow the
//! Condon-Shortley convention (real and non-negative).

use std::fmt;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::UnitVector;
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};

/// Spin quantum number stored as the integer `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinParameter {
    twice_s: u32,
}

impl SpinParameter {
    pub const HALF: SpinParameter = SpinParameter { twice_s: 1 };
    pub const ONE: SpinParameter = SpinParameter { twice_s: 2 };

    pub const fn from_twice(twice_s: u32) -> Self {
        Self { twice_s }
    }

    pub const fn twice_s(self) -> u32 {
        self.twice_s
    }

    pub fn s(self) -> f64 {
        f64::from(self.twice_s) / 2.0
    }

    /// Hilbert space dimension `2s + 1`.
    pub const fn dim(self) -> usize {
        self.twice_s as usize + 1
    }

    /// Number of real parameters of a Hermitian operator, `(2s + 1)^2`.
    pub const fn n_states(self) -> usize {
        self.dim() * self.dim()
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn mu(self, index: usize) -> f64 {
        self.s() - index as f64
    }
}

impl fmt::Display for SpinParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_s.is_multiple_of(2) {
            write!(f, "{}", self.twice_s / 2)
        } else {
            write!(f, "{}/2", self.twice_s)
        }
    }
}

impl FromStr for SpinParameter {
    type Err = Error;

    /// Accepts `"3/2"`, `"1"` or `"0.5"`-style spins.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a spin value: {text:?}"));
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "2" => Ok(Self::from_twice(num)),
                "1" => Ok(Self::from_twice(2 * num)),
                _ => Err(bad()),
            };
        }
        let value: f64 = text.parse().map_err(|_| bad())?;
        let twice = 2.0 * value;
        if twice < 0.0 || twice.fract() != 0.0 || twice > f64::from(u32::MAX) {
            return Err(bad());
        }
        Ok(Self::from_twice(twice as u32))
    }
}

/// Raising operator: `<mu+1| s_+ |mu> = sqrt(s(s+1) - mu(mu+1))`, on the
/// superdiagonal.
pub fn ladder_plus(spin: SpinParameter) -> ComplexMatrix {
    let d = spin.dim();
    let s = spin.s();
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        let mu = spin.mu(i);
        m[(i - 1, i)] = Complex64::new((s * (s + 1.0) - mu * (mu + 1.0)).sqrt(), 0.0);
    }
    m
}

pub fn ladder_minus(spin: SpinParameter) -> ComplexMatrix {
    ladder_plus(spin).adjoint()
}

pub fn spin_x(spin: SpinParameter) -> HermitianOperator {
    let plus = ladder_plus(spin);
    let minus = plus.adjoint();
    HermitianOperator::symmetrize((plus + minus) * Complex64::new(0.5, 0.0))
}

pub fn spin_y(spin: SpinParameter) -> HermitianOperator {
    let plus = ladder_plus(spin);
    let minus = plus.adjoint();
    // (s_+ - s_-) / 2i
    HermitianOperator::symmetrize((plus - minus) * Complex64::new(0.0, -0.5))
}

pub fn spin_z(spin: SpinParameter) -> HermitianOperator {
    let d = spin.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(spin.mu(i), 0.0);
    }
    HermitianOperator::symmetrize(m)
}

/// The component `n . s` along a unit vector.
pub fn spin_component(spin: SpinParameter, n: &UnitVector) -> HermitianOperator {
    let [x, y, z] = n.to_array();
    spin_component_xyz(spin, x, y, z)
}

fn spin_component_xyz(spin: SpinParameter, x: f64, y: f64, z: f64) -> HermitianOperator {
    let d = spin.dim();
    let plus = ladder_plus(spin);
    // n.s = z s_z + ((x - iy) s_+ + (x + iy) s_-) / 2; assembled entrywise so
    // that negating n negates every entry exactly.
    let up = Complex64::new(x, -y);
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(z * spin.mu(i), 0.0);
    }
    for i in 1..d {
        let c = plus[(i - 1, i)].re * 0.5;
        m[(i - 1, i)] = up * c;
        m[(i, i - 1)] = up.conj() * c;
    }
    HermitianOperator::symmetrize(m)
}

/// Rotation axis `m(phi) = (-sin phi, cos phi, 0)` in the xy plane.
pub fn rotation_axis(phi: f64) -> [f64; 3] {
    [-phi.sin(), phi.cos(), 0.0]
}

/// `exp(-i theta m(phi) . s)`, evaluated through the eigendecomposition of the
/// Hermitian generator. Any real angles are accepted; the map is 4pi-periodic
/// in `theta` and 2pi-periodic in `phi`.
pub fn rotation_operator(spin: SpinParameter, theta: f64, phi: f64) -> ComplexMatrix {
    let [x, y, z] = rotation_axis(phi);
    let generator = spin_component_xyz(spin, x, y, z);
    unitary_exp(&generator, theta)
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn unitary_exp(generator: &HermitianOperator, t: f64) -> ComplexMatrix {
    let eig = SymmetricEigen::new(generator.matrix().clone());
    let v = &eig.eigenvectors;
    let phases = eig
        .eigenvalues
        .map(|lambda| Complex64::from_polar(1.0, -t * lambda));
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[k];
    }
    scaled * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs;

    fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> ComplexMatrix {
        a.matrix() * b.matrix() - b.matrix() * a.matrix()
    }

    #[test]
    fn ladder_examples() {
        let s1 = ladder_plus(SpinParameter::ONE);
        // mu = 0 is index 1, mu = +1 is index 0
        assert!((s1[(0, 1)].re - 2f64.sqrt()).abs() < 1e-15);

        let half = ladder_plus(SpinParameter::HALF);
        assert_eq!(half.column(0).iter().map(|z| z.norm()).sum::<f64>(), 0.0);

        // s = 3/2, mu = -1/2 (index 2) -> mu = +1/2 (index 1) with amplitude 2
        let s32 = ladder_plus(SpinParameter::from_twice(3));
        assert!((s32[(1, 2)].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ladder_minus_is_adjoint() {
        for twice in 0..8 {
            let spin = SpinParameter::from_twice(twice);
            assert_eq!(ladder_minus(spin), ladder_plus(spin).adjoint());
        }
    }

    #[test]
    fn spin_z_diagonal() {
        let z = spin_z(SpinParameter::ONE);
        let diag: Vec<f64> = (0..3).map(|i| z.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
        for twice in 0..10 {
            assert_eq!(spin_z(SpinParameter::from_twice(twice)).trace(), 0.0);
        }
    }

    #[test]
    fn commutation_and_casimir() {
        for twice in 0..=10 {
            let spin = SpinParameter::from_twice(twice);
            let (x, y, z) = (spin_x(spin), spin_y(spin), spin_z(spin));
            let i = Complex64::new(0.0, 1.0);
            assert!(max_abs(&(commutator(&x, &y) - z.matrix() * i)) < 1e-12);
            assert!(max_abs(&(commutator(&y, &z) - x.matrix() * i)) < 1e-12);
            assert!(max_abs(&(commutator(&z, &x) - y.matrix() * i)) < 1e-12);

            let casimir =
                x.matrix() * x.matrix() + y.matrix() * y.matrix() + z.matrix() * z.matrix();
            let s = spin.s();
            let target = ComplexMatrix::identity(spin.dim(), spin.dim())
                * Complex64::new(s * (s + 1.0), 0.0);
            assert!(max_abs(&(casimir - target)) < 1e-11);
        }
    }

    #[test]
    fn pauli_x_pattern() {
        let n = UnitVector::from_cartesian(1.0, 0.0, 0.0).unwrap();
        let m = spin_component(SpinParameter::HALF, &n);
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert!(max_abs(&(m.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn component_along_z_is_spin_z() {
        let spin = SpinParameter::from_twice(5);
        assert_eq!(spin_component(spin, &UnitVector::north()), spin_z(spin));
    }

    #[test]
    fn rotation_half_closed_form() {
        let theta = std::f64::consts::FRAC_PI_2;
        let u = rotation_operator(SpinParameter::HALF, theta, 0.0);
        // m(0) = y, so U = cos(theta/2) I - i sin(theta/2) sigma_y
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(c, 0.0),
            ],
        );
        assert!(max_abs(&(u - expected)) < 1e-14);
    }

    #[test]
    fn rotation_identity_at_zero_angle() {
        let u = rotation_operator(SpinParameter::from_twice(4), 0.0, 1.3);
        assert!(max_abs(&(u - ComplexMatrix::identity(5, 5))) < 1e-14);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("3/2".parse::<SpinParameter>().unwrap().twice_s(), 3);
        assert_eq!("2".parse::<SpinParameter>().unwrap().twice_s(), 4);
        assert_eq!("0.5".parse::<SpinParameter>().unwrap().twice_s(), 1);
        assert!("0.3".parse::<SpinParameter>().is_err());
        assert!("-1".parse::<SpinParameter>().is_err());
        assert_eq!(SpinParameter::from_twice(3).to_string(), "3/2");
        assert_eq!(SpinParameter::from_twice(4).to_string(), "2");
    }
}
