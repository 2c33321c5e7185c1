//! Regular (theta, phi) lattices on the sphere.

use std::f64::consts::{PI, TAU};

use crate::coherent::UnitVector;
use crate::error::{Error, Result};

/// Values on the lattice `theta_i = pi i / (n_theta - 1)` (both poles included),
/// `phi_j = 2 pi j / n_phi` (2pi excluded). Stored row-major by theta.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    values: Vec<f64>,
}

impl SphereGrid {
    pub fn try_evaluate<F>(n_theta: usize, n_phi: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&UnitVector) -> Result<f64>,
    {
        if n_theta < 2 || n_phi < 1 {
            return Err(Error::InvalidArgument(format!(
                "grid needs n_theta >= 2 and n_phi >= 1, got {n_theta}x{n_phi}"
            )));
        }
        let mut values = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            for j in 0..n_phi {
                let n = UnitVector::from_angles(Self::theta_at(n_theta, i), Self::phi_at(n_phi, j));
                values.push(f(&n)?);
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            values,
        })
    }

    fn theta_at(n_theta: usize, i: usize) -> f64 {
        if i + 1 == n_theta {
            PI
        } else {
            PI * i as f64 / (n_theta - 1) as f64
        }
    }

    fn phi_at(n_phi: usize, j: usize) -> f64 {
        TAU * j as f64 / n_phi as f64
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn theta(&self, i: usize) -> f64 {
        Self::theta_at(self.n_theta, i)
    }

    pub fn phi(&self, j: usize) -> f64 {
        Self::phi_at(self.n_phi, j)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_phi + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Lattice points in storage order.
    pub fn points(&self) -> impl Iterator<Item = UnitVector> + '_ {
        (0..self.n_theta).flat_map(move |i| {
            (0..self.n_phi).map(move |j| UnitVector::from_angles(self.theta(i), self.phi(j)))
        })
    }

    /// `(theta, phi, value)` triples in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.n_theta).flat_map(move |i| {
            (0..self.n_phi).map(move |j| (self.theta(i), self.phi(j), self.value(i, j)))
        })
    }
}
