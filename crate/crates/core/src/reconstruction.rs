//! Discrete Q- and P-symbols, linear reconstruction and a shot-noise tomography
//! simulator.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSystem;
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::spin::SpinParameter;

/// Tolerance for the density-matrix checks of [`simulate_measurement`].
pub const DENSITY_TOL: f64 = 1e-10;

/// Probabilities this close to 0 or 1 are treated as exactly 0 or 1 when sampling.
const PROBABILITY_SNAP: f64 = 1e-12;

/// Values `q_n = Tr[A Q_n]` bound to the constellation they were taken on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteQSymbol {
    pub constellation_hash: String,
    pub values: Vec<f64>,
}

/// Coefficients `A^n = Tr[A D^n]` with `A = sum_n A^n Q_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePSymbol {
    pub constellation_hash: String,
    pub values: Vec<f64>,
}

fn check_dim(op: &HermitianOperator, frame: &FrameSystem) -> Result<()> {
    let expected = frame.spin().dim();
    if op.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: op.dim(),
        });
    }
    Ok(())
}

fn check_binding(hash: &str, values: usize, frame: &FrameSystem) -> Result<()> {
    if hash != frame.hash() {
        return Err(Error::HashMismatch {
            expected: frame.hash().to_owned(),
            found: hash.to_owned(),
        });
    }
    if values != frame.projectors().len() {
        return Err(Error::DimensionMismatch {
            expected: frame.projectors().len(),
            found: values,
        });
    }
    Ok(())
}

/// Forward map; defined on singular frames too.
pub fn discrete_q_symbol(op: &HermitianOperator, frame: &FrameSystem) -> Result<DiscreteQSymbol> {
    check_dim(op, frame)?;
    Ok(DiscreteQSymbol {
        constellation_hash: frame.hash().to_owned(),
        values: frame
            .projectors()
            .iter()
            .map(|p| op.trace_product(p.operator()))
            .collect(),
    })
}

/// `A^n = Tr[A D^n]` through the dual operators.
pub fn discrete_p_symbol(op: &HermitianOperator, frame: &FrameSystem) -> Result<DiscretePSymbol> {
    check_dim(op, frame)?;
    let duals = frame.duals()?;
    Ok(DiscretePSymbol {
        constellation_hash: frame.hash().to_owned(),
        values: duals.iter().map(|d| op.trace_product(d)).collect(),
    })
}

/// `A^n = (G^-1 q)_n`, the coordinate route to the same P-symbol.
pub fn p_symbol_from_q(q: &DiscreteQSymbol, frame: &FrameSystem) -> Result<DiscretePSymbol> {
    check_binding(&q.constellation_hash, q.values.len(), frame)?;
    let inv = frame.gram_inverse()?;
    let p = inv * DVector::from_column_slice(&q.values);
    Ok(DiscretePSymbol {
        constellation_hash: q.constellation_hash.clone(),
        values: p.iter().copied().collect(),
    })
}

/// `sum_n A^n Q_n`.
pub fn reassemble(p: &DiscretePSymbol, frame: &FrameSystem) -> Result<HermitianOperator> {
    check_binding(&p.constellation_hash, p.values.len(), frame)?;
    Ok(HermitianOperator::linear_combination(
        frame.spin().dim(),
        p.values
            .iter()
            .zip(frame.projectors())
            .map(|(&c, q)| (c, q.operator())),
    ))
}

/// `A = sum_n q_n D^n`.
pub fn reconstruct(q: &DiscreteQSymbol, frame: &FrameSystem) -> Result<HermitianOperator> {
    check_binding(&q.constellation_hash, q.values.len(), frame)?;
    let duals = frame.duals()?;
    Ok(HermitianOperator::linear_combination(
        frame.spin().dim(),
        q.values.iter().zip(duals).map(|(&c, d)| (c, d)),
    ))
}

/// Samples each `q_n` as the frequency of the outcome "maximal weight along
/// `m_n`" over `shots` independent projective measurements.
pub fn simulate_measurement(
    rho: &HermitianOperator,
    frame: &FrameSystem,
    shots: u64,
    seed: u64,
) -> Result<DiscreteQSymbol> {
    if shots == 0 {
        return Err(Error::InvalidArgument(
            "simulate_measurement needs shots >= 1".into(),
        ));
    }
    check_dim(rho, frame)?;
    rho.check_density(DENSITY_TOL)?;
    let exact = discrete_q_symbol(rho, frame)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(exact.values.len());
    for &p in &exact.values {
        let p = if p < PROBABILITY_SNAP {
            0.0
        } else if p > 1.0 - PROBABILITY_SNAP {
            1.0
        } else {
            p
        };
        let hits = Binomial::new(shots, p)
            .map_err(|e| Error::InvalidArgument(format!("binomial({shots}, {p}): {e}")))?
            .sample(&mut rng);
        values.push(hits as f64 / shots as f64);
    }
    Ok(DiscreteQSymbol {
        constellation_hash: exact.constellation_hash,
        values,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TomographyResult {
    pub reconstructed: HermitianOperator,
    /// `||rho_rec - rho||_F`.
    pub frobenius_error: f64,
    /// `|Tr rho_rec - 1|`.
    pub trace_error: f64,
    /// Smallest eigenvalue of the linear reconstruction.
    pub eigenvalue_floor: f64,
    /// 0 means exact expectation values.
    pub shots_per_point: u64,
    /// Clipped-and-renormalized reconstruction, when requested.
    pub repaired: Option<HermitianOperator>,
}

/// Simulates measurement (or takes exact values when `shots == 0`),
/// reconstructs linearly and scores against `rho`.
///
/// `psd_repair` additionally reports the reconstruction with negative
/// eigenvalues clipped and the trace renormalized; the error metrics always
/// refer to the linear reconstruction.
pub fn tomography_trial(
    rho: &HermitianOperator,
    frame: &FrameSystem,
    shots: u64,
    seed: u64,
    psd_repair: bool,
) -> Result<TomographyResult> {
    let data = if shots == 0 {
        check_dim(rho, frame)?;
        rho.check_density(DENSITY_TOL)?;
        discrete_q_symbol(rho, frame)?
    } else {
        simulate_measurement(rho, frame, shots, seed)?
    };
    let reconstructed = reconstruct(&data, frame)?;
    let frobenius_error = reconstructed.frobenius_distance(rho);
    let trace_error = (reconstructed.trace() - 1.0).abs();
    let eigenvalue_floor = reconstructed.eigenvalues()[0];
    let repaired = psd_repair.then(|| reconstructed.psd_repair());
    Ok(TomographyResult {
        reconstructed,
        frobenius_error,
        trace_error,
        eigenvalue_floor,
        shots_per_point: shots,
        repaired,
    })
}

/// One row of a tomography sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub shots: u64,
    pub frobenius_error: f64,
    pub trace_error: f64,
    pub eigenvalue_floor: f64,
    /// Error of the clipped-and-renormalized state, when repair was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repaired_frobenius_error: Option<f64>,
}

/// Runs `n_seeds` trials for each shot count. Trial `t` uses the seed
/// [`derive_seed`]`(master_seed, t)`, shared across shot counts.
pub fn tomography_sweep(
    rho: &HermitianOperator,
    frame: &FrameSystem,
    shots: &[u64],
    n_seeds: usize,
    master_seed: u64,
    psd_repair: bool,
) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::with_capacity(shots.len() * n_seeds);
    for &n in shots {
        for t in 0..n_seeds {
            let seed = derive_seed(master_seed, t as u64);
            let r = tomography_trial(rho, frame, n, seed, psd_repair)?;
            records.push(TrialRecord {
                seed,
                shots: n,
                frobenius_error: r.frobenius_error,
                trace_error: r.trace_error,
                eigenvalue_floor: r.eigenvalue_floor,
                repaired_frobenius_error: r.repaired.map(|op| op.frobenius_distance(rho)),
            });
        }
    }
    Ok(records)
}

/// Per-stream seed derived from a master seed (SplitMix64 finalizer), so that
/// trial `t` is reproducible independently of how trials are scheduled.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `B B^dagger / Tr[B B^dagger]` with `B` a `d x rank` matrix of standard
/// complex Gaussians.
pub fn random_density_matrix(
    spin: SpinParameter,
    rank: usize,
    seed: u64,
) -> Result<HermitianOperator> {
    let d = spin.dim();
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!(
            "rank must lie in 1..={d}, got {rank}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = ComplexMatrix::from_fn(d, rank, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let bb = HermitianOperator::symmetrize(&b * b.adjoint());
    Ok(bb.scaled(1.0 / bb.trace()))
}
