//! Constellations of `(2s+1)^2` directions, their Gram matrices and dual operator
//! bases.
//!
//! The projectors `Q_n = |m_n><m_n|` on the coherent states of a constellation
//! span the operator space exactly when the Gram matrix
//! `G_nn' = Tr[Q_n Q_n'] = ((1 + m_n . m_n') / 2)^(2s)` is non-singular. Duals are
//! stored without the `1/(2s+1)` prefactor: `D^n = sum_n' (G^-1)_nn' Q_n'`, so
//! that `Tr[Q_n D^n'] = delta` and `A = sum_n Tr[A D^n] Q_n = sum_n Tr[A Q_n] D^n`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coherent::{coherent_state, projector, Projector, UnitVector};
use crate::error::{Error, Result};
use crate::grid::SphereGrid;
use crate::operator::HermitianOperator;
use crate::spin::SpinParameter;

/// Default relative rank threshold: singular iff `lambda_min < tau * lambda_max`.
pub const DEFAULT_TAU: f64 = 1e-10;

/// Default number of shrinking-radius attempts per point in [`build_nonsingular`].
pub const DEFAULT_RETRY_BUDGET: usize = 40;
/// Cap samples drawn at each radius of the schedule.
pub const DEFAULT_SAMPLES_PER_RADIUS: usize = 16;

/// An ordered list of exactly `(2s+1)^2` directions.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    spin: SpinParameter,
    points: Vec<UnitVector>,
}

impl Constellation {
    pub fn new(spin: SpinParameter, points: Vec<UnitVector>) -> Result<Self> {
        if points.len() != spin.n_states() {
            return Err(Error::WrongPointCount {
                twice_s: spin.twice_s(),
                expected: spin.n_states(),
                found: points.len(),
            });
        }
        Ok(Self { spin, points })
    }

    pub fn spin(&self) -> SpinParameter {
        self.spin
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Canonical text form hashed by [`Constellation::hash`]: `2s` followed by
    /// every `(theta, phi)` pair in 17-significant-digit scientific notation.
    pub fn canonical_string(&self) -> String {
        canonical_string(self.spin, &self.points)
    }

    /// Hex SHA-256 of [`Constellation::canonical_string`].
    pub fn hash(&self) -> String {
        points_hash(self.spin, &self.points)
    }

    /// Same constellation with every point rotated by a 3x3 rotation matrix.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        Self {
            spin: self.spin,
            points: self.points.iter().map(|p| p.rotated(r)).collect(),
        }
    }

    pub fn with_point(&self, index: usize, point: UnitVector) -> Self {
        let mut points = self.points.clone();
        points[index] = point;
        Self {
            spin: self.spin,
            points,
        }
    }
}

fn canonical_string(spin: SpinParameter, points: &[UnitVector]) -> String {
    let mut out = format!("twice_s={}", spin.twice_s());
    for p in points {
        out.push_str(&format!(";{:.16e},{:.16e}", p.theta(), p.phi()));
    }
    out
}

/// Content hash of any point list, full constellation or not.
pub fn points_hash(spin: SpinParameter, points: &[UnitVector]) -> String {
    Sha256::digest(canonical_string(spin, points).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Sum of chord distances between corresponding points.
pub fn constellation_distance(a: &Constellation, b: &Constellation) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| p.chord_distance(q))
        .sum())
}

/// `((1 + a.b) / 2)^(2s)` from the closed form.
pub fn gram_entry(spin: SpinParameter, a: &UnitVector, b: &UnitVector) -> f64 {
    let base = ((1.0 + a.dot(b)) / 2.0).clamp(0.0, 1.0);
    base.powi(spin.twice_s() as i32)
}

fn gram_entries(spin: SpinParameter, points: &[UnitVector]) -> DMatrix<f64> {
    let k = points.len();
    let mut g = DMatrix::from_element(k, k, 1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            let v = gram_entry(spin, &points[i], &points[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Gram matrix together with its symmetric eigendecomposition.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    // descending
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl GramMatrix {
    pub fn from_points(spin: SpinParameter, points: &[UnitVector]) -> Self {
        Self::from_entries(gram_entries(spin, points))
    }

    fn from_entries(entries: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(entries.clone());
        let mut order: Vec<usize> = (0..entries.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(entries.nrows(), entries.ncols(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        Self {
            entries,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Singular values (absolute eigenvalues) in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.eigenvalues.iter().map(|l| l.abs()).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty Gram matrix")
    }

    /// `lambda_min / lambda_max`.
    pub fn rank_ratio(&self) -> f64 {
        self.lambda_min() / self.lambda_max()
    }

    /// `lambda_max / lambda_min`, or `+inf` when `lambda_min <= 0`.
    pub fn condition_number(&self) -> f64 {
        let lo = self.lambda_min();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            self.lambda_max() / lo
        }
    }

    /// `sum_i ln |lambda_i|`; `-inf` if some eigenvalue is exactly zero.
    pub fn log_abs_det(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs().ln()).sum()
    }

    pub fn is_singular(&self, tau: f64) -> bool {
        is_singular(self, tau)
    }

    /// `V diag(1/lambda) V^T`.
    pub fn inverse(&self, tau: f64) -> Result<DMatrix<f64>> {
        if self.is_singular(tau) {
            return Err(Error::SingularFrame {
                ratio: self.rank_ratio(),
                tau,
            });
        }
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col /= self.eigenvalues[k];
        }
        let inv = scaled * v.transpose();
        Ok((&inv + inv.transpose()) * 0.5)
    }
}

pub fn gram_matrix(c: &Constellation) -> GramMatrix {
    GramMatrix::from_points(c.spin, &c.points)
}

/// Scale-invariant rank test `lambda_min < tau * lambda_max`.
pub fn is_singular(g: &GramMatrix, tau: f64) -> bool {
    let (lo, hi) = (g.lambda_min(), g.lambda_max());
    lo.is_nan() || hi.is_nan() || lo < tau * hi
}

/// A point moved by [`build_nonsingular`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub index: usize,
    /// Number of candidates drawn, including the successful one.
    pub attempts: usize,
    /// Angular radius of the cap the accepted candidate was drawn from.
    pub radius: f64,
    /// Chord distance between the accepted candidate and the target point.
    pub displacement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub epsilon: f64,
    pub tau: f64,
    pub seed: u64,
    pub perturbations: Vec<Perturbation>,
    /// Distance between the returned constellation and the target.
    pub distance: f64,
    pub rank_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepairOptions {
    pub epsilon: f64,
    pub tau: f64,
    pub retry_budget: usize,
    pub samples_per_radius: usize,
    pub seed: u64,
}

impl RepairOptions {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            tau: DEFAULT_TAU,
            retry_budget: DEFAULT_RETRY_BUDGET,
            samples_per_radius: DEFAULT_SAMPLES_PER_RADIUS,
            seed,
        }
    }
}

/// Walks the constellation in order, keeping point `k` whenever the leading
/// `k x k` Gram submatrix passes the rank test and otherwise replacing it by a
/// random point from a cap of radius `(epsilon / N_s) 2^-j`, `j = 0..=budget`,
/// drawing `samples_per_radius` candidates at each radius and keeping the one
/// with the largest `lambda_min / lambda_max`.
///
/// Every replaced point lies strictly within `epsilon / N_s` of its target, so
/// the result is within `epsilon` of the target in [`constellation_distance`].
pub fn build_nonsingular(
    target: &Constellation,
    opts: &RepairOptions,
) -> Result<(Constellation, RepairReport)> {
    if opts.epsilon.is_nan() || opts.epsilon <= 0.0 || !opts.epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {}",
            opts.epsilon
        )));
    }
    if !(opts.tau > 0.0 && opts.tau < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must lie in (0, 1), got {}",
            opts.tau
        )));
    }
    let spin = target.spin;
    let n_states = spin.n_states();
    let base_radius = opts.epsilon / n_states as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut accepted: Vec<UnitVector> = Vec::with_capacity(n_states);
    let mut perturbations = Vec::new();

    let passes =
        |points: &[UnitVector]| !GramMatrix::from_points(spin, points).is_singular(opts.tau);

    for (index, &goal) in target.points.iter().enumerate() {
        accepted.push(goal);
        if passes(&accepted) {
            continue;
        }
        let mut found = None;
        let mut radius = base_radius;
        let mut attempts = 0;
        for level in 0..=opts.retry_budget {
            radius = base_radius * 0.5f64.powi(level as i32);
            // keep the best-conditioned passing sample so later points have headroom
            let mut best: Option<(f64, UnitVector)> = None;
            for _ in 0..opts.samples_per_radius.max(1) {
                attempts += 1;
                let candidate = goal.sample_in_cap(radius, &mut rng);
                // chord < geodesic angle < radius, up to rounding in the conversion
                if candidate.chord_distance(&goal) >= base_radius {
                    continue;
                }
                accepted[index] = candidate;
                let g = GramMatrix::from_points(spin, &accepted);
                if !g.is_singular(opts.tau) && best.is_none_or(|(r, _)| g.rank_ratio() > r) {
                    best = Some((g.rank_ratio(), candidate));
                }
            }
            if let Some((_, candidate)) = best {
                accepted[index] = candidate;
                found = Some((attempts, candidate));
                break;
            }
        }
        match found {
            Some((attempts, candidate)) => perturbations.push(Perturbation {
                index,
                attempts,
                radius,
                displacement: candidate.chord_distance(&goal),
            }),
            None => {
                return Err(Error::BudgetExhausted {
                    index,
                    attempts,
                    radius,
                })
            }
        }
    }

    let repaired = Constellation::new(spin, accepted)?;
    let distance = constellation_distance(&repaired, target)?;
    let rank_ratio = gram_matrix(&repaired).rank_ratio();
    Ok((
        repaired,
        RepairReport {
            epsilon: opts.epsilon,
            tau: opts.tau,
            seed: opts.seed,
            perturbations,
            distance,
            rank_ratio,
        },
    ))
}

/// A constellation with its projectors, Gram spectrum and (when non-singular)
/// the dual basis.
#[derive(Clone, Debug)]
pub struct FrameSystem {
    constellation: Constellation,
    hash: String,
    projectors: Vec<Projector>,
    gram: GramMatrix,
    tau: f64,
    gram_inverse: Option<DMatrix<f64>>,
    duals: Option<Vec<HermitianOperator>>,
}

impl FrameSystem {
    pub fn new(constellation: Constellation) -> Self {
        Self::with_tau(constellation, DEFAULT_TAU)
    }

    pub fn with_tau(constellation: Constellation, tau: f64) -> Self {
        let spin = constellation.spin;
        let projectors: Vec<Projector> = constellation
            .points
            .iter()
            .map(|p| projector(&coherent_state(spin, p)))
            .collect();
        let gram = gram_matrix(&constellation);
        let gram_inverse = gram.inverse(tau).ok();
        let duals = gram_inverse
            .as_ref()
            .map(|_| dual_operators(&projectors, spin.dim()));
        let hash = constellation.hash();
        Self {
            constellation,
            hash,
            projectors,
            gram,
            tau,
            gram_inverse,
            duals,
        }
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn spin(&self) -> SpinParameter {
        self.constellation.spin
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn condition_number(&self) -> f64 {
        self.gram.condition_number()
    }

    pub fn is_singular(&self) -> bool {
        self.duals.is_none()
    }

    fn singular_error(&self) -> Error {
        Error::SingularFrame {
            ratio: self.gram.rank_ratio(),
            tau: self.tau,
        }
    }

    pub fn gram_inverse(&self) -> Result<&DMatrix<f64>> {
        self.gram_inverse
            .as_ref()
            .ok_or_else(|| self.singular_error())
    }

    pub fn duals(&self) -> Result<&[HermitianOperator]> {
        self.duals.as_deref().ok_or_else(|| self.singular_error())
    }

    /// `max_{n,n'} |Tr[Q_n D^n'] - delta_nn'|`.
    pub fn duality_residual(&self) -> Result<f64> {
        let duals = self.duals()?;
        let mut worst = 0.0_f64;
        for (n, q) in self.projectors.iter().enumerate() {
            for (m, d) in duals.iter().enumerate() {
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((q.operator().trace_product(d) - target).abs());
            }
        }
        Ok(worst)
    }
}

/// `D^n = sum_n' (G^-1)_nn' Q_n'`, evaluated as the columns of `Phi^-T`
/// where the columns of the square matrix `Phi` are the Hilbert-Schmidt
/// coordinates of the projectors (`G = Phi^T Phi`). With `Phi = U S W^T`,
/// `Phi^-T = U S^-1 W^T`; this loses accuracy like `cond(Phi) = sqrt(cond(G))`
/// rather than `cond(G)`.
fn dual_operators(projectors: &[Projector], dim: usize) -> Vec<HermitianOperator> {
    let n = projectors.len();
    let coords: Vec<Vec<f64>> = projectors
        .iter()
        .map(|p| p.operator().hs_coordinates())
        .collect();
    let phi = DMatrix::from_fn(n, n, |i, j| coords[j][i]);
    let svd = phi.svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let w_t = svd.v_t.expect("right singular vectors");
    let mut scaled = u;
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col /= svd.singular_values[k];
    }
    let phi_inv_t = scaled * w_t;
    (0..n)
        .map(|m| {
            let col: Vec<f64> = phi_inv_t.column(m).iter().copied().collect();
            HermitianOperator::from_hs_coordinates(dim, &col).expect("square frame")
        })
        .collect()
}

/// Dual basis `D^n = sum_n' (G^-1)_nn' Q_n'` of a frame; refuses singular frames.
pub fn dual_basis(frame: &FrameSystem) -> Result<Vec<HermitianOperator>> {
    frame.duals().map(<[_]>::to_vec)
}

/// `det G(k)` as a function of the k-th direction with the first `k - 1`
/// directions held fixed, sampled on a [`SphereGrid`].
pub fn det_landscape(
    fixed: &[UnitVector],
    spin: SpinParameter,
    n_theta: usize,
    n_phi: usize,
) -> Result<SphereGrid> {
    if fixed.len() >= spin.n_states() {
        return Err(Error::InvalidArgument(format!(
            "landscape takes at most {} fixed points for 2s = {}, got {}",
            spin.n_states() - 1,
            spin.twice_s(),
            fixed.len()
        )));
    }
    let k = fixed.len() + 1;
    let base = gram_entries(spin, fixed);
    SphereGrid::try_evaluate(n_theta, n_phi, |trial| {
        let mut g = DMatrix::from_element(k, k, 1.0);
        g.view_mut((0, 0), (k - 1, k - 1)).copy_from(&base);
        for (i, p) in fixed.iter().enumerate() {
            let v = gram_entry(spin, p, trial);
            g[(i, k - 1)] = v;
            g[(k - 1, i)] = v;
        }
        Ok(g.determinant())
    })
}

/// I.i.d. uniform points on the sphere from a seeded ChaCha8 stream.
pub fn random_constellation(spin: SpinParameter, seed: u64) -> Constellation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..spin.n_states())
        .map(|_| UnitVector::random(&mut rng))
        .collect();
    Constellation { spin, points }
}

/// Golden-angle spiral: `z_i = 1 - (2i + 1) / N`, `phi_i = i * pi (3 - sqrt 5)`.
pub fn fibonacci_constellation(spin: SpinParameter) -> Constellation {
    let n = spin.n_states();
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            UnitVector::from_angles(z.acos(), (i as f64 * golden_angle) % TAU)
        })
        .collect();
    Constellation { spin, points }
}

/// Regular tetrahedron, the four-point constellation for spin 1/2.
pub fn tetrahedron() -> Constellation {
    let r = 1.0 / 3f64.sqrt();
    let points = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
    .iter()
    .map(|v| UnitVector::from_cartesian(v[0] * r, v[1] * r, v[2] * r).expect("unit"))
    .collect();
    Constellation {
        spin: SpinParameter::HALF,
        points,
    }
}
