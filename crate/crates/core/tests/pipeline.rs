use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinframe::reconstruction::derive_seed;
use spinframe::*;

fn det_at(spin: SpinParameter, fixed: &[UnitVector], trial: UnitVector) -> f64 {
    let mut points = fixed.to_vec();
    points.push(trial);
    GramMatrix::from_points(spin, &points)
        .entries()
        .clone()
        .determinant()
}

#[test]
fn landscape_grid_matches_pointwise_determinant() {
    let spin = SpinParameter::ONE;
    let c = random_constellation(spin, 12);
    let fixed = &c.points()[..4];
    let grid = det_landscape(fixed, spin, 7, 9).unwrap();
    for (theta, phi, v) in grid.rows() {
        let direct = det_at(spin, fixed, UnitVector::from_angles(theta, phi));
        assert!((v - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }
    let at_fixed = det_at(spin, fixed, fixed[2]);
    assert!(at_fixed.abs() < 1e-12);
}

#[test]
fn landscape_is_smooth_under_finite_differences() {
    let spin = SpinParameter::ONE;
    let c = random_constellation(spin, 3);
    let fixed = &c.points()[..3];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 20 {
        let theta = rng.random_range(0.3..2.8);
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let f = |t: f64, p: f64| det_at(spin, fixed, UnitVector::from_angles(t, p));
        let grad = |h: f64| {
            [
                (f(theta + h, phi) - f(theta - h, phi)) / (2.0 * h),
                (f(theta, phi + h) - f(theta, phi - h)) / (2.0 * h),
            ]
        };
        let (g4, g5) = (grad(1e-4), grad(1e-5));
        let norm = g4[0].hypot(g4[1]);
        if norm < 1e-3 {
            continue;
        }
        let diff = (g4[0] - g5[0]).hypot(g4[1] - g5[1]);
        assert!(diff <= 0.01 * norm, "gradient {g4:?} vs {g5:?}");
        checked += 1;
    }
}

#[test]
fn random_spin_one_frames_are_almost_surely_nonsingular() {
    let spin = SpinParameter::ONE;
    let good = (0..1000)
        .filter(|&seed| !gram_matrix(&random_constellation(spin, seed)).is_singular(DEFAULT_TAU))
        .count();
    assert!(good >= 990, "{good}/1000");
}

#[test]
fn repeated_points_in_good_frames_are_usually_repairable() {
    for (twice, floor) in [(1u32, 0.98), (2, 0.9)] {
        let spin = SpinParameter::from_twice(twice);
        let (mut tried, mut repaired) = (0, 0);
        for seed in 0..400u64 {
            let base = random_constellation(spin, seed);
            if gram_matrix(&base).condition_number() >= 1e3 {
                continue;
            }
            let target = base.with_point(1 + (seed as usize) % 3, base.points()[0]);
            tried += 1;
            repaired +=
                usize::from(build_nonsingular(&target, &RepairOptions::new(1e-2, seed)).is_ok());
        }
        assert!(
            repaired as f64 >= floor * tried as f64,
            "2s={twice}: {repaired}/{tried}"
        );
    }
}

#[test]
fn binomial_counts_concentrate() {
    let spin = SpinParameter::ONE;
    let frame = FrameSystem::new(fibonacci_constellation(spin));
    let rho = random_density_matrix(spin, 3, 4).unwrap();
    let exact = discrete_q_symbol(&rho, &frame).unwrap();
    let shots = 10_000_000u64;
    let (mut inside, mut total) = (0, 0);
    for seed in 0..40 {
        let sample = simulate_measurement(&rho, &frame, shots, seed).unwrap();
        for (q, p) in sample.values.iter().zip(&exact.values) {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            inside += usize::from((q - p).abs() <= 5.0 * sigma);
            total += 1;
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
}

#[test]
fn pure_state_at_frame_point_is_certain() {
    let spin = SpinParameter::from_twice(3);
    let frame = FrameSystem::new(fibonacci_constellation(spin));
    let n1 = frame.constellation().points()[0];
    let rho = projector(&coherent_state(spin, &n1)).operator().clone();
    for seed in 0..5 {
        let q = simulate_measurement(&rho, &frame, 17, seed).unwrap();
        assert_eq!(q.values[0], 1.0);
    }
}

#[test]
fn measurement_is_seed_deterministic() {
    let spin = SpinParameter::ONE;
    let frame = FrameSystem::new(random_constellation(spin, 5));
    let rho = random_density_matrix(spin, 2, 9).unwrap();
    let a = simulate_measurement(&rho, &frame, 1000, 77).unwrap();
    let b = simulate_measurement(&rho, &frame, 1000, 77).unwrap();
    assert_eq!(a.values, b.values);
    let c = simulate_measurement(&rho, &frame, 1000, 78).unwrap();
    assert_ne!(a.values, c.values);
}

#[test]
fn noise_amplification_is_bounded_by_conditioning() {
    for twice in 1..=4u32 {
        let spin = SpinParameter::from_twice(twice);
        let frame = (0..)
            .map(|s| FrameSystem::new(random_constellation(spin, derive_seed(9, s))))
            .find(|f| f.condition_number() < 1e6)
            .unwrap();
        let rho = random_density_matrix(spin, 1, u64::from(twice)).unwrap();
        let q = discrete_q_symbol(&rho, &frame).unwrap();
        let base = reconstruct(&q, &frame).unwrap();
        let bound = 1.0 / frame.gram().lambda_min().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(twice));
        for _ in 0..20 {
            let delta: Vec<f64> = (0..q.values.len())
                .map(|_| rng.random_range(-1e-6..1e-6))
                .collect();
            let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
            let mut noisy = q.clone();
            noisy
                .values
                .iter_mut()
                .zip(&delta)
                .for_each(|(v, d)| *v += d);
            let ratio = reconstruct(&noisy, &frame)
                .unwrap()
                .frobenius_distance(&base)
                / norm;
            assert!(ratio.is_finite());
            assert!(
                ratio <= bound * (1.0 + 1e-6),
                "2s={twice}: {ratio} > {bound}"
            );
            assert!(ratio <= frame.condition_number());
        }
    }
}

#[test]
fn exact_tomography_is_lossless() {
    for twice in 1..=4u32 {
        let spin = SpinParameter::from_twice(twice);
        let frame = FrameSystem::new(fibonacci_constellation(spin));
        let rho = random_density_matrix(spin, 2, 3).unwrap();
        let r = tomography_trial(&rho, &frame, 0, 0, false).unwrap();
        assert!(r.frobenius_error <= 1e-8 * rho.frobenius_norm());
        assert!(r.trace_error <= 1e-9);
        assert!(r.repaired.is_none());
    }
}

#[test]
fn noisy_tomography_with_repair_gives_a_state() {
    let spin = SpinParameter::ONE;
    let frame = FrameSystem::new(fibonacci_constellation(spin));
    let rho = random_density_matrix(spin, 1, 6).unwrap();
    let r = tomography_trial(&rho, &frame, 200, 3, true).unwrap();
    assert!(r.trace_error < 0.5);
    r.repaired.unwrap().check_density(1e-10).unwrap();
}

#[test]
fn optimizer_never_worsens_its_start() {
    for seed in 0..5 {
        let c = random_constellation(SpinParameter::ONE, seed);
        let cfg = OptimizationConfig {
            iterations: 200,
            seed,
            ..OptimizationConfig::default()
        };
        let trace = optimize(&c, &cfg).unwrap();
        assert!(trace.best_objective <= trace.initial_objective);
        let again = objective_eval(&trace.best, Objective::ConditionNumber);
        assert_eq!(again, trace.best_objective);
    }
}
