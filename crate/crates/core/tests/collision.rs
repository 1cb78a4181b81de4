//! Collision kinematics and the discrete operator against brute-force oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpb_core::collision::{
    collision_invariant_moments, conservative_fix, entropy_production, i_forms, invariant, post_collision, q_ab,
    q_full, CollisionConfig,
};
use vpb_core::{BiMaxwellian, Pair, PlasmaParams, Species, VelocityGrid};

mod common;
use common::{grids_for, oracle_q, random_positive, slices, sup};

#[test]
fn grazing_collision_is_identity() {
    let (a, b) = post_collision([1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 4.0, 1.0).unwrap();
    assert_eq!(a, [1.0, 2.0, 0.0]);
    assert_eq!(b, [0.0, 1.0, 0.0]);
}

#[test]
fn equal_masses_reflect() {
    let w = [2.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0];
    let xi = [0.4, -1.2, 2.0];
    let xs = [-0.3, 0.5, 1.0];
    let (a, _) = post_collision(xi, xs, w, 2.5, 2.5).unwrap();
    let d: f64 = (0..3).map(|k| (xi[k] - xs[k]) * w[k]).sum();
    for k in 0..3 {
        assert!((a[k] - (xi[k] - d * w[k])).abs() < 1e-15);
    }
}

#[test]
fn non_unit_omega_is_rejected() {
    assert!(post_collision([0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], 1.0, 1.0).is_err());
}

#[test]
fn random_collisions_conserve_momentum_and_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let v = |rng: &mut ChaCha8Rng| -> [f64; 3] {
            [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
        };
        let xi = v(&mut rng);
        let xs = v(&mut rng);
        let raw = v(&mut rng);
        let nrm = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        if nrm < 1e-3 {
            continue;
        }
        let w = [raw[0] / nrm, raw[1] / nrm, raw[2] / nrm];
        let (ma, mb) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
        let (a, b) = post_collision(xi, xs, w, ma, mb).unwrap();
        let e = |x: [f64; 3]| x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let scale = ma * e(xi) + mb * e(xs) + 1.0;
        for k in 0..3 {
            let before = ma * xi[k] + mb * xs[k];
            let after = ma * a[k] + mb * b[k];
            assert!((before - after).abs() <= 1e-13 * scale.sqrt() * (ma + mb).sqrt());
        }
        let (eb, ea) = (ma * e(xi) + mb * e(xs), ma * e(a) + mb * e(b));
        assert!((eb - ea).abs() <= 1e-13 * scale, "{eb} vs {ea}");
    }
}

#[test]
fn q_ab_matches_full_sphere_oracle() {
    let params = PlasmaParams::from_values(4.0, 1.0, 1.0, -1.0, 0.8).unwrap();
    let grids = grids_for(&params, 6, 0.2, 1.0);
    let cfg = CollisionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_positive(&grids, &params, &mut rng);
    for a in Species::BOTH {
        for b in Species::BOTH {
            let got = q_ab(&f[a], &f[b], a, b, &grids, &params, &cfg).unwrap();
            let want = oracle_q(&f[a], &f[b], &grids[a], &grids[b], params.mass(a), params.mass(b), 0.8, &cfg.sphere);
            let scale = sup(&want);
            let err = got.iter().zip(&want).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err <= 1e-12 * scale.max(1.0), "{a:?}{b:?}: {err:e} vs scale {scale:e}");
        }
    }
}

#[test]
fn q_ab_rejects_mismatched_field() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 6, 0.0, 1.0);
    let cfg = CollisionConfig::default();
    let short = vec![1.0; 10];
    let ok = vec![1.0; grids.electron.len()];
    assert!(q_ab(&short, &ok, Species::Ion, Species::Electron, &grids, &params, &cfg).is_err());
}

#[test]
fn zero_first_argument_gives_zero() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 6, 0.0, 1.0);
    let cfg = CollisionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random_positive(&grids, &params, &mut rng);
    let zero = vec![0.0; grids.ion.len()];
    let q = q_ab(&zero, &f.electron, Species::Ion, Species::Electron, &grids, &params, &cfg).unwrap();
    assert!(q.iter().all(|&x| x == 0.0));
    let q = q_full(Pair::new(zero.as_slice(), zero.as_slice()), &grids, &params, &cfg).unwrap();
    assert!(q.ion.iter().chain(&q.electron).all(|&x| x == 0.0));
}

#[test]
fn q_full_is_the_componentwise_sum() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 6, 0.2, 1.0);
    let cfg = CollisionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let f = random_positive(&grids, &params, &mut rng);
    let q = q_full(slices(&f), &grids, &params, &cfg).unwrap();
    for a in Species::BOTH {
        let b = a.other();
        let same = q_ab(&f[a], &f[a], a, a, &grids, &params, &cfg).unwrap();
        let cross = q_ab(&f[a], &f[b], a, b, &grids, &params, &cfg).unwrap();
        for ((x, s), c) in q[a].iter().zip(&same).zip(&cross) {
            assert_eq!(*x, s + c);
        }
    }
}

/// sup|Q(M̄)| / sup|M̄| for a bi-Maxwellian sampled on N_v nodes per axis.
fn equilibrium_residual(n: usize) -> f64 {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, n, 0.1, 1.0);
    let bm = BiMaxwellian::new(1.0, 1.0, [0.1, 0.0, 0.0], 1.0).unwrap();
    let f = bm.sample_analytic(&grids, &params);
    let q = q_full(slices(&f), &grids, &params, &CollisionConfig::default()).unwrap();
    Species::BOTH.iter().map(|&s| sup(&q[s]) / sup(&f[s])).fold(0.0, f64::max)
}

#[test]
fn bi_maxwellian_residual_shrinks_under_refinement() {
    let coarse = equilibrium_residual(8);
    let fine = equilibrium_residual(12);
    assert!(fine < coarse, "{fine:e} !< {coarse:e}");
}

#[test]
fn fix_leaves_conserving_input_alone() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 8, 0.0, 1.0);
    let bm = BiMaxwellian::new(1.0, 1.0, [0.0; 3], 1.0).unwrap();
    let w = bm.sample_analytic(&grids, &params);
    // Odd in ξ₁ and ξ₂ together: every invariant moment vanishes by symmetry.
    let q = Pair::new(
        grids.ion.nodes().iter().zip(&w.ion).map(|(x, m)| x[0] * x[1] * m).collect::<Vec<_>>(),
        grids.electron.nodes().iter().zip(&w.electron).map(|(x, m)| x[0] * x[1] * m).collect::<Vec<_>>(),
    );
    let fixed = conservative_fix(slices(&q), slices(&w), &grids, &params).unwrap();
    assert!(fixed.correction_norm <= 1e-12, "{}", fixed.correction_norm);
    for s in Species::BOTH {
        for (a, b) in fixed.q[s].iter().zip(&q[s]) {
            assert!((a - b).abs() <= 1e-12 * sup(&q[s]));
        }
    }
}

#[test]
fn fix_rejects_degenerate_weight() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 6, 0.0, 1.0);
    let z = vec![0.0; grids.ion.len()];
    let q = vec![1.0; grids.ion.len()];
    assert!(conservative_fix(Pair::new(&q[..], &q[..]), Pair::new(&z[..], &z[..]), &grids, &params).is_err());
}

fn fixed_random_q(n: usize, seed: u64) -> (Pair<VelocityGrid>, PlasmaParams, [f64; 6], [f64; 6], f64) {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, n, 0.2, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_positive(&grids, &params, &mut rng);
    let q = q_full(slices(&f), &grids, &params, &CollisionConfig::default()).unwrap();
    let fixed = conservative_fix(slices(&q), slices(&f), &grids, &params).unwrap();
    let after = collision_invariant_moments(slices(&fixed.q), &grids, &params);
    (grids, params, fixed.raw_moments, after, fixed.correction_norm)
}

#[test]
fn fixed_collision_conserves_all_invariants() {
    let (_, _, raw, after, norm) = fixed_random_q(8, 21);
    assert!(after.iter().all(|m| m.abs() <= 1e-12), "{after:?}");
    // The raw defect is what the fix removed, so it is bounded by the correction.
    assert!(raw.iter().any(|m| m.abs() > 1e-10));
    assert!(norm > 0.0);
}

#[test]
fn correction_shrinks_under_refinement() {
    let params = PlasmaParams::default();
    let bm = BiMaxwellian::new(1.0, 0.9, [0.1, 0.0, -0.05], 1.0).unwrap();
    // A smooth non-equilibrium state: two Maxwellians of different temperature.
    let norm = |n: usize| {
        let grids = grids_for(&params, n, 0.2, 1.3);
        let hot = BiMaxwellian::new(0.5, 0.45, [0.1, 0.0, -0.05], 1.3).unwrap().sample_analytic(&grids, &params);
        let base = bm.sample_analytic(&grids, &params);
        let f = Pair::new(
            base.ion.iter().zip(&hot.ion).map(|(a, b)| a + b).collect::<Vec<_>>(),
            base.electron.iter().zip(&hot.electron).map(|(a, b)| a + b).collect::<Vec<_>>(),
        );
        let q = q_full(slices(&f), &grids, &params, &CollisionConfig::default()).unwrap();
        conservative_fix(slices(&q), slices(&f), &grids, &params).unwrap().correction_norm
    };
    let (coarse, fine) = (norm(8), norm(16));
    assert!(fine < coarse, "{fine:e} !< {coarse:e}");
}

#[test]
fn invariant_moments_of_zero_vanish() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 6, 0.0, 1.0);
    let z = vec![0.0; grids.ion.len()];
    assert_eq!(collision_invariant_moments(Pair::new(&z[..], &z[..]), &grids, &params), [0.0; 6]);
}

#[test]
fn raw_moments_bounded_by_correction_norm() {
    // |∫ψ_j Q| = |⟨ψ_j F, Q⟩_F| ≤ ‖ψ_j F‖_F ‖P Q‖_F, and the correction is P Q.
    let (grids, params, raw, _, norm) = fixed_random_q(8, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let f = random_positive(&grids, &params, &mut rng);
    for (j, m) in raw.iter().enumerate() {
        let mut psi_norm2 = 0.0f64;
        for s in Species::BOTH {
            let mass = params.mass(s);
            let part: f64 =
                grids[s].nodes().iter().zip(&f[s]).map(|(x, w)| invariant(j, s, mass, *x).powi(2) * w).sum();
            psi_norm2 += part * grids[s].cell_volume();
        }
        assert!(m.abs() <= psi_norm2.sqrt() * norm * (1.0 + 1e-10), "j={j}: {m:e}");
    }
}

#[test]
fn entropy_production_vanishes_at_equilibrium() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 8, 0.1, 1.0);
    let bm = BiMaxwellian::new(1.0, 1.0, [0.1, 0.0, 0.0], 1.0).unwrap();
    let f = bm.sample_analytic(&grids, &params);
    let q = q_full(slices(&f), &grids, &params, &CollisionConfig::default()).unwrap();
    let fixed = conservative_fix(slices(&q), slices(&f), &grids, &params).unwrap();
    // ln M̄ is a collision invariant, so the conserving operator produces no entropy.
    let e = entropy_production(slices(&f), slices(&fixed.q), &grids);
    assert!(e.value.abs() < 1e-10, "{e:?}");
    assert_eq!(e.clipped, 0);
}

#[test]
fn entropy_production_is_negative_off_equilibrium() {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, 8, 0.1, 1.0);
    let bm = BiMaxwellian::new(1.0, 1.0, [0.1, 0.0, 0.0], 1.0).unwrap();
    let m = bm.sample_analytic(&grids, &params);
    let cfg = CollisionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let f = m.map(|_, v| v.iter().map(|x| x * (1.0 + rng.random_range(-0.3..0.3))).collect::<Vec<_>>());
        let q = q_full(slices(&f), &grids, &params, &cfg).unwrap();
        let fixed = conservative_fix(slices(&q), slices(&f), &grids, &params).unwrap();
        let e = entropy_production(slices(&f), slices(&fixed.q), &grids);
        assert!(e.value < 0.0, "{e:?}");
    }
}

fn smooth_test_function(grids: &Pair<VelocityGrid>) -> Pair<Vec<f64>> {
    grids.map(|_, g| g.nodes().iter().map(|x| (x[0] + 0.3).cos() * (0.5 * x[1]).sin() + 0.1 * x[2] * x[2]).collect())
}

fn forms_at(n: usize, equilibrium: bool, invariant_g: bool) -> vpb_core::collision::IForms {
    let params = PlasmaParams::default();
    let grids = grids_for(&params, n, 0.2, 1.3);
    let base = BiMaxwellian::new(1.0, 1.0, [0.0; 3], 1.0).unwrap().sample_analytic(&grids, &params);
    let f = if equilibrium {
        base
    } else {
        let hot = BiMaxwellian::new(0.5, 0.5, [0.2, 0.0, 0.0], 1.3).unwrap().sample_analytic(&grids, &params);
        base.map(|s, v| v.iter().zip(&hot[s]).map(|(a, b)| a + b).collect())
    };
    let g = if invariant_g {
        grids.map(|s, gr| gr.nodes().iter().map(|x| invariant(2, s, params.mass(s), *x)).collect())
    } else {
        smooth_test_function(&grids)
    };
    i_forms(slices(&f), slices(&g), &grids, &params, &CollisionConfig::default()).unwrap()
}

fn largest_form(f: &vpb_core::collision::IForms) -> f64 {
    f.ii.abs().max(f.ee.abs()).max(f.ie.abs())
}

#[test]
fn invariant_test_function_has_vanishing_forms() {
    // Trilinear interpolation reproduces linear ψ inside the box, so only
    // post-collision points leaving the box contribute.
    let (coarse, fine) = (forms_at(6, false, true), forms_at(8, false, true));
    let reference = largest_form(&forms_at(8, false, false));
    assert!(largest_form(&fine) < largest_form(&coarse), "{fine:?} vs {coarse:?}");
    assert!(largest_form(&fine) < 0.2 * reference, "{fine:?} vs {reference}");
}

#[test]
fn equilibrium_pairing_shrinks_under_refinement() {
    let (coarse, fine) = (forms_at(6, true, false), forms_at(10, true, false));
    assert!(fine.lhs.abs() < coarse.lhs.abs(), "{} !< {}", fine.lhs, coarse.lhs);
    assert!(largest_form(&fine) < largest_form(&coarse));
}
