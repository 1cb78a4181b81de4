//! Linearized operator: split, symmetry, coercivity, inverse, transport and Ḡ.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpb_core::collision::{collision_invariant_moments, CollisionConfig};
use vpb_core::linearized::{
    background_g, coercivity_eigen, coercivity_estimate, rayleigh_quotient, species_transport, LinearizedOperator,
    WaveGradients,
};
use vpb_core::macromicro::unflatten;
use vpb_core::{recommended_extent, BiMaxwellian, Pair, PlasmaParams, Species, VelocityGrid, VpbError};

fn grids(params: &PlasmaParams, n: usize) -> Pair<VelocityGrid> {
    Pair::new(
        VelocityGrid::new(n, recommended_extent(params.ion.mass, 0.0, 1.0)).unwrap(),
        VelocityGrid::new(n, recommended_extent(params.electron.mass, 0.0, 1.0)).unwrap(),
    )
}

fn build(n: usize, density: f64) -> LinearizedOperator {
    let params = PlasmaParams::default();
    let anchor = BiMaxwellian::new(density, density, [0.0; 3], 1.0).unwrap();
    LinearizedOperator::two_species(&anchor, &grids(&params, n), &params, &CollisionConfig::default()).unwrap()
}

fn coarse() -> &'static LinearizedOperator {
    static OP: OnceLock<LinearizedOperator> = OnceLock::new();
    OP.get_or_init(|| build(6, 1.0))
}

fn default_grid() -> &'static LinearizedOperator {
    static OP: OnceLock<LinearizedOperator> = OnceLock::new();
    OP.get_or_init(|| build(8, 1.0))
}

fn invariant_moments(op: &LinearizedOperator, v: &[f64]) -> [f64; 6] {
    let params = PlasmaParams::default();
    let g = grids(&params, op.components()[0].grid.n);
    let p = unflatten(v, g.ion.len());
    collision_invariant_moments(Pair::new(&p.ion[..], &p.electron[..]), &g, &params)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn zero_maps_to_zero() {
    let op = coarse();
    let z = vec![0.0; op.dim()];
    assert!(op.apply(&z).unwrap().iter().all(|&v| v == 0.0));
    assert!(op.apply_collision(&z).unwrap().iter().all(|&v| v == 0.0));
    assert!(op.apply_k(&z).unwrap().iter().all(|&v| v == 0.0));
    let (g, _) = op.solve_linv(&z).unwrap();
    assert!(g.iter().all(|&v| v == 0.0));
}

#[test]
fn output_carries_no_invariant_moments() {
    let op = coarse();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g: Vec<f64> = op.anchor_flat().iter().map(|m| m * rng.random_range(-1.0..1.0)).collect();
    for lg in [op.apply_collision(&g).unwrap(), op.apply(&g).unwrap()] {
        let mom = invariant_moments(op, &lg);
        let scale = sup(&lg);
        assert!(mom.iter().all(|m| m.abs() <= 1e-10 * scale.max(1.0)), "{mom:?}");
    }
}

#[test]
fn nu_plus_k_reassembles_the_operator() {
    let op = coarse();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = op.random_microscopic(&mut rng);
    let kg = op.apply_k(&g).unwrap();
    let lg = op.apply_collision_unfixed(&g).unwrap();
    let nu = op.nu();
    let err = (0..g.len()).map(|k| (kg[k] - nu[k] * g[k] - lg[k]).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-10 * sup(&lg), "{err:e}");
}

#[test]
fn k_is_bounded_on_random_samples() {
    let op = coarse();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ratios: Vec<f64> = (0..20)
        .map(|_| {
            let g = op.random_microscopic(&mut rng);
            op.norm(&op.apply_k(&g).unwrap()) / op.norm(&g)
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi.is_finite() && hi < 10.0 * lo, "{lo} .. {hi}");
}

#[test]
fn symmetric_in_the_anchor_inner_product() {
    let op = default_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let g = op.random_microscopic(&mut rng);
        let h = op.random_microscopic(&mut rng);
        let a = op.inner(&op.apply(&g).unwrap(), &h);
        let b = op.inner(&g, &op.apply(&h).unwrap());
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn dissipative_on_random_samples() {
    let op = coarse();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let g = op.random_microscopic(&mut rng);
        assert!(op.inner(&op.apply(&g).unwrap(), &g) < 0.0);
    }
}

#[test]
fn frequency_grows_linearly_with_speed() {
    let op = coarse();
    let nu = op.nu();
    let speeds = op.speeds();
    assert!(nu.iter().all(|&v| v > 0.0));
    let r: Vec<f64> = nu.iter().zip(&speeds).map(|(n, s)| n / (1.0 + s)).collect();
    let (c1, c2) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(c2 / c1 < 20.0, "c₂/c₁ = {}", c2 / c1);
}

#[test]
fn frequency_is_monotone_along_rays() {
    let op = coarse();
    for dir in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.577, -0.577, 0.577]] {
        for s in Species::BOTH {
            let vals: Vec<f64> = (0..12)
                .map(|k| op.nu_at(s, [dir[0] * k as f64 * 0.3, dir[1] * k as f64 * 0.3, dir[2] * k as f64 * 0.3]))
                .collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "{s:?} {dir:?}: {vals:?}");
        }
    }
}

#[test]
fn frequency_is_linear_in_the_anchor() {
    let (a, b) = (coarse(), build(6, 2.0));
    for (x, y) in a.nu().iter().zip(b.nu()) {
        assert!((2.0 * x - y).abs() <= 1e-12 * y);
    }
}

#[test]
fn inverse_round_trip() {
    let op = default_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g0 = op.random_microscopic(&mut rng);
    let h = op.apply(&g0).unwrap();
    let (g, report) = op.solve_linv(&h).unwrap();
    assert!(report.relative_residual <= 1e-10, "{report:?}");
    let err: Vec<f64> = g.iter().zip(&g0).map(|(a, b)| a - b).collect();
    assert!(op.norm(&err) <= 1e-8 * op.norm(&g0), "{:e}", op.norm(&err));
    assert!(op.norm(&op.project_p0(&g)) <= 1e-10 * op.norm(&g));
}

#[test]
fn inverse_rejects_macroscopic_data() {
    let op = coarse();
    let m = op.anchor_flat();
    assert!(matches!(op.solve_linv(&m), Err(VpbError::Precondition(_))));
    assert!(matches!(rayleigh_quotient(op, &m, None), Err(VpbError::Precondition(_))));
}

#[test]
fn inverse_obeys_the_coercive_bound() {
    // δ‖g‖²_w ≤ ⟨−Lg, g⟩ ≤ ‖h‖_{1/w}‖g‖_w with w = 1 + |ξ|.
    let op = default_grid();
    let delta = coercivity_eigen(op).unwrap();
    assert!(delta > 0.0);
    let speeds = op.speeds();
    let weighted = |v: &[f64], p: f64| {
        let scaled: Vec<f64> = v.iter().zip(&speeds).map(|(x, s)| x * (1.0 + s).powf(p)).collect();
        op.norm(&scaled)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let h = op.random_microscopic(&mut rng);
        let (g, _) = op.solve_linv(&h).unwrap();
        assert!(weighted(&g, 0.5) <= weighted(&h, -0.5) / delta * (1.0 + 1e-8));
    }
}

#[test]
fn coercivity_at_anchor_and_shifted_weights() {
    let op = default_grid();
    assert!(coercivity_estimate(op, None, 100, 11).unwrap() > 0.0);
    for theta_hat in [0.8, 1.3] {
        assert!(coercivity_estimate(op, Some(theta_hat), 100, 12).unwrap() > 0.0, "θ̂ = {theta_hat}");
    }
    assert!(matches!(coercivity_estimate(op, Some(0.4), 1, 1), Err(VpbError::Precondition(_))));
}

#[test]
fn transport_coefficients_are_positive_and_isotropic() {
    let params = PlasmaParams::default();
    let cfg = CollisionConfig::default();
    for s in Species::BOTH {
        let t = species_transport(&params, s, 1.0, [0.0; 3], 8, &cfg).unwrap();
        assert!(t.mu > 0.0 && t.kappa > 0.0, "{t:?}");
        assert!((t.mu - t.mu_13).abs() <= 1e-6 * t.mu, "{t:?}");
    }
}

#[test]
fn transport_is_galilean_and_scales_like_root_theta() {
    let params = PlasmaParams::default();
    let cfg = CollisionConfig::default();
    let base = species_transport(&params, Species::Ion, 1.0, [0.0; 3], 8, &cfg).unwrap();
    let moved = species_transport(&params, Species::Ion, 1.0, [0.4, -0.2, 0.1], 8, &cfg).unwrap();
    assert!((base.mu - moved.mu).abs() <= 1e-6 * base.mu);
    assert!((base.kappa - moved.kappa).abs() <= 1e-6 * base.kappa);
    let hot = species_transport(&params, Species::Ion, 4.0, [0.0; 3], 8, &cfg).unwrap();
    assert!((hot.mu / base.mu - 2.0).abs() <= 1e-3, "{}", hot.mu / base.mu);
    assert!(matches!(species_transport(&params, Species::Ion, 0.0, [0.0; 3], 8, &cfg), Err(VpbError::Domain(_))));
}

#[test]
fn background_profile_is_linear_and_microscopic() {
    let op = coarse();
    let zero = background_g(op, &WaveGradients::default()).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
    let grad = WaveGradients { dn_i: 0.03, dn_e: 0.02, du1: 0.05, dtheta: 0.01 };
    let g1 = background_g(op, &grad).unwrap();
    let double = WaveGradients { dn_i: 0.06, dn_e: 0.04, du1: 0.1, dtheta: 0.02 };
    let g2 = background_g(op, &double).unwrap();
    let s = sup(&g1);
    assert!(s > 0.0);
    assert!(g1.iter().zip(&g2).all(|(a, b)| (2.0 * a - b).abs() <= 1e-10 * s));
    let mom = invariant_moments(op, &g1);
    assert!(mom.iter().all(|m| m.abs() <= 1e-10), "{mom:?}");
    let bad = WaveGradients { dn_i: f64::NAN, ..grad };
    assert!(background_g(op, &bad).is_err());
}
