mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use stirap_oct::{
    make_stirap_fields, propagate_backward, propagate_forward, Complex64 as C64, DecaySpec,
    InhomogeneousSource, LevelSystem, Propagator, StateVector, StirapParams, TimeGrid,
};

const SUBSTEPS: usize = 100;

fn reference_stirap(scale: f64, grid: TimeGrid) -> Vec<stirap_oct::ControlField> {
    let p = StirapParams::new(1.14 * scale, 12.0, 24.0, 100.0).unwrap();
    let (pump, stokes) = make_stirap_fields(&p, grid).unwrap();
    vec![pump, stokes]
}

fn check_against_oracle(seed: u64, n_levels: usize, lossy: bool) -> f64 {
    let grid = TimeGrid::new(100.0, 500).unwrap();
    let inst = random_instance(seed, n_levels, lossy, grid);
    let prop = Propagator::new(&inst.system, &inst.fields).unwrap();
    let psi0 = random_state(seed ^ 0x5eed, n_levels);
    let chi_t = random_state(seed ^ 0xc0de, n_levels);

    let fwd = prop
        .forward(&StateVector::from_dvector(psi0.clone()))
        .unwrap();
    let fwd_ref = oracle_forward(&inst.system, &inst.fields, &psi0, SUBSTEPS);

    let bwd = prop
        .backward(&StateVector::from_dvector(chi_t.clone()))
        .unwrap();
    let bwd_ref = oracle_backward(&inst.system, &inst.fields, &chi_t, None, SUBSTEPS);

    // an arbitrary smooth source, e.g. a multiple of the forward trajectory
    let src: Vec<DVector<C64>> = fwd_ref
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::new(-0.3, 0.1 * (grid.time(i) / 10.0).sin()))
        .collect();
    let source = InhomogeneousSource::new(grid, src.clone()).unwrap();
    let inh = prop
        .backward_inhomogeneous(&StateVector::from_dvector(chi_t.clone()), &source)
        .unwrap();
    let inh_ref = oracle_backward(&inst.system, &inst.fields, &chi_t, Some(&src), SUBSTEPS);

    let mut worst: f64 = 0.0;
    for i in 0..grid.n_points() {
        worst = worst
            .max(max_abs_diff(fwd.state(i).amplitudes(), &fwd_ref[i]))
            .max(max_abs_diff(bwd.state(i).amplitudes(), &bwd_ref[i]))
            .max(max_abs_diff(inh.state(i).amplitudes(), &inh_ref[i]));
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn all_propagators_match_fine_grid_oracle(seed in any::<u64>(), four in any::<bool>(), lossy in any::<bool>()) {
        let n = if four { 4 } else { 3 };
        let err = check_against_oracle(seed, n, lossy);
        prop_assert!(err <= 1e-8, "max amplitude error {err:e} (n = {n}, lossy = {lossy})");
    }

    #[test]
    fn norm_is_conserved_without_decay(seed in any::<u64>(), four in any::<bool>()) {
        let n = if four { 4 } else { 3 };
        let grid = TimeGrid::new(100.0, 2000).unwrap();
        let inst = random_instance(seed, n, false, grid);
        let psi0 = StateVector::from_dvector(random_state(seed, n));
        let fwd = propagate_forward(&inst.system, &inst.fields, &psi0).unwrap();
        let bwd = propagate_backward(&inst.system, &inst.fields, &psi0).unwrap();
        for (a, b) in fwd.norms().iter().zip(bwd.norms()) {
            prop_assert!((a - 1.0).abs() <= 1e-10 && (b - 1.0).abs() <= 1e-10);
        }
        for p in fwd.populations() {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn overlap_of_forward_and_adjoint_states_is_constant(seed in any::<u64>(), lossy in any::<bool>()) {
        let grid = TimeGrid::new(100.0, 1000).unwrap();
        let inst = random_instance(seed, 3, lossy, grid);
        let psi = propagate_forward(&inst.system, &inst.fields, &StateVector::basis(3, 0).unwrap()).unwrap();
        let chi = propagate_backward(&inst.system, &inst.fields, &StateVector::basis(3, 2).unwrap()).unwrap();
        let o: Vec<C64> = (0..grid.n_points()).map(|i| chi.state(i).inner(psi.state(i))).collect();
        for w in o.windows(2) {
            prop_assert!((w[1] - w[0]).norm() <= 1e-8);
        }
    }

    #[test]
    fn backward_undoes_forward(seed in any::<u64>(), four in any::<bool>()) {
        let n = if four { 4 } else { 3 };
        let grid = TimeGrid::new(100.0, 1000).unwrap();
        let inst = random_instance(seed, n, false, grid);
        let psi0 = StateVector::from_dvector(random_state(seed, n));
        let fwd = propagate_forward(&inst.system, &inst.fields, &psi0).unwrap();
        let back = propagate_backward(&inst.system, &inst.fields, fwd.final_state()).unwrap();
        prop_assert!(max_abs_diff(back.initial().amplitudes(), psi0.amplitudes()) <= 1e-8);
    }
}

#[test]
fn decay_loss_matches_continuity_equation() {
    let grid = TimeGrid::new(100.0, 2000).unwrap();
    let fields = reference_stirap(1.0, grid);
    for beta in [1.0, 10.0, 100.0] {
        let spec = DecaySpec::intermediate(beta, 100.0);
        let sys = spec.apply(&LevelSystem::lambda(0.0)).unwrap();
        let tr = propagate_forward(&sys, &fields, &StateVector::basis(3, 0).unwrap()).unwrap();
        // P2 is only piecewise smooth (the step Hamiltonian jumps at grid
        // points), so integrate step by step with Simpson, taking the
        // mid-step state from the oracle.
        let accumulated: f64 = (0..grid.n_steps())
            .map(|k| {
                let hk = step_hamiltonian(&sys, &fields, k);
                let rhs = |_: f64, y: &DVector<C64>| &hk * y * C64::new(0.0, -1.0);
                let mid = rk4(rhs, 0.0, 0.05 * grid.dt(), 10, tr.state(k).amplitudes());
                let p = [
                    tr.state(k).amplitudes()[1].norm_sqr(),
                    mid[1].norm_sqr(),
                    tr.state(k + 1).amplitudes()[1].norm_sqr(),
                ];
                2.0 * spec.rate() * grid.dt() / 6.0 * (p[0] + 4.0 * p[1] + p[2])
            })
            .sum();
        let lost = 1.0 - tr.final_state().norm_squared();
        assert!(
            (lost - accumulated).abs() <= 1e-6,
            "beta {beta}: lost {lost}, accumulated {accumulated}"
        );
        assert!(tr.norms().windows(2).all(|w| w[1] <= w[0]));
    }
}

/// The midpoint exponential is second order in `dt` against the smooth-field
/// solution (RK4 with the analytic pulses, far below its own error floor).
#[test]
fn midpoint_scheme_is_second_order() {
    let t_end = 100.0;
    let inst = random_instance(7, 3, false, TimeGrid::new(t_end, 10).unwrap());
    let sys = inst.system.clone();
    let pulses = inst.pulses.clone();
    let rhs = |t: f64, y: &DVector<C64>| {
        let amps: Vec<f64> = pulses.iter().map(|p| p.eval(t)).collect();
        sys.hamiltonian(&amps) * y * C64::new(0.0, -1.0)
    };
    let psi0 = DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ]);
    let exact = rk4(rhs, 0.0, t_end / 200_000.0, 200_000, &psi0);

    let errors: Vec<f64> = [250, 500, 1000, 2000]
        .iter()
        .map(|&n| {
            let grid = TimeGrid::new(t_end, n).unwrap();
            let fields: Vec<_> = inst
                .pulses
                .iter()
                .zip(channels(3))
                .map(|(p, c)| p.sample(grid, c))
                .collect();
            let tr = propagate_forward(&inst.system, &fields, &StateVector::basis(3, 0).unwrap())
                .unwrap();
            max_abs_diff(tr.final_state().amplitudes(), &exact)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (3.5..4.5).contains(&ratio),
            "error ratio {ratio} from {errors:?}"
        );
    }
}

#[test]
fn strong_stirap_follows_the_dark_state() {
    let grid = TimeGrid::new(100.0, 2000).unwrap();
    let fields = reference_stirap(4.0, grid);
    let tr = propagate_forward(
        &LevelSystem::lambda(0.0),
        &fields,
        &StateVector::basis(3, 0).unwrap(),
    )
    .unwrap();
    let worst = (0..grid.n_points())
        .map(|i| {
            let (op, os) = (fields[0].samples()[i], fields[1].samples()[i]);
            let a = tr.state(i).amplitudes();
            (a[0] * os - a[2] * op).norm_sqr() / (op * op + os * os)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(worst > 0.999, "dark-state projection dropped to {worst}");
}
