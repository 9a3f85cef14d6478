use fastreact::diagnostics::{energy, sweep_fit, total_mass};
use fastreact::kinetics::{identity_residual, pushforward_gap, KineticProfile, StepProfile};
use fastreact::model::{compute_branch_structure, plotnikov_maps, Branch, BranchInverses, ReactionFunction};
use fastreact::solver::{step_plotnikov, step_system, FieldState, Grid1D, PseudoState, SolverConfig};
use proptest::prelude::*;

fn cubic() -> ReactionFunction {
    ReactionFunction::reference_cubic()
}

fn state(us: &[f64], vs: &[f64]) -> FieldState {
    FieldState {
        t: 0.0,
        u: us.to_vec(),
        v: vs.to_vec(),
    }
}

proptest! {
    #[test]
    fn branch_inverses_solve_and_invert_slopes(xi in 0.01f64..3.99) {
        let rf = cubic();
        let bi = BranchInverses::new(rf.clone()).unwrap();
        let bs = *bi.structure();
        let pts = bi.all(xi);
        prop_assert!(pts[0].u <= pts[1].u && pts[1].u <= pts[2].u);
        for (b, p) in Branch::ALL.iter().zip(pts) {
            if bs.in_domain(*b, xi) {
                prop_assert!((rf.value(p.u) - xi).abs() <= 1e-12 * (1.0 + xi));
                if !p.capped {
                    prop_assert!((p.slope * rf.derivative(p.u) - 1.0).abs() <= 1e-9);
                }
            } else {
                prop_assert_eq!(p.slope, 0.0);
            }
        }
    }

    #[test]
    fn lift_round_trips(u in 0.0f64..4.0) {
        let maps = plotnikov_maps(&cubic());
        let w = maps.lift(u);
        prop_assert!((maps.unlift(w).unwrap() - u).abs() <= 1e-12);
        prop_assert!((maps.potential(w).unwrap() - cubic().value(u)).abs() <= 1e-11);
    }

    #[test]
    fn exact_profiles_push_forward_to_indicators(v_bar in 2.01f64..2.49, k1 in 0.0f64..1.0, t in 0.0f64..1.0, xi in 0.01f64..3.99) {
        let bi = BranchInverses::new(cubic()).unwrap();
        let p = StepProfile::three_plateau(&bi, v_bar, k1, k1 * t).unwrap();
        let q = StepProfile::indicator(v_bar);
        prop_assert!(pushforward_gap(&p, &q, &bi, &[xi]) <= 1e-12);
        prop_assert!(identity_residual(&p, &q, &bi, 2.25, xi) <= 1e-12);
    }

    #[test]
    fn system_step_conserves_mass_and_energy(
        us in prop::collection::vec(0.05f64..3.5, 16),
        shift in prop::collection::vec(-0.3f64..0.3, 16),
        eps in 1e-3f64..1e-1,
    ) {
        let rf = cubic();
        let grid = Grid1D::new(16, 1.0).unwrap();
        let vs: Vec<f64> = us.iter().zip(&shift).map(|(&u, &s)| (rf.value(u) + s).max(0.0)).collect();
        let mut s = state(&us, &vs);
        let cfg = SolverConfig::new(&grid, eps, 1.0);
        let (m0, e0) = (total_mass(&s, &grid), energy(&s, &grid, &rf));
        for _ in 0..10 {
            s = step_system(&s, &grid, &rf, &cfg).unwrap();
        }
        prop_assert!((total_mass(&s, &grid) - m0).abs() <= 1e-12 * m0);
        prop_assert!(energy(&s, &grid, &rf) <= e0 * (1.0 + 1e-12));
        prop_assert!(s.u.iter().chain(&s.v).all(|&x| x >= -1e-12));
    }

    #[test]
    fn pseudo_parabolic_step_conserves_mass(ws in prop::collection::vec(0.1f64..10.0, 16), eps in 1e-3f64..1e-1) {
        let maps = plotnikov_maps(&cubic());
        let grid = Grid1D::new(16, 1.0).unwrap();
        let cfg = SolverConfig::new(&grid, eps, 1.0);
        let s0 = PseudoState { t: 0.0, w: ws };
        let s1 = step_plotnikov(&s0, &grid, &maps, &cfg).unwrap();
        let (a, b): (f64, f64) = (s0.w.iter().sum(), s1.w.iter().sum());
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn power_laws_fit_their_exponent(c in 0.1f64..10.0, slope in 0.1f64..2.0) {
        let eps = [1e-2, 3e-3, 1e-3, 3e-4];
        let d: Vec<f64> = eps.iter().map(|e: &f64| c * e.powf(slope)).collect();
        let fit = sweep_fit(&eps, &d).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
    }

    #[test]
    fn step_profiles_are_monotone(v_bar in 0.1f64..3.9, k1 in 0.0f64..1.0, t in 0.0f64..1.0) {
        let rf = cubic();
        let bs = compute_branch_structure(&rf).unwrap();
        let bi = BranchInverses::new(rf).unwrap();
        let (k1, k2) = if v_bar <= bs.f_minus { (0.0, 0.0) } else if v_bar >= bs.f_plus { (1.0, 1.0) } else { (k1, k1 * t) };
        let p = StepProfile::three_plateau(&bi, v_bar, k1, k2).unwrap();
        let xs: Vec<f64> = (1..200).map(|k| k as f64 * 0.02).collect();
        prop_assert!(xs.windows(2).all(|w| p.at(w[1]) <= p.at(w[0])));
        prop_assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&p.at(x))));
    }
}
