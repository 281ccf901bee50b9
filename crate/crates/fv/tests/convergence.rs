use std::sync::Arc;

use gtw_core::constraints::InvariantChart;
use gtw_core::moc::simple_wave;
use gtw_core::models::{BarotropicModel, ForceSpec, GtwClosedForm, PressureLaw};
use gtw_core::{GenericSystem, Result as CoreResult, SolutionField, State};
use gtw_fv::{advance, convergence_study, Boundary, GridSpec, Scheme};
use nalgebra::{dmatrix, dvector};

/// Exact shift of a smooth bump, `u(x, t) = u₀(x − a t)`.
struct Shift {
    a: f64,
}

impl SolutionField for Shift {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: f64, t: f64) -> CoreResult<State> {
        let y = x - self.a * t;
        Ok(dvector![(-20.0 * y * y).exp()])
    }
}

fn ladder() -> Vec<usize> {
    vec![128, 256, 512, 1024]
}

#[test]
fn advection_orders_match_schemes() {
    let sys = GenericSystem::scalar(|_| 0.8, |_| 0.0);
    let exact = Arc::new(Shift { a: 0.8 });
    let base = GridSpec::new(-1.0, 1.5, 16, 0.5).with_boundary(Boundary::ExactDirichlet(exact.clone()));
    let lf = convergence_study(&sys, exact.as_ref(), &base, &ladder(), Scheme::LaxFriedrichs).unwrap();
    let mc = convergence_study(&sys, exact.as_ref(), &base, &ladder(), Scheme::MacCormack).unwrap();
    let (p1, p2) = (lf.order.unwrap(), mc.order.unwrap());
    assert!(p1 > 0.8 && p1 < 1.2, "{p1}");
    assert!(p2 > 1.8 && p2 < 2.2, "{p2}");
    assert!(mc.rows.windows(2).all(|w| w[1].errors.l2 < w[0].errors.l2));
}

#[test]
fn frozen_linear_system_is_second_order() {
    // A has speeds ±1 after diagonalisation; each characteristic variable shifts
    struct Waves;
    impl SolutionField for Waves {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, t: f64) -> CoreResult<State> {
            let w1 = (-(x + t) * (x + t) * 10.0).exp();
            let w2 = (2.0 * (x - t)).sin();
            Ok(dvector![w1 + w2, w2 - w1])
        }
    }
    let sys = GenericSystem::new(
        vec!["p".into(), "q".into()],
        |_| dmatrix![0.0, 1.0; 1.0, 0.0],
        |_| dvector![0.0, 0.0],
    );
    let exact = Arc::new(Waves);
    let base = GridSpec::new(-1.0, 1.0, 16, 0.4).with_boundary(Boundary::ExactDirichlet(exact.clone()));
    let mc = convergence_study(&sys, exact.as_ref(), &base, &ladder(), Scheme::MacCormack).unwrap();
    let p = mc.order.unwrap();
    assert!((1.8..2.2).contains(&p), "{p}");
}

#[test]
fn constant_exact_solution_skips_fit() {
    struct Constant;
    impl SolutionField for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _: f64, _: f64) -> CoreResult<State> {
            Ok(dvector![1.3, 0.2])
        }
    }
    let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
    let base = GridSpec::new(0.0, 1.0, 16, 0.2);
    let t = convergence_study(&m, &Constant, &base, &[16, 32, 64, 128], Scheme::MacCormack).unwrap();
    assert!(t.at_machine_precision);
    assert!(t.order.is_none());
}

#[test]
fn flagship_gtw_orders() {
    let exact = Arc::new(GtwClosedForm::flagship());
    let m = exact.model();
    let base = GridSpec::new(-2.0, 2.0, 16, 0.5).with_boundary(Boundary::ExactDirichlet(exact.clone()));
    let lf = convergence_study(&m, exact.as_ref(), &base, &[128, 256, 512, 1024], Scheme::LaxFriedrichs).unwrap();
    assert!(lf.order.unwrap() >= 0.9, "{:?}", lf.order);
    let mc = convergence_study(&m, exact.as_ref(), &base, &[256, 512, 1024, 2048], Scheme::MacCormack).unwrap();
    let p = mc.order.unwrap();
    assert!((1.7..=2.2).contains(&p), "{p}");
    assert!(mc.rows.last().unwrap().errors.l2 <= 1e-4);
}

#[test]
fn simple_wave_before_breaking_is_second_order() {
    let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
    let chart = m.chart(1, 1).unwrap();
    let wave = simple_wave(
        m.clone(),
        chart.clone(),
        vec![-1.0],
        |xi| 0.5 - 0.2 * xi.tanh(),
        (-8.0, 8.0),
        2048,
    )
    .unwrap();
    let t_end = 0.5 * wave.breaking_time.min(2.0);
    let wave = Arc::new(wave);
    let base = GridSpec::new(-1.0, 3.0, 16, t_end).with_boundary(Boundary::ExactDirichlet(wave.clone()));
    let mc = convergence_study(&m, wave.as_ref(), &base, &ladder(), Scheme::MacCormack).unwrap();
    let p = mc.order.unwrap();
    assert!((1.7..=2.2).contains(&p), "{p}");
    // the reference never leaves the invariant manifold by more than its own error
    let spec = base.with_cells(512);
    let run = advance(&m, &spec.sample(wave.as_ref(), 0.0).unwrap(), &spec, Scheme::MacCormack).unwrap();
    let drift = run
        .final_state
        .iter()
        .map(|u| (chart.invariants(u).unwrap()[0] + 1.0).abs())
        .fold(0.0f64, f64::max);
    assert!(drift < 1e-3, "{drift}");
}

#[test]
fn exact_boundaries_do_not_spike() {
    let exact = Arc::new(GtwClosedForm::flagship());
    let m = exact.model();
    let spec = GridSpec::new(-2.0, 2.0, 400, 0.5).with_boundary(Boundary::ExactDirichlet(exact.clone()));
    let run = advance(&m, &spec.sample(exact.as_ref(), 0.0).unwrap(), &spec, Scheme::MacCormack).unwrap();
    let mut err: Vec<f64> = run
        .centers
        .iter()
        .zip(&run.final_state)
        .map(|(x, u)| (u - exact.eval(*x, 0.5).unwrap()).amax())
        .collect();
    let max = err.iter().cloned().fold(0.0, f64::max);
    let interior = &mut err[40..360];
    interior.sort_by(f64::total_cmp);
    let median = interior[interior.len() / 2];
    let interior_max = *interior.last().unwrap();
    assert!(
        max <= 3.0 * interior_max.max(median),
        "max {max}, interior max {interior_max}, median {median}"
    );
}

#[test]
fn fixed_step_reruns_are_bit_identical() {
    let exact = Arc::new(GtwClosedForm::flagship());
    let m = exact.model();
    let mut spec = GridSpec::new(-2.0, 2.0, 64, 0.2).with_boundary(Boundary::ExactDirichlet(exact.clone()));
    spec.fixed_dt = Some(1e-3);
    let init = spec.sample(exact.as_ref(), 0.0).unwrap();
    let a = advance(&m, &init, &spec, Scheme::MacCormack).unwrap();
    let b = advance(&m, &init, &spec, Scheme::MacCormack).unwrap();
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.steps, 200);
}
