use gtw_core::models::{BarotropicModel, ForceSpec, PressureLaw};
use gtw_core::{GenericSystem, State};
use gtw_fv::{advance, GridSpec, Scheme};
use nalgebra::dvector;
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::LaxFriedrichs), Just(Scheme::MacCormack)]
}

fn total_variation(u: &[State]) -> f64 {
    u.windows(2).map(|w| (w[1][0] - w[0][0]).abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_state_is_preserved(rho in 0.1..5.0f64, u in -2.0..2.0f64, gamma in 1.1..3.0f64, scheme in scheme()) {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, gamma), ForceSpec::None);
        let spec = GridSpec::new(0.0, 1.0, 32, 0.2);
        let init = vec![dvector![rho, u]; 32];
        let run = advance(&m, &init, &spec, scheme).unwrap();
        for s in &run.final_state {
            prop_assert!((s - dvector![rho, u]).amax() < 1e-13 * (1.0 + rho + u.abs()));
        }
    }

    /// Lax–Friedrichs is monotone for linear advection under the CFL limit.
    #[test]
    fn lax_friedrichs_does_not_increase_variation(
        a in -2.0..2.0f64,
        values in prop::collection::vec(-1.0..1.0f64, 40),
        cfl in 0.1..0.9f64,
    ) {
        prop_assume!(a.abs() > 1e-3);
        let sys = GenericSystem::scalar(move |_| a, |_| 0.0);
        let spec = GridSpec { cfl, ..GridSpec::new(0.0, 1.0, 40, 0.1) };
        let init: Vec<State> = values.iter().map(|&v| dvector![v]).collect();
        let run = advance(&sys, &init, &spec, Scheme::LaxFriedrichs).unwrap();
        prop_assert!(total_variation(&run.final_state) <= total_variation(&init) + 1e-12);
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        for s in &run.final_state {
            prop_assert!(s[0] >= lo - 1e-12 && s[0] <= hi + 1e-12);
        }
    }
}
