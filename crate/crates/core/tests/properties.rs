use gtw_core::constraints::InvariantChart;
use gtw_core::gtw::{pi_coefficients, TravellingFrame};
use gtw_core::io::{read_field, write_field};
use gtw_core::models::{BarotropicModel, Beta, ForceSpec, PressureLaw};
use gtw_core::spectral::{decompose, decompose_numeric, DecomposeOptions};
use gtw_core::{GridField, HyperbolicSystem};
use nalgebra::{dvector, DVector};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = PressureLaw> {
    prop_oneof![
        (0.2..3.0f64, 1.05..3.0f64).prop_map(|(k, g)| PressureLaw::polytropic(k, g)),
        (0.2..3.0f64).prop_map(PressureLaw::isothermal),
    ]
}

fn grid_field() -> impl Strategy<Value = GridField> {
    (2usize..7, 1usize..5, 1usize..3).prop_flat_map(|(nx, nt, nc)| {
        let n = nx * nt;
        (
            prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), n * nc),
            -1e6..1e6f64,
            1e-9..1e3f64,
        )
            .prop_map(move |(values, x0, dx)| {
                let xs: Vec<f64> = (0..nx).map(|i| x0 + dx * i as f64).collect();
                let ts: Vec<f64> = (0..nt).map(|j| 0.5 * j as f64).collect();
                let names = (0..nc).map(|c| format!("q{c}")).collect();
                let state = values.chunks(n).map(<[f64]>::to_vec).collect();
                GridField::new(xs, ts, names, state).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_files_round_trip_bit_for_bit(field in grid_field()) {
        let text = write_field(&field).unwrap();
        let back = read_field(&text).unwrap();
        prop_assert_eq!(back.xs.clone(), field.xs.clone());
        prop_assert_eq!(back.ts.clone(), field.ts.clone());
        for c in 0..field.components.len() {
            prop_assert_eq!(back.component(c), field.component(c));
        }
        prop_assert_eq!(write_field(&back).unwrap(), text);
    }

    #[test]
    fn numeric_eigenstructure_is_biorthonormal(law in law(), rho in 0.05..20.0f64, u in -10.0..10.0f64) {
        let m = BarotropicModel::new(law, ForceSpec::None);
        let s = dvector![rho, u];
        let a = m.matrix(&s);
        let d = decompose_numeric(&m, &s, &DecomposeOptions::default()).unwrap();
        prop_assert!(d.biorthonormality_defect() < 1e-12);
        prop_assert!(d.right_residual(&a) < 1e-10 * (1.0 + a.amax()));
        prop_assert!(d.left_residual(&a) < 1e-10 * (1.0 + a.amax()));
        let exact = decompose(&m, &s).unwrap();
        prop_assert!(exact.normalized().distance(&d.normalized()) < 1e-9);
    }

    /// `U_x = Σ π_j d^j`, `U_t = F − s U_x` satisfy the system pointwise for any
    /// frame, as long as the state is off the sonic loci.
    #[test]
    fn pi_derivatives_solve_the_system(
        law in law(),
        rho in 0.2..4.0f64,
        u in -3.0..3.0f64,
        s in -2.0..2.0f64,
        k1 in -1.0..1.0f64,
    ) {
        let m = BarotropicModel::new(law, ForceSpec::GtwFamily { k1, s, beta: Beta::RhoOverC });
        let state = dvector![rho, u];
        let c = m.sound_speed(rho).unwrap();
        prop_assume!((u - c - s).abs() > 0.05 && (u + c - s).abs() > 0.05);
        let frame = TravellingFrame::custom(s, "affine", move |v| dvector![0.1 * v[0], 0.3 - 0.2 * v[1]]);
        let p = pi_coefficients(&m, &frame, &state).unwrap();
        let (ux, ut) = (p.ux(), p.ut(&frame, &state));
        let residual: DVector<f64> = &ut + m.matrix(&state) * &ux - m.source(&state);
        let scale = 1.0 + ux.amax() * (1.0 + u.abs() + c);
        prop_assert!(residual.amax() < 1e-10 * scale, "{residual}");
        prop_assert!(p.reconstruction_defect < 1e-10 * scale);
    }

    #[test]
    fn chart_round_trips_and_is_constant_along_its_family(
        law in law(),
        rho in 0.1..5.0f64,
        u in -3.0..3.0f64,
        family in 0usize..2,
        retained in 0usize..2,
    ) {
        let m = BarotropicModel::new(law, ForceSpec::None);
        let chart = m.chart(family, retained).unwrap();
        let state = dvector![rho, u];
        let r = chart.invariants(&state).unwrap();
        let back = chart.to_state(&r, state[retained]).unwrap();
        prop_assert!((back - &state).amax() < 1e-9 * (1.0 + rho + u.abs()));
        let grad = chart.invariant_gradients(&state).unwrap();
        let d = &decompose(&m, &state).unwrap().right[family];
        prop_assert!((grad.row(0) * d)[0].abs() < 1e-12 * (1.0 + d.amax() * grad.amax()));
    }
}
