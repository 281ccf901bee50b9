//! End-to-end: construct, store, reload and re-verify.

use gtw_core::gtw::{detect_sonic_locus, integrate_gtw, GtwOptions, GtwWindow, SonicKind, TravellingFrame};
use gtw_core::io::{read_field, write_field};
use gtw_core::models::{BarotropicModel, Beta, ForceSpec, GtwClosedForm, PressureLaw};
use gtw_core::residual::{field_difference, grid_difference, grid_pde_residual};
use gtw_core::{Error, SolutionField};
use nalgebra::dvector;

fn window() -> GtwWindow {
    GtwWindow {
        x_min: -2.0,
        x_max: 2.0,
        t_max: 1.0,
        nx: 81,
        nt: 41,
    }
}

#[test]
fn stored_flagship_field_keeps_its_residual() {
    let model = BarotropicModel::flagship();
    let sol = integrate_gtw(
        model.clone(),
        &TravellingFrame::barotropic_family(1.0, 0.5),
        &dvector![1.0, 1.1],
        0.0,
        window(),
        &GtwOptions::default(),
    )
    .unwrap();
    let grid = sol.grid().unwrap();
    let back = read_field(&write_field(&grid).unwrap()).unwrap();
    assert_eq!(grid_difference(&grid, &back).unwrap().max, 0.0);

    // second-order differences on a 0.05 × 0.025 grid
    let (report, _) = grid_pde_residual(&model, &back).unwrap();
    assert!(report.max < 5e-3, "{report:?}");
    let exact = GtwClosedForm::flagship();
    let d = field_difference(&back, &exact, &grid.xs, &grid.ts, &grid.components).unwrap();
    assert!(d.max < 1e-8, "{d:?}");
}

#[test]
fn constant_beta_profile_matches_construction() {
    // β constant: no closed form for R, so the closed form integrates R' = −k1 c β
    let law = PressureLaw::isothermal(1.5);
    let beta = Beta::Constant(0.4);
    let model = BarotropicModel::new(
        law.clone(),
        ForceSpec::GtwFamily {
            k1: 0.3,
            s: 0.5,
            beta: beta.clone(),
        },
    );
    let exact = GtwClosedForm::new(0.3, 0.5, 0.2, 1.2, beta, law, (-4.0, 4.0)).unwrap();
    let anchor = exact.eval(0.0, 0.0).unwrap();
    let sol = integrate_gtw(
        model,
        &TravellingFrame::barotropic_family(0.5, 0.3),
        &anchor,
        0.0,
        GtwWindow {
            nx: 21,
            nt: 11,
            ..window()
        },
        &GtwOptions::default(),
    )
    .unwrap();
    let d = field_difference(&sol, &exact, &sol.xs, &sol.ts, &["rho".into(), "u".into()]).unwrap();
    assert!(d.max < 1e-8, "{d:?}");
}

#[test]
fn sonic_scan_agrees_with_construction_failure() {
    let model = BarotropicModel::new(
        PressureLaw::polytropic(1.0, 2.0),
        ForceSpec::custom("-u rho/2", |rho, u| -0.5 * u * rho),
    );
    let frame = TravellingFrame::zero(1.0, 2);
    let hits = detect_sonic_locus(&model, &frame, &dvector![0.9, -1.0], &dvector![1.1, 1.0], 5, None).unwrap();
    // on ρ = 1 the 2-family crossing is at u = 1 − √2
    let u_sonic = 1.0 - 2f64.sqrt();
    let hit = hits
        .iter()
        .find(|h| h.family == 1 && h.point[0] == 1.0)
        .unwrap_or_else(|| panic!("{hits:?}"));
    assert!((hit.point[1] - u_sonic).abs() < 1e-12);
    assert_eq!(hit.kind, SonicKind::SubShock);

    let err = integrate_gtw(model, &frame, &dvector![1.0, u_sonic], 0.0, window(), &GtwOptions::default()).unwrap_err();
    assert!(matches!(err, Error::SubShock { family: 1, .. }), "{err:?}");
}
