use gtw_cli::config::Tolerances;
use gtw_cli::expr::Expr;
use gtw_cli::ExperimentConfig;
use proptest::prelude::*;

proptest! {
    #[test]
    fn arbitrary_text_never_panics_the_expression_parser(text in "\\PC{0,64}", x in -10.0..10.0f64) {
        if let Ok(e) = Expr::parse(&text, &["x"]) {
            let _ = e.eval(&[x]);
        }
    }

    #[test]
    fn arbitrary_text_never_panics_the_config_parser(text in "\\PC{0,256}") {
        let _ = ExperimentConfig::from_toml(&text);
    }

    #[test]
    fn polynomials_evaluate_like_rust(c in prop::collection::vec(-100i32..100, 1..6), x in -3.0..3.0f64) {
        // integer coefficients exercise the literal promotion: c/3 must not truncate
        let text = c
            .iter()
            .enumerate()
            .map(|(k, ck)| format!("({ck})/3*x^{k}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let e = Expr::parse(&text, &["x"]).unwrap();
        let want: f64 = c.iter().enumerate().map(|(k, &ck)| ck as f64 / 3.0 * x.powi(k as i32)).sum();
        let got = e.eval(&[x]).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{text}: {got} vs {want}");
    }

    #[test]
    fn positive_overrides_are_applied_exactly(v in 1e-300..1e300f64) {
        let mut t = Tolerances::default();
        t.apply_override(&format!("compat={v:e}")).unwrap();
        prop_assert_eq!(t.compat, v);
        let negative = format!("compat={}", -v);
        prop_assert!(t.apply_override(&negative).is_err());
    }
}
