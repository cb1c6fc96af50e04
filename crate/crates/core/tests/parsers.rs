use ebt_core::io::{measure_csv, parse_config, parse_measure_csv};
use ebt_core::DiscreteMeasure;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn config_parser_never_panics(text in ".{0,400}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn config_parser_survives_mangled_json(
        key in "[a-zA-Z_]{1,12}",
        value in prop_oneof![Just("1".to_string()), Just("-1e308".to_string()), Just("null".to_string()), "\"[a-z]{0,6}\"", Just("[]".to_string())],
    ) {
        let text = format!(
            r#"{{"model":"pure_decay","params":{{"mu0":0.5}},"x_b":0,"T":1,"N":2,"n":2,"boundary_formulation":"simplified","{key}":{value}}}"#
        );
        let _ = parse_config(&text);
    }

    #[test]
    fn measure_parser_never_panics(text in "(location,mass\n)?([-0-9.e ,a-z]{0,20}\n){0,8}") {
        let _ = parse_measure_csv(&text);
    }

    #[test]
    fn measure_csv_round_trips(pairs in prop::collection::vec((-1e6f64..1e6, 0.0f64..1e6), 0..20)) {
        let m = DiscreteMeasure::from_pairs(&pairs).unwrap();
        prop_assert_eq!(parse_measure_csv(&measure_csv(&m)).unwrap(), m);
    }
}
