use num_complex::Complex64;
use proptest::prelude::*;
use transtab_cli::scenario::{
    format_complex, GeneratorRecord, InitialSection, ModelName, OutputSection, ReducedSpec, RunSection, StepSpec,
    SystemSection,
};
use transtab_cli::ScenarioFile;

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), 1e-12..1e-6f64, Just(1.0 / 3.0)]
}

fn generator() -> impl Strategy<Value = GeneratorRecord> {
    (
        0.1..50.0f64,
        0.0..30.0f64,
        0.0..0.01f64,
        0.01..0.5f64,
        -2.0..2.0f64,
        0.5..1.5f64,
    )
        .prop_map(|(h, d, r_a, x, p_m, e)| GeneratorRecord {
            h: Some(h),
            d: Some(d),
            r_a: Some(r_a),
            x_d_prime: Some(x),
            p_m: Some(p_m),
            e_q_prime: Some(e),
            ..Default::default()
        })
}

fn file() -> impl Strategy<Value = ScenarioFile> {
    (1usize..4).prop_flat_map(|m| {
        (
            prop::collection::vec(generator(), m),
            prop::collection::vec((value(), value()), m * m),
            prop::collection::vec(-3.0..3.0f64, m),
            prop_oneof![
                (1u32..2000).prop_map(|d| StepSpec::Fraction(format!("1/{d}"))),
                (1e-4..0.1f64).prop_map(StepSpec::Value)
            ],
            1usize..5,
        )
            .prop_map(move |(generators, entries, delta, step, stride)| ScenarioFile {
                system: SystemSection {
                    model: ModelName::Classical,
                    generators,
                    network: None,
                    reduced: Some(ReducedSpec {
                        y_t: Some(
                            entries
                                .chunks(m)
                                .map(|r| r.iter().map(|&(g, b)| format_complex(Complex64::new(g, b))).collect())
                                .collect(),
                        ),
                        y: None,
                    }),
                },
                initial: InitialSection {
                    delta: Some(delta),
                    ..Default::default()
                },
                events: vec![],
                run: RunSection {
                    t_end: 1.0,
                    step,
                    frequency: Some(60.0),
                    omega_s: None,
                    stride,
                },
                output: OutputSection::default(),
            })
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(f in file()) {
        let again = ScenarioFile::parse(&f.to_toml()).unwrap();
        prop_assert_eq!(&again, &f);
        let third = ScenarioFile::parse(&again.to_toml()).unwrap();
        prop_assert_eq!(third.to_toml(), f.to_toml());
        match (f.to_scenario(), again.to_scenario()) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "validation differs: {:?} vs {:?}", a.err(), b.err()),
        }
    }
}
