use poweralert::game::Schedule;
use poweralert::icgen::{assemble_program, deserialize_strict, serialize, ProgramShape};
use poweralert::power::{
    extract_power_states, read_trace, round_phases, synthesize_trace, write_trace, ExtractionConfig, PfsmParams,
    PowerTrace, RoundPhases,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn program_wire_round_trip(
        seed in any::<u64>(),
        degree in 2usize..=64,
        depth in 1u32..=8,
        lfsr_count in 1usize..=12,
        acc_bytes in 1u32..=16,
        wide in any::<bool>(),
    ) {
        let shape = ProgramShape {
            degree,
            depth,
            lfsr_count,
            accumulator_bits: acc_bytes * 8,
            word_size: if wide { 8 } else { 4 },
        };
        let program = assemble_program(shape, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(deserialize_strict(&serialize(&program)).unwrap(), program);
    }

    /// Samples are stored as `f32`, so single-precision values survive
    /// exactly.
    #[test]
    fn trace_file_round_trip(
        samples in prop::collection::vec(-10.0f32..10.0, 1..500),
        fs in 1e3f64..1e7,
    ) {
        let trace = PowerTrace::new(samples.into_iter().map(f64::from).collect(), fs);
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        prop_assert_eq!(read_trace(buf.as_slice()).unwrap(), trace);
    }

    /// Extra idle time before the round only lengthens the first plateau
    /// and shifts the others.
    #[test]
    fn extraction_is_shift_invariant(extra in 0usize..400, hash_us in 300.0f64..1500.0) {
        let fs = 500e3;
        let params = PfsmParams::default();
        let phases = round_phases(&RoundPhases {
            lead_in: 100e-6,
            network: 250e-6,
            gap: 50e-6,
            load: 50e-6,
            hash: hash_us * 1e-6,
            output: 50e-6,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let base = synthesize_trace(&phases, &params, fs, &mut rng).unwrap();
        let mut shifted = vec![params.i_idle; extra];
        shifted.extend_from_slice(&base.samples);
        let shifted = PowerTrace::new(shifted, fs);

        let cfg = ExtractionConfig::default();
        let a = extract_power_states(&base, &cfg).unwrap();
        let b = extract_power_states(&shifted, &cfg).unwrap();
        prop_assert_eq!(a.len(), b.len());
        let dt = extra as f64 / fs;
        prop_assert!((b[0].duration - a[0].duration - dt).abs() < 1e-9);
        for (x, y) in a.iter().zip(&b).skip(1) {
            prop_assert!((x.duration - y.duration).abs() < 1e-9);
            prop_assert!((x.t_a + dt - y.t_a).abs() < 1e-9);
            prop_assert!((x.mean_current - y.mean_current).abs() < 1e-9);
            prop_assert_eq!(x.core_start + extra, y.core_start);
        }
    }

    #[test]
    fn hidden_time_is_a_bounded_ramp(
        period in 1.0f64..500.0,
        hide_frac in 0.0f64..=1.0,
        phase_frac in 0.0f64..1.0,
        y1 in 0.0f64..5000.0,
        step in 0.0f64..100.0,
    ) {
        let s = Schedule::periodic(phase_frac * period, period, hide_frac * period);
        let (h1, h2) = (s.hidden_time(y1), s.hidden_time(y1 + step));
        let eps = 1e-9 * (y1 + step + period);
        prop_assert!(h1 >= -eps && h1 <= y1 + eps);
        prop_assert!(h2 + eps >= h1 && h2 - h1 <= step + eps);
    }
}
