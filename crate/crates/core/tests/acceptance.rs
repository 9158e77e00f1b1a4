//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `--nocapture`). Criterion 10, byte-identical CLI
//! output across thread counts, lives in the CLI crate's test suite next to
//! the binary it exercises.

use qldpc_relay::bench::{
    self, map_oracle, realtime_budget, run_one_shot, run_shots, run_windowed_shots, shot_seed,
    TimingModel,
};
use qldpc_relay::bp::{relay_decode, RelayConfig};
use qldpc_relay::fixed_ref::SumOrder;
use qldpc_relay::gateware::{beta_range, draw_beta};
use qldpc_relay::model::{gen_memory_code, gen_single_shot_code, ErrorVector, Syndrome};
use qldpc_relay::qarith::{approx_mul_shift, beta_to_int, BetaInt, Precision, PrecisionSpec};
use qldpc_relay::rng::{node_rng, XorShift64Star};
use qldpc_relay::verify;
use qldpc_relay::window::{self, StreamEvent, WindowState};

#[test]
fn criterion_01_reduced_multiplier_table() {
    // The worked example: 15 x 7 at scale 8.
    assert_eq!(approx_mul_shift(15, 7, 3), 11);
    let partials: Vec<u64> = (0..4).rev().map(|k| (7u64 << k) >> 3).collect();
    assert_eq!(partials, vec![7, 3, 1, 0]);
    assert_eq!(11 * 8, 88); // pre-shift view of the truncated sum
    assert_eq!(15 * 7, 105); // exact product
    // Exhaustive error bound.
    for a in 0..64u64 {
        for b in 0..64u64 {
            for m in 0..=5u32 {
                let approx = approx_mul_shift(a, b, m);
                let exact = (a * b) >> m;
                assert!(approx <= exact, "a={a} b={b} m={m}");
                assert!(exact - approx <= a.count_ones() as u64, "a={a} b={b} m={m}");
            }
        }
    }
    println!("criterion 1 PASS: reduced-logic multiplier matches the table, error bound exhaustive");
}

#[test]
fn criterion_02_beta_quantization() {
    let spec = PrecisionSpec::int4_2_8();
    assert_eq!(beta_to_int(-0.24, &spec), BetaInt(10));
    assert_eq!(beta_to_int(0.66, &spec), BetaInt(3));
    let config = RelayConfig::reference(0);
    let (lo, hi) = beta_range(&config, &spec);
    assert_eq!((lo, hi), (3, 10));
    for node in 0..200 {
        for leg in 1..6 {
            let mut rng = node_rng(99, node, leg);
            let b = draw_beta(&mut rng, lo, hi);
            assert!((3..=10).contains(&b.0));
        }
    }
    println!("criterion 2 PASS: memory strengths [-0.24, 0.66] quantize to [3, 10] at M=8");
}

#[test]
fn criterion_03_standard_bp_reduction() {
    let spec = PrecisionSpec::int4_2_8();
    let mut rng = XorShift64Star::seeded(0xb003 ^ 0x1234);
    for trial in 0..50 {
        let model = verify::random_model(&mut rng, 14, 30);
        let sigma = verify::random_syndrome(&mut rng, model.num_checks());
        for alpha in [false, true] {
            assert!(
                verify::reduction_check_f64(&model, &sigma, 20, alpha),
                "f64 trace mismatch, trial {trial}, alpha {alpha}"
            );
            assert!(
                verify::reduction_check_int(&model, &sigma, &spec, 20, alpha),
                "int trace mismatch, trial {trial}, alpha {alpha}"
            );
        }
    }
    println!("criterion 3 PASS: zero-memory traces equal plain min-sum, f64 and int4.2.8, 50 models");
}

#[test]
fn criterion_04_dual_path_bit_exactness() {
    // 1000 random (model, syndrome, seed) triples across the default and the
    // narrow-accumulator scheme; the latter saturates constantly.
    let wide = verify::dual_path_trials(700, 41, &PrecisionSpec::int4_2_8(), SumOrder::LeftToRight);
    assert!(
        wide.mismatches.is_empty(),
        "wide-accumulator mismatch: {:?}",
        wide.mismatches.first().map(|c| &c.detail)
    );
    let narrow = verify::dual_path_trials(
        300,
        42,
        &verify::narrow_accumulator_spec(),
        SumOrder::LeftToRight,
    );
    assert!(
        narrow.mismatches.is_empty(),
        "narrow-accumulator mismatch: {:?}",
        narrow.mismatches.first().map(|c| &c.detail)
    );
    println!("criterion 4 PASS: gateware and per-edge fixed-point agree on 1000 random triples");
}

#[test]
fn criterion_05_oracle_equivalence_desk_scale() {
    let model = gen_single_shot_code(5, 0.05).unwrap();
    let config = RelayConfig::reference(0);

    // Exhaustive syndromes: every converged decode reproduces its syndrome.
    let mut map_by_sigma = Vec::new();
    for s in 0..16u32 {
        let sigma = Syndrome((0..4).map(|i| ((s >> i) & 1) as u8).collect());
        let out = relay_decode(&model, &sigma, &config);
        if out.converged {
            assert_eq!(model.apply_check_matrix(&out.error_estimate), sigma);
        }
        map_by_sigma.push(map_oracle(&model, &sigma).unwrap());
    }

    let shots = 10_000u64;
    let mut decoder_ok = 0u64;
    let mut oracle_ok = 0u64;
    for i in 0..shots {
        let seed = shot_seed(55, i);
        let mut rng = XorShift64Star::seeded(seed);
        let e = bench::sample_error(&model, &mut rng);
        let sigma = model.apply_check_matrix(&e);
        let truth = model.apply_action_matrix(&e);

        let shot = run_one_shot(&model, &config, &Precision::F64, seed);
        if shot.success {
            decoder_ok += 1;
            // Success certification is exact by construction; re-check both
            // halves explicitly.
            let out = relay_decode(&model, &sigma, &RelayConfig { seed, ..config });
            assert_eq!(model.apply_check_matrix(&out.error_estimate), sigma);
            assert_eq!(model.apply_action_matrix(&out.error_estimate), truth);
        }
        let sigma_code = sigma.0.iter().enumerate().fold(0u32, |acc, (k, &b)| {
            acc | ((b as u32) << k)
        });
        if map_by_sigma[sigma_code as usize].best_class == truth {
            oracle_ok += 1;
        }
    }
    assert!(
        decoder_ok as f64 >= 0.9 * oracle_ok as f64,
        "decoder {decoder_ok} vs oracle {oracle_ok}"
    );
    println!(
        "criterion 5 PASS: relay success {decoder_ok}/{shots} >= 0.9x oracle {oracle_ok}/{shots}"
    );
}

#[test]
fn criterion_06_precision_parity_desk_scale() {
    // Three solutions with lowest-weight selection: with a single solution
    // the two arithmetic paths return whichever valid answer their dynamics
    // reach first, which separates them by ~1% in either direction on this
    // tie-rich model; weight selection removes the first-found luck and
    // exposes the actual arithmetic parity.
    let config = RelayConfig {
        solutions_sought: 3,
        ..RelayConfig::reference(0)
    };
    let shots = 100_000u64;
    for p in [0.01, 0.03] {
        let model = gen_memory_code(5, 10, p, p).unwrap();
        let f64_report = run_shots(&model, &config, &Precision::F64, shots, 2024);
        let int_report = run_shots(
            &model,
            &config,
            &Precision::Fixed(PrecisionSpec::int4_2_8()),
            shots,
            2024,
        );
        let overlap =
            f64_report.ler_lo <= int_report.ler_hi && int_report.ler_lo <= f64_report.ler_hi;
        assert!(
            overlap,
            "p={p}: intervals disjoint, f64 [{:.4e}, {:.4e}] vs int [{:.4e}, {:.4e}]",
            f64_report.ler_lo, f64_report.ler_hi, int_report.ler_lo, int_report.ler_hi
        );
        assert!(
            int_report.logical_error_rate <= 2.0 * f64_report.logical_error_rate,
            "p={p}: int {} vs f64 {}",
            int_report.logical_error_rate,
            f64_report.logical_error_rate
        );
        println!(
            "criterion 6 point p={p}: f64 ler {:.4e}, int4.2.8 ler {:.4e}",
            f64_report.logical_error_rate, int_report.logical_error_rate
        );
    }
    println!("criterion 6 PASS: int4.2.8 matches f64 at desk scale (overlapping intervals, <= 2x)");
}

#[test]
fn criterion_07_windowed_equals_global_in_degenerate_limit() {
    let model = gen_memory_code(4, 6, 0.02, 0.02).unwrap();
    let config = RelayConfig::reference(0);
    let layout_cycles = model.layout().unwrap().cycles;
    let m_prime = model.layout().unwrap().detectors_per_cycle;
    let wcfg = window::build_window_model(&model, layout_cycles, layout_cycles - 1).unwrap();

    for i in 0..1000u64 {
        let seed = shot_seed(777, i);
        let mut rng = XorShift64Star::seeded(seed);
        let e = bench::sample_error(&model, &mut rng);
        let sigma = model.apply_check_matrix(&e);
        let truth = model.apply_action_matrix(&e);
        let shot_config = RelayConfig { seed, ..config };

        // Global decode.
        let global = relay_decode(&model, &sigma, &shot_config);

        // Windowed pipeline with the same sampled history and seed; the
        // single terminal window must invoke the identical decode.
        let mut inner_outcomes = Vec::new();
        let mut decoder = |m: &qldpc_relay::model::DecodingModel,
                           mask: &[bool],
                           s: &Syndrome| {
            let out = qldpc_relay::bp::relay_decode_masked(m, s, &shot_config, Some(mask));
            inner_outcomes.push(out.clone());
            out
        };
        let mut state = WindowState::new(&wcfg, model.num_logicals());
        for c in 0..layout_cycles - 1 {
            let block = sigma.0[c * m_prime..(c + 1) * m_prime].to_vec();
            window::ingest(&mut state, &wcfg, StreamEvent::Detectors(block)).unwrap();
            assert!(window::try_decode_window(&mut state, &wcfg, &mut decoder).is_none());
        }
        // Closure codeword carrying the true logical parity.
        let total: Vec<u8> = (0..m_prime)
            .map(|k| (0..layout_cycles).fold(0u8, |acc, c| acc ^ sigma.0[c * m_prime + k]))
            .collect();
        let mut codeword = vec![0u8; 4];
        codeword[0] = truth[0];
        for q in 0..total.len() {
            codeword[q + 1] = codeword[q] ^ total[q];
        }
        window::ingest(&mut state, &wcfg, StreamEvent::Codeword(codeword)).unwrap();
        let (frame, ocorr) = window::finalize(&mut state, &wcfg, &mut decoder).unwrap();

        assert_eq!(inner_outcomes.len(), 1, "shot {i}: expected a single window");
        assert_eq!(inner_outcomes[0], global, "shot {i}: decode differs");
        let expected_frame = model.apply_action_matrix(&global.error_estimate);
        assert_eq!(frame, expected_frame, "shot {i}: frame differs");
        let expected_ocorr: Vec<u8> = truth
            .iter()
            .zip(&expected_frame)
            .map(|(t, f)| t ^ f)
            .collect();
        assert_eq!(ocorr, expected_ocorr, "shot {i}: observables differ");
    }
    println!("criterion 7 PASS: single-window pipeline reproduces global decode bitwise, 1000 shots");
}

#[test]
fn criterion_08_sliding_window_end_to_end() {
    let p = 0.01;
    let model = gen_memory_code(5, 20, p, p).unwrap();
    let config = RelayConfig::reference(0);
    let wcfg = window::build_window_model(&model, 5, 2).unwrap();
    let shots = 10_000u64;
    let seed = 808;

    let windowed = run_windowed_shots(
        &model,
        &wcfg,
        &config,
        &Precision::F64,
        shots,
        seed,
        None,
    )
    .unwrap();
    let global = run_shots(&model, &config, &Precision::F64, shots, seed);
    assert!(
        windowed.logical_error_rate <= 2.0 * global.logical_error_rate,
        "windowed {} vs global {}",
        windowed.logical_error_rate,
        global.logical_error_rate
    );

    // Carry self-cancellation: a lone data error inside the first commit
    // region leaves nothing behind once its window commits.
    let m_prime = 4;
    let cols_per_cycle = 9;
    for cycle in 0..2 {
        for q in 0..5 {
            let col = cycle * cols_per_cycle + q;
            let e = ErrorVector::from_support(model.num_errors(), &[col]);
            let history = model.apply_check_matrix(&e);
            let mut state = WindowState::new(&wcfg, 1);
            let shot_config = RelayConfig { seed: 5, ..config };
            let mut decoder = |m: &qldpc_relay::model::DecodingModel,
                               mask: &[bool],
                               s: &Syndrome| {
                qldpc_relay::bp::relay_decode_masked(m, s, &shot_config, Some(mask))
            };
            for c in 0..20 {
                let block = history.0[c * m_prime..(c + 1) * m_prime].to_vec();
                window::ingest(&mut state, &wcfg, StreamEvent::Detectors(block)).unwrap();
            }
            window::ingest(&mut state, &wcfg, StreamEvent::End).unwrap();
            let first = window::try_decode_window(&mut state, &wcfg, &mut decoder).unwrap();
            assert!(first.converged, "cycle {cycle} q {q}: window did not converge");
            // Everything the committed correction implies has been XORed
            // back: later windows decode a silent stream.
            while let Some(rec) = window::try_decode_window(&mut state, &wcfg, &mut decoder) {
                assert!(rec.converged);
                assert_eq!(rec.iterations, 1, "cycle {cycle} q {q}: residue left");
            }
        }
    }
    println!(
        "criterion 8 PASS: windowed ler {:.4e} <= 2x global {:.4e}; carry self-cancellation exact",
        windowed.logical_error_rate, global.logical_error_rate
    );
}

#[test]
fn criterion_09_realtime_budget() {
    let t24 = TimingModel::new(24.0, 1000.0, 0.0);
    assert_eq!(realtime_budget(&t24, 12, 8), 333);
    let t20 = TimingModel::new(20.0, 1000.0, 0.0);
    assert_eq!(realtime_budget(&t20, 10, 6), 300);
    // The published 270-iteration figure implies about 600 ns of unstated
    // per-window overhead; the overhead parameter surfaces exactly that.
    let t20_overhead = TimingModel::new(20.0, 1000.0, 600.0);
    assert_eq!(realtime_budget(&t20_overhead, 10, 6), 270);
    println!("criterion 9 PASS: budgets 333 and 300 exact; 270 reproduced via 600 ns overhead");
}

#[test]
fn criterion_10a_library_thread_invariance() {
    // Library-level half of the determinism criterion; the CLI half compares
    // process output bytes in the CLI crate's tests.
    let model = gen_memory_code(4, 5, 0.02, 0.02).unwrap();
    let config = RelayConfig::reference(0);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            run_shots(
                &model,
                &config,
                &Precision::Fixed(PrecisionSpec::int4_2_8()),
                2_000,
                99,
            )
        })
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(8));
    assert_eq!(one, run(1));
    println!("criterion 10a PASS: reports identical across 1/2/8 worker threads");
}
