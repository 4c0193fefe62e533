use super::*;
use crate::states::{rho_minus, rho_plus};
use crate::tensor::Operator;

fn params(s: u32, n_sim: u32, seed: u64) -> ProtocolParams {
    ProtocolParams::new(s, n_sim, seed).unwrap()
}

fn device_that_resolves_everything() -> DeviceModel {
    DeviceModel::new(1e-6).unwrap()
}

#[test]
fn device_model_examples() {
    let half = DeviceModel::new(0.5).unwrap();
    assert_eq!(half.n_a_max(), 6);
    // Gap at n_A = 8 is 0.4 < 0.5: unresolvable.
    assert!(!half.check(8));
    assert!(half.check(6));
    assert!(!half.check(7));
    let fine = DeviceModel::new(0.001).unwrap();
    assert_eq!(fine.n_a_max(), 3998);
    assert!(DeviceModel::new(0.0).is_err());
    assert!(DeviceModel::new(1.5).is_err());
    assert!(DeviceModel::new(f64::NAN).is_err());
}

#[test]
fn device_boundary_is_exact_on_a_delta_grid() {
    let mut last_max = u32::MAX;
    for k in 1..=40u32 {
        let delta = k as f64 / 40.0;
        let device = DeviceModel::new(delta).unwrap();
        let m = device.n_a_max();
        assert!(device.check(m), "delta={delta} m={m}");
        assert!(!device.check(m + 1), "delta={delta} m={m}");
        assert!(m <= last_max, "n_a_max must be nonincreasing in delta");
        last_max = m;
    }
}

#[test]
fn naive_flip_same_index_is_always_caught() {
    let p = params(1, 16, 0x11);
    let cfg = NaiveRedeclare {
        committed_b: Bit::Zero,
        announce_b: Bit::One,
        index_rule: IndexRule::Same,
    };
    let report = naive_attack(&p, &cfg, 4_000).unwrap();
    // Announcing the committed index under the flipped bit has overlap 0.
    assert_eq!(report.acceptances, 0);
}

#[test]
fn naive_flip_wrong_index_passes_a_quarter() {
    let p = params(1, 16, 0x12);
    let cfg = NaiveRedeclare {
        committed_b: Bit::Zero,
        announce_b: Bit::One,
        index_rule: IndexRule::Shifted,
    };
    let trials = 20_000;
    let report = naive_attack(&p, &cfg, trials).unwrap();
    assert!((report.bound - 0.25).abs() < 1e-15);
    let margin = stats::sigma_margin(0.25, trials, stats::FIVE_SIGMA);
    assert!(
        (report.acceptance_rate - 0.25).abs() < margin,
        "rate {} margin {margin}",
        report.acceptance_rate
    );
}

#[test]
fn naive_flip_respects_bound_at_s_3() {
    let p = params(3, 16, 0x13);
    let cfg = NaiveRedeclare {
        committed_b: Bit::One,
        announce_b: Bit::Zero,
        index_rule: IndexRule::Shifted,
    };
    let report = naive_attack(&p, &cfg, 20_000).unwrap();
    assert!((report.bound - 0.015625).abs() < 1e-15);
    assert!(report.within_bound(), "rate {}", report.acceptance_rate);
}

#[test]
fn steering_unveil_zero_always_accepts() {
    for n_a in [4u32, 8] {
        let p = params(4, 64, 0x21);
        let cfg = EntangledSteering {
            n_a,
            target_b: Bit::Zero,
            measurement: SteeringMeasurement::Pgm,
            device: device_that_resolves_everything(),
        };
        let report = steering_attack(&p, &cfg, 2_000).unwrap();
        assert_eq!(report.acceptances, report.trials, "n_a={n_a}");
        assert_eq!(report.bound, 1.0);
    }
}

#[test]
fn steering_unveil_one_respects_eq15_bound() {
    let p = params(4, 64, 0x22);
    let cfg = EntangledSteering {
        n_a: 8,
        target_b: Bit::One,
        measurement: SteeringMeasurement::Pgm,
        device: device_that_resolves_everything(),
    };
    let trials = 10_000;
    let report = steering_attack(&p, &cfg, trials).unwrap();
    let bound = (1.0f64 - 2.0 / 8.0).powi(4);
    assert!((report.bound - bound).abs() < 1e-15);
    assert!(report.within_bound(), "rate {}", report.acceptance_rate);
    // The uniform-component diagnostic sits at 2/n_A per register.
    let leak = report.phi_n_minus_hits as f64 / report.registers as f64;
    let margin = stats::sigma_margin(0.25, report.registers, stats::FIVE_SIGMA);
    assert!((leak - 0.25).abs() < margin, "leak {leak} margin {margin}");
}

#[test]
fn exact_oracle_steering_saturates_the_bound() {
    let p = params(2, 32, 0x23);
    let cfg = EntangledSteering {
        n_a: 8,
        target_b: Bit::One,
        measurement: SteeringMeasurement::ExactOracle,
        device: device_that_resolves_everything(),
    };
    let trials = 20_000;
    let report = steering_attack(&p, &cfg, trials).unwrap();
    let bound = (1.0f64 - 0.25).powi(2);
    let margin = stats::sigma_margin(bound, trials, stats::FIVE_SIGMA);
    assert!(
        (report.acceptance_rate - bound).abs() < margin,
        "rate {} vs saturation {bound}",
        report.acceptance_rate
    );
}

#[test]
fn steering_validates_dimensions_and_device() {
    let p = params(2, 16, 0x24);
    let mut cfg = EntangledSteering {
        n_a: 2,
        target_b: Bit::One,
        measurement: SteeringMeasurement::Pgm,
        device: device_that_resolves_everything(),
    };
    assert!(matches!(
        steering_attack(&p, &cfg, 10),
        Err(AdversaryError::BadAttackDimension { .. })
    ));
    cfg.n_a = 32;
    assert!(matches!(
        steering_attack(&p, &cfg, 10),
        Err(AdversaryError::AttackExceedsRegister { .. })
    ));
    cfg.n_a = 8;
    cfg.device = DeviceModel::new(0.5).unwrap(); // resolves only up to 6
    assert!(matches!(
        steering_attack(&p, &cfg, 10),
        Err(AdversaryError::DeviceCannotResolve { .. })
    ));
}

#[test]
fn snapped_attack_falls_to_naive_level() {
    let p = params(3, 16, 0x25);
    let cfg = EntangledSteering {
        n_a: 8,
        target_b: Bit::One,
        measurement: SteeringMeasurement::Pgm,
        device: DeviceModel::new(0.5).unwrap(), // n_a_max = 6 < 8: snapped
    };
    let trials = 20_000;
    let snapped = snapped_attack(&p, &cfg, trials).unwrap();
    assert_eq!(snapped.strategy, "snapped");
    assert!((snapped.bound - 0.25f64.powi(3)).abs() < 1e-15);
    // Two-proportion comparison against the naive attack at five sigma.
    let naive = naive_attack(
        &p,
        &NaiveRedeclare {
            committed_b: Bit::Zero,
            announce_b: Bit::One,
            index_rule: IndexRule::Shifted,
        },
        trials,
    )
    .unwrap();
    let pooled = (snapped.acceptances + naive.acceptances) as f64 / (2 * trials) as f64;
    let se = (2.0 * pooled * (1.0 - pooled) / trials as f64).sqrt();
    let z = (snapped.acceptance_rate - naive.acceptance_rate).abs() / se.max(1e-12);
    assert!(z < stats::FIVE_SIGMA, "z = {z}");
}

#[test]
fn snapped_attack_delegates_when_device_resolves() {
    let p = params(2, 16, 0x26);
    let cfg = EntangledSteering {
        n_a: 4,
        target_b: Bit::One,
        measurement: SteeringMeasurement::Pgm,
        device: DeviceModel::new(0.5).unwrap(), // resolves n_a = 4
    };
    let a = snapped_attack(&p, &cfg, 500).unwrap();
    let b = steering_attack(&p, &cfg, 500).unwrap();
    assert_eq!(a.strategy, "steering");
    assert_eq!(a.acceptances, b.acceptances);
    assert_eq!(a.bound, b.bound);
}

#[test]
fn snapped_unveil_zero_is_unaffected() {
    let p = params(3, 16, 0x27);
    let cfg = EntangledSteering {
        n_a: 8,
        target_b: Bit::Zero,
        measurement: SteeringMeasurement::Pgm,
        device: DeviceModel::new(0.5).unwrap(),
    };
    let report = snapped_attack(&p, &cfg, 2_000).unwrap();
    assert_eq!(report.acceptances, report.trials);
}

#[test]
fn helstrom_orthogonal_case_is_perfect() {
    let report = helstrom_attack(2, 3_000, 0x31).unwrap();
    assert_eq!(report.correct, report.trials);
    assert_eq!(report.expected, 1.0);
}

#[test]
fn helstrom_success_matches_closed_form_at_n_5() {
    let trials = 20_000;
    let report = helstrom_attack(5, trials, 0x32).unwrap();
    assert!((report.expected - 0.75).abs() < 1e-15);
    let margin = stats::sigma_margin(0.75, trials, stats::FIVE_SIGMA);
    assert!(
        (report.success_rate - 0.75).abs() < margin,
        "rate {}",
        report.success_rate
    );
}

#[test]
fn helstrom_advantage_decreases_with_dimension() {
    let mut last = f64::INFINITY;
    for n in [3u32, 5, 17, 65] {
        let expected = 0.5 + 0.5 / ((n - 1) as f64).sqrt();
        assert!(expected < last);
        last = expected;
    }
}

#[test]
fn helstrom_measurement_is_the_optimal_eigenspace_split() {
    // Brute force over all two-outcome measurements built from eigenvector
    // subsets of ρ_+ − ρ_− at n = 3: none beats 1/2 + D/2, and the positive
    // eigenspace attains it.
    let n = 3u32;
    let diff = rho_plus(n)
        .unwrap()
        .op()
        .sub(rho_minus(n).unwrap().op())
        .unwrap();
    let eigen = diff.hermitian_eig().unwrap();
    let rp = rho_plus(n).unwrap();
    let rm = rho_minus(n).unwrap();
    let mut best = 0.0f64;
    for mask in 0..(1u32 << eigen.values.len()) {
        let mut projector = Operator::zeros(n as usize);
        for (k, v) in eigen.vectors.iter().enumerate() {
            if mask & (1 << k) != 0 {
                projector = projector.add(&Operator::projector(v).unwrap()).unwrap();
            }
        }
        let success = 0.5 * (rp.op().mul(&projector).unwrap().trace().re)
            + 0.5 * (1.0 - rm.op().mul(&projector).unwrap().trace().re);
        best = best.max(success);
    }
    let optimum = 0.5 + 0.5 / ((n - 1) as f64).sqrt();
    assert!((best - optimum).abs() < 1e-12, "best {best} vs {optimum}");
}

#[test]
fn multi_copy_reduces_to_single_copy_at_s_1() {
    let d = multi_copy_distinguisher(3, 1).unwrap();
    assert!((d - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
}

#[test]
fn multi_copy_orthogonal_mixtures_stay_distance_one() {
    for s in 1..=5 {
        let d = multi_copy_distinguisher(2, s).unwrap();
        assert!((d - 1.0).abs() < 1e-10, "s={s}");
    }
}

#[test]
fn multi_copy_grows_with_copies_and_matches_svd_oracle() {
    let single = multi_copy_distinguisher(5, 1).unwrap();
    assert!((single - 0.5).abs() < 1e-12);
    let double = multi_copy_distinguisher(5, 2).unwrap();
    assert!(double >= single);
    assert!(double <= 2.0 * single);
    // Independent route: singular values of the difference.
    let plus = rho_plus(5).unwrap();
    let minus = rho_minus(5).unwrap();
    let diff = plus
        .tensor(&plus)
        .op()
        .sub(minus.tensor(&minus).op())
        .unwrap();
    let dim = diff.dim();
    let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| diff.get(i, j));
    let oracle = 0.5 * m.svd(false, false).singular_values.iter().sum::<f64>();
    assert!((double - oracle).abs() < 1e-10, "{double} vs {oracle}");
}

#[test]
fn multi_copy_rejects_overflowing_dimensions() {
    assert!(matches!(
        multi_copy_distinguisher(5, 7),
        Err(AdversaryError::DimensionOverflow { .. })
    ));
    // 8^5 > 4096 while 3^5 is comfortably inside.
    assert!(matches!(
        multi_copy_distinguisher(8, 5),
        Err(AdversaryError::DimensionOverflow { .. })
    ));
    assert!(multi_copy_distinguisher(3, 5).is_ok());
}

#[test]
fn leak_rate_is_measurement_independent() {
    let n = 8u32;
    assert!((phi_n_exact_weight(n).unwrap() - 0.25).abs() < 1e-12);
    let trials = 10_000;
    for (k, action) in [
        AlphaAction::None,
        AlphaAction::HonestBasis,
        AlphaAction::Pgm,
        AlphaAction::Unitary(crate::substrate::random_unitary(
            n as usize,
            &mut crate::substrate::session_rng(0x41, 7),
        )),
    ]
    .iter()
    .enumerate()
    {
        let report = phi_n_leak_experiment(n, action, trials, 0x42 + k as u64).unwrap();
        assert!(
            report.within_five_sigma(),
            "arm {k}: rate {} vs {}",
            report.rate,
            report.exact
        );
    }
}

#[test]
fn no_signaling_holds_exactly() {
    let deviation = no_signaling_max_deviation(8, 12, 0x51).unwrap();
    assert!(deviation < 1e-10, "deviation {deviation:e}");
}
