//! Temporary tuning harness; deleted before ship.

use nldecomp::learner::{build_features, train, FeatureKind, FeatureSpec, TrainConfig};
use nldecomp::signals::generate_filtered_noise;
use nldecomp::synth;

#[test]
#[ignore]
fn tune() {
    let x = generate_filtered_noise(92, 4096, 1.0).unwrap();
    let spec = FeatureSpec {
        delay_taps: 0,
        feature_kinds: vec![FeatureKind::I, FeatureKind::Q],
    };
    let feats = build_features(&x, &spec).unwrap();
    let targets = x.samples().to_vec();
    println!("== linear target H=8 (want <= -40 dB in 5000) ==");
    for lr in [0.05, 0.1, 0.25, 0.5] {
        let cfg = TrainConfig {
            hidden: 8,
            step_size: lr,
            max_iters: 5000,
            target_nmse_db: Some(-40.0),
            ..TrainConfig::default()
        };
        match train(&feats, &targets, &cfg) {
            Ok((_, trace)) => println!(
                "lr={lr} -> {:.1} dB in {} iters",
                10.0 * trace.loss_curve.last().unwrap().log10(),
                trace.iterations
            ),
            Err(e) => println!("lr={lr} -> {e}"),
        }
    }

    let pa = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
    let xs = generate_filtered_noise(93, 16384, 0.4).unwrap();
    let ys = synth::simulate(&pa, &xs).unwrap();
    let fspec = FeatureSpec {
        delay_taps: 4,
        feature_kinds: vec![
            FeatureKind::I,
            FeatureKind::Q,
            FeatureKind::Abs,
            FeatureKind::Abs2,
            FeatureKind::Abs3,
        ],
    };
    let feats2 = build_features(&xs, &fspec).unwrap();
    println!("== PA y-target (ARVTDNN, H=25, 3000 iters) ==");
    for lr in [0.05, 0.1, 0.25, 0.5] {
        let cfg = TrainConfig {
            hidden: 25,
            step_size: lr,
            max_iters: 3000,
            ..TrainConfig::default()
        };
        match train(&feats2, ys.samples(), &cfg) {
            Ok((_, trace)) => println!(
                "lr={lr} -> {:.1} dB in {} iters",
                10.0 * trace.loss_curve.last().unwrap().log10(),
                trace.iterations
            ),
            Err(e) => println!("lr={lr} -> {e}"),
        }
    }

    // PA d-target and h-target at matched features, H sweep.
    let d: Vec<_> = ys
        .samples()
        .iter()
        .zip(xs.samples())
        .map(|(a, b)| a - b)
        .collect();
    let g = synth::true_static_part(&pa, &xs).unwrap();
    let h: Vec<_> = ys
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a - b)
        .collect();
    for (name, tgt) in [("d-target", &d), ("h-target", &h)] {
        println!("== PA {name} (ARVTDNN feats, target -35 dB, lr 0.25) ==");
        for hdim in [5usize, 10, 20, 40, 80] {
            let cfg = TrainConfig {
                hidden: hdim,
                step_size: 0.25,
                max_iters: 4000,
                target_nmse_db: Some(-35.0),
                ..TrainConfig::default()
            };
            match train(&feats2, tgt, &cfg) {
                Ok((_, trace)) => println!(
                    "H={hdim} -> {:.1} dB in {} iters",
                    10.0 * trace.loss_curve.last().unwrap().log10(),
                    trace.iterations
                ),
                Err(e) => println!("H={hdim} -> {e}"),
            }
        }
    }
}
