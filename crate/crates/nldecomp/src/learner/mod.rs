//! Shallow-network learning of system behavior, two ways.
//!
//! Full-distortion learning ([`full_learning`], ARVTDNN-style) trains one
//! network to predict the total output from time-delay features of the
//! input. Structured residual learning ([`residual_learning`],
//! SRTDNN-style) first fits the memoryless polynomial stage and trains a
//! network only on the dynamic residual h = y - G; reconstruction is
//! G + network output. The presets carry the canonical feature counts and
//! hidden sizes (25 features/25 hidden vs 5 features/50 hidden).

pub mod dpd;
pub mod features;
pub mod metrics;
pub mod mlp;

pub use dpd::{indirect_dpd, DpdConfig, DpdReport, ModelerKind};
pub use features::{build_features, FeatureKind, FeatureMatrix, FeatureSpec};
pub use metrics::{aclr_dbc, evm_db, nmse_db, nmse_db_samples};
pub use mlp::{
    complexity_account, loss_and_gradient, train, Activation, MlpModel, TrainConfig, TrainingTrace,
};

use num_complex::Complex64;

use crate::decomp::{apply_static, fit_static, StaticModel};
use crate::error::{Error, Result};
use crate::signals::SampledSignal;

fn all_kinds() -> Vec<FeatureKind> {
    vec![
        FeatureKind::I,
        FeatureKind::Q,
        FeatureKind::Abs,
        FeatureKind::Abs2,
        FeatureKind::Abs3,
    ]
}

/// 4 delay taps x 5 kinds = 25 input features.
pub fn arvtdnn_features() -> FeatureSpec {
    FeatureSpec {
        delay_taps: 4,
        feature_kinds: all_kinds(),
    }
}

/// Tap-0 only x 5 kinds = 5 input features.
pub fn srtdnn_features() -> FeatureSpec {
    FeatureSpec {
        delay_taps: 0,
        feature_kinds: all_kinds(),
    }
}

/// Training setup for one learning pipeline.
#[derive(Debug, Clone)]
pub struct LearnConfig {
    pub features: FeatureSpec,
    pub train: TrainConfig,
    /// Fraction of trailing rows held out of training; 0 disables.
    pub holdout_fraction: f64,
}

/// Full-distortion preset: 25 features, 25 hidden units.
pub fn arvtdnn_config(seed: u64) -> LearnConfig {
    LearnConfig {
        features: arvtdnn_features(),
        train: TrainConfig {
            hidden: 25,
            seed,
            ..TrainConfig::default()
        },
        holdout_fraction: 0.2,
    }
}

/// Residual preset: 5 features, 50 hidden units.
pub fn srtdnn_config(seed: u64) -> LearnConfig {
    LearnConfig {
        features: srtdnn_features(),
        train: TrainConfig {
            hidden: 50,
            seed,
            ..TrainConfig::default()
        },
        holdout_fraction: 0.2,
    }
}

/// Result of one full-distortion training run.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub model: MlpModel,
    pub trace: TrainingTrace,
    /// Reconstruction NMSE against y on the training rows.
    pub nmse_train_db: f64,
    /// Same on the holdout rows, when a holdout exists.
    pub nmse_holdout_db: Option<f64>,
}

/// Result of one residual-learning run; reconstruction is G + network.
#[derive(Debug, Clone)]
pub struct ResidualOutcome {
    pub static_model: StaticModel,
    pub model: MlpModel,
    pub trace: TrainingTrace,
    pub nmse_train_db: f64,
    pub nmse_holdout_db: Option<f64>,
    /// Extra multiply-accumulates per sample for the polynomial stage.
    pub static_mac_per_inference: usize,
}

fn split_row(rows: usize, holdout_fraction: f64) -> usize {
    let hold = ((rows as f64) * holdout_fraction).round() as usize;
    rows - hold.min(rows / 2)
}

/// Train a network to predict the total output y from features of x.
pub fn full_learning(
    x: &SampledSignal,
    y: &SampledSignal,
    cfg: &LearnConfig,
) -> Result<LearnOutcome> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let feats = build_features(x, &cfg.features)?;
    let targets = y.samples();
    let split = split_row(feats.rows(), cfg.holdout_fraction);

    let train_feats = feats.slice_rows(0, split);
    let (mut model, trace) = train(&train_feats, &targets[..split], &cfg.train)?;
    model.preset = Some(format!(
        "full[F={},H={}]",
        cfg.features.feature_count(),
        cfg.train.hidden
    ));

    let pred = model.predict_all(&feats);
    let nmse_train_db = nmse_db_samples(&pred[..split], &targets[..split])?;
    let nmse_holdout_db = if split < feats.rows() {
        Some(nmse_db_samples(&pred[split..], &targets[split..])?)
    } else {
        None
    };
    Ok(LearnOutcome {
        model,
        trace,
        nmse_train_db,
        nmse_holdout_db,
    })
}

/// Fit the static polynomial, then train a network on the residual
/// h = y - G only.
pub fn residual_learning(
    x: &SampledSignal,
    y: &SampledSignal,
    static_order: usize,
    cfg: &LearnConfig,
) -> Result<ResidualOutcome> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let rows = x.len();
    let split = split_row(rows, cfg.holdout_fraction);

    let x_train = x.slice(0, split)?;
    let y_train = y.slice(0, split)?;
    let static_model = fit_static(&x_train, &y_train, static_order)?;
    let g = apply_static(&static_model, x);
    let h: Vec<Complex64> = y
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a - b)
        .collect();

    let feats = build_features(x, &cfg.features)?;
    let train_feats = feats.slice_rows(0, split);
    let (mut model, trace) = train(&train_feats, &h[..split], &cfg.train)?;
    model.preset = Some(format!(
        "residual[F={},H={},P={}]",
        cfg.features.feature_count(),
        cfg.train.hidden,
        static_order
    ));

    let pred_h = model.predict_all(&feats);
    let recon: Vec<Complex64> = g
        .samples()
        .iter()
        .zip(&pred_h)
        .map(|(gv, hv)| gv + hv)
        .collect();
    let nmse_train_db = nmse_db_samples(&recon[..split], &y.samples()[..split])?;
    let nmse_holdout_db = if split < rows {
        Some(nmse_db_samples(&recon[split..], &y.samples()[split..])?)
    } else {
        None
    };
    Ok(ResidualOutcome {
        static_mac_per_inference: 2 * static_model.coefficients().len(),
        static_model,
        model,
        trace,
        nmse_train_db,
        nmse_holdout_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::generate_filtered_noise;
    use crate::synth;

    #[test]
    fn presets_have_paper_feature_counts_and_params() {
        assert_eq!(arvtdnn_features().feature_count(), 25);
        assert_eq!(srtdnn_features().feature_count(), 5);
        // [25, 25, 2]: params = 26*25 + 26*2 = 702; macs = 25*25 + 50 = 675.
        let x = generate_filtered_noise(111, 4096, 1.0).unwrap();
        let spec = synth::make_memory_polynomial(1, 5, 3, 0.3).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let mut cfg = arvtdnn_config(0);
        cfg.train.max_iters = 10;
        let out = full_learning(&x, &y, &cfg).unwrap();
        assert_eq!(out.trace.param_count, 702);
        assert_eq!(out.trace.mac_per_inference, 675);
        // [5, 50, 2]: params = 6*50 + 51*2 = 402; macs = 5*50 + 100 = 350.
        let mut cfg = srtdnn_config(0);
        cfg.train.max_iters = 10;
        let out = residual_learning(&x, &y, 7, &cfg).unwrap();
        assert_eq!(out.trace.param_count, 402);
        assert_eq!(out.trace.mac_per_inference, 350);
        assert_eq!(out.static_mac_per_inference, 8);
    }

    #[test]
    fn residual_learning_on_memoryless_oracle_is_easy() {
        let spec = synth::make_memoryless(5, 5).unwrap();
        let x = generate_filtered_noise(112, 8192, 1.0).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let mut cfg = srtdnn_config(3);
        cfg.train.max_iters = 400;
        let out = residual_learning(&x, &y, 5, &cfg).unwrap();
        assert!(
            out.nmse_train_db <= -40.0,
            "residual pipeline NMSE {} dB",
            out.nmse_train_db
        );
    }

    #[test]
    fn full_learning_identity_system_reaches_target() {
        let x = generate_filtered_noise(113, 8192, 1.0).unwrap();
        let mut cfg = arvtdnn_config(4);
        cfg.train.max_iters = 6000;
        cfg.train.target_nmse_db = Some(-40.0);
        let out = full_learning(&x, &x, &cfg).unwrap();
        assert!(
            out.nmse_train_db <= -40.0,
            "identity reconstruction NMSE {} dB",
            out.nmse_train_db
        );
    }
}
