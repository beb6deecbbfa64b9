//! Indirect-learning digital predistortion.
//!
//! The post-inverse of the system is learned (features of the normalized
//! output predict the input), then deployed unchanged as a pre-inverse.
//! The residual modeler splits the post-inverse into a polynomial stage and
//! a network on what the polynomial misses; the full modeler learns the
//! whole map with one network.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::features::build_features;
use super::metrics::{aclr_dbc, evm_db};
use super::mlp::{train, TrainConfig, TrainingTrace};
use super::{arvtdnn_features, srtdnn_features};
use crate::decomp::{apply_static, fit_static};
use crate::error::{Error, Result};
use crate::signals::{align_pair, MulticarrierFrame, SampledSignal};
use crate::synth::{simulate, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelerKind {
    /// One network over 25 time-delay features.
    Full,
    /// Polynomial stage plus a 5-feature network on its residual.
    Residual,
}

#[derive(Debug, Clone)]
pub struct DpdConfig {
    pub modeler: ModelerKind,
    /// Input drive below unit power, in dB.
    pub drive_backoff_db: f64,
    /// Polynomial order of the residual modeler's static stage.
    pub static_order: usize,
    pub train: TrainConfig,
    /// Train the post-inverse on only the first `train_len` samples.
    pub train_len: Option<usize>,
}

impl DpdConfig {
    pub fn preset(modeler: ModelerKind, seed: u64) -> Self {
        let hidden = match modeler {
            ModelerKind::Full => 25,
            ModelerKind::Residual => 50,
        };
        Self {
            modeler,
            drive_backoff_db: 6.0,
            static_order: 7,
            train: TrainConfig {
                hidden,
                seed,
                ..TrainConfig::default()
            },
            train_len: None,
        }
    }
}

/// Linearization outcome: quality metrics with and without predistortion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DpdReport {
    pub evm_before_db: f64,
    pub evm_after_db: f64,
    pub aclr_before_dbc: f64,
    pub aclr_after_dbc: f64,
    /// Predistorter inference cost (network plus polynomial stage).
    pub mac_per_sample: usize,
    pub trace: TrainingTrace,
    pub channel_bw_fraction: f64,
    pub train_samples_used: usize,
}

/// Subcarrier-occupied bandwidth of a frame as a fraction of the sample
/// rate (narrower than the declared channel by the guard).
pub fn occupied_fraction(frame: &MulticarrierFrame) -> f64 {
    frame.active_bins.len() as f64 / frame.fft_size as f64
}

/// Learn a post-inverse of `pa` on the driven frame and deploy it as a
/// pre-inverse; report EVM/ACLR before and after.
pub fn indirect_dpd(
    frame: &MulticarrierFrame,
    pa: &SystemSpec,
    cfg: &DpdConfig,
) -> Result<DpdReport> {
    let bw = frame.channel_fraction;
    let drive = 10f64.powf(-cfg.drive_backoff_db / 20.0);
    let u = frame.signal().scaled(Complex64::new(drive, 0.0));

    // Uncompensated pass.
    let y = simulate(pa, &u)?;
    let (u_t, y_n, _) = align_pair(&u, &y)?;
    let evm_before_db = evm_db(frame, &y_n)?;
    let aclr_before_dbc = aclr_dbc(&y_n, bw)?;

    // Post-inverse training data: normalized output predicts the input.
    let n_train = cfg.train_len.unwrap_or(u_t.len()).min(u_t.len());
    let y_train = y_n.slice(0, n_train)?;
    let u_train = u_t.slice(0, n_train)?;

    let (predistorted, trace, mac_per_sample) = match cfg.modeler {
        ModelerKind::Full => {
            let feats = build_features(&y_train, &arvtdnn_features())?;
            let (model, trace) = train(&feats, u_train.samples(), &cfg.train)?;
            let deploy = build_features(&u, &arvtdnn_features())?;
            let z = model.predict_all(&deploy);
            let macs = trace.mac_per_inference;
            (z, trace, macs)
        }
        ModelerKind::Residual => {
            let post_poly = fit_static(&y_train, &u_train, cfg.static_order)?;
            let g_post = apply_static(&post_poly, &y_train);
            let h_post: Vec<Complex64> = u_train
                .samples()
                .iter()
                .zip(g_post.samples())
                .map(|(a, b)| a - b)
                .collect();
            let feats = build_features(&y_train, &srtdnn_features())?;
            let (model, trace) = train(&feats, &h_post, &cfg.train)?;

            let deploy_poly = apply_static(&post_poly, &u);
            let deploy_feats = build_features(&u, &srtdnn_features())?;
            let net_out = model.predict_all(&deploy_feats);
            let z: Vec<Complex64> = deploy_poly
                .samples()
                .iter()
                .zip(&net_out)
                .map(|(a, b)| a + b)
                .collect();
            let macs = trace.mac_per_inference + 2 * post_poly.coefficients().len();
            (z, trace, macs)
        }
    };

    let z = SampledSignal::from_complex(predistorted, u.sample_rate_hz())?;
    let y2 = simulate(pa, &z)?;
    let (_, y2_n, _) = align_pair(&u, &y2)?;
    let evm_after_db = evm_db(frame, &y2_n)?;
    let aclr_after_dbc = aclr_dbc(&y2_n, bw)?;

    Ok(DpdReport {
        evm_before_db,
        evm_after_db,
        aclr_before_dbc,
        aclr_after_dbc,
        mac_per_sample,
        trace,
        channel_bw_fraction: bw,
        train_samples_used: n_train,
    })
}
