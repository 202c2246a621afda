//! Physiological performance-evaluation pipeline: ECG and fNIRS feature
//! extraction, prefrontal-cortex graph construction, and a fused CNN+GAT
//! classifier with its training and evaluation protocol.
//!
//! The crate is organized around the processing flow:
//!
//! * [`signal`] — shared DSP primitives (Butterworth band-pass with
//!   zero-phase application, Welch spectra, analytic signal, splines).
//! * [`ecg`] — R-peak detection, wave delineation, and the 20-dimensional
//!   handcrafted ECG feature vector.
//! * [`spectrogram`] — STFT power matrices rendered to 64x64 RGB images,
//!   the CNN input.
//! * [`fnirs`] — GLM activation betas, functional-connectivity metrics,
//!   the 136-dimensional fNIRS vector, and the 8-node PFC graph.
//! * [`nn`] — a minimal deterministic differentiable-computation kernel:
//!   conv/batchnorm/dense/GAT layers with explicit backward passes, SGD
//!   with momentum, and a plateau learning-rate scheduler.
//! * [`models`] — the four classifier variants A-D assembled from [`nn`]
//!   layers.
//! * [`train`] — dataset handling, normalization, splitting and
//!   cross-validation, grid search, the training loop, and evaluation
//!   metrics (confusion matrix, ROC/AUC, t-SNE).
//! * [`synth`] — a deterministic labeled synthetic data generator that
//!   provides ground truth for every extraction stage.

pub mod ecg;
pub mod error;
pub mod fnirs;
pub mod io;
pub mod models;
pub mod nn;
pub mod rng;
pub mod signal;
pub mod spectrogram;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
