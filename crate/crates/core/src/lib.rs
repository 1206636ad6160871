//! Core pipeline for earbud-IMU mouth-activity detection with sound feedback.
//!
//! The crate covers the full offline loop: 50 Hz 6-axis IMU streams are
//! ingested from CSV ([`sensor_data`]), cut into 4-second windows and reduced
//! to fixed statistics ([`featurize`]), classified with a from-scratch random
//! forest validated by stratified k-fold CV ([`learn`]), and mapped to
//! randomized clip playback with fade-out ([`sound`]). [`synthgen`] produces
//! labeled synthetic streams for the five activity classes so the whole
//! pipeline can be exercised without recorded data.

pub mod featurize;
pub mod learn;
pub mod sensor_data;
pub mod sound;
pub mod synthgen;

pub use sensor_data::{ActivityLabel, ImuSample, LabeledDataset};
