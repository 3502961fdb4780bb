//! Simulation and reconstruction for 2D millimetre-wave imaging with a
//! beam-steered phased array, compared against a switched (one element at a
//! time) array of the same aperture.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod impairments;
pub mod model;
pub mod output;
pub mod reconstruction;
pub mod rng;
pub mod scene_io;
pub mod scenes;
pub mod spectral;

pub use error::{ImagingError, Result};
pub use forward::{EchoData, EchoKind};
pub use impairments::ImpairmentSpec;
pub use model::{ImagingConfig, Reflector, Scene, SteeringGrid};
pub use reconstruction::{Image, Profile};
