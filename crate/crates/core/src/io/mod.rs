//! File formats: binary PGM images, JSON configs and reports, CSV tables.

pub mod config;
pub mod pgm;
pub mod report;

pub use config::{load_config, PipelineConfig};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm};
