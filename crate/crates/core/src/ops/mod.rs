//! Analysis and enhancement toolbox.

pub mod canny;
pub mod equalize;
pub mod histogram;
pub mod homomorphic;
pub mod overlay;

pub use canny::{canny, CannyParams, EdgeMap};
pub use equalize::{contrast_stretch, equalize_global, equalize_local, percentile};
pub use histogram::{histogram, masked_stats, region_stats, Histogram, RegionStats};
pub use homomorphic::{homomorphic_filter, homomorphic_log_response, HomomorphicParams};
pub use overlay::{edge_counts, edge_overlay, EdgeCounts, EdgeState, OverlayMap};
