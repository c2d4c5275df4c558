//! Report and table emission.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::image::Rect;
use crate::ops::{EdgeCounts, Histogram, RegionStats};
use crate::optics::{beam_attenuation, transmission, WaterBody};
use crate::registration::Homography;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub rect: Rect,
    pub material: String,
    pub distance: f64,
}

/// Simulator ground truth written next to the acquired pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// Maps NIR pixel coordinates onto the VIS grid.
    pub true_h: Homography,
    pub regions: BTreeMap<String, RegionLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: &'static str,
    pub statement: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSummary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub vis: RegionStats,
    pub nir: RegionStats,
    pub edges: EdgeCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationReport {
    pub h_est: Homography,
    pub fit_rms: f64,
    pub rms_vs_truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionReport {
    pub mask_iou: Option<f64>,
    pub plant_edges_vis: usize,
    pub plant_edges_fused: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub bands: BTreeMap<String, BandSummary>,
    pub regions: BTreeMap<String, RegionReport>,
    pub registration: Option<RegistrationReport>,
    pub fusion: Option<FusionReport>,
    pub claims: Vec<Claim>,
}

impl RunReport {
    pub fn all_claims_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_histogram_csv(hist: &Histogram, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["value", "count"]).map_err(csv_err)?;
    for (v, c) in hist.bins.iter().enumerate() {
        w.write_record([v.to_string(), c.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `r_m,band,T_percent` rows for every band of `water`.
pub fn transmission_table(
    water: &WaterBody,
    max_r: f64,
    steps: usize,
) -> Result<Vec<(f64, String, f64)>> {
    let mut rows = Vec::new();
    for (name, optics) in &water.bands {
        let c = beam_attenuation(optics.coefficients);
        for i in 0..=steps {
            let r = max_r * i as f64 / steps as f64;
            rows.push((r, name.clone(), transmission(c, r)?));
        }
    }
    Ok(rows)
}

pub fn write_transmission_csv<W: std::io::Write>(
    rows: &[(f64, String, f64)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r_m", "band", "T_percent"])
        .map_err(csv_err)?;
    for (r, band, t) in rows {
        w.write_record([format!("{r:.4}"), band.clone(), format!("{t:.6}")])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_materials_csv<W: std::io::Write>(
    catalog: &crate::scene::Catalog,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "name",
        "rho_vis",
        "rho_nir",
        "pattern",
        "pattern_contrast_vis",
        "pattern_contrast_nir",
        "pattern_scale",
    ])
    .map_err(csv_err)?;
    for m in catalog.values() {
        let pattern = serde_json::to_value(m.pattern)?;
        w.write_record([
            m.name.clone(),
            m.rho_vis.to_string(),
            m.rho_nir.to_string(),
            pattern.as_str().unwrap_or_default().to_string(),
            m.pattern_contrast_vis.to_string(),
            m.pattern_contrast_nir.to_string(),
            m.pattern_scale.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}
