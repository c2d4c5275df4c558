//! Interactive demo of the toolkit for the browser.
//!
//! [`Demo`] is ordinary Rust so it can be exercised natively; the thin
//! `wasm-bindgen` wrapper in `bindings` only exists on `wasm32`. All images
//! leave this crate as RGBA bytes ready for `ImageData`.

use dualband::ops::{canny, edge_overlay, CannyParams, EdgeState};
use dualband::optics::{beam_attenuation, transmission, OpticalCoefficients, WaterBody, NIR, VIS};
use dualband::pipeline::{simulate, Simulation};
use dualband::registration::{fuse_weighted, plant_mask};
use dualband::render::AcquisitionModel;
use dualband::scene::SceneSpec;
use dualband::{GrayImage, Result};

#[cfg(target_arch = "wasm32")]
mod bindings;

/// Absorption of the VIS band, held fixed; the sliders move everything else.
const VIS_ABSORPTION: f64 = 0.10;
/// Scattering of the two bands at turbidity 1.
const BASE_SCATTER: (f64, f64) = (0.60, 0.05);

/// Water built from two slider values: a scattering multiplier and the NIR
/// absorption coefficient (1/m). Both bands keep their natural ordering as
/// long as `nir_absorption` exceeds the fixed VIS absorption.
pub fn slider_water(turbidity: f64, nir_absorption: f64) -> Result<WaterBody> {
    let mut water = WaterBody::natural();
    let set = |water: &mut WaterBody, band: &str, a: f64, b: f64| -> Result<()> {
        let optics = water
            .bands
            .get_mut(band)
            .expect("natural water has both bands");
        optics.coefficients = OpticalCoefficients::new(a, b)?;
        Ok(())
    };
    set(&mut water, VIS, VIS_ABSORPTION, BASE_SCATTER.0 * turbidity)?;
    set(&mut water, NIR, nir_absorption, BASE_SCATTER.1 * turbidity)?;
    water.validate()?;
    Ok(water)
}

/// Transmission percentages sampled at `steps + 1` distances in `[0, max_r]`,
/// interleaved as `[r, T_vis, T_nir, r, T_vis, T_nir, ...]`.
pub fn transmission_curve(water: &WaterBody, max_r: f64, steps: usize) -> Result<Vec<f64>> {
    let c_vis = beam_attenuation(water.band(VIS)?.coefficients);
    let c_nir = beam_attenuation(water.band(NIR)?.coefficients);
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(3 * (steps + 1));
    for i in 0..=steps {
        let r = max_r * i as f64 / steps as f64;
        out.extend([r, transmission(c_vis, r)?, transmission(c_nir, r)?]);
    }
    Ok(out)
}

pub fn gray_to_rgba(img: &GrayImage) -> Vec<u8> {
    img.as_slice()
        .iter()
        .flat_map(|&v| [v, v, v, 255])
        .collect()
}

/// Colour for each overlay state: VIS-only cyan, NIR-only red, both white.
pub fn state_rgba(s: EdgeState) -> [u8; 4] {
    match s {
        EdgeState::None => [0, 0, 0, 255],
        EdgeState::VisOnly => [0, 200, 255, 255],
        EdgeState::NirOnly => [255, 60, 40, 255],
        EdgeState::Both => [255, 255, 255, 255],
    }
}

/// Holds the most recent rendering so the analysis sliders do not re-render.
pub struct Demo {
    scene: SceneSpec,
    sim: Simulation,
}

impl Demo {
    pub fn new() -> Result<Self> {
        let scene = SceneSpec::tank_scene();
        let sim = simulate(
            &scene,
            &slider_water(1.0, 1.2)?,
            &AcquisitionModel::default(),
        )?;
        Ok(Demo { scene, sim })
    }

    pub fn width(&self) -> usize {
        self.scene.width
    }

    pub fn height(&self) -> usize {
        self.scene.height
    }

    /// Re-renders the pair. The demo camera has both channels co-aligned, so
    /// no registration step is needed before fusing.
    pub fn render(&mut self, turbidity: f64, nir_absorption: f64, seed: u64) -> Result<()> {
        let water = slider_water(turbidity, nir_absorption)?;
        let acq = AcquisitionModel {
            seed,
            ..AcquisitionModel::default()
        };
        self.sim = simulate(&self.scene, &water, &acq)?;
        Ok(())
    }

    pub fn vis(&self) -> &GrayImage {
        &self.sim.pair.vis
    }

    pub fn nir(&self) -> &GrayImage {
        &self.sim.pair.nir
    }

    /// Shared-threshold edge comparison of the current pair, as RGBA.
    pub fn edges(&self, sigma: f64, t_low: f64, t_high: f64) -> Result<Vec<u8>> {
        let params = CannyParams {
            sigma,
            t_low,
            t_high,
        };
        let ev = canny(self.vis(), params)?;
        let en = canny(self.nir(), params)?;
        let overlay = edge_overlay(&en, &ev)?;
        Ok(overlay
            .states()
            .iter()
            .flat_map(|&s| state_rgba(s))
            .collect())
    }

    /// Plant-suppressing fusion of the current pair.
    pub fn fuse(&self, delta: f64, alpha: f64) -> Result<GrayImage> {
        let weights = plant_mask(self.nir(), self.vis(), delta, alpha)?;
        fuse_weighted(self.vis(), self.nir(), &weights)
    }
}
