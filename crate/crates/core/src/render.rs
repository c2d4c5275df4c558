//! Image formation: two-way attenuated direct light plus saturating
//! backscatter veiling, a glass interface loss, then 8-bit quantization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, RadianceImage};
use crate::optics::{backscatter_fraction, beam_attenuation, ChannelBand, WaterBody, NIR, VIS};
use crate::registration::{warp_radiance, Homography};
use crate::scene::{texture_value, validate_scene, SceneSpec};

/// Texture supersampling factor per axis.
const SUPERSAMPLE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionModel {
    pub gain: f64,
    /// Gaussian read noise, gray levels.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Maps NIR pixel coordinates onto the VIS grid.
    pub nir_misalignment: Homography,
    /// Per-crossing transmittance of the viewport glass.
    pub interface_transmittance: f64,
}

impl Default for AcquisitionModel {
    fn default() -> Self {
        AcquisitionModel {
            gain: 255.0,
            noise_sigma: 1.0,
            seed: 0,
            nir_misalignment: Homography::identity(),
            interface_transmittance: 0.92,
        }
    }
}

impl AcquisitionModel {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            out.push(format!("acquisition.gain must be > 0, got {}", self.gain));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            out.push(format!(
                "acquisition.noise_sigma must be >= 0, got {}",
                self.noise_sigma
            ));
        }
        let t = self.interface_transmittance;
        if !(t > 0.0 && t <= 1.0) {
            out.push(format!(
                "acquisition.interface_transmittance must be in (0, 1], got {t}"
            ));
        }
        out
    }
}

/// Radiance terms for a single surface point; exposed for tests and demos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelModel {
    pub power: f64,
    pub attenuation: f64,
    pub scattering: f64,
    pub veiling: f64,
    pub backscatter: f64,
    pub interface_transmittance: f64,
    pub colocated: bool,
}

impl PixelModel {
    pub fn for_band(
        scene: &SceneSpec,
        band: &ChannelBand,
        water: &WaterBody,
        interface_transmittance: f64,
    ) -> Result<Self> {
        let optics = water.band(&band.name)?;
        Ok(PixelModel {
            power: scene.light.power(&band.name)?,
            attenuation: beam_attenuation(optics.coefficients),
            scattering: optics.coefficients.b(),
            veiling: optics.ambient_veiling,
            backscatter: backscatter_fraction(water.phase),
            interface_transmittance,
            colocated: scene.light.colocated,
        })
    }

    /// Attenuated reflected light from a surface of reflectance `rho` at `r`.
    pub fn direct(&self, rho: f64, r: f64) -> f64 {
        // a light beside the object only loses the return leg
        let path = if self.colocated { 2.0 * r } else { r };
        let tau2 = self.interface_transmittance * self.interface_transmittance;
        self.power * rho * (-self.attenuation * path).exp() * tau2
    }

    /// Backscattered veiling light accumulated over a sight line of length `r`.
    pub fn veiling_at(&self, r: f64) -> f64 {
        if self.attenuation == 0.0 {
            return 0.0;
        }
        self.veiling_asymptote() * (1.0 - (-self.attenuation * r).exp())
    }

    pub fn veiling_asymptote(&self) -> f64 {
        if self.attenuation == 0.0 {
            return 0.0;
        }
        self.veiling * (self.scattering / self.attenuation) * self.backscatter
    }

    pub fn radiance(&self, rho: f64, r: f64) -> f64 {
        self.direct(rho, r) + self.veiling_at(r)
    }
}

/// Renders the band's relative radiance, glass transmittance `tau_g`.
pub fn render_channel_with(
    scene: &SceneSpec,
    band: &ChannelBand,
    water: &WaterBody,
    tau_g: f64,
) -> Result<RadianceImage> {
    if let Err(v) = validate_scene(scene) {
        return Err(Error::Validation(v));
    }
    let model = PixelModel::for_band(scene, band, water, tau_g)?;
    let catalog = scene.catalog();
    let coverage = scene.coverage_map();
    let (w, h) = (scene.width, scene.height);
    let full = crate::image::Rect::full(w, h);

    let render_row = |y: usize, row: &mut [f64]| -> Result<()> {
        for (x, out) in row.iter_mut().enumerate() {
            let (rect, distance, material) = match coverage[y * w + x] {
                Some(i) => {
                    let o = &scene.objects[i];
                    (o.rect, o.distance, &catalog[&o.material])
                }
                None => (
                    full,
                    scene.background.distance,
                    &catalog[&scene.background.material],
                ),
            };
            let mut rho = 0.0;
            for sy in 0..SUPERSAMPLE {
                for sx in 0..SUPERSAMPLE {
                    let px = x as f64 + (sx as f64 + 0.5) / SUPERSAMPLE as f64;
                    let py = y as f64 + (sy as f64 + 0.5) / SUPERSAMPLE as f64;
                    let u = (px - rect.x as f64) / rect.w as f64;
                    let v = (py - rect.y as f64) / rect.h as f64;
                    rho += texture_value(material, band, (u, v))?;
                }
            }
            rho /= (SUPERSAMPLE * SUPERSAMPLE) as f64;
            *out = model.radiance(rho, distance);
        }
        Ok(())
    };

    let mut data = vec![0.0; w * h];
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(w)
            .enumerate()
            .try_for_each(|(y, row)| render_row(y, row))?;
    }
    #[cfg(not(feature = "parallel"))]
    for (y, row) in data.chunks_mut(w).enumerate() {
        render_row(y, row)?;
    }
    RadianceImage::from_vec(w, h, data)
}

/// Renders with the default viewport transmittance.
pub fn render_channel(
    scene: &SceneSpec,
    band: &ChannelBand,
    water: &WaterBody,
) -> Result<RadianceImage> {
    render_channel_with(
        scene,
        band,
        water,
        AcquisitionModel::default().interface_transmittance,
    )
}

/// Scales, adds seeded Gaussian noise and rounds half-up into [0, 255].
pub fn quantize(img: &RadianceImage, acq: &AcquisitionModel) -> GrayImage {
    quantize_stream(img, acq, 0)
}

/// As [`quantize`], with an independent noise stream per channel. Noise is a
/// function of `(seed, stream, pixel index)` only.
pub fn quantize_stream(img: &RadianceImage, acq: &AcquisitionModel, stream: u64) -> GrayImage {
    let noise = (acq.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, acq.noise_sigma).expect("sigma validated"));
    let mut base = ChaCha8Rng::seed_from_u64(acq.seed);
    base.set_stream(stream);
    let data = img
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let n = match &noise {
                Some(dist) => {
                    let mut rng = base.clone();
                    // 16 words per pixel; a normal draw needs 2 except on rare rejections
                    rng.set_word_pos(i as u128 * 16);
                    dist.sample(&mut rng)
                }
                None => 0.0,
            };
            (acq.gain * v + n + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::from_vec(img.width(), img.height(), data).expect("dimensions preserved")
}

/// A simulated VIS/NIR acquisition and its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquiredPair {
    pub vis: GrayImage,
    pub nir: GrayImage,
    /// Maps NIR pixel coordinates onto VIS ones.
    pub true_h: Homography,
}

pub fn acquire_pair(
    scene: &SceneSpec,
    water: &WaterBody,
    acq: &AcquisitionModel,
) -> Result<AcquiredPair> {
    let problems = acq.violations();
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let vis_band = scene.band(VIS)?;
    let nir_band = scene.band(NIR)?;
    let tau = acq.interface_transmittance;
    let vis = render_channel_with(scene, vis_band, water, tau)?;
    let mut nir = render_channel_with(scene, nir_band, water, tau)?;
    let true_h = acq.nir_misalignment;
    if !true_h.is_identity() {
        // content at VIS point q lands on NIR point H⁻¹ q
        nir = warp_radiance(&nir, &true_h.inverse()?)?;
    }
    Ok(AcquiredPair {
        vis: quantize_stream(&vis, acq, 0),
        nir: quantize_stream(&nir, acq, 1),
        true_h,
    })
}
