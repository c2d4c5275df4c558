//! Declarative 2.5-D scene: frontal planar patches at fixed distances.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{arg, Error, Result};
use crate::image::Rect;
use crate::optics::{ChannelBand, WaterBody, NIR, VIS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Uniform,
    Chessboard,
    Stripes,
    Blobs,
}

/// Surface material with per-band reflectance and a binary texture.
///
/// The texture is a sign field `s(uv)` in {-1, +1}; the reflectance seen in a
/// band is `clamp(rho + contrast * s, 0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub rho_vis: f64,
    pub rho_nir: f64,
    pub pattern: Pattern,
    #[serde(default)]
    pub pattern_contrast_vis: f64,
    #[serde(default)]
    pub pattern_contrast_nir: f64,
    #[serde(default = "default_scale")]
    pub pattern_scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

impl Material {
    pub fn uniform(name: &str, rho_vis: f64, rho_nir: f64) -> Self {
        Material {
            name: name.into(),
            rho_vis,
            rho_nir,
            pattern: Pattern::Uniform,
            pattern_contrast_vis: 0.0,
            pattern_contrast_nir: 0.0,
            pattern_scale: 1.0,
        }
    }

    pub fn patterned(
        name: &str,
        (rho_vis, rho_nir): (f64, f64),
        pattern: Pattern,
        (contrast_vis, contrast_nir): (f64, f64),
        scale: f64,
    ) -> Self {
        Material {
            name: name.into(),
            rho_vis,
            rho_nir,
            pattern,
            pattern_contrast_vis: contrast_vis,
            pattern_contrast_nir: contrast_nir,
            pattern_scale: scale,
        }
    }

    /// `(reflectance, contrast)` for a band.
    pub fn band_params(&self, band: &ChannelBand) -> Result<(f64, f64)> {
        match band.name.as_str() {
            VIS => Ok((self.rho_vis, self.pattern_contrast_vis)),
            NIR => Ok((self.rho_nir, self.pattern_contrast_nir)),
            other => arg(format!(
                "material {} has no reflectance for band {other}",
                self.name
            )),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        for (field, v) in [
            ("rho_vis", self.rho_vis),
            ("rho_nir", self.rho_nir),
            ("pattern_contrast_vis", self.pattern_contrast_vis),
            ("pattern_contrast_nir", self.pattern_contrast_nir),
        ] {
            if !unit(v) {
                out.push(format!(
                    "material {}: {field} = {v} outside [0, 1]",
                    self.name
                ));
            }
        }
        if self.pattern == Pattern::Uniform
            && (self.pattern_contrast_vis != 0.0 || self.pattern_contrast_nir != 0.0)
        {
            out.push(format!(
                "material {}: uniform pattern requires zero contrast",
                self.name
            ));
        }
        if !(self.pattern_scale > 0.0 && self.pattern_scale.is_finite()) {
            out.push(format!(
                "material {}: pattern_scale must be > 0, got {}",
                self.name, self.pattern_scale
            ));
        }
        out
    }
}

pub type Catalog = BTreeMap<String, Material>;

/// The built-in material set modelled on the submerged test cube and tank.
pub fn builtin_materials() -> Catalog {
    use Pattern::*;
    [
        Material::patterned(
            "chessboard_marker",
            (0.5, 0.5),
            Chessboard,
            (0.45, 0.45),
            5.0,
        ),
        Material::patterned("rust_metal", (0.22, 0.32), Blobs, (0.05, 0.08), 6.0),
        Material::uniform("tinplate", 0.60, 0.55),
        Material::uniform("rubber", 0.08, 0.10),
        Material::patterned("fabric_stripes", (0.45, 0.50), Stripes, (0.30, 0.0), 6.0),
        Material::patterned("fabric_blobs", (0.45, 0.50), Blobs, (0.30, 0.0), 5.0),
        Material::uniform("black_fabric", 0.02, 0.75),
        Material::patterned("plant", (0.30, 0.90), Stripes, (0.0, 0.10), 8.0),
        Material::patterned("gravel", (0.40, 0.40), Blobs, (0.30, 0.30), 10.0),
        Material::uniform("black_background", 0.01, 0.01),
    ]
    .into_iter()
    .map(|m| (m.name.clone(), m))
    .collect()
}

/// Pattern sign in {-1, +1} at `uv`, assumed in the unit square.
fn pattern_sign(pattern: Pattern, scale: f64, u: f64, v: f64) -> f64 {
    match pattern {
        Pattern::Uniform => 0.0,
        Pattern::Chessboard => {
            let cells = scale.max(1.0);
            let cell = |t: f64| (t * cells).floor().min(cells - 1.0) as i64;
            if (cell(u) + cell(v)).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            }
        }
        Pattern::Stripes => {
            if (u * scale).fract() < 0.5 {
                1.0
            } else {
                -1.0
            }
        }
        Pattern::Blobs => {
            // disks of radius 0.3 d on a hexagonal lattice of pitch d
            let d = 1.0 / scale;
            let row_h = d * 3f64.sqrt() / 2.0;
            let row = (v / row_h).round();
            let mut best = f64::INFINITY;
            for dr in [-1.0, 0.0, 1.0] {
                let r = row + dr;
                let offset = if (r as i64).rem_euclid(2) == 1 {
                    d / 2.0
                } else {
                    0.0
                };
                let cx = ((u - offset) / d).round() * d + offset;
                let cy = r * row_h;
                best = best.min((u - cx).hypot(v - cy));
            }
            if best <= 0.3 * d {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Reflectance of `material` in `band` at unit-square coordinates `uv`.
pub fn texture_value(material: &Material, band: &ChannelBand, uv: (f64, f64)) -> Result<f64> {
    let (u, v) = uv;
    if !((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)) {
        return arg(format!("uv ({u}, {v}) outside the unit square"));
    }
    let (rho, contrast) = material.band_params(band)?;
    let s = pattern_sign(material.pattern, material.pattern_scale, u, v);
    Ok((rho + contrast * s).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub material: String,
    /// Metres from the camera plane.
    pub distance: f64,
    pub rect: Rect,
    pub z_order: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub material: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightSource {
    /// Relative radiance per band name.
    pub power: BTreeMap<String, f64>,
    #[serde(default = "default_true")]
    pub colocated: bool,
}

fn default_true() -> bool {
    true
}

impl LightSource {
    pub fn levelled(bands: &[ChannelBand]) -> Self {
        LightSource {
            power: bands.iter().map(|b| (b.name.clone(), 1.0)).collect(),
            colocated: true,
        }
    }

    pub fn power(&self, band: &str) -> Result<f64> {
        self.power
            .get(band)
            .copied()
            .ok_or_else(|| Error::Config(format!("light has no power for band {band}")))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WaterDoc {
    Preset(String),
    Inline(WaterBody),
}

fn water_from_doc<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<WaterBody, D::Error> {
    match WaterDoc::deserialize(d)? {
        WaterDoc::Preset(name) => WaterBody::preset(&name).map_err(serde::de::Error::custom),
        WaterDoc::Inline(w) => Ok(w),
    }
}

fn default_bands() -> Vec<ChannelBand> {
    vec![ChannelBand::vis(), ChannelBand::nir()]
}

/// Full scene description. `water` accepts a preset name or an inline body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_bands")]
    pub bands: Vec<ChannelBand>,
    /// Extra materials, overriding built-ins of the same name.
    #[serde(default)]
    pub materials: Vec<Material>,
    pub objects: Vec<SceneObject>,
    pub background: Background,
    pub light: LightSource,
    #[serde(deserialize_with = "water_from_doc")]
    pub water: WaterBody,
}

pub const TANK_SCENE_JSON: &str = include_str!("../fixtures/tank_scene.json");

impl SceneSpec {
    /// The bundled cube-in-tank fixture.
    pub fn tank_scene() -> Self {
        Self::from_json(TANK_SCENE_JSON).expect("bundled fixture parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn catalog(&self) -> Catalog {
        let mut cat = builtin_materials();
        for m in &self.materials {
            cat.insert(m.name.clone(), m.clone());
        }
        cat
    }

    pub fn band(&self, name: &str) -> Result<&ChannelBand> {
        self.bands
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::Config(format!("scene does not declare band {name}")))
    }

    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    /// Index of the front-most object covering each pixel, `None` for background.
    pub fn coverage_map(&self) -> Vec<Option<usize>> {
        let mut order: Vec<usize> = (0..self.objects.len()).collect();
        order.sort_by_key(|&i| self.objects[i].z_order);
        let mut map = vec![None; self.width * self.height];
        for i in order {
            let r = self.objects[i].rect;
            for y in r.y..(r.y + r.h).min(self.height) {
                for x in r.x..(r.x + r.w).min(self.width) {
                    map[y * self.width + x] = Some(i);
                }
            }
        }
        map
    }

    /// Pixel mask of every pixel whose front-most surface is object `name`.
    pub fn object_mask(&self, name: &str) -> Vec<bool> {
        let idx = self.objects.iter().position(|o| o.name == name);
        self.coverage_map()
            .into_iter()
            .map(|c| c.is_some() && c == idx)
            .collect()
    }

    /// Ground-truth inner corners of a chessboard-textured object, row-major,
    /// in pixel-centre coordinates.
    pub fn chessboard_corners(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let obj = self
            .object(name)
            .ok_or_else(|| Error::Config(format!("no object named {name}")))?;
        let mat = self
            .catalog()
            .get(&obj.material)
            .cloned()
            .ok_or_else(|| Error::Config(format!("unknown material {}", obj.material)))?;
        if mat.pattern != Pattern::Chessboard {
            return arg(format!("object {name} is not a chessboard"));
        }
        let n = mat.pattern_scale.max(1.0).floor() as usize;
        let r = obj.rect;
        let mut out = Vec::new();
        for j in 1..n {
            for i in 1..n {
                out.push((
                    r.x as f64 + i as f64 * r.w as f64 / n as f64 - 0.5,
                    r.y as f64 + j as f64 * r.h as f64 / n as f64 - 0.5,
                ));
            }
        }
        Ok(out)
    }
}

/// Checks every scene invariant and reports all violations at once.
pub fn validate_scene(spec: &SceneSpec) -> std::result::Result<(), Vec<String>> {
    let mut out = Vec::new();
    let catalog = spec.catalog();
    if spec.width == 0 || spec.height == 0 {
        out.push(format!(
            "image size {}x{} must be positive",
            spec.width, spec.height
        ));
    }
    if spec.objects.is_empty() {
        out.push("scene has no objects".into());
    }
    for m in catalog.values() {
        out.extend(m.violations());
    }
    let mut z_seen = HashSet::new();
    let mut max_dist = 0.0f64;
    for (i, o) in spec.objects.iter().enumerate() {
        let at = format!("objects[{i}] ({})", o.name);
        if !(o.distance > 0.0 && o.distance.is_finite()) {
            out.push(format!("{at}: nonpositive distance {}", o.distance));
        } else {
            max_dist = max_dist.max(o.distance);
        }
        if o.rect.is_empty() || !o.rect.fits_in(spec.width, spec.height) {
            out.push(format!("{at}: rect {:?} outside image bounds", o.rect));
        }
        if !catalog.contains_key(&o.material) {
            out.push(format!("{at}: unknown material {}", o.material));
        }
        if !z_seen.insert(o.z_order) {
            out.push(format!("{at}: duplicate z_order {}", o.z_order));
        }
    }
    let names: HashSet<_> = spec.objects.iter().map(|o| &o.name).collect();
    if names.len() != spec.objects.len() {
        out.push("object names must be unique".into());
    }
    if !catalog.contains_key(&spec.background.material) {
        out.push(format!(
            "background: unknown material {}",
            spec.background.material
        ));
    }
    if !(spec.background.distance >= max_dist && spec.background.distance > 0.0) {
        out.push(format!(
            "background: distance {} closer than farthest object {max_dist}",
            spec.background.distance
        ));
    }
    let mut band_names = HashSet::new();
    for band in &spec.bands {
        if !band_names.insert(&band.name) {
            out.push(format!("band {} declared twice", band.name));
        }
        match spec.light.power.get(&band.name) {
            Some(p) if *p > 0.0 && p.is_finite() => {}
            Some(p) => out.push(format!(
                "light: power for band {} must be > 0, got {p}",
                band.name
            )),
            None => out.push(format!("light: no power for band {}", band.name)),
        }
        if !spec.water.bands.contains_key(&band.name) {
            out.push(format!(
                "water: missing coefficients for band {}",
                band.name
            ));
        }
        if band.name != VIS && band.name != NIR {
            out.push(format!(
                "band {}: materials only define VIS and NIR",
                band.name
            ));
        }
    }
    out.extend(spec.water.violations());
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_material_constraints() {
        let cat = builtin_materials();
        for name in [
            "chessboard_marker",
            "rust_metal",
            "tinplate",
            "rubber",
            "fabric_stripes",
            "fabric_blobs",
            "black_fabric",
            "plant",
            "gravel",
            "black_background",
        ] {
            assert!(cat.contains_key(name), "{name}");
        }
        let blobs = &cat["fabric_blobs"];
        assert_eq!(blobs.pattern_contrast_nir, 0.0);
        assert!(blobs.pattern_contrast_vis > 0.0);
        assert!(cat["plant"].rho_nir > cat["plant"].rho_vis);
        let bg = &cat["black_background"];
        assert!(bg.rho_vis < 0.05 && bg.rho_nir < 0.05);
        let bf = &cat["black_fabric"];
        assert!(bf.rho_vis < 0.05 && bf.rho_nir > 0.3);
        assert!(cat.values().all(|m| m.violations().is_empty()));
    }

    #[test]
    fn uniform_texture_is_constant() {
        let m = &builtin_materials()["tinplate"];
        for uv in [(0.0, 0.0), (0.3, 0.9), (1.0, 1.0)] {
            assert_eq!(texture_value(m, &ChannelBand::vis(), uv).unwrap(), 0.6);
        }
    }

    #[test]
    fn chessboard_cells_alternate() {
        let m = Material::patterned("c", (0.5, 0.5), Pattern::Chessboard, (1.0, 1.0), 4.0);
        let vis = ChannelBand::vis();
        assert_eq!(texture_value(&m, &vis, (0.1, 0.1)).unwrap(), 1.0);
        assert_eq!(texture_value(&m, &vis, (0.35, 0.1)).unwrap(), 0.0);
        assert_eq!(texture_value(&m, &vis, (0.35, 0.35)).unwrap(), 1.0);
        // the closed upper edge belongs to the last cell
        assert_eq!(
            texture_value(&m, &vis, (1.0, 0.1)).unwrap(),
            texture_value(&m, &vis, (0.99, 0.1)).unwrap()
        );
    }

    #[test]
    fn fabric_blobs_flat_in_nir() {
        let m = &builtin_materials()["fabric_blobs"];
        let nir = ChannelBand::nir();
        let vis = ChannelBand::vis();
        let mut vis_values = HashSet::new();
        for i in 0..=20 {
            for j in 0..=20 {
                let uv = (i as f64 / 20.0, j as f64 / 20.0);
                assert_eq!(texture_value(m, &nir, uv).unwrap(), m.rho_nir);
                vis_values.insert(texture_value(m, &vis, uv).unwrap().to_bits());
            }
        }
        assert_eq!(vis_values.len(), 2);
    }

    #[test]
    fn texture_rejects_outside_uv() {
        let m = &builtin_materials()["gravel"];
        assert!(texture_value(m, &ChannelBand::vis(), (1.01, 0.5)).is_err());
        assert!(texture_value(m, &ChannelBand::vis(), (0.5, -0.01)).is_err());
        let other = ChannelBand::new("UV", 300.0, 350.0, 400.0).unwrap();
        assert!(texture_value(m, &other, (0.5, 0.5)).is_err());
    }

    #[test]
    fn tank_scene_validates() {
        let scene = SceneSpec::tank_scene();
        assert_eq!(validate_scene(&scene), Ok(()));
    }

    #[test]
    fn collects_every_violation() {
        let mut scene = SceneSpec::tank_scene();
        scene.objects[0].distance = 0.0;
        let z = scene.objects[1].z_order;
        scene.objects[2].z_order = z;
        let errs = validate_scene(&scene).unwrap_err();
        assert!(
            errs.iter().any(|e| e.contains("nonpositive distance")),
            "{errs:?}"
        );
        assert!(
            errs.iter().any(|e| e.contains("duplicate z_order")),
            "{errs:?}"
        );
    }

    #[test]
    fn missing_band_coefficients_reported() {
        let mut scene = SceneSpec::tank_scene();
        scene.water.bands.remove(NIR);
        let errs = validate_scene(&scene).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.contains("missing coefficients for band NIR")));
    }

    #[test]
    fn higher_z_order_wins() {
        let mut scene = SceneSpec::tank_scene();
        scene.objects.truncate(2);
        scene.objects[0].rect = Rect::new(10, 10, 40, 40);
        scene.objects[1].rect = Rect::new(30, 30, 40, 40);
        scene.objects[0].z_order = 5;
        scene.objects[1].z_order = 1;
        let map = scene.coverage_map();
        assert_eq!(map[35 * scene.width + 35], Some(0));
        assert_eq!(map[65 * scene.width + 65], Some(1));
        assert_eq!(map[0], None);
    }

    #[test]
    fn water_preset_by_name() {
        let mut v: serde_json::Value = serde_json::from_str(TANK_SCENE_JSON).unwrap();
        v["water"] = serde_json::json!("clear");
        let s: SceneSpec = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(s.water, WaterBody::clear());
        v["water"] = serde_json::json!("murky");
        assert!(serde_json::from_value::<SceneSpec>(v).is_err());
    }
}
