//! Pipeline configuration document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Rect;
use crate::ops::CannyParams;
use crate::optics::WaterBody;
use crate::render::AcquisitionModel;
use crate::scene::{validate_scene, SceneSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WaterChoice {
    Preset(String),
    Inline(WaterBody),
}

impl WaterChoice {
    pub fn resolve(&self) -> Result<WaterBody> {
        match self {
            WaterChoice::Preset(name) => WaterBody::preset(name),
            WaterChoice::Inline(w) => Ok(w.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CannyConfig {
    pub sigma: f64,
    pub t_low: f64,
    pub t_high: f64,
}

impl Default for CannyConfig {
    fn default() -> Self {
        CannyConfig {
            sigma: 1.0,
            t_low: 25.0,
            t_high: 60.0,
        }
    }
}

impl From<CannyConfig> for CannyParams {
    fn from(c: CannyConfig) -> Self {
        CannyParams {
            sigma: c.sigma,
            t_low: c.t_low,
            t_high: c.t_high,
        }
    }
}

/// Which scene regions each channel-comparison claim is evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaimRegions {
    pub contrast: String,
    pub plant: String,
    pub fabric: String,
    pub black_fabric: String,
    /// Pixels trimmed from each side of a region before counting edges
    /// inside a textured face.
    pub inset: usize,
}

impl Default for ClaimRegions {
    fn default() -> Self {
        ClaimRegions {
            contrast: "chessboard".into(),
            plant: "plant".into(),
            fabric: "fabric_face".into(),
            black_fabric: "black_fabric".into(),
            inset: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Shared by both channels.
    pub canny: CannyConfig,
    /// Extra labelled regions; every scene object is labelled by name.
    pub regions: BTreeMap<String, Rect>,
    pub claims: ClaimRegions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistrationConfig {
    pub enabled: bool,
    /// Inner corners `[cols, rows]` of the marker.
    pub board: (usize, usize),
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            enabled: true,
            board: (4, 4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub enabled: bool,
    pub delta: f64,
    pub alpha: f64,
    /// Weight image; when absent the plant mask is generated.
    pub weight_map: Option<PathBuf>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            enabled: true,
            delta: 33.0,
            alpha: 0.33,
            weight_map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    scene: PathBuf,
    #[serde(default)]
    water: Option<WaterChoice>,
    #[serde(default)]
    acquisition: AcquisitionModel,
    #[serde(default)]
    analysis: AnalysisConfig,
    #[serde(default)]
    registration: RegistrationConfig,
    #[serde(default)]
    fusion: FusionConfig,
    #[serde(default = "default_out")]
    output_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// A fully resolved and validated pipeline configuration. Relative paths
/// are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub scene_path: PathBuf,
    pub scene: SceneSpec,
    pub water: WaterBody,
    pub acquisition: AcquisitionModel,
    pub analysis: AnalysisConfig,
    pub registration: RegistrationConfig,
    pub fusion: FusionConfig,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    /// Labelled regions: scene objects by name, then configured extras.
    pub fn regions(&self) -> BTreeMap<String, Rect> {
        let mut out: BTreeMap<String, Rect> = self
            .scene
            .objects
            .iter()
            .map(|o| (o.name.clone(), o.rect))
            .collect();
        out.extend(self.analysis.regions.clone());
        out
    }

    /// Effective config as JSON, every default materialized.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "scene": self.scene_path,
            "water": self.water,
            "acquisition": self.acquisition,
            "analysis": self.analysis,
            "registration": self.registration,
            "fusion": self.fusion,
            "output_dir": self.output_dir,
        })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Parses a config document, resolving relative paths against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<PipelineConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDoc = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Validation(vec![format!("{}: {}", e.path(), e.inner())]))?;
    let mut errs = Vec::new();

    let scene_path = resolve(base, &doc.scene);
    let scene_text = std::fs::read_to_string(&scene_path)
        .map_err(|e| Error::Validation(vec![format!("scene: {}: {e}", scene_path.display())]))?;
    let de = &mut serde_json::Deserializer::from_str(&scene_text);
    let mut scene: SceneSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Validation(vec![format!("scene.{}: {}", e.path(), e.inner())]))?;

    let water = match &doc.water {
        Some(choice) => match choice.resolve() {
            Ok(w) => w,
            Err(e) => {
                errs.push(format!("water: {e}"));
                scene.water.clone()
            }
        },
        None => scene.water.clone(),
    };
    scene.water = water.clone();
    if let Err(v) = validate_scene(&scene) {
        errs.extend(v.into_iter().map(|m| format!("scene: {m}")));
    }

    errs.extend(doc.acquisition.violations());

    let c = doc.analysis.canny;
    if !(c.sigma >= 0.0) {
        errs.push(format!(
            "analysis.canny.sigma must be >= 0, got {}",
            c.sigma
        ));
    }
    if !(c.t_low > 0.0) {
        errs.push(format!("analysis.canny.t_low must be > 0, got {}", c.t_low));
    }
    if !(c.t_low < c.t_high) {
        errs.push(format!(
            "analysis.canny: t_low ({}) must be < t_high ({})",
            c.t_low, c.t_high
        ));
    }
    for (name, r) in &doc.analysis.regions {
        if r.is_empty() || !r.fits_in(scene.width, scene.height) {
            errs.push(format!("analysis.regions.{name}: {r:?} outside the image"));
        }
    }
    let claims = &doc.analysis.claims;
    for (field, name) in [
        ("contrast", &claims.contrast),
        ("plant", &claims.plant),
        ("fabric", &claims.fabric),
        ("black_fabric", &claims.black_fabric),
    ] {
        if scene.object(name).is_none() && !doc.analysis.regions.contains_key(name) {
            errs.push(format!("analysis.claims.{field}: unknown region {name:?}"));
        }
    }

    let (cols, rows) = doc.registration.board;
    if cols < 2 || rows < 2 {
        errs.push(format!(
            "registration.board must be at least [2, 2], got [{cols}, {rows}]"
        ));
    }

    let f = &doc.fusion;
    if !(f.delta > 0.0) {
        errs.push(format!("fusion.delta must be > 0, got {}", f.delta));
    }
    if !(0.0..=1.0).contains(&f.alpha) {
        errs.push(format!("fusion.alpha must be in [0, 1], got {}", f.alpha));
    }
    let mut fusion = doc.fusion.clone();
    if let Some(wm) = &fusion.weight_map {
        let resolved = resolve(base, wm);
        if !resolved.exists() {
            errs.push(format!(
                "fusion.weight_map: {} does not exist",
                resolved.display()
            ));
        }
        fusion.weight_map = Some(resolved);
    }

    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    Ok(PipelineConfig {
        scene_path,
        scene,
        water,
        acquisition: doc.acquisition,
        analysis: doc.analysis,
        registration: doc.registration,
        fusion,
        output_dir: resolve(base, &doc.output_dir),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
    }

    fn with(mutate: impl FnOnce(&mut serde_json::Value)) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(fixture_dir().join("tank_pipeline.json")).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        mutate(&mut v);
        parse_config(&v.to_string(), &fixture_dir())
    }

    fn messages(r: Result<PipelineConfig>) -> Vec<String> {
        match r {
            Err(Error::Validation(v)) => v,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn bundled_config_valid() {
        let cfg = load_config(fixture_dir().join("tank_pipeline.json")).unwrap();
        assert_eq!(cfg.scene, {
            let mut s = SceneSpec::tank_scene();
            s.water = cfg.water.clone();
            s
        });
        assert!(cfg.regions().contains_key("plant"));
    }

    #[test]
    fn defaults_materialized() {
        let cfg = parse_config(r#"{"scene": "tank_scene.json"}"#, &fixture_dir()).unwrap();
        assert_eq!(cfg.acquisition, AcquisitionModel::default());
        assert_eq!(cfg.fusion, FusionConfig::default());
        assert_eq!(cfg.output_dir, fixture_dir().join("out"));
        let json = cfg.to_json();
        assert_eq!(json["registration"]["board"], serde_json::json!([4, 4]));
    }

    #[test]
    fn missing_band_coefficients_named() {
        let errs = messages(with(|v| {
            let mut w = serde_json::to_value(WaterBody::natural()).unwrap();
            w["bands"].as_object_mut().unwrap().remove("NIR");
            v["water"] = w;
        }));
        assert!(errs.iter().any(|e| e.contains("band NIR")), "{errs:?}");
    }

    #[test]
    fn canny_order_enforced() {
        let errs = messages(with(|v| {
            v["analysis"]["canny"]["t_low"] = 80.into();
            v["analysis"]["canny"]["t_high"] = 40.into();
            v["fusion"]["alpha"] = 3.into();
        }));
        assert!(errs.iter().any(|e| e.contains("t_low")));
        assert!(errs.iter().any(|e| e.contains("fusion.alpha")));
    }

    #[test]
    fn type_errors_carry_path() {
        let errs = messages(with(|v| v["acquisition"]["gain"] = "loud".into()));
        assert!(errs[0].starts_with("acquisition.gain"), "{errs:?}");
    }

    #[test]
    fn missing_scene_file() {
        let errs = messages(parse_config(r#"{"scene": "nope.json"}"#, &fixture_dir()));
        assert!(errs[0].contains("nope.json"));
    }
}
