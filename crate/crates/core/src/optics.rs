//! Band-averaged optical model of water: attenuation, transmission and the
//! Henyey–Greenstein volume scattering function.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

pub const VIS: &str = "VIS";
pub const NIR: &str = "NIR";

/// A named acquisition band, wavelengths in nanometres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBand")]
pub struct ChannelBand {
    pub name: String,
    pub lambda_min: f64,
    pub lambda_peak: f64,
    pub lambda_max: f64,
}

#[derive(Deserialize)]
struct RawBand {
    name: String,
    lambda_min: f64,
    lambda_peak: f64,
    lambda_max: f64,
}

impl TryFrom<RawBand> for ChannelBand {
    type Error = Error;

    fn try_from(r: RawBand) -> Result<Self> {
        ChannelBand::new(r.name, r.lambda_min, r.lambda_peak, r.lambda_max)
    }
}

impl ChannelBand {
    pub fn new(
        name: impl Into<String>,
        lambda_min: f64,
        lambda_peak: f64,
        lambda_max: f64,
    ) -> Result<Self> {
        let name = name.into();
        if !(lambda_min > 0.0 && lambda_min < lambda_peak && lambda_peak < lambda_max) {
            return arg(format!(
                "band {name}: need 0 < lambda_min < lambda_peak < lambda_max, got \
                 {lambda_min}/{lambda_peak}/{lambda_max}"
            ));
        }
        Ok(ChannelBand {
            name,
            lambda_min,
            lambda_peak,
            lambda_max,
        })
    }

    /// Visible channel, 380–780 nm, warm-white LED.
    pub fn vis() -> Self {
        ChannelBand {
            name: VIS.into(),
            lambda_min: 380.0,
            lambda_peak: 550.0,
            lambda_max: 780.0,
        }
    }

    /// Near-infrared channel, 750–1400 nm with the LED peak at 850 nm.
    pub fn nir() -> Self {
        ChannelBand {
            name: NIR.into(),
            lambda_min: 750.0,
            lambda_peak: 850.0,
            lambda_max: 1400.0,
        }
    }
}

/// Absorption `a` and scattering `b`, both in 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients")]
pub struct OpticalCoefficients {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawCoefficients {
    a: f64,
    b: f64,
}

impl TryFrom<RawCoefficients> for OpticalCoefficients {
    type Error = Error;

    fn try_from(r: RawCoefficients) -> Result<Self> {
        OpticalCoefficients::new(r.a, r.b)
    }
}

impl OpticalCoefficients {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
            return arg(format!(
                "coefficients must be finite and >= 0, got a={a}, b={b}"
            ));
        }
        Ok(OpticalCoefficients { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Henyey–Greenstein phase function with asymmetry `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPhase")]
pub struct PhaseFunction {
    g: f64,
}

#[derive(Deserialize)]
struct RawPhase {
    g: f64,
}

impl TryFrom<RawPhase> for PhaseFunction {
    type Error = Error;

    fn try_from(r: RawPhase) -> Result<Self> {
        PhaseFunction::new(r.g)
    }
}

impl PhaseFunction {
    pub fn new(g: f64) -> Result<Self> {
        if !(g > -1.0 && g < 1.0) {
            return arg(format!("phase asymmetry must lie in (-1, 1), got {g}"));
        }
        Ok(PhaseFunction { g })
    }

    pub fn isotropic() -> Self {
        PhaseFunction { g: 0.0 }
    }

    pub fn g(&self) -> f64 {
        self.g
    }
}

/// Per-band optics of a water body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandOptics {
    #[serde(flatten)]
    pub coefficients: OpticalCoefficients,
    /// Relative veiling radiance scale, >= 0.
    #[serde(default)]
    pub ambient_veiling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterBody {
    pub bands: BTreeMap<String, BandOptics>,
    pub phase: PhaseFunction,
    /// Skips the NIR-absorbs-more / VIS-scatters-more ordering check.
    #[serde(default)]
    pub waive_orderings: bool,
}

impl WaterBody {
    /// Turbid inland water with isotropic scattering.
    pub fn natural() -> Self {
        Self::two_band(
            OpticalCoefficients { a: 0.10, b: 0.60 },
            OpticalCoefficients { a: 1.20, b: 0.05 },
            0.40,
            PhaseFunction::isotropic(),
        )
    }

    /// Clear water with forward-peaked scattering.
    pub fn clear() -> Self {
        Self::two_band(
            OpticalCoefficients { a: 0.05, b: 0.10 },
            OpticalCoefficients { a: 1.10, b: 0.02 },
            0.40,
            PhaseFunction { g: 0.8 },
        )
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "natural" => Ok(Self::natural()),
            "clear" => Ok(Self::clear()),
            other => Err(Error::Config(format!(
                "unknown water preset {other:?} (expected \"natural\" or \"clear\")"
            ))),
        }
    }

    fn two_band(
        vis: OpticalCoefficients,
        nir: OpticalCoefficients,
        veiling: f64,
        phase: PhaseFunction,
    ) -> Self {
        let mut bands = BTreeMap::new();
        bands.insert(
            VIS.to_string(),
            BandOptics {
                coefficients: vis,
                ambient_veiling: veiling,
            },
        );
        bands.insert(
            NIR.to_string(),
            BandOptics {
                coefficients: nir,
                ambient_veiling: veiling,
            },
        );
        WaterBody {
            bands,
            phase,
            waive_orderings: false,
        }
    }

    pub fn band(&self, name: &str) -> Result<&BandOptics> {
        self.bands
            .get(name)
            .ok_or_else(|| Error::Config(format!("water has no coefficients for band {name}")))
    }

    /// Returns every invariant violation, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, optics) in &self.bands {
            let v = optics.ambient_veiling;
            if !(v.is_finite() && v >= 0.0) {
                out.push(format!(
                    "water.bands.{name}.ambient_veiling must be >= 0, got {v}"
                ));
            }
        }
        if !self.waive_orderings {
            if let (Some(vis), Some(nir)) = (self.bands.get(VIS), self.bands.get(NIR)) {
                let (v, n) = (vis.coefficients, nir.coefficients);
                if n.a <= v.a {
                    out.push(format!(
                        "water: expected a(NIR) > a(VIS), got {} <= {}",
                        n.a, v.a
                    ));
                }
                if v.b <= n.b {
                    out.push(format!(
                        "water: expected b(VIS) > b(NIR), got {} <= {}",
                        v.b, n.b
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Beam attenuation `c = a + b`.
pub fn beam_attenuation(coeffs: OpticalCoefficients) -> f64 {
    coeffs.a + coeffs.b
}

/// Percent of radiance surviving a path of `r` metres through attenuation `c`.
pub fn transmission(c: f64, r: f64) -> Result<f64> {
    if !(c >= 0.0 && c.is_finite()) {
        return arg(format!("attenuation must be finite and >= 0, got {c}"));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return arg(format!("path length must be finite and >= 0, got {r}"));
    }
    Ok((-c * r).exp() * 100.0)
}

pub fn transmission_from_radiance(l0: f64, lr: f64) -> Result<f64> {
    if !(l0 > 0.0) {
        return arg(format!("source radiance must be > 0, got {l0}"));
    }
    if !(lr >= 0.0) {
        return arg(format!("received radiance must be >= 0, got {lr}"));
    }
    if lr > l0 {
        return arg(format!(
            "received radiance {lr} exceeds source {l0}; water is a passive medium"
        ));
    }
    Ok(lr / l0 * 100.0)
}

/// Phase function density per steradian at scattering angle `theta`.
pub fn phase_value(phase: PhaseFunction, theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return arg(format!("scattering angle must lie in [0, pi], got {theta}"));
    }
    let g = phase.g;
    let denom = 1.0 + g * g - 2.0 * g * theta.cos();
    Ok((1.0 - g * g) / (4.0 * PI * denom * denom.sqrt()))
}

/// Fraction of scattered power sent into the rear hemisphere.
pub fn backscatter_fraction(phase: PhaseFunction) -> f64 {
    let g = phase.g;
    if g.abs() < 1e-2 {
        // the closed form cancels catastrophically near g = 0; use its series
        let g2 = g * g;
        return 0.5 - g * (0.75 - g2 * (7.0 / 16.0 - g2 * (11.0 / 32.0 - g2 * 75.0 / 256.0)));
    }
    (1.0 - g) / (2.0 * g) * ((1.0 + g) / (1.0 + g * g).sqrt() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attenuation_is_sum() {
        for (a, b, c) in [(0.1, 0.2, 0.3), (0.0, 0.0, 0.0), (4.0, 0.5, 4.5)] {
            let got = beam_attenuation(OpticalCoefficients::new(a, b).unwrap());
            assert!((got - c).abs() < 1e-15, "{a}+{b}={got}");
            assert_eq!(got.to_bits(), (a + b).to_bits());
        }
    }

    #[test]
    fn transmission_examples() {
        assert_eq!(transmission(3.7, 0.0).unwrap(), 100.0);
        assert_eq!(transmission(0.0, 5.0).unwrap(), 100.0);
        let half = transmission(2.0_f64.ln(), 1.0).unwrap();
        assert!((half - 50.0).abs() < 1e-9);
        assert!(transmission(-0.1, 1.0).is_err());
        assert!(transmission(0.1, -1.0).is_err());
    }

    #[test]
    fn transmission_from_radiance_examples() {
        assert_eq!(transmission_from_radiance(1.0, 1.0).unwrap(), 100.0);
        assert_eq!(transmission_from_radiance(2.0, 1.0).unwrap(), 50.0);
        assert_eq!(transmission_from_radiance(1.0, 0.0).unwrap(), 0.0);
        assert!(transmission_from_radiance(0.0, 0.0).is_err());
        assert!(transmission_from_radiance(1.0, 1.5).is_err());
    }

    #[test]
    fn phase_isotropic_and_forward() {
        let iso = PhaseFunction::isotropic();
        for theta in [0.0, 1.0, PI] {
            let v = phase_value(iso, theta).unwrap();
            assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
        }
        // (1 - 0.81) / (4 pi (0.01)^1.5) = 0.19 / (4 pi 0.001)
        let v = phase_value(PhaseFunction::new(0.9).unwrap(), 0.0).unwrap();
        assert!((v - 0.19 / (4.0 * PI * 0.001)).abs() < 1e-9);
        assert!(phase_value(iso, -0.1).is_err());
        assert!(phase_value(iso, 3.2).is_err());
    }

    #[test]
    fn backscatter_limits() {
        assert!((backscatter_fraction(PhaseFunction::isotropic()) - 0.5).abs() < 1e-12);
        let near_one = backscatter_fraction(PhaseFunction::new(0.999_999).unwrap());
        assert!(near_one < 1e-6);
        let tiny = backscatter_fraction(PhaseFunction::new(5e-7).unwrap());
        let small = backscatter_fraction(PhaseFunction::new(2e-6).unwrap());
        assert!(tiny > small && tiny < 0.5);
    }

    #[test]
    fn phase_rejects_out_of_range() {
        assert!(PhaseFunction::new(1.0).is_err());
        assert!(PhaseFunction::new(-1.0).is_err());
        assert!(OpticalCoefficients::new(-0.1, 0.0).is_err());
        assert!(ChannelBand::new("x", 500.0, 400.0, 600.0).is_err());
    }

    #[test]
    fn presets_satisfy_orderings() {
        for w in [WaterBody::natural(), WaterBody::clear()] {
            assert!(w.violations().is_empty());
            let (v, n) = (&w.bands[VIS], &w.bands[NIR]);
            assert!(n.coefficients.a() > v.coefficients.a());
            assert!(v.coefficients.b() > n.coefficients.b());
        }
        assert_eq!(WaterBody::natural().phase.g(), 0.0);
        assert_eq!(WaterBody::clear().phase.g(), 0.8);
    }

    #[test]
    fn ordering_violation_and_waiver() {
        let mut w = WaterBody::natural();
        w.bands.get_mut(NIR).unwrap().coefficients = OpticalCoefficients::new(0.01, 0.9).unwrap();
        assert_eq!(w.violations().len(), 2);
        w.waive_orderings = true;
        assert!(w.violations().is_empty());
    }

    #[test]
    fn water_json_roundtrip() {
        let w = WaterBody::natural();
        let s = serde_json::to_string(&w).unwrap();
        let back: WaterBody = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        let bad = r#"{"bands":{"VIS":{"a":-1,"b":0}},"phase":{"g":0}}"#;
        assert!(serde_json::from_str::<WaterBody>(bad).is_err());
    }
}
