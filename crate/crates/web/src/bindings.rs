use wasm_bindgen::prelude::*;

use crate::{gray_to_rgba, slider_water, transmission_curve, Demo};

fn js(e: dualband::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = Demo)]
pub struct WasmDemo(Demo);

#[wasm_bindgen(js_class = Demo)]
impl WasmDemo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Result<WasmDemo, JsError> {
        Demo::new().map(WasmDemo).map_err(js)
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    /// Renders the scene; afterwards `vis()` and `nir()` return RGBA frames.
    pub fn render(
        &mut self,
        turbidity: f64,
        nir_absorption: f64,
        seed: u32,
    ) -> Result<(), JsError> {
        self.0
            .render(turbidity, nir_absorption, u64::from(seed))
            .map_err(js)
    }

    pub fn vis(&self) -> Vec<u8> {
        gray_to_rgba(self.0.vis())
    }

    pub fn nir(&self) -> Vec<u8> {
        gray_to_rgba(self.0.nir())
    }

    pub fn edges(&self, sigma: f64, t_low: f64, t_high: f64) -> Result<Vec<u8>, JsError> {
        self.0.edges(sigma, t_low, t_high).map_err(js)
    }

    pub fn fuse(&self, delta: f64, alpha: f64) -> Result<Vec<u8>, JsError> {
        self.0
            .fuse(delta, alpha)
            .map(|img| gray_to_rgba(&img))
            .map_err(js)
    }
}

/// `[r, T_vis, T_nir, ...]` for the slider-defined water.
#[wasm_bindgen(js_name = transmissionCurve)]
pub fn transmission_curve_js(
    turbidity: f64,
    nir_absorption: f64,
    max_r: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    let water = slider_water(turbidity, nir_absorption).map_err(js)?;
    transmission_curve(&water, max_r, steps).map_err(js)
}
