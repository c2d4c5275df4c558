use serde::Serialize;

use crate::error::{arg, Result};
use crate::image::{GrayImage, Rect};
use crate::ops::canny::EdgeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeState {
    None,
    NirOnly,
    VisOnly,
    Both,
}

impl EdgeState {
    /// Figure rendering: white paper, black NIR edges, gray VIS edges.
    pub fn gray_level(self) -> u8 {
        match self {
            EdgeState::None => 255,
            EdgeState::VisOnly => 128,
            EdgeState::NirOnly | EdgeState::Both => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayMap {
    width: usize,
    height: usize,
    states: Vec<EdgeState>,
}

impl OverlayMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn get(&self, x: usize, y: usize) -> EdgeState {
        self.states[y * self.width + x]
    }

    pub fn to_gray(&self) -> GrayImage {
        let data = self.states.iter().map(|s| s.gray_level()).collect();
        GrayImage::from_vec(self.width, self.height, data).expect("dimensions preserved")
    }
}

pub fn edge_overlay(nir: &EdgeMap, vis: &EdgeMap) -> Result<OverlayMap> {
    if nir.width() != vis.width() || nir.height() != vis.height() {
        return arg(format!(
            "edge maps differ in size: {}x{} vs {}x{}",
            nir.width(),
            nir.height(),
            vis.width(),
            vis.height()
        ));
    }
    let states = nir
        .mask()
        .iter()
        .zip(vis.mask())
        .map(|(&n, &v)| match (n, v) {
            (true, true) => EdgeState::Both,
            (true, false) => EdgeState::NirOnly,
            (false, true) => EdgeState::VisOnly,
            (false, false) => EdgeState::None,
        })
        .collect();
    Ok(OverlayMap {
        width: nir.width(),
        height: nir.height(),
        states,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EdgeCounts {
    pub nir_only: usize,
    pub vis_only: usize,
    pub both: usize,
}

impl EdgeCounts {
    pub fn nir_total(&self) -> usize {
        self.nir_only + self.both
    }

    pub fn vis_total(&self) -> usize {
        self.vis_only + self.both
    }
}

impl std::ops::Add for EdgeCounts {
    type Output = EdgeCounts;

    fn add(self, o: EdgeCounts) -> EdgeCounts {
        EdgeCounts {
            nir_only: self.nir_only + o.nir_only,
            vis_only: self.vis_only + o.vis_only,
            both: self.both + o.both,
        }
    }
}

pub fn edge_counts(overlay: &OverlayMap, region: Rect) -> Result<EdgeCounts> {
    region.check(overlay.width, overlay.height)?;
    let mut c = EdgeCounts::default();
    for y in region.y..region.y + region.h {
        for x in region.x..region.x + region.w {
            match overlay.get(x, y) {
                EdgeState::NirOnly => c.nir_only += 1,
                EdgeState::VisOnly => c.vis_only += 1,
                EdgeState::Both => c.both += 1,
                EdgeState::None => {}
            }
        }
    }
    Ok(c)
}
