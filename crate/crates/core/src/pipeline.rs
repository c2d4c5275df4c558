//! simulate → analyze → register → fuse, with artifact emission.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{arg, Error, Result};
use crate::image::{GrayImage, Rect};
use crate::io::config::{ClaimRegions, PipelineConfig};
use crate::io::pgm::write_pgm;
use crate::io::report::{
    write_histogram_csv, write_json, BandSummary, Claim, FusionReport, RegionLabel, RegionReport,
    RegistrationReport, RunReport, Truth,
};
use crate::ops::{
    canny, edge_counts, edge_overlay, histogram, region_stats, CannyParams, EdgeMap, Histogram,
    OverlayMap,
};
use crate::optics::{WaterBody, NIR, VIS};
use crate::registration::{fuse_weighted, plant_mask, register_pair, Registration, WeightMap};
use crate::render::{acquire_pair, AcquiredPair, AcquisitionModel};
use crate::scene::SceneSpec;

/// Minimum NIR-vs-VIS mean brightness margin, gray levels.
pub const BRIGHTNESS_MARGIN: f64 = 5.0;
/// Minimum VIS/NIR edge ratio on the dyed fabric face.
pub const FABRIC_EDGE_RATIO: f64 = 10.0;
/// Minimum NIR-over-VIS mean on the black fabric, gray levels.
pub const BLACK_FABRIC_MARGIN: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub pair: AcquiredPair,
    pub truth: Truth,
}

pub fn simulate(
    scene: &SceneSpec,
    water: &WaterBody,
    acq: &AcquisitionModel,
) -> Result<Simulation> {
    let pair = acquire_pair(scene, water, acq)?;
    let catalog = scene.catalog();
    let regions = scene
        .objects
        .iter()
        .map(|o| {
            (
                o.name.clone(),
                RegionLabel {
                    rect: o.rect,
                    material: catalog[&o.material].name.clone(),
                    distance: o.distance,
                },
            )
        })
        .collect();
    let truth = Truth {
        true_h: pair.true_h,
        regions,
    };
    Ok(Simulation { pair, truth })
}

pub fn write_simulation(sim: &Simulation, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_pgm(&sim.pair.vis, dir.join("vis.pgm"))?;
    write_pgm(&sim.pair.nir, dir.join("nir.pgm"))?;
    write_json(&sim.truth, dir.join("truth.json"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub hist_vis: Histogram,
    pub hist_nir: Histogram,
    pub edges_vis: EdgeMap,
    pub edges_nir: EdgeMap,
    pub overlay: OverlayMap,
    pub bands: BTreeMap<String, BandSummary>,
    pub regions: BTreeMap<String, RegionReport>,
}

/// Histogram, statistics and shared-threshold edge comparison of a pair.
pub fn analyze(
    vis: &GrayImage,
    nir: &GrayImage,
    regions: &BTreeMap<String, Rect>,
    params: CannyParams,
) -> Result<Analysis> {
    vis.check_same_size(nir)?;
    let edges_vis = canny(vis, params)?;
    let edges_nir = canny(nir, params)?;
    let overlay = edge_overlay(&edges_nir, &edges_vis)?;
    let full = Rect::full(vis.width(), vis.height());
    let summary = |img: &GrayImage| -> Result<BandSummary> {
        let s = region_stats(img, full)?;
        Ok(BandSummary {
            mean: s.mean,
            std: s.std,
        })
    };
    let bands = BTreeMap::from([
        (VIS.to_string(), summary(vis)?),
        (NIR.to_string(), summary(nir)?),
    ]);
    let mut per_region = BTreeMap::new();
    for (name, &rect) in regions {
        per_region.insert(
            name.clone(),
            RegionReport {
                vis: region_stats(vis, rect)?,
                nir: region_stats(nir, rect)?,
                edges: edge_counts(&overlay, rect)?,
            },
        );
    }
    Ok(Analysis {
        hist_vis: histogram(vis),
        hist_nir: histogram(nir),
        edges_vis,
        edges_nir,
        overlay,
        bands,
        regions: per_region,
    })
}

pub fn write_analysis(a: &Analysis, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_histogram_csv(&a.hist_vis, dir.join("hist_VIS.csv"))?;
    write_histogram_csv(&a.hist_nir, dir.join("hist_NIR.csv"))?;
    write_json(
        &serde_json::json!({ "bands": a.bands, "regions": a.regions }),
        dir.join("stats.json"),
    )?;
    write_pgm(&a.overlay.to_gray(), dir.join("overlay.pgm"))?;
    write_pgm(&a.edges_vis.to_gray(), dir.join("edges_vis.pgm"))?;
    write_pgm(&a.edges_nir.to_gray(), dir.join("edges_nir.pgm"))
}

fn region<'a>(regions: &'a BTreeMap<String, Rect>, name: &str) -> Result<&'a Rect> {
    regions
        .get(name)
        .ok_or_else(|| Error::Config(format!("no region labelled {name:?}")))
}

/// Evaluates the channel-comparison checklist.
///
/// Brightness uses the raw acquisitions; every other claim uses the analyzed
/// (registered) pair.
pub fn evaluate_claims(
    raw: &AcquiredPair,
    analysis: &Analysis,
    regions: &BTreeMap<String, Rect>,
    names: &ClaimRegions,
) -> Result<Vec<Claim>> {
    let full = Rect::full(raw.vis.width(), raw.vis.height());
    let mean_vis = region_stats(&raw.vis, full)?.mean;
    let mean_nir = region_stats(&raw.nir, full)?.mean;
    let margin = mean_vis - mean_nir;

    let lookup = |name: &str| -> Result<&RegionReport> {
        analysis
            .regions
            .get(name)
            .ok_or_else(|| Error::Config(format!("region {name:?} was not analyzed")))
    };
    let contrast = lookup(&names.contrast)?;
    let cv_vis = contrast.vis.relative_contrast();
    let cv_nir = contrast.nir.relative_contrast();

    let plant = lookup(&names.plant)?.edges;

    let fabric_rect = region(regions, &names.fabric)?.inset(names.inset);
    let fabric = edge_counts(&analysis.overlay, fabric_rect)?;
    let (fv, fn_) = (fabric.vis_total() as f64, fabric.nir_total() as f64);
    let black = lookup(&names.black_fabric)?;
    let black_margin = black.nir.mean - black.vis.mean;

    Ok(vec![
        Claim {
            id: "nir_darker",
            statement: "NIR images are darker than VIS images (absorption grows with wavelength)",
            measured: margin,
            threshold: BRIGHTNESS_MARGIN,
            pass: margin >= BRIGHTNESS_MARGIN,
        },
        Claim {
            id: "vis_lower_contrast",
            statement: "scattering lowers object contrast more in VIS than in NIR",
            measured: cv_vis - cv_nir,
            threshold: 0.0,
            pass: cv_vis < cv_nir,
        },
        Claim {
            id: "plant_edges_nir",
            statement: "more plant edges are detected in NIR than in VIS",
            measured: plant.nir_only as f64 - plant.vis_only as f64,
            threshold: 0.0,
            pass: plant.nir_only > plant.vis_only,
        },
        Claim {
            id: "fabric_dye_invisible_nir",
            statement:
                "dyed fabric circles visible in VIS vanish in NIR (VIS edge pixels vs 10x NIR)",
            measured: fv,
            threshold: FABRIC_EDGE_RATIO * fn_,
            pass: fv > 0.0 && fv >= FABRIC_EDGE_RATIO * fn_,
        },
        Claim {
            id: "black_fabric_nir",
            statement: "black fabric nearly invisible in VIS is detectable in NIR",
            measured: black_margin,
            threshold: BLACK_FABRIC_MARGIN,
            pass: black_margin >= BLACK_FABRIC_MARGIN,
        },
    ])
}

/// Intersection over union of two pixel masks; `None` when both are empty.
pub fn mask_iou(a: &[bool], b: &[bool]) -> Option<f64> {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    (union > 0).then(|| inter as f64 / union as f64)
}

/// Fusion weights: the configured weight image, or the plant mask.
pub fn fusion_weights(
    cfg: &PipelineConfig,
    vis: &GrayImage,
    nir_reg: &GrayImage,
) -> Result<WeightMap> {
    match &cfg.fusion.weight_map {
        Some(path) => {
            let img = crate::io::pgm::read_pgm(path)?;
            if !img.same_size(vis) {
                return arg(format!(
                    "weight map {}x{} does not match images {}x{}",
                    img.width(),
                    img.height(),
                    vis.width(),
                    vis.height()
                ));
            }
            Ok(WeightMap::from_gray(&img))
        }
        None => plant_mask(nir_reg, vis, cfg.fusion.delta, cfg.fusion.alpha),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub simulation: Simulation,
    pub analysis: Analysis,
    pub registration: Option<Registration>,
    pub fused: Option<GrayImage>,
    pub report: RunReport,
}

/// Runs every stage in memory without touching the filesystem.
pub fn execute(cfg: &PipelineConfig) -> Result<PipelineRun> {
    let sim =
        simulate(&cfg.scene, &cfg.water, &cfg.acquisition).map_err(|e| e.in_stage("simulate"))?;
    let pair = &sim.pair;

    let registration = if cfg.registration.enabled {
        Some(
            register_pair(&pair.vis, &pair.nir, cfg.registration.board)
                .map_err(|e| e.in_stage("register"))?,
        )
    } else {
        None
    };
    let nir_aligned = registration
        .as_ref()
        .map(|r| &r.nir_registered)
        .unwrap_or(&pair.nir);

    let regions = cfg.regions();
    let canny_params: CannyParams = cfg.analysis.canny.into();
    let analysis = analyze(&pair.vis, nir_aligned, &regions, canny_params)
        .map_err(|e| e.in_stage("analyze"))?;
    let claims = evaluate_claims(pair, &analysis, &regions, &cfg.analysis.claims)
        .map_err(|e| e.in_stage("analyze"))?;

    let mut fused = None;
    let mut fusion_report = None;
    if cfg.fusion.enabled {
        if registration.is_none() && !pair.true_h.is_identity() {
            return Err(Error::Argument(
                "refusing to fuse unregistered channels: registration is disabled but the \
                 NIR channel is misaligned"
                    .into(),
            )
            .in_stage("fuse"));
        }
        let run = || -> Result<(GrayImage, FusionReport)> {
            let weights = fusion_weights(cfg, &pair.vis, nir_aligned)?;
            let out = fuse_weighted(&pair.vis, nir_aligned, &weights)?;
            let plant_name = &cfg.analysis.claims.plant;
            let plant_rect = *region(&regions, plant_name)?;
            let count = |img: &GrayImage| -> Result<usize> {
                let e = canny(img, canny_params)?;
                let o = edge_overlay(&e, &e)?;
                Ok(edge_counts(&o, plant_rect)?.both)
            };
            let truth_mask = cfg
                .scene
                .object(plant_name)
                .map(|_| cfg.scene.object_mask(plant_name));
            let report = FusionReport {
                mask_iou: truth_mask.and_then(|m| mask_iou(&weights.support(), &m)),
                plant_edges_vis: count(&pair.vis)?,
                plant_edges_fused: count(&out)?,
            };
            Ok((out, report))
        };
        let (out, report) = run().map_err(|e| e.in_stage("fuse"))?;
        fused = Some(out);
        fusion_report = Some(report);
    }

    let report = RunReport {
        bands: analysis.bands.clone(),
        regions: analysis.regions.clone(),
        registration: registration.as_ref().map(|r| RegistrationReport {
            h_est: r.h_est,
            fit_rms: r.rms,
            rms_vs_truth: r.rms_against(&pair.true_h),
        }),
        fusion: fusion_report,
        claims,
    };
    Ok(PipelineRun {
        simulation: sim,
        analysis,
        registration,
        fused,
        report,
    })
}

/// Runs the pipeline and writes every artifact under the output directory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    let run = execute(cfg)?;
    let dir = &cfg.output_dir;
    let write = || -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_simulation(&run.simulation, dir)?;
        write_analysis(&run.analysis, dir)?;
        if let Some(r) = &run.registration {
            write_pgm(&r.nir_registered, dir.join("nir_registered.pgm"))?;
            write_json(&r.h_est, dir.join("h_est.json"))?;
        }
        if let Some(f) = &run.fused {
            write_pgm(f, dir.join("fused.pgm"))?;
        }
        write_json(&run.report, dir.join("report.json"))
    };
    write().map_err(|e| e.in_stage("write"))?;
    Ok(run.report)
}
