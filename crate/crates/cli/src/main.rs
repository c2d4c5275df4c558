use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualband::io::config::ClaimRegions;
use dualband::io::report::{
    transmission_table, write_json, write_materials_csv, write_transmission_csv, Claim, Truth,
};
use dualband::io::{load_config, read_pgm, write_pgm, PipelineConfig};
use dualband::ops::{
    contrast_stretch, equalize_global, equalize_local, homomorphic_filter, CannyParams,
    HomomorphicParams,
};
use dualband::optics::WaterBody;
use dualband::pipeline::{
    analyze, evaluate_claims, run_pipeline, simulate, write_analysis, write_simulation,
};
use dualband::registration::{fuse_weighted, plant_mask, register_pair, WeightMap};
use dualband::render::AcquiredPair;
use dualband::scene::{builtin_materials, SceneSpec};
use dualband::{Error, Result};

/// Exit status when every stage ran but a channel-comparison claim failed.
const CLAIM_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dualband",
    version,
    about = "Dual-band NIR/VIS underwater imaging toolkit"
)]
#[command(propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Water optics tables.
    #[command(subcommand)]
    Water(WaterCmd),
    /// Scene catalog tables.
    #[command(subcommand)]
    Scene(SceneCmd),
    /// Render a VIS/NIR pair and its ground truth.
    Simulate(SimulateArgs),
    /// Histograms, statistics and shared-threshold edge overlays of a pair.
    Analyze(AnalyzeArgs),
    /// Contrast enhancement filters.
    Enhance(EnhanceArgs),
    /// Align the NIR image onto the VIS grid using the chessboard marker.
    Register(RegisterArgs),
    /// Weighted NIR-into-VIS fusion.
    Fuse(FuseArgs),
    /// simulate → analyze → register → fuse, with the claim checklist.
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
enum WaterCmd {
    /// Transmission-vs-distance table as CSV (r_m,band,T_percent).
    Report(WaterReportArgs),
}

#[derive(Subcommand)]
enum SceneCmd {
    /// Material catalog as CSV.
    Materials(SceneMaterialsArgs),
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "DUALBAND_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct WaterReportArgs {
    /// Water preset ("natural" or "clear").
    #[arg(long, default_value = "natural")]
    water: String,
    /// Inline water description (JSON file); overrides --water.
    #[arg(long)]
    water_file: Option<PathBuf>,
    /// Largest path length, metres.
    #[arg(long, default_value_t = 2.0)]
    max_distance: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SceneMaterialsArgs {
    /// Scene whose extra materials are listed along with the built-in ones.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Pipeline config supplying scene, water and acquisition settings.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (falls back to DUALBAND_OUT_DIR, then the config).
    #[arg(long, env = "DUALBAND_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CannyArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 25.0)]
    t_low: f64,
    #[arg(long, default_value_t = 60.0)]
    t_high: f64,
}

impl CannyArgs {
    fn params(&self) -> CannyParams {
        CannyParams {
            sigma: self.sigma,
            t_low: self.t_low,
            t_high: self.t_high,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    vis: PathBuf,
    /// NIR image, already registered onto the VIS grid.
    #[arg(long)]
    nir: PathBuf,
    /// Ground truth from `simulate`; enables per-region stats and claims.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    canny: CannyArgs,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Equalize,
    Local,
    Stretch,
    Homomorphic,
}

#[derive(Args)]
struct EnhanceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Tile size for local equalization, pixels.
    #[arg(long, default_value_t = 32)]
    tile: usize,
    /// Clip limit for local equalization, fraction of tile area.
    #[arg(long, default_value_t = 0.02)]
    clip_limit: f64,
    /// Percentiles for contrast stretch.
    #[arg(long, default_value_t = 1.0)]
    p_low: f64,
    #[arg(long, default_value_t = 99.0)]
    p_high: f64,
    /// Homomorphic cutoff, cycles per image.
    #[arg(long, default_value_t = 2.0)]
    cutoff: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma_low: f64,
    #[arg(long, default_value_t = 1.5)]
    gamma_high: f64,
}

#[derive(Args)]
struct RegisterArgs {
    #[arg(long)]
    vis: PathBuf,
    #[arg(long)]
    nir: PathBuf,
    /// Inner corners per row of the marker.
    #[arg(long, default_value_t = 4)]
    cols: usize,
    /// Inner corners per column of the marker.
    #[arg(long, default_value_t = 4)]
    rows: usize,
    /// Ground truth; when given, the corner RMS against it is reported.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct FuseArgs {
    #[arg(long)]
    vis: PathBuf,
    /// NIR image registered onto the VIS grid.
    #[arg(long)]
    nir: PathBuf,
    /// Weight image: 0 → −1, 128 → 0, 255 → +1. Without it the plant mask
    /// is generated from --delta and --alpha.
    #[arg(long)]
    weight_map: Option<PathBuf>,
    #[arg(long, default_value_t = 33.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.33)]
    alpha: f64,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (falls back to DUALBAND_OUT_DIR, then the config).
    #[arg(long, env = "DUALBAND_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                msg.push_str(&format!("\n  caused by: {s}"));
                src = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Water(WaterCmd::Report(a)) => water_report(a),
        Command::Scene(SceneCmd::Materials(a)) => scene_materials(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Enhance(a) => enhance_cmd(a),
        Command::Register(a) => register_cmd(a),
        Command::Fuse(a) => fuse_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn water_report(a: WaterReportArgs) -> Result<ExitCode> {
    let water = match &a.water_file {
        Some(p) => at_path(
            p,
            serde_json::from_str::<WaterBody>(&read_text(p)?).map_err(Error::from),
        )?,
        None => WaterBody::preset(&a.water)?,
    };
    water.validate()?;
    if a.max_distance.is_nan() || a.max_distance < 0.0 || a.steps == 0 {
        return Err(Error::Argument(
            "need --max-distance >= 0 and --steps >= 1".into(),
        ));
    }
    let rows = transmission_table(&water, a.max_distance, a.steps)?;
    write_transmission_csv(&rows, sink(a.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn scene_materials(a: SceneMaterialsArgs) -> Result<ExitCode> {
    let catalog = match &a.scene {
        Some(p) => at_path(p, SceneSpec::from_json(&read_text(p)?))?.catalog(),
        None => builtin_materials(),
    };
    write_materials_csv(&catalog, sink(a.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn load_with_overrides(
    config: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<PipelineConfig> {
    let mut cfg = at_path(config, load_config(config))?;
    if let Some(seed) = seed {
        cfg.acquisition.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn simulate_cmd(a: SimulateArgs) -> Result<ExitCode> {
    let cfg = load_with_overrides(&a.config, a.seed, a.out_dir)?;
    let sim = simulate(&cfg.scene, &cfg.water, &cfg.acquisition)?;
    write_simulation(&sim, &cfg.output_dir)?;
    println!(
        "wrote vis.pgm, nir.pgm, truth.json to {}",
        cfg.output_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Prefixes failures with the offending path so the message is actionable.
fn at_path<T>(p: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Argument(format!("{}: {e}", p.display())))
}

fn read_image(p: &Path) -> Result<dualband::GrayImage> {
    at_path(p, read_pgm(p))
}

fn read_text(p: &Path) -> Result<String> {
    at_path(p, std::fs::read_to_string(p).map_err(Error::from))
}

fn read_truth(p: &Path) -> Result<Truth> {
    at_path(p, serde_json::from_str(&read_text(p)?).map_err(Error::from))
}

fn print_claims(claims: &[Claim]) {
    for c in claims {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {:<26} measured {:>10.3}  threshold {:>8.3}",
            c.id, c.measured, c.threshold
        );
    }
}

fn claim_exit(claims: &[Claim]) -> ExitCode {
    if claims.iter().all(|c| c.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(CLAIM_FAILURE)
    }
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<ExitCode> {
    let vis = read_image(&a.vis)?;
    let nir = read_image(&a.nir)?;
    let truth = a.truth.as_deref().map(read_truth).transpose()?;
    let regions = truth
        .as_ref()
        .map(|t| t.regions.iter().map(|(k, r)| (k.clone(), r.rect)).collect())
        .unwrap_or_default();
    let analysis = analyze(&vis, &nir, &regions, a.canny.params())?;
    write_analysis(&analysis, &a.out.out_dir)?;
    println!("wrote analysis to {}", a.out.out_dir.display());

    let Some(truth) = truth else {
        return Ok(ExitCode::SUCCESS);
    };
    let pair = AcquiredPair {
        vis,
        nir,
        true_h: truth.true_h,
    };
    let claims = evaluate_claims(&pair, &analysis, &regions, &ClaimRegions::default())?;
    write_json(&claims, a.out.out_dir.join("claims.json"))?;
    print_claims(&claims);
    Ok(claim_exit(&claims))
}

fn enhance_cmd(a: EnhanceArgs) -> Result<ExitCode> {
    let img = read_image(&a.input)?;
    let out = match a.method {
        Method::Equalize => equalize_global(&img),
        Method::Local => equalize_local(&img, a.tile, a.clip_limit)?,
        Method::Stretch => contrast_stretch(&img, a.p_low, a.p_high)?,
        Method::Homomorphic => homomorphic_filter(
            &img,
            HomomorphicParams {
                cutoff: a.cutoff,
                gamma_low: a.gamma_low,
                gamma_high: a.gamma_high,
            },
        )?,
    };
    if let Some(parent) = a.output.parent() {
        std::fs::create_dir_all(parent)?;
    }
    write_pgm(&out, &a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn register_cmd(a: RegisterArgs) -> Result<ExitCode> {
    let vis = read_image(&a.vis)?;
    let nir = read_image(&a.nir)?;
    let reg = register_pair(&vis, &nir, (a.cols, a.rows))?;
    let dir = &a.out.out_dir;
    std::fs::create_dir_all(dir)?;
    write_pgm(&reg.nir_registered, dir.join("nir_registered.pgm"))?;
    write_json(&reg.h_est, dir.join("h_est.json"))?;
    println!("fit rms {:.4} px", reg.rms);
    if let Some(t) = &a.truth {
        println!(
            "rms vs truth {:.4} px",
            reg.rms_against(&read_truth(t)?.true_h)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn fuse_cmd(a: FuseArgs) -> Result<ExitCode> {
    let vis = read_image(&a.vis)?;
    let nir = read_image(&a.nir)?;
    let weights = match &a.weight_map {
        Some(p) => WeightMap::from_gray(&read_image(p)?),
        None => plant_mask(&nir, &vis, a.delta, a.alpha)?,
    };
    let fused = fuse_weighted(&vis, &nir, &weights)?;
    let dir = &a.out.out_dir;
    std::fs::create_dir_all(dir)?;
    write_pgm(&fused, dir.join("fused.pgm"))?;
    if a.weight_map.is_none() {
        write_pgm(&weights.to_gray(), dir.join("weights.pgm"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn pipeline_cmd(a: PipelineArgs) -> Result<ExitCode> {
    let cfg = load_with_overrides(&a.config, a.seed, a.out_dir)?;
    let report = run_pipeline(&cfg)?;
    if let Some(r) = &report.registration {
        println!("registration rms vs truth {:.4} px", r.rms_vs_truth);
    }
    if let Some(f) = &report.fusion {
        println!(
            "fusion plant edges {} -> {}, mask IoU {}",
            f.plant_edges_vis,
            f.plant_edges_fused,
            f.mask_iou.map_or("n/a".into(), |v| format!("{v:.3}"))
        );
    }
    print_claims(&report.claims);
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(claim_exit(&report.claims))
}
