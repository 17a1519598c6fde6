use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mouldkit::codec::store::{load_pair, save_pair};
use mouldkit::geometry::camera::{front_view_pose, pose_from_row_major, pose_to_row_major};
use mouldkit::geometry::io::{load_mesh, write_mesh_ply, write_point_cloud_ply};
use mouldkit::geometry::scene::MeshScene;
use mouldkit::losses::{combined_objective, gan_loss, l1_loss, DepthBatch, DiscriminatorScores, DEFAULT_LAMBDA};
use mouldkit::metrics::sweep::{matched_voxel_resolution, run_sweep, SweepConfig};
use mouldkit::metrics::{depth_accuracy, ChamferMode, GroundTruth};
use mouldkit::sequence::{sample_subject_distance, sequence_camera, FRAMES_PER_SEQUENCE};
use mouldkit::shapes::humanoid_poses;
use mouldkit::{decode, encode, Camera, Mesh, MouldPair, DEFAULT_BACKGROUND, DEFAULT_EPSILON, DEFAULT_RESOLUTION};

const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "mouldkit", version, about = "Two-depth-map shape codec, voxel baseline and evaluation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a mesh into a visible/hidden depth-map pair.
    Encode(EncodeArgs),
    /// Decode a stored pair into a PLY point cloud.
    Decode(DecodeArgs),
    /// Depth accuracy of a predicted pair against a ground-truth pair.
    Eval(EvalArgs),
    /// Mould vs voxel Chamfer error over a resolution sweep.
    Sweep(SweepArgs),
    /// Ground-truth pairs for every frame of a mesh sequence.
    RenderGt(RenderGtArgs),
    /// Training losses between two stored pairs.
    Loss(LossArgs),
    /// Write the bundled articulated test meshes as PLY files.
    GenMeshes(GenMeshesArgs),
}

#[derive(Args)]
struct CameraArgs {
    /// JSON camera description; missing fields keep their defaults.
    #[arg(long)]
    camera_json: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Output stem; writes <stem>.vis.pfm, <stem>.hid.pfm and <stem>.mould.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    n: usize,
    /// Background distance L behind the subject center, meters.
    #[arg(long, default_value_t = DEFAULT_BACKGROUND)]
    bg_distance: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[command(flatten)]
    camera: CameraArgs,
}

#[derive(Args)]
struct DecodeArgs {
    /// Stem of the stored pair.
    #[arg(long)]
    mould: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the epsilon stored with the pair.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Emit world coordinates instead of camera coordinates.
    #[arg(long)]
    world: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Tolerance in millimeters; repeatable.
    #[arg(long = "tau", required = true)]
    taus: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rep {
    Mould,
    Voxel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GtKind {
    Samples,
    Vertices,
}

#[derive(Args)]
struct SweepArgs {
    /// Mesh files or directories of meshes; the bundled humanoids when omitted.
    #[arg(long)]
    mesh: Vec<PathBuf>,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mould resolutions; repeatable.
    #[arg(long = "n", default_values_t = [32usize, 64, 128, 256])]
    ns: Vec<usize>,
    /// Voxel resolutions; matched to the mould resolutions when omitted.
    #[arg(long = "voxel-n")]
    voxel_ns: Vec<usize>,
    #[arg(long = "representation", value_enum, value_delimiter = ',', default_values_t = [Rep::Mould, Rep::Voxel])]
    representations: Vec<Rep>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GtKind::Samples)]
    ground_truth: GtKind,
    #[arg(long, default_value_t = 30_000)]
    gt_samples: usize,
    #[arg(long, default_value_t = DEFAULT_BACKGROUND)]
    bg_distance: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Use squared nearest distances.
    #[arg(long)]
    squared: bool,
    /// Fill the encode_ms column (makes the CSV machine dependent).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    camera: CameraArgs,
}

#[derive(Args)]
struct RenderGtArgs {
    /// Directory of per-frame meshes, processed in file-name order.
    #[arg(long)]
    mesh: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed of the subject-distance draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_BACKGROUND)]
    bg_distance: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[command(flatten)]
    camera: CameraArgs,
}

#[derive(Args)]
struct LossArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// JSON file {"real": [...], "fake": [...]} of discriminator outputs.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
}

#[derive(Args)]
struct GenMeshesArgs {
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CameraConfig {
    width: usize,
    height: usize,
    sensor_width_mm: f64,
    focal_length_mm: f64,
    subject_distance_m: f64,
    /// World → camera, row-major 4×4. Overrides the subject placement.
    pose: Option<Vec<f64>>,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 320,
            height: 240,
            sensor_width_mm: 32.0,
            focal_length_mm: 60.0,
            subject_distance_m: 8.0,
            pose: None,
        }
    }
}

#[derive(Debug, Deserialize)]
struct ScoresFile {
    real: Vec<f64>,
    fake: Vec<f64>,
}

#[derive(Serialize)]
struct SequenceRecord {
    seed: u64,
    subject_distance_m: f64,
    camera_pose: Vec<f64>,
    frames: Vec<String>,
    skipped: Vec<String>,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<mouldkit::Error> for Failure {
    fn from(e: mouldkit::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}

fn load_camera_config(args: &CameraArgs) -> std::result::Result<CameraConfig, Failure> {
    let Some(path) = &args.camera_json else {
        return Ok(CameraConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

impl CameraConfig {
    fn frame(&self) -> mouldkit::Result<Camera> {
        Camera::new(self.width, self.height, self.sensor_width_mm, self.focal_length_mm)
    }

    /// Camera for a single subject: the explicit pose, or the subject's
    /// centroid on the optical axis at the configured distance.
    fn place(&self, mesh: &Mesh) -> mouldkit::Result<Camera> {
        let frame = self.frame()?;
        Ok(match &self.pose {
            Some(p) => frame.with_pose(pose_from_row_major(p)?),
            None => frame.with_pose(front_view_pose(&mesh.centroid(), self.subject_distance_m)),
        })
    }
}

fn check_epsilon(epsilon: f64, background: f64) -> CmdResult {
    if !(epsilon > 0.0 && epsilon < background) {
        return Err(mouldkit::Error::EpsilonOutOfRange { epsilon, background }.into());
    }
    Ok(())
}

fn ensure_parent(path: &Path) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

/// Writes a pair and re-checks the invariants of what landed on disk.
fn store_pair(pair: &MouldPair, stem: &Path) -> CmdResult {
    for w in &pair.warnings {
        warn(format!("{}: {}", stem.display(), w.message()));
    }
    ensure_parent(stem)?;
    save_pair(pair, stem)?;
    let violations = load_pair(stem)?.invariant_violations();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{}: {}", stem.display(), violations.join("; "))))
    }
}

fn is_mesh_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("obj" | "ply")
    )
}

fn mesh_files(dir: &Path) -> std::result::Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_mesh_file(p))
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_encode(a: EncodeArgs) -> CmdResult {
    check_epsilon(a.epsilon, a.bg_distance)?;
    let config = load_camera_config(&a.camera)?;
    let mesh = load_mesh(&a.mesh)?;
    if mesh.dropped_degenerate() > 0 {
        warn(format!("{}: dropped {} degenerate faces", a.mesh.display(), mesh.dropped_degenerate()));
    }
    let camera = config.place(&mesh)?;
    let scene = MeshScene::new(mesh);
    let mut pair = encode(&scene, &camera, a.bg_distance, a.n)?;
    pair.epsilon = a.epsilon;
    store_pair(&pair, &a.out)
}

fn cmd_decode(a: DecodeArgs) -> CmdResult {
    let pair = load_pair(&a.mould)?;
    let epsilon = a.epsilon.unwrap_or(pair.epsilon);
    check_epsilon(epsilon, pair.background)?;
    let mut cloud = decode(&pair, epsilon)?;
    if cloud.is_empty() {
        warn(format!("{}: pair holds no foreground; writing an empty cloud", a.mould.display()));
    }
    if a.world {
        let rotation = pair.camera.pose().inverse().rotation;
        for p in &mut cloud.points {
            *p = pair.camera.to_world(p);
        }
        if let Some(normals) = &mut cloud.normals {
            for n in normals {
                *n = rotation * *n;
            }
        }
    }
    ensure_parent(&a.out)?;
    write_point_cloud_ply(&a.out, &cloud)?;
    let violations = pair.invariant_violations();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{}: {}", a.mould.display(), violations.join("; "))))
    }
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    let gt = load_pair(&a.gt)?;
    let pred = load_pair(&a.pred)?;
    let mut out = String::from("tau_mm,overall,visible,hidden\n");
    for &tau in &a.taus {
        let acc = depth_accuracy(&gt, &pred, tau / 1000.0)?;
        out += &format!("{tau},{:.4},{:.4},{:.4}\n", acc.overall, acc.visible, acc.hidden);
    }
    print!("{out}");
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    check_epsilon(a.epsilon, a.bg_distance)?;
    let camera = load_camera_config(&a.camera)?;
    let meshes: Vec<Mesh> = if a.mesh.is_empty() {
        humanoid_poses().iter().map(|p| p.mesh()).collect()
    } else {
        let mut files = Vec::new();
        for p in &a.mesh {
            if p.is_dir() {
                files.extend(mesh_files(p)?);
            } else {
                files.push(p.clone());
            }
        }
        files.iter().map(load_mesh).collect::<mouldkit::Result<_>>()?
    };
    if meshes.is_empty() {
        return Err(Failure::Input("no meshes to sweep".into()));
    }
    let mould_ns = if a.representations.contains(&Rep::Mould) { a.ns.clone() } else { Vec::new() };
    let voxel_ns = if !a.representations.contains(&Rep::Voxel) {
        Vec::new()
    } else if a.voxel_ns.is_empty() {
        a.ns.iter().map(|&n| matched_voxel_resolution(n)).collect()
    } else {
        a.voxel_ns.clone()
    };
    let config = SweepConfig {
        mould_resolutions: mould_ns,
        voxel_resolutions: voxel_ns,
        ground_truth: match a.ground_truth {
            GtKind::Samples => GroundTruth::Samples(a.gt_samples),
            GtKind::Vertices => GroundTruth::Vertices,
        },
        seed: a.seed,
        background: a.bg_distance,
        epsilon: a.epsilon,
        mode: if a.squared { ChamferMode::Squared } else { ChamferMode::Mean },
        subject_distance: match camera.pose {
            Some(_) => None,
            None => Some(camera.subject_distance_m),
        },
    };
    let frame = match &camera.pose {
        Some(p) => camera.frame()?.with_pose(pose_from_row_major(p)?),
        None => camera.frame()?,
    };
    let report = run_sweep(&meshes, &frame, &config)?;
    let csv = report.to_csv(a.timings);
    match &a.out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, csv).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            print!("{}", report.to_table());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_render_gt(a: RenderGtArgs) -> CmdResult {
    check_epsilon(a.epsilon, a.bg_distance)?;
    let config = load_camera_config(&a.camera)?;
    let mut files = mesh_files(&a.mesh)?;
    if files.len() > FRAMES_PER_SEQUENCE {
        warn(format!("{} frames found; keeping the first {FRAMES_PER_SEQUENCE}", files.len()));
        files.truncate(FRAMES_PER_SEQUENCE);
    }
    fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("{}: {e}", a.out.display())))?;

    let distance = sample_subject_distance(a.seed);
    let mut camera: Option<Camera> = None;
    let mut record = SequenceRecord {
        seed: a.seed,
        subject_distance_m: distance,
        camera_pose: Vec::new(),
        frames: Vec::new(),
        skipped: Vec::new(),
    };
    let mut invariant_errors = Vec::new();
    for file in &files {
        let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mesh = match load_mesh(file) {
            Ok(m) => m,
            Err(e) => {
                warn(format!("skipping frame: {e}"));
                record.skipped.push(name);
                continue;
            }
        };
        let cam = match &camera {
            Some(c) => c.clone(),
            None => {
                let c = match &config.pose {
                    Some(p) => config.frame()?.with_pose(pose_from_row_major(p)?),
                    None => sequence_camera(&config.frame()?, &mesh, distance),
                };
                record.camera_pose = pose_to_row_major(c.pose()).to_vec();
                camera = Some(c.clone());
                c
            }
        };
        let scene = MeshScene::new(mesh);
        let mut pair = match encode(&scene, &cam, a.bg_distance, a.n) {
            Ok(p) => p,
            Err(e) => {
                warn(format!("skipping frame {name}: {e}"));
                record.skipped.push(name);
                continue;
            }
        };
        pair.epsilon = a.epsilon;
        match store_pair(&pair, &a.out.join(&name)) {
            Ok(()) => {}
            Err(Failure::Invariant(msg)) => invariant_errors.push(msg),
            Err(e) => return Err(e),
        }
        record.frames.push(name);
    }
    if record.frames.is_empty() {
        return Err(Failure::Input(format!("{}: no readable frames", a.mesh.display())));
    }
    let path = a.out.join("sequence.json");
    let mut json = serde_json::to_string_pretty(&record).map_err(|e| Failure::Input(e.to_string()))?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if invariant_errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(invariant_errors.join("\n")))
    }
}

fn cmd_loss(a: LossArgs) -> CmdResult {
    if !(a.lambda >= 0.0) {
        return Err(Failure::Input(format!("lambda must be non-negative, got {}", a.lambda)));
    }
    let gt = load_pair(&a.gt)?;
    let pred = load_pair(&a.pred)?;
    let l1 = l1_loss(&DepthBatch::from_pairs(&[&gt])?, &DepthBatch::from_pairs(&[&pred])?)?;
    let mut report = serde_json::Map::new();
    report.insert("l1".into(), l1.into());
    if let Some(path) = &a.scores {
        let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let s: ScoresFile = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let gan = gan_loss(&DiscriminatorScores::new(s.real, s.fake)?);
        report.insert("gan".into(), gan.into());
        report.insert("lambda".into(), a.lambda.into());
        report.insert("objective".into(), combined_objective(gan, l1, a.lambda).into());
    }
    println!("{}", serde_json::Value::Object(report));
    Ok(())
}

fn cmd_gen_meshes(a: GenMeshesArgs) -> CmdResult {
    fs::create_dir_all(&a.out).map_err(|e| Failure::Input(format!("{}: {e}", a.out.display())))?;
    let mut stdout = std::io::stdout().lock();
    for (i, pose) in humanoid_poses().iter().enumerate() {
        let path = a.out.join(format!("{i:02}_{}.ply", pose.name));
        write_mesh_ply(&path, &pose.mesh())?;
        // A closed pipe must not stop the remaining meshes from being written.
        let _ = writeln!(stdout, "{}", path.display());
    }
    Ok(())
}

fn configure_threads() {
    let Ok(value) = std::env::var("MOULDKIT_THREADS") else { return };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn(format!("MOULDKIT_THREADS ignored: {e}"));
            }
        }
        _ => warn(format!("MOULDKIT_THREADS={value:?} is not a positive integer; ignored")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::RenderGt(a) => cmd_render_gt(a),
        Command::Loss(a) => cmd_loss(a),
        Command::GenMeshes(a) => cmd_gen_meshes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: invariant violated: {msg}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}
