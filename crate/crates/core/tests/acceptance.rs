//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so every criterion is evaluated and reported even
//! when an earlier one fails. The process exits non-zero on a failing
//! criterion only when `MOULDKIT_ACCEPTANCE_STRICT=1`; the report itself is
//! authoritative either way.

mod common;

use std::time::Instant;

use mouldkit::codec::store::{load_pair, pair_paths, save_pair};
use mouldkit::geometry::camera::front_view_pose;
use mouldkit::geometry::scene::{MeshScene, Sphere};
use mouldkit::losses::{combined_objective, gan_loss, l1_gradient, l1_loss, DepthBatch, DiscriminatorScores, DEFAULT_LAMBDA};
use mouldkit::metrics::floor::{hidden_fraction, two_hit_floor};
use mouldkit::metrics::sweep::{measure_all, sweep_camera, Representation, SweepConfig, SweepReport};
use mouldkit::metrics::{chamfer, depth_accuracy};
use mouldkit::shapes::{box_mesh, humanoid_poses, uv_sphere, HumanoidPose, LimbPose};
use mouldkit::voxel::{bounding_cube, voxelize_surface};
use mouldkit::{decode, encode, Bvh, EncodeWarning, Camera, Mesh, MouldPair, PointCloud, Ray, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const MOULD_NS: [usize; 4] = [32, 64, 128, 256];
const FLOOR_TOLERANCE: f64 = 0.05;
const SELF_OCCLUDING: f64 = 0.02;
const SWEEP_BUDGET_S: f64 = 300.0;
const SPHERE_FOOTPRINT_M: f64 = 4.2e-3;
const FOOTPRINT_TOLERANCE: f64 = 0.20;
const SPHERE_SURFACE_TOL: f64 = 1e-6;
const SPHERE_BUDGET_S: f64 = 2.0;

struct Report {
    failures: usize,
}

impl Report {
    fn detail(&self, text: impl AsRef<str>) {
        println!("      {}", text.as_ref());
    }

    fn criterion(&mut self, id: u32, title: &str, pass: bool) {
        if !pass {
            self.failures += 1;
        }
        println!("[{}] criterion {id}: {title}", if pass { "PASS" } else { "FAIL" });
    }
}

fn default_frame() -> Camera {
    Camera::new(320, 240, 32.0, 60.0).unwrap()
}

fn world_cloud(pair: &MouldPair) -> PointCloud {
    let cloud = decode(pair, pair.epsilon).unwrap();
    PointCloud::from_points(cloud.points.iter().map(|p| pair.camera.to_world(p)).collect())
}

fn criterion_1(r: &mut Report) {
    let poses = humanoid_poses();
    let meshes: Vec<Mesh> = poses.iter().map(HumanoidPose::mesh).collect();
    let config = SweepConfig::default();
    let frame = default_frame();

    let start = Instant::now();
    let measurements = measure_all(&meshes, &frame, &config).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let report = SweepReport::from_measurements(&measurements, meshes.len());

    r.detail(format!("{} articulated meshes, ground truth {:?}", meshes.len(), config.ground_truth));
    let mut lower_everywhere = true;
    for (m, v) in report.matched_pairs() {
        let v = v.expect("matched voxel row");
        let ok = m.chamfer_m < v.chamfer_m;
        lower_everywhere &= ok;
        r.detail(format!(
            "D {:>6} vs {:>6}: mould N={:<3} {:.3} mm  voxel N={:<2} {:.3} mm  {}",
            m.dimensionality,
            v.dimensionality,
            m.n,
            m.chamfer_m * 1e3,
            v.n,
            v.chamfer_m * 1e3,
            if ok { "ok" } else { "NOT LOWER" }
        ));
    }

    let top = *MOULD_NS.last().unwrap();
    let mut positive = true;
    let mut near_floor = true;
    let mut occluding = 0;
    for (i, mesh) in meshes.iter().enumerate() {
        let scene = MeshScene::new(mesh.clone());
        let camera = sweep_camera(mesh, &frame, &config);
        let hidden = hidden_fraction(&scene, &camera, 50_000, 77).unwrap();
        if hidden < SELF_OCCLUDING {
            continue;
        }
        occluding += 1;
        let gt = config.ground_truth.cloud(mesh, config.seed.wrapping_add(i as u64)).unwrap();
        let floor = two_hit_floor(&scene, &camera, &gt, 1_000_000, 1000 + i as u64, config.mode).unwrap();
        let err = measurements
            .iter()
            .find(|m| m.mesh == i && m.representation == Representation::Mould && m.n == top)
            .unwrap()
            .chamfer_m;
        let ratio = err / floor;
        positive &= err > 0.0;
        near_floor &= (ratio - 1.0).abs() <= FLOOR_TOLERANCE;
        r.detail(format!(
            "{:<14} hidden {:>5.1}%  N={top} {:.3} mm  floor {:.3} mm  ratio {:.3}",
            poses[i].name,
            hidden * 100.0,
            err * 1e3,
            floor * 1e3,
            ratio
        ));
        if poses[i].name == "arms_crossed" {
            // Beyond the sweep: shows the error still closing on the floor.
            let beyond: Vec<String> = [512, 1024]
                .iter()
                .map(|&n| {
                    let pair = encode(&scene, &camera, config.background, n).unwrap();
                    let e = chamfer(&gt, &world_cloud(&pair)).unwrap();
                    format!("N={n} ratio {:.3}", e / floor)
                })
                .collect();
            r.detail(format!("{:<14} {}", "", beyond.join("  ")));
        }
    }
    r.detail(format!("mould strictly lower at every matched D: {lower_everywhere}"));
    r.detail(format!("N={top} error > 0 on {occluding} self-occluding meshes: {positive}"));
    r.detail(format!("N={top} error within {:.0}% of the two-hit floor: {near_floor}", FLOOR_TOLERANCE * 100.0));
    r.detail(format!(
        "sweep runtime {elapsed:.1} s on {} thread(s) (budget {SWEEP_BUDGET_S} s)",
        rayon::current_num_threads()
    ));
    let pass = lower_everywhere && occluding > 0 && positive && near_floor && elapsed < SWEEP_BUDGET_S;
    r.criterion(1, "matched-D sweep, plateau and two-hit floor", pass);
}

fn uniform_sphere_samples(sphere: &Sphere, count: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::from_points(
        (0..count)
            .map(|_| sphere.center + common::random_direction(&mut rng) * sphere.radius)
            .collect(),
    )
}

fn criterion_2(r: &mut Report) {
    let sphere = Sphere::new(Vec3::zeros(), 0.5);
    let camera = default_frame().with_pose(front_view_pose(&sphere.center, 8.0));

    let start = Instant::now();
    let pair = encode(&sphere, &camera, 1.5, 256).unwrap();
    let cloud = world_cloud(&pair);
    let elapsed = start.elapsed().as_secs_f64();

    let footprint = pair.pixel_footprint();
    let gt = uniform_sphere_samples(&sphere, 30_000, 5);
    let error = chamfer(&gt, &cloud).unwrap();
    let worst = cloud.points.iter().map(|p| sphere.distance_to_surface(p)).fold(0.0, f64::max);

    let footprint_ok = (footprint / SPHERE_FOOTPRINT_M - 1.0).abs() <= FOOTPRINT_TOLERANCE;
    let error_ok = error <= footprint * (1.0 + FOOTPRINT_TOLERANCE);
    r.detail(format!("pixel footprint {:.3} mm (expected {:.1} mm ±20%)", footprint * 1e3, SPHERE_FOOTPRINT_M * 1e3));
    r.detail(format!("symmetric Chamfer {:.3} mm over {} decoded points", error * 1e3, cloud.len()));
    r.detail(format!("max distance to the analytic surface {worst:.2e} m (limit {SPHERE_SURFACE_TOL:.0e})"));
    r.detail(format!("encode + decode {elapsed:.3} s (budget {SPHERE_BUDGET_S} s)"));
    let pass = footprint_ok && error_ok && worst <= SPHERE_SURFACE_TOL && elapsed < SPHERE_BUDGET_S;
    r.criterion(2, "sphere round-trip fidelity at N=256", pass);
}

fn brute_force_occupancy(mesh: &Mesh, n: usize) -> Vec<bool> {
    let (origin, edge) = bounding_cube(mesh);
    let h = edge / n as f64;
    let cells: Vec<Vec<usize>> = (0..mesh.triangle_count())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            let mut hit = Vec::new();
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let lo = origin + Vec3::new(i as f64, j as f64, k as f64) * h;
                        if common::triangle_meets_box(&tri, &lo, &(lo + Vec3::repeat(h))) {
                            hit.push((k * n + j) * n + i);
                        }
                    }
                }
            }
            hit
        })
        .collect();
    let mut occ = vec![false; n * n * n];
    for c in cells.into_iter().flatten() {
        occ[c] = true;
    }
    occ
}

fn criterion_3(r: &mut Report) {
    let meshes = [
        ("sphere", uv_sphere(Vec3::new(0.1, 0.9, -0.2), 0.5, 48, 24)),
        ("humanoid", humanoid_poses()[3].mesh()),
        ("humanoid x4", humanoid_poses()[6].mesh().subdivided()),
    ];
    let mut bvh_ok = true;
    for (k, (name, mesh)) in meshes.iter().enumerate() {
        let bvh = Bvh::build(mesh);
        let rays = common::random_rays(mesh, 10_000, 40 + k as u64);
        let (mismatches, hits, worst) = rays
            .par_iter()
            .map(|(origin, direction)| {
                let ray = Ray { origin: *origin, direction: *direction };
                let got = (bvh.closest(mesh, &ray).map(|h| h.distance), bvh.farthest(mesh, &ray).map(|h| h.distance));
                let crossings = common::all_crossings(mesh, origin, direction);
                let want = (crossings.first().map(|c| c.0), crossings.last().map(|c| c.0));
                match (got, want) {
                    ((Some(a), Some(b)), (Some(c), Some(d))) => {
                        let dev = (a - c).abs().max((b - d).abs());
                        ((dev > 1e-9) as usize, 1usize, dev)
                    }
                    ((None, None), (None, None)) => (0, 0, 0.0),
                    _ => (1, 0, f64::INFINITY),
                }
            })
            .reduce(|| (0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));
        bvh_ok &= mismatches == 0;
        r.detail(format!(
            "BVH {name:<12} {:>6} tris: {hits} hits / 10000 rays, {mismatches} mismatches, max deviation {worst:.1e} m",
            mesh.triangle_count()
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut cloud = |n: usize| PointCloud::from_points((0..n).map(|_| Vec3::new(rng.random(), rng.random(), rng.random())).collect());
    let mut chamfer_dev: f64 = 0.0;
    for _ in 0..5 {
        let (a, b) = (cloud(500), cloud(500));
        chamfer_dev = chamfer_dev.max((chamfer(&a, &b).unwrap() - common::chamfer(&a.points, &b.points, false)).abs());
    }
    let chamfer_ok = chamfer_dev <= 1e-12;
    r.detail(format!("Chamfer vs O(n^2) on 500-point clouds: max deviation {chamfer_dev:.1e}"));

    let mut voxel_ok = true;
    for (name, mesh) in [("sphere", &meshes[0].1), ("humanoid", &meshes[1].1)] {
        let grid = voxelize_surface(mesh, 32).unwrap();
        let want = brute_force_occupancy(mesh, 32);
        let mut diff = 0;
        for k in 0..32 {
            for j in 0..32 {
                for i in 0..32 {
                    diff += (grid.is_occupied(i, j, k) != want[(k * 32 + j) * 32 + i]) as usize;
                }
            }
        }
        voxel_ok &= diff == 0;
        r.detail(format!("voxel N=32 {name}: {} occupied, {diff} cells differ from the clipping oracle", grid.occupied_count()));
    }
    r.criterion(3, "oracle equivalence (BVH, Chamfer, voxelization)", bvh_ok && chamfer_ok && voxel_ok);
}

fn criterion_4(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut batch = |b: usize, n: usize| {
        let data = (0..b * 2 * n * n).map(|_| rng.random_range(-1.0..1.5)).collect();
        DepthBatch::new(b, n, data).unwrap()
    };
    let mut l1_dev: f64 = 0.0;
    let mut grad_dev: f64 = 0.0;
    for _ in 0..10 {
        let (gt, pred) = (batch(2, 8), batch(2, 8));
        l1_dev = l1_dev.max((l1_loss(&gt, &pred).unwrap() - common::l1(gt.values(), pred.values())).abs());
        let grad = l1_gradient(&gt, &pred).unwrap();
        for i in (0..pred.len()).step_by(7) {
            let eval = |delta: f64| {
                let mut v = pred.values().to_vec();
                v[i] += delta;
                l1_loss(&gt, &DepthBatch::new(2, 8, v).unwrap()).unwrap()
            };
            let fd = (eval(1e-5) - eval(-1e-5)) / 2e-5;
            grad_dev = grad_dev.max((fd - grad[i]).abs() / grad[i].abs());
        }
    }
    let mut gan_dev: f64 = 0.0;
    let mut srng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let real: Vec<f64> = (0..12).map(|_| srng.random_range(0.0..=1.0)).collect();
        let fake: Vec<f64> = (0..12).map(|_| srng.random_range(0.0..=1.0)).collect();
        let got = gan_loss(&DiscriminatorScores::new(real.clone(), fake.clone()).unwrap());
        gan_dev = gan_dev.max((got - common::gan(&real, &fake)).abs());
    }
    let half = gan_loss(&DiscriminatorScores::new(vec![0.5; 16], vec![0.5; 16]).unwrap());
    let half_dev = (half + 2.0 * 2f64.ln()).abs();
    let affine = [(half, 0.0123), (-0.7, 0.5), (0.0, 1e-8)]
        .iter()
        .all(|&(g, l)| combined_objective(g, l, DEFAULT_LAMBDA) == g + 1e4 * l);

    r.detail(format!("l1 vs scalar oracle: {l1_dev:.1e}; gan vs scalar oracle: {gan_dev:.1e}"));
    r.detail(format!("gan(all 0.5) + 2 ln 2 = {half_dev:.1e}; combined objective exact at lambda=1e4: {affine}"));
    r.detail(format!("l1 gradient vs central differences: max relative error {grad_dev:.1e}"));
    let pass = l1_dev <= 1e-12 && gan_dev <= 1e-12 && half_dev <= 1e-9 && affine && grad_dev <= 1e-6;
    r.criterion(4, "loss correctness", pass);
}

fn criterion_5(r: &mut Report) {
    let mesh = humanoid_poses()[0].mesh();
    let camera = default_frame().with_pose(front_view_pose(&mesh.centroid(), 8.0));
    let gt = encode(&MeshScene::new(mesh), &camera, 1.5, 128).unwrap();
    let thr = gt.threshold(gt.epsilon);
    let mut pred = gt.clone();
    for z in pred.z_vis.iter_mut().chain(pred.z_hid.iter_mut()) {
        if *z <= thr {
            *z += 0.040;
        }
    }
    let a30 = depth_accuracy(&gt, &pred, 0.030).unwrap();
    let a50 = depth_accuracy(&gt, &pred, 0.050).unwrap();
    r.detail(format!("40 mm offset: {:.2}% @30 mm, {:.2}% @50 mm", a30.overall, a50.overall));
    let pass = [a30.overall, a30.visible, a30.hidden] == [0.0; 3] && [a50.overall, a50.visible, a50.hidden] == [100.0; 3];
    r.criterion(5, "depth-accuracy protocol", pass);
}

fn random_subject(rng: &mut ChaCha8Rng) -> Mesh {
    let limb = |rng: &mut ChaCha8Rng| {
        LimbPose::new(
            (rng.random_range(-30.0..90.0), rng.random_range(-90.0..90.0)),
            (rng.random_range(-20.0..40.0), rng.random_range(0.0..120.0)),
        )
    };
    match rng.random_range(0..3) {
        0 => {
            let c = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(0.0..1.5), rng.random_range(-0.5..0.5));
            uv_sphere(c, rng.random_range(0.1..0.8), 32, 16)
        }
        1 => {
            let lo = Vec3::new(rng.random_range(-1.0..0.0), rng.random_range(-1.0..0.0), rng.random_range(-1.0..0.0));
            let size = Vec3::new(rng.random_range(0.05..1.0), rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
            box_mesh(lo, lo + size)
        }
        _ => {
            let mut pose = HumanoidPose::standing("random");
            pose.left_arm = limb(rng);
            pose.right_arm = limb(rng);
            pose.left_leg = limb(rng);
            pose.right_leg = limb(rng);
            pose.yaw_deg = rng.random_range(0.0..360.0);
            pose.lean_deg = rng.random_range(-15.0..30.0);
            pose.scale = rng.random_range(0.6..1.2);
            pose.mesh()
        }
    }
}

fn criterion_6(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut violations = 0;
    let (mut redrawn, mut unflagged_deep) = (0, 0);
    for run in 0..100 {
        // Subjects deeper than L lie outside the encodable domain and are
        // flagged rather than clamped; they are redrawn here.
        let pair = loop {
            let mesh = random_subject(&mut rng);
            let n = rng.random_range(8..=96);
            let background = rng.random_range(0.5..3.0);
            let distance = rng.random_range(3.0..12.0);
            let aim = mesh.centroid() + Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 0.0);
            let camera = default_frame().with_pose(front_view_pose(&aim, distance));
            let pair = encode(&MeshScene::new(mesh), &camera, background, n).unwrap();
            if !pair.has_warning(EncodeWarning::DepthBeyondBackground) {
                break pair;
            }
            redrawn += 1;
            if pair.invariant_violations().is_empty() {
                unflagged_deep += 1;
            }
        };
        let stem = dir.path().join(format!("run{run}"));
        save_pair(&pair, &stem).unwrap();
        let stored = load_pair(&stem).unwrap();
        for (label, v) in [("memory", pair.invariant_violations()), ("stored", stored.invariant_violations())] {
            if !v.is_empty() {
                violations += 1;
                r.detail(format!("run {run} ({label}) {:?}: {}", pair.warnings, v.join("; ")));
            }
        }
    }
    r.detail(format!(
        "{redrawn} draws deeper than L redrawn; {} of them flagged with matching invariant violations",
        redrawn - unflagged_deep
    ));
    r.detail(format!("100 randomized encodes: {violations} invariant violations"));

    let meshes: Vec<Mesh> = humanoid_poses().iter().take(3).map(HumanoidPose::mesh).collect();
    let config = SweepConfig {
        mould_resolutions: vec![16, 32],
        voxel_resolutions: vec![10, 13],
        seed: 21,
        ..SweepConfig::default()
    };
    let csv = |_: u8| {
        SweepReport::from_measurements(&measure_all(&meshes, &default_frame(), &config).unwrap(), meshes.len()).to_csv(false)
    };
    let csv_same = csv(0) == csv(1);

    let pfm = |tag: &str| {
        let mesh = humanoid_poses()[5].mesh();
        let camera = default_frame().with_pose(front_view_pose(&mesh.centroid(), 8.0));
        let stem = dir.path().join(tag);
        save_pair(&encode(&MeshScene::new(mesh), &camera, 1.5, 64).unwrap(), &stem).unwrap();
        let p = pair_paths(&stem);
        [std::fs::read(p.vis).unwrap(), std::fs::read(p.hid).unwrap(), std::fs::read(p.sidecar).unwrap()]
    };
    let pfm_same = pfm("a") == pfm("b");
    r.detail(format!("byte-identical sweep CSV: {csv_same}; byte-identical PFM and sidecar: {pfm_same}"));
    r.criterion(6, "invariants and determinism", violations == 0 && csv_same && pfm_same);
}

fn main() {
    // `cargo test` passes harness flags; only a name filter is meaningful here.
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut report = Report { failures: 0 };
    let criteria: [(u32, fn(&mut Report)); 6] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
    ];
    let total = Instant::now();
    for (id, run) in criteria {
        if filter.as_deref().is_some_and(|f| !id.to_string().contains(f)) {
            continue;
        }
        let start = Instant::now();
        run(&mut report);
        println!("      ({:.1} s)", start.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {} failing criteria ({:.1} s)",
        report.failures,
        total.elapsed().as_secs_f64()
    );
    let strict = std::env::var("MOULDKIT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && report.failures > 0 {
        std::process::exit(1);
    }
}
