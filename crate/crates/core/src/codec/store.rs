//! On-disk layout of a pair: `<stem>.vis.pfm`, `<stem>.hid.pfm` and the
//! JSON sidecar `<stem>.mould.json`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pfm::{read_pfm, write_pfm};
use super::MouldPair;
use crate::error::{Error, Result};
use crate::geometry::camera::{pose_from_row_major, pose_to_row_major, Camera};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub z_orig: f64,
    #[serde(rename = "L")]
    pub background: f64,
    pub epsilon: f64,
    pub width: usize,
    pub height: usize,
    pub sensor_width_mm: f64,
    pub focal_length_mm: f64,
    /// World → camera, row-major 4×4.
    pub camera_pose: Vec<f64>,
    /// Center of the crop window on the sensor plane.
    #[serde(default)]
    pub sensor_offset_mm: [f64; 2],
}

pub struct PairPaths {
    pub vis: PathBuf,
    pub hid: PathBuf,
    pub sidecar: PathBuf,
}

pub fn pair_paths(stem: impl AsRef<Path>) -> PairPaths {
    let with = |suffix: &str| {
        let mut s: OsString = stem.as_ref().as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    PairPaths {
        vis: with(".vis.pfm"),
        hid: with(".hid.pfm"),
        sidecar: with(".mould.json"),
    }
}

impl Sidecar {
    pub fn of(pair: &MouldPair) -> Self {
        let cam = &pair.camera;
        Sidecar {
            z_orig: pair.z_orig,
            background: pair.background,
            epsilon: pair.epsilon,
            width: cam.width(),
            height: cam.height(),
            sensor_width_mm: cam.sensor_width_mm(),
            focal_length_mm: cam.focal_length_mm(),
            camera_pose: pose_to_row_major(cam.pose()).to_vec(),
            sensor_offset_mm: cam.sensor_offset_mm(),
        }
    }

    pub fn camera(&self) -> Result<Camera> {
        Ok(Camera::new(self.width, self.height, self.sensor_width_mm, self.focal_length_mm)?
            .with_pose(pose_from_row_major(&self.camera_pose)?)
            .with_sensor_offset(self.sensor_offset_mm))
    }
}

pub fn save_pair(pair: &MouldPair, stem: impl AsRef<Path>) -> Result<()> {
    let paths = pair_paths(stem);
    let n = pair.resolution;
    let to_f32 = |m: &[f64]| m.iter().map(|&z| z as f32).collect::<Vec<f32>>();
    write_pfm(&paths.vis, n, n, &to_f32(&pair.z_vis))?;
    write_pfm(&paths.hid, n, n, &to_f32(&pair.z_hid))?;
    let mut json = serde_json::to_string_pretty(&Sidecar::of(pair)).expect("sidecar serializes");
    json.push('\n');
    fs::write(&paths.sidecar, json).map_err(|e| Error::io(&paths.sidecar, e))
}

pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Sidecar> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a pair. Pixels stored as the single-precision background value
/// are restored to the exact `L` of the sidecar.
pub fn load_pair(stem: impl AsRef<Path>) -> Result<MouldPair> {
    let paths = pair_paths(stem);
    let meta = load_sidecar(&paths.sidecar)?;
    if meta.width != meta.height {
        return Err(Error::malformed(&paths.sidecar, "pair must be square"));
    }
    let camera = meta.camera()?;
    let bg32 = meta.background as f32;
    let mut maps = Vec::with_capacity(2);
    for p in [&paths.vis, &paths.hid] {
        let (w, h, data) = read_pfm(p)?;
        if (w, h) != (meta.width, meta.height) {
            return Err(Error::malformed(
                p,
                format!("image is {w}x{h} but the sidecar says {}x{}", meta.width, meta.height),
            ));
        }
        maps.push(
            data.into_iter()
                .map(|z| if z == bg32 { meta.background } else { z as f64 })
                .collect::<Vec<f64>>(),
        );
    }
    let z_hid = maps.pop().unwrap();
    let z_vis = maps.pop().unwrap();
    Ok(MouldPair {
        resolution: meta.width,
        z_vis,
        z_hid,
        z_orig: meta.z_orig,
        background: meta.background,
        epsilon: meta.epsilon,
        camera,
        warnings: Vec::new(),
    })
}
