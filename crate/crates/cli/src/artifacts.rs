//! Run directories: CSV and JSON artifacts, binary grids with JSON sidecars,
//! and a manifest.

use cornerlab::forward::FarField;
use cornerlab::grid::Grid2;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub struct RunDir {
    pub path: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    /// `base/<first 16 hex digits of the config hash>`.
    pub fn create(base: &Path, hash: &str) -> io::Result<Self> {
        let path = base.join(&hash[..16]);
        fs::create_dir_all(&path)?;
        Ok(Self { path, files: Vec::new() })
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.path.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> io::Result<()> {
        let p = self.record(name);
        fs::write(p, text)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(io::Error::other)?;
        s.push('\n');
        self.write_text(name, &s)
    }

    /// `angle,re,im` rows.
    pub fn write_far_field(&mut self, name: &str, ff: &FarField) -> io::Result<()> {
        let mut s = String::from("angle,re,im\n");
        for (t, v) in ff.angles.iter().zip(&ff.values) {
            s.push_str(&format!("{t:?},{:?},{:?}\n", v.re, v.im));
        }
        self.write_text(name, &s)
    }

    /// Little-endian `(re, im)` f64 pairs in grid order, plus `<stem>.json`.
    pub fn write_grid(&mut self, stem: &str, grid: &Grid2, data: &[Complex64], quantity: &str) -> io::Result<()> {
        let mut bytes = Vec::with_capacity(16 * data.len());
        for v in data {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        let p = self.record(&format!("{stem}.bin"));
        fs::write(p, bytes)?;
        let sidecar = json!({
            "quantity": quantity,
            "dtype": "complex128",
            "byte_order": "little",
            "shape": [grid.n, grid.n],
            "index": "iy * n + ix",
            "origin": grid.origin,
            "spacing": grid.h(),
            "side": grid.side,
        });
        self.write_json(&format!("{stem}.json"), &sidecar)
    }

    /// Writes `manifest.json`; the timestamp and wall time live only here.
    pub fn finish(mut self, command: &str, hash: &str, config: &Value, passed: bool, wall: f64, extra: Value) -> io::Result<PathBuf> {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut files = self.files.clone();
        files.sort();
        let manifest = json!({
            "command": command,
            "config_hash": hash,
            "config": config,
            "versions": {
                "cornerlab": cornerlab::VERSION,
                "cornerlab-cli": env!("CARGO_PKG_VERSION"),
            },
            "passed": passed,
            "artifacts": files,
            "timestamp_unix": ts,
            "wall_time_seconds": wall,
            "details": extra,
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(self.path)
    }
}
