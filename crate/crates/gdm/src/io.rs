//! Output files and the run manifest.
//!
//! All numeric text uses Rust's default float formatting: shortest
//! round-trip decimal with a dot separator, independent of locale, so a
//! rerun with the same seed reproduces every file byte for byte. The only
//! run-dependent values are the wall-time fields of the manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gdm_core::observables::{KdeGrid, MomentSeries};
use gdm_core::pde::NormEntry;
use gdm_core::sim::{EventRecord, RecordKind, Snapshot};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Writes via a temporary sibling plus rename, so a crash never leaves a
/// half-written file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    /// Wall-clock bounds (seconds since the epoch); the one part of a run
    /// directory that is not reproducible.
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    /// Run-kind specifics: counters, stop cause, iteration counts.
    pub extra: serde_json::Map<String, Value>,
}

impl RunManifest {
    pub fn new(config_bytes: &[u8], master_seed: u64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_bytes),
            master_seed,
            started_unix: unix_now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
            extra: serde_json::Map::new(),
        }
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.extra.insert(key.to_string(), value);
    }
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// An output directory in the making. Every file goes through [`Outputs::write`]
/// so the manifest's file list is complete by construction; [`Outputs::finish`]
/// stamps the end time and writes the manifest last, atomically.
pub struct Outputs {
    root: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    /// Creates (or reuses) the directory. A directory that already holds a
    /// manifest is a completed run and is only overwritten with `force`.
    pub fn create(root: &Path, force: bool) -> Result<Outputs, String> {
        let manifest = root.join("manifest.json");
        if manifest.exists() && !force {
            return Err(format!(
                "{} already holds a completed run; pass --force to overwrite",
                root.display()
            ));
        }
        fs::create_dir_all(root).map_err(|e| format!("cannot create {}: {e}", root.display()))?;
        Ok(Outputs { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> io::Result<()> {
        manifest.outputs = self.written;
        manifest.finished_unix = unix_now();
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&self.root.join("manifest.json"), &bytes)
    }
}

/// `t,n_p,n_s,mass_p,mass_s`: raw counts plus the 1/K-weighted masses.
pub fn moments_csv(m: &MomentSeries) -> String {
    let mut out = String::from("t,n_p,n_s,mass_p,mass_s\n");
    for ((&t, &p), &s) in m.times.iter().zip(&m.n_p).zip(&m.n_s) {
        let mp = p as f64 * m.weight;
        let ms = s as f64 * m.weight;
        out.push_str(&format!("{t},{p},{s},{mp},{ms}\n"));
    }
    out
}

fn push_point(out: &mut String, p: [f64; 2], dimension: usize) {
    for c in &p[..dimension] {
        out.push_str(&format!(",{c}"));
    }
}

/// One row per event. `x` is the parent plant (releases) or seed origin;
/// `y` is the barycenter, maturation position, or boundary exit point.
pub fn events_csv(events: &[EventRecord], dimension: usize) -> String {
    let mut out = String::from("t,kind,index,kappa");
    for axis in ["x", "y"] {
        for i in 0..dimension {
            out.push_str(&format!(",{axis}{i}"));
        }
    }
    out.push('\n');
    for e in events {
        let kind = match e.kind {
            RecordKind::Release => "release",
            RecordKind::Maturation => "maturation",
            RecordKind::Kill => "kill",
        };
        out.push_str(&format!("{},{kind},{},{}", e.t, e.index, e.kappa));
        push_point(&mut out, e.x, dimension);
        push_point(&mut out, e.y, dimension);
        out.push('\n');
    }
    out
}

fn coords(p: [f64; 2], dimension: usize) -> Value {
    Value::Array(p[..dimension].iter().map(|&c| json!(c)).collect())
}

pub fn snapshots_json(snapshots: &[Snapshot], dimension: usize) -> Value {
    Value::Array(
        snapshots
            .iter()
            .map(|s| {
                json!({
                    "t": s.t,
                    "plants": s.plants.iter().map(|&p| coords(p, dimension)).collect::<Vec<_>>(),
                    "seeds": s
                        .seeds
                        .iter()
                        .map(|seed| {
                            json!({
                                "origin": coords(seed.origin, dimension),
                                "position": coords(seed.position, dimension),
                            })
                        })
                        .collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

/// Row-major matrix, one line per row.
pub fn matrix_csv(values: &[f64], rows: usize, cols: usize) -> String {
    assert_eq!(values.len(), rows * cols);
    let mut out = String::new();
    for r in 0..rows {
        for (c, v) in values[r * cols..(r + 1) * cols].iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn norms_csv(entries: &[NormEntry]) -> String {
    let mut out = String::from("t,l2_f,l2_g,h1_f,h1_g,bound_f,bound_g\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.t, e.l2_f, e.l2_g, e.h1_f, e.h1_g, e.bound_f, e.bound_g
        ));
    }
    out
}

pub fn kde_csv(kde: &KdeGrid) -> String {
    matrix_csv(&kde.values, kde.grid.cells[0], kde.grid.cells[1])
}

pub fn kde_meta_json(kde: &KdeGrid, points: usize) -> Value {
    let g = &kde.grid;
    json!({
        "lower": [g.lower[0], g.lower[1]],
        "upper": [g.upper[0], g.upper[1]],
        "cells": [g.cells[0], g.cells[1]],
        "bandwidth": [kde.bandwidth[0], kde.bandwidth[1]],
        "points": points,
        "cell_area": g.cell_area(),
    })
}

pub fn to_pretty_bytes(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json serializes");
    bytes.push(b'\n');
    bytes
}
