//! Run directory plumbing: atomic writes, config hashes, manifests and plots.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Short hex digest of a command name and its canonical JSON parameters.
pub fn config_hash<C: Serialize>(command: &str, config: &C) -> String {
    let body = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(format!("{command}\n{body}").as_bytes());
    hex::encode(&digest[..8])
}

/// Collects the files of one run and the time spent in each stage.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
    stages: Vec<(String, f64)>,
    clock: Instant,
}

impl RunDir {
    /// The directory is created on the first write.
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf(), outputs: Vec::new(), stages: Vec::new(), clock: Instant::now() }
    }

    /// Closes the current stage under `name`.
    pub fn stage(&mut self, name: &str) {
        self.stages.push((name.to_string(), self.clock.elapsed().as_secs_f64()));
        self.clock = Instant::now();
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place.
    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.root)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.root.join(name)).map_err(|e| e.error)?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> std::io::Result<()> {
        let mut body = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        body.push('\n');
        self.write(name, &body)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(mut self, command: &str, config_hash: &str, map_spec: Option<&str>) -> std::io::Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            map_spec: map_spec.map(str::to_string),
            versions: BTreeMap::from([("barylab-core", barylab::VERSION), ("barylab-cli", env!("CARGO_PKG_VERSION"))]),
            outputs: self.outputs.clone(),
            stage_seconds: self.stages.clone(),
        };
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub map_spec: Option<String>,
    pub versions: BTreeMap<&'static str, &'static str>,
    pub outputs: Vec<String>,
    pub stage_seconds: Vec<(String, f64)>,
}

/// CSV with the hash comment line, a header and 12 significant digits.
pub fn csv(config_hash: &str, columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = format!("# config_hash={config_hash}\n{}\n", columns.join(","));
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.11e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Log-scale line plot of the energy against the sweep index.
pub fn energy_svg(energies: &[f64]) -> String {
    let (width, height, pad) = (640.0, 400.0, 40.0);
    let logs: Vec<f64> = energies.iter().map(|e| e.max(1e-300).log10()).collect();
    let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(*y), hi.max(*y)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let steps = (logs.len().max(2) - 1) as f64;
    let points: Vec<String> = logs
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let px = pad + (width - 2.0 * pad) * k as f64 / steps;
            let py = height - pad - (height - 2.0 * pad) * (y - lo) / span;
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{p}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">log10 energy per sweep ({lo:.3} to {hi:.3})</text>\n",
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{pts}\"/>\n",
            "</svg>\n"
        ),
        w = width,
        h = height,
        p = pad,
        lo = lo,
        hi = hi,
        pts = points.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_stable() {
        let text = csv("ab", &["x".into(), "y".into()], &[vec![0.5, -2.0]]);
        assert_eq!(text, "# config_hash=ab\nx,y\n5.00000000000e-1,-2.00000000000e0\n");
    }

    #[test]
    fn svg_has_one_vertex_per_energy() {
        let svg = energy_svg(&[4.0, 2.0, 1.0]);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 3);
    }

    #[test]
    fn writes_are_listed_once() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = RunDir::new(&dir.path().join("nested"));
        run.write("a.csv", "1\n").unwrap();
        run.write("a.csv", "2\n").unwrap();
        run.finish("test", "00", None).unwrap();
        let root = dir.path().join("nested");
        assert_eq!(std::fs::read_to_string(root.join("a.csv")).unwrap(), "2\n");
        let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(root.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["outputs"], serde_json::json!(["a.csv"]));
    }
}
