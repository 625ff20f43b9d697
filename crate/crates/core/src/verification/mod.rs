//! Experiment drivers probing the quantitative estimates behind the
//! barycentric extension. Every suite is deterministic under a fixed seed and
//! runs in `f64`.

mod annulus;
mod compactness;
mod gravity;
mod lipschitz;
mod modulus;
mod radial;
mod trig;
mod volume;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::barycentric::{normalize, BarycenterError, ExtensionOptions};
use crate::boundary_maps::{parse_map_spec, MapError, SphereMap};
use crate::dirichlet::DirichletError;
use crate::hyperbolic::{BPoint, GeometryError};
use crate::linalg::{complement_frame, Vector};

pub use annulus::run_annulus_image;
pub use compactness::{run_compactness_demo, run_compactness_family};
pub use gravity::run_gravity;
pub use lipschitz::run_lipschitz;
pub use modulus::{annulus_construction, run_modulus_lemmas, AnnulusConstruction};
pub use radial::run_radial_qi;
pub use trig::run_trig;
pub use volume::run_volume_noncontraction;

#[derive(Debug, Error)]
pub enum VerificationError {
    #[error("unknown suite `{0}`; valid suites: lipschitz, volume, radial-qi, modulus, annulus-image, compactness, gravity, trig")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Barycenter(#[from] BarycenterError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lipschitz,
    Volume,
    RadialQi,
    Modulus,
    AnnulusImage,
    Compactness,
    Gravity,
    Trig,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Lipschitz,
        Suite::Volume,
        Suite::RadialQi,
        Suite::Modulus,
        Suite::AnnulusImage,
        Suite::Compactness,
        Suite::Gravity,
        Suite::Trig,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lipschitz => "lipschitz",
            Suite::Volume => "volume",
            Suite::RadialQi => "radial-qi",
            Suite::Modulus => "modulus",
            Suite::AnnulusImage => "annulus-image",
            Suite::Compactness => "compactness",
            Suite::Gravity => "gravity",
            Suite::Trig => "trig",
        }
    }
}

impl FromStr for Suite {
    type Err = VerificationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| VerificationError::UnknownSuite(s.to_string()))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters shared by the suites. Unset optional fields fall back to the
/// suite's own defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map_spec: Option<String>,
    pub n: usize,
    #[serde(rename = "quadrature_N", alias = "N")]
    pub quadrature_n: usize,
    /// Points, directions or trials, depending on the suite.
    pub samples: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub epsilon: f64,
    pub deltas: Option<Vec<f64>>,
    pub eta: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map_spec: None,
            n: 1,
            quadrature_n: 2048,
            samples: None,
            radii: None,
            epsilon: 0.1,
            deltas: None,
            eta: 0.5,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn radii_or(&self, default: &[f64]) -> Vec<f64> {
        self.radii.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn extension_options(&self) -> ExtensionOptions<f64> {
        ExtensionOptions::default().with_size(self.quadrature_n)
    }

    /// The configured map, or the suite defaults.
    fn maps(&self, defaults: &[&str]) -> Result<Vec<SphereMap<f64>>, VerificationError> {
        match &self.map_spec {
            Some(spec) => Ok(vec![parse_map_spec(spec, self.n)?]),
            None => defaults.iter().map(|spec| Ok(parse_map_spec(spec, self.n)?)).collect(),
        }
    }

    /// The configured maps post-composed so that their extensions fix `o`.
    fn normalized_maps(&self, defaults: &[&str]) -> Result<Vec<SphereMap<f64>>, VerificationError> {
        let opts = self.extension_options();
        self.maps(defaults)?.iter().map(|f| Ok(normalize(f, &opts)?.0)).collect()
    }

    fn require_sphere(&self, n: usize) -> Result<(), VerificationError> {
        if self.n == n {
            Ok(())
        } else {
            Err(VerificationError::Config(format!("n={n} required, got n={}", self.n)))
        }
    }

    /// Short hex digest of the suite name and the canonical JSON form.
    pub fn hash(&self, suite: Suite) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(format!("{suite}\n{body}").as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Named numeric columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Hash comment line, header row, then rows with 12 significant digits
    /// and LF line endings.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = format!("# config_hash={config_hash}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{x:.11e}").expect("writing to a string");
            }
            out.push('\n');
        }
        out
    }
}

/// One asserted property; `criterion` is the acceptance id it backs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub criterion: Option<u8>,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub suite: Suite,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub scalars: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Samples whose evaluation failed, with the error message.
    pub failures: Vec<String>,
    pub elapsed_seconds: f64,
}

impl ExperimentReport {
    fn new(suite: Suite, config: &ExperimentConfig) -> Self {
        Self {
            suite,
            config: config.clone(),
            config_hash: config.hash(suite),
            scalars: BTreeMap::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            failures: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    fn scalar(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    fn check(&mut self, criterion: Option<u8>, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { criterion, name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// `(file name, contents)` for every table.
    pub fn csv_files(&self) -> Vec<(String, String)> {
        self.tables
            .iter()
            .map(|t| (format!("{}_{}.csv", self.suite.name().replace('-', "_"), t.name), t.to_csv(&self.config_hash)))
            .collect()
    }
}

pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    let start = std::time::Instant::now();
    let mut report = match suite {
        Suite::Lipschitz => run_lipschitz(cfg),
        Suite::Volume => run_volume_noncontraction(cfg),
        Suite::RadialQi => run_radial_qi(cfg),
        Suite::Modulus => run_modulus_lemmas(cfg),
        Suite::AnnulusImage => run_annulus_image(cfg),
        Suite::Compactness => run_compactness_demo(cfg),
        Suite::Gravity => run_gravity(cfg),
        Suite::Trig => run_trig(cfg),
    }?;
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Point of the cap of radius `radius` about `center`, uniform in the angle
/// to the center and in the direction around it.
pub(crate) fn point_in_cap<R: Rng + ?Sized>(center: &BPoint<f64>, radius: f64, rng: &mut R) -> BPoint<f64> {
    let c = *center.as_vector();
    let frame = complement_frame(&c);
    let a = radius * rng.random::<f64>();
    let w = match frame.len() {
        1 => if rng.random::<bool>() { frame[0] } else { -frame[0] },
        _ => {
            let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            frame[0] * phi.cos() + frame[1] * phi.sin()
        }
    };
    BPoint::renormalized(c * a.cos() + w * a.sin())
}

/// Unit vectors in `R^dim` in antithetic pairs `(v, -v)`. On the circle the
/// pairs come from a jittered equal-angle grid.
pub fn sample_directions<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vector<f64>> {
    let half = count.div_ceil(2);
    let mut out = Vec::with_capacity(2 * half);
    for k in 0..half {
        let v = if dim == 2 {
            let t = std::f64::consts::PI * (k as f64 + rng.random::<f64>()) / half as f64;
            Vector::from_f64(&[t.cos(), t.sin()])
        } else {
            loop {
                let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                if let Some(v) = Vector::from_f64(&raw).normalized() {
                    break v;
                }
            }
        };
        out.push(v);
        out.push(-v);
    }
    out.truncate(count);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(VerificationError::UnknownSuite(_))));
    }

    #[test]
    fn config_hash_depends_on_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(Suite::Trig), b.hash(Suite::Trig));
        b.seed = 7;
        assert_ne!(a.hash(Suite::Trig), b.hash(Suite::Trig));
        assert_ne!(a.hash(Suite::Trig), a.hash(Suite::Gravity));
    }

    #[test]
    fn config_reads_flat_json() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"map_spec": "power:2", "N": 512, "seed": 3}"#).unwrap();
        assert_eq!(cfg.quadrature_n, 512);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.n, 1);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec![1.0, -0.125]);
        t.push(vec![1.0 / 3.0, 1e-20]);
        let csv = t.to_csv("abc");
        assert_eq!(csv, "# config_hash=abc\na,b\n1.00000000000e0,-1.25000000000e-1\n3.33333333333e-1,1.00000000000e-20\n");
    }

    #[test]
    fn directions_come_in_antipodal_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for dim in [2, 3] {
            let dirs = sample_directions(dim, 100, &mut rng);
            assert_eq!(dirs.len(), 100);
            let mean = dirs.iter().fold(Vector::zeros(dim), |acc, v| acc + *v);
            assert!(mean.norm() < 1e-12);
            assert!(dirs.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        }
    }
}
