//! Apex angles of random hyperbolic triangles against `4 exp(-(b + c - a) / 4)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::dirichlet::{angle_bound, triangle_angle};
use crate::hyperbolic::{dist, log_map, HPoint};
use crate::linalg::Vector;

const MIN_SIDE: f64 = 0.1;
const MAX_RADIUS: f64 = 6.0;

fn angle_between(u: &Vector<f64>, v: &Vector<f64>) -> f64 {
    let (u, v) = (u.normalized().unwrap_or(*u), v.normalized().unwrap_or(*v));
    2.0 * ((u - v).norm()).atan2((u + v).norm())
}

/// Triangles with vertices uniform in hyperbolic radius up to 6 in
/// dimensions 2 and 3, rejecting sides shorter than 0.1. The apex angle is
/// measured between the initial vectors of the two sides at `p1`.
pub fn run_trig(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    let mut report = ExperimentReport::new(Suite::Trig, cfg);
    let trials = cfg.samples_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new("triangles", &["dim", "a", "b", "c", "angle", "law_of_cosines", "bound"]);
    let (mut violations, mut rejected) = (0usize, 0usize);
    let mut worst_oracle = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for trial in 0..trials {
        let dim = 2 + trial % 2;
        let (p1, p2, p3, a, b, c) = loop {
            let [p1, p2, p3] = [(); 3].map(|_| HPoint::random(dim, MAX_RADIUS, &mut rng));
            let (a, b, c) = (dist(&p2, &p3), dist(&p3, &p1), dist(&p1, &p2));
            if a.min(b).min(c) >= MIN_SIDE {
                break (p1, p2, p3, a, b, c);
            }
            rejected += 1;
        };
        let angle = angle_between(&log_map(&p1, &p2).0, &log_map(&p1, &p3).0);
        let cosines = triangle_angle(a, b, c);
        let bound = angle_bound(a, b, c);
        worst_oracle = worst_oracle.max((angle - cosines).abs());
        worst_ratio = worst_ratio.max(angle / bound);
        if angle > bound {
            violations += 1;
        }
        table.push(vec![dim as f64, a, b, c, angle, cosines, bound]);
    }
    report.scalar("violations", violations as f64);
    report.scalar("rejected", rejected as f64);
    report.scalar("max_angle_over_bound", worst_ratio);
    report.scalar("max_law_of_cosines_error", worst_oracle);
    report.check(Some(6), "apex angle below the bound", violations == 0, format!("{violations} violations in {trials} triangles"));
    report.check(Some(6), "measured angle matches the law of cosines", worst_oracle <= 1e-6, format!("max error {worst_oracle:.3e}"));
    report.tables.push(table);
    Ok(report)
}
