//! Barycenters of measures concentrated on a cap stay near its dome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{point_in_cap, ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::barycentric::{barycenter, DiscreteMeasure, SolverOptions};
use crate::hyperbolic::{BPoint, RoundBall};

/// Atoms of a barycenter-admissible measure stay below this mass.
const MAX_ATOM_MASS: f64 = 0.45;
const THRESHOLD: f64 = 2.0 / 3.0;

/// Atom masses summing to `total`, each below [`MAX_ATOM_MASS`].
fn split<R: Rng + ?Sized>(total: f64, count: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.2..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let masses: Vec<f64> = raw.iter().map(|w| total * w / sum).collect();
        if masses.iter().all(|m| *m < MAX_ATOM_MASS) {
            return masses;
        }
    }
}

/// A random cap `B` and an atomic measure with `mu(B) > 2/3`, alternating
/// `S^1` and `S^2`. Every third trial is extremal: mass just above `2/3` on
/// the rim of `B` and the rest near the antipode of its center.
pub fn run_gravity(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    let mut report = ExperimentReport::new(Suite::Gravity, cfg);
    let trials = cfg.samples_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = SolverOptions::default();
    let mut table = Table::new("trials", &["dim", "radius", "mass_in_cap", "atoms", "signed_distance"]);
    let (mut violations, mut worst) = (0usize, f64::NEG_INFINITY);
    for trial in 0..trials {
        let dim = 2 + trial % 2;
        let extremal = trial % 3 == 2;
        let cap = RoundBall::new(BPoint::random(dim, &mut rng), rng.random_range(0.05..1.5))?;
        let inside = if extremal { THRESHOLD + 1e-3 } else { rng.random_range(THRESHOLD + 1e-3..0.999) };
        let (k_in, k_out) = (rng.random_range(3..12), rng.random_range(1..8));
        let mut nodes = Vec::with_capacity(k_in + k_out);
        let mut weights = split(inside, k_in, &mut rng);
        weights.extend(split(1.0 - inside, k_out, &mut rng));
        for _ in 0..k_in {
            nodes.push(if extremal { rim_point(&cap, &mut rng) } else { point_in_cap(cap.center(), cap.radius(), &mut rng) });
        }
        let far = cap.center().antipode();
        for _ in 0..k_out {
            let theta = loop {
                let theta = if extremal { point_in_cap(&far, 0.05, &mut rng) } else { BPoint::random(dim, &mut rng) };
                if cap.center().angle_to(&theta) > cap.radius() {
                    break theta;
                }
            };
            nodes.push(theta);
        }
        let mu = DiscreteMeasure::new(nodes, weights)?;
        let signed = cap.signed_distance(&barycenter(&mu, &opts)?.point);
        worst = worst.max(signed);
        if signed >= 1.0 {
            violations += 1;
        }
        table.push(vec![dim as f64, cap.radius(), inside, (k_in + k_out) as f64, signed]);
    }
    report.scalar("violations", violations as f64);
    report.scalar("max_signed_distance", worst);
    report.check(Some(3), "barycenter within 1 of the dome", violations == 0, format!("{violations} violations in {trials} trials, max signed distance {worst:.4}"));
    report.tables.push(table);
    Ok(report)
}

fn rim_point<R: Rng + ?Sized>(cap: &RoundBall<f64>, rng: &mut R) -> BPoint<f64> {
    loop {
        let theta = point_in_cap(cap.center(), cap.radius(), rng);
        if cap.center().angle_to(&theta) >= 0.9 * cap.radius() {
            return theta;
        }
    }
}
