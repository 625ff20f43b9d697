//! Visual measure of the directions at `x` whose far image lands in the
//! dome of a visually small ball.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{sample_directions, ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::barycentric::Extension;
use crate::hyperbolic::{exp_map, BPoint, HPoint, MobiusIsometry, RoundBall, Tangent};

const CENTERS: usize = 8;

/// For each base point `x` and radius `R`, evaluates `F(exp_x(R v))` on the
/// sampled directions and, for each of several cap centers and each `delta`,
/// the fraction landing in `Dome(B)` where `B` has visual diameter `delta`
/// seen from `F(x)`. Caps of one center are concentric, so the fractions must
/// not grow as `delta` shrinks.
pub fn run_volume_noncontraction(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    let mut report = ExperimentReport::new(Suite::Volume, cfg);
    let dim = cfg.n + 1;
    let radii = cfg.radii_or(&[6.0]);
    let mut deltas = cfg.deltas.clone().unwrap_or_else(|| vec![0.5, 0.25, 0.1]);
    deltas.sort_by(|a, b| b.total_cmp(a));
    if deltas.iter().any(|d| !(*d > 0.0 && *d < std::f64::consts::PI)) {
        return Err(VerificationError::Config("deltas must lie in (0, pi)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs = sample_directions(dim, cfg.samples_or(10_000), &mut rng);
    let centers: Vec<BPoint<f64>> = (0..CENTERS).map(|_| BPoint::random(dim, &mut rng)).collect();
    let bases: Vec<HPoint<f64>> = std::iter::once(HPoint::origin(dim)).chain((0..2).map(|_| HPoint::random(dim, 1.0, &mut rng))).collect();
    let mut table = Table::new("fractions", &["map", "base", "radius", "center", "delta", "fraction"]);
    for (index, f) in cfg.maps(&["power:2"])?.iter().enumerate() {
        let ext = Extension::new(f.clone(), cfg.extension_options())?;
        for (b, x) in bases.iter().enumerate() {
            // Work in coordinates where F(x) sits at the origin.
            let back = MobiusIsometry::transvection(ext.value(x)?).inverse();
            for r in &radii {
                let images: Vec<Option<HPoint<f64>>> = dirs
                    .par_iter()
                    .map(|v| ext.value(&exp_map(x, &Tangent(*v * *r))).ok().map(|y| back.apply(&y)))
                    .collect();
                let failed = images.iter().filter(|y| y.is_none()).count();
                if failed > 0 {
                    report.failures.push(format!("{}: {failed} directions failed at base {b}, R={r}", f.label()));
                }
                let mut worst = vec![0.0f64; deltas.len()];
                for (c, center) in centers.iter().enumerate() {
                    let mut previous = f64::INFINITY;
                    let mut monotone = true;
                    for (k, delta) in deltas.iter().enumerate() {
                        let cap = RoundBall::new(*center, 0.5 * delta)?;
                        let hits = images.iter().flatten().filter(|y| cap.signed_distance(y) <= 0.0).count();
                        let fraction = hits as f64 / dirs.len() as f64;
                        table.push(vec![index as f64, b as f64, *r, c as f64, *delta, fraction]);
                        monotone &= fraction <= previous;
                        previous = fraction;
                        worst[k] = worst[k].max(fraction);
                    }
                    report.check(
                        Some(9),
                        format!("{}: base {b}, R={r}, center {c}: fraction non-increasing in delta", f.label()),
                        monotone,
                        "",
                    );
                }
                for (delta, eta) in deltas.iter().zip(&worst) {
                    report.scalar(format!("{}/base{b}/R={r}/eta(delta={delta})", f.label()), *eta);
                }
            }
        }
    }
    report.tables.push(table);
    Ok(report)
}
