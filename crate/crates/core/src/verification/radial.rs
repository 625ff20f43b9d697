//! Linear growth of `d(F(o), F(exp_o(R v)))` along most rays.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{sample_directions, ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::barycentric::Extension;
use crate::hyperbolic::{dist, exp_map, HPoint, Tangent};

/// Largest `c0` satisfied by at least a `1 - epsilon` fraction of the
/// per-direction allowances, with the fraction actually achieved.
fn rate_for(allowances: &[f64], epsilon: f64) -> (f64, f64) {
    let mut sorted = allowances.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let needed = (((1.0 - epsilon) * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    let c0 = sorted[needed - 1];
    let achieved = allowances.iter().filter(|a| **a >= c0).count() as f64 / allowances.len() as f64;
    (c0, achieved)
}

/// For each direction `v` the largest `c0` with
/// `d(F(o), F(exp_o(R v))) >= c0 R - c0` at every listed `R`, i.e.
/// `min_R d_R / (R - 1)`; the reported rate at `epsilon` is the
/// `(1 - epsilon)`-quantile of these allowances.
pub fn run_radial_qi(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    let mut report = ExperimentReport::new(Suite::RadialQi, cfg);
    let radii = cfg.radii_or(&[4.0, 6.0, 8.0]);
    if radii.iter().any(|r| *r <= 1.0) {
        return Err(VerificationError::Config("radial-qi radii must exceed 1".into()));
    }
    let dim = cfg.n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs = sample_directions(dim, cfg.samples_or(1000), &mut rng);
    let o = HPoint::origin(dim);
    let mut columns = vec!["map".to_string(), "direction".to_string(), "allowance".to_string()];
    columns.extend(radii.iter().map(|r| format!("d_R{r}")));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("directions", &columns);
    let mut epsilons = vec![0.5, cfg.epsilon, 0.05];
    epsilons.sort_by(|a, b| b.total_cmp(a));
    epsilons.dedup();
    for (index, f) in cfg.normalized_maps(&["power:1", "power:2", "power:3"])?.iter().enumerate() {
        let ext = Extension::new(f.clone(), cfg.extension_options())?;
        let center = ext.value(&o)?;
        let rows: Vec<Result<Vec<f64>, String>> = dirs
            .par_iter()
            .map(|v| radii.iter().map(|r| Ok(dist(&center, &ext.value(&exp_map(&o, &Tangent(*v * *r))).map_err(|e| e.to_string())?))).collect())
            .collect();
        let mut allowances = Vec::with_capacity(dirs.len());
        for (k, row) in rows.into_iter().enumerate() {
            match row {
                Ok(d) => {
                    let allowance = d.iter().zip(&radii).map(|(d, r)| d / (r - 1.0)).fold(f64::INFINITY, f64::min);
                    allowances.push(allowance);
                    let mut line = vec![index as f64, k as f64, allowance];
                    line.extend(d);
                    table.push(line);
                }
                Err(e) => report.failures.push(format!("{} direction {k}: {e}", f.label())),
            }
        }
        if allowances.is_empty() {
            continue;
        }
        let mut previous = f64::INFINITY;
        let mut monotone = true;
        for eps in &epsilons {
            let (c0, achieved) = rate_for(&allowances, *eps);
            report.scalar(format!("{}/c0(eps={eps})", f.label()), c0);
            report.scalar(format!("{}/fraction(eps={eps})", f.label()), achieved);
            monotone &= c0 <= previous;
            previous = c0;
            if *eps == cfg.epsilon {
                report.check(
                    Some(8),
                    format!("{}: positive rate at eps={eps}", f.label()),
                    c0 > 0.0 && achieved >= 1.0 - eps,
                    format!("c0 = {c0:.4}, fraction {achieved:.4}"),
                );
            }
        }
        report.check(Some(8), format!("{}: rate non-increasing as eps shrinks", f.label()), monotone, "");
    }
    report.tables.push(table);
    Ok(report)
}
