//! Suprema of `|DF|` and `|D^2 F|` over balls of increasing radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{sample_directions, ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::barycentric::{Extension, SECOND_DERIVATIVE_STEP};
use crate::hyperbolic::{BPoint, HPoint};

const DEFAULT_MAPS: [&str; 3] = ["power:2", "compose:power:2|stretch:1.5", "mobius:0.3,0.2;rot=0.5"];
const PLATEAU: f64 = 1.05;

/// Points with hyperbolic radius uniform in `[0, R_max]`; the sup over a
/// smaller ball uses the points inside it.
pub fn run_lipschitz(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    let mut report = ExperimentReport::new(Suite::Lipschitz, cfg);
    let radii = cfg.radii_or(&[2.0, 4.0, 6.0]);
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let dim = cfg.n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let count = cfg.samples_or(400);
    let dirs = sample_directions(dim, count, &mut rng);
    let points: Vec<HPoint<f64>> = dirs
        .iter()
        .map(|d| HPoint::radial(&BPoint::renormalized(*d), r_max * rng.random::<f64>()))
        .collect();
    let mut columns = vec!["map", "radius"];
    columns.extend(["x0", "x1", "x2"].iter().take(dim));
    columns.extend(["df_norm", "d2f_norm"]);
    let mut table = Table::new("samples", &columns);
    let maps = cfg.normalized_maps(&DEFAULT_MAPS)?;
    for (index, f) in maps.iter().enumerate() {
        let ext = Extension::new(f.clone(), cfg.extension_options())?;
        let rows: Vec<Result<(f64, f64), String>> = points
            .par_iter()
            .map(|x| {
                let eval = ext.evaluate(x).map_err(|e| e.to_string())?;
                let df = eval.jacobian.map(|j| j.operator_norm()).unwrap_or(f64::NAN);
                let d2f = ext.second_derivative_norm(x, SECOND_DERIVATIVE_STEP).map_err(|e| e.to_string())?;
                Ok((df, d2f))
            })
            .collect();
        let mut sup = vec![(0.0f64, 0.0f64); radii.len()];
        for (x, row) in points.iter().zip(rows) {
            match row {
                Ok((df, d2f)) => {
                    let mut line = vec![index as f64, x.radius()];
                    line.extend(x.coords().to_f64_vec());
                    line.extend([df, d2f]);
                    table.push(line);
                    for (k, r) in radii.iter().enumerate() {
                        if x.radius() <= *r {
                            sup[k] = (sup[k].0.max(df), sup[k].1.max(d2f));
                        }
                    }
                }
                Err(e) => report.failures.push(format!("{} at {:?}: {e}", f.label(), x.coords().to_f64_vec())),
            }
        }
        for (k, r) in radii.iter().enumerate() {
            report.scalar(format!("{}/sup_df/R={r}", f.label()), sup[k].0);
            report.scalar(format!("{}/sup_d2f/R={r}", f.label()), sup[k].1);
        }
        let (inner, outer) = (sup[radii.len().saturating_sub(2)].0, sup[radii.len() - 1].0);
        if f.as_isometry().is_some() {
            let worst = sup.iter().map(|s| (s.0 - 1.0).abs()).fold(0.0, f64::max);
            report.check(Some(7), format!("{}: sup |DF| = 1", f.label()), worst <= 1e-3, format!("max deviation {worst:.3e}"));
            let d2 = sup[radii.len() - 1].1;
            report.check(Some(7), format!("{}: sup |D2F| vanishes", f.label()), d2 <= 1e-3, format!("{d2:.3e}"));
        } else {
            report.check(
                Some(7),
                format!("{}: plateau", f.label()),
                outer <= PLATEAU * inner,
                format!("sup |DF| {outer:.6} at R={} vs {inner:.6} at R={}", radii[radii.len() - 1], radii[radii.len().saturating_sub(2)]),
            );
        }
    }
    report.tables.push(table);
    Ok(report)
}
