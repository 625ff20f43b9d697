//! Normalized families `z^d o g_m` and the set where they fail to converge.

use super::{ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::barycentric::{normalize, Extension};
use crate::boundary_maps::{parse_map_spec, SphereMap};
use crate::hyperbolic::{BPoint, HPoint, MobiusIsometry};

const GRID: usize = 4096;
const WITNESS: usize = 256;
/// Grid points where consecutive maps differ by more than this are flagged.
const TAU: f64 = 0.1;
/// Flagged runs closer than this many grid points form one cap.
const MERGE_GAP: usize = 16;
const CENTERING_TOL: f64 = 1e-6;
const ANTI_COLLAPSE: f64 = 0.5;
const SHRINKING: [f64; 3] = [0.5, 0.25, 0.1];

/// Cyclic runs of flagged grid indices, merging runs separated by fewer than
/// [`MERGE_GAP`] unflagged points; each run is `(first, last)` inclusive and
/// may wrap around.
fn clusters(flags: &[bool]) -> Vec<(usize, usize)> {
    let n = flags.len();
    let Some(start) = (0..n).find(|&k| !flags[k]) else {
        return if n == 0 { Vec::new() } else { vec![(0, n - 1)] };
    };
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < n {
        let i = (start + k) % n;
        if flags[i] {
            let first = i;
            let mut last = i;
            while k + 1 < n && flags[(start + k + 1) % n] {
                k += 1;
                last = (start + k) % n;
            }
            runs.push((first, last));
        }
        k += 1;
    }
    let gap = |a: usize, b: usize| (b + n - a) % n - 1;
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(prev) if gap(prev.1, run.0) < MERGE_GAP => prev.1 = run.1,
            _ => merged.push(run),
        }
    }
    if merged.len() > 1 {
        let (first, last) = (merged[0], merged[merged.len() - 1]);
        if gap(last.1, first.0) < MERGE_GAP {
            merged[0].0 = last.0;
            merged.pop();
        }
    }
    merged
}

fn grid_angle(k: usize) -> f64 {
    2.0 * std::f64::consts::PI * k as f64 / GRID as f64
}

/// Center and half-width, in radians, of a cluster of grid indices.
fn cap_of((first, last): (usize, usize)) -> (BPoint<f64>, f64) {
    let span = (last + GRID - first) % GRID + 1;
    let half = 0.5 * grid_angle(span);
    (BPoint::from_angle(grid_angle(first) + half), half)
}

/// The demo family: `z^d` after the transvection of length `m` towards
/// `theta* = 1`, for `m = 1, ..., 6`.
pub fn run_compactness_demo(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    run_compactness_family(cfg, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
}

/// `f_m = normalize(f o g_m)` with `g_m` the transvection of length
/// `lengths[m]` towards `theta* = 1` and `f` the configured map (default
/// `z^2`). Points where `f_m` and `f_{m+1}` differ by more than 0.1 are
/// clustered into caps; the caps of the last pair are the detected set `P`.
pub fn run_compactness_family(cfg: &ExperimentConfig, lengths: &[f64]) -> Result<ExperimentReport, VerificationError> {
    cfg.require_sphere(1)?;
    let mut report = ExperimentReport::new(Suite::Compactness, cfg);
    let base: SphereMap<f64> = parse_map_spec(cfg.map_spec.as_deref().unwrap_or("power:2"), 1)?;
    let degree = base.nominal_degree() as usize;
    let target = BPoint::from_angle(0.0);
    let opts = cfg.extension_options();
    let o = HPoint::origin(2);
    let grid: Vec<BPoint<f64>> = (0..GRID).map(|k| BPoint::from_angle(grid_angle(k))).collect();
    let mut family = Vec::with_capacity(lengths.len());
    let mut centering = Table::new("centering", &["step", "length", "offset"]);
    let mut worst_offset = 0.0f64;
    for (m, length) in lengths.iter().enumerate() {
        let g = MobiusIsometry::transvection(HPoint::radial(&target, *length));
        let f = SphereMap::compose(base.clone(), SphereMap::mobius(g))?;
        let (f, _) = normalize(&f, &opts)?;
        let offset = Extension::new(f.clone(), opts.clone())?.value(&o)?.radius();
        worst_offset = worst_offset.max(offset);
        centering.push(vec![m as f64, *length, offset]);
        family.push(grid.iter().map(|theta| f.apply(theta)).collect::<Vec<_>>());
    }
    report.scalar("max_centering_offset", worst_offset);
    report.check(Some(11), "extensions fix the origin", worst_offset <= CENTERING_TOL, format!("max d(F(o), o) = {worst_offset:.3e}"));

    let mut cauchy = Table::new("cauchy", &["step", "flagged_fraction", "caps", "sup_all", "sup_off_0.5", "sup_off_0.25", "sup_off_0.1"]);
    let mut caps = Vec::new();
    let pairs: Vec<Vec<f64>> = family.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a.angle_to(b)).collect()).collect();
    if let Some(last) = pairs.last() {
        caps = clusters(&last.iter().map(|d| *d > TAU).collect::<Vec<_>>()).into_iter().map(cap_of).collect();
    }
    for (m, gaps) in pairs.iter().enumerate() {
        let flags: Vec<bool> = gaps.iter().map(|d| *d > TAU).collect();
        let fraction = flags.iter().filter(|f| **f).count() as f64 / GRID as f64;
        let mut row = vec![m as f64, fraction, clusters(&flags).len() as f64, gaps.iter().copied().fold(0.0, f64::max)];
        for r in SHRINKING {
            let off = gaps
                .iter()
                .zip(&grid)
                .filter(|(_, theta)| caps.iter().all(|(c, half): &(BPoint<f64>, f64)| c.angle_to(theta) > half + r))
                .map(|(d, _)| *d)
                .fold(0.0, f64::max);
            row.push(off);
        }
        cauchy.push(row);
    }
    let mut detected = Table::new("singular_set", &["center", "half_width"]);
    for (c, half) in &caps {
        detected.push(vec![c.angle(), *half]);
    }
    report.scalar("caps", caps.len() as f64);
    report.check(Some(11), "singular set has at most d caps", caps.len() <= degree, format!("{} caps, d = {degree}", caps.len()));

    if let Some(last) = family.last() {
        let witness: Vec<&BPoint<f64>> = last.iter().step_by(GRID / WITNESS).collect();
        let diameter = witness
            .iter()
            .enumerate()
            .flat_map(|(i, a)| witness[i + 1..].iter().map(move |b| a.angle_to(b)))
            .fold(0.0, f64::max);
        report.scalar("image_diameter", diameter);
        report.check(Some(11), "last map is far from constant", diameter >= ANTI_COLLAPSE, format!("grid image diameter {diameter:.4}"));
    }
    report.tables.extend([centering, cauchy, detected]);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_wrap_around() {
        let mut flags = vec![false; GRID];
        for k in (0..10).chain(GRID - 5..GRID).chain(1000..1020).chain(1025..1030) {
            flags[k] = true;
        }
        let found = clusters(&flags);
        assert_eq!(found, vec![(1000, 1029), (GRID - 5, 9)]);
        assert!(clusters(&vec![false; 8]).is_empty());
        assert_eq!(clusters(&vec![true; 8]), vec![(0, 7)]);
        let (c, half) = cap_of((GRID - 5, 9));
        assert!((half - 0.5 * grid_angle(15)).abs() < 1e-12);
        assert!(c.angle_to(&BPoint::from_angle(grid_angle(2) + 0.5 * grid_angle(1))) < 1e-9);
    }

    #[test]
    fn constant_family_has_no_singular_set() {
        let cfg = ExperimentConfig { quadrature_n: 512, ..Default::default() };
        let report = run_compactness_family(&cfg, &[0.0, 0.0, 0.0]).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        assert_eq!(report.scalars["caps"], 0.0);
    }
}
