//! Round annuli of `S^2` against distances between the components of the
//! complement of their domes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{point_in_cap, ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::hyperbolic::{dist, dome_center, mod_round_annulus, modulus_from_distance, BPoint, GeometryError, HPoint, MobiusIsometry, RoundAnnulus, RoundBall};

const MAX_REDRAWS: usize = 10_000;

/// Visual measure from `x` of a cap.
fn visual_measure(x: &HPoint<f64>, cap: &RoundBall<f64>) -> f64 {
    cap.image(&MobiusIsometry::transvection(*x).inverse()).measure()
}

/// The annulus between the walls through two points of the ray from `o`
/// towards `x2`: one at distance 1 from `x2`, the other a further
/// `d(x1, x2) - 2` towards `o`, where `x1` is the center of the wall of
/// `Dome(ball)`. Its modulus is `omega_1 / (d(x1, x2) - 2)`.
#[derive(Clone, Debug, Serialize)]
pub struct AnnulusConstruction {
    #[serde(skip)]
    pub annulus: RoundAnnulus<f64>,
    pub distance: f64,
    pub modulus: f64,
    pub expected: f64,
    pub inside_ball: bool,
    /// `x1` and `x2` lie in different components of the complement of the
    /// dome of the annulus.
    pub separates: bool,
    /// Visual measures of the outer complementary cap from `x1` and of the
    /// inner cap from `x2`.
    pub volumes: (f64, f64),
}

pub fn annulus_construction(ball: &RoundBall<f64>, x2: &HPoint<f64>) -> Result<AnnulusConstruction, VerificationError> {
    let x1 = dome_center(ball);
    let d = dist(&x1, x2);
    if d <= 2.0 {
        return Err(VerificationError::Config(format!("points at distance {d} <= 2")));
    }
    let axis = BPoint::new(x2.coords().normalized().ok_or(GeometryError::DegenerateSegment)?)?;
    let near = x2.radius() - 1.0;
    let far = near - (d - 2.0);
    let annulus = RoundAnnulus::new(axis, near.tanh().acos(), far.tanh().acos())?;
    let modulus = mod_round_annulus(&annulus)?;
    let inside_ball = ball.center().angle_to(&axis) + annulus.outer_radius() <= ball.radius();
    let separates = annulus.outer_ball().signed_distance(&x1) > 0.0 && annulus.inner_ball().signed_distance(x2) < 0.0;
    let volumes = (1.0 - visual_measure(&x1, &annulus.outer_ball()), visual_measure(x2, &annulus.inner_ball()));
    Ok(AnnulusConstruction { annulus, distance: d, modulus, expected: modulus_from_distance(2, d - 2.0), inside_ball, separates, volumes })
}

pub fn run_modulus_lemmas(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    cfg.require_sphere(2)?;
    let mut report = ExperimentReport::new(Suite::Modulus, cfg);
    let trials = cfg.samples_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new("inequality", &["trial", "inner", "outer", "modulus", "distance", "bound", "feet_error", "pushed_margin"]);
    let mut violations = 0;
    let mut redraws = 0;
    let mut worst_feet = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for trial in 0..trials {
        let center = BPoint::random(3, &mut rng);
        let inner: f64 = rng.random_range(0.1..1.2);
        let outer = rng.random_range(inner + 0.1..(inner + 1.5).min(3.0));
        let annulus = RoundAnnulus::new(center, inner, outer)?;
        let modulus = mod_round_annulus(&annulus)?;
        let (inner_ball, outer_ball) = (annulus.inner_ball(), annulus.outer_ball());
        let mut draw = |inside: bool, rng: &mut ChaCha8Rng| -> Option<HPoint<f64>> {
            for _ in 0..MAX_REDRAWS {
                let p = if inside {
                    HPoint::radial(&point_in_cap(&center, inner, rng), rng.random_range(0.0..10.0))
                } else {
                    HPoint::random(3, 6.0, rng)
                };
                let ok = if inside { inner_ball.signed_distance(&p) < 0.0 } else { outer_ball.signed_distance(&p) > 0.0 };
                if ok {
                    return Some(p);
                }
                redraws += 1;
            }
            None
        };
        let (Some(x), Some(y)) = (draw(true, &mut rng), draw(false, &mut rng)) else {
            report.failures.push(format!("trial {trial}: no admissible points"));
            continue;
        };
        let d = dist(&x, &y);
        let bound = modulus_from_distance(2, d);
        if modulus < bound * (1.0 - 1e-12) {
            violations += 1;
        }
        // Feet of the common perpendicular lie on the axis through o.
        let t_in = (1.0 / (0.5 * inner).tan()).ln();
        let t_out = (1.0 / (0.5 * outer).tan()).ln();
        let feet = dist(&HPoint::radial(&center, t_in), &HPoint::radial(&center, t_out));
        let feet_error = (modulus - modulus_from_distance(2, feet)).abs();
        worst_feet = worst_feet.max(feet_error);
        let pushed = dist(&HPoint::radial(&center, t_in + 0.5), &HPoint::radial(&center, t_out - 0.5));
        let margin = modulus - modulus_from_distance(2, pushed);
        min_margin = min_margin.min(margin);
        table.push(vec![trial as f64, inner, outer, modulus, d, bound, feet_error, margin]);
    }
    report.scalar("violations", violations as f64);
    report.scalar("max_feet_error", worst_feet);
    report.scalar("min_pushed_margin", min_margin);
    report.check(Some(5), "modulus bounds distance between complementary components", violations == 0, format!("{violations} violations in {trials} trials"));
    report.check(Some(5), "equality at the feet of the common perpendicular", worst_feet <= 1e-8, format!("max error {worst_feet:.3e}"));
    report.check(Some(5), "strict inequality off the feet", min_margin > 0.0, format!("min margin {min_margin:.3e}"));

    let mut centers = Table::new("dome_centers", &["radius", "distance", "closed_form", "error"]);
    let mut worst_center = 0.0f64;
    for _ in 0..trials.min(200) {
        let ball = RoundBall::<f64>::new(BPoint::random(3, &mut rng), rng.random_range(0.05..1.5))?;
        let closed = (1.0 / (0.5 * ball.radius()).tan()).ln();
        let measured = dist(&HPoint::origin(3), &dome_center(&ball));
        worst_center = worst_center.max((measured - closed).abs());
        centers.push(vec![ball.radius(), measured, closed, (measured - closed).abs()]);
    }
    report.check(Some(5), "dome center at distance log cot(r/2)", worst_center <= 1e-8, format!("max error {worst_center:.3e}"));

    let mut built = Table::new("construction", &["radius", "distance", "modulus", "expected", "inside_ball", "separates", "volume_1", "volume_2"]);
    let mut worst_mod = 0.0f64;
    let (mut outside, mut joined, mut short) = (0, 0, 0);
    let mut min_volume = f64::INFINITY;
    for _ in 0..trials.min(200) {
        let ball = RoundBall::<f64>::new(BPoint::random(3, &mut rng), rng.random_range(0.05..0.5))?;
        let small = ball.scaled(1.0 / 25.0)?;
        let base = (1.0 / (0.5 * small.radius()).tan()).ln();
        let x2 = loop {
            let p = HPoint::radial(&point_in_cap(small.center(), small.radius(), &mut rng), base + rng.random_range(0.0..4.0));
            if small.signed_distance(&p) <= 0.0 {
                break p;
            }
            redraws += 1;
        };
        let c = annulus_construction(&ball, &x2)?;
        if c.distance < 25f64.ln() {
            short += 1;
        }
        worst_mod = worst_mod.max((c.modulus - c.expected).abs());
        outside += usize::from(!c.inside_ball);
        joined += usize::from(!c.separates);
        min_volume = min_volume.min(c.volumes.0.min(c.volumes.1));
        built.push(vec![
            ball.radius(),
            c.distance,
            c.modulus,
            c.expected,
            f64::from(u8::from(c.inside_ball)),
            f64::from(u8::from(c.separates)),
            c.volumes.0,
            c.volumes.1,
        ]);
    }
    report.scalar("construction/max_modulus_error", worst_mod);
    report.scalar("construction/min_volume", min_volume);
    report.scalar("redraws", redraws as f64);
    report.check(Some(5), "construction has modulus omega_1 / (d - 2)", worst_mod <= 1e-8, format!("max error {worst_mod:.3e}"));
    report.check(Some(5), "construction annulus lies in B", outside == 0, format!("{outside} outside"));
    report.check(Some(5), "construction dome separates x1 from x2", joined == 0, format!("{joined} not separated"));
    report.check(Some(5), "d(x1, x2) >= log 25", short == 0, format!("{short} shorter"));
    report.tables.extend([table, centers, built]);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_the_two_sphere() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(run_modulus_lemmas(&cfg), Err(VerificationError::Config(_))));
    }

    #[test]
    fn construction_on_the_axis() {
        let north = BPoint::from_f64(&[0.0, 0.0, 1.0]).unwrap();
        let ball = RoundBall::new(north, 0.4).unwrap();
        let x2 = HPoint::radial(&north, 8.0);
        let c = annulus_construction(&ball, &x2).unwrap();
        let x1 = dome_center(&ball);
        assert!((c.distance - (8.0 - x1.radius())).abs() < 1e-12);
        assert!((c.modulus - 2.0 * std::f64::consts::PI / (c.distance - 2.0)).abs() < 1e-10);
        assert!(c.inside_ball && c.separates);
    }

    #[test]
    fn small_run_passes() {
        let cfg = ExperimentConfig { n: 2, samples: Some(100), ..Default::default() };
        let report = run_modulus_lemmas(&cfg).unwrap();
        assert!(report.passed(), "{:#?}", report.checks);
    }
}
