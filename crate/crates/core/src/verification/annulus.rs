//! Largest round annulus inside the image of a round annulus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ExperimentConfig, ExperimentReport, Suite, Table, VerificationError};
use crate::hyperbolic::{mod_round_annulus, modulus_from_distance, BPoint, RoundAnnulus, RoundBall};
use crate::linalg::complement_frame;
use crate::sphere::sphere_exp;

const BOUNDARY_SAMPLES: usize = 2048;
const BALL_RADIUS: f64 = 0.45;
/// Annuli with modulus above this are treated as too thin.
pub const LAMBDA0: f64 = 2.0 * std::f64::consts::PI / 1.0986122886681098;
const THIN_EVERY: usize = 10;

fn circle(center: &BPoint<f64>, radius: f64) -> Vec<BPoint<f64>> {
    let c = *center.as_vector();
    let frame = complement_frame(&c);
    (0..BOUNDARY_SAMPLES)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / BOUNDARY_SAMPLES as f64;
            BPoint::renormalized(c * radius.cos() + (frame[0] * phi.cos() + frame[1] * phi.sin()) * radius.sin())
        })
        .collect()
}

/// Annulus between two nested disjoint round circles, the image of a round
/// annulus under some Mobius map.
#[derive(Clone, Copy, Debug)]
pub struct InscribedAnnulus {
    pub inner: RoundBall<f64>,
    pub outer: RoundBall<f64>,
    /// Distance between the two walls.
    pub distance: f64,
}

impl InscribedAnnulus {
    pub fn modulus(&self) -> f64 {
        modulus_from_distance(2, self.distance)
    }
}

/// Distance between the walls of nested caps `(q1, r1)` inside `(q2, r2)`.
fn wall_distance(q1: &BPoint<f64>, r1: f64, q2: &BPoint<f64>, r2: f64) -> f64 {
    let c = q1.as_vector().dot(q2.as_vector());
    ((c - r1.cos() * r2.cos()) / (r1.sin() * r2.sin())).max(1.0).acosh()
}

/// Smallest cap about `q1` holding the inner curve and largest cap about
/// `q2` avoiding the outer one, when the first nests inside the second.
fn fit(q1: &BPoint<f64>, q2: &BPoint<f64>, inner: &[BPoint<f64>], outer: &[BPoint<f64>]) -> Option<InscribedAnnulus> {
    let r1 = inner.iter().map(|p| q1.angle_to(p)).fold(0.0, f64::max);
    let r2 = outer.iter().map(|p| q2.angle_to(p)).fold(f64::INFINITY, f64::min);
    if !(r1 > 0.0 && q1.angle_to(q2) + r1 < r2) {
        return None;
    }
    Some(InscribedAnnulus {
        inner: RoundBall::new(*q1, r1).ok()?,
        outer: RoundBall::new(*q2, r2).ok()?,
        distance: wall_distance(q1, r1, q2, r2),
    })
}

fn better(a: &Option<InscribedAnnulus>, b: &Option<InscribedAnnulus>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a.distance > b.distance,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Pattern search over the two circle centers for the largest wall distance,
/// started from the image of the annulus center.
fn maximal_annulus(start: BPoint<f64>, inner: &[BPoint<f64>], outer: &[BPoint<f64>]) -> Option<InscribedAnnulus> {
    let (mut q1, mut q2) = (start, start);
    let mut best = fit(&q1, &q2, inner, outer);
    let scale = inner.iter().map(|p| start.angle_to(p)).fold(0.0, f64::max).max(1e-6);
    let mut step = 0.25 * scale;
    while step > 1e-10 * scale {
        let mut improved = false;
        for moving_outer in [false, true] {
            let q = if moving_outer { q2 } else { q1 };
            let frame = complement_frame(q.as_vector());
            for dir in [frame[0], -frame[0], frame[1], -frame[1]] {
                let candidate = sphere_exp(&q, &(dir * step));
                let score = if moving_outer { fit(&q1, &candidate, inner, outer) } else { fit(&candidate, &q2, inner, outer) };
                if better(&score, &best) {
                    if moving_outer {
                        q2 = candidate;
                    } else {
                        q1 = candidate;
                    }
                    best = score;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Ratio `max(Mod A' / Mod A, Mod A / Mod A')` for random round annuli in
/// `B/4`, `B` a ball of radius `0.45`; every tenth annulus is thin (modulus
/// above [`LAMBDA0`]) to exercise the degenerate path.
pub fn run_annulus_image(cfg: &ExperimentConfig) -> Result<ExperimentReport, VerificationError> {
    cfg.require_sphere(2)?;
    let mut report = ExperimentReport::new(Suite::AnnulusImage, cfg);
    let trials = cfg.samples_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut annuli = Vec::with_capacity(trials);
    for trial in 0..trials {
        let ball = RoundBall::new(BPoint::random(3, &mut rng), BALL_RADIUS)?;
        let quarter = ball.radius() / 4.0;
        let offset = 0.5 * quarter * rng.random::<f64>();
        let frame = complement_frame(ball.center().as_vector());
        let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let center = sphere_exp(ball.center(), &((frame[0] * phi.cos() + frame[1] * phi.sin()) * offset));
        let outer = 0.95 * (quarter - offset);
        let thin = trial % THIN_EVERY == THIN_EVERY - 1;
        let spread = if thin { 0.05 } else { rng.random_range(3f64.ln()..20f64.ln()) };
        let inner = 2.0 * ((0.5 * outer).tan() * (-spread).exp()).atan();
        annuli.push((RoundAnnulus::new(center, inner, outer)?, thin));
    }
    let mut table = Table::new("annuli", &["map", "trial", "thin", "modulus", "image_modulus", "ratio", "image_inner_radius", "image_outer_radius"]);
    for (index, f) in cfg.maps(&["mobius:0.3,0.1,0.2", "stretch:2@north"])?.iter().enumerate() {
        let found: Vec<Option<InscribedAnnulus>> = annuli
            .par_iter()
            .map(|(a, _)| {
                let image = |r: f64| circle(a.center(), r).iter().map(|p| f.apply(p)).collect::<Vec<_>>();
                maximal_annulus(f.apply(a.center()), &image(a.inner_radius()), &image(a.outer_radius()))
            })
            .collect();
        let (mut worst, mut exceed, mut missing) = (1.0f64, 0usize, 0usize);
        for (trial, ((annulus, thin), image)) in annuli.iter().zip(found).enumerate() {
            let modulus = mod_round_annulus(annulus)?;
            let (image_modulus, ratio, radii) = match image {
                Some(a) => {
                    let m = a.modulus();
                    (m, (m / modulus).max(modulus / m), [a.inner.radius(), a.outer.radius()])
                }
                None => (f64::NAN, f64::NAN, [f64::NAN; 2]),
            };
            if modulus > LAMBDA0 {
                exceed += 1;
            } else if ratio.is_nan() {
                missing += 1;
            } else {
                worst = worst.max(ratio);
            }
            table.push(vec![index as f64, trial as f64, f64::from(u8::from(*thin)), modulus, image_modulus, ratio, radii[0], radii[1]]);
        }
        report.scalar(format!("{}/C1", f.label()), worst);
        report.scalar(format!("{}/lambda0_exceedances", f.label()), exceed as f64);
        report.check(None, format!("{}: image contains a round annulus", f.label()), missing == 0, format!("{missing} annuli below lambda0 without one"));
        report.check(None, format!("{}: C1 finite", f.label()), worst.is_finite(), format!("C1 = {worst:.4}"));
        if f.as_isometry().is_some() {
            report.check(None, format!("{}: conformal map has C1 = 1", f.label()), worst <= 1.0 + 1e-2, format!("C1 = {worst:.6}"));
        }
    }
    report.tables.push(table);
    Ok(report)
}
