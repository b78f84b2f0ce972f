//! Crafting paths whose only collision is a short window between two
//! samples of a fixed-step validator.
//!
//! A random colliding path is translated away from the obstacle by
//! bisection until the collision only grazes, then started slightly earlier
//! so the window sits halfway between two multiples of the step.

use rand_chacha::ChaCha8Rng;

use super::bench::{sample_path, usable_start, BenchConfig};
use crate::bounds::Configuration;
use crate::ccd::{Counters, PathValidationResult, Validator, Verdict};
use crate::discretized::{check_configuration, validate_discretized_straight};
use crate::geometry::{Pose, Vec3};
use crate::model::{enumerate_collision_elements, PairKind, Scene};
use crate::path::StraightPath;

/// Sampling resolution of the window search, as a fraction of the duration.
pub const WINDOW_RESOLUTION: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct ThinWindow {
    pub path: StraightPath,
    /// First and last colliding sample found at `resolution`.
    pub window: (f64, f64),
    pub resolution: f64,
}

struct Crafter<'a> {
    scene: &'a Scene,
    kinds: Vec<PairKind>,
    tau: f64,
    max_width: f64,
}

impl Crafter<'_> {
    fn collides(&self, path: &StraightPath, t: f64) -> bool {
        let config = Configuration::at_unchecked(self.scene, path, t);
        matches!(
            check_configuration(self.scene, &self.kinds, &config, t, &mut Counters::default()),
            Ok(Some(_))
        )
    }

    fn continuous(&self, path: &StraightPath) -> Option<PathValidationResult> {
        Validator::with_elements(self.scene, self.kinds.clone())
            .validate_straight(path)
            .ok()
    }

    fn free(&self, path: &StraightPath, t0: f64, t1: f64) -> bool {
        t1 <= t0
            || path
                .subpath(t0, t1)
                .ok()
                .and_then(|p| self.continuous(&p))
                .is_some_and(|r| r.verdict == Verdict::Valid)
    }

    /// Colliding component around `t` at resolution `step`.
    fn window_around(&self, path: &StraightPath, t: f64, step: f64) -> (f64, f64) {
        let (mut a, mut b) = (t, t);
        while a - step >= 0.0 && self.collides(path, a - step) {
            a -= step;
        }
        while b + step <= path.duration() && self.collides(path, b + step) {
            b += step;
        }
        (a, b)
    }

    /// Re-times the window to the middle of a step and checks that nothing else collides.
    fn finalize(&self, path: &StraightPath, window: (f64, f64), step: f64) -> Option<ThinWindow> {
        let tau = self.tau;
        let c = (window.0 + window.1) / 2.0;
        let mut lead = ((c / tau).floor() + 0.5) * tau - c;
        if lead < 0.0 {
            lead += tau;
        }
        let start = path.pose_at_unchecked(-lead);
        let shifted = StraightPath::new(
            start,
            *path.linear_velocity(),
            *path.angular_velocity(),
            path.q_start().to_vec(),
            path.q_end().to_vec(),
            path.duration(),
        )
        .ok()?;
        let centre = c + lead;
        if !self.collides(&shifted, centre) {
            return None;
        }
        let (a, b) = self.window_around(&shifted, centre, step);
        let (lo, hi) = (a - step, b + step);
        let k = (lo / tau).ceil();
        if k * tau <= hi || b - a >= self.max_width || lo <= 0.0 || hi >= shifted.duration() {
            return None;
        }
        if !usable_start(self.scene, &self.kinds, &shifted) || !self.free(&shifted, 0.0, lo) || !self.free(&shifted, hi, shifted.duration()) {
            return None;
        }
        let disc = validate_discretized_straight(self.scene, &self.kinds, &shifted, tau, &mut Counters::default()).ok()?;
        let cont = self.continuous(&shifted)?;
        (disc.verdict == Verdict::Valid && cont.verdict == Verdict::Collision).then_some(ThinWindow {
            path: shifted,
            window: (a, b),
            resolution: step,
        })
    }

    fn along(&self, base: &StraightPath, dir: &Vec3) -> Option<ThinWindow> {
        let step = base.duration() * WINDOW_RESOLUTION;
        let moved = |s: f64| translated(base, dir * s);
        let collision = |p: &StraightPath| {
            if !usable_start(self.scene, &self.kinds, p) {
                return None;
            }
            self.continuous(p).map(|r| r.report.filter(|_| r.verdict == Verdict::Collision))
        };
        let mut hi = 0.05;
        loop {
            match collision(&moved(hi))? {
                None => break,
                Some(_) if hi < 1.0 => hi *= 2.0,
                Some(_) => return None,
            }
        }
        let mut lo = 0.0;
        for _ in 0..40 {
            let mid = (lo + hi) / 2.0;
            let path = moved(mid);
            match collision(&path) {
                None => return None,
                Some(None) => hi = mid,
                Some(Some(report)) => {
                    let window = self.window_around(&path, report.t, step);
                    let width = window.1 - window.0;
                    if width >= self.max_width {
                        lo = mid;
                    } else if width < 10.0 * step {
                        hi = mid;
                    } else {
                        return self.finalize(&path, window, step);
                    }
                }
            }
        }
        None
    }
}

fn translated(path: &StraightPath, offset: Vec3) -> StraightPath {
    let start = path.start_pose();
    StraightPath::new(
        Pose::new(start.rotation, start.translation + offset),
        *path.linear_velocity(),
        *path.angular_velocity(),
        path.q_start().to_vec(),
        path.q_end().to_vec(),
        path.duration(),
    )
    .expect("translation keeps a path valid")
}

/// Tries random paths until one yields a collision window narrower than
/// `max_width` that a `tau`-step validator misses. Gives up after 200 draws.
pub fn craft_thin_window(
    scene: &Scene,
    config: &BenchConfig,
    rng: &mut ChaCha8Rng,
    duration: f64,
    tau: f64,
    max_width: f64,
) -> Option<ThinWindow> {
    let crafter = Crafter {
        scene,
        kinds: enumerate_collision_elements(scene),
        tau,
        max_width,
    };
    let dirs = [Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    for _ in 0..200 {
        let base = sample_path(scene, config, rng, Some(duration));
        if !usable_start(scene, &crafter.kinds, &base) {
            continue;
        }
        match crafter.continuous(&base) {
            Some(r) if r.verdict == Verdict::Collision => {}
            _ => continue,
        }
        if let Some(w) = dirs.iter().find_map(|d| crafter.along(&base, d)) {
            return Some(w);
        }
    }
    None
}
