//! Fixed-step baseline: check configurations at `0, τ, 2τ, …` and at the
//! end of every straight path. It can miss collisions that start and end
//! between two samples.

use crate::bounds::{pair_distance_below, BoundsError, Configuration};
use crate::ccd::{CollisionReport, Counters, PathValidationResult, Verdict};
use crate::model::{enumerate_collision_elements, PairKind, Scene};
use crate::path::{PiecewisePath, StraightPath};

/// Any reported distance below this is resolved exactly; above it only "free" matters.
const CLEARANCE_PROBE: f64 = 1e-6;

/// Sample times of a path of length `duration`; the end is always included.
pub fn sample_times(duration: f64, tau: f64) -> impl Iterator<Item = f64> {
    assert!(tau > 0.0, "step must be positive, got {tau}");
    let n = (duration / tau).ceil() as u64;
    (0..n)
        .map(move |k| k as f64 * tau)
        .filter(move |&t| t < duration - 1e-12)
        .chain(std::iter::once(duration))
}

/// Checks one configuration against every element; the first contact in enumeration order wins.
pub fn check_configuration(
    scene: &Scene,
    kinds: &[PairKind],
    config: &Configuration,
    t: f64,
    counters: &mut Counters,
) -> Result<Option<CollisionReport>, BoundsError> {
    for &kind in kinds {
        counters.distance_queries += 1;
        if let Some(d) = pair_distance_below(scene, config, kind, CLEARANCE_PROBE)? {
            if d.is_contact() {
                return Ok(Some(CollisionReport {
                    kind,
                    t,
                    witness_a: d.witness_a,
                    witness_b: d.witness_b,
                    distance: 0.0,
                }));
            }
        }
    }
    Ok(None)
}

pub fn validate_discretized_straight(
    scene: &Scene,
    kinds: &[PairKind],
    path: &StraightPath,
    tau: f64,
    counters: &mut Counters,
) -> Result<PathValidationResult, BoundsError> {
    let mut probes = 0;
    let mut last_free = None;
    for t in sample_times(path.duration(), tau) {
        probes += 1;
        counters.probes += 1;
        let config = Configuration::at_unchecked(scene, path, t);
        if let Some(report) = check_configuration(scene, kinds, &config, t, counters)? {
            return Ok(PathValidationResult {
                verdict: Verdict::Collision,
                // Samples are not certificates; only the checked instants are known free.
                valid_prefix: last_free.map(|t| (0.0, t)),
                report: Some(report),
                probes,
            });
        }
        last_free = Some(t);
    }
    Ok(PathValidationResult {
        verdict: Verdict::Valid,
        valid_prefix: Some((0.0, path.duration())),
        report: None,
        probes,
    })
}

/// Samples each segment of `path` with step `tau`.
///
/// ```
/// use cdpr_ccd::discretized::validate_discretized;
/// use cdpr_ccd::fixture::synthetic_cdpr;
/// use cdpr_ccd::geometry::{Pose, Vec3};
/// use cdpr_ccd::path::{PiecewisePath, StraightPath};
///
/// let scene = synthetic_cdpr();
/// let a = Pose::from_translation(Vec3::new(0.0, 0.0, 3.0));
/// let path = StraightPath::between(&a, &a, &[0.0; 4], &[0.0; 4], 1.0).unwrap();
/// let r = validate_discretized(&scene, &PiecewisePath::single(path), 0.1).unwrap();
/// assert_eq!(r.probes, 11);
/// ```
pub fn validate_discretized(scene: &Scene, path: &PiecewisePath, tau: f64) -> Result<PathValidationResult, BoundsError> {
    let kinds = enumerate_collision_elements(scene);
    let mut counters = Counters::default();
    validate_discretized_with(scene, &kinds, path, tau, &mut counters)
}

pub fn validate_discretized_with(
    scene: &Scene,
    kinds: &[PairKind],
    path: &PiecewisePath,
    tau: f64,
    counters: &mut Counters,
) -> Result<PathValidationResult, BoundsError> {
    let mut offset = 0.0;
    let mut probes = 0;
    for segment in path.segments() {
        let mut r = validate_discretized_straight(scene, kinds, segment, tau, counters)?;
        probes += r.probes;
        if r.verdict != Verdict::Valid {
            r.valid_prefix = r.valid_prefix.map(|(_, hi)| (0.0, offset + hi));
            if let Some(report) = r.report.as_mut() {
                report.t += offset;
            }
            r.probes = probes;
            return Ok(r);
        }
        offset += segment.duration();
    }
    Ok(PathValidationResult {
        verdict: Verdict::Valid,
        valid_prefix: Some((0.0, path.duration())),
        report: None,
        probes,
    })
}
