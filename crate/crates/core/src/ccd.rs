//! Continuous validation of straight paths by conservative advancement.
//!
//! A collision element with distance lower bound `Dmin` at time `t` and
//! velocity upper bound `Vmax` over the path cannot collide during
//! `[t − Dmin/Vmax, t + Dmin/Vmax]`. [`validate_straight_path`] probes the
//! middle of the first uncertified gap of `[0, T]` until the whole path is
//! covered or a probe finds a contact.

use std::fmt;

use crate::bounds::{pair_bounds, pair_distance_below, BoundsError, Configuration, PairBounds, PathMotion};
use crate::geometry::Vec3;
use crate::model::{enumerate_collision_elements, PairKind, Scene};
use crate::path::{PiecewisePath, StraightPath};

/// Intervals closer than this are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Probes allowed per straight path before giving up.
pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

/// Sorted, disjoint closed intervals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn clear(&mut self) {
        self.intervals.clear();
    }

    /// Adds `[lo, hi]`, merging it with every interval it overlaps or touches.
    pub fn insert(&mut self, lo: f64, hi: f64) {
        debug_assert!(lo <= hi, "reversed interval [{lo}, {hi}]");
        let first = self.intervals.partition_point(|&(_, h)| h + MERGE_TOLERANCE < lo);
        let last = self.intervals.partition_point(|&(l, _)| l - MERGE_TOLERANCE <= hi);
        let (mut lo, mut hi) = (lo, hi);
        if first < last {
            lo = lo.min(self.intervals[first].0);
            hi = hi.max(self.intervals[last - 1].1);
        }
        self.intervals.splice(first..last, [(lo, hi)]);
    }

    /// The interval containing `t`, if any.
    pub fn component(&self, t: f64) -> Option<(f64, f64)> {
        let k = self.intervals.partition_point(|&(_, h)| h < t);
        self.intervals.get(k).copied().filter(|&(l, _)| l <= t)
    }

    /// Midpoint of the first part of `[0, duration]` not covered by the set.
    pub fn next_probe(&self, duration: f64) -> Option<f64> {
        let mut start = 0.0;
        for &(lo, hi) in &self.intervals {
            if lo > start + MERGE_TOLERANCE {
                return Some((start + lo) / 2.0);
            }
            start = f64::max(start, hi);
        }
        (start < duration - MERGE_TOLERANCE).then(|| (start + duration) / 2.0)
    }
}

/// One pair of bodies, bound to a straight path.
#[derive(Clone, Debug)]
pub struct CollisionElement {
    pub kind: PairKind,
    pub pair_bounds: PairBounds,
    pub validated: IntervalSet,
}

/// Where and when a contact was found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionReport {
    pub kind: PairKind,
    pub t: f64,
    pub witness_a: Vec3,
    pub witness_b: Vec3,
    pub distance: f64,
}

impl fmt::Display for CollisionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.witness_a, self.witness_b);
        write!(
            f,
            "{} at t = {:.6} s, witnesses ({:.4}, {:.4}, {:.4}) / ({:.4}, {:.4}, {:.4})",
            self.kind, self.t, a.x, a.y, a.z, b.x, b.y, b.z
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    Collision,
    /// The iteration cap was reached: clearance is below numeric resolution.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::Collision => "collision",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathValidationResult {
    pub verdict: Verdict,
    /// A certified collision-free prefix `[0, t_v]`; `None` when the very
    /// first configuration collides. Not necessarily maximal.
    pub valid_prefix: Option<(f64, f64)>,
    pub report: Option<CollisionReport>,
    pub probes: u64,
}

impl PathValidationResult {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }
}

/// Work done by the validators, for tests and benchmarks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub probes: u64,
    pub distance_queries: u64,
}

/// Outcome of checking one element or one configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    Free(f64, f64),
    Contact(CollisionReport),
}

/// A straight path together with the configuration at the current probe,
/// computed on first use.
pub struct Probe<'a> {
    scene: &'a Scene,
    path: &'a StraightPath,
    t: f64,
    config: Option<Configuration>,
}

impl<'a> Probe<'a> {
    pub fn new(scene: &'a Scene, path: &'a StraightPath, t: f64) -> Self {
        Self {
            scene,
            path,
            t,
            config: None,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    fn config(&mut self) -> &Configuration {
        let (scene, path, t) = (self.scene, self.path, self.t);
        self.config.get_or_insert_with(|| Configuration::at_unchecked(scene, path, t))
    }
}

/// Builds the elements of `scene` for `path`, with empty caches.
pub fn bind_elements(
    scene: &Scene,
    kinds: &[PairKind],
    path: &StraightPath,
) -> Result<Vec<CollisionElement>, BoundsError> {
    let motion = PathMotion::new(scene, path)?;
    kinds
        .iter()
        .map(|&kind| {
            Ok(CollisionElement {
                kind,
                pair_bounds: pair_bounds(scene, &motion, kind)?,
                validated: IntervalSet::new(),
            })
        })
        .collect()
}

/// `[t − r, t + r] ∩ [0, T]` with `r = d_min / v_max`, or `[0, T]` for a static pair.
pub fn valid_interval(d_min: f64, v_max: f64, t: f64, duration: f64) -> (f64, f64) {
    if v_max == 0.0 {
        return (0.0, duration);
    }
    let r = d_min / v_max;
    ((t - r).max(0.0), (t + r).min(duration))
}

/// Certifies one element around the probe time, reusing its cache.
pub fn validate_element(
    elem: &mut CollisionElement,
    probe: &mut Probe<'_>,
    counters: &mut Counters,
) -> Result<Check, BoundsError> {
    let t = probe.t;
    if let Some((lo, hi)) = elem.validated.component(t) {
        return Ok(Check::Free(lo, hi));
    }
    counters.distance_queries += 1;
    let duration = probe.path.duration();
    let v_max = elem.pair_bounds.v_max;
    // Any distance beyond this certifies the whole path already.
    let cutoff = (v_max * t.max(duration - t)).max(1e-6);
    let scene = probe.scene;
    let (lo, hi) = match pair_distance_below(scene, probe.config(), elem.kind, cutoff)? {
        Some(d) if d.is_contact() => {
            return Ok(Check::Contact(CollisionReport {
                kind: elem.kind,
                t,
                witness_a: d.witness_a,
                witness_b: d.witness_b,
                distance: 0.0,
            }))
        }
        Some(d) => valid_interval(d.distance, v_max, t, duration),
        None => (0.0, duration),
    };
    elem.validated.insert(lo, hi);
    Ok(Check::Free(lo, hi))
}

/// Intersects the intervals of all elements, stopping at the first contact.
pub fn validate_all_elements(
    elements: &mut [CollisionElement],
    probe: &mut Probe<'_>,
    counters: &mut Counters,
) -> Result<Check, BoundsError> {
    let (mut lo, mut hi) = (0.0, probe.path.duration());
    for elem in elements.iter_mut() {
        match validate_element(elem, probe, counters)? {
            Check::Free(a, b) => {
                lo = f64::max(lo, a);
                hi = f64::min(hi, b);
            }
            contact => return Ok(contact),
        }
    }
    Ok(Check::Free(lo, hi))
}

/// The dichotomy loop over one straight path. Element caches are reset first.
pub fn validate_straight_path(
    elements: &mut [CollisionElement],
    scene: &Scene,
    path: &StraightPath,
    cap: u64,
    counters: &mut Counters,
) -> Result<PathValidationResult, BoundsError> {
    for e in elements.iter_mut() {
        e.validated.clear();
    }
    let duration = path.duration();
    let mut valid = IntervalSet::new();
    let mut probes = 0;
    let mut t = 0.0;
    let verdict = loop {
        if probes == cap {
            break (Verdict::Inconclusive, None);
        }
        probes += 1;
        counters.probes += 1;
        let mut probe = Probe::new(scene, path, t);
        match validate_all_elements(elements, &mut probe, counters)? {
            Check::Contact(report) => break (Verdict::Collision, Some(report)),
            Check::Free(lo, hi) => valid.insert(lo, hi),
        }
        match valid.next_probe(duration) {
            Some(next) => t = next,
            None => break (Verdict::Valid, None),
        }
    };
    let valid_prefix = match verdict.0 {
        Verdict::Valid => Some((0.0, duration)),
        _ => valid.intervals().first().copied().filter(|&(lo, _)| lo == 0.0),
    };
    Ok(PathValidationResult {
        verdict: verdict.0,
        valid_prefix,
        report: verdict.1,
        probes,
    })
}

/// Validates a scene's paths with the continuous method.
///
/// ```
/// use cdpr_ccd::ccd::Validator;
/// use cdpr_ccd::fixture::synthetic_cdpr;
/// use cdpr_ccd::geometry::{Pose, Vec3};
/// use cdpr_ccd::path::{PiecewisePath, StraightPath};
///
/// let scene = synthetic_cdpr();
/// let a = Pose::from_translation(Vec3::new(0.0, 0.0, 3.0));
/// let b = Pose::from_translation(Vec3::new(0.5, 0.0, 3.0));
/// let path = StraightPath::between(&a, &b, &[0.0; 4], &[0.0; 4], 1.0).unwrap();
/// let mut validator = Validator::new(&scene);
/// let result = validator.validate(&PiecewisePath::single(path)).unwrap();
/// assert!(result.is_valid());
/// ```
pub struct Validator<'s> {
    scene: &'s Scene,
    kinds: Vec<PairKind>,
    cap: u64,
    counters: Counters,
}

impl<'s> Validator<'s> {
    pub fn new(scene: &'s Scene) -> Self {
        Self::with_elements(scene, enumerate_collision_elements(scene))
    }

    pub fn with_elements(scene: &'s Scene, kinds: Vec<PairKind>) -> Self {
        Self {
            scene,
            kinds,
            cap: DEFAULT_ITERATION_CAP,
            counters: Counters::default(),
        }
    }

    pub fn with_iteration_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn kinds(&self) -> &[PairKind] {
        &self.kinds
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = Counters::default();
    }

    pub fn bind(&self, path: &StraightPath) -> Result<Vec<CollisionElement>, BoundsError> {
        bind_elements(self.scene, &self.kinds, path)
    }

    pub fn validate_straight(&mut self, path: &StraightPath) -> Result<PathValidationResult, BoundsError> {
        let mut elements = self.bind(path)?;
        validate_straight_path(&mut elements, self.scene, path, self.cap, &mut self.counters)
    }

    /// Validates the segments in order, stopping at the first that is not valid.
    pub fn validate(&mut self, path: &PiecewisePath) -> Result<PathValidationResult, BoundsError> {
        let mut offset = 0.0;
        let mut probes = 0;
        for segment in path.segments() {
            let mut r = self.validate_straight(segment)?;
            probes += r.probes;
            if r.verdict != Verdict::Valid {
                r.valid_prefix = match r.valid_prefix {
                    Some((_, hi)) => Some((0.0, offset + hi)),
                    None if offset > 0.0 => Some((0.0, offset)),
                    None => None,
                };
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
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::synthetic_cdpr;
    use crate::geometry::Pose;
    use proptest::prelude::*;

    #[test]
    fn interval_insert_examples() {
        let mut s = IntervalSet::new();
        s.insert(0.0, 1.0);
        assert_eq!(s.intervals(), &[(0.0, 1.0)]);
        s.insert(0.5, 2.0);
        assert_eq!(s.intervals(), &[(0.0, 2.0)]);
        let mut s = IntervalSet::new();
        s.insert(3.0, 4.0);
        s.insert(0.0, 1.0);
        assert_eq!(s.intervals(), &[(0.0, 1.0), (3.0, 4.0)]);
        s.insert(1.0, 3.0);
        assert_eq!(s.intervals(), &[(0.0, 4.0)]);
        s.insert(1.0, 3.0);
        assert_eq!(s.intervals(), &[(0.0, 4.0)]);
    }

    #[test]
    fn next_probe_examples() {
        let mut s = IntervalSet::new();
        assert_eq!(s.next_probe(10.0), Some(5.0));
        s.insert(0.0, 2.0);
        assert_eq!(s.next_probe(10.0), Some(6.0));
        s.insert(2.0, 10.0);
        assert_eq!(s.next_probe(10.0), None);
        let mut s = IntervalSet::new();
        s.insert(2.0, 3.0);
        assert_eq!(s.next_probe(10.0), Some(1.0));
    }

    #[test]
    fn interval_arithmetic() {
        assert_eq!(valid_interval(1.0, 2.0, 5.0, 10.0), (4.5, 5.5));
        assert_eq!(valid_interval(1.0, 0.0, 5.0, 10.0), (0.0, 10.0));
        assert_eq!(valid_interval(3.0, 1.0, 1.0, 10.0), (0.0, 4.0));
    }

    fn platform_at(x: f64, y: f64, z: f64) -> Pose {
        Pose::from_translation(Vec3::new(x, y, z))
    }

    #[test]
    fn stationary_path_takes_one_probe() {
        let scene = synthetic_cdpr();
        let p = platform_at(0.0, 0.0, 3.0);
        let path = StraightPath::between(&p, &p, &[0.0; 4], &[0.0; 4], 2.0).unwrap();
        let r = Validator::new(&scene).validate_straight(&path).unwrap();
        assert_eq!(r.verdict, Verdict::Valid);
        assert_eq!(r.probes, 1);
        assert_eq!(r.valid_prefix, Some((0.0, 2.0)));
    }

    #[test]
    fn cable_through_pillar_is_found() {
        let scene = synthetic_cdpr();
        let a = platform_at(-1.0, 1.5, 3.0);
        let b = platform_at(1.8, -1.5, 3.0);
        let path = StraightPath::between(&a, &b, &[0.0; 4], &[0.0; 4], 2.0).unwrap();
        let r = Validator::new(&scene).validate_straight(&path).unwrap();
        assert_eq!(r.verdict, Verdict::Collision);
        let report = r.report.unwrap();
        let (_, end) = r.valid_prefix.unwrap();
        assert!(end <= report.t);
        assert!(matches!(report.kind, PairKind::CableEnvironment(_, 0)), "{report}");
    }

    #[test]
    fn cache_hit_skips_distance_queries() {
        let scene = synthetic_cdpr();
        let a = platform_at(0.0, 0.0, 3.0);
        let b = platform_at(0.3, 0.0, 3.0);
        let path = StraightPath::between(&a, &b, &[0.0; 4], &[0.0; 4], 1.0).unwrap();
        let v = Validator::new(&scene);
        let mut elements = v.bind(&path).unwrap();
        let mut counters = Counters::default();
        let first = validate_element(&mut elements[0], &mut Probe::new(&scene, &path, 0.5), &mut counters).unwrap();
        assert_eq!(counters.distance_queries, 1);
        let Check::Free(lo, hi) = first else { panic!() };
        let again = validate_element(&mut elements[0], &mut Probe::new(&scene, &path, (lo + 0.5) / 2.0), &mut counters);
        assert_eq!(again.unwrap(), Check::Free(lo, hi));
        assert_eq!(counters.distance_queries, 1);
    }

    #[test]
    fn empty_element_list_is_vacuous() {
        let scene = synthetic_cdpr();
        let p = platform_at(0.0, 0.0, 3.0);
        let path = StraightPath::between(&p, &p, &[0.0; 4], &[0.0; 4], 4.0).unwrap();
        let mut counters = Counters::default();
        let r = validate_all_elements(&mut [], &mut Probe::new(&scene, &path, 1.0), &mut counters).unwrap();
        assert_eq!(r, Check::Free(0.0, 4.0));
    }

    #[test]
    fn piecewise_offsets_and_short_circuit() {
        let scene = synthetic_cdpr();
        let q = [0.0; 4];
        let a = platform_at(-1.0, 1.5, 3.0);
        let b = platform_at(-1.0, 0.0, 3.0);
        let c = platform_at(1.8, -1.5, 3.0);
        let free = StraightPath::between(&a, &b, &q, &q, 1.0).unwrap();
        let hit = StraightPath::between(&b, &c, &q, &q, 2.0).unwrap();
        let alone = Validator::new(&scene).validate_straight(&hit).unwrap();
        let joined = PiecewisePath::new(vec![free.clone(), hit.clone()]).unwrap();
        let r = Validator::new(&scene).validate(&joined).unwrap();
        assert_eq!(r.verdict, Verdict::Collision);
        assert!((r.report.unwrap().t - (1.0 + alone.report.unwrap().t)).abs() < 1e-12);
        assert!(r.valid_prefix.unwrap().1 >= 1.0);

        let back = StraightPath::between(&c, &b, &q, &q, 2.0).unwrap();
        let mut v = Validator::new(&scene);
        let first_only = v.validate_straight(&back).unwrap();
        v.reset_counters();
        let r = v.validate(&PiecewisePath::new(vec![back, StraightPath::between(&b, &a, &q, &q, 1.0).unwrap()]).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Collision);
        assert_eq!(v.counters().probes, first_only.probes);
    }

    #[test]
    fn cap_gives_inconclusive() {
        let scene = synthetic_cdpr();
        let a = platform_at(-1.0, 1.5, 3.0);
        let b = platform_at(1.0, 1.5, 3.0);
        let path = StraightPath::between(&a, &b, &[0.0; 4], &[0.0; 4], 2.0).unwrap();
        let r = Validator::new(&scene).with_iteration_cap(2).validate_straight(&path).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.probes, 2);
        assert_eq!(r.valid_prefix.unwrap().0, 0.0);
    }

    proptest! {
        #[test]
        fn interval_set_stays_sorted_and_disjoint(ivs in prop::collection::vec((0.0..10.0f64, 0.0..2.0f64), 0..30)) {
            let mut s = IntervalSet::new();
            for &(lo, w) in &ivs {
                s.insert(lo, lo + w);
                s.insert(lo, lo + w);
            }
            for w in s.intervals().windows(2) {
                prop_assert!(w[0].1 + MERGE_TOLERANCE < w[1].0);
            }
            for &(lo, w) in &ivs {
                let c = s.component(lo + w / 2.0).unwrap();
                prop_assert!(c.0 <= lo && lo + w <= c.1);
            }
        }

        #[test]
        fn probe_lies_in_a_gap(ivs in prop::collection::vec((0.0..10.0f64, 0.0..2.0f64), 0..10)) {
            let mut s = IntervalSet::new();
            for &(lo, w) in &ivs {
                s.insert(lo, (lo + w).min(10.0));
            }
            if let Some(t) = s.next_probe(10.0) {
                prop_assert!(s.component(t).is_none());
                prop_assert!((0.0..=10.0).contains(&t));
            }
        }

        #[test]
        fn interval_contains_probe(d in 0.0..5.0f64, v in 0.0..5.0f64, t in 0.0..10.0f64) {
            let (lo, hi) = valid_interval(d, v, t, 10.0);
            prop_assert!(lo <= t && t <= hi && lo >= 0.0 && hi <= 10.0);
        }
    }
}
