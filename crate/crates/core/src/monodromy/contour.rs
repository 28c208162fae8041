//! Piecewise contours made of line segments and circular arcs, parametrized by
//! arc length.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::algebra::{complex_pair, C64};
use crate::error::{Error, Result};

/// One piece of a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line {
        #[serde(with = "complex_pair")]
        from: C64,
        #[serde(with = "complex_pair")]
        to: C64,
    },
    /// Positive `sweep` is counterclockwise.
    Arc {
        #[serde(with = "complex_pair")]
        center: C64,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn circle(center: C64, radius: f64, start_angle: f64) -> Self {
        Segment::Arc {
            center,
            radius,
            start_angle,
            sweep: TAU,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at arc length `s` from the start.
    pub fn point(&self, s: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => {
                let len = (to - from).norm();
                if len == 0.0 {
                    from
                } else {
                    from + (to - from) * (s / len)
                }
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let theta = start_angle + sweep.signum() * s / radius;
                center + C64::from_polar(radius, theta)
            }
        }
    }

    /// Unit tangent `dz/ds` at arc length `s`.
    pub fn tangent(&self, s: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => {
                let len = (to - from).norm();
                if len == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    (to - from) / len
                }
            }
            Segment::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => {
                let theta = start_angle + sweep.signum() * s / radius;
                C64::new(0.0, sweep.signum()) * C64::from_polar(1.0, theta)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        match *self {
            Segment::Line { to, .. } => to,
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => center + C64::from_polar(radius, start_angle + sweep),
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start_angle: start_angle + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Euclidean distance from `p` to the segment.
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - from).norm();
                }
                let t = (((p - from) * d.conj()).re / len2).clamp(0.0, 1.0);
                (p - (from + d * t)).norm()
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = p - center;
                let endpoints = (p - self.start()).norm().min((p - self.end()).norm());
                if rel.norm() == 0.0 {
                    return radius;
                }
                // angle of p measured along the sweep direction from the start
                let phi = rel.arg();
                let offset = if sweep >= 0.0 {
                    (phi - start_angle).rem_euclid(TAU)
                } else {
                    (start_angle - phi).rem_euclid(TAU)
                };
                if sweep.abs() >= TAU || offset <= sweep.abs() {
                    (rel.norm() - radius).abs()
                } else {
                    endpoints
                }
            }
        }
    }
}

/// Connected chain of segments with a declared clearance from marked points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourPath {
    segments: Vec<Segment>,
    clearance: f64,
}

impl ContourPath {
    pub fn new(segments: Vec<Segment>, clearance: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("contour needs at least one segment".into()));
        }
        if !(clearance > 0.0) {
            return Err(Error::InvalidArgument("clearance must be positive".into()));
        }
        let scale = segments
            .iter()
            .map(|s| s.start().norm().max(s.end().norm()))
            .fold(1.0, f64::max);
        for (i, pair) in segments.windows(2).enumerate() {
            if (pair[0].end() - pair[1].start()).norm() > 1e-10 * scale {
                return Err(Error::Disconnected {
                    segment: i,
                    next: i + 1,
                });
            }
        }
        for (i, s) in segments.iter().enumerate() {
            let ok = match *s {
                Segment::Line { from, to } => from.re.is_finite() && from.im.is_finite() && to.re.is_finite() && to.im.is_finite(),
                Segment::Arc { center, radius, start_angle, sweep } => {
                    center.re.is_finite() && center.im.is_finite() && radius > 0.0 && radius.is_finite() && start_angle.is_finite() && sweep.is_finite()
                }
            };
            if !ok {
                return Err(Error::NonFinite { segment: i });
            }
        }
        Ok(Self { segments, clearance })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn start(&self) -> C64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> C64 {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= 1e-10 * self.start().norm().max(1.0)
    }

    /// The path traversed backwards.
    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            clearance: self.clearance,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ContourPath) -> Result<Self> {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&next.segments);
        Self::new(segments, self.clearance.min(next.clearance))
    }

    /// Checks that every segment stays at least `clearance` away from `points`.
    pub fn check_clearance(&self, points: &[C64]) -> Result<()> {
        for (i, seg) in self.segments.iter().enumerate() {
            for (a, x) in points.iter().enumerate() {
                let d = seg.distance_to(*x);
                if d < self.clearance {
                    return Err(Error::Clearance {
                        segment: i,
                        point: a,
                        distance: d,
                    });
                }
            }
        }
        Ok(())
    }

    /// Winding number of the (closed) path around `p`, from the accumulated
    /// argument increment.
    pub fn winding_number(&self, p: C64) -> f64 {
        let mut total = 0.0;
        for seg in &self.segments {
            let pieces = ((seg.length() / seg.distance_to(p).max(1e-12)).ceil() as usize * 8).clamp(8, 100_000);
            let h = seg.length() / pieces as f64;
            let mut prev = seg.start() - p;
            for k in 1..=pieces {
                let cur = seg.point(h * k as f64) - p;
                total += (cur / prev).arg();
                prev = cur;
            }
        }
        total / (2.0 * PI)
    }
}

/// Replaces the straight segment `from -> to` by a chain that detours around
/// each disk `(center, radius)` the segment cuts through. The detour keeps each
/// center on the same side as the straight line does; a center lying exactly on
/// the line is kept on the right.
pub fn detoured_line(from: C64, to: C64, disks: &[(C64, f64)]) -> Vec<Segment> {
    let d = to - from;
    let len = d.norm();
    if len == 0.0 {
        return vec![Segment::Line { from, to }];
    }
    let u = d / len;
    let mut cuts: Vec<(f64, f64, C64, f64, bool)> = Vec::new();
    for &(c, r) in disks {
        let rel = (c - from) * u.conj();
        let (along, across) = (rel.re, rel.im);
        if across.abs() >= r {
            continue;
        }
        let half = (r * r - across * across).sqrt();
        let (t1, t2) = (along - half, along + half);
        if t2 <= 0.0 || t1 >= len || half < 1e-12 * r {
            continue;
        }
        cuts.push((t1.max(0.0), t2.min(len), c, r, across > 0.0));
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut cursor = from;
    for (t1, t2, c, r, left) in cuts {
        let q1 = from + u * t1;
        let q2 = from + u * t2;
        if (q1 - cursor).norm() > 0.0 {
            out.push(Segment::Line { from: cursor, to: q1 });
        }
        let a1 = (q1 - c).arg();
        let a2 = (q2 - c).arg();
        // center on the left of travel means counterclockwise around it
        let sweep = if left {
            (a2 - a1).rem_euclid(TAU)
        } else {
            -(a1 - a2).rem_euclid(TAU)
        };
        out.push(Segment::Arc {
            center: c,
            radius: r,
            start_angle: a1,
            sweep,
        });
        cursor = c + C64::from_polar(r, a1 + sweep);
    }
    out.push(Segment::Line { from: cursor, to });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn arc_geometry() {
        let arc = Segment::Arc {
            center: c(1.0, 1.0),
            radius: 2.0,
            start_angle: 0.0,
            sweep: PI / 2.0,
        };
        assert!((arc.start() - c(3.0, 1.0)).norm() < 1e-15);
        assert!((arc.end() - c(1.0, 3.0)).norm() < 1e-15);
        assert!((arc.point(arc.length()) - arc.end()).norm() < 1e-14);
        assert!((arc.tangent(0.0) - c(0.0, 1.0)).norm() < 1e-15);
        assert!((arc.distance_to(c(1.0, 1.0)) - 2.0).abs() < 1e-15);
        // point behind the arc: nearest is an endpoint
        assert!((arc.distance_to(c(1.0, -2.0)) - (c(1.0, -2.0) - c(3.0, 1.0)).norm()).abs() < 1e-14);
        let back = arc.reversed();
        assert!((back.start() - arc.end()).norm() < 1e-14);
        assert!((back.end() - arc.start()).norm() < 1e-14);
    }

    #[test]
    fn disconnected_path_rejected() {
        let err = ContourPath::new(
            vec![
                Segment::Line { from: c(0.0, 0.0), to: c(1.0, 0.0) },
                Segment::Line { from: c(1.1, 0.0), to: c(2.0, 0.0) },
            ],
            0.1,
        )
        .unwrap_err();
        assert_eq!(err, Error::Disconnected { segment: 0, next: 1 });
    }

    #[test]
    fn clearance_detects_nearby_point() {
        let path = ContourPath::new(vec![Segment::Line { from: c(-1.0, 0.0), to: c(1.0, 0.0) }], 0.2).unwrap();
        assert!(path.check_clearance(&[c(0.0, 0.5)]).is_ok());
        assert!(matches!(
            path.check_clearance(&[c(5.0, 0.0), c(0.0, 0.1)]),
            Err(Error::Clearance { segment: 0, point: 1, .. })
        ));
    }

    #[test]
    fn detour_keeps_side_and_clearance() {
        let disks = [(c(1.0, 0.1), 0.3), (c(2.0, -0.05), 0.3)];
        let segs = detoured_line(c(0.0, 0.0), c(3.0, 0.0), &disks);
        let path = ContourPath::new(segs, 0.29).unwrap();
        path.check_clearance(&[disks[0].0, disks[1].0]).unwrap();
        // closing with the straight return line: a point on the left is encircled
        // clockwise by (detour, back) exactly when the detour passes to its right.
        let back = ContourPath::new(vec![Segment::Line { from: c(3.0, 0.0), to: c(0.0, 0.0) }], 0.01).unwrap();
        let closed = path.then(&back).unwrap();
        assert!(closed.winding_number(disks[0].0).abs() < 1e-9);
        assert!(closed.winding_number(disks[1].0).abs() < 1e-9);
    }

    #[test]
    fn winding_of_circle() {
        let path = ContourPath::new(vec![Segment::circle(c(0.0, 0.0), 1.0, 0.3)], 0.1).unwrap();
        assert!((path.winding_number(c(0.2, 0.1)) - 1.0).abs() < 1e-9);
        assert!(path.winding_number(c(3.0, 0.0)).abs() < 1e-9);
        assert!((path.reversed().winding_number(c(0.0, 0.0)) + 1.0).abs() < 1e-9);
    }
}
