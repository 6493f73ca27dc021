//! Geometric and temporal value types shared by every index level.
//!
//! Intervals, windows and segments are all closed sets: touching counts as
//! intersecting, and `[t, t]` is a valid (time-slice) interval.

use std::fmt;

use crate::error::{Error, Result};

/// Discretized timestamp.
pub type Tick = u64;
/// Dense network edge identifier.
pub type SegmentId = u32;
/// Moving-object identifier.
pub type ObjectId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!(
                "point ({x}, {y}) has a non-finite coordinate"
            )));
        }
        Ok(Point { x, y })
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub id: SegmentId,
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(id: SegmentId, a: Point, b: Point) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInput(format!("segment {id} has zero length")));
        }
        Ok(Segment { id, a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn mbb(&self) -> Rect {
        mbb_of_segment(self)
    }
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite || xmin > xmax || ymin > ymax {
            return Err(Error::InvalidInput(format!(
                "rectangle ({xmin}, {ymin}, {xmax}, {ymax}) is not well formed"
            )));
        }
        Ok(Rect {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.xmin <= other.xmax
            && other.xmin <= self.xmax
            && self.ymin <= other.ymax
            && other.ymin <= self.ymax
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.xmin <= p.x && p.x <= self.xmax && self.ymin <= p.y && p.y <= self.ymax
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.xmin <= other.xmin
            && self.ymin <= other.ymin
            && other.xmax <= self.xmax
            && other.ymax <= self.ymax
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            xmin: self.xmin.min(other.xmin),
            ymin: self.ymin.min(other.ymin),
            xmax: self.xmax.max(other.xmax),
            ymax: self.ymax.max(other.ymax),
        }
    }

    pub fn center(&self) -> Point {
        Point {
            x: 0.5 * (self.xmin + self.xmax),
            y: 0.5 * (self.ymin + self.ymax),
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

/// Closed real-valued time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() || start < 0.0 || start > end {
            return Err(Error::InvalidInput(format!(
                "time interval [{start}, {end}] must satisfy 0 <= start <= end"
            )));
        }
        Ok(TimeInterval { start, end })
    }

    pub fn discretize(&self, scale: ScaleConfig) -> Result<TickInterval> {
        TickInterval::new(
            discretize_time(self.start, scale)?,
            discretize_time(self.end, scale)?,
        )
    }
}

/// Closed interval over the discretized time universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TickInterval {
    pub start: Tick,
    pub end: Tick,
}

impl TickInterval {
    pub fn new(start: Tick, end: Tick) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidInput(format!(
                "tick interval [{start}, {end}] has start after end"
            )));
        }
        Ok(TickInterval { start, end })
    }

    /// Closed-interval intersection with `[l, r]`.
    #[inline]
    pub fn intersects(&self, l: Tick, r: Tick) -> bool {
        self.start <= r && self.end >= l
    }

    /// `self` covers `other` (non-strict on both ends).
    #[inline]
    pub fn contains(&self, other: &TickInterval) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for TickInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// One object's traversal of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRecord {
    pub object_id: ObjectId,
    pub interval: TimeInterval,
}

impl IntervalRecord {
    pub fn new(object_id: ObjectId, interval: TimeInterval) -> Self {
        IntervalRecord {
            object_id,
            interval,
        }
    }
}

/// Number of decimal digits preserved when timestamps become ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScaleConfig {
    digits: u8,
}

impl ScaleConfig {
    pub const MAX_DIGITS: u8 = 8;

    pub fn new(digits: u8) -> Result<Self> {
        if digits > Self::MAX_DIGITS {
            return Err(Error::Config(format!(
                "scale digits must be in 0..={}, got {digits}",
                Self::MAX_DIGITS
            )));
        }
        Ok(ScaleConfig { digits })
    }

    pub fn digits(&self) -> u8 {
        self.digits
    }

    /// `10^digits`.
    pub fn factor(&self) -> u64 {
        10u64.pow(self.digits as u32)
    }

    /// Converts a tick back to a timestamp (the lower edge of its bucket).
    pub fn tick_to_time(&self, tick: Tick) -> f64 {
        tick as f64 / self.factor() as f64
    }
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig {
            digits: Self::MAX_DIGITS,
        }
    }
}

/// `floor(t * 10^digits)`.
///
/// The product is nudged up by four ulps before flooring so that decimal
/// inputs such as `0.29` with two digits land on `29` instead of `28`; the
/// nudge is a monotone map, so order is preserved.
pub fn discretize_time(t: f64, scale: ScaleConfig) -> Result<Tick> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "timestamp {t} must be finite and non-negative"
        )));
    }
    let scaled = t * scale.factor() as f64;
    let ticks = (scaled * (1.0 + 4.0 * f64::EPSILON)).floor();
    if ticks >= u64::MAX as f64 {
        return Err(Error::InvalidInput(format!(
            "timestamp {t} overflows the tick universe at {} digits",
            scale.digits()
        )));
    }
    Ok(ticks as Tick)
}

pub fn mbb_of_segment(s: &Segment) -> Rect {
    Rect {
        xmin: s.a.x.min(s.b.x),
        ymin: s.a.y.min(s.b.y),
        xmax: s.a.x.max(s.b.x),
        ymax: s.a.y.max(s.b.y),
    }
}

/// Exact closed segment / closed rectangle test (Liang-Barsky clipping).
pub fn segment_intersects_window(s: &Segment, w: &Rect) -> bool {
    if !s.mbb().overlaps(w) {
        return false;
    }
    let dx = s.b.x - s.a.x;
    let dy = s.b.y - s.a.y;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let edges = [
        (-dx, s.a.x - w.xmin),
        (dx, w.xmax - s.a.x),
        (-dy, s.a.y - w.ymin),
        (dy, w.ymax - s.a.y),
    ];
    for (p, q) in edges {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
            continue;
        }
        let t = q / p;
        if p < 0.0 {
            if t > t1 {
                return false;
            }
            t0 = t0.max(t);
        } else {
            if t < t0 {
                return false;
            }
            t1 = t1.min(t);
        }
    }
    t0 <= t1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> Segment {
        Segment::new(0, Point::new(x0, y0).unwrap(), Point::new(x1, y1).unwrap()).unwrap()
    }

    fn rect(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Rect {
        Rect::new(xmin, ymin, xmax, ymax).unwrap()
    }

    fn digits(d: u8) -> ScaleConfig {
        ScaleConfig::new(d).unwrap()
    }

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize_time(1.2345678, digits(6)).unwrap(), 1_234_567);
        assert_eq!(discretize_time(0.0, digits(8)).unwrap(), 0);
        assert_eq!(discretize_time(2.5, digits(0)).unwrap(), 2);
    }

    #[test]
    fn discretize_decimal_literals_land_on_their_tick() {
        assert_eq!(discretize_time(0.29, digits(2)).unwrap(), 29);
        assert_eq!(discretize_time(0.57, digits(2)).unwrap(), 57);
        assert_eq!(
            discretize_time(99.99999999, digits(8)).unwrap(),
            9_999_999_999
        );
    }

    #[test]
    fn discretize_rejects_bad_timestamps() {
        assert!(discretize_time(-0.5, digits(2)).is_err());
        assert!(discretize_time(f64::NAN, digits(2)).is_err());
        assert!(discretize_time(f64::INFINITY, digits(2)).is_err());
        assert!(ScaleConfig::new(9).is_err());
    }

    #[test]
    fn mbb_examples() {
        assert_eq!(seg(0., 0., 10., 5.).mbb(), rect(0., 0., 10., 5.));
        assert_eq!(seg(3., 7., 3., 2.).mbb(), rect(3., 2., 3., 7.));
        assert_eq!(seg(1., 1., 0., 0.).mbb(), rect(0., 0., 1., 1.));
    }

    #[test]
    fn window_examples() {
        assert!(segment_intersects_window(
            &seg(0., 0., 10., 10.),
            &rect(2., 0., 4., 10.)
        ));
        assert!(!segment_intersects_window(
            &seg(0., 0., 1., 0.),
            &rect(2., 2., 3., 3.)
        ));
        assert!(segment_intersects_window(
            &seg(2.5, 2.5, 2.6, 2.6),
            &rect(2., 2., 3., 3.)
        ));
    }

    #[test]
    fn window_false_positive_of_mbb_is_rejected() {
        // The diagonal passes below the top-left corner window.
        let s = seg(0., 0., 10., 10.);
        let w = rect(0., 8., 1., 10.);
        assert!(s.mbb().overlaps(&w));
        assert!(!segment_intersects_window(&s, &w));
    }

    #[test]
    fn window_touching_counts() {
        assert!(segment_intersects_window(
            &seg(0., 0., 2., 0.),
            &rect(2., -1., 3., 1.)
        ));
        assert!(segment_intersects_window(
            &seg(0., 0., 2., 2.),
            &rect(1., 1., 1., 1.)
        ));
        assert!(segment_intersects_window(
            &seg(0., 1., 4., 1.),
            &rect(1., 1., 2., 3.)
        ));
    }

    #[test]
    fn invalid_constructors() {
        let p = Point::new(1.0, 1.0).unwrap();
        assert!(Segment::new(1, p, p).is_err());
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(TimeInterval::new(2.0, 1.0).is_err());
        assert!(TimeInterval::new(-1.0, 1.0).is_err());
        assert!(Point::new(f64::NAN, 0.0).is_err());
    }

    /// Samples `n` evenly spaced points along the segment.
    fn sampled_hit(s: &Segment, w: &Rect, n: usize) -> bool {
        (0..=n).any(|i| {
            let t = i as f64 / n as f64;
            let p = Point {
                x: s.a.x + t * (s.b.x - s.a.x),
                y: s.a.y + t * (s.b.y - s.a.y),
            };
            w.contains_point(&p)
        })
    }

    proptest! {
        #[test]
        fn discretize_is_monotone(a in 0.0f64..1e3, b in 0.0f64..1e3, d in 0u8..=8) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(discretize_time(lo, digits(d)).unwrap() <= discretize_time(hi, digits(d)).unwrap());
        }

        #[test]
        fn window_test_agrees_with_point_sampling(
            x0 in -10.0f64..10.0, y0 in -10.0f64..10.0,
            x1 in -10.0f64..10.0, y1 in -10.0f64..10.0,
            wx in -10.0f64..10.0, wy in -10.0f64..10.0,
            ww in 0.0f64..8.0, wh in 0.0f64..8.0,
        ) {
            prop_assume!((x0, y0) != (x1, y1));
            let s = seg(x0, y0, x1, y1);
            let w = rect(wx, wy, wx + ww, wy + wh);
            let exact = segment_intersects_window(&s, &w);
            if exact {
                prop_assert!(s.mbb().overlaps(&w));
            }
            if sampled_hit(&s, &w, 10_000) {
                prop_assert!(exact);
            }
            if exact {
                // Only sampling resolution may hide a true hit.
                let slack = s.length() / 10_000.0;
                let grown = rect(w.xmin - slack, w.ymin - slack, w.xmax + slack, w.ymax + slack);
                prop_assert!(sampled_hit(&s, &grown, 10_000));
            }
        }
    }
}
