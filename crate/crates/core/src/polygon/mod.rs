//! Polygonal functions on `[0,1]`: continuous, piecewise linear, with rational
//! breakpoints and values, kept in a canonical form so that equality is list
//! equality.

mod oscillation;
mod partition;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::PolygonError;
use crate::numerals::Rational;

pub use oscillation::oscillation_oracle_at;
pub use partition::{Tagging, TaggedPartition};

/// Which side of a level a strict inequality keeps `f` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

/// Invariants: `points[0].0 == 0`, `points.last().0 == 1`, strictly
/// increasing abscissae, at least two points, and no interior point collinear
/// with its neighbours.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPolygon")]
pub struct PolygonalFunction {
    points: Vec<(Rational, Rational)>,
}

#[derive(Deserialize)]
struct RawPolygon {
    points: Vec<(Rational, Rational)>,
}

impl TryFrom<RawPolygon> for PolygonalFunction {
    type Error = PolygonError;
    fn try_from(raw: RawPolygon) -> Result<Self, Self::Error> {
        PolygonalFunction::new(raw.points)
    }
}

impl std::fmt::Debug for PolygonalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Polygon[")?;
        for (i, (x, y)) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        f.write_str("]")
    }
}

fn collinear(a: &(Rational, Rational), b: &(Rational, Rational), c: &(Rational, Rational)) -> bool {
    (&b.1 - &a.1) * (&c.0 - &b.0) == (&c.1 - &b.1) * (&b.0 - &a.0)
}

/// Value at `x` of the line through `(x0, y0)` and `(x1, y1)`, `x0 < x1`.
pub(crate) fn lerp(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational, x: &Rational) -> Rational {
    if x == x0 {
        return y0.clone();
    }
    if x == x1 {
        return y1.clone();
    }
    (y1 * (x - x0) + y0 * (x1 - x)) / (x1 - x0)
}

/// Sorted union of two sorted, duplicate-free lists.
pub(crate) fn merge_sorted(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl PolygonalFunction {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self, PolygonError> {
        let first = points.first().ok_or(PolygonError::Empty)?;
        if !first.0.is_zero() {
            return Err(PolygonError::BadStart(first.0.clone()));
        }
        for p in &points {
            if !p.0.in_unit_interval() {
                return Err(PolygonError::OutOfRange(p.0.clone()));
            }
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(PolygonError::NotIncreasing { prev: w[0].0.clone(), next: w[1].0.clone() });
            }
        }
        let last = points.last().expect("nonempty");
        if last.0 != Rational::one() {
            return Err(PolygonError::BadEnd(last.0.clone()));
        }
        Ok(Self::canonical(points))
    }

    /// Drops interior points collinear with their neighbours. Input must
    /// already satisfy the ordering invariants.
    fn canonical(points: Vec<(Rational, Rational)>) -> Self {
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
        for p in points {
            while out.len() >= 2 && collinear(&out[out.len() - 2], &out[out.len() - 1], &p) {
                out.pop();
            }
            out.push(p);
        }
        debug_assert!(out.len() >= 2);
        PolygonalFunction { points: out }
    }

    /// Builds the polygon interpolating `value` at the given abscissae, which
    /// are clipped to `[0,1]` and completed with both endpoints. Only correct
    /// when `value` is linear between consecutive kept abscissae.
    pub(crate) fn from_formula(mut xs: Vec<Rational>, value: impl Fn(&Rational) -> Rational) -> Self {
        xs.retain(|x| x.in_unit_interval());
        xs.push(Rational::zero());
        xs.push(Rational::one());
        xs.sort();
        xs.dedup();
        let pts = xs.into_iter().map(|x| {
            let y = value(&x);
            (x, y)
        });
        Self::canonical(pts.collect())
    }

    pub fn constant(c: Rational) -> Self {
        PolygonalFunction { points: vec![(Rational::zero(), c.clone()), (Rational::one(), c)] }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn identity() -> Self {
        PolygonalFunction { points: vec![(Rational::zero(), Rational::zero()), (Rational::one(), Rational::one())] }
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|p| &p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|p| &p.1)
    }

    pub fn xs(&self) -> Vec<Rational> {
        self.breakpoints().cloned().collect()
    }

    pub fn is_constant(&self) -> bool {
        self.points.len() == 2 && self.points[0].1 == self.points[1].1
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, PolygonError> {
        if !x.in_unit_interval() {
            return Err(PolygonError::Domain(x.clone()));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation for `x` known to be in `[0,1]`.
    pub(crate) fn eval_unchecked(&self, x: &Rational) -> Rational {
        let pts = &self.points;
        match pts.binary_search_by(|p| p.0.cmp(x)) {
            Ok(i) => pts[i].1.clone(),
            Err(i) => {
                debug_assert!(i > 0 && i < pts.len());
                let (x0, y0) = &pts[i - 1];
                let (x1, y1) = &pts[i];
                lerp(x0, y0, x1, y1, x)
            }
        }
    }

    /// Values at an ascending list of abscissae in `[0,1]`, in one pass.
    pub fn sample_sorted(&self, xs: &[Rational]) -> Vec<Rational> {
        let pts = &self.points;
        let mut seg = 1;
        xs.iter()
            .map(|x| {
                while seg + 1 < pts.len() && &pts[seg].0 < x {
                    seg += 1;
                }
                let (x0, y0) = &pts[seg - 1];
                let (x1, y1) = &pts[seg];
                lerp(x0, y0, x1, y1, x)
            })
            .collect()
    }

    pub fn integral(&self) -> Rational {
        let two = Rational::from(2);
        self.points
            .windows(2)
            .map(|w| (&w[1].1 + &w[0].1) * (&w[1].0 - &w[0].0) / &two)
            .sum()
    }

    pub fn min_value(&self) -> Rational {
        self.values().min().expect("nonempty").clone()
    }

    pub fn max_value(&self) -> Rational {
        self.values().max().expect("nonempty").clone()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PolygonalFunction { points: self.points.iter().map(|(x, y)| (x.clone(), y * c)).collect() }
    }

    /// `a·f + b·g` on the merged breakpoints.
    pub fn affine_combine(&self, other: &Self, a: &Rational, b: &Rational) -> Self {
        let xs = merge_sorted(&self.xs(), &other.xs());
        let fv = self.sample_sorted(&xs);
        let gv = other.sample_sorted(&xs);
        let pts = xs
            .into_iter()
            .zip(fv.iter().zip(&gv))
            .map(|(x, (f, g))| (x, a * f + b * g))
            .collect();
        Self::canonical(pts)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.affine_combine(other, &Rational::one(), &Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.affine_combine(other, &Rational::one(), &-Rational::one())
    }

    fn lattice(&self, other: &Self, pick_max: bool) -> Self {
        let xs = merge_sorted(&self.xs(), &other.xs());
        let fv = self.sample_sorted(&xs);
        let gv = other.sample_sorted(&xs);
        let pick = |f: &Rational, g: &Rational| {
            if (f >= g) == pick_max {
                f.clone()
            } else {
                g.clone()
            }
        };
        let mut pts = Vec::with_capacity(xs.len() * 2);
        for i in 0..xs.len() {
            if i > 0 {
                let d0 = &fv[i - 1] - &gv[i - 1];
                let d1 = &fv[i] - &gv[i];
                if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                    // f - g changes sign strictly inside the segment
                    let t = &d0 / (&d0 - &d1);
                    let x = &xs[i - 1] + &(&xs[i] - &xs[i - 1]) * &t;
                    let y = lerp(&xs[i - 1], &fv[i - 1], &xs[i], &fv[i], &x);
                    pts.push((x, y));
                }
            }
            pts.push((xs[i].clone(), pick(&fv[i], &gv[i])));
        }
        Self::canonical(pts)
    }

    /// Pointwise maximum.
    pub fn lattice_sup(&self, other: &Self) -> Self {
        self.lattice(other, true)
    }

    /// Pointwise minimum.
    pub fn lattice_inf(&self, other: &Self) -> Self {
        self.lattice(other, false)
    }

    /// True iff `self ≤ other` everywhere (checked at merged breakpoints, which
    /// suffices for piecewise linear functions).
    pub fn le_everywhere(&self, other: &Self) -> bool {
        let xs = merge_sorted(&self.xs(), &other.xs());
        self.sample_sorted(&xs).iter().zip(other.sample_sorted(&xs)).all(|(f, g)| f <= &g)
    }

    /// `α·max(0, 1 − |x − ζ|/β)` restricted to `[0,1]`.
    pub fn bump(alpha: &Rational, beta: &Rational, zeta: &Rational) -> Result<Self, PolygonError> {
        if !alpha.is_positive() {
            return Err(PolygonError::Parameter(format!("bump height must be positive, got {alpha}")));
        }
        if !beta.is_positive() {
            return Err(PolygonError::Parameter(format!("bump half-width must be positive, got {beta}")));
        }
        if !zeta.is_positive() || zeta >= &Rational::one() {
            return Err(PolygonError::Parameter(format!("bump centre must lie in (0,1), got {zeta}")));
        }
        let xs = vec![zeta - beta, zeta.clone(), zeta + beta];
        Ok(Self::from_formula(xs, |x| {
            let t = Rational::one() - (x - zeta).abs() / beta;
            alpha * &t.max(Rational::zero())
        }))
    }

    /// `min(1, max(0, 2 − |2x − b − a|/(b − a)))` restricted to `[0,1]`:
    /// plateau 1 on `[a,b]`, linear ramps reaching 0 half an interval length
    /// outside it.
    pub fn trapezoid_phi(a: &Rational, b: &Rational) -> Result<Self, PolygonError> {
        if a >= b {
            return Err(PolygonError::Parameter(format!("trapezoid needs a < b, got ({a}, {b})")));
        }
        let len = b - a;
        let half = &len / &Rational::from(2);
        let xs = vec![a - &half, a.clone(), b.clone(), b + &half];
        let two = Rational::from(2);
        Ok(Self::from_formula(xs, |x| {
            let t = &two - (&(&two * x) - b - a).abs() / &len;
            t.max(Rational::zero()).min(Rational::one())
        }))
    }

    /// Exact supremum of radii `ρ` such that `f < c` (or `f > c`) on
    /// `[x0 − ρ, x0 + ρ] ∩ [0,1]`. When the inequality holds on all of
    /// `[0,1]` the sentinel `max(x0, 1 − x0)` is returned.
    pub fn strict_level_radius(&self, x0: &Rational, c: &Rational, side: Side) -> Result<Rational, PolygonError> {
        if !x0.in_unit_interval() {
            return Err(PolygonError::Domain(x0.clone()));
        }
        // work with g = ±(f − c), which must stay negative
        let sign = match side {
            Side::Below => Rational::one(),
            Side::Above => -Rational::one(),
        };
        let g = |y: &Rational| &sign * &(y - c);
        let v0 = g(&self.eval_unchecked(x0));
        if !v0.is_negative() {
            return Err(PolygonError::Parameter(format!(
                "level radius precondition fails: f({x0}) is not strictly {} {c}",
                if side == Side::Below { "below" } else { "above" }
            )));
        }
        let crossing = |xa: &Rational, va: &Rational, xb: &Rational, vb: &Rational| -> Rational {
            // va < 0 <= vb
            xa + &((xb - xa) * (-va) / (vb - va))
        };
        let mut right = None;
        let (mut xa, mut va) = (x0.clone(), v0.clone());
        for (x, y) in self.points.iter().filter(|p| &p.0 > x0) {
            let v = g(y);
            if !v.is_negative() {
                right = Some(crossing(&xa, &va, x, &v) - x0);
                break;
            }
            xa = x.clone();
            va = v;
        }
        let mut left = None;
        let (mut xa, mut va) = (x0.clone(), v0);
        for (x, y) in self.points.iter().rev().filter(|p| &p.0 < x0) {
            let v = g(y);
            if !v.is_negative() {
                // mirror: distance from x0 to the crossing on the left
                let t = (&xa - x) * (-&va) / (&v - &va);
                left = Some(&(x0 - &xa) + &t);
                break;
            }
            xa = x.clone();
            va = v;
        }
        Ok(match (left, right) {
            (None, None) => x0.clone().max(Rational::one() - x0),
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (Some(l), Some(r)) => l.min(r),
        })
    }

    /// Pointwise oscillation over the window `[x − ε, x + ε] ∩ [0,1]`.
    pub fn oscillation(&self, eps: &Rational) -> Result<Self, PolygonError> {
        oscillation::oscillation(self, eps)
    }

    pub fn riemann_sum(&self, tau: &TaggedPartition) -> Rational {
        let vals = self.sample_sorted(tau.tags());
        tau.widths().zip(&vals).map(|(w, v)| w * v).sum()
    }

    /// Rows `(x, f(x))` at every breakpoint plus `refine` evenly spaced extra
    /// abscissae per unit interval split, for plotting.
    pub fn plot_rows(&self, refine: u32) -> Vec<(Rational, Rational)> {
        let mut xs = self.xs();
        if refine > 0 {
            let grid: Vec<Rational> = (0..=refine).map(|i| Rational::new(i, refine)).collect();
            xs = merge_sorted(&xs, &grid);
        }
        let ys = self.sample_sorted(&xs);
        xs.into_iter().zip(ys).collect()
    }
}
