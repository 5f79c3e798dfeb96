//! Oscillation transform `ω(f, ε)(x) = sup |f(t) − f(s)|` over
//! `t, s ∈ [x − ε, x + ε] ∩ [0,1]`.
//!
//! `ω = U − L` where `U`/`L` are the window max/min of `f`. The domain is cut
//! at `{0, 1} ∪ {p_k} ∪ {p_k ± ε}` (clamped). Inside one cell the set of
//! breakpoints in the window is fixed and both clamped window ends move along
//! a single segment of `f`, so `U` is the upper envelope of three lines: the
//! two end traces and the largest breakpoint value in the window. The window
//! sets slide monotonically from cell to cell and are tracked with monotone
//! deques.

use std::collections::VecDeque;

use super::{lerp, PolygonalFunction};
use crate::error::PolygonError;
use crate::numerals::Rational;

/// Sliding-window extremum over indices with values `keys[i]`.
struct MonotoneDeque {
    idx: VecDeque<usize>,
    keep_max: bool,
}

impl MonotoneDeque {
    fn new(keep_max: bool) -> Self {
        MonotoneDeque { idx: VecDeque::new(), keep_max }
    }

    fn push(&mut self, i: usize, keys: &[&Rational]) {
        while let Some(&back) = self.idx.back() {
            let dominated = if self.keep_max { keys[back] <= keys[i] } else { keys[back] >= keys[i] };
            if dominated {
                self.idx.pop_back();
            } else {
                break;
            }
        }
        self.idx.push_back(i);
    }

    fn expire_below(&mut self, first_live: usize) {
        while matches!(self.idx.front(), Some(&f) if f < first_live) {
            self.idx.pop_front();
        }
    }

    fn front(&self) -> Option<usize> {
        self.idx.front().copied()
    }
}

/// A line over the current cell, stored by its values at both cell ends.
type Line = (Rational, Rational);

/// Abscissae strictly inside `(c0, c1)` where two of `lines` cross.
fn crossings(c0: &Rational, c1: &Rational, lines: &[Line], out: &mut Vec<Rational>) {
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let d0 = &lines[i].0 - &lines[j].0;
            let d1 = &lines[i].1 - &lines[j].1;
            if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                let t = &d0 / &(&d0 - &d1);
                out.push(c0 + &((c1 - c0) * t));
            }
        }
    }
}

pub(super) fn oscillation(f: &PolygonalFunction, eps: &Rational) -> Result<PolygonalFunction, PolygonError> {
    if !eps.is_positive() {
        return Err(PolygonError::Parameter(format!("oscillation window must be positive, got {eps}")));
    }
    let pts = f.points();
    if f.is_constant() {
        return Ok(PolygonalFunction::zero());
    }
    let xs: Vec<&Rational> = pts.iter().map(|p| &p.0).collect();
    let ys: Vec<&Rational> = pts.iter().map(|p| &p.1).collect();

    let mut cells: Vec<Rational> = Vec::with_capacity(3 * xs.len());
    for x in &xs {
        cells.push((*x).clone());
        cells.push((*x - eps).clamp_unit());
        cells.push((*x + eps).clamp_unit());
    }
    cells.sort();
    cells.dedup();

    let zero = Rational::zero();
    let one = Rational::one();
    let left_trace = |c: &Rational| f.eval_unchecked(&(c - eps).max(zero.clone()));
    let right_trace = |c: &Rational| f.eval_unchecked(&(c + eps).min(one.clone()));

    let mut hi_q = MonotoneDeque::new(true);
    let mut lo_q = MonotoneDeque::new(false);
    let (mut next_in, mut first_live) = (0usize, 0usize);
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(cells.len() * 2);
    let last_cell = cells.len() - 2;

    for (ci, cell) in cells.windows(2).enumerate() {
        let (c0, c1) = (&cell[0], &cell[1]);
        // breakpoints in every window centred inside this cell
        let hi = c0 + eps;
        let lo = c1 - eps;
        while next_in < xs.len() && xs[next_in] <= &hi {
            hi_q.push(next_in, &ys);
            lo_q.push(next_in, &ys);
            next_in += 1;
        }
        while first_live < xs.len() && xs[first_live] < &lo {
            first_live += 1;
        }
        hi_q.expire_below(first_live);
        lo_q.expire_below(first_live);

        let ends: [Line; 2] = [(left_trace(c0), left_trace(c1)), (right_trace(c0), right_trace(c1))];
        let mut upper: Vec<Line> = ends.to_vec();
        let mut lower: Vec<Line> = ends.to_vec();
        if let Some(k) = hi_q.front() {
            upper.push((ys[k].clone(), ys[k].clone()));
        }
        if let Some(k) = lo_q.front() {
            lower.push((ys[k].clone(), ys[k].clone()));
        }

        let mut sample = vec![c0.clone()];
        crossings(c0, c1, &upper, &mut sample);
        crossings(c0, c1, &lower, &mut sample);
        if ci == last_cell {
            sample.push(c1.clone());
        }
        sample.sort();
        sample.dedup();
        for x in sample {
            let u = upper.iter().map(|l| lerp(c0, &l.0, c1, &l.1, &x)).max().expect("two traces");
            let v = lower.iter().map(|l| lerp(c0, &l.0, c1, &l.1, &x)).min().expect("two traces");
            out.push((x, u - v));
        }
    }
    Ok(PolygonalFunction::canonical(out))
}

/// Pointwise oscillation at a single `x` from the finite candidate set of
/// window ends and breakpoints inside the window. Independent of
/// [`PolygonalFunction::oscillation`].
pub fn oscillation_oracle_at(f: &PolygonalFunction, eps: &Rational, x: &Rational) -> Result<Rational, PolygonError> {
    if !eps.is_positive() {
        return Err(PolygonError::Parameter(format!("oscillation window must be positive, got {eps}")));
    }
    if !x.in_unit_interval() {
        return Err(PolygonError::Domain(x.clone()));
    }
    let lo = x - eps;
    let hi = x + eps;
    let mut values = vec![f.eval(&lo.clamp_unit())?, f.eval(&hi.clamp_unit())?];
    values.extend(f.points().iter().filter(|(p, _)| p >= &lo && p <= &hi).map(|(_, q)| q.clone()));
    let max = values.iter().max().expect("nonempty");
    let min = values.iter().min().expect("nonempty");
    Ok(max - min)
}
