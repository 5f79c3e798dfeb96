use crate::error::PolygonError;
use crate::numerals::Rational;

/// Tag placement rule for [`TaggedPartition::uniform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tagging {
    Left,
    Right,
    Midpoint,
}

/// Cuts `0 = x_0 < … < x_n = 1` with one tag per cell, `x_{i-1} ≤ t_i ≤ x_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedPartition {
    cuts: Vec<Rational>,
    tags: Vec<Rational>,
}

impl TaggedPartition {
    pub fn new(cuts: Vec<Rational>, tags: Vec<Rational>) -> Result<Self, PolygonError> {
        let bad = |msg: String| Err(PolygonError::Partition(msg));
        if cuts.len() < 2 {
            return bad("need at least one cell".into());
        }
        if !cuts[0].is_zero() || cuts[cuts.len() - 1] != Rational::one() {
            return bad("cuts must start at 0 and end at 1".into());
        }
        if tags.len() != cuts.len() - 1 {
            return bad(format!("{} cells but {} tags", cuts.len() - 1, tags.len()));
        }
        for (i, w) in cuts.windows(2).enumerate() {
            if w[0] >= w[1] {
                return bad(format!("cuts not strictly increasing at cell {i}"));
            }
            if tags[i] < w[0] || tags[i] > w[1] {
                return bad(format!("tag {} outside cell [{}, {}]", tags[i], w[0], w[1]));
            }
        }
        Ok(TaggedPartition { cuts, tags })
    }

    /// `n` equal cells.
    pub fn uniform(n: u32, tagging: Tagging) -> Self {
        assert!(n > 0, "uniform partition needs at least one cell");
        let cuts: Vec<Rational> = (0..=n).map(|i| Rational::new(i, n)).collect();
        let tags = cuts
            .windows(2)
            .map(|w| match tagging {
                Tagging::Left => w[0].clone(),
                Tagging::Right => w[1].clone(),
                Tagging::Midpoint => w[0].midpoint(&w[1]),
            })
            .collect();
        TaggedPartition { cuts, tags }
    }

    pub fn cuts(&self) -> &[Rational] {
        &self.cuts
    }

    pub fn tags(&self) -> &[Rational] {
        &self.tags
    }

    pub fn widths(&self) -> impl Iterator<Item = Rational> + '_ {
        self.cuts.windows(2).map(|w| &w[1] - &w[0])
    }

    pub fn mesh(&self) -> Rational {
        self.widths().max().expect("at least one cell")
    }
}
