//! Seeded randomized sweeps over the polygon primitives. Cases are drawn
//! sequentially from a ChaCha stream, then checked through [`Exec`], so the
//! report is the same for a given seed in either execution mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exec::Exec;
use crate::numerals::{rat, Rational};
use crate::polygon::{oscillation_oracle_at, PolygonalFunction, TaggedPartition};

/// Largest denominator used for random coordinates.
pub const MAX_DENOM: i64 = 32;
/// Most breakpoints a random polygon gets, endpoints included.
pub const MAX_BREAKPOINTS: usize = 12;

pub fn sweep_eps() -> Vec<Rational> {
    vec![rat(1, 32), rat(1, 8), rat(1, 2), rat(2, 1)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub sweep: &'static str,
    pub seed: u64,
    pub cases: usize,
    pub comparisons: usize,
    pub violations: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn collect(sweep: &'static str, seed: u64, cases: usize, results: Vec<(usize, Vec<String>)>) -> Self {
        let comparisons = results.iter().map(|r| r.0).sum();
        let violations = results.into_iter().flat_map(|r| r.1).collect();
        SweepReport { sweep, seed, cases, comparisons, violations }
    }
}

fn random_fraction(rng: &mut impl Rng, lo: i64, hi: i64) -> Rational {
    // p/q with q ≤ MAX_DENOM and lo ≤ p/q ≤ hi
    let q = rng.random_range(1..=MAX_DENOM);
    rat(rng.random_range(lo * q..=hi * q), q)
}

/// Polygon with at most [`MAX_BREAKPOINTS`] breakpoints and values in
/// `[-2, 2]`, all with denominators at most [`MAX_DENOM`].
pub fn random_polygon(rng: &mut impl Rng) -> PolygonalFunction {
    let interior = rng.random_range(0..=MAX_BREAKPOINTS - 2);
    let mut xs: Vec<Rational> = (0..interior)
        .map(|_| {
            let q = rng.random_range(2..=MAX_DENOM);
            rat(rng.random_range(1..q), q)
        })
        .collect();
    xs.push(rat(0, 1));
    xs.push(rat(1, 1));
    xs.sort();
    xs.dedup();
    let points = xs.into_iter().map(|x| (x, random_fraction(rng, -2, 2))).collect();
    PolygonalFunction::new(points).expect("sorted distinct abscissae from 0 to 1")
}

/// Tagged partition whose cells are all at most `mesh` wide.
pub fn random_partition(rng: &mut impl Rng, mesh: &Rational) -> TaggedPartition {
    let one = Rational::one();
    let mut cuts = vec![Rational::zero()];
    let mut tags = Vec::new();
    while cuts.last().unwrap() < &one {
        let left = cuts.last().unwrap().clone();
        let width = mesh * &rat(rng.random_range(1..=8), 8);
        let right = (&left + &width).min(one.clone());
        let tag = &left + &((&right - &left) * rat(rng.random_range(0..=4), 4));
        tags.push(tag);
        cuts.push(right);
    }
    TaggedPartition::new(cuts, tags).expect("cuts increase from 0 to 1 with tags inside")
}

/// `ω(f, ε)` against the pointwise oracle at every breakpoint of `ω` and
/// the midpoint of every cell.
pub fn omega_sweep(seed: u64, count: usize, exec: Exec) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<PolygonalFunction> = (0..count).map(|_| random_polygon(&mut rng)).collect();
    let eps = sweep_eps();
    let results = exec.map_range(cases.len(), |i| {
        let f = &cases[i];
        let mut checked = 0;
        let mut bad = Vec::new();
        for e in &eps {
            let omega = f.oscillation(e).expect("positive window");
            let xs = omega.xs();
            let mids = xs.windows(2).map(|w| w[0].midpoint(&w[1]));
            for x in xs.iter().cloned().chain(mids) {
                checked += 1;
                let fast = omega.eval_unchecked(&x);
                let slow = oscillation_oracle_at(f, e, &x).expect("x in [0,1]");
                if fast != slow {
                    bad.push(format!("case {i}, ε = {e}, x = {x}: ω = {fast}, oracle = {slow}, f = {f:?}"));
                }
            }
        }
        (checked, bad)
    });
    SweepReport::collect("omega", seed, count, results)
}

/// `|I(f, τ) − ∫f| ≤ ∫ω(f, ε)` for random partitions of mesh at most `ε`.
pub fn partition_sweep(seed: u64, count: usize, exec: Exec) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = sweep_eps();
    let cases: Vec<(PolygonalFunction, Rational, TaggedPartition)> = (0..count)
        .map(|_| {
            let f = random_polygon(&mut rng);
            let e = eps[rng.random_range(0..eps.len())].clone();
            let tau = random_partition(&mut rng, &e);
            (f, e, tau)
        })
        .collect();
    let results = exec.map_range(cases.len(), |i| {
        let (f, e, tau) = &cases[i];
        let lhs = (f.riemann_sum(tau) - f.integral()).abs();
        let rhs = f.oscillation(e).expect("positive window").integral();
        let bad = if lhs > rhs { vec![format!("case {i}, ε = {e}: |I − ∫f| = {lhs} > ∫ω = {rhs}")] } else { Vec::new() };
        (1, bad)
    });
    SweepReport::collect("partition", seed, count, results)
}

/// `∫ω(bump(α, β, ζ), ε) ≤ 8αε`.
pub fn bump_sweep(seed: u64, count: usize, exec: Exec) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<[Rational; 4]> = (0..count)
        .map(|_| {
            let alpha = rat(rng.random_range(1..=64), rng.random_range(1..=MAX_DENOM));
            let beta = rat(rng.random_range(1..=MAX_DENOM), MAX_DENOM * rng.random_range(1..=8));
            let q = rng.random_range(2..=MAX_DENOM);
            let zeta = rat(rng.random_range(1..q), q);
            let eps = rat(rng.random_range(1..=MAX_DENOM), rng.random_range(1..=MAX_DENOM * 4));
            [alpha, beta, zeta, eps]
        })
        .collect();
    let results = exec.map_range(cases.len(), |i| {
        let [alpha, beta, zeta, e] = &cases[i];
        let b = PolygonalFunction::bump(alpha, beta, zeta).expect("valid bump parameters");
        let lhs = b.oscillation(e).expect("positive window").integral();
        let rhs = rat(8, 1) * alpha * e;
        let bad = if lhs > rhs { vec![format!("case {i}: α = {alpha}, β = {beta}, ζ = {zeta}, ε = {e}: {lhs} > {rhs}")] } else { Vec::new() };
        (1, bad)
    });
    SweepReport::collect("bump", seed, count, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f = random_polygon(&mut rng);
            assert!(f.points().len() <= MAX_BREAKPOINTS);
            let tau = random_partition(&mut rng, &rat(1, 8));
            assert!(tau.mesh() <= rat(1, 8));
        }
    }

    #[test]
    fn small_sweeps_pass_and_agree_across_modes() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert!(omega_sweep(3, 20, exec).passed());
            assert!(partition_sweep(3, 40, exec).passed());
            assert!(bump_sweep(3, 40, exec).passed());
        }
        assert_eq!(omega_sweep(5, 10, Exec::Sequential), omega_sweep(5, 10, Exec::Parallel));
        assert_ne!(partition_sweep(5, 10, Exec::Sequential).comparisons, 0);
    }
}
