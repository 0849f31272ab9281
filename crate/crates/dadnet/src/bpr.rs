//! Piecewise-linear model of the Bureau of Public Roads (BPR) congestion
//! aggregate.
//!
//! An arc with length `l` (mi), max speed `v` (mi/h) and capacity `u` (v/h)
//! has travel time `T(y) = (l/v) (1 + 0.15 (y/u)^4)` at flow `y`. The
//! operator objective prices the aggregate `y * T(y)` ((v/h)-h), which is
//! convex in `y`, through its chord interpolant on `[0, 2u]`: breakpoints at
//! every `r * eps` with `eps = 2u / n_pieces`, heights `t_r`, chord slopes
//! `alpha_r` and intercepts `xi_r <= 0`. The epigraph rows
//! `g >= alpha_r y + xi_r` then reproduce the interpolant exactly at the
//! breakpoints and bound the true aggregate from above in between (a chord
//! of a convex function lies above it on its own segment).

/// Chord pieces for one arc, precomputed once and shared by every model
/// referencing the arc.
#[derive(Debug, Clone, PartialEq)]
pub struct BprPieces {
    /// Breakpoint spacing `eps = 2u / n_pieces` (v/h).
    pub width: f64,
    /// Aggregate heights `t_r = r eps T(r eps)` for `r = 0..=n_pieces`.
    pub heights: Vec<f64>,
    /// Chord slopes `alpha_r = (t_r - t_{r-1}) / eps` for `r = 1..=n_pieces` (h).
    pub slopes: Vec<f64>,
    /// Intercepts `xi_r = t_r - alpha_r r eps` for `r = 1..=n_pieces`; always `<= 0`.
    pub intercepts: Vec<f64>,
}

/// BPR travel time `T(y)` in hours. Requires `capacity > 0` (enforced by
/// instance validation before any arc reaches this point).
pub fn bpr_time(length_mi: f64, speed_mph: f64, capacity_vph: f64, flow_vph: f64) -> f64 {
    let ratio = flow_vph / capacity_vph;
    (length_mi / speed_mph) * (1.0 + 0.15 * ratio.powi(4))
}

/// The aggregate `y * T(y)` in (v/h)-h.
pub fn bpr_aggregate(length_mi: f64, speed_mph: f64, capacity_vph: f64, flow_vph: f64) -> f64 {
    flow_vph * bpr_time(length_mi, speed_mph, capacity_vph, flow_vph)
}

/// Builds the chord pieces over `[0, 2 * capacity]`.
pub fn build_pieces(
    length_mi: f64,
    speed_mph: f64,
    capacity_vph: f64,
    n_pieces: usize,
) -> BprPieces {
    assert!(n_pieces >= 1, "at least one BPR piece");
    assert!(capacity_vph > 0.0, "positive capacity");
    let eps = 2.0 * capacity_vph / n_pieces as f64;
    let heights: Vec<f64> = (0..=n_pieces)
        .map(|r| {
            let y = r as f64 * eps;
            bpr_aggregate(length_mi, speed_mph, capacity_vph, y)
        })
        .collect();
    let slopes: Vec<f64> = (1..=n_pieces)
        .map(|r| (heights[r] - heights[r - 1]) / eps)
        .collect();
    let intercepts: Vec<f64> = (1..=n_pieces)
        .map(|r| heights[r] - slopes[r - 1] * r as f64 * eps)
        .collect();
    BprPieces {
        width: eps,
        heights,
        slopes,
        intercepts,
    }
}

impl BprPieces {
    pub fn n_pieces(&self) -> usize {
        self.slopes.len()
    }

    /// `max_r (alpha_r y + xi_r)`: what the LP's congestion variable settles
    /// to when its cost is positive.
    pub fn envelope(&self, y: f64) -> f64 {
        self.slopes
            .iter()
            .zip(&self.intercepts)
            .map(|(a, xi)| a * y + xi)
            .fold(0.0_f64, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 1.0;
    const V: f64 = 30.0;
    const U: f64 = 100.0;

    #[test]
    fn free_flow_time_at_zero() {
        assert_eq!(bpr_time(L, V, U, 0.0), L / V);
    }

    #[test]
    fn time_at_capacity_and_double() {
        // (1/30)(1 + 0.15) and (1/30)(1 + 0.15 * 16)
        assert!((bpr_time(L, V, U, 100.0) - 1.15 / 30.0).abs() < 1e-12);
        assert!((bpr_time(L, V, U, 200.0) - 3.4 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn heights_match_hand_values() {
        let p = build_pieces(L, V, U, 4);
        assert_eq!(p.width, 50.0);
        assert_eq!(p.heights[0], 0.0);
        // t_4 = 200 * T(200) = 200 * 3.4/30
        assert!((p.heights[4] - 200.0 * 3.4 / 30.0).abs() < 1e-9);
        assert!((p.heights[4] - 22.666_666_666).abs() < 1e-6);
    }

    #[test]
    fn envelope_exact_at_breakpoints() {
        for n in [1usize, 2, 4, 8] {
            let p = build_pieces(L, V, U, n);
            for r in 0..=n {
                let y = r as f64 * p.width;
                let want = p.heights[r];
                let got = p.envelope(y);
                let scale = want.abs().max(1.0);
                assert!(
                    (got - want).abs() <= 1e-9 * scale,
                    "n={n} r={r}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn envelope_bounds_true_aggregate_from_above() {
        use rand::{Rng, SeedableRng};
        let p = build_pieces(L, V, U, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let y = rng.gen_range(0.0..2.0 * U);
            let truth = bpr_aggregate(L, V, U, y);
            assert!(
                p.envelope(y) >= truth - 1e-9,
                "chord envelope fell below the aggregate at y={y}"
            );
        }
    }

    #[test]
    fn slopes_strictly_increase() {
        let p = build_pieces(L, V, U, 4);
        for r in 1..p.slopes.len() {
            assert!(p.slopes[r] > p.slopes[r - 1]);
        }
    }

    #[test]
    fn intercepts_nonpositive() {
        let p = build_pieces(L, V, U, 6);
        assert!(p.intercepts.iter().all(|&xi| xi <= 1e-12));
    }

    #[test]
    fn refining_pieces_reduces_max_error() {
        let max_err = |n: usize| {
            let p = build_pieces(L, V, U, n);
            (0..=2000)
                .map(|i| {
                    let y = i as f64 * (2.0 * U) / 2000.0;
                    (p.envelope(y) - bpr_aggregate(L, V, U, y)).abs()
                })
                .fold(0.0_f64, f64::max)
        };
        let errs: Vec<f64> = [1, 2, 4, 8, 16].iter().map(|&n| max_err(n)).collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{errs:?}");
        }
        assert!(errs[4] < errs[0] / 10.0);
    }
}
