//! Kernel two-sample diagnostics for weight quality.
//!
//! Maximum mean discrepancy (MMD) with a Gaussian kernel measures how far
//! apart two samples are as distributions. The drift harness uses it two
//! ways: the unweighted statistic between the current step and the pooled
//! past shows how much the stream has drifted, and the weighted variant —
//! where each past sample counts in proportion to its importance weight —
//! shows how much of that gap the weights close. Good weights pull the
//! weighted curve toward zero while the unweighted curve keeps growing.

use alloc::vec::Vec;

use crate::drift::{at_step, TimedSample};
use crate::error::{CoreError, Result};
use crate::fmath;
use crate::omega::{distinct_times, OmegaEstimator};

/// Gaussian kernel `k(u, v) = exp(-||u - v||^2 / (2 h^2))`.
#[inline]
fn kernel(u: &[f64], v: &[f64], h: f64) -> f64 {
    fmath::exp(-fmath::sq_dist(u, v) / (2.0 * h * h))
}

/// Cross-kernel sum `sum_{i,j} k(x_i, y_j)` accumulated in an order chosen
/// from the data, not the argument positions. Float addition is not
/// associative, and the unweighted estimate promises bitwise symmetry in its
/// two samples, so swapping the arguments must replay the identical sequence
/// of additions. Length, then the first differing coordinate, decides which
/// side drives the outer loop; equal contents make the order moot.
fn cross_sum(x: &[&[f64]], y: &[&[f64]], h: f64) -> f64 {
    let swap = match x.len().cmp(&y.len()) {
        core::cmp::Ordering::Less => false,
        core::cmp::Ordering::Greater => true,
        core::cmp::Ordering::Equal => {
            let xa = x.iter().flat_map(|r| r.iter());
            let ya = y.iter().flat_map(|r| r.iter());
            let mut swap = false;
            for (a, b) in xa.zip(ya) {
                match a.total_cmp(b) {
                    core::cmp::Ordering::Less => break,
                    core::cmp::Ordering::Greater => {
                        swap = true;
                        break;
                    }
                    core::cmp::Ordering::Equal => {}
                }
            }
            swap
        }
    };
    let (a, b) = if swap { (y, x) } else { (x, y) };
    let mut s = 0.0;
    for ai in a {
        for bj in b {
            s += kernel(ai, bj, h);
        }
    }
    s
}

fn check_sides(x: &[&[f64]], y: &[&[f64]], h: f64, context: &'static str) -> Result<()> {
    if x.len() < 2 || y.len() < 2 {
        return Err(CoreError::Degenerate(context));
    }
    let d = x[0].len();
    if x.iter().chain(y.iter()).any(|r| r.len() != d) {
        return Err(CoreError::ShapeMismatch {
            context,
            expected: (1, d),
            actual: (1, 0),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(CoreError::OutOfRange { context, value: h });
    }
    Ok(())
}

/// Unbiased MMD^2 estimate between samples `x` and `y`.
///
/// U-statistic form: within-sample averages skip the diagonal, so the
/// estimate is unbiased and can go slightly negative when the samples come
/// from the same distribution. Requires at least two points per side.
pub fn mmd2_unweighted(x: &[&[f64]], y: &[&[f64]], h: f64) -> Result<f64> {
    check_sides(x, y, h, "mmd2_unweighted")?;
    let (m, n) = (x.len(), y.len());
    let mut xx = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            xx += kernel(x[i], x[j], h);
        }
    }
    let mut yy = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            yy += kernel(y[i], y[j], h);
        }
    }
    let xy = cross_sum(x, y, h);
    // Each unordered within-sample pair was counted once; the U-statistic
    // averages over ordered pairs, which doubles both numerator and count.
    let xx = 2.0 * xx / (m * (m - 1)) as f64;
    let yy = 2.0 * yy / (n * (n - 1)) as f64;
    let xy = 2.0 * xy / (m * n) as f64;
    Ok(xx + yy - xy)
}

/// MMD^2 with nonnegative importance weights on the `y` side.
///
/// The `y`-side expectations are replaced by weight-normalized sums:
/// within-`y` uses off-diagonal pairs `sum_{i != j} w_i w_j k / sum_{i != j}
/// w_i w_j`, and the cross term weights each `y_j` by `w_j / sum w`. When the
/// off-diagonal weight mass vanishes (all mass on one point), the within-`y`
/// term falls back to the V-statistic (diagonal included), which is the
/// point-mass limit.
pub fn mmd2_weighted(x: &[&[f64]], y: &[&[f64]], w: &[f64], h: f64) -> Result<f64> {
    check_sides(x, y, h, "mmd2_weighted")?;
    if w.len() != y.len() {
        return Err(CoreError::ShapeMismatch {
            context: "mmd2_weighted",
            expected: (y.len(), 1),
            actual: (w.len(), 1),
        });
    }
    if w.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(CoreError::OutOfRange {
            context: "mmd2_weighted weights",
            value: f64::NAN,
        });
    }
    let wsum: f64 = w.iter().sum();
    if wsum <= 0.0 {
        return Err(CoreError::Degenerate("mmd2_weighted: zero total weight"));
    }
    let (m, n) = (x.len(), y.len());

    let mut xx = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            xx += kernel(x[i], x[j], h);
        }
    }
    let xx = 2.0 * xx / (m * (m - 1)) as f64;

    let mut yy_num = 0.0;
    let mut yy_diag_num = 0.0;
    for i in 0..n {
        yy_diag_num += w[i] * w[i]; // k(y_i, y_i) = 1
        for j in i + 1..n {
            yy_num += w[i] * w[j] * kernel(y[i], y[j], h);
        }
    }
    let offdiag_mass = wsum * wsum - w.iter().map(|&v| v * v).sum::<f64>();
    let yy = if offdiag_mass > 1e-12 * wsum * wsum {
        2.0 * yy_num / offdiag_mass
    } else {
        // Point-mass fallback: V-statistic including the diagonal.
        (2.0 * yy_num + yy_diag_num) / (wsum * wsum)
    };

    let mut xy = 0.0;
    for xi in x {
        for (yj, &wj) in y.iter().zip(w.iter()) {
            xy += wj * kernel(xi, yj, h);
        }
    }
    let xy = 2.0 * xy / (m as f64 * wsum);

    Ok(xx + yy - xy)
}

/// Median-heuristic kernel bandwidth.
///
/// Exact duplicate points are removed first — the heuristic cares about the
/// geometry of distinct locations, and deduplication makes the result
/// invariant to copying points. At most 2000 distinct points enter the
/// pairwise median (deterministic stride subsample). Fewer than two distinct
/// points give the fallback bandwidth 1.0.
pub fn median_bandwidth(points: &[&[f64]]) -> f64 {
    // Dedup exact duplicates (O(n^2) on the capped subsample is fine).
    let mut distinct: Vec<&[f64]> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| q == p) {
            distinct.push(p);
        }
        if distinct.len() > 4000 {
            break; // plenty for the stride below
        }
    }
    if distinct.len() < 2 {
        return 1.0;
    }
    let cap = 2000;
    let stride = distinct.len().div_ceil(cap);
    let sub: Vec<&[f64]> = distinct.iter().copied().step_by(stride).collect();
    let mut dists = Vec::with_capacity(sub.len() * (sub.len() - 1) / 2);
    for i in 0..sub.len() {
        for j in i + 1..sub.len() {
            dists.push(fmath::sqrt(fmath::sq_dist(sub[i], sub[j])));
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let k = dists.len();
    let med = if k % 2 == 1 {
        dists[k / 2]
    } else {
        0.5 * (dists[k / 2 - 1] + dists[k / 2])
    };
    if med > 0.0 && med.is_finite() {
        med
    } else {
        1.0
    }
}

/// One row of the drift-diagnostic trajectory.
///
/// The unbiased estimates are reported raw — they can dip below zero on
/// matching distributions; the `*_nonneg` accessors give the zero-truncated
/// companions for display.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdRow {
    /// Current step.
    pub t: usize,
    /// MMD^2 between step `t` and the pooled past, unweighted.
    pub unweighted: f64,
    /// Same, with the estimator's weights `omega(x, t, t_i)` on the past.
    pub weighted: f64,
    /// Kernel bandwidth used at this step.
    pub bandwidth: f64,
    pub n_current: usize,
    pub n_past: usize,
}

impl MmdRow {
    pub fn unweighted_nonneg(&self) -> f64 {
        self.unweighted.max(0.0)
    }

    pub fn weighted_nonneg(&self) -> f64 {
        self.weighted.max(0.0)
    }
}

/// Current-vs-past discrepancy trajectory over a stream.
///
/// For each step `t >= 1`, compares the samples drawn at `t` against the
/// pooled samples drawn before `t`, unweighted and reweighted by
/// `est.weights_at(past, t)`. `bandwidth` fixes the kernel width; `None`
/// applies the median heuristic to the pooled points of each step. Returns
/// `horizon - 1` rows for a full stream.
pub fn weight_quality_trajectory(
    stream: &[TimedSample],
    est: &OmegaEstimator,
    bandwidth: Option<f64>,
) -> Result<Vec<MmdRow>> {
    if !est.is_trained() {
        return Err(CoreError::Untrained("weight_quality_trajectory"));
    }
    let times = distinct_times(stream);
    if times.len() < 2 {
        return Err(CoreError::Degenerate(
            "weight_quality_trajectory: need two steps",
        ));
    }
    let mut rows = Vec::with_capacity(times.len() - 1);
    for &t in times.iter().skip(1) {
        let current = at_step(stream, t);
        let past_end = stream.partition_point(|s| s.t < t);
        let past = &stream[..past_end];
        if current.len() < 2 || past.len() < 2 {
            return Err(CoreError::Degenerate(
                "weight_quality_trajectory: step with fewer than two samples",
            ));
        }
        let cur_x: Vec<&[f64]> = current.iter().map(|s| s.x.as_slice()).collect();
        let past_x: Vec<&[f64]> = past.iter().map(|s| s.x.as_slice()).collect();
        let h = match bandwidth {
            Some(h) => h,
            None => {
                let mut pooled = cur_x.clone();
                pooled.extend_from_slice(&past_x);
                median_bandwidth(&pooled)
            }
        };
        let weights = est.weights_at(past, t)?;
        rows.push(MmdRow {
            t,
            unweighted: mmd2_unweighted(&cur_x, &past_x, h)?,
            weighted: mmd2_weighted(&cur_x, &past_x, &weights, h)?,
            bandwidth: h,
            n_current: current.len(),
            n_past: past.len(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{DriftSchedule, GaussianWalk};
    use crate::omega::{fit, OmegaSpec, OmegaTrainConfig};
    use crate::seeding;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_points(mu: f64, sigma: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seeding::rng(seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                alloc::vec![mu + sigma * z]
            })
            .collect()
    }

    fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(|r| r.as_slice()).collect()
    }

    /// Closed form for Gaussians: with U ~ N(mu_a, s_a^2), V ~ N(mu_b, s_b^2)
    /// independent and k the Gaussian kernel with bandwidth h,
    /// E[k(U,V)] = sqrt(h^2 / (h^2 + s_a^2 + s_b^2))
    ///             * exp(-(mu_a - mu_b)^2 / (2 (h^2 + s_a^2 + s_b^2))).
    fn expected_kernel_1d(mu_a: f64, sa2: f64, mu_b: f64, sb2: f64, h: f64) -> f64 {
        let denom = h * h + sa2 + sb2;
        (h * h / denom).sqrt() * (-(mu_a - mu_b).powi(2) / (2.0 * denom)).exp()
    }

    #[test]
    fn mmd_matches_gaussian_closed_form() {
        let x = normal_points(0.0, 1.0, 1500, 1);
        let y = normal_points(1.0, 1.0, 1500, 2);
        let h = 1.0;
        let est = mmd2_unweighted(&refs(&x), &refs(&y), h).unwrap();
        let exx = expected_kernel_1d(0.0, 1.0, 0.0, 1.0, h);
        let eyy = expected_kernel_1d(1.0, 1.0, 1.0, 1.0, h);
        let exy = expected_kernel_1d(0.0, 1.0, 1.0, 1.0, h);
        let pop = exx + eyy - 2.0 * exy;
        // Population value is ~0.177; the estimate must land within 10%.
        assert!(
            (est - pop).abs() / pop < 0.10,
            "estimate {est} vs population {pop}"
        );
    }

    #[test]
    fn mmd_near_zero_for_equal_distributions() {
        let x = normal_points(0.3, 1.0, 1200, 3);
        let y = normal_points(0.3, 1.0, 1200, 4);
        let est = mmd2_unweighted(&refs(&x), &refs(&y), 1.0).unwrap();
        // Unbiased statistic fluctuates around zero at scale ~1/n.
        assert!(est.abs() < 0.01, "null mmd {est}");
    }

    #[test]
    fn mmd_on_identical_lists_is_nonpositive() {
        // With X = Y the unbiased estimate is <= 0: the cross term includes
        // the diagonal k(x, x) = 1 that the within terms skip.
        let x = normal_points(0.0, 1.0, 120, 21);
        let v = mmd2_unweighted(&refs(&x), &refs(&x), 0.7).unwrap();
        assert!(v <= 1e-12, "identical-sample estimate {v}");
    }

    #[test]
    fn observed_statistic_sits_inside_the_permutation_band() {
        // Same-distribution samples: the observed statistic should look like
        // a typical draw from the label-permutation null.
        let x = normal_points(0.0, 1.0, 60, 22);
        let y = normal_points(0.0, 1.0, 60, 23);
        let h = 1.0;
        let observed = mmd2_unweighted(&refs(&x), &refs(&y), h).unwrap();
        let mut pool: Vec<Vec<f64>> = x.iter().chain(y.iter()).cloned().collect();
        let mut rng = seeding::rng(24);
        let mut stats = Vec::with_capacity(200);
        use rand::seq::SliceRandom;
        for _ in 0..200 {
            pool.shuffle(&mut rng);
            let (px, py) = pool.split_at(60);
            stats.push(mmd2_unweighted(&refs(px), &refs(py), h).unwrap());
        }
        stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = (stats[4], stats[194]); // central 95%
        assert!(
            observed >= lo && observed <= hi,
            "observed {observed} outside permutation band [{lo}, {hi}]"
        );
    }

    #[test]
    fn mmd_is_symmetric() {
        let x = normal_points(0.0, 1.0, 80, 5);
        let y = normal_points(0.7, 1.3, 90, 6);
        let a = mmd2_unweighted(&refs(&x), &refs(&y), 0.8).unwrap();
        let b = mmd2_unweighted(&refs(&y), &refs(&x), 0.8).unwrap();
        assert_eq!(a, b, "swapping the samples must not move a single bit");
    }

    #[test]
    fn mmd_is_scale_consistent() {
        // Scaling every point and the bandwidth together changes nothing.
        let x = normal_points(0.2, 1.0, 70, 25);
        let y = normal_points(1.0, 0.8, 60, 26);
        let h = 0.9;
        let base = mmd2_unweighted(&refs(&x), &refs(&y), h).unwrap();
        for &c in &[3.0, 0.125] {
            let sx: Vec<Vec<f64>> = x.iter().map(|p| alloc::vec![p[0] * c]).collect();
            let sy: Vec<Vec<f64>> = y.iter().map(|p| alloc::vec![p[0] * c]).collect();
            let scaled = mmd2_unweighted(&refs(&sx), &refs(&sy), h * c).unwrap();
            assert!((scaled - base).abs() < 1e-10, "{scaled} vs {base} at c={c}");
        }
    }

    #[test]
    fn indicator_weights_on_mixture_recover_the_clean_half() {
        // Y mixes 150 points from X's distribution with 150 far-off points;
        // weighting Y down to the clean half must shrink the discrepancy.
        let x = normal_points(0.0, 1.0, 300, 27);
        let mut y = normal_points(0.0, 1.0, 150, 28);
        y.extend(normal_points(3.0, 1.0, 150, 29));
        let w: Vec<f64> = (0..300).map(|i| if i < 150 { 1.0 } else { 0.0 }).collect();
        let h = 1.0;
        let unweighted = mmd2_unweighted(&refs(&x), &refs(&y), h).unwrap();
        let weighted = mmd2_weighted(&refs(&x), &refs(&y), &w, h).unwrap();
        assert!(
            weighted < unweighted,
            "weighted {weighted} should fall below unweighted {unweighted}"
        );
        assert!(weighted.abs() < 0.05, "clean half is X's distribution");
    }

    #[test]
    fn weighted_with_constant_weights_reduces_to_unweighted() {
        let x = normal_points(0.0, 1.0, 70, 7);
        let y = normal_points(0.5, 1.0, 60, 8);
        let u = mmd2_unweighted(&refs(&x), &refs(&y), 1.0).unwrap();
        for &c in &[1.0, 0.37] {
            let w = alloc::vec![c; y.len()];
            let wv = mmd2_weighted(&refs(&x), &refs(&y), &w, 1.0).unwrap();
            assert_relative_eq!(wv, u, max_relative = 1e-12);
        }
    }

    #[test]
    fn weighted_point_mass_matches_hand_computation() {
        // X = {0, 2}, Y = {0, 1}, all mass on y = 1, h = 1:
        // XX = e^-2, YY (V-statistic) = 1, XY = 2 e^-1/2,
        // mmd2 = e^-2 + 1 - 2 e^-1/2.
        let x = alloc::vec![alloc::vec![0.0], alloc::vec![2.0]];
        let y = alloc::vec![alloc::vec![0.0], alloc::vec![1.0]];
        let w = [0.0, 1.0];
        let got = mmd2_weighted(&refs(&x), &refs(&y), &w, 1.0).unwrap();
        let expect = (-2.0f64).exp() + 1.0 - 2.0 * (-0.5f64).exp();
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn weighted_rejects_bad_weights() {
        let x = normal_points(0.0, 1.0, 10, 9);
        let y = normal_points(0.0, 1.0, 10, 10);
        assert!(mmd2_weighted(&refs(&x), &refs(&y), &[1.0; 9], 1.0).is_err());
        let mut w = alloc::vec![1.0; 10];
        w[3] = -0.2;
        assert!(mmd2_weighted(&refs(&x), &refs(&y), &w, 1.0).is_err());
        let zeros = alloc::vec![0.0; 10];
        assert!(mmd2_weighted(&refs(&x), &refs(&y), &zeros, 1.0).is_err());
        assert!(mmd2_unweighted(&refs(&x), &refs(&y), 0.0).is_err());
        assert!(mmd2_unweighted(&refs(&x[..1]), &refs(&y), 1.0).is_err());
    }

    #[test]
    fn median_bandwidth_frozen_cases() {
        // {0, 1, 3}: pairwise distances {1, 2, 3}, median 2.
        let pts = alloc::vec![alloc::vec![0.0], alloc::vec![1.0], alloc::vec![3.0]];
        assert_eq!(median_bandwidth(&refs(&pts)), 2.0);
        // {0, 1, 2, 4}: distances {1, 1, 2, 2, 3, 4}, median (2 + 2)/2 = 2.
        let pts4 = alloc::vec![
            alloc::vec![0.0],
            alloc::vec![1.0],
            alloc::vec![2.0],
            alloc::vec![4.0]
        ];
        assert_eq!(median_bandwidth(&refs(&pts4)), 2.0);
    }

    #[test]
    fn median_bandwidth_of_two_points_is_their_distance() {
        let pts = alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![1.0, 3.0]];
        assert_eq!(median_bandwidth(&refs(&pts)), 3.0);
    }

    #[test]
    fn median_bandwidth_matches_chi_distribution_median() {
        // For two independent N(0, I_2) points the distance is sqrt(2) times
        // a chi(2) variable, whose median is sqrt(2 ln 2); the analytic
        // median distance is therefore 2 sqrt(ln 2) ~ 1.6651.
        let mut rng = seeding::rng(30);
        let pts: Vec<Vec<f64>> = (0..2000)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                alloc::vec![a, b]
            })
            .collect();
        let h = median_bandwidth(&refs(&pts));
        let analytic = 2.0 * (2.0f64.ln()).sqrt();
        assert!(
            (h - analytic).abs() / analytic < 0.15,
            "median {h} vs analytic {analytic}"
        );
    }

    #[test]
    fn median_bandwidth_is_duplication_invariant_and_has_fallback() {
        let pts = alloc::vec![
            alloc::vec![0.0, 0.0],
            alloc::vec![1.0, 1.0],
            alloc::vec![-2.0, 0.5],
            alloc::vec![0.3, -0.7]
        ];
        let base = median_bandwidth(&refs(&pts));
        let mut dup = pts.clone();
        dup.extend(pts.iter().cloned());
        dup.extend(pts.iter().cloned());
        assert_eq!(median_bandwidth(&refs(&dup)), base);
        // Degenerate inputs fall back to 1.0.
        assert_eq!(median_bandwidth(&[]), 1.0);
        let one = alloc::vec![alloc::vec![5.0]];
        assert_eq!(median_bandwidth(&refs(&one)), 1.0);
        let same = alloc::vec![alloc::vec![2.0]; 6];
        assert_eq!(median_bandwidth(&refs(&same)), 1.0);
    }

    #[test]
    fn trajectory_tracks_growing_drift() {
        // Monotone mean path (no flip within the horizon): the current-vs-
        // past gap keeps growing, and good weights shrink it.
        let schedule = DriftSchedule::GaussianWalk(GaussianWalk {
            horizon: 10,
            mu0: 0.0,
            drift: 3.0, // 0.3 sigma per step
            flip_period: 10,
        });
        let stream = schedule.generate_stream(80, 11).unwrap();
        let spec = OmegaSpec::default(); // clip 1
        let cfg = OmegaTrainConfig {
            epochs: 20,
            lr: 1e-3,
            ..OmegaTrainConfig::default()
        };
        let (est, _) = fit(&stream, 10, &spec, &cfg, &mut seeding::rng(12)).unwrap();
        let rows = weight_quality_trajectory(&stream, &est, None).unwrap();
        assert_eq!(rows.len(), 9);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.t, i + 1);
            assert_eq!(row.n_current, 80);
            assert_eq!(row.n_past, 80 * (i + 1));
            assert!(row.bandwidth > 0.0);
            assert!(row.unweighted.is_finite() && row.weighted.is_finite());
        }
        let first = rows.first().unwrap();
        let last = rows.last().unwrap();
        assert!(
            last.unweighted > first.unweighted,
            "drift gap should grow: {} -> {}",
            first.unweighted,
            last.unweighted
        );
        assert!(
            last.weighted < last.unweighted,
            "weights should shrink the final gap: {} vs {}",
            last.weighted,
            last.unweighted
        );
    }

    #[test]
    fn trajectory_is_flat_near_zero_without_drift() {
        // Zero drift: every step draws the same distribution, so both curves
        // hover around zero and the raw values may dip negative.
        let schedule = DriftSchedule::GaussianWalk(GaussianWalk {
            horizon: 8,
            mu0: 0.5,
            drift: 0.0,
            flip_period: 8,
        });
        let stream = schedule.generate_stream(100, 31).unwrap();
        let spec = OmegaSpec::default();
        let cfg = OmegaTrainConfig::default();
        let (est, _) = fit(&stream, 8, &spec, &cfg, &mut seeding::rng(32)).unwrap();
        let rows = weight_quality_trajectory(&stream, &est, None).unwrap();
        for row in &rows {
            assert!(row.unweighted.abs() < 0.02, "stationary mmd {}", row.unweighted);
            assert!(row.weighted.abs() < 0.02, "stationary weighted {}", row.weighted);
            assert!(row.unweighted_nonneg() >= 0.0 && row.weighted_nonneg() >= 0.0);
        }
    }

    #[test]
    fn adjacent_steps_are_closer_than_half_period_apart() {
        // Gradual drift: the distribution moves a little per step, so step t
        // is closer to t+1 than to t + flip_period/2 almost everywhere. The
        // exception is one step per turning point of the mean path, whose
        // half-period partner reflects onto its own mean exactly.
        let horizon = 36;
        let schedule = DriftSchedule::GaussianWalk(GaussianWalk {
            horizon,
            mu0: 0.5,
            drift: 2.4, // 0.24 sigma per step
            flip_period: 12,
        });
        let stream = schedule.generate_stream(200, 33).unwrap();
        let k = 6; // half the flip period
        let h = 1.0;
        let mut ok = 0usize;
        let mut total = 0usize;
        for t in 0..horizon - k {
            let near_a: Vec<&[f64]> = at_step(stream.as_slice(), t)
                .iter()
                .map(|s| s.x.as_slice())
                .collect();
            let near_b: Vec<&[f64]> = at_step(stream.as_slice(), t + 1)
                .iter()
                .map(|s| s.x.as_slice())
                .collect();
            let far: Vec<&[f64]> = at_step(stream.as_slice(), t + k)
                .iter()
                .map(|s| s.x.as_slice())
                .collect();
            let close = mmd2_unweighted(&near_a, &near_b, h).unwrap();
            let distant = mmd2_unweighted(&near_a, &far, h).unwrap();
            total += 1;
            if close < distant {
                ok += 1;
            }
        }
        let frac = ok as f64 / total as f64;
        assert!(frac >= 0.9, "gradualness held at {ok}/{total} steps");
    }

    #[test]
    fn trajectory_requires_trained_estimator() {
        let schedule = DriftSchedule::GaussianWalk(GaussianWalk {
            horizon: 4,
            mu0: 0.0,
            drift: 1.0,
            flip_period: 4,
        });
        let stream = schedule.generate_stream(20, 1).unwrap();
        let est = OmegaEstimator::init(1, 4, &OmegaSpec::default(), &mut seeding::rng(2)).unwrap();
        assert!(matches!(
            weight_quality_trajectory(&stream, &est, None),
            Err(CoreError::Untrained(_))
        ));
    }
}
