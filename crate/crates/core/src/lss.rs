//! Least-sum-of-squares matching of a given size, plus two reference matchers.
//!
//! [`lss_match`] and [`lss_curve`] solve the size-`k` problem exactly through
//! the flow network in [`crate::flow`]. [`brute_force_lss`] enumerates every
//! injection and exists to check them on small inputs. [`greedy_match`] is
//! the usual smallest-distance-first heuristic and only gives an upper bound.
//!
//! All three quantize costs at `default_scale(c, min(n, m))`, so their
//! reported costs are comparable exactly.

use crate::error::{Error, Result};
use crate::flow::{build_network, default_scale, LssCurve};
use crate::types::{squared_distance_matrix, CostMatrix, FeatureSet, PartialMatching};

/// Problems with more points than this per side are refused by the brute-force oracle.
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Scale used to quantize `c` for every matcher in this module.
pub fn matching_scale(c: &CostMatrix) -> f64 {
    default_scale(c, c.rows().min(c.cols()))
}

fn check_k(k: usize, c: &CostMatrix) -> Result<()> {
    let max = c.rows().min(c.cols());
    if k == 0 || k > max {
        return Err(Error::KOutOfRange { k, max });
    }
    Ok(())
}

/// Optimal size-`k` matching between `x` and `y` and its cost `phi(k)`.
pub fn lss_match(x: &FeatureSet, y: &FeatureSet, k: usize) -> Result<(PartialMatching, f64)> {
    let curve = lss_curve(x, y, k)?;
    Ok((curve.matching(k), curve.phi(k)))
}

/// `phi(k)` and an optimal matching for every `k <= k_max`, from one solve.
pub fn lss_curve(x: &FeatureSet, y: &FeatureSet, k_max: usize) -> Result<LssCurve> {
    lss_curve_from_costs(&squared_distance_matrix(x, y)?, k_max)
}

/// [`lss_curve`] on a precomputed cost matrix.
///
/// A matrix with more rows than columns is solved transposed, and the
/// matchings are mapped back, so the flow network always has the shorter
/// side on the left.
pub fn lss_curve_from_costs(c: &CostMatrix, k_max: usize) -> Result<LssCurve> {
    check_k(k_max, c)?;
    let scale = matching_scale(c);
    let curve = if c.rows() > c.cols() {
        build_network(&c.transposed(), scale)?
            .solve_incremental(k_max)?
            .inverted()
    } else {
        build_network(c, scale)?.solve_incremental(k_max)?
    };
    curve.validate(c.rows(), c.cols())?;
    Ok(curve)
}

/// Exhaustive search over all size-`k` injections.
///
/// Ties go to the lexicographically smallest sorted pair list.
pub fn brute_force_lss(x: &FeatureSet, y: &FeatureSet, k: usize) -> Result<(PartialMatching, f64)> {
    brute_force_from_costs(&squared_distance_matrix(x, y)?, k)
}

pub fn brute_force_from_costs(c: &CostMatrix, k: usize) -> Result<(PartialMatching, f64)> {
    let (n, m) = (c.rows(), c.cols());
    if n > BRUTE_FORCE_LIMIT || m > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceTooLarge {
            n,
            m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    check_k(k, c)?;
    let scale = matching_scale(c);
    let q: Vec<Vec<i64>> = (0..n)
        .map(|i| c.row(i).iter().map(|&v| (v * scale).round() as i64).collect())
        .collect();

    struct Search<'a> {
        q: &'a [Vec<i64>],
        k: usize,
        used: Vec<bool>,
        current: Vec<(usize, usize)>,
        best: Option<(i64, Vec<(usize, usize)>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, i: usize, cost: i64) {
            let n = self.q.len();
            if self.current.len() == self.k {
                // Pairs are generated in increasing left index, hence already sorted.
                let better = match &self.best {
                    None => true,
                    Some((bc, bp)) => (cost, &self.current) < (*bc, bp),
                };
                if better {
                    self.best = Some((cost, self.current.clone()));
                }
                return;
            }
            if n - i < self.k - self.current.len() {
                return;
            }
            for j in 0..self.used.len() {
                if !self.used[j] {
                    self.used[j] = true;
                    self.current.push((i, j));
                    self.visit(i + 1, cost + self.q[i][j]);
                    self.current.pop();
                    self.used[j] = false;
                }
            }
            self.visit(i + 1, cost);
        }
    }

    let mut search = Search {
        q: &q,
        k,
        used: vec![false; m],
        current: Vec::with_capacity(k),
        best: None,
    };
    search.visit(0, 0);
    let (cost, pairs) = search.best.expect("k <= min(n, m) admits an injection");
    Ok((PartialMatching::from_pairs(pairs), cost as f64 / scale))
}

/// Repeatedly takes the globally smallest remaining distance among unused
/// rows and columns, `k` times.
///
/// The returned cost uses the same quantization as [`lss_match`], so it is
/// never below the optimum.
pub fn greedy_match(x: &FeatureSet, y: &FeatureSet, k: usize) -> Result<(PartialMatching, f64)> {
    let curve = greedy_curve(&squared_distance_matrix(x, y)?, k)?;
    Ok((curve.matching(k), curve.phi(k)))
}

/// Greedy picks for every `k <= k_max`; a cheap stand-in for the exact curve.
///
/// Picks come in nondecreasing cost order, so the result has the same
/// monotone, convex shape as an exact curve.
pub fn greedy_curve(c: &CostMatrix, k_max: usize) -> Result<LssCurve> {
    check_k(k_max, c)?;
    let (n, m) = (c.rows(), c.cols());
    let scale = matching_scale(c);
    let mut order: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    order.sort_by(|&(a, b), &(p, q)| c.get(a, b).total_cmp(&c.get(p, q)).then((a, b).cmp(&(p, q))));

    let mut row_used = vec![false; n];
    let mut col_used = vec![false; m];
    let mut pairs = Vec::with_capacity(k_max);
    let mut total = 0i64;
    let mut scaled_phi = Vec::with_capacity(k_max);
    let mut matchings = Vec::with_capacity(k_max);
    for (i, j) in order {
        if pairs.len() == k_max {
            break;
        }
        if row_used[i] || col_used[j] {
            continue;
        }
        row_used[i] = true;
        col_used[j] = true;
        pairs.push((i, j));
        total += (c.get(i, j) * scale).round() as i64;
        scaled_phi.push(total);
        matchings.push(PartialMatching::from_pairs(pairs.clone()));
    }
    LssCurve::from_parts(scale, scaled_phi, matchings)
}
