//! Exact k-cardinality bipartite matching as a unit-capacity min-cost flow.
//!
//! The network has a source, one node per left point, one node per right
//! point and a sink. Source-to-left and right-to-sink arcs cost nothing; the
//! left-to-right arc `(i, j)` costs the quantized `d_ij`. Every arc has
//! capacity one, so an integral flow of value `k` is a matching of size `k`.
//!
//! [`FlowNetwork::augment`] pushes one more unit along a cheapest residual
//! path (successive shortest paths with node potentials). After `k`
//! augmentations the flow is a minimum-cost flow of value `k`, which is why
//! one run yields the whole cost curve. Each augmentation costs
//! `O(n*m + m^2)` in the worst case; this is slower than the best known
//! bounds for imperfect matching but simple and exact.
//!
//! Costs are rounded to integers at a fixed scale before solving. All path
//! arithmetic is then exact; the reported optimum differs from the real
//! one by at most `k / (2 * scale)`.

use crate::error::{Error, Result};
use crate::types::{validate_matching, CostMatrix, PartialMatching};

const UNMATCHED: usize = usize::MAX;
const INF: i128 = i128::MAX / 4;

/// Upper bound used by [`default_scale`] for `k * max scaled cost`.
pub const SCALED_BUDGET: f64 = (1u64 << 62) as f64;
/// Largest scale [`default_scale`] will return.
pub const MAX_DEFAULT_SCALE: f64 = (1u64 << 32) as f64;

/// Largest power of two `S <= 2^32` with `k_max * round(max_cost * S) <= 2^62`.
///
/// Returns 1 for an all-zero matrix.
pub fn default_scale(c: &CostMatrix, k_max: usize) -> f64 {
    let max = c.max();
    if max == 0.0 {
        return 1.0;
    }
    let k = k_max.max(1) as f64;
    let mut scale = MAX_DEFAULT_SCALE;
    while scale > f64::MIN_POSITIVE && k * (max * scale).round() > SCALED_BUDGET {
        scale *= 0.5;
    }
    scale
}

/// Residual state of the source/sink-augmented bipartite network.
///
/// Node ids: `0` is the source, `1..=n` the left points, `n+1..=n+m` the
/// right points and `n+m+1` the sink. Equal-distance ties in the path search
/// go to the smaller node id, so solves are deterministic.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n_left: usize,
    n_right: usize,
    costs: Vec<i64>,
    scale: f64,
    // Potentials of left nodes, right nodes and the sink. The source potential
    // never moves from zero because the source is always settled first.
    pot_left: Vec<i128>,
    pot_right: Vec<i128>,
    pot_sink: i128,
    match_left: Vec<usize>,
    match_right: Vec<usize>,
    flow: usize,
    total: i128,
    // Scratch buffers for the path search.
    dist_left: Vec<i128>,
    dist_right: Vec<i128>,
    pred_right: Vec<usize>,
    settled_right: Vec<bool>,
}

/// Quantizes `c` at `scale` and builds the unit-capacity network.
///
/// Fails if `min(n, m)` times the largest scaled cost does not fit in a
/// signed 64-bit integer.
pub fn build_network(c: &CostMatrix, scale: f64) -> Result<FlowNetwork> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidScale(scale));
    }
    let (n, m) = (c.rows(), c.cols());
    let pairs = n.min(m);
    let max_scaled = (c.max() * scale).round();
    let overflow = Error::Overflow { max_scaled, pairs };
    if !max_scaled.is_finite() || max_scaled >= i64::MAX as f64 {
        return Err(overflow);
    }
    if (max_scaled as i128) * (pairs as i128) > i64::MAX as i128 {
        return Err(overflow);
    }
    let mut costs = Vec::with_capacity(n * m);
    for i in 0..n {
        costs.extend(c.row(i).iter().map(|&v| (v * scale).round() as i64));
    }
    Ok(FlowNetwork {
        n_left: n,
        n_right: m,
        costs,
        scale,
        pot_left: vec![0; n],
        pot_right: vec![0; m],
        pot_sink: 0,
        match_left: vec![UNMATCHED; n],
        match_right: vec![UNMATCHED; m],
        flow: 0,
        total: 0,
        dist_left: vec![INF; n],
        dist_right: vec![INF; m],
        pred_right: vec![UNMATCHED; m],
        settled_right: vec![false; m],
    })
}

impl FlowNetwork {
    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn node_count(&self) -> usize {
        self.n_left + self.n_right + 2
    }

    /// Arcs of the forward network: `n` source arcs, `n*m` bipartite arcs, `m` sink arcs.
    pub fn arc_count(&self) -> usize {
        self.n_left + self.n_left * self.n_right + self.n_right
    }

    #[inline]
    pub fn scaled_cost(&self, i: usize, j: usize) -> i64 {
        self.costs[i * self.n_right + j]
    }

    /// Current flow value, i.e. the size of the current matching.
    pub fn flow(&self) -> usize {
        self.flow
    }

    /// Total scaled cost of the current flow.
    pub fn scaled_total(&self) -> i64 {
        self.total as i64
    }

    pub fn matching(&self) -> PartialMatching {
        PartialMatching::from_pairs(
            self.match_left
                .iter()
                .enumerate()
                .filter(|&(_, &j)| j != UNMATCHED)
                .map(|(i, &j)| (i, j))
                .collect(),
        )
    }

    /// Smallest reduced cost over all residual arcs; nonnegative whenever the
    /// current flow is optimal for its value.
    pub fn min_reduced_cost(&self) -> i128 {
        let mut min = i128::MAX;
        for i in 0..self.n_left {
            let pl = self.pot_left[i];
            // source <-> left_i
            min = min.min(if self.match_left[i] == UNMATCHED { -pl } else { pl });
            for j in 0..self.n_right {
                let c = self.scaled_cost(i, j) as i128;
                let pr = self.pot_right[j];
                let rc = if self.match_left[i] == j {
                    -c + pr - pl
                } else {
                    c + pl - pr
                };
                min = min.min(rc);
            }
        }
        for j in 0..self.n_right {
            let rc = if self.match_right[j] == UNMATCHED {
                self.pot_right[j] - self.pot_sink
            } else {
                self.pot_sink - self.pot_right[j]
            };
            min = min.min(rc);
        }
        min
    }

    /// Pushes one unit of flow along a cheapest augmenting path.
    ///
    /// Returns the scaled cost increase, or `None` when the matching is
    /// already of size `min(n, m)`.
    pub fn augment(&mut self) -> Result<Option<i64>> {
        let (n, m) = (self.n_left, self.n_right);
        if self.flow == n.min(m) {
            return Ok(None);
        }
        self.dist_left.fill(INF);
        self.dist_right.fill(INF);
        self.pred_right.fill(UNMATCHED);
        self.settled_right.fill(false);
        let mut dist_sink = INF;
        let mut pred_sink = UNMATCHED;

        // Free left nodes are reached straight from the source at reduced
        // cost -pot_left, which stays zero: a free left node is settled at
        // distance zero on every search. They carry the smallest ids among
        // zero-distance candidates, so they are settled first.
        for i in 0..n {
            if self.match_left[i] != UNMATCHED {
                continue;
            }
            if self.pot_left[i] != 0 {
                return Err(Error::InvariantViolation(format!(
                    "free left node {i} has potential {}",
                    self.pot_left[i]
                )));
            }
            self.dist_left[i] = 0;
            self.relax_from_left(i)?;
        }

        let mut open: Vec<usize> = (0..m).collect();
        loop {
            // Smallest (distance, id) among open right nodes and the sink.
            let mut best_pos = UNMATCHED;
            let mut best = INF;
            for (pos, &j) in open.iter().enumerate() {
                if self.dist_right[j] < best {
                    best = self.dist_right[j];
                    best_pos = pos;
                }
            }
            if dist_sink < best {
                break;
            }
            if best_pos == UNMATCHED {
                return Err(Error::InvariantViolation(
                    "sink unreachable before the matching is maximal".into(),
                ));
            }
            // `open` stays sorted by id so the scan above resolves ties by id.
            let j = open.remove(best_pos);
            self.settled_right[j] = true;
            let dj = self.dist_right[j];
            let partner = self.match_right[j];
            if partner == UNMATCHED {
                let rc = self.pot_right[j] - self.pot_sink;
                if rc < 0 {
                    return Err(negative_reduced_cost("right", j, "sink", 0, rc));
                }
                if dj + rc < dist_sink {
                    dist_sink = dj + rc;
                    pred_sink = j;
                }
            } else {
                // The matched arc is tight, so the partner has the same distance
                // and, having a smaller id than any right node, is settled now.
                let i = partner;
                let rc = -(self.scaled_cost(i, j) as i128) + self.pot_right[j] - self.pot_left[i];
                if rc != 0 {
                    return Err(Error::InvariantViolation(format!(
                        "matched arc ({i}, {j}) has reduced cost {rc}"
                    )));
                }
                self.dist_left[i] = dj;
                self.relax_from_left(i)?;
            }
        }

        // Path cost in real (scaled) units before the potentials move.
        let increment = dist_sink + self.pot_sink;

        // Walk the path back from the sink, flipping matched arcs.
        let mut j = pred_sink;
        let mut path_cost: i128 = 0;
        loop {
            let i = self.pred_right[j];
            let prev = self.match_left[i];
            path_cost += self.scaled_cost(i, j) as i128;
            self.match_left[i] = j;
            self.match_right[j] = i;
            if prev == UNMATCHED {
                break;
            }
            path_cost -= self.scaled_cost(i, prev) as i128;
            j = prev;
        }
        if path_cost != increment {
            return Err(Error::InvariantViolation(format!(
                "augmenting path costs {path_cost} but search distance gives {increment}"
            )));
        }

        for i in 0..n {
            self.pot_left[i] += self.dist_left[i].min(dist_sink);
        }
        for j in 0..m {
            let d = if self.settled_right[j] {
                self.dist_right[j]
            } else {
                dist_sink
            };
            self.pot_right[j] += d;
        }
        self.pot_sink += dist_sink;

        self.flow += 1;
        self.total += increment;
        Ok(Some(increment as i64))
    }

    fn relax_from_left(&mut self, i: usize) -> Result<()> {
        let base = self.dist_left[i] + self.pot_left[i];
        let matched = self.match_left[i];
        let row = &self.costs[i * self.n_right..(i + 1) * self.n_right];
        let mut negative = None;
        for (j, &c) in row.iter().enumerate() {
            if self.settled_right[j] || j == matched {
                continue;
            }
            let through = base + c as i128 - self.pot_right[j];
            if through < self.dist_left[i] {
                negative = Some((j, through - self.dist_left[i]));
                break;
            }
            if through < self.dist_right[j] {
                self.dist_right[j] = through;
                self.pred_right[j] = i;
            }
        }
        match negative {
            Some((j, rc)) => Err(negative_reduced_cost("left", i, "right", j, rc)),
            None => Ok(()),
        }
    }

    /// Runs `k_max` augmentations on a fresh network and records the optimal
    /// cost and matching for every intermediate flow value.
    pub fn solve_incremental(mut self, k_max: usize) -> Result<LssCurve> {
        let max = self.n_left.min(self.n_right);
        if k_max == 0 || k_max > max {
            return Err(Error::KOutOfRange { k: k_max, max });
        }
        if self.flow != 0 {
            return Err(Error::InvariantViolation(
                "incremental solve must start from the empty flow".into(),
            ));
        }
        let mut scaled_phi = Vec::with_capacity(k_max);
        let mut matchings = Vec::with_capacity(k_max);
        let mut previous = 0i64;
        for k in 1..=k_max {
            let inc = self.augment()?.ok_or_else(|| {
                Error::InvariantViolation(format!("no augmenting path at flow {}", k - 1))
            })?;
            if inc < previous {
                return Err(Error::InvariantViolation(format!(
                    "cost increment dropped from {previous} to {inc} at k = {k}"
                )));
            }
            previous = inc;
            scaled_phi.push(self.scaled_total());
            matchings.push(self.matching());
        }
        Ok(LssCurve {
            scale: self.scale,
            scaled_phi,
            matchings,
        })
    }
}

fn negative_reduced_cost(from: &str, a: usize, to: &str, b: usize, rc: i128) -> Error {
    Error::InvariantViolation(format!(
        "negative reduced cost {rc} on arc {from} {a} -> {to} {b}"
    ))
}

/// Optimal cost `phi(k)` and an optimal matching for each `k = 1..=k_max`.
///
/// Costs are kept as exact scaled integers; `phi(0) = 0` by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct LssCurve {
    scale: f64,
    scaled_phi: Vec<i64>,
    matchings: Vec<PartialMatching>,
}

impl LssCurve {
    /// Assembles a curve from parts, checking sizes and shape.
    pub fn from_parts(
        scale: f64,
        scaled_phi: Vec<i64>,
        matchings: Vec<PartialMatching>,
    ) -> Result<Self> {
        if scaled_phi.len() != matchings.len() {
            return Err(Error::InvariantViolation(format!(
                "{} costs for {} matchings",
                scaled_phi.len(),
                matchings.len()
            )));
        }
        let curve = Self {
            scale,
            scaled_phi,
            matchings,
        };
        curve.check_shape()?;
        Ok(curve)
    }

    pub fn k_max(&self) -> usize {
        self.scaled_phi.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `phi(k)` in original cost units.
    pub fn phi(&self, k: usize) -> f64 {
        self.scaled(k) as f64 / self.scale
    }

    /// `phi(k)` as an exact scaled integer.
    pub fn scaled(&self, k: usize) -> i64 {
        if k == 0 {
            0
        } else {
            self.scaled_phi[k - 1]
        }
    }

    /// `phi(0), phi(1), ..., phi(k_max)` in original units.
    pub fn phi_values(&self) -> Vec<f64> {
        (0..=self.k_max()).map(|k| self.phi(k)).collect()
    }

    /// Optimal matching of size `k` (`1 <= k <= k_max`); size 0 is empty.
    pub fn matching(&self, k: usize) -> PartialMatching {
        if k == 0 {
            PartialMatching::empty()
        } else {
            self.matchings[k - 1].clone()
        }
    }

    pub fn matchings(&self) -> &[PartialMatching] {
        &self.matchings
    }

    /// Checks that `phi` is nondecreasing with nondecreasing increments.
    pub fn check_shape(&self) -> Result<()> {
        let mut prev_inc = 0i64;
        for k in 1..=self.k_max() {
            let inc = self.scaled(k) - self.scaled(k - 1);
            if inc < 0 {
                return Err(Error::InvariantViolation(format!(
                    "phi decreases at k = {k}"
                )));
            }
            if inc < prev_inc {
                return Err(Error::InvariantViolation(format!(
                    "phi increments decrease at k = {k}"
                )));
            }
            prev_inc = inc;
        }
        Ok(())
    }

    /// Shape check plus matching sizes and validity for an `n x m` problem.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        self.check_shape()?;
        for (idx, p) in self.matchings.iter().enumerate() {
            if p.len() != idx + 1 {
                return Err(Error::InvariantViolation(format!(
                    "matching for k = {} has {} pairs",
                    idx + 1,
                    p.len()
                )));
            }
            validate_matching(p, n, m)?;
        }
        Ok(())
    }

    /// Same curve with left and right swapped in every matching.
    pub fn inverted(self) -> Self {
        Self {
            matchings: self.matchings.iter().map(PartialMatching::inverted).collect(),
            ..self
        }
    }
}
