//! Synthetic instances with known ground truth, recovery metrics, and the
//! Monte-Carlo sweeps that trace recovery against the realized separation.
//!
//! Every `(grid point, trial)` cell draws from its own ChaCha stream of the
//! base seed, so a sweep is a pure function of its inputs and gives the same
//! table whether cells run in parallel or not.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::LssCurve;
use crate::lss::{lss_curve, lss_curve_from_costs};
use crate::select::{
    select_k_known_noise, select_k_unknown_noise_on_curve, SelectionOutcome, UnknownNoiseParams,
};
use crate::types::{squared_distance_matrix, FeatureSet, GroundTruth, PartialMatching};

pub const METRIC_PRECISION: &str = "precision";
pub const METRIC_SUBSET_RECOVERY: &str = "subset_recovery";
pub const METRIC_K_HAT: &str = "k_hat";
pub const METRIC_SIGMA_BAR_SQ: &str = "sigma_bar_sq";
pub const METRIC_EXACT_RECOVERY: &str = "exact_recovery";

/// Sizes, spread and noise levels of a synthetic instance.
///
/// The first `k_star` points on each side are the inliers, with
/// `pi_star(i) = i`. Feature coordinates are `N(0, tau^2)`; left outliers are
/// shifted by `tau` and right outliers by `2 tau` in every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub k_star: usize,
    pub tau: f64,
    pub sigma: f64,
    pub sigma_sharp: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// The 100 x 100, 60-inlier, 100-dimensional setup with unit noise.
    pub fn standard(tau: f64, seed: u64) -> Self {
        Self {
            n: 100,
            m: 100,
            d: 100,
            k_star: 60,
            tau,
            sigma: 1.0,
            sigma_sharp: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.d == 0 {
            return Err(Error::Config("sizes must be at least 1".into()));
        }
        if self.k_star > self.n.min(self.m) {
            return Err(Error::Config(format!(
                "k_star = {} exceeds min(n, m) = {}",
                self.k_star,
                self.n.min(self.m)
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        for s in [self.sigma, self.sigma_sharp] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Config(format!("noise level must be nonnegative, got {s}")));
            }
        }
        Ok(())
    }

    pub fn sigma0_sq(&self) -> f64 {
        self.sigma * self.sigma + self.sigma_sharp * self.sigma_sharp
    }
}

/// Observed sets and the truth behind them.
#[derive(Debug, Clone)]
pub struct Instance {
    pub x: FeatureSet,
    pub y: FeatureSet,
    pub truth: GroundTruth,
}

/// Random stream for cell `stream` of `seed`.
pub fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn generate_instance(cfg: &SynthConfig) -> Result<Instance> {
    generate_with_rng(cfg, &mut cell_rng(cfg.seed, 0))
}

pub fn generate_with_rng(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Instance> {
    cfg.validate()?;
    let SynthConfig {
        n,
        m,
        d,
        k_star,
        tau,
        sigma,
        sigma_sharp,
        ..
    } = *cfg;
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };

    let mut theta = Vec::with_capacity(n * d);
    for i in 0..n {
        let shift = if i < k_star { 0.0 } else { tau };
        theta.extend((0..d).map(|_| tau * normal() + shift));
    }
    let mut theta_sharp = Vec::with_capacity(m * d);
    theta_sharp.extend_from_slice(&theta[..k_star * d]);
    for _ in k_star..m {
        theta_sharp.extend((0..d).map(|_| tau * normal() + 2.0 * tau));
    }
    let x: Vec<f64> = theta.iter().map(|t| t + sigma * normal()).collect();
    let y: Vec<f64> = theta_sharp.iter().map(|t| t + sigma_sharp * normal()).collect();

    let truth = GroundTruth::new(
        PartialMatching::identity(k_star),
        FeatureSet::from_flat(theta, d)?,
        FeatureSet::from_flat(theta_sharp, d)?,
        sigma,
        sigma_sharp,
    )?;
    Ok(Instance {
        x: FeatureSet::from_flat(x, d)?,
        y: FeatureSet::from_flat(y, d)?,
        truth,
    })
}

/// Smallest signal-to-noise ratio `|theta_i - theta#_j| / sigma0` over all
/// pairs except the true ones.
pub fn kappa_bar_all(gt: &GroundTruth) -> Result<f64> {
    let s0 = gt.sigma0_sq();
    if s0 <= 0.0 {
        return Err(Error::ZeroNoise);
    }
    let d2 = squared_distance_matrix(gt.theta(), gt.theta_sharp())?;
    let mut min = f64::INFINITY;
    for i in 0..d2.rows() {
        let skip = gt.pi_star().get(i);
        for (j, &v) in d2.row(i).iter().enumerate() {
            if Some(j) != skip {
                min = min.min(v);
            }
        }
    }
    Ok((min / s0).sqrt())
}

/// Fraction of pairs in `pi_hat` that are true matches; 1 for an empty matching.
pub fn precision(pi_hat: &PartialMatching, gt: &GroundTruth) -> f64 {
    if pi_hat.is_empty() {
        return 1.0;
    }
    let correct = pi_hat
        .pairs()
        .iter()
        .filter(|&&(i, j)| gt.pi_star().get(i) == Some(j))
        .count();
    correct as f64 / pi_hat.len() as f64
}

/// True when `pi_hat` is a restriction of the true matching.
pub fn subset_recovery_ok(pi_hat: &PartialMatching, gt: &GroundTruth) -> bool {
    pi_hat
        .pairs()
        .iter()
        .all(|&(i, j)| gt.pi_star().get(i) == Some(j))
}

/// One aggregated point: mean of a metric over the trials of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub kappa_bar: f64,
    pub metric: String,
    pub mean: f64,
    pub trials: usize,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentTable {
    pub rows: Vec<TableRow>,
}

pub const TABLE_HEADER: [&str; 5] = ["kappa_bar", "metric", "mean", "trials", "stderr"];

impl ExperimentTable {
    pub fn metric_rows<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a TableRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn metrics(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.metric.as_str()) {
                names.push(&r.metric);
            }
        }
        names
    }

    /// Writes the table as CSV with header `kappa_bar,metric,mean,trials,stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Config(format!("writing table: {e}"));
        w.write_record(TABLE_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.kappa_bar.to_string(),
                r.metric.clone(),
                r.mean.to_string(),
                r.trials.to_string(),
                r.stderr.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Config(format!("writing table: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_sweep(template: &SynthConfig, tau_grid: &[f64], trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if tau_grid.is_empty() {
        return Err(Error::Config("tau grid is empty".into()));
    }
    for &tau in tau_grid {
        SynthConfig { tau, ..*template }.validate()?;
    }
    Ok(())
}

/// Runs `f` on every `(grid point, trial)` cell, in parallel, keeping grid order.
fn run_cells<T, F>(template: &SynthConfig, tau_grid: &[f64], trials: usize, f: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(&Instance) -> Result<T> + Sync,
{
    check_sweep(template, tau_grid, trials)?;
    let cells: Vec<(usize, usize)> = (0..tau_grid.len())
        .flat_map(|g| (0..trials).map(move |t| (g, t)))
        .collect();
    let results: Vec<T> = cells
        .par_iter()
        .map(|&(g, t)| {
            let cfg = SynthConfig {
                tau: tau_grid[g],
                ..*template
            };
            let mut rng = cell_rng(template.seed, (g * trials + t) as u64);
            f(&generate_with_rng(&cfg, &mut rng)?)
        })
        .collect::<Result<_>>()?;
    let mut grouped: Vec<Vec<T>> = (0..tau_grid.len()).map(|_| Vec::with_capacity(trials)).collect();
    for (&(g, _), r) in cells.iter().zip(results) {
        grouped[g].push(r);
    }
    Ok(grouped)
}

/// Outcome of the fixed-size matcher on one synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionTrial {
    pub kappa_bar: f64,
    pub precision: f64,
    pub subset_ok: bool,
}

/// Per-trial results of [`run_precision_sweep`], grouped by grid point.
pub fn precision_trials(
    template: &SynthConfig,
    tau_grid: &[f64],
    trials: usize,
    k: usize,
) -> Result<Vec<Vec<PrecisionTrial>>> {
    run_cells(template, tau_grid, trials, |inst| {
        let curve = lss_curve(&inst.x, &inst.y, k)?;
        let pi = curve.matching(k);
        Ok(PrecisionTrial {
            kappa_bar: kappa_bar_all(&inst.truth)?,
            precision: precision(&pi, &inst.truth),
            subset_ok: subset_recovery_ok(&pi, &inst.truth),
        })
    })
}

/// Precision and subset-recovery rate of the size-`k` matching along a tau grid.
///
/// Each row's `kappa_bar` is the mean realized separation of its grid point.
pub fn run_precision_sweep(
    template: &SynthConfig,
    tau_grid: &[f64],
    trials: usize,
    k: usize,
) -> Result<ExperimentTable> {
    let grouped = precision_trials(template, tau_grid, trials, k)?;
    let mut table = ExperimentTable::default();
    for cell in &grouped {
        let kappa = mean_stderr(&cell.iter().map(|t| t.kappa_bar).collect::<Vec<_>>()).0;
        push_metric(&mut table, kappa, METRIC_PRECISION, cell.iter().map(|t| t.precision));
        push_metric(
            &mut table,
            kappa,
            METRIC_SUBSET_RECOVERY,
            cell.iter().map(|t| f64::from(u8::from(t.subset_ok))),
        );
    }
    Ok(table)
}

fn push_metric(table: &mut ExperimentTable, kappa_bar: f64, metric: &str, values: impl Iterator<Item = f64>) {
    let values: Vec<f64> = values.collect();
    let (mean, stderr) = mean_stderr(&values);
    table.rows.push(TableRow {
        kappa_bar,
        metric: metric.to_string(),
        mean,
        trials: values.len(),
        stderr,
    });
}

/// Which size-selection rule a sweep exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Uses the true `sigma^2 + sigma_sharp^2` of the generator.
    KnownNoise,
    UnknownNoise,
}

/// Outcome of size selection on one synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrial {
    pub kappa_bar: f64,
    pub k_hat: usize,
    pub sigma_bar_sq: Option<f64>,
    pub exact: bool,
    pub precision: f64,
}

/// Applies the chosen rule to a full curve of an `n x m` problem in dimension `d`.
///
/// The known-noise rule uses the separation rate of a `max(n, m)`-point problem.
pub fn select_on_curve(
    curve: &LssCurve,
    n: usize,
    m: usize,
    d: usize,
    mode: SelectionMode,
    sigma0_sq: Option<f64>,
    params: UnknownNoiseParams,
) -> Result<SelectionOutcome> {
    match mode {
        SelectionMode::KnownNoise => {
            let s0 = sigma0_sq.ok_or_else(|| Error::Config("known-noise mode needs sigma0^2".into()))?;
            select_k_known_noise(curve, s0, n.max(m), d, params.alpha)
        }
        SelectionMode::UnknownNoise => select_k_unknown_noise_on_curve(curve, n, m, d, params),
    }
}

pub fn selection_trials(
    template: &SynthConfig,
    tau_grid: &[f64],
    trials: usize,
    mode: SelectionMode,
    alpha: f64,
) -> Result<Vec<Vec<SelectionTrial>>> {
    let params = UnknownNoiseParams {
        alpha,
        ..UnknownNoiseParams::default()
    };
    run_cells(template, tau_grid, trials, |inst| {
        let (n, m, d) = (inst.x.len(), inst.y.len(), inst.x.dim());
        let curve = lss_curve_from_costs(&squared_distance_matrix(&inst.x, &inst.y)?, n.min(m))?;
        let out = select_on_curve(&curve, n, m, d, mode, Some(inst.truth.sigma0_sq()), params)?;
        Ok(SelectionTrial {
            kappa_bar: kappa_bar_all(&inst.truth)?,
            k_hat: out.k_hat,
            sigma_bar_sq: out.sigma_bar_sq,
            exact: out.k_hat == inst.truth.k_star() && &out.matching == inst.truth.pi_star(),
            precision: precision(&out.matching, &inst.truth),
        })
    })
}

/// Mean selected size, exact-recovery rate and (unknown noise) mean noise
/// estimate along a tau grid.
pub fn run_selection_sweep(
    template: &SynthConfig,
    tau_grid: &[f64],
    trials: usize,
    mode: SelectionMode,
    alpha: f64,
) -> Result<ExperimentTable> {
    let grouped = selection_trials(template, tau_grid, trials, mode, alpha)?;
    let mut table = ExperimentTable::default();
    for cell in &grouped {
        let kappa = mean_stderr(&cell.iter().map(|t| t.kappa_bar).collect::<Vec<_>>()).0;
        push_metric(&mut table, kappa, METRIC_K_HAT, cell.iter().map(|t| t.k_hat as f64));
        push_metric(
            &mut table,
            kappa,
            METRIC_EXACT_RECOVERY,
            cell.iter().map(|t| f64::from(u8::from(t.exact))),
        );
        if mode == SelectionMode::UnknownNoise {
            push_metric(
                &mut table,
                kappa,
                METRIC_SIGMA_BAR_SQ,
                cell.iter().filter_map(|t| t.sigma_bar_sq),
            );
        }
    }
    Ok(table)
}

/// Counts of selected sizes over a collection of observed pairs, ascending in size.
pub fn k_hat_histogram(k_hats: &[usize]) -> Vec<(usize, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for &k in k_hats {
        *counts.entry(k).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(tau: f64, seed: u64) -> SynthConfig {
        SynthConfig {
            n: 12,
            m: 15,
            d: 8,
            k_star: 7,
            tau,
            sigma: 1.0,
            sigma_sharp: 0.5,
            seed,
        }
    }

    #[test]
    fn noiseless_full_instance_has_zero_diagonal() {
        let cfg = SynthConfig {
            sigma: 0.0,
            sigma_sharp: 0.0,
            k_star: 10,
            n: 10,
            m: 10,
            ..small(1.0, 3)
        };
        let inst = generate_instance(&cfg).unwrap();
        let d = squared_distance_matrix(&inst.x, &inst.y).unwrap();
        for i in 0..10 {
            assert_eq!(d.get(i, i), 0.0);
        }
    }

    #[test]
    fn outlier_shifts_match_the_protocol() {
        // Over 400 coordinates the per-vector mean sits close to the shift.
        let cfg = SynthConfig {
            d: 400,
            ..SynthConfig::standard(1.0, 8)
        };
        let inst = generate_instance(&cfg).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let theta = inst.truth.theta();
        let sharp = inst.truth.theta_sharp();
        let left_outliers = (0..100).filter(|&i| mean(theta.vector(i)) > 0.5).count();
        let right_outliers = (0..100).filter(|&j| mean(sharp.vector(j)) > 1.5).count();
        assert_eq!(left_outliers, 40);
        assert_eq!(right_outliers, 40);
        assert!((60..100).all(|i| mean(theta.vector(i)) > 0.5));
        assert!((60..100).all(|j| mean(sharp.vector(j)) > 1.5));
        assert_eq!(inst.truth.k_star(), 60);
        for i in 0..60 {
            assert_eq!(theta.vector(i), sharp.vector(i));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(&small(2.0, 42)).unwrap();
        let b = generate_instance(&small(2.0, 42)).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
        let c = generate_instance(&small(2.0, 43)).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(generate_instance(&SynthConfig { k_star: 13, ..small(1.0, 0) }).is_err());
        assert!(generate_instance(&SynthConfig { n: 0, ..small(1.0, 0) }).is_err());
        assert!(generate_instance(&SynthConfig { tau: 0.0, ..small(1.0, 0) }).is_err());
        assert!(generate_instance(&SynthConfig { sigma: -1.0, ..small(1.0, 0) }).is_err());
    }

    fn truth(theta: Vec<Vec<f64>>, sharp: Vec<Vec<f64>>, pi: Vec<(usize, usize)>) -> GroundTruth {
        GroundTruth::new(
            PartialMatching::from_pairs(pi),
            FeatureSet::new(theta).unwrap(),
            FeatureSet::new(sharp).unwrap(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn kappa_single_candidate() {
        let gt = truth(vec![vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![3.0, 4.0]], vec![(0, 0)]);
        assert!((kappa_bar_all(&gt).unwrap() - 5.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kappa_duplicate_rows_vanish() {
        let gt = truth(
            vec![vec![1.0], vec![1.0]],
            vec![vec![1.0], vec![7.0]],
            vec![(0, 0)],
        );
        assert_eq!(kappa_bar_all(&gt).unwrap(), 0.0);
    }

    #[test]
    fn kappa_requires_noise() {
        let gt = GroundTruth::new(
            PartialMatching::empty(),
            FeatureSet::new(vec![vec![0.0]]).unwrap(),
            FeatureSet::new(vec![vec![1.0]]).unwrap(),
            0.0,
            0.0,
        )
        .unwrap();
        assert!(matches!(kappa_bar_all(&gt), Err(Error::ZeroNoise)));
    }

    #[test]
    fn kappa_matches_double_loop() {
        let cfg = SynthConfig {
            n: 5,
            m: 6,
            d: 3,
            k_star: 3,
            ..small(1.5, 77)
        };
        let gt = generate_instance(&cfg).unwrap().truth;
        let mut min = f64::INFINITY;
        for i in 0..5 {
            for j in 0..6 {
                if i < 3 && i == j {
                    continue;
                }
                let a = gt.theta().vector(i);
                let b = gt.theta_sharp().vector(j);
                let dist: f64 = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                min = min.min(dist / gt.sigma0_sq().sqrt());
            }
        }
        assert!((kappa_bar_all(&gt).unwrap() - min).abs() < 1e-12);
    }

    #[test]
    fn precision_and_subset_metrics() {
        let gt = generate_instance(&small(1.0, 5)).unwrap().truth;
        let pi = gt.pi_star().clone();
        assert_eq!(precision(&pi, &gt), 1.0);
        assert!(subset_recovery_ok(&pi, &gt));
        let half = PartialMatching::from_pairs(vec![(0, 0), (1, 1), (2, 5), (3, 2)]);
        assert_eq!(precision(&half, &gt), 0.5);
        assert!(!subset_recovery_ok(&half, &gt));
        let outliers = PartialMatching::from_pairs(vec![(8, 9), (10, 12)]);
        assert_eq!(precision(&outliers, &gt), 0.0);
        assert!(subset_recovery_ok(&pi.restricted(|i| i % 2 == 0), &gt));
        assert!(subset_recovery_ok(&PartialMatching::empty(), &gt));
        assert_eq!(precision(&PartialMatching::empty(), &gt), 1.0);
    }

    #[test]
    fn sweep_is_deterministic_and_well_formed() {
        let grid = [0.5, 2.0, 8.0];
        let a = run_precision_sweep(&small(1.0, 9), &grid, 3, 7).unwrap();
        let b = run_precision_sweep(&small(1.0, 9), &grid, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 6);
        assert!(a.rows.iter().all(|r| r.trials == 3 && (0.0..=1.0).contains(&r.mean)));
        let kappas: Vec<f64> = a.metric_rows(METRIC_PRECISION).map(|r| r.kappa_bar).collect();
        assert!(kappas.windows(2).all(|w| w[0] < w[1]), "{kappas:?}");
        let single = run_precision_sweep(&small(1.0, 9), &[3.0], 1, 7).unwrap();
        assert!(single.rows.iter().all(|r| r.stderr == 0.0));
        assert_eq!(single, run_precision_sweep(&small(1.0, 9), &[3.0], 1, 7).unwrap());
    }

    #[test]
    fn selection_sweep_rows() {
        let t = run_selection_sweep(&small(1.0, 2), &[1.0, 6.0], 2, SelectionMode::UnknownNoise, 0.01)
            .unwrap();
        assert_eq!(t.metrics(), vec![METRIC_K_HAT, METRIC_EXACT_RECOVERY, METRIC_SIGMA_BAR_SQ]);
        let t = run_selection_sweep(&small(1.0, 2), &[1.0], 2, SelectionMode::KnownNoise, 0.01).unwrap();
        assert_eq!(t.metrics(), vec![METRIC_K_HAT, METRIC_EXACT_RECOVERY]);
        assert!(run_selection_sweep(&small(1.0, 2), &[1.0], 0, SelectionMode::KnownNoise, 0.01).is_err());
    }

    #[test]
    fn table_csv_header() {
        let t = ExperimentTable {
            rows: vec![TableRow {
                kappa_bar: 12.5,
                metric: "precision".into(),
                mean: 0.75,
                trials: 4,
                stderr: 0.1,
            }],
        };
        assert_eq!(
            t.to_csv_string(),
            "kappa_bar,metric,mean,trials,stderr\n12.5,precision,0.75,4,0.1\n"
        );
    }

    #[test]
    fn histogram_counts() {
        assert_eq!(k_hat_histogram(&[60, 58, 60, 100]), vec![(58, 1), (60, 2), (100, 1)]);
    }

    #[test]
    fn mean_stderr_values() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
