//! The adaptive Mantel test: shared-permutation evaluation of a list of
//! kernel pairs, per-kernel permutation p-values, and the min-p adaptive
//! p-value.
//!
//! One sequence of permutations is drawn up front from the seed and applied
//! to every metric, so per-metric p-values are comparable and the minimum is
//! calibrated by the same permutation distribution. Statistic evaluation over
//! (metric, permutation) cells is embarrassingly parallel; each cell lands in
//! its own slot, so results are identical for any thread count.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::{gram_family, GramMatrix, GramPath, KernelSpec};
use crate::stats::flat_dot;

/// Largest n for which exhaustive permutation enumeration is offered (8! − 1
/// non-identity permutations).
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// An ordered, non-empty list of (x-side, y-side) kernel pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPairList {
    pairs: Vec<(KernelSpec, KernelSpec)>,
}

impl MetricPairList {
    pub fn new(pairs: Vec<(KernelSpec, KernelSpec)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyMetricList);
        }
        for (x, y) in &pairs {
            x.validate()?;
            y.validate()?;
        }
        Ok(Self { pairs })
    }

    /// Full cross product of an x-side grid with a y-side grid.
    pub fn cross_product(x_specs: &[KernelSpec], y_specs: &[KernelSpec]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(x_specs.len() * y_specs.len());
        for &x in x_specs {
            for &y in y_specs {
                pairs.push((x, y));
            }
        }
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[(KernelSpec, KernelSpec)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// How the permutation set is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationScheme {
    /// B independent uniform shuffles (with replacement across draws).
    Sampled { count: usize },
    /// All n! − 1 non-identity permutations, in lexicographic order; n ≤ 8.
    Exhaustive,
}

/// Number of permutations plus the seed of the generator stream.
///
/// Permutations come from a ChaCha8 stream via Fisher–Yates shuffles, which
/// is platform-stable for a pinned dependency set. They are generated once,
/// sequentially, before any statistic is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationPlan {
    pub scheme: PermutationScheme,
    pub seed: u64,
}

impl PermutationPlan {
    /// B seeded random permutations, B ≥ 1.
    pub fn sampled(count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "permutation count must be at least 1".into(),
            ));
        }
        Ok(Self {
            scheme: PermutationScheme::Sampled { count },
            seed,
        })
    }

    /// Every non-identity permutation; exact inference for small n.
    pub fn exhaustive() -> Self {
        Self {
            scheme: PermutationScheme::Exhaustive,
            seed: 0,
        }
    }

    /// The number B of non-identity replicates this plan yields at size n.
    pub fn count(&self, n: usize) -> Result<usize> {
        match self.scheme {
            PermutationScheme::Sampled { count } => Ok(count),
            PermutationScheme::Exhaustive => {
                if n < 2 || n > EXHAUSTIVE_LIMIT {
                    return Err(Error::InvalidParameter(format!(
                        "exhaustive permutations require 2 ≤ n ≤ {EXHAUSTIVE_LIMIT}, got {n}"
                    )));
                }
                Ok((2..=n).product::<usize>() - 1)
            }
        }
    }

    /// Generates the B permutations of 0..n (the identity replicate b = 0 is
    /// implicit and not included).
    pub fn generate(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        if n < 2 {
            return Err(Error::InsufficientObservations { needed: 2, got: n });
        }
        match self.scheme {
            PermutationScheme::Sampled { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut perms = Vec::with_capacity(count);
                for _ in 0..count {
                    let mut idx: Vec<usize> = (0..n).collect();
                    idx.shuffle(&mut rng);
                    perms.push(idx);
                }
                Ok(perms)
            }
            PermutationScheme::Exhaustive => {
                let b = self.count(n)?;
                let mut perms = Vec::with_capacity(b);
                let mut current: Vec<usize> = (0..n).collect();
                while next_lex_permutation(&mut current) {
                    perms.push(current.clone());
                }
                debug_assert_eq!(perms.len(), b);
                Ok(perms)
            }
        }
    }
}

/// Advances to the next permutation in lexicographic order; false at the end.
fn next_lex_permutation(a: &mut [usize]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Result of one adaptive Mantel run over M metric pairs and B permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaMantResult {
    /// Observed statistics T_m^(0), length M.
    pub per_metric_stat: Vec<f64>,
    /// Per-metric permutation p-values P_m^(0), length M.
    pub per_metric_p: Vec<f64>,
    /// All statistics T_m^(b): row b ∈ 0..=B (0 = observed), column m.
    pub stat_table: DMatrix<f64>,
    /// Per-metric p-values at every replicate, same layout as `stat_table`.
    pub p_table: DMatrix<f64>,
    /// min_m P_m^(b) per replicate, length B + 1.
    pub min_p: Vec<f64>,
    /// The adaptive (min-p calibrated) p-value.
    pub adaptive_p: f64,
    /// Index of the metric attaining min_m P_m^(0); ties take the lowest index.
    pub selected_metric: usize,
    /// Seed the permutation stream was drawn from.
    pub seed_echo: u64,
}

/// Behavioral switches for [`adamant_with_options`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AdamantOptions {
    /// Count permutations with P^(0) ≤ P^(b) instead of P^(0) ≥ P^(b) in the
    /// final p-value, reproducing the published formula verbatim. Under the
    /// published direction a strong association yields a LARGE p-value; the
    /// default direction counts permutation minima at least as extreme (as
    /// small) as the observed one.
    pub paper_p_direction: bool,
    /// Computation route for the Gram matrices.
    pub gram_path: GramPath,
}

/// Applies a permutation to rows and columns: out[i][j] = H[perm(i)][perm(j)].
pub fn permute_gram(h: &GramMatrix, perm: &[usize]) -> Result<GramMatrix> {
    let n = h.dim();
    validate_permutation(perm, n)?;
    let hv = h.values();
    let values = DMatrix::from_fn(n, n, |i, j| hv[(perm[i], perm[j])]);
    GramMatrix::try_new(values)
}

fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Gathers H with rows and columns permuted into a column-major scratch slice.
fn gather_permuted(h: &DMatrix<f64>, perm: &[usize], scratch: &mut [f64]) {
    let n = perm.len();
    let hs = h.as_slice();
    for (jc, &pj) in perm.iter().enumerate() {
        let col = &hs[pj * n..(pj + 1) * n];
        let dst = &mut scratch[jc * n..(jc + 1) * n];
        for (d, &pi) in dst.iter_mut().zip(perm.iter()) {
            *d = col[pi];
        }
    }
}

/// Grouped Gram matrices for shared-permutation evaluation: distinct x-side
/// matrices (each permuted once per replicate) and per-metric y-side ones.
struct MetricGrams {
    distinct_h: Vec<GramMatrix>,
    /// Metric indices grouped by their distinct x-side Gram.
    groups: Vec<Vec<usize>>,
    k: Vec<GramMatrix>,
    k_index: Vec<usize>,
    n: usize,
    m: usize,
}

impl MetricGrams {
    fn build(x: &DataMatrix, y: &DataMatrix, metrics: &MetricPairList, path: GramPath) -> Result<Self> {
        let n = x.n_observations();
        if y.n_observations() != n {
            return Err(Error::DimensionMismatch {
                context: "X and Y must have the same observation count",
                expected: n,
                got: y.n_observations(),
            });
        }
        let mut x_specs: Vec<KernelSpec> = Vec::new();
        let mut y_specs: Vec<KernelSpec> = Vec::new();
        let mut h_index = Vec::with_capacity(metrics.len());
        let mut k_index = Vec::with_capacity(metrics.len());
        for (xs, ys) in metrics.pairs() {
            h_index.push(intern_spec(&mut x_specs, xs));
            k_index.push(intern_spec(&mut y_specs, ys));
        }
        let distinct_h = gram_family(x, &x_specs, path)?;
        let distinct_k = gram_family(y, &y_specs, path)?;
        let mut groups = vec![Vec::new(); distinct_h.len()];
        for (m, &hi) in h_index.iter().enumerate() {
            groups[hi].push(m);
        }
        Ok(Self {
            distinct_h,
            groups,
            k: distinct_k,
            k_index,
            n,
            m: metrics.len(),
        })
    }

    /// Wraps pre-built Gram matrices as a single-metric group.
    fn from_grams(h: &GramMatrix, k: &GramMatrix) -> Result<Self> {
        if h.dim() != k.dim() {
            return Err(Error::DimensionMismatch {
                context: "Gram matrices must share the observation count",
                expected: h.dim(),
                got: k.dim(),
            });
        }
        Ok(Self {
            distinct_h: vec![h.clone()],
            groups: vec![vec![0]],
            k: vec![k.clone()],
            k_index: vec![0],
            n: h.dim(),
            m: 1,
        })
    }

    /// Statistics for one permutation, written into `out` (length M).
    fn eval(&self, perm: &[usize], scratch: &mut [f64], out: &mut [f64]) {
        for (hv, metrics) in self.distinct_h.iter().zip(&self.groups) {
            gather_permuted(hv.values(), perm, scratch);
            for &m in metrics {
                out[m] = flat_dot(scratch, self.k[self.k_index[m]].values().as_slice());
            }
        }
    }

    /// The full (B+1)×M statistic table; row 0 is the identity permutation.
    fn statistic_table(&self, perms: &[Vec<usize>]) -> DMatrix<f64> {
        let identity: Vec<usize> = (0..self.n).collect();
        let rows: Vec<Vec<f64>> = (0..=perms.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; self.n * self.n],
                |scratch, b| {
                    let perm = if b == 0 { &identity } else { &perms[b - 1] };
                    let mut row = vec![0.0; self.m];
                    self.eval(perm, scratch, &mut row);
                    row
                },
            )
            .collect();
        DMatrix::from_fn(perms.len() + 1, self.m, |b, m| rows[b][m])
    }
}

fn intern_spec(specs: &mut Vec<KernelSpec>, spec: &KernelSpec) -> usize {
    if let Some(pos) = specs.iter().position(|s| s == spec) {
        pos
    } else {
        specs.push(*spec);
        specs.len() - 1
    }
}

/// Permutation p-values for one statistic column: P^(b) counts replicates
/// whose statistic is at least T^(b), including b itself, over B + 1.
fn column_p_values(stats: &[f64]) -> Vec<f64> {
    let total = stats.len();
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("statistics must be finite"));
    stats
        .iter()
        .map(|&t| {
            let below = sorted.partition_point(|&v| v < t);
            (total - below) as f64 / total as f64
        })
        .collect()
}

/// Plain Mantel permutation test of two Gram matrices: returns the observed
/// statistic tr(HK) and its p-value, permuting H's rows and columns.
pub fn single_mantel_test(
    h: &GramMatrix,
    k: &GramMatrix,
    plan: &PermutationPlan,
) -> Result<(f64, f64)> {
    let grams = MetricGrams::from_grams(h, k)?;
    let perms = plan.generate(grams.n)?;
    let table = grams.statistic_table(&perms);
    let col: Vec<f64> = table.column(0).iter().cloned().collect();
    let p = column_p_values(&col);
    Ok((col[0], p[0]))
}

/// Adaptive Mantel test over a metric pair list with default options.
pub fn adamant(
    x: &DataMatrix,
    y: &DataMatrix,
    metrics: &MetricPairList,
    plan: &PermutationPlan,
) -> Result<AdaMantResult> {
    adamant_with_options(x, y, metrics, plan, &AdamantOptions::default())
}

/// Adaptive Mantel test over a metric pair list.
///
/// Per metric m, H_m and K_m are computed once; the same B seeded
/// permutations are applied to every H_m. P_m^(b) counts replicates with
/// statistic ≥ T_m^(b); the adaptive p-value counts replicates whose minimum
/// per-metric p-value is at most the observed minimum (both counts include
/// the observed replicate, so every p-value is a multiple of 1/(B+1)).
pub fn adamant_with_options(
    x: &DataMatrix,
    y: &DataMatrix,
    metrics: &MetricPairList,
    plan: &PermutationPlan,
    options: &AdamantOptions,
) -> Result<AdaMantResult> {
    if !x.is_centered() || !y.is_centered() {
        return Err(Error::NotCentered);
    }
    let grams = MetricGrams::build(x, y, metrics, options.gram_path)?;
    let perms = plan.generate(grams.n)?;
    let stat_table = grams.statistic_table(&perms);
    let rows = stat_table.nrows();
    let m = grams.m;

    let mut p_table = DMatrix::zeros(rows, m);
    for mi in 0..m {
        let col: Vec<f64> = stat_table.column(mi).iter().cloned().collect();
        let p = column_p_values(&col);
        for (b, v) in p.into_iter().enumerate() {
            p_table[(b, mi)] = v;
        }
    }

    let min_p: Vec<f64> = (0..rows)
        .map(|b| p_table.row(b).iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let observed_min = min_p[0];
    let count = min_p
        .iter()
        .filter(|&&pb| {
            if options.paper_p_direction {
                observed_min <= pb
            } else {
                observed_min >= pb
            }
        })
        .count();
    let adaptive_p = count as f64 / rows as f64;

    let per_metric_stat: Vec<f64> = stat_table.row(0).iter().cloned().collect();
    let per_metric_p: Vec<f64> = p_table.row(0).iter().cloned().collect();
    let selected_metric = per_metric_p
        .iter()
        .enumerate()
        .fold(0usize, |best, (i, &p)| {
            if p < per_metric_p[best] {
                i
            } else {
                best
            }
        });

    Ok(AdaMantResult {
        per_metric_stat,
        per_metric_p,
        stat_table,
        p_table,
        min_p,
        adaptive_p,
        selected_metric,
        seed_echo: plan.seed,
    })
}

/// Maps heritability values to ridge penalties λ = p(1−h²)/h², deduplicated
/// and ascending.
pub fn lambda_grid_from_heritability(p: usize, h2_values: &[f64]) -> Result<Vec<f64>> {
    let mut grid = Vec::with_capacity(h2_values.len());
    for &h2 in h2_values {
        if !(h2 > 0.0 && h2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "heritability must lie in (0, 1), got {h2}"
            )));
        }
        grid.push(p as f64 * (1.0 - h2) / h2);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite penalties"));
    grid.dedup();
    Ok(grid)
}
