use rayon::prelude::*;
use serde::Serialize;

use super::permute::{arrangements, next_permutation, shuffle, substream};
use super::{active_set, count_extreme, standardize, Inference, Standardized};
use crate::error::Result;
use crate::stats::{compensated_sum, CompensatedSum};
use crate::weights::SpatialWeights;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoranResult {
    #[serde(rename = "I")]
    pub statistic: f64,
    #[serde(rename = "expected_I")]
    pub expected: f64,
    /// Variance of I under the randomization assumption (univariate only).
    pub variance: Option<f64>,
    /// Standardized deviation of I: analytic for univariate statistics,
    /// from the permutation distribution for bivariate ones.
    pub z_score: Option<f64>,
    pub pseudo_p: f64,
    pub permutations: u64,
    pub seed: Option<u64>,
    pub exhaustive: bool,
    /// Non-island observations.
    pub n: usize,
    pub islands: usize,
    pub permutation_mean: f64,
    pub permutation_sd: f64,
}

/// `sum_i x_i * sum_j w_ij y_j` over the active rows.
fn cross_product(w: &SpatialWeights, active: &[usize], x: &[f64], y: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &i in active {
        let lag: f64 = w.neighbors(i).iter().map(|&(j, wij)| wij * y[j]).sum();
        acc.add(x[i] * lag);
    }
    acc.value()
}

struct Replicates {
    values: Vec<f64>,
    /// Number of replicates reported as permutations.
    permutations: u64,
    exhaustive: bool,
}

/// Evaluates `stat(permuted)` for every permutation of the active values of `pool_source`.
fn replicate<F>(active: &[usize], pool_source: &[f64], inference: &Inference, stat: F) -> Result<Replicates>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = pool_source.len();
    let pool: Vec<f64> = active.iter().map(|&i| pool_source[i]).collect();
    match *inference {
        Inference::Random { permutations, seed } => {
            let values = (0..permutations)
                .into_par_iter()
                .map_init(
                    || (pool.clone(), vec![0.0; n]),
                    |(scratch, buf), k| {
                        scratch.copy_from_slice(&pool);
                        let mut rng = substream(seed, k as u64);
                        shuffle(&mut rng, scratch);
                        for (&i, &v) in active.iter().zip(scratch.iter()) {
                            buf[i] = v;
                        }
                        stat(buf)
                    },
                )
                .collect();
            Ok(Replicates { values, permutations: permutations as u64, exhaustive: false })
        }
        Inference::Exhaustive => {
            let total = arrangements(pool.len())?;
            let mut perm: Vec<usize> = (0..pool.len()).collect();
            let mut buf = vec![0.0; n];
            let mut values = Vec::with_capacity(total as usize);
            loop {
                for (&i, &p) in active.iter().zip(&perm) {
                    buf[i] = pool[p];
                }
                values.push(stat(&buf));
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            Ok(Replicates { values, permutations: total - 1, exhaustive: true })
        }
    }
}

fn p_value(reps: &Replicates, observed: f64, expected: f64) -> f64 {
    let extreme = count_extreme(reps.values.iter().copied(), observed, expected);
    if reps.exhaustive {
        // the identity arrangement is among the replicates
        extreme as f64 / reps.values.len() as f64
    } else {
        (1 + extreme) as f64 / (reps.permutations + 1) as f64
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Cliff-Ord variance of I under randomization, restricted to active rows.
fn randomization_variance(w: &SpatialWeights, st: &Standardized) -> Option<f64> {
    let m = st.active.len() as f64;
    if st.active.len() < 4 {
        return None;
    }
    let weight = |i: usize, j: usize| -> f64 {
        let row = w.neighbors(i);
        row.binary_search_by_key(&j, |&(k, _)| k).map(|pos| row[pos].1).unwrap_or(0.0)
    };
    let s0 = w.s0();
    let mut s1 = CompensatedSum::default();
    let mut col_sums = vec![0.0; w.n()];
    for &i in &st.active {
        for &(j, wij) in w.neighbors(i) {
            col_sums[j] += wij;
            let wji = weight(j, i);
            // (j, i) is visited from row j only when w_ji is present
            let t = wij + wji;
            s1.add(if wji > 0.0 { 0.5 * t * t } else { t * t });
        }
    }
    let s1 = s1.value();
    let s2 = compensated_sum(st.active.iter().map(|&i| {
        let row: f64 = w.neighbors(i).iter().map(|&(_, v)| v).sum();
        let t = row + col_sums[i];
        t * t
    }));
    let m2 = compensated_sum(st.active.iter().map(|&i| st.z[i] * st.z[i]));
    let m4 = compensated_sum(st.active.iter().map(|&i| st.z[i].powi(4)));
    let b2 = m * m4 / (m2 * m2);
    let expected = -1.0 / (m - 1.0);
    let a = m * ((m * m - 3.0 * m + 3.0) * s1 - m * s2 + 3.0 * s0 * s0);
    let b = b2 * ((m * m - m) * s1 - 2.0 * m * s2 + 6.0 * s0 * s0);
    let var = (a - b) / ((m - 1.0) * (m - 2.0) * (m - 3.0) * s0 * s0) - expected * expected;
    (var.is_finite() && var > 0.0).then_some(var)
}

/// Univariate global Moran's I.
pub fn global_moran(values: &[f64], w: &SpatialWeights, inference: &Inference) -> Result<MoranResult> {
    inference.validate()?;
    let active = active_set(w, values.len())?;
    let st = standardize(values, &active, "variable")?;
    let m = active.len() as f64;
    let scale = m / w.s0() / compensated_sum(active.iter().map(|&i| st.z[i] * st.z[i]));
    let statistic = scale * cross_product(w, &active, &st.z, &st.z);
    let expected = -1.0 / (m - 1.0);

    let reps = replicate(&active, &st.z, inference, |perm| scale * cross_product(w, &active, perm, perm))?;
    let variance = randomization_variance(w, &st);
    let (permutation_mean, permutation_sd) = mean_sd(&reps.values);
    Ok(MoranResult {
        statistic,
        expected,
        variance,
        z_score: variance.map(|v| (statistic - expected) / v.sqrt()),
        pseudo_p: p_value(&reps, statistic, expected),
        permutations: reps.permutations,
        seed: inference.seed(),
        exhaustive: reps.exhaustive,
        n: active.len(),
        islands: w.islands().len(),
        permutation_mean,
        permutation_sd,
    })
}

/// Bivariate global Moran's I between `x` and the spatial lag of `y`.
/// Replicates permute `y` while `x` and the weights stay fixed.
pub fn bivariate_global_moran(x: &[f64], y: &[f64], w: &SpatialWeights, inference: &Inference) -> Result<MoranResult> {
    inference.validate()?;
    let active = active_set(w, x.len())?;
    active_set(w, y.len())?;
    let sx = standardize(x, &active, "x")?;
    let sy = standardize(y, &active, "y")?;
    let m = active.len() as f64;
    let sxx = compensated_sum(active.iter().map(|&i| sx.z[i] * sx.z[i]));
    let syy = compensated_sum(active.iter().map(|&i| sy.z[i] * sy.z[i]));
    // both sums of squares equal m; the square root keeps x == y bit-compatible with the univariate form
    let scale = m / w.s0() / (sxx * syy).sqrt();
    let statistic = scale * cross_product(w, &active, &sx.z, &sy.z);
    let expected = -1.0 / (m - 1.0);

    let reps = replicate(&active, &sy.z, inference, |perm| scale * cross_product(w, &active, &sx.z, perm))?;
    let (permutation_mean, permutation_sd) = mean_sd(&reps.values);
    let z_score = (permutation_sd > 0.0).then(|| (statistic - permutation_mean) / permutation_sd);
    Ok(MoranResult {
        statistic,
        expected,
        variance: None,
        z_score,
        pseudo_p: p_value(&reps, statistic, expected),
        permutations: reps.permutations,
        seed: inference.seed(),
        exhaustive: reps.exhaustive,
        n: active.len(),
        islands: w.islands().len(),
        permutation_mean,
        permutation_sd,
    })
}
