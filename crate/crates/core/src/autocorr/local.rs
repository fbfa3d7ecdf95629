use rayon::prelude::*;
use serde::Serialize;

use super::permute::{arrangements, next_permutation, partial_shuffle, substream};
use super::{active_set, count_extreme, standardize, ClusterLabel, Inference, Standardized};
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;
use crate::weights::SpatialWeights;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LisaResult {
    /// `z_i * lag_i`; `None` for islands.
    pub local_i: Option<f64>,
    pub pseudo_p: Option<f64>,
    pub z: Option<f64>,
    pub lag: Option<f64>,
    pub label: ClusterLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMoran {
    pub results: Vec<LisaResult>,
    pub alpha: f64,
    pub permutations: u64,
    pub seed: Option<u64>,
    pub exhaustive: bool,
}

impl LocalMoran {
    /// Mean of the local statistics over non-island observations.
    pub fn mean_local_i(&self) -> f64 {
        let vals: Vec<f64> = self.results.iter().filter_map(|r| r.local_i).collect();
        crate::stats::compensated_sum(vals.iter().copied()) / vals.len() as f64
    }

    pub fn labels(&self) -> Vec<ClusterLabel> {
        self.results.iter().map(|r| r.label).collect()
    }
}

fn weighted_lag(row: &[(usize, f64)], values: impl Fn(usize, usize) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for (t, &(j, wij)) in row.iter().enumerate() {
        acc.add(wij * values(t, j));
    }
    acc.value()
}

/// Conditional-permutation p-value for observation `i`: `zx_i` stays put
/// and the neighbor slots receive values of `zy` drawn from the other
/// active observations.
fn conditional_p(
    i: usize,
    w: &SpatialWeights,
    zx: &Standardized,
    zy: &Standardized,
    observed: f64,
    inference: &Inference,
) -> f64 {
    let row = w.neighbors(i);
    let others: Vec<usize> = zy.active.iter().copied().filter(|&j| j != i).collect();
    let pool_len = others.len() as f64;
    let row_sum: f64 = row.iter().map(|&(_, v)| v).sum();
    let expected = -zx.z[i] * zy.z[i] * row_sum / pool_len;
    match *inference {
        Inference::Random { permutations, seed } => {
            let mut rng = substream(seed, i as u64);
            let mut pool: Vec<f64> = others.iter().map(|&j| zy.z[j]).collect();
            let reps = (0..permutations).map(|_| {
                partial_shuffle(&mut rng, &mut pool, row.len());
                zx.z[i] * weighted_lag(row, |t, _| pool[t])
            });
            let reps: Vec<f64> = reps.collect();
            let extreme = count_extreme(reps.into_iter(), observed, expected);
            (1 + extreme) as f64 / (permutations + 1) as f64
        }
        Inference::Exhaustive => {
            let slot_of: Vec<usize> =
                row.iter().map(|&(j, _)| others.binary_search(&j).expect("neighbor is active")).collect();
            let mut perm: Vec<usize> = (0..others.len()).collect();
            let mut reps = Vec::new();
            loop {
                reps.push(zx.z[i] * weighted_lag(row, |t, _| zy.z[others[perm[slot_of[t]]]]));
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            let total = reps.len();
            count_extreme(reps.into_iter(), observed, expected) as f64 / total as f64
        }
    }
}

fn local_core(
    zx: &Standardized,
    zy: &Standardized,
    w: &SpatialWeights,
    inference: &Inference,
    alpha: f64,
) -> Result<LocalMoran> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must be in (0, 1], got {alpha}")));
    }
    let permutations = match *inference {
        Inference::Random { permutations, .. } => permutations as u64,
        Inference::Exhaustive => arrangements(zy.active.len() - 1)? - 1,
    };
    let results = (0..w.n())
        .into_par_iter()
        .map(|i| {
            if w.is_island(i) {
                return LisaResult { local_i: None, pseudo_p: None, z: None, lag: None, label: ClusterLabel::Island };
            }
            let lag = weighted_lag(w.neighbors(i), |_, j| zy.z[j]);
            let local_i = zx.z[i] * lag;
            let p = conditional_p(i, w, zx, zy, local_i, inference);
            let label = if p > alpha { ClusterLabel::NotSignificant } else { ClusterLabel::quadrant(zx.z[i], lag) };
            LisaResult { local_i: Some(local_i), pseudo_p: Some(p), z: Some(zx.z[i]), lag: Some(lag), label }
        })
        .collect();
    Ok(LocalMoran {
        results,
        alpha,
        permutations,
        seed: inference.seed(),
        exhaustive: matches!(inference, Inference::Exhaustive),
    })
}

/// Anselin local Moran's I with conditional-permutation inference.
pub fn local_moran(values: &[f64], w: &SpatialWeights, inference: &Inference, alpha: f64) -> Result<LocalMoran> {
    inference.validate()?;
    let active = active_set(w, values.len())?;
    let st = standardize(values, &active, "variable")?;
    local_core(&st, &st, w, inference, alpha)
}

/// Bivariate local Moran's I: `zx_i` against the spatial lag of `zy`.
pub fn bivariate_local_moran(
    x: &[f64],
    y: &[f64],
    w: &SpatialWeights,
    inference: &Inference,
    alpha: f64,
) -> Result<LocalMoran> {
    inference.validate()?;
    let active = active_set(w, x.len())?;
    active_set(w, y.len())?;
    let sx = standardize(x, &active, "x")?;
    let sy = standardize(y, &active, "y")?;
    local_core(&sx, &sy, w, inference, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> SpatialWeights {
        let mut rows = vec![(1..=leaves).map(|j| (j, 1.0)).collect::<Vec<_>>()];
        rows.extend((1..=leaves).map(|_| vec![(0, 1.0)]));
        SpatialWeights::from_neighbors(rows, false).unwrap().row_standardize()
    }

    #[test]
    fn star_hub_matches_hand_formula() {
        let x = [3.0, 1.0, 1.0, 1.0, 1.0];
        let r = local_moran(&x, &star(4), &Inference::random(99, 5), 0.05).unwrap();
        // mean 1.4, population sd 0.8: z_hub = 2, z_leaf = -0.5
        let hub = &r.results[0];
        assert!((hub.local_i.unwrap() - 2.0 * -0.5).abs() < 1e-12);
        assert!((hub.z.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn islands_are_labelled() {
        let rows = vec![vec![(1, 1.0)], vec![(0, 0.5), (2, 0.5)], vec![(1, 1.0)], vec![]];
        let w = SpatialWeights::from_neighbors(rows, true).unwrap();
        let r = local_moran(&[1.0, 2.0, 4.0, 100.0], &w, &Inference::random(99, 0), 0.05).unwrap();
        assert_eq!(r.results[3].label, ClusterLabel::Island);
        assert_eq!(r.results[3].pseudo_p, None);
        assert!(r.results[..3].iter().all(|o| o.pseudo_p.is_some()));
    }

    #[test]
    fn bad_alpha_rejected() {
        assert!(local_moran(&[1.0, 2.0, 4.0, 3.0, 0.0], &star(4), &Inference::default(), 0.0).is_err());
    }
}
