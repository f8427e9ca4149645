//! k-nearest-neighbours over a feature subset, plus the incremental
//! squared-distance cache that makes single-feature toggles O(queries x
//! train) instead of O(queries x train x f).

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::subset::FeatureSubset;

/// Unweighted-vote kNN. k is forced odd so binary votes can never tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnModel {
    k_neighbors: usize,
}

impl KnnModel {
    pub fn new(k_neighbors: usize) -> Result<Self> {
        if k_neighbors == 0 {
            return Err(Error::InvalidArgument("k_neighbors must be >= 1".into()));
        }
        if k_neighbors.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "k_neighbors must be odd to rule out vote ties, got {k_neighbors}"
            )));
        }
        Ok(KnnModel { k_neighbors })
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    /// Label every query row by majority vote among its k nearest training
    /// rows, with distances taken over the subset's features only.
    pub fn predict(
        &self,
        train: &Dataset,
        subset: &FeatureSubset,
        query: &Dataset,
    ) -> Result<Vec<u8>> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if query.num_features() != train.num_features() {
            return Err(Error::InvalidArgument(format!(
                "query has {} features, training data has {}",
                query.num_features(),
                train.num_features()
            )));
        }
        let cache = DistanceCache::new(query, train, subset);
        self.predict_from_cache(&cache, train.labels(), |_, _| true)
    }

    /// Vote from precomputed squared distances. `allowed(q, t)` masks which
    /// training rows may serve as neighbours of query row q; cross-validation
    /// uses it to exclude the query's own fold.
    pub fn predict_from_cache(
        &self,
        cache: &DistanceCache,
        train_labels: &[u8],
        allowed: impl Fn(usize, usize) -> bool,
    ) -> Result<Vec<u8>> {
        assert_eq!(cache.num_train(), train_labels.len());
        let k = self.k_neighbors;
        let mut out = Vec::with_capacity(cache.num_query());
        // (distance, train index) pairs, kept sorted ascending; ties at the
        // k-th neighbour resolve to the lowest training-row index because
        // candidates arrive in index order and only strict improvements
        // displace an incumbent.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for q in 0..cache.num_query() {
            best.clear();
            for t in 0..train_labels.len() {
                if !allowed(q, t) {
                    continue;
                }
                let d = cache.sq_dist(q, t);
                if best.len() == k && d >= best[k - 1].0 {
                    continue;
                }
                let pos = best.partition_point(|&(bd, _)| bd <= d);
                best.insert(pos, (d, t));
                if best.len() > k {
                    best.pop();
                }
            }
            if best.len() < k {
                return Err(Error::TooFewTrainingRows {
                    k,
                    train: best.len(),
                });
            }
            let ones = best.iter().filter(|&&(_, t)| train_labels[t] == 1).count();
            out.push(u8::from(2 * ones > k));
        }
        Ok(out)
    }
}

/// Squared Euclidean distances between every query row and every training
/// row, restricted to the active feature subset. Toggling one feature
/// adjusts all entries in place.
#[derive(Debug, Clone)]
pub struct DistanceCache {
    num_query: usize,
    num_train: usize,
    sq: Vec<f64>,
    active: FeatureSubset,
}

impl DistanceCache {
    /// All-pairs distances over the active subset. Cost O(|S| * q * t).
    pub fn new(query: &Dataset, train: &Dataset, active: &FeatureSubset) -> Self {
        let mut cache = DistanceCache {
            num_query: query.num_rows(),
            num_train: train.num_rows(),
            sq: vec![0.0; query.num_rows() * train.num_rows()],
            active: FeatureSubset::empty(train.num_features()),
        };
        for j in active.iter() {
            cache.apply(query, train, j, 1.0);
            cache.active.insert(j);
        }
        cache
    }

    pub fn num_query(&self) -> usize {
        self.num_query
    }

    pub fn num_train(&self) -> usize {
        self.num_train
    }

    pub fn active(&self) -> &FeatureSubset {
        &self.active
    }

    #[inline]
    pub fn sq_dist(&self, q: usize, t: usize) -> f64 {
        self.sq[q * self.num_train + t]
    }

    /// Add or remove one feature's squared-difference contribution.
    /// Cost O(q * t), independent of f. Errors on a redundant toggle.
    pub fn toggle(&mut self, query: &Dataset, train: &Dataset, j: usize, on: bool) -> Result<()> {
        if self.active.contains(j) == on {
            return Err(Error::RedundantToggle { feature: j, on });
        }
        self.apply(query, train, j, if on { 1.0 } else { -1.0 });
        self.active.set_checked(j, on)?;
        Ok(())
    }

    fn apply(&mut self, query: &Dataset, train: &Dataset, j: usize, sign: f64) {
        let qcol = query.column(j);
        let tcol = train.column(j);
        for (q, &qv) in qcol.iter().enumerate() {
            let row = &mut self.sq[q * self.num_train..(q + 1) * self.num_train];
            for (slot, &tv) in row.iter_mut().zip(tcol.iter()) {
                let d = qv - tv;
                *slot += sign * d * d;
            }
        }
    }

    /// Move the cache to a different subset by toggling the differing
    /// features, or rebuilding when that is cheaper.
    pub fn retarget(&mut self, query: &Dataset, train: &Dataset, target: &FeatureSubset) {
        let diff = self.active.diff_indices(target);
        if diff.is_empty() {
            return;
        }
        if diff.len() >= target.len() {
            *self = DistanceCache::new(query, train, target);
            return;
        }
        for j in diff {
            let on = target.contains(j);
            self.apply(query, train, j, if on { 1.0 } else { -1.0 });
            if on {
                self.active.insert(j);
            } else {
                self.active.remove(j);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Provenance;
    use rand::Rng;

    fn tiny(columns: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
        let names = (0..columns.len()).map(|j| format!("f{j}")).collect();
        Dataset::new(
            columns,
            labels,
            names,
            Provenance::Synthetic {
                seed: 0,
                informative: vec![],
                noise: 0.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn nearest_point_wins_with_k1() {
        let train = tiny(vec![vec![0.0, 1.0]], vec![0, 1]);
        let query = tiny(vec![vec![0.2, 0.9]], vec![0, 1]);
        let model = KnnModel::new(1).unwrap();
        let subset = FeatureSubset::full(1);
        assert_eq!(model.predict(&train, &subset, &query).unwrap(), vec![0, 1]);
    }

    #[test]
    fn majority_vote_with_k3() {
        let train = tiny(
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            vec![0, 1, 0],
        );
        let query = tiny(vec![vec![0.5, 0.5], vec![0.0, 1.0]], vec![0, 1]);
        let model = KnnModel::new(3).unwrap();
        let subset = FeatureSubset::full(2);
        let preds = model.predict(&train, &subset, &query).unwrap();
        assert_eq!(preds[0], 0); // votes 2:1 for class 0
    }

    #[test]
    fn exact_duplicate_of_training_row_takes_its_label() {
        let train = tiny(
            vec![vec![0.3, 2.0, -1.0], vec![1.0, 0.5, 4.0]],
            vec![1, 0, 1],
        );
        let query = tiny(vec![vec![2.0, 2.0], vec![0.5, 0.5]], vec![0, 1]);
        let model = KnnModel::new(1).unwrap();
        let subset = FeatureSubset::full(2);
        assert_eq!(model.predict(&train, &subset, &query).unwrap()[0], 0);
    }

    #[test]
    fn empty_subset_is_an_error() {
        let train = tiny(vec![vec![0.0, 1.0]], vec![0, 1]);
        let model = KnnModel::new(1).unwrap();
        let subset = FeatureSubset::empty(1);
        assert!(matches!(
            model.predict(&train, &subset, &train),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn k_larger_than_train_set_is_an_error() {
        let train = tiny(vec![vec![0.0, 1.0]], vec![0, 1]);
        let model = KnnModel::new(3).unwrap();
        let subset = FeatureSubset::full(1);
        assert!(model.predict(&train, &subset, &train).is_err());
    }

    #[test]
    fn even_k_is_rejected() {
        assert!(KnnModel::new(2).is_err());
        assert!(KnnModel::new(0).is_err());
        assert!(KnnModel::new(3).is_ok());
    }

    #[test]
    fn single_feature_toggle_on_gives_plain_squared_distance() {
        let train = tiny(vec![vec![1.0, 4.0], vec![0.0, 0.0]], vec![0, 1]);
        let query = tiny(vec![vec![2.0, 3.0], vec![0.0, 0.0]], vec![0, 1]);
        let mut cache = DistanceCache::new(&query, &train, &FeatureSubset::empty(2));
        cache.toggle(&query, &train, 0, true).unwrap();
        assert!((cache.sq_dist(0, 0) - 1.0).abs() < 1e-12);
        assert!((cache.sq_dist(0, 1) - 4.0).abs() < 1e-12);
        assert!((cache.sq_dist(1, 0) - 4.0).abs() < 1e-12);
        assert!((cache.sq_dist(1, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toggle_on_then_off_restores_cache() {
        let train = tiny(vec![vec![1.0, 4.0], vec![2.5, -3.0]], vec![0, 1]);
        let subset = FeatureSubset::from_indices(2, [1]);
        let mut cache = DistanceCache::new(&train, &train, &subset);
        let before: Vec<f64> = (0..2)
            .flat_map(|q| (0..2).map(move |t| (q, t)))
            .map(|(q, t)| cache.sq_dist(q, t))
            .collect();
        cache.toggle(&train, &train, 0, true).unwrap();
        cache.toggle(&train, &train, 0, false).unwrap();
        let after: Vec<f64> = (0..2)
            .flat_map(|q| (0..2).map(move |t| (q, t)))
            .map(|(q, t)| cache.sq_dist(q, t))
            .collect();
        for (b, a) in before.iter().zip(after.iter()) {
            assert!((b - a).abs() < 1e-9);
        }
    }

    #[test]
    fn redundant_toggle_is_an_error() {
        let train = tiny(vec![vec![0.0, 1.0]], vec![0, 1]);
        let mut cache = DistanceCache::new(&train, &train, &FeatureSubset::empty(1));
        assert!(cache.toggle(&train, &train, 0, false).is_err());
        cache.toggle(&train, &train, 0, true).unwrap();
        assert!(cache.toggle(&train, &train, 0, true).is_err());
    }

    /// Brute-force oracle: recompute all squared distances over the active
    /// subset directly from the data.
    fn recompute(query: &Dataset, train: &Dataset, active: &FeatureSubset) -> Vec<f64> {
        let mut out = vec![0.0; query.num_rows() * train.num_rows()];
        for q in 0..query.num_rows() {
            for t in 0..train.num_rows() {
                let mut acc = 0.0;
                for j in active.iter() {
                    let d = query.column(j)[q] - train.column(j)[t];
                    acc += d * d;
                }
                out[q * train.num_rows() + t] = acc;
            }
        }
        out
    }

    #[test]
    fn random_toggle_sequence_matches_recompute_oracle() {
        let mut rng = crate::rng::seeded_rng(99);
        let f = 10;
        let cols: Vec<Vec<f64>> = (0..f)
            .map(|_| (0..20).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let labels: Vec<u8> = (0..20).map(|r| u8::from(r % 2 == 0)).collect();
        let data = tiny(cols, labels);

        let mut cache = DistanceCache::new(&data, &data, &FeatureSubset::empty(f));
        let mut active = FeatureSubset::empty(f);
        for _ in 0..50 {
            let j = rng.random_range(0..f);
            let on = !active.contains(j);
            cache.toggle(&data, &data, j, on).unwrap();
            if on {
                active.insert(j);
            } else {
                active.remove(j);
            }
            let oracle = recompute(&data, &data, &active);
            for (got, want) in cache.sq.iter().zip(oracle.iter()) {
                assert!((got - want).abs() < 1e-9, "cache drifted from oracle");
            }
        }
    }

    #[test]
    fn retarget_matches_fresh_construction() {
        let mut rng = crate::rng::seeded_rng(7);
        let f = 12;
        let cols: Vec<Vec<f64>> = (0..f)
            .map(|_| (0..15).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<u8> = (0..15).map(|r| u8::from(r < 7)).collect();
        let data = tiny(cols, labels);

        let start = FeatureSubset::from_indices(f, [0, 3, 4, 9]);
        let target = FeatureSubset::from_indices(f, [3, 5, 11]);
        let mut cache = DistanceCache::new(&data, &data, &start);
        cache.retarget(&data, &data, &target);
        let fresh = DistanceCache::new(&data, &data, &target);
        assert_eq!(cache.active(), &target);
        for (a, b) in cache.sq.iter().zip(fresh.sq.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn permuting_training_rows_preserves_predictions() {
        let mut rng = crate::rng::seeded_rng(3);
        let f = 4;
        let m = 12;
        let cols: Vec<Vec<f64>> = (0..f)
            .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<u8> = (0..m).map(|_| rng.random_range(0..2) as u8).collect();
        let labels = if labels.iter().all(|&l| l == labels[0]) {
            let mut l = labels;
            l[0] = 1 - l[0];
            l
        } else {
            labels
        };
        let train = tiny(cols.clone(), labels.clone());

        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..m).collect();
            use rand::seq::SliceRandom;
            p.shuffle(&mut rng);
            p
        };
        let permuted = tiny(
            cols.iter()
                .map(|c| perm.iter().map(|&r| c[r]).collect())
                .collect(),
            perm.iter().map(|&r| labels[r]).collect(),
        );

        let query = tiny(
            (0..f)
                .map(|_| (0..5).map(|_| rng.random::<f64>()).collect())
                .collect(),
            vec![0, 1, 0, 1, 0],
        );
        let model = KnnModel::new(3).unwrap();
        let subset = FeatureSubset::full(f);
        // Distances are continuous draws, so distinct with probability one.
        assert_eq!(
            model.predict(&train, &subset, &query).unwrap(),
            model.predict(&permuted, &subset, &query).unwrap()
        );
    }

    #[test]
    fn constant_feature_never_changes_predictions() {
        let train = tiny(
            vec![vec![0.0, 1.0, 2.0, 3.0], vec![7.0, 7.0, 7.0, 7.0]],
            vec![0, 0, 1, 1],
        );
        let query = tiny(vec![vec![0.4, 2.6], vec![7.0, 7.0]], vec![0, 1]);
        let model = KnnModel::new(3).unwrap();
        let without = FeatureSubset::from_indices(2, [0]);
        let with = FeatureSubset::full(2);
        assert_eq!(
            model.predict(&train, &without, &query).unwrap(),
            model.predict(&train, &with, &query).unwrap()
        );
    }
}
