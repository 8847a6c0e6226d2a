//! Brute-force k-nearest-neighbors and nearest-centroid classifiers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcdistance::{argmin, cosine_from_parts, Metric, Representatives};
use crate::error::{Error, Result};
use crate::sparse::{FeatureRow, SparseVector};

pub const DEFAULT_K: usize = 5;

/// Prediction for one query row. `votes[c]` counts the neighbors of class
/// `c`; for the centroid classifier it marks the chosen class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub row: usize,
    pub predicted: usize,
    pub votes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct KnnModel<R: FeatureRow> {
    rows: Vec<R>,
    labels: Vec<usize>,
    sq_norms: Vec<f64>,
    n_classes: usize,
    dim: usize,
    k: usize,
    metric: Metric,
}

fn check_width<R: FeatureRow>(row: &R, dim: usize) -> Result<()> {
    let w = row.width();
    let ok = if R::is_sparse() { w <= dim } else { w == dim };
    if !ok {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: w,
        });
    }
    Ok(())
}

impl<R: FeatureRow> KnnModel<R> {
    pub fn fit(
        rows: Vec<R>,
        labels: Vec<usize>,
        n_classes: usize,
        dim: usize,
        k: usize,
        metric: Metric,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("kNN needs at least one training row".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Invariant(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if k == 0 || k > rows.len() {
            return Err(Error::Config(format!(
                "k must be in [1, {}], got {k}",
                rows.len()
            )));
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= n_classes) {
            return Err(Error::Invariant(format!(
                "label {c} outside {n_classes} classes"
            )));
        }
        for r in &rows {
            check_width(r, dim)?;
        }
        let sq_norms = rows.iter().map(FeatureRow::sq_norm).collect();
        Ok(KnnModel {
            rows,
            labels,
            sq_norms,
            n_classes,
            dim,
            k,
            metric,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn distance(&self, query: &R, query_sq_norm: f64, i: usize) -> f64 {
        match self.metric {
            Metric::Euclidean => query.sq_dist(&self.rows[i]).max(0.0).sqrt(),
            Metric::Cosine => cosine_from_parts(
                query.dot(&self.rows[i]),
                query_sq_norm.sqrt(),
                self.sq_norms[i].sqrt(),
            ),
        }
    }

    /// The k nearest training rows as `(distance, index)`, sorted by distance
    /// then index.
    pub fn neighbors(&self, query: &R) -> Vec<(f64, usize)> {
        let qn = query.sq_norm();
        let mut all: Vec<(f64, usize)> = (0..self.rows.len())
            .map(|i| (self.distance(query, qn, i), i))
            .collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < all.len() {
            all.select_nth_unstable_by(self.k - 1, by_key);
            all.truncate(self.k);
        }
        all.sort_by(by_key);
        all
    }

    fn predict_one(&self, row: usize, query: &R) -> Prediction {
        let nn = self.neighbors(query);
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in &nn {
            votes[self.labels[i]] += 1;
        }
        let top = votes.iter().copied().max().unwrap_or(0);
        // neighbors are sorted, so the first one of a tied class is that
        // class's nearest member
        let predicted = nn
            .iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&c| votes[c] == top)
            .expect("at least one neighbor");
        Prediction {
            row,
            predicted,
            votes,
        }
    }
}

pub fn knn_predict<R: FeatureRow>(model: &KnnModel<R>, queries: &[R]) -> Result<Vec<Prediction>> {
    for q in queries {
        check_width(q, model.dim)?;
    }
    Ok(queries
        .par_iter()
        .enumerate()
        .map(|(row, q)| model.predict_one(row, q))
        .collect())
}

/// Closest representative per query, ties to the lowest class index.
pub fn centroid_predict(
    reps: &Representatives,
    queries: &[SparseVector],
    metric: Metric,
) -> Result<Vec<Prediction>> {
    for q in queries {
        check_width(q, reps.dim())?;
    }
    Ok(queries
        .par_iter()
        .enumerate()
        .map(|(row, q)| {
            let d: Vec<f64> = (0..reps.len())
                .map(|c| reps.distance(q, c, metric))
                .collect();
            let predicted = argmin(&d);
            let mut votes = vec![0; reps.len()];
            votes[predicted] = 1;
            Prediction {
                row,
                predicted,
                votes,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcdistance::{build_representatives, transform};
    use crate::vectorizer::CorpusMatrix;
    use proptest::prelude::*;

    fn model(rows: &[[f64; 2]], labels: &[usize], k: usize, metric: Metric) -> KnnModel<Vec<f64>> {
        KnnModel::fit(
            rows.iter().map(|r| r.to_vec()).collect(),
            labels.to_vec(),
            2,
            2,
            k,
            metric,
        )
        .unwrap()
    }

    fn predict(m: &KnnModel<Vec<f64>>, q: [f64; 2]) -> usize {
        knn_predict(m, &[q.to_vec()]).unwrap()[0].predicted
    }

    #[test]
    fn identical_row_with_k1() {
        let m = model(&[[0.0, 0.0], [5.0, 5.0]], &[0, 1], 1, Metric::Euclidean);
        assert_eq!(predict(&m, [5.0, 5.0]), 1);
    }

    #[test]
    fn vote_tie_goes_to_nearest_member() {
        let m = model(
            &[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [4.0, 0.0]],
            &[0, 0, 1, 1],
            4,
            Metric::Euclidean,
        );
        assert_eq!(predict(&m, [2.6, 0.0]), 1);
        assert_eq!(predict(&m, [1.4, 0.0]), 0);
    }

    #[test]
    fn boundary_ties_by_training_index() {
        // rows 1 and 2 are equidistant; k=2 keeps row 0 and row 1
        let m = model(
            &[[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]],
            &[0, 1, 0],
            2,
            Metric::Euclidean,
        );
        let p = &knn_predict(&m, &[vec![0.0, 0.0]]).unwrap()[0];
        assert_eq!(p.votes, [1, 1]);
        assert_eq!(p.predicted, 0);
        let m = model(
            &[[0.5, 0.0], [1.0, 0.0], [-1.0, 0.0]],
            &[1, 1, 0],
            3,
            Metric::Euclidean,
        );
        assert_eq!(predict(&m, [0.0, 0.0]), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let rows = vec![vec![0.0, 0.0]];
        assert!(KnnModel::fit(Vec::<Vec<f64>>::new(), vec![], 1, 2, 1, Metric::Euclidean).is_err());
        assert!(KnnModel::fit(rows.clone(), vec![0], 1, 2, 2, Metric::Euclidean).is_err());
        let m = KnnModel::fit(rows, vec![0], 1, 2, 1, Metric::Euclidean).unwrap();
        assert!(matches!(
            knn_predict(&m, &[vec![1.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn oracle(train: &[[f64; 2]], labels: &[usize], q: [f64; 2], k: usize) -> usize {
        let mut d: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, p)| (((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(), i))
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut votes = [0, 0];
        for &(_, i) in &d[..k] {
            votes[labels[i]] += 1;
        }
        if votes[0] > votes[1] {
            0
        } else if votes[1] > votes[0] {
            1
        } else {
            labels[d[0].1]
        }
    }

    #[test]
    fn seven_point_planar_instance() {
        let train = [
            [0.0, 0.0],
            [1.0, 0.5],
            [0.5, 2.0],
            [4.0, 4.0],
            [5.0, 3.5],
            [3.0, 5.0],
            [2.0, 2.0],
        ];
        let labels = [0, 0, 0, 1, 1, 1, 1];
        let m = model(&train, &labels, 3, Metric::Euclidean);
        for q in [
            [0.2, 0.1],
            [4.5, 4.0],
            [2.0, 1.5],
            [1.5, 2.5],
            [3.0, 3.0],
            [0.0, 3.0],
        ] {
            assert_eq!(predict(&m, q), oracle(&train, &labels, q, 3), "query {q:?}");
        }
        assert_eq!(predict(&m, [0.2, 0.1]), 0);
        assert_eq!(predict(&m, [4.5, 4.0]), 1);
    }

    #[test]
    fn centroid_examples() {
        let reps = Representatives::from_vectors(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let q = |d: &[f64]| SparseVector::from_dense(d).unwrap();
        let p =
            centroid_predict(&reps, &[q(&[0.0, 1.0]), q(&[1.0, 1.0])], Metric::Euclidean).unwrap();
        assert_eq!(p[0].predicted, 1);
        assert_eq!(p[1].predicted, 0);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let dense = vec![
            vec![1.0, 0.0, 2.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ];
        let sparse: Vec<SparseVector> = dense
            .iter()
            .map(|r| SparseVector::from_dense(r).unwrap())
            .collect();
        let q = vec![0.5, 0.0, 1.5];
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let md = KnnModel::fit(dense.clone(), vec![0, 1, 1], 2, 3, 1, metric).unwrap();
            let ms = KnnModel::fit(sparse.clone(), vec![0, 1, 1], 2, 3, 1, metric).unwrap();
            assert_eq!(
                knn_predict(&md, std::slice::from_ref(&q)).unwrap(),
                knn_predict(&ms, &[SparseVector::from_dense(&q).unwrap()]).unwrap()
            );
        }
    }

    fn points(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), n)
    }

    proptest! {
        #[test]
        fn permutation_invariant(train in points(9), labels in prop::collection::vec(0usize..3, 9),
                                 queries in points(4), rot in 0usize..9, k in 1usize..6,
                                 cosine in any::<bool>()) {
            let metric = if cosine { Metric::Cosine } else { Metric::Euclidean };
            let m = KnnModel::fit(train.clone(), labels.clone(), 3, 3, k, metric).unwrap();
            let mut perm: Vec<usize> = (0..9).collect();
            perm.rotate_left(rot);
            perm.reverse();
            let m2 = KnnModel::fit(
                perm.iter().map(|&i| train[i].clone()).collect(),
                perm.iter().map(|&i| labels[i]).collect(),
                3, 3, k, metric,
            ).unwrap();
            for q in &queries {
                let nn = m.neighbors(q);
                let qn = q.sq_norm();
                let kth = nn[k - 1].0;
                let boundary_tie = (0..9).filter(|&i| m.distance(q, qn, i) == kth).count() > 1;
                let mut dists: Vec<f64> = (0..9).map(|i| m.distance(q, qn, i)).collect();
                dists.sort_by(f64::total_cmp);
                let any_tie = dists.windows(2).any(|w| w[0] == w[1]);
                prop_assume!(!boundary_tie && !any_tie);
                prop_assert_eq!(
                    knn_predict(&m, std::slice::from_ref(q)).unwrap()[0].predicted,
                    knn_predict(&m2, std::slice::from_ref(q)).unwrap()[0].predicted
                );
            }
        }

        #[test]
        fn scaling_invariant(train in points(8), labels in prop::collection::vec(0usize..2, 8),
                             queries in points(5), c in 0.01f64..100.0, cosine in any::<bool>()) {
            let metric = if cosine { Metric::Cosine } else { Metric::Euclidean };
            let scale = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
                rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect()
            };
            let m = KnnModel::fit(train.clone(), labels.clone(), 2, 3, 5, metric).unwrap();
            let ms = KnnModel::fit(scale(&train), labels, 2, 3, 5, metric).unwrap();
            for (q, qs) in queries.iter().zip(scale(&queries)) {
                // exclude near-ties that rounding under scaling could reorder
                let qn = q.sq_norm();
                let mut d: Vec<f64> = (0..8).map(|i| m.distance(q, qn, i)).collect();
                d.sort_by(f64::total_cmp);
                prop_assume!(d.windows(2).all(|w| w[1] - w[0] > 1e-9));
                prop_assert_eq!(
                    knn_predict(&m, std::slice::from_ref(q)).unwrap()[0].predicted,
                    knn_predict(&ms, &[qs]).unwrap()[0].predicted
                );
            }
        }

        #[test]
        fn centroid_matches_dcd_argmin(rows in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 5), 6..15),
                                       queries in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 5), 1..8),
                                       cosine in any::<bool>()) {
            let metric = if cosine { Metric::Cosine } else { Metric::Euclidean };
            let labels: Vec<usize> = (0..rows.len()).map(|i| i % 3).collect();
            let train = CorpusMatrix::new(
                rows.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect(), labels, 5).unwrap();
            let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
            let reps = build_representatives(&train, &names).unwrap();
            let q: Vec<SparseVector> = queries.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect();
            let test = CorpusMatrix::new(q.clone(), vec![0; q.len()], 5).unwrap();
            let feats = transform(&test, &reps, metric).unwrap();
            let preds: Vec<usize> = centroid_predict(&reps, &q, metric).unwrap().iter().map(|p| p.predicted).collect();
            prop_assert_eq!(preds, feats.argmin());
        }
    }
}
