use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sax::WordHistogram;

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn from_dense(x: &[f64]) -> Self {
        let mut s = SparseVec::default();
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                s.indices.push(i as u32);
                s.values.push(v);
            }
        }
        s
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.iter().map(|(i, v)| w[i] * v).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, k: f64) -> SparseVec {
        SparseVec {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    /// Entries whose index passes `keep`.
    pub fn filtered(&self, keep: impl Fn(usize) -> bool) -> SparseVec {
        let mut out = SparseVec::default();
        for (i, v) in self.iter() {
            if keep(i) {
                out.indices.push(i as u32);
                out.values.push(v);
            }
        }
        out
    }
}

/// How feature columns came about; bag columns are vocabulary entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Dense,
    Bag,
}

/// Labelled rows for the linear SVM. Labels are `+1` or `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<SparseVec>,
    pub labels: Vec<i8>,
    pub dim: usize,
    pub encoding: Encoding,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<SparseVec>, labels: Vec<i8>, dim: usize, encoding: Encoding) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::dim(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l != 1 && l != -1) {
            return Err(Error::arg(format!("labels must be +1 or -1, got {l}")));
        }
        if rows.iter().any(|r| r.indices.last().is_some_and(|&i| i as usize >= dim)) {
            return Err(Error::dim(format!("feature index beyond dimension {dim}")));
        }
        Ok(FeatureMatrix {
            rows,
            labels,
            dim,
            encoding,
        })
    }

    pub fn dense(rows: &[Vec<f64>], labels: Vec<i8>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dim("dense rows of differing length"));
        }
        Self::new(
            rows.iter().map(|r| SparseVec::from_dense(r)).collect(),
            labels,
            dim,
            Encoding::Dense,
        )
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
            encoding: self.encoding,
        }
    }
}

/// Word-to-column map fitted on training histograms only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vocabulary {
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Columns are assigned in sorted word order.
    pub fn fit<'a>(hists: impl IntoIterator<Item = &'a WordHistogram>) -> Self {
        let mut index = BTreeMap::new();
        for h in hists {
            for w in h.counts.keys() {
                index.entry(w.clone()).or_insert(0);
            }
        }
        for (k, v) in index.values_mut().enumerate() {
            *v = k as u32;
        }
        Vocabulary { index }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    /// Encodes a histogram; words outside the vocabulary are dropped.
    ///
    /// With `l1_normalize`, counts are divided by the histogram's full total
    /// (dropped words included), i.e. by the number of contributing windows.
    pub fn transform(&self, h: &WordHistogram, l1_normalize: bool) -> SparseVec {
        let scale = if l1_normalize && h.total() > 0 {
            1.0 / h.total() as f64
        } else {
            1.0
        };
        let mut pairs: Vec<(u32, f64)> = h
            .counts
            .iter()
            .filter_map(|(w, &c)| self.index.get(w).map(|&i| (i, c as f64 * scale)))
            .collect();
        pairs.sort_unstable_by_key(|p| p.0);
        SparseVec {
            indices: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Fits on `train` and encodes both sets against it.
    pub fn encode_split(
        train: &[WordHistogram],
        train_labels: Vec<i8>,
        test: &[WordHistogram],
        test_labels: Vec<i8>,
        l1_normalize: bool,
    ) -> Result<(Vocabulary, FeatureMatrix, FeatureMatrix)> {
        let vocab = Vocabulary::fit(train);
        let enc = |hs: &[WordHistogram], labels| {
            FeatureMatrix::new(
                hs.iter().map(|h| vocab.transform(h, l1_normalize)).collect(),
                labels,
                vocab.len(),
                Encoding::Bag,
            )
        };
        let tr = enc(train, train_labels)?;
        let te = enc(test, test_labels)?;
        Ok((vocab, tr, te))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sax::bag_of_words;

    #[test]
    fn unseen_test_words_are_dropped() {
        let train = vec![bag_of_words(&["ab", "ab", "ba"]), bag_of_words(&["bb"])];
        let test = vec![bag_of_words(&["ab", "zz_canary"])];
        let (vocab, tr, te) =
            Vocabulary::encode_split(&train, vec![1, -1], &test, vec![1], true).unwrap();
        assert!(!vocab.contains("zz_canary"));
        assert_eq!(vocab.len(), 3);
        assert_eq!(tr.rows[0].values, vec![2.0 / 3.0, 1.0 / 3.0]);
        // the canary still counts toward the normalizing total
        assert_eq!(te.rows[0].indices, vec![0]);
        assert_eq!(te.rows[0].values, vec![0.5]);
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(FeatureMatrix::dense(&[vec![1.0]], vec![0]).is_err());
        assert!(FeatureMatrix::dense(&[vec![1.0], vec![1.0, 2.0]], vec![1, 1]).is_err());
    }
}
