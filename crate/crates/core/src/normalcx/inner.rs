use serde::{Deserialize, Serialize};

use super::NormalError;
use crate::exact::{self, is_positive_definite, QMat, QVec, Rat};

/// Rational inner product given by a symmetric positive-definite Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerProduct {
    gram: QMat,
    standard: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramJson {
    #[serde(with = "exact::rat_serde::mat")]
    pub gram: Vec<QVec>,
}

impl InnerProduct {
    pub fn new(gram: QMat) -> Result<Self, NormalError> {
        if !gram.is_symmetric() || !is_positive_definite(&gram) {
            return Err(NormalError::NotPositiveDefinite);
        }
        let standard = gram == QMat::identity(gram.rows());
        Ok(InnerProduct { gram, standard })
    }

    /// The dot product on `ℚⁿ`.
    pub fn standard(n: usize) -> Self {
        InnerProduct { gram: QMat::identity(n), standard: true }
    }

    pub fn from_json(raw: &GramJson) -> Result<Self, NormalError> {
        let m = QMat::from_rows(raw.gram.clone()).map_err(|_| NormalError::NotPositiveDefinite)?;
        Self::new(m)
    }

    pub fn to_json(&self) -> GramJson {
        GramJson { gram: self.gram.to_rows() }
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &QMat {
        &self.gram
    }

    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        if self.standard {
            exact::dot(x, y)
        } else {
            self.gram.bilinear(x, y)
        }
    }

    /// Gram matrix of a family of vectors.
    pub fn gram_of(&self, vs: &[&QVec]) -> QMat {
        let k = vs.len();
        let mut g = QMat::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let p = self.pair(vs[i], vs[j]);
                g[(j, i)] = p.clone();
                g[(i, j)] = p;
            }
        }
        g
    }
}
