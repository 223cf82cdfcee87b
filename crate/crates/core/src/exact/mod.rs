//! Exact rational linear algebra.
//!
//! Everything here works over [`Rat`], an arbitrary-precision rational in
//! canonical form. There is no floating point anywhere in the crate.

mod lp;
mod poly;

pub use lp::{lp_max_min_slack, LpError, SlackOptimum};
pub use poly::{Monomial, MultiPoly, PolyError, Ring};

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rat = num_rational::BigRational;

/// Dense rational vector.
pub type QVec = Vec<Rat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("cannot parse rational {0:?}")]
    ParseRat(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("linear system has no solution")]
    NoSolution,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"` (optionally signed, surrounding whitespace ignored).
pub fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    let bad = || ExactError::ParseRat(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(num, den))
}

/// Canonical string form: `"p/q"`, or `"p"` for integers.
pub fn rat_to_string(r: &Rat) -> String {
    r.to_string()
}

pub fn vec_of(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| rat(x)).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn axpy(alpha: &Rat, x: &[Rat], y: &mut [Rat]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: &Rat, x: &[Rat]) -> QVec {
    x.iter().map(|xi| alpha * xi).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        f.debug_struct("QMat").field("rows", &rows).finish()
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must share a length.
    pub fn from_rows(rows: Vec<QVec>) -> Result<Self, ExactError> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(ExactError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r);
        }
        Ok(QMat { rows: n, cols, data })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| vec_of(r)).collect()).expect("ragged integer rows")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[QVec], height: usize) -> Self {
        let mut m = Self::zeros(height, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<QVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rat]) -> QVec {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "matrix-matrix dimension mismatch");
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `xᵀ · self · y`.
    pub fn bilinear(&self, x: &[Rat], y: &[Rat]) -> Rat {
        dot(x, &self.mul_vec(y))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> QMat {
        let mut m = QMat::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        rref(self.clone()).pivots.len()
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

struct Rref {
    m: QMat,
    pivots: Vec<usize>,
}

/// Reduced row echelon form, choosing pivot columns left to right.
fn rref(mut m: QMat) -> Rref {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, r * m.cols + j);
            }
        }
        let inv = m[(r, c)].recip();
        for j in c..m.cols {
            let v = &m[(r, j)] * &inv;
            m[(r, j)] = v;
        }
        for i in 0..m.rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let f = m[(i, c)].clone();
            for j in c..m.cols {
                if m[(r, j)].is_zero() {
                    continue;
                }
                let v = &f * &m[(r, j)];
                m[(i, j)] -= v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { m, pivots }
}

/// Result of an exact linear solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(QVec),
    /// A particular solution plus a basis of the nullspace of `A`.
    Underdetermined { particular: QVec, nullspace: Vec<QVec> },
}

impl Solution {
    pub fn particular(&self) -> &QVec {
        match self {
            Solution::Unique(x) => x,
            Solution::Underdetermined { particular, .. } => particular,
        }
    }

    pub fn into_particular(self) -> QVec {
        match self {
            Solution::Unique(x) => x,
            Solution::Underdetermined { particular, .. } => particular,
        }
    }
}

/// Solves `A·x = b` exactly.
pub fn solve(a: &QMat, b: &[Rat]) -> Result<Solution, ExactError> {
    solve_with_order(a, b, &(0..a.cols).collect::<Vec<_>>())
}

/// Like [`solve`], but pivot columns are preferred in the given order; free
/// columns are set to zero in the particular solution. Different orders give
/// different particular solutions for underdetermined systems.
pub fn solve_with_order(a: &QMat, b: &[Rat], order: &[usize]) -> Result<Solution, ExactError> {
    if b.len() != a.rows {
        return Err(ExactError::DimensionMismatch { expected: a.rows, found: b.len() });
    }
    debug_assert_eq!(order.len(), a.cols);
    // augmented matrix with permuted columns
    let mut aug = QMat::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for (jj, &j) in order.iter().enumerate() {
            aug[(i, jj)] = a[(i, j)].clone();
        }
        aug[(i, a.cols)] = b[i].clone();
    }
    let Rref { m, pivots } = rref(aug);
    if pivots.last() == Some(&a.cols) {
        return Err(ExactError::NoSolution);
    }
    let mut x = vec![Rat::zero(); a.cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[order[p]] = m[(r, a.cols)].clone();
    }
    if pivots.len() == a.cols {
        return Ok(Solution::Unique(x));
    }
    let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); a.cols];
            v[order[f]] = Rat::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[order[p]] = -m[(r, f)].clone();
            }
            v
        })
        .collect();
    Ok(Solution::Underdetermined { particular: x, nullspace })
}

/// Basis of `{x : A·x = 0}`.
pub fn nullspace(a: &QMat) -> Vec<QVec> {
    match solve(a, &vec![Rat::zero(); a.rows]).expect("homogeneous systems are consistent") {
        Solution::Unique(_) => Vec::new(),
        Solution::Underdetermined { nullspace, .. } => nullspace,
    }
}

/// Inverse of a square matrix, or `None` when singular.
pub fn inverse(a: &QMat) -> Option<QMat> {
    if !a.is_square() {
        return None;
    }
    let n = a.rows;
    let mut aug = QMat::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n + i)] = Rat::one();
    }
    let Rref { m, pivots } = rref(aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    let mut inv = QMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = m[(i, n + j)].clone();
        }
    }
    Some(inv)
}

pub fn determinant(a: &QMat) -> Result<Rat, ExactError> {
    if !a.is_square() {
        return Err(ExactError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let mut m = a.clone();
    let n = m.rows;
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
            return Ok(Rat::zero());
        };
        if p != c {
            for j in 0..n {
                m.data.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        let piv = m[(c, c)].clone();
        det *= &piv;
        for i in c + 1..n {
            if m[(i, c)].is_zero() {
                continue;
            }
            let f = &m[(i, c)] / &piv;
            for j in c..n {
                let v = &f * &m[(c, j)];
                m[(i, j)] -= v;
            }
        }
    }
    Ok(det)
}

/// Inertia of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(+{}, -{}, 0×{})", self.n_plus, self.n_minus, self.n_zero)
    }
}

/// Counts positive, negative and zero eigenvalues by symmetric congruence
/// elimination. Uses a 1×1 pivot whenever a nonzero diagonal entry remains,
/// otherwise a 2×2 hyperbolic pivot on a nonzero off-diagonal entry.
pub fn signature(s: &QMat) -> Result<Signature, ExactError> {
    if !s.is_symmetric() {
        return Err(ExactError::NotSymmetric);
    }
    let mut m = s.clone();
    let mut active: Vec<usize> = (0..m.rows).collect();
    let mut sig = Signature { n_plus: 0, n_minus: 0, n_zero: 0 };

    while !active.is_empty() {
        if let Some(pos) = active.iter().position(|&i| !m[(i, i)].is_zero()) {
            let p = active.swap_remove(pos);
            let d = m[(p, p)].clone();
            if d.is_positive() {
                sig.n_plus += 1;
            } else {
                sig.n_minus += 1;
            }
            // Schur complement: m_ij -= m_ip m_pj / d
            for &i in &active {
                if m[(i, p)].is_zero() {
                    continue;
                }
                let f = &m[(i, p)] / &d;
                for &j in &active {
                    if m[(p, j)].is_zero() {
                        continue;
                    }
                    let v = &f * &m[(p, j)];
                    m[(i, j)] -= v;
                }
            }
            continue;
        }
        let pair = active.iter().enumerate().find_map(|(a, &i)| {
            active[a + 1..].iter().find(|&&j| !m[(i, j)].is_zero()).map(|&j| (i, j))
        });
        let Some((p, q)) = pair else {
            sig.n_zero += active.len();
            break;
        };
        // With m_pp = m_qq = 0 and b = m_pq ≠ 0 the block [[0,b],[b,0]] has
        // one positive and one negative eigenvalue.
        sig.n_plus += 1;
        sig.n_minus += 1;
        active.retain(|&i| i != p && i != q);
        let b = m[(p, q)].clone();
        // inverse of [[0,b],[b,0]] is [[0,1/b],[1/b,0]]
        let binv = b.recip();
        let updates: Vec<(usize, usize, Rat)> = active
            .iter()
            .flat_map(|&i| active.iter().map(move |&j| (i, j)))
            .map(|(i, j)| {
                let v = (&m[(i, p)] * &m[(q, j)] + &m[(i, q)] * &m[(p, j)]) * &binv;
                (i, j, v)
            })
            .collect();
        for (i, j, v) in updates {
            m[(i, j)] -= v;
        }
    }
    Ok(sig)
}

/// Exact positive-definiteness test via symmetric elimination.
pub fn is_positive_definite(s: &QMat) -> bool {
    matches!(signature(s), Ok(sig) if sig.n_plus == s.rows())
}

/// Serde adapters for rationals as `"p/q"` strings.
pub mod rat_serde {
    use super::{parse_rat, Rat};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = RatRepr::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }

    /// Accepts strings and bare JSON integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RatRepr {
        Str(String),
        Int(i64),
    }

    impl RatRepr {
        fn parse(self) -> Result<Rat, String> {
            match self {
                RatRepr::Str(s) => parse_rat(&s).map_err(|e| e.to_string()),
                RatRepr::Int(i) => Ok(super::rat(i)),
            }
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
            let raw = Vec::<RatRepr>::deserialize(d)?;
            raw.into_iter().map(|r| r.parse().map_err(D::Error::custom)).collect()
        }
    }

    pub mod mat {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                let strs: Vec<String> = row.iter().map(ToString::to_string).collect();
                seq.serialize_element(&strs)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
            let raw = Vec::<Vec<RatRepr>>::deserialize(d)?;
            raw.into_iter()
                .map(|row| row.into_iter().map(|r| r.parse().map_err(D::Error::custom)).collect())
                .collect()
        }
    }

    pub mod map {
        use super::*;
        use serde::ser::SerializeMap;
        use std::collections::BTreeMap;

        pub fn serialize<S: Serializer>(v: &BTreeMap<String, Rat>, s: S) -> Result<S::Ok, S::Error> {
            let mut m = s.serialize_map(Some(v.len()))?;
            for (k, r) in v {
                m.serialize_entry(k, &r.to_string())?;
            }
            m.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<BTreeMap<String, Rat>, D::Error> {
            let raw = BTreeMap::<String, RatRepr>::deserialize(d)?;
            raw.into_iter()
                .map(|(k, r)| r.parse().map(|r| (k, r)).map_err(D::Error::custom))
                .collect()
        }
    }
}
