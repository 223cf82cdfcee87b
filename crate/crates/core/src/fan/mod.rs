//! Marked, weighted, pure simplicial fans.

mod star;

pub use star::{star, star_connected_minus_origin, StarFan};

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, lp_max_min_slack, nullspace, solve, QMat, QVec, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("fan JSON: {0}")]
    Parse(String),
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch { what: String, expected: usize, found: usize },
    #[error("duplicate ray id {0:?}")]
    DuplicateRay(String),
    #[error("unknown ray id {0:?}")]
    UnknownRay(String),
    #[error("ray {0:?} has a zero generator")]
    ZeroRay(String),
    #[error("ray {0:?} lies in no maximal cone")]
    UnusedRay(String),
    #[error("fan has no maximal cones")]
    NoCones,
    #[error("cone {0:?} has linearly dependent generators")]
    NotSimplicial(Vec<String>),
    #[error("cone {cone:?} has {found} rays, expected {expected}")]
    NotPure { cone: Vec<String>, expected: usize, found: usize },
    #[error("cones {0:?} and {1:?} do not meet along a common face")]
    FacesDontMeet(Vec<String>, Vec<String>),
    #[error("cone {0:?} has non-positive weight")]
    NonpositiveWeight(Vec<String>),
    #[error("{0:?} is not a cone of the fan")]
    NotACone(Vec<String>),
    #[error("rays {0:?} and {1:?} project to the same star ray")]
    RayProjectionCollision(String, String),
}

/// Sorted set of ray indices into a particular fan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ConeRef(Vec<usize>);

impl ConeRef {
    pub fn new(mut rays: Vec<usize>) -> Self {
        rays.sort_unstable();
        rays.dedup();
        ConeRef(rays)
    }

    pub fn zero() -> Self {
        ConeRef(Vec::new())
    }

    pub fn ray(r: usize) -> Self {
        ConeRef(vec![r])
    }

    pub fn rays(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.0.binary_search(&r).is_ok()
    }

    pub fn is_face_of(&self, other: &ConeRef) -> bool {
        self.0.iter().all(|&r| other.contains(r))
    }

    pub fn with(&self, r: usize) -> ConeRef {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&r) {
            v.insert(pos, r);
        }
        ConeRef(v)
    }

    pub fn without(&self, r: usize) -> ConeRef {
        ConeRef(self.0.iter().copied().filter(|&x| x != r).collect())
    }

    pub fn minus(&self, other: &ConeRef) -> Vec<usize> {
        self.0.iter().copied().filter(|&r| !other.contains(r)).collect()
    }

    /// All faces, including the zero cone and `self`.
    pub fn faces(&self) -> Vec<ConeRef> {
        let k = self.0.len();
        (0u64..1 << k)
            .map(|mask| ConeRef((0..k).filter(|i| mask >> i & 1 == 1).map(|i| self.0[i]).collect()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ray {
    pub id: String,
    pub u: QVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxCone {
    pub cone: ConeRef,
    pub weight: Rat,
}

/// How much of the meet-along-faces condition `from_parts` verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Pairwise separating-hyperplane test for every pair of maximal cones
    /// when `d <= 3`, plus the combinatorial checks.
    Full,
    /// Duplicate cones and parallel rays only.
    Combinatorial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TropicalReport {
    pub tropical: bool,
    /// Codimension-one cones where balancing fails, as ray-id lists.
    pub failing: Vec<Vec<String>>,
}

pub struct MarkedFan {
    ambient_dim: usize,
    dim: usize,
    rays: Vec<Ray>,
    index: HashMap<String, usize>,
    max_cones: Vec<MaxCone>,
    max_index: HashMap<ConeRef, usize>,
    by_dim: Vec<Vec<ConeRef>>,
    /// maximal cones containing each cone
    link: HashMap<ConeRef, Vec<usize>>,
    tropical: OnceLock<TropicalReport>,
}

impl Clone for MarkedFan {
    fn clone(&self) -> Self {
        MarkedFan {
            ambient_dim: self.ambient_dim,
            dim: self.dim,
            rays: self.rays.clone(),
            index: self.index.clone(),
            max_cones: self.max_cones.clone(),
            max_index: self.max_index.clone(),
            by_dim: self.by_dim.clone(),
            link: self.link.clone(),
            tropical: self.tropical.clone(),
        }
    }
}

impl fmt::Debug for MarkedFan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkedFan")
            .field("ambient_dim", &self.ambient_dim)
            .field("dim", &self.dim)
            .field("rays", &self.rays.len())
            .field("max_cones", &self.max_cones.len())
            .finish()
    }
}

impl PartialEq for MarkedFan {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.rays == other.rays
            && self.max_cones == other.max_cones
    }
}

/// Serialized form of a fan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanJson {
    pub ambient_dim: usize,
    pub rays: Vec<RayJson>,
    pub max_cones: Vec<ConeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayJson {
    pub id: String,
    #[serde(with = "exact::rat_serde::vec")]
    pub u: QVec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeJson {
    pub rays: Vec<String>,
    #[serde(with = "exact::rat_serde")]
    pub weight: Rat,
}

/// Parses and fully validates a fan description.
pub fn build_fan(raw: &FanJson) -> Result<MarkedFan, FanError> {
    MarkedFan::from_json(raw, Validation::Full)
}

impl MarkedFan {
    pub fn from_json(raw: &FanJson, level: Validation) -> Result<Self, FanError> {
        let rays = raw.rays.iter().map(|r| Ray { id: r.id.clone(), u: r.u.clone() }).collect();
        let index: HashMap<&str, usize> =
            raw.rays.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
        let mut cones = Vec::with_capacity(raw.max_cones.len());
        for c in &raw.max_cones {
            let mut idx = Vec::with_capacity(c.rays.len());
            for id in &c.rays {
                let &i = index.get(id.as_str()).ok_or_else(|| FanError::UnknownRay(id.clone()))?;
                if idx.contains(&i) {
                    return Err(FanError::NotSimplicial(c.rays.clone()));
                }
                idx.push(i);
            }
            cones.push((idx, c.weight.clone()));
        }
        Self::from_parts(raw.ambient_dim, rays, cones, level)
    }

    pub fn parse(json: &str) -> Result<Self, FanError> {
        let raw: FanJson = serde_json::from_str(json).map_err(|e| FanError::Parse(e.to_string()))?;
        build_fan(&raw)
    }

    pub fn to_json(&self) -> FanJson {
        FanJson {
            ambient_dim: self.ambient_dim,
            rays: self.rays.iter().map(|r| RayJson { id: r.id.clone(), u: r.u.clone() }).collect(),
            max_cones: self
                .max_cones
                .iter()
                .map(|m| ConeJson { rays: self.cone_ids(&m.cone), weight: m.weight.clone() })
                .collect(),
        }
    }

    /// Builds a fan from rays and maximal cones given by ray indices.
    pub fn from_parts(
        ambient_dim: usize,
        rays: Vec<Ray>,
        cones: Vec<(Vec<usize>, Rat)>,
        level: Validation,
    ) -> Result<Self, FanError> {
        let mut index = HashMap::with_capacity(rays.len());
        for (i, r) in rays.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(FanError::DuplicateRay(r.id.clone()));
            }
            if r.u.len() != ambient_dim {
                return Err(FanError::DimensionMismatch {
                    what: format!("ray {:?}", r.id),
                    expected: ambient_dim,
                    found: r.u.len(),
                });
            }
            if exact::is_zero_vec(&r.u) {
                return Err(FanError::ZeroRay(r.id.clone()));
            }
        }
        let Some(first) = cones.first() else {
            return Err(FanError::NoCones);
        };
        let dim = first.0.len();
        let ids = |c: &[usize]| c.iter().map(|&i| rays[i].id.clone()).collect::<Vec<_>>();

        let mut max_cones = Vec::with_capacity(cones.len());
        let mut max_index = HashMap::with_capacity(cones.len());
        for (c, w) in cones {
            if c.len() != dim {
                return Err(FanError::NotPure { cone: ids(&c), expected: dim, found: c.len() });
            }
            if !w.is_positive() {
                return Err(FanError::NonpositiveWeight(ids(&c)));
            }
            let cone = ConeRef::new(c.clone());
            if cone.dim() != c.len() || c.iter().any(|&i| i >= rays.len()) {
                return Err(FanError::NotSimplicial(ids(&c)));
            }
            let gens: Vec<QVec> = cone.rays().iter().map(|&i| rays[i].u.clone()).collect();
            if QMat::from_rows(gens).map(|m| m.rank()).unwrap_or(0) != dim && dim > 0 {
                return Err(FanError::NotSimplicial(ids(cone.rays())));
            }
            if max_index.insert(cone.clone(), max_cones.len()).is_some() {
                return Err(FanError::FacesDontMeet(ids(cone.rays()), ids(cone.rays())));
            }
            max_cones.push(MaxCone { cone, weight: w });
        }

        let mut link: HashMap<ConeRef, Vec<usize>> = HashMap::new();
        for (m, mc) in max_cones.iter().enumerate() {
            for f in mc.cone.faces() {
                link.entry(f).or_default().push(m);
            }
        }
        for (i, r) in rays.iter().enumerate() {
            if !link.contains_key(&ConeRef::ray(i)) {
                return Err(FanError::UnusedRay(r.id.clone()));
            }
        }
        let mut by_dim = vec![Vec::new(); dim + 1];
        for c in link.keys() {
            by_dim[c.dim()].push(c.clone());
        }
        for layer in &mut by_dim {
            layer.sort();
        }

        let fan = MarkedFan {
            ambient_dim,
            dim,
            index,
            rays,
            max_cones,
            max_index,
            by_dim,
            link,
            tropical: OnceLock::new(),
        };
        fan.check_parallel_rays()?;
        if level == Validation::Full && dim <= 3 {
            fan.check_meets()?;
        }
        Ok(fan)
    }

    fn check_parallel_rays(&self) -> Result<(), FanError> {
        for i in 0..self.rays.len() {
            for j in i + 1..self.rays.len() {
                if positive_multiple(&self.rays[i].u, &self.rays[j].u) {
                    return Err(FanError::FacesDontMeet(
                        vec![self.rays[i].id.clone()],
                        vec![self.rays[j].id.clone()],
                    ));
                }
            }
        }
        Ok(())
    }

    /// For every pair of maximal cones with common face `τ`, looks for a
    /// linear form vanishing on `τ`, positive on the other rays of the first
    /// cone and negative on the other rays of the second.
    fn check_meets(&self) -> Result<(), FanError> {
        for a in 0..self.max_cones.len() {
            for b in a + 1..self.max_cones.len() {
                let (s1, s2) = (&self.max_cones[a].cone, &self.max_cones[b].cone);
                if !self.separated(s1, s2) {
                    return Err(FanError::FacesDontMeet(self.cone_ids(s1), self.cone_ids(s2)));
                }
            }
        }
        Ok(())
    }

    fn separated(&self, s1: &ConeRef, s2: &ConeRef) -> bool {
        let common: Vec<usize> = s1.rays().iter().copied().filter(|&r| s2.contains(r)).collect();
        let basis = if common.is_empty() {
            QMat::identity(self.ambient_dim).to_rows()
        } else {
            let m = QMat::from_rows(common.iter().map(|&r| self.rays[r].u.clone()).collect())
                .expect("uniform ray length");
            nullspace(&m)
        };
        let project = |u: &QVec| -> QVec { basis.iter().map(|k| exact::dot(k, u)).collect() };
        let mut rows: Vec<(QVec, Rat)> = Vec::new();
        for &r in s1.rays().iter().filter(|r| !common.contains(r)) {
            rows.push((project(&self.rays[r].u), Rat::zero()));
        }
        for &r in s2.rays().iter().filter(|r| !common.contains(r)) {
            let p = project(&self.rays[r].u);
            rows.push((p.iter().map(|x| -x.clone()).collect(), Rat::zero()));
        }
        let mut normalizer = vec![Rat::zero(); basis.len()];
        for (a, _) in &rows {
            for (n, x) in normalizer.iter_mut().zip(a) {
                *n += x;
            }
        }
        match lp_max_min_slack(&rows, &normalizer) {
            Ok(opt) => opt.is_interior(),
            Err(exact::LpError::Unbounded) => true,
            Err(_) => false,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Fan dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn ray_id(&self, i: usize) -> &str {
        &self.rays[i].id
    }

    pub fn ray_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn generator(&self, i: usize) -> &QVec {
        &self.rays[i].u
    }

    pub fn max_cones(&self) -> &[MaxCone] {
        &self.max_cones
    }

    /// Cones of dimension `k`, sorted.
    pub fn cones(&self, k: usize) -> &[ConeRef] {
        self.by_dim.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn all_cones(&self) -> impl Iterator<Item = &ConeRef> {
        self.by_dim.iter().flatten()
    }

    pub fn is_cone(&self, c: &ConeRef) -> bool {
        self.link.contains_key(c)
    }

    /// Weight of a maximal cone.
    pub fn weight(&self, c: &ConeRef) -> Option<&Rat> {
        self.max_index.get(c).map(|&i| &self.max_cones[i].weight)
    }

    /// Maximal cones containing `c`, as indices into [`Self::max_cones`].
    pub fn cofaces(&self, c: &ConeRef) -> &[usize] {
        self.link.get(c).map_or(&[], |v| v.as_slice())
    }

    /// Rays `η ∉ c` with `c ∪ {η}` a cone.
    pub fn extensions(&self, c: &ConeRef) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .cofaces(c)
            .iter()
            .flat_map(|&m| self.max_cones[m].cone.minus(c))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn cone_ids(&self, c: &ConeRef) -> Vec<String> {
        c.rays().iter().map(|&i| self.rays[i].id.clone()).collect()
    }

    /// Looks up a cone by ray ids.
    pub fn cone<S: AsRef<str>>(&self, ids: &[S]) -> Result<ConeRef, FanError> {
        let mut idx = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            idx.push(self.ray_index(id).ok_or_else(|| FanError::UnknownRay(id.to_string()))?);
        }
        let c = ConeRef::new(idx);
        if self.is_cone(&c) {
            Ok(c)
        } else {
            Err(FanError::NotACone(ids.iter().map(|s| s.as_ref().to_string()).collect()))
        }
    }

    /// Generators of `c` as rows.
    pub fn generator_matrix(&self, c: &ConeRef) -> QMat {
        let mut m = QMat::zeros(c.dim(), self.ambient_dim);
        for (i, &r) in c.rays().iter().enumerate() {
            for (j, x) in self.rays[r].u.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    /// Balancing check at every codimension-one cone; computed once.
    pub fn tropical_report(&self) -> &TropicalReport {
        self.tropical.get_or_init(|| {
            let mut failing = Vec::new();
            if self.dim > 0 {
                for tau in self.cones(self.dim - 1) {
                    let mut s = vec![Rat::zero(); self.ambient_dim];
                    for &m in self.cofaces(tau) {
                        let mc = &self.max_cones[m];
                        for r in mc.cone.minus(tau) {
                            exact::axpy(&mc.weight, &self.rays[r].u, &mut s);
                        }
                    }
                    let ok = if tau.dim() == 0 {
                        exact::is_zero_vec(&s)
                    } else {
                        solve(&self.generator_matrix(tau).transpose(), &s).is_ok()
                    };
                    if !ok {
                        failing.push(self.cone_ids(tau));
                    }
                }
            }
            TropicalReport { tropical: failing.is_empty(), failing }
        })
    }

    pub fn is_tropical(&self) -> bool {
        self.tropical_report().tropical
    }

    /// Same fan with different weights (same order as [`Self::max_cones`]).
    pub fn with_weights(&self, weights: &[Rat]) -> Result<Self, FanError> {
        let cones = self
            .max_cones
            .iter()
            .zip(weights)
            .map(|(m, w)| (m.cone.rays().to_vec(), w.clone()))
            .collect();
        Self::from_parts(self.ambient_dim, self.rays.clone(), cones, Validation::Combinatorial)
    }
}

fn positive_multiple(a: &[Rat], b: &[Rat]) -> bool {
    let Some(k) = a.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if b[k].is_zero() || b[k].is_positive() != a[k].is_positive() {
        return false;
    }
    let lambda = &b[k] / &a[k];
    a.iter().zip(b).all(|(x, y)| &(x * &lambda) == y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, vec_of};

    fn ray(id: &str, u: &[i64]) -> Ray {
        Ray { id: id.into(), u: vec_of(u) }
    }

    fn quadrant() -> MarkedFan {
        let rays = vec![ray("x+", &[1, 0]), ray("y+", &[0, 1]), ray("x-", &[-1, 0]), ray("y-", &[0, -1])];
        let cones = [(0, 1), (1, 2), (2, 3), (3, 0)]
            .iter()
            .map(|&(a, b)| (vec![a, b], rat(1)))
            .collect();
        MarkedFan::from_parts(2, rays, cones, Validation::Full).unwrap()
    }

    #[test]
    fn opposite_rays_form_a_tropical_one_fan() {
        let rays = vec![ray("+", &[1]), ray("-", &[-1])];
        let fan = MarkedFan::from_parts(1, rays, vec![(vec![0], rat(1)), (vec![1], rat(1))], Validation::Full)
            .unwrap();
        assert_eq!(fan.dim(), 1);
        assert!(fan.is_tropical());
        let skew = fan.with_weights(&[rat(1), rat(2)]).unwrap();
        assert!(!skew.is_tropical());
        assert_eq!(skew.tropical_report().failing, vec![Vec::<String>::new()]);
    }

    #[test]
    fn quadrant_face_poset() {
        let fan = quadrant();
        assert_eq!(fan.cones(0).len(), 1);
        assert_eq!(fan.cones(1).len(), 4);
        assert_eq!(fan.cones(2).len(), 4);
        assert!(fan.is_tropical());
        let c = fan.cone(&["y+", "x+"]).unwrap();
        assert_eq!(fan.weight(&c), Some(&rat(1)));
        assert!(fan.cone(&["x+", "x-"]).is_err());
        assert_eq!(fan.extensions(&ConeRef::ray(0)), vec![1, 3]);
    }

    #[test]
    fn overlapping_cones_are_rejected() {
        // cone(x, y) and cone(x, x+y) overlap in their interiors
        let rays = vec![ray("x", &[1, 0]), ray("y", &[0, 1]), ray("d", &[1, 1])];
        let err = MarkedFan::from_parts(2, rays, vec![(vec![0, 1], rat(1)), (vec![0, 2], rat(1))], Validation::Full)
            .unwrap_err();
        assert!(matches!(err, FanError::FacesDontMeet(..)));
    }

    #[test]
    fn shared_id_with_disjoint_geometry_is_rejected() {
        // in R^4, the cones {a,b} and {a',c} would only share the origin; reusing id a
        // for both is flagged as a duplicate
        let rays = vec![ray("a", &[1, 0, 0, 0]), ray("b", &[0, 1, 0, 0]), ray("a", &[0, 0, 1, 0])];
        assert_eq!(
            MarkedFan::from_parts(4, rays, vec![(vec![0, 1], rat(1)), (vec![2, 1], rat(1))], Validation::Full)
                .unwrap_err(),
            FanError::DuplicateRay("a".into())
        );
        // same direction under two ids
        let rays = vec![ray("a", &[1, 0]), ray("b", &[0, 1]), ray("c", &[2, 0]), ray("e", &[0, -1])];
        let err = MarkedFan::from_parts(2, rays, vec![(vec![0, 1], rat(1)), (vec![2, 3], rat(1))], Validation::Full)
            .unwrap_err();
        assert!(matches!(err, FanError::FacesDontMeet(..)));
    }

    #[test]
    fn structural_errors() {
        let rays = vec![ray("a", &[1, 0]), ray("b", &[2, 0]), ray("c", &[0, 1])];
        assert!(matches!(
            MarkedFan::from_parts(2, rays.clone(), vec![(vec![0, 1], rat(1))], Validation::Full),
            Err(FanError::NotSimplicial(_))
        ));
        assert!(matches!(
            MarkedFan::from_parts(2, rays.clone(), vec![(vec![0, 2], rat(1)), (vec![1], rat(1))], Validation::Full),
            Err(FanError::NotPure { .. })
        ));
        assert!(matches!(
            MarkedFan::from_parts(2, rays[..1].to_vec(), vec![(vec![0], rat(0))], Validation::Full),
            Err(FanError::NonpositiveWeight(_))
        ));
        assert!(matches!(
            MarkedFan::from_parts(2, vec![ray("a", &[1, 0, 0])], vec![(vec![0], rat(1))], Validation::Full),
            Err(FanError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let fan = quadrant();
        let text = serde_json::to_string(&fan.to_json()).unwrap();
        let back = MarkedFan::parse(&text).unwrap();
        assert_eq!(back, fan);
        assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
    }

    #[test]
    fn parses_fractional_entries() {
        let text = r#"{"ambient_dim":1,"rays":[{"id":"p","u":["3/2"]},{"id":"m","u":[-1]}],
            "max_cones":[{"rays":["p"],"weight":"2/3"},{"rays":["m"],"weight":"1"}]}"#;
        let fan = MarkedFan::parse(text).unwrap();
        assert_eq!(fan.generator(0), &vec![crate::exact::ratio(3, 2)]);
        assert!(fan.is_tropical());
    }
}
