//! Degrees of products of divisors in the Chow ring of a tropical fan.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{self, solve_with_order, QVec, Rat};
use crate::fan::{ConeRef, MarkedFan};
use crate::normalcx::{NormalError, ZValues};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChowError {
    #[error("degree is only defined on tropical fans")]
    NotTropical,
    #[error("class has grade {found}, expected {expected}")]
    WrongGrade { expected: usize, found: usize },
    #[error("cannot multiply a class of top grade {0}")]
    GradeOverflow(usize),
    #[error("no dual covector for ray {ray:?} in cone {cone:?}")]
    NoDualCovector { cone: Vec<String>, ray: String },
    #[error(transparent)]
    Values(#[from] NormalError),
}

/// How the covector `v` in the linear relation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovectorStrategy {
    /// Pivots on the leftmost possible coordinates.
    #[default]
    MinimalSupport,
    /// Pivots on the rightmost possible coordinates.
    LastCoordinates,
}

/// `Σ c_σ X_σ` over cones of a single dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChowClass {
    grade: usize,
    weights: BTreeMap<ConeRef, Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassJson {
    pub grade: usize,
    pub terms: Vec<(Vec<String>, String)>,
}

impl ChowClass {
    /// The class `1 = X_∅`.
    pub fn unit() -> Self {
        ChowClass { grade: 0, weights: BTreeMap::from([(ConeRef::zero(), Rat::one())]) }
    }

    pub fn monomial(cone: ConeRef, c: Rat) -> Self {
        let grade = cone.dim();
        let mut weights = BTreeMap::new();
        if !c.is_zero() {
            weights.insert(cone, c);
        }
        ChowClass { grade, weights }
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn weights(&self) -> &BTreeMap<ConeRef, Rat> {
        &self.weights
    }

    pub fn coefficient(&self, c: &ConeRef) -> Rat {
        self.weights.get(c).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn to_json(&self, fan: &MarkedFan) -> ClassJson {
        ClassJson {
            grade: self.grade,
            terms: self.weights.iter().map(|(c, w)| (fan.cone_ids(c), w.to_string())).collect(),
        }
    }

    fn add(&mut self, c: ConeRef, v: Rat) {
        if v.is_zero() {
            return;
        }
        let e = self.weights.entry(c).or_insert_with(Rat::zero);
        *e += v;
    }

    fn prune(mut self) -> Self {
        self.weights.retain(|_, v| !v.is_zero());
        self
    }
}

/// `v ∈ M` with `⟨v, u_ρ⟩ = 1` and `⟨v, u_η⟩ = 0` for the other rays of `σ`.
fn covector(fan: &MarkedFan, sigma: &ConeRef, rho: usize, strategy: CovectorStrategy) -> Result<QVec, ChowError> {
    let a = fan.generator_matrix(sigma);
    let b: QVec = sigma.rays().iter().map(|&r| if r == rho { Rat::one() } else { Rat::zero() }).collect();
    let n = fan.ambient_dim();
    let order: Vec<usize> = match strategy {
        CovectorStrategy::MinimalSupport => (0..n).collect(),
        CovectorStrategy::LastCoordinates => (0..n).rev().collect(),
    };
    solve_with_order(&a, &b, &order).map(|s| s.into_particular()).map_err(|_| ChowError::NoDualCovector {
        cone: fan.cone_ids(sigma),
        ray: fan.ray_id(rho).to_string(),
    })
}

/// Contributions of `c · X_σ · D(z)`.
fn multiply_term(
    fan: &MarkedFan,
    sigma: &ConeRef,
    c: &Rat,
    z: &[Rat],
    strategy: CovectorStrategy,
) -> Result<Vec<(ConeRef, Rat)>, ChowError> {
    let ext = fan.extensions(sigma);
    let mut out = Vec::new();
    // rays outside σ: X_σ x_ρ = X_{σ∪ρ} or 0
    for &r in &ext {
        if !z[r].is_zero() {
            out.push((sigma.with(r), c * &z[r]));
        }
    }
    // rays of σ: rewrite x_ρ through the linear relation of a dual covector
    for &rho in sigma.rays() {
        if z[rho].is_zero() {
            continue;
        }
        let v = covector(fan, sigma, rho, strategy)?;
        let f = c * &z[rho];
        for &eta in &ext {
            let pairing = exact::dot(&v, fan.generator(eta));
            if !pairing.is_zero() {
                out.push((sigma.with(eta), -(&f * pairing)));
            }
        }
    }
    Ok(out)
}

pub fn multiply_divisor(
    fan: &MarkedFan,
    class: &ChowClass,
    z: &[Rat],
    strategy: CovectorStrategy,
) -> Result<ChowClass, ChowError> {
    if class.grade >= fan.dim() {
        return Err(ChowError::GradeOverflow(class.grade));
    }
    let parts = class
        .weights
        .par_iter()
        .map(|(sigma, c)| multiply_term(fan, sigma, c, z, strategy))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = ChowClass { grade: class.grade + 1, weights: BTreeMap::new() };
    for (cone, v) in parts.into_iter().flatten() {
        out.add(cone, v);
    }
    Ok(out.prune())
}

/// `deg(Σ c_σ X_σ) = Σ c_σ ω(σ)` on top-grade classes.
pub fn degree(fan: &MarkedFan, class: &ChowClass) -> Result<Rat, ChowError> {
    if !fan.is_tropical() {
        return Err(ChowError::NotTropical);
    }
    if class.grade != fan.dim() {
        return Err(ChowError::WrongGrade { expected: fan.dim(), found: class.grade });
    }
    Ok(class
        .weights
        .iter()
        .map(|(c, w)| w * fan.weight(c).expect("top-grade cones are maximal"))
        .sum())
}

/// `D(z₁) ⋯ D(z_k) · X_∅`, values given in ray order.
pub fn product_class(fan: &MarkedFan, zs: &[QVec], strategy: CovectorStrategy) -> Result<ChowClass, ChowError> {
    let mut class = ChowClass::unit();
    for z in zs {
        class = multiply_divisor(fan, &class, z, strategy)?;
    }
    Ok(class)
}

pub fn deg_product_with(fan: &MarkedFan, zs: &[ZValues], strategy: CovectorStrategy) -> Result<Rat, ChowError> {
    if !fan.is_tropical() {
        return Err(ChowError::NotTropical);
    }
    if zs.len() != fan.dim() {
        return Err(ChowError::WrongGrade { expected: fan.dim(), found: zs.len() });
    }
    let vs = zs.iter().map(|z| z.to_vec(fan)).collect::<Result<Vec<_>, _>>()?;
    degree(fan, &product_class(fan, &vs, strategy)?)
}

/// `deg(D(z₁) ⋯ D(z_d))`.
pub fn deg_product(fan: &MarkedFan, zs: &[ZValues]) -> Result<Rat, ChowError> {
    deg_product_with(fan, zs, CovectorStrategy::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, vec_of};
    use crate::fixtures;

    #[test]
    fn unit_times_divisor_is_the_divisor() {
        let fan = fixtures::quadrant();
        let z = vec_of(&[1, 2, 3, 4]);
        let c = multiply_divisor(&fan, &ChowClass::unit(), &z, CovectorStrategy::default()).unwrap();
        assert_eq!(c.grade(), 1);
        for r in 0..4 {
            assert_eq!(c.coefficient(&ConeRef::ray(r)), z[r]);
        }
    }

    #[test]
    fn quadrant_degree_of_square() {
        let fan = fixtures::quadrant();
        let z = ZValues::from_vec(&fan, &vec_of(&[1, 2, 3, 4]));
        // 2 (z1 + z3)(z2 + z4)
        assert_eq!(deg_product(&fan, &[z.clone(), z]).unwrap(), rat(48));
    }

    #[test]
    fn single_top_cone_has_degree_its_weight() {
        let fan = fixtures::quadrant();
        let c = ChowClass::monomial(fan.max_cones()[0].cone.clone(), rat(1));
        assert_eq!(degree(&fan, &c).unwrap(), rat(1));
        assert!(matches!(degree(&fan, &ChowClass::unit()), Err(ChowError::WrongGrade { .. })));
    }

    #[test]
    fn non_tropical_fans_have_no_degree() {
        let fan = fixtures::pm1().with_weights(&[rat(1), rat(2)]).unwrap();
        let z = ZValues::from_vec(&fan, &vec_of(&[1, 1]));
        assert_eq!(deg_product(&fan, &[z]), Err(ChowError::NotTropical));
    }

    #[test]
    fn top_grade_cannot_be_multiplied() {
        let fan = fixtures::pm1();
        let c = ChowClass::monomial(ConeRef::ray(0), rat(1));
        assert_eq!(
            multiply_divisor(&fan, &c, &vec_of(&[1, 1]), CovectorStrategy::default()),
            Err(ChowError::GradeOverflow(1))
        );
    }

    #[test]
    fn strategies_agree_on_k4() {
        let m = fixtures::k4();
        let fan = crate::matroid::bergman_fan_at(&m, "01").unwrap();
        let (a, b) = crate::matroid::alpha_beta_z(&m, "01").unwrap();
        for zs in [[a.clone(), a.clone()], [a.clone(), b.clone()], [b.clone(), b.clone()]] {
            let d1 = deg_product_with(&fan, &zs, CovectorStrategy::MinimalSupport).unwrap();
            let d2 = deg_product_with(&fan, &zs, CovectorStrategy::LastCoordinates).unwrap();
            assert_eq!(d1, d2);
        }
    }
}
