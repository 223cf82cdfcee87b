//! Normal complexes of a marked fan with respect to an inner product.

mod inner;
pub mod sample;
mod volume;

pub use inner::{GramJson, InnerProduct};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, inverse, lp_max_min_slack, ExactError, QMat, QVec, Rat};
use crate::fan::{star, ConeRef, FanError, MarkedFan, StarFan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalError {
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("Gram matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("inner product has dimension {found}, fan lives in dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("z-values have no entry for ray {0:?}")]
    MissingRay(String),
    #[error("z-values have an entry for unknown ray {0:?}")]
    UnknownRay(String),
    #[error("z is not pseudocubical: {0}")]
    NotPseudocubical(CubReport),
    #[error("z is not cubical: {0}")]
    NotCubical(CubReport),
    #[error("expected {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("geometric oracle supports cones of dimension at most 3, got {0}")]
    DimTooLarge(usize),
    #[error("z-values JSON: {0}")]
    Parse(String),
}

/// Rational values indexed by ray id.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ZValues {
    #[serde(with = "exact::rat_serde::map")]
    z: BTreeMap<String, Rat>,
}

impl fmt::Debug for ZValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.z.iter().map(|(k, v)| (k, v.to_string()))).finish()
    }
}

impl ZValues {
    pub fn new(z: BTreeMap<String, Rat>) -> Self {
        ZValues { z }
    }

    pub fn zero(fan: &MarkedFan) -> Self {
        Self::from_vec(fan, &vec![Rat::zero(); fan.n_rays()])
    }

    /// Values listed in ray order.
    pub fn from_vec(fan: &MarkedFan, v: &[Rat]) -> Self {
        ZValues { z: fan.rays().iter().zip(v).map(|(r, x)| (r.id.clone(), x.clone())).collect() }
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, Rat)]) -> Self {
        ZValues { z: pairs.iter().map(|(k, v)| (k.as_ref().to_string(), v.clone())).collect() }
    }

    pub fn parse(json: &str) -> Result<Self, NormalError> {
        serde_json::from_str(json).map_err(|e| NormalError::Parse(e.to_string()))
    }

    pub fn get(&self, id: &str) -> Option<&Rat> {
        self.z.get(id)
    }

    pub fn map(&self) -> &BTreeMap<String, Rat> {
        &self.z
    }

    pub fn into_map(self) -> BTreeMap<String, Rat> {
        self.z
    }

    /// Values in the fan's ray order; the key set must equal the ray set.
    pub fn to_vec(&self, fan: &MarkedFan) -> Result<QVec, NormalError> {
        if let Some(k) = self.z.keys().find(|k| fan.ray_index(k).is_none()) {
            return Err(NormalError::UnknownRay(k.clone()));
        }
        fan.rays()
            .iter()
            .map(|r| self.z.get(&r.id).cloned().ok_or_else(|| NormalError::MissingRay(r.id.clone())))
            .collect()
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        ZValues { z: self.z.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    /// Entrywise sum over the union of keys.
    pub fn plus(&self, other: &ZValues) -> Self {
        let mut z = self.z.clone();
        for (k, v) in &other.z {
            *z.entry(k.clone()).or_insert_with(Rat::zero) += v;
        }
        ZValues { z }
    }
}

/// `w_σ(z)` with its coefficients in the ray basis of `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WVector {
    pub cone: ConeRef,
    pub point: QVec,
    pub coeffs: QVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubClass {
    Cubical,
    PseudocubicalBoundary,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubWitness {
    pub cone: Vec<String>,
    pub ray: String,
    #[serde(with = "exact::rat_serde")]
    pub coefficient: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubReport {
    pub class: CubClass,
    /// First non-positive coefficient found; negative ones take precedence.
    pub witness: Option<CubWitness>,
}

impl CubReport {
    pub fn is_cubical(&self) -> bool {
        self.class == CubClass::Cubical
    }

    pub fn is_pseudocubical(&self) -> bool {
        self.class != CubClass::Outside
    }
}

impl fmt::Display for CubReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.class)?;
        if let Some(w) = &self.witness {
            write!(f, " (coefficient {} of ray {} in cone {:?})", w.coefficient, w.ray, w.cone)?;
        }
        Ok(())
    }
}

/// Star context at a ray with the data needed to restrict z-values.
struct RayStar {
    ctx: Arc<Context>,
    /// per star ray: parent ray index and `(u_ρ*u_η)/(u_ρ*u_ρ)`
    restrict: Vec<(usize, Rat)>,
}

/// A fan together with an inner product on its ambient space.
pub struct Context {
    fan: Arc<MarkedFan>,
    ip: InnerProduct,
    inverses: OnceLock<HashMap<ConeRef, QMat>>,
    ray_stars: Vec<OnceLock<Result<Arc<RayStar>, NormalError>>>,
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Context").field("fan", &self.fan).field("ip", &self.ip).finish()
    }
}

impl Context {
    pub fn new(fan: MarkedFan, ip: InnerProduct) -> Result<Self, NormalError> {
        Self::from_arc(Arc::new(fan), ip)
    }

    pub fn from_arc(fan: Arc<MarkedFan>, ip: InnerProduct) -> Result<Self, NormalError> {
        if ip.dim() != fan.ambient_dim() {
            return Err(NormalError::DimensionMismatch { expected: fan.ambient_dim(), found: ip.dim() });
        }
        let ray_stars = (0..fan.n_rays()).map(|_| OnceLock::new()).collect();
        Ok(Context { fan, ip, inverses: OnceLock::new(), ray_stars })
    }

    pub fn fan(&self) -> &MarkedFan {
        &self.fan
    }

    pub fn ip(&self) -> &InnerProduct {
        &self.ip
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    /// Inverse Gram block of every nonzero cone.
    fn inverses(&self) -> &HashMap<ConeRef, QMat> {
        self.inverses.get_or_init(|| {
            self.fan
                .all_cones()
                .filter(|c| c.dim() > 0)
                .map(|c| {
                    let gens: Vec<&QVec> = c.rays().iter().map(|&r| self.fan.generator(r)).collect();
                    let g = self.ip.gram_of(&gens);
                    (c.clone(), inverse(&g).expect("simplicial cones have invertible Gram blocks"))
                })
                .collect()
        })
    }

    fn ray_star(&self, rho: usize) -> Result<&Arc<RayStar>, NormalError> {
        self.ray_stars[rho]
            .get_or_init(|| {
                let s = star(&self.fan, &ConeRef::ray(rho), &self.ip)?;
                let u = self.fan.generator(rho);
                let uu = self.ip.pair(u, u);
                let restrict = (0..s.fan.n_rays())
                    .map(|j| {
                        let p = s.parent_ray(j);
                        (p, self.ip.pair(u, self.fan.generator(p)) / &uu)
                    })
                    .collect();
                let ctx = Context::new(s.fan, self.ip.clone())?;
                Ok(Arc::new(RayStar { ctx: Arc::new(ctx), restrict }))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn z_vec(&self, z: &ZValues) -> Result<QVec, NormalError> {
        z.to_vec(&self.fan)
    }

    fn coeffs_vec(&self, sigma: &ConeRef, z: &[Rat]) -> QVec {
        if sigma.dim() == 0 {
            return Vec::new();
        }
        let zs: QVec = sigma.rays().iter().map(|&r| z[r].clone()).collect();
        self.inverses()[sigma].mul_vec(&zs)
    }

    fn point_of(&self, sigma: &ConeRef, coeffs: &[Rat]) -> QVec {
        let mut p = vec![Rat::zero(); self.fan.ambient_dim()];
        for (a, &r) in coeffs.iter().zip(sigma.rays()) {
            exact::axpy(a, self.fan.generator(r), &mut p);
        }
        p
    }

    pub(crate) fn w_vec(&self, sigma: &ConeRef, z: &[Rat]) -> WVector {
        let coeffs = self.coeffs_vec(sigma, z);
        WVector { cone: sigma.clone(), point: self.point_of(sigma, &coeffs), coeffs }
    }

    pub(crate) fn classify_vec(&self, z: &[Rat]) -> CubReport {
        let mut boundary: Option<CubWitness> = None;
        for k in 1..=self.dim() {
            for sigma in self.fan.cones(k) {
                let a = self.coeffs_vec(sigma, z);
                for (c, &r) in a.iter().zip(sigma.rays()) {
                    let witness = || CubWitness {
                        cone: self.fan.cone_ids(sigma),
                        ray: self.fan.ray_id(r).to_string(),
                        coefficient: c.clone(),
                    };
                    if c.is_negative() {
                        return CubReport { class: CubClass::Outside, witness: Some(witness()) };
                    }
                    if c.is_zero() && boundary.is_none() {
                        boundary = Some(witness());
                    }
                }
            }
        }
        match boundary {
            None => CubReport { class: CubClass::Cubical, witness: None },
            Some(w) => CubReport { class: CubClass::PseudocubicalBoundary, witness: Some(w) },
        }
    }

    pub(crate) fn require_pseudocubical(&self, z: &[Rat]) -> Result<(), NormalError> {
        let r = self.classify_vec(z);
        if r.is_pseudocubical() {
            Ok(())
        } else {
            Err(NormalError::NotPseudocubical(r))
        }
    }

    /// Barycentric coefficient functionals `z ↦ a_ρ(w_σ(z))`, deduplicated.
    pub fn coefficient_functionals(&self) -> Vec<QVec> {
        let n = self.fan.n_rays();
        let mut rows: Vec<QVec> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for k in 1..=self.dim() {
            for sigma in self.fan.cones(k) {
                let ginv = &self.inverses()[sigma];
                for i in 0..sigma.dim() {
                    let mut row = vec![Rat::zero(); n];
                    for (j, &r) in sigma.rays().iter().enumerate() {
                        row[r] = ginv[(i, j)].clone();
                    }
                    if seen.insert(row.clone()) {
                        rows.push(row);
                    }
                }
            }
        }
        rows
    }

    pub(crate) fn restrict_vec_to_ray<R: exact::Ring>(&self, rho: usize, z: &[R]) -> Result<(Arc<Context>, Vec<R>), NormalError> {
        let rs = self.ray_star(rho)?;
        let zr = &z[rho];
        let out = rs.restrict.iter().map(|(p, c)| z[*p].ring_add(&zr.ring_scale(&-c.clone()))).collect();
        Ok((rs.ctx.clone(), out))
    }

    pub(crate) fn star_at_ray(&self, rho: usize) -> Result<Arc<Context>, NormalError> {
        Ok(self.ray_star(rho)?.ctx.clone())
    }
}

pub fn w_vector(ctx: &Context, sigma: &ConeRef, z: &ZValues) -> Result<WVector, NormalError> {
    if !ctx.fan.is_cone(sigma) {
        return Err(FanError::NotACone(ctx.fan.cone_ids(sigma)).into());
    }
    Ok(ctx.w_vec(sigma, &ctx.z_vec(z)?))
}

pub fn classify_z(ctx: &Context, z: &ZValues) -> Result<CubReport, NormalError> {
    Ok(ctx.classify_vec(&ctx.z_vec(z)?))
}

/// Result of the cubical-point search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CubicalSearch {
    Found { z: ZValues, slack: Rat },
    Empty { slack: Option<Rat> },
}

impl CubicalSearch {
    pub fn witness(&self) -> Option<&ZValues> {
        match self {
            CubicalSearch::Found { z, .. } => Some(z),
            CubicalSearch::Empty { .. } => None,
        }
    }
}

/// Maximizes the smallest barycentric coefficient over all cones subject
/// to `Σ z_ρ = 1`.
pub fn find_cubical(ctx: &Context) -> CubicalSearch {
    let n = ctx.fan.n_rays();
    let rows: Vec<(QVec, Rat)> = ctx.coefficient_functionals().into_iter().map(|r| (r, Rat::zero())).collect();
    match lp_max_min_slack(&rows, &vec![Rat::one(); n]) {
        Ok(opt) if opt.is_interior() => {
            let z = ZValues::from_vec(&ctx.fan, &opt.z);
            debug_assert!(ctx.classify_vec(&opt.z).is_cubical());
            CubicalSearch::Found { z, slack: opt.t }
        }
        Ok(opt) => CubicalSearch::Empty { slack: Some(opt.t) },
        Err(_) => CubicalSearch::Empty { slack: None },
    }
}

/// Star context at `τ` with the restricted values `z^τ`.
pub fn face_complex(ctx: &Context, tau: &ConeRef, z: &ZValues) -> Result<(Context, ZValues), NormalError> {
    let zv = ctx.z_vec(z)?;
    let s = star(&ctx.fan, tau, &ctx.ip)?;
    let zt = restrict_with(ctx, tau, &s, &zv);
    let star_ctx = Context::new(s.fan, ctx.ip.clone())?;
    Ok((star_ctx, zt))
}

fn restrict_with(ctx: &Context, tau: &ConeRef, s: &StarFan, z: &[Rat]) -> ZValues {
    let w = ctx.w_vec(tau, z);
    let vals: QVec = (0..s.fan.n_rays())
        .map(|j| {
            let p = s.parent_ray(j);
            &z[p] - ctx.ip.pair(&w.point, ctx.fan.generator(p))
        })
        .collect();
    ZValues::from_vec(&s.fan, &vals)
}

/// `z^τ_η = z_η − w_τ(z) * u_η` on the rays of the star at `τ`.
pub fn restrict_z(ctx: &Context, tau: &ConeRef, z: &ZValues) -> Result<ZValues, NormalError> {
    let zv = ctx.z_vec(z)?;
    let s = star(&ctx.fan, tau, &ctx.ip)?;
    Ok(restrict_with(ctx, tau, &s, &zv))
}

/// Vertex `w_τ(z)` of `P_σ(z)` for every face `τ ⪯ σ`.
pub fn polytope_vertices(
    ctx: &Context,
    sigma: &ConeRef,
    z: &ZValues,
) -> Result<BTreeMap<ConeRef, QVec>, NormalError> {
    if !ctx.fan.is_cone(sigma) {
        return Err(FanError::NotACone(ctx.fan.cone_ids(sigma)).into());
    }
    let zv = ctx.z_vec(z)?;
    let mut out = BTreeMap::new();
    for tau in sigma.faces() {
        let w = ctx.w_vec(&tau, &zv);
        if let Some((i, c)) = w.coeffs.iter().enumerate().find(|(_, c)| c.is_negative()) {
            let witness = CubWitness {
                cone: ctx.fan.cone_ids(&tau),
                ray: ctx.fan.ray_id(tau.rays()[i]).to_string(),
                coefficient: c.clone(),
            };
            return Err(NormalError::NotPseudocubical(CubReport { class: CubClass::Outside, witness: Some(witness) }));
        }
        out.insert(tau, w.point);
    }
    Ok(out)
}

pub use volume::{
    geometric_volume_oracle, geometric_volume_total, mvol_polarization_oracle, mvol_recursive, vol_polynomial,
    vol_recursive,
};
pub(crate) use volume::mvol_unchecked;
