use num_traits::Zero;

use super::{ConeRef, FanError, MarkedFan, Ray, Validation};
use crate::exact::{self, inverse, QVec, Rat};
use crate::normalcx::InnerProduct;

/// Star of a fan at a cone `τ`, realized in the `*`-orthogonal complement of
/// `span(τ)` inside the ambient space. Star rays keep the id of the ray they
/// come from.
#[derive(Debug, Clone)]
pub struct StarFan {
    pub fan: MarkedFan,
    /// ray ids of `τ` in the parent fan
    pub tau: Vec<String>,
    /// star ray index → parent ray index
    parent: Vec<usize>,
}

impl StarFan {
    pub fn parent_ray(&self, star_ray: usize) -> usize {
        self.parent[star_ray]
    }

    /// Image `σ^τ` of a parent cone `σ ⊇ τ` (given by parent indices).
    pub fn project_cone(&self, parent: &MarkedFan, sigma: &ConeRef) -> Option<ConeRef> {
        let tau = parent.cone(&self.tau).ok()?;
        if !tau.is_face_of(sigma) || !parent.is_cone(sigma) {
            return None;
        }
        let rays = sigma
            .minus(&tau)
            .into_iter()
            .map(|r| self.fan.ray_index(parent.ray_id(r)))
            .collect::<Option<Vec<_>>>()?;
        Some(ConeRef::new(rays))
    }
}

/// `*`-orthogonal projection onto the complement of the span of `gens`.
pub(crate) fn project_away(ip: &InnerProduct, gens: &[&QVec], u: &QVec) -> QVec {
    if gens.is_empty() {
        return u.clone();
    }
    let g = ip.gram_of(gens);
    let ginv = inverse(&g).expect("simplicial cone has an invertible Gram block");
    let rhs: QVec = gens.iter().map(|v| ip.pair(v, u)).collect();
    let b = ginv.mul_vec(&rhs);
    let mut out = u.clone();
    for (bi, v) in b.iter().zip(gens) {
        exact::axpy(&-bi.clone(), v, &mut out);
    }
    out
}

pub fn star(fan: &MarkedFan, tau: &ConeRef, ip: &InnerProduct) -> Result<StarFan, FanError> {
    if !fan.is_cone(tau) {
        return Err(FanError::NotACone(fan.cone_ids(tau)));
    }
    let gens: Vec<&QVec> = tau.rays().iter().map(|&r| fan.generator(r)).collect();
    let parent = fan.extensions(tau);
    let mut rays: Vec<Ray> = Vec::with_capacity(parent.len());
    for &r in &parent {
        let u = project_away(ip, &gens, fan.generator(r));
        if let Some(prev) = rays.iter().find(|p| same_ray(&p.u, &u)) {
            return Err(FanError::RayProjectionCollision(prev.id.clone(), fan.ray_id(r).to_string()));
        }
        rays.push(Ray { id: fan.ray_id(r).to_string(), u });
    }
    let local = |r: usize| parent.binary_search(&r).expect("extension ray");
    let cones = fan
        .cofaces(tau)
        .iter()
        .map(|&m| {
            let mc = &fan.max_cones()[m];
            (mc.cone.minus(tau).into_iter().map(local).collect(), mc.weight.clone())
        })
        .collect();
    let star = MarkedFan::from_parts(fan.ambient_dim(), rays, cones, Validation::Combinatorial)?;
    Ok(StarFan { fan: star, tau: fan.cone_ids(tau), parent })
}

fn same_ray(a: &[Rat], b: &[Rat]) -> bool {
    let Some(k) = a.iter().position(|x| !x.is_zero()) else {
        return exact::is_zero_vec(b);
    };
    if b[k].is_zero() {
        return false;
    }
    let lambda = &b[k] / &a[k];
    num_traits::Signed::is_positive(&lambda) && a.iter().zip(b).all(|(x, y)| &(x * &lambda) == y)
}

/// Connectivity of the graph on rays with an edge for each 2-cone.
pub fn star_connected_minus_origin(fan: &MarkedFan) -> bool {
    let n = fan.n_rays();
    if n <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in fan.cones(2) {
        let (a, b) = (find(&mut parent, c.rays()[0]), find(&mut parent, c.rays()[1]));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (1..n).all(|i| find(&mut parent, i) == root)
}
