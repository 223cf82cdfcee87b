use num_traits::{One, Signed, Zero};

use super::{Context, NormalError, ZValues};
use crate::exact::{self, determinant, MultiPoly, QMat, QVec, Rat, Ring};
use crate::fan::{ConeRef, FanError};

fn factorial(n: usize) -> Rat {
    (1..=n as i64).fold(Rat::one(), |acc, k| acc * Rat::from_integer(k.into()))
}

/// Pyramid recursion `MVol(z₁,…,z_d) = Σ_ρ z₁_ρ · MVol_{Σ^ρ}(z₂^ρ,…,z_d^ρ)`
/// over any coefficient ring; the dimension-zero base case is the weight.
fn mvol_generic<R: Ring>(ctx: &Context, zs: &[Vec<R>]) -> Result<R, NormalError> {
    debug_assert_eq!(zs.len(), ctx.dim());
    let Some((first, rest)) = zs.split_first() else {
        let total: Rat = ctx.fan().max_cones().iter().map(|m| m.weight.clone()).sum();
        return Ok(R::from_rat(total));
    };
    let mut acc = R::ring_zero();
    for (rho, c) in first.iter().enumerate() {
        if c.ring_is_zero() {
            continue;
        }
        let star = ctx.star_at_ray(rho)?;
        let restricted = rest
            .iter()
            .map(|z| ctx.restrict_vec_to_ray(rho, z).map(|(_, v)| v))
            .collect::<Result<Vec<_>, _>>()?;
        let sub = mvol_generic(&star, &restricted)?;
        acc = acc.ring_add(&c.ring_mul(&sub));
    }
    Ok(acc)
}

/// Mixed volume of values given in ray order, without cubicality checks.
pub(crate) fn mvol_unchecked(ctx: &Context, zs: &[QVec]) -> Result<Rat, NormalError> {
    if zs.len() != ctx.dim() {
        return Err(NormalError::ArityMismatch { expected: ctx.dim(), found: zs.len() });
    }
    mvol_generic(ctx, zs)
}

fn checked_vecs(ctx: &Context, zs: &[ZValues]) -> Result<Vec<QVec>, NormalError> {
    if zs.len() != ctx.dim() {
        return Err(NormalError::ArityMismatch { expected: ctx.dim(), found: zs.len() });
    }
    zs.iter()
        .map(|z| {
            let v = ctx.z_vec(z)?;
            ctx.require_pseudocubical(&v)?;
            Ok(v)
        })
        .collect()
}

pub fn mvol_recursive(ctx: &Context, zs: &[ZValues]) -> Result<Rat, NormalError> {
    let vs = checked_vecs(ctx, zs)?;
    mvol_generic(ctx, &vs)
}

pub fn vol_recursive(ctx: &Context, z: &ZValues) -> Result<Rat, NormalError> {
    mvol_recursive(ctx, &vec![z.clone(); ctx.dim()])
}

/// `(1/d!) Σ_{∅≠S⊆[d]} (−1)^{d−|S|} Vol(Σ_{i∈S} zᵢ)`.
pub fn mvol_polarization_oracle(ctx: &Context, zs: &[ZValues]) -> Result<Rat, NormalError> {
    let vs = checked_vecs(ctx, zs)?;
    let d = ctx.dim();
    if d == 0 {
        return mvol_generic::<Rat>(ctx, &[]);
    }
    let n = ctx.fan().n_rays();
    let mut total = Rat::zero();
    for mask in 1u64..1 << d {
        let mut s = vec![Rat::zero(); n];
        for (i, v) in vs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s = exact::add(&s, v);
            }
        }
        let vol = mvol_generic(ctx, &vec![s; d])?;
        if (d - mask.count_ones() as usize) % 2 == 0 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    Ok(total / factorial(d))
}

/// The volume as a homogeneous polynomial in the ray-id variables.
pub fn vol_polynomial(ctx: &Context) -> Result<MultiPoly, NormalError> {
    let vars: Vec<MultiPoly> = ctx.fan().rays().iter().map(|r| MultiPoly::var(&r.id)).collect();
    mvol_generic(ctx, &vec![vars; ctx.dim()])
}

/// Volume of `P_σ(z)` from its vertices, using the coordinates `w * u_μ`
/// (the dual basis of the generators of `σ`), scaled by `(dim σ)!`.
pub fn geometric_volume_oracle(ctx: &Context, sigma: &ConeRef, z: &ZValues) -> Result<Rat, NormalError> {
    let k = sigma.dim();
    if k > 3 {
        return Err(NormalError::DimTooLarge(k));
    }
    if !ctx.fan().is_cone(sigma) {
        return Err(FanError::NotACone(ctx.fan().cone_ids(sigma)).into());
    }
    let zv = ctx.z_vec(z)?;
    // vertex of the face indexed by a bitmask over the rays of σ
    let mut coords: Vec<QVec> = Vec::with_capacity(1 << k);
    for mask in 0u32..1 << k {
        let tau = ConeRef::new((0..k).filter(|i| mask >> i & 1 == 1).map(|i| sigma.rays()[i]).collect());
        let w = ctx.w_vec(&tau, &zv);
        if w.coeffs.iter().any(Signed::is_negative) {
            return Err(NormalError::NotPseudocubical(ctx.classify_vec(&zv)));
        }
        coords.push(sigma.rays().iter().map(|&r| ctx.ip().pair(&w.point, ctx.fan().generator(r))).collect());
    }
    let lebesgue = match k {
        0 => Rat::one(),
        1 => (&coords[1][0] - &coords[0][0]).abs(),
        2 => {
            let cycle = [0usize, 1, 3, 2];
            let mut twice = Rat::zero();
            for i in 0..4 {
                let (p, q) = (&coords[cycle[i]], &coords[cycle[(i + 1) % 4]]);
                twice += &p[0] * &q[1] - &p[1] * &q[0];
            }
            twice.abs() / Rat::from_integer(2.into())
        }
        _ => cube_volume(&coords)?,
    };
    Ok(lebesgue * factorial(k))
}

/// Volume of a combinatorial 3-cube as a sum of pyramids from the vertex
/// centroid over its six quadrilateral facets.
fn cube_volume(v: &[QVec]) -> Result<Rat, NormalError> {
    let eight = Rat::from_integer(8.into());
    let centroid: QVec = (0..3).map(|j| v.iter().map(|p| p[j].clone()).sum::<Rat>() / &eight).collect();
    let mut facets: Vec<[usize; 4]> = Vec::with_capacity(6);
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let (bi, bj, bk) = (1 << i, 1 << j, 1 << k);
        facets.push([0, bj, bj | bk, bk]);
        facets.push([bi, bi | bj, bi | bj | bk, bi | bk]);
    }
    let mut total = Rat::zero();
    for f in facets {
        for tri in [[f[0], f[1], f[2]], [f[0], f[2], f[3]]] {
            let rows: Vec<QVec> = tri.iter().map(|&t| exact::sub(&v[t], &centroid)).collect();
            let det = determinant(&QMat::from_rows(rows).expect("3x3"))?;
            total += det.abs();
        }
    }
    Ok(total / Rat::from_integer(6.into()))
}

/// `Σ_σ ω(σ) · Vol_σ(P_σ(z))` through the geometric oracle.
pub fn geometric_volume_total(ctx: &Context, z: &ZValues) -> Result<Rat, NormalError> {
    let mut total = Rat::zero();
    for m in ctx.fan().max_cones() {
        total += &m.weight * geometric_volume_oracle(ctx, &m.cone, z)?;
    }
    Ok(total)
}
