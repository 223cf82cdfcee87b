//! Seeded sampling of cubical and pseudocubical values.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Context, NormalError, ZValues};
use crate::exact::{QVec, Rat};

/// Independent stream for sample `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform rational `p/q` with `p ∈ [lo·q, hi·q]`, `q ∈ [1, max_den]`.
pub fn random_rat<R: Rng>(rng: &mut R, lo: i64, hi: i64, max_den: i64) -> Rat {
    let q = rng.random_range(1..=max_den);
    let p = rng.random_range(lo * q..=hi * q);
    Rat::new(p.into(), q.into())
}

/// Multiplicative perturbation of a cubical point, shrunk until the result
/// is again cubical, then rescaled by a random positive factor.
pub fn perturb_cubical<R: Rng>(ctx: &Context, base: &[Rat], rng: &mut R) -> QVec {
    let r: Vec<Rat> = base.iter().map(|_| random_rat(rng, -1, 1, 8)).collect();
    let lambda = random_rat(rng, 1, 4, 4);
    let mut eps = Rat::new(1.into(), 2.into());
    for _ in 0..40 {
        let z: QVec = base
            .iter()
            .zip(&r)
            .map(|(c, ri)| c * (Rat::one() + &eps * ri) * &lambda)
            .collect();
        if ctx.classify_vec(&z).is_cubical() {
            return z;
        }
        eps /= Rat::from_integer(2.into());
    }
    base.iter().map(|c| c * &lambda).collect()
}

/// `count` cubical values around `witness`.
pub fn sample_cubical(ctx: &Context, witness: &ZValues, count: usize, seed: u64) -> Result<Vec<ZValues>, NormalError> {
    let base = ctx.z_vec(witness)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            ZValues::from_vec(ctx.fan(), &perturb_cubical(ctx, &base, &mut rng))
        })
        .collect())
}

/// `count` pseudocubical values: nonnegative combinations of a boundary
/// value (or zero) with a cubical sample, where the cubical part is dropped
/// about a quarter of the time.
pub fn sample_pseudocubical(
    ctx: &Context,
    witness: &ZValues,
    boundary: &[ZValues],
    count: usize,
    seed: u64,
) -> Result<Vec<ZValues>, NormalError> {
    let base = ctx.z_vec(witness)?;
    let bvecs = boundary.iter().map(|b| ctx.z_vec(b)).collect::<Result<Vec<_>, _>>()?;
    let out: Vec<ZValues> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let cub = perturb_cubical(ctx, &base, &mut rng);
            let t = if rng.random_range(0..4) == 0 { Rat::zero() } else { random_rat(&mut rng, 0, 2, 6) };
            let z: QVec = if bvecs.is_empty() {
                cub.iter().map(|c| c * &t).collect()
            } else {
                let b = &bvecs[rng.random_range(0..bvecs.len())];
                let a = random_rat(&mut rng, 1, 3, 3);
                b.iter().zip(&cub).map(|(bi, ci)| bi * &a + ci * &t).collect()
            };
            ZValues::from_vec(ctx.fan(), &z)
        })
        .collect();
    for z in &out {
        ctx.require_pseudocubical(&ctx.z_vec(z)?)?;
    }
    Ok(out)
}
