//! Alexandrov–Fenchel checks, Lorentzian spot checks and the log-concavity
//! pipeline for matroids.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chow::{deg_product, ChowError};
use crate::exact::{self, rat_serde, signature, ExactError, MultiPoly, PolyError, QVec, Rat, Signature};
use crate::fan::{star, star_connected_minus_origin, ConeRef, FanError};
use crate::matroid::{bergman_setup, char_poly_with_cap, Matroid, MatroidError, DEFAULT_SUBSET_CAP};
use crate::normalcx::{
    face_complex, find_cubical, mvol_recursive, mvol_unchecked, sample::sample_cubical, vol_polynomial, Context,
    CubicalSearch, NormalError, ZValues,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AfError {
    #[error(transparent)]
    Normal(#[from] NormalError),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Chow(#[from] ChowError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("the cubical cone is empty")]
    EmptyCubical,
    #[error("AF inequalities need a fan of dimension at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("reduced characteristic coefficients disagree: char poly {charpoly:?}, degrees {degree:?}, mixed volumes {mvol:?}")]
    Mismatch { charpoly: Vec<String>, degree: Vec<String>, mvol: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The cubical cone is empty, so AF is not defined.
    Undefined,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Undefined => 3,
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn factorial(n: usize) -> Rat {
    (1..=n as i64).fold(Rat::one(), |acc, k| acc * Rat::from_integer(k.into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionI {
    pub pass: bool,
    pub checked: usize,
    pub failing: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarSignature {
    pub cone: Vec<String>,
    pub signature: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionII {
    pub pass: bool,
    pub stars: Vec<StarSignature>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReduceReport {
    pub condition_i: ConditionI,
    pub condition_ii: ConditionII,
    pub cub_nonempty: bool,
    pub witness: Option<ZValues>,
    #[serde(serialize_with = "opt_rat")]
    pub slack: Option<Rat>,
    pub verdict: Verdict,
}

fn opt_rat<S: serde::Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => rat_serde::serialize(r, s),
        None => s.serialize_none(),
    }
}

/// Hessian signature of the volume polynomial of a 2-dimensional context.
fn quadratic_signature(ctx: &Context) -> Result<Signature, AfError> {
    let f = vol_polynomial(ctx)?;
    let vars: Vec<String> = ctx.fan().rays().iter().map(|r| r.id.clone()).collect();
    let h = f.hessian_at_contraction(&[], &vars)?;
    Ok(signature(&h)?)
}

/// Connectivity of stars of cones of dimension at most `d − 3` and the
/// one-positive-eigenvalue condition on stars of cones of dimension `d − 2`,
/// together with a search for a cubical value.
pub fn check_reduce_conditions(ctx: &Context) -> Result<ReduceReport, AfError> {
    let fan = ctx.fan();
    let d = fan.dim();
    let low: Vec<&ConeRef> = if d >= 3 { (0..=d - 3).flat_map(|k| fan.cones(k)).collect() } else { Vec::new() };
    let conn = low
        .par_iter()
        .map(|tau| Ok((star_connected_minus_origin(&star(fan, tau, ctx.ip())?.fan), fan.cone_ids(tau))))
        .collect::<Result<Vec<_>, FanError>>()?;
    let failing: Vec<Vec<String>> = conn.iter().filter(|(ok, _)| !ok).map(|(_, c)| c.clone()).collect();
    let condition_i = ConditionI { pass: failing.is_empty(), checked: conn.len(), failing };

    let mid: &[ConeRef] = if d >= 2 { fan.cones(d - 2) } else { &[] };
    let stars = mid
        .par_iter()
        .map(|tau| {
            let s = star(fan, tau, ctx.ip())?;
            let sctx = Context::new(s.fan, ctx.ip().clone())?;
            Ok(StarSignature { cone: fan.cone_ids(tau), signature: quadratic_signature(&sctx)? })
        })
        .collect::<Result<Vec<_>, AfError>>()?;
    let condition_ii = ConditionII { pass: stars.iter().all(|s| s.signature.n_plus == 1), stars };

    let (cub_nonempty, witness, slack) = match find_cubical(ctx) {
        CubicalSearch::Found { z, slack } => (true, Some(z), Some(slack)),
        CubicalSearch::Empty { slack } => (false, None, slack),
    };
    let verdict = if !cub_nonempty {
        Verdict::Undefined
    } else {
        Verdict::from_bool(condition_i.pass && condition_ii.pass)
    };
    Ok(ReduceReport { condition_i, condition_ii, cub_nonempty, witness, slack, verdict })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AfTriple {
    #[serde(with = "rat_serde")]
    pub mixed: Rat,
    #[serde(with = "rat_serde")]
    pub first: Rat,
    #[serde(with = "rat_serde")]
    pub second: Rat,
    /// `mixed² − first · second`
    #[serde(with = "rat_serde")]
    pub margin: Rat,
}

/// `MVol(z₁,z₂,z₃…)² − MVol(z₁,z₁,z₃…)·MVol(z₂,z₂,z₃…)` for cubical arguments.
pub fn af_check(ctx: &Context, zs: &[ZValues]) -> Result<AfTriple, AfError> {
    let d = ctx.dim();
    if d < 2 {
        return Err(AfError::DimensionTooSmall(d));
    }
    if zs.len() != d {
        return Err(NormalError::ArityMismatch { expected: d, found: zs.len() }.into());
    }
    let vs = zs
        .iter()
        .map(|z| {
            let v = ctx.z_vec(z)?;
            let r = ctx.classify_vec(&v);
            if r.is_cubical() {
                Ok(v)
            } else {
                Err(NormalError::NotCubical(r))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let with = |a: &QVec, b: &QVec| -> Result<Rat, NormalError> {
        let mut args = vec![a.clone(), b.clone()];
        args.extend_from_slice(&vs[2..]);
        mvol_unchecked(ctx, &args)
    };
    let mixed = with(&vs[0], &vs[1])?;
    let first = with(&vs[0], &vs[0])?;
    let second = with(&vs[1], &vs[1])?;
    let margin = &mixed * &mixed - &first * &second;
    Ok(AfTriple { mixed, first, second, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleVerdict {
    /// Every sampled margin is nonnegative; this is evidence, not a proof.
    EmpiricallyConsistent,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AfSampleReport {
    pub tuples: Vec<Vec<ZValues>>,
    pub triples: Vec<AfTriple>,
    #[serde(with = "rat_serde")]
    pub min_margin: Rat,
    pub verdict: SampleVerdict,
}

/// Seeded cubical `d`-tuples around `witness`.
pub fn sample_tuples(ctx: &Context, witness: &ZValues, count: usize, seed: u64) -> Result<Vec<Vec<ZValues>>, AfError> {
    let d = ctx.dim();
    let flat = sample_cubical(ctx, witness, count * d, seed)?;
    Ok(flat.chunks(d.max(1)).take(count).map(<[ZValues]>::to_vec).collect())
}

/// AF margins on seeded cubical tuples; an empty cubical cone is an error.
pub fn af_samples(ctx: &Context, samples: usize, seed: u64) -> Result<AfSampleReport, AfError> {
    let witness = find_cubical(ctx).witness().cloned().ok_or(AfError::EmptyCubical)?;
    let tuples = sample_tuples(ctx, &witness, samples, seed)?;
    af_on_tuples(ctx, tuples)
}

pub fn af_on_tuples(ctx: &Context, tuples: Vec<Vec<ZValues>>) -> Result<AfSampleReport, AfError> {
    let triples = tuples.par_iter().map(|t| af_check(ctx, t)).collect::<Result<Vec<_>, _>>()?;
    let min_margin = triples.iter().map(|t| t.margin.clone()).min().unwrap_or_else(Rat::zero);
    let verdict = if min_margin.is_negative() { SampleVerdict::Violated } else { SampleVerdict::EmpiricallyConsistent };
    Ok(AfSampleReport { tuples, triples, min_margin, verdict })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LorentzianSample {
    /// `∂_{v₁}⋯∂_{v_d} f`
    #[serde(with = "rat_serde")]
    pub contraction: Rat,
    pub positive: bool,
    pub hessian_signature: Signature,
    pub one_positive_eigenvalue: bool,
    pub off_diagonal_nonnegative: bool,
    /// nonzero off-diagonal entries are exactly the 2-cones
    pub pattern_is_adjacency: bool,
    pub pattern_connected: bool,
    /// off-diagonal entries equal `d!·MVol` of the star at the 2-cone
    pub entries_match_faces: bool,
}

impl LorentzianSample {
    pub fn pass(&self) -> bool {
        self.positive
            && self.one_positive_eigenvalue
            && self.off_diagonal_nonnegative
            && self.pattern_is_adjacency
            && self.pattern_connected
            && self.entries_match_faces
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LorentzianReport {
    pub samples: Vec<LorentzianSample>,
    pub pass: bool,
}

fn direction(z: &ZValues) -> BTreeMap<String, Rat> {
    z.map().clone()
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    n == 0 || (1..n).all(|i| find(&mut parent, i) == find(&mut parent, 0))
}

fn lorentzian_sample(ctx: &Context, f: &MultiPoly, tuple: &[ZValues]) -> Result<LorentzianSample, AfError> {
    let fan = ctx.fan();
    let d = ctx.dim();
    let vars: Vec<String> = fan.rays().iter().map(|r| r.id.clone()).collect();
    let mut full = f.clone();
    for v in tuple {
        full = full.directional(&direction(v));
    }
    let contraction = full.coefficient(&exact::Monomial::one());
    let rest: Vec<BTreeMap<String, Rat>> = tuple[2..].iter().map(direction).collect();
    let h = f.hessian_at_contraction(&rest, &vars)?;
    let sig = signature(&h)?;
    let n = fan.n_rays();
    let scale = factorial(d);
    let mut nonneg = true;
    let mut adjacency = true;
    let mut matches = true;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let e = &h[(a, b)];
            if e.is_negative() {
                nonneg = false;
            }
            let cone = ConeRef::new(vec![a, b]);
            let is_cone = fan.is_cone(&cone);
            if is_cone != !e.is_zero() {
                adjacency = false;
            }
            if !e.is_zero() {
                edges.push((a, b));
            }
            if is_cone {
                let mut restricted = Vec::with_capacity(d - 2);
                let mut sctx = None;
                for v in &tuple[2..] {
                    let (c, z) = face_complex(ctx, &cone, v)?;
                    restricted.push(z);
                    sctx = Some(c);
                }
                let sctx = match sctx {
                    Some(c) => c,
                    None => face_complex(ctx, &cone, &tuple[0])?.0,
                };
                let expected = &scale * mvol_recursive(&sctx, &restricted)?;
                if &expected != e {
                    matches = false;
                }
            }
        }
    }
    Ok(LorentzianSample {
        positive: contraction.is_positive(),
        contraction,
        hessian_signature: sig,
        one_positive_eigenvalue: sig.n_plus == 1,
        off_diagonal_nonnegative: nonneg,
        pattern_is_adjacency: adjacency,
        pattern_connected: connected(n, &edges),
        entries_match_faces: matches,
    })
}

/// Conditions (P) and (H) for the volume polynomial at seeded cubical
/// direction tuples, with the off-diagonal structure of each Hessian.
pub fn lorentzian_spot_check(ctx: &Context, samples: usize, seed: u64) -> Result<LorentzianReport, AfError> {
    let d = ctx.dim();
    if d < 2 {
        return Err(AfError::DimensionTooSmall(d));
    }
    let witness = find_cubical(ctx).witness().cloned().ok_or(AfError::EmptyCubical)?;
    let tuples = sample_tuples(ctx, &witness, samples, seed)?;
    let f = vol_polynomial(ctx)?;
    let samples = tuples.par_iter().map(|t| lorentzian_sample(ctx, &f, t)).collect::<Result<Vec<_>, _>>()?;
    let pass = samples.iter().all(LorentzianSample::pass);
    Ok(LorentzianReport { samples, pass })
}

/// Mixed volume along `z_t = z + t·c` compared with its multilinear expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitCheck {
    pub a: usize,
    /// coefficients of `p(t)` from the constant term up
    #[serde(with = "rat_serde::vec")]
    pub polynomial: QVec,
    #[serde(with = "rat_serde::vec")]
    pub ts: QVec,
    /// `MVol` evaluated directly at each `t`
    #[serde(with = "rat_serde::vec")]
    pub direct: QVec,
    /// interpolation of the direct values, evaluated at `t = 0`
    #[serde(with = "rat_serde")]
    pub extrapolated: Rat,
    #[serde(with = "rat_serde")]
    pub boundary: Rat,
    pub pass: bool,
}

fn binomial(n: usize, k: usize) -> Rat {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn lagrange_at_zero(ts: &[Rat], ys: &[Rat]) -> Rat {
    let mut total = Rat::zero();
    for (i, (ti, yi)) in ts.iter().zip(ys).enumerate() {
        let mut basis = Rat::one();
        for (j, tj) in ts.iter().enumerate() {
            if i != j {
                basis *= -tj / (ti - tj);
            }
        }
        total += yi * basis;
    }
    total
}

/// Evaluates `MVol(z_αᵗ^{d−a}, z_βᵗ^{a})` with `z_t = z + t·c` for `c` cubical,
/// and checks it against the expansion in `t` and against the boundary value.
pub fn limit_regression(
    ctx: &Context,
    z_alpha: &ZValues,
    z_beta: &ZValues,
    c: &ZValues,
    a: usize,
) -> Result<LimitCheck, AfError> {
    let d = ctx.dim();
    let (za, zb, zc) = (ctx.z_vec(z_alpha)?, ctx.z_vec(z_beta)?, ctx.z_vec(c)?);
    let args = |x: &QVec, nx: usize, y: &QVec, ny: usize, nc: usize| -> Vec<QVec> {
        let mut v = vec![x.clone(); nx];
        v.extend(std::iter::repeat_n(y.clone(), ny));
        v.extend(std::iter::repeat_n(zc.clone(), nc));
        v
    };
    let mut poly = vec![Rat::zero(); d + 1];
    for i in 0..=d - a {
        for j in 0..=a {
            let m = mvol_unchecked(ctx, &args(&za, d - a - i, &zb, a - j, i + j))?;
            poly[i + j] += binomial(d - a, i) * binomial(a, j) * m;
        }
    }
    let npts = (d + 1).max(3);
    let ts: QVec = (1..=npts).map(|k| Rat::new(1.into(), (1i64 << k).into())).collect();
    let direct = ts
        .iter()
        .map(|t| {
            let at = exact::add(&za, &exact::scale(t, &zc));
            let bt = exact::add(&zb, &exact::scale(t, &zc));
            mvol_unchecked(ctx, &args(&at, d - a, &bt, a, 0))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let eval = |t: &Rat| poly.iter().rev().fold(Rat::zero(), |acc, p| acc * t + p);
    let boundary = mvol_unchecked(ctx, &args(&za, d - a, &zb, a, 0))?;
    let extrapolated = lagrange_at_zero(&ts[..d + 1], &direct[..d + 1]);
    let pass = ts.iter().zip(&direct).all(|(t, y)| &eval(t) == y) && extrapolated == boundary && poly[0] == boundary;
    Ok(LimitCheck { a, polynomial: poly, ts, direct, extrapolated, boundary, pass })
}

pub fn is_log_concave(s: &[Rat]) -> bool {
    s.windows(3).all(|w| &w[1] * &w[1] >= &w[0] * &w[2])
}

pub fn is_unimodal(s: &[Rat]) -> bool {
    let mut i = 0;
    while i + 1 < s.len() && s[i] <= s[i + 1] {
        i += 1;
    }
    while i + 1 < s.len() && s[i] >= s[i + 1] {
        i += 1;
    }
    i + 1 >= s.len()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HrwReport {
    pub e0: String,
    pub rank: usize,
    #[serde(with = "rat_serde::vec")]
    pub mu_bar_charpoly: QVec,
    #[serde(with = "rat_serde::vec")]
    pub mu_bar_degree: QVec,
    #[serde(with = "rat_serde::vec")]
    pub mu_bar_mvol: QVec,
    #[serde(with = "rat_serde::vec")]
    pub mu: QVec,
    pub agree: bool,
    pub log_concave: bool,
    pub unimodal: bool,
    pub mu_log_concave: bool,
    pub mu_unimodal: bool,
    pub limits: Vec<LimitCheck>,
    pub verdict: Verdict,
}

/// Reduced characteristic coefficients from the characteristic polynomial,
/// from Chow degrees of `α^{d−a}β^a` and from mixed volumes of `z^α, z^β`.
pub fn hrw_verify(m: &Matroid, e0: &str) -> Result<HrwReport, AfError> {
    hrw_verify_with_cap(m, e0, DEFAULT_SUBSET_CAP)
}

/// [`hrw_verify`] with a custom ground-set limit for the subset expansion.
pub fn hrw_verify_with_cap(m: &Matroid, e0: &str, cap: usize) -> Result<HrwReport, AfError> {
    let cp = char_poly_with_cap(m, cap)?;
    let setup = bergman_setup(m, e0)?;
    let ctx = &setup.ctx;
    let d = ctx.dim();
    let tuple = |a: usize| -> Vec<ZValues> {
        let mut v = vec![setup.z_alpha.clone(); d - a];
        v.extend(std::iter::repeat_n(setup.z_beta.clone(), a));
        v
    };
    let to_rat = |v: &[i64]| -> QVec { v.iter().map(|&x| Rat::from_integer(x.into())).collect() };
    let mu_bar_charpoly = to_rat(&cp.mu_bar);
    let mu_bar_degree = (0..=d).map(|a| deg_product(ctx.fan(), &tuple(a))).collect::<Result<QVec, _>>()?;
    let mu_bar_mvol = (0..=d).map(|a| mvol_recursive(ctx, &tuple(a))).collect::<Result<QVec, _>>()?;
    let agree = mu_bar_charpoly == mu_bar_degree && mu_bar_degree == mu_bar_mvol;
    if !agree {
        let show = |v: &QVec| v.iter().map(ToString::to_string).collect();
        return Err(AfError::Mismatch {
            charpoly: show(&mu_bar_charpoly),
            degree: show(&mu_bar_degree),
            mvol: show(&mu_bar_mvol),
        });
    }
    let witness = find_cubical(ctx).witness().cloned().ok_or(AfError::EmptyCubical)?;
    let limits = (0..=d)
        .into_par_iter()
        .map(|a| limit_regression(ctx, &setup.z_alpha, &setup.z_beta, &witness, a))
        .collect::<Result<Vec<_>, _>>()?;
    let mu = to_rat(&cp.mu);
    let log_concave = is_log_concave(&mu_bar_charpoly);
    let unimodal = is_unimodal(&mu_bar_charpoly);
    let mu_log_concave = is_log_concave(&mu);
    let mu_unimodal = is_unimodal(&mu);
    let verdict = Verdict::from_bool(
        log_concave && unimodal && mu_log_concave && mu_unimodal && limits.iter().all(|l| l.pass),
    );
    Ok(HrwReport {
        e0: e0.to_string(),
        rank: m.rank(),
        mu_bar_charpoly,
        mu_bar_degree,
        mu_bar_mvol,
        mu,
        agree,
        log_concave,
        unimodal,
        mu_log_concave,
        mu_unimodal,
        limits,
        verdict,
    })
}
