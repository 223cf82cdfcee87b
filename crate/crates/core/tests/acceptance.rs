//! End-to-end acceptance checks, one line of output per criterion.
//!
//! Run with `cargo test -p normalvol-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use normalvol_core::af::{af_check, af_samples, check_reduce_conditions, hrw_verify, SampleVerdict, Verdict};
use normalvol_core::chow::{deg_product, deg_product_with, CovectorStrategy};
use normalvol_core::exact::{rat, Rat};
use normalvol_core::fan::{star, ConeRef};
use normalvol_core::fixtures;
use normalvol_core::matroid::{alpha_beta_w, bergman_setup, Matroid};
use normalvol_core::normalcx::sample::{random_rat, sample_pseudocubical, stream_rng};
use normalvol_core::normalcx::{
    classify_z, face_complex, find_cubical, geometric_volume_total, mvol_polarization_oracle, mvol_recursive,
    vol_recursive, w_vector, CubClass, Context, InnerProduct, ZValues,
};

const SEED: u64 = 20240611;

struct Fixture {
    name: &'static str,
    ctx: Context,
    boundary: Vec<ZValues>,
    matroid: Option<Matroid>,
}

impl Fixture {
    fn witness(&self) -> ZValues {
        find_cubical(&self.ctx).witness().cloned().expect("fixture has a cubical value")
    }

    fn pseudocubical(&self, count: usize, seed: u64) -> Vec<ZValues> {
        sample_pseudocubical(&self.ctx, &self.witness(), &self.boundary, count, seed).expect("sampling")
    }

    fn tuples(&self, count: usize, seed: u64) -> Vec<Vec<ZValues>> {
        let d = self.ctx.dim();
        let zs = self.pseudocubical(count * d, seed);
        zs.chunks(d).map(<[ZValues]>::to_vec).collect()
    }
}

fn plain(name: &'static str, fan: normalvol_core::fan::MarkedFan, boundary: &[&[i64]]) -> Fixture {
    let n = fan.ambient_dim();
    let boundary = boundary.iter().map(|v| ZValues::from_vec(&fan, &normalvol_core::exact::vec_of(v))).collect();
    Fixture { name, ctx: Context::new(fan, InnerProduct::standard(n)).unwrap(), boundary, matroid: None }
}

fn bergman(name: &'static str, m: Matroid) -> Fixture {
    let e0 = m.labels()[0].clone();
    let s = bergman_setup(&m, &e0).unwrap();
    Fixture { name, ctx: s.ctx, boundary: vec![s.z_alpha, s.z_beta], matroid: Some(m) }
}

/// Quadrant, ±1 and the Bergman fans of U23, U34, U35 and K4.
fn core_fixtures() -> Vec<Fixture> {
    vec![
        plain("quadrant", fixtures::quadrant(), &[&[1, 0, 0, 0], &[1, 1, 0, 0]]),
        plain("pm1", fixtures::pm1(), &[&[1, 0]]),
        bergman("U23", fixtures::uniform(2, 3)),
        bergman("U34", fixtures::uniform(3, 4)),
        bergman("U35", fixtures::uniform(3, 5)),
        bergman("K4", fixtures::k4()),
    ]
}

fn all_fixtures() -> Vec<Fixture> {
    let mut v = core_fixtures();
    v.push(plain("octants", fixtures::octants(), &[&[1, 0, 0, 1, 0, 0]]));
    v.push(bergman("U45", fixtures::uniform(4, 5)));
    v.push(bergman("K4-e", fixtures::k4_minus_edge()));
    v
}

fn bergman_fixtures() -> Vec<Fixture> {
    fixtures::matroids().into_iter().map(|(n, m)| bergman(n, m)).collect()
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repeat(z: &ZValues, k: usize) -> Vec<ZValues> {
    vec![z.clone(); k]
}

fn vol_equals_degree() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for fx in core_fixtures() {
        let d = fx.ctx.dim();
        for (i, z) in fx.pseudocubical(20, SEED).iter().enumerate() {
            let v = vol_recursive(&fx.ctx, z).map_err(|e| e.to_string())?;
            let g = deg_product(fx.ctx.fan(), &repeat(z, d)).map_err(|e| e.to_string())?;
            ensure(v == g, || format!("{} sample {i}: vol {v} deg {g}", fx.name))?;
            checked += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{checked} values, {t:.2?}"))
}

fn mvol_equals_mixed_degree() -> Outcome {
    let mut checked = 0;
    for fx in core_fixtures() {
        for (i, zs) in fx.tuples(10, SEED + 1).iter().enumerate() {
            let m = mvol_recursive(&fx.ctx, zs).map_err(|e| e.to_string())?;
            let g = deg_product(fx.ctx.fan(), zs).map_err(|e| e.to_string())?;
            ensure(m == g, || format!("{} tuple {i}: mvol {m} deg {g}", fx.name))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} tuples"))
}

fn oracle_triangle() -> Outcome {
    let (mut pol, mut geo) = (0, 0);
    for fx in all_fixtures() {
        for zs in fx.tuples(5, SEED + 2) {
            let a = mvol_recursive(&fx.ctx, &zs).map_err(|e| e.to_string())?;
            let b = mvol_polarization_oracle(&fx.ctx, &zs).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{}: recursive {a} polarization {b}", fx.name))?;
            pol += 1;
        }
        if fx.ctx.dim() <= 3 {
            for z in fx.pseudocubical(5, SEED + 3) {
                let a = vol_recursive(&fx.ctx, &z).map_err(|e| e.to_string())?;
                let b = geometric_volume_total(&fx.ctx, &z).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("{}: recursive {a} geometric {b}", fx.name))?;
                geo += 1;
            }
        }
    }
    Ok(format!("{pol} polarization and {geo} geometric comparisons"))
}

fn symmetry_and_multilinearity() -> Outcome {
    let (mut perms, mut lins) = (0, 0);
    for fx in all_fixtures() {
        let d = fx.ctx.dim();
        let tuples = fx.tuples(5, SEED + 4);
        let extra = fx.pseudocubical(5, SEED + 5);
        for (i, zs) in tuples.iter().enumerate() {
            let mut rng = stream_rng(SEED + 6, i as u64);
            let base = mvol_recursive(&fx.ctx, zs).map_err(|e| e.to_string())?;
            let mut p = zs.clone();
            p.shuffle(&mut rng);
            let shuffled = mvol_recursive(&fx.ctx, &p).map_err(|e| e.to_string())?;
            ensure(base == shuffled, || format!("{}: permutation changed {base} to {shuffled}", fx.name))?;
            perms += 1;

            let slot = rng.random_range(0..d);
            let lambda = random_rat(&mut rng, 0, 3, 5);
            let mut mixed = zs.clone();
            mixed[slot] = zs[slot].scaled(&lambda).plus(&extra[i]);
            let mut other = zs.clone();
            other[slot] = extra[i].clone();
            let lhs = mvol_recursive(&fx.ctx, &mixed).map_err(|e| e.to_string())?;
            let rhs = &lambda * &base + mvol_recursive(&fx.ctx, &other).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("{}: linearity in slot {slot}: {lhs} vs {rhs}", fx.name))?;
            lins += 1;
        }
    }
    Ok(format!("{perms} permutations, {lins} linearity triples"))
}

fn face_identities() -> Outcome {
    let mut triples = 0;
    for fx in all_fixtures() {
        let fan = fx.ctx.fan();
        let zs = fx.pseudocubical(8, SEED + 7);
        for (i, z) in zs.iter().enumerate() {
            let mut rng = stream_rng(SEED + 8, i as u64);
            let sigma = &fan.max_cones()[rng.random_range(0..fan.max_cones().len())].cone;
            let faces = sigma.faces();
            let pi = faces[rng.random_range(0..faces.len())].clone();
            let below: Vec<ConeRef> = pi.faces();
            let tau = below[rng.random_range(0..below.len())].clone();

            // vertex identity for (τ, σ)
            let s = star(fan, &tau, fx.ctx.ip()).map_err(|e| e.to_string())?;
            let (tctx, zt) = face_complex(&fx.ctx, &tau, z).map_err(|e| e.to_string())?;
            let wsig = w_vector(&fx.ctx, sigma, z).map_err(|e| e.to_string())?.point;
            let wtau = w_vector(&fx.ctx, &tau, z).map_err(|e| e.to_string())?.point;
            let sig_t = s.project_cone(fan, sigma).ok_or("σ does not project into the star")?;
            let wst = w_vector(&tctx, &sig_t, &zt).map_err(|e| e.to_string())?.point;
            let diff = normalvol_core::exact::sub(&wsig, &wtau);
            ensure(diff == wst, || format!("{}: vertex identity fails at τ={:?} σ={:?}", fx.name, tau, sigma))?;

            // face of a face
            let pi_t = s.project_cone(fan, &pi).ok_or("π does not project into the star")?;
            let (c2, z2) = face_complex(&tctx, &pi_t, &zt).map_err(|e| e.to_string())?;
            let (c1, z1) = face_complex(&fx.ctx, &pi, z).map_err(|e| e.to_string())?;
            let (f1, f2) = (c1.fan(), c2.fan());
            ensure(z1 == z2, || format!("{}: restricted values differ at τ={:?} π={:?}", fx.name, tau, pi))?;
            ensure(f1.rays() == f2.rays(), || format!("{}: star rays differ at τ={:?} π={:?}", fx.name, tau, pi))?;
            let cones = |f: &normalvol_core::fan::MarkedFan| {
                let mut v: Vec<(Vec<String>, Rat)> =
                    f.max_cones().iter().map(|m| (f.cone_ids(&m.cone), m.weight.clone())).collect();
                v.sort();
                v
            };
            ensure(cones(f1) == cones(f2), || format!("{}: star cones differ at π={:?}", fx.name, pi))?;
            let v1 = vol_recursive(&c1, &z1).map_err(|e| e.to_string())?;
            let v2 = vol_recursive(&c2, &z2).map_err(|e| e.to_string())?;
            ensure(v1 == v2, || format!("{}: face volumes differ", fx.name))?;
            triples += 1;
        }
    }
    ensure(triples >= 50, || format!("only {triples} triples"))?;
    Ok(format!("{triples} triples"))
}

fn reduce_conditions() -> Outcome {
    for fx in bergman_fixtures() {
        let r = check_reduce_conditions(&fx.ctx).map_err(|e| e.to_string())?;
        ensure(r.condition_i.pass, || format!("{}: connectivity fails at {:?}", fx.name, r.condition_i.failing))?;
        ensure(r.condition_ii.pass, || format!("{}: star signatures {:?}", fx.name, r.condition_ii.stars))?;
        ensure(r.verdict == Verdict::Pass, || format!("{}: verdict {:?}", fx.name, r.verdict))?;
    }
    // rank-3 degree facts
    let mut facts = 0;
    for fx in bergman_fixtures() {
        let m = fx.matroid.as_ref().unwrap();
        if m.rank() != 3 {
            continue;
        }
        let fan = fx.ctx.fan();
        for f in m.proper_flats() {
            let mask = m.flats()[f];
            let ray = fan.ray_index(&m.set_id(mask)).unwrap();
            let mut e = vec![rat(0); fan.n_rays()];
            e[ray] = rat(1);
            let x = ZValues::from_vec(fan, &e);
            let deg = deg_product(fan, &[x.clone(), x]).map_err(|e| e.to_string())?;
            let expected = if m.flat_rank(f) == 2 {
                rat(-1)
            } else {
                let above = m.proper_flats().filter(|&g| m.flats()[g] != mask && m.flats()[g] & mask == mask).count();
                rat(1 - above as i64)
            };
            ensure(deg == expected, || format!("{}: deg X_F² = {deg} for F = {}", fx.name, m.set_id(mask)))?;
            facts += 1;
        }
    }
    Ok(format!("6 Bergman fans, {facts} self-intersection degrees"))
}

fn af_inequality() -> Outcome {
    let mut total = 0;
    let mut skipped = Vec::new();
    for fx in bergman_fixtures() {
        if fx.ctx.dim() < 2 {
            skipped.push(fx.name);
            continue;
        }
        let r = af_samples(&fx.ctx, 50, SEED + 9).map_err(|e| e.to_string())?;
        ensure(r.verdict == SampleVerdict::EmpiricallyConsistent, || {
            format!("{}: margin {} is negative", fx.name, r.min_margin)
        })?;
        total += r.triples.len();
        for t in &r.tuples {
            let mut same = t.clone();
            same[1] = same[0].clone();
            let m = af_check(&fx.ctx, &same).map_err(|e| e.to_string())?;
            ensure(m.margin == rat(0), || format!("{}: equal arguments give margin {}", fx.name, m.margin))?;
        }
    }
    Ok(format!("{total} tuples, equality case exact; dimension 1 skipped: {skipped:?}"))
}

fn hrw_pipeline() -> Outcome {
    let start = Instant::now();
    let expected: &[(&str, &[i64])] = &[
        ("U23", &[1, 2]),
        ("U34", &[1, 3, 3]),
        ("U35", &[1, 4, 6]),
        ("U45", &[1, 4, 6, 4]),
        ("K4", &[1, 5, 6]),
        ("K4-e", &[1, 4, 4]),
    ];
    for ((name, m), (ename, mu)) in fixtures::matroids().iter().zip(expected) {
        assert_eq!(name, ename);
        let r = hrw_verify(m, &m.labels()[0]).map_err(|e| format!("{name}: {e}"))?;
        let want: Vec<Rat> = mu.iter().map(|&x| rat(x)).collect();
        ensure(r.mu_bar_charpoly == want, || format!("{name}: μ̄ = {:?}", r.mu_bar_charpoly))?;
        ensure(r.agree && r.log_concave && r.unimodal && r.mu_log_concave && r.mu_unimodal, || {
            format!("{name}: verdicts {r:?}")
        })?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!("6 matroids, {t:.2?}"))
}

fn closed_form_w_vectors() -> Outcome {
    let mut cones = 0;
    for (name, m) in fixtures::matroids() {
        let proper: Vec<u32> = m.proper_flats().map(|i| m.flats()[i]).collect();
        for e0 in m.labels().to_vec() {
            let s = bergman_setup(&m, &e0).map_err(|e| e.to_string())?;
            for z in [&s.z_alpha, &s.z_beta] {
                let c = classify_z(&s.ctx, z).map_err(|e| e.to_string())?;
                ensure(c.class == CubClass::PseudocubicalBoundary, || format!("{name}/{e0}: {c}"))?;
            }
            for mc in s.ctx.fan().max_cones() {
                let mut flag: Vec<u32> = mc.cone.rays().iter().map(|&r| proper[r]).collect();
                flag.sort_by_key(|f| f.count_ones());
                let (wa, wb) = alpha_beta_w(&m, &e0, &flag).map_err(|e| e.to_string())?;
                let da = w_vector(&s.ctx, &mc.cone, &s.z_alpha).map_err(|e| e.to_string())?.point;
                let db = w_vector(&s.ctx, &mc.cone, &s.z_beta).map_err(|e| e.to_string())?.point;
                ensure(da == wa && db == wb, || format!("{name}/{e0}: flag {:?}", s.ctx.fan().cone_ids(&mc.cone)))?;
                cones += 1;
            }
        }
    }
    Ok(format!("{cones} flag cones over every choice of e0"))
}

fn covector_strategies() -> Outcome {
    let mut products = 0;
    for fx in all_fixtures() {
        let fan = fx.ctx.fan();
        let d = fan.dim();
        for i in 0..15u64 {
            let mut rng = stream_rng(SEED + 10, i);
            let zs: Vec<ZValues> = (0..d)
                .map(|_| {
                    let v: Vec<Rat> = (0..fan.n_rays()).map(|_| random_rat(&mut rng, -3, 3, 2)).collect();
                    ZValues::from_vec(fan, &v)
                })
                .collect();
            let a = deg_product_with(fan, &zs, CovectorStrategy::MinimalSupport).map_err(|e| e.to_string())?;
            let b = deg_product_with(fan, &zs, CovectorStrategy::LastCoordinates).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{}: {a} vs {b}", fx.name))?;
            products += 1;
        }
    }
    ensure(products >= 100, || format!("only {products} products"))?;
    Ok(format!("{products} products under both strategies"))
}

fn boundary_limit() -> Outcome {
    let mut checks = 0;
    for (name, m) in fixtures::matroids() {
        let r = hrw_verify(&m, &m.labels()[0]).map_err(|e| format!("{name}: {e}"))?;
        for l in &r.limits {
            ensure(l.pass, || format!("{name}, a = {}: {l:?}", l.a))?;
            ensure(&l.extrapolated - &l.boundary == rat(0), || format!("{name}: nonzero margin"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} (matroid, a) pairs at t = 1/2, 1/4, 1/8, …"))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 vol = deg", vol_equals_degree),
        ("2 mvol = mixed degree", mvol_equals_mixed_degree),
        ("3 oracle triangle", oracle_triangle),
        ("4 symmetry and multilinearity", symmetry_and_multilinearity),
        ("5 face identities", face_identities),
        ("6 reduce conditions", reduce_conditions),
        ("7 AF inequality", af_inequality),
        ("8 HRW pipeline", hrw_pipeline),
        ("9 w-vector closed forms", closed_form_w_vectors),
        ("10 covector strategies", covector_strategies),
        ("11 boundary vs limit", boundary_limit),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{:.2?}]", start.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
