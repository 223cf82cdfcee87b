mod caps;
mod mesh;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use normalvol_core::af::{
    af_check, af_samples, check_reduce_conditions, hrw_verify_with_cap, lorentzian_spot_check, AfSampleReport,
    AfTriple, LorentzianReport, ReduceReport, SampleVerdict, Verdict,
};
use normalvol_core::chow::deg_product;
use normalvol_core::exact::{rat_serde, Rat};
use normalvol_core::fan::{FanError, MarkedFan};
use normalvol_core::matroid::{bergman_setup, Matroid};
use normalvol_core::normalcx::{
    classify_z, find_cubical, geometric_volume_total, mvol_recursive, vol_polynomial, vol_recursive, Context,
    CubicalSearch, GramJson, InnerProduct, ZValues,
};

use caps::Caps;

#[derive(Parser)]
#[command(name = "normalvol", version, about = "Exact volumes of normal complexes, Chow degrees and matroid log-concavity")]
struct Cli {
    /// Worker threads for the parallel checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Size limits such as `ground_set=20,rays=200,dim=6`.
    #[arg(long, global = true, env = "NORMALVOL_CAPS")]
    caps: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FanInput {
    #[arg(long)]
    fan: PathBuf,
    /// Gram matrix of the inner product; standard when omitted.
    #[arg(long)]
    gram: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Recursive,
    Poly,
    Geom,
    Chow,
}

#[derive(Subcommand)]
enum Command {
    /// Checks that a fan parses, is simplicial and pure, and reports balancing.
    FanValidate {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Volume of the normal complex at one z.
    Volume {
        #[command(flatten)]
        input: FanInput,
        #[arg(long)]
        z: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Recursive)]
        method: Method,
        /// Runs every applicable method and requires agreement.
        #[arg(long)]
        all: bool,
    },
    /// Mixed volume of d values of z.
    MixedVolume {
        #[command(flatten)]
        input: FanInput,
        #[arg(long, required = true)]
        z: Vec<PathBuf>,
    },
    /// Searches for a cubical value by linear programming.
    CubicalFind {
        #[command(flatten)]
        input: FanInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// AF margins at the given cubical values, or at seeded samples.
    AfCheck {
        #[command(flatten)]
        input: FanInput,
        #[arg(long)]
        z: Vec<PathBuf>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also spot-checks the Lorentzian conditions at sampled directions.
        #[arg(long)]
        lorentzian: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Star connectivity, star Hessian signatures and cubical nonemptiness.
    ReduceCheck {
        #[command(flatten)]
        input: FanInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced characteristic coefficients three ways, with log-concavity.
    Hrw {
        #[arg(long)]
        matroid: PathBuf,
        #[arg(long)]
        e0: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the maximal cells of a normal complex as a Wavefront OBJ file.
    ExportMesh {
        #[command(flatten)]
        input: FanInput,
        #[arg(long)]
        z: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Degree of a product of d divisors in the Chow ring.
    Deg {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long, required = true)]
        z: Vec<PathBuf>,
    },
    /// Writes fan.json, gram.json, z_alpha.json and z_beta.json for a matroid.
    Bergman {
        #[arg(long)]
        matroid: PathBuf,
        #[arg(long)]
        e0: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_fan(path: &Path, caps: &Caps) -> Result<MarkedFan> {
    let fan = MarkedFan::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    caps.check_fan(&fan)?;
    Ok(fan)
}

fn load_ctx(input: &FanInput, caps: &Caps) -> Result<Context> {
    let fan = load_fan(&input.fan, caps)?;
    let ip = match &input.gram {
        Some(p) => {
            let raw: GramJson = serde_json::from_str(&read(p)?).with_context(|| format!("in {}", p.display()))?;
            InnerProduct::from_json(&raw)?
        }
        None => InnerProduct::standard(fan.ambient_dim()),
    };
    Ok(Context::new(fan, ip)?)
}

fn load_z(path: &Path) -> Result<ZValues> {
    ZValues::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_zs(paths: &[PathBuf], d: usize) -> Result<Vec<ZValues>> {
    if paths.len() != d {
        bail!("expected {d} values of z, got {}", paths.len());
    }
    paths.iter().map(|p| load_z(p)).collect()
}

fn load_matroid(path: &Path, caps: &Caps) -> Result<Matroid> {
    let m = Matroid::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    caps.check_ground_set(m.size())?;
    Ok(m)
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FanReport {
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ambient_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rays: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_cones: Option<usize>,
    simplicial: bool,
    pure: bool,
    tropical: bool,
    unbalanced: Vec<Vec<String>>,
}

fn fan_validate(path: &Path, out: Option<&Path>, caps: &Caps) -> Result<i32> {
    let report = match MarkedFan::parse(&read(path)?) {
        Ok(fan) => {
            caps.check_fan(&fan)?;
            let t = fan.tropical_report();
            FanReport {
                valid: true,
                error: None,
                dim: Some(fan.dim()),
                ambient_dim: Some(fan.ambient_dim()),
                rays: Some(fan.n_rays()),
                max_cones: Some(fan.max_cones().len()),
                simplicial: true,
                pure: true,
                tropical: t.tropical,
                unbalanced: t.failing.clone(),
            }
        }
        Err(e) => FanReport {
            valid: false,
            simplicial: !matches!(e, FanError::NotSimplicial(_)),
            pure: !matches!(e, FanError::NotPure { .. }),
            error: Some(e.to_string()),
            dim: None,
            ambient_dim: None,
            rays: None,
            max_cones: None,
            tropical: false,
            unbalanced: Vec::new(),
        },
    };
    emit(&report, out)?;
    Ok(if report.valid && report.tropical { 0 } else { 2 })
}

fn volume_by(ctx: &Context, z: &ZValues, method: Method) -> Result<Rat> {
    let fan = ctx.fan();
    Ok(match method {
        Method::Recursive => vol_recursive(ctx, z)?,
        Method::Poly => {
            ctx.z_vec(z)?;
            vol_polynomial(ctx)?.eval(z.map())?
        }
        Method::Geom => {
            if fan.dim() > 3 {
                bail!("the geometric method needs d ≤ 3, got {}", fan.dim());
            }
            geometric_volume_total(ctx, z)?
        }
        Method::Chow => {
            if !fan.is_tropical() {
                bail!("the chow method needs a tropical fan");
            }
            deg_product(fan, &vec![z.clone(); fan.dim()])?
        }
    })
}

#[derive(Serialize)]
struct AllVolumes {
    #[serde(with = "rat_serde::map")]
    values: BTreeMap<String, Rat>,
    agree: bool,
}

fn volume(ctx: &Context, z: &ZValues, method: Method, all: bool) -> Result<i32> {
    if !all {
        println!("{}", volume_by(ctx, z, method)?);
        return Ok(0);
    }
    let mut methods = vec![("recursive", Method::Recursive), ("poly", Method::Poly)];
    if ctx.dim() <= 3 {
        methods.push(("geom", Method::Geom));
    }
    if ctx.fan().is_tropical() {
        methods.push(("chow", Method::Chow));
    }
    let mut values = BTreeMap::new();
    for (name, m) in methods {
        values.insert(name.to_string(), volume_by(ctx, z, m)?);
    }
    let mut it = values.values();
    let first = it.next().cloned();
    let agree = it.all(|v| Some(v) == first.as_ref());
    emit(&AllVolumes { values, agree }, None)?;
    Ok(if agree { 0 } else { 2 })
}

#[derive(Serialize)]
struct CubicalReport {
    found: bool,
    /// flattened so that the report is itself a z-values file
    #[serde(flatten)]
    z: Option<ZValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slack: Option<String>,
}

fn cubical_find(ctx: &Context, out: Option<&Path>) -> Result<i32> {
    let (report, code) = match find_cubical(ctx) {
        CubicalSearch::Found { z, slack } => {
            (CubicalReport { found: true, z: Some(z), slack: Some(slack.to_string()) }, 0)
        }
        CubicalSearch::Empty { slack } => {
            (CubicalReport { found: false, z: None, slack: slack.map(|s| s.to_string()) }, Verdict::Undefined.exit_code())
        }
    };
    emit(&report, out)?;
    Ok(code)
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
enum Basis {
    /// The sufficient conditions hold, so AF follows.
    SufficientConditions,
    /// Only the sampled margins are known.
    EmpiricallyConsistent,
}

#[derive(Serialize)]
struct AfCheckReport {
    reduce: ReduceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    given: Option<AfTriple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<AfSampleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lorentzian: Option<LorentzianReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: Option<Basis>,
    verdict: Verdict,
}

struct AfOptions<'a> {
    z: &'a [PathBuf],
    samples: usize,
    seed: u64,
    lorentzian: bool,
}

fn af_command(ctx: &Context, opts: AfOptions<'_>, out: Option<&Path>) -> Result<i32> {
    let reduce = check_reduce_conditions(ctx)?;
    let mut report = AfCheckReport {
        reduce,
        given: None,
        samples: None,
        lorentzian: None,
        basis: None,
        verdict: Verdict::Undefined,
    };
    if !report.reduce.cub_nonempty {
        emit(&report, out)?;
        return Ok(report.verdict.exit_code());
    }
    let ok = if opts.z.is_empty() {
        let s = af_samples(ctx, opts.samples, opts.seed)?;
        let ok = s.verdict == SampleVerdict::EmpiricallyConsistent;
        report.samples = Some(s);
        ok
    } else {
        let zs = load_zs(opts.z, ctx.dim())?;
        let t = af_check(ctx, &zs)?;
        let ok = t.margin >= Rat::from_integer(0.into());
        report.given = Some(t);
        ok
    };
    let mut pass = ok;
    if opts.lorentzian {
        let l = lorentzian_spot_check(ctx, opts.samples.min(25), opts.seed)?;
        pass &= l.pass;
        report.lorentzian = Some(l);
    }
    report.basis = Some(if report.reduce.verdict == Verdict::Pass {
        Basis::SufficientConditions
    } else {
        Basis::EmpiricallyConsistent
    });
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    emit(&report, out)?;
    Ok(report.verdict.exit_code())
}

fn e0_or_first(m: &Matroid, e0: &Option<String>) -> String {
    e0.clone().unwrap_or_else(|| m.labels()[0].clone())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn bergman_command(m: &Matroid, e0: &str, out: &Path) -> Result<i32> {
    let s = bergman_setup(m, e0)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(out, "fan.json", &s.ctx.fan().to_json())?;
    write_json(out, "gram.json", &s.ctx.ip().to_json())?;
    write_json(out, "z_alpha.json", &s.z_alpha)?;
    write_json(out, "z_beta.json", &s.z_beta)?;
    println!(
        "wrote Bergman fan with {} rays and {} maximal cones to {}",
        s.ctx.fan().n_rays(),
        s.ctx.fan().max_cones().len(),
        out.display()
    );
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
    }
    let caps = match &cli.caps {
        Some(s) => Caps::parse(s)?,
        None => Caps::default(),
    };
    match cli.command {
        Command::FanValidate { fan, out } => fan_validate(&fan, out.as_deref(), &caps),
        Command::Volume { input, z, method, all } => {
            let ctx = load_ctx(&input, &caps)?;
            volume(&ctx, &load_z(&z)?, method, all)
        }
        Command::MixedVolume { input, z } => {
            let ctx = load_ctx(&input, &caps)?;
            let zs = load_zs(&z, ctx.dim())?;
            println!("{}", mvol_recursive(&ctx, &zs)?);
            Ok(0)
        }
        Command::CubicalFind { input, out } => cubical_find(&load_ctx(&input, &caps)?, out.as_deref()),
        Command::AfCheck { input, z, samples, seed, lorentzian, out } => {
            let ctx = load_ctx(&input, &caps)?;
            af_command(&ctx, AfOptions { z: &z, samples, seed, lorentzian }, out.as_deref())
        }
        Command::ReduceCheck { input, out } => {
            let r = check_reduce_conditions(&load_ctx(&input, &caps)?)?;
            emit(&r, out.as_deref())?;
            Ok(r.verdict.exit_code())
        }
        Command::Hrw { matroid, e0, out } => {
            let m = load_matroid(&matroid, &caps)?;
            let r = hrw_verify_with_cap(&m, &e0_or_first(&m, &e0), caps.ground_set)?;
            emit(&r, out.as_deref())?;
            Ok(r.verdict.exit_code())
        }
        Command::ExportMesh { input, z, out } => {
            let ctx = load_ctx(&input, &caps)?;
            let z = load_z(&z)?;
            let class = classify_z(&ctx, &z)?;
            if !class.is_pseudocubical() {
                bail!("z is not pseudocubical: {class}");
            }
            let obj = mesh::to_obj(&ctx, &z)?;
            fs::write(&out, obj).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} cells to {}", ctx.fan().max_cones().len(), out.display());
            Ok(0)
        }
        Command::Deg { fan, z } => {
            let fan = load_fan(&fan, &caps)?;
            let zs = load_zs(&z, fan.dim())?;
            println!("{}", deg_product(&fan, &zs)?);
            Ok(0)
        }
        Command::Bergman { matroid, e0, out } => {
            let m = load_matroid(&matroid, &caps)?;
            bergman_command(&m, &e0_or_first(&m, &e0), &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
