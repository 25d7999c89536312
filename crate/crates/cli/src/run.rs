use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use subpix_core::adversarial::{gen_d1, gen_d2, AdversarialParams, Shift};
use subpix_core::cover::{Cover2D, Cover3DFull, Cover3DRestricted, CoverParams, Family2D, Family3D};
use subpix_core::image::Raster;
use subpix_core::matcher::{
    estimate_distance_median, exact_distance_over, exact_distance_under, match_general, match_smooth_3d_over,
    match_smooth_over, GeneralOptions, MatchParams, MatchResult, SampleBudget, DEFAULT_WORK_CAP,
};
use subpix_core::netpbm::{self, AnyImage, Encoding};
use subpix_core::reduction::{distance_tl, match_grayscale_over, reduce_to_3d};
use subpix_core::{rng, synth, AffineMap2D, BinaryImage2D, MeteredImage, Pixel, TransformDescriptor};

use crate::args::{
    BenchArgs, BenchMode, Cli, Command, CoverArgs, CoverStatsArgs, DistanceArgs, FamilyArg, GenArgs, GenFamily,
    MatchArgs, Mode, ReduceArgs, Space,
};
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Runs one command and returns its output lines.
pub fn run(cli: Cli) -> CliResult<Vec<String>> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build_global()
        .map_err(|e| CliError::invalid("--workers", e.to_string()))?;
    let start = Instant::now();
    let timing = cli.timing;
    let lines = match cli.command {
        Command::Match(a) => vec![to_line(&run_match(&a)?)],
        Command::Distance(a) => vec![to_line(&run_distance(&a)?)],
        Command::Gen(a) => vec![to_line(&run_gen(&a)?)],
        Command::Reduce(a) => vec![to_line(&run_reduce(&a)?)],
        Command::CoverStats(a) => vec![to_line(&run_cover_stats(&a)?)],
        Command::Bench(a) => run_bench(&a, timing)?.iter().map(to_line).collect(),
    };
    if timing {
        eprintln!("wall_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(lines)
}

fn to_line<T: Serialize>(record: &T) -> String {
    serde_json::to_string(record).expect("records serialize")
}

/// Work cap for exhaustive searches, overridable through `SUBPIX_WORK_CAP`.
fn work_cap() -> CliResult<u64> {
    match std::env::var("SUBPIX_WORK_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::invalid("SUBPIX_WORK_CAP", format!("{v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_WORK_CAP),
    }
}

fn check_epsilon(flag: &'static str, eps: f64) -> CliResult<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(CliError::invalid(flag, format!("{eps} is not in (0, 1)")))
    }
}

fn check_cover(a: &CoverArgs) -> CliResult<()> {
    if !(a.delta_prime > 0.0 && a.delta_prime < std::f64::consts::SQRT_2) {
        return Err(CliError::invalid("--delta", format!("{} is not in (0, √2)", a.delta_prime)));
    }
    if !(a.c >= 1.0 && a.c.is_finite()) {
        return Err(CliError::invalid("--c", format!("{} is not a finite value ≥ 1", a.c)));
    }
    Ok(())
}

fn check_n(n: usize) -> CliResult<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(CliError::invalid("--n", format!("{n} is below 2")))
    }
}

fn family_2d(f: FamilyArg) -> Family2D {
    match f {
        FamilyArg::Affine => Family2D::Affine,
        FamilyArg::Translation => Family2D::Translation,
        FamilyArg::Identity => Family2D::Identity,
    }
}

fn family_3d(f: FamilyArg) -> CliResult<Family3D> {
    match f {
        FamilyArg::Affine => Ok(Family3D::Affine),
        FamilyArg::Translation => Ok(Family3D::Translation),
        FamilyArg::Identity => Err(CliError::invalid("--family", "identity is not available for volumes")),
    }
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::Affine => "affine",
        FamilyArg::Translation => "translation",
        FamilyArg::Identity => "identity",
    }
}

fn cover_params(n: usize, a: &CoverArgs) -> CliResult<CoverParams> {
    Ok(CoverParams::new(n, a.delta_prime, a.c)?)
}

#[derive(Debug, Serialize)]
struct MatchRecord {
    schema_version: u32,
    command: &'static str,
    mode: &'static str,
    family: &'static str,
    distance: f64,
    transform: TransformDescriptor,
    queries: u64,
    seed: u64,
    member_index: Option<u64>,
    params: MatchParams,
}

enum Pair {
    Binary(BinaryImage2D, BinaryImage2D),
    Gray(subpix_core::GrayImage2D, subpix_core::GrayImage2D),
    Volume(subpix_core::BinaryImage3D, subpix_core::BinaryImage3D),
}

/// Attaches the path to I/O errors.
fn at_path<T>(path: &Path, r: subpix_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        subpix_core::Error::Io(io) => {
            subpix_core::Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))).into()
        }
        e => e.into(),
    })
}

fn read_pair(m1: &Path, m2: &Path) -> CliResult<Pair> {
    match (at_path(m1, netpbm::read_any(m1))?, at_path(m2, netpbm::read_any(m2))?) {
        (AnyImage::Binary(a), AnyImage::Binary(b)) => Ok(Pair::Binary(a, b)),
        (AnyImage::Gray(a), AnyImage::Gray(b)) => Ok(Pair::Gray(a, b)),
        (AnyImage::Binary(a), AnyImage::Gray(b)) => Ok(Pair::Gray(a.to_gray(), b)),
        (AnyImage::Gray(a), AnyImage::Binary(b)) => Ok(Pair::Gray(a, b.to_gray())),
        (AnyImage::Volume(a), AnyImage::Volume(b)) => Ok(Pair::Volume(a, b)),
        _ => Err(CliError::invalid("--m2", "M1 and M2 must both be planar images or both volumes")),
    }
}

fn planar_only(mode: &'static str) -> CliError {
    CliError::invalid("--mode", format!("{mode} mode needs planar PBM or PGM images"))
}

fn match_planar<R: Raster<Coord = Pixel>>(a: &MatchArgs, m1: &R, m2: &R) -> CliResult<MatchResult> {
    let params = cover_params(m1.side(), &a.cover)?;
    let family = family_2d(a.cover.family);
    Ok(match a.mode {
        Mode::Smooth => match_smooth_over(m1, m2, &Cover2D::build_family(params, family)?, a.epsilon, a.seed)?,
        Mode::General => {
            let cover = Cover2D::build_family(params, family)?;
            let candidates: Vec<AffineMap2D> = cover.members().collect();
            let opts = GeneralOptions { strict_paper: a.strict_paper, ..GeneralOptions::default() };
            match_general(m1, m2, a.epsilon, &candidates, a.seed, &opts)?
        }
        Mode::Exact => {
            let cap = work_cap()?;
            let cover =
                Cover2D::build_family(params.with_cap(cap / m1.cells() as u64), family).map_err(|e| match e {
                    subpix_core::Error::Capacity { members, .. } => {
                        subpix_core::Error::WorkCap { work: members * m1.cells() as u128, cap }
                    }
                    e => e,
                })?;
            let (idx, transform, d) = exact_distance_over(m1, m2, &cover, cap)?;
            MatchResult {
                transform,
                estimated_distance: d,
                queries_used: 2 * cover.len() * m1.cells() as u64,
                member_index: Some(idx),
                params: MatchParams {
                    delta_prime: Some(params.delta_prime),
                    epsilon: a.epsilon,
                    c: Some(params.c),
                    seed: a.seed,
                    reps: 1,
                    samples_per_estimate: m1.cells(),
                    candidates: cover.len(),
                    strict_paper: false,
                },
            }
        }
        Mode::ThreeD | Mode::Gray => unreachable!("dispatched elsewhere"),
    })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Smooth => "smooth",
        Mode::General => "general",
        Mode::Exact => "exact",
        Mode::ThreeD => "3d",
        Mode::Gray => "gray",
    }
}

fn run_match(a: &MatchArgs) -> CliResult<MatchRecord> {
    check_cover(&a.cover)?;
    check_epsilon("--epsilon", a.epsilon)?;
    let pair = read_pair(&a.m1, &a.m2)?;
    let record = |r: (f64, u64, Option<u64>, MatchParams), transform: TransformDescriptor| MatchRecord {
        schema_version: SCHEMA_VERSION,
        command: "match",
        mode: mode_name(a.mode),
        family: family_name(a.cover.family),
        distance: r.0,
        transform,
        queries: r.1,
        seed: a.seed,
        member_index: r.2,
        params: r.3,
    };
    let planar = |r: MatchResult| {
        let t = TransformDescriptor::from_affine_2d(&r.transform);
        record((r.estimated_distance, r.queries_used, r.member_index, r.params), t)
    };
    let rec = match (a.mode, pair) {
        (Mode::ThreeD, Pair::Volume(m1, m2)) => {
            let cover = Cover3DFull::build_family(cover_params(m1.n(), &a.cover)?, family_3d(a.cover.family)?)?;
            let r = match_smooth_3d_over(&m1, &m2, &cover, a.epsilon, a.seed)?;
            let t = TransformDescriptor::from_affine_3d(&r.transform);
            record((r.estimated_distance, r.queries_used, r.member_index, r.params), t)
        }
        (Mode::ThreeD, _) => return Err(CliError::invalid("--mode", "3d mode needs VOX3 volumes")),
        (Mode::Gray, Pair::Gray(m1, m2)) => {
            let cover = Cover3DRestricted::build_family(cover_params(m1.n(), &a.cover)?, family_2d(a.cover.family))?;
            let r = match_grayscale_over(&m1, &m2, &cover, a.epsilon, a.seed)?;
            let t = TransformDescriptor::from_affine_2d(&r.transform).with_intensity(&r.intensity);
            record((r.estimated_distance, r.queries_used, r.member_index, r.params), t)
        }
        (Mode::Gray, _) => return Err(CliError::invalid("--mode", "gray mode needs PGM images")),
        (_, Pair::Binary(m1, m2)) => planar(match_planar(a, &m1, &m2)?),
        (_, Pair::Gray(m1, m2)) => planar(match_planar(a, &m1, &m2)?),
        (mode, Pair::Volume(..)) => return Err(planar_only(mode_name(mode))),
    };
    if let Some(path) = &a.out {
        rec.transform.write(path)?;
    }
    Ok(rec)
}

#[derive(Debug, Serialize)]
struct DistanceRecord {
    schema_version: u32,
    command: &'static str,
    distance: f64,
    transform: TransformDescriptor,
    /// Sampled estimate, when `--epsilon` was given.
    estimate: Option<f64>,
    queries: Option<u64>,
    seed: u64,
}

fn run_distance(a: &DistanceArgs) -> CliResult<DistanceRecord> {
    if let Some(e) = a.epsilon {
        check_epsilon("--epsilon", e)?;
    }
    let desc = at_path(&a.t, TransformDescriptor::read(&a.t))?;
    let pair = read_pair(&a.m1, &a.m2)?;
    let (distance, sampled) = match pair {
        Pair::Binary(m1, m2) => {
            let t = desc.to_affine_2d()?;
            (exact_distance_under(&m1, &m2, &t)?, sample(a, &m1, &m2, &t)?)
        }
        Pair::Gray(m1, m2) => {
            let t = desc.to_affine_2d()?;
            let l = desc.intensity()?;
            let d = distance_tl(&m1, &m2, &t, &l)?;
            let s = if l == subpix_core::IntensityMap::identity() { sample(a, &m1, &m2, &t)? } else { None };
            (d, s)
        }
        Pair::Volume(m1, m2) => {
            let t = desc.to_affine_3d()?;
            (exact_distance_under(&m1, &m2, &t)?, sample(a, &m1, &m2, &t)?)
        }
    };
    Ok(DistanceRecord {
        schema_version: SCHEMA_VERSION,
        command: "distance",
        distance,
        transform: desc,
        estimate: sampled.map(|s| s.0),
        queries: sampled.map(|s| s.1),
        seed: a.seed,
    })
}

fn sample<R, M>(a: &DistanceArgs, m1: &R, m2: &R, t: &M) -> CliResult<Option<(f64, u64)>>
where
    R: Raster,
    M: subpix_core::matcher::ImageMap<R::Coord>,
{
    let Some(eps) = a.epsilon else { return Ok(None) };
    let budget = SampleBudget::new(eps, 1)?;
    let (x, y) = (MeteredImage::new(m1), MeteredImage::new(m2));
    let d = estimate_distance_median(&x, &y, t, &budget, a.seed);
    Ok(Some((d, x.reads() + y.reads())))
}

#[derive(Debug, Serialize)]
struct GenRecord {
    schema_version: u32,
    command: &'static str,
    family: &'static str,
    n: usize,
    k: usize,
    seed: u64,
    files: Vec<PathBuf>,
    shift: Option<Shift>,
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run_gen(a: &GenArgs) -> CliResult<GenRecord> {
    check_n(a.n)?;
    let p = AdversarialParams::new(a.n, a.k, a.seed).map_err(|e| CliError::invalid("--k", e.to_string()))?;
    let (m1, m2, shift, family) = match a.family {
        GenFamily::D1 => {
            let (m1, m2) = gen_d1(&p)?;
            (m1, m2, None, "d1")
        }
        GenFamily::D2 => {
            let (m1, m2, s) = gen_d2(&p)?;
            (m1, m2, Some(s), "d2")
        }
    };
    let f1 = suffixed(&a.out_prefix, "_m1.pbm");
    let f2 = suffixed(&a.out_prefix, "_m2.pbm");
    // Encode everything before touching the disk.
    let (b1, b2) = (netpbm::encode_pbm(&m1, Encoding::Raw), netpbm::encode_pbm(&m2, Encoding::Raw));
    let mut files = vec![f1.clone(), f2.clone()];
    let sidecar = shift.map(|s| (suffixed(&a.out_prefix, "_shift.json"), to_line(&s) + "\n"));
    std::fs::write(&f1, b1)?;
    std::fs::write(&f2, b2)?;
    if let Some((path, text)) = sidecar {
        std::fs::write(&path, text)?;
        files.push(path);
    }
    Ok(GenRecord { schema_version: SCHEMA_VERSION, command: "gen", family, n: a.n, k: a.k, seed: a.seed, files, shift })
}

#[derive(Debug, Serialize)]
struct ReduceRecord {
    schema_version: u32,
    command: &'static str,
    n: usize,
    ones: usize,
    out: PathBuf,
}

fn run_reduce(a: &ReduceArgs) -> CliResult<ReduceRecord> {
    let m = at_path(&a.input, netpbm::read_pgm(&a.input))?;
    let v = reduce_to_3d(&m);
    netpbm::write_vox3(&a.out, &v)?;
    Ok(ReduceRecord {
        schema_version: SCHEMA_VERSION,
        command: "reduce",
        n: v.n(),
        ones: v.count_ones(),
        out: a.out.clone(),
    })
}

#[derive(Debug, Serialize)]
struct Axis {
    name: &'static str,
    points: usize,
    lo: f64,
    hi: f64,
    spacing: f64,
}

#[derive(Debug, Serialize)]
struct CoverStatsRecord {
    schema_version: u32,
    command: &'static str,
    space: &'static str,
    family: &'static str,
    n: usize,
    delta_prime: f64,
    c: f64,
    axes: Vec<Axis>,
    members: u128,
}

fn axes(grid: &subpix_core::cover::ProductGrid) -> Vec<Axis> {
    grid.axes()
        .iter()
        .map(|(name, g)| {
            let (lo, hi) = g.range();
            Axis { name, points: g.len(), lo, hi, spacing: g.spacing() }
        })
        .collect()
}

fn run_cover_stats(a: &CoverStatsArgs) -> CliResult<CoverStatsRecord> {
    check_n(a.n)?;
    check_cover(&a.cover)?;
    let p = cover_params(a.n, &a.cover)?.with_cap(u64::MAX);
    let (space, axes, members) = match a.space {
        Space::TwoD => {
            let cov = Cover2D::build_family(p, family_2d(a.cover.family))?;
            ("2d", axes(cov.grid()), cov.len() as u128)
        }
        Space::ThreeD => {
            let cov = Cover3DFull::build_uncapped(p, family_3d(a.cover.family)?)?;
            ("3d", axes(cov.grid()), cov.len())
        }
        Space::Restricted => {
            let cov = Cover3DRestricted::build_family(p, family_2d(a.cover.family))?;
            let mut all = axes(cov.planar().grid());
            all.extend(axes(cov.z_grid()));
            ("restricted", all, cov.len() as u128)
        }
    };
    Ok(CoverStatsRecord {
        schema_version: SCHEMA_VERSION,
        command: "cover-stats",
        space,
        family: family_name(a.cover.family),
        n: a.n,
        delta_prime: a.cover.delta_prime,
        c: a.cover.c,
        axes,
        members,
    })
}

#[derive(Debug, Serialize)]
struct BenchRecord {
    schema_version: u32,
    command: &'static str,
    mode: &'static str,
    n: usize,
    delta_prime: f64,
    epsilon: f64,
    seed: u64,
    queries: u64,
    distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
}

fn run_bench(a: &BenchArgs, timing: bool) -> CliResult<Vec<BenchRecord>> {
    check_cover(&a.cover)?;
    check_epsilon("--epsilon", a.epsilon)?;
    if a.n.is_empty() {
        return Err(CliError::invalid("--n", "no sizes given"));
    }
    for &n in &a.n {
        check_n(n)?;
    }
    a.n.iter()
        .map(|&n| {
            let params = cover_params(n, &a.cover)?;
            let cover = Cover2D::build_family(params, family_2d(a.cover.family))?;
            let start = Instant::now();
            let (mode, r) = match a.mode {
                BenchMode::Smooth => {
                    let mut g = rng::stream(rng::derive_seed(a.seed, n as u64));
                    let m1 = synth::random_smooth_binary(&mut g, n, 6.0);
                    let m2 = synth::shifted_binary(&m1, (n / 16) as i64, -((n / 32) as i64), 0);
                    ("smooth", match_smooth_over(&m1, &m2, &cover, a.epsilon, a.seed)?)
                }
                BenchMode::General => {
                    let p =
                        AdversarialParams::new(n, 1, a.seed).map_err(|e| CliError::invalid("--n", e.to_string()))?;
                    let (m1, m2, _) = gen_d2(&p)?;
                    let candidates: Vec<AffineMap2D> = cover.members().collect();
                    ("general", match_general(&m1, &m2, a.epsilon, &candidates, a.seed, &GeneralOptions::default())?)
                }
            };
            let wall = start.elapsed().as_secs_f64() * 1e3;
            if timing {
                eprintln!("n={n} wall_ms={wall:.3}");
            }
            Ok(BenchRecord {
                schema_version: SCHEMA_VERSION,
                command: "bench",
                mode,
                n,
                delta_prime: a.cover.delta_prime,
                epsilon: a.epsilon,
                seed: a.seed,
                queries: r.queries_used,
                distance: r.estimated_distance,
                wall_ms: timing.then_some(wall),
            })
        })
        .collect()
}
