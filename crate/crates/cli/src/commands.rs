//! Subcommand arguments and drivers. Each driver fills a [`Report`] and
//! returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::json;

use regladder::euler2d::{
    self, DmjFamily, DmjProfile, EnergyMode, TestFunction2D, TimeProfile, VortexState2D,
};
use regladder::euler3d::{self, AlignmentParams, Vorticity3D};
use regladder::field::{AtomicMeasure, GridField, MassSource};
use regladder::geometry::{Ball, BallCollection, Cube, CubeCollection, Domain};
use regladder::packing::{self, Collection, LatticeOptions, NormParams};
use regladder::rearrange::{self, Profile};
use regladder::{io, wavelet};

use crate::report::{write_csv, Metadata, Record, Report};
use crate::{matrix, Cli, Command};

const BOUNDS_HELP: &str = "Box `lo,hi` (same on every axis) for CSV atom inputs";

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Norm(a) => norm(cli, a),
        Command::Ladder(a) => ladder(cli, a),
        Command::Embed(a) => embed(cli, a),
        Command::Wavelet(a) => wavelet_cmd(cli, a),
        Command::Sim2d(a) => sim2d(cli, a),
        Command::Dmj(a) => dmj(cli, a),
        Command::Sim3d(a) => sim3d(cli, a),
        Command::Report(a) => report(a),
    }
}

fn new_report(cli: &Cli, command: &str) -> Report {
    Report::new(Metadata::new(command, cli.seed, cli.threads))
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    Ok(&cli.out)
}

/// Writes `<out>/<command>.json`, prints one line per record and returns 1 on any failure.
fn finish(cli: &Cli, rep: Report) -> Result<u8> {
    let path = out_dir(cli)?.join(format!("{}.json", rep.metadata.command));
    rep.write(&path)?;
    for r in &rep.records {
        let status = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "N/A ",
        };
        println!("{status} {}", r.name);
    }
    let failed = rep.failures();
    println!(
        "{}: {} checks, {failed} failed; report {}",
        rep.metadata.command,
        rep.records.len(),
        path.display()
    );
    Ok(u8::from(failed > 0))
}

enum Source {
    Grid(GridField),
    Atoms(AtomicMeasure),
}

impl Source {
    fn mass(&self) -> &dyn MassSource {
        match self {
            Source::Grid(g) => g,
            Source::Atoms(a) => a,
        }
    }

    fn grid(&self, what: &str) -> Result<&GridField> {
        match self {
            Source::Grid(g) => Ok(g),
            Source::Atoms(_) => bail!("{what} needs a grid input, got atoms"),
        }
    }
}

fn bounds(b: &[f64]) -> Result<(f64, f64)> {
    ensure!(
        b.len() == 2,
        "--box takes two values `lo,hi`, got {}",
        b.len()
    );
    Ok((b[0], b[1]))
}

/// Position columns present in a CSV header decide the dimension.
fn read_atoms_file(path: &Path, b: &[f64]) -> Result<AtomicMeasure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let head: Vec<&str> = text
        .lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .collect();
    let dim = ["x", "y", "z"]
        .iter()
        .take_while(|c| head.contains(c))
        .count();
    ensure!(dim > 0, "{}: no position columns", path.display());
    let (lo, hi) = bounds(b)?;
    let domain = Domain::cube(dim, lo, hi)?;
    io::read_atoms(text.as_bytes(), domain)
        .with_context(|| format!("reading atoms from {}", path.display()))
}

fn load(path: &Path, b: &[f64]) -> Result<Source> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        Ok(Source::Atoms(read_atoms_file(path, b)?))
    } else {
        Ok(Source::Grid(io::read_grid(path).with_context(|| {
            format!("reading grid {}", path.display())
        })?))
    }
}

fn read_balls(path: &Path, dim: usize) -> Result<BallCollection> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut balls = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let v = rec
            .iter()
            .map(|t| {
                t.parse::<f64>().with_context(|| {
                    format!("{} row {}: `{t}` is not a number", path.display(), i + 1)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ensure!(
            v.len() == dim + 1,
            "{} row {}: expected {} columns",
            path.display(),
            i + 1,
            dim + 1
        );
        balls.push(Ball::new(v[..dim].to_vec(), v[dim])?);
    }
    Ok(BallCollection::new(balls)?)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Space {
    /// Packing norm V^{pq}(log V)^α.
    V,
    Morrey,
    /// Lorentz-Zygmund L^{pq,α} from the rearrangement.
    Lorentz,
    /// Besov-type norm from Haar coefficients (smoothness `--s`, inner `--q`, outer `--eta`).
    Haar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Lattice,
    Greedy,
    Brute,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProfileArg {
    Star,
    Maximal,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    /// Grid file, or CSV atoms (`.csv`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 1.0], help = BOUNDS_HELP)]
    pub bounds: Vec<f64>,
    #[arg(long, value_enum, default_value = "v")]
    pub space: Space,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Defaults to `p` (or 2 for `haar`).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    pub r0: f64,
    #[arg(long, value_enum, default_value = "lattice")]
    pub method: Method,
    /// Candidate balls per radius for `greedy` and `brute`.
    #[arg(long, default_value_t = 8)]
    pub seeds: usize,
    /// CSV `x[,y[,z]],r` of disjoint balls to evaluate instead of searching.
    #[arg(long)]
    pub balls: Option<PathBuf>,
    /// Smallest candidate radius for `brute`; the source resolution by default.
    #[arg(long)]
    pub min_radius: Option<f64>,
    #[arg(long, value_enum, default_value = "star")]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
}

fn norm(cli: &Cli, a: &NormArgs) -> Result<u8> {
    let src = load(&a.input, &a.bounds)?;
    let mut rep = new_report(cli, "norm");
    let (value, divergent, detail) = match a.space {
        Space::V => {
            let params = NormParams::new(a.p, a.q.unwrap_or(a.p), a.alpha, a.r0)?;
            if let Some(path) = &a.balls {
                let bc = read_balls(path, src.mass().dim())?;
                let e = packing::v_eval(src.mass(), &params, &Collection::Balls(bc))?;
                (e.lq_sum, false, json!({ "best": e }))
            } else {
                match a.method {
                    Method::Lattice => {
                        let v = packing::vnorm_lattice(
                            src.mass(),
                            &params,
                            &LatticeOptions::default(),
                        )?;
                        let cubes = v
                            .best
                            .centers
                            .iter()
                            .zip(&v.best.scales)
                            .map(|(c, &side)| Cube {
                                lower: c.iter().map(|x| x - side / 2.0).collect(),
                                side,
                            })
                            .collect();
                        let proj = packing::haar_projection_lp(
                            src.mass(),
                            a.p,
                            &Collection::Cubes(CubeCollection::new(cubes)?),
                        )?;
                        (
                            v.value,
                            v.divergent,
                            json!({ "best": v.best, "levels": v.levels, "haar_projection_lp": proj }),
                        )
                    }
                    Method::Greedy => {
                        let e = packing::vnorm_greedy(src.mass(), &params, a.seeds)?;
                        (e.lq_sum, false, json!({ "best": e }))
                    }
                    Method::Brute => {
                        let universe = packing::candidate_universe(
                            src.mass(),
                            a.r0,
                            a.seeds.max(1),
                            a.min_radius,
                        );
                        let e = packing::vnorm_bruteforce(src.mass(), &params, &universe)?;
                        (
                            e.lq_sum,
                            false,
                            json!({ "best": e, "universe": universe.len() }),
                        )
                    }
                }
            }
        }
        Space::Morrey => {
            let m = packing::morrey_norm(src.mass(), a.p, a.alpha, a.r0)?;
            (m.value, false, json!({ "ball": m.ball }))
        }
        Space::Lorentz => {
            let r = rearrange::rearrange(src.grid("lorentz")?)?;
            let profile = match a.profile {
                ProfileArg::Star => Profile::Star,
                ProfileArg::Maximal => Profile::Maximal,
            };
            let v = rearrange::lorentz_zygmund_norm(&r, a.p, a.q.unwrap_or(a.p), a.alpha, profile)?;
            (v.value, v.divergent, json!({ "profile": profile }))
        }
        Space::Haar => {
            let d = wavelet::haar_decompose(src.grid("haar")?, None)?;
            let bp = wavelet::BesovParams {
                s: a.s,
                r: a.q.unwrap_or(2.0),
                eta: a.eta,
            };
            (
                wavelet::besov_norm(&d, &bp)?,
                false,
                json!({ "params": bp }),
            )
        }
    };
    println!("{value}{}", if divergent { " (divergent)" } else { "" });
    rep.data = json!({
        "space": format!("{:?}", a.space).to_lowercase(),
        "value": value,
        "divergent": divergent,
        "detail": detail,
    });
    finish(cli, rep)
}

#[derive(Args, Debug)]
pub struct LadderArgs {
    /// Scalar grid file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    pub r0: f64,
    /// Candidate balls per radius for the greedy packing in the ball Hölder check.
    #[arg(long, default_value_t = 8)]
    pub seeds: usize,
}

const REL: f64 = 1e-9;

fn ladder(cli: &Cli, a: &LadderArgs) -> Result<u8> {
    let f =
        io::read_grid(&a.input).with_context(|| format!("reading grid {}", a.input.display()))?;
    let lad = packing::ladder_report(&f, a.p, a.alpha, a.r0, &LatticeOptions::default())?;
    let mut rep = new_report(cli, "ladder");
    // entries: L^{pp}, the V rungs in increasing q ending at q = ∞, L^{p∞}, M
    let v: Vec<_> = lad
        .entries
        .iter()
        .filter(|e| e.space.starts_with("V^"))
        .collect();
    let qs: Vec<f64> = v
        .iter()
        .map(|e| {
            let q = e.space.trim_start_matches("V^{p ").trim_end_matches(",a}");
            if q == "inf" {
                f64::INFINITY
            } else {
                q.parse().unwrap_or(f64::NAN)
            }
        })
        .collect();
    let (vpp, vinf) = (v[0], v[v.len() - 1]);
    const HOLDER: &str = "Hölder bound by the L^p norm";
    if a.alpha == 0.0 && !vpp.divergent {
        let lp = f.lp_pow(a.p).powf(1.0 / a.p);
        rep.records
            .push(Record::le("holder", HOLDER, vpp.value, lp, REL * lp));
    } else {
        rep.records.push(Record::not_applicable("holder", HOLDER));
    }
    // Jensen on the balls of a greedy packing, for any α
    let greedy = packing::vnorm_greedy(&f, &NormParams::new(a.p, a.p, 0.0, a.r0)?, a.seeds)?;
    let balls = greedy
        .centers
        .iter()
        .zip(&greedy.scales)
        .map(|(c, &r)| Ball::new(c.clone(), r))
        .collect::<regladder::Result<Vec<_>>>()?;
    let (lhs, rhs) = packing::holder_sides(&f, a.p, &BallCollection::new(balls)?)?;
    rep.records.push(Record::le(
        "holder on greedy balls",
        HOLDER,
        lhs,
        rhs,
        REL * rhs,
    ));
    const INTERP: &str = "interpolation between q = p and q = infinity";
    for (e, &q) in v.iter().zip(&qs).skip(1).take(v.len().saturating_sub(2)) {
        let name = format!("interpolation q={q}");
        if v.iter().any(|e| e.divergent) {
            rep.records.push(Record::not_applicable(&name, INTERP));
        } else {
            let rhs = vpp.value.powf(a.p / q) * vinf.value.powf(1.0 - a.p / q);
            rep.records
                .push(Record::le(&name, INTERP, e.value, rhs, REL * rhs));
        }
    }
    for (w, q) in v.windows(2).zip(qs.windows(2)) {
        let name = format!("ordering q={} vs q={}", q[1], q[0]);
        rep.records.push(Record::le(
            &name,
            "ordering of the ladder in q",
            w[1].value,
            w[0].value,
            1e-12 * w[0].value,
        ));
    }
    rep.data = serde_json::to_value(&lad)?;
    finish(cli, rep)
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

fn embed(cli: &Cli, a: &EmbedArgs) -> Result<u8> {
    let v = wavelet::embedding_verdict(a.p, a.q, a.alpha, a.s, a.eta, a.dim)?;
    println!("{:?}", v.verdict);
    let mut rep = new_report(cli, "embed");
    rep.data = serde_json::to_value(&v)?;
    finish(cli, rep)
}

#[derive(Args, Debug)]
pub struct WaveletArgs {
    /// Scalar grid file with `2^k` cells per axis.
    #[arg(long)]
    pub input: PathBuf,
    /// Detail levels; all by default.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
}

fn wavelet_cmd(cli: &Cli, a: &WaveletArgs) -> Result<u8> {
    let f =
        io::read_grid(&a.input).with_context(|| format!("reading grid {}", a.input.display()))?;
    let d = wavelet::haar_decompose(&f, a.levels)?;
    let decay = wavelet::decay_check(&d, a.p, a.alpha)?;
    let mut rep = new_report(cli, "wavelet");
    let rows: Vec<Vec<f64>> = decay
        .levels
        .iter()
        .map(|l| vec![l.k, l.energy, l.bound, l.ratio])
        .collect();
    let table = "wavelet_levels.csv";
    write_csv(
        &out_dir(cli)?.join(table),
        &["k", "energy", "bound", "ratio"],
        &rows,
    )?;
    rep.series.push(table.into());
    let l2 = f.lp_pow(2.0);
    let gap = (d.total_energy() - l2).abs();
    rep.records.push(Record::le(
        "parseval",
        "Haar Parseval identity",
        gap,
        0.0,
        1e-9 * l2,
    ));
    rep.data = json!({
        "l2_squared": l2,
        "coefficient_energy": d.total_energy(),
        "max_ratio": decay.max_ratio,
        "slope": decay.slope,
        "bound_slope": decay.bound_slope,
        "hneg1_upper": wavelet::hneg1_upper(&d),
        "tail_exponent": wavelet::tail_exponent(&d),
    });
    finish(cli, rep)
}

#[derive(Args, Debug)]
pub struct Sim2dArgs {
    /// CSV atoms `x,y,w[,delta]` with positive blob radius.
    #[arg(long)]
    pub atoms: PathBuf,
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-2.0, 2.0], help = "Box `lo,hi`; also the blow-up guard")]
    pub bounds: Vec<f64>,
    /// Patch radius; overrides the file's `delta` column.
    #[arg(long)]
    pub blob: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Steps between recorded snapshots.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Dyadic level of the lattice partition used for the energy split.
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long, default_value_t = 0.25)]
    pub r0: f64,
    /// Scales δ at which the near-diagonal quadratic term is checked on the final state.
    #[arg(long, value_delimiter = ',')]
    pub jdelta: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub jdelta_alpha: f64,
    /// Test function: 1 on the disk of this radius about the origin...
    #[arg(long, default_value_t = 0.5)]
    pub plateau: f64,
    /// ...and 0 outside this one.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

const SPLIT: &str = "pseudo-energy split into self-induced and interaction parts";
const CHAIN2D: &str = "one-signed V-bound chain from energy and moments";
const JDELTA: &str = "near-diagonal quadratic term bound and log decay";

fn sim2d(cli: &Cli, a: &Sim2dArgs) -> Result<u8> {
    ensure!(a.dt > 0.0 && a.t_end >= 0.0, "need dt > 0 and t-end >= 0");
    let mut mu = read_atoms_file(&a.atoms, &a.bounds)?;
    ensure!(
        mu.domain().dim() == 2,
        "sim2d needs planar atoms, got dimension {}",
        mu.domain().dim()
    );
    if let Some(b) = a.blob {
        mu = mu.with_blob(b)?;
    }
    let state = VortexState2D::from_measure(mu, 0.0)?;
    let dir = out_dir(cli)?.join("snapshots");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let params = NormParams::new(1.0, 2.0, 0.5, a.r0)?;
    let steps = (a.t_end / a.dt).round() as usize;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut failure: Option<anyhow::Error> = None;
    let last = euler2d::evolve(&state, a.dt, steps, a.stride, |s| {
        if failure.is_some() {
            return;
        }
        let snap = || -> Result<(Vec<f64>, String)> {
            let h = euler2d::pseudo_energy(s, EnergyMode::WithSelf)?;
            let part = euler2d::energy_partition(s, &euler2d::lattice_geometry(s, a.level))?;
            let (i0, i2) = euler2d::moments(s);
            let v = packing::vnorm_lattice(s.measure(), &params, &LatticeOptions::default())?.value;
            let name = format!("snapshots/snap_{:06}.csv", rows.len());
            let file = fs::File::create(cli.out.join(&name))
                .with_context(|| format!("creating {name}"))?;
            io::write_atoms(file, s.measure())?;
            Ok((vec![s.t, h, part.h_si, part.h_ie, i0, i2, v], name))
        };
        match snap() {
            Ok((row, name)) => {
                rows.push(row);
                series.push(name);
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut rep = new_report(cli, "sim2d");
    write_csv(
        &cli.out.join("series.csv"),
        &["t", "H", "H_si", "H_ie", "I0", "I2", "V"],
        &rows,
    )?;
    rep.series.push("series.csv".into());
    rep.series.extend(series);

    let names = [
        "self-induced lower bound",
        "interaction bound",
        "V-bound from energy and moments",
    ];
    let chain = if last.circulations().iter().all(|&g| g >= 0.0) {
        Some(euler2d::one_signed_chain(
            &last,
            &euler2d::lattice_geometry(&last, a.level),
            a.r0,
        )?)
    } else {
        None
    };
    match &chain {
        Some(l) => {
            let p = &l.partition;
            let tol = 1e-12 * (p.h_si.abs() + p.h_ie.abs() + l.ie_bound).max(1e-300);
            rep.records
                .push(Record::le(names[0], SPLIT, l.si_lower, p.h_si, tol));
            rep.records
                .push(Record::le(names[1], SPLIT, -p.h_ie, l.ie_bound, tol));
            let lhs = l.v_norm * l.v_norm / (2.0 * std::f64::consts::PI);
            rep.records.push(Record::le(
                names[2],
                CHAIN2D,
                lhs,
                p.h_total + l.ie_bound,
                tol,
            ));
        }
        None => rep
            .records
            .extend(names.iter().map(|n| Record::not_applicable(n, CHAIN2D))),
    }

    let phi = TestFunction2D::bump([0.0, 0.0], a.plateau, a.radius)?;
    let mut splits = Vec::new();
    for &d in &a.jdelta {
        let s = euler2d::jdelta_split(
            last.measure(),
            &phi,
            1.0,
            d,
            a.jdelta_alpha,
            &euler2d::standard_cutoff,
        )?;
        let name = format!("near-diagonal bound delta={d}");
        rep.records.push(Record::le(
            &name,
            JDELTA,
            s.j_delta.abs(),
            s.j_bound,
            1e-12 * s.j_bound,
        ));
        splits.push(s);
    }
    rep.data = json!({
        "steps": steps,
        "final_time": last.t,
        "one_signed_chain": chain,
        "jdelta": splits,
    });
    finish(cli, rep)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DmjProfileArg {
    /// Smooth bump vorticity supported in the unit disk.
    Bump,
}

#[derive(Args, Debug)]
pub struct DmjArgs {
    /// Decreasing core sizes ε.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0625, 0.015625])]
    pub eps_list: Vec<f64>,
    #[arg(long, value_enum, default_value = "bump")]
    pub profile: DmjProfileArg,
    /// Grid cells per axis.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, 1.0], help = "Square box `lo,hi`")]
    pub bounds: Vec<f64>,
    /// Test function plateau radius about the origin.
    #[arg(long, default_value_t = 0.5)]
    pub plateau: f64,
    /// Test function support radius.
    #[arg(long, default_value_t = 0.9)]
    pub radius: f64,
    /// Radius of the disk on which the reduced defect is measured.
    #[arg(long, default_value_t = 0.25)]
    pub defect_radius: f64,
}

fn dmj(cli: &Cli, a: &DmjArgs) -> Result<u8> {
    let profile = match a.profile {
        DmjProfileArg::Bump => DmjProfile::bump(),
    };
    let (lo, hi) = bounds(&a.bounds)?;
    let domain = Domain::cube(2, lo, hi)?;
    let phi = TestFunction2D::bump([0.0, 0.0], a.plateau, a.radius)?;
    let rows = euler2d::concentration_check(&profile, &phi, &a.eps_list, &domain, a.n)?;
    let mut rep = new_report(cli, "dmj");
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.eps, r.d11, r.d22, r.d12, r.limit])
        .collect();
    write_csv(
        &out_dir(cli)?.join("concentration.csv"),
        &["eps", "d11", "d22", "d12", "limit"],
        &table,
    )?;
    rep.series.push("concentration.csv".into());

    let seq = a
        .eps_list
        .iter()
        .map(|&e| DmjFamily::new(&profile, e)?.velocity_grid(domain.clone(), a.n))
        .collect::<regladder::Result<Vec<_>>>()?;
    let limit = GridField::zeros(domain.clone(), vec![a.n, a.n], 2)?;
    let mask: Vec<bool> = (0..limit.num_cells())
        .map(|c| {
            let x = limit.cell_center(c);
            x[0] * x[0] + x[1] * x[1] < a.defect_radius * a.defect_radius
        })
        .collect();
    let defect = euler2d::reduced_defect(&seq, &limit, &mask)?;
    let psi = TimeProfile {
        plateau: 0.5,
        end: 1.0,
    };
    let residuals = a
        .eps_list
        .iter()
        .zip(&seq)
        .map(|(&eps, u)| {
            let snaps: Vec<(f64, GridField)> =
                [0.0, 0.5, 1.0].iter().map(|&t| (t, u.clone())).collect();
            let w = euler2d::weak_residual(&snaps, &phi, &psi)?;
            Ok(json!({ "eps": eps, "residual": w.residual, "scale": w.scale }))
        })
        .collect::<Result<Vec<_>>>()?;
    rep.data = json!({
        "gamma_inf": profile.gamma_inf(),
        "rows": rows,
        "reduced_defect": defect,
        "weak_residual": residuals,
    });
    finish(cli, rep)
}

#[derive(Args, Debug)]
pub struct Sim3dArgs {
    /// Three-component vorticity grid with cubic cells.
    #[arg(long, conflicts_with = "atoms", required_unless_present = "atoms")]
    pub input: Option<PathBuf>,
    /// CSV atoms `x,y,z,w...`: compare the packing norm with Morrey norm times packing measure.
    #[arg(long)]
    pub atoms: Option<PathBuf>,
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 1.0], help = BOUNDS_HELP)]
    pub bounds: Vec<f64>,
    /// Near-range cutoff δ.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Height K0 above which the vorticity counts as unbounded.
    #[arg(long, default_value_t = 1.0)]
    pub k0: f64,
    /// Largest admissible alignment defect θ.
    #[arg(long, default_value_t = 0.9)]
    pub theta_max: f64,
    /// Energy bound H0; the measured energy by default.
    #[arg(long)]
    pub h0: Option<f64>,
    /// Cells per axis of the support mask for atom inputs.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub r0: f64,
}

fn chain_anchor(link: &str) -> &'static str {
    match link {
        "alignment" => "local alignment of the vorticity direction",
        "near_le_twice_energy" | "bounded_part" => "near/far split of the Coulomb energy",
        "positive_form" => "Fourier form of the near energy",
        "split_identity" => "height split of the vorticity",
        "cauchy_schwarz" => "weighted Cauchy-Schwarz for the near energy",
        "ball_lower_bound" => "lower bound scales with one minus the squared defect",
        _ => "energy bound on the packing norm of the unbounded part",
    }
}

const MORREY_V: &str = "packing norm bounded by packing measure times Morrey norm";

fn sim3d(cli: &Cli, a: &Sim3dArgs) -> Result<u8> {
    let mut rep = new_report(cli, "sim3d");
    if let Some(path) = &a.atoms {
        let mu = read_atoms_file(path, &a.bounds)?;
        ensure!(mu.domain().dim() == 3, "sim3d atoms need x,y,z columns");
        let mut mask = GridField::zeros(mu.domain().clone(), vec![a.n; 3], 1)?;
        for atom in mu.atoms() {
            let idx: Vec<usize> = (0..3)
                .map(|k| {
                    let t = (atom.position[k] - mask.domain().lower()[k]) / mask.spacing(k);
                    (t.floor().max(0.0) as usize).min(a.n - 1)
                })
                .collect();
            let c = mask.linear_index(&idx);
            mask.data_mut()[c] = 1.0;
        }
        let m = euler3d::morrey_vs_v_check(&mu, &mask, a.r0)?;
        let tol = 1e-12 * m.same_collection_bound.abs().max(1e-300);
        rep.records.push(Record::le(
            "same collection",
            MORREY_V,
            m.v_norm_sq,
            m.same_collection_bound,
            tol,
        ));
        if m.applicable {
            let tol = 1e-12 * m.packing_bound.abs().max(1e-300);
            rep.records.push(Record::le(
                "packing measure",
                MORREY_V,
                m.v_norm_sq,
                m.packing_bound,
                tol,
            ));
        } else {
            rep.records
                .push(Record::not_applicable("packing measure", MORREY_V));
        }
        rep.data = serde_json::to_value(&m)?;
        return finish(cli, rep);
    }
    let path = a.input.as_ref().expect("clap requires --input or --atoms");
    let field = io::read_grid(path).with_context(|| format!("reading grid {}", path.display()))?;
    let omega = Vorticity3D::new(field)?;
    let params = AlignmentParams::new(a.delta, a.theta_max, a.k0)?;
    let chain = euler3d::bound_chain(&omega, &params, a.h0)?;
    for l in &chain.links {
        rep.records.push(Record::le(
            &l.name,
            chain_anchor(&l.name),
            l.lhs,
            l.rhs,
            l.tol,
        ));
    }
    rep.data = serde_json::to_value(&chain)?;
    finish(cli, rep)
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// A report written by another command; without it the coverage matrix is printed.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

fn report(a: &ReportArgs) -> Result<u8> {
    let Some(path) = &a.input else {
        print!("{}", matrix::coverage_matrix());
        return Ok(0);
    };
    let rep = Report::read(path)?;
    for r in &rep.records {
        let status = match (r.derive(), r.pass == r.derive()) {
            (_, false) => "INCONSISTENT",
            (Some(true), _) => "PASS",
            (Some(false), _) => "FAIL",
            (None, _) => "N/A",
        };
        println!("{status} {} [{}]", r.name, r.anchor);
    }
    let (failed, bad) = (rep.failures(), rep.inconsistent());
    println!(
        "{}: {} checks, {failed} failed, {bad} inconsistent",
        rep.metadata.command,
        rep.records.len()
    );
    Ok(u8::from(failed + bad > 0))
}
