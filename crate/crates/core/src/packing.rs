//! Packing norms `V^{pq}(log V)^α`: exact evaluation on a given disjoint
//! collection, lattice and greedy lower bounds for the supremum, an exhaustive
//! oracle on small candidate sets, Morrey norms and the packing pre-measure.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{GridField, MassSource};
use crate::geometry::{dist, Ball, BallCollection, CubeCollection, Domain, DyadicCubeCover};
use crate::rearrange::{self, Profile};

/// Largest candidate universe accepted by [`vnorm_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 24;

/// Sources without an intrinsic scale (point atoms) are probed down to `R_0 * 2^-POINT_DEPTH`.
pub const POINT_DEPTH: i32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub r0: f64,
}

impl NormParams {
    pub fn new(p: f64, q: f64, alpha: f64, r0: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(param("p", format!("need 1 <= p < inf, got {p}")));
        }
        if !(q >= p) {
            return Err(param("q", format!("need q >= p, got q = {q}, p = {p}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(param("alpha", format!("need alpha >= 0, got {alpha}")));
        }
        if !(r0 > 0.0 && r0 < 0.5) {
            return Err(param("r0", format!("need 0 < R_0 < 1/2, got {r0}")));
        }
        Ok(Self { p, q, alpha, r0 })
    }

    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.p, q, self.alpha, self.r0)
    }

    /// `p' = p/(p-1)`, infinite for `p = 1`.
    pub fn p_conj(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// `N/p' = N(1 - 1/p)`.
    pub fn radius_exponent(&self, dim: usize) -> f64 {
        dim as f64 * (1.0 - 1.0 / self.p)
    }

    /// `R^{-N/p'} |log R|^α`.
    pub fn weight(&self, r: f64, dim: usize) -> f64 {
        let w = r.powf(-self.radius_exponent(dim));
        if self.alpha == 0.0 {
            w
        } else {
            w * r.ln().abs().powf(self.alpha)
        }
    }

    pub fn lq(&self, terms: &[f64]) -> f64 {
        lq_norm(terms, self.q)
    }
}

/// `ℓ^q` norm of a nonnegative vector, scaled by its maximum to avoid overflow.
pub fn lq_norm(terms: &[f64], q: f64) -> f64 {
    let m = terms.iter().fold(0.0_f64, |a, &t| a.max(t));
    if m == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return m;
    }
    m * terms
        .iter()
        .map(|t| (t / m).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// A disjoint family to evaluate on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Collection {
    Balls(BallCollection),
    Lattice(DyadicCubeCover),
    Cubes(CubeCollection),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PackingEvaluation {
    pub centers: Vec<Vec<f64>>,
    /// Ball radius or cube side.
    pub scales: Vec<f64>,
    pub masses: Vec<f64>,
    pub terms: Vec<f64>,
    pub lq_sum: f64,
}

impl PackingEvaluation {
    fn build(
        params: &NormParams,
        dim: usize,
        centers: Vec<Vec<f64>>,
        scales: Vec<f64>,
        masses: Vec<f64>,
    ) -> Self {
        let terms: Vec<f64> = scales
            .iter()
            .zip(&masses)
            .map(|(&r, &m)| {
                if m == 0.0 {
                    0.0
                } else {
                    params.weight(r, dim) * m
                }
            })
            .collect();
        let lq_sum = params.lq(&terms);
        Self {
            centers,
            scales,
            masses,
            terms,
            lq_sum,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `‖t‖_q ≤ ‖t‖_p^{p/q} ‖t‖_∞^{1-p/q}` on this term vector.
    pub fn interpolation_holds(&self, p: f64, q: f64) -> bool {
        let lhs = lq_norm(&self.terms, q);
        let theta = if q.is_infinite() { 0.0 } else { p / q };
        let rhs = lq_norm(&self.terms, p).powf(theta)
            * lq_norm(&self.terms, f64::INFINITY).powf(1.0 - theta);
        lhs <= rhs * (1.0 + 1e-12) + 1e-300
    }
}

struct Pieces {
    centers: Vec<Vec<f64>>,
    scales: Vec<f64>,
    masses: Vec<f64>,
    volumes: Vec<f64>,
}

fn check_scale(s: f64, r0: f64) -> Result<()> {
    if s > r0 * (1.0 + 1e-12) {
        return Err(param("collection", format!("scale {s} exceeds R_0 = {r0}")));
    }
    Ok(())
}

fn pieces(src: &dyn MassSource, collection: &Collection) -> Result<Pieces> {
    let dim = src.dim();
    let mut out = Pieces {
        centers: Vec::new(),
        scales: Vec::new(),
        masses: Vec::new(),
        volumes: Vec::new(),
    };
    match collection {
        Collection::Balls(bc) => {
            for b in bc.balls() {
                if b.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: b.dim(),
                    });
                }
                out.masses.push(src.ball_mass(b)?);
                out.centers.push(b.center.clone());
                out.scales.push(b.radius);
                out.volumes.push(b.volume());
            }
        }
        Collection::Lattice(cover) => {
            if cover.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: cover.dim(),
                });
            }
            let side = cover.side();
            for (idx, m) in src.cell_masses(cover) {
                let c = cover.cell(&idx);
                out.centers
                    .push(c.lower.iter().map(|l| l + 0.5 * side).collect());
                out.scales.push(side);
                out.masses.push(m);
                out.volumes.push(c.volume());
            }
        }
        Collection::Cubes(cc) => {
            for c in cc.cubes() {
                if c.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: c.dim(),
                    });
                }
                out.centers
                    .push(c.lower.iter().map(|l| l + 0.5 * c.side).collect());
                out.scales.push(c.side);
                out.masses.push(src.cube_mass(c));
                out.volumes.push(c.volume());
            }
        }
    }
    Ok(out)
}

/// Exact `ℓ^q` sum of `R_j^{-N/p'}|log R_j|^α |μ|(B_j)` over one disjoint collection.
pub fn v_eval(
    src: &dyn MassSource,
    params: &NormParams,
    collection: &Collection,
) -> Result<PackingEvaluation> {
    let pc = pieces(src, collection)?;
    for &s in &pc.scales {
        check_scale(s, params.r0)?;
    }
    if let Collection::Lattice(c) = collection {
        check_scale(c.side(), params.r0)?;
    }
    Ok(PackingEvaluation::build(
        params,
        src.dim(),
        pc.centers,
        pc.scales,
        pc.masses,
    ))
}

/// `‖Pf‖_{L^p}` with `Pf = Σ_j (mass_j/|B_j|) χ_{B_j}`.
pub fn haar_projection_lp(src: &dyn MassSource, p: f64, collection: &Collection) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(param("p", format!("need 1 <= p < inf, got {p}")));
    }
    let pc = pieces(src, collection)?;
    let s: f64 = pc
        .masses
        .iter()
        .zip(&pc.volumes)
        .map(|(m, v)| v * (m / v).powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

fn smallest_scale(src: &dyn MassSource, r0: f64) -> f64 {
    let r = src.resolution();
    if r > 0.0 {
        r
    } else {
        r0 * 2f64.powi(-POINT_DEPTH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeOptions {
    /// Finest cube side; defaults to the source resolution.
    pub min_side: Option<f64>,
    /// Shifts per axis (`2` gives the `2^N` half-shifted lattices).
    pub shifts_per_axis: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self {
            min_side: None,
            shifts_per_axis: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeLevel {
    pub level: u32,
    pub side: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeNorm {
    pub value: f64,
    pub best: PackingEvaluation,
    pub levels: Vec<LatticeLevel>,
    pub divergent: bool,
}

/// Cell masses of every shifted cover between `R_0` and the finest side.
pub struct LatticeMasses {
    dim: usize,
    covers: Vec<(DyadicCubeCover, Vec<(Vec<f64>, f64)>)>,
}

impl LatticeMasses {
    pub fn compute(src: &dyn MassSource, r0: f64, opts: &LatticeOptions) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 0.5) {
            return Err(param("r0", format!("need 0 < R_0 < 1/2, got {r0}")));
        }
        if opts.shifts_per_axis == 0 {
            return Err(param("shifts_per_axis", "must be at least 1"));
        }
        let domain = src.domain();
        let min_side = opts.min_side.unwrap_or_else(|| smallest_scale(src, r0));
        let root = domain.max_extent();
        let mut level = 0u32;
        while root * 2f64.powi(-(level as i32)) > r0 * (1.0 + 1e-12) {
            level += 1;
        }
        let mut covers = Vec::new();
        let n = domain.dim();
        let s = opts.shifts_per_axis;
        while root * 2f64.powi(-(level as i32)) >= min_side * (1.0 - 1e-9) {
            for mask in 0..s.pow(n as u32) {
                let mut m = mask;
                let shift: Vec<f64> = (0..n)
                    .map(|_| {
                        let j = m % s;
                        m /= s;
                        j as f64 / s as f64
                    })
                    .collect();
                covers.push(DyadicCubeCover::new(domain, level, shift)?);
            }
            level += 1;
        }
        let covers = covers
            .into_par_iter()
            .map(|c| {
                let side = c.side();
                let cells = src
                    .cell_masses(&c)
                    .into_iter()
                    .map(|(idx, m)| {
                        let lo = c.cell(&idx).lower;
                        (lo.iter().map(|l| l + 0.5 * side).collect(), m)
                    })
                    .collect();
                (c, cells)
            })
            .collect();
        Ok(Self { dim: n, covers })
    }

    pub fn num_covers(&self) -> usize {
        self.covers.len()
    }

    /// Shift-maximized lattice value for `params`.
    pub fn norm(&self, params: &NormParams) -> LatticeNorm {
        let mut by_level: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
        let mut best: Option<(f64, usize)> = None;
        for (i, (cover, cells)) in self.covers.iter().enumerate() {
            let w = params.weight(cover.side(), self.dim);
            let terms: Vec<f64> = cells.iter().map(|(_, m)| w * m).collect();
            let v = params.lq(&terms);
            let e = by_level.entry(cover.level()).or_insert((cover.side(), 0.0));
            e.1 = e.1.max(v);
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, i));
            }
        }
        let levels: Vec<LatticeLevel> = by_level
            .into_iter()
            .map(|(level, (side, value))| LatticeLevel { level, side, value })
            .collect();
        let values: Vec<f64> = levels.iter().map(|l| l.value).collect();
        let best = match best {
            Some((_, i)) => {
                let (cover, cells) = &self.covers[i];
                PackingEvaluation::build(
                    params,
                    self.dim,
                    cells.iter().map(|(c, _)| c.clone()).collect(),
                    vec![cover.side(); cells.len()],
                    cells.iter().map(|(_, m)| *m).collect(),
                )
            }
            None => PackingEvaluation::default(),
        };
        LatticeNorm {
            value: best.lq_sum,
            divergent: divergence_flag(&values),
            best,
            levels,
        }
    }
}

/// Values ordered coarse to fine: the finest exceeds the middle by more than 5%
/// and the finer half never decreases.
pub fn divergence_flag(values: &[f64]) -> bool {
    let n = values.len();
    if n < 3 {
        return false;
    }
    let mid = values[n / 2];
    let last = values[n - 1];
    let rising = values[n / 2..]
        .windows(2)
        .all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    !last.is_finite() || (last > 1.05 * mid && rising)
}

/// Maximum of [`v_eval`] over all dyadic levels with side `<= R_0` and their shifted copies.
pub fn vnorm_lattice(
    src: &dyn MassSource,
    params: &NormParams,
    opts: &LatticeOptions,
) -> Result<LatticeNorm> {
    Ok(LatticeMasses::compute(src, params.r0, opts)?.norm(params))
}

struct Scored {
    balls: Vec<Ball>,
    masses: Vec<f64>,
    terms: Vec<f64>,
    conflicts: Vec<Vec<usize>>,
}

fn score(src: &dyn MassSource, params: &NormParams, universe: &[Ball]) -> Result<Scored> {
    let dim = src.dim();
    let mut masses = Vec::with_capacity(universe.len());
    let mut terms = Vec::with_capacity(universe.len());
    for b in universe {
        check_scale(b.radius, params.r0)?;
        let m = src.ball_mass(b)?;
        masses.push(m);
        terms.push(if m == 0.0 {
            0.0
        } else {
            params.weight(b.radius, dim) * m
        });
    }
    let conflicts = (0..universe.len())
        .into_par_iter()
        .map(|i| {
            (0..universe.len())
                .filter(|&j| j != i && !universe[i].disjoint(&universe[j]))
                .collect()
        })
        .collect();
    Ok(Scored {
        balls: universe.to_vec(),
        masses,
        terms,
        conflicts,
    })
}

impl Scored {
    fn evaluation(&self, params: &NormParams, dim: usize, sel: &[usize]) -> PackingEvaluation {
        PackingEvaluation::build(
            params,
            dim,
            sel.iter().map(|&i| self.balls[i].center.clone()).collect(),
            sel.iter().map(|&i| self.balls[i].radius).collect(),
            sel.iter().map(|&i| self.masses[i]).collect(),
        )
    }

    fn objective(&self, sel: &[bool], q: f64) -> f64 {
        let it = sel
            .iter()
            .zip(&self.terms)
            .filter(|(s, _)| **s)
            .map(|(_, t)| *t);
        if q.is_infinite() {
            it.fold(0.0, f64::max)
        } else {
            it.map(|t| t.powf(q)).sum()
        }
    }

    fn free(&self, sel: &[bool], i: usize) -> bool {
        self.conflicts[i].iter().all(|&j| !sel[j])
    }

    fn fill(&self, sel: &mut [bool], order: &[usize]) {
        for &i in order {
            if !sel[i] && self.terms[i] > 0.0 && self.free(sel, i) {
                sel[i] = true;
            }
        }
    }

    /// Insert one ball, evict its conflicts, refill; keep while the objective grows.
    fn local_search(&self, sel: &mut Vec<bool>, order: &[usize], q: f64) {
        let mut current = self.objective(sel, q);
        for _ in 0..64 {
            let mut improved = false;
            for &b in order {
                if sel[b] || self.terms[b] == 0.0 {
                    continue;
                }
                let mut cand = sel.clone();
                for &j in &self.conflicts[b] {
                    cand[j] = false;
                }
                cand[b] = true;
                self.fill(&mut cand, order);
                let v = self.objective(&cand, q);
                if v > current * (1.0 + 1e-12) {
                    *sel = cand;
                    current = v;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// Best-first disjoint selection from `universe`, refined by exchange moves.
pub fn greedy_select(
    src: &dyn MassSource,
    params: &NormParams,
    universe: &[Ball],
) -> Result<PackingEvaluation> {
    let sc = score(src, params, universe)?;
    let n = universe.len();
    let dim = src.dim();
    if n == 0 {
        return Ok(PackingEvaluation::default());
    }
    let mut by_term: Vec<usize> = (0..n).collect();
    by_term.sort_by(|&a, &b| sc.terms[b].total_cmp(&sc.terms[a]).then(a.cmp(&b)));
    if params.q.is_infinite() {
        return Ok(sc.evaluation(params, dim, &by_term[..1]));
    }
    let q = params.q;
    let mut by_degree = by_term.clone();
    let key = |i: usize| sc.terms[i].powf(q) / (1 + sc.conflicts[i].len()) as f64;
    by_degree.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let mut orders = vec![by_term.clone(), by_degree];
    let mut radii: Vec<f64> = universe.iter().map(|b| b.radius).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    for r in radii {
        let mut o: Vec<usize> = by_term
            .iter()
            .copied()
            .filter(|&i| universe[i].radius == r)
            .collect();
        o.extend(by_term.iter().copied().filter(|&i| universe[i].radius != r));
        orders.push(o);
    }
    let best = orders
        .par_iter()
        .map(|order| {
            let mut sel = vec![false; n];
            sc.fill(&mut sel, order);
            sc.local_search(&mut sel, &by_term, q);
            let v = sc.objective(&sel, q);
            (v, sel)
        })
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
        .unwrap();
    let chosen: Vec<usize> = (0..n).filter(|&i| best.1[i]).collect();
    Ok(sc.evaluation(params, dim, &chosen))
}

/// Multiscale candidate balls: at each radius `R_0 2^-m` the `seeds` heaviest
/// lattice cells, each seeding a ball at its mass centroid.
pub fn candidate_universe(
    src: &dyn MassSource,
    r0: f64,
    seeds: usize,
    min_radius: Option<f64>,
) -> Vec<Ball> {
    let domain = src.domain();
    let dim = domain.dim();
    let min_r = min_radius.unwrap_or_else(|| smallest_scale(src, r0));
    let pts: Vec<(Vec<f64>, f64)> = src
        .weighted_points()
        .into_iter()
        .map(|(x, w)| (x, w.iter().map(|v| v * v).sum::<f64>().sqrt()))
        .filter(|(_, m)| *m > 0.0)
        .collect();
    let min_extent = (0..dim)
        .map(|a| domain.extent(a))
        .fold(f64::INFINITY, f64::min);
    let mut out: Vec<Ball> = Vec::new();
    let mut r = r0;
    while r >= min_r * (1.0 - 1e-9) {
        if 2.0 * r <= min_extent {
            let cover = DyadicCubeCover::with_side(domain, r);
            let mut bins: HashMap<Vec<i64>, (f64, Vec<f64>)> = HashMap::new();
            for (x, m) in &pts {
                let e = bins
                    .entry(cover.cell_of(x))
                    .or_insert((0.0, vec![0.0; dim]));
                e.0 += m;
                for a in 0..dim {
                    e.1[a] += m * x[a];
                }
            }
            let mut cells: Vec<(Vec<i64>, f64, Vec<f64>)> =
                bins.into_iter().map(|(k, (m, s))| (k, m, s)).collect();
            cells.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            for (_, m, s) in cells.into_iter().take(seeds) {
                let center: Vec<f64> = (0..dim)
                    .map(|a| (s[a] / m).clamp(domain.lower()[a] + r, domain.upper()[a] - r))
                    .collect();
                let b = Ball { center, radius: r };
                if !out.contains(&b) {
                    out.push(b);
                }
            }
        }
        r *= 0.5;
    }
    out
}

/// Greedy lower bound on the packing-norm supremum.
pub fn vnorm_greedy(
    src: &dyn MassSource,
    params: &NormParams,
    seeds: usize,
) -> Result<PackingEvaluation> {
    let universe = candidate_universe(src, params.r0, seeds.max(1), None);
    greedy_select(src, params, &universe)
}

/// Exact maximum over all disjoint sub-collections of a small universe.
pub fn vnorm_bruteforce(
    src: &dyn MassSource,
    params: &NormParams,
    universe: &[Ball],
) -> Result<PackingEvaluation> {
    let n = universe.len();
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::UniverseTooLarge(n, BRUTEFORCE_LIMIT));
    }
    let sc = score(src, params, universe)?;
    let dim = src.dim();
    if n == 0 {
        return Ok(PackingEvaluation::default());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sc.terms[b].total_cmp(&sc.terms[a]).then(a.cmp(&b)));
    if params.q.is_infinite() {
        return Ok(sc.evaluation(params, dim, &order[..1]));
    }
    let tmax = sc.terms[order[0]];
    if tmax == 0.0 {
        return Ok(PackingEvaluation::default());
    }
    let w: Vec<f64> = order
        .iter()
        .map(|&i| (sc.terms[i] / tmax).powf(params.q))
        .collect();
    let mut pos = vec![0usize; n];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }
    let conf: Vec<u32> = order
        .iter()
        .map(|&i| sc.conflicts[i].iter().fold(0u32, |m, &j| m | 1 << pos[j]))
        .collect();
    let mut best = (0.0, 0u32);
    branch(0, 0, 0, 0.0, &w, &conf, &mut best);
    let chosen: Vec<usize> = (0..n)
        .filter(|&k| best.1 >> k & 1 == 1)
        .map(|k| order[k])
        .collect();
    Ok(sc.evaluation(params, dim, &chosen))
}

fn branch(
    i: usize,
    chosen: u32,
    blocked: u32,
    val: f64,
    w: &[f64],
    conf: &[u32],
    best: &mut (f64, u32),
) {
    if val > best.0 {
        *best = (val, chosen);
    }
    if i == w.len() {
        return;
    }
    let bound: f64 = val
        + (i..w.len())
            .filter(|&j| blocked >> j & 1 == 0)
            .map(|j| w[j])
            .sum::<f64>();
    if bound <= best.0 {
        return;
    }
    if blocked >> i & 1 == 0 {
        branch(
            i + 1,
            chosen | 1 << i,
            blocked | conf[i],
            val + w[i],
            w,
            conf,
            best,
        );
    }
    branch(i + 1, chosen, blocked, val, w, conf, best);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyValue {
    pub value: f64,
    pub ball: Option<Ball>,
}

/// Cap on probe centers per radius.
const MORREY_CENTER_CAP: usize = 1 << 14;

/// Radii `R_0 2^{-m/4}` down to the source resolution.
pub fn morrey_radii(src: &dyn MassSource, r0: f64) -> Vec<f64> {
    let floor = smallest_scale(src, r0);
    let mut out = Vec::new();
    let mut m = 0;
    loop {
        let r = r0 * 2f64.powf(-(m as f64) / 4.0);
        if r < floor * (1.0 - 1e-9) {
            break;
        }
        out.push(r);
        m += 1;
    }
    out
}

fn probe_centers(domain: &Domain, r: f64, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = domain.dim();
    let mut spacing = 0.5 * r;
    let counts = |s: f64| -> Vec<usize> {
        (0..dim)
            .map(|a| ((domain.extent(a) - 2.0 * r).max(0.0) / s).floor() as usize + 1)
            .collect()
    };
    while counts(spacing).iter().product::<usize>() > MORREY_CENTER_CAP {
        spacing *= 1.25;
    }
    let cnt = counts(spacing);
    let total: usize = cnt.iter().product();
    let mut out = Vec::with_capacity(total + extra.len());
    for k in 0..total {
        let mut rem = k;
        let c: Vec<f64> = (0..dim)
            .map(|a| {
                let j = rem % cnt[a];
                rem /= cnt[a];
                let lo = domain.lower()[a] + r;
                let hi = domain.upper()[a] - r;
                if cnt[a] == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * j as f64 / (cnt[a] - 1) as f64
                }
            })
            .collect();
        out.push(c);
    }
    for x in extra {
        out.push(
            (0..dim)
                .map(|a| x[a].clamp(domain.lower()[a] + r, domain.upper()[a] - r))
                .collect(),
        );
    }
    out
}

/// `sup_B R^{-N/p'} |log R|^α |μ|(B)` over a center lattice and radius ladder.
pub fn morrey_norm(src: &dyn MassSource, p: f64, alpha: f64, r0: f64) -> Result<MorreyValue> {
    let params = NormParams::new(p, f64::INFINITY, alpha, r0)?;
    let domain = src.domain();
    let dim = domain.dim();
    let min_extent = (0..dim)
        .map(|a| domain.extent(a))
        .fold(f64::INFINITY, f64::min);
    let pts = src.weighted_points();
    let extra: Vec<Vec<f64>> = if pts.len() <= 1024 {
        pts.into_iter().map(|(x, _)| x).collect()
    } else {
        Vec::new()
    };
    let radii: Vec<f64> = morrey_radii(src, r0)
        .into_iter()
        .filter(|r| 2.0 * r <= min_extent)
        .collect();
    let mut best = MorreyValue {
        value: 0.0,
        ball: None,
    };
    for r in radii {
        let w = params.weight(r, dim);
        let found = probe_centers(domain, r, &extra)
            .into_par_iter()
            .map(|c| {
                let b = Ball {
                    center: c,
                    radius: r,
                };
                let m = src.ball_mass(&b).unwrap_or(0.0);
                (w * m, b)
            })
            .reduce_with(|a, b| if b.0 > a.0 { b } else { a });
        if let Some((v, b)) = found {
            if v > best.value {
                best = MorreyValue {
                    value: v,
                    ball: Some(b),
                };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingMeasure {
    pub value: f64,
    /// `(R, Σ 2R)` per radius, coarse to fine.
    pub sums: Vec<(f64, f64)>,
    pub divergent: bool,
}

/// Greedy `sup Σ 2R_j` over disjoint balls centered on the support of `mask`.
pub fn packing_measure_estimate(mask: &GridField, radii: &[f64]) -> Result<PackingMeasure> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(param("radii", "must be positive"));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let centers: Vec<Vec<f64>> = (0..mask.num_cells())
        .filter(|&c| mask.magnitude(c) > 0.0)
        .map(|c| mask.cell_center(c))
        .collect();
    let dim = mask.domain().dim();
    let sums: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let cell = 2.0 * r;
            let key =
                |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / cell).floor() as i64).collect() };
            let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            let mut kept: Vec<&Vec<f64>> = Vec::new();
            'outer: for x in &centers {
                let k = key(x);
                for off in 0..3usize.pow(dim as u32) {
                    let mut o = off;
                    let nk: Vec<i64> = k
                        .iter()
                        .map(|v| {
                            let d = (o % 3) as i64 - 1;
                            o /= 3;
                            v + d
                        })
                        .collect();
                    if let Some(list) = grid.get(&nk) {
                        if list.iter().any(|&i| dist(kept[i], x) <= 2.0 * r) {
                            continue 'outer;
                        }
                    }
                }
                grid.entry(k).or_default().push(kept.len());
                kept.push(x);
            }
            (r, 2.0 * r * kept.len() as f64)
        })
        .collect();
    let values: Vec<f64> = sums.iter().map(|s| s.1).collect();
    Ok(PackingMeasure {
        value: values.iter().fold(0.0, |a: f64, &b| a.max(b)),
        divergent: divergence_flag(&values),
        sums,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Check {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub space: String,
    pub value: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub entries: Vec<LadderEntry>,
    /// `V^{pp} ≤ ‖f‖_{L^p}` (cube lattice, `α = 0`).
    pub holder: Check,
    /// `V^{pq} ≤ (V^{pp})^{p/q} (V^{p∞})^{1-p/q}`.
    pub interpolation: Check,
    /// `V^{pq}` nonincreasing in `q`.
    pub ordering: Check,
}

impl LadderReport {
    pub fn get(&self, space: &str) -> Option<&LadderEntry> {
        self.entries.iter().find(|e| e.space == space)
    }
}

fn verdict(ok: bool) -> Check {
    if ok {
        Check::Pass
    } else {
        Check::Fail
    }
}

/// The ladder `L^{pp,α}`, `V^{pq,α}` for `q ∈ {p, 2, 2p, ∞}`, `L^{p∞,α}`, `M^{p,α}` with consistency checks.
pub fn ladder_report(
    f: &GridField,
    p: f64,
    alpha: f64,
    r0: f64,
    opts: &LatticeOptions,
) -> Result<LadderReport> {
    f.require_scalar("ladder_report")?;
    let base = NormParams::new(p, p, alpha, r0)?;
    let r = rearrange::rearrange(f)?;
    let lpp = rearrange::lorentz_zygmund_norm(&r, p, p, alpha, Profile::Star)?;
    let lpinf = rearrange::lorentz_zygmund_norm(&r, p, f64::INFINITY, alpha, Profile::Star)?;
    let lattice = LatticeMasses::compute(f, r0, opts)?;
    let mut qs = vec![p];
    for q in [2.0, 2.0 * p] {
        if q > p && !qs.contains(&q) {
            qs.push(q);
        }
    }
    qs.sort_by(f64::total_cmp);
    qs.push(f64::INFINITY);
    let mut entries = vec![LadderEntry {
        space: "L^{pp,a}".into(),
        value: lpp.value,
        divergent: lpp.divergent,
    }];
    let mut vvals = Vec::new();
    for &q in &qs {
        let v = lattice.norm(&base.with_q(q)?);
        let name = if q.is_infinite() {
            "V^{p inf,a}".to_string()
        } else {
            format!("V^{{p {q},a}}")
        };
        entries.push(LadderEntry {
            space: name,
            value: v.value,
            divergent: v.divergent,
        });
        vvals.push((q, v.value, v.divergent));
    }
    entries.push(LadderEntry {
        space: "L^{p inf,a}".into(),
        value: lpinf.value,
        divergent: lpinf.divergent,
    });
    let m = morrey_norm(f, p, alpha, r0)?;
    entries.push(LadderEntry {
        space: "M^{p,a}".into(),
        value: m.value,
        divergent: false,
    });

    let vpp = vvals[0];
    let vinf = *vvals.last().unwrap();
    let holder = if alpha == 0.0 && !vpp.2 {
        verdict(vpp.1 <= f.lp_pow(p).powf(1.0 / p) * (1.0 + 1e-9) + 1e-300)
    } else {
        Check::NotApplicable
    };
    let interpolation = if vvals.iter().any(|v| v.2) {
        Check::NotApplicable
    } else {
        verdict(vvals[1..vvals.len() - 1].iter().all(|&(q, v, _)| {
            v <= vpp.1.powf(p / q) * vinf.1.powf(1.0 - p / q) * (1.0 + 1e-9) + 1e-300
        }))
    };
    let ordering = verdict(
        vvals
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12) + 1e-300),
    );
    Ok(LadderReport {
        entries,
        holder,
        interpolation,
        ordering,
    })
}

/// `Σ_j (R_j^{-N/p'} ∫_{B_j}|f|)^p` against `Σ_j (|B_j|/R_j^N)^{p-1} ∫_{B_j} |f|^p`.
///
/// `|B_j|` is the ball volume as seen by the same quadrature that integrates `f`
/// (exactly `ω_N R^N` in one and two dimensions), so the bound is Jensen's
/// inequality for the discretized balls.
pub fn holder_sides(f: &GridField, p: f64, balls: &BallCollection) -> Result<(f64, f64)> {
    f.require_scalar("holder_sides")?;
    let dim = f.domain().dim();
    let params = NormParams::new(p, p, 0.0, 0.5 - 1e-12)?;
    let fp = GridField::new(
        f.domain().clone(),
        f.shape().to_vec(),
        1,
        f.data().iter().map(|v| v.abs().powf(p)).collect(),
    )?;
    let ones = GridField::new(
        f.domain().clone(),
        f.shape().to_vec(),
        1,
        vec![1.0; f.num_cells()],
    )?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for b in balls.balls() {
        lhs += (params.weight(b.radius, dim) * f.ball_mass(b)?).powf(p);
        let vol = ones.ball_mass(b)?;
        rhs += (vol / b.radius.powi(dim as i32)).powf(p - 1.0) * fp.ball_mass(b)?;
    }
    Ok((lhs, rhs))
}
