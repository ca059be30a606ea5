//! Coulomb energy of 3D vorticity on a uniform grid, its split at an
//! interaction range, the Fourier-side evaluation of the near part, the local
//! alignment defect, the height split and the bound chain that ends in the
//! V^{6/5,2} estimate for the unbounded part.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{AtomicMeasure, GridField, MassSource};
use crate::geometry::Domain;
use crate::packing::{
    morrey_norm, packing_measure_estimate, vnorm_lattice, LatticeOptions, NormParams,
    PackingMeasure,
};
use crate::spectral::{fft_nd, wave_vector, C64};

/// `∬ 1/|x−y|` over the unit cube squared. A uniform cube of side `h` has
/// self-interaction `CUBE_SELF * h^5`.
pub const CUBE_SELF: f64 = 1.882_312_644_389_66;

/// Module-wide cap on ball radii; the chain also needs `R < δ/4`.
pub const DEFAULT_R0: f64 = 0.25;

/// Cell-averaged 3-vector vorticity on cubic cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vorticity3D {
    field: GridField,
}

impl Vorticity3D {
    pub fn new(field: GridField) -> Result<Self> {
        if field.domain().dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: field.domain().dim(),
            });
        }
        if field.ncomp() != 3 {
            return Err(param(
                "omega",
                format!("need 3 components, got {}", field.ncomp()),
            ));
        }
        let h = field.spacing(0);
        if (1..3).any(|a| (field.spacing(a) - h).abs() > 1e-12 * h) {
            return Err(param("omega", "cells must be cubes"));
        }
        Ok(Self { field })
    }

    /// Samples `f` at the centers of an `n^3` grid.
    pub fn from_fn(domain: Domain, n: usize, f: impl Fn(&[f64]) -> [f64; 3]) -> Result<Self> {
        Self::new(GridField::from_vec_fn(domain, vec![n; 3], 3, |x| {
            f(x).to_vec()
        })?)
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn into_field(self) -> GridField {
        self.field
    }

    pub fn spacing(&self) -> f64 {
        self.field.spacing(0)
    }

    pub fn shape(&self) -> [usize; 3] {
        let s = self.field.shape();
        [s[0], s[1], s[2]]
    }

    pub fn value(&self, c: usize) -> [f64; 3] {
        let v = self.field.value(c);
        [v[0], v[1], v[2]]
    }

    pub fn magnitude(&self, c: usize) -> f64 {
        self.field.magnitude(c)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.field.num_cells())
            .filter(|&c| self.magnitude(c) > 0.0)
            .collect()
    }

    pub fn support_volume(&self) -> f64 {
        self.support().len() as f64 * self.field.cell_volume()
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.field.num_cells())
            .map(|c| self.magnitude(c))
            .fold(0.0, f64::max)
    }

    /// `∫|ω|`.
    pub fn total_mass(&self) -> f64 {
        (0..self.field.num_cells())
            .map(|c| self.magnitude(c))
            .sum::<f64>()
            * self.field.cell_volume()
    }

    fn masked(&self, keep: impl Fn(f64) -> bool) -> Self {
        let mut g = self.field.clone();
        for c in 0..g.num_cells() {
            if !keep(self.magnitude(c)) {
                g.data_mut()[3 * c..3 * c + 3].fill(0.0);
            }
        }
        Self { field: g }
    }

    /// Max central-difference divergence relative to `max|ω|/h`; zero means
    /// divergence-free to grid accuracy. Diagnostic only.
    pub fn divergence_defect(&self) -> f64 {
        let [n0, n1, n2] = self.shape();
        let h = self.spacing();
        let at = |i: usize, j: usize, k: usize, a: usize| {
            self.field.data()[3 * ((i * n1 + j) * n2 + k) + a]
        };
        let mut worst = 0.0f64;
        for i in 1..n0.saturating_sub(1) {
            for j in 1..n1.saturating_sub(1) {
                for k in 1..n2.saturating_sub(1) {
                    let d = (at(i + 1, j, k, 0) - at(i - 1, j, k, 0) + at(i, j + 1, k, 1)
                        - at(i, j - 1, k, 1)
                        + at(i, j, k + 1, 2)
                        - at(i, j, k - 1, 2))
                        / (2.0 * h);
                    worst = worst.max(d.abs());
                }
            }
        }
        let scale = self.max_magnitude() / h;
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }

    /// `max_j sup_{x∈C_j} |ω(x) − avg_j ω|` over blocks of `block^3` cells.
    pub fn cell_constancy_defect(&self, block: usize) -> Result<f64> {
        if block == 0 {
            return Err(param("block", "must be positive"));
        }
        let [n0, n1, n2] = self.shape();
        let nb = [n0.div_ceil(block), n1.div_ceil(block), n2.div_ceil(block)];
        let mut sums = vec![([0.0f64; 3], 0usize); nb[0] * nb[1] * nb[2]];
        let key =
            |i: usize, j: usize, k: usize| ((i / block) * nb[1] + j / block) * nb[2] + k / block;
        let cells = || {
            (0..n0).flat_map(move |i| (0..n1).flat_map(move |j| (0..n2).map(move |k| (i, j, k))))
        };
        for (i, j, k) in cells() {
            let v = self.value((i * n1 + j) * n2 + k);
            let s = &mut sums[key(i, j, k)];
            for a in 0..3 {
                s.0[a] += v[a];
            }
            s.1 += 1;
        }
        let mut worst = 0.0f64;
        for (i, j, k) in cells() {
            let v = self.value((i * n1 + j) * n2 + k);
            let (s, cnt) = sums[key(i, j, k)];
            let d: f64 = (0..3).map(|a| (v[a] - s[a] / cnt as f64).powi(2)).sum();
            worst = worst.max(d.sqrt());
        }
        Ok(worst)
    }
}

/// Height split `ω = ω_− + ω_+` with `ω_+` carried where `|ω| > K_0`.
pub fn split_height(omega: &Vorticity3D, k0: f64) -> Result<(Vorticity3D, Vorticity3D)> {
    if !(k0 >= 0.0 && k0.is_finite()) {
        return Err(param("k0", format!("need K_0 >= 0, got {k0}")));
    }
    Ok((omega.masked(|m| m <= k0), omega.masked(|m| m > k0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    pub delta: f64,
    pub theta: f64,
    pub k0: f64,
}

impl AlignmentParams {
    pub fn new(delta: f64, theta: f64, k0: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(param("delta", format!("need delta > 0, got {delta}")));
        }
        if !(theta >= 0.0) {
            return Err(param("theta", format!("need theta >= 0, got {theta}")));
        }
        if theta >= 1.0 {
            return Err(Error::AlignmentDefect(theta));
        }
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(param("k0", format!("need K_0 > 0, got {k0}")));
        }
        Ok(Self { delta, theta, k0 })
    }
}

/// Share of a cell pair at center distance `d` that counts as within `delta`.
/// A hard cut on centers miscounts the shell of pairs straddling the sphere by
/// a few percent at `delta/h ≈ 6`; instead the pair is apportioned by the
/// triangular law of the offset between two uniform points of a cell, so the
/// weight ramps from 1 at `delta − h` to 0 at `delta + h`.
pub fn near_weight(d: f64, delta: f64, h: f64) -> f64 {
    let t = ((delta - d) / h).clamp(-1.0, 1.0);
    if t <= 0.0 {
        (1.0 + t) * (1.0 + t) / 2.0
    } else {
        1.0 - (1.0 - t) * (1.0 - t) / 2.0
    }
}

/// Cell-center offsets with positive near weight, each carrying
/// `weight * h^3 / |x−y|` (the cube self-term at zero offset).
fn stencil(h: f64, delta: f64) -> Vec<([i64; 3], f64)> {
    let r = ((delta + h) / h).ceil() as i64;
    let mut out = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            for k in -r..=r {
                let d = h * ((i * i + j * j + k * k) as f64).sqrt();
                let w = near_weight(d, delta, h);
                if w <= 0.0 {
                    continue;
                }
                let g = if d == 0.0 {
                    CUBE_SELF * h * h
                } else {
                    h * h * h / d
                };
                out.push(([i, j, k], w * g));
            }
        }
    }
    out
}

/// The cell-pair kernel on a doubled grid, transformed once, so each pair
/// sum becomes a product of transforms. `range = None` keeps every pair.
struct PairKernel {
    padded: [usize; 3],
    h: f64,
    symbol: Vec<f64>,
}

impl PairKernel {
    fn new(shape: [usize; 3], h: f64, range: Option<f64>) -> Self {
        let padded = [2 * shape[0], 2 * shape[1], 2 * shape[2]];
        let total = padded[0] * padded[1] * padded[2];
        let mut g = vec![C64::new(0.0, 0.0); total];
        let wrap = |k: usize, n: usize| {
            if k < n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            }
        };
        g.par_iter_mut().enumerate().for_each(|(lin, slot)| {
            let k = lin % padded[2];
            let j = (lin / padded[2]) % padded[1];
            let i = lin / (padded[1] * padded[2]);
            let off = [wrap(i, padded[0]), wrap(j, padded[1]), wrap(k, padded[2])];
            let d = h * (off[0] * off[0] + off[1] * off[1] + off[2] * off[2]).sqrt();
            let w = range.map_or(1.0, |r| near_weight(d, r, h));
            if w > 0.0 {
                *slot = C64::new(w * if d == 0.0 { CUBE_SELF / h } else { 1.0 / d }, 0.0);
            }
        });
        fft_nd(&mut g, &padded, false);
        Self {
            padded,
            h,
            symbol: g.into_iter().map(|z| z.re).collect(),
        }
    }

    fn transform(&self, omega: &Vorticity3D) -> [Vec<C64>; 3] {
        let shape = omega.shape();
        let p = self.padded;
        let build = |a: usize| {
            let mut out = vec![C64::new(0.0, 0.0); p[0] * p[1] * p[2]];
            for i in 0..shape[0] {
                for j in 0..shape[1] {
                    for k in 0..shape[2] {
                        let c = (i * shape[1] + j) * shape[2] + k;
                        out[(i * p[1] + j) * p[2] + k].re = omega.field.data()[3 * c + a];
                    }
                }
            }
            fft_nd(&mut out, &p, false);
            out
        };
        [build(0), build(1), build(2)]
    }

    /// `(1/8π) Σ_{c,c'} ⟨f_c, g_c'⟩ G(c−c') h^6`.
    fn pair(&self, f: &[Vec<C64>; 3], g: &[Vec<C64>; 3]) -> f64 {
        let total = self.symbol.len() as f64;
        let s: f64 = (0..3)
            .map(|a| {
                f[a].par_iter()
                    .zip(&g[a])
                    .zip(&self.symbol)
                    .map(|((x, y), s)| (x.conj() * y).re * s)
                    .sum::<f64>()
            })
            .sum();
        s * self.h.powi(6) / (8.0 * PI * total)
    }
}

/// `H = (1/8π) ∬ ⟨ω(x),ω(y)⟩/|x−y|` as a sum over cell pairs, cell centers for
/// distinct cells and the uniform-cube self-term on the diagonal.
pub fn coulomb_energy(omega: &Vorticity3D) -> f64 {
    let k = PairKernel::new(omega.shape(), omega.spacing(), None);
    let t = k.transform(omega);
    k.pair(&t, &t)
}

/// The same pair sum evaluated cell by cell; `O(n^2)` in the support size.
pub fn coulomb_energy_direct(omega: &Vorticity3D, range: Option<f64>) -> f64 {
    let sup = omega.support();
    let h = omega.spacing();
    let f = &omega.field;
    let s: f64 = sup
        .par_iter()
        .map(|&a| {
            let xa = f.cell_center(a);
            let va = omega.value(a);
            sup.iter()
                .map(|&b| {
                    let vb = omega.value(b);
                    let dot = va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2];
                    if a == b {
                        return dot * CUBE_SELF / h;
                    }
                    let xb = f.cell_center(b);
                    let d = ((xa[0] - xb[0]).powi(2)
                        + (xa[1] - xb[1]).powi(2)
                        + (xa[2] - xb[2]).powi(2))
                    .sqrt();
                    dot / d * range.map_or(1.0, |r| near_weight(d, r, h))
                })
                .sum::<f64>()
        })
        .sum();
    s * h.powi(6) / (8.0 * PI)
}

/// Bilinear near-range energy `(1/8π) ∬_{|x−y|≤δ} ⟨f(x),g(y)⟩/|x−y|`.
pub fn near_pair_energy(f: &Vorticity3D, g: &Vorticity3D, delta: f64) -> Result<f64> {
    if f.shape() != g.shape() || !f.field.same_grid(&g.field) {
        return Err(param("g", "fields must share a grid"));
    }
    check_range(f, delta)?;
    let k = PairKernel::new(f.shape(), f.spacing(), Some(delta));
    let tf = k.transform(f);
    if std::ptr::eq(f, g) {
        return Ok(k.pair(&tf, &tf));
    }
    Ok(k.pair(&tf, &k.transform(g)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPartition3D {
    pub delta: f64,
    pub h_total: f64,
    /// Pairs within `δ`, diagonal included, straddling pairs weighted by [`near_weight`].
    pub h_si: f64,
    pub h_ie: f64,
}

fn check_range(omega: &Vorticity3D, delta: f64) -> Result<()> {
    let h = omega.spacing();
    if !(delta >= h) || !delta.is_finite() {
        return Err(param(
            "delta",
            format!("need delta >= h = {h}, got {delta}"),
        ));
    }
    Ok(())
}

/// Split of the pair sum at distance `δ`.
pub fn partition_delta(omega: &Vorticity3D, delta: f64) -> Result<EnergyPartition3D> {
    let h_si = near_pair_energy(omega, omega, delta)?;
    let h_total = coulomb_energy(omega);
    Ok(EnergyPartition3D {
        delta,
        h_total,
        h_si,
        h_ie: h_total - h_si,
    })
}

/// `η(ξ) = (1 − cos(|ξ|δ))/|ξ|^2`, with its limit `δ^2/2` at the origin.
pub fn eta(xi: f64, delta: f64) -> f64 {
    let t = xi * delta;
    if t.abs() < 1e-2 {
        let t2 = t * t;
        delta * delta * (0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (1.0 - t.cos()) / (xi * xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralHsi {
    pub value: f64,
    /// `max η(ξ)|ξ|^2/2` over the sampled frequencies; at most 1.
    pub max_eta_ratio: f64,
    pub eta_violations: usize,
    pub padded: [usize; 3],
}

/// `H_si = (1/8π)(2π)^{-3} ∫ |ω̂(ξ)|^2 4π η(ξ) dξ`, with the transform taken on
/// a zero-padded box long enough that the range-`δ` kernel never wraps.
pub fn hsi_fourier(omega: &Vorticity3D, delta: f64) -> Result<SpectralHsi> {
    check_range(omega, delta)?;
    let h = omega.spacing();
    let shape = omega.shape();
    let mut padded = [0usize; 3];
    for a in 0..3 {
        let need = (shape[a] as f64 + delta / h).ceil() as usize + 1;
        padded[a] = (2 * shape[a]).max(need);
    }
    let lengths: Vec<f64> = padded.iter().map(|&m| m as f64 * h).collect();
    let total = padded[0] * padded[1] * padded[2];
    let mut power = vec![0.0f64; total];
    for a in 0..3 {
        let mut buf = vec![C64::new(0.0, 0.0); total];
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    let c = (i * shape[1] + j) * shape[2] + k;
                    buf[(i * padded[1] + j) * padded[2] + k].re = omega.field.data()[3 * c + a];
                }
            }
        }
        fft_nd(&mut buf, &padded, false);
        power
            .par_iter_mut()
            .zip(&buf)
            .for_each(|(p, z)| *p += z.norm_sqr());
    }
    let (sum, ratio, bad) = power
        .par_iter()
        .enumerate()
        .map(|(lin, &p)| {
            let xi = wave_vector(lin, &padded, &lengths);
            let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            let e = eta(r, delta);
            let ratio = if r > 0.0 { e * r * r / 2.0 } else { 0.0 };
            (p * e, ratio, usize::from(ratio > 1.0 + 1e-12))
        })
        .reduce(
            || (0.0, 0.0, 0),
            |a, b| (a.0 + b.0, a.1.max(b.1), a.2 + b.2),
        );
    let volume: f64 = lengths.iter().product();
    Ok(SpectralHsi {
        value: sum * h.powi(6) / (2.0 * volume),
        max_eta_ratio: ratio,
        eta_violations: bad,
        padded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// `max |ξ(x) − ξ(y)|/√2` over cells above `K_0` that interact at range `δ`
    /// (center distance below `δ + h`).
    pub theta: f64,
    pub cells_above: usize,
    pub pairs: usize,
    /// Pairs where `⟨ω(x),ω(y)⟩ < (1−θ^2)|ω(x)||ω(y)|` at the measured `θ`.
    pub violations: usize,
}

/// Local alignment defect of the direction field on the part above `K_0`.
pub fn alignment_measure(omega: &Vorticity3D, delta: f64, k0: f64) -> Result<AlignmentReport> {
    check_range(omega, delta)?;
    let [n0, n1, n2] = omega.shape();
    let above: Vec<usize> = (0..omega.field.num_cells())
        .filter(|&c| omega.magnitude(c) > k0)
        .collect();
    let mut slot = vec![u32::MAX; omega.field.num_cells()];
    for (i, &c) in above.iter().enumerate() {
        slot[c] = i as u32;
    }
    let dirs: Vec<[f64; 3]> = above
        .iter()
        .map(|&c| {
            let v = omega.value(c);
            let m = omega.magnitude(c);
            [v[0] / m, v[1] / m, v[2] / m]
        })
        .collect();
    // each unordered pair once: offsets that are lexicographically positive
    let offs: Vec<[i64; 3]> = stencil(omega.spacing(), delta)
        .into_iter()
        .map(|(o, _)| o)
        .filter(|o| *o > [0, 0, 0])
        .collect();
    let (offs, slot) = (&offs, &slot);
    let neighbours = move |c: usize| {
        let (i, j, k) = (
            (c / (n1 * n2)) as i64,
            ((c / n2) % n1) as i64,
            (c % n2) as i64,
        );
        offs.iter().filter_map(move |o| {
            let (a, b, d) = (i + o[0], j + o[1], k + o[2]);
            if a < 0 || b < 0 || d < 0 || a >= n0 as i64 || b >= n1 as i64 || d >= n2 as i64 {
                return None;
            }
            let s = slot[((a as usize) * n1 + b as usize) * n2 + d as usize];
            (s != u32::MAX).then_some(s as usize)
        })
    };
    let (gap2, pairs) = (0..above.len())
        .into_par_iter()
        .map(|p| {
            let u = dirs[p];
            neighbours(above[p]).fold((0.0f64, 0usize), |(g, n), q| {
                let v = dirs[q];
                let d2 = (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2);
                (g.max(d2), n + 1)
            })
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    let theta = (gap2 / 2.0).sqrt();
    let factor = 1.0 - theta * theta;
    let violations = (0..above.len())
        .into_par_iter()
        .map(|p| {
            let a = omega.value(above[p]);
            let ma = omega.magnitude(above[p]);
            neighbours(above[p])
                .filter(|&q| {
                    let b = omega.value(above[q]);
                    let mb = omega.magnitude(above[q]);
                    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                    dot < factor * ma * mb - 1e-12 * ma * mb
                })
                .count()
        })
        .sum();
    Ok(AlignmentReport {
        theta,
        cells_above: above.len(),
        pairs,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSum {
    pub radius: f64,
    pub count: usize,
    /// `Σ_j |ω|(B_j)^2 / R_j`, each cell counted in the ball holding its center.
    pub value: f64,
}

/// Best `Σ m_j^2/R_j` over disjoint equal balls inscribed in shifted cube
/// lattices, for radii `r0 2^{-m}` down to `h`.
pub fn ball_sum(omega: &Vorticity3D, r0: f64) -> BallSum {
    let f = &omega.field;
    let h = omega.spacing();
    let lower = f.domain().lower().to_vec();
    let cells: Vec<(Vec<f64>, f64)> = omega
        .support()
        .into_iter()
        .map(|c| (f.cell_center(c), omega.magnitude(c) * f.cell_volume()))
        .collect();
    let mut best = BallSum {
        radius: r0,
        count: 0,
        value: 0.0,
    };
    let mut r = r0;
    while r >= h * (1.0 - 1e-9) {
        for shift in 0..8 {
            let s: Vec<f64> = (0..3)
                .map(|a| if shift >> a & 1 == 1 { r } else { 0.0 })
                .collect();
            let mut mass: HashMap<[i64; 3], f64> = HashMap::new();
            for (x, m) in &cells {
                let mut key = [0i64; 3];
                let mut d2 = 0.0;
                for a in 0..3 {
                    let u = (x[a] - lower[a] - s[a]) / (2.0 * r);
                    key[a] = u.floor() as i64;
                    let centre = lower[a] + s[a] + (key[a] as f64 + 0.5) * 2.0 * r;
                    d2 += (x[a] - centre).powi(2);
                }
                if d2 <= r * r {
                    *mass.entry(key).or_insert(0.0) += m;
                }
            }
            let value: f64 = mass.values().map(|m| m * m / r).sum();
            if value > best.value {
                best = BallSum {
                    radius: r,
                    count: mass.len(),
                    value,
                };
            }
        }
        r /= 2.0;
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Absolute tolerance applied in `holds`.
    pub tol: f64,
    pub holds: bool,
}

impl ChainLink {
    fn new(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            tol,
            holds: lhs <= rhs + tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub params: AlignmentParams,
    pub theta: f64,
    pub alignment: AlignmentReport,
    /// Ball radius cap `min(R_0, δ/4)`.
    pub r0: f64,
    pub h0: f64,
    pub partition: EnergyPartition3D,
    pub h_si_spectral: f64,
    pub h_si_plus: f64,
    pub h_si_minus: f64,
    pub cross: f64,
    pub support_volume: f64,
    /// `Σ_{0<|x−y|≤δ} h^3/|x−y|` plus the self-term: the grid value of `∫_{B_δ} 1/|y|`.
    pub near_integral: f64,
    pub const_k0: f64,
    /// `K_0^2 |supp ω| δ^2 / 4`, the continuum form of the same bound.
    pub const_k0_continuum: f64,
    pub balls: BallSum,
    pub ball_lower: f64,
    pub v_norm_sq: f64,
    pub v_bound: f64,
    pub cell_defect: f64,
    pub links: Vec<ChainLink>,
}

impl ChainReport {
    pub fn violations(&self) -> usize {
        self.links.iter().filter(|l| !l.holds).count()
    }

    pub fn holds(&self) -> bool {
        self.violations() == 0
    }

    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.name == name)
    }
}

/// Evaluates every inequality from the energy bound to the V^{6/5,2} estimate
/// of `ω_+`. `h0` defaults to the energy of `ω` itself.
pub fn bound_chain(
    omega: &Vorticity3D,
    params: &AlignmentParams,
    h0: Option<f64>,
) -> Result<ChainReport> {
    let AlignmentParams { delta, k0, .. } = *params;
    let alignment = alignment_measure(omega, delta, k0)?;
    let theta = alignment.theta;
    if theta >= 1.0 {
        return Err(Error::AlignmentDefect(theta));
    }
    let h = omega.spacing();
    let (minus, plus) = split_height(omega, k0)?;
    let partition = partition_delta(omega, delta)?;
    let EnergyPartition3D { h_total, h_si, .. } = partition;
    let h_si_plus = near_pair_energy(&plus, &plus, delta)?;
    let h_si_minus = near_pair_energy(&minus, &minus, delta)?;
    let cross = near_pair_energy(&minus, &plus, delta)?;
    let h0 = h0.unwrap_or(h_total);
    let h_si_spectral = hsi_fourier(omega, delta)?.value;

    let support_volume = omega.support_volume();
    let near_integral: f64 = stencil(h, delta).iter().map(|(_, w)| w).sum();
    let const_k0 = k0 * k0 / (8.0 * PI) * support_volume * near_integral;
    let const_k0_continuum = k0 * k0 * support_volume * delta * delta / 4.0;

    let r0 = DEFAULT_R0.min(delta / 4.0 * (1.0 - 1e-9));
    let balls = ball_sum(&plus, r0);
    let factor = 1.0 - theta * theta;
    let ball_lower = factor / (16.0 * PI) * balls.value;
    let v_norm_sq = vnorm_lattice(
        plus.field(),
        &NormParams::new(1.2, 2.0, 0.0, r0)?,
        &LatticeOptions::default(),
    )?
    .value
    .powi(2);
    let upper = 2.0 * h0 + 7.0 * const_k0;
    let v_bound = 32.0 * PI / factor * upper;
    let cell_defect = omega.cell_constancy_defect(((delta / h).floor() as usize).max(1))?;

    let scale = h_total.abs().max(h_si.abs()).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let links = vec![
        ChainLink::new("alignment", theta, params.theta, 1e-12),
        ChainLink::new("energy_bound", h_total, h0, tol),
        ChainLink::new("near_le_twice_energy", h_si, 2.0 * h_total, tol),
        ChainLink::new("positive_form", -h_si_plus.min(h_si_minus), 0.0, tol),
        ChainLink::new(
            "split_identity",
            (h_si - h_si_plus - h_si_minus - 2.0 * cross).abs(),
            0.0,
            tol,
        ),
        ChainLink::new(
            "cauchy_schwarz",
            2.0 * cross.abs(),
            0.5 * h_si_plus + 8.0 * h_si_minus,
            tol,
        ),
        ChainLink::new("bounded_part", h_si_minus, const_k0, tol),
        ChainLink::new("upper_bound", 0.5 * h_si_plus, upper, tol),
        ChainLink::new("ball_lower_bound", ball_lower, h_si_plus, tol),
        ChainLink::new("v_bound", v_norm_sq, v_bound, 1e-10 * v_bound),
    ];
    Ok(ChainReport {
        params: *params,
        theta,
        alignment,
        r0,
        h0,
        partition,
        h_si_spectral,
        h_si_plus,
        h_si_minus,
        cross,
        support_volume,
        near_integral,
        const_k0,
        const_k0_continuum,
        balls,
        ball_lower,
        v_norm_sq,
        v_bound,
        cell_defect,
        links,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyVReport {
    /// Squared lattice V^{6/5,2} value and the cube collection attaining it.
    pub v_norm_sq: f64,
    pub cube_sides: Vec<f64>,
    pub cube_masses: Vec<f64>,
    /// Estimated M^{3/2} norm, raised to cover the circumscribed balls of the collection.
    pub morrey: f64,
    /// `Σ_j R_j` over circumscribed balls of the charged cubes.
    pub radius_sum: f64,
    /// `||μ||^2_M Σ_j R_j`; bounds `v_norm_sq` for the same collection.
    pub same_collection_bound: f64,
    pub packing: PackingMeasure,
    pub packing_bound: f64,
    pub applicable: bool,
    pub holds_same_collection: bool,
    pub holds_packing: bool,
}

/// Compares the lattice V^{6/5,2} value with packing measure times the squared
/// Morrey norm. `support` marks the set whose packing measure is estimated.
pub fn morrey_vs_v_check(
    mu: &AtomicMeasure,
    support: &GridField,
    r0: f64,
) -> Result<MorreyVReport> {
    if mu.domain().dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: mu.domain().dim(),
        });
    }
    let lat = vnorm_lattice(
        mu,
        &NormParams::new(1.2, 2.0, 0.0, r0)?,
        &LatticeOptions::default(),
    )?;
    let best = &lat.best;
    let root3 = 3f64.sqrt();
    let mut morrey = morrey_norm(mu, 1.5, 0.0, r0)?.value;
    let mut radius_sum = 0.0;
    for (s, m) in best.scales.iter().zip(&best.masses) {
        if *m > 0.0 {
            let r = root3 * s / 2.0;
            morrey = morrey.max(m / r);
            radius_sum += r;
        }
    }
    let v_norm_sq = lat.value * lat.value;
    let same_collection_bound = morrey * morrey * radius_sum;
    // the mask cannot resolve balls finer than its own cells
    let floor = support.min_spacing() / 2.0 * (1.0 - 1e-9);
    let mut radii: Vec<f64> = lat
        .levels
        .iter()
        .map(|l| l.side / 2.0)
        .filter(|&r| r >= floor)
        .collect();
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup();
    let packing = packing_measure_estimate(support, &radii)?;
    let packing_bound = packing.value * morrey * morrey;
    let applicable = !packing.divergent;
    Ok(MorreyVReport {
        v_norm_sq,
        cube_sides: best.scales.clone(),
        cube_masses: best.masses.clone(),
        morrey,
        radius_sum,
        same_collection_bound,
        holds_same_collection: v_norm_sq <= same_collection_bound * (1.0 + 1e-12),
        holds_packing: applicable && v_norm_sq <= packing_bound * (1.0 + 1e-12),
        packing,
        packing_bound,
        applicable,
    })
}
