//! Planar vortex dynamics and the diagnostics built on it: blob Biot-Savart
//! velocities, RK4 evolution, pseudo-energy and its self/interaction split,
//! the one-signed V-bound chain, the DiPerna-Majda concentration family and
//! the near/far split of the Delort quadratic term.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{Atom, AtomicMeasure, GridField, MassSource};
use crate::geometry::{Domain, DyadicCubeCover};
use crate::packing::{vnorm_lattice, Collection, LatticeOptions, NormParams};

/// Velocity at offset `xi` from a uniform vortex patch of unit circulation and radius `delta`:
/// rigid rotation inside, point vortex outside.
pub fn patch_kernel(xi: [f64; 2], delta: f64) -> [f64; 2] {
    let r2 = (xi[0] * xi[0] + xi[1] * xi[1]).max(delta * delta);
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let s = 1.0 / (2.0 * PI * r2);
    [-xi[1] * s, xi[0] * s]
}

/// Point vortices carried as uniform patches of a common radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexState2D {
    measure: AtomicMeasure,
    pub t: f64,
}

impl VortexState2D {
    /// The measure's box doubles as the blow-up guard.
    pub fn new(domain: Domain, vortices: &[([f64; 2], f64)], blob: f64) -> Result<Self> {
        if domain.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: domain.dim(),
            });
        }
        if !(blob > 0.0) {
            return Err(param("blob", "radius must be positive"));
        }
        let atoms = vortices
            .iter()
            .map(|(x, g)| Atom::scalar(x.to_vec(), *g))
            .collect();
        Ok(Self {
            measure: AtomicMeasure::new(domain, atoms, blob)?,
            t: 0.0,
        })
    }

    pub fn from_measure(measure: AtomicMeasure, t: f64) -> Result<Self> {
        if measure.dim() != 2 || measure.atoms().iter().any(|a| a.weight.len() != 1) {
            return Err(param("measure", "need scalar atoms in the plane"));
        }
        if !(measure.blob() > 0.0) {
            return Err(param("blob", "radius must be positive"));
        }
        Ok(Self { measure, t })
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.measure
    }

    pub fn blob(&self) -> f64 {
        self.measure.blob()
    }

    pub fn len(&self) -> usize {
        self.measure.atoms().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.measure
            .atoms()
            .iter()
            .map(|a| [a.position[0], a.position[1]])
            .collect()
    }

    pub fn circulations(&self) -> Vec<f64> {
        self.measure.atoms().iter().map(|a| a.weight[0]).collect()
    }

    /// Induced velocity at `x`.
    pub fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        biot_savart(&self.positions(), &self.circulations(), self.blob(), x)
    }

    fn with_positions(&self, pos: &[[f64; 2]], t: f64) -> Result<Self> {
        let atoms = pos
            .iter()
            .zip(self.measure.atoms())
            .map(|(p, a)| Atom {
                position: p.to_vec(),
                weight: a.weight.clone(),
            })
            .collect();
        Ok(Self {
            measure: AtomicMeasure::new(self.measure.domain().clone(), atoms, self.blob())?,
            t,
        })
    }
}

/// `Σ_i Γ_i K_δ(x - x_i)`.
pub fn biot_savart(pos: &[[f64; 2]], gamma: &[f64], delta: f64, x: [f64; 2]) -> [f64; 2] {
    let mut u = [0.0, 0.0];
    for (p, g) in pos.iter().zip(gamma) {
        let k = patch_kernel([x[0] - p[0], x[1] - p[1]], delta);
        u[0] += g * k[0];
        u[1] += g * k[1];
    }
    u
}

/// Velocity of a scalar vorticity grid at `x` by midpoint quadrature, each cell
/// treated as a patch of equal area.
pub fn grid_velocity(omega: &GridField, x: [f64; 2]) -> Result<[f64; 2]> {
    omega.require_scalar("grid_velocity")?;
    if omega.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: omega.dim(),
        });
    }
    let vol = omega.cell_volume();
    let delta = (vol / PI).sqrt();
    let u = (0..omega.num_cells())
        .into_par_iter()
        .map(|c| {
            let w = omega.data()[c];
            if w == 0.0 {
                return [0.0, 0.0];
            }
            let y = omega.cell_center(c);
            let k = patch_kernel([x[0] - y[0], x[1] - y[1]], delta);
            [w * vol * k[0], w * vol * k[1]]
        })
        .reduce(|| [0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
    Ok(u)
}

fn induced(pos: &[[f64; 2]], gamma: &[f64], delta: f64) -> Vec<[f64; 2]> {
    (0..pos.len())
        .into_par_iter()
        .map(|i| {
            let mut u = [0.0, 0.0];
            for (j, (p, g)) in pos.iter().zip(gamma).enumerate() {
                if j != i {
                    let k = patch_kernel([pos[i][0] - p[0], pos[i][1] - p[1]], delta);
                    u[0] += g * k[0];
                    u[1] += g * k[1];
                }
            }
            u
        })
        .collect()
}

/// One classical RK4 step of the point-vortex system; errors if a vortex leaves the box.
pub fn step(state: &VortexState2D, dt: f64) -> Result<VortexState2D> {
    if !(dt > 0.0) {
        return Err(param("dt", "must be positive"));
    }
    let x0 = state.positions();
    let g = state.circulations();
    let d = state.blob();
    let shifted = |k: &[[f64; 2]], h: f64| -> Vec<[f64; 2]> {
        x0.iter()
            .zip(k)
            .map(|(x, v)| [x[0] + h * v[0], x[1] + h * v[1]])
            .collect()
    };
    let k1 = induced(&x0, &g, d);
    let k2 = induced(&shifted(&k1, 0.5 * dt), &g, d);
    let k3 = induced(&shifted(&k2, 0.5 * dt), &g, d);
    let k4 = induced(&shifted(&k3, dt), &g, d);
    let next: Vec<[f64; 2]> = (0..x0.len())
        .map(|i| {
            let f = |a: usize| k1[i][a] + 2.0 * k2[i][a] + 2.0 * k3[i][a] + k4[i][a];
            [x0[i][0] + dt / 6.0 * f(0), x0[i][1] + dt / 6.0 * f(1)]
        })
        .collect();
    let t = state.t + dt;
    let dom = state.measure.domain();
    if let Some(i) = next
        .iter()
        .position(|x| !x.iter().all(|v| v.is_finite()) || !dom.contains_point(x))
    {
        return Err(Error::BlowUp { index: i, t });
    }
    state.with_positions(&next, t)
}

/// Advance by `steps` steps of size `dt`, calling `observe` on the initial state and every `stride`-th state.
pub fn evolve(
    state: &VortexState2D,
    dt: f64,
    steps: usize,
    stride: usize,
    mut observe: impl FnMut(&VortexState2D),
) -> Result<VortexState2D> {
    let stride = stride.max(1);
    let mut s = state.clone();
    observe(&s);
    for n in 1..=steps {
        s = step(&s, dt)?;
        if n % stride == 0 {
            observe(&s);
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyMode {
    /// Point-vortex pair sum only.
    Pairwise,
    /// Pair sum plus the closed-form uniform-patch self-energy `-(Γ²/2π)(ln δ - 1/4)`.
    WithSelf,
}

/// Self-energy of a uniform patch of circulation `g` and radius `delta`.
pub fn patch_self_energy(g: f64, delta: f64) -> f64 {
    -(g * g) / (2.0 * PI) * (delta.ln() - 0.25)
}

fn pair_energy(gi: f64, gj: f64, r: f64) -> f64 {
    // both orderings of the pair
    -gi * gj * r.ln() / PI
}

/// `H = -(1/2π) ∬ log|x - y| ω(x) ω(y)`; exact for non-overlapping patches in [`EnergyMode::WithSelf`].
pub fn pseudo_energy(state: &VortexState2D, mode: EnergyMode) -> Result<f64> {
    let pos = state.positions();
    let g = state.circulations();
    let n = pos.len();
    let pairs: Result<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in i + 1..n {
                let r = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                if r == 0.0 {
                    if mode == EnergyMode::Pairwise {
                        return Err(Error::Coincident(i, j));
                    }
                    continue;
                }
                s += pair_energy(g[i], g[j], r);
            }
            Ok(s)
        })
        .sum();
    let mut h = pairs?;
    if mode == EnergyMode::WithSelf {
        h += g
            .iter()
            .map(|&gi| patch_self_energy(gi, state.blob()))
            .sum::<f64>();
    }
    Ok(h)
}

/// `(I_0, I_2) = (Σ Γ_i, Σ Γ_i |x_i|²)` with point positions.
pub fn moments(state: &VortexState2D) -> (f64, f64) {
    state
        .positions()
        .iter()
        .zip(state.circulations())
        .fold((0.0, 0.0), |(i0, i2), (x, g)| {
            (i0 + g, i2 + g * (x[0] * x[0] + x[1] * x[1]))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPartition2D {
    pub h_total: f64,
    pub h_si: f64,
    pub h_ie: f64,
    /// Region of each vortex (by its center), `None` outside the geometry.
    pub regions: Vec<Option<usize>>,
    /// Circulation per region.
    pub region_mass: Vec<f64>,
    /// Diameter of each region.
    pub region_diameter: Vec<f64>,
}

fn assign_regions(
    pos: &[[f64; 2]],
    geometry: &Collection,
) -> Result<(Vec<Option<usize>>, Vec<f64>)> {
    match geometry {
        Collection::Balls(b) => {
            let diam = b.balls().iter().map(|b| 2.0 * b.radius).collect();
            Ok((pos.iter().map(|x| b.locate(x)).collect(), diam))
        }
        Collection::Cubes(c) => {
            let diam = c.cubes().iter().map(|q| q.side * 2f64.sqrt()).collect();
            let reg = pos
                .iter()
                .map(|x| c.cubes().iter().position(|q| q.contains(x)))
                .collect();
            Ok((reg, diam))
        }
        Collection::Lattice(cover) => {
            let mut keys: Vec<Vec<i64>> = Vec::new();
            let reg = pos
                .iter()
                .map(|x| {
                    let k = cover.cell_of(x);
                    Some(match keys.iter().position(|q| *q == k) {
                        Some(i) => i,
                        None => {
                            keys.push(k);
                            keys.len() - 1
                        }
                    })
                })
                .collect();
            Ok((reg, vec![cover.side() * 2f64.sqrt(); keys.len()]))
        }
    }
}

/// Split `H` into pairs (and self-terms) inside a common region and the rest.
pub fn energy_partition(state: &VortexState2D, geometry: &Collection) -> Result<EnergyPartition2D> {
    let pos = state.positions();
    let g = state.circulations();
    let (regions, region_diameter) = assign_regions(&pos, geometry)?;
    let mut region_mass = vec![0.0; region_diameter.len()];
    for (r, gi) in regions.iter().zip(&g) {
        if let Some(r) = r {
            region_mass[*r] += gi;
        }
    }
    let n = pos.len();
    let (si, ie) = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = patch_self_energy(g[i], state.blob());
            let (mut si, mut ie) = if regions[i].is_some() {
                (own, 0.0)
            } else {
                (0.0, own)
            };
            for j in i + 1..n {
                let r = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                if r == 0.0 {
                    continue;
                }
                let e = pair_energy(g[i], g[j], r);
                if regions[i].is_some() && regions[i] == regions[j] {
                    si += e;
                } else {
                    ie += e;
                }
            }
            (si, ie)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(EnergyPartition2D {
        h_total: si + ie,
        h_si: si,
        h_ie: ie,
        regions,
        region_mass,
        region_diameter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSignedChainReport {
    pub partition: EnergyPartition2D,
    /// `(1/2π) Σ_j |log d_j| m_j²` over regions of diameter `d_j`.
    pub si_lower: f64,
    /// `(2/π) I_0 I_2`.
    pub ie_bound: f64,
    /// Lattice `V^{12}(log V)^{1/2}` value of the patch measure.
    pub v_norm: f64,
    pub self_induced_ok: bool,
    pub interaction_ok: bool,
    /// `v_norm² / 2π ≤ H + (2/π) I_0 I_2`.
    pub conclusion_ok: bool,
}

impl OneSignedChainReport {
    pub fn holds(&self) -> bool {
        self.self_induced_ok && self.interaction_ok && self.conclusion_ok
    }
}

/// Check the one-signed bound chain `|ω|²_V / 2π ≤ H_si = H - H_ie ≤ H + (2/π) I_0 I_2`
/// for the given geometry. Regions must have diameter in `[δ, 1)`.
pub fn one_signed_chain(
    state: &VortexState2D,
    geometry: &Collection,
    r0: f64,
) -> Result<OneSignedChainReport> {
    if state.circulations().iter().any(|&g| g < 0.0) {
        return Err(Error::MixedSign);
    }
    let part = energy_partition(state, geometry)?;
    if let Some(d) = part
        .region_diameter
        .iter()
        .find(|&&d| !(d >= state.blob() && d < 1.0))
    {
        return Err(param(
            "geometry",
            format!("region diameter {d} outside [blob radius, 1)"),
        ));
    }
    let si_lower = part
        .region_mass
        .iter()
        .zip(&part.region_diameter)
        .map(|(m, d)| d.ln().abs() * m * m)
        .sum::<f64>()
        / (2.0 * PI);
    let (i0, i2) = moments(state);
    let ie_bound = 2.0 / PI * i0 * i2;
    let params = NormParams::new(1.0, 2.0, 0.5, r0)?;
    let v_norm = vnorm_lattice(state.measure(), &params, &LatticeOptions::default())?.value;
    let tol = 1e-12 * (part.h_si.abs() + part.h_ie.abs() + ie_bound).max(1e-300);
    Ok(OneSignedChainReport {
        self_induced_ok: si_lower <= part.h_si + tol,
        interaction_ok: -part.h_ie <= ie_bound + tol,
        conclusion_ok: v_norm * v_norm / (2.0 * PI) <= part.h_total + ie_bound + tol,
        si_lower,
        ie_bound,
        v_norm,
        partition: part,
    })
}

/// Lattice covers at the given levels of the state's box, for use as partition geometry.
pub fn lattice_geometry(state: &VortexState2D, level: u32) -> Collection {
    Collection::Lattice(DyadicCubeCover::unshifted(state.measure().domain(), level))
}

/// `C^∞` step: 1 for `t ≤ 0`, 0 for `t ≥ 1`, with derivatives `(σ, σ', σ'')`.
pub fn smooth_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = 1.0 - t;
    let a = (-1.0 / s).exp();
    let b = (-1.0 / t).exp();
    let ab = a * b;
    let sum = a + b;
    let q = 1.0 / (s * s) + 1.0 / (t * t);
    let dq = 2.0 / (s * s * s) - 2.0 / (t * t * t);
    let dab = ab * (1.0 / (t * t) - 1.0 / (s * s));
    let dsum = -a / (s * s) + b / (t * t);
    let num = ab * q;
    let dnum = dab * q + ab * dq;
    let den = sum * sum;
    let dden = 2.0 * sum * dsum;
    (
        a / sum,
        -num / den,
        -(dnum * den - num * dden) / (den * den),
    )
}

/// Radial cutoff `ρ` with `ρ ≡ 1` on `[0, 1]` and support in `[0, 2]`.
pub fn standard_cutoff(r: f64) -> f64 {
    smooth_step(r - 1.0).0
}

/// `φ(x) = P(x - c) · χ(|x - c|)` with `P` quadratic and `χ` a smooth radial cutoff that is
/// `1` up to `plateau` and vanishes from `radius` on (no cutoff when `radius` is infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction2D {
    pub center: [f64; 2],
    /// Coefficients of `1, y₁, y₂, y₁², y₁y₂, y₂²`.
    pub coeffs: [f64; 6],
    pub plateau: f64,
    pub radius: f64,
}

impl TestFunction2D {
    pub fn polynomial(coeffs: [f64; 6]) -> Self {
        Self {
            center: [0.0, 0.0],
            coeffs,
            plateau: f64::INFINITY,
            radius: f64::INFINITY,
        }
    }

    /// Radial bump equal to 1 on `|x - c| ≤ plateau`.
    pub fn bump(center: [f64; 2], plateau: f64, radius: f64) -> Result<Self> {
        Self::new(center, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], plateau, radius)
    }

    pub fn new(center: [f64; 2], coeffs: [f64; 6], plateau: f64, radius: f64) -> Result<Self> {
        if !(plateau >= 0.0 && radius > plateau) {
            return Err(param("cutoff", "need 0 <= plateau < radius"));
        }
        Ok(Self {
            center,
            coeffs,
            plateau,
            radius,
        })
    }

    pub fn has_compact_support(&self) -> bool {
        self.radius.is_finite()
    }

    fn cutoff(&self, r: f64) -> (f64, f64, f64) {
        if !self.radius.is_finite() {
            return (1.0, 0.0, 0.0);
        }
        let w = self.radius - self.plateau;
        let (s, ds, dds) = smooth_step((r - self.plateau) / w);
        (s, ds / w, dds / (w * w))
    }

    fn poly(&self, y: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let c = &self.coeffs;
        let v = c[0]
            + c[1] * y[0]
            + c[2] * y[1]
            + c[3] * y[0] * y[0]
            + c[4] * y[0] * y[1]
            + c[5] * y[1] * y[1];
        let g = [
            c[1] + 2.0 * c[3] * y[0] + c[4] * y[1],
            c[2] + c[4] * y[0] + 2.0 * c[5] * y[1],
        ];
        (v, g, [[2.0 * c[3], c[4]], [c[4], 2.0 * c[5]]])
    }

    fn parts(&self, x: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let y = [x[0] - self.center[0], x[1] - self.center[1]];
        let (p, gp, hp) = self.poly(y);
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let (c, dc, ddc) = self.cutoff(r);
        if dc == 0.0 && ddc == 0.0 {
            return (
                p * c,
                [gp[0] * c, gp[1] * c],
                [[hp[0][0] * c, hp[0][1] * c], [hp[1][0] * c, hp[1][1] * c]],
            );
        }
        let e = [y[0] / r, y[1] / r];
        let gc = [dc * e[0], dc * e[1]];
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                let hc = ddc * e[i] * e[j] + dc / r * (id - e[i] * e[j]);
                h[i][j] = c * hp[i][j] + gp[i] * gc[j] + gc[i] * gp[j] + p * hc;
            }
        }
        (p * c, [gp[0] * c + p * gc[0], gp[1] * c + p * gc[1]], h)
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.parts(x).0
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        self.parts(x).1
    }

    pub fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        self.parts(x).2
    }

    /// `sup |D²φ|` (operator norm): exact without cutoff, otherwise sampled on a
    /// 401² grid over the support with a 5% margin.
    pub fn hessian_bound(&self) -> f64 {
        let op = |h: [[f64; 2]; 2]| {
            let m = 0.5 * (h[0][0] + h[1][1]);
            let d = 0.5 * (h[0][0] - h[1][1]);
            m.abs() + (d * d + h[0][1] * h[0][1]).sqrt()
        };
        if !self.has_compact_support() {
            return op(self.poly([0.0, 0.0]).2);
        }
        let n = 401;
        let r = self.radius;
        let best = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let x = [
                    self.center[0] - r + 2.0 * r * (k / n) as f64 / (n - 1) as f64,
                    self.center[1] - r + 2.0 * r * (k % n) as f64 / (n - 1) as f64,
                ];
                op(self.hessian(x))
            })
            .reduce(|| 0.0, f64::max);
        1.05 * best
    }

    /// `C_φ = sup |H_φ| ≤ sup |D²φ| / 4π`.
    pub fn kernel_bound(&self) -> f64 {
        self.hessian_bound() / (4.0 * PI)
    }
}

/// Time profile `ψ`: 1 up to `plateau`, smooth decay to 0 at `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    pub plateau: f64,
    pub end: f64,
}

impl TimeProfile {
    pub fn constant() -> Self {
        Self {
            plateau: f64::INFINITY,
            end: f64::INFINITY,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    pub fn sup(&self) -> f64 {
        1.0
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        if !self.end.is_finite() || t <= self.plateau {
            return (1.0, 0.0);
        }
        let w = self.end - self.plateau;
        let (s, ds, _) = smooth_step((t - self.plateau) / w);
        (s, ds / w)
    }
}

/// `H_φ(x, y) = (∇φ(x) - ∇φ(y)) / (4π|x - y|) · (x - y)^⊥ / |x - y|`.
pub fn delort_kernel(phi: &TestFunction2D, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r2 = d[0] * d[0] + d[1] * d[1];
    if r2 == 0.0 {
        return Err(param("x, y", "kernel is undefined on the diagonal"));
    }
    let (gx, gy) = (phi.gradient(x), phi.gradient(y));
    let dg = [gx[0] - gy[0], gx[1] - gy[1]];
    Ok((dg[0] * -d[1] + dg[1] * d[0]) / (4.0 * PI * r2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JDeltaSplit {
    pub delta: f64,
    /// Far part, weighted by `1 - ρ(|x - y|/δ)`.
    pub i_delta: f64,
    /// Near part, weighted by `ρ(|x - y|/δ)`.
    pub j_delta: f64,
    /// `9 C_φ |ψ| Σ_j m_j²` over the lattice of side `2δ`
    /// (equivalently `9 C_φ |ψ| |log 2δ|^{-2α}` times the squared lattice term at that side).
    pub j_bound: f64,
    pub c_phi: f64,
    /// `(Σ_j (|log 2δ|^α m_j)²)^{1/2}`.
    pub level_value: f64,
}

/// Split `∬ ψ H_φ ω ω` into far and near parts at scale `δ` for a frozen snapshot
/// (diagonal pairs excluded). `rho` must be 1 on `[0, 1]` and vanish on `[2, ∞)`.
pub fn jdelta_split(
    src: &dyn MassSource,
    phi: &TestFunction2D,
    psi: f64,
    delta: f64,
    alpha: f64,
    rho: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<JDeltaSplit> {
    if src.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: src.dim(),
        });
    }
    if !(delta > 0.0 && alpha >= 0.0) {
        return Err(param("delta/alpha", "need delta > 0 and alpha >= 0"));
    }
    for k in 0..=8 {
        let r = k as f64 / 8.0;
        if (rho(r) - 1.0).abs() > 1e-12 || rho(2.0 + r).abs() > 1e-12 {
            return Err(param("rho", "cutoff must be 1 on [0,1] and 0 beyond 2"));
        }
    }
    let pts: Vec<([f64; 2], f64)> = src
        .weighted_points()
        .into_iter()
        .map(|(x, w)| {
            if w.len() != 1 {
                return Err(param("src", "need a scalar vorticity"));
            }
            Ok(([x[0], x[1]], w[0]))
        })
        .collect::<Result<_>>()?;
    let c_phi = phi.kernel_bound();
    let n = pts.len();
    let (i_delta, j_delta) = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut far, mut near) = (0.0, 0.0);
            let (xi, wi) = pts[i];
            for &(xj, wj) in &pts[i + 1..] {
                let r = ((xi[0] - xj[0]).powi(2) + (xi[1] - xj[1]).powi(2)).sqrt();
                if r == 0.0 {
                    continue;
                }
                let h = delort_kernel(phi, xi, xj).unwrap_or(0.0) * 2.0 * wi * wj * psi;
                let w = rho(r / delta);
                near += w * h;
                far += (1.0 - w) * h;
            }
            (far, near)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let cover = DyadicCubeCover::with_side(src.domain(), 2.0 * delta);
    let mut cells = std::collections::HashMap::new();
    for (x, w) in &pts {
        *cells.entry(cover.cell_of(x)).or_insert(0.0) += w.abs();
    }
    let sum_sq: f64 = cells.values().map(|m| m * m).sum();
    let lw = (2.0 * delta).ln().abs();
    Ok(JDeltaSplit {
        delta,
        i_delta,
        j_delta,
        j_bound: 9.0 * c_phi * psi.abs() * sum_sq,
        c_phi,
        level_value: lw.powf(alpha) * sum_sq.sqrt(),
    })
}

/// A radial vorticity profile supported in `(0, 1)` with its circulation `Γ(r) = ∫_0^r s ω(s) ds`
/// tabulated for Hermite interpolation.
pub struct DmjProfile {
    omega: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    gamma: Vec<f64>,
}

impl std::fmt::Debug for DmjProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DmjProfile")
            .field("gamma_inf", &self.gamma_inf())
            .finish()
    }
}

const PROFILE_NODES: usize = 2048;

impl DmjProfile {
    /// `ω(r) = exp(1 - 1/(1 - (2r - 1)²))` on `(0, 1)`.
    pub fn bump() -> Self {
        Self::from_fn(|r| {
            let s = 2.0 * r - 1.0;
            if s.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - s * s)).exp()
            }
        })
    }

    pub fn from_fn(omega: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let h = 1.0 / PROFILE_NODES as f64;
        let mut gamma = vec![0.0; PROFILE_NODES + 1];
        for k in 0..PROFILE_NODES {
            let a = k as f64 * h;
            gamma[k + 1] =
                gamma[k] + crate::rearrange::gauss_legendre(a, a + h, 1, |s| s * omega(s));
        }
        Self {
            omega: Box::new(omega),
            gamma,
        }
    }

    pub fn omega(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= 1.0 {
            0.0
        } else {
            (self.omega)(r)
        }
    }

    pub fn gamma_inf(&self) -> f64 {
        self.gamma[PROFILE_NODES]
    }

    pub fn gamma(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= 1.0 {
            return self.gamma_inf();
        }
        let h = 1.0 / PROFILE_NODES as f64;
        let k = ((r / h) as usize).min(PROFILE_NODES - 1);
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let t = (r - a) / h;
        let (ga, gb) = (self.gamma[k], self.gamma[k + 1]);
        let (da, db) = (a * self.omega(a) * h, b * self.omega(b) * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * ga
            + (t3 - 2.0 * t2 + t) * da
            + (-2.0 * t3 + 3.0 * t2) * gb
            + (t3 - t2) * db
    }
}

/// The steady dilations `ω^ε(x) = ω(|x|/ε) / (ε² √|log ε|)` with velocity
/// `u^ε(x) = u(x/ε) / (ε √|log ε|)`, `u(y) = y^⊥ Γ(|y|) / |y|²`.
#[derive(Debug)]
pub struct DmjFamily<'a> {
    pub profile: &'a DmjProfile,
    pub eps: f64,
}

impl<'a> DmjFamily<'a> {
    pub fn new(profile: &'a DmjProfile, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(param("eps", "need 0 < eps < 1/2"));
        }
        Ok(Self { profile, eps })
    }

    fn log_scale(&self) -> f64 {
        self.eps.ln().abs().sqrt()
    }

    pub fn vorticity(&self, x: [f64; 2]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        self.profile.omega(r / self.eps) / (self.eps * self.eps * self.log_scale())
    }

    pub fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        let y = [x[0] / self.eps, x[1] / self.eps];
        let r2 = y[0] * y[0] + y[1] * y[1];
        if r2 == 0.0 {
            return [0.0, 0.0];
        }
        let s = self.profile.gamma(r2.sqrt()) / r2 / (self.eps * self.log_scale());
        [-y[1] * s, y[0] * s]
    }

    /// `∫ ω^ε = 2π Γ_∞ / √|log ε|`.
    pub fn total_vorticity(&self) -> f64 {
        2.0 * PI * self.profile.gamma_inf() / self.log_scale()
    }

    pub fn vorticity_grid(&self, domain: Domain, n: usize) -> Result<GridField> {
        GridField::from_fn(domain, vec![n, n], |x| self.vorticity([x[0], x[1]]))
    }

    pub fn velocity_grid(&self, domain: Domain, n: usize) -> Result<GridField> {
        GridField::from_vec_fn(domain, vec![n, n], 2, |x| {
            self.velocity([x[0], x[1]]).to_vec()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub eps: f64,
    /// `∫ φ u_1^ε u_1^ε`.
    pub d11: f64,
    pub d22: f64,
    pub d12: f64,
    /// `π Γ_∞² φ(0)`.
    pub limit: f64,
}

/// Midpoint quadrature of `∫ φ u_i^ε u_j^ε` on an `n × n` grid over `domain`.
pub fn concentration_check(
    profile: &DmjProfile,
    phi: &TestFunction2D,
    eps_list: &[f64],
    domain: &Domain,
    n: usize,
) -> Result<Vec<ConcentrationRow>> {
    if domain.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: domain.dim(),
        });
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(param("eps", "sequence must be decreasing"));
    }
    let (hx, hy) = (domain.extent(0) / n as f64, domain.extent(1) / n as f64);
    let limit = PI * profile.gamma_inf().powi(2) * phi.value([0.0, 0.0]);
    eps_list
        .iter()
        .map(|&eps| {
            if eps < 2.0 * hx.max(hy) {
                return Err(Error::Unresolvable { eps, h: hx.max(hy) });
            }
            let fam = DmjFamily::new(profile, eps)?;
            let (d11, d22, d12) = (0..n)
                .into_par_iter()
                .map(|i| {
                    let x0 = domain.lower()[0] + (i as f64 + 0.5) * hx;
                    let mut acc = (0.0, 0.0, 0.0);
                    for j in 0..n {
                        let x = [x0, domain.lower()[1] + (j as f64 + 0.5) * hy];
                        let w = phi.value(x);
                        if w == 0.0 {
                            continue;
                        }
                        let u = fam.velocity(x);
                        acc.0 += w * u[0] * u[0];
                        acc.1 += w * u[1] * u[1];
                        acc.2 += w * u[0] * u[1];
                    }
                    acc
                })
                .reduce(|| (0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
            let v = hx * hy;
            Ok(ConcentrationRow {
                eps,
                d11: d11 * v,
                d22: d22 * v,
                d12: d12 * v,
                limit,
            })
        })
        .collect()
}

/// `max` over the last half of the sequence of `∫_E |u - u^ε|²`, a finite proxy for the limsup.
pub fn reduced_defect(seq: &[GridField], limit: &GridField, mask: &[bool]) -> Result<f64> {
    if seq.is_empty() {
        return Err(param("seq", "empty sequence"));
    }
    if mask.len() != limit.num_cells() {
        return Err(param("mask", "length must match the grid"));
    }
    let vol = limit.cell_volume();
    let mut best: f64 = 0.0;
    for u in &seq[seq.len() / 2..] {
        if !u.same_grid(limit) || u.ncomp() != limit.ncomp() {
            return Err(param("seq", "fields must share the limit's grid"));
        }
        let nc = u.ncomp();
        let s: f64 = (0..u.num_cells())
            .filter(|&c| mask[c])
            .map(|c| {
                (0..nc)
                    .map(|k| (u.data()[c * nc + k] - limit.data()[c * nc + k]).powi(2))
                    .sum::<f64>()
            })
            .sum();
        best = best.max(s * vol);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub residual: f64,
    /// The same integral with every integrand replaced by its absolute value.
    pub scale: f64,
}

/// `∫∫ Φ_t·u + (DΦ u)·u dx dt + ∫ Φ(x, 0)·u(x, 0) dx` for `Φ = ψ(t) ∇^⊥χ(x)`, which is
/// divergence-free by construction. Snapshots `(t, u)` start at `t = 0`; time by trapezoid.
pub fn weak_residual(
    snapshots: &[(f64, GridField)],
    chi: &TestFunction2D,
    psi: &TimeProfile,
) -> Result<WeakResidual> {
    let Some((t_last, _)) = snapshots.last() else {
        return Err(param("snapshots", "empty sequence"));
    };
    if snapshots[0].0 != 0.0 || snapshots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(param("snapshots", "times must start at 0 and increase"));
    }
    if snapshots.len() > 1 && psi.value(*t_last).abs() > 1e-12 {
        return Err(param(
            "psi",
            "time profile must vanish at the last snapshot",
        ));
    }
    let spatial = |u: &GridField| -> Result<[f64; 4]> {
        if u.ncomp() != 2 || u.dim() != 2 {
            return Err(param("u", "need a planar velocity grid"));
        }
        let vol = u.cell_volume();
        Ok((0..u.num_cells())
            .into_par_iter()
            .map(|c| {
                let x = u.cell_center(c);
                let x = [x[0], x[1]];
                let v = [u.data()[2 * c], u.data()[2 * c + 1]];
                let g = chi.gradient(x);
                let h = chi.hessian(x);
                let phi = [-g[1], g[0]];
                // rows of DΦ
                let dphi = [[-h[1][0], -h[1][1]], [h[0][0], h[0][1]]];
                let a = phi[0] * v[0] + phi[1] * v[1];
                let mut b = 0.0;
                let mut babs = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        b += dphi[i][j] * v[j] * v[i];
                        babs += (dphi[i][j] * v[j] * v[i]).abs();
                    }
                }
                let aabs = (phi[0] * v[0]).abs() + (phi[1] * v[1]).abs();
                [a * vol, b * vol, aabs * vol, babs * vol]
            })
            .reduce(
                || [0.0; 4],
                |p, q| [p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]],
            ))
    };
    let parts: Vec<(f64, [f64; 4])> = snapshots
        .iter()
        .map(|(t, u)| Ok((*t, spatial(u)?)))
        .collect::<Result<_>>()?;
    let (mut res, mut scale) = (0.0, 0.0);
    for w in parts.windows(2) {
        let dt = w[1].0 - w[0].0;
        for (t, s) in [&w[0], &w[1]] {
            res += 0.5 * dt * (psi.derivative(*t) * s[0] + psi.value(*t) * s[1]);
            scale += 0.5 * dt * (psi.derivative(*t).abs() * s[2] + psi.value(*t).abs() * s[3]);
        }
    }
    let s0 = parts[0].1;
    res += psi.value(0.0) * s0[0];
    scale += psi.value(0.0).abs() * s0[2];
    Ok(WeakResidual {
        residual: res,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, BallCollection};

    fn box2(lo: f64, hi: f64) -> Domain {
        Domain::cube(2, lo, hi).unwrap()
    }

    #[test]
    fn smooth_step_derivatives_match_differences() {
        let h = 1e-6;
        for t in [0.1, 0.3, 0.5, 0.77, 0.95] {
            let (_, d, dd) = smooth_step(t);
            let fd = (smooth_step(t + h).0 - smooth_step(t - h).0) / (2.0 * h);
            let fdd = (smooth_step(t + h).1 - smooth_step(t - h).1) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6, "t={t}");
            assert!((dd - fdd).abs() < 1e-5 * dd.abs().max(1.0), "t={t}");
        }
        assert_eq!(smooth_step(0.5).0, 0.5);
    }

    #[test]
    fn test_function_derivatives_match_differences() {
        let phi =
            TestFunction2D::new([0.1, -0.2], [0.3, 1.0, -0.5, 0.7, 1.1, -0.4], 0.2, 0.9).unwrap();
        let h = 1e-6;
        for x in [[0.3, 0.1], [0.5, -0.6], [-0.2, 0.2], [0.1, -0.2]] {
            let g = phi.gradient(x);
            let hs = phi.hessian(x);
            for a in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += h;
                xm[a] -= h;
                let fd = (phi.value(xp) - phi.value(xm)) / (2.0 * h);
                assert!((g[a] - fd).abs() < 1e-6);
                let (gp, gm) = (phi.gradient(xp), phi.gradient(xm));
                for b in 0..2 {
                    assert!((hs[b][a] - (gp[b] - gm[b]) / (2.0 * h)).abs() < 1e-5);
                }
            }
        }
        assert_eq!(phi.value([5.0, 5.0]), 0.0);
    }

    #[test]
    fn single_vortex_velocity() {
        let u = biot_savart(&[[0.0, 0.0]], &[3.0], 1e-9, [1.0, 0.0]);
        assert!(u[0].abs() < 1e-15);
        assert!((u[1] - 3.0 / (2.0 * PI)).abs() < 1e-15);
        let u0 = biot_savart(&[[-0.5, 0.2], [0.5, -0.2]], &[1.0, 1.0], 0.01, [0.0, 0.0]);
        assert!(u0[0].abs() < 1e-15 && u0[1].abs() < 1e-15);
    }

    #[test]
    fn velocity_is_divergence_free() {
        let pos = [[0.2, 0.3], [0.6, 0.5], [0.4, 0.8]];
        let g = [1.0, -0.5, 2.0];
        let h = 1e-5;
        for k in 0..50 {
            let x = [0.05 + 0.018 * k as f64, 0.9 - 0.017 * k as f64];
            let du = (biot_savart(&pos, &g, 0.01, [x[0] + h, x[1]])[0]
                - biot_savart(&pos, &g, 0.01, [x[0] - h, x[1]])[0])
                / (2.0 * h);
            let dv = (biot_savart(&pos, &g, 0.01, [x[0], x[1] + h])[1]
                - biot_savart(&pos, &g, 0.01, [x[0], x[1] - h])[1])
                / (2.0 * h);
            let scale = du.abs() + dv.abs() + 1.0;
            assert!((du + dv).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn lone_vortex_is_stationary() {
        let s = VortexState2D::new(box2(-1.0, 1.0), &[([0.1, 0.2], 2.0)], 0.05).unwrap();
        let s2 = step(&s, 0.1).unwrap();
        assert_eq!(s2.positions(), s.positions());
        assert!((s2.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn leaving_the_box_is_reported() {
        let s = VortexState2D::new(
            box2(-1.0, 1.0),
            &[([0.9, 0.0], 5.0), ([0.9, 0.05], -5.0)],
            0.001,
        )
        .unwrap();
        let r = evolve(&s, 0.01, 1000, 1, |_| {});
        assert!(matches!(r, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn pair_energy_and_moments() {
        let (g1, g2, d) = (1.5, 0.7, 0.3);
        let s =
            VortexState2D::new(box2(-1.0, 1.0), &[([0.0, 0.0], g1), ([d, 0.0], g2)], 0.01).unwrap();
        let h = pseudo_energy(&s, EnergyMode::Pairwise).unwrap();
        assert!((h + g1 * g2 * d.ln() / PI).abs() < 1e-14);
        let one = VortexState2D::new(box2(-4.0, 4.0), &[([3.0, 0.0], 2.0)], 0.01).unwrap();
        assert_eq!(moments(&one), (2.0, 18.0));
        let coincident = VortexState2D::new(
            box2(-1.0, 1.0),
            &[([0.0, 0.0], 1.0), ([0.0, 0.0], 1.0)],
            0.01,
        )
        .unwrap();
        assert!(matches!(
            pseudo_energy(&coincident, EnergyMode::Pairwise),
            Err(Error::Coincident(0, 1))
        ));
        let e1 = pseudo_energy(
            &VortexState2D::new(box2(-1.0, 1.0), &[([0.0, 0.0], 1.0)], 0.1).unwrap(),
            EnergyMode::WithSelf,
        )
        .unwrap();
        let e2 = pseudo_energy(
            &VortexState2D::new(box2(-1.0, 1.0), &[([0.0, 0.0], 2.0)], 0.1).unwrap(),
            EnergyMode::WithSelf,
        )
        .unwrap();
        assert!((e2 - 4.0 * e1).abs() < 1e-14);
    }

    #[test]
    fn one_ball_holds_all_energy() {
        let s = VortexState2D::new(
            box2(0.0, 1.0),
            &[([0.4, 0.4], 1.0), ([0.5, 0.6], 2.0), ([0.6, 0.45], 0.5)],
            0.01,
        )
        .unwrap();
        let b = BallCollection::new(vec![Ball::new(vec![0.5, 0.5], 0.3).unwrap()]).unwrap();
        let p = energy_partition(&s, &Collection::Balls(b)).unwrap();
        let h = pseudo_energy(&s, EnergyMode::WithSelf).unwrap();
        assert!((p.h_si - h).abs() < 1e-13 && p.h_ie == 0.0);
        assert_eq!(p.region_mass, vec![3.5]);
    }

    #[test]
    fn mixed_sign_is_rejected() {
        let s = VortexState2D::new(
            box2(0.0, 1.0),
            &[([0.4, 0.4], 1.0), ([0.6, 0.6], -1.0)],
            0.01,
        )
        .unwrap();
        let g = lattice_geometry(&s, 2);
        assert!(matches!(
            one_signed_chain(&s, &g, 0.25),
            Err(Error::MixedSign)
        ));
    }

    #[test]
    fn delort_kernel_examples() {
        let lin = TestFunction2D::polynomial([1.0, 2.0, -3.0, 0.0, 0.0, 0.0]);
        let quad = TestFunction2D::polynomial([0.0, 0.0, 0.0, 0.5, 0.0, 0.5]);
        let cross = TestFunction2D::polynomial([0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        for (x, y) in [([0.3, 0.1], [-0.2, 0.5]), ([1.0, 2.0], [0.0, 0.0])] {
            assert_eq!(delort_kernel(&lin, x, y).unwrap(), 0.0);
            assert!(delort_kernel(&quad, x, y).unwrap().abs() < 1e-16);
        }
        let v = delort_kernel(&cross, [1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!(delort_kernel(&cross, [1.0, 0.0], [1.0, 0.0]).is_err());
        assert!((cross.kernel_bound() - 1.0 / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn huge_delta_leaves_no_far_part() {
        let mu = AtomicMeasure::new(
            box2(0.0, 1.0),
            vec![
                Atom::scalar(vec![0.2, 0.3], 1.0),
                Atom::scalar(vec![0.7, 0.4], 0.5),
                Atom::scalar(vec![0.5, 0.9], 2.0),
            ],
            0.0,
        )
        .unwrap();
        let phi =
            TestFunction2D::new([0.5, 0.5], [0.0, 0.0, 0.0, 0.0, 1.0, 0.0], 0.1, 1.0).unwrap();
        let s = jdelta_split(&mu, &phi, 1.0, 5.0, 0.5, &standard_cutoff).unwrap();
        assert_eq!(s.i_delta, 0.0);
        let t = jdelta_split(&mu, &phi, 1.0, 0.05, 0.5, &standard_cutoff).unwrap();
        assert!((t.i_delta + t.j_delta - s.j_delta).abs() < 1e-13);
        assert!(jdelta_split(&mu, &phi, 1.0, 0.05, 0.5, &|r: f64| (-r).exp()).is_err());
    }

    #[test]
    fn bump_profile_circulation() {
        let p = DmjProfile::bump();
        let direct = crate::rearrange::gauss_legendre(0.0, 1.0, 256, |s| s * p.omega(s));
        assert!((p.gamma_inf() - direct).abs() < 1e-12);
        let mid = crate::rearrange::gauss_legendre(0.0, 0.4321, 256, |s| s * p.omega(s));
        assert!((p.gamma(0.4321) - mid).abs() < 1e-10);
        let f = DmjFamily::new(&p, 0.01).unwrap();
        let u = f.velocity([0.5, 0.0]);
        let expect = p.gamma_inf() / 0.5 / (0.01f64.ln().abs().sqrt());
        assert!(u[0].abs() < 1e-15 && (u[1] - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn defect_of_identical_sequence_vanishes() {
        let u =
            GridField::from_vec_fn(box2(0.0, 1.0), vec![8, 8], 2, |x| vec![x[0], -x[1]]).unwrap();
        let mask = vec![true; 64];
        assert_eq!(
            reduced_defect(&[u.clone(), u.clone()], &u, &mask).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_velocity_has_zero_residual() {
        let u = GridField::zeros(box2(-1.0, 1.0), vec![16, 16], 2).unwrap();
        let chi =
            TestFunction2D::new([0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 0.2, 0.8).unwrap();
        let psi = TimeProfile {
            plateau: 0.2,
            end: 1.0,
        };
        let snaps: Vec<(f64, GridField)> = (0..=4).map(|k| (k as f64 / 4.0, u.clone())).collect();
        assert_eq!(weak_residual(&snaps, &chi, &psi).unwrap().residual, 0.0);
    }
}
