//! The two representations of a density or measure: cell-averaged grid fields
//! and finite atomic measures, with mass evaluation over balls, boxes and lattices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::geometry::{
    ball_ball_volume, ball_box_measure, disk_disk_area, dist, interval_overlap, unit_ball_volume,
    Ball, Cube, Domain, DyadicCubeCover,
};

/// Subdivision used for 3D cells cut by a sphere.
const SPHERE_SUB: usize = 8;

/// Anything that assigns a nonnegative mass `|μ|(E)` to balls and boxes.
pub trait MassSource: Sync {
    fn domain(&self) -> &Domain;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// `|μ|(B)`; rejects balls not contained in the domain.
    fn ball_mass(&self, ball: &Ball) -> Result<f64>;

    /// `|μ|(lower + [0, sides))`, clipped to the domain.
    fn box_mass(&self, lower: &[f64], sides: &[f64]) -> f64;

    /// Nonzero lattice-cell masses.
    fn cell_masses(&self, cover: &DyadicCubeCover) -> BTreeMap<Vec<i64>, f64>;

    fn total_mass(&self) -> f64;

    /// Finest scale the source resolves (grid spacing, or blob radius for atoms).
    fn resolution(&self) -> f64;

    /// The source as weighted points (signed components).
    fn weighted_points(&self) -> Vec<(Vec<f64>, Vec<f64>)>;

    fn cube_mass(&self, cube: &Cube) -> f64 {
        self.box_mass(&cube.lower, &vec![cube.side; cube.dim()])
    }
}

/// Cell-averaged density on a uniform grid; `ncomp` is 1 (scalar), 2 or 3 (vector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    domain: Domain,
    shape: Vec<usize>,
    ncomp: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn new(domain: Domain, shape: Vec<usize>, ncomp: usize, data: Vec<f64>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: shape.len(),
            });
        }
        if shape.contains(&0) || !(1..=3).contains(&ncomp) {
            return Err(param(
                "shape",
                "grid sizes must be positive, ncomp in 1..=3",
            ));
        }
        let cells: usize = shape.iter().product();
        if data.len() != cells * ncomp {
            return Err(Error::Format(format!(
                "expected {} values, got {}",
                cells * ncomp,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(param("values", "all values must be finite"));
        }
        Ok(Self {
            domain,
            shape,
            ncomp,
            data,
        })
    }

    pub fn zeros(domain: Domain, shape: Vec<usize>, ncomp: usize) -> Result<Self> {
        let n: usize = shape.iter().product::<usize>() * ncomp;
        Self::new(domain, shape, ncomp, vec![0.0; n])
    }

    /// Scalar field sampled at cell centers.
    pub fn from_fn(domain: Domain, shape: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::zeros(domain, shape, 1)?;
        for c in 0..g.num_cells() {
            let x = g.cell_center(c);
            g.data[c] = f(&x);
        }
        if g.data.iter().any(|v| !v.is_finite()) {
            return Err(param("values", "sampled function is not finite"));
        }
        Ok(g)
    }

    /// Vector field sampled at cell centers.
    pub fn from_vec_fn(
        domain: Domain,
        shape: Vec<usize>,
        ncomp: usize,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut g = Self::zeros(domain, shape, ncomp)?;
        for c in 0..g.num_cells() {
            let x = g.cell_center(c);
            let v = f(&x);
            g.data[c * ncomp..(c + 1) * ncomp].copy_from_slice(&v[..ncomp]);
        }
        if g.data.iter().any(|v| !v.is_finite()) {
            return Err(param("values", "sampled function is not finite"));
        }
        Ok(g)
    }

    /// Scalar field whose cell values are the exact averages given by `avg(lower, upper)`.
    pub fn from_cell_averages(
        domain: Domain,
        shape: Vec<usize>,
        avg: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        let mut g = Self::zeros(domain, shape, 1)?;
        for c in 0..g.num_cells() {
            let (lo, hi) = g.cell_bounds(c);
            g.data[c] = avg(&lo, &hi);
        }
        if g.data.iter().any(|v| !v.is_finite()) {
            return Err(param("values", "cell averages are not finite"));
        }
        Ok(g)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn num_cells(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.extent(axis) / self.shape[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.shape.len())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.shape.len()).map(|a| self.spacing(a)).product()
    }

    /// Row-major multi-index (last axis fastest).
    pub fn multi_index(&self, mut c: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = c % self.shape[a];
            c /= self.shape[a];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn cell_center(&self, c: usize) -> Vec<f64> {
        self.multi_index(c)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.domain.lower()[a] + (i as f64 + 0.5) * self.spacing(a))
            .collect()
    }

    pub fn cell_bounds(&self, c: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.multi_index(c);
        let lo: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| self.domain.lower()[a] + i as f64 * self.spacing(a))
            .collect();
        let hi = lo
            .iter()
            .enumerate()
            .map(|(a, l)| l + self.spacing(a))
            .collect();
        (lo, hi)
    }

    pub fn value(&self, c: usize) -> &[f64] {
        &self.data[c * self.ncomp..(c + 1) * self.ncomp]
    }

    /// `|f|` at a cell (Euclidean norm for vector fields).
    pub fn magnitude(&self, c: usize) -> f64 {
        let v = self.value(c);
        if v.len() == 1 {
            v[0].abs()
        } else {
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    }

    pub fn require_scalar(&self, op: &'static str) -> Result<()> {
        if self.ncomp == 1 {
            Ok(())
        } else {
            Err(Error::NotScalar {
                op,
                ncomp: self.ncomp,
            })
        }
    }

    /// `∫ f` per component.
    pub fn integral(&self) -> Vec<f64> {
        let vol = self.cell_volume();
        let mut s = vec![0.0; self.ncomp];
        for c in 0..self.num_cells() {
            for (k, v) in self.value(c).iter().enumerate() {
                s[k] += v * vol;
            }
        }
        s
    }

    /// `∫ |f|^p`.
    pub fn lp_pow(&self, p: f64) -> f64 {
        let vol = self.cell_volume();
        (0..self.num_cells())
            .map(|c| self.magnitude(c).powf(p) * vol)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_pow(2.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut g = self.clone();
        g.data.iter_mut().for_each(|v| *v *= s);
        g
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        self.domain == other.domain && self.shape == other.shape
    }

    /// Grid cells whose index range overlaps `[lo, hi)` on `axis`.
    fn axis_range(&self, axis: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let h = self.spacing(axis);
        let l = self.domain.lower()[axis];
        let a = ((lo - l) / h).floor().max(0.0) as usize;
        let b = (((hi - l) / h).ceil().max(0.0) as usize).min(self.shape[axis]);
        a.min(b)..b
    }

    fn for_cells_in_box(&self, lo: &[f64], hi: &[f64], mut f: impl FnMut(usize, &[f64])) {
        let ranges: Vec<_> = (0..self.shape.len())
            .map(|a| self.axis_range(a, lo[a], hi[a]))
            .collect();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.start).collect();
        if ranges.iter().any(|r| r.is_empty()) {
            return;
        }
        let spacing: Vec<f64> = (0..self.shape.len()).map(|a| self.spacing(a)).collect();
        loop {
            let lower: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| self.domain.lower()[a] + i as f64 * spacing[a])
                .collect();
            f(self.linear_index(&idx), &lower);
            let mut a = idx.len();
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < ranges[a].end {
                    break;
                }
                idx[a] = ranges[a].start;
            }
        }
    }
}

impl MassSource for GridField {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn ball_mass(&self, ball: &Ball) -> Result<f64> {
        if ball.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: ball.dim(),
            });
        }
        if !self.domain.contains_ball(ball) {
            return Err(Error::BallOutsideDomain {
                center: ball.center.clone(),
                radius: ball.radius,
            });
        }
        let lo: Vec<f64> = ball.center.iter().map(|c| c - ball.radius).collect();
        let hi: Vec<f64> = ball.center.iter().map(|c| c + ball.radius).collect();
        let sides: Vec<f64> = (0..self.dim()).map(|a| self.spacing(a)).collect();
        let mut m = 0.0;
        self.for_cells_in_box(&lo, &hi, |c, lower| {
            let v = self.magnitude(c);
            if v != 0.0 {
                m += v * ball_box_measure(&ball.center, ball.radius, lower, &sides, SPHERE_SUB);
            }
        });
        Ok(m)
    }

    fn box_mass(&self, lower: &[f64], sides: &[f64]) -> f64 {
        let hi: Vec<f64> = lower.iter().zip(sides).map(|(l, s)| l + s).collect();
        let sp: Vec<f64> = (0..self.dim()).map(|a| self.spacing(a)).collect();
        let mut m = 0.0;
        self.for_cells_in_box(lower, &hi, |c, lo| {
            let v = self.magnitude(c);
            if v != 0.0 {
                let w: f64 = (0..lo.len())
                    .map(|a| interval_overlap(lo[a], lo[a] + sp[a], lower[a], hi[a]))
                    .product();
                m += v * w;
            }
        });
        m
    }

    fn cell_masses(&self, cover: &DyadicCubeCover) -> BTreeMap<Vec<i64>, f64> {
        let mut out = BTreeMap::new();
        let side = cover.side();
        let n = self.dim();
        for c in 0..self.num_cells() {
            let v = self.magnitude(c);
            if v == 0.0 {
                continue;
            }
            let (lo, hi) = self.cell_bounds(c);
            let ranges: Vec<Vec<(i64, f64)>> = (0..n)
                .map(|a| {
                    cover
                        .index_range(a, lo[a], hi[a])
                        .filter_map(|j| {
                            let cl = cover.cell(&{
                                let mut t = vec![0; n];
                                t[a] = j;
                                t
                            });
                            let w = interval_overlap(lo[a], hi[a], cl.lower[a], cl.lower[a] + side);
                            (w > 0.0).then_some((j, w))
                        })
                        .collect()
                })
                .collect();
            let mut stack = vec![(Vec::with_capacity(n), v)];
            for r in &ranges {
                let mut next = Vec::with_capacity(stack.len() * r.len());
                for (idx, w) in &stack {
                    for &(j, o) in r {
                        let mut i2 = idx.clone();
                        i2.push(j);
                        next.push((i2, w * o));
                    }
                }
                stack = next;
            }
            for (idx, w) in stack {
                *out.entry(idx).or_insert(0.0) += w;
            }
        }
        out
    }

    fn total_mass(&self) -> f64 {
        self.lp_pow(1.0)
    }

    fn resolution(&self) -> f64 {
        self.min_spacing()
    }

    fn weighted_points(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let vol = self.cell_volume();
        (0..self.num_cells())
            .filter(|&c| self.magnitude(c) != 0.0)
            .map(|c| {
                (
                    self.cell_center(c),
                    self.value(c).iter().map(|v| v * vol).collect(),
                )
            })
            .collect()
    }
}

/// A point mass with scalar or vector weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Vec<f64>,
    pub weight: Vec<f64>,
}

impl Atom {
    pub fn scalar(position: Vec<f64>, w: f64) -> Self {
        Self {
            position,
            weight: vec![w],
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.weight.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Finite sum of point masses, optionally spread as uniform blobs of radius `blob`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    domain: Domain,
    atoms: Vec<Atom>,
    blob: f64,
}

impl AtomicMeasure {
    pub fn new(domain: Domain, atoms: Vec<Atom>, blob: f64) -> Result<Self> {
        if !(blob >= 0.0 && blob.is_finite()) {
            return Err(param("blob", "must be finite and nonnegative"));
        }
        for a in &atoms {
            if a.position.len() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    got: a.position.len(),
                });
            }
            if !domain.contains_point(&a.position) {
                return Err(Error::Domain(format!(
                    "atom at {:?} lies outside the box",
                    a.position
                )));
            }
            if a.weight.is_empty() || a.weight.len() > 3 || a.weight.iter().any(|w| !w.is_finite())
            {
                return Err(param("weight", "need 1..=3 finite components"));
            }
        }
        Ok(Self {
            domain,
            atoms,
            blob,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn blob(&self) -> f64 {
        self.blob
    }

    pub fn with_blob(&self, blob: f64) -> Result<Self> {
        Self::new(self.domain.clone(), self.atoms.clone(), blob)
    }

    fn footprint_volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.blob.powi(self.dim() as i32)
    }

    /// Fraction of atom `a`'s blob inside `ball`.
    fn ball_fraction(&self, a: &Atom, ball: &Ball) -> f64 {
        let d = dist(&a.position, &ball.center);
        if self.blob == 0.0 {
            return if d <= ball.radius { 1.0 } else { 0.0 };
        }
        let overlap = match self.dim() {
            1 => interval_overlap(
                a.position[0] - self.blob,
                a.position[0] + self.blob,
                ball.center[0] - ball.radius,
                ball.center[0] + ball.radius,
            ),
            2 => disk_disk_area(self.blob, ball.radius, d),
            _ => ball_ball_volume(self.blob, ball.radius, d),
        };
        (overlap / self.footprint_volume()).min(1.0)
    }

    fn box_fraction(&self, a: &Atom, lower: &[f64], sides: &[f64]) -> f64 {
        if self.blob == 0.0 {
            let inside = (0..lower.len())
                .all(|k| a.position[k] >= lower[k] && a.position[k] < lower[k] + sides[k]);
            return if inside { 1.0 } else { 0.0 };
        }
        (ball_box_measure(&a.position, self.blob, lower, sides, 16) / self.footprint_volume())
            .min(1.0)
    }
}

impl MassSource for AtomicMeasure {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn ball_mass(&self, ball: &Ball) -> Result<f64> {
        if ball.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: ball.dim(),
            });
        }
        if !self.domain.contains_ball(ball) {
            return Err(Error::BallOutsideDomain {
                center: ball.center.clone(),
                radius: ball.radius,
            });
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| a.magnitude() * self.ball_fraction(a, ball))
            .sum())
    }

    fn box_mass(&self, lower: &[f64], sides: &[f64]) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.magnitude() * self.box_fraction(a, lower, sides))
            .sum()
    }

    fn cell_masses(&self, cover: &DyadicCubeCover) -> BTreeMap<Vec<i64>, f64> {
        let mut out = BTreeMap::new();
        let side = cover.side();
        for a in &self.atoms {
            let m = a.magnitude();
            if m == 0.0 {
                continue;
            }
            if self.blob == 0.0 {
                *out.entry(cover.cell_of(&a.position)).or_insert(0.0) += m;
                continue;
            }
            let n = self.dim();
            let ranges: Vec<Vec<i64>> = (0..n)
                .map(|k| {
                    cover
                        .index_range(k, a.position[k] - self.blob, a.position[k] + self.blob)
                        .collect()
                })
                .collect();
            let mut idx = vec![Vec::new()];
            for r in &ranges {
                idx = idx
                    .into_iter()
                    .flat_map(|p| {
                        r.iter().map(move |&j| {
                            let mut q = p.clone();
                            q.push(j);
                            q
                        })
                    })
                    .collect();
            }
            for i in idx {
                let cube = cover.cell(&i);
                let f = self.box_fraction(a, &cube.lower, &vec![side; n]);
                if f > 0.0 {
                    *out.entry(i).or_insert(0.0) += m * f;
                }
            }
        }
        out
    }

    fn total_mass(&self) -> f64 {
        self.atoms.iter().map(Atom::magnitude).sum()
    }

    fn resolution(&self) -> f64 {
        self.blob
    }

    fn weighted_points(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.atoms
            .iter()
            .map(|a| (a.position.clone(), a.weight.clone()))
            .collect()
    }
}

/// Unnormalized bump `exp(-1/(1-|x|²))` on the unit ball.
pub fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Convolution with `η_ε`, the unit-mass bump of radius `eps`, onto the grid of `target`.
///
/// Each source point's stencil is normalized to unit discrete mass so total mass is preserved.
pub fn mollify(src: &dyn MassSource, eps: f64, target: &GridField) -> Result<GridField> {
    let h = target.min_spacing();
    if !(eps >= 2.0 * h) {
        return Err(Error::Unresolvable { eps, h });
    }
    if src.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: src.dim(),
        });
    }
    let points = src.weighted_points();
    let ncomp = points.first().map_or(1, |p| p.1.len());
    let mut out = GridField::zeros(target.domain().clone(), target.shape().to_vec(), ncomp)?;
    let vol = out.cell_volume();
    for (x, w) in points {
        let lo: Vec<f64> = x.iter().map(|v| v - eps).collect();
        let hi: Vec<f64> = x.iter().map(|v| v + eps).collect();
        let mut stencil = Vec::new();
        out.for_cells_in_box(&lo, &hi, |c, _| {
            let cx = out.cell_center(c);
            let r2 = crate::geometry::dist2(&cx, &x) / (eps * eps);
            let k = bump(r2);
            if k > 0.0 {
                stencil.push((c, k));
            }
        });
        let norm: f64 = stencil.iter().map(|s| s.1).sum();
        if norm == 0.0 {
            continue;
        }
        for (c, k) in stencil {
            for (j, wj) in w.iter().enumerate() {
                out.data[c * ncomp + j] += wj * k / norm / vol;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square(n: usize) -> GridField {
        GridField::from_fn(Domain::cube(2, 0.0, 1.0).unwrap(), vec![n, n], |_| 1.0).unwrap()
    }

    #[test]
    fn zero_field_has_zero_ball_mass() {
        let g = GridField::zeros(Domain::cube(2, 0.0, 1.0).unwrap(), vec![8, 8], 1).unwrap();
        let b = Ball::new(vec![0.5, 0.5], 0.2).unwrap();
        assert_eq!(g.ball_mass(&b).unwrap(), 0.0);
    }

    #[test]
    fn constant_field_ball_mass_is_disk_area() {
        let g = unit_square(32);
        let b = Ball::new(vec![0.43, 0.51], 0.21).unwrap();
        let m = g.ball_mass(&b).unwrap();
        assert!((m - PI * 0.21 * 0.21).abs() < 1e-12, "{m}");
    }

    #[test]
    fn atoms_in_ball() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let mu = AtomicMeasure::new(
            d,
            vec![
                Atom::scalar(vec![0.0, 0.0], 1.0),
                Atom::scalar(vec![0.3, 0.0], 2.0),
                Atom::scalar(vec![0.9, 0.0], 5.0),
            ],
            0.0,
        )
        .unwrap();
        let b = Ball::new(vec![0.0, 0.0], 0.5).unwrap();
        assert_eq!(mu.ball_mass(&b).unwrap(), 3.0);
    }

    #[test]
    fn ball_outside_domain_is_rejected() {
        let g = unit_square(4);
        let b = Ball::new(vec![0.05, 0.5], 0.2).unwrap();
        assert!(matches!(
            g.ball_mass(&b),
            Err(Error::BallOutsideDomain { .. })
        ));
    }

    #[test]
    fn single_dirac_has_one_cell() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let mu =
            AtomicMeasure::new(d.clone(), vec![Atom::scalar(vec![0.0, 0.0], 1.0)], 0.0).unwrap();
        for level in 0..6 {
            let cm = mu.cell_masses(&DyadicCubeCover::unshifted(&d, level));
            assert_eq!(cm.len(), 1);
            assert_eq!(*cm.values().next().unwrap(), 1.0);
        }
    }

    #[test]
    fn constant_field_level_one_quarters() {
        let g = unit_square(16);
        let cm = g.cell_masses(&DyadicCubeCover::unshifted(g.domain(), 1));
        assert_eq!(cm.len(), 4);
        for m in cm.values() {
            assert!((m - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_sqrt_dyadic_masses() {
        // exact averages of x^{-1/2}: mass over [2^-j, 2^-j+1] is 2(√2-1)·2^{-j/2}
        let d = Domain::cube(1, 0.0, 1.0).unwrap();
        let g = GridField::from_cell_averages(d.clone(), vec![1 << 12], |lo, hi| {
            2.0 * (hi[0].sqrt() - lo[0].sqrt()) / (hi[0] - lo[0])
        })
        .unwrap();
        let c2 = 2.0 * (2f64.sqrt() - 1.0);
        for j in 1..10 {
            let s = 2f64.powi(-j);
            let m = g.box_mass(&[s], &[s]);
            assert!((m - c2 * s.sqrt()).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn mollified_dirac_has_unit_mass() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let mu =
            AtomicMeasure::new(d.clone(), vec![Atom::scalar(vec![0.1, -0.2], 1.0)], 0.0).unwrap();
        let target = GridField::zeros(d, vec![64, 64], 1).unwrap();
        let f = mollify(&mu, 0.1, &target).unwrap();
        assert!((f.integral()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unresolvable_mollifier_rejected() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let mu =
            AtomicMeasure::new(d.clone(), vec![Atom::scalar(vec![0.0, 0.0], 1.0)], 0.0).unwrap();
        let target = GridField::zeros(d, vec![16, 16], 1).unwrap();
        assert!(matches!(
            mollify(&mu, 0.1, &target),
            Err(Error::Unresolvable { .. })
        ));
    }

    #[test]
    fn two_diracs_give_disjoint_bumps() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let mu = AtomicMeasure::new(
            d.clone(),
            vec![
                Atom::scalar(vec![-0.5, 0.0], 2.0),
                Atom::scalar(vec![0.5, 0.0], 3.0),
            ],
            0.0,
        )
        .unwrap();
        let target = GridField::zeros(d, vec![64, 64], 1).unwrap();
        let f = mollify(&mu, 0.2, &target).unwrap();
        let left = f
            .ball_mass(&Ball::new(vec![-0.5, 0.0], 0.3).unwrap())
            .unwrap();
        let right = f
            .ball_mass(&Ball::new(vec![0.5, 0.0], 0.3).unwrap())
            .unwrap();
        assert!((left - 2.0).abs() < 1e-9 && (right - 3.0).abs() < 1e-9);
    }

    #[test]
    fn mollified_field_keeps_mass_in_large_ball() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let f = GridField::from_fn(d, vec![64, 64], |x| {
            if x[0].abs() < 0.2 && x[1].abs() < 0.2 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let m = mollify(&f, 0.1, &f).unwrap();
        let big = m
            .ball_mass(&Ball::new(vec![0.0, 0.0], 0.9).unwrap())
            .unwrap();
        assert!((big - f.total_mass()).abs() < 1e-9 * f.total_mass());
    }

    #[test]
    fn blob_mass_apportioned_by_overlap() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let mu = AtomicMeasure::new(d, vec![Atom::scalar(vec![0.0, 0.0], 1.0)], 0.1).unwrap();
        let half = mu.box_mass(&[0.0, -1.0], &[1.0, 2.0]);
        assert!((half - 0.5).abs() < 1e-12);
        let inner = mu
            .ball_mass(&Ball::new(vec![0.0, 0.0], 0.05).unwrap())
            .unwrap();
        assert!((inner - 0.25).abs() < 1e-12);
    }
}
