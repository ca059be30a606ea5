//! Domains, balls, cube lattices and exact overlap measures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Default upper bound on admissible radii.
pub const DEFAULT_R0: f64 = 0.25;

/// Axis-aligned box in one, two or three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || lower.len() > 3 {
            return Err(Error::Domain(format!(
                "need matching bounds in 1..=3 dimensions, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Domain(format!("bad axis [{a}, {b}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// The reference box `[-2^k0, 2^k0]^dim`.
    pub fn reference(dim: usize, k0: i32) -> Result<Self> {
        let s = 2f64.powi(k0);
        Self::cube(dim, -s, s)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn max_extent(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a)).fold(0.0, f64::max)
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Closed containment of a ball, with a relative slack of 1e-12.
    pub fn contains_ball(&self, ball: &Ball) -> bool {
        let tol = 1e-12 * self.max_extent();
        ball.dim() == self.dim()
            && (0..self.dim()).all(|a| {
                ball.center[a] - ball.radius >= self.lower[a] - tol
                    && ball.center[a] + ball.radius <= self.upper[a] + tol
            })
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.extent(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(param("radius", format!("must be positive, got {radius}")));
        }
        if center.is_empty() || center.len() > 3 || center.iter().any(|c| !c.is_finite()) {
            return Err(param("center", "need 1..=3 finite coordinates"));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist2(&self.center, x) <= self.radius * self.radius
    }

    /// Strict disjointness: center distance exceeds the sum of radii.
    pub fn disjoint(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) > self.radius + other.radius
    }
}

/// Pairwise disjoint family of balls.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BallCollection {
    balls: Vec<Ball>,
}

impl BallCollection {
    pub fn new(balls: Vec<Ball>) -> Result<Self> {
        for i in 0..balls.len() {
            for j in 0..i {
                if balls[i].dim() != balls[j].dim() {
                    return Err(Error::DimensionMismatch {
                        expected: balls[j].dim(),
                        got: balls[i].dim(),
                    });
                }
                if !balls[i].disjoint(&balls[j]) {
                    return Err(Error::Overlap(j, i));
                }
            }
        }
        Ok(Self { balls })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn into_inner(self) -> Vec<Ball> {
        self.balls
    }

    /// Index of the ball holding `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.balls.iter().position(|b| b.contains(x))
    }
}

/// Axis-aligned cube `lower + [0, side)^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub lower: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .all(|(v, l)| *v >= *l && *v < *l + self.side)
    }

    pub fn disjoint(&self, other: &Cube) -> bool {
        (0..self.dim()).any(|a| {
            self.lower[a] + self.side <= other.lower[a]
                || other.lower[a] + other.side <= self.lower[a]
        })
    }
}

/// Disjoint cubes of possibly different sizes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CubeCollection {
    cubes: Vec<Cube>,
}

impl CubeCollection {
    pub fn new(cubes: Vec<Cube>) -> Result<Self> {
        for i in 0..cubes.len() {
            if !(cubes[i].side > 0.0) {
                return Err(param("side", "cube sides must be positive"));
            }
            for j in 0..i {
                if !cubes[i].disjoint(&cubes[j]) {
                    return Err(Error::Overlap(j, i));
                }
            }
        }
        Ok(Self { cubes })
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    /// The intervals `[lo + 2^-j L, lo + 2^-j+1 L)` for `j` in `first..first+count`,
    /// accumulating toward the lower end of a one-dimensional domain.
    pub fn dyadic_toward_lower(domain: &Domain, first: u32, count: u32) -> Result<Self> {
        if domain.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: domain.dim(),
            });
        }
        let len = domain.extent(0);
        let lo = domain.lower()[0];
        let cubes = (first..first + count)
            .map(|j| {
                let side = len * 2f64.powi(-(j as i32));
                Cube {
                    lower: vec![lo + side],
                    side,
                }
            })
            .collect();
        Self::new(cubes)
    }
}

/// Shifted dyadic lattice of cubes with side `2^-level * side(C_0)`.
///
/// `C_0` is the cube anchored at the domain's lower corner whose side is the
/// largest domain extent. `shift` is measured in units of the cell side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCubeCover {
    origin: Vec<f64>,
    root_side: f64,
    level: u32,
    shift: Vec<f64>,
}

impl DyadicCubeCover {
    pub fn new(domain: &Domain, level: u32, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: shift.len(),
            });
        }
        if shift.iter().any(|s| !(0.0..1.0).contains(s)) {
            return Err(param("shift", "components must lie in [0, 1)"));
        }
        Ok(Self {
            origin: domain.lower().to_vec(),
            root_side: domain.max_extent(),
            level,
            shift,
        })
    }

    pub fn unshifted(domain: &Domain, level: u32) -> Self {
        Self {
            origin: domain.lower().to_vec(),
            root_side: domain.max_extent(),
            level,
            shift: vec![0.0; domain.dim()],
        }
    }

    /// All `2^N` half-shifted covers at `level`.
    pub fn corner_shifts(domain: &Domain, level: u32) -> Vec<Self> {
        let n = domain.dim();
        (0..1usize << n)
            .map(|mask| {
                let shift = (0..n)
                    .map(|a| if mask >> a & 1 == 1 { 0.5 } else { 0.0 })
                    .collect();
                Self {
                    origin: domain.lower().to_vec(),
                    root_side: domain.max_extent(),
                    level,
                    shift,
                }
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn side(&self) -> f64 {
        self.root_side * 2f64.powi(-(self.level as i32))
    }

    /// Cover with the same anchor but an explicit side (used for `2δ` nets).
    pub fn with_side(domain: &Domain, side: f64) -> Self {
        let level = 0;
        Self {
            origin: domain.lower().to_vec(),
            root_side: side,
            level,
            shift: vec![0.0; domain.dim()],
        }
    }

    pub fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        let side = self.side();
        x.iter()
            .enumerate()
            .map(|(a, v)| ((v - self.origin[a]) / side - self.shift[a]).floor() as i64)
            .collect()
    }

    pub fn cell(&self, index: &[i64]) -> Cube {
        let side = self.side();
        Cube {
            lower: index
                .iter()
                .enumerate()
                .map(|(a, &j)| self.origin[a] + (j as f64 + self.shift[a]) * side)
                .collect(),
            side,
        }
    }

    /// Range of cell indices along `axis` overlapping `[lo, hi)`.
    pub fn index_range(&self, axis: usize, lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
        let side = self.side();
        let a = ((lo - self.origin[axis]) / side - self.shift[axis]).floor() as i64;
        let b = ((hi - self.origin[axis]) / side - self.shift[axis]).ceil() as i64 - 1;
        a..=b.max(a)
    }
}

pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Length of `[a0, a1] ∩ [b0, b1]`.
pub fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// `∫_a^b clamp(h, -s(t), s(t)) dt` with `s(t) = sqrt(r² - t²)`, for `-r <= a <= b <= r`.
fn clamped_chord_integral(a: f64, b: f64, h: f64, r: f64) -> f64 {
    let prim = |t: f64| {
        let t = t.clamp(-r, r);
        0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).asin())
    };
    let semi = |lo: f64, hi: f64| if hi > lo { prim(hi) - prim(lo) } else { 0.0 };
    let sgn = h.signum();
    if h.abs() >= r {
        return sgn * semi(a, b);
    }
    let th = (r * r - h * h).sqrt();
    // |t| < th: clamp is h; |t| >= th: clamp is sign(h)*s(t)
    let mid = interval_overlap(a, b, -th, th) * h;
    let left = semi(a, b.min(-th));
    let right = semi(a.max(th), b);
    mid + sgn * (left + right)
}

/// Exact area of the disk `B_r(c)` intersected with `[x0,x1]×[y0,y1]`.
pub fn disk_rect_area(c: [f64; 2], r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (a, b) = ((x0 - c[0]).max(-r), (x1 - c[0]).min(r));
    if b <= a {
        return 0.0;
    }
    let (ylo, yhi) = (y0 - c[1], y1 - c[1]);
    if yhi <= ylo {
        return 0.0;
    }
    (clamped_chord_integral(a, b, yhi, r) - clamped_chord_integral(a, b, ylo, r)).max(0.0)
}

/// Area of the lens `B_r1 ∩ B_r2` at center distance `d`.
pub fn disk_disk_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return PI * r1.min(r2).powi(2);
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.sqrt()
}

/// Volume of the lens `B_r1 ∩ B_r2` in three dimensions at center distance `d`.
pub fn ball_ball_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return 4.0 / 3.0 * PI * r1.min(r2).powi(3);
    }
    PI * (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2))
        / (12.0 * d)
}

/// Measure of `B_r(c) ∩ cell` in dimension 1–3, where the cell is `lower + [0, side)` per axis
/// with possibly different sides. Exact in 1D and 2D; in 3D cells straddling the sphere are
/// resolved with a deterministic `sub³` midpoint subdivision.
pub fn ball_box_measure(center: &[f64], r: f64, lower: &[f64], sides: &[f64], sub: usize) -> f64 {
    match center.len() {
        1 => interval_overlap(center[0] - r, center[0] + r, lower[0], lower[0] + sides[0]),
        2 => disk_rect_area(
            [center[0], center[1]],
            r,
            lower[0],
            lower[0] + sides[0],
            lower[1],
            lower[1] + sides[1],
        ),
        3 => {
            // distance bounds from center to the box
            let mut near = 0.0;
            let mut far = 0.0;
            for a in 0..3 {
                let lo = lower[a] - center[a];
                let hi = lo + sides[a];
                let n = if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    0.0
                };
                near += n * n;
                far += lo.abs().max(hi.abs()).powi(2);
            }
            let vol = sides[0] * sides[1] * sides[2];
            if near >= r * r {
                0.0
            } else if far <= r * r {
                vol
            } else {
                let mut inside = 0usize;
                let s = sub.max(1);
                for i in 0..s {
                    let x = lower[0] + (i as f64 + 0.5) / s as f64 * sides[0] - center[0];
                    for j in 0..s {
                        let y = lower[1] + (j as f64 + 0.5) / s as f64 * sides[1] - center[1];
                        for k in 0..s {
                            let z = lower[2] + (k as f64 + 0.5) / s as f64 * sides[2] - center[2];
                            if x * x + y * y + z * z <= r * r {
                                inside += 1;
                            }
                        }
                    }
                }
                vol * inside as f64 / (s * s * s) as f64
            }
        }
        d => panic!("unsupported dimension {d}"),
    }
}
