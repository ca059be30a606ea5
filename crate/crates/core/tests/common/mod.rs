#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regladder::field::GridField;
use regladder::geometry::{Ball, BallCollection, Domain};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(dim: usize) -> Domain {
    Domain::cube(dim, 0.0, 1.0).unwrap()
}

/// Nonnegative sum of a few Gaussian bumps plus a small floor.
pub struct BumpProfile {
    bumps: Vec<(Vec<f64>, f64, f64)>,
    floor: f64,
}

impl BumpProfile {
    pub fn random(r: &mut impl Rng, dim: usize, count: usize) -> Self {
        let bumps = (0..count)
            .map(|_| {
                let c: Vec<f64> = (0..dim).map(|_| r.gen_range(0.1..0.9)).collect();
                (c, r.gen_range(0.03..0.2), r.gen_range(0.2..2.0))
            })
            .collect();
        Self {
            bumps,
            floor: r.gen_range(0.0..0.2),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.floor
            + self
                .bumps
                .iter()
                .map(|(c, w, a)| {
                    let d2: f64 = c.iter().zip(x).map(|(c, x)| (c - x) * (c - x)).sum();
                    a * (-d2 / (w * w)).exp()
                })
                .sum::<f64>()
    }

    pub fn grid(&self, dim: usize, n: usize) -> GridField {
        GridField::from_fn(unit(dim), vec![n; dim], |x| self.eval(x)).unwrap()
    }
}

/// Random grid with independent cell values, a fraction of them zero.
pub fn rough_grid(r: &mut impl Rng, dim: usize, n: usize) -> GridField {
    let cells = n.pow(dim as u32);
    let data = (0..cells)
        .map(|_| {
            if r.gen_bool(0.3) {
                0.0
            } else {
                r.gen_range(0.0f64..1.0).powi(3) * 10.0
            }
        })
        .collect();
    GridField::new(unit(dim), vec![n; dim], 1, data).unwrap()
}

/// Disjoint balls inside the unit cube by rejection sampling.
pub fn random_balls(r: &mut impl Rng, dim: usize, count: usize, rmax: f64) -> BallCollection {
    let mut balls: Vec<Ball> = Vec::new();
    let mut tries = 0;
    while balls.len() < count && tries < 10_000 {
        tries += 1;
        let rad = r.gen_range(0.2 * rmax..rmax);
        let c: Vec<f64> = (0..dim).map(|_| r.gen_range(rad..1.0 - rad)).collect();
        let b = Ball::new(c, rad).unwrap();
        if balls.iter().all(|o| o.disjoint(&b)) {
            balls.push(b);
        }
    }
    BallCollection::new(balls).unwrap()
}

pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:>2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Sum of Gaussian bumps (signed amplitudes) well inside the unit box, no floor.
pub fn smooth_bumps(r: &mut impl Rng, dim: usize, n: usize) -> GridField {
    let count = r.gen_range(1..5);
    let bumps: Vec<(Vec<f64>, f64, f64)> = (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..dim).map(|_| r.gen_range(0.3..0.7)).collect();
            (c, r.gen_range(0.04..0.12), r.gen_range(-2.0..2.0))
        })
        .collect();
    GridField::from_fn(unit(dim), vec![n; dim], |x| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let d2: f64 = c.iter().zip(x).map(|(c, x)| (c - x) * (c - x)).sum();
                a * (-d2 / (w * w)).exp()
            })
            .sum()
    })
    .unwrap()
}
