//! Decreasing rearrangement `f*`, its running average `f**`, and the
//! Lorentz-Zygmund functionals built on them.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{param, Error, Result};
use crate::field::GridField;

/// Values above this are reported as "not in the space".
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Nonincreasing step function: `values[i]` on `(breaks[i-1], breaks[i]]` with `breaks[-1] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRearrangement {
    breaks: Vec<f64>,
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl StepRearrangement {
    pub fn from_steps(widths: &[f64], values: &[f64]) -> Result<Self> {
        if widths.len() != values.len() || widths.is_empty() {
            return Err(param("steps", "need matching nonempty widths and values"));
        }
        if widths.iter().any(|w| !(*w > 0.0)) || values.iter().any(|v| !(*v >= 0.0)) {
            return Err(param(
                "steps",
                "widths must be positive, values nonnegative",
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(param("steps", "values must be nonincreasing"));
        }
        let mut breaks = Vec::with_capacity(widths.len());
        let mut prefix = Vec::with_capacity(widths.len());
        let (mut s, mut f) = (0.0, 0.0);
        for (w, v) in widths.iter().zip(values) {
            s += w;
            f += w * v;
            breaks.push(s);
            prefix.push(f);
        }
        Ok(Self {
            breaks,
            values: values.to_vec(),
            prefix,
        })
    }

    pub fn measure(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.breaks[i - 1]
        }
    }

    fn prefix_before(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.prefix[i - 1]
        }
    }

    fn segment(&self, s: f64) -> usize {
        self.breaks
            .partition_point(|&b| b < s)
            .min(self.breaks.len() - 1)
    }

    /// `f*(s)` for `0 < s <= |Ω|`.
    pub fn f_star(&self, s: f64) -> f64 {
        self.values[self.segment(s)]
    }

    /// `F(t) = ∫_0^t f*`.
    pub fn primitive(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= self.measure() * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange(format!("t = {t}")));
        }
        let t = t.min(self.measure());
        let i = self.segment(t);
        Ok(self.prefix_before(i) + self.values[i] * (t - self.start(i)))
    }

    /// `f**(s) = F(s)/s`.
    pub fn f_star_star(&self, s: f64) -> Result<f64> {
        Ok(self.primitive(s)? / s)
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

/// Sort cell magnitudes in decreasing order, each carrying the cell measure.
pub fn rearrange(f: &GridField) -> Result<StepRearrangement> {
    f.require_scalar("rearrange")?;
    let mut v: Vec<f64> = (0..f.num_cells()).map(|c| f.magnitude(c)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    // merge runs of equal values
    let vol = f.cell_volume();
    let mut widths: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for x in v {
        match values.last() {
            Some(&last) if last == x => *widths.last_mut().unwrap() += vol,
            _ => {
                values.push(x);
                widths.push(vol);
            }
        }
    }
    StepRearrangement::from_steps(&widths, &values)
}

/// Which profile the functional is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// `f*`: the spaces `L^{pq,α}`.
    Star,
    /// `f**`: the spaces `L^{(pq,α)}`.
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub divergent: bool,
}

impl NormValue {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            divergent: !value.is_finite() || value > OVERFLOW_GUARD,
        }
    }
}

fn weight(s: f64, p: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        s.powf(1.0 / p)
    } else {
        s.powf(1.0 / p) * s.ln().abs().powf(alpha)
    }
}

/// `∫_a^b s^{β-1} |ln s|^γ ds` for `0 <= a < b <= 1`.
fn log_power_integral(a: f64, b: f64, beta: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return (b.powf(beta) - a.powf(beta)) / beta;
    }
    // u = -ln s, integrand e^{-βu} u^γ; scaled incomplete gamma in x = βu
    let shape = gamma + 1.0;
    let x_lo = -b.ln() * beta;
    let x_hi = if a == 0.0 {
        f64::INFINITY
    } else {
        -a.ln() * beta
    };
    let scale = (ln_gamma(shape) - shape * beta.ln()).exp();
    let lower = |x: f64| if x <= 0.0 { 0.0 } else { gamma_lr(shape, x) };
    let upper = |x: f64| if x <= 0.0 { 1.0 } else { gamma_ur(shape, x) };
    let diff = if x_lo > shape {
        let q_hi = if x_hi.is_finite() { upper(x_hi) } else { 0.0 };
        upper(x_lo) - q_hi
    } else {
        let p_hi = if x_hi.is_finite() { lower(x_hi) } else { 1.0 };
        p_hi - lower(x_lo)
    };
    scale * diff.max(0.0)
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss-Legendre on `[a, b]` with `pieces` subintervals.
pub(crate) fn gauss_legendre(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut s = 0.0;
    for k in 0..pieces {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        s += GL8.iter().map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r;
    }
    s
}

/// `(∫_0^{|Ω|} [s^{1/p} |log s|^α g(s)]^q ds/s)^{1/q}` with `g = f*` or `f**`;
/// for `q = ∞` the supremum `sup_s s^{1/p}|log s|^α g(s)`.
pub fn lorentz_zygmund_norm(
    r: &StepRearrangement,
    p: f64,
    q: f64,
    alpha: f64,
    profile: Profile,
) -> Result<NormValue> {
    if !(p >= 1.0) {
        return Err(param("p", format!("need p >= 1, got {p}")));
    }
    if !(q >= 1.0) {
        return Err(param("q", format!("need q >= 1, got {q}")));
    }
    if !(alpha >= 0.0) {
        return Err(param("alpha", "need alpha >= 0"));
    }
    if alpha > 0.0 && r.measure() > 1.0 + 1e-12 {
        return Err(param(
            "domain",
            format!("log weights need |Ω| <= 1, got {}", r.measure()),
        ));
    }
    if r.total() == 0.0 {
        return Ok(NormValue::new(0.0));
    }
    let value = if q.is_infinite() {
        sup_branch(r, p, alpha, profile)
    } else {
        integral_branch(r, p, q, alpha, profile).powf(1.0 / q)
    };
    Ok(NormValue::new(value))
}

fn sup_branch(r: &StepRearrangement, p: f64, alpha: f64, profile: Profile) -> f64 {
    let s_crit = (-alpha * p).exp();
    let mut best: f64 = 0.0;
    for i in 0..r.values.len() {
        let (a, b) = (r.start(i), r.breaks[i]);
        match profile {
            Profile::Star => {
                let v = r.values[i];
                let mut w = weight(b, p, alpha);
                if a > 0.0 {
                    w = w.max(weight(a, p, alpha));
                }
                if alpha > 0.0 && s_crit > a && s_crit < b {
                    w = w.max(weight(s_crit, p, alpha));
                }
                best = best.max(v * w);
            }
            Profile::Maximal => {
                let f0 = r.prefix_before(i);
                let v = r.values[i];
                let g = |s: f64| weight(s, p, alpha) * (f0 + v * (s - a)) / s;
                let lo = if a > 0.0 { a } else { b * 1e-12 };
                let n = 64;
                for k in 0..=n {
                    let s = lo * (b / lo).powf(k as f64 / n as f64);
                    best = best.max(g(s));
                }
            }
        }
    }
    best
}

fn integral_branch(r: &StepRearrangement, p: f64, q: f64, alpha: f64, profile: Profile) -> f64 {
    let beta = q / p;
    let gamma = alpha * q;
    let mut total = 0.0;
    for i in 0..r.values.len() {
        let (a, b) = (r.start(i), r.breaks[i].min(1.0_f64.max(r.measure())));
        let v = r.values[i];
        let constant_part = match profile {
            Profile::Star => true,
            Profile::Maximal => i == 0,
        };
        if constant_part {
            if v > 0.0 {
                total += v.powf(q) * log_power_integral_any(a, b, beta, gamma);
            }
            continue;
        }
        let f0 = r.prefix_before(i);
        // integrate in u = ln s over [ln a, ln b]
        let (ua, ub) = (a.ln(), b.ln());
        let pieces = ((ub - ua) / 0.25).ceil().max(1.0) as usize;
        total += gauss_legendre(ua, ub, pieces, |u| {
            let s = u.exp();
            let g = (f0 + v * (s - a)) / s;
            (weight(s, p, alpha) * g).powf(q)
        });
    }
    total
}

/// As `log_power_integral`, also valid when the interval extends past 1 (α = 0 only).
fn log_power_integral_any(a: f64, b: f64, beta: f64, gamma: f64) -> f64 {
    if gamma == 0.0 || b <= 1.0 {
        log_power_integral(a, b, beta, gamma)
    } else {
        log_power_integral(a, 1.0, beta, gamma)
            + gauss_legendre(1.0, b, 16, |s| {
                s.powf(beta - 1.0) * s.ln().abs().powf(gamma)
            })
    }
}

/// `L^p(log L)^α`, identified with the `q = p` branch `L^{pp,α}`.
pub fn lp_log_norm(r: &StepRearrangement, p: f64, alpha: f64) -> Result<NormValue> {
    lorentz_zygmund_norm(r, p, p, alpha, Profile::Star)
}
