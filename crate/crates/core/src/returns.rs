//! Laws for the project return rate R on the open interval (0, 1).
//!
//! Every expectation in the crate goes through [`ReturnDistribution::expect`]:
//! discrete laws are enumerated in ascending atom order, continuous laws are
//! integrated with Gauss–Legendre on each smooth piece of the integrand. The
//! caller passes the kink locations of its payoff transform so that no piece
//! straddles a non-smooth point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

/// Laws natively on \[0, 1\] are pulled inside to \[ε, 1 − ε\].
pub const SUPPORT_EPS: f64 = 1e-9;

/// Probabilities of a finite law must sum to one within this.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Atoms closer than this are merged into one.
pub const ATOM_MERGE_TOL: f64 = 1e-14;

/// A finitely supported law on the real line.
///
/// Atoms are kept in ascending order with strictly positive probabilities.
/// Used for return laws, for payoff pushforwards (which may sit at 0) and
/// for zero-mean noise (which has negative atoms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDist {
    atoms: Vec<(f64, f64)>,
}

impl FiniteDist {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::invalid("finite law needs at least one atom"));
        }
        for &(x, p) in &atoms {
            if !x.is_finite() {
                return Err(Error::invalid(format!("atom value {x} is not finite")));
            }
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!(
                    "atom at {x} has probability {p}; probabilities must be strictly positive"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            atoms: merge_sorted(atoms),
        })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new([(x, 1.0)])
    }

    /// Two equally likely atoms at ±scale.
    pub fn symmetric_pair(scale: f64) -> Result<Self> {
        Self::new([(-scale, 0.5), (scale, 0.5)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }

    /// Σ p·f(x) in ascending atom order.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(x, p)| p * f(x)).sum()
    }

    pub fn try_expect<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for &(x, p) in &self.atoms {
            let v = f(x)?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    abscissa: x,
                    value: v,
                });
            }
            acc += p * v;
        }
        Ok(acc)
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    /// Pushforward through `f`, merging coincident images.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(x, p)| (f(x), p)))
    }
}

fn merge_sorted(atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    // (weighted value sum, probability) per merged group keeps the mean intact
    let mut group: Option<(f64, f64, f64)> = None; // (first value, Σ p·x, Σ p)
    for (x, p) in atoms {
        match group {
            Some((first, sx, sp)) if (x - first).abs() <= ATOM_MERGE_TOL => {
                group = Some((first, sx + p * x, sp + p));
            }
            Some((first, sx, sp)) => {
                out.push((merged_value(first, sx, sp), sp));
                group = Some((x, p * x, p));
            }
            None => group = Some((x, p * x, p)),
        }
    }
    if let Some((first, sx, sp)) = group {
        out.push((merged_value(first, sx, sp), sp));
    }
    out
}

fn merged_value(first: f64, sx: f64, sp: f64) -> f64 {
    let v = sx / sp;
    if (v - first).abs() <= ATOM_MERGE_TOL {
        v
    } else {
        first
    }
}

/// The family and parameters of a return law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Law {
    Degenerate { r0: f64 },
    Discrete { dist: FiniteDist },
    Uniform { lo: f64, hi: f64 },
    ScaledBeta { a: f64, b: f64, lo: f64, hi: f64 },
    TruncatedNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
}

/// A validated law for R with support inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnDistribution {
    law: Law,
    /// log B(a, b) for the beta family, the truncated mass for the normal
    norm: f64,
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {x} must lie in (0, 1)")))
    }
}

/// Clamp a continuous support into \[ε, 1 − ε\].
fn clip_support(lo: f64, hi: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > 1.0 {
        return Err(Error::invalid(format!(
            "support [{lo}, {hi}] must lie within [0, 1]"
        )));
    }
    let lo = lo.max(SUPPORT_EPS);
    let hi = hi.min(1.0 - SUPPORT_EPS);
    if lo >= hi {
        return Err(Error::invalid(format!(
            "continuous support needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

impl ReturnDistribution {
    pub fn degenerate(r0: f64) -> Result<Self> {
        check_open_unit("r0", r0)?;
        Ok(Self {
            law: Law::Degenerate { r0 },
            norm: 1.0,
        })
    }

    pub fn discrete(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::from_finite(FiniteDist::new(atoms)?)
    }

    pub fn from_finite(dist: FiniteDist) -> Result<Self> {
        for &(x, _) in dist.atoms() {
            check_open_unit("atom", x)?;
        }
        Ok(Self {
            law: Law::Discrete { dist },
            norm: 1.0,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let (lo, hi) = clip_support(lo, hi)?;
        Ok(Self {
            law: Law::Uniform { lo, hi },
            norm: 1.0,
        })
    }

    /// Beta(a, b) mapped affinely onto \[lo, hi\].
    pub fn scaled_beta(a: f64, b: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(format!(
                "beta shape parameters must be positive, got a = {a}, b = {b}"
            )));
        }
        let (lo, hi) = clip_support(lo, hi)?;
        Ok(Self {
            law: Law::ScaledBeta { a, b, lo, hi },
            norm: ln_beta(a, b),
        })
    }

    /// Normal(mu, sigma²) conditioned on \[lo, hi\].
    pub fn truncated_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::invalid(format!(
                "truncated normal needs finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
            )));
        }
        let (lo, hi) = clip_support(lo, hi)?;
        let mass = normal_mass(mu, sigma, lo, hi);
        if mass < 1e-12 {
            return Err(Error::invalid(format!(
                "truncation [{lo}, {hi}] keeps only {mass:e} of the normal mass"
            )));
        }
        Ok(Self {
            law: Law::TruncatedNormal { mu, sigma, lo, hi },
            norm: mass,
        })
    }

    pub fn from_law(law: Law) -> Result<Self> {
        match law {
            Law::Degenerate { r0 } => Self::degenerate(r0),
            Law::Discrete { dist } => Self::from_finite(dist),
            Law::Uniform { lo, hi } => Self::uniform(lo, hi),
            Law::ScaledBeta { a, b, lo, hi } => Self::scaled_beta(a, b, lo, hi),
            Law::TruncatedNormal { mu, sigma, lo, hi } => {
                Self::truncated_normal(mu, sigma, lo, hi)
            }
        }
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn kind_name(&self) -> &'static str {
        match self.law {
            Law::Degenerate { .. } => "degenerate",
            Law::Discrete { .. } => "discrete",
            Law::Uniform { .. } => "uniform",
            Law::ScaledBeta { .. } => "beta",
            Law::TruncatedNormal { .. } => "truncnormal",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.law, Law::Degenerate { .. } | Law::Discrete { .. })
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        match &self.law {
            Law::Degenerate { r0 } => (*r0, *r0),
            Law::Discrete { dist } => (dist.min(), dist.max()),
            Law::Uniform { lo, hi }
            | Law::ScaledBeta { lo, hi, .. }
            | Law::TruncatedNormal { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Exact finite form for the discrete kinds.
    pub fn as_finite(&self) -> Option<FiniteDist> {
        match &self.law {
            Law::Degenerate { r0 } => FiniteDist::point(*r0).ok(),
            Law::Discrete { dist } => Some(dist.clone()),
            _ => None,
        }
    }

    fn density(&self, r: f64) -> f64 {
        match &self.law {
            Law::Uniform { lo, hi } => 1.0 / (hi - lo),
            Law::ScaledBeta { a, b, lo, hi } => {
                let w = hi - lo;
                let x = ((r - lo) / w).clamp(0.0, 1.0);
                ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - self.norm).exp() / w
            }
            Law::TruncatedNormal { mu, sigma, .. } => {
                let z = (r - mu) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt() * self.norm)
            }
            Law::Degenerate { .. } | Law::Discrete { .. } => 0.0,
        }
    }

    /// E\[f(R)\]. `kinks` lists points where `f` is not smooth; pieces of
    /// the continuous support are split there.
    pub fn expect<F: Fn(f64) -> f64>(
        &self,
        f: F,
        kinks: &[f64],
        quad: &QuadratureSpec,
    ) -> Result<f64> {
        self.try_expect(|r| Ok(f(r)), kinks, quad)
    }

    /// As [`expect`](Self::expect) for a fallible integrand.
    pub fn try_expect<F: Fn(f64) -> Result<f64>>(
        &self,
        f: F,
        kinks: &[f64],
        quad: &QuadratureSpec,
    ) -> Result<f64> {
        let checked = |r: f64| -> Result<f64> {
            let v = f(r)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    abscissa: r,
                    value: v,
                })
            }
        };
        match &self.law {
            Law::Degenerate { r0 } => checked(*r0),
            Law::Discrete { dist } => dist.try_expect(checked),
            _ => {
                let mut acc = 0.0;
                for (r, w) in self.weighted_nodes(kinks, quad) {
                    acc += w * checked(r)?;
                }
                Ok(acc)
            }
        }
    }

    /// The points at which an expectation evaluates its integrand: the atoms
    /// of a discrete law, the quadrature abscissas of a continuous one.
    pub fn evaluation_points(&self, kinks: &[f64], quad: &QuadratureSpec) -> Vec<f64> {
        match &self.law {
            Law::Degenerate { r0 } => vec![*r0],
            Law::Discrete { dist } => dist.atoms().iter().map(|a| a.0).collect(),
            _ => self.weighted_nodes(kinks, quad).into_iter().map(|(r, _)| r).collect(),
        }
    }

    /// Abscissas and probability weights for a continuous law, with the
    /// support split at `kinks`.
    ///
    /// A beta law with a non-integer shape has an algebraic endpoint factor
    /// `x^(a−1)` that Gauss–Legendre resolves only slowly, even for `a > 1`.
    /// The end piece is integrated in `u` with `x = x₁·u^k` and `k·a ≥ 8`,
    /// which flattens that factor while keeping the integrand smooth.
    fn weighted_nodes(&self, kinks: &[f64], quad: &QuadratureSpec) -> Vec<(f64, f64)> {
        let (lo, hi) = self.support();
        let mut cuts: Vec<f64> = kinks
            .iter()
            .copied()
            .filter(|k| k.is_finite() && *k > lo && *k < hi)
            .collect();
        let (left_k, right_k) = match self.law {
            Law::ScaledBeta { a, b, .. } => (stretch_power(a), stretch_power(b)),
            _ => (1, 1),
        };
        if left_k > 1 || right_k > 1 {
            cuts.push(0.5 * (lo + hi));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let rule = quad.rule();
        let mut out = Vec::with_capacity(rule.len() * (cuts.len() + 1));
        let mut left = lo;
        for right in cuts.into_iter().chain(std::iter::once(hi)) {
            match self.law {
                Law::ScaledBeta { a, b, .. } if left_k > 1 && left == lo => {
                    let w = hi - lo;
                    let x1 = (right - lo) / w;
                    let k = left_k as f64;
                    out.extend(rule.mapped(0.0, 1.0).map(|(u, wt)| {
                        let x = x1 * u.powi(left_k);
                        let jac = x1 * k * u.powi(left_k - 1);
                        let dens = ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - self.norm).exp();
                        (lo + w * x, wt * jac * dens)
                    }));
                }
                Law::ScaledBeta { a, b, .. } if right_k > 1 && right == hi => {
                    let w = hi - lo;
                    let y0 = (hi - left) / w;
                    let k = right_k as f64;
                    out.extend(rule.mapped(0.0, 1.0).map(|(u, wt)| {
                        let y = y0 * u.powi(right_k);
                        let jac = y0 * k * u.powi(right_k - 1);
                        let dens = ((a - 1.0) * (-y).ln_1p() + (b - 1.0) * y.ln() - self.norm).exp();
                        (hi - w * y, wt * jac * dens)
                    }));
                }
                _ => out.extend(
                    rule.mapped(left, right).map(|(r, wt)| (r, wt * self.density(r))),
                ),
            }
            left = right;
        }
        // constants integrate exactly
        let mass: f64 = out.iter().map(|n| n.1).sum();
        for n in &mut out {
            n.1 /= mass;
        }
        out
    }

    /// E\[R\].
    pub fn mean(&self, quad: &QuadratureSpec) -> f64 {
        match &self.law {
            Law::Degenerate { r0 } => *r0,
            Law::Discrete { dist } => dist.mean(),
            _ => self.expect(|r| r, &[], quad).unwrap_or(f64::NAN),
        }
    }

    /// V\[R\], computed as E\[(R − μ)²\].
    pub fn variance(&self, quad: &QuadratureSpec) -> f64 {
        let m = self.mean(quad);
        self.expect(|r| (r - m) * (r - m), &[], quad)
            .unwrap_or(f64::NAN)
            .max(0.0)
    }

    /// E\[min(R, D)\], the per-unit financier payoff under a fixed rate.
    pub fn partial_expectation_min(&self, rate: f64, quad: &QuadratureSpec) -> Result<f64> {
        check_open_unit("rate D", rate)?;
        self.expect(|r| r.min(rate), &[rate], quad)
    }

    /// E\[max(R − D, 0)\], the per-unit borrower payoff under a fixed rate.
    pub fn partial_expectation_call(&self, rate: f64, quad: &QuadratureSpec) -> Result<f64> {
        check_open_unit("rate D", rate)?;
        self.expect(|r| (r - rate).max(0.0), &[rate], quad)
    }

    /// Inverse CDF at probability `p` in \[0, 1\].
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.law {
            Law::Degenerate { r0 } => *r0,
            Law::Discrete { dist } => {
                let mut cum = 0.0;
                for &(x, q) in dist.atoms() {
                    cum += q;
                    if cum >= p {
                        return x;
                    }
                }
                dist.max()
            }
            Law::Uniform { lo, hi } => lo + p * (hi - lo),
            Law::ScaledBeta { a, b, lo, hi } => {
                lo + (hi - lo) * bisect_cdf(|x| beta_reg(*a, *b, x), p)
            }
            Law::TruncatedNormal { mu, sigma, lo, hi } => {
                truncated_normal_quantile(*mu, *sigma, *lo, *hi, p)
            }
        }
    }

    /// A finite approximation: the law itself when discrete, otherwise
    /// `n` equally likely atoms at the midpoint quantiles (i + ½)/n.
    pub fn discretize(&self, n: usize) -> Result<FiniteDist> {
        if let Some(d) = self.as_finite() {
            return Ok(d);
        }
        if n == 0 {
            return Err(Error::invalid("discretization needs at least one atom"));
        }
        let p = 1.0 / n as f64;
        FiniteDist::new((0..n).map(|i| (self.quantile((i as f64 + 0.5) * p), p)))
    }

    /// `n` i.i.d. draws, reproducible from `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = self.sampler();
        (0..n).map(|_| draw(&mut rng)).collect()
    }

    fn sampler(&self) -> Box<dyn FnMut(&mut ChaCha8Rng) -> f64 + '_> {
        match &self.law {
            Law::Degenerate { r0 } => Box::new(move |_| *r0),
            Law::Discrete { dist } => {
                let mut cum = Vec::with_capacity(dist.len());
                let mut acc = 0.0;
                for &(_, p) in dist.atoms() {
                    acc += p;
                    cum.push(acc);
                }
                let atoms = dist.atoms();
                Box::new(move |rng| {
                    let u: f64 = rng.random::<f64>() * acc;
                    let idx = cum.partition_point(|&c| c <= u).min(atoms.len() - 1);
                    atoms[idx].0
                })
            }
            Law::Uniform { lo, hi } => {
                Box::new(move |rng| lo + (hi - lo) * rng.random::<f64>())
            }
            Law::ScaledBeta { a, b, lo, hi } => {
                let beta = rand_distr::Beta::new(*a, *b).expect("validated shape parameters");
                Box::new(move |rng| lo + (hi - lo) * beta.sample(rng))
            }
            Law::TruncatedNormal { mu, sigma, lo, hi } => Box::new(move |rng| {
                let u: f64 = rng.random();
                truncated_normal_quantile(*mu, *sigma, *lo, *hi, u)
            }),
        }
    }

    /// Monte Carlo estimate of E\[f(R)\] with its standard error.
    pub fn monte_carlo<F: Fn(f64) -> f64>(&self, f: F, seed: u64, n: usize) -> McEstimate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = self.sampler();
        McEstimate::from_values((0..n).map(|_| f(draw(&mut rng))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Sample mean and standard error of the values, by Welford's update.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut n = 0usize;
        for v in values {
            n += 1;
            let delta = v - mean;
            mean += delta / n as f64;
            m2 += delta * (v - mean);
        }
        let var = if n > 1 { m2 / (n as f64 - 1.0) } else { 0.0 };
        McEstimate {
            estimate: mean,
            std_error: if n > 0 { (var / n as f64).sqrt() } else { f64::NAN },
            samples: n,
        }
    }

    /// Absolute slack allowed on top of the 4σ band, covering summation
    /// rounding when the sample has zero spread.
    pub const ROUNDING_FLOOR: f64 = 1e-12;

    /// Four-sigma agreement with a deterministic value.
    pub fn agrees_with(&self, exact: f64) -> bool {
        (self.estimate - exact).abs()
            <= 4.0 * self.std_error + Self::ROUNDING_FLOOR * exact.abs().max(1.0)
    }
}

/// Power `k` of the endpoint stretch for a beta shape parameter; 1 when
/// the endpoint factor is a polynomial.
fn stretch_power(shape: f64) -> i32 {
    if shape.fract() == 0.0 {
        1
    } else {
        (8.0 / shape).ceil().max(2.0) as i32
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// P(lo ≤ X ≤ hi) for X ~ Normal(mu, sigma²), by composite Gauss–Legendre.
/// Closed-form CDF differences lose about 1e-12 here, which would show up in
/// every normalized expectation.
fn normal_mass(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    const PANELS: usize = 64;
    let rule = crate::quadrature::GaussLegendre::cached(64);
    let w = (hi - lo) / PANELS as f64;
    let c = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    (0..PANELS)
        .map(|k| {
            let a = lo + w * k as f64;
            rule.integrate(a, a + w, |r| {
                let z = (r - mu) / sigma;
                c * (-0.5 * z * z).exp()
            })
        })
        .sum()
}

fn truncated_normal_quantile(mu: f64, sigma: f64, lo: f64, hi: f64, p: f64) -> f64 {
    let n = std_normal();
    let za = (lo - mu) / sigma;
    let zb = (hi - mu) / sigma;
    // Work in the lower tail for accuracy; reflect upper-tail truncations.
    let z = if za > 0.0 {
        let (fa, fb) = (n.cdf(-zb), n.cdf(-za));
        -n.inverse_cdf(fb - p * (fb - fa))
    } else {
        let (fa, fb) = (n.cdf(za), n.cdf(zb));
        n.inverse_cdf(fa + p * (fb - fa))
    };
    (mu + sigma * z).clamp(lo, hi)
}

fn bisect_cdf<F: Fn(f64) -> f64>(cdf: F, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn two_point() -> ReturnDistribution {
        ReturnDistribution::discrete([(0.05, 0.5), (0.15, 0.5)]).unwrap()
    }

    fn unit_uniform() -> ReturnDistribution {
        ReturnDistribution::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn means() {
        assert_eq!(ReturnDistribution::degenerate(0.2).unwrap().mean(&q()), 0.2);
        // 0.5·0.05 + 0.5·0.15
        assert!((two_point().mean(&q()) - 0.10).abs() < 1e-15);
        assert!((unit_uniform().mean(&q()) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn variances() {
        assert_eq!(ReturnDistribution::degenerate(0.2).unwrap().variance(&q()), 0.0);
        assert!((two_point().variance(&q()) - 0.0025).abs() < 1e-15);
        assert!((unit_uniform().variance(&q()) - 1.0 / 12.0).abs() < 1e-8);
    }

    #[test]
    fn expect_identity_and_constant() {
        let d = two_point();
        assert!((d.expect(|r| r, &[], &q()).unwrap() - 0.10).abs() < 1e-15);
        for dist in [
            two_point(),
            unit_uniform(),
            ReturnDistribution::scaled_beta(2.0, 5.0, 0.0, 1.0).unwrap(),
            ReturnDistribution::truncated_normal(0.15, 0.1, 0.0, 1.0).unwrap(),
        ] {
            let one = dist.expect(|_| 1.0, &[0.3], &q()).unwrap();
            assert!((one - 1.0).abs() < 1e-12, "{}: {one}", dist.kind_name());
        }
    }

    #[test]
    fn kinked_min_on_uniform() {
        // D − D²/2 at D = 0.5
        let v = unit_uniform()
            .expect(|r| r.min(0.5), &[0.5], &q())
            .unwrap();
        assert!((v - 0.375).abs() < 1e-8);
    }

    #[test]
    fn non_finite_integrand_names_abscissa() {
        let err = two_point()
            .expect(|r| if r > 0.1 { f64::NAN } else { r }, &[], &q())
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { abscissa, .. } if abscissa == 0.15));
        let err = unit_uniform()
            .expect(|r| 1.0 / (r - r), &[], &q())
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn partial_expectations() {
        let d = two_point();
        assert!((d.partial_expectation_min(0.10, &q()).unwrap() - 0.075).abs() < 1e-15);
        assert!((d.partial_expectation_call(0.10, &q()).unwrap() - 0.025).abs() < 1e-15);
        let p = ReturnDistribution::degenerate(0.2).unwrap();
        assert_eq!(p.partial_expectation_min(0.5, &q()).unwrap(), 0.2);
        assert_eq!(p.partial_expectation_call(0.5, &q()).unwrap(), 0.0);
        let u = unit_uniform();
        assert!((u.partial_expectation_min(0.5, &q()).unwrap() - 0.375).abs() < 1e-8);
        assert!((u.partial_expectation_call(0.5, &q()).unwrap() - 0.125).abs() < 1e-8);
        assert!(u.partial_expectation_min(1.0, &q()).is_err());
        assert!(u.partial_expectation_call(0.0, &q()).is_err());
    }

    #[test]
    fn construction_rejects_bad_laws() {
        assert!(ReturnDistribution::degenerate(0.0).is_err());
        assert!(ReturnDistribution::degenerate(1.0).is_err());
        assert!(ReturnDistribution::discrete([(0.1, 0.5), (0.2, 0.4)]).is_err());
        assert!(ReturnDistribution::discrete([(0.1, 1.0), (0.2, 0.0)]).is_err());
        assert!(ReturnDistribution::discrete([(1.2, 1.0)]).is_err());
        assert!(ReturnDistribution::scaled_beta(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(ReturnDistribution::truncated_normal(0.1, 0.0, 0.0, 1.0).is_err());
        assert!(ReturnDistribution::uniform(0.5, 0.5).is_err());
        assert!(ReturnDistribution::uniform(-0.1, 0.5).is_err());
    }

    #[test]
    fn clipped_support_stays_inside_unit_interval() {
        let (lo, hi) = unit_uniform().support();
        assert_eq!(lo, SUPPORT_EPS);
        assert_eq!(hi, 1.0 - SUPPORT_EPS);
    }

    #[test]
    fn sampling_contracts() {
        let p = ReturnDistribution::degenerate(0.2).unwrap();
        assert_eq!(p.sample(7, 3), vec![0.2, 0.2, 0.2]);
        let d = ReturnDistribution::truncated_normal(0.15, 0.1, 0.0, 1.0).unwrap();
        assert_eq!(d.sample(11, 100), d.sample(11, 100));
        assert_ne!(d.sample(11, 100), d.sample(12, 100));
        for dist in [
            two_point(),
            unit_uniform(),
            ReturnDistribution::scaled_beta(0.5, 0.5, 0.0, 1.0).unwrap(),
            ReturnDistribution::truncated_normal(0.9, 0.05, 0.0, 1.0).unwrap(),
        ] {
            assert!(dist.sample(3, 10_000).iter().all(|&r| r > 0.0 && r < 1.0));
        }
    }

    #[test]
    fn discrete_sample_mean_within_clt_bound() {
        let s = two_point().sample(2024, 1_000_000);
        let m = s.iter().sum::<f64>() / s.len() as f64;
        assert!((m - 0.10).abs() <= 4.0 * 0.05 / 1000.0, "{m}");
    }

    #[test]
    fn quantiles_invert_cdf() {
        let b = ReturnDistribution::scaled_beta(2.0, 3.0, 0.1, 0.5).unwrap();
        let med = b.quantile(0.5);
        let below = b.expect(|r| if r <= med { 1.0 } else { 0.0 }, &[med], &q()).unwrap();
        assert!((below - 0.5).abs() < 1e-9);
        let t = ReturnDistribution::truncated_normal(0.3, 0.1, 0.2, 0.6).unwrap();
        let x = t.quantile(0.25);
        let below = t.expect(|r| if r <= x { 1.0 } else { 0.0 }, &[x], &q()).unwrap();
        assert!((below - 0.25).abs() < 1e-9);
        assert_eq!(two_point().quantile(0.5), 0.05);
        assert_eq!(two_point().quantile(0.51), 0.15);
    }

    #[test]
    fn discretize_keeps_discrete_laws() {
        assert_eq!(two_point().discretize(512).unwrap(), two_point().as_finite().unwrap());
        let d = unit_uniform().discretize(512).unwrap();
        assert_eq!(d.len(), 512);
        assert!((d.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn finite_dist_merges_nearly_equal_atoms() {
        let d = FiniteDist::new([(0.05, 0.25), (0.049999999999999996, 0.25), (0.1, 0.5)]).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.atoms()[0].1 - 0.5).abs() < 1e-15);
    }
}
