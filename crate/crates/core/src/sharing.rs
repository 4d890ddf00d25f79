//! Sharing rules, mean-preserving spreads and second-order dominance.
//!
//! A sharing rule maps the project return `r` to one party's per-unit
//! payoff `s(r)`. The financier/investor pair of each contract exhausts the
//! return, so their effective shares `E[s(R)] / E[R]` add up to one.
//!
//! Dominance is decided on finite laws. Continuous return laws are first
//! discretized on a midpoint quantile grid (see [`DISCRETIZATION_ATOMS`]).

use serde::{Deserialize, Serialize};

use crate::contracts::PayoffMap;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::returns::{FiniteDist, ReturnDistribution};
use crate::utility::UtilityFunction;

/// Atoms used when a continuous law must be made finite.
pub const DISCRETIZATION_ATOMS: usize = 512;

/// Dominance tolerance on exact finite laws.
pub const SOSD_TOL_EXACT: f64 = 1e-12;

/// Dominance tolerance on discretized continuous laws.
pub const SOSD_TOL_DISCRETIZED: f64 = 1e-6;

/// Means closer than this are treated as equal.
pub const MEAN_TOL: f64 = 1e-10;

/// Noise with a mean further from zero than this is rejected.
pub const NOISE_MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleLabel {
    SrInvestor,
    SrFinancier,
    FrInvestor,
    FrFinancier,
    BoostedInvestor,
    BoostedFinancier,
}

impl RuleLabel {
    pub fn is_boosted(&self) -> bool {
        matches!(self, RuleLabel::BoostedInvestor | RuleLabel::BoostedFinancier)
    }

    pub fn is_financier(&self) -> bool {
        matches!(
            self,
            RuleLabel::SrFinancier | RuleLabel::FrFinancier | RuleLabel::BoostedFinancier
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharingRule {
    label: RuleLabel,
    map: PayoffMap,
}

fn check_open_unit(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} = {x} must lie in (0, 1)")))
    }
}

fn check_boost(m: f64) -> Result<()> {
    if m >= 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("boost multiplier {m} must be at least 1")))
    }
}

impl SharingRule {
    pub fn sr_investor(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(Self {
            label: RuleLabel::SrInvestor,
            map: PayoffMap::Proportional { share: alpha },
        })
    }

    pub fn sr_financier(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(Self {
            label: RuleLabel::SrFinancier,
            map: PayoffMap::Proportional { share: 1.0 - alpha },
        })
    }

    pub fn fr_investor(rate: f64) -> Result<Self> {
        check_open_unit("rate", rate)?;
        Ok(Self {
            label: RuleLabel::FrInvestor,
            map: PayoffMap::Residual { mult: 1.0, strike: rate },
        })
    }

    pub fn fr_financier(rate: f64) -> Result<Self> {
        check_open_unit("rate", rate)?;
        Ok(Self {
            label: RuleLabel::FrFinancier,
            map: PayoffMap::Capped { mult: 1.0, cap: rate },
        })
    }

    /// `max(m·r − D, 0)`
    pub fn boosted_investor(mult: f64, rate: f64) -> Result<Self> {
        check_boost(mult)?;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid(format!("rate {rate} must be positive")));
        }
        Ok(Self {
            label: RuleLabel::BoostedInvestor,
            map: PayoffMap::Residual { mult, strike: rate },
        })
    }

    /// `min(m·r, D)`
    pub fn boosted_financier(mult: f64, rate: f64) -> Result<Self> {
        check_boost(mult)?;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid(format!("rate {rate} must be positive")));
        }
        Ok(Self {
            label: RuleLabel::BoostedFinancier,
            map: PayoffMap::Capped { mult, cap: rate },
        })
    }

    pub fn label(&self) -> RuleLabel {
        self.label
    }

    pub fn map(&self) -> &PayoffMap {
        &self.map
    }

    pub fn apply(&self, r: f64) -> f64 {
        self.map.apply(r)
    }

    /// Checks the bound condition `0 ≤ s(r) ≤ r` at every evaluation point.
    pub fn check_bounds(&self, dist: &ReturnDistribution, quad: &QuadratureSpec) -> BoundCheck {
        let pts = dist.evaluation_points(&self.map.kinks(), quad);
        let mut check = BoundCheck {
            exempt: self.label.is_boosted(),
            holds: true,
            strict_lower: true,
            strict_upper: true,
        };
        for r in pts {
            let s = self.apply(r);
            if s < 0.0 || s > r {
                check.holds = false;
            }
            if s <= 0.0 {
                check.strict_lower = false;
            }
            if s >= r {
                check.strict_upper = false;
            }
        }
        check
    }
}

/// Outcome of the bound condition on a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// Boosted rules may pay more than `r` and are not held to the bound.
    pub exempt: bool,
    /// `0 ≤ s(r) ≤ r` everywhere.
    pub holds: bool,
    /// `s(r) > 0` everywhere; fails for the FR investor below the rate.
    pub strict_lower: bool,
    /// `s(r) < r` everywhere; fails for the FR financier below the rate.
    pub strict_upper: bool,
}

/// Largest `|s_P(r) + s_Y(r) − r|` over the evaluation points.
pub fn completeness_defect(
    financier: &SharingRule,
    investor: &SharingRule,
    dist: &ReturnDistribution,
    quad: &QuadratureSpec,
) -> f64 {
    let mut kinks = financier.map.kinks();
    kinks.extend(investor.map.kinks());
    dist.evaluation_points(&kinks, quad)
        .into_iter()
        .map(|r| (financier.apply(r) + investor.apply(r) - r).abs())
        .fold(0.0, f64::max)
}

/// `E[s(R)] / E[R]`, the share for which `E[s(R)] = α E[R]`.
pub fn effective_share(
    rule: &SharingRule,
    dist: &ReturnDistribution,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let num = rule.map.expectation(dist, quad)?;
    Ok(num / dist.mean(quad))
}

/// Law of `s(R)` for a finite law of R.
pub fn induced_distribution(rule: &SharingRule, dist: &FiniteDist) -> Result<FiniteDist> {
    dist.map(|r| rule.apply(r))
}

/// A base law, independent zero-mean noise, and the law of their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsPair {
    base: FiniteDist,
    noise: FiniteDist,
    spread: FiniteDist,
}

impl MpsPair {
    pub fn base(&self) -> &FiniteDist {
        &self.base
    }

    pub fn noise(&self) -> &FiniteDist {
        &self.noise
    }

    pub fn spread(&self) -> &FiniteDist {
        &self.spread
    }
}

/// Builds `base + noise` under the product measure.
pub fn make_mps(base: &FiniteDist, noise: &FiniteDist) -> Result<MpsPair> {
    let mean = noise.mean();
    if mean.abs() > NOISE_MEAN_TOL {
        return Err(Error::Precondition(format!(
            "noise must have zero mean, E(Z) = {mean:e}"
        )));
    }
    let var = noise.variance();
    if var <= 0.0 {
        return Err(Error::Precondition(format!(
            "noise must have positive variance, V(Z) = {var:e}"
        )));
    }
    let mut atoms = Vec::with_capacity(base.len() * noise.len());
    for &(x, p) in base.atoms() {
        for &(z, q) in noise.atoms() {
            let v = x + z;
            if !v.is_finite() {
                return Err(Error::Precondition(format!("atom sum {x} + {z} is not finite")));
            }
            atoms.push((v, p * q));
        }
    }
    let spread = renormalized(atoms)?;
    Ok(MpsPair {
        base: base.clone(),
        noise: noise.clone(),
        spread,
    })
}

/// Products of probabilities may drift from summing to one by a few ulps.
fn renormalized(mut atoms: Vec<(f64, f64)>) -> Result<FiniteDist> {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    FiniteDist::new(atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sosd {
    Dominates,
    Dominated,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SosdReport {
    pub relation: Sosd,
    /// `E[x] − E[y]`
    pub mean_gap: f64,
    /// How far the integrated-CDF difference falls on the wrong side for
    /// the reported direction; for `Incomparable` with equal means, the
    /// smaller of the two one-sided violations.
    pub max_violation: f64,
}

/// Second-order dominance of `x` over `y` at [`SOSD_TOL_EXACT`].
pub fn sosd_dominates(x: &FiniteDist, y: &FiniteDist) -> SosdReport {
    sosd_dominates_with_tol(x, y, SOSD_TOL_EXACT)
}

/// With equal means, `x` dominates `y` when `∫_{−∞}^t (F_y − F_x) ≥ −tol`
/// for every `t`, strictly above `tol` somewhere.
pub fn sosd_dominates_with_tol(x: &FiniteDist, y: &FiniteDist, tol: f64) -> SosdReport {
    let mean_gap = x.mean() - y.mean();
    if mean_gap.abs() > MEAN_TOL {
        return SosdReport {
            relation: Sosd::Incomparable,
            mean_gap,
            max_violation: f64::NAN,
        };
    }
    let mut grid: Vec<f64> = x
        .atoms()
        .iter()
        .chain(y.atoms())
        .map(|a| a.0)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // Integrated CDFs are piecewise linear between grid points.
    let (mut ix, mut iy) = (0.0, 0.0);
    let (mut fx, mut fy) = (0.0, 0.0);
    let (mut ax, mut ay) = (0usize, 0usize);
    let (mut lowest, mut highest) = (0.0_f64, 0.0_f64);
    for (k, &t) in grid.iter().enumerate() {
        if k > 0 {
            let dt = t - grid[k - 1];
            ix += fx * dt;
            iy += fy * dt;
            let d = iy - ix;
            lowest = lowest.min(d);
            highest = highest.max(d);
        }
        while ax < x.len() && x.atoms()[ax].0 <= t {
            fx += x.atoms()[ax].1;
            ax += 1;
        }
        while ay < y.len() && y.atoms()[ay].0 <= t {
            fy += y.atoms()[ay].1;
            ay += 1;
        }
    }
    let x_ok = lowest >= -tol;
    let y_ok = highest <= tol;
    let (relation, max_violation) = match (x_ok, y_ok) {
        (true, true) => (Sosd::Equal, 0.0),
        (true, false) => (Sosd::Dominates, (-lowest).max(0.0)),
        (false, true) => (Sosd::Dominated, highest.max(0.0)),
        (false, false) => (Sosd::Incomparable, (-lowest).min(highest)),
    };
    SosdReport {
        relation,
        mean_gap,
        max_violation,
    }
}

/// Second-order Taylor estimate of the utility loss from the spread next to
/// the exact loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorGap {
    /// `½ E[U''(base)] V(noise)`
    pub approx: f64,
    /// `E[U(spread)] − E[U(base)]`
    pub exact: f64,
}

pub fn taylor_gap(u: &UtilityFunction, pair: &MpsPair) -> Result<TaylorGap> {
    let curvature = pair.base.try_expect(|x| u.deriv2(x))?;
    let approx = 0.5 * curvature * pair.noise.variance();
    let exact = pair.spread.try_expect(|x| u.eval(x))? - pair.base.try_expect(|x| u.eval(x))?;
    Ok(TaylorGap { approx, exact })
}
