//! Fund allocation and the payoffs of the two financing contracts.
//!
//! Under the fixed-return (FR) contract the lender takes `min(R, D)` per
//! unit of funds and the borrower keeps `max(R − D, 0)`. Under the
//! stochastic-return (SR) contract the realized return is split
//! proportionally: `1 − α` to the financier, `α` to the investor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::returns::ReturnDistribution;

/// Total funds `L` and the share `β` placed under the SR contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundAllocation {
    total: f64,
    beta: f64,
}

impl FundAllocation {
    pub fn new(total: f64, beta: f64) -> Result<Self> {
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid(format!("total funds must be positive, got {total}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid(format!("beta = {beta} must lie in (0, 1)")));
        }
        Ok(Self { total, beta })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Funds under the SR contract, `βL`.
    pub fn sr_funds(&self) -> f64 {
        self.beta * self.total
    }

    /// Funds under the FR contract, `L − βL`.
    pub fn fr_funds(&self) -> f64 {
        self.total - self.sr_funds()
    }
}

/// Terms of one contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ContractTerms {
    Fixed { rate: f64 },
    Sharing { alpha: f64 },
}

impl ContractTerms {
    pub fn fixed(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(ContractTerms::Fixed { rate })
    }

    pub fn sharing(alpha: f64) -> Result<Self> {
        check_share(alpha)?;
        Ok(ContractTerms::Sharing { alpha })
    }

    /// (financier, investor) payoff on `funds` at realized return `r`.
    pub fn payoff(&self, funds: f64, r: f64) -> Result<(f64, f64)> {
        match *self {
            ContractTerms::Fixed { rate } => payoff_fr(funds, r, rate),
            ContractTerms::Sharing { alpha } => payoff_sr(funds, r, alpha),
        }
    }
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("rate D = {rate} must lie in (0, 1)")))
    }
}

pub(crate) fn check_share(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("share alpha = {alpha} must lie in (0, 1)")))
    }
}

fn check_realization(funds: f64, r: f64) -> Result<()> {
    if !(funds > 0.0 && funds.is_finite()) {
        return Err(Error::invalid(format!("funds must be positive, got {funds}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("realized return r = {r} must lie in (0, 1)")));
    }
    Ok(())
}

/// FR split of `z2·r`: the lender gets `z2·min(r, D)`, the borrower the rest.
pub fn payoff_fr(z2: f64, r: f64, rate: f64) -> Result<(f64, f64)> {
    check_realization(z2, r)?;
    check_rate(rate)?;
    let total = z2 * r;
    let financier = z2 * r.min(rate);
    let investor = if r > rate { total - financier } else { 0.0 };
    Ok((financier, investor))
}

/// SR split of `z1·r`: `(1 − α)` to the financier, `α` to the investor.
pub fn payoff_sr(z1: f64, r: f64, alpha: f64) -> Result<(f64, f64)> {
    check_realization(z1, r)?;
    check_share(alpha)?;
    let total = z1 * r;
    let investor = alpha * total;
    Ok((total - investor, investor))
}

/// A per-unit payoff transform `r ↦ s(r)`, non-decreasing in `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum PayoffMap {
    Identity,
    /// `share · r`
    Proportional { share: f64 },
    /// `min(mult · r, cap)`
    Capped { mult: f64, cap: f64 },
    /// `max(mult · r − strike, 0)`
    Residual { mult: f64, strike: f64 },
}

impl PayoffMap {
    pub fn apply(&self, r: f64) -> f64 {
        match *self {
            PayoffMap::Identity => r,
            PayoffMap::Proportional { share } => share * r,
            PayoffMap::Capped { mult, cap } => (mult * r).min(cap),
            PayoffMap::Residual { mult, strike } => (mult * r - strike).max(0.0),
        }
    }

    /// Points of `r` where the map is not differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            PayoffMap::Identity | PayoffMap::Proportional { .. } => Vec::new(),
            PayoffMap::Capped { mult, cap } => vec![cap / mult],
            PayoffMap::Residual { mult, strike } => vec![strike / mult],
        }
    }

    /// E[s(R)].
    pub fn expectation(&self, dist: &ReturnDistribution, quad: &QuadratureSpec) -> Result<f64> {
        dist.expect(|r| self.apply(r), &self.kinks(), quad)
    }
}

/// Expected aggregate payoffs and financier variances for both models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffSummary {
    pub e_p1: f64,
    pub e_p2: f64,
    pub e_y1: f64,
    pub e_y2: f64,
    pub v_p1: f64,
    pub v_p2: f64,
}

pub fn expected_payoffs(
    alloc: &FundAllocation,
    dist: &ReturnDistribution,
    rate: f64,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<PayoffSummary> {
    check_rate(rate)?;
    check_share(alpha)?;
    let z1 = alloc.sr_funds();
    let z2 = alloc.fr_funds();
    let mean = dist.mean(quad);
    let var = dist.variance(quad);
    let e_min = dist.partial_expectation_min(rate, quad)?;
    let e_call = dist.partial_expectation_call(rate, quad)?;
    let v_min = dist
        .expect(|r| (r.min(rate) - e_min).powi(2), &[rate], quad)?
        .max(0.0);
    Ok(PayoffSummary {
        e_p1: (1.0 - alpha) * z1 * mean,
        e_p2: z2 * e_min,
        e_y1: alpha * z1 * mean,
        e_y2: z2 * e_call,
        v_p1: (1.0 - alpha).powi(2) * z1 * z1 * var,
        v_p2: z2 * z2 * v_min,
    })
}

/// `h(α) = E(P_2) − E(P_1)`: negative when the financier expects more
/// from the sharing contract than from the fixed rate.
pub fn financier_gap(
    alloc: &FundAllocation,
    dist: &ReturnDistribution,
    rate: f64,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_rate(rate)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("share alpha = {alpha} must lie in [0, 1]")));
    }
    let e_fr = alloc.fr_funds() * dist.expect(|r| r.min(rate), &[rate], quad)?;
    let e_sr = (1.0 - alpha) * alloc.sr_funds() * dist.expect(|r| r, &[], quad)?;
    Ok(e_fr - e_sr)
}
