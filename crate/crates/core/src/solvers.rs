//! Bracketing solves for the indifference points of the two contracts.
//!
//! * `α*` equalizes the financier's expected aggregate payoff across the
//!   two models; `h(α) = E(P_2) − E(P_1)` is increasing in `α`, with
//!   `h(1) > 0` always and `h(0) ≤ 0` whenever `β ≥ ½`.
//! * `D*` equalizes the investors' expected aggregate payoffs at a given
//!   `α`.
//! * The indifference rates `D_P` and `D_Y` equalize expected utility of a
//!   per-unit FR payoff with a per-unit SR payoff. They are solved per unit
//!   of funds: utility comparisons are not invariant to rescaling the two
//!   sides by different fund amounts.
//!
//! # Reallocation
//!
//! [`pareto_construct`] works on the branch selected by the current share
//! `α`. For `α < α*` (investor branch) the shortfall is `γ = α* − α`; for
//! `α > α*` (financier branch) the financier's shortfall is `λ = α − α*`.
//! In the half-split arrangement the short party gets half of the shortfall
//! back in SR and is offered a boosted FR payoff (multiplier `1 + ½·gap`)
//! whose rate is re-solved so that it is indifferent between the two. The
//! counterparty keeps the other half, which lifts its SR share strictly
//! above its own indifference share. The arrangement is Pareto-improving
//! when neither party expects less utility in SR than in FR and at least
//! one expects strictly more.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::contracts::{check_share, financier_gap, FundAllocation, PayoffMap};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::returns::ReturnDistribution;
use crate::utility::{expected_utility, UtilityFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bracket half-width at which bisection on a rate or share stops.
    pub rate: f64,
    /// Allowed payoff residual, relative to total funds `L`.
    pub payoff: f64,
    /// Allowed expected-utility residual for indifference solves.
    pub utility: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rate: 1e-10,
            payoff: 1e-9,
            utility: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveTarget {
    AlphaStar,
    DStar,
    DpIndifference,
    DyIndifference,
    Lambda,
    Gamma,
}

impl SolveTarget {
    pub fn name(&self) -> &'static str {
        match self {
            SolveTarget::AlphaStar => "alpha_star",
            SolveTarget::DStar => "d_star",
            SolveTarget::DpIndifference => "d_p",
            SolveTarget::DyIndifference => "d_y",
            SolveTarget::Lambda => "lambda",
            SolveTarget::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Interior root with residual inside tolerance.
    Converged,
    /// The root sits on an endpoint of the search interval.
    Boundary,
    /// The iteration cap was hit before the residual tolerance was met.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub target: SolveTarget,
    pub status: SolveStatus,
    pub value: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub premise_flags: IndexMap<String, bool>,
}

impl SolveReport {
    pub fn flag(&self, name: &str) -> Option<bool> {
        self.premise_flags.get(name).copied()
    }

    pub fn is_success(&self) -> bool {
        self.status != SolveStatus::Stalled
    }
}

/// Result of a plain bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` until the bracket is no wider than `2·tol_x`.
///
/// `f(lo)` and `f(hi)` must not share a strict sign.
pub fn bisect<F>(
    target: &'static str,
    mut f: F,
    lo: f64,
    hi: f64,
    tol_x: f64,
    max_iter: usize,
) -> Result<Bisection>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let fa0 = f(a)?;
    let fb0 = f(b)?;
    if fa0 == 0.0 {
        return Ok(Bisection { root: a, residual: 0.0, bracket: (a, a), iterations: 0 });
    }
    if fb0 == 0.0 {
        return Ok(Bisection { root: b, residual: 0.0, bracket: (b, b), iterations: 0 });
    }
    if fa0.signum() == fb0.signum() || fa0.is_nan() || fb0.is_nan() {
        return Err(Error::NoRoot { target, lo, hi, f_lo: fa0, f_hi: fb0, note: None });
    }
    let mut fa = fa0;
    let mut fb = fb0;
    let mut iterations = 0;
    while b - a > 2.0 * tol_x && iterations < max_iter {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Bisection { root: mid, residual: 0.0, bracket: (a, b), iterations });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let mid = 0.5 * (a + b);
    let mid_residual = f(mid)?.abs();
    // One secant step on the final bracket; exact when f is affine there.
    let secant = a - fa * (b - a) / (fb - fa);
    if secant.is_finite() && secant > a && secant < b {
        let secant_residual = f(secant)?.abs();
        if secant_residual < mid_residual {
            return Ok(Bisection { root: secant, residual: secant_residual, bracket: (a, b), iterations });
        }
    }
    Ok(Bisection { root: mid, residual: mid_residual, bracket: (a, b), iterations })
}

fn flags<const N: usize>(items: [(&str, bool); N]) -> IndexMap<String, bool> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Solves `h(α) = 0` on \[0, 1\].
pub fn solve_alpha_star(
    alloc: &FundAllocation,
    dist: &ReturnDistribution,
    rate: f64,
    quad: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<SolveReport> {
    let h = |a: f64| financier_gap(alloc, dist, rate, a, quad);
    let payoff_tol = tol.payoff * alloc.total();
    let beta_ge_half = alloc.beta() >= 0.5;
    let h0 = h(0.0)?;
    let h1 = h(1.0)?;
    if h0 > payoff_tol || h1 < 0.0 {
        let note = if beta_ge_half {
            "h changes sign nowhere on [0, 1]".to_string()
        } else {
            format!("beta = {} < 1/2 and h(0) > 0", alloc.beta())
        };
        return Err(Error::NoRoot {
            target: "alpha_star",
            lo: 0.0,
            hi: 1.0,
            f_lo: h0,
            f_hi: h1,
            note: Some(note),
        });
    }
    let (value, residual, bracket, iterations, status) = if h0.abs() <= payoff_tol {
        (0.0, h0.abs(), (0.0, 0.0), 0, SolveStatus::Boundary)
    } else {
        let b = bisect("alpha_star", h, 0.0, 1.0, tol.rate, tol.max_iter)?;
        let status = if b.residual <= payoff_tol {
            SolveStatus::Converged
        } else {
            SolveStatus::Stalled
        };
        (b.root, b.residual, b.bracket, b.iterations, status)
    };
    // h is affine in α: α* = 1 − Z_2 E[min(R, D)] / (Z_1 E[R])
    let e_min = dist.expect(|r| r.min(rate), &[rate], quad)?;
    let closed = 1.0 - alloc.fr_funds() * e_min / (alloc.sr_funds() * dist.mean(quad));
    let closed_form_agrees = (closed.max(0.0) - value).abs() <= 10.0 * tol.rate;
    let interior = status != SolveStatus::Boundary && value > 0.0 && value < 1.0;
    Ok(SolveReport {
        target: SolveTarget::AlphaStar,
        status,
        value,
        residual,
        bracket,
        iterations,
        premise_flags: flags([
            ("beta_ge_half", beta_ge_half),
            ("sign_change_found", true),
            ("alpha_star_interior", interior),
            ("alpha_star_lt_half", value < 0.5),
            ("closed_form_agrees", closed_form_agrees),
        ]),
    })
}

/// Solves `Z_2 E[max(R − D, 0)] = α Z_1 E[R]` for `D`.
pub fn solve_d_star(
    alloc: &FundAllocation,
    dist: &ReturnDistribution,
    alpha: f64,
    quad: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<SolveReport> {
    check_share(alpha)?;
    let z2 = alloc.fr_funds();
    let mean = dist.mean(quad);
    let target = alpha * alloc.sr_funds() * mean;
    let g = |d: f64| -> Result<f64> {
        Ok(z2 * dist.expect(|r| (r - d).max(0.0), &[d], quad)? - target)
    };
    let payoff_tol = tol.payoff * alloc.total();
    let g0 = g(0.0)?;
    let g1 = g(1.0)?;
    if g0 < -payoff_tol {
        return Err(Error::NoRoot {
            target: "d_star",
            lo: 0.0,
            hi: 1.0,
            f_lo: g0,
            f_hi: g1,
            note: Some(format!(
                "investor target {target} outside achievable [0, {}]",
                z2 * mean
            )),
        });
    }
    let (value, residual, bracket, iterations, status) = if g0.abs() <= payoff_tol {
        (0.0, g0.abs(), (0.0, 0.0), 0, SolveStatus::Boundary)
    } else {
        let b = bisect("d_star", g, 0.0, 1.0, tol.rate, tol.max_iter)?;
        let status = if b.residual <= payoff_tol {
            SolveStatus::Converged
        } else {
            SolveStatus::Stalled
        };
        (b.root, b.residual, b.bracket, b.iterations, status)
    };
    Ok(SolveReport {
        target: SolveTarget::DStar,
        status,
        value,
        residual,
        bracket,
        iterations,
        premise_flags: flags([
            ("sign_change_found", true),
            ("d_star_interior", value > 0.0 && value < 1.0),
        ]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Financier,
    Investor,
}

impl Side {
    /// Per-unit FR payoff with boost `m` at rate `D`.
    pub fn fr_map(&self, mult: f64, rate: f64) -> PayoffMap {
        match self {
            Side::Financier => PayoffMap::Capped { mult, cap: rate },
            Side::Investor => PayoffMap::Residual { mult, strike: rate },
        }
    }
}

/// Finds `D` with `E[U(s_FR(R))] = E[U(share · R)]`, where `s_FR` is
/// `min(m·r, D)` for the financier or `max(m·r − D, 0)` for the investor.
#[allow(clippy::too_many_arguments)]
pub fn solve_indifference_rate(
    u: &UtilityFunction,
    dist: &ReturnDistribution,
    side: Side,
    share: f64,
    boost: f64,
    quad: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<SolveReport> {
    check_share(share)?;
    if !(boost >= 1.0 && boost.is_finite()) {
        return Err(Error::invalid(format!("boost multiplier {boost} must be at least 1")));
    }
    let target_eu = expected_utility(u, dist, &PayoffMap::Proportional { share }, quad)?;
    let g = |d: f64| -> Result<f64> {
        Ok(expected_utility(u, dist, &side.fr_map(boost, d), quad)? - target_eu)
    };
    let hi = boost * dist.support().1;
    let name = match side {
        Side::Financier => "d_p",
        Side::Investor => "d_y",
    };
    let b = bisect(name, g, 0.0, hi, tol.rate, tol.max_iter)?;
    let status = if b.residual > tol.utility {
        SolveStatus::Stalled
    } else if b.root <= 0.0 || b.root >= hi {
        SolveStatus::Boundary
    } else {
        SolveStatus::Converged
    };
    Ok(SolveReport {
        target: match side {
            Side::Financier => SolveTarget::DpIndifference,
            Side::Investor => SolveTarget::DyIndifference,
        },
        status,
        value: b.root,
        residual: b.residual,
        bracket: b.bracket,
        iterations: b.iterations,
        premise_flags: flags([
            ("sign_change_found", true),
            ("rate_in_unit_interval", b.root > 0.0 && b.root < 1.0),
        ]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `α > α*`: the financier is short `λ = α − α*`.
    Financier,
    /// `α < α*`: the investor is short `γ = α* − α`.
    Investor,
}

/// One half-split arrangement and the Pareto comparison it supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSplitCheck {
    pub branch: Branch,
    /// `1 + ½λ` or `1 + ½γ`.
    pub boost: f64,
    /// SR share of the boosted party after the split.
    pub boosted_share: f64,
    /// SR share of the counterparty after the split.
    pub counter_share: f64,
    /// Rate re-solved for the boosted FR payoff.
    pub resolved: SolveReport,
    /// Rate solved without the boost, reused as is.
    pub reused_rate: f64,
    /// Utility gap when the unboosted rate is reused.
    pub reused_residual: f64,
    pub boosted_sr_eu: f64,
    pub boosted_fr_eu: f64,
    pub counter_sr_eu: f64,
    pub counter_fr_eu: f64,
    /// Boosting the FR payoff at the reused rate does not lower its utility.
    pub boost_weakly_improves_fr: bool,
    pub financier_weakly_better: bool,
    pub investor_weakly_better: bool,
    pub strict_gain: bool,
}

impl HalfSplitCheck {
    pub fn is_pareto_improvement(&self) -> bool {
        self.resolved.is_success()
            && self.financier_weakly_better
            && self.investor_weakly_better
            && self.strict_gain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub alpha: f64,
    pub alpha_star: Option<SolveReport>,
    pub branch: Option<Branch>,
    pub lambda_report: SolveReport,
    pub gamma_report: SolveReport,
    /// Financier indifference rate against share `1 − α*`.
    pub d_p: Option<SolveReport>,
    /// Investor indifference rate against share `α*`.
    pub d_y: Option<SolveReport>,
    pub half_split: Vec<HalfSplitCheck>,
    pub premises: IndexMap<String, bool>,
}

impl ParetoReport {
    pub fn premises_hold(&self) -> bool {
        self.premises.values().all(|&v| v)
    }

    /// Premises hold, every solve converged, and the half-split arrangement
    /// is a Pareto improvement.
    pub fn pareto_holds(&self) -> bool {
        self.premises_hold()
            && self.d_p.as_ref().is_some_and(SolveReport::is_success)
            && self.d_y.as_ref().is_some_and(SolveReport::is_success)
            && !self.half_split.is_empty()
            && self.half_split.iter().all(HalfSplitCheck::is_pareto_improvement)
    }
}

fn unless_no_root(r: Result<SolveReport>) -> Result<Option<SolveReport>> {
    match r {
        Ok(rep) => Ok(Some(rep)),
        Err(e) if e.is_no_root() => Ok(None),
        Err(e) => Err(e),
    }
}

fn share_report(target: SolveTarget, value: f64, residual: f64, bound: f64, pairs: IndexMap<String, bool>) -> SolveReport {
    SolveReport {
        target,
        status: SolveStatus::Converged,
        value,
        residual,
        bracket: (0.0, bound),
        iterations: 0,
        premise_flags: pairs,
    }
}

/// Reallocation parameters and the half-split Pareto check at share `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn pareto_construct(
    alloc: &FundAllocation,
    dist: &ReturnDistribution,
    rate: f64,
    u: &UtilityFunction,
    alpha: f64,
    quad: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<ParetoReport> {
    check_share(alpha)?;
    let star = match solve_alpha_star(alloc, dist, rate, quad, tol) {
        Ok(r) => Some(r),
        Err(e) if e.is_no_root() => None,
        Err(e) => return Err(e),
    };
    let solved = star.as_ref().is_some_and(|s| s.is_success());
    let a_star = star.as_ref().map(|s| s.value).unwrap_or(f64::NAN);
    let lt_half = solved && a_star < 0.5;

    // λ and γ are fixed by the linear constraints 1 − α + λ = 1 − α* and α + γ = α*.
    // a share within solver precision of α* sits on the boundary
    let at_star = solved && (alpha - a_star).abs() <= 10.0 * tol.rate;
    let lambda = if at_star { 0.0 } else { alpha - a_star };
    let gamma = if at_star { 0.0 } else { a_star - alpha };
    let in_open = |x: f64| x > 0.0 && x < a_star;
    let fin_alpha = alpha > a_star && alpha < 1.0 - a_star;
    let inv_alpha = alpha > 0.0 && alpha < a_star;
    let lambda_ok = solved && in_open(lambda) && fin_alpha;
    let gamma_ok = solved && in_open(gamma) && inv_alpha;
    let lambda_report = share_report(
        SolveTarget::Lambda,
        lambda,
        ((1.0 - alpha + lambda) - (1.0 - a_star)).abs(),
        a_star,
        flags([("alpha_in_financier_branch", solved && fin_alpha), ("lambda_in_interval", lambda_ok)]),
    );
    let gamma_report = share_report(
        SolveTarget::Gamma,
        gamma,
        ((alpha + gamma) - a_star).abs(),
        a_star,
        flags([("alpha_in_investor_branch", solved && inv_alpha), ("gamma_in_interval", gamma_ok)]),
    );
    let branch = if lambda_ok {
        Some(Branch::Financier)
    } else if gamma_ok {
        Some(Branch::Investor)
    } else {
        None
    };

    let mut premises = flags([
        ("alpha_star_solved", solved),
        ("alpha_star_lt_half", lt_half),
        ("alpha_off_alpha_star", solved && !at_star),
        ("branch_interval_holds", branch.is_some()),
    ]);

    let interior = solved && a_star > 0.0 && a_star < 1.0;
    let (d_p, d_y) = if interior {
        (
            unless_no_root(solve_indifference_rate(u, dist, Side::Financier, 1.0 - a_star, 1.0, quad, tol))?,
            unless_no_root(solve_indifference_rate(u, dist, Side::Investor, a_star, 1.0, quad, tol))?,
        )
    } else {
        (None, None)
    };
    premises.insert(
        "indifference_rates_converged".into(),
        d_p.as_ref().is_some_and(SolveReport::is_success)
            && d_y.as_ref().is_some_and(SolveReport::is_success),
    );

    let mut half_split = Vec::new();
    let premises_hold = premises.values().all(|&v| v);
    if let (true, Some(br), Some(dp), Some(dy)) = (premises_hold, branch, &d_p, &d_y) {
        match half_split_check(u, dist, br, alpha, a_star, dp.value, dy.value, quad, tol) {
            Ok(check) => half_split.push(check),
            // no boosted rate makes the short party indifferent
            Err(e) if e.is_no_root() => {}
            Err(e) => return Err(e),
        }
    }

    Ok(ParetoReport {
        alpha,
        alpha_star: star,
        branch,
        lambda_report,
        gamma_report,
        d_p,
        d_y,
        half_split,
        premises,
    })
}

#[allow(clippy::too_many_arguments)]
fn half_split_check(
    u: &UtilityFunction,
    dist: &ReturnDistribution,
    branch: Branch,
    alpha: f64,
    a_star: f64,
    d_p: f64,
    d_y: f64,
    quad: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<HalfSplitCheck> {
    let eu = |m: PayoffMap| expected_utility(u, dist, &m, quad);
    let (boosted_side, gap, boosted_share, reused_rate, counter_fr) = match branch {
        // financier SR share 1 − α + ½λ; investor keeps α − ½λ = α* + ½λ
        Branch::Financier => {
            let lambda = alpha - a_star;
            (Side::Financier, lambda, 1.0 - alpha + 0.5 * lambda, d_p, Side::Investor.fr_map(1.0, d_y))
        }
        // investor SR share α + ½γ; financier keeps 1 − α − ½γ = 1 − α* + ½γ
        Branch::Investor => {
            let gamma = a_star - alpha;
            (Side::Investor, gamma, alpha + 0.5 * gamma, d_y, Side::Financier.fr_map(1.0, d_p))
        }
    };
    let boost = 1.0 + 0.5 * gap;
    let counter_share = 1.0 - boosted_share;
    let resolved = solve_indifference_rate(u, dist, boosted_side, boosted_share, boost, quad, tol)?;

    let boosted_sr_eu = eu(PayoffMap::Proportional { share: boosted_share })?;
    let boosted_fr_eu = eu(boosted_side.fr_map(boost, resolved.value))?;
    let reused_residual = (eu(boosted_side.fr_map(boost, reused_rate))? - boosted_sr_eu).abs();
    let boost_weakly_improves_fr = eu(boosted_side.fr_map(boost, reused_rate))?
        >= eu(boosted_side.fr_map(1.0, reused_rate))? - tol.utility;
    let counter_sr_eu = eu(PayoffMap::Proportional { share: counter_share })?;
    let counter_fr_eu = eu(counter_fr)?;

    let boosted_ok = boosted_sr_eu >= boosted_fr_eu - tol.utility;
    let counter_ok = counter_sr_eu >= counter_fr_eu - tol.utility;
    let strict_gain =
        boosted_sr_eu > boosted_fr_eu + tol.utility || counter_sr_eu > counter_fr_eu + tol.utility;
    let (financier_weakly_better, investor_weakly_better) = match boosted_side {
        Side::Financier => (boosted_ok, counter_ok),
        Side::Investor => (counter_ok, boosted_ok),
    };
    Ok(HalfSplitCheck {
        branch,
        boost,
        boosted_share,
        counter_share,
        resolved,
        reused_rate,
        reused_residual,
        boosted_sr_eu,
        boosted_fr_eu,
        counter_sr_eu,
        counter_fr_eu,
        boost_weakly_improves_fr,
        financier_weakly_better,
        investor_weakly_better,
        strict_gain,
    })
}
