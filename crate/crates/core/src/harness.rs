//! Scenario batches and the checks run over them.
//!
//! Each check produces [`VerificationRecord`]s that keep premise failures
//! apart from conclusion failures: a conclusion is only evaluated once every
//! premise it depends on holds.

use std::collections::HashSet;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contracts::{check_rate, check_share, financier_gap, FundAllocation, PayoffMap};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::returns::{FiniteDist, McEstimate, ReturnDistribution};
use crate::sharing::{
    make_mps, sosd_dominates_with_tol, taylor_gap, Sosd, DISCRETIZATION_ATOMS, MEAN_TOL,
    SOSD_TOL_DISCRETIZED, SOSD_TOL_EXACT,
};
use crate::solvers::{
    pareto_construct, solve_alpha_star, solve_d_star, SolveReport,
    SolveStatus, Tolerances,
};
use crate::utility::{expected_utility, UtilityFamily, UtilityFunction};

/// Sampled shares on each side of `α*` for the sign check.
pub const SIGN_SAMPLES: usize = 20;

/// Upper bound on halvings of the noise scale.
const MAX_HALVINGS: u32 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub alloc: FundAllocation,
    pub dist: ReturnDistribution,
    pub rate: f64,
    pub alpha: f64,
    pub utility: UtilityFunction,
    pub quad: QuadratureSpec,
    pub tol: Tolerances,
    pub seed: u64,
    /// Half-width of the two-point noise; `None` picks a tenth of the
    /// base support width.
    pub noise_scale: Option<f64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid("scenario id is empty"));
        }
        check_rate(self.rate)?;
        check_share(self.alpha)?;
        if let Some(s) = self.noise_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("noise scale {s} must be positive")));
            }
        }
        let (lo, hi) = self.utility.domain();
        let (_, top) = self.dist.support();
        if lo > 0.0 || hi < top {
            return Err(Error::invalid(format!(
                "utility domain [{lo}, {hi}] must contain [0, {top}]"
            )));
        }
        Ok(())
    }
}

/// The usual utility domain for a law: from 0 to a quarter above the top of
/// the support, which covers the boosted payoffs.
pub fn payoff_domain(dist: &ReturnDistribution) -> (f64, f64) {
    (0.0, 1.25 * dist.support().1 * (1.0 + 1e-6))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Proposition {
    #[serde(rename = "P3_1")]
    P31,
    #[serde(rename = "P4_1")]
    P41,
    #[serde(rename = "P5_1")]
    P51,
}

impl Proposition {
    pub const ALL: [Proposition; 3] = [Proposition::P31, Proposition::P41, Proposition::P51];

    pub fn name(&self) -> &'static str {
        match self {
            Proposition::P31 => "P3_1",
            Proposition::P41 => "P4_1",
            Proposition::P51 => "P5_1",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim() {
            "P3_1" | "p3_1" | "3.1" => Ok(Proposition::P31),
            "P4_1" | "p4_1" | "4.1" => Ok(Proposition::P41),
            "P5_1" | "p5_1" | "5.1" => Ok(Proposition::P51),
            other => Err(Error::invalid(format!("unknown proposition {other:?}"))),
        }
    }
}

/// The two inequalities checked for P4_1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Right,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    ConclusionFailure,
    PremiseFailure,
    /// The solved share sits on the edge of its range, so the claim is vacuous.
    Boundary,
    Errored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCheck {
    pub estimate: f64,
    pub std_error: f64,
    pub agrees: bool,
    /// The quadrature value compared against.
    pub quadrature: f64,
}

impl McCheck {
    pub fn new(mc: McEstimate, quadrature: f64) -> Self {
        Self {
            estimate: mc.estimate,
            std_error: mc.std_error,
            agrees: mc.agrees_with(quadrature),
            quadrature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub scenario_id: String,
    pub proposition: Proposition,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clause: Option<Clause>,
    pub status: Outcome,
    pub premises: IndexMap<String, bool>,
    /// `None` unless every premise holds.
    pub conclusion_holds: Option<bool>,
    pub witness: IndexMap<String, f64>,
    pub mc: Option<McCheck>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl VerificationRecord {
    fn new(id: &str, proposition: Proposition, clause: Option<Clause>) -> Self {
        Self {
            scenario_id: id.to_string(),
            proposition,
            clause,
            status: Outcome::PremiseFailure,
            premises: IndexMap::new(),
            conclusion_holds: None,
            witness: IndexMap::new(),
            mc: None,
            error: None,
        }
    }

    fn errored(id: &str, proposition: Proposition, clause: Option<Clause>, err: &Error) -> Self {
        let mut r = Self::new(id, proposition, clause);
        r.status = Outcome::Errored;
        r.error = Some(err.to_string());
        r
    }

    fn premise(&mut self, name: &str, holds: bool) {
        self.premises.insert(name.to_string(), holds);
    }

    fn witness(&mut self, name: &str, value: f64) {
        self.witness.insert(name.to_string(), value);
    }

    pub fn premises_hold(&self) -> bool {
        self.premises.values().all(|&v| v)
    }

    /// Sets the status from the premises, evaluating `conclusion` only when
    /// they all hold.
    fn conclude(&mut self, conclusion: impl FnOnce() -> bool) {
        if self.premises_hold() {
            let holds = conclusion();
            self.conclusion_holds = Some(holds);
            self.status = if holds { Outcome::Pass } else { Outcome::ConclusionFailure };
        } else {
            self.conclusion_holds = None;
            self.status = Outcome::PremiseFailure;
        }
    }

    /// Key used in summaries, e.g. `P4_1.right`.
    pub fn summary_key(&self) -> String {
        match self.clause {
            Some(Clause::Right) => format!("{}.right", self.proposition.name()),
            Some(Clause::Left) => format!("{}.left", self.proposition.name()),
            None => self.proposition.name().to_string(),
        }
    }
}

fn mc_check(samples: Option<&[f64]>, f: impl Fn(f64) -> f64, quadrature: f64) -> Option<McCheck> {
    samples
        .filter(|s| !s.is_empty())
        .map(|s| McCheck::new(McEstimate::from_values(s.iter().map(|&r| f(r))), quadrature))
}

fn report_flags(rec: &mut VerificationRecord, rep: &SolveReport, names: &[&str]) {
    for name in names {
        rec.premise(name, rep.flag(name).unwrap_or(false));
    }
}

/// Solves `α*` and checks the sign of `h` on each side of it.
///
/// `samples` are draws of R used for the Monte Carlo cross-check of
/// `E[min(R, D)]`.
pub fn verify_p31(s: &Scenario, samples: Option<&[f64]>) -> Result<VerificationRecord> {
    let mut rec = VerificationRecord::new(&s.id, Proposition::P31, None);
    let rate = s.rate;
    let e_min = s.dist.partial_expectation_min(rate, &s.quad)?;
    rec.mc = mc_check(samples, |r| r.min(rate), e_min);

    let star = match solve_alpha_star(&s.alloc, &s.dist, rate, &s.quad, &s.tol) {
        Ok(r) => r,
        Err(Error::NoRoot { f_lo, f_hi, .. }) => {
            rec.premise("beta_ge_half", s.alloc.beta() >= 0.5);
            rec.premise("sign_change_found", false);
            rec.premise("alpha_star_interior", false);
            rec.witness("h0", f_lo);
            rec.witness("h1", f_hi);
            rec.conclude(|| false);
            return Ok(rec);
        }
        Err(e) => return Err(e),
    };
    report_flags(&mut rec, &star, &["beta_ge_half", "sign_change_found", "alpha_star_interior"]);
    let a = star.value;
    rec.witness("alpha_star", a);
    rec.witness("residual", star.residual);
    if star.status == SolveStatus::Boundary {
        rec.status = Outcome::Boundary;
        return Ok(rec);
    }
    let h = |x: f64| financier_gap(&s.alloc, &s.dist, rate, x, &s.quad);
    let step = 1.0 / (SIGN_SAMPLES + 1) as f64;
    let mut below = Vec::with_capacity(SIGN_SAMPLES);
    let mut above = Vec::with_capacity(SIGN_SAMPLES);
    for k in 1..=SIGN_SAMPLES {
        let t = k as f64 * step;
        below.push(h(a * t)?);
        above.push(h(a + (1.0 - a) * t)?);
    }
    let max_below = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_above = above.iter().copied().fold(f64::INFINITY, f64::min);
    rec.witness("max_h_below", max_below);
    rec.witness("min_h_above", min_above);
    rec.witness("negative_below", below.iter().filter(|&&h| h < 0.0).count() as f64);
    rec.witness("positive_above", above.iter().filter(|&&h| h > 0.0).count() as f64);
    let payoff_tol = s.tol.payoff * s.alloc.total();
    rec.premise("residual_within_tolerance", star.residual <= payoff_tol);
    rec.conclude(|| max_below < 0.0 && min_above > 0.0);
    Ok(rec)
}

/// Finite law of `R` for the utility comparisons: exact when discrete.
fn finite_law(dist: &ReturnDistribution) -> Result<(FiniteDist, f64)> {
    let tol = if dist.is_discrete() { SOSD_TOL_EXACT } else { SOSD_TOL_DISCRETIZED };
    Ok((dist.discretize(DISCRETIZATION_ATOMS)?, tol))
}

/// Outcome of comparing two payoff laws for the left inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeftCheck {
    pub mean_gap: f64,
    pub equal_means: bool,
    pub eu_financier: f64,
    pub eu_investor: f64,
    pub relation: Sosd,
    /// `None` when the means differ.
    pub holds: Option<bool>,
}

/// Checks `E[U(s_p)] > E[U(s_y)]` with `s_p` a dominating spread-free
/// payoff, given that the two laws share a mean.
pub fn check_left_pair(
    u: &UtilityFunction,
    s_p: &FiniteDist,
    s_y: &FiniteDist,
    mean_gap: f64,
    sosd_tol: f64,
) -> Result<LeftCheck> {
    let eu_financier = s_p.try_expect(|x| u.eval(x))?;
    let eu_investor = s_y.try_expect(|x| u.eval(x))?;
    let equal_means = mean_gap.abs() <= MEAN_TOL;
    let relation = sosd_dominates_with_tol(s_p, s_y, sosd_tol).relation;
    let holds = equal_means.then_some(eu_financier > eu_investor && relation == Sosd::Dominates);
    Ok(LeftCheck {
        mean_gap,
        equal_means,
        eu_financier,
        eu_investor,
        relation,
        holds,
    })
}

/// Both inequalities for one scenario: the right one on a two-point spread
/// of `α*·R`, the left one on the contract-induced payoffs at `(α*, D*)`.
pub fn verify_p41(s: &Scenario, samples: Option<&[f64]>) -> Result<[VerificationRecord; 2]> {
    let mut right = VerificationRecord::new(&s.id, Proposition::P41, Some(Clause::Right));
    let mut left = VerificationRecord::new(&s.id, Proposition::P41, Some(Clause::Left));
    let star = match solve_alpha_star(&s.alloc, &s.dist, s.rate, &s.quad, &s.tol) {
        Ok(r) => Some(r),
        Err(e) if e.is_no_root() => None,
        Err(e) => return Err(e),
    };
    let solved = star.as_ref().is_some_and(SolveReport::is_success);
    let a = star.as_ref().map(|r| r.value).unwrap_or(0.0);
    let interior = solved && a > 0.0 && a < 1.0;
    for rec in [&mut right, &mut left] {
        rec.premise("alpha_star_solved", solved);
        rec.premise("alpha_star_interior", interior);
        if star.is_some() {
            rec.witness("alpha_star", a);
        }
    }
    if !interior {
        right.conclude(|| false);
        left.conclude(|| false);
        return Ok([right, left]);
    }
    let (law, sosd_tol) = finite_law(&s.dist)?;
    let u = &s.utility;

    // right: S_Y(R_1) against a mean-preserving spread of itself
    let base = law.map(|r| a * r)?;
    let eu_quad = expected_utility(u, &s.dist, &PayoffMap::Proportional { share: a }, &s.quad)?;
    right.mc = samples.and_then(|xs| {
        mc_check(Some(xs), |r| u.eval(a * r).unwrap_or(f64::NAN), eu_quad)
    });
    let width = base.max() - base.min();
    let mut scale = s
        .noise_scale
        .unwrap_or(if width > 0.0 { 0.1 * width } else { 0.1 * base.mean() });
    let (ulo, uhi) = u.domain();
    let mut halvings = 0;
    let inside = |sc: f64| base.min() - sc >= ulo && base.max() + sc <= uhi;
    while !inside(scale) && halvings < MAX_HALVINGS {
        scale *= 0.5;
        halvings += 1;
    }
    right.premise("mps_within_domain", inside(scale));
    right.witness("noise_scale", scale);
    right.witness("halvings", halvings as f64);
    if right.premises_hold() {
        let pair = make_mps(&base, &FiniteDist::symmetric_pair(scale)?)?;
        let eu_base = pair.base().try_expect(|x| u.eval(x))?;
        let eu_spread = pair.spread().try_expect(|x| u.eval(x))?;
        // exact pair construction: the spread is exact even for discretized laws
        let sosd = sosd_dominates_with_tol(pair.base(), pair.spread(), SOSD_TOL_EXACT);
        let taylor = taylor_gap(u, &pair)?;
        right.witness("eu_base", eu_base);
        right.witness("eu_spread", eu_spread);
        right.witness("utility_gap", eu_spread - eu_base);
        right.witness("taylor_approx", taylor.approx);
        right.witness("taylor_exact", taylor.exact);
        right.witness("sosd_max_violation", sosd.max_violation);
        let signs_agree = taylor.approx < 0.0 && taylor.exact < 0.0;
        right.conclude(|| eu_base > eu_spread && sosd.relation == Sosd::Dominates && signs_agree);
    } else {
        right.conclude(|| false);
    }

    // left: S_P(R_2) = min(R, D*) against S_Y(R_1) = α*·R
    let d_star = match solve_d_star(&s.alloc, &s.dist, a, &s.quad, &s.tol) {
        Ok(r) => Some(r),
        Err(e) if e.is_no_root() => None,
        Err(e) => return Err(e),
    };
    let d_ok = d_star.as_ref().is_some_and(|r| r.is_success() && r.value > 0.0);
    left.premise("d_star_solved", d_ok);
    if let (true, Some(rep)) = (d_ok, &d_star) {
        let d = rep.value;
        left.witness("d_star", d);
        let e_sp = s.dist.expect(|r| r.min(d), &[d], &s.quad)?;
        let e_sy = a * s.dist.mean(&s.quad);
        left.mc = mc_check(samples, |r| r.min(d), e_sp);
        let s_p = law.map(|r| r.min(d))?;
        let check = check_left_pair(u, &s_p, &base, e_sp - e_sy, sosd_tol)?;
        left.witness("mean_financier", e_sp);
        left.witness("mean_investor", e_sy);
        left.witness("mean_gap", check.mean_gap);
        left.witness("eu_financier", check.eu_financier);
        left.witness("eu_investor", check.eu_investor);
        left.premise("equal_means", check.equal_means);
        // identical laws admit no spread with positive variance
        left.premise("nondegenerate_spread", check.relation != Sosd::Equal);
        left.conclude(|| check.holds == Some(true));
    } else {
        left.conclude(|| false);
    }
    Ok([right, left])
}

/// Runs the reallocation construction at the scenario's share.
pub fn verify_p51(s: &Scenario, samples: Option<&[f64]>) -> Result<VerificationRecord> {
    let mut rec = VerificationRecord::new(&s.id, Proposition::P51, None);
    let u = &s.utility;
    let rep = pareto_construct(&s.alloc, &s.dist, s.rate, u, s.alpha, &s.quad, &s.tol)?;
    rec.premises = rep.premises.clone();
    rec.witness("alpha", s.alpha);
    if let Some(star) = &rep.alpha_star {
        rec.witness("alpha_star", star.value);
    }
    rec.witness("lambda", rep.lambda_report.value);
    rec.witness("gamma", rep.gamma_report.value);
    for (name, r) in [("d_p", &rep.d_p), ("d_y", &rep.d_y)] {
        if let Some(r) = r {
            rec.witness(name, r.value);
            rec.witness(&format!("{name}_residual"), r.residual);
        }
    }
    for h in &rep.half_split {
        rec.witness("boost", h.boost);
        rec.witness("boosted_share", h.boosted_share);
        rec.witness("counter_share", h.counter_share);
        rec.witness("resolved_rate", h.resolved.value);
        rec.witness("resolved_residual", h.resolved.residual);
        rec.witness("reused_rate", h.reused_rate);
        rec.witness("reused_residual", h.reused_residual);
        rec.witness("boosted_sr_eu", h.boosted_sr_eu);
        rec.witness("boosted_fr_eu", h.boosted_fr_eu);
        rec.witness("counter_sr_eu", h.counter_sr_eu);
        rec.witness("counter_fr_eu", h.counter_fr_eu);
    }

    let (map, quad_value) = match &rep.d_p {
        Some(dp) => {
            let m = PayoffMap::Capped { mult: 1.0, cap: dp.value };
            (m, expected_utility(u, &s.dist, &m, &s.quad)?)
        }
        None => {
            let m = PayoffMap::Proportional { share: s.alpha };
            (m, expected_utility(u, &s.dist, &m, &s.quad)?)
        }
    };
    rec.mc = mc_check(samples, |r| u.eval(map.apply(r)).unwrap_or(f64::NAN), quad_value);

    rec.conclude(|| rep.pareto_holds());
    let solved = rep.premises.get("alpha_star_solved").copied().unwrap_or(false);
    let off = rep.premises.get("alpha_off_alpha_star").copied().unwrap_or(false);
    if solved && !off {
        rec.status = Outcome::Boundary;
    }
    Ok(rec)
}

/// Outcome counts for one proposition or clause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseSummary {
    pub premise_failures: usize,
    pub conclusion_failures: usize,
    pub passes: usize,
    pub errored: usize,
}

pub const SUMMARY_KEYS: [&str; 4] = ["P3_1", "P4_1.right", "P4_1.left", "P5_1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub records: Vec<VerificationRecord>,
    pub summary: IndexMap<String, ClauseSummary>,
}

impl GridReport {
    pub fn from_records(records: Vec<VerificationRecord>) -> Self {
        let mut summary: IndexMap<String, ClauseSummary> =
            SUMMARY_KEYS.iter().map(|k| (k.to_string(), ClauseSummary::default())).collect();
        for r in &records {
            let entry = summary.entry(r.summary_key()).or_default();
            match r.status {
                Outcome::Pass => entry.passes += 1,
                Outcome::ConclusionFailure => entry.conclusion_failures += 1,
                Outcome::PremiseFailure | Outcome::Boundary => entry.premise_failures += 1,
                Outcome::Errored => entry.errored += 1,
            }
        }
        Self { records, summary }
    }

    pub fn conclusion_failures(&self) -> usize {
        self.summary.values().map(|s| s.conclusion_failures).sum()
    }

    pub fn errored(&self) -> usize {
        self.summary.values().map(|s| s.errored).sum()
    }

    /// (agreeing, total) over records that carry a Monte Carlo check.
    pub fn mc_agreement(&self) -> (usize, usize) {
        let checks: Vec<_> = self.records.iter().filter_map(|r| r.mc).collect();
        (checks.iter().filter(|c| c.agrees).count(), checks.len())
    }
}

fn run_scenario(s: &Scenario, props: &[Proposition], mc_samples: usize) -> Vec<VerificationRecord> {
    let mut out = Vec::new();
    let valid = s.validate();
    let samples = match (&valid, mc_samples) {
        (Ok(()), n) if n > 0 && !props.is_empty() => Some(s.dist.sample(s.seed, n)),
        _ => None,
    };
    let xs = samples.as_deref();
    for &p in props {
        match p {
            Proposition::P31 => out.push(
                valid
                    .clone()
                    .and_then(|_| verify_p31(s, xs))
                    .unwrap_or_else(|e| VerificationRecord::errored(&s.id, p, None, &e)),
            ),
            Proposition::P41 => match valid.clone().and_then(|_| verify_p41(s, xs)) {
                Ok(pair) => out.extend(pair),
                Err(e) => {
                    out.push(VerificationRecord::errored(&s.id, p, Some(Clause::Right), &e));
                    out.push(VerificationRecord::errored(&s.id, p, Some(Clause::Left), &e));
                }
            },
            Proposition::P51 => out.push(
                valid
                    .clone()
                    .and_then(|_| verify_p51(s, xs))
                    .unwrap_or_else(|e| VerificationRecord::errored(&s.id, p, None, &e)),
            ),
        }
    }
    out
}

/// Runs the requested checks over a batch. Records come back in batch
/// order; a failing scenario yields errored records without stopping the
/// batch. `jobs = 0` uses the default thread count.
pub fn run_grid(
    batch: &[Scenario],
    propositions: &[Proposition],
    mc_samples: usize,
    jobs: usize,
) -> Result<GridReport> {
    if batch.is_empty() {
        return Err(Error::invalid("scenario batch is empty"));
    }
    let mut seen = HashSet::new();
    for s in batch {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::invalid(format!("duplicate scenario id {:?}", s.id)));
        }
    }
    let mut props: Vec<Proposition> = Vec::new();
    for p in Proposition::ALL {
        if propositions.contains(&p) {
            props.push(p);
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let nested: Vec<Vec<VerificationRecord>> = pool.install(|| {
        batch
            .par_iter()
            .map(|s| run_scenario(s, &props, mc_samples))
            .collect()
    });
    Ok(GridReport::from_records(nested.into_iter().flatten().collect()))
}

/// splitmix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the scenario at `index` under the run seed.
pub fn scenario_seed(run_seed: u64, index: usize) -> u64 {
    mix64(run_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// The five return laws of the default grid, with short names.
pub fn default_laws() -> Result<Vec<(&'static str, ReturnDistribution)>> {
    Ok(vec![
        ("degenerate", ReturnDistribution::degenerate(0.2)?),
        (
            "discrete",
            ReturnDistribution::discrete([(0.02, 0.2), (0.08, 0.3), (0.15, 0.3), (0.3, 0.2)])?,
        ),
        ("uniform", ReturnDistribution::uniform(0.0, 1.0)?),
        ("beta", ReturnDistribution::scaled_beta(2.0, 5.0, 0.0, 1.0)?),
        ("truncnormal", ReturnDistribution::truncated_normal(0.15, 0.1, 0.0, 1.0)?),
    ])
}

pub fn default_families() -> [UtilityFamily; 4] {
    [
        UtilityFamily::Cara { a: 10.0 },
        UtilityFamily::Quadratic { b: 0.5 },
        UtilityFamily::Power { rho: 0.5 },
        UtilityFamily::LogShift { c: 0.05 },
    ]
}

pub const DEFAULT_BETAS: [f64; 4] = [0.5, 0.6, 0.75, 0.9];
pub const DEFAULT_RATES: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
pub const DEFAULT_ALPHA: f64 = 0.2;
pub const DEFAULT_TOTAL: f64 = 100.0;

/// Laws × utilities × β × D, 320 scenarios at `L = 100`, `α = 0.2`.
pub fn default_grid(run_seed: u64) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    for (name, dist) in default_laws()? {
        let (lo, hi) = payoff_domain(&dist);
        for family in default_families() {
            let utility = UtilityFunction::with_domain(family, lo, hi)?;
            for beta in DEFAULT_BETAS {
                for rate in DEFAULT_RATES {
                    let index = out.len();
                    out.push(Scenario {
                        id: format!("{name}-{}-b{beta}-d{rate}", family.name()),
                        alloc: FundAllocation::new(DEFAULT_TOTAL, beta)?,
                        dist: dist.clone(),
                        rate,
                        alpha: DEFAULT_ALPHA,
                        utility,
                        quad: QuadratureSpec::default(),
                        tol: Tolerances::default(),
                        seed: scenario_seed(run_seed, index),
                        noise_scale: None,
                    });
                }
            }
        }
    }
    Ok(out)
}
