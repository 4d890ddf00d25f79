//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! `cargo test -p frsr-cli --test acceptance`

use std::fmt::Display;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frsr::contracts::expected_payoffs;
use frsr::harness::{
    default_families, default_grid, default_laws, payoff_domain, run_grid, verify_p31, verify_p41,
    verify_p51, SIGN_SAMPLES,
};
use frsr::sharing::{make_mps, sosd_dominates, taylor_gap, Sosd};
use frsr::solvers::{pareto_construct, solve_alpha_star, solve_d_star, Branch};
use frsr::{
    FiniteDist, FundAllocation, McEstimate, Outcome, Proposition, QuadratureSpec,
    ReturnDistribution, Scenario, Tolerances, UtilityFamily, UtilityFunction,
};
use frsr_cli::{commands, RunConfig};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn err(e: impl Display) -> String {
    e.to_string()
}

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn worked_dist() -> ReturnDistribution {
    ReturnDistribution::discrete([(0.05, 0.5), (0.15, 0.5)]).unwrap()
}

fn scenario(id: String, beta: f64, dist: ReturnDistribution, rate: f64, alpha: f64, family: UtilityFamily) -> Scenario {
    let (lo, hi) = payoff_domain(&dist);
    Scenario {
        id,
        alloc: FundAllocation::new(100.0, beta).unwrap(),
        dist,
        rate,
        alpha,
        utility: UtilityFunction::with_domain(family, lo, hi).unwrap(),
        quad: q(),
        tol: tol(),
        seed: 11,
        noise_scale: None,
    }
}

fn suite_utilities() -> Vec<UtilityFunction> {
    default_families()
        .into_iter()
        .map(|f| UtilityFunction::with_domain(f, 0.0, 1.25).unwrap())
        .collect()
}

fn within_time(started: Instant, limit: Duration) -> Result<Duration, String> {
    let t = started.elapsed();
    if t < limit {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    }
}

fn worked_scenario() -> Check {
    let t0 = Instant::now();
    let alloc = FundAllocation::new(100.0, 0.5).map_err(err)?;
    let dist = worked_dist();
    let star = solve_alpha_star(&alloc, &dist, 0.10, &q(), &tol()).map_err(err)?;
    let d = solve_d_star(&alloc, &dist, star.value, &q(), &tol()).map_err(err)?;
    let p = expected_payoffs(&alloc, &dist, 0.10, star.value, &q()).map_err(err)?;
    let t = within_time(t0, Duration::from_secs(1))?;
    let close = |x: f64, want: f64| (x - want).abs() <= 1e-9;
    let ok = close(star.value, 0.25)
        && star.residual <= 1e-9
        && close(d.value, 0.10)
        && close(p.e_p1, 3.75)
        && close(p.e_p2, 3.75)
        && close(p.e_y1, 1.25)
        && close(p.e_y2, 1.25);
    let detail = format!(
        "alpha*={} |h|={:e} D*={} E(P)={}/{} E(Y)={}/{} in {t:.2?}",
        star.value, star.residual, d.value, p.e_p1, p.e_p2, p.e_y1, p.e_y2
    );
    if ok { Ok(detail) } else { Err(detail) }
}

fn uniform_closed_forms() -> Check {
    let dist = ReturnDistribution::uniform(0.0, 1.0).map_err(err)?;
    let alloc = FundAllocation::new(100.0, 0.5).map_err(err)?;
    let (mut worst_e, mut worst_a) = (0.0f64, 0.0f64);
    for d in [0.1, 0.3, 0.5, 0.9] {
        let e_min = dist.partial_expectation_min(d, &q()).map_err(err)?;
        let e_call = dist.partial_expectation_call(d, &q()).map_err(err)?;
        worst_e = worst_e.max((e_min - (d - d * d / 2.0)).abs());
        worst_e = worst_e.max((e_call - (1.0 - d).powi(2) / 2.0).abs());
        let star = solve_alpha_star(&alloc, &dist, d, &q(), &tol()).map_err(err)?;
        worst_a = worst_a.max((star.value - (1.0 - (d - d * d / 2.0) / 0.5)).abs());
    }
    let detail = format!("max payoff error {worst_e:e}, max alpha* error {worst_a:e}");
    if worst_e <= 1e-8 && worst_a <= 1e-6 { Ok(detail) } else { Err(detail) }
}

fn decomposition() -> Check {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (_, dist) in default_laws().map_err(err)? {
        let mean = dist.mean(&q());
        for d in frsr::harness::DEFAULT_RATES {
            let e_min = dist.partial_expectation_min(d, &q()).map_err(err)?;
            let e_call = dist.partial_expectation_call(d, &q()).map_err(err)?;
            worst = worst.max((e_min + e_call - mean).abs());
            n += 1;
        }
    }
    let detail = format!("{n} law/rate pairs, max |E[min]+E[call]-E[R]| = {worst:e}");
    if worst <= 1e-10 { Ok(detail) } else { Err(detail) }
}

fn random_law(rng: &mut ChaCha8Rng) -> ReturnDistribution {
    match rng.random_range(0..5) {
        0 => ReturnDistribution::degenerate(rng.random_range(0.02..0.9)).unwrap(),
        1 => {
            let k = rng.random_range(2..7);
            let atoms: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.random_range(0.01..0.95), rng.random_range(0.1..1.0)))
                .collect();
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            ReturnDistribution::discrete(atoms.into_iter().map(|(x, p)| (x, p / total))).unwrap()
        }
        2 => ReturnDistribution::uniform(rng.random_range(0.0..0.3), rng.random_range(0.5..1.0)).unwrap(),
        3 => ReturnDistribution::scaled_beta(
            rng.random_range(0.5..6.0),
            rng.random_range(0.5..6.0),
            rng.random_range(0.0..0.2),
            rng.random_range(0.6..1.0),
        )
        .unwrap(),
        _ => ReturnDistribution::truncated_normal(
            rng.random_range(0.05..0.6),
            rng.random_range(0.03..0.3),
            0.0,
            1.0,
        )
        .unwrap(),
    }
}

fn sign_suite() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 240;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..n {
        let s = scenario(
            format!("random-{i}"),
            rng.random_range(0.5..0.95),
            random_law(&mut rng),
            rng.random_range(0.02..0.6),
            0.2,
            UtilityFamily::Cara { a: 10.0 },
        );
        let r = verify_p31(&s, None).map_err(err)?;
        let residual = r.witness.get("residual").copied().unwrap_or(f64::INFINITY);
        worst = worst.max(residual);
        let signs = r.witness.get("negative_below") == Some(&(SIGN_SAMPLES as f64))
            && r.witness.get("positive_above") == Some(&(SIGN_SAMPLES as f64));
        if r.status != Outcome::Pass || residual > 1e-9 * s.alloc.total() || !signs {
            failures.push(s.id.clone());
        }
    }
    let t = within_time(t0, Duration::from_secs(10))?;
    let detail = format!("{n} scenarios, {} failures, max |h(alpha*)| {worst:e}, {t:.2?}", failures.len());
    if failures.is_empty() { Ok(detail) } else { Err(format!("{detail}: {failures:?}")) }
}

fn mps_bases() -> Vec<FiniteDist> {
    let mut bases = Vec::new();
    for (_, dist) in default_laws().unwrap() {
        let law = dist.discretize(64).unwrap();
        for share in [0.2, 0.4, 0.6, 0.8, 1.0] {
            bases.push(law.map(|r| share * r).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let k = rng.random_range(2..9);
        let atoms: Vec<(f64, f64)> = (0..k).map(|_| (rng.random_range(0.05..0.95), 1.0 / k as f64)).collect();
        bases.push(FiniteDist::new(atoms).unwrap());
    }
    bases
}

fn right_inequality() -> Check {
    let utilities = suite_utilities();
    let mut pairs = 0;
    let mut failures = 0;
    let mut worst_quadratic = 0.0f64;
    for base in mps_bases() {
        for scale in [0.002, 0.005, 0.01, 0.02] {
            if base.min() - scale < 0.0 || base.max() + scale > 1.25 {
                continue;
            }
            let pair = make_mps(&base, &FiniteDist::symmetric_pair(scale).unwrap()).map_err(err)?;
            pairs += 1;
            if sosd_dominates(pair.base(), pair.spread()).relation != Sosd::Dominates {
                failures += 1;
            }
            for u in &utilities {
                let eu_base = pair.base().try_expect(|x| u.eval(x)).map_err(err)?;
                let eu_spread = pair.spread().try_expect(|x| u.eval(x)).map_err(err)?;
                let t = taylor_gap(u, &pair).map_err(err)?;
                if !(eu_base > eu_spread && t.approx < 0.0 && t.exact < 0.0) {
                    failures += 1;
                }
                if let UtilityFamily::Quadratic { .. } = u.family() {
                    worst_quadratic = worst_quadratic.max((t.approx - t.exact).abs());
                }
            }
        }
    }
    let detail = format!(
        "{pairs} pairs x {} utilities, {failures} failures, quadratic |approx-exact| max {worst_quadratic:e}",
        utilities.len()
    );
    if pairs >= 100 && failures == 0 && worst_quadratic <= 1e-14 { Ok(detail) } else { Err(detail) }
}

fn left_premise_audit() -> Check {
    let s = scenario("worked".into(), 0.5, worked_dist(), 0.10, 0.2, UtilityFamily::Cara { a: 10.0 });
    let [_, left] = verify_p41(&s, None).map_err(err)?;
    let gap = left.witness.get("mean_gap").copied().unwrap_or(f64::NAN);
    let ok = left.status == Outcome::PremiseFailure
        && left.premises.get("equal_means") == Some(&false)
        && left.conclusion_holds.is_none()
        && (gap - 0.05).abs() <= 1e-12;
    let detail = format!("status {:?}, mean gap {gap}", left.status);
    if ok { Ok(detail) } else { Err(detail) }
}

/// Branch-interior share: halfway into the investor or financier interval.
fn branch_alpha(branch: Branch, a_star: f64) -> f64 {
    match branch {
        Branch::Investor => 0.5 * a_star,
        Branch::Financier => a_star + 0.5 * a_star.min(1.0 - 2.0 * a_star),
    }
}

/// One configuration per law kind where both parties gain weakly.
const DOCUMENTED: [(&str, UtilityFamily, f64, f64, Branch); 5] = [
    ("degenerate", UtilityFamily::Cara { a: 10.0 }, 0.6, 0.2, Branch::Financier),
    ("discrete", UtilityFamily::Cara { a: 10.0 }, 0.6, 0.2, Branch::Investor),
    ("uniform", UtilityFamily::Cara { a: 10.0 }, 0.5, 0.4, Branch::Financier),
    ("beta", UtilityFamily::Cara { a: 10.0 }, 0.6, 0.4, Branch::Investor),
    ("truncnormal", UtilityFamily::Cara { a: 10.0 }, 0.6, 0.2, Branch::Investor),
];

fn pareto_constructions() -> Check {
    let laws = default_laws().map_err(err)?;
    let mut problems = Vec::new();
    let (mut constructed, mut boundaries) = (0, 0);
    for (name, dist) in &laws {
        let (lo, hi) = payoff_domain(dist);
        for family in default_families() {
            let u = UtilityFunction::with_domain(family, lo, hi).map_err(err)?;
            for beta in frsr::harness::DEFAULT_BETAS {
                for rate in frsr::harness::DEFAULT_RATES {
                    let alloc = FundAllocation::new(100.0, beta).map_err(err)?;
                    let Ok(star) = solve_alpha_star(&alloc, dist, rate, &q(), &tol()) else { continue };
                    let a_star = star.value;
                    let id = format!("{name}-{}-b{beta}-d{rate}", family.name());
                    if !(a_star > 0.0 && a_star < 1.0) {
                        continue;
                    }

                    let at_star = scenario(id.clone(), beta, dist.clone(), rate, a_star, family);
                    let rec = verify_p51(&at_star, None).map_err(err)?;
                    boundaries += 1;
                    if rec.status != Outcome::Boundary
                        || rec.premises.get("alpha_off_alpha_star") != Some(&false)
                        || rec.conclusion_holds.is_some()
                    {
                        problems.push(format!("{id}: boundary not flagged"));
                    }

                    if a_star >= 0.5 {
                        continue;
                    }
                    for branch in [Branch::Investor, Branch::Financier] {
                        let alpha = branch_alpha(branch, a_star);
                        let rep = pareto_construct(&alloc, dist, rate, &u, alpha, &q(), &tol()).map_err(err)?;
                        constructed += 1;
                        let (share, member) = match branch {
                            Branch::Financier => (rep.lambda_report.value, rep.lambda_report.flag("lambda_in_interval")),
                            Branch::Investor => (rep.gamma_report.value, rep.gamma_report.flag("gamma_in_interval")),
                        };
                        if rep.branch != Some(branch) || member != Some(true) || !(share > 0.0 && share < a_star) {
                            problems.push(format!("{id} {branch:?}: interval membership"));
                        }
                        let residuals = rep
                            .d_p
                            .iter()
                            .chain(&rep.d_y)
                            .map(|r| r.residual)
                            .chain(rep.half_split.iter().map(|h| h.resolved.residual));
                        if rep.premises_hold() && residuals.into_iter().any(|r| r > 1e-8) {
                            problems.push(format!("{id} {branch:?}: indifference residual"));
                        }
                    }
                }
            }
        }
    }
    let mut documented = Vec::new();
    for (kind, family, beta, rate, branch) in DOCUMENTED {
        let (_, dist) = laws.iter().find(|(n, _)| *n == kind).unwrap();
        let (lo, hi) = payoff_domain(dist);
        let u = UtilityFunction::with_domain(family, lo, hi).map_err(err)?;
        let alloc = FundAllocation::new(100.0, beta).map_err(err)?;
        let star = solve_alpha_star(&alloc, dist, rate, &q(), &tol()).map_err(err)?;
        let alpha = branch_alpha(branch, star.value);
        let rep = pareto_construct(&alloc, dist, rate, &u, alpha, &q(), &tol()).map_err(err)?;
        let weak = rep.pareto_holds()
            && rep.half_split.iter().all(|h| h.financier_weakly_better && h.investor_weakly_better);
        documented.push(format!("{kind}:{}", if weak { "ok" } else { "no" }));
        if !weak {
            problems.push(format!("{kind} documented configuration is not a Pareto improvement"));
        }
    }
    let detail = format!(
        "{constructed} constructions, {boundaries} boundary checks, documented [{}]",
        documented.join(" ")
    );
    if problems.is_empty() { Ok(detail) } else { Err(format!("{detail}; {}", problems.join("; "))) }
}

fn monte_carlo() -> Check {
    let t0 = Instant::now();
    let n = 1_000_000;
    let grid = default_grid(42).map_err(err)?;
    let report = run_grid(&grid, &Proposition::ALL, n, 0).map_err(err)?;
    let (mut agree, mut total) = report.mc_agreement();
    for (k, (_, dist)) in default_laws().map_err(err)?.into_iter().enumerate() {
        let xs = dist.sample(1000 + k as u64, n);
        let mean = McEstimate::from_values(xs.iter().copied());
        total += 1;
        agree += usize::from(mean.agrees_with(dist.mean(&q())));
        for d in frsr::harness::DEFAULT_RATES {
            let e_min = McEstimate::from_values(xs.iter().map(|&r| r.min(d)));
            let e_call = McEstimate::from_values(xs.iter().map(|&r| (r - d).max(0.0)));
            total += 2;
            agree += usize::from(e_min.agrees_with(dist.partial_expectation_min(d, &q()).map_err(err)?));
            agree += usize::from(e_call.agrees_with(dist.partial_expectation_call(d, &q()).map_err(err)?));
        }
    }
    let t = within_time(t0, Duration::from_secs(60))?;
    let share = agree as f64 / total as f64;
    let detail = format!("{agree}/{total} within 4 standard errors ({:.2}%), {t:.2?}", 100.0 * share);
    if share >= 0.99 { Ok(detail) } else { Err(detail) }
}

fn determinism() -> Check {
    let cfg = RunConfig::parse("grid = default\nrun.seed = 42\nrun.mc_samples = 100000\n").map_err(err)?;
    let mut reports = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(err)?;
        let code = commands::verify(&cfg, dir.path(), 0).map_err(err)?;
        if code != 0 {
            return Err(format!("verify exited {code}"));
        }
        reports.push(std::fs::read(dir.path().join("report.json")).map_err(err)?);
    }
    let detail = format!("two runs, {} bytes each", reports[0].len());
    if reports[0] == reports[1] { Ok(detail) } else { Err(format!("reports differ; {detail}")) }
}

fn derivatives() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let h = 1e-5;
    for u in suite_utilities() {
        let (lo, hi) = u.domain();
        for _ in 0..100 {
            let x = lo + rng.random_range(0.02..0.98) * (hi - lo);
            let fd1 = (u.eval(x + h).map_err(err)? - u.eval(x - h).map_err(err)?) / (2.0 * h);
            let fd2 = (u.deriv1(x + h).map_err(err)? - u.deriv1(x - h).map_err(err)?) / (2.0 * h);
            let d1 = u.deriv1(x).map_err(err)?;
            let d2 = u.deriv2(x).map_err(err)?;
            worst = worst.max(((fd1 - d1) / d1).abs()).max(((fd2 - d2) / d2).abs());
        }
    }
    let detail = format!("400 points, max relative error {worst:e}");
    if worst <= 1e-6 { Ok(detail) } else { Err(detail) }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worked scenario exactness", worked_scenario),
        ("uniform closed forms", uniform_closed_forms),
        ("decomposition identity", decomposition),
        ("indifference share sign suite", sign_suite),
        ("spread lowers expected utility", right_inequality),
        ("left clause premise audit", left_premise_audit),
        ("reallocation constructions", pareto_constructions),
        ("Monte Carlo cross-validation", monte_carlo),
        ("determinism", determinism),
        ("derivative checks", derivatives),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
