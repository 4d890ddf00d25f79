//! Increasing, strictly concave utilities on a bounded payoff interval.

use serde::{Deserialize, Serialize};

use crate::contracts::PayoffMap;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::returns::ReturnDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum UtilityFamily {
    /// `(1 − e^{−a x}) / a`
    Cara { a: f64 },
    /// `x − (b/2) x²`, increasing only below `1/b`
    Quadratic { b: f64 },
    /// `x^ρ`
    Power { rho: f64 },
    /// `ln(x + c)`
    LogShift { c: f64 },
}

impl UtilityFamily {
    pub fn name(&self) -> &'static str {
        match self {
            UtilityFamily::Cara { .. } => "cara",
            UtilityFamily::Quadratic { .. } => "quadratic",
            UtilityFamily::Power { .. } => "power",
            UtilityFamily::LogShift { .. } => "logshift",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            UtilityFamily::Cara { a } => a,
            UtilityFamily::Quadratic { b } => b,
            UtilityFamily::Power { rho } => rho,
            UtilityFamily::LogShift { c } => c,
        }
    }

    pub fn from_name(name: &str, param: f64) -> Result<Self> {
        Ok(match name {
            "cara" => UtilityFamily::Cara { a: param },
            "quadratic" => UtilityFamily::Quadratic { b: param },
            "power" => UtilityFamily::Power { rho: param },
            "logshift" => UtilityFamily::LogShift { c: param },
            other => {
                return Err(Error::invalid(format!(
                    "unknown utility family `{other}` (expected cara, quadratic, power or logshift)"
                )))
            }
        })
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            UtilityFamily::Cara { a } => -(-a * x).exp_m1() / a,
            UtilityFamily::Quadratic { b } => x - 0.5 * b * x * x,
            UtilityFamily::Power { rho } => x.powf(rho),
            UtilityFamily::LogShift { c } => (x + c).ln(),
        }
    }

    fn first(&self, x: f64) -> f64 {
        match *self {
            UtilityFamily::Cara { a } => (-a * x).exp(),
            UtilityFamily::Quadratic { b } => 1.0 - b * x,
            UtilityFamily::Power { rho } => rho * x.powf(rho - 1.0),
            UtilityFamily::LogShift { c } => 1.0 / (x + c),
        }
    }

    fn second(&self, x: f64) -> f64 {
        match *self {
            UtilityFamily::Cara { a } => -a * (-a * x).exp(),
            UtilityFamily::Quadratic { b } => -b,
            UtilityFamily::Power { rho } => rho * (rho - 1.0) * x.powf(rho - 2.0),
            UtilityFamily::LogShift { c } => -1.0 / ((x + c) * (x + c)),
        }
    }
}

/// A utility family restricted to a closed payoff interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityFunction {
    family: UtilityFamily,
    lo: f64,
    hi: f64,
}

impl UtilityFunction {
    /// On the default domain \[0, 1\].
    pub fn new(family: UtilityFamily) -> Result<Self> {
        Self::with_domain(family, 0.0, 1.0)
    }

    pub fn with_domain(family: UtilityFamily, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("utility domain [{lo}, {hi}] is empty")));
        }
        let p = family.parameter();
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::invalid(format!(
                "{} utility parameter must be positive, got {p}",
                family.name()
            )));
        }
        match family {
            UtilityFamily::Quadratic { b } if hi >= 1.0 / b => {
                return Err(Error::invalid(format!(
                    "quadratic utility with b = {b} is not increasing on [{lo}, {hi}]; need hi < {}",
                    1.0 / b
                )))
            }
            UtilityFamily::Power { rho } if rho >= 1.0 => {
                return Err(Error::invalid(format!(
                    "power utility needs rho in (0, 1) for strict concavity, got {rho}"
                )))
            }
            UtilityFamily::Power { .. } if lo < 0.0 => {
                return Err(Error::invalid("power utility domain must start at or above 0"))
            }
            UtilityFamily::LogShift { c } if lo <= -c => {
                return Err(Error::invalid(format!(
                    "log utility ln(x + {c}) is undefined at the domain start {lo}"
                )))
            }
            _ => {}
        }
        let u = Self { family, lo, hi };
        for k in 0..=16 {
            let x = lo + (hi - lo) * (k as f64 / 16.0);
            let (d1, d2, v) = (family.first(x), family.second(x), family.value(x));
            if !(d1 > 0.0 && d2 < 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "{} utility is not increasing, strictly concave and bounded at x = {x}",
                    family.name()
                )));
            }
        }
        Ok(u)
    }

    pub fn family(&self) -> UtilityFamily {
        self.family
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn label(&self) -> String {
        format!("{}({})", self.family.name(), self.family.parameter())
    }

    fn check(&self, x: f64) -> Result<()> {
        if x >= self.lo && x <= self.hi {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.family.name(),
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.family.value(x))
    }

    pub fn deriv1(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.family.first(x))
    }

    pub fn deriv2(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.family.second(x))
    }
}

/// E\[U(s(R))\], split at the kinks of `s`.
pub fn expected_utility(
    u: &UtilityFunction,
    dist: &ReturnDistribution,
    map: &PayoffMap,
    quad: &QuadratureSpec,
) -> Result<f64> {
    dist.try_expect(|r| u.eval(map.apply(r)), &map.kinks(), quad)
}

/// The sure payoff with the same utility as `s(R)`, by bisection.
pub fn certainty_equivalent(
    u: &UtilityFunction,
    dist: &ReturnDistribution,
    map: &PayoffMap,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let eu = expected_utility(u, dist, map, quad)?;
    invert(u, eu)
}

/// Solve `u(c) = level` on the domain of `u`.
pub fn invert(u: &UtilityFunction, level: f64) -> Result<f64> {
    let (mut lo, mut hi) = u.domain();
    let (f_lo, f_hi) = (u.eval(lo)? - level, u.eval(hi)? - level);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::NoRoot {
            target: "certainty equivalent",
            lo,
            hi,
            f_lo,
            f_hi,
            note: Some(format!("utility level {level} outside the range of {}", u.label())),
        });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = u.eval(mid)? - level;
        if f == 0.0 {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the endpoint with the smaller residual
    let (rl, rh) = ((u.eval(lo)? - level).abs(), (u.eval(hi)? - level).abs());
    Ok(if rl <= rh { lo } else { hi })
}
