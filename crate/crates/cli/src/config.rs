//! Run configuration: a line-oriented `key = value` text format.
//!
//! ```text
//! # run-wide settings
//! run.seed = 42
//! run.propositions = P3_1, P4_1, P5_1
//!
//! # defaults shared by every block below
//! alloc.total = 100
//! utility.family = cara
//! utility.param = 10
//!
//! [scenario worked]
//! alloc.beta = [0.5, 0.75]
//! dist.kind = discrete
//! dist.atoms = 0.05:0.5, 0.15:0.5
//! contract.d = 0.10
//! ```
//!
//! A bracketed value is a list; a block with lists expands into the
//! cartesian product of them, earlier keys varying slowest. Without any
//! `[scenario ...]` block the top-level keys describe a single scenario.
//! `grid = default` adds the built-in 320-scenario grid.

use std::fmt::Write as _;

use indexmap::IndexMap;

use frsr::harness::{default_grid, payoff_domain, scenario_seed, DEFAULT_ALPHA, DEFAULT_TOTAL};
use frsr::{
    FundAllocation, Proposition, QuadratureSpec, ReturnDistribution, Scenario, Tolerances,
    UtilityFamily, UtilityFunction,
};

use crate::CliError;

pub const DEFAULT_MAX_SCENARIOS: usize = 10_000;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

const SCENARIO_KEYS: &[&str] = &[
    "alloc.total",
    "alloc.beta",
    "dist.kind",
    "dist.atoms",
    "dist.r0",
    "dist.lo",
    "dist.hi",
    "dist.a",
    "dist.b",
    "dist.mu",
    "dist.sigma",
    "contract.d",
    "contract.alpha",
    "utility.family",
    "utility.param",
    "utility.lo",
    "utility.hi",
    "noise.scale",
    "quad.nodes",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    One(String),
    List(Vec<String>),
}

impl Value {
    fn parse(raw: &str) -> Result<Self, String> {
        let raw = raw.trim();
        match raw.strip_prefix('[') {
            Some(rest) => {
                let inner = rest.strip_suffix(']').ok_or("unterminated list")?;
                let items: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
                if items.iter().any(String::is_empty) {
                    return Err("empty list item".into());
                }
                Ok(Value::List(items))
            }
            None => Ok(Value::One(raw.to_string())),
        }
    }

    fn render(&self) -> String {
        match self {
            Value::One(s) => s.clone(),
            Value::List(items) => format!("[{}]", items.join(", ")),
        }
    }

    fn len(&self) -> usize {
        match self {
            Value::One(_) => 1,
            Value::List(items) => items.len(),
        }
    }
}

pub type Entries = IndexMap<String, Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: String,
    pub entries: Entries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub mc_samples: usize,
    pub propositions: Vec<Proposition>,
    pub max_scenarios: usize,
    pub tol: Tolerances,
    pub out: Option<String>,
    pub default_grid: bool,
    /// Top-level scenario keys.
    pub defaults: Entries,
    pub blocks: Vec<Block>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mc_samples: DEFAULT_MC_SAMPLES,
            propositions: Proposition::ALL.to_vec(),
            max_scenarios: DEFAULT_MAX_SCENARIOS,
            tol: Tolerances::default(),
            out: None,
            default_grid: false,
            defaults: Entries::new(),
            blocks: Vec::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut current: Option<Block> = None;
        for (n, line) in text.lines().enumerate() {
            let at = |msg: String| CliError::Config(format!("line {}: {msg}", n + 1));
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header.strip_suffix(']').ok_or_else(|| at("unterminated header".into()))?;
                let id = header
                    .trim()
                    .strip_prefix("scenario")
                    .map(str::trim)
                    .filter(|id| !id.is_empty())
                    .ok_or_else(|| at(format!("expected [scenario <id>], got [{header}]")))?;
                if cfg.blocks.iter().chain(current.as_ref()).any(|b| b.id == id) {
                    return Err(at(format!("duplicate scenario id {id:?}")));
                }
                if let Some(b) = current.take() {
                    cfg.blocks.push(b);
                }
                current = Some(Block { id: id.to_string(), entries: Entries::new() });
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim();
            if key.starts_with("run.") || key.starts_with("solver.") || key == "grid" {
                if current.is_some() {
                    return Err(at(format!("{key} belongs before the first [scenario] block")));
                }
                cfg.set_run_key(key, raw.trim()).map_err(|e| match e {
                    CliError::Config(m) => at(m),
                    other => other,
                })?;
                continue;
            }
            if !SCENARIO_KEYS.contains(&key) {
                return Err(at(format!("unknown key {key:?}")));
            }
            let value = Value::parse(raw).map_err(|m| at(format!("{key}: {m}")))?;
            if key == "dist.atoms" && matches!(value, Value::List(_)) {
                return Err(at("dist.atoms cannot be a bracketed list".into()));
            }
            let entries = match current.as_mut() {
                Some(b) => &mut b.entries,
                None => &mut cfg.defaults,
            };
            if entries.insert(key.to_string(), value).is_some() {
                return Err(at(format!("{key} set twice")));
            }
        }
        if let Some(b) = current.take() {
            cfg.blocks.push(b);
        }
        Ok(cfg)
    }

    fn set_run_key(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        match key {
            "run.seed" => self.seed = parse_num(key, raw)?,
            "run.mc_samples" => self.mc_samples = parse_num(key, raw)?,
            "run.max_scenarios" => self.max_scenarios = parse_num(key, raw)?,
            "run.out" => self.out = Some(raw.to_string()),
            "run.propositions" => {
                self.propositions = if raw.is_empty() || raw == "none" {
                    Vec::new()
                } else {
                    raw.split(',')
                        .map(|p| Proposition::from_name(p).map_err(|e| CliError::Config(format!("{key}: {e}"))))
                        .collect::<Result<_, _>>()?
                };
            }
            "solver.rate" => self.tol.rate = parse_num(key, raw)?,
            "solver.payoff" => self.tol.payoff = parse_num(key, raw)?,
            "solver.utility" => self.tol.utility = parse_num(key, raw)?,
            "solver.max_iter" => self.tol.max_iter = parse_num(key, raw)?,
            "grid" => match raw {
                "default" => self.default_grid = true,
                "none" => self.default_grid = false,
                other => return Err(CliError::Config(format!("grid: unknown grid {other:?}"))),
            },
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical text that parses back to an equal config.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let props: Vec<&str> = self.propositions.iter().map(Proposition::name).collect();
        let props = if props.is_empty() { "none".to_string() } else { props.join(", ") };
        let _ = writeln!(s, "run.seed = {}", self.seed);
        let _ = writeln!(s, "run.mc_samples = {}", self.mc_samples);
        let _ = writeln!(s, "run.propositions = {props}");
        let _ = writeln!(s, "run.max_scenarios = {}", self.max_scenarios);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "run.out = {out}");
        }
        let _ = writeln!(s, "solver.rate = {:e}", self.tol.rate);
        let _ = writeln!(s, "solver.payoff = {:e}", self.tol.payoff);
        let _ = writeln!(s, "solver.utility = {:e}", self.tol.utility);
        let _ = writeln!(s, "solver.max_iter = {}", self.tol.max_iter);
        if self.default_grid {
            let _ = writeln!(s, "grid = default");
        }
        for (k, v) in &self.defaults {
            let _ = writeln!(s, "{k} = {}", v.render());
        }
        for b in &self.blocks {
            let _ = writeln!(s, "\n[scenario {}]", b.id);
            for (k, v) in &b.entries {
                let _ = writeln!(s, "{k} = {}", v.render());
            }
        }
        s
    }

    /// The blocks to expand: explicit ones, or the top level on its own.
    fn effective_blocks(&self) -> Result<Vec<Block>, CliError> {
        if !self.blocks.is_empty() {
            return Ok(self.blocks.clone());
        }
        if self.default_grid {
            if !self.defaults.is_empty() {
                return Err(CliError::Config(
                    "top-level scenario keys need a [scenario] block when grid = default".into(),
                ));
            }
            return Ok(Vec::new());
        }
        if self.defaults.is_empty() {
            return Err(CliError::Config("no scenarios: add a [scenario] block or `grid = default`".into()));
        }
        Ok(vec![Block { id: "scenario".into(), entries: Entries::new() }])
    }

    /// Number of scenarios the config expands to.
    pub fn scenario_count(&self) -> Result<usize, CliError> {
        let mut total: usize = if self.default_grid { 320 } else { 0 };
        for b in self.effective_blocks()? {
            let merged = merge(&self.defaults, &b.entries);
            let n = merged
                .values()
                .try_fold(1usize, |acc, v| acc.checked_mul(v.len()))
                .unwrap_or(usize::MAX);
            total = total.saturating_add(n);
        }
        Ok(total)
    }

    pub fn expand(&self) -> Result<Vec<Scenario>, CliError> {
        let count = self.scenario_count()?;
        if count > self.max_scenarios {
            return Err(CliError::Config(format!(
                "config expands to {count} scenarios, above run.max_scenarios = {}",
                self.max_scenarios
            )));
        }
        let mut out = Vec::with_capacity(count);
        if self.default_grid {
            for mut s in default_grid(self.seed)? {
                s.tol = self.tol;
                out.push(s);
            }
        }
        for b in self.effective_blocks()? {
            let merged = merge(&self.defaults, &b.entries);
            let combos = cartesian(&merged);
            let many = combos.len() > 1;
            for (k, combo) in combos.into_iter().enumerate() {
                let id = if many { format!("{}-{k}", b.id) } else { b.id.clone() };
                let index = out.len();
                let s = build_scenario(&id, &combo, scenario_seed(self.seed, index), self.tol)?;
                if out.iter().any(|o: &Scenario| o.id == s.id) {
                    return Err(CliError::Config(format!("duplicate scenario id {id:?}")));
                }
                out.push(s);
            }
        }
        Ok(out)
    }
}

fn merge(defaults: &Entries, entries: &Entries) -> Entries {
    let mut merged = defaults.clone();
    for (k, v) in entries {
        merged.insert(k.clone(), v.clone());
    }
    merged
}

fn cartesian(entries: &Entries) -> Vec<IndexMap<String, String>> {
    let mut combos = vec![IndexMap::new()];
    for (k, v) in entries {
        let items: Vec<&String> = match v {
            Value::One(s) => vec![s],
            Value::List(items) => items.iter().collect(),
        };
        let mut next = Vec::with_capacity(combos.len() * items.len());
        for c in &combos {
            for item in &items {
                let mut c2: IndexMap<String, String> = c.clone();
                c2.insert(k.clone(), (*item).clone());
                next.push(c2);
            }
        }
        combos = next;
    }
    combos
}

struct Fields<'a> {
    id: &'a str,
    map: &'a IndexMap<String, String>,
}

impl Fields<'_> {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("[scenario {}] {key}: {msg}", self.id))
    }

    fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.map
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| self.err(key, "missing required field"))
    }

    fn num(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| self.err(key, format!("cannot parse {raw:?} as a number")))
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        if self.map.contains_key(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    fn check<T>(&self, key: &str, r: frsr::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| self.err(key, e))
    }
}

fn parse_atoms(f: &Fields, raw: &str) -> Result<Vec<(f64, f64)>, CliError> {
    raw.split(',')
        .map(|pair| {
            let (x, p) = pair
                .split_once(':')
                .ok_or_else(|| f.err("dist.atoms", format!("expected value:prob, got {:?}", pair.trim())))?;
            let x = x.trim().parse().map_err(|_| f.err("dist.atoms", format!("bad value {x:?}")))?;
            let p = p.trim().parse().map_err(|_| f.err("dist.atoms", format!("bad probability {p:?}")))?;
            Ok((x, p))
        })
        .collect()
}

fn build_dist(f: &Fields) -> Result<ReturnDistribution, CliError> {
    let kind = f.raw("dist.kind")?;
    let key = "dist.kind";
    match kind {
        "degenerate" => f.check(key, ReturnDistribution::degenerate(f.num("dist.r0")?)),
        "discrete" => {
            let atoms = parse_atoms(f, f.raw("dist.atoms")?)?;
            f.check("dist.atoms", ReturnDistribution::discrete(atoms))
        }
        "uniform" => f.check(
            key,
            ReturnDistribution::uniform(f.num_or("dist.lo", 0.0)?, f.num_or("dist.hi", 1.0)?),
        ),
        "beta" => f.check(
            key,
            ReturnDistribution::scaled_beta(
                f.num("dist.a")?,
                f.num("dist.b")?,
                f.num_or("dist.lo", 0.0)?,
                f.num_or("dist.hi", 1.0)?,
            ),
        ),
        "truncnormal" => f.check(
            key,
            ReturnDistribution::truncated_normal(
                f.num("dist.mu")?,
                f.num("dist.sigma")?,
                f.num_or("dist.lo", 0.0)?,
                f.num_or("dist.hi", 1.0)?,
            ),
        ),
        other => Err(f.err(
            key,
            format!("unknown kind {other:?} (degenerate, discrete, uniform, beta, truncnormal)"),
        )),
    }
}

fn build_scenario(
    id: &str,
    map: &IndexMap<String, String>,
    seed: u64,
    tol: Tolerances,
) -> Result<Scenario, CliError> {
    let f = Fields { id, map };
    let dist = build_dist(&f)?;
    let total = f.num_or("alloc.total", DEFAULT_TOTAL)?;
    let alloc = f.check("alloc.beta", FundAllocation::new(total, f.num("alloc.beta")?))?;
    let family_name = f.raw("utility.family")?;
    let family = f.check("utility.family", UtilityFamily::from_name(family_name, f.num("utility.param")?))?;
    let (lo, hi) = payoff_domain(&dist);
    let utility = f.check(
        "utility.param",
        UtilityFunction::with_domain(family, f.num_or("utility.lo", lo)?, f.num_or("utility.hi", hi)?),
    )?;
    let nodes = f.num_or("quad.nodes", frsr::quadrature::DEFAULT_NODE_COUNT as f64)?;
    if nodes.fract() != 0.0 || nodes < 0.0 {
        return Err(f.err("quad.nodes", "must be a whole number"));
    }
    let quad = f.check("quad.nodes", QuadratureSpec::new(nodes as usize))?;
    let noise_scale = if map.contains_key("noise.scale") {
        Some(f.num("noise.scale")?)
    } else {
        None
    };
    let s = Scenario {
        id: id.to_string(),
        alloc,
        dist,
        rate: f.num("contract.d")?,
        alpha: f.num_or("contract.alpha", DEFAULT_ALPHA)?,
        utility,
        quad,
        tol,
        seed,
        noise_scale,
    };
    s.validate().map_err(|e| CliError::Config(format!("[scenario {id}] {e}")))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "\
run.seed = 11
alloc.total = 100
alloc.beta = 0.5
dist.kind = discrete
dist.atoms = 0.05:0.5, 0.15:0.5
contract.d = 0.10
utility.family = cara
utility.param = 10
";

    #[test]
    fn single_scenario() {
        let cfg = RunConfig::parse(WORKED).unwrap();
        let s = cfg.expand().unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, "scenario");
        assert_eq!(s[0].rate, 0.10);
        assert_eq!(s[0].alpha, DEFAULT_ALPHA);
    }

    #[test]
    fn list_expansion_and_cap() {
        let text = format!("{WORKED}[scenario g]\nalloc.beta = [0.5, 0.6, 0.7]\ncontract.d = [0.1, 0.2]\n");
        let cfg = RunConfig::parse(&text).unwrap();
        let s = cfg.expand().unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s[1].id, "g-1");
        assert_eq!((s[1].alloc.beta(), s[1].rate), (0.5, 0.2));
        let mut capped = cfg.clone();
        capped.max_scenarios = 5;
        assert!(capped.expand().unwrap_err().to_string().contains("run.max_scenarios"));
    }

    #[test]
    fn missing_kind_names_field() {
        let text = WORKED.replace("dist.kind = discrete\n", "");
        let err = RunConfig::parse(&text).unwrap().expand().unwrap_err();
        assert!(err.to_string().contains("dist.kind"), "{err}");
    }

    #[test]
    fn broken_utility_rejected() {
        // b = 10 puts the bliss point 0.1 inside the payoff domain [0, 0.1875]
        let text = WORKED.replace("cara", "quadratic");
        let err = RunConfig::parse(&text).unwrap().expand().unwrap_err();
        assert!(err.to_string().contains("utility"), "{err}");
    }

    #[test]
    fn dump_round_trips() {
        let text = format!("{WORKED}grid = none\n[scenario a]\nalloc.beta = [0.5, 0.75]\n[scenario b]\nnoise.scale = 0.005\n");
        let cfg = RunConfig::parse(&text).unwrap();
        let again = RunConfig::parse(&cfg.dump()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.dump(), again.dump());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::parse("dist.kinds = uniform\n").is_err());
        assert!(RunConfig::parse("[scenario a]\nrun.seed = 1\n").is_err());
    }
}
