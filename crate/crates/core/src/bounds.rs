//! Closed-form consensus-time and consensus-variance bounds, and the
//! comparison of Monte Carlo estimates against them.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::dynamics::InitialOpinionSpec;
use crate::error::{invalid, Result};
use crate::graph::{metrics, GraphMetrics};
use crate::spectral::{self, SpectralReport};

/// Censored fraction above which a comparison is not trusted.
pub const MAX_CENSORED_FRACTION: f64 = 0.05;

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid(format!("{name} must be positive and finite, got {x}"));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid(format!("eps must lie in (0, 1], got {eps}"));
    }
    Ok(())
}

/// `(1/gamma) log(4e E0 / (gamma pi_min eps^2))`, floored at zero.
pub fn reversible_tau_bound(gamma: f64, pi_min: f64, eps: f64, energy0: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    positive("pi_min", pi_min)?;
    check_eps(eps)?;
    if energy0 < 0.0 {
        return invalid(format!("energy must be non-negative, got {energy0}"));
    }
    if energy0 == 0.0 {
        return Ok(0.0);
    }
    Ok(((4.0 * E * energy0 / (gamma * pi_min * eps * eps)).ln() / gamma).max(0.0))
}

/// The energy bound with `E0 <= 1/2`: `(1/gamma) log(2e / (gamma pi_min eps^2))`.
pub fn reversible_tau_bound_osc(gamma: f64, pi_min: f64, eps: f64) -> Result<f64> {
    reversible_tau_bound(gamma, pi_min, eps, 0.5)
}

/// Resistance measured through the walk energy (`1 / (|E| min energy)`) is
/// twice the unit-resistor value; the resistance form of [`srw_tau_bound`]
/// needs it in that normalization.
pub const ENERGY_RESISTANCE_FACTOR: f64 = 2.0;

/// `(R |E| + 1) ceil(log2(1/eps))` with `R` a resistance or the diameter.
pub fn srw_tau_bound(resistance_or_diameter: f64, edge_count: usize, eps: f64) -> Result<f64> {
    positive("resistance", resistance_or_diameter)?;
    check_eps(eps)?;
    Ok((resistance_or_diameter * edge_count as f64 + 1.0) * (1.0 / eps).log2().ceil())
}

/// `C Delta n^2 log(1/eps)`; `C` is not quantified.
pub fn degree_tau_bound(c: f64, max_degree: usize, n: usize, eps: f64) -> Result<f64> {
    positive("C", c)?;
    check_eps(eps)?;
    Ok(c * max_degree as f64 * (n as f64).powi(2) * (1.0 / eps).ln())
}

fn variance_log(var0: f64, pi_min: f64, eps: f64) -> Option<f64> {
    (4.0 * var0 >= eps * eps * pi_min).then(|| (4.0 * E * var0 / (eps * eps * pi_min)).ln())
}

/// `(1/gamma_hat) log(4e var0 / (eps^2 pi_min))`, zero when
/// `4 var0 < eps^2 pi_min` (the start is already an `eps`-consensus).
pub fn general_tau_bound(gamma_hat: f64, var0: f64, pi_min: f64, eps: f64) -> Result<f64> {
    positive("gamma_hat", gamma_hat)?;
    positive("pi_min", pi_min)?;
    check_eps(eps)?;
    Ok(variance_log(var0, pi_min, eps).map_or(0.0, |l| l / gamma_hat))
}

/// General bound with `gamma_hat` replaced by `2 delta gamma`.
pub fn lazy_tau_bound(gamma: f64, delta: f64, var0: f64, pi_min: f64, eps: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    general_tau_bound(2.0 * delta * gamma, var0, pi_min, eps)
}

/// `C n m^2 log(e m / eps^2)`, or `C n m log(e m / eps^2)` for the lazy walk.
pub fn eulerian_tau_bound(c: f64, n: usize, m: usize, eps: f64, lazy: bool) -> Result<f64> {
    positive("C", c)?;
    check_eps(eps)?;
    let (n, m) = (n as f64, m as f64);
    let power = if lazy { m } else { m * m };
    Ok(c * n * power * (E * m / (eps * eps)).ln())
}

/// `(pi_min E0, pi_max E0)`.
pub fn variance_bounds(pi_min: f64, pi_max: f64, energy0: f64) -> (f64, f64) {
    (pi_min * energy0, pi_max * energy0)
}

/// Random start: `Var(M_0)` plus the deterministic sandwich at the expected energy.
pub fn variance_bounds_random(pi_min: f64, pi_max: f64, expected_energy0: f64, var_m0: f64) -> (f64, f64) {
    let (lo, hi) = variance_bounds(pi_min, pi_max, expected_energy0);
    (var_m0 + lo, var_m0 + hi)
}

/// `pi_max var0 / delta`.
pub fn variance_bound_lazy(pi_max: f64, var0: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    Ok(pi_max * var0 / delta)
}

/// `Delta / |E|`.
pub fn variance_bound_srw(max_degree: usize, edge_count: usize) -> f64 {
    max_degree as f64 / edge_count as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// Expected `eps`-consensus time.
    Tau,
    /// Variance of the consensus value.
    Variance,
    Covariance,
    Probability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub quantity: Quantity,
    pub kind: BoundKind,
    pub formula: String,
    pub inputs: BTreeMap<String, f64>,
    /// `None` when the bound does not apply.
    pub value: Option<f64>,
    pub applicable: bool,
    pub reason: Option<String>,
    /// The formula carries a constant with no known value; `C` defaults to 1.
    pub unspecified_constant: bool,
}

impl BoundReport {
    fn new(name: &str, quantity: Quantity, kind: BoundKind, formula: &str) -> Self {
        Self {
            name: name.into(),
            quantity,
            kind,
            formula: formula.into(),
            inputs: BTreeMap::new(),
            value: None,
            applicable: false,
            reason: None,
            unspecified_constant: false,
        }
    }

    /// An applicable bound with a value computed elsewhere.
    pub fn manual(name: &str, quantity: Quantity, kind: BoundKind, formula: &str, value: f64) -> Self {
        let mut b = Self::new(name, quantity, kind, formula);
        b.value = Some(value);
        b.applicable = true;
        b
    }

    fn input(mut self, key: &str, x: f64) -> Self {
        self.inputs.insert(key.into(), x);
        self
    }

    fn evaluate(mut self, ok: std::result::Result<(), String>, value: impl FnOnce() -> Result<f64>) -> Self {
        match ok.map_err(Into::into).and_then(|_| value().map_err(|e| e.to_string())) {
            Ok(v) => {
                self.value = Some(v);
                self.applicable = true;
            }
            Err(reason) => self.reason = Some(reason),
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
    NotApplicable,
}

/// Compares a measured mean (with standard error) against a bound: an upper
/// bound is consistent when `mean - 3 se <= bound`, a lower bound when
/// `mean + 3 se >= bound`.
pub fn compare(mean: f64, stderr: f64, censored_fraction: f64, bound: &BoundReport) -> Verdict {
    let Some(value) = bound.value else {
        return Verdict::NotApplicable;
    };
    if censored_fraction > MAX_CENSORED_FRACTION || !mean.is_finite() {
        return Verdict::Inconclusive;
    }
    let se = if stderr.is_finite() { stderr } else { 0.0 };
    let ok = match bound.kind {
        BoundKind::Upper => mean - 3.0 * se <= value,
        BoundKind::Lower => mean + 3.0 * se >= value,
    };
    if ok {
        Verdict::Consistent
    } else {
        Verdict::Violated
    }
}

/// Unquantified constants, all defaulting to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub degree: f64,
    pub eulerian: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { degree: 1.0, eulerian: 1.0 }
    }
}

/// Summary of the initial profile used by the bounds; for random laws the
/// expectations over the law are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub energy: f64,
    pub variance: f64,
    pub osc_at_most_one: bool,
    pub sup_norm_at_most_one: bool,
    /// `Var(M_0)`; zero for a fixed start.
    pub mean_variance: f64,
    pub random: bool,
}

impl InitialProfile {
    pub fn fixed(chain: &Chain, f0: &[f64]) -> Self {
        let s = chain.summarize(f0);
        Self {
            energy: s.energy,
            variance: s.variance,
            osc_at_most_one: s.osc <= 1.0,
            sup_norm_at_most_one: f0.iter().all(|x| x.abs() <= 1.0),
            mean_variance: 0.0,
            random: false,
        }
    }

    /// Expected energy and variance of an iid start with variance `sigma2`.
    pub fn iid(chain: &Chain, init: &InitialOpinionSpec) -> Option<Self> {
        let sigma2 = init.iid_variance()?;
        let pi = chain.pi();
        let p = chain.matrix();
        let off_diagonal: f64 = (0..chain.n()).map(|v| pi[v] * (1.0 - p.entry(v, v))).sum();
        let pi_sq: f64 = pi.iter().map(|x| x * x).sum();
        Some(Self {
            energy: sigma2 * off_diagonal,
            variance: sigma2 * (1.0 - pi_sq),
            osc_at_most_one: init.osc_at_most_one().unwrap_or(false),
            sup_norm_at_most_one: matches!(init, InitialOpinionSpec::Uniform | InitialOpinionSpec::Bernoulli { .. } | InitialOpinionSpec::Sign),
            mean_variance: sigma2 * pi_sq,
            random: true,
        })
    }
}

/// Structural facts the bounds depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFacts {
    pub n: usize,
    pub metrics: GraphMetrics,
    pub spectral: SpectralReport,
    pub pi_min: f64,
    pub pi_max: f64,
    /// `min_v P(v, v)`.
    pub delta: f64,
    /// Maximal effective resistance, when the support is undirected.
    pub r_max: Option<f64>,
    /// Lazy (holding 1/2) walk on an Eulerian digraph.
    pub lazy_eulerian: bool,
}

impl ChainFacts {
    pub fn new(chain: &Chain) -> Result<Self> {
        let p = chain.matrix();
        let metrics = metrics(p);
        let spectral = chain.spectral()?;
        let r_max = if metrics.is_undirected { Some(spectral::r_max(p)?.r_max) } else { None };
        let delta = (0..p.n()).map(|v| p.entry(v, v)).fold(f64::INFINITY, f64::min);
        Ok(Self {
            n: p.n(),
            lazy_eulerian: is_lazy_eulerian(chain),
            metrics,
            spectral,
            pi_min: chain.stationary().pi_min,
            pi_max: chain.stationary().pi_max,
            delta,
            r_max,
        })
    }
}

fn is_lazy_eulerian(chain: &Chain) -> bool {
    let p = chain.matrix();
    let n = p.n();
    let mut indeg = vec![0usize; n];
    for v in 0..n {
        if (p.entry(v, v) - 0.5).abs() > 1e-15 {
            return false;
        }
        let others: Vec<(usize, f64)> = p.row_entries(v).filter(|&(u, _)| u != v).collect();
        let share = 0.5 / others.len() as f64;
        if others.iter().any(|&(_, w)| (w - share).abs() > 1e-15) {
            return false;
        }
        for (u, _) in others {
            indeg[u] += 1;
        }
    }
    (0..n).all(|v| indeg[v] == p.out_degree(v) - 1)
}

fn require(cond: bool, reason: &str) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(reason.to_string())
    }
}

/// Every bound with its applicability for the given start and `eps`.
pub fn all_bounds(facts: &ChainFacts, f0: &InitialProfile, eps: f64, constants: Constants) -> Vec<BoundReport> {
    use BoundKind::*;
    use Quantity::*;
    let s = &facts.spectral;
    let m = &facts.metrics;
    let srw_undirected = m.is_simple_random_walk && m.is_undirected;
    let osc1 = require(f0.osc_at_most_one, "needs osc(f0) <= 1");
    let reversible = require(s.reversible, "needs a reversible chain");
    let both = |a: &std::result::Result<(), String>, b: &std::result::Result<(), String>| a.clone().and(b.clone());
    let mut out = Vec::new();

    out.push(
        BoundReport::new("reversible-energy", Tau, Upper, "(1/gamma) log(4e E0 / (gamma pi_min eps^2))")
            .input("gamma", s.gamma)
            .input("pi_min", facts.pi_min)
            .input("eps", eps)
            .input("energy0", f0.energy)
            .evaluate(both(&reversible, &osc1), || reversible_tau_bound(s.gamma, facts.pi_min, eps, f0.energy)),
    );
    out.push(
        BoundReport::new("reversible", Tau, Upper, "(1/gamma) log(2e / (gamma pi_min eps^2))")
            .input("gamma", s.gamma)
            .input("pi_min", facts.pi_min)
            .input("eps", eps)
            .evaluate(both(&reversible, &osc1), || reversible_tau_bound_osc(s.gamma, facts.pi_min, eps)),
    );
    let srw = require(srw_undirected, "needs a simple random walk on an undirected graph");
    out.push(
        BoundReport::new("srw-diameter", Tau, Upper, "(diam |E| + 1) ceil(log2(1/eps))")
            .input("diameter", m.diameter as f64)
            .input("edge_count", m.edge_count.unwrap_or(0) as f64)
            .input("eps", eps)
            .evaluate(both(&srw, &osc1), || srw_tau_bound(m.diameter as f64, m.edge_count.unwrap_or(0), eps)),
    );
    out.push(
        BoundReport::new("srw-resistance", Tau, Upper, "(2 R_max |E| + 1) ceil(log2(1/eps))")
            .input("r_max", facts.r_max.unwrap_or(f64::NAN))
            .input("edge_count", m.edge_count.unwrap_or(0) as f64)
            .input("eps", eps)
            .evaluate(both(&srw, &osc1), || {
                srw_tau_bound(ENERGY_RESISTANCE_FACTOR * facts.r_max.unwrap_or(f64::NAN), m.edge_count.unwrap_or(0), eps)
            }),
    );
    let mut degree = BoundReport::new("srw-degree", Tau, Upper, "C Delta n^2 log(1/eps)")
        .input("C", constants.degree)
        .input("max_degree", m.max_degree as f64)
        .input("n", facts.n as f64)
        .input("eps", eps)
        .evaluate(both(&srw, &require(f0.sup_norm_at_most_one, "needs |f0| <= 1")), || {
            degree_tau_bound(constants.degree, m.max_degree, facts.n, eps)
        });
    degree.unspecified_constant = true;
    out.push(degree);
    out.push(
        BoundReport::new("general", Tau, Upper, "(1/gamma_hat) log(4e var0 / (eps^2 pi_min))")
            .input("gamma_hat", s.gamma_hat)
            .input("gamma", s.gamma)
            .input("gamma_star", s.gamma_star)
            .input("var0", f0.variance)
            .input("pi_min", facts.pi_min)
            .input("eps", eps)
            .evaluate(Ok(()), || general_tau_bound(s.gamma_hat, f0.variance, facts.pi_min, eps)),
    );
    let lazy = require(facts.delta > 0.0, "needs P(v, v) >= delta > 0");
    out.push(
        BoundReport::new("lazy", Tau, Upper, "(1/(2 delta gamma)) log(4e var0 / (eps^2 pi_min))")
            .input("gamma", s.gamma)
            .input("delta", facts.delta)
            .input("var0", f0.variance)
            .input("pi_min", facts.pi_min)
            .input("eps", eps)
            .evaluate(lazy.clone(), || lazy_tau_bound(s.gamma, facts.delta, f0.variance, facts.pi_min, eps)),
    );
    let eulerian_srw = m.is_eulerian && m.is_simple_random_walk;
    let arcs = m.arc_count;
    let mut eulerian = BoundReport::new(
        "eulerian",
        Tau,
        Upper,
        if facts.lazy_eulerian { "C n m log(e m / eps^2)" } else { "C n m^2 log(e m / eps^2)" },
    )
    .input("C", constants.eulerian)
    .input("n", facts.n as f64)
    .input("m", arcs as f64)
    .input("eps", eps)
    .evaluate(
        both(&require(eulerian_srw || facts.lazy_eulerian, "needs a (lazy) simple random walk on an Eulerian digraph"), &osc1),
        || eulerian_tau_bound(constants.eulerian, facts.n, arcs, eps, facts.lazy_eulerian),
    );
    eulerian.unspecified_constant = true;
    out.push(eulerian);

    let (lo, hi) = variance_bounds_random(facts.pi_min, facts.pi_max, f0.energy, f0.mean_variance);
    let var_formula = |b: &str| if f0.random { format!("Var(M0) + {b} E[E0]") } else { format!("{b} E0") };
    out.push(
        BoundReport::new("variance-reversible-lower", Variance, Lower, &var_formula("pi_min"))
            .input("pi_min", facts.pi_min)
            .input("energy0", f0.energy)
            .input("var_m0", f0.mean_variance)
            .evaluate(reversible.clone(), || Ok(lo)),
    );
    out.push(
        BoundReport::new("variance-reversible-upper", Variance, Upper, &var_formula("pi_max"))
            .input("pi_max", facts.pi_max)
            .input("energy0", f0.energy)
            .input("var_m0", f0.mean_variance)
            .evaluate(reversible, || Ok(hi)),
    );
    out.push(
        BoundReport::new("variance-lazy", Variance, Upper, "pi_max var0 / delta")
            .input("pi_max", facts.pi_max)
            .input("var0", f0.variance)
            .input("delta", facts.delta)
            .evaluate(both(&lazy, &require(!f0.random, "needs a fixed initial profile")), || {
                variance_bound_lazy(facts.pi_max, f0.variance, facts.delta)
            }),
    );
    out.push(
        BoundReport::new("variance-srw", Variance, Upper, "Delta / |E|")
            .input("max_degree", m.max_degree as f64)
            .input("edge_count", m.edge_count.unwrap_or(0) as f64)
            .evaluate(both(&srw, &require(f0.sup_norm_at_most_one, "needs |f0| <= 1")), || {
                Ok(variance_bound_srw(m.max_degree, m.edge_count.unwrap_or(0)))
            }),
    );
    out
}

/// Censoring horizon: 100 times the reversible bound when it applies, else `1e6`.
pub fn default_t_max(facts: &ChainFacts, eps: f64) -> f64 {
    if facts.spectral.reversible {
        if let Ok(b) = reversible_tau_bound_osc(facts.spectral.gamma, facts.pi_min, eps.min(1.0)) {
            if b > 0.0 {
                return 100.0 * b;
            }
        }
    }
    1e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSpec;
    use proptest::prelude::*;

    #[test]
    fn plug_in_values() {
        let b = reversible_tau_bound(1.0, 0.5, 1.0, 0.5).unwrap();
        assert!((b - (4.0 * E).ln()).abs() < 1e-15);
        assert_eq!(srw_tau_bound(1.0, 1, 0.5).unwrap(), 2.0);
        assert_eq!(srw_tau_bound(1.0, 1, 1.0).unwrap(), 0.0);
        assert_eq!(reversible_tau_bound(0.3, 0.1, 0.5, 0.0).unwrap(), 0.0);
        assert!(reversible_tau_bound(0.0, 0.1, 0.5, 0.1).is_err());
        // Already an eps-consensus: 4 var0 < eps^2 pi_min.
        assert_eq!(general_tau_bound(0.1, 1e-6, 0.01, 0.5).unwrap(), 0.0);
        assert!(general_tau_bound(0.0, 1.0, 0.01, 0.5).is_err());
    }

    #[test]
    fn lazy_half_equals_gamma_form() {
        let (g, var0, pm, eps) = (0.037, 0.2, 1.0 / 32.0, 0.1);
        let lazy = lazy_tau_bound(g, 0.5, var0, pm, eps).unwrap();
        let direct = (4.0 * E * var0 / (eps * eps * pm)).ln() / g;
        assert_eq!(lazy, direct);
    }

    #[test]
    fn two_state_variance_bounds_are_tight() {
        let chain = Chain::from_spec(&GraphSpec::Complete { n: 2 }).unwrap();
        let f0 = InitialProfile::fixed(&chain, &[0.0, 1.0]);
        assert_eq!(variance_bounds(0.5, 0.5, f0.energy), (0.25, 0.25));
        assert_eq!(variance_bounds(0.5, 0.5, 0.0), (0.0, 0.0));
    }

    #[test]
    fn directed_cycle_general_bound_is_finite() {
        let chain = Chain::from_spec(&GraphSpec::DirectedCycle { n: 8 }).unwrap();
        let facts = ChainFacts::new(&chain).unwrap();
        assert!(facts.spectral.gamma_star.abs() < 1e-10);
        assert!((facts.spectral.gamma_hat - 2.0 / 8.0 * facts.spectral.gamma).abs() < 1e-10);
        let f0: Vec<f64> = (0..8).map(|v| if v < 4 { 0.0 } else { 1.0 }).collect();
        let reports = all_bounds(&facts, &InitialProfile::fixed(&chain, &f0), 0.1, Constants::default());
        let general = reports.iter().find(|r| r.name == "general").unwrap();
        assert!(general.value.unwrap().is_finite());
        let eul = reports.iter().find(|r| r.name == "eulerian").unwrap();
        assert!(eul.applicable && eul.unspecified_constant);
        let rev = reports.iter().find(|r| r.name == "reversible").unwrap();
        assert!(!rev.applicable && rev.reason.is_some());
    }

    #[test]
    fn applicability_on_lazy_directed_cycle() {
        let chain = Chain::from_spec(&GraphSpec::Lazy { delta: 0.5, inner: Box::new(GraphSpec::DirectedCycle { n: 6 }) })
            .unwrap();
        let facts = ChainFacts::new(&chain).unwrap();
        assert!(facts.lazy_eulerian);
        assert_eq!(facts.delta, 0.5);
        let reports = all_bounds(&facts, &InitialProfile::iid(&chain, &InitialOpinionSpec::Uniform).unwrap(), 0.5, Constants::default());
        let eul = reports.iter().find(|r| r.name == "eulerian").unwrap();
        assert_eq!(eul.inputs["m"], 6.0);
        assert!(eul.formula.contains("n m log"));
        assert!(reports.iter().find(|r| r.name == "lazy").unwrap().applicable);
        assert!(!reports.iter().find(|r| r.name == "variance-lazy").unwrap().applicable);
    }

    #[test]
    fn reversible_general_bound_within_constant_of_reversible() {
        for spec in [GraphSpec::Cycle { n: 12 }, GraphSpec::Hypercube { dim: 3 }, GraphSpec::StarPathStar { leaves: 3 }] {
            let chain = Chain::from_spec(&spec).unwrap();
            let facts = ChainFacts::new(&chain).unwrap();
            let s = &facts.spectral;
            // For reversible P, P*P = P^2 so gamma_star = 1 - max(lambda2^2, lambda_min^2) and
            // gamma_hat >= 2 pi_min gamma.
            assert!(s.gamma_hat >= 2.0 * facts.pi_min * s.gamma - 1e-12);
            let f0: Vec<f64> = (0..chain.n()).map(|v| (v % 2) as f64).collect();
            let pro = InitialProfile::fixed(&chain, &f0);
            let g = general_tau_bound(s.gamma_hat, pro.variance, facts.pi_min, 0.1).unwrap();
            let r = reversible_tau_bound(s.gamma, facts.pi_min, 0.1, pro.energy).unwrap();
            assert!(g > 0.0 && r > 0.0);
            let ratio = g / r;
            assert!(ratio < 1.0 / (2.0 * facts.pi_min) * 4.0 && ratio > 0.05, "{spec}: {ratio}");
        }
    }

    #[test]
    fn verdicts() {
        let mut b = BoundReport::new("x", Quantity::Tau, BoundKind::Upper, "2");
        b.value = Some(2.0);
        assert_eq!(compare(0.5, 0.01, 0.0, &b), Verdict::Consistent);
        assert_eq!(compare(5.0, 0.1, 0.0, &b), Verdict::Violated);
        assert_eq!(compare(0.5, 0.01, 0.4, &b), Verdict::Inconclusive);
        b.kind = BoundKind::Lower;
        assert_eq!(compare(1.8, 0.1, 0.0, &b), Verdict::Consistent);
        assert_eq!(compare(1.0, 0.1, 0.0, &b), Verdict::Violated);
        b.value = None;
        assert_eq!(compare(1.0, 0.1, 0.0, &b), Verdict::NotApplicable);
    }

    #[test]
    fn iid_profile_matches_sampled_average() {
        let chain = Chain::from_spec(&GraphSpec::StarPathStar { leaves: 4 }).unwrap();
        let init = InitialOpinionSpec::Uniform;
        let pro = InitialProfile::iid(&chain, &init).unwrap();
        let draws = crate::dynamics::InitialOpinions::new(&init, &chain).unwrap();
        let reps = 20_000;
        let (mut e, mut v, mut m) = (Vec::new(), Vec::new(), Vec::new());
        for r in 0..reps {
            let f = draws.draw(r);
            let s = chain.summarize(&f);
            e.push(s.energy);
            v.push(s.variance);
            m.push(s.mean);
        }
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        assert!((mean(&e) / pro.energy - 1.0).abs() < 0.02);
        assert!((mean(&v) / pro.variance - 1.0).abs() < 0.02);
        let mm = mean(&m);
        let var_m = m.iter().map(|x| (x - mm).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        assert!((var_m / pro.mean_variance - 1.0).abs() < 0.05);
    }

    #[test]
    fn energy_dominates_squared_osc_over_energy_resistance() {
        use rand::{Rng, SeedableRng};
        for spec in [GraphSpec::Path { n: 3 }, GraphSpec::Cycle { n: 9 }, GraphSpec::StarPathStar { leaves: 3 }] {
            let chain = Chain::from_spec(&spec).unwrap();
            let facts = ChainFacts::new(&chain).unwrap();
            let edges = facts.metrics.edge_count.unwrap() as f64;
            let r = ENERGY_RESISTANCE_FACTOR * facts.r_max.unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            for _ in 0..200 {
                let f: Vec<f64> = (0..chain.n()).map(|_| rng.random()).collect();
                let s = chain.summarize(&f);
                assert!(s.energy >= s.osc * s.osc / (r * edges) * (1.0 - 1e-12), "{spec}");
            }
        }
        // Harmonic profile on the 3-path attains it: |E| min energy = 1/4.
        let chain = Chain::from_spec(&GraphSpec::Path { n: 3 }).unwrap();
        let e = chain.summarize(&[1.0, 0.5, 0.0]).energy;
        assert!((2.0 * e - 1.0 / (ENERGY_RESISTANCE_FACTOR * 2.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn monotone_in_arguments(
            g in 0.01f64..2.0, dg in 0.0f64..1.0,
            pm in 1e-4f64..0.5,
            eps in 0.01f64..0.99, deps in 0.0f64..0.5,
            e0 in 0.01f64..0.5, de in 0.0f64..1.0,
        ) {
            let eps2 = (eps + deps).min(1.0);
            let a = reversible_tau_bound(g, pm, eps, e0).unwrap();
            prop_assert!(reversible_tau_bound(g, pm, eps2, e0).unwrap() <= a);
            prop_assert!(reversible_tau_bound(g, pm, eps, e0 + de).unwrap() >= a);
            let b = general_tau_bound(g, e0, pm, eps).unwrap();
            prop_assert!(general_tau_bound(g + dg, e0, pm, eps).unwrap() <= b);
            prop_assert!(general_tau_bound(g, e0, pm, eps2).unwrap() <= b);
            prop_assert!(general_tau_bound(g, e0 + de, pm, eps).unwrap() >= b);
            let c = srw_tau_bound(1.0 + g, 10, eps).unwrap();
            prop_assert!(srw_tau_bound(1.0 + g, 10, eps2).unwrap() <= c);
            prop_assert!(eulerian_tau_bound(1.0, 5, 10, eps2, false).unwrap() <= eulerian_tau_bound(1.0, 5, 10, eps, false).unwrap());
        }
    }
}
