//! Deterministic numerical-integration engine shared by the rest of the
//! crate: 1D Gauss-Legendre rules, polar product rules (Gauss-Legendre
//! radial x uniform azimuthal), and convergence probes based on node
//! doubling.
//!
//! Rules are fixed, not adaptive: the same inputs always touch the same
//! nodes in the same order, so published numbers are reproducible to the
//! last bit regardless of thread count.

use crate::{Error, Result, C64};

/// What a rule discretizes. Determines the default interval semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RuleKind {
    /// Radial coordinate r in position space, on `[0, truncation]`.
    RadialPosition,
    /// Radial wavenumber rho in momentum space, on `[0, truncation]`.
    RadialMomentum,
    /// Azimuthal angle on `[0, 2*pi)`, uniform grid.
    AzimuthalUniform,
    /// Longitudinal coordinate z on a symmetric interval.
    Longitudinal,
}

/// Specification of a quadrature rule: kind, node count and interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RuleSpec {
    pub kind: RuleKind,
    pub nodes: usize,
    /// Integration interval `[a, b]`. For azimuthal rules this is always
    /// `[0, 2*pi)` and the stored value is ignored.
    pub interval: (f64, f64),
}

impl RuleSpec {
    /// Builds a spec, enforcing the minimum node count and a sane
    /// interval.
    pub fn new(kind: RuleKind, nodes: usize, interval: (f64, f64)) -> Result<Self> {
        if nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "quadrature rules need at least 8 nodes, got {nodes}"
            )));
        }
        if !(interval.0.is_finite() && interval.1.is_finite()) || interval.1 <= interval.0 {
            return Err(Error::InvalidParameter(format!(
                "bad quadrature interval [{}, {}]",
                interval.0, interval.1
            )));
        }
        Ok(Self {
            kind,
            nodes,
            interval,
        })
    }

    /// Materializes nodes and weights.
    pub fn build(&self) -> Rule {
        match self.kind {
            RuleKind::AzimuthalUniform => Rule::azimuthal_uniform(self.nodes),
            _ => Rule::gauss_legendre(self.nodes, self.interval.0, self.interval.1),
        }
    }
}

/// Materialized rule: paired nodes and weights in fixed order.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss-Legendre rule on `[a, b]`. Nodes are found by Newton
    /// iteration on the Legendre recurrence, ordered ascending.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1, "need at least one node");
        let (x, w) = gauss_legendre_unit(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: x.iter().map(|&xi| mid + half * xi).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
        }
    }

    /// Uniform azimuthal grid theta_j = 2*pi*j/n with equal weights;
    /// integrates trigonometric polynomials of degree < n exactly.
    pub fn azimuthal_uniform(n: usize) -> Self {
        let dphi = 2.0 * std::f64::consts::PI / n as f64;
        Rule {
            nodes: (0..n).map(|j| j as f64 * dphi).collect(),
            weights: vec![dphi; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes/weights of the n-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // the middle node is exactly zero
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Weighted sum of `f` over the rule nodes, in node order. Non-finite
/// integrand values are reported as errors rather than propagated as
/// NaN.
pub fn integrate_1d<F>(f: F, rule: &Rule) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let mut acc = C64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let v = f(x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Polar product rule with Jacobian r: `int f(r, phi) r dr dphi` over the
/// radial rule's interval and a full turn of the azimuthal rule.
pub fn integrate_polar<F>(f: F, radial: &Rule, azimuthal: &Rule) -> Result<C64>
where
    F: Fn(f64, f64) -> C64,
{
    let mut acc = C64::new(0.0, 0.0);
    for (&r, &wr) in radial.nodes.iter().zip(radial.weights.iter()) {
        for (&phi, &wp) in azimuthal.nodes.iter().zip(azimuthal.weights.iter()) {
            let v = f(r, phi);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteIntegrand { at: r });
            }
            acc += wr * wp * r * v;
        }
    }
    Ok(acc)
}

/// Result of a node-doubling convergence probe.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Node counts actually used, in order.
    pub node_counts: Vec<usize>,
    /// Integral values at each level.
    pub values: Vec<C64>,
    /// Relative change between each pair of successive levels.
    pub successive_changes: Vec<f64>,
}

impl ConvergenceReport {
    /// Largest successive relative change.
    pub fn max_change(&self) -> f64 {
        self.successive_changes.iter().cloned().fold(0.0, f64::max)
    }

    /// True when the last successive change is within `tol`.
    pub fn converged(&self, tol: f64) -> bool {
        self.successive_changes
            .last()
            .map(|&c| c <= tol)
            .unwrap_or(false)
    }
}

/// Evaluates a node-count-parameterized integral at `levels + 1` doubled
/// node counts starting from `base_nodes` and reports the successive
/// relative changes.
pub fn convergence_probe<F>(
    computation: F,
    base_nodes: usize,
    levels: usize,
) -> Result<ConvergenceReport>
where
    F: Fn(usize) -> Result<C64>,
{
    if levels < 1 {
        return Err(Error::InvalidParameter(
            "convergence probe needs at least one doubling level".into(),
        ));
    }
    let mut node_counts = Vec::with_capacity(levels + 1);
    let mut values = Vec::with_capacity(levels + 1);
    let mut n = base_nodes;
    for _ in 0..=levels {
        node_counts.push(n);
        values.push(computation(n)?);
        n *= 2;
    }
    let mut successive_changes = Vec::with_capacity(levels);
    for pair in values.windows(2) {
        let denom = pair[1].norm().max(f64::MIN_POSITIVE);
        successive_changes.push((pair[1] - pair[0]).norm() / denom);
    }
    Ok(ConvergenceReport {
        node_counts,
        values,
        successive_changes,
    })
}
