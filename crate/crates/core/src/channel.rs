//! Empowerment as the capacity of the action-to-observation channel.
//!
//! An [`MdpSpec`] is unrolled into a [`CostedChannel`] whose inputs are the
//! open-loop action sequences of length τ. Capacity is computed with
//! Blahut–Arimoto iterations that carry the standard bracket
//!
//! ```text
//!   Σ_a p(a) D(W_a ‖ q)  ≤  C  ≤  max_a D(W_a ‖ q),     q = Σ_a p(a) W_a
//! ```
//!
//! and stop once the bracket is narrower than the requested tolerance. Cost
//! constraints enter through a multiplier λ (bits per joule): the penalized
//! iteration maximizes I(A;O) − λ·E[c(A)], and λ is bisected until the
//! expected cost meets the budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::probcore::{kl_bits, stable_sum, FiniteDistribution, PROB_TOL};

/// Largest number of (action sequence × state) products `unroll_mdp` accepts.
pub const UNROLL_LIMIT: u128 = 10_000_000;

const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Iteration cap for the λ probes of the budget bisection. Near a kink of
/// the curve the penalized optimum is not unique and convergence turns
/// sublinear; a probe only has to say which side of the budget it lands.
const PROBE_MAX_ITER: usize = 20_000;
/// Relative tolerance on the budget residual during λ bisection.
const BUDGET_REL_TOL: f64 = 1e-9;
/// Zero-cost inputs carrying more than this many bits make per-joule
/// efficiency unbounded.
const FREE_CONTROL_BITS: f64 = 1e-9;

/// A discrete memoryless channel with rows p(o|a).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct DiscreteChannel {
    inputs: Vec<String>,
    outputs: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    inputs: Vec<String>,
    outputs: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<ChannelFile> for DiscreteChannel {
    type Error = Error;
    fn try_from(f: ChannelFile) -> Result<Self> {
        DiscreteChannel::new(f.inputs, f.outputs, f.matrix)
    }
}

impl From<DiscreteChannel> for ChannelFile {
    fn from(c: DiscreteChannel) -> Self {
        ChannelFile {
            inputs: c.inputs,
            outputs: c.outputs,
            matrix: c.matrix,
        }
    }
}

impl DiscreteChannel {
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(Error::Validation("channel needs inputs and outputs".into()));
        }
        if matrix.len() != inputs.len() {
            return Err(Error::Validation(format!(
                "{} inputs but {} rows",
                inputs.len(),
                matrix.len()
            )));
        }
        for (label, row) in inputs.iter().zip(&matrix) {
            if row.len() != outputs.len() {
                return Err(Error::Validation(format!(
                    "row for input `{label}` has {} entries, expected {}",
                    row.len(),
                    outputs.len()
                )));
            }
            FiniteDistribution::new(outputs.clone(), row.clone()).map_err(|e| {
                Error::Validation(format!("row for input `{label}`: {e}"))
            })?;
        }
        Ok(Self {
            inputs,
            outputs,
            matrix,
        })
    }

    /// Channel with numeric labels.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n_in = matrix.len();
        let n_out = matrix.first().map_or(0, Vec::len);
        Self::new(
            (0..n_in).map(|i| i.to_string()).collect(),
            (0..n_out).map(|i| i.to_string()).collect(),
            matrix,
        )
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// q(o) = Σ_a p(a) W(o|a).
    pub fn output_distribution(&self, input: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.num_outputs()];
        for (pa, row) in input.iter().zip(&self.matrix) {
            if *pa > 0.0 {
                for (qo, w) in q.iter_mut().zip(row) {
                    *qo += pa * w;
                }
            }
        }
        q
    }

    /// I(A;O) in bits for an input distribution.
    pub fn mutual_information(&self, input: &[f64]) -> f64 {
        let q = self.output_distribution(input);
        stable_sum(
            input
                .iter()
                .zip(&self.matrix)
                .filter(|(pa, _)| **pa > 0.0)
                .map(|(pa, row)| pa * kl_bits(row, &q)),
        )
        .max(0.0)
    }

    /// True when every row equals the first within [`PROB_TOL`].
    pub fn is_degenerate(&self) -> bool {
        let first = &self.matrix[0];
        self.matrix
            .iter()
            .all(|row| row.iter().zip(first).all(|(a, b)| (a - b).abs() <= PROB_TOL))
    }

    fn restrict(&self, keep: &[usize]) -> DiscreteChannel {
        DiscreteChannel {
            inputs: keep.iter().map(|&i| self.inputs[i].clone()).collect(),
            outputs: self.outputs.clone(),
            matrix: keep.iter().map(|&i| self.matrix[i].clone()).collect(),
        }
    }
}

/// How input costs are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostConvention {
    /// Every input also pays the full horizon baseline energy.
    Total,
    /// Costs are measured above the declared null input.
    Incremental,
}

impl std::fmt::Display for CostConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostConvention::Total => "total",
            CostConvention::Incremental => "incremental",
        })
    }
}

impl std::str::FromStr for CostConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(Self::Total),
            "incremental" => Ok(Self::Incremental),
            other => Err(Error::Configuration(format!(
                "unknown cost convention `{other}` (expected total or incremental)"
            ))),
        }
    }
}

/// A channel with a per-input energy cost in joules.
///
/// `cost` holds the action energy of each input; the horizon baseline is
/// kept separately and added only under [`CostConvention::Total`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostedChannelFile", into = "CostedChannelFile")]
pub struct CostedChannel {
    channel: DiscreteChannel,
    cost: Vec<f64>,
    null_input: Option<usize>,
    baseline_energy: f64,
    convention: CostConvention,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostedChannelFile {
    inputs: Vec<String>,
    outputs: Vec<String>,
    matrix: Vec<Vec<f64>>,
    #[serde(rename = "cost_J")]
    cost: Vec<f64>,
    convention: CostConvention,
    #[serde(default)]
    null_input: Option<String>,
    #[serde(rename = "baseline_energy_J", default)]
    baseline_energy: f64,
}

impl TryFrom<CostedChannelFile> for CostedChannel {
    type Error = Error;
    fn try_from(f: CostedChannelFile) -> Result<Self> {
        let channel = DiscreteChannel::new(f.inputs, f.outputs, f.matrix)?;
        let null = match f.null_input {
            Some(label) => Some(channel.inputs.iter().position(|i| *i == label).ok_or_else(
                || Error::Validation(format!("null input `{label}` is not a channel input")),
            )?),
            None => None,
        };
        CostedChannel::new(channel, f.cost, null, f.baseline_energy, f.convention)
    }
}

impl From<CostedChannel> for CostedChannelFile {
    fn from(c: CostedChannel) -> Self {
        let null_input = c.null_input.map(|i| c.channel.inputs[i].clone());
        CostedChannelFile {
            inputs: c.channel.inputs,
            outputs: c.channel.outputs,
            matrix: c.channel.matrix,
            cost: c.cost,
            convention: c.convention,
            null_input,
            baseline_energy: c.baseline_energy,
        }
    }
}

impl CostedChannel {
    pub fn new(
        channel: DiscreteChannel,
        cost: Vec<f64>,
        null_input: Option<usize>,
        baseline_energy: f64,
        convention: CostConvention,
    ) -> Result<Self> {
        if cost.len() != channel.num_inputs() {
            return Err(Error::Validation(format!(
                "{} costs for {} inputs",
                cost.len(),
                channel.num_inputs()
            )));
        }
        if let Some(c) = cost.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::Validation(format!("input cost {c} J is not a nonnegative number")));
        }
        if !(baseline_energy >= 0.0) || !baseline_energy.is_finite() {
            return Err(Error::Validation(format!(
                "baseline energy {baseline_energy} J is not a nonnegative number"
            )));
        }
        if let Some(n) = null_input {
            if n >= channel.num_inputs() {
                return Err(Error::Validation(format!("null input index {n} out of range")));
            }
        }
        Ok(Self {
            channel,
            cost,
            null_input,
            baseline_energy,
            convention,
        })
    }

    pub fn channel(&self) -> &DiscreteChannel {
        &self.channel
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn null_input(&self) -> Option<usize> {
        self.null_input
    }

    pub fn baseline_energy(&self) -> f64 {
        self.baseline_energy
    }

    pub fn convention(&self) -> CostConvention {
        self.convention
    }

    pub fn with_convention(mut self, convention: CostConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Per-input cost in joules under a convention.
    pub fn effective_costs(&self, convention: CostConvention) -> Result<Vec<f64>> {
        match convention {
            CostConvention::Total => Ok(self.cost.iter().map(|c| c + self.baseline_energy).collect()),
            CostConvention::Incremental => {
                let null = self.null_input.ok_or_else(|| {
                    Error::Configuration(
                        "incremental convention requires a declared null input".into(),
                    )
                })?;
                let reference = self.cost[null];
                let scale = self.cost.iter().fold(0.0f64, |m, c| m.max(*c));
                self.cost
                    .iter()
                    .zip(&self.channel.inputs)
                    .map(|(c, label)| {
                        let d = c - reference;
                        if d < -1e-12 * scale {
                            Err(Error::Configuration(format!(
                                "input `{label}` is cheaper than the null input"
                            )))
                        } else {
                            Ok(d.max(0.0))
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Blahut–Arimoto result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Mutual information achieved by `input` (the lower bound).
    pub capacity: f64,
    pub lower: f64,
    pub upper: f64,
    pub input: FiniteDistribution,
    pub iterations: usize,
}

/// Converged state of the penalized iteration.
#[derive(Debug, Clone)]
struct Penalized {
    p: Vec<f64>,
    /// Σ p(a) (D_a − λ c_a), the Lagrangian value of `p`.
    lower: f64,
    /// max_a (D_a − λ c_a), an upper bound on the optimal Lagrangian.
    upper: f64,
    iterations: usize,
}

/// Maximizes I(A;O) − λ·E[c] over input distributions to a Lagrangian gap
/// of `tol` bits.
fn penalized_ba(
    ch: &DiscreteChannel,
    costs: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
    start: Option<&[f64]>,
) -> Result<Penalized> {
    let (sol, converged) = penalized_iterate(ch, costs, lambda, tol, max_iter, start);
    if converged {
        Ok(sol)
    } else {
        Err(Error::IterationLimit {
            iterations: max_iter,
            lower: sol.lower,
            upper: sol.upper,
        })
    }
}

/// Runs at most `max_iter` updates and returns the last iterate, flagged
/// with whether the Lagrangian gap reached `tol`.
fn penalized_iterate(
    ch: &DiscreteChannel,
    costs: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
    start: Option<&[f64]>,
) -> (Penalized, bool) {
    let n = ch.num_inputs();
    let mut log_p: Vec<f64> = match start {
        Some(p) => p.iter().map(|x| x.max(1e-300).log2()).collect(),
        None => vec![-(n as f64).log2(); n],
    };
    let mut p = vec![0.0; n];
    let mut g = vec![0.0; n];
    for it in 0..=max_iter {
        let m = log_p.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
        for (pi, lp) in p.iter_mut().zip(&log_p) {
            *pi = (lp - m).exp2();
        }
        let z = stable_sum(p.iter().copied());
        for pi in p.iter_mut() {
            *pi /= z;
        }
        let q: Vec<f64> = ch
            .output_distribution(&p)
            .into_iter()
            .map(|x| x.max(1e-300))
            .collect();
        for a in 0..n {
            g[a] = kl_bits(&ch.matrix[a], &q) - lambda * costs[a];
        }
        let lower = stable_sum(p.iter().zip(&g).map(|(pa, ga)| pa * ga));
        let upper = g.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
        if upper - lower <= tol || it == max_iter {
            return (
                Penalized {
                    p,
                    lower,
                    upper,
                    iterations: it,
                },
                upper - lower <= tol,
            );
        }
        for (lp, ga) in log_p.iter_mut().zip(&g) {
            *lp += ga;
        }
        let m = log_p.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
        for lp in log_p.iter_mut() {
            *lp -= m;
        }
    }
    unreachable!("the loop returns on its last iteration")
}

fn to_distribution(ch: &DiscreteChannel, p: Vec<f64>) -> Result<FiniteDistribution> {
    let total = stable_sum(p.iter().copied());
    FiniteDistribution::new(ch.inputs.clone(), p.into_iter().map(|x| x / total).collect())
}

/// Channel capacity in bits, to within `tol` bits.
pub fn ba_capacity(ch: &DiscreteChannel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let n = ch.num_inputs();
    if ch.is_degenerate() {
        return Ok(CapacityResult {
            capacity: 0.0,
            lower: 0.0,
            upper: 0.0,
            input: FiniteDistribution::uniform(ch.inputs.clone())?,
            iterations: 0,
        });
    }
    let sol = penalized_ba(ch, &vec![0.0; n], 0.0, tol, max_iter, None)?;
    let capacity = ch.mutual_information(&sol.p);
    Ok(CapacityResult {
        capacity,
        lower: sol.lower,
        upper: sol.upper,
        input: to_distribution(ch, sol.p)?,
        iterations: sol.iterations,
    })
}

/// One point of the capacity–cost curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedCapacity {
    pub budget_j: f64,
    pub capacity_bits: f64,
    /// Multiplier on the cost constraint, bits per joule.
    pub lambda_bits_per_j: f64,
    pub expected_cost_j: f64,
    pub input: FiniteDistribution,
}

fn expected(p: &[f64], costs: &[f64]) -> f64 {
    stable_sum(p.iter().zip(costs).map(|(a, b)| a * b))
}

/// Maximizes I(A;O) subject to E[c(A)] ≤ budget, costs taken under the
/// channel's own convention.
pub fn cost_constrained_capacity(cch: &CostedChannel, budget: f64, tol: f64) -> Result<ConstrainedCapacity> {
    let costs = cch.effective_costs(cch.convention)?;
    constrained(&cch.channel, &costs, budget, tol)
}

fn constrained(ch: &DiscreteChannel, costs: &[f64], budget: f64, tol: f64) -> Result<ConstrainedCapacity> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    if !budget.is_finite() {
        return Err(Error::Validation(format!("budget {budget} J is not finite")));
    }
    let n = ch.num_inputs();
    let c_min = costs.iter().fold(f64::INFINITY, |m, c| m.min(*c));
    let c_max = costs.iter().fold(0.0f64, |m, c| m.max(*c));
    let cost_tol = BUDGET_REL_TOL * c_max.max(f64::MIN_POSITIVE);
    if budget < c_min - cost_tol {
        return Err(Error::Infeasible {
            budget,
            min_cost: c_min,
        });
    }
    let point = |p: Vec<f64>, lambda: f64| -> Result<ConstrainedCapacity> {
        Ok(ConstrainedCapacity {
            budget_j: budget,
            capacity_bits: ch.mutual_information(&p),
            lambda_bits_per_j: lambda,
            expected_cost_j: expected(&p, costs),
            input: to_distribution(ch, p)?,
        })
    };

    if ch.is_degenerate() {
        let mut p = vec![0.0; n];
        let cheapest = costs.iter().position(|c| *c == c_min).unwrap_or(0);
        p[cheapest] = 1.0;
        return point(p, 0.0);
    }

    let free = penalized_ba(ch, costs, 0.0, tol, DEFAULT_MAX_ITER, None)?;
    if expected(&free.p, costs) <= budget + cost_tol {
        return point(free.p, 0.0);
    }

    if budget <= c_min + cost_tol {
        // Only the cheapest inputs are affordable; λ is the KKT slope there.
        let keep: Vec<usize> = (0..n).filter(|&a| costs[a] <= c_min + cost_tol).collect();
        let sub = ch.restrict(&keep);
        let sub_costs = vec![0.0; keep.len()];
        let (sub_p, cap) = if sub.is_degenerate() {
            let mut p = vec![0.0; keep.len()];
            p[0] = 1.0;
            (p, 0.0)
        } else {
            let s = penalized_ba(&sub, &sub_costs, 0.0, tol, DEFAULT_MAX_ITER, None)?;
            let cap = sub.mutual_information(&s.p);
            (s.p, cap)
        };
        let mut p = vec![0.0; n];
        for (k, &a) in keep.iter().enumerate() {
            p[a] = sub_p[k];
        }
        let q = ch.output_distribution(&p);
        let lambda = (0..n)
            .filter(|a| !keep.contains(a))
            .map(|a| (kl_bits(&ch.matrix[a], &q) - cap) / (costs[a] - c_min))
            .filter(|x| x.is_finite())
            .fold(0.0f64, f64::max);
        return point(p, lambda);
    }

    let min_positive = costs
        .iter()
        .filter(|c| **c > 0.0)
        .fold(f64::INFINITY, |m, c| m.min(*c));
    let capacity = ch.mutual_information(&free.p);
    let mut lo = 0.0;
    let mut lo_p = free.p;
    let mut hi = (capacity / min_positive).max(f64::MIN_POSITIVE);
    let mut hi_sol = penalized_iterate(ch, costs, hi, tol, PROBE_MAX_ITER, None).0;
    let mut doublings = 0;
    while expected(&hi_sol.p, costs) > budget + cost_tol {
        lo = hi;
        lo_p = hi_sol.p.clone();
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::IterationLimit {
                iterations: doublings,
                lower: lo,
                upper: hi,
            });
        }
        hi_sol = penalized_iterate(ch, costs, hi, tol, PROBE_MAX_ITER, None).0;
    }
    let mut hi_p = hi_sol.p;
    // Illinois regula falsi on spend(λ) − budget, which is nonincreasing.
    let mut f_lo = expected(&lo_p, costs) - budget;
    let mut f_hi = expected(&hi_p, costs) - budget;
    let mut last_side = 0i8;
    for _ in 0..200 {
        if f_hi.abs() <= cost_tol || hi - lo <= 1e-15 * hi {
            break;
        }
        let mut mid = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        // Warm start halfway between the nearer end and uniform.
        let near = if mid - lo < hi - mid { &lo_p } else { &hi_p };
        let warm: Vec<f64> = near.iter().map(|x| 0.5 * x + 0.5 / n as f64).collect();
        let sol = penalized_iterate(ch, costs, mid, tol, PROBE_MAX_ITER, Some(&warm)).0;
        let f = expected(&sol.p, costs) - budget;
        if f <= 0.0 {
            hi = mid;
            hi_p = sol.p;
            f_hi = f;
            if last_side == -1 {
                f_lo *= 0.5;
            }
            last_side = -1;
        } else {
            lo = mid;
            lo_p = sol.p;
            f_lo = f;
            if last_side == 1 {
                f_hi *= 0.5;
            }
            last_side = 1;
        }
    }
    let cost_hi = expected(&hi_p, costs);
    let cost_lo = expected(&lo_p, costs);
    let p = if (cost_hi - budget).abs() > cost_tol && cost_lo > budget {
        // Mixture of the two ends that spends exactly the budget.
        let theta = (budget - cost_hi) / (cost_lo - cost_hi);
        hi_p.iter()
            .zip(&lo_p)
            .map(|(h, l)| (1.0 - theta) * h + theta * l)
            .collect()
    } else {
        hi_p
    };
    point(p, 0.5 * (lo + hi))
}

/// Relative-entropy route to capacity per unit cost for channels with a
/// zero-cost reference input: max over costly inputs of D(W_a ‖ W_ref)/c_a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativeEntropyBound {
    pub reference_input: String,
    /// Largest finite candidate, bits per joule.
    pub bits_per_joule: f64,
    pub best_input: Option<String>,
    /// Inputs skipped because D(W_a ‖ W_ref) is infinite.
    pub infinite_inputs: Vec<String>,
}

/// Capacity per unit cost under one convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityPerCost {
    pub convention: CostConvention,
    /// Largest finite value found, bits per joule.
    pub bits_per_joule: f64,
    /// Set when the supremum is infinite (deterministically distinguishable
    /// costly inputs against a free reference).
    pub unbounded: bool,
    pub method: String,
    /// Budget at which the tangent through the origin touches the curve.
    pub optimal_budget_j: Option<f64>,
    pub relative_entropy: Option<RelativeEntropyBound>,
    pub warnings: Vec<String>,
}

/// sup over input distributions of I(A;O)/E[c(A)].
///
/// Computed as the maximal slope of a line from the origin to the
/// capacity–cost curve. With a free input the supremum is the curve's slope
/// at zero budget, found by extrapolating C(x)/x to zero spend. Without
/// one the tangent is found by Dinkelbach iteration on the penalized
/// capacity.
pub fn capacity_per_unit_cost(cch: &CostedChannel, convention: CostConvention) -> Result<CapacityPerCost> {
    let costs = cch.effective_costs(convention)?;
    let ch = &cch.channel;
    let n = ch.num_inputs();
    if costs.iter().all(|c| *c == 0.0) {
        return Err(Error::Degenerate(
            "every input is free, so bits per joule is undefined (free control)".into(),
        ));
    }
    let c_max = costs.iter().fold(0.0f64, |m, c| m.max(*c));
    let free: Vec<usize> = (0..n).filter(|&a| costs[a] == 0.0).collect();

    if free.is_empty() {
        return dinkelbach(ch, &costs, convention);
    }

    let free_channel = ch.restrict(&free);
    if !free_channel.is_degenerate() {
        let c0 = ba_capacity(&free_channel, 1e-12, DEFAULT_MAX_ITER)?.capacity;
        if c0 > FREE_CONTROL_BITS {
            return Err(Error::Degenerate(format!(
                "zero-cost inputs already carry {c0} bits, so bits per joule is unbounded (free control)"
            )));
        }
    }

    let reference = match cch.null_input {
        Some(n) if costs[n] == 0.0 => n,
        _ => free[0],
    };
    let rel = relative_entropy_bound(ch, &costs, reference);
    let mut warnings = Vec::new();
    if !rel.infinite_inputs.is_empty() {
        warnings.push(format!(
            "inputs {:?} are perfectly distinguishable from the free reference; efficiency is unbounded and the largest finite candidate is reported",
            rel.infinite_inputs
        ));
        log::warn!("{}", warnings[0]);
        return Ok(CapacityPerCost {
            convention,
            bits_per_joule: rel.bits_per_joule,
            unbounded: true,
            method: "relative entropy (largest finite candidate)".into(),
            optimal_budget_j: None,
            relative_entropy: Some(rel),
            warnings,
        });
    }

    let min_positive = costs
        .iter()
        .filter(|c| **c > 0.0)
        .fold(f64::INFINITY, |m, c| m.min(*c));
    let slope = slope_at_zero(ch, &costs, 1e-3 * min_positive.min(c_max))?;
    let gap = (slope - rel.bits_per_joule).abs();
    if gap > 1e-4 * rel.bits_per_joule.max(1.0) {
        warnings.push(format!(
            "curve slope {slope} and relative-entropy value {} differ by {gap}",
            rel.bits_per_joule
        ));
    }
    Ok(CapacityPerCost {
        convention,
        bits_per_joule: slope,
        unbounded: false,
        method: "curve slope at zero budget (extrapolated)".into(),
        optimal_budget_j: None,
        relative_entropy: Some(rel),
        warnings,
    })
}

/// Limit of C(x)/x as the spent cost x goes to zero.
///
/// Budgets halve from `start`; each solved point contributes the ratio at
/// the cost it actually spends, and the last three ratios are extrapolated
/// to zero cost by a quadratic through them. Halving stops once two
/// successive extrapolations agree to 1e-8 or the spend falls below
/// 1e-9 of `start`, past which round-off in the mutual information
/// dominates.
fn slope_at_zero(ch: &DiscreteChannel, costs: &[f64], start: f64) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut estimate: Option<f64> = None;
    let mut budget = start;
    while budget >= 1e-9 * start {
        let c = constrained(ch, costs, budget, 1e-13)?;
        budget *= 0.5;
        if !(c.expected_cost_j > 0.0 && c.capacity_bits > 0.0) {
            continue;
        }
        pts.push((c.expected_cost_j, c.capacity_bits / c.expected_cost_j));
        if pts.len() < 3 {
            continue;
        }
        let last = &pts[pts.len() - 3..];
        let next: f64 = (0..3)
            .map(|i| {
                let w: f64 = (0..3)
                    .filter(|&j| j != i)
                    .map(|j| last[j].0 / (last[j].0 - last[i].0))
                    .product();
                w * last[i].1
            })
            .sum();
        if let Some(prev) = estimate {
            if (next - prev).abs() <= 1e-8 * next.abs() {
                return Ok(next);
            }
        }
        estimate = Some(next);
    }
    Ok(estimate.or_else(|| pts.last().map(|p| p.1)).unwrap_or(0.0))
}

fn relative_entropy_bound(ch: &DiscreteChannel, costs: &[f64], reference: usize) -> RelativeEntropyBound {
    let reference_row = &ch.matrix[reference];
    let mut best: Option<(f64, usize)> = None;
    let mut infinite_inputs = Vec::new();
    for a in 0..ch.num_inputs() {
        if costs[a] <= 0.0 {
            continue;
        }
        let d = kl_bits(&ch.matrix[a], reference_row);
        if d.is_infinite() {
            infinite_inputs.push(ch.inputs[a].clone());
            continue;
        }
        let r = d / costs[a];
        if best.is_none_or(|(b, _)| r > b) {
            best = Some((r, a));
        }
    }
    RelativeEntropyBound {
        reference_input: ch.inputs[reference].clone(),
        bits_per_joule: best.map_or(0.0, |(r, _)| r),
        best_input: best.map(|(_, a)| ch.inputs[a].clone()),
        infinite_inputs,
    }
}

fn dinkelbach(ch: &DiscreteChannel, costs: &[f64], convention: CostConvention) -> Result<CapacityPerCost> {
    let mut ratio = 0.0;
    let mut budget = 0.0;
    let mut warm: Option<Vec<f64>> = None;
    for _ in 0..200 {
        let sol = penalized_ba(ch, costs, ratio, 1e-13, DEFAULT_MAX_ITER, warm.as_deref())?;
        let info = ch.mutual_information(&sol.p);
        let cost = expected(&sol.p, costs);
        let excess = info - ratio * cost;
        let next = info / cost;
        budget = cost;
        warm = Some(sol.p.iter().map(|x| x + 1e-12).collect());
        if excess <= 1e-12 * next.max(1.0) * cost.max(1.0) || (next - ratio).abs() <= 1e-13 * next {
            ratio = next.max(ratio);
            break;
        }
        ratio = next;
    }
    Ok(CapacityPerCost {
        convention,
        bits_per_joule: ratio,
        unbounded: false,
        method: "tangent through origin (Dinkelbach on penalized capacity)".into(),
        optimal_budget_j: Some(budget),
        relative_entropy: None,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvePoint {
    pub budget_j: f64,
    pub capacity_bits: f64,
    /// Marginal slope dE_emp/dE_0, reported as the constraint multiplier.
    pub lambda_bits_per_j: f64,
    pub expected_cost_j: f64,
    pub input: Vec<f64>,
}

/// Cost-constrained empowerment E_emp(E_0) sampled at a set of budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpowermentCurve {
    pub convention: CostConvention,
    pub input_labels: Vec<String>,
    pub points: Vec<CurvePoint>,
}

impl EmpowermentCurve {
    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].capacity_bits >= w[0].capacity_bits - tol)
    }

    /// Every interior point lies on or above the chord of its neighbours.
    pub fn is_concave(&self, tol: f64) -> bool {
        self.points.windows(3).all(|w| {
            let (x0, x1, x2) = (w[0].budget_j, w[1].budget_j, w[2].budget_j);
            let t = (x1 - x0) / (x2 - x0);
            let chord = (1.0 - t) * w[0].capacity_bits + t * w[2].capacity_bits;
            w[1].capacity_bits >= chord - tol
        })
    }

    /// CSV with header `budget_J,capacity_bits,lambda_bits_per_J`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("budget_J,capacity_bits,lambda_bits_per_J\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                p.budget_j, p.capacity_bits, p.lambda_bits_per_j
            ));
        }
        out
    }
}

pub fn empowerment_curve(cch: &CostedChannel, budgets: &[f64], tol: f64) -> Result<EmpowermentCurve> {
    if budgets.is_empty() {
        return Err(Error::Validation("no budgets given".into()));
    }
    if budgets.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation("budgets must be strictly increasing".into()));
    }
    let points = budgets
        .par_iter()
        .map(|&b| {
            cost_constrained_capacity(cch, b, tol).map(|c| CurvePoint {
                budget_j: c.budget_j,
                capacity_bits: c.capacity_bits,
                lambda_bits_per_j: c.lambda_bits_per_j,
                expected_cost_j: c.expected_cost_j,
                input: c.input.probs().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpowermentCurve {
        convention: cch.convention,
        input_labels: cch.channel.inputs.clone(),
        points,
    })
}

/// Which variable ends the action-to-outcome channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Observation,
    State,
}

/// A finite MDP with observation map and per-action energy cost.
///
/// `transition[s][a][s']` is p(s'|s,a).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSpec {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub transition: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub obs: Option<BTreeMap<String, String>>,
    pub action_cost: BTreeMap<String, f64>,
    pub initial: String,
    pub horizon: usize,
    #[serde(rename = "baseline_energy_J", default)]
    pub baseline_energy: f64,
    #[serde(default)]
    pub null_action: Option<String>,
}

impl MdpSpec {
    pub fn validate(&self) -> Result<()> {
        let ns = self.states.len();
        let na = self.actions.len();
        if ns == 0 || na == 0 {
            return Err(Error::Validation("MDP needs states and actions".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Validation("horizon must be at least 1".into()));
        }
        if self.transition.len() != ns {
            return Err(Error::Validation(format!(
                "transition has {} state slices, expected {ns}",
                self.transition.len()
            )));
        }
        for (s, slice) in self.states.iter().zip(&self.transition) {
            if slice.len() != na {
                return Err(Error::Validation(format!(
                    "transition[{s}] has {} action rows, expected {na}",
                    slice.len()
                )));
            }
            for (a, row) in self.actions.iter().zip(slice) {
                FiniteDistribution::new(self.states.clone(), row.clone()).map_err(|e| {
                    Error::Validation(format!("transition[{s}][{a}]: {e}"))
                })?;
            }
        }
        if !self.states.contains(&self.initial) {
            return Err(Error::Validation(format!("initial state `{}` unknown", self.initial)));
        }
        for a in &self.actions {
            match self.action_cost.get(a) {
                Some(c) if c.is_finite() && *c >= 0.0 => {}
                Some(c) => {
                    return Err(Error::Validation(format!("action `{a}` has invalid cost {c}")))
                }
                None => return Err(Error::Validation(format!("action `{a}` has no cost"))),
            }
        }
        if let Some(extra) = self.action_cost.keys().find(|k| !self.actions.contains(k)) {
            return Err(Error::Validation(format!("cost given for unknown action `{extra}`")));
        }
        if let Some(obs) = &self.obs {
            for s in &self.states {
                if !obs.contains_key(s) {
                    return Err(Error::Validation(format!("state `{s}` has no observation")));
                }
            }
        }
        if let Some(null) = &self.null_action {
            if !self.actions.contains(null) {
                return Err(Error::Validation(format!("null action `{null}` unknown")));
            }
        }
        if !(self.baseline_energy >= 0.0) || !self.baseline_energy.is_finite() {
            return Err(Error::Validation("baseline energy must be nonnegative".into()));
        }
        Ok(())
    }

    fn observation_of(&self, s: usize) -> String {
        match &self.obs {
            Some(m) => m[&self.states[s]].clone(),
            None => self.states[s].clone(),
        }
    }
}

/// Enumerates every open-loop action sequence of length τ and propagates the
/// state distribution exactly from the initial state.
pub fn unroll_mdp(m: &MdpSpec, endpoint: Endpoint, convention: CostConvention) -> Result<CostedChannel> {
    m.validate()?;
    let ns = m.states.len();
    let na = m.actions.len();
    let sequences = (na as u128)
        .checked_pow(m.horizon as u32)
        .filter(|_| m.horizon <= u32::MAX as usize);
    let size = sequences.and_then(|s| s.checked_mul(ns as u128));
    match size {
        Some(sz) if sz <= UNROLL_LIMIT => {}
        _ => {
            return Err(Error::Capacity {
                what: "unrolled MDP (action sequences x states)".into(),
                size: size.unwrap_or(u128::MAX),
                limit: UNROLL_LIMIT,
            })
        }
    }

    let (outputs, out_index): (Vec<String>, Vec<usize>) = match endpoint {
        Endpoint::State => (m.states.clone(), (0..ns).collect()),
        Endpoint::Observation => {
            let mut labels: Vec<String> = Vec::new();
            let idx = (0..ns)
                .map(|s| {
                    let o = m.observation_of(s);
                    match labels.iter().position(|l| *l == o) {
                        Some(i) => i,
                        None => {
                            labels.push(o);
                            labels.len() - 1
                        }
                    }
                })
                .collect();
            (labels, idx)
        }
    };

    let s0 = m.states.iter().position(|s| *s == m.initial).unwrap();
    let mut start = vec![0.0; ns];
    start[s0] = 1.0;
    let action_cost: Vec<f64> = m.actions.iter().map(|a| m.action_cost[a]).collect();

    let mut inputs = Vec::new();
    let mut rows = Vec::new();
    let mut costs = Vec::new();
    let mut seq = Vec::with_capacity(m.horizon);
    unroll_rec(m, &start, &mut seq, &mut |seq, dist| {
        let mut row = vec![0.0; outputs.len()];
        for (s, p) in dist.iter().enumerate() {
            row[out_index[s]] += p;
        }
        inputs.push(
            seq.iter()
                .map(|&a| m.actions[a].as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        rows.push(row);
        costs.push(stable_sum(seq.iter().map(|&a| action_cost[a])));
    });

    // Forward propagation accumulates rounding; renormalize each row.
    for row in rows.iter_mut() {
        let t = stable_sum(row.iter().copied());
        for x in row.iter_mut() {
            *x /= t;
        }
    }
    let null_input = m.null_action.as_ref().map(|null| {
        let label = vec![null.as_str(); m.horizon].join(",");
        inputs.iter().position(|i| *i == label).unwrap()
    });
    let channel = DiscreteChannel::new(inputs, outputs, rows)?;
    CostedChannel::new(channel, costs, null_input, m.baseline_energy, convention)
}

fn unroll_rec(m: &MdpSpec, dist: &[f64], seq: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize], &[f64])) {
    if seq.len() == m.horizon {
        emit(seq, dist);
        return;
    }
    let ns = m.states.len();
    for a in 0..m.actions.len() {
        let mut next = vec![0.0; ns];
        for (s, ps) in dist.iter().enumerate() {
            if *ps > 0.0 {
                for (sn, t) in m.transition[s][a].iter().enumerate() {
                    next[sn] += ps * t;
                }
            }
        }
        seq.push(a);
        unroll_rec(m, &next, seq, emit);
        seq.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hb(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    fn bsc(f: f64) -> DiscreteChannel {
        DiscreteChannel::from_matrix(vec![vec![1.0 - f, f], vec![f, 1.0 - f]]).unwrap()
    }

    #[test]
    fn closed_form_capacities() {
        let id = DiscreteChannel::from_matrix(
            (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        )
        .unwrap();
        let r = ba_capacity(&id, 1e-9, 10_000).unwrap();
        assert_abs_diff_eq!(r.capacity, 2.0, epsilon = 1e-6);
        assert!(r.upper - r.lower <= 1e-9);

        let r = ba_capacity(&bsc(0.1), 1e-9, 10_000).unwrap();
        assert_abs_diff_eq!(r.capacity, 1.0 - hb(0.1), epsilon = 1e-6);
        assert_abs_diff_eq!(r.capacity, 0.531_004_406_410_718_8, epsilon = 1e-6);

        let e = 0.25;
        let bec = DiscreteChannel::from_matrix(vec![vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]]).unwrap();
        let r = ba_capacity(&bec, 1e-9, 10_000).unwrap();
        assert_abs_diff_eq!(r.capacity, 0.75, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_channel_is_zero_without_iterating() {
        let ch = DiscreteChannel::from_matrix(vec![vec![0.3, 0.7]; 3]).unwrap();
        let r = ba_capacity(&ch, 1e-9, 0).unwrap();
        assert_eq!(r.capacity, 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn iteration_limit_carries_bracket() {
        let ch = DiscreteChannel::from_matrix(vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        match ba_capacity(&ch, 1e-15, 1) {
            Err(Error::IterationLimit { lower, upper, .. }) => assert!(lower <= upper),
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn invalid_channels_rejected() {
        assert!(DiscreteChannel::from_matrix(vec![vec![0.5, 0.6]]).is_err());
        assert!(DiscreteChannel::from_matrix(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        let ch = bsc(0.1);
        assert!(CostedChannel::new(ch.clone(), vec![1.0], None, 0.0, CostConvention::Total).is_err());
        assert!(CostedChannel::new(ch.clone(), vec![1.0, -1.0], None, 0.0, CostConvention::Total).is_err());
        assert!(CostedChannel::new(ch, vec![1.0, 1.0], Some(2), 0.0, CostConvention::Total).is_err());
    }

    #[test]
    fn slack_budget_equals_capacity() {
        let cch = CostedChannel::new(bsc(0.1), vec![1.0, 2.0], None, 0.0, CostConvention::Total).unwrap();
        let r = cost_constrained_capacity(&cch, 2.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.capacity_bits, 1.0 - hb(0.1), epsilon = 1e-8);
        assert_eq!(r.lambda_bits_per_j, 0.0);
    }

    #[test]
    fn null_only_budget_gives_zero() {
        let ch = DiscreteChannel::from_matrix(vec![vec![0.5, 0.5], vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let cch = CostedChannel::new(ch, vec![0.0, 1.0, 1.0], Some(0), 0.0, CostConvention::Incremental).unwrap();
        let r = cost_constrained_capacity(&cch, 0.0, 1e-10).unwrap();
        assert_eq!(r.capacity_bits, 0.0);
        assert!(r.lambda_bits_per_j > 0.0);
    }

    #[test]
    fn infeasible_budget_reports_minimum() {
        let cch = CostedChannel::new(bsc(0.1), vec![1.0, 2.0], None, 0.5, CostConvention::Total).unwrap();
        match cost_constrained_capacity(&cch, 1.0, 1e-9) {
            Err(Error::Infeasible { min_cost, .. }) => assert_abs_diff_eq!(min_cost, 1.5),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn active_budget_is_met() {
        let cch = CostedChannel::new(bsc(0.05), vec![0.0, 1.0], None, 0.0, CostConvention::Total).unwrap();
        let r = cost_constrained_capacity(&cch, 0.2, 1e-12).unwrap();
        assert_abs_diff_eq!(r.expected_cost_j, 0.2, epsilon = 1e-8);
        assert!(r.lambda_bits_per_j > 0.0);
        // p(1) = 0.2 is forced, so capacity is I at that input
        let direct = cch.channel().mutual_information(&[0.8, 0.2]);
        assert_abs_diff_eq!(r.capacity_bits, direct, epsilon = 1e-8);
    }

    #[test]
    fn unit_cost_disjoint_outputs() {
        let ch = DiscreteChannel::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let cch = CostedChannel::new(ch, vec![1.0, 1.0], None, 0.0, CostConvention::Total).unwrap();
        let r = capacity_per_unit_cost(&cch, CostConvention::Total).unwrap();
        assert_abs_diff_eq!(r.bits_per_joule, 1.0, epsilon = 1e-9);
        assert!(!r.unbounded);
    }

    #[test]
    fn relative_entropy_examples() {
        let ch = DiscreteChannel::from_matrix(vec![vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        let expected = 1.0 - hb(0.9);
        for (cost, scale) in [(1.0, 1.0), (2.0, 0.5)] {
            let cch = CostedChannel::new(ch.clone(), vec![0.0, cost], Some(0), 0.0, CostConvention::Incremental)
                .unwrap();
            let r = capacity_per_unit_cost(&cch, CostConvention::Incremental).unwrap();
            let rel = r.relative_entropy.as_ref().unwrap();
            assert_abs_diff_eq!(rel.bits_per_joule, expected * scale, epsilon = 1e-12);
            assert_abs_diff_eq!(r.bits_per_joule, expected * scale, epsilon = 1e-5);
            assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        }
    }

    #[test]
    fn incremental_without_null_is_configuration_error() {
        let cch = CostedChannel::new(bsc(0.1), vec![1.0, 1.0], None, 0.0, CostConvention::Incremental).unwrap();
        assert!(matches!(
            capacity_per_unit_cost(&cch, CostConvention::Incremental),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn all_free_is_degenerate() {
        let cch = CostedChannel::new(bsc(0.1), vec![0.0, 0.0], None, 0.0, CostConvention::Total).unwrap();
        assert!(matches!(
            capacity_per_unit_cost(&cch, CostConvention::Total),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn infinite_kl_sets_unbounded() {
        let ch = DiscreteChannel::from_matrix(vec![
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.7, 0.3, 0.0],
        ])
        .unwrap();
        let cch = CostedChannel::new(ch, vec![0.0, 1.0, 1.0], Some(0), 0.0, CostConvention::Incremental).unwrap();
        let r = capacity_per_unit_cost(&cch, CostConvention::Incremental).unwrap();
        assert!(r.unbounded);
        assert_abs_diff_eq!(r.bits_per_joule, 0.7 * 1.4f64.log2() + 0.3 * 0.6f64.log2(), epsilon = 1e-12);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn curve_on_constant_cost_bsc() {
        let cch = CostedChannel::new(bsc(0.1), vec![1.0, 1.0], None, 0.0, CostConvention::Total).unwrap();
        let c = empowerment_curve(&cch, &[1.0], 1e-10).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_abs_diff_eq!(c.points[0].capacity_bits, 0.531_004_406_410_718_8, epsilon = 1e-8);
        assert_eq!(c.points[0].lambda_bits_per_j, 0.0);
        assert!(empowerment_curve(&cch, &[1.0, 1.0], 1e-10).is_err());
        assert!(c.to_csv().starts_with("budget_J,capacity_bits,lambda_bits_per_J\n"));
    }

    fn two_state_mdp(identical: bool) -> MdpSpec {
        let t = if identical {
            vec![vec![vec![0.5, 0.5], vec![0.5, 0.5]]; 2]
        } else {
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2]
        };
        MdpSpec {
            states: vec!["s0".into(), "s1".into()],
            actions: vec!["stay".into(), "go".into()],
            transition: t,
            obs: None,
            action_cost: [("stay".to_string(), 0.0), ("go".to_string(), 1.0)].into_iter().collect(),
            initial: "s0".into(),
            horizon: 1,
            baseline_energy: 0.0,
            null_action: Some("stay".into()),
        }
    }

    #[test]
    fn one_step_unroll_is_transition_slice() {
        let m = two_state_mdp(false);
        let cch = unroll_mdp(&m, Endpoint::Observation, CostConvention::Total).unwrap();
        assert_eq!(cch.channel().matrix(), m.transition[0].as_slice());
        assert_eq!(cch.cost(), &[0.0, 1.0]);
        assert_eq!(cch.null_input(), Some(0));
    }

    #[test]
    fn no_control_has_zero_capacity() {
        let cch = unroll_mdp(&two_state_mdp(true), Endpoint::State, CostConvention::Total).unwrap();
        assert!(cch.channel().is_degenerate());
        assert_eq!(ba_capacity(cch.channel(), 1e-9, 100).unwrap().capacity, 0.0);
    }

    #[test]
    fn unroll_size_guard() {
        let mut m = two_state_mdp(false);
        m.horizon = 40;
        assert!(matches!(
            unroll_mdp(&m, Endpoint::State, CostConvention::Total),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn costed_channel_json_round_trip() {
        let cch = unroll_mdp(&two_state_mdp(false), Endpoint::State, CostConvention::Incremental).unwrap();
        let s = serde_json::to_string(&cch).unwrap();
        assert!(s.contains("\"cost_J\"") && s.contains("\"convention\":\"incremental\""));
        let back: CostedChannel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cch);
    }
}
