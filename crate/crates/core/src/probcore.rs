//! Exact finite-alphabet probability and information measures.
//!
//! Everything here works on dense tables and reports information in bits
//! (base-2 logarithms). The conventions are:
//!
//! | Quantity | Formula |
//! |----------|---------|
//! | [`entropy`] | H(p) = -Σ p log2 p, with 0·log 0 = 0 |
//! | [`mutual_information`] | I(A;B) = Σ p(a,b) log2 p(a,b)/(p(a)p(b)) |
//! | [`conditional_mi`] | I(A;B\|C) = Σ p(a,b,c) log2 p(a,b,c)p(c)/(p(a,c)p(b,c)) |
//! | [`kl_divergence`] | D(p‖q) = Σ p log2 p/q, `+inf` on support violation |
//!
//! Distributions must be normalized to within [`PROB_TOL`]. Variables that
//! take real values are mapped onto finite alphabets with a [`Quantizer`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance for probability tables.
pub const PROB_TOL: f64 = 1e-12;

/// Neumaier-compensated sum.
pub(crate) fn stable_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Shannon entropy in bits of an (assumed normalized) probability slice.
pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    let h = -stable_sum(probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()));
    h.max(0.0)
}

fn check_masses(what: &str, probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Validation(format!("{what} is empty")));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::Validation(format!(
            "{what} has invalid mass {p} at index {i}"
        )));
    }
    let total = stable_sum(probs.iter().copied());
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::Validation(format!(
            "{what} sums to {total}, not 1"
        )));
    }
    Ok(())
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A validated probability distribution over labelled outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionFile", into = "DistributionFile")]
pub struct FiniteDistribution {
    outcomes: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    outcomes: Vec<String>,
    probs: Vec<f64>,
}

impl TryFrom<DistributionFile> for FiniteDistribution {
    type Error = Error;
    fn try_from(f: DistributionFile) -> Result<Self> {
        FiniteDistribution::new(f.outcomes, f.probs)
    }
}

impl From<FiniteDistribution> for DistributionFile {
    fn from(d: FiniteDistribution) -> Self {
        DistributionFile {
            outcomes: d.outcomes,
            probs: d.probs,
        }
    }
}

impl FiniteDistribution {
    pub fn new(outcomes: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return Err(Error::Validation(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        check_distinct("outcome", &outcomes)?;
        check_masses("distribution", &probs)?;
        Ok(Self { outcomes, probs })
    }

    /// Distribution with outcomes labelled `"0"`, `"1"`, ...
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(default_labels(probs.len()), probs)
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(outcomes: Vec<String>, weights: &[f64]) -> Result<Self> {
        let total = stable_sum(weights.iter().copied());
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Validation(
                "weights must be finite, nonnegative, and not all zero".into(),
            ));
        }
        Self::new(outcomes, weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(outcomes: Vec<String>) -> Result<Self> {
        let n = outcomes.len();
        Self::new(outcomes, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(outcomes: Vec<String>, index: usize) -> Result<Self> {
        let mut probs = vec![0.0; outcomes.len()];
        *probs
            .get_mut(index)
            .ok_or_else(|| Error::Validation(format!("point-mass index {index} out of range")))? =
            1.0;
        Self::new(outcomes, probs)
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, outcome: &str) -> Option<f64> {
        self.outcomes
            .iter()
            .position(|o| o == outcome)
            .map(|i| self.probs[i])
    }
}

fn check_distinct(what: &str, labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::Validation(format!("duplicate {what} label `{l}`")));
        }
    }
    Ok(())
}

/// Shannon entropy in bits.
pub fn entropy(d: &FiniteDistribution) -> f64 {
    entropy_bits(&d.probs)
}

/// Relative entropy D(p‖q) in bits.
///
/// Returns `f64::INFINITY` when p puts mass where q has none.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    if p.outcomes != q.outcomes {
        return Err(Error::Validation(
            "KL divergence needs identical alphabets".into(),
        ));
    }
    Ok(kl_bits(&p.probs, &q.probs))
}

/// D(p‖q) in bits on raw slices of equal length.
pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut terms = Vec::with_capacity(p.len());
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        terms.push(pi * (pi / qi).log2());
    }
    stable_sum(terms).max(0.0)
}

/// Dense joint probability table over named discrete variables.
///
/// Cells are stored row-major: the last variable varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    vars: Vec<String>,
    alphabets: Vec<Vec<String>>,
    cells: Vec<f64>,
}

/// On-disk form of a [`JointTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointTableFile {
    pub vars: Vec<String>,
    pub alphabets: Vec<Vec<String>>,
    pub cells: Vec<f64>,
}

impl JointTable {
    pub fn new(vars: Vec<String>, alphabets: Vec<Vec<String>>, cells: Vec<f64>) -> Result<Self> {
        let t = Self::unchecked(vars, alphabets, cells)?;
        check_masses("joint table", &t.cells)?;
        Ok(t)
    }

    /// Builds a table from nonnegative weights, normalizing them.
    pub fn from_weights(
        vars: Vec<String>,
        alphabets: Vec<Vec<String>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let total = stable_sum(weights.iter().copied());
        if !(total > 0.0) {
            return Err(Error::Validation("joint weights sum to zero".into()));
        }
        let cells = weights.into_iter().map(|w| w / total).collect();
        Self::new(vars, alphabets, cells)
    }

    fn unchecked(vars: Vec<String>, alphabets: Vec<Vec<String>>, cells: Vec<f64>) -> Result<Self> {
        if vars.len() != alphabets.len() {
            return Err(Error::Validation(format!(
                "{} variables but {} alphabets",
                vars.len(),
                alphabets.len()
            )));
        }
        check_distinct("variable", &vars)?;
        for (v, a) in vars.iter().zip(&alphabets) {
            if a.is_empty() {
                return Err(Error::Validation(format!("variable `{v}` has an empty alphabet")));
            }
            check_distinct(&format!("outcome of `{v}`"), a)?;
        }
        let size: usize = alphabets.iter().map(Vec::len).product();
        if size != cells.len() {
            return Err(Error::Validation(format!(
                "alphabets imply {size} cells but {} were given",
                cells.len()
            )));
        }
        Ok(Self {
            vars,
            alphabets,
            cells,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }

    pub fn alphabet(&self, var: &str) -> Result<&[String]> {
        Ok(&self.alphabets[self.axis(var)?])
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn shape(&self) -> Vec<usize> {
        self.alphabets.iter().map(Vec::len).collect()
    }

    pub fn axis(&self, var: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    fn axes(&self, vars: &[&str]) -> Result<Vec<usize>> {
        vars.iter().map(|v| self.axis(v)).collect()
    }

    /// Total mass; 1 within tolerance for every valid table.
    pub fn total(&self) -> f64 {
        stable_sum(self.cells.iter().copied())
    }

    /// Sums out every axis not listed, returning dims and cells in the
    /// order of `axes`.
    fn project(&self, axes: &[usize]) -> (Vec<usize>, Vec<f64>) {
        let shape = self.shape();
        let out_dims: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
        let mut out_strides = vec![0usize; shape.len()];
        let mut stride = 1;
        for (k, &a) in axes.iter().enumerate().rev() {
            out_strides[a] += stride;
            stride *= out_dims[k];
        }
        let mut out = vec![0.0; stride];
        let mut idx = vec![0usize; shape.len()];
        let mut out_pos = 0usize;
        for &p in &self.cells {
            out[out_pos] += p;
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                out_pos += out_strides[ax];
                if idx[ax] < shape[ax] {
                    break;
                }
                out_pos -= out_strides[ax] * shape[ax];
                idx[ax] = 0;
            }
        }
        (out_dims, out)
    }

    /// Marginal table over the listed variables, in the listed order.
    pub fn marginal(&self, vars: &[&str]) -> Result<JointTable> {
        let axes = self.axes(vars)?;
        check_no_repeats(vars)?;
        let (_, cells) = self.project(&axes);
        Ok(JointTable {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            alphabets: axes.iter().map(|&a| self.alphabets[a].clone()).collect(),
            cells,
        })
    }

    /// Joint entropy H(vars) in bits.
    pub fn entropy_of(&self, vars: &[&str]) -> Result<f64> {
        let axes = self.axes(vars)?;
        check_no_repeats(vars)?;
        Ok(entropy_bits(&self.project(&axes).1))
    }

    /// Merges outcomes of one variable: outcome `i` goes to bin `map[i]`.
    pub fn merge_axis(&self, var: &str, map: &[usize], labels: Vec<String>) -> Result<JointTable> {
        let ax = self.axis(var)?;
        let old = self.alphabets[ax].len();
        if map.len() != old {
            return Err(Error::Validation(format!(
                "merge map has {} entries for {old} outcomes of `{var}`",
                map.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&b| b >= labels.len()) {
            return Err(Error::Validation(format!(
                "merge target {bad} has no label ({} labels)",
                labels.len()
            )));
        }
        let shape = self.shape();
        let outer: usize = shape[..ax].iter().product();
        let inner: usize = shape[ax + 1..].iter().product();
        let new_len = labels.len();
        let mut cells = vec![0.0; outer * new_len * inner];
        for o in 0..outer {
            for (i, &bin) in map.iter().enumerate() {
                let src = (o * old + i) * inner;
                let dst = (o * new_len + bin) * inner;
                for k in 0..inner {
                    cells[dst + k] += self.cells[src + k];
                }
            }
        }
        let mut alphabets = self.alphabets.clone();
        alphabets[ax] = labels;
        JointTable::unchecked(self.vars.clone(), alphabets, cells)
    }

    /// Applies a quantizer to a variable whose outcome labels are numbers.
    ///
    /// The resulting alphabet holds every bin of the quantizer, labelled by
    /// its index; empty bins carry zero mass.
    pub fn quantize_axis(&self, var: &str, q: &Quantizer) -> Result<JointTable> {
        let ax = self.axis(var)?;
        let map = self.alphabets[ax]
            .iter()
            .map(|label| {
                let x: f64 = label.trim().parse().map_err(|_| {
                    Error::Validation(format!(
                        "outcome `{label}` of `{var}` is not numeric and cannot be quantized"
                    ))
                })?;
                q.bin(x)
            })
            .collect::<Result<Vec<_>>>()?;
        self.merge_axis(var, &map, default_labels(q.num_bins))
    }

    /// Renames a variable.
    pub fn rename(mut self, from: &str, to: &str) -> Result<JointTable> {
        let ax = self.axis(from)?;
        if from != to && self.vars.iter().any(|v| v == to) {
            return Err(Error::Validation(format!("variable `{to}` already exists")));
        }
        self.vars[ax] = to.to_string();
        Ok(self)
    }

    pub fn to_file(&self) -> JointTableFile {
        JointTableFile {
            vars: self.vars.clone(),
            alphabets: self.alphabets.clone(),
            cells: self.cells.clone(),
        }
    }

    pub fn from_file(f: JointTableFile) -> Result<Self> {
        Self::new(f.vars, f.alphabets, f.cells)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }
}

fn check_no_repeats(vars: &[&str]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(Error::Validation(format!("variable `{v}` listed twice")));
        }
    }
    Ok(())
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let all: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Validation("variable group is empty".into()));
    }
    check_no_repeats(&all)
}

/// I(A;B) in bits between two groups of variables.
pub fn mutual_information_sets(j: &JointTable, a: &[&str], b: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b])?;
    let na = a.len();
    let axes = j.axes(&[a, b].concat())?;
    let (dims, cells) = j.project(&axes);
    let size_a: usize = dims[..na].iter().product();
    let size_b: usize = dims[na..].iter().product();
    let mut pa = vec![0.0; size_a];
    let mut pb = vec![0.0; size_b];
    for ia in 0..size_a {
        for ib in 0..size_b {
            let p = cells[ia * size_b + ib];
            pa[ia] += p;
            pb[ib] += p;
        }
    }
    let mut terms = Vec::new();
    for ia in 0..size_a {
        for ib in 0..size_b {
            let p = cells[ia * size_b + ib];
            if p > 0.0 {
                terms.push(p * (p / (pa[ia] * pb[ib])).log2());
            }
        }
    }
    Ok(stable_sum(terms).max(0.0))
}

/// I(A;B) in bits, other variables marginalized out.
pub fn mutual_information(j: &JointTable, var_a: &str, var_b: &str) -> Result<f64> {
    mutual_information_sets(j, &[var_a], &[var_b])
}

/// I(A;B|C) in bits for groups of variables.
pub fn conditional_mi_sets(j: &JointTable, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b, c])?;
    let axes = j.axes(&[a, b, c].concat())?;
    let (dims, cells) = j.project(&axes);
    let (na, nb) = (a.len(), b.len());
    let sa: usize = dims[..na].iter().product();
    let sb: usize = dims[na..na + nb].iter().product();
    let sc: usize = dims[na + nb..].iter().product();
    let mut pac = vec![0.0; sa * sc];
    let mut pbc = vec![0.0; sb * sc];
    let mut pc = vec![0.0; sc];
    for ia in 0..sa {
        for ib in 0..sb {
            for ic in 0..sc {
                let p = cells[(ia * sb + ib) * sc + ic];
                pac[ia * sc + ic] += p;
                pbc[ib * sc + ic] += p;
                pc[ic] += p;
            }
        }
    }
    let mut terms = Vec::new();
    for ia in 0..sa {
        for ib in 0..sb {
            for ic in 0..sc {
                let p = cells[(ia * sb + ib) * sc + ic];
                if p > 0.0 {
                    let ratio = p * pc[ic] / (pac[ia * sc + ic] * pbc[ib * sc + ic]);
                    terms.push(p * ratio.log2());
                }
            }
        }
    }
    Ok(stable_sum(terms).max(0.0))
}

/// I(A;B|C) in bits.
pub fn conditional_mi(j: &JointTable, var_a: &str, var_b: &str, cond: &str) -> Result<f64> {
    conditional_mi_sets(j, &[var_a], &[var_b], &[cond])
}

/// Behaviour for values outside a quantizer's declared range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampPolicy {
    ClampToEdge,
    Error,
}

/// Uniform-width quantizer with left-closed, right-open bins.
///
/// Bin `k` covers `[origin + k·ε, origin + (k+1)·ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantizer {
    pub bin_width: f64,
    pub origin: f64,
    pub num_bins: usize,
    pub clamp_policy: ClampPolicy,
}

impl Quantizer {
    pub fn new(bin_width: f64, origin: f64, num_bins: usize, clamp_policy: ClampPolicy) -> Result<Self> {
        let q = Self {
            bin_width,
            origin,
            num_bins,
            clamp_policy,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0) || !self.bin_width.is_finite() {
            return Err(Error::Validation(format!(
                "bin width must be positive, got {}",
                self.bin_width
            )));
        }
        if !self.origin.is_finite() {
            return Err(Error::Validation("quantizer origin must be finite".into()));
        }
        if self.num_bins == 0 {
            return Err(Error::Validation("quantizer needs at least one bin".into()));
        }
        Ok(())
    }

    /// Upper edge of the last bin.
    pub fn upper(&self) -> f64 {
        self.origin + self.bin_width * self.num_bins as f64
    }

    /// Bin index of a single value.
    pub fn bin(&self, x: f64) -> Result<usize> {
        self.validate()?;
        let out_of_range = || Error::OutOfRange {
            value: x,
            lo: self.origin,
            hi: self.upper(),
        };
        if x.is_nan() {
            return Err(out_of_range());
        }
        let t = (x - self.origin) / self.bin_width;
        // Values within rounding of an edge belong to the bin on the right.
        let r = t.round();
        let k = if (t - r).abs() <= 1e-9 * r.abs().max(1.0) { r } else { t.floor() };
        if k < 0.0 {
            return match self.clamp_policy {
                ClampPolicy::ClampToEdge => Ok(0),
                ClampPolicy::Error => Err(out_of_range()),
            };
        }
        if k >= self.num_bins as f64 {
            return match self.clamp_policy {
                ClampPolicy::ClampToEdge => Ok(self.num_bins - 1),
                ClampPolicy::Error => Err(out_of_range()),
            };
        }
        Ok(k as usize)
    }
}

/// Bin indices for a sequence of values.
pub fn quantize(xs: &[f64], q: &Quantizer) -> Result<Vec<usize>> {
    xs.iter().map(|&x| q.bin(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels(n: usize) -> Vec<String> {
        default_labels(n)
    }

    fn binary_h(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    #[test]
    fn entropy_examples() {
        let u = FiniteDistribution::uniform(labels(4)).unwrap();
        assert_abs_diff_eq!(entropy(&u), 2.0, epsilon = 1e-12);
        let pm = FiniteDistribution::point_mass(labels(3), 1).unwrap();
        assert_eq!(entropy(&pm), 0.0);
        let b = FiniteDistribution::from_probs(vec![0.1, 0.9]).unwrap();
        // frozen from the binary entropy formula
        assert_abs_diff_eq!(entropy(&b), 0.468_995_593_589_281_2, epsilon = 1e-12);
        assert!((entropy(&b) - 0.46900).abs() < 5e-6);
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(FiniteDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::from_probs(vec![-0.1, 1.1]).is_err());
        assert!(FiniteDistribution::from_probs(vec![f64::NAN, 1.0]).is_err());
        assert!(FiniteDistribution::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let a = [0.3, 0.7];
        let b = [0.2, 0.5, 0.3];
        let cells: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        let j = JointTable::new(vec!["A".into(), "B".into()], vec![labels(2), labels(3)], cells)
            .unwrap();
        assert_abs_diff_eq!(mutual_information(&j, "A", "B").unwrap(), 0.0, epsilon = 1e-12);

        let mut copy = vec![0.0; 64];
        for i in 0..8 {
            copy[i * 8 + i] = 1.0 / 8.0;
        }
        let j = JointTable::new(vec!["A".into(), "B".into()], vec![labels(8), labels(8)], copy)
            .unwrap();
        assert_abs_diff_eq!(mutual_information(&j, "A", "B").unwrap(), 3.0, epsilon = 1e-12);

        let f = 0.1;
        let cells = vec![0.5 * (1.0 - f), 0.5 * f, 0.5 * f, 0.5 * (1.0 - f)];
        let j = JointTable::new(vec!["A".into(), "B".into()], vec![labels(2), labels(2)], cells)
            .unwrap();
        let mi = mutual_information(&j, "A", "B").unwrap();
        assert_abs_diff_eq!(mi, 1.0 - binary_h(0.1), epsilon = 1e-12);
        assert!((mi - 0.53100).abs() < 5e-6);
        assert_abs_diff_eq!(mi, mutual_information(&j, "B", "A").unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn unknown_variable_is_lookup_error() {
        let j = JointTable::new(vec!["A".into()], vec![labels(2)], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            mutual_information(&j, "A", "Q"),
            Err(Error::UnknownVariable(v)) if v == "Q"
        ));
        assert!(mutual_information(&j, "A", "A").is_err());
    }

    fn xor_table() -> JointTable {
        // axes A, B, C with B = A xor C
        let mut cells = vec![0.0; 8];
        for a in 0..2 {
            for c in 0..2 {
                let b = a ^ c;
                cells[(a * 2 + b) * 2 + c] = 0.25;
            }
        }
        JointTable::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![labels(2), labels(2), labels(2)],
            cells,
        )
        .unwrap()
    }

    #[test]
    fn conditional_mi_xor() {
        let j = xor_table();
        assert_abs_diff_eq!(conditional_mi(&j, "A", "B", "C").unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&j, "A", "B").unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_mi_independent_b() {
        let pac = [0.1, 0.2, 0.3, 0.4];
        let pb = [0.25, 0.75];
        let mut cells = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    cells[(a * 2 + b) * 2 + c] = pac[a * 2 + c] * pb[b];
                }
            }
        }
        let j = JointTable::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![labels(2), labels(2), labels(2)],
            cells,
        )
        .unwrap();
        assert_abs_diff_eq!(conditional_mi(&j, "A", "B", "C").unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_mi_matches_entropy_expansion() {
        // I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), summed cell by cell
        let w = [0.05, 0.1, 0.2, 0.05, 0.15, 0.1, 0.25, 0.1];
        let j = JointTable::from_weights(
            vec!["A".into(), "B".into(), "C".into()],
            vec![labels(2), labels(2), labels(2)],
            w.to_vec(),
        )
        .unwrap();
        let c = j.cells();
        let h = |ps: &[f64]| -> f64 { ps.iter().filter(|p| **p > 0.0).map(|p| -p * p.log2()).sum() };
        let mut hac = [0.0; 4];
        let mut hbc = [0.0; 4];
        let mut hc = [0.0; 2];
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    let p = c[(a * 2 + b) * 2 + cc];
                    hac[a * 2 + cc] += p;
                    hbc[b * 2 + cc] += p;
                    hc[cc] += p;
                }
            }
        }
        let oracle = h(&hac) + h(&hbc) - h(c) - h(&hc);
        assert_abs_diff_eq!(conditional_mi(&j, "A", "B", "C").unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn kl_examples() {
        let p = FiniteDistribution::from_probs(vec![0.9, 0.1]).unwrap();
        let q = FiniteDistribution::from_probs(vec![0.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let d = kl_divergence(&p, &q).unwrap();
        assert_abs_diff_eq!(d, 1.0 - binary_h(0.9), epsilon = 1e-12);
        let one = FiniteDistribution::from_probs(vec![0.0, 1.0]).unwrap();
        let zero = FiniteDistribution::from_probs(vec![1.0, 0.0]).unwrap();
        assert_eq!(kl_divergence(&one, &zero).unwrap(), f64::INFINITY);
        let other = FiniteDistribution::new(vec!["x".into(), "y".into()], vec![0.5, 0.5]).unwrap();
        assert!(kl_divergence(&p, &other).is_err());
    }

    #[test]
    fn quantize_examples() {
        let q = Quantizer::new(0.5, 0.0, 4, ClampPolicy::ClampToEdge).unwrap();
        assert_eq!(q.bin(0.3).unwrap(), 0);
        assert_eq!(q.bin(0.5).unwrap(), 1);
        assert_eq!(q.bin(10.0).unwrap(), 3);
        assert_eq!(q.bin(-1.0).unwrap(), 0);
        assert_eq!(quantize(&[0.0, 0.49, 1.0, 1.99], &q).unwrap(), vec![0, 0, 2, 3]);
        let strict = Quantizer::new(0.5, 0.0, 4, ClampPolicy::Error).unwrap();
        assert!(matches!(strict.bin(2.0), Err(Error::OutOfRange { .. })));
        assert!(strict.bin(-0.01).is_err());
        assert!(Quantizer::new(0.0, 0.0, 1, ClampPolicy::Error).is_err());
        assert!(Quantizer::new(1.0, 0.0, 0, ClampPolicy::Error).is_err());
        // 0.3 / 0.1 is 2.9999999999999996 in binary floating point
        let tenth = Quantizer::new(0.1, 0.0, 10, ClampPolicy::Error).unwrap();
        assert_eq!(tenth.bin(0.3).unwrap(), 3);
    }

    #[test]
    fn json_round_trip() {
        let j = xor_table();
        let s = j.to_json().unwrap();
        assert!(s.contains("\"vars\""));
        assert_eq!(JointTable::from_json(&s).unwrap(), j);
        assert!(JointTable::from_json(r#"{"vars":["A"],"alphabets":[["0","1"]],"cells":[0.5,0.6]}"#).is_err());
    }

    #[test]
    fn marginal_and_merge() {
        let j = xor_table();
        let m = j.marginal(&["C", "A"]).unwrap();
        assert_eq!(m.vars(), &["C".to_string(), "A".to_string()]);
        assert_abs_diff_eq!(m.total(), 1.0, epsilon = 1e-15);
        let merged = j.merge_axis("A", &[0, 0], vec!["any".into()]).unwrap();
        assert_eq!(merged.shape(), vec![1, 2, 2]);
        assert_abs_diff_eq!(mutual_information(&merged, "A", "B").unwrap(), 0.0);
    }
}
