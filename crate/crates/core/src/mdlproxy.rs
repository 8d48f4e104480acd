//! Operational epiplexity through code lengths.
//!
//! Models are k-th order Markov chains over a finite alphabet. Code lengths
//! are in bits. The first k tokens of a stream have no full context and are
//! coded uniformly at log2 |A| bits each, both prequentially and in the
//! two-part code.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::stable_sum;

/// Largest free-parameter count (|A|−1)·|A|^k a model may have.
pub const MAX_FREE_PARAMS: u128 = 1_000_000;
/// RMS log residual above which a scaling fit carries a warning.
pub const FIT_WARN_RMS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenStream {
    alphabet: Vec<String>,
    tokens: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TokenFile {
    Bare(Vec<String>),
    Full {
        alphabet: Vec<String>,
        tokens: Vec<String>,
    },
}

impl TokenStream {
    pub fn new(alphabet: Vec<String>, tokens: Vec<usize>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::Validation("alphabet is empty".into()));
        }
        let mut seen = alphabet.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != alphabet.len() {
            return Err(Error::Validation("alphabet has repeated symbols".into()));
        }
        if tokens.is_empty() {
            return Err(Error::Validation("token stream is empty".into()));
        }
        if let Some(t) = tokens.iter().find(|t| **t >= alphabet.len()) {
            return Err(Error::Validation(format!("token index {t} outside alphabet")));
        }
        Ok(Self { alphabet, tokens })
    }

    /// Maps symbol labels to indices; every symbol must be in the alphabet.
    pub fn from_symbols(alphabet: Vec<String>, symbols: &[String]) -> Result<Self> {
        let tokens = symbols
            .iter()
            .map(|s| {
                alphabet
                    .iter()
                    .position(|a| a == s)
                    .ok_or_else(|| Error::Validation(format!("token `{s}` is not in the alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, tokens)
    }

    /// One symbol per byte of `text`. Without an explicit alphabet the
    /// sorted set of bytes present is used.
    pub fn from_text(text: &str, alphabet: Option<Vec<String>>) -> Result<Self> {
        let symbols: Vec<String> = text.bytes().map(|b| (b as char).to_string()).collect();
        let alphabet = alphabet.unwrap_or_else(|| {
            let mut a = symbols.clone();
            a.sort();
            a.dedup();
            a
        });
        Self::from_symbols(alphabet, &symbols)
    }

    /// A JSON array of symbols, or `{"alphabet": [...], "tokens": [...]}`.
    pub fn from_json(s: &str) -> Result<Self> {
        match serde_json::from_str::<TokenFile>(s)? {
            TokenFile::Bare(tokens) => {
                let mut a = tokens.clone();
                a.sort();
                a.dedup();
                Self::from_symbols(a, &tokens)
            }
            TokenFile::Full { alphabet, tokens } => Self::from_symbols(alphabet, &tokens),
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn uniform_bits(&self) -> f64 {
        (self.alphabet.len() as f64).log2()
    }
}

fn free_params(alphabet: usize, order: usize) -> Result<u128> {
    let a = alphabet as u128;
    let size = u32::try_from(order)
        .ok()
        .and_then(|k| a.checked_pow(k))
        .and_then(|c| c.checked_mul(a - 1));
    match size {
        Some(n) if n <= MAX_FREE_PARAMS => Ok(n),
        _ => Err(Error::Capacity {
            what: format!("order-{order} model over {alphabet} symbols"),
            size: size.unwrap_or(u128::MAX),
            limit: MAX_FREE_PARAMS,
        }),
    }
}

/// Index of the length-`order` context ending just before position `i`.
fn context(tokens: &[usize], i: usize, order: usize, a: usize) -> usize {
    tokens[i - order..i].iter().fold(0, |c, t| c * a + t)
}

/// Sequential KT (add-one-half) code length in bits at Markov order k.
pub fn prequential_code_length(s: &TokenStream, order: usize) -> Result<f64> {
    free_params(s.alphabet.len(), order)?;
    let a = s.alphabet.len();
    let contexts = a.pow(order as u32);
    let mut counts = vec![0u64; contexts * a];
    let mut totals = vec![0u64; contexts];
    let head = order.min(s.len());
    let mut terms = Vec::with_capacity(s.len());
    terms.push(head as f64 * s.uniform_bits());
    for i in head..s.len() {
        let c = context(&s.tokens, i, order, a);
        let t = s.tokens[i];
        let p = (counts[c * a + t] as f64 + 0.5) / (totals[c] as f64 + a as f64 / 2.0);
        terms.push(-p.log2());
        counts[c * a + t] += 1;
        totals[c] += 1;
    }
    Ok(stable_sum(terms))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBudget {
    pub max_order: usize,
    /// Bits per free parameter; replaces the (1/2)·log2 N rate when set.
    #[serde(default)]
    pub param_resolution_bits: Option<u32>,
    /// Free-text statement of the resource budget.
    #[serde(default)]
    pub notes: String,
}

impl ModelBudget {
    pub fn new(max_order: usize) -> Self {
        Self {
            max_order,
            param_resolution_bits: None,
            notes: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderCost {
    pub order: usize,
    #[serde(rename = "L_M_bits")]
    pub l_m: f64,
    #[serde(rename = "L_X_given_M_bits")]
    pub l_x_given_m: f64,
    pub total_bits: f64,
}

/// Minimum two-part code over orders 0..=max_order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdlReport {
    /// Structural part, the operational epiplexity.
    #[serde(rename = "L_M_bits")]
    pub l_m: f64,
    /// Data given model, the time-bounded entropy.
    #[serde(rename = "L_X_given_M_bits")]
    pub l_x_given_m: f64,
    pub total_bits: f64,
    pub chosen_order: usize,
    pub per_order: Vec<OrderCost>,
    pub model_class: String,
}

fn ml_code_length(s: &TokenStream, order: usize, resolution: Option<u32>) -> f64 {
    let a = s.alphabet.len();
    let contexts = a.pow(order as u32);
    let mut counts = vec![0u64; contexts * a];
    let head = order.min(s.len());
    for i in head..s.len() {
        counts[context(&s.tokens, i, order, a) * a + s.tokens[i]] += 1;
    }
    let mut terms = vec![head as f64 * s.uniform_bits()];
    for row in counts.chunks(a) {
        let n: u64 = row.iter().sum();
        if n == 0 {
            continue;
        }
        let probs: Vec<f64> = match resolution {
            None => row.iter().map(|&c| c as f64 / n as f64).collect(),
            Some(bits) => {
                let levels = (bits as f64).exp2();
                let m: Vec<f64> = row
                    .iter()
                    .map(|&c| {
                        let q = (c as f64 / n as f64 * levels).round();
                        if c > 0 { q.max(1.0) } else { q }
                    })
                    .collect();
                let z: f64 = m.iter().sum();
                m.into_iter().map(|x| x / z).collect()
            }
        };
        for (&c, p) in row.iter().zip(probs) {
            if c > 0 {
                terms.push(-(c as f64) * p.log2());
            }
        }
    }
    stable_sum(terms).max(0.0)
}

pub fn two_part_mdl(s: &TokenStream, b: &ModelBudget) -> Result<MdlReport> {
    for k in 0..=b.max_order {
        free_params(s.alphabet.len(), k)?;
    }
    let n = s.len() as f64;
    let order_code = ((b.max_order + 1) as f64).log2();
    let per_order: Vec<OrderCost> = (0..=b.max_order)
        .into_par_iter()
        .map(|k| {
            let params = free_params(s.alphabet.len(), k).expect("checked above") as f64;
            let param_bits = match b.param_resolution_bits {
                None => params / 2.0 * n.log2(),
                Some(r) => params * r as f64,
            };
            let l_m = param_bits + order_code;
            let l_x = ml_code_length(s, k, b.param_resolution_bits);
            OrderCost {
                order: k,
                l_m,
                l_x_given_m: l_x,
                total_bits: l_m + l_x,
            }
        })
        .collect();
    let best = per_order
        .iter()
        .min_by(|x, y| x.total_bits.total_cmp(&y.total_bits))
        .copied()
        .expect("at least order 0");
    Ok(MdlReport {
        l_m: best.l_m,
        l_x_given_m: best.l_x_given_m,
        total_bits: best.total_bits,
        chosen_order: best.order,
        per_order,
        model_class: format!("Markov chains of order 0..={} over {} symbols", b.max_order, s.alphabet.len()),
    })
}

/// N·(ℓ0 − ℓ) bits; negative when the model loses to the baseline.
pub fn compression_gain(ell0: f64, ell: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation("token count must be at least 1".into()));
    }
    Ok(n as f64 * (ell0 - ell))
}

/// Bits per joule of a compression gain.
pub fn eta_e_mdl(gain: f64, e_train: f64) -> Result<f64> {
    if !(e_train > 0.0) || !e_train.is_finite() {
        return Err(Error::Validation(format!("training energy must be positive, got {e_train} J")));
    }
    Ok(gain / e_train)
}

/// ℓ(C) = ℓ∞ + a·C^(−α), with training energy κ·C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub ell_inf: f64,
    pub a: f64,
    pub alpha: f64,
    /// Joules per compute unit; must be declared, there is no default.
    pub kappa: Option<f64>,
    /// RMS residual of log(ℓ − ℓ∞) against the fitted line.
    pub rms_log_residual: f64,
    pub warning: Option<String>,
}

impl ScalingFit {
    pub fn new(ell_inf: f64, a: f64, alpha: f64, kappa: Option<f64>) -> Result<Self> {
        let f = Self {
            ell_inf,
            a,
            alpha,
            kappa,
            rms_log_residual: 0.0,
            warning: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell_inf >= 0.0) || !(self.a > 0.0) || !(self.alpha > 0.0) {
            return Err(Error::Validation(format!(
                "scaling parameters need ell_inf >= 0, a > 0, alpha > 0 (got {}, {}, {})",
                self.ell_inf, self.a, self.alpha
            )));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::Validation(format!("kappa must be positive, got {k}")));
            }
        }
        Ok(())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = Some(kappa);
        self.validate()?;
        Ok(self)
    }

    pub fn predict(&self, c: f64) -> f64 {
        self.ell_inf + self.a * c.powf(-self.alpha)
    }
}

/// Parses `C,ell_bits_per_token` rows; a non-numeric first line is a header.
pub fn parse_scaling_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [c, l] => c.parse::<f64>().ok().zip(l.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => out.push(p),
            None if i == 0 => continue,
            None => return Err(Error::Validation(format!("line {}: expected `C,ell`", i + 1))),
        }
    }
    Ok(out)
}

/// Least-squares line through (x, y): (intercept, slope, SSR).
fn regress(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx = stable_sum(x.iter().map(|v| (v - mx).powi(2)));
    let sxy = stable_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = stable_sum(x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)));
    (intercept, slope, ssr)
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::Validation(format!("need at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|(c, l)| !(*c > 0.0) || !c.is_finite() || !l.is_finite() || *l < 0.0) {
        return Err(Error::Validation("compute must be positive and losses nonnegative".into()));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Validation("compute values must be strictly increasing".into()));
    }
    if points.windows(2).any(|w| !(w[1].1 < w[0].1)) {
        return Err(Error::Validation("losses must be strictly decreasing".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ell: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ell_min = ell[ell.len() - 1];
    let ssr = |floor: f64| -> f64 {
        let y: Vec<f64> = ell.iter().map(|l| (l - floor).ln()).collect();
        regress(&x, &y).2
    };

    const GRID: usize = 400;
    let at = |i: usize| ell_min * i as f64 / GRID as f64;
    let (best, _) = (0..GRID)
        .map(|i| (i, ssr(at(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is nonempty");
    let mut lo = at(best.saturating_sub(1));
    let mut hi = if best + 1 < GRID { at(best + 1) } else { ell_min * (1.0 - 1e-12) };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (ssr(c), ssr(d));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * ell_min.max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = ssr(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = ssr(d);
        }
    }
    let mut ell_inf = 0.5 * (lo + hi);
    if ssr(0.0) <= ssr(ell_inf) {
        ell_inf = 0.0;
    }
    let y: Vec<f64> = ell.iter().map(|l| (l - ell_inf).ln()).collect();
    let (intercept, slope, residual) = regress(&x, &y);
    let rms = (residual / points.len() as f64).sqrt();
    let fit = ScalingFit {
        ell_inf,
        a: intercept.exp(),
        alpha: -slope,
        kappa: None,
        rms_log_residual: rms,
        warning: (rms > FIT_WARN_RMS)
            .then(|| format!("poor power-law fit: rms log residual {rms:.3} exceeds {FIT_WARN_RMS}")),
    };
    fit.validate()?;
    Ok(fit)
}

/// N·a·α·C^(−(α+1))/κ, the bits gained per extra joule of training.
pub fn marginal_bits_per_joule(f: &ScalingFit, c: f64, n: u64) -> Result<f64> {
    f.validate()?;
    let kappa = f
        .kappa
        .ok_or_else(|| Error::Configuration("kappa (joules per compute unit) must be declared".into()))?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Validation(format!("compute must be positive, got {c}")));
    }
    Ok(n as f64 * f.a * f.alpha * c.powf(-(f.alpha + 1.0)) / kappa)
}
