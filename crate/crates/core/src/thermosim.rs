//! Exactly solvable stochastic-thermodynamics testbeds.
//!
//! [`BipartiteProcess`] is a learner W relaxing in a heat bath while a data
//! symbol X is held fixed; only W jumps. Rates obey local detailed balance,
//! so for each x the generator is similar to a symmetric matrix and the
//! transition kernel exp(L t) is obtained exactly from one eigendecomposition.
//!
//! [`RegisterProtocol`] copies a latent word Z into an all-zeros register by
//! bitwise XOR, a logically reversible map, and contrasts the heat charged
//! with an open accounting boundary (none) against a closed one (reset).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::probcore::{conditional_mi, entropy_bits, stable_sum, FiniteDistribution, JointTable};
use crate::thermo::{BoundVerdict, BITS_TOL, K_B};

/// Per-subsystem state limit for dense propagation.
pub const MAX_STATES: usize = 64;
/// Relative tolerance for detailed balance of user-supplied rates.
const DETAILED_BALANCE_TOL: f64 = 1e-9;

/// Two-subsystem Markov process in which only W moves.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteProcess {
    w_states: Vec<String>,
    x_states: Vec<String>,
    /// E(w, x) in joules, indexed `[w][x]`.
    energy: Vec<Vec<f64>>,
    data_dist: FiniteDistribution,
    rate_scale: f64,
    temperature: f64,
    w_init: FiniteDistribution,
    /// Optional explicit rates `[x][w][w']` in 1/s.
    rates: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_states: Option<Vec<String>>,
    #[serde(rename = "E_J")]
    energy: BTreeMap<String, f64>,
    data_dist: Vec<f64>,
    #[serde(rename = "T_K")]
    temperature: f64,
    rate_scale_hz: f64,
    w_init: Vec<f64>,
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl BipartiteProcess {
    pub fn new(
        energy: Vec<Vec<f64>>,
        data_dist: FiniteDistribution,
        w_init: FiniteDistribution,
        rate_scale: f64,
        temperature: f64,
    ) -> Result<Self> {
        let p = Self {
            w_states: w_init.outcomes().to_vec(),
            x_states: data_dist.outcomes().to_vec(),
            energy,
            data_dist,
            rate_scale,
            temperature,
            w_init,
            rates: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Replaces the symmetric-split rates by explicit ones, `[x][w][w']`.
    pub fn with_rates(mut self, rates: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        self.rates = Some(rates);
        self.validate()?;
        Ok(self)
    }

    /// The symmetric two-state learner used throughout the tests: W and X
    /// are bits, and the state w = x sits `gap_kt`·k_B T below w ≠ x.
    pub fn two_state(gap_kt: f64, rate_scale: f64, temperature: f64) -> Result<Self> {
        let kt = K_B * temperature;
        let half = 0.5 * gap_kt * kt;
        let energy = vec![vec![-half, half], vec![half, -half]];
        let x = FiniteDistribution::uniform(numbered(2))?;
        let w = FiniteDistribution::uniform(numbered(2))?;
        Self::new(energy, x, w, rate_scale, temperature)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ProcessFile = serde_json::from_str(s)?;
        let w_states = f.w_states.unwrap_or_else(|| numbered(f.w_init.len()));
        let x_states = f.x_states.unwrap_or_else(|| numbered(f.data_dist.len()));
        let mut energy = vec![vec![0.0; x_states.len()]; w_states.len()];
        for (wi, w) in w_states.iter().enumerate() {
            for (xi, x) in x_states.iter().enumerate() {
                let key = format!("{w},{x}");
                energy[wi][xi] = *f
                    .energy
                    .get(&key)
                    .ok_or_else(|| Error::Validation(format!("E_J has no entry `{key}`")))?;
            }
        }
        if f.energy.len() != w_states.len() * x_states.len() {
            return Err(Error::Validation("E_J has entries for unknown (w, x) pairs".into()));
        }
        Self::new(
            energy,
            FiniteDistribution::new(x_states, f.data_dist)?,
            FiniteDistribution::new(w_states, f.w_init)?,
            f.rate_scale_hz,
            f.temperature,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut energy = BTreeMap::new();
        for (w, row) in self.w_states.iter().zip(&self.energy) {
            for (x, e) in self.x_states.iter().zip(row) {
                energy.insert(format!("{w},{x}"), *e);
            }
        }
        let f = ProcessFile {
            w_states: Some(self.w_states.clone()),
            x_states: Some(self.x_states.clone()),
            energy,
            data_dist: self.data_dist.probs().to_vec(),
            temperature: self.temperature,
            rate_scale_hz: self.rate_scale,
            w_init: self.w_init.probs().to_vec(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn validate(&self) -> Result<()> {
        let (nw, nx) = (self.w_states.len(), self.x_states.len());
        if nw > MAX_STATES || nx > MAX_STATES {
            return Err(Error::Capacity {
                what: "bipartite process state space".into(),
                size: nw.max(nx) as u128,
                limit: MAX_STATES as u128,
            });
        }
        if self.energy.len() != nw || self.energy.iter().any(|r| r.len() != nx) {
            return Err(Error::Validation(format!("energy table must be {nw}x{nx}")));
        }
        if self.energy.iter().flatten().any(|e| !e.is_finite()) {
            return Err(Error::Validation("energies must be finite".into()));
        }
        if !(self.rate_scale > 0.0) || !self.rate_scale.is_finite() {
            return Err(Error::Validation(format!("rate scale must be positive, got {}", self.rate_scale)));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::Validation(format!("temperature must be positive, got {}", self.temperature)));
        }
        if let Some(rates) = &self.rates {
            if rates.len() != nx || rates.iter().any(|m| m.len() != nw || m.iter().any(|r| r.len() != nw)) {
                return Err(Error::Validation(format!("rates must be {nx}x{nw}x{nw}")));
            }
            let beta = 1.0 / (K_B * self.temperature);
            for (x, m) in rates.iter().enumerate() {
                for w in 0..nw {
                    for v in 0..nw {
                        if w == v {
                            continue;
                        }
                        let (f, b) = (m[w][v], m[v][w]);
                        if !(f >= 0.0) || !f.is_finite() {
                            return Err(Error::Validation(format!("rate {w}->{v} at x={x} is invalid")));
                        }
                        let expected = (-(self.energy[v][x] - self.energy[w][x]) * beta).exp();
                        let consistent = if f == 0.0 || b == 0.0 {
                            f == 0.0 && b == 0.0
                        } else {
                            ((f / b) / expected - 1.0).abs() <= DETAILED_BALANCE_TOL
                        };
                        if !consistent {
                            return Err(Error::Validation(format!(
                                "rates {w}<->{v} at x={x} violate local detailed balance"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn w_states(&self) -> &[String] {
        &self.w_states
    }

    pub fn x_states(&self) -> &[String] {
        &self.x_states
    }

    pub fn energy(&self) -> &[Vec<f64>] {
        &self.energy
    }

    pub fn data_dist(&self) -> &FiniteDistribution {
        &self.data_dist
    }

    pub fn w_init(&self) -> &FiniteDistribution {
        &self.w_init
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    pub fn with_w_init(mut self, w_init: FiniteDistribution) -> Result<Self> {
        if w_init.outcomes() != self.w_states.as_slice() {
            return Err(Error::Validation("initial distribution has the wrong alphabet".into()));
        }
        self.w_init = w_init;
        Ok(self)
    }

    /// Gibbs distribution of W given x.
    pub fn gibbs(&self, x: usize) -> Vec<f64> {
        let beta = 1.0 / (K_B * self.temperature);
        let e: Vec<f64> = self.energy.iter().map(|r| r[x]).collect();
        let e_min = e.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let w: Vec<f64> = e.iter().map(|v| (-(v - e_min) * beta).exp()).collect();
        let z = stable_sum(w.iter().copied());
        w.into_iter().map(|v| v / z).collect()
    }

    /// Σ_x p(x) Gibbs(·|x), the long-run marginal of W under repeated episodes.
    pub fn stationary_mixture(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.w_states.len()];
        for (x, px) in self.data_dist.probs().iter().enumerate() {
            for (o, g) in out.iter_mut().zip(self.gibbs(x)) {
                *o += px * g;
            }
        }
        out
    }

    fn rate(&self, x: usize, from: usize, to: usize) -> f64 {
        match &self.rates {
            Some(r) => r[x][from][to],
            None => {
                let beta = 1.0 / (K_B * self.temperature);
                self.rate_scale * (-(self.energy[to][x] - self.energy[from][x]) * beta / 2.0).exp()
            }
        }
    }

    /// Spectral form of the generator for data symbol x.
    fn spectral(&self, x: usize) -> Spectral {
        let n = self.w_states.len();
        let pi = self.gibbs(x);
        let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
        let mut l = DMatrix::<f64>::zeros(n, n);
        for from in 0..n {
            for to in 0..n {
                if from != to {
                    let r = self.rate(x, from, to);
                    l[(to, from)] += r;
                    l[(from, from)] -= r;
                }
            }
        }
        let mut s = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = l[(i, j)] * sqrt_pi[j] / sqrt_pi[i];
            }
        }
        let s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        Spectral {
            sqrt_pi,
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
            generator: l,
        }
    }
}

struct Spectral {
    sqrt_pi: Vec<f64>,
    vectors: DMatrix<f64>,
    values: DVector<f64>,
    generator: DMatrix<f64>,
}

impl Spectral {
    /// Π^{1/2} V f(Λ) Vᵀ Π^{-1/2}.
    fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.sqrt_pi.len();
        let d = DMatrix::from_diagonal(&self.values.map(f));
        let m = &self.vectors * d * self.vectors.transpose();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.sqrt_pi[i] * m[(i, j)] / self.sqrt_pi[j];
            }
        }
        out
    }

    /// Column-stochastic kernel K[(to, from)] = P(W_t = to | W_0 = from).
    fn kernel(&self, t: f64) -> DMatrix<f64> {
        let mut k = self.apply(|l| (l.min(0.0) * t).exp());
        for j in 0..k.ncols() {
            for i in 0..k.nrows() {
                k[(i, j)] = k[(i, j)].max(0.0);
            }
            let s: f64 = k.column(j).sum();
            k.column_mut(j).unscale_mut(s);
        }
        k
    }

    /// ∫₀ᵗ exp(L s) ds.
    fn occupation(&self, t: f64) -> DMatrix<f64> {
        self.apply(|l| {
            let l = l.min(0.0);
            if (l * t).abs() < 1e-8 {
                t * (1.0 + 0.5 * l * t)
            } else {
                (l * t).exp_m1() / l
            }
        })
    }
}

/// Result of one relaxation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "T_K")]
    pub temperature: f64,
    /// Joint over (W_pre, X, W_post) as a table file.
    pub joint_post: crate::probcore::JointTableFile,
    /// Expected heat delivered to the bath, from the energy balance.
    #[serde(rename = "Q_diss_J")]
    pub q_diss: f64,
    /// The same heat from integrating jump currents over the episode.
    #[serde(rename = "Q_diss_integral_J")]
    pub q_diss_integral: f64,
    #[serde(rename = "dS_sys_J_per_K")]
    pub ds_sys: f64,
    pub h_w_pre_bits: f64,
    pub h_w_post_bits: f64,
    /// I(W_post; X | W_pre) in bits.
    pub info_flow_bits: f64,
    /// W starts from the stationary mixture Σ_x p(x)·Gibbs(·|x).
    pub stationary_init: bool,
}

pub fn propagate_episode(p: &BipartiteProcess, duration: f64) -> Result<EpisodeTrace> {
    p.validate()?;
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::Validation(format!("duration must be nonnegative, got {duration}")));
    }
    let nw = p.w_states.len();
    let nx = p.x_states.len();
    let pw = p.w_init.probs();
    let px = p.data_dist.probs();
    let mut cells = vec![0.0; nw * nx * nw];
    let mut heat = Vec::with_capacity(nx);
    let mut heat_integral = Vec::with_capacity(nx);
    for x in 0..nx {
        let sp = p.spectral(x);
        let k = sp.kernel(duration);
        let e: Vec<f64> = p.energy.iter().map(|r| r[x]).collect();
        for w in 0..nw {
            for v in 0..nw {
                cells[(w * nx + x) * nw + v] = pw[w] * px[x] * k[(v, w)];
            }
        }
        let p0 = DVector::from_column_slice(pw);
        let pt = &k * &p0;
        let e0 = stable_sum((0..nw).map(|w| pw[w] * e[w]));
        let et = stable_sum((0..nw).map(|w| pt[w] * e[w]));
        heat.push(px[x] * (e0 - et));

        let occ = sp.occupation(duration) * &p0;
        let mut flux = Vec::with_capacity(nw * nw);
        for from in 0..nw {
            for to in 0..nw {
                if from != to {
                    flux.push(occ[from] * sp.generator[(to, from)] * (e[from] - e[to]));
                }
            }
        }
        heat_integral.push(px[x] * stable_sum(flux));
    }
    let total = stable_sum(cells.iter().copied());
    cells.iter_mut().for_each(|c| *c /= total);
    let table = JointTable::new(
        vec!["W_pre".into(), "X".into(), "W_post".into()],
        vec![p.w_states.clone(), p.x_states.clone(), p.w_states.clone()],
        cells,
    )?;
    let info = conditional_mi(&table, "W_post", "X", "W_pre")?;
    let post = table.marginal(&["W_post"])?;
    let h_pre = entropy_bits(pw);
    let h_post = entropy_bits(post.cells());
    let mixture = p.stationary_mixture();
    let stationary = pw.iter().zip(&mixture).all(|(a, b)| (a - b).abs() <= 1e-9);
    Ok(EpisodeTrace {
        duration,
        temperature: p.temperature,
        joint_post: table.to_file(),
        q_diss: stable_sum(heat),
        q_diss_integral: stable_sum(heat_integral),
        ds_sys: K_B * std::f64::consts::LN_2 * (h_post - h_pre),
        h_w_pre_bits: h_pre,
        h_w_post_bits: h_post,
        info_flow_bits: info,
        stationary_init: stationary,
    })
}

/// Second-law bound on the information a learner can draw from its data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCheck {
    /// info_flow ≤ (ΔS_sys + Q_diss/T)/(k_B ln 2).
    pub entropy_budget: BoundVerdict,
    /// info_flow ≤ Q_diss/(k_B T ln 2), only for stationary-mixture starts.
    pub heat_only: Option<BoundVerdict>,
}

impl LearningCheck {
    pub fn satisfied(&self) -> bool {
        self.entropy_budget.satisfied && self.heat_only.as_ref().is_none_or(|v| v.satisfied)
    }
}

pub fn verify_learning_inequality(t: &EpisodeTrace, temperature: f64) -> Result<LearningCheck> {
    if !(temperature > 0.0) {
        return Err(Error::Validation(format!("temperature must be positive, got {temperature}")));
    }
    let unit = K_B * std::f64::consts::LN_2;
    let rhs = (t.ds_sys + t.q_diss / temperature) / unit;
    let entropy_budget = BoundVerdict::check(
        "info flow within entropy budget",
        t.info_flow_bits,
        rhs,
        "bits",
        BITS_TOL,
    );
    let heat_only = t.stationary_init.then(|| {
        BoundVerdict::check(
            "info flow within dissipated heat",
            t.info_flow_bits,
            t.q_diss / (unit * temperature),
            "bits",
            BITS_TOL,
        )
        .with_note("stationary-mixture start stands in for a closed cycle")
    });
    Ok(LearningCheck {
        entropy_budget,
        heat_only,
    })
}

/// One point of a (gap, rate, duration) sweep of the two-state learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub gap_kt: f64,
    pub rate_scale_hz: f64,
    pub duration_s: f64,
    pub trace: EpisodeTrace,
    pub check: LearningCheck,
}

/// Evaluates every grid combination in parallel, returned in row-major
/// (gap, rate, duration) order.
pub fn lemma_grid(gaps_kt: &[f64], rates: &[f64], durations: &[f64], temperature: f64, stationary: bool) -> Result<Vec<GridPoint>> {
    let combos: Vec<(f64, f64, f64)> = gaps_kt
        .iter()
        .flat_map(|g| rates.iter().flat_map(move |r| durations.iter().map(move |d| (*g, *r, *d))))
        .collect();
    combos
        .par_iter()
        .map(|&(g, r, d)| {
            let mut p = BipartiteProcess::two_state(g, r, temperature)?;
            if stationary {
                let mix = p.stationary_mixture();
                let w = FiniteDistribution::new(p.w_states.clone(), mix)?;
                p = p.with_w_init(w)?;
            }
            let trace = propagate_episode(&p, d)?;
            let check = verify_learning_inequality(&trace, temperature)?;
            Ok(GridPoint {
                gap_kt: g,
                rate_scale_hz: r,
                duration_s: d,
                trace,
                check,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Only the logical copy is charged; the register is never reset.
    Open,
    /// The register is returned to all zeros before reuse.
    Closed,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Self::Open),
            "closed" => Ok(Self::Closed),
            other => Err(Error::Validation(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Copy of an n-bit latent word into a zeroed register by bitwise XOR.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterProtocol {
    pub n: usize,
    /// p(z) over the 2ⁿ words, indexed by the word's integer value.
    pub z_dist: Vec<f64>,
    pub boundary: Boundary,
    pub temperature: f64,
}

pub const MAX_REGISTER_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterOutcome {
    pub n: usize,
    pub boundary: Boundary,
    #[serde(rename = "delta_I_bits")]
    pub delta_i: f64,
    #[serde(rename = "Q_diss_J")]
    pub q_diss: f64,
    /// ΔI/Q_diss; absent when no heat is charged.
    #[serde(rename = "eta_tilde_bits_per_J")]
    pub eta_tilde: Option<f64>,
    pub unbounded: bool,
    pub caveat: Option<String>,
}

fn word_label(z: usize, n: usize) -> String {
    format!("{z:0n$b}")
}

impl RegisterProtocol {
    pub fn new(n: usize, z_dist: Vec<f64>, boundary: Boundary, temperature: f64) -> Result<Self> {
        let r = Self {
            n,
            z_dist,
            boundary,
            temperature,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_REGISTER_BITS {
            return Err(Error::Validation(format!(
                "register width must be 1..={MAX_REGISTER_BITS}, got {}",
                self.n
            )));
        }
        if self.z_dist.len() != 1 << self.n {
            return Err(Error::Validation(format!(
                "z distribution has {} entries, expected {}",
                self.z_dist.len(),
                1usize << self.n
            )));
        }
        let labels = (0..self.z_dist.len()).map(|z| word_label(z, self.n)).collect();
        FiniteDistribution::new(labels, self.z_dist.clone())?;
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::Validation("temperature must be positive".into()));
        }
        Ok(())
    }
}

/// Mutual information of a sparse joint over pairs of word indices.
fn sparse_mi(joint: &HashMap<(usize, usize), f64>) -> f64 {
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    for (&(a, b), &p) in joint {
        *pa.entry(a).or_default() += p;
        *pb.entry(b).or_default() += p;
    }
    let mut keys: Vec<_> = joint.keys().copied().collect();
    keys.sort_unstable();
    stable_sum(keys.into_iter().filter_map(|k| {
        let p = joint[&k];
        (p > 0.0).then(|| p * (p / (pa[&k.0] * pb[&k.1])).log2())
    }))
    .max(0.0)
}

pub fn run_register_protocol(r: &RegisterProtocol) -> Result<RegisterOutcome> {
    r.validate()?;
    let m_pre = 0usize;
    let mut before = HashMap::new();
    let mut after = HashMap::new();
    for (z, &p) in r.z_dist.iter().enumerate() {
        if p > 0.0 {
            before.insert((m_pre, z), p);
            after.insert((m_pre ^ z, z), p);
        }
    }
    let delta_i = sparse_mi(&after) - sparse_mi(&before);
    let (q, eta, unbounded, caveat) = match r.boundary {
        Boundary::Open => (
            0.0,
            None,
            delta_i > 1e-12,
            Some(
                "open boundary: the reversible copy is charged no heat, which is approached only \
                 in the quasistatic limit with diverging operation time; the written register is \
                 not reset"
                    .to_string(),
            ),
        ),
        Boundary::Closed => {
            let q = r.n as f64 * K_B * r.temperature * std::f64::consts::LN_2;
            (
                q,
                Some(delta_i / q),
                false,
                Some("closed boundary: register reset charged at the full n·k_B·T·ln2".to_string()),
            )
        }
    };
    Ok(RegisterOutcome {
        n: r.n,
        boundary: r.boundary,
        delta_i,
        q_diss: q,
        eta_tilde: eta,
        unbounded,
        caveat,
    })
}
