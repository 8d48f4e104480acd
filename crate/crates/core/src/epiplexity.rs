//! Acquired epiplexity ΔI = I(W_post; Z | W_pre) on exactly enumerated
//! learning episodes.
//!
//! An episode draws a latent instance Z from its prior, a data record X from
//! p(x|z), and applies the learner's stochastic update p(w_post | w_pre, x)
//! to an initial state drawn independently of everything else. The joint over
//! (Z, W_pre, X, W_post) is built densely by multiplying these kernels.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::probcore::{
    conditional_mi, mutual_information, stable_sum, FiniteDistribution, JointTable, Quantizer,
    PROB_TOL,
};
use crate::rng;
use crate::thermo::{landauer_scale, EnergyLedger};

/// Largest dense episode joint, in cells.
pub const EPISODE_CELL_LIMIT: u128 = 10_000_000;

pub const VAR_Z: &str = "Z";
pub const VAR_W_PRE: &str = "W_pre";
pub const VAR_X: &str = "X";
pub const VAR_W_POST: &str = "W_post";

/// Latent-variable data source: prior p(z) and observation model p(x|z).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeEnv {
    prior: FiniteDistribution,
    data_alphabet: Vec<String>,
    obs_model: Vec<Vec<f64>>,
}

impl GenerativeEnv {
    pub fn new(prior: FiniteDistribution, data_alphabet: Vec<String>, obs_model: Vec<Vec<f64>>) -> Result<Self> {
        if obs_model.len() != prior.len() {
            return Err(Error::Validation(format!(
                "{} observation rows for {} latent values",
                obs_model.len(),
                prior.len()
            )));
        }
        for (z, row) in prior.outcomes().iter().zip(&obs_model) {
            FiniteDistribution::new(data_alphabet.clone(), row.clone())
                .map_err(|e| Error::Validation(format!("obs_model[{z}]: {e}")))?;
        }
        Ok(Self {
            prior,
            data_alphabet,
            obs_model,
        })
    }

    pub fn latent(&self) -> &[String] {
        self.prior.outcomes()
    }

    pub fn prior(&self) -> &FiniteDistribution {
        &self.prior
    }

    pub fn data_alphabet(&self) -> &[String] {
        &self.data_alphabet
    }

    pub fn obs_model(&self) -> &[Vec<f64>] {
        &self.obs_model
    }

    /// Pairs of latent values whose observation rows coincide; such a Z is
    /// not minimal, since no learner can tell the pair apart.
    pub fn duplicate_latent_rows(&self) -> Vec<(String, String)> {
        let z = self.latent();
        let mut out = Vec::new();
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                let same = self.obs_model[i]
                    .iter()
                    .zip(&self.obs_model[j])
                    .all(|(a, b)| (a - b).abs() <= PROB_TOL);
                if same {
                    out.push((z[i].clone(), z[j].clone()));
                }
            }
        }
        out
    }
}

/// Learner with an initial state distribution and a stochastic update
/// kernel `update[w_pre][x][w_post]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSpec {
    initial: FiniteDistribution,
    update: Vec<Vec<Vec<f64>>>,
}

impl LearnerSpec {
    pub fn new(initial: FiniteDistribution, data_alphabet: &[String], update: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let states = initial.outcomes();
        if update.len() != states.len() {
            return Err(Error::Validation(format!(
                "update has {} slices for {} learner states",
                update.len(),
                states.len()
            )));
        }
        for (w, slice) in states.iter().zip(&update) {
            if slice.len() != data_alphabet.len() {
                return Err(Error::Validation(format!(
                    "update for state `{w}` covers {} records, expected {}",
                    slice.len(),
                    data_alphabet.len()
                )));
            }
            for (x, row) in data_alphabet.iter().zip(slice) {
                FiniteDistribution::new(states.to_vec(), row.clone())
                    .map_err(|e| Error::Validation(format!("update[{w},{x}]: {e}")))?;
            }
        }
        Ok(Self { initial, update })
    }

    pub fn states(&self) -> &[String] {
        self.initial.outcomes()
    }

    pub fn initial(&self) -> &FiniteDistribution {
        &self.initial
    }

    pub fn update(&self) -> &[Vec<Vec<f64>>] {
        &self.update
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnerFile {
    states: Vec<String>,
    initial: Vec<f64>,
    update: BTreeMap<String, Vec<f64>>,
}

/// Environment, learner and optional energy ledger read from one JSON file.
///
/// ```json
/// {"latent": ["a", "b"], "prior": [0.5, 0.5],
///  "data_alphabet": ["0", "1"],
///  "obs_model": {"a": [0.9, 0.1], "b": [0.1, 0.9]},
///  "learner": {"states": ["0", "1"], "initial": [1, 0],
///              "update": {"0,0": [1, 0], "0,1": [0, 1], "1,0": [1, 0], "1,1": [0, 1]}},
///  "ledger": {"E_cons_J": 1e-20, "Q_diss_J": 1e-20, "T_K": 300}}
/// ```
///
/// `data_alphabet` defaults to `"0"`, `"1"`, … sized from the observation
/// rows. Update keys are `"w,x"`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub env: GenerativeEnv,
    pub learner: LearnerSpec,
    pub ledger: Option<EnergyLedger>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpisodeFile {
    latent: Vec<String>,
    prior: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data_alphabet: Option<Vec<String>>,
    obs_model: BTreeMap<String, Vec<f64>>,
    learner: LearnerFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ledger: Option<EnergyLedger>,
}

impl EpisodeSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let f: EpisodeFile = serde_json::from_str(s)?;
        Self::from_file(f)
    }

    fn from_file(f: EpisodeFile) -> Result<Self> {
        let prior = FiniteDistribution::new(f.latent.clone(), f.prior)?;
        if let Some(extra) = f.obs_model.keys().find(|k| !f.latent.contains(k)) {
            return Err(Error::Validation(format!("obs_model row for unknown latent `{extra}`")));
        }
        let rows = f
            .latent
            .iter()
            .map(|z| {
                f.obs_model
                    .get(z)
                    .cloned()
                    .ok_or_else(|| Error::Validation(format!("obs_model has no row for `{z}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let data_alphabet = match f.data_alphabet {
            Some(a) => a,
            None => (0..rows[0].len()).map(|i| i.to_string()).collect(),
        };
        let env = GenerativeEnv::new(prior, data_alphabet, rows)?;

        let lf = f.learner;
        let initial = FiniteDistribution::new(lf.states.clone(), lf.initial)?;
        let mut used = 0;
        let mut update = Vec::with_capacity(lf.states.len());
        for w in &lf.states {
            let mut slice = Vec::with_capacity(env.data_alphabet.len());
            for x in &env.data_alphabet {
                let key = format!("{w},{x}");
                let row = lf
                    .update
                    .get(&key)
                    .ok_or_else(|| Error::Validation(format!("learner update has no row `{key}`")))?;
                used += 1;
                slice.push(row.clone());
            }
            update.push(slice);
        }
        if used != lf.update.len() {
            return Err(Error::Validation(
                "learner update has rows for unknown (state, record) pairs".into(),
            ));
        }
        let learner = LearnerSpec::new(initial, &env.data_alphabet, update)?;
        if let Some(l) = &f.ledger {
            l.validate()?;
        }
        Ok(Self {
            env,
            learner,
            ledger: f.ledger,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let env = &self.env;
        let learner = &self.learner;
        let mut update = BTreeMap::new();
        for (w, slice) in learner.states().iter().zip(&learner.update) {
            for (x, row) in env.data_alphabet.iter().zip(slice) {
                update.insert(format!("{w},{x}"), row.clone());
            }
        }
        let f = EpisodeFile {
            latent: env.latent().to_vec(),
            prior: env.prior.probs().to_vec(),
            data_alphabet: Some(env.data_alphabet.clone()),
            obs_model: env
                .latent()
                .iter()
                .cloned()
                .zip(env.obs_model.iter().cloned())
                .collect(),
            learner: LearnerFile {
                states: learner.states().to_vec(),
                initial: learner.initial.probs().to_vec(),
                update,
            },
            ledger: self.ledger,
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }
}

/// Joint over (Z, W_pre, X, W_post) for a passively generated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeJoint {
    table: JointTable,
}

impl EpisodeJoint {
    /// Wraps a table after checking that it factorizes as
    /// p(z)·p(w_pre)·p(x|z)·p(w_post|w_pre,x).
    ///
    /// A table where W_pre influences X or Z (interactive data collection)
    /// is rejected: the data-processing bound does not apply there without
    /// declaring the policy class.
    pub fn from_table(table: JointTable) -> Result<Self> {
        let expected = [VAR_Z, VAR_W_PRE, VAR_X, VAR_W_POST];
        if table.vars().iter().map(String::as_str).ne(expected) {
            return Err(Error::Validation(format!(
                "episode joint must have variables {expected:?}, got {:?}",
                table.vars()
            )));
        }
        let s = table.shape();
        let (nz, nw, nx) = (s[0], s[1], s[2]);
        let idx = |z: usize, w: usize, x: usize, v: usize| ((z * nw + w) * nx + x) * nw + v;
        let c = table.cells();
        let mut pz = vec![0.0; nz];
        let mut pw = vec![0.0; nw];
        let mut pzx = vec![0.0; nz * nx];
        let mut pwx = vec![0.0; nw * nx];
        let mut pwxv = vec![0.0; nw * nx * nw];
        for z in 0..nz {
            for w in 0..nw {
                for x in 0..nx {
                    for v in 0..nw {
                        let p = c[idx(z, w, x, v)];
                        pz[z] += p;
                        pw[w] += p;
                        pzx[z * nx + x] += p;
                        pwx[w * nx + x] += p;
                        pwxv[(w * nx + x) * nw + v] += p;
                    }
                }
            }
        }
        let mut worst = 0.0f64;
        for z in 0..nz {
            for w in 0..nw {
                for x in 0..nx {
                    for v in 0..nw {
                        let x_given_z = if pz[z] > 0.0 { pzx[z * nx + x] / pz[z] } else { 0.0 };
                        let post_given = if pwx[w * nx + x] > 0.0 {
                            pwxv[(w * nx + x) * nw + v] / pwx[w * nx + x]
                        } else {
                            0.0
                        };
                        let model = pz[z] * pw[w] * x_given_z * post_given;
                        worst = worst.max((model - c[idx(z, w, x, v)]).abs());
                    }
                }
            }
        }
        if worst > 1e-12 {
            return Err(Error::Convention(format!(
                "episode joint does not factorize as a passive episode (max deviation {worst:e}); \
                 data depends on the learner state, so declare the policy class and evaluate it \
                 under an interactive convention"
            )));
        }
        Ok(Self { table })
    }

    pub fn table(&self) -> &JointTable {
        &self.table
    }

    pub fn into_table(self) -> JointTable {
        self.table
    }
}

/// Enumerates the episode joint exactly.
pub fn build_episode_joint(env: &GenerativeEnv, learner: &LearnerSpec) -> Result<EpisodeJoint> {
    let nz = env.latent().len();
    let nx = env.data_alphabet.len();
    let nw = learner.states().len();
    let cells = (nz as u128) * (nw as u128) * (nw as u128) * (nx as u128);
    if cells > EPISODE_CELL_LIMIT {
        return Err(Error::Capacity {
            what: "episode joint".into(),
            size: cells,
            limit: EPISODE_CELL_LIMIT,
        });
    }
    if learner.update.first().map(Vec::len) != Some(nx) {
        return Err(Error::Validation(
            "learner update does not cover the environment's data alphabet".into(),
        ));
    }
    let mut out = Vec::with_capacity(cells as usize);
    for (pz, xrow) in env.prior.probs().iter().zip(&env.obs_model) {
        for (pw, wslice) in learner.initial.probs().iter().zip(&learner.update) {
            for (px, post) in xrow.iter().zip(wslice) {
                let base = pz * pw * px;
                out.extend(post.iter().map(|pv| base * pv));
            }
        }
    }
    // Products of normalized kernels are normalized up to rounding.
    let total = stable_sum(out.iter().copied());
    out.iter_mut().for_each(|p| *p /= total);
    let w = learner.states().to_vec();
    let table = JointTable::new(
        vec![VAR_Z.into(), VAR_W_PRE.into(), VAR_X.into(), VAR_W_POST.into()],
        vec![env.latent().to_vec(), w.clone(), env.data_alphabet.clone(), w],
        out,
    )?;
    Ok(EpisodeJoint { table })
}

/// Optional quantizers for real-valued learner states and latents.
///
/// The `w` quantizer is applied to both W_pre and W_post so that the two
/// copies of the learner live on the same coarse alphabet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSet {
    #[serde(default)]
    pub w: Option<Quantizer>,
    #[serde(default)]
    pub z: Option<Quantizer>,
}

impl QuantizerSet {
    pub fn is_empty(&self) -> bool {
        self.w.is_none() && self.z.is_none()
    }

    fn apply(&self, t: &JointTable) -> Result<JointTable> {
        let mut t = t.clone();
        if let Some(q) = &self.w {
            t = t.quantize_axis(VAR_W_PRE, q)?.quantize_axis(VAR_W_POST, q)?;
        }
        if let Some(q) = &self.z {
            t = t.quantize_axis(VAR_Z, q)?;
        }
        Ok(t)
    }
}

/// I(W_post; Z | W_pre) in bits, after quantization when any is supplied.
pub fn acquired_epiplexity(j: &EpisodeJoint, quantizers: &QuantizerSet) -> Result<f64> {
    let t = if quantizers.is_empty() {
        j.table.clone()
    } else {
        quantizers.apply(&j.table)?
    };
    conditional_mi(&t, VAR_W_POST, VAR_Z, VAR_W_PRE)
}

/// Acquired epiplexity and its data-processing ceiling I(X; Z | W_pre).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpiBound {
    pub delta_i_bits: f64,
    pub bound_bits: f64,
}

pub fn dpi_bound(j: &EpisodeJoint) -> Result<DpiBound> {
    let delta = conditional_mi(&j.table, VAR_W_POST, VAR_Z, VAR_W_PRE)?;
    let bound = conditional_mi(&j.table, VAR_X, VAR_Z, VAR_W_PRE)?;
    if delta > bound + 1e-9 {
        return Err(Error::Convention(format!(
            "acquired epiplexity {delta} exceeds I(X;Z|W_pre) = {bound}; the episode is not passive"
        )));
    }
    Ok(DpiBound {
        delta_i_bits: delta,
        bound_bits: bound,
    })
}

/// Everything the epiplexity command reports about one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiplexitySummary {
    pub delta_i_bits: f64,
    /// ΔI after coarse-graining, present when quantizers were supplied.
    pub delta_i_quantized_bits: Option<f64>,
    pub dpi_bound_bits: f64,
    pub i_pre_z_bits: f64,
    pub i_post_z_bits: f64,
    /// I(W_post;Z) − I(W_pre;Z); negative when the learner forgets.
    pub signed_change_bits: f64,
    pub warnings: Vec<String>,
}

pub fn summarize(spec: &EpisodeSpec, quantizers: &QuantizerSet) -> Result<EpiplexitySummary> {
    let j = build_episode_joint(&spec.env, &spec.learner)?;
    let dpi = dpi_bound(&j)?;
    let quantized = if quantizers.is_empty() {
        None
    } else {
        Some(acquired_epiplexity(&j, quantizers)?)
    };
    let i_pre = mutual_information(&j.table, VAR_W_PRE, VAR_Z)?;
    let i_post = mutual_information(&j.table, VAR_W_POST, VAR_Z)?;
    let warnings = spec
        .env
        .duplicate_latent_rows()
        .into_iter()
        .map(|(a, b)| {
            format!("latent values `{a}` and `{b}` induce identical data distributions; Z is not minimal")
        })
        .collect();
    Ok(EpiplexitySummary {
        delta_i_bits: dpi.delta_i_bits,
        delta_i_quantized_bits: quantized,
        dpi_bound_bits: dpi.bound_bits,
        i_pre_z_bits: i_pre,
        i_post_z_bits: i_post,
        signed_change_bits: i_post - i_pre,
        warnings,
    })
}

/// Bits of acquired structure per joule consumed and per joule dissipated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyRecord {
    #[serde(rename = "delta_I_bits")]
    pub delta_i: f64,
    #[serde(rename = "E_cons_J")]
    pub e_cons: f64,
    #[serde(rename = "Q_diss_J")]
    pub q_diss: f64,
    #[serde(rename = "T_K")]
    pub temperature: f64,
    #[serde(rename = "eta_E_bits_per_J")]
    pub eta_e: f64,
    #[serde(rename = "eta_tilde_E_bits_per_J")]
    pub eta_tilde_e: Option<f64>,
    /// η̃_E · k_B T ln 2; at most 1 in a closed-cycle run.
    pub landauer_fraction: Option<f64>,
}

pub fn learning_efficiency(delta_i: f64, ledger: &EnergyLedger) -> Result<EfficiencyRecord> {
    ledger.validate()?;
    if !(ledger.e_cons > 0.0) {
        return Err(Error::Validation(format!(
            "consumed energy must be positive, got {} J",
            ledger.e_cons
        )));
    }
    if !delta_i.is_finite() || delta_i < 0.0 {
        return Err(Error::Validation(format!("acquired epiplexity {delta_i} is not a nonnegative number")));
    }
    let scale = landauer_scale(ledger.temperature)?;
    let eta_tilde = (ledger.q_diss > 0.0).then(|| delta_i / ledger.q_diss);
    Ok(EfficiencyRecord {
        delta_i,
        e_cons: ledger.e_cons,
        q_diss: ledger.q_diss,
        temperature: ledger.temperature,
        eta_e: delta_i / ledger.e_cons,
        eta_tilde_e: eta_tilde,
        landauer_fraction: eta_tilde.map(|e| e * scale.joules_per_bit),
    })
}

fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    let t: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= t);
    w
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A random small passive episode; sizes are drawn from 2..=4.
pub fn random_episode<R: Rng>(rng: &mut R) -> (GenerativeEnv, LearnerSpec) {
    let nz = rng.gen_range(2..=4);
    let nx = rng.gen_range(2..=4);
    let nw = rng.gen_range(2..=4);
    let prior = FiniteDistribution::new(labels(nz), random_row(rng, nz)).expect("normalized");
    let obs = (0..nz).map(|_| random_row(rng, nx)).collect();
    let env = GenerativeEnv::new(prior, labels(nx), obs).expect("valid rows");
    let initial = FiniteDistribution::new(labels(nw), random_row(rng, nw)).expect("normalized");
    let update = (0..nw)
        .map(|_| (0..nx).map(|_| random_row(rng, nw)).collect())
        .collect();
    let learner = LearnerSpec::new(initial, &labels(nx), update).expect("valid kernel");
    (env, learner)
}

/// Outcome of checking ΔI ≤ I(X;Z|W_pre) on random episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpiFuzzReport {
    pub seed: u64,
    pub cases: usize,
    pub violations: usize,
    /// Smallest value of bound − ΔI seen.
    pub min_slack_bits: f64,
}

pub fn dpi_fuzz(seed: u64, cases: usize) -> Result<DpiFuzzReport> {
    let slacks = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let (env, learner) = random_episode(&mut r);
            let j = build_episode_joint(&env, &learner)?;
            let d = conditional_mi(&j.table, VAR_W_POST, VAR_Z, VAR_W_PRE)?;
            let b = conditional_mi(&j.table, VAR_X, VAR_Z, VAR_W_PRE)?;
            Ok(b - d)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DpiFuzzReport {
        seed,
        cases,
        violations: slacks.iter().filter(|s| **s < -1e-9).count(),
        min_slack_bits: slacks.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
