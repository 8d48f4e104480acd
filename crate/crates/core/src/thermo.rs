//! Energy accounting, the Landauer scale, and thermodynamic bound checks.
//!
//! Verdicts never fail: an impossible ledger is reported with negative
//! slack rather than rejected.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Boltzmann constant in J/K (exact SI value).
pub const K_B: f64 = 1.380649e-23;

/// Default temperature in kelvin.
pub const ROOM_TEMPERATURE: f64 = 300.0;

/// Tolerance, in bits, applied to every information-valued bound.
pub const BITS_TOL: f64 = 1e-9;

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "temperature must be positive and finite, got {t} K"
        )))
    }
}

/// Energy balance E_cons = Q_diss + ΔU_sys + W_out + ΔE_store for one
/// episode, all in joules, at bath temperature `temperature` (K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyLedger {
    #[serde(rename = "E_cons_J")]
    pub e_cons: f64,
    #[serde(rename = "Q_diss_J")]
    pub q_diss: f64,
    #[serde(rename = "dU_sys_J", default)]
    pub du_sys: f64,
    #[serde(rename = "W_out_J", default)]
    pub w_out: f64,
    #[serde(rename = "dE_store_J", default)]
    pub de_store: f64,
    #[serde(rename = "T_K")]
    pub temperature: f64,
}

impl EnergyLedger {
    pub fn new(
        e_cons: f64,
        q_diss: f64,
        du_sys: f64,
        w_out: f64,
        de_store: f64,
        temperature: f64,
    ) -> Result<Self> {
        let l = Self {
            e_cons,
            q_diss,
            du_sys,
            w_out,
            de_store,
            temperature,
        };
        l.validate()?;
        Ok(l)
    }

    /// Ledger where all consumed energy is dissipated as heat.
    pub fn dissipative(e_cons: f64, temperature: f64) -> Result<Self> {
        Self::new(e_cons, e_cons, 0.0, 0.0, 0.0, temperature)
    }

    pub fn validate(&self) -> Result<()> {
        check_temperature(self.temperature)?;
        for (name, v) in [
            ("E_cons", self.e_cons),
            ("Q_diss", self.q_diss),
            ("dU_sys", self.du_sys),
            ("W_out", self.w_out),
            ("dE_store", self.de_store),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite")));
            }
        }
        if self.e_cons < 0.0 {
            return Err(Error::Validation(format!(
                "E_cons must be nonnegative, got {}",
                self.e_cons
            )));
        }
        Ok(())
    }
}

/// The k_B·T·ln2 yardstick at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauerBenchmark {
    pub temperature: f64,
    pub joules_per_bit: f64,
    pub bits_per_joule: f64,
}

pub fn landauer_scale(temperature: f64) -> Result<LandauerBenchmark> {
    check_temperature(temperature)?;
    let joules_per_bit = K_B * temperature * LN_2;
    Ok(LandauerBenchmark {
        temperature,
        joules_per_bit,
        bits_per_joule: 1.0 / joules_per_bit,
    })
}

/// Thresholds used when auditing an [`EnergyLedger`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceOptions {
    /// ΔU_sys, W_out and ΔE_store each below this fraction of E_cons
    /// justify reading E_cons as Q_diss.
    pub negligibility_fraction: f64,
    /// Allowed |residual| as a fraction of the largest ledger term.
    pub residual_fraction: f64,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        Self {
            negligibility_fraction: 0.01,
            residual_fraction: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub residual_j: f64,
    pub consistent: bool,
    pub approximation_justified: bool,
    pub negligibility_fraction: f64,
}

pub fn balance_residual(l: &EnergyLedger) -> BalanceCheck {
    balance_residual_with(l, &BalanceOptions::default())
}

pub fn balance_residual_with(l: &EnergyLedger, opts: &BalanceOptions) -> BalanceCheck {
    let residual = l.e_cons - (l.q_diss + l.du_sys + l.w_out + l.de_store);
    let scale = [l.e_cons, l.q_diss, l.du_sys, l.w_out, l.de_store]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let consistent = residual.abs() <= opts.residual_fraction * scale;
    let limit = opts.negligibility_fraction * l.e_cons.abs();
    let approximation_justified = consistent
        && [l.du_sys, l.w_out, l.de_store]
            .iter()
            .all(|v| v.abs() <= limit);
    BalanceCheck {
        residual_j: residual,
        consistent,
        approximation_justified,
        negligibility_fraction: opts.negligibility_fraction,
    }
}

/// Σ = ΔS_sys + Q_diss/T in its physical, dimensionless and bit forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyProduction {
    pub sigma_j_per_k: f64,
    /// Σ / k_B
    pub dimensionless: f64,
    /// Σ / (k_B ln 2)
    pub bits: f64,
}

/// Physical entropy change for a Shannon entropy change in bits.
pub fn shannon_to_physical(delta_h_bits: f64) -> f64 {
    K_B * LN_2 * delta_h_bits
}

pub fn entropy_production(ds_sys: f64, q_diss: f64, temperature: f64) -> Result<EntropyProduction> {
    check_temperature(temperature)?;
    let sigma = ds_sys + q_diss / temperature;
    Ok(EntropyProduction {
        sigma_j_per_k: sigma,
        dimensionless: sigma / K_B,
        bits: sigma / (K_B * LN_2),
    })
}

/// Outcome of checking `lhs ≤ rhs` within `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundVerdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub unit: String,
    pub tolerance: f64,
    pub satisfied: bool,
    /// rhs − lhs; negative when violated.
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundVerdict {
    pub fn check(name: &str, lhs: f64, rhs: f64, unit: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            unit: unit.to_string(),
            tolerance,
            satisfied: lhs <= rhs + tolerance,
            slack: rhs - lhs,
            note: None,
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// Result of [`corollary_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryCheck {
    /// k_B·T·ln2·ΔI − T·ΔS_sys ≤ Q_diss, in joules.
    pub heat_bound: BoundVerdict,
    /// Present when ΔS_sys = 0: η̃_E = ΔI/Q_diss against 1/(k_B·T·ln2).
    pub closed_cycle: Option<BoundVerdict>,
}

/// Checks the dissipation lower bound Q_diss ≥ k_B·T·ln2·ΔI − T·ΔS_sys.
pub fn corollary_check(delta_i: f64, ds_sys: f64, q_diss: f64, temperature: f64) -> Result<CorollaryCheck> {
    corollary_check_in_units(delta_i, ds_sys, q_diss, temperature, K_B)
}

/// [`corollary_check`] with the Boltzmann constant expressed in the
/// caller's energy unit per kelvin.
pub fn corollary_check_in_units(
    delta_i: f64,
    ds_sys: f64,
    q_diss: f64,
    temperature: f64,
    boltzmann: f64,
) -> Result<CorollaryCheck> {
    check_temperature(temperature)?;
    let per_bit = boltzmann * temperature * LN_2;
    let lhs = per_bit * delta_i - temperature * ds_sys;
    let heat_bound = BoundVerdict::check(
        "corollary: Q_diss >= kT ln2 dI - T dS_sys",
        lhs,
        q_diss,
        "J",
        BITS_TOL * per_bit,
    );
    let closed_cycle = (ds_sys == 0.0).then(|| {
        let limit = 1.0 / per_bit;
        let mut v = if q_diss > 0.0 {
            BoundVerdict::check(
                "closed cycle: eta_tilde <= 1/(kT ln2)",
                delta_i / q_diss,
                limit,
                "bits/J",
                BITS_TOL * limit,
            )
        } else {
            // With no dissipation any positive ΔI exceeds the benchmark.
            let mut v = BoundVerdict::check(
                "closed cycle: dI <= Q_diss/(kT ln2)",
                delta_i,
                0.0,
                "bits",
                BITS_TOL,
            );
            v.note = Some("Q_diss = 0: eta_tilde undefined".into());
            v
        };
        if v.note.is_none() {
            v.note = Some(format!("landauer fraction {}", delta_i / q_diss / limit));
        }
        v
    });
    Ok(CorollaryCheck {
        heat_bound,
        closed_cycle,
    })
}

/// Coarse closed-cycle budget ΔI_agent + ΔI_env ≤ Σ_tot/(k_B ln2).
pub fn closed_cycle_budget(di_agent: f64, di_env: f64, sigma_tot: f64) -> BoundVerdict {
    let rhs = sigma_tot / (K_B * LN_2);
    let mut v = BoundVerdict::check(
        "closed-cycle information budget",
        di_agent + di_env,
        rhs,
        "bits",
        BITS_TOL,
    );
    v.note = Some(if sigma_tot < 0.0 {
        "conceptual yardstick, not a universal identity; negative total entropy production declared".into()
    } else {
        "conceptual yardstick, not a universal identity".into()
    });
    v
}

/// Control-side yardstick: imposing ΔI bits on the environment should cost
/// work on the order of k_B·T·ln2·ΔI. Only the order of magnitude is
/// checked (a factor of 10 either way), since the constant is unspecified.
pub fn control_work_yardstick(di_env: f64, work: f64, temperature: f64) -> Result<BoundVerdict> {
    check_temperature(temperature)?;
    let scale = K_B * temperature * LN_2 * di_env;
    Ok(BoundVerdict::check(
        "control work yardstick (order of magnitude)",
        scale / 10.0,
        work,
        "J",
        BITS_TOL * K_B * temperature * LN_2,
    )
    .with_note("heuristic: bound holds only up to unspecified constant factors"))
}
