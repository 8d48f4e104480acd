//! Efficiency reports and the minimum reporting checklist.
//!
//! A bits-per-joule number only means something next to the conventions
//! that produced it, so a report carries a seven-section checklist and is
//! refused unless every section is filled in.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::channel::{CapacityPerCost, CostConvention, EmpowermentCurve, Endpoint};
use crate::epiplexity::EfficiencyRecord;
use crate::error::{Error, Result};
use crate::mdlproxy::MdlReport;
use crate::thermo::{BoundVerdict, EnergyLedger};

pub mod canonical;

pub const SCHEMA_VERSION: &str = "1";

pub const SECTION_BOUNDARY: &str = "accounting boundary";
pub const SECTION_ENERGY: &str = "energy balance terms";
pub const SECTION_BASELINE: &str = "baseline / null policy";
pub const SECTION_COARSE: &str = "coarse-graining / noise model";
pub const SECTION_HORIZON: &str = "horizon and sampling";
pub const SECTION_TIME: &str = "time / throughput";
pub const SECTION_ESTIMATORS: &str = "estimator details";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyBalanceSection {
    #[serde(default)]
    pub ledger: Option<EnergyLedger>,
    /// Which terms of the balance were measured, modelled or declared.
    #[serde(default)]
    pub declared_terms: String,
    /// Terms asserted negligible for this run.
    #[serde(default)]
    pub negligible: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselinePolicy {
    #[serde(default)]
    pub null_action: Option<String>,
    #[serde(rename = "baseline_energy_J")]
    pub baseline_energy: f64,
    pub convention: CostConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseGraining {
    /// Variable name to quantizer or noise-model description.
    pub variables: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSampling {
    #[serde(default)]
    pub horizon: Option<usize>,
    pub episode: String,
    #[serde(default)]
    pub reset_protocol: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeThroughput {
    #[serde(default)]
    pub wall_clock_s: Option<f64>,
    #[serde(default, rename = "average_power_W")]
    pub average_power_w: Option<f64>,
    #[serde(default)]
    pub bits_per_s: Option<f64>,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorDetails {
    pub epiplexity: String,
    pub empowerment: String,
    pub mdl: String,
    /// Optional uncertainty per reported quantity, in its own unit.
    #[serde(default)]
    pub uncertainty: BTreeMap<String, f64>,
}

/// The seven sections every report must declare.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportingChecklist {
    #[serde(default)]
    pub accounting_boundary: Option<String>,
    #[serde(default)]
    pub energy_balance_terms: Option<EnergyBalanceSection>,
    #[serde(default)]
    pub baseline_policy: Option<BaselinePolicy>,
    #[serde(default)]
    pub coarse_graining: Option<CoarseGraining>,
    #[serde(default)]
    pub horizon_sampling: Option<HorizonSampling>,
    #[serde(default)]
    pub time_throughput: Option<TimeThroughput>,
    #[serde(default)]
    pub estimator_details: Option<EstimatorDetails>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub section: String,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.section, self.reason)
    }
}

fn blank(s: &str) -> bool {
    s.trim().is_empty()
}

fn finite_nonneg(x: Option<f64>) -> bool {
    x.is_none_or(|v| v.is_finite() && v >= 0.0)
}

impl ReportingChecklist {
    /// Fills every section that is missing here from `other`.
    pub fn or(self, other: ReportingChecklist) -> ReportingChecklist {
        ReportingChecklist {
            accounting_boundary: self.accounting_boundary.or(other.accounting_boundary),
            energy_balance_terms: self.energy_balance_terms.or(other.energy_balance_terms),
            baseline_policy: self.baseline_policy.or(other.baseline_policy),
            coarse_graining: self.coarse_graining.or(other.coarse_graining),
            horizon_sampling: self.horizon_sampling.or(other.horizon_sampling),
            time_throughput: self.time_throughput.or(other.time_throughput),
            estimator_details: self.estimator_details.or(other.estimator_details),
        }
    }
}

/// One violation per missing or empty section, in checklist order.
pub fn validate(c: &ReportingChecklist) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |section: &str, state: Option<Option<&str>>| match state {
        None => out.push(Violation {
            section: section.into(),
            reason: "missing".into(),
        }),
        Some(Some(why)) => out.push(Violation {
            section: section.into(),
            reason: why.into(),
        }),
        Some(None) => {}
    };

    check(
        SECTION_BOUNDARY,
        c.accounting_boundary
            .as_deref()
            .map(|s| blank(s).then_some("empty")),
    );
    check(
        SECTION_ENERGY,
        c.energy_balance_terms.as_ref().map(|e| {
            if let Some(l) = &e.ledger {
                if l.validate().is_err() {
                    return Some("ledger is invalid");
                }
            }
            (e.ledger.is_none() && blank(&e.declared_terms)).then_some("no ledger and no declared terms")
        }),
    );
    check(
        SECTION_BASELINE,
        c.baseline_policy.as_ref().map(|b| {
            if !(b.baseline_energy.is_finite() && b.baseline_energy >= 0.0) {
                Some("baseline energy must be a nonnegative number")
            } else if b.convention == CostConvention::Incremental
                && b.null_action.as_deref().is_none_or(blank)
            {
                Some("incremental convention needs a null action")
            } else {
                None
            }
        }),
    );
    check(
        SECTION_COARSE,
        c.coarse_graining.as_ref().map(|g| {
            (g.variables.is_empty() || g.variables.values().any(|v| blank(v)))
                .then_some("no per-variable description")
        }),
    );
    check(
        SECTION_HORIZON,
        c.horizon_sampling
            .as_ref()
            .map(|h| blank(&h.episode).then_some("episode definition is empty")),
    );
    check(
        SECTION_TIME,
        c.time_throughput.as_ref().map(|t| {
            if !(finite_nonneg(t.wall_clock_s) && finite_nonneg(t.average_power_w) && finite_nonneg(t.bits_per_s)) {
                Some("values must be nonnegative numbers")
            } else if t.wall_clock_s.is_none()
                && t.average_power_w.is_none()
                && t.bits_per_s.is_none()
                && blank(&t.note)
            {
                Some("empty")
            } else {
                None
            }
        }),
    );
    check(
        SECTION_ESTIMATORS,
        c.estimator_details.as_ref().map(|e| {
            (blank(&e.epiplexity) || blank(&e.empowerment) || blank(&e.mdl))
                .then_some("epiplexity, empowerment and MDL estimators must each be named")
        }),
    );
    out
}

/// Normative learning efficiency from a declared ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningSection {
    pub record: EfficiencyRecord,
    #[serde(rename = "dS_sys_J_per_K")]
    pub ds_sys: f64,
    /// How ΔI was obtained and which energy it is divided by.
    pub convention: String,
}

/// Control efficiency: the empowerment curve and capacity per unit cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub endpoint: Endpoint,
    pub curve: EmpowermentCurve,
    /// η_C under each evaluated cost convention.
    pub per_unit_cost: Vec<CapacityPerCost>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Operational companion from two-part code lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdlSection {
    pub report: MdlReport,
    #[serde(default)]
    pub gain_bits: Option<f64>,
    #[serde(default, rename = "E_train_J")]
    pub e_train: Option<f64>,
    #[serde(default, rename = "eta_E_mdl_bits_per_J")]
    pub eta_e_mdl: Option<f64>,
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyReport {
    pub schema_version: String,
    pub checklist: ReportingChecklist,
    #[serde(default)]
    pub learning: Option<LearningSection>,
    #[serde(default)]
    pub control: Option<ControlSection>,
    #[serde(default)]
    pub mdl_companion: Option<MdlSection>,
    #[serde(default)]
    pub bound_verdicts: Vec<BoundVerdict>,
    /// Subcommand and flags that produced the report.
    #[serde(default)]
    pub invocation: Option<serde_json::Value>,
}

impl EfficiencyReport {
    pub fn new(checklist: ReportingChecklist) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            checklist,
            learning: None,
            control: None,
            mdl_companion: None,
            bound_verdicts: Vec::new(),
            invocation: None,
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        validate(&self.checklist)
    }

    /// Canonical JSON; refuses an incomplete checklist unless `force`.
    pub fn to_json_checked(&self, force: bool) -> Result<String> {
        let v = self.violations();
        if !v.is_empty() && !force {
            let list: Vec<String> = v.iter().map(ToString::to_string).collect();
            return Err(Error::Validation(format!(
                "reporting checklist incomplete: {}",
                list.join("; ")
            )));
        }
        self.to_json()
    }

    pub fn to_json(&self) -> Result<String> {
        canonical::to_canonical_json(self)
    }

    /// Reads a report, checking the schema version before the layout.
    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let found = v.get("schema_version").and_then(|x| x.as_str());
        if found != Some(SCHEMA_VERSION) {
            return Err(Error::Version {
                found: found.unwrap_or("<missing>").into(),
                expected: SCHEMA_VERSION.into(),
            });
        }
        Ok(serde_json::from_str(s)?)
    }

    /// Verdicts that failed, including the Landauer-fraction ceiling for
    /// closed-cycle learning sections.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .bound_verdicts
            .iter()
            .filter(|v| !v.satisfied)
            .map(|v| v.name.clone())
            .collect();
        if let Some(l) = &self.learning {
            if let Some(f) = l.record.landauer_fraction {
                if f > 1.0 + 1e-9 && l.ds_sys.abs() <= 1e-30 {
                    out.push("landauer fraction above 1 with dS_sys = 0".into());
                }
            }
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.6e}")
}

/// Fixed-layout plain-text summary.
pub fn render_summary(r: &EfficiencyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "efficiency report (schema {})", r.schema_version);

    let _ = writeln!(s, "\n[learning]");
    match &r.learning {
        None => {
            let _ = writeln!(s, "  not evaluated");
        }
        Some(l) => {
            let rec = &l.record;
            let _ = writeln!(s, "  convention          {}", l.convention);
            let _ = writeln!(s, "  delta_I             {} bits", num(rec.delta_i));
            let _ = writeln!(s, "  E_cons              {} J", num(rec.e_cons));
            let _ = writeln!(s, "  Q_diss              {} J", num(rec.q_diss));
            let _ = writeln!(s, "  T                   {} K", num(rec.temperature));
            let _ = writeln!(s, "  dS_sys              {} J/K", num(l.ds_sys));
            let _ = writeln!(s, "  eta_E               {} bits/J [per consumed joule]", num(rec.eta_e));
            match rec.eta_tilde_e {
                Some(v) => {
                    let _ = writeln!(s, "  eta_tilde_E         {} bits/J [per dissipated joule]", num(v));
                }
                None => {
                    let _ = writeln!(s, "  eta_tilde_E         not evaluated (Q_diss = 0)");
                }
            }
            if let Some(f) = rec.landauer_fraction {
                let flag = if f > 1.0 + 1e-9 && l.ds_sys.abs() <= 1e-30 {
                    "VIOLATION "
                } else {
                    ""
                };
                let _ = writeln!(s, "  {flag}landauer fraction   {}", num(f));
            }
        }
    }

    let _ = writeln!(s, "\n[control]");
    match &r.control {
        None => {
            let _ = writeln!(s, "  not evaluated");
        }
        Some(c) => {
            let endpoint = match c.endpoint {
                Endpoint::Observation => "observation",
                Endpoint::State => "state",
            };
            let _ = writeln!(s, "  endpoint            {endpoint}");
            let _ = writeln!(s, "  curve convention    {}", c.curve.convention);
            for p in &c.per_unit_cost {
                let value = match (p.unbounded, p.bits_per_joule > 0.0) {
                    (false, _) => format!("{} bits/J", num(p.bits_per_joule)),
                    (true, true) => format!("unbounded (largest finite candidate {} bits/J)", num(p.bits_per_joule)),
                    (true, false) => "unbounded".to_string(),
                };
                let _ = writeln!(s, "  eta_C [{}]{}{value}", p.convention, pad(p.convention));
            }
            let _ = writeln!(s, "  {:>14}  {:>14}  {:>14}", "budget_J", "capacity_bits", "lambda_bits/J");
            for p in &c.curve.points {
                let _ = writeln!(
                    s,
                    "  {:>14}  {:>14}  {:>14}",
                    num(p.budget_j),
                    num(p.capacity_bits),
                    num(p.lambda_bits_per_j)
                );
            }
            for n in &c.notes {
                let _ = writeln!(s, "  note: {n}");
            }
        }
    }

    let _ = writeln!(s, "\n[mdl companion]");
    match &r.mdl_companion {
        None => {
            let _ = writeln!(s, "  not evaluated");
        }
        Some(m) => {
            let _ = writeln!(s, "  convention          {}", m.convention);
            let _ = writeln!(s, "  chosen order        {}", m.report.chosen_order);
            let _ = writeln!(s, "  L(M)                {} bits", num(m.report.l_m));
            let _ = writeln!(s, "  L(X|M)              {} bits", num(m.report.l_x_given_m));
            if let Some(e) = m.eta_e_mdl {
                let _ = writeln!(s, "  eta_E_mdl           {} bits/J [operational]", num(e));
            }
        }
    }

    let _ = writeln!(s, "\n[verdicts]");
    if r.bound_verdicts.is_empty() {
        let _ = writeln!(s, "  none");
    }
    for v in &r.bound_verdicts {
        let tag = if v.satisfied { "ok       " } else { "VIOLATION" };
        let _ = writeln!(
            s,
            "  {tag} {}: {} <= {} {} (slack {})",
            v.name,
            num(v.lhs),
            num(v.rhs),
            v.unit,
            num(v.slack)
        );
    }

    let _ = writeln!(s, "\n[checklist]");
    let violations = r.violations();
    if violations.is_empty() {
        let _ = writeln!(s, "  complete");
    }
    for v in violations {
        let _ = writeln!(s, "  VIOLATION {v}");
    }
    s
}

fn pad(c: CostConvention) -> &'static str {
    match c {
        CostConvention::Total => "         ",
        CostConvention::Incremental => "   ",
    }
}
