//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid input or incomplete
//! checklist, 3 a bound was violated under `--strict`.

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::channel::{
    capacity_per_unit_cost, empowerment_curve, unroll_mdp, CostConvention, CostedChannel, EmpowermentCurve,
    Endpoint, MdpSpec,
};
use crate::epiplexity::{dpi_fuzz, learning_efficiency, summarize, EpisodeSpec, QuantizerSet};
use crate::error::{Error, Result};
use crate::mdlproxy::{
    compression_gain, eta_e_mdl, fit_scaling, marginal_bits_per_joule, parse_scaling_csv, two_part_mdl,
    ModelBudget, TokenStream,
};
use crate::probcore::FiniteDistribution;
use crate::report::{
    canonical::to_canonical_json, render_summary, validate, BaselinePolicy, CoarseGraining, ControlSection,
    EfficiencyReport, EnergyBalanceSection, EstimatorDetails, HorizonSampling, LearningSection, MdlSection,
    ReportingChecklist, TimeThroughput, Violation,
};
use crate::thermo::{corollary_check, landauer_scale, BoundVerdict, EnergyLedger};
use crate::thermosim::{lemma_grid, propagate_episode, run_register_protocol, verify_learning_inequality, BipartiteProcess, Boundary, RegisterProtocol};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "joulebits", version, about = "Bits-per-joule efficiency metrics for learning and control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for output files; without it results go to stdout only.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,

    /// Exit with status 3 when any bound is violated.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Write reports even when the checklist is incomplete.
    #[arg(long, global = true)]
    pub force: bool,

    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Bath temperature in kelvin.
    #[arg(long = "T", global = true, default_value_t = 300.0)]
    pub temperature: f64,

    /// Numerical tolerance (bits) for iterative solvers.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Checklist JSON whose sections override the automatic ones.
    #[arg(long, global = true)]
    pub checklist: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Cost-constrained empowerment curve and control efficiency.
    Empower {
        /// MDP specification to unroll.
        #[arg(long, conflicts_with = "channel", required_unless_present = "channel")]
        mdp: Option<PathBuf>,
        /// Costed channel JSON used directly.
        #[arg(long)]
        channel: Option<PathBuf>,
        /// Comma-separated, strictly increasing budgets in joules.
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<f64>,
        /// total or incremental.
        #[arg(long, default_value = "total")]
        convention: String,
        /// observation or state.
        #[arg(long, default_value = "observation")]
        endpoint: String,
    },
    /// Acquired epiplexity and learning efficiency of an episode.
    Epiplexity {
        #[arg(long)]
        spec: PathBuf,
        /// Quantizer set JSON: {"w": quantizer, "z": quantizer}.
        #[arg(long)]
        quantizers: Option<PathBuf>,
        /// Also check the data-processing bound on this many random episodes.
        #[arg(long)]
        fuzz: Option<usize>,
        /// Physical entropy change of the learner in J/K.
        #[arg(long = "dS-sys", default_value_t = 0.0)]
        ds_sys: f64,
    },
    /// Two-part and prequential code lengths of a token stream.
    Mdl {
        #[arg(long)]
        tokens: PathBuf,
        /// Comma-separated alphabet for text input.
        #[arg(long, value_delimiter = ',')]
        alphabet: Option<Vec<String>>,
        #[arg(long, default_value_t = 2)]
        max_order: usize,
        #[arg(long)]
        resolution_bits: Option<u32>,
        /// Baseline bits per token; defaults to log2 of the alphabet size.
        #[arg(long)]
        ell0: Option<f64>,
        /// Training energy in joules for the operational efficiency.
        #[arg(long)]
        e_train: Option<f64>,
    },
    /// Second-law checks on a bipartite process or a declared ledger.
    ThermoCheck {
        #[arg(long)]
        process: Option<PathBuf>,
        #[arg(long)]
        duration: Option<f64>,
        /// Start W from the stationary mixture of the process.
        #[arg(long)]
        stationary: bool,
        /// Run the 5x5x5 two-state grid.
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long)]
        delta_i: Option<f64>,
        #[arg(long = "dS-sys", default_value_t = 0.0)]
        ds_sys: f64,
    },
    /// Reversible XOR copy of a latent word into a register.
    DecoupleDemo {
        #[arg(long)]
        n: usize,
        /// open or closed.
        #[arg(long, default_value = "open")]
        boundary: String,
        /// JSON array of 2^n word probabilities; uniform when absent.
        #[arg(long)]
        z_dist: Option<PathBuf>,
    },
    /// Power-law fit of loss against compute.
    Scaling {
        /// CSV with columns C,ell_bits_per_token.
        #[arg(long)]
        points: PathBuf,
        /// Joules per compute unit.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 1)]
        n_tokens: u64,
        /// Compute values at which to report marginal bits per joule.
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
    },
    /// Validate a report or a bare checklist.
    ReportValidate { file: PathBuf },
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
}

/// Outcome of a subcommand before exit-code mapping.
struct Done {
    violations: Vec<Violation>,
    failed_bounds: Vec<String>,
}

impl Done {
    fn ok() -> Self {
        Self {
            violations: Vec::new(),
            failed_bounds: Vec::new(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut ctx = Ctx { cli: &cli, out };
    match dispatch(&mut ctx) {
        Ok(done) => {
            for v in &done.violations {
                let _ = writeln!(err, "checklist violation: {v}");
            }
            if !done.violations.is_empty() && !cli.force {
                return EXIT_INVALID;
            }
            if cli.strict && !done.failed_bounds.is_empty() {
                for b in &done.failed_bounds {
                    let _ = writeln!(err, "VIOLATION: {b}");
                }
                return EXIT_VIOLATION;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Io(_) | Error::IterationLimit { .. } => EXIT_FAILURE,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

fn at_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Json(j) => Error::Validation(format!("{}: {j}", path.display())),
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writes `contents` to `dir/name` through a temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

impl Ctx<'_> {
    fn invocation(&self) -> Value {
        serde_json::to_value(self.cli).unwrap_or(Value::Null)
    }

    fn emit(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.cli.out_dir {
            write_atomic(dir, name, contents)?;
            log::info!("wrote {}", dir.join(name).display());
        }
        Ok(())
    }

    fn checklist(&self, auto: ReportingChecklist) -> Result<ReportingChecklist> {
        match &self.cli.checklist {
            Some(p) => {
                let user: ReportingChecklist = parse_json(p)?;
                Ok(user.or(auto))
            }
            None => Ok(auto),
        }
    }

    /// Renders, writes and grades a finished report.
    fn finish_report(&mut self, mut report: EfficiencyReport, name: &str) -> Result<Done> {
        report.invocation = Some(self.invocation());
        let violations = report.violations();
        let summary = render_summary(&report);
        write!(self.out, "{summary}")?;
        if violations.is_empty() || self.cli.force {
            let json = report.to_json_checked(self.cli.force)?;
            self.emit(name, &json)?;
        }
        Ok(Done {
            violations,
            failed_bounds: report.failures(),
        })
    }
}

fn dispatch(ctx: &mut Ctx) -> Result<Done> {
    if !(ctx.cli.temperature > 0.0) || !ctx.cli.temperature.is_finite() {
        return Err(Error::Validation(format!("temperature must be positive, got {}", ctx.cli.temperature)));
    }
    if !(ctx.cli.tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {}", ctx.cli.tol)));
    }
    match &ctx.cli.command {
        Command::Empower {
            mdp,
            channel,
            budgets,
            convention,
            endpoint,
        } => empower(ctx, mdp.as_deref(), channel.as_deref(), budgets, convention, endpoint),
        Command::Epiplexity {
            spec,
            quantizers,
            fuzz,
            ds_sys,
        } => epiplexity(ctx, spec, quantizers.as_deref(), *fuzz, *ds_sys),
        Command::Mdl {
            tokens,
            alphabet,
            max_order,
            resolution_bits,
            ell0,
            e_train,
        } => mdl(ctx, tokens, alphabet.clone(), *max_order, *resolution_bits, *ell0, *e_train),
        Command::ThermoCheck {
            process,
            duration,
            stationary,
            grid,
            ledger,
            delta_i,
            ds_sys,
        } => thermo_check(ctx, process.as_deref(), *duration, *stationary, *grid, ledger.as_deref(), *delta_i, *ds_sys),
        Command::DecoupleDemo { n, boundary, z_dist } => decouple_demo(ctx, *n, boundary, z_dist.as_deref()),
        Command::Scaling {
            points,
            kappa,
            n_tokens,
            at,
        } => scaling(ctx, points, *kappa, *n_tokens, at),
        Command::ReportValidate { file } => report_validate(ctx, file),
    }
}

fn time_not_measured() -> TimeThroughput {
    TimeThroughput {
        wall_clock_s: None,
        average_power_w: None,
        bits_per_s: None,
        note: "not measured; exact offline computation".into(),
    }
}

fn parse_endpoint(s: &str) -> Result<Endpoint> {
    match s {
        "observation" => Ok(Endpoint::Observation),
        "state" => Ok(Endpoint::State),
        other => Err(Error::Validation(format!("unknown endpoint `{other}` (expected observation or state)"))),
    }
}

/// Largest violation of monotonicity and of chord concavity along a curve.
fn curve_shape_verdicts(c: &EmpowermentCurve) -> Vec<BoundVerdict> {
    let drop = c
        .points
        .windows(2)
        .map(|w| w[0].capacity_bits - w[1].capacity_bits)
        .fold(0.0f64, f64::max);
    let excess = c
        .points
        .windows(3)
        .map(|w| {
            let t = (w[1].budget_j - w[0].budget_j) / (w[2].budget_j - w[0].budget_j);
            (1.0 - t) * w[0].capacity_bits + t * w[2].capacity_bits - w[1].capacity_bits
        })
        .fold(0.0f64, f64::max);
    vec![
        BoundVerdict::check("curve nondecreasing (largest drop)", drop, 0.0, "bits", 1e-6),
        BoundVerdict::check("curve concave (largest chord excess)", excess, 0.0, "bits", 1e-6),
    ]
}

fn empower(
    ctx: &mut Ctx,
    mdp: Option<&Path>,
    channel: Option<&Path>,
    budgets: &[f64],
    convention: &str,
    endpoint: &str,
) -> Result<Done> {
    let convention: CostConvention = convention.parse()?;
    let endpoint = parse_endpoint(endpoint)?;
    let (cch, horizon, null_action) = match (mdp, channel) {
        (Some(p), _) => {
            let m: MdpSpec = parse_json(p)?;
            let cch = at_path(p, unroll_mdp(&m, endpoint, convention))?;
            (cch, Some(m.horizon), m.null_action.clone())
        }
        (None, Some(p)) => {
            let c: CostedChannel = parse_json(p)?;
            let null = c.null_input().map(|i| c.channel().inputs()[i].clone());
            (c.with_convention(convention), None, null)
        }
        (None, None) => return Err(Error::Validation("one of --mdp or --channel is required".into())),
    };
    let curve = empowerment_curve(&cch, budgets, ctx.cli.tol)?;

    let mut per_unit_cost = Vec::new();
    let mut notes = Vec::new();
    let conventions: &[CostConvention] = if cch.null_input().is_some() {
        &[CostConvention::Total, CostConvention::Incremental]
    } else {
        &[CostConvention::Total]
    };
    for &c in conventions {
        match capacity_per_unit_cost(&cch, c) {
            Ok(r) => {
                notes.extend(r.warnings.iter().map(|w| format!("{c}: {w}")));
                per_unit_cost.push(r);
            }
            Err(e @ (Error::Degenerate(_) | Error::Configuration(_))) => notes.push(format!("{c}: {e}")),
            Err(e) => return Err(e),
        }
    }
    if cch.null_input().is_none() {
        notes.push("incremental: not evaluated (no null action declared)".into());
    }

    let mut coarse = BTreeMap::new();
    let var = match endpoint {
        Endpoint::Observation => "observation",
        Endpoint::State => "state",
    };
    coarse.insert(var.to_string(), "finite alphabet, no quantizer".to_string());
    coarse.insert("action".to_string(), "finite alphabet, no quantizer".to_string());
    let auto = ReportingChecklist {
        accounting_boundary: Some(
            "agent actuators: declared per-action energies plus horizon baseline under the stated convention".into(),
        ),
        energy_balance_terms: Some(EnergyBalanceSection {
            ledger: None,
            declared_terms: "action energies are declared joules; heat, storage and output work are not modelled"
                .into(),
            negligible: Vec::new(),
        }),
        baseline_policy: Some(BaselinePolicy {
            null_action,
            baseline_energy: cch.baseline_energy(),
            convention,
        }),
        coarse_graining: Some(CoarseGraining { variables: coarse }),
        horizon_sampling: Some(HorizonSampling {
            horizon,
            episode: "open-loop action sequence from the declared initial state".into(),
            reset_protocol: "each sequence starts from the initial state".into(),
        }),
        time_throughput: Some(time_not_measured()),
        estimator_details: Some(EstimatorDetails {
            epiplexity: "not evaluated".into(),
            empowerment: format!("Blahut-Arimoto with cost multiplier bisection, gap tolerance {} bits", ctx.cli.tol),
            mdl: "not evaluated".into(),
            uncertainty: BTreeMap::new(),
        }),
    };
    let mut report = EfficiencyReport::new(ctx.checklist(auto)?);
    report.bound_verdicts = curve_shape_verdicts(&curve);
    let csv = curve.to_csv();
    report.control = Some(ControlSection {
        endpoint,
        curve,
        per_unit_cost,
        notes,
    });
    let done = ctx.finish_report(report, "empower_report.json")?;
    if done.violations.is_empty() || ctx.cli.force {
        ctx.emit("empowerment_curve.csv", &csv)?;
    }
    Ok(done)
}

fn epiplexity(ctx: &mut Ctx, spec: &Path, quantizers: Option<&Path>, fuzz: Option<usize>, ds_sys: f64) -> Result<Done> {
    let s = at_path(spec, EpisodeSpec::from_json(&read(spec)?))?;
    let q: QuantizerSet = match quantizers {
        Some(p) => parse_json(p)?,
        None => QuantizerSet::default(),
    };
    let summary = summarize(&s, &q)?;
    writeln!(ctx.out, "delta_I              {:.6e} bits", summary.delta_i_bits)?;
    writeln!(ctx.out, "I(X;Z|W_pre) bound   {:.6e} bits", summary.dpi_bound_bits)?;
    writeln!(ctx.out, "I(W_post;Z)-I(W_pre;Z) {:.6e} bits", summary.signed_change_bits)?;
    for w in &summary.warnings {
        writeln!(ctx.out, "warning: {w}")?;
    }
    let fuzz_report = match fuzz {
        Some(n) => {
            let r = dpi_fuzz(ctx.cli.seed, n)?;
            writeln!(ctx.out, "fuzz: {} cases, {} violations (seed {})", r.cases, r.violations, r.seed)?;
            Some(r)
        }
        None => None,
    };
    let mut failed = Vec::new();
    if fuzz_report.as_ref().is_some_and(|r| r.violations > 0) {
        failed.push("data-processing bound on fuzzed episodes".to_string());
    }
    let doc = json!({
        "invocation": ctx.invocation(),
        "summary": summary,
        "fuzz": fuzz_report,
    });
    ctx.emit("epiplexity.json", &to_canonical_json(&doc)?)?;

    let Some(ledger) = s.ledger else {
        writeln!(ctx.out, "no ledger declared; learning efficiency not evaluated")?;
        return Ok(Done {
            violations: Vec::new(),
            failed_bounds: failed,
        });
    };
    let record = learning_efficiency(summary.delta_i_bits, &ledger)?;
    let cor = corollary_check(summary.delta_i_bits, ds_sys, ledger.q_diss, ledger.temperature)?;
    let mut verdicts = vec![BoundVerdict::check(
        "acquired epiplexity within I(X;Z|W_pre)",
        summary.delta_i_bits,
        summary.dpi_bound_bits,
        "bits",
        1e-9,
    )];
    verdicts.push(cor.heat_bound);
    verdicts.extend(cor.closed_cycle);

    let describe = |q: &Option<crate::probcore::Quantizer>| match q {
        Some(q) => format!("uniform bins of width {} from {} ({} bins)", q.bin_width, q.origin, q.num_bins),
        None => "finite alphabet, no quantizer".to_string(),
    };
    let auto = ReportingChecklist {
        accounting_boundary: Some("learner state W and its update rule; energies as declared in the ledger".into()),
        energy_balance_terms: Some(EnergyBalanceSection {
            ledger: Some(ledger),
            declared_terms: "declared ledger".into(),
            negligible: Vec::new(),
        }),
        baseline_policy: Some(BaselinePolicy {
            null_action: None,
            baseline_energy: 0.0,
            convention: CostConvention::Total,
        }),
        coarse_graining: Some(CoarseGraining {
            variables: [("W".to_string(), describe(&q.w)), ("Z".to_string(), describe(&q.z))].into(),
        }),
        horizon_sampling: Some(HorizonSampling {
            horizon: Some(1),
            episode: "one data record per episode, drawn independently of the learner (passive)".into(),
            reset_protocol: "W_pre drawn from the declared initial distribution".into(),
        }),
        time_throughput: Some(time_not_measured()),
        estimator_details: Some(EstimatorDetails {
            epiplexity: "exact enumeration of I(W_post;Z|W_pre)".into(),
            empowerment: "not evaluated".into(),
            mdl: "not evaluated".into(),
            uncertainty: BTreeMap::new(),
        }),
    };
    let mut report = EfficiencyReport::new(ctx.checklist(auto)?);
    report.learning = Some(LearningSection {
        record,
        ds_sys,
        convention: "normative: exact I(W_post;Z|W_pre) over declared E_cons and Q_diss".into(),
    });
    report.bound_verdicts = verdicts;
    let mut done = ctx.finish_report(report, "report.json")?;
    done.failed_bounds.extend(failed);
    Ok(done)
}

#[allow(clippy::too_many_arguments)]
fn mdl(
    ctx: &mut Ctx,
    tokens: &Path,
    alphabet: Option<Vec<String>>,
    max_order: usize,
    resolution_bits: Option<u32>,
    ell0: Option<f64>,
    e_train: Option<f64>,
) -> Result<Done> {
    let text = read(tokens)?;
    let is_json = tokens.extension().is_some_and(|e| e == "json");
    let stream = at_path(
        tokens,
        if is_json {
            TokenStream::from_json(&text)
        } else {
            TokenStream::from_text(text.trim_end_matches(['\n', '\r']), alphabet)
        },
    )?;
    let budget = ModelBudget {
        max_order,
        param_resolution_bits: resolution_bits,
        notes: format!("Markov order at most {max_order}"),
    };
    let r = two_part_mdl(&stream, &budget)?;
    let n = stream.len() as u64;
    let ell0 = ell0.unwrap_or_else(|| (stream.alphabet().len() as f64).log2());
    let ell = r.total_bits / n as f64;
    let gain = compression_gain(ell0, ell, n)?;
    let eta = e_train.map(|e| eta_e_mdl(gain, e)).transpose()?;
    let prequential: Vec<f64> = (0..=max_order)
        .map(|k| crate::mdlproxy::prequential_code_length(&stream, k))
        .collect::<Result<_>>()?;

    writeln!(ctx.out, "tokens               {n}")?;
    writeln!(ctx.out, "chosen order         {}", r.chosen_order)?;
    writeln!(ctx.out, "L(M)                 {:.6e} bits", r.l_m)?;
    writeln!(ctx.out, "L(X|M)               {:.6e} bits", r.l_x_given_m)?;
    writeln!(ctx.out, "compression gain     {gain:.6e} bits")?;
    let doc = json!({
        "invocation": ctx.invocation(),
        "mdl": r,
        "prequential_bits_by_order": prequential,
        "ell0_bits_per_token": ell0,
        "gain_bits": gain,
        "eta_E_mdl_bits_per_J": eta,
    });
    ctx.emit("mdl.json", &to_canonical_json(&doc)?)?;

    let auto = ReportingChecklist {
        accounting_boundary: Some("training compute as declared by the caller".into()),
        energy_balance_terms: Some(EnergyBalanceSection {
            ledger: None,
            declared_terms: match e_train {
                Some(e) => format!("training energy {e} J declared"),
                None => "no training energy declared".into(),
            },
            negligible: Vec::new(),
        }),
        baseline_policy: Some(BaselinePolicy {
            null_action: None,
            baseline_energy: 0.0,
            convention: CostConvention::Total,
        }),
        coarse_graining: Some(CoarseGraining {
            variables: [("X".to_string(), "token alphabet as given".to_string())].into(),
        }),
        horizon_sampling: Some(HorizonSampling {
            horizon: None,
            episode: format!("one pass over {n} tokens"),
            reset_protocol: "none".into(),
        }),
        time_throughput: Some(time_not_measured()),
        estimator_details: Some(EstimatorDetails {
            epiplexity: "two-part MDL structural length".into(),
            empowerment: "not evaluated".into(),
            mdl: match resolution_bits {
                Some(b) => format!("Markov orders 0..={max_order}, {b} bits per parameter"),
                None => format!("Markov orders 0..={max_order}, (1/2) log2 N bits per parameter"),
            },
            uncertainty: BTreeMap::new(),
        }),
    };
    let mut report = EfficiencyReport::new(ctx.checklist(auto)?);
    report.mdl_companion = Some(MdlSection {
        report: r,
        gain_bits: Some(gain),
        e_train,
        eta_e_mdl: eta,
        convention: "operational: two-part code gain over the uniform baseline".into(),
    });
    ctx.finish_report(report, "report.json")
}

#[allow(clippy::too_many_arguments)]
fn thermo_check(
    ctx: &mut Ctx,
    process: Option<&Path>,
    duration: Option<f64>,
    stationary: bool,
    grid: bool,
    ledger: Option<&Path>,
    delta_i: Option<f64>,
    ds_sys: f64,
) -> Result<Done> {
    let t = ctx.cli.temperature;
    let mut verdicts: Vec<BoundVerdict> = Vec::new();
    let mut doc = serde_json::Map::new();
    doc.insert("invocation".into(), ctx.invocation());
    doc.insert("landauer".into(), serde_json::to_value(landauer_scale(t)?)?);

    if let Some(p) = process {
        let mut proc = at_path(p, BipartiteProcess::from_json(&read(p)?))?;
        if stationary {
            let mix = FiniteDistribution::new(proc.w_states().to_vec(), proc.stationary_mixture())?;
            proc = proc.with_w_init(mix)?;
        }
        let d = duration.ok_or_else(|| Error::Validation("--duration is required with --process".into()))?;
        let trace = propagate_episode(&proc, d)?;
        let check = verify_learning_inequality(&trace, proc.temperature())?;
        verdicts.push(check.entropy_budget.clone());
        verdicts.extend(check.heat_only.clone());
        doc.insert("trace".into(), serde_json::to_value(&trace)?);
    }
    if grid {
        let gaps = [0.5, 1.375, 2.25, 3.125, 4.0];
        let rates = [0.1, 0.5, 1.0, 5.0, 10.0];
        let durations = [0.01, 0.1, 0.5, 2.0, 10.0];
        let points = lemma_grid(&gaps, &rates, &durations, t, stationary)?;
        let worst = points
            .iter()
            .map(|p| p.check.entropy_budget.slack)
            .fold(f64::INFINITY, f64::min);
        let bad = points.iter().filter(|p| !p.check.satisfied()).count();
        writeln!(ctx.out, "grid: {} points, {bad} violations, smallest slack {worst:.6e} bits", points.len())?;
        for p in points.iter().filter(|p| !p.check.satisfied()) {
            verdicts.push(p.check.entropy_budget.clone());
        }
        doc.insert(
            "grid".into(),
            json!({"points": points.len(), "violations": bad, "min_slack_bits": worst}),
        );
    }
    if let Some(p) = ledger {
        let l: EnergyLedger = parse_json(p)?;
        at_path(p, l.validate())?;
        let di = delta_i.ok_or_else(|| Error::Validation("--delta-i is required with --ledger".into()))?;
        let cor = corollary_check(di, ds_sys, l.q_diss, l.temperature)?;
        let balance = crate::thermo::balance_residual(&l);
        doc.insert("balance".into(), serde_json::to_value(balance)?);
        verdicts.push(cor.heat_bound);
        verdicts.extend(cor.closed_cycle);
    }
    if process.is_none() && !grid && ledger.is_none() {
        return Err(Error::Validation("give --process, --grid or --ledger".into()));
    }
    for v in &verdicts {
        let tag = if v.satisfied { "ok       " } else { "VIOLATION" };
        writeln!(ctx.out, "{tag} {}: {:.6e} <= {:.6e} {} (slack {:.6e})", v.name, v.lhs, v.rhs, v.unit, v.slack)?;
    }
    doc.insert("bound_verdicts".into(), serde_json::to_value(&verdicts)?);
    ctx.emit("thermo_check.json", &to_canonical_json(&Value::Object(doc))?)?;
    Ok(Done {
        violations: Vec::new(),
        failed_bounds: verdicts.iter().filter(|v| !v.satisfied).map(|v| v.name.clone()).collect(),
    })
}

fn decouple_demo(ctx: &mut Ctx, n: usize, boundary: &str, z_dist: Option<&Path>) -> Result<Done> {
    let boundary: Boundary = boundary.parse()?;
    let dist = match z_dist {
        Some(p) => parse_json::<Vec<f64>>(p)?,
        None => {
            if n == 0 || n > crate::thermosim::MAX_REGISTER_BITS {
                return Err(Error::Validation(format!("register width must be 1..=16, got {n}")));
            }
            vec![1.0 / (1u64 << n) as f64; 1 << n]
        }
    };
    let r = run_register_protocol(&RegisterProtocol::new(n, dist, boundary, ctx.cli.temperature)?)?;
    writeln!(ctx.out, "ΔI = {} bits", fmt_short(r.delta_i))?;
    writeln!(ctx.out, "Q_diss = {} J", fmt_short(r.q_diss))?;
    match r.eta_tilde {
        Some(e) => writeln!(ctx.out, "η̃ = {e:.6e} bits/J")?,
        None if r.unbounded => writeln!(ctx.out, "η̃ = unbounded")?,
        None => writeln!(ctx.out, "η̃ = undefined (no information, no heat)")?,
    }
    if let Some(c) = &r.caveat {
        writeln!(ctx.out, "note: {c}")?;
    }
    let doc = json!({"invocation": ctx.invocation(), "result": r});
    ctx.emit("decouple_demo.json", &to_canonical_json(&doc)?)?;
    Ok(Done::ok())
}

/// Plain decimal for round values, scientific otherwise.
fn fmt_short(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:.6e}")
    }
}

fn scaling(ctx: &mut Ctx, points: &Path, kappa: Option<f64>, n_tokens: u64, at: &[f64]) -> Result<Done> {
    let pts = at_path(points, parse_scaling_csv(&read(points)?))?;
    let mut fit = at_path(points, fit_scaling(&pts))?;
    if let Some(k) = kappa {
        fit = fit.with_kappa(k)?;
    }
    writeln!(
        ctx.out,
        "ell_inf {:.6e}  a {:.6e}  alpha {:.6e}  rms log residual {:.3e}",
        fit.ell_inf, fit.a, fit.alpha, fit.rms_log_residual
    )?;
    if let Some(w) = &fit.warning {
        writeln!(ctx.out, "warning: {w}")?;
    }
    let mut marginal = Vec::new();
    if !at.is_empty() {
        if kappa.is_none() {
            return Err(Error::Configuration("--at needs --kappa (joules per compute unit)".into()));
        }
        for &c in at {
            let m = marginal_bits_per_joule(&fit, c, n_tokens)?;
            writeln!(ctx.out, "C = {c:.6e}: marginal {m:.6e} bits/J")?;
            marginal.push(json!({"C": c, "bits_per_J": m}));
        }
    }
    let doc = json!({"invocation": ctx.invocation(), "fit": fit, "marginal": marginal});
    ctx.emit("scaling.json", &to_canonical_json(&doc)?)?;
    Ok(Done::ok())
}

fn report_validate(ctx: &mut Ctx, file: &Path) -> Result<Done> {
    let text = read(file)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", file.display())))?;
    if value.get("schema_version").is_some() {
        let report = at_path(file, EfficiencyReport::from_json(&text))?;
        write!(ctx.out, "{}", render_summary(&report))?;
        let violations = report.violations();
        return Ok(Done {
            violations,
            failed_bounds: report.failures(),
        });
    }
    let checklist: ReportingChecklist = serde_json::from_value(value)
        .map_err(|e| Error::Validation(format!("{}: {e}", file.display())))?;
    let violations = validate(&checklist);
    if violations.is_empty() {
        writeln!(ctx.out, "checklist complete")?;
    } else {
        writeln!(ctx.out, "{} checklist violations", violations.len())?;
    }
    Ok(Done {
        violations,
        failed_bounds: Vec::new(),
    })
}

/// Caps the global worker pool from JOULEBITS_THREADS when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("JOULEBITS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
