//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line; the process exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use joulebits::channel::{
    ba_capacity, capacity_per_unit_cost, cost_constrained_capacity, empowerment_curve, CostConvention,
    CostedChannel, DiscreteChannel,
};
use joulebits::epiplexity::{
    acquired_epiplexity, build_episode_joint, dpi_fuzz, learning_efficiency, random_episode, QuantizerSet,
    VAR_W_POST, VAR_W_PRE, VAR_Z,
};
use joulebits::mdlproxy::{
    fit_scaling, marginal_bits_per_joule, prequential_code_length, two_part_mdl, ModelBudget, TokenStream,
};
use joulebits::probcore::{conditional_mi, ClampPolicy, Quantizer};
use joulebits::report::{self, EfficiencyReport, LearningSection, ReportingChecklist};
use joulebits::rng::stream;
use joulebits::thermo::{landauer_scale, EnergyLedger};
use joulebits::thermosim::{lemma_grid, run_register_protocol, Boundary, RegisterProtocol};
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn landauer_constant() -> Outcome {
    let b = landauer_scale(300.0).map_err(|e| e.to_string())?;
    let oracle = 1.0 / (KB * 300.0 * std::f64::consts::LN_2);
    let rel = (b.bits_per_joule - oracle).abs() / oracle;
    ensure(rel < 5e-13, || format!("1/(k_B T ln2) = {:e}, oracle {oracle:e}", b.bits_per_joule))?;
    let headline = (b.bits_per_joule - 3.5e20).abs() / 3.5e20;
    ensure(headline <= 0.02, || format!("{:e} is {:.2}% from 3.5e20", b.bits_per_joule, headline * 100.0))?;
    Ok(format!(
        "{:.12e} bits/J at 300 K ({:.2}% from 3.5e20)",
        b.bits_per_joule,
        headline * 100.0
    ))
}

fn register_decoupling() -> Outcome {
    let t = 300.0;
    let bound = 1.0 / (KB * t * std::f64::consts::LN_2);
    let mut cases = 0;
    let mut uniform_cases = 0;
    for n in 1..=8usize {
        let size = 1usize << n;
        for i in 0..50u64 {
            let mut rng = stream(2024, (n as u64) * 1000 + i);
            let z = match i {
                0 => vec![1.0 / size as f64; size],
                1 => {
                    let mut v = vec![0.0; size];
                    v[rng.gen_range(0..size)] = 1.0;
                    v
                }
                _ => random_simplex(&mut rng, size, if i % 3 == 0 { 0.4 } else { 0.0 }),
            };
            let is_uniform = z.iter().all(|p| (p - 1.0 / size as f64).abs() < 1e-15);
            let h = shannon(&z);

            let open = run_register_protocol(&RegisterProtocol::new(n, z.clone(), Boundary::Open, t).unwrap())
                .map_err(|e| e.to_string())?;
            ensure((open.delta_i - h).abs() <= 1e-12, || {
                format!("n={n} case {i}: open ΔI {} vs H(Z) {h}", open.delta_i)
            })?;
            ensure(open.q_diss == 0.0, || format!("n={n} case {i}: open boundary charged heat"))?;
            ensure(open.unbounded == (h > 1e-12), || format!("n={n} case {i}: unbounded flag {} with H(Z) = {h}", open.unbounded))?;

            let closed = run_register_protocol(&RegisterProtocol::new(n, z, Boundary::Closed, t).unwrap())
                .map_err(|e| e.to_string())?;
            let eta = closed.eta_tilde.ok_or_else(|| format!("n={n} case {i}: closed η̃ missing"))?;
            let ratio = eta / bound;
            ensure(ratio <= 1.0 + 1e-12, || format!("n={n} case {i}: η̃/bound = {ratio}"))?;
            if is_uniform {
                uniform_cases += 1;
                ensure((ratio - 1.0).abs() <= 1e-12, || format!("n={n}: uniform word gives η̃/bound = {ratio}"))?;
            } else {
                ensure(ratio < 1.0 - 1e-12, || format!("n={n} case {i}: nonuniform word attains the bound"))?;
            }
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} words (n = 1..8), open ΔI = H(Z) with Q = 0, closed η̃ ≤ 1/(k_B T ln2), equality only for the {uniform_cases} uniform words"
    ))
}

fn two_state_lemma() -> Outcome {
    let t = 300.0;
    let gaps: Vec<f64> = (0..5).map(|i| 0.5 + 3.5 * i as f64 / 4.0).collect();
    let rates = [0.1, 0.3, 1.0, 3.0, 10.0];
    let durations = [0.01, 0.1, 0.5, 2.0, 10.0];
    let mut min_slack = f64::INFINITY;
    let mut worst_oracle: f64 = 0.0;
    for stationary in [false, true] {
        let grid = lemma_grid(&gaps, &rates, &durations, t, stationary).map_err(|e| e.to_string())?;
        ensure(grid.len() == 125, || format!("grid has {} points", grid.len()))?;
        for g in &grid {
            ensure(g.check.satisfied(), || {
                format!(
                    "violation at gap {} rate {} t {} (stationary {stationary})",
                    g.gap_kt, g.rate_scale_hz, g.duration_s
                )
            })?;
            if stationary {
                ensure(g.check.heat_only.is_some(), || "heat-only bound missing for stationary start".into())?;
            } else {
                let (info, q) = two_state_closed_form(g.gap_kt, g.rate_scale_hz, g.duration_s, t);
                let unit = KB * t * std::f64::consts::LN_2;
                worst_oracle = worst_oracle
                    .max((g.trace.info_flow_bits - info).abs())
                    .max((g.trace.q_diss - q).abs() / unit);
            }
            min_slack = min_slack.min(g.check.entropy_budget.slack);
        }
    }
    ensure(worst_oracle <= 1e-9, || format!("closed-form oracle mismatch {worst_oracle:e} bits"))?;
    Ok(format!(
        "250 grid points (uniform and stationary starts) satisfied, min slack {min_slack:.3e} bits, closed-form mismatch {worst_oracle:.1e} bits"
    ))
}

fn oracle_delta_i(env: &joulebits::epiplexity::GenerativeEnv, l: &joulebits::epiplexity::LearnerSpec) -> (f64, f64) {
    let prior = env.prior().probs();
    let obs = env.obs_model();
    let init = l.initial().probs();
    let upd = l.update();
    let (nz, nx, nw) = (prior.len(), obs[0].len(), init.len());
    let cell = |z: usize, w: usize, x: usize, w2: usize| prior[z] * obs[z][x] * init[w] * upd[w][x][w2];
    let delta = cmi3(nw, nz, nw, |w2, z, w| (0..nx).map(|x| cell(z, w, x, w2)).sum());
    let bound = cmi3(nx, nz, nw, |x, z, w| (0..nw).map(|w2| cell(z, w, x, w2)).sum());
    (delta, bound)
}

fn dpi_fuzzing() -> Outcome {
    let seed = 7;
    let report = dpi_fuzz(seed, 200).map_err(|e| e.to_string())?;
    ensure(report.violations == 0, || format!("{} DPI violations", report.violations))?;
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let mut r = stream(seed, i);
        let (env, learner) = random_episode(&mut r);
        let (d, b) = oracle_delta_i(&env, &learner);
        ensure(d <= b + 1e-12, || format!("oracle finds ΔI {d} > bound {b} in case {i}"))?;
        let j = build_episode_joint(&env, &learner).map_err(|e| e.to_string())?;
        let lib = acquired_epiplexity(&j, &QuantizerSet::default()).map_err(|e| e.to_string())?;
        worst = worst.max((lib - d).abs());
    }
    ensure(worst <= 1e-12, || format!("library ΔI differs from the oracle by {worst:e}"))?;

    for q in 0..20u64 {
        let mut r = stream(seed + 1, q);
        let (env, learner) = random_episode(&mut r);
        let j = build_episode_joint(&env, &learner).map_err(|e| e.to_string())?;
        let full = acquired_epiplexity(&j, &QuantizerSet::default()).map_err(|e| e.to_string())?;

        let width = r.gen_range(1..=3) as f64;
        let origin = -(r.gen_range(0..=2) as f64) + 0.5 * width - 0.5;
        let bins = r.gen_range(1..=3);
        let quant = Quantizer::new(width, origin, bins, ClampPolicy::ClampToEdge).unwrap();
        let qs = if q % 2 == 0 {
            QuantizerSet { w: Some(quant), z: None }
        } else {
            QuantizerSet { w: Some(quant), z: Some(quant) }
        };
        let coarse = acquired_epiplexity(&j, &qs).map_err(|e| e.to_string())?;
        ensure(coarse <= full + 1e-12, || format!("quantizer {q}: ΔI_ε {coarse} > ΔI {full}"))?;

        let nw = learner.states().len();
        let map: Vec<usize> = (0..nw).map(|_| r.gen_range(0..2)).collect();
        let labels = vec!["a".to_string(), "b".to_string()];
        let merged = j
            .table()
            .merge_axis(VAR_W_PRE, &map, labels.clone())
            .and_then(|t| t.merge_axis(VAR_W_POST, &map, labels))
            .map_err(|e| e.to_string())?;
        let merged_di = conditional_mi(&merged, VAR_W_POST, VAR_Z, VAR_W_PRE).map_err(|e| e.to_string())?;
        ensure(merged_di <= full + 1e-12, || format!("merge {q}: coarse-grained W gives {merged_di} > {full}"))?;
        let nz = env.latent().len();
        let zmap: Vec<usize> = (0..nz).map(|_| r.gen_range(0..2)).collect();
        let zmerged = j
            .table()
            .merge_axis(VAR_Z, &zmap, vec!["p".into(), "q".into()])
            .map_err(|e| e.to_string())?;
        let z_di = conditional_mi(&zmerged, VAR_W_POST, VAR_Z, VAR_W_PRE).map_err(|e| e.to_string())?;
        ensure(z_di <= full + 1e-12, || format!("merge {q}: coarse-grained Z gives {z_di} > {full}"))?;
    }
    Ok(format!(
        "200 random episodes with no violation (min slack {:.3e} bits), oracle agreement {worst:.1e}, 20 random quantizers never raise ΔI",
        report.min_slack_bits
    ))
}

fn capacity_oracles() -> Outcome {
    let tol = 1e-12;
    let cap = |m: Vec<Vec<f64>>| -> Result<f64, String> {
        let ch = DiscreteChannel::from_matrix(m).map_err(|e| e.to_string())?;
        Ok(ba_capacity(&ch, tol, 100_000).map_err(|e| e.to_string())?.capacity)
    };
    let bsc = cap(vec![vec![0.9, 0.1], vec![0.1, 0.9]])?;
    ensure((bsc - (1.0 - h2(0.1))).abs() <= 1e-6, || format!("BSC(0.1) capacity {bsc}"))?;
    let bec = cap(vec![vec![0.8, 0.2, 0.0], vec![0.0, 0.2, 0.8]])?;
    ensure((bec - 0.8).abs() <= 1e-6, || format!("BEC(0.2) capacity {bec}"))?;
    let z = cap(vec![vec![1.0, 0.0], vec![0.5, 0.5]])?;
    let z_oracle = (1.0 + 2f64.powf(-h2(0.5) / 0.5)).log2();
    ensure((z - z_oracle).abs() <= 1e-6, || format!("Z-channel capacity {z} vs {z_oracle}"))?;
    let id = cap(vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]])?;
    ensure((id - 2.0).abs() <= 1e-6, || format!("noiseless 4-ary capacity {id}"))?;

    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let mut r = stream(55, i);
        let m: Vec<Vec<f64>> = (0..3).map(|_| random_simplex(&mut r, 3, 0.15)).collect();
        let ba = cap(m.clone())?;
        let grid = grid_capacity3(&m, None);
        ensure(ba >= grid - 1e-9, || format!("channel {i}: BA {ba} below grid {grid}"))?;
        ensure(ba - grid <= 1e-3, || format!("channel {i}: BA {ba} vs grid {grid}"))?;
        worst = worst.max(ba - grid);
    }
    Ok(format!(
        "BSC {bsc:.10}, BEC {bec:.10}, Z {z:.10}, noiseless {id:.10}; 50 random 3x3 channels within {worst:.2e} of the simplex grid"
    ))
}

fn per_unit_cost() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..25u64 {
        let mut r = stream(99, i);
        let n_in = r.gen_range(3..=4);
        let n_out = 3;
        let m: Vec<Vec<f64>> = (0..n_in).map(|_| random_simplex(&mut r, n_out, 0.0)).collect();
        let null_cost = r.gen_range(0.0..0.5);
        let mut cost = vec![null_cost];
        cost.extend((1..n_in).map(|_| null_cost + r.gen_range(0.5..2.0)));
        let ch = DiscreteChannel::from_matrix(m.clone()).map_err(|e| e.to_string())?;
        let cch = CostedChannel::new(ch, cost.clone(), Some(0), 0.1, CostConvention::Incremental)
            .map_err(|e| e.to_string())?;

        let route = capacity_per_unit_cost(&cch, CostConvention::Incremental).map_err(|e| e.to_string())?;
        let formula = (1..n_in)
            .map(|a| kl(&m[a], &m[0]) / (cost[a] - null_cost))
            .fold(0.0f64, f64::max);
        let rel = (route.bits_per_joule - formula).abs() / formula;
        ensure(rel <= 1e-4, || format!("channel {i}: route {} vs formula {formula}", route.bits_per_joule))?;
        worst = worst.max(rel);

        let c_max = cost.iter().fold(0.0f64, |a, b| a.max(*b)) - null_cost;
        for conv in [CostConvention::Incremental, CostConvention::Total] {
            let costed = cch.clone().with_convention(conv);
            let eff = costed.effective_costs(conv).map_err(|e| e.to_string())?;
            let lo = eff.iter().fold(f64::INFINITY, |a, b| a.min(*b));
            let hi = lo + c_max * 1.2;
            let budgets: Vec<f64> = (0..10).map(|k| lo + (hi - lo) * k as f64 / 9.0).collect();
            let curve = empowerment_curve(&costed, &budgets, 1e-10).map_err(|e| e.to_string())?;
            ensure(curve.is_nondecreasing(1e-6), || format!("channel {i} ({conv}): curve decreases"))?;
            ensure(curve.is_concave(1e-6), || format!("channel {i} ({conv}): curve not concave"))?;
        }
    }
    Ok(format!(
        "25 channels: curve slope matches max D(W_a||W_0)/c_a within {worst:.1e} relative, 50 curves nondecreasing and concave"
    ))
}

fn mdl_examples() -> Outcome {
    let bits = |symbols: &str| -> Result<f64, String> {
        let s = TokenStream::from_text(symbols, Some(vec!["0".into(), "1".into()])).map_err(|e| e.to_string())?;
        prequential_code_length(&s, 0).map_err(|e| e.to_string())
    };
    let one = bits("0")?;
    ensure((one - 1.0).abs() <= 1e-12, || format!("KT code for \"0\" is {one}"))?;
    let two = bits("00")?;
    ensure((two - 1.415).abs() <= 1e-3, || format!("KT code for \"00\" is {two}"))?;

    let mut r = stream(4096, 0);
    let tokens: Vec<usize> = (0..4096).map(|_| r.gen_range(0..2)).collect();
    let s = TokenStream::new(vec!["H".into(), "T".into()], tokens.clone()).map_err(|e| e.to_string())?;
    let l = prequential_code_length(&s, 0).map_err(|e| e.to_string())?;
    ensure((l - kt_order0(&tokens, 2)).abs() <= 1e-8, || "prequential length disagrees with the recursion".into())?;
    ensure(l <= 4096.0 + 0.5 * 4096f64.log2() + 2.0, || format!("fair coin costs {l} bits"))?;

    for len in [64usize, 256, 1024] {
        for max_order in 1..=3 {
            let text: String = (0..len).map(|i| if i % 2 == 0 { '0' } else { '1' }).collect();
            let s = TokenStream::from_text(&text, None).map_err(|e| e.to_string())?;
            let rep = two_part_mdl(&s, &ModelBudget::new(max_order)).map_err(|e| e.to_string())?;
            ensure(rep.chosen_order == 1, || {
                format!("alternating stream of {len} picks order {} (max {max_order})", rep.chosen_order)
            })?;
        }
    }
    Ok(format!(
        "KT(\"0\") = {one:.6}, KT(\"00\") = {two:.6}, fair coin N=4096 costs {l:.2} bits, alternating streams choose order 1"
    ))
}

fn scaling_recovery() -> Outcome {
    let (ell_inf, a, alpha) = (1.0, 2.0, 0.5);
    let points: Vec<(f64, f64)> = (0..12)
        .map(|i| {
            let c = 10f64.powf(i as f64 * 0.5);
            (c, ell_inf + a * c.powf(-alpha))
        })
        .collect();
    let fit = fit_scaling(&points).map_err(|e| e.to_string())?;
    for (name, got, want) in [("ell_inf", fit.ell_inf, ell_inf), ("a", fit.a, a), ("alpha", fit.alpha, alpha)] {
        ensure((got - want).abs() <= 1e-6, || format!("{name} fitted as {got}, expected {want}"))?;
    }
    let fit = fit.with_kappa(1e-12).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
    let ys = xs
        .iter()
        .map(|x| marginal_bits_per_joule(&fit, 10f64.powf(*x), 1_000_000).map(|m| m.log10()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let target = -(alpha + 1.0);
    ensure((slope - target).abs() <= 0.02 * target.abs(), || format!("log-log slope {slope}, expected {target}"))?;
    Ok(format!(
        "fit (ell_inf, a, alpha) = ({:.8}, {:.8}, {:.8}), marginal log-log slope {slope:.6} over C in [1, 1e4]",
        fit.ell_inf, fit.a, fit.alpha
    ))
}

fn report_checklist() -> Outcome {
    let v = report::validate(&ReportingChecklist::default());
    let names: Vec<&str> = v.iter().map(|x| x.section.as_str()).collect();
    let expected = [
        report::SECTION_BOUNDARY,
        report::SECTION_ENERGY,
        report::SECTION_BASELINE,
        report::SECTION_COARSE,
        report::SECTION_HORIZON,
        report::SECTION_TIME,
        report::SECTION_ESTIMATORS,
    ];
    ensure(names == expected, || format!("empty checklist violations: {names:?}"))?;
    ensure(
        EfficiencyReport::new(ReportingChecklist::default()).to_json_checked(false).is_err(),
        || "incomplete report serialized without --force".into(),
    )?;

    let unit = KB * 300.0 * std::f64::consts::LN_2;
    let ledger = EnergyLedger::new(unit, unit, 0.0, 0.0, 0.0, 300.0).map_err(|e| e.to_string())?;
    let mut r = EfficiencyReport::new(full_checklist());
    r.learning = Some(LearningSection {
        record: learning_efficiency(2.0, &ledger).map_err(|e| e.to_string())?,
        ds_sys: 0.0,
        convention: "declared".into(),
    });
    let ch = DiscreteChannel::from_matrix(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
    let cch = CostedChannel::new(ch, vec![0.0, 1e-20], Some(0), 1e-21, CostConvention::Total).unwrap();
    r.control = Some(joulebits::report::ControlSection {
        endpoint: joulebits::channel::Endpoint::Observation,
        curve: empowerment_curve(&cch, &[2e-21, 5e-21, 1e-20], 1e-10).map_err(|e| e.to_string())?,
        per_unit_cost: vec![capacity_per_unit_cost(&cch, CostConvention::Incremental).map_err(|e| e.to_string())?],
        notes: vec![],
    });
    let _ = cost_constrained_capacity(&cch, 5e-21, 1e-10).map_err(|e| e.to_string())?;

    let first = r.to_json_checked(false).map_err(|e| e.to_string())?;
    let back = EfficiencyReport::from_json(&first).map_err(|e| e.to_string())?;
    let second = back.to_json_checked(false).map_err(|e| e.to_string())?;
    ensure(first == second, || "canonical JSON changed after a round trip".into())?;
    ensure(back == r, || "round-tripped report differs".into())?;

    let text = report::render_summary(&r);
    let flagged = text.lines().any(|l| l.contains("VIOLATION") && l.contains("landauer fraction"));
    ensure(flagged, || "ΔI = 2 bits with Q = k_B T ln2 and dS_sys = 0 was not flagged".into())?;
    ensure(!r.failures().is_empty(), || "report failures list is empty".into())?;
    Ok(format!(
        "empty checklist yields the 7 named violations, {}-byte report round-trips byte-identically, Landauer-fraction 2 rendered as VIOLATION",
        first.len()
    ))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cli_invocations() -> Vec<Vec<String>> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        s(&["empower", "--mdp", &fixture("line4.json"), "--budgets", "0.5,1,2", "--convention", "incremental"]),
        s(&["empower", "--mdp", &fixture("line4_noisy.json"), "--budgets", "2e-21,5e-21,1e-20,2e-20", "--convention", "incremental"]),
        s(&["empower", "--mdp", &fixture("line4_noisy.json"), "--budgets", "1e-21,5e-21,1e-20", "--endpoint", "state"]),
        s(&["epiplexity", "--spec", &fixture("episode.json"), "--fuzz", "25"]),
        s(&["mdl", "--tokens", &fixture("alternating.txt"), "--e-train", "1e-15"]),
        s(&["thermo-check", "--process", &fixture("process.json"), "--duration", "0.5"]),
        s(&["thermo-check", "--ledger", &fixture("ledger.json"), "--delta-i", "1"]),
        s(&["decouple-demo", "--n", "3", "--boundary", "closed"]),
        s(&["scaling", "--points", &fixture("scaling.csv"), "--kappa", "1e-12", "--at", "10,100"]),
    ]
}

fn run_all(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for (i, args) in cli_invocations().into_iter().enumerate() {
        let sub = dir.join(format!("run{i}"));
        std::fs::create_dir_all(&sub).map_err(|e| e.to_string())?;
        let o = Command::new(env!("CARGO_BIN_EXE_joulebits"))
            .arg("--out-dir")
            .arg(&sub)
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.code() != Some(0) {
            return Err(format!(
                "`{}` exited with {:?}: {}",
                args.join(" "),
                o.status.code(),
                String::from_utf8_lossy(&o.stderr)
            ));
        }
        out.insert(format!("run{i}/stdout"), o.stdout);
        let mut files: Vec<PathBuf> = std::fs::read_dir(&sub)
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(format!("`{}` wrote no files", args.join(" ")));
        }
        for f in files {
            let name = format!("run{i}/{}", f.file_name().unwrap().to_string_lossy());
            out.insert(name, std::fs::read(&f).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn cli_determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = run_all(a.path())?;
    let second = run_all(b.path())?;
    ensure(first.keys().eq(second.keys()), || "the two runs wrote different file sets".into())?;
    for (k, v) in &first {
        ensure(second[k] == *v, || format!("{k} differs between runs"))?;
    }
    let files = first.keys().filter(|k| !k.ends_with("stdout")).count();
    Ok(format!(
        "{} invocations, {files} output files and all stdout byte-identical across two runs",
        cli_invocations().len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("landauer constant", landauer_constant),
        ("register decoupling", register_decoupling),
        ("two-state learning lemma", two_state_lemma),
        ("data-processing fuzz", dpi_fuzzing),
        ("channel capacity oracles", capacity_oracles),
        ("capacity per unit cost", per_unit_cost),
        ("KT and two-part MDL", mdl_examples),
        ("scaling-law recovery", scaling_recovery),
        ("reporting checklist", report_checklist),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
