//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the library's numerics; each quantity is
//! computed from its textbook definition on plain slices.

#![allow(dead_code)]

use rand::Rng;

pub const KB: f64 = 1.380649e-23;

pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|x| **x > 0.0).map(|x| -x * x.log2()).sum()
}

/// I(A;O) for input distribution `p` through channel rows `w`.
pub fn channel_mi(w: &[Vec<f64>], p: &[f64]) -> f64 {
    let m = w[0].len();
    let q: Vec<f64> = (0..m).map(|o| p.iter().zip(w).map(|(pa, r)| pa * r[o]).sum()).collect();
    let mut total = 0.0;
    for (pa, row) in p.iter().zip(w) {
        for (o, wo) in row.iter().enumerate() {
            if *pa > 0.0 && *wo > 0.0 {
                total += pa * wo * (wo / q[o]).log2();
            }
        }
    }
    total
}

pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).log2())
        .sum()
}

/// Best I(A;O) over the step-0.01 simplex grid for a 3-input channel,
/// optionally under E[c] ≤ budget, also scanning the budget line exactly.
pub fn grid_capacity3(w: &[Vec<f64>], cost: Option<(&[f64], f64)>) -> f64 {
    let steps = 100;
    let mut best: f64 = 0.0;
    let feasible = |p: &[f64]| match cost {
        Some((c, b)) => p.iter().zip(c).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-15,
        None => true,
    };
    for i in 0..=steps {
        for j in 0..=steps - i {
            let p = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
            if feasible(&p) {
                best = best.max(channel_mi(w, &p));
            }
        }
    }
    if let Some((c, b)) = cost {
        // the optimum sits on the budget line: scan p0 ten times finer there
        // and solve for (p1, p2)
        for i in 0..=10 * steps {
            let p0 = i as f64 / (10 * steps) as f64;
            let rest = 1.0 - p0;
            let (c1, c2) = (c[1], c[2]);
            if (c1 - c2).abs() < 1e-15 {
                continue;
            }
            let p1 = (b - p0 * c[0] - rest * c2) / (c1 - c2);
            if p1 >= 0.0 && p1 <= rest {
                best = best.max(channel_mi(w, &[p0, p1, rest - p1]));
            }
        }
    }
    best
}

/// Conditional mutual information I(A;B|C) from a dense joint given as a
/// closure over index triples.
pub fn cmi3(na: usize, nb: usize, nc: usize, p: impl Fn(usize, usize, usize) -> f64) -> f64 {
    let mut pc = vec![0.0; nc];
    let mut pac = vec![0.0; na * nc];
    let mut pbc = vec![0.0; nb * nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = p(a, b, c);
                pc[c] += v;
                pac[a * nc + c] += v;
                pbc[b * nc + c] += v;
            }
        }
    }
    let mut total = 0.0;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = p(a, b, c);
                if v > 0.0 {
                    total += v * (v * pc[c] / (pac[a * nc + c] * pbc[b * nc + c])).log2();
                }
            }
        }
    }
    total
}

/// Closed-form symmetric two-state relaxation: info flow (bits) and heat (J)
/// for uniform W_pre and X, gap in units of k_B T.
pub fn two_state_closed_form(gap_kt: f64, rate: f64, t: f64, temperature: f64) -> (f64, f64) {
    let k = rate * ((-gap_kt / 2.0).exp() + (gap_kt / 2.0).exp());
    let s = 1.0 / (1.0 + (-gap_kt).exp());
    let decay = (-k * t).exp();
    let a = s + (1.0 - s) * decay;
    let b = s * (1.0 - decay);
    let info = h2((a + 1.0 - b) / 2.0) - (h2(a) + h2(b)) / 2.0;
    let gap_j = gap_kt * KB * temperature;
    (info, gap_j * ((a + b) / 2.0 - 0.5))
}

pub fn random_simplex<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen::<f64>() + 1e-3 })
        .collect();
    if v.iter().all(|x| *x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Prequential KT code length by direct recursion on counts, order 0.
pub fn kt_order0(tokens: &[usize], alphabet: usize) -> f64 {
    let mut counts = vec![0.0; alphabet];
    let mut bits = 0.0;
    for (n, &t) in tokens.iter().enumerate() {
        bits -= ((counts[t] + 0.5) / (n as f64 + alphabet as f64 / 2.0)).log2();
        counts[t] += 1.0;
    }
    bits
}

/// A checklist with every section filled in.
pub fn full_checklist() -> joulebits::report::ReportingChecklist {
    use joulebits::channel::CostConvention;
    use joulebits::report::*;
    use std::collections::BTreeMap;
    ReportingChecklist {
        accounting_boundary: Some("register and its bath".into()),
        energy_balance_terms: Some(EnergyBalanceSection {
            ledger: None,
            declared_terms: "E_cons and Q_diss declared".into(),
            negligible: vec!["W_out".into()],
        }),
        baseline_policy: Some(BaselinePolicy {
            null_action: Some("a0".into()),
            baseline_energy: 1e-21,
            convention: CostConvention::Total,
        }),
        coarse_graining: Some(CoarseGraining {
            variables: BTreeMap::from([("W".to_string(), "identity".to_string())]),
        }),
        horizon_sampling: Some(HorizonSampling {
            horizon: Some(1),
            episode: "one update".into(),
            reset_protocol: "none".into(),
        }),
        time_throughput: Some(TimeThroughput {
            wall_clock_s: Some(1.0),
            average_power_w: None,
            bits_per_s: None,
            note: String::new(),
        }),
        estimator_details: Some(EstimatorDetails {
            epiplexity: "exact enumeration".into(),
            empowerment: "Blahut-Arimoto".into(),
            mdl: "not used".into(),
            uncertainty: BTreeMap::new(),
        }),
    }
}
