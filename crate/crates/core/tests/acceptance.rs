//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::Instant;

use walsh_recon::compression::{compress, msqe, plan_indices, plan_spectrum, CompressionMethod, CompressionPlan, SubDegreeRule};
use walsh_recon::filter::{annihilation_integral, filter_function, rank_by_chi, rolloff, NoiseSpectrum};
use walsh_recon::negligibility::{
    coefficient_bound, local_minima_negligibility, maximal_contrast_at_degree, minima_count_at_degree, minima_of_minima,
    negligibility, rank, threshold_search,
};
use walsh_recon::sensor::{run_protocol, SensorConfig, ShotMode, VisibilityModel};
use walsh_recon::stats::{coefficient_std, sensitivity, ReconstructionEnvelope};
use walsh_recon::walsh::{
    cpmg_within_order, pdd_within_order, walsh, zero_crossings, CoefficientQuadrature, FieldProfile, WalshIndex,
    WalshOrdering, WalshSpectrum, CORPUS_NAMES,
};

struct Suite {
    failures: Vec<String>,
}

impl Suite {
    fn check(&mut self, id: &str, what: &str, ok: bool, detail: String) {
        let status = if ok { "PASS" } else { "FAIL" };
        println!("[{status}] {id:<5} {what}: {detail}");
        if !ok {
            self.failures.push(id.to_string());
        }
    }

    fn rel(&mut self, id: &str, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs() / want.abs();
        self.check(id, what, err <= tol, format!("got {got:.6e}, want {want:.6e} ± {:.0}%", tol * 100.0));
    }

    fn band(&mut self, id: &str, what: &str, got: f64, lo: f64, hi: f64) {
        self.check(id, what, (lo..=hi).contains(&got), format!("got {got:.6}, want [{lo}, {hi}]"));
    }
}

fn quad() -> CoefficientQuadrature {
    CoefficientQuadrature::default()
}

fn full_plan(n: u32) -> CompressionPlan {
    plan_indices(CompressionMethod::Full { order: n })
    .unwrap()
}

fn full_msqe(f: &FieldProfile, n: u32) -> f64 {
    msqe(f, &plan_spectrum(f, &full_plan(n), &quad()).unwrap()).unwrap()
}

fn method_msqe(f: &FieldProfile, method: CompressionMethod) -> f64 {
    compress(f, method, &quad()).unwrap().msqe
}

const THRESHOLD: CompressionMethod = CompressionMethod::Threshold { p0: 6 };
const SUBDEGREE: CompressionMethod = CompressionMethod::SubDegree {
    max_degree: 5,
    rule: SubDegreeRule {
        offset: 2,
        keep_all_through: 2,
    },
};

fn criterion_1(s: &mut Suite) {
    let exp = FieldProfile::corpus("exp").unwrap();
    s.rel("1.1", "exp first-32 MSQE", full_msqe(&exp, 5), 3.518e-5, 0.02);
    s.rel("1.2", "exp threshold MSQE", method_msqe(&exp, THRESHOLD), 1.001e-4, 0.02);

    let f4 = FieldProfile::corpus("f4").unwrap();
    s.rel("1.3", "f4 first-32 MSQE", full_msqe(&f4, 5), 0.200, 0.02);
    s.band("1.4", "f4 threshold MSQE", method_msqe(&f4, THRESHOLD), 12.010, 12.020);
    s.rel("1.5", "f4 sub-degree MSQE", method_msqe(&f4, SUBDEGREE), 8.3339, 0.02);

    let sin = FieldProfile::corpus("sin").unwrap();
    s.rel("1.6", "sin first-32 MSQE", full_msqe(&sin, 5), 0.0016, 0.05);
    s.rel("1.7", "sin threshold MSQE", method_msqe(&sin, THRESHOLD), 0.0947, 0.02);
    s.rel("1.8", "sin sub-degree MSQE", method_msqe(&sin, SUBDEGREE), 0.0206, 0.02);

    for (i, name) in ["f1", "f2", "f3"].iter().enumerate() {
        let f = FieldProfile::corpus(name).unwrap();
        s.band(&format!("1.{}", 9 + i), &format!("{name} 3rd-order MSQE"), full_msqe(&f, 3), 0.024, 0.028);
    }
}

fn criterion_2(s: &mut Suite) {
    let th = threshold_search(6).indices;
    s.check("2.1", "threshold_search(6)", th == [0, 1, 2, 3, 4, 5, 8, 16], format!("{th:?}"));

    let sd: BTreeSet<u64> = plan_indices(SUBDEGREE).unwrap().selected_indices.into_iter().collect();
    let ok = sd.len() == 18 && [1, 11, 19, 21].iter().all(|m| sd.contains(m)) && [7, 13, 25, 31].iter().all(|m| !sd.contains(m));
    s.check("2.2", "sub-degree plan over order 5", ok, format!("{} indices {sd:?}", sd.len()));

    let sin = FieldProfile::corpus("sin").unwrap();
    let spec = WalshSpectrum::exact(&sin, 5, &quad()).unwrap();
    let nonzero: Vec<u64> = (0..32).filter(|&m| spec.get(m).unwrap().abs() > 1e-9).collect();
    let small_ok = (0..32).filter(|m| !nonzero.contains(m)).all(|m| spec.get(m).unwrap().abs() < 1e-9);
    let want = [1, 7, 11, 13, 19, 21, 25, 31];
    s.check("2.3", "sin nonzero Paley coefficients", nonzero == want && small_ok, format!("{nonzero:?}"));

    let p: Vec<u32> = want.iter().map(|&m| negligibility(m)).collect();
    s.check("2.4", "negligibility of that set", p == [2, 9, 10, 11, 11, 12, 13, 20], format!("{p:?}"));
}

fn criterion_3(s: &mut Suite) {
    let seq = |n: u64| (0..n).map(WalshIndex::sequency).collect::<Vec<_>>();
    let cpmg = cpmg_within_order(8, WalshOrdering::Sequency);
    let pdd = pdd_within_order(8, WalshOrdering::Sequency);
    let mut union: Vec<WalshIndex> = vec![WalshIndex::sequency(0)];
    union.extend(cpmg.iter().chain(&pdd).copied());
    let got = [
        zero_crossings(&seq(8)),
        zero_crossings(&seq(16)),
        zero_crossings(&cpmg),
        zero_crossings(&pdd),
        zero_crossings(&union),
    ];
    s.check("3", "zero-crossing counts", got == [28, 120, 254, 502, 756], format!("{got:?} want [28, 120, 254, 502, 756]"));
}

// ±1 values of w_m on the midpoints of 2^n cells, packed as bits (1 = -1)
fn sign_bits(m: u64, n: u32) -> Vec<u64> {
    let cells = 1usize << n;
    let mut bits = vec![0u64; cells.div_ceil(64)];
    for c in 0..cells {
        let t = (c as f64 + 0.5) / cells as f64;
        if walsh(WalshIndex::paley(m), t).unwrap() < 0 {
            bits[c / 64] |= 1 << (c % 64);
        }
    }
    bits
}

fn strict_min(f: impl Fn(u64) -> u32, k: u64) -> bool {
    f(k - 1) > f(k) && f(k) < f(k + 1)
}

fn criterion_4(s: &mut Suite) {
    let start = Instant::now();

    // Gram matrix through bit-packed sign vectors
    let mut ortho_ok = true;
    for n in 0..=10u32 {
        let cells = 1i64 << n;
        let rows: Vec<Vec<u64>> = (0..1u64 << n).map(|m| sign_bits(m, n)).collect();
        for i in 0..rows.len() {
            for j in i..rows.len() {
                let diff: i64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| i64::from((a ^ b).count_ones())).sum();
                let inner = cells - 2 * diff;
                ortho_ok &= inner == if i == j { cells } else { 0 };
            }
        }
    }
    s.check("4.1", "orthonormality n ≤ 10", ortho_ok, "exhaustive Gram matrices".into());

    let mut worst = 0.0f64;
    let mut violations = 0;
    for name in CORPUS_NAMES {
        let f = FieldProfile::corpus(name).unwrap();
        let spec = WalshSpectrum::exact(&f, 10, &quad()).unwrap();
        let sups: Vec<f64> = (0..=10).map(|k| f.derivative_sup(k)).collect();
        let floor = 1e-13 * sups[0].max(1.0);
        for m in 0..1u64 << 10 {
            let bound = coefficient_bound(m, f.duration(), sups[rank(m) as usize], None).unwrap();
            let c = spec.get(m).unwrap().abs();
            if c > bound + floor {
                violations += 1;
            }
            if bound > floor {
                worst = worst.max(c / bound);
            }
        }
    }
    s.check("4.2", "coefficient bound over corpus × m < 2^10", violations == 0, format!("{violations} violations, max |f̂|/bound = {worst:.3}"));

    let cap = 1u64 << 12;
    let t2_1 = (1..=cap).all(|k| strict_min(negligibility, k) == strict_min(rank, k));
    let pdd: Vec<u64> = (0..13).map(|k| 1u64 << k).collect();
    let cpmg: Vec<u64> = (1..13).map(|k| 3u64 << (k - 1)).collect();
    let t2_2 = pdd.iter().filter(|&&k| (4..=cap).contains(&k)).all(|&k| strict_min(negligibility, k))
        && cpmg.iter().filter(|&&k| (12..=cap).contains(&k)).all(|&k| strict_min(negligibility, k));
    let pdd_ext: Vec<u64> = (0..15).map(|k| 1u64 << k).collect();
    let t2_3 = (1..=cap)
        .filter(|k| !k.is_power_of_two())
        .all(|k| pdd_ext.iter().any(|&g| g > k && negligibility(g) < negligibility(k)));
    s.check(
        "4.3",
        "minima of p and r coincide; PDD/CPMG minima; PDD domination (k ≤ 2^12)",
        t2_1 && t2_2 && t2_3,
        format!("pt1 {t2_1}, pt2 {t2_2} (PDD ≥ 4, CPMG ≥ 12), pt3 {t2_3}"),
    );

    let minima = local_minima_negligibility(cap);
    let mm = minima_of_minima(cap);
    let t3 = minima.iter().copied().eq((0..=cap / 4).map(|j| 4 * j))
        && mm.iter().copied().eq((0..=cap / 16).map(|j| 16 * j))
        && (3..=12).all(|d| minima_count_at_degree(d) == 1 << (d - 3));
    s.check("4.4", "minima every 4th, minima of minima every 16th, 2^(d-3) per degree", t3, format!("{} minima", minima.len()));

    let mut cor = true;
    for d in 3..=12u32 {
        let lo = 1u64 << (d - 1);
        cor &= (lo + 1..lo << 1).all(|m| negligibility(m) > negligibility(lo));
        let cp = 3 * lo / 2;
        let below = (lo + 1..lo << 1).filter(|&m| rank(m) == 2 && negligibility(m) < negligibility(cp)).count();
        cor &= below == (d - 2) as usize;
        cor &= maximal_contrast_at_degree(d).unwrap() == (lo, cp);
    }
    s.check("4.5", "corollaries for d ≤ 12", cor, "PDD argmin, d-2 rank-2 below CPMG, PDD/CPMG max contrast".into());

    let secs = start.elapsed().as_secs_f64();
    s.check("4.6", "combinatorial suite runtime", secs < 60.0, format!("{secs:.1} s < 60 s"));
}

fn criterion_5(s: &mut Suite) {
    let start = Instant::now();
    let q = quad();

    let mut worst = 0.0f64;
    for name in CORPUS_NAMES {
        let f = FieldProfile::corpus(name).unwrap();
        let cfg = SensorConfig::new(0.2, f.duration()).unwrap();
        let plan = full_plan(5);
        let acq = run_protocol(&f, &cfg, &plan, &VisibilityModel::ideal(), 1000, 0, ShotMode::Noiseless).unwrap();
        let exact = WalshSpectrum::exact(&f, 5, &q).unwrap();
        for m in 0..32 {
            let e = exact.get(m).unwrap();
            if (cfg.phase_scale() * e).abs() < FRAC_PI_2 {
                worst = worst.max((acq.spectrum.get(m).unwrap() - e).abs());
            }
        }
    }
    s.check("5.1", "noiseless protocol reproduces exact coefficients", worst <= 1e-12, format!("max error {worst:.2e}"));

    // small field so every phase is near zero
    let shots = 10_000;
    let trials = 1000;
    let f = FieldProfile::analytic(
        1.0,
        walsh_recon::walsh::Analytic::TrigSum {
            offset: 0.0,
            terms: vec![walsh_recon::walsh::TrigTerm::cos(0.01, TAU)],
        },
    )
    .unwrap();
    let cfg = SensorConfig::default();
    let plan = full_plan(3);
    let vis = VisibilityModel::new(2.0, 1.0, 0.0).unwrap();
    let v = vis.visibility(WalshIndex::paley(0), 1.0);
    let runs: Vec<WalshSpectrum> = (0..trials)
        .map(|seed| run_protocol(&f, &cfg, &plan, &vis, shots, seed, ShotMode::Sampled).unwrap().spectrum)
        .collect();
    let predicted = coefficient_std(cfg.gamma, cfg.duration, v, shots);
    let mut worst_ratio = 1.0f64;
    for &m in &plan.selected_indices {
        let xs: Vec<f64> = runs.iter().map(|r| r.get(m).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / trials as f64;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
        let ratio = std / predicted;
        if (ratio - 1.0).abs() > (worst_ratio - 1.0).abs() {
            worst_ratio = ratio;
        }
    }
    s.check(
        "5.2",
        "Monte Carlo coefficient std vs 1/(√M γT v)",
        (worst_ratio - 1.0).abs() <= 0.2,
        format!("worst empirical/predicted = {worst_ratio:.3} (v = {v:.3})"),
    );

    let env = ReconstructionEnvelope::new(runs[0].clone(), shots, &cfg, &vis, 1.0).unwrap();
    let mut worst_env = 1.0f64;
    for i in 0..16 {
        let t = (i as f64 + 0.5) / 16.0;
        let xs: Vec<f64> = runs
            .iter()
            .map(|r| r.partial_sum(&plan.walsh_indices(), t).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / trials as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let ratio = var / env.variance();
        if (ratio - 1.0).abs() > (worst_env - 1.0).abs() {
            worst_env = ratio;
        }
    }
    s.check(
        "5.3",
        "empirical envelope variance vs Σ1/v²/(MT²γ²)",
        (worst_env - 1.0).abs() <= 0.25,
        format!("worst empirical/predicted = {worst_env:.3} at 16 times"),
    );

    let eta0: Vec<f64> = [1u64, 10, 1000, 1_000_000]
        .iter()
        .map(|&m| sensitivity(2.0, 0.3, 0.9, 0.4, m).unwrap().eta0)
        .collect();
    s.check("5.4", "η₀ independent of M", eta0.windows(2).all(|w| w[0] == w[1]), format!("{eta0:?}"));

    let secs = start.elapsed().as_secs_f64();
    s.check("5.5", "statistical suite runtime", secs < 300.0, format!("{secs:.1} s < 300 s"));
}

fn criterion_6(s: &mut Suite) {
    let zero_ok = (0..256u64).all(|m| filter_function(m, 8, 0.0).unwrap() == 0.0);
    s.check("6.1", "F_m(0) = 0 for m < 2^8", zero_ok, "exact zeros".into());

    let x = 1e-3;
    let worst = (0..256u64)
        .map(|m| (filter_function(m, 8, x).unwrap() / rolloff(m, x) - 1.0).abs())
        .fold(0.0, f64::max);
    s.check("6.2", "roll-off ratio at ωT = 1e-3", worst < 1e-3, format!("max |ratio - 1| = {worst:.2e}"));

    let worst = (0..256u64)
        .flat_map(|m| (0..rank(m)).map(move |k| annihilation_integral(m, k).abs()))
        .fold(0.0, f64::max);
    s.check("6.3", "annihilation integrals for k < r(m)", worst < 1e-12, format!("max {worst:.2e}"));

    let spectrum = NoiseSpectrum::flat(1.0, 1e-4, 0.5).unwrap();
    let mut ok = true;
    for r in 1..=4u32 {
        let same: Vec<u64> = (0..64u64).filter(|&m| rank(m) == r).collect();
        let ranked = rank_by_chi(&same, 6, 1.0, &spectrum).unwrap();
        for a in &ranked {
            for b in &ranked {
                if a.negligibility < b.negligibility {
                    ok &= a.chi > b.chi;
                }
            }
        }
    }
    s.check("6.4", "same-rank χ ordering follows negligibility", ok, "flat noise below ωT = 0.5, ranks 1..4, m < 64".into());
}

fn main() {
    let mut suite = Suite { failures: Vec::new() };
    criterion_1(&mut suite);
    criterion_2(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criterion_5(&mut suite);
    criterion_6(&mut suite);
    if suite.failures.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: {} failing: {}", suite.failures.len(), suite.failures.join(", "));
        std::process::exit(1);
    }
}
