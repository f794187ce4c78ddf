//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::time::{Duration, Instant};

use chrono::{Days, NaiveDate};
use cryptofactor::legacy::{read_legacy_panel, write_legacy_panel};
use cryptofactor_core::factors::{day_loadings, FactorSpec};
use cryptofactor_core::index::{apply_splits, cap_index, price_index};
use cryptofactor_core::linalg::DesignMatrix;
use cryptofactor_core::regress::{annualized_tstat, cross_section_ols, run_backtest};
use cryptofactor_core::synth::{generate_panel, plant_mean_reversion};
use cryptofactor_core::universe::Exclusion;
use cryptofactor_core::{
    AssetMeta, DateAxis, Factor, FactorReturnSeries, Field, FieldMatrix, Panel, ReturnConvention, Split, SplitTable,
    SynthConfig, UniverseMask, WindowSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const NONE: &[&str] = &[];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{}; {:.2?}", o.detail, took);
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail = format!("{} exceeds {:?}", o.detail, limit);
        }
    }
    o
}

fn ols_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut solve_time, mut skipped) = (0.0f64, Duration::ZERO, 0);
    let mut done = 0;
    while done < 1000 {
        let k = rng.random_range(1..=5);
        let n = rng.random_range(k + 1..=12);
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|c| (0..n).map(|_| if c == 0 { 1.0 } else { normal(&mut rng) }).collect())
            .collect();
        let x = DesignMatrix::from_columns(&cols);
        let beta: Vec<f64> = (0..k)
            .map(|_| rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let y: Vec<f64> = x.mul_vec(&beta).iter().map(|v| v + 0.1 * normal(&mut rng)).collect();
        let Some(want) = oracle::exact_ols(&x, &y) else {
            skipped += 1;
            continue;
        };
        let start = Instant::now();
        let got = cross_section_ols(&y, &x).expect("full rank").coefficients;
        solve_time += start.elapsed();
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs() / w.abs());
        }
        done += 1;
    }
    outcome(
        worst <= 1e-10 && solve_time < Duration::from_secs(5),
        format!("max relative error {worst:.2e} over 1000 instances ({skipped} singular redrawn); solver {solve_time:.2?}"),
    )
}

fn recovery_config(n: usize, days: usize, noise: f64, seed: u64) -> SynthConfig {
    let mut c = SynthConfig::new(n, days + 21, seed);
    c.noise_sd = noise;
    c
}

fn zero_noise_recovery() -> Outcome {
    let c = recovery_config(300, 400, 0.0, 2);
    let (panel, truth) = generate_panel(&c).unwrap();
    let w = WindowSpec::new(400, 0, 400).unwrap();
    let bt = run_backtest(&panel, &w, &c.factors, ReturnConvention::OpenToClose, NONE).unwrap();
    let mut worst = 0.0f64;
    for r in &bt.regressions {
        for (a, b) in r.coefficients.iter().zip(truth.factor_returns_on(r.day).unwrap()) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        worst <= 1e-8 && bt.regressions.len() == 400 && bt.rows.len() == 300,
        format!("max |f_hat - f| = {worst:.2e} over {} days x {} factors", bt.regressions.len(), c.factors.k()),
    )
}

fn noisy_recovery() -> Outcome {
    let c = recovery_config(300, 400, 1e-3, 3);
    let (panel, truth) = generate_panel(&c).unwrap();
    let w = WindowSpec::new(400, 0, 400).unwrap();
    let bt = run_backtest(&panel, &w, &c.factors, ReturnConvention::OpenToClose, NONE).unwrap();
    let (mut inside, mut total) = (0usize, 0usize);
    for r in &bt.regressions {
        let x = &truth.loadings[r.day];
        let (n, k) = (x.rows(), x.cols());
        let rss: f64 = r.residuals.iter().map(|e| e * e).sum();
        let s2 = rss / (n - k) as f64;
        let diag = oracle::normal_inverse_diagonal(x);
        for ((a, b), d) in r.coefficients.iter().zip(truth.factor_returns_on(r.day).unwrap()).zip(diag) {
            total += 1;
            if (a - b).abs() <= 3.0 * (s2 * d).sqrt() {
                inside += 1;
            }
        }
    }
    let share = inside as f64 / total as f64;
    outcome(share >= 0.99, format!("{inside}/{total} = {:.2}% within 3 standard errors", 100.0 * share))
}

fn tstat_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = NaiveDate::from_ymd_opt(2018, 8, 18).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.random_range(2..=730);
        let mean = rng.random_range(-0.01..0.01);
        let sd = rng.random_range(1e-4..0.1);
        let values: Vec<f64> = (0..t).map(|_| mean + sd * normal(&mut rng)).collect();
        let dates = (0..t as u64).map(|d| start - Days::new(d)).collect();
        let series = FactorReturnSeries::new(vec![Factor::Cap], dates, values.iter().map(|&v| vec![v]).collect()).unwrap();
        let got = annualized_tstat(&series).unwrap().entries()[0].t;
        let want = oracle::direct_tstat(&values);
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    outcome(worst <= 1e-12, format!("max relative difference {worst:.2e} over 100 series"))
}

const WIDE_ROSTER: &str = "int,cap,mom,mom1,mom2,mom3,mom4,hlv,vol,mnbl";

fn loading_bits(panel: &Panel, spec: &FactorSpec, s: usize) -> Vec<u64> {
    let rows: Vec<usize> = (0..panel.n_assets()).collect();
    let r = ReturnConvention::OpenToClose.compute(panel, 0..panel.n_days()).unwrap();
    let x = day_loadings(panel, Some(&r), &rows, s, spec).unwrap();
    (0..x.cols()).flat_map(|k| x.column(k).to_vec()).map(f64::to_bits).collect()
}

fn out_of_sample() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut touched = 0;
    for trial in 0..50 {
        let d_v = rng.random_range(1..=20);
        let d_hlv = rng.random_range(1..=20);
        let spec = FactorSpec::parse(WIDE_ROSTER, d_v, d_hlv).unwrap();
        let c = SynthConfig::new(rng.random_range(3..20), 80, trial).with_factors(spec.clone());
        let (panel, _) = generate_panel(&c).unwrap();
        let s = rng.random_range(0..80 - 21);
        let before = loading_bits(&panel, &spec, s);
        let mut p = panel.clone();
        for _ in 0..rng.random_range(1..=30) {
            let i = rng.random_range(0..p.n_assets());
            let col = rng.random_range(0..=s);
            let f = Field::ALL[rng.random_range(0..6)];
            let v = if rng.random_range(0..4) == 0 { None } else { Some(rng.random_range(0.0..1e6)) };
            p.set(f, i, col, v).unwrap();
            touched += 1;
        }
        if loading_bits(&p, &spec, s) != before {
            return outcome(false, format!("trial {trial}: loadings at s = {s} changed"));
        }
    }
    outcome(true, format!("50 panels, {touched} cells perturbed at dates on or after s, loadings bit-identical"))
}

fn split_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = FactorSpec::parse(WIDE_ROSTER, 20, 20).unwrap();
    let c = SynthConfig::new(12, 90, 6).with_factors(spec.clone());
    let (panel, _) = generate_panel(&c).unwrap();
    let oc = ReturnConvention::OpenToClose.compute(&panel, 0..90).unwrap();
    let rows: Vec<usize> = (0..12).collect();
    let (mut worst_loading, mut worst_return, mut index_same) = (0.0f64, 0.0f64, true);
    for lambda in [0.001, 8000.0] {
        for _ in 0..20 {
            let (i, col) = (rng.random_range(0..12), rng.random_range(0..90));
            let mut p = panel.clone();
            for f in [Field::Open, Field::High, Field::Low, Field::Close] {
                p.set(f, i, col, Some(panel.get(f, i, col).unwrap() * lambda)).unwrap();
            }
            let oc2 = ReturnConvention::OpenToClose.compute(&p, 0..90).unwrap();
            for s in 0..90 {
                let (a, b) = (oc.get(i, s).unwrap().unwrap(), oc2.get(i, s).unwrap().unwrap());
                worst_return = worst_return.max((a - b).abs());
            }
            for s in 0..90 - 21 {
                let a = day_loadings(&panel, Some(&oc), &rows, s, &spec).unwrap();
                let b = day_loadings(&p, Some(&oc2), &rows, s, &spec).unwrap();
                for k in 0..a.cols() {
                    for r in 0..12 {
                        let (x, y) = (a.get(r, k), b.get(r, k));
                        worst_loading = worst_loading.max((x - y).abs() / x.abs().max(1.0));
                    }
                }
            }
            let split = SplitTable::new(vec![Split {
                slug: panel.assets()[i].slug.clone(),
                date: panel.axis().date(col).unwrap(),
                ratio: lambda,
            }])
            .unwrap();
            let mask = UniverseMask::all(12);
            let ix = cap_index(&panel, &mask, 0..90).unwrap();
            index_same &= ix == cap_index(&apply_splits(&panel, &split).unwrap(), &mask, 0..90).unwrap();
        }
    }
    outcome(
        worst_loading <= 1e-12 && worst_return <= 1e-12 && index_same,
        format!(
            "max loading change {worst_loading:.1e}, max return change {worst_return:.1e} (rounding of the scaled prices); cap index bit-identical: {index_same}"
        ),
    )
}

fn window_arithmetic() -> Outcome {
    let w = WindowSpec::new(1095, 365, 365).unwrap();
    let mut c = SynthConfig::new(25, 1130, 7);
    c.noise_sd = 0.0;
    let (panel, truth) = generate_panel(&c).unwrap();
    let bt = run_backtest(&panel, &w, &c.factors, ReturnConvention::OpenToClose, NONE).unwrap();
    let dates: Vec<NaiveDate> = bt.regressions.iter().map(|r| r.date).collect();
    let dates_ok = dates == panel.axis().dates()[365..730];
    let mut worst = 0.0f64;
    for r in &bt.regressions {
        let k = truth.dates.iter().position(|&d| d == r.date).unwrap();
        for (a, b) in r.coefficients.iter().zip(&truth.factor_returns[k]) {
            worst = worst.max((a - b).abs());
        }
    }
    let mut beyond = panel.clone();
    beyond.set(Field::Close, 3, 1116, None).unwrap();
    let untouched = run_backtest(&beyond, &w, &c.factors, ReturnConvention::OpenToClose, NONE).unwrap() == bt;
    let mut last = panel.clone();
    last.set(Field::Close, 3, 1115, None).unwrap();
    let cut = run_backtest(&last, &w, &c.factors, ReturnConvention::OpenToClose, NONE).unwrap();
    let excluded = cut.universe.reason(3) == Some(Exclusion::MissingData);
    outcome(
        bt.columns_consumed() == 1116 && dates_ok && worst <= 1e-8 && untouched && excluded,
        format!(
            "{} columns consumed, regressed {}..{} = axis[365..730]: {dates_ok}, max error {worst:.1e}, column 1116 ignored: {untouched}, column 1115 read: {excluded}",
            bt.columns_consumed(),
            dates[0],
            dates[dates.len() - 1]
        ),
    )
}

fn random_panel(rng: &mut ChaCha8Rng) -> Panel {
    let n = rng.random_range(0..8);
    let d = rng.random_range(1..40);
    let end = NaiveDate::from_ymd_opt(2018, 8, 18).unwrap();
    let mut s0 = 0u64;
    let dates: Vec<NaiveDate> = (0..d)
        .map(|_| {
            s0 += rng.random_range(1..4);
            end - Days::new(s0)
        })
        .collect();
    let assets = (0..n)
        .map(|i| {
            let slug = format!("asset-{i}-{}", rng.random_range(0..1000));
            AssetMeta::new(slug.clone(), slug, rng.random())
        })
        .collect();
    let fields = std::array::from_fn(|_| {
        let mut m = FieldMatrix::missing(n, d);
        for i in 0..n {
            for s in 0..d {
                let v = match rng.random_range(0..10) {
                    0 | 1 => None,
                    2 => Some(0.0),
                    3 => Some(f64::MIN_POSITIVE * rng.random::<f64>()),
                    _ => Some(10f64.powf(rng.random_range(-12.0..15.0)) * rng.random::<f64>()),
                };
                m.set(i, s, v);
            }
        }
        m
    });
    Panel::new(assets, DateAxis::new(dates).unwrap(), fields).unwrap()
}

fn legacy_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut missing, mut cells) = (0usize, 0usize);
    for k in 0..100 {
        let p = random_panel(&mut rng);
        for f in Field::ALL {
            for i in 0..p.n_assets() {
                for s in 0..p.n_days() {
                    cells += 1;
                    missing += usize::from(p.get(f, i, s).is_none());
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        write_legacy_panel(&p, dir.path()).unwrap();
        if read_legacy_panel(dir.path()).unwrap() != p {
            return outcome(false, format!("panel {k} changed on round trip"));
        }
    }
    outcome(true, format!("100 panels identical after write/read ({missing} of {cells} cells missing)"))
}

fn spike_fixture() -> Panel {
    // two large low-priced assets and one tiny asset priced 1000x higher
    // whose price triples mid-period
    let d = 30;
    let dates = (0..d as u64).map(|k| NaiveDate::from_ymd_opt(2018, 8, 18).unwrap() - Days::new(k)).collect();
    let assets = ["big", "mid", "tiny"].iter().map(|s| AssetMeta::new(*s, *s, false)).collect();
    let mut p = Panel::empty(assets, DateAxis::new(dates).unwrap()).unwrap();
    for s in 0..d {
        let spike = if (10..16).contains(&s) { 3.0 } else { 1.0 };
        for (i, (price, cap)) in [(1.0, 1e10), (2.0, 5e9), (1000.0 * spike, 1e5 * spike)].into_iter().enumerate() {
            for f in [Field::Open, Field::High, Field::Low, Field::Close] {
                p.set(f, i, s, Some(price)).unwrap();
            }
            p.set(Field::Cap, i, s, Some(cap)).unwrap();
            p.set(Field::Volume, i, s, Some(1e6)).unwrap();
        }
    }
    p
}

fn index_normalization() -> Outcome {
    let mut fixtures = vec![spike_fixture()];
    for seed in 0..5 {
        fixtures.push(generate_panel(&SynthConfig::new(10 + seed as usize, 60, seed)).unwrap().0);
    }
    let mut ones = true;
    for p in &fixtures {
        let mask = UniverseMask::all(p.n_assets());
        for period in [0..p.n_days(), 3..p.n_days() / 2] {
            ones &= cap_index(p, &mask, period.clone()).unwrap().values[0] == 1.0;
            ones &= price_index(p, &mask, &SplitTable::default(), period).unwrap().values[0] == 1.0;
        }
    }
    let p = &fixtures[0];
    let mask = UniverseMask::all(3);
    let dev = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max((x - 1.0).abs()));
    let cap_dev = dev(&cap_index(p, &mask, 0..30).unwrap().values);
    let price_dev = dev(&price_index(p, &mask, &SplitTable::default(), 0..30).unwrap().values);
    outcome(
        ones && cap_dev < 1e-3 && price_dev > 0.5,
        format!("first value exactly 1 on {} fixtures: {ones}; spike: cap index deviation {cap_dev:.1e}, price index deviation {price_dev:.2}", fixtures.len()),
    )
}

fn mean_reversion() -> Outcome {
    let w = WindowSpec::new(365, 0, 365).unwrap();
    let mut negative = 0;
    for seed in 0..100 {
        let c = plant_mean_reversion(&SynthConfig::new(200, 365 + 21, 1000 + seed), -0.02).unwrap();
        let (panel, _) = generate_panel(&c).unwrap();
        let bt = run_backtest(&panel, &w, &c.factors, ReturnConvention::OpenToClose, NONE).unwrap();
        if bt.report.get(Factor::Mom(0)).unwrap().t < 0.0 {
            negative += 1;
        }
    }
    outcome(negative >= 95, format!("mom t-stat negative in {negative}/100 runs"))
}

/// Name, runtime limit in seconds, check.
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("OLS oracle equivalence", Some(5), ols_oracle),
        ("planted-model recovery, zero noise", Some(10), zero_noise_recovery),
        ("planted-model recovery, noisy", Some(30), noisy_recovery),
        ("t-stat formula", None, tstat_formula),
        ("out-of-sample loadings", None, out_of_sample),
        ("split invariance", None, split_invariance),
        ("window arithmetic (1116 columns)", None, window_arithmetic),
        ("legacy round trip", None, legacy_round_trip),
        ("index normalization and spike", None, index_normalization),
        ("mean-reversion sign", Some(120), mean_reversion),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.into_iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), check);
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {}: {} ({})", k + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
