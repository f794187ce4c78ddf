//! Synthetic panels with a planted factor model.
//!
//! The generator runs the cross-sectional model forward: it draws raw daily
//! caps, high-low spreads and volumes, derives the loadings they imply, draws
//! the true factor returns, forms `R = β f + ε` from the oldest model day to
//! the newest (so momentum loadings see the returns already generated), and
//! finally integrates prices backward from a base close with
//! `open_s = close_s · e^{-R_s}` and `close_{s+1} = open_s`. Because there is
//! no overnight gap, open-to-close and close-to-close returns coincide.
//!
//! All randomness comes from one `ChaCha8Rng` stream seeded with
//! [`SynthConfig::seed`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::factors::{Factor, FactorSpec};
use crate::linalg::DesignMatrix;
use crate::math;
use crate::panel::{AssetMeta, DateAxis, FieldMatrix, Panel};
use crate::{Error, Result};

/// Identifier of the pseudo-random generator, recorded in [`GroundTruth`].
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

/// How the true daily return of one factor is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorPlant {
    /// i.i.d. normal draws.
    Drawn { mean: f64, sd: f64 },
    /// Given values for model days `0..model_days`, most recent first.
    Series(Vec<f64>),
}

/// Log-normal generator `ln x_is = log_mean + cross_sd · a_i + daily_sd · e_is`
/// with standard normal `a_i` per asset and `e_is` per asset-day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormal {
    pub log_mean: f64,
    pub cross_sd: f64,
    pub daily_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_assets: usize,
    pub n_days: usize,
    pub seed: u64,
    /// Most recent date of the panel.
    pub end_date: NaiveDate,
    /// Planted roster with the hlv and vol averaging windows.
    pub factors: FactorSpec,
    /// One plant per roster factor, in roster order.
    pub plants: Vec<FactorPlant>,
    pub noise_sd: f64,
    pub minable_fraction: f64,
    /// Median close on the most recent day; per-asset levels vary around it.
    pub base_close: f64,
    pub cap: LogNormal,
    /// Daily `(high - low) / close`; must stay below 2 to keep lows positive.
    pub spread: LogNormal,
    pub volume: LogNormal,
    /// Sd of the returns on days too old for every loading to exist.
    pub warmup_return_sd: f64,
}

impl SynthConfig {
    /// Defaults for the five-factor roster with 20-day windows.
    pub fn new(n_assets: usize, n_days: usize, seed: u64) -> Self {
        let factors = FactorSpec::new(Factor::DEFAULT_ROSTER.to_vec(), 20, 20)
            .expect("default roster is valid");
        let plants = factors.roster().iter().map(|&f| default_plant(f)).collect();
        Self {
            n_assets,
            n_days,
            seed,
            end_date: NaiveDate::from_ymd_opt(2018, 8, 18).expect("valid date"),
            factors,
            plants,
            noise_sd: 0.02,
            minable_fraction: 0.5,
            base_close: 1.0,
            cap: LogNormal {
                log_mean: 17.0,
                cross_sd: 2.0,
                daily_sd: 0.1,
            },
            spread: LogNormal {
                log_mean: -3.0,
                cross_sd: 0.5,
                daily_sd: 0.3,
            },
            volume: LogNormal {
                log_mean: 13.0,
                cross_sd: 1.5,
                daily_sd: 0.5,
            },
            warmup_return_sd: 0.03,
        }
    }

    /// Replaces the roster; plants reset to their defaults.
    pub fn with_factors(mut self, factors: FactorSpec) -> Self {
        self.plants = factors.roster().iter().map(|&f| default_plant(f)).collect();
        self.factors = factors;
        self
    }

    pub fn plant(&self, factor: Factor) -> Option<&FactorPlant> {
        let k = self.factors.roster().iter().position(|&f| f == factor)?;
        self.plants.get(k)
    }

    pub fn set_plant(&mut self, factor: Factor, plant: FactorPlant) -> Result<()> {
        let k = self
            .factors
            .roster()
            .iter()
            .position(|&f| f == factor)
            .ok_or_else(|| Error::Argument(format!("factor `{factor}` is not in the roster")))?;
        self.plants[k] = plant;
        Ok(())
    }

    /// Oldest days lacking the history some loading needs.
    pub fn warmup_days(&self) -> usize {
        let mom = self.factors.max_mom_lag().map_or(1, |k| k as usize + 2);
        mom.max(self.factors.d_hlv).max(self.factors.d_v).max(1)
    }

    /// Days `0..model_days` follow the planted model exactly.
    pub fn model_days(&self) -> usize {
        self.n_days.saturating_sub(self.warmup_days())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::Infeasible(m));
        if self.n_assets == 0 {
            return bad("n_assets must be positive".into());
        }
        if self.model_days() == 0 {
            return bad(format!(
                "n_days = {} leaves no model days after {} warmup days",
                self.n_days,
                self.warmup_days()
            ));
        }
        if self.plants.len() != self.factors.k() {
            return bad(format!(
                "{} plants for {} factors",
                self.plants.len(),
                self.factors.k()
            ));
        }
        for (f, p) in self.factors.roster().iter().zip(&self.plants) {
            match p {
                FactorPlant::Drawn { mean, sd } if !(mean.is_finite() && *sd >= 0.0 && sd.is_finite()) => {
                    return bad(format!("plant for `{f}` needs finite mean and sd >= 0"));
                }
                FactorPlant::Series(v) if v.len() != self.model_days() => {
                    return bad(format!(
                        "series for `{f}` has {} values, model has {} days",
                        v.len(),
                        self.model_days()
                    ));
                }
                _ => {}
            }
        }
        let sds = [
            self.noise_sd,
            self.warmup_return_sd,
            self.cap.cross_sd,
            self.cap.daily_sd,
            self.spread.cross_sd,
            self.spread.daily_sd,
            self.volume.cross_sd,
            self.volume.daily_sd,
        ];
        if sds.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("standard deviations must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.minable_fraction) {
            return bad("minable_fraction must lie in [0, 1]".into());
        }
        if !(self.base_close.is_finite() && self.base_close > 0.0) {
            return bad("base_close must be positive".into());
        }
        Ok(())
    }
}

fn default_plant(f: Factor) -> FactorPlant {
    let (mean, sd) = match f {
        Factor::Int => (0.0, 0.01),
        Factor::Cap => (0.0, 0.001),
        Factor::Mom(0) => (-0.05, 0.1),
        Factor::Mom(_) => (0.0, 0.05),
        Factor::Hlv => (0.0, 0.005),
        Factor::Vol => (0.0, 0.002),
        Factor::Mnbl => (0.0, 0.005),
    };
    FactorPlant::Drawn { mean, sd }
}

/// Copy of `config` whose `mom` factor returns have mean `strength`
/// (negative for mean reversion); the plant's sd is kept.
pub fn plant_mean_reversion(config: &SynthConfig, strength: f64) -> Result<SynthConfig> {
    let sd = match config.plant(Factor::Mom(0)) {
        Some(FactorPlant::Drawn { sd, .. }) => *sd,
        Some(FactorPlant::Series(v)) => sample_sd(v),
        None => return Err(Error::Argument("roster has no `mom` factor".into())),
    };
    let mut out = config.clone();
    out.set_plant(Factor::Mom(0), FactorPlant::Drawn { mean: strength, sd })?;
    Ok(out)
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    math::sqrt(v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64)
}

/// What the generator planted, for model days `0..model_days` (most recent
/// first).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub rng: &'static str,
    pub factors: Vec<Factor>,
    pub dates: Vec<NaiveDate>,
    /// `factor_returns[s][k]`.
    pub factor_returns: Vec<Vec<f64>>,
    /// Loadings of every asset on each model day.
    pub loadings: Vec<DesignMatrix>,
    /// `noise[s][i]`, the residual added on day `s`.
    pub noise: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn model_days(&self) -> usize {
        self.dates.len()
    }

    /// Planted factor returns on panel column `s`, when `s` is a model day.
    pub fn factor_returns_on(&self, s: usize) -> Option<&[f64]> {
        self.factor_returns.get(s).map(Vec::as_slice)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws a panel satisfying the planted model; identical configs give
/// bit-identical output.
pub fn generate_panel(config: &SynthConfig) -> Result<(Panel, GroundTruth)> {
    config.validate()?;
    let (n, d, t) = (config.n_assets, config.n_days, config.model_days());
    let roster = config.factors.roster();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // per-asset levels
    let mut minable = Vec::with_capacity(n);
    let mut levels = Vec::with_capacity(n);
    for _ in 0..n {
        minable.push(rng.random::<f64>() < config.minable_fraction);
        let close = math::ln(config.base_close) + normal(&mut rng);
        let cap = config.cap.log_mean + config.cap.cross_sd * normal(&mut rng);
        let spread = config.spread.log_mean + config.spread.cross_sd * normal(&mut rng);
        let volume = config.volume.log_mean + config.volume.cross_sd * normal(&mut rng);
        levels.push([close, cap, spread, volume]);
    }

    // raw daily draws: ln cap, spread (H - L) / C, ln volume
    let mut log_cap = vec![vec![0.0; d]; n];
    let mut spread = vec![vec![0.0; d]; n];
    let mut log_vol = vec![vec![0.0; d]; n];
    for i in 0..n {
        for s in 0..d {
            log_cap[i][s] = levels[i][1] + config.cap.daily_sd * normal(&mut rng);
            spread[i][s] = math::exp(levels[i][2] + config.spread.daily_sd * normal(&mut rng));
            log_vol[i][s] = levels[i][3] + config.volume.daily_sd * normal(&mut rng);
            if spread[i][s] >= 2.0 {
                return Err(Error::Infeasible(format!(
                    "drawn high-low spread {} would make the low price non-positive",
                    spread[i][s]
                )));
            }
        }
    }

    // true factor returns
    let mut factor_returns = vec![vec![0.0; roster.len()]; t];
    for (s, row) in factor_returns.iter_mut().enumerate() {
        for (k, plant) in config.plants.iter().enumerate() {
            row[k] = match plant {
                FactorPlant::Drawn { mean, sd } => mean + sd * normal(&mut rng),
                FactorPlant::Series(v) => v[s],
            };
        }
    }

    // returns, oldest first so lagged returns exist when a day needs them
    let mut returns = vec![vec![0.0; d]; n];
    for row in returns.iter_mut() {
        for r in row[t..].iter_mut() {
            *r = config.warmup_return_sd * normal(&mut rng);
        }
    }
    let (d_hlv, d_v) = (config.factors.d_hlv, config.factors.d_v);
    let mut loadings = vec![DesignMatrix::zeros(0, 0); t];
    let mut noise = vec![vec![0.0; n]; t];
    for s in (0..t).rev() {
        let columns: Vec<Vec<f64>> = roster
            .iter()
            .map(|&f| {
                (0..n)
                    .map(|i| match f {
                        Factor::Int => 1.0,
                        Factor::Cap => log_cap[i][s + 1],
                        Factor::Mom(k) => returns[i][s + 1 + k as usize],
                        Factor::Hlv => {
                            let u = (1..=d_hlv).map(|r| spread[i][s + r] * spread[i][s + r]).sum::<f64>();
                            0.5 * math::ln(u / d_hlv as f64)
                        }
                        Factor::Vol => {
                            let v = (1..=d_v).map(|r| math::exp(log_vol[i][s + r])).sum::<f64>();
                            math::ln(v / d_v as f64)
                        }
                        Factor::Mnbl => f64::from(u8::from(minable[i])),
                    })
                    .collect()
            })
            .collect();
        let x = DesignMatrix::from_columns(&columns);
        let fitted = x.mul_vec(&factor_returns[s]);
        for i in 0..n {
            let e = config.noise_sd * normal(&mut rng);
            noise[s][i] = e;
            returns[i][s] = fitted[i] + e;
        }
        loadings[s] = x;
    }

    // prices
    let mut fields: [FieldMatrix; 6] = core::array::from_fn(|_| FieldMatrix::missing(n, d));
    for i in 0..n {
        let mut close = math::exp(levels[i][0]);
        for s in 0..d {
            let open = close * math::exp(-returns[i][s]);
            let h = spread[i][s];
            let values = [
                open,
                close * (1.0 + 0.5 * h),
                close * (1.0 - 0.5 * h),
                close,
                math::exp(log_vol[i][s]),
                math::exp(log_cap[i][s]),
            ];
            if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::Infeasible(format!(
                    "asset {i} on day {s} produced non-positive or non-finite value {v}"
                )));
            }
            for (m, v) in fields.iter_mut().zip(values) {
                m.set(i, s, Some(v));
            }
            close = open;
        }
    }

    let dates: Vec<NaiveDate> = (0..d)
        .map(|s| {
            config
                .end_date
                .checked_sub_days(Days::new(s as u64))
                .ok_or_else(|| Error::Infeasible("date axis underflows the calendar".into()))
        })
        .collect::<Result<_>>()?;
    let assets = (0..n)
        .map(|i| {
            let slug = format!("syn{i:04}");
            AssetMeta::new(slug.clone(), slug, minable[i])
        })
        .collect();
    let panel = Panel::new(assets, DateAxis::new(dates.clone())?, fields)?;
    let truth = GroundTruth {
        rng: RNG_ALGORITHM,
        factors: roster.to_vec(),
        dates: dates[..t].to_vec(),
        factor_returns,
        loadings,
        noise,
    };
    Ok((panel, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::day_loadings;
    use crate::panel::{Field, ReturnConvention};

    #[test]
    fn deterministic_per_seed() {
        let c = SynthConfig::new(20, 60, 1);
        let (p1, t1) = generate_panel(&c).unwrap();
        let (p2, t2) = generate_panel(&c).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(t1, t2);
        let (p3, _) = generate_panel(&SynthConfig::new(20, 60, 2)).unwrap();
        assert_ne!(p1, p3);
    }

    #[test]
    fn all_values_positive() {
        let (p, _) = generate_panel(&SynthConfig::new(15, 80, 7)).unwrap();
        for f in Field::ALL {
            for i in 0..15 {
                assert!(p.field(f).row(i).all(|v| v.is_some_and(|v| v > 0.0)));
            }
        }
    }

    #[test]
    fn loadings_round_trip_through_the_panel() {
        let mut c = SynthConfig::new(12, 70, 3).with_factors(
            FactorSpec::parse("int,cap,mom,mom1,mom4,hlv,vol,mnbl", 7, 5).unwrap(),
        );
        c.noise_sd = 0.0;
        let (p, truth) = generate_panel(&c).unwrap();
        assert_eq!(truth.model_days(), 70 - 7);
        let rows: Vec<usize> = (0..12).collect();
        let oc = ReturnConvention::OpenToClose.compute(&p, 0..70).unwrap();
        for s in 0..truth.model_days() {
            let x = day_loadings(&p, Some(&oc), &rows, s, &c.factors).unwrap();
            let want = &truth.loadings[s];
            for k in 0..x.cols() {
                for i in 0..12 {
                    let (a, b) = (x.get(i, k), want.get(i, k));
                    assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "s {s} k {k} i {i}: {a} vs {b}");
                }
            }
        }
        let cc = ReturnConvention::CloseToClose.compute(&p, 0..69).unwrap();
        for s in 0..69 {
            let (a, b) = (cc.get(3, s).unwrap().unwrap(), oc.get(3, s).unwrap().unwrap());
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_configs() {
        assert!(generate_panel(&SynthConfig::new(0, 60, 1)).is_err());
        assert!(generate_panel(&SynthConfig::new(5, 20, 1)).is_err());
        let mut c = SynthConfig::new(5, 60, 1);
        c.spread.log_mean = 1.0;
        assert!(matches!(generate_panel(&c), Err(Error::Infeasible(_))));
        let mut c = SynthConfig::new(5, 60, 1);
        c.set_plant(Factor::Cap, FactorPlant::Series(vec![0.0; 3])).unwrap();
        assert!(generate_panel(&c).is_err());
    }

    #[test]
    fn series_plants_are_used_verbatim() {
        let mut c = SynthConfig::new(5, 40, 9);
        let m = c.model_days();
        let v: Vec<f64> = (0..m).map(|s| s as f64 * 1e-4).collect();
        c.set_plant(Factor::Vol, FactorPlant::Series(v.clone())).unwrap();
        let (_, truth) = generate_panel(&c).unwrap();
        let k = c.factors.roster().iter().position(|&f| f == Factor::Vol).unwrap();
        assert!(truth.factor_returns.iter().zip(&v).all(|(r, x)| r[k] == *x));
    }

    #[test]
    fn mean_reversion_plant() {
        let c = SynthConfig::new(5, 40, 9);
        let m = plant_mean_reversion(&c, -0.02).unwrap();
        assert_eq!(m.plant(Factor::Mom(0)), Some(&FactorPlant::Drawn { mean: -0.02, sd: 0.1 }));
        let no_mom = c.clone().with_factors(FactorSpec::parse("int,cap", 20, 20).unwrap());
        assert!(plant_mean_reversion(&no_mom, -0.02).is_err());
    }
}
