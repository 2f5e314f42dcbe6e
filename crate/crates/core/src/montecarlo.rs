//! Trial engine: runs schemes over independent fading draws and aggregates
//! average secrecy rates with 95% confidence intervals.
//!
//! Trial `i` draws from its own ChaCha stream `(seed, i)`, so results depend
//! only on the configuration and never on scheduling. Partial statistics are
//! merged in trial-index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::sample_realization;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{
    keyword_enum, make_pathloss, sample_user_positions, DiscLayout, LogBase, NetworkGeometry, PathlossSet, SystemParams,
};
use crate::schemes::{run_trial, Scheme, TrialOutcome};

const CHUNK: u64 = 1024;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometryMode {
    /// Every user at its disc center.
    Fixed,
    /// Users redrawn uniformly in their discs on every trial.
    #[default]
    RandomDisc,
}

keyword_enum!(GeometryMode { Fixed => "fixed", RandomDisc => "random" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Mean of the per-trial clipped secrecy rate.
    #[default]
    MeanPositiveRate,
    /// `max(0, mean(ln(1+γ_legit)) − mean(ln(1+γ_eve)))` per signal.
    JensenBound,
}

keyword_enum!(Estimator {
    MeanPositiveRate => "mean_positive_rate",
    JensenBound => "jensen_bound",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    RateS1,
    RateS2,
    Sum,
}

keyword_enum!(Quantity { RateS1 => "rate_s1", RateS2 => "rate_s2", Sum => "sum" });

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::RateS1, Quantity::RateS2, Quantity::Sum];
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub params: SystemParams,
    pub layout: DiscLayout,
    pub geometry_mode: GeometryMode,
    pub trials: u64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub estimator: Estimator,
    /// Worker threads; 0 means all cores.
    pub workers: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            params: SystemParams::default(),
            layout: DiscLayout::default(),
            geometry_mode: GeometryMode::default(),
            trials: 10_000,
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            estimator: Estimator::default(),
            workers: 0,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidParam {
                name: "trials",
                reason: "must be at least 1".into(),
            });
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParam {
                name: "schemes",
                reason: "at least one scheme is required".into(),
            });
        }
        Ok(())
    }

    /// Center geometry for the configured layout.
    pub fn fixed_geometry(&self) -> NetworkGeometry {
        NetworkGeometry::fixed(&self.layout, self.params.pairs)
    }

    fn unique_schemes(&self) -> Vec<Scheme> {
        let mut out: Vec<Scheme> = Vec::with_capacity(self.schemes.len());
        for &s in &self.schemes {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsrEstimate {
    pub scheme: Scheme,
    pub quantity: Quantity,
    pub estimator: Estimator,
    pub mean: f64,
    pub ci95_halfwidth: f64,
    pub trials: u64,
    pub log_base: LogBase,
}

/// Per-scheme side statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeDiagnostics {
    pub scheme: Scheme,
    /// How often each pair index was served.
    pub schedule_counts: Vec<u64>,
    /// Fraction of trials with `γ_a > γ_e1`.
    pub secure_s1_fraction: f64,
    /// Fraction of trials in which Eve could decode s₁ first.
    pub eve_decoded_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub estimates: Vec<AsrEstimate>,
    pub diagnostics: Vec<SchemeDiagnostics>,
}

impl CampaignReport {
    pub fn estimate(&self, scheme: Scheme, quantity: Quantity) -> Option<&AsrEstimate> {
        self.estimates
            .iter()
            .find(|e| e.scheme == scheme && e.quantity == quantity)
    }

    pub fn diagnostics(&self, scheme: Scheme) -> Option<&SchemeDiagnostics> {
        self.diagnostics.iter().find(|d| d.scheme == scheme)
    }
}

/// Running mean and second central moment with pairwise merging.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Sample standard deviation; 0 for fewer than two samples.
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }

    pub fn ci95_halfwidth(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            Z95 * self.std_dev() / (self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Default)]
struct SchemeAccumulator {
    rate: [Moments; 3],
    gap: [Moments; 3],
    schedule_counts: Vec<u64>,
    secure_s1: u64,
    eve_decoded: u64,
}

impl SchemeAccumulator {
    fn new(pairs: usize) -> Self {
        SchemeAccumulator {
            schedule_counts: vec![0; pairs],
            ..Default::default()
        }
    }

    fn push(&mut self, o: &TrialOutcome) {
        let (g1, g2) = (o.log_gap_s1(), o.log_gap_s2());
        for (m, v) in self.rate.iter_mut().zip([o.rate_s1, o.rate_s2, o.sum_rate()]) {
            m.push(v);
        }
        for (m, v) in self.gap.iter_mut().zip([g1, g2, g1 + g2]) {
            m.push(v);
        }
        self.schedule_counts[o.scheduled] += 1;
        self.secure_s1 += u64::from(o.gamma_a > o.gamma_e1);
        self.eve_decoded += u64::from(o.eve_decoded_s1);
    }

    fn merge(&mut self, other: &SchemeAccumulator) {
        for (a, b) in self.rate.iter_mut().zip(&other.rate) {
            a.merge(b);
        }
        for (a, b) in self.gap.iter_mut().zip(&other.gap) {
            a.merge(b);
        }
        for (a, b) in self.schedule_counts.iter_mut().zip(&other.schedule_counts) {
            *a += b;
        }
        self.secure_s1 += other.secure_s1;
        self.eve_decoded += other.eve_decoded;
    }
}

/// Independent random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs every configured scheme on trial `index`. All schemes share the
/// same geometry and fading draw.
pub fn simulate_trial(config: &CampaignConfig, fixed: Option<&PathlossSet>, index: u64) -> Result<Vec<TrialOutcome>> {
    let p = &config.params;
    let mut rng = trial_rng(config.seed, index);
    let sampled;
    let pathloss = match fixed {
        Some(pl) => pl,
        None => {
            let geom = sample_user_positions(&mut rng, p.pairs, &config.layout)?;
            sampled = make_pathloss(&geom, p)?;
            &sampled
        }
    };
    let realization = sample_realization(&mut rng, p.elements, p.pairs, p.rli_mode, p.rli_w());
    let relay_pair = rng.random_range(0..p.pairs);
    config
        .unique_schemes()
        .into_iter()
        .map(|s| run_trial(s, &realization, pathloss, p, relay_pair))
        .collect()
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate()?;
    let schemes = config.unique_schemes();
    let fixed = match config.geometry_mode {
        GeometryMode::Fixed => Some(make_pathloss(&config.fixed_geometry(), &config.params)?),
        GeometryMode::RandomDisc => None,
    };
    let pairs = config.params.pairs;
    let chunks =
        Executor::new(config.workers).map_chunks(config.trials, CHUNK, |range| -> Result<Vec<SchemeAccumulator>> {
            let mut acc = vec![SchemeAccumulator::new(pairs); schemes.len()];
            for i in range {
                for (a, o) in acc.iter_mut().zip(simulate_trial(config, fixed.as_ref(), i)?) {
                    a.push(&o);
                }
            }
            Ok(acc)
        })?;

    let mut total = vec![SchemeAccumulator::new(pairs); schemes.len()];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(chunk?) {
            t.merge(&c);
        }
    }

    let unit = config.params.log_base.from_nats();
    let trials = config.trials;
    let mut estimates = Vec::with_capacity(3 * schemes.len());
    let mut diagnostics = Vec::with_capacity(schemes.len());
    for (&scheme, acc) in schemes.iter().zip(&total) {
        let clipped = [acc.gap[0].mean.max(0.0), acc.gap[1].mean.max(0.0)];
        for (qi, quantity) in Quantity::ALL.into_iter().enumerate() {
            let (mean, ci) = match config.estimator {
                Estimator::MeanPositiveRate => (acc.rate[qi].mean, acc.rate[qi].ci95_halfwidth()),
                Estimator::JensenBound => {
                    let mean = if qi == 2 { clipped[0] + clipped[1] } else { clipped[qi] };
                    (mean, acc.gap[qi].ci95_halfwidth())
                }
            };
            estimates.push(AsrEstimate {
                scheme,
                quantity,
                estimator: config.estimator,
                mean: mean * unit,
                ci95_halfwidth: ci * unit,
                trials,
                log_base: config.params.log_base,
            });
        }
        diagnostics.push(SchemeDiagnostics {
            scheme,
            schedule_counts: acc.schedule_counts.clone(),
            secure_s1_fraction: acc.secure_s1 as f64 / trials as f64,
            eve_decoded_fraction: acc.eve_decoded as f64 / trials as f64,
        });
    }
    Ok(CampaignReport { estimates, diagnostics })
}

/// Right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Value just left of `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.sorted.len() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Sample quantile by the nearest-rank rule.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[rank - 1]
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::Contract("empirical CDF of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Contract("empirical CDF of a sample containing NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

/// Kolmogorov–Smirnov distance over the sample points.
pub fn ks_distance<F: Fn(f64) -> f64>(emp: &EmpiricalCdf, analytic: F) -> f64 {
    ks_distance_at(emp, analytic, &emp.sorted)
}

/// Supremum of `|F_emp − F|` over `points` and their left limits. The left
/// limit of `F` is taken one ulp below, which is exact for step functions.
pub fn ks_distance_at<F: Fn(f64) -> f64>(emp: &EmpiricalCdf, analytic: F, points: &[f64]) -> f64 {
    points.iter().fold(0.0, |d: f64, &x| {
        d.max((emp.eval(x) - analytic(x)).abs())
            .max((emp.eval_left(x) - analytic(x.next_down())).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small(trials: u64) -> CampaignConfig {
        CampaignConfig {
            params: SystemParams {
                elements: 8,
                pairs: 3,
                ..SystemParams::default()
            },
            trials,
            seed: 9,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn single_trial_estimate() {
        let cfg = CampaignConfig {
            schemes: vec![Scheme::Proposed],
            geometry_mode: GeometryMode::Fixed,
            ..small(1)
        };
        let r = run_campaign(&cfg).unwrap();
        let fixed = make_pathloss(&cfg.fixed_geometry(), &cfg.params).unwrap();
        let o = simulate_trial(&cfg, Some(&fixed), 0).unwrap()[0];
        let e = r.estimate(Scheme::Proposed, Quantity::RateS1).unwrap();
        assert_eq!(e.mean, o.rate_s1);
        assert_eq!(e.ci95_halfwidth, 0.0);
        assert_eq!(r.estimate(Scheme::Proposed, Quantity::Sum).unwrap().mean, o.sum_rate());
    }

    #[test]
    fn deterministic_across_workers() {
        let base = small(3000);
        let a = run_campaign(&CampaignConfig {
            workers: 1,
            ..base.clone()
        })
        .unwrap();
        let b = run_campaign(&CampaignConfig {
            workers: 4,
            ..base.clone()
        })
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prefix_stability_of_streams() {
        let cfg = small(10);
        let more = small(20);
        for i in 0..10 {
            assert_eq!(
                simulate_trial(&cfg, None, i).unwrap(),
                simulate_trial(&more, None, i).unwrap()
            );
        }
    }

    #[test]
    fn estimators_are_consistent() {
        let base = CampaignConfig {
            geometry_mode: GeometryMode::Fixed,
            ..small(4000)
        };
        let pos = run_campaign(&base).unwrap();
        let jen = run_campaign(&CampaignConfig {
            estimator: Estimator::JensenBound,
            ..base
        })
        .unwrap();
        for (p, j) in pos.estimates.iter().zip(&jen.estimates) {
            assert!(p.mean >= 0.0 && j.mean >= 0.0);
            assert!(
                j.mean <= p.mean + 3.0 * (p.ci95_halfwidth + j.ci95_halfwidth),
                "{p:?} {j:?}"
            );
        }
    }

    #[test]
    fn bits_are_scaled_nats() {
        let nats = run_campaign(&small(200)).unwrap();
        let mut cfg = small(200);
        cfg.params.log_base = LogBase::Bits;
        let bits = run_campaign(&cfg).unwrap();
        for (n, b) in nats.estimates.iter().zip(&bits.estimates) {
            assert_relative_eq!(b.mean, n.mean * std::f64::consts::LOG2_E, max_relative = 1e-12);
        }
    }

    #[test]
    fn invalid_config() {
        assert!(run_campaign(&small(0)).is_err());
        let cfg = CampaignConfig {
            schemes: vec![],
            ..small(1)
        };
        assert!(run_campaign(&cfg).is_err());
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut merged = Moments::default();
        for c in xs.chunks(64) {
            let mut m = Moments::default();
            c.iter().for_each(|&x| m.push(x));
            merged.merge(&m);
        }
        assert_relative_eq!(merged.mean, all.mean, max_relative = 1e-12);
        assert_relative_eq!(merged.std_dev(), all.std_dev(), max_relative = 1e-12);
    }

    #[test]
    fn empirical_cdf_examples() {
        let e = empirical_cdf(&[1.0]).unwrap();
        assert_eq!(e.eval(0.999), 0.0);
        assert_eq!(e.eval(1.0), 1.0);
        let e = empirical_cdf(&[4.0, 2.0, 3.0, 1.0]).unwrap();
        assert_eq!(e.eval(2.5), 0.5);
        assert_eq!(e.eval_left(2.0), 0.25);
        assert_eq!(e.quantile(0.5), 2.0);
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn ks_examples() {
        let e = empirical_cdf(&[0.0]).unwrap();
        assert_eq!(ks_distance(&e, |_| 0.5), 0.5);
        let e = empirical_cdf(&[1.0, 2.0, 3.0]).unwrap();
        let same = e.clone();
        assert_eq!(ks_distance(&e, |x| same.eval(x)), 0.0);
        assert_relative_eq!(ks_distance_at(&e, |_| 0.0, &[1.5, 2.5]), 2.0 / 3.0);
    }

    #[test]
    fn ks_against_exponential() {
        let mut rng = trial_rng(5, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let e = empirical_cdf(&xs).unwrap();
        assert!(ks_distance(&e, |x| 1.0 - (-x).exp()) <= 0.01);
    }

    #[test]
    fn ci_coverage() {
        // Uniform(0,1) has mean 1/2.
        let mut covered = 0;
        for c in 0..200 {
            let mut rng = trial_rng(c, 0);
            let mut m = Moments::default();
            for _ in 0..200 {
                m.push(rng.random::<f64>());
            }
            covered += usize::from((m.mean - 0.5).abs() <= m.ci95_halfwidth());
        }
        assert!(covered >= 180, "{covered}");
    }
}
