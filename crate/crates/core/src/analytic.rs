//! Closed-form evaluators for the average secrecy rate lower bound.
//!
//! All results are in nats.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{make_pathloss, NetworkGeometry, PairPathloss, SystemParams};
use crate::schemes::SnrSet;
use crate::specfun::{gc_integrate_shifted, gc_rule, reg_lower_gamma, scaled_e1, QuadratureRule};

/// Gamma-approximation constants for `√ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Params {
    /// `π²/(16−π²)`.
    pub mu: f64,
    /// `(16−π²)/(4π)`.
    pub nu: f64,
    /// `Kμ`.
    pub shape: f64,
}

impl Lemma1Params {
    pub const MU: f64 = PI * PI / (16.0 - PI * PI);
    pub const NU: f64 = (16.0 - PI * PI) / (4.0 * PI);

    pub fn new(k: usize) -> Self {
        Lemma1Params {
            mu: Self::MU,
            nu: Self::NU,
            shape: k as f64 * Self::MU,
        }
    }

    /// Bracket `[g_lo, g_hi]` in the gamma-variate domain that holds
    /// essentially all mass of the largest of `n` draws.
    fn window(&self, n: usize) -> (f64, f64) {
        let sd = self.shape.sqrt();
        let lo = self.shape - 4.0 * sd;
        let hi = self.shape + (3.0 + (2.0 * (n as f64).ln()).sqrt()) * sd;
        (lo, hi)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::domain("lemma1_cdf", "K must be at least 1"))
    } else {
        Ok(())
    }
}

/// Approximate CDF of the cascaded gain `ζ` of one pair.
pub fn lemma1_cdf(x: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("lemma1_cdf", format!("x = {x} is negative")));
    }
    let p = Lemma1Params::new(k);
    reg_lower_gamma(p.shape, x.sqrt() / p.nu)
}

/// CDF of the largest of `n` independent cascaded gains.
pub fn scheduled_cdf(x: f64, k: usize, n: usize) -> Result<f64> {
    Ok(lemma1_cdf(x, k)?.powi(n as i32))
}

/// Scheduled CDF in the gamma-variate domain; NaN on failure so the
/// quadrature reports the offending node.
fn scheduled_cdf_g(shape: f64, g: f64, n: usize) -> f64 {
    reg_lower_gamma(shape, g).map_or(f64::NAN, |v| v.powi(n as i32))
}

/// `E[ln(1 + ρ ζ_max)]` under the gamma approximation.
///
/// The half-line integral is mapped onto the window where the scheduled
/// statistic lives before the Gauss-Chebyshev rule is applied. Below the
/// window the integrand is `ρ/(1+ρx)` and is integrated exactly.
pub fn q_m(rho: f64, k: usize, n: usize, rule: &QuadratureRule) -> Result<f64> {
    check_k(k)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain("q_m", format!("rho = {rho} is not positive")));
    }
    let p = Lemma1Params::new(k);
    let r = rho * p.nu * p.nu;
    let (g_lo, g_hi) = p.window(n);
    if g_lo > 0.0 {
        let tail = gc_integrate_shifted(
            |g| (1.0 - scheduled_cdf_g(p.shape, g, n)) * 2.0 * r * g / (1.0 + r * g * g),
            rule,
            g_lo,
            g_hi - g_lo,
        )?;
        Ok((r * g_lo * g_lo).ln_1p() + tail)
    } else {
        // t = ln(1 + r g²)
        gc_integrate_shifted(
            |t| 1.0 - scheduled_cdf_g(p.shape, (t.exp_m1() / r).sqrt(), n),
            rule,
            0.0,
            (r * g_hi * g_hi).ln_1p(),
        )
    }
}

fn check_positive(func: &'static str, vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::domain(func, format!("{name} = {v} is not positive")));
        }
    }
    Ok(())
}

/// `E[ln(1 + X/(Y + 1/ρ₀))]` for independent exponentials with means
/// `x_var` and `y_var`.
fn log_ratio_mean(rho0: f64, x_var: f64, y_var: f64) -> Result<f64> {
    let c = 1.0 / rho0;
    if (x_var - y_var).abs() < 1e-9 * x_var.max(y_var) {
        let s = c / x_var;
        return Ok(1.0 - s * scaled_e1(s)?);
    }
    let ex = scaled_e1(c / x_var)?;
    let ey = scaled_e1(c / y_var)?;
    Ok(x_var * (ex - ey) / (x_var - y_var))
}

/// `E[ln(1+γ_e1)]` with `|φ|²`, `|ψ|²` exponential of means `σ_e²`, `σ_e'²`.
///
/// Equal variances are handled by the analytic limit.
pub fn q_e1(rho0: f64, sigma_e2: f64, sigma_ep2: f64) -> Result<f64> {
    check_positive(
        "q_e1",
        &[("rho0", rho0), ("sigma_e2", sigma_e2), ("sigma_ep2", sigma_ep2)],
    )?;
    log_ratio_mean(rho0, sigma_e2, sigma_ep2)
}

/// Everything the s₂ eavesdropping term needs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticInputs {
    pub snr: SnrSet,
    pub sigma_e2: f64,
    pub sigma_ep2: f64,
    pub k: usize,
    pub n: usize,
    pub rule: QuadratureRule,
}

impl AnalyticInputs {
    pub fn new(params: &SystemParams, pl: &PairPathloss) -> Result<Self> {
        params.validate()?;
        let k = params.elements as f64;
        Ok(AnalyticInputs {
            snr: SnrSet::new(params, pl),
            sigma_e2: pl.irs_ae * k + pl.dir_ae,
            sigma_ep2: pl.irs_be * k + pl.dir_be,
            k: params.elements,
            n: params.pairs,
            rule: gc_rule(params.quad_order)?,
        })
    }

    fn check(&self) -> Result<()> {
        check_k(self.k)?;
        check_positive(
            "q_e2",
            &[
                ("rho_ab", self.snr.rho_ab),
                ("rho_0", self.snr.rho_0),
                ("sigma_e2", self.sigma_e2),
                ("sigma_ep2", self.sigma_ep2),
            ],
        )
    }
}

/// `E[ln(1 + |ψ|²/(|φ|² + 1/ρ₀))]`: Eve's s₂ rate when s₁ stays as noise.
pub fn j1(inputs: &AnalyticInputs) -> Result<f64> {
    inputs.check()?;
    log_ratio_mean(inputs.snr.rho_0, inputs.sigma_ep2, inputs.sigma_e2)
}

/// `e^s E1(s)/s` and `(1 − (s−1)e^s E1(s))/s²`, switching to the
/// asymptotic series for large `s`.
fn laplace_pair(s: f64) -> Result<(f64, f64)> {
    if s > 40.0 {
        let inv = 1.0 / s;
        let (mut l0, mut l1) = (0.0, 0.0);
        // term_k = (k−1)!/s^k
        let mut term = inv;
        for k in 1..30 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            l0 += sign * term * inv;
            l1 += sign * term * (k + 1) as f64 * inv * inv;
            term *= k as f64 * inv;
        }
        Ok((l0, l1))
    } else {
        let e = scaled_e1(s)?;
        Ok((e / s, (1.0 - (s - 1.0) * e) / (s * s)))
    }
}

/// Extra s₂ leakage when Eve decodes s₁ first and removes it.
///
/// Integrated over `α`, the legitimate SINR threshold, after the inner
/// expectation over the eavesdropping channels is done in closed form.
pub fn j2(inputs: &AnalyticInputs) -> Result<f64> {
    inputs.check()?;
    let (a, b) = (inputs.sigma_e2, inputs.sigma_ep2);
    let rho0 = inputs.snr.rho_0;
    let rho = inputs.snr.rho_ab;
    let c = 1.0 / rho0;
    let p = Lemma1Params::new(inputs.k);
    let (g_lo, g_hi) = p.window(inputs.n);
    let to_alpha = |g: f64| rho * (p.nu * g).powi(2);
    let lo = to_alpha(g_lo.max(0.0));
    let hi = to_alpha(g_hi);
    let norm = 1.0 / (rho0 * rho0 * a * b);
    gc_integrate_shifted(
        |alpha| {
            let f = scheduled_cdf_g(p.shape, (alpha / rho).sqrt() / p.nu, inputs.n);
            if f == 0.0 {
                return 0.0;
            }
            let tau = c / (b * alpha) + c / a;
            let cc = 1.0 + alpha;
            let Ok((l0, l1)) = laplace_pair(tau * cc) else {
                return f64::NAN;
            };
            norm * f * (-c * alpha / a).exp() * cc * (cc * l1 + alpha * l0) / (alpha * alpha)
        },
        &inputs.rule,
        lo,
        hi - lo,
    )
}

/// `E[ln(1+γ_e2)] = J₁ + J₂`.
pub fn q_e2(inputs: &AnalyticInputs) -> Result<f64> {
    Ok(j1(inputs)? + j2(inputs)?)
}

/// Lower bounds and the terms they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Bounds {
    pub r_s1: f64,
    pub r_s2: f64,
    pub q_m_ab: f64,
    pub q_m_ba: f64,
    pub q_e1: f64,
    pub j1: f64,
    pub j2: f64,
}

impl Theorem1Bounds {
    pub fn sum(&self) -> f64 {
        self.r_s1 + self.r_s2
    }
}

/// Average secrecy rate lower bounds for both signals. Requires every pair
/// to sit at the same distances.
pub fn theorem1_bounds(params: &SystemParams, geometry: &NetworkGeometry) -> Result<Theorem1Bounds> {
    if geometry.pairs.is_empty() || !geometry.is_pair_symmetric() {
        return Err(Error::Contract(
            "the closed-form bound needs identical distances for all pairs; use fixed geometry".into(),
        ));
    }
    let pathloss = make_pathloss(geometry, params)?;
    let inputs = AnalyticInputs::new(params, &pathloss.pairs[0])?;
    let q_m_ab = q_m(inputs.snr.rho_ab, inputs.k, inputs.n, &inputs.rule)?;
    let q_m_ba = q_m(inputs.snr.rho_ba, inputs.k, inputs.n, &inputs.rule)?;
    let qe1 = q_e1(inputs.snr.rho_0, inputs.sigma_e2, inputs.sigma_ep2)?;
    let j1v = j1(&inputs)?;
    let j2v = j2(&inputs)?;
    Ok(Theorem1Bounds {
        r_s1: (q_m_ab - qe1).max(0.0),
        r_s2: (q_m_ba - j1v - j2v).max(0.0),
        q_m_ab,
        q_m_ba,
        q_e1: qe1,
        j1: j1v,
        j2: j2v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    /// Grid is linear transmit power; slope `ln P`.
    Power,
    /// Grid is the element count; slope `2 ln K`.
    Elements,
    /// Grid is the pair count; slope `ln ln N`.
    Pairs,
}

crate::model::keyword_enum!(ScalingKind { Power => "power", Elements => "elements", Pairs => "pairs" });

/// High-SNR reference curve `y0 + signals·(φ(x) − φ(x0))`.
pub fn scaling_reference(kind: ScalingKind, grid: &[f64], anchor: (f64, f64), signals: f64) -> Result<Vec<f64>> {
    let phi = |x: f64| -> Result<f64> {
        match kind {
            ScalingKind::Power if x > 0.0 => Ok(x.ln()),
            ScalingKind::Elements if x > 0.0 => Ok(2.0 * x.ln()),
            ScalingKind::Pairs if x > 1.0 => Ok(x.ln().ln()),
            _ => Err(Error::domain(
                "scaling_reference",
                format!("{kind} grid value {x} out of range"),
            )),
        }
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("scaling_reference", "grid must be strictly increasing"));
    }
    let base = phi(anchor.0)?;
    grid.iter()
        .map(|&x| Ok(anchor.1 + signals * (phi(x)? - base)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiscLayout;
    use approx::assert_relative_eq;

    fn defaults(power_dbm: f64) -> (SystemParams, NetworkGeometry) {
        let params = SystemParams {
            power_dbm,
            ..SystemParams::default()
        };
        let geom = NetworkGeometry::fixed(&DiscLayout::default(), params.pairs);
        (params, geom)
    }

    fn inputs(power_dbm: f64) -> AnalyticInputs {
        let (params, geom) = defaults(power_dbm);
        let pl = make_pathloss(&geom, &params).unwrap();
        AnalyticInputs::new(&params, &pl.pairs[0]).unwrap()
    }

    #[test]
    fn constants() {
        let p = Lemma1Params::new(32);
        assert_relative_eq!(p.mu, 1.609_945_759_918_522_5, max_relative = 1e-14);
        assert_relative_eq!(p.nu, 0.487_841_381_337_714_4, max_relative = 1e-14);
        assert_relative_eq!(p.shape, 32.0 * p.mu);
    }

    #[test]
    fn cdf_basics() {
        assert_eq!(lemma1_cdf(0.0, 32).unwrap(), 0.0);
        assert!(lemma1_cdf(1e9, 32).unwrap() > 1.0 - 1e-12);
        assert!(lemma1_cdf(-1.0, 32).is_err());
        assert!(lemma1_cdf(1.0, 0).is_err());
        let x = 500.0;
        assert_eq!(scheduled_cdf(x, 32, 1).unwrap(), lemma1_cdf(x, 32).unwrap());
        // Median of the single-pair law, then N = 2 squares it.
        let (mut lo, mut hi) = (0.0, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lemma1_cdf(mid, 16).unwrap() < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(scheduled_cdf(lo, 16, 2).unwrap(), 0.25, epsilon = 1e-9);
        let mut prev = 0.0;
        for i in 0..200 {
            let v = lemma1_cdf(i as f64 * 10.0, 32).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn q_m_reference_values() {
        // Frozen from an independent adaptive-quadrature evaluation.
        for (p, want) in [(10.0, 4.4268), (20.0, 6.7185), (30.0, 9.0199), (40.0, 11.3224)] {
            let i = inputs(p);
            let got = q_m(i.snr.rho_ab, 32, 10, &i.rule).unwrap();
            assert_relative_eq!(got, want, max_relative = 2e-3);
        }
    }

    #[test]
    fn q_m_limits_and_monotonicity() {
        let rule = gc_rule(20).unwrap();
        assert!(q_m(1e-12, 32, 10, &rule).unwrap() < 1e-6);
        assert!(q_m(0.0, 32, 10, &rule).is_err());
        for k in [1, 4, 32, 256] {
            let mut prev = 0.0;
            for e in -6..8 {
                let v = q_m(10f64.powi(e), k, 6, &rule).unwrap();
                assert!(v > prev, "K={k} rho=1e{e}");
                prev = v;
            }
        }
    }

    #[test]
    fn q_m_order_stability() {
        let i = inputs(20.0);
        let a = q_m(i.snr.rho_ab, 32, 10, &gc_rule(20).unwrap()).unwrap();
        let b = q_m(i.snr.rho_ab, 32, 10, &gc_rule(40).unwrap()).unwrap();
        assert!(((a - b) / b).abs() <= 1e-3);
    }

    #[test]
    fn q_e1_limits() {
        assert!(q_e1(1e8, 1e-12, 0.5).unwrap() < 1e-3);
        assert_relative_eq!(q_e1(1e12, 2.0, 1.0).unwrap(), 2.0 * 2f64.ln(), max_relative = 1e-6);
        // iid exponentials: E[ln(X+Y)] − E[ln Y] = (1 − γ) − (−γ) = 1.
        assert_relative_eq!(q_e1(1e12, 1.0, 1.0).unwrap(), 1.0, max_relative = 1e-6);
        assert!(q_e1(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn q_e1_degenerate_branch_is_continuous() {
        let rho0 = 1e6;
        let a = 0.064;
        let limit = q_e1(rho0, a, a).unwrap();
        for eps in [1e-4, 1e-5, 1e-6, 1e-7, 1e-8] {
            let v = q_e1(rho0, a, a * (1.0 + eps)).unwrap();
            assert!(((v - limit) / limit).abs() < 1e-6 + 2.0 * eps, "{eps}: {v} vs {limit}");
        }
    }

    #[test]
    fn j_terms_at_defaults() {
        let i = inputs(20.0);
        assert_eq!(i.sigma_e2, i.sigma_ep2);
        let v1 = j1(&i).unwrap();
        let v2 = j2(&i).unwrap();
        assert_relative_eq!(
            v1,
            q_e1(i.snr.rho_0, i.sigma_e2, i.sigma_ep2).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(v2, 0.01307, max_relative = 5e-3);
        assert!(v2 >= 0.0);
        assert_relative_eq!(q_e2(&i).unwrap(), v1 + v2);
    }

    #[test]
    fn j1_swaps_the_variances() {
        let mut i = inputs(20.0);
        i.sigma_e2 = 0.064;
        i.sigma_ep2 = 0.032;
        assert_relative_eq!(j1(&i).unwrap(), q_e1(i.snr.rho_0, 0.032, 0.064).unwrap());
    }

    #[test]
    fn q_e2_vanishes_without_s2_power() {
        let mut i = inputs(20.0);
        i.sigma_ep2 = 1e-14;
        assert!(q_e2(&i).unwrap() < 1e-4);
    }

    #[test]
    fn laplace_pair_branches_agree() {
        for s in [39.0, 40.0, 41.0] {
            let e = scaled_e1(s).unwrap();
            let direct = (e / s, (1.0 - (s - 1.0) * e) / (s * s));
            let (l0, l1) = laplace_pair(s + 1e-9).unwrap();
            assert_relative_eq!(l0, direct.0, max_relative = 1e-9);
            assert_relative_eq!(l1, direct.1, max_relative = 1e-7);
        }
    }

    #[test]
    fn bounds_grow_with_power() {
        let mut prev = 0.0;
        for p in [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0] {
            let (params, geom) = defaults(p);
            let b = theorem1_bounds(&params, &geom).unwrap();
            assert!(b.sum() > prev);
            assert!(b.r_s1 >= 0.0 && b.r_s2 >= 0.0 && b.j2 >= 0.0);
            prev = b.sum();
        }
        let (params, geom) = defaults(-60.0);
        let b = theorem1_bounds(&params, &geom).unwrap();
        assert!(b.sum() < 1e-6);
    }

    #[test]
    fn bounds_reject_asymmetric_geometry() {
        use crate::model::sample_user_positions;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let geom = sample_user_positions(&mut rng, 3, &DiscLayout::default()).unwrap();
        assert!(matches!(
            theorem1_bounds(&SystemParams::default(), &geom),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn reference_curves() {
        let p = 3.0;
        let r = scaling_reference(ScalingKind::Power, &[p, p * std::f64::consts::E], (p, 1.0), 2.0).unwrap();
        assert_relative_eq!(r[1] - r[0], 2.0, max_relative = 1e-12);
        let r = scaling_reference(ScalingKind::Elements, &[32.0, 64.0], (64.0, 5.0), 2.0).unwrap();
        assert_relative_eq!(r[1] - r[0], 4.0 * 2f64.ln(), max_relative = 1e-12);
        assert_eq!(r[1], 5.0);
        assert!(scaling_reference(ScalingKind::Pairs, &[1.0, 2.0], (2.0, 0.0), 1.0).is_err());
        assert!(scaling_reference(ScalingKind::Power, &[2.0, 1.0], (1.0, 0.0), 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn evaluators_are_non_negative(
                rho in 1e-4..1e6f64, rho0 in 1e-2..1e10f64,
                a in 1e-4..1e2f64, b in 1e-4..1e2f64,
                k in 1usize..128, n in 1usize..32,
            ) {
                let rule = gc_rule(20).unwrap();
                prop_assert!(q_m(rho, k, n, &rule).unwrap() >= 0.0);
                prop_assert!(q_e1(rho0, a, b).unwrap() >= 0.0);
                let i = AnalyticInputs {
                    snr: SnrSet { rho_ab: rho, rho_ba: rho, rho_0: rho0 },
                    sigma_e2: a,
                    sigma_ep2: b,
                    k,
                    n,
                    rule,
                };
                let v1 = j1(&i).unwrap();
                let v2 = j2(&i).unwrap();
                prop_assert!(v1 >= 0.0 && v2 >= 0.0);
                prop_assert!(q_e2(&i).unwrap() >= v1);
            }
        }
    }
}
