//! Per-trial SINRs and secrecy rates for the proposed scheme and the
//! baselines.
//!
//! Every rate here is in nats.

use num_complex::Complex64;

use crate::channels::{cascaded_gain, eve_effective, optimal_phases_and_zeta, ChannelRealization, EveEffective};
use crate::error::{Error, Result};
use crate::model::{keyword_enum, PairPathloss, PathlossSet, RliMode, SystemParams};

/// Average SNRs appearing in the closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSet {
    /// `Pβ_I-AB/(σ_l²+σ₀²)`.
    pub rho_ab: f64,
    /// `Pβ_I-BA/(σ_l²+σ₀²)`.
    pub rho_ba: f64,
    /// `P/σ₀²`.
    pub rho_0: f64,
}

impl SnrSet {
    pub fn new(params: &SystemParams, pl: &PairPathloss) -> Self {
        let p = params.power_w();
        let n0 = params.noise_w();
        let den = params.rli_w() + n0;
        SnrSet {
            rho_ab: p * pl.irs_ab / den,
            rho_ba: p * pl.irs_ba / den,
            rho_0: p / n0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    OnewayJam,
    FdRelay,
    HdRelay,
}

keyword_enum!(Scheme {
    Proposed => "proposed",
    OnewayJam => "oneway_jam",
    FdRelay => "fd_relay",
    HdRelay => "hd_relay",
});

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::OnewayJam, Scheme::FdRelay, Scheme::HdRelay];

    /// Relay baselines pick a pair at random instead of scheduling.
    pub fn uses_random_pair(self) -> bool {
        matches!(self, Scheme::FdRelay | Scheme::HdRelay)
    }
}

/// Result of one trial of one scheme.
///
/// `gamma_a`/`gamma_e1` belong to s₁ and `gamma_b`/`gamma_e2` to s₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub scheme: Scheme,
    pub scheduled: usize,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_e1: f64,
    pub gamma_e2: f64,
    /// `gamma_e1 ≥ gamma_a`: Eve could strip s₁ before decoding s₂.
    pub eve_decoded_s1: bool,
    /// Pre-log factor, ½ for schemes needing two channel uses.
    pub prelog: f64,
    pub rate_s1: f64,
    pub rate_s2: f64,
}

impl TrialOutcome {
    fn new(scheme: Scheme, scheduled: usize, prelog: f64, gamma: [f64; 4]) -> Self {
        let [gamma_a, gamma_b, gamma_e1, gamma_e2] = gamma;
        TrialOutcome {
            scheme,
            scheduled,
            gamma_a,
            gamma_b,
            gamma_e1,
            gamma_e2,
            eve_decoded_s1: gamma_e1 >= gamma_a,
            prelog,
            rate_s1: secrecy_rate(gamma_a, gamma_e1, prelog),
            rate_s2: secrecy_rate(gamma_b, gamma_e2, prelog),
        }
    }

    /// Signed `prelog·(ln(1+γ_legit) − ln(1+γ_eve))` for s₁.
    pub fn log_gap_s1(&self) -> f64 {
        self.prelog * (self.gamma_a.ln_1p() - self.gamma_e1.ln_1p())
    }

    pub fn log_gap_s2(&self) -> f64 {
        self.prelog * (self.gamma_b.ln_1p() - self.gamma_e2.ln_1p())
    }

    pub fn sum_rate(&self) -> f64 {
        self.rate_s1 + self.rate_s2
    }
}

/// `prelog·max(0, ln(1+γ_legit) − ln(1+γ_eve))`.
pub fn secrecy_rate(gamma_legit: f64, gamma_eve: f64, prelog: f64) -> f64 {
    prelog * (gamma_legit.ln_1p() - gamma_eve.ln_1p()).max(0.0)
}

/// Legitimate SINRs after each user removes its own echo.
pub fn legit_sinrs(
    zeta: f64,
    snr: &SnrSet,
    rli_mode: RliMode,
    rli_draws: Option<(Complex64, Complex64)>,
    params: &SystemParams,
    pl: &PairPathloss,
) -> Result<(f64, f64)> {
    match rli_mode {
        RliMode::Deterministic => Ok((snr.rho_ab * zeta, snr.rho_ba * zeta)),
        RliMode::Sampled => {
            let (la, lb) = rli_draws
                .ok_or_else(|| Error::Contract("sampled loop-interference mode needs per-trial draws".into()))?;
            let p = params.power_w();
            let n0 = params.noise_w();
            Ok((
                p * pl.irs_ab * zeta / (la.norm_sqr() + n0),
                p * pl.irs_ba * zeta / (lb.norm_sqr() + n0),
            ))
        }
    }
}

/// Eve's SIC SINRs: s₁ first with s₂ as noise, then s₂ with s₁ removed only
/// if s₁ was decodable.
pub fn eve_sinrs(eff: &EveEffective, gamma_a: f64, power_w: f64, noise_w: f64) -> (f64, f64, bool) {
    let a = power_w * eff.phi.norm_sqr();
    let b = power_w * eff.psi.norm_sqr();
    let gamma_e1 = a / (b + noise_w);
    if gamma_e1 < gamma_a {
        (gamma_e1, b / (a + noise_w), false)
    } else {
        (gamma_e1, b / noise_w, true)
    }
}

/// Index of the largest statistic, lowest index on ties.
pub fn schedule(zetas: &[f64]) -> Result<usize> {
    let (first, rest) = zetas
        .split_first()
        .ok_or_else(|| Error::Contract("cannot schedule among zero pairs".into()))?;
    let mut best = (0, *first);
    for (i, &z) in rest.iter().enumerate() {
        if z > best.1 {
            best = (i + 1, z);
        }
    }
    Ok(best.0)
}

struct Scheduled {
    pair: usize,
    zeta: f64,
    eve: EveEffective,
}

fn schedule_and_configure(realization: &ChannelRealization, pathloss: &PathlossSet) -> Result<Scheduled> {
    if realization.pairs.len() != pathloss.pairs.len() {
        return Err(Error::Dimension {
            expected: pathloss.pairs.len(),
            got: realization.pairs.len(),
        });
    }
    let zetas = realization
        .pairs
        .iter()
        .map(|p| cascaded_gain(&p.h, &p.g))
        .collect::<Result<Vec<_>>>()?;
    let pair = schedule(&zetas)?;
    let ch = &realization.pairs[pair];
    let (phases, zeta) = optimal_phases_and_zeta(&ch.h, &ch.g)?;
    let eve = eve_effective(realization, &phases, pathloss, pair)?;
    Ok(Scheduled { pair, zeta, eve })
}

fn scheduled_legit(
    s: &Scheduled,
    realization: &ChannelRealization,
    pathloss: &PathlossSet,
    params: &SystemParams,
) -> Result<(f64, f64)> {
    let pl = &pathloss.pairs[s.pair];
    let snr = SnrSet::new(params, pl);
    legit_sinrs(s.zeta, &snr, params.rli_mode, realization.pairs[s.pair].rli, params, pl)
}

/// Both users transmit at once; each signal jams Eve's view of the other.
pub fn proposed_trial(
    realization: &ChannelRealization,
    pathloss: &PathlossSet,
    params: &SystemParams,
) -> Result<TrialOutcome> {
    let s = schedule_and_configure(realization, pathloss)?;
    let (gamma_a, gamma_b) = scheduled_legit(&s, realization, pathloss, params)?;
    let (gamma_e1, gamma_e2, _) = eve_sinrs(&s.eve, gamma_a, params.power_w(), params.noise_w());
    Ok(TrialOutcome::new(
        Scheme::Proposed,
        s.pair,
        1.0,
        [gamma_a, gamma_b, gamma_e1, gamma_e2],
    ))
}

/// Two phases: in each, one user sends data while the other sends a unit
/// power jamming signal that it later cancels from its own reception.
pub fn oneway_jamming_trial(
    realization: &ChannelRealization,
    pathloss: &PathlossSet,
    params: &SystemParams,
) -> Result<TrialOutcome> {
    let s = schedule_and_configure(realization, pathloss)?;
    let (at_a, at_b) = scheduled_legit(&s, realization, pathloss, params)?;
    let p = params.power_w();
    let n0 = params.noise_w();
    let a = p * s.eve.phi.norm_sqr();
    let b = p * s.eve.psi.norm_sqr();
    // s₁ is received by B in phase 1, s₂ by A in phase 2.
    Ok(TrialOutcome::new(
        Scheme::OnewayJam,
        s.pair,
        0.5,
        [at_b, at_a, a / (b + n0), b / (a + n0)],
    ))
}

/// Relay projections shared by both relay baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayChannels {
    /// `‖h_n‖`.
    pub h_norm: f64,
    /// `‖g_n‖`.
    pub g_norm: f64,
    /// `|g_n u|` with `u = h_n^H/‖h_n‖`.
    pub g_u: f64,
    /// `|h_e u|`.
    pub he_u: f64,
    pub h_ne: Complex64,
    pub g_ne: Complex64,
}

impl RelayChannels {
    pub fn new(realization: &ChannelRealization, pair: usize) -> Result<Self> {
        let ch = realization.pair(pair)?;
        let norm = |v: &[Complex64]| v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        let h_norm = norm(&ch.h);
        let g_norm = norm(&ch.g);
        if h_norm == 0.0 {
            return Err(Error::DegenerateChannel("user A to relay channel has zero norm"));
        }
        if g_norm == 0.0 {
            return Err(Error::DegenerateChannel("user B to relay channel has zero norm"));
        }
        if realization.h_e.len() != ch.h.len() {
            return Err(Error::Dimension {
                expected: ch.h.len(),
                got: realization.h_e.len(),
            });
        }
        let project =
            |v: &[Complex64]| v.iter().zip(&ch.h).map(|(x, h)| x * h.conj()).sum::<Complex64>().norm() / h_norm;
        Ok(RelayChannels {
            h_norm,
            g_norm,
            g_u: project(&ch.g),
            he_u: project(&realization.h_e),
            h_ne: ch.h_ne,
            g_ne: ch.g_ne,
        })
    }
}

/// Squared amplification factor `P/(Pβ_AR‖h‖² + Pβ_BR‖g‖² + σ_l² + σ₀²)`.
pub fn relay_gain_sq(ch: &RelayChannels, pl: &PairPathloss, power_w: f64, rli_w: f64, noise_w: f64) -> f64 {
    power_w / (power_w * pl.relay_ar * ch.h_norm.powi(2) + power_w * pl.relay_br * ch.g_norm.powi(2) + rli_w + noise_w)
}

/// Full-duplex amplify-and-forward relay at the surface position.
pub fn fd_relay_trial(
    realization: &ChannelRealization,
    pathloss: &PathlossSet,
    params: &SystemParams,
    pair: usize,
) -> Result<TrialOutcome> {
    let ch = RelayChannels::new(realization, pair)?;
    let pl = pathloss.pair(pair)?;
    let (p, n0, nl) = (params.power_w(), params.noise_w(), params.rli_w());
    let (b_ar, b_br, b_re) = (pl.relay_ar, pl.relay_br, pathloss.relay_re);
    let k2 = relay_gain_sq(&ch, pl, p, nl, n0);
    let k = k2.sqrt();
    let (h2, g2, gu2, heu2) = (ch.h_norm.powi(2), ch.g_norm.powi(2), ch.g_u.powi(2), ch.he_u.powi(2));

    let gamma_a = b_ar * b_br * k2 * p * h2 * g2 / ((b_ar * k2 * h2 + 1.0) * (nl + n0));
    let gamma_b = b_ar * b_br * k2 * p * h2 * gu2 / ((b_br * k2 * gu2 + 1.0) * (nl + n0));
    let from_a = ch.h_ne * pl.dir_ae.sqrt() + (b_ar * b_re).sqrt() * k * ch.h_norm * ch.he_u;
    let from_b = ch.g_ne * pl.dir_be.sqrt() + (b_br * b_re).sqrt() * k * ch.g_norm * ch.he_u;
    let forwarded_noise = b_re * k2 * heu2 * (nl + n0) + n0;
    let gamma_e1 = p * from_a.norm_sqr() / (p * from_b.norm_sqr() + forwarded_noise);
    let gamma_e2 = p * from_b.norm_sqr() / forwarded_noise;
    Ok(TrialOutcome::new(
        Scheme::FdRelay,
        pair,
        1.0,
        [gamma_a, gamma_b, gamma_e1, gamma_e2],
    ))
}

/// Half-duplex amplify-and-forward relay; Eve combines both hops.
pub fn hd_relay_trial(
    realization: &ChannelRealization,
    pathloss: &PathlossSet,
    params: &SystemParams,
    pair: usize,
) -> Result<TrialOutcome> {
    let ch = RelayChannels::new(realization, pair)?;
    let pl = pathloss.pair(pair)?;
    let (p, n0) = (params.power_w(), params.noise_w());
    let rho0 = p / n0;
    let (b_ar, b_br, b_re) = (pl.relay_ar, pl.relay_br, pathloss.relay_re);
    let inv_k2 = 1.0 / relay_gain_sq(&ch, pl, p, 0.0, n0);
    let (h2, g2, gu2, heu2) = (ch.h_norm.powi(2), ch.g_norm.powi(2), ch.g_u.powi(2), ch.he_u.powi(2));
    let (dir_a, dir_b) = (pl.dir_ae * ch.h_ne.norm_sqr(), pl.dir_be * ch.g_ne.norm_sqr());

    let gamma_a = rho0 * b_ar * b_br * h2 * g2 / (b_ar * h2 + inv_k2);
    let gamma_b = rho0 * b_ar * b_br * h2 * gu2 / (b_br * gu2 + inv_k2);
    let gamma_e1 = rho0 * dir_a / (rho0 * dir_b + 1.0)
        + rho0 * b_re * b_ar * h2 * heu2 / (rho0 * b_re * b_br * g2 * heu2 + b_re * heu2 + inv_k2);
    let gamma_e2 = rho0 * dir_b + rho0 * b_re * b_br * g2 * heu2 / (b_re * heu2 + inv_k2);
    Ok(TrialOutcome::new(
        Scheme::HdRelay,
        pair,
        0.5,
        [gamma_a, gamma_b, gamma_e1, gamma_e2],
    ))
}

/// Dispatches one scheme. `relay_pair` is used only by the relay baselines.
pub fn run_trial(
    scheme: Scheme,
    realization: &ChannelRealization,
    pathloss: &PathlossSet,
    params: &SystemParams,
    relay_pair: usize,
) -> Result<TrialOutcome> {
    match scheme {
        Scheme::Proposed => proposed_trial(realization, pathloss, params),
        Scheme::OnewayJam => oneway_jamming_trial(realization, pathloss, params),
        Scheme::FdRelay => fd_relay_trial(realization, pathloss, params, relay_pair),
        Scheme::HdRelay => hd_relay_trial(realization, pathloss, params, relay_pair),
    }
}
