//! Rayleigh fading draws, surface phase design and Eve's effective channels.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{PathlossSet, RliMode};

/// Draws one circularly-symmetric complex Gaussian with unit variance.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

fn sample_cn_vec<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Complex64> {
    (0..k).map(|_| sample_cn(rng)).collect()
}

/// Small-scale fading of one user pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairChannels {
    /// User A ↔ surface, one entry per element.
    pub h: Vec<Complex64>,
    /// User B ↔ surface.
    pub g: Vec<Complex64>,
    /// User A → Eve, direct.
    pub h_ne: Complex64,
    /// User B → Eve, direct.
    pub g_ne: Complex64,
    /// Loop-interference draws `(l_A, l_B)`; present only in sampled mode.
    pub rli: Option<(Complex64, Complex64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub pairs: Vec<PairChannels>,
    /// Surface ↔ Eve, shared by all pairs.
    pub h_e: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn elements(&self) -> usize {
        self.h_e.len()
    }

    pub fn pair(&self, index: usize) -> Result<&PairChannels> {
        self.pairs.get(index).ok_or(Error::Index {
            index,
            len: self.pairs.len(),
        })
    }
}

pub fn sample_realization<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    n: usize,
    rli_mode: RliMode,
    rli_w: f64,
) -> ChannelRealization {
    let rli_scale = rli_w.sqrt();
    let pairs = (0..n)
        .map(|_| {
            let h = sample_cn_vec(rng, k);
            let g = sample_cn_vec(rng, k);
            let h_ne = sample_cn(rng);
            let g_ne = sample_cn(rng);
            let rli = match rli_mode {
                RliMode::Deterministic => None,
                RliMode::Sampled => Some((sample_cn(rng) * rli_scale, sample_cn(rng) * rli_scale)),
            };
            PairChannels { h, g, h_ne, g_ne, rli }
        })
        .collect();
    let h_e = sample_cn_vec(rng, k);
    ChannelRealization { pairs, h_e }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// `(Σ_k |h_k||g_k|)²`, the cascaded gain under matched phases.
pub fn cascaded_gain(h: &[Complex64], g: &[Complex64]) -> Result<f64> {
    check_len(h.len(), g.len())?;
    let s: f64 = h.iter().zip(g).map(|(a, b)| a.norm() * b.norm()).sum();
    Ok(s * s)
}

/// `Σ_k a_k e^{jθ_k} b_k`.
pub fn phased_sum(a: &[Complex64], phases: &[f64], b: &[Complex64]) -> Result<Complex64> {
    check_len(phases.len(), a.len())?;
    check_len(phases.len(), b.len())?;
    Ok(a.iter()
        .zip(phases)
        .zip(b)
        .map(|((x, &t), y)| x * Complex64::from_polar(1.0, t) * y)
        .sum())
}

/// Co-phases every cascaded path: `θ_k = −(arg h_k + arg g_k) mod 2π`.
/// Returns the phases and the resulting gain `|Σ h_k e^{jθ_k} g_k|²`.
pub fn optimal_phases_and_zeta(h: &[Complex64], g: &[Complex64]) -> Result<(Vec<f64>, f64)> {
    check_len(h.len(), g.len())?;
    let phases: Vec<f64> = h
        .iter()
        .zip(g)
        .map(|(a, b)| (-(a.arg() + b.arg())).rem_euclid(TAU))
        .map(|t| if t >= TAU { 0.0 } else { t })
        .collect();
    let zeta = phased_sum(h, &phases, g)?.norm_sqr();
    Ok((phases, zeta))
}

/// Effective channels from the scheduled pair to Eve under a given surface
/// configuration, plus their Gaussian-approximation variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveEffective {
    /// A → Eve.
    pub phi: Complex64,
    /// B → Eve.
    pub psi: Complex64,
    /// `β_I-Ae·K + β_D-Ae`.
    pub var_phi: f64,
    /// `β_I-Be·K + β_D-Be`.
    pub var_psi: f64,
}

pub fn eve_effective(
    realization: &ChannelRealization,
    phases: &[f64],
    pathloss: &PathlossSet,
    pair: usize,
) -> Result<EveEffective> {
    let ch = realization.pair(pair)?;
    let pl = pathloss.pair(pair)?;
    let k = realization.elements();
    let via_a = phased_sum(&realization.h_e, phases, &ch.h)?;
    let via_b = phased_sum(&realization.h_e, phases, &ch.g)?;
    Ok(EveEffective {
        phi: via_a * pl.irs_ae.sqrt() + ch.h_ne * pl.dir_ae.sqrt(),
        psi: via_b * pl.irs_be.sqrt() + ch.g_ne * pl.dir_be.sqrt(),
        var_phi: pl.irs_ae * k as f64 + pl.dir_ae,
        var_psi: pl.irs_be * k as f64 + pl.dir_be,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_pathloss, DiscLayout, NetworkGeometry, SystemParams};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn scalar_shapes() {
        let r = sample_realization(&mut rng(0), 1, 1, RliMode::Deterministic, 1e-7);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.pairs[0].h.len(), 1);
        assert_eq!(r.h_e.len(), 1);
        assert!(r.pairs[0].rli.is_none());
        let r = sample_realization(&mut rng(0), 4, 3, RliMode::Sampled, 1e-7);
        assert!(r.pairs.iter().all(|p| p.rli.is_some() && p.g.len() == 4));
    }

    #[test]
    fn unit_variance_and_rayleigh_mean() {
        let mut r = rng(42);
        let n = 100_000;
        let (mut p, mut m) = (0.0, 0.0);
        for _ in 0..n {
            let z = sample_cn(&mut r);
            p += z.norm_sqr();
            m += z.norm();
        }
        p /= n as f64;
        m /= n as f64;
        assert!((p - 1.0).abs() < 0.02, "{p}");
        assert!((m - PI.sqrt() / 2.0).abs() < 0.01, "{m}");
    }

    #[test]
    fn rli_draws_have_requested_variance() {
        let mut r = rng(5);
        let w = 1e-7;
        let n = 20_000;
        let mean: f64 = (0..n)
            .map(|_| {
                sample_realization(&mut r, 1, 1, RliMode::Sampled, w).pairs[0]
                    .rli
                    .unwrap()
                    .0
                    .norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert_relative_eq!(mean, w, max_relative = 0.05);
    }

    #[test]
    fn phase_examples() {
        let one = [Complex64::new(1.0, 0.0)];
        let (ph, z) = optimal_phases_and_zeta(&one, &one).unwrap();
        assert_eq!(ph, vec![0.0]);
        assert_relative_eq!(z, 1.0);

        let j = [Complex64::new(0.0, 1.0)];
        let (ph, z) = optimal_phases_and_zeta(&j, &one).unwrap();
        assert_relative_eq!(ph[0], 2.0 * PI - FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn phased_gain_equals_magnitude_sum() {
        let r = sample_realization(&mut rng(8), 8, 1, RliMode::Deterministic, 0.0);
        let p = &r.pairs[0];
        let (phases, zeta) = optimal_phases_and_zeta(&p.h, &p.g).unwrap();
        let direct = cascaded_gain(&p.h, &p.g).unwrap();
        assert_relative_eq!(zeta, direct, max_relative = 1e-12);
        assert!(phases.iter().all(|t| (0.0..TAU).contains(t)));
    }

    #[test]
    fn length_mismatch() {
        let a = vec![Complex64::new(1.0, 0.0); 3];
        let b = vec![Complex64::new(1.0, 0.0); 2];
        assert!(matches!(
            optimal_phases_and_zeta(&a, &b),
            Err(Error::Dimension { expected: 3, got: 2 })
        ));
        assert!(cascaded_gain(&a, &b).is_err());
    }

    #[test]
    fn normalized_gain_approaches_pi_over_four() {
        let mut r = rng(13);
        let k = 256;
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let h = sample_cn_vec(&mut r, k);
            let g = sample_cn_vec(&mut r, k);
            acc += cascaded_gain(&h, &g).unwrap().sqrt() / k as f64;
        }
        let mean = acc / n as f64;
        assert!((mean / FRAC_PI_4 - 1.0).abs() < 0.02, "{mean}");
    }

    fn default_pathloss(n: usize) -> PathlossSet {
        let geom = NetworkGeometry::fixed(&DiscLayout::default(), n);
        make_pathloss(&geom, &SystemParams::default()).unwrap()
    }

    #[test]
    fn eve_effective_edges() {
        let pl = default_pathloss(1);
        let mut r = sample_realization(&mut rng(3), 4, 1, RliMode::Deterministic, 0.0);
        r.h_e.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        let phases = vec![0.3; 4];
        let e = eve_effective(&r, &phases, &pl, 0).unwrap();
        assert_relative_eq!(e.phi.re, (pl.pairs[0].dir_ae.sqrt() * r.pairs[0].h_ne).re);
        assert!(e.var_phi > 0.0 && e.var_psi > 0.0);

        let mut no_direct = pl.clone();
        no_direct.pairs[0].dir_ae = 0.0;
        let e = eve_effective(&r, &phases, &no_direct, 0).unwrap();
        assert_eq!(e.phi, Complex64::new(0.0, 0.0));

        let r0 = ChannelRealization {
            pairs: vec![PairChannels {
                h: vec![],
                g: vec![],
                h_ne: Complex64::new(0.5, -1.0),
                g_ne: Complex64::new(1.0, 0.0),
                rli: None,
            }],
            h_e: vec![],
        };
        let e = eve_effective(&r0, &[], &pl, 0).unwrap();
        assert_relative_eq!(e.phi.im, -pl.pairs[0].dir_ae.sqrt());
        assert_relative_eq!(e.var_phi, pl.pairs[0].dir_ae);

        assert!(matches!(
            eve_effective(&r, &phases, &pl, 1),
            Err(Error::Index { index: 1, len: 1 })
        ));
    }

    #[test]
    fn eve_power_matches_gaussian_variance() {
        let pl = default_pathloss(1);
        let mut r = rng(21);
        let n = 100_000;
        let mut mean = 0.0;
        let mut var_phi = 0.0;
        for _ in 0..n {
            let real = sample_realization(&mut r, 32, 1, RliMode::Deterministic, 0.0);
            let (phases, _) = optimal_phases_and_zeta(&real.pairs[0].h, &real.pairs[0].g).unwrap();
            let e = eve_effective(&real, &phases, &pl, 0).unwrap();
            mean += e.phi.norm_sqr();
            var_phi = e.var_phi;
        }
        mean /= n as f64;
        assert!((mean / var_phi - 1.0).abs() < 0.05, "{mean} vs {var_phi}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gain_is_reciprocal(seed in any::<u64>(), k in 1usize..64) {
                let mut r = rng(seed);
                let h = sample_cn_vec(&mut r, k);
                let g = sample_cn_vec(&mut r, k);
                let (_, a) = optimal_phases_and_zeta(&h, &g).unwrap();
                let (_, b) = optimal_phases_and_zeta(&g, &h).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
                prop_assert!(a >= 0.0);
            }

            #[test]
            fn matched_phases_are_optimal(seed in any::<u64>(), k in 1usize..16, shift in 0.0..TAU) {
                let mut r = rng(seed);
                let h = sample_cn_vec(&mut r, k);
                let g = sample_cn_vec(&mut r, k);
                let (mut phases, best) = optimal_phases_and_zeta(&h, &g).unwrap();
                phases[0] += shift;
                let other = phased_sum(&h, &phases, &g).unwrap().norm_sqr();
                prop_assert!(other <= best * (1.0 + 1e-12));
            }
        }
    }
}
