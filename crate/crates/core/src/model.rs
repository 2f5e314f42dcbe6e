//! Deterministic system description: scalar parameters, node positions and
//! the pathloss coefficients derived from them.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Converts dBm to watts.
pub fn dbm_to_watt(v: f64) -> f64 {
    10f64.powf((v - 30.0) / 10.0)
}

/// Converts an antenna gain in dBi to a linear factor.
pub fn dbi_to_linear(g: f64) -> f64 {
    10f64.powf(g / 10.0)
}

/// Whether the residual loop interference enters as its variance or as a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RliMode {
    /// Denominators use `σ_l² + σ₀²`.
    #[default]
    Deterministic,
    /// Denominators use `|l|² + σ₀²` with `l ~ CN(0, σ_l²)` drawn per trial.
    Sampled,
}

/// Unit of reported rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    /// Factor converting a value in nats into this unit.
    pub fn from_nats(self) -> f64 {
        match self {
            LogBase::Nats => 1.0,
            LogBase::Bits => std::f64::consts::LOG2_E,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl ::std::str::FromStr for $ty {
            type Err = $crate::error::Error;
            fn from_str(s: &str) -> $crate::error::Result<Self> {
                match s {
                    $($text => Ok($ty::$variant),)+
                    other => Err($crate::error::Error::Config(format!(
                        "unknown {} `{}` (expected one of: {})",
                        stringify!($ty),
                        other,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }

        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(match self {
                    $($ty::$variant => $text,)+
                })
            }
        }
    };
}
pub(crate) use keyword_enum;

keyword_enum!(RliMode { Deterministic => "deterministic", Sampled => "sampled" });
keyword_enum!(LogBase { Nats => "nats", Bits => "bits" });

/// All scalar knobs of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Transmit power of each signal, dBm.
    pub power_dbm: f64,
    /// Reflecting elements (relay antennas for the relay baselines).
    pub elements: usize,
    /// User pairs competing for the surface.
    pub pairs: usize,
    /// Gauss-Chebyshev order used by the analytic evaluators.
    pub quad_order: usize,
    /// Noise variance, dBm.
    pub noise_dbm: f64,
    /// Residual loop-interference variance, dBm.
    pub rli_dbm: f64,
    pub pathloss_exp: f64,
    pub gain_user_dbi: f64,
    pub gain_eve_dbi: f64,
    /// Area of one reflecting element, m².
    pub element_area_m2: f64,
    pub rli_mode: RliMode,
    pub log_base: LogBase,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            power_dbm: 30.0,
            elements: 32,
            pairs: 10,
            quad_order: 20,
            noise_dbm: -70.0,
            rli_dbm: -40.0,
            pathloss_exp: 3.0,
            gain_user_dbi: 15.0,
            gain_eve_dbi: 15.0,
            element_area_m2: 0.1,
            rli_mode: RliMode::Deterministic,
            log_base: LogBase::Nats,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive_count = |name, v: usize| {
            if v == 0 {
                Err(Error::InvalidParam {
                    name,
                    reason: "must be at least 1".into(),
                })
            } else {
                Ok(())
            }
        };
        positive_count("elements", self.elements)?;
        positive_count("pairs", self.pairs)?;
        positive_count("quad_order", self.quad_order)?;
        if !(self.element_area_m2 > 0.0 && self.element_area_m2.is_finite()) {
            return Err(Error::InvalidParam {
                name: "element_area_m2",
                reason: format!("{} is not positive", self.element_area_m2),
            });
        }
        if !(self.pathloss_exp > 0.0 && self.pathloss_exp.is_finite()) {
            return Err(Error::InvalidParam {
                name: "pathloss_exp",
                reason: format!("{} is not positive", self.pathloss_exp),
            });
        }
        for (name, v) in [
            ("power_dbm", self.power_dbm),
            ("noise_dbm", self.noise_dbm),
            ("rli_dbm", self.rli_dbm),
            ("gain_user_dbi", self.gain_user_dbi),
            ("gain_eve_dbi", self.gain_eve_dbi),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn power_w(&self) -> f64 {
        dbm_to_watt(self.power_dbm)
    }

    pub fn noise_w(&self) -> f64 {
        dbm_to_watt(self.noise_dbm)
    }

    pub fn rli_w(&self) -> f64 {
        dbm_to_watt(self.rli_dbm)
    }
}

/// A point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Where the two user populations live.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscLayout {
    pub irs_pos: Point,
    pub eve_pos: Point,
    pub disc_a_center: Point,
    pub disc_b_center: Point,
    pub disc_radius: f64,
}

impl Default for DiscLayout {
    fn default() -> Self {
        DiscLayout {
            irs_pos: Point::new(15.0, 0.0),
            eve_pos: Point::new(15.0, 20.0),
            disc_a_center: Point::new(0.0, 0.0),
            disc_b_center: Point::new(30.0, 0.0),
            disc_radius: 5.0,
        }
    }
}

/// One user pair and its derived distances.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    pub a_pos: Point,
    pub b_pos: Point,
    /// User A ↔ surface.
    pub d_a: f64,
    /// User B ↔ surface.
    pub d_b: f64,
    /// User A ↔ Eve.
    pub d_ae: f64,
    /// User B ↔ Eve.
    pub d_be: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    pub irs_pos: Point,
    pub eve_pos: Point,
    /// Surface ↔ Eve.
    pub d_e: f64,
    pub pairs: Vec<PairGeometry>,
}

impl NetworkGeometry {
    pub fn new(irs_pos: Point, eve_pos: Point, positions: impl IntoIterator<Item = (Point, Point)>) -> Self {
        let pairs = positions
            .into_iter()
            .map(|(a_pos, b_pos)| PairGeometry {
                a_pos,
                b_pos,
                d_a: a_pos.distance(irs_pos),
                d_b: b_pos.distance(irs_pos),
                d_ae: a_pos.distance(eve_pos),
                d_be: b_pos.distance(eve_pos),
            })
            .collect();
        NetworkGeometry {
            irs_pos,
            eve_pos,
            d_e: irs_pos.distance(eve_pos),
            pairs,
        }
    }

    /// Every user sits at the center of its disc.
    pub fn fixed(layout: &DiscLayout, n_pairs: usize) -> Self {
        Self::new(
            layout.irs_pos,
            layout.eve_pos,
            std::iter::repeat_n((layout.disc_a_center, layout.disc_b_center), n_pairs),
        )
    }

    /// True when all pairs share the same distances, which is what the
    /// closed-form bound assumes.
    pub fn is_pair_symmetric(&self) -> bool {
        let Some(first) = self.pairs.first() else {
            return true;
        };
        self.pairs
            .iter()
            .all(|p| p.d_a == first.d_a && p.d_b == first.d_b && p.d_ae == first.d_ae && p.d_be == first.d_be)
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, center: Point, radius: f64) -> Point {
    if radius == 0.0 {
        return center;
    }
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Drops every A user uniformly (by area) in disc A and every B user in disc B.
pub fn sample_user_positions<R: Rng + ?Sized>(
    rng: &mut R,
    n_pairs: usize,
    layout: &DiscLayout,
) -> Result<NetworkGeometry> {
    if !(layout.disc_radius >= 0.0 && layout.disc_radius.is_finite()) {
        return Err(Error::InvalidParam {
            name: "disc_radius",
            reason: format!("{} is negative", layout.disc_radius),
        });
    }
    let positions: Vec<_> = (0..n_pairs)
        .map(|_| {
            let a = uniform_in_disc(rng, layout.disc_a_center, layout.disc_radius);
            let b = uniform_in_disc(rng, layout.disc_b_center, layout.disc_radius);
            (a, b)
        })
        .collect();
    Ok(NetworkGeometry::new(layout.irs_pos, layout.eve_pos, positions))
}

/// Pathloss coefficients of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPathloss {
    /// B → surface → A.
    pub irs_ab: f64,
    /// A → surface → B; equal to `irs_ab`.
    pub irs_ba: f64,
    /// A → surface → A (self-interference echo).
    pub irs_aa: f64,
    /// B → surface → B.
    pub irs_bb: f64,
    /// A → surface → Eve.
    pub irs_ae: f64,
    /// B → surface → Eve.
    pub irs_be: f64,
    /// A → Eve, direct.
    pub dir_ae: f64,
    /// B → Eve, direct.
    pub dir_be: f64,
    /// A ↔ relay.
    pub relay_ar: f64,
    /// B ↔ relay.
    pub relay_br: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathlossSet {
    pub pairs: Vec<PairPathloss>,
    /// Relay → Eve. The relay sits at the surface position.
    pub relay_re: f64,
}

impl PathlossSet {
    pub fn pair(&self, index: usize) -> Result<&PairPathloss> {
        self.pairs.get(index).ok_or(Error::Index {
            index,
            len: self.pairs.len(),
        })
    }
}

pub fn make_pathloss(geom: &NetworkGeometry, params: &SystemParams) -> Result<PathlossSet> {
    let check = |what: &str, d: f64| {
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(Error::DegenerateGeometry(format!("{what} distance is {d}")))
        }
    };
    let alpha = params.pathloss_exp;
    let gu = dbi_to_linear(params.gain_user_dbi);
    let ge = dbi_to_linear(params.gain_eve_dbi);
    let s2 = params.element_area_m2 * params.element_area_m2;
    let de_a = check("surface-Eve", geom.d_e)?.powf(alpha);

    let pairs = geom
        .pairs
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let da_a = check(&format!("pair {n} A-surface"), p.d_a)?.powf(alpha);
            let db_a = check(&format!("pair {n} B-surface"), p.d_b)?.powf(alpha);
            let dae_a = check(&format!("pair {n} A-Eve"), p.d_ae)?.powf(alpha);
            let dbe_a = check(&format!("pair {n} B-Eve"), p.d_be)?.powf(alpha);
            let irs_ab = gu * gu * s2 / (da_a * db_a);
            Ok(PairPathloss {
                irs_ab,
                irs_ba: irs_ab,
                irs_aa: gu * gu * s2 / (da_a * da_a),
                irs_bb: gu * gu * s2 / (db_a * db_a),
                irs_ae: gu * ge * s2 / (de_a * da_a),
                irs_be: gu * ge * s2 / (de_a * db_a),
                dir_ae: gu * ge / dae_a,
                dir_be: gu * ge / dbe_a,
                relay_ar: gu * gu / da_a,
                relay_br: gu * gu / db_a,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PathlossSet {
        pairs,
        relay_re: gu * ge / de_a,
    })
}
