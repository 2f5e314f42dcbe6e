//! Flat TOML configuration documents.
//!
//! Keys are the field names of the system parameters, the disc layout and
//! the campaign settings. Positions are two-element arrays in meters.
//!
//! ```toml
//! power_dbm = 20
//! elements = 64
//! eve_pos = [15.0, 30.0]
//! schemes = ["proposed", "oneway_jam"]
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::Point;
use crate::montecarlo::CampaignConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    power_dbm: Option<f64>,
    elements: Option<usize>,
    pairs: Option<usize>,
    quad_order: Option<usize>,
    noise_dbm: Option<f64>,
    rli_dbm: Option<f64>,
    pathloss_exp: Option<f64>,
    gain_user_dbi: Option<f64>,
    gain_eve_dbi: Option<f64>,
    element_area_m2: Option<f64>,
    rli_mode: Option<String>,
    log_base: Option<String>,
    irs_pos: Option<[f64; 2]>,
    eve_pos: Option<[f64; 2]>,
    disc_a_center: Option<[f64; 2]>,
    disc_b_center: Option<[f64; 2]>,
    disc_radius: Option<f64>,
    geometry_mode: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    schemes: Option<Vec<String>>,
    estimator: Option<String>,
    workers: Option<usize>,
}

fn keyword<T: FromStr<Err = Error>>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|e: Error| Error::Config(format!("{key}: {e}")))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Parses a document on top of the built-in defaults.
pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    parse_config_with(text, CampaignConfig::default())
}

/// Parses a document; keys it does not mention keep their value in `base`.
pub fn parse_config_with(text: &str, base: CampaignConfig) -> Result<CampaignConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_owned()))?;
    let mut c = base;
    let p = &mut c.params;
    set(&mut p.power_dbm, doc.power_dbm);
    set(&mut p.elements, doc.elements);
    set(&mut p.pairs, doc.pairs);
    set(&mut p.quad_order, doc.quad_order);
    set(&mut p.noise_dbm, doc.noise_dbm);
    set(&mut p.rli_dbm, doc.rli_dbm);
    set(&mut p.pathloss_exp, doc.pathloss_exp);
    set(&mut p.gain_user_dbi, doc.gain_user_dbi);
    set(&mut p.gain_eve_dbi, doc.gain_eve_dbi);
    set(&mut p.element_area_m2, doc.element_area_m2);
    if let Some(v) = doc.rli_mode {
        p.rli_mode = keyword("rli_mode", &v)?;
    }
    if let Some(v) = doc.log_base {
        p.log_base = keyword("log_base", &v)?;
    }
    let point = |v: Option<[f64; 2]>| v.map(|[x, y]| Point::new(x, y));
    let l = &mut c.layout;
    set(&mut l.irs_pos, point(doc.irs_pos));
    set(&mut l.eve_pos, point(doc.eve_pos));
    set(&mut l.disc_a_center, point(doc.disc_a_center));
    set(&mut l.disc_b_center, point(doc.disc_b_center));
    set(&mut l.disc_radius, doc.disc_radius);
    if let Some(v) = doc.geometry_mode {
        c.geometry_mode = keyword("geometry_mode", &v)?;
    }
    set(&mut c.trials, doc.trials);
    set(&mut c.seed, doc.seed);
    if let Some(v) = doc.schemes {
        c.schemes = v.iter().map(|s| keyword("schemes", s)).collect::<Result<_>>()?;
    }
    if let Some(v) = doc.estimator {
        c.estimator = keyword("estimator", &v)?;
    }
    set(&mut c.workers, doc.workers);
    if !(c.layout.disc_radius >= 0.0 && c.layout.disc_radius.is_finite()) {
        return Err(Error::InvalidParam {
            name: "disc_radius",
            reason: format!("{} is negative", c.layout.disc_radius),
        });
    }
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: &Path, base: CampaignConfig) -> Result<CampaignConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_with(&text, base).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
