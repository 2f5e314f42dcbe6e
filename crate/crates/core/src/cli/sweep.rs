//! One-dimensional parameter sweeps and the figure presets built on them.

use crate::analytic::{scaling_reference, theorem1_bounds, ScalingKind};
use crate::error::{Error, Result};
use crate::model::{dbm_to_watt, keyword_enum, LogBase};
use crate::montecarlo::{run_campaign, CampaignConfig, GeometryMode, Quantity};
use crate::schemes::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PowerDbm,
    Elements,
    Pairs,
}

keyword_enum!(SweepAxis { PowerDbm => "power_dbm", Elements => "elements", Pairs => "pairs" });

impl SweepAxis {
    /// CSV header of the axis column, unit included.
    pub fn header(self) -> &'static str {
        match self {
            SweepAxis::PowerDbm => "power_dbm",
            SweepAxis::Elements => "elements_count",
            SweepAxis::Pairs => "pairs_count",
        }
    }

    fn scaling_kind(self) -> ScalingKind {
        match self {
            SweepAxis::PowerDbm => ScalingKind::Power,
            SweepAxis::Elements => ScalingKind::Elements,
            SweepAxis::Pairs => ScalingKind::Pairs,
        }
    }

    /// Abscissa handed to the scaling reference.
    fn reference_x(self, v: f64) -> f64 {
        match self {
            SweepAxis::PowerDbm => dbm_to_watt(v),
            _ => v,
        }
    }

    pub fn apply(self, config: &mut CampaignConfig, value: f64) -> Result<()> {
        let count = |name: &'static str| -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidParam {
                    name,
                    reason: format!("sweep value {value} is not a positive integer"),
                })
            }
        };
        match self {
            SweepAxis::PowerDbm => config.params.power_dbm = value,
            SweepAxis::Elements => config.params.elements = count("elements")?,
            SweepAxis::Pairs => config.params.pairs = count("pairs")?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: CampaignConfig,
    /// Adds the closed-form bounds, evaluated at the disc centers.
    pub include_analytic: bool,
    /// Adds the high-SNR sum-rate reference through the proposed scheme's
    /// simulated value at this axis value.
    pub reference_anchor: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParam {
                name: "values",
                reason: "sweep needs at least one value".into(),
            });
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam {
                name: "values",
                reason: "sweep values must be strictly increasing".into(),
            });
        }
        if let Some(a) = self.reference_anchor {
            if !self.values.contains(&a) {
                return Err(Error::InvalidParam {
                    name: "reference_anchor",
                    reason: format!("{a} is not on the sweep grid"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub scheme: Scheme,
    pub rate_s1: f64,
    pub rate_s2: f64,
    pub sum: f64,
    /// 95% half-width of `sum`.
    pub ci95: f64,
    pub bound_s1: Option<f64>,
    pub bound_s2: Option<f64>,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub log_base: LogBase,
    pub include_analytic: bool,
    pub include_reference: bool,
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let unit = spec.base.params.log_base.from_nats();
    let mut rows = Vec::new();
    for &v in &spec.values {
        let mut cfg = spec.base.clone();
        spec.axis.apply(&mut cfg, v)?;
        let report = run_campaign(&cfg)?;
        let bound = if spec.include_analytic {
            Some(theorem1_bounds(&cfg.params, &cfg.fixed_geometry())?)
        } else {
            None
        };
        for scheme in &cfg.schemes {
            if rows.iter().any(|r: &SweepRow| r.axis_value == v && r.scheme == *scheme) {
                continue;
            }
            let get = |q| report.estimate(*scheme, q).expect("every scheme has every quantity");
            let sum = get(Quantity::Sum);
            let proposed_bound = bound.filter(|_| *scheme == Scheme::Proposed);
            rows.push(SweepRow {
                axis_value: v,
                scheme: *scheme,
                rate_s1: get(Quantity::RateS1).mean,
                rate_s2: get(Quantity::RateS2).mean,
                sum: sum.mean,
                ci95: sum.ci95_halfwidth,
                bound_s1: proposed_bound.map(|b| b.r_s1 * unit),
                bound_s2: proposed_bound.map(|b| b.r_s2 * unit),
                reference: None,
            });
        }
    }

    if let Some(anchor) = spec.reference_anchor {
        let anchor_y = rows
            .iter()
            .find(|r| r.axis_value == anchor && r.scheme == Scheme::Proposed)
            .map(|r| r.sum)
            .ok_or_else(|| Error::InvalidParam {
                name: "reference_anchor",
                reason: "the reference is anchored to the proposed scheme, which is not in the sweep".into(),
            })?;
        let xs: Vec<f64> = spec.values.iter().map(|&v| spec.axis.reference_x(v)).collect();
        let refs = scaling_reference(
            spec.axis.scaling_kind(),
            &xs,
            (spec.axis.reference_x(anchor), anchor_y),
            2.0 * unit,
        )?;
        for row in rows.iter_mut().filter(|r| r.scheme == Scheme::Proposed) {
            let i = spec
                .values
                .iter()
                .position(|&v| v == row.axis_value)
                .expect("row value is on the grid");
            row.reference = Some(refs[i]);
        }
    }

    Ok(SweepTable {
        axis: spec.axis,
        log_base: spec.base.params.log_base,
        include_analytic: spec.include_analytic,
        include_reference: spec.reference_anchor.is_some(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Sum rate against transmit power, K = 32, N = 10.
    Fig1,
    /// Sum rate against element count, P = 20 dBm, N = 6.
    Fig2,
    /// Sum rate against pair count, P = 30 dBm, K = 32.
    Fig3,
}

keyword_enum!(FigurePreset { Fig1 => "fig1", Fig2 => "fig2", Fig3 => "fig3" });

impl FigurePreset {
    pub const ALL: [FigurePreset; 3] = [FigurePreset::Fig1, FigurePreset::Fig2, FigurePreset::Fig3];

    /// Builds the sweep on top of `base`, overriding only the figure's axes.
    pub fn spec(self, base: &CampaignConfig) -> SweepSpec {
        let mut cfg = base.clone();
        let (axis, values, anchor) = match self {
            FigurePreset::Fig1 => {
                cfg.params.elements = 32;
                cfg.params.pairs = 10;
                (
                    SweepAxis::PowerDbm,
                    (0..=8).map(|i| 5.0 * i as f64).collect::<Vec<_>>(),
                    40.0,
                )
            }
            FigurePreset::Fig2 => {
                cfg.params.power_dbm = 20.0;
                cfg.params.pairs = 6;
                (SweepAxis::Elements, vec![16.0, 32.0, 64.0, 128.0, 256.0], 64.0)
            }
            FigurePreset::Fig3 => {
                cfg.params.power_dbm = 30.0;
                cfg.params.elements = 32;
                (SweepAxis::Pairs, (1..=7).map(|i| 2f64.powi(i)).collect(), 2.0)
            }
        };
        SweepSpec {
            axis,
            values,
            base: cfg,
            include_analytic: true,
            reference_anchor: Some(anchor),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            FigurePreset::Fig1 => "Sum secrecy rate vs transmit power (K = 32, N = 10)",
            FigurePreset::Fig2 => "Sum secrecy rate vs reflecting elements (P = 20 dBm, N = 6)",
            FigurePreset::Fig3 => "Sum secrecy rate vs user pairs (P = 30 dBm, K = 32)",
        }
    }
}

/// Default base configuration for presets: random geometry, output in bits.
pub fn preset_base() -> CampaignConfig {
    let mut c = CampaignConfig {
        geometry_mode: GeometryMode::RandomDisc,
        ..CampaignConfig::default()
    };
    c.params.log_base = LogBase::Bits;
    c
}
