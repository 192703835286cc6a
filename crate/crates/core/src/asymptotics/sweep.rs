use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict_log_energy, predict_riesz_energy};
use crate::cache;
use crate::designs::{construct_design, default_point_count, ConstructOptions};
use crate::energy::{energy, kind_fields, EnergyKind, EnergyOptions};
use crate::error::{invalid, Result};
use crate::geom::{fibonacci_sphere, load_point_set, min_separation, random_uniform, PointSet};

/// Where the point sets of a sweep come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PointSource {
    /// Designs built by [`construct_design`] (strength ranges only).
    Constructed {
        seed: u64,
        options: ConstructOptions,
    },
    /// Files named by a template in which `{t}` or `{N}` is replaced.
    Files { template: String },
    /// Spherical Fibonacci lattices (S² only).
    Fibonacci,
    /// Independent uniform points.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRange {
    /// Design strengths `t`; the point count follows from the point factor.
    Strengths(Vec<usize>),
    /// Point counts `N`, without a design strength.
    Counts(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub d: usize,
    pub kinds: Vec<EnergyKind>,
    pub source: PointSource,
    pub range: SweepRange,
    /// `c` in `N = ceil(c (t + 1)^d)` for strength ranges.
    pub point_factor: f64,
    pub energy: EnergyOptions,
    /// Constructed designs are stored here and reused when present.
    pub cache_dir: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(d: usize, kinds: Vec<EnergyKind>, source: PointSource, range: SweepRange) -> Self {
        Self {
            d,
            kinds,
            source,
            range,
            point_factor: 1.0,
            energy: EnergyOptions::default(),
            cache_dir: None,
        }
    }
}

/// One configuration of a sweep before its point set is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepItem {
    pub t: Option<usize>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: Option<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub kind: String,
    pub s: Option<f64>,
    pub measured: Option<f64>,
    pub leading: Option<f64>,
    pub second: Option<f64>,
    pub residual: Option<f64>,
    pub min_separation: Option<f64>,
    pub source: String,
    pub error: Option<String>,
}

impl SweepRecord {
    pub const CSV_HEADER: [&'static str; 12] = [
        "t",
        "N",
        "d",
        "kind",
        "s",
        "measured",
        "leading",
        "second",
        "residual",
        "min_separation",
        "source",
        "error",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        vec![
            opt(&self.t),
            self.n.to_string(),
            self.d.to_string(),
            self.kind.clone(),
            opt(&self.s),
            opt(&self.measured),
            opt(&self.leading),
            opt(&self.second),
            opt(&self.residual),
            opt(&self.min_separation),
            self.source.clone(),
            opt(&self.error),
        ]
    }

    /// `measured / leading`, e.g. `E_s N^{-(1+s/d)}` for bound-only kinds.
    pub fn normalized(&self) -> Option<f64> {
        Some(self.measured? / self.leading?)
    }
}

fn items(config: &SweepConfig) -> Result<Vec<SweepItem>> {
    let items: Vec<SweepItem> = match &config.range {
        SweepRange::Strengths(ts) => ts
            .iter()
            .map(|&t| SweepItem {
                t: Some(t),
                n: default_point_count(config.d, t, config.point_factor),
            })
            .collect(),
        SweepRange::Counts(ns) => {
            if matches!(config.source, PointSource::Constructed { .. }) {
                return Err(invalid(
                    "constructed designs are swept over strengths t, not counts N",
                ));
            }
            ns.iter().map(|&n| SweepItem { t: None, n }).collect()
        }
    };
    if items.is_empty() {
        return Err(invalid("sweep range is empty"));
    }
    if config.kinds.is_empty() {
        return Err(invalid("sweep needs at least one energy kind"));
    }
    Ok(items)
}

fn resolve(config: &SweepConfig, item: SweepItem) -> Result<(PointSet, String)> {
    let d = config.d;
    match &config.source {
        PointSource::Constructed { seed, options } => {
            let t = item.t.expect("constructed items carry t");
            let key = cache::content_key(&("design", d, t, item.n, seed, options))?;
            let label = format!("constructed:t={t}:seed={seed}");
            if let Some(dir) = &config.cache_dir {
                let path = dir.join(format!("design-{key}.txt"));
                if path.exists() {
                    return Ok((load_point_set(&path, d)?, label));
                }
            }
            let out = construct_design(d, t, Some(item.n), *seed, *options)?;
            let points = out.points().clone();
            if let Some(dir) = &config.cache_dir {
                cache::store_design(dir, &key, &out)?;
            }
            Ok((points, label))
        }
        PointSource::Files { template } => {
            let path = match item.t {
                Some(t) => template.replace("{t}", &t.to_string()),
                None => template.replace("{N}", &item.n.to_string()),
            };
            Ok((load_point_set(&path, d)?, path))
        }
        PointSource::Fibonacci => {
            if d != 2 {
                return Err(invalid("Fibonacci lattices exist only on S^2"));
            }
            Ok((fibonacci_sphere(item.n)?, "fibonacci".into()))
        }
        PointSource::Random { seed } => Ok((
            random_uniform(d, item.n, seed.wrapping_add(item.n as u64))?,
            format!("random:seed={seed}"),
        )),
    }
}

fn record_for(
    config: &SweepConfig,
    item: SweepItem,
    kind: EnergyKind,
    resolved: &Result<(PointSet, String)>,
    sep: Option<f64>,
) -> SweepRecord {
    let (kind_name, s) = kind_fields(&kind);
    let mut rec = SweepRecord {
        t: item.t,
        n: item.n,
        d: config.d,
        kind: kind_name,
        s: s.parse().ok(),
        measured: None,
        leading: None,
        second: None,
        residual: None,
        min_separation: sep,
        source: String::new(),
        error: None,
    };
    let (points, label) = match resolved {
        Ok(p) => p,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.source = label.clone();
    rec.n = points.len();
    let mut run = || -> Result<()> {
        let measured = energy(points, kind, config.energy)?.value;
        rec.measured = Some(measured);
        let pred = match kind {
            EnergyKind::Log => predict_log_energy(config.d, points.len())?,
            EnergyKind::Riesz { s } => predict_riesz_energy(config.d, s, points.len(), item.t)?,
        };
        rec.leading = Some(pred.leading_term);
        rec.second = Some(pred.second_term);
        rec.residual = Some(measured - pred.predicted);
        Ok(())
    };
    if let Err(e) = run() {
        rec.error = Some(e.to_string());
    }
    rec
}

/// Runs every configuration of the sweep (in parallel) and returns one
/// record per configuration and energy kind, in range order. Failures are
/// recorded in the `error` field and do not stop the sweep.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let items = items(config)?;
    if let Some(dir) = &config.cache_dir {
        std::fs::create_dir_all(dir).map_err(|source| crate::Error::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let nested: Vec<Vec<SweepRecord>> = items
        .par_iter()
        .map(|&item| {
            let resolved = resolve(config, item);
            let sep = resolved
                .as_ref()
                .ok()
                .and_then(|(p, _)| (p.len() >= 2).then(|| min_separation(p).ok()).flatten());
            config
                .kinds
                .iter()
                .map(|&kind| record_for(config, item, kind, &resolved, sep))
                .collect()
        })
        .collect();
    Ok(nested.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_range_is_an_error() {
        let c = SweepConfig::new(
            2,
            vec![EnergyKind::Log],
            PointSource::Fibonacci,
            SweepRange::Counts(vec![]),
        );
        assert!(sweep(&c).is_err());
    }

    #[test]
    fn missing_file_becomes_record_error() {
        let c = SweepConfig::new(
            2,
            vec![EnergyKind::Log],
            PointSource::Files {
                template: "/nonexistent/pts-{N}.txt".into(),
            },
            SweepRange::Counts(vec![10, 20]),
        );
        let recs = sweep(&c).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs
            .iter()
            .all(|r| r.error.is_some() && r.measured.is_none()));
    }

    #[test]
    fn fibonacci_sweep_records() {
        let c = SweepConfig::new(
            2,
            vec![EnergyKind::Log, EnergyKind::Riesz { s: 3.0 }],
            PointSource::Fibonacci,
            SweepRange::Counts(vec![50, 100]),
        );
        let recs = sweep(&c).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(recs[0].kind, "log");
        assert_eq!(recs[1].s, Some(3.0));
        assert!(recs.iter().all(|r| r.error.is_none()));
        assert_eq!(recs[0].csv_record().len(), SweepRecord::CSV_HEADER.len());
    }
}
