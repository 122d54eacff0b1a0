//! Benchmark harness: runs a list of named configurations on one image and
//! writes the results table plus the box-counting threshold sweep.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use crate::boxcount::BoxCountConfig;
use crate::codec::{decode, encode, serialize, CodecConfig};
use crate::error::{FicError, Result};
use crate::image_io::Image;
use crate::metrics::MetricsReport;
use crate::transform::CandidateSet;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedConfig {
    pub name: String,
    pub config: CodecConfig,
}

impl NamedConfig {
    pub fn new(name: impl Into<String>, config: CodecConfig) -> Self {
        Self {
            name: name.into(),
            config,
        }
    }
}

/// Threshold grid for the box-counting sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub t1: Vec<u8>,
    pub t2: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            t1: vec![30, 50],
            t2: vec![0.5, 1.6, 1.7, 1.8, 1.9, 2.0],
        }
    }
}

fn sweep_name(t1: u8, t2: f64) -> String {
    format!("box-t1={t1}-t2={t2}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub configs: Vec<NamedConfig>,
    pub sweep: Sweep,
}

impl BenchSpec {
    /// The standard table set on top of `base`: original, remove-direction,
    /// contrast-4bit, the `t1`×`t2` sweep, and the integrated configuration
    /// (all three optimizations with box counting at `integrated`).
    pub fn standard(base: &CodecConfig, sweep: Sweep, integrated: (u8, f64)) -> Result<Self> {
        let box_cfg = |t1: u8, t2: f64| BoxCountConfig::with_default_sizes(t1, t2, base.dest_size);
        let mut configs = vec![
            NamedConfig::new("original", base.clone()),
            NamedConfig::new(
                "remove-direction",
                CodecConfig {
                    candidates: CandidateSet::REDUCED,
                    ..base.clone()
                },
            ),
            NamedConfig::new(
                "contrast-4bit",
                CodecConfig {
                    contrast_bits: 4,
                    ..base.clone()
                },
            ),
        ];
        for &t1 in &sweep.t1 {
            for &t2 in &sweep.t2 {
                configs.push(NamedConfig::new(
                    sweep_name(t1, t2),
                    CodecConfig {
                        box_counting: Some(box_cfg(t1, t2)?),
                        ..base.clone()
                    },
                ));
            }
        }
        configs.push(NamedConfig::new(
            "integrated",
            CodecConfig {
                candidates: CandidateSet::REDUCED,
                contrast_bits: 4,
                box_counting: Some(box_cfg(integrated.0, integrated.1)?),
                ..base.clone()
            },
        ));
        let spec = Self { configs, sweep };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.configs.is_empty() {
            return Err(FicError::InvalidConfig("no benchmark configurations".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.configs {
            if !seen.insert(c.name.as_str()) {
                return Err(FicError::InvalidConfig(format!(
                    "duplicate configuration name {:?}",
                    c.name
                )));
            }
        }
        if let Some(t2) = self.sweep.t2.iter().find(|t| !(0.0..=2.0).contains(*t)) {
            return Err(FicError::InvalidConfig(format!("sweep t2 {t2} outside [0, 2]")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub name: String,
    pub outcome: std::result::Result<MetricsReport, String>,
}

/// Encodes, decodes and scores one configuration.
pub fn run_one(img: &Image, named: &NamedConfig) -> Result<MetricsReport> {
    let start = Instant::now();
    let stream = encode(img, &named.config)?;
    let seconds = start.elapsed().as_secs_f64();
    let decoded = decode(&stream, None)?;
    MetricsReport::new(
        named.name.clone(),
        img,
        &decoded,
        &stream,
        serialize(&stream).len(),
        &named.config,
        seconds,
    )
}

/// Runs every configuration; failures are kept as rows.
pub fn run(img: &Image, spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    Ok(spec
        .configs
        .iter()
        .map(|named| BenchRow {
            name: named.name.clone(),
            outcome: run_one(img, named).map_err(|e| e.to_string()),
        })
        .collect())
}

/// `name,CR,RMSE,transform_count,time_seconds,status`.
pub fn write_results<W: Write>(rows: &[BenchRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "CR", "RMSE", "transform_count", "time_seconds", "status"])?;
    for row in rows {
        match &row.outcome {
            Ok(r) => {
                let (cr, status) = match r.compression_ratio {
                    Some(cr) => (format!("{cr:.2}"), "ok".to_string()),
                    None => (String::new(), "error: no transformations stored".to_string()),
                };
                w.write_record([
                    row.name.clone(),
                    cr,
                    format!("{:.2}", r.rmse),
                    r.transform_count.to_string(),
                    format!("{:.3}", r.encode_seconds),
                    status,
                ])?;
            }
            Err(e) => w.write_record([
                row.name.as_str(),
                "",
                "",
                "",
                "",
                &format!("error: {e}"),
            ])?,
        }
    }
    w.flush()
}

/// One block per `t1`: rows `CR`, `RMSE`, `transform_count`; one column per `t2`.
pub fn write_sweep<W: Write>(rows: &[BenchRow], sweep: &Sweep, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t1".to_string(), "metric".to_string()];
    header.extend(sweep.t2.iter().map(|t2| format!("t2={t2}")));
    w.write_record(&header)?;
    let lookup = |t1: u8, t2: f64| {
        let name = sweep_name(t1, t2);
        rows.iter()
            .find(|r| r.name == name)
            .and_then(|r| r.outcome.as_ref().ok())
    };
    type Cell = fn(&MetricsReport) -> String;
    let metrics: [(&str, Cell); 3] = [
        ("CR", |r| r.compression_ratio.map(|v| format!("{v:.2}")).unwrap_or_default()),
        ("RMSE", |r| format!("{:.2}", r.rmse)),
        ("transform_count", |r| r.transform_count.to_string()),
    ];
    for &t1 in &sweep.t1 {
        for (label, cell) in &metrics {
            let mut record = vec![t1.to_string(), label.to_string()];
            record.extend(
                sweep
                    .t2
                    .iter()
                    .map(|&t2| lookup(t1, t2).map(cell).unwrap_or_default()),
            );
            w.write_record(&record)?;
        }
    }
    w.flush()
}
