//! Runs methods over workloads and records per-step metrics.

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{oracle_betti_limited, BaselineMethod, BaselineRunner, Computed};
use crate::benchgen::Workload;
use crate::betti::Betti;
use crate::engine::{Engine, EngineConfig, StepReport};
use crate::error::{EngineError, OracleError};
use crate::MAX_DIM;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Mmhm,
    Baseline(BaselineMethod),
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mmhm,
        Method::Baseline(BaselineMethod::Full),
        Method::Baseline(BaselineMethod::Coreduction),
        Method::Baseline(BaselineMethod::StaticPh),
        Method::Baseline(BaselineMethod::Oracle),
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Mmhm => "mmhm",
            Method::Baseline(b) => b.label(),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| {
                format!(
                    "unknown method {s:?} (expected mmhm, full, coreduction, static-ph or oracle)"
                )
            })
    }
}

/// One CSV row. Step 0 is initialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub step: u64,
    pub method: String,
    pub latency_ns: u64,
    pub beta0: usize,
    pub beta1: usize,
    pub beta2: usize,
    pub beta3: usize,
    pub rho: Option<f64>,
    pub recompressed: Option<bool>,
    pub trigger: Option<String>,
    pub gated: Option<bool>,
    pub touched_columns: Option<usize>,
    pub critical_total: Option<usize>,
    pub nnz_total: Option<usize>,
}

pub const CSV_HEADER: &str = "step,method,latency_ns,beta0,beta1,beta2,beta3,rho,recompressed,trigger,gated,touched_columns,critical_total,nnz_total";

impl RunRecord {
    pub fn betti(&self) -> Betti {
        Betti([self.beta0, self.beta1, self.beta2, self.beta3])
    }

    fn base(step: u64, method: Method, latency_ns: u64, b: Betti) -> Self {
        Self {
            step,
            method: method.label().to_string(),
            latency_ns,
            beta0: b.0[0],
            beta1: b.0[1],
            beta2: b.0[2],
            beta3: b.0[3],
            rho: None,
            recompressed: None,
            trigger: None,
            gated: None,
            touched_columns: None,
            critical_total: None,
            nnz_total: None,
        }
    }

    fn from_engine(r: &StepReport, latency_ns: u64) -> Self {
        Self {
            rho: Some(r.rho),
            recompressed: Some(r.recompressed()),
            trigger: r.trigger.map(|t| t.label().to_string()),
            gated: Some(r.gated),
            touched_columns: Some(r.touched_columns),
            critical_total: Some(r.critical_total),
            nnz_total: Some(r.nnz_total),
            ..Self::base(r.t, Method::Mmhm, latency_ns, r.betti)
        }
    }

    fn from_baseline(step: u64, method: Method, c: &Computed, latency_ns: u64) -> Self {
        Self {
            critical_total: c.critical_total,
            nnz_total: (method != Method::Baseline(BaselineMethod::Oracle)).then_some(c.nnz_total),
            ..Self::base(step, method, latency_ns, c.betti)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("{method} at step {step}: reported {got:?}, oracle says {want:?}")]
    Mismatch {
        method: String,
        step: u64,
        got: Betti,
        want: Betti,
    },
    #[error("{method}: {source}")]
    Method {
        method: String,
        #[source]
        source: EngineError,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("compare needs at least two methods")]
    TooFewMethods,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub engine: EngineConfig,
    /// Check every step against the dense oracle (outside the timed region).
    pub verify: bool,
}

enum Runner {
    Mmhm(Box<Engine>),
    Baseline(Box<BaselineRunner>),
}

/// Replays `w` through `method`, timing initialization and each step.
pub fn run_method(
    method: Method,
    w: &Workload,
    opts: &RunOptions,
) -> Result<Vec<RunRecord>, RunError> {
    let wrap = |source: EngineError| RunError::Method {
        method: method.label().to_string(),
        source,
    };
    let mut records = Vec::with_capacity(w.steps() + 1);

    let start = Instant::now();
    let mut runner = match method {
        Method::Mmhm => Runner::Mmhm(Box::new(
            Engine::new(w.initial.clone(), opts.engine.clone()).map_err(wrap)?,
        )),
        Method::Baseline(b) => {
            let mut r = BaselineRunner::new(b, w.initial.clone());
            r.oracle_limit = opts.engine.oracle_limit;
            Runner::Baseline(Box::new(r))
        }
    };
    let first = match &runner {
        Runner::Mmhm(e) => {
            let ns = start.elapsed().as_nanos() as u64;
            RunRecord::from_engine(e.last_report(), ns)
        }
        Runner::Baseline(r) => {
            let c = r.compute().map_err(wrap)?;
            let ns = start.elapsed().as_nanos() as u64;
            RunRecord::from_baseline(0, method, &c, ns)
        }
    };
    records.push(first);

    for (i, e) in w.events.iter().enumerate() {
        let step = i as u64 + 1;
        let start = Instant::now();
        let rec = match &mut runner {
            Runner::Mmhm(engine) => {
                let r = engine.apply_update(e).map_err(wrap)?;
                RunRecord::from_engine(&r, start.elapsed().as_nanos() as u64)
            }
            Runner::Baseline(b) => {
                let c = b.step(e).map_err(wrap)?;
                RunRecord::from_baseline(step, method, &c, start.elapsed().as_nanos() as u64)
            }
        };
        records.push(rec);
    }

    if opts.verify {
        let mut k = w.initial.clone();
        for (i, rec) in records.iter().enumerate() {
            if i > 0 {
                k.apply_event(&w.events[i - 1])
                    .map_err(|e| wrap(e.into()))?;
            }
            let want = oracle_betti_limited(&k, opts.engine.oracle_limit)?;
            if rec.betti() != want {
                return Err(RunError::Mismatch {
                    method: method.label().to_string(),
                    step: rec.step,
                    got: rec.betti(),
                    want,
                });
            }
        }
    }
    Ok(records)
}

/// Runs every method on the same workload, one thread per method.
pub fn compare(
    methods: &[Method],
    w: &Workload,
    opts: &RunOptions,
) -> Result<Vec<Vec<RunRecord>>, RunError> {
    if methods.len() < 2 {
        return Err(RunError::TooFewMethods);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&m| scope.spawn(move || run_method(m, w, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("method thread panicked"))
            .collect()
    })
}

/// First step where two runs report different Betti numbers.
pub fn first_disagreement(runs: &[Vec<RunRecord>]) -> Option<(u64, Vec<(String, Betti)>)> {
    let first = runs.first()?;
    for (i, rec) in first.iter().enumerate() {
        let row: Vec<(String, Betti)> = runs
            .iter()
            .filter_map(|r| r.get(i).map(|x| (x.method.clone(), x.betti())))
            .collect();
        if row.iter().any(|(_, b)| *b != rec.betti()) {
            return Some((rec.step, row));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub method: String,
    pub steps: usize,
    pub total_ns: u64,
    /// Total time, initialization and rebuilds included, per update.
    pub amortized_ms: f64,
    /// Mean over update steps that did not recompress.
    pub mean_step_ms: f64,
    /// Updates per second, the reciprocal of the amortized time.
    pub throughput: f64,
    pub recompressions: usize,
}

pub fn summarize(records: &[RunRecord]) -> Summary {
    let steps = records.iter().filter(|r| r.step > 0).count();
    let total_ns: u64 = records.iter().map(|r| r.latency_ns).sum();
    let regular: Vec<u64> = records
        .iter()
        .filter(|r| r.step > 0 && r.recompressed != Some(true))
        .map(|r| r.latency_ns)
        .collect();
    let amortized_ms = total_ns as f64 / 1e6 / steps.max(1) as f64;
    let mean_step_ms = if regular.is_empty() {
        0.0
    } else {
        regular.iter().sum::<u64>() as f64 / 1e6 / regular.len() as f64
    };
    Summary {
        method: records
            .first()
            .map(|r| r.method.clone())
            .unwrap_or_default(),
        steps,
        total_ns,
        amortized_ms,
        mean_step_ms,
        throughput: if amortized_ms > 0.0 {
            1000.0 / amortized_ms
        } else {
            f64::INFINITY
        },
        recompressions: records
            .iter()
            .filter(|r| r.step > 0 && r.recompressed == Some(true))
            .count(),
    }
}

/// Fixed-width table; the last column divides each method's amortized time
/// by the first method's.
pub fn format_table(summaries: &[Summary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>7} {:>16} {:>16} {:>16} {:>8} {:>12}",
        "method", "steps", "amortized_ms", "mean_step_ms", "throughput/s", "rebuilds", "vs_first"
    );
    let base = summaries.first().map_or(1.0, |s| s.amortized_ms);
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<12} {:>7} {:>16.4} {:>16.4} {:>16.1} {:>8} {:>11.2}x",
            s.method,
            s.steps,
            s.amortized_ms,
            s.mean_step_ms,
            s.throughput,
            s.recompressions,
            if base > 0.0 {
                s.amortized_ms / base
            } else {
                0.0
            }
        );
    }
    out
}

pub fn write_csv<W: io::Write>(w: W, records: &[RunRecord]) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(r: R) -> Result<Vec<RunRecord>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Latency-per-step polylines for every run, above a step plot of the Betti
/// numbers of the first run.
pub fn render_svg(runs: &[Vec<RunRecord>], title: &str) -> String {
    let (w, h, pad) = (900.0, 300.0, 50.0);
    let total_h = 2.0 * h + 40.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{total_h}" viewBox="0 0 {w} {total_h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{pad}" y="20" font-size="14">{}</text>"#,
        escape(title)
    );

    let max_step = runs
        .iter()
        .flatten()
        .map(|r| r.step)
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let max_ms = runs
        .iter()
        .flatten()
        .map(|r| r.latency_ns as f64 / 1e6)
        .fold(0.0, f64::max)
        .max(1e-6);
    let x = |step: u64| pad + (w - 2.0 * pad) * step as f64 / max_step;

    // Latency panel.
    let top = 30.0;
    axes(
        &mut out,
        pad,
        top,
        w,
        h,
        "step",
        &format!("latency ms (max {max_ms:.3})"),
    );
    for (i, run) in runs.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = run
            .iter()
            .map(|r| {
                let y = top + h - pad - (h - 2.0 * pad) * (r.latency_ns as f64 / 1e6) / max_ms;
                format!("{:.1},{:.1}", x(r.step), y)
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        );
        if let Some(r) = run.first() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                w - pad - 100.0,
                top + 15.0 + 14.0 * i as f64,
                escape(&r.method)
            );
        }
    }

    // Betti panel.
    let top = h + 40.0;
    let empty = Vec::new();
    let run = runs.first().unwrap_or(&empty);
    let max_b = run
        .iter()
        .flat_map(|r| r.betti().0)
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    axes(
        &mut out,
        pad,
        top,
        w,
        h,
        "step",
        &format!("Betti (max {max_b})"),
    );
    for d in 0..=MAX_DIM {
        let color = PALETTE[d % PALETTE.len()];
        let y = |b: usize| top + h - pad - (h - 2.0 * pad) * b as f64 / max_b - d as f64 * 2.0;
        let mut pts = Vec::new();
        for (i, r) in run.iter().enumerate() {
            let b = r.betti().get(d);
            if i > 0 {
                pts.push(format!(
                    "{:.1},{:.1}",
                    x(r.step),
                    y(run[i - 1].betti().get(d))
                ));
            }
            pts.push(format!("{:.1},{:.1}", x(r.step), y(b)));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">beta{d}</text>"#,
            w - pad - 100.0,
            top + 15.0 + 14.0 * d as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

fn axes(out: &mut String, pad: f64, top: f64, w: f64, h: f64, xlabel: &str, ylabel: &str) {
    let (x0, y0, x1, y1) = (pad, top + h - pad, w - pad, top + pad);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">{}</text>"#,
        (x0 + x1) / 2.0,
        y0 + 30.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">{}</text>"#,
        x0,
        y1 - 8.0,
        escape(ylabel)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
