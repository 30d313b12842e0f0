//! Report aggregation: groups result rows by (method, sigma) and by
//! (method, raw-parallax bin) and reduces each group to means, medians,
//! over/under-estimation statistics and rejection counts.
//!
//! Statistics follow the discard policy of the evaluation protocol:
//! error moments are computed over adequate rows only (the rejection rate
//! reports what was excluded), and 2D moments additionally skip
//! behind-camera rows, which carry an infinite sentinel and are counted in
//! `n_behind`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use twoview_core::{Method, Norm};

use crate::dataset::fmt_f64;
use crate::records::ResultRow;
use crate::HarnessError;

/// Raw-parallax bin edges in degrees; a value falls in bin `i` when
/// `edges[i] <= beta < edges[i+1]` (the last bin includes its upper edge).
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    edges_deg: Vec<f64>,
}

impl Binning {
    pub fn new(edges_deg: Vec<f64>) -> Result<Self, HarnessError> {
        if edges_deg.len() < 2 || edges_deg.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Usage(
                "bin edges must be at least two strictly increasing values".into(),
            ));
        }
        Ok(Self { edges_deg })
    }

    pub fn reference() -> Self {
        Self { edges_deg: vec![0.0, 2.0, 4.0, 90.0] }
    }

    pub fn len(&self) -> usize {
        self.edges_deg.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self, bin: usize) -> (f64, f64) {
        (self.edges_deg[bin], self.edges_deg[bin + 1])
    }

    pub fn index_of(&self, beta_deg: f64) -> Option<usize> {
        let last = self.len() - 1;
        if beta_deg == self.edges_deg[last + 1] {
            return Some(last);
        }
        (0..self.len()).find(|&i| self.edges_deg[i] <= beta_deg && beta_deg < self.edges_deg[i + 1])
    }
}

/// Which dimension a report row is grouped over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Sigma,
    Parallax,
}

impl GroupKind {
    fn name(self) -> &'static str {
        match self {
            GroupKind::Sigma => "sigma",
            GroupKind::Parallax => "parallax",
        }
    }
}

/// Reduced statistics for one (group, method) pair. Means of empty
/// selections are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub group: GroupKind,
    pub sigma: Option<f64>,
    pub bin_deg: Option<(f64, f64)>,
    pub method: Method,
    pub n: usize,
    pub n_adequate: usize,
    pub n_rejected: usize,
    pub n_behind: usize,
    pub mean_e3d: f64,
    pub median_e3d: f64,
    pub mean_d0: f64,
    pub mean_d1: f64,
    pub mean_e_l1: f64,
    pub median_e_l1: f64,
    pub mean_e_l2: f64,
    pub median_e_l2: f64,
    pub mean_e_linf: f64,
    pub median_e_linf: f64,
    pub mean_beta_err_deg: f64,
    pub median_beta_err_deg: f64,
    pub over_freq: f64,
    pub under_freq: f64,
    pub mean_over_deg: f64,
    pub mean_under_deg: f64,
    pub rejection_rate: f64,
}

impl AggregateRow {
    pub fn mean_2d(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.mean_e_l1,
            Norm::L2 => self.mean_e_l2,
            Norm::LInf => self.mean_e_linf,
        }
    }

    pub fn median_2d(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.median_e_l1,
            Norm::L2 => self.median_e_l2,
            Norm::LInf => self.median_e_linf,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn reduce(
    group: GroupKind,
    sigma: Option<f64>,
    bin_deg: Option<(f64, f64)>,
    method: Method,
    rows: &[&ResultRow],
) -> AggregateRow {
    let n = rows.len();
    let adequate: Vec<&&ResultRow> = rows.iter().filter(|r| r.adequate).collect();
    let n_adequate = adequate.len();
    let n_rejected = n - n_adequate;

    let collect = |f: &dyn Fn(&ResultRow) -> f64| -> Vec<f64> {
        adequate.iter().map(|r| f(r)).filter(|v| v.is_finite()).collect()
    };

    let e3d = collect(&|r| r.e3d);
    let d0 = collect(&|r| r.d0);
    let d1 = collect(&|r| r.d1);
    let l1 = collect(&|r| r.e_l1);
    let l2 = collect(&|r| r.e_l2);
    let linf = collect(&|r| r.e_linf);
    let beta_err = collect(&|r| r.beta_signed_err_deg.abs());
    let n_behind = adequate.iter().filter(|r| !r.e_l2.is_finite()).count();

    let signed: Vec<f64> = collect(&|r| r.beta_signed_err_deg);
    let over: Vec<f64> = signed.iter().copied().filter(|&v| v > 0.0).collect();
    let under: Vec<f64> = signed.iter().map(|v| -v).filter(|&v| v > 0.0).collect();
    let n_signed = signed.len();

    let (mut e3d_m, mut l1_m, mut l2_m, mut linf_m, mut beta_m) =
        (e3d.clone(), l1.clone(), l2.clone(), linf.clone(), beta_err.clone());

    AggregateRow {
        group,
        sigma,
        bin_deg,
        method,
        n,
        n_adequate,
        n_rejected,
        n_behind,
        mean_e3d: mean(&e3d),
        median_e3d: median(&mut e3d_m),
        mean_d0: mean(&d0),
        mean_d1: mean(&d1),
        mean_e_l1: mean(&l1),
        median_e_l1: median(&mut l1_m),
        mean_e_l2: mean(&l2),
        median_e_l2: median(&mut l2_m),
        mean_e_linf: mean(&linf),
        median_e_linf: median(&mut linf_m),
        mean_beta_err_deg: mean(&beta_err),
        median_beta_err_deg: median(&mut beta_m),
        over_freq: if n_signed == 0 { f64::NAN } else { over.len() as f64 / n_signed as f64 },
        under_freq: if n_signed == 0 { f64::NAN } else { under.len() as f64 / n_signed as f64 },
        mean_over_deg: mean(&over),
        mean_under_deg: mean(&under),
        rejection_rate: if n == 0 { f64::NAN } else { n_rejected as f64 / n as f64 },
    }
}

/// Builds the full report: (method, sigma) groups first, then
/// (method, parallax-bin) groups. Empty groups are omitted.
pub fn aggregate(rows: &[ResultRow], bins: &Binning) -> Vec<AggregateRow> {
    let methods: Vec<Method> =
        Method::ALL.into_iter().filter(|m| rows.iter().any(|r| r.method == *m)).collect();
    let mut sigmas: Vec<f64> = Vec::new();
    for r in rows {
        if !sigmas.contains(&r.sigma) {
            sigmas.push(r.sigma);
        }
    }
    sigmas.sort_by(|a, b| a.partial_cmp(b).expect("finite sigma"));

    let mut out = Vec::new();
    for &method in &methods {
        for &sigma in &sigmas {
            let selected: Vec<&ResultRow> =
                rows.iter().filter(|r| r.method == method && r.sigma == sigma).collect();
            if !selected.is_empty() {
                out.push(reduce(GroupKind::Sigma, Some(sigma), None, method, &selected));
            }
        }
    }
    for &method in &methods {
        for bin in 0..bins.len() {
            let selected: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.method == method && bins.index_of(r.beta_raw_deg) == Some(bin))
                .collect();
            if !selected.is_empty() {
                out.push(reduce(GroupKind::Parallax, None, Some(bins.bounds(bin)), method, &selected));
            }
        }
    }
    out
}

pub const REPORT_HEADER: &str = "group,config,d,sigma,bin_lo_deg,bin_hi_deg,method,n,\
n_adequate,n_rejected,n_behind,mean_e3d,median_e3d,mean_d0,mean_d1,\
mean_e_l1,median_e_l1,mean_e_l2,median_e_l2,mean_e_linf,median_e_linf,\
mean_2d,median_2d,mean_beta_err_deg,median_beta_err_deg,\
over_freq,under_freq,mean_over_deg,mean_under_deg,rejection_rate";

/// Writes the aggregate rows as CSV. The `norm` argument selects which 2D
/// norm fills the `mean_2d`/`median_2d` convenience columns; all three
/// norms are always emitted as well. The grouped-over dimensions (config,
/// d) are collapsed and reported as `all`.
pub fn write_report(path: &Path, rows: &[AggregateRow], norm: Norm) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{REPORT_HEADER}")?;
    for r in rows {
        let sigma = r.sigma.map(fmt_f64).unwrap_or_default();
        let (lo, hi) = match r.bin_deg {
            Some((lo, hi)) => (fmt_f64(lo), fmt_f64(hi)),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},all,all,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.group.name(),
            sigma,
            lo,
            hi,
            r.method,
            r.n,
            r.n_adequate,
            r.n_rejected,
            r.n_behind,
            fmt_f64(r.mean_e3d),
            fmt_f64(r.median_e3d),
            fmt_f64(r.mean_d0),
            fmt_f64(r.mean_d1),
            fmt_f64(r.mean_e_l1),
            fmt_f64(r.median_e_l1),
            fmt_f64(r.mean_e_l2),
            fmt_f64(r.median_e_l2),
            fmt_f64(r.mean_e_linf),
            fmt_f64(r.median_e_linf),
            fmt_f64(r.mean_2d(norm)),
            fmt_f64(r.median_2d(norm)),
            fmt_f64(r.mean_beta_err_deg),
            fmt_f64(r.median_beta_err_deg),
            fmt_f64(r.over_freq),
            fmt_f64(r.under_freq),
            fmt_f64(r.mean_over_deg),
            fmt_f64(r.mean_under_deg),
            fmt_f64(r.rejection_rate),
        )?;
    }
    w.flush()?;
    Ok(())
}
