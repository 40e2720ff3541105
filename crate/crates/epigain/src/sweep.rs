//! Exhaustive evaluation of optima over a rectangular (s_l, s_p) grid.
//!
//! Cells are independent, so the sweep parallelizes across them (rayon,
//! behind the `parallel` feature); the output ordering is row-major by s_l
//! then s_p regardless of execution order, which keeps exports byte-stable
//! across worker counts.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::QuadratureConfig;
use crate::optimize::{self, OptimaRecord};

/// Inclusive arithmetic range over one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let range = Self { min, max, step };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "axis step must be positive, got {}",
                self.step
            )));
        }
        // Grid points are variances, so the axis must start above zero.
        if !(self.min.is_finite() && self.min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "axis minimum must be positive, got {}",
                self.min
            )));
        }
        if !(self.max.is_finite() && self.max >= self.min) {
            return Err(Error::InvalidParameter(format!(
                "axis maximum {} is below the minimum {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    /// Number of grid points: ⌊(max − min)/step⌋ + 1.
    pub fn count(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count())
            .map(|i| self.min + self.step * i as f64)
            .collect()
    }
}

fn default_tol() -> f64 {
    optimize::DEFAULT_TOL
}

fn default_sweep_epsilon() -> f64 {
    ModelParams::DEFAULT_EPSILON
}

fn default_sweep_n() -> u32 {
    1
}

/// Everything needed to run one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub s_l: AxisRange,
    pub s_p: AxisRange,
    #[serde(default = "default_sweep_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_sweep_n")]
    pub n: u32,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Worker count; 0 means all available parallelism.
    #[serde(default)]
    pub worker_count_hint: usize,
}

impl SweepSpec {
    pub fn new(s_l: AxisRange, s_p: AxisRange) -> Self {
        Self {
            s_l,
            s_p,
            epsilon: ModelParams::DEFAULT_EPSILON,
            n: 1,
            quadrature: QuadratureConfig::default(),
            tol: optimize::DEFAULT_TOL,
            worker_count_hint: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.s_l.validate()?;
        self.s_p.validate()?;
        self.quadrature.validate()?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sweep epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter(
                "sweep observation count must be at least 1".into(),
            ));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "sweep tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.s_l.count() * self.s_p.count()
    }

    /// Cell coordinates in output order: s_l outer, s_p inner.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let s_p_values = self.s_p.values();
        self.s_l
            .values()
            .into_iter()
            .flat_map(|s_l| s_p_values.iter().map(move |&s_p| (s_l, s_p)))
            .collect()
    }
}

/// Provenance attached to a finished sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub total_cells: usize,
    pub failed_cells: usize,
}

/// A completed sweep: one record per cell, row-major by (s_l, s_p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    pub records: Vec<OptimaRecord>,
    pub metadata: SweepMetadata,
}

impl SweepGrid {
    pub fn record(&self, s_l_index: usize, s_p_index: usize) -> &OptimaRecord {
        &self.records[s_l_index * self.spec.s_p.count() + s_p_index]
    }
}

fn cell_record(spec: &SweepSpec, s_l: f64, s_p: f64) -> OptimaRecord {
    let params = ModelParams {
        eta: 0.0,
        s_p,
        s_l,
        n: spec.n,
        obs_mean: 0.0,
        obs_var: 0.0,
        epsilon: spec.epsilon,
    }
    .validated()
    .expect("sweep spec validated before cell evaluation");
    optimize::find_optima(
        &params,
        &spec.quadrature,
        optimize::default_search_bound(&params),
        spec.tol,
    )
}

fn assemble(spec: &SweepSpec, records: Vec<OptimaRecord>) -> SweepGrid {
    let failed = records.iter().filter(|r| !r.converged.all()).count();
    SweepGrid {
        spec: *spec,
        metadata: SweepMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            total_cells: records.len(),
            failed_cells: failed,
        },
        records,
    }
}

/// Single-threaded sweep; the reference path the parallel run must match
/// byte for byte.
pub fn run_sweep_serial(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let records = spec
        .cells()
        .into_iter()
        .map(|(s_l, s_p)| cell_record(spec, s_l, s_p))
        .collect();
    Ok(assemble(spec, records))
}

/// Runs the sweep, invoking `progress(done, total)` after each cell.
///
/// With the `parallel` feature the cells fan out across rayon workers
/// (`worker_count_hint` threads, or all available when 0); results are
/// ordered by cell index, never by completion time. Failed cells keep their
/// records with `converged` flags cleared.
#[cfg(feature = "parallel")]
pub fn run_sweep_with_progress<P>(spec: &SweepSpec, progress: P) -> Result<SweepGrid>
where
    P: Fn(usize, usize) + Sync,
{
    spec.validate()?;
    let cells = spec.cells();
    let total = cells.len();
    let done = AtomicUsize::new(0);
    let compute = |&(s_l, s_p): &(f64, f64)| {
        let record = cell_record(spec, s_l, s_p);
        progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
        record
    };

    let records: Vec<OptimaRecord> = match spec.worker_count_hint {
        1 => cells.iter().map(compute).collect(),
        0 => cells.par_iter().map(compute).collect(),
        workers => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| cells.par_iter().map(compute).collect()),
    };
    Ok(assemble(spec, records))
}

#[cfg(not(feature = "parallel"))]
pub fn run_sweep_with_progress<P>(spec: &SweepSpec, progress: P) -> Result<SweepGrid>
where
    P: Fn(usize, usize) + Sync,
{
    spec.validate()?;
    let cells = spec.cells();
    let total = cells.len();
    let done = AtomicUsize::new(0);
    let records = cells
        .iter()
        .map(|&(s_l, s_p)| {
            let record = cell_record(spec, s_l, s_p);
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            record
        })
        .collect();
    Ok(assemble(spec, records))
}

/// Runs the sweep without progress reporting.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    run_sweep_with_progress(spec, |_, _| {})
}

/// Exact header of the sweep CSV schema.
pub const CSV_HEADER: &str = "s_l,s_p,max_kld,max_bs,max_ig,delta_kld,delta_bs,delta_ig,\
s_kld,s_bs,s_ig,d_delta,d_s,converged";

/// Renders a real with 9 significant digits, deterministically.
#[inline]
pub fn format_real(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes the grid as CSV; returns the number of data rows.
///
/// Output is byte-stable for identical grids: fixed 9-significant-digit
/// rendering, `\n` line endings, rows in grid order.
pub fn export_csv<W: Write>(grid: &SweepGrid, out: &mut W) -> Result<usize> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &grid.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            format_real(r.params.s_l),
            format_real(r.params.s_p),
            format_real(r.max_kld),
            format_real(r.max_bs),
            format_real(r.max_ig),
            format_real(r.delta_kld),
            format_real(r.delta_bs),
            format_real(r.delta_ig),
            format_real(r.s_kld),
            format_real(r.s_bs),
            format_real(r.s_ig),
            format_real(r.d_delta),
            format_real(r.d_s),
            r.converged.all(),
        )?;
    }
    Ok(grid.records.len())
}

/// Writes the grid, spec and metadata as pretty JSON.
pub fn export_json<W: Write>(grid: &SweepGrid, out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, grid)
        .map_err(|e| Error::Io(format!("json export: {e}")))?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        SweepSpec::new(
            AxisRange::new(1.0, 11.0, 10.0).unwrap(),
            AxisRange::new(1.0, 11.0, 10.0).unwrap(),
        )
    }

    #[test]
    fn axis_counts_are_inclusive() {
        assert_eq!(AxisRange::new(1.0, 50.0, 5.0).unwrap().count(), 10);
        assert_eq!(AxisRange::new(1.0, 50.0, 0.1).unwrap().count(), 491);
        assert_eq!(AxisRange::new(10.0, 10.0, 1.0).unwrap().count(), 1);
        let values = AxisRange::new(1.0, 11.0, 5.0).unwrap().values();
        assert_eq!(values, vec![1.0, 6.0, 11.0]);
    }

    #[test]
    fn axis_invariants_enforced() {
        assert!(AxisRange::new(1.0, 50.0, 0.0).is_err());
        assert!(AxisRange::new(0.0, 50.0, 1.0).is_err());
        assert!(AxisRange::new(-1.0, 50.0, 1.0).is_err());
        assert!(AxisRange::new(5.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_cell_sweep_equals_direct_optima() {
        let spec = SweepSpec::new(
            AxisRange::new(1.0, 1.0, 1.0).unwrap(),
            AxisRange::new(10.0, 10.0, 1.0).unwrap(),
        );
        let grid = run_sweep(&spec).unwrap();
        assert_eq!(grid.records.len(), 1);

        let params = ModelParams::new(10.0, 1.0).unwrap();
        let direct = optimize::find_optima_default(&params, &spec.quadrature);
        assert_eq!(
            serde_json::to_string(&grid.records[0]).unwrap(),
            serde_json::to_string(&direct).unwrap()
        );
    }

    #[test]
    fn records_are_row_major_and_echo_coordinates() {
        let spec = SweepSpec::new(
            AxisRange::new(1.0, 6.0, 5.0).unwrap(),
            AxisRange::new(1.0, 11.0, 10.0).unwrap(),
        );
        let grid = run_sweep(&spec).unwrap();
        let coords: Vec<(f64, f64)> = grid
            .records
            .iter()
            .map(|r| (r.params.s_l, r.params.s_p))
            .collect();
        assert_eq!(
            coords,
            vec![(1.0, 1.0), (1.0, 11.0), (6.0, 1.0), (6.0, 11.0)]
        );
        assert_eq!(grid.record(1, 0).params.s_l, 6.0);
        assert_eq!(grid.metadata.total_cells, 4);
        assert_eq!(grid.metadata.failed_cells, 0);
    }

    #[test]
    fn csv_export_shape_and_round_trip() {
        let grid = run_sweep(&tiny_spec()).unwrap();
        let mut buf = Vec::new();
        let rows = export_csv(&grid, &mut buf).unwrap();
        assert_eq!(rows, 4);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], CSV_HEADER);

        // Round-trip every rendered real at the printed precision.
        for (line, record) in lines[1..].iter().zip(&grid.records) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 14);
            let parsed: f64 = fields[4].parse().unwrap();
            assert!((parsed - record.max_ig).abs() <= 1e-8 * record.max_ig.abs().max(1.0));
            assert_eq!(fields[13], "true");
        }
    }

    #[test]
    fn serial_and_parallel_exports_match_bytes() {
        let mut spec = tiny_spec();
        let serial = run_sweep_serial(&spec).unwrap();
        spec.worker_count_hint = 4;
        let parallel = run_sweep(&spec).unwrap();

        let mut a = Vec::new();
        let mut b = Vec::new();
        export_csv(&serial, &mut a).unwrap();
        export_csv(&parallel, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn max_ig_decreases_along_observation_uncertainty() {
        let spec = SweepSpec::new(
            AxisRange::new(1.0, 21.0, 10.0).unwrap(),
            AxisRange::new(10.0, 10.0, 1.0).unwrap(),
        );
        let grid = run_sweep(&spec).unwrap();
        let igs: Vec<f64> = grid.records.iter().map(|r| r.max_ig).collect();
        assert!(igs[0] > igs[1] && igs[1] > igs[2], "igs {igs:?}");
    }

    #[test]
    fn json_export_carries_metadata() {
        let grid = run_sweep(&tiny_spec()).unwrap();
        let mut buf = Vec::new();
        export_json(&grid, &mut buf).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(value["metadata"]["total_cells"], 4);
        assert!(value["records"].as_array().unwrap().len() == 4);
        assert!(value["spec"]["s_l"]["step"].is_number());
    }
}
