//! Problem dataset files: tab-separated, one header line, one row per
//! problem, floats printed with 17 significant digits so values
//! round-trip bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use twoview_core::{
    generate_cell, Bearing, CameraArrangement, Dataset, DatasetGrid, Intrinsics,
    ObservationPair, Problem, RelativePose, Vec2, Vec3, DEFAULT_FOCAL, DEFAULT_IMAGE_SIZE,
};

use crate::HarnessError;

pub const DATASET_HEADER: &str = "id\tconfig\td\tsigma\t\
r00\tr01\tr02\tr10\tr11\tr12\tr20\tr21\tr22\t\
tx\tty\ttz\t\
f0x\tf0y\tf0z\tf1x\tf1y\tf1z\t\
u0x\tu0y\tu1x\tu1y\t\
x_true_x\tx_true_y\tx_true_z\tbeta_true";

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Generates the grid with cells distributed over a rayon pool. The output
/// is identical to the serial [`twoview_core::build_dataset`] for any
/// worker count.
pub fn generate_parallel(grid: &DatasetGrid, workers: usize) -> Dataset {
    let cells = grid.cells();
    let run = || {
        let mut parts: Vec<Dataset> = cells
            .par_iter()
            .enumerate()
            .map(|(index, config)| generate_cell(config, index as u64))
            .collect();
        let mut out = Dataset::default();
        for part in parts.drain(..) {
            out.merge(part);
        }
        out
    };
    if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("rayon pool");
        pool.install(run)
    }
}

pub fn write_problems(path: &Path, problems: &[Problem]) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{DATASET_HEADER}")?;
    for p in problems {
        let r = p.pose.rotation();
        let t = p.pose.translation();
        let f0 = p.obs.f0.as_vec();
        let f1 = p.obs.f1.as_vec();
        let (u0, u1) = (
            p.obs.u0.expect("generated problems carry pixels"),
            p.obs.u1.expect("generated problems carry pixels"),
        );
        let fields: Vec<String> = [
            r[(0, 0)], r[(0, 1)], r[(0, 2)],
            r[(1, 0)], r[(1, 1)], r[(1, 2)],
            r[(2, 0)], r[(2, 1)], r[(2, 2)],
            t.x, t.y, t.z,
            f0.x, f0.y, f0.z, f1.x, f1.y, f1.z,
            u0.x, u0.y, u1.x, u1.y,
            p.x_true.x, p.x_true.y, p.x_true.z, p.beta_true,
        ]
        .iter()
        .map(|&v| fmt_f64(v))
        .collect();
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            p.id,
            p.arrangement,
            fmt_f64(p.d),
            fmt_f64(p.sigma),
            fields.join("\t")
        )?;
    }
    w.flush()?;
    Ok(())
}

fn bad_row(line_no: usize, why: &str) -> HarnessError {
    HarnessError::Io(format!("dataset row {line_no}: {why}"))
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64, HarnessError> {
    field.parse().map_err(|_| bad_row(line_no, "malformed float"))
}

/// Reads a dataset written by [`write_problems`]. Observations are
/// rebuilt against the benchmark camera (1024^2 image, 512 px focal).
pub fn read_problems(path: &Path) -> Result<Vec<Problem>, HarnessError> {
    let k = Intrinsics::new(
        DEFAULT_FOCAL,
        DEFAULT_FOCAL,
        DEFAULT_IMAGE_SIZE / 2.0,
        DEFAULT_IMAGE_SIZE / 2.0,
    )
    .expect("benchmark camera");
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| HarnessError::Io("empty dataset file".into()))??;
    if header != DATASET_HEADER {
        return Err(HarnessError::Io("unrecognized dataset header".into()));
    }

    let mut problems = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let line_no = i + 2;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 30 {
            return Err(bad_row(line_no, "wrong column count"));
        }
        let id: u64 = cols[0].parse().map_err(|_| bad_row(line_no, "malformed id"))?;
        let arrangement: CameraArrangement =
            cols[1].parse().map_err(|_| bad_row(line_no, "unknown config"))?;
        let mut f = [0f64; 28];
        for (slot, col) in f.iter_mut().zip(&cols[2..]) {
            *slot = parse_f64(col, line_no)?;
        }
        let rotation = twoview_core::Mat3::new(
            f[2], f[3], f[4],
            f[5], f[6], f[7],
            f[8], f[9], f[10],
        );
        let pose = RelativePose::new(rotation, Vec3::new(f[11], f[12], f[13]))
            .map_err(|e| bad_row(line_no, &e.to_string()))?;
        let f0 = Bearing::new(Vec3::new(f[14], f[15], f[16]))
            .map_err(|e| bad_row(line_no, &e.to_string()))?;
        let f1 = Bearing::new(Vec3::new(f[17], f[18], f[19]))
            .map_err(|e| bad_row(line_no, &e.to_string()))?;
        let obs = ObservationPair::new(
            Vec2::new(f[20], f[21]),
            Vec2::new(f[22], f[23]),
            f0,
            f1,
            Some(k),
        )
        .map_err(|e| bad_row(line_no, &e.to_string()))?;
        problems.push(Problem {
            id,
            arrangement,
            d: f[0],
            sigma: f[1],
            pose,
            obs,
            x_true: Vec3::new(f[24], f[25], f[26]),
            beta_true: f[27],
        });
    }
    Ok(problems)
}
