//! File formats: tensor JSON, fiber CSV, and sweep CSV.
//!
//! Floating-point values in CSV output are printed with 17 significant
//! digits so every written value re-parses to the identical double; JSON
//! goes through serde_json's shortest-roundtrip formatting with the same
//! guarantee. Output is byte-identical across repeated runs.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fot::FiberMeasure;
use crate::sdp::{SweepGrid, SweepNode, SweepResult};
use crate::tensor::{Direction, Frame, Km66, Sym4, Vec3};

/// Tensor file: either the 6x6 Kelvin-Mandel matrix (row-major) or the 15
/// named multi-index coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "format")]
pub enum TensorFile {
    #[serde(rename = "fot4-km-v1")]
    Km { frame: Frame, matrix: Vec<f64> },
    #[serde(rename = "fot4-coeffs-v1")]
    Coeffs { coefficients: Coefficients },
}

/// The 15 independent coefficients by sorted multi-index.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Coefficients {
    pub a1111: f64,
    pub a1112: f64,
    pub a1113: f64,
    pub a1122: f64,
    pub a1123: f64,
    pub a1133: f64,
    pub a1222: f64,
    pub a1223: f64,
    pub a1233: f64,
    pub a1333: f64,
    pub a2222: f64,
    pub a2223: f64,
    pub a2233: f64,
    pub a2333: f64,
    pub a3333: f64,
}

impl Coefficients {
    fn to_array(self) -> [f64; 15] {
        [
            self.a1111, self.a1112, self.a1113, self.a1122, self.a1123, self.a1133, self.a1222,
            self.a1223, self.a1233, self.a1333, self.a2222, self.a2223, self.a2233, self.a2333,
            self.a3333,
        ]
    }

    fn from_array(c: &[f64; 15]) -> Self {
        Coefficients {
            a1111: c[0],
            a1112: c[1],
            a1113: c[2],
            a1122: c[3],
            a1123: c[4],
            a1133: c[5],
            a1222: c[6],
            a1223: c[7],
            a1233: c[8],
            a1333: c[9],
            a2222: c[10],
            a2223: c[11],
            a2233: c[12],
            a2333: c[13],
            a3333: c[14],
        }
    }
}

/// Tolerance for the matrix-symmetry check of Kelvin-Mandel input files.
pub const KM_INPUT_SYM_TOL: f64 = 1e-12;

impl TensorFile {
    pub fn from_sym4(a: &Sym4, frame: Frame) -> TensorFile {
        TensorFile::Km {
            frame,
            matrix: a.to_km(frame).entries().to_vec(),
        }
    }

    pub fn from_coefficients(a: &Sym4) -> TensorFile {
        TensorFile::Coeffs {
            coefficients: Coefficients::from_array(a.coeffs()),
        }
    }

    /// Kelvin-Mandel view of the stored tensor; coefficient files convert
    /// through the exact construction.
    pub fn to_km(&self) -> Result<Km66> {
        match self {
            TensorFile::Km { frame, matrix } => {
                if matrix.len() != 36 {
                    return Err(Error::Parse(format!(
                        "field 'matrix' must hold 36 row-major entries, got {}",
                        matrix.len()
                    )));
                }
                let mut entries = [0.0; 36];
                entries.copy_from_slice(matrix);
                Km66::from_entries(entries, *frame, KM_INPUT_SYM_TOL)
            }
            TensorFile::Coeffs { coefficients } => Ok(Sym4::from_coeffs(coefficients.to_array())
                .to_km(Frame::Fixed)),
        }
    }

    /// Completely symmetric tensor stored in the file; Kelvin-Mandel input
    /// must satisfy the redundancy relations within `tol`.
    pub fn to_sym4(&self, tol: f64) -> Result<Sym4> {
        match self {
            TensorFile::Km { .. } => Sym4::from_km(&self.to_km()?, tol),
            TensorFile::Coeffs { coefficients } => {
                Ok(Sym4::from_coeffs(coefficients.to_array()))
            }
        }
    }

    pub fn frame(&self) -> Frame {
        match self {
            TensorFile::Km { frame, .. } => *frame,
            TensorFile::Coeffs { .. } => Frame::Fixed,
        }
    }
}

pub fn read_tensor(path: &std::path::Path) -> Result<TensorFile> {
    let text = std::fs::read_to_string(path)?;
    let file: TensorFile = serde_json::from_str(&text)?;
    Ok(file)
}

pub fn write_tensor(path: &std::path::Path, file: &TensorFile) -> Result<()> {
    let mut out = serde_json::to_string_pretty(file)?;
    out.push('\n');
    std::fs::write(path, out)?;
    Ok(())
}

/// Full 17-significant-digit float formatting used for CSV output.
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Warnings produced while loading a fiber file.
#[derive(Clone, Debug, Default)]
pub struct FiberLoadReport {
    pub renormalized_directions: usize,
    pub worst_direction_defect: f64,
    pub weight_sum: f64,
}

/// Reads a fiber CSV (`weight,p_x,p_y,p_z` with a header). Directions are
/// normalized on load; defects beyond 1e-6 are counted in the report.
/// Negative weights are rejected.
pub fn read_fibers(reader: impl BufRead) -> Result<(FiberMeasure, FiberLoadReport)> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty fiber file".into()))??;
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_lowercase())
        .collect();
    if cols != ["weight", "p_x", "p_y", "p_z"] {
        return Err(Error::Parse(format!(
            "fiber file header must be 'weight,p_x,p_y,p_z', got '{header}'"
        )));
    }
    let mut pairs: Vec<(f64, Direction)> = Vec::new();
    let mut report = FiberLoadReport::default();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |name: &str, s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::Parse(format!("line {}: field '{name}' is not a number: '{s}'", lineno + 2))
            })
        };
        let weight = parse("weight", fields[0])?;
        let v = Vec3::new(
            parse("p_x", fields[1])?,
            parse("p_y", fields[2])?,
            parse("p_z", fields[3])?,
        );
        let norm_defect = (v.norm() - 1.0).abs();
        if norm_defect > 1e-6 {
            report.renormalized_directions += 1;
        }
        report.worst_direction_defect = report.worst_direction_defect.max(norm_defect);
        let dir = Direction::from_vector(v)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        pairs.push((weight, dir));
    }
    let measure = FiberMeasure::from_pairs(pairs)?;
    report.weight_sum = measure.weight_sum();
    Ok((measure, report))
}

pub fn read_fibers_path(path: &std::path::Path) -> Result<(FiberMeasure, FiberLoadReport)> {
    let file = std::fs::File::open(path)?;
    read_fibers(std::io::BufReader::new(file))
}

pub fn write_fibers(mut writer: impl Write, m: &FiberMeasure) -> Result<()> {
    writeln!(writer, "weight,p_x,p_y,p_z")?;
    for atom in m.atoms() {
        let p = atom.direction.vector();
        writeln!(
            writer,
            "{},{},{},{}",
            fmt(atom.weight),
            fmt(p.x),
            fmt(p.y),
            fmt(p.z)
        )?;
    }
    Ok(())
}

pub fn write_fibers_path(path: &std::path::Path, m: &FiberMeasure) -> Result<()> {
    let mut buf = Vec::new();
    write_fibers(&mut buf, m)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Writes sweep data as CSV: `#`-prefixed metadata, a header line, then one
/// row per grid node in row-major order (theta outer, phi inner). Planar
/// sweeps are mirrored over the full circle.
pub fn write_sweep(mut writer: impl Write, sweep: &SweepResult) -> Result<()> {
    let (grid_desc, nodes): (String, Vec<SweepNode>) = match sweep.grid {
        SweepGrid::ThreeD { n_phi, n_theta } => (
            format!("eighth-sphere {n_phi}x{n_theta}"),
            sweep.nodes.clone(),
        ),
        SweepGrid::Planar { n_phi } => (
            format!("planar quadrant {n_phi}, mirrored to full circle"),
            sweep.mirrored_planar(),
        ),
    };
    writeln!(writer, "# lambda1: {}", fmt(sweep.lambda1))?;
    writeln!(writer, "# lambda2: {}", fmt(sweep.lambda2))?;
    writeln!(writer, "# grid: {grid_desc}")?;
    writeln!(
        writer,
        "# tolerances: feasibility {:.1e}, duality gap {:.1e}",
        sweep.tol_feas, sweep.tol_gap
    )?;
    writeln!(writer, "# solver iterations: {}", sweep.total_iterations)?;
    writeln!(writer, "# failed nodes: {}", sweep.failures)?;
    writeln!(writer, "phi_deg,theta_deg,value_triclinic,value_orthotropic")?;
    for node in &nodes {
        writeln!(
            writer,
            "{},{},{},{}",
            fmt(node.phi_deg),
            fmt(node.theta_deg),
            fmt(node.value_triclinic),
            fmt(node.value_orthotropic)
        )?;
    }
    Ok(())
}
