//! Physical force prediction from normalized correlation scores, and
//! comparison against measured force grids.
//!
//! Attraction scales with the calibrated peak; repulsion is additionally
//! damped by an empirical factor because free-to-rotate repulsive dipoles
//! realign toward attraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PixelMatrix;
use crate::scoring::{cross_correlate, InteractionMap};

pub const DEFAULT_REPULSION_SCALE: f64 = 0.09;

/// Predicted force per integer offset, in newtons. Negative is attraction.
#[derive(Debug, Clone)]
pub struct ForceMap {
    map: InteractionMap,
    forces: Vec<f64>,
    pub meta: ForceMeta,
}

/// Calibration metadata carried alongside a force map.
#[derive(Debug, Clone, Serialize)]
pub struct ForceMeta {
    pub face_side_mm: f64,
    pub peak_attraction_newtons: f64,
    pub repulsion_scale: f64,
    /// Peak attraction over the face area.
    pub peak_pressure_pascals: f64,
}

impl ForceMap {
    pub fn order(&self) -> usize {
        self.map.order()
    }

    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let r = self.map.max_offset();
        let w = 2 * self.map.order() - 1;
        self.forces[(dy + r) as usize * w + (dx + r) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let r = self.map.max_offset();
        (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy, self.get(dx, dy))))
    }

    /// The normalized scores this map was scaled from.
    pub fn scores(&self) -> &InteractionMap {
        &self.map
    }

    /// CSV with header `dx,dy,force_newtons`, nine fractional digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dx,dy,force_newtons\n");
        for (dx, dy, f) in self.iter() {
            out.push_str(&format!("{dx},{dy},{f:.9}\n"));
        }
        out
    }
}

/// Scales the correlation of `a` against `b` into newtons: negative entries
/// by `peak_attraction_newtons`, positive entries by the peak times
/// `repulsion_scale`, zeros stay zero.
pub fn predict_force_map(
    a: &PixelMatrix,
    b: &PixelMatrix,
    peak_attraction_newtons: f64,
    repulsion_scale: f64,
    face_side_mm: f64,
) -> Result<ForceMap> {
    if !(peak_attraction_newtons > 0.0) {
        return Err(Error::InvalidInput(
            "peak attraction must be positive".into(),
        ));
    }
    if !(repulsion_scale > 0.0 && repulsion_scale <= 1.0) {
        return Err(Error::InvalidInput(
            "repulsion scale must lie in (0, 1]".into(),
        ));
    }
    if !(face_side_mm > 0.0) {
        return Err(Error::InvalidInput("face side must be positive".into()));
    }
    let map = cross_correlate(a, b)?;
    let forces = map
        .iter()
        .map(|(_, _, s)| {
            if s < 0.0 {
                s * peak_attraction_newtons
            } else {
                s * peak_attraction_newtons * repulsion_scale
            }
        })
        .collect();
    let meta = ForceMeta {
        face_side_mm,
        peak_attraction_newtons,
        repulsion_scale,
        peak_pressure_pascals: pressure_pascals(peak_attraction_newtons, face_side_mm),
    };
    Ok(ForceMap { map, forces, meta })
}

/// Measured forces on the same offset lattice as an `InteractionMap`,
/// read from `dx,dy,force_newtons` CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGrid {
    order: usize,
    forces: Vec<f64>,
}

impl MeasurementGrid {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let r = self.order as isize - 1;
        let w = 2 * self.order - 1;
        self.forces[(dy + r) as usize * w + (dx + r) as usize]
    }

    /// Parses `dx,dy,force_newtons` CSV. Every offset of the (2N-1)^2
    /// lattice must appear exactly once; N is inferred from the extent.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "dx,dy,force_newtons")) => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected header `dx,dy,force_newtons`".into(),
                })
            }
        }
        let mut entries = Vec::new();
        let mut max_abs = 0isize;
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse_err = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.into(),
            };
            let dx: isize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err("bad dx"))?;
            let dy: isize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err("bad dy"))?;
            let f: f64 = parts
                .next()
                .and_then(|t| t.parse().ok())
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err("bad force"))?;
            if parts.next().is_some() {
                return Err(parse_err("too many fields"));
            }
            max_abs = max_abs.max(dx.abs()).max(dy.abs());
            entries.push((dx, dy, f));
        }
        let order = (max_abs + 1) as usize;
        let w = 2 * order - 1;
        if entries.len() != w * w {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected {} offsets for order {order}, got {}", w * w, entries.len()),
            });
        }
        let mut forces = vec![f64::NAN; w * w];
        for (dx, dy, f) in entries {
            let idx = (dy + max_abs) as usize * w + (dx + max_abs) as usize;
            if !forces[idx].is_nan() {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("duplicate offset ({dx},{dy})"),
                });
            }
            forces[idx] = f;
        }
        Ok(Self { order, forces })
    }

    pub fn read_csv_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// Sum of squared prediction errors normalized by the measured energy:
/// sum (p - m)^2 / sum m^2 over all offsets.
pub fn normalized_ssd(predicted: &ForceMap, measured: &MeasurementGrid) -> Result<f64> {
    if predicted.order() != measured.order() {
        return Err(Error::DimensionMismatch {
            expected: predicted.order(),
            got: measured.order(),
        });
    }
    let mut num = 0.0;
    let mut denom = 0.0;
    for (dx, dy, p) in predicted.iter() {
        let m = measured.get(dx, dy);
        num += (p - m) * (p - m);
        denom += m * m;
    }
    if denom == 0.0 {
        return Err(Error::UndefinedNormalization);
    }
    Ok(num / denom)
}

/// Uniform pressure of a face-normal force over a square face.
pub fn pressure_pascals(force_newtons: f64, side_mm: f64) -> f64 {
    let side_m = side_mm / 1000.0;
    force_newtons / (side_m * side_m)
}
