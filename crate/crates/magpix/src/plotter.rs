//! CNC plotter programs that write encodings as magnetic pixels, the
//! G-code text form, and classification of hall-sensor scans back into
//! pixel matrices.
//!
//! Coordinate frame: origin at the top-left pixel, +x right (columns),
//! +y down (rows). Pixel (i, j) sits at x = j*pitch, y = i*pitch. Dwell
//! times are carried in whole milliseconds.

use crate::error::{Error, Result};
use crate::matrix::PixelMatrix;

pub const DEFAULT_PITCH_MM: f64 = 3.0;
pub const DEFAULT_Z_LIFT_MM: f64 = 3.0;
pub const DEFAULT_DWELL_S: f64 = 0.7;
pub const DEFAULT_DEAD_BAND: f64 = 0.1;

pub const ORIGIN_NOTE: &str = "top-left +x right +y down";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    North,
    South,
}

impl Polarity {
    fn letter(self) -> &'static str {
        match self {
            Polarity::North => "N",
            Polarity::South => "S",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Move { x_mm: f64, y_mm: f64 },
    SetPolarity(Polarity),
    LowerZ,
    RaiseZ,
    Energize { dwell_ms: u32 },
    Off,
}

/// An ordered plotter program plus its header metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotterProgram {
    pub pitch_mm: f64,
    pub z_lift_mm: f64,
    pub commands: Vec<Command>,
}

impl PlotterProgram {
    /// Number of programmed pixels (energize commands).
    pub fn pixel_count(&self) -> usize {
        self.commands
            .iter()
            .filter(|c| matches!(c, Command::Energize { .. }))
            .count()
    }

    /// Total energize dwell, exact in milliseconds.
    pub fn total_dwell_ms(&self) -> u64 {
        self.commands
            .iter()
            .map(|c| match c {
                Command::Energize { dwell_ms } => u64::from(*dwell_ms),
                _ => 0,
            })
            .sum()
    }

    pub fn total_dwell_s(&self) -> f64 {
        self.total_dwell_ms() as f64 / 1000.0
    }

    /// Checks the command discipline: moves only with the head raised,
    /// every energize on a lowered head with a polarity set since the last
    /// off, and the head raised again at the end.
    pub fn validate(&self) -> Result<()> {
        let mut lowered = false;
        let mut polarity = false;
        for (i, c) in self.commands.iter().enumerate() {
            let fail = |msg: &str| {
                Err(Error::InvalidInput(format!("command {i}: {msg}")))
            };
            match c {
                Command::Move { .. } if lowered => return fail("move with head lowered"),
                Command::LowerZ if lowered => return fail("lower twice"),
                Command::RaiseZ if !lowered => return fail("raise twice"),
                Command::LowerZ => lowered = true,
                Command::RaiseZ => lowered = false,
                Command::SetPolarity(_) => polarity = true,
                Command::Off => polarity = false,
                Command::Energize { .. } if !lowered => return fail("energize with head raised"),
                Command::Energize { .. } if !polarity => return fail("energize without polarity"),
                _ => {}
            }
        }
        if lowered {
            return Err(Error::InvalidInput("program ends with head lowered".into()));
        }
        Ok(())
    }
}

/// Builds the program for a matrix: nonzero cells in boustrophedon row
/// order (even rows left to right, odd rows right to left), zero cells
/// skipped entirely. Each pixel is move, polarity, lower, energize, off,
/// raise — six commands.
pub fn emit_program(
    m: &PixelMatrix,
    pitch_mm: f64,
    z_lift_mm: f64,
    dwell_s: f64,
) -> Result<PlotterProgram> {
    if !(pitch_mm > 0.0 && z_lift_mm > 0.0 && dwell_s > 0.0) {
        return Err(Error::InvalidInput(
            "pitch, lift and dwell must be positive".into(),
        ));
    }
    let dwell_ms = (dwell_s * 1000.0).round() as u32;
    let n = m.order();
    let mut commands = Vec::new();
    for i in 0..n {
        let cols: Vec<usize> = if i % 2 == 0 {
            (0..n).collect()
        } else {
            (0..n).rev().collect()
        };
        for j in cols {
            let polarity = match m.get(i, j) {
                1 => Polarity::North,
                -1 => Polarity::South,
                _ => continue,
            };
            commands.push(Command::Move {
                x_mm: j as f64 * pitch_mm,
                y_mm: i as f64 * pitch_mm,
            });
            commands.push(Command::SetPolarity(polarity));
            commands.push(Command::LowerZ);
            commands.push(Command::Energize { dwell_ms });
            commands.push(Command::Off);
            commands.push(Command::RaiseZ);
        }
    }
    Ok(PlotterProgram {
        pitch_mm,
        z_lift_mm,
        commands,
    })
}

/// Renders a program as G-code text, byte-identical for identical
/// programs. Moves are `G0 X.. Y..`, vertical hops `G0 Z<+/-lift>`, dwells
/// `G4 P<ms>`; polarity and coil-off travel as `;POL N|S` and `;OFF`
/// comment directives consumed by the add-on side channel.
pub fn render_gcode(p: &PlotterProgram) -> String {
    let mut out = String::new();
    out.push_str("; magpix plotter program\n");
    out.push_str(&format!("; pitch_mm {:.3}\n", p.pitch_mm));
    out.push_str(&format!("; z_lift_mm {:.3}\n", p.z_lift_mm));
    out.push_str(&format!("; origin {ORIGIN_NOTE}\n"));
    for c in &p.commands {
        match c {
            Command::Move { x_mm, y_mm } => {
                out.push_str(&format!("G0 X{x_mm:.3} Y{y_mm:.3}\n"));
            }
            Command::SetPolarity(pol) => out.push_str(&format!(";POL {}\n", pol.letter())),
            Command::LowerZ => out.push_str(&format!("G0 Z-{:.3}\n", p.z_lift_mm)),
            Command::RaiseZ => out.push_str(&format!("G0 Z{:.3}\n", p.z_lift_mm)),
            Command::Energize { dwell_ms } => out.push_str(&format!("G4 P{dwell_ms}\n")),
            Command::Off => out.push_str(";OFF\n"),
        }
    }
    out
}

/// Parses G-code produced by `render_gcode`. Unrecognized comment lines are
/// skipped; unrecognized commands are rejected.
pub fn parse_gcode(text: &str) -> Result<PlotterProgram> {
    let mut pitch_mm = None;
    let mut z_lift_mm = None;
    let mut commands = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Parse {
            line: idx + 1,
            msg,
        };
        if let Some(rest) = line.strip_prefix(";POL ") {
            let pol = match rest {
                "N" => Polarity::North,
                "S" => Polarity::South,
                other => return Err(err(format!("unknown polarity {other:?}"))),
            };
            commands.push(Command::SetPolarity(pol));
        } else if line == ";OFF" {
            commands.push(Command::Off);
        } else if let Some(rest) = line.strip_prefix("; ") {
            if let Some(v) = rest.strip_prefix("pitch_mm ") {
                pitch_mm = Some(v.parse::<f64>().map_err(|e| err(e.to_string()))?);
            } else if let Some(v) = rest.strip_prefix("z_lift_mm ") {
                z_lift_mm = Some(v.parse::<f64>().map_err(|e| err(e.to_string()))?);
            }
            // other comments are free-form
        } else if let Some(rest) = line.strip_prefix("G0 Z") {
            let z: f64 = rest.parse().map_err(|_| err(format!("bad Z value {rest:?}")))?;
            let lift = z_lift_mm.ok_or_else(|| err("Z motion before z_lift_mm header".into()))?;
            if z == lift {
                commands.push(Command::RaiseZ);
            } else if z == -lift {
                commands.push(Command::LowerZ);
            } else {
                return Err(err(format!("Z {z} is neither +lift nor -lift")));
            }
        } else if let Some(rest) = line.strip_prefix("G0 X") {
            let (x, y) = rest
                .split_once(" Y")
                .ok_or_else(|| err("move needs X and Y".into()))?;
            let x_mm: f64 = x.parse().map_err(|_| err(format!("bad X {x:?}")))?;
            let y_mm: f64 = y.parse().map_err(|_| err(format!("bad Y {y:?}")))?;
            if !(x_mm.is_finite() && y_mm.is_finite()) {
                return Err(err("non-finite coordinates".into()));
            }
            commands.push(Command::Move { x_mm, y_mm });
        } else if let Some(rest) = line.strip_prefix("G4 P") {
            let dwell_ms: u32 = rest
                .parse()
                .map_err(|_| err(format!("bad dwell {rest:?}")))?;
            commands.push(Command::Energize { dwell_ms });
        } else if line.is_empty() {
            continue;
        } else {
            return Err(err(format!("unrecognized line {line:?}")));
        }
    }
    Ok(PlotterProgram {
        pitch_mm: pitch_mm.ok_or(Error::Parse {
            line: 1,
            msg: "missing pitch_mm header".into(),
        })?,
        z_lift_mm: z_lift_mm.ok_or(Error::Parse {
            line: 1,
            msg: "missing z_lift_mm header".into(),
        })?,
        commands,
    })
}

/// Reconstructs the pixel matrix a program writes. Cells never energized
/// stay 0; a later energize at a visited cell overwrites it.
pub fn program_to_matrix(p: &PlotterProgram, order: usize) -> Result<PixelMatrix> {
    let mut cells = vec![0i8; order * order];
    let mut position: Option<(usize, usize)> = None;
    let mut polarity: Option<Polarity> = None;
    for (idx, c) in p.commands.iter().enumerate() {
        match c {
            Command::Move { x_mm, y_mm } => {
                let to_index = |mm: f64| -> Result<usize> {
                    let steps = mm / p.pitch_mm;
                    let k = steps.round();
                    if (steps - k).abs() > 1e-6 || k < 0.0 || k >= order as f64 {
                        return Err(Error::InvalidInput(format!(
                            "command {idx}: {mm} mm is not a pixel site"
                        )));
                    }
                    Ok(k as usize)
                };
                position = Some((to_index(*y_mm)?, to_index(*x_mm)?));
            }
            Command::SetPolarity(pol) => polarity = Some(*pol),
            Command::Off => polarity = None,
            Command::Energize { .. } => {
                let (i, j) = position.ok_or_else(|| {
                    Error::InvalidInput(format!("command {idx}: energize before any move"))
                })?;
                let pol = polarity.ok_or_else(|| {
                    Error::InvalidInput(format!("command {idx}: energize without polarity"))
                })?;
                cells[i * order + j] = match pol {
                    Polarity::North => 1,
                    Polarity::South => -1,
                };
            }
            Command::LowerZ | Command::RaiseZ => {}
        }
    }
    PixelMatrix::new(order, cells)
}

// ---------------------------------------------------------------------------
// Hall-sensor scans
// ---------------------------------------------------------------------------

/// Normalized hall-sensor readings per pixel. CSV form: N lines of N
/// comma-separated reals, no header.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    order: usize,
    values: Vec<f64>,
}

impl ScanGrid {
    pub fn new(order: usize, values: Vec<f64>) -> Result<Self> {
        if order == 0 || values.len() != order * order {
            return Err(Error::DimensionMismatch {
                expected: order * order,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("scan values must be finite".into()));
        }
        Ok(Self { order, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.order + j]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.order {
            for j in 0..self.order {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{:.6}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().collect();
        let order = rows.len();
        if order == 0 {
            return Err(Error::Parse {
                line: 1,
                msg: "empty scan".into(),
            });
        }
        let mut values = Vec::with_capacity(order * order);
        for (i, row) in rows.iter().enumerate() {
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != order {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {order} values, got {}", fields.len()),
                });
            }
            for f in fields {
                let v: f64 = f.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad value {f:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: "non-finite value".into(),
                    });
                }
                values.push(v);
            }
        }
        Self::new(order, values)
    }

    pub fn read_csv_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// A classified scan: readings above the dead band are North, below are
/// South, and readings inside it are left unprogrammed and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedScan {
    pub matrix: PixelMatrix,
    pub ambiguous: usize,
}

pub fn classify_scan(s: &ScanGrid, dead_band: f64) -> Result<ClassifiedScan> {
    if !(dead_band >= 0.0) {
        return Err(Error::InvalidInput("dead band must be nonnegative".into()));
    }
    let mut ambiguous = 0;
    let matrix = PixelMatrix::from_fn(s.order(), |i, j| {
        let v = s.get(i, j);
        if v > dead_band {
            1
        } else if v < -dead_band {
            -1
        } else {
            ambiguous += 1;
            0
        }
    })?;
    Ok(ClassifiedScan { matrix, ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::sylvester;

    #[test]
    fn blank_matrix_emits_no_pixel_commands() {
        let p = emit_program(&PixelMatrix::blank(3), 3.0, 3.0, 0.7).unwrap();
        assert!(p.commands.is_empty());
        assert_eq!(p.pixel_count(), 0);
        let text = render_gcode(&p);
        assert_eq!(text.lines().count(), 4); // header only
    }

    #[test]
    fn order_eight_dwell_budget() {
        let h = sylvester(3).unwrap();
        let p = emit_program(&h, 3.0, 3.0, 0.7).unwrap();
        assert_eq!(p.pixel_count(), 64);
        assert_eq!(p.total_dwell_ms(), 64 * 700);
        assert!((p.total_dwell_s() - 44.8).abs() < 1e-9);
        p.validate().unwrap();
    }

    #[test]
    fn skip_zero_rule_and_polarity_order() {
        let m = PixelMatrix::from_rows(&[vec![1, -1], vec![0, 1]]).unwrap();
        let p = emit_program(&m, 3.0, 3.0, 0.7).unwrap();
        let pols: Vec<Polarity> = p
            .commands
            .iter()
            .filter_map(|c| match c {
                Command::SetPolarity(pol) => Some(*pol),
                _ => None,
            })
            .collect();
        assert_eq!(
            pols,
            vec![Polarity::North, Polarity::South, Polarity::North]
        );
        assert_eq!(p.pixel_count(), 3);
        // odd rows run right to left; row 1's only pixel is (1,1)
        let moves: Vec<(f64, f64)> = p
            .commands
            .iter()
            .filter_map(|c| match c {
                Command::Move { x_mm, y_mm } => Some((*x_mm, *y_mm)),
                _ => None,
            })
            .collect();
        assert_eq!(moves, vec![(0.0, 0.0), (3.0, 0.0), (3.0, 3.0)]);
    }

    #[test]
    fn boustrophedon_visits_odd_rows_reversed() {
        let m = PixelMatrix::from_fn(3, |_, _| 1).unwrap();
        let p = emit_program(&m, 1.0, 3.0, 0.7).unwrap();
        let xs: Vec<f64> = p
            .commands
            .iter()
            .filter_map(|c| match c {
                Command::Move { x_mm, .. } => Some(*x_mm),
                _ => None,
            })
            .collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn render_parse_round_trip() {
        let h = sylvester(2).unwrap();
        let p = emit_program(&h, 3.0, 3.0, 0.7).unwrap();
        let text = render_gcode(&p);
        let back = parse_gcode(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(render_gcode(&back), text);
        assert_eq!(program_to_matrix(&back, 4).unwrap(), h);
    }

    #[test]
    fn round_trip_preserves_zeros() {
        let m = PixelMatrix::from_rows(&[vec![1, 0], vec![0, -1]]).unwrap();
        let p = emit_program(&m, 3.0, 3.0, 0.7).unwrap();
        let back = program_to_matrix(&parse_gcode(&render_gcode(&p)).unwrap(), 2).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(parse_gcode("G1 X0\n").is_err());
        assert!(parse_gcode("; pitch_mm 3.0\n; z_lift_mm 3.0\nG0 Z1.5\n").is_err());
        assert!(parse_gcode("; pitch_mm 3.0\n; z_lift_mm 3.0\n;POL Q\n").is_err());
        assert!(parse_gcode("; pitch_mm 3.0\nG4 P700\n").is_err(), "missing lift header");
        assert!(parse_gcode("; pitch_mm 3.0\n; z_lift_mm 3.0\nG4 P-1\n").is_err());
    }

    #[test]
    fn emit_rejects_nonpositive_params() {
        let m = PixelMatrix::blank(2);
        assert!(emit_program(&m, 0.0, 3.0, 0.7).is_err());
        assert!(emit_program(&m, 3.0, -1.0, 0.7).is_err());
        assert!(emit_program(&m, 3.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn classify_separated_readings() {
        let s = ScanGrid::new(2, vec![-0.9, 0.8, 0.4, -0.3]).unwrap();
        let c = classify_scan(&s, DEFAULT_DEAD_BAND).unwrap();
        assert_eq!(c.matrix.cells(), &[-1, 1, 1, -1]);
        assert_eq!(c.ambiguous, 0);
    }

    #[test]
    fn classify_dead_band_warns() {
        let s = ScanGrid::new(1, vec![0.0]).unwrap();
        let c = classify_scan(&s, DEFAULT_DEAD_BAND).unwrap();
        assert_eq!(c.matrix.cells(), &[0]);
        assert_eq!(c.ambiguous, 1);
    }

    #[test]
    fn classify_recovers_noisy_synthetic_scan() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let h = sylvester(3).unwrap();
        let values: Vec<f64> = h
            .cells()
            .iter()
            .map(|&c| f64::from(c) + rng.gen_range(-0.3..0.3))
            .collect();
        let s = ScanGrid::new(8, values).unwrap();
        let c = classify_scan(&s, DEFAULT_DEAD_BAND).unwrap();
        assert_eq!(c.matrix, h);
        assert_eq!(c.ambiguous, 0);
    }

    #[test]
    fn scan_csv_round_trip_and_rejects() {
        let s = ScanGrid::new(2, vec![0.25, -1.0, 0.5, 1.0]).unwrap();
        let back = ScanGrid::from_csv_str(&s.to_csv()).unwrap();
        assert_eq!(back, s);
        assert!(ScanGrid::from_csv_str("1.0,2.0\n3.0\n").is_err());
        assert!(ScanGrid::from_csv_str("1.0,x\n0.0,1.0\n").is_err());
        assert!(ScanGrid::from_csv_str("").is_err());
        assert!(ScanGrid::from_csv_str("inf,1.0\n0.0,1.0\n").is_err());
    }
}
