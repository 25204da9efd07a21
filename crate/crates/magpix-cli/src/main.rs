//! Command-line front end: generate encoding pools, sweep cliques, score
//! pairs, design assemblies, emit plotter G-code, predict forces, and
//! translate DNA edge codes.
//!
//! Every subcommand validates its inputs fully before writing anything, and
//! writes a `manifest.json` recording the parameters that produced the
//! output. Identical inputs and parameters give byte-identical outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use magpix::assembly::{assign_encodings, fluid_window, metacube_topology, ALL_FACES};
use magpix::clique::{threshold_sweep, SweepParams};
use magpix::dna::{
    binary_to_quaternary, bits_from_row, edge_from_binary, read_pool_file, EdgeRole,
};
use magpix::force::{normalized_ssd, predict_force_map, MeasurementGrid};
use magpix::matrix::{row_permutations, sylvester};
use magpix::plotter::{classify_scan, emit_program, render_gcode, ScanGrid};
use magpix::rotation::{rotation_profile, standard_angles};
use magpix::scoring::cross_correlate;
use magpix::{Error, PixelMatrix};

#[derive(Parser)]
#[command(name = "magpix", version, about = "selective pixel encodings for stochastic self-assembly")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the Sylvester matrix of order 2^k, optionally with its row
    /// permutations, as grid files.
    Generate {
        /// Order exponent k; the matrix has order 2^k.
        #[arg(long, default_value_t = 3)]
        order_exponent: u32,
        /// Also write all deduplicated row permutations.
        #[arg(long)]
        permutations: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Sweep the compatibility threshold over a candidate pool until the
    /// maximal clique reaches the target size.
    Search {
        /// Directory of grid files (read in file-name order).
        #[arg(long, conflicts_with = "from_sylvester_permutations")]
        pool_dir: Option<PathBuf>,
        /// Generate the pool as row permutations of the order-2^k
        /// Sylvester matrix instead of reading files.
        #[arg(long)]
        from_sylvester_permutations: Option<u32>,
        #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
        seed_threshold: f64,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        #[arg(long, default_value_t = 12)]
        target_size: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score one matrix against another over all translations, and
    /// optionally over fine rotations.
    Score {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Also write the -180..180 degree rotation profile.
        #[arg(long)]
        fine_rotation: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Assign a clique of encodings to the meta-cube's 12 matings.
    Assemble {
        /// Directory of clique member grid files (read in file-name order).
        #[arg(long)]
        clique_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Emit plotter G-code for one grid file or a directory of them.
    Gcode {
        #[arg(long, conflicts_with = "faces_dir")]
        grid: Option<PathBuf>,
        /// Directory of grid files, each becoming one .gcode file.
        #[arg(long)]
        faces_dir: Option<PathBuf>,
        #[arg(long, default_value_t = magpix::plotter::DEFAULT_PITCH_MM)]
        pitch_mm: f64,
        #[arg(long, default_value_t = magpix::plotter::DEFAULT_Z_LIFT_MM)]
        z_lift_mm: f64,
        #[arg(long, default_value_t = magpix::plotter::DEFAULT_DWELL_S)]
        dwell_s: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Classify a hall-sensor scan CSV back into a pixel grid.
    Scan {
        #[arg(long)]
        scan: PathBuf,
        #[arg(long, default_value_t = magpix::plotter::DEFAULT_DEAD_BAND)]
        dead_band: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Predict the physical force map between two encodings.
    Force {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        peak_newtons: f64,
        #[arg(long, default_value_t = magpix::force::DEFAULT_REPULSION_SCALE)]
        repulsion_scale: f64,
        #[arg(long, default_value_t = 25.0)]
        side_mm: f64,
        /// Measured force CSV to compare against (normalized SSD).
        #[arg(long)]
        measured: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Translate a binary encoding into DNA edge codes over a sequence pool.
    Dna {
        #[arg(long)]
        grid: PathBuf,
        /// Sequence pool file: one uppercase ACGT sequence per line.
        #[arg(long)]
        pool: PathBuf,
        /// Build vacancy edges from the bitwise-inverted code so a code's
        /// overhang edge binds its partner's vacancy edge.
        #[arg(long)]
        mate_convention: bool,
        /// Edge serialization: `rows` (one edge per matrix row) or
        /// `row-major` (single concatenated translation, no edges).
        #[arg(long, default_value = "rows")]
        traversal: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Serialize, Clone)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    parameters: serde_json::Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl RunManifest {
    fn new(subcommand: &'static str, parameters: serde_json::Value) -> Self {
        Self {
            tool: "magpix",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ExhaustedSearch { .. } => 3,
                Error::Io(_) => 4,
                _ => 2,
            })
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Generate {
            order_exponent,
            permutations,
            out_dir,
        } => cmd_generate(order_exponent, permutations, &out_dir),
        Cmd::Search {
            pool_dir,
            from_sylvester_permutations,
            seed_threshold,
            step,
            target_size,
            out_dir,
        } => cmd_search(
            pool_dir.as_deref(),
            from_sylvester_permutations,
            SweepParams {
                seed: seed_threshold,
                step,
                target_size,
            },
            &out_dir,
        ),
        Cmd::Score {
            a,
            b,
            fine_rotation,
            out_dir,
        } => cmd_score(&a, &b, fine_rotation, &out_dir),
        Cmd::Assemble {
            clique_dir,
            out_dir,
        } => cmd_assemble(&clique_dir, &out_dir),
        Cmd::Gcode {
            grid,
            faces_dir,
            pitch_mm,
            z_lift_mm,
            dwell_s,
            out_dir,
        } => cmd_gcode(
            grid.as_deref(),
            faces_dir.as_deref(),
            pitch_mm,
            z_lift_mm,
            dwell_s,
            &out_dir,
        ),
        Cmd::Scan {
            scan,
            dead_band,
            out_dir,
        } => cmd_scan(&scan, dead_band, &out_dir),
        Cmd::Force {
            a,
            b,
            peak_newtons,
            repulsion_scale,
            side_mm,
            measured,
            out_dir,
        } => cmd_force(
            &a,
            &b,
            peak_newtons,
            repulsion_scale,
            side_mm,
            measured.as_deref(),
            &out_dir,
        ),
        Cmd::Dna {
            grid,
            pool,
            mate_convention,
            traversal,
            out_dir,
        } => cmd_dna(&grid, &pool, mate_convention, &traversal, &out_dir),
    }
}

/// Grid files of a directory in file-name order, with their stems.
fn read_pool_dir(dir: &Path) -> Result<(Vec<String>, Vec<PixelMatrix>), Error> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no .txt grid files in {}",
            dir.display()
        )));
    }
    let mut names = Vec::new();
    let mut pool = Vec::new();
    for p in &paths {
        let m = PixelMatrix::read_grid_file(p).map_err(|e| match e {
            Error::Io(io) => Error::Io(io),
            other => Error::InvalidInput(format!("{}: {other}", p.display())),
        })?;
        names.push(
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        pool.push(m);
    }
    Ok((names, pool))
}

fn write_out(out_dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    std::fs::write(out_dir.join(name), contents)?;
    Ok(())
}

fn finish(out_dir: &Path, mut manifest: RunManifest, files: Vec<(String, String)>) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir)?;
    manifest.outputs = files.iter().map(|(n, _)| n.clone()).collect();
    manifest.outputs.push("manifest.json".into());
    for (name, contents) in &files {
        if let Some(parent) = out_dir.join(name).parent() {
            std::fs::create_dir_all(parent)?;
        }
        write_out(out_dir, name, contents)?;
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_out(out_dir, "manifest.json", &text)?;
    Ok(())
}

fn cmd_generate(k: u32, permutations: bool, out_dir: &Path) -> Result<(), Error> {
    let h = sylvester(k)?;
    let order = h.order();
    let mut manifest = RunManifest::new(
        "generate",
        json!({ "order_exponent": k, "permutations": permutations }),
    );
    let mut files = vec![(format!("sylvester_{order}.txt"), h.to_grid_string())];
    if permutations {
        // 8! files is the practical ceiling; larger orders explode
        if order > 8 {
            return Err(Error::Capacity {
                what: "row permutation pool",
                limit: 40320,
                requested: order,
            });
        }
        let mut seen = std::collections::HashSet::new();
        let mut count = 0usize;
        for (i, p) in row_permutations(&h)?.enumerate() {
            if seen.contains(p.cells()) || seen.contains(p.mate().cells()) {
                continue;
            }
            seen.insert(p.cells().to_vec());
            files.push((format!("perm_{i:05}.txt"), p.to_grid_string()));
            count += 1;
        }
        println!("wrote {count} permutation grids of order {order}");
    }
    println!("wrote sylvester_{order}.txt");
    manifest.inputs = vec![];
    finish(out_dir, manifest, files)
}

#[derive(Serialize)]
struct SearchOutput {
    manifest: RunManifest,
    threshold: f64,
    s_l_floor: f64,
    target_size: usize,
    pool_size: usize,
    dedup_size: usize,
    vertex_count: usize,
    max_clique_size: usize,
    cliques_at_max: u64,
    census: BTreeMap<usize, u64>,
    combined_score: f64,
    /// Grid files of the selected clique, relative to the report.
    selected: Vec<String>,
}

fn cmd_search(
    pool_dir: Option<&Path>,
    from_perms: Option<u32>,
    params: SweepParams,
    out_dir: &Path,
) -> Result<(), Error> {
    let (names, pool, inputs) = match (pool_dir, from_perms) {
        (Some(dir), None) => {
            let (names, pool) = read_pool_dir(dir)?;
            (names, pool, vec![dir.display().to_string()])
        }
        (None, Some(k)) => {
            let pool = magpix::matrix::sylvester_permutation_pool(k)?;
            let names = (0..pool.len()).map(|i| format!("perm_{i:05}")).collect();
            (names, pool, vec![])
        }
        _ => {
            return Err(Error::InvalidInput(
                "provide exactly one of --pool-dir or --from-sylvester-permutations".into(),
            ))
        }
    };
    let report = threshold_sweep(&pool, &params)?;
    let mut manifest = RunManifest::new(
        "search",
        json!({
            "seed_threshold": params.seed,
            "step": params.step,
            "target_size": params.target_size,
        }),
    );
    manifest.inputs = inputs;

    let mut files = Vec::new();
    let mut selected_files = Vec::new();
    for &id in &report.selected {
        let name = format!("clique/{}.txt", names[id]);
        files.push((name.clone(), pool[id].to_grid_string()));
        selected_files.push(name);
    }
    let out = SearchOutput {
        manifest: manifest.clone(),
        threshold: report.threshold,
        s_l_floor: report.s_l_floor,
        target_size: report.target_size,
        pool_size: report.pool_size,
        dedup_size: report.dedup_size,
        vertex_count: report.vertex_count,
        max_clique_size: report.max_clique_size,
        cliques_at_max: report.cliques_at_max,
        census: report.census.clone(),
        combined_score: report.combined_score,
        selected: selected_files,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("report serializes");
    text.push('\n');
    println!(
        "threshold {} max clique {} ({} at max), combined score {}",
        out.threshold, out.max_clique_size, out.cliques_at_max, out.combined_score
    );
    files.push(("report.json".into(), text));
    finish(out_dir, manifest, files)
}

fn cmd_score(a: &Path, b: &Path, fine: bool, out_dir: &Path) -> Result<(), Error> {
    let ma = PixelMatrix::read_grid_file(a)?;
    let mb = PixelMatrix::read_grid_file(b)?;
    let map = cross_correlate(&ma, &mb)?;
    let mut manifest = RunManifest::new("score", json!({ "fine_rotation": fine }));
    manifest.inputs = vec![a.display().to_string(), b.display().to_string()];
    let mut files = vec![("translation_map.csv".into(), map.to_csv())];
    if fine {
        let profile = rotation_profile(&ma, &mb, &standard_angles())?;
        files.push(("rotation_profile.csv".into(), profile.to_csv()));
    }
    println!("centered score {}", map.get(0, 0));
    finish(out_dir, manifest, files)
}

#[derive(Serialize)]
struct AssembleOutput {
    manifest: RunManifest,
    modules: Vec<serde_json::Value>,
    matings: usize,
    fluid_window: magpix::assembly::FluidWindow,
}

fn cmd_assemble(clique_dir: &Path, out_dir: &Path) -> Result<(), Error> {
    let (names, clique) = read_pool_dir(clique_dir)?;
    let topology = metacube_topology();
    let assignment = assign_encodings(&topology, &clique)?;
    let window = fluid_window(&assignment)?;

    let mut files = Vec::new();
    let mut modules_json = Vec::new();
    for (mi, site) in topology.modules().iter().enumerate() {
        let mut faces = serde_json::Map::new();
        for face in ALL_FACES {
            let (matrix, provenance) = assignment.face_code(mi, face);
            let entry = match provenance {
                Some(p) => {
                    let file = format!("faces/{}_{}.txt", site.id, face.label().replace('+', "p").replace('-', "n"));
                    files.push((file.clone(), matrix.to_grid_string()));
                    json!({
                        "grid_file": file,
                        "member": names[p.member_index],
                        "role": p.role,
                        "mating_index": p.mating_index,
                    })
                }
                None => json!({ "grid_file": null }),
            };
            faces.insert(face.label().to_string(), entry);
        }
        modules_json.push(json!({
            "id": site.id,
            "position": site.position,
            "faces": faces,
        }));
    }
    let mut manifest = RunManifest::new("assemble", json!({ "topology": "metacube" }));
    manifest.inputs = vec![clique_dir.display().to_string()];
    let out = AssembleOutput {
        manifest: manifest.clone(),
        modules: modules_json,
        matings: topology.matings().len(),
        fluid_window: window,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("assignment serializes");
    text.push('\n');
    files.push(("assignment.json".into(), text));
    println!(
        "assigned {} matings, fluid window (-1, {})",
        topology.matings().len(),
        window.hi
    );
    finish(out_dir, manifest, files)
}

fn cmd_gcode(
    grid: Option<&Path>,
    faces_dir: Option<&Path>,
    pitch_mm: f64,
    z_lift_mm: f64,
    dwell_s: f64,
    out_dir: &Path,
) -> Result<(), Error> {
    let (names, grids, inputs) = match (grid, faces_dir) {
        (Some(g), None) => {
            let m = PixelMatrix::read_grid_file(g)?;
            let stem = g
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "grid".into());
            (vec![stem], vec![m], vec![g.display().to_string()])
        }
        (None, Some(dir)) => {
            let (names, grids) = read_pool_dir(dir)?;
            (names, grids, vec![dir.display().to_string()])
        }
        _ => {
            return Err(Error::InvalidInput(
                "provide exactly one of --grid or --faces-dir".into(),
            ))
        }
    };
    let mut files = Vec::new();
    let mut total_pixels = 0usize;
    for (name, m) in names.iter().zip(&grids) {
        let program = emit_program(m, pitch_mm, z_lift_mm, dwell_s)?;
        total_pixels += program.pixel_count();
        files.push((format!("{name}.gcode"), render_gcode(&program)));
    }
    println!(
        "wrote {} programs, {total_pixels} pixels, total dwell {:.1} s",
        files.len(),
        total_pixels as f64 * dwell_s
    );
    let mut manifest = RunManifest::new(
        "gcode",
        json!({ "pitch_mm": pitch_mm, "z_lift_mm": z_lift_mm, "dwell_s": dwell_s }),
    );
    manifest.inputs = inputs;
    finish(out_dir, manifest, files)
}

fn cmd_scan(scan: &Path, dead_band: f64, out_dir: &Path) -> Result<(), Error> {
    let grid = ScanGrid::read_csv_file(scan)?;
    let classified = classify_scan(&grid, dead_band)?;
    if classified.ambiguous > 0 {
        eprintln!(
            "warning: {} readings inside the +/-{dead_band} dead band left unprogrammed",
            classified.ambiguous
        );
    }
    let mut manifest = RunManifest::new("scan", json!({ "dead_band": dead_band }));
    manifest.inputs = vec![scan.display().to_string()];
    finish(
        out_dir,
        manifest,
        vec![("classified.txt".into(), classified.matrix.to_grid_string())],
    )
}

#[derive(Serialize)]
struct ForceOutput {
    manifest: RunManifest,
    meta: magpix::force::ForceMeta,
    normalized_ssd: Option<f64>,
}

fn cmd_force(
    a: &Path,
    b: &Path,
    peak_newtons: f64,
    repulsion_scale: f64,
    side_mm: f64,
    measured: Option<&Path>,
    out_dir: &Path,
) -> Result<(), Error> {
    let ma = PixelMatrix::read_grid_file(a)?;
    let mb = PixelMatrix::read_grid_file(b)?;
    let map = predict_force_map(&ma, &mb, peak_newtons, repulsion_scale, side_mm)?;
    let ssd = match measured {
        Some(path) => Some(normalized_ssd(&map, &MeasurementGrid::read_csv_file(path)?)?),
        None => None,
    };
    let mut manifest = RunManifest::new(
        "force",
        json!({
            "peak_newtons": peak_newtons,
            "repulsion_scale": repulsion_scale,
            "side_mm": side_mm,
        }),
    );
    manifest.inputs = vec![a.display().to_string(), b.display().to_string()];
    if let Some(m) = measured {
        manifest.inputs.push(m.display().to_string());
    }
    let out = ForceOutput {
        manifest: manifest.clone(),
        meta: map.meta.clone(),
        normalized_ssd: ssd,
    };
    let mut meta_text = serde_json::to_string_pretty(&out).expect("force meta serializes");
    meta_text.push('\n');
    println!(
        "centered force {} N, peak pressure {} Pa{}",
        map.get(0, 0),
        map.meta.peak_pressure_pascals,
        match ssd {
            Some(v) => format!(", normalized SSD {v}"),
            None => String::new(),
        }
    );
    finish(
        out_dir,
        manifest,
        vec![
            ("predicted_force.csv".into(), map.to_csv()),
            ("force_meta.json".into(), meta_text),
        ],
    )
}

#[derive(Serialize)]
struct DnaRow {
    row: usize,
    bits: Vec<u8>,
    quaternary: String,
    overhang_edge: magpix::dna::EdgeCode,
    vacancy_edge: magpix::dna::EdgeCode,
}

#[derive(Serialize)]
struct DnaOutput {
    manifest: RunManifest,
    traversal: String,
    mate_convention: bool,
    /// Trit-pair to base mapping, fixed convention, recorded for readers.
    mapping: BTreeMap<String, String>,
    rows: Vec<DnaRow>,
    row_major_quaternary: Option<String>,
}

fn cmd_dna(
    grid: &Path,
    pool_path: &Path,
    mate_convention: bool,
    traversal: &str,
    out_dir: &Path,
) -> Result<(), Error> {
    let m = PixelMatrix::read_grid_file(grid)?;
    let pool = read_pool_file(pool_path)?;
    let mapping = BTreeMap::from([
        ("+1,+1".to_string(), "A".to_string()),
        ("+1,-1".to_string(), "T".to_string()),
        ("-1,+1".to_string(), "C".to_string()),
        ("-1,-1".to_string(), "G".to_string()),
    ]);
    let mut rows = Vec::new();
    let mut row_major = None;
    match traversal {
        "rows" => {
            for i in 0..m.order() {
                let row: Vec<i8> = (0..m.order()).map(|j| m.get(i, j)).collect();
                let bits = bits_from_row(&row)?;
                let vacancy_bits: Vec<bool> = if mate_convention {
                    bits.iter().map(|b| !b).collect()
                } else {
                    bits.clone()
                };
                rows.push(DnaRow {
                    row: i,
                    bits: bits.iter().map(|&b| u8::from(b)).collect(),
                    quaternary: binary_to_quaternary(&row)?.to_string(),
                    overhang_edge: edge_from_binary(&bits, EdgeRole::OverhangSide, &pool)?,
                    vacancy_edge: edge_from_binary(&vacancy_bits, EdgeRole::VacancySide, &pool)?,
                });
            }
        }
        "row-major" => {
            let cells: Vec<i8> = m.cells().to_vec();
            row_major = Some(binary_to_quaternary(&cells)?.to_string());
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "traversal must be `rows` or `row-major`, got {other:?}"
            )))
        }
    }
    let mut manifest = RunManifest::new(
        "dna",
        json!({ "mate_convention": mate_convention, "traversal": traversal }),
    );
    manifest.inputs = vec![grid.display().to_string(), pool_path.display().to_string()];
    let out = DnaOutput {
        manifest: manifest.clone(),
        traversal: traversal.to_string(),
        mate_convention,
        mapping,
        rows,
        row_major_quaternary: row_major,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("dna output serializes");
    text.push('\n');
    println!("translated {} over pool of {}", grid.display(), pool.len());
    finish(out_dir, manifest, vec![("dna_edges.json".into(), text)])
}
