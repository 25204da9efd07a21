//! End-to-end runs of the magpix binary against temp directories.

use std::path::Path;
use std::process::{Command, Output};

use magpix::matrix::{is_hadamard, sylvester, sylvester_permutation_pool};
use magpix::PixelMatrix;

fn magpix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magpix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_writes_sylvester_and_permutations() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = magpix(&[
        "generate",
        "--order-exponent",
        "3",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let h = PixelMatrix::read_grid_file(out_dir.join("sylvester_8.txt")).unwrap();
    assert_eq!(h, sylvester(3).unwrap());
    assert!(out_dir.join("manifest.json").exists());

    let perm_dir = dir.path().join("perms");
    let out = magpix(&[
        "generate",
        "--order-exponent",
        "1",
        "--permutations",
        "--out-dir",
        perm_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let grids: Vec<_> = std::fs::read_dir(&perm_dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().is_some_and(|x| x == "txt")).then_some(p)
        })
        .collect();
    // sylvester_2.txt + 2 distinct permutations
    assert_eq!(grids.len(), 3);
    for g in grids {
        assert!(is_hadamard(&PixelMatrix::read_grid_file(g).unwrap()).unwrap());
    }
}

#[test]
fn search_small_pool_and_exhaustion_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let pool_dir = dir.path().join("pool");
    std::fs::create_dir_all(&pool_dir).unwrap();
    let h = sylvester(1).unwrap();
    h.write_grid_file(pool_dir.join("a.txt")).unwrap();
    h.rotate90().write_grid_file(pool_dir.join("b.txt")).unwrap();

    let out_dir = dir.path().join("found");
    let out = magpix(&[
        "search",
        "--pool-dir",
        pool_dir.to_str().unwrap(),
        "--seed-threshold",
        "-1.0",
        "--step",
        "0.02",
        "--target-size",
        "2",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["threshold"], -1.0);
    assert_eq!(report["max_clique_size"], 2);
    let selected: Vec<String> = report["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(selected, vec!["clique/a.txt", "clique/b.txt"]);
    for f in &selected {
        assert!(out_dir.join(f).exists());
    }

    // unreachable target: exit code 3, nothing written
    let missing_dir = dir.path().join("nothing");
    let out = magpix(&[
        "search",
        "--pool-dir",
        pool_dir.to_str().unwrap(),
        "--seed-threshold",
        "-1.0",
        "--step",
        "0.02",
        "--target-size",
        "5",
        "--out-dir",
        missing_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!missing_dir.exists());
}

#[test]
fn score_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let h = sylvester(2).unwrap();
    h.write_grid_file(&a).unwrap();
    h.mate().write_grid_file(&b).unwrap();

    let run = |out_dir: &Path| {
        let out = magpix(&[
            "score",
            "--a",
            a.to_str().unwrap(),
            "--b",
            b.to_str().unwrap(),
            "--fine-rotation",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_ok(&out);
    };
    let d1 = dir.path().join("s1");
    let d2 = dir.path().join("s2");
    run(&d1);
    run(&d2);
    for name in ["translation_map.csv", "rotation_profile.csv", "manifest.json"] {
        let b1 = std::fs::read(d1.join(name)).unwrap();
        let b2 = std::fs::read(d2.join(name)).unwrap();
        assert_eq!(b1, b2, "{name} differs between runs");
    }
    let csv = std::fs::read_to_string(d1.join("translation_map.csv")).unwrap();
    assert!(csv.contains("0,0,-1.000000000"));
}

#[test]
fn assemble_then_gcode_covers_all_programmed_faces() {
    let dir = tempfile::tempdir().unwrap();
    let clique_dir = dir.path().join("clique");
    std::fs::create_dir_all(&clique_dir).unwrap();
    let pool = sylvester_permutation_pool(3).unwrap();
    for (i, m) in pool.iter().take(12).enumerate() {
        m.write_grid_file(clique_dir.join(format!("m{i:02}.txt"))).unwrap();
    }

    let asg_dir = dir.path().join("asg");
    let out = magpix(&[
        "assemble",
        "--clique-dir",
        clique_dir.to_str().unwrap(),
        "--out-dir",
        asg_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let asg = read_json(&asg_dir.join("assignment.json"));
    assert_eq!(asg["matings"], 12);
    assert_eq!(asg["modules"].as_array().unwrap().len(), 8);
    let face_files: Vec<_> = std::fs::read_dir(asg_dir.join("faces")).unwrap().collect();
    assert_eq!(face_files.len(), 24);
    assert!(asg["fluid_window"]["hi"].as_f64().unwrap() > -1.0);

    let gcode_dir = dir.path().join("gcode");
    let out = magpix(&[
        "gcode",
        "--faces-dir",
        asg_dir.join("faces").to_str().unwrap(),
        "--out-dir",
        gcode_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let programs: Vec<_> = std::fs::read_dir(&gcode_dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().is_some_and(|x| x == "gcode")).then_some(p)
        })
        .collect();
    assert_eq!(programs.len(), 24);
    // every program round-trips to its source grid
    for p in programs {
        let program = magpix::plotter::parse_gcode(&std::fs::read_to_string(&p).unwrap()).unwrap();
        let m = magpix::plotter::program_to_matrix(&program, 8).unwrap();
        let stem = p.file_stem().unwrap().to_str().unwrap();
        let src = PixelMatrix::read_grid_file(asg_dir.join("faces").join(format!("{stem}.txt"))).unwrap();
        assert_eq!(m, src);
    }
}

#[test]
fn scan_classifies_into_grid() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    std::fs::write(&scan, "0.9,-0.8\n0.05,-0.95\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = magpix(&[
        "scan",
        "--scan",
        scan.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: 1"));
    let m = PixelMatrix::read_grid_file(out_dir.join("classified.txt")).unwrap();
    assert_eq!(m.cells(), &[1, -1, 0, -1]);
}

#[test]
fn force_reports_calibrated_peak_and_pressure() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let h = sylvester(3).unwrap();
    h.write_grid_file(&a).unwrap();
    h.mate().write_grid_file(&b).unwrap();
    let out_dir = dir.path().join("out");
    let out = magpix(&[
        "force",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
        "--peak-newtons",
        "1.09",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let csv = std::fs::read_to_string(out_dir.join("predicted_force.csv")).unwrap();
    assert!(csv.contains("0,0,-1.090000000"));
    let meta = read_json(&out_dir.join("force_meta.json"));
    assert_eq!(meta["meta"]["peak_pressure_pascals"], 1744.0);

    // compare against its own prediction: SSD 0
    let measured = dir.path().join("m.csv");
    std::fs::write(
        &measured,
        csv.replace("force_newtons", "force_newtons"),
    )
    .unwrap();
    let out2_dir = dir.path().join("out2");
    let out = magpix(&[
        "force",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
        "--peak-newtons",
        "1.09",
        "--measured",
        measured.to_str().unwrap(),
        "--out-dir",
        out2_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let meta = read_json(&out2_dir.join("force_meta.json"));
    let ssd = meta["normalized_ssd"].as_f64().unwrap();
    assert!(ssd.abs() < 1e-12, "ssd {ssd}");
}

#[test]
fn dna_translates_rows_under_both_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("g.txt");
    sylvester(3).unwrap().write_grid_file(&grid).unwrap();
    let pool = dir.path().join("pool.txt");
    std::fs::write(&pool, "ACGT\nTTAA\nGGCC\nATAT\nCGCG\nAATT\nGGTT\nCCAA\n").unwrap();

    let literal_dir = dir.path().join("lit");
    let out = magpix(&[
        "dna",
        "--grid",
        grid.to_str().unwrap(),
        "--pool",
        pool.to_str().unwrap(),
        "--out-dir",
        literal_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let doc = read_json(&literal_dir.join("dna_edges.json"));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0]["quaternary"], "AAAA"); // all-ones first row
    assert_eq!(doc["mate_convention"], false);

    let mate_dir = dir.path().join("mate");
    let out = magpix(&[
        "dna",
        "--grid",
        grid.to_str().unwrap(),
        "--pool",
        pool.to_str().unwrap(),
        "--mate-convention",
        "--out-dir",
        mate_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let mate_doc = read_json(&mate_dir.join("dna_edges.json"));
    // all-ones row: literal vacancy edge is all absent, mate convention fills it
    let lit_vac = doc["rows"][0]["vacancy_edge"]["features"].as_array().unwrap();
    assert!(lit_vac.iter().all(|f| f["kind"] == "absent"));
    let mate_vac = mate_doc["rows"][0]["vacancy_edge"]["features"]
        .as_array()
        .unwrap();
    assert!(mate_vac.iter().all(|f| f["kind"] == "vacancy"));

    // row-major traversal emits one long translation
    let rm_dir = dir.path().join("rm");
    let out = magpix(&[
        "dna",
        "--grid",
        grid.to_str().unwrap(),
        "--pool",
        pool.to_str().unwrap(),
        "--traversal",
        "row-major",
        "--out-dir",
        rm_dir.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let rm = read_json(&rm_dir.join("dna_edges.json"));
    assert_eq!(rm["row_major_quaternary"].as_str().unwrap().len(), 32);
    assert_eq!(rm["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn validation_and_io_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "order 2\n1 2\n1 1\n").unwrap();
    let out = magpix(&[
        "score",
        "--a",
        bad.to_str().unwrap(),
        "--b",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = magpix(&[
        "score",
        "--a",
        dir.path().join("missing.txt").to_str().unwrap(),
        "--b",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));

    // clap usage errors are validation failures too
    let out = magpix(&["score", "--a"]);
    assert_eq!(out.status.code(), Some(2));
}
