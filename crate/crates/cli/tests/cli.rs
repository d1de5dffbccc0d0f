mod common;

use std::fs;

use binotone::energy::total_energy;
use binotone::energy::Quad;
use binotone::io::{load_hdr, read_ldr};
use binotone::optimizer::{Problem, TrajectoryStep};
use binotone::tonemap::ToneMapper;
use binotone_cli::{cmd_evaluate, cmd_refs, RunReport, Settings};
use common::{binotone, s, write_constant, write_scene};

#[test]
fn optimize_writes_outputs_and_report_matches_pngs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "scene.hdr", 96, 72, 21);
    let out = dir.path().join("out");
    let run = binotone(&["optimize", s(&input), "-o", s(&out)]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    for f in [
        "left.png",
        "right.png",
        "side_by_side.png",
        "anaglyph.png",
        "report.json",
        "trajectory.jsonl",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }

    let text = fs::read_to_string(out.join("report.json")).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap();
    let again: RunReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);
    assert!(report.sec_per_iter.is_none());
    assert!(report.beta_left <= report.beta_right);
    assert_eq!(report.energy.e_total, report.energy.recompute_total());

    let steps: Vec<TrajectoryStep> = fs::read_to_string(out.join("trajectory.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!((2..=report.iterations + 2).contains(&steps.len()));
    for pair in steps.windows(2) {
        if pair[0].stage == pair[1].stage {
            assert!(pair[1].objective < pair[0].objective);
        }
    }

    // re-evaluate the decoded 8-bit outputs against float references
    let settings = Settings::default();
    let img = load_hdr(&input).unwrap();
    let problem = Problem::from_config(&img, &settings.optimizer().unwrap()).unwrap();
    let left = read_ldr(out.join("left.png")).unwrap();
    let right = read_ldr(out.join("right.png")).unwrap();
    let refs = problem.references();
    let e = total_energy(
        Quad {
            left: &left,
            right: &right,
            contrast_ref: &refs.contrast,
            detail_ref: &refs.detail,
        },
        problem.edges(),
        &settings.energy(),
    )
    .unwrap();
    assert!(
        (e.e_total - report.energy.e_total).abs() <= 0.01,
        "png {} vs report {}",
        e.e_total,
        report.energy.e_total
    );
    let sbs = read_ldr(out.join("side_by_side.png")).unwrap();
    assert_eq!(sbs.dims(), (192, 72));
}

#[test]
fn timing_flag_adds_seconds_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "scene.hdr", 48, 36, 3);
    let out = dir.path().join("out");
    let run = binotone(&[
        "optimize",
        s(&input),
        "-o",
        s(&out),
        "--timing",
        "--threads",
        "1",
    ]);
    assert!(run.status.success());
    let report: RunReport =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.sec_per_iter.unwrap() > 0.0);
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = binotone(&[
        "optimize",
        s(&dir.path().join("nope.hdr")),
        "-o",
        s(dir.path()),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(!run.stderr.is_empty());
    let usage = binotone(&["optimize"]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn refs_dimensions_and_contrast_order() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "scene.hdr", 80, 60, 8);
    let out = dir.path().join("refs");
    cmd_refs(&input, &out, &Settings::default()).unwrap();
    let c = read_ldr(out.join("contrast_ref.png")).unwrap();
    let d = read_ldr(out.join("detail_ref.png")).unwrap();
    assert_eq!(c.dims(), (80, 60));
    assert_eq!(d.dims(), (80, 60));
    assert!(c.luminance().std_dev() > d.luminance().std_dev());

    let flat = write_constant(dir.path(), "flat.hdr", 20, 10, [0.4, 0.5, 0.2]);
    let out = dir.path().join("flat");
    let run = binotone(&["refs", s(&flat), "-o", s(&out)]);
    assert!(run.status.success());
    assert_eq!(
        fs::read(out.join("contrast_ref.png")).unwrap(),
        fs::read(out.join("detail_ref.png")).unwrap()
    );
}

#[test]
fn baseline_is_tonemap_at_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "scene.hdr", 64, 48, 4);
    let mapper =
        ToneMapper::new(&load_hdr(&input).unwrap(), &Settings::default().operator()).unwrap();

    let out = dir.path().join("mono.png");
    let run = binotone(&[
        "baseline",
        s(&input),
        "--beta-l",
        "1.5",
        "--beta-r",
        "6.0",
        "-o",
        s(&out),
    ]);
    assert!(run.status.success());
    assert_eq!(
        read_ldr(&out).unwrap(),
        mapper.apply(3.75).unwrap().quantized()
    );

    let run = binotone(&[
        "baseline",
        s(&input),
        "--beta-l",
        "2.5",
        "--beta-r",
        "2.5",
        "-o",
        s(&out),
    ]);
    assert!(run.status.success());
    assert_eq!(
        read_ldr(&out).unwrap(),
        mapper.apply(2.5).unwrap().quantized()
    );

    let run = binotone(&[
        "baseline",
        s(&input),
        "--beta-l",
        "0.5",
        "--beta-r",
        "2.0",
        "-o",
        s(&out),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("beta 0.5"));
}

#[test]
fn evaluate_identity_rows_and_swap() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "scene.hdr", 96, 72, 11);
    let refs = dir.path().join("refs");
    cmd_refs(&input, &refs, &Settings::default()).unwrap();
    let (c, d) = (refs.join("contrast_ref.png"), refs.join("detail_ref.png"));
    let settings = Settings::default();

    let dd = cmd_evaluate(&input, &d, &d, &settings).unwrap().energy;
    assert!((0.98..=1.0).contains(&dd.e_c), "{dd:?}");
    assert_eq!(dd.e_d, 0.0);
    let cc = cmd_evaluate(&input, &c, &c, &settings).unwrap().energy;
    assert!(cc.e_c <= 1e-3 && (0.98..=1.0).contains(&cc.e_d), "{cc:?}");

    let mixed = cmd_evaluate(&input, &d, &c, &settings).unwrap();
    assert_eq!(mixed.energy.e_c, mixed.swapped.e_c);
    assert_eq!(mixed.energy.e_f, mixed.swapped.e_f);
    assert_eq!(
        mixed.detail_swap_delta,
        (mixed.energy.e_d - mixed.swapped.e_d).abs()
    );

    let run = binotone(&["evaluate", s(&input), s(&d), s(&c)]);
    assert!(run.status.success());
    let printed: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(printed["schema_version"], 1);
    assert!(printed["energy"]["excluded_edge_pixels"].is_u64());

    let small = write_constant(dir.path(), "small.hdr", 10, 10, [1.0; 3]);
    assert!(cmd_evaluate(&small, &d, &d, &settings).is_err());
}

#[test]
fn batch_skips_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in");
    fs::create_dir(&inputs).unwrap();
    for (name, seed) in [("c.hdr", 3), ("a.hdr", 1), ("b.hdr", 2)] {
        write_scene(&inputs, name, 48, 36, seed);
    }
    fs::write(
        inputs.join("broken.hdr"),
        b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 4 +X",
    )
    .unwrap();
    fs::write(inputs.join("notes.txt"), b"ignored").unwrap();
    let csv_path = dir.path().join("table.csv");
    let run = binotone(&["batch", s(&inputs), "-o", s(&csv_path)]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stderr).contains("broken.hdr"));

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "schema_version",
            "file",
            "beta_l",
            "beta_r",
            "e_c",
            "e_d",
            "e_f",
            "e",
            "e_c_mono",
            "e_d_mono",
            "e_mono",
            "iterations",
            "sec_per_iter"
        ]
    );
    let rows: Vec<binotone_cli::BatchRow> = reader.deserialize().map(|r| r.unwrap()).collect();
    let names: Vec<&str> = rows.iter().map(|r| r.file.as_str()).collect();
    assert_eq!(names, ["a.hdr", "b.hdr", "c.hdr", "mean"]);
    let data = &rows[..3];
    let mean_e = data.iter().map(|r| r.e).sum::<f64>() / 3.0;
    assert!((rows[3].e - mean_e).abs() < 1e-12);
    for r in data {
        assert!(r.e <= r.e_mono, "{r:?}");
    }

    let bad = dir.path().join("bad");
    fs::create_dir(&bad).unwrap();
    fs::write(bad.join("x.pfm"), b"PF\n").unwrap();
    let run = binotone(&["batch", s(&bad), "-o", s(&dir.path().join("t2.csv"))]);
    assert_eq!(run.status.code(), Some(1));
}
