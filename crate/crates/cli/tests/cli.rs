use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use textline::components::{extract_components, Connectivity};
use textline::raster::{
    load_binary_page, save_binary_page, save_label_raster, BinaryPage, LabelMode, LabelRaster,
    Polarity,
};

fn textline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textline"))
        .args(args)
        .env_remove("TEXTLINE_K")
        .env_remove("TEXTLINE_LAMBDA")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = textline(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_extract_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    ok(&["synth", "--out", s(&corpus), "--seed", "3"]);
    let page = corpus.join("synth_000003.png");
    let mask = corpus.join("synth_000003.mask.png");
    let gt = corpus.join("synth_000003.gt.png");

    let out = dir.path().join("out");
    ok(&[
        "extract",
        "--page",
        s(&page),
        "--mask",
        s(&mask),
        "--out",
        s(&out),
    ]);
    for suffix in [
        "labels.png",
        "xml",
        "diagnostics.json",
        "overlay.png",
        "run.json",
    ] {
        assert!(
            out.join(format!("synth_000003.{suffix}")).exists(),
            "{suffix}"
        );
    }
    let report_path = dir.path().join("report.json");
    ok(&[
        "evaluate",
        "--gt",
        s(&gt),
        "--pred",
        s(&out.join("synth_000003.labels.png")),
        "--out",
        s(&report_path),
    ]);
    let report = json(&report_path);
    assert_eq!(report["icdar2017"]["line_iu"], 1.0);

    // The polygon output evaluates as well.
    let text = ok(&[
        "evaluate",
        "--gt",
        s(&corpus.join("synth_000003.xml")),
        "--pred",
        s(&out.join("synth_000003.xml")),
        "--page",
        s(&page),
        "--suite",
        "icdar2017",
        "--merge-pred-regions",
        "on",
    ]);
    assert!(text.contains("Line IU 1.0000"), "{text}");

    // Reruns reproduce every byte.
    let again = dir.path().join("again");
    ok(&[
        "extract",
        "--page",
        s(&page),
        "--mask",
        s(&mask),
        "--out",
        s(&again),
    ]);
    for suffix in ["labels.png", "xml", "diagnostics.json", "overlay.png"] {
        let name = format!("synth_000003.{suffix}");
        assert_eq!(
            fs::read(out.join(&name)).unwrap(),
            fs::read(again.join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn page_xml_route_matches_mask_route_on_synthetic_page() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "synth",
        "--out",
        s(dir.path()),
        "--seed",
        "4",
        "--lines",
        "3",
    ]);
    let page = dir.path().join("synth_000004.png");
    let out = dir.path().join("out");
    ok(&[
        "extract",
        "--page",
        s(&page),
        "--page-xml",
        s(&dir.path().join("synth_000004.xml")),
        "--out",
        s(&out),
    ]);
    let report_path = dir.path().join("r.json");
    ok(&[
        "evaluate",
        "--gt",
        s(&dir.path().join("synth_000004.gt.png")),
        "--pred",
        s(&out.join("synth_000004.labels.png")),
        "--out",
        s(&report_path),
    ]);
    assert_eq!(json(&report_path)["icdar2017"]["line_iu"], 1.0);
}

#[test]
fn missing_or_blank_mask_fails_with_code() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("p.png");
    save_binary_page(&BinaryPage::from_fn(20, 20, |x, y| x == y).unwrap(), &page).unwrap();
    let out = textline(&[
        "extract",
        "--page",
        s(&page),
        "--mask",
        s(&dir.path().join("none.png")),
        "--out",
        s(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_READ"));

    let blank = dir.path().join("blank.png");
    save_binary_page(&BinaryPage::new(20, 20).unwrap(), &blank).unwrap();
    let out = textline(&[
        "extract",
        "--page",
        s(&page),
        "--mask",
        s(&blank),
        "--out",
        s(dir.path()),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("E_NO_BLOB_LINES") && err.contains("no blob lines detected"),
        "{err}"
    );
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("p.png");
    save_binary_page(&BinaryPage::from_fn(20, 20, |x, y| x == y).unwrap(), &page).unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"params": {"k": 6, "lamda": 2}}"#).unwrap();
    let out = textline(&[
        "extract",
        "--page",
        s(&page),
        "--mask",
        s(&page),
        "--out",
        s(dir.path()),
        "--config",
        s(&cfg),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_CONFIG"));
}

#[test]
fn config_file_and_flags_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "synth",
        "--out",
        s(dir.path()),
        "--seed",
        "1",
        "--lines",
        "2",
    ]);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"params": {"k": 6, "lambda": {"fixed": 2.5}}}"#).unwrap();
    let out = dir.path().join("out");
    ok(&[
        "extract",
        "--page",
        s(&dir.path().join("synth_000001.png")),
        "--mask",
        s(&dir.path().join("synth_000001.mask.png")),
        "--out",
        s(&out),
        "--config",
        s(&cfg),
        "--connectivity",
        "4",
    ]);
    let run = json(&out.join("synth_000001.run.json"));
    assert_eq!(run["config"]["params"]["k"], 6);
    assert_eq!(run["config"]["params"]["lambda"]["fixed"], 2.5);
    assert_eq!(run["config"]["params"]["connectivity"], "4");
}

#[test]
fn evaluate_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let square = |dx: u32| {
        let mut r = LabelRaster::new(30, 20).unwrap();
        for y in 0..10 {
            for x in 0..10 {
                r.set(x + dx, y, 1);
            }
        }
        r
    };
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    save_label_raster(&square(0), &a, LabelMode::Indexed).unwrap();
    save_label_raster(&square(1), &b, LabelMode::Indexed).unwrap();
    let m_at = |t: &str| {
        let path = dir.path().join(format!("m{t}.json"));
        ok(&[
            "evaluate",
            "--gt",
            s(&a),
            "--pred",
            s(&b),
            "--match-threshold",
            t,
            "--out",
            s(&path),
        ]);
        json(&path)["icdar2013"]["m"].as_u64().unwrap()
    };
    assert_eq!(m_at("0.5"), 1);
    assert_eq!(m_at("0.9"), 0);

    let same = dir.path().join("same.json");
    ok(&[
        "evaluate",
        "--gt",
        s(&a),
        "--pred",
        s(&a),
        "--out",
        s(&same),
    ]);
    let r = json(&same);
    assert_eq!(r["icdar2013"]["fm"], 1.0);
    assert_eq!(r["icdar2017"]["line_iu"], 1.0);
    assert_eq!(r["icdar2017"]["pixel_iu"], 1.0);

    // Two GT lines, the same two plus a spurious one predicted.
    let mut gt = LabelRaster::new(30, 20).unwrap();
    let mut pred = LabelRaster::new(30, 20).unwrap();
    for x in 0..30 {
        gt.set(x, 2, 1);
        gt.set(x, 8, 2);
        pred.set(x, 2, 1);
        pred.set(x, 8, 2);
        pred.set(x, 15, 3);
    }
    let (g, p) = (dir.path().join("g.png"), dir.path().join("p.png"));
    save_label_raster(&gt, &g, LabelMode::Indexed).unwrap();
    save_label_raster(&pred, &p, LabelMode::DistinctColors).unwrap();
    let spur = dir.path().join("spur.json");
    ok(&[
        "evaluate",
        "--gt",
        s(&g),
        "--pred",
        s(&p),
        "--out",
        s(&spur),
    ]);
    assert_eq!(json(&spur)["icdar2013"]["ra"], 2.0 / 3.0);

    let small = dir.path().join("small.png");
    save_label_raster(
        &LabelRaster::new(10, 10).unwrap(),
        &small,
        LabelMode::Indexed,
    )
    .unwrap();
    let out = textline(&["evaluate", "--gt", s(&g), "--pred", s(&small)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_DIMENSION_MISMATCH"));
}

#[test]
fn tile_and_stitch() {
    let dir = tempfile::tempdir().unwrap();
    let page_path = dir.path().join("page.png");
    let page = BinaryPage::from_fn(500, 250, |x, y| (x * 7 + y * 3) % 11 == 0).unwrap();
    save_binary_page(&page, &page_path).unwrap();
    let tiles = dir.path().join("tiles");
    ok(&["tile", "--page", s(&page_path), "--out", s(&tiles)]);
    let manifest = json(&tiles.join("manifest.json"));
    let listed = manifest["tiles"].as_array().unwrap();
    assert_eq!(listed.len(), 2);
    assert_eq!(
        (listed[1]["x"].as_u64(), listed[1]["y"].as_u64()),
        (Some(250), Some(0))
    );

    let stitched = dir.path().join("stitched.png");
    ok(&["stitch", "--tiles", s(&tiles), "--out", s(&stitched)]);
    assert_eq!(
        load_binary_page(&stitched, Polarity::InkDark).unwrap(),
        page
    );

    fs::remove_file(tiles.join(listed[1]["file"].as_str().unwrap())).unwrap();
    let out = textline(&["stitch", "--tiles", s(&tiles), "--out", s(&stitched)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_MISSING_TILE"));
}

#[test]
fn genlabels_from_three_polygons() {
    let dir = tempfile::tempdir().unwrap();
    let xml = dir.path().join("lines.xml");
    let lines: Vec<(u32, Vec<textline::geometry::Ring>)> = (0..3)
        .map(|i| {
            (
                i + 1,
                vec![textline::geometry::Ring::rectangle(
                    10,
                    10 + 40 * i as i64,
                    200,
                    24,
                )],
            )
        })
        .collect();
    textline::pagexml::write_page_xml(&xml, "p.png", (240, 140), &lines).unwrap();
    let mask = dir.path().join("mask.png");
    ok(&["genlabels", "--page-xml", s(&xml), "--out", s(&mask)]);
    let m = load_binary_page(&mask, Polarity::InkDark).unwrap();
    assert_eq!(extract_components(&m, Connectivity::Eight).len(), 3);
}

#[test]
fn synth_is_reproducible_and_augment_writes_four() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&[
        "synth",
        "--out",
        s(&a),
        "--seed",
        "7",
        "--count",
        "2",
        "--bridge-probability",
        "0.5",
    ]);
    ok(&[
        "synth",
        "--out",
        s(&b),
        "--seed",
        "7",
        "--count",
        "2",
        "--bridge-probability",
        "0.5",
    ]);
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap());
    }

    let strip = dir.path().join("strip.png");
    save_binary_page(
        &BinaryPage::from_fn(120, 30, |_, y| y % 8 < 3).unwrap(),
        &strip,
    )
    .unwrap();
    let out = dir.path().join("aug");
    ok(&["augment", "--strip", s(&strip), "--out", s(&out)]);
    assert_eq!(fs::read_dir(&out).unwrap().count(), 4);
}

#[test]
fn batch_extracts_all_pages() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    ok(&[
        "synth",
        "--out",
        s(&corpus),
        "--seed",
        "20",
        "--count",
        "3",
        "--lines",
        "3",
    ]);
    let (pages, masks) = (dir.path().join("pages"), dir.path().join("masks"));
    fs::create_dir_all(&pages).unwrap();
    fs::create_dir_all(&masks).unwrap();
    for seed in 20..23 {
        let name = format!("synth_{seed:06}");
        fs::copy(
            corpus.join(format!("{name}.png")),
            pages.join(format!("{name}.png")),
        )
        .unwrap();
        fs::copy(
            corpus.join(format!("{name}.mask.png")),
            masks.join(format!("{name}.png")),
        )
        .unwrap();
    }
    let out = dir.path().join("out");
    let stdout = ok(&[
        "extract-batch",
        "--pages",
        s(&pages),
        "--masks",
        s(&masks),
        "--out",
        s(&out),
        "--jobs",
        "2",
    ]);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("ok")).count(), 3);

    fs::remove_file(masks.join("synth_000021.png")).unwrap();
    let failed = textline(&[
        "extract-batch",
        "--pages",
        s(&pages),
        "--masks",
        s(&masks),
        "--out",
        s(&out),
    ]);
    assert!(!failed.status.success());
    assert!(String::from_utf8_lossy(&failed.stderr).contains("E_BATCH"));
}

#[test]
fn print_config_lists_defaults() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["--print-config"])).unwrap();
    assert_eq!(v["extract"]["params"]["k"], 4);
    assert_eq!(v["extract"]["params"]["lambda"], "auto");
    assert_eq!(v["extract"]["brush_thickness"], 12);
    assert_eq!(v["evaluate"]["match_threshold"], 0.9);
    assert_eq!(v["evaluate"]["iu_threshold"], 0.75);
    assert_eq!(v["tile"]["window"], 350);
}

#[test]
fn env_overrides_flags_defaults() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "synth",
        "--out",
        s(dir.path()),
        "--seed",
        "2",
        "--lines",
        "2",
    ]);
    let out = dir.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_textline"))
        .args([
            "extract",
            "--page",
            s(&dir.path().join("synth_000002.png")),
            "--mask",
            s(&dir.path().join("synth_000002.mask.png")),
            "--out",
            s(&out),
        ])
        .env("TEXTLINE_K", "7")
        .env("TEXTLINE_LAMBDA", "0")
        .output()
        .unwrap();
    assert!(output.status.success());
    let run = json(&out.join("synth_000002.run.json"));
    assert_eq!(run["config"]["params"]["k"], 7);
    assert_eq!(run["config"]["params"]["lambda"]["fixed"], 0.0);
}
