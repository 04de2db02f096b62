//! End-to-end tests of the `ecis` binary: the three roles as separate
//! processes, plus the analyzer surface and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ecis::container::{parse_pgm, write_pgm, EcisContainer, EcisKeyFile};
use ecis::psnr;
use ecis::synthetic::{constant_block_image, natural_image};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecis"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_pipeline_over_files() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("in.pgm");
    let key_path = dir.path().join("key.ekey");
    let container_path = dir.path().join("img.ecis");
    let coeff_path = dir.path().join("img.ecof");
    let naive_path = dir.path().join("naive.pgm");
    let out_path = dir.path().join("out.pgm");

    // Constant blocks are exactly 1-sparse, so the pipeline recovers the
    // image pixel-exactly and PSNR hits the +infinity sentinel.
    let image = constant_block_image(4, 4, 24, 24, 13);
    write_pgm(&image, &img_path).unwrap();

    run_ok(&[
        "keygen",
        "--out",
        path_str(&key_path),
        "--block",
        "24x24",
        "--k",
        "n",
        "--seed",
        "7",
    ]);
    run_ok(&[
        "encode",
        "--image",
        path_str(&img_path),
        "--key",
        path_str(&key_path),
        "--out",
        path_str(&container_path),
        "--block",
        "24x24",
        "--ratio",
        "0.5",
    ]);
    // 96x96 at 24x24 and ratio 0.5: 16 blocks of 288 measurements each.
    let container = EcisContainer::read_file(&container_path).unwrap();
    assert_eq!(container.block_count(), 16);
    assert_eq!(container.m, 288);

    run_ok(&[
        "cloud-decode",
        "--container",
        path_str(&container_path),
        "--out",
        path_str(&coeff_path),
        "--emit-naive-view",
        path_str(&naive_path),
    ]);
    run_ok(&[
        "recover",
        "--coeffs",
        path_str(&coeff_path),
        "--key",
        path_str(&key_path),
        "--out",
        path_str(&out_path),
    ]);

    let recovered = parse_pgm(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(psnr(&image, &recovered).unwrap(), f64::INFINITY);

    // The keyless view is far worse than the key holder's.
    let naive = parse_pgm(&std::fs::read(&naive_path).unwrap()).unwrap();
    assert!(psnr(&image, &naive).unwrap() < 25.0);

    // A wrong-seed key of the right shape yields garbage, silently.
    let wrong_key_path = dir.path().join("wrong.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&wrong_key_path),
        "--block",
        "24x24",
        "--k",
        "n",
        "--seed",
        "8",
    ]);
    let wrong_out = dir.path().join("wrong.pgm");
    run_ok(&[
        "recover",
        "--coeffs",
        path_str(&coeff_path),
        "--key",
        path_str(&wrong_key_path),
        "--out",
        path_str(&wrong_out),
    ]);
    let wrong = parse_pgm(&std::fs::read(&wrong_out).unwrap()).unwrap();
    assert!(psnr(&image, &wrong).unwrap() < psnr(&image, &recovered).unwrap());
}

#[test]
fn keygen_resolves_fractions_and_rejects_k_one() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&full),
        "--block",
        "24x24",
        "--k",
        "n",
    ]);
    assert_eq!(EcisKeyFile::read_file(&full).unwrap().k, 576);

    let third = dir.path().join("third.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&third),
        "--block",
        "24x24",
        "--k",
        "n/3",
    ]);
    assert_eq!(EcisKeyFile::read_file(&third).unwrap().k, 192);

    let bad = dir.path().join("bad.ekey");
    let out = bin()
        .args([
            "keygen",
            "--out",
            path_str(&bad),
            "--block",
            "24x24",
            "--k",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("k = 2"), "no suggestion in: {stderr}");

    // Fractions that round to 1 are rejected the same way.
    let out = bin()
        .args([
            "keygen",
            "--out",
            path_str(&bad),
            "--block",
            "2x2",
            "--k",
            "n/4",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn roi_none_matches_identity_key_container() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("in.pgm");
    write_pgm(&natural_image(48, 48, 5), &img_path).unwrap();

    let encode = |key: &Path, out: &Path| {
        run_ok(&[
            "encode",
            "--image",
            path_str(&img_path),
            "--key",
            path_str(key),
            "--out",
            path_str(out),
            "--block",
            "24x24",
            "--seed",
            "3",
        ]);
    };

    // An all-zero ROI mask disables encryption everywhere...
    let roi_key = dir.path().join("roi.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&roi_key),
        "--block",
        "24x24",
        "--k",
        "n",
        "--roi",
        "none",
        "--grid",
        "2x2",
    ]);
    let roi_container = dir.path().join("roi.ecis");
    encode(&roi_key, &roi_container);

    // ...and produces the same bytes as an identity (k = 0) key.
    let id_key = dir.path().join("id.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&id_key),
        "--block",
        "24x24",
        "--k",
        "0",
    ]);
    let id_container = dir.path().join("id.ecis");
    encode(&id_key, &id_container);

    assert_eq!(
        std::fs::read(&roi_container).unwrap(),
        std::fs::read(&id_container).unwrap()
    );
}

#[test]
fn rectangular_roi_only_scrambles_selected_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("in.pgm");
    let image = constant_block_image(2, 2, 24, 24, 3);
    write_pgm(&image, &img_path).unwrap();

    let key = dir.path().join("roi.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&key),
        "--block",
        "24x24",
        "--k",
        "n",
        "--roi",
        "0,0,1x1",
        "--grid",
        "2x2",
        "--seed",
        "11",
    ]);
    let container = dir.path().join("img.ecis");
    run_ok(&[
        "encode",
        "--image",
        path_str(&img_path),
        "--key",
        path_str(&key),
        "--out",
        path_str(&container),
        "--block",
        "24x24",
    ]);
    let coeffs = dir.path().join("img.ecof");
    let naive = dir.path().join("naive.pgm");
    run_ok(&[
        "cloud-decode",
        "--container",
        path_str(&container),
        "--out",
        path_str(&coeffs),
        "--emit-naive-view",
        path_str(&naive),
    ]);

    // Only the top-left block is unreadable in the naive view.
    let view = parse_pgm(&std::fs::read(&naive).unwrap()).unwrap();
    let mut block_err = [0.0f64; 4];
    for y in 0..48 {
        for x in 0..48 {
            let b = (y / 24) * 2 + x / 24;
            let d = view.get(x, y) as f64 - image.get(x, y) as f64;
            block_err[b] += d * d;
        }
    }
    assert!(block_err[0] > 100.0 * 576.0, "ROI block not scrambled");
    for (b, err) in block_err.iter().enumerate().skip(1) {
        assert!(*err < 1.0 * 576.0, "non-ROI block {b} damaged: {err}");
    }

    // The key holder still reads everything.
    let out = dir.path().join("out.pgm");
    run_ok(&[
        "recover",
        "--coeffs",
        path_str(&coeffs),
        "--key",
        path_str(&key),
        "--out",
        path_str(&out),
    ]);
    let recovered = parse_pgm(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(psnr(&image, &recovered).unwrap(), f64::INFINITY);
}

#[test]
fn analyze_prints_both_counting_models() {
    let out = run_ok(&["analyze", "--n", "4", "--k", "2", "--t", "2"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("72"), "paper count missing:\n{text}");
    assert!(text.contains(": 6"), "exact count missing:\n{text}");
    assert!(
        text.contains("agrees"),
        "brute-force check missing:\n{text}"
    );

    let out = run_ok(&[
        "analyze", "--n", "256", "--k", "100", "--t", "16", "--beta", "e^-10",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("12.132353"), "effective l missing:\n{text}");
    assert!(text.contains("232"), "blind min k missing:\n{text}");
}

#[test]
fn analyze_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("report.csv");
    run_ok(&[
        "analyze",
        "--n",
        "256",
        "--k",
        "100",
        "--t",
        "16",
        "--beta",
        "e^-10",
        "--p",
        "0.5,0.25,0.25",
        "--csv",
        path_str(&csv_path),
    ]);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), row.len());
    assert_eq!(
        row[header.iter().position(|h| *h == "min_k_blind").unwrap()],
        "232"
    );
}

#[test]
fn exit_codes_for_format_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();

    // Corrupt container payload: format error, exit 3.
    let img_path = dir.path().join("in.pgm");
    write_pgm(&constant_block_image(2, 2, 16, 16, 1), &img_path).unwrap();
    let key = dir.path().join("k.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&key),
        "--block",
        "16x16",
        "--k",
        "0",
    ]);
    let container = dir.path().join("img.ecis");
    run_ok(&[
        "encode",
        "--image",
        path_str(&img_path),
        "--key",
        path_str(&key),
        "--out",
        path_str(&container),
        "--block",
        "16x16",
    ]);
    let mut bytes = std::fs::read(&container).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xFF;
    std::fs::write(&container, &bytes).unwrap();
    let out = bin()
        .args([
            "cloud-decode",
            "--container",
            path_str(&container),
            "--out",
            path_str(&dir.path().join("x.ecof")),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // ASCII PGM: unsupported format, exit 3.
    let ascii = dir.path().join("ascii.pgm");
    std::fs::write(&ascii, b"P2\n2 2\n255\n0 1 2 3\n").unwrap();
    let out = bin()
        .args([
            "encode",
            "--image",
            path_str(&ascii),
            "--key",
            path_str(&key),
            "--out",
            path_str(&dir.path().join("y.ecis")),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Unknown flag: clap usage error, exit 2.
    let out = bin().args(["analyze", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Block size exceeding the image: usage error, exit 2.
    let out = bin()
        .args([
            "bench",
            "--image",
            path_str(&img_path),
            "--blocks",
            "64x64",
            "--trials",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worker_pool_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("in.pgm");
    write_pgm(&natural_image(48, 48, 9), &img_path).unwrap();
    let key = dir.path().join("k.ekey");
    run_ok(&[
        "keygen",
        "--out",
        path_str(&key),
        "--block",
        "16x16",
        "--k",
        "n",
    ]);

    let single = dir.path().join("single.ecis");
    let multi = dir.path().join("multi.ecis");
    for (out, workers) in [(&single, "1"), (&multi, "3")] {
        run_ok(&[
            "encode",
            "--image",
            path_str(&img_path),
            "--key",
            path_str(&key),
            "--out",
            path_str(out),
            "--block",
            "16x16",
            "--workers",
            workers,
        ]);
    }
    assert_eq!(
        std::fs::read(&single).unwrap(),
        std::fs::read(&multi).unwrap()
    );

    let coef1 = dir.path().join("c1.ecof");
    let coef3 = dir.path().join("c3.ecof");
    for (out, workers) in [(&coef1, "1"), (&coef3, "3")] {
        run_ok(&[
            "cloud-decode",
            "--container",
            path_str(&single),
            "--out",
            path_str(out),
            "--workers",
            workers,
        ]);
    }
    assert_eq!(
        std::fs::read(&coef1).unwrap(),
        std::fs::read(&coef3).unwrap()
    );
}

#[test]
fn bench_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("in.pgm");
    write_pgm(&natural_image(48, 48, 4), &img_path).unwrap();
    let csv_path: PathBuf = dir.path().join("bench.csv");
    run_ok(&[
        "bench",
        "--image",
        path_str(&img_path),
        "--blocks",
        "16x16",
        "--trials",
        "3",
        "--csv",
        path_str(&csv_path),
    ]);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), row.len());
    let col = header.iter().position(|h| *h == "speedup_t_eu").unwrap();
    let speedup: f64 = row[col].parse().unwrap();
    assert!(speedup > 1.0, "end-user speedup {speedup} <= 1");
}
