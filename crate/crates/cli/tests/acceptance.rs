#![allow(clippy::needless_range_loop, clippy::type_complexity)]

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Run with `cargo test -p wsp-cli --test acceptance`. Oracles here are
//! written independently of the library internals.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::{Rng, SeedableRng};
use wsp_cli::commands::{centering_events, cmd_wsp, WspOutcome};
use wsp_cli::{Cli, Command};
use wsp_core::io::idx::{encode_idx_images, parse_idx_header, parse_idx_images, IDX_IMAGES_MAGIC};
use wsp_core::io::matrix_file::{load_matrix, save_matrix, MatrixFormat};
use wsp_core::io::{clip_and_round_pixels, load_idx_labels, render_grid, ImageLayout};
use wsp_core::{
    build_cache, calibrate_concentration, draw_symmetric_dirichlet, energy_terms,
    estimate_centering_gap, mc_weighted, run_ccp, run_ccp_weighted, CandidateSet, DiscreteMeasure,
    Matrix, OptimizerOptions, RandomMeasureParams, ReferenceSet, StopReason, WspRng,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> WspRng {
    WspRng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut WspRng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-3.0..3.0))
        .collect();
    Matrix::from_col_major(rows, cols, data).unwrap()
}

fn random_simplex(rng: &mut WspRng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn reg_dist(u: &[f64], v: &[f64], eps: f64) -> f64 {
    let d = dist(u, v);
    (d * d + eps * eps).sqrt()
}

// ---------------------------------------------------------------- criterion 1

fn naive_mc_weighted(a: &Matrix, p: &Matrix, w: &[f64], eps: f64) -> f64 {
    let n = a.cols() as f64;
    let mut attract = 0.0;
    for i in 0..a.cols() {
        for m in 0..p.cols() {
            attract += w[m] * reg_dist(a.col(i), p.col(m), eps);
        }
    }
    let mut repel = 0.0;
    for i in 0..a.cols() {
        for j in 0..i {
            repel += reg_dist(a.col(i), a.col(j), eps);
        }
    }
    2.0 / n * attract - 2.0 / (n * n) * repel
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = r.random_range(1..=8);
        let n = r.random_range(1..=10);
        let big_n = r.random_range(1..=50);
        let p = ReferenceSet::new(random_matrix(&mut r, d, big_n)).unwrap();
        let a = CandidateSet::new(random_matrix(&mut r, d, n)).unwrap();
        let w = random_simplex(&mut r, big_n);
        let cache = build_cache(&a, &p, &w).unwrap();
        let fast = mc_weighted(&cache);
        let slow = naive_mc_weighted(a.points(), p.data(), &w, cache.epsilon);
        worst = worst.max((fast - slow).abs() / slow.abs().max(f64::MIN_POSITIVE));
    }
    outcome(
        worst <= 1e-10,
        format!("max relative error {worst:.2e} (bound 1e-10)"),
    )
}

// ---------------------------------------------------------------- criterion 2

fn max_increase(costs: &[f64]) -> f64 {
    costs
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..50 {
        let d = r.random_range(1..=3);
        let big_n = r.random_range(2..=100);
        let n = r.random_range(1..=10);
        let p = ReferenceSet::new(random_matrix(&mut r, d, big_n)).unwrap();
        let w = random_simplex(&mut r, big_n);
        let options = OptimizerOptions {
            seed,
            tol: 1e-12,
            max_iter: 300,
            ..Default::default()
        };
        match run_ccp_weighted(&p, n, &w, &options) {
            Ok((_, trace)) => worst = worst.max(max_increase(&trace.costs)),
            Err(e) => return outcome(false, format!("instance {seed}: {e}")),
        }
    }
    let random_ok = worst <= 1e-9;
    let (mnist_ok, mnist_detail) = match mnist_runs() {
        Ok(m) => {
            let w = m
                .outcome
                .runs
                .iter()
                .map(|run| max_increase(&run.trace.costs))
                .fold(f64::NEG_INFINITY, f64::max);
            (w <= 1e-9, format!("MNIST runs max step {w:.3e}"))
        }
        Err(e) => (false, format!("MNIST runs failed: {e}")),
    };
    outcome(
        random_ok && mnist_ok,
        format!("random instances max step {worst:.3e}; {mnist_detail} (bound +1e-9)"),
    )
}

// ---------------------------------------------------------------- criterion 3

fn weiszfeld_objective(x: [f64; 2], p: &Matrix, w: &[f64]) -> f64 {
    (0..p.cols()).map(|m| w[m] * dist(&x, p.col(m))).sum()
}

/// Fine grid over the bounding box, then repeated local grids shrinking
/// around the incumbent.
fn brute_force_median(p: &Matrix, w: &[f64]) -> [f64; 2] {
    let ranges = p.row_ranges();
    let (x0, x1) = ranges[0];
    let (y0, y1) = ranges[1];
    let mut best = [x0, y0];
    let mut best_f = f64::INFINITY;
    let steps = 400;
    for a in 0..=steps {
        for b in 0..=steps {
            let x = [
                x0 + (x1 - x0) * a as f64 / steps as f64,
                y0 + (y1 - y0) * b as f64 / steps as f64,
            ];
            let f = weiszfeld_objective(x, p, w);
            if f < best_f {
                best_f = f;
                best = x;
            }
        }
    }
    let mut h = ((x1 - x0).max(y1 - y0)) / steps as f64;
    while h > 1e-10 {
        let center = best;
        for a in -10..=10 {
            for b in -10..=10 {
                let x = [
                    center[0] + h * a as f64 / 5.0,
                    center[1] + h * b as f64 / 5.0,
                ];
                let f = weiszfeld_objective(x, p, w);
                if f < best_f {
                    best_f = f;
                    best = x;
                }
            }
        }
        h /= 4.0;
    }
    best
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let p = random_matrix(&mut r, 2, 10);
        let w = random_simplex(&mut r, 10);
        let oracle = brute_force_median(&p, &w);
        let reference = ReferenceSet::new(p).unwrap();
        let options = OptimizerOptions {
            seed,
            tol: 1e-15,
            max_iter: 100_000,
            ..Default::default()
        };
        let (out, _) = run_ccp_weighted(&reference, 1, &w, &options).unwrap();
        worst = worst.max(dist(out.point(0), &oracle));
    }
    outcome(
        worst <= 1e-4,
        format!("max distance to oracle {worst:.2e} (bound 1e-4)"),
    )
}

// ---------------------------------------------------------------- criterion 4

struct Moments {
    mean: f64,
    var: f64,
    fourth: f64,
}

fn moments(samples: &[f64]) -> Moments {
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let fourth = samples.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / k;
    Moments { mean, var, fourth }
}

fn criterion_4() -> Outcome {
    let n0 = 100;
    let draws = 20_000;
    let (kappa, alpha) = calibrate_concentration(n0, 0.4).unwrap();
    let mut r = rng(4);
    let mut columns = (0..n0)
        .map(|_| Vec::with_capacity(draws))
        .collect::<Vec<Vec<f64>>>();
    for _ in 0..draws {
        let w = draw_symmetric_dirichlet(n0, alpha, &mut r).unwrap();
        for (j, v) in w.into_iter().enumerate() {
            columns[j].push(v);
        }
    }
    let mean_true = 1.0 / n0 as f64;
    let var_true = (n0 as f64 - 1.0) / ((n0 * n0) as f64 * (kappa + 1.0));
    let stats: Vec<Moments> = columns.iter().map(|c| moments(c)).collect();
    let z = |m: &Moments| {
        let z_mean = (m.mean - mean_true) / (var_true / draws as f64).sqrt();
        let var_se = ((m.fourth - m.var * m.var) / draws as f64).sqrt();
        let z_var = (m.var - var_true) / var_se;
        (z_mean, z_var)
    };
    let cvs: Vec<f64> = stats.iter().map(|m| m.var.sqrt() / m.mean).collect();
    let cv_lo = cvs.iter().cloned().fold(f64::INFINITY, f64::min);
    let cv_hi = cvs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cv_ok = cv_lo >= 0.38 && cv_hi <= 0.42;
    let (z0_mean, z0_var) = z(&stats[0]);
    let first_ok = z0_mean.abs() < 3.0 && z0_var.abs() < 3.0;
    let within = stats
        .iter()
        .filter(|m| {
            let (a, b) = z(m);
            a.abs() < 3.0 && b.abs() < 3.0
        })
        .count();
    outcome(
        cv_ok && first_ok && within >= 95,
        format!(
            "per-component CV in [{cv_lo:.4}, {cv_hi:.4}]; component 0 z(mean) {z0_mean:.2}, z(var) {z0_var:.2}; {within}/100 components within 3 sigma"
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let reference = ReferenceSet::new(random_matrix(&mut r, 3, 50)).unwrap();
    let events = centering_events(&reference, 40, &mut r);
    let params = RandomMeasureParams::with_cv(0.4);
    let report = estimate_centering_gap(&reference, &params, 20_000, &events, &mut r).unwrap();
    let frac = report.fraction_within(3.0);
    let max_z = report
        .rows
        .iter()
        .map(|row| row.z.abs())
        .fold(0.0, f64::max);
    outcome(
        frac >= 0.95,
        format!(
            "{:.1}% of 40 events with |z| < 3 (max |z| {max_z:.2})",
            100.0 * frac
        ),
    )
}

// ------------------------------------------------------- criteria 6 and 7 data

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

struct MnistRuns {
    outcome: WspOutcome,
    dir: tempfile::TempDir,
    elapsed: Duration,
}

/// Five `wsp` runs on the MNIST 6/9 subset with the protocol settings.
fn mnist_runs() -> Result<&'static MnistRuns, String> {
    static CELL: OnceLock<Result<MnistRuns, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let data = data_dir();
        let argv: Vec<String> = [
            "wsp",
            "wsp",
            "--input",
            data.join("mnist-subset-images-idx3-ubyte")
                .to_str()
                .unwrap(),
            "--labels",
            data.join("mnist-subset-labels-idx1-ubyte")
                .to_str()
                .unwrap(),
            "--keep",
            "6,9",
            "--n",
            "10",
            "--cv",
            "0.4",
            "--tol",
            "1e-5",
            "--max-iter",
            "1000",
            "--runs",
            "5",
            "--seed",
            "2024",
            "--out",
            dir.path().join("points.csv").to_str().unwrap(),
            "--render",
            dir.path().join("grid.png").to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
        let Command::Wsp(args) = cli.command else {
            unreachable!()
        };
        let start = Instant::now();
        let outcome = cmd_wsp(&args).map_err(|e| format!("{e:#}"))?;
        Ok(MnistRuns {
            outcome,
            dir,
            elapsed: start.elapsed(),
        })
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn png_dims(path: &Path) -> Result<(u32, u32), String> {
    let file = std::fs::File::open(path).map_err(|e| e.to_string())?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let reader = decoder.read_info().map_err(|e| e.to_string())?;
    let info = reader.info();
    Ok((info.width, info.height))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let m = match mnist_runs() {
        Ok(m) => m,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let o = &m.outcome;
    let atoms = o.dataset.reference.len();
    let stops: Vec<&str> = o
        .runs
        .iter()
        .map(|r| r.trace.stop_reason.as_str())
        .collect();
    let converged = o
        .runs
        .iter()
        .all(|r| r.trace.stop_reason == StopReason::Converged);
    let in_box = o.runs.iter().all(|r| r.trace.within_bounding_box);
    let last_delta: Vec<String> = o
        .runs
        .iter()
        .map(|r| {
            let c = &r.trace.costs;
            format!("{:.1e}", (c[c.len() - 1] - c[c.len() - 2]).abs())
        })
        .collect();
    let max_excess = o
        .runs
        .iter()
        .map(|r| r.trace.box_excess)
        .fold(0.0, f64::max);
    let grid = m.dir.path().join("grid.png");
    let expected_dims = (10 * 28 + 9 * 2, 5 * 28 + 4 * 2);
    let grid_ok = png_dims(&grid).is_ok_and(|d| d == expected_dims);
    let wall = m.elapsed.as_secs_f64();
    outcome(
        converged && in_box && grid_ok && wall <= 300.0,
        format!(
            "N={atoms}; stop reasons {stops:?}; final |delta| {last_delta:?}; max box excess {max_excess:.2} (allowed 1e-6 x diameter); grid {}; {wall:.1} s",
            if grid_ok { "ok" } else { "missing or wrong size" }
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let o = match mnist_runs() {
        Ok(m) => &m.outcome,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let mut min_sep = f64::INFINITY;
    let mut identical = false;
    for (a, ra) in o.runs.iter().enumerate() {
        for rb in &o.runs[a + 1..] {
            let (pa, pb) = (ra.points.points(), rb.points.points());
            identical |= pa
                .as_slice()
                .iter()
                .zip(pb.as_slice())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            let sep = pa
                .columns()
                .map(|x| {
                    pb.columns()
                        .map(|y| dist(x, y))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            min_sep = min_sep.min(sep);
        }
    }
    let seeds: std::collections::HashSet<u64> = o.runs.iter().map(|r| r.child_seed).collect();
    outcome(
        min_sep > 1.0 && !identical && seeds.len() == 5,
        format!(
            "smallest pairwise max-min separation {min_sep:.2} (bound 1.0); bitwise-identical pair: {identical}; distinct child seeds: {}",
            seeds.len()
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    for k in 0..10u64 {
        let d = r.random_range(1..=4);
        let big_n = r.random_range(2..=40);
        let n = r.random_range(1..=6);
        let p = ReferenceSet::new(random_matrix(&mut r, d, big_n)).unwrap();
        let options = OptimizerOptions {
            seed: 100 + k,
            tol: 1e-9,
            max_iter: 200,
            ..Default::default()
        };
        let w = vec![1.0 / big_n as f64; big_n];
        let (a, ta) = run_ccp(&p, n, &options).unwrap();
        let (b, tb) = run_ccp_weighted(&p, n, &w, &options).unwrap();
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        let cost_bits = |c: &[f64]| c.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        if bits(a.points()) != bits(b.points()) || cost_bits(&ta.costs) != cost_bits(&tb.costs) {
            return outcome(false, format!("instance {k} differs"));
        }
    }
    outcome(
        true,
        "10/10 instances bitwise identical (points and cost traces)",
    )
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let mut worst_sym: f64 = 0.0;
    let mut worst_self_ratio: f64 = 0.0;
    for _ in 0..50 {
        let d = r.random_range(1..=5);
        let nf = r.random_range(1..=20);
        let ng = r.random_range(1..=20);
        let f =
            DiscreteMeasure::new(random_matrix(&mut r, d, nf), random_simplex(&mut r, nf)).unwrap();
        let g =
            DiscreteMeasure::new(random_matrix(&mut r, d, ng), random_simplex(&mut r, ng)).unwrap();
        let fg = energy_terms(&f, &g).unwrap().reported();
        let gf = energy_terms(&g, &f).unwrap().reported();
        worst_sym = worst_sym.max((fg - gf).abs());
        let ff = energy_terms(&f, &f).unwrap();
        worst_self_ratio = worst_self_ratio.max(ff.reported() / ff.epsilon);
    }
    let zero = DiscreteMeasure::uniform(Matrix::from_col_major(1, 1, vec![0.0]).unwrap()).unwrap();
    let one = DiscreteMeasure::uniform(Matrix::from_col_major(1, 1, vec![1.0]).unwrap()).unwrap();
    let point = energy_terms(&zero, &one).unwrap().reported();
    outcome(
        worst_sym <= 1e-12 && worst_self_ratio <= 3.0 && (point - 2.0).abs() <= 1e-12,
        format!(
            "max asymmetry {worst_sym:.1e}; max E(F,F)/eps {worst_self_ratio:.3}; point masses {point:?}"
        ),
    )
}

// --------------------------------------------------------------- criterion 10

fn decode_png(path: &Path) -> (u32, u32, Vec<u8>) {
    let file = std::fs::File::open(path).unwrap();
    let mut reader = png::Decoder::new(std::io::BufReader::new(file))
        .read_info()
        .unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(10);
    let mut failures = Vec::new();

    // WSPM bitwise round trip, including awkward values.
    let mut m = random_matrix(&mut r, 7, 13);
    m.as_mut_slice()[..5].copy_from_slice(&[
        -0.0,
        f64::MIN_POSITIVE / 3.0,
        f64::MAX,
        1e-308,
        -7.25,
    ]);
    let path = dir.path().join("m.wspm");
    save_matrix(&path, &m, MatrixFormat::Binary).unwrap();
    let back = load_matrix(&path).unwrap();
    let same = back.rows() == m.rows()
        && back.cols() == m.cols()
        && back
            .as_slice()
            .iter()
            .zip(m.as_slice())
            .all(|(a, b)| a.to_bits() == b.to_bits());
    if !same {
        failures.push("WSPM round trip");
    }

    // Render then decode, gray and RGB.
    for (layout, count, cols) in [
        (ImageLayout::new(5, 4, 1), 7usize, 3usize),
        (ImageLayout::new(3, 6, 3), 4, 4),
    ] {
        let raw = Matrix::from_col_major(
            layout.dim(),
            count,
            (0..layout.dim() * count)
                .map(|_| r.random_range(-40.0..300.0))
                .collect(),
        )
        .unwrap();
        let clipped = clip_and_round_pixels(&CandidateSet::new(raw).unwrap());
        let path = dir.path().join(format!("g{}.png", layout.channels));
        render_grid(clipped.points(), layout, cols, &path).unwrap();
        let (w, h, pixels) = decode_png(&path);
        let rows = count.div_ceil(cols);
        let ew = cols * layout.width + (cols - 1) * 2;
        let eh = rows * layout.height + (rows - 1) * 2;
        let mut ok = (w as usize, h as usize) == (ew, eh);
        for (i, img) in clipped.points().columns().enumerate() {
            let (y0, x0) = (
                (i / cols) * (layout.height + 2),
                (i % cols) * (layout.width + 2),
            );
            for rr in 0..layout.height {
                for cc in 0..layout.width {
                    for k in 0..layout.channels {
                        let expect = img[(rr * layout.width + cc) * layout.channels + k];
                        let got = pixels[((y0 + rr) * ew + x0 + cc) * layout.channels + k];
                        ok &= f64::from(got) == expect;
                    }
                }
            }
        }
        if !ok {
            failures.push("render/decode");
        }
    }

    // IDX golden bytes.
    let single = [0u8, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 255];
    let golden_ok = parse_idx_images(&single)
        .is_ok_and(|(p, l)| p.data().as_slice() == [255.0] && l == ImageLayout::new(1, 1, 1));
    let mnist_header = [0u8, 0, 8, 3, 0, 0, 0xea, 0x60, 0, 0, 0, 0x1c, 0, 0, 0, 0x1c];
    let header_ok = parse_idx_header(&mnist_header)
        .is_ok_and(|h| h.magic == IDX_IMAGES_MAGIC && h.dims == [60_000, 28, 28]);
    let encoded = encode_idx_images(
        &Matrix::from_col_major(4, 2, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 255.0]).unwrap(),
        ImageLayout::new(2, 2, 1),
    )
    .unwrap();
    let encode_ok = encoded
        == [
            0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2, 3, 4, 5, 6, 255,
        ];
    let fixture = std::fs::read(data_dir().join("mnist-subset-images-idx3-ubyte")).unwrap();
    let fixture_ok = parse_idx_header(&fixture).is_ok_and(|h| h.dims == [2392, 28, 28])
        && load_idx_labels(data_dir().join("mnist-subset-labels-idx1-ubyte")).is_ok_and(|l| {
            l.len() == 2392 && l.iter().filter(|&&v| v == 6 || v == 9).count() == 1992
        });
    if !(golden_ok && header_ok && encode_ok && fixture_ok) {
        failures.push("IDX golden");
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "WSPM bitwise, render/decode pixel-exact, IDX golden bytes".to_string()
        } else {
            format!("failed: {failures:?}")
        },
    )
}

fn main() {
    let criteria: [(u32, &str, f64, fn() -> Outcome); 10] = [
        (1, "oracle equivalence (cache)", 5.0, criterion_1),
        (2, "CCP descent", 60.0, criterion_2),
        (3, "geometric-median reduction", 30.0, criterion_3),
        (4, "Dirichlet calibration", 30.0, criterion_4),
        (5, "centering", 60.0, criterion_5),
        (6, "MNIST desk-scale protocol", 300.0, criterion_6),
        (7, "diversity across runs", f64::INFINITY, criterion_7),
        (8, "uniform-weight reduction", 10.0, criterion_8),
        (9, "metric axioms", 5.0, criterion_9),
        (10, "format round trips", f64::INFINITY, criterion_10),
    ];
    // The MNIST runs are shared by criteria 2, 6 and 7; run them first so
    // their cost is not charged to the descent check's time limit.
    let _ = mnist_runs();

    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= limit;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit_text = if limit.is_finite() {
            format!(", limit {limit:.0} s")
        } else {
            String::new()
        };
        println!(
            "criterion {id:>2} {:<4} {name}: {} [{secs:.2} s{limit_text}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
