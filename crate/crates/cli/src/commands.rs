use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use wsp_core::io::image::clip_and_round_matrix;
use wsp_core::io::{render_grid, save_matrix, ImageLayout, MatrixFormat};
use wsp_core::{
    energy_terms, estimate_centering_gap, gen_rmeasure, run_ccp, run_ccp_weighted, CandidateSet,
    DiscreteMeasure, EnergyTerms, HalfSpace, Matrix, OptimizerOptions, RandomMeasure,
    RandomMeasureParams, ReferenceSet, RunTrace, Threads, WspRng,
};

use crate::args::{DataArgs, EnergyArgs, MeasureArgs, OptimizeArgs, RmeasureArgs, SpArgs, WspArgs};
use crate::data::{load_dataset, load_points, Dataset};
use crate::manifest::{run_path, sibling, Manifest};
use crate::seeds::{child_seed, event_seed, init_seed};
use crate::UsageError;

/// Result of `wsp sp`.
#[derive(Debug)]
pub struct SpOutcome {
    pub dataset: Dataset,
    /// Raw optimizer output.
    pub points: CandidateSet,
    /// What was written to `out` (clipped and rounded for image data).
    pub saved: Matrix,
    pub trace: RunTrace,
    pub out: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug)]
pub struct WspRun {
    /// 1-based run index.
    pub k: usize,
    pub child_seed: u64,
    pub measure: RandomMeasure,
    pub points: CandidateSet,
    pub saved: Matrix,
    pub trace: RunTrace,
    pub out: PathBuf,
}

/// Result of `wsp wsp`.
#[derive(Debug)]
pub struct WspOutcome {
    pub dataset: Dataset,
    pub runs: Vec<WspRun>,
    pub manifest: PathBuf,
}

/// Result of `wsp rmeasure`.
#[derive(Debug)]
pub struct RmeasureOutcome {
    pub measure: RandomMeasure,
    pub centering: Option<wsp_core::rmeasure::CenteringReport>,
}

fn optimizer_options(opt: &OptimizeArgs, seed: u64) -> OptimizerOptions {
    OptimizerOptions {
        tol: opt.tol,
        max_iter: opt.max_iter,
        init_scheme: opt.init.scheme(),
        seed,
        threads: opt.threads.map_or(Threads::Auto, Threads::Fixed),
        relative_tol: opt.relative_tol,
    }
}

fn measure_params(m: &MeasureArgs, cv: f64) -> RandomMeasureParams {
    RandomMeasureParams {
        cv,
        theta_lo: m.theta_lo,
        theta_hi: m.theta_hi,
        floor_frac: m.subset_floor,
        fixed_subset_size: m.fixed_subset,
    }
}

/// Rejects output requests the data cannot satisfy before any work is done.
fn check_outputs(opt: &OptimizeArgs, layout: Option<ImageLayout>) -> Result<()> {
    if opt.n == 0 {
        bail!(UsageError("--n must be at least 1".into()));
    }
    if opt.render.is_some() && layout.is_none() {
        bail!(UsageError(
            "--render needs image data (IDX, PNG folder or --layout)".into()
        ));
    }
    if opt.grid_cols == Some(0) {
        bail!(UsageError("--grid-cols must be at least 1".into()));
    }
    if opt.threads == Some(0) {
        bail!(UsageError("--threads must be at least 1".into()));
    }
    Ok(())
}

fn saved_points(points: &CandidateSet, layout: Option<ImageLayout>, no_clip: bool) -> Matrix {
    match layout {
        Some(_) if !no_clip => clip_and_round_matrix(points.points()),
        _ => points.points().clone(),
    }
}

fn write_points(path: &Path, m: &Matrix) -> Result<()> {
    save_matrix(path, m, MatrixFormat::from_path(path))
        .with_context(|| format!("writing {}", path.display()))
}

fn render(path: &Path, m: &Matrix, layout: Option<ImageLayout>, columns: usize) -> Result<()> {
    let layout = layout.expect("render requires a layout, checked up front");
    render_grid(&clip_and_round_matrix(m), layout, columns, path)
        .with_context(|| format!("rendering {}", path.display()))
}

/// `iter,cost,delta,ms`; `delta` is empty for the initial configuration.
pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut s = String::from("iter,cost,delta,ms\n");
    for (k, (&cost, &ms)) in trace.costs.iter().zip(&trace.elapsed_ms).enumerate() {
        let delta = if k == 0 {
            String::new()
        } else {
            format!("{:?}", cost - trace.costs[k - 1])
        };
        s.push_str(&format!("{k},{cost:?},{delta},{ms:.3}\n"));
    }
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn record_data(m: &mut Manifest, d: &DataArgs) {
    m.set("input", d.input.display());
    m.set_path("labels", d.labels.as_deref());
    if !d.keep.is_empty() {
        let keep: Vec<String> = d.keep.iter().map(u8::to_string).collect();
        m.set("keep", keep.join(","));
    }
    m.set_opt("resize", d.resize.map(|(h, w)| format!("{h}x{w}")));
    m.set_opt(
        "layout",
        d.layout
            .map(|l| format!("{}x{}x{}", l.height, l.width, l.channels)),
    );
}

fn record_optimizer(m: &mut Manifest, opt: &OptimizeArgs, out: &Path) {
    m.set("n", opt.n);
    m.set("tol", opt.tol);
    m.set("max-iter", opt.max_iter);
    m.set("relative-tol", opt.relative_tol);
    m.set("init", opt.init.name());
    m.set("seed", opt.seed);
    m.set_opt("threads", opt.threads);
    m.set("out", out.display());
    m.set_path("render", opt.render.as_deref());
    m.set_opt("grid-cols", opt.grid_cols);
    m.set_path("trace", opt.trace.as_deref());
    m.set("no-clip", opt.no_clip);
}

fn record_measure(m: &mut Manifest, args: &MeasureArgs, cv: f64) {
    m.set("cv", cv);
    m.set("subset-floor", args.subset_floor);
    m.set("theta-lo", args.theta_lo);
    m.set("theta-hi", args.theta_hi);
    m.set_opt("fixed-subset", args.fixed_subset);
}

fn record_trace(m: &mut Manifest, prefix: &str, trace: &RunTrace) {
    m.set(&format!("{prefix}stop_reason"), trace.stop_reason.as_str());
    m.set(
        &format!("{prefix}final_objective"),
        format!("{:?}", trace.final_cost()),
    );
    m.set(&format!("{prefix}iterations"), trace.iterations);
    m.set(&format!("{prefix}wall_ms"), format!("{:.1}", trace.wall_ms));
    m.set(
        &format!("{prefix}within_bounding_box"),
        trace.within_bounding_box,
    );
    m.set(
        &format!("{prefix}box_excess"),
        format!("{:e}", trace.box_excess),
    );
}

fn summary(label: &str, trace: &RunTrace) {
    eprintln!(
        "{label}{} after {} iterations, objective {:.6e}, {:.2} s",
        trace.stop_reason.as_str(),
        trace.iterations,
        trace.final_cost(),
        trace.wall_ms / 1e3
    );
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn cmd_sp(args: &SpArgs) -> Result<SpOutcome> {
    let dataset = load_dataset(&args.data)?;
    let opt = &args.opt;
    check_outputs(opt, dataset.layout)?;
    let out = opt
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("sp_points.csv"));
    let manifest_path = opt
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(&out, ".manifest"));
    let mut manifest = Manifest::new("sp");
    record_data(&mut manifest, &args.data);
    record_optimizer(&mut manifest, opt, &out);
    dataset.record(&mut manifest);

    let (points, trace) = run_ccp(&dataset.reference, opt.n, &optimizer_options(opt, opt.seed))?;
    summary("", &trace);
    let saved = saved_points(&points, dataset.layout, opt.no_clip);
    write_points(&out, &saved)?;
    if let Some(path) = &opt.render {
        render(path, &saved, dataset.layout, opt.grid_cols.unwrap_or(opt.n))?;
    }
    if let Some(path) = &opt.trace {
        write_trace(path, &trace)?;
    }
    record_trace(&mut manifest, "result.", &trace);
    manifest.finish(&manifest_path)?;
    Ok(SpOutcome {
        dataset,
        points,
        saved,
        trace,
        out,
        manifest: manifest_path,
    })
}

/// One weighted run: draw the measure from the run's child seed, then optimize
/// against the drawn atoms only.
pub fn wsp_single_run(
    reference: &ReferenceSet,
    n: usize,
    params: &RandomMeasureParams,
    base: &OptimizerOptions,
    master_seed: u64,
    k: usize,
) -> Result<(u64, RandomMeasure, CandidateSet, RunTrace)> {
    let child = child_seed(master_seed, k);
    let mut rng = WspRng::seed_from_u64(child);
    let measure = gen_rmeasure(reference, params, &mut rng)?;
    let atoms = reference.subset(&measure.indices)?;
    let options = OptimizerOptions {
        seed: init_seed(child),
        ..base.clone()
    };
    let (points, trace) = run_ccp_weighted(&atoms, n, &measure.weights, &options)
        .with_context(|| format!("run {k}"))?;
    Ok((child, measure, points, trace))
}

pub fn cmd_wsp(args: &WspArgs) -> Result<WspOutcome> {
    let dataset = load_dataset(&args.data)?;
    let opt = &args.opt;
    check_outputs(opt, dataset.layout)?;
    if args.runs == 0 {
        bail!(UsageError("--runs must be at least 1".into()));
    }
    let params = measure_params(&args.measure, args.cv);
    params.validate()?;
    let out = opt
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("wsp_points.csv"));
    let manifest_path = opt
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(&out, ".manifest"));
    let mut manifest = Manifest::new("wsp");
    record_data(&mut manifest, &args.data);
    record_optimizer(&mut manifest, opt, &out);
    record_measure(&mut manifest, &args.measure, args.cv);
    manifest.set("runs", args.runs);
    manifest.set("parallel-runs", args.parallel_runs);
    dataset.record(&mut manifest);

    let base = optimizer_options(opt, opt.seed);
    let one = |k: usize| wsp_single_run(&dataset.reference, opt.n, &params, &base, opt.seed, k);
    let results: Vec<_> = if args.parallel_runs {
        (1..=args.runs)
            .into_par_iter()
            .map(one)
            .collect::<Result<_>>()?
    } else {
        (1..=args.runs).map(one).collect::<Result<_>>()?
    };

    let mut runs = Vec::with_capacity(results.len());
    for (k, (child, measure, points, trace)) in (1..).zip(results) {
        summary(&format!("run {k}: N0={} ", measure.len()), &trace);
        let run_out = run_path(&out, k);
        let saved = saved_points(&points, dataset.layout, opt.no_clip);
        write_points(&run_out, &saved)?;
        let measure_path = sibling(&run_out, ".rmeasure.txt");
        let file = std::fs::File::create(&measure_path)
            .with_context(|| format!("writing {}", measure_path.display()))?;
        measure.write_text(std::io::BufWriter::new(file), child)?;
        if let Some(path) = &opt.trace {
            write_trace(&run_path(path, k), &trace)?;
        }
        if let Some(path) = &opt.render {
            render(
                &run_path(path, k),
                &saved,
                dataset.layout,
                opt.grid_cols.unwrap_or(opt.n),
            )?;
        }

        let mut run_manifest = manifest.clone();
        run_manifest.set("run.index", k);
        run_manifest.set("run.child_seed", child);
        run_manifest.set("run.init_seed", init_seed(child));
        run_manifest.set("result.n0", measure.len());
        run_manifest.set("result.kappa", format!("{:?}", measure.kappa));
        record_trace(&mut run_manifest, "result.", &trace);
        run_manifest.finish(&sibling(&run_out, ".manifest"))?;

        let prefix = format!("result.run{k}.");
        manifest.set(&format!("{prefix}child_seed"), child);
        manifest.set(&format!("{prefix}n0"), measure.len());
        record_trace(&mut manifest, &prefix, &trace);
        runs.push(WspRun {
            k,
            child_seed: child,
            measure,
            points,
            saved,
            trace,
            out: run_out,
        });
    }

    if let Some(path) = &opt.render {
        let columns: Vec<Vec<f64>> = runs
            .iter()
            .flat_map(|r| r.saved.columns().map(<[f64]>::to_vec))
            .collect();
        render(
            path,
            &Matrix::from_columns(&columns)?,
            dataset.layout,
            opt.n,
        )?;
    }
    let all_converged = runs
        .iter()
        .all(|r| r.trace.stop_reason == wsp_core::StopReason::Converged);
    manifest.set(
        "result.stop_reason",
        if all_converged {
            "converged"
        } else {
            "max-iter"
        },
    );
    manifest.finish(&manifest_path)?;
    Ok(WspOutcome {
        dataset,
        runs,
        manifest: manifest_path,
    })
}

/// Event 0 is `{y : y_0 <= median}`; the rest are half-spaces with random
/// normals through a randomly chosen atom.
pub fn centering_events<R: Rng + ?Sized>(
    reference: &ReferenceSet,
    count: usize,
    rng: &mut R,
) -> Vec<HalfSpace> {
    let d = reference.dim();
    let mut events = Vec::with_capacity(count);
    if count == 0 {
        return events;
    }
    let mut first: Vec<f64> = (0..reference.len()).map(|m| reference.atom(m)[0]).collect();
    first.sort_by(f64::total_cmp);
    events.push(HalfSpace::coordinate(d, 0, first[(first.len() - 1) / 2]));
    while events.len() < count {
        let normal: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let anchor = reference.atom(rng.random_range(0..reference.len()));
        let offset = normal.iter().zip(anchor).map(|(a, b)| a * b).sum();
        events.push(HalfSpace { normal, offset });
    }
    events
}

pub fn cmd_rmeasure(args: &RmeasureArgs) -> Result<RmeasureOutcome> {
    let dataset = load_dataset(&args.data)?;
    let params = measure_params(&args.measure, args.cv);
    params.validate()?;
    let mut rng = WspRng::seed_from_u64(args.seed);
    let measure = gen_rmeasure(&dataset.reference, &params, &mut rng)?;

    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("writing {}", path.display()))?;
            measure.write_text(std::io::BufWriter::new(file), args.seed)?;
            let mut manifest = Manifest::new("rmeasure");
            record_data(&mut manifest, &args.data);
            record_measure(&mut manifest, &args.measure, args.cv);
            manifest.set("seed", args.seed);
            manifest.set("out", path.display());
            dataset.record(&mut manifest);
            manifest.set("result.n0", measure.len());
            manifest.set("result.kappa", format!("{:?}", measure.kappa));
            manifest.set("result.alpha", format!("{:?}", measure.alpha));
            let manifest_path = args
                .manifest
                .clone()
                .unwrap_or_else(|| sibling(path, ".manifest"));
            manifest.finish(&manifest_path)?;
        }
        None => measure.write_text(std::io::stdout().lock(), args.seed)?,
    }

    let centering = if args.check_centering {
        let mut event_rng = WspRng::seed_from_u64(event_seed(args.seed));
        let events = centering_events(&dataset.reference, args.events, &mut event_rng);
        let report =
            estimate_centering_gap(&dataset.reference, &params, args.draws, &events, &mut rng)?;
        let mut table = String::from("event,empirical,mean_random,std_error,z\n");
        for (k, row) in report.rows.iter().enumerate() {
            table.push_str(&format!(
                "{k},{:.6},{:.6},{:.3e},{:.3}\n",
                row.empirical, row.mean_random, row.std_error, row.z
            ));
        }
        table.push_str(&format!(
            "# {} draws, fraction with |z| < 3: {:.3}\n",
            report.draws,
            report.fraction_within(3.0)
        ));
        if args.out.is_some() {
            std::io::stdout().lock().write_all(table.as_bytes())?;
        } else {
            eprint!("{table}");
        }
        Some(report)
    } else {
        None
    };
    Ok(RmeasureOutcome { measure, centering })
}

fn weighted_measure(points: Matrix, weights: Option<&Path>) -> Result<DiscreteMeasure> {
    let Some(path) = weights else {
        return Ok(DiscreteMeasure::uniform(points)?);
    };
    let file = std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let (measure, _) = RandomMeasure::read_text(std::io::BufReader::new(file))
        .with_context(|| format!("decoding {}", path.display()))?;
    let atoms = ReferenceSet::new(points)?.subset(&measure.indices)?;
    Ok(DiscreteMeasure::new(atoms.into_matrix(), measure.weights)?)
}

pub fn format_energy(t: &EnergyTerms) -> String {
    format!(
        "cross = {:.11e}\nwithin_a = {:.11e}\nwithin_b = {:.11e}\nenergy = {:.11e}\nepsilon = {:.11e}\n",
        t.cross,
        t.within_first,
        t.within_second,
        t.reported(),
        t.epsilon
    )
}

pub fn cmd_energy(args: &EnergyArgs) -> Result<EnergyTerms> {
    let (a, _, _) = load_points(&args.a)?;
    let (b, _, _) = load_points(&args.b)?;
    let f = weighted_measure(a.into_matrix(), args.weights_a.as_deref())?;
    let g = weighted_measure(b.into_matrix(), args.weights_b.as_deref())?;
    let terms = energy_terms(&f, &g)?;
    print!("{}", format_energy(&terms));
    Ok(terms)
}
