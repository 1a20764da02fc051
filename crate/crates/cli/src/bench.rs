//! Benchmark command: times the static pipeline (covariance from scratch +
//! extremal search) against the dynamic one (closed-form update + the same
//! search) under randomized batch insertions and deletions.
//!
//! Reproducibility contract: batches depend only on the seed, the batch
//! size's position in the --batch list and the repetition index, never on
//! the mode, epsilon or thread count. With --no-timing the report is byte
//! identical across runs; timing is only meaningful with --threads 1.

use crate::{load_cloud, parse_positive, ReportArgs, UsageError};
use anyhow::{ensure, Context, Result};
use clap::{Args, ValueEnum};
use dynpca::bbox::{extreme_scan, Extents};
use dynpca::grid::OccupancyGrid;
use dynpca::io::{LoadedPoints, Report, ReportRow};
use dynpca::linalg::{jacobi_eigendecompose, principal_frame};
use dynpca::moments::{summarize, MomentSummary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMode {
    Ap,
    Agp,
    Egp,
}

impl BenchMode {
    fn tag(self) -> &'static str {
        match self {
            BenchMode::Ap => "ap",
            BenchMode::Agp => "agp",
            BenchMode::Egp => "egp",
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    /// Point cloud file (.xyz whitespace or .csv comma separated).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "ap")]
    mode: BenchMode,
    /// Grid cell size; repeatable, required for grid modes, ignored for ap.
    #[arg(long, value_parser = parse_positive)]
    epsilon: Vec<f64>,
    /// Batch size; repeatable.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_values_t = [100u64])]
    batch: Vec<u64>,
    /// Repetitions per configuration; means and medians are reported.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 100)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for repetitions. Timings above 1 are not comparable;
    /// results and report bytes (with --no-timing) do not change.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1024), default_value_t = 1)]
    threads: u64,
    #[command(flatten)]
    report: ReportArgs,
}

pub fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.mode != BenchMode::Ap && args.epsilon.is_empty() {
        return Err(UsageError(format!(
            "mode {} needs at least one --epsilon",
            args.mode.tag()
        ))
        .into());
    }
    match load_cloud(&args.input)? {
        LoadedPoints::D2(pts) => run_bench(&pts, &args),
        LoadedPoints::D3(pts) => run_bench(&pts, &args),
    }
}

/// One repetition's measurements for a fixed (m, epsilon) configuration.
#[derive(Clone, Copy, Default)]
struct Sample {
    t_dyn: f64,
    t_stat: f64,
    vol_dyn: f64,
    vol_stat: f64,
    candidates: u64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut k) = (0.0, 0u64);
    for x in xs {
        sum += x;
        k += 1;
    }
    sum / k as f64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn median_u64(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        let (a, b) = (xs[k / 2 - 1], xs[k / 2]);
        a + (b - a) / 2
    }
}

fn aabb<const D: usize>(points: &[[f64; D]]) -> ([f64; D], [f64; D]) {
    let mut lo = [f64::INFINITY; D];
    let mut hi = [f64::NEG_INFINITY; D];
    for p in points {
        for i in 0..D {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

/// Batch of points to insert: uniform over the base cloud's bounding box,
/// stream-keyed by batch-list position and repetition only.
fn sample_add_batch<const D: usize>(
    seed: u64,
    m_idx: usize,
    rep: u64,
    m: u64,
    lo: &[f64; D],
    hi: &[f64; D],
) -> Vec<[f64; D]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((m_idx as u64) << 33 | rep << 1);
    (0..m)
        .map(|_| std::array::from_fn(|i| lo[i] + rng.gen::<f64>() * (hi[i] - lo[i])))
        .collect()
}

/// Distinct indices of existing points to delete.
fn sample_delete_indices(seed: u64, m_idx: usize, rep: u64, m: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((m_idx as u64) << 33 | rep << 1 | 1);
    rand::seq::index::sample(&mut rng, n, m as usize).into_vec()
}

/// Shared tail of both pipelines: principal frame from the covariance, then
/// the extremal search over the mode's candidate set. Returns the box
/// volume and the number of candidates scanned.
fn search<const D: usize>(
    summary: &MomentSummary<D>,
    world: &[[f64; D]],
    grid: Option<&OccupancyGrid<D>>,
    mode: BenchMode,
) -> Result<(f64, u64)> {
    let spectrum = jacobi_eigendecompose(summary.cov())?;
    let frame = principal_frame(&spectrum);
    let (extents, candidates): (Extents<D>, u64) = match (mode, grid) {
        (BenchMode::Ap, _) => (extreme_scan(world, &frame)?, world.len() as u64),
        (BenchMode::Agp, Some(g)) => {
            let corners = g.candidate_corners()?;
            (extreme_scan(&corners, &frame)?, corners.len() as u64)
        }
        (BenchMode::Egp, Some(g)) => {
            let corners = g.column_extremal_corners()?;
            (extreme_scan(&corners, &frame)?, corners.len() as u64)
        }
        _ => unreachable!("grid modes always carry a grid"),
    };
    Ok((extents.volume(), candidates))
}

struct RepOutcome {
    add: Sample,
    del: Sample,
}

/// Runs one repetition: a batch insertion then an independent batch
/// deletion, each measured dynamically (closed-form update of the base
/// summary) and statically (summarize the edited cloud from scratch). The
/// world buffer and grid are restored before returning.
#[allow(clippy::too_many_arguments)]
fn run_rep<const D: usize>(
    base: &MomentSummary<D>,
    points: &[[f64; D]],
    world: &mut Vec<[f64; D]>,
    grid: Option<&mut OccupancyGrid<D>>,
    mode: BenchMode,
    seed: u64,
    m_idx: usize,
    m: u64,
    rep: u64,
    lo: &[f64; D],
    hi: &[f64; D],
) -> Result<RepOutcome> {
    let n = points.len();
    let mut grid = grid;

    // insertion phase
    let batch = sample_add_batch(seed, m_idx, rep, m, lo, hi);
    world.extend_from_slice(&batch);
    let t0 = Instant::now();
    let s_dyn = {
        let bs = summarize(&batch)?;
        let s = base.apply_add(&bs)?;
        if let Some(g) = grid.as_deref_mut() {
            g.update(&batch, &[])?;
        }
        s
    };
    let (vol_dyn, candidates) = search(&s_dyn, world, grid.as_deref(), mode)?;
    let t_dyn = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let s_stat = summarize(world)?;
    let (vol_stat, _) = search(&s_stat, world, grid.as_deref(), mode)?;
    let t_stat = t0.elapsed().as_secs_f64();

    ensure!(
        (vol_dyn - vol_stat).abs() <= 1e-9 * vol_stat.abs().max(1.0),
        "volume mismatch after insertion: dynamic {vol_dyn} vs static {vol_stat}"
    );
    let add = Sample {
        t_dyn,
        t_stat,
        vol_dyn,
        vol_stat,
        candidates,
    };
    world.truncate(n);
    if let Some(g) = grid.as_deref_mut() {
        g.update(&[], &batch)?;
    }

    // deletion phase: remove existing points, compare against a scratch
    // summary of the remaining cloud
    let indices = sample_delete_indices(seed, m_idx, rep, m, n);
    let removed: Vec<[f64; D]> = indices.iter().map(|&i| points[i]).collect();
    let mut keep = vec![true; n];
    for &i in &indices {
        keep[i] = false;
    }
    let remaining: Vec<[f64; D]> = points
        .iter()
        .zip(&keep)
        .filter_map(|(p, &k)| k.then_some(*p))
        .collect();

    let t0 = Instant::now();
    let s_dyn = {
        let bs = summarize(&removed)?;
        let s = base.apply_delete(&bs)?;
        if let Some(g) = grid.as_deref_mut() {
            g.update(&[], &removed)?;
        }
        s
    };
    let (vol_dyn, candidates) = search(&s_dyn, &remaining, grid.as_deref(), mode)?;
    let t_dyn = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let s_stat = summarize(&remaining)?;
    let (vol_stat, _) = search(&s_stat, &remaining, grid.as_deref(), mode)?;
    let t_stat = t0.elapsed().as_secs_f64();

    ensure!(
        (vol_dyn - vol_stat).abs() <= 1e-9 * vol_stat.abs().max(1.0),
        "volume mismatch after deletion: dynamic {vol_dyn} vs static {vol_stat}"
    );
    let del = Sample {
        t_dyn,
        t_stat,
        vol_dyn,
        vol_stat,
        candidates,
    };
    if let Some(g) = grid.as_deref_mut() {
        g.update(&removed, &[])?;
    }
    Ok(RepOutcome { add, del })
}

/// All repetitions for one (m, epsilon) configuration, fanned out over the
/// requested threads. Each worker owns a world buffer and grid clone;
/// outcomes are reassembled in repetition order so aggregation does not
/// depend on the thread count.
#[allow(clippy::too_many_arguments)]
fn run_config<const D: usize>(
    base: &MomentSummary<D>,
    points: &[[f64; D]],
    grid: Option<&OccupancyGrid<D>>,
    mode: BenchMode,
    args: &BenchArgs,
    m_idx: usize,
    m: u64,
    lo: &[f64; D],
    hi: &[f64; D],
) -> Result<Vec<RepOutcome>> {
    let reps = args.reps;
    let workers = args.threads.min(reps) as usize;
    if workers == 1 {
        let mut world = points.to_vec();
        let mut grid = grid.cloned();
        return (0..reps)
            .map(|rep| {
                run_rep(
                    base,
                    points,
                    &mut world,
                    grid.as_mut(),
                    mode,
                    args.seed,
                    m_idx,
                    m,
                    rep,
                    lo,
                    hi,
                )
            })
            .collect();
    }
    // contiguous rep ranges per worker keep the merged order deterministic
    let per = reps.div_ceil(workers as u64);
    let chunks: Vec<(u64, u64)> = (0..workers as u64)
        .map(|w| (w * per, ((w + 1) * per).min(reps)))
        .filter(|(a, b)| a < b)
        .collect();
    let outcomes: Vec<Result<Vec<RepOutcome>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|&(from, to)| {
                scope.spawn(move || -> Result<Vec<RepOutcome>> {
                    let mut world = points.to_vec();
                    let mut grid = grid.cloned();
                    (from..to)
                        .map(|rep| {
                            run_rep(
                                base,
                                points,
                                &mut world,
                                grid.as_mut(),
                                mode,
                                args.seed,
                                m_idx,
                                m,
                                rep,
                                lo,
                                hi,
                            )
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("benchmark worker panicked"))
            .collect()
    });
    let mut merged = Vec::with_capacity(reps as usize);
    for chunk in outcomes {
        merged.extend(chunk?);
    }
    Ok(merged)
}

#[allow(clippy::too_many_arguments)]
fn push_phase_rows(
    report: &mut Report,
    args: &BenchArgs,
    mode: BenchMode,
    phase: &str,
    n: u64,
    m: u64,
    epsilon: f64,
    samples: &[Sample],
) -> Result<()> {
    let cand_mean = mean(samples.iter().map(|s| s.candidates as f64)).round() as u64;
    let cand_median = median_u64(samples.iter().map(|s| s.candidates).collect());
    let dynamic: (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s.t_dyn, s.vol_dyn)).unzip();
    let r#static: (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s.t_stat, s.vol_stat)).unzip();
    for (variant, (times, volumes)) in [("dynamic", dynamic), ("static", r#static)] {
        let stats = [
            ("mean", mean(times.iter().copied()), mean(volumes.iter().copied()), cand_mean),
            ("median", median(times), median(volumes), cand_median),
        ];
        for (stat, t, v, c) in stats {
            report.push(ReportRow {
                algo: format!("{}_{variant}", mode.tag()),
                op: format!("{phase}_{stat}"),
                n,
                m,
                epsilon,
                seconds: args.report.seconds(t),
                volume: v,
                candidates: c,
            })?;
        }
    }
    Ok(())
}

fn run_bench<const D: usize>(points: &[[f64; D]], args: &BenchArgs) -> Result<()> {
    let n = points.len();
    for &m in &args.batch {
        ensure!(
            (m as usize) < n,
            "batch size {m} must be smaller than the cloud ({n} points)"
        );
    }
    let base = summarize(points).context("summarizing the input cloud")?;
    let (lo, hi) = aabb(points);
    let mut report = Report::new();

    // one grid per epsilon, built once; construction cost is its own row
    let grids: Vec<(f64, OccupancyGrid<D>)> = if args.mode == BenchMode::Ap {
        Vec::new()
    } else {
        args.epsilon
            .iter()
            .map(|&eps| -> Result<_> {
                let t0 = Instant::now();
                let grid = OccupancyGrid::build(points, eps, false)?;
                let seconds = t0.elapsed().as_secs_f64();
                let candidates = match args.mode {
                    BenchMode::Agp => grid.candidate_corners()?.len(),
                    BenchMode::Egp => grid.column_extremal_corners()?.len(),
                    BenchMode::Ap => unreachable!(),
                };
                report.push(ReportRow {
                    algo: args.mode.tag().into(),
                    op: "preprocess".into(),
                    n: n as u64,
                    m: 0,
                    epsilon: eps,
                    seconds: args.report.seconds(seconds),
                    volume: 0.0,
                    candidates: candidates as u64,
                })?;
                Ok((eps, grid))
            })
            .collect::<Result<_>>()?
    };

    let configs: Vec<(f64, Option<&OccupancyGrid<D>>)> = if args.mode == BenchMode::Ap {
        vec![(0.0, None)]
    } else {
        grids.iter().map(|(eps, g)| (*eps, Some(g))).collect()
    };

    for (m_idx, &m) in args.batch.iter().enumerate() {
        for &(eps, grid) in &configs {
            let outcomes = run_config(&base, points, grid, args.mode, args, m_idx, m, &lo, &hi)?;
            let adds: Vec<Sample> = outcomes.iter().map(|o| o.add).collect();
            let dels: Vec<Sample> = outcomes.iter().map(|o| o.del).collect();
            push_phase_rows(&mut report, args, args.mode, "add", n as u64, m, eps, &adds)?;
            push_phase_rows(&mut report, args, args.mode, "delete", n as u64, m, eps, &dels)?;
            let speedup = mean(adds.iter().map(|s| s.t_stat)) / mean(adds.iter().map(|s| s.t_dyn));
            println!(
                "mode {} m {m} eps {eps}: add dynamic/static mean {:.3e}/{:.3e} s (speedup {speedup:.2}x), delete dynamic/static mean {:.3e}/{:.3e} s",
                args.mode.tag(),
                mean(adds.iter().map(|s| s.t_dyn)),
                mean(adds.iter().map(|s| s.t_stat)),
                mean(dels.iter().map(|s| s.t_dyn)),
                mean(dels.iter().map(|s| s.t_stat)),
            );
        }
    }
    args.report.write(&report)?;
    if !args.report.has_out() {
        // no file requested: the csv goes to stdout so results are not lost
        print!("{}", report.to_csv());
    }
    Ok(())
}
