//! Command-line front end: feasibility checks, density reconstruction,
//! desk-scale oracles, instance generation and batch cross-validation.
//!
//! Exit codes: 0 feasible (either kind), 1 infeasible, 2 inconclusive,
//! 3 usage or parse error, 4 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use tmoment_core::lagrangian::Evaluator;
use tmoment_core::linalg::norm_inf;
use tmoment_core::oracle::{
    brute_force_feasible, cohort_instance, generate_instance, hankel_check, line_support_of,
    CohortKind, HankelClass, MixtureFamily,
};
use tmoment_core::quad::exp_poly_grid_dump;
use tmoment_core::solver::{maximize, OutcomeReport, SolveStatus};
use tmoment_core::support::AxisExtent;
use tmoment_core::{Instance, ProblemInstance};

#[derive(Parser)]
#[command(
    name = "tmoment",
    about = "Feasibility of truncated moment problems via concave dual maximization",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy, Default)]
struct TolArgs {
    /// Relative quadrature tolerance override.
    #[arg(long = "tol-quad")]
    tol_quad: Option<f64>,
    /// Gradient stationarity tolerance override.
    #[arg(long = "tol-grad")]
    tol_grad: Option<f64>,
    /// Newton iteration cap override.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
}

impl TolArgs {
    fn apply(&self, instance: Instance) -> Instance {
        let mut t = *instance.tolerances();
        if let Some(q) = self.tol_quad {
            t.quad_rel = q;
        }
        if let Some(g) = self.tol_grad {
            t.grad = g;
        }
        if let Some(m) = self.max_iter {
            t.max_iter = m;
        }
        instance.with_tolerances(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide feasibility of an instance file and print the verdict.
    Check {
        instance: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump the final quadrature grid as CSV (cell bounds, node
        /// count, contribution).
        #[arg(long = "dump-grid")]
        dump_grid: Option<PathBuf>,
    },
    /// Decide feasibility and write reconstruction artifacts.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        /// Write the JSON report here (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write reconstructed density samples as CSV (t_1..t_n, f).
        #[arg(long = "density-csv")]
        density_csv: Option<PathBuf>,
        /// Grid points per axis for the density CSV.
        #[arg(long = "density-grid", default_value_t = 201)]
        density_grid: usize,
        #[arg(long = "dump-grid")]
        dump_grid: Option<PathBuf>,
    },
    /// Run the Hankel and brute-force oracles on an instance file.
    Oracle {
        instance: PathBuf,
        /// Truncation radius of the brute-force grid.
        #[arg(long, default_value_t = 8.0)]
        radius: f64,
        /// Number of brute-force grid points.
        #[arg(long = "grid-points", default_value_t = 801)]
        grid_points: usize,
    },
    /// Write a seeded known-feasible instance file.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Mixture family: gaussian, gamma or uniform.
        #[arg(long, default_value = "gaussian")]
        family: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate the solver against the oracles on seeded instances.
    Xval {
        #[arg(long)]
        seeds: u64,
        #[arg(long)]
        k: u32,
        /// Write the agreement CSV here (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: hardware parallelism).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Finite-difference check of the gradient and Hessian.
    Gradcheck {
        instance: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        /// Number of jittered interior points to test.
        #[arg(long, default_value_t = 6)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            };
        }
    };
    let code = match cli.command {
        Command::Check { instance, tols, out, dump_grid } => {
            run_check(&instance, tols, out.as_deref(), dump_grid.as_deref(), false, None, 0)
        }
        Command::Solve { instance, tols, out, density_csv, density_grid, dump_grid } => {
            run_check(
                &instance,
                tols,
                out.as_deref(),
                dump_grid.as_deref(),
                true,
                density_csv.as_deref(),
                density_grid,
            )
        }
        Command::Oracle { instance, radius, grid_points } => {
            run_oracle(&instance, radius, grid_points)
        }
        Command::Gen { seed, family, k, out } => run_gen(seed, &family, k, &out),
        Command::Xval { seeds, k, out, workers } => run_xval(seeds, k, out.as_deref(), workers),
        Command::Gradcheck { instance, tols, points, seed } => {
            run_gradcheck(&instance, tols, points, seed)
        }
    };
    ExitCode::from(code)
}

fn load_instance(path: &Path, tols: TolArgs) -> Result<Instance, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        3u8
    })?;
    let instance = ProblemInstance::from_json(&text).map_err(|e| {
        eprintln!("invalid instance {}: {e}", path.display());
        3u8
    })?;
    Ok(tols.apply(instance))
}

fn status_exit(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::FeasibleInterior | SolveStatus::FeasibleBoundary => 0,
        SolveStatus::Infeasible => 1,
        SolveStatus::Inconclusive => 2,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    path: &Path,
    tols: TolArgs,
    out: Option<&Path>,
    dump_grid: Option<&Path>,
    full_solve: bool,
    density_csv: Option<&Path>,
    density_grid: usize,
) -> u8 {
    let instance = match load_instance(path, tols) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let started = Instant::now();
    let outcome = maximize(&instance);
    let elapsed = started.elapsed().as_millis();
    let report = OutcomeReport::from_outcome(&outcome);

    println!("instance: {}", path.display());
    println!("verdict: {:?} after {} iterations ({elapsed} ms)", outcome.status, outcome.trace.len());
    println!("  {}", outcome.message);
    if let Some(l) = &outcome.lambda_star {
        println!("  maximizer: {:?}", l);
    }
    if let Some(m) = &outcome.achieved_moments {
        println!("  achieved moments: {:?}", m.values());
    }
    for d in &outcome.deficits {
        println!(
            "  top-diagonal slack on axis {}: target {} achieved {} (deficit {})",
            d.axis,
            d.target,
            d.achieved,
            d.deficit()
        );
    }
    if let Some(c) = &outcome.certificate {
        println!(
            "  certificate: sign check {:.3e}, riesz value {:.6}",
            c.sign_check, c.riesz_value
        );
        for (i, v) in c.polynomial.terms() {
            println!("    coeff {i}: {v}");
        }
    }
    println!(
        "RESULT: verb={} status={:?} exit={} iterations={} wall_ms={elapsed}",
        if full_solve { "solve" } else { "check" },
        outcome.status,
        status_exit(outcome.status),
        outcome.trace.len()
    );

    if let Some(out_path) = out {
        if let Err(e) = fs::write(out_path, report.to_json()) {
            eprintln!("cannot write report {}: {e}", out_path.display());
            return 4;
        }
    } else if full_solve {
        println!("{}", report.to_json());
    }

    if let Some(grid_path) = dump_grid {
        let lambda = outcome
            .lambda_star
            .clone()
            .unwrap_or_else(|| vec![0.0; instance.index_set().len()]);
        let (_, dump) = exp_poly_grid_dump(&lambda, &instance);
        if let Err(e) = write_grid_csv(grid_path, instance.dim(), &dump.cells) {
            eprintln!("cannot write grid dump: {e}");
            return 4;
        }
    }

    if let (Some(csv_path), Some(lambda)) = (density_csv, outcome.lambda_star.as_ref()) {
        if let Err(e) = write_density_csv(csv_path, &instance, lambda, density_grid) {
            eprintln!("cannot write density CSV: {e}");
            return 4;
        }
    } else if density_csv.is_some() {
        eprintln!("no maximizer available; density CSV not written");
    }

    status_exit(outcome.status)
}

fn write_grid_csv(
    path: &Path,
    dim: usize,
    cells: &[tmoment_core::quad::GridCellDump],
) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    let mut header = Vec::new();
    for a in 0..dim {
        header.push(format!("lo_{}", a + 1));
    }
    for a in 0..dim {
        header.push(format!("hi_{}", a + 1));
    }
    header.push("nodes".into());
    header.push("contribution".into());
    header.push("depth".into());
    writeln!(f, "{}", header.join(","))?;
    for c in cells {
        let mut row: Vec<String> = Vec::new();
        row.extend(c.lo.iter().map(|v| format!("{v}")));
        row.extend(c.hi.iter().map(|v| format!("{v}")));
        row.push(format!("{}", c.nodes));
        row.push(format!("{}", c.contribution));
        row.push(format!("{}", c.depth));
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

fn write_density_csv(
    path: &Path,
    instance: &Instance,
    lambda: &[f64],
    grid: usize,
) -> std::io::Result<()> {
    let n = instance.dim();
    let per_axis = grid.clamp(2, if n == 1 { 20_001 } else { 501 });
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for a in 0..n {
        let (lo, hi) = match instance.support().axis_extent(a) {
            AxisExtent::Full => (-8.0, 8.0),
            AxisExtent::HalfLine { lo } => (lo, lo + 16.0),
            AxisExtent::Interval { lo, hi } => (lo, hi),
        };
        let w = (hi - lo) / (per_axis - 1) as f64;
        axes.push((0..per_axis).map(|j| lo + w * j as f64).collect());
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let t: Vec<f64> = (0..n).map(|a| axes[a][idx[a]]).collect();
        if instance.support().contains(&t) {
            points.push(t);
        }
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == n {
                break;
            }
        }
        if a == n {
            break;
        }
    }
    let rec = tmoment_core::reconstruct_density(lambda, instance, &points)
        .map_err(|e| std::io::Error::other(format!("{e}")))?;
    let mut f = fs::File::create(path)?;
    let header: Vec<String> =
        (1..=n).map(|a| format!("t{a}")).chain(["f".to_string()]).collect();
    writeln!(f, "{}", header.join(","))?;
    for (t, v) in &rec.samples {
        let mut row: Vec<String> = t.iter().map(|x| format!("{x}")).collect();
        row.push(format!("{v}"));
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

fn run_oracle(path: &Path, radius: f64, grid_points: usize) -> u8 {
    let instance = match load_instance(path, TolArgs::default()) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let mut exit = 2u8;
    let mut hankel_text = String::from("unavailable");
    let set = instance.index_set();
    if set.dim() == 1 && set.len() == 2 * set.half_degree() as usize + 1 {
        let support = line_support_of(&instance);
        match hankel_check(instance.moments(), support) {
            Ok(v) => {
                println!(
                    "hankel: {:?} (scaled min eigenvalues {:?}, margin {:.6})",
                    v.class,
                    v.scaled_min_eigs,
                    v.margin()
                );
                hankel_text = format!("{:?}", v.class);
                exit = match v.class {
                    HankelClass::Interior => 0,
                    _ => 1,
                };
            }
            Err(e) => {
                eprintln!("hankel check failed: {e}");
                return 4;
            }
        }
    } else {
        println!("hankel: unavailable (needs a full one-dimensional index set)");
    }
    if instance.dim() <= 2 {
        let bf = brute_force_feasible(&instance, radius, grid_points);
        println!(
            "brute force: residual {:.3e} over {} grid cells{}",
            bf.residual,
            bf.cells,
            if bf.ill_conditioned { " (ill-conditioned)" } else { "" }
        );
        println!(
            "RESULT: verb=oracle hankel={hankel_text} bf_residual={:.6e} cells={} exit={exit}",
            bf.residual, bf.cells
        );
    } else {
        println!("brute force: unavailable (needs n <= 2)");
        println!("RESULT: verb=oracle hankel={hankel_text} bf_residual=nan exit={exit}");
    }
    exit
}

fn run_gen(seed: u64, family: &str, k: u32, out: &Path) -> u8 {
    let Some(family) = MixtureFamily::parse(family) else {
        eprintln!("unknown family {family:?}; expected gaussian, gamma or uniform");
        return 3;
    };
    match generate_instance::<f64>(seed, family, k) {
        Ok(gen) => {
            let text = gen.instance.to_json();
            if let Err(e) = fs::write(out, &text) {
                eprintln!("cannot write {}: {e}", out.display());
                return 4;
            }
            println!(
                "generated {} instance with k={k} from seed {seed}: g = {:?}",
                family.name(),
                gen.instance.moments().values()
            );
            println!(
                "RESULT: verb=gen seed={seed} family={} k={k} out={} exit=0",
                family.name(),
                out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("generation failed: {e}");
            4
        }
    }
}

struct XvalRow {
    seed: u64,
    kind: CohortKind,
    oracle: HankelClass,
    margin: f64,
    solver: SolveStatus,
    agree: &'static str,
    lambda_norm: f64,
    bf_residual: f64,
    wall_ms: u128,
}

fn xval_row(seed: u64, k: u32) -> Result<XvalRow, String> {
    let (instance, kind) =
        cohort_instance::<f64>(seed, k).map_err(|e| format!("seed {seed}: {e}"))?;
    let verdict = hankel_check(instance.moments(), line_support_of(&instance))
        .map_err(|e| format!("seed {seed}: {e}"))?;
    let started = Instant::now();
    let outcome = maximize(&instance);
    let wall_ms = started.elapsed().as_millis();
    let bf = brute_force_feasible(&instance, 8.0, 801);
    let margin = verdict.margin();
    let decisive = margin >= 0.05;
    let agree = match (verdict.class, outcome.status) {
        (HankelClass::Interior, s) if s == SolveStatus::FeasibleInterior
            || s == SolveStatus::FeasibleBoundary => "yes",
        (HankelClass::Exterior, SolveStatus::Infeasible) => "yes",
        (HankelClass::Boundary, SolveStatus::Infeasible) => "yes",
        (HankelClass::Interior, SolveStatus::Infeasible) => "VIOLATION",
        (HankelClass::Exterior, s) | (HankelClass::Boundary, s)
            if s == SolveStatus::FeasibleInterior || s == SolveStatus::FeasibleBoundary =>
        {
            "VIOLATION"
        }
        _ if decisive && verdict.class != HankelClass::Boundary => "MISSED",
        _ => "exempt",
    };
    let lambda_norm = outcome
        .lambda_star
        .as_ref()
        .map(|l| norm_inf(l))
        .unwrap_or(f64::NAN);
    Ok(XvalRow {
        seed,
        kind,
        oracle: verdict.class,
        margin,
        solver: outcome.status,
        agree,
        lambda_norm,
        bf_residual: bf.residual,
        wall_ms,
    })
}

fn run_xval(seeds: u64, k: u32, out: Option<&Path>, workers: Option<usize>) -> u8 {
    if seeds == 0 || k == 0 || k > 4 {
        eprintln!("xval needs --seeds >= 1 and 1 <= k <= 4");
        return 3;
    }
    let worker_count = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1);
    let results: Mutex<Vec<Option<Result<XvalRow, String>>>> =
        Mutex::new((0..seeds).map(|_| None).collect());
    let next = std::sync::atomic::AtomicU64::new(0);
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let seed = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if seed >= seeds {
                    break;
                }
                let row = xval_row(seed, k);
                results.lock().unwrap()[seed as usize] = Some(row);
            });
        }
    });

    let rows = results.into_inner().unwrap();
    let mut csv = String::from(
        "seed,kind,k,verdict_oracle,oracle_margin,verdict_solver,agree,lambda_star_norm,bf_residual,wall_ms\n",
    );
    let mut violations = 0usize;
    let mut missed = 0usize;
    let mut agreed = 0usize;
    let mut failures = 0usize;
    for row in rows.iter() {
        match row {
            Some(Ok(r)) => {
                if r.agree == "VIOLATION" {
                    violations += 1;
                } else if r.agree == "MISSED" {
                    missed += 1;
                } else if r.agree == "yes" {
                    agreed += 1;
                }
                csv.push_str(&format!(
                    "{},{},{},{:?},{:.6},{:?},{},{:.6},{:.6e},{}\n",
                    r.seed,
                    r.kind.name(),
                    k,
                    r.oracle,
                    r.margin,
                    r.solver,
                    r.agree,
                    r.lambda_norm,
                    r.bf_residual,
                    r.wall_ms
                ));
            }
            Some(Err(e)) => {
                failures += 1;
                eprintln!("{e}");
            }
            None => failures += 1,
        }
    }
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &csv) {
                eprintln!("cannot write {}: {e}", path.display());
                return 4;
            }
        }
        None => print!("{csv}"),
    }
    println!(
        "agreement: {agreed} agreed, {violations} contradictions, {missed} missed decisive, {failures} failures over {seeds} seeds"
    );
    println!(
        "RESULT: verb=xval seeds={seeds} k={k} agreed={agreed} violations={violations} missed={missed} failures={failures} exit={}",
        if violations + missed + failures > 0 { 4 } else { 0 }
    );
    if violations + missed + failures > 0 {
        4
    } else {
        0
    }
}

fn run_gradcheck(path: &Path, tols: TolArgs, points: usize, seed: u64) -> u8 {
    use rand::{Rng, SeedableRng};
    let instance = match load_instance(path, tols) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let ev = Evaluator::new(&instance);
    let set = instance.index_set();
    let n = set.len();
    let mut start = vec![0.0f64; n];
    for axis in 0..set.dim() {
        let p = set.position(&set.top_diagonal(axis)).expect("validated");
        start[p] = -1.0;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut max_grad_err = 0.0f64;
    let mut max_hess_err = 0.0f64;
    let mut max_eig_ratio = f64::NEG_INFINITY;
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < points && attempts < points * 20 {
        attempts += 1;
        let lambda: Vec<f64> =
            start.iter().map(|&v| v + rng.gen_range(-0.3..0.3)).collect();
        let Ok(state) = ev.full(&lambda) else { continue };
        let grad = state.gradient.clone().expect("full state");
        let hess = state.hessian.clone().expect("full state");
        let scale_g = 1.0f64.max(norm_inf(&grad));
        for p in 0..n {
            let mut up = lambda.clone();
            up[p] += h;
            let mut dn = lambda.clone();
            dn[p] -= h;
            let fd = (ev.value(&up).value - ev.value(&dn).value) / (2.0 * h);
            max_grad_err = max_grad_err.max((fd - grad[p]).abs() / scale_g);
            // Hessian column by differences of the gradient
            let (Ok(gu), Ok(gd)) = (ev.full(&up), ev.full(&dn)) else { continue };
            let gu = gu.gradient.expect("full state");
            let gd = gd.gradient.expect("full state");
            let scale_h = 1.0f64.max(hess.max_abs());
            for r in 0..n {
                let fd2 = (gu[r] - gd[r]) / (2.0 * h);
                max_hess_err = max_hess_err.max((fd2 - hess.get(r, p)).abs() / scale_h);
            }
        }
        let eigs = hess.eigenvalues();
        let norm = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if norm > 0.0 {
            max_eig_ratio = max_eig_ratio.max(eigs.last().unwrap() / norm);
        }
        tested += 1;
    }
    if tested == 0 {
        eprintln!("no interior points found for finite-difference checks");
        return 4;
    }
    println!("gradient max relative FD error: {max_grad_err:.3e} over {tested} points");
    println!("hessian  max relative FD error: {max_hess_err:.3e}");
    println!("hessian  max eigenvalue ratio (should be <= ~1e-8): {max_eig_ratio:.3e}");
    println!(
        "RESULT: verb=gradcheck points={tested} grad_err={max_grad_err:.6e} hess_err={max_hess_err:.6e} max_eig_ratio={max_eig_ratio:.6e} exit=0"
    );
    0
}
