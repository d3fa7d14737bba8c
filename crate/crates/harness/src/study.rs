//! Study execution: grid enumeration, parallel dispatch, crash-safe row
//! logging, and per-study pass criteria.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rand::Rng;
use serde::Serialize;

use ritz_core::net::Activation;
use ritz_core::rng;
use ritz_core::series::{CosineSeries, NormKind};
use ritz_core::{MultiIndex, QuadratureRule};

use crate::config::{ProblemGenerator, StudyConfig, StudyKind};
use crate::fit::{fit_rate, Axis, RateFit};
use crate::HarnessError;

/// One grid-point outcome. `s` carries the smoothness order for the
/// regularity study and the Barron budget for the complexity study; it is
/// zero elsewhere. `bound` is the comparison value the row is judged
/// against (dimension bound, analytic complexity bound with slack), zero
/// when the study has none.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub label: String,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub s: f64,
    pub seed: u64,
    pub value: f64,
    pub bound: f64,
    pub config_hash: u64,
    pub error: String,
}

impl Row {
    pub const CSV_HEADER: &'static str = "label,d,m,n,s,seed,value,bound,config_hash,error";

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{},{:.12e},{:.12e},{},{}",
            self.label,
            self.d,
            self.m,
            self.n,
            self.s,
            self.seed,
            self.value,
            self.bound,
            self.config_hash,
            self.error.replace([',', '\n'], ";")
        )
    }

    fn sort_key(&self) -> (String, usize, usize, usize, u64, u64) {
        (
            self.label.clone(),
            self.d,
            self.m,
            self.n,
            self.s.to_bits(),
            self.seed,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub rows: Vec<Row>,
    pub fits: Vec<(String, RateFit)>,
    pub passed: bool,
    pub failures: Vec<String>,
    pub fingerprint: String,
}

/// A random sparse cosine series with nonzero modes only (hence zero
/// mean): `modes` distinct indices with entries up to `max_freq`,
/// coefficients uniform on [-1,1] scaled by `|k|_1^{-decay}` and by the
/// inverse weight `1/(1 + pi^2 |k|_1^2)`, so every mode contributes
/// comparably to the order-2 spectral norm and the norm stays O(modes).
pub fn random_series(dim: usize, generator: &ProblemGenerator, seed: u64) -> CosineSeries {
    let mut r = rng::stream(seed, "random-series");
    let mut terms: Vec<(MultiIndex, f64)> = Vec::new();
    // the lattice only holds (max_freq+1)^d - 1 distinct nonzero modes
    // (d * max_freq for the axis-aligned restriction)
    let lattice = if generator.axis_aligned {
        dim as u64 * generator.max_freq as u64
    } else {
        (generator.max_freq as u64 + 1).pow(dim.min(8) as u32) - 1
    };
    let available = lattice.min(generator.modes as u64) as usize;
    while terms.len() < available {
        let entries: Vec<u32> = if generator.axis_aligned {
            let axis = r.gen_range(0..dim);
            let freq = r.gen_range(1..=generator.max_freq);
            (0..dim).map(|i| if i == axis { freq } else { 0 }).collect()
        } else {
            (0..dim)
                .map(|_| r.gen_range(0..=generator.max_freq))
                .collect()
        };
        let k = MultiIndex::new(entries);
        if k.is_zero() || terms.iter().any(|(t, _)| *t == k) {
            continue;
        }
        let l1 = k.l1() as f64;
        let amp = (2.0 * r.gen::<f64>() - 1.0) * l1.powf(-generator.decay)
            / (1.0 + std::f64::consts::PI.powi(2) * l1 * l1);
        terms.push((k, amp));
    }
    CosineSeries::from_terms(dim, &terms).expect("generated terms are well formed")
}

fn error_rule(d: usize, seed: u64) -> QuadratureRule {
    if d <= 3 {
        QuadratureRule::tensor_gauss(d, 48)
    } else {
        QuadratureRule::halton(d, 1 << 14, Some(rng::derive_key(seed, "study-quad")))
    }
}

/// Executes a study grid, optionally appending rows to
/// `<out>/rows.partial.csv` as they complete (crash-safe prefix). Rows in
/// the result are sorted, so the final emission is order-independent.
pub fn run_study(
    config: &StudyConfig,
    master_seed: u64,
    out_dir: Option<&Path>,
) -> Result<StudyResult, HarnessError> {
    config.validate()?;
    let hash = config.hash();
    let tasks = enumerate_tasks(config);
    let partial: Option<Mutex<std::fs::File>> = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join("rows.partial.csv");
            let mut f = std::fs::File::create(&path)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
            writeln!(f, "{}", Row::CSV_HEADER)
                .map_err(|e| HarnessError::Io(e.to_string()))?;
            Some(Mutex::new(f))
        }
        None => None,
    };

    let run_one = |task: &Task| -> Row {
        let mut row = execute_task(config, master_seed, task);
        row.config_hash = hash;
        if let Some(file) = &partial {
            let mut f = file.lock().expect("partial log lock");
            let _ = writeln!(f, "{}", row.to_csv_line());
        }
        row
    };
    let mut rows: Vec<Row> = {
        use rayon::prelude::*;
        tasks.par_iter().map(run_one).collect()
    };
    rows.sort_by_key(|r| r.sort_key());

    let (fits, passed, failures) = judge(config, &rows);
    Ok(StudyResult {
        kind: config.kind,
        rows,
        fits,
        passed,
        failures,
        fingerprint: fingerprint(),
    })
}

pub fn fingerprint() -> String {
    format!("ritz-lab {} (f64)", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone)]
struct Task {
    label: String,
    d: usize,
    m: usize,
    n: usize,
    s: f64,
    seed: u64,
}

fn enumerate_tasks(config: &StudyConfig) -> Vec<Task> {
    let mut tasks = Vec::new();
    match config.kind {
        StudyKind::Approximation => {
            for &d in &config.dims {
                for &m in &config.widths {
                    for &seed in &config.seeds {
                        tasks.push(Task {
                            label: "h1-error".into(),
                            d,
                            m,
                            n: 0,
                            s: 0.0,
                            seed,
                        });
                    }
                }
            }
        }
        StudyKind::Generalization => {
            let d = config.dims[0];
            for &n in &config.sample_counts {
                let m = (n as f64).powf(1.0 / 3.0).ceil() as usize;
                for &seed in &config.seeds {
                    tasks.push(Task {
                        label: "energy-excess".into(),
                        d,
                        m,
                        n,
                        s: 0.0,
                        seed,
                    });
                }
            }
        }
        StudyKind::Regularity => {
            for &d in &config.dims {
                for &s in &config.orders {
                    for &seed in &config.seeds {
                        tasks.push(Task {
                            label: "norm-ratio".into(),
                            d,
                            m: 0,
                            n: 0,
                            s,
                            seed,
                        });
                    }
                }
            }
        }
        StudyKind::Complexity => {
            for class in ["net", "ritz-poisson"] {
                for &d in &config.dims {
                    for &m in &config.widths {
                        for &n in &config.sample_counts {
                            for &b in &config.budgets {
                                for &seed in &config.seeds {
                                    tasks.push(Task {
                                        label: class.into(),
                                        d,
                                        m,
                                        n,
                                        s: b,
                                        seed,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    tasks
}

fn execute_task(config: &StudyConfig, master_seed: u64, task: &Task) -> Row {
    let mut row = Row {
        label: task.label.clone(),
        d: task.d,
        m: task.m,
        n: task.n,
        s: task.s,
        seed: task.seed,
        value: 0.0,
        bound: 0.0,
        config_hash: 0,
        error: String::new(),
    };
    let outcome = match config.kind {
        StudyKind::Approximation => approximation_point(config, master_seed, task),
        StudyKind::Generalization => generalization_point(config, master_seed, task),
        StudyKind::Regularity => regularity_point(config, master_seed, task),
        StudyKind::Complexity => complexity_point(config, master_seed, task),
    };
    match outcome {
        Ok((value, bound)) => {
            row.value = value;
            row.bound = bound;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

fn approximation_point(
    config: &StudyConfig,
    master_seed: u64,
    task: &Task,
) -> ritz_core::Result<(f64, f64)> {
    // one target per (d, seed) so widths are compared on the same problem
    let problem_seed = rng::substream_key(master_seed, "approx-problem", task.d as u64, task.seed);
    let u = random_series(task.d, &config.generator, problem_seed);
    // the sampling seed is shared across widths, so draws are common
    // random numbers: feature sets grow by prefix as m does, which keeps
    // per-seed error paths comparable along the width axis
    let net = ritz_core::build_approximant(
        &u,
        task.m,
        ritz_core::ApproximantActivation::Relu,
        rng::substream_key(master_seed, "approx-sample", task.d as u64, task.seed),
    )?;
    let rule = error_rule(task.d, master_seed);
    let err = ritz_core::h1_error(&net, &u, &rule)?;
    Ok((err, u.norm(NormKind::Barron(2.0))?))
}

fn generalization_point(
    config: &StudyConfig,
    master_seed: u64,
    task: &Task,
) -> ritz_core::Result<(f64, f64)> {
    let problem_seed = rng::substream_key(master_seed, "gen-problem", 0, task.seed);
    let u_star = random_series(task.d, &config.generator, problem_seed);
    let f = ritz_core::exact::manufacture_rhs(&u_star, None)?;
    let train_config = ritz_core::TrainConfig {
        kind: ritz_core::ProblemKind::Poisson,
        f,
        v: None,
        m: task.m,
        budget: u_star.norm(NormKind::Barron(2.0))?,
        tau: None,
        n: task.n,
        optimizer: ritz_core::Optimizer::default(),
        step: config.train.step,
        iters: config.train.iters,
        projection_cadence: 1,
        seed: rng::substream_key(master_seed, "gen-train", task.n as u64, task.seed),
        init: config.train.init,
    };
    let result = ritz_core::train(&train_config)?;
    // clamp at quadrature noise level so the log-log fit stays defined
    let excess = result.diagnostics.excess.excess_identity_route.max(1e-14);
    Ok((excess, (task.n as f64).powf(-1.0 / 3.0)))
}

fn regularity_point(
    config: &StudyConfig,
    master_seed: u64,
    task: &Task,
) -> ritz_core::Result<(f64, f64)> {
    let problem_seed = rng::substream_key(master_seed, "reg-problem", task.d as u64, task.seed)
        ^ task.s.to_bits();
    let f = random_series(task.d, &config.generator, problem_seed);
    let report = ritz_core::exact::regularity_report(&f, task.s, None)?;
    let ratio = report.get("ratio").expect("report carries the ratio");
    Ok((ratio, task.d as f64))
}

fn complexity_point(
    config: &StudyConfig,
    master_seed: u64,
    task: &Task,
) -> ritz_core::Result<(f64, f64)> {
    let budget = task.s;
    let tau = (task.m as f64).sqrt();
    let f_bound = if task.label == "net" { None } else { Some(1.0) };
    let spec = ritz_core::ClassSpec::standard(
        budget,
        task.m,
        task.d,
        Activation::Softplus { tau },
        f_bound,
        None,
    );
    let class = if task.label == "net" {
        ritz_core::McClass::Net
    } else {
        ritz_core::McClass::RitzPoisson
    };
    let estimate = ritz_core::rademacher_mc(
        class,
        &spec,
        task.n,
        config.draws,
        ritz_core::SearchStrategy::MultistartAscent {
            restarts: 2,
            steps: 30,
            step: 0.05,
        },
        rng::substream_key(master_seed, "rademacher", task.m as u64 ^ (task.n as u64) << 20, task.seed),
    )?;
    let bound = if task.label == "net" {
        ritz_core::net_class_bound(&spec, task.n)?
            .get("bound")
            .expect("bound present")
    } else {
        ritz_core::gsp_bounds(&spec, task.n)?
            .get("poisson_bound")
            .expect("bound present")
    };
    Ok((estimate.mean, bound + 3.0 * estimate.std_error))
}

fn judge(config: &StudyConfig, rows: &[Row]) -> (Vec<(String, RateFit)>, bool, Vec<String>) {
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for row in rows {
        if !row.error.is_empty() {
            failures.push(format!(
                "row ({}, d={}, m={}, n={}, seed={}) failed: {}",
                row.label, row.d, row.m, row.n, row.seed, row.error
            ));
        }
    }
    match config.kind {
        StudyKind::Approximation => {
            for &d in &config.dims {
                let subset: Vec<Row> = rows.iter().filter(|r| r.d == d).cloned().collect();
                match fit_rate(&subset, Axis::Width) {
                    Ok(fit) => {
                        if let Some((lo, hi)) = config.slope_band {
                            if fit.slope < lo || fit.slope > hi {
                                failures.push(format!(
                                    "d={d}: slope {:.4} outside [{lo}, {hi}]",
                                    fit.slope
                                ));
                            }
                        }
                        fits.push((format!("d={d}"), fit));
                    }
                    // a fit can be impossible on tiny fixture grids; that
                    // only matters when a slope band was declared
                    Err(e) if config.slope_band.is_some() => {
                        failures.push(format!("d={d}: {e}"))
                    }
                    Err(_) => {}
                }
            }
        }
        StudyKind::Generalization => {
            match fit_rate(rows, Axis::SampleCount) {
                Ok(fit) => {
                    if let Some((lo, hi)) = config.slope_band {
                        if fit.slope < lo || fit.slope > hi {
                            failures
                                .push(format!("slope {:.4} outside [{lo}, {hi}]", fit.slope));
                        }
                    }
                    fits.push(("excess-vs-n".into(), fit));
                }
                Err(e) if config.slope_band.is_some() => failures.push(e.to_string()),
                Err(_) => {}
            }
            // median excess monotone nonincreasing up to one inversion
            let medians = medians_by_n(rows);
            let inversions = medians
                .windows(2)
                .filter(|w| w[1].1 > w[0].1)
                .count();
            if inversions > 1 {
                failures.push(format!(
                    "median excess has {inversions} inversions across n: {medians:?}"
                ));
            }
        }
        StudyKind::Regularity | StudyKind::Complexity => {
            for row in rows {
                if row.error.is_empty() && row.value > row.bound + 1e-12 {
                    failures.push(format!(
                        "row ({}, d={}, m={}, n={}, s={}, seed={}) exceeds bound: {} > {}",
                        row.label, row.d, row.m, row.n, row.s, row.seed, row.value, row.bound
                    ));
                }
            }
        }
    }
    let passed = failures.is_empty();
    (fits, passed, failures)
}

/// Per-n medians of the primary metric, in increasing n.
pub fn medians_by_n(rows: &[Row]) -> Vec<(usize, f64)> {
    let mut by_n: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for row in rows.iter().filter(|r| r.error.is_empty()) {
        by_n.entry(row.n).or_default().push(row.value);
    }
    by_n
        .into_iter()
        .map(|(n, mut v)| {
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let k = v.len();
            let med = if k % 2 == 1 {
                v[k / 2]
            } else {
                0.5 * (v[k / 2 - 1] + v[k / 2])
            };
            (n, med)
        })
        .collect()
}

/// Runs a study inside a dedicated rayon pool of the requested width.
pub fn run_study_with_threads(
    config: &StudyConfig,
    master_seed: u64,
    out_dir: Option<PathBuf>,
    threads: usize,
) -> Result<StudyResult, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    pool.install(|| run_study(config, master_seed, out_dir.as_deref()))
}
