//! The `fframe` command line.
//!
//! Every subcommand writes `<out>/<name>.json` holding `{"config", "result"}`
//! (plus CSV tables where a sweep is plotted) and `<out>/<name>.meta.json`
//! holding the timestamp. The result JSON is also printed to stdout.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fframe_core::beurling::{
    default_dimension_radii, dimension, geometric_radii, lower_density, upper_density,
};
use fframe_core::frame::{lower_bound_decay_certificate, CylinderFunction};
use fframe_core::ifs::{AffineIfs, TruncationBudget};
use fframe_core::measure::{
    convolve, discretize, make_atomic, mollify, AtomicMeasure, Measure, PointRule,
};
use fframe_core::reconstruct::SplitSystem;
use fframe_core::Complex64;
use serde_json::{json, Value};

use crate::catalog::CATALOG;
use crate::config::{ExperimentConfig, RunMetadata};
use crate::error::{CliError, Result};
use crate::formats::{
    csv_text, density_scan_json, dimension_json, frame_report_json, parse_ifs, pretty,
    read_measure, reconstruction_json, write_atomic, Cell, IfsJson, MeasureJson,
};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(
    name = "fframe",
    version,
    about = "Fourier frames of self-similar measures: transforms, frame bounds, densities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "fframe-out")]
    pub out: PathBuf,
    /// Truncation tolerance of the infinite-product transforms.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

/// Where a frequency measure comes from.
#[derive(Debug, Args)]
pub struct NuSource {
    /// Measure JSON file.
    #[arg(long, conflicts_with_all = ["dual", "comb"])]
    pub measure: Option<PathBuf>,
    /// Dual weights |ft|^2 of this system on the integers of [-Λ, Λ].
    #[arg(long, conflicts_with = "comb")]
    pub dual: Option<String>,
    /// Unit masses on the integers of [-Λ, Λ].
    #[arg(long)]
    pub comb: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Rule {
    Left,
    Center,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the transform of an invariant measure over a frequency grid.
    Ft {
        #[arg(long)]
        ifs: String,
        #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Frame bounds on cylinder subspaces over a (level, Λ) grid.
    FrameBounds {
        #[arg(long)]
        ifs: String,
        #[command(flatten)]
        nu: NuSource,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        level: Vec<usize>,
        /// Truncations Λ; required for --dual and --comb.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Complement digit sets and the dual-weight measure of one of them.
    Dual {
        #[arg(long)]
        ifs: String,
        /// Largest complement digit searched; defaults to R - 1.
        #[arg(long)]
        c_max: Option<i64>,
        #[arg(long, default_value_t = 64)]
        lambda: i64,
        /// Index into the complement list.
        #[arg(long, default_value_t = 0)]
        choice: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sup window masses, α-density scans and the dimension estimate.
    Beurling {
        #[command(flatten)]
        nu: NuSource,
        #[arg(long)]
        lambda: Option<i64>,
        /// Geometric radius grid `lo:hi:count`; defaults to 2^{k/2}, k = 4..28.
        #[arg(long)]
        radii: Option<String>,
        /// Also scan sup / R^α at this α.
        #[arg(long)]
        alpha: Option<f64>,
        /// Also report the lower density with window origins in `a:b`.
        #[arg(long, allow_hyphen_values = true)]
        hull: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Collapse a measure onto a grid of cells of width r.
    Discretize {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value = "left")]
        rule: Rule,
        #[command(flatten)]
        common: Common,
    },
    /// Convolve two measures.
    Convolve {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        with: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fourier reconstruction of a cylinder function through a digit split.
    Reconstruct {
        /// Base system B.
        #[arg(long)]
        ifs: String,
        /// Complement system C with B ⊕ C a complete residue system.
        #[arg(long)]
        complement: String,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Cylinder coefficients as a JSON list of [re, im]; default f ≡ 1.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 200.0)]
        cutoff: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Probe the lower frame bound of a measure for 1_[0,1] dx + δ_2.
    Counterexample {
        /// Measure JSON; defaults to the unit comb on |n| ≤ 100 mollified
        /// with width 1.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        t: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in systems.
    Catalog,
    /// Draw points of an invariant measure.
    Sample {
        #[arg(long)]
        ifs: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

struct Emitter {
    out: PathBuf,
    config: ExperimentConfig,
}

impl Emitter {
    fn new(common: &Common, config: ExperimentConfig) -> Self {
        let config = config.param("tol", common.tol);
        Emitter {
            out: common.out.clone(),
            config,
        }
    }

    fn json(&self, name: &str, result: &Value) -> Result<()> {
        let doc = json!({ "config": &self.config, "result": result });
        write_atomic(
            &self.out.join(format!("{name}.json")),
            pretty(&doc).as_bytes(),
        )
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        let text = csv_text(&self.config.compact_json(), header, rows);
        write_atomic(&self.out.join(format!("{name}.csv")), text.as_bytes())
    }

    fn finish(&self, result: Value) -> Result<Value> {
        let meta = RunMetadata::now(&self.out.display().to_string());
        let meta = serde_json::to_value(meta)?;
        write_atomic(
            &self
                .out
                .join(format!("{}.meta.json", self.config.subcommand)),
            pretty(&meta).as_bytes(),
        )?;
        Ok(result)
    }
}

fn budget(common: &Common) -> Result<TruncationBudget> {
    Ok(TruncationBudget::new(common.tol)?)
}

fn ifs_value(ifs: &AffineIfs) -> Value {
    serde_json::to_value(IfsJson::of(ifs)).expect("ifs serializes")
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let mut it = s.split(':');
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((
            a.trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("bad {what} `{s}`")))?,
            b.trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("bad {what} `{s}`")))?,
        )),
        _ => Err(CliError::Parse(format!(
            "{what} must look like a:b, got `{s}`"
        ))),
    }
}

/// `lo:hi:count`, geometric.
pub fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Parse(format!(
            "radii must look like lo:hi:count, got `{s}`"
        )));
    }
    let bad = || CliError::Parse(format!("bad radii `{s}`"));
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(geometric_radii(lo, hi, count)?)
}

/// The measure and a short reference string for reports.
fn resolve_nu(
    nu: &NuSource,
    lambda: Option<i64>,
    budget: &TruncationBudget,
) -> Result<(Measure, String)> {
    let need_lambda =
        || lambda.ok_or_else(|| CliError::Usage("--dual and --comb need --lambda".into()));
    if let Some(path) = &nu.measure {
        let m = read_measure(path)?;
        let m = match (lambda, m) {
            (Some(l), Measure::Atomic(a)) => {
                let (p, w): (Vec<f64>, Vec<f64>) =
                    a.atoms().filter(|(p, _)| p.abs() <= l as f64).unzip();
                make_atomic(&p, &w)?.into()
            }
            (Some(_), _) => {
                return Err(CliError::Usage(
                    "--lambda truncates atomic measures only".into(),
                ))
            }
            (None, m) => m,
        };
        Ok((m, format!("file:{}", path.display())))
    } else if let Some(spec) = &nu.dual {
        let l = need_lambda()?;
        let c = parse_ifs(spec)?;
        Ok((
            c.dual_weights_integers(l, budget).into(),
            format!("dual:R={},B={:?},lambda={l}", c.scale(), c.digits()),
        ))
    } else if nu.comb {
        let l = need_lambda()?;
        Ok((
            AtomicMeasure::integer_comb(l).into(),
            format!("comb:lambda={l}"),
        ))
    } else {
        Err(CliError::Usage(
            "give one of --measure, --dual or --comb".into(),
        ))
    }
}

fn nu_config(config: ExperimentConfig, nu: &NuSource) -> ExperimentConfig {
    let mut config = config;
    if let Some(p) = &nu.measure {
        config.measures.push(p.display().to_string());
    }
    if let Some(d) = &nu.dual {
        config = config.param("dual", d);
    }
    if nu.comb {
        config = config.param("comb", true);
    }
    config
}

fn atomic_only(m: Measure) -> Result<AtomicMeasure> {
    match m {
        Measure::Atomic(a) => Ok(a),
        _ => Err(CliError::Usage(
            "frame analysis needs an atomic measure; discretize it first".into(),
        )),
    }
}

pub fn run(command: Command) -> Result<Value> {
    match command {
        Command::Ft {
            ifs,
            t_min,
            t_max,
            points,
            common,
        } => {
            let sys = parse_ifs(&ifs)?;
            if points < 2 || !(t_max > t_min) {
                return Err(CliError::Usage("need t_min < t_max and points ≥ 2".into()));
            }
            let mut config = ExperimentConfig::new("ft")
                .param("t_min", t_min)
                .param("t_max", t_max)
                .param("points", points);
            config.ifs = Some(ifs_value(&sys));
            let em = Emitter::new(&common, config);
            let b = budget(&common)?;
            let ts: Vec<f64> = (0..points)
                .map(|k| t_min + (t_max - t_min) * k as f64 / (points - 1) as f64)
                .collect();
            let vals = parallel::ft_sweep(&sys, &ts, &b);
            let rows: Vec<Vec<Cell>> = ts
                .iter()
                .zip(&vals)
                .map(|(&t, z)| vec![t.into(), z.re.into(), z.im.into(), z.norm().into()])
                .collect();
            em.csv("ft", &["t", "re", "im", "abs"], &rows)?;
            let max_abs_off_zero = ts
                .iter()
                .zip(&vals)
                .filter(|(t, _)| t.abs() > 0.5)
                .map(|(_, z)| z.norm())
                .fold(0.0, f64::max);
            let result = json!({
                "points": points,
                "csv": "ft.csv",
                "max_abs_beyond_half": max_abs_off_zero,
            });
            em.json("ft", &result)?;
            em.finish(result)
        }
        Command::FrameBounds {
            ifs,
            nu,
            level,
            lambda,
            common,
        } => {
            let sys = parse_ifs(&ifs)?;
            let b = budget(&common)?;
            let mut config = nu_config(ExperimentConfig::new("frame-bounds"), &nu)
                .param("level", &level)
                .param("lambda", &lambda);
            config.ifs = Some(ifs_value(&sys));
            let em = Emitter::new(&common, config);
            let truncations: Vec<Option<i64>> = if lambda.is_empty() {
                vec![None]
            } else {
                lambda.iter().copied().map(Some).collect()
            };
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for l in truncations {
                let (m, reference) = resolve_nu(&nu, l, &b)?;
                let m = atomic_only(m)?;
                for &n in &level {
                    let r = parallel::frame_bounds(&sys, n, &m, &b, l.map(|l| l as f64))?;
                    rows.push(vec![
                        Cell::from(n),
                        Cell::Int(l.unwrap_or(-1)),
                        r.lower.into(),
                        r.upper.into(),
                        r.psd_residual.into(),
                        r.hermitian_residual.into(),
                        r.eigen_residual.into(),
                    ]);
                    reports.push(frame_report_json(&r, &reference));
                }
            }
            em.csv(
                "frame-bounds",
                &["level", "lambda", "A", "B", "psd", "hermitian", "eigen"],
                &rows,
            )?;
            let result = Value::Array(reports);
            em.json("frame-bounds", &result)?;
            em.finish(result)
        }
        Command::Dual {
            ifs,
            c_max,
            lambda,
            choice,
            common,
        } => {
            let sys = parse_ifs(&ifs)?;
            let b = budget(&common)?;
            let c_max = c_max.unwrap_or(sys.scale() - 1);
            let mut config = ExperimentConfig::new("dual")
                .param("c_max", c_max)
                .param("lambda", lambda)
                .param("choice", choice);
            config.ifs = Some(ifs_value(&sys));
            let em = Emitter::new(&common, config);
            let complements = sys.find_complement(c_max);
            let chosen = complements.get(choice).ok_or_else(|| {
                CliError::Usage(format!(
                    "no complement #{choice}: {} found with digits ≤ {c_max}",
                    complements.len()
                ))
            })?;
            let c = AffineIfs::new(sys.scale(), chosen)?;
            let nu = c.dual_weights_integers(lambda, &b);
            let measure = serde_json::to_value(MeasureJson::from_atomic(&nu))?;
            write_atomic(
                &common.out.join("dual-measure.json"),
                pretty(&measure).as_bytes(),
            )?;
            let result = json!({
                "complements": complements,
                "chosen": chosen,
                "spectrum_residual": SplitSystem::new(sys.clone(), c.clone())?
                    .combined()
                    .integer_spectrum_residual(100, &b),
                "atoms": nu.len(),
                "total_mass": nu.total_mass(),
                "measure": "dual-measure.json",
            });
            em.json("dual", &result)?;
            em.finish(result)
        }
        Command::Beurling {
            nu,
            lambda,
            radii,
            alpha,
            hull,
            common,
        } => {
            let b = budget(&common)?;
            let radii = match &radii {
                Some(s) => parse_radii(s)?,
                None => default_dimension_radii(),
            };
            let config = nu_config(ExperimentConfig::new("beurling"), &nu)
                .param("lambda", lambda)
                .param("radii", &radii)
                .param("alpha", alpha)
                .param("hull", &hull);
            let em = Emitter::new(&common, config);
            let (m, reference) = resolve_nu(&nu, lambda, &b)?;
            let dim = dimension(&m, &radii)?;
            let mut result = json!({
                "measure_ref": reference,
                "dimension": dimension_json(&dim, &radii),
            });
            if let Some(h) = &hull {
                let h = parse_pair(h, "hull")?;
                result["lower_density"] = json!(lower_density(&m, &radii, h)?);
            }
            if let Some(a) = alpha {
                let scan = upper_density(&m, a, &radii)?;
                let rows: Vec<Vec<Cell>> = scan
                    .radii
                    .iter()
                    .zip(&scan.sup_masses)
                    .zip(&scan.ratios)
                    .map(|((&r, &s), &q)| vec![r.into(), s.into(), q.into()])
                    .collect();
                result["upper_density"] = density_scan_json(&scan);
                em.csv("beurling", &["radius", "sup_mass", "ratio"], &rows)?;
            }
            em.json("beurling", &result)?;
            em.finish(result)
        }
        Command::Discretize {
            measure,
            r,
            rule,
            common,
        } => {
            let mut config = ExperimentConfig::new("discretize")
                .param("r", r)
                .param("rule", format!("{rule:?}").to_lowercase());
            config.measures.push(measure.display().to_string());
            let em = Emitter::new(&common, config);
            let m = read_measure(&measure)?;
            let rule = match rule {
                Rule::Left => PointRule::Left,
                Rule::Center => PointRule::Center,
            };
            let d = discretize(&m, r, rule)?;
            let result = json!({
                "r": r,
                "measure": MeasureJson::from_atomic(&d),
                "total_mass": d.total_mass(),
            });
            em.json("discretize", &result)?;
            em.finish(result)
        }
        Command::Convolve {
            measure,
            with,
            common,
        } => {
            let mut config = ExperimentConfig::new("convolve");
            config.measures = vec![measure.display().to_string(), with.display().to_string()];
            let em = Emitter::new(&common, config);
            let c = convolve(&read_measure(&measure)?, &read_measure(&with)?);
            let result = json!({
                "measure": MeasureJson::from_measure(&c),
                "total_mass": c.total_mass(),
            });
            em.json("convolve", &result)?;
            em.finish(result)
        }
        Command::Reconstruct {
            ifs,
            complement,
            level,
            coeffs,
            t,
            cutoff,
            step,
            common,
        } => {
            let base = parse_ifs(&ifs)?;
            let comp = parse_ifs(&complement)?;
            let b = budget(&common)?;
            let mut config = ExperimentConfig::new("reconstruct")
                .param("complement", IfsJson::of(&comp))
                .param("level", level)
                .param("coeffs", &coeffs)
                .param("t", &t)
                .param("cutoff", cutoff)
                .param("step", step);
            config.ifs = Some(ifs_value(&base));
            let em = Emitter::new(&common, config);
            let sys = SplitSystem::new(base, comp)?;
            let c: Vec<Complex64> = match &coeffs {
                Some(text) => serde_json::from_str::<Vec<(f64, f64)>>(text)?
                    .into_iter()
                    .map(|(re, im)| Complex64::new(re, im))
                    .collect(),
                None => vec![Complex64::new(1.0, 0.0); sys.base().digit_count().pow(level as u32)],
            };
            let f = CylinderFunction::new(sys.base(), level, c)?;
            let reports = parallel::reconstruct_many(&sys, &f, &t, cutoff, step, &b)?;
            let result = Value::Array(reports.iter().map(reconstruction_json).collect());
            em.json("reconstruct", &result)?;
            em.finish(result)
        }
        Command::Counterexample { measure, t, common } => {
            let mut config = ExperimentConfig::new("counterexample").param("t", &t);
            let m = match &measure {
                Some(p) => {
                    config.measures.push(p.display().to_string());
                    read_measure(p)?
                }
                None => {
                    config = config.param("default_measure", "mollify(comb(100), 1)");
                    mollify(&AtomicMeasure::integer_comb(100).into(), 1.0)?.into()
                }
            };
            let em = Emitter::new(&common, config);
            let cert = lower_bound_decay_certificate(&m, &t);
            let rows: Vec<Vec<Cell>> = cert
                .rows
                .iter()
                .map(|&(t, p)| vec![t.into(), p.into()])
                .collect();
            em.csv("counterexample", &["T", "probe"], &rows)?;
            let result = json!({
                "rows": cert.rows,
                "monotone": cert.monotone,
                "decay_ratio": cert.decay_ratio,
            });
            em.json("counterexample", &result)?;
            em.finish(result)
        }
        Command::Catalog => Ok(serde_json::to_value(CATALOG)?),
        Command::Sample {
            ifs,
            count,
            depth,
            seed,
            common,
        } => {
            let sys = parse_ifs(&ifs)?;
            let mut config = ExperimentConfig::new("sample")
                .param("count", count)
                .param("depth", depth)
                .param("rng", "ChaCha8Rng::seed_from_u64");
            config.ifs = Some(ifs_value(&sys));
            config.seed = Some(seed);
            let em = Emitter::new(&common, config);
            let xs = sys.sample_invariant(depth, count, seed)?;
            let rows: Vec<Vec<Cell>> = xs.iter().map(|&x| vec![x.into()]).collect();
            em.csv("sample", &["x"], &rows)?;
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let result = json!({ "count": count, "mean": mean, "csv": "sample.csv" });
            em.json("sample", &result)?;
            em.finish(result)
        }
    }
}

/// Parse, run, and report. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return 2;
        }
    };
    match run(cli.command) {
        Ok(v) => {
            print!("{}", pretty(&v));
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}
