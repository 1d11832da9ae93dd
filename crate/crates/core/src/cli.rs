//! Command-line front end.
//!
//! Every option can also come from a flat JSON config file (`--config`); flags
//! win over file values. Each run writes its CSV/JSON outputs plus one
//! `manifest.json` into the output directory (`--out`, then `$BORN_DQPT_OUT`,
//! then `./out`).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::{critical_times, finite_size_zeros, rate_fn_finite, rate_fn_thermo};
use crate::ensemble::{
    born_distribution, bootstrap, moment_free_energy, multifractal_fit, participation_entropy, sample, MomentIndex,
    Normalization, BOOTSTRAP_RESAMPLES,
};
use crate::error::{Error, Result};
use crate::evolution::{ComplexTime, EvolutionMode};
use crate::experiments::{
    complex_scan, detect_zeros, evolve_to, finite_size_study, sampling_study, snap_to_step, time_series, FssQuantity,
    ScanGrid, ScanQuantity, SeriesRequest, DEFAULT_ZERO_THRESHOLD,
};
use crate::io::{fmt_float, output_dir, write_json, write_manifest, CsvTable};
use crate::mbqc::{build_layout, run_shot, verify_equivalence, ProtocolMode, Role};
use crate::model::{Bitstring, Boundary, ModelParams, RunManifest, TimeGrid};
use crate::{cancel, mbqc};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Configuration or usage error.
pub const EXIT_CONFIG: i32 = 2;
/// A size cap was exceeded.
pub const EXIT_CAPACITY: i32 = 3;
/// A verification check failed.
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "born-dqpt", version, about = "Born-rule statistics of DQPTs in the transverse-field Ising chain")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Angles accept multiples of pi such as `pi/160`.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat JSON file with default values for any option
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Chain length
    #[arg(long = "L", global = true)]
    pub l: Option<String>,
    /// Ising coupling
    #[arg(long = "J", global = true)]
    pub j: Option<String>,
    /// Transverse field
    #[arg(long = "h", global = true)]
    pub h: Option<String>,
    /// pbc or obc
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    /// Trotter step
    #[arg(long, global = true)]
    pub dt: Option<String>,
    /// Evolution backend: trotter or exact (default: exact when L <= 14)
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<String>,
}

/// Real-time grid `[tmin, tmax]` with `steps` intervals (default: one per Trotter step).
#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub tmin: Option<String>,
    #[arg(long)]
    pub tmax: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate function of |+...+> and the most likely outcome over time
    Evolve(GridArgs),
    /// Lowest-f levels of the outcome spectrum over time
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        /// Number of levels per frame
        #[arg(long)]
        k: Option<String>,
    },
    /// Moment-averaged free energies f_n
    Moments {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated moments, `inf` allowed
        #[arg(long)]
        n: Option<String>,
    },
    /// Participation entropies and multifractal dimensions
    Pe {
        #[arg(long)]
        q: Option<String>,
        /// Comma-separated chain lengths
        #[arg(long)]
        sizes: Option<String>,
        /// Evaluation time (default: first critical time)
        #[arg(long)]
        t: Option<String>,
    },
    /// Born sampling, or a sampling study with `--study`
    Sample {
        #[arg(long)]
        t: Option<String>,
        /// Shots (comma-separated list for a study)
        #[arg(long)]
        shots: Option<String>,
        /// Seeds for a study
        #[arg(long)]
        seeds: Option<String>,
        /// Times for a study (default: 20 random times in [0, 3pi])
        #[arg(long)]
        times: Option<String>,
        #[arg(long)]
        study: bool,
    },
    /// Complex-time heatmaps with zero detection
    Scan {
        /// Comma-separated: post, post_raw, f<n>
        #[arg(long)]
        quantity: Option<String>,
        #[arg(long)]
        tmin: Option<String>,
        #[arg(long)]
        tmax: Option<String>,
        #[arg(long)]
        nt: Option<String>,
        #[arg(long)]
        taumin: Option<String>,
        #[arg(long)]
        taumax: Option<String>,
        #[arg(long)]
        ntau: Option<String>,
        /// Detection threshold on the scanned value
        #[arg(long)]
        threshold: Option<String>,
    },
    /// Finite-size scaling at a critical time
    Fss {
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        n: Option<String>,
        /// Also scale the post-selected rate
        #[arg(long)]
        post: bool,
        /// Critical time (default: first one, snapped to the Trotter grid)
        #[arg(long)]
        tc: Option<String>,
    },
    /// Streaming cluster-state protocol
    Mbqc {
        #[arg(long)]
        steps: Option<String>,
        #[arg(long)]
        shots: Option<String>,
        /// postselect_zero, corrected or random_circuit
        #[arg(long)]
        protocol: Option<String>,
    },
    /// Contract checks; exits with status 4 on failure
    Verify {
        /// Cluster gadget against the direct Trotter step
        #[arg(long)]
        mbqc: bool,
        /// Finite-size closed form against exact evolution
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        trials: Option<String>,
        /// Tolerance (defaults: 1e-10 for mbqc, 1e-8 for oracle)
        #[arg(long)]
        tol: Option<String>,
    },
}

/// Parses `3pi`, `pi/160`, `-41pi/160`, `2*pi/3`, `π` or a plain number.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::Input(format!("cannot parse {s:?} as a number or multiple of pi"));
    let t: String = s.trim().to_lowercase().replace('π', "pi").split_whitespace().collect();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let value = match num.split_once("pi") {
        Some((coef, rest)) if rest.is_empty() => {
            let coef = coef.trim_end_matches('*');
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        Some(_) => return Err(bad()),
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 || !value.is_finite() {
        return Err(bad());
    }
    Ok(value / den)
}

/// Flags layered over config-file values.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Input(format!("cannot read config {}: {e}", p.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::Input(format!("config {}: {e}", p.display())))?;
            let Value::Object(map) = v else {
                return Err(Error::Input("config must be a flat JSON object".into()));
            };
            for (k, v) in map {
                let s = match v {
                    Value::String(s) => s,
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    Value::Array(items) => items
                        .iter()
                        .map(|i| match i {
                            Value::String(s) => Ok(s.clone()),
                            Value::Number(n) => Ok(n.to_string()),
                            _ => Err(Error::Input(format!("config key {k:?}: lists hold numbers or strings"))),
                        })
                        .collect::<Result<Vec<_>>>()?
                        .join(","),
                    _ => return Err(Error::Input(format!("config key {k:?} is not flat"))),
                };
                file.insert(k, s);
            }
        }
        Ok(Settings { file })
    }

    fn raw(&self, key: &str, flag: &Option<String>) -> Option<String> {
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    fn flag(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.file.get(key).map(String::as_str) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(Error::Input(format!("{key}: expected true or false, got {v:?}"))),
        }
    }

    fn angle(&self, key: &str, flag: &Option<String>) -> Result<Option<f64>> {
        self.raw(key, flag)
            .map(|s| parse_angle(&s).map_err(|e| Error::Input(format!("{key}: {e}"))))
            .transpose()
    }

    fn int<T: std::str::FromStr>(&self, key: &str, flag: &Option<String>) -> Result<Option<T>> {
        self.raw(key, flag)
            .map(|s| s.trim().parse::<T>().map_err(|_| Error::Input(format!("{key}: expected an integer, got {s:?}"))))
            .transpose()
    }

    fn list<T>(&self, key: &str, flag: &Option<String>, parse: impl Fn(&str) -> Result<T>) -> Result<Option<Vec<T>>> {
        let Some(s) = self.raw(key, flag) else { return Ok(None) };
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| parse(x).map_err(|e| Error::Input(format!("{key}: {e}"))))
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(Error::Input(format!("{key}: empty list")));
        }
        Ok(Some(items))
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Input(format!("expected an integer, got {s:?}")))
}

/// One run: resolved parameters, output location and the manifest under construction.
struct Run {
    params: ModelParams,
    mode: Option<EvolutionMode>,
    seed: u64,
    dir: PathBuf,
    settings: Settings,
    extra: BTreeMap<String, Value>,
}

impl Run {
    fn mode_for(&self, l: usize) -> EvolutionMode {
        self.mode.unwrap_or_else(|| EvolutionMode::best_for(l))
    }

    fn grid(&self, g: &GridArgs) -> Result<TimeGrid> {
        let s = &self.settings;
        let t0 = s.angle("tmin", &g.tmin)?.unwrap_or(0.0);
        let t1 = s.angle("tmax", &g.tmax)?.unwrap_or(3.0 * PI);
        let steps = match s.int::<usize>("steps", &g.steps)? {
            Some(n) => n,
            None => (((t1 - t0) / self.params.dt).round() as usize).max(1),
        };
        TimeGrid::new(t0, t1, steps)
    }

    fn csv(&self, name: &str, header: &[&str]) -> Result<CsvTable> {
        CsvTable::create(&self.dir.join(name), header)
    }

    fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.extra.insert(key.to_string(), value.into());
    }

    fn finish(self, command: &str, grid: TimeGrid, mode: &str, truncated: bool) -> Result<()> {
        let mut m = RunManifest::new(self.params, grid, mode, self.seed).with_extra("command", command);
        m.extra.extend(self.extra);
        m.truncated = truncated;
        write_manifest(&self.dir, &m)?;
        if truncated {
            eprintln!("interrupted: partial outputs written to {}", self.dir.display());
        }
        Ok(())
    }
}

fn resolve(common: &Common) -> Result<Run> {
    let settings = Settings::load(common.config.as_deref())?;
    let d = ModelParams::default();
    let params = ModelParams {
        l: settings.int("L", &common.l)?.unwrap_or(d.l),
        j: settings.angle("J", &common.j)?.unwrap_or(d.j),
        h: settings.angle("h", &common.h)?.unwrap_or(d.h),
        boundary: match settings.raw("boundary", &common.boundary) {
            Some(b) => b.parse::<Boundary>()?,
            None => d.boundary,
        },
        dt: settings.angle("dt", &common.dt)?.unwrap_or(d.dt),
    };
    params.validate()?;
    let mode = match settings.raw("mode", &common.mode).as_deref() {
        None | Some("auto") => None,
        Some(m) => Some(m.parse::<EvolutionMode>()?),
    };
    let seed = settings.int("seed", &common.seed)?.unwrap_or(0);
    let out = settings.raw("out", &common.out).map(PathBuf::from);
    let dir = output_dir(out.as_deref());
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Input(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(Run {
        params,
        mode,
        seed,
        dir,
        settings,
        extra: BTreeMap::new(),
    })
}

fn first_critical_time(p: &ModelParams) -> Result<f64> {
    Ok(snap_to_step(critical_times(p.h / p.j.abs(), 0)? / p.j.abs(), p.dt))
}

fn moment_list(s: &str) -> Result<MomentIndex> {
    s.parse()
}

/// Parses arguments and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Verification(_) => EXIT_VERIFICATION,
        _ => EXIT_CONFIG,
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut run = resolve(&cli.common)?;
    match cli.command {
        Command::Evolve(g) => evolve_cmd(run, &g),
        Command::Spectrum { grid, k } => {
            let k = run.settings.int("k", &k)?.unwrap_or(8);
            spectrum_cmd(run, &grid, k)
        }
        Command::Moments { grid, n } => {
            let ns = run.settings.list("n", &n, moment_list)?.unwrap_or_else(|| {
                [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
                    .map(MomentIndex::Finite)
                    .into_iter()
                    .chain([MomentIndex::Infinity])
                    .collect()
            });
            moments_cmd(run, &grid, ns)
        }
        Command::Pe { q, sizes, t } => {
            let qs = run.settings.list("q", &q, |s| parse_angle(s))?.unwrap_or_else(|| vec![0.0, 1.0, 2.0, 5.0]);
            let sizes = run.settings.list("sizes", &sizes, parse_int::<usize>)?.unwrap_or_else(|| vec![8, 10, 12]);
            let t = match run.settings.angle("t", &t)? {
                Some(t) => t,
                None => first_critical_time(&run.params)?,
            };
            pe_cmd(run, &qs, &sizes, t)
        }
        Command::Sample {
            t,
            shots,
            seeds,
            times,
            study,
        } => {
            if run.settings.flag("study", study)? {
                let shots = run.settings.list("shots", &shots, parse_int::<u64>)?.unwrap_or_else(|| vec![2000, 8000, 32000]);
                let seeds = run.settings.list("seeds", &seeds, parse_int::<u64>)?.unwrap_or_else(|| (1..=5).collect());
                let times = match run.settings.list("times", &times, parse_angle)? {
                    Some(ts) => ts,
                    None => {
                        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
                        let mut ts: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..3.0 * PI)).collect();
                        ts.sort_by(f64::total_cmp);
                        ts
                    }
                };
                study_cmd(run, &times, &shots, &seeds)
            } else {
                let shots = run.settings.int::<u64>("shots", &shots)?.unwrap_or(10_000);
                let t = match run.settings.angle("t", &t)? {
                    Some(t) => t,
                    None => first_critical_time(&run.params)?,
                };
                sample_cmd(run, t, shots)
            }
        }
        Command::Scan {
            quantity,
            tmin,
            tmax,
            nt,
            taumin,
            taumax,
            ntau,
            threshold,
        } => {
            let s = &run.settings;
            let d = ScanGrid::default();
            let grid = ScanGrid {
                t_min: s.angle("tmin", &tmin)?.unwrap_or(d.t_min),
                t_max: s.angle("tmax", &tmax)?.unwrap_or(d.t_max),
                nt: s.int("nt", &nt)?.unwrap_or(d.nt),
                tau_min: s.angle("taumin", &taumin)?.unwrap_or(d.tau_min),
                tau_max: s.angle("taumax", &taumax)?.unwrap_or(d.tau_max),
                ntau: s.int("ntau", &ntau)?.unwrap_or(d.ntau),
            };
            let qs = s
                .list("quantity", &quantity, |q| q.parse::<ScanQuantity>())?
                .unwrap_or_else(|| vec![ScanQuantity::PostSelected]);
            let threshold = s.angle("threshold", &threshold)?.unwrap_or(DEFAULT_ZERO_THRESHOLD);
            scan_cmd(run, &grid, &qs, threshold)
        }
        Command::Fss { sizes, n, post, tc } => {
            let sizes = run.settings.list("sizes", &sizes, parse_int::<usize>)?.unwrap_or_else(|| vec![8, 10, 12, 14, 16]);
            let mut qs: Vec<FssQuantity> = run
                .settings
                .list("n", &n, moment_list)?
                .unwrap_or_else(|| vec![MomentIndex::Finite(1.0), MomentIndex::Finite(5.0)])
                .into_iter()
                .map(FssQuantity::Moment)
                .collect();
            if run.settings.flag("post", post)? {
                qs.push(FssQuantity::PostSelected);
            }
            let tc = match run.settings.angle("tc", &tc)? {
                Some(t) => t,
                None => first_critical_time(&run.params)?,
            };
            fss_cmd(run, &sizes, &qs, tc)
        }
        Command::Mbqc { steps, shots, protocol } => {
            let steps = run.settings.int::<usize>("steps", &steps)?.unwrap_or(10);
            let shots = run.settings.int::<u64>("shots", &shots)?.unwrap_or(1000);
            let protocol = match run.settings.raw("protocol", &protocol) {
                Some(p) => p.parse()?,
                None => ProtocolMode::Corrected,
            };
            mbqc_cmd(run, steps, shots, protocol)
        }
        Command::Verify {
            mbqc,
            oracle,
            trials,
            tol,
        } => {
            let mut do_mbqc = run.settings.flag("mbqc", mbqc)?;
            let mut do_oracle = run.settings.flag("oracle", oracle)?;
            if !do_mbqc && !do_oracle {
                do_mbqc = true;
                do_oracle = true;
            }
            let trials = run.settings.int::<usize>("trials", &trials)?.unwrap_or(50);
            let tol = run.settings.angle("tol", &tol)?;
            run.note("trials", trials);
            verify_cmd(run, do_mbqc, do_oracle, trials, tol)
        }
    }
}

fn evolve_cmd(mut run: Run, g: &GridArgs) -> Result<()> {
    let grid = run.grid(g)?;
    let mode = run.mode_for(run.params.l);
    let req = SeriesRequest {
        plus: true,
        ground: true,
        ..SeriesRequest::default()
    };
    let series = time_series(&run.params, &grid, &req, mode)?;
    let mut csv = run.csv("evolve.csv", &["t", "f_plus", "ground"])?;
    for r in &series.rows {
        let ground = r.ground.map(|b| b.to_string()).unwrap_or_default();
        csv.row([fmt_float(r.t), fmt_float(r.plus.unwrap_or(f64::NAN)), ground])?;
    }
    csv.finish()?;
    let p = run.params;
    if p.boundary == Boundary::Pbc {
        let mut csv = run.csv("analytic.csv", &["t", "f_thermo", "f_finite_L", "L"])?;
        for r in &series.rows {
            let z = ComplexTime::real(r.t);
            let thermo = rate_fn_thermo(z, p.j, p.h)?.value;
            let finite = if p.l % 2 == 0 { rate_fn_finite(z, p.j, p.h, p.l)? } else { f64::NAN };
            csv.row([fmt_float(r.t), fmt_float(thermo), fmt_float(finite), p.l.to_string()])?;
        }
        csv.finish()?;
    }
    let traj = series.ground_trajectory();
    run.note("ground_changes", traj.times.iter().map(|t| fmt_float(*t)).collect::<Vec<_>>());
    run.finish("evolve", grid, mode.as_str(), series.truncated)
}

fn spectrum_cmd(run: Run, g: &GridArgs, k: usize) -> Result<()> {
    let grid = run.grid(g)?;
    let mode = run.mode_for(run.params.l);
    let req = SeriesRequest {
        spectrum_k: Some(k),
        ..SeriesRequest::default()
    };
    let series = time_series(&run.params, &grid, &req, mode)?;
    let mut csv = run.csv("spectrum.csv", &["t", "rank", "bitstring", "f"])?;
    for r in &series.rows {
        if let Some(frame) = &r.spectrum {
            for (rank, lvl) in frame.levels.iter().enumerate() {
                csv.row([fmt_float(r.t), rank.to_string(), lvl.sigma.to_string(), fmt_float(lvl.f)])?;
            }
        }
    }
    csv.finish()?;
    run.finish("spectrum", grid, mode.as_str(), series.truncated)
}

fn moments_cmd(mut run: Run, g: &GridArgs, ns: Vec<MomentIndex>) -> Result<()> {
    let grid = run.grid(g)?;
    let mode = run.mode_for(run.params.l);
    let req = SeriesRequest {
        moments: ns.clone(),
        ..SeriesRequest::default()
    };
    let series = time_series(&run.params, &grid, &req, mode)?;
    let mut csv = run.csv("moments.csv", &["t", "n", "f_n"])?;
    for r in &series.rows {
        for (n, f) in ns.iter().zip(&r.moments) {
            csv.row([fmt_float(r.t), n.to_string(), fmt_float(*f)])?;
        }
    }
    csv.finish()?;
    run.note("n", ns.iter().map(|n| n.to_string()).collect::<Vec<_>>());
    run.finish("moments", grid, mode.as_str(), series.truncated)
}

fn pe_cmd(mut run: Run, qs: &[f64], sizes: &[usize], t: f64) -> Result<()> {
    let mut csv = run.csv("pe.csv", &["L", "q", "S_q"])?;
    let mut per_q: Vec<Vec<(usize, f64)>> = vec![Vec::new(); qs.len()];
    let mut modes = Vec::new();
    let mut truncated = false;
    for &l in sizes {
        if cancel::is_requested() {
            truncated = true;
            break;
        }
        let p = ModelParams { l, ..run.params };
        let mode = run.mode_for(l);
        modes.push(format!("{l}:{}", mode.as_str()));
        let dist = born_distribution(evolve_to(&p, ComplexTime::real(t), mode)?, Normalization::Normalized)?;
        for (i, &q) in qs.iter().enumerate() {
            let pe = participation_entropy(&dist, q)?;
            csv.row([l.to_string(), fmt_float(q), fmt_float(pe.s_q)])?;
            per_q[i].push((l, pe.s_q));
        }
    }
    csv.finish()?;
    if !truncated && sizes.len() >= 3 {
        let fits = qs
            .iter()
            .zip(&per_q)
            .map(|(q, pts)| multifractal_fit(*q, pts))
            .collect::<Result<Vec<_>>>()?;
        write_json(&run.dir.join("dq.json"), &fits)?;
    }
    run.note("t", fmt_float(t));
    run.note("sizes", sizes.to_vec());
    let mode = modes.join(",");
    let grid = TimeGrid::new(t, t, 1)?;
    run.finish("pe", grid, &mode, truncated)
}

#[derive(Serialize)]
struct SampleSummary {
    t: f64,
    shots: u64,
    seed: u64,
    distinct: usize,
    f0_hat: f64,
    f0_err: f64,
    f1_hat: f64,
    f1_err: f64,
    f0_exact: f64,
    f1_exact: f64,
}

fn sample_cmd(mut run: Run, t: f64, shots: u64) -> Result<()> {
    let mode = run.mode_for(run.params.l);
    let dist = born_distribution(evolve_to(&run.params, ComplexTime::real(t), mode)?, Normalization::Normalized)?;
    let rec = sample(&dist, shots, run.seed)?;
    let mut csv = run.csv("samples.csv", &["bitstring", "count"])?;
    for (b, c) in rec.iter() {
        csv.row([b.to_string(), c.to_string()])?;
    }
    csv.finish()?;
    let ns = [MomentIndex::Finite(0.0), MomentIndex::Finite(1.0)];
    let est = bootstrap(&rec, &ns, BOOTSTRAP_RESAMPLES, run.seed ^ 0x5eed_b007)?;
    let summary = SampleSummary {
        t,
        shots,
        seed: run.seed,
        distinct: rec.distinct(),
        f0_hat: est[0].estimate,
        f0_err: est[0].std_error,
        f1_hat: est[1].estimate,
        f1_err: est[1].std_error,
        f0_exact: moment_free_energy(&dist, ns[0])?,
        f1_exact: moment_free_energy(&dist, ns[1])?,
    };
    write_json(&run.dir.join("estimates.json"), &summary)?;
    run.note("shots", shots);
    run.finish("sample", TimeGrid::new(t, t, 1)?, mode.as_str(), false)
}

fn study_cmd(mut run: Run, times: &[f64], shots: &[u64], seeds: &[u64]) -> Result<()> {
    let mode = run.mode_for(run.params.l);
    let (rows, truncated) = sampling_study(&run.params, times, shots, seeds, mode)?;
    let mut csv = run.csv(
        "sampling.csv",
        &["t", "shots", "seed", "f0", "f0_err", "f1", "f1_err", "f0_exact", "f1_exact"],
    )?;
    for r in &rows {
        csv.row([
            fmt_float(r.t),
            r.shots.map_or("inf".to_string(), |n| n.to_string()),
            r.seed.map_or(String::new(), |s| s.to_string()),
            fmt_float(r.f0),
            fmt_float(r.f0_err),
            fmt_float(r.f1),
            fmt_float(r.f1_err),
            fmt_float(r.f0_exact),
            fmt_float(r.f1_exact),
        ])?;
    }
    csv.finish()?;
    run.note("times", times.iter().map(|t| fmt_float(*t)).collect::<Vec<_>>());
    run.note("shots", shots.to_vec());
    run.note("seeds", seeds.to_vec());
    let (lo, hi) = times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
    let grid = TimeGrid::new(lo, hi, times.len().saturating_sub(1).max(1))?;
    run.finish("sample", grid, mode.as_str(), truncated)
}

fn scan_cmd(mut run: Run, grid: &ScanGrid, qs: &[ScanQuantity], threshold: f64) -> Result<()> {
    let frames = complex_scan(&run.params, grid, qs)?;
    let mut csv = run.csv("scan.csv", &["t", "tau", "quantity", "value"])?;
    for f in &frames {
        let label = f.quantity.to_string();
        for j in 0..grid.ntau {
            for i in 0..grid.nt {
                csv.row([fmt_float(grid.t_at(i)), fmt_float(grid.tau_at(j)), label.clone(), fmt_float(f.get(i, j))])?;
            }
        }
    }
    csv.finish()?;
    let mut cand = run.csv(
        "candidates.csv",
        &["quantity", "t", "tau", "value", "t_refined", "tau_refined", "value_refined"],
    )?;
    let mut found = BTreeMap::new();
    for f in &frames {
        let label = f.quantity.to_string();
        let zs = detect_zeros(f, threshold)?;
        found.insert(label.clone(), zs.len());
        for z in zs {
            cand.row([
                label.clone(),
                fmt_float(z.t),
                fmt_float(z.tau),
                fmt_float(z.value),
                fmt_float(z.refined.t),
                fmt_float(z.refined.tau),
                fmt_float(z.refined_value),
            ])?;
        }
    }
    cand.finish()?;
    let p = run.params;
    if p.boundary == Boundary::Pbc && p.l % 2 == 0 {
        let mut zc = run.csv("zeros.csv", &["m", "k", "Re z", "Im z"])?;
        for z in finite_size_zeros(p.l, p.j, p.h, -4..=4) {
            zc.row([z.m.to_string(), fmt_float(z.k), fmt_float(z.z.re), fmt_float(z.z.im)])?;
        }
        zc.finish()?;
    }
    let truncated = frames.iter().any(|f| f.truncated);
    run.note("scan_grid", serde_json::to_value(grid)?);
    run.note("threshold", threshold);
    run.note("candidates", serde_json::to_value(&found)?);
    let tg = TimeGrid::new(grid.t_min, grid.t_max, grid.nt.saturating_sub(1).max(1))?;
    run.finish("scan", tg, EvolutionMode::ExactSpectral.as_str(), truncated)
}

fn fss_cmd(mut run: Run, sizes: &[usize], qs: &[FssQuantity], tc: f64) -> Result<()> {
    let report = finite_size_study(&run.params, sizes, qs, tc)?;
    let mut csv = run.csv("fss.csv", &["n", "L", "f_n", "f_analytic", "deviation"])?;
    for s in &report.series {
        for p in &s.points {
            csv.row([s.n.clone(), p.l.to_string(), fmt_float(p.f_n), fmt_float(p.f_analytic), fmt_float(p.deviation)])?;
        }
    }
    csv.finish()?;
    write_json(
        &run.dir.join("fit.json"),
        &json!({ "t_c": tc, "fits": report.fits, "sensitivity": report.sensitivity }),
    )?;
    run.note("sizes", sizes.to_vec());
    run.note("t_c", fmt_float(tc));
    let modes: Vec<String> = report
        .series
        .first()
        .map(|s| s.points.iter().map(|p| format!("{}:{}", p.l, p.mode)).collect())
        .unwrap_or_default();
    run.finish("fss", TimeGrid::new(tc, tc, 1)?, &modes.join(","), report.truncated)
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Vertex => "vertex",
        Role::BondEdge => "bond_edge",
        Role::UpperEdge => "upper_edge",
        Role::Logical => "logical",
    }
}

fn mbqc_cmd(mut run: Run, steps: usize, shots: u64, protocol: ProtocolMode) -> Result<()> {
    use rayon::prelude::*;
    if steps == 0 || shots == 0 {
        return Err(Error::Input("mbqc needs at least one step and one shot".into()));
    }
    let layout = build_layout(&run.params)?;
    let seed = run.seed;
    let runs: Vec<Option<mbqc::ProtocolRun>> = (0..shots)
        .into_par_iter()
        .map(|n| {
            if cancel::is_requested() {
                Ok(None)
            } else {
                run_shot(&layout, steps, protocol, seed, n).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let truncated = runs.iter().any(Option::is_none);
    let mut bcsv = run.csv("mbqc_boundary.csv", &["shot", "boundary_bitstring"])?;
    let mut scsv = run.csv("mbqc_shots.csv", &["shot", "step", "qubit_role", "site", "outcome"])?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut done = 0u64;
    for r in runs.iter().flatten() {
        done += 1;
        let shot = r.record.shot.to_string();
        bcsv.row([shot.clone(), r.boundary.to_string()])?;
        *counts.entry(r.boundary.index()).or_insert(0) += 1;
        for (s, o) in r.record.steps.iter().enumerate() {
            let step = s.to_string();
            for (k, m) in o.bond.iter().enumerate() {
                scsv.row([shot.clone(), step.clone(), role_name(Role::BondEdge).into(), k.to_string(), m.to_string()])?;
            }
            for j in 0..layout.l {
                scsv.row([shot.clone(), step.clone(), role_name(Role::Vertex).into(), j.to_string(), o.vertex[j].to_string()])?;
                scsv.row([shot.clone(), step.clone(), role_name(Role::UpperEdge).into(), j.to_string(), o.upper[j].to_string()])?;
            }
        }
    }
    bcsv.finish()?;
    scsv.finish()?;
    let l = layout.l;
    let plus = counts.get(&0).copied().unwrap_or(0) as f64 / done.max(1) as f64;
    let freq: BTreeMap<String, f64> = counts
        .iter()
        .map(|(k, c)| (Bitstring::new(*k, l).to_string(), *c as f64 / done as f64))
        .collect();
    write_json(
        &run.dir.join("mbqc_summary.json"),
        &json!({
            "protocol": protocol.as_str(),
            "steps": steps,
            "shots": done,
            "t": steps as f64 * run.params.dt,
            "p_plus": plus,
            "f_plus_hat": -plus.ln() / l as f64,
            "frequencies": freq,
        }),
    )?;
    run.note("protocol", protocol.as_str());
    run.note("shots", shots);
    run.note("steps", steps);
    let grid = TimeGrid::new(0.0, steps as f64 * run.params.dt, steps)?;
    run.finish("mbqc", grid, protocol.as_str(), truncated)
}

fn verify_cmd(mut run: Run, do_mbqc: bool, do_oracle: bool, trials: usize, tol: Option<f64>) -> Result<()> {
    let mut report = serde_json::Map::new();
    let mut failures = Vec::new();
    if do_mbqc {
        let tol = tol.unwrap_or(1e-10);
        let rep = verify_equivalence(&run.params, trials, run.seed)?;
        let pass = rep.max_deficit <= tol;
        if !pass {
            failures.push(format!("mbqc deficit {:e} > {tol:e}", rep.max_deficit));
        }
        report.insert("mbqc".into(), json!({ "report": rep, "tol": tol, "pass": pass }));
    }
    if do_oracle {
        let tol = tol.unwrap_or(1e-8);
        let p = run.params;
        if p.boundary != Boundary::Pbc || p.l % 2 == 1 {
            return Err(Error::Input("the oracle check needs PBC and even L".into()));
        }
        let mode = match run.mode {
            Some(m) => m,
            None => EvolutionMode::ExactSpectral,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let t = rng.gen_range(0.0..3.0 * PI);
            let z = ComplexTime::real(t);
            let dist = born_distribution(evolve_to(&p, z, mode)?, Normalization::Normalized)?;
            let direct = crate::ensemble::free_energy(&dist, Bitstring::all_plus(p.l));
            let dev = (rate_fn_finite(z, p.j, p.h, p.l)? - direct).abs();
            if dev.is_finite() {
                worst = worst.max(dev);
            } else if !direct.is_infinite() {
                worst = f64::INFINITY;
            }
        }
        let pass = worst <= tol;
        if !pass {
            failures.push(format!("oracle deviation {worst:e} > {tol:e}"));
        }
        report.insert(
            "oracle".into(),
            json!({ "max_deviation": worst, "tol": tol, "pass": pass, "mode": mode.as_str() }),
        );
    }
    write_json(&run.dir.join("verify.json"), &Value::Object(report))?;
    run.note("checks", failures.len());
    run.finish("verify", TimeGrid::default(), "verify", false)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Verification(failures.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/160").unwrap(), PI / 160.0);
        assert_eq!(parse_angle("3pi").unwrap(), 3.0 * PI);
        assert_eq!(parse_angle("41pi/160").unwrap(), 41.0 * PI / 160.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("2*π/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        for bad in ["pix", "", "pi/0", "abc", "1/"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::capacity("x", 1, 0)), EXIT_CAPACITY);
        assert_eq!(exit_code(&Error::Verification("v".into())), EXIT_VERIFICATION);
        assert_eq!(exit_code(&Error::Input("i".into())), EXIT_CONFIG);
        assert_eq!(main_with_args(["born-dqpt", "--bogus"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["born-dqpt", "--version"]), EXIT_OK);
    }

    #[test]
    fn config_lists_flatten() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"L": 8, "dt": "pi/80", "n": [0, 1, "inf"], "post": true}"#).unwrap();
        let s = Settings::load(Some(&path)).unwrap();
        assert_eq!(s.int::<usize>("L", &None).unwrap(), Some(8));
        assert_eq!(s.int::<usize>("L", &Some("10".into())).unwrap(), Some(10));
        assert_eq!(s.angle("dt", &None).unwrap(), Some(PI / 80.0));
        assert_eq!(s.list("n", &None, moment_list).unwrap().unwrap().len(), 3);
        assert!(s.flag("post", false).unwrap());
        std::fs::write(&path, r#"{"L": {"a": 1}}"#).unwrap();
        assert!(Settings::load(Some(&path)).is_err());
    }
}
