//! Command-line driver. Exit codes: 0 success, 1 failed check or numerical
//! failure, 2 usage or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::balance::{
    certify, newton_balance, residual, BlockFile, Builtin, FiniteConfiguration, NewtonOptions,
    BALANCE_TOLERANCE,
};
use crate::concat::{certify_word, classify, concatenate, genus, Genus, PeriodicityVerdict, WordFile};
use crate::configspace::{forces, Configuration, C64};
use crate::error::{Error, Result};
use crate::periods::chart::{a_period_lower, a_period_upper, horizontal_limit, horizontal_solution, limit_balance, two_pi_i, ChartSet};
use crate::periods::laurent::{finite_part_limit, laurent, neck_integrals, vertical_period, DEFAULT_CUTOFF};
use crate::periods::zeros::zero_alignment;
use crate::surfacegen::embed::{embeddedness_report, DEFAULT_SAMPLE};
use crate::surfacegen::mesh::{build_mesh, export_mesh};
use crate::surfacegen::neck::{build_necks, DEFAULT_ROWS, GLUING_TOLERANCE};
use crate::surfacegen::sheet::{build_sheets_unchecked, OffsetMode, SheetOptions, DEFAULT_EPSILON, DEFAULT_GRID, DEFAULT_RING};
use crate::verify::{verify_paper, Check, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "neckstack", version, about = "Balanced neck configurations, periods and first-order meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Also write the JSON result to this file.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Print the JSON result on standard output instead of the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Configuration file `{"levels": [{"k", "points"}]}`.
    #[arg(long, conflicts_with_all = ["word", "builtin"])]
    pub input: Option<PathBuf>,
    /// Word file `{"library", "rule", "residual"}`; realised on --window.
    #[arg(long, conflicts_with = "builtin")]
    pub word: Option<PathBuf>,
    /// Builtin block such as `fan:n=2`, `ladder22`, `chain:a=1,h=3`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Level window `lo:hi` for words.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(i64, i64)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Balance a block by Newton's method and certify it.
    Solve {
        /// Block file `{"name", "type", "points"}` used as the initial guess.
        #[arg(long, conflicts_with = "builtin")]
        input: Option<PathBuf>,
        /// Builtin block; its points are perturbed by --perturb before solving.
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        /// Newton tolerance on the interior forces.
        #[arg(long, default_value_t = crate::balance::NEWTON_TOLERANCE)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Forces F_{k,i} and level sums G_k.
    Forces {
        #[command(flatten)]
        source: Source,
        /// Threshold for calling an interior force zero.
        #[arg(long, default_value_t = BALANCE_TOLERANCE)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Realise a block word on a level window.
    Concat {
        #[arg(long)]
        word: PathBuf,
        #[arg(long, value_parser = parse_window, default_value = "0:8")]
        window: (i64, i64),
        #[command(flatten)]
        common: Common,
    },
    /// Periodicity and recurrence of a block word.
    Classify {
        #[arg(long)]
        word: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_window: usize,
        #[arg(long, default_value_t = 10946)]
        max_shift: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Closed forms and identities: residual forces, determinant, force sums,
    /// residue factor, Laurent leading terms, zero counts.
    VerifyPaper {
        #[arg(long, default_value_t = crate::verify::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = crate::verify::RANDOM_CASES)]
        cases: usize,
        /// Multiplier on every default tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// First-order mesh (OBJ) plus an embeddedness report.
    Mesh {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1e-3)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_RING)]
        ring: usize,
        #[arg(long, default_value_t = DEFAULT_ROWS)]
        rows: usize,
        /// Gluing tolerance for neck boundaries.
        #[arg(long, default_value_t = GLUING_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = crate::surfacegen::embed::DEFAULT_SEED)]
        seed: u64,
        /// Include the finite part of the vertical period in the sheet offsets.
        #[arg(long)]
        finite_part: bool,
        /// Emit horizontal coordinates divided by 2t.
        #[arg(long)]
        unscaled: bool,
        /// Output directory for `mesh.obj` and `report.json`.
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Limit period data: residue balance, A-periods, zeros, Laurent data, vertical and horizontal periods.
    Periods {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1e-3)]
        t: f64,
        /// Tolerance for the limit identities.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_window(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("window `{s}` must be lo:hi"))?;
    let lo: i64 = a.trim().parse().map_err(|e| format!("bad window start: {e}"))?;
    let hi: i64 = b.trim().parse().map_err(|e| format!("bad window end: {e}"))?;
    if lo > hi {
        return Err(format!("window {lo}:{hi} is empty"));
    }
    Ok((lo, hi))
}

fn c2(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_word(path: &Path) -> Result<crate::concat::BlockWord> {
    WordFile::from_json_str(&read(path)?)
}

impl Source {
    fn configuration(&self) -> Result<Configuration> {
        match (&self.input, &self.word, &self.builtin) {
            (Some(p), _, _) => Configuration::from_json_str(&read(p)?),
            (None, Some(w), _) => {
                let (lo, hi) = self.window.unwrap_or((0, 4));
                concatenate(&load_word(w)?, lo, hi)
            }
            (None, None, Some(b)) => Ok(Builtin::parse(b)?.build()?.into_configuration()),
            _ => Err(Error::InvalidInput("one of --input, --word or --builtin is required".into())),
        }
    }
}

/// Outcome of a subcommand: JSON payload, summary lines and verdict.
struct Outcome {
    json: Value,
    summary: Vec<String>,
    pass: bool,
}

fn emit(out: Outcome, common: &Common) -> Result<i32> {
    let text = serde_json::to_string_pretty(&out.json)? + "\n";
    if let Some(p) = &common.output {
        std::fs::write(p, &text)?;
    }
    if common.json {
        print!("{text}");
    } else {
        for line in &out.summary {
            println!("{line}");
        }
    }
    Ok(if out.pass { EXIT_OK } else { EXIT_FAILED })
}

fn check_line(c: &Check) -> String {
    format!(
        "{} {}: computed {:.6e} reference {:.6e} deviation {:.3e} tolerance {:.1e}",
        if c.pass { "PASS" } else { "FAIL" },
        c.name,
        c.computed,
        c.reference,
        c.deviation,
        c.tolerance
    )
}

fn solve(input: &Option<PathBuf>, builtin: &Option<String>, perturb: f64, tol: f64) -> Result<Outcome> {
    let start: FiniteConfiguration = match (input, builtin) {
        (Some(p), _) => serde_json::from_str::<BlockFile>(&read(p)?)?.into_block()?,
        (None, Some(b)) => Builtin::parse(b)?.build()?,
        _ => return Err(Error::InvalidInput("solve needs --input or --builtin".into())),
    };
    let endpoints = (start.first_point(), start.last_point());
    let guess = if perturb != 0.0 {
        let cfg = start.configuration();
        let h = cfg.last_level();
        let shifted = cfg
            .levels()
            .map(|k| {
                cfg.level(k)
                    .iter()
                    .map(|p| if k == 0 || k == h { *p } else { p + C64::new(perturb, perturb) })
                    .collect()
            })
            .collect();
        FiniteConfiguration::new(shifted)?
    } else {
        start.clone()
    };
    let (fc, report) = newton_balance(
        start.level_type(),
        endpoints,
        &guess,
        NewtonOptions { tolerance: tol, ..Default::default() },
    )?;
    let cert = certify(&fc)?;
    let res = residual(&fc);
    let summary = vec![
        format!("balanced in {} iterations, residual {:.3e}", report.iterations, report.final_residual),
        format!("residual force F_C = {:.12}", res.residual_force),
        format!("non-degeneracy: |det| {:.6e}, sigma_min {:.6e}", cert.determinant.norm(), cert.sigma_min),
    ];
    Ok(Outcome {
        json: json!({
            "block": BlockFile::from_block("solved", &fc),
            "newton": report,
            "certificate": cert,
            "residual": res,
        }),
        summary,
        pass: cert.passes,
    })
}

fn forces_cmd(cfg: &Configuration, tol: f64) -> Result<Outcome> {
    let fs = forces(cfg);
    let levels: Vec<Value> = cfg
        .levels()
        .map(|k| {
            json!({
                "k": k,
                "forces": fs.level(k).iter().map(|f| c2(*f)).collect::<Vec<_>>(),
                "g": fs.g(k).map(c2),
            })
        })
        .collect();
    let max = fs.max_interior_force();
    let mut summary = Vec::new();
    for k in cfg.levels() {
        let fmt: Vec<String> = fs.level(k).iter().map(|f| format!("{f:.6e}")).collect();
        summary.push(format!("level {k}: {}", fmt.join(", ")));
    }
    summary.push(format!("max interior force {max:.3e} ({})", if max <= tol { "balanced" } else { "unbalanced" }));
    Ok(Outcome {
        json: json!({ "levels": levels, "max_interior_force": max, "tolerance": tol, "balanced": max <= tol }),
        summary,
        pass: true,
    })
}

fn concat_cmd(word: &Path, window: (i64, i64)) -> Result<Outcome> {
    let w = load_word(word)?;
    let cfg = concatenate(&w, window.0, window.1)?;
    let g = genus(&w, window.0, window.1)?;
    let cert = certify_word(&w)?;
    let fs = forces(&cfg);
    let summary = vec![
        format!("levels {}..={}, {} points", cfg.first_level(), cfg.last_level(), cfg.num_points()),
        format!("genus {g}"),
        format!("max interior force {:.3e}", fs.max_interior_force()),
        format!("uniform sigma_min {:.6e}", cert.uniform_sigma_min),
    ];
    let genus_json = match g {
        Genus::Finite(n) => json!(n),
        Genus::Infinite => json!("infinite"),
    };
    Ok(Outcome {
        json: json!({
            "configuration": cfg.to_json_file(),
            "genus": genus_json,
            "window_genus": cfg.levels().map(|k| cfg.n(k) as u64 - 1).sum::<u64>(),
            "max_interior_force": fs.max_interior_force(),
            "residual_force": c2(w.residual_force()),
            "certificate": cert,
        }),
        summary,
        pass: cert.passes,
    })
}

fn classify_cmd(word: &Path, max_window: usize, max_shift: usize) -> Result<Outcome> {
    let w = load_word(word)?;
    let v = classify(&w, max_window, max_shift)?;
    let line = match &v {
        PeriodicityVerdict::Periodic { period } => format!("periodic, minimal period {period}"),
        PeriodicityVerdict::QuasiPeriodicWitnesses { witnesses, .. } => {
            format!("not periodic; recurrence witnesses for windows 1..={}", witnesses.len())
        }
        PeriodicityVerdict::NotDetected { .. } => "no periodicity or recurrence detected".to_string(),
    };
    Ok(Outcome { json: serde_json::to_value(&v)?, summary: vec![line], pass: true })
}

fn verify_cmd(seed: u64, cases: usize, tol: f64) -> Result<Outcome> {
    let rep = verify_paper(VerifyOptions { seed, cases, tolerance_scale: tol })?;
    let mut summary: Vec<String> = rep.checks.iter().map(check_line).collect();
    let failed = rep.checks.iter().filter(|c| !c.pass).count();
    summary.push(format!("{} checks, {failed} failed", rep.checks.len()));
    Ok(Outcome { json: serde_json::to_value(&rep)?, pass: rep.pass, summary })
}

#[derive(Serialize)]
struct NeckPeriods {
    level: i64,
    index: usize,
    gamma: [f64; 2],
    c_minus_one: [f64; 2],
    vertical_full: Option<[f64; 2]>,
    vertical_finite_part: Option<[f64; 2]>,
    finite_part_limit: [f64; 2],
    v_omega: Option<[f64; 2]>,
    w_omega: Option<[f64; 2]>,
    t_max: f64,
}

fn periods_cmd(cfg: &Configuration, t: f64, tol: f64) -> Result<Outcome> {
    let cs = ChartSet::central(cfg)?;
    let lb = limit_balance(&cs, cfg)?;
    let mut checks = vec![Check::new("boF = 4πi F", lb.max_deviation, 0.0, lb.max_deviation, tol)];
    let mut worst_a: f64 = 0.0;
    for k in cfg.levels() {
        let (lo, hi) = (cs.sphere(k).expect("sphere"), cs.sphere(k + 1).expect("sphere"));
        for i in 0..cfg.n(k) {
            let up = a_period_upper(hi, i)?;
            let down = a_period_lower(lo, i)?;
            worst_a = worst_a.max((up - two_pi_i() * lo.gamma_a[i]).norm()).max((up - down).norm());
        }
    }
    checks.push(Check::new("A-periods 2πiγ", worst_a, 0.0, worst_a, tol));
    let mut zeros = Vec::new();
    for ch in cs.complete_spheres() {
        let rep = zero_alignment(ch)?;
        checks.push(Check::new(
            format!("sphere {} zero count", ch.level),
            rep.zero_count as f64,
            rep.expected_count as f64,
            (rep.zero_count as f64 - rep.expected_count as f64).abs(),
            0.0,
        ));
        zeros.push(rep);
    }
    let mut necks = Vec::new();
    let mut horizontal = Vec::new();
    for (k, i) in cs.interior_necks() {
        let (lo, hi) = (cs.sphere(k).expect("sphere"), cs.sphere(k + 1).expect("sphere"));
        let b = laurent(lo, hi, i, DEFAULT_CUTOFF)?;
        let vp = vertical_period(&b, t).ok();
        let ni = neck_integrals(&b, t).ok();
        necks.push(NeckPeriods {
            level: k,
            index: i,
            gamma: c2(b.gamma),
            c_minus_one: c2(b.c_plus(-1)),
            vertical_full: vp.map(|v| c2(v.full)),
            vertical_finite_part: vp.map(|v| c2(v.finite_part)),
            finite_part_limit: c2(finite_part_limit(&b)),
            v_omega: ni.map(|n| c2(n.v_omega)),
            w_omega: ni.map(|n| c2(n.w_omega)),
            t_max: b.constants.t_max,
        });
        if i == 0 && cfg.n(k) > 1 {
            let sol = hi.with_nodes_b(horizontal_solution(lo))?;
            let h = horizontal_limit(lo, &sol, b.constants.epsilon_prime)?;
            let dev = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
            checks.push(Check::new(format!("H(0) at level {k}"), dev, 0.0, dev, tol));
            horizontal.push(json!({ "level": k, "values": h.iter().map(|z| c2(*z)).collect::<Vec<_>>() }));
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let mut summary: Vec<String> = checks.iter().map(check_line).collect();
    summary.push(format!("{} interior necks", necks.len()));
    Ok(Outcome {
        json: json!({
            "t": t,
            "checks": checks,
            "limit_balance": lb,
            "zeros": zeros,
            "necks": necks,
            "horizontal": horizontal,
        }),
        summary,
        pass,
    })
}

#[allow(clippy::too_many_arguments)]
fn mesh_cmd(
    cfg: &Configuration,
    t: f64,
    sheet: SheetOptions,
    rows: usize,
    tol: f64,
    seed: u64,
    unscaled: bool,
    dir: &Path,
) -> Result<i32> {
    // unchecked so that overlapping slabs show up in the report
    let sheets = build_sheets_unchecked(cfg, t, sheet)?;
    let necks = build_necks(&sheets, rows, tol)?;
    let mesh = build_mesh(&sheets, &necks)?;
    let report = embeddedness_report(&sheets, &necks, &mesh, t, DEFAULT_SAMPLE, seed);
    let topology = mesh.topology();
    std::fs::create_dir_all(dir)?;
    let out = if unscaled { mesh.unscaled(t) } else { mesh };
    export_mesh(&out, &dir.join("mesh.obj"))?;
    let body = json!({
        "model": "approximate first-order model: limit sheets joined by catenoid-like necks",
        "frame": if unscaled { "unscaled" } else { "scaled" },
        "t": t,
        "sheets": sheets.len(),
        "necks": necks.len(),
        "topology": topology,
        "embeddedness": report,
    });
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&body)? + "\n")?;
    println!(
        "{} sheets, {} necks, {} vertices, {} triangles, genus {}",
        sheets.len(),
        necks.len(),
        topology.vertices,
        topology.faces,
        topology.genus
    );
    let min_slab = report.slabs.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    println!(
        "embeddedness: {} (slab margin {:.4}, cylinder margin {:.4}, {} intersections in {} sampled triangles)",
        if report.embedded { "pass" } else { "fail" },
        min_slab,
        report.cylinder_margin,
        report.intersections,
        report.sampled_triangles
    );
    Ok(if report.embedded { EXIT_OK } else { EXIT_FAILED })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { input, builtin, perturb, tol, common } => emit(solve(&input, &builtin, perturb, tol)?, &common),
        Command::Forces { source, tol, common } => emit(forces_cmd(&source.configuration()?, tol)?, &common),
        Command::Concat { word, window, common } => emit(concat_cmd(&word, window)?, &common),
        Command::Classify { word, max_window, max_shift, common } => {
            emit(classify_cmd(&word, max_window, max_shift)?, &common)
        }
        Command::VerifyPaper { seed, cases, tol, common } => emit(verify_cmd(seed, cases, tol)?, &common),
        Command::Periods { source, t, tol, common } => emit(periods_cmd(&source.configuration()?, t, tol)?, &common),
        Command::Mesh { source, t, epsilon, grid, ring, rows, tol, seed, finite_part, unscaled, output } => {
            let opts = SheetOptions {
                epsilon,
                grid,
                ring,
                offsets: if finite_part { OffsetMode::WithFinitePart } else { OffsetMode::Leading },
            };
            mesh_cmd(&source.configuration()?, t, opts, rows, tol, seed, unscaled, &output)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::UnknownBuiltin(_) | Error::Json(_) | Error::Io(_) | Error::Uncoverable { .. } => {
            EXIT_USAGE
        }
        _ => EXIT_FAILED,
    }
}

/// Parse `argv` (program name first) and run.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
