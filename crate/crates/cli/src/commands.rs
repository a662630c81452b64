use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kgb_core::closed_form::{exact_csw_special, imbq_soliton, KdvSoliton};
use kgb_core::evolution::{
    evolve_with, to_first_order, EvolutionRun, EvolutionState, EvolveConfig,
};
use kgb_core::io::{columns_to_csv, csv_to_columns, fmt_f64, grid_from_nodes};
use kgb_core::kdv::{bounded_in_time, run_kdv, KdvErrorTable, KdvRun, KdvRunConfig};
use kgb_core::model::{candidate_structure, energy, hamiltonian_structure, momentum};
use kgb_core::regimes::{classify as classify_speed, classify_or_singular};
use kgb_core::spectral::{build_grid, derivative, PeriodicGrid};
use kgb_core::wave_solver::{solve_wave as solve, GuessKind, Method, SolveOptions};
use kgb_core::{ModelCoefficients, RealField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::out::{ensure_dir, read_text, resolve, to_json, write_json, write_text};
use crate::{
    CheckArgs, ClassifyArgs, EvolveArgs, KdvErrorArgs, MethodArg, OracleCommand, SolveWaveArgs,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn print_json(value: &serde_json::Value) {
    print!("{}", to_json(value));
}

fn read_profile(path: &Path) -> CliResult<(RealField, RealField)> {
    let cols = csv_to_columns(&read_text(path)?, &["x", "u", "v"])?;
    let grid = grid_from_nodes(&cols[0])?;
    Ok((
        RealField::new(grid, cols[1].clone())?,
        RealField::new(grid, cols[2].clone())?,
    ))
}

fn profile_csv(u: &RealField, v: &RealField) -> String {
    columns_to_csv(
        &["x", "u", "v"],
        &[&u.grid().nodes(), u.values(), v.values()],
    )
}

fn linspace(range: &[f64], n: usize, j: usize) -> f64 {
    if n == 1 {
        return range[0];
    }
    range[0] + (range[1] - range[0]) * j as f64 / (n - 1) as f64
}

pub fn classify(a: &ClassifyArgs) -> CliResult<()> {
    if a.sweep {
        return sweep(a);
    }
    let (alpha, cs) = (a.alpha.expect("required"), a.cs.expect("required"));
    let (coeffs, defaults) = a.coeffs.resolve(alpha)?;
    let report = classify_speed(&coeffs, cs)?;
    print_json(&json!({
        "version": VERSION,
        "coefficients": coeffs,
        "defaults_applied": defaults,
        "report": report,
    }));
    Ok(())
}

fn sweep(a: &ClassifyArgs) -> CliResult<()> {
    let n = a.points;
    if n == 0 {
        return Err(invalid("--points must be positive"));
    }
    let (base, _) = a.coeffs.resolve(1.0)?;
    let rows: Vec<String> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let alpha = linspace(&a.alpha_range, n, idx / n);
            let cs = linspace(&a.cs_range, n, idx % n);
            let coeffs = ModelCoefficients { alpha, ..base };
            let r = classify_or_singular(&coeffs, cs)?;
            Ok(format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(alpha),
                fmt_f64(cs),
                fmt_f64(r.mu),
                fmt_f64(r.a),
                fmt_f64(r.b),
                r.label.as_str(),
                r.predicted.as_str()
            ))
        })
        .collect::<CliResult<_>>()?;
    let path = resolve(a.out.as_deref(), "classify_sweep.csv");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let mut text = String::from("alpha,c_s,mu,A,B,label,predicted\n");
    rows.iter().for_each(|r| text.push_str(r));
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    print_json(&json!({ "rows": n * n, "out": path }));
    Ok(())
}

pub fn solve_wave(a: &SolveWaveArgs) -> CliResult<()> {
    let (coeffs, mut defaults) = a.coeffs.resolve(a.alpha)?;
    // reject the singular speed before touching any grid or file
    classify_speed(&coeffs, a.cs)?;
    let (grid, guess) = match &a.guess {
        Some(path) => {
            let (u, v) = read_profile(path)?;
            let g = *u.grid();
            if a.l
                .is_some_and(|l| (l - g.half_length()).abs() > 1e-9 * l.abs().max(1.0))
                || a.n.is_some_and(|n| n != g.len())
            {
                return Err(invalid(
                    "--L/--N disagree with the grid of the --guess file",
                ));
            }
            (g, GuessKind::Custom(u, v))
        }
        None => {
            let l = a.l.unwrap_or_else(|| {
                defaults.push("L=60".into());
                60.0
            });
            let n = a.n.unwrap_or_else(|| {
                defaults.push("N=1024".into());
                1024
            });
            (build_grid(l, n)?, GuessKind::CswNormalForm)
        }
    };
    let opts = SolveOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        extrapolate: a.extrapolate,
        window: a.window,
        method: match a.method {
            MethodArg::Petviashvili => Method::Petviashvili,
            MethodArg::Newton => Method::Newton,
        },
    };
    let p = solve(&coeffs, a.cs, &grid, &guess, &opts)?;
    let dir = resolve(a.out.as_deref(), "solve-wave");
    ensure_dir(&dir)?;
    write_text(&dir, "profile.csv", &profile_csv(&p.u, &p.v))?;
    let mut trace = String::from("n,M,RES\n");
    for i in 0..p.trace.len() {
        let _ = writeln!(
            trace,
            "{},{},{}",
            i + 1,
            fmt_f64(p.trace.m[i]),
            fmt_f64(p.trace.res[i])
        );
    }
    write_text(&dir, "trace.csv", &trace)?;
    let meta = json!({
        "version": VERSION,
        "coefficients": coeffs,
        "c_s": a.cs,
        "guess": a.guess.as_ref().map_or("normal-form".to_string(), |p| p.display().to_string()),
        "options": opts,
        "defaults_applied": defaults,
        "status": p.status,
        "iterations": p.iterations,
        "res": p.res,
        "ripple_amplitude": p.ripple_amplitude,
        "top_third_energy": p.top_third_energy,
        "classified": p.classified,
        "warnings": p.warnings,
        "grid": p.grid,
    });
    write_json(&dir, "wave.json", &meta)?;
    print_json(&json!({
        "status": p.status,
        "iterations": p.iterations,
        "res": p.res,
        "out": dir,
    }));
    Ok(())
}

pub fn oracle(cmd: &OracleCommand) -> CliResult<()> {
    let (dir, u, v, meta) = match cmd {
        OracleCommand::Csw {
            alpha,
            cs,
            b_uv,
            a_vv,
            l,
            n,
            out,
        } => {
            let w = exact_csw_special(*alpha, *cs, *b_uv, *a_vv)?;
            let grid = build_grid(*l, *n)?;
            let (u, v) = w.sample(&grid, 0.0);
            let meta = json!({
                "version": VERSION,
                "kind": "exact-csw",
                "coefficients": w.coeffs,
                "c_s": w.c_s,
                "params": w.params,
                "grid": grid,
            });
            (resolve(out.as_deref(), "oracle-csw"), u, v, meta)
        }
        OracleCommand::Kdv {
            eps,
            c,
            alpha,
            a_uu,
            t,
            l,
            n,
            out,
        } => {
            let s = KdvSoliton::new(*eps, *c, *alpha, *a_uu)?;
            let grid = build_grid(l.unwrap_or(40.0 / eps), *n)?;
            let u = grid.sample(|x| s.value(x, *t));
            let meta = json!({
                "version": VERSION,
                "kind": "kdv-soliton",
                "soliton": s,
                "t": t,
                "amplitude": s.amplitude(),
                "width_factor": s.width_factor(),
                "peak": s.peak(),
                "speed": s.speed(),
                "grid": grid,
            });
            (resolve(out.as_deref(), "oracle-kdv"), u, grid.zeros(), meta)
        }
        OracleCommand::Imbq { p, cs, l, n, out } => {
            let grid = build_grid(*l, *n)?;
            let vals = grid
                .nodes()
                .iter()
                .map(|&x| imbq_soliton(*p, *cs, x))
                .collect::<Result<Vec<_>, _>>()?;
            let u = RealField::new(grid, vals)?;
            let meta = json!({
                "version": VERSION,
                "kind": "imbq-soliton",
                "p": p,
                "c_s": cs,
                "grid": grid,
            });
            (
                resolve(out.as_deref(), "oracle-imbq"),
                u,
                grid.zeros(),
                meta,
            )
        }
    };
    ensure_dir(&dir)?;
    write_text(&dir, "profile.csv", &profile_csv(&u, &v))?;
    write_json(&dir, "params.json", &meta)?;
    print_json(&json!({ "out": dir }));
    Ok(())
}

/// Run description accepted by `evolve`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveFile {
    initial: String,
    #[serde(rename = "T")]
    t_final: f64,
    alpha: Option<f64>,
    a_uu: Option<f64>,
    a_uv: Option<f64>,
    a_vv: Option<f64>,
    b_uu: Option<f64>,
    b_uv: Option<f64>,
    b_vv: Option<f64>,
    #[serde(rename = "L")]
    l: Option<f64>,
    #[serde(rename = "N")]
    n: Option<usize>,
    cs: Option<f64>,
    amp_u: Option<f64>,
    amp_v: Option<f64>,
    width: Option<f64>,
    profile: Option<String>,
    dt: Option<f64>,
    monitor_stride: Option<usize>,
    snapshot_every: Option<usize>,
    beta: Option<f64>,
    t0: Option<f64>,
    dealias: Option<bool>,
}

/// Fully resolved run parameters, recorded in run.json.
#[derive(Debug, Serialize, Deserialize)]
struct RunRecord {
    version: String,
    initial: String,
    coefficients: ModelCoefficients,
    half_length: f64,
    nodes: usize,
    c_s: Option<f64>,
    t_final: f64,
    dt: f64,
    steps: usize,
    monitor_stride: usize,
    snapshot_every: usize,
    beta: f64,
    t0: f64,
    dealias: bool,
    defaults_applied: Vec<String>,
    status: serde_json::Value,
    energy_conserved: bool,
    max_relative_drift: [f64; 2],
    boundary_amplitude: f64,
    blowup_monitor_enabled: bool,
    i_monotone_increasing: bool,
    max_i1_second_difference: Option<f64>,
    snapshots: Vec<SnapshotEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotEntry {
    file: String,
    t: f64,
}

struct Defaults(Vec<String>);

impl Defaults {
    fn take<T: std::fmt::Display + Copy>(&mut self, name: &str, v: Option<T>, d: T) -> T {
        v.unwrap_or_else(|| {
            self.0.push(format!("{name}={d}"));
            d
        })
    }
}

fn no_keys(cfg: &EvolveFile, keys: &[(&str, bool)]) -> CliResult<()> {
    let given: Vec<&str> = keys.iter().filter(|k| k.1).map(|k| k.0).collect();
    if given.is_empty() {
        Ok(())
    } else {
        Err(invalid(format!(
            "initial = {} does not take {}",
            cfg.initial,
            given.join(", ")
        )))
    }
}

fn initial_state(
    cfg: &EvolveFile,
    base: &Path,
    d: &mut Defaults,
) -> CliResult<(ModelCoefficients, EvolutionState)> {
    let plain_coeffs = |d: &mut Defaults| -> CliResult<ModelCoefficients> {
        let alpha = d.take("alpha", cfg.alpha, 1.0);
        let a = [
            d.take("a_uu", cfg.a_uu, 1.0),
            d.take("a_uv", cfg.a_uv, 1.0),
            d.take("a_vv", cfg.a_vv, 1.0),
        ];
        let b = [
            d.take("b_uu", cfg.b_uu, 1.0),
            d.take("b_uv", cfg.b_uv, 1.0),
            d.take("b_vv", cfg.b_vv, 1.0),
        ];
        Ok(ModelCoefficients::new(alpha, a, b).map_err(kgb_core::Error::from)?)
    };
    match cfg.initial.as_str() {
        "exact_csw" => {
            no_keys(
                cfg,
                &[
                    ("a_uu", cfg.a_uu.is_some()),
                    ("a_uv", cfg.a_uv.is_some()),
                    ("b_uu", cfg.b_uu.is_some()),
                    ("b_vv", cfg.b_vv.is_some()),
                    ("amp_u", cfg.amp_u.is_some()),
                    ("amp_v", cfg.amp_v.is_some()),
                    ("width", cfg.width.is_some()),
                    ("profile", cfg.profile.is_some()),
                ],
            )?;
            let need = |name: &str, v: Option<f64>| {
                v.ok_or_else(|| invalid(format!("exact_csw needs {name}")))
            };
            let w = exact_csw_special(
                need("alpha", cfg.alpha)?,
                need("cs", cfg.cs)?,
                need("b_uv", cfg.b_uv)?,
                need("a_vv", cfg.a_vv)?,
            )?;
            let grid = build_grid(d.take("L", cfg.l, 60.0), d.take("N", cfg.n, 1024))?;
            let [u0, u1, v0, v1] = w.initial_data(&grid);
            Ok((w.coeffs, to_first_order(&u0, &u1, &v0, &v1)?))
        }
        "sech" => {
            no_keys(
                cfg,
                &[("cs", cfg.cs.is_some()), ("profile", cfg.profile.is_some())],
            )?;
            let coeffs = plain_coeffs(d)?;
            let grid = build_grid(d.take("L", cfg.l, 30.0), d.take("N", cfg.n, 512))?;
            let (au, av) = (
                d.take("amp_u", cfg.amp_u, 0.0),
                d.take("amp_v", cfg.amp_v, 0.0),
            );
            let k = d.take("width", cfg.width, 1.0);
            let u0 = grid.sample(|x| au / (k * x).cosh().powi(2));
            let v0 = grid.sample(|x| av / (k * x).cosh().powi(2));
            let z = grid.zeros();
            Ok((coeffs, to_first_order(&u0, &z, &v0, &z)?))
        }
        "profile" => {
            no_keys(
                cfg,
                &[
                    ("amp_u", cfg.amp_u.is_some()),
                    ("amp_v", cfg.amp_v.is_some()),
                    ("width", cfg.width.is_some()),
                ],
            )?;
            let rel = cfg
                .profile
                .as_ref()
                .ok_or_else(|| invalid("initial = profile needs profile"))?;
            let cs = cfg
                .cs
                .ok_or_else(|| invalid("initial = profile needs cs"))?;
            let coeffs = plain_coeffs(d)?;
            let (u0, v0) = read_profile(&base.join(rel))?;
            let g = *u0.grid();
            if cfg
                .l
                .is_some_and(|l| (l - g.half_length()).abs() > 1e-9 * l.abs().max(1.0))
                || cfg.n.is_some_and(|n| n != g.len())
            {
                return Err(invalid("L/N disagree with the profile grid"));
            }
            // traveling data: u_t = -c_s u_x
            let u1 = derivative(&u0, 1)?.scaled(-cs);
            let v1 = derivative(&v0, 1)?.scaled(-cs);
            Ok((coeffs, to_first_order(&u0, &u1, &v0, &v1)?))
        }
        other => Err(invalid(format!(
            "unknown initial {other:?}; expected exact_csw, sech or profile"
        ))),
    }
}

fn snapshot_csv(s: &EvolutionState) -> String {
    columns_to_csv(
        &["x", "u", "w", "v", "z"],
        &[
            &s.grid().nodes(),
            s.u.values(),
            s.w.values(),
            s.v.values(),
            s.z.values(),
        ],
    )
}

pub fn evolve(a: &EvolveArgs) -> CliResult<()> {
    let text = read_text(&a.config)?;
    let cfg: EvolveFile = kgb_core::config::from_config_str(&text)?;
    let base = a
        .config
        .parent()
        .map_or_else(PathBuf::new, Path::to_path_buf);
    let mut d = Defaults(Vec::new());
    let (coeffs, s0) = initial_state(&cfg, &base, &mut d)?;
    let grid = *s0.grid();
    let mut ec = EvolveConfig::new(coeffs, cfg.t_final);
    ec.dt = cfg.dt;
    if cfg.dt.is_none() {
        d.0.push("dt=default rule".into());
    }
    ec.monitor_stride = d.take("monitor_stride", cfg.monitor_stride, 100);
    let every = d.take("snapshot_every", cfg.snapshot_every, 10);
    if every == 0 {
        return Err(invalid("snapshot_every must be positive"));
    }
    ec.snapshot_every = Some(every);
    ec.beta = d.take("beta", cfg.beta, 0.0);
    ec.t0 = d.take("t0", cfg.t0, 1.0);
    ec.dealias = d.take("dealias", cfg.dealias, true);

    let dir = resolve(a.out_dir.as_deref(), "evolve");
    ensure_dir(&dir)?;
    let run: EvolutionRun = evolve_with(s0, &ec, |_| {})?;

    let mut snapshots = Vec::new();
    for (i, s) in run.snapshots.iter().enumerate() {
        let file = format!("snapshot_{i:05}.csv");
        write_text(&dir, &file, &snapshot_csv(s))?;
        snapshots.push(SnapshotEntry { file, t: s.t });
    }
    let inv = &run.invariants;
    write_text(
        &dir,
        "invariants.csv",
        &columns_to_csv(
            &["t", "E", "F"],
            &[
                &inv.iter().map(|s| s.t).collect::<Vec<_>>(),
                &inv.iter().map(|s| s.energy).collect::<Vec<_>>(),
                &inv.iter().map(|s| s.momentum).collect::<Vec<_>>(),
            ],
        ),
    )?;
    let bs = &run.blowup.samples;
    write_text(
        &dir,
        "blowup.csv",
        &columns_to_csv(
            &["t", "I", "I1"],
            &[
                &bs.iter().map(|s| s.t).collect::<Vec<_>>(),
                &bs.iter().map(|s| s.i).collect::<Vec<_>>(),
                &bs.iter().map(|s| s.i1).collect::<Vec<_>>(),
            ],
        ),
    )?;
    let (de, df) = run.max_relative_drift();
    let d2 = run.blowup.max_i1_second_difference();
    let record = RunRecord {
        version: VERSION.into(),
        initial: cfg.initial.clone(),
        coefficients: coeffs,
        half_length: grid.half_length(),
        nodes: grid.len(),
        c_s: cfg.cs,
        t_final: cfg.t_final,
        dt: run.dt,
        steps: run.steps,
        monitor_stride: ec.monitor_stride,
        snapshot_every: every,
        beta: ec.beta,
        t0: ec.t0,
        dealias: ec.dealias,
        defaults_applied: d.0,
        status: serde_json::to_value(&run.status).expect("serializable"),
        energy_conserved: run.energy_conserved,
        max_relative_drift: [de, df],
        boundary_amplitude: run.boundary_amplitude,
        blowup_monitor_enabled: run.blowup.enabled,
        i_monotone_increasing: run.blowup.i_monotone_increasing(),
        max_i1_second_difference: d2.is_finite().then_some(d2),
        snapshots,
    };
    write_json(&dir, "run.json", &record)?;
    print_json(&json!({
        "status": record.status,
        "steps": run.steps,
        "max_relative_drift": {"E": de, "F": df},
        "out": dir,
    }));
    Ok(())
}

fn read_snapshot(path: &Path, t: f64) -> CliResult<EvolutionState> {
    let cols = csv_to_columns(&read_text(path)?, &["x", "u", "w", "v", "z"])?;
    let grid: PeriodicGrid = grid_from_nodes(&cols[0])?;
    let field = |i: usize| -> CliResult<RealField> {
        if cols[i].iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("{}: non-finite value", path.display())));
        }
        Ok(RealField::new(grid, cols[i].clone())?)
    };
    Ok(EvolutionState::new(
        field(1)?,
        field(2)?,
        field(3)?,
        field(4)?,
        t,
    )?)
}

pub fn check_invariants(a: &CheckArgs) -> CliResult<()> {
    if a.budget.is_nan() || a.budget <= 0.0 {
        return Err(invalid("--budget must be positive"));
    }
    let meta_path = a.run_dir.join("run.json");
    let rec: RunRecord = serde_json::from_str(&read_text(&meta_path)?)
        .map_err(|e| invalid(format!("{}: {e}", meta_path.display())))?;
    if rec.snapshots.len() < 2 {
        return Err(invalid("need at least two snapshots"));
    }
    let c = rec.coefficients;
    let ham = hamiltonian_structure(&c);
    let conserved = ham.is_ok();
    let h = ham.unwrap_or_else(|_| candidate_structure(&c));
    let mut rows = Vec::new();
    for s in &rec.snapshots {
        let state = read_snapshot(&a.run_dir.join(&s.file), s.t)?;
        rows.push((s.t, energy(&c, &h, &state), momentum(&state)));
    }
    let (e0, f0) = (rows[0].1, rows[0].2);
    let (es, fs) = (e0.abs().max(1.0), f0.abs().max(1.0));
    let de = rows
        .iter()
        .fold(0.0f64, |m, r| m.max((r.1 - e0).abs() / es));
    let df = rows
        .iter()
        .fold(0.0f64, |m, r| m.max((r.2 - f0).abs() / fs));
    let mut notes = Vec::new();
    let verdict = if conserved {
        if de < a.budget && df < a.budget {
            "pass"
        } else {
            "fail"
        }
    } else {
        notes.push("E not guaranteed conserved; drift reported, not judged".to_string());
        notes.push("F not guaranteed conserved; drift reported, not judged".to_string());
        "not judged"
    };
    print_json(&json!({
        "run_dir": a.run_dir,
        "snapshots": rows.len(),
        "energy_conserved": conserved,
        "E0": e0,
        "F0": f0,
        "E_drift": de,
        "F_drift": df,
        "budget": a.budget,
        "verdict": verdict,
        "notes": notes,
    }));
    if verdict == "fail" {
        return Err(CliError::CheckFailed(format!(
            "drift above budget {}: E {de:.3e}, F {df:.3e}",
            a.budget
        )));
    }
    Ok(())
}

pub fn kdv_error(a: &KdvErrorArgs) -> CliResult<()> {
    let mut eps = a.eps_list.clone();
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(invalid("epsilons must be positive"));
    }
    eps.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("duplicate epsilon"));
    }
    let (coeffs, defaults) = a.coeffs.resolve(a.alpha)?;
    let runs: Vec<KdvRun> = eps
        .par_iter()
        .map(|&e| {
            let cfg = KdvRunConfig {
                eps: e,
                c: a.c,
                coeffs,
                t_final: a.t_final,
                dt: a.dt,
                spacing: a.spacing,
                sample_stride: a.sample_stride,
            };
            run_kdv(&cfg)
        })
        .collect::<Result<_, _>>()?;
    let table = KdvErrorTable::from_runs(&runs)?;
    let dir = resolve(a.out.as_deref(), "kdv-error");
    ensure_dir(&dir)?;
    let r = &table.rows;
    let col = |f: fn(&kgb_core::kdv::KdvErrorRow) -> f64| r.iter().map(f).collect::<Vec<_>>();
    write_text(
        &dir,
        "errors.csv",
        &columns_to_csv(
            &["epsilon", "t", "err_u", "err_v"],
            &[
                &col(|x| x.epsilon),
                &col(|x| x.t),
                &col(|x| x.err_u),
                &col(|x| x.err_v),
            ],
        ),
    )?;
    write_text(
        &dir,
        "semilog.csv",
        &columns_to_csv(
            &["epsilon", "t", "log10_err"],
            &[
                &col(|x| x.epsilon),
                &col(|x| x.t),
                &col(|x| x.err().log10()),
            ],
        ),
    )?;
    let fit = table
        .fit
        .ok_or_else(|| invalid("fit needs at least two epsilons with positive error"))?;
    let per_eps: Vec<_> = runs
        .iter()
        .map(|run| {
            let b = bounded_in_time(&run.rows);
            json!({
                "epsilon": run.eps,
                "L": run.grid.half_length(),
                "N": run.grid.len(),
                "dt": run.dt,
                "status": run.status,
                "max_err": run.rows.iter().fold(0.0f64, |m, x| m.max(x.err())),
                "boundedness": b,
            })
        })
        .collect();
    let summary = json!({
        "version": VERSION,
        "slope": fit.slope,
        "r2": fit.r2,
        "intercept": fit.intercept,
        "slope_ci95": fit.slope_ci,
        "l2_fit": table.fit_l2,
        "runs": per_eps,
        "parameters": {
            "eps_list": eps,
            "T": a.t_final,
            "c": a.c,
            "dt": a.dt,
            "spacing": a.spacing,
            "sample_stride": a.sample_stride,
            "coefficients": coeffs,
            "defaults_applied": defaults,
        },
    });
    write_json(&dir, "fit.json", &summary)?;
    print_json(&json!({ "slope": fit.slope, "r2": fit.r2, "out": dir }));
    Ok(())
}
