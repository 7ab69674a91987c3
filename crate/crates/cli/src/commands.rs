use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mcf_core::ambient::tcc_estimate;
use mcf_core::flow::run;
use mcf_core::linalg::{check_onm, onm_normal_form, reconstruct, NormalForm, PseudoOrthogonalMatrix, Signature, ONM_TOL};
use mcf_core::radial::{radial_run, RadialProfile};
use mcf_core::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Process exit code for an error category.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Dimension(_) | Error::OutsideDomain { .. } => 2,
        Error::Halted { .. } => 3,
        Error::Invariant(_)
        | Error::NotPseudoOrthogonal { .. }
        | Error::NotSpacelike { .. }
        | Error::DegenerateNormal { .. } => 4,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// What a subcommand produced; `halt` turns into exit code 3 after all
/// outputs are written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub out_dir: Option<PathBuf>,
    pub files: Vec<String>,
    pub summary: Value,
    pub halt: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    args: &'a [String],
    version: &'a str,
    seed: u64,
    threads: usize,
    elapsed_seconds: f64,
    status: String,
    outputs: &'a [String],
    summary: &'a Value,
    config: &'a RunConfig,
}

/// Writes `manifest.json` (configuration echo, versions, timing) and the
/// configuration as `config.toml` next to the outputs.
pub fn write_manifest(
    command: &str,
    args: &[String],
    cfg: &RunConfig,
    outcome: &mut Outcome,
    started: Instant,
) -> Result<()> {
    let Some(dir) = outcome.out_dir.clone() else {
        return Ok(());
    };
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    outcome.files.push("config.toml".into());
    let manifest = Manifest {
        command,
        args,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        status: outcome.halt.clone().unwrap_or_else(|| "ok".into()),
        outputs: &outcome.files,
        summary: &outcome.summary,
        config: cfg,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invariant(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn prepare_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn flow(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let patch = cfg.build_patch()?;
    let traj = run(&cfg.flow, patch)?;
    let dir = prepare_dir(cfg)?;
    let mut files = vec!["monitor.csv".to_string()];
    traj.write_monitor_csv(std::io::BufWriter::new(fs::File::create(dir.join("monitor.csv"))?))?;
    if cfg.flow.snapshot_every > 0 {
        files.extend(traj.write_snapshots(&dir)?.iter().map(|p| file_name(p)));
    }
    let shape = traj.bound_shape();
    fs::write(
        dir.join("bound_shape.json"),
        serde_json::to_string_pretty(&shape).map_err(|e| Error::Invariant(e.to_string()))? + "\n",
    )?;
    files.push("bound_shape.json".into());
    let last = traj.rows.last();
    Ok(Outcome {
        out_dir: Some(dir),
        files,
        summary: json!({
            "ambient": traj.last.patch.ambient.name(),
            "steps": traj.steps,
            "s": traj.s,
            "rejections": traj.rejections,
            "final_sup_v": last.and_then(|r| r.sup_v),
            "final_sup_H2": last.and_then(|r| r.sup_h2),
            "min_H2": traj.min_h2,
            "min_A2": traj.min_a2,
            "bound_fit_H2": shape.h2.c,
            "bound_fit_A2": shape.a2.c,
        }),
        halt: traj.halt,
    })
}

fn write_profile(path: &Path, p: &RadialProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["R", "H"])?;
    for (r, h) in p.r.iter().zip(&p.h) {
        w.write_record([r.to_string(), h.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn radial(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let rc = &cfg.radial;
    let initial = rc.initial_profile()?;
    let reference = rc.reference();
    let dir = prepare_dir(cfg)?;
    write_profile(&dir.join("profile_initial.csv"), &initial)?;
    let mut files = vec!["profile_initial.csv".to_string()];
    let result = radial_run(initial, rc.steps, rc.dt, rc.c_cfl, &reference);
    let traj = match result {
        Ok(t) => t,
        Err(e @ Error::Halted { .. }) => {
            return Ok(Outcome {
                out_dir: Some(dir),
                files,
                summary: json!({}),
                halt: Some(e.to_string()),
            })
        }
        Err(e) => return Err(e),
    };
    let last = traj.profiles.last().expect("nonempty");
    write_profile(&dir.join("profile_final.csv"), last)?;
    files.push("profile_final.csv".into());
    let mut w = csv::Writer::from_path(dir.join("radial_monitor.csv"))?;
    w.write_record(["step", "t", "dt", "sup_dev", "min_H", "min_H_prime"])?;
    for r in &traj.monitor {
        w.write_record([
            r.step.to_string(),
            r.t.to_string(),
            r.dt.to_string(),
            r.sup_dev.to_string(),
            r.min_h.to_string(),
            r.min_h_prime.to_string(),
        ])?;
    }
    w.flush()?;
    files.push("radial_monitor.csv".into());
    let final_row = traj.monitor.last().expect("nonempty");
    Ok(Outcome {
        out_dir: Some(dir),
        files,
        summary: json!({
            "steps": rc.steps,
            "t": final_row.t,
            "initial_sup_dev": traj.monitor[0].sup_dev,
            "final_sup_dev": final_row.sup_dev,
        }),
        halt: None,
    })
}

pub fn tcc(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let ambient = cfg.build_ambient()?;
    let region = cfg.tcc_region()?;
    let est = tcc_estimate(ambient.as_ref(), &region, cfg.tcc.samples, cfg.tcc.max_rapidity, cfg.seed)?;
    let vec = |v: &DVector<f64>| v.iter().copied().collect::<Vec<_>>();
    let summary = json!({
        "ambient": ambient.name(),
        "k_est": est.k_est,
        "n_samples": est.n_samples,
        "max_rapidity": cfg.tcc.max_rapidity,
        "witness": {
            "point": vec(&est.witness.point),
            "plane": est.witness.plane.iter().map(vec).collect::<Vec<_>>(),
            "x": vec(&est.witness.x),
            "ratio": est.witness.ratio,
        },
    });
    let dir = prepare_dir(cfg)?;
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Invariant(e.to_string()))?;
    fs::write(dir.join("tcc.json"), text.clone() + "\n")?;
    println!("{text}");
    Ok(Outcome {
        out_dir: Some(dir),
        files: vec!["tcc.json".into()],
        summary,
        halt: None,
    })
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad entry {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let k = rows.len();
    if k < 2 || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Config(format!("{} must hold a square matrix of size >= 2", path.display())));
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

/// Signature for a decomposition: as given, or the split `(n, k - n)` with
/// the largest `n` under which the matrix is pseudo-orthogonal.
pub fn infer_signature(full: &DMatrix<f64>, n: Option<usize>, m: Option<usize>) -> Result<Signature> {
    let k = full.nrows();
    match (n, m) {
        (Some(n), Some(m)) => Signature::new(n, m),
        (Some(n), None) if n < k => Signature::new(n, k - n),
        (None, Some(m)) if m < k => Signature::new(k - m, m),
        (None, None) => (1..k)
            .rev()
            .map(|n| Signature::new(n, k - n))
            .find(|s| {
                s.as_ref()
                    .ok()
                    .and_then(|s| PseudoOrthogonalMatrix::from_assembled(*s, full).ok())
                    .is_some_and(|mat| check_onm(&mat, ONM_TOL))
            })
            .unwrap_or(Err(Error::NotPseudoOrthogonal {
                n: k,
                m: 0,
                deviation: f64::INFINITY,
                tol: ONM_TOL,
            })),
        _ => Err(Error::Config(format!("signature does not fit a {k}x{k} matrix"))),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn normal_form_json(nf: &NormalForm, mat: &PseudoOrthogonalMatrix) -> Value {
    let v = |d: &DVector<f64>| d.iter().copied().collect::<Vec<_>>();
    json!({
        "signature": [nf.sig.n, nf.sig.m],
        "r_tan": rows(&nf.r_tan),
        "r_nor": rows(&nf.r_nor),
        "s_tan": rows(&nf.s_tan),
        "s_nor": rows(&nf.s_nor),
        "d1": v(&nf.d1),
        "d2": v(&nf.d2),
        "d3": v(&nf.d3),
        "d4": v(&nf.d4),
        "a_block": rows(&nf.a_block),
        "sign_choices": nf.sign_choices,
        "mirrored": nf.mirrored,
        "round_trip_error": reconstruct(nf).max_abs_diff(mat),
        "pythagorean_defect": nf.pythagorean_defect(),
        "trace_defect": nf.trace_defect(),
    })
}

pub fn decompose<W: Write>(input: &Path, n: Option<usize>, m: Option<usize>, out: &mut W) -> Result<Value> {
    let full = read_matrix(input)?;
    let sig = infer_signature(&full, n, m)?;
    let mat = PseudoOrthogonalMatrix::from_assembled(sig, &full)?;
    let nf = onm_normal_form(&mat)?;
    let value = normal_form_json(&nf, &mat);
    let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Invariant(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(value)
}
