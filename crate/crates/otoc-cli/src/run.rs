//! Subcommand implementations: load → validate → compute → emit.
//!
//! Failures carry their phase so the process can exit with a code that
//! distinguishes them: a [`Failure::Validation`] means the run never
//! started (bad config, bad input file, violated precondition) and a
//! [`Failure::Compute`] means it started and broke (non-finite numbers
//! mid-evolution, degenerate fit data, an unwritable output path). A fit
//! that runs to completion without converging is not a failure — the best
//! parameters are still written — but it is reported through
//! [`Outcome::FitNotConverged`] so scripts can tell.
//!
//! Determinism: given the same config (and therefore the same seed), every
//! data row of every artifact is identical between runs; only the header's
//! timestamp and wall-clock lines vary. The fit seed is the only source of
//! randomness anywhere, and it is stamped into the artifacts it affected.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use otoc::oracles::ed::{ED_ENTANGLEMENT_LIMIT, ED_OTOC_LIMIT};
use otoc::{
    build_trotter_plan, collapse, dense_commutator_norm_sq, evolve, fit_competitor_seeded,
    fit_xs_form_seeded, free_fermion_otoc, local_pauli_mpo, read_snapshot, renyi_bound_check,
    write_snapshot, EdEvolution, EntanglementProfile, EntanglementRecorder, EvolutionSample,
    FitResult, FitWindow, FreeFermionSpec, HamiltonianSpec, MatrixProductOperator, OtocGrid,
    OtocRecorder, Pauli, RenyiBoundReport, WindowConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::emit::{self, Meta, TOOL_NAME};

/// Why a run produced no (complete) artifact.
#[derive(Debug)]
pub enum Failure {
    /// The run never started: config or input-file problem, or a violated
    /// precondition. Exit code 2.
    Validation(String),
    /// The run started and broke, or an artifact could not be written.
    /// Exit code 3.
    Compute(String),
}

/// How a completed run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Everything requested was produced. Exit code 0.
    Done,
    /// The fit hit its iteration cap before its vertices collapsed; the
    /// best parameters found were still written. Exit code 4.
    FitNotConverged,
}

fn validation_err(e: otoc::Error) -> Failure {
    Failure::Validation(e.to_string())
}

fn compute_err(e: otoc::Error) -> Failure {
    Failure::Compute(e.to_string())
}

/// Sidecar written next to every checkpoint, identifying the trajectory
/// the binary state belongs to and how far it got.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointSidecar {
    pub format_version: u32,
    pub tool: String,
    /// Digest over the trajectory-shaping config fields; resuming under a
    /// config with a different digest is refused.
    pub trajectory_sha256: String,
    /// Steps taken since t = 0, across all runs that led here.
    pub steps_completed: usize,
    pub dt: f64,
    /// `steps_completed * dt`, for human readers.
    pub time_reached: f64,
    pub generated_unix_seconds: u64,
}

/// Version written by this binary; anything else is refused on resume.
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// The sidecar lives next to the binary state with `.json` appended.
pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

// ---- shared evolution driver --------------------------------------------

struct EvolutionOutputs {
    grid: Option<OtocGrid>,
    profile: Option<EntanglementProfile>,
    final_state: MatrixProductOperator,
    /// Steps from t = 0 through the end of this run, counting any
    /// checkpointed prefix.
    steps_completed: usize,
    dt: f64,
}

/// Validates every field an evolution needs, then runs it, recording an
/// OTOC grid and/or an entanglement profile. Honors `resume_from`.
fn evolve_trajectory(
    config: &RunConfig,
    want_otoc: bool,
    want_entanglement: bool,
) -> Result<EvolutionOutputs, Failure> {
    let spec = config.model()?;
    let chi = config.chi()?;
    let dt = config.dt()?;
    let t_max = config.t_max()?;
    let stride = config.record_stride()?;
    let eps_rel = config.eps_rel()?;
    let base_site = config.base_site()?;
    let plan = build_trotter_plan(spec, dt, config.trotter_order()?).map_err(validation_err)?;
    check_site(spec, "base_site", base_site)?;

    let mut otoc_recorder = if want_otoc {
        let probes = config.probe_sites()?;
        for &site in probes {
            check_site(spec, "probe_sites", site)?;
        }
        Some(
            OtocRecorder::new(base_site, probes.to_vec(), config.probe_pauli())
                .map_err(validation_err)?,
        )
    } else {
        None
    };
    let mut entanglement_recorder = if want_entanglement {
        let cuts = config.cuts()?;
        for &cut in cuts {
            check_cut(spec, cut)?;
        }
        Some(EntanglementRecorder::new(cuts.to_vec()).map_err(validation_err)?)
    } else {
        None
    };

    let (w0, prior_steps) = match &config.resume_from {
        Some(path) => load_checkpoint(config, path)?,
        None => (
            local_pauli_mpo(spec.l, base_site, Pauli::X).map_err(validation_err)?,
            0,
        ),
    };
    let t_offset = prior_steps as f64 * dt;
    if t_offset > t_max + 1e-9 * dt {
        return Err(Failure::Validation(format!(
            "checkpoint has already reached t = {t_offset}, beyond t_max = {t_max}"
        )));
    }
    let t_remaining = (t_max - t_offset).max(0.0);

    let record = evolve(&w0, &plan, t_remaining, chi, eps_rel, stride, |sample| {
        // Re-stamp the sample onto the absolute clock so a resumed run
        // records the same times an uninterrupted one would.
        let absolute = EvolutionSample {
            step: prior_steps + sample.step,
            time: (prior_steps + sample.step) as f64 * dt,
            mpo: sample.mpo,
            norm: sample.norm,
            step_max_discarded: sample.step_max_discarded,
        };
        if let Some(recorder) = otoc_recorder.as_mut() {
            recorder.record(&absolute)?;
        }
        if let Some(recorder) = entanglement_recorder.as_mut() {
            recorder.record(&absolute)?;
        }
        Ok(())
    })
    .map_err(compute_err)?;

    Ok(EvolutionOutputs {
        grid: otoc_recorder.map(OtocRecorder::into_grid),
        profile: entanglement_recorder.map(EntanglementRecorder::into_profile),
        final_state: record.final_state,
        steps_completed: prior_steps + record.total_steps,
        dt,
    })
}

fn check_site(spec: &HamiltonianSpec, field: &str, site: usize) -> Result<(), Failure> {
    if site == 0 || site > spec.l {
        return Err(Failure::Validation(format!(
            "{field}: site {site} is outside the chain 1..={}",
            spec.l
        )));
    }
    Ok(())
}

fn check_cut(spec: &HamiltonianSpec, cut: usize) -> Result<(), Failure> {
    if cut == 0 || cut >= spec.l {
        return Err(Failure::Validation(format!(
            "cut {cut} is not interior to the chain (1..={})",
            spec.l - 1
        )));
    }
    Ok(())
}

fn load_checkpoint(
    config: &RunConfig,
    path: &Path,
) -> Result<(MatrixProductOperator, usize), Failure> {
    let sidecar_file = sidecar_path(path);
    let text = fs::read_to_string(&sidecar_file).map_err(|e| {
        Failure::Validation(format!(
            "cannot read checkpoint sidecar {}: {e}",
            sidecar_file.display()
        ))
    })?;
    let sidecar: CheckpointSidecar = serde_json::from_str(&text).map_err(|e| {
        Failure::Validation(format!(
            "invalid checkpoint sidecar {}: {e}",
            sidecar_file.display()
        ))
    })?;
    if sidecar.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Failure::Validation(format!(
            "checkpoint format version {} is not supported (expected {})",
            sidecar.format_version, CHECKPOINT_FORMAT_VERSION
        )));
    }
    if sidecar.trajectory_sha256 != config.trajectory_hash() {
        return Err(Failure::Validation(
            "checkpoint belongs to a different trajectory (model, chi, dt, trotter_order, \
             eps_rel, or base_site differ from this config)"
                .to_string(),
        ));
    }
    let state = read_snapshot(path).map_err(|e| {
        Failure::Validation(format!("cannot read checkpoint {}: {e}", path.display()))
    })?;
    Ok((state, sidecar.steps_completed))
}

fn write_checkpoint(
    path: &Path,
    state: &MatrixProductOperator,
    steps_completed: usize,
    dt: f64,
    trajectory_sha256: &str,
) -> Result<(), Failure> {
    write_snapshot(state, path).map_err(|e| {
        Failure::Compute(format!("cannot write checkpoint {}: {e}", path.display()))
    })?;
    let sidecar = CheckpointSidecar {
        format_version: CHECKPOINT_FORMAT_VERSION,
        tool: format!("{TOOL_NAME} {}", emit::tool_version()),
        trajectory_sha256: trajectory_sha256.to_string(),
        steps_completed,
        dt,
        time_reached: steps_completed as f64 * dt,
        generated_unix_seconds: emit::unix_seconds(),
    };
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Failure::Compute(format!("cannot serialize checkpoint sidecar: {e}")))?;
    let sidecar_file = sidecar_path(path);
    fs::write(&sidecar_file, format!("{text}\n")).map_err(|e| {
        Failure::Compute(format!(
            "cannot write checkpoint sidecar {}: {e}",
            sidecar_file.display()
        ))
    })
}

fn meta<'a>(command: &'a str, hash: &'a str, seed: Option<u64>, started: Instant) -> Meta<'a> {
    Meta {
        command,
        config_sha256: hash,
        seed,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    }
}

// ---- evolution commands --------------------------------------------------

/// `evolve`: the superset command. Records an OTOC grid when
/// `probe_sites`/`output` are given, an entanglement profile when
/// `cuts`/`entanglement_output` are given, and a checkpoint when
/// `checkpoint_out` is given — any combination, but at least one.
pub fn cmd_evolve(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let want_otoc = config.probe_sites.is_some() || config.output.is_some();
    if want_otoc && (config.probe_sites.is_none() || config.output.is_none()) {
        return Err(Failure::Validation(
            "probe_sites and output must be given together".to_string(),
        ));
    }
    let want_entanglement = config.cuts.is_some() || config.entanglement_output.is_some();
    if want_entanglement && (config.cuts.is_none() || config.entanglement_output.is_none()) {
        return Err(Failure::Validation(
            "cuts and entanglement_output must be given together".to_string(),
        ));
    }
    if !want_otoc && !want_entanglement && config.checkpoint_out.is_none() {
        return Err(Failure::Validation(
            "evolve has nothing to do: give probe_sites+output, cuts+entanglement_output, \
             or checkpoint_out"
                .to_string(),
        ));
    }

    let outputs = evolve_trajectory(config, want_otoc, want_entanglement)?;
    let hash = config.physics_hash();
    if let Some(grid) = &outputs.grid {
        let path = config.output()?;
        emit::write_otoc_csv(path, grid, &meta("evolve", &hash, None, started))?;
        println!("wrote {}", path.display());
    }
    if let Some(profile) = &outputs.profile {
        let path = config
            .entanglement_output
            .as_deref()
            .expect("checked above");
        emit::write_entanglement_csv(path, profile, &meta("evolve", &hash, None, started))?;
        println!("wrote {}", path.display());
    }
    finish_checkpoint(config, &outputs)?;
    Ok(Outcome::Done)
}

/// `otoc`: record the squared-commutator grid `C(x, t)` to `output`.
pub fn cmd_otoc(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let path = config.output()?;
    let outputs = evolve_trajectory(config, true, false)?;
    let grid = outputs.grid.as_ref().expect("otoc records a grid");
    let hash = config.physics_hash();
    emit::write_otoc_csv(path, grid, &meta("otoc", &hash, None, started))?;
    println!("wrote {}", path.display());
    finish_checkpoint(config, &outputs)?;
    Ok(Outcome::Done)
}

/// `entanglement`: record the operator-entanglement profile to `output`.
pub fn cmd_entanglement(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let path = config.output()?;
    let outputs = evolve_trajectory(config, false, true)?;
    let profile = outputs.profile.as_ref().expect("entanglement records a profile");
    let hash = config.physics_hash();
    emit::write_entanglement_csv(path, profile, &meta("entanglement", &hash, None, started))?;
    println!("wrote {}", path.display());
    finish_checkpoint(config, &outputs)?;
    Ok(Outcome::Done)
}

fn finish_checkpoint(config: &RunConfig, outputs: &EvolutionOutputs) -> Result<(), Failure> {
    if let Some(path) = &config.checkpoint_out {
        write_checkpoint(
            path,
            &outputs.final_state,
            outputs.steps_completed,
            outputs.dt,
            &config.trajectory_hash(),
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---- grid oracles ----------------------------------------------------------

/// `ceil(t_max/dt)` with the same absolute guard as the gate scheduler,
/// so oracle grids land on exactly the times an evolution records.
fn steps_for(dt: f64, t_max: f64) -> usize {
    let ratio = t_max / dt;
    let rounded = ratio.round();
    let steps = if (ratio - rounded).abs() < 1e-9 {
        rounded
    } else {
        ratio.ceil()
    };
    steps as usize
}

/// Mirrors the evolution loop's recording rule on a synthetic clock:
/// step 0, every `stride`-th step, and the final step, at `step * dt`.
fn recorded_times(dt: f64, t_max: f64, stride: usize) -> Vec<f64> {
    let steps = steps_for(dt, t_max);
    let mut times = vec![0.0];
    for step in 1..=steps {
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
        }
    }
    times
}

/// `oracle-ed`: the same `t,x,C,norm` grid as `otoc`, computed by exact
/// diagonalization (norm is exactly 1 by unitarity).
pub fn cmd_oracle_ed(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let spec = config.model()?;
    let dt = config.dt()?;
    let t_max = config.t_max()?;
    let stride = config.record_stride()?;
    let base_site = config.base_site()?;
    let probes = config.probe_sites()?;
    let pauli = config.probe_pauli();
    let path = config.output()?;
    if spec.l > ED_OTOC_LIMIT {
        return Err(Failure::Validation(format!(
            "oracle-ed needs L <= {ED_OTOC_LIMIT}, got {}",
            spec.l
        )));
    }
    check_site(spec, "base_site", base_site)?;
    for &site in probes {
        check_site(spec, "probe_sites", site)?;
    }
    let ed = EdEvolution::new(spec, base_site).map_err(validation_err)?;

    let times = recorded_times(dt, t_max, stride);
    let mut values = vec![Vec::with_capacity(times.len()); probes.len()];
    for &t in &times {
        let w = ed.operator_at(t).map_err(compute_err)?;
        for (p, &site) in probes.iter().enumerate() {
            let c = dense_commutator_norm_sq(&w, spec.l, site, pauli).map_err(compute_err)?;
            values[p].push(c);
        }
    }
    let norms = vec![1.0; times.len()];
    let grid = OtocGrid {
        base_site,
        probe_sites: probes.to_vec(),
        probe_pauli: pauli,
        times,
        values,
        norms,
    };
    let hash = config.physics_hash();
    emit::write_otoc_csv(path, &grid, &meta("oracle-ed", &hash, None, started))?;
    println!("wrote {}", path.display());
    Ok(Outcome::Done)
}

/// `oracle-free`: the same grid from the free-fermion closed form.
/// `clock_factor` multiplies each time before it enters the closed form,
/// converting the chain clock to the analytic clock; rows are stamped
/// with the chain-clock time.
pub fn cmd_oracle_free(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let g = config.g()?;
    let dt = config.dt()?;
    let t_max = config.t_max()?;
    let stride = config.record_stride()?;
    let base_site = config.base_site()?;
    let probes = config.probe_sites()?;
    let clock_factor = config.clock_factor()?;
    let path = config.output()?;
    let spec = match config.quadrature_points {
        Some(points) => FreeFermionSpec::with_points(g, points),
        None => FreeFermionSpec::new(g),
    }
    .map_err(validation_err)?;

    let times = recorded_times(dt, t_max, stride);
    let mut values = vec![Vec::with_capacity(times.len()); probes.len()];
    for &t in &times {
        for (p, &site) in probes.iter().enumerate() {
            let x = site as i64 - base_site as i64;
            let c = free_fermion_otoc(&spec, x, clock_factor * t).map_err(compute_err)?;
            values[p].push(c);
        }
    }
    let norms = vec![1.0; times.len()];
    let grid = OtocGrid {
        base_site,
        probe_sites: probes.to_vec(),
        probe_pauli: config.probe_pauli(),
        times,
        values,
        norms,
    };
    let hash = config.physics_hash();
    emit::write_otoc_csv(path, &grid, &meta("oracle-free", &hash, None, started))?;
    println!("wrote {}", path.display());
    Ok(Outcome::Done)
}

/// `bound-check`: evaluate the entanglement/commutator bound densely at
/// every `(t, cut)` point of the grid.
pub fn cmd_bound_check(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let spec = config.model()?;
    let dt = config.dt()?;
    let t_max = config.t_max()?;
    let stride = config.record_stride()?;
    let base_site = config.base_site()?;
    let cuts = config.cuts()?;
    let path = config.output()?;
    if spec.l > ED_ENTANGLEMENT_LIMIT {
        return Err(Failure::Validation(format!(
            "bound-check needs L <= {ED_ENTANGLEMENT_LIMIT}, got {}",
            spec.l
        )));
    }
    spec.validate().map_err(validation_err)?;
    check_site(spec, "base_site", base_site)?;
    for &cut in cuts {
        check_cut(spec, cut)?;
    }

    let times = recorded_times(dt, t_max, stride);
    let mut reports: Vec<Vec<RenyiBoundReport>> = Vec::with_capacity(times.len());
    for &t in &times {
        let mut at_t = Vec::with_capacity(cuts.len());
        for &cut in cuts {
            at_t.push(renyi_bound_check(spec, base_site, cut, t).map_err(compute_err)?);
        }
        reports.push(at_t);
    }
    let hash = config.physics_hash();
    emit::write_bound_csv(
        path,
        &times,
        cuts,
        &reports,
        &meta("bound-check", &hash, None, started),
    )?;
    println!("wrote {}", path.display());
    Ok(Outcome::Done)
}

// ---- fit commands ----------------------------------------------------------

/// Shared front half of `fit` and `collapse`: read the data CSV, cut the
/// early-growth window, fit the wavefront form.
fn windowed_fit(
    config: &RunConfig,
    window_config: WindowConfig,
) -> Result<(FitWindow, FitResult), Failure> {
    let data = config.data()?;
    let rows = emit::read_numeric_csv(data)?;
    if rows.is_empty() {
        return Err(Failure::Validation(format!(
            "{}: no data rows",
            data.display()
        )));
    }
    if rows[0].len() < 3 {
        return Err(Failure::Validation(format!(
            "{}: need at least 3 columns (t,x,C), found {}",
            data.display(),
            rows[0].len()
        )));
    }
    let triples: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[1], r[0], r[2])).collect();
    let window = FitWindow::from_points(window_config, &triples).map_err(validation_err)?;
    let fit =
        fit_xs_form_seeded(&window, &config.guess(), config.seed()).map_err(validation_err)?;
    Ok((window, fit))
}

/// `fit`: fit the wavefront form (and any requested competitors) to a
/// `t,x,C` data set and write a JSON report.
pub fn cmd_fit(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let path = config.output()?;
    let window_config = config.window();
    let (window, fit) = windowed_fit(config, window_config)?;
    let mut competitors = Vec::new();
    for &model in config.competitors() {
        competitors.push(fit_competitor_seeded(&window, model, config.seed()).map_err(compute_err)?);
    }
    let hash = config.physics_hash();
    emit::write_fit_json(
        path,
        window_config,
        &fit,
        &competitors,
        &meta("fit", &hash, Some(config.seed()), started),
    )?;
    println!("wrote {}", path.display());
    Ok(if fit.converged {
        Outcome::Done
    } else {
        Outcome::FitNotConverged
    })
}

/// `collapse`: rescale the windowed points onto the universal front
/// coordinate implied by their own wavefront fit, writing `x,t,u,log_C`
/// rows (and optionally the fit report).
pub fn cmd_collapse(config: &RunConfig) -> Result<Outcome, Failure> {
    let started = Instant::now();
    let path = config.output()?;
    let window_config = config.window();
    let (window, fit) = windowed_fit(config, window_config)?;
    let points = collapse(&window, &fit).map_err(compute_err)?;
    let rows: Vec<(f64, f64, f64, f64)> = window
        .points
        .iter()
        .zip(&points)
        .map(|(w, c)| (w.x, w.t, c.u, c.log_c))
        .collect();
    let hash = config.physics_hash();
    emit::write_collapse_csv(
        path,
        &rows,
        &meta("collapse", &hash, Some(config.seed()), started),
    )?;
    println!("wrote {}", path.display());
    if let Some(fit_path) = &config.fit_output {
        emit::write_fit_json(
            fit_path,
            window_config,
            &fit,
            &[],
            &meta("collapse", &hash, Some(config.seed()), started),
        )?;
        println!("wrote {}", fit_path.display());
    }
    Ok(if fit.converged {
        Outcome::Done
    } else {
        Outcome::FitNotConverged
    })
}
