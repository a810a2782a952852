//! Release gates for the operator-spreading simulator: nine criteria,
//! one test per criterion, every tolerance pinned in code. Each test
//! prints exactly one `criterion N PASS/FAIL: ...` line (visible with
//! `--nocapture`, or automatically on failure) carrying the measured
//! values next to their gates, then asserts the verdict.
//!
//! The expensive desk-scale grids (101 sites, 600 steps) are computed
//! once in a shared static and reused by every criterion that needs
//! them. On one CPU the whole suite runs in roughly twenty minutes,
//! dominated by the exact-diagonalization sweep of criterion 1 and the
//! fine-step transverse-field runs of criterion 3.

use std::sync::LazyLock;
use std::time::Instant;

use otoc::{
    analytic_clock_factor, bessel_j, bessel_j_prime, build_trotter_plan, dense_commutator_norm_sq,
    evolve, extract_window, fit_xs_form, free_fermion_amplitudes, free_fermion_otoc,
    local_pauli_mpo, mpo_to_dense, perturbative_form, read_snapshot, renyi_bound_check,
    upper_envelope, write_snapshot, Boundary, EdEvolution, EntanglementProfile,
    EntanglementRecorder, FitParams, FitWindow, FreeFermionSpec, HamiltonianSpec, Model, OtocGrid,
    OtocRecorder, Pauli, WindowConfig, XsFormGuess,
};

fn mixed_field_spec(l: usize) -> HamiltonianSpec {
    HamiltonianSpec {
        model: Model::MixedFieldIsing,
        j: 1.0,
        hx: 1.05,
        hz: 0.5,
        normalize_e0: true,
        l,
        boundary: Boundary::Open,
    }
}

fn transverse_field_spec(l: usize, g: f64, normalize_e0: bool) -> HamiltonianSpec {
    HamiltonianSpec {
        model: Model::TransverseFieldIsing,
        j: 1.0,
        hx: g,
        hz: 0.0,
        normalize_e0,
        l,
        boundary: Boundary::Open,
    }
}

/// Evolves `X_base` and records the squared commutator with `X_probe`
/// at every listed probe site.
fn run_grid(
    spec: &HamiltonianSpec,
    base: usize,
    probes: &[usize],
    chi: usize,
    dt: f64,
    t_max: f64,
    stride: usize,
) -> OtocGrid {
    let plan = build_trotter_plan(spec, dt, 2).unwrap();
    let w0 = local_pauli_mpo(spec.l, base, Pauli::X).unwrap();
    let mut rec = OtocRecorder::new(base, probes.to_vec(), Pauli::X).unwrap();
    evolve(&w0, &plan, t_max, chi, 1e-12, stride, |s| rec.record(s)).unwrap();
    rec.into_grid()
}

/// As [`run_grid`], additionally recording operator entanglement across
/// the listed cuts on the same trajectory.
fn run_grid_with_entanglement(
    spec: &HamiltonianSpec,
    base: usize,
    probes: &[usize],
    cuts: &[usize],
    chi: usize,
    dt: f64,
    t_max: f64,
    stride: usize,
) -> (OtocGrid, EntanglementProfile) {
    let plan = build_trotter_plan(spec, dt, 2).unwrap();
    let w0 = local_pauli_mpo(spec.l, base, Pauli::X).unwrap();
    let mut otoc_rec = OtocRecorder::new(base, probes.to_vec(), Pauli::X).unwrap();
    let mut ent_rec = EntanglementRecorder::new(cuts.to_vec()).unwrap();
    evolve(&w0, &plan, t_max, chi, 1e-12, stride, |s| {
        otoc_rec.record(s)?;
        ent_rec.record(s)
    })
    .unwrap();
    (otoc_rec.into_grid(), ent_rec.into_profile())
}

/// Prints the single verdict line for a criterion, then asserts it.
fn report(criterion: usize, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion} {verdict}: {detail}");
    assert!(pass, "criterion {criterion} {verdict}: {detail}");
}

/// Desk-scale mixed-field grids shared by criteria 2, 6(c), and 9:
/// 101 sites, base 51, probes every 5 sites outward, dt = 0.05, t <= 30,
/// samples every 0.5.
struct DeskScaleGrids {
    chi4: OtocGrid,
    chi16: OtocGrid,
    seconds: f64,
}

static DESK_SCALE: LazyLock<DeskScaleGrids> = LazyLock::new(|| {
    let spec = mixed_field_spec(101);
    let base = 51;
    let probes: Vec<usize> = (51..=101).step_by(5).collect();
    let start = Instant::now();
    let chi4 = run_grid(&spec, base, &probes, 4, 0.05, 30.0, 10);
    let chi16 = run_grid(&spec, base, &probes, 16, 0.05, 30.0, 10);
    DeskScaleGrids {
        chi4,
        chi16,
        seconds: start.elapsed().as_secs_f64(),
    }
});

/// Criterion 1 — the MPO pipeline and exact diagonalization are two
/// implementations of the same observable. An 11-site mixed-field chain
/// (chi = 32, dt = 0.005, base site 6, all probes, t <= 8, sampled every
/// 0.5) must agree with the dense Heisenberg evolution to 1e-4 absolute
/// wherever C < 0.1 and to 5% relative wherever 0.1 <= C <= 2, inside a
/// 10-minute budget. Measured here: worst absolute 5.8e-7, worst
/// relative 1.5e-2, about 4.5 minutes.
#[test]
fn criterion_1_squared_commutator_matches_exact_diagonalization() {
    let length = 11;
    let spec = mixed_field_spec(length);
    let base = 6;
    let probes: Vec<usize> = (1..=length).collect();
    let start = Instant::now();
    let grid = run_grid(&spec, base, &probes, 32, 0.005, 8.0, 100);

    let evolution = EdEvolution::new(&spec, base).unwrap();
    let mut worst_abs = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    for (k, &t) in grid.times.iter().enumerate() {
        let w = evolution.operator_at(t).unwrap();
        for (p, &site) in grid.probe_sites.iter().enumerate() {
            let exact = dense_commutator_norm_sq(&w, length, site, Pauli::X).unwrap();
            let value = grid.values[p][k];
            if exact < 0.1 {
                worst_abs = worst_abs.max((value - exact).abs());
            } else if exact <= 2.0 {
                worst_rel = worst_rel.max((value - exact).abs() / exact);
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();

    let pass = worst_abs <= 1e-4 && worst_rel <= 5e-2 && seconds <= 600.0;
    report(
        1,
        pass,
        &format!(
            "MPO vs ED on 11 sites: worst absolute deviation {worst_abs:.3e} (gate 1e-4 at C < 0.1), \
             worst relative deviation {worst_rel:.3e} (gate 5e-2 at 0.1 <= C <= 2), \
             runtime {seconds:.0} s (budget 600 s)"
        ),
    );
}

/// Criterion 2 — bond-dimension insensitivity of the early-growth
/// window at desk scale: on the 101-site mixed-field grid (dt = 0.05,
/// t <= 30), chi = 4 and chi = 16 must agree within 5% relative at every
/// point where both values are at most 0.1, inside a 30-minute budget.
/// Points below the 1e-13 floor are double-precision noise and carry no
/// signal to compare.
///
/// This gate is not attainable at chi = 4 on this configuration: the
/// chi = 4 truncation wake trails just behind the front and contaminates
/// the deep tail at the tens-of-percent level (measured worst 33% at
/// site 76, t = 20.5; one doubling higher, chi = 8 vs chi = 16, passes
/// the same 5% gate at 4.75%). The criterion is implemented exactly as
/// pinned and reports the measured deviation honestly.
#[test]
fn criterion_2_early_growth_window_is_bond_dimension_insensitive() {
    let grids = &*DESK_SCALE;
    let floor = 1e-13;
    let mut worst = 0.0_f64;
    let mut worst_site = 0;
    let mut worst_time = 0.0_f64;
    let mut gated = 0usize;
    let mut over = 0usize;
    for (p, &site) in grids.chi16.probe_sites.iter().enumerate() {
        for (k, &t) in grids.chi16.times.iter().enumerate() {
            let a = grids.chi4.values[p][k];
            let b = grids.chi16.values[p][k];
            let scale = a.abs().max(b.abs());
            if a > 0.1 || b > 0.1 || scale <= floor {
                continue;
            }
            gated += 1;
            let rel = (a - b).abs() / scale;
            if rel > 5e-2 {
                over += 1;
            }
            if rel > worst {
                worst = rel;
                worst_site = site;
                worst_time = t;
            }
        }
    }

    let pass = worst <= 5e-2 && gated > 0 && grids.seconds <= 1800.0;
    report(
        2,
        pass,
        &format!(
            "chi 4 vs chi 16 on 101 sites, t <= 30: worst relative deviation {worst:.3e} \
             at site {worst_site}, t {worst_time} (gate 5e-2 where C <= 0.1); \
             {over} of {gated} windowed points exceed the gate; \
             grid runtime {:.0} s (budget 1800 s)",
            grids.seconds
        ),
    );
}

/// Criterion 3 — the transverse-field chain against its analytic
/// solution: at g = 1 and g = 1.05 (energy normalization off, 101 sites,
/// chi = 4, dt = 5e-4) the MPO squared commutator must match the
/// quadrature oracle to 1e-6 absolute for t <= 10 at every probe, inside
/// a 10-minute budget. The oracle clock runs in units of 2J, so chain
/// times are rescaled by the clock factor 2 before evaluation. The
/// residual is pure second-order Trotter error, measured to scale as
/// dt^2 with predicted magnitude ~3.5e-7 at this step.
#[test]
fn criterion_3_transverse_field_chain_matches_the_analytic_commutator() {
    let length = 101;
    let base = 51;
    let probes: Vec<usize> = (51..=81).step_by(3).collect();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut worst_g = 0.0_f64;
    for g in [1.0, 1.05] {
        let spec = transverse_field_spec(length, g, false);
        let clock = analytic_clock_factor(&spec);
        let grid = run_grid(&spec, base, &probes, 4, 5e-4, 10.0, 400);
        let oracle = FreeFermionSpec::new(g).unwrap();
        for (p, &site) in grid.probe_sites.iter().enumerate() {
            let x = site as i64 - base as i64;
            for (k, &t) in grid.times.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let exact = free_fermion_otoc(&oracle, x, clock * t).unwrap();
                let dev = (grid.values[p][k] - exact).abs();
                if dev > worst {
                    worst = dev;
                    worst_g = g;
                }
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();

    let pass = worst <= 1e-6 && seconds <= 600.0;
    report(
        3,
        pass,
        &format!(
            "MPO vs quadrature oracle at g in {{1, 1.05}}, t <= 10: worst absolute deviation \
             {worst:.3e} (gate 1e-6, worst at g = {worst_g}), runtime {seconds:.0} s (budget 600 s)"
        ),
    );
}

/// Criterion 4 — the free-chain entanglement ceiling: under
/// transverse-field evolution the operator entanglement of a local
/// operator never exceeds log 4, so every recorded cut and time up to
/// t = 20 must satisfy S_vn <= log 4 + 0.02, and a chi = 4 evolution is
/// already lossless: its squared-commutator grid must agree with
/// chi = 32 to 1e-8. Measured here: max S_vn 1.030 (ceiling 1.406) and
/// bitwise-identical grids.
#[test]
fn criterion_4_transverse_field_operator_entanglement_stays_under_log_4() {
    let length = 101;
    let base = 51;
    let probes: Vec<usize> = (51..=101).step_by(5).collect();
    let cuts: Vec<usize> = (10..=90).step_by(10).collect();
    let spec = transverse_field_spec(length, 1.05, true);
    let (grid4, profile4) =
        run_grid_with_entanglement(&spec, base, &probes, &cuts, 4, 0.05, 20.0, 10);
    let (grid32, profile32) =
        run_grid_with_entanglement(&spec, base, &probes, &cuts, 32, 0.05, 20.0, 10);

    let mut max_entropy = 0.0_f64;
    for profile in [&profile4, &profile32] {
        for row in &profile.s_vn {
            for &s in row {
                max_entropy = max_entropy.max(s);
            }
        }
    }
    let ceiling = 4.0_f64.ln() + 0.02;

    let mut worst_grid_dev = 0.0_f64;
    for p in 0..probes.len() {
        for k in 0..grid4.times.len() {
            worst_grid_dev = worst_grid_dev.max((grid4.values[p][k] - grid32.values[p][k]).abs());
        }
    }

    let pass = max_entropy <= ceiling && worst_grid_dev <= 1e-8;
    report(
        4,
        pass,
        &format!(
            "transverse-field evolution to t = 20: max S_vn {max_entropy:.4} \
             (ceiling log 4 + 0.02 = {ceiling:.4}); chi 4 vs chi 32 grid deviation \
             {worst_grid_dev:.1e} (gate 1e-8)"
        ),
    );
}

/// Criterion 5 — the entropy-commutator inequality, checked exactly on
/// an 8-site mixed-field chain: for the operator launched at site 4,
/// every cut and every t in {0.25, 0.5, ..., 3.0} where the bound's
/// right side is defined must satisfy lhs <= rhs + 1e-9, with zero
/// violations.
#[test]
fn criterion_5_renyi_entropy_is_bounded_by_the_commutator_sum() {
    let spec = mixed_field_spec(8);
    let r = 4;
    let mut defined = 0usize;
    let mut violations = 0usize;
    let mut tightest = f64::INFINITY;
    for cut in 1..=7 {
        for k in 1..=12 {
            let t = 0.25 * k as f64;
            let rep = renyi_bound_check(&spec, r, cut, t).unwrap();
            if let Some(rhs) = rep.rhs {
                defined += 1;
                if rep.lhs > rhs + 1e-9 {
                    violations += 1;
                }
                tightest = tightest.min(rhs - rep.lhs);
            }
        }
    }

    let pass = violations == 0 && defined > 0;
    report(
        5,
        pass,
        &format!(
            "8-site chain, cuts 1..=7, t in {{0.25..3.0}}: {violations} violations across \
             {defined} defined points (gate lhs <= rhs + 1e-9; smallest margin {tightest:.3e})"
        ),
    );
}

/// Fits the front form to raw `(x, t, C)` triples under the default
/// window (C in [1e-15, 0.1], x >= 10) and returns the fitted
/// parameters.
fn fit_triples(triples: &[(f64, f64, f64)]) -> (f64, f64, f64, f64) {
    let window = FitWindow::from_points(WindowConfig::default(), triples).unwrap();
    let result = fit_xs_form(&window, &XsFormGuess::default()).unwrap();
    let FitParams::XsForm { lambda, p, v_b, x0 } = result.params else {
        unreachable!("front fit always returns front-form parameters");
    };
    (lambda, p, v_b, x0)
}

/// Criterion 6 — exponent extraction, as property checks sized for this
/// machine: (a) a synthetic front generated from known parameters is
/// recovered through the full window-and-fit pipeline to 1e-6; (b) the
/// free-fermion commutator at g = 1 fits to a broadening exponent
/// p in [0.43, 0.53]; (c) the desk-scale mixed-field grid fits to
/// p in [0.5, 0.85]; (d) the exponent discriminates mechanisms: data
/// generated by the sharp-cone exponential model fits to p < 0.15, data
/// generated by the diffusive-front model fits to p > 0.85.
///
/// The free-fermion and discrimination grids keep only points ahead of
/// the front (t < x in the respective clocks): behind it the commutator
/// saturates and later decays, outside the validity of the front form.
#[test]
fn criterion_6_wavefront_exponent_extraction_and_discrimination() {
    // (a) Round trip through window construction and fitting.
    let truth = FitParams::XsForm {
        lambda: 3.8,
        p: 0.67,
        v_b: 0.67,
        x0: 1.8,
    };
    let mut triples = Vec::new();
    for x in (10..=25).step_by(3) {
        let x = x as f64;
        for k in 1..=68 {
            let t = 0.5 * k as f64;
            triples.push((x, t, truth.log_c(x, t).unwrap().exp()));
        }
    }
    let (lambda, p, v_b, x0) = fit_triples(&triples);
    let round_trip_err = (lambda - 3.8)
        .abs()
        .max((p - 0.67).abs())
        .max((v_b - 0.67).abs())
        .max((x0 - 1.8).abs());

    // (b) Free-fermion commutator at the critical point, from the
    // closed-form amplitudes: |u|^2 = J_{2x}(2t)^2 + J'_{2x}(2t)^2 and
    // |v|^2 = (x/t)^2 J_{2x}(2t)^2, C = 8(a + b - (a - b)^2).
    let mut ff_triples = Vec::new();
    for x in 10..=40u32 {
        let xf = f64::from(x);
        for k in 1.. {
            let t = 0.25 * f64::from(k);
            if t >= xf {
                break;
            }
            let j = bessel_j(2 * x as usize, 2.0 * t).unwrap();
            let jp = bessel_j_prime(2 * x as usize, 2.0 * t).unwrap();
            let a = j * j + jp * jp;
            let b = (xf / t) * (xf / t) * j * j;
            let c = 8.0 * (a + b - (a - b) * (a - b));
            ff_triples.push((xf, t, c));
        }
    }
    let (_, p_ff, _, _) = fit_triples(&ff_triples);

    // (c) Desk-scale mixed-field front from the shared chi = 16 grid.
    let window = extract_window(&DESK_SCALE.chi16, &WindowConfig::default()).unwrap();
    let result = fit_xs_form(&window, &XsFormGuess::default()).unwrap();
    let FitParams::XsForm { p: p_desk, .. } = result.params else {
        unreachable!("front fit always returns front-form parameters");
    };

    // (d) Discrimination between growth mechanisms.
    let exponential = FitParams::Exponential {
        lambda: 2.0,
        mu: 1.0,
    };
    let mut exp_triples = Vec::new();
    for x in 10..=30 {
        let x = f64::from(x);
        for k in 1..=80 {
            let t = 0.25 * f64::from(k);
            exp_triples.push((x, t, exponential.log_c(x, t).unwrap().exp()));
        }
    }
    let (_, p_exp, _, _) = fit_triples(&exp_triples);

    let diffusive = FitParams::RandomCircuit { v: 1.0, d: 1.0 };
    let mut rc_triples = Vec::new();
    for x in 10..=30 {
        let x = f64::from(x);
        for k in 1.. {
            let t = 0.25 * f64::from(k);
            if t >= x {
                break;
            }
            rc_triples.push((x, t, diffusive.log_c(x, t).unwrap().exp()));
        }
    }
    let (_, p_rc, _, _) = fit_triples(&rc_triples);

    let pass = round_trip_err <= 1e-6
        && (0.43..=0.53).contains(&p_ff)
        && (0.5..=0.85).contains(&p_desk)
        && p_exp < 0.15
        && p_rc > 0.85;
    report(
        6,
        pass,
        &format!(
            "round-trip parameter error {round_trip_err:.1e} (gate 1e-6); free-fermion p = \
             {p_ff:.3} (gate [0.43, 0.53]); desk-scale mixed-field p = {p_desk:.3} \
             (gate [0.5, 0.85]); discrimination: exponential-generated p = {p_exp:.3} < 0.15, \
             diffusive-generated p = {p_rc:.3} > 0.85"
        ),
    );
}

/// Criterion 7 — late-time behavior on both sides of the front.
/// (a) After the front passes a fixed site of the transverse-field
/// chain, the commutator envelope decays as a power law: the fitted
/// log-log slope of the upper envelope at x = 20 over t in [50, 500]
/// must be -1.0 +/- 0.15 (analytic oracle, g = 1.05). (b) On the
/// mixed-field chain the commutator at a probe 10 sites from base,
/// evolved to five front-crossing times (t = 5x/v_B with v_B ~ 0.67,
/// rounded onto the step grid), saturates into [1.5, 2.2].
#[test]
fn criterion_7_late_time_decay_and_saturation() {
    // (a) Envelope decay exponent at fixed separation.
    let oracle = FreeFermionSpec::new(1.05).unwrap();
    let x = 20;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut k = 0;
    loop {
        let t = 50.0 + 0.25 * f64::from(k);
        if t > 500.0 {
            break;
        }
        times.push(t);
        values.push(free_fermion_otoc(&oracle, x, t).unwrap());
        k += 1;
    }
    let envelope = upper_envelope(&times, &values).unwrap();
    let points: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|&&(_, v)| v > 0.0)
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut covariance = 0.0;
    let mut variance = 0.0;
    for &(px, py) in &points {
        covariance += (px - mean_x) * (py - mean_y);
        variance += (px - mean_x) * (px - mean_x);
    }
    let slope = covariance / variance;

    // (b) Saturation at a probe 10 sites out: t = 5 * 10 / 0.67 = 74.6
    // on the dt = 0.05 grid.
    let start = Instant::now();
    let spec = mixed_field_spec(41);
    let grid = run_grid(&spec, 21, &[31], 16, 0.05, 74.6, 1492);
    let final_value = *grid.values[0].last().unwrap();
    let seconds = start.elapsed().as_secs_f64();

    let pass = (-1.15..=-0.85).contains(&slope) && (1.5..=2.2).contains(&final_value);
    report(
        7,
        pass,
        &format!(
            "envelope decay exponent at x = 20 over t in [50, 500]: {slope:.4} \
             (gate -1.0 +/- 0.15, {} envelope maxima); mixed-field saturation \
             C(x = 10, t = 74.6) = {final_value:.4} (gate [1.5, 2.2], {seconds:.0} s)",
            points.len()
        ),
    );
}

/// Criterion 8 — the special-function layer behind the analytic oracle.
/// (i) The squared Bessel coefficients of a unitary one-particle column
/// sum to one (1e-12). (ii) The closed-form amplitudes at g = 1, built
/// from Bessel functions, match the quadrature evaluation to 1e-9.
/// (iii) Well before the front, J_x(t) is its leading lattice
/// expansion (t/2)^x / x! to 1%. (iv) Rescaled by (x/2)^{1/3} and
/// plotted against u = (t - x)/t^{1/3}, the front profiles at
/// x in {50, 100, 200} collapse onto one curve within 2% pairwise.
#[test]
fn criterion_8_special_function_suite() {
    // (i) Normalization identity: J_0^2 + 2 sum_{n>=1} J_n^2 = 1.
    let mut worst_norm = 0.0_f64;
    for t in [0.5, 3.0, 10.0, 30.0] {
        let mut sum = bessel_j(0, t).unwrap().powi(2);
        let terms = (2.0 * t) as usize + 60;
        for n in 1..=terms {
            sum += 2.0 * bessel_j(n, t).unwrap().powi(2);
        }
        worst_norm = worst_norm.max((sum - 1.0).abs());
    }

    // (ii) Closed form vs quadrature at the critical point:
    // u = (-1)^x (J_{2x}(2t) - i J'_{2x}(2t)), v = i (-1)^x (x/t) J_{2x}(2t).
    let oracle = FreeFermionSpec::new(1.0).unwrap();
    let mut worst_amp = 0.0_f64;
    for x in [0usize, 1, 3, 7, 15] {
        for t in [0.5, 2.0, 7.5, 12.0] {
            let amp = free_fermion_amplitudes(&oracle, x as i64, t).unwrap();
            let sign = if x % 2 == 0 { 1.0 } else { -1.0 };
            let j = bessel_j(2 * x, 2.0 * t).unwrap();
            let jp = bessel_j_prime(2 * x, 2.0 * t).unwrap();
            let du = (amp.u.re - sign * j).hypot(amp.u.im + sign * jp);
            let dv = amp.v.re.hypot(amp.v.im - sign * (x as f64 / t) * j);
            worst_amp = worst_amp.max(du).max(dv);
        }
    }

    // (iii) Early-time expansion, at points well before the front
    // (relative truncation error ~ t^2/4x, kept under 1%).
    let mut worst_early = 0.0_f64;
    for (x, t) in [(20, 0.5), (25, 0.75), (30, 1.0), (40, 1.0), (50, 1.0)] {
        let j = bessel_j(x, t).unwrap();
        let leading = perturbative_form(x as f64, t, 0.5, 1.0).unwrap().exp();
        worst_early = worst_early.max((j / leading - 1.0).abs());
    }

    // (iv) Front collapse. For each u the time solves t = x + u t^{1/3}
    // (fixed point); the curves y = (x/2)^{1/3} J_x(t) then share the
    // Airy limit, with finite-order corrections shrinking as x grows.
    let orders = [50usize, 100, 200];
    let mut curves = Vec::new();
    for &x in &orders {
        let xf = x as f64;
        let mut curve = Vec::with_capacity(41);
        for i in 0..=40 {
            let u = -2.0 + 0.1 * f64::from(i);
            let mut t = xf + u * xf.cbrt();
            for _ in 0..80 {
                t = xf + u * t.cbrt();
            }
            curve.push((xf / 2.0).cbrt() * bessel_j(x, t).unwrap());
        }
        curves.push(curve);
    }
    let sup = |c: &[f64]| c.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let mut worst_collapse = 0.0_f64;
    for i in 0..orders.len() {
        for j in i + 1..orders.len() {
            let scale = sup(&curves[i]).max(sup(&curves[j]));
            for (a, b) in curves[i].iter().zip(&curves[j]) {
                worst_collapse = worst_collapse.max((a - b).abs() / scale);
            }
        }
    }

    let pass = worst_norm <= 1e-12
        && worst_amp <= 1e-9
        && worst_early <= 1e-2
        && worst_collapse <= 2e-2;
    report(
        8,
        pass,
        &format!(
            "normalization identity {worst_norm:.1e} (gate 1e-12); closed form vs quadrature \
             {worst_amp:.1e} (gate 1e-9); early-time expansion {worst_early:.2e} (gate 1e-2); \
             front collapse at x in {{50, 100, 200}} {worst_collapse:.2e} (gate 2e-2)"
        ),
    );
}

/// Criterion 9 — numerical hygiene. (i) The order-2 splitting converges
/// at second order: halving dt cuts the dense-operator error by a factor
/// in [3, 5] on a 6-site chain. (ii) A snapshot written mid-run and
/// resumed reproduces the uninterrupted evolution to 1e-12 (the format
/// round-trips bits, so the deviation is exactly zero). (iii) Outside
/// the light cone the evolved operator is still the identity: on the
/// desk-scale grids every probe beyond the front buffer reads at most
/// 1e-8 at every bond dimension.
#[test]
fn criterion_9_numerical_hygiene() {
    // (i) Error quartering under dt halving, against dense evolution.
    let spec = mixed_field_spec(6);
    let base = 3;
    let t_max = 0.5;
    let evolution = EdEvolution::new(&spec, base).unwrap();
    let exact = evolution.operator_at(t_max).unwrap();
    let error_at = |dt: f64| -> f64 {
        let plan = build_trotter_plan(&spec, dt, 2).unwrap();
        let w0 = local_pauli_mpo(spec.l, base, Pauli::X).unwrap();
        let record = evolve(&w0, &plan, t_max, 256, 0.0, 1000, |_| Ok(())).unwrap();
        let dense = mpo_to_dense(&record.final_state).unwrap();
        dense
            .data()
            .iter()
            .zip(exact.data())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    };
    let coarse = error_at(0.1);
    let fine = error_at(0.05);
    let factor = coarse / fine;

    // (ii) Snapshot round trip: split a 9-site run at t = 1 and compare
    // the resumed final operator against the straight t = 2 run.
    let spec9 = mixed_field_spec(9);
    let plan9 = build_trotter_plan(&spec9, 0.05, 2).unwrap();
    let w0 = local_pauli_mpo(spec9.l, 5, Pauli::X).unwrap();
    let straight = evolve(&w0, &plan9, 2.0, 32, 1e-12, 1000, |_| Ok(())).unwrap();
    let first_half = evolve(&w0, &plan9, 1.0, 32, 1e-12, 1000, |_| Ok(())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid_run.mpo");
    write_snapshot(&first_half.final_state, &path).unwrap();
    let restored = read_snapshot(&path).unwrap();
    let second_half = evolve(&restored, &plan9, 1.0, 32, 1e-12, 1000, |_| Ok(())).unwrap();
    let dense_straight = mpo_to_dense(&straight.final_state).unwrap();
    let dense_resumed = mpo_to_dense(&second_half.final_state).unwrap();
    let resume_dev = dense_straight
        .data()
        .iter()
        .zip(dense_resumed.data())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));

    // (iii) Identity tail on the shared desk-scale grids: beyond a
    // generous front estimate (speed 0.9 plus a 6-site buffer) the
    // commutator must be numerically zero.
    let grids = &*DESK_SCALE;
    let mut worst_tail = 0.0_f64;
    for grid in [&grids.chi4, &grids.chi16] {
        for (p, &site) in grid.probe_sites.iter().enumerate() {
            let x = (site - grid.base_site) as f64;
            for (k, &t) in grid.times.iter().enumerate() {
                if x > 0.9 * t + 6.0 {
                    worst_tail = worst_tail.max(grid.values[p][k].abs());
                }
            }
        }
    }

    let pass = (3.0..=5.0).contains(&factor) && resume_dev <= 1e-12 && worst_tail <= 1e-8;
    report(
        9,
        pass,
        &format!(
            "dt halving error factor {factor:.2} (gate [3, 5]); snapshot resume deviation \
             {resume_dev:.1e} (gate 1e-12); identity tail outside the light cone \
             {worst_tail:.1e} (gate 1e-8)"
        ),
    );
}
