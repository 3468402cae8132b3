//! The six subcommands: check, figure, approx, flow, spectrum, valence.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use num_complex::Complex64;

use diskflow::approx::{convergence_report, ApproximantFamily};
use diskflow::caratheodory::certify_positive;
use diskflow::flow::{integrate_flow, stability_table};
use diskflow::holomap::{DiskGrid, HoloMap};
use diskflow::spectrum::{bshouty_lyzzaik, measure_valence_seeded, sigma_map};
use diskflow::spiral::{koenigs, perturb};
use diskflow::{invariants, stock};

use crate::config::Config;
use crate::output::{fmt, svg_polyline, write_atomic, Csv};

/// CLI-side invariants: figure emission is deterministic and the emitted
/// rows match direct evaluation.
pub fn cli_checks() -> Vec<invariants::InvariantCheck> {
    fn emit(dir: &Path) -> anyhow::Result<(PathBuf, HoloMap, f64)> {
        let radius = 0.9;
        let config = Config::parse(
            "[figure]\nfamily = example2-approx\ngamma = 1,0\ntaus = 0.5,0\nn_theta = 128\nradius = 0.9\n",
        )
        .map_err(|e| anyhow!("{e}"))?;
        let written = cmd_figure(&config, dir)?;
        let q = certify_positive(&stock::one_minus_z(), &DiskGrid::certification())?;
        let family = ApproximantFamily::q_family(q, Complex64::new(1.0, 0.0))?;
        let member = family.member(Complex64::new(0.5, 0.0))?;
        Ok((written[1].clone(), member, radius))
    }

    fn scratch(tag: &str) -> PathBuf {
        std::env::temp_dir().join(format!("diskflow-check-{}-{tag}", std::process::id()))
    }

    let determinism = invariants::InvariantCheck::custom("cli.figure_determinism", || {
        let (dir_a, dir_b) = (scratch("a"), scratch("b"));
        let run = || -> diskflow::Result<f64> {
            let (path_a, _, _) =
                emit(&dir_a).map_err(|e| diskflow::CoreError::Internal(e.to_string()))?;
            let (path_b, _, _) =
                emit(&dir_b).map_err(|e| diskflow::CoreError::Internal(e.to_string()))?;
            let same = std::fs::read(path_a).ok() == std::fs::read(path_b).ok();
            Ok(if same { 0.0 } else { 1.0 })
        };
        let result = run();
        let _ = std::fs::remove_dir_all(&dir_a);
        let _ = std::fs::remove_dir_all(&dir_b);
        let diff = result?;
        Ok((diff, 0.5, diff < 0.5))
    });

    let fidelity = invariants::InvariantCheck::custom("cli.figure_row_fidelity", || {
        let dir = scratch("rows");
        let run = || -> diskflow::Result<f64> {
            let (path, map, radius) =
                emit(&dir).map_err(|e| diskflow::CoreError::Internal(e.to_string()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| diskflow::CoreError::Internal(e.to_string()))?;
            let mut worst: f64 = 0.0;
            for line in text.lines().skip(1).step_by(100) {
                let fields: Vec<f64> = line
                    .split(',')
                    .map(|v| v.parse().unwrap_or(f64::NAN))
                    .collect();
                let z = Complex64::from_polar(radius, fields[0]);
                let direct = map.eval(z)?;
                worst = worst.max((direct - Complex64::new(fields[1], fields[2])).norm());
            }
            Ok(worst)
        };
        let result = run();
        let _ = std::fs::remove_dir_all(&dir);
        let worst = result?;
        Ok((worst, 1e-10, worst < 1e-10))
    });

    vec![determinism, fidelity]
}

/// Run the registered invariant suite; returns the process exit code.
pub fn cmd_check() -> i32 {
    let mut checks = invariants::all();
    checks.extend(cli_checks());
    cmd_check_with(&checks)
}

/// `cmd_check` over an explicit set of checks.
pub fn cmd_check_with(checks: &[invariants::InvariantCheck]) -> i32 {
    let mut failed = 0usize;
    for check in checks {
        let report = check.run();
        println!(
            "{} {} {} {}{}",
            if report.pass { "PASS" } else { "FAIL" },
            report.name,
            fmt(report.measured),
            fmt(report.threshold),
            report
                .note
                .as_deref()
                .map(|n| format!(" # {n}"))
                .unwrap_or_default()
        );
        if !report.pass {
            failed += 1;
        }
    }
    println!(
        "{} of {} invariants passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        0
    } else {
        1
    }
}

fn interior(taus: &[Complex64]) -> anyhow::Result<()> {
    for &tau in taus {
        if tau.norm() >= 1.0 {
            bail!("tau = {tau} is not interior (|tau| must be < 1)");
        }
    }
    Ok(())
}

/// The named curves a figure config requests.
fn figure_curves(config: &Config) -> anyhow::Result<Vec<(String, HoloMap)>> {
    let section = config.section("figure")?;
    let mut curves = Vec::new();
    match section.str_or("family", "single") {
        "example2-approx" => {
            let gamma = section.complex_or("gamma", Complex64::new(1.0, 0.0))?;
            let taus = section.complex_list("taus")?;
            interior(&taus)?;
            let q = certify_positive(&stock::one_minus_z(), &DiskGrid::certification())?;
            let family = ApproximantFamily::q_family(q, gamma)?;
            curves.push(("q".to_string(), family.target()));
            for (i, &tau) in taus.iter().enumerate() {
                curves.push((format!("q_tau_{}", i + 1), family.member(tau)?));
            }
        }
        "example3-perturb" => {
            let lambda = section.complex_or("lambda", Complex64::new(0.8, 0.0))?;
            let mu = section.complex_or("mu", lambda)?;
            let taus = section.complex_list("taus")?;
            interior(&taus)?;
            let base = koenigs(&stock::z_minus_one(), lambda)?;
            // the tau -> 1 limit of the perturbed family is h^(mu/lambda)
            curves.push(("h".to_string(), koenigs(&stock::z_minus_one(), mu)?.h().clone()));
            for (i, &tau) in taus.iter().enumerate() {
                curves.push((format!("h_tau_{}", i + 1), perturb(&base, mu, tau)?.h().clone()));
            }
        }
        "single" => {
            let name = section.str("map")?;
            let map = stock::by_name(name)
                .ok_or_else(|| anyhow!("unknown stock map '{name}'"))?;
            curves.push((name.to_string(), map));
        }
        other => bail!("unknown figure family '{other}'"),
    }
    Ok(curves)
}

/// Emit one CSV (optionally one SVG) per requested curve: the image of the
/// circle |z| = r sampled at n_theta angles.
pub fn cmd_figure(config: &Config, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let section = config.section("figure")?;
    if section.str_or("family", "single") == "sigma-map" {
        return Ok(vec![write_sigma_csv(config, out, "figure")?]);
    }
    let radius = section.f64_or("radius", 0.995)?;
    if !(0.0 < radius && radius < 1.0) {
        bail!("radius must lie in (0, 1), got {radius}");
    }
    let n_theta = section.usize_or("n_theta", 512)?;
    let svg = section.bool_or("svg", false)?;
    let curves = figure_curves(config)?;

    let mut written = Vec::new();
    for (name, map) in &curves {
        let mut csv = Csv::new(&format!("# map={name} r={radius}"));
        let mut points = Vec::with_capacity(n_theta);
        for j in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
            let z = Complex64::from_polar(radius, theta);
            let w = map
                .eval(z)
                .with_context(|| format!("evaluating {name} at theta = {theta}"))?;
            csv.row(&[theta, w.re, w.im]);
            points.push((w.re, w.im));
        }
        written.push(write_atomic(out, &format!("{name}.csv"), &csv.finish())?);
        if svg {
            written.push(write_atomic(out, &format!("{name}.svg"), &svg_polyline(&points))?);
        }
    }
    Ok(written)
}

/// Convergence experiment: sup |member(tau) - target| per compact per tau.
pub fn cmd_approx(config: &Config, out: &Path) -> anyhow::Result<PathBuf> {
    let section = config.section("approx")?;
    let kind = section.str_or("family", "f");
    let taus = section.complex_list("taus")?;
    interior(&taus)?;
    let compacts: Vec<DiskGrid> = section
        .f64_list("compacts")
        .unwrap_or_else(|_| vec![0.3, 0.5, 0.8])
        .into_iter()
        .map(DiskGrid::compact)
        .collect();

    let family = match kind {
        "q" => {
            let base = section.str_or("base", "one-minus-z");
            let q = stock::by_name(base).ok_or_else(|| anyhow!("unknown base '{base}'"))?;
            let gamma = section.complex_or("gamma", Complex64::new(1.0, 0.0))?;
            ApproximantFamily::q_family(certify_positive(&q, &DiskGrid::certification())?, gamma)?
        }
        "p" => {
            let base = section.str_or("base", "half-plane");
            let p = stock::by_name(base).ok_or_else(|| anyhow!("unknown base '{base}'"))?;
            let mu = section.complex_or("mu", Complex64::new(1.0, 0.0))?;
            ApproximantFamily::p_family(certify_positive(&p, &DiskGrid::certification())?, mu)?
        }
        "f" => {
            let base = section.str_or("base", "z-minus-one");
            let f = stock::by_name(base).ok_or_else(|| anyhow!("unknown base '{base}'"))?;
            let mu = section.complex_or("mu", Complex64::new(1.0, 0.0))?;
            ApproximantFamily::f_family(f, mu)?
        }
        other => bail!("unknown family kind '{other}' (want q, p or f)"),
    };

    let target = family.target();
    let table = convergence_report(&family, &target, &taus, &compacts)?;
    let mut csv = Csv::new(&format!(
        "# columns=tau_re,tau_im,compact_r,sup_err family={} trend={}",
        family.kind(),
        if table.is_eventually_decreasing() {
            "decreasing"
        } else {
            "not-decreasing"
        }
    ));
    for row in &table.rows {
        csv.row(&[row.tau.re, row.tau.im, row.compact_r, row.sup_err]);
    }
    write_atomic(out, "approx.csv", &csv.finish())
}

/// Integrate one flow line (`mode = trajectory`, the default) or run the
/// perturbed-flow stability experiment (`mode = stability`).
pub fn cmd_flow(config: &Config, out: &Path) -> anyhow::Result<PathBuf> {
    let section = config.section("flow")?;
    let name = section.str_or("f", "z-minus-one");
    let f = stock::by_name(name).ok_or_else(|| anyhow!("unknown generator '{name}'"))?;
    let t_end = section.f64_or("t", 2.0)?;

    match section.str_or("mode", "trajectory") {
        "trajectory" => {
            let z0 = section.complex_or("z0", Complex64::new(0.0, 0.0))?;
            if z0.norm() >= 1.0 {
                bail!("z0 must be interior, got |z0| = {}", z0.norm());
            }
            let tol = section.f64_or("tol", 1e-10)?;
            let samples = section.usize_or("samples", 64)?.max(2);

            let traj = integrate_flow(&f, z0, t_end, tol)?;
            let mut csv =
                Csv::new(&format!("# columns=t,re,im f={name} z0={},{}", z0.re, z0.im));
            for i in 0..samples {
                let t = t_end * i as f64 / (samples - 1) as f64;
                let z = traj.sample(t);
                csv.row(&[t, z.re, z.im]);
            }
            write_atomic(out, "flow.csv", &csv.finish())
        }
        "stability" => {
            let mu = section.complex_or("mu", Complex64::new(1.0, 0.0))?;
            let taus = section.complex_list("taus")?;
            interior(&taus)?;
            let grid = DiskGrid::compact(section.f64_or("grid_r", 0.5)?);
            let rows = stability_table(&f, mu, &taus, t_end, &grid)?;
            let mut csv = Csv::new(&format!(
                "# columns=tau_re,tau_im,sup_err f={name} mu={},{} t={t_end}",
                mu.re, mu.im
            ));
            for row in &rows {
                csv.row(&[row.tau.re, row.tau.im, row.sup_err]);
            }
            write_atomic(out, "stability.csv", &csv.finish())
        }
        other => bail!("unknown flow mode '{other}' (want trajectory or stability)"),
    }
}

fn write_sigma_csv(config: &Config, out: &Path, section_name: &str) -> anyhow::Result<PathBuf> {
    let section = config.section(section_name)?;
    let beta = section.f64_or("beta", 1.0)?;
    if beta <= 0.0 {
        bail!("beta must be positive, got {beta}");
    }
    let window = section
        .f64_list("window")
        .unwrap_or_else(|_| vec![-4.0, 4.0, -4.0, 4.0]);
    if window.len() != 4 || window[0] > window[1] || window[2] > window[3] {
        bail!("window must be four numbers re0 re1 im0 im1");
    }
    let step = section.f64_or("step", 0.05)?;
    if step <= 0.0 {
        bail!("step must be positive, got {step}");
    }
    let cells = sigma_map(beta, window[0], window[1], window[2], window[3], step);
    let mut csv = Csv::new(&format!(
        "# columns=re,im,k beta={beta} (k=-1 encodes infinite valence)"
    ));
    for cell in &cells {
        csv.row_int(&[cell.re, cell.im], cell.k);
    }
    write_atomic(out, "sigma.csv", &csv.finish())
}

/// Valence-cell map over a rectangle of the eigenvalue plane.
pub fn cmd_spectrum(config: &Config, out: &Path) -> anyhow::Result<PathBuf> {
    write_sigma_csv(config, out, "spectrum")
}

/// Measure the valence of a constructed map by argument-principle counting.
pub fn cmd_valence(config: &Config, out: &Path, seed: u64) -> anyhow::Result<PathBuf> {
    let section = config.section("valence")?;
    let selector = section.str_or("map", "power");
    let (description, map) = match selector {
        "power" => {
            let exponent = section.complex_or("exponent", Complex64::new(2.0, 0.0))?;
            (
                format!("(1-z)^({},{})", exponent.re, exponent.im),
                HoloMap::power(stock::one_minus_z(), exponent),
            )
        }
        "bshouty-z" => (
            "bshouty omega=z".to_string(),
            bshouty_lyzzaik(&stock::bshouty_omega(1))?.h,
        ),
        "bshouty-z2" => (
            "bshouty omega=z^2".to_string(),
            bshouty_lyzzaik(&stock::bshouty_omega(2))?.h,
        ),
        name => {
            let map =
                stock::by_name(name).ok_or_else(|| anyhow!("unknown valence map '{name}'"))?;
            (name.to_string(), map)
        }
    };
    let r = section.f64_or("r", 0.99)?;
    if !(0.0 < r && r < 1.0) {
        bail!("r must lie in (0, 1), got {r}");
    }
    let targets = section.usize_or("targets", 200)?;

    let count = measure_valence_seeded(&map, r, targets, seed)?;
    println!("valence of {description} on |z| < {r}: at least {count}");

    let mut csv = Csv::new(&format!("# columns=r,targets,seed,count map={description}"));
    csv.row_int(&[r, targets as f64, seed as f64], count as i64);
    write_atomic(out, "valence.csv", &csv.finish())
}
