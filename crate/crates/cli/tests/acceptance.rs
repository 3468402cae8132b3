//! Acceptance: figure regeneration is deterministic and the emitted rows
//! agree with direct evaluation. Run with
//! `cargo test -p diskflow-cli --test acceptance -- --nocapture`.

use std::fs;
use std::path::Path;

use diskflow::approx::ApproximantFamily;
use diskflow::caratheodory::certify_positive;
use diskflow::holomap::{DiskGrid, HoloMap};
use diskflow::spiral::{koenigs, perturb};
use diskflow::stock;
use diskflow_cli::commands::cmd_figure;
use diskflow_cli::config::Config;
use num_complex::Complex64;

const FIGURE1_CONFIG: &str = "\
[figure]
family = example2-approx
gamma = 1,0
taus = 0,0 0.5,0 0.75,0
radius = 0.995
n_theta = 512
";

const FIGURE3_CONFIG: &str = "\
[figure]
family = example3-perturb
lambda = 0.8,0
mu = 0.8,0
taus = 0.5,0 0.7,0 0.9,0
radius = 0.995
n_theta = 512
";

fn run_figure(config_text: &str, dir: &Path) -> Vec<String> {
    let config = Config::parse(config_text).unwrap();
    let written = cmd_figure(&config, dir).unwrap();
    written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

fn spot_check(dir: &Path, name: &str, map: &HoloMap, radius: f64) -> f64 {
    let text = fs::read_to_string(dir.join(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with('#'), "header line must be a comment");
    let rows: Vec<&str> = lines.collect();
    let mut worst: f64 = 0.0;
    // every 100th row is roughly the requested 1% sample
    for row in rows.iter().step_by(100) {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        let z = Complex64::from_polar(radius, fields[0]);
        let direct = map.eval(z).unwrap();
        worst = worst.max((direct - Complex64::new(fields[1], fields[2])).norm());
    }
    worst
}

#[test]
fn criterion_12_figure_regeneration() {
    let base = tempfile::tempdir().unwrap();
    let dir_a = base.path().join("a");
    let dir_b = base.path().join("b");

    // Figure-1 configuration: the positive-real-part approximants
    let names = run_figure(FIGURE1_CONFIG, &dir_a);
    assert_eq!(names, ["q.csv", "q_tau_1.csv", "q_tau_2.csv", "q_tau_3.csv"]);
    run_figure(FIGURE1_CONFIG, &dir_b);
    let mut identical = true;
    for name in &names {
        identical &= fs::read(dir_a.join(name)).unwrap() == fs::read(dir_b.join(name)).unwrap();
    }
    println!(
        "{} criterion-12 figure1-deterministic files={}",
        if identical { "PASS" } else { "FAIL" },
        names.len()
    );
    assert!(identical);

    // Figure-3 configuration: the perturbed starlike family
    let names3 = run_figure(FIGURE3_CONFIG, &dir_a);
    assert_eq!(names3, ["h.csv", "h_tau_1.csv", "h_tau_2.csv", "h_tau_3.csv"]);
    run_figure(FIGURE3_CONFIG, &dir_b);
    let mut identical3 = true;
    for name in &names3 {
        identical3 &= fs::read(dir_a.join(name)).unwrap() == fs::read(dir_b.join(name)).unwrap();
    }
    println!(
        "{} criterion-12 figure3-deterministic files={}",
        if identical3 { "PASS" } else { "FAIL" },
        names3.len()
    );
    assert!(identical3);

    // spot-check 1% of the rows of every emitted curve against direct
    // evaluation of the same construction
    let q = certify_positive(&stock::one_minus_z(), &DiskGrid::certification()).unwrap();
    let family = ApproximantFamily::q_family(q, Complex64::new(1.0, 0.0)).unwrap();
    let taus = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.75, 0.0),
    ];
    let mut worst = spot_check(&dir_a, "q.csv", &family.target(), 0.995);
    for (i, &tau) in taus.iter().enumerate() {
        let member = family.member(tau).unwrap();
        worst = worst.max(spot_check(&dir_a, &format!("q_tau_{}.csv", i + 1), &member, 0.995));
    }

    let lambda = Complex64::new(0.8, 0.0);
    let base_h = koenigs(&stock::z_minus_one(), lambda).unwrap();
    worst = worst.max(spot_check(&dir_a, "h.csv", base_h.h(), 0.995));
    let taus3 = [
        Complex64::new(0.5, 0.0),
        Complex64::new(0.7, 0.0),
        Complex64::new(0.9, 0.0),
    ];
    for (i, &tau) in taus3.iter().enumerate() {
        let member = perturb(&base_h, lambda, tau).unwrap();
        worst = worst.max(spot_check(
            &dir_a,
            &format!("h_tau_{}.csv", i + 1),
            member.h(),
            0.995,
        ));
    }
    println!(
        "PASS criterion-12 row-spot-check measured={worst:.3e} threshold=1.000e-10",
    );
    assert!(worst < 1e-10, "spot check deviation {worst:.3e}");
}

#[test]
fn smoke_figure_has_requested_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = Config::parse(
        "[figure]\nfamily = single\nmap = cayley\nradius = 0.9\nn_theta = 8\n",
    )
    .unwrap();
    let written = cmd_figure(&config, dir.path()).unwrap();
    assert_eq!(written.len(), 1);
    let text = fs::read_to_string(&written[0]).unwrap();
    // one comment header plus exactly 8 data rows
    assert_eq!(text.lines().count(), 9);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn figure_svg_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let config = Config::parse(
        "[figure]\nfamily = single\nmap = one-minus-z\nradius = 0.9\nn_theta = 64\nsvg = true\n",
    )
    .unwrap();
    let written = cmd_figure(&config, dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    let svg = fs::read_to_string(dir.path().join("one-minus-z.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<path"));
}
