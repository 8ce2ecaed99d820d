//! One-shot regeneration of the figure data sets.
//!
//! | id    | files | columns |
//! |-------|-------|---------|
//! | fig1a, fig1b | `<id>.csv` | `theta,possibility,necessity,severity` |
//! | fig2a, fig2b | `<id>.csv` | `theta,pi,possibility,necessity` |
//! | fig3, fig4 | `<id>a.csv`, `<id>b.csv` | `theta,pi`; `theta,possibility,necessity` |
//! | fig5  | `fig5a.csv` .. `fig5d.csv` | `theta,theta2,pi`; `phi,necessity,possibility`; `phi,pi`; `phi,necessity,possibility` |

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use improbe::likelihood::{build_im_with, CalibrationConfig, GridConfig};
use improbe::models::data;
use improbe::possibility::contour::linspace;
use improbe::*;

use crate::commands::{contour_table, marginal_measures, marginal_run, probe_table, rename, unknown_figure};
use crate::output::{header, PlotStyle, Table};
use crate::{Cli, ReproduceArgs};

struct Output {
    name: String,
    table: Table,
}

pub fn run(cli: &Cli, a: &ReproduceArgs) -> Result<()> {
    let outputs = match a.figure.as_str() {
        "fig1a" => vec![fig1(a, "fig1a", 152.0, Probe::Greater)?],
        "fig1b" => vec![fig1(a, "fig1b", 151.0, Probe::AtMost)?],
        "fig2a" => vec![fig2(a, "fig2a", 152.0, Probe::Greater)?],
        "fig2b" => vec![fig2(a, "fig2b", 151.0, Probe::AtMost)?],
        "fig3" => fig3(a)?,
        "fig4" => fig4(cli, a)?,
        "fig5" => fig5(a)?,
        other => return Err(unknown_figure(other)),
    };
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let settings = [
        ("grid", a.points.to_string()),
        ("lattice", a.lattice_points.to_string()),
        ("samples", a.samples.to_string()),
        ("seed", cli.seed.to_string()),
        ("alpha", "0.05".to_string()),
    ];
    for out in outputs {
        let head = header(&format!("reproduce {}", out.name), &settings);
        let csv_name = format!("{}.csv", out.name);
        write(&a.out_dir.join(&csv_name), |buf| out.table.write_csv(&head, buf))?;
        if cli.gnuplot {
            let script = out.table.gnuplot_for_file(&head, &csv_name);
            fs::write(a.out_dir.join(format!("{}.gp", out.name)), script)?;
        }
        println!("{}", a.out_dir.join(&csv_name).display());
    }
    Ok(())
}

fn write(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn normal_grid(a: &ReproduceArgs, ybar: f64) -> Vec<f64> {
    linspace(ybar - 5.0, ybar + 5.0, a.points.max(2))
}

fn probe_set(probe: Probe, theta: f64) -> HypothesisSet64 {
    match probe {
        Probe::Greater => HypothesisSet::greater_than(theta),
        Probe::AtMost => HypothesisSet::at_most(theta),
    }
}

/// Test-based IM measures of the probed claim next to severity.
fn fig1(a: &ReproduceArgs, name: &str, ybar: f64, probe: Probe) -> Result<Output> {
    let model = NormalMeanModel::new(1.0)?;
    let im = test_im(&OneSidedPValueFunction::normal(model, ybar, Direction::Left))?;
    let mut t = Table::new(&["theta", "possibility", "necessity", "severity"], PlotStyle::Lines);
    for theta in normal_grid(a, ybar) {
        let h = probe_set(probe, theta);
        let sev = match probe {
            Probe::Greater => severity_case1(&model, ybar, theta),
            Probe::AtMost => severity_case2(&model, ybar, theta),
        };
        t.push(&[theta, im.possibility(&h)?, im.necessity(&h)?, sev]);
    }
    Ok(Output { name: name.into(), table: t })
}

/// Likelihood-based contour with the measures of the probed claim.
fn fig2(a: &ReproduceArgs, name: &str, ybar: f64, probe: Probe) -> Result<Output> {
    let model = NormalMeanModel::new(1.0)?;
    let grid_cfg = GridConfig { points: a.points, ..GridConfig::default() };
    let im = build_im_with(&model, &NormalData { ybar }, &CalibrationConfig::default(), &grid_cfg)?;
    let mut t = Table::new(&["theta", "pi", "possibility", "necessity"], PlotStyle::Lines);
    for theta in normal_grid(a, ybar) {
        let h = probe_set(probe, theta);
        t.push(&[theta, contour_exact(&model, &NormalData { ybar }, &theta)?, im.possibility(&h)?, im.necessity(&h)?]);
    }
    Ok(Output { name: name.into(), table: t })
}

fn contour_and_probe(prefix: &str, im: &ImPair64) -> Result<Vec<Output>> {
    let c = im.scalar().expect("scalar model");
    Ok(vec![
        Output { name: format!("{prefix}a"), table: contour_table(im) },
        Output { name: format!("{prefix}b"), table: probe_table(im, Probe::Greater, c.grid())? },
    ])
}

fn fig3(a: &ReproduceArgs) -> Result<Vec<Output>> {
    let model = BinomialModel::new(20)?;
    let grid_cfg = GridConfig { points: a.points, ..GridConfig::default() };
    let im = build_im_with(&model, &BinomialData { successes: 8 }, &CalibrationConfig::default(), &grid_cfg)?;
    contour_and_probe("fig3", &im)
}

fn fig4(cli: &Cli, a: &ReproduceArgs) -> Result<Vec<Output>> {
    let pairs: CorrelationData64 = data::law_school();
    let model = BivariateCorrelationModel::new(pairs.len())?;
    let cfg = CalibrationConfig::default().with_samples(a.samples).with_seed(cli.seed);
    let grid_cfg = GridConfig { points: a.points, ..GridConfig::default() };
    let im = build_im_with(&model, &pairs, &cfg, &grid_cfg)?;
    contour_and_probe("fig4", &im)
}

fn fig5(a: &ReproduceArgs) -> Result<Vec<Output>> {
    let cells = data::clinical_trial();
    let diff = marginal_run(&cells, &Feature::Difference, a.points, a.lattice_points, a.points)?;
    let rr = marginal_run(&cells, &Feature::RelativeRisk, a.points, a.lattice_points, a.points)?;
    Ok(vec![
        Output { name: "fig5a".into(), table: contour_table(&diff.joint) },
        Output { name: "fig5b".into(), table: marginal_measures(&diff.marginal, false) },
        Output { name: "fig5c".into(), table: rename(contour_table(&rr.marginal), &["phi", "pi"]) },
        Output { name: "fig5d".into(), table: marginal_measures(&rr.marginal, true) },
    ])
}
