use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use improbe::likelihood::{build_im_with, CalibrationConfig, GridConfig};
use improbe::marginal::{default_phi_grid, marginal_im_with, one_sided_sups};
use improbe::models::data;
use improbe::possibility::contour::linspace;
use improbe::possibility::ImContour;
use improbe::validity::{audit_error_rates, audit_strong_validity_with, audit_uniform_validity_with};
use improbe::*;

use crate::misspecified::Misspecified;
use crate::output::{header, PlotStyle, Table};
use crate::{
    Cli, Command, ContourArgs, DirectionArg, FeatureArg, MarginalArgs, ModelArgs, ModelKind, PolicyArg, ProbeArgs,
    SeverityArgs, ThetaGridArgs, ValidateArgs,
};

/// Usage problems not caught by argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// At least one audit cell exceeded its threshold.
#[derive(Debug)]
pub struct ValidationFailed(pub usize);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} validation cell(s) failed", self.0)
    }
}

impl std::error::Error for ValidationFailed {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 2 for malformed input, 3 for capability errors, 4 for failed audits.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ValidationFailed>().is_some() {
        return 4;
    }
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Capability(_)) => 3,
        Some(_) => 2,
        None if err.downcast_ref::<io::Error>().is_some() => 1,
        None => 2,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Contour(a) => contour(cli, a),
        Command::Probe(a) => probe(cli, a),
        Command::Marginal(a) => marginal(cli, a),
        Command::Severity(a) => severity(cli, a),
        Command::Validate(a) => validate(cli, a),
        Command::Reproduce(a) => crate::reproduce::run(cli, a),
    }
}

pub fn emit(cli: &Cli, head: &str, table: &Table) -> Result<()> {
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    if cli.gnuplot {
        table.write_gnuplot(head, &mut w)?;
    } else {
        table.write_csv(head, &mut w)?;
    }
    w.flush()?;
    Ok(())
}

pub enum Loaded {
    Normal(NormalMeanModel64, NormalData<f64>),
    Binomial(BinomialModel64, BinomialData),
    Correlation(BivariateCorrelationModel, CorrelationData64),
    Table(TwoByTwoModel64, TableCounts),
}

/// Opens a data file. The bundled fixture names resolve to the embedded
/// copies when no such file exists.
pub fn open_source(path: &Path) -> Result<Box<dyn Read>> {
    if !path.exists() {
        match path.file_name().and_then(|n| n.to_str()) {
            Some("law_school.csv") => return Ok(Box::new(data::LAW_SCHOOL_CSV.as_bytes())),
            Some("clinical_trial.csv") => return Ok(Box::new(data::CLINICAL_TRIAL_CSV.as_bytes())),
            _ => {}
        }
    }
    let f = data::open(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Box::new(f))
}

fn open_data(args: &ModelArgs) -> Result<Option<Box<dyn Read>>> {
    args.data.as_deref().map(open_source).transpose()
}

pub fn load(args: &ModelArgs) -> Result<Loaded> {
    let file = open_data(args)?;
    Ok(match args.model {
        ModelKind::Normal => {
            let d = match (file, args.ybar) {
                (Some(f), _) => data::read_normal(f)?,
                (None, Some(ybar)) => NormalData { ybar },
                (None, None) => return Err(usage("normal model needs --ybar or --data")),
            };
            Loaded::Normal(NormalMeanModel::new(args.sd)?, d)
        }
        ModelKind::Binomial => {
            let (d, n) = match (file, args.n, args.y) {
                (Some(f), _, _) => data::read_binomial(f)?,
                (None, Some(n), Some(y)) => (BinomialData { successes: y }, n),
                _ => return Err(usage("binomial model needs --n and --y, or --data")),
            };
            Loaded::Binomial(BinomialModel::new(n)?, d)
        }
        ModelKind::Correlation => {
            let d = match file {
                Some(f) => data::read_correlation(f)?,
                None => return Err(usage("correlation model needs --data")),
            };
            Loaded::Correlation(BivariateCorrelationModel::new(d.len())?, d)
        }
        ModelKind::Table => {
            let d = match file {
                Some(f) => data::read_table(f)?,
                None => data::clinical_trial(),
            };
            Loaded::Table(TwoByTwoModel::for_table(&d)?, d)
        }
    })
}

pub fn calibration(cli: &Cli, args: &ModelArgs) -> CalibrationConfig {
    let mut cfg = CalibrationConfig::default()
        .with_samples(args.calibration.samples)
        .with_seed(Seed(cli.seed));
    if args.calibration.mc {
        cfg = cfg.monte_carlo();
    }
    cfg
}

fn grid_config(args: &ModelArgs) -> GridConfig {
    GridConfig {
        points: args.calibration.points,
        lattice_points: args.calibration.lattice_points,
    }
}

fn require_exact<M: ExactCalibration<f64>>(args: &ModelArgs, model: &M) -> Result<()> {
    if args.calibration.exact && !model.supports_exact() {
        return Err(Error::Capability(format!("{} model has no exact contour evaluator", model.name())).into());
    }
    Ok(())
}

impl Loaded {
    pub fn build(&self, cfg: &CalibrationConfig, args: &ModelArgs) -> Result<ImPair64> {
        let grid = grid_config(args);
        Ok(match self {
            Loaded::Normal(m, d) => {
                require_exact(args, m)?;
                build_im_with(m, d, cfg, &grid)?
            }
            Loaded::Binomial(m, d) => {
                require_exact(args, m)?;
                build_im_with(m, d, cfg, &grid)?
            }
            Loaded::Correlation(m, d) => {
                require_exact(args, m)?;
                build_im_with(m, d, cfg, &grid)?
            }
            Loaded::Table(m, d) => {
                require_exact(args, m)?;
                build_im_with(m, d, cfg, &grid)?
            }
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Loaded::Normal(..) => "normal",
            Loaded::Binomial(..) => "binomial",
            Loaded::Correlation(..) => "correlation",
            Loaded::Table(..) => "table",
        }
    }
}

fn model_settings(cli: &Cli, args: &ModelArgs, loaded: &Loaded) -> Vec<(&'static str, String)> {
    let mut s = vec![("model", loaded.name().to_string())];
    match loaded {
        Loaded::Normal(m, d) => {
            s.push(("sd", m.sd().to_string()));
            s.push(("ybar", d.ybar.to_string()));
        }
        Loaded::Binomial(m, d) => {
            s.push(("n", m.n_trials().to_string()));
            s.push(("y", d.successes.to_string()));
        }
        Loaded::Correlation(m, _) => s.push(("pairs", m.n_pairs().to_string())),
        Loaded::Table(_, d) => s.push(("cells", format!("{:?}", d.cells))),
    }
    if let Some(p) = &args.data {
        s.push(("data", p.display().to_string()));
    }
    s.push(("grid", args.calibration.points.to_string()));
    if matches!(loaded, Loaded::Table(..)) {
        s.push(("lattice", args.calibration.lattice_points.to_string()));
    }
    s.push(("samples", args.calibration.samples.to_string()));
    s.push(("seed", cli.seed.to_string()));
    s.push(("alpha", "0.05".to_string()));
    s
}

pub fn contour_table(im: &ImPair64) -> Table {
    match im.contour() {
        ImContour::Scalar(c) => {
            let mut t = Table::new(&["theta", "pi"], PlotStyle::Lines);
            for (g, v) in c.grid().iter().zip(c.values()) {
                t.push(&[g, v]);
            }
            t
        }
        ImContour::Lattice(c) => {
            let mut t = Table::new(&["theta", "theta2", "pi"], PlotStyle::Map);
            let (nx, ny) = c.shape();
            for i in 0..nx {
                for j in 0..ny {
                    t.push(&[c.x()[i], c.y()[j], c.value(i, j)]);
                }
            }
            t
        }
    }
}

fn contour(cli: &Cli, a: &ContourArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let im = loaded.build(&calibration(cli, &a.model), &a.model)?;
    let head = header("contour", &model_settings(cli, &a.model, &loaded));
    emit(cli, &head, &contour_table(&im))
}

pub fn theta_grid(args: &ThetaGridArgs, fallback: &[f64]) -> Result<Vec<f64>> {
    match (args.from, args.to) {
        (Some(a), Some(b)) => {
            if !(a < b) || args.grid_points < 2 {
                return Err(usage("grid needs --from < --to and at least 2 points"));
            }
            Ok(linspace(a, b, args.grid_points))
        }
        _ => Ok(fallback.to_vec()),
    }
}

pub fn probe_table(im: &ImPair64, direction: Probe, grid: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["theta", "possibility", "necessity"], PlotStyle::Lines);
    for p in holistic_probe(im, direction, grid)? {
        t.push(&[p.theta, p.possibility, p.necessity]);
    }
    Ok(t)
}

fn probe(cli: &Cli, a: &ProbeArgs) -> Result<()> {
    let loaded = load(&a.model)?;
    let im = loaded.build(&calibration(cli, &a.model), &a.model)?;
    let mut settings = model_settings(cli, &a.model, &loaded);
    if let Some(text) = &a.hypothesis {
        let set: IntervalSet64 = text.parse()?;
        let h = HypothesisSet::from(set);
        settings.push(("hypothesis", format!("{h}")));
        let mut t = Table::new(&["hypothesis", "possibility", "necessity"], PlotStyle::Lines);
        t.push(&[format!("\"{h}\""), im.possibility(&h)?.to_string(), im.necessity(&h)?.to_string()]);
        return emit(cli, &header("probe", &settings), &t);
    }
    let c = im
        .scalar()
        .ok_or_else(|| usage("probe needs a scalar parameter; use marginal for the table"))?;
    let grid = theta_grid(&a.grid, c.grid())?;
    let direction = match a.direction {
        DirectionArg::Gt => Probe::Greater,
        DirectionArg::Leq => Probe::AtMost,
    };
    settings.push(("direction", a.direction.to_possible_value().expect("named").get_name().to_string()));
    emit(cli, &header("probe", &settings), &probe_table(&im, direction, &grid)?)
}

pub fn feature(f: FeatureArg) -> Feature64 {
    match f {
        FeatureArg::Difference => Feature::Difference,
        FeatureArg::RelativeRisk => Feature::RelativeRisk,
    }
}

pub struct MarginalRun {
    pub joint: ImPair64,
    pub marginal: ImPair64,
}

pub fn marginal_run(
    cells: &TableCounts,
    f: &Feature64,
    points: usize,
    lattice_points: usize,
    subgrid: usize,
) -> Result<MarginalRun> {
    let model = TwoByTwoModel::for_table(cells)?;
    let joint = build_im_with(
        &model,
        cells,
        &CalibrationConfig::default(),
        &GridConfig { points, lattice_points },
    )?;
    let grid = default_phi_grid(&model, cells, f, points)?;
    let marginal = marginal_im_with(&joint, f, grid, subgrid)?;
    Ok(MarginalRun { joint, marginal })
}

/// `phi,necessity,possibility`, with necessity of `{Φ > φ}` and possibility
/// of `{Φ ≤ φ}` (or of `{Φ > φ}` for both when `greater` is set).
pub fn marginal_measures(im: &ImPair64, greater: bool) -> Table {
    let c = im.scalar().expect("marginal contours are scalar");
    let (below, above) = one_sided_sups(c);
    let mut t = Table::new(&["phi", "necessity", "possibility"], PlotStyle::Lines);
    for (k, g) in c.grid().iter().enumerate() {
        let poss = if greater { above[k] } else { below[k] };
        t.push(&[*g, 1.0 - below[k], poss]);
    }
    t
}

fn marginal(cli: &Cli, a: &MarginalArgs) -> Result<()> {
    let cells = match &a.data {
        Some(p) => data::read_table(open_source(p)?)?,
        None => data::clinical_trial(),
    };
    let f = feature(a.feature);
    let run = marginal_run(&cells, &f, a.points, a.lattice_points, a.subgrid)?;
    let mut settings = vec![
        ("feature", f.name().to_string()),
        ("cells", format!("{:?}", cells.cells)),
        ("grid", a.points.to_string()),
        ("lattice", a.lattice_points.to_string()),
        ("subgrid", a.subgrid.to_string()),
        ("samples", "10000".to_string()),
        ("seed", cli.seed.to_string()),
        ("alpha", "0.05".to_string()),
    ];
    if let Some(p) = &a.data {
        settings.insert(2, ("data", p.display().to_string()));
    }
    let head = header("marginal", &settings);
    if let Some(phi) = a.phi {
        let mut t = Table::new(&["phi", "pi", "possibility"], PlotStyle::Lines);
        let pi = marginal_contour_with_default(&run.joint, &f, phi, a.subgrid)?;
        t.push(&[phi, pi, run.marginal.possibility_at_most(phi)?]);
        return emit(cli, &head, &t);
    }
    let table = if a.measures {
        marginal_measures(&run.marginal, false)
    } else {
        contour_table(&run.marginal)
    };
    let table = if a.measures { table } else { rename(table, &["phi", "pi"]) };
    emit(cli, &head, &table)
}

fn marginal_contour_with_default(joint: &ImPair64, f: &Feature64, phi: f64, subgrid: usize) -> Result<f64> {
    let v = improbe::marginal::marginal_contour_with(joint, f, phi, subgrid)?;
    if v.level_set_empty {
        eprintln!("warning: empty level set at phi={phi}");
    }
    Ok(v.value)
}

pub fn rename(mut t: Table, columns: &[&str]) -> Table {
    t.columns = columns.iter().map(|c| c.to_string()).collect();
    t
}

pub fn severity_table(cmp: &improbe::severity::ProbingComparison<f64>) -> Table {
    let mut t = Table::new(
        &["theta", "severity", "test_im_necessity", "holistic_necessity", "case"],
        PlotStyle::Lines,
    );
    for r in &cmp.rows {
        t.push(&[
            r.theta.to_string(),
            r.severity.to_string(),
            r.test_im_necessity.to_string(),
            r.holistic_necessity.to_string(),
            cmp.case.label().to_string(),
        ]);
    }
    t
}

fn severity(cli: &Cli, a: &SeverityArgs) -> Result<()> {
    let model = NormalMeanModel::new(a.sd)?;
    let fallback = linspace(a.ybar - 6.0 * a.sd, a.ybar + 6.0 * a.sd, a.grid.grid_points.max(2));
    let grid = theta_grid(&a.grid, &fallback)?;
    let cmp = compare_probing(&model, a.ybar, a.theta0, a.alpha, &grid)?;
    let head = header(
        "severity",
        &[
            ("ybar", a.ybar.to_string()),
            ("theta0", a.theta0.to_string()),
            ("sd", a.sd.to_string()),
            ("case", cmp.case.label().to_string()),
            ("grid", grid.len().to_string()),
            ("samples", "10000".to_string()),
            ("seed", cli.seed.to_string()),
            ("alpha", a.alpha.to_string()),
        ],
    );
    emit(cli, &head, &severity_table(&cmp))
}

fn parse_scalar(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| usage(format!("cannot parse parameter value `{text}`")))
}

fn parse_pair(text: &str) -> Result<[f64; 2]> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("table parameter `{text}` should look like 0.5:0.3")))?;
    Ok([parse_scalar(a)?, parse_scalar(b)?])
}

fn policy(a: &ValidateArgs, thetas: &[f64], space: Interval64) -> Option<ProbingPolicy<f64>> {
    a.policy.map(|p| match p {
        PolicyArg::LevelSetAdversary => ProbingPolicy::LevelSetAdversary,
        PolicyArg::FullSpace => ProbingPolicy::FullSpace,
        PolicyArg::FixedFamily => {
            ProbingPolicy::one_sided_family(a.family_start.unwrap_or(thetas[0]), a.family_step, a.family_count)
        }
        PolicyArg::RandomIntervals => {
            let range = if space.is_bounded() {
                space
            } else {
                let lo = thetas.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Interval::closed(lo - 5.0 * a.sd, hi + 5.0 * a.sd)
            };
            ProbingPolicy::RandomIntervals { count: a.random_count, range }
        }
    })
}

fn scalar_audit<M>(a: &ValidateArgs, model: &M, thetas: &[f64], seed: Seed) -> Result<ValidityReport64>
where
    M: ExactCalibration<f64, Param = f64>,
{
    let grid = GridConfig { points: a.points, ..GridConfig::default() };
    let space = model.spec().parameter_space[0];
    if a.error_rates {
        return Ok(audit_error_rates(model, thetas, a.n, &a.alpha, seed, &grid)?);
    }
    match policy(a, thetas, space) {
        Some(p) => Ok(audit_uniform_validity_with(model, thetas, a.n, &a.alpha, &p, seed, &grid)?),
        None => Ok(audit_strong_validity_with(model, thetas, a.n, &a.alpha, seed, a.null_samples)?),
    }
}

fn validate(cli: &Cli, a: &ValidateArgs) -> Result<()> {
    let seed = Seed(cli.seed);
    let report = match a.model {
        ModelKind::Normal => {
            let thetas = a.theta.iter().map(|t| parse_scalar(t)).collect::<Result<Vec<_>>>()?;
            let assumed = NormalMeanModel::new(a.sd)?;
            match a.true_sd {
                Some(sd) => {
                    let model = Misspecified { assumed, truth: NormalMeanModel::new(sd)? };
                    scalar_audit(a, &model, &thetas, seed)?
                }
                None => scalar_audit(a, &assumed, &thetas, seed)?,
            }
        }
        _ if a.true_sd.is_some() => return Err(usage("--true-sd applies to the normal model")),
        ModelKind::Binomial => {
            let thetas = a.theta.iter().map(|t| parse_scalar(t)).collect::<Result<Vec<_>>>()?;
            scalar_audit(a, &BinomialModel::new(a.n_trials)?, &thetas, seed)?
        }
        ModelKind::Correlation => {
            if a.policy.is_some() || a.error_rates {
                return Err(Error::Capability(
                    "set-level audits need an exact contour; the correlation model only supports strong validity".into(),
                )
                .into());
            }
            let thetas = a.theta.iter().map(|t| parse_scalar(t)).collect::<Result<Vec<_>>>()?;
            let model = BivariateCorrelationModel::new(a.pairs)?;
            audit_strong_validity_with(&model, &thetas, a.n, &a.alpha, seed, a.null_samples)?
        }
        ModelKind::Table => {
            if a.policy.is_some() || a.error_rates {
                return Err(Error::Capability("set-level audits are implemented for scalar parameters".into()).into());
            }
            let [r0, r1] = a.rows[..] else {
                return Err(usage("--rows takes two totals"));
            };
            let thetas = a.theta.iter().map(|t| parse_pair(t)).collect::<Result<Vec<_>>>()?;
            audit_strong_validity_with(&TwoByTwoModel::new([r0, r1])?, &thetas, a.n, &a.alpha, seed, a.null_samples)?
        }
    };
    let audit = if a.error_rates {
        "error-rates".to_string()
    } else {
        a.policy.map_or("strong".to_string(), |p| p.to_possible_value().expect("named").get_name().to_string())
    };
    let mut settings = vec![("model", report.model.clone()), ("audit", audit)];
    if let Some(sd) = a.true_sd {
        settings.push(("sd", a.sd.to_string()));
        settings.push(("true_sd", sd.to_string()));
    }
    settings.extend([
        ("replicates", a.n.to_string()),
        ("grid", a.points.to_string()),
        ("samples", a.null_samples.to_string()),
        ("seed", cli.seed.to_string()),
        ("alpha", a.alpha.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")),
    ]);
    let head = header("validate", &settings);
    let mut t = Table::new(&["theta", "alpha", "rate", "se", "pass"], PlotStyle::Lines);
    for c in &report.cells {
        let theta = report.thetas[c.theta_index]
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        t.push(&[theta, c.alpha.to_string(), c.rate.to_string(), c.se.to_string(), c.pass.to_string()]);
    }
    emit(cli, &head, &t)?;
    let mut out = io::stdout().lock();
    for line in report.summary().lines() {
        writeln!(out, "# {line}")?;
    }
    if !report.all_pass() {
        bail!(ValidationFailed(report.failures()));
    }
    Ok(())
}

pub fn unknown_figure(id: &str) -> anyhow::Error {
    usage(format!("unknown figure `{id}`; expected one of fig1a, fig1b, fig2a, fig2b, fig3, fig4, fig5"))
}
