use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};

use serde::Serialize;

use tradegm_core::google::{build_google, Direction};
use tradegm_core::ranks::{pagerank, plane_coordinates, rank_table, RankVector};
use tradegm_core::regomax::{
    node_labels, reduce, select_actors, strongest_links, write_dot, write_matrix_csv, ReduceOptions,
    ReducedGoogleMatrix,
};
use tradegm_core::sensitivity::{
    balance_sensitivity, compute_balance, labor_cost_matrix, Description, Perturbation, SolverConfig,
};
use tradegm_core::synth::{gravity_records, write_records, SynthConfig};
use tradegm_core::trade_data::{ingest_csv, volume_probabilities, write_csv, GroupConfig, MoneyMatrixSet};

use crate::{Cli, Command, Format, PerturbKind};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<tradegm_core::Error> for CliError {
    fn from(e: tradegm_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn run(cli: &Cli) -> Result<()> {
    validate(cli)?;
    fs::create_dir_all(&cli.out_dir)?;
    match &cli.command {
        Command::Synth { countries, products, sparsity } => synth(cli, *countries, *products, *sparsity),
        Command::Ingest => ingest(cli),
        Command::Merge => merge(cli),
        Command::Rank { top, dump_matrix } => rank(cli, *top, *dump_matrix),
        Command::Balance => balance(cli),
        Command::Sensitivity { perturb, product, target, all_targets } => {
            sensitivity(cli, *perturb, product.as_deref(), target.as_deref(), *all_targets)
        }
        Command::Regomax { actors, k } => regomax(cli, actors, *k),
    }
}

fn validate(cli: &Cli) -> Result<()> {
    if !(cli.alpha > 0.0 && cli.alpha <= 1.0) {
        return Err(invalid(format!("--alpha must lie in (0, 1], got {}", cli.alpha)));
    }
    if !(cli.tol > 0.0) {
        return Err(invalid(format!("--tol must be positive, got {}", cli.tol)));
    }
    if cli.max_iter == 0 {
        return Err(invalid("--max-iter must be at least 1"));
    }
    if !(cli.step > 0.0 && cli.step < 1.0) {
        return Err(invalid(format!("--step must lie in (0, 1), got {}", cli.step)));
    }
    Ok(())
}

fn solver(cli: &Cli) -> SolverConfig {
    SolverConfig {
        damping: cli.alpha,
        tolerance: cli.tol,
        max_iter: cli.max_iter,
    }
}

/// Ingests `--input` and applies `--merge-config` when given.
fn load(cli: &Cli) -> Result<MoneyMatrixSet> {
    let (mm, _) = load_raw(cli)?;
    match &cli.merge_config {
        Some(path) => Ok(GroupConfig::load(path)?.apply(&mm)?),
        None => Ok(mm),
    }
}

fn load_raw(cli: &Cli) -> Result<(MoneyMatrixSet, tradegm_core::trade_data::IngestReport)> {
    let path = cli.input.as_ref().ok_or_else(|| invalid("--input is required"))?;
    let file = File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(ingest_csv(std::io::BufReader::new(file), cli.year)?)
}

fn create(cli: &Cli, name: &str) -> Result<BufWriter<File>> {
    let path = cli.out_dir.join(name);
    let f = File::create(&path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(cli: &Cli, name: &str, value: &T) -> Result<()> {
    let mut w = create(cli, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_rows<T: Serialize>(cli: &Cli, name: &str, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(cli, name)?);
    for r in rows {
        w.serialize(r).map_err(|e| invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn synth(cli: &Cli, countries: usize, products: usize, sparsity: f64) -> Result<()> {
    let cfg = SynthConfig {
        seed: cli.seed,
        year: cli.year.unwrap_or(2018),
        n_countries: countries,
        n_products: products,
        sparsity,
    };
    let records = gravity_records(&cfg)?;
    let mut w = create(cli, "trade_flows.csv")?;
    write_records(&records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn ingest(cli: &Cli) -> Result<()> {
    let (mm, report) = load_raw(cli)?;
    let mut w = create(cli, "flows.csv")?;
    write_csv(&mm, &mut w)?;
    w.flush()?;
    write_json(cli, "ingest_report.json", &report)
}

fn merge(cli: &Cli) -> Result<()> {
    if cli.merge_config.is_none() {
        return Err(invalid("merge needs --merge-config"));
    }
    let mm = load(cli)?;
    let mut w = create(cli, "flows_merged.csv")?;
    write_csv(&mm, &mut w)?;
    w.flush()?;
    Ok(())
}

fn ranks(mm: &MoneyMatrixSet, cli: &Cli) -> Result<(RankVector, RankVector)> {
    let g = build_google(mm, Direction::Direct, cli.alpha)?;
    let gs = build_google(mm, Direction::Inverted, cli.alpha)?;
    Ok((pagerank(&g, cli.tol, cli.max_iter)?, pagerank(&gs, cli.tol, cli.max_iter)?))
}

fn rank(cli: &Cli, top: usize, dump_matrix: bool) -> Result<()> {
    let mm = load(cli)?;
    let (p, ps) = ranks(&mm, cli)?;
    let v = volume_probabilities(&mm)?;
    let table = rank_table(&p, &ps, &v, mm.countries(), top)?;
    let plane = plane_coordinates(&p, &ps, &v, mm.countries());
    match cli.format {
        Format::Csv => {
            write_rows(cli, "rank_table.csv", &table)?;
            write_rows(cli, "rank_plane.csv", &plane)?;
        }
        Format::Json => {
            write_json(cli, "rank_table.json", &table)?;
            write_json(cli, "rank_plane.json", &plane)?;
        }
    }
    if dump_matrix {
        for dir in [Direction::Direct, Direction::Inverted] {
            let g = build_google(&mm, dir, cli.alpha)?;
            let mut w = create(cli, &format!("google_{}.coo", dir.as_str()))?;
            g.write_coordinates(&mut w)?;
            w.flush()?;
            write_json(cli, &format!("google_{}.json", dir.as_str()), &g.sidecar())?;
        }
    }
    Ok(())
}

fn balance(cli: &Cli) -> Result<()> {
    let mm = load(cli)?;
    let solver = solver(cli);
    let rank_based = compute_balance(&mm, Description::RankBased, &solver)?;
    let volume_based = compute_balance(&mm, Description::VolumeBased, &solver)?;
    match cli.format {
        Format::Csv => {
            let mut w = create(cli, "balance_rank.csv")?;
            rank_based.write_csv(&mut w)?;
            w.flush()?;
            let mut w = create(cli, "balance_volume.csv")?;
            volume_based.write_csv(&mut w)?;
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Both<'a, T> {
                rank_based: &'a T,
                volume_based: &'a T,
            }
            write_json(cli, "balance.json", &Both { rank_based: &rank_based, volume_based: &volume_based })?;
        }
    }
    Ok(())
}

fn sensitivity(
    cli: &Cli,
    kind: PerturbKind,
    product: Option<&str>,
    target: Option<&str>,
    all_targets: bool,
) -> Result<()> {
    let mm = load(cli)?;
    let solver = solver(cli);
    let need = |v: Option<&str>, flag: &str| {
        v.map(str::to_owned)
            .ok_or_else(|| invalid(format!("--perturb {kind:?} needs --{flag}").to_lowercase()))
    };

    if all_targets {
        if kind != PerturbKind::Labor {
            return Err(invalid("--all-targets applies to --perturb labor only"));
        }
        for (desc, stem) in [(Description::RankBased, "rank"), (Description::VolumeBased, "volume")] {
            let m = labor_cost_matrix(&mm, desc, cli.step, &solver)?;
            match cli.format {
                Format::Csv => {
                    let mut w = create(cli, &format!("labor_{stem}.csv"))?;
                    m.write_csv(&mut w)?;
                    w.flush()?;
                }
                Format::Json => write_json(cli, &format!("labor_{stem}.json"), &m)?,
            }
        }
        return Ok(());
    }

    let perturbation = match kind {
        PerturbKind::Global => Perturbation::GlobalProduct { product: need(product, "product")? },
        PerturbKind::Country => Perturbation::CountryProduct {
            product: need(product, "product")?,
            country: resolve_id(&mm, &need(target, "target")?)?,
        },
        PerturbKind::Labor => Perturbation::LaborCost {
            country: resolve_id(&mm, &need(target, "target")?)?,
        },
    };
    let rank_based = balance_sensitivity(&mm, &perturbation, Description::RankBased, cli.step, &solver)?;
    let volume_based = balance_sensitivity(&mm, &perturbation, Description::VolumeBased, cli.step, &solver)?;
    match cli.format {
        Format::Csv => {
            let mut w = create(cli, "sensitivity_rank.csv")?;
            rank_based.write_csv(&mut w)?;
            w.flush()?;
            let mut w = create(cli, "sensitivity_volume.csv")?;
            volume_based.write_csv(&mut w)?;
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Both<'a, T> {
                perturbation: &'a Perturbation,
                step: f64,
                rank_based: &'a T,
                volume_based: &'a T,
            }
            write_json(
                cli,
                "sensitivity.json",
                &Both {
                    perturbation: &perturbation,
                    step: cli.step,
                    rank_based: &rank_based,
                    volume_based: &volume_based,
                },
            )?;
        }
    }
    Ok(())
}

/// Country id for an id or two-letter code.
fn resolve_id(mm: &MoneyMatrixSet, token: &str) -> Result<String> {
    mm.countries()
        .resolve(token)
        .map(|c| mm.countries().id(c).to_owned())
        .ok_or_else(|| invalid(format!("unknown country {token:?}")))
}

#[derive(Serialize)]
struct RegomaxSummary<'a> {
    direction: Direction,
    n_r: usize,
    nodes: &'a [String],
    lambda_c: Option<f64>,
    series_terms: usize,
    solve_residual: f64,
    eigen_residual_right: f64,
    eigen_residual_left: f64,
    series_tail: f64,
    closure_error: f64,
}

fn regomax(cli: &Cli, actors: &[String], k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("--k must be at least 1"));
    }
    let mm = load(cli)?;
    let nodes = select_actors(&mm, actors)?;
    let labels = node_labels(&mm, &nodes);
    let mut summaries = Vec::new();
    let reduced: Vec<ReducedGoogleMatrix> = [Direction::Direct, Direction::Inverted]
        .into_iter()
        .map(|dir| {
            let g = build_google(&mm, dir, cli.alpha)?;
            Ok(reduce(&g, &nodes, &ReduceOptions::default())?)
        })
        .collect::<Result<_>>()?;
    for r in &reduced {
        let dir = r.direction.as_str();
        for (name, m) in [("gr", &r.g_r), ("grr", &r.g_rr), ("gpr", &r.g_pr), ("gqr", &r.g_qr)] {
            let mut w = create(cli, &format!("{name}_{dir}.csv"))?;
            write_matrix_csv(m, &labels, &mut w)?;
            w.flush()?;
        }
        let links = strongest_links(&r.g_r, k);
        let mut w = create(cli, &format!("links_{dir}.dot"))?;
        write_dot(&links, &labels, &format!("gr_{dir}"), r.direction, &mut w)?;
        w.flush()?;
        summaries.push(RegomaxSummary {
            direction: r.direction,
            n_r: r.len(),
            nodes: &labels,
            lambda_c: r.lambda_c,
            series_terms: r.series_terms,
            solve_residual: r.residuals.solve,
            eigen_residual_right: r.residuals.eigen_right,
            eigen_residual_left: r.residuals.eigen_left,
            series_tail: r.residuals.series_tail,
            closure_error: r.closure_error(),
        });
    }
    write_json(cli, "regomax.json", &summaries)?;
    eprintln!("reduced matrices of size N_r = {}", nodes.len());
    Ok(())
}
