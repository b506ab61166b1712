//! Trade balances and their linear response to price shocks.
//!
//! A shock multiplies part of the money matrices by `1 + δ`; the Google
//! matrices (or volume probabilities) are then rebuilt from scratch, which
//! renormalizes every column. Derivatives are central finite differences of
//! the full pipeline.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::google::{build_google, Direction, DEFAULT_DAMPING};
use crate::ranks::{pagerank, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::trade_data::{volume_probabilities, MoneyMatrixSet};

pub const DEFAULT_STEP: f64 = 0.01;

/// Damping and stopping rule shared by every PageRank solve in a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Description {
    /// CheiRank against PageRank.
    RankBased,
    /// ExportRank against ImportRank.
    VolumeBased,
}

impl Description {
    pub fn as_str(self) -> &'static str {
        match self {
            Description::RankBased => "rank-based",
            Description::VolumeBased => "volume-based",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    /// Price of product `product` changes everywhere.
    GlobalProduct { product: String },
    /// Price of `product` changes for exports of `country` only.
    CountryProduct { product: String, country: String },
    /// All exports of `country` change price.
    LaborCost { country: String },
}

impl Perturbation {
    pub fn target_country(&self) -> Option<&str> {
        match self {
            Perturbation::GlobalProduct { .. } => None,
            Perturbation::CountryProduct { country, .. } | Perturbation::LaborCost { country } => {
                Some(country)
            }
        }
    }

    pub fn product(&self) -> Option<&str> {
        match self {
            Perturbation::GlobalProduct { product } | Perturbation::CountryProduct { product, .. } => {
                Some(product)
            }
            Perturbation::LaborCost { .. } => None,
        }
    }

    /// Resolves codes against `mm`, returning `(product index, country index)`.
    fn resolve(&self, mm: &MoneyMatrixSet) -> Result<(Option<usize>, Option<usize>)> {
        let product = self
            .product()
            .map(|code| {
                mm.products()
                    .index_of(code)
                    .ok_or_else(|| Error::UnknownProduct(code.to_owned()))
            })
            .transpose()?;
        let country = self
            .target_country()
            .map(|id| {
                mm.countries()
                    .resolve(id)
                    .ok_or_else(|| Error::UnknownCountry(id.to_owned()))
            })
            .transpose()?;
        Ok((product, country))
    }
}

/// Scales the money flows selected by `perturbation` by `1 + magnitude`.
///
/// Columns are exporters, so a country-targeted shock touches only that
/// country's column. No renormalization happens here.
pub fn perturb_money(mm: &MoneyMatrixSet, perturbation: &Perturbation, magnitude: f64) -> Result<MoneyMatrixSet> {
    if !(magnitude > -1.0) || !magnitude.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "perturbation magnitude must exceed -1, got {magnitude}"
        )));
    }
    let (product, country) = perturbation.resolve(mm)?;
    let factor = 1.0 + magnitude;
    let matrices = mm
        .matrices()
        .iter()
        .enumerate()
        .map(|(p, m)| {
            if product.is_some_and(|s| s != p) {
                return m.clone();
            }
            match country {
                None => m.map_entries(|_, _, v| v * factor),
                Some(target) => m.map_entries(|_, e, v| if e == target { v * factor } else { v }),
            }
        })
        .collect();
    mm.with_matrices(matrices)
}

/// `(P*_c − P_c) / (P*_c + P_c)`, or `None` where both vanish.
pub fn balance(export_probs: &[f64], import_probs: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(export_probs.len(), import_probs.len());
    export_probs
        .iter()
        .zip(import_probs)
        .map(|(&e, &i)| {
            let s = e + i;
            (s > 0.0).then(|| (e - i) / s)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub description: Description,
    pub year: i32,
    pub countries: Vec<String>,
    pub balances: Vec<Option<f64>>,
}

impl BalanceReport {
    /// `country,balance`; absent balances are written as empty fields.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["country", "balance"])?;
        for (c, b) in self.countries.iter().zip(&self.balances) {
            w.write_record([c.as_str(), &b.map(|x| x.to_string()).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Smallest and largest reported balance.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        let present = self.balances.iter().flatten().copied();
        present.fold(None, |acc, b| match acc {
            None => Some((b, b)),
            Some((lo, hi)) => Some((lo.min(b), hi.max(b))),
        })
    }
}

/// Per-country export and import probabilities under `description`.
pub fn country_probabilities(
    mm: &MoneyMatrixSet,
    description: Description,
    solver: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match description {
        Description::RankBased => {
            let (direct, inverted) = rayon::join(
                || solve(mm, Direction::Direct, solver),
                || solve(mm, Direction::Inverted, solver),
            );
            Ok((inverted?.country_probs, direct?.country_probs))
        }
        Description::VolumeBased => {
            let v = volume_probabilities(mm)?;
            Ok((v.export_c, v.import_c))
        }
    }
}

fn solve(mm: &MoneyMatrixSet, direction: Direction, solver: &SolverConfig) -> Result<crate::ranks::RankVector> {
    let g = build_google(mm, direction, solver.damping)?;
    pagerank(&g, solver.tolerance, solver.max_iter)
}

pub fn compute_balance(mm: &MoneyMatrixSet, description: Description, solver: &SolverConfig) -> Result<BalanceReport> {
    let (export, import) = country_probabilities(mm, description, solver)?;
    Ok(BalanceReport {
        description,
        year: mm.year(),
        countries: mm.countries().ids().map(str::to_owned).collect(),
        balances: balance(&export, &import),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub perturbation: Perturbation,
    pub description: Description,
    pub step: f64,
    pub year: i32,
    pub countries: Vec<String>,
    /// `dB_c/dδ` per country; zero where the balance is undefined.
    pub derivatives: Vec<f64>,
    /// Marks the shocked country itself.
    pub is_diagonal: Vec<bool>,
}

impl SensitivityReport {
    /// Derivative of the shocked country, reported apart from the others.
    pub fn diagonal(&self) -> Option<(usize, f64)> {
        self.is_diagonal
            .iter()
            .position(|&d| d)
            .map(|c| (c, self.derivatives[c]))
    }

    pub fn derivative_of(&self, country: &str) -> Option<f64> {
        self.countries
            .iter()
            .position(|c| c == country)
            .map(|c| self.derivatives[c])
    }

    /// `country,derivative,is_diagonal`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["country", "derivative", "is_diagonal"])?;
        for ((c, d), diag) in self.countries.iter().zip(&self.derivatives).zip(&self.is_diagonal) {
            w.write_record([c.as_str(), &d.to_string(), if *diag { "true" } else { "false" }])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Central difference `(B(+h) − B(−h)) / 2h` of every country balance.
pub fn balance_sensitivity(
    mm: &MoneyMatrixSet,
    perturbation: &Perturbation,
    description: Description,
    step: f64,
    solver: &SolverConfig,
) -> Result<SensitivityReport> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must lie in (0, 1), got {step}"
        )));
    }
    let (_, target) = perturbation.resolve(mm)?;
    let eval = |h: f64| -> Result<Vec<Option<f64>>> {
        let shocked = perturb_money(mm, perturbation, h)?;
        let (export, import) = country_probabilities(&shocked, description, solver)?;
        Ok(balance(&export, &import))
    };
    let (plus, minus) = rayon::join(|| eval(step), || eval(-step));
    let (plus, minus) = (plus?, minus?);
    let derivatives = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| match (p, m) {
            (Some(p), Some(m)) => (p - m) / (2.0 * step),
            _ => 0.0,
        })
        .collect();
    let n = mm.countries().len();
    Ok(SensitivityReport {
        perturbation: perturbation.clone(),
        description,
        step,
        year: mm.year(),
        countries: mm.countries().ids().map(str::to_owned).collect(),
        derivatives,
        is_diagonal: (0..n).map(|c| Some(c) == target).collect(),
    })
}

/// `dB_c/dσ_{c'}` for every shocked country `c'` (rows) and responding country `c` (columns).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaborCostMatrix {
    pub description: Description,
    pub step: f64,
    pub year: i32,
    pub countries: Vec<String>,
    /// `derivatives[target][country]`.
    pub derivatives: Vec<Vec<f64>>,
}

impl LaborCostMatrix {
    /// `dB_c/dσ_c` for every country.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.countries.len()).map(|c| self.derivatives[c][c]).collect()
    }

    /// `target,country,derivative,is_diagonal`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["target", "country", "derivative", "is_diagonal"])?;
        for (t, row) in self.derivatives.iter().enumerate() {
            for (c, d) in row.iter().enumerate() {
                w.write_record([
                    self.countries[t].as_str(),
                    self.countries[c].as_str(),
                    &d.to_string(),
                    if t == c { "true" } else { "false" },
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn labor_cost_matrix(
    mm: &MoneyMatrixSet,
    description: Description,
    step: f64,
    solver: &SolverConfig,
) -> Result<LaborCostMatrix> {
    let ids: Vec<String> = mm.countries().ids().map(str::to_owned).collect();
    let derivatives = ids
        .par_iter()
        .map(|id| {
            let p = Perturbation::LaborCost { country: id.clone() };
            balance_sensitivity(mm, &p, description, step, solver).map(|r| r.derivatives)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LaborCostMatrix {
        description,
        step,
        year: mm.year(),
        countries: ids,
        derivatives,
    })
}

/// Truncation diagnostics for a central difference at `step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepHalving {
    pub step: f64,
    /// Derivatives at `2·step`, `step` and `step/2`.
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub finest: Vec<f64>,
    /// Richardson extrapolation `(4·D(step/2) − D(step)) / 3`.
    pub reference: Vec<f64>,
    /// `‖D(2·step) − ref‖∞ / ‖D(step) − ref‖∞`, close to 4 for a smooth response.
    pub ratio: f64,
}

pub fn step_halving(
    mm: &MoneyMatrixSet,
    perturbation: &Perturbation,
    description: Description,
    step: f64,
    solver: &SolverConfig,
) -> Result<StepHalving> {
    let d = |h: f64| balance_sensitivity(mm, perturbation, description, h, solver).map(|r| r.derivatives);
    let coarse = d(2.0 * step)?;
    let fine = d(step)?;
    let finest = d(step / 2.0)?;
    let reference: Vec<f64> = fine
        .iter()
        .zip(&finest)
        .map(|(f, h)| (4.0 * h - f) / 3.0)
        .collect();
    let err = |x: &[f64]| {
        x.iter()
            .zip(&reference)
            .map(|(a, r)| (a - r).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(&coarse) / err(&fine);
    Ok(StepHalving {
        step,
        coarse,
        fine,
        finest,
        reference,
        ratio,
    })
}
