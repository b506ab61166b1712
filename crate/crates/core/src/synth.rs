//! Seeded synthetic trade data.
//!
//! [`gravity_records`] produces a COMTRADE-like table from a gravity model:
//! flows grow with the economic mass of both partners and fall with
//! distance, modulated by each country's product specialization.
//! [`random_money_set`] draws unstructured sparse networks for property tests.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CscMatrix;
use crate::trade_data::{iso_alpha3_codes, CountryRegistry, MoneyMatrixSet, ProductRegistry, TradeFlowRecord, CSV_HEADER};

/// Countries listed first so small fixtures contain the large economies and
/// the kernel EU members.
const LEADING: [&str; 24] = [
    "USA", "CHN", "DEU", "FRA", "JPN", "RUS", "ITA", "GBR", "KOR", "IND", "NLD", "ESP", "BEL",
    "CAN", "MEX", "BRA", "AUT", "PRT", "LUX", "SAU", "AUS", "CHE", "TUR", "POL",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub year: i32,
    pub n_countries: usize,
    pub n_products: usize,
    /// Probability that a country pair carries no flow of a given product.
    pub sparsity: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            year: 2018,
            n_countries: 24,
            n_products: 10,
            sparsity: 0.3,
        }
    }
}

/// The first `n` fixture country ids.
pub fn country_ids(n: usize) -> Vec<String> {
    let mut ids: Vec<String> = LEADING.iter().take(n).map(|s| (*s).to_owned()).collect();
    ids.extend(
        iso_alpha3_codes()
            .filter(|c| !LEADING.contains(c))
            .take(n.saturating_sub(LEADING.len()))
            .map(str::to_owned),
    );
    ids
}

pub fn gravity_records(cfg: &SynthConfig) -> Result<Vec<TradeFlowRecord>> {
    if cfg.n_countries < 2 || cfg.n_countries > iso_alpha3_codes().count() {
        return Err(Error::InvalidArgument(format!(
            "country count must be in 2..=249, got {}",
            cfg.n_countries
        )));
    }
    if !(0.0..1.0).contains(&cfg.sparsity) {
        return Err(Error::InvalidArgument(format!("sparsity must lie in [0, 1), got {}", cfg.sparsity)));
    }
    let products = ProductRegistry::first(cfg.n_products)?;
    let ids = country_ids(cfg.n_countries);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mass_dist = LogNormal::new(0.0, 1.2).unwrap();
    let noise = LogNormal::new(0.0, 0.5).unwrap();
    let spec_dist = Gamma::new(0.6, 1.0).unwrap();
    let n = ids.len();
    let np = products.len();

    let mass: Vec<f64> = (0..n).map(|_| mass_dist.sample(&mut rng)).collect();
    let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let supply: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..np).map(|_| spec_dist.sample(&mut rng)).collect())
        .collect();
    let demand: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..np).map(|_| spec_dist.sample(&mut rng)).collect())
        .collect();

    let mut records = Vec::new();
    for e in 0..n {
        for i in 0..n {
            if e == i {
                continue;
            }
            let dist = ((pos[e].0 - pos[i].0).powi(2) + (pos[e].1 - pos[i].1).powi(2)).sqrt();
            for p in 0..np {
                let keep = rng.random::<f64>() >= cfg.sparsity;
                let eps = noise.sample(&mut rng);
                if !keep {
                    continue;
                }
                let flow = 1e9 * mass[e] * mass[i].powf(0.8) * supply[e][p] * demand[i][p] * eps
                    / (0.1 + dist);
                let value = flow.round();
                if value > 0.0 {
                    records.push(TradeFlowRecord {
                        year: cfg.year,
                        exporter: ids[e].clone(),
                        importer: ids[i].clone(),
                        product: products.code(p).to_owned(),
                        value_usd: value,
                    });
                }
            }
        }
    }
    Ok(records)
}

pub fn write_records<W: Write>(records: &[TradeFlowRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.year.to_string(),
            r.exporter.clone(),
            r.importer.clone(),
            r.product.clone(),
            r.value_usd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sparse random money matrices with ids `C00, C01, …` and the first
/// `n_products` SITC codes. Each off-diagonal entry is present with
/// probability `density`, with a log-normal value.
pub fn random_money_set(seed: u64, n_countries: usize, n_products: usize, density: f64) -> MoneyMatrixSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..n_countries).map(|i| format!("C{i:02}")).collect();
    let countries = CountryRegistry::from_ids(&ids).expect("distinct ids");
    let products = ProductRegistry::first(n_products).expect("valid product count");
    let value = LogNormal::new(0.0, 1.5).unwrap();
    let matrices = (0..n_products)
        .map(|_| {
            let mut t = Vec::new();
            for e in 0..n_countries {
                for i in 0..n_countries {
                    if i != e && rng.random::<f64>() < density {
                        t.push((i, e, value.sample(&mut rng)));
                    }
                }
            }
            CscMatrix::from_triplets(n_countries, n_countries, t)
        })
        .collect();
    MoneyMatrixSet::new(2018, countries, products, matrices).expect("valid random set")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade_data::ingest_csv;

    #[test]
    fn gravity_is_deterministic() {
        let cfg = SynthConfig {
            n_countries: 8,
            n_products: 3,
            ..SynthConfig::default()
        };
        let a = gravity_records(&cfg).unwrap();
        let b = gravity_records(&cfg).unwrap();
        assert_eq!(a, b);
        let c = gravity_records(&SynthConfig { seed: 7, ..cfg.clone() }).unwrap();
        assert_ne!(a, c);
        let mut buf = Vec::new();
        write_records(&a, &mut buf).unwrap();
        let (mm, rep) = ingest_csv(buf.as_slice(), Some(2018)).unwrap();
        assert_eq!(rep.rows_read, a.len());
        assert_eq!(mm.countries().len(), 8);
        assert!(mm.total_volume() > 0.0);
    }

    #[test]
    fn fixture_ids_cover_keu9() {
        let ids = country_ids(30);
        assert_eq!(ids.len(), 30);
        for m in crate::trade_data::GroupConfig::keu9().members {
            assert!(ids.contains(&m), "{m}");
        }
    }

    #[test]
    fn random_set_shape() {
        let mm = random_money_set(3, 5, 2, 0.5);
        assert_eq!(mm.countries().len(), 5);
        assert_eq!(mm.products().len(), 2);
        assert_eq!(mm, random_money_set(3, 5, 2, 0.5));
    }
}
