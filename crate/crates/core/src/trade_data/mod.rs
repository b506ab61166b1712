//! Trade-flow records, country and product registries, and money matrices.
//!
//! A money matrix `M^p` holds the USD value of product `p` shipped from the
//! exporter (column) to the importer (row). A [`MoneyMatrixSet`] keeps one
//! matrix per product over a shared country registry.

mod ingest;
mod merge;
mod registry;
pub(crate) mod volume;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CscMatrix;

pub use ingest::{ingest_csv, write_csv, IngestReport, TradeFlowRecord, CSV_HEADER};
pub use merge::{merge_country_group, GroupConfig};
pub use registry::{iso_alpha3_codes, Country, CountryRegistry, Product, ProductRegistry};
pub use volume::{volume_probabilities, VolumeProbabilities};

/// Bijection between `(country, product)` pairs and node indices.
///
/// Nodes are laid out product-major, so each product occupies a contiguous
/// block of `n_countries` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeLayout {
    pub n_countries: usize,
    pub n_products: usize,
}

impl NodeLayout {
    pub fn len(&self) -> usize {
        self.n_countries * self.n_products
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, country: usize, product: usize) -> usize {
        debug_assert!(country < self.n_countries && product < self.n_products);
        product * self.n_countries + country
    }

    pub fn country(&self, node: usize) -> usize {
        node % self.n_countries
    }

    pub fn product(&self, node: usize) -> usize {
        node / self.n_countries
    }
}

/// Matrices as they were before any group merge, kept so that merges are
/// always re-summed from the same atoms in the same order.
#[derive(Debug)]
pub(crate) struct Origin {
    pub(crate) ids: Vec<String>,
    pub(crate) matrices: Vec<CscMatrix>,
}

#[derive(Clone, Debug)]
pub struct MoneyMatrixSet {
    year: i32,
    countries: CountryRegistry,
    products: ProductRegistry,
    matrices: Vec<CscMatrix>,
    origin: Arc<Origin>,
}

impl PartialEq for MoneyMatrixSet {
    fn eq(&self, other: &Self) -> bool {
        self.year == other.year
            && self.countries == other.countries
            && self.products == other.products
            && self.matrices == other.matrices
    }
}

impl MoneyMatrixSet {
    /// Validates and wraps one `N_c × N_c` matrix per product.
    pub fn new(
        year: i32,
        countries: CountryRegistry,
        products: ProductRegistry,
        matrices: Vec<CscMatrix>,
    ) -> Result<Self> {
        check_matrices(&countries, &products, &matrices)?;
        let origin = Arc::new(Origin {
            ids: countries.ids().map(str::to_owned).collect(),
            matrices: matrices.clone(),
        });
        Ok(Self {
            year,
            countries,
            products,
            matrices,
            origin,
        })
    }

    /// Builds a set from dense `[product][importer][exporter]` values.
    pub fn from_dense(
        year: i32,
        countries: CountryRegistry,
        products: ProductRegistry,
        dense: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        let n = countries.len();
        let matrices = dense
            .iter()
            .map(|m| {
                if m.len() != n || m.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidArgument(format!(
                        "dense money matrix must be {n}x{n}"
                    )));
                }
                Ok(CscMatrix::from_triplets(
                    n,
                    n,
                    m.iter().enumerate().flat_map(|(i, row)| {
                        row.iter().enumerate().map(move |(e, &v)| (i, e, v))
                    }),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(year, countries, products, matrices)
    }

    /// Same registries, new matrix values. Provenance restarts from the new values.
    pub(crate) fn with_matrices(&self, matrices: Vec<CscMatrix>) -> Result<Self> {
        check_matrices(&self.countries, &self.products, &matrices)?;
        let origin = Arc::new(Origin {
            ids: self.countries.ids().map(str::to_owned).collect(),
            matrices: matrices.clone(),
        });
        Ok(Self {
            year: self.year,
            countries: self.countries.clone(),
            products: self.products.clone(),
            matrices,
            origin,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn countries(&self) -> &CountryRegistry {
        &self.countries
    }

    pub fn products(&self) -> &ProductRegistry {
        &self.products
    }

    pub fn layout(&self) -> NodeLayout {
        NodeLayout {
            n_countries: self.countries.len(),
            n_products: self.products.len(),
        }
    }

    /// `M^p`: rows are importers, columns exporters.
    pub fn matrix(&self, product: usize) -> &CscMatrix {
        &self.matrices[product]
    }

    pub fn matrices(&self) -> &[CscMatrix] {
        &self.matrices
    }

    /// Flow of `product` from `exporter` to `importer`.
    pub fn flow(&self, product: usize, exporter: usize, importer: usize) -> f64 {
        self.matrices[product].get(importer, exporter)
    }

    /// Sum of all entries of `M^p`.
    pub fn product_volume(&self, product: usize) -> f64 {
        self.matrices[product].total()
    }

    pub fn total_volume(&self) -> f64 {
        self.matrices.iter().map(CscMatrix::total).sum()
    }

    pub(crate) fn origin(&self) -> &Origin {
        &self.origin
    }

    pub(crate) fn from_parts(
        year: i32,
        countries: CountryRegistry,
        products: ProductRegistry,
        matrices: Vec<CscMatrix>,
        origin: Arc<Origin>,
    ) -> Self {
        Self {
            year,
            countries,
            products,
            matrices,
            origin,
        }
    }

    pub(crate) fn origin_arc(&self) -> Arc<Origin> {
        Arc::clone(&self.origin)
    }
}

fn check_matrices(
    countries: &CountryRegistry,
    products: &ProductRegistry,
    matrices: &[CscMatrix],
) -> Result<()> {
    if countries.is_empty() || products.is_empty() {
        return Err(Error::EmptyData(": registry is empty".into()));
    }
    if matrices.len() != products.len() {
        return Err(Error::InvalidArgument(format!(
            "{} money matrices for {} products",
            matrices.len(),
            products.len()
        )));
    }
    let n = countries.len();
    for (p, m) in matrices.iter().enumerate() {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "money matrix {p} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
        for (r, c, v) in m.triplets() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "money matrix {p} has invalid entry {v} at ({r}, {c})"
                )));
            }
            if r == c {
                return Err(Error::InvalidArgument(format!(
                    "money matrix {p} has a self-flow for country {}",
                    countries.id(r)
                )));
            }
        }
    }
    Ok(())
}
