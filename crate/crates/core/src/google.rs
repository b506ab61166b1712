//! Direct and inverted multiproduct Google matrices.
//!
//! Node `(c, p)` only links to nodes of the same product `p`; the column of
//! an exporter in `M^p` is normalized to one. Products are coupled only
//! through the teleportation vector `v`, whose mass per product follows that
//! product's share of world trade. Columns without out-flow are replaced by
//! `v`, so the effective matrix is
//!
//! ```text
//! G = α S' + (1 − α) v 1ᵀ,    S' = S + v dᵀ
//! ```
//!
//! with `d` the indicator of dangling columns. `S'` is never materialized.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CscMatrix;
use crate::trade_data::{MoneyMatrixSet, NodeLayout};

pub const DEFAULT_DAMPING: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Money follows trade, from exporter to importer (PageRank).
    Direct,
    /// Transposed flows, importer to exporter (CheiRank).
    Inverted,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Direct => "direct",
            Direction::Inverted => "inverted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoogleMatrix {
    layout: NodeLayout,
    direction: Direction,
    damping: f64,
    stochastic_part: CscMatrix,
    dangling: Vec<bool>,
    personalization: Vec<f64>,
    country_ids: Vec<String>,
    product_codes: Vec<String>,
}

/// `v[(c, p)] = W_p / (N_c · W)` with `W_p` the total traded value of product `p`.
pub fn personalization_vector(mm: &MoneyMatrixSet) -> Result<Vec<f64>> {
    let layout = mm.layout();
    let weights: Vec<f64> = (0..layout.n_products).map(|p| mm.product_volume(p)).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVolume);
    }
    let nc = layout.n_countries as f64;
    let mut v = vec![0.0; layout.len()];
    for (p, w) in weights.iter().enumerate() {
        let share = w / (nc * total);
        for c in 0..layout.n_countries {
            v[layout.node(c, p)] = share;
        }
    }
    Ok(v)
}

pub fn build_google(mm: &MoneyMatrixSet, direction: Direction, damping: f64) -> Result<GoogleMatrix> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1], got {damping}"
        )));
    }
    let layout = mm.layout();
    let personalization = personalization_vector(mm)?;

    let mut triplets = Vec::new();
    for p in 0..layout.n_products {
        let flows = match direction {
            Direction::Direct => mm.matrix(p).clone(),
            Direction::Inverted => mm.matrix(p).transpose(),
        };
        let out = flows.column_sums();
        for (to, from, value) in flows.triplets() {
            triplets.push((layout.node(to, p), layout.node(from, p), value / out[from]));
        }
    }
    let n = layout.len();
    let stochastic_part = CscMatrix::from_triplets(n, n, triplets);
    let dangling = (0..n).map(|j| stochastic_part.column(j).0.is_empty()).collect();

    Ok(GoogleMatrix {
        layout,
        direction,
        damping,
        stochastic_part,
        dangling,
        personalization,
        country_ids: mm.countries().ids().map(str::to_owned).collect(),
        product_codes: mm.products().entries().iter().map(|p| p.code.clone()).collect(),
    })
}

impl GoogleMatrix {
    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn layout(&self) -> NodeLayout {
        self.layout
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// Column-normalized link matrix, with empty dangling columns.
    pub fn stochastic_part(&self) -> &CscMatrix {
        &self.stochastic_part
    }

    pub fn dangling(&self) -> &[bool] {
        &self.dangling
    }

    pub fn personalization(&self) -> &[f64] {
        &self.personalization
    }

    pub fn country_ids(&self) -> &[String] {
        &self.country_ids
    }

    pub fn product_codes(&self) -> &[String] {
        &self.product_codes
    }

    /// `"<country>:<product>"`.
    pub fn node_label(&self, node: usize) -> String {
        format!(
            "{}:{}",
            self.country_ids[self.layout.country(node)],
            self.product_codes[self.layout.product(node)]
        )
    }

    /// `y = G x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.stochastic_part.mul_vec(x);
        let mut dangling_mass = 0.0;
        let mut mass = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            if self.dangling[j] {
                dangling_mass += xj;
            }
            mass += xj;
        }
        let a = self.damping;
        let coef = a * dangling_mass + (1.0 - a) * mass;
        for (yi, &vi) in y.iter_mut().zip(&self.personalization) {
            *yi = a * *yi + coef * vi;
        }
        y
    }

    /// `y = Gᵀ x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.stochastic_part.tr_mul_vec(x);
        let vx: f64 = self.personalization.iter().zip(x).map(|(v, x)| v * x).sum();
        let a = self.damping;
        for (j, yj) in y.iter_mut().enumerate() {
            let d = if self.dangling[j] { a } else { 0.0 };
            *yj = a * *yj + (d + (1.0 - a)) * vx;
        }
        y
    }

    /// Entry `G[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let a = self.damping;
        let s = if self.dangling[j] {
            self.personalization[i]
        } else {
            self.stochastic_part.get(i, j)
        };
        a * s + (1.0 - a) * self.personalization[i]
    }

    /// Dense row-major `G`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// Writes `row col value` lines of `S`, zero-based and sorted row-major.
    pub fn write_coordinates<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut entries: Vec<(usize, usize, f64)> = self.stochastic_part.triplets().collect();
        entries.sort_by_key(|a| (a.0, a.1));
        for (r, c, v) in entries {
            writeln!(sink, "{r} {c} {v}")?;
        }
        Ok(())
    }

    /// JSON sidecar for [`write_coordinates`](Self::write_coordinates).
    pub fn sidecar(&self) -> GoogleSidecar {
        GoogleSidecar {
            direction: self.direction,
            damping: self.damping,
            n_countries: self.layout.n_countries,
            n_products: self.layout.n_products,
            node_index: (0..self.len())
                .map(|i| NodeEntry {
                    index: i,
                    country: self.country_ids[self.layout.country(i)].clone(),
                    product: self.product_codes[self.layout.product(i)].clone(),
                })
                .collect(),
            personalization: self.personalization.clone(),
            dangling: (0..self.len()).filter(|&j| self.dangling[j]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub index: usize,
    pub country: String,
    pub product: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoogleSidecar {
    pub direction: Direction,
    pub damping: f64,
    pub n_countries: usize,
    pub n_products: usize,
    pub node_index: Vec<NodeEntry>,
    pub personalization: Vec<f64>,
    pub dangling: Vec<usize>,
}
