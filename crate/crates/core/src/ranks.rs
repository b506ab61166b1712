//! PageRank / CheiRank vectors and rank indexes.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::google::GoogleMatrix;
use crate::trade_data::volume::{country_marginal, product_marginal};
use crate::trade_data::{CountryRegistry, MoneyMatrixSet, NodeLayout, VolumeProbabilities};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Stationary vector of a Google matrix with its country and product
/// aggregates. Rank vectors hold the 1-based rank of each item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    pub layout: NodeLayout,
    pub node_probs: Vec<f64>,
    pub country_probs: Vec<f64>,
    pub product_probs: Vec<f64>,
    pub node_rank: Vec<usize>,
    pub country_rank: Vec<usize>,
    pub product_rank: Vec<usize>,
    pub residual: f64,
    pub iterations: usize,
}

impl RankVector {
    /// Aggregates and ranks a node probability vector.
    pub fn from_node_probs(
        layout: NodeLayout,
        node_probs: Vec<f64>,
        country_ids: &[impl AsRef<str>],
        product_codes: &[impl AsRef<str>],
    ) -> Self {
        assert_eq!(node_probs.len(), layout.len());
        let country_probs = country_marginal(&node_probs, layout);
        let product_probs = product_marginal(&node_probs, layout);
        let ckeys: Vec<&str> = country_ids.iter().map(AsRef::as_ref).collect();
        let pkeys: Vec<&str> = product_codes.iter().map(AsRef::as_ref).collect();
        let nkeys = layout_keys(layout, &ckeys, &pkeys);
        Self {
            layout,
            node_rank: assign_ranks(&node_probs, &nkeys),
            country_rank: assign_ranks(&country_probs, &ckeys),
            product_rank: assign_ranks(&product_probs, &pkeys),
            node_probs,
            country_probs,
            product_probs,
            residual: 0.0,
            iterations: 0,
        }
    }
}

/// Power iteration `P ← G P` started from the personalization vector.
///
/// Stops at the first iterate whose L1 change is at most `tol`.
pub fn pagerank(g: &GoogleMatrix, tol: f64, max_iter: usize) -> Result<RankVector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let mut x = g.personalization().to_vec();
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        let mut y = g.apply(&x);
        let s: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= s);
        residual = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if residual <= tol {
            let mut rv = RankVector::from_node_probs(g.layout(), x, g.country_ids(), g.product_codes());
            rv.residual = residual;
            rv.iterations = k;
            return Ok(rv);
        }
    }
    Err(Error::NotConverged {
        what: "pagerank",
        iterations: max_iter,
        residual,
    })
}

/// 1-based rank of each entry by descending probability; ties go to the
/// smaller key.
pub fn assign_ranks<K: Ord>(probs: &[f64], keys: &[K]) -> Vec<usize> {
    assert_eq!(probs.len(), keys.len());
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| {
        probs[b]
            .partial_cmp(&probs[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| keys[a].cmp(&keys[b]))
    });
    let mut rank = vec![0; probs.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

/// Item indices ordered by rank (inverse of [`assign_ranks`]).
pub fn rank_order(rank: &[usize]) -> Vec<usize> {
    let mut order = vec![0; rank.len()];
    for (i, &r) in rank.iter().enumerate() {
        order[r - 1] = i;
    }
    order
}

fn layout_keys<'a>(layout: NodeLayout, countries: &[&'a str], products: &[&'a str]) -> Vec<(&'a str, &'a str)> {
    (0..layout.len())
        .map(|i| (countries[layout.country(i)], products[layout.product(i)]))
        .collect()
}

/// Tie-break keys `(country id, product code)` for every node.
pub fn node_keys(mm: &MoneyMatrixSet) -> Vec<(&str, &str)> {
    let c: Vec<&str> = mm.countries().ids().collect();
    let p: Vec<&str> = mm.products().entries().iter().map(|e| e.code.as_str()).collect();
    layout_keys(mm.layout(), &c, &p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    pub pagerank_country: String,
    pub cheirank_country: String,
    pub importrank_country: String,
    pub exportrank_country: String,
}

/// Top countries under PageRank, CheiRank, ImportRank and ExportRank.
///
/// `top` is clipped to the number of countries.
pub fn rank_table(
    direct: &RankVector,
    inverted: &RankVector,
    volumes: &VolumeProbabilities,
    countries: &CountryRegistry,
    top: usize,
) -> Result<Vec<RankRow>> {
    let n = countries.len();
    for len in [
        direct.country_rank.len(),
        inverted.country_rank.len(),
        volumes.import_rank_c.len(),
        volumes.export_rank_c.len(),
    ] {
        if len != n {
            return Err(Error::InvalidArgument(format!(
                "rank vector covers {len} countries, registry has {n}"
            )));
        }
    }
    let name = |c: usize| countries.entries()[c].display_name.clone();
    let k = rank_order(&direct.country_rank);
    let ks = rank_order(&inverted.country_rank);
    let ki = rank_order(&volumes.import_rank_c);
    let ke = rank_order(&volumes.export_rank_c);
    Ok((0..top.min(n))
        .map(|r| RankRow {
            rank: r + 1,
            pagerank_country: name(k[r]),
            cheirank_country: name(ks[r]),
            importrank_country: name(ki[r]),
            exportrank_country: name(ke[r]),
        })
        .collect())
}

/// A country's position on the (K, K*) and (K̂, K̂*) planes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub country: String,
    pub k: usize,
    pub k_star: usize,
    pub k_import: usize,
    pub k_export: usize,
}

pub fn plane_coordinates(
    direct: &RankVector,
    inverted: &RankVector,
    volumes: &VolumeProbabilities,
    countries: &CountryRegistry,
) -> Vec<PlanePoint> {
    countries
        .ids()
        .enumerate()
        .map(|(c, id)| PlanePoint {
            country: id.to_owned(),
            k: direct.country_rank[c],
            k_star: inverted.country_rank[c],
            k_import: volumes.import_rank_c[c],
            k_export: volumes.export_rank_c[c],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::google::{build_google, Direction};
    use crate::trade_data::{volume_probabilities, ProductRegistry};

    #[test]
    fn sorted_input_keeps_order() {
        assert_eq!(assign_ranks(&[0.5, 0.3, 0.2], &["a", "b", "c"]), vec![1, 2, 3]);
    }

    #[test]
    fn ties_go_to_smaller_key() {
        assert_eq!(assign_ranks(&[0.4, 0.4, 0.2], &["B", "A", "C"]), vec![2, 1, 3]);
    }

    #[test]
    fn rank_order_inverts() {
        let r = assign_ranks(&[0.1, 0.7, 0.2], &[0, 1, 2]);
        assert_eq!(r, vec![3, 1, 2]);
        assert_eq!(rank_order(&r), vec![1, 2, 0]);
    }

    fn two_country(x: f64, y: f64) -> MoneyMatrixSet {
        MoneyMatrixSet::from_dense(
            2018,
            CountryRegistry::from_ids(["AAA", "BBB"]).unwrap(),
            ProductRegistry::first(1).unwrap(),
            &[vec![vec![0.0, y], vec![x, 0.0]]],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_pair_is_uniform() {
        let g = build_google(&two_country(3.0, 3.0), Direction::Direct, 0.5).unwrap();
        let p = pagerank(&g, 1e-12, 100).unwrap();
        assert_eq!(p.node_probs, vec![0.5, 0.5]);
        assert_eq!(p.country_rank, vec![1, 2]);
        assert_eq!(p.iterations, 1);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let mm = MoneyMatrixSet::from_dense(
            2018,
            CountryRegistry::from_ids(["A", "B", "C"]).unwrap(),
            ProductRegistry::first(1).unwrap(),
            &[vec![vec![0.0, 1.0, 0.0], vec![5.0, 0.0, 2.0], vec![1.0, 0.0, 0.0]]],
        )
        .unwrap();
        let g = build_google(&mm, Direction::Direct, 0.99).unwrap();
        match pagerank(&g, 1e-15, 2) {
            Err(Error::NotConverged { iterations: 2, residual, .. }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
        assert!(pagerank(&g, 0.0, 10).is_err());
        assert!(pagerank(&g, 1e-12, 0).is_err());
    }

    #[test]
    fn single_country_table() {
        let countries = CountryRegistry::from_ids(["USA"]).unwrap();
        let layout = NodeLayout { n_countries: 1, n_products: 1 };
        let rv = RankVector::from_node_probs(layout, vec![1.0], &["USA"], &["0"]);
        let volumes = VolumeProbabilities {
            layout,
            import_pc: vec![1.0],
            export_pc: vec![1.0],
            import_c: vec![1.0],
            export_c: vec![1.0],
            import_p: vec![1.0],
            export_p: vec![1.0],
            import_rank_pc: vec![1],
            export_rank_pc: vec![1],
            import_rank_c: vec![1],
            export_rank_c: vec![1],
            import_rank_p: vec![1],
            export_rank_p: vec![1],
        };
        let t = rank_table(&rv, &rv, &volumes, &countries, 5).unwrap();
        assert_eq!(t.len(), 1);
        let name = "United States";
        assert_eq!(
            t[0],
            RankRow {
                rank: 1,
                pagerank_country: name.into(),
                cheirank_country: name.into(),
                importrank_country: name.into(),
                exportrank_country: name.into(),
            }
        );
    }

    #[test]
    fn table_rejects_mismatched_registry() {
        let mm = two_country(1.0, 2.0);
        let g = build_google(&mm, Direction::Direct, 0.5).unwrap();
        let p = pagerank(&g, 1e-12, 1000).unwrap();
        let v = volume_probabilities(&mm).unwrap();
        let other = CountryRegistry::from_ids(["X"]).unwrap();
        assert!(rank_table(&p, &p, &v, &other, 2).is_err());
    }
}
