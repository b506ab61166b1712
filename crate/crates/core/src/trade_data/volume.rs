use serde::{Deserialize, Serialize};

use super::{MoneyMatrixSet, NodeLayout};
use crate::error::{Error, Result};
use crate::ranks::{assign_ranks, node_keys};

/// ImportRank / ExportRank probabilities from raw trade volumes.
///
/// `*_pc` vectors are node-indexed (see [`NodeLayout`]). Each `*_rank_*`
/// vector gives the 1-based rank of the corresponding item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeProbabilities {
    pub layout: NodeLayout,
    pub import_pc: Vec<f64>,
    pub export_pc: Vec<f64>,
    pub import_c: Vec<f64>,
    pub export_c: Vec<f64>,
    pub import_p: Vec<f64>,
    pub export_p: Vec<f64>,
    pub import_rank_pc: Vec<usize>,
    pub export_rank_pc: Vec<usize>,
    pub import_rank_c: Vec<usize>,
    pub export_rank_c: Vec<usize>,
    pub import_rank_p: Vec<usize>,
    pub export_rank_p: Vec<usize>,
}

pub fn volume_probabilities(mm: &MoneyMatrixSet) -> Result<VolumeProbabilities> {
    let total = mm.total_volume();
    if total <= 0.0 {
        return Err(Error::ZeroVolume);
    }
    let layout = mm.layout();
    let mut import_pc = vec![0.0; layout.len()];
    let mut export_pc = vec![0.0; layout.len()];
    for p in 0..layout.n_products {
        let m = mm.matrix(p);
        let rows = m.row_sums();
        let cols = m.column_sums();
        for c in 0..layout.n_countries {
            import_pc[layout.node(c, p)] = rows[c] / total;
            export_pc[layout.node(c, p)] = cols[c] / total;
        }
    }
    let import_c = country_marginal(&import_pc, layout);
    let export_c = country_marginal(&export_pc, layout);
    let import_p = product_marginal(&import_pc, layout);
    let export_p = product_marginal(&export_pc, layout);

    let ckeys: Vec<&str> = mm.countries().ids().collect();
    let pkeys: Vec<&str> = mm.products().entries().iter().map(|p| p.code.as_str()).collect();
    let nkeys = node_keys(mm);
    Ok(VolumeProbabilities {
        layout,
        import_rank_pc: assign_ranks(&import_pc, &nkeys),
        export_rank_pc: assign_ranks(&export_pc, &nkeys),
        import_rank_c: assign_ranks(&import_c, &ckeys),
        export_rank_c: assign_ranks(&export_c, &ckeys),
        import_rank_p: assign_ranks(&import_p, &pkeys),
        export_rank_p: assign_ranks(&export_p, &pkeys),
        import_pc,
        export_pc,
        import_c,
        export_c,
        import_p,
        export_p,
    })
}

/// `P_c = Σ_p P_{cp}`, summed in product order.
pub(crate) fn country_marginal(node_probs: &[f64], layout: NodeLayout) -> Vec<f64> {
    (0..layout.n_countries)
        .map(|c| (0..layout.n_products).map(|p| node_probs[layout.node(c, p)]).sum())
        .collect()
}

/// `P_p = Σ_c P_{cp}`, summed in country order.
pub(crate) fn product_marginal(node_probs: &[f64], layout: NodeLayout) -> Vec<f64> {
    (0..layout.n_products)
        .map(|p| (0..layout.n_countries).map(|c| node_probs[layout.node(c, p)]).sum())
        .collect()
}
