use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MoneyMatrixSet;
use crate::error::{Error, Result};
use crate::sparse::CscMatrix;

/// A country group to be treated as a single trade actor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub label: String,
    /// Optional two-letter label for network exports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    pub members: Vec<String>,
}

impl GroupConfig {
    /// The nine kernel EU countries.
    pub fn keu9() -> Self {
        serde_json::from_str(include_str!("../../data/keu9.json")).expect("bundled KEU9 config")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn apply(&self, mm: &MoneyMatrixSet) -> Result<MoneyMatrixSet> {
        merge_impl(mm, &self.members, &self.label, self.code.as_deref())
    }
}

/// Replaces `members` by one node `label`.
///
/// Flows among members disappear; flows between a member and an outsider are
/// summed onto the group node. The matrices are re-summed from the pre-merge
/// origin in a fixed order, so merging disjoint groups in either order yields
/// bit-identical results.
pub fn merge_country_group<S: AsRef<str>>(
    mm: &MoneyMatrixSet,
    members: &[S],
    label: &str,
) -> Result<MoneyMatrixSet> {
    let members: Vec<String> = members.iter().map(|s| s.as_ref().to_owned()).collect();
    merge_impl(mm, &members, label, None)
}

fn merge_impl(
    mm: &MoneyMatrixSet,
    members: &[String],
    label: &str,
    code: Option<&str>,
) -> Result<MoneyMatrixSet> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("group has no members".into()));
    }
    let mut sorted = members.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != members.len() {
        return Err(Error::InvalidArgument("group lists a member twice".into()));
    }
    let countries = mm.countries().merged(&sorted, label, code)?;
    let origin = mm.origin();
    let map: Vec<usize> = origin
        .ids
        .iter()
        .map(|id| {
            countries
                .resolve_origin(id)
                .expect("every origin id resolves to an active country")
        })
        .collect();
    let n = countries.len();
    let matrices = origin
        .matrices
        .iter()
        .map(|m| {
            CscMatrix::from_triplets(
                n,
                n,
                m.triplets().filter_map(|(i, e, v)| {
                    let (ni, ne) = (map[i], map[e]);
                    (ni != ne).then_some((ni, ne, v))
                }),
            )
        })
        .collect();
    Ok(MoneyMatrixSet::from_parts(
        mm.year(),
        countries,
        mm.products().clone(),
        matrices,
        mm.origin_arc(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade_data::{CountryRegistry, ProductRegistry};

    fn abc() -> MoneyMatrixSet {
        // [importer][exporter]: A→B = 1, A→C = 2, B→C = 3
        let dense = vec![vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![2.0, 3.0, 0.0],
        ]];
        MoneyMatrixSet::from_dense(
            2018,
            CountryRegistry::from_ids(["A", "B", "C"]).unwrap(),
            ProductRegistry::first(1).unwrap(),
            &dense,
        )
        .unwrap()
    }

    #[test]
    fn merge_sums_outside_flows_and_drops_inside() {
        let m = merge_country_group(&abc(), &["A", "B"], "G").unwrap();
        assert_eq!(m.countries().ids().collect::<Vec<_>>(), ["C", "G"]);
        let c = m.countries().index_of("C").unwrap();
        let g = m.countries().index_of("G").unwrap();
        assert_eq!(m.flow(0, g, c), 5.0);
        assert_eq!(m.total_volume(), 5.0);
        assert_eq!(m.countries().groups()["G"], ["A", "B"]);
    }

    #[test]
    fn singleton_merge_is_relabeling() {
        let mm = abc();
        let m = merge_country_group(&mm, &["A"], "G").unwrap();
        // A becomes G, which sorts after B and C.
        let perm = [2usize, 0, 1];
        for e in 0..3 {
            for i in 0..3 {
                assert_eq!(m.flow(0, perm[e], perm[i]), mm.flow(0, e, i));
            }
        }
    }

    #[test]
    fn merge_errors() {
        let mm = abc();
        assert!(matches!(
            merge_country_group(&mm, &["A", "Z"], "G"),
            Err(Error::UnknownCountry(_))
        ));
        assert!(matches!(
            merge_country_group(&mm, &["A", "B"], "C"),
            Err(Error::LabelCollision(_))
        ));
        let m = merge_country_group(&mm, &["A", "B"], "G").unwrap();
        assert!(matches!(
            merge_country_group(&m, &["C"], "A"),
            Err(Error::LabelCollision(_))
        ));
        assert!(merge_country_group::<&str>(&mm, &[], "G").is_err());
    }

    #[test]
    fn nested_merge_resolves_through_groups() {
        let mm = abc();
        let g = merge_country_group(&mm, &["A", "B"], "G").unwrap();
        let h = merge_country_group(&g, &["G", "C"], "H").unwrap();
        assert_eq!(h.countries().len(), 1);
        assert_eq!(h.total_volume(), 0.0);
    }

    #[test]
    fn keu9_config() {
        let k = GroupConfig::keu9();
        assert_eq!(k.label, "KEU9");
        assert_eq!(k.members.len(), 9);
        assert_eq!(k.code.as_deref(), Some("EU"));
        let j = GroupConfig::from_json(r#"{"label":"X","members":["A"]}"#).unwrap();
        assert_eq!(j.code, None);
    }
}
