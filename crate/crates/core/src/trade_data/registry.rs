use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-digit SITC Rev. 1 sections.
const SITC1: [(&str, &str); 10] = [
    ("0", "Food and live animals"),
    ("1", "Beverages and tobacco"),
    ("2", "Crude materials, inedible, except fuels"),
    ("3", "Mineral fuels etc"),
    ("4", "Animal and vegetable oils and fats"),
    ("5", "Chemicals and related products, n.e.s."),
    ("6", "Basic manufactures"),
    ("7", "Machinery, transport equipment"),
    ("8", "Miscellaneous manufactured articles"),
    ("9", "Goods not classified elsewhere"),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Product {
    pub code: String,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductRegistry {
    entries: Vec<Product>,
}

impl ProductRegistry {
    /// The ten SITC level-1 product groups used for trade data ingestion.
    pub fn sitc1() -> Self {
        Self {
            entries: SITC1
                .iter()
                .map(|&(code, name)| Product {
                    code: code.to_owned(),
                    name: name.to_owned(),
                })
                .collect(),
        }
    }

    /// A subset of the SITC sections, by code. Synthetic and test networks
    /// use these to keep N_p small.
    pub fn subset(codes: &[&str]) -> Result<Self> {
        let full = Self::sitc1();
        let mut entries = Vec::with_capacity(codes.len());
        for code in codes {
            let p = full
                .entries
                .iter()
                .find(|p| p.code == *code)
                .ok_or_else(|| Error::UnknownProduct((*code).to_owned()))?;
            entries.push(p.clone());
        }
        entries.sort_by(|a, b| a.code.cmp(&b.code));
        if entries.windows(2).any(|w| w[0].code == w[1].code) || entries.is_empty() {
            return Err(Error::InvalidArgument(
                "product codes must be unique and non-empty".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// The first `n` SITC sections.
    pub fn first(n: usize) -> Result<Self> {
        if n == 0 || n > SITC1.len() {
            return Err(Error::InvalidArgument(format!(
                "product count must be in 1..=10, got {n}"
            )));
        }
        let codes: Vec<&str> = SITC1[..n].iter().map(|p| p.0).collect();
        Self::subset(&codes)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Product] {
        &self.entries
    }

    pub fn code(&self, p: usize) -> &str {
        &self.entries[p].code
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.entries.iter().position(|p| p.code == code)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Country {
    /// Stable join key, ISO alpha-3 for real countries.
    pub id: String,
    pub display_name: String,
    /// Two-letter label used in network exports.
    pub short_code: String,
}

impl Country {
    pub fn new(id: &str) -> Self {
        match iso_lookup(id) {
            Some(iso) => Self {
                id: id.to_owned(),
                display_name: iso.name.clone(),
                short_code: iso.alpha2.clone(),
            },
            None => Self {
                id: id.to_owned(),
                display_name: id.to_owned(),
                short_code: id.chars().take(2).collect(),
            },
        }
    }
}

/// Active countries sorted by id, plus the groups that replaced merged members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryRegistry {
    entries: Vec<Country>,
    groups: BTreeMap<String, Vec<String>>,
}

impl CountryRegistry {
    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries: Vec<Country> = ids.into_iter().map(|s| Country::new(s.as_ref())).collect();
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = entries.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidArgument(format!(
                "duplicate country id {:?}",
                w[0].id
            )));
        }
        Ok(Self {
            entries,
            groups: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Country] {
        &self.entries
    }

    pub fn id(&self, c: usize) -> &str {
        &self.entries[c].id
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|c| c.id.as_str())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entries.binary_search_by(|c| c.id.as_str().cmp(id)).ok()
    }

    /// Finds a country by id or, failing that, by its two-letter short code.
    pub fn resolve(&self, token: &str) -> Option<usize> {
        self.index_of(token)
            .or_else(|| self.entries.iter().position(|c| c.short_code == token))
    }

    /// Group label → direct members, for every merge applied so far.
    pub fn groups(&self) -> &BTreeMap<String, Vec<String>> {
        &self.groups
    }

    fn is_known(&self, id: &str) -> bool {
        self.index_of(id).is_some()
            || self.groups.contains_key(id)
            || self.groups.values().any(|m| m.iter().any(|x| x == id))
    }

    /// Active index an origin id now belongs to, following group membership.
    pub(crate) fn resolve_origin(&self, id: &str) -> Option<usize> {
        let mut current = id;
        // Group nesting depth is bounded by the number of groups.
        for _ in 0..=self.groups.len() {
            if let Some(c) = self.index_of(current) {
                return Some(c);
            }
            current = self
                .groups
                .iter()
                .find(|(_, members)| members.iter().any(|m| m == current))
                .map(|(label, _)| label.as_str())?;
        }
        None
    }

    pub(crate) fn merged(&self, members: &[String], label: &str, code: Option<&str>) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::InvalidArgument("group label is empty".into()));
        }
        if self.is_known(label) {
            return Err(Error::LabelCollision(label.to_owned()));
        }
        for m in members {
            if self.index_of(m).is_none() {
                return Err(Error::UnknownCountry(m.clone()));
            }
        }
        let mut entries: Vec<Country> = self
            .entries
            .iter()
            .filter(|c| !members.contains(&c.id))
            .cloned()
            .collect();
        entries.push(Country {
            id: label.to_owned(),
            display_name: label.to_owned(),
            short_code: code
                .map(str::to_owned)
                .unwrap_or_else(|| label.chars().take(2).collect()),
        });
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        let mut groups = self.groups.clone();
        groups.insert(label.to_owned(), members.to_vec());
        Ok(Self { entries, groups })
    }
}

struct IsoCountry {
    alpha3: String,
    alpha2: String,
    name: String,
}

fn iso_table() -> &'static [IsoCountry] {
    static TABLE: OnceLock<Vec<IsoCountry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rdr = csv::Reader::from_reader(include_str!("../../data/countries.csv").as_bytes());
        let mut rows: Vec<IsoCountry> = rdr
            .records()
            .map(|r| {
                let r = r.expect("bundled country table is valid CSV");
                IsoCountry {
                    alpha3: r[0].to_owned(),
                    alpha2: r[1].to_owned(),
                    name: r[2].to_owned(),
                }
            })
            .collect();
        rows.sort_by(|a, b| a.alpha3.cmp(&b.alpha3));
        rows
    })
}

fn iso_lookup(alpha3: &str) -> Option<&'static IsoCountry> {
    let t = iso_table();
    t.binary_search_by(|c| c.alpha3.as_str().cmp(alpha3))
        .ok()
        .map(|i| &t[i])
}

/// Alpha-3 codes of every ISO 3166-1 country, sorted.
pub fn iso_alpha3_codes() -> impl Iterator<Item = &'static str> {
    iso_table().iter().map(|c| c.alpha3.as_str())
}
