use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CountryRegistry, MoneyMatrixSet, ProductRegistry};
use crate::error::{Error, Result};
use crate::sparse::CscMatrix;

pub const CSV_HEADER: [&str; 5] = ["year", "exporter", "importer", "product", "value_usd"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeFlowRecord {
    pub year: i32,
    pub exporter: String,
    pub importer: String,
    pub product: String,
    pub value_usd: f64,
}

/// Counters collected while ingesting a CSV stream.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_other_year: usize,
    pub self_flows_dropped: usize,
    pub duplicates_merged: usize,
    pub countries: usize,
    pub products: usize,
}

/// Reads `year,exporter,importer,product,value_usd` records into money matrices.
///
/// With `year == None` the stream must contain exactly one year. Products are
/// always registered against the full SITC level-1 list so that `N_p = 10`.
pub fn ingest_csv<R: Read>(source: R, year: Option<i32>) -> Result<(MoneyMatrixSet, IngestReport)> {
    let products = ProductRegistry::sitc1();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}, found {:?}", CSV_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut report = IngestReport::default();
    let mut rows: Vec<(i32, String, String, usize, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        report.rows_read += 1;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let parse_err = |message: String| Error::Parse { line, message };
        let row_year: i32 = rec[0]
            .parse()
            .map_err(|_| parse_err(format!("invalid year {:?}", &rec[0])))?;
        let exporter = country_field(&rec[1]).ok_or_else(|| parse_err(format!("invalid exporter {:?}", &rec[1])))?;
        let importer = country_field(&rec[2]).ok_or_else(|| parse_err(format!("invalid importer {:?}", &rec[2])))?;
        let product = products
            .index_of(&rec[3])
            .ok_or_else(|| parse_err(format!("unknown product code {:?}", &rec[3])))?;
        let value: f64 = rec[4]
            .parse()
            .map_err(|_| parse_err(format!("invalid value {:?}", &rec[4])))?;
        if !value.is_finite() {
            return Err(parse_err(format!("non-finite value {:?}", &rec[4])));
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { line, value });
        }
        rows.push((row_year, exporter, importer, product, value));
    }

    let year = match year {
        Some(y) => y,
        None => {
            let years: BTreeSet<i32> = rows.iter().map(|r| r.0).collect();
            match years.len() {
                0 => return Err(Error::EmptyData(String::new())),
                1 => *years.iter().next().unwrap(),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "input holds several years {years:?}; select one"
                    )))
                }
            }
        }
    };

    // Grouped sum keyed by (product, importer, exporter), in first-seen order per key.
    let mut sums: BTreeMap<(usize, String, String), f64> = BTreeMap::new();
    let mut ids: BTreeSet<String> = BTreeSet::new();
    for (row_year, exporter, importer, product, value) in rows {
        if row_year != year {
            report.rows_other_year += 1;
            continue;
        }
        if exporter == importer {
            report.self_flows_dropped += 1;
            continue;
        }
        ids.insert(exporter.clone());
        ids.insert(importer.clone());
        match sums.entry((product, importer, exporter)) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                report.duplicates_merged += 1;
                *e.get_mut() += value;
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
        }
    }
    if report.self_flows_dropped > 0 {
        log::warn!("dropped {} self-flow rows", report.self_flows_dropped);
    }
    if sums.is_empty() {
        return Err(Error::EmptyData(format!(" for year {year}")));
    }

    let countries = CountryRegistry::from_ids(&ids)?;
    let n = countries.len();
    let mut triplets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); products.len()];
    for ((p, importer, exporter), v) in sums {
        let i = countries.index_of(&importer).unwrap();
        let e = countries.index_of(&exporter).unwrap();
        triplets[p].push((i, e, v));
    }
    let matrices = triplets
        .into_iter()
        .map(|t| CscMatrix::from_triplets(n, n, t))
        .collect();
    report.countries = n;
    report.products = products.len();
    let mm = MoneyMatrixSet::new(year, countries, products, matrices)?;
    Ok((mm, report))
}

fn country_field(s: &str) -> Option<String> {
    if s.is_empty() || s.contains(char::is_whitespace) {
        None
    } else {
        Some(s.to_owned())
    }
}

/// Writes the set back out in the ingest format, sorted by exporter, importer
/// and product. Countries without any nonzero flow get a single zero-valued
/// row so the registry survives a round trip.
pub fn write_csv<W: Write>(mm: &MoneyMatrixSet, sink: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(CSV_HEADER)?;
    let countries = mm.countries();
    let mut rows: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut active = vec![false; countries.len()];
    for p in 0..mm.products().len() {
        for (i, e, v) in mm.matrix(p).triplets() {
            active[i] = true;
            active[e] = true;
            rows.push((e, i, p, v));
        }
    }
    if countries.len() > 1 {
        for (c, seen) in active.iter().enumerate() {
            if !seen {
                let partner = if c == 0 { 1 } else { 0 };
                rows.push((c, partner, 0, 0.0));
            }
        }
    }
    rows.sort_by_key(|a| (a.0, a.1, a.2));
    let year = mm.year().to_string();
    for (e, i, p, v) in rows {
        wtr.write_record([
            year.as_str(),
            countries.id(e),
            countries.id(i),
            mm.products().code(p),
            &v.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
