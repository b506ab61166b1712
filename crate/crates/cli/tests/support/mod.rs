//! Dense reference computations built directly from the definitions.
#![allow(dead_code)]

use tradegm_core::trade_data::MoneyMatrixSet;

pub type Dense = Vec<Vec<f64>>;

/// Dense money matrices `[p][importer][exporter]`.
pub fn dense_money(mm: &MoneyMatrixSet) -> Vec<Dense> {
    let n = mm.countries().len();
    (0..mm.products().len())
        .map(|p| (0..n).map(|i| (0..n).map(|e| mm.flow(p, e, i)).collect()).collect())
        .collect()
}

/// Google matrix and personalization vector, node `(c, p)` at `p·N_c + c`.
pub fn dense_google(money: &[Dense], inverted: bool, alpha: f64) -> (Dense, Vec<f64>) {
    let np = money.len();
    let nc = money[0].len();
    let n = nc * np;
    let flow = |p: usize, from: usize, to: usize| {
        if inverted {
            money[p][from][to]
        } else {
            money[p][to][from]
        }
    };
    let w: Vec<f64> = money.iter().map(|m| m.iter().flatten().sum::<f64>()).collect();
    let total: f64 = w.iter().sum();
    let v: Vec<f64> = (0..n).map(|i| w[i / nc] / (nc as f64 * total)).collect();
    let mut g = vec![vec![0.0; n]; n];
    for j in 0..n {
        let (p, from) = (j / nc, j % nc);
        let out: f64 = (0..nc).map(|to| flow(p, from, to)).sum();
        for i in 0..n {
            let s = match (out > 0.0, i / nc == p) {
                (true, true) => flow(p, from, i % nc) / out,
                (true, false) => 0.0,
                (false, _) => v[i],
            };
            g[i][j] = alpha * s + (1.0 - alpha) * v[i];
        }
    }
    (g, v)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular matrix");
        m[col].iter_mut().for_each(|x| *x /= d);
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (k, m) = (b.len(), b[0].len());
    a.iter()
        .map(|row| (0..m).map(|j| (0..k).map(|l| row[l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn submatrix(a: &Dense, rows: &[usize], cols: &[usize]) -> Dense {
    rows.iter().map(|&i| cols.iter().map(|&j| a[i][j]).collect()).collect()
}

/// Solves `(1 − αS')P = (1 − α)v`, recovering `αS'` as `G − (1 − α)v1ᵀ`.
pub fn dense_pagerank(g: &Dense, v: &[f64], alpha: f64) -> Vec<f64> {
    let n = g.len();
    let a: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let alpha_s = g[i][j] - (1.0 - alpha) * v[i];
                    if i == j { 1.0 - alpha_s } else { -alpha_s }
                })
                .collect()
        })
        .collect();
    let inv = inverse(&a);
    let mut p: Vec<f64> = inv
        .iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * (1.0 - alpha) * y).sum())
        .collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

pub fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
