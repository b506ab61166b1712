//! Reduced Google matrix of a node subset.
//!
//! With the nodes split into the selected set `r` and the scattering set `s`,
//!
//! ```text
//! G_R = G_rr + G_rs (1 − G_ss)⁻¹ G_sr
//! ```
//!
//! captures every path between selected nodes through the rest of the
//! network. Splitting the resolvent along the leading eigenpair `λ_c` of
//! `G_ss` (projector `P_c = ψ_R ψ_Lᵀ / ψ_L·ψ_R`, complement `Q_c = 1 − P_c`)
//! gives `G_R = G_rr + G_pr + G_qr` with
//!
//! ```text
//! G_pr = G_rs P_c G_sr / (1 − λ_c)
//! G_qr = G_rs Q_c [Σ_l (Q_c G_ss Q_c)^l] Q_c G_sr
//! ```

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::google::{Direction, GoogleMatrix};
use crate::trade_data::MoneyMatrixSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceOptions {
    pub eigen_tolerance: f64,
    pub eigen_max_iter: usize,
    pub series_tolerance: f64,
    pub series_max_terms: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self {
            eigen_tolerance: 1e-14,
            eigen_max_iter: 100_000,
            series_tolerance: 1e-12,
            series_max_terms: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReduceResiduals {
    /// `max |(1 − G_ss) X − G_sr|` of the block solve.
    pub solve: f64,
    /// `‖G_ss ψ − λ_c ψ‖₁` for the right and left eigenvectors.
    pub eigen_right: f64,
    pub eigen_left: f64,
    /// L1 norm of the last series term kept in `G_qr`.
    pub series_tail: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedGoogleMatrix {
    pub direction: Direction,
    /// Selected node indices, in output order.
    pub nodes: Vec<usize>,
    pub g_r: DMatrix<f64>,
    pub g_rr: DMatrix<f64>,
    pub g_pr: DMatrix<f64>,
    pub g_qr: DMatrix<f64>,
    /// Leading eigenvalue of `G_ss`; `None` when nothing is scattered.
    pub lambda_c: Option<f64>,
    pub series_terms: usize,
    pub residuals: ReduceResiduals,
}

pub fn reduce(g: &GoogleMatrix, selection: &[usize], opts: &ReduceOptions) -> Result<ReducedGoogleMatrix> {
    let n = g.len();
    let nr = selection.len();
    if nr == 0 || nr > n {
        return Err(Error::InvalidArgument(format!(
            "selection must hold 1..={n} nodes, got {nr}"
        )));
    }
    let mut selected = vec![false; n];
    for &i in selection {
        if i >= n {
            return Err(Error::InvalidArgument(format!("node {i} out of range")));
        }
        if std::mem::replace(&mut selected[i], true) {
            return Err(Error::InvalidArgument(format!("node {i} selected twice")));
        }
    }
    let scatter: Vec<usize> = (0..n).filter(|&i| !selected[i]).collect();
    let ns = scatter.len();

    let block = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| g.entry(rows[i], cols[j]))
    };
    let g_rr = block(selection, selection);

    if ns == 0 {
        return Ok(ReducedGoogleMatrix {
            direction: g.direction(),
            nodes: selection.to_vec(),
            g_r: g_rr.clone(),
            g_pr: DMatrix::zeros(nr, nr),
            g_qr: DMatrix::zeros(nr, nr),
            g_rr,
            lambda_c: None,
            series_terms: 0,
            residuals: ReduceResiduals::default(),
        });
    }

    let g_rs = block(selection, &scatter);
    let g_sr = block(&scatter, selection);
    let g_ss = block(&scatter, &scatter);

    // One factorization, N_r right-hand sides.
    let a = DMatrix::identity(ns, ns) - &g_ss;
    let x = a
        .clone()
        .lu()
        .solve(&g_sr)
        .ok_or_else(|| Error::Singular("1 − G_ss is not invertible".into()))?;
    let solve_residual = (&a * &x - &g_sr).amax();
    let g_r = &g_rr + &g_rs * &x;

    let (lambda_c, psi_r, eigen_right) = leading_eigenvector(&g_ss, opts)?;
    let g_ss_t = g_ss.transpose();
    let (lambda_l, psi_l, eigen_left) = leading_eigenvector(&g_ss_t, opts)?;
    if (lambda_c - lambda_l).abs() > 1e-10 {
        return Err(Error::NotConverged {
            what: "left/right eigenvalue agreement",
            iterations: opts.eigen_max_iter,
            residual: (lambda_c - lambda_l).abs(),
        });
    }
    if !(lambda_c < 1.0) {
        return Err(Error::Singular(format!("leading eigenvalue of G_ss is {lambda_c}")));
    }

    let overlap = psi_l.dot(&psi_r);
    let projector_coef = 1.0 / ((1.0 - lambda_c) * overlap);
    let a_vec = &g_rs * &psi_r;
    let b_vec = g_sr.transpose() * &psi_l;
    let g_pr = &a_vec * b_vec.transpose() * projector_coef;

    // Q x = x − ψ_R (ψ_L·x) / (ψ_L·ψ_R), applied column by column.
    let project = |m: &mut DMatrix<f64>| {
        let coefs = m.transpose() * &psi_l / overlap;
        *m -= &psi_r * coefs.transpose();
    };
    let mut term = g_sr.clone();
    project(&mut term);
    let mut sum = term.clone();
    let mut terms = 1;
    let mut tail = l1(&term);
    while tail > opts.series_tolerance {
        if terms >= opts.series_max_terms {
            return Err(Error::NotConverged {
                what: "G_qr series",
                iterations: terms,
                residual: tail,
            });
        }
        term = &g_ss * &term;
        project(&mut term);
        sum += &term;
        terms += 1;
        tail = l1(&term);
    }
    project(&mut sum);
    let g_qr = &g_rs * sum;

    Ok(ReducedGoogleMatrix {
        direction: g.direction(),
        nodes: selection.to_vec(),
        g_r,
        g_rr,
        g_pr,
        g_qr,
        lambda_c: Some(lambda_c),
        series_terms: terms,
        residuals: ReduceResiduals {
            solve: solve_residual,
            eigen_right,
            eigen_left,
            series_tail: tail,
        },
    })
}

fn l1(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).sum()
}

/// Perron root and L1-normalized nonnegative eigenvector of `m` by power iteration.
fn leading_eigenvector(m: &DMatrix<f64>, opts: &ReduceOptions) -> Result<(f64, DVector<f64>, f64)> {
    let n = m.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    // L1 changes cannot drop below accumulated rounding in long vectors.
    let tol = opts.eigen_tolerance.max(4.0 * f64::EPSILON * n as f64);
    let mut change = f64::INFINITY;
    for _ in 0..opts.eigen_max_iter {
        let y = m * &x;
        let lambda = y.sum();
        if !(lambda > 0.0) {
            return Err(Error::Singular("scattering block has no leading eigenvalue".into()));
        }
        let y = y / lambda;
        change = (&y - &x).lp_norm(1);
        x = y;
        if change <= tol {
            let lambda = (m * &x).sum();
            let residual = (m * &x - &x * lambda).lp_norm(1);
            return Ok((lambda, x, residual));
        }
    }
    Err(Error::NotConverged {
        what: "scattering eigenvector",
        iterations: opts.eigen_max_iter,
        residual: change,
    })
}

impl ReducedGoogleMatrix {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Stationary vector of `G_R` on its own (no damping), normalized to one.
    pub fn pagerank(&self, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut change = f64::INFINITY;
        for _ in 0..max_iter {
            let y = &self.g_r * &x;
            let y = &y / y.sum();
            change = (&y - &x).lp_norm(1);
            x = y;
            if change <= tol {
                return Ok(x.iter().copied().collect());
            }
        }
        Err(Error::NotConverged {
            what: "reduced pagerank",
            iterations: max_iter,
            residual: change,
        })
    }

    /// `max |G_rr + G_pr + G_qr − G_R|`.
    pub fn closure_error(&self) -> f64 {
        (&self.g_rr + &self.g_pr + &self.g_qr - &self.g_r).amax()
    }
}

/// All products of each actor, actor-major. Actors are matched by id or two-letter code.
pub fn select_actors<S: AsRef<str>>(mm: &MoneyMatrixSet, actors: &[S]) -> Result<Vec<usize>> {
    let layout = mm.layout();
    let mut nodes = Vec::with_capacity(actors.len() * layout.n_products);
    for a in actors {
        let c = mm
            .countries()
            .resolve(a.as_ref())
            .ok_or_else(|| Error::UnknownCountry(a.as_ref().to_owned()))?;
        for p in 0..layout.n_products {
            nodes.push(layout.node(c, p));
        }
    }
    Ok(nodes)
}

/// Two-letter actor code followed by the product digit, e.g. `EU7`.
pub fn node_labels(mm: &MoneyMatrixSet, nodes: &[usize]) -> Vec<String> {
    let layout = mm.layout();
    nodes
        .iter()
        .map(|&i| {
            format!(
                "{}{}",
                mm.countries().entries()[layout.country(i)].short_code,
                mm.products().code(layout.product(i))
            )
        })
        .collect()
}

/// A directed link `source → target` carrying `weight = m[target][source]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// The `k` largest nonzero off-diagonal entries of every column, ties to the
/// lower target index.
pub fn strongest_links(m: &DMatrix<f64>, k: usize) -> Vec<Link> {
    let mut links = Vec::new();
    for j in 0..m.ncols() {
        let mut col: Vec<(usize, f64)> = (0..m.nrows())
            .filter(|&i| i != j && m[(i, j)] != 0.0)
            .map(|i| (i, m[(i, j)]))
            .collect();
        col.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        links.extend(col.into_iter().take(k).map(|(i, w)| Link {
            source: j,
            target: i,
            weight: w,
        }));
    }
    links
}

/// Graphviz digraph of `links` with node `labels`.
pub fn write_dot<W: Write>(
    links: &[Link],
    labels: &[String],
    name: &str,
    direction: Direction,
    mut sink: W,
) -> Result<()> {
    let meaning = match direction {
        Direction::Direct => "money flows from the exporting source node to the importing target node",
        Direction::Inverted => "the target node exports to the source node (inverted flow)",
    };
    writeln!(sink, "// {name}: {} strongest outgoing links per node", direction.as_str())?;
    writeln!(sink, "// edge u -> v has weight M[v][u], the transition probability from u to v;")?;
    writeln!(sink, "// {meaning}")?;
    writeln!(sink, "digraph {name} {{")?;
    for l in labels {
        writeln!(sink, "  \"{l}\";")?;
    }
    for l in links {
        writeln!(
            sink,
            "  \"{}\" -> \"{}\" [weight={}];",
            labels[l.source], labels[l.target], l.weight
        )?;
    }
    writeln!(sink, "}}")?;
    Ok(())
}

/// Dense matrix as CSV with row and column labels.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, labels: &[String], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["node".to_owned()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        let mut row = vec![labels[i].clone()];
        row.extend((0..m.ncols()).map(|j| m[(i, j)].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
