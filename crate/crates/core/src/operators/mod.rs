//! Finite-volume Schrödinger operators `H = A + V` on graph balls.

mod eigen;
pub mod moments;

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::RootedBallGraph;
use crate::potentials::{evaluate_potential, sup_norm, PotentialSpec};
pub use moments::{chebyshev_moments, finite_range_check, power_moments, MomentTable};

pub const DENSE_CAP: usize = 6000;
pub const TRIDIAGONAL_CAP: usize = 200_000;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    graph: Arc<RootedBallGraph>,
    potential: Vec<f64>,
}

pub fn assemble_hamiltonian(graph: Arc<RootedBallGraph>, spec: &PotentialSpec) -> Result<Hamiltonian> {
    let v = evaluate_potential(spec, &graph)?;
    Hamiltonian::new(graph, v)
}

/// Which eigenvector components to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VectorRows {
    None,
    All,
    Rows(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub vectors: VectorRows,
    pub dense_cap: usize,
    pub tridiagonal_cap: usize,
    /// QL iterations allowed per eigenvalue.
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { vectors: VectorRows::None, dense_cap: DENSE_CAP, tridiagonal_cap: TRIDIAGONAL_CAP, max_iter: 30 }
    }
}

impl EigenOptions {
    pub fn with_vectors(vectors: VectorRows) -> Self {
        EigenOptions { vectors, ..Default::default() }
    }
}

/// Eigenvalues in ascending order and, optionally, eigenvector components on
/// a subset of vertices.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub rows: Vec<usize>,
    /// `vectors[j * rows.len() + s]` is component `rows[s]` of eigenvector `j`.
    pub vectors: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn component(&self, j: usize, s: usize) -> f64 {
        self.vectors[j * self.rows.len() + s]
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        let w = self.rows.len();
        &self.vectors[j * w..(j + 1) * w]
    }

    /// `sum_s |psi_j(rows[s])|^2` for each eigenvector.
    pub fn row_weights(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.vector(j).iter().map(|x| x * x).sum()).collect()
    }

    /// CSV with one line per eigenvalue.
    pub fn write_eigenvalues_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "eigenvalue"])?;
        for (i, x) in self.values.iter().enumerate() {
            out.write_record([i.to_string(), x.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl Hamiltonian {
    pub fn new(graph: Arc<RootedBallGraph>, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != graph.len() {
            return Err(Error::LengthMismatch { expected: graph.len(), got: potential.len() });
        }
        if potential.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite potential value".into()));
        }
        Ok(Hamiltonian { graph, potential })
    }

    pub fn free(graph: Arc<RootedBallGraph>) -> Self {
        let n = graph.len();
        Hamiltonian { graph, potential: vec![0.0; n] }
    }

    pub fn graph(&self) -> &RootedBallGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<RootedBallGraph> {
        &self.graph
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn potential_sup(&self) -> f64 {
        sup_norm(&self.potential)
    }

    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    /// Same graph, new potential.
    pub fn with_potential(&self, potential: Vec<f64>) -> Result<Self> {
        Hamiltonian::new(self.graph.clone(), potential)
    }

    /// `H + lambda * delta_z delta_z^T`.
    pub fn add_site(&self, z: usize, lambda: f64) -> Result<Self> {
        self.graph.check_vertex(z)?;
        let mut v = self.potential.clone();
        v[z] += lambda;
        self.with_potential(v)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: x.len() });
        }
        let mut y = vec![0.0; x.len()];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (v, yv) in y.iter_mut().enumerate() {
            let s: f64 = self.graph.neighbors(v).iter().map(|&u| x[u as usize]).sum();
            *yv = s + self.potential[v] * x[v];
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in 0..self.len() {
            let r = self.graph.degree(v) as f64;
            lo = lo.min(self.potential[v] - r);
            hi = hi.max(self.potential[v] + r);
        }
        (lo, hi)
    }

    /// `P_L H P_L` on `Λ_L(0)`.
    pub fn restrict(&self, l: u32) -> Result<Hamiltonian> {
        let sub = self.graph.sub_ball(l)?;
        let n = sub.len();
        Ok(Hamiltonian { graph: Arc::new(sub), potential: self.potential[..n].to_vec() })
    }

    /// Dense row-major matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![0.0; n * n];
        for v in 0..n {
            a[v * n + v] = self.potential[v];
            for &u in self.graph.neighbors(v) {
                a[v * n + u as usize] = 1.0;
            }
        }
        a
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig(&EigenOptions::default())?.values)
    }

    pub fn eig(&self, opts: &EigenOptions) -> Result<SpectralDecomposition> {
        let n = self.len();
        let rows: Vec<usize> = match &opts.vectors {
            VectorRows::None => Vec::new(),
            VectorRows::All => (0..n).collect(),
            VectorRows::Rows(r) => {
                for &v in r {
                    self.graph.check_vertex(v)?;
                }
                r.clone()
            }
        };
        let want = !matches!(opts.vectors, VectorRows::None);
        let w = rows.len();
        let max_iter = opts.max_iter;
        if let Some(order) = self.graph.path_order() {
            if n > opts.tridiagonal_cap {
                return Err(Error::DimensionCap { n, cap: opts.tridiagonal_cap });
            }
            let mut d: Vec<f64> = order.iter().map(|&v| self.potential[v]).collect();
            let mut e = vec![1.0; n];
            let mut z = Vec::new();
            if want {
                let mut pos = vec![0usize; n];
                for (p, &v) in order.iter().enumerate() {
                    pos[v] = p;
                }
                z = vec![0.0; n * w];
                for (s, &v) in rows.iter().enumerate() {
                    z[pos[v] * w + s] = 1.0;
                }
            }
            let rot = want.then(|| eigen::Rotated { data: &mut z, width: w });
            eigen::tql(&mut d, &mut e, rot, max_iter)?;
            eigen::sort_pairs(&mut d, want.then_some((&mut z, w)));
            return Ok(SpectralDecomposition { values: d, rows, vectors: z });
        }
        if n > opts.dense_cap {
            return Err(Error::DimensionCap { n, cap: opts.dense_cap });
        }
        let mut a = self.to_dense();
        let (mut d, mut e, q) = eigen::tridiagonalize(&mut a, n, want);
        drop(a);
        let mut z = Vec::new();
        if let Some(q) = q {
            z = vec![0.0; n * w];
            for i in 0..n {
                for (s, &v) in rows.iter().enumerate() {
                    z[i * w + s] = q[v * n + i];
                }
            }
        }
        let rot = want.then(|| eigen::Rotated { data: &mut z, width: w });
        eigen::tql(&mut d, &mut e, rot, max_iter)?;
        eigen::sort_pairs(&mut d, want.then_some((&mut z, w)));
        Ok(SpectralDecomposition { values: d, rows, vectors: z })
    }
}
