//! Uniform 1D and 2D grids and a generic element assembler.
//!
//! A 1D mesh is a chain of intervals; a 2D mesh splits every square cell
//! into a lower triangle `(i,j), (i+1,j), (i,j+1)` and an upper triangle
//! `(i+1,j+1), (i,j+1), (i+1,j)`. On each element the gradient is constant
//! (forward differences on the lower triangle, backward on the upper one)
//! and the phase variable enters through the mean of its nodal values.
//!
//! Unknowns are interleaved per node: `[u_0, …, u_{m−1}, v]`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::Result;
use crate::optim::{projected_newton, Bounds, HessianObjective, Objective, SolveReport, SolverOptions, SymBanded};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    /// Number of cells along each axis (`cells[1] == 0` in 1D).
    pub cells: [usize; 2],
    pub h: f64,
}

impl Mesh {
    pub fn line(cells: usize, h: f64) -> Self {
        Mesh {
            dim: 1,
            cells: [cells, 0],
            h,
        }
    }

    pub fn grid(nx: usize, ny: usize, h: f64) -> Self {
        Mesh {
            dim: 2,
            cells: [nx, ny],
            h,
        }
    }

    /// Node counts per axis.
    pub fn shape(&self) -> Vec<usize> {
        if self.dim == 1 {
            vec![self.cells[0] + 1]
        } else {
            vec![self.cells[0] + 1, self.cells[1] + 1]
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * (self.cells[0] + 1)
    }

    /// Integer coordinates of a node.
    pub fn node_ij(&self, k: usize) -> (usize, usize) {
        let nx = self.cells[0] + 1;
        (k % nx, k / nx)
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = self.node_ij(k);
        if self.dim == 1 {
            i == 0 || i == self.cells[0]
        } else {
            i == 0 || j == 0 || i == self.cells[0] || j == self.cells[1]
        }
    }

    /// Measure of the domain.
    pub fn volume(&self) -> f64 {
        if self.dim == 1 {
            self.cells[0] as f64 * self.h
        } else {
            (self.cells[0] * self.cells[1]) as f64 * self.h * self.h
        }
    }

    pub fn elements(&self) -> Vec<Element> {
        let h = self.h;
        if self.dim == 1 {
            return (0..self.cells[0])
                .map(|i| Element {
                    nodes: [i, i + 1, 0],
                    nn: 2,
                    d: [[-1.0 / h, 1.0 / h, 0.0], [0.0; 3]],
                    weight: h,
                })
                .collect();
        }
        let mut out = Vec::with_capacity(2 * self.cells[0] * self.cells[1]);
        for j in 0..self.cells[1] {
            for i in 0..self.cells[0] {
                let (n00, n10, n01, n11) = (
                    self.node(i, j),
                    self.node(i + 1, j),
                    self.node(i, j + 1),
                    self.node(i + 1, j + 1),
                );
                out.push(Element {
                    nodes: [n00, n10, n01],
                    nn: 3,
                    d: [[-1.0 / h, 1.0 / h, 0.0], [-1.0 / h, 0.0, 1.0 / h]],
                    weight: 0.5 * h * h,
                });
                out.push(Element {
                    nodes: [n11, n01, n10],
                    nn: 3,
                    d: [[1.0 / h, -1.0 / h, 0.0], [1.0 / h, 0.0, -1.0 / h]],
                    weight: 0.5 * h * h,
                });
            }
        }
        out
    }
}

/// A simplex with a constant gradient operator `d` (`dim × nn`).
#[derive(Clone, Copy, Debug)]
pub struct Element {
    pub nodes: [usize; 3],
    pub nn: usize,
    pub d: [[f64; 3]; 2],
    pub weight: f64,
}

/// Position of the reduced variables seen by an [`Integrand`]:
/// `[G (m×d, row-major), ∇v (d), c, ū (m)]`, where `c` and `ū` are element
/// means.
#[derive(Clone, Copy, Debug)]
pub struct Layout {
    pub m: usize,
    pub d: usize,
}

impl Layout {
    pub fn nr(&self) -> usize {
        self.m * self.d + self.d + 1 + self.m
    }
    pub fn gv(&self) -> usize {
        self.m * self.d
    }
    pub fn c(&self) -> usize {
        self.m * self.d + self.d
    }
    pub fn ubar(&self) -> usize {
        self.m * self.d + self.d + 1
    }
}

pub trait Integrand: Sync {
    /// Value of the integrand on element `elem`. When requested, writes the
    /// gradient and the row-major Hessian with respect to the reduced
    /// variables.
    fn eval(&self, elem: usize, r: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HessianMode {
    /// Element Hessians are projected onto the positive semidefinite cone.
    Projected,
    /// Element Hessians are used as computed.
    Exact,
}

const PAR_THRESHOLD: usize = 4096;

/// Sum of `weight × integrand` over all elements, as a function of the
/// interleaved nodal unknowns.
pub struct Assembler<I> {
    pub mesh: Mesh,
    pub layout: Layout,
    pub integrand: I,
    pub hessian_mode: HessianMode,
    elements: Vec<Element>,
    bandwidth: usize,
}

impl<I: Integrand> Assembler<I> {
    pub fn new(mesh: Mesh, m: usize, integrand: I) -> Self {
        let elements = mesh.elements();
        let stride = m + 1;
        let bandwidth = elements
            .iter()
            .map(|e| {
                let ns = &e.nodes[..e.nn];
                let lo = ns.iter().min().unwrap();
                let hi = ns.iter().max().unwrap();
                (hi - lo) * stride + stride - 1
            })
            .max()
            .unwrap_or(0);
        Assembler {
            mesh,
            layout: Layout { m, d: mesh.dim },
            integrand,
            hessian_mode: HessianMode::Projected,
            elements,
            bandwidth,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_nodes() * (self.layout.m + 1)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Reduced variables of element `e`.
    pub fn reduced(&self, e: &Element, x: &[f64], r: &mut [f64]) {
        let Layout { m, d } = self.layout;
        let s = m + 1;
        r.iter_mut().for_each(|v| *v = 0.0);
        let inv = 1.0 / e.nn as f64;
        for (loc, &node) in e.nodes[..e.nn].iter().enumerate() {
            let base = node * s;
            for k in 0..d {
                let dk = e.d[k][loc];
                for a in 0..m {
                    r[a * d + k] += dk * x[base + a];
                }
                r[self.layout.gv() + k] += dk * x[base + m];
            }
            r[self.layout.c()] += inv * x[base + m];
            for a in 0..m {
                r[self.layout.ubar() + a] += inv * x[base + a];
            }
        }
    }

    /// Column `loc_dof` of the reduced map: derivative of each reduced
    /// variable with respect to local unknown `loc_dof`.
    fn jacobian(&self, e: &Element) -> DMatrix<f64> {
        let Layout { m, d } = self.layout;
        let s = m + 1;
        let nr = self.layout.nr();
        let inv = 1.0 / e.nn as f64;
        let mut j = DMatrix::zeros(nr, e.nn * s);
        for loc in 0..e.nn {
            for k in 0..d {
                let dk = e.d[k][loc];
                for a in 0..m {
                    j[(a * d + k, loc * s + a)] = dk;
                }
                j[(self.layout.gv() + k, loc * s + m)] = dk;
            }
            j[(self.layout.c(), loc * s + m)] = inv;
            for a in 0..m {
                j[(self.layout.ubar() + a, loc * s + a)] = inv;
            }
        }
        j
    }

    /// Per-element weighted values, in element order.
    pub fn element_values(&self, x: &[f64]) -> Vec<f64> {
        let nr = self.layout.nr();
        let f = |(idx, e): (usize, &Element)| {
            let mut r = vec![0.0; nr];
            self.reduced(e, x, &mut r);
            e.weight * self.integrand.eval(idx, &r, None, None)
        };
        if self.elements.len() >= PAR_THRESHOLD {
            self.elements.par_iter().enumerate().map(f).collect()
        } else {
            self.elements.iter().enumerate().map(f).collect()
        }
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        self.element_values(x).iter().sum()
    }

    fn element_grad(&self, idx: usize, e: &Element, x: &[f64], j: &DMatrix<f64>) -> (f64, Vec<f64>) {
        let nr = self.layout.nr();
        let mut r = vec![0.0; nr];
        let mut gr = vec![0.0; nr];
        self.reduced(e, x, &mut r);
        let val = self.integrand.eval(idx, &r, Some(&mut gr), None);
        let mut gl = vec![0.0; j.ncols()];
        for col in 0..j.ncols() {
            let mut acc = 0.0;
            for row in 0..nr {
                acc += j[(row, col)] * gr[row];
            }
            gl[col] = e.weight * acc;
        }
        (e.weight * val, gl)
    }

    fn scatter_index(&self, e: &Element, loc: usize) -> usize {
        let s = self.layout.m + 1;
        e.nodes[loc / s] * s + loc % s
    }
}

impl<I: Integrand> Objective for Assembler<I> {
    fn dim(&self) -> usize {
        self.n_dofs()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let jac: Vec<DMatrix<f64>> = self.jacobian_cache();
        let work = |(idx, e): (usize, &Element)| self.element_grad(idx, e, x, &jac[jac_key(e)]);
        let parts: Vec<(f64, Vec<f64>)> = if self.elements.len() >= PAR_THRESHOLD {
            self.elements.par_iter().enumerate().map(work).collect()
        } else {
            self.elements.iter().enumerate().map(work).collect()
        };
        let mut total = 0.0;
        for (e, (v, gl)) in self.elements.iter().zip(parts) {
            total += v;
            for (loc, g) in gl.iter().enumerate() {
                grad[self.scatter_index(e, loc)] += g;
            }
        }
        total
    }
}

/// Elements come in at most two gradient patterns; index 1 is the upper
/// triangle.
fn jac_key(e: &Element) -> usize {
    if e.nn == 3 && e.d[0][0] > 0.0 {
        1
    } else {
        0
    }
}

impl<I: Integrand> Assembler<I> {
    fn jacobian_cache(&self) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(2);
        let first = self.elements.first();
        let upper = self.elements.iter().find(|e| jac_key(e) == 1);
        if let Some(e) = first {
            out.push(self.jacobian(e));
        }
        if let Some(e) = upper {
            out.push(self.jacobian(e));
        }
        out
    }
}

impl<I: Integrand> HessianObjective for Assembler<I> {
    fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn hessian(&self, x: &[f64], hess: &mut SymBanded) {
        hess.clear();
        let nr = self.layout.nr();
        let jac = self.jacobian_cache();
        let mode = self.hessian_mode;
        let work = |(idx, e): (usize, &Element)| {
            let j = &jac[jac_key(e)];
            let mut r = vec![0.0; nr];
            self.reduced(e, x, &mut r);
            let mut gr = vec![0.0; nr];
            let mut hr = vec![0.0; nr * nr];
            self.integrand.eval(idx, &r, Some(&mut gr), Some(&mut hr));
            let mut h = DMatrix::from_row_slice(nr, nr, &hr);
            h = 0.5 * (&h + h.transpose());
            if mode == HessianMode::Projected {
                h = psd_projection(h);
            }
            (j.transpose() * h * j) * e.weight
        };
        let parts: Vec<DMatrix<f64>> = if self.elements.len() >= PAR_THRESHOLD {
            self.elements.par_iter().enumerate().map(work).collect()
        } else {
            self.elements.iter().enumerate().map(work).collect()
        };
        for (e, hl) in self.elements.iter().zip(parts) {
            let nl = hl.nrows();
            for a in 0..nl {
                let ga = self.scatter_index(e, a);
                for b in 0..nl {
                    let gb = self.scatter_index(e, b);
                    if gb <= ga {
                        hess.add(ga, gb, hl[(a, b)]);
                    }
                }
            }
        }
    }
}

impl<I: Integrand> Assembler<I> {
    /// Projected Newton with positive semidefinite element Hessians,
    /// followed by a polish with the exact Hessian. The second phase only
    /// ever lowers the energy, so the combined history stays monotone.
    pub fn minimize(&mut self, bounds: &Bounds, x: &mut [f64], opts: &SolverOptions) -> Result<SolveReport> {
        self.hessian_mode = HessianMode::Projected;
        let first = projected_newton(self, bounds, x, opts)?;
        self.hessian_mode = HessianMode::Exact;
        let polish_opts = SolverOptions {
            max_iters: opts.max_iters.min(200),
            ..opts.clone()
        };
        let second = projected_newton(self, bounds, x, &polish_opts);
        self.hessian_mode = HessianMode::Projected;
        let second = second?;
        let mut history = first.history;
        history.extend_from_slice(&second.history[1..]);
        Ok(SolveReport {
            value: second.value,
            iterations: first.iterations + second.iterations,
            converged: second.converged || (first.converged && second.kkt_residual <= first.kkt_residual),
            kkt_residual: second.kkt_residual,
            history,
        })
    }
}

fn psd_projection(h: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(h);
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return eig.recompose();
    }
    let mut vals = eig.eigenvalues.clone();
    vals.iter_mut().for_each(|l| *l = l.max(0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&vals) * v.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `|G|² + (c − ½)² + |∇v|²`.
    struct Quad(Layout);

    impl Integrand for Quad {
        fn eval(&self, _e: usize, r: &[f64], grad: Option<&mut [f64]>, hess: Option<&mut [f64]>) -> f64 {
            let nr = self.0.nr();
            let c = self.0.c();
            let mut v = 0.0;
            for i in 0..c {
                v += r[i] * r[i];
            }
            v += (r[c] - 0.5).powi(2);
            if let Some(g) = grad {
                g.iter_mut().for_each(|x| *x = 0.0);
                for i in 0..c {
                    g[i] = 2.0 * r[i];
                }
                g[c] = 2.0 * (r[c] - 0.5);
            }
            if let Some(h) = hess {
                h.iter_mut().for_each(|x| *x = 0.0);
                for i in 0..=c {
                    h[i * nr + i] = 2.0;
                }
            }
            v
        }
    }

    #[test]
    fn element_counts_and_volume() {
        let m = Mesh::grid(3, 2, 0.5);
        assert_eq!(m.n_nodes(), 12);
        assert_eq!(m.elements().len(), 12);
        let w: f64 = m.elements().iter().map(|e| e.weight).sum();
        assert!((w - m.volume()).abs() < 1e-14);
        assert!(m.is_boundary(m.node(0, 1)) && !m.is_boundary(m.node(1, 1)));
    }

    #[test]
    fn affine_fields_have_exact_gradients() {
        let mesh = Mesh::grid(4, 3, 0.25);
        let asm = Assembler::new(mesh, 1, Quad(Layout { m: 1, d: 2 }));
        let mut x = vec![0.0; asm.n_dofs()];
        for k in 0..mesh.n_nodes() {
            let (i, j) = mesh.node_ij(k);
            x[2 * k] = 2.0 * i as f64 * 0.25 - 3.0 * j as f64 * 0.25;
            x[2 * k + 1] = 0.5;
        }
        let mut r = vec![0.0; asm.layout.nr()];
        for e in asm.elements() {
            asm.reduced(e, &x, &mut r);
            assert!((r[0] - 2.0).abs() < 1e-12 && (r[1] + 3.0).abs() < 1e-12);
        }
        assert!((asm.energy(&x) - 13.0 * mesh.volume()).abs() < 1e-12);
    }

    #[test]
    fn gradient_and_hessian_consistent() {
        let mesh = Mesh::grid(3, 3, 0.3);
        let asm = Assembler::new(mesh, 2, Quad(Layout { m: 2, d: 2 }));
        let n = asm.n_dofs();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
        let mut g = vec![0.0; n];
        asm.value_grad(&x, &mut g);
        let mut hb = SymBanded::zeros(n, asm.bandwidth());
        asm.hessian(&x, &mut hb);
        // Quadratic energy: gradient differences are exact.
        let dx: Vec<f64> = (0..n).map(|i| ((i * 31) % 7) as f64 / 7.0 - 0.5).collect();
        let x2: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let mut g2 = vec![0.0; n];
        asm.value_grad(&x2, &mut g2);
        let mut hdx = vec![0.0; n];
        hb.mul_vec(&dx, &mut hdx);
        for i in 0..n {
            assert!((g2[i] - g[i] - hdx[i]).abs() < 1e-10);
        }
    }
}
