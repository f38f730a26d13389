//! Periodic 1D mesh and the broken polynomial space `V_h^k`.
//!
//! Fields are stored modally in an orthonormal Legendre basis on each cell,
//! `φ_p(x) = √(2/h) P̃_p(ξ)` with `P̃_p = √((2p+1)/2) P_p`, so every local
//! mass matrix is the identity and `L²` inner products are plain dot
//! products of coefficient vectors.
//!
//! Interface `i` is the left edge of cell `i`; its minus side is the right
//! trace of cell `i - 1` (wrapping to the last cell) and its plus side is
//! the left trace of cell `i`.

use crate::error::{invalid, Error, Result};
use crate::quadrature::{legendre_with_derivative, GaussLegendre};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    edges: Vec<f64>,
    degree: usize,
    quad: GaussLegendre,
    /// `P̃_p(ξ_q)`, row-major `[q][p]`.
    basis_at_quad: Vec<f64>,
    /// `∫ P̃_q P̃_p' dξ`, row-major `[q][p]`.
    stiffness: Vec<f64>,
    left_trace: Vec<f64>,
    right_trace: Vec<f64>,
}

impl Mesh1D {
    /// Uniform periodic mesh with the default quadrature order `degree + 3`.
    pub fn uniform(x_min: f64, x_max: f64, n_cells: usize, degree: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(invalid("n_cells", "must be positive"));
        }
        if !(x_max > x_min) {
            return Err(invalid("x_max", format!("domain [{x_min}, {x_max}] is empty")));
        }
        let h = (x_max - x_min) / n_cells as f64;
        let mut edges: Vec<f64> = (0..=n_cells).map(|i| x_min + i as f64 * h).collect();
        edges[n_cells] = x_max;
        Self::from_edges(edges, degree, degree + 3)
    }

    /// Arbitrary strictly increasing partition.
    pub fn from_edges(edges: Vec<f64>, degree: usize, quad_order: usize) -> Result<Self> {
        if edges.len() < 2 {
            return Err(invalid("n_cells", "must be positive"));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("cell_edges", "must be strictly increasing"));
        }
        if quad_order < degree + 2 {
            return Err(invalid(
                "quad_order",
                format!("{quad_order} nodes under-integrate degree {degree} products"),
            ));
        }
        let nb = degree + 1;
        let quad = GaussLegendre::new(quad_order)?;
        let norm = |p: usize| ((2 * p + 1) as f64 / 2.0).sqrt();
        let mut basis_at_quad = vec![0.0; quad_order * nb];
        let mut deriv_at_quad = vec![0.0; quad_order * nb];
        for (q, &xi) in quad.nodes.iter().enumerate() {
            for p in 0..nb {
                let (v, d) = legendre_with_derivative(p, xi);
                basis_at_quad[q * nb + p] = norm(p) * v;
                deriv_at_quad[q * nb + p] = norm(p) * d;
            }
        }
        let mut stiffness = vec![0.0; nb * nb];
        for a in 0..nb {
            for b in 0..nb {
                stiffness[a * nb + b] = (0..quad_order)
                    .map(|q| quad.weights[q] * basis_at_quad[q * nb + a] * deriv_at_quad[q * nb + b])
                    .sum();
            }
        }
        let left_trace = (0..nb).map(|p| norm(p) * if p % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let right_trace = (0..nb).map(norm).collect();
        Ok(Self {
            edges,
            degree,
            quad,
            basis_at_quad,
            stiffness,
            left_trace,
            right_trace,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        self.degree + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_cells() * self.n_basis()
    }

    pub fn quad_order(&self) -> usize {
        self.quad.len()
    }

    pub fn x_min(&self) -> f64 {
        self.edges[0]
    }

    pub fn x_max(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.x_max() - self.x_min()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cell_width(&self, cell: usize) -> f64 {
        self.edges[cell + 1] - self.edges[cell]
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_cells())
            .map(|j| self.cell_width(j))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_cells()).map(|j| self.cell_width(j)).fold(0.0, f64::max)
    }

    /// Mean width of the two cells sharing interface `i`.
    pub fn interface_width(&self, i: usize) -> f64 {
        0.5 * (self.cell_width(self.left_neighbor(i)) + self.cell_width(i))
    }

    /// Cell on the minus side of interface `i`.
    pub fn left_neighbor(&self, i: usize) -> usize {
        if i == 0 {
            self.n_cells() - 1
        } else {
            i - 1
        }
    }

    pub fn quad_nodes(&self) -> &[f64] {
        &self.quad.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad.weights
    }

    /// `P̃_p` at reference quadrature node `q`.
    #[inline]
    pub fn ref_basis(&self, q: usize, p: usize) -> f64 {
        self.basis_at_quad[q * self.n_basis() + p]
    }

    /// `∫ P̃_a P̃_b' dξ` on the reference interval.
    #[inline]
    pub fn ref_stiffness(&self, a: usize, b: usize) -> f64 {
        self.stiffness[a * self.n_basis() + b]
    }

    /// `P̃_p(-1)`.
    pub fn ref_left_trace(&self) -> &[f64] {
        &self.left_trace
    }

    /// `P̃_p(+1)`.
    pub fn ref_right_trace(&self) -> &[f64] {
        &self.right_trace
    }

    /// Physical coordinate of reference point `xi` in `cell`.
    pub fn map_to_physical(&self, cell: usize, xi: f64) -> f64 {
        let (a, b) = (self.edges[cell], self.edges[cell + 1]);
        0.5 * (a + b) + 0.5 * (b - a) * xi
    }

    /// Cell containing `x` (wrapped periodically) and the reference coordinate.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let l = self.length();
        let mut y = (x - self.x_min()).rem_euclid(l) + self.x_min();
        if y >= self.x_max() {
            y = self.x_min();
        }
        let cell = match self.edges.binary_search_by(|e| e.total_cmp(&y)) {
            Ok(i) => i.min(self.n_cells() - 1),
            Err(i) => i - 1,
        };
        let (a, b) = (self.edges[cell], self.edges[cell + 1]);
        (cell, (2.0 * (y - a) / (b - a) - 1.0).clamp(-1.0, 1.0))
    }
}

/// One piecewise polynomial scalar field, cell-major coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField {
    n_basis: usize,
    coeffs: Vec<f64>,
}

impl DGField {
    pub fn zeros(mesh: &Mesh1D) -> Self {
        Self {
            n_basis: mesh.n_basis(),
            coeffs: vec![0.0; mesh.n_dofs()],
        }
    }

    pub fn zeros_like(other: &DGField) -> Self {
        Self {
            n_basis: other.n_basis,
            coeffs: vec![0.0; other.coeffs.len()],
        }
    }

    pub fn from_coeffs(mesh: &Mesh1D, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.n_dofs() {
            return Err(invalid(
                "coeffs",
                format!("expected {} coefficients, got {}", mesh.n_dofs(), coeffs.len()),
            ));
        }
        Ok(Self {
            n_basis: mesh.n_basis(),
            coeffs,
        })
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn n_cells(&self) -> usize {
        self.coeffs.len() / self.n_basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.n_basis..(j + 1) * self.n_basis]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.coeffs[j * self.n_basis..(j + 1) * self.n_basis]
    }

    pub fn matches(&self, mesh: &Mesh1D) -> bool {
        self.n_basis == mesh.n_basis() && self.coeffs.len() == mesh.n_dofs()
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &DGField) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|x| *x *= a);
    }

    /// `L²(Ω)` inner product.
    pub fn dot(&self, other: &DGField) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_finite())
    }

    /// Value of the local polynomial at reference quadrature node `q`.
    #[inline]
    pub(crate) fn value_at_quad(&self, mesh: &Mesh1D, cell: usize, q: usize) -> f64 {
        let c = self.cell(cell);
        let s: f64 = (0..self.n_basis).map(|p| c[p] * mesh.ref_basis(q, p)).sum();
        s * (2.0 / mesh.cell_width(cell)).sqrt()
    }

    /// `(left, right)` traces of one cell.
    #[inline]
    pub(crate) fn cell_traces(&self, mesh: &Mesh1D, cell: usize) -> (f64, f64) {
        let c = self.cell(cell);
        let s = (2.0 / mesh.cell_width(cell)).sqrt();
        let left: f64 = c.iter().zip(mesh.ref_left_trace()).map(|(a, b)| a * b).sum();
        let right: f64 = c.iter().zip(mesh.ref_right_trace()).map(|(a, b)| a * b).sum();
        (left * s, right * s)
    }
}

/// One-sided limits at every (periodic) interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceTrace {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl InterfaceTrace {
    pub fn len(&self) -> usize {
        self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty()
    }

    /// `[u] = u⁺ - u⁻`
    #[inline]
    pub fn jump(&self, i: usize) -> f64 {
        self.plus[i] - self.minus[i]
    }

    /// `{u} = (u⁺ + u⁻) / 2`
    #[inline]
    pub fn average(&self, i: usize) -> f64 {
        0.5 * (self.plus[i] + self.minus[i])
    }
}

/// `L²` projection of `g` onto `V_h^k` using the mesh quadrature.
pub fn project_l2(g: impl Fn(f64) -> f64, mesh: &Mesh1D) -> DGField {
    let nb = mesh.n_basis();
    let mut field = DGField::zeros(mesh);
    for j in 0..mesh.n_cells() {
        let scale = (0.5 * mesh.cell_width(j)).sqrt();
        let cell = field.cell_mut(j);
        for (q, (&xi, &w)) in mesh.quad_nodes().iter().zip(mesh.quad_weights()).enumerate() {
            let gx = g(mesh.map_to_physical(j, xi));
            for (p, c) in cell.iter_mut().enumerate().take(nb) {
                *c += scale * w * gx * mesh.ref_basis(q, p);
            }
        }
    }
    field
}

/// Value of the local polynomial of `cell` at reference coordinate `local_point ∈ [-1, 1]`.
pub fn evaluate(field: &DGField, mesh: &Mesh1D, cell: usize, local_point: f64) -> Result<f64> {
    if cell >= mesh.n_cells() {
        return Err(Error::CellOutOfRange {
            cell,
            n_cells: mesh.n_cells(),
        });
    }
    let c = field.cell(cell);
    let s: f64 = c
        .iter()
        .enumerate()
        .map(|(p, a)| a * ((2 * p + 1) as f64 / 2.0).sqrt() * legendre_with_derivative(p, local_point).0)
        .sum();
    Ok(s * (2.0 / mesh.cell_width(cell)).sqrt())
}

/// Value at physical coordinate `x`, wrapped periodically.
pub fn evaluate_at(field: &DGField, mesh: &Mesh1D, x: f64) -> f64 {
    let (cell, xi) = mesh.locate(x);
    evaluate(field, mesh, cell, xi).expect("located cell is in range")
}

pub fn traces(field: &DGField, mesh: &Mesh1D) -> InterfaceTrace {
    let n = mesh.n_cells();
    let mut minus = vec![0.0; n];
    let mut plus = vec![0.0; n];
    for j in 0..n {
        let (left, right) = field.cell_traces(mesh, j);
        plus[j] = left;
        minus[(j + 1) % n] = right;
    }
    InterfaceTrace { minus, plus }
}

/// Exact integral over the domain: only the constant mode contributes.
pub fn integrate(field: &DGField, mesh: &Mesh1D) -> f64 {
    (0..mesh.n_cells())
        .map(|j| mesh.cell_width(j).sqrt() * field.cell(j)[0])
        .sum()
}

/// `L²` distance between two fields that may live on different meshes of
/// the same domain; evaluated with the quadrature of the finer mesh.
pub fn l2_distance(a: &DGField, mesh_a: &Mesh1D, b: &DGField, mesh_b: &Mesh1D) -> f64 {
    if mesh_a == mesh_b {
        return a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
    }
    let (fine_field, fine, coarse_field, coarse) = if mesh_a.n_cells() >= mesh_b.n_cells() {
        (a, mesh_a, b, mesh_b)
    } else {
        (b, mesh_b, a, mesh_a)
    };
    let rule = GaussLegendre::new(fine.degree().max(coarse.degree()) + 4).expect("positive order");
    let mut sum = 0.0;
    for j in 0..fine.n_cells() {
        let h = fine.cell_width(j);
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = fine.map_to_physical(j, xi);
            let fa = evaluate(fine_field, fine, j, xi).expect("in range");
            let (cj, cxi) = coarse.locate(x);
            let fb = evaluate(coarse_field, coarse, cj, cxi).expect("in range");
            sum += 0.5 * h * w * (fa - fb).powi(2);
        }
    }
    sum.sqrt()
}
