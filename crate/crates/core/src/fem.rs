//! Vector-valued P1 finite elements on a triangulation: nonlinear form and
//! tangent assembly for the interior material operator, load vectors, the
//! strain seminorm, rigid body motions, and the trace transfer to the
//! boundary mesh.
//!
//! Strains of P1 displacements are constant per element, so the one-point
//! rule used in the form assembly is exact for both material laws (the
//! Hencky shear function is evaluated at the element strain invariant,
//! which is itself constant). Loads use the order-2 edge-midpoint rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;
use crate::material::{MaterialLaw, SymTensor2};
use crate::mesh::{Mesh, Point2};
use crate::num;

/// Coefficient vector over the degrees of freedom of a [`FemSpace`]
/// (two displacement components per node, node i owning dofs 2i, 2i+1).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefVector {
    pub values: Vec<f64>,
}

impl CoefVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// P1 displacement space on a mesh, with the boundary trace map.
#[derive(Clone, Debug)]
pub struct FemSpace {
    pub mesh: Mesh,
    /// Boundary nodes in counterclockwise cyclic order.
    pub boundary_nodes: Vec<usize>,
    /// Precomputed per-element geometry: gradients of the three hats and area.
    elements: Vec<ElementGeometry>,
}

#[derive(Clone, Debug)]
struct ElementGeometry {
    grads: [[f64; 2]; 3],
    area: f64,
}

/// Strain of the hat function at local vertex `k`, displacement component
/// `c`, given the hat gradient.
#[inline]
fn hat_strain(grad: [f64; 2], c: usize) -> SymTensor2 {
    if c == 0 {
        SymTensor2::new(grad[0], 0.0, 0.5 * grad[1])
    } else {
        SymTensor2::new(0.0, grad[1], 0.5 * grad[0])
    }
}

impl FemSpace {
    pub fn new(mesh: &Mesh) -> Self {
        let mut elements = Vec::with_capacity(mesh.triangles.len());
        for tri in &mesh.triangles {
            let p: [Point2; 3] = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
            let twice_area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
            let area = 0.5 * twice_area;
            let grads = [
                [
                    (p[1][1] - p[2][1]) / twice_area,
                    (p[2][0] - p[1][0]) / twice_area,
                ],
                [
                    (p[2][1] - p[0][1]) / twice_area,
                    (p[0][0] - p[2][0]) / twice_area,
                ],
                [
                    (p[0][1] - p[1][1]) / twice_area,
                    (p[1][0] - p[0][0]) / twice_area,
                ],
            ];
            elements.push(ElementGeometry { grads, area });
        }
        Self {
            mesh: mesh.clone(),
            boundary_nodes: mesh.boundary_nodes(),
            elements,
        }
    }

    pub fn dof_count(&self) -> usize {
        2 * self.mesh.node_count()
    }

    pub fn trace_dof_count(&self) -> usize {
        2 * self.boundary_nodes.len()
    }

    /// Global dof indices of the trace dofs, in boundary cyclic order.
    pub fn trace_map(&self) -> Vec<usize> {
        let mut map = Vec::with_capacity(self.trace_dof_count());
        for &node in &self.boundary_nodes {
            map.push(2 * node);
            map.push(2 * node + 1);
        }
        map
    }

    /// Restricts a global coefficient vector to the trace dofs.
    pub fn extract_trace(&self, u: &[f64]) -> Vec<f64> {
        self.trace_map().iter().map(|&g| u[g]).collect()
    }

    /// Scatters trace-indexed values into a global vector (adding).
    pub fn scatter_trace(&self, trace: &[f64], out: &mut [f64]) {
        for (k, &g) in self.trace_map().iter().enumerate() {
            out[g] += trace[k];
        }
    }

    /// Element strain of a coefficient vector.
    pub fn strain_at(&self, u: &CoefVector, triangle: usize) -> SymTensor2 {
        let tri = self.mesh.triangles[triangle];
        let geo = &self.elements[triangle];
        let mut e = SymTensor2::ZERO;
        for k in 0..3 {
            for c in 0..2 {
                let coef = u.values[2 * tri[k] + c];
                if coef != 0.0 {
                    e = e.add(&hat_strain(geo.grads[k], c).scaled(coef));
                }
            }
        }
        e
    }

    /// Residual contributions <A eps(u_h), eps(phi_i)> over the domain.
    pub fn assemble_nonlinear_form(&self, law: &MaterialLaw, u: &CoefVector) -> CoefVector {
        assert_eq!(u.len(), self.dof_count(), "coefficient vector size mismatch");
        let mut r = CoefVector::zeros(self.dof_count());
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let geo = &self.elements[t];
            let strain = self.strain_at(u, t);
            let stress = law.eval_stress(&strain);
            for k in 0..3 {
                for c in 0..2 {
                    r.values[2 * tri[k] + c] +=
                        geo.area * stress.frob(&hat_strain(geo.grads[k], c));
                }
            }
        }
        r
    }

    /// Tangent stiffness dR(u); for the linear law this is the standard
    /// stiffness matrix and independent of u.
    pub fn assemble_tangent_matrix(&self, law: &MaterialLaw, u: &CoefVector) -> Mat {
        assert_eq!(u.len(), self.dof_count(), "coefficient vector size mismatch");
        let n = self.dof_count();
        let mut m = Mat::zeros(n, n);
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let geo = &self.elements[t];
            let strain = self.strain_at(u, t);
            // local strains of the six element dofs
            let mut local = [[SymTensor2::ZERO; 2]; 3];
            for k in 0..3 {
                for c in 0..2 {
                    local[k][c] = hat_strain(geo.grads[k], c);
                }
            }
            for k in 0..3 {
                for c in 0..2 {
                    let col = law.eval_tangent(&strain, &local[k][c]);
                    for l in 0..3 {
                        for d in 0..2 {
                            m[(2 * tri[l] + d, 2 * tri[k] + c)] +=
                                geo.area * col.frob(&local[l][d]);
                        }
                    }
                }
            }
        }
        m
    }

    /// Gram matrix of the strain seminorm: u^T S u = ||eps(u_h)||^2.
    pub fn assemble_strain_gram(&self) -> Mat {
        let n = self.dof_count();
        let mut m = Mat::zeros(n, n);
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let geo = &self.elements[t];
            for k in 0..3 {
                for c in 0..2 {
                    let ek = hat_strain(geo.grads[k], c);
                    for l in 0..3 {
                        for d in 0..2 {
                            let el = hat_strain(geo.grads[l], d);
                            m[(2 * tri[l] + d, 2 * tri[k] + c)] += geo.area * ek.frob(&el);
                        }
                    }
                }
            }
        }
        m
    }

    /// Load vector entries <f, phi_i> by the order-2 edge-midpoint rule.
    pub fn assemble_load(&self, f: &dyn Fn(Point2) -> [f64; 2]) -> CoefVector {
        let mut r = CoefVector::zeros(self.dof_count());
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let geo = &self.elements[t];
            let p: [Point2; 3] = [
                self.mesh.nodes[tri[0]],
                self.mesh.nodes[tri[1]],
                self.mesh.nodes[tri[2]],
            ];
            let w = geo.area / 3.0;
            // midpoint of edge opposite vertex k; hats take value 1/2 on the
            // two adjacent vertices and 0 on the opposite one
            for k in 0..3 {
                let a = (k + 1) % 3;
                let b = (k + 2) % 3;
                let mid = [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])];
                let val = f(mid);
                for c in 0..2 {
                    r.values[2 * tri[a] + c] += w * 0.5 * val[c];
                    r.values[2 * tri[b] + c] += w * 0.5 * val[c];
                }
            }
        }
        r
    }

    /// ( sum_T |T| eps_T : eps_T )^(1/2).
    pub fn h1_seminorm(&self, u: &CoefVector) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.mesh.triangles.len() {
            let e = self.strain_at(u, t);
            acc += self.elements[t].area * e.frob(&e);
        }
        num::sqrt(acc)
    }

    /// Nodal interpolant of a vector field.
    pub fn interpolate(&self, f: &dyn Fn(Point2) -> [f64; 2]) -> CoefVector {
        let mut u = CoefVector::zeros(self.dof_count());
        for (i, p) in self.mesh.nodes.iter().enumerate() {
            let v = f(*p);
            u.values[2 * i] = v[0];
            u.values[2 * i + 1] = v[1];
        }
        u
    }

    pub fn element_area(&self, t: usize) -> f64 {
        self.elements[t].area
    }
}

/// The rigid body motions in 2D: two translations and one rotation.
pub fn rigid_body_fields_2d() -> [fn(Point2) -> [f64; 2]; 3] {
    [
        |_p| [1.0, 0.0],
        |_p| [0.0, 1.0],
        |p| [-p[1], p[0]],
    ]
}

/// The rigid body motions in 3D: three translations and three rotations.
pub fn rigid_body_fields_3d() -> [fn([f64; 3]) -> [f64; 3]; 6] {
    [
        |_p| [1.0, 0.0, 0.0],
        |_p| [0.0, 1.0, 0.0],
        |_p| [0.0, 0.0, 1.0],
        |p| [-p[1], p[0], 0.0],
        |p| [0.0, -p[2], p[1]],
        |p| [p[2], 0.0, -p[0]],
    ]
}

/// Nodal coefficient vectors of the rigid body motions on a space.
pub fn rigid_body_coefficients(sp: &FemSpace) -> Vec<CoefVector> {
    rigid_body_fields_2d()
        .iter()
        .map(|f| sp.interpolate(f))
        .collect()
}
