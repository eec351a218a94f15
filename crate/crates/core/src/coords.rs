//! Complex coordinates and their real views.
//!
//! A point of a product manifold is a flat complex vector partitioned into
//! factor blocks. The real view lists, block by block, the real parts of the
//! block followed by its imaginary parts: `z_l^a = x_l^a + i x_l^{a+m_l}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, RMatrix, SymmetricRealMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealLayout {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    // block index of each complex coordinate
    owner: Vec<usize>,
}

impl RealLayout {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::invalid("layout blocks must be nonempty and positive"));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut owner = Vec::new();
        let mut off = 0;
        for (l, &b) in blocks.iter().enumerate() {
            offsets.push(off);
            owner.extend(std::iter::repeat_n(l, b));
            off += b;
        }
        Ok(Self { blocks, offsets, owner })
    }

    /// One block covering all coordinates.
    pub fn single(n: usize) -> Self {
        Self::new(vec![n]).expect("n > 0")
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn complex_dim(&self) -> usize {
        self.owner.len()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim()
    }

    pub fn block_of(&self, alpha: usize) -> usize {
        self.owner[alpha]
    }

    pub fn re_index(&self, alpha: usize) -> usize {
        let l = self.owner[alpha];
        self.offsets[l] + alpha
    }

    pub fn im_index(&self, alpha: usize) -> usize {
        let l = self.owner[alpha];
        self.offsets[l] + alpha + self.blocks[l]
    }

    /// Range of real indices belonging to a block.
    pub fn real_range(&self, block: usize) -> std::ops::Range<usize> {
        let start = 2 * self.offsets[block];
        start..start + 2 * self.blocks[block]
    }

    pub fn to_real(&self, z: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.complex_dim());
        let mut x = vec![0.0; self.real_dim()];
        for (a, c) in z.iter().enumerate() {
            x[self.re_index(a)] = c.re;
            x[self.im_index(a)] = c.im;
        }
        x
    }

    pub fn to_complex(&self, x: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.real_dim());
        (0..self.complex_dim())
            .map(|a| Complex64::new(x[self.re_index(a)], x[self.im_index(a)]))
            .collect()
    }

    /// Symmetric `S` with `u^T S u = Σ h[α][β] v^α conj(v^β)` for `u` the real view of `v`.
    pub fn real_representation(&self, h: &HermitianMatrix) -> SymmetricRealMatrix {
        let n = self.complex_dim();
        let mut s = RMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                let e = h[(a, b)];
                let (ra, ia, rb, ib) = (self.re_index(a), self.im_index(a), self.re_index(b), self.im_index(b));
                s[(ra, rb)] = e.re;
                s[(ia, ib)] = e.re;
                s[(ra, ib)] = e.im;
                s[(ia, rb)] = -e.im;
            }
        }
        SymmetricRealMatrix::new(s).expect("nonempty square")
    }

    /// Converts a real Hessian `∂²f/∂u∂u` into the Wirtinger second
    /// derivatives `(∂²f/∂v^α∂v̄^β, ∂²f/∂v^α∂v^β)`.
    pub fn wirtinger_from_real_hessian(&self, hess: &RMatrix) -> (CMatrix, CMatrix) {
        let n = self.complex_dim();
        let mut mixed = CMatrix::zeros(n, n);
        let mut holo = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let (ra, ia, rb, ib) = (self.re_index(a), self.im_index(a), self.re_index(b), self.im_index(b));
                let aa = hess[(ra, rb)];
                let bb = hess[(ia, ib)];
                let ab = hess[(ra, ib)];
                let ba = hess[(ia, rb)];
                mixed[(a, b)] = Complex64::new(0.25 * (aa + bb), 0.25 * (ab - ba));
                holo[(a, b)] = Complex64::new(0.25 * (aa - bb), -0.25 * (ab + ba));
            }
        }
        (mixed, holo)
    }

    /// Real gradient from the conjugate Wirtinger gradient of a real function:
    /// `∂f/∂a = 2 Re ∂f/∂v̄`, `∂f/∂b = 2 Im ∂f/∂v̄`.
    pub fn real_gradient(&self, dvbar: &[Complex64]) -> Vec<f64> {
        let mut g = vec![0.0; self.real_dim()];
        for (a, d) in dvbar.iter().enumerate() {
            g[self.re_index(a)] = 2.0 * d.re;
            g[self.im_index(a)] = 2.0 * d.im;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_view_roundtrip_is_exact() {
        let layout = RealLayout::new(vec![2, 1]).unwrap();
        let z = vec![
            Complex64::new(0.1, -0.2),
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.5, 0.6),
        ];
        let x = layout.to_real(&z);
        assert_eq!(x, vec![0.1, 0.3, -0.2, 0.4, -0.5, 0.6]);
        assert_eq!(layout.to_complex(&x), z);
    }

    #[test]
    fn real_representation_reproduces_form() {
        let layout = RealLayout::new(vec![1, 2]).unwrap();
        let h = HermitianMatrix::new(CMatrix::from_rows(&[
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.7),
                Complex64::new(0.0, -0.2),
            ],
            vec![
                Complex64::new(0.3, -0.7),
                Complex64::new(3.0, 0.0),
                Complex64::new(0.1, 0.1),
            ],
            vec![
                Complex64::new(0.0, 0.2),
                Complex64::new(0.1, -0.1),
                Complex64::new(1.5, 0.0),
            ],
        ]))
        .unwrap();
        let v = vec![
            Complex64::new(0.4, -1.1),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.3, 0.5),
        ];
        let s = layout.real_representation(&h);
        let u = layout.to_real(&v);
        let lhs = s.quadratic_form(&u);
        let rhs = h.form(&v, &v).re;
        assert!((lhs - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
    }
}
