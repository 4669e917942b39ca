use nalgebra::Matrix4;
use num_complex::Complex64;

pub type CMatrix4 = Matrix4<Complex64>;

/// Angular momentum matrices for j = 3/2 in the basis
/// {|+3/2>, |+1/2>, |-1/2>, |-3/2>}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub jx: CMatrix4,
    pub jy: CMatrix4,
    pub jz: CMatrix4,
}

impl SpinOperators {
    pub fn new() -> Self {
        const J: f64 = 1.5;
        let m = |i: usize| J - i as f64;

        let mut jz = CMatrix4::zeros();
        let mut j_plus = CMatrix4::zeros();
        for i in 0..4 {
            jz[(i, i)] = Complex64::new(m(i), 0.0);
        }
        // <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); row i-1 carries m(i) + 1.
        for i in 1..4 {
            let mi = m(i);
            j_plus[(i - 1, i)] = Complex64::new((J * (J + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
        }
        let j_minus = j_plus.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let jx = (j_plus + j_minus) * half;
        let jy = (j_plus - j_minus) * Complex64::new(0.0, -0.5);

        Self { jx, jy, jz }
    }

    /// J_x, J_y, J_z by index 0, 1, 2.
    pub fn component(&self, i: usize) -> &CMatrix4 {
        match i {
            0 => &self.jx,
            1 => &self.jy,
            2 => &self.jz,
            _ => panic!("angular momentum component index {i} out of range"),
        }
    }

    pub fn components(&self) -> [&CMatrix4; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    /// Symmetrised product (J_i J_j + J_j J_i) / 2.
    pub fn sym_product(&self, i: usize, j: usize) -> CMatrix4 {
        let a = self.component(i);
        let b = self.component(j);
        (a * b + b * a) * Complex64::new(0.5, 0.0)
    }

    pub fn identity() -> CMatrix4 {
        CMatrix4::identity()
    }
}

impl Default for SpinOperators {
    fn default() -> Self {
        Self::new()
    }
}

/// Largest |H - H^dagger| entry.
pub fn hermiticity_defect(h: &CMatrix4) -> f64 {
    (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian 4x4 matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMatrix4) -> [f64; 4] {
    let eig = h.symmetric_eigenvalues();
    let mut out = [eig[0], eig[1], eig[2], eig[3]];
    out.sort_by(f64::total_cmp);
    out
}
