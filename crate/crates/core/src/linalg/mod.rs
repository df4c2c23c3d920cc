//! Dense complex matrix kernel: Kronecker products, SVD-based norms,
//! Hermitian eigendecomposition and the matrix exponential.

mod eig;
mod expm;
mod matrix;
mod svd;

pub use eig::{eigh, hermitian_operator_norm, psd_sqrt};
pub use expm::expm;
pub(crate) use matrix::MatrixScratch;
pub use matrix::{CMatrix, LinalgError, DEFAULT_DIM_CAP};
pub use svd::{
    nuclear_norm, operator_norm, soft_threshold, svd, svd_values, SingularSpectrum, Svd,
};

#[cfg(test)]
mod cross_checks {
    //! Identities coupling the independent eig and svd routes.

    use super::*;
    use crate::testutil;

    /// The nuclear norm of the block column [c_1; ...; c_n] equals
    /// tr((sum c_k^* c_k)^{1/2}) computed through the eigensolver.
    #[test]
    fn block_column_nuclear_vs_psd_sqrt() {
        let mut rng = testutil::rng(100);
        for _ in 0..8 {
            let blocks: Vec<CMatrix> = (0..3).map(|_| testutil::ginibre(&mut rng, 3, 3)).collect();
            let stacked = CMatrix::vstack(&blocks);
            let direct = nuclear_norm(&stacked).unwrap();
            let mut gram = CMatrix::zeros(3, 3);
            for b in &blocks {
                gram = gram.add(&b.dagger().mul(b));
            }
            let via_eig = psd_sqrt(&gram).unwrap().trace().re;
            assert!((direct - via_eig).abs() <= 1e-9 * direct.max(1.0));
        }
    }
}
