//! Random states, operators and models for property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Field, Matrix, C64};
use crate::model::{JumpChannel, OpenSystemModel};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with unit-variance complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<C64> {
    Matrix::from_fn(dim, dim, |_, _| gaussian_complex(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<C64> {
    random_matrix(dim, rng).hermitian_part()
}

/// Full-rank mixed state `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<C64> {
    let g = random_matrix(dim, rng);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace();
    rho.map(|x| x / tr)
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<C64> {
    let psi: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    Matrix::from_fn(dim, dim, |r, c| psi[r] * psi[c].conj() / norm)
}

/// A model with a random Hamiltonian and `n_jumps` random jump operators
/// labelled `A`, `B`, `C`, …; the first `n_monitored` are monitored.
pub fn random_model<R: Rng + ?Sized>(
    dim: usize,
    n_jumps: usize,
    n_monitored: usize,
    rng: &mut R,
) -> OpenSystemModel<C64> {
    assert!(n_monitored >= 1 && n_monitored <= n_jumps, "need 1 ≤ monitored ≤ jumps");
    let h = random_hermitian(dim, rng);
    let scale = 1.0 / (dim as f64).sqrt();
    let jumps: Vec<JumpChannel<C64>> = (0..n_jumps)
        .map(|k| JumpChannel {
            label: ((b'A' + k as u8) as char).to_string(),
            rate: C64::one(),
            operator: random_matrix(dim, rng).scale(&C64::new(scale, 0.0)),
        })
        .collect();
    let monitored: Vec<String> = jumps.iter().take(n_monitored).map(|j| j.label.clone()).collect();
    OpenSystemModel::new(h, jumps, monitored).expect("random model is valid")
}
