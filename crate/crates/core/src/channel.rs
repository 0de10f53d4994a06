//! Superoperators of the jump unraveling: the Liouvillian `L`, jump maps
//! `J_k ρ = L_k ρ L_k†`, the no-jump generator `L_0 = L − Σ_{k∈𝕄} J_k`,
//! channel maps `M_k = −J_k L_0⁻¹` and their sum `M`, together with the
//! steady state, the jump steady state `π = Jρ_ss/K`, the activity `K`,
//! the spectrum of `M`, and the Drazin-inverse identities tying `L_0⁻¹`
//! and `M` back to `L`.

use rand::Rng;

use crate::algebra::{
    self, dot, eig, min_eigenvalue, null_vector, range_basis, trace_functional, vectorize, Field, Lu,
    Matrix, Tolerances, VectorizedOperator, C64,
};
use crate::error::{Error, Result};
use crate::model::OpenSystemModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuperopRole {
    Liouvillian,
    Jump,
    NoJump,
    ChannelMap,
    TotalMap,
    Drazin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<T> {
    pub dim: usize,
    pub matrix: Matrix<T>,
    pub role: SuperopRole,
}

impl<T: Field> Superoperator<T> {
    pub fn new(dim: usize, matrix: Matrix<T>, role: SuperopRole) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::Dimension(format!("superoperator on dimension {dim} must be {0}x{0}", dim * dim)));
        }
        Ok(Self { dim, matrix, role })
    }

    pub fn apply(&self, rho: &VectorizedOperator<T>) -> VectorizedOperator<T> {
        VectorizedOperator { dim: self.dim, data: self.matrix.matvec(&rho.data) }
    }

    /// `⟨⟨𝟙|S`, the functional `ρ ↦ tr(Sρ)`.
    pub fn trace_row(&self) -> Vec<T> {
        self.matrix.vecmat(&trace_functional(self.dim))
    }
}

fn outer<T: Field>(u: &[T], v: &[T]) -> Matrix<T> {
    Matrix::from_fn(u.len(), v.len(), |r, c| u[r].mul_ref(&v[c]))
}

/// `vec(−i[H,ρ] + Σ_k rate_k (AρA† − ½{A†A, ρ}))` over every channel.
pub fn build_liouvillian<T: Field>(model: &OpenSystemModel<T>) -> Superoperator<T> {
    let d = model.dim();
    let id = Matrix::<T>::identity(d);
    let h = model.hamiltonian();
    let minus_i = -T::imag_unit();
    // −i(I⊗H − Hᵀ⊗I)
    let mut l = id.kron(h).sub(&h.transpose().kron(&id)).scale(&minus_i);
    let half = T::one().div_ref(&T::from_i64(2));
    for jump in model.jumps() {
        let a = &jump.operator;
        let ada = a.adjoint().matmul(a);
        let sandwich = a.conj().kron(a);
        let anti = id.kron(&ada).add(&ada.transpose().kron(&id)).scale(&half);
        l = l.add(&sandwich.sub(&anti).scale(&jump.rate));
    }
    Superoperator { dim: d, matrix: l, role: SuperopRole::Liouvillian }
}

/// `J_k ρ = rate · A ρ A†` for the channel named `label`.
pub fn build_jump<T: Field>(model: &OpenSystemModel<T>, label: &str) -> Result<Superoperator<T>> {
    let jump = model.jump(label).ok_or_else(|| Error::UnknownSymbol(label.to_string()))?;
    let a = &jump.operator;
    Ok(Superoperator { dim: model.dim(), matrix: a.conj().kron(a).scale(&jump.rate), role: SuperopRole::Jump })
}

/// `L_0 = L − Σ_{k∈𝕄} J_k`; unmonitored channels stay inside.
pub fn build_no_jump<T: Field>(model: &OpenSystemModel<T>) -> Superoperator<T> {
    let mut l0 = build_liouvillian(model).matrix;
    for label in model.monitored() {
        l0 = l0.sub(&build_jump(model, &label).expect("monitored label exists").matrix);
    }
    Superoperator { dim: model.dim(), matrix: l0, role: SuperopRole::NoJump }
}

/// Spectral factors of `M` restricted to the jump range `Σ_k range(J_k)`,
/// an invariant subspace holding every `M_k π` and every image of `M`. Entry `emission[k][j]` is
/// `⟨⟨𝟙|M_k u_j⟩⟩` and `injection[j][k]` is `⟨⟨v_j|M_k π⟩⟩`.
#[derive(Clone, Debug)]
pub struct MemoryDecomposition {
    pub values: Vec<C64>,
    /// Index of the eigenvalue 1 carried by `π`.
    pub stationary: usize,
    /// Columns are right eigenvectors `u_j` in the full space.
    pub right: Matrix<C64>,
    /// Rows are left functionals `⟨⟨v_j|`, valid on the jump range.
    pub left: Matrix<C64>,
    pub emission: Vec<Vec<C64>>,
    pub injection: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct ProcessSpectrum {
    /// All eigenvalues `μ_j` of `M`.
    pub eigenvalues: Vec<C64>,
    /// Dimension of the jump range `Σ_k range(J_k)`.
    pub jump_rank: usize,
    pub condition: f64,
    pub decomposition: Option<MemoryDecomposition>,
}

impl ProcessSpectrum {
    pub fn diagonalizable(&self) -> bool {
        self.decomposition.is_some()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Derived bundle of a monitored model: channel maps, steady states,
/// activity and spectrum. Immutable once built.
#[derive(Clone, Debug)]
pub struct ChannelProcess<T> {
    model: OpenSystemModel<T>,
    alphabet: Vec<String>,
    tolerances: Tolerances,
    liouvillian: Superoperator<T>,
    jumps: Vec<Superoperator<T>>,
    no_jump: Superoperator<T>,
    no_jump_inverse: Matrix<T>,
    channel_maps: Vec<Superoperator<T>>,
    total_map: Superoperator<T>,
    trace_rows: Vec<Vec<T>>,
    steady_state: VectorizedOperator<T>,
    jss: VectorizedOperator<T>,
    activity: T,
    spectrum: ProcessSpectrum,
}

pub fn build_channel_maps<T: Field>(model: &OpenSystemModel<T>) -> Result<ChannelProcess<T>> {
    ChannelProcess::build(model, Tolerances::default())
}

impl<T: Field> ChannelProcess<T> {
    pub fn build(model: &OpenSystemModel<T>, tolerances: Tolerances) -> Result<Self> {
        let d = model.dim();
        let alphabet = model.monitored();
        let liouvillian = build_liouvillian(model);
        let jumps: Vec<Superoperator<T>> =
            alphabet.iter().map(|k| build_jump(model, k)).collect::<Result<_>>()?;
        let mut l0 = liouvillian.matrix.clone();
        let mut jtot = Matrix::<T>::zeros(d * d, d * d);
        for j in &jumps {
            l0 = l0.sub(&j.matrix);
            jtot = jtot.add(&j.matrix);
        }
        let no_jump = Superoperator { dim: d, matrix: l0, role: SuperopRole::NoJump };
        let lu = match Lu::new(&no_jump.matrix, tolerances.tol_rank) {
            Ok(lu) => lu,
            Err(Error::Singular(_)) => return Err(Error::DarkSubspace),
            Err(e) => return Err(e),
        };
        let no_jump_inverse = lu.inverse();
        let channel_maps: Vec<Superoperator<T>> = jumps
            .iter()
            .map(|j| Superoperator {
                dim: d,
                matrix: j.matrix.matmul(&no_jump_inverse).neg(),
                role: SuperopRole::ChannelMap,
            })
            .collect();
        let mut total = Matrix::<T>::zeros(d * d, d * d);
        for m in &channel_maps {
            total = total.add(&m.matrix);
        }
        let total_map = Superoperator { dim: d, matrix: total, role: SuperopRole::TotalMap };
        let trace_rows = channel_maps.iter().map(Superoperator::trace_row).collect();

        let steady_state = null_vector(&liouvillian.matrix, d, tolerances.tol_rank)?;
        let jrho = VectorizedOperator { dim: d, data: jtot.matvec(&steady_state.data) };
        let activity = jrho.trace();
        let k = activity.to_c64();
        if !(k.re > 0.0) {
            return Err(Error::DarkSubspace);
        }
        let inv_k = T::one().div_ref(&activity);
        let jss = jrho.scale(&inv_k);
        // Every image of M lies in Σ_k range(J_k) = range(Σ_k J_k J_k†).
        let n = d * d;
        let span = jumps.iter().fold(Matrix::<C64>::zeros(n, n), |acc, j| {
            let jf = j.matrix.to_c64();
            acc.add(&jf.matmul(&jf.adjoint()))
        });
        let spectrum = compute_spectrum(&total_map.matrix.to_c64(), &span, &channel_maps, &jss, tolerances)?;

        Ok(Self {
            model: model.clone(),
            alphabet,
            tolerances,
            liouvillian,
            jumps,
            no_jump,
            no_jump_inverse,
            channel_maps,
            total_map,
            trace_rows,
            steady_state,
            jss,
            activity,
            spectrum,
        })
    }

    pub fn model(&self) -> &OpenSystemModel<T> {
        &self.model
    }
    pub fn dim(&self) -> usize {
        self.model.dim()
    }
    /// Monitored labels in lexicographic order; symbols are indices into it.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }
    pub fn symbol_index(&self, label: &str) -> Result<usize> {
        self.alphabet.iter().position(|a| a == label).ok_or_else(|| Error::UnknownSymbol(label.to_string()))
    }
    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }
    pub fn liouvillian(&self) -> &Superoperator<T> {
        &self.liouvillian
    }
    pub fn jump_maps(&self) -> &[Superoperator<T>] {
        &self.jumps
    }
    /// `J = Σ_{k∈𝕄} J_k`.
    pub fn total_jump(&self) -> Matrix<T> {
        let n = self.dim() * self.dim();
        self.jumps.iter().fold(Matrix::zeros(n, n), |acc, j| acc.add(&j.matrix))
    }
    pub fn no_jump(&self) -> &Superoperator<T> {
        &self.no_jump
    }
    pub fn no_jump_inverse(&self) -> &Matrix<T> {
        &self.no_jump_inverse
    }
    pub fn channel_maps(&self) -> &[Superoperator<T>] {
        &self.channel_maps
    }
    pub fn channel_map(&self, k: usize) -> &Superoperator<T> {
        &self.channel_maps[k]
    }
    pub fn total_map(&self) -> &Superoperator<T> {
        &self.total_map
    }
    pub fn steady_state(&self) -> &VectorizedOperator<T> {
        &self.steady_state
    }
    /// The jump steady state `π`.
    pub fn jss(&self) -> &VectorizedOperator<T> {
        &self.jss
    }
    /// Dynamical activity `K = tr(Jρ_ss)`.
    pub fn activity(&self) -> &T {
        &self.activity
    }
    pub fn spectrum(&self) -> &ProcessSpectrum {
        &self.spectrum
    }

    /// `tr(M_k ρ)` through the precomputed row `⟨⟨𝟙|M_k`.
    pub fn weight(&self, k: usize, rho: &[T]) -> T {
        dot(&self.trace_rows[k], rho)
    }

    pub fn trace_row(&self, k: usize) -> &[T] {
        &self.trace_rows[k]
    }

    pub fn apply(&self, k: usize, rho: &[T]) -> Vec<T> {
        self.channel_maps[k].matrix.matvec(rho)
    }
}

fn compute_spectrum<T: Field>(
    m: &Matrix<C64>,
    span: &Matrix<C64>,
    channel_maps: &[Superoperator<T>],
    jss: &VectorizedOperator<T>,
    tol: Tolerances,
) -> Result<ProcessSpectrum> {
    let q = range_basis(span, tol.tol_rank);
    let qh = q.adjoint();
    let restricted = qh.matmul(m).matmul(&q);
    let data = eig(&restricted, tol.cond_max)?;
    let jump_rank = q.cols();
    // In the basis (Q, Q⊥) M is block upper triangular with a zero lower
    // block, so the rest of its spectrum is exactly zero.
    let mut all = data.eigenvalues.clone();
    all.resize(m.rows(), C64::new(0.0, 0.0));
    let decomposition = match (data.right, data.left) {
        (Some(r), Some(l)) if data.diagonalizable => {
            let right = q.matmul(&r);
            let left = l.matmul(&qh);
            let stationary = (0..data.eigenvalues.len())
                .min_by(|&a, &b| {
                    (data.eigenvalues[a] - 1.0).norm().total_cmp(&(data.eigenvalues[b] - 1.0).norm())
                })
                .ok_or_else(|| Error::NonConvergence("empty spectrum".into()))?;
            let maps: Vec<Matrix<C64>> = channel_maps.iter().map(|s| s.matrix.to_c64()).collect();
            let pi = jss.to_c64().data;
            let ones = trace_functional::<C64>(jss.dim);
            let emission = maps
                .iter()
                .map(|mk| {
                    let row = mk.vecmat(&ones);
                    (0..right.cols()).map(|j| dot(&row, &right.column(j))).collect()
                })
                .collect();
            let images: Vec<Vec<C64>> = maps.iter().map(|mk| mk.matvec(&pi)).collect();
            let injection = (0..left.rows())
                .map(|j| images.iter().map(|img| dot(left.row(j), img)).collect())
                .collect();
            Some(MemoryDecomposition { values: data.eigenvalues, stationary, right, left, emission, injection })
        }
        _ => None,
    };
    Ok(ProcessSpectrum { eigenvalues: all, jump_rank, condition: data.condition, decomposition })
}

/// Worst positivity found by [`positivity_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityReport {
    pub trials: usize,
    /// Smallest eigenvalue of `M_k ρ` over all trials.
    pub worst_min_eigenvalue: f64,
}

/// Applies `map` to random mixed states and checks the images are positive
/// semidefinite within `tol_psd`.
pub fn positivity_check<R: Rng + ?Sized>(
    map: &Superoperator<C64>,
    trials: usize,
    tol_psd: f64,
    rng: &mut R,
) -> Result<PositivityReport> {
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let rho = crate::random::random_density(map.dim, rng);
        let image = map.apply(&vectorize(&rho)?).unvectorize();
        worst = worst.min(min_eigenvalue(&image));
    }
    if worst < -tol_psd {
        return Err(Error::PositivityViolation { worst });
    }
    Ok(PositivityReport { trials, worst_min_eigenvalue: worst })
}

/// Drazin inverse `L⁺` with the shorthands `B = (JL⁺ − 1)⁻¹` and
/// `g = ⟨⟨𝟙|BJ|ρ_ss⟩⟩`.
#[derive(Clone, Debug)]
pub struct DrazinData<T> {
    pub drazin: Superoperator<T>,
    pub b: Matrix<T>,
    pub g: T,
}

/// Inverts `L` on the complement of its stationary kernel. With
/// `P = |ρ_ss⟩⟩⟨⟨𝟙|` the restricted inverse is `(L − P)⁻¹ + P`, which kills
/// `|ρ_ss⟩⟩` on the right and `⟨⟨𝟙|` on the left.
pub fn drazin_inverse<T: Field>(process: &ChannelProcess<T>) -> Result<DrazinData<T>> {
    let d = process.dim();
    let n = d * d;
    let p = outer(&process.steady_state().data, &trace_functional::<T>(d));
    let shifted = process.liouvillian().matrix.sub(&p);
    let inv = match algebra::inverse(&shifted, process.tolerances().tol_rank) {
        Ok(inv) => inv,
        Err(Error::Singular(_)) => return Err(Error::Degenerate { kernel_dim: 2 }),
        Err(e) => return Err(e),
    };
    let drazin = inv.add(&p);
    let jtot = process.total_jump();
    let b_inv = jtot.matmul(&drazin).sub(&Matrix::identity(n));
    let b = match algebra::inverse(&b_inv, process.tolerances().tol_rank) {
        Ok(b) => b,
        Err(Error::Singular(msg)) => return Err(Error::Singular(format!("JL⁺ − 1: {msg}"))),
        Err(e) => return Err(e),
    };
    let bj_rho = b.matmul(&jtot).matvec(&process.steady_state().data);
    let g = VectorizedOperator { dim: d, data: bj_rho }.trace();
    Ok(DrazinData { drazin: Superoperator { dim: d, matrix: drazin, role: SuperopRole::Drazin }, b, g })
}

/// Max-norm deviations of the closed-form identities from the directly
/// built objects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrazinReport {
    /// `L_0⁻¹ = −L⁺B + g⁻¹(L⁺BJ − 1)|ρ_ss⟩⟩⟨⟨𝟙|B`.
    pub no_jump_inverse: f64,
    /// `M = 1 + B − g⁻¹ BJ|ρ_ss⟩⟩⟨⟨𝟙|B`.
    pub total_map: f64,
    /// `B⁻¹ = −|ρ_ss⟩⟩⟨⟨𝟙| − L_0 L⁺`.
    pub b_inverse: f64,
    /// `L L⁺ = L⁺ L = 1 − |ρ_ss⟩⟩⟨⟨𝟙|`.
    pub group_inverse: f64,
}

impl DrazinReport {
    pub fn max(&self) -> f64 {
        self.no_jump_inverse.max(self.total_map).max(self.b_inverse).max(self.group_inverse)
    }
}

pub const DRAZIN_TOLERANCE: f64 = 1e-8;

pub fn verify_drazin_relations<T: Field>(process: &ChannelProcess<T>, data: &DrazinData<T>) -> Result<DrazinReport> {
    if !process.model().all_monitored() {
        return Err(Error::Precondition("the Drazin identities require every channel to be monitored".into()));
    }
    let d = process.dim();
    let n = d * d;
    let id = Matrix::<T>::identity(n);
    let lp = &data.drazin.matrix;
    let b = &data.b;
    let jtot = process.total_jump();
    let p = outer(&process.steady_state().data, &trace_functional::<T>(d));
    let inv_g = T::one().div_ref(&data.g);
    let pb = p.matmul(b);

    let l0_inv = lp.matmul(b).neg().add(&lp.matmul(b).matmul(&jtot).sub(&id).matmul(&pb).scale(&inv_g));
    let m = id.add(b).sub(&b.matmul(&jtot).matmul(&pb).scale(&inv_g));
    let b_inv = p.neg().sub(&process.no_jump().matrix.matmul(lp));
    let direct_b_inv = jtot.matmul(lp).sub(&id);
    let l = &process.liouvillian().matrix;
    let complement = id.sub(&p);
    let group = l.matmul(lp).max_abs_diff(&complement).max(lp.matmul(l).max_abs_diff(&complement));

    let report = DrazinReport {
        no_jump_inverse: l0_inv.max_abs_diff(process.no_jump_inverse()),
        total_map: m.max_abs_diff(&process.total_map().matrix),
        b_inverse: b_inv.max_abs_diff(&direct_b_inv),
        group_inverse: group,
    };
    if report.max() > DRAZIN_TOLERANCE {
        return Err(Error::Inconsistency { what: "Drazin identities".into(), deviation: report.max() });
    }
    Ok(report)
}

/// Eigen-sum form `Σ_j λ_j⁻¹|x_j⟩⟩⟨⟨y_j|` over the nonzero spectrum of `L`.
/// Kept as an independent cross-check of [`drazin_inverse`].
pub fn drazin_by_eigensum(liouvillian: &Matrix<C64>, tol: Tolerances) -> Result<Matrix<C64>> {
    let data = eig(liouvillian, tol.cond_max)?;
    let (Some(x), Some(y)) = (data.right, data.left) else {
        return Err(Error::NotDiagonalizable { condition: data.condition });
    };
    let n = liouvillian.rows();
    let mut out = Matrix::<C64>::zeros(n, n);
    for (j, lambda) in data.eigenvalues.iter().enumerate() {
        if lambda.norm() <= 1e-9 {
            continue;
        }
        out = out.add(&outer(&x.column(j), y.row(j)).scale(&(1.0 / lambda)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ExactComplex, Param};
    use crate::model::{build_xy_chain, occupation_projector, spin_operator, ChainSpec, JumpChannel, SpinKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Q = ExactComplex;

    fn xx_exact(l: usize) -> OpenSystemModel<Q> {
        build_xy_chain(&ChainSpec::xx(l, Param::from(1))).unwrap()
    }

    fn vecq(m: &Matrix<Q>) -> Vec<Q> {
        vectorize(m).unwrap().data
    }

    #[test]
    fn pure_decay_liouvillian() {
        let a = spin_operator::<C64>(1, SpinKind::Minus, 1).unwrap();
        let model = OpenSystemModel::new(
            Matrix::zeros(2, 2),
            vec![JumpChannel { label: "D".into(), rate: C64::one(), operator: a }],
            ["D"],
        )
        .unwrap();
        let l = build_liouvillian(&model);
        let full = occupation_projector::<C64>("1").unwrap();
        let empty = occupation_projector::<C64>("0").unwrap();
        let out = l.matrix.matvec(&vectorize(&full).unwrap().data);
        assert_eq!(out, vectorize(&empty.sub(&full)).unwrap().data);
    }

    #[test]
    fn liouvillian_is_trace_annihilating() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..5 {
            let model = crate::random::random_model(d, 2, 1, &mut rng);
            let row = build_liouvillian(&model).trace_row();
            assert!(row.iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn single_site_chain_exact_objects() {
        let process = ChannelProcess::build(&xx_exact(1), Tolerances::default()).unwrap();
        let half = Q::one().div_ref(&Q::from_i64(2));
        let identity_half = Matrix::<Q>::identity(2).scale(&half);
        assert_eq!(process.steady_state().data, vecq(&identity_half));
        assert_eq!(process.no_jump().matrix, Matrix::identity(4).neg());
        assert_eq!(process.no_jump_inverse(), &Matrix::identity(4).neg());
        assert_eq!(process.jss().data, vecq(&identity_half));
        assert_eq!(process.activity(), &Q::one());
        let e = process.symbol_index("E").unwrap();
        let full = occupation_projector::<Q>("1").unwrap();
        let empty = occupation_projector::<Q>("0").unwrap();
        assert_eq!(process.apply(e, &vecq(&full)), vecq(&empty));
        // M_E equals J_E because L_0 = −1.
        assert_eq!(process.channel_map(e).matrix, process.jump_maps()[e].matrix);
    }

    #[test]
    fn heff_form_of_the_no_jump_generator() {
        let model = build_xy_chain::<C64>(&ChainSpec::xx(2, 0.7)).unwrap();
        let l0 = build_no_jump(&model).matrix;
        let d = model.dim();
        let mut heff = model.hamiltonian().clone();
        for j in model.jumps() {
            let ada = j.operator.adjoint().matmul(&j.operator).scale(&j.rate);
            heff = heff.sub(&ada.scale(&C64::new(0.0, 0.5)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = crate::random::random_density(d, &mut rng);
        let direct = heff.matmul(&rho).sub(&rho.matmul(&heff.adjoint())).scale(&C64::new(0.0, -1.0));
        let via = VectorizedOperator { dim: d, data: l0.matvec(&vectorize(&rho).unwrap().data) }.unvectorize();
        assert!(via.max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn partial_monitoring_keeps_unmonitored_jumps() {
        let model = build_xy_chain::<Q>(&ChainSpec::xx(2, Param::from(1))).unwrap();
        let partial = model.with_monitored(["E"]).unwrap();
        let diff = build_no_jump(&partial).matrix.sub(&build_no_jump(&model).matrix);
        assert_eq!(diff, build_jump(&model, "I").unwrap().matrix);
    }

    #[test]
    fn exact_stationarity_and_normalization() {
        for l in 1..=2 {
            let p = ChannelProcess::build(&xx_exact(l), Tolerances::default()).unwrap();
            assert_eq!(p.total_map().apply(p.jss()), *p.jss());
            let ones = trace_functional::<Q>(p.dim());
            assert_eq!(p.total_map().matrix.vecmat(&ones), ones);
        }
    }

    #[test]
    fn dark_subspace_is_detected() {
        // Monitoring a decay channel on a qubit that also has an unmonitored
        // pump would be fine; monitoring nothing that ever fires is not.
        let d = 3;
        let mut a = Matrix::<C64>::zeros(d, d);
        a.set(1, 0, C64::one());
        let mut b = Matrix::<C64>::zeros(d, d);
        b.set(0, 1, C64::one());
        b.set(2, 1, C64::one());
        let model = OpenSystemModel::new(
            Matrix::zeros(d, d),
            vec![
                JumpChannel { label: "A".into(), rate: C64::one(), operator: a },
                JumpChannel { label: "B".into(), rate: C64::one(), operator: b },
            ],
            ["A"],
        )
        .unwrap();
        // Level 2 is reached only through B, and nothing leaves it.
        assert!(matches!(ChannelProcess::build(&model, Tolerances::default()), Err(Error::DarkSubspace)));
    }

    #[test]
    fn degenerate_steady_state_is_detected() {
        // Two decoupled decaying qubits sharing nothing: pump on level 0→1
        // and 2→3 with no connection between the blocks.
        let d = 4;
        let mut a = Matrix::<C64>::zeros(d, d);
        a.set(1, 0, C64::one());
        a.set(0, 1, C64::one());
        let mut b = Matrix::<C64>::zeros(d, d);
        b.set(3, 2, C64::one());
        b.set(2, 3, C64::one());
        let model = OpenSystemModel::new(
            Matrix::zeros(d, d),
            vec![
                JumpChannel { label: "A".into(), rate: C64::one(), operator: a },
                JumpChannel { label: "B".into(), rate: C64::one(), operator: b },
            ],
            ["A", "B"],
        )
        .unwrap();
        let err = ChannelProcess::build(&model, Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate { kernel_dim } if kernel_dim >= 2), "{err:?}");
    }

    #[test]
    fn positivity_on_single_site_projector() {
        let process = ChannelProcess::build(&xx_exact(1).to_c64(), Tolerances::default()).unwrap();
        let e = process.symbol_index("E").unwrap();
        let empty = occupation_projector::<C64>("0").unwrap();
        let image = process.channel_map(e).apply(&vectorize(&empty).unwrap());
        assert!(image.data.iter().all(|z| z.norm() == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let report = positivity_check(process.channel_map(e), 20, 1e-12, &mut rng).unwrap();
        assert!(report.worst_min_eigenvalue >= -1e-12);
    }

    #[test]
    fn drazin_kernel_and_eigensum_oracle() {
        let model = build_xy_chain::<C64>(&ChainSpec::xx(1, 1.0)).unwrap();
        let process = ChannelProcess::build(&model, Tolerances::default()).unwrap();
        let data = drazin_inverse(&process).unwrap();
        let lp = &data.drazin.matrix;
        assert!(lp.matvec(&process.steady_state().data).iter().all(|z| z.norm() < 1e-14));
        assert!(lp.vecmat(&trace_functional(1 << 1)).iter().all(|z| z.norm() < 1e-14));
        let oracle = drazin_by_eigensum(&process.liouvillian().matrix, Tolerances::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let v = vectorize(&crate::random::random_matrix(2, &mut rng)).unwrap().data;
            let a = lp.matvec(&v);
            let b = oracle.matvec(&v);
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12));
        }
        let report = verify_drazin_relations(&process, &data).unwrap();
        assert!(report.max() < 1e-10, "{report:?}");
    }

    #[test]
    fn drazin_identities_exact_for_two_sites() {
        let process = ChannelProcess::build(&xx_exact(2), Tolerances::default()).unwrap();
        let data = drazin_inverse(&process).unwrap();
        let report = verify_drazin_relations(&process, &data).unwrap();
        assert_eq!(report.max(), 0.0);
    }

    #[test]
    fn drazin_relations_refuse_partial_monitoring() {
        let model = build_xy_chain::<C64>(&ChainSpec::xx(2, 1.0)).unwrap().with_monitored(["E"]).unwrap();
        let process = ChannelProcess::build(&model, Tolerances::default()).unwrap();
        let data = drazin_inverse(&process).unwrap();
        assert!(matches!(verify_drazin_relations(&process, &data), Err(Error::Precondition(_))));
    }

    #[test]
    fn spectrum_contains_unit_eigenvalue() {
        let model = build_xy_chain::<C64>(&ChainSpec::xx(1, 1.0)).unwrap();
        let process = ChannelProcess::build(&model, Tolerances::default()).unwrap();
        let s = process.spectrum();
        assert!(s.eigenvalues.iter().any(|z| (z - 1.0).norm() < 1e-12));
        let dec = s.decomposition.as_ref().expect("diagonalizable on the jump range");
        let u = dec.right.column(dec.stationary);
        // The stationary right vector is π up to scale.
        let pi = &process.jss().data;
        let scale = VectorizedOperator { dim: 2, data: u.clone() }.trace();
        assert!(u.iter().zip(pi).all(|(a, b)| (a / scale - b).norm() < 1e-12));
        assert!(s.spectral_radius() <= 1.0 + 1e-10);
    }
}
