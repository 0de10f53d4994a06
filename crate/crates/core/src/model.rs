//! Open-system model definitions and builders for boundary-driven
//! XX/XY spin chains.
//!
//! Basis convention: site 1 is the most significant tensor factor, and on
//! each site basis index 0 is the occupied (spin-up) level. Thus
//! `σ⁺ = [[0,1],[0,0]]` moves the empty level (index 1) to the occupied one.
//! Occupation strings such as `"110"` (sites 1 and 2 occupied) map to the
//! computational index with every bit flipped.

use std::collections::BTreeSet;

use crate::algebra::{Field, Matrix, Param};
use crate::error::{Error, Result};

/// A dissipation channel `ρ ↦ rate · A ρ A†` with jump operator
/// `L = √rate · A`. Keeping the rate separate lets exact models use
/// rates whose square root is irrational.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpChannel<T> {
    pub label: String,
    pub rate: T,
    pub operator: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpenSystemModel<T> {
    dim: usize,
    hamiltonian: Matrix<T>,
    jumps: Vec<JumpChannel<T>>,
    monitored: BTreeSet<String>,
}

impl<T: Field> OpenSystemModel<T> {
    pub fn new(
        hamiltonian: Matrix<T>,
        jumps: Vec<JumpChannel<T>>,
        monitored: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::InvalidModel("Hamiltonian is not square".into()));
        }
        let dim = hamiltonian.rows();
        if dim == 0 {
            return Err(Error::InvalidModel("Hilbert space is empty".into()));
        }
        if !hamiltonian.is_hermitian(1e-12) {
            return Err(Error::InvalidModel("Hamiltonian is not Hermitian".into()));
        }
        let mut labels = BTreeSet::new();
        for jump in &jumps {
            if jump.label.is_empty() || jump.label.contains(',') {
                return Err(Error::InvalidModel(format!("bad jump label `{}`", jump.label)));
            }
            if !labels.insert(jump.label.clone()) {
                return Err(Error::InvalidModel(format!("duplicate jump label `{}`", jump.label)));
            }
            if jump.operator.rows() != dim || jump.operator.cols() != dim {
                return Err(Error::InvalidModel(format!("jump `{}` has the wrong dimension", jump.label)));
            }
            let rate = jump.rate.to_c64();
            if rate.im != 0.0 || rate.re <= 0.0 {
                return Err(Error::InvalidModel(format!("jump `{}` needs a positive real rate", jump.label)));
            }
        }
        let monitored: BTreeSet<String> = monitored.into_iter().map(Into::into).collect();
        if monitored.is_empty() {
            return Err(Error::InvalidModel("no channel is monitored".into()));
        }
        if let Some(bad) = monitored.iter().find(|m| !labels.contains(*m)) {
            return Err(Error::InvalidModel(format!("monitored channel `{bad}` does not exist")));
        }
        Ok(Self { dim, hamiltonian, jumps, monitored })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Matrix<T> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpChannel<T>] {
        &self.jumps
    }

    pub fn jump(&self, label: &str) -> Option<&JumpChannel<T>> {
        self.jumps.iter().find(|j| j.label == label)
    }

    /// Monitored labels in lexicographic order; this is the symbol alphabet.
    pub fn monitored(&self) -> Vec<String> {
        self.monitored.iter().cloned().collect()
    }

    pub fn is_monitored(&self, label: &str) -> bool {
        self.monitored.contains(label)
    }

    pub fn all_monitored(&self) -> bool {
        self.monitored.len() == self.jumps.len()
    }

    /// Same physics with a different monitored subset.
    pub fn with_monitored(&self, monitored: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        Self::new(self.hamiltonian.clone(), self.jumps.clone(), monitored)
    }

    /// Converts to the floating field.
    pub fn to_c64(&self) -> OpenSystemModel<crate::algebra::C64> {
        OpenSystemModel {
            dim: self.dim,
            hamiltonian: self.hamiltonian.to_c64(),
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpChannel { label: j.label.clone(), rate: j.rate.to_c64(), operator: j.operator.to_c64() })
                .collect(),
            monitored: self.monitored.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinKind {
    Plus,
    Minus,
    Z,
}

/// Boundary-driven chain parameters. The hopping amplitude sets the energy
/// unit; `kappa = 0` gives the XX chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub length: usize,
    pub hopping: Param,
    pub gamma: Param,
    pub kappa: Param,
}

impl ChainSpec {
    pub fn xx(length: usize, gamma: impl Into<Param>) -> Self {
        Self { length, hopping: Param::from(1), gamma: gamma.into(), kappa: Param::from(0) }
    }

    pub fn xy(length: usize, gamma: impl Into<Param>, kappa: impl Into<Param>) -> Self {
        Self { length, hopping: Param::from(1), gamma: gamma.into(), kappa: kappa.into() }
    }

    fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidModel("chain needs at least one site".into()));
        }
        if self.length > 6 {
            return Err(Error::InvalidModel(format!("chain length {} exceeds the supported 6 sites", self.length)));
        }
        if !self.gamma.is_positive() {
            return Err(Error::InvalidModel("gamma must be positive".into()));
        }
        Ok(())
    }
}

fn single_site<T: Field>(kind: SpinKind) -> Matrix<T> {
    let (z, o) = (T::zero(), T::one());
    let data = match kind {
        SpinKind::Plus => vec![z.clone(), o, z.clone(), z],
        SpinKind::Minus => vec![z.clone(), z.clone(), o, z],
        SpinKind::Z => vec![o.clone(), z.clone(), z, -o],
    };
    Matrix::new(2, 2, data).expect("2x2")
}

/// `I ⊗ … ⊗ σ ⊗ … ⊗ I` with `σ` on `site` (1-based) of an `length`-site chain.
pub fn spin_operator<T: Field>(site: usize, kind: SpinKind, length: usize) -> Result<Matrix<T>> {
    if site == 0 || site > length {
        return Err(Error::InvalidModel(format!("site {site} outside 1..={length}")));
    }
    let mut op = Matrix::<T>::identity(1);
    for s in 1..=length {
        let factor = if s == site { single_site(kind) } else { Matrix::identity(2) };
        op = op.kron(&factor);
    }
    Ok(op)
}

/// Computational basis index of an occupation string like `"110"`.
pub fn occupation_index(occupation: &str) -> Result<usize> {
    let mut index = 0usize;
    for ch in occupation.chars() {
        let bit = match ch {
            '1' => 0,
            '0' => 1,
            _ => return Err(Error::Parse(format!("bad occupation string `{occupation}`"))),
        };
        index = (index << 1) | bit;
    }
    Ok(index)
}

/// Inverse of [`occupation_index`] for a `length`-site chain.
pub fn occupation_string(index: usize, length: usize) -> String {
    (0..length).rev().map(|b| if (index >> b) & 1 == 0 { '1' } else { '0' }).collect()
}

/// The pure-state projector onto an occupation configuration.
pub fn occupation_projector<T: Field>(occupation: &str) -> Result<Matrix<T>> {
    let d = 1usize << occupation.len();
    let idx = occupation_index(occupation)?;
    let mut m = Matrix::zeros(d, d);
    m.set(idx, idx, T::one());
    Ok(m)
}

/// Total number operator `Σ σ⁺ᵢσ⁻ᵢ`.
pub fn number_operator<T: Field>(length: usize) -> Matrix<T> {
    let d = 1usize << length;
    let mut n = Matrix::zeros(d, d);
    for site in 1..=length {
        let plus = spin_operator::<T>(site, SpinKind::Plus, length).expect("valid site");
        let minus = spin_operator::<T>(site, SpinKind::Minus, length).expect("valid site");
        n = n.add(&plus.matmul(&minus));
    }
    n
}

/// Boundary-driven chain: XX hopping plus optional pairing, injection `I`
/// on site 1 and extraction `E` on site `L`, both monitored.
pub fn build_xy_chain<T: Field>(spec: &ChainSpec) -> Result<OpenSystemModel<T>> {
    spec.validate()?;
    let l = spec.length;
    let hopping = T::from_param(&spec.hopping)?;
    let kappa = T::from_param(&spec.kappa)?;
    let gamma = T::from_param(&spec.gamma)?;
    let d = 1usize << l;
    let mut h = Matrix::<T>::zeros(d, d);
    for i in 1..l {
        let p_i = spin_operator::<T>(i, SpinKind::Plus, l)?;
        let m_i = spin_operator::<T>(i, SpinKind::Minus, l)?;
        let p_j = spin_operator::<T>(i + 1, SpinKind::Plus, l)?;
        let m_j = spin_operator::<T>(i + 1, SpinKind::Minus, l)?;
        let hop = p_i.matmul(&m_j).add(&m_i.matmul(&p_j));
        h = h.add(&hop.scale(&hopping));
        if !kappa.is_zero() {
            let pair = p_i.matmul(&p_j).add(&m_i.matmul(&m_j));
            h = h.add(&pair.scale(&kappa));
        }
    }
    let jumps = vec![
        JumpChannel { label: "I".into(), rate: gamma.clone(), operator: spin_operator(1, SpinKind::Plus, l)? },
        JumpChannel { label: "E".into(), rate: gamma, operator: spin_operator(l, SpinKind::Minus, l)? },
    ];
    OpenSystemModel::new(h, jumps, ["I", "E"])
}

/// `[H, N] = 0` exactly (or to 1e-12 in floats).
pub fn particle_number_conserved<T: Field>(model: &OpenSystemModel<T>) -> bool {
    let d = model.dim();
    if !d.is_power_of_two() {
        return false;
    }
    let n = number_operator::<T>(d.trailing_zeros() as usize);
    let c = model.hamiltonian().commutator(&n);
    if T::EXACT {
        c.is_zero()
    } else {
        c.max_abs() <= 1e-12
    }
}
