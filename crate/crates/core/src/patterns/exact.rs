//! Integer form of the exact channel maps.
//!
//! Every `M_k` has Gaussian-rational entries; scaling by the lcm `c_k` of
//! its denominators gives a Gaussian-integer map `N_k = c_k M_k`. A density
//! `ρ` is stored as the unique primitive Gaussian-integer vector `v` with
//! `ρ = v / tr v` and `tr v > 0`, so exact state equality is plain vector
//! equality and no rational reduction happens per step.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{ExactComplex, Matrix, C64};
use crate::channel::ChannelProcess;
use crate::error::{Error, Result};

pub type GaussInt = Complex<BigInt>;

/// Canonical exact post-jump state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactState {
    dim: usize,
    entries: Vec<GaussInt>,
}

fn lcm_denominators<'a>(values: impl Iterator<Item = &'a BigRational>) -> BigInt {
    values.filter(|r| !r.is_zero()).fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

fn scaled(r: &BigRational, scale: &BigInt) -> BigInt {
    r.numer() * (scale / r.denom())
}

impl ExactState {
    /// Canonicalizes a vectorized operator with positive trace.
    pub fn from_vectorized(dim: usize, data: &[ExactComplex]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!("state must have length {}", dim * dim)));
        }
        let scale = lcm_denominators(data.iter().flat_map(|z| [&z.re, &z.im]));
        let entries = data.iter().map(|z| Complex::new(scaled(&z.re, &scale), scaled(&z.im, &scale))).collect();
        Self::primitive(dim, entries).ok_or_else(|| Error::Precondition("state has no positive trace".into()))
    }

    pub fn from_matrix(m: &Matrix<ExactComplex>) -> Result<Self> {
        Self::from_vectorized(m.rows(), &crate::algebra::vectorize(m)?.data)
    }

    /// Divides out the content and fixes the sign so the trace is
    /// positive. `None` for zero or traceless vectors.
    fn primitive(dim: usize, mut entries: Vec<GaussInt>) -> Option<Self> {
        let mut g = BigInt::zero();
        for z in &entries {
            for part in [&z.re, &z.im] {
                if !part.is_zero() {
                    g = g.gcd(part);
                    if g.is_one() {
                        break;
                    }
                }
            }
            if g.is_one() {
                break;
            }
        }
        if g.is_zero() {
            return None;
        }
        if !g.is_one() {
            for z in entries.iter_mut() {
                if !z.re.is_zero() {
                    z.re /= &g;
                }
                if !z.im.is_zero() {
                    z.im /= &g;
                }
            }
        }
        let tr: BigInt = (0..dim).map(|i| &entries[i * dim + i].re).sum();
        if tr.is_zero() {
            return None;
        }
        if tr.is_negative() {
            for z in entries.iter_mut() {
                z.re = -&z.re;
                z.im = -&z.im;
            }
        }
        Some(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[GaussInt] {
        &self.entries
    }

    /// `tr v`, the common denominator of the density.
    pub fn trace(&self) -> BigInt {
        (0..self.dim).map(|i| &self.entries[i * self.dim + i].re).sum()
    }

    /// Largest bit length among the integers of the representation.
    pub fn bits(&self) -> u64 {
        self.entries.iter().map(|z| z.re.bits().max(z.im.bits())).max().unwrap_or(0)
    }

    /// The density `v / tr v`, vectorized.
    pub fn density(&self) -> Vec<ExactComplex> {
        let tr = self.trace();
        self.entries
            .iter()
            .map(|z| Complex::new(BigRational::new(z.re.clone(), tr.clone()), BigRational::new(z.im.clone(), tr.clone())))
            .collect()
    }

    pub fn density_matrix(&self) -> Matrix<ExactComplex> {
        crate::algebra::VectorizedOperator { dim: self.dim, data: self.density() }.unvectorize()
    }

    /// Floating density, accurate to about 2⁻⁶⁰ relative to the trace.
    pub fn to_c64(&self) -> Matrix<C64> {
        let tr = self.trace();
        let shift = tr.bits().saturating_sub(60);
        let t = (&tr >> shift).to_f64().unwrap_or(f64::NAN);
        let f = |x: &BigInt| (x >> shift).to_f64().unwrap_or(f64::NAN) / t;
        let data: Vec<C64> = self.entries.iter().map(|z| C64::new(f(&z.re), f(&z.im))).collect();
        crate::algebra::VectorizedOperator { dim: self.dim, data }.unvectorize()
    }

    /// Index of the basis projector this state equals, if any.
    pub fn basis_index(&self) -> Option<usize> {
        let mut nonzero = self.entries.iter().enumerate().filter(|(_, z)| !z.is_zero());
        let (idx, _) = nonzero.next()?;
        if nonzero.next().is_some() || idx % (self.dim + 1) != 0 {
            return None;
        }
        Some(idx / (self.dim + 1))
    }
}

#[derive(Clone, Debug)]
struct SparseMap {
    /// Nonzero entries of each column as `(row, value)`.
    columns: Vec<Vec<(usize, GaussInt)>>,
    scale: BigInt,
    /// `⟨⟨𝟙|N_k` restricted to its nonzero columns.
    trace_row: Vec<(usize, GaussInt)>,
}

fn gauss_mul(a: &GaussInt, b: &GaussInt) -> GaussInt {
    match (a.im.is_zero(), b.im.is_zero()) {
        (true, true) => Complex::new(&a.re * &b.re, BigInt::zero()),
        (true, false) => Complex::new(&a.re * &b.re, &a.re * &b.im),
        (false, true) => Complex::new(&a.re * &b.re, &a.im * &b.re),
        (false, false) => Complex::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re),
    }
}

/// The Gaussian-integer maps `N_k` of an exact process.
#[derive(Clone, Debug)]
pub struct IntegerChannels {
    dim: usize,
    alphabet: Vec<String>,
    maps: Vec<SparseMap>,
    jss: ExactState,
}

impl IntegerChannels {
    pub fn new(process: &ChannelProcess<ExactComplex>) -> Result<Self> {
        let d = process.dim();
        let n = d * d;
        let maps = process
            .channel_maps()
            .iter()
            .map(|m| {
                let data = m.matrix.data();
                let scale = lcm_denominators(data.iter().flat_map(|z| [&z.re, &z.im]));
                let mut columns = vec![Vec::new(); n];
                for r in 0..n {
                    for (c, column) in columns.iter_mut().enumerate() {
                        let z = &data[r * n + c];
                        if !(z.re.is_zero() && z.im.is_zero()) {
                            column.push((r, Complex::new(scaled(&z.re, &scale), scaled(&z.im, &scale))));
                        }
                    }
                }
                let trace_row = columns
                    .iter()
                    .enumerate()
                    .filter_map(|(c, col)| {
                        let s = col
                            .iter()
                            .filter(|(r, _)| r % (d + 1) == 0)
                            .fold(GaussInt::zero(), |acc, (_, z)| acc + z);
                        (!s.is_zero()).then_some((c, s))
                    })
                    .collect();
                SparseMap { columns, scale, trace_row }
            })
            .collect();
        let jss = ExactState::from_vectorized(d, &process.jss().data)?;
        Ok(Self { dim: d, alphabet: process.alphabet().to_vec(), maps, jss })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn jss(&self) -> &ExactState {
        &self.jss
    }

    /// Exact `tr(M_k ρ)` for every channel.
    pub fn weights(&self, state: &ExactState) -> Vec<BigRational> {
        let tr = state.trace();
        self.maps
            .iter()
            .map(|m| {
                let s: BigInt = m
                    .trace_row
                    .iter()
                    .filter(|(c, _)| !state.entries[*c].is_zero())
                    .map(|(c, t)| gauss_mul(t, &state.entries[*c]).re)
                    .sum();
                if s.is_zero() {
                    BigRational::zero()
                } else {
                    BigRational::new(s, &m.scale * &tr)
                }
            })
            .collect()
    }

    /// Normalized `M_k ρ / tr(M_k ρ)`, or `None` when it vanishes.
    pub fn apply(&self, k: usize, state: &ExactState) -> Option<ExactState> {
        let n = self.dim * self.dim;
        let mut out = vec![GaussInt::zero(); n];
        for (c, v) in state.entries.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for (r, z) in &self.maps[k].columns[c] {
                out[*r] += gauss_mul(z, v);
            }
        }
        ExactState::primitive(self.dim, out)
    }
}

/// Exact weights as doubles for sampling; exact zeros stay exactly zero.
pub fn weights_to_f64(weights: &[BigRational]) -> Vec<f64> {
    weights.iter().map(|w| if w.is_zero() { 0.0 } else { w.to_f64().unwrap_or(0.0) }).collect()
}
