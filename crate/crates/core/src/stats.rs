//! Channel-sequence statistics: multi-point probabilities
//! `P(k₁,…,k_N) = tr{M_{k_N}⋯M_{k₁}ρ}`, marginals, two-point laws in direct
//! and spectral form, mutual information, conditionals and log-likelihoods.

use rayon::prelude::*;

use crate::algebra::{Field, C64};
use crate::channel::ChannelProcess;
use crate::error::{Error, Result};
use crate::io::{csv, format_float};

/// Default bound on `|𝕄|^N` for full enumeration.
pub const ENUMERATION_CAP: u128 = 1 << 16;

/// Floating negativity above this is clamped to zero and counted.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Symbol indices into the process alphabet.
pub type SymbolSequence = Vec<usize>;

/// Parses `EIE` (one character per label) or `E,I,E` (comma separated).
pub fn parse_sequence(alphabet: &[String], text: &str) -> Result<SymbolSequence> {
    let text = text.trim();
    let lookup = |s: &str| alphabet.iter().position(|a| a == s).ok_or_else(|| Error::UnknownSymbol(s.to_string()));
    if text.contains(',') {
        return text.split(',').map(|s| lookup(s.trim())).collect();
    }
    let mut out = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let hit = alphabet
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_empty() && rest.starts_with(a.as_str()))
            .max_by_key(|(_, a)| a.len());
        match hit {
            Some((k, a)) => {
                out.push(k);
                rest = &rest[a.len()..];
            }
            None => return Err(Error::UnknownSymbol(rest.chars().next().map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

/// Labels joined without separator.
pub fn format_sequence(alphabet: &[String], seq: &[usize]) -> String {
    seq.iter().map(|&k| alphabet[k].as_str()).collect()
}

fn check_symbols<T: Field>(process: &ChannelProcess<T>, seq: &[usize]) -> Result<()> {
    let m = process.alphabet().len();
    match seq.iter().find(|&&k| k >= m) {
        Some(k) => Err(Error::UnknownSymbol(format!("#{k}"))),
        None => Ok(()),
    }
}

fn initial_or_jss<'a, T: Field>(process: &'a ChannelProcess<T>, initial: Option<&'a [T]>) -> Result<&'a [T]> {
    match initial {
        Some(rho) if rho.len() != process.dim() * process.dim() => {
            Err(Error::Dimension(format!("initial state must have length {}", process.dim() * process.dim())))
        }
        Some(rho) => Ok(rho),
        None => Ok(&process.jss().data),
    }
}

/// `tr{M_{k_N}⋯M_{k₁}ρ}` by repeated map–vector products; `initial`
/// defaults to the jump steady state `π`.
pub fn sequence_probability<T: Field>(process: &ChannelProcess<T>, seq: &[usize], initial: Option<&[T]>) -> Result<T> {
    if seq.is_empty() {
        return Err(Error::Precondition("sequence must be nonempty".into()));
    }
    check_symbols(process, seq)?;
    let rho = initial_or_jss(process, initial)?;
    let (last, head) = seq.split_last().expect("nonempty");
    let mut state = rho.to_vec();
    for &k in head {
        state = process.apply(k, &state);
    }
    Ok(process.weight(*last, &state))
}

/// Probabilities of every length-N tuple, lexicographic in the alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    pub order: usize,
    pub alphabet: Vec<String>,
    pub probabilities: Vec<f64>,
    pub diagnostics: ClampDiagnostics,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClampDiagnostics {
    /// Entries that were negative within tolerance and reported as 0.
    pub clamped: usize,
    /// Most negative raw value seen.
    pub most_negative: f64,
}

impl JointDistribution {
    pub fn from_raw(order: usize, alphabet: Vec<String>, raw: Vec<f64>) -> Result<Self> {
        let mut diagnostics = ClampDiagnostics::default();
        let mut probabilities = raw;
        for p in probabilities.iter_mut() {
            if *p < 0.0 {
                diagnostics.most_negative = diagnostics.most_negative.min(*p);
                if *p < -CLAMP_TOLERANCE {
                    return Err(Error::PositivityViolation { worst: *p });
                }
                diagnostics.clamped += 1;
                *p = 0.0;
            }
        }
        Ok(Self { order, alphabet, probabilities, diagnostics })
    }

    /// Index of a tuple: `Σ k_i m^{N−i}`.
    pub fn index(&self, seq: &[usize]) -> usize {
        let m = self.alphabet.len();
        seq.iter().fold(0, |acc, &k| acc * m + k)
    }

    pub fn tuple(&self, index: usize) -> SymbolSequence {
        let m = self.alphabet.len();
        let mut out = vec![0; self.order];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
        out
    }

    pub fn get(&self, seq: &[usize]) -> f64 {
        self.probabilities[self.index(seq)]
    }

    pub fn get_labels(&self, text: &str) -> Result<f64> {
        let seq = parse_sequence(&self.alphabet, text)?;
        if seq.len() != self.order {
            return Err(Error::Precondition(format!("expected a tuple of length {}", self.order)));
        }
        Ok(self.get(&seq))
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        (0..self.probabilities.len()).map(|i| (format_sequence(&self.alphabet, &self.tuple(i)), self.probabilities[i]))
    }

    /// `sequence,probability` with labels joined without separator.
    pub fn to_csv(&self) -> String {
        csv("sequence,probability", self.entries().map(|(s, p)| [s, format_float(p)]))
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self.probabilities.iter().zip(&other.probabilities).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

pub fn enumeration_size(alphabet_len: usize, n: usize, cap: u128) -> Result<usize> {
    let requested = (alphabet_len as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if requested > cap {
        return Err(Error::CapExceeded { requested, cap });
    }
    Ok(requested as usize)
}

/// Fills `out` (length `m^depth`) with the probabilities of every
/// continuation of `state`, sharing prefixes so the cost is `m^{depth−1}`
/// map applications.
pub(crate) fn fill_tree<T: Field>(process: &ChannelProcess<T>, state: &[T], depth: usize, out: &mut [T]) {
    let m = process.alphabet().len();
    if depth == 1 {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = process.weight(k, state);
        }
        return;
    }
    let block = out.len() / m;
    for (k, chunk) in out.chunks_mut(block).enumerate() {
        let next = process.apply(k, state);
        fill_tree(process, &next, depth - 1, chunk);
    }
}

/// Every tuple probability of length `n` starting from `state`, in the
/// field of the process. Parallel over the first symbol.
pub fn tuple_probabilities<T: Field>(process: &ChannelProcess<T>, state: &[T], n: usize, cap: u128) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::Precondition("order must be at least 1".into()));
    }
    let m = process.alphabet().len();
    let size = enumeration_size(m, n, cap)?;
    let mut out = vec![T::zero(); size];
    if n == 1 {
        fill_tree(process, state, 1, &mut out);
        return Ok(out);
    }
    out.par_chunks_mut(size / m).enumerate().for_each(|(k, chunk)| {
        let next = process.apply(k, state);
        fill_tree(process, &next, n - 1, chunk);
    });
    Ok(out)
}

/// `P(k₁,…,k_N)` from `π` for every tuple.
pub fn full_distribution<T: Field>(process: &ChannelProcess<T>, n: usize) -> Result<JointDistribution> {
    full_distribution_from(process, n, None, ENUMERATION_CAP)
}

pub fn full_distribution_from<T: Field>(
    process: &ChannelProcess<T>,
    n: usize,
    initial: Option<&[T]>,
    cap: u128,
) -> Result<JointDistribution> {
    let rho = initial_or_jss(process, initial)?;
    let raw = tuple_probabilities(process, rho, n, cap)?;
    JointDistribution::from_raw(n, process.alphabet().to_vec(), raw.iter().map(|p| p.to_c64().re).collect())
}

/// `P(k) = tr{J_k ρ_ss}/K`, which equals `tr{M_k π}`.
pub fn single_outcome<T: Field>(process: &ChannelProcess<T>, k: usize) -> Result<T> {
    check_symbols(process, &[k])?;
    let jk = process.jump_maps()[k].matrix.matvec(&process.steady_state().data);
    let tr = crate::algebra::VectorizedOperator { dim: process.dim(), data: jk }.trace();
    Ok(tr.div_ref(process.activity()))
}

/// Particle current of a boundary-driven chain, `γ·P(E)`.
pub fn chain_current<T: Field>(process: &ChannelProcess<T>, gamma: f64) -> Result<f64> {
    let e = process.symbol_index("E")?;
    Ok(gamma * single_outcome(process, e)?.to_c64().re)
}

/// `tr{M_{k_N} M^{N−2} M_{k₁} π}` by repeated multiplication.
pub fn two_point<T: Field>(process: &ChannelProcess<T>, k1: usize, kn: usize, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::Precondition("two-point law needs N ≥ 2".into()));
    }
    check_symbols(process, &[k1, kn])?;
    let mut state = process.apply(k1, &process.jss().data);
    for _ in 0..n - 2 {
        state = process.total_map().matrix.matvec(&state);
    }
    Ok(process.weight(kn, &state))
}

/// `P(k₁)P(k_N) + Σ_{j≠stat} μ_j^{N−2} tr{M_{k_N}ℙ_j M_{k₁}π}` from the
/// cached eigenprojector factors. Refused when `M` is defective.
pub fn spectral_two_point<T: Field>(process: &ChannelProcess<T>, k1: usize, kn: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("two-point law needs N ≥ 2".into()));
    }
    check_symbols(process, &[k1, kn])?;
    let spectrum = process.spectrum();
    let dec = spectrum.decomposition.as_ref().ok_or(Error::NotDiagonalizable { condition: spectrum.condition })?;
    let power = (n - 2) as i32;
    let mut total = C64::new(0.0, 0.0);
    for (j, mu) in dec.values.iter().enumerate() {
        // μ⁰ = 1 even for μ = 0.
        let weight = if power == 0 { C64::new(1.0, 0.0) } else { mu.powi(power) };
        total += weight * dec.emission[kn][j] * dec.injection[j][k1];
    }
    Ok(total.re)
}

/// Table of `P(k₁, k_N)` with `k₁` as row index.
pub fn two_point_table<T: Field>(process: &ChannelProcess<T>, n: usize) -> Result<Vec<Vec<f64>>> {
    let m = process.alphabet().len();
    (0..m).map(|a| (0..m).map(|b| two_point(process, a, b, n).map(|p| p.to_c64().re)).collect()).collect()
}

/// `I(k₁:k_N) = Σ P(k₁,k_N) ln[P(k₁,k_N)/(P(k₁)P(k_N))]` in nats, with
/// `0·ln 0 = 0`.
pub fn mutual_information<T: Field>(process: &ChannelProcess<T>, n: usize) -> Result<f64> {
    Ok(mutual_information_of(&two_point_table(process, n)?))
}

pub fn mutual_information_of(joint: &[Vec<f64>]) -> f64 {
    let m = joint.len();
    let row: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..m).map(|b| joint.iter().map(|r| r[b]).sum()).collect();
    let mut info = 0.0;
    for a in 0..m {
        for b in 0..m {
            let p = joint[a][b];
            if p > 0.0 {
                info += p * (p / (row[a] * col[b])).ln();
            }
        }
    }
    info
}

/// `P(k_{N+1}|k₁…k_N)` for every next symbol.
pub fn conditional_next<T: Field>(process: &ChannelProcess<T>, history: &[usize], initial: Option<&[T]>) -> Result<Vec<T>> {
    check_symbols(process, history)?;
    let mut state = initial_or_jss(process, initial)?.to_vec();
    for &k in history {
        let next = process.apply(k, &state);
        let w = process.weight(k, &state);
        if w.is_negligible(CLAMP_TOLERANCE) {
            return Err(Error::ZeroProbabilityHistory);
        }
        state = next.iter().map(|x| x.div_ref(&w)).collect();
    }
    Ok((0..process.alphabet().len()).map(|k| process.weight(k, &state)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLikelihood {
    /// `ln P(seq)`, `-inf` when impossible.
    pub value: f64,
    pub impossible: bool,
    /// Number of symbols consumed before the first zero-probability step.
    pub steps: usize,
}

/// `ln P(seq)` accumulated stepwise with renormalization, so long strings
/// do not underflow.
pub fn log_likelihood<T: Field>(process: &ChannelProcess<T>, seq: &[usize], initial: Option<&[T]>) -> Result<LogLikelihood> {
    if seq.is_empty() {
        return Err(Error::Precondition("sequence must be nonempty".into()));
    }
    check_symbols(process, seq)?;
    let mut state = initial_or_jss(process, initial)?.to_vec();
    let mut value = 0.0;
    for (i, &k) in seq.iter().enumerate() {
        let w = process.weight(k, &state);
        let wf = w.to_c64().re;
        if w.is_negligible(1e-14) || wf <= 0.0 {
            return Ok(LogLikelihood { value: f64::NEG_INFINITY, impossible: true, steps: i });
        }
        value += wf.ln();
        if i + 1 < seq.len() {
            state = process.apply(k, &state).iter().map(|x| x.div_ref(&w)).collect();
        }
    }
    Ok(LogLikelihood { value, impossible: false, steps: seq.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{vectorize, ExactComplex, Param, Tolerances};
    use crate::model::{build_xy_chain, occupation_projector, ChainSpec};

    type Q = ExactComplex;

    fn xx<T: Field>(l: usize) -> ChannelProcess<T> {
        ChannelProcess::build(&build_xy_chain::<T>(&ChainSpec::xx(l, Param::from(1))).unwrap(), Tolerances::default())
            .unwrap()
    }

    fn q(n: i64, d: i64) -> Q {
        Q::from_i64(n).div_ref(&Q::from_i64(d))
    }

    fn seq(p: &ChannelProcess<impl Field>, s: &str) -> SymbolSequence {
        parse_sequence(p.alphabet(), s).unwrap()
    }

    #[test]
    fn sequence_parsing() {
        let alphabet = vec!["E".to_string(), "I".to_string()];
        assert_eq!(parse_sequence(&alphabet, "EIE").unwrap(), vec![0, 1, 0]);
        assert_eq!(parse_sequence(&alphabet, "E,I").unwrap(), vec![0, 1]);
        assert!(matches!(parse_sequence(&alphabet, "EX"), Err(Error::UnknownSymbol(s)) if s == "X"));
        assert_eq!(format_sequence(&alphabet, &[1, 0, 0]), "IEE");
    }

    #[test]
    fn single_site_sequences() {
        let p = xx::<Q>(1);
        assert_eq!(sequence_probability(&p, &seq(&p, "E"), None).unwrap(), q(1, 2));
        assert_eq!(sequence_probability(&p, &seq(&p, "EE"), None).unwrap(), Q::zero());
        assert_eq!(sequence_probability(&p, &seq(&p, "EIE"), None).unwrap(), q(1, 2));
        assert!(sequence_probability(&p, &[], None).is_err());
    }

    #[test]
    fn single_site_distribution() {
        let p = xx::<Q>(1);
        let dist = full_distribution(&p, 2).unwrap();
        assert_eq!(dist.get_labels("EI").unwrap(), 0.5);
        assert_eq!(dist.get_labels("IE").unwrap(), 0.5);
        assert_eq!(dist.get_labels("EE").unwrap(), 0.0);
        assert_eq!(dist.get_labels("II").unwrap(), 0.0);
        assert_eq!(dist.to_csv(), "sequence,probability\nEE,0\nEI,0.5\nIE,0.5\nII,0\n");
    }

    #[test]
    fn two_site_distribution_exact() {
        let p = xx::<Q>(2);
        for (s, want) in [("EE", q(1, 8)), ("EI", q(3, 8)), ("IE", q(3, 8)), ("II", q(1, 8))] {
            assert_eq!(sequence_probability(&p, &seq(&p, s), None).unwrap(), want, "{s}");
        }
        assert_eq!(two_point(&p, 0, 0, 2).unwrap(), q(1, 8));
        assert_eq!(single_outcome(&p, 0).unwrap(), q(1, 2));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let p = xx::<C64>(1);
        assert!(matches!(full_distribution(&p, 17), Err(Error::CapExceeded { requested, .. }) if requested == 1 << 17));
    }

    #[test]
    fn single_outcome_matches_first_marginal() {
        let p = xx::<C64>(3);
        let dist = full_distribution(&p, 1).unwrap();
        for k in 0..2 {
            assert!((single_outcome(&p, k).unwrap().re - dist.probabilities[k]).abs() < 1e-12);
        }
        assert!((chain_current(&p, 1.0).unwrap() - dist.probabilities[0]).abs() < 1e-12);
    }

    #[test]
    fn marginals_are_shift_invariant_at_jss_only() {
        let p = xx::<C64>(2);
        let d3 = full_distribution(&p, 3).unwrap();
        let d2 = full_distribution(&p, 2).unwrap();
        for i in 0..4 {
            let t = d2.tuple(i);
            let summed: f64 = (0..2).map(|k0| d3.get(&[k0, t[0], t[1]])).sum();
            assert!((summed - d2.probabilities[i]).abs() < 1e-12);
        }
        let full = vectorize(&occupation_projector::<C64>("11").unwrap()).unwrap().data;
        let e3 = full_distribution_from(&p, 3, Some(&full), ENUMERATION_CAP).unwrap();
        let e2 = full_distribution_from(&p, 2, Some(&full), ENUMERATION_CAP).unwrap();
        let deviation = (0..4)
            .map(|i| {
                let t = e2.tuple(i);
                let summed: f64 = (0..2).map(|k0| e3.get(&[k0, t[0], t[1]])).sum();
                (summed - e2.probabilities[i]).abs()
            })
            .fold(0.0, f64::max);
        assert!(deviation > 1e-3);
    }

    #[test]
    fn spectral_and_direct_two_point_agree() {
        for l in 1..=3 {
            let p = xx::<C64>(l);
            for n in 2..=8 {
                for a in 0..2 {
                    for b in 0..2 {
                        let direct = two_point(&p, a, b, n).unwrap().re;
                        let spectral = spectral_two_point(&p, a, b, n).unwrap();
                        assert!((direct - spectral).abs() < 1e-10, "L={l} N={n}: {direct} vs {spectral}");
                    }
                }
            }
        }
    }

    #[test]
    fn two_point_decorrelates() {
        let p = xx::<C64>(2);
        let far = two_point(&p, 0, 0, 60).unwrap().re;
        let pe = single_outcome(&p, 0).unwrap().re;
        assert!((far - pe * pe).abs() < 1e-8);
    }

    #[test]
    fn mutual_information_values() {
        assert!((mutual_information(&xx::<C64>(1), 2).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let want = -0.25 * 2f64.ln() + 0.75 * 1.5f64.ln();
        assert!((mutual_information(&xx::<C64>(2), 2).unwrap() - want).abs() < 1e-12);
        assert_eq!(mutual_information_of(&[vec![0.25, 0.25], vec![0.25, 0.25]]), 0.0);
    }

    #[test]
    fn conditionals() {
        let p = xx::<Q>(1);
        assert_eq!(conditional_next(&p, &seq(&p, "E"), None).unwrap(), vec![Q::zero(), Q::one()]);
        let p2 = xx::<Q>(2);
        assert_eq!(conditional_next(&p2, &seq(&p2, "EE"), None).unwrap(), vec![Q::zero(), Q::one()]);
        let empty = conditional_next(&p2, &[], None).unwrap();
        assert_eq!(empty, vec![single_outcome(&p2, 0).unwrap(), single_outcome(&p2, 1).unwrap()]);
        assert!(matches!(conditional_next(&p, &seq(&p, "EE"), None), Err(Error::ZeroProbabilityHistory)));
    }

    #[test]
    fn chain_rule() {
        let p = xx::<C64>(3);
        let s = seq(&p, "EIIEEIE");
        let direct = sequence_probability(&p, &s, None).unwrap().re;
        let mut product = 1.0;
        for i in 0..s.len() {
            product *= conditional_next(&p, &s[..i], None).unwrap()[s[i]].re;
        }
        assert!((direct - product).abs() < 1e-12);
    }

    #[test]
    fn log_likelihoods() {
        let p = xx::<C64>(1);
        let ll = log_likelihood(&p, &seq(&p, "EIEIE"), None).unwrap();
        assert!(!ll.impossible);
        assert!((ll.value - 0.5f64.ln()).abs() < 1e-12);
        let bad = log_likelihood(&p, &seq(&p, "EE"), None).unwrap();
        assert!(bad.impossible && bad.value == f64::NEG_INFINITY && bad.steps == 1);
        let s3 = xx::<C64>(3);
        let s = seq(&s3, "EIIEEIEIEEIIEIE");
        let ll = log_likelihood(&s3, &s, None).unwrap();
        let direct = sequence_probability(&s3, &s, None).unwrap().re;
        assert!((ll.value.exp() - direct).abs() <= 1e-9 * direct);
    }
}
