//! Interchange formats: `%.12g`-style floats, matrix and model JSON, CSV.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{parse_rational, Field, Matrix, Param};
use crate::error::{Error, Result};
use crate::model::{JumpChannel, OpenSystemModel};

/// Formats like C's `%.12g`: twelve significant digits, trailing zeros
/// trimmed, exponent form outside `[1e-4, 1e12)`.
pub fn format_float(x: f64) -> String {
    format_sig(x, 12)
}

pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `{dim, entries: [[re, im], …]}` with row-major entries. Float matrices
/// carry numbers; exact matrices carry `"p/q"` strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[Value; 2]>,
}

fn exact_part(r: &num_rational::BigRational) -> Value {
    Value::String(crate::algebra::format_rational(r))
}

pub fn matrix_to_json<T: Field + ToJsonEntry>(m: &Matrix<T>) -> Result<MatrixJson> {
    if !m.is_square() {
        return Err(Error::Dimension("interchange matrices must be square".into()));
    }
    Ok(MatrixJson { dim: m.rows(), entries: m.data().iter().map(ToJsonEntry::to_entry).collect() })
}

pub fn matrix_from_json<T: Field>(json: &MatrixJson) -> Result<Matrix<T>> {
    if json.entries.len() != json.dim * json.dim {
        return Err(Error::Parse(format!(
            "matrix of dim {} needs {} entries, found {}",
            json.dim,
            json.dim * json.dim,
            json.entries.len()
        )));
    }
    let data = json.entries.iter().map(|[re, im]| scalar_from_json::<T>(re, im)).collect::<Result<Vec<T>>>()?;
    Matrix::new(json.dim, json.dim, data)
}

fn param_from_value(v: &Value) -> Result<Param> {
    match v {
        Value::Number(n) => {
            // The textual form keeps decimals such as 0.5 exact.
            Ok(Param::Rational(parse_rational(&n.to_string())?))
        }
        Value::String(s) => Ok(Param::Rational(parse_rational(s)?)),
        other => Err(Error::Parse(format!("expected a number or rational string, found {other}"))),
    }
}

fn scalar_from_json<T: Field>(re: &Value, im: &Value) -> Result<T> {
    let re = T::from_param(&param_from_value(re)?)?;
    let im = T::from_param(&param_from_value(im)?)?;
    Ok(re.add_ref(&im.mul_ref(&T::imag_unit())))
}

pub trait ToJsonEntry {
    fn to_entry(&self) -> [Value; 2];
}

impl ToJsonEntry for crate::algebra::C64 {
    fn to_entry(&self) -> [Value; 2] {
        let num = |x: f64| serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null);
        [num(self.re), num(self.im)]
    }
}

impl ToJsonEntry for crate::algebra::ExactComplex {
    fn to_entry(&self) -> [Value; 2] {
        [exact_part(&self.re), exact_part(&self.im)]
    }
}

/// A user-supplied Lindbladian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub hamiltonian: MatrixJson,
    pub jumps: Vec<JumpJson>,
    /// Defaults to every channel.
    #[serde(default)]
    pub monitored: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpJson {
    pub label: String,
    /// Defaults to 1.
    #[serde(default)]
    pub rate: Option<Value>,
    pub operator: MatrixJson,
}

pub fn model_from_json<T: Field>(json: &ModelJson) -> Result<OpenSystemModel<T>> {
    let h = matrix_from_json::<T>(&json.hamiltonian)?;
    let jumps = json
        .jumps
        .iter()
        .map(|j| {
            let rate = match &j.rate {
                Some(v) => T::from_param(&param_from_value(v)?)?,
                None => T::one(),
            };
            Ok(JumpChannel { label: j.label.clone(), rate, operator: matrix_from_json::<T>(&j.operator)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let monitored: Vec<String> = match &json.monitored {
        Some(m) => m.clone(),
        None => jumps.iter().map(|j| j.label.clone()).collect(),
    };
    OpenSystemModel::new(h, jumps, monitored)
}

/// Joins cells with commas, one row per line, no quoting (cells never
/// contain commas).
pub fn csv<I, R, S>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(|c| c.as_ref().to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Square matrix of floats as CSV without header.
pub fn matrix_csv(m: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in m {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ExactComplex, C64};

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(0.375), "0.375");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(-2.5), "-2.5");
        assert_eq!(format_float(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(1.5e-5), "1.5e-05");
        assert_eq!(format_float(1e12), "1e+12");
        assert_eq!(format_float(123456789012.0), "123456789012");
        assert_eq!(format_float(0.0001), "0.0001");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn float_matrix_round_trip() {
        let m = Matrix::new(2, 2, vec![C64::new(1.0, 0.0), C64::new(0.25, -1.5), C64::new(0.0, 0.0), C64::new(-3.0, 2.0)])
            .unwrap();
        let json = matrix_to_json(&m).unwrap();
        let text = serde_json::to_string(&json).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(matrix_from_json::<C64>(&back).unwrap(), m);
    }

    #[test]
    fn exact_matrix_round_trip() {
        let text = r#"{"dim": 2, "entries": [["1/2", "0"], ["0", "3/8"], ["0", "-3/8"], [0.5, 0]]}"#;
        let json: MatrixJson = serde_json::from_str(text).unwrap();
        let m = matrix_from_json::<ExactComplex>(&json).unwrap();
        assert_eq!(m.get(0, 1).im, parse_rational("3/8").unwrap());
        assert_eq!(m.get(1, 1).re, parse_rational("1/2").unwrap());
        let again = matrix_to_json(&m).unwrap();
        assert_eq!(again.entries[1][1], Value::String("3/8".into()));
        assert_eq!(matrix_from_json::<ExactComplex>(&again).unwrap(), m);
    }

    #[test]
    fn wrong_entry_count_is_rejected() {
        let json = MatrixJson { dim: 2, entries: vec![[Value::from(1), Value::from(0)]] };
        assert!(matches!(matrix_from_json::<C64>(&json), Err(Error::Parse(_))));
    }

    #[test]
    fn model_file_defaults_to_full_monitoring() {
        let text = r#"{
            "hamiltonian": {"dim": 2, "entries": [[0,0],[0,0],[0,0],[0,0]]},
            "jumps": [{"label": "D", "rate": "1/2", "operator": {"dim": 2, "entries": [[0,0],[0,0],[1,0],[0,0]]}}]
        }"#;
        let json: ModelJson = serde_json::from_str(text).unwrap();
        let model = model_from_json::<ExactComplex>(&json).unwrap();
        assert_eq!(model.monitored(), vec!["D".to_string()]);
        assert_eq!(model.jumps()[0].rate.re, parse_rational("1/2").unwrap());
    }

    #[test]
    fn csv_layout() {
        let out = csv("sequence,probability", [["EI", "0.5"], ["IE", "0.5"]]);
        assert_eq!(out, "sequence,probability\nEI,0.5\nIE,0.5\n");
    }
}
