//! JSON problem and solution files.
//!
//! Complex scalars are two-element arrays `[re, im]`. Floats are written in
//! shortest round-trip form, so `load(save(p)) == p` bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{validate, RabProblem, ValidationReport};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

type Pair = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    n: usize,
    m: usize,
    epsilon: f64,
    #[serde(rename = "R")]
    covariance: Vec<Vec<Pair>>,
    a: Vec<Pair>,
    #[serde(rename = "A")]
    transform: Vec<Vec<Pair>>,
}

/// Claimed solution `w`, optionally with the multipliers that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub w: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

impl SolutionFile {
    pub fn from_weights(w: &[Complex64]) -> Self {
        SolutionFile {
            w: w.iter().map(|z| [z.re, z.im]).collect(),
            verdict: None,
            objective: None,
            mu: None,
            k: None,
        }
    }

    pub fn weights(&self) -> Vec<Complex64> {
        self.w.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("solution file: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("solution serializes");
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(pair).collect()).collect()
}

fn parse_matrix(name: &str, rows: Vec<Vec<Pair>>, nrows: usize, ncols: usize) -> Result<ComplexMatrix> {
    if rows.len() != nrows {
        return Err(Error::Parse(format!(
            "field {name}: expected {nrows} rows, found {}",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(nrows * ncols);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "field {name}, row {i}: expected {ncols} entries, found {}",
                row.len()
            )));
        }
        data.extend(row.into_iter().map(|[re, im]| Complex64::new(re, im)));
    }
    ComplexMatrix::from_row_major(nrows, ncols, data)
}

pub fn to_json_string(p: &RabProblem) -> String {
    let file = ProblemFile {
        n: p.n(),
        m: p.m(),
        epsilon: p.epsilon,
        covariance: matrix_rows(&p.covariance),
        a: p.steering.iter().map(pair).collect(),
        transform: matrix_rows(&p.transform),
    };
    serde_json::to_string_pretty(&file).expect("problem serializes")
}

/// Parse a problem document. Shape errors are fatal; assumption violations
/// are returned in the report.
pub fn from_json_str(text: &str) -> Result<(RabProblem, ValidationReport)> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (n, m) = (file.n, file.m);
    if n == 0 {
        return Err(Error::Parse("field n: must be at least 1".into()));
    }
    if file.a.len() != n {
        return Err(Error::Parse(format!(
            "field a: expected {n} entries, found {}",
            file.a.len()
        )));
    }
    let covariance = parse_matrix("R", file.covariance, n, n)?;
    let transform = parse_matrix("A", file.transform, m, n)?;
    let steering = file.a.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    let problem = RabProblem {
        covariance,
        steering,
        transform,
        epsilon: file.epsilon,
    };
    let report = validate(&problem);
    Ok((problem, report))
}

pub fn save(p: &RabProblem, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(p) + "\n")?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<(RabProblem, ValidationReport)> {
    let text = fs::read_to_string(path)?;
    from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate, GeneratorConfig};
    use proptest::prelude::*;

    #[test]
    fn example_round_trip() {
        let p = RabProblem::real_diagonal(&[1.0, 3.0], &[1.0, 2.0], 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        save(&p, &path).unwrap();
        let (q, report) = load(&path).unwrap();
        assert_eq!(p, q);
        assert!(report.is_valid());
    }

    #[test]
    fn wrong_steering_length() {
        let text = r#"{"n": 2, "m": 2, "epsilon": 1.0,
            "R": [[[1,0],[0,0]],[[0,0],[3,0]]],
            "a": [[1,0]],
            "A": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        let err = from_json_str(text).unwrap_err().to_string();
        assert!(err.contains("field a"), "{err}");
    }

    #[test]
    fn ragged_transform_row() {
        let text = r#"{"n": 2, "m": 2, "epsilon": 1.0,
            "R": [[[1,0],[0,0]],[[0,0],[3,0]]],
            "a": [[1,0],[2,0]],
            "A": [[[1,0],[0,0]],[[0,0]]]}"#;
        let err = from_json_str(text).unwrap_err().to_string();
        assert!(err.contains("field A, row 1"), "{err}");
    }

    #[test]
    fn syntax_error_has_location() {
        let err = from_json_str("{\"n\": 2,\n \"m\": }").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn zero_epsilon_is_a_warning() {
        let mut p = RabProblem::real_diagonal(&[1.0, 3.0], &[1.0, 2.0], 1.0).unwrap();
        p.epsilon = 0.0;
        let (q, report) = from_json_str(&to_json_string(&p)).unwrap();
        assert_eq!(q.epsilon, 0.0);
        assert!(!report.epsilon_positive);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn generated_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..6) {
            let p = generate(&GeneratorConfig::full_rank(n, seed)).unwrap();
            let (q, _) = from_json_str(&to_json_string(&p)).unwrap();
            let bits = |m: &RabProblem| -> Vec<u64> {
                m.covariance.as_slice().iter()
                    .chain(m.steering.iter())
                    .chain(m.transform.as_slice().iter())
                    .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                    .chain(std::iter::once(m.epsilon.to_bits()))
                    .collect()
            };
            prop_assert_eq!(bits(&p), bits(&q));
        }
    }
}
