//! JSON file formats: colligations, output pairs, multiplier Taylor
//! series, interpolation specs and row contractions. Complex entries are
//! [re, im] pairs and matrices are stored row-major, so emit -> parse ->
//! emit is byte-identical and floating-point values round-trip exactly.

use serde::{Deserialize, Serialize};

use crate::beurling::{InterpolationSpec, PointCondition};
use crate::charfun::RowContraction;
use crate::colligation::{Colligation, OutputPair};
use crate::error::{EngineError, Result};
use crate::linalg::{cplx, C64, CMat};
use crate::mindex::{MultiIndex, TruncatedSeries};

pub type ComplexPair = [f64; 2];

fn to_pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

fn from_pair(p: ComplexPair) -> C64 {
    cplx(p[0], p[1])
}

fn matrix_to_flat(m: &CMat) -> Vec<ComplexPair> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(to_pair(m[(i, j)]));
        }
    }
    out
}

fn matrix_from_flat(rows: usize, cols: usize, flat: &[ComplexPair], what: &str) -> Result<CMat> {
    if flat.len() != rows * cols {
        return Err(EngineError::Invalid(format!(
            "{}: expected {} entries for a {}x{} matrix, got {}",
            what,
            rows * cols,
            rows,
            cols,
            flat.len()
        )));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| from_pair(flat[i * cols + j])))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ColligationFile {
    pub d: usize,
    pub dim_state: usize,
    pub dim_input: usize,
    pub dim_output: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<ComplexPair>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<ComplexPair>>,
    #[serde(rename = "C")]
    pub c: Vec<ComplexPair>,
    #[serde(rename = "D")]
    pub d_op: Vec<ComplexPair>,
}

impl ColligationFile {
    pub fn from_engine(col: &Colligation) -> Self {
        ColligationFile {
            d: col.d,
            dim_state: col.dim_state(),
            dim_input: col.dim_input(),
            dim_output: col.dim_output(),
            a: col.a.iter().map(matrix_to_flat).collect(),
            b: col.b.iter().map(matrix_to_flat).collect(),
            c: matrix_to_flat(&col.c),
            d_op: matrix_to_flat(&col.d_op),
        }
    }

    pub fn to_engine(&self) -> Result<Colligation> {
        if self.a.len() != self.d || self.b.len() != self.d {
            return Err(EngineError::Invalid(format!(
                "expected {} A/B blocks, got {}/{}",
                self.d,
                self.a.len(),
                self.b.len()
            )));
        }
        let p = self.dim_state;
        let q = self.dim_input;
        let r = self.dim_output;
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, flat)| matrix_from_flat(p, p, flat, &format!("A[{}]", j)))
            .collect::<Result<Vec<_>>>()?;
        let b = self
            .b
            .iter()
            .enumerate()
            .map(|(j, flat)| matrix_from_flat(p, q, flat, &format!("B[{}]", j)))
            .collect::<Result<Vec<_>>>()?;
        let c = matrix_from_flat(r, p, &self.c, "C")?;
        let d_op = matrix_from_flat(r, q, &self.d_op, "D")?;
        Colligation::new(self.d, a, b, c, d_op)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PairFile {
    pub d: usize,
    pub dim_state: usize,
    pub dim_output: usize,
    #[serde(rename = "C")]
    pub c: Vec<ComplexPair>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<ComplexPair>>,
}

impl PairFile {
    pub fn from_engine(pair: &OutputPair) -> Self {
        PairFile {
            d: pair.d,
            dim_state: pair.dim_state(),
            dim_output: pair.dim_output(),
            c: matrix_to_flat(&pair.c),
            a: pair.a.iter().map(matrix_to_flat).collect(),
        }
    }

    pub fn to_engine(&self) -> Result<OutputPair> {
        if self.a.len() != self.d {
            return Err(EngineError::Invalid(format!(
                "expected {} A blocks, got {}",
                self.d,
                self.a.len()
            )));
        }
        let p = self.dim_state;
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, flat)| matrix_from_flat(p, p, flat, &format!("A[{}]", j)))
            .collect::<Result<Vec<_>>>()?;
        let c = matrix_from_flat(self.dim_output, p, &self.c, "C")?;
        OutputPair::new(self.d, c, a)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MultiplierCoeff {
    pub n: Vec<usize>,
    pub value: Vec<ComplexPair>,
}

/// Taylor coefficient list keyed by multi-index, graded-lex ordered.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MultiplierFile {
    pub d: usize,
    pub rows: usize,
    pub cols: usize,
    pub degree_cap: usize,
    pub coeffs: Vec<MultiplierCoeff>,
}

impl MultiplierFile {
    pub fn from_engine(s: &TruncatedSeries) -> Self {
        MultiplierFile {
            d: s.d,
            rows: s.rows,
            cols: s.cols,
            degree_cap: s.degree_cap,
            coeffs: s
                .iter()
                .map(|(n, c)| MultiplierCoeff {
                    n: n.0.clone(),
                    value: matrix_to_flat(c),
                })
                .collect(),
        }
    }

    pub fn to_engine(&self) -> Result<TruncatedSeries> {
        let mut s = TruncatedSeries::zero(self.d, self.degree_cap, self.rows, self.cols);
        for coeff in &self.coeffs {
            if coeff.n.len() != self.d {
                return Err(EngineError::Invalid(format!(
                    "coefficient index {:?} has wrong dimension",
                    coeff.n
                )));
            }
            let idx = MultiIndex(coeff.n.clone());
            if idx.total() > self.degree_cap {
                return Err(EngineError::Invalid(format!(
                    "coefficient index {:?} exceeds the degree cap {}",
                    coeff.n, self.degree_cap
                )));
            }
            let value = matrix_from_flat(
                self.rows,
                self.cols,
                &coeff.value,
                &format!("coefficient {:?}", coeff.n),
            )?;
            s.set(idx, value);
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PointConditionFile {
    pub omega: Vec<ComplexPair>,
    pub x: Vec<ComplexPair>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct JetConditionFile {
    pub n: Vec<usize>,
    pub x: Vec<ComplexPair>,
}

/// Interpolation data tagged by variant.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SpecFile {
    Points {
        d: usize,
        conditions: Vec<PointConditionFile>,
    },
    JetChain {
        d: usize,
        omega: Vec<ComplexPair>,
        x: Vec<Vec<ComplexPair>>,
    },
    LowerInclusive {
        d: usize,
        omega: Vec<ComplexPair>,
        conditions: Vec<JetConditionFile>,
    },
}

impl SpecFile {
    pub fn from_engine(spec: &InterpolationSpec) -> Self {
        match spec {
            InterpolationSpec::Points { d, conditions } => SpecFile::Points {
                d: *d,
                conditions: conditions
                    .iter()
                    .map(|c| PointConditionFile {
                        omega: c.omega.iter().copied().map(to_pair).collect(),
                        x: c.x.iter().copied().map(to_pair).collect(),
                    })
                    .collect(),
            },
            InterpolationSpec::JetChain { d, omega, functionals } => SpecFile::JetChain {
                d: *d,
                omega: omega.iter().copied().map(to_pair).collect(),
                x: functionals
                    .iter()
                    .map(|f| f.iter().copied().map(to_pair).collect())
                    .collect(),
            },
            InterpolationSpec::LowerInclusive { d, omega, conditions } => {
                SpecFile::LowerInclusive {
                    d: *d,
                    omega: omega.iter().copied().map(to_pair).collect(),
                    conditions: conditions
                        .iter()
                        .map(|(n, x)| JetConditionFile {
                            n: n.0.clone(),
                            x: x.iter().copied().map(to_pair).collect(),
                        })
                        .collect(),
                }
            }
        }
    }

    pub fn to_engine(&self) -> Result<InterpolationSpec> {
        let spec = match self {
            SpecFile::Points { d, conditions } => InterpolationSpec::Points {
                d: *d,
                conditions: conditions
                    .iter()
                    .map(|c| PointCondition {
                        omega: c.omega.iter().copied().map(from_pair).collect(),
                        x: c.x.iter().copied().map(from_pair).collect(),
                    })
                    .collect(),
            },
            SpecFile::JetChain { d, omega, x } => InterpolationSpec::JetChain {
                d: *d,
                omega: omega.iter().copied().map(from_pair).collect(),
                functionals: x
                    .iter()
                    .map(|f| f.iter().copied().map(from_pair).collect())
                    .collect(),
            },
            SpecFile::LowerInclusive { d, omega, conditions } => {
                InterpolationSpec::LowerInclusive {
                    d: *d,
                    omega: omega.iter().copied().map(from_pair).collect(),
                    conditions: conditions
                        .iter()
                        .map(|c| {
                            (
                                MultiIndex(c.n.clone()),
                                c.x.iter().copied().map(from_pair).collect(),
                            )
                        })
                        .collect(),
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RowContractionFile {
    pub d: usize,
    pub dim_state: usize,
    #[serde(rename = "T")]
    pub t: Vec<Vec<ComplexPair>>,
}

impl RowContractionFile {
    pub fn from_engine(t: &RowContraction) -> Self {
        RowContractionFile {
            d: t.d,
            dim_state: t.dim_state(),
            t: t.t.iter().map(matrix_to_flat).collect(),
        }
    }

    pub fn to_engine(&self, tol: f64) -> Result<RowContraction> {
        if self.t.len() != self.d {
            return Err(EngineError::Invalid(format!(
                "expected {} T blocks, got {}",
                self.d,
                self.t.len()
            )));
        }
        let p = self.dim_state;
        let t = self
            .t
            .iter()
            .enumerate()
            .map(|(j, flat)| matrix_from_flat(p, p, flat, &format!("T[{}]", j)))
            .collect::<Result<Vec<_>>>()?;
        RowContraction::new(self.d, t, tol)
    }
}
