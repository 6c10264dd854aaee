//! Schedule and report files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tree::engine::Mode;
use crate::types::{multiplicity, StepParams, StepParamsError, VertexType};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Step(#[from] StepParamsError),
    #[error("header says N={declared} but {actual} steps are listed")]
    Length { declared: usize, actual: usize },
    #[error("step {index} has t={t}")]
    StepIndex { index: usize, t: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleHeader {
    pub d: usize,
    pub eps: f64,
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub t: usize,
    pub r_dom: u8,
    pub b_dom: u8,
    pub m: u8,
    pub q: f64,
    pub q_hat: f64,
}

impl From<&StepParams> for ScheduleEntry {
    fn from(p: &StepParams) -> Self {
        ScheduleEntry {
            t: p.t,
            r_dom: p.dominant.low(),
            b_dom: p.dominant.high(),
            m: p.multiplicity,
            q: p.q,
            q_hat: p.q_hat,
        }
    }
}

impl From<&ScheduleEntry> for StepParams {
    fn from(e: &ScheduleEntry) -> Self {
        StepParams {
            t: e.t,
            dominant: VertexType::new(e.r_dom, e.b_dom),
            multiplicity: e.m,
            q: e.q,
            q_hat: e.q_hat,
        }
    }
}

/// Schedule with full-precision thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub header: ScheduleHeader,
    pub steps: Vec<ScheduleEntry>,
}

impl ScheduleFile {
    pub fn new(d: usize, eps: f64, mode: Mode, schedule: &[StepParams]) -> Self {
        ScheduleFile {
            header: ScheduleHeader {
                d,
                eps,
                mode,
                n_steps: schedule.len(),
            },
            steps: schedule.iter().map(ScheduleEntry::from).collect(),
        }
    }

    /// Validated step parameters.
    pub fn params(&self) -> Result<Vec<StepParams>, ScheduleError> {
        if self.header.n_steps != self.steps.len() {
            return Err(ScheduleError::Length {
                declared: self.header.n_steps,
                actual: self.steps.len(),
            });
        }
        let mut out = Vec::with_capacity(self.steps.len());
        for (index, e) in self.steps.iter().enumerate() {
            if e.t != index + 1 {
                return Err(ScheduleError::StepIndex { index, t: e.t });
            }
            let p = StepParams::from(e);
            if p.multiplicity != multiplicity(p.dominant) {
                return Err(StepParamsError::Multiplicity {
                    t: p.t,
                    m: p.multiplicity,
                    dominant: p.dominant,
                }
                .into());
            }
            p.validate(self.header.d)?;
            out.push(p);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String, ScheduleError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ScheduleError> {
        let f: ScheduleFile = serde_json::from_str(text)?;
        f.params()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self, ScheduleError> {
        ScheduleFile::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), ScheduleError> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn sha256(&self) -> Result<String, ScheduleError> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }
}

/// Round to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<StepParams> {
        vec![
            StepParams {
                t: 1,
                dominant: VertexType::new(0, 0),
                multiplicity: 1,
                q: 1e-3 / 2.0,
                q_hat: 1e-3 / 2.0,
            },
            StepParams {
                t: 2,
                dominant: VertexType::new(1, 0),
                multiplicity: 2,
                q: 0.25,
                q_hat: 0.1,
            },
        ]
    }

    #[test]
    fn roundtrip() {
        let f = ScheduleFile::new(5, 1e-3, Mode::Exact, &sample());
        let text = f.to_json().unwrap();
        assert!(text.contains("\"N\": 2"));
        assert!(text.contains("\"r_dom\": 0"));
        let back = ScheduleFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.params().unwrap(), sample());
        assert_eq!(back.sha256().unwrap(), f.sha256().unwrap());
        assert_eq!(f.sha256().unwrap().len(), 64);
    }

    #[test]
    fn rejects_bad_files() {
        let mut f = ScheduleFile::new(5, 1e-3, Mode::Exact, &sample());
        f.header.n_steps = 3;
        assert!(matches!(f.params(), Err(ScheduleError::Length { .. })));
        let mut f = ScheduleFile::new(5, 1e-3, Mode::Exact, &sample());
        f.steps[1].m = 1;
        assert!(f.params().is_err());
        let mut f = ScheduleFile::new(5, 1e-3, Mode::Exact, &sample());
        f.steps[0].q = 0.7;
        assert!(f.params().is_err());
        let mut f = ScheduleFile::new(5, 1e-3, Mode::Exact, &sample());
        f.steps[1].t = 5;
        assert!(matches!(f.params(), Err(ScheduleError::StepIndex { .. })));
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.50177812345), 0.501778);
        assert_eq!(sig6(0.019944512), 0.0199445);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(123456789.0), 123457000.0);
    }
}
