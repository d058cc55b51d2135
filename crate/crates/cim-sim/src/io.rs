//! File formats: problem JSON, trajectory CSV and trial-result JSON.

use std::io::Write;

use cim_core::{Edge, IsingError, IsingProblem, SpectrumStats, SpinVector, TrajectoryRow, TrialResult};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid problem: {0}")]
    Problem(#[from] IsingError),
    #[error("coupling at edge {index} must be +1 or -1, got {value}")]
    Coupling { index: usize, value: i64 },
    #[error("edge {index}: vertex out of range")]
    Vertex { index: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `{"m": int, "edges": [[i, j, J], ...], "target": [±1, ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub edges: Vec<[i64; 3]>,
    pub target: Vec<i8>,
}

impl From<&IsingProblem> for ProblemFile {
    fn from(p: &IsingProblem) -> Self {
        Self {
            m: p.m(),
            edges: p.edges().iter().map(|e| [e.i as i64, e.j as i64, e.coupling as i64]).collect(),
            target: p.target().as_slice().to_vec(),
        }
    }
}

impl TryFrom<ProblemFile> for IsingProblem {
    type Error = IoError;

    fn try_from(f: ProblemFile) -> Result<Self, IoError> {
        let mut edges = Vec::with_capacity(f.edges.len());
        for (index, &[i, j, c]) in f.edges.iter().enumerate() {
            if c != 1 && c != -1 {
                return Err(IoError::Coupling { index, value: c });
            }
            let (i, j) = match (usize::try_from(i), usize::try_from(j)) {
                (Ok(i), Ok(j)) => (i.min(j), i.max(j)),
                _ => return Err(IoError::Vertex { index }),
            };
            edges.push(Edge { i, j, coupling: c as i8 });
        }
        let target = SpinVector::new(f.target)?;
        Ok(IsingProblem::from_parts(f.m, edges, target)?)
    }
}

pub fn problem_to_json(p: &IsingProblem) -> String {
    serde_json::to_string(&ProblemFile::from(p)).expect("problem serialization cannot fail")
}

pub fn problem_from_json(text: &str) -> Result<IsingProblem, IoError> {
    let f: ProblemFile = serde_json::from_str(text)?;
    f.try_into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Basis {
    Circular,
    Diagonal,
}

/// Writes `t_ns, sigma_1..sigma_M, mean_nc`, one row per sample.
pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow], basis: Basis) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let m = rows.first().map_or(0, |r| r.sigma_circ.len());
    let mut header = vec!["t_ns".to_string()];
    header.extend((1..=m).map(|i| format!("sigma_{i}")));
    header.push("mean_nc".into());
    w.write_record(&header)?;
    for r in rows {
        let sig = match basis {
            Basis::Circular => &r.sigma_circ,
            Basis::Diagonal => &r.sigma_diag,
        };
        let mut rec = Vec::with_capacity(m + 2);
        rec.push(format!("{}", r.t * 1e9));
        rec.extend(sig.iter().map(|s| format!("{s}")));
        rec.push(format!("{}", r.mean_n_c));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON form of a [`TrialResult`]; times in ns, `null` when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub success: bool,
    pub success_circular: bool,
    pub success_diagonal: bool,
    pub comp_time_ns: Option<f64>,
    pub bifurcation_time_ns: Option<f64>,
    pub final_spins_circular: Vec<f64>,
    pub final_spins_diagonal: Vec<f64>,
    pub final_mean_n_c: f64,
}

impl From<&TrialResult> for TrialRecord {
    fn from(r: &TrialResult) -> Self {
        Self {
            seed: r.seed,
            success: r.success,
            success_circular: r.success_circular,
            success_diagonal: r.success_diagonal,
            comp_time_ns: r.comp_time.map(|t| t * 1e9),
            bifurcation_time_ns: r.bifurcation_time.map(|t| t * 1e9),
            final_spins_circular: r.final_spins_circular.clone(),
            final_spins_diagonal: r.final_spins_diagonal.clone(),
            final_mean_n_c: r.final_mean_n_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRecord {
    pub m: usize,
    pub e_g: i64,
    pub e_1e: Option<i64>,
    pub gap: Option<i64>,
    pub n_g: u64,
    pub n_1e: u64,
    pub n_2e: u64,
    pub levels: Vec<(i64, u64)>,
    pub ground_states: Vec<Vec<i8>>,
}

impl From<&SpectrumStats> for SpectrumRecord {
    fn from(s: &SpectrumStats) -> Self {
        Self {
            m: s.m,
            e_g: s.e_g,
            e_1e: s.e_1e,
            gap: s.gap(),
            n_g: s.n_g,
            n_1e: s.n_1e,
            n_2e: s.n_2e,
            levels: s.levels.clone(),
            ground_states: s.ground_states.iter().map(|g| g.as_slice().to_vec()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cim_core::{build_cubic_problem, flip_one_coupling};

    fn sample() -> IsingProblem {
        build_cubic_problem(6, SpinVector::new(vec![1, -1, 1, 1, -1, -1]).unwrap()).unwrap()
    }

    #[test]
    fn problem_round_trip_is_byte_stable() {
        let p = flip_one_coupling(&sample(), 2).unwrap();
        let text = problem_to_json(&p);
        let back = problem_from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(problem_to_json(&back), text);
    }

    #[test]
    fn problem_json_shape() {
        let p = build_cubic_problem(4, SpinVector::all_up(4)).unwrap();
        assert_eq!(
            problem_to_json(&p),
            r#"{"m":4,"edges":[[0,1,-1],[0,2,-1],[0,3,-1],[1,2,-1],[1,3,-1],[2,3,-1]],"target":[1,1,1,1]}"#
        );
    }

    #[test]
    fn reversed_edges_are_canonicalized() {
        let text = r#"{"m":4,"edges":[[1,0,1],[3,2,-1]],"target":[1,1,-1,1]}"#;
        let p = problem_from_json(text).unwrap();
        assert_eq!(p.edges()[0], Edge { i: 0, j: 1, coupling: 1 });
    }

    #[test]
    fn malformed_problems() {
        assert!(matches!(
            problem_from_json(r#"{"m":4,"edges":[[0,1,2]],"target":[1,1,1,1]}"#),
            Err(IoError::Coupling { index: 0, value: 2 })
        ));
        assert!(matches!(
            problem_from_json(r#"{"m":4,"edges":[[0,-1,1]],"target":[1,1,1,1]}"#),
            Err(IoError::Vertex { index: 0 })
        ));
        assert!(problem_from_json(r#"{"m":4,"edges":[[0,9,1]],"target":[1,1,1,1]}"#).is_err());
        assert!(problem_from_json(r#"{"m":4,"edges":[],"target":[1,1,1]}"#).is_err());
        assert!(problem_from_json(r#"{"m":4,"edges":[[0,1,1.0]],"target":[1,1,1,1]}"#).is_err());
    }

    #[test]
    fn trajectory_header_and_rows() {
        let rows = vec![
            TrajectoryRow { t: 0.0, sigma_circ: vec![0.0, 0.5], sigma_diag: vec![0.1, 0.2], mean_n_c: 0.0 },
            TrajectoryRow { t: 1e-9, sigma_circ: vec![-0.25, 1.0], sigma_diag: vec![0.3, 0.4], mean_n_c: 5e7 },
        ];
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rows, Basis::Circular).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t_ns,sigma_1,sigma_2,mean_nc");
        assert_eq!(lines[2], "1,-0.25,1,50000000");
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rows, Basis::Diagonal).unwrap();
        assert!(String::from_utf8(buf).unwrap().lines().nth(1).unwrap().starts_with("0,0.1,0.2"));
    }
}
