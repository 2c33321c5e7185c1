//! File formats: constellation, operator and symbol JSON documents, plus CSV
//! layouts for grids, sweeps and optimizer traces.
//!
//! Floats are written with the shortest representation that parses back to the
//! same `f64`, so every write-then-read is bit-exact.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coherent::UnitVector;
use crate::error::{Error, Result};
use crate::frames::{Constellation, FrameSystem, RepairReport};
use crate::grid::SphereGrid;
use crate::operator::HermitianOperator;
use crate::optimize::{BaselineSummary, OptimizationTrace};
use crate::reconstruction::{DiscretePSymbol, DiscreteQSymbol, TrialRecord};
use crate::spin::SpinParameter;

pub const TOOL_NAME: &str = "spinframe";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constellation_hash: Option<String>,
    pub config: Value,
}

impl Meta {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            seed: None,
            constellation_hash: None,
            config,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_hash(mut self, hash: &str) -> Self {
        self.constellation_hash = Some(hash.to_owned());
        self
    }

    /// `# `-prefixed header lines for CSV outputs.
    pub fn csv_header(&self) -> String {
        let json = serde_json::to_string(self).expect("meta serializes");
        format!("# {json}\n")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePoint {
    pub theta: f64,
    pub phi: f64,
}

/// `{ "twice_s": int, "points": [{"theta", "phi"}, ...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationDoc {
    pub twice_s: u32,
    pub points: Vec<AnglePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constellation_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RepairReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl ConstellationDoc {
    pub fn from_constellation(c: &Constellation) -> Self {
        Self::from_points(c.spin(), c.points()).with_hash(c.hash())
    }

    /// Any number of points, e.g. the fixed points of a landscape.
    pub fn from_points(spin: SpinParameter, points: &[UnitVector]) -> Self {
        Self {
            twice_s: spin.twice_s(),
            points: points
                .iter()
                .map(|p| AnglePoint {
                    theta: p.theta(),
                    phi: p.phi(),
                })
                .collect(),
            constellation_hash: None,
            report: None,
            meta: None,
        }
    }

    fn with_hash(mut self, hash: String) -> Self {
        self.constellation_hash = Some(hash);
        self
    }

    pub fn spin(&self) -> SpinParameter {
        SpinParameter::from_twice(self.twice_s)
    }

    pub fn unit_vectors(&self) -> Result<Vec<UnitVector>> {
        self.points
            .iter()
            .map(|p| UnitVector::try_from_angles(p.theta, p.phi))
            .collect()
    }

    /// Validates the point count against `twice_s`.
    /// Fails with [`Error::HashMismatch`] when a stored hash disagrees with the points.
    pub fn to_constellation(&self) -> Result<Constellation> {
        let c = Constellation::new(self.spin(), self.unit_vectors()?)?;
        if let Some(stored) = &self.constellation_hash {
            let actual = c.hash();
            if *stored != actual {
                return Err(Error::HashMismatch {
                    expected: actual,
                    found: stored.clone(),
                });
            }
        }
        Ok(c)
    }
}

/// `{ "twice_s": int, "real": [[f64]], "imag": [[f64]] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub twice_s: u32,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl OperatorDoc {
    pub fn from_operator(op: &HermitianOperator) -> Self {
        let m = op.matrix();
        let d = op.dim();
        Self {
            twice_s: d.saturating_sub(1) as u32,
            real: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].re).collect())
                .collect(),
            imag: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].im).collect())
                .collect(),
            condition_number: None,
            meta: None,
        }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let op = HermitianOperator::from_real_imag(&self.real, &self.imag)?;
        let expected = SpinParameter::from_twice(self.twice_s).dim();
        if op.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: op.dim(),
            });
        }
        Ok(op)
    }
}

/// Which normalization the P-symbol and dual operators are written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `A = sum_n A^n Q_n`, `Tr[Q_n D^n'] = delta`.
    #[default]
    PrefactorFree,
    /// `A = (2s+1)^-1 sum_n A^n Q_n`: P-symbol values and duals carry an extra
    /// factor `2s+1`.
    DimensionScaled,
}

impl Convention {
    pub fn factor(self, spin: SpinParameter) -> f64 {
        match self {
            Convention::PrefactorFree => 1.0,
            Convention::DimensionScaled => spin.dim() as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Q,
    P,
}

/// `{ "constellation_hash": string, "values": [f64] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolDoc {
    pub constellation_hash: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SymbolKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl SymbolDoc {
    pub fn from_q(q: &DiscreteQSymbol) -> Self {
        Self {
            constellation_hash: q.constellation_hash.clone(),
            values: q.values.clone(),
            kind: Some(SymbolKind::Q),
            convention: None,
            meta: None,
        }
    }

    pub fn from_p(p: &DiscretePSymbol, spin: SpinParameter, convention: Convention) -> Self {
        let f = convention.factor(spin);
        Self {
            constellation_hash: p.constellation_hash.clone(),
            values: p.values.iter().map(|v| v * f).collect(),
            kind: Some(SymbolKind::P),
            convention: Some(convention),
            meta: None,
        }
    }

    pub fn to_q(&self) -> Result<DiscreteQSymbol> {
        if self.kind == Some(SymbolKind::P) {
            return Err(Error::InvalidArgument(
                "expected a Q-symbol document, found a P-symbol".into(),
            ));
        }
        Ok(DiscreteQSymbol {
            constellation_hash: self.constellation_hash.clone(),
            values: self.values.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramDiagnostics {
    pub twice_s: u32,
    pub n_states: usize,
    pub constellation_hash: String,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub condition_number: Option<f64>,
    pub log_abs_det: f64,
    pub rank_ratio: f64,
    pub tau: f64,
    pub singular: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<RepairReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl GramDiagnostics {
    pub fn from_frame(frame: &FrameSystem) -> Self {
        let g = frame.gram();
        let cond = g.condition_number();
        Self {
            twice_s: frame.spin().twice_s(),
            n_states: frame.spin().n_states(),
            constellation_hash: frame.hash().to_owned(),
            eigenvalues: g.eigenvalues().to_vec(),
            condition_number: cond.is_finite().then_some(cond),
            log_abs_det: g.log_abs_det(),
            rank_ratio: g.rank_ratio(),
            tau: frame.tau(),
            singular: frame.is_singular(),
            duality_residual: frame.duality_residual().ok(),
            report: None,
            meta: None,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        // Display for f64 is shortest round-trip
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `theta,phi,<value_column>` rows in grid storage order.
pub fn grid_csv(meta: &Meta, grid: &SphereGrid, value_column: &str) -> String {
    let mut out = meta.csv_header();
    let _ = writeln!(out, "theta,phi,{value_column}");
    for (t, p, v) in grid.rows() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(p), fmt_f64(v));
    }
    out
}

pub fn sweep_csv(meta: &Meta, records: &[TrialRecord]) -> String {
    let mut out = meta.csv_header();
    let repaired = records.iter().any(|r| r.repaired_frobenius_error.is_some());
    out.push_str("seed,shots,frobenius_error,trace_error,eigenvalue_floor");
    out.push_str(if repaired {
        ",repaired_frobenius_error\n"
    } else {
        "\n"
    });
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.seed,
            r.shots,
            fmt_f64(r.frobenius_error),
            fmt_f64(r.trace_error),
            fmt_f64(r.eigenvalue_floor)
        );
        if repaired {
            let _ = write!(
                out,
                ",{}",
                r.repaired_frobenius_error.map_or_else(String::new, fmt_f64)
            );
        }
        out.push('\n');
    }
    out
}

pub fn trace_csv(meta: &Meta, trace: &OptimizationTrace) -> String {
    let mut out = meta.csv_header();
    out.push_str("restart,iteration,temperature,objective,best,accepted\n");
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.restart,
            r.iteration,
            fmt_f64(r.temperature),
            fmt_f64(r.objective),
            fmt_f64(r.best),
            u8::from(r.accepted)
        );
    }
    out
}

pub fn baseline_csv(meta: &Meta, summary: &BaselineSummary) -> String {
    let mut out = meta.csv_header();
    let _ = writeln!(
        out,
        "# min={} median={} max={} singular_count={}",
        fmt_f64(summary.min),
        fmt_f64(summary.median),
        fmt_f64(summary.max),
        summary.singular_count
    );
    out.push_str("seed,condition_number,singular\n");
    for r in &summary.records {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.seed,
            fmt_f64(r.condition_number),
            u8::from(r.singular)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::random_constellation;
    use proptest::prelude::*;

    #[test]
    fn stored_hash_is_checked() {
        let c = random_constellation(SpinParameter::ONE, 2);
        let mut doc = ConstellationDoc::from_constellation(&c);
        assert_eq!(doc.to_constellation().unwrap().hash(), c.hash());
        doc.constellation_hash = Some("abc".into());
        assert!(matches!(
            doc.to_constellation(),
            Err(Error::HashMismatch { .. })
        ));
    }

    #[test]
    fn constellation_schema() {
        let text = r#"{"twice_s": 1, "points": [
            {"theta": 0.0, "phi": 0.0}, {"theta": 1.0, "phi": 0.5},
            {"theta": 2.0, "phi": 3.0}, {"theta": 1.5, "phi": 5.0}]}"#;
        let doc: ConstellationDoc = from_json(text).unwrap();
        let c = doc.to_constellation().unwrap();
        assert_eq!(c.len(), 4);

        let short = r#"{"twice_s": 2, "points": [{"theta": 0.0, "phi": 0.0}]}"#;
        let doc: ConstellationDoc = from_json(short).unwrap();
        assert!(matches!(
            doc.to_constellation(),
            Err(Error::WrongPointCount { .. })
        ));

        assert!(from_json::<ConstellationDoc>("{\"twice_s\": 1").is_err());
    }

    #[test]
    fn scaled_convention_multiplies_p_symbol() {
        let p = DiscretePSymbol {
            constellation_hash: "h".into(),
            values: vec![1.0, -0.5],
        };
        let doc = SymbolDoc::from_p(&p, SpinParameter::ONE, Convention::DimensionScaled);
        assert_eq!(doc.values, vec![3.0, -1.5]);
        assert!(doc.to_q().is_err());
    }

    proptest! {
        #[test]
        fn constellation_json_round_trip_is_bit_exact(seed in any::<u64>(), twice in 0u32..5) {
            let c = random_constellation(SpinParameter::from_twice(twice), seed);
            let doc = ConstellationDoc::from_constellation(&c);
            let back: ConstellationDoc = from_json(&to_json(&doc).unwrap()).unwrap();
            prop_assert_eq!(&back, &doc);
            let c2 = back.to_constellation().unwrap();
            prop_assert_eq!(c2.hash(), c.hash());
        }

        #[test]
        fn operator_json_round_trip_is_bit_exact(seed in any::<u64>(), dim in 1usize..6) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let op = HermitianOperator::random_gaussian(dim, &mut rng).scaled(1.0 / 3.0);
            let doc = OperatorDoc::from_operator(&op);
            let back: OperatorDoc = from_json(&to_json(&doc).unwrap()).unwrap();
            prop_assert_eq!(back.to_operator().unwrap(), op);
        }
    }
}
