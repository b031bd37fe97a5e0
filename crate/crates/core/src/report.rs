//! JSON reports.
//!
//! Field elements are written as coefficient vectors over F_p (lowest
//! degree first), so a report can be checked without knowing the
//! crate's element numbering. Everything except the `timing` block is a
//! deterministic function of the job.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codes::{ProfileEntry, Provenance, WeightProfile};
use crate::construction::{ConstructionParams, QSystem, SystemKind};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor, FieldTower};
use crate::linear::FqSubspace;
use crate::verify::{Mode, Status, Verdict, Witness};

pub const SCHEMA: &str = "rankscatter-report/1";

pub type Coords = Vec<u32>;

pub fn encode_elem(f: &FieldTower, x: Fe) -> Coords {
    f.coeffs(x)
}

pub fn decode_elem(f: &FieldTower, c: &[u32]) -> Result<Fe> {
    f.element(c).map_err(|e| Error::Parse(format!("bad field element {c:?}: {e}")))
}

pub fn encode_vec(f: &FieldTower, v: &[Fe]) -> Vec<Coords> {
    v.iter().map(|&x| encode_elem(f, x)).collect()
}

pub fn decode_vec(f: &FieldTower, v: &[Coords]) -> Result<Vec<Fe>> {
    v.iter().map(|c| decode_elem(f, c)).collect()
}

pub fn encode_rows(f: &FieldTower, rows: &[Vec<Fe>]) -> Vec<Vec<Coords>> {
    rows.iter().map(|r| encode_vec(f, r)).collect()
}

pub fn decode_rows(f: &FieldTower, rows: &[Vec<Coords>]) -> Result<Vec<Vec<Fe>>> {
    rows.iter().map(|r| decode_vec(f, r)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub m: u32,
    pub h: u32,
    pub alphas: Vec<Coords>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsRecord>,
    /// ambient dimension over F_{q^n}
    pub k: usize,
    /// F_q-dimension
    pub t: usize,
    pub spans_ambient: bool,
    /// an F_q-basis
    pub generators: Vec<Vec<Coords>>,
}

fn kind_name(kind: &SystemKind) -> &'static str {
    match kind {
        SystemKind::Family(_) => "family",
        SystemKind::Pseudoregulus { .. } => "pseudoregulus",
        SystemKind::DirectSum(_) => "direct-sum",
        SystemKind::Line { .. } => "line",
        SystemKind::Generators => "generators",
    }
}

impl SystemRecord {
    pub fn from_system(f: &FieldTower, s: &QSystem) -> SystemRecord {
        let params = match &s.kind {
            SystemKind::Family(p) => {
                Some(ParamsRecord { m: p.m(), h: p.h(), alphas: encode_vec(f, p.alphas()) })
            }
            _ => None,
        };
        SystemRecord {
            kind: kind_name(&s.kind).into(),
            params,
            k: s.k(),
            t: s.t(),
            spans_ambient: s.spans_ambient(f),
            generators: encode_rows(f, s.space.basis()),
        }
    }

    /// The subspace spanned by the recorded generators.
    pub fn space(&self, f: &FieldTower) -> Result<FqSubspace> {
        FqSubspace::new(f, self.k, decode_rows(f, &self.generators)?)
    }

    pub fn params(&self, f: &FieldTower) -> Result<Option<ConstructionParams>> {
        self.params
            .as_ref()
            .map(|p| ConstructionParams::new(f, p.m, p.h, decode_vec(f, &p.alphas)?))
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub mode: Mode,
    pub bound: usize,
    pub weight: usize,
    pub tuple_index: u64,
    pub h_basis: Vec<Vec<Coords>>,
    pub intersection_basis: Vec<Vec<Coords>>,
}

impl WitnessRecord {
    pub fn from_witness(f: &FieldTower, w: &Witness) -> WitnessRecord {
        WitnessRecord {
            mode: w.mode,
            bound: w.bound,
            weight: w.weight,
            tuple_index: w.tuple_index,
            h_basis: encode_rows(f, &w.h_basis),
            intersection_basis: encode_rows(f, &w.intersection_basis),
        }
    }

    pub fn to_witness(&self, f: &FieldTower) -> Result<Witness> {
        Ok(Witness {
            mode: self.mode,
            bound: self.bound,
            weight: self.weight,
            h_basis: decode_rows(f, &self.h_basis)?,
            intersection_basis: decode_rows(f, &self.intersection_basis)?,
            tuple_index: self.tuple_index,
        })
    }
}

/// A verdict without the execution details, which go to `timing`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub status: Status,
    pub mode: Mode,
    pub hdim: usize,
    pub bound: usize,
    pub spans_ambient: bool,
    pub subspaces_checked: u64,
    pub total: u64,
    pub seed: Option<u64>,
    pub finished: bool,
    pub witness: Option<WitnessRecord>,
}

impl VerdictRecord {
    pub fn from_verdict(f: &FieldTower, v: &Verdict, spans_ambient: bool) -> VerdictRecord {
        VerdictRecord {
            status: v.status,
            mode: v.mode,
            hdim: v.hdim,
            bound: v.bound,
            spans_ambient,
            subspaces_checked: v.subspaces_checked,
            total: v.total,
            seed: v.seed,
            finished: v.finished,
            witness: v.witness.as_ref().map(|w| WitnessRecord::from_witness(f, w)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub rho: usize,
    pub value: Option<usize>,
    pub provenance: Provenance,
    pub lower: usize,
    pub upper: usize,
    pub subspaces_checked: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<Coords>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub k: usize,
    pub t: usize,
    pub entries: Vec<EntryRecord>,
}

impl ProfileRecord {
    pub fn from_profile(f: &FieldTower, p: &WeightProfile) -> ProfileRecord {
        let entries = p
            .entries
            .iter()
            .map(|e| EntryRecord {
                rho: e.rho,
                value: e.value,
                provenance: e.provenance,
                lower: e.lower,
                upper: e.upper,
                subspaces_checked: e.subspaces_checked,
                witness: e.witness.as_ref().map(|w| encode_rows(f, w)),
            })
            .collect();
        ProfileRecord { k: p.k, t: p.t, entries }
    }

    pub fn to_profile(&self, f: &FieldTower) -> Result<WeightProfile> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(ProfileEntry {
                    rho: e.rho,
                    value: e.value,
                    provenance: e.provenance,
                    lower: e.lower,
                    upper: e.upper,
                    subspaces_checked: e.subspaces_checked,
                    witness: e.witness.as_ref().map(|w| decode_rows(f, w)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightProfile { k: self.k, t: self.t, entries })
    }
}

/// Execution details that may differ between runs of the same job.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u64,
    pub workers: usize,
    pub resumed_chunks: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub field: FieldDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemRecord>,
    pub result: Value,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, config: Value, field: FieldDescriptor, system: Option<SystemRecord>, result: Value) -> Report {
        Report {
            schema: SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            field,
            system,
            result,
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The report without its timing block.
    pub fn body(&self) -> String {
        body_of(&serde_json::to_value(self).expect("report serializes"))
    }

    pub fn parse(text: &str) -> Result<Report> {
        let report: Report = serde_json::from_str(text)?;
        if report.schema != SCHEMA {
            return Err(Error::Parse(format!("unknown report schema {:?}", report.schema)));
        }
        Ok(report)
    }

    pub fn read(path: &Path) -> Result<Report> {
        Report::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn tower(&self) -> Result<FieldTower> {
        FieldTower::from_descriptor(&self.field)
    }
}

/// Pretty JSON of a report value with `timing` removed.
pub fn body_of(report: &Value) -> String {
    let mut v = report.clone();
    if let Some(map) = v.as_object_mut() {
        map.remove("timing");
    }
    serde_json::to_string_pretty(&v).expect("value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_line, build_pseudoregulus};
    use crate::verify::{verify_h_scattered, VerifyOptions};

    fn f16() -> FieldTower {
        FieldTower::new(2, 1, 4, None).unwrap()
    }

    #[test]
    fn element_round_trip() {
        let f = f16();
        for x in f.elements() {
            assert_eq!(decode_elem(&f, &encode_elem(&f, x)).unwrap(), x);
        }
        assert!(decode_elem(&f, &[2, 0, 0, 0]).is_err());
    }

    #[test]
    fn system_round_trip() {
        let f = f16();
        let s = build_pseudoregulus(&f, 2).unwrap();
        let rec = SystemRecord::from_system(&f, &s);
        assert_eq!((rec.kind.as_str(), rec.k, rec.t, rec.spans_ambient), ("pseudoregulus", 3, 4, true));
        let text = serde_json::to_string(&rec).unwrap();
        let back: SystemRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.space(&f).unwrap().expansion(), s.space.expansion());
    }

    #[test]
    fn witness_round_trip_and_body() {
        let f = f16();
        let line = build_line(&f, 2).unwrap();
        let v = verify_h_scattered(&f, &line.space, 1, &VerifyOptions::new(Mode::Exhaustive).workers(1)).unwrap();
        let rec = VerdictRecord::from_verdict(&f, &v, false);
        let w = rec.witness.as_ref().unwrap();
        assert_eq!(w.weight, 4);
        assert_eq!(&w.to_witness(&f).unwrap(), v.witness.as_ref().unwrap());

        let mut r = Report::new("verify-scattered", Value::Null, f.descriptor(), None, serde_json::to_value(&rec).unwrap());
        let body = r.body();
        r.timing.elapsed_ms = 1234;
        r.timing.workers = 7;
        assert_eq!(r.body(), body);
        assert!(!body.contains("timing"));
        let back = Report::parse(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let mut bad = serde_json::to_value(&r).unwrap();
        bad["schema"] = "other".into();
        assert!(Report::parse(&bad.to_string()).is_err());
    }
}
