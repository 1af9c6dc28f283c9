//! On-disk JSON formats. Rationals travel as canonical `p/q` strings so
//! round-trips are bit-exact; nothing numeric about a lattice ever passes
//! through floating point on its way to or from a file.

use crate::error::Error;
use crate::lattice::{Basis, Target};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::reductions::SisInstance;
use crate::verifiers::Witness;
use serde::{Deserialize, Serialize};

/// `{ "n": int, "basis": [[ "p/q", ... ], ...] }`, basis as column vectors.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LatticeFile {
    pub n: usize,
    pub basis: Vec<Vec<String>>,
}

impl LatticeFile {
    pub fn from_basis(b: &Basis) -> Self {
        LatticeFile {
            n: b.n(),
            basis: b
                .columns()
                .iter()
                .map(|c| c.iter().map(format_rat).collect())
                .collect(),
        }
    }

    pub fn to_basis(&self) -> Result<Basis, Error> {
        let cols = self
            .basis
            .iter()
            .map(|c| c.iter().map(|s| parse_rat(s)).collect::<Result<Vec<Rat>, Error>>())
            .collect::<Result<Vec<_>, Error>>()?;
        if cols.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: cols.len(),
            });
        }
        Basis::new(cols)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TargetFile {
    pub n: usize,
    pub coords: Vec<String>,
}

impl TargetFile {
    pub fn from_target(t: &Target) -> Self {
        TargetFile {
            n: t.dim(),
            coords: t.coords.iter().map(format_rat).collect(),
        }
    }

    pub fn to_target(&self) -> Result<Target, Error> {
        let coords = self
            .coords
            .iter()
            .map(|s| parse_rat(s))
            .collect::<Result<Vec<Rat>, Error>>()?;
        if coords.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: coords.len(),
            });
        }
        Ok(Target::new(coords))
    }
}

/// `{ "n": int, "N": int, "vectors": [[ "p/q", ...], ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessFile {
    pub n: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub vectors: Vec<Vec<String>>,
}

impl WitnessFile {
    pub fn from_witness(w: &Witness) -> Self {
        WitnessFile {
            n: w.dim(),
            count: w.len(),
            vectors: w
                .vectors()
                .iter()
                .map(|v| v.iter().map(format_rat).collect())
                .collect(),
        }
    }

    pub fn to_witness(&self) -> Result<Witness, Error> {
        if self.vectors.len() != self.count {
            return Err(Error::MalformedWitness(format!(
                "N = {} but {} vectors present",
                self.count,
                self.vectors.len()
            )));
        }
        let vectors = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|s| parse_rat(s)).collect::<Result<Vec<Rat>, Error>>())
            .collect::<Result<Vec<_>, Error>>()?;
        let w = Witness::new(vectors)?;
        if w.dim() != self.n {
            return Err(Error::MalformedWitness(format!(
                "declared n = {} but vectors have dimension {}",
                self.n,
                w.dim()
            )));
        }
        Ok(w)
    }
}

/// `{ "n", "m", "q", "A": [[int]] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SisFile {
    pub n: usize,
    pub m: usize,
    pub q: u64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<u64>>,
}

impl SisFile {
    pub fn from_instance(inst: &SisInstance) -> Self {
        SisFile {
            n: inst.n,
            m: inst.m,
            q: inst.q,
            a: inst.a.clone(),
        }
    }

    pub fn to_instance(&self) -> Result<SisInstance, Error> {
        SisInstance::new(self.n, self.m, self.q, self.a.clone())
    }
}

/// One line of a sample-stream JSONL file: integer coordinates as strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SampleLine {
    pub coords: Vec<String>,
}

impl SampleLine {
    pub fn from_vector(v: &crate::lattice::LatticeVector) -> Self {
        SampleLine {
            coords: v.coords.iter().map(|c| c.to_string()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn lattice_round_trip_bit_exact() {
        let b = Basis::new(vec![
            vec![rat(2, 3), rat(-7, 11)],
            vec![rat(5, 1), rat(1, 64)],
        ])
        .unwrap();
        let file = LatticeFile::from_basis(&b);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: LatticeFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        let back = parsed.to_basis().unwrap();
        assert_eq!(back.columns(), b.columns());
    }

    #[test]
    fn witness_round_trip_and_validation() {
        let w = Witness::new(vec![
            vec![rat(1, 3), rat(0, 1)],
            vec![rat(-2, 7), rat(4, 9)],
        ])
        .unwrap();
        let file = WitnessFile::from_witness(&w);
        let back = file.to_witness().unwrap();
        assert_eq!(back.vectors(), w.vectors());

        let mut bad = WitnessFile::from_witness(&w);
        bad.count = 3;
        assert!(bad.to_witness().is_err());
    }

    #[test]
    fn singular_lattice_file_rejected() {
        let file = LatticeFile {
            n: 2,
            basis: vec![
                vec!["1".into(), "2".into()],
                vec!["2".into(), "4".into()],
            ],
        };
        assert!(matches!(file.to_basis(), Err(Error::SingularBasis)));
    }
}
