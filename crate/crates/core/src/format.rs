//! On-disk document formats: the measure file, the inversion-result
//! export, and the group string they both embed.
//!
//! The group grammar is the one [`GroupSpec`]'s `Display` produces:
//! `"Z8"`, `"Z2^4"`, `"Z6xZ4"` for finite products of cyclic groups and
//! `"Z"`, `"Z^2"` for lattices. Measure documents must round-trip
//! bit-exactly at double precision; amplitudes are therefore written with
//! the shortest representation that parses back to the same bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupError, GroupSpec};
use crate::inversion::InversionResult;
use crate::measure::{DiscreteMeasure, MeasureError};

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unrecognized group string {0:?}")]
    UnknownGroup(String),
    #[error("atom {index}: {source}")]
    Atom { index: usize, source: MeasureError },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> FormatError {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// One atom of a measure document: integer coordinates plus the real and
/// imaginary amplitude parts, kept separate so the text form stays exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomDoc {
    pub coords: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// The measure file: a group string and an atom list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub group: String,
    pub atoms: Vec<AtomDoc>,
}

/// The inversion-result export: solver metadata plus the inverse measure
/// in the common measure format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionDoc {
    pub method: String,
    pub inverse_norm: f64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guarantee: Option<f64>,
    pub truncated: bool,
    pub inverse: MeasureDoc,
}

/// Parses the group grammar. A lattice token (`Z` or `Z^d`) must stand
/// alone; finite tokens (`Z8`, `Z2^4`) may be chained with `x`.
pub fn parse_group_spec(s: &str) -> Result<GroupSpec, FormatError> {
    let bad = || FormatError::UnknownGroup(s.to_string());
    let tokens: Vec<&str> = s.split('x').collect();
    if tokens.len() == 1 {
        let t = tokens[0];
        if t == "Z" {
            return Ok(GroupSpec::lattice(1)?);
        }
        if let Some(rank) = t.strip_prefix("Z^") {
            let rank: usize = rank.parse().map_err(|_| bad())?;
            return Ok(GroupSpec::lattice(rank)?);
        }
    }
    let mut moduli = Vec::new();
    for t in tokens {
        let body = t.strip_prefix('Z').ok_or_else(bad)?;
        if body.is_empty() || body.starts_with('^') {
            // A bare lattice factor inside a product has no meaning here.
            return Err(bad());
        }
        let (base, repeat) = match body.split_once('^') {
            Some((b, r)) => (b, r.parse::<usize>().map_err(|_| bad())?),
            None => (body, 1),
        };
        let n: u64 = base.parse().map_err(|_| bad())?;
        if repeat == 0 {
            return Err(bad());
        }
        moduli.extend(std::iter::repeat_n(n, repeat));
    }
    if moduli.is_empty() {
        return Err(bad());
    }
    Ok(GroupSpec::finite(&moduli)?)
}

pub fn measure_to_doc(mu: &DiscreteMeasure) -> MeasureDoc {
    MeasureDoc {
        group: mu.group().to_string(),
        atoms: mu
            .atoms()
            .map(|(x, a)| AtomDoc {
                coords: x.coords().to_vec(),
                re: a.re,
                im: a.im,
            })
            .collect(),
    }
}

pub fn doc_to_measure(doc: &MeasureDoc) -> Result<DiscreteMeasure, FormatError> {
    let group = parse_group_spec(&doc.group)?;
    for (index, atom) in doc.atoms.iter().enumerate() {
        group
            .element(&atom.coords)
            .map_err(|e| FormatError::Atom {
                index,
                source: e.into(),
            })?;
    }
    Ok(DiscreteMeasure::from_atoms(
        &group,
        doc.atoms
            .iter()
            .map(|a| (a.coords.clone(), num_complex::Complex64::new(a.re, a.im))),
    )?)
}

pub fn measure_to_json(mu: &DiscreteMeasure) -> String {
    serde_json::to_string_pretty(&measure_to_doc(mu)).expect("measure serialization cannot fail")
}

pub fn measure_from_json(text: &str) -> Result<DiscreteMeasure, FormatError> {
    let doc: MeasureDoc = serde_json::from_str(text)?;
    doc_to_measure(&doc)
}

pub fn inversion_to_doc(result: &InversionResult) -> InversionDoc {
    InversionDoc {
        method: result.method.as_str().to_string(),
        inverse_norm: result.inverse_norm,
        residual: result.residual,
        guarantee: result.guarantee,
        truncated: result.truncated,
        inverse: measure_to_doc(&result.inverse),
    }
}

pub fn inversion_to_json(result: &InversionResult) -> String {
    serde_json::to_string_pretty(&inversion_to_doc(result))
        .expect("inversion serialization cannot fail")
}
