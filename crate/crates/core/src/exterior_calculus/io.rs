//! Flat grid records: a small header followed by row-major component arrays,
//! as JSON or as little-endian binary.

use serde::{Deserialize, Serialize};

use super::{OneForm, ScalarField, TwoForm};
use crate::error::{FluxError, Result};
use crate::mesh::GridMesh;

const MAGIC: &[u8; 4] = b"FLXG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Oneform,
    Twoform,
    Map,
}

impl FieldKind {
    fn code(self) -> u8 {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::Oneform => 1,
            FieldKind::Twoform => 2,
            FieldKind::Map => 3,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            0 => FieldKind::Scalar,
            1 => FieldKind::Oneform,
            2 => FieldKind::Twoform,
            3 => FieldKind::Map,
            _ => return Err(FluxError::Format(format!("unknown kind code {c}"))),
        })
    }

    fn arity(self) -> usize {
        match self {
            FieldKind::Scalar | FieldKind::Twoform => 1,
            FieldKind::Oneform | FieldKind::Map => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub n: usize,
    #[serde(rename = "N")]
    pub resolution: usize,
    #[serde(rename = "L")]
    pub periods: Vec<f64>,
    pub kind: FieldKind,
}

impl GridHeader {
    pub fn new(mesh: &GridMesh, kind: FieldKind) -> Self {
        Self {
            n: mesh.dimension(),
            resolution: mesh.n(),
            periods: mesh.periods().to_vec(),
            kind,
        }
    }

    pub fn mesh(&self) -> Result<GridMesh> {
        if self.n != 2 || self.periods.len() != 2 {
            return Err(FluxError::Format(format!("only n = 2 is supported, got {}", self.n)));
        }
        GridMesh::new(self.resolution, [self.periods[0], self.periods[1]])
    }
}

/// Header plus components, each a row-major `N x N` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub header: GridHeader,
    pub components: Vec<Vec<f64>>,
}

impl GridRecord {
    pub fn new(mesh: &GridMesh, kind: FieldKind, components: Vec<Vec<f64>>) -> Self {
        Self {
            header: GridHeader::new(mesh, kind),
            components,
        }
    }

    fn validate(&self, kind: FieldKind) -> Result<GridMesh> {
        if self.header.kind != kind {
            return Err(FluxError::Format(format!(
                "expected kind {:?}, found {:?}",
                kind, self.header.kind
            )));
        }
        let mesh = self.header.mesh()?;
        if self.components.len() != kind.arity()
            || self.components.iter().any(|c| c.len() != mesh.len())
        {
            return Err(FluxError::Format("component arrays have the wrong shape".into()));
        }
        Ok(mesh)
    }

    pub(crate) fn fields(&self, kind: FieldKind) -> Result<Vec<ScalarField>> {
        let mesh = self.validate(kind)?;
        self.components
            .iter()
            .map(|c| ScalarField::new(mesh, c.clone()))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| FluxError::Format(e.to_string()))
    }

    /// `FLXG`, kind byte, u32 N, two f64 periods, then the arrays.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 8 * self.components.iter().map(Vec::len).sum::<usize>());
        out.extend_from_slice(MAGIC);
        out.push(self.header.kind.code());
        out.extend_from_slice(&(self.header.resolution as u32).to_le_bytes());
        for l in &self.header.periods {
            out.extend_from_slice(&l.to_le_bytes());
        }
        for c in &self.components {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        let bad = || FluxError::Format("truncated binary grid record".into());
        if bytes.len() < 25 || &bytes[..4] != MAGIC {
            return Err(FluxError::Format("missing FLXG magic".into()));
        }
        let kind = FieldKind::from_code(bytes[4])?;
        let n = u32::from_le_bytes(bytes[5..9].try_into().map_err(|_| bad())?) as usize;
        let f64_at = |o: usize| -> Result<f64> {
            let s = bytes.get(o..o + 8).ok_or_else(bad)?;
            Ok(f64::from_le_bytes(s.try_into().map_err(|_| bad())?))
        };
        let periods = vec![f64_at(9)?, f64_at(17)?];
        let len = n * n;
        if bytes.len() != 25 + 8 * len * kind.arity() {
            return Err(bad());
        }
        let mut components = Vec::new();
        for c in 0..kind.arity() {
            let base = 25 + 8 * len * c;
            components.push((0..len).map(|k| f64_at(base + 8 * k)).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self {
            header: GridHeader {
                n: 2,
                resolution: n,
                periods,
                kind,
            },
            components,
        })
    }
}

impl From<&ScalarField> for GridRecord {
    fn from(f: &ScalarField) -> Self {
        GridRecord::new(f.mesh(), FieldKind::Scalar, vec![f.values().to_vec()])
    }
}

impl From<&OneForm> for GridRecord {
    fn from(a: &OneForm) -> Self {
        GridRecord::new(
            a.mesh(),
            FieldKind::Oneform,
            a.components().iter().map(|c| c.values().to_vec()).collect(),
        )
    }
}

impl From<&TwoForm> for GridRecord {
    fn from(w: &TwoForm) -> Self {
        GridRecord::new(w.mesh(), FieldKind::Twoform, vec![w.density().values().to_vec()])
    }
}

impl TryFrom<&GridRecord> for ScalarField {
    type Error = FluxError;
    fn try_from(r: &GridRecord) -> Result<Self> {
        Ok(r.fields(FieldKind::Scalar)?.remove(0))
    }
}

impl TryFrom<&GridRecord> for OneForm {
    type Error = FluxError;
    fn try_from(r: &GridRecord) -> Result<Self> {
        let mut f = r.fields(FieldKind::Oneform)?;
        let a1 = f.pop().unwrap();
        let a0 = f.pop().unwrap();
        OneForm::new(a0, a1)
    }
}

impl TryFrom<&GridRecord> for TwoForm {
    type Error = FluxError;
    fn try_from(r: &GridRecord) -> Result<Self> {
        Ok(TwoForm::new(r.fields(FieldKind::Twoform)?.remove(0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_and_json_round_trip() {
        let mesh = GridMesh::new(16, [1.0, 0.5]).unwrap();
        let a = OneForm::from_fn(mesh, |p| [p[0].sin() / 3.0, p[1].exp()]);
        let rec = GridRecord::from(&a);
        let back = OneForm::try_from(&GridRecord::from_binary(&rec.to_binary()).unwrap()).unwrap();
        assert_eq!(back, a);
        let back = OneForm::try_from(&GridRecord::from_json(&rec.to_json()).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let mesh = GridMesh::unit(16).unwrap();
        let rec = GridRecord::from(&ScalarField::zeros(mesh));
        assert!(OneForm::try_from(&rec).is_err());
    }
}
