//! Field exchange format: a JSON header next to a row-major payload.
//!
//! The header `<stem>.field.json` names the payload file, which is either CSV
//! (one row per node, coordinate columns first) or raw little-endian f64
//! values stored field after field.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codim2::{SecondFormField2D, CHANNELS};
use crate::error::{Error, Result};
use crate::grid::GridDomain;

pub const HEADER_SUFFIX: &str = ".field.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Csv,
    Binary,
}

impl Encoding {
    pub fn extension(self) -> &'static str {
        match self {
            Encoding::Csv => "csv",
            Encoding::Binary => "bin",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub format_version: u32,
    pub m: usize,
    pub domain: GridDomain,
    pub spacing: f64,
    pub shape: Vec<usize>,
    pub fields: Vec<String>,
    pub encoding: Encoding,
    /// Payload file name, relative to the header's directory.
    pub payload: String,
    #[serde(default)]
    pub provenance: BTreeMap<String, Value>,
}

/// Named full-grid fields on one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet {
    pub domain: GridDomain,
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
    pub provenance: BTreeMap<String, Value>,
}

impl FieldSet {
    pub fn new(domain: GridDomain) -> Self {
        Self {
            domain,
            names: Vec::new(),
            data: Vec::new(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        self.domain.check_field(&values)?;
        if self.names.iter().any(|n| n == name) {
            return Err(Error::Format(format!("duplicate field name {name}")));
        }
        self.names.push(name.to_string());
        self.data.push(values);
        Ok(())
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.push(name, values)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.data[k].as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.get(name)
            .ok_or_else(|| Error::Format(format!("field {name} is missing")))
    }

    pub fn from_second_form(f: &SecondFormField2D) -> Self {
        Self {
            domain: f.domain().clone(),
            names: CHANNELS.iter().map(|s| s.to_string()).collect(),
            data: f.channels().into_iter().map(|c| c.to_vec()).collect(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn to_second_form(&self) -> Result<SecondFormField2D> {
        let channels = CHANNELS
            .iter()
            .map(|c| self.require(c).map(|v| v.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        SecondFormField2D::from_channels(self.domain.clone(), channels)
    }
}

/// Header path for a stem: `dir/name` becomes `dir/name.field.json`.
pub fn header_path(stem: &Path) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(HEADER_SUFFIX);
    PathBuf::from(s)
}

/// Write `<stem>.field.json` and its payload; returns the header path.
pub fn write_fields(stem: &Path, set: &FieldSet, encoding: Encoding) -> Result<PathBuf> {
    let name = stem
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Format(format!("bad output stem {}", stem.display())))?;
    let payload_name = format!("{name}.{}", encoding.extension());
    let payload_path = stem.with_file_name(&payload_name);
    let header = FieldHeader {
        format_version: FORMAT_VERSION,
        m: set.domain.dim(),
        domain: set.domain.clone(),
        spacing: set.domain.spacing(),
        shape: set.domain.shape().to_vec(),
        fields: set.names.clone(),
        encoding,
        payload: payload_name,
        provenance: set.provenance.clone(),
    };
    match encoding {
        Encoding::Csv => fs::write(&payload_path, to_csv(set))?,
        Encoding::Binary => fs::write(&payload_path, to_binary(set))?,
    }
    let path = header_path(stem);
    fs::write(&path, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(path)
}

fn to_csv(set: &FieldSet) -> String {
    let m = set.domain.dim();
    let mut out = String::new();
    let cols: Vec<String> = (0..m)
        .map(|i| format!("x{}", i + 1))
        .chain(set.names.iter().cloned())
        .collect();
    out.push_str(&cols.join(","));
    out.push('\n');
    for idx in 0..set.domain.len() {
        let row: Vec<String> = set
            .domain
            .coords(idx)
            .into_iter()
            .chain(set.data.iter().map(|f| f[idx]))
            .map(|v| v.to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn to_binary(set: &FieldSet) -> Vec<u8> {
    set.data
        .iter()
        .flat_map(|f| f.iter().flat_map(|v| v.to_le_bytes()))
        .collect()
}

/// Read a header and its payload, checking that they agree.
pub fn read_fields(header_file: &Path) -> Result<FieldSet> {
    let text = fs::read_to_string(header_file)?;
    let header: FieldHeader = serde_json::from_str(&text)?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {}",
            header.format_version
        )));
    }
    let d = &header.domain;
    if header.m != d.dim() || header.shape != d.shape() || header.spacing != d.spacing() {
        return Err(Error::Format("header m/spacing/shape disagree with the domain".into()));
    }
    let dir = header_file.parent().unwrap_or_else(|| Path::new("."));
    let payload = dir.join(&header.payload);
    let n = d.len();
    let k = header.fields.len();
    let data = match header.encoding {
        Encoding::Csv => from_csv(&fs::read_to_string(&payload)?, d, &header.fields)?,
        Encoding::Binary => {
            let bytes = fs::read(&payload)?;
            if bytes.len() != 8 * n * k {
                return Err(Error::Format(format!(
                    "binary payload has {} bytes, expected {}",
                    bytes.len(),
                    8 * n * k
                )));
            }
            let all: Vec<f64> = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            all.chunks(n.max(1)).take(k).map(|c| c.to_vec()).collect()
        }
    };
    let mut set = FieldSet::new(header.domain.clone());
    set.provenance = header.provenance;
    for (name, values) in header.fields.iter().zip(data) {
        set.push(name, values)?;
    }
    Ok(set)
}

fn from_csv(text: &str, domain: &GridDomain, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let m = domain.dim();
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV payload".into()))?;
    let expected: Vec<String> = (0..m)
        .map(|i| format!("x{}", i + 1))
        .chain(names.iter().cloned())
        .collect();
    let got: Vec<&str> = head.split(',').map(str::trim).collect();
    if got != expected {
        return Err(Error::Format(format!("CSV columns {got:?}, expected {expected:?}")));
    }
    let mut data = vec![Vec::with_capacity(domain.len()); names.len()];
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != m + names.len() {
            return Err(Error::Format(format!("CSV row {} has {} cells", r + 1, cells.len())));
        }
        for (col, cell) in cells[m..].iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("CSV row {}: bad number {cell:?}", r + 1)))?;
            data[col].push(v);
        }
        rows += 1;
    }
    if rows != domain.len() {
        return Err(Error::Format(format!(
            "CSV payload has {rows} rows, expected {}",
            domain.len()
        )));
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> FieldSet {
        let d = GridDomain::centered_cube(2, 1.0, 5).unwrap();
        let mut u = d.sample(|x| 0.1 * x[0] - (x[1] * 3.0).sin() / 7.0);
        u[3] = f64::NAN;
        FieldSet::new(d.clone())
            .with("u", u)
            .unwrap()
            .with("w", d.sample(|x| x[0] * x[1]))
            .unwrap()
    }

    fn same(a: &FieldSet, b: &FieldSet) -> bool {
        a.names == b.names
            && a.domain == b.domain
            && a.data.iter().flatten().zip(b.data.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits())
    }

    #[test]
    fn csv_and_binary_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let set = sample_set();
        for enc in [Encoding::Csv, Encoding::Binary] {
            let stem = dir.path().join(format!("field_{}", enc.extension()));
            let header = write_fields(&stem, &set, enc).unwrap();
            assert!(header.to_str().unwrap().ends_with(HEADER_SUFFIX));
            let back = read_fields(&header).unwrap();
            assert!(same(&set, &back));
        }
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("f");
        let header = write_fields(&stem, &sample_set(), Encoding::Binary).unwrap();
        let bin = dir.path().join("f.bin");
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_fields(&header), Err(Error::Format(_))));
    }

    #[test]
    fn unknown_header_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("f");
        let header = write_fields(&stem, &sample_set(), Encoding::Csv).unwrap();
        let mut v: Value = serde_json::from_str(&fs::read_to_string(&header).unwrap()).unwrap();
        v["colour"] = Value::from("red");
        fs::write(&header, v.to_string()).unwrap();
        assert!(matches!(read_fields(&header), Err(Error::Json(_))));
    }
}
