//! Dataset files.
//!
//! The CSV header is `camera,identity,split,f0,f1,...,f{d-1}`, one sample per
//! row, floats in shortest round-trip decimal form. A JSON sidecar next to the
//! CSV (`data.csv` → `data.meta.json`) records the camera count, the input
//! dimension and, for generated data, the generator settings.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::{Dataset, Provenance, Sample, Split};
use super::synth::{SynthConfig, GENERATOR_ID};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub num_cameras: usize,
    pub input_dim: usize,
    pub synth: Option<SynthConfig>,
    pub seed: Option<u64>,
    pub generator_id: Option<String>,
}

impl DatasetMeta {
    pub fn of(ds: &Dataset) -> Self {
        let synth = match ds.provenance() {
            Provenance::Synthetic(cfg) => Some(cfg.clone()),
            Provenance::File(_) => None,
        };
        Self {
            num_cameras: ds.num_cameras(),
            input_dim: ds.input_dim(),
            seed: synth.as_ref().map(|c| c.seed),
            generator_id: synth.as_ref().map(|_| GENERATOR_ID.to_string()),
            synth,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Writes the header and rows with an arbitrary per-sample vector, so
/// datasets and embedding exports share one format.
pub(crate) fn write_rows<'a, W, I>(out: W, prefix: char, dim: usize, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a Sample, &'a [f64])>,
{
    let mut w = BufWriter::new(out);
    write!(w, "camera,identity,split")?;
    for i in 0..dim {
        write!(w, ",{prefix}{i}")?;
    }
    writeln!(w)?;
    for (s, values) in rows {
        write!(w, "{},{},{}", s.camera, s.identity, s.split)?;
        for v in values {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    write_rows(
        out,
        'f',
        ds.input_dim(),
        ds.samples().iter().map(|s| (s, s.features.as_slice())),
    )
}

/// Writes `path` and its metadata sidecar.
pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, f).map_err(|e| e.with_path(path))?;
    let meta = sidecar_path(path);
    let text = serde_json::to_string_pretty(&DatasetMeta::of(ds)).expect("meta serializes");
    fs::write(&meta, text + "\n").map_err(|e| Error::io(&meta, e))
}

/// SHA-256 of the dataset's CSV serialization, hex encoded.
pub fn content_hash(ds: &Dataset) -> String {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf).expect("writing to memory");
    let digest = Sha256::digest(&buf);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parsed rows of a CSV with the dataset header layout.
#[derive(Debug)]
pub(crate) struct ParsedRows {
    pub samples: Vec<Sample>,
    pub dim: usize,
}

pub(crate) fn parse_rows(text: &str, prefix: char) -> Result<ParsedRows> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: None,
        line: Some(line),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::InvalidDataset("no samples: file is empty".into())),
        Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
    };
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 4 || cols[..3] != ["camera", "identity", "split"] {
        return Err(parse_err(
            1,
            format!("header must start with camera,identity,split,{prefix}0"),
        ));
    }
    let dim = cols.len() - 3;
    for (i, name) in cols[3..].iter().enumerate() {
        if *name != format!("{prefix}{i}") {
            return Err(parse_err(1, format!("column {} should be {prefix}{i}, found {name:?}", i + 4)));
        }
    }
    let mut samples = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != dim + 3 {
            return Err(parse_err(
                line,
                format!("expected {dim} feature values, found {}", rec.len().saturating_sub(3)),
            ));
        }
        let camera = rec[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(line, format!("bad camera {:?}: {e}", &rec[0])))?;
        let identity = rec[1]
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(line, format!("bad identity {:?}: {e}", &rec[1])))?;
        let split: Split = rec[2].trim().parse().map_err(|e: Error| parse_err(line, e.to_string()))?;
        let features = rec
            .iter()
            .skip(3)
            .enumerate()
            .map(|(i, v)| {
                let x = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, format!("bad value in {prefix}{i}: {e}")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(parse_err(line, format!("non-finite value in {prefix}{i}")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(Sample {
            features,
            camera,
            identity,
            split,
        });
    }
    if samples.is_empty() {
        return Err(Error::InvalidDataset("no samples: file has only a header".into()));
    }
    Ok(ParsedRows { samples, dim })
}

/// Loads a dataset CSV, taking the camera count from the sidecar when one
/// exists and otherwise from the largest camera id.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_rows(&text, 'f').map_err(|e| e.with_path(path))?;
    let meta_path = sidecar_path(path);
    let (num_cameras, provenance) = if meta_path.exists() {
        let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: DatasetMeta =
            serde_json::from_str(&meta_text).map_err(|e| Error::from(e).with_path(&meta_path))?;
        if meta.input_dim != rows.dim {
            return Err(Error::InvalidDataset(format!(
                "{} declares input_dim {} but the CSV has {} feature columns",
                meta_path.display(),
                meta.input_dim,
                rows.dim
            )));
        }
        let prov = match meta.synth {
            Some(cfg) => Provenance::Synthetic(cfg),
            None => Provenance::File(path.to_path_buf()),
        };
        (meta.num_cameras, prov)
    } else {
        let c = rows.samples.iter().map(|s| s.camera).max().unwrap_or(0) + 1;
        (c, Provenance::File(path.to_path_buf()))
    };
    if let Some((i, s)) = rows.samples.iter().enumerate().find(|(_, s)| s.camera >= num_cameras) {
        return Err(Error::Parse {
            path: Some(path.to_path_buf()),
            line: Some(i as u64 + 2),
            message: format!("camera {} not below declared camera count {num_cameras}", s.camera),
        });
    }
    Dataset::new(rows.samples, num_cameras, rows.dim, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            cameras: 3,
            identities_per_camera: 4,
            samples_per_identity: 3,
            input_dim: 5,
            cross_camera_overlap: 2,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = generate_synthetic(&small_cfg()).unwrap();
        save_csv(&ds, &path).unwrap();
        assert!(sidecar_path(&path).exists());
        let back = load_csv(&path).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.provenance(), ds.provenance());
        assert_eq!(content_hash(&back), content_hash(&ds));
    }

    #[test]
    fn short_row_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = generate_synthetic(&small_cfg()).unwrap();
        save_csv(&ds, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let cut = lines[3].rfind(',').unwrap();
        lines[3].truncate(cut);
        fs::write(&path, lines.join("\n")).unwrap();
        let err = load_csv(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(4), .. }), "{err}");
        assert!(err.to_string().contains(":4:"), "{err}");
    }

    #[test]
    fn empty_file_has_no_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        fs::write(&path, "").unwrap();
        let err = load_csv(&path).unwrap_err();
        assert!(err.to_string().contains("no samples"), "{err}");
    }

    #[test]
    fn camera_beyond_declared_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = generate_synthetic(&small_cfg()).unwrap();
        save_csv(&ds, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[5] = format!("7{}", &lines[5][1..]);
        fs::write(&path, lines.join("\n")).unwrap();
        let err = load_csv(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(6), .. }), "{err}");
    }

    #[test]
    fn bad_header_and_values() {
        assert!(parse_rows("cam,identity,split,f0\n", 'f').is_err());
        assert!(parse_rows("camera,identity,split,f1\n0,0,train,1\n", 'f').is_err());
        let err = parse_rows("camera,identity,split,f0\n0,0,train,abc\n", 'f').unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(2), .. }));
        let err = parse_rows("camera,identity,split,f0\n0,0,test,1\n", 'f').unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(2), .. }));
        assert!(parse_rows("camera,identity,split,f0\n0,0,train,NaN\n", 'f').is_err());
    }
}
