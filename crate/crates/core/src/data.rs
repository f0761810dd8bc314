//! Dataset loading, preprocessing and split files.
//!
//! # Native directory format
//!
//! A directory holding `manifest.tsv` plus one text file per sample. Each
//! manifest line is `filename<TAB>label<TAB>split` where `split` is `train`
//! or `test`; blank lines and lines starting with `#` are skipped. A sample
//! file has one line per time step and one whitespace-separated column per
//! channel.
//!
//! # CSV format
//!
//! A directory holding `samples.csv` (or the CSV file itself) with the header
//! `sample_id,channel,t,value,label,split`, one row per value. Channels and
//! time steps are 0-based and every `(channel, t)` up to the sample's length
//! must be present.
//!
//! Labels `1`, `+1` and `normal` map to `+1`; `-1`, `0` and `abnormal` map to
//! `-1`.
//!
//! # Split file
//!
//! Little-endian binary: magic `DSAXSPLT`, `u32` version (1), name (`u32`
//! length + UTF-8), `u32` channels, `u32` padded length, `u8` standardized
//! flag followed (if set) by per-channel means then standard deviations as
//! `f64`, `u32` train count, `u32` test count, then every sample as id
//! (`u32` length + UTF-8), `u8` label (1 = +1, 0 = −1), `u32` original
//! length and `channels × padded length` `f64` values, channel-major.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::numerics::Tensor;
use crate::sax::FLAT_STD;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Native,
    CsvManifest,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(DataFormat::Native),
            "csv" | "csv-manifest" => Ok(DataFormat::CsvManifest),
            _ => Err(Error::arg(format!("unknown data format {s:?}"))),
        }
    }
}

/// One multivariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    /// `values[c][t]`, zero-padded to the data set length.
    pub values: Vec<Vec<f64>>,
    /// `+1` or `-1`.
    pub label: i8,
    pub original_length: usize,
}

impl Sample {
    pub fn channels(&self) -> usize {
        self.values.len()
    }

    pub fn length(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// `[1 × C × L]` network input.
    pub fn to_input(&self) -> Result<Tensor> {
        let (c, l) = (self.channels(), self.length());
        Tensor::new(vec![1, c, l], self.values.concat())
    }
}

/// Per-channel mean and standard deviation from the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub channels: usize,
    pub padded_length: usize,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    /// Set once the data has been standardized.
    pub standardization: Option<ChannelStats>,
}

fn parse_label(s: &str) -> Option<i8> {
    match s.trim() {
        "1" | "+1" | "normal" => Some(1),
        "-1" | "0" | "abnormal" => Some(-1),
        _ => None,
    }
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

struct RawSample {
    id: String,
    label: i8,
    is_train: bool,
    values: Vec<Vec<f64>>,
}

fn parse_split(s: &str) -> Option<bool> {
    match s.trim() {
        "train" => Some(true),
        "test" => Some(false),
        _ => None,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_sample_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| format_err(path, n + 1, "non-numeric value"))?;
        if columns.is_empty() {
            columns = vec![Vec::new(); row.len()];
        } else if row.len() != columns.len() {
            return Err(format_err(
                path,
                n + 1,
                format!("{} columns, expected {}", row.len(), columns.len()),
            ));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(format_err(path, n + 1, "non-finite value"));
        }
        for (c, v) in columns.iter_mut().zip(row) {
            c.push(v);
        }
    }
    if columns.is_empty() {
        return Err(format_err(path, 0, "sample file holds no values"));
    }
    Ok(columns)
}

fn load_native(dir: &Path) -> Result<Vec<RawSample>> {
    let manifest = dir.join("manifest.tsv");
    let text = read_text(&manifest)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [file, label, split] = fields.as_slice() else {
            return Err(format_err(&manifest, n + 1, "expected filename<TAB>label<TAB>split"));
        };
        let label = parse_label(label)
            .ok_or_else(|| format_err(&manifest, n + 1, format!("unknown label {label:?}")))?;
        let is_train = parse_split(split)
            .ok_or_else(|| format_err(&manifest, n + 1, format!("unknown split {split:?}")))?;
        out.push(RawSample {
            id: file.to_string(),
            label,
            is_train,
            values: read_sample_file(&dir.join(file))?,
        });
    }
    Ok(out)
}

fn load_csv(path: &Path) -> Result<Vec<RawSample>> {
    let path: PathBuf = if path.is_dir() {
        path.join("samples.csv")
    } else {
        path.to_path_buf()
    };
    let text = read_text(&path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "sample_id,channel,t,value,label,split" => {}
        _ => return Err(format_err(&path, 1, "missing header sample_id,channel,t,value,label,split")),
    }
    struct Partial {
        label: i8,
        is_train: bool,
        cells: HashMap<(usize, usize), f64>,
        channels: usize,
        length: usize,
    }
    let mut order: Vec<String> = Vec::new();
    let mut parts: HashMap<String, Partial> = HashMap::new();
    for (n, line) in lines {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [id, ch, t, v, label, split] = f.as_slice() else {
            return Err(format_err(&path, line_no, "expected 6 fields"));
        };
        let ch: usize = ch.parse().map_err(|_| format_err(&path, line_no, "bad channel"))?;
        let t: usize = t.parse().map_err(|_| format_err(&path, line_no, "bad time index"))?;
        let v: f64 = v
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| format_err(&path, line_no, "bad value"))?;
        let label = parse_label(label)
            .ok_or_else(|| format_err(&path, line_no, format!("unknown label {label:?}")))?;
        let is_train = parse_split(split)
            .ok_or_else(|| format_err(&path, line_no, format!("unknown split {split:?}")))?;
        let p = parts.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Partial {
                label,
                is_train,
                cells: HashMap::new(),
                channels: 0,
                length: 0,
            }
        });
        if p.label != label || p.is_train != is_train {
            return Err(format_err(&path, line_no, format!("sample {id} changes label or split")));
        }
        if p.cells.insert((ch, t), v).is_some() {
            return Err(format_err(&path, line_no, format!("duplicate value for {id} channel {ch} t {t}")));
        }
        p.channels = p.channels.max(ch + 1);
        p.length = p.length.max(t + 1);
    }
    order
        .into_iter()
        .map(|id| {
            let p = parts.remove(&id).unwrap();
            let mut values = vec![vec![0.0; p.length]; p.channels];
            for c in 0..p.channels {
                for t in 0..p.length {
                    values[c][t] = *p.cells.get(&(c, t)).ok_or_else(|| {
                        format_err(&path, 0, format!("sample {id} lacks channel {c} at t {t}"))
                    })?;
                }
            }
            Ok(RawSample {
                id,
                label: p.label,
                is_train: p.is_train,
                values,
            })
        })
        .collect()
}

/// Reads a data set without standardizing it; series are zero-padded on the
/// right to the longest one.
pub fn load_raw(path: &Path, format: DataFormat) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    let raw = match format {
        DataFormat::Native => load_native(path)?,
        DataFormat::CsvManifest => load_csv(path)?,
    };
    let channels = raw.first().map_or(0, |s| s.values.len());
    if let Some(bad) = raw.iter().find(|s| s.values.len() != channels) {
        return Err(format_err(
            path,
            0,
            format!("sample {} has {} channels, expected {channels}", bad.id, bad.values.len()),
        ));
    }
    let padded_length = raw.iter().map(|s| s.values[0].len()).max().unwrap_or(0);
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let mut ds = Dataset {
        name,
        channels,
        padded_length,
        train: Vec::new(),
        test: Vec::new(),
        standardization: None,
    };
    for r in raw {
        let original_length = r.values[0].len();
        let values = r
            .values
            .into_iter()
            .map(|mut v| {
                v.resize(padded_length, 0.0);
                v
            })
            .collect();
        let s = Sample {
            id: r.id,
            values,
            label: r.label,
            original_length,
        };
        if r.is_train {
            ds.train.push(s);
        } else {
            ds.test.push(s);
        }
    }
    Ok(ds)
}

/// Loads and standardizes per channel with training-set statistics.
pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let mut ds = load_raw(path, format)?;
    ds.standardize()?;
    Ok(ds)
}

impl Dataset {
    /// Mean and population standard deviation per channel over all original
    /// (unpadded) time steps of the training samples.
    pub fn training_stats(&self) -> ChannelStats {
        let mut mean = vec![0.0; self.channels];
        let mut std = vec![1.0; self.channels];
        for c in 0..self.channels {
            let vals = self
                .train
                .iter()
                .flat_map(|s| s.values[c][..s.original_length].iter().copied());
            let (n, sum) = vals.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
            if n == 0 {
                continue;
            }
            let m = sum / n as f64;
            let var = vals.map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            mean[c] = m;
            std[c] = if var.sqrt() < FLAT_STD { 1.0 } else { var.sqrt() };
        }
        ChannelStats { mean, std }
    }

    /// Standardizes every sample with training statistics, leaving padding at
    /// exactly 0. Fails if the data set is already standardized.
    pub fn standardize(&mut self) -> Result<()> {
        if self.standardization.is_some() {
            return Err(Error::arg(format!("data set {} is already standardized", self.name)));
        }
        let stats = self.training_stats();
        for s in self.train.iter_mut().chain(self.test.iter_mut()) {
            for (c, ch) in s.values.iter_mut().enumerate() {
                for v in &mut ch[..s.original_length] {
                    *v = (*v - stats.mean[c]) / stats.std[c];
                }
            }
        }
        self.standardization = Some(stats);
        Ok(())
    }

    pub fn train_inputs(&self) -> Result<Vec<Tensor>> {
        self.train.iter().map(Sample::to_input).collect()
    }

    pub fn test_inputs(&self) -> Result<Vec<Tensor>> {
        self.test.iter().map(Sample::to_input).collect()
    }
}

const SPLIT_MAGIC: &[u8; 8] = b"DSAXSPLT";
const SPLIT_VERSION: u32 = 1;

pub fn split_to_bytes(ds: &Dataset) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(SPLIT_MAGIC);
    w.u32(SPLIT_VERSION);
    w.str(&ds.name);
    w.u32(ds.channels as u32);
    w.u32(ds.padded_length as u32);
    match &ds.standardization {
        Some(st) => {
            w.u8(1);
            w.f64s(&st.mean);
            w.f64s(&st.std);
        }
        None => w.u8(0),
    }
    w.u32(ds.train.len() as u32);
    w.u32(ds.test.len() as u32);
    for s in ds.train.iter().chain(&ds.test) {
        w.str(&s.id);
        w.u8(u8::from(s.label == 1));
        w.u32(s.original_length as u32);
        for ch in &s.values {
            w.f64s(ch);
        }
    }
    w.buf
}

pub fn split_from_bytes(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes, "split file");
    if r.take(8)? != SPLIT_MAGIC {
        return Err(r.corrupt("bad magic"));
    }
    let version = r.u32()?;
    if version != SPLIT_VERSION {
        return Err(Error::Version {
            what: "split file",
            found: version,
            expected: SPLIT_VERSION,
        });
    }
    let name = r.str()?;
    let channels = r.u32()? as usize;
    let padded_length = r.u32()? as usize;
    let standardization = match r.u8()? {
        0 => None,
        1 => Some(ChannelStats {
            mean: r.f64s(channels)?,
            std: r.f64s(channels)?,
        }),
        f => return Err(r.corrupt(format!("bad standardization flag {f}"))),
    };
    let n_train = r.u32()? as usize;
    let n_test = r.u32()? as usize;
    let mut samples = Vec::new();
    for _ in 0..n_train.saturating_add(n_test) {
        let id = r.str()?;
        let label = match r.u8()? {
            1 => 1,
            0 => -1,
            l => return Err(r.corrupt(format!("bad label byte {l}"))),
        };
        let original_length = r.u32()? as usize;
        if original_length > padded_length {
            return Err(r.corrupt(format!("sample {id} longer than the padded length")));
        }
        let values = (0..channels)
            .map(|_| r.f64s(padded_length))
            .collect::<Result<Vec<_>>>()?;
        samples.push(Sample {
            id,
            values,
            label,
            original_length,
        });
    }
    r.finish()?;
    let test = samples.split_off(n_train);
    Ok(Dataset {
        name,
        channels,
        padded_length,
        train: samples,
        test,
        standardization,
    })
}

pub fn save_split(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, split_to_bytes(ds)).map_err(|e| Error::io(path, e))
}

pub fn load_split(path: &Path) -> Result<Dataset> {
    split_from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
