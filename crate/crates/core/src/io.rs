//! JSON interchange formats for states and channels.
//!
//! States: `{"dims": [dA, dB, ...], "labels": ["A", "B", ...],
//! "matrix": [[[re, im], ...], ...]}` with the matrix row-major and each
//! entry a two-array of finite doubles.
//!
//! Channels: `{"kind": "kraus", "in_dims": [...], "out_dims": [...],
//! "kraus": [matrix, ...]}` or `{"kind": "choi", ..., "matrix": ...}`.
//! Labels are optional on input and default from the subsystem count.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelReport, ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{CMat, SubsystemLayout};
use crate::states::DensityMatrix;

/// Row-major complex matrix encoding: rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ChannelJson {
    #[serde(rename = "kraus")]
    Kraus {
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        in_labels: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out_labels: Option<Vec<String>>,
        kraus: Vec<MatrixJson>,
    },
    #[serde(rename = "choi")]
    Choi {
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        in_labels: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out_labels: Option<Vec<String>>,
        matrix: MatrixJson,
    },
}

/// Default subsystem labels: `[A]`, `[A, B]`, or `[A', A, B', B]`; other
/// counts fall back to `S1, S2, ...`.
pub fn default_labels(n: usize) -> Vec<String> {
    match n {
        1 => vec!["A".into()],
        2 => vec!["A".into(), "B".into()],
        4 => vec!["A'".into(), "A".into(), "B'".into(), "B".into()],
        _ => (1..=n).map(|i| format!("S{i}")).collect(),
    }
}

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_json(mj: &MatrixJson) -> Result<CMat> {
    let rows = mj.len();
    if rows == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let cols = mj[0].len();
    if cols == 0 {
        return Err(Error::Parse("matrix has no columns".into()));
    }
    let mut m = CMat::zeros(rows, cols);
    for (r, row) in mj.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {r} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!(
                    "entry ({r}, {c}) is not a pair of finite doubles"
                )));
            }
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn state_to_json(rho: &DensityMatrix) -> StateJson {
    StateJson {
        dims: rho.layout().dims().to_vec(),
        labels: Some(rho.layout().names().to_vec()),
        matrix: matrix_to_json(rho.op()),
    }
}

pub fn state_from_json(sj: &StateJson) -> Result<DensityMatrix> {
    let labels = match &sj.labels {
        Some(l) => l.clone(),
        None => default_labels(sj.dims.len()),
    };
    let layout = SubsystemLayout::new(labels, sj.dims.clone())?;
    DensityMatrix::new(matrix_from_json(&sj.matrix)?, layout)
}

pub fn channel_to_json(ch: &KrausChannel) -> ChannelJson {
    ChannelJson::Kraus {
        in_dims: ch.in_layout().dims().to_vec(),
        out_dims: ch.out_layout().dims().to_vec(),
        in_labels: Some(ch.in_layout().names().to_vec()),
        out_labels: Some(ch.out_layout().names().to_vec()),
        kraus: ch.kraus_ops().iter().map(matrix_to_json).collect(),
    }
}

fn layouts_of(
    in_dims: &[usize],
    out_dims: &[usize],
    in_labels: &Option<Vec<String>>,
    out_labels: &Option<Vec<String>>,
) -> Result<(SubsystemLayout, SubsystemLayout)> {
    let in_names = in_labels
        .clone()
        .unwrap_or_else(|| default_labels(in_dims.len()));
    let out_names = out_labels
        .clone()
        .unwrap_or_else(|| default_labels(out_dims.len()));
    Ok((
        SubsystemLayout::new(in_names, in_dims.to_vec())?,
        SubsystemLayout::new(out_names, out_dims.to_vec())?,
    ))
}

/// Parses a channel, enforcing the CPTP invariants. A Choi-form channel is
/// converted to Kraus form through its eigendecomposition.
pub fn channel_from_json(cj: &ChannelJson) -> Result<KrausChannel> {
    match cj {
        ChannelJson::Kraus {
            in_dims,
            out_dims,
            in_labels,
            out_labels,
            kraus,
        } => {
            let (in_layout, out_layout) = layouts_of(in_dims, out_dims, in_labels, out_labels)?;
            let ops: Vec<CMat> = kraus.iter().map(matrix_from_json).collect::<Result<_>>()?;
            KrausChannel::new(ops, in_layout, out_layout)
        }
        ChannelJson::Choi {
            in_dims,
            out_dims,
            in_labels,
            out_labels,
            matrix,
        } => {
            let (in_layout, out_layout) = layouts_of(in_dims, out_dims, in_labels, out_labels)?;
            ChoiMatrix::new(matrix_from_json(matrix)?, in_layout, out_layout)?.to_kraus()
        }
    }
}

/// Diagnostic parse: builds the channel without enforcing CPTP and
/// reports its deviations, so invalid inputs still yield a report.
pub fn channel_report_from_json(cj: &ChannelJson) -> Result<ChannelReport> {
    match cj {
        ChannelJson::Kraus {
            in_dims,
            out_dims,
            in_labels,
            out_labels,
            kraus,
        } => {
            let (in_layout, out_layout) = layouts_of(in_dims, out_dims, in_labels, out_labels)?;
            let ops: Vec<CMat> = kraus.iter().map(matrix_from_json).collect::<Result<_>>()?;
            KrausChannel::new_unvalidated(ops, in_layout, out_layout)?.validate()
        }
        ChannelJson::Choi {
            in_dims,
            out_dims,
            matrix,
            ..
        } => {
            let d_in: usize = in_dims.iter().product();
            let d_out: usize = out_dims.iter().product();
            let op = matrix_from_json(matrix)?;
            crate::channels::validate_choi_op(&op, d_in, d_out)
        }
    }
}

/// Serializes with every float printed at 17 significant digits, enough
/// to reproduce the exact `f64` on re-parse.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Parse(format!("invalid utf-8: {e}")))
}

pub fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("{e}")))
}

/// JSON formatter printing floats as `d.dddddddddddddddde±x`.
#[derive(Clone, Default)]
pub struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.7e}")
        } else {
            writer.write_all(b"null")
        }
    }
}
