//! Self-describing checkpoint container.
//!
//! Layout:
//! ```text
//! CVAE-CHECKPOINT\n
//! format_version <u32>\n
//! header_bytes <usize>\n
//! <header: JSON text, header_bytes long>\n
//! <weights: little-endian f64, layer order, weight then bias>
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::graph::{LayerParams, ModelGraph, ParamStore, ParamTensor};
use super::layer::LayerSpec;
use crate::error::{Error, Result};

pub const MAGIC: &str = "CVAE-CHECKPOINT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    layers: Vec<LayerSpec>,
    /// `(weight_len, bias_len)` per layer, `None` for parameter-free layers.
    shapes: Vec<Option<(usize, usize)>>,
    input_channels: usize,
    train_len: usize,
    /// Caller-defined metadata (configs, seed, loss history, ...).
    extra: Value,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn encode(graph: &ModelGraph, input_channels: usize, train_len: usize, extra: Value) -> Result<Vec<u8>> {
    let header = Header {
        layers: graph.layers().to_vec(),
        shapes: graph
            .params
            .layers
            .iter()
            .map(|p| p.as_ref().map(|p| (p.weight.len(), p.bias.len())))
            .collect(),
        input_channels,
        train_len,
        extra,
    };
    let text = serde_json::to_string_pretty(&header).map_err(|e| bad(e.to_string()))?;
    let mut out = format!(
        "{MAGIC}\nformat_version {FORMAT_VERSION}\nheader_bytes {}\n{text}\n",
        text.len()
    )
    .into_bytes();
    for t in graph.params.iter() {
        for v in &t.value {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn take_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    let rest = &bytes[*pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("truncated header"))?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not UTF-8"))
}

fn field<T: std::str::FromStr>(line: &str, name: &str) -> Result<T> {
    line.strip_prefix(name)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| bad(format!("expected `{name} <value>`, found `{line}`")))
}

/// Parses a checkpoint, returning the graph and the caller metadata.
pub fn decode(bytes: &[u8]) -> Result<(ModelGraph, Value)> {
    let mut pos = 0;
    if take_line(bytes, &mut pos).ok() != Some(MAGIC) {
        return Err(bad("missing magic line; not a checkpoint file"));
    }
    let version: u32 = field(take_line(bytes, &mut pos)?, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(bad(format!(
            "unsupported format version {version} (this build reads {FORMAT_VERSION})"
        )));
    }
    let header_len: usize = field(take_line(bytes, &mut pos)?, "header_bytes")?;
    let text = bytes
        .get(pos..pos + header_len)
        .ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(text).map_err(|e| bad(format!("malformed header: {e}")))?;
    pos += header_len;
    if bytes.get(pos) != Some(&b'\n') {
        return Err(bad("header terminator missing"));
    }
    pos += 1;

    let expected: usize = header.shapes.iter().flatten().map(|(w, b)| w + b).sum();
    let body = &bytes[pos..];
    if body.len() != expected * 8 {
        return Err(bad(format!(
            "weight section holds {} bytes, expected {}",
            body.len(),
            expected * 8
        )));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut take = |n: usize| ParamTensor::new(values.by_ref().take(n).collect());
    let layers = header
        .shapes
        .iter()
        .map(|s| {
            s.map(|(w, b)| LayerParams {
                weight: take(w),
                bias: take(b),
            })
        })
        .collect();
    let graph = ModelGraph::from_parts(
        header.layers,
        ParamStore { layers, step: 0 },
        header.input_channels,
        header.train_len,
    )?;
    Ok((graph, header.extra))
}
