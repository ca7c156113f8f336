//! Checkpoint file: a text manifest followed by a little-endian `f32` payload.
//!
//! ```text
//! eacm-checkpoint
//! version = 1
//! [config] <n>
//! <key> = <value>            (n lines)
//! [vocab] <n>
//! <token>                    (n lines, id order)
//! [params] <n>
//! <name> <d0>x<d1>.. <byte offset>
//! [payload] <bytes>
//! <raw bytes>
//! ```

use std::fs;
use std::path::Path;

use super::config::TrainConfig;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numerics::Tensor;

pub const MAGIC: &str = "eacm-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub vocab: Vocabulary,
    pub model: Model<f32>,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Checkpoint(format!("bad field `{field}`: {msg}"))
}

/// Line cursor over the manifest part of a checkpoint.
struct Manifest<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Manifest<'a> {
    fn line(&mut self, field: &str) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad(field, "unexpected end of file"))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| bad(field, "not valid UTF-8"))
    }

    /// Reads `[section] <count>`.
    fn section(&mut self, name: &str) -> Result<usize> {
        let line = self.line(name)?;
        let count = line
            .strip_prefix(&format!("[{name}] "))
            .ok_or_else(|| bad(name, format!("expected `[{name}] <count>`, got `{line}`")))?;
        count.parse().map_err(|e| bad(name, format!("bad count `{count}`: {e}")))
    }
}

impl Checkpoint {
    pub fn new(config: TrainConfig, vocab: Vocabulary, model: Model<f32>) -> Self {
        Checkpoint { config, vocab, model }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut head = format!("{MAGIC}\nversion = {VERSION}\n");
        let pairs = self.config.to_pairs();
        head += &format!("[config] {}\n", pairs.len());
        for (k, v) in pairs {
            head += &format!("{k} = {v}\n");
        }
        head += &format!("[vocab] {}\n", self.vocab.len());
        for t in self.vocab.tokens() {
            head += t;
            head.push('\n');
        }
        head += &format!("[params] {}\n", self.model.params.len());
        let mut offset = 0usize;
        for (_, p) in self.model.params.iter() {
            let dims: Vec<String> = p.value.shape().iter().map(|d| d.to_string()).collect();
            head += &format!("{} {} {offset}\n", p.name, dims.join("x"));
            offset += 4 * p.value.len();
        }
        head += &format!("[payload] {offset}\n");
        let mut out = head.into_bytes();
        out.reserve(offset);
        for (_, p) in self.model.params.iter() {
            for v in p.value.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut m = Manifest { bytes, pos: 0 };
        if m.line("magic")? != MAGIC {
            return Err(bad("magic", "not an eacm checkpoint"));
        }
        let version = m.line("version")?;
        match version.strip_prefix("version = ").map(str::parse::<u32>) {
            Some(Ok(VERSION)) => {}
            Some(Ok(v)) => {
                return Err(bad("version", format!("unsupported version {v}, expected {VERSION}")))
            }
            _ => return Err(bad("version", format!("malformed line `{version}`"))),
        }

        let n = m.section("config")?;
        let mut config = TrainConfig::default();
        for _ in 0..n {
            let line = m.line("config")?;
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| bad("config", format!("malformed line `{line}`")))?;
            config
                .set(k, v)
                .map_err(|e| bad(&format!("config.{k}"), e))?;
        }
        config.validate().map_err(|e| bad("config", e))?;

        let n = m.section("vocab")?;
        let tokens = (0..n)
            .map(|_| m.line("vocab").map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        let vocab = Vocabulary::from_tokens(tokens).map_err(|e| bad("vocab", e))?;

        let n = m.section("params")?;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let line = m.line("params")?;
            let mut parts = line.split(' ');
            let (Some(name), Some(shape), Some(offset), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("params", format!("malformed line `{line}`")));
            };
            let shape = shape
                .split('x')
                .map(str::parse::<usize>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(&format!("params.{name}.shape"), e))?;
            let offset: usize = offset
                .parse()
                .map_err(|e| bad(&format!("params.{name}.offset"), e))?;
            entries.push((name.to_string(), shape, offset));
        }
        let payload_len = m.section("payload")?;
        let payload = &bytes[m.pos..];
        if payload.len() != payload_len {
            return Err(bad(
                "payload",
                format!("expected {payload_len} bytes, found {}", payload.len()),
            ));
        }

        let mut model = Model::<f32>::new(config.model_config(vocab.len()), config.seed)
            .map_err(|e| bad("config", e))?;
        let mismatched = mismatched_names(&model, &entries);
        if !mismatched.is_empty() {
            return Err(Error::ParamMismatch(mismatched));
        }
        let mut expected = 0usize;
        for ((name, shape, offset), p) in entries.iter().zip(model.params.iter_mut()) {
            if *offset != expected {
                return Err(bad(
                    &format!("params.{name}.offset"),
                    format!("expected {expected}, got {offset}"),
                ));
            }
            let len = 4 * p.value.len();
            let end = offset
                .checked_add(len)
                .filter(|&e| e <= payload.len())
                .ok_or_else(|| bad(&format!("params.{name}"), "runs past the payload"))?;
            let data = payload[*offset..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            p.value = Tensor::new(shape.clone(), data)?;
            expected = end;
        }
        if expected != payload.len() {
            return Err(bad("payload", "trailing bytes after the last parameter"));
        }
        Ok(Checkpoint { config, vocab, model })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(msg) => Error::Checkpoint(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Copies every parameter into `model`, which must have exactly the same
    /// names and shapes.
    pub fn restore_into(&self, model: &mut Model<f32>) -> Result<()> {
        let entries: Vec<(String, Vec<usize>, usize)> = self
            .model
            .params
            .iter()
            .map(|(_, p)| (p.name.clone(), p.value.shape().to_vec(), 0))
            .collect();
        let mismatched = mismatched_names(model, &entries);
        if !mismatched.is_empty() {
            return Err(Error::ParamMismatch(mismatched));
        }
        for (dst, (_, src)) in model.params.iter_mut().zip(self.model.params.iter()) {
            dst.value = src.value.clone();
        }
        Ok(())
    }
}

/// Names that are missing on either side, in a different position, or of a
/// different shape.
fn mismatched_names(model: &Model<f32>, entries: &[(String, Vec<usize>, usize)]) -> Vec<String> {
    let mut out = Vec::new();
    let registered: Vec<_> = model.params.iter().map(|(_, p)| p).collect();
    for (i, (name, shape, _)) in entries.iter().enumerate() {
        match registered.get(i) {
            Some(p) if &p.name == name && p.value.shape() == shape.as_slice() => {}
            _ => out.push(name.clone()),
        }
    }
    for p in registered.iter().skip(entries.len()) {
        out.push(p.name.clone());
    }
    for p in &registered[..entries.len().min(registered.len())] {
        if !entries.iter().any(|(n, _, _)| n == &p.name) && !out.contains(&p.name) {
            out.push(p.name.clone());
        }
    }
    out
}
