use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::numerics::{ParamId, ParamStore, Scalar};

/// Copies pretrained vectors into rows of an embedding table.
///
/// Each line is a token followed by exactly `dim` decimals. Vocabulary
/// entries without a line keep their current values; lines for unknown
/// tokens are ignored. Returns how many rows were replaced.
pub fn load_embeddings_text<T: Scalar>(
    text: &str,
    origin: &str,
    vocab: &Vocabulary,
    store: &mut ParamStore<T>,
    table: ParamId,
) -> Result<usize> {
    let dim = store.value(table).cols();
    let mut filled = 0;
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            msg,
        };
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let values = parts
            .map(|s| s.parse::<f64>().map_err(|e| err(format!("bad number `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(err(format!("expected {dim} values for `{token}`, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err(format!("non-finite value for `{token}`")));
        }
        if !vocab.contains(token) {
            continue;
        }
        let row = vocab.id(token) as usize;
        let data = store.get_mut(table).value.data_mut();
        for (dst, &v) in data[row * dim..(row + 1) * dim].iter_mut().zip(&values) {
            *dst = T::lit(v);
        }
        filled += 1;
    }
    Ok(filled)
}

pub fn load_embeddings<T: Scalar>(
    path: &Path,
    vocab: &Vocabulary,
    store: &mut ParamStore<T>,
    table: ParamId,
) -> Result<usize> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_embeddings_text(&text, &path.display().to_string(), vocab, store, table)
}
