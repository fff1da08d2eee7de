//! Model checkpoint file.
//!
//! ```text
//! defembed-checkpoint 1
//! config {"architecture":"lstm",...}
//! vocab_hash <sha256 hex>
//! vocab <n>
//! <token>                      (n lines)
//! tensor <name> <rows> <cols>
//! <rows*cols little-endian f32><LF>
//! ...
//! end
//! ```
//!
//! Serialisation is canonical: `save → load → save` reproduces the same
//! bytes.

use std::fs;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{
    lstm::GATE_NAMES, BowParameters, Encoder, EncoderConfig, GateWeights, LstmParameters,
    Parameters, INPUT_EMBEDDINGS,
};
use crate::corpus::{hex, Vocabulary};
use crate::encoders::Architecture;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAGIC: &str = "defembed-checkpoint 1";

pub fn to_bytes(encoder: &Encoder<f32>) -> Vec<u8> {
    let mut out = Vec::new();
    write(encoder, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn write<W: Write>(encoder: &Encoder<f32>, mut w: W) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    let config = serde_json::to_string(encoder.config()).expect("config serialises");
    writeln!(w, "config {config}")?;
    writeln!(w, "vocab_hash {}", encoder.vocab().hash())?;
    writeln!(w, "vocab {}", encoder.vocab().len())?;
    for t in encoder.vocab().tokens() {
        writeln!(w, "{t}")?;
    }
    for t in encoder.params().tensors() {
        writeln!(w, "tensor {} {} {}", t.name, t.rows, t.cols)?;
        for x in t.data {
            w.write_all(&x.to_le_bytes())?;
        }
        writeln!(w)?;
    }
    writeln!(w, "end")?;
    Ok(())
}

pub fn save(encoder: &Encoder<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_bytes(encoder)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Encoder<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

/// Hex SHA-256 of serialised checkpoint bytes.
pub fn hash_bytes(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn hash(encoder: &Encoder<f32>) -> String {
    hash_bytes(&to_bytes(encoder))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn read_line<R: BufRead>(r: &mut R) -> Result<String> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Err(bad("unexpected end of file"));
    }
    if line.ends_with('\n') {
        line.pop();
    }
    Ok(line)
}

fn expect_field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| bad(format!("expected `{key}` line, found `{line}`")))
}

pub fn from_bytes(mut bytes: &[u8]) -> Result<Encoder<f32>> {
    let r = &mut bytes;
    if read_line(r)? != MAGIC {
        return Err(bad("missing checkpoint header"));
    }
    let config: EncoderConfig = serde_json::from_str(expect_field(&read_line(r)?, "config")?)
        .map_err(|e| bad(format!("config: {e}")))?;
    let vocab_hash = expect_field(&read_line(r)?, "vocab_hash")?.to_owned();
    let n: usize = expect_field(&read_line(r)?, "vocab")?
        .parse()
        .map_err(|_| bad("bad vocab size"))?;
    let mut tokens = Vec::with_capacity(n);
    for _ in 0..n {
        tokens.push(read_line(r)?);
    }
    let vocab = Vocabulary::from_tokens(tokens.iter().cloned());
    if vocab.tokens() != tokens.as_slice() {
        return Err(bad("vocabulary is not sorted and unique"));
    }
    if vocab.hash() != vocab_hash {
        return Err(bad("vocabulary hash mismatch"));
    }

    let mut tensors: Vec<(String, usize, usize, Vec<f32>)> = Vec::new();
    loop {
        let line = read_line(r)?;
        if line == "end" {
            break;
        }
        let fields: Vec<&str> = expect_field(&line, "tensor")?.split(' ').collect();
        let [name, rows, cols] = fields[..] else {
            return Err(bad(format!("bad tensor line `{line}`")));
        };
        let rows: usize = rows.parse().map_err(|_| bad("bad tensor rows"))?;
        let cols: usize = cols.parse().map_err(|_| bad("bad tensor cols"))?;
        let len = rows
            .checked_mul(cols)
            .and_then(|l| l.checked_mul(4))
            .ok_or_else(|| bad("tensor too large"))?;
        if r.len() < len + 1 {
            return Err(bad(format!("truncated tensor `{name}`")));
        }
        let mut raw = vec![0u8; len];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let mut nl = [0u8; 1];
        r.read_exact(&mut nl)?;
        if nl[0] != b'\n' {
            return Err(bad(format!("missing terminator after tensor `{name}`")));
        }
        tensors.push((name.to_owned(), rows, cols, data));
    }
    if !r.is_empty() {
        return Err(bad("trailing bytes after `end`"));
    }

    let mut take = |name: &str| -> Result<(usize, usize, Vec<f32>)> {
        if tensors.is_empty() || tensors[0].0 != name {
            return Err(bad(format!("expected tensor `{name}`")));
        }
        let (_, rows, cols, data) = tensors.remove(0);
        Ok((rows, cols, data))
    };
    let mut matrix = |name: &str| -> Result<Matrix<f32>> {
        let (rows, cols, data) = take(name)?;
        Ok(Matrix::from_vec(rows, cols, data))
    };

    let params = match config.architecture {
        Architecture::Bow => Parameters::Bow(BowParameters {
            input_embeddings: matrix(INPUT_EMBEDDINGS)?,
            projection: matrix("projection")?,
        }),
        Architecture::Lstm => {
            let input_embeddings = matrix(INPUT_EMBEDDINGS)?;
            let mut gates = Vec::with_capacity(4);
            for names in GATE_NAMES {
                gates.push(GateWeights {
                    input: matrix(names[0])?,
                    recurrent: matrix(names[1])?,
                    bias: matrix(names[2])?.as_slice().to_vec(),
                });
            }
            let projection = matrix("projection")?;
            let projection_bias = matrix("projection_bias")?.as_slice().to_vec();
            let [cell, input_gate, forget_gate, output_gate]: [GateWeights<f32>; 4] =
                gates.try_into().unwrap();
            Parameters::Lstm(LstmParameters {
                input_embeddings,
                cell,
                input_gate,
                forget_gate,
                output_gate,
                projection,
                projection_bias,
            })
        }
    };
    if !tensors.is_empty() {
        return Err(bad(format!("unexpected tensor `{}`", tensors[0].0)));
    }
    Encoder::from_parts(config, vocab, params).map_err(|e| bad(e.to_string()))
}
