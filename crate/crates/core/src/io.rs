//! On-disk formats: grid fields as a short text header followed by a
//! little-endian `f64` payload, atomic measures as CSV.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Atom, AtomicMeasure, GridField, MassSource};
use crate::geometry::Domain;

const MAGIC: &str = "regladder-grid 1";

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn join(v: &[impl ToString]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Header lines, an `end` line, then `ncomp * cells` values, components
/// interleaved, last axis fastest.
pub fn encode_grid(f: &GridField) -> Vec<u8> {
    let d = f.domain();
    let header = format!(
        "{MAGIC}\ndim {}\nshape {}\nncomp {}\nlower {}\nupper {}\ndtype float64\nend\n",
        d.dim(),
        join(f.shape()),
        f.ncomp(),
        join(d.lower()),
        join(d.upper()),
    );
    let mut out = header.into_bytes();
    out.reserve(8 * f.data().len());
    for v in f.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridField> {
    let mut rest = bytes;
    let mut line = || -> Result<String> {
        let at = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err("truncated header"))?;
        let s = std::str::from_utf8(&rest[..at])
            .map_err(|_| format_err("header is not UTF-8"))?
            .trim()
            .to_string();
        rest = &rest[at + 1..];
        Ok(s)
    };
    if line()? != MAGIC {
        return Err(format_err("missing grid header"));
    }
    let (mut dim, mut shape, mut ncomp, mut lower, mut upper) = (None, None, None, None, None);
    loop {
        let l = line()?;
        if l == "end" {
            break;
        }
        let (key, val) = l.split_once(' ').unwrap_or((l.as_str(), ""));
        let nums = |kind: &str| -> Result<Vec<f64>> {
            val.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| format_err(format!("bad {kind} value `{t}`")))
                })
                .collect()
        };
        match key {
            "dim" => dim = Some(val.parse::<usize>().map_err(|_| format_err("bad dim"))?),
            "shape" => {
                shape = Some(
                    nums("shape")?
                        .into_iter()
                        .map(|v| v as usize)
                        .collect::<Vec<_>>(),
                )
            }
            "ncomp" => ncomp = Some(val.parse::<usize>().map_err(|_| format_err("bad ncomp"))?),
            "lower" => lower = Some(nums("lower")?),
            "upper" => upper = Some(nums("upper")?),
            "dtype" if val == "float64" => {}
            "dtype" => return Err(format_err(format!("unsupported dtype `{val}`"))),
            _ => return Err(format_err(format!("unknown header key `{key}`"))),
        }
    }
    let missing = |k: &str| format_err(format!("header lacks `{k}`"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let shape = shape.ok_or_else(|| missing("shape"))?;
    let ncomp = ncomp.ok_or_else(|| missing("ncomp"))?;
    let domain = Domain::new(
        lower.ok_or_else(|| missing("lower"))?,
        upper.ok_or_else(|| missing("upper"))?,
    )?;
    if domain.dim() != dim || shape.len() != dim {
        return Err(format_err("dim disagrees with shape or box"));
    }
    let expect = shape.iter().product::<usize>() * ncomp * 8;
    if rest.len() != expect {
        return Err(format_err(format!(
            "payload has {} bytes, expected {expect}",
            rest.len()
        )));
    }
    let data = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridField::new(domain, shape, ncomp, data)
}

pub fn write_grid(path: &Path, f: &GridField) -> Result<()> {
    fs::write(path, encode_grid(f)).map_err(|e| io_err(path, e))
}

pub fn read_grid(path: &Path) -> Result<GridField> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut h| h.read_to_end(&mut bytes))
        .map_err(|e| io_err(path, e))?;
    decode_grid(&bytes)
}

const POS: [&str; 3] = ["x", "y", "z"];
const WEIGHT: [&str; 3] = ["w", "wy", "wz"];

/// Columns `x[,y[,z]],w[,wy,wz][,delta]`; `delta` is the common blob radius,
/// repeated on every row.
pub fn write_atoms(out: impl Write, mu: &AtomicMeasure) -> Result<()> {
    let dim = mu.domain().dim();
    let ncomp = mu.atoms().iter().map(|a| a.weight.len()).max().unwrap_or(1);
    let mut w = csv::Writer::from_writer(out);
    let mut head: Vec<&str> = POS[..dim].to_vec();
    head.extend(&WEIGHT[..ncomp]);
    head.push("delta");
    let fail = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&head).map_err(fail)?;
    for a in mu.atoms() {
        let mut row: Vec<String> = a.position.iter().map(|v| v.to_string()).collect();
        row.extend((0..ncomp).map(|k| a.weight.get(k).copied().unwrap_or(0.0).to_string()));
        row.push(mu.blob().to_string());
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// Reads atoms in `domain`; the dimension comes from the domain and must
/// match the position columns.
pub fn read_atoms(input: impl Read, domain: Domain) -> Result<AtomicMeasure> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let head: Vec<String> = r
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let col = |name: &str| head.iter().position(|h| h == name);
    let dim = domain.dim();
    let pos: Vec<usize> = POS[..dim]
        .iter()
        .map(|n| col(n).ok_or_else(|| format_err(format!("missing column `{n}`"))))
        .collect::<Result<_>>()?;
    if dim < 3 && col(POS[dim]).is_some() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: dim + 1,
        });
    }
    let wcols: Vec<usize> = WEIGHT.iter().map_while(|n| col(n)).collect();
    if wcols.is_empty() {
        return Err(format_err("missing column `w`"));
    }
    let dcol = col("delta");
    let mut atoms = Vec::new();
    let mut blob: Option<f64> = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format_err(e.to_string()))?;
        let num = |c: usize| -> Result<f64> {
            let t = rec.get(c).unwrap_or("");
            t.parse::<f64>().map_err(|_| {
                format_err(format!(
                    "row {}: `{t}` in column `{}` is not a number",
                    i + 1,
                    head[c]
                ))
            })
        };
        let position = pos.iter().map(|&c| num(c)).collect::<Result<Vec<_>>>()?;
        let weight = wcols.iter().map(|&c| num(c)).collect::<Result<Vec<_>>>()?;
        if let Some(c) = dcol {
            let d = num(c)?;
            match blob {
                Some(b) if b != d => {
                    return Err(format_err(format!(
                        "row {}: blob radius {d} differs from {b}",
                        i + 1
                    )))
                }
                _ => blob = Some(d),
            }
        }
        atoms.push(Atom { position, weight });
    }
    AtomicMeasure::new(domain, atoms, blob.unwrap_or(0.0))
}
