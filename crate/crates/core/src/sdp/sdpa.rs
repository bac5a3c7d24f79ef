use std::fmt::Write as _;
use std::path::Path;

use super::{canonical_entries, BlockKind, Entry, SdpProblem};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const OFFSET_TAG: &str = "objective_offset";

/// SDPA sparse text (`.dat-s`) of a problem. The objective offset, which the
/// format has no field for, goes into a leading `*` comment.
pub fn to_sdpa_string<T: Scalar>(sdp: &SdpProblem<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "* {OFFSET_TAG} {:e}", sdp.offset);
    let _ = writeln!(s, "{}", sdp.c.len());
    let _ = writeln!(s, "{}", sdp.blocks.len());
    let sizes: Vec<String> = sdp
        .blocks
        .iter()
        .map(|b| match *b {
            BlockKind::Dense(n) => n.to_string(),
            BlockKind::Diagonal(n) => format!("-{n}"),
        })
        .collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let c: Vec<String> = sdp.c.iter().map(|v| format!("{v:e}")).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    let mats = std::iter::once(&sdp.constant).chain(&sdp.matrices);
    for (k, m) in mats.enumerate() {
        for e in canonical_entries(m.clone()) {
            let _ = writeln!(
                s,
                "{} {} {} {} {:e}",
                k,
                e.block + 1,
                e.row + 1,
                e.col + 1,
                e.value
            );
        }
    }
    s
}

pub fn write_sdpa<T: Scalar>(sdp: &SdpProblem<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_sdpa_string(sdp))?;
    Ok(())
}

pub fn read_sdpa<T: Scalar>(path: impl AsRef<Path>) -> Result<SdpProblem<T>> {
    parse_sdpa(&std::fs::read_to_string(path)?)
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Sdpa {
        line,
        msg: msg.into(),
    }
}

/// Parses SDPA sparse text. Lines starting with `"` or `*` are comments;
/// `{`, `}`, `(`, `)` and `,` act as separators in the header.
pub fn parse_sdpa<T: Scalar>(text: &str) -> Result<SdpProblem<T>> {
    let mut offset = T::zero();
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let t = line.trim_start();
        if let Some(rest) = t.strip_prefix('*') {
            let mut w = rest.split_whitespace();
            if w.next() == Some(OFFSET_TAG) {
                let v = w.next().ok_or_else(|| err(lineno, "missing offset value"))?;
                offset = T::of(v.parse::<f64>().map_err(|e| err(lineno, e.to_string()))?);
            }
            continue;
        }
        if t.starts_with('"') {
            continue;
        }
        tokens.extend(
            t.split(|c: char| c.is_whitespace() || "{}(),".contains(c))
                .filter(|w| !w.is_empty())
                .map(|w| (lineno, w)),
        );
    }
    let last_line = text.lines().count();
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| err(last_line, format!("missing {what}")));

    let int = |(line, w): (usize, &str)| -> Result<i64> {
        w.parse::<i64>()
            .or_else(|_| match w.parse::<f64>() {
                Ok(v) if v.fract() == 0.0 => Ok(v as i64),
                _ => Err(()),
            })
            .map_err(|_| err(line, format!("expected an integer, found `{w}`")))
    };
    let real = |(line, w): (usize, &str)| -> Result<T> {
        w.parse::<f64>()
            .map(T::of)
            .map_err(|_| err(line, format!("expected a number, found `{w}`")))
    };

    let tok = next("constraint count")?;
    let m = usize::try_from(int(tok)?).map_err(|_| err(tok.0, "negative constraint count"))?;
    let tok = next("block count")?;
    let nblocks = usize::try_from(int(tok)?).map_err(|_| err(tok.0, "negative block count"))?;
    let mut blocks = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let tok = next("block size")?;
        let s = int(tok)?;
        blocks.push(match s {
            0 => return Err(err(tok.0, "zero block size")),
            s if s > 0 => BlockKind::Dense(s as usize),
            s => BlockKind::Diagonal(s.unsigned_abs() as usize),
        });
    }
    let mut c = Vec::with_capacity(m);
    for _ in 0..m {
        c.push(real(next("objective coefficient")?)?);
    }
    let mut constant = Vec::new();
    let mut matrices = vec![Vec::new(); m];
    while let Some(first) = it.next() {
        let line = first.0;
        let mut field = |what: &str| it.next().ok_or_else(|| err(line, format!("truncated entry: missing {what}")));
        let (bt, it_, jt, vt) = (field("block")?, field("row")?, field("column")?, field("value")?);
        let mat = int(first)?;
        let (block, i, j) = (int(bt)?, int(it_)?, int(jt)?);
        let value = real(vt)?;
        if mat < 0 || mat as usize > m {
            return Err(err(line, format!("matrix number {mat} out of range")));
        }
        if block < 1 || block as usize > nblocks {
            return Err(err(line, format!("block number {block} out of range")));
        }
        let kind = blocks[block as usize - 1];
        let (mut i, mut j) = (i, j);
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        if i < 1 || j as usize > kind.size() {
            return Err(err(line, format!("entry ({i}, {j}) outside block {block}")));
        }
        if matches!(kind, BlockKind::Diagonal(_)) && i != j {
            return Err(err(line, "off-diagonal entry in a diagonal block"));
        }
        let e = Entry {
            block: block as usize - 1,
            row: i as usize - 1,
            col: j as usize - 1,
            value,
        };
        if mat == 0 {
            constant.push(e);
        } else {
            matrices[mat as usize - 1].push(e);
        }
    }
    let mut sdp = SdpProblem {
        blocks,
        c,
        constant,
        matrices,
        offset,
    };
    sdp.canonicalize();
    Ok(sdp)
}
