//! word2vec text format.
//!
//! The first line holds `<vocab_size> <dimension>`. Each following line
//! holds a word and its components, separated by single spaces:
//!
//! ```text
//! 2 2
//! a 1 0
//! b 0 1
//! ```
//!
//! Components are written with six decimal places and trailing zeros
//! removed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{EmbeddingError, EmbeddingTable};
use crate::numfmt::push_decimal;

pub fn write_text<W: Write>(table: &EmbeddingTable, mut w: W) -> Result<(), EmbeddingError> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    let mut line = String::new();
    for (word, row) in table.words().iter().zip(table.rows()) {
        line.clear();
        line.push_str(word);
        for &x in row {
            line.push(' ');
            push_decimal(&mut line, x);
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<EmbeddingTable, EmbeddingError> {
    let parse_err = |line: usize, message: String| EmbeddingError::Parse { line, message };
    let mut lines = r.lines();

    let header = match lines.next() {
        Some(l) => l?,
        None => return Err(parse_err(1, "missing header (end of file)".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, dim) = match fields[..] {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) => (n, d),
            _ => return Err(parse_err(1, format!("malformed header {header:?}"))),
        },
        _ => return Err(parse_err(1, format!("malformed header {header:?}"))),
    };

    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if words.len() == n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(parse_err(lineno, format!("more than the {n} rows declared in the header")));
        }
        let mut parts = line.split(' ').filter(|p| !p.is_empty());
        let word = parts
            .next()
            .ok_or_else(|| parse_err(lineno, "empty line".into()))?;
        let before = data.len();
        for p in parts {
            let x: f64 = p
                .parse()
                .map_err(|_| parse_err(lineno, format!("non-numeric field {p:?}")))?;
            if !x.is_finite() {
                return Err(parse_err(lineno, format!("non-finite field {p:?}")));
            }
            data.push(x);
        }
        let found = data.len() - before;
        if found != dim {
            return Err(parse_err(
                lineno,
                format!("expected {dim} components for {word:?}, found {found}"),
            ));
        }
        words.push(word.to_owned());
    }
    if words.len() != n {
        return Err(parse_err(
            words.len() + 2,
            format!("end of file after {} rows, header declares {n}", words.len()),
        ));
    }
    EmbeddingTable::new(words, dim, data)
}

pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let f = File::create(path)?;
    write_text(table, BufWriter::new(f))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    read_text(BufReader::new(File::open(path)?))
}
