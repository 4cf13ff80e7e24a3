//! Matrix file formats.
//!
//! * `alist`: the usual sparse interchange format (column count, row count,
//!   max weights, weight lists, then 1-based nonzero positions per column and
//!   per row; zero entries are padding).
//! * `hex`: a `rows cols` header line followed by one hex string per matrix
//!   row, most significant bit of the first digit = column 1.
//!
//! Lines starting with `#` are comments in the hex format.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::{BitWord, Gf2Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Alist,
    Hex,
}

impl MatrixFormat {
    /// Guess from a file extension: `.alist` is alist, anything else hex.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("alist") => MatrixFormat::Alist,
            _ => MatrixFormat::Hex,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alist" => Ok(MatrixFormat::Alist),
            "hex" => Ok(MatrixFormat::Hex),
            other => Err(Error::InvalidArgument(format!("unknown matrix format {other:?}"))),
        }
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<Gf2Matrix> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text, format)
}

pub fn save_matrix(path: &Path, m: &Gf2Matrix, format: MatrixFormat) -> Result<()> {
    fs::write(path, format_matrix(m, format)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<Gf2Matrix> {
    match format {
        MatrixFormat::Alist => parse_alist(text),
        MatrixFormat::Hex => parse_hex(text),
    }
}

pub fn format_matrix(m: &Gf2Matrix, format: MatrixFormat) -> String {
    match format {
        MatrixFormat::Alist => write_alist(m),
        MatrixFormat::Hex => write_hex(m),
    }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

struct Tokens<'a> {
    lines: Vec<(usize, Vec<Token<'a>>)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut last_line = 0;
        for (i, line) in text.lines().enumerate() {
            last_line = i + 1;
            let mut toks = Vec::new();
            let mut col = 0;
            for piece in line.split(|c: char| c.is_ascii_whitespace()) {
                if !piece.is_empty() {
                    toks.push(Token {
                        text: piece,
                        line: i + 1,
                        column: col + 1,
                    });
                }
                col += piece.len() + 1;
            }
            if !toks.is_empty() {
                lines.push((i + 1, toks));
            }
        }
        Tokens {
            lines,
            pos: 0,
            last_line,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<&[Token<'a>]> {
        let Some((_, toks)) = self.lines.get(self.pos) else {
            return Err(Error::parse(
                self.last_line + 1,
                1,
                format!("unexpected end of file, expected {what}"),
            ));
        };
        self.pos += 1;
        Ok(toks)
    }
}

fn number(tok: &Token<'_>) -> Result<usize> {
    tok.text
        .parse()
        .map_err(|_| Error::parse(tok.line, tok.column, format!("expected integer, found {:?}", tok.text)))
}

fn numbers(toks: &[Token<'_>], count: usize, what: &str) -> Result<Vec<usize>> {
    if toks.len() < count {
        let (line, col) = toks
            .last()
            .map_or((0, 1), |t| (t.line, t.column + t.text.len()));
        return Err(Error::parse(
            line,
            col,
            format!("expected {count} values for {what}, found {}", toks.len()),
        ));
    }
    toks[..count].iter().map(number).collect()
}

fn parse_alist(text: &str) -> Result<Gf2Matrix> {
    let mut t = Tokens::new(text);
    let head = t.next_line("dimensions")?;
    let dims = numbers(head, 2, "dimensions")?;
    let (cols, rows) = (dims[0], dims[1]);
    let w = t.next_line("maximum weights")?;
    numbers(w, 2, "maximum weights")?;
    let col_w = numbers(t.next_line("column weights")?, cols, "column weights")?;
    let row_w = numbers(t.next_line("row weights")?, rows, "row weights")?;

    let mut m = Gf2Matrix::zeros(rows, cols);
    for (c, &weight) in col_w.iter().enumerate() {
        let toks = t.next_line("column entries")?;
        let mut seen = 0;
        for tok in toks {
            let r = number(tok)?;
            if r == 0 {
                continue;
            }
            if r > rows {
                return Err(Error::parse(tok.line, tok.column, format!("row index {r} exceeds {rows}")));
            }
            m.set(r - 1, c, true);
            seen += 1;
        }
        if seen != weight {
            let tok = toks[0];
            return Err(Error::parse(
                tok.line,
                tok.column,
                format!("column {} lists {seen} entries, weight says {weight}", c + 1),
            ));
        }
    }
    // row lists are redundant; check them against the columns
    for (r, &weight) in row_w.iter().enumerate() {
        let toks = t.next_line("row entries")?;
        let mut seen = 0;
        for tok in toks {
            let c = number(tok)?;
            if c == 0 {
                continue;
            }
            if c > cols || !m.get(r, c - 1) {
                return Err(Error::parse(
                    tok.line,
                    tok.column,
                    format!("row {} entry {c} disagrees with column lists", r + 1),
                ));
            }
            seen += 1;
        }
        if seen != weight || m.row(r).weight() != weight {
            let tok = toks[0];
            return Err(Error::parse(
                tok.line,
                tok.column,
                format!("row {} weight mismatch", r + 1),
            ));
        }
    }
    Ok(m)
}

fn write_alist(m: &Gf2Matrix) -> String {
    let (rows, cols) = (m.rows(), m.cols());
    let col_lists: Vec<Vec<usize>> = (0..cols)
        .map(|c| (0..rows).filter(|&r| m.get(r, c)).map(|r| r + 1).collect())
        .collect();
    let row_lists: Vec<Vec<usize>> = m.row_iter().map(|r| r.ones().map(|c| c + 1).collect()).collect();
    let max_c = col_lists.iter().map(Vec::len).max().unwrap_or(0);
    let max_r = row_lists.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let padded = |v: &[usize], width: usize| {
        let mut v = v.to_vec();
        v.resize(width.max(1), 0);
        join(&v)
    };
    let mut out = format!("{cols} {rows}\n{max_c} {max_r}\n");
    out += &join(&col_lists.iter().map(Vec::len).collect::<Vec<_>>());
    out += "\n";
    out += &join(&row_lists.iter().map(Vec::len).collect::<Vec<_>>());
    out += "\n";
    for l in &col_lists {
        out += &padded(l, max_c);
        out += "\n";
    }
    for l in &row_lists {
        out += &padded(l, max_r);
        out += "\n";
    }
    out
}

fn parse_hex(text: &str) -> Result<Gf2Matrix> {
    let filtered: String = text
        .lines()
        .map(|l| if l.trim_start().starts_with('#') { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let mut t = Tokens::new(&filtered);
    let dims = numbers(t.next_line("dimensions")?, 2, "dimensions")?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let toks = t.next_line("matrix row")?;
        let tok = toks[0];
        let row = BitWord::from_hex(tok.text, cols)
            .map_err(|e| Error::parse(tok.line, tok.column, e.to_string()))?;
        out.push(row);
    }
    if let Ok(extra) = t.next_line("") {
        let tok = extra[0];
        return Err(Error::parse(tok.line, tok.column, "trailing data after last row"));
    }
    if out.is_empty() {
        return Ok(Gf2Matrix::zeros(0, cols));
    }
    Gf2Matrix::from_rows(out)
}

fn write_hex(m: &Gf2Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in m.row_iter() {
        out += &r.to_hex();
        out += "\n";
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HAMMING_ALIST: &str = "7 3
3 4
1 1 2 1 2 2 3
4 4 4
1 0 0
2 0 0
1 2 0
3 0 0
1 3 0
2 3 0
1 2 3
1 3 5 7
2 3 6 7
4 5 6 7
";

    fn hamming_h() -> Gf2Matrix {
        Gf2Matrix::from_str_rows(&["1010101", "0110011", "0001111"]).unwrap()
    }

    #[test]
    fn alist_hamming_fixture() {
        let m = parse_matrix(HAMMING_ALIST, MatrixFormat::Alist).unwrap();
        assert_eq!(m, hamming_h());
        assert_eq!(write_alist(&m), HAMMING_ALIST);
    }

    #[test]
    fn alist_without_padding() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n";
        let m = parse_matrix(text, MatrixFormat::Alist).unwrap();
        assert_eq!(m, Gf2Matrix::from_str_rows(&["110", "011"]).unwrap());
    }

    #[test]
    fn truncated_alist_is_an_error() {
        let cut: String = HAMMING_ALIST.lines().take(8).collect::<Vec<_>>().join("\n");
        match parse_matrix(&cut, MatrixFormat::Alist) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad = HAMMING_ALIST.replacen("1 3 0", "1 x 0", 1);
        match parse_matrix(&bad, MatrixFormat::Alist) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (9, 3)),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_matrix("", MatrixFormat::Alist).is_err());
    }

    #[test]
    fn inconsistent_alist_rows() {
        let bad = HAMMING_ALIST.replacen("4 5 6 7", "4 5 6 1", 1);
        match parse_matrix(&bad, MatrixFormat::Alist) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (14, 7)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn hex_format() {
        let text = "# hamming\n3 7\nAA\n66\n1E\n";
        assert_eq!(parse_matrix(text, MatrixFormat::Hex).unwrap(), hamming_h());
        assert_eq!(write_hex(&hamming_h()), "3 7\nAA\n66\n1E\n");
        assert!(parse_matrix("3 7\nAA\n66\n", MatrixFormat::Hex).is_err());
        assert!(matches!(
            parse_matrix("2 7\nAA\nZZ\n", MatrixFormat::Hex),
            Err(Error::Parse { line: 3, column: 1, .. })
        ));
        assert!(parse_matrix("1 7\nAB\n", MatrixFormat::Hex).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("orbgrand-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        for fmt in [MatrixFormat::Alist, MatrixFormat::Hex] {
            let p = dir.join(format!("h.{fmt:?}"));
            save_matrix(&p, &hamming_h(), fmt).unwrap();
            assert_eq!(load_matrix(&p, fmt).unwrap(), hamming_h());
        }
        assert!(matches!(
            load_matrix(&dir.join("missing"), MatrixFormat::Hex),
            Err(Error::Io { .. })
        ));
        fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #[test]
        fn round_trip(rows in 1usize..12, cols in 1usize..70, seed in any::<u64>()) {
            let mut m = Gf2Matrix::zeros(rows, cols);
            let mut s = seed | 1;
            for r in 0..rows {
                for c in 0..cols {
                    s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                    m.set(r, c, s & 3 == 0);
                }
            }
            for fmt in [MatrixFormat::Alist, MatrixFormat::Hex] {
                prop_assert_eq!(&parse_matrix(&format_matrix(&m, fmt), fmt).unwrap(), &m);
            }
        }
    }
}
