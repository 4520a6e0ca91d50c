//! RFC 4180 reader and writer.
//!
//! Parsing works on bytes after a full UTF-8 check. The delimiter, the quote
//! and both line terminators are ASCII, so every split point is also a char
//! boundary and fields can be sliced straight out of the input.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const QUOTE: u8 = b'"';
const BOM: &str = "\u{feff}";

/// Parsed CSV text: a header row plus rectangular records of raw cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column_count(&self) -> usize {
        self.headers.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Iterate over the cells of one column, top to bottom.
    pub fn column(&self, index: usize) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |row| row[index].as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ParseError {
    #[error("line {line}: unbalanced quote")]
    UnbalancedQuote { line: usize },
    #[error("line {line}: expected {expected} fields, got {got}")]
    RaggedRow {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("input contains no records")]
    EmptyInput,
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidEncoding { offset: usize },
    #[error("delimiter {0:?} must be a single ASCII character other than a quote or line break")]
    InvalidDelimiter(char),
}

impl ParseError {
    /// The 1-based input line the error points at, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::UnbalancedQuote { line } | ParseError::RaggedRow { line, .. } => {
                Some(*line)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    pub delimiter: char,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            has_header: true,
        }
    }
}

fn delimiter_byte(delimiter: char) -> Result<u8, ParseError> {
    match delimiter {
        '"' | '\r' | '\n' => Err(ParseError::InvalidDelimiter(delimiter)),
        c if c.is_ascii() => Ok(c as u8),
        c => Err(ParseError::InvalidDelimiter(c)),
    }
}

/// Parse CSV bytes into a [`RawTable`].
///
/// Quoted fields may hold delimiters, doubled quotes and line breaks. CRLF,
/// LF and bare CR all terminate records, and a single terminator at the end
/// of input does not start a new record. A leading byte-order mark is
/// skipped. Without a header row the columns are named `col1..colN`.
pub fn parse_csv(bytes: &[u8], options: &CsvOptions) -> Result<RawTable, ParseError> {
    let delim = delimiter_byte(options.delimiter)?;
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::InvalidEncoding {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix(BOM).unwrap_or(text);
    if matches!(text, "" | "\n" | "\r\n" | "\r") {
        return Err(ParseError::EmptyInput);
    }

    let mut records = Records::new(text, delim);
    let (_, first) = records.next().expect("non-empty input has a record")?;
    let expected = first.len();

    let (headers, mut rows) = if options.has_header {
        (normalize_headers(first), Vec::new())
    } else {
        let headers = (1..=expected).map(|i| format!("col{i}")).collect();
        (headers, vec![first])
    };

    for record in records {
        let (line, fields) = record?;
        if fields.len() != expected {
            return Err(ParseError::RaggedRow {
                line,
                expected,
                got: fields.len(),
            });
        }
        rows.push(fields);
    }

    Ok(RawTable { headers, rows })
}

/// Empty names become `colK`, repeats get `_2`, `_3`, ... suffixes.
fn normalize_headers(raw: Vec<String>) -> Vec<String> {
    let mut seen: HashSet<String> = HashSet::with_capacity(raw.len());
    let mut out = Vec::with_capacity(raw.len());
    for (i, name) in raw.into_iter().enumerate() {
        let base = if name.is_empty() {
            format!("col{}", i + 1)
        } else {
            name
        };
        let mut candidate = base.clone();
        let mut k = 2;
        while seen.contains(&candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        seen.insert(candidate.clone());
        out.push(candidate);
    }
    out
}

struct Records<'a> {
    text: &'a str,
    bytes: &'a [u8],
    delim: u8,
    pos: usize,
    line: usize,
    done: bool,
}

impl<'a> Records<'a> {
    fn new(text: &'a str, delim: u8) -> Self {
        Self {
            text,
            bytes: text.as_bytes(),
            delim,
            pos: 0,
            line: 1,
            done: false,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn at_field_end(&self) -> bool {
        matches!(self.peek(), None | Some(b'\n' | b'\r')) || self.peek() == Some(self.delim)
    }

    fn quoted_field(&mut self) -> Result<String, ParseError> {
        let open_line = self.line;
        self.pos += 1;
        let mut field = String::new();
        let mut start = self.pos;
        loop {
            let Some(c) = self.peek() else {
                return Err(ParseError::UnbalancedQuote { line: open_line });
            };
            match c {
                QUOTE => {
                    field.push_str(&self.text[start..self.pos]);
                    if self.bytes.get(self.pos + 1) == Some(&QUOTE) {
                        field.push('"');
                        self.pos += 2;
                        start = self.pos;
                    } else {
                        self.pos += 1;
                        break;
                    }
                }
                b'\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                b'\r' => {
                    if self.bytes.get(self.pos + 1) != Some(&b'\n') {
                        self.line += 1;
                    }
                    self.pos += 1;
                }
                _ => self.pos += 1,
            }
        }
        if !self.at_field_end() {
            // Text between a closing quote and the next delimiter.
            return Err(ParseError::UnbalancedQuote { line: self.line });
        }
        Ok(field)
    }

    fn bare_field(&mut self) -> String {
        let start = self.pos;
        while !self.at_field_end() {
            self.pos += 1;
        }
        self.text[start..self.pos].to_owned()
    }

    fn record(&mut self) -> Result<Vec<String>, ParseError> {
        let mut fields = Vec::new();
        loop {
            let field = if self.peek() == Some(QUOTE) {
                self.quoted_field()?
            } else {
                self.bare_field()
            };
            fields.push(field);
            if self.peek() == Some(self.delim) {
                self.pos += 1;
            } else {
                return Ok(fields);
            }
        }
    }

    fn consume_terminator(&mut self) {
        match self.peek() {
            Some(b'\r') => {
                self.pos += 1;
                if self.peek() == Some(b'\n') {
                    self.pos += 1;
                }
            }
            Some(b'\n') => self.pos += 1,
            _ => return,
        }
        self.line += 1;
    }
}

impl Iterator for Records<'_> {
    type Item = Result<(usize, Vec<String>), ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let line = self.line;
        let result = self.record();
        match result {
            Ok(fields) => {
                self.consume_terminator();
                if self.pos >= self.bytes.len() {
                    self.done = true;
                }
                Some(Ok((line, fields)))
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

fn needs_quoting(field: &str, delim: char, lone_field: bool) -> bool {
    (lone_field && field.is_empty())
        || field.starts_with(BOM)
        || field
            .chars()
            .any(|c| c == delim || c == '"' || c == '\r' || c == '\n')
}

fn write_record(out: &mut String, fields: &[String], delim: char) {
    let lone = fields.len() == 1;
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(delim);
        }
        if needs_quoting(field, delim, lone) {
            out.push('"');
            out.push_str(&field.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(field);
        }
    }
    out.push('\n');
}

/// Render a table as CSV with a header row, quoting only where needed.
/// Parsing the output with the same delimiter yields the same table.
pub fn write_csv(table: &RawTable, delimiter: char) -> String {
    let mut out = String::new();
    write_record(&mut out, &table.headers, delimiter);
    for row in &table.rows {
        write_record(&mut out, row, delimiter);
    }
    out
}
