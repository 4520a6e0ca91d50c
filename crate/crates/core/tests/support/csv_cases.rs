//! RFC 4180 parser cases with their expected outcomes, and a seeded random
//! table generator for round trips.

use holoviz_core::ingest::{CsvOptions, ParseError, RawTable};
use rand::rngs::StdRng;
use rand::Rng;

pub fn opts(delimiter: char, has_header: bool) -> CsvOptions {
    CsvOptions {
        delimiter,
        has_header,
    }
}

pub fn table(headers: &[&str], rows: &[&[&str]]) -> RawTable {
    RawTable {
        headers: headers.iter().map(|s| s.to_string()).collect(),
        rows: rows
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect(),
    }
}

pub type Case = (
    &'static str,
    &'static [u8],
    CsvOptions,
    Result<RawTable, ParseError>,
);

pub fn cases() -> Vec<Case> {
    let comma = CsvOptions::default();
    vec![
        (
            "plain",
            b"a,b,c\n1,2,3\n",
            comma,
            Ok(table(&["a", "b", "c"], &[&["1", "2", "3"]])),
        ),
        (
            "quoted delimiter with crlf",
            b"a,b\n\"x,y\",2\r\n",
            comma,
            Ok(table(&["a", "b"], &[&["x,y", "2"]])),
        ),
        (
            "short row",
            b"a,b\n1\n",
            comma,
            Err(ParseError::RaggedRow {
                line: 2,
                expected: 2,
                got: 1,
            }),
        ),
        (
            "long row",
            b"a,b\n1,2\n1,2,3\n",
            comma,
            Err(ParseError::RaggedRow {
                line: 3,
                expected: 2,
                got: 3,
            }),
        ),
        (
            "doubled quotes",
            b"q\n\"say \"\"hi\"\"\"\n",
            comma,
            Ok(table(&["q"], &[&["say \"hi\""]])),
        ),
        (
            "embedded lf",
            b"a,b\n\"line1\nline2\",x\n",
            comma,
            Ok(table(&["a", "b"], &[&["line1\nline2", "x"]])),
        ),
        (
            "embedded crlf kept verbatim",
            b"a\r\n\"one\r\ntwo\"\r\n",
            comma,
            Ok(table(&["a"], &[&["one\r\ntwo"]])),
        ),
        (
            "crlf everywhere",
            b"a,b\r\n1,2\r\n3,4\r\n",
            comma,
            Ok(table(&["a", "b"], &[&["1", "2"], &["3", "4"]])),
        ),
        (
            "no final newline",
            b"a,b\n1,2",
            comma,
            Ok(table(&["a", "b"], &[&["1", "2"]])),
        ),
        (
            "blank line is a record",
            b"a\n1\n\n",
            comma,
            Ok(table(&["a"], &[&["1"], &[""]])),
        ),
        (
            "blank line in a wide table is ragged",
            b"a,b\n1,2\n\n",
            comma,
            Err(ParseError::RaggedRow {
                line: 3,
                expected: 2,
                got: 1,
            }),
        ),
        (
            "empty fields",
            b"a,b,c\n,,\n",
            comma,
            Ok(table(&["a", "b", "c"], &[&["", "", ""]])),
        ),
        (
            "quoted empty field",
            b"a,b\n\"\",x\n",
            comma,
            Ok(table(&["a", "b"], &[&["", "x"]])),
        ),
        (
            "unterminated quote reports opening line",
            b"a,b\n1,2\n\"open,3\n4,5\n",
            comma,
            Err(ParseError::UnbalancedQuote { line: 3 }),
        ),
        (
            "text after closing quote",
            b"a\n\"x\"y\n",
            comma,
            Err(ParseError::UnbalancedQuote { line: 2 }),
        ),
        ("empty input", b"", comma, Err(ParseError::EmptyInput)),
        ("lone newline", b"\n", comma, Err(ParseError::EmptyInput)),
        ("header only", b"a,b\n", comma, Ok(table(&["a", "b"], &[]))),
        (
            "no header row",
            b"1,2\n3,4\n",
            opts(',', false),
            Ok(table(&["col1", "col2"], &[&["1", "2"], &["3", "4"]])),
        ),
        (
            "semicolon delimiter",
            b"a;b\n1,5;2\n",
            opts(';', true),
            Ok(table(&["a", "b"], &[&["1,5", "2"]])),
        ),
        (
            "tab delimiter",
            b"a\tb\n\"x\ty\"\t2\n",
            opts('\t', true),
            Ok(table(&["a", "b"], &[&["x\ty", "2"]])),
        ),
        (
            "invalid utf-8",
            b"a,b\n\xff,1\n",
            comma,
            Err(ParseError::InvalidEncoding { offset: 4 }),
        ),
        (
            "byte order mark skipped",
            b"\xef\xbb\xbfa,b\n1,2\n",
            comma,
            Ok(table(&["a", "b"], &[&["1", "2"]])),
        ),
        (
            "duplicate and blank headers",
            b"x,,x\n1,2,3\n",
            comma,
            Ok(table(&["x", "col2", "x_2"], &[&["1", "2", "3"]])),
        ),
        (
            "whitespace is data",
            b"a,b\n 1 , two \n",
            comma,
            Ok(table(&["a", "b"], &[&[" 1 ", " two "]])),
        ),
        (
            "bare cr terminators",
            b"a,b\r1,2\r",
            comma,
            Ok(table(&["a", "b"], &[&["1", "2"]])),
        ),
        (
            "quote as delimiter",
            b"a\n",
            opts('"', true),
            Err(ParseError::InvalidDelimiter('"')),
        ),
        (
            "multibyte text",
            "名前,値\n\"東京, 日本\",1\n".as_bytes(),
            comma,
            Ok(table(&["名前", "値"], &[&["東京, 日本", "1"]])),
        ),
    ]
}

const CELL_ALPHABET: &[char] = &[
    'a', 'b', 'z', '0', '9', ' ', ',', ';', '"', '\r', '\n', '\t', '.', '-', 'é', '名',
];

fn random_cell(rng: &mut StdRng) -> String {
    let len = rng.random_range(0..8);
    (0..len)
        .map(|_| CELL_ALPHABET[rng.random_range(0..CELL_ALPHABET.len())])
        .collect()
}

/// A table of 1 to 5 distinct named columns and 0 to 7 rows whose cells
/// mix delimiters, quotes and line breaks.
pub fn random_table(rng: &mut StdRng) -> RawTable {
    let cols = rng.random_range(1..6);
    let rows = rng.random_range(0..8);
    let mut headers: Vec<String> = Vec::with_capacity(cols);
    while headers.len() < cols {
        let h = format!(
            "{}{}",
            (b'a' + rng.random_range(0..26u8)) as char,
            random_cell(rng)
        );
        if !headers.contains(&h) {
            headers.push(h);
        }
    }
    let rows = (0..rows)
        .map(|_| (0..cols).map(|_| random_cell(rng)).collect())
        .collect();
    RawTable { headers, rows }
}
