//! Hand-rolled CSV and JSON writers. Every float is rendered as
//! `{:.16e}`: 17 significant digits, enough to round-trip an f64 bit for
//! bit, which is what makes re-runs byte-comparable.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

pub enum Cell<'a> {
    F(f64),
    I(i64),
    S(&'a str),
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::with_capacity(1 << 16);
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match c {
                Cell::F(x) => {
                    let _ = write!(self.buf, "{x:.16e}");
                }
                Cell::I(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                Cell::S(s) => self.buf.push_str(s),
            }
        }
        self.buf.push('\n');
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.buf.as_bytes())
    }
}

/// Ordered JSON document. Objects keep insertion order and numbers use
/// the same fixed 17-digit rendering as the CSV side.
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn complex(re: f64, im: f64) -> Json {
        Json::Arr(vec![Json::Num(re), Json::Num(im)])
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(1 << 12);
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render().as_bytes())
    }

    fn write(&self, out: &mut String, depth: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            // NaN and infinities have no JSON representation
            Json::Num(x) if !x.is_finite() => out.push_str("null"),
            Json::Num(x) => {
                let _ = write!(out, "{x:.16e}");
            }
            Json::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                // short numeric arrays (complex pairs) stay on one line
                let inline = items.len() <= 2
                    && items.iter().all(|i| matches!(i, Json::Num(_) | Json::Int(_)));
                if inline {
                    out.push('[');
                    for (i, item) in items.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        item.write(out, depth + 1);
                    }
                    out.push(']');
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    indent(out, depth + 1);
                    item.write(out, depth + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                indent(out, depth);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (key, value)) in fields.iter().enumerate() {
                    indent(out, depth + 1);
                    let _ = write!(out, "\"{key}\": ");
                    value.write(out, depth + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                indent(out, depth);
                out.push('}');
            }
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_roundtrip_bit_for_bit() {
        let mut csv = Csv::new("a,b,c");
        csv.row(&[Cell::F(0.1), Cell::I(-7), Cell::S("x")]);
        let line = csv.buf.lines().nth(1).unwrap();
        assert_eq!(line, "1.0000000000000001e-1,-7,x");
        let back: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert_eq!(back.to_bits(), (0.1f64).to_bits());
    }

    #[test]
    fn json_keys_keep_insertion_order() {
        let doc = Json::Obj(vec![
            ("zeta", Json::Int(1)),
            ("alpha", Json::Bool(false)),
            ("mid", Json::Null),
        ]);
        let text = doc.render();
        let z = text.find("zeta").unwrap();
        let a = text.find("alpha").unwrap();
        let m = text.find("mid").unwrap();
        assert!(z < a && a < m, "{text}");
    }

    #[test]
    fn json_complex_pairs_stay_inline() {
        let text = Json::complex(1.0, -2.0).render();
        assert_eq!(text, "[1.0000000000000000e0, -2.0000000000000000e0]\n");
    }

    #[test]
    fn json_nonfinite_becomes_null() {
        assert_eq!(Json::Num(f64::NAN).render(), "null\n");
        assert_eq!(Json::Num(f64::INFINITY).render(), "null\n");
    }

    #[test]
    fn json_strings_are_escaped() {
        let text = Json::Str("a\"b\\c\nd".into()).render();
        assert_eq!(text, "\"a\\\"b\\\\c\\nd\"\n");
    }
}
