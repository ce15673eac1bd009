//! Deterministic CSV assembly: 17 significant digits, `\n` endings, comma
//! separator, `#` footer lines. Two runs of the same command must produce
//! byte-identical files.

/// Fixed float format: 17 significant digits in scientific notation.
/// Negative zero is normalized so equal values always print equally.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn float_row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
        self.row(&cells);
    }

    pub fn footer(&mut self, key: &str, value: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(key);
        self.buf.push_str(" = ");
        self.buf.push_str(value);
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
