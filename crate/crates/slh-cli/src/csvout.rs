//! CSV emission. Numbers use Rust's shortest round-trip decimal `Display`
//! with negative zero normalized, so identical inputs always produce
//! byte-identical files.

pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x}")
}

pub struct Csv {
    buffer: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut buffer = header.join(",");
        buffer.push('\n');
        Csv {
            buffer,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "CSV row width mismatch");
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                self.buffer.push(',');
            }
            self.buffer.push_str(&format_number(*v));
        }
        self.buffer.push('\n');
    }

    pub fn finish(self) -> String {
        self.buffer
    }
}
