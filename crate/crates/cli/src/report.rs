//! JSON numbers tagged with their standard error, and flat CSV tables.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use lie_homog::stats::Estimate;

/// Non-finite floats become strings so the document stays valid JSON.
fn float(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn exact(v: f64) -> Value {
    json!({ "value": float(v), "se": "exact" })
}

pub fn count(v: usize) -> Value {
    json!({ "value": v, "se": "exact" })
}

pub fn mc(v: f64, se: f64) -> Value {
    json!({ "value": float(v), "se": float(se) })
}

pub fn estimate(e: Estimate) -> Value {
    match e.se {
        Some(se) => mc(e.value, se),
        None => exact(e.value),
    }
}

pub fn exact_list(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| exact(x)).collect())
}

/// JSON object builder. serde_json maps are sorted by key, which keeps
/// reports byte-stable.
#[derive(Default)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Obj {
        Obj(Map::new())
    }

    pub fn put(mut self, k: &str, v: impl Into<Value>) -> Obj {
        self.0.insert(k.to_string(), v.into());
        self
    }

    pub fn done(self) -> Value {
        Value::Object(self.0)
    }
}

/// CSV table; floats are written with 17 significant digits.
pub struct Csv {
    pub name: String,
    text: String,
}

pub enum Cell<'a> {
    F(f64),
    U(usize),
    S(&'a str),
}

impl Csv {
    pub fn new(name: &str, header: &[&str]) -> Csv {
        let mut text = header.join(",");
        text.push('\n');
        Csv {
            name: name.to_string(),
            text,
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => write!(self.text, "{x:.16e}").unwrap(),
                Cell::U(u) => write!(self.text, "{u}").unwrap(),
                Cell::S(s) => {
                    if s.contains([',', '"', '\n']) {
                        write!(self.text, "\"{}\"", s.replace('"', "\"\"")).unwrap()
                    } else {
                        self.text.push_str(s)
                    }
                }
            }
        }
        self.text.push('\n');
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags() {
        assert_eq!(exact(0.5), json!({"value": 0.5, "se": "exact"}));
        assert_eq!(mc(1.0, 0.1), json!({"value": 1.0, "se": 0.1}));
        assert_eq!(exact(f64::INFINITY)["value"], json!("inf"));
    }

    #[test]
    fn csv_digits_and_quoting() {
        let mut c = Csv::new("t", &["a", "b"]);
        c.row(&[Cell::F(0.1), Cell::S("x0*x1,y")]);
        let line = c.text().lines().nth(1).unwrap();
        assert_eq!(line, "1.0000000000000001e-1,\"x0*x1,y\"");
    }
}
