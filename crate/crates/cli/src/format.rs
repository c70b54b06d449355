// SPDX-License-Identifier: Apache-2.0

//! CSV text in C `%.12e` style.

use std::fmt::Write;

/// `printf("%.12e", x)`: 12 fractional digits, signed exponent with at
/// least two digits; `nan`, `inf`, `-inf` for the specials.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Accumulates one CSV document.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let names: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        Csv {
            text: format!("{}\n", names.join(",")),
            width: names.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{}", sci(*v));
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
