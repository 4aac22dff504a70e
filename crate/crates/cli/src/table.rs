//! CSV output with fixed ten-significant-digit numbers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

const SIGNIFICANT: usize = 10;

/// Formats `x` with exactly ten significant digits.
///
/// Fixed notation for exponents in `-5..10`, scientific otherwise.
/// Non-finite values become an empty field.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT - 1, 0.0);
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{mantissa}e{exp}")
    }
}

pub fn opt_sig10(x: Option<f64>) -> String {
    x.map(sig10).unwrap_or_default()
}

/// Index path such as `0-1-0`.
pub fn join_indices(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("-")
}

/// An in-memory CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: &'static str,
    columns: usize,
    body: String,
}

impl Table {
    pub fn new(header: &'static str) -> Self {
        Self {
            header,
            columns: header.split(',').count(),
            body: String::new(),
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width matches the header");
        debug_assert!(fields.iter().all(|f| !f.contains([',', '\n', '"'])));
        let _ = writeln!(self.body, "{}", fields.join(","));
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header, self.body)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.05), "0.05000000000");
        assert_eq!(sig10(-0.6044), "-0.6044000000");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(123456.789), "123456.7890");
        assert_eq!(sig10(1e6), "1000000.000");
        assert_eq!(sig10(0.0), "0.000000000");
        assert_eq!(sig10(2e-7), "2.000000000e-7");
        assert_eq!(sig10(1.5e12), "1.500000000e12");
        assert_eq!(sig10(f64::NAN), "");
    }

    #[test]
    fn rounding_carry_moves_the_exponent() {
        assert_eq!(sig10(9.99999999996), "10.00000000");
        assert_eq!(sig10(0.0000999999999996), "0.0001000000000");
    }

    #[test]
    fn formatted_values_parse_back_closely() {
        for x in [0.7763141, -0.000123456789123, 3.0e-9, 987654321.123] {
            let back: f64 = sig10(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-9 * x.abs());
        }
    }

    #[test]
    fn table_renders_header_then_rows() {
        let mut t = Table::new("a,b");
        t.push(&["1".into(), "".into()]);
        assert_eq!(t.render(), "a,b\n1,\n");
    }
}
