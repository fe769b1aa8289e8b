//! Published reference values for the comparison tables.
//!
//! The values are data, never model output. They are kept in a versioned
//! fixture file and only surface in `paper_printed_*` columns.

use std::str::FromStr;

use crate::error::CliError;

pub const FIXTURE_VERSION: &str = "v1";
const FIXTURE: &str = include_str!("../fixtures/printed_tables.v1.csv");

/// Which comparison table a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Table {
    /// Detection probability, fixed pair (12, 18).
    Detection = 2,
    /// False-alarm probability, fixed pair (12, 18).
    FalseAlarm = 3,
    /// Miss probability, fixed pair (12, 18).
    Miss = 4,
    /// Collision probability, varying pairs, E_K = 14.5.
    Collision = 5,
}

impl Table {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Table {
    type Error = CliError;

    fn try_from(n: u8) -> Result<Self, CliError> {
        match n {
            2 => Ok(Table::Detection),
            3 => Ok(Table::FalseAlarm),
            4 => Ok(Table::Miss),
            5 => Ok(Table::Collision),
            other => Err(CliError::Usage(format!(
                "no table {other}; expected 2, 3, 4 or 5"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedRow {
    pub table: Table,
    pub e_k: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    /// Threshold as printed (two decimals, truncated).
    pub lambda_opt: f64,
    pub value_opt: f64,
    pub value_double: f64,
    /// Only present for the collision table.
    pub pf: Option<f64>,
    /// The printed difference column.
    pub difference: f64,
}

impl PrintedRow {
    /// `value_opt − value_double` at the printed 4-decimal precision.
    pub fn recomputed_difference(&self) -> f64 {
        round4(self.value_opt - self.value_double)
    }
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn field<T: FromStr>(raw: &str, name: &str, line: usize) -> T {
    raw.trim()
        .parse()
        .unwrap_or_else(|_| panic!("fixture line {line}: bad {name} '{raw}'"))
}

/// All rows of the fixture, in file order.
pub fn printed_rows() -> Vec<PrintedRow> {
    FIXTURE
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 9, "fixture line {}: expected 9 fields", i + 1);
            let table: u8 = field(f[0], "table", i + 1);
            PrintedRow {
                table: Table::try_from(table).expect("fixture table number"),
                e_k: field(f[1], "e_k", i + 1),
                lambda_low: field(f[2], "lambda_low", i + 1),
                lambda_high: field(f[3], "lambda_high", i + 1),
                lambda_opt: field(f[4], "lambda_opt", i + 1),
                value_opt: field(f[5], "value_opt", i + 1),
                value_double: field(f[6], "value_double", i + 1),
                pf: (!f[7].trim().is_empty()).then(|| field(f[7], "pf", i + 1)),
                difference: field(f[8], "difference", i + 1),
            }
        })
        .collect()
}

pub fn rows_for(table: Table) -> Vec<PrintedRow> {
    printed_rows()
        .into_iter()
        .filter(|r| r.table == table)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let rows = printed_rows();
        assert_eq!(rows.len(), 32);
        for t in [
            Table::Detection,
            Table::FalseAlarm,
            Table::Miss,
            Table::Collision,
        ] {
            assert_eq!(rows_for(t).len(), 8);
        }
        assert!(rows_for(Table::Collision)
            .iter()
            .all(|r| r.pf.is_some() && r.e_k == 14.5));
        assert!(rows_for(Table::Detection).iter().all(|r| r.pf.is_none()));
    }

    #[test]
    fn recomputed_difference_rounds_to_print_precision() {
        let first = rows_for(Table::Detection)[0];
        assert_eq!(first.recomputed_difference(), 0.2245);
    }

    #[test]
    fn table_numbers() {
        assert_eq!(Table::try_from(5).unwrap().number(), 5);
        assert!(Table::try_from(1).is_err());
    }
}
