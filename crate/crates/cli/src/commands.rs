//! Command implementations. Each builder returns the exact bytes of its
//! output so tests can compare them without touching the filesystem.

use std::fmt::Write as _;

use crn_sense::analytic::{pd_marcum, pf_gamma};
use crn_sense::detector::bisection_optimum_threshold;
use crn_sense::montecarlo::{
    collision_sweep, report_from_energies, roc_from_energies, simulate_energies,
};
use crn_sense::{
    BisectionConfig, Form, GenerativeModel, Hypothesis, RateEstimate, Resolver, SensingParams,
    ThresholdPair, TrialConfig,
};

use crate::args::Grid;
use crate::error::CliError;
use crate::fixtures::{rows_for, Table};

pub const ROC_HEADER: &str = "lambda,pf_analytic,pd_analytic,pf_emp,pd_emp,pf_ci,pd_ci";

/// Energies of the published collision table.
pub const TABLE5_ENERGY: f64 = 14.5;

pub const TABLE5_PAIRS: [(f64, f64); 8] = [
    (8.0, 20.0),
    (7.0, 22.0),
    (2.0, 18.0),
    (11.0, 26.0),
    (12.0, 34.0),
    (5.0, 21.0),
    (2.0, 19.0),
    (10.0, 21.0),
];

/// Analytic form that describes the energy law of a generative model.
pub fn form_for(model: GenerativeModel) -> Form {
    match model {
        GenerativeModel::Sample => Form::Gaussian,
        GenerativeModel::ChiSquare => Form::GammaMarcum,
    }
}

pub fn default_grid(model: GenerativeModel) -> Grid {
    match model {
        GenerativeModel::Sample => Grid {
            lo: 0.9,
            hi: 1.2,
            n: 31,
        },
        GenerativeModel::ChiSquare => Grid {
            lo: 0.0,
            hi: 40.0,
            n: 41,
        },
    }
}

pub fn default_fuzzy_width(model: GenerativeModel) -> f64 {
    match model {
        GenerativeModel::Sample => 0.05,
        GenerativeModel::ChiSquare => 6.0,
    }
}

fn line<I, S>(out: &mut String, fields: I)
where
    I: IntoIterator<Item = S>,
    S: std::fmt::Display,
{
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{f}");
    }
    out.push('\n');
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn table_header(table: Table) -> &'static str {
    match table {
        Table::Detection => {
            "e_k,lambda_low,lambda_high,lambda_opt,pd_opt,pd_double,improvement,\
             paper_printed_lambda_opt,paper_printed_pd_opt,paper_printed_pd_double,paper_printed_improvement,\
             fixture_improvement"
        }
        Table::FalseAlarm => {
            "e_k,lambda_low,lambda_high,lambda_opt,pf_opt,pf_double,deterioration,\
             paper_printed_lambda_opt,paper_printed_pf_opt,paper_printed_pf_double,paper_printed_deterioration,\
             fixture_deterioration"
        }
        Table::Miss => {
            "e_k,lambda_low,lambda_high,lambda_opt,pm_opt,pm_double,improvement,\
             paper_printed_lambda_opt,paper_printed_pm_opt,paper_printed_pm_double,paper_printed_improvement,\
             fixture_improvement"
        }
        Table::Collision => {
            "lambda_low,lambda_high,e_k,lambda_opt,pc_double,pc_opt,pf,reduction,\
             paper_printed_lambda_opt,paper_printed_pc_double,paper_printed_pc_opt,paper_printed_pf,\
             paper_printed_reduction,fixture_reduction"
        }
    }
}

/// One row per published row: exact bisection threshold, closed-form
/// probabilities at that threshold and at the double-threshold operating
/// point, then the printed values for reference.
pub fn tables_csv(
    table: Table,
    params: &SensingParams,
    bisection: &BisectionConfig,
) -> Result<String, CliError> {
    params.validate()?;
    let (gamma, u) = (params.snr_linear(), params.time_bandwidth);
    let mut out = String::new();
    out.push_str(table_header(table));
    out.push('\n');
    for row in rows_for(table) {
        let pair = ThresholdPair::new(row.lambda_low, row.lambda_high)?;
        let lambda_opt = bisection_optimum_threshold(pair, row.e_k, bisection)?.lambda_opt;
        let (at_opt, double) = match table {
            Table::Detection => (
                pd_marcum(lambda_opt, gamma, u)?,
                pd_marcum(pair.high(), gamma, u)?,
            ),
            Table::FalseAlarm => (pf_gamma(lambda_opt, u)?, pf_gamma(pair.high(), u)?),
            Table::Miss => (
                1.0 - pd_marcum(lambda_opt, gamma, u)?,
                1.0 - pd_marcum(pair.high(), gamma, u)?,
            ),
            Table::Collision => (
                1.0 - pd_marcum(lambda_opt, gamma, u)?,
                1.0 - pd_marcum(pair.low(), gamma, u)?,
            ),
        };
        let fixture_diff = row.recomputed_difference();
        if table == Table::Collision {
            let pf = pf_gamma(pair.high(), u)?;
            line(
                &mut out,
                [
                    row.lambda_low.to_string(),
                    row.lambda_high.to_string(),
                    row.e_k.to_string(),
                    lambda_opt.to_string(),
                    double.to_string(),
                    at_opt.to_string(),
                    pf.to_string(),
                    (at_opt - double).to_string(),
                    row.lambda_opt.to_string(),
                    row.value_double.to_string(),
                    row.value_opt.to_string(),
                    opt(row.pf),
                    row.difference.to_string(),
                    fixture_diff.to_string(),
                ],
            );
        } else {
            line(
                &mut out,
                [
                    row.e_k,
                    row.lambda_low,
                    row.lambda_high,
                    lambda_opt,
                    at_opt,
                    double,
                    at_opt - double,
                    row.lambda_opt,
                    row.value_opt,
                    row.value_double,
                    row.difference,
                    fixture_diff,
                ],
            );
        }
    }
    Ok(out)
}

/// CSV bodies of the three ROC variants.
#[derive(Debug, Clone, PartialEq)]
pub struct RocOutputs {
    pub single: String,
    pub double: String,
    pub optimum: String,
}

fn roc_row(
    out: &mut String,
    lambda: f64,
    pf: f64,
    pd: f64,
    pf_emp: RateEstimate,
    pd_emp: RateEstimate,
) {
    line(
        out,
        [
            lambda,
            pf,
            pd,
            pf_emp.rate,
            pd_emp.rate,
            pf_emp.ci95_halfwidth,
            pd_emp.ci95_halfwidth,
        ],
    );
}

/// Single-threshold ROC at each grid λ, plus double and bisection-resolved
/// curves on the pair `(λ, λ + fuzzy_width)`. All three share one set of trials.
pub fn roc_csvs(
    grid: &[f64],
    fuzzy_width: f64,
    config: &TrialConfig,
    bisection: &BisectionConfig,
) -> Result<RocOutputs, CliError> {
    if !(fuzzy_width > 0.0 && fuzzy_width.is_finite()) {
        return Err(CliError::Usage(format!(
            "fuzzy width must be positive, got {fuzzy_width}"
        )));
    }
    bisection.validate()?;
    let form = form_for(config.model);
    let params = &config.params;
    let h0 = simulate_energies(config, Hypothesis::H0)?;
    let h1 = simulate_energies(config, Hypothesis::H1)?;

    let mut single = format!("{ROC_HEADER}\n");
    for p in roc_from_energies(grid, &h0, &h1)?.points {
        let (pf, pd) = (form.pf(p.lambda, params)?, form.pd(p.lambda, params)?);
        roc_row(&mut single, p.lambda, pf, pd, p.pf, p.pd);
    }

    let mut double = format!("{ROC_HEADER}\n");
    let mut optimum = format!("{ROC_HEADER}\n");
    let mut lambdas: Vec<f64> = grid.to_vec();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    for lambda in lambdas {
        let pair = ThresholdPair::new(lambda, lambda + fuzzy_width)?;
        let a = form.double_report(pair, params)?;
        let e = report_from_energies(pair, &h0, &h1, &Resolver::ReportFuzzy)?;
        roc_row(&mut double, lambda, a.pf, a.pd, e.pf, e.pd);
        let a = form.resolved_report(pair, bisection, params)?;
        let e = report_from_energies(pair, &h0, &h1, &Resolver::BisectionResolve(*bisection))?;
        roc_row(&mut optimum, lambda, a.pf, a.pd, e.pf, e.pd);
    }
    Ok(RocOutputs {
        single,
        double,
        optimum,
    })
}

pub const COLLISION_HEADER: &str = "lambda_low,lambda_high,energy,lambda_opt,pc_double,pc_optimum,pf,reduction,\
     pc_double_ci,pc_optimum_ci,pf_ci,pc_double_analytic,pc_optimum_analytic,pf_analytic,reduction_analytic";

/// Empirical collision rates per pair and energy scenario, with the
/// matching closed forms. `reduction` is `pc_optimum − pc_double`, either sign.
pub fn collision_csv(
    pairs: &[ThresholdPair],
    energies: &[f64],
    config: &TrialConfig,
    bisection: &BisectionConfig,
) -> Result<String, CliError> {
    if pairs.is_empty() {
        return Err(CliError::Usage(
            "collision needs at least one --pair or --paper-table5".into(),
        ));
    }
    let form = form_for(config.model);
    let rows = collision_sweep(pairs, energies, config, bisection)?;
    let mut out = format!("{COLLISION_HEADER}\n");
    for r in rows {
        let double = form.double_report(r.pair, &config.params)?;
        let resolved = form.resolved_report(r.pair, bisection, &config.params)?;
        line(
            &mut out,
            [
                r.pair.low().to_string(),
                r.pair.high().to_string(),
                r.energy.to_string(),
                opt(r.lambda_opt),
                r.pc_double.rate.to_string(),
                r.pc_optimum.rate.to_string(),
                r.pf.rate.to_string(),
                (r.pc_optimum.rate - r.pc_double.rate).to_string(),
                r.pc_double.ci95_halfwidth.to_string(),
                r.pc_optimum.ci95_halfwidth.to_string(),
                r.pf.ci95_halfwidth.to_string(),
                double.pc.to_string(),
                resolved.pc.to_string(),
                double.pf.to_string(),
                (resolved.pc - double.pc).to_string(),
            ],
        );
    }
    Ok(out)
}

/// `trace=…`, `lambda_opt=…` and `iterations=…` lines.
pub fn bisect_text(
    pair: ThresholdPair,
    energy: f64,
    bisection: &BisectionConfig,
) -> Result<String, CliError> {
    let r = bisection_optimum_threshold(pair, energy, bisection)?;
    let trace: Vec<String> = r.trace.iter().map(f64::to_string).collect();
    Ok(format!(
        "trace={}\nlambda_opt={}\niterations={}\n",
        trace.join(","),
        r.lambda_opt,
        r.iterations_used
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crn_sense::RngSeed;

    fn column(csv: &str, name: &str) -> Vec<String> {
        let mut lines = csv.lines();
        let idx = lines
            .next()
            .unwrap()
            .split(',')
            .position(|h| h == name)
            .unwrap();
        lines
            .map(|l| l.split(',').nth(idx).unwrap().to_string())
            .collect()
    }

    #[test]
    fn table2_thresholds() {
        let csv = tables_csv(
            Table::Detection,
            &SensingParams::default(),
            &BisectionConfig::default(),
        )
        .unwrap();
        assert_eq!(
            column(&csv, "lambda_opt"),
            ["12.375", "13.875", "17.625", "15.375", "16.125", "17.625", "16.875", "17.625"]
        );
        assert_eq!(column(&csv, "fixture_improvement")[0], "0.2245");
        assert_eq!(column(&csv, "paper_printed_pd_opt")[0], "0.2921");
    }

    #[test]
    fn table5_thresholds_and_closed_forms() {
        let params = SensingParams::default();
        let csv = tables_csv(Table::Collision, &params, &BisectionConfig::default()).unwrap();
        assert_eq!(
            column(&csv, "lambda_opt"),
            ["14.75", "21.0625", "15", "13.8125", "13.375", "14", "13.6875", "14.8125"]
        );
        let pf: f64 = column(&csv, "pf")[0].parse().unwrap();
        assert_eq!(pf, pf_gamma(20.0, 5).unwrap());
        let pc: f64 = column(&csv, "pc_opt")[0].parse().unwrap();
        assert_eq!(pc, 1.0 - pd_marcum(14.75, params.snr_linear(), 5).unwrap());
    }

    #[test]
    fn every_table_has_eight_rows_and_consistent_width() {
        for t in [
            Table::Detection,
            Table::FalseAlarm,
            Table::Miss,
            Table::Collision,
        ] {
            let csv =
                tables_csv(t, &SensingParams::default(), &BisectionConfig::default()).unwrap();
            let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
            assert_eq!(widths.len(), 9);
            assert!(widths.iter().all(|&w| w == widths[0]));
        }
    }

    #[test]
    fn bisect_examples() {
        let cfg = BisectionConfig::default();
        assert_eq!(
            bisect_text(ThresholdPair::new(12.0, 18.0).unwrap(), 12.5, &cfg).unwrap(),
            "trace=15,13.5,12.75,12.375\nlambda_opt=12.375\niterations=4\n"
        );
        let t = bisect_text(ThresholdPair::new(7.0, 22.0).unwrap(), 14.5, &cfg).unwrap();
        assert!(t.contains("lambda_opt=21.0625\n"));
        let err = bisect_text(ThresholdPair::new(12.0, 18.0).unwrap(), 20.0, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn roc_zero_threshold_row() {
        let config = TrialConfig::new(
            2000,
            RngSeed(3),
            SensingParams::default(),
            GenerativeModel::ChiSquare,
        );
        let out = roc_csvs(&[0.0], 6.0, &config, &BisectionConfig::default()).unwrap();
        assert_eq!(out.single, format!("{ROC_HEADER}\n0,1,1,1,1,0,0\n"));
        assert_eq!(out.double.lines().count(), 2);
        assert!(roc_csvs(&[0.0], 0.0, &config, &BisectionConfig::default()).is_err());
    }

    #[test]
    fn collision_requires_pairs() {
        let config = TrialConfig::new(
            100,
            RngSeed(0),
            SensingParams::default(),
            GenerativeModel::ChiSquare,
        );
        let err = collision_csv(&[], &[14.5], &config, &BisectionConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
