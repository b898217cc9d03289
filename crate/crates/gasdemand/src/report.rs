//! Report files: per-year and pooled scores, monthly scores, residual series,
//! session comparison and the propagation curve, each as CSV with an SVG
//! companion where a figure makes sense.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gasdemand_core::backtest::{BacktestPlan, BacktestReport, RmseComparison};
use gasdemand_core::errorprop::CurvePoint;
use gasdemand_core::metrics::{mae_rmse_ratio, ForecastSeries};
use gasdemand_core::{CivilDate, TemperatureSource};

use crate::svg::{histogram_outline, Mark, Plot};

/// `generated <UTC timestamp>`, for the optional first comment line.
pub fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()) as i64;
    let date = CivilDate::from_days(secs.div_euclid(86_400));
    let s = secs.rem_euclid(86_400);
    format!("generated {date}T{:02}:{:02}:{:02}Z", s / 3600, s / 60 % 60, s % 60)
}

/// Writes report files into one directory.
pub struct ReportWriter {
    dir: PathBuf,
    stamp: Option<String>,
    written: Vec<PathBuf>,
}

impl ReportWriter {
    /// Create the directory if needed. `stamp` becomes a leading `#` line in
    /// every CSV.
    pub fn new(dir: &Path, stamp: Option<String>) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.into(), stamp, written: Vec::new() })
    }

    /// Files written so far.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        if let Some(s) = &self.stamp {
            writeln!(out, "# {s}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    fn svg(&mut self, name: &str, plot: &Plot) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, plot.render())?;
        self.written.push(path);
        Ok(())
    }

    /// Every table and figure of a backtest.
    pub fn backtest(&mut self, plan: &BacktestPlan, report: &BacktestReport) -> anyhow::Result<()> {
        for &source in &plan.sessions {
            self.session(plan, report, source)?;
        }
        if !report.comparisons.is_empty() {
            self.comparison(plan, &report.comparisons)?;
        }
        Ok(())
    }

    fn session(&mut self, plan: &BacktestPlan, report: &BacktestReport, source: TemperatureSource) -> anyhow::Result<()> {
        let tag = source.as_str();
        let period = pooled_label(plan);
        let mut yearly = Vec::new();
        let mut monthly = Vec::new();
        let mut residuals = Vec::new();
        let mut evals = Vec::new();
        for &model in &plan.models {
            for row in report.rows.iter().filter(|r| r.model == model && r.source == source) {
                let s = &row.scores;
                yearly.push(vec![
                    model.to_string(),
                    row.year.to_string(),
                    s.n.to_string(),
                    s.rmse.to_string(),
                    s.mae.to_string(),
                    opt(s.mape),
                    opt(mae_rmse_ratio(&row.series.residuals()).ok()),
                    row.hyperparams.to_string(),
                ]);
            }
            let Some(eval) = report.evaluation(model, source) else { continue };
            let a = &eval.aggregate;
            yearly.push(vec![
                model.to_string(),
                period.clone(),
                a.n.to_string(),
                a.rmse.to_string(),
                a.mae.to_string(),
                opt(a.mape),
                opt(eval.mae_rmse_ratio),
                String::new(),
            ]);
            for m in &eval.monthly {
                monthly.push(vec![model.to_string(), m.month.to_string(), m.n.to_string(), m.mae.to_string(), opt(m.mape)]);
            }
            push_residuals(&mut residuals, model.as_str(), &eval.series);
            evals.push((model, eval.series.dates.clone(), eval.series.residuals()));
        }
        self.csv(
            &format!("yearly_{tag}.csv"),
            &["model", "period", "n", "rmse", "mae", "mape", "mae_rmse_ratio", "hyperparams"],
            yearly,
        )?;
        self.csv(&format!("monthly_{tag}.csv"), &["model", "month", "n", "mae", "mape"], monthly)?;
        self.csv(&format!("residuals_{tag}.csv"), &["date", "model", "actual", "predicted", "residual"], residuals)?;

        let bound = evals.iter().flat_map(|e| e.2.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-9);
        let mut lines = Plot::new(&format!("Forecast residuals ({tag} temperature)"), "date", "residual (MSCM)");
        lines.x_format = date_label;
        let mut hist = Plot::new(&format!("Residual distribution ({tag} temperature)"), "residual (MSCM)", "density");
        for (model, dates, r) in &evals {
            let pts = dates.iter().zip(r).map(|(d, e)| (d.to_days() as f64, *e)).collect();
            lines = lines.with(model.as_str(), Mark::Line, pts);
            hist = hist.with(model.as_str(), Mark::Line, histogram_outline(r, -bound, bound, 40));
        }
        self.svg(&format!("residuals_{tag}.svg"), &lines)?;
        self.svg(&format!("residual_histogram_{tag}.svg"), &hist)
    }

    fn comparison(&mut self, plan: &BacktestPlan, rows: &[RmseComparison]) -> anyhow::Result<()> {
        let period = pooled_label(plan);
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|c| {
                vec![
                    c.model.to_string(),
                    c.year.map_or(period.clone(), |y| y.to_string()),
                    c.actual_rmse.to_string(),
                    c.params.alpha.to_string(),
                    c.params.p_cold.to_string(),
                    c.params.sigma2_eps.to_string(),
                    c.params.performance_limit().to_string(),
                    c.predicted_rmse.to_string(),
                    c.forecast_rmse.to_string(),
                    c.relative_gap().to_string(),
                ]
            })
            .collect();
        self.csv("rmse_comparison.csv", &COMPARISON_HEADER, table)?;
        let points = rows.iter().map(|c| (c.model.to_string(), c.predicted_rmse, c.forecast_rmse)).collect::<Vec<_>>();
        self.svg("rmse_comparison.svg", &comparison_plot(&points))
    }

    /// Predicted gas RMSE against temperature RMSE.
    pub fn curve(&mut self, sigma2_0: f64, points: &[CurvePoint]) -> anyhow::Result<()> {
        let rows = points
            .iter()
            .map(|p| vec![p.sigma2_eps.to_string(), p.temperature_rmse.to_string(), p.gas_rmse.to_string()])
            .collect();
        self.csv("errorprop_curve.csv", &["sigma2_eps", "temperature_rmse", "gas_rmse"], rows)?;
        let plot = Plot::new(
            &format!("Gas forecast RMSE vs temperature forecast RMSE (sigma0^2 = {sigma2_0})"),
            "temperature RMSE (°C)",
            "gas RMSE (MSCM)",
        )
        .with("predicted", Mark::Line, points.iter().map(|p| (p.temperature_rmse, p.gas_rmse)).collect());
        self.svg("errorprop_curve.svg", &plot)
    }

    /// Re-plot a comparison CSV written by a backtest.
    pub fn replot_comparison(&mut self, csv_path: &Path) -> anyhow::Result<()> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(csv_path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| anyhow::anyhow!("{}: missing column `{name}`", csv_path.display()))
        };
        let (im, ip, ifc) = (col("model")?, col("predicted_rmse")?, col("forecast_rmse")?);
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> anyhow::Result<f64> { Ok(rec.get(i).unwrap_or("").parse()?) };
            points.push((rec.get(im).unwrap_or("").to_string(), num(ip)?, num(ifc)?));
        }
        self.svg("rmse_comparison.svg", &comparison_plot(&points))
    }
}

/// Columns of `rmse_comparison.csv`.
pub const COMPARISON_HEADER: [&str; 10] = [
    "model",
    "period",
    "actual_temperature_rmse",
    "alpha",
    "p_cold",
    "sigma2_eps",
    "performance_limit",
    "predicted_rmse",
    "forecast_rmse",
    "relative_gap",
];

fn comparison_plot(points: &[(String, f64, f64)]) -> Plot {
    let mut plot = Plot::new("Measured vs predicted RMSE with forecast temperature", "predicted RMSE (MSCM)", "measured RMSE (MSCM)");
    plot.diagonal = true;
    let mut names: Vec<&str> = points.iter().map(|p| p.0.as_str()).collect();
    names.dedup();
    for name in names {
        let pts = points.iter().filter(|p| p.0 == name).map(|p| (p.1, p.2)).collect();
        plot = plot.with(name, Mark::Points, pts);
    }
    plot
}

fn pooled_label(plan: &BacktestPlan) -> String {
    let lo = plan.splits.iter().map(|s| s.year).min().unwrap_or(0);
    let hi = plan.splits.iter().map(|s| s.year).max().unwrap_or(0);
    if lo == hi { format!("{lo}-all") } else { format!("{lo}-{hi}") }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn date_label(x: f64) -> String {
    CivilDate::from_days(x.round() as i64).to_string()
}

fn push_residuals(out: &mut Vec<Vec<String>>, model: &str, s: &ForecastSeries) {
    for ((d, a), p) in s.dates.iter().zip(&s.actual).zip(&s.predicted) {
        out.push(vec![d.to_string(), model.into(), a.to_string(), p.to_string(), (a - p).to_string()]);
    }
}
