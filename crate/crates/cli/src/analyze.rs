use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::Args;
use hashlag_core::empirics::{
    correlation, cross_correlation, granger_test, log_change_correlation, pct_change, segment, Column,
    CorrelationBasis, Direction, EmpiricsError, GapPolicy, GrangerResult, ObservationSeries,
};
use hashlag_core::stats::CrossCorrelation;
use serde::Serialize;

use crate::error::{ensure_dir, write_atomic, CliError};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV with header `date,price_usd,hashrate_ehs`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// reject, forward_fill or linear.
    #[arg(long, default_value = "reject")]
    pub gap_policy: GapPolicy,
    /// Days in the centered log-price average used for segmentation.
    #[arg(long, default_value_t = 7)]
    pub smoothing_window: usize,
    /// Minimum days between major peaks.
    #[arg(long, default_value_t = 180)]
    pub min_segment: usize,
    /// Cross-correlation lag window in days, each side.
    #[arg(long, default_value_t = 60)]
    pub max_lag: usize,
    #[arg(long, default_value_t = 7)]
    pub granger_lags: usize,
    /// Extra window for percentage changes, as FROM:TO dates (repeatable).
    #[arg(long = "change", value_parser = parse_window)]
    pub changes: Vec<(NaiveDate, NaiveDate)>,
}

fn parse_window(s: &str) -> Result<(NaiveDate, NaiveDate), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected FROM:TO, got {s:?}"))?;
    let date = |t: &str| {
        NaiveDate::parse_from_str(t.trim(), "%Y-%m-%d").map_err(|e| format!("bad date {t:?}: {e}"))
    };
    let (from, to) = (date(a)?, date(b)?);
    if to < from {
        return Err(format!("window ends before it starts: {s}"));
    }
    Ok((from, to))
}

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub gap_policy: String,
    pub smoothing_window: usize,
    pub min_segment: usize,
    pub max_lag: usize,
    pub granger_lags: usize,
}

#[derive(Debug, Serialize)]
pub struct WindowStats {
    pub label: String,
    pub from: String,
    pub to: String,
    pub price_pct_change: Option<f64>,
    pub hashrate_pct_change: Option<f64>,
    pub hashes_per_bitcoin_pct_change: Option<f64>,
    pub correlation_levels: Option<f64>,
    pub correlation_log_changes: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BestLag {
    /// Positive when price leads hash rate.
    pub best_lag: i64,
    pub correlation: f64,
}

#[derive(Debug, Serialize)]
pub struct CrossSection {
    pub levels: Option<BestLag>,
    pub log_changes: Option<BestLag>,
}

#[derive(Debug, Serialize)]
pub struct GrangerOut {
    pub f: f64,
    pub p: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub nobs: usize,
}

impl From<GrangerResult> for GrangerOut {
    fn from(r: GrangerResult) -> Self {
        Self {
            f: r.f,
            p: r.p,
            df_num: r.df_num,
            df_den: r.df_den,
            nobs: r.nobs,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GrangerSection {
    pub price_to_hash: Option<GrangerOut>,
    pub hash_to_price: Option<GrangerOut>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub source: String,
    pub rows: usize,
    pub first_date: String,
    pub last_date: String,
    pub gaps_filled: usize,
    pub parameters: Parameters,
    pub full_sample: WindowStats,
    pub boundaries: Vec<String>,
    pub segments: Vec<WindowStats>,
    pub windows: Vec<WindowStats>,
    pub cross_correlation: CrossSection,
    pub granger: GrangerSection,
    /// Analyses that could not be computed, with the reason.
    pub notes: Vec<String>,
}

/// Everything `analyze` computes, before serialization.
pub struct Analysis {
    pub report: Report,
    pub levels_table: Option<CrossCorrelation>,
    pub log_changes_table: Option<CrossCorrelation>,
}

struct Notes(Vec<String>);

impl Notes {
    fn keep<T>(&mut self, context: &str, r: Result<T, EmpiricsError>) -> Option<T> {
        r.map_err(|e| self.0.push(format!("{context}: {e}"))).ok()
    }
}

fn window_stats(series: &ObservationSeries, label: &str, from: NaiveDate, to: NaiveDate, notes: &mut Notes) -> WindowStats {
    let ctx = |what: &str| format!("{label} {what}");
    WindowStats {
        label: label.to_string(),
        from: from.to_string(),
        to: to.to_string(),
        price_pct_change: notes.keep(&ctx("price change"), pct_change(series, Column::Price, from, to)),
        hashrate_pct_change: notes.keep(&ctx("hash rate change"), pct_change(series, Column::Hashrate, from, to)),
        hashes_per_bitcoin_pct_change: notes.keep(
            &ctx("hashes per bitcoin change"),
            pct_change(series, Column::HashesPerBitcoin, from, to),
        ),
        correlation_levels: notes.keep(&ctx("level correlation"), correlation(series, from, to)),
        correlation_log_changes: notes.keep(&ctx("log-change correlation"), log_change_correlation(series, from, to)),
    }
}

pub fn analyze(series: &ObservationSeries, args: &AnalyzeArgs) -> Analysis {
    let mut notes = Notes(Vec::new());
    let first = series.first_date().expect("ingest rejects empty files");
    let last = series.last_date().expect("ingest rejects empty files");

    let full_sample = window_stats(series, "full sample", first, last, &mut notes);
    let seg = notes.keep("segmentation", segment(series, args.smoothing_window, args.min_segment));
    let (boundaries, segments) = match seg {
        Some(seg) => (
            seg.boundaries.iter().map(ToString::to_string).collect(),
            seg.segments
                .iter()
                .map(|s| window_stats(series, &s.label, s.start, s.end, &mut notes))
                .collect(),
        ),
        None => (Vec::new(), Vec::new()),
    };
    let windows = args
        .changes
        .iter()
        .map(|&(from, to)| window_stats(series, &format!("{from}:{to}"), from, to, &mut notes))
        .collect();

    let levels_table = notes.keep(
        "cross-correlation (levels)",
        cross_correlation(series, args.max_lag, CorrelationBasis::Levels),
    );
    let log_changes_table = notes.keep(
        "cross-correlation (log changes)",
        cross_correlation(series, args.max_lag, CorrelationBasis::LogChanges),
    );
    let best = |cc: &Option<CrossCorrelation>| {
        cc.as_ref().map(|c| BestLag {
            best_lag: c.best_lag,
            correlation: c.best_corr,
        })
    };
    let cross = CrossSection {
        levels: best(&levels_table),
        log_changes: best(&log_changes_table),
    };

    let granger = GrangerSection {
        price_to_hash: notes
            .keep(
                &format!("granger {}", Direction::PriceToHash.label()),
                granger_test(series, Direction::PriceToHash, args.granger_lags),
            )
            .map(Into::into),
        hash_to_price: notes
            .keep(
                &format!("granger {}", Direction::HashToPrice.label()),
                granger_test(series, Direction::HashToPrice, args.granger_lags),
            )
            .map(Into::into),
    };

    let report = Report {
        source: series.source().to_string(),
        rows: series.len(),
        first_date: first.to_string(),
        last_date: last.to_string(),
        gaps_filled: series.gaps_filled(),
        parameters: Parameters {
            gap_policy: series.gap_policy().to_string(),
            smoothing_window: args.smoothing_window,
            min_segment: args.min_segment,
            max_lag: args.max_lag,
            granger_lags: args.granger_lags,
        },
        full_sample,
        boundaries,
        segments,
        windows,
        cross_correlation: cross,
        granger,
        notes: notes.0,
    };
    Analysis {
        report,
        levels_table,
        log_changes_table,
    }
}

fn cell(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(|x| x.to_string()).unwrap_or_default()
}

pub fn log_price_csv(series: &ObservationSeries) -> String {
    let mut out = String::from("date,log_price\n");
    for o in series.rows() {
        out.push_str(&format!("{},{}\n", o.date, o.price.ln()));
    }
    out
}

pub fn hashes_per_bitcoin_csv(series: &ObservationSeries) -> String {
    let mut out = String::from("date,hashes_per_bitcoin\n");
    for (o, hpb) in series.rows().iter().zip(series.hashes_per_bitcoin()) {
        out.push_str(&format!("{},{}\n", o.date, cell(hpb)));
    }
    out
}

pub fn cross_correlation_csv(analysis: &Analysis, max_lag: usize) -> String {
    let lookup = |t: &Option<CrossCorrelation>, lag: i64| {
        t.as_ref()
            .and_then(|c| c.table.iter().find(|(l, _)| *l == lag).map(|(_, v)| *v))
    };
    let mut out = String::from("lag,levels,log_changes\n");
    let max = i64::try_from(max_lag).unwrap_or(i64::MAX);
    for lag in -max..=max {
        out.push_str(&format!(
            "{lag},{},{}\n",
            cell(lookup(&analysis.levels_table, lag)),
            cell(lookup(&analysis.log_changes_table, lag))
        ));
    }
    out
}

pub fn execute(args: &AnalyzeArgs, out_dir: &Path) -> Result<Analysis, CliError> {
    if args.smoothing_window == 0 || args.min_segment == 0 || args.granger_lags == 0 {
        return Err(CliError::Usage(
            "--smoothing-window, --min-segment and --granger-lags must be >= 1".into(),
        ));
    }
    let series =
        ObservationSeries::ingest_path(&args.input, args.gap_policy).map_err(|e| CliError::Data(e.to_string()))?;
    let analysis = analyze(&series, args);
    let mut json = serde_json::to_string_pretty(&analysis.report)
        .map_err(|e| CliError::Data(format!("formatting report: {e}")))?;
    json.push('\n');

    ensure_dir(out_dir)?;
    write_atomic(&out_dir.join("report.json"), json.as_bytes())?;
    write_atomic(&out_dir.join("log_price.csv"), log_price_csv(&series).as_bytes())?;
    write_atomic(&out_dir.join("hashes_per_bitcoin.csv"), hashes_per_bitcoin_csv(&series).as_bytes())?;
    write_atomic(
        &out_dir.join("cross_correlation.csv"),
        cross_correlation_csv(&analysis, args.max_lag).as_bytes(),
    )?;
    Ok(analysis)
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let analysis = execute(args, &args.out)?;
    let r = &analysis.report;
    println!(
        "analyzed {} rows ({} to {}), {} segment(s), written to {}",
        r.rows,
        r.first_date,
        r.last_date,
        r.segments.len(),
        args.out.display()
    );
    for note in &r.notes {
        eprintln!("note: {note}");
    }
    Ok(())
}
