//! Shared builders for the integration suites: weekday calendars,
//! deterministic price processes with a planted sentiment signal, and a
//! miniature news corpus wired to known tickers.

#![allow(dead_code)] // each test binary uses a different subset

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use senticast::corpus::{Article, Section, TickerAliases};
use senticast::dataset::{PriceRow, PriceSeries};
use senticast::sentiment::{Library, SentimentSeries};

/// `count` consecutive weekdays starting at `start` (itself rolled forward
/// to a weekday if needed).
pub fn trading_dates(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(count);
    let mut day = start;
    while dates.len() < count {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(day);
        }
        day += Duration::days(1);
    }
    dates
}

/// A price path plus the daily signal that partially drives it.
pub struct PlantedMarket {
    pub prices: PriceSeries,
    /// The signal as a ready-to-use daily series (heading section).
    pub signal: SentimentSeries,
}

/// Parameters of the planted-signal price process.
///
/// Closes follow `close[d+1] = close[d] + gamma * s[d] + noise - kappa *
/// (close[d] - anchor)`: today's signal moves tomorrow's close by `gamma`,
/// on top of centered uniform noise of half-width `eta` and a weak pull
/// toward `anchor`. The signal is a ±1 regime that flips with probability
/// `1/persistence` per day, so it carries information a price history alone
/// reveals only noisily.
#[derive(Clone, Copy)]
pub struct PlantedParams {
    pub days: usize,
    pub gamma: f64,
    pub eta: f64,
    pub persistence: f64,
    pub kappa: f64,
    pub anchor: f64,
}

impl Default for PlantedParams {
    fn default() -> PlantedParams {
        PlantedParams {
            days: 900,
            gamma: 0.7,
            eta: 2.0,
            persistence: 30.0,
            kappa: 0.005,
            anchor: 100.0,
        }
    }
}

/// Generate the planted-signal market for one ticker.
///
/// Open/high/low derive from neighbouring closes and volume is a slow
/// deterministic wave, so none of them leak the signal: every feature
/// except the sentiment column is a function of the close path.
pub fn planted_market(ticker: &str, params: PlantedParams, seed: u64) -> PlantedMarket {
    let dates = trading_dates(NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(), params.days);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut signal = Vec::with_capacity(params.days);
    let mut s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    for _ in 0..params.days {
        if rng.gen_bool(1.0 / params.persistence) {
            s = -s;
        }
        signal.push(s);
    }

    let mut closes = Vec::with_capacity(params.days);
    let mut close = params.anchor;
    for day in 0..params.days {
        closes.push(close);
        close += params.gamma * signal[day] + rng.gen_range(-params.eta..params.eta)
            - params.kappa * (close - params.anchor);
    }

    let mut rows = Vec::with_capacity(params.days);
    for day in 0..params.days {
        let close = closes[day];
        let open = if day == 0 { close } else { closes[day - 1] };
        let spread = 0.002 * close.max(1.0);
        rows.push(PriceRow {
            date: dates[day],
            open,
            high: open.max(close) + spread,
            low: (open.min(close) - spread).max(0.01),
            close,
            volume: 1.0e6 * (1.0 + 0.1 * (day as f64 / 7.0).sin()),
        });
    }

    let values: BTreeMap<NaiveDate, f64> = dates.iter().copied().zip(signal).collect();
    PlantedMarket {
        prices: PriceSeries { ticker: ticker.to_string(), rows },
        signal: SentimentSeries {
            ticker: ticker.to_string(),
            section: Section::Heading,
            library: Library::Vader,
            values,
        },
    }
}

/// A plain noisy random-walk price series (no planted signal), for sweeps
/// that only exercise bookkeeping.
pub fn random_walk_prices(ticker: &str, days: usize, seed: u64) -> PriceSeries {
    let market = planted_market(
        ticker,
        PlantedParams { days, gamma: 0.0, ..PlantedParams::default() },
        seed,
    );
    market.prices
}

/// Serialize rows in the on-disk OHLCV layout.
pub fn write_price_csv(path: &std::path::Path, series: &PriceSeries) {
    let mut out = String::from("date,open,high,low,close,volume\n");
    for r in &series.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.date, r.open, r.high, r.low, r.close, r.volume
        ));
    }
    std::fs::write(path, out).unwrap();
}

/// The three tickers the synthetic corpus talks about.
pub fn test_aliases() -> Vec<TickerAliases> {
    vec![
        TickerAliases::new("ALPHA", &["Alpha Industries", "Alpha"]),
        TickerAliases::new("BETA", &["Beta Corp", "Beta"]),
        TickerAliases::new("GAMMA", &["Gamma Ltd", "Gamma"]),
    ]
}

/// A deterministic corpus of short articles naming the test tickers.
///
/// Headlines cycle through positive and negative phrasing built from words
/// every bundled dictionary knows, so all three libraries produce nonzero
/// scores; timestamps walk the weekday calendar so aggregation has
/// something on most days.
pub fn synthetic_articles(dates: &[NaiveDate], per_day: usize) -> Vec<Article> {
    let companies = ["Alpha Industries", "Beta Corp", "Gamma Ltd"];
    let positive = [
        "posts stellar profit and strong growth",
        "wins upgrade after record gain",
        "celebrates robust success with investors",
    ];
    let negative = [
        "faces litigation and heavy loss",
        "warns of decline and weak demand",
        "suffers penalty amid fraud worry",
    ];
    let mut articles = Vec::new();
    let mut k = 0usize;
    for date in dates {
        for slot in 0..per_day {
            let company = companies[k % companies.len()];
            let mood = if k % 2 == 0 {
                positive[k % positive.len()]
            } else {
                negative[k % negative.len()]
            };
            let heading = format!("{company} {mood}");
            let synopsis = format!("Analysts say {company} {mood} this quarter.");
            let full_text = format!(
                "{synopsis} The market reaction was immediate, and {company} \
                 remains in focus while traders weigh profit against loss."
            );
            let hour = 9 + (slot as u32) % 8;
            articles.push(Article {
                id: format!("art-{k:05}"),
                published_at: NaiveDateTime::new(
                    *date,
                    chrono::NaiveTime::from_hms_opt(hour, 30, 0).unwrap(),
                ),
                sector: "synthetic".to_string(),
                heading,
                synopsis,
                full_text,
            });
            k += 1;
        }
    }
    articles
}

/// Write articles in the JSONL ingestion layout.
pub fn write_articles_jsonl(path: &std::path::Path, articles: &[Article]) {
    let mut out = String::new();
    for a in articles {
        let line = serde_json::json!({
            "id": a.id,
            "published_at": a.published_at.format("%Y-%m-%d %H:%M:%S").to_string(),
            "sector": a.sector,
            "heading": a.heading,
            "synopsis": a.synopsis,
            "full_text": a.full_text,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

/// Write the alias table in its CSV layout.
pub fn write_aliases_csv(path: &std::path::Path, aliases: &[TickerAliases]) {
    let mut out = String::from("# ticker,name,name,...\n");
    for a in aliases {
        out.push_str(&a.ticker);
        for name in &a.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}
