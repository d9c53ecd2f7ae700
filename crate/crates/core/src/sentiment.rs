//! Section scoring with the three dictionary formulas, and per-ticker daily
//! aggregation onto the business calendar.
//!
//! Valence scoring sums per-word valences and squashes the total into
//! (-1, 1); categorical scoring counts positive and negative word hits and
//! normalizes the difference. Both treat a section with no dictionary hits
//! as exactly 0. Daily aggregation averages the scores of the articles that
//! mention the ticker in the scored section; days without a mention carry 0.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;

use chrono::{NaiveDate, Timelike};
use serde::{Deserialize, Serialize};

use crate::calendar::BusinessCalendar;
use crate::corpus::{match_ticker, Article, Section, TickerAliases};
use crate::error::{Error, Result};
use crate::lexicon::{CategoricalLexicon, LexiconSet, ValenceLexicon};

/// Normalization constant under the square root of the compound score;
/// keeps single-digit valence sums well inside (-1, 1).
pub const COMPOUND_NORMALIZER: f64 = 15.0;

/// Stabilizer in the polarity denominator; turns the 0/0 case into an exact
/// 0 while perturbing any real score by less than 1e-5.
pub const POLARITY_EPSILON: f64 = 1e-6;

/// The three scoring dictionaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Library {
    Vader,
    Hiv4,
    Lm,
}

impl Library {
    pub const ALL: [Library; 3] = [Library::Vader, Library::Hiv4, Library::Lm];

    pub fn name(self) -> &'static str {
        match self {
            Library::Vader => "vader",
            Library::Hiv4 => "hiv4",
            Library::Lm => "lm",
        }
    }
}

impl fmt::Display for Library {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sentiment of one article section under one library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionScore {
    pub article_id: String,
    pub section: Section,
    pub library: Library,
    /// In [-1, 1] by construction.
    pub score: f64,
}

/// Daily sentiment values for one (ticker, section, library) combination.
/// Only days with at least one matching article hold an entry; every other
/// business day reads as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentSeries {
    pub ticker: String,
    pub section: Section,
    pub library: Library,
    pub values: BTreeMap<NaiveDate, f64>,
}

impl SentimentSeries {
    /// The daily value, 0 for days without a matching article.
    pub fn value_on(&self, date: NaiveDate) -> f64 {
        self.values.get(&date).copied().unwrap_or(0.0)
    }

    /// Days that actually carry a value.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Write `date,value` rows with six-decimal values.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let write = |e| Error::Parse(format!("series export failed: {e}"));
        writeln!(out, "date,value").map_err(write)?;
        for (date, value) in &self.values {
            writeln!(out, "{date},{value:.6}").map_err(write)?;
        }
        Ok(())
    }
}

/// Lowercase word tokens: split on every non-alphanumeric run, empties
/// dropped. Deterministic, total.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Squash a valence sum `v` into (-1, 1): v / sqrt(v² + 15).
pub fn compound(v: f64) -> f64 {
    v / (v * v + COMPOUND_NORMALIZER).sqrt()
}

/// Sum the valences of the tokens found in the lexicon and squash the total.
/// Text with no dictionary hits scores exactly 0.
pub fn vader_compound(text: &str, lexicon: &ValenceLexicon) -> f64 {
    let v: f64 = tokenize(text)
        .iter()
        .filter_map(|t| lexicon.valence(t))
        .sum();
    compound(v)
}

/// Count positive and negative token hits (with multiplicity) and return
/// (pos − neg) / (pos + neg + ε). The no-hit case is exactly 0.
pub fn polarity_score(text: &str, lexicon: &CategoricalLexicon) -> f64 {
    let mut pos = 0usize;
    let mut neg = 0usize;
    for token in tokenize(text) {
        if lexicon.is_positive(&token) {
            pos += 1;
        } else if lexicon.is_negative(&token) {
            neg += 1;
        }
    }
    (pos as f64 - neg as f64) / (pos as f64 + neg as f64 + POLARITY_EPSILON)
}

/// Score one text under one library.
pub fn score_text(text: &str, library: Library, lexicons: &LexiconSet) -> f64 {
    let score = match library {
        Library::Vader => vader_compound(text, &lexicons.vader),
        Library::Hiv4 => polarity_score(text, &lexicons.hiv4),
        Library::Lm => polarity_score(text, &lexicons.lm),
    };
    score.clamp(-1.0, 1.0)
}

/// Score every requested (article, section, library) combination. Output
/// order is articles-major, then sections, then libraries, so repeated runs
/// are bitwise identical.
pub fn score_corpus(
    articles: &[Article],
    lexicons: &LexiconSet,
    sections: &[Section],
    libraries: &[Library],
) -> Vec<SectionScore> {
    let mut scores = Vec::with_capacity(articles.len() * sections.len() * libraries.len());
    for article in articles {
        for &section in sections {
            let text = section.text_of(article);
            for &library in libraries {
                scores.push(SectionScore {
                    article_id: article.id.clone(),
                    section,
                    library,
                    score: score_text(text, library, lexicons),
                });
            }
        }
    }
    scores
}

/// Write `article_id,section,library,score` rows with six-decimal scores.
pub fn write_scores_csv<W: Write>(scores: &[SectionScore], mut out: W) -> Result<()> {
    let write = |e| Error::Parse(format!("scores export failed: {e}"));
    writeln!(out, "article_id,section,library,score").map_err(write)?;
    for s in scores {
        writeln!(out, "{},{},{},{:.6}", s.article_id, s.section, s.library, s.score)
            .map_err(write)?;
    }
    Ok(())
}

/// Average the chosen (section, library) scores per business day for one
/// ticker.
///
/// An article contributes on its publication date when its scored section
/// mentions the ticker or an alias as a whole word. With a `cutoff_hour`,
/// articles published at or after that hour roll to the next calendar day
/// (news after the close trades on tomorrow's bar). Dates that are not
/// business days are dropped. Per-day scores are summed in value order, so
/// the result is independent of article order.
pub fn aggregate_daily(
    scores: &[SectionScore],
    articles: &[Article],
    aliases: &TickerAliases,
    section: Section,
    library: Library,
    calendar: &BusinessCalendar,
    cutoff_hour: Option<u32>,
) -> SentimentSeries {
    // First occurrence wins if a malformed dump repeats an id.
    let mut by_id: HashMap<&str, &Article> = HashMap::with_capacity(articles.len());
    for article in articles {
        by_id.entry(article.id.as_str()).or_insert(article);
    }

    let mut per_day: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for score in scores {
        if score.section != section || score.library != library {
            continue;
        }
        let Some(article) = by_id.get(score.article_id.as_str()) else {
            continue;
        };
        if !match_ticker(article, section, aliases) {
            continue;
        }
        let mut date = article.date();
        if let Some(cutoff) = cutoff_hour {
            if article.published_at.time().hour() >= cutoff {
                date = date.succ_opt().expect("date within calendar range");
            }
        }
        if !calendar.contains(date) {
            continue;
        }
        per_day.entry(date).or_default().push(score.score);
    }

    let values = per_day
        .into_iter()
        .map(|(date, mut day_scores)| {
            // Summing in sorted order makes the mean independent of the
            // order articles arrived in, even under floating-point rounding.
            day_scores.sort_by(f64::total_cmp);
            let sum: f64 = day_scores.iter().sum();
            (date, sum / day_scores.len() as f64)
        })
        .collect();

    SentimentSeries {
        ticker: aliases.ticker.clone(),
        section,
        library,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_timestamp;
    use crate::lexicon::{bundled, CategoricalKind};

    fn article(id: &str, heading: &str, when: &str) -> Article {
        Article {
            id: id.to_string(),
            published_at: parse_timestamp(when).unwrap(),
            sector: String::new(),
            heading: heading.to_string(),
            synopsis: String::new(),
            full_text: String::new(),
        }
    }

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn tokenize_splits_on_non_alphanumeric() {
        assert_eq!(tokenize("Profit, up 5%"), ["profit", "up", "5"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("state-of-the-art"), ["state", "of", "the", "art"]);
    }

    #[test]
    fn compound_matches_hand_evaluation() {
        assert_eq!(compound(0.0), 0.0);
        let s = compound(4.0);
        assert!((s - 4.0 / 31.0_f64.sqrt()).abs() < 1e-15);
        assert!((s - 0.71842).abs() < 5e-6);
    }

    #[test]
    fn compound_is_odd_and_bounded() {
        for v in [-9.0, -2.5, -0.1, 0.3, 1.7, 8.0] {
            assert_eq!(compound(-v), -compound(v));
            assert!(compound(v).abs() < 1.0);
        }
    }

    #[test]
    fn vader_no_match_is_zero() {
        let lex = ValenceLexicon::from_entries([("good", 1.9)]);
        assert_eq!(vader_compound("nothing matches here", &lex), 0.0);
        assert_eq!(vader_compound("", &lex), 0.0);
    }

    #[test]
    fn vader_negated_lexicon_negates_score() {
        let lex = bundled::vader();
        let text = "Strong profit growth amid weak global markets";
        let s = vader_compound(text, &lex);
        assert!(s != 0.0);
        assert_eq!(vader_compound(text, &lex.negated()), -s);
    }

    #[test]
    fn polarity_hand_case_three_to_one() {
        let lex = CategoricalLexicon::from_words(
            CategoricalKind::Lm,
            &["gain", "strong", "win"],
            &["loss"],
        );
        let score = polarity_score("gain strong win loss", &lex);
        let expected = (3.0 - 1.0) / (3.0 + 1.0 + POLARITY_EPSILON);
        assert_eq!(score, expected);
        assert!((score - 0.5).abs() < 1e-6);
    }

    #[test]
    fn polarity_degenerate_and_balanced() {
        let lex = CategoricalLexicon::from_words(CategoricalKind::Hiv4, &["gain"], &["loss"]);
        assert_eq!(polarity_score("nothing here", &lex), 0.0);
        assert!(polarity_score("gain loss", &lex).abs() < 1e-6);
    }

    #[test]
    fn polarity_counts_multiplicity() {
        let lex = CategoricalLexicon::from_words(CategoricalKind::Hiv4, &["good"], &[]);
        let two = polarity_score("good good", &lex);
        let one = polarity_score("good", &lex);
        assert!(two > one); // denominator ε shrinks relatively with more hits
    }

    #[test]
    fn score_corpus_cardinality_and_determinism() {
        let lexicons = bundled::lexicon_set();
        let articles = vec![
            article("a", "Strong profit growth", "2021-01-04"),
            article("b", "Heavy loss and decline", "2021-01-05"),
        ];
        let scores = score_corpus(&articles, &lexicons, &Section::ALL, &Library::ALL);
        assert_eq!(scores.len(), 18);
        let again = score_corpus(&articles, &lexicons, &Section::ALL, &Library::ALL);
        assert_eq!(scores, again);
        assert!(scores.iter().all(|s| (-1.0..=1.0).contains(&s.score)));
    }

    #[test]
    fn empty_section_scores_zero() {
        let lexicons = bundled::lexicon_set();
        let articles = vec![article("a", "Strong profit", "2021-01-04")];
        let scores = score_corpus(&articles, &lexicons, &[Section::Synopsis], &Library::ALL);
        assert!(scores.iter().all(|s| s.score == 0.0));
    }

    #[test]
    fn aggregate_two_scores_averages() {
        let aliases = TickerAliases::new("INFY", &["infosys"]);
        let articles = vec![
            article("a", "Infosys gains", "2021-01-04T09:00:00"),
            article("b", "Infosys slips", "2021-01-04T11:00:00"),
        ];
        let scores = vec![
            SectionScore {
                article_id: "a".into(),
                section: Section::Heading,
                library: Library::Vader,
                score: 0.5,
            },
            SectionScore {
                article_id: "b".into(),
                section: Section::Heading,
                library: Library::Vader,
                score: -0.1,
            },
        ];
        let calendar = BusinessCalendar::from_dates([date("2021-01-04")]);
        let series = aggregate_daily(
            &scores,
            &articles,
            &aliases,
            Section::Heading,
            Library::Vader,
            &calendar,
            None,
        );
        assert!((series.value_on(date("2021-01-04")) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn aggregate_missing_day_reads_zero() {
        let aliases = TickerAliases::new("INFY", &["infosys"]);
        let calendar = BusinessCalendar::from_dates([date("2021-01-04"), date("2021-01-05")]);
        let series = aggregate_daily(
            &[],
            &[],
            &aliases,
            Section::Heading,
            Library::Vader,
            &calendar,
            None,
        );
        assert_eq!(series.value_on(date("2021-01-05")), 0.0);
        assert!(series.is_empty());
    }

    #[test]
    fn aggregate_singleton_passes_through() {
        let aliases = TickerAliases::new("INFY", &["infosys"]);
        let articles = vec![article("a", "Infosys gains", "2021-01-04")];
        let scores = vec![SectionScore {
            article_id: "a".into(),
            section: Section::Heading,
            library: Library::Lm,
            score: 0.37,
        }];
        let calendar = BusinessCalendar::from_dates([date("2021-01-04")]);
        let series = aggregate_daily(
            &scores,
            &articles,
            &aliases,
            Section::Heading,
            Library::Lm,
            &calendar,
            None,
        );
        assert_eq!(series.value_on(date("2021-01-04")), 0.37);
    }

    #[test]
    fn aggregate_drops_non_business_dates_and_non_matches() {
        let aliases = TickerAliases::new("INFY", &["infosys"]);
        let articles = vec![
            article("sat", "Infosys weekend recap", "2021-01-09"), // not a trading day
            article("other", "Wipro gains", "2021-01-04"),         // no ticker mention
        ];
        let mk = |id: &str| SectionScore {
            article_id: id.into(),
            section: Section::Heading,
            library: Library::Vader,
            score: 0.9,
        };
        let scores = vec![mk("sat"), mk("other")];
        let calendar = BusinessCalendar::from_dates([date("2021-01-04")]);
        let series = aggregate_daily(
            &scores,
            &articles,
            &aliases,
            Section::Heading,
            Library::Vader,
            &calendar,
            None,
        );
        assert!(series.is_empty());
    }

    #[test]
    fn cutoff_rolls_late_articles_to_next_day() {
        let aliases = TickerAliases::new("INFY", &["infosys"]);
        let articles = vec![
            article("am", "Infosys early", "2021-01-04T09:00:00"),
            article("pm", "Infosys late", "2021-01-04T17:30:00"),
        ];
        let mk = |id: &str, score: f64| SectionScore {
            article_id: id.into(),
            section: Section::Heading,
            library: Library::Vader,
            score,
        };
        let scores = vec![mk("am", 0.4), mk("pm", -0.6)];
        let calendar = BusinessCalendar::from_dates([date("2021-01-04"), date("2021-01-05")]);
        let series = aggregate_daily(
            &scores,
            &articles,
            &aliases,
            Section::Heading,
            Library::Vader,
            &calendar,
            Some(16),
        );
        assert_eq!(series.value_on(date("2021-01-04")), 0.4);
        assert_eq!(series.value_on(date("2021-01-05")), -0.6);
    }

    #[test]
    fn series_csv_has_six_decimals() {
        let series = SentimentSeries {
            ticker: "INFY".into(),
            section: Section::Heading,
            library: Library::Vader,
            values: BTreeMap::from([(date("2021-01-04"), 0.123456789)]),
        };
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "date,value\n2021-01-04,0.123457\n"
        );
    }
}
