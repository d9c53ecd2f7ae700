//! Article ingestion, cleaning, deduplication and ticker matching.
//!
//! Raw article dumps arrive as JSON Lines (one record per line) or CSV with
//! the section fields `heading`, `synopsis`, `full_text` plus `sector` and a
//! publication timestamp. Ingestion cleans each section, drops records
//! without a heading or a parseable date (counted, never fatal), collapses
//! duplicates and returns the survivors in publication order.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One news item with independently cleaned sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub published_at: NaiveDateTime,
    pub sector: String,
    pub heading: String,
    pub synopsis: String,
    pub full_text: String,
}

impl Article {
    pub fn date(&self) -> NaiveDate {
        self.published_at.date()
    }
}

/// The three article sections a sentiment score can be taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Heading,
    Synopsis,
    FullText,
}

impl Section {
    pub const ALL: [Section; 3] = [Section::Heading, Section::Synopsis, Section::FullText];

    pub fn name(self) -> &'static str {
        match self {
            Section::Heading => "heading",
            Section::Synopsis => "synopsis",
            Section::FullText => "full_text",
        }
    }

    /// The cleaned text of this section in `article`.
    pub fn text_of(self, article: &Article) -> &str {
        match self {
            Section::Heading => &article.heading,
            Section::Synopsis => &article.synopsis,
            Section::FullText => &article.full_text,
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ticker symbol plus the company names it trades under, used for whole-word
/// matching against article text. Names are lowercased at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickerAliases {
    pub ticker: String,
    pub names: Vec<String>,
}

impl TickerAliases {
    pub fn new(ticker: impl Into<String>, names: &[&str]) -> Self {
        TickerAliases {
            ticker: ticker.into(),
            names: names.iter().map(|n| n.trim().to_lowercase()).collect(),
        }
    }
}

/// Load a ticker alias file: CSV rows of `ticker, name1, ..., nameK`
/// (variable width). Names are lowercased; empty cells are dropped; rows
/// repeating a ticker merge their names into the earlier row with a warning.
/// `#`-prefixed lines are comments.
pub fn load_aliases(path: &Path) -> Result<(Vec<TickerAliases>, Vec<String>)> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out: Vec<TickerAliases> = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let ticker = match cells.next() {
            Some(t) if !t.is_empty() => t.to_string(),
            _ => {
                warnings.push(format!("line {line_no}: missing ticker, row skipped"));
                continue;
            }
        };
        let names: Vec<String> = cells
            .filter(|c| !c.is_empty())
            .map(str::to_lowercase)
            .collect();
        if names.is_empty() {
            warnings.push(format!("line {line_no}: ticker {ticker} has no names, row skipped"));
            continue;
        }
        match out.iter_mut().find(|a| a.ticker == ticker) {
            Some(existing) => {
                warnings.push(format!("line {line_no}: ticker {ticker} repeated, names merged"));
                for name in names {
                    if !existing.names.contains(&name) {
                        existing.names.push(name);
                    }
                }
            }
            None => out.push(TickerAliases { ticker, names }),
        }
    }
    Ok((out, warnings))
}

/// Input format of an article dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArticleFormat {
    Jsonl,
    Csv,
}

impl ArticleFormat {
    /// Guess from a file extension; `.csv` is CSV, everything else JSONL.
    pub fn from_path(path: &Path) -> ArticleFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ArticleFormat::Csv,
            _ => ArticleFormat::Jsonl,
        }
    }
}

/// Outcome of [`ingest_articles`]: the surviving articles plus counts for the
/// ingest summary.
#[derive(Debug, Clone)]
pub struct IngestOutcome {
    /// Cleaned, deduplicated articles in publication order.
    pub articles: Vec<Article>,
    /// Records read from the file (blank lines excluded).
    pub read: usize,
    /// Records that parsed and cleaned successfully, before deduplication.
    pub cleaned: usize,
    /// Records dropped for a missing heading or unparseable date.
    pub skipped: usize,
    /// One message per skipped or suspicious record, with its line number.
    pub warnings: Vec<String>,
}

/// Read, clean, deduplicate and sort an article dump.
///
/// Records that fail to parse are skipped with a warning naming the line;
/// only an unreadable file is fatal. Duplicates share a lowercased heading
/// and publication date; the first occurrence in file order wins. The result
/// is stably sorted by publication timestamp.
pub fn ingest_articles(path: &Path, format: ArticleFormat) -> Result<IngestOutcome> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut articles = Vec::new();
    let mut read = 0usize;
    let mut skipped = 0usize;
    let mut warnings = Vec::new();

    match format {
        ArticleFormat::Jsonl => {
            for (idx, line) in reader.lines().enumerate() {
                let line_no = idx + 1;
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                read += 1;
                match parse_jsonl_record(&line, line_no) {
                    Ok(article) => articles.push(article),
                    Err(msg) => {
                        skipped += 1;
                        warnings.push(msg);
                    }
                }
            }
        }
        ArticleFormat::Csv => {
            let mut csv_reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_reader(reader);
            let headers = csv_reader
                .headers()
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
                .clone();
            for (idx, record) in csv_reader.records().enumerate() {
                let line_no = idx + 2; // header is line 1
                let record = match record {
                    Ok(r) => r,
                    Err(e) => {
                        read += 1;
                        skipped += 1;
                        warnings.push(format!("line {line_no}: {e}"));
                        continue;
                    }
                };
                read += 1;
                let field = |name: &str| -> &str {
                    headers
                        .iter()
                        .position(|h| h.eq_ignore_ascii_case(name))
                        .and_then(|i| record.get(i))
                        .unwrap_or("")
                };
                match build_article(
                    field("id"),
                    field("published_at"),
                    field("sector"),
                    field("heading"),
                    field("synopsis"),
                    field("full_text"),
                    line_no,
                ) {
                    Ok(article) => articles.push(article),
                    Err(msg) => {
                        skipped += 1;
                        warnings.push(msg);
                    }
                }
            }
        }
    }

    let cleaned = articles.len();
    let mut articles = deduplicate(articles);
    articles.sort_by_key(|a| a.published_at);

    Ok(IngestOutcome { articles, read, cleaned, skipped, warnings })
}

fn parse_jsonl_record(line: &str, line_no: usize) -> std::result::Result<Article, String> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| format!("line {line_no}: bad JSON: {e}"))?;
    let get = |key: &str| value.get(key).and_then(|v| v.as_str()).unwrap_or("");
    build_article(
        get("id"),
        get("published_at"),
        get("sector"),
        get("heading"),
        get("synopsis"),
        get("full_text"),
        line_no,
    )
}

fn build_article(
    id: &str,
    published_at: &str,
    sector: &str,
    heading: &str,
    synopsis: &str,
    full_text: &str,
    line_no: usize,
) -> std::result::Result<Article, String> {
    let published_at = parse_timestamp(published_at)
        .ok_or_else(|| format!("line {line_no}: unparseable date `{published_at}`"))?;
    let heading = clean_text(heading);
    if heading.is_empty() {
        return Err(format!("line {line_no}: empty heading after cleaning"));
    }
    let id = if id.trim().is_empty() { format!("line-{line_no}") } else { id.trim().to_string() };
    Ok(Article {
        id,
        published_at,
        sector: clean_text(sector),
        heading,
        synopsis: clean_text(synopsis),
        full_text: clean_text(full_text),
    })
}

/// Parse a publication timestamp. Accepts RFC 3339, `YYYY-MM-DDTHH:MM:SS`,
/// `YYYY-MM-DD HH:MM:SS` and bare `YYYY-MM-DD` (midnight).
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(raw) {
        return Some(dt.naive_local());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Strip HTML tags, decode entities, collapse whitespace runs and trim.
///
/// The pass repeats until the text stops changing, so the function is
/// idempotent even on doubly escaped input (`&amp;amp;` fully unwraps, and
/// markup revealed by entity decoding is stripped on the next round).
pub fn clean_text(raw: &str) -> String {
    let mut current = raw.to_string();
    loop {
        let next = clean_pass(&current);
        if next == current {
            return next;
        }
        current = next;
    }
}

fn clean_pass(text: &str) -> String {
    let stripped = strip_tags(text);
    let decoded = decode_entities(&stripped);
    collapse_whitespace(&decoded)
}

/// Remove `<...>` spans. A `<` without a later `>` is kept literally.
fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        match rest[start..].find('>') {
            Some(rel_end) => {
                out.push_str(&rest[..start]);
                // Tags act as token separators; keep a space so "a<br>b"
                // does not fuse into "ab".
                out.push(' ');
                rest = &rest[start + rel_end + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

/// Decode the common named entities plus numeric `&#NN;` / `&#xHH;` forms.
/// Unknown or malformed entities are left untouched.
fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('&') {
        out.push_str(&rest[..start]);
        let tail = &rest[start..];
        match tail.find(';').filter(|&i| i <= 32) {
            Some(end) => {
                let entity = &tail[1..end];
                match decode_entity(entity) {
                    Some(decoded) => out.push_str(&decoded),
                    None => out.push_str(&tail[..=end]),
                }
                rest = &tail[end + 1..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entity(entity: &str) -> Option<String> {
    let named = match entity {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        _ => None,
    };
    if let Some(c) = named {
        return Some(c.to_string());
    }
    let code = entity.strip_prefix('#')?;
    let value = if let Some(hex) = code.strip_prefix('x').or_else(|| code.strip_prefix('X')) {
        u32::from_str_radix(hex, 16).ok()?
    } else {
        code.parse::<u32>().ok()?
    };
    char::from_u32(value).map(String::from)
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_run = false;
    for c in text.chars() {
        if c.is_whitespace() {
            in_run = true;
        } else {
            if in_run && !out.is_empty() {
                out.push(' ');
            }
            in_run = false;
            out.push(c);
        }
    }
    out
}

/// Keep the first occurrence per (lowercased heading, publication date) key,
/// preserving input order.
pub fn deduplicate(articles: Vec<Article>) -> Vec<Article> {
    let mut seen: HashSet<(String, NaiveDate)> = HashSet::with_capacity(articles.len());
    articles
        .into_iter()
        .filter(|a| seen.insert((a.heading.to_lowercase(), a.date())))
        .collect()
}

/// True iff the ticker symbol or any alias occurs in the chosen section as a
/// whole word, case-insensitively. Word boundaries are transitions to
/// non-alphanumeric characters (or the ends of the text), so "IT" does not
/// match inside "ITEM" but "M&M" matches as a unit.
pub fn match_ticker(article: &Article, section: Section, aliases: &TickerAliases) -> bool {
    let haystack = section.text_of(article).to_lowercase();
    let ticker = aliases.ticker.to_lowercase();
    std::iter::once(ticker.as_str())
        .chain(aliases.names.iter().map(String::as_str))
        .any(|needle| contains_whole_word(&haystack, needle))
}

fn contains_whole_word(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    for (start, _) in haystack.match_indices(needle) {
        let before_ok = haystack[..start]
            .chars()
            .next_back()
            .map_or(true, |c| !c.is_alphanumeric());
        let after_ok = haystack[start + needle.len()..]
            .chars()
            .next()
            .map_or(true, |c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
    }
    false
}
