//! Business-day calendar shared by the sentiment and price pipelines.
//!
//! Trading days are taken from the price file itself rather than synthesized
//! from weekdays, so exchange holidays are handled implicitly: a date is a
//! business day exactly when the exchange produced a bar for it.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Ordered set of trading dates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BusinessCalendar {
    dates: BTreeSet<NaiveDate>,
}

impl BusinessCalendar {
    pub fn from_dates<I: IntoIterator<Item = NaiveDate>>(dates: I) -> Self {
        BusinessCalendar { dates: dates.into_iter().collect() }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.contains(&date)
    }

    /// Trading dates in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.dates.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn first(&self) -> Option<NaiveDate> {
        self.dates.iter().next().copied()
    }

    pub fn last(&self) -> Option<NaiveDate> {
        self.dates.iter().next_back().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn membership_and_order() {
        let cal = BusinessCalendar::from_dates([
            date("2021-01-05"),
            date("2021-01-04"),
            date("2021-01-06"),
        ]);
        assert_eq!(cal.len(), 3);
        assert!(cal.contains(date("2021-01-04")));
        assert!(!cal.contains(date("2021-01-09")));
        let ordered: Vec<NaiveDate> = cal.iter().collect();
        assert_eq!(ordered.first().copied(), cal.first());
        assert!(ordered.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn duplicates_collapse() {
        let cal = BusinessCalendar::from_dates([date("2021-01-04"), date("2021-01-04")]);
        assert_eq!(cal.len(), 1);
    }
}
