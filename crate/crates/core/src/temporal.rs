//! Calendar dates and validity intervals derived from temporal provenance.
//!
//! `from`/`since` open an interval, `to`/`until` close it. Bounds are closed
//! and a missing bound is unbounded. Partial dates (`1991`, `1991-05`) cover
//! their whole year or month.

use crate::profile::ProvPair;

/// Day ordinal `yyyymmdd`; only used for ordering.
pub type Day = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Date {
    pub year: u16,
    pub month: Option<u8>,
    pub day: Option<u8>,
}

impl Date {
    /// Parses `YYYY`, `YYYY-MM` or `YYYY-MM-DD`; `.` and `/` are accepted as separators.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let mut parts = s.split(['-', '.', '/']);
        let year = parts.next()?;
        if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let year: u16 = year.parse().ok()?;
        let month = match parts.next() {
            None => None,
            Some(m) => Some(parse_component(m, 1, 12)?),
        };
        let day = match parts.next() {
            None => None,
            Some(d) => Some(parse_component(d, 1, 31)?),
        };
        if parts.next().is_some() {
            return None;
        }
        Some(Self { year, month, day })
    }

    /// True for dates with year, month and day.
    pub fn is_full(&self) -> bool {
        self.day.is_some()
    }

    pub fn first_day(&self) -> Day {
        day(self.year, self.month.unwrap_or(1), self.day.unwrap_or(1))
    }

    pub fn last_day(&self) -> Day {
        day(self.year, self.month.unwrap_or(12), self.day.unwrap_or(31))
    }
}

fn parse_component(s: &str, min: u8, max: u8) -> Option<u8> {
    if s.is_empty() || s.len() > 2 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v: u8 = s.parse().ok()?;
    (min..=max).contains(&v).then_some(v)
}

fn day(y: u16, m: u8, d: u8) -> Day {
    y as u32 * 10_000 + m as u32 * 100 + d as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

impl Bound {
    pub fn of_pkey(pkey: &str) -> Option<Self> {
        match pkey {
            "from" | "since" => Some(Bound::Lower),
            "to" | "until" => Some(Bound::Upper),
            _ => None,
        }
    }
}

/// Closed interval of days; `None` on a side means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Interval {
    pub lo: Option<Day>,
    pub hi: Option<Day>,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval { lo: None, hi: None };

    pub fn span(date: Date) -> Self {
        Self { lo: Some(date.first_day()), hi: Some(date.last_day()) }
    }

    /// Validity interval of a provenance list, or `None` when it carries no
    /// temporal pair. With repeated bounds the narrowest one wins.
    pub fn from_prov(prov: &[ProvPair]) -> Option<Self> {
        let mut out = Interval::UNBOUNDED;
        let mut temporal = false;
        for pair in prov {
            let (Some(bound), Some(date)) = (Bound::of_pkey(&pair.pkey), Date::parse(&pair.pvalue))
            else {
                continue;
            };
            temporal = true;
            match bound {
                Bound::Lower => {
                    let d = date.first_day();
                    out.lo = Some(out.lo.map_or(d, |lo| lo.max(d)));
                }
                Bound::Upper => {
                    let d = date.last_day();
                    out.hi = Some(out.hi.map_or(d, |hi| hi.min(d)));
                }
            }
        }
        temporal.then_some(out)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        let below = matches!((self.lo, other.hi), (Some(lo), Some(hi)) if lo > hi);
        let above = matches!((other.lo, self.hi), (Some(lo), Some(hi)) if lo > hi);
        !below && !above
    }
}
