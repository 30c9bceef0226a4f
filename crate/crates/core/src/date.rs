//! Proleptic Gregorian calendar dates stored as days since 1970-01-01.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(i32);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid ISO-8601 date")]
pub struct DateParseError;

impl Date {
    pub const fn from_days(days: i32) -> Self {
        Date(days)
    }

    pub const fn days(self) -> i32 {
        self.0
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(Date(days_from_civil(year, month, day)))
    }

    pub fn ymd(self) -> (i32, u32, u32) {
        civil_from_days(self.0)
    }

    pub fn year(self) -> i32 {
        self.ymd().0
    }

    /// 1-based day of the year.
    pub fn ordinal(self) -> u32 {
        let (y, _, _) = self.ymd();
        (self.0 - days_from_civil(y, 1, 1)) as u32 + 1
    }

    pub fn add_days(self, n: i64) -> Self {
        Date((self.0 as i64 + n) as i32)
    }

    pub fn days_until(self, other: Date) -> i64 {
        other.0 as i64 - self.0 as i64
    }

    /// Compact `YYYYMMDD` form used by some weather services.
    pub fn compact(self) -> alloc::string::String {
        let (y, m, d) = self.ymd();
        alloc::format!("{y:04}{m:02}{d:02}")
    }

    pub fn parse_compact(s: &str) -> Result<Self, DateParseError> {
        if s.len() != 8 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(DateParseError);
        }
        let y: i32 = s[0..4].parse().map_err(|_| DateParseError)?;
        let m: u32 = s[4..6].parse().map_err(|_| DateParseError)?;
        let d: u32 = s[6..8].parse().map_err(|_| DateParseError)?;
        Date::from_ymd(y, m, d).ok_or(DateParseError)
    }
}

fn is_leap(y: i32) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn days_in_month(y: i32, m: u32) -> u32 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(y) => 29,
        _ => 28,
    }
}

// Hinnant's civil-from-days algorithms.
fn days_from_civil(y: i32, m: u32, d: u32) -> i32 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = (y - era * 400) as u32;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe as i32 - 719_468
}

fn civil_from_days(z: i32) -> (i32, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u32;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i32 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (if m <= 2 { y + 1 } else { y }, m, d)
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = self.ymd();
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl FromStr for Date {
    type Err = DateParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(DateParseError);
        }
        let digits = |r: core::ops::Range<usize>| -> Result<u32, DateParseError> {
            let part = &s[r];
            if !part.bytes().all(|c| c.is_ascii_digit()) {
                return Err(DateParseError);
            }
            part.parse().map_err(|_| DateParseError)
        };
        let y = digits(0..4)? as i32;
        let m = digits(5..7)?;
        let d = digits(8..10)?;
        Date::from_ymd(y, m, d).ok_or(DateParseError)
    }
}

impl Serialize for Date {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn epoch_and_roundtrip() {
        assert_eq!(Date::from_ymd(1970, 1, 1).unwrap().days(), 0);
        let d: Date = "2020-02-29".parse().unwrap();
        assert_eq!(d.to_string(), "2020-02-29");
        assert_eq!(d.add_days(1).to_string(), "2020-03-01");
        assert_eq!(d.ordinal(), 60);
        assert_eq!(Date::parse_compact("20200131").unwrap().to_string(), "2020-01-31");
    }

    #[test]
    fn rejects_invalid() {
        assert!("2019-02-29".parse::<Date>().is_err());
        assert!("2019-13-01".parse::<Date>().is_err());
        assert!("2019-1-01".parse::<Date>().is_err());
        assert!("abcd-01-01".parse::<Date>().is_err());
    }

    #[test]
    fn civil_roundtrip_over_range() {
        for z in -800_000..800_000 {
            if z % 997 != 0 {
                continue;
            }
            let d = Date::from_days(z);
            let (y, m, dd) = d.ymd();
            assert_eq!(Date::from_ymd(y, m, dd), Some(d));
        }
    }
}
