//! Civil dates, the Italian holiday calendar and the similar-day mapping.

use core::fmt;
use core::str::FromStr;

/// Errors from date construction and Easter computation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalendarError {
    /// The triple does not name a Gregorian date.
    #[error("invalid date {year:04}-{month:02}-{day:02}")]
    InvalidDate {
        /// Year.
        year: i32,
        /// Month.
        month: u32,
        /// Day of month.
        day: u32,
    },
    /// Text is not an ISO-8601 `YYYY-MM-DD` date.
    #[error("malformed ISO-8601 date")]
    Malformed,
    /// Easter tables are only supported for 1900..=2200.
    #[error("year {0} outside the supported range 1900..=2200")]
    YearOutOfRange(i32),
}

/// Day of the week, Monday first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Weekday {
    /// Monday.
    Monday,
    /// Tuesday.
    Tuesday,
    /// Wednesday.
    Wednesday,
    /// Thursday.
    Thursday,
    /// Friday.
    Friday,
    /// Saturday.
    Saturday,
    /// Sunday.
    Sunday,
}

impl Weekday {
    /// All seven days, Monday first.
    pub const ALL: [Weekday; 7] = [
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
        Weekday::Sunday,
    ];

    /// 0 for Monday through 6 for Sunday.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Saturday or Sunday.
    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Saturday | Weekday::Sunday)
    }
}

/// A proleptic Gregorian calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "alloc::string::String", into = "alloc::string::String"))]
pub struct CivilDate {
    year: i32,
    month: u8,
    day: u8,
}

/// Whether `year` has 366 days.
pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

/// Number of days in `year`.
pub fn days_in_year(year: i32) -> u32 {
    if is_leap_year(year) {
        366
    } else {
        365
    }
}

/// Number of days in a month.
pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl CivilDate {
    /// Validated constructor.
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self, CalendarError> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(CalendarError::InvalidDate { year, month, day });
        }
        Ok(Self { year, month: month as u8, day: day as u8 })
    }

    /// Constructor for literals known to be valid. Panics otherwise.
    pub fn ymd(year: i32, month: u32, day: u32) -> Self {
        Self::new(year, month, day).expect("valid civil date")
    }

    /// Year.
    pub fn year(self) -> i32 {
        self.year
    }

    /// Month, 1..=12.
    pub fn month(self) -> u32 {
        self.month as u32
    }

    /// Day of month.
    pub fn day(self) -> u32 {
        self.day as u32
    }

    /// Days since 1970-01-01 (negative before).
    pub fn to_days(self) -> i64 {
        // Hinnant's days_from_civil.
        let y = self.year as i64 - if self.month <= 2 { 1 } else { 0 };
        let era = if y >= 0 { y } else { y - 399 } / 400;
        let yoe = y - era * 400;
        let m = self.month as i64;
        let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + self.day as i64 - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        era * 146_097 + doe - 719_468
    }

    /// Inverse of [`CivilDate::to_days`].
    pub fn from_days(days: i64) -> Self {
        let z = days + 719_468;
        let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
        let doe = z - era * 146_097;
        let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
        let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        let mp = (5 * doy + 2) / 153;
        let day = (doy - (153 * mp + 2) / 5 + 1) as u8;
        let month = if mp < 10 { mp + 3 } else { mp - 9 } as u8;
        let year = (yoe + era * 400 + if month <= 2 { 1 } else { 0 }) as i32;
        Self { year, month, day }
    }

    /// Shift by a signed number of days.
    pub fn add_days(self, n: i64) -> Self {
        Self::from_days(self.to_days() + n)
    }

    /// Next day.
    pub fn succ(self) -> Self {
        self.add_days(1)
    }

    /// Previous day.
    pub fn pred(self) -> Self {
        self.add_days(-1)
    }

    /// Signed day difference `self - other`.
    pub fn days_since(self, other: CivilDate) -> i64 {
        self.to_days() - other.to_days()
    }

    /// Day of the week.
    pub fn weekday(self) -> Weekday {
        // 1970-01-01 was a Thursday.
        let idx = (self.to_days() + 3).rem_euclid(7) as usize;
        Weekday::ALL[idx]
    }

    /// Day number within the year, starting at 1.
    pub fn yearday(self) -> u32 {
        (self.to_days() - CivilDate { year: self.year, month: 1, day: 1 }.to_days()) as u32 + 1
    }

    /// The date with the given day number in `year`, if it exists.
    pub fn from_yearday(year: i32, yearday: u32) -> Option<Self> {
        if yearday == 0 || yearday > days_in_year(year) {
            return None;
        }
        Some(CivilDate { year, month: 1, day: 1 }.add_days(yearday as i64 - 1))
    }

    /// Iterator over every date from `self` to `end` inclusive.
    pub fn range_inclusive(self, end: CivilDate) -> impl Iterator<Item = CivilDate> {
        (self.to_days()..=end.to_days()).map(CivilDate::from_days)
    }
}

impl fmt::Display for CivilDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for CivilDate {
    type Err = CalendarError;

    /// Strict `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(CalendarError::Malformed);
        }
        let digits = |r: core::ops::Range<usize>| -> Result<u32, CalendarError> {
            let mut v = 0u32;
            for &c in &b[r] {
                if !c.is_ascii_digit() {
                    return Err(CalendarError::Malformed);
                }
                v = v * 10 + (c - b'0') as u32;
            }
            Ok(v)
        };
        CivilDate::new(digits(0..4)? as i32, digits(5..7)?, digits(8..10)?)
    }
}

impl TryFrom<alloc::string::String> for CivilDate {
    type Error = CalendarError;
    fn try_from(s: alloc::string::String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CivilDate> for alloc::string::String {
    fn from(d: CivilDate) -> Self {
        alloc::format!("{d}")
    }
}

/// Supported year range for [`easter_sunday`].
pub const EASTER_YEARS: core::ops::RangeInclusive<i32> = 1900..=2200;

/// Gregorian Easter Sunday by the anonymous (Meeus/Jones/Butcher) computus.
pub fn easter_sunday(year: i32) -> Result<CivilDate, CalendarError> {
    if !EASTER_YEARS.contains(&year) {
        return Err(CalendarError::YearOutOfRange(year));
    }
    Ok(computus(year))
}

fn computus(year: i32) -> CivilDate {
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    CivilDate::ymd(year, month as u32, day as u32)
}

/// Which holiday a date is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Holiday {
    /// A holiday on a fixed (month, day).
    Fixed {
        /// Month.
        month: u32,
        /// Day.
        day: u32,
    },
    /// Easter Sunday.
    Easter,
    /// The Monday after Easter.
    EasterMonday,
}

/// A national holiday calendar: fixed-date holidays plus Easter and Easter Monday.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HolidayCalendar {
    fixed: alloc::vec::Vec<(u32, u32)>,
}

impl Default for HolidayCalendar {
    fn default() -> Self {
        Self::italy()
    }
}

impl HolidayCalendar {
    /// The Italian national calendar.
    pub fn italy() -> Self {
        Self {
            fixed: alloc::vec![
                (1, 1),
                (1, 6),
                (4, 25),
                (5, 1),
                (6, 2),
                (8, 15),
                (11, 1),
                (12, 8),
                (12, 25),
                (12, 26),
            ],
        }
    }

    /// Fixed (month, day) holidays.
    pub fn fixed_holidays(&self) -> &[(u32, u32)] {
        &self.fixed
    }

    /// Classify `t`. A fixed-date holiday takes precedence when it coincides
    /// with Easter or Easter Monday.
    pub fn holiday(&self, t: CivilDate) -> Option<Holiday> {
        let (m, d) = (t.month(), t.day());
        if self.fixed.contains(&(m, d)) {
            return Some(Holiday::Fixed { month: m, day: d });
        }
        // Easter falls between March 22 and April 25; Easter Monday by April 26.
        if !(3..=4).contains(&m) {
            return None;
        }
        let easter = computus(t.year());
        if t == easter {
            Some(Holiday::Easter)
        } else if t == easter.succ() {
            Some(Holiday::EasterMonday)
        } else {
            None
        }
    }

    /// Whether `t` is a holiday.
    pub fn is_holiday(&self, t: CivilDate) -> bool {
        self.holiday(t).is_some()
    }

    /// Neither Saturday, Sunday nor a holiday.
    pub fn is_working_day(&self, t: CivilDate) -> bool {
        !t.weekday().is_weekend() && !self.is_holiday(t)
    }

    /// A working day whose previous day is a holiday.
    pub fn is_day_after_holiday(&self, t: CivilDate) -> bool {
        self.is_working_day(t) && self.is_holiday(t.pred())
    }

    /// A working day whose neighbors on both sides are not working days.
    pub fn is_bridge_holiday(&self, t: CivilDate) -> bool {
        self.is_working_day(t) && !self.is_working_day(t.pred()) && !self.is_working_day(t.succ())
    }

    /// The similar day of `t` in the previous year.
    ///
    /// Holidays map to the same holiday one year earlier. Other days map to
    /// the non-holiday day of the previous year with the same weekday and the
    /// nearest yearday; among two equidistant candidates the earlier wins.
    pub fn similar_day(&self, t: CivilDate) -> CivilDate {
        let prev = t.year() - 1;
        match self.holiday(t) {
            Some(Holiday::Fixed { month, day }) => CivilDate::ymd(prev, month, day),
            Some(Holiday::Easter) => computus(prev),
            Some(Holiday::EasterMonday) => computus(prev).succ(),
            None => self.nearest_ordinary_day(prev, t.yearday() as i64, t.weekday()),
        }
    }

    fn nearest_ordinary_day(&self, year: i32, target: i64, weekday: Weekday) -> CivilDate {
        let len = days_in_year(year) as i64;
        let accept = |yd: i64| -> Option<CivilDate> {
            if yd < 1 || yd > len {
                return None;
            }
            let d = CivilDate::from_yearday(year, yd as u32)?;
            (d.weekday() == weekday && !self.is_holiday(d)).then_some(d)
        };
        for offset in 0..=len {
            if let Some(d) = accept(target - offset) {
                return d;
            }
            if let Some(d) = accept(target + offset) {
                return d;
            }
        }
        unreachable!("every year holds non-holiday days of each weekday")
    }
}
