use gasdemand_core::calendar::{days_in_year, easter_sunday, is_leap_year};
use gasdemand_core::{CivilDate, HolidayCalendar, Weekday};
use proptest::prelude::*;

/// Exhaustive argmin over every day of the previous year.
fn similar_day_brute_force(cal: &HolidayCalendar, t: CivilDate) -> CivilDate {
    let prev = t.year() - 1;
    if cal.is_holiday(t) {
        let in_prev = CivilDate::ymd(prev, 1, 1).range_inclusive(CivilDate::ymd(prev, 12, 31));
        if let Some(m) = cal.fixed_holidays().iter().find(|&&(m, d)| (m, d) == (t.month(), t.day())) {
            return CivilDate::ymd(prev, m.0, m.1);
        }
        let easter = easter_sunday(t.year()).unwrap();
        let offset = t.days_since(easter);
        return in_prev.into_iter().find(|d| d.days_since(easter_sunday(prev).unwrap()) == offset).unwrap();
    }
    let target = t.yearday() as i64;
    let mut best: Option<(i64, CivilDate)> = None;
    for d in CivilDate::ymd(prev, 1, 1).range_inclusive(CivilDate::ymd(prev, 12, 31)) {
        if d.weekday() != t.weekday() || cal.is_holiday(d) {
            continue;
        }
        let dist = (d.yearday() as i64 - target).abs();
        if best.is_none_or(|(b, _)| dist < b) {
            best = Some((dist, d));
        }
    }
    best.unwrap().1
}

/// Gauss's Easter algorithm with the Gregorian exceptions.
fn gauss_easter(year: i32) -> CivilDate {
    let a = year % 19;
    let b = year % 4;
    let c = year % 7;
    let k = year / 100;
    let p = (13 + 8 * k) / 25;
    let q = k / 4;
    let m = (15 - p + k - q) % 30;
    let n = (4 + k - q) % 7;
    let d = (19 * a + m) % 30;
    let e = (2 * b + 4 * c + 6 * d + n) % 7;
    let mut day = 22 + d + e;
    if d == 29 && e == 6 {
        day = 50;
    } else if d == 28 && e == 6 && (11 * m + 11) % 30 < 19 {
        day = 49;
    }
    CivilDate::ymd(year, 3, 1).add_days(day as i64 - 1)
}

#[test]
fn similar_day_matches_exhaustive_search_2008_to_2017() {
    let cal = HolidayCalendar::italy();
    for t in CivilDate::ymd(2008, 1, 1).range_inclusive(CivilDate::ymd(2017, 12, 31)) {
        let sim = cal.similar_day(t);
        assert_eq!(sim, similar_day_brute_force(&cal, t), "{t}");
        assert_eq!(sim.year(), t.year() - 1, "{t}");
        if !cal.is_holiday(t) {
            assert_eq!(sim.weekday(), t.weekday(), "{t}");
            assert!(!cal.is_holiday(sim), "{t}");
        }
    }
}

#[test]
fn similar_day_examples() {
    let cal = HolidayCalendar::italy();
    assert_eq!(cal.similar_day(CivilDate::ymd(2017, 7, 12)), CivilDate::ymd(2016, 7, 13));
    assert_eq!(cal.similar_day(CivilDate::ymd(2017, 4, 16)), CivilDate::ymd(2016, 3, 27));
    assert_eq!(cal.similar_day(CivilDate::ymd(2017, 4, 17)), CivilDate::ymd(2016, 3, 28));
    let leap = CivilDate::ymd(2016, 2, 29);
    let sim = cal.similar_day(leap);
    assert_eq!(sim.weekday(), Weekday::Monday);
    assert_eq!(sim, CivilDate::ymd(2015, 3, 2));
}

#[test]
fn easter_matches_published_table() {
    let table = [
        (2010, 4, 4),
        (2011, 4, 24),
        (2012, 4, 8),
        (2013, 3, 31),
        (2014, 4, 20),
        (2015, 4, 5),
        (2016, 3, 27),
        (2017, 4, 16),
        (2018, 4, 1),
        (2019, 4, 21),
        (2020, 4, 12),
    ];
    for (y, m, d) in table {
        assert_eq!(easter_sunday(y).unwrap(), CivilDate::ymd(y, m, d));
    }
}

#[test]
fn easter_agrees_with_gauss_over_supported_range() {
    let cal = HolidayCalendar::italy();
    for y in 1900..=2200 {
        let e = easter_sunday(y).unwrap();
        assert_eq!(e, gauss_easter(y), "{y}");
        assert_eq!(e.weekday(), Weekday::Sunday);
        assert_eq!(e.succ().weekday(), Weekday::Monday);
        assert!(cal.is_holiday(e) && cal.is_holiday(e.succ()));
    }
    assert!(easter_sunday(1899).is_err());
    assert!(easter_sunday(2201).is_err());
}

#[test]
fn holiday_predicates_on_known_dates() {
    let cal = HolidayCalendar::italy();
    assert!(cal.is_holiday(CivilDate::ymd(2017, 12, 25)));
    assert!(cal.is_holiday(CivilDate::ymd(2017, 4, 17)));
    assert!(!cal.is_holiday(CivilDate::ymd(2017, 3, 1)));
    assert!(cal.is_day_after_holiday(CivilDate::ymd(2017, 1, 2)));
    assert!(cal.is_bridge_holiday(CivilDate::ymd(2017, 4, 24)));
    assert!(!cal.is_working_day(CivilDate::ymd(2017, 3, 4)));
}

#[test]
fn yearday_is_a_bijection() {
    for y in [1900, 2000, 2015, 2016, 2100] {
        let len = days_in_year(y);
        assert_eq!(len, if is_leap_year(y) { 366 } else { 365 });
        let days: Vec<u32> = CivilDate::ymd(y, 1, 1).range_inclusive(CivilDate::ymd(y, 12, 31)).map(|d| d.yearday()).collect();
        assert_eq!(days, (1..=len).collect::<Vec<_>>());
        for yd in 1..=len {
            assert_eq!(CivilDate::from_yearday(y, yd).unwrap().yearday(), yd);
        }
    }
}

fn any_date() -> impl Strategy<Value = CivilDate> {
    (CivilDate::ymd(1902, 1, 1).to_days()..CivilDate::ymd(2199, 12, 31).to_days()).prop_map(CivilDate::from_days)
}

proptest! {
    #[test]
    fn flags_imply_working_day(t in any_date()) {
        let cal = HolidayCalendar::italy();
        if cal.is_bridge_holiday(t) || cal.is_day_after_holiday(t) {
            prop_assert!(cal.is_working_day(t));
        }
        if t.weekday().is_weekend() {
            prop_assert!(!cal.is_working_day(t));
        }
    }

    #[test]
    fn similar_day_constraints(t in any_date()) {
        let cal = HolidayCalendar::italy();
        let sim = cal.similar_day(t);
        prop_assert_eq!(sim.year(), t.year() - 1);
        if !cal.is_holiday(t) {
            prop_assert_eq!(sim.weekday(), t.weekday());
            prop_assert!(!cal.is_holiday(sim));
            prop_assert!((sim.yearday() as i64 - t.yearday() as i64).abs() <= 6 + 7);
        }
    }

    #[test]
    fn day_arithmetic_round_trips(t in any_date(), n in -5000i64..5000) {
        prop_assert_eq!(t.add_days(n).days_since(t), n);
        prop_assert_eq!(CivilDate::from_days(t.to_days()), t);
        prop_assert_eq!(t.succ().pred(), t);
    }
}
