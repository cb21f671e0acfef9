//! ISO-8601 UTC timestamps as used in every file format.

use chrono::{DateTime, NaiveDateTime, Utc};
use fearlab_core::Timestamp;

/// Accepts RFC 3339 with any offset, or a bare `YYYY-MM-DDTHH:MM[:SS]`
/// (optionally with a space instead of `T`) read as UTC.
pub fn parse(text: &str) -> Option<Timestamp> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.timestamp());
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())
        .map(|t| t.and_utc().timestamp())
}

pub fn format(ts: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| ts.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_variants() {
        let t = parse("2019-05-03T08:00:00Z").unwrap();
        assert_eq!(t, 1_556_870_400);
        assert_eq!(format(t), "2019-05-03T08:00:00Z");
        assert_eq!(parse("2019-05-03T09:00:00+01:00"), Some(t));
        assert_eq!(parse("2019-05-03 08:00"), Some(t));
        assert_eq!(parse("yesterday"), None);
    }
}
