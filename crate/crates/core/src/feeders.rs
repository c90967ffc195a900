//! Published MATPOWER test feeders, embedded verbatim.

/// Baran & Wu 33-bus feeder.
pub const CASE33BW: &str = include_str!("../data/case33bw.m");
/// 69-bus feeder.
pub const CASE69: &str = include_str!("../data/case69.m");
/// 141-bus feeder.
pub const CASE141: &str = include_str!("../data/case141.m");

/// `(name, source)` for every embedded feeder.
pub const ALL: [(&str, &str); 3] = [("case33bw", CASE33BW), ("case69", CASE69), ("case141", CASE141)];

/// Source of a feeder by name, with or without the `.m` suffix.
pub fn by_name(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".m").unwrap_or(name);
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
