//! Column names shared by the analysis frames.

pub const ER: &str = "ER";
pub const VOL: &str = "VOL";
pub const G: &str = "G";
pub const B: &str = "B";
pub const V: &str = "V";
pub const SA: &str = "SA";
pub const SR: &str = "SR";

/// Sentiment analytics paired with the excess return.
pub const RETURN_SENTIMENT: [&str; 4] = [G, B, SR, SA];
/// Sentiment and volume analytics paired with the volatility proxy.
pub const VOLATILITY_SENTIMENT: [&str; 5] = [G, B, SR, SA, V];
