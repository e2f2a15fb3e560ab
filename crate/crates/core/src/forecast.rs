//! Forecast output types shared by the three model families.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which model family produced a forecast. The declaration order is also
/// the documented tie-break order for meta-labels and forest votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelTag {
    Arima,
    Lstm,
    Gam,
}

impl ModelTag {
    pub const ALL: [ModelTag; 3] = [ModelTag::Arima, ModelTag::Lstm, ModelTag::Gam];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Arima => "ARIMA",
            ModelTag::Lstm => "LSTM",
            ModelTag::Gam => "GAM",
        }
    }

    /// Stable class index used by the meta-model classifier.
    pub fn class_index(self) -> usize {
        match self {
            ModelTag::Arima => 0,
            ModelTag::Lstm => 1,
            ModelTag::Gam => 2,
        }
    }

    pub fn from_class_index(i: usize) -> Option<ModelTag> {
        ModelTag::ALL.get(i).copied()
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One-step-ahead forecast: a point value with an optional 95% interval.
///
/// The interval is absent for models that cannot produce one (LSTM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub mean: f64,
    pub lower95: Option<f64>,
    pub upper95: Option<f64>,
    pub model: ModelTag,
}

impl ForecastPoint {
    pub fn with_interval(mean: f64, lower95: f64, upper95: f64, model: ModelTag) -> Self {
        debug_assert!(lower95 <= mean && mean <= upper95);
        ForecastPoint {
            mean,
            lower95: Some(lower95),
            upper95: Some(upper95),
            model,
        }
    }

    pub fn point_only(mean: f64, model: ModelTag) -> Self {
        ForecastPoint {
            mean,
            lower95: None,
            upper95: None,
            model,
        }
    }

    pub fn has_interval(&self) -> bool {
        self.lower95.is_some() && self.upper95.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_order_is_tie_break_order() {
        assert!(ModelTag::Arima < ModelTag::Lstm);
        assert!(ModelTag::Lstm < ModelTag::Gam);
    }

    #[test]
    fn class_index_round_trip() {
        for tag in ModelTag::ALL {
            assert_eq!(ModelTag::from_class_index(tag.class_index()), Some(tag));
        }
        assert_eq!(ModelTag::from_class_index(3), None);
    }
}
