/// One named pass/fail item of an invariant battery.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: String,
}

impl CheckItem {
    /// Item that passes when the measured deviation is below the tolerance.
    pub fn threshold(
        name: impl Into<String>,
        max_deviation: f64,
        tolerance: f64,
        notes: String,
    ) -> Self {
        CheckItem {
            name: name.into(),
            max_deviation,
            tolerance,
            pass: max_deviation < tolerance,
            notes,
        }
    }

    /// Item with an externally decided verdict.
    pub fn flag(name: impl Into<String>, pass: bool, notes: String) -> Self {
        CheckItem {
            name: name.into(),
            max_deviation: if pass { 0.0 } else { 1.0 },
            tolerance: 1.0,
            pass,
            notes,
        }
    }
}
