//! Named pass/fail checks shared by the walk, martingale and report layers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates, then pass; all-inconclusive (or empty) stays
    /// inconclusive.
    pub fn combine<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Verdict {
        let mut out = Verdict::Inconclusive;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Pass => out = Verdict::Pass,
                Verdict::Inconclusive => {}
            }
        }
        out
    }
}

/// One measured-versus-bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub verdict: Verdict,
    pub measured: f64,
    pub bound: f64,
    /// Half-width of the confidence interval applied to `measured`.
    pub ci: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl NamedCheck {
    pub fn new(name: impl Into<String>, verdict: Verdict, measured: f64, bound: f64, ci: f64) -> Self {
        NamedCheck {
            name: name.into(),
            verdict,
            measured,
            bound,
            ci,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}
