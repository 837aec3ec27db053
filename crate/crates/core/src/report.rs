//! Outcome record for a single inequality check.
//!
//! Every check in this crate produces a `CheckReport`. Reports come in two
//! gate classes:
//!
//! * `exact` — identities and inequalities that hold on the discrete objects
//!   themselves (heat symmetry, min-stability, oscillation contraction, ...).
//!   These carry tight tolerances (typically 1e-8 or better) and a failure is
//!   a bug, not a discretization artifact.
//! * `trend` — curvature- or limit-dependent statements that a finite graph
//!   only approximates. These record measured constants and are judged across
//!   refinement levels.
//!
//! The gate class is recorded at the front of `notes` as `gate=exact;` or
//! `gate=trend;` so the serialized form stays `{name, pass, max_violation,
//! tolerance, witnesses, notes}`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Exact,
    Trend,
}

impl Gate {
    fn label(self) -> &'static str {
        match self {
            Gate::Exact => "exact",
            Gate::Trend => "trend",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// Largest violation of the tested inequality (negative or zero when the
    /// inequality holds with slack everywhere).
    pub max_violation: f64,
    pub tolerance: f64,
    /// Vertex ids where the violation exceeds the tolerance.
    pub witnesses: Vec<usize>,
    pub notes: String,
}

/// JSON has no infinities; unbounded tolerances and sentinel violations are
/// clamped to ±f64::MAX so serialized reports parse back.
fn finite(v: f64) -> f64 {
    if v.is_nan() {
        f64::MAX
    } else {
        v.clamp(f64::MIN, f64::MAX)
    }
}

impl CheckReport {
    pub fn new(name: &str, gate: Gate, max_violation: f64, tolerance: f64) -> Self {
        let max_violation = finite(max_violation);
        let tolerance = finite(tolerance);
        CheckReport {
            name: name.to_string(),
            pass: max_violation <= tolerance,
            max_violation,
            tolerance,
            witnesses: Vec::new(),
            notes: format!("gate={};", gate.label()),
        }
    }

    /// Report for a check whose precondition failed; never passes.
    pub fn precondition_failure(name: &str, gate: Gate, detail: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            pass: false,
            max_violation: f64::MAX,
            tolerance: 0.0,
            witnesses: Vec::new(),
            notes: format!("gate={}; precondition failed: {}", gate.label(), detail),
        }
    }

    pub fn with_witnesses(mut self, witnesses: Vec<usize>) -> Self {
        self.witnesses = witnesses;
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.notes.push_str(" ");
        self.notes.push_str(note);
        self
    }

    /// Diagnostics record a value without enforcing a threshold.
    pub fn diagnostic(name: &str, measured: f64, note: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            pass: true,
            max_violation: finite(measured),
            tolerance: f64::MAX,
            witnesses: Vec::new(),
            notes: format!("gate=trend; {}", note),
        }
    }

    pub fn is_exact_gate(&self) -> bool {
        self.notes.starts_with("gate=exact;")
    }
}
