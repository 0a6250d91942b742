//! Pass/fail checks and reproducible machine-readable output.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

/// Version of the machine-readable report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// One identity or inequality with its measured value.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    /// The identity being tested, written out.
    pub identity: String,
    pub value: f64,
    pub limit: f64,
    pub relation: Relation,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    Above,
    Equal,
    Holds,
}

impl Check {
    /// Passes iff `value ≤ limit`.
    pub fn at_most(identity: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            identity: identity.into(),
            value,
            limit,
            relation: Relation::AtMost,
            passed: value <= limit,
        }
    }

    /// Passes iff `value > limit`.
    pub fn above(identity: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            identity: identity.into(),
            value,
            limit,
            relation: Relation::Above,
            passed: value > limit,
        }
    }

    /// Integer equality.
    pub fn equal(identity: impl Into<String>, value: i64, expected: i64) -> Self {
        Self {
            identity: identity.into(),
            value: value as f64,
            limit: expected as f64,
            relation: Relation::Equal,
            passed: value == expected,
        }
    }

    pub fn holds(identity: impl Into<String>, passed: bool) -> Self {
        Self {
            identity: identity.into(),
            value: if passed { 1.0 } else { 0.0 },
            limit: 1.0,
            relation: Relation::Holds,
            passed,
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        match self.relation {
            Relation::AtMost => format!("{tag}  {}: {:.3e} (limit {:.1e})", self.identity, self.value, self.limit),
            Relation::Above => format!("{tag}  {}: {:.6e} (must exceed {:.1e})", self.identity, self.value, self.limit),
            Relation::Equal => format!("{tag}  {}: {} (expected {})", self.identity, self.value, self.limit),
            Relation::Holds => format!("{tag}  {}", self.identity),
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn render_checks(checks: &[Check]) -> String {
    checks.iter().map(|c| c.line() + "\n").collect()
}

/// Compact JSON with every float written as `{:.16e}` and non-finite floats as `null`.
struct FixedDigits(CompactFormatter);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` deterministically with 17 significant digits per float.
pub fn to_json<T: Serialize>(value: &T) -> crate::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(CompactFormatter));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}
