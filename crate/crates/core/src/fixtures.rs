//! The thirteen reference fields and their recorded data.

use serde::{Deserialize, Serialize};

use crate::byformula::PrimeTally;
use crate::cmfield::{CMField, CmError};

const FIELDS_JSON: &str = include_str!("../../../fixtures/fields.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedBy {
    pub tally: PrimeTally,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFixture {
    pub name: String,
    pub label: String,
    pub d: i128,
    pub a: i128,
    pub b: i128,
    pub alpha0: i128,
    pub alpha1: i128,
    pub beta0: i128,
    pub beta1: i128,
    pub expected_dtilde: i128,
    pub expected_by: ExpectedBy,
    pub expected_embed: PrimeTally,
    pub expected_denominators: Vec<PrimeTally>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_by_mod16_odd: Option<PrimeTally>,
    pub starred: bool,
    pub double_starred: bool,
    /// Embedding counts here take minutes rather than seconds.
    #[serde(default)]
    pub heavy: bool,
}

impl FieldFixture {
    pub fn field(&self) -> Result<CMField, CmError> {
        CMField::from_surd(self.d, self.a, self.b, self.alpha0, self.alpha1, self.beta0, self.beta1)
    }

    /// Largest recorded denominator exponent at each prime.
    pub fn denominator_lcm(&self) -> PrimeTally {
        let mut out = PrimeTally::new();
        for t in &self.expected_denominators {
            for (&p, &e) in t.iter() {
                if e > out.get(p) {
                    out.add(p, e - out.get(p));
                }
            }
        }
        out
    }
}

/// The bundled fixtures in table order.
pub fn all() -> Vec<FieldFixture> {
    serde_json::from_str(FIELDS_JSON).expect("bundled fixture file is valid")
}

pub fn by_name(name: &str) -> Option<FieldFixture> {
    all().into_iter().find(|f| f.name == name)
}

pub fn names() -> Vec<String> {
    all().into_iter().map(|f| f.name).collect()
}
