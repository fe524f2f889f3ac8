//! JSON request and response bodies of the HTTP service.

use exemplar_core::engine::{Answer, QueryParams, QueryStats};
use exemplar_core::mqg::EdgeView;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub tuples: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

impl QueryRequest {
    pub fn params(&self) -> QueryParams {
        let defaults = QueryParams::default();
        QueryParams {
            k: self.k.unwrap_or(defaults.k),
            k_prime: self.k_prime.unwrap_or(defaults.k_prime),
            d: self.d.unwrap_or(defaults.d),
            r: self.r.unwrap_or(defaults.r),
            ..defaults
        }
    }
}

/// `answers` is serialized first and exactly as `query --json` prints it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub answers: Vec<Answer>,
    pub mqg: Vec<EdgeView>,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
}
