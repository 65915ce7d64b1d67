//! TOML configuration for a single pricing request.
//!
//! ```toml
//! strike = 100.0
//! strategy = "auto"          # continuous: auto | expm-action | full-expm
//! mean_term = "chain"        # chain | risk-neutral
//!
//! [model]
//! kind = "dejd"              # cir | cev | dejd | mjd | cgmy
//! sigma = 0.120381
//! lambda = 0.330966
//! p_up = 0.2071
//! eta1 = 9.65997
//! eta2 = 3.13868
//!
//! [market]
//! spot = 100.0
//! rate = 0.0367
//! maturity = 1.0
//!
//! [monitoring]
//! kind = "discrete"          # discrete (with n) | continuous
//! n = 12
//!
//! [grid]                     # optional
//! n_states = 50
//!
//! [inversion]                # optional
//! a_param = 23.0
//! ```
//!
//! The model's own `r`, if given, is replaced by `market.rate`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::pricing::PricingRequest;

/// Parse a request from TOML text. Unknown keys are rejected by name.
pub fn parse_request(text: &str) -> Result<PricingRequest> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    from_table(table)
}

fn from_table(table: toml::Table) -> Result<PricingRequest> {
    // serde accepts stray keys next to a unit variant's tag
    if let Some(m) = table.get("monitoring").and_then(|m| m.as_table()) {
        if m.get("kind").and_then(|k| k.as_str()) == Some("continuous") {
            if let Some(extra) = m.keys().find(|k| k.as_str() != "kind") {
                return Err(Error::Config(format!("unknown field `{extra}` for continuous monitoring")));
            }
        }
    }
    let req: PricingRequest =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    Ok(PricingRequest { model: req.model.clone().with_rate(req.market.rate), ..req })
}

/// Read a request from `path` and apply `key.path=value` overrides in order.
pub fn load_request(path: &Path, overrides: &[String]) -> Result<PricingRequest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Config(format!("{}: {}", path.display(), e.message()))
    })?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    from_table(table)
}

/// A copy of `req` with `key.path=value` overrides applied.
pub fn with_overrides(req: &PricingRequest, overrides: &[String]) -> Result<PricingRequest> {
    if overrides.is_empty() {
        return Ok(req.clone());
    }
    let mut table: toml::Table = to_toml(req).parse().expect("rendered requests parse");
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    from_table(table)
}

/// Apply one `a.b.c=value` assignment. The value is read as a TOML value
/// (number, boolean, string in quotes, array) and otherwise kept as a bare
/// string, so `model.kind=cgmy` works without quoting.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = parse_value(raw.trim());
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut current = table;
    for key in parents {
        let entry = current.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{assignment}`: `{key}` is not a table")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Render a request as TOML that [`parse_request`] reads back.
pub fn to_toml(req: &PricingRequest) -> String {
    toml::to_string(req).expect("requests serialize")
}
