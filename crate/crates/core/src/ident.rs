//! The `name:key=value,...` identifier micro-grammar shared by entropy and law ids.

use std::fmt;

use crate::error::{Error, Result};

/// A parsed identifier such as `tsallis:q=2,c=1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub params: Vec<(String, f64)>,
}

impl Ident {
    pub fn parse(input: &str) -> Result<Self> {
        let input = input.trim();
        let (name, rest) = match input.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (input, None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(parse_err(input, "missing or malformed name"));
        }
        let mut params = Vec::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(|| {
                    parse_err(input, &format!("expected key=value, got `{item}`"))
                })?;
                let k = k.trim();
                if k.is_empty() {
                    return Err(parse_err(input, "empty key"));
                }
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(input, &format!("`{}` is not a number", v.trim())))?;
                if !v.is_finite() {
                    return Err(parse_err(input, &format!("`{k}` must be finite")));
                }
                if params.iter().any(|(existing, _)| existing == k) {
                    return Err(parse_err(input, &format!("duplicate key `{k}`")));
                }
                params.push((k.to_string(), v));
            }
        }
        Ok(Ident {
            name: name.to_string(),
            params,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    pub(crate) fn require(&self, key: &str, original: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| parse_err(original, &format!("missing parameter `{key}`")))
    }

    /// Rejects keys outside `allowed`.
    pub(crate) fn only(&self, allowed: &[&str], original: &str) -> Result<()> {
        match self
            .params
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            Some((k, _)) => Err(parse_err(original, &format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }

    /// Sets `key` to `value`, replacing an existing entry in place.
    pub fn with(mut self, key: &str, value: f64) -> Self {
        match self.params.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.params.push((key.to_string(), value)),
        }
        self
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

pub(crate) fn parse_err(input: &str, reason: &str) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    }
}
