//! Opt-in cross-check of the Delta coefficient table against the OEIS entry for
//! Ramanujan's tau function (A000594), fetched as JSON over HTTPS.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::modform::HeckeEigenform;

pub const TAU_URL: &str = "https://oeis.org/search?q=id:A000594&fmt=json";

#[derive(Deserialize)]
struct Entry {
    data: String,
}

// The service has answered both with a bare array and with {"results": [...]}.
#[derive(Deserialize)]
#[serde(untagged)]
enum Response {
    Bare(Vec<Entry>),
    Wrapped { results: Vec<Entry> },
}

fn net(e: impl std::fmt::Display) -> Error {
    Error::Serialization(format!("remote: {e}"))
}

/// `tau(1), tau(2), ...` as listed by the remote entry.
pub fn fetch_tau_reference() -> Result<Vec<i128>> {
    let resp: Response = ureq::get(TAU_URL).call().map_err(net)?.body_mut().read_json().map_err(net)?;
    let entries = match resp {
        Response::Bare(v) => v,
        Response::Wrapped { results } => results,
    };
    let entry = entries.into_iter().next().ok_or_else(|| net("empty response"))?;
    entry.data.split(',').map(|t| t.trim().parse::<i128>().map_err(net)).collect()
}

/// Compares the integer table of `f` with the remote list; returns the number of
/// coefficients compared; a mismatch is an error naming the index.
pub fn cross_check_tau(f: &HeckeEigenform) -> Result<usize> {
    let reference = fetch_tau_reference()?;
    let table = f.integer_table().ok_or_else(|| net("form has no integer table"))?;
    for (i, &r) in reference.iter().enumerate() {
        let n = i + 1;
        if n >= table.len() {
            return Ok(i);
        }
        if table[n] != r {
            return Err(net(format!("tau({n}) = {} locally but {r} remotely", table[n])));
        }
    }
    Ok(reference.len())
}
