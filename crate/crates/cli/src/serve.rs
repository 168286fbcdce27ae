use std::io::{self, BufRead, Write};

use abac_graph::{evaluate, CombiningAlgorithm, Decision, Model};
use serde::{Deserialize, Serialize};

#[derive(Deserialize)]
struct Request {
    id: Option<String>,
    subject: String,
    action: String,
    object: String,
    algorithm: Option<String>,
}

#[derive(Serialize, Debug, PartialEq)]
struct Response {
    id: String,
    decision: String,
    matching: Vec<String>,
    error: Option<String>,
}

impl Response {
    fn error(id: String, message: String) -> Self {
        Response {
            id,
            decision: Decision::Deny.to_string(),
            matching: Vec::new(),
            error: Some(message),
        }
    }
}

/// Best-effort id from a line that failed to deserialize as a request.
fn salvage_id(line: &str) -> String {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()
        .and_then(|v| v.get("id").and_then(|id| id.as_str().map(str::to_owned)))
        .unwrap_or_default()
}

fn answer(model: &Model, default: CombiningAlgorithm, line: &str) -> Response {
    let req: Request = match serde_json::from_str(line) {
        Ok(req) => req,
        Err(e) => return Response::error(salvage_id(line), format!("parse error: {e}")),
    };
    let id = match req.id {
        Some(id) if !id.is_empty() => id,
        _ => return Response::error(String::new(), "missing id".to_owned()),
    };
    let algorithm = match req.algorithm.as_deref().map(str::parse).transpose() {
        Ok(alg) => alg.unwrap_or(default),
        Err(e) => return Response::error(id, e.to_string()),
    };
    let result = model
        .query(&req.subject, &req.action, &req.object)
        .and_then(|q| evaluate(model, &q, algorithm));
    match result {
        Ok(r) => Response {
            id,
            decision: r.decision.to_string(),
            matching: r
                .matches
                .iter()
                .filter_map(|m| model.policy(m.policy).map(|p| p.name.clone()))
                .collect(),
            error: None,
        },
        Err(e) => Response::error(id, e.to_string()),
    }
}

/// Answers one JSON request per input line, in order, until end of input.
/// Blank lines are skipped.
pub fn serve(
    model: &Model,
    algorithm: CombiningAlgorithm,
    input: impl BufRead,
    mut output: impl Write,
) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = answer(model, algorithm, &line);
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
