//! Human-readable rendering of a report document.

use serde_json::Value;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let parts: Vec<String> = xs.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn block(out: &mut String, v: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) if !s.contains('\n') => out.push_str(&format!("{}{}: {}\n", pad, k, s)),
                    Some(s) => {
                        out.push_str(&format!("{}{}:\n", pad, k));
                        for line in s.lines() {
                            out.push_str(&format!("{}  {}\n", pad, line));
                        }
                    }
                    None => {
                        out.push_str(&format!("{}{}:\n", pad, k));
                        block(out, x, indent + 2);
                    }
                }
            }
        }
        Value::Array(xs) => {
            for x in xs {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{}- {}\n", pad, s)),
                    None => {
                        let mut inner = String::new();
                        block(&mut inner, x, indent + 2);
                        let body = inner.trim_start();
                        out.push_str(&format!("{}- {}", pad, body));
                    }
                }
            }
        }
        other => {
            if let Some(s) = scalar(other) {
                out.push_str(&format!("{}{}\n", pad, s));
            }
        }
    }
}

/// Indented `key: value` text.
pub fn text(doc: &Value) -> String {
    let mut out = String::new();
    block(&mut out, doc, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested() {
        let d = json!({"a": 1, "b": {"c": [1, 2]}, "d": [{"e": "x", "f": true}]});
        assert_eq!(
            text(&d),
            "a: 1\nb:\n  c: [1, 2]\nd:\n  - e: x\n    f: true\n"
        );
    }
}
