use serde_json::Value;

/// Numbers with 17 significant digits; integers as integers.
fn number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format!("{:.16e}", n.as_f64().unwrap())
    } else {
        n.to_string()
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(number(n)),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| matches!(i, Value::Number(_) | Value::Null)) => Some(
            items
                .iter()
                .map(|i| scalar(i).unwrap())
                .collect::<Vec<_>>()
                .join(" "),
        ),
        _ => None,
    }
}

fn walk(prefix: &str, v: &Value, out: &mut String) {
    if let Some(s) = scalar(v) {
        out.push_str(prefix);
        out.push(' ');
        out.push_str(&s);
        out.push('\n');
        return;
    }
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                walk(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                walk(&format!("{prefix}[{i}]"), child, out);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}

/// One `path value` line per leaf; numeric arrays on a single line.
pub fn text(v: &Value) -> String {
    let mut out = String::new();
    walk("", v, &mut out);
    out
}
