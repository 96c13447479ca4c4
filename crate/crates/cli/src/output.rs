//! Deterministic serialization helpers: CSV floats with 12 significant
//! digits and JSON summaries pretty-printed with sorted keys.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::Failure;

/// 12 significant digits, '.' decimal separator (scientific notation keeps
/// the digit count fixed regardless of magnitude).
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// Writes newline-terminated CSV rows.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), Failure> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Pretty-printed JSON with keys sorted at every level (`BTreeMap` input
/// keeps the top level sorted; nested maps should also be `BTreeMap`s).
pub fn write_json(path: &Path, map: &BTreeMap<String, Value>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(map)
        .map_err(|e| Failure { code: 1, message: format!("json serialization: {e}") })?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::String(fmt12(x))
    }
}

/// Companion plain-text plotting script referencing a CSV by name; plotting
/// stays out-of-process so the toolkit itself carries no graphics
/// dependency.
pub fn plot_script(csv_name: &str, columns: &[&str]) -> String {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("\"\"\"Plot columns of the companion CSV against time.\"\"\"\n");
    s.push_str("import csv\nimport sys\n\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("PATH = sys.argv[1] if len(sys.argv) > 1 else \"{csv_name}\"\n"));
    s.push_str("with open(PATH, newline=\"\") as fh:\n");
    s.push_str("    rows = list(csv.DictReader(fh))\n");
    s.push_str("t = [float(r[\"t\"]) for r in rows]\n");
    for col in columns {
        s.push_str(&format!(
            "plt.plot(t, [float(r[\"{col}\"]) for r in rows], label=\"{col}\")\n"
        ));
    }
    s.push_str("plt.xlabel(\"t J\")\nplt.legend()\nplt.tight_layout()\n");
    s.push_str(&format!("plt.savefig(\"{csv_name}.png\", dpi=150)\n"));
    s
}
