use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant digits kept in every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

pub fn format_number(v: f64) -> String {
    let r = round_sig(v);
    if r.is_finite() {
        serde_json::Number::from_f64(r)
            .map(|n| n.to_string())
            .unwrap_or_else(|| r.to_string())
    } else {
        r.to_string()
    }
}

/// Rounds every floating-point number in the tree.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|v| serde_json::Number::from_f64(round_sig(v))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn render_json(mut value: Value) -> String {
    round_value(&mut value);
    let mut text = serde_json::to_string_pretty(&value).expect("json values serialize");
    text.push('\n');
    text
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(std::f64::consts::SQRT_2), 1.41421356237);
        assert_eq!(round_sig(2.0000000000000004), 2.0);
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn nested_values_are_rounded() {
        let v = serde_json::json!({"a": [1.0000000000001, {"b": std::f64::consts::PI}], "n": 7});
        let text = render_json(v);
        assert!(text.contains("3.14159265359"));
        assert!(text.contains("\"n\": 7"));
        assert!(!text.contains("1.0000000000001"));
    }

    #[test]
    fn digest_is_hex() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
