//! JSON helpers for non-finite floats, which plain JSON cannot carry.

use serde::Serializer;

/// Writes finite values as numbers and infinities as `"Infinity"` / `"-Infinity"`.
pub fn extended_f64<Ser: Serializer>(v: &f64, ser: Ser) -> Result<Ser::Ok, Ser::Error> {
    if v.is_finite() {
        ser.serialize_f64(*v)
    } else if v.is_nan() {
        ser.serialize_str("NaN")
    } else if *v > 0.0 {
        ser.serialize_str("Infinity")
    } else {
        ser.serialize_str("-Infinity")
    }
}

#[cfg(test)]
mod tests {
    #[derive(serde::Serialize)]
    struct Wrap(#[serde(serialize_with = "super::extended_f64")] f64);

    #[test]
    fn infinity_is_a_string() {
        assert_eq!(
            serde_json::to_string(&Wrap(f64::INFINITY)).unwrap(),
            "\"Infinity\""
        );
        assert_eq!(serde_json::to_string(&Wrap(1.5)).unwrap(), "1.5");
    }
}
