use focklab::C64;

/// Parses `re`, `re+imi`, `re-imi`, or a pure imaginary `imi` (`i`, `-i` allowed).
///
/// Numbers use Rust float syntax (`.` decimal point, optional exponent),
/// independent of locale. Non-finite values are rejected.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let s = text.trim();
    let bad = || format!("'{text}' is not a complex number (expected re, re+imi or re-imi)");
    if s.is_empty() {
        return Err(bad());
    }
    let finite = |x: f64| if x.is_finite() { Ok(x) } else { Err(bad()) };
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map_err(|_| bad()).and_then(finite).map(|re| C64::new(re, 0.0));
    };
    // split at the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(C64::new(finite(re)?, finite(im)?))
}
