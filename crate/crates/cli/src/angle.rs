use std::f64::consts::PI;

/// Parses an angle in radians. Multiples of pi can be written with a `pi`
/// literal: `pi`, `-pi`, `0.5pi`, `0.5*pi`, `pi/2`, `-3pi/4`, `2pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(at) = t.find("pi") else {
        return t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{s}' is not an angle"));
    };
    let coef = t[..at].trim_end_matches('*');
    let rest = &t[at + 2..];
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| format!("bad coefficient in '{s}'"))?,
    };
    let den = if rest.is_empty() {
        1.0
    } else {
        let d = rest
            .strip_prefix('/')
            .ok_or_else(|| format!("unexpected '{rest}' in '{s}'"))?;
        d.parse::<f64>()
            .ok()
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("bad divisor in '{s}'"))?
    };
    let v = coef * PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}
