//! Angles such as `0.5pi`, `pi/3`, `-2pi/5` or plain radians.

use core::f64::consts::PI;

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "").replace('π', "pi");
    let bad = || format!("cannot parse angle {:?}", s);
    let value = if let Some(pos) = t.find("pi") {
        let (coef, rest) = t.split_at(pos);
        let rest = &rest[2..];
        let c = match coef.trim_end_matches('*') {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match rest {
            "" => 1.0,
            r if r.starts_with('/') => r[1..].parse::<f64>().map_err(|_| bad())?,
            _ => return Err(bad()),
        };
        if d == 0.0 {
            return Err(bad());
        }
        // c * PI keeps 0.5pi bit-identical to PI / 2
        if d == 1.0 {
            c * PI
        } else {
            c * PI / d
        }
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}
