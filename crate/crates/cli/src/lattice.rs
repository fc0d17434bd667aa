//! Parameter lists given on the command line.

/// Parses `x`, `x,y,...` or `lo:hi:count` (inclusive, evenly spaced).
/// An empty string or a zero count is an empty list.
pub fn parse(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("range `{spec}` must be lo:hi:count"));
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        let count: usize = count.trim().parse().map_err(|_| format!("bad count in `{spec}`"))?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
        });
    }
    spec.split(',').map(number).collect()
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}
