use ltinact::Error;

/// Parse `--eps`: `start:end:step` (inclusive of `end`) or a comma list.
pub fn parse_eps(s: &str) -> Result<Vec<f64>, Error> {
    let bad = |msg: &str| Error::InvalidPlan(format!("--eps {s:?}: {msg}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(bad("expected start:end:step"));
        };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if step.is_nan() || step <= 0.0 || end < start {
            return Err(bad("need step > 0 and end >= start"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        // multiply rather than accumulate, then trim float noise
        Ok((0..count)
            .map(|i| {
                let x = start + i as f64 * step;
                (x * 1e12).round() / 1e12
            })
            .collect())
    } else {
        s.split(',').map(num).collect()
    }
}
