//! Grid specifications: `start:stop:count` (inclusive, evenly spaced), a
//! comma-separated list, or a single value. Each value takes an optional
//! unit suffix: `pi` (multiple of π), `deg`, `fov` (multiple of r_fov) or
//! `rad` (the default).

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub values: Vec<f64>,
}

fn value(tok: &str, r_fov: f64) -> Result<f64, String> {
    let tok = tok.trim();
    let (num, scale) = if let Some(n) = tok.strip_suffix("pi") {
        (n, PI)
    } else if let Some(n) = tok.strip_suffix("deg") {
        (n, PI / 180.0)
    } else if let Some(n) = tok.strip_suffix("fov") {
        (n, r_fov)
    } else if let Some(n) = tok.strip_suffix("rad") {
        (n, 1.0)
    } else {
        (tok, 1.0)
    };
    let num = num.trim();
    let x = if num.is_empty() && scale != 1.0 {
        1.0
    } else {
        num.parse::<f64>()
            .map_err(|_| format!("`{tok}` is not a number"))?
    };
    let v = x * scale;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{tok}` is not finite"))
    }
}

pub fn parse(spec: &str, r_fov: f64) -> Result<Grid, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty grid".into());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (value(start, r_fov)?, value(stop, r_fov)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("count `{count}` is not a positive integer"))?;
            match n {
                0 => return Err("count must be at least 1".into()),
                1 => vec![a],
                // endpoints are taken verbatim so that e.g. 1pi is exactly π
                _ => (0..n)
                    .map(|k| match k {
                        0 => a,
                        k if k == n - 1 => b,
                        k => a + (b - a) * k as f64 / (n - 1) as f64,
                    })
                    .collect(),
            }
        }
        [_] => spec
            .split(',')
            .map(|t| value(t, r_fov))
            .collect::<Result<_, _>>()?,
        _ => {
            return Err(format!(
                "`{spec}`: expected start:stop:count or a comma list"
            ))
        }
    };
    Ok(Grid { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        let g = parse("0:1pi:5", 1.0).unwrap().values;
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[4], PI);
        assert!((g[2] - PI / 2.0).abs() < 1e-15);
        assert_eq!(parse("0.5pi", 1.0).unwrap().values, vec![PI / 2.0]);
        assert_eq!(
            parse("0.4fov,90deg, 1.0", 0.5).unwrap().values,
            vec![0.2, PI / 2.0, 1.0]
        );
        assert_eq!(parse("pi", 1.0).unwrap().values, vec![PI]);
        assert_eq!(parse("1:2:1", 1.0).unwrap().values, vec![1.0]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "0:1", "0:1:0", "0:1:x", "abc", "1:2:3:4", "nanpi"] {
            assert!(parse(bad, 1.0).is_err(), "{bad}");
        }
    }
}
