//! Sweep grids written as `name=start:stop:step`, comma separated.

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn parse(spec: &str, allowed: &[&str]) -> Result<Vec<Axis>, Failure> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(vec![]);
    }
    spec.split(',').map(|part| parse_axis(part.trim(), allowed)).collect()
}

fn parse_axis(part: &str, allowed: &[&str]) -> Result<Axis, Failure> {
    let bad = |why: &str| Failure::Grid(format!("'{part}': {why}"));
    let (name, range) = part.split_once('=').ok_or_else(|| bad("expected name=start:stop:step"))?;
    let name = name.trim();
    if !allowed.contains(&name) {
        return Err(bad(&format!("unknown axis, expected one of {}", allowed.join(", "))));
    }
    let nums: Vec<f64> = range
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("start, stop and step must be numbers"))?;
    let [start, stop, step] = nums[..] else {
        return Err(bad("expected exactly three fields start:stop:step"));
    };
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(bad("step must be positive and bounds finite"));
    }
    let values = if stop < start {
        vec![]
    } else {
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    };
    Ok(Axis { name: name.to_string(), values })
}

/// Cartesian product, first axis slowest. An axis with no values empties the grid.
pub fn points(axes: &[Axis]) -> Vec<Vec<(String, f64)>> {
    let mut out: Vec<Vec<(String, f64)>> = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.name.clone(), v));
                    q
                })
            })
            .collect();
    }
    if axes.is_empty() {
        vec![]
    } else {
        out
    }
}
