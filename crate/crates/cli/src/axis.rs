//! `--axis` parsing.
//!
//! ```text
//! path=start:end:points[:log][@unit]
//! path=v1,v2,...[@unit]
//! ```
//!
//! Without `@unit` the values are SI / rad/s. `@omega_m` and `@gamma`
//! resolve against the already resolved base parameters.

use phonlase::params::{path_class, SystemParams};
use phonlase::sweep::{Axis, Scale};
use phonlase::units::{Quantity, Unit};

pub fn parse_axis(text: &str, base: &SystemParams) -> Result<Axis, String> {
    let (path, rest) = text
        .split_once('=')
        .ok_or_else(|| format!("--axis {text:?}: expected path=values"))?;
    let path = path.trim();
    let class = path_class(path).ok_or_else(|| format!("--axis: unknown parameter path {path:?}"))?;
    let (values, unit) = match rest.rsplit_once('@') {
        Some((v, u)) => (v, Some(u.trim())),
        None => (rest, None),
    };
    let scale = match unit {
        None => 1.0,
        Some(tag) => {
            let unit = Unit::parse(tag).ok_or_else(|| format!("--axis {path}: unknown unit {tag:?}"))?;
            if unit.class() != class {
                return Err(format!(
                    "--axis {path}: unit {tag:?} is a {} unit, expected {} ({})",
                    unit.class(),
                    class,
                    class.accepted()
                ));
            }
            Quantity { value: 1.0, unit }.resolve(base.mechanical.mech_freq, base.optical.cavity_loss)
        }
    };
    let num = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("--axis {path}: cannot parse number {s:?}"))
    };
    let parts: Vec<&str> = values.split(':').collect();
    if parts.len() == 1 {
        let list = values
            .split(',')
            .map(|v| num(v).map(|x| x * scale))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Axis::list(path, list));
    }
    let log = match parts.len() {
        3 => false,
        4 if parts[3].trim() == "log" => true,
        4 if parts[3].trim() == "lin" => false,
        _ => return Err(format!("--axis {path}: expected start:end:points[:log]")),
    };
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("--axis {path}: point count {:?} is not an integer", parts[2]))?;
    Ok(Axis::range(
        path,
        num(parts[0])? * scale,
        num(parts[1])? * scale,
        points,
        if log { Scale::Log } else { Scale::Linear },
    ))
}
