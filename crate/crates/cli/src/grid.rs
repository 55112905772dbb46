//! Value lists on the command line: `8:20:2` ranges and `a,b,c` lists,
//! with `;` separating the axes of a multi-parameter grid.

use crate::CliError;

/// Parses `start:stop:step` (inclusive) or a comma list of integers.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let int = |s: &str| s.parse::<usize>().map_err(|_| CliError::usage(format!("bad chain length `{s}` in `{text}`")));
        match parts.as_slice() {
            [single] => out.push(int(single)?),
            [start, stop] | [start, stop, _] => {
                let step = if parts.len() == 3 { int(parts[2])? } else { 1 };
                let (start, stop) = (int(start)?, int(stop)?);
                if step == 0 || stop < start {
                    return Err(CliError::usage(format!("empty or invalid range `{item}`")));
                }
                out.extend((start..=stop).step_by(step));
            }
            _ => return Err(CliError::usage(format!("bad range `{item}`"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("no chain lengths in `{text}`")));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Parses one axis: a comma list of reals, or `start:stop:step` with the
/// stop included when it lies on the grid.
pub fn parse_axis(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let real = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("bad value `{s}` in `{text}`")))
        };
        match parts.as_slice() {
            [single] => out.push(real(single)?),
            [start, stop, step] => {
                let (start, stop, step) = (real(start)?, real(stop)?, real(step)?);
                if !(step > 0.0) || stop < start {
                    return Err(CliError::usage(format!("empty or invalid range `{item}`")));
                }
                // Counting steps avoids accumulating rounding in the nodes.
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| start + i as f64 * step));
            }
            _ => return Err(CliError::usage(format!("bad range `{item}`"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("no values in `{text}`")));
    }
    Ok(out)
}

/// `;`-separated axes, one per model parameter.
pub fn parse_grid(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';').map(parse_axis).collect()
}

/// Cartesian product of the axes, first axis slowest.
pub fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

/// A single point given with the grid syntax, e.g. `1.0;0.3`.
pub fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    let axes = parse_grid(text)?;
    if axes.iter().any(|a| a.len() != 1) {
        return Err(CliError::usage(format!("expected a single parameter point, got `{text}`")));
    }
    Ok(axes.into_iter().map(|a| a[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_ranges_and_lists() {
        assert_eq!(parse_sizes("8:20:2").unwrap(), vec![8, 10, 12, 14, 16, 18, 20]);
        assert_eq!(parse_sizes("12,8,10,8").unwrap(), vec![8, 10, 12]);
        assert_eq!(parse_sizes("4:6").unwrap(), vec![4, 5, 6]);
        assert!(parse_sizes("8:4:2").is_err());
        assert!(parse_sizes("8:20:0").is_err());
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn real_axes() {
        assert_eq!(parse_axis("0,0.5").unwrap(), vec![0.0, 0.5]);
        let a = parse_axis("0:1:0.1").unwrap();
        assert_eq!(a.len(), 11);
        assert_eq!(a[10], 1.0);
        assert_eq!(parse_axis("-0.5:0.5:0.5").unwrap(), vec![-0.5, 0.0, 0.5]);
        assert!(parse_axis("nan").is_err());
        assert!(parse_axis("0:1:-1").is_err());
    }

    #[test]
    fn grids_are_products() {
        let axes = parse_grid("0.1,0.2;1:3:1").unwrap();
        let points = grid_points(&axes);
        assert_eq!(points.len(), 6);
        assert_eq!(points[0], vec![0.1, 1.0]);
        assert_eq!(points[5], vec![0.2, 3.0]);
        assert_eq!(parse_point("1.0;0.3").unwrap(), vec![1.0, 0.3]);
        assert!(parse_point("1,2").is_err());
    }

    proptest::proptest! {
        #[test]
        fn size_range_matches_step_by(start in 1usize..40, len in 0usize..40, step in 1usize..7) {
            let stop = start + len;
            let parsed = parse_sizes(&format!("{start}:{stop}:{step}")).unwrap();
            proptest::prop_assert_eq!(parsed, (start..=stop).step_by(step).collect::<Vec<_>>());
        }

        #[test]
        fn real_lists_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..8)) {
            let text = values.iter().map(|v| crate::table::fmt_real(*v)).collect::<Vec<_>>().join(",");
            proptest::prop_assert_eq!(parse_axis(&text).unwrap(), values);
        }

        #[test]
        fn product_size_and_order(a in 1usize..5, b in 1usize..5, c in 1usize..5) {
            let axes: Vec<Vec<f64>> = [a, b, c].iter().map(|&n| (0..n).map(|i| i as f64).collect()).collect();
            let points = grid_points(&axes);
            proptest::prop_assert_eq!(points.len(), a * b * c);
            proptest::prop_assert!(points.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
