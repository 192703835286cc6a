use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{norm, PointSet};
use crate::error::{Error, Result};

/// Rows whose norm is within this distance of 1 are silently renormalized
/// on load; anything further off is rejected.
pub const LOAD_RENORMALIZE_TOLERANCE: f64 = 1e-8;

/// Reads a point set: one point per line, `d + 1` whitespace-separated
/// decimals, blank lines and `#` comments ignored.
pub fn load_point_set(path: impl AsRef<Path>, d: usize) -> Result<PointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_point_set(&text, d, path).map(|set| set.with_label(path.display().to_string()))
}

/// Parses point-set text. `origin` is only used in error messages.
pub fn parse_point_set(text: &str, d: usize, origin: &Path) -> Result<PointSet> {
    let dim = d + 1;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut coords = Vec::new();
    let mut row = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        row += 1;
        let start = coords.len();
        for field in line.split_whitespace() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("cannot parse '{field}' as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(
                    idx + 1,
                    format!("non-finite coordinate '{field}'"),
                ));
            }
            coords.push(v);
        }
        let got = coords.len() - start;
        if got != dim {
            return Err(parse_err(
                idx + 1,
                format!("expected {dim} coordinates for d = {d}, found {got}"),
            ));
        }
        let n = norm(&coords[start..]);
        if (n - 1.0).abs() > LOAD_RENORMALIZE_TOLERANCE {
            return Err(Error::NotUnitNorm {
                row,
                norm: n,
                tolerance: LOAD_RENORMALIZE_TOLERANCE,
            });
        }
    }
    if row == 0 {
        return Err(parse_err(0, "no points found".into()));
    }
    PointSet::normalized(d, coords)
}

/// Writes `points` in the text format, with each entry of `header` emitted
/// as a `# key: value` comment line.
pub fn write_point_set(
    path: impl AsRef<Path>,
    points: &PointSet,
    header: &[(&str, String)],
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_point_set(points, header)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn format_point_set(points: &PointSet, header: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}: {v}");
    }
    for p in points.iter() {
        let fields: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(text: &str, d: usize) -> Result<PointSet> {
        parse_point_set(text, d, &PathBuf::from("mem"))
    }

    #[test]
    fn parses_antipodal_pair() {
        let set = parse("# comment\n0 0 1\n\n0 0 -1\n", 2).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.point(1), &[0.0, 0.0, -1.0]);
    }

    #[test]
    fn rejects_bad_norm_with_row_index() {
        match parse("0 0 2\n", 2).unwrap_err() {
            Error::NotUnitNorm { row, norm, .. } => {
                assert_eq!(row, 1);
                assert_eq!(norm, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn renormalizes_small_drift() {
        let set = parse("0 0 1.000000001\n", 2).unwrap();
        assert_eq!(set.point(0)[2], 1.0);
    }

    #[test]
    fn reports_malformed_lines() {
        assert!(matches!(
            parse("0 0\n", 2),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse("0 1\n0 x 1\n", 1).is_err());
        assert!(matches!(
            parse("0 0 1\n0 zero 1\n", 2),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse("# only comments\n", 2).is_err());
    }

    #[test]
    fn write_then_load_round_trips() {
        let set = crate::geom::random_uniform(3, 17, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.txt");
        write_point_set(&path, &set, &[("d", "3".into())]).unwrap();
        let back = load_point_set(&path, 3).unwrap();
        // `{:e}` prints the shortest round-trip representation
        let close = set
            .coords()
            .iter()
            .zip(back.coords())
            .all(|(a, b)| (a - b).abs() <= 4e-16);
        assert!(close);
    }
}
