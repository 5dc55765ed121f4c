//! File formats.
//!
//! * Correspondences: CSV with header `x1,y1,x2,y2` and optionally the
//!   ground truth columns `gx1,gy1,gx2,gy2`.
//! * Cameras: JSON `{"cameras": [[12 numbers, row-major 3x4], ...]}`.
//! * Fundamental matrix: JSON, 9 row-major numbers, either bare or as
//!   `{"fundamental": [...]}`.
//!
//! Reals are written with the shortest representation that round-trips.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use twoview::{CameraMatrix, Correspondence, FundamentalMatrix};

use crate::error::{HarnessError, Result};

const BASE_HEADER: [&str; 4] = ["x1", "y1", "x2", "y2"];
const GT_HEADER: [&str; 4] = ["gx1", "gy1", "gx2", "gy2"];

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| HarnessError::io(path, e))?;
    Ok(s)
}

pub fn parse_correspondences(text: &str, path: &Path) -> Result<Vec<Correspondence>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| HarnessError::parse(path, e))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let with_gt = if names == BASE_HEADER {
        false
    } else if names.len() == 8 && names[..4] == BASE_HEADER && names[4..] == GT_HEADER {
        true
    } else {
        return Err(HarnessError::parse(
            path,
            format!("unexpected header `{}`", names.join(",")),
        ));
    };

    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| HarnessError::parse(path, e))?;
        let values = record
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::parse(path, format!("row {}: {e}", line + 1)))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::parse(
                path,
                format!("row {}: non-finite value", line + 1),
            ));
        }
        let v = |i: usize, j: usize| Vector2::new(values[i], values[j]);
        let mut c = Correspondence::new(v(0, 1), v(2, 3));
        if with_gt {
            c = c.with_ground_truth(v(4, 5), v(6, 7));
        }
        out.push(c);
    }
    Ok(out)
}

pub fn read_correspondences(path: &Path) -> Result<Vec<Correspondence>> {
    parse_correspondences(&read_to_string(path)?, path)
}

/// Ground-truth columns are written when every correspondence has them.
pub fn write_correspondences<W: Write>(out: W, matches: &[Correspondence]) -> csv::Result<()> {
    let with_gt = !matches.is_empty() && matches.iter().all(|c| c.ground_truth.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = BASE_HEADER.to_vec();
    if with_gt {
        header.extend(GT_HEADER);
    }
    w.write_record(&header)?;
    for c in matches {
        let mut row = vec![c.x1[0], c.x1[1], c.x2[0], c.x2[1]];
        if let (true, Some((g1, g2))) = (with_gt, c.ground_truth) {
            row.extend([g1[0], g1[1], g2[0], g2[1]]);
        }
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    cameras: Vec<Vec<f64>>,
}

pub fn parse_cameras(text: &str, path: &Path) -> Result<Vec<CameraMatrix>> {
    let file: CameraFile = serde_json::from_str(text).map_err(|e| HarnessError::parse(path, e))?;
    file.cameras
        .iter()
        .enumerate()
        .map(|(i, values)| {
            if values.len() != 12 {
                return Err(HarnessError::parse(
                    path,
                    format!("camera {i}: expected 12 numbers, got {}", values.len()),
                ));
            }
            CameraMatrix::from_row_major(values)
                .map_err(|e| HarnessError::parse(path, format!("camera {i}: {e}")))
        })
        .collect()
}

/// The first two cameras of a camera file.
pub fn read_camera_pair(path: &Path) -> Result<(CameraMatrix, CameraMatrix)> {
    let cams = parse_cameras(&read_to_string(path)?, path)?;
    match cams.as_slice() {
        [c1, c2, ..] => Ok((*c1, *c2)),
        _ => Err(HarnessError::parse(path, "at least two cameras are required")),
    }
}

pub fn cameras_to_json(cameras: &[CameraMatrix]) -> String {
    let file = CameraFile {
        cameras: cameras.iter().map(|c| c.to_row_major().to_vec()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FundamentalFile {
    Bare(Vec<f64>),
    Wrapped { fundamental: Vec<f64> },
}

pub fn parse_fundamental(text: &str, path: &Path) -> Result<FundamentalMatrix> {
    let file: FundamentalFile =
        serde_json::from_str(text).map_err(|e| HarnessError::parse(path, e))?;
    let values = match file {
        FundamentalFile::Bare(v) | FundamentalFile::Wrapped { fundamental: v } => v,
    };
    if values.len() != 9 {
        return Err(HarnessError::parse(
            path,
            format!("expected 9 numbers, got {}", values.len()),
        ));
    }
    FundamentalMatrix::from_row_major(&values).map_err(|e| HarnessError::parse(path, e))
}

pub fn read_fundamental(path: &Path) -> Result<FundamentalMatrix> {
    parse_fundamental(&read_to_string(path)?, path)
}

pub fn fundamental_to_json(f: &FundamentalMatrix) -> String {
    serde_json::to_string_pretty(&serde_json::json!({ "fundamental": f.to_row_major() }))
        .expect("serializable")
        + "\n"
}

/// Parses `"x1,y1,x2,y2"`.
pub fn parse_point(s: &str) -> Result<Correspondence> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::Input(format!("point `{s}`: {e}")))?;
    match values.as_slice() {
        [a, b, c, d] if values.iter().all(|v| v.is_finite()) => Ok(Correspondence::new(
            Vector2::new(*a, *b),
            Vector2::new(*c, *d),
        )),
        _ => Err(HarnessError::Input(format!(
            "point `{s}`: expected four finite numbers"
        ))),
    }
}

pub fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Vector3};
    use twoview::epipolar::fundamental_from_cameras;

    fn p() -> &'static Path {
        Path::new("test")
    }

    #[test]
    fn correspondences_round_trip_exactly() {
        let matches = vec![
            Correspondence::new(Vector2::new(0.1, 1.0 / 3.0), Vector2::new(-2e-300, 7.5))
                .with_ground_truth(Vector2::new(1e10, 2.0), Vector2::new(3.0, 4.0)),
            Correspondence::new(Vector2::new(f64::MAX, 0.0), Vector2::new(1.0, 2.0))
                .with_ground_truth(Vector2::new(1.0, 2.0), Vector2::new(3.0, 4.0)),
        ];
        let mut buf = Vec::new();
        write_correspondences(&mut buf, &matches).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x1,y1,x2,y2,gx1,gy1,gx2,gy2\n"));
        assert_eq!(parse_correspondences(&text, p()).unwrap(), matches);
    }

    #[test]
    fn correspondences_without_ground_truth() {
        let text = "x1,y1,x2,y2\n1,2,3,4\n5,6,7,8\n";
        let m = parse_correspondences(text, p()).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m[1].ground_truth.is_none());
        assert_eq!(m[1].x2, Vector2::new(7.0, 8.0));
    }

    #[test]
    fn empty_and_header_only_files() {
        assert!(parse_correspondences("", p()).unwrap().is_empty());
        assert!(parse_correspondences("x1,y1,x2,y2\n", p()).unwrap().is_empty());
    }

    #[test]
    fn malformed_correspondences() {
        assert!(parse_correspondences("a,b,c,d\n1,2,3,4\n", p()).is_err());
        assert!(parse_correspondences("x1,y1,x2,y2\n1,2,3\n", p()).is_err());
        assert!(parse_correspondences("x1,y1,x2,y2\n1,2,3,x\n", p()).is_err());
        assert!(parse_correspondences("x1,y1,x2,y2\n1,2,3,NaN\n", p()).is_err());
    }

    #[test]
    fn cameras_round_trip() {
        let c1 = CameraMatrix::from_pose(&Matrix3::identity(), &Vector3::zeros()).unwrap();
        let c2 = CameraMatrix::from_pose(
            &nalgebra::Rotation3::new(Vector3::new(0.1, -0.2, 0.3)).into_inner(),
            &Vector3::new(-1.0 / 3.0, 0.1, 0.2),
        )
        .unwrap();
        let json = cameras_to_json(&[c1, c2]);
        let back = parse_cameras(&json, p()).unwrap();
        assert_eq!(back[1].to_row_major(), c2.to_row_major());
        assert!(parse_cameras(r#"{"cameras": [[1, 2, 3]]}"#, p()).is_err());
    }

    #[test]
    fn fundamental_formats() {
        let bare = "[0, 0, 0, 0, 0, -1, 0, 1, 0]";
        let wrapped = r#"{"fundamental": [0, 0, 0, 0, 0, -1, 0, 1, 0]}"#;
        let a = parse_fundamental(bare, p()).unwrap();
        let b = parse_fundamental(wrapped, p()).unwrap();
        assert_eq!(a.to_row_major(), b.to_row_major());
        assert!(parse_fundamental("[1, 2, 3]", p()).is_err());
        // Full rank is rejected.
        assert!(parse_fundamental("[1, 0, 0, 0, 1, 0, 0, 0, 1]", p()).is_err());

        let c1 = CameraMatrix::from_pose(&Matrix3::identity(), &Vector3::zeros()).unwrap();
        let c2 = CameraMatrix::from_pose(
            &nalgebra::Rotation3::new(Vector3::new(0.1, -0.2, 0.3)).into_inner(),
            &Vector3::new(-1.0, 0.1, 0.2),
        )
        .unwrap();
        let f = fundamental_from_cameras(&c1, &c2).unwrap();
        let back = parse_fundamental(&fundamental_to_json(&f), p()).unwrap();
        assert_eq!(back.to_row_major(), f.to_row_major());
    }

    #[test]
    fn point_argument() {
        let c = parse_point("1, 2,3,4.5").unwrap();
        assert_eq!(c.x2, Vector2::new(3.0, 4.5));
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("1,2,3,inf").is_err());
    }
}
