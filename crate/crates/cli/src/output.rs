//! CSV and SVG emission. CSV rows use '.' decimals, 17 significant digits
//! and LF endings; the first line is a '#' comment header. Files land via a
//! temporary sibling plus rename, so readers never see partial output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// 17 significant digits, sign-stable and locale-independent.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `content` to `dir/name` atomically.
pub fn write_atomic(dir: &Path, name: &str, content: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let final_path = dir.join(name);
    let tmp_path = dir.join(format!(".tmp-{name}"));
    {
        let mut tmp = fs::File::create(&tmp_path)
            .with_context(|| format!("creating {}", tmp_path.display()))?;
        tmp.write_all(content.as_bytes())?;
        tmp.sync_all()?;
    }
    fs::rename(&tmp_path, &final_path)
        .with_context(|| format!("renaming into {}", final_path.display()))?;
    Ok(final_path)
}

/// A CSV document under construction: one comment header, then rows.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[f64]) {
        let mut first = true;
        for &x in fields {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt(x));
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn row_int(&mut self, fields: &[f64], tail: i64) {
        for &x in fields {
            self.buf.push_str(&fmt(x));
            self.buf.push(',');
        }
        self.buf.push_str(&tail.to_string());
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Fit the polyline into a unit-ish viewBox with a 5% margin and render it
/// as a bare SVG path.
pub fn svg_polyline(points: &[(f64, f64)]) -> String {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let margin = 0.05 * ((x1 - x0).max(y1 - y0)).max(1e-12);
    let (x0, x1) = (x0 - margin, x1 + margin);
    let (y0, y1) = (y0 - margin, y1 + margin);
    let mut path = String::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        // SVG's y axis points down; flip to keep the mathematical orientation
        path.push_str(if i == 0 { "M" } else { " L" });
        path.push_str(&format!("{:.6} {:.6}", x, y0 + y1 - y));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
            "<path d=\"{} Z\" fill=\"none\" stroke=\"black\" stroke-width=\"{:.6}\"/>\n",
            "</svg>\n"
        ),
        x0,
        y0,
        x1 - x0,
        y1 - y0,
        path,
        0.002 * (x1 - x0).max(y1 - y0)
    )
}
