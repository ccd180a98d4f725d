//! Deterministic artifact emission.
//!
//! Every file starts with (or embeds) the tool version and a hash of the
//! invoking configuration, so identical runs produce identical bytes and
//! artifacts can be traced back to their parameters.

use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Csv,
    Json,
    Jsonl,
    Svg,
}

impl Kind {
    fn parse(s: &str) -> Option<Kind> {
        match s {
            "csv" => Some(Kind::Csv),
            "json" => Some(Kind::Json),
            "jsonl" => Some(Kind::Jsonl),
            "svg" => Some(Kind::Svg),
            _ => None,
        }
    }
}

pub struct Emitter {
    dir: PathBuf,
    hash: String,
    enabled: BTreeSet<Kind>,
}

pub fn config_hash(args: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(VERSION.as_bytes());
    for a in args {
        h.update([0u8]);
        h.update(a.as_bytes());
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl Emitter {
    pub fn new(dir: &Path, hash: String, formats: &str) -> std::io::Result<Emitter> {
        fs::create_dir_all(dir)?;
        let enabled = if formats.trim().is_empty() || formats == "all" {
            [Kind::Csv, Kind::Json, Kind::Jsonl, Kind::Svg].into()
        } else {
            formats
                .split(',')
                .filter_map(|s| Kind::parse(s.trim()))
                .collect()
        };
        Ok(Emitter {
            dir: dir.to_path_buf(),
            hash,
            enabled,
        })
    }


    fn stamp_comment(&self) -> String {
        format!("# tool=ietlab version={} config={}", VERSION, self.hash)
    }

    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "ietlab",
            "version": VERSION,
            "config": self.hash,
        })
    }

    pub fn csv<I: IntoIterator<Item = String>>(
        &mut self,
        name: &str,
        header: &str,
        rows: I,
    ) -> std::io::Result<()> {
        if !self.enabled.contains(&Kind::Csv) {
            return Ok(());
        }
        let mut f = fs::File::create(self.dir.join(name))?;
        writeln!(f, "{}", self.stamp_comment())?;
        writeln!(f, "{header}")?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }

    pub fn json(&mut self, name: &str, data: serde_json::Value) -> std::io::Result<()> {
        if !self.enabled.contains(&Kind::Json) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let wrapped = serde_json::json!({
            "meta": self.meta_json(),
            "data": data,
        });
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{}", serde_json::to_string_pretty(&wrapped).unwrap())?;
        Ok(())
    }

    pub fn jsonl<I: IntoIterator<Item = serde_json::Value>>(
        &mut self,
        name: &str,
        records: I,
    ) -> std::io::Result<()> {
        if !self.enabled.contains(&Kind::Jsonl) {
            return Ok(());
        }
        let mut f = fs::File::create(self.dir.join(name))?;
        writeln!(
            f,
            "{}",
            serde_json::json!({ "meta": self.meta_json() })
        )?;
        for r in records {
            writeln!(f, "{}", serde_json::to_string(&r).unwrap())?;
        }
        Ok(())
    }

    pub fn svg(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        if !self.enabled.contains(&Kind::Svg) {
            return Ok(());
        }
        let mut f = fs::File::create(self.dir.join(name))?;
        writeln!(f, "<!-- {} -->", self.stamp_comment().trim_start_matches("# "))?;
        writeln!(f, "{body}")?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Small SVG plot helpers.

/// Polyline plot of (x, y) samples on a fixed canvas.
pub fn svg_polyline(points: &[(f64, f64)], title: &str) -> String {
    let (w, h, m) = (640.0, 480.0, 40.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in points {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() || x1 <= x0 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !y0.is_finite() || y1 <= y0 {
        y0 = 0.0;
        y1 = 1.0;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let path: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
        .collect();
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tm}\" y=\"20\" font-family=\"monospace\" font-size=\"13\">{title}</text>\n",
            "<polyline fill=\"none\" stroke=\"#205080\" stroke-width=\"1\" points=\"{pts}\"/>\n",
            "</svg>"
        ),
        w = w,
        h = h,
        tm = m,
        title = title,
        pts = path.join(" ")
    )
}

/// Histogram of values in log10 bins.
pub fn svg_histogram(values: &[f64], bins: usize, title: &str) -> String {
    let (w, h, m) = (640.0, 480.0, 40.0);
    let logs: Vec<f64> = values
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v.log10())
        .collect();
    if logs.is_empty() {
        return svg_polyline(&[], title);
    }
    let lo = logs.iter().cloned().fold(f64::MAX, f64::min);
    let hi = logs.iter().cloned().fold(f64::MIN, f64::max);
    let span = (hi - lo).max(1e-9);
    let mut counts = vec![0usize; bins];
    for l in &logs {
        let b = (((l - lo) / span) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let max_c = counts.iter().cloned().max().unwrap_or(1).max(1);
    let bw = (w - 2.0 * m) / bins as f64;
    let mut bars = String::new();
    for (i, c) in counts.iter().enumerate() {
        let bh = (h - 2.0 * m) * (*c as f64) / max_c as f64;
        bars.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#803020\"/>\n",
            m + i as f64 * bw,
            h - m - bh,
            bw * 0.9,
            bh
        ));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tm}\" y=\"20\" font-family=\"monospace\" font-size=\"13\">{title} (log10 {lo:.2}..{hi:.2})</text>\n",
            "{bars}",
            "</svg>"
        ),
        w = w,
        h = h,
        tm = m,
        title = title,
        lo = lo,
        hi = hi,
        bars = bars
    )
}
