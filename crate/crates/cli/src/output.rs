//! CSV, SVG and manifest files.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::boundary::{Polyline, RatioMap};
use crate::config::ProtocolId;
use crate::error::CliError;
use crate::sweep::{Cell, ErrorSurface};

pub const SURFACE_HEADER: [&str; 5] = ["delta", "sigma", "protocol", "error_prob", "std_error"];

fn num(x: f64) -> String {
    // Display prints the shortest string that parses back to the same f64.
    format!("{x}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes surfaces in long form, one row per `(protocol, σ, δ)`.
pub fn write_surfaces<W: Write>(out: W, surfaces: &[ErrorSurface]) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record(SURFACE_HEADER)?;
    for s in surfaces {
        for (j, sigma) in s.sigmas.iter().enumerate() {
            for (i, delta) in s.deltas.iter().enumerate() {
                let c = s.get(i, j);
                w.write_record([num(*delta), num(*sigma), s.protocol.to_string(), num(c.error_prob), num(c.std_error)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(path: &Path, surfaces: &[ErrorSurface]) -> Result<(), CliError> {
    write_surfaces(fs::File::create(path)?, surfaces)
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse()
        .map_err(|_| CliError::Runtime(format!("bad {what} value `{s}` in surface CSV")))
}

/// Reads back what [`write_surfaces`] wrote.
pub fn read_surfaces<R: Read>(input: R) -> Result<Vec<ErrorSurface>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().collect::<Vec<_>>() != SURFACE_HEADER {
        return Err(CliError::Runtime("unexpected surface CSV header".into()));
    }
    // Rows are grouped by protocol, then σ, then δ.
    let mut out: Vec<(ProtocolId, Vec<(f64, f64, Cell)>)> = Vec::new();
    for row in r.records() {
        let row = row?;
        let p: ProtocolId = row[2].parse().map_err(|_| CliError::Runtime(format!("unknown protocol `{}`", &row[2])))?;
        let entry = (
            parse_f64(&row[0], "delta")?,
            parse_f64(&row[1], "sigma")?,
            Cell {
                error_prob: parse_f64(&row[3], "error_prob")?,
                std_error: parse_f64(&row[4], "std_error")?,
            },
        );
        match out.last_mut() {
            Some((q, rows)) if *q == p => rows.push(entry),
            _ => out.push((p, vec![entry])),
        }
    }
    out.into_iter()
        .map(|(protocol, rows)| {
            let mut deltas: Vec<f64> = Vec::new();
            let mut sigmas: Vec<f64> = Vec::new();
            for (d, s, _) in &rows {
                if sigmas.last() != Some(s) {
                    sigmas.push(*s);
                }
                if sigmas.len() == 1 {
                    deltas.push(*d);
                }
            }
            if deltas.len() * sigmas.len() != rows.len() {
                return Err(CliError::Runtime(format!("{protocol}: rows do not form a grid")));
            }
            Ok(ErrorSurface {
                protocol,
                deltas,
                sigmas,
                values: rows.into_iter().map(|r| r.2).collect(),
            })
        })
        .collect()
}

pub fn load_surfaces(path: &Path) -> Result<Vec<ErrorSurface>, CliError> {
    read_surfaces(fs::File::open(path)?)
}

pub fn emit_ratio_csv(path: &Path, ratio: &RatioMap) -> Result<(), CliError> {
    let mut w = writer(fs::File::create(path)?);
    w.write_record(["delta", "sigma", "ratio", "std_error"])?;
    for (j, s) in ratio.sigmas.iter().enumerate() {
        for (i, d) in ratio.deltas.iter().enumerate() {
            w.write_record([num(*d), num(*s), num(ratio.get(i, j)), num(ratio.std_error(i, j))])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_boundary_csv(path: &Path, lines: &[Polyline]) -> Result<(), CliError> {
    let mut w = writer(fs::File::create(path)?);
    w.write_record(["polyline", "delta", "sigma"])?;
    for (k, line) in lines.iter().enumerate() {
        for (d, s) in line {
            w.write_record([k.to_string(), num(*d), num(*s)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// How cell values map to colours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Palette {
    /// Error probabilities in `[0, ½]`: dark (0) to light (½).
    Sequential,
    /// Ratios on a log scale: red below 1, white at 1, blue above 1,
    /// saturating at `1/span` and `span`.
    Diverging { span: f64 },
}

pub type Rgb = (u8, u8, u8);

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let f = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    (f(a.0, b.0), f(a.1, b.1), f(a.2, b.2))
}

pub fn colour(palette: Palette, v: f64) -> Rgb {
    match palette {
        Palette::Sequential => {
            let t = (v / 0.5).clamp(0.0, 1.0);
            lerp((13, 8, 135), (252, 253, 191), t)
        }
        Palette::Diverging { span } => {
            const WHITE: Rgb = (255, 255, 255);
            if !v.is_finite() || v <= 0.0 {
                return if v > 0.0 { (33, 102, 172) } else { (178, 24, 43) };
            }
            let t = (v.ln() / span.ln()).clamp(-1.0, 1.0);
            if t >= 0.0 {
                lerp(WHITE, (33, 102, 172), t)
            } else {
                lerp(WHITE, (178, 24, 43), -t)
            }
        }
    }
}

/// A grid of values to draw; `values[j * deltas.len() + i]`.
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub deltas: &'a [f64],
    pub sigmas: &'a [f64],
    pub values: &'a [f64],
    pub palette: Palette,
    pub sigma_over_pi: bool,
}

const CELL_PX: f64 = 3.0;
const MARGIN: f64 = 60.0;

/// SVG 1.1 heatmap with δ across and σ upward, one rectangle per cell.
pub fn render_svg(h: &Heatmap<'_>) -> String {
    let (nd, ns) = (h.deltas.len(), h.sigmas.len());
    let cell = (600.0 / nd.max(ns) as f64).clamp(CELL_PX, 40.0);
    let (w, ht) = (nd as f64 * cell, ns as f64 * cell);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}">"#,
        w + 2.0 * MARGIN,
        ht + 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, h.title);
    for j in 0..ns {
        for i in 0..nd {
            let (r, g, b) = colour(h.palette, h.values[j * nd + i]);
            let x = MARGIN + i as f64 * cell;
            let y = MARGIN + ht - (j + 1) as f64 * cell;
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="#{r:02x}{g:02x}{b:02x}"/>"##
            );
        }
    }
    let sigma_label = if h.sigma_over_pi { "σ/π" } else { "σ (rad)" };
    let scale = if h.sigma_over_pi { core::f64::consts::PI } else { 1.0 };
    let (d0, d1) = (h.deltas[0], h.deltas[nd - 1]);
    let (s0, s1) = (h.sigmas[0] / scale, h.sigmas[ns - 1] / scale);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">δ (rad)</text>"#,
        MARGIN + w / 2.0,
        MARGIN + ht + 40.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 {} {})">{sigma_label}</text>"#,
        MARGIN - 40.0,
        MARGIN + ht / 2.0,
        MARGIN - 40.0,
        MARGIN + ht / 2.0
    );
    let tick = |s: &mut String, x: f64, y: f64, anchor: &str, v: f64| {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{v:.3}</text>"#);
    };
    tick(&mut s, MARGIN, MARGIN + ht + 16.0, "start", d0);
    tick(&mut s, MARGIN + w, MARGIN + ht + 16.0, "end", d1);
    tick(&mut s, MARGIN - 4.0, MARGIN + ht, "end", s0);
    tick(&mut s, MARGIN - 4.0, MARGIN + 10.0, "end", s1);
    let legend = match h.palette {
        Palette::Sequential => "error probability: dark 0, light 0.5".to_string(),
        Palette::Diverging { span } => {
            format!("ratio: red < 1 (numerator lower), white = 1, blue > 1 (denominator lower); saturates at {span}")
        }
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}: {legend}</text>"#,
        MARGIN + w / 2.0,
        MARGIN - 20.0,
        h.title
    );
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg_heatmap(path: &Path, h: &Heatmap<'_>) -> Result<(), CliError> {
    fs::write(path, render_svg(h))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub outputs: Vec<String>,
}

pub fn write_manifest<C: Serialize>(dir: &Path, manifest: &Manifest<'_, C>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}
