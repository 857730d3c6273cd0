//! Stroke-level CSV datasets.
//!
//! ```text
//! # frame=normalized
//! rally_id,stroke_no,player_id,role,shot_type,landing_x,landing_y
//! r000000,1,p003,A,short_service,-2.5e-1,1.2e-1
//! ```
//!
//! The optional first line declares the coordinate frame. `normalized`
//! (the default) stores `x` in `[-0.5, 0.5]`; `unit` stores `x` in `[0, 1]`
//! and is shifted on load. Rows of a rally are contiguous and numbered from 1.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GeneratorConfig;
use crate::error::{Error, Result};
use crate::rally::{validate_rally, Coord, PlayerId, PlayerRole, Rally, RoleSet, ShotType, Stroke};

pub const HEADER: [&str; 7] = ["rally_id", "stroke_no", "player_id", "role", "shot_type", "landing_x", "landing_y"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Normalized,
    Unit,
}

impl Frame {
    fn to_normalized(self, x: f64) -> f64 {
        match self {
            Frame::Normalized => x,
            Frame::Unit => x - 0.5,
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Normalized => "normalized",
            Frame::Unit => "unit",
        })
    }
}

impl FromStr for Frame {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "normalized" => Ok(Frame::Normalized),
            "unit" => Ok(Frame::Unit),
            _ => Err(format!("unknown frame {s:?}")),
        }
    }
}

/// Writes rallies in the normalized frame with 17 significant digits.
pub fn save_csv(rallies: &[Rally], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# frame={}", Frame::Normalized)?;
    writeln!(w, "{}", HEADER.join(","))?;
    for r in rallies {
        for (i, s) in r.strokes.iter().enumerate() {
            writeln!(w, "{},{},{},{},{},{:.16e},{:.16e}", r.id, i + 1, s.player_id, s.role, s.shot, s.area.x, s.area.y)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct Row {
    rally_id: String,
    stroke_no: usize,
    player_id: String,
    role: String,
    shot_type: String,
    landing_x: f64,
    landing_y: f64,
}

fn build_rally(id: String, strokes: Vec<Stroke>) -> Result<Rally> {
    let player_a = strokes[0].player_id.clone();
    let player_b = strokes
        .iter()
        .find(|s| s.role == PlayerRole::B)
        .or(strokes.get(1))
        .map_or_else(|| player_a.clone(), |s| s.player_id.clone());
    let rally = Rally { id, player_a, player_b, strokes, tau: None, swapped: RoleSet::EMPTY };
    let violations = validate_rally(&rally);
    if !violations.is_empty() {
        let violations = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return Err(Error::Validation { rally_id: rally.id, violations });
    }
    Ok(rally)
}

/// Loads and validates a dataset. Parse errors carry the 1-based file line.
pub fn load_csv(path: &Path) -> Result<Vec<Rally>> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let perr = |line: usize, message: String| Error::Parse { path: name.clone(), line, message };
    let (frame, body, offset) = match text.strip_prefix('#') {
        Some(rest) => {
            let (first, body) = rest.split_once('\n').unwrap_or((rest, ""));
            let value = first.trim().strip_prefix("frame=").ok_or_else(|| perr(1, "expected `# frame=...`".into()))?;
            (value.trim().parse::<Frame>().map_err(|m| perr(1, m))?, body, 1)
        }
        None => (Frame::default(), text.as_str(), 0),
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| perr(offset + 1, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(perr(offset + 1, format!("header must be `{}`", HEADER.join(","))));
    }
    let mut rallies = Vec::new();
    let mut seen = BTreeSet::new();
    let mut current: Option<(String, Vec<Stroke>)> = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| perr(offset + e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = offset + rec.position().map_or(0, |p| p.line() as usize);
        let row: Row = rec.deserialize(None).map_err(|e| perr(line, e.to_string()))?;
        let shot: ShotType = row.shot_type.parse().map_err(|_| perr(line, format!("unknown shot type {:?}", row.shot_type)))?;
        let role: PlayerRole = row.role.parse().map_err(|_| perr(line, format!("unknown role {:?}", row.role)))?;
        let area = Coord::new(frame.to_normalized(row.landing_x), row.landing_y);
        let stroke = Stroke { role, player_id: PlayerId::new(row.player_id), shot, area };
        match &mut current {
            Some((id, strokes)) if *id == row.rally_id => {
                if row.stroke_no != strokes.len() + 1 {
                    return Err(perr(line, format!("rally {id}: expected stroke {}, got {}", strokes.len() + 1, row.stroke_no)));
                }
                strokes.push(stroke);
            }
            _ => {
                if let Some((id, strokes)) = current.take() {
                    rallies.push(build_rally(id, strokes)?);
                }
                if !seen.insert(row.rally_id.clone()) {
                    return Err(perr(line, format!("rows of rally {} are not contiguous", row.rally_id)));
                }
                if row.stroke_no != 1 {
                    return Err(perr(line, format!("rally {} starts at stroke {}", row.rally_id, row.stroke_no)));
                }
                current = Some((row.rally_id, vec![stroke]));
            }
        }
    }
    if let Some((id, strokes)) = current {
        rallies.push(build_rally(id, strokes)?);
    }
    Ok(rallies)
}

/// Sidecar document describing how a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: GeneratorConfig,
    pub frame: Frame,
    pub n_rallies: usize,
    pub n_strokes: usize,
}

pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn save_meta(meta: &DatasetMeta, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_meta(path: &Path) -> Result<DatasetMeta> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
