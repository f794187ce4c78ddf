//! The aggregated tab-delimited panel files: one `N x D` matrix per field with
//! a header row of dates (most recent first), plus single-column name and
//! minable files. Missing cells are written as `NA`.
//!
//! The name file carries the only asset identifier, so a panel read back from
//! these files has `name == slug` for every asset.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use cryptofactor_core::{AssetMeta, DateAxis, Field, FieldMatrix, Panel};

use crate::error::{read_text, write_text, Error, Result};

pub const FIELD_FILES: [(Field, &str); 6] = [
    (Field::Close, "cr.prc.txt"),
    (Field::Open, "cr.open.txt"),
    (Field::High, "cr.high.txt"),
    (Field::Low, "cr.low.txt"),
    (Field::Volume, "cr.vol.txt"),
    (Field::Cap, "cr.cap.txt"),
];
pub const NAME_FILE: &str = "cr.name.txt";
pub const MNBL_FILE: &str = "cr.mnbl.txt";

pub const MISSING: &str = "NA";

/// Writes the eight legacy files into `dir`, creating it if needed.
pub fn write_legacy_panel(panel: &Panel, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let header = panel
        .axis()
        .dates()
        .iter()
        .map(|d| d.format("%Y-%m-%d").to_string())
        .collect::<Vec<_>>()
        .join("\t");
    for (field, name) in FIELD_FILES {
        write_text(&dir.join(name), &matrix_text(&header, panel.field(field)))?;
    }
    let mut names = String::new();
    let mut mnbl = String::new();
    for a in panel.assets() {
        writeln!(names, "{}", a.slug).unwrap();
        writeln!(mnbl, "{}", u8::from(a.minable)).unwrap();
    }
    write_text(&dir.join(NAME_FILE), &names)?;
    write_text(&dir.join(MNBL_FILE), &mnbl)
}

/// Tab-separated matrix with a header row; `NA` for missing cells.
pub fn matrix_text(header: &str, m: &FieldMatrix) -> String {
    let mut out = String::with_capacity((m.rows() + 1) * (m.cols() * 12 + 1));
    out.push_str(header);
    out.push('\n');
    for i in 0..m.rows() {
        for (s, v) in m.row(i).enumerate() {
            if s > 0 {
                out.push('\t');
            }
            match v {
                Some(v) => write!(out, "{v}").unwrap(),
                None => out.push_str(MISSING),
            }
        }
        out.push('\n');
    }
    out
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(s)
}

fn lines(text: &str) -> Vec<&str> {
    let mut v: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    while v.last().is_some_and(|l| l.trim().is_empty()) {
        v.pop();
    }
    v
}

fn parse_header(file: &str, line: &str) -> Result<Vec<NaiveDate>> {
    if line.trim().is_empty() {
        return Ok(Vec::new());
    }
    line.split('\t')
        .enumerate()
        .map(|(c, cell)| {
            NaiveDate::parse_from_str(unquote(cell), "%Y-%m-%d")
                .map_err(|e| Error::parse(file, 1, c + 1, format!("bad date `{cell}`: {e}")))
        })
        .collect()
}

fn read_matrix(dir: &Path, file: &str, rows: usize) -> Result<(Vec<NaiveDate>, FieldMatrix)> {
    let text = read_text(&dir.join(file))?;
    let lines = lines(&text);
    let Some(first) = lines.first() else {
        return Err(Error::parse(file, 1, 1, "missing header row"));
    };
    let dates = parse_header(file, first)?;
    let body = &lines[1..];
    if body.len() != rows {
        return Err(Error::Format(format!(
            "{file} has {} data rows but {NAME_FILE} lists {rows} assets",
            body.len()
        )));
    }
    let mut m = FieldMatrix::missing(rows, dates.len());
    for (i, line) in body.iter().enumerate() {
        let cells: Vec<&str> = if dates.is_empty() && line.is_empty() {
            Vec::new()
        } else {
            line.split('\t').collect()
        };
        if cells.len() != dates.len() {
            return Err(Error::parse(
                file,
                i + 2,
                cells.len().min(dates.len()) + 1,
                format!("expected {} cells, found {}", dates.len(), cells.len()),
            ));
        }
        for (s, cell) in cells.iter().enumerate() {
            let cell = unquote(cell);
            if cell == MISSING {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::parse(file, i + 2, s + 1, format!("not a number: `{cell}`")))?;
            m.set(i, s, Some(v));
        }
    }
    Ok((dates, m))
}

fn read_column(dir: &Path, file: &str) -> Result<Vec<String>> {
    let text = read_text(&dir.join(file))?;
    Ok(lines(&text).iter().map(|l| unquote(l).to_string()).collect())
}

/// Reads the eight legacy files from `dir`.
pub fn read_legacy_panel(dir: &Path) -> Result<Panel> {
    let names = read_column(dir, NAME_FILE)?;
    let mnbl = read_column(dir, MNBL_FILE)?;
    if mnbl.len() != names.len() {
        return Err(Error::Format(format!(
            "{MNBL_FILE} has {} lines but {NAME_FILE} has {}",
            mnbl.len(),
            names.len()
        )));
    }
    let assets = names
        .into_iter()
        .zip(&mnbl)
        .enumerate()
        .map(|(i, (name, m))| {
            let minable = match m.as_str() {
                "1" | "Y" => true,
                "0" | "N" => false,
                other => return Err(Error::parse(MNBL_FILE, i + 1, 1, format!("expected 0 or 1, got `{other}`"))),
            };
            Ok(AssetMeta::new(name.clone(), name, minable))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut axis: Option<Vec<NaiveDate>> = None;
    let mut fields: [FieldMatrix; 6] = std::array::from_fn(|_| FieldMatrix::missing(0, 0));
    for (field, file) in FIELD_FILES {
        let (dates, m) = read_matrix(dir, file, assets.len())?;
        match &axis {
            Some(a) if *a != dates => {
                return Err(Error::Format(format!("{file} has a different date header than {}", FIELD_FILES[0].1)));
            }
            Some(_) => {}
            None => axis = Some(dates),
        }
        fields[field as usize] = m;
    }
    let axis = DateAxis::new(axis.unwrap_or_default())?;
    Ok(Panel::new(assets, axis, fields)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Panel {
        let dates = (0..3).map(|k| NaiveDate::from_ymd_opt(2018, 8, 18 - k).unwrap()).collect();
        let assets = vec![AssetMeta::new("bitcoin", "bitcoin", true), AssetMeta::new("tether", "tether", false)];
        let mut p = Panel::empty(assets, DateAxis::new(dates).unwrap()).unwrap();
        for f in Field::ALL {
            for i in 0..2 {
                for s in 0..3 {
                    p.set(f, i, s, Some(0.1 + (i * 3 + s) as f64 * 1234.5678)).unwrap();
                }
            }
        }
        p.set(Field::Volume, 1, 2, None).unwrap();
        p
    }

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = toy();
        write_legacy_panel(&p, dir.path()).unwrap();
        assert_eq!(read_legacy_panel(dir.path()).unwrap(), p);
        let vol = std::fs::read_to_string(dir.path().join("cr.vol.txt")).unwrap();
        let lines: Vec<&str> = vol.lines().collect();
        assert_eq!(lines[0], "2018-08-18\t2018-08-17\t2018-08-16");
        assert!(lines[2].ends_with("\tNA"));
        assert_eq!(std::fs::read_to_string(dir.path().join(MNBL_FILE)).unwrap(), "1\n0\n");
    }

    #[test]
    fn name_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_legacy_panel(&toy(), dir.path()).unwrap();
        std::fs::write(dir.path().join(NAME_FILE), "a\nb\nc\n").unwrap();
        std::fs::write(dir.path().join(MNBL_FILE), "1\n0\n1\n").unwrap();
        assert!(matches!(read_legacy_panel(dir.path()), Err(Error::Format(_))));
    }

    #[test]
    fn bad_cell_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        write_legacy_panel(&toy(), dir.path()).unwrap();
        let path = dir.path().join("cr.high.txt");
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut cells: Vec<&str> = lines[1].split('\t').collect();
        cells[1] = "x";
        lines[1] = cells.join("\t");
        std::fs::write(&path, lines.join("\n")).unwrap();
        match read_legacy_panel(dir.path()) {
            Err(Error::Parse { file, line, column, .. }) => assert_eq!((file.as_str(), line, column), ("cr.high.txt", 2, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_panel() {
        let dir = tempfile::tempdir().unwrap();
        let p = Panel::empty(vec![], DateAxis::new(vec![NaiveDate::from_ymd_opt(2018, 1, 1).unwrap()]).unwrap()).unwrap();
        write_legacy_panel(&p, dir.path()).unwrap();
        assert_eq!(read_legacy_panel(dir.path()).unwrap(), p);
    }
}
