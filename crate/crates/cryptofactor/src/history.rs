//! Per-asset history files, the asset listing and the bad-asset list.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use cryptofactor_core::{AssetHistory, AssetMeta, BadAssetList, HistoryRow};

use crate::error::{read_text, Error, Result};

pub const HISTORY_HEADER: [&str; 7] = ["Date", "Open", "High", "Low", "Close", "Volume", "MktCap"];
pub const HISTORY_DIR: &str = "CryptoHistData";
pub const LISTING_FILE: &str = "crypto.cap.txt";
pub const BAD_FILE: &str = "crypto.bad.txt";

const DATE_FORMATS: [&str; 4] = ["%Y-%m-%d", "%b %d, %Y", "%b %d %Y", "%Y%m%d"];

fn clean(cell: &str) -> &str {
    let c = cell.trim();
    c.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(c).trim()
}

pub fn parse_date(cell: &str) -> Option<NaiveDate> {
    let c = clean(cell);
    DATE_FORMATS.iter().find_map(|f| NaiveDate::parse_from_str(c, f).ok())
}

/// `?`, empty, `NA` and `-` are missing; thousands separators are dropped.
pub fn parse_cell(cell: &str) -> std::result::Result<Option<f64>, String> {
    let c = clean(cell);
    if matches!(c, "" | "?" | "NA" | "-") {
        return Ok(None);
    }
    let digits: String = c.chars().filter(|&ch| ch != ',').collect();
    digits.parse().map(Some).map_err(|_| format!("not a number: `{c}`"))
}

/// Parses one tab-delimited history with the header
/// `Date Open High Low Close Volume MktCap`, rows most recent first.
/// `label` names the source in error messages.
pub fn parse_asset_history(text: &str, meta: AssetMeta, label: &str) -> Result<AssetHistory> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::parse(label, 1, 1, "missing header row"));
    };
    let names: Vec<&str> = header.split('\t').map(clean).collect();
    if names != HISTORY_HEADER {
        return Err(Error::parse(
            label,
            1,
            1,
            format!("expected header `{}`, found `{}`", HISTORY_HEADER.join("\t"), names.join("\t")),
        ));
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != HISTORY_HEADER.len() {
            return Err(Error::parse(label, k + 1, 1, format!("expected 7 cells, found {}", cells.len())));
        }
        let date = parse_date(cells[0])
            .ok_or_else(|| Error::parse(label, k + 1, 1, format!("unrecognized date `{}`", cells[0])))?;
        let mut values = [None; 6];
        for (c, cell) in cells[1..].iter().enumerate() {
            values[c] = parse_cell(cell).map_err(|m| Error::parse(label, k + 1, c + 2, m))?;
        }
        if let Some(prev) = rows.last().map(|r: &HistoryRow| r.date) {
            if date >= prev {
                return Err(Error::parse(label, k + 1, 1, format!("date {date} is not older than {prev}")));
            }
        }
        rows.push(HistoryRow { date, values });
    }
    Ok(AssetHistory::new(meta, rows)?)
}

/// Anything that can hand out the raw history text of an asset.
pub trait HistorySource {
    fn get(&self, slug: &str) -> std::result::Result<String, String>;
}

/// Reads `<root>/CryptoHistData/<slug>.txt`, falling back to `<root>/<slug>.txt`.
#[derive(Debug, Clone)]
pub struct DirectorySource {
    root: PathBuf,
}

impl DirectorySource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn candidates(&self, slug: &str) -> [PathBuf; 2] {
        let file = format!("{slug}.txt");
        [self.root.join(HISTORY_DIR).join(&file), self.root.join(file)]
    }

    /// Slugs of every `*.txt` history under the root, sorted.
    pub fn slugs(&self) -> Result<Vec<String>> {
        let nested = self.root.join(HISTORY_DIR);
        let dir = if nested.is_dir() { nested } else { self.root.clone() };
        let mut out = BTreeSet::new();
        for entry in std::fs::read_dir(&dir).map_err(Error::io(&dir))? {
            let path = entry.map_err(Error::io(&dir))?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name.starts_with("cr.") || name == LISTING_FILE || name == BAD_FILE {
                continue;
            }
            if let Some(stem) = name.strip_suffix(".txt") {
                out.insert(stem.to_string());
            }
        }
        Ok(out.into_iter().collect())
    }
}

impl HistorySource for DirectorySource {
    fn get(&self, slug: &str) -> std::result::Result<String, String> {
        let [a, b] = self.candidates(slug);
        let path = if a.is_file() { a } else { b };
        std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Fetches and parses every asset. Fetch failures land in the bad list;
/// malformed text is an error.
pub fn fetch_histories(source: &dyn HistorySource, assets: &[AssetMeta]) -> Result<(Vec<AssetHistory>, BadAssetList)> {
    let mut out = Vec::with_capacity(assets.len());
    let mut bad = BadAssetList::default();
    for meta in assets {
        match source.get(&meta.slug) {
            Ok(text) => out.push(parse_asset_history(&text, meta.clone(), &format!("{}.txt", meta.slug))?),
            Err(why) => bad.push(meta.slug.clone(), why),
        }
    }
    Ok((out, bad))
}

/// Reads the listing: a tab-delimited table with `URL` (the slug) and
/// `Minable` (`Y`/`N`) columns, ranked by market cap.
pub fn read_listing(path: &Path) -> Result<Vec<AssetMeta>> {
    let text = read_text(path)?;
    let file = path.file_name().and_then(|n| n.to_str()).unwrap_or(LISTING_FILE).to_string();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::parse(&file, 1, 1, "missing header row"));
    };
    let cols: Vec<&str> = header.split('\t').map(clean).collect();
    let find = |name: &str| cols.iter().position(|c| c.eq_ignore_ascii_case(name));
    let url = find("URL").ok_or_else(|| Error::parse(&file, 1, 1, "no `URL` column"))?;
    let mnbl = find("Minable");
    let mut out = Vec::new();
    for (k, line) in lines {
        let cells: Vec<&str> = line.split('\t').map(clean).collect();
        let slug = cells
            .get(url)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::parse(&file, k + 1, url + 1, "missing URL"))?;
        let minable = match mnbl.map(|c| cells.get(c).copied().unwrap_or("")) {
            None | Some("N") | Some("") => false,
            Some("Y") => true,
            Some(other) => return Err(Error::parse(&file, k + 1, mnbl.unwrap() + 1, format!("expected Y or N, got `{other}`"))),
        };
        out.push(AssetMeta::new(*slug, *slug, minable));
    }
    Ok(out)
}

/// One slug per line; blank lines and `#` comments are ignored.
pub fn read_slug_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

pub fn bad_list_text(bad: &BadAssetList) -> String {
    bad.slugs().map(|s| format!("{s}\n")).collect()
}
