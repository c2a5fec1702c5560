//! Tables, ν sweeps and region data, with CSV and JSON serialization.
//!
//! Everything here produces a [`Dataset`]: named columns of loosely typed
//! cells plus a small metadata header. Level data always uses
//! [`LEVEL_COLUMNS`]; a missing lowest level is an empty cell, never a
//! sentinel number.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value as Json};
use thiserror::Error;

use crate::channels::{
    z_critical, z_singular, Channel, ExtensionAngle, HalfInteger, Region, Zeta, ELECTRON_REST_KEV,
};
use crate::spectra::{nu_lower, solve_levels, Level, LevelSet, SolveError, SolverConfig, ThetaVariant};

/// Header of every level dataset, in order.
pub const LEVEL_COLUMNS: [&str; 9] = ["region", "Z", "alpha_inv", "two_j", "zeta", "nu", "n", "E_over_m", "residual"];

pub const NU_LOWER_COLUMNS: [&str; 5] = ["region", "Z", "alpha_inv", "two_j", "nu_lower"];

pub const REGION_MAP_COLUMNS: [&str; 4] = ["two_j", "j", "Z_s", "Z_c"];

/// Region label of the separator row that `nu_lower_curve` inserts between
/// segments.
pub const GAP_MARKER: &str = "gap";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(msg: impl Into<String>) -> ReportError {
    ReportError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Cell::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Cell::Empty)
    }

    // 17 significant digits, so every float reads back bit for bit.
    fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn from_csv_field(field: &str) -> Cell {
        if field.is_empty() {
            Cell::Empty
        } else if let Ok(v) = field.parse::<i64>() {
            Cell::Int(v)
        } else if let Ok(v) = field.parse::<f64>() {
            Cell::Float(v)
        } else {
            Cell::Text(field.to_string())
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Int(v) => Json::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Cell::Text(s) => Json::String(s.clone()),
            Cell::Empty => Json::Null,
        }
    }

    fn from_json(v: &Json) -> Result<Cell, ReportError> {
        Ok(match v {
            Json::Null => Cell::Empty,
            Json::String(s) => Cell::Text(s.clone()),
            Json::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i),
                _ => Cell::Float(n.as_f64().ok_or_else(|| invalid(format!("bad number {n}")))?),
            },
            other => return Err(invalid(format!("unexpected JSON cell {other}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub alpha_inv: f64,
    pub tool_version: String,
    pub theta_variant: ThetaVariant,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

impl Metadata {
    pub fn new(alpha_inv: f64, theta_variant: ThetaVariant) -> Self {
        Metadata {
            alpha_inv,
            tool_version: TOOL_VERSION.to_string(),
            theta_variant,
            notices: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// Dimensionless E/m.
    #[default]
    Rest,
    KeV,
}

impl std::str::FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "m" => Ok(Units::Rest),
            "keV" | "kev" => Ok(Units::KeV),
            other => Err(format!("unknown units '{other}' (expected m or keV)")),
        }
    }
}

impl Dataset {
    fn new(metadata: Metadata, columns: &[&str]) -> Self {
        Dataset {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell `name` of every row.
    pub fn values<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Cell> + 'a {
        let idx = self.column(name);
        self.rows.iter().filter_map(move |r| idx.map(|i| &r[i]))
    }

    /// Rescales the energy column to keV with the given electron rest energy
    /// and renames it to `E_keV`. Other columns are untouched.
    pub fn with_units(mut self, units: Units, rest_kev: f64) -> Self {
        if units == Units::Rest {
            return self;
        }
        if let Some(i) = self.column("E_over_m") {
            self.columns[i] = "E_keV".to_string();
            for row in &mut self.rows {
                if let Cell::Float(v) = row[i] {
                    row[i] = Cell::Float(v * rest_kev);
                }
            }
        }
        self
    }

    pub fn in_kev(self) -> Self {
        self.with_units(Units::KeV, ELECTRON_REST_KEV)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a dataset written by [`Dataset::write_csv`]. CSV carries no
    /// metadata, so the caller supplies it.
    pub fn read_csv<R: Read>(input: R, metadata: Metadata) -> Result<Dataset, ReportError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(Cell::from_csv_field).collect());
        }
        Ok(Dataset { metadata, columns, rows })
    }

    pub fn to_csv_string(&self) -> Result<String, ReportError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// `{metadata, columns, rows}` with one object per row. Rows with a ν
    /// column also carry `nu_pi` = ν/π right after it.
    pub fn to_json(&self) -> Json {
        let nu = self.column("nu");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (i, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                    obj.insert(name.clone(), cell.to_json());
                    if Some(i) == nu {
                        let pi = cell.as_f64().map(|v| Cell::Float(v / PI)).unwrap_or(Cell::Empty);
                        obj.insert("nu_pi".into(), pi.to_json());
                    }
                }
                Json::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("metadata".into(), serde_json::to_value(&self.metadata).expect("metadata serializes"));
        top.insert("columns".into(), Json::from(self.columns.clone()));
        top.insert("rows".into(), Json::Array(rows));
        Json::Object(top)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), ReportError> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String, ReportError> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        Ok(String::from_utf8(buf).expect("json output is utf-8"))
    }

    pub fn read_json<R: Read>(input: R) -> Result<Dataset, ReportError> {
        let top: Json = serde_json::from_reader(input)?;
        let metadata = serde_json::from_value(top.get("metadata").cloned().ok_or_else(|| invalid("missing metadata"))?)?;
        let columns: Vec<String> =
            serde_json::from_value(top.get("columns").cloned().ok_or_else(|| invalid("missing columns"))?)?;
        let mut rows = Vec::new();
        for row in top.get("rows").and_then(Json::as_array).ok_or_else(|| invalid("missing rows"))? {
            let obj = row.as_object().ok_or_else(|| invalid("row is not an object"))?;
            let cells = columns
                .iter()
                .map(|c| Cell::from_json(obj.get(c).unwrap_or(&Json::Null)))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(cells);
        }
        Ok(Dataset { metadata, columns, rows })
    }
}

fn level_row(channel: &Channel, region: Region, nu: Option<ExtensionAngle>, n: u32, level: Option<&Level>) -> Vec<Cell> {
    vec![
        Cell::Text(region.as_str().to_string()),
        Cell::Float(channel.z()),
        Cell::Float(channel.alpha_inv()),
        Cell::Int(i64::from(channel.j().twice())),
        Cell::Int(i64::from(channel.zeta().as_i8())),
        nu.map_or(Cell::Empty, |v| Cell::Float(v.radians())),
        Cell::Int(i64::from(n)),
        level.map_or(Cell::Empty, |l| Cell::Float(l.energy)),
        level.map_or(Cell::Empty, |l| Cell::Float(l.residual)),
    ]
}

/// Rows for solved level sets, indices from each set's first index up to
/// `n_max`. A missing lowest level keeps its row with empty energy.
pub fn levels_dataset(sets: &[LevelSet], n_max: u32, theta_variant: ThetaVariant) -> Dataset {
    let alpha_inv = sets.first().map_or(f64::NAN, |s| s.channel.alpha_inv());
    let mut ds = Dataset::new(Metadata::new(alpha_inv, theta_variant), &LEVEL_COLUMNS);
    for set in sets {
        for n in set.channel.lowest_index()..=n_max {
            ds.rows.push(level_row(&set.channel, set.region, set.nu, n, set.get(n)));
        }
        ds.metadata.notices.extend(set.diagnostics.iter().cloned());
    }
    ds
}

/// The usual table rows: −π/2, −π/4, 0, π/4, π/2.
pub fn default_nu_list() -> Vec<ExtensionAngle> {
    vec![
        ExtensionAngle::lower_edge(),
        ExtensionAngle::from_pi_fraction(-1, 4),
        ExtensionAngle::zero(),
        ExtensionAngle::from_pi_fraction(1, 4),
        ExtensionAngle::upper_edge(),
    ]
}

/// `count` points from −π/2 (the lower edge) to π/2 inclusive, exact
/// wherever i/(count − 1) is a multiple of 1/4.
pub fn uniform_nu_grid(count: usize) -> Result<Vec<ExtensionAngle>, ReportError> {
    if count < 2 {
        return Err(invalid("a uniform nu grid needs at least 2 points"));
    }
    let den = 2 * (count as i64 - 1);
    Ok((0..count as i64)
        .map(|i| ExtensionAngle::from_pi_fraction(2 * i - (count as i64 - 1), den))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Level(Level),
    /// The lowest level has dived into the lower continuum.
    Absent,
    /// The index does not exist for this ζ (below the first index).
    Undefined,
}

impl Entry {
    pub fn energy(&self) -> Option<f64> {
        match self {
            Entry::Level(l) => Some(l.energy),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub n: u32,
    pub zeta: Zeta,
    pub entry: Entry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    /// `None` only for the single Sommerfeld row of a nonsingular channel.
    pub nu: Option<ExtensionAngle>,
    pub entries: Vec<TableEntry>,
}

impl TableRow {
    pub fn entry(&self, n: u32, zeta: Zeta) -> Option<Entry> {
        self.entries.iter().find(|e| e.n == n && e.zeta == zeta).map(|e| e.entry)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Z, α and j of the table; its ζ is irrelevant.
    pub channel: Channel,
    pub region: Region,
    pub n_count: u32,
    pub rows: Vec<TableRow>,
    pub theta_variant: ThetaVariant,
    pub notice: Option<String>,
}

fn entries_from(set: &LevelSet, zeta: Zeta, lowest: u32, n_count: u32) -> Vec<TableEntry> {
    (0..n_count)
        .map(|n| {
            let entry = if n < lowest {
                Entry::Undefined
            } else {
                set.get(n).map_or(Entry::Absent, |l| Entry::Level(*l))
            };
            TableEntry { n, zeta, entry }
        })
        .collect()
}

/// Levels E₀..E_{n_count−1} for both ζ at each ν of `nu_list`, in the given
/// order. A nonsingular channel yields one Sommerfeld row and a notice.
pub fn make_table(
    channel: &Channel,
    nu_list: &[ExtensionAngle],
    n_count: u32,
    cfg: &SolverConfig,
) -> Result<Table, ReportError> {
    if n_count == 0 {
        return Err(invalid("n_count must be at least 1"));
    }
    let cfg = cfg.with_n_max(n_count.saturating_sub(1).max(1));
    let region = channel.region();
    let mut table = Table {
        channel: *channel,
        region,
        n_count,
        rows: Vec::new(),
        theta_variant: cfg.theta_variant,
        notice: None,
    };
    if !region.is_singular() {
        let mut entries = Vec::new();
        for zeta in Zeta::BOTH {
            let ch = channel.with_zeta(zeta);
            let set = solve_levels(&ch, None, &cfg)?;
            entries.extend(entries_from(&set, zeta, ch.lowest_index(), n_count));
        }
        table.rows.push(TableRow { nu: None, entries });
        table.notice = Some(format!(
            "channel [{channel}] is nonsingular: the Hamiltonian is unique and the table reduces to the Sommerfeld levels"
        ));
        return Ok(table);
    }
    if nu_list.is_empty() {
        return Err(invalid("nu list is empty"));
    }
    let jobs: Vec<(ExtensionAngle, Zeta)> =
        nu_list.iter().flat_map(|&nu| Zeta::BOTH.map(|z| (nu, z))).collect();
    let sets = jobs
        .par_iter()
        .map(|&(nu, zeta)| solve_levels(&channel.with_zeta(zeta), Some(nu), &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    for (pair, &nu) in sets.chunks(2).zip(nu_list) {
        let mut entries = Vec::new();
        for set in pair {
            entries.extend(entries_from(set, set.channel.zeta(), set.channel.lowest_index(), n_count));
        }
        table.rows.push(TableRow { nu: Some(nu), entries });
    }
    Ok(table)
}

/// Level rows of a table: per ν row, ζ = +1 then ζ = −1, ascending n.
/// Absent levels keep their row with empty energy and residual; undefined
/// indices are left out.
pub fn table_dataset(table: &Table) -> Dataset {
    let mut meta = Metadata::new(table.channel.alpha_inv(), table.theta_variant);
    meta.notices.extend(table.notice.clone());
    let mut ds = Dataset::new(meta, &LEVEL_COLUMNS);
    for row in &table.rows {
        for e in &row.entries {
            let ch = table.channel.with_zeta(e.zeta);
            match e.entry {
                Entry::Level(l) => ds.rows.push(level_row(&ch, table.region, row.nu, e.n, Some(&l))),
                Entry::Absent => ds.rows.push(level_row(&ch, table.region, row.nu, e.n, None)),
                Entry::Undefined => {}
            }
        }
    }
    ds
}

/// A sweep over ν for one or more charges of a channel family.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    /// One channel per charge; each supplies Z, α, j and the critical flag.
    pub channels: Vec<Channel>,
    pub zetas: Vec<Zeta>,
    pub nu_grid: Vec<ExtensionAngle>,
    /// Indices to emit. Indices below a ζ's first index are skipped for it.
    pub n_list: Vec<u32>,
    pub cfg: SolverConfig,
}

impl ScanSpec {
    pub fn new(channel: Channel, nu_grid: Vec<ExtensionAngle>, n_list: Vec<u32>) -> Self {
        ScanSpec {
            channels: vec![channel],
            zetas: Zeta::BOTH.to_vec(),
            nu_grid,
            n_list,
            cfg: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.channels.is_empty() {
            return Err(invalid("scan has no channels"));
        }
        if self.zetas.is_empty() {
            return Err(invalid("scan has no zeta values"));
        }
        if self.nu_grid.is_empty() {
            return Err(invalid("nu grid is empty"));
        }
        if self.n_list.is_empty() {
            return Err(invalid("n list is empty"));
        }
        for ch in &self.channels {
            if !ch.region().is_singular() {
                return Err(SolveError::ExtensionNotApplicable(ch.to_string()).into());
            }
        }
        Ok(())
    }
}

/// Rows (channel, ν, ζ, n) in that nesting order, computed concurrently but
/// emitted in grid order.
pub fn scan_nu(spec: &ScanSpec) -> Result<Dataset, ReportError> {
    spec.validate()?;
    let n_top = spec.n_list.iter().copied().max().unwrap_or(1).max(1);
    let cfg = spec.cfg.with_n_max(n_top);
    let jobs: Vec<(Channel, ExtensionAngle)> = spec
        .channels
        .iter()
        .flat_map(|ch| {
            spec.nu_grid
                .iter()
                .flat_map(move |&nu| spec.zetas.iter().map(move |&z| (ch.with_zeta(z), nu)))
        })
        .collect();
    let sets = jobs
        .par_iter()
        .map(|(ch, nu)| solve_levels(ch, Some(*nu), &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let alpha_inv = spec.channels[0].alpha_inv();
    let mut ds = Dataset::new(Metadata::new(alpha_inv, cfg.theta_variant), &LEVEL_COLUMNS);
    for set in &sets {
        let lowest = set.channel.lowest_index();
        for &n in spec.n_list.iter().filter(|&&n| n >= lowest) {
            ds.rows.push(level_row(&set.channel, set.region, set.nu, n, set.get(n)));
        }
    }
    Ok(ds)
}

/// `steps` equally spaced charges from `z_from` to `z_to` inclusive; a single
/// step requires a degenerate range.
pub fn z_range(z_from: f64, z_to: f64, steps: usize) -> Result<Vec<f64>, ReportError> {
    if !(z_from.is_finite() && z_to.is_finite() && z_from > 0.0 && z_to >= z_from) {
        return Err(invalid(format!("bad charge range [{z_from}, {z_to}]")));
    }
    match steps {
        0 => Err(invalid("steps must be at least 1")),
        1 if z_from == z_to => Ok(vec![z_from]),
        1 => Err(invalid("a single step needs Z_from = Z_to")),
        _ => Ok((0..steps)
            .map(|i| {
                if i + 1 == steps {
                    z_to
                } else {
                    z_from + (z_to - z_from) * i as f64 / (steps - 1) as f64
                }
            })
            .collect()),
    }
}

/// ν_{−m} along a charge range. Where the range leaves a region the curve
/// is cut and a [`GAP_MARKER`] row separates the segments; nonsingular
/// charges have no ν_{−m} and only contribute to gaps.
pub fn nu_lower_curve(
    z_from: f64,
    z_to: f64,
    steps: usize,
    j: HalfInteger,
    alpha_inv: f64,
) -> Result<Dataset, ReportError> {
    let zs = z_range(z_from, z_to, steps)?;
    let mut ds = Dataset::new(Metadata::new(alpha_inv, ThetaVariant::default()), &NU_LOWER_COLUMNS);
    let mut prev: Option<Region> = None;
    for z in zs {
        let ch = Channel::new(z, alpha_inv, j, Zeta::Minus).map_err(SolveError::from)?;
        let region = ch.region();
        let changed = prev.is_some_and(|p| p != region);
        prev = Some(region);
        if !region.is_singular() {
            continue;
        }
        if changed && !ds.rows.is_empty() {
            ds.rows.push(gap_row());
        }
        let nu = nu_lower(&ch)?;
        ds.rows.push(vec![
            Cell::Text(region.as_str().to_string()),
            Cell::Float(z),
            Cell::Float(alpha_inv),
            Cell::Int(i64::from(j.twice())),
            Cell::Float(nu.radians()),
        ]);
    }
    Ok(ds)
}

fn gap_row() -> Vec<Cell> {
    let mut row = vec![Cell::Empty; NU_LOWER_COLUMNS.len()];
    row[0] = Cell::Text(GAP_MARKER.to_string());
    row
}

/// Singular and critical charges for j = 1/2, 3/2, … up to `j_max`, stopping
/// once Z_s(j) exceeds `z_max`.
pub fn region_map(z_max: f64, j_max: HalfInteger, alpha_inv: f64) -> Result<Dataset, ReportError> {
    if !(z_max.is_finite() && z_max > 0.0) {
        return Err(invalid(format!("Z_max must be positive, got {z_max}")));
    }
    if !(alpha_inv.is_finite() && alpha_inv > 0.0) {
        return Err(invalid(format!("alpha_inv must be positive, got {alpha_inv}")));
    }
    let mut ds = Dataset::new(Metadata::new(alpha_inv, ThetaVariant::default()), &REGION_MAP_COLUMNS);
    let mut j = HalfInteger::ONE_HALF;
    while j.twice() <= j_max.twice() {
        let zs = z_singular(j, alpha_inv);
        if zs > z_max {
            break;
        }
        ds.rows.push(vec![
            Cell::Int(i64::from(j.twice())),
            Cell::Float(j.value()),
            Cell::Float(zs),
            Cell::Float(z_critical(j, alpha_inv)),
        ]);
        j = j.next();
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::DEFAULT_ALPHA_INV;

    #[test]
    fn uniform_grid_hits_quarter_points_exactly() {
        let g = uniform_nu_grid(181).unwrap();
        assert!(g[0].is_lower_edge());
        assert!(g[180].is_upper_edge());
        assert_eq!(g[90], ExtensionAngle::zero());
        assert_eq!(g[45], ExtensionAngle::from_pi_fraction(-1, 4));
    }

    #[test]
    fn csv_field_roundtrip() {
        for v in [0.1, -0.469_411_48, 1e-300, 5e-324, f64::MAX, 2.0] {
            let f = Cell::Float(v).to_csv_field();
            assert_eq!(Cell::from_csv_field(&f), Cell::Float(v), "{f}");
        }
        assert_eq!(Cell::from_csv_field("subcritical"), Cell::Text("subcritical".into()));
        assert_eq!(Cell::from_csv_field("-1"), Cell::Int(-1));
        assert_eq!(Cell::from_csv_field(""), Cell::Empty);
    }

    #[test]
    fn nonsingular_table_carries_notice() {
        let ch = Channel::new(100.0, DEFAULT_ALPHA_INV, HalfInteger::ONE_HALF, Zeta::Plus).unwrap();
        let t = make_table(&ch, &default_nu_list(), 3, &SolverConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.notice.is_some());
        assert_eq!(t.rows[0].entry(0, Zeta::Plus), Some(Entry::Undefined));
        assert!(matches!(t.rows[0].entry(0, Zeta::Minus), Some(Entry::Level(_))));
    }

    #[test]
    fn single_step_range() {
        assert_eq!(z_range(138.0, 138.0, 1).unwrap(), vec![138.0]);
        assert!(z_range(138.0, 139.0, 1).is_err());
        let r = z_range(119.0, 137.0, 37).unwrap();
        assert_eq!(r[2], 120.0);
        assert_eq!(r[36], 137.0);
    }
}
