//! Generalized Sierpinski carpets: definition, validation, refinement and
//! dimension parameters.
//!
//! A carpet is described by its embedding dimension `d`, the length scale
//! `l` and a mask over the `l^d` level-1 cells. Cells are indexed
//! lexicographically by their integer coordinates `(c_1, ..., c_d)` with
//! `c_1` most significant, so the linear index of a cell is
//! `c_1 l^{d-1} + ... + c_d`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default guard on the number of cells produced by [`CarpetSpec::refine`].
pub const DEFAULT_CELL_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarpetSpec {
    dimension: usize,
    length_scale: usize,
    mask: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

/// A level-`n` cell, identified by the sequence of level-1 cells chosen at
/// each refinement step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellAddress {
    pub digits: Vec<u32>,
}

impl CellAddress {
    pub fn root() -> Self {
        CellAddress { digits: Vec::new() }
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub center: Vec<f64>,
    pub side: f64,
    /// `touches_lower[i]` is set when the cell meets the face `x_{i+1} = 0`.
    pub touches_lower: Vec<bool>,
    /// `touches_upper[i]` is set when the cell meets the face `x_{i+1} = 1`.
    pub touches_upper: Vec<bool>,
}

impl CellGeometry {
    pub fn touches_outer_boundary(&self) -> bool {
        self.touches_lower.iter().chain(&self.touches_upper).any(|&b| b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub passed: bool,
    pub detail: String,
}

impl ConditionResult {
    fn pass(detail: impl Into<String>) -> Self {
        ConditionResult { passed: true, detail: detail.into() }
    }

    fn fail(detail: impl Into<String>) -> Self {
        ConditionResult { passed: false, detail: detail.into() }
    }
}

/// Pass/fail per carpet condition: symmetry, connectedness,
/// non-diagonality, borders included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub symmetry: ConditionResult,
    pub connectedness: ConditionResult,
    pub non_diagonality: ConditionResult,
    pub borders_included: ConditionResult,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.symmetry.passed
            && self.connectedness.passed
            && self.non_diagonality.passed
            && self.borders_included.passed
    }
}

/// Dimension parameters of a carpet.
///
/// `rho_lower`/`rho_upper` are the shorting and cutting bounds on the
/// resistance scale factor: shorting every hyperplane `x_1 = i/l` gives
/// `rho >= sum_i 1/k_i` (with `k_i` kept cells in slab `i`), cutting every
/// bond transverse to `x_1` gives `rho <= l / T` (with `T` full tubes along
/// `x_1`). The coarser envelope `l^2/m <= rho <= 2^{1-d} l` is kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionBounds {
    pub d_h: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub d_s_lower: f64,
    pub d_s_upper: f64,
    pub d_w_lower: f64,
    pub d_w_upper: f64,
    pub envelope_rho_lower: f64,
    pub envelope_rho_upper: f64,
    pub envelope_d_s_lower: f64,
    pub envelope_d_s_upper: f64,
}

impl CarpetSpec {
    /// Builds a spec from a mask over the `l^d` level-1 cells. Only the
    /// structural requirements are checked here; the carpet conditions are
    /// checked by [`CarpetSpec::validate`].
    pub fn new(dimension: usize, length_scale: usize, mask: Vec<bool>) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::MalformedSpec(format!("dimension must be >= 2, got {dimension}")));
        }
        if length_scale < 3 {
            return Err(Error::MalformedSpec(format!(
                "length scale must be >= 3, got {length_scale}"
            )));
        }
        let cells = length_scale
            .checked_pow(dimension as u32)
            .filter(|&c| c <= 1 << 24)
            .ok_or_else(|| Error::MalformedSpec("l^d is too large".into()))?;
        if mask.len() != cells {
            return Err(Error::MalformedSpec(format!(
                "mask has {} entries, expected l^d = {cells}",
                mask.len()
            )));
        }
        let kept = mask.iter().filter(|&&b| b).count();
        if kept == 0 {
            return Err(Error::MalformedSpec("mask keeps no cells".into()));
        }
        if kept == cells {
            return Err(Error::MalformedSpec(
                "mask keeps every cell (need m_F < l_F^d)".into(),
            ));
        }
        Ok(CarpetSpec { dimension, length_scale, mask, name: None })
    }

    /// Builds a spec from a list of kept cell coordinates.
    pub fn from_kept_cells(
        dimension: usize,
        length_scale: usize,
        kept: &[Vec<usize>],
    ) -> Result<Self> {
        let cells = length_scale.checked_pow(dimension as u32).unwrap_or(usize::MAX);
        if dimension < 2 || length_scale < 3 || cells > 1 << 24 {
            // Delegate the message to `new`.
            return CarpetSpec::new(dimension, length_scale, Vec::new());
        }
        let mut mask = vec![false; cells];
        for c in kept {
            if c.len() != dimension || c.iter().any(|&x| x >= length_scale) {
                return Err(Error::MalformedSpec(format!(
                    "cell {c:?} is out of range for d={dimension}, l={length_scale}"
                )));
            }
            mask[linear_index(c, length_scale)] = true;
        }
        CarpetSpec::new(dimension, length_scale, mask)
    }

    /// The family of carpets obtained by removing every cell with at least
    /// two coordinates in the centered band of width `hole`. In two
    /// dimensions this is `SC(l, hole)`, in three the Menger sponge
    /// `MS(l, hole)`.
    pub fn menger(dimension: usize, length_scale: usize, hole: usize) -> Result<Self> {
        if hole == 0 || hole >= length_scale || (length_scale - hole) % 2 != 0 {
            return Err(Error::MalformedSpec(format!(
                "hole width {hole} must be positive, smaller than l = {length_scale} and of the same parity"
            )));
        }
        let lo = (length_scale - hole) / 2;
        let hi = lo + hole;
        let cells = length_scale.checked_pow(dimension as u32).unwrap_or(usize::MAX);
        if dimension < 2 || length_scale < 3 || cells > 1 << 24 {
            return CarpetSpec::new(dimension, length_scale, Vec::new());
        }
        let mask = (0..cells)
            .map(|i| {
                let c = coords_of(i, dimension, length_scale);
                c.iter().filter(|&&x| x >= lo && x < hi).count() < 2
            })
            .collect();
        let prefix = if dimension == 2 { "SC" } else { "MS" };
        Ok(CarpetSpec::new(dimension, length_scale, mask)?
            .with_name(format!("{prefix}({length_scale},{hole})")))
    }

    /// Built-in presets: `SC(3,1)`, `MS(3,1)`, `MS(4,2)`, `MS(5,3)`,
    /// `MS(6,4)`. Accepts `SC31`, `sc(3,1)`, `MS42` and similar spellings.
    pub fn preset(name: &str) -> Result<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        match key.as_str() {
            "SC31" => CarpetSpec::menger(2, 3, 1),
            "MS31" => CarpetSpec::menger(3, 3, 1),
            "MS42" => CarpetSpec::menger(3, 4, 2),
            "MS53" => CarpetSpec::menger(3, 5, 3),
            "MS64" => CarpetSpec::menger(3, 6, 4),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset '{name}' (known: SC31, MS31, MS42, MS53, MS64)"
            ))),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["SC31", "MS31", "MS42", "MS53", "MS64"]
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn length_scale(&self) -> usize {
        self.length_scale
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mass_scale(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_kept(&self, coords: &[usize]) -> bool {
        self.mask[linear_index(coords, self.length_scale)]
    }

    /// Kept level-1 cells in ascending linear order.
    pub fn kept_cells(&self) -> Vec<u32> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i as u32))
            .collect()
    }

    pub fn cell_coords(&self, index: u32) -> Vec<usize> {
        coords_of(index as usize, self.dimension, self.length_scale)
    }

    pub fn hausdorff_dimension(&self) -> f64 {
        (self.mass_scale() as f64).ln() / (self.length_scale as f64).ln()
    }

    /// Content hash of the canonical text form (name excluded).
    pub fn spec_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let digest = hasher.finalize();
        digest.iter().take(16).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn canonical_text(&self) -> String {
        let mut s = format!("dimension={}\nlength_scale={}\nmask=\n", self.dimension, self.length_scale);
        s.push_str(&self.mask_lines().join("\n"));
        s.push('\n');
        s
    }

    /// The mask as `l^{d-1}` lines of `l` characters. Characters run along
    /// `x_1`; successive lines step `x_2` first, then `x_3`, and so on.
    fn mask_lines(&self) -> Vec<String> {
        let l = self.length_scale;
        let d = self.dimension;
        let lines = l.pow(d as u32 - 1);
        (0..lines)
            .map(|line| {
                let mut rest = vec![0usize; d];
                let mut r = line;
                for axis in 1..d {
                    rest[axis] = r % l;
                    r /= l;
                }
                (0..l)
                    .map(|x1| {
                        rest[0] = x1;
                        if self.is_kept(&rest) { '1' } else { '0' }
                    })
                    .collect()
            })
            .collect()
    }

    /// Renders the spec in the plain-text `key = value` format understood by
    /// [`CarpetSpec::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(s, "name = {name}");
        }
        let _ = writeln!(s, "dimension = {}", self.dimension);
        let _ = writeln!(s, "length_scale = {}", self.length_scale);
        s.push_str("mask =\n");
        let l = self.length_scale;
        for (i, line) in self.mask_lines().iter().enumerate() {
            if i > 0 && self.dimension > 2 && i % l == 0 {
                s.push('\n');
            }
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    /// Parses the plain-text spec format.
    ///
    /// ```text
    /// # standard Sierpinski carpet
    /// name = SC(3,1)
    /// dimension = 2
    /// length_scale = 3
    /// mask =
    /// 111
    /// 101
    /// 111
    /// ```
    ///
    /// Everything after `mask =` is mask data: `l^{d-1}` lines of `l`
    /// characters (`1` kept, `0` removed), blank lines ignored. `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dimension = None;
        let mut length_scale = None;
        let mut name = None;
        let mut mask_rows: Vec<(usize, String)> = Vec::new();
        let mut in_mask = false;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            if in_mask {
                mask_rows.push((lineno, line.to_string()));
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected key = value, got '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_int = |v: &str| {
                v.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("'{v}' is not a non-negative integer"),
                })
            };
            match key {
                "dimension" => dimension = Some(parse_int(value)?),
                "length_scale" => length_scale = Some(parse_int(value)?),
                "name" => name = Some(value.to_string()),
                "mask" => {
                    in_mask = true;
                    if !value.is_empty() {
                        mask_rows.push((lineno, value.to_string()));
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unknown key '{other}'"),
                    })
                }
            }
        }

        let d = dimension.ok_or_else(|| Error::MalformedSpec("missing 'dimension'".into()))?;
        let l = length_scale.ok_or_else(|| Error::MalformedSpec("missing 'length_scale'".into()))?;
        if d < 2 || l < 3 || l.checked_pow(d as u32).map_or(true, |c| c > 1 << 24) {
            return CarpetSpec::new(d, l, Vec::new());
        }
        let expected_rows = l.pow(d as u32 - 1);
        if mask_rows.len() != expected_rows {
            return Err(Error::MalformedSpec(format!(
                "mask has {} rows, expected l^(d-1) = {expected_rows}",
                mask_rows.len()
            )));
        }
        let mut mask = vec![false; l.pow(d as u32)];
        for (row, (lineno, text)) in mask_rows.iter().enumerate() {
            let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
            if chars.len() != l {
                return Err(Error::Parse {
                    line: *lineno,
                    message: format!("mask row has {} cells, expected {l}", chars.len()),
                });
            }
            let mut coords = vec![0usize; d];
            let mut r = row;
            for c in coords.iter_mut().skip(1) {
                *c = r % l;
                r /= l;
            }
            for (x1, ch) in chars.iter().enumerate() {
                coords[0] = x1;
                mask[linear_index(&coords, l)] = match ch {
                    '1' => true,
                    '0' => false,
                    other => {
                        return Err(Error::Parse {
                            line: *lineno,
                            message: format!("mask character '{other}' is not 0 or 1"),
                        })
                    }
                };
            }
        }
        let spec = CarpetSpec::new(d, l, mask)?;
        Ok(match name {
            Some(n) => spec.with_name(n),
            None => spec,
        })
    }

    /// Checks the four carpet conditions on the level-1 mask.
    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            symmetry: self.check_symmetry(),
            connectedness: self.check_connectedness(),
            non_diagonality: self.check_non_diagonality(),
            borders_included: self.check_borders(),
        }
    }

    fn check_symmetry(&self) -> ConditionResult {
        let d = self.dimension;
        let l = self.length_scale;
        let perms = permutations(d);
        let total = perms.len() << d;
        for perm in &perms {
            for flips in 0..(1usize << d) {
                for (idx, &kept) in self.mask.iter().enumerate() {
                    let c = coords_of(idx, d, l);
                    let image: Vec<usize> = (0..d)
                        .map(|i| {
                            let x = c[perm[i]];
                            if flips >> i & 1 == 1 { l - 1 - x } else { x }
                        })
                        .collect();
                    if self.mask[linear_index(&image, l)] != kept {
                        return ConditionResult::fail(format!(
                            "cell {c:?} maps to {image:?} under axis permutation {perm:?} with reflections {flips:#b}"
                        ));
                    }
                }
            }
        }
        ConditionResult::pass(format!("invariant under all {total} cube isometries"))
    }

    fn check_connectedness(&self) -> ConditionResult {
        let d = self.dimension;
        let l = self.length_scale;
        let kept = self.kept_cells();
        let all: Vec<Vec<usize>> = kept.iter().map(|&i| self.cell_coords(i)).collect();
        let components = face_components(&all, d, l);
        if components > 1 {
            return ConditionResult::fail(format!(
                "kept cells form {components} face-connected components"
            ));
        }
        let touches_low = all.iter().any(|c| c[0] == 0);
        let touches_high = all.iter().any(|c| c[0] == l - 1);
        if !(touches_low && touches_high) {
            return ConditionResult::fail("no kept path joins the faces x_1 = 0 and x_1 = 1");
        }
        ConditionResult::pass("interior connected and spans x_1 = 0 to x_1 = 1")
    }

    fn check_non_diagonality(&self) -> ConditionResult {
        let d = self.dimension;
        let l = self.length_scale;
        let corners = (l - 1).pow(d as u32);
        for b in 0..corners {
            let mut origin = vec![0usize; d];
            let mut r = b;
            for o in origin.iter_mut().rev() {
                *o = r % (l - 1);
                r /= l - 1;
            }
            let block: Vec<Vec<usize>> = (0..(1usize << d))
                .map(|bits| (0..d).map(|i| origin[i] + (bits >> i & 1)).collect())
                .filter(|c: &Vec<usize>| self.is_kept(c))
                .collect();
            if block.len() > 1 && face_components(&block, d, l) > 1 {
                return ConditionResult::fail(format!(
                    "kept cells in the 2^d block at {origin:?} touch only diagonally"
                ));
            }
        }
        ConditionResult::pass(format!("all {corners} blocks of 2^{d} cells are connected or empty"))
    }

    fn check_borders(&self) -> ConditionResult {
        let mut c = vec![0usize; self.dimension];
        for x in 0..self.length_scale {
            c[0] = x;
            if !self.is_kept(&c) {
                return ConditionResult::fail(format!("edge cell {c:?} is removed"));
            }
        }
        ConditionResult::pass("bottom edge row fully kept")
    }

    /// Shorting and cutting bounds on the resistance scale factor and the
    /// spectral and walk dimensions they imply.
    pub fn dimension_bounds(&self) -> DimensionBounds {
        let d = self.dimension;
        let l = self.length_scale;
        let m = self.mass_scale() as f64;
        let lf = l as f64;

        let mut slab = vec![0usize; l];
        for (idx, &kept) in self.mask.iter().enumerate() {
            if kept {
                slab[coords_of(idx, d, l)[0]] += 1;
            }
        }
        let shorting: f64 = if slab.iter().all(|&k| k > 0) {
            slab.iter().map(|&k| 1.0 / k as f64).sum()
        } else {
            f64::INFINITY
        };

        // Tubes along x_1 are indexed by the remaining coordinates.
        let tubes = l.pow(d as u32 - 1);
        let full_tubes = (0..tubes)
            .filter(|&t| {
                let mut c = vec![0usize; d];
                let mut r = t;
                for x in c.iter_mut().skip(1) {
                    *x = r % l;
                    r /= l;
                }
                (0..l).all(|x1| {
                    c[0] = x1;
                    self.is_kept(&c)
                })
            })
            .count();
        let cutting = if full_tubes > 0 { lf / full_tubes as f64 } else { f64::INFINITY };

        let envelope_rho_lower = lf * lf / m;
        let envelope_rho_upper = 2f64.powi(1 - d as i32) * lf;
        let rho_lower = shorting.max(envelope_rho_lower);
        let rho_upper = cutting.min(envelope_rho_upper);

        let d_s = |rho: f64| 2.0 * m.ln() / (rho * m).ln();
        let d_w = |rho: f64| (rho * m).ln() / lf.ln();

        DimensionBounds {
            d_h: m.ln() / lf.ln(),
            rho_lower,
            rho_upper,
            d_s_lower: d_s(rho_upper),
            d_s_upper: d_s(rho_lower),
            d_w_lower: d_w(rho_lower),
            d_w_upper: d_w(rho_upper),
            envelope_rho_lower,
            envelope_rho_upper,
            envelope_d_s_lower: d_s(envelope_rho_upper),
            envelope_d_s_upper: d_s(envelope_rho_lower),
        }
    }

    /// Number of level-`n` cells, `m_F^n`, if it fits in a `u128`.
    pub fn cell_count(&self, level: usize) -> Option<u128> {
        (self.mass_scale() as u128).checked_pow(level as u32)
    }

    pub(crate) fn check_cap(&self, level: usize, cap: u64) -> Result<usize> {
        match self.cell_count(level) {
            Some(c) if c <= cap as u128 => Ok(c as usize),
            Some(c) => Err(Error::CapExceeded { requested: c, cap }),
            None => Err(Error::CapExceeded { requested: u128::MAX, cap }),
        }
    }

    /// All level-`n` cells in lexicographic order of their digit sequences.
    pub fn refine(&self, level: usize, cap: u64) -> Result<Vec<CellAddress>> {
        let count = self.check_cap(level, cap)?;
        let kept = self.kept_cells();
        let m = kept.len();
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0usize; level];
        for _ in 0..count {
            out.push(CellAddress { digits: idx.iter().map(|&i| kept[i]).collect() });
            // Odometer increment, last digit fastest.
            for pos in (0..level).rev() {
                idx[pos] += 1;
                if idx[pos] < m {
                    break;
                }
                idx[pos] = 0;
            }
        }
        Ok(out)
    }

    /// Integer coordinates of a level-`n` cell on the `l^n` grid.
    pub fn grid_coords(&self, addr: &CellAddress) -> Result<Vec<u64>> {
        let l = self.length_scale as u64;
        let mut coords = vec![0u64; self.dimension];
        for &digit in &addr.digits {
            if digit as usize >= self.mask.len() || !self.mask[digit as usize] {
                return Err(Error::InvalidArgument(format!(
                    "digit {digit} is not a kept level-1 cell"
                )));
            }
            let c = self.cell_coords(digit);
            for (g, &x) in coords.iter_mut().zip(&c) {
                *g = *g * l + x as u64;
            }
        }
        Ok(coords)
    }

    pub fn cell_geometry(&self, addr: &CellAddress) -> Result<CellGeometry> {
        let coords = self.grid_coords(addr)?;
        let n = addr.level();
        let side = (self.length_scale as f64).powi(-(n as i32));
        let last = (self.length_scale as u64).pow(n as u32) - 1;
        Ok(CellGeometry {
            center: coords.iter().map(|&c| (c as f64 + 0.5) * side).collect(),
            side,
            touches_lower: coords.iter().map(|&c| c == 0).collect(),
            touches_upper: coords.iter().map(|&c| c == last).collect(),
        })
    }
}

pub(crate) fn linear_index(coords: &[usize], l: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * l + c)
}

pub(crate) fn coords_of(mut index: usize, d: usize, l: usize) -> Vec<usize> {
    let mut c = vec![0usize; d];
    for x in c.iter_mut().rev() {
        *x = index % l;
        index /= l;
    }
    c
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

/// Number of face-adjacency components among the given cells.
fn face_components(cells: &[Vec<usize>], d: usize, l: usize) -> usize {
    let mut index = vec![usize::MAX; l.pow(d as u32)];
    for (i, c) in cells.iter().enumerate() {
        index[linear_index(c, l)] = i;
    }
    let mut seen = vec![false; cells.len()];
    let mut components = 0;
    for start in 0..cells.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let c = &cells[u];
            for axis in 0..d {
                for delta in [-1i64, 1] {
                    let x = c[axis] as i64 + delta;
                    if x < 0 || x >= l as i64 {
                        continue;
                    }
                    let mut nb = c.clone();
                    nb[axis] = x as usize;
                    let v = index[linear_index(&nb, l)];
                    if v != usize::MAX && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc() -> CarpetSpec {
        CarpetSpec::preset("SC31").unwrap()
    }

    #[test]
    fn standard_carpet_passes_all_conditions() {
        let spec = sc();
        assert_eq!(spec.mass_scale(), 8);
        let report = spec.validate();
        assert!(report.is_valid(), "{report:?}");
    }

    #[test]
    fn sponge_presets_have_table_masses() {
        for (name, m) in [("MS31", 20), ("MS42", 32), ("MS53", 44), ("MS64", 56)] {
            let spec = CarpetSpec::preset(name).unwrap();
            assert_eq!(spec.mass_scale(), m, "{name}");
            assert!(spec.validate().is_valid(), "{name}");
        }
    }

    #[test]
    fn full_mask_is_malformed() {
        let err = CarpetSpec::new(2, 3, vec![true; 9]).unwrap_err();
        assert!(matches!(err, Error::MalformedSpec(_)));
    }

    #[test]
    fn out_of_range_cell_is_malformed() {
        let err = CarpetSpec::from_kept_cells(2, 3, &[vec![0, 3]]).unwrap_err();
        assert!(matches!(err, Error::MalformedSpec(_)));
    }

    #[test]
    fn single_corner_fails_symmetry_and_borders() {
        let spec = CarpetSpec::from_kept_cells(2, 3, &[vec![0, 0]]).unwrap();
        let r = spec.validate();
        assert!(!r.symmetry.passed);
        assert!(!r.borders_included.passed);
    }

    #[test]
    fn opposite_columns_are_disconnected() {
        let kept: Vec<Vec<usize>> =
            (0..3).flat_map(|y| [vec![0, y], vec![2, y]]).collect();
        let spec = CarpetSpec::from_kept_cells(2, 3, &kept).unwrap();
        let r = spec.validate();
        assert!(!r.connectedness.passed);
    }

    #[test]
    fn diagonal_contact_violates_non_diagonality() {
        // 5x5 border ring with the four inner corner cells and the centre:
        // the centre meets the inner corners only diagonally.
        let l = 5;
        let mut kept = Vec::new();
        for x in 0..l {
            for y in 0..l {
                let border = x == 0 || y == 0 || x == l - 1 || y == l - 1;
                let diag = (x == 1 || x == 3) && (y == 1 || y == 3) || (x == 2 && y == 2);
                if border || diag {
                    kept.push(vec![x, y]);
                }
            }
        }
        let spec = CarpetSpec::from_kept_cells(2, l, &kept).unwrap();
        let r = spec.validate();
        assert!(r.symmetry.passed);
        assert!(!r.non_diagonality.passed);
    }

    #[test]
    fn hausdorff_dimension_of_carpet() {
        let b = sc().dimension_bounds();
        assert!((b.d_h - 8f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!((b.d_h - 1.8928).abs() < 1e-4);
    }

    #[test]
    fn carpet_envelope_bounds_match_plugged_values() {
        let b = sc().dimension_bounds();
        let lower = 2.0 * 8f64.ln() / 12f64.ln();
        let upper = 8f64.ln() / 3f64.ln();
        assert!((b.envelope_d_s_lower - lower).abs() < 1e-14);
        assert!((b.envelope_d_s_upper - upper).abs() < 1e-14);
        assert!((b.envelope_d_s_lower - 1.674).abs() < 5e-4);
        assert!((b.envelope_d_s_upper - 1.893).abs() < 5e-4);
        // Shorting gives 7/6, cutting 3/2.
        assert!((b.rho_lower - 7.0 / 6.0).abs() < 1e-15);
        assert!((b.rho_upper - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sponge_bounds_reproduce_table() {
        let cases = [
            ("MS31", 20f64.ln() / 3f64.ln(), 2.21, 2.60),
            ("MS42", 2.5, 2.00, 2.26),
            ("MS53", 44f64.ln() / 5f64.ln(), 1.89, 2.07),
            ("MS64", 56f64.ln() / 6f64.ln(), 1.82, 1.95),
        ];
        for (name, d_h, lo, hi) in cases {
            let b = CarpetSpec::preset(name).unwrap().dimension_bounds();
            assert!((b.d_h - d_h).abs() < 1e-12, "{name}");
            assert!((b.d_s_lower - lo).abs() < 5e-3, "{name}: {} vs {lo}", b.d_s_lower);
            assert!((b.d_s_upper - hi).abs() < 5e-3, "{name}: {} vs {hi}", b.d_s_upper);
        }
    }

    #[test]
    fn refine_counts_and_order() {
        let spec = sc();
        assert_eq!(spec.refine(0, DEFAULT_CELL_CAP).unwrap(), vec![CellAddress::root()]);
        assert_eq!(spec.refine(1, DEFAULT_CELL_CAP).unwrap().len(), 8);
        let level3 = spec.refine(3, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(level3.len(), 512);
        assert!(level3.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refine_respects_cap() {
        let err = sc().refine(9, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn corner_cell_geometry() {
        let spec = sc();
        let addr = CellAddress { digits: vec![0] };
        let g = spec.cell_geometry(&addr).unwrap();
        assert!((g.center[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((g.center[1] - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(g.touches_lower, vec![true, true]);
        assert_eq!(g.touches_upper, vec![false, false]);
    }

    #[test]
    fn root_cell_geometry() {
        let g = sc().cell_geometry(&CellAddress::root()).unwrap();
        assert_eq!(g.center, vec![0.5, 0.5]);
        assert_eq!(g.side, 1.0);
        assert!(g.touches_lower.iter().chain(&g.touches_upper).all(|&b| b));
    }

    #[test]
    fn nested_bottom_middle_cell() {
        let spec = sc();
        // (x_1, x_2) = (1, 0) has linear index 1 * 3 + 0 = 3.
        let digit = linear_index(&[1, 0], 3) as u32;
        let addr = CellAddress { digits: vec![digit, digit] };
        let g = spec.cell_geometry(&addr).unwrap();
        assert!((g.center[0] - 0.5).abs() < 1e-15);
        assert!((g.center[1] - 1.0 / 18.0).abs() < 1e-15);
        assert!((g.side - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        for name in CarpetSpec::preset_names() {
            let spec = CarpetSpec::preset(name).unwrap();
            let parsed = CarpetSpec::parse(&spec.to_text()).unwrap();
            assert_eq!(parsed, spec);
        }
    }

    #[test]
    fn parse_rejects_bad_characters() {
        let text = "dimension = 2\nlength_scale = 3\nmask =\n111\n1x1\n111\n";
        assert!(matches!(CarpetSpec::parse(text), Err(Error::Parse { line: 5, .. })));
    }
}
