//! Per-word contextual embedding sets: the in-memory model, the `PVS1`
//! binary format, a TSV fallback for hand-written fixtures, manifests, and a
//! seeded generator of separated clusters.
//!
//! `PVS1` layout (all integers little-endian):
//!
//! ```text
//! "PVS1" | u16 word_len | word (UTF-8) | u32 n | u32 dim | u8 has_ids
//!        | n*dim f32 row-major | [n * (u16 len | UTF-8 id)]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub const PVS1_MAGIC: [u8; 4] = *b"PVS1";

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header at byte {offset}: {reason}")]
    Header { offset: usize, reason: String },
    #[error("truncated payload at byte {offset}: expected {expected} more bytes")]
    Truncated { offset: usize, expected: usize },
    #[error("non-finite value at row {row}, column {col} (byte {offset})")]
    NonFinite {
        row: usize,
        col: usize,
        offset: usize,
    },
    #[error("invalid vector set: {0}")]
    Invalid(String),
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("infeasible center placement after {attempts} attempts")]
    Infeasible { attempts: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> VectorError + '_ {
    move |source| VectorError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One word's contextual embeddings: `n` rows of `dim` finite `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    word: String,
    dim: usize,
    data: Vec<f32>,
    sentence_ids: Option<Vec<String>>,
}

impl VectorSet {
    pub fn new(
        word: impl Into<String>,
        dim: usize,
        data: Vec<f32>,
        sentence_ids: Option<Vec<String>>,
    ) -> Result<Self, VectorError> {
        let word = word.into();
        validate_word(&word)?;
        if dim == 0 {
            return Err(VectorError::Invalid("dimension must be at least 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(VectorError::Invalid(format!(
                "payload of {} values is not a positive multiple of dim {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite {
                row: pos / dim,
                col: pos % dim,
                offset: pos * 4,
            });
        }
        let n = data.len() / dim;
        if let Some(ids) = &sentence_ids {
            if ids.len() != n {
                return Err(VectorError::Invalid(format!(
                    "{} sentence ids for {n} vectors",
                    ids.len()
                )));
            }
            if let Some(bad) = ids.iter().find(|id| id.len() > u16::MAX as usize) {
                return Err(VectorError::Invalid(format!(
                    "sentence id of {} bytes exceeds u16 length prefix",
                    bad.len()
                )));
            }
        }
        Ok(Self {
            word,
            dim,
            data,
            sentence_ids,
        })
    }

    /// Builds a set from `f64` rows, narrowing to `f32`.
    pub fn from_rows(
        word: impl Into<String>,
        rows: &[Vec<f64>],
        sentence_ids: Option<Vec<String>>,
    ) -> Result<Self, VectorError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(VectorError::Invalid("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(word, dim, data, sentence_ids)
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn sentence_ids(&self) -> Option<&[String]> {
        self.sentence_ids.as_deref()
    }

    /// Widens the payload to `f64` points.
    pub fn to_points(&self) -> Points {
        Points {
            dim: self.dim,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

fn validate_word(word: &str) -> Result<(), VectorError> {
    if word.is_empty() {
        return Err(VectorError::Invalid("word is empty".into()));
    }
    if word.contains(['\t', '\n', '\r']) {
        return Err(VectorError::Invalid(format!(
            "word {word:?} contains tab or newline"
        )));
    }
    if word.len() > u16::MAX as usize {
        return Err(VectorError::Invalid("word exceeds u16 length prefix".into()));
    }
    Ok(())
}

/// Row-major `f64` point matrix used downstream of loading.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, VectorError> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(VectorError::Invalid(format!(
                "{} values do not form rows of width {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, VectorError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(VectorError::Invalid("ragged rows".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Stacks point sets of equal width.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Points>) -> Result<Self, VectorError> {
        let mut iter = parts.into_iter().peekable();
        let dim = iter
            .peek()
            .map(|p| p.dim)
            .ok_or_else(|| VectorError::Invalid("nothing to stack".into()))?;
        let mut data = Vec::new();
        for p in iter {
            if p.dim != dim {
                return Err(VectorError::Invalid(format!(
                    "width mismatch: {} vs {dim}",
                    p.dim
                )));
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Self { dim, data })
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim, "row width mismatch");
        self.data.extend_from_slice(row);
    }
}

pub fn encode_pvs1(set: &VectorSet) -> Vec<u8> {
    let ids_len: usize = set
        .sentence_ids
        .as_ref()
        .map_or(0, |ids| ids.iter().map(|s| 2 + s.len()).sum());
    let mut out = Vec::with_capacity(4 + 2 + set.word.len() + 9 + set.data.len() * 4 + ids_len);
    out.extend_from_slice(&PVS1_MAGIC);
    out.extend_from_slice(&(set.word.len() as u16).to_le_bytes());
    out.extend_from_slice(set.word.as_bytes());
    out.extend_from_slice(&(set.len() as u32).to_le_bytes());
    out.extend_from_slice(&(set.dim as u32).to_le_bytes());
    out.push(u8::from(set.sentence_ids.is_some()));
    for v in &set.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(ids) = &set.sentence_ids {
        for id in ids {
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], VectorError> {
        if self.buf.len() - self.pos < n {
            return Err(VectorError::Truncated {
                offset: self.pos,
                expected: n - (self.buf.len() - self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, VectorError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, VectorError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn utf8(&mut self, len: usize, what: &str) -> Result<String, VectorError> {
        let at = self.pos;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| VectorError::Header {
            offset: at,
            reason: format!("{what} is not valid UTF-8"),
        })
    }
}

pub fn decode_pvs1(buf: &[u8]) -> Result<VectorSet, VectorError> {
    let mut cur = Cursor { buf, pos: 0 };
    let magic = cur.take(4).map_err(|_| VectorError::Header {
        offset: 0,
        reason: "missing PVS1 magic".into(),
    })?;
    if magic != PVS1_MAGIC {
        return Err(VectorError::Header {
            offset: 0,
            reason: format!("bad magic {magic:02x?}"),
        });
    }
    let word_len = cur.u16()? as usize;
    let word_at = cur.pos;
    let word = cur.utf8(word_len, "word")?;
    validate_word(&word).map_err(|e| VectorError::Header {
        offset: word_at,
        reason: e.to_string(),
    })?;
    let n_at = cur.pos;
    let n = cur.u32()? as usize;
    let dim = cur.u32()? as usize;
    if n == 0 || dim == 0 {
        return Err(VectorError::Header {
            offset: n_at,
            reason: format!("N={n} and D_raw={dim} must both be positive"),
        });
    }
    let flag_at = cur.pos;
    let has_ids = match cur.take(1)?[0] {
        0 => false,
        1 => true,
        other => {
            return Err(VectorError::Header {
                offset: flag_at,
                reason: format!("sentence-id flag must be 0 or 1, got {other}"),
            })
        }
    };
    let payload_at = cur.pos;
    let count = n.checked_mul(dim).ok_or_else(|| VectorError::Header {
        offset: n_at,
        reason: "N*D_raw overflows".into(),
    })?;
    let payload = cur.take(count.checked_mul(4).ok_or_else(|| VectorError::Header {
        offset: n_at,
        reason: "payload size overflows".into(),
    })?)?;
    let mut data = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(VectorError::NonFinite {
                row: i / dim,
                col: i % dim,
                offset: payload_at + i * 4,
            });
        }
        data.push(v);
    }
    let sentence_ids = if has_ids {
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            let len = cur.u16()? as usize;
            ids.push(cur.utf8(len, "sentence id")?);
        }
        Some(ids)
    } else {
        None
    };
    if cur.pos != buf.len() {
        return Err(VectorError::Header {
            offset: cur.pos,
            reason: format!("{} trailing bytes", buf.len() - cur.pos),
        });
    }
    VectorSet::new(word, dim, data, sentence_ids)
}

pub fn store_vector_set(set: &VectorSet, path: &Path) -> Result<(), VectorError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&encode_pvs1(set)).map_err(io_err(path))
}

/// Loads a `PVS1` file, or the TSV fallback when the magic is absent.
pub fn load_vector_set(path: &Path) -> Result<VectorSet, VectorError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.starts_with(&PVS1_MAGIC) {
        decode_pvs1(&bytes)
    } else if is_tsv_path(path) {
        let text = String::from_utf8(bytes).map_err(|_| VectorError::Parse {
            path: path.to_path_buf(),
            line: 0,
            reason: "not UTF-8".into(),
        })?;
        parse_tsv(&text, path)
    } else {
        decode_pvs1(&bytes)
    }
}

fn is_tsv_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("tsv" | "txt")
    )
}

/// Parses the TSV fallback: an optional `# word: <w>` header (otherwise the
/// file stem names the word), then one vector per line, tab-separated. A line
/// may start with `@<sentence_id>` as its first field; either every row
/// carries an id or none does.
pub fn parse_tsv(text: &str, path: &Path) -> Result<VectorSet, VectorError> {
    let mut word = None;
    let mut rows: Vec<f32> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let mut dim = None;
    let mut n = 0usize;
    let perr = |line: usize, reason: String| VectorError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(w) = rest.trim().strip_prefix("word:") {
                word = Some(w.trim().to_string());
            }
            continue;
        }
        let mut fields = line.split('\t').peekable();
        let id = match fields.peek() {
            Some(f) if f.starts_with('@') => Some(fields.next().unwrap()[1..].to_string()),
            _ => None,
        };
        if n > 0 && id.is_some() != !ids.is_empty() {
            return Err(perr(lineno, "sentence ids must be given on every row or none".into()));
        }
        let before = rows.len();
        for (col, f) in fields.enumerate() {
            let v: f32 = f
                .trim()
                .parse()
                .map_err(|_| perr(lineno, format!("column {col}: cannot parse {f:?}")))?;
            if !v.is_finite() {
                return Err(perr(lineno, format!("non-finite value at column {col}")));
            }
            rows.push(v);
        }
        let width = rows.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(perr(lineno, format!("expected {d} columns, found {width}")))
            }
            _ => {}
        }
        if let Some(id) = id {
            ids.push(id);
        }
        n += 1;
    }
    let word = match word {
        Some(w) => w,
        None => path
            .file_stem()
            .and_then(|s| s.to_str())
            .map(str::to_string)
            .ok_or_else(|| perr(0, "no word header and no usable file stem".into()))?,
    };
    let dim = dim.ok_or_else(|| perr(0, "no vectors".into()))?;
    let ids = (!ids.is_empty()).then_some(ids);
    VectorSet::new(word, dim, rows, ids)
}

/// Writes `f64` points in the TSV fallback format (full precision).
pub fn write_points_tsv(
    word: &str,
    points: &Points,
    sentence_ids: Option<&[String]>,
) -> String {
    let mut out = format!("# word: {word}\n");
    for (i, row) in points.rows().enumerate() {
        if let Some(ids) = sentence_ids {
            out.push('@');
            out.push_str(&ids[i]);
            out.push('\t');
        }
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub word: String,
    pub path: PathBuf,
    pub n: usize,
    pub dim: usize,
}

/// Word-to-file index for a collection of vector sets sharing one `D_raw`.
/// Entries are kept sorted by word so load order never matters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
    dim: usize,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self, VectorError> {
        let mut by_word = BTreeMap::new();
        let dim = entries
            .first()
            .map(|e| e.dim)
            .ok_or_else(|| VectorError::Invalid("manifest has no entries".into()))?;
        for e in entries {
            if e.dim != dim {
                return Err(VectorError::Invalid(format!(
                    "word {:?} has D_raw {} but manifest uses {dim}",
                    e.word, e.dim
                )));
            }
            validate_word(&e.word)?;
            let word = e.word.clone();
            if by_word.insert(word.clone(), e).is_some() {
                return Err(VectorError::Invalid(format!("duplicate word {word:?}")));
            }
        }
        Ok(Self {
            entries: by_word.into_values().collect(),
            dim,
        })
    }

    /// Reads `word<TAB>relative_path<TAB>N<TAB>D_raw`; paths resolve against
    /// the manifest's directory and must exist.
    pub fn load(path: &Path) -> Result<Self, VectorError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |reason: String| VectorError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                reason,
            };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(perr(format!("expected 4 fields, found {}", f.len())));
            }
            let n = f[2].parse().map_err(|_| perr(format!("bad N {:?}", f[2])))?;
            let dim = f[3].parse().map_err(|_| perr(format!("bad D_raw {:?}", f[3])))?;
            let file = base.join(f[1]);
            if !file.exists() {
                return Err(perr(format!("missing file {}", file.display())));
            }
            entries.push(ManifestEntry {
                word: f[0].to_string(),
                path: file,
                n,
                dim,
            });
        }
        Self::new(entries)
    }

    /// Serializes with paths relative to `base` where possible.
    pub fn to_tsv(&self, base: &Path) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let rel = e.path.strip_prefix(base).unwrap_or(&e.path);
            out.push_str(&format!("{}\t{}\t{}\t{}\n", e.word, rel.display(), e.n, e.dim));
        }
        out
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&ManifestEntry> {
        self.entries
            .binary_search_by(|e| e.word.as_str().cmp(word))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Loads every set, checking it against its entry. Result is word-sorted.
    pub fn load_all(&self) -> Result<Vec<VectorSet>, VectorError> {
        use rayon::prelude::*;
        self.entries
            .par_iter()
            .map(|e| {
                let set = load_vector_set(&e.path)?;
                if set.word() != e.word || set.len() != e.n || set.dim() != e.dim {
                    return Err(VectorError::Invalid(format!(
                        "{}: file holds {:?} {}x{}, manifest says {:?} {}x{}",
                        e.path.display(),
                        set.word(),
                        set.len(),
                        set.dim(),
                        e.word,
                        e.n,
                        e.dim
                    )));
                }
                Ok(set)
            })
            .collect()
    }
}

/// Parameters of [`synth_clusters`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub k: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub spread: f64,
    pub separation: f64,
    pub seed: u64,
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Half-width of the cube [`synth_clusters`] draws centers from.
pub fn synth_center_radius(k: usize, dim: usize, separation: f64) -> f64 {
    separation * (k as f64).powf(1.0 / dim as f64).max(1.0)
}

/// Draws `k` blobs of `per_cluster` points, each uniform in a ball of radius
/// `spread`, with centers mutually at least `separation` apart inside
/// `[-R, R]^dim`, `R = synth_center_radius(k, dim, separation)`.
/// Returns the set and the centers.
pub fn synth_clusters_with_centers(
    word: &str,
    spec: ClusterSpec,
) -> Result<(VectorSet, Vec<Vec<f64>>), VectorError> {
    let ClusterSpec {
        k,
        per_cluster,
        dim,
        spread,
        separation,
        seed,
    } = spec;
    if k == 0 || per_cluster == 0 || dim == 0 {
        return Err(VectorError::Invalid("k, per_cluster and d must be positive".into()));
    }
    if !(spread > 0.0 && separation > 2.0 * spread) {
        return Err(VectorError::Invalid(format!(
            "need separation > 2*spread > 0, got spread={spread}, separation={separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = synth_center_radius(k, dim, separation);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0;
    while centers.len() < k {
        attempts += 1;
        if attempts > MAX_PLACEMENT_ATTEMPTS {
            return Err(VectorError::Infeasible { attempts: MAX_PLACEMENT_ATTEMPTS });
        }
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..=radius)).collect();
        if centers.iter().all(|o| euclidean(o, &c) >= separation) {
            centers.push(c);
        }
    }
    let mut rows = Vec::with_capacity(k * per_cluster);
    for c in &centers {
        for _ in 0..per_cluster {
            rows.push(sample_in_ball(&mut rng, c, spread));
        }
    }
    let set = VectorSet::from_rows(word, &rows, None)?;
    Ok((set, centers))
}

pub fn synth_clusters(word: &str, spec: ClusterSpec) -> Result<VectorSet, VectorError> {
    synth_clusters_with_centers(word, spec).map(|(s, _)| s)
}

fn sample_in_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    center
        .iter()
        .zip(&dir)
        .map(|(c, u)| c + r * u / norm)
        .collect()
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VectorSet {
        VectorSet::new("bank", 3, vec![1., 2., 3., 4., 5., 6.], None).unwrap()
    }

    #[test]
    fn store_then_load_2x3() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bank.pvs");
        store_vector_set(&small(), &p).unwrap();
        let back = load_vector_set(&p).unwrap();
        assert_eq!(back, small());
        assert_eq!(back.row(1), &[4., 5., 6.]);
    }

    #[test]
    fn header_layout_is_bit_exact() {
        let set = VectorSet::new("ab", 1, vec![1.0], Some(vec!["s".into()])).unwrap();
        let bytes = encode_pvs1(&set);
        let expected: Vec<u8> = [
            &b"PVS1"[..],
            &[2, 0],
            b"ab",
            &[1, 0, 0, 0],
            &[1, 0, 0, 0],
            &[1],
            &1.0f32.to_le_bytes(),
            &[1, 0],
            b"s",
        ]
        .concat();
        assert_eq!(bytes, expected);
    }

    #[test]
    fn full_size_set_loads() {
        let data: Vec<f32> = (0..3000 * 1024).map(|i| (i % 97) as f32 * 0.5).collect();
        let set = VectorSet::new("word", 1024, data, None).unwrap();
        let back = decode_pvs1(&encode_pvs1(&set)).unwrap();
        assert_eq!(back.len(), 3000);
        assert_eq!(back.dim(), 1024);
    }

    #[test]
    fn nan_payload_reports_position() {
        let mut bytes = encode_pvs1(&small());
        let off = bytes.len() - 8; // row 1, column 1
        bytes[off..off + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        match decode_pvs1(&bytes) {
            Err(VectorError::NonFinite { row, col, offset }) => {
                assert_eq!((row, col, offset), (1, 1, off));
            }
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let good = encode_pvs1(&small());
        assert!(matches!(
            decode_pvs1(b"XXXX"),
            Err(VectorError::Header { offset: 0, .. })
        ));
        assert!(matches!(
            decode_pvs1(&good[..good.len() - 3]),
            Err(VectorError::Truncated { .. })
        ));
        let mut zero_n = good.clone();
        zero_n[10..14].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            decode_pvs1(&zero_n),
            Err(VectorError::Header { offset: 10, .. })
        ));
        let mut trailing = good;
        trailing.push(0);
        assert!(decode_pvs1(&trailing).is_err());
    }

    #[test]
    fn tsv_fallback() {
        let text = "# word: bank\n@s1\t1\t2\n@s2\t3\t4.5\n";
        let set = parse_tsv(text, Path::new("x.tsv")).unwrap();
        assert_eq!(set.word(), "bank");
        assert_eq!(set.row(1), &[3.0, 4.5]);
        assert_eq!(set.sentence_ids().unwrap(), &["s1", "s2"]);

        let stem = parse_tsv("1\t2\n", Path::new("dir/python.tsv")).unwrap();
        assert_eq!(stem.word(), "python");
        assert!(parse_tsv("1\t2\n3\n", Path::new("a.tsv")).is_err());
        assert!(parse_tsv("@a\t1\n2\n", Path::new("a.tsv")).is_err());
    }

    #[test]
    fn manifest_order_independent() {
        let dir = tempfile::tempdir().unwrap();
        let mut lines = Vec::new();
        for w in ["cat", "bank", "zebra"] {
            let set = VectorSet::new(w, 2, vec![0.0, 1.0], None).unwrap();
            store_vector_set(&set, &dir.path().join(format!("{w}.pvs"))).unwrap();
            lines.push(format!("{w}\t{w}.pvs\t1\t2"));
        }
        let a = dir.path().join("a.tsv");
        fs::write(&a, lines.join("\n")).unwrap();
        lines.reverse();
        let b = dir.path().join("b.tsv");
        fs::write(&b, lines.join("\n")).unwrap();
        let (ma, mb) = (Manifest::load(&a).unwrap(), Manifest::load(&b).unwrap());
        assert_eq!(ma, mb);
        assert_eq!(ma.load_all().unwrap(), mb.load_all().unwrap());
    }

    #[test]
    fn manifest_rejects_mixed_dims_and_duplicates() {
        let e = |w: &str, d| ManifestEntry {
            word: w.into(),
            path: PathBuf::from("x"),
            n: 1,
            dim: d,
        };
        assert!(Manifest::new(vec![e("a", 2), e("b", 3)]).is_err());
        assert!(Manifest::new(vec![e("a", 2), e("a", 2)]).is_err());
    }

    #[test]
    fn synth_is_deterministic_and_counts() {
        let spec = ClusterSpec {
            k: 1,
            per_cluster: 10,
            dim: 2,
            spread: 0.1,
            separation: 1.0,
            seed: 7,
        };
        assert_eq!(synth_clusters("w", spec).unwrap(), synth_clusters("w", spec).unwrap());
        let three = synth_clusters("w", ClusterSpec { k: 3, per_cluster: 5, ..spec }).unwrap();
        assert_eq!(three.len(), 15);
    }

    #[test]
    fn synth_centers_are_separated() {
        let spec = ClusterSpec {
            k: 2,
            per_cluster: 20,
            dim: 3,
            spread: 0.1,
            separation: 10.0,
            seed: 11,
        };
        let (set, centers) = synth_clusters_with_centers("w", spec).unwrap();
        assert!(euclidean(&centers[0], &centers[1]) >= 10.0);
        for (i, row) in set.rows().enumerate() {
            let row: Vec<f64> = row.iter().map(|&v| f64::from(v)).collect();
            assert!(euclidean(&row, &centers[i / 20]) <= 0.1 + 1e-6);
        }
    }

    #[test]
    fn synth_rejects_overlap() {
        let spec = ClusterSpec {
            k: 2,
            per_cluster: 1,
            dim: 2,
            spread: 1.0,
            separation: 1.5,
            seed: 0,
        };
        assert!(synth_clusters("w", spec).is_err());
    }
}
