//! SimHash sketches over context histograms.
//!
//! Each distance `dt` gets its own set of `K^dt` random `{-1, +1}` hyperplanes. A
//! histogram maps to one bit per plane, set when the dot product is strictly
//! positive. Node sketches concatenate the per-distance codes in increasing `dt`.
//! For two histograms at angle `theta` (degrees) a bit agrees with probability
//! about `1 - theta / 180`.
//!
//! Bits are packed big-endian within each byte: bit `i` is `0x80 >> (i % 8)` of
//! byte `i / 8`. Rows are padded to a byte boundary.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contexts::HistogramTable;
use crate::error::{Error, Result};

const SKETCH_MAGIC: &[u8; 4] = b"TSKB";
const PLANES_MAGIC: &[u8; 4] = b"TSKP";
const FORMAT_VERSION: u32 = 1;

#[inline]
fn mask(i: usize) -> u8 {
    0x80 >> (i % 8)
}

/// Fixed-length bit-packed vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    bytes: Vec<u8>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, bytes: vec![0; len.div_ceil(8)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string of '0' and '1' characters.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::validation(format!("invalid bit character '{c}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVector::from_bools(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.bytes[i / 8] & mask(i) != 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        if value {
            self.bytes[i / 8] |= mask(i);
        } else {
            self.bytes[i / 8] &= !mask(i);
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Number of positions where both vectors hold the same bit.
    pub fn agreements(&self, other: &BitVector) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::validation(format!(
                "bit vectors differ in length ({} vs {})",
                self.len, other.len
            )));
        }
        let differing: usize =
            self.bytes.iter().zip(&other.bytes).map(|(a, b)| (a ^ b).count_ones() as usize).sum();
        // Padding bits are zero in both, so they never differ.
        Ok(self.len - differing)
    }
}

impl std::fmt::Display for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Fraction of positions where the two sketches agree.
pub fn estimate_similarity(a: &BitVector, b: &BitVector) -> Result<f64> {
    let agree = a.agreements(b)?;
    if a.is_empty() {
        return Ok(1.0);
    }
    Ok(agree as f64 / a.len() as f64)
}

/// `K` random sign vectors of length `dim`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneSegment {
    dim: usize,
    signs: Vec<i8>,
}

impl HyperplaneSegment {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_planes(&self) -> usize {
        self.signs.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn plane(&self, i: usize) -> &[i8] {
        &self.signs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[i8] {
        &self.signs
    }
}

fn generate_segment(dim: usize, planes: usize, seed: u64, stream: u64) -> HyperplaneSegment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let total = dim * planes;
    let mut signs = Vec::with_capacity(total);
    while signs.len() < total {
        let word = rng.next_u64();
        let take = (total - signs.len()).min(64);
        signs.extend((0..take).map(|b| if (word >> b) & 1 == 1 { 1i8 } else { -1i8 }));
    }
    HyperplaneSegment { dim, signs }
}

/// `k_dt` planes with i.i.d. uniform `{-1, +1}` entries, reproducible from `seed`.
pub fn generate_hyperplanes(dim: usize, k_dt: usize, seed: u64) -> Result<HyperplaneSegment> {
    if dim == 0 || k_dt == 0 {
        return Err(Error::validation("hyperplane dimension and count must be positive"));
    }
    Ok(generate_segment(dim, k_dt, seed, 0))
}

/// Splits `k` bits into `max_dt` segments of `k / max_dt`; the remainder goes to
/// the smallest distances first.
pub fn segment_lengths(k: usize, max_dt: usize) -> Result<Vec<usize>> {
    if max_dt == 0 {
        return Err(Error::validation("max temporal distance must be at least 1"));
    }
    if k < max_dt {
        return Err(Error::validation(format!(
            "sketch length {k} leaves some of the {max_dt} distances without bits"
        )));
    }
    let (base, rem) = (k / max_dt, k % max_dt);
    Ok((0..max_dt).map(|i| base + usize::from(i < rem)).collect())
}

/// One hyperplane segment per distance; segment `i` is stream `i` of `seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneSet {
    seed: u64,
    dim: usize,
    segments: Vec<HyperplaneSegment>,
}

impl HyperplaneSet {
    pub fn generate(dim: usize, lengths: &[usize], seed: u64) -> Result<Self> {
        if dim == 0 || lengths.is_empty() || lengths.contains(&0) {
            return Err(Error::validation("hyperplane dimension and segment lengths must be positive"));
        }
        let segments = lengths
            .iter()
            .enumerate()
            .map(|(i, &k)| generate_segment(dim, k, seed, i as u64))
            .collect();
        Ok(HyperplaneSet { seed, dim, segments })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[HyperplaneSegment] {
        &self.segments
    }

    /// Segment for distance `dt` (1-based).
    pub fn segment(&self, dt: usize) -> &HyperplaneSegment {
        &self.segments[dt - 1]
    }

    pub fn segment_lengths(&self) -> Vec<usize> {
        self.segments.iter().map(HyperplaneSegment::num_planes).collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(PLANES_MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&(self.segments.len() as u32).to_le_bytes())?;
        for s in &self.segments {
            out.write_all(&(s.num_planes() as u32).to_le_bytes())?;
        }
        for s in &self.segments {
            let bits: Vec<bool> = s.signs.iter().map(|&x| x > 0).collect();
            out.write_all(BitVector::from_bools(&bits).as_bytes())?;
        }
        out.flush()
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut input, &mut magic)?;
        if &magic != PLANES_MAGIC {
            return Err(Error::validation("not a hyperplane file"));
        }
        check_version(read_u32(&mut input)?)?;
        let seed = read_u64(&mut input)?;
        let dim = read_u32(&mut input)? as usize;
        let count = read_u32(&mut input)? as usize;
        let lengths = (0..count).map(|_| read_u32(&mut input).map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
        let mut segments = Vec::with_capacity(count);
        for k in lengths {
            let total = k * dim;
            let mut bytes = vec![0u8; total.div_ceil(8)];
            read_exact(&mut input, &mut bytes)?;
            let signs = (0..total).map(|i| if bytes[i / 8] & mask(i) != 0 { 1 } else { -1 }).collect();
            segments.push(HyperplaneSegment { dim, signs });
        }
        Ok(HyperplaneSet { seed, dim, segments })
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        HyperplaneSet::read_from(BufReader::new(file))
    }
}

/// Sign bits of `h` projected on every plane of `planes`; a zero projection gives 0.
pub fn simhash<T: Copy + Into<f64>>(h: &[T], planes: &HyperplaneSegment) -> Result<BitVector> {
    if h.len() != planes.dim {
        return Err(Error::validation(format!(
            "histogram length {} does not match hyperplane dimension {}",
            h.len(),
            planes.dim
        )));
    }
    let mut out = BitVector::zeros(planes.num_planes());
    simhash_into(h, planes, |i| out.set(i, true));
    Ok(out)
}

fn simhash_into<T: Copy + Into<f64>>(h: &[T], planes: &HyperplaneSegment, mut set: impl FnMut(usize)) {
    let nonzero: Vec<(usize, f64)> =
        h.iter().map(|&x| x.into()).enumerate().filter(|(_, x)| *x != 0.0).collect();
    if nonzero.is_empty() {
        return;
    }
    for i in 0..planes.num_planes() {
        let plane = planes.plane(i);
        let dot: f64 = nonzero.iter().map(|&(j, x)| x * plane[j] as f64).sum();
        if dot > 0.0 {
            set(i);
        }
    }
}

/// `N x K` bit matrix, one row per node, split into per-distance segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchMatrix {
    rows: usize,
    segments: Vec<usize>,
    k: usize,
    row_bytes: usize,
    data: Vec<u8>,
}

impl SketchMatrix {
    pub fn zeros(rows: usize, segments: Vec<usize>) -> Self {
        let k = segments.iter().sum();
        let row_bytes = usize::div_ceil(k, 8);
        SketchMatrix { rows, segments, k, row_bytes, data: vec![0; rows * row_bytes] }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    /// Total bits per row.
    pub fn num_bits(&self) -> usize {
        self.k
    }

    pub fn segment_lengths(&self) -> &[usize] {
        &self.segments
    }

    /// Bit range of distance `dt` (1-based) within a row.
    pub fn segment_range(&self, dt: usize) -> Range<usize> {
        let start: usize = self.segments[..dt - 1].iter().sum();
        start..start + self.segments[dt - 1]
    }

    pub fn row_bytes(&self, u: usize) -> &[u8] {
        &self.data[u * self.row_bytes..(u + 1) * self.row_bytes]
    }

    /// Packed payload, row-major.
    pub fn payload(&self) -> &[u8] {
        &self.data
    }

    pub fn bit(&self, u: usize, i: usize) -> bool {
        self.row_bytes(u)[i / 8] & mask(i) != 0
    }

    pub fn set_bit(&mut self, u: usize, i: usize, value: bool) {
        let byte = &mut self.data[u * self.row_bytes + i / 8];
        if value {
            *byte |= mask(i);
        } else {
            *byte &= !mask(i);
        }
    }

    pub fn row(&self, u: usize) -> BitVector {
        BitVector { len: self.k, bytes: self.row_bytes(u).to_vec() }
    }

    pub fn segment(&self, u: usize, dt: usize) -> BitVector {
        let range = self.segment_range(dt);
        let mut v = BitVector::zeros(range.len());
        for (o, i) in range.enumerate() {
            v.set(o, self.bit(u, i));
        }
        v
    }

    /// Bits of row `u` as 0/1 reals.
    pub fn row_as_f64(&self, u: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.k).map(move |i| if self.bit(u, i) { 1.0 } else { 0.0 })
    }
}

/// Concatenates `sketches[u][dt - 1]` into rows, in increasing `dt`.
pub fn assemble_embeddings(sketches: &[Vec<BitVector>]) -> Result<SketchMatrix> {
    let segments: Vec<usize> = match sketches.first() {
        Some(first) => first.iter().map(BitVector::len).collect(),
        None => return Ok(SketchMatrix::zeros(0, Vec::new())),
    };
    let mut z = SketchMatrix::zeros(sketches.len(), segments.clone());
    for (u, per_dt) in sketches.iter().enumerate() {
        let lengths: Vec<usize> = per_dt.iter().map(BitVector::len).collect();
        if lengths != segments {
            return Err(Error::validation(format!("node {u} has sketch segments {lengths:?}, expected {segments:?}")));
        }
        let mut offset = 0;
        for seg in per_dt {
            for i in seg.ones() {
                z.set_bit(u, offset + i, true);
            }
            offset += seg.len();
        }
    }
    Ok(z)
}

/// Hashes every node's histogram at every distance; rows are filled in parallel.
pub fn hash_histograms(table: &HistogramTable, planes: &HyperplaneSet) -> Result<SketchMatrix> {
    if planes.segments.len() != table.max_dt() {
        return Err(Error::validation(format!(
            "{} hyperplane segments for {} distances",
            planes.segments.len(),
            table.max_dt()
        )));
    }
    if planes.dim != table.layout().dim() {
        return Err(Error::validation(format!(
            "hyperplane dimension {} does not match histogram dimension {}",
            planes.dim,
            table.layout().dim()
        )));
    }
    let lengths = planes.segment_lengths();
    let mut z = SketchMatrix::zeros(table.num_nodes(), lengths.clone());
    let row_bytes = z.row_bytes;
    if row_bytes == 0 {
        return Ok(z);
    }
    z.data.par_chunks_mut(row_bytes).enumerate().for_each(|(u, row)| {
        let mut offset = 0;
        for (dt, seg) in planes.segments.iter().enumerate() {
            simhash_into(table.histogram(u as u32, dt + 1), seg, |i| {
                let bit = offset + i;
                row[bit / 8] |= mask(bit);
            });
            offset += lengths[dt];
        }
    });
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchFormat {
    /// `label: i j k` lines listing set bits.
    Sparse,
    /// Binary header plus bit-packed rows.
    Packed,
}

impl FromStr for SketchFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(SketchFormat::Sparse),
            "packed" => Ok(SketchFormat::Packed),
            other => Err(Error::validation(format!("unknown sketch format '{other}'"))),
        }
    }
}

impl std::fmt::Display for SketchFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SketchFormat::Sparse => "sparse",
            SketchFormat::Packed => "packed",
        })
    }
}

/// Size of the packed header for `segments` distances.
pub fn packed_header_len(segments: usize) -> usize {
    4 + 4 + 8 + 4 + 4 + 4 * segments
}

/// Packed layout (integers little-endian):
/// `"TSKB"`, version `u32`, `N: u64`, `K: u32`, segment count `u32`, segment
/// lengths `u32 x S`, then `N * ceil(K / 8)` payload bytes.
pub fn write_packed<W: Write>(z: &SketchMatrix, mut out: W) -> std::io::Result<()> {
    out.write_all(SKETCH_MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(z.rows as u64).to_le_bytes())?;
    out.write_all(&(z.k as u32).to_le_bytes())?;
    out.write_all(&(z.segments.len() as u32).to_le_bytes())?;
    for &s in &z.segments {
        out.write_all(&(s as u32).to_le_bytes())?;
    }
    out.write_all(&z.data)?;
    out.flush()
}

pub fn read_packed<R: Read>(mut input: R) -> Result<SketchMatrix> {
    let mut magic = [0u8; 4];
    read_exact(&mut input, &mut magic)?;
    if &magic != SKETCH_MAGIC {
        return Err(Error::validation("not a packed sketch file"));
    }
    check_version(read_u32(&mut input)?)?;
    let rows = read_u64(&mut input)? as usize;
    let k = read_u32(&mut input)? as usize;
    let count = read_u32(&mut input)? as usize;
    let segments = (0..count).map(|_| read_u32(&mut input).map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
    if segments.iter().sum::<usize>() != k {
        return Err(Error::validation("segment lengths do not sum to K"));
    }
    let mut z = SketchMatrix::zeros(rows, segments);
    read_exact(&mut input, &mut z.data)?;
    Ok(z)
}

/// Sparse text: a `# k=K segments=a,b,c` comment, then `label: i j ...` per row.
pub fn write_sparse<W: Write>(z: &SketchMatrix, labels: &[String], mut out: W) -> std::io::Result<()> {
    if labels.len() != z.rows {
        let msg = format!("{} labels for {} sketch rows", labels.len(), z.rows);
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, msg));
    }
    let segs: Vec<String> = z.segments.iter().map(|s| s.to_string()).collect();
    writeln!(out, "# k={} segments={}", z.k, segs.join(","))?;
    for (u, label) in labels.iter().enumerate() {
        write!(out, "{label}:")?;
        for i in (0..z.k).filter(|&i| z.bit(u, i)) {
            write!(out, " {i}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn read_sparse<R: BufRead>(input: R) -> Result<(Vec<String>, SketchMatrix)> {
    let mut segments: Option<Vec<usize>> = None;
    let mut rows: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if let Some(header) = line.strip_prefix('#') {
            if let Some(s) = header.split_whitespace().find_map(|kv| kv.strip_prefix("segments=")) {
                let parsed = s
                    .split(',')
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<usize>().map_err(|_| Error::parse(lineno, "bad segment list")))
                    .collect::<Result<Vec<_>>>()?;
                segments = Some(parsed);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (label, bits) = line.rsplit_once(':').ok_or_else(|| Error::parse(lineno, "expected 'label: bits'"))?;
        let bits = bits
            .split_whitespace()
            .map(|b| b.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad bit index '{b}'"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push((label.to_string(), bits));
    }
    let segments = segments.ok_or_else(|| Error::parse(1, "missing '# k=.. segments=..' header"))?;
    let mut z = SketchMatrix::zeros(rows.len(), segments);
    let mut labels = Vec::with_capacity(rows.len());
    for (u, (label, bits)) in rows.into_iter().enumerate() {
        for b in bits {
            if b >= z.k {
                return Err(Error::validation(format!("bit {b} out of range for K={}", z.k)));
            }
            z.set_bit(u, b, true);
        }
        labels.push(label);
    }
    Ok((labels, z))
}

pub fn write_sketches(z: &SketchMatrix, labels: &[String], path: &Path, format: SketchFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    match format {
        SketchFormat::Sparse => write_sparse(z, labels, out),
        SketchFormat::Packed => write_packed(z, out),
    }
    .map_err(|e| Error::io(path, e))
}

/// Reads either format (detected from the magic bytes). Packed files carry no
/// labels, so `labels` is `None` for them.
pub fn read_sketches(path: &Path) -> Result<(Option<Vec<String>>, SketchMatrix)> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut head = [0u8; 4];
    let n = file.read(&mut head).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if n == 4 && &head == SKETCH_MAGIC {
        Ok((None, read_packed(BufReader::new(file))?))
    } else {
        let (labels, z) = read_sparse(BufReader::new(file))?;
        Ok((Some(labels), z))
    }
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input.read_exact(buf).map_err(|e| Error::validation(format!("truncated binary file: {e}")))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(input, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(input, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::validation(format!("unsupported format version {v}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planes(rows: &[&[i8]]) -> HyperplaneSegment {
        HyperplaneSegment { dim: rows[0].len(), signs: rows.concat() }
    }

    #[test]
    fn simhash_of_small_example() {
        let p = planes(&[&[1, 1], &[1, -1]]);
        assert_eq!(simhash(&[1.0, 0.0], &p).unwrap().to_string(), "11");
        assert_eq!(simhash(&[0.0, 0.0], &p).unwrap().to_string(), "00");
        assert_eq!(simhash(&[0.0, 1.0], &p).unwrap().to_string(), "10");
        assert!(matches!(simhash(&[1.0], &p), Err(Error::Validation(_))));
    }

    #[test]
    fn simhash_is_scale_invariant() {
        let p = generate_hyperplanes(6, 32, 3).unwrap();
        let h = [1.0, 0.0, 5.0, 2.0, 0.0, 7.0];
        let h3: Vec<f64> = h.iter().map(|x| x * 3.0).collect();
        assert_eq!(simhash(&h, &p).unwrap(), simhash(&h3, &p).unwrap());
    }

    #[test]
    fn hyperplanes_are_reproducible_signs() {
        let a = generate_hyperplanes(4, 2, 9).unwrap();
        assert_eq!(a.num_planes(), 2);
        assert_eq!(a, generate_hyperplanes(4, 2, 9).unwrap());
        assert_ne!(a, generate_hyperplanes(4, 2, 10).unwrap());
        assert!(a.entries().iter().all(|&x| x == 1 || x == -1));

        let big = generate_hyperplanes(100, 100, 1).unwrap();
        let mean = big.entries().iter().map(|&x| x as f64).sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.05, "{mean}");
        assert!(generate_hyperplanes(0, 1, 0).is_err());
    }

    #[test]
    fn segments_spread_remainder_to_small_distances() {
        assert_eq!(segment_lengths(128, 3).unwrap(), vec![43, 43, 42]);
        assert_eq!(segment_lengths(8, 1).unwrap(), vec![8]);
        assert_eq!(segment_lengths(10, 4).unwrap(), vec![3, 3, 2, 2]);
        assert!(segment_lengths(2, 3).is_err());
    }

    #[test]
    fn assembly_concatenates_segments() {
        let rows = vec![
            vec![BitVector::from_bit_str("101").unwrap(), BitVector::from_bit_str("011").unwrap()],
            vec![BitVector::zeros(3), BitVector::zeros(3)],
        ];
        let z = assemble_embeddings(&rows).unwrap();
        assert_eq!(z.num_bits(), 6);
        assert_eq!(z.segment_range(2), 3..6);
        assert_eq!(z.row(0).to_string(), "101011");
        assert_eq!(z.row(1).count_ones(), 0);
        assert_eq!(z.segment(0, 2).to_string(), "011");

        let ragged = vec![vec![BitVector::zeros(3)], vec![BitVector::zeros(2)]];
        assert!(assemble_embeddings(&ragged).is_err());
    }

    #[test]
    fn similarity_estimates() {
        let a = BitVector::from_bit_str("0110").unwrap();
        let b = BitVector::from_bit_str("1001").unwrap();
        assert_eq!(estimate_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(estimate_similarity(&a, &b).unwrap(), 0.0);
        assert_eq!(estimate_similarity(&a, &BitVector::from_bit_str("0111").unwrap()).unwrap(), 0.75);
        assert!(estimate_similarity(&a, &BitVector::zeros(3)).is_err());
    }

    #[test]
    fn sparse_line_format() {
        let z = assemble_embeddings(&[vec![BitVector::from_bit_str("0110").unwrap()]]).unwrap();
        let mut out = Vec::new();
        write_sparse(&z, &["u".to_string()], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().nth(1), Some("u: 1 2"));
        let (labels, back) = read_sparse(text.as_bytes()).unwrap();
        assert_eq!(labels, vec!["u"]);
        assert_eq!(back, z);
    }

    #[test]
    fn packed_payload_size_and_bit_order() {
        let z = SketchMatrix::zeros(100, vec![64, 64]);
        let mut out = Vec::new();
        write_packed(&z, &mut out).unwrap();
        assert_eq!(out.len(), packed_header_len(2) + 1600);
        assert_eq!(z.payload().len(), 1600);

        let mut one = SketchMatrix::zeros(1, vec![10]);
        one.set_bit(0, 0, true);
        one.set_bit(0, 9, true);
        assert_eq!(one.row_bytes(0), &[0x80, 0x40]);
    }

    #[test]
    fn plane_file_round_trip() {
        let set = HyperplaneSet::generate(7, &[5, 4], 42).unwrap();
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        assert_eq!(HyperplaneSet::read_from(buf.as_slice()).unwrap(), set);
        assert!(HyperplaneSet::read_from(&buf[..10]).is_err());
    }
}
