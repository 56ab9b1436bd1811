//! Approximate compute units (ACUs).
//!
//! An ACU is a deterministic signed integer multiplier, either evaluated
//! behaviorally or materialized as an exhaustive lookup table over every
//! operand pair. Both paths are 1-1 representations of the same unit and
//! must return identical products for every operand pair.
//!
//! The LUT is indexed by concatenated two's-complement bit patterns:
//! `idx = (ubits(a) << bits_b) | ubits(b)`. Entries are 32-bit regardless of
//! operand bitwidth and the table is cache-line aligned so kernel gathers
//! stay within as few cache chunks as possible.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quant::{MAX_BITS, MIN_BITS};

/// LUT mode is refused above this combined bitwidth (a 2^30-entry table).
pub const MAX_LUT_TOTAL_BITS: u8 = 30;
/// Per-operand width above which resolution defaults to functional mode.
pub const MAX_LUT_OPERAND_BITS: u8 = 15;
/// Exhaustive metrics are limited to this many bits per operand (2^24 pairs).
pub const MAX_METRICS_OPERAND_BITS: u8 = 12;

const LUT_MAGIC: &[u8; 6] = b"AXLUT1";

fn check_bits_pair(bits_a: u8, bits_b: u8) -> Result<()> {
    for b in [bits_a, bits_b] {
        if !(MIN_BITS..=MAX_BITS).contains(&b) {
            return Err(Error::InvalidArgument(format!(
                "operand bitwidth {b} outside supported range {MIN_BITS}..={MAX_BITS}"
            )));
        }
    }
    Ok(())
}

/// Two's-complement bit pattern of `v` masked to `bits`.
#[inline]
pub fn ubits(v: i32, bits: u8) -> u32 {
    (v as u32) & ((1u32 << bits) - 1)
}

/// Sign-extend a `bits`-wide pattern back to i32.
#[inline]
pub fn sext(u: u32, bits: u8) -> i32 {
    let shift = 32 - bits as u32;
    ((u << shift) as i32) >> shift
}

/// Full signed operand range for a bitwidth: [-2^(b-1), 2^(b-1)-1].
pub fn operand_range(bits: u8) -> (i32, i32) {
    (-(1i32 << (bits - 1)), (1i32 << (bits - 1)) - 1)
}

#[derive(Clone)]
enum BehaviorKind {
    Exact,
    /// Zero the k least-significant bits of each operand's two's-complement
    /// pattern before the exact multiply.
    Trunc(u8),
    /// Logarithmic multiplier: exact for 0/±1 operands, otherwise
    /// sign * 2^(ka+kb) * (1 + fa + fb) truncated to integer.
    Mitchell,
    /// Black-box unit imported from a LUT file.
    Table(Arc<AcuLut>),
}

/// A behavioral (functional-mode) multiplier.
#[derive(Clone)]
pub struct AcuBehavior {
    id: String,
    bits_a: u8,
    bits_b: u8,
    kind: BehaviorKind,
}

impl AcuBehavior {
    pub fn exact(bits_a: u8, bits_b: u8) -> Result<Self> {
        check_bits_pair(bits_a, bits_b)?;
        Ok(AcuBehavior { id: "exact".into(), bits_a, bits_b, kind: BehaviorKind::Exact })
    }

    pub fn trunc(k: u8, bits_a: u8, bits_b: u8) -> Result<Self> {
        check_bits_pair(bits_a, bits_b)?;
        if k > 16 {
            return Err(Error::InvalidArgument(format!("trunc parameter {k} > 16")));
        }
        Ok(AcuBehavior { id: format!("trunc({k})"), bits_a, bits_b, kind: BehaviorKind::Trunc(k) })
    }

    pub fn mitchell(bits_a: u8, bits_b: u8) -> Result<Self> {
        check_bits_pair(bits_a, bits_b)?;
        Ok(AcuBehavior { id: "mitchell".into(), bits_a, bits_b, kind: BehaviorKind::Mitchell })
    }

    /// Wrap an imported LUT as a behavioral unit (its behavior is the table).
    pub fn from_table(lut: Arc<AcuLut>) -> Self {
        AcuBehavior {
            id: lut.id().to_string(),
            bits_a: lut.bits_a(),
            bits_b: lut.bits_b(),
            kind: BehaviorKind::Table(lut),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bits_a(&self) -> u8 {
        self.bits_a
    }

    pub fn bits_b(&self) -> u8 {
        self.bits_b
    }

    /// The deterministic product. Operands must lie in their declared ranges.
    #[inline]
    pub fn eval(&self, a: i32, b: i32) -> i32 {
        match &self.kind {
            BehaviorKind::Exact => a * b,
            BehaviorKind::Trunc(k) => {
                let mask = if *k >= 32 { 0 } else { !0u32 << *k };
                let ta = sext(ubits(a, self.bits_a) & mask, self.bits_a);
                let tb = sext(ubits(b, self.bits_b) & mask, self.bits_b);
                ta * tb
            }
            BehaviorKind::Mitchell => mitchell_mul(a, b),
            BehaviorKind::Table(lut) => lut.lookup(a, b),
        }
    }
}

fn mitchell_mul(a: i32, b: i32) -> i32 {
    let ua = a.unsigned_abs();
    let ub = b.unsigned_abs();
    if ua <= 1 || ub <= 1 {
        return a * b;
    }
    let ka = 31 - ua.leading_zeros();
    let kb = 31 - ub.leading_zeros();
    let fa = (ua - (1 << ka)) as u64; // |a| - 2^ka, the mantissa numerator
    let fb = (ub - (1 << kb)) as u64;
    let mag = (1u64 << (ka + kb)) + (fa << kb) + (fb << ka);
    debug_assert!(mag < 1 << 31);
    if (a < 0) != (b < 0) {
        -(mag as i32)
    } else {
        mag as i32
    }
}

/// Cache-line aligned contiguous i32 storage.
#[derive(Debug)]
struct AlignedI32s {
    lines: Vec<CacheLine>,
    len: usize,
}

#[repr(C, align(64))]
#[derive(Clone, Copy, Debug)]
struct CacheLine([i32; 16]);

impl AlignedI32s {
    fn zeroed(len: usize) -> Self {
        AlignedI32s { lines: vec![CacheLine([0; 16]); len.div_ceil(16)], len }
    }

    fn as_slice(&self) -> &[i32] {
        // Sound: CacheLine is repr(C) over [i32; 16] and lines covers >= len.
        unsafe { std::slice::from_raw_parts(self.lines.as_ptr() as *const i32, self.len) }
    }

    fn as_mut_slice(&mut self) -> &mut [i32] {
        unsafe { std::slice::from_raw_parts_mut(self.lines.as_mut_ptr() as *mut i32, self.len) }
    }
}

/// A materialized lookup table over every operand pair of an ACU.
#[derive(Debug)]
pub struct AcuLut {
    id: String,
    bits_a: u8,
    bits_b: u8,
    signed: bool,
    table: AlignedI32s,
}

impl AcuLut {
    /// Exhaustively enumerate all operand pairs (including -2^(b-1)) of a
    /// behavioral unit. Refused above a combined 30 bits; use functional
    /// mode there instead.
    pub fn build(behavior: &AcuBehavior) -> Result<Self> {
        let (ba, bb) = (behavior.bits_a, behavior.bits_b);
        if ba + bb > MAX_LUT_TOTAL_BITS {
            return Err(Error::Unsupported(format!(
                "LUT over {}+{} operand bits exceeds {} total; use functional mode",
                ba, bb, MAX_LUT_TOTAL_BITS
            )));
        }
        if let BehaviorKind::Table(lut) = &behavior.kind {
            // The behavior already is a table; copy it through.
            let mut table = AlignedI32s::zeroed(lut.table.len);
            table.as_mut_slice().copy_from_slice(lut.table());
            return Ok(AcuLut { id: lut.id.clone(), bits_a: ba, bits_b: bb, signed: true, table });
        }
        let entries = 1usize << (ba + bb);
        let mut table = AlignedI32s::zeroed(entries);
        let slice = table.as_mut_slice();
        let (a_lo, a_hi) = operand_range(ba);
        let (b_lo, b_hi) = operand_range(bb);
        for a in a_lo..=a_hi {
            let base = (ubits(a, ba) as usize) << bb;
            for b in b_lo..=b_hi {
                slice[base | ubits(b, bb) as usize] = behavior.eval(a, b);
            }
        }
        Ok(AcuLut { id: behavior.id.clone(), bits_a: ba, bits_b: bb, signed: true, table })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bits_a(&self) -> u8 {
        self.bits_a
    }

    pub fn bits_b(&self) -> u8 {
        self.bits_b
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    #[inline]
    pub fn index(&self, a: i32, b: i32) -> usize {
        ((ubits(a, self.bits_a) << self.bits_b) | ubits(b, self.bits_b)) as usize
    }

    #[inline]
    pub fn lookup(&self, a: i32, b: i32) -> i32 {
        self.table.as_slice()[self.index(a, b)]
    }

    pub fn table(&self) -> &[i32] {
        self.table.as_slice()
    }

    /// Serialize as `AXLUT1 | bits_a | bits_b | signed | entry count (u32 LE)
    /// | little-endian i32 entries in index order`.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        w.write_all(LUT_MAGIC)?;
        w.write_all(&[self.bits_a, self.bits_b, self.signed as u8])?;
        w.write_all(&(self.table.len as u32).to_le_bytes())?;
        for v in self.table() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let header = 6 + 3 + 4;
        if bytes.len() < header {
            return Err(Error::Format(format!("LUT file {} truncated", path.display())));
        }
        if &bytes[..6] != LUT_MAGIC {
            return Err(Error::Format(format!("bad LUT magic in {}", path.display())));
        }
        let (bits_a, bits_b, signed) = (bytes[6], bytes[7], bytes[8]);
        check_bits_pair(bits_a, bits_b)?;
        if signed != 1 {
            return Err(Error::Unsupported("unsigned LUTs are not supported".into()));
        }
        let count = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
        if bits_a + bits_b > MAX_LUT_TOTAL_BITS || count != 1usize << (bits_a + bits_b) {
            return Err(Error::Format(format!(
                "LUT entry count {count} does not match bits_a={bits_a}, bits_b={bits_b}"
            )));
        }
        if bytes.len() != header + count * 4 {
            return Err(Error::Format(format!(
                "LUT file {} has {} bytes, expected {}",
                path.display(),
                bytes.len(),
                header + count * 4
            )));
        }
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let mut table = AlignedI32s::zeroed(count);
        let slice = table.as_mut_slice();
        for (i, chunk) in bytes[header..].chunks_exact(4).enumerate() {
            slice[i] = i32::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(AcuLut {
            id: format!("lut:{}", stem.unwrap_or_else(|| "imported".into())),
            bits_a,
            bits_b,
            signed: true,
            table,
        })
    }
}

/// Runtime handle: either a materialized LUT or a behavioral function.
#[derive(Clone)]
pub enum Acu {
    Lut(Arc<AcuLut>),
    Functional(Arc<AcuBehavior>),
}

impl Acu {
    pub fn id(&self) -> &str {
        match self {
            Acu::Lut(l) => l.id(),
            Acu::Functional(b) => b.id(),
        }
    }

    pub fn bits_a(&self) -> u8 {
        match self {
            Acu::Lut(l) => l.bits_a(),
            Acu::Functional(b) => b.bits_a(),
        }
    }

    pub fn bits_b(&self) -> u8 {
        match self {
            Acu::Lut(l) => l.bits_b(),
            Acu::Functional(b) => b.bits_b(),
        }
    }

    pub fn is_lut(&self) -> bool {
        matches!(self, Acu::Lut(_))
    }

    pub fn mode_label(&self) -> &'static str {
        match self {
            Acu::Lut(_) => "lut",
            Acu::Functional(_) => "functional",
        }
    }

    #[inline]
    pub fn eval(&self, a: i32, b: i32) -> i32 {
        match self {
            Acu::Lut(l) => l.lookup(a, b),
            Acu::Functional(f) => f.eval(a, b),
        }
    }
}

/// Single approximate multiply. Operands must be within the unit's declared
/// bitwidth ranges (checked in debug builds).
#[inline]
pub fn approx_mul(acu: &Acu, a: i32, b: i32) -> i32 {
    debug_assert!({
        let (lo_a, hi_a) = operand_range(acu.bits_a());
        let (lo_b, hi_b) = operand_range(acu.bits_b());
        a >= lo_a && a <= hi_a && b >= lo_b && b <= hi_b
    });
    acu.eval(a, b)
}

/// Error metrics of an ACU versus an exact oracle, from exhaustive
/// enumeration of the full operand space.
#[derive(Clone, Debug, PartialEq)]
pub struct AcuMetrics {
    /// mean |approx - exact| over all pairs, normalized by the maximum
    /// |exact| product (2^(bits_a-1) * 2^(bits_b-1)), times 100.
    pub mae_percent: f64,
    /// mean |approx - exact| / |exact| over pairs with exact != 0, times 100.
    pub mre_percent: f64,
    /// Reported hardware metadata; never computed here.
    pub power_mw: Option<f64>,
}

pub fn acu_metrics_vs<F: Fn(i32, i32) -> i32>(acu: &Acu, exact: F) -> Result<AcuMetrics> {
    let (ba, bb) = (acu.bits_a(), acu.bits_b());
    if ba > MAX_METRICS_OPERAND_BITS || bb > MAX_METRICS_OPERAND_BITS {
        return Err(Error::Unsupported(format!(
            "exhaustive metrics limited to {MAX_METRICS_OPERAND_BITS} bits per operand \
             (got {ba}x{bb})"
        )));
    }
    let (a_lo, a_hi) = operand_range(ba);
    let (b_lo, b_hi) = operand_range(bb);
    let mut abs_sum = 0u64;
    let mut rel_sum = 0f64;
    let mut rel_count = 0u64;
    for a in a_lo..=a_hi {
        for b in b_lo..=b_hi {
            let e = exact(a, b);
            let p = acu.eval(a, b);
            let d = (p as i64 - e as i64).unsigned_abs();
            abs_sum += d;
            if e != 0 {
                rel_sum += d as f64 / (e as i64).unsigned_abs() as f64;
                rel_count += 1;
            }
        }
    }
    let pairs = (1u64 << ba) * (1u64 << bb);
    let max_exact = (1u64 << (ba - 1)) * (1u64 << (bb - 1));
    Ok(AcuMetrics {
        mae_percent: abs_sum as f64 / pairs as f64 / max_exact as f64 * 100.0,
        mre_percent: if rel_count > 0 { rel_sum / rel_count as f64 * 100.0 } else { 0.0 },
        power_mw: None,
    })
}

/// Metrics against the exact integer product.
pub fn acu_metrics(acu: &Acu) -> Result<AcuMetrics> {
    acu_metrics_vs(acu, |a, b| a * b)
}

/// Parsed ACU selector: builtin behaviors or an imported LUT file.
#[derive(Clone, Debug, PartialEq)]
pub enum AcuSpec {
    Exact,
    Trunc(u8),
    Mitchell,
    LutFile(String),
}

impl AcuSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exact" {
            return Ok(AcuSpec::Exact);
        }
        if s == "mitchell" {
            return Ok(AcuSpec::Mitchell);
        }
        if let Some(rest) = s.strip_prefix("trunc(") {
            if let Some(k) = rest.strip_suffix(')') {
                let k: u8 = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad trunc parameter in '{s}'")))?;
                return Ok(AcuSpec::Trunc(k));
            }
        }
        if let Some(path) = s.strip_prefix("lut:") {
            if path.is_empty() {
                return Err(Error::InvalidArgument("empty LUT path in ACU spec".into()));
            }
            return Ok(AcuSpec::LutFile(path.to_string()));
        }
        Err(Error::InvalidArgument(format!(
            "unknown ACU '{s}' (expected exact, trunc(k), mitchell, or lut:<path>)"
        )))
    }

    pub fn canonical_id(&self) -> String {
        match self {
            AcuSpec::Exact => "exact".into(),
            AcuSpec::Trunc(k) => format!("trunc({k})"),
            AcuSpec::Mitchell => "mitchell".into(),
            AcuSpec::LutFile(p) => format!("lut:{p}"),
        }
    }

    pub fn behavior(&self, bits_a: u8, bits_b: u8, base_dir: Option<&Path>) -> Result<AcuBehavior> {
        match self {
            AcuSpec::Exact => AcuBehavior::exact(bits_a, bits_b),
            AcuSpec::Trunc(k) => AcuBehavior::trunc(*k, bits_a, bits_b),
            AcuSpec::Mitchell => AcuBehavior::mitchell(bits_a, bits_b),
            AcuSpec::LutFile(p) => {
                let lut = read_lut_checked(p, bits_a, bits_b, base_dir)?;
                Ok(AcuBehavior::from_table(Arc::new(lut)))
            }
        }
    }
}

fn read_lut_checked(
    rel: &str,
    bits_a: u8,
    bits_b: u8,
    base_dir: Option<&Path>,
) -> Result<AcuLut> {
    let p = PathBuf::from(rel);
    let path = if p.is_absolute() || base_dir.is_none() {
        p
    } else {
        base_dir.unwrap().join(p)
    };
    let lut = AcuLut::read_file(&path)?;
    if lut.bits_a() != bits_a || lut.bits_b() != bits_b {
        return Err(Error::Config(format!(
            "LUT file {} is {}x{} bits but the assignment requires {}x{}",
            path.display(),
            lut.bits_a(),
            lut.bits_b(),
            bits_a,
            bits_b
        )));
    }
    Ok(lut)
}

/// How to materialize an ACU for execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcuMode {
    /// LUT when each operand is <= 15 bits and the table fits the guard;
    /// functional otherwise.
    Auto,
    ForceLut,
    ForceFunctional,
}

/// Resolve a spec into an executable handle at the given operand bitwidths.
pub fn resolve(
    spec: &AcuSpec,
    bits_a: u8,
    bits_b: u8,
    mode: AcuMode,
    base_dir: Option<&Path>,
) -> Result<Acu> {
    check_bits_pair(bits_a, bits_b)?;
    let lut_ok = bits_a + bits_b <= MAX_LUT_TOTAL_BITS;
    let auto_lut =
        lut_ok && bits_a <= MAX_LUT_OPERAND_BITS && bits_b <= MAX_LUT_OPERAND_BITS;
    let want_lut = match mode {
        AcuMode::Auto => auto_lut,
        AcuMode::ForceLut => {
            if !lut_ok {
                return Err(Error::Unsupported(format!(
                    "LUT over {bits_a}+{bits_b} operand bits exceeds {MAX_LUT_TOTAL_BITS} total; \
                     use functional mode"
                )));
            }
            true
        }
        AcuMode::ForceFunctional => false,
    };
    if want_lut {
        let lut = match spec {
            AcuSpec::LutFile(p) => read_lut_checked(p, bits_a, bits_b, base_dir)?,
            _ => AcuLut::build(&spec.behavior(bits_a, bits_b, base_dir)?)?,
        };
        Ok(Acu::Lut(Arc::new(lut)))
    } else {
        Ok(Acu::Functional(Arc::new(spec.behavior(bits_a, bits_b, base_dir)?)))
    }
}

/// One-line human summary of a LUT (used by the CLI inspect subcommand).
pub fn lut_summary(lut: &AcuLut) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "id {} bits_a {} bits_b {} signed {} entries {}",
        lut.id(),
        lut.bits_a(),
        lut.bits_b(),
        lut.signed(),
        lut.table().len()
    );
    let (a_lo, a_hi) = operand_range(lut.bits_a());
    let (b_lo, b_hi) = operand_range(lut.bits_b());
    for (a, b) in [(a_lo, b_lo), (a_lo, b_hi), (a_hi, b_lo), (a_hi, b_hi), (1, 1), (1, -1)] {
        let _ = writeln!(s, "  ({a}, {b}) -> {}", lut.lookup(a, b));
    }
    s
}
