//! Polar code construction, encoding and successive-cancellation decoding.
//!
//! Encoding is `x = d * F^{(x)n}` with the kernel `F = [[1, 0], [1, 1]]` and
//! no bit-reversal permutation: for `N = 2`, `x = [d0 ^ d1, d1]`. LLRs are
//! natural-log ratios `ln P(0|y) / P(1|y)`, so a positive value favours 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Real-valued log-likelihood ratio.
pub type LlrValue = f64;

/// Saturation magnitude for float LLRs.
pub const LLR_MAX: LlrValue = 20.0;

/// Default design Eb/N0 (dB) for frozen-set construction.
pub const DEFAULT_DESIGN_DB: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionMethod {
    Bhattacharyya,
    /// Frozen set loaded verbatim from a code-description file.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    #[default]
    NonSystematic,
    Systematic,
}

/// Check-node kernel used by the SC decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    #[default]
    MinSum,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    n: usize,
    k: usize,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
    frozen_value: u8,
    method: ConstructionMethod,
    design_param: f64,
}

impl PolarCode {
    /// Code with an explicit information set.
    pub fn from_info_set(n: usize, mut info_set: Vec<usize>, design_param: f64) -> Result<Self> {
        check_power_of_two(n)?;
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.iter().any(|&i| i >= n) {
            return Err(Error::InvalidCode("information index out of range".into()));
        }
        if info_set.is_empty() {
            return Err(Error::InvalidCode("K must be positive".into()));
        }
        let mut frozen = vec![true; n];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(Self {
            n,
            k: info_set.len(),
            info_set,
            frozen,
            frozen_value: 0,
            method: ConstructionMethod::Explicit,
            design_param,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Sorted information indices.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.frozen[i]).collect()
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_value(&self) -> u8 {
        self.frozen_value
    }

    pub fn method(&self) -> ConstructionMethod {
        self.method
    }

    pub fn design_param(&self) -> f64 {
        self.design_param
    }

    /// Text description: N, K, design parameter and the sorted frozen list.
    pub fn to_description(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# polar code description");
        let _ = writeln!(s, "N {}", self.n);
        let _ = writeln!(s, "K {}", self.k);
        let _ = writeln!(s, "design_param {}", self.design_param);
        let frozen: Vec<String> = self.frozen_set().iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "frozen {}", frozen.join(" "));
        s
    }

    pub fn from_description(text: &str) -> Result<Self> {
        let mut n = None;
        let mut k = None;
        let mut design = None;
        let mut frozen: Option<Vec<usize>> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let bad = |what: &str| Error::Parse(format!("bad {what} line: {line}"));
            match key {
                "N" => n = Some(rest.parse::<usize>().map_err(|_| bad("N"))?),
                "K" => k = Some(rest.parse::<usize>().map_err(|_| bad("K"))?),
                "design_param" => design = Some(rest.parse::<f64>().map_err(|_| bad("design_param"))?),
                "frozen" => {
                    frozen = Some(
                        rest.split_whitespace()
                            .map(|t| t.parse::<usize>().map_err(|_| bad("frozen")))
                            .collect::<Result<_>>()?,
                    )
                }
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing N".into()))?;
        let k = k.ok_or_else(|| Error::Parse("missing K".into()))?;
        let frozen = frozen.unwrap_or_default();
        if frozen.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("frozen list must be strictly increasing".into()));
        }
        if frozen.len() + k != n {
            return Err(Error::InvalidCode(format!(
                "{} frozen indices inconsistent with N={n}, K={k}",
                frozen.len()
            )));
        }
        check_power_of_two(n)?;
        if frozen.iter().any(|&i| i >= n) {
            return Err(Error::InvalidCode("frozen index out of range".into()));
        }
        let info: Vec<usize> = (0..n).filter(|i| frozen.binary_search(i).is_err()).collect();
        Self::from_info_set(n, info, design.unwrap_or(f64::NAN))
    }
}

fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Bhattacharyya parameters of the `n` synthetic channels, starting from
/// `z0 = exp(-10^(design_db / 10))`. At each level channel `i` splits into
/// `2i` (worse, `2z - z^2`) and `2i + 1` (better, `z^2`), so the most
/// significant index bit picks the first split.
pub fn bhattacharyya_parameters(n: usize, design_db: f64) -> Result<Vec<f64>> {
    check_power_of_two(n)?;
    let mut z = vec![(-(10f64.powf(design_db / 10.0))).exp()];
    while z.len() < n {
        z = z.iter().flat_map(|&v| [2.0 * v - v * v, v * v]).collect();
    }
    Ok(z)
}

/// Picks the `k` channels with the smallest Bhattacharyya parameter; ties go
/// to the lower index.
pub fn construct_code(n: usize, k: usize, design_db: f64) -> Result<PolarCode> {
    if k == 0 || k > n {
        return Err(Error::InvalidCode(format!("need 0 < K <= N, got K={k}, N={n}")));
    }
    let z = bhattacharyya_parameters(n, design_db)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let mut code = PolarCode::from_info_set(n, order[..k].to_vec(), design_db)?;
    code.method = ConstructionMethod::Bhattacharyya;
    Ok(code)
}

/// Places `msg` on the information indices; frozen positions get the
/// frozen value.
pub fn insert_frozen(msg: &BitVector, code: &PolarCode) -> Result<BitVector> {
    if msg.len() != code.k {
        return Err(Error::LengthMismatch { expected: code.k, actual: msg.len() });
    }
    let mut d = vec![code.frozen_value; code.n];
    for (&i, b) in code.info_set.iter().zip(msg.iter()) {
        d[i] = b;
    }
    Ok(BitVector::from(d))
}

/// Reads the information indices back out of an `N`-bit vector.
pub fn extract_info(d: &BitVector, code: &PolarCode) -> Result<BitVector> {
    if d.len() != code.n {
        return Err(Error::LengthMismatch { expected: code.n, actual: d.len() });
    }
    Ok(code.info_set.iter().map(|&i| d[i]).collect())
}

/// In-place butterfly transform; returns the number of XORs performed,
/// which is always `(N / 2) * log2(N)`.
pub fn encode_in_place(bits: &mut [u8]) -> Result<usize> {
    let n = bits.len();
    check_power_of_two(n)?;
    let mut xors = 0;
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
                xors += 1;
            }
        }
        half *= 2;
    }
    Ok(xors)
}

pub fn encode_nonsystematic(d: &BitVector) -> Result<BitVector> {
    let mut x = d.clone();
    encode_in_place(x.as_mut_slice())?;
    Ok(x)
}

/// Two-pass systematic encoder: encode, clear the frozen positions of the
/// result, encode again. The message appears verbatim at the information
/// indices of the codeword.
pub fn encode_systematic(msg: &BitVector, code: &PolarCode) -> Result<BitVector> {
    let mut v = insert_frozen(msg, code)?;
    encode_in_place(v.as_mut_slice())?;
    for i in 0..code.n {
        if code.frozen[i] {
            v.set(i, code.frozen_value);
        }
    }
    encode_in_place(v.as_mut_slice())?;
    Ok(v)
}

pub fn encode(msg: &BitVector, code: &PolarCode, encoding: Encoding) -> Result<BitVector> {
    match encoding {
        Encoding::NonSystematic => encode_nonsystematic(&insert_frozen(msg, code)?),
        Encoding::Systematic => encode_systematic(msg, code),
    }
}

#[inline]
fn saturate(v: LlrValue) -> LlrValue {
    v.clamp(-LLR_MAX, LLR_MAX)
}

/// Check-node update.
#[inline]
pub fn f_op(a: LlrValue, b: LlrValue, kernel: Kernel) -> LlrValue {
    match kernel {
        Kernel::MinSum => {
            let m = a.abs().min(b.abs());
            if (a < 0.0) != (b < 0.0) {
                -m
            } else {
                m
            }
        }
        Kernel::Exact => {
            let t = ((a / 2.0).tanh() * (b / 2.0).tanh()).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
            saturate(2.0 * t.atanh())
        }
    }
}

/// Variable-node update: `b + a` when the partial sum is 0, `b - a` when 1.
#[inline]
pub fn g_op(a: LlrValue, b: LlrValue, partial_sum: u8) -> LlrValue {
    if partial_sum == 0 {
        saturate(b + a)
    } else {
        saturate(b - a)
    }
}

#[inline]
fn hard_decision(llr: LlrValue) -> u8 {
    (llr < 0.0) as u8
}

/// Partial sums fed to `g_op` after a left subtree of `2^stage` leaves has
/// been decided: the re-encoding of the last `2^stage` decided bits.
pub fn partial_sums(u_prefix: &BitVector, stage: u32) -> Result<BitVector> {
    let block = 1usize
        .checked_shl(stage)
        .ok_or_else(|| Error::InvalidArgument(format!("stage {stage} too large")))?;
    if u_prefix.is_empty() || u_prefix.len() % block != 0 {
        return Err(Error::InvalidArgument(format!(
            "prefix length {} is not a positive multiple of {block}",
            u_prefix.len()
        )));
    }
    let mut out = u_prefix.slice(u_prefix.len() - block..u_prefix.len());
    encode_in_place(out.as_mut_slice())?;
    Ok(out)
}

/// Output of one SC decoding pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScOutput {
    /// Decided input vector, frozen positions included.
    pub u: BitVector,
    /// Re-encoding of `u`.
    pub codeword: BitVector,
}

impl ScOutput {
    /// Message bits: `u` on the information set for non-systematic codes,
    /// the codeword on the information set for systematic ones.
    pub fn message(&self, code: &PolarCode, encoding: Encoding) -> BitVector {
        let src = match encoding {
            Encoding::NonSystematic => &self.u,
            Encoding::Systematic => &self.codeword,
        };
        code.info_set.iter().map(|&i| src[i]).collect()
    }
}

/// Successive-cancellation decoder with reusable scratch space. One instance
/// per worker.
pub struct ScDecoder {
    code: PolarCode,
    kernel: Kernel,
    depth: usize,
    /// `llr[d]` holds the `N >> d` LLRs entering the active node at depth `d`.
    llr: Vec<Vec<LlrValue>>,
    /// `bits[d]` holds the re-encoded decisions of the active node at depth `d`.
    bits: Vec<Vec<u8>>,
    u: Vec<u8>,
}

impl ScDecoder {
    pub fn new(code: PolarCode, kernel: Kernel) -> Self {
        let depth = code.n.trailing_zeros() as usize;
        let llr = (0..=depth).map(|d| vec![0.0; code.n >> d]).collect();
        let bits = (0..=depth).map(|d| vec![0; code.n >> d]).collect();
        let u = vec![0; code.n];
        Self { code, kernel, depth, llr, bits, u }
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    pub fn decode(&mut self, llrs: &[LlrValue]) -> Result<ScOutput> {
        if llrs.len() != self.code.n {
            return Err(Error::LengthMismatch { expected: self.code.n, actual: llrs.len() });
        }
        if let Some(i) = llrs.iter().position(|v| v.is_nan()) {
            return Err(Error::NanLlr(i));
        }
        for (dst, &v) in self.llr[0].iter_mut().zip(llrs) {
            *dst = saturate(v);
        }
        self.node(0, 0);
        Ok(ScOutput {
            u: BitVector::from_bits(&self.u),
            codeword: BitVector::from_bits(&self.bits[0]),
        })
    }

    fn node(&mut self, d: usize, u_offset: usize) {
        if d == self.depth {
            let bit = if self.code.frozen[u_offset] {
                self.code.frozen_value
            } else {
                hard_decision(self.llr[d][0])
            };
            self.u[u_offset] = bit;
            self.bits[d][0] = bit;
            return;
        }
        let half = self.llr[d].len() / 2;
        let kernel = self.kernel;
        {
            let (upper, lower) = self.llr.split_at_mut(d + 1);
            let (src, dst) = (&upper[d], &mut lower[0]);
            for i in 0..half {
                dst[i] = f_op(src[i], src[i + half], kernel);
            }
        }
        self.node(d + 1, u_offset);
        {
            let (upper, lower) = self.bits.split_at_mut(d + 1);
            upper[d][..half].copy_from_slice(&lower[0][..half]);
        }
        {
            let (upper, lower) = self.llr.split_at_mut(d + 1);
            let (src, dst) = (&upper[d], &mut lower[0]);
            let sums = &self.bits[d];
            for i in 0..half {
                dst[i] = g_op(src[i], src[i + half], sums[i]);
            }
        }
        self.node(d + 1, u_offset + half);
        let (upper, lower) = self.bits.split_at_mut(d + 1);
        let (out, right) = (&mut upper[d], &lower[0]);
        for i in 0..half {
            out[i] ^= right[i];
            out[i + half] = right[i];
        }
    }
}

/// One-shot SC decode returning `(message, codeword estimate)`.
pub fn sc_decode(
    llrs: &[LlrValue],
    code: &PolarCode,
    encoding: Encoding,
    kernel: Kernel,
) -> Result<(BitVector, BitVector)> {
    let out = ScDecoder::new(code.clone(), kernel).decode(llrs)?;
    Ok((out.message(code, encoding), out.codeword))
}

/// Saturated LLRs a noiseless receiver would produce for `codeword`.
pub fn perfect_llrs(codeword: &BitVector) -> Vec<LlrValue> {
    codeword
        .iter()
        .map(|b| if b == 0 { LLR_MAX } else { -LLR_MAX })
        .collect()
}
