//! Piecewise aggregate approximation, SAX symbolization and bags of words.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Standard deviation below which a sequence is treated as constant.
pub const FLAT_STD: f64 = 1e-8;

pub const MAX_ALPHABET: usize = 26;

/// `(x - mean) / std` with the population standard deviation; constant input
/// maps to all zeros.
pub fn znormalize(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::arg("cannot z-normalize an empty sequence"));
    }
    let mut out = x.to_vec();
    znormalize_in_place(&mut out);
    Ok(out)
}

pub(crate) fn znormalize_in_place(x: &mut [f64]) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < FLAT_STD {
        x.fill(0.0);
    } else {
        for v in x.iter_mut() {
            *v = (*v - mean) / std;
        }
    }
}

/// Means of `w` equal-width segments of `x`.
///
/// Segment `j` spans `[j·m/w, (j+1)·m/w)`; a point straddling a segment
/// boundary contributes to both sides in proportion to its overlap.
pub fn paa(x: &[f64], w: usize) -> Result<Vec<f64>> {
    let m = x.len();
    if w == 0 || w > m {
        return Err(Error::arg(format!(
            "PAA needs 1 <= segments <= length, got {w} segments for length {m}"
        )));
    }
    let mut out = vec![0.0; w];
    paa_into(x, &mut out);
    Ok(out)
}

fn paa_into(x: &[f64], out: &mut [f64]) {
    let (m, w) = (x.len(), out.len());
    if m % w == 0 {
        let step = m / w;
        for (o, seg) in out.iter_mut().zip(x.chunks_exact(step)) {
            *o = seg.iter().sum::<f64>() / step as f64;
        }
        return;
    }
    // Scale the axis by w: point i covers [i·w, (i+1)·w), segment j covers
    // [j·m, (j+1)·m); overlaps are integers.
    for (j, o) in out.iter_mut().enumerate() {
        let (s0, s1) = (j * m, (j + 1) * m);
        let mut acc = 0.0;
        for (i, &v) in x.iter().enumerate().take(s1.div_ceil(w)).skip(s0 / w) {
            let lo = (i * w).max(s0);
            let hi = ((i + 1) * w).min(s1);
            if hi > lo {
                acc += v * (hi - lo) as f64;
            }
        }
        *o = acc / m as f64;
    }
}

/// Inverse standard normal CDF (Wichura, AS 241 `PPND16`), relative accuracy
/// about 1e-16 on `(0, 1)`.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability {p} outside (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_758_8)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// `q - 1` thresholds splitting N(0, 1) into `q` equiprobable bins.
pub fn gaussian_breakpoints(q: usize) -> Result<Vec<f64>> {
    if q < 2 {
        return Err(Error::arg(format!("need at least 2 bins, got {q}")));
    }
    Ok((1..q)
        .map(|k| inverse_normal_cdf(k as f64 / q as f64))
        .collect())
}

/// SAX breakpoints for an alphabet of `a` letters.
pub fn breakpoints(a: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_ALPHABET).contains(&a) {
        return Err(Error::arg(format!(
            "alphabet size must be in 2..={MAX_ALPHABET}, got {a}"
        )));
    }
    gaussian_breakpoints(a)
}

/// Bin of `v` against sorted thresholds; a value on a threshold takes the
/// upper bin.
#[inline]
pub fn bin_index(v: f64, thresholds: &[f64]) -> usize {
    thresholds.partition_point(|&b| b <= v)
}

fn letter(k: usize) -> char {
    (b'a' + k as u8) as char
}

/// Maps each value to its letter under the alphabet-`a` breakpoints.
pub fn symbolize(means: &[f64], a: usize) -> Result<String> {
    let bps = breakpoints(a)?;
    Ok(means.iter().map(|&v| letter(bin_index(v, &bps))).collect())
}

/// SAX triple: sliding-window length, letters per word, alphabet size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SaxParams {
    pub n: usize,
    pub w: usize,
    pub a: usize,
}

impl SaxParams {
    pub fn new(n: usize, w: usize, a: usize) -> Result<Self> {
        let p = SaxParams { n, w, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 || self.w > self.n {
            return Err(Error::arg(format!(
                "word size {} must lie in 1..={}",
                self.w, self.n
            )));
        }
        if !(2..=MAX_ALPHABET).contains(&self.a) {
            return Err(Error::arg(format!(
                "alphabet size must be in 2..={MAX_ALPHABET}, got {}",
                self.a
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SaxParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.n, self.w, self.a)
    }
}

impl FromStr for SaxParams {
    type Err = Error;

    /// Parses `n,w,a`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(',').map(str::trim).collect();
        let nums = parts
            .iter()
            .map(|p| p.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::arg(format!("expected n,w,a, got {s:?}")))?;
        match nums.as_slice() {
            &[n, w, a] => SaxParams::new(n, w, a),
            _ => Err(Error::arg(format!("expected n,w,a, got {s:?}"))),
        }
    }
}

/// Switches around the core transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaxOptions {
    /// Z-normalize each window before PAA.
    pub normalize_windows: bool,
    /// Drop a word when it repeats the previous window's word.
    pub numerosity_reduction: bool,
}

impl Default for SaxOptions {
    fn default() -> Self {
        SaxOptions {
            normalize_windows: true,
            numerosity_reduction: false,
        }
    }
}

/// One `w`-letter word per stride-1 window of length `n`.
pub fn sax_transform(x: &[f64], p: &SaxParams) -> Result<Vec<String>> {
    sax_transform_with(x, p, SaxOptions::default())
}

pub fn sax_transform_with(x: &[f64], p: &SaxParams, opts: SaxOptions) -> Result<Vec<String>> {
    let bps = breakpoints(p.a)?;
    let segments = window_paa(x, p.n, p.w, opts.normalize_windows)?;
    let mut words: Vec<String> = Vec::with_capacity(segments.len());
    for means in &segments {
        let word: String = means.iter().map(|&v| letter(bin_index(v, &bps))).collect();
        if opts.numerosity_reduction && words.last() == Some(&word) {
            continue;
        }
        words.push(word);
    }
    Ok(words)
}

/// PAA values of every stride-1 window, the alphabet-independent half of
/// [`sax_transform`].
pub fn window_paa(x: &[f64], n: usize, w: usize, normalize: bool) -> Result<Vec<Vec<f64>>> {
    if n == 0 || w == 0 || w > n {
        return Err(Error::arg(format!(
            "invalid window {n} / word size {w}"
        )));
    }
    if x.len() < n {
        return Err(Error::arg(format!(
            "series of length {} is shorter than the window {n}",
            x.len()
        )));
    }
    let mut buf = vec![0.0; n];
    Ok(x.windows(n)
        .map(|win| {
            buf.copy_from_slice(win);
            if normalize {
                znormalize_in_place(&mut buf);
            }
            let mut means = vec![0.0; w];
            paa_into(&buf, &mut means);
            means
        })
        .collect())
}

/// Multiset of words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordHistogram {
    pub counts: BTreeMap<String, u64>,
}

impl WordHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn add(&mut self, word: &str, count: u64) {
        if count > 0 {
            *self.counts.entry(word.to_string()).or_default() += count;
        }
    }

    /// Same counts with every key rewritten to `{prefix}{word}`.
    pub fn prefixed(&self, prefix: &str) -> WordHistogram {
        WordHistogram {
            counts: self
                .counts
                .iter()
                .map(|(k, &c)| (format!("{prefix}{k}"), c))
                .collect(),
        }
    }

    /// Sorted `word<TAB>count` lines.
    pub fn to_text(&self) -> String {
        self.counts
            .iter()
            .map(|(w, c)| format!("{w}\t{c}\n"))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut h = WordHistogram::default();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (w, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::arg(format!("line {}: expected word<TAB>count", n + 1)))?;
            let c: u64 = c
                .parse()
                .map_err(|_| Error::arg(format!("line {}: bad count {c:?}", n + 1)))?;
            h.add(w, c);
        }
        Ok(h)
    }
}

pub fn bag_of_words<S: AsRef<str>>(words: &[S]) -> WordHistogram {
    let mut h = WordHistogram::default();
    for w in words {
        h.add(w.as_ref(), 1);
    }
    h
}

pub fn merge(a: &WordHistogram, b: &WordHistogram) -> WordHistogram {
    let mut out = a.clone();
    for (w, &c) in &b.counts {
        out.add(w, c);
    }
    out
}
