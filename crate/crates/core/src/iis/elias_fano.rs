//! Elias-Fano encoding of a strictly increasing sequence of ticks.
//!
//! For `n` values below a universe `u` each value is split into
//! `low_width = floor(log2(u / n))` low bits, stored verbatim, and a high
//! part stored in unary: value `i` sets bit `(v_i >> low_width) + i` of the
//! high bitvector, so bucket `h` is the run of ones before the `h`-th zero.
//!
//! Select support samples the position of every [`SAMPLE_RATE`]-th one and
//! zero; the samples are not part of the serialized form.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::Tick;

/// Ones/zeros between select samples.
pub const SAMPLE_RATE: u64 = 512;

/// Bits used by the encoding proper and by select support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EfSpace {
    pub payload_bits: u64,
    pub select_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliasFano {
    len: u64,
    universe: u64,
    low_width: u8,
    low: Vec<u64>,
    high: Vec<u64>,
    high_len: u64,
    /// `one_samples[k]` is the position of one number `(k + 1) * SAMPLE_RATE`.
    one_samples: Vec<u64>,
    zero_samples: Vec<u64>,
}

fn low_width_for(len: u64, universe: u64) -> u8 {
    if len == 0 {
        return 0;
    }
    let ratio = universe / len;
    (63 - ratio.leading_zeros()) as u8
}

fn high_len_for(len: u64, universe: u64, low_width: u8) -> u64 {
    if len == 0 {
        0
    } else {
        len + ((universe - 1) >> low_width) + 1
    }
}

#[inline]
fn get_bit(words: &[u64], pos: u64) -> bool {
    (words[(pos / 64) as usize] >> (pos % 64)) & 1 == 1
}

/// `2n + n * ceil(log2(u / n))`, the payload size every sequence stays within
/// (0 for an empty sequence).
pub fn payload_bound_bits(len: u64, universe: u64) -> u64 {
    if len == 0 {
        return 0;
    }
    let mut c = 0;
    while (len as u128) << c < universe as u128 {
        c += 1;
    }
    2 * len + len * c
}

/// Position of the `k`-th (0-based) set bit of `word`.
#[inline]
fn select_in_word(mut word: u64, k: u32) -> u32 {
    for _ in 0..k {
        word &= word - 1;
    }
    word.trailing_zeros()
}

impl EliasFano {
    pub fn new(values: &[Tick], universe: u64) -> Result<Self> {
        for w in values.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidInput(format!(
                    "Elias-Fano input must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = values.last() {
            if last >= universe {
                return Err(Error::InvalidInput(format!(
                    "value {last} lies outside the universe [0, {universe})"
                )));
            }
        }
        let len = values.len() as u64;
        let low_width = low_width_for(len, universe);
        let high_len = high_len_for(len, universe, low_width);
        let mut low = vec![0u64; (len * low_width as u64).div_ceil(64) as usize];
        let mut high = vec![0u64; high_len.div_ceil(64) as usize];
        let mask = if low_width == 0 {
            0
        } else {
            u64::MAX >> (64 - low_width)
        };
        for (i, &v) in values.iter().enumerate() {
            let i = i as u64;
            if low_width > 0 {
                let bit = i * low_width as u64;
                let (word, off) = ((bit / 64) as usize, bit % 64);
                low[word] |= (v & mask) << off;
                if off + low_width as u64 > 64 {
                    low[word + 1] |= (v & mask) >> (64 - off);
                }
            }
            let pos = (v >> low_width) + i;
            high[(pos / 64) as usize] |= 1 << (pos % 64);
        }
        let mut ef = EliasFano {
            len,
            universe,
            low_width,
            low,
            high,
            high_len,
            one_samples: Vec::new(),
            zero_samples: Vec::new(),
        };
        ef.build_samples();
        let space = ef.space();
        assert!(space.payload_bits <= payload_bound_bits(len, universe));
        assert!(space.select_bits * 2 <= len);
        Ok(ef)
    }

    fn build_samples(&mut self) {
        let (mut ones, mut zeros) = (0u64, 0u64);
        self.one_samples.clear();
        self.zero_samples.clear();
        for pos in 0..self.high_len {
            if get_bit(&self.high, pos) {
                ones += 1;
                if ones % SAMPLE_RATE == 1 && ones > 1 {
                    self.one_samples.push(pos);
                }
            } else {
                zeros += 1;
                if zeros % SAMPLE_RATE == 1 && zeros > 1 {
                    self.zero_samples.push(pos);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn low_width(&self) -> u8 {
        self.low_width
    }

    #[inline]
    fn low_bits(&self, i: u64) -> u64 {
        if self.low_width == 0 {
            return 0;
        }
        let w = self.low_width as u64;
        let bit = i * w;
        let (word, off) = ((bit / 64) as usize, bit % 64);
        let mut v = self.low[word] >> off;
        if off + w > 64 {
            v |= self.low[word + 1] << (64 - off);
        }
        v & (u64::MAX >> (64 - w))
    }

    /// Position in `high` of the `k`-th one (`ones == true`) or zero.
    fn select(&self, k: u64, ones: bool) -> u64 {
        let samples = if ones {
            &self.one_samples
        } else {
            &self.zero_samples
        };
        let block = k / SAMPLE_RATE;
        let (mut pos, mut remaining) = if block == 0 {
            (0, k)
        } else {
            (samples[(block - 1) as usize], k % SAMPLE_RATE)
        };
        let mut word_idx = (pos / 64) as usize;
        let mut word = self.high[word_idx];
        if !ones {
            word = !word;
        }
        word &= u64::MAX << (pos % 64);
        loop {
            let count = word.count_ones() as u64;
            if remaining < count {
                pos = word_idx as u64 * 64 + select_in_word(word, remaining as u32) as u64;
                return pos;
            }
            remaining -= count;
            word_idx += 1;
            word = self.high[word_idx];
            if !ones {
                word = !word;
            }
        }
    }

    /// The `i`-th stored value. Panics if `i >= len`.
    pub fn get(&self, i: usize) -> Tick {
        let i = i as u64;
        assert!(
            i < self.len,
            "index {i} out of bounds for length {}",
            self.len
        );
        let high = self.select(i, true) - i;
        (high << self.low_width) | self.low_bits(i)
    }

    /// Number of stored values `<= x`.
    pub fn rank(&self, x: Tick) -> usize {
        if self.len == 0 {
            return 0;
        }
        if x >= self.universe {
            return self.len as usize;
        }
        let bucket = x >> self.low_width;
        let low_x = if self.low_width == 0 {
            0
        } else {
            x & (u64::MAX >> (64 - self.low_width))
        };
        let mut pos = if bucket == 0 {
            0
        } else {
            self.select(bucket - 1, false) + 1
        };
        let mut count = pos - bucket;
        while pos < self.high_len && get_bit(&self.high, pos) {
            if self.low_bits(count) > low_x {
                break;
            }
            count += 1;
            pos += 1;
        }
        count as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = Tick> + '_ {
        let mut pos = 0u64;
        (0..self.len).map(move |i| {
            while !get_bit(&self.high, pos) {
                pos += 1;
            }
            let v = ((pos - i) << self.low_width) | self.low_bits(i);
            pos += 1;
            v
        })
    }

    pub fn space(&self) -> EfSpace {
        EfSpace {
            payload_bits: self.len * self.low_width as u64 + self.high_len,
            select_bits: (self.one_samples.len() + self.zero_samples.len()) as u64 * 64,
        }
    }

    /// Serialized size in bytes.
    pub fn serialized_len(&self) -> usize {
        24 + 8 * (self.low.len() + self.high.len())
    }

    /// Writes `n` and `u` as little-endian u64, the low width as one byte
    /// padded to 8 bytes, then the low and high words, all LSB-first.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&self.len.to_le_bytes())?;
        w.write_all(&self.universe.to_le_bytes())?;
        w.write_all(&[self.low_width, 0, 0, 0, 0, 0, 0, 0])?;
        for word in self.low.iter().chain(&self.high) {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let len = read_u64(r)?;
        let universe = read_u64(r)?;
        let mut width = [0u8; 8];
        r.read_exact(&mut width).map_err(truncated)?;
        let low_width = width[0];
        if width[1..].iter().any(|&b| b != 0) {
            return Err(Error::Format(
                "Elias-Fano header padding is not zero".into(),
            ));
        }
        if len > universe {
            return Err(Error::Format(format!(
                "Elias-Fano length {len} exceeds universe {universe}"
            )));
        }
        if low_width != low_width_for(len, universe) {
            return Err(Error::Format(format!(
                "Elias-Fano low width {low_width} does not match n={len}, u={universe}"
            )));
        }
        let high_len = high_len_for(len, universe, low_width);
        let low_words = (len * low_width as u64).div_ceil(64);
        let high_words = high_len.div_ceil(64);
        // The high bitvector is at most 3n + 1 bits, so a huge word count
        // means a corrupt header rather than a large sequence.
        if high_words > (3 * len + 64) / 64 + 1 {
            return Err(Error::Format("Elias-Fano sizes are inconsistent".into()));
        }
        let low = read_words(r, low_words)?;
        let high = read_words(r, high_words)?;
        let ones: u64 = high.iter().map(|w| w.count_ones() as u64).sum();
        let tail_clean =
            high_len.is_multiple_of(64) || high.last().is_none_or(|w| w >> (high_len % 64) == 0);
        if ones != len || !tail_clean {
            return Err(Error::Format("Elias-Fano high bits are corrupt".into()));
        }
        let mut ef = EliasFano {
            len,
            universe,
            low_width,
            low,
            high,
            high_len,
            one_samples: Vec::new(),
            zero_samples: Vec::new(),
        };
        ef.build_samples();
        let mut prev: Option<Tick> = None;
        for v in ef.iter() {
            if prev.is_some_and(|p| p >= v) || v >= universe {
                return Err(Error::Format(
                    "Elias-Fano values are not strictly increasing".into(),
                ));
            }
            prev = Some(v);
        }
        Ok(ef)
    }
}

pub(crate) fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("unexpected end of data".into())
    } else {
        Error::Io(e)
    }
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_words<R: Read>(r: &mut R, count: u64) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    for _ in 0..count {
        out.push(read_u64(r)?);
    }
    Ok(out)
}
