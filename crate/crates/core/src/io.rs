//! Signal block interchange formats.
//!
//! * **raw**: one ASCII header line
//!   `DIFFUSENSE-RAW1 order=<L> samples=<T> rate=<Hz>\n` followed by the
//!   `(L+1)² × T` block as little-endian `f64`, row-major (channel by channel).
//! * **wav**: 32-bit IEEE float WAV, `(L+1)²` interleaved channels in ACN
//!   order, N3D normalization.
//!
//! Files are written atomically: data goes to a temporary file in the target
//! directory, which is then renamed over the destination.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_sim::ShSignalBlock;
use crate::sh_math::{channel_count, order_for_channels};

pub const RAW_MAGIC: &str = "DIFFUSENSE-RAW1";
pub const DEFAULT_SAMPLE_RATE: u32 = 48_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    Raw,
    Wav,
}

impl SignalFormat {
    /// `.wav` (any case) selects WAV, everything else raw.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("wav") => SignalFormat::Wav,
            _ => SignalFormat::Raw,
        }
    }
}

impl std::str::FromStr for SignalFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(SignalFormat::Raw),
            "wav" => Ok(SignalFormat::Wav),
            other => Err(Error::InvalidInput(format!("unknown format `{other}`"))),
        }
    }
}

/// Multichannel signal as read from disk, before the channel count has been
/// checked against an SH order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSignal {
    pub channels: usize,
    pub samples: usize,
    pub sample_rate: u32,
    /// Channel-major samples.
    pub data: Vec<f64>,
}

impl MultichannelSignal {
    /// Interprets the channels as order-`order` SH signals.
    pub fn into_block(self, order: usize) -> Result<ShSignalBlock> {
        let expected = channel_count(order);
        if self.channels != expected {
            return Err(Error::InvalidInput(format!(
                "order {order} needs {expected} channels ((L+1)^2), file has {}",
                self.channels
            )));
        }
        ShSignalBlock::new(order, self.samples, self.data)
    }

    /// SH order implied by the channel count, if it is a perfect square.
    pub fn implied_order(&self) -> Option<usize> {
        order_for_channels(self.channels)
    }
}

/// Writes through a temporary file in the destination directory and renames it
/// into place.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_raw<W: Write>(block: &ShSignalBlock, sample_rate: u32, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{RAW_MAGIC} order={} samples={} rate={sample_rate}",
        block.order(),
        block.samples()
    )?;
    for v in block.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn header_field<'a>(fields: &'a [&str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("raw header lacks `{key}=`")))
}

pub fn read_raw<R: Read>(input: R) -> Result<MultichannelSignal> {
    let mut reader = BufReader::new(input);
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let header = String::from_utf8(header)
        .map_err(|_| Error::Format("raw header is not valid UTF-8".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&RAW_MAGIC) {
        return Err(Error::Format(format!("missing `{RAW_MAGIC}` magic")));
    }
    let parse = |key: &str| -> Result<u64> {
        header_field(&fields, key)?
            .parse()
            .map_err(|_| Error::Format(format!("raw header field `{key}` is not an integer")))
    };
    let order = parse("order")? as usize;
    let samples = parse("samples")? as usize;
    let sample_rate = u32::try_from(parse("rate")?)
        .map_err(|_| Error::Format("sample rate out of range".into()))?;
    let channels = channel_count(order);
    let count = channels
        .checked_mul(samples)
        .ok_or_else(|| Error::Format("raw header dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "raw payload has {} bytes, header promises {}",
            bytes.len(),
            count * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    Ok(MultichannelSignal {
        channels,
        samples,
        sample_rate,
        data,
    })
}

fn wav_error(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::Format(other.to_string()),
    }
}

pub fn write_wav<W: Write + std::io::Seek>(
    block: &ShSignalBlock,
    sample_rate: u32,
    out: W,
) -> Result<()> {
    let channels = u16::try_from(block.channels())
        .map_err(|_| Error::InvalidInput("too many channels for WAV".into()))?;
    let spec = hound::WavSpec {
        channels,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::new(out, spec).map_err(wav_error)?;
    for t in 0..block.samples() {
        for ch in 0..block.channels() {
            writer
                .write_sample(block.channel(ch)[t] as f32)
                .map_err(wav_error)?;
        }
    }
    writer.finalize().map_err(wav_error)
}

pub fn read_wav<R: Read>(input: R) -> Result<MultichannelSignal> {
    let mut reader = hound::WavReader::new(input).map_err(wav_error)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("WAV file declares zero channels".into()));
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_error)?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_error)?
        }
    };
    let samples = interleaved.len() / channels;
    let mut data = vec![0.0; channels * samples];
    for (t, frame) in interleaved.chunks_exact(channels).enumerate() {
        for (ch, v) in frame.iter().enumerate() {
            data[ch * samples + t] = *v;
        }
    }
    Ok(MultichannelSignal {
        channels,
        samples,
        sample_rate: spec.sample_rate,
        data,
    })
}

/// Reads a raw or WAV file, detected from its leading bytes.
pub fn read_signal_file(path: &Path) -> Result<MultichannelSignal> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 4];
    let n = file.read(&mut magic)?;
    let file = File::open(path)?;
    if n == 4 && &magic == b"RIFF" {
        read_wav(BufReader::new(file))
    } else if n == 4 && RAW_MAGIC.as_bytes().starts_with(&magic) {
        read_raw(file)
    } else {
        Err(Error::Format(format!(
            "{}: neither a WAV nor a raw SH signal file",
            path.display()
        )))
    }
}

/// Writes `block` to `path` in `format`, atomically.
pub fn write_signal_file(
    block: &ShSignalBlock,
    sample_rate: u32,
    format: SignalFormat,
    path: &Path,
) -> Result<()> {
    write_atomic(path, |w| match format {
        SignalFormat::Raw => write_raw(block, sample_rate, w),
        SignalFormat::Wav => {
            // hound needs Seek; stage in memory
            let mut buf = std::io::Cursor::new(Vec::new());
            write_wav(block, sample_rate, &mut buf)?;
            w.write_all(buf.get_ref())?;
            Ok(())
        }
    })
}

/// Sidecar describing a synthesized block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockMetadata {
    pub format: SignalFormat,
    pub order: usize,
    pub channels: usize,
    pub samples: usize,
    pub sample_rate: u32,
    pub seed: u64,
    pub beta: f64,
    pub noise_power: f64,
    pub channel_order: &'static str,
    pub normalization: &'static str,
    pub generator: &'static str,
}
