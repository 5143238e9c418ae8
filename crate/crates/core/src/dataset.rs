//! Bit-exact container for per-window training samples.
//!
//! Each decoded window becomes one record: its kind, its ground-truth label,
//! and a fixed-size detector tensor of 2b+c layers of the (d+1) x (d+1)
//! plaquette grid. Layer slot t of a window holds detector layer
//! core_lo - b + t; slots falling outside the experiment (before layer 0 or
//! after layer N) stay all-zero, so every record has the same shape
//! regardless of where its window sits. Both detector bases are embedded in
//! the grid; positions without a detector at some layer stay zero.
//!
//! File layout: ASCII magic "SWQD", then version, d, b, c and sample count
//! as little-endian u32, then the records back to back. A record is one
//! kind byte, one label byte, then the tensor bits packed layer-major,
//! row-major, column-fastest, least significant bit first, zero-padded to a
//! byte boundary.

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::experiment::Pipeline;
use crate::frame::DetectorIndexing;
use crate::window::{derive_labels, plan_windows, WindowKind, WindowSpec};
use std::io::{Read, Write};

pub const DATASET_MAGIC: [u8; 4] = *b"SWQD";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub version: u32,
    pub d: u32,
    pub b: u32,
    pub c: u32,
    pub sample_count: u32,
}

impl DatasetHeader {
    pub fn tensor_bits(&self) -> usize {
        tensor_bits(self.d as usize, self.b as usize, self.c as usize)
    }

    /// On-disk bytes of one record.
    pub fn record_bytes(&self) -> usize {
        2 + self.tensor_bits().div_ceil(8)
    }
}

/// Bits in one record's tensor: (b + c + b) layers of the plaquette grid.
pub fn tensor_bits(d: usize, b: usize, c: usize) -> usize {
    (2 * b + c) * (d + 1) * (d + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSampleRecord {
    pub kind: WindowKind,
    pub label: bool,
    pub tensor: BitVec,
}

/// Detector tensor of one window of one shot.
///
/// `detectors` is the shot's full fired-detector bitvec in indexing order.
pub fn window_tensor(
    indexing: &DetectorIndexing,
    detectors: &BitVec,
    spec: &WindowSpec,
    buffer: usize,
    core: usize,
) -> BitVec {
    let d = indexing.d;
    let side = d + 1;
    let grid = side * side;
    let slots = 2 * buffer + core;
    let mut tensor = BitVec::zeros(slots * grid);
    for slot in 0..slots {
        let layer = spec.core_lo as isize - buffer as isize + slot as isize;
        if layer < 0 || layer > indexing.rounds as isize {
            continue;
        }
        let layer = layer as usize;
        let mut mark = |det: usize| {
            if detectors.get(det) {
                let (pr, pc) = indexing.grid_pos_of(det);
                tensor.set(slot * grid + pr * side + pc, true);
            }
        };
        for s in 0..indexing.n_z {
            mark(indexing.z_detector(s, layer));
        }
        // X detectors only exist strictly between measurement rounds.
        if (1..indexing.rounds).contains(&layer) {
            for s in 0..indexing.n_x {
                mark(indexing.x_detector(s, layer));
            }
        }
    }
    tensor
}

fn encode_record(rec: &WindowSampleRecord, bits: usize, out: &mut Vec<u8>) {
    debug_assert_eq!(rec.tensor.len(), bits);
    out.push(rec.kind.code());
    out.push(rec.label as u8);
    let start = out.len();
    out.resize(start + bits.div_ceil(8), 0);
    for i in rec.tensor.ones() {
        let i = i as usize;
        out[start + i / 8] |= 1 << (i % 8);
    }
}

fn write_header<W: Write>(out: &mut W, header: &DatasetHeader) -> Result<()> {
    out.write_all(&DATASET_MAGIC)?;
    for v in [
        header.version,
        header.d,
        header.b,
        header.c,
        header.sample_count,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Write a dataset from pre-built records.
pub fn write_dataset<W: Write>(
    mut out: W,
    d: usize,
    b: usize,
    c: usize,
    records: &[WindowSampleRecord],
) -> Result<()> {
    let header = DatasetHeader {
        version: DATASET_VERSION,
        d: d as u32,
        b: b as u32,
        c: c as u32,
        sample_count: records.len() as u32,
    };
    write_header(&mut out, &header)?;
    let bits = header.tensor_bits();
    let mut buf = Vec::with_capacity(header.record_bytes());
    for rec in records {
        buf.clear();
        encode_record(rec, bits, &mut buf);
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Sample `shots` shots and export every window of every shot, in shot
/// order, so the window kinds come out interleaved.
///
/// Needs `buffer >= 1`: the final window's top slot is layer N + b - 1, so
/// with no buffer the final data-readout layer would fall outside every
/// record and the dataset would lose the defects that decide final-window
/// labels.
pub fn export_windows<W: Write>(
    mut out: W,
    pipe: &Pipeline,
    buffer: usize,
    core: usize,
    shots: u64,
    seed: u64,
) -> Result<u32> {
    if buffer == 0 {
        return Err(Error::invalid(
            "dataset export needs buffer >= 1 to cover the final readout layer",
        ));
    }
    let rounds = pipe.graph.rounds;
    let specs = plan_windows(rounds, core, buffer)?;
    let m = specs.len();
    let sample_count = shots
        .checked_mul(m as u64)
        .filter(|&n| n <= u32::MAX as u64)
        .ok_or_else(|| Error::invalid("sample count exceeds the u32 header field"))?
        as u32;

    let header = DatasetHeader {
        version: DATASET_VERSION,
        d: pipe.layout.d as u32,
        b: buffer as u32,
        c: core as u32,
        sample_count,
    };
    write_header(&mut out, &header)?;

    let bits = header.tensor_bits();
    let sampler = pipe.sampler(seed);
    let mut buf = Vec::with_capacity(header.record_bytes());
    for s in 0..shots {
        let sample = sampler.sample(s);
        let labels = derive_labels(&pipe.graph, &pipe.dem, &sample.triggered, m, core);
        for (spec, &label) in specs.iter().zip(&labels) {
            let rec = WindowSampleRecord {
                kind: spec.kind,
                label,
                tensor: window_tensor(&pipe.indexing, &sample.detectors, spec, buffer, core),
            };
            buf.clear();
            encode_record(&rec, bits, &mut buf);
            out.write_all(&buf)?;
        }
    }
    Ok(sample_count)
}

/// Streaming dataset reader; validates the header eagerly and record
/// boundaries as it goes.
pub struct DatasetReader<R> {
    pub header: DatasetHeader,
    input: R,
    remaining: u32,
}

impl<R: Read> DatasetReader<R> {
    pub fn open(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::Format("file too short for the dataset magic".into()))?;
        if magic != DATASET_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {magic:?}, expected {DATASET_MAGIC:?}"
            )));
        }
        let mut word = [0u8; 4];
        let mut next = || -> Result<u32> {
            input
                .read_exact(&mut word)
                .map_err(|_| Error::Format("truncated dataset header".into()))?;
            Ok(u32::from_le_bytes(word))
        };
        let version = next()?;
        if version != DATASET_VERSION {
            return Err(Error::Format(format!(
                "unsupported dataset version {version}"
            )));
        }
        let header = DatasetHeader {
            version,
            d: next()?,
            b: next()?,
            c: next()?,
            sample_count: next()?,
        };
        Ok(DatasetReader {
            remaining: header.sample_count,
            header,
            input,
        })
    }

    fn read_record(&mut self) -> Result<WindowSampleRecord> {
        let mut buf = vec![0u8; self.header.record_bytes()];
        self.input
            .read_exact(&mut buf)
            .map_err(|_| Error::Format("dataset body shorter than sample_count".into()))?;
        let kind = WindowKind::from_code(buf[0])
            .ok_or_else(|| Error::Format(format!("bad window kind byte {}", buf[0])))?;
        let label = match buf[1] {
            0 => false,
            1 => true,
            other => return Err(Error::Format(format!("bad label byte {other}"))),
        };
        let bits = self.header.tensor_bits();
        let mut tensor = BitVec::zeros(bits);
        for i in 0..bits {
            if buf[2 + i / 8] >> (i % 8) & 1 == 1 {
                tensor.set(i, true);
            }
        }
        Ok(WindowSampleRecord {
            kind,
            label,
            tensor,
        })
    }

    /// Remaining record count declared by the header.
    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    /// Read everything and require the body to end exactly on the declared
    /// sample count.
    pub fn read_all(mut self) -> Result<Vec<WindowSampleRecord>> {
        let mut records = Vec::with_capacity(self.remaining as usize);
        for rec in &mut self {
            records.push(rec?);
        }
        let mut probe = [0u8; 1];
        match self.input.read(&mut probe)? {
            0 => Ok(records),
            _ => Err(Error::Format(
                "dataset body longer than sample_count".into(),
            )),
        }
    }
}

impl<R: Read> Iterator for DatasetReader<R> {
    type Item = Result<WindowSampleRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.read_record())
    }
}

/// Open, validate and fully read a dataset.
pub fn read_dataset<R: Read>(input: R) -> Result<(DatasetHeader, Vec<WindowSampleRecord>)> {
    let reader = DatasetReader::open(input)?;
    let header = reader.header;
    Ok((header, reader.read_all()?))
}
