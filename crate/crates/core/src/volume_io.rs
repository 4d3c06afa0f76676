//! Volume files: a `<name>.json` sidecar describing shape, dtype and (for
//! affinities) the offset pattern, next to a `<name>.raw` blob of
//! little-endian values, channels-first, C-order.
//!
//! Writing is deterministic, so write -> read -> write reproduces files
//! byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Polarity;
use crate::grid::{AffinityVolume, LabelVolume, OffsetEntry, OffsetPattern};

pub const AFFINITY_FORMAT: &str = "mws-affinity v1";
pub const LABEL_FORMAT: &str = "mws-labels v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternEntryJson {
    pub offset: [i64; 3],
    pub polarity: String,
    pub stride: [usize; 3],
}

impl PatternEntryJson {
    fn from_entry(e: &OffsetEntry) -> Self {
        PatternEntryJson {
            offset: e.offset,
            polarity: e.polarity.symbol().to_string(),
            stride: e.stride,
        }
    }

    fn to_entry(&self) -> Result<OffsetEntry> {
        let polarity = self
            .polarity
            .chars()
            .next()
            .and_then(Polarity::from_symbol)
            .filter(|_| self.polarity.len() == 1)
            .ok_or_else(|| {
                Error::Input(format!("pattern polarity must be \"+\" or \"-\", got {:?}", self.polarity))
            })?;
        Ok(OffsetEntry { offset: self.offset, polarity, stride: self.stride })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AffinitySidecar {
    format: String,
    shape: [usize; 3],
    channels: usize,
    dtype: String,
    order: String,
    pattern: Vec<PatternEntryJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelSidecar {
    format: String,
    shape: [usize; 3],
    channels: usize,
    dtype: String,
    order: String,
}

/// `<base>.json` / `<base>.raw` for a base path (any extension on `base` is
/// replaced).
fn sidecar_paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("json"), base.with_extension("raw"))
}

pub fn write_affinity_volume(
    base: &Path,
    vol: &AffinityVolume,
    pattern: &OffsetPattern,
) -> Result<()> {
    if vol.channels() != pattern.len() {
        return Err(Error::Input(format!(
            "volume has {} channels but the pattern has {} entries",
            vol.channels(),
            pattern.len()
        )));
    }
    let (json_path, raw_path) = sidecar_paths(base);
    let sidecar = AffinitySidecar {
        format: AFFINITY_FORMAT.to_string(),
        shape: vol.shape(),
        channels: vol.channels(),
        dtype: "f32".to_string(),
        order: "C".to_string(),
        pattern: pattern.entries().iter().map(PatternEntryJson::from_entry).collect(),
    };
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    fs::write(json_path, json)?;
    let mut bytes = Vec::with_capacity(vol.data().len() * 4);
    for v in vol.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(raw_path, bytes)?;
    Ok(())
}

pub fn read_affinity_volume(base: &Path) -> Result<(AffinityVolume, OffsetPattern)> {
    let (json_path, raw_path) = sidecar_paths(base);
    let sidecar: AffinitySidecar = serde_json::from_str(&fs::read_to_string(&json_path)?)?;
    if sidecar.format != AFFINITY_FORMAT {
        return Err(Error::Input(format!(
            "{}: expected format {AFFINITY_FORMAT:?}, found {:?}",
            json_path.display(),
            sidecar.format
        )));
    }
    if sidecar.dtype != "f32" || sidecar.order != "C" {
        return Err(Error::Input(format!(
            "{}: affinity volumes are f32 C-order, found dtype {:?} order {:?}",
            json_path.display(),
            sidecar.dtype,
            sidecar.order
        )));
    }
    if sidecar.channels != sidecar.pattern.len() {
        return Err(Error::Input(format!(
            "{}: {} channels but {} pattern entries",
            json_path.display(),
            sidecar.channels,
            sidecar.pattern.len()
        )));
    }
    let entries: Result<Vec<OffsetEntry>> =
        sidecar.pattern.iter().map(PatternEntryJson::to_entry).collect();
    let pattern = OffsetPattern::new(entries?)?;
    let bytes = fs::read(&raw_path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Input(format!(
            "{}: raw f32 file has {} bytes",
            raw_path.display(),
            bytes.len()
        )));
    }
    let data: Vec<f32> =
        bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let vol = AffinityVolume::new(sidecar.shape, sidecar.channels, data)?;
    Ok((vol, pattern))
}

pub fn write_label_volume(base: &Path, vol: &LabelVolume) -> Result<()> {
    let (json_path, raw_path) = sidecar_paths(base);
    let sidecar = LabelSidecar {
        format: LABEL_FORMAT.to_string(),
        shape: vol.shape(),
        channels: 1,
        dtype: "u32".to_string(),
        order: "C".to_string(),
    };
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    fs::write(json_path, json)?;
    let mut bytes = Vec::with_capacity(vol.labels().len() * 4);
    for v in vol.labels() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(raw_path, bytes)?;
    Ok(())
}

pub fn read_label_volume(base: &Path) -> Result<LabelVolume> {
    let (json_path, raw_path) = sidecar_paths(base);
    let sidecar: LabelSidecar = serde_json::from_str(&fs::read_to_string(&json_path)?)?;
    if sidecar.format != LABEL_FORMAT {
        return Err(Error::Input(format!(
            "{}: expected format {LABEL_FORMAT:?}, found {:?}",
            json_path.display(),
            sidecar.format
        )));
    }
    if sidecar.dtype != "u32" || sidecar.order != "C" || sidecar.channels != 1 {
        return Err(Error::Input(format!(
            "{}: label volumes are single-channel u32 C-order",
            json_path.display()
        )));
    }
    let bytes = fs::read(&raw_path)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Input(format!(
            "{}: raw u32 file has {} bytes",
            raw_path.display(),
            bytes.len()
        )));
    }
    let labels: Vec<u32> =
        bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    LabelVolume::new(sidecar.shape, labels)
}

/// Standalone pattern config: the JSON array of entries on its own.
pub fn pattern_to_json(pattern: &OffsetPattern) -> String {
    let entries: Vec<PatternEntryJson> =
        pattern.entries().iter().map(PatternEntryJson::from_entry).collect();
    let mut json = serde_json::to_string_pretty(&entries).expect("pattern serializes");
    json.push('\n');
    json
}

pub fn pattern_from_json(text: &str) -> Result<OffsetPattern> {
    let entries: Vec<PatternEntryJson> = serde_json::from_str(text)?;
    let entries: Result<Vec<OffsetEntry>> = entries.iter().map(PatternEntryJson::to_entry).collect();
    OffsetPattern::new(entries?)
}

pub fn read_pattern_file(path: &Path) -> Result<OffsetPattern> {
    pattern_from_json(&fs::read_to_string(path)?)
}

pub fn write_pattern_file(path: &Path, pattern: &OffsetPattern) -> Result<()> {
    fs::write(path, pattern_to_json(pattern))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::affinities_from_labels;

    #[test]
    fn affinity_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("vol");
        let labels = LabelVolume::new([1, 2, 3], vec![1, 1, 2, 1, 2, 2]).unwrap();
        let pattern = OffsetPattern::local_2d();
        let vol = affinities_from_labels(&labels, &pattern);

        write_affinity_volume(&base, &vol, &pattern).unwrap();
        let (vol2, pattern2) = read_affinity_volume(&base).unwrap();
        assert_eq!(vol, vol2);
        assert_eq!(pattern, pattern2);

        let json1 = fs::read(base.with_extension("json")).unwrap();
        let raw1 = fs::read(base.with_extension("raw")).unwrap();
        let base2 = dir.path().join("vol2");
        write_affinity_volume(&base2, &vol2, &pattern2).unwrap();
        assert_eq!(json1, fs::read(base2.with_extension("json")).unwrap());
        assert_eq!(raw1, fs::read(base2.with_extension("raw")).unwrap());
    }

    #[test]
    fn label_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("labels");
        let vol = LabelVolume::new([2, 2, 2], vec![0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        write_label_volume(&base, &vol).unwrap();
        let vol2 = read_label_volume(&base).unwrap();
        assert_eq!(vol, vol2);
        let base2 = dir.path().join("labels2");
        write_label_volume(&base2, &vol2).unwrap();
        assert_eq!(
            fs::read(base.with_extension("raw")).unwrap(),
            fs::read(base2.with_extension("raw")).unwrap()
        );
        assert_eq!(
            fs::read(base.with_extension("json")).unwrap(),
            fs::read(base2.with_extension("json")).unwrap()
        );
    }

    #[test]
    fn pattern_json_round_trips() {
        for pattern in [
            OffsetPattern::default_2d(),
            OffsetPattern::default_3d(),
            OffsetPattern::local_3d(),
        ] {
            let json = pattern_to_json(&pattern);
            assert_eq!(pattern_from_json(&json).unwrap(), pattern);
        }
    }

    #[test]
    fn malformed_sidecars_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("vol");
        fs::write(base.with_extension("json"), "{\"format\": \"nope\"}").unwrap();
        fs::write(base.with_extension("raw"), []).unwrap();
        assert!(read_affinity_volume(&base).is_err());
        assert!(pattern_from_json("[{\"offset\":[0,0,-1],\"polarity\":\"x\",\"stride\":[1,1,1]}]").is_err());
    }

    #[test]
    fn out_of_range_affinities_fail_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("vol");
        let pattern = OffsetPattern::new(vec![OffsetEntry::attractive([0, 0, -1])]).unwrap();
        let vol = AffinityVolume::new([1, 1, 2], 1, vec![0.5, 0.5]).unwrap();
        write_affinity_volume(&base, &vol, &pattern).unwrap();
        // Corrupt one value to 2.0.
        let mut raw = fs::read(base.with_extension("raw")).unwrap();
        raw[..4].copy_from_slice(&2.0f32.to_le_bytes());
        fs::write(base.with_extension("raw"), raw).unwrap();
        assert!(read_affinity_volume(&base).is_err());
    }
}
