//! MNIST-style IDX container parsing and writing.
//!
//! Big-endian headers: images carry magic `0x00000803` followed by count,
//! rows and cols, labels carry magic `0x00000801` followed by count; the
//! payload is raw unsigned bytes in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// A labeled image set. Pixels are raw intensities, one byte each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Input neurons per image.
    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }
}

fn read_u32_be(reader: &mut impl Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(reader, &mut buf, path)?;
    Ok(u32::from_be_bytes(buf))
}

fn read_exact(reader: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    reader.read_exact(buf).map_err(|err| {
        if err.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::IdxTruncated {
                path: path.display().to_string(),
            }
        } else {
            Error::Io(err)
        }
    })
}

/// Load an image/label file pair and validate that the counts agree.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let mut reader = BufReader::new(File::open(images_path)?);
    let magic = read_u32_be(&mut reader, images_path)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::IdxBadMagic {
            path: images_path.display().to_string(),
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(&mut reader, images_path)? as usize;
    let rows = read_u32_be(&mut reader, images_path)? as usize;
    let cols = read_u32_be(&mut reader, images_path)? as usize;
    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        let mut pixels = vec![0u8; rows * cols];
        read_exact(&mut reader, &mut pixels, images_path)?;
        images.push(pixels);
    }

    let mut reader = BufReader::new(File::open(labels_path)?);
    let magic = read_u32_be(&mut reader, labels_path)?;
    if magic != LABEL_MAGIC {
        return Err(Error::IdxBadMagic {
            path: labels_path.display().to_string(),
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let label_count = read_u32_be(&mut reader, labels_path)? as usize;
    if label_count != count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }
    let mut labels = vec![0u8; label_count];
    read_exact(&mut reader, &mut labels, labels_path)?;
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::Input(format!(
            "label {bad} out of range 0-9 in {}",
            labels_path.display()
        )));
    }

    Ok(Dataset {
        rows,
        cols,
        images,
        labels,
    })
}

/// Write a dataset back out as an IDX image/label file pair.
pub fn write_idx(dataset: &Dataset, images_path: &Path, labels_path: &Path) -> Result<()> {
    let mut writer = BufWriter::new(File::create(images_path)?);
    writer.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    writer.write_all(&(dataset.len() as u32).to_be_bytes())?;
    writer.write_all(&(dataset.rows as u32).to_be_bytes())?;
    writer.write_all(&(dataset.cols as u32).to_be_bytes())?;
    for image in &dataset.images {
        writer.write_all(image)?;
    }
    writer.flush()?;

    let mut writer = BufWriter::new(File::create(labels_path)?);
    writer.write_all(&LABEL_MAGIC.to_be_bytes())?;
    writer.write_all(&(dataset.labels.len() as u32).to_be_bytes())?;
    writer.write_all(&dataset.labels)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Dataset {
        Dataset {
            rows: 4,
            cols: 3,
            images: vec![
                (0..12).collect(),
                (100..112).collect(),
            ],
            labels: vec![7, 2],
        }
    }

    #[test]
    fn single_image_header_parses() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img");
        let labels = dir.path().join("lab");

        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.extend_from_slice(&28u32.to_be_bytes());
        bytes.extend_from_slice(&28u32.to_be_bytes());
        bytes.extend_from_slice(&[9u8; 784]);
        std::fs::write(&images, &bytes).unwrap();

        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0x0000_0801u32.to_be_bytes());
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.push(3);
        std::fs::write(&labels, &bytes).unwrap();

        let dataset = load_idx(&images, &labels).unwrap();
        assert_eq!(dataset.len(), 1);
        assert_eq!((dataset.rows, dataset.cols), (28, 28));
        assert_eq!(dataset.labels, vec![3]);
    }

    #[test]
    fn wrong_magic_in_label_slot_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img");
        let labels = dir.path().join("lab");
        write_idx(&fixture(), &images, &labels).unwrap();

        // Image magic where the label magic belongs.
        let err = load_idx(&images, &images).unwrap_err();
        match err {
            Error::IdxBadMagic {
                expected, found, ..
            } => {
                assert_eq!(expected, LABEL_MAGIC);
                assert_eq!(found, IMAGE_MAGIC);
            }
            other => panic!("expected bad magic, got {other}"),
        }
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img");
        let labels = dir.path().join("lab");
        write_idx(&fixture(), &images, &labels).unwrap();

        let bytes = std::fs::read(&images).unwrap();
        std::fs::write(&images, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(
            load_idx(&images, &labels),
            Err(Error::IdxTruncated { .. })
        ));
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img");
        let labels = dir.path().join("lab");
        write_idx(&fixture(), &images, &labels).unwrap();

        let mut short = fixture();
        short.images.pop();
        let images2 = dir.path().join("img2");
        let labels_unused = dir.path().join("lab2");
        write_idx(&short, &images2, &labels_unused).unwrap();

        assert!(matches!(
            load_idx(&images2, &labels),
            Err(Error::IdxCountMismatch { images: 1, labels: 2 })
        ));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let images_a = dir.path().join("img_a");
        let labels_a = dir.path().join("lab_a");
        write_idx(&fixture(), &images_a, &labels_a).unwrap();

        let loaded = load_idx(&images_a, &labels_a).unwrap();
        assert_eq!(loaded, fixture());

        let images_b = dir.path().join("img_b");
        let labels_b = dir.path().join("lab_b");
        write_idx(&loaded, &images_b, &labels_b).unwrap();
        assert_eq!(
            std::fs::read(&images_a).unwrap(),
            std::fs::read(&images_b).unwrap()
        );
        assert_eq!(
            std::fs::read(&labels_a).unwrap(),
            std::fs::read(&labels_b).unwrap()
        );
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("img");
        let labels = dir.path().join("lab");
        let mut bad = fixture();
        bad.labels[1] = 11;
        write_idx(&bad, &images, &labels).unwrap();
        assert!(matches!(load_idx(&images, &labels), Err(Error::Input(_))));
    }
}
