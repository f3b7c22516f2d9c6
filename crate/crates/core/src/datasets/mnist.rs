//! MNIST in the IDX format: big-endian headers followed by raw bytes.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, WriteBytesExt};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const MNIST_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const MNIST_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn header(path: &Path, bytes: &[u8], words: usize, magic: u32) -> Result<Vec<usize>> {
    if bytes.len() < 4 * words {
        return Err(Error::format(
            path,
            format!("truncated header ({} bytes)", bytes.len()),
        ));
    }
    let found = BigEndian::read_u32(&bytes[..4]);
    if found != magic {
        return Err(Error::format(
            path,
            format!("bad magic 0x{found:08x}, expected 0x{magic:08x}"),
        ));
    }
    Ok((1..words)
        .map(|i| BigEndian::read_u32(&bytes[4 * i..4 * i + 4]) as usize)
        .collect())
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    let bytes = read_all(path)?;
    let dims = header(path, &bytes, 4, MNIST_IMAGES_MAGIC)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let expected = count * rows * cols;
    let body = &bytes[16..];
    if body.len() != expected {
        return Err(Error::format(
            path,
            format!("expected {expected} pixel bytes, found {}", body.len()),
        ));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: body.to_vec(),
    })
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_all(path)?;
    let dims = header(path, &bytes, 2, MNIST_LABELS_MAGIC)?;
    let body = &bytes[8..];
    if body.len() != dims[0] {
        return Err(Error::format(
            path,
            format!("expected {} labels, found {}", dims[0], body.len()),
        ));
    }
    Ok(body.to_vec())
}

pub fn write_idx_images(path: &Path, images: &IdxImages) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for v in [
        MNIST_IMAGES_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        w.write_u32::<BigEndian>(v).map_err(io)?;
    }
    w.write_all(&images.pixels).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_u32::<BigEndian>(MNIST_LABELS_MAGIC).map_err(io)?;
    w.write_u32::<BigEndian>(labels.len() as u32).map_err(io)?;
    w.write_all(labels).map_err(io)?;
    w.flush().map_err(io)
}

/// One image/label file pair, pixels scaled to [−1, +1] via `v/127.5 − 1`.
pub fn load_mnist_idx(image_path: &Path, label_path: &Path) -> Result<(Matrix, Vec<usize>)> {
    let images = read_idx_images(image_path)?;
    let labels = read_idx_labels(label_path)?;
    if images.count != labels.len() {
        return Err(Error::format(
            label_path,
            format!("{} labels for {} images", labels.len(), images.count),
        ));
    }
    if let Some(bad) = labels.iter().find(|&&y| y > 9) {
        return Err(Error::format(
            label_path,
            format!("label {bad} outside 0-9"),
        ));
    }
    if images.count == 0 {
        return Err(Error::format(image_path, "no images"));
    }
    let dim = images.rows * images.cols;
    let data = images
        .pixels
        .iter()
        .map(|&p| f64::from(p) / 127.5 - 1.0)
        .collect();
    let features = Matrix::new(images.count, dim, data)
        .map_err(|e| Error::format(image_path, e.to_string()))?;
    Ok((features, labels.into_iter().map(usize::from).collect()))
}

/// Train and test file pairs joined into one dataset; the test file becomes
/// the validation split.
pub fn load_mnist(
    train_images: &Path,
    train_labels: &Path,
    test_images: &Path,
    test_labels: &Path,
) -> Result<Dataset> {
    let (train_x, train_y) = load_mnist_idx(train_images, train_labels)?;
    let (test_x, test_y) = load_mnist_idx(test_images, test_labels)?;
    if train_x.cols() != test_x.cols() {
        return Err(Error::format(
            test_images,
            "image size differs from the train file",
        ));
    }
    let (n_train, n_test) = (train_x.rows(), test_x.rows());
    let n = n_train + n_test;
    let mut data = train_x.into_vec();
    data.extend(test_x.into_vec());
    Ok(Dataset {
        name: "mnist".into(),
        features: Matrix::new(n, data.len() / n, data)?,
        labels: train_y.into_iter().chain(test_y).collect(),
        sample_ids: (0..n).collect(),
        train: (0..n_train).collect(),
        validation: (n_train..n).collect(),
        num_classes: 10,
    })
}

/// Loads the four standard file names from `dir`.
pub fn load_mnist_dir(dir: &Path) -> Result<Dataset> {
    load_mnist(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
        &dir.join("t10k-images-idx3-ubyte"),
        &dir.join("t10k-labels-idx1-ubyte"),
    )
}
