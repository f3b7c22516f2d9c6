//! Binary dataset container; the layout is documented in `docs/dataset-cache.md`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const CACHE_MAGIC: &[u8; 8] = b"BNNIBDS1";

pub fn write_cache(ds: &Dataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(CACHE_MAGIC).map_err(io)?;
    w.write_u32::<LittleEndian>(ds.name.len() as u32)
        .map_err(io)?;
    w.write_all(ds.name.as_bytes()).map_err(io)?;
    for v in [ds.len(), ds.dim(), ds.num_classes] {
        w.write_u64::<LittleEndian>(v as u64).map_err(io)?;
    }
    for &v in ds.features.as_slice() {
        w.write_f64::<LittleEndian>(v).map_err(io)?;
    }
    for &y in &ds.labels {
        w.write_u32::<LittleEndian>(y as u32).map_err(io)?;
    }
    for &id in &ds.sample_ids {
        w.write_u64::<LittleEndian>(id as u64).map_err(io)?;
    }
    for list in [&ds.train, &ds.validation] {
        w.write_u64::<LittleEndian>(list.len() as u64).map_err(io)?;
        for &i in list {
            w.write_u64::<LittleEndian>(i as u64).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_cache(path: &Path) -> Result<Dataset> {
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let bad = |what: &str| Error::format(path, format!("truncated or corrupt cache ({what})"));

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("magic"))?;
    if &magic != CACHE_MAGIC {
        return Err(Error::format(path, "not a dataset cache (bad magic)"));
    }
    let name_len = r.read_u32::<LittleEndian>().map_err(|_| bad("name"))? as usize;
    let mut name = vec![0u8; name_len];
    r.read_exact(&mut name).map_err(|_| bad("name"))?;
    let name = String::from_utf8(name).map_err(|_| bad("name encoding"))?;
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = r.read_u64::<LittleEndian>().map_err(|_| bad("header"))? as usize;
    }
    let [n, d, c] = dims;
    let mut features = vec![0.0; n * d];
    r.read_f64_into::<LittleEndian>(&mut features)
        .map_err(|_| bad("features"))?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(r.read_u32::<LittleEndian>().map_err(|_| bad("labels"))? as usize);
    }
    let mut sample_ids = Vec::with_capacity(n);
    for _ in 0..n {
        sample_ids.push(
            r.read_u64::<LittleEndian>()
                .map_err(|_| bad("sample ids"))? as usize,
        );
    }
    let mut lists = [Vec::new(), Vec::new()];
    for list in &mut lists {
        let len = r.read_u64::<LittleEndian>().map_err(|_| bad("split"))? as usize;
        if len > n {
            return Err(bad("split length"));
        }
        for _ in 0..len {
            list.push(r.read_u64::<LittleEndian>().map_err(|_| bad("split"))? as usize);
        }
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
    if !rest.is_empty() {
        return Err(Error::format(
            path,
            format!("{} trailing bytes", rest.len()),
        ));
    }
    let [train, validation] = lists;
    let ds = Dataset {
        name,
        features: Matrix::new(n, d, features).map_err(|e| Error::format(path, e.to_string()))?,
        labels,
        sample_ids,
        train,
        validation,
        num_classes: c,
    };
    ds.validate()?;
    Ok(ds)
}
