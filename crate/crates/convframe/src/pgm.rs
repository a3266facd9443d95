//! PGM (portable graymap) reading and writing.
//!
//! Supports binary (`P5`) and ASCII (`P2`) inputs with `maxval ≤ 255`;
//! output is always binary. Pixel values travel as `f64` in `[0,255]`
//! elsewhere in the crate, so saving clamps to that range and rounds ties
//! to even — an in-range 8-bit image round-trips byte-exactly.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{Signal, SignalShape};

fn pgm_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Pgm {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Header tokenizer: yields whitespace-separated tokens, skipping `#`
/// comments that run to end of line, and reports the byte offset just past
/// the single whitespace character that terminated the last token returned.
struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(data: &'a [u8]) -> Self {
        Tokens { data, pos: 0 }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.data.len() && self.data[self.pos] == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.data.len()
            && !self.data[self.pos].is_ascii_whitespace()
            && self.data[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Some(&self.data[start..self.pos])
    }

    /// Consumes exactly one whitespace byte (the raster separator after the
    /// maxval token in binary files).
    fn skip_single_whitespace(&mut self) -> bool {
        if self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

fn parse_usize(token: &[u8], path: &Path, what: &str) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| pgm_err(path, format!("malformed {what}")))
}

/// Loads a `P5` or `P2` graymap as a 2-D signal with values in `[0,255]`.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| pgm_err(path, e.to_string()))?;
    let mut toks = Tokens::new(&data);
    let magic = toks
        .next_token()
        .ok_or_else(|| pgm_err(path, "missing magic number"))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(pgm_err(path, "not a P5/P2 graymap")),
    };
    let w = parse_usize(
        toks.next_token()
            .ok_or_else(|| pgm_err(path, "missing width"))?,
        path,
        "width",
    )?;
    let h = parse_usize(
        toks.next_token()
            .ok_or_else(|| pgm_err(path, "missing height"))?,
        path,
        "height",
    )?;
    let maxval = parse_usize(
        toks.next_token()
            .ok_or_else(|| pgm_err(path, "missing maxval"))?,
        path,
        "maxval",
    )?;
    if w == 0 || h == 0 {
        return Err(pgm_err(path, "zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(pgm_err(path, format!("unsupported maxval {maxval}")));
    }
    let n = w * h;
    let values = if binary {
        if !toks.skip_single_whitespace() {
            return Err(pgm_err(path, "missing raster separator"));
        }
        let raster = &data[toks.pos..];
        if raster.len() < n {
            return Err(pgm_err(
                path,
                format!("truncated raster: {} of {n} bytes", raster.len()),
            ));
        }
        raster[..n].iter().map(|&b| b as f64).collect::<Vec<f64>>()
    } else {
        let mut vals = Vec::with_capacity(n);
        for _ in 0..n {
            let tok = toks
                .next_token()
                .ok_or_else(|| pgm_err(path, format!("truncated raster: {} of {n} values", vals.len())))?;
            let v = parse_usize(tok, path, "pixel value")?;
            if v > maxval {
                return Err(pgm_err(path, format!("pixel value {v} exceeds maxval {maxval}")));
            }
            vals.push(v as f64);
        }
        vals
    };
    Signal::from_flat(values, SignalShape::TwoD { h, w })
}

/// Quantizes to the 8-bit range: clamp to `[0,255]`, round ties to even.
fn quantize(v: f64) -> u8 {
    let clamped = v.clamp(0.0, 255.0);
    clamped.round_ties_even() as u8
}

/// Saves a 2-D signal as a binary (`P5`) graymap with maxval 255.
/// Out-of-range values are clamped; fractional values round ties-to-even.
pub fn save_pgm(path: impl AsRef<Path>, signal: &Signal) -> Result<()> {
    let path = path.as_ref();
    let SignalShape::TwoD { h, w } = signal.shape() else {
        return Err(Error::InvalidParameter(
            "only 2-D signals can be saved as graymaps".into(),
        ));
    };
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(signal.values().iter().map(|&v| quantize(v)));
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn random_image(h: usize, w: usize, seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Signal::from_flat(
            (0..h * w).map(|_| rng.random_range(0..=255u8) as f64).collect(),
            SignalShape::TwoD { h, w },
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_byte_exact() {
        let dir = tempfile::tempdir().unwrap();
        let img = random_image(7, 11, 1);
        let p1 = dir.path().join("a.pgm");
        let p2 = dir.path().join("b.pgm");
        save_pgm(&p1, &img).unwrap();
        let loaded = load_pgm(&p1).unwrap();
        assert_eq!(loaded.shape(), img.shape());
        assert_eq!(loaded.values(), img.values());
        save_pgm(&p2, &loaded).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn ascii_with_comments_matches_binary() {
        let dir = tempfile::tempdir().unwrap();
        let values = [3u8, 0, 255, 17, 128, 64];
        let ascii = dir.path().join("c.pgm");
        let mut file = fs::File::create(&ascii).unwrap();
        write!(
            file,
            "P2 # comment after magic\n# full-line comment\n  3\t2\n255\n 3 0 255\n17 128 64\n"
        )
        .unwrap();
        drop(file);
        let binary = dir.path().join("d.pgm");
        let img = Signal::from_flat(
            values.iter().map(|&v| v as f64).collect(),
            SignalShape::TwoD { h: 2, w: 3 },
        )
        .unwrap();
        save_pgm(&binary, &img).unwrap();
        let a = load_pgm(&ascii).unwrap();
        let b = load_pgm(&binary).unwrap();
        assert_eq!(a.shape(), b.shape());
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn clamping_and_tie_rounding() {
        assert_eq!(quantize(255.7), 255);
        assert_eq!(quantize(-3.2), 0);
        assert_eq!(quantize(300.0), 255);
        assert_eq!(quantize(127.5), 128); // ties to even
        assert_eq!(quantize(126.5), 126);
        assert_eq!(quantize(64.4), 64);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write_file = |name: &str, bytes: &[u8]| {
            let p = dir.path().join(name);
            fs::write(&p, bytes).unwrap();
            p
        };
        // wrong magic
        let p = write_file("e.pgm", b"P4\n2 2\n255\n\x00\x01\x02\x03");
        assert!(load_pgm(&p).is_err());
        // maxval too large
        let p = write_file("f.pgm", b"P5\n2 2\n65535\n\x00\x01\x02\x03");
        assert!(load_pgm(&p).is_err());
        // truncated binary raster
        let p = write_file("g.pgm", b"P5\n2 2\n255\n\x00\x01\x02");
        assert!(load_pgm(&p).is_err());
        // truncated ascii raster
        let p = write_file("h.pgm", b"P2\n2 2\n255\n0 1 2");
        assert!(load_pgm(&p).is_err());
        // ascii value beyond maxval
        let p = write_file("i.pgm", b"P2\n2 2\n100\n0 1 2 101");
        assert!(load_pgm(&p).is_err());
    }

    #[test]
    fn one_dimensional_signals_are_rejected_on_save() {
        let dir = tempfile::tempdir().unwrap();
        let sig = Signal::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(save_pgm(dir.path().join("x.pgm"), &sig).is_err());
    }
}
