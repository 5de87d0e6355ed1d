use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// An ordered partition of a cipher's symbol stream into cipher elements.
///
/// Optionally remembers how many segments fall on each output line so that a
/// multi-line gold file survives a parse/serialize round trip. A single line
/// is never stored as a line map, so equal segment lists on one line compare
/// equal regardless of how they were produced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Segmentation {
    segments: Vec<String>,
    line_lengths: Option<Vec<usize>>,
}

impl Segmentation {
    pub fn new(segments: Vec<String>) -> Result<Self> {
        if let Some(i) = segments.iter().position(|s| s.is_empty()) {
            return Err(Error::InvalidArgument(format!("segment {i} is empty")));
        }
        Ok(Self { segments, line_lengths: None })
    }

    /// Build from per-line segment lists.
    pub fn from_lines(lines: Vec<Vec<String>>) -> Result<Self> {
        let lengths: Vec<usize> = lines.iter().map(Vec::len).collect();
        let mut seg = Self::new(lines.into_iter().flatten().collect())?;
        if lengths.len() > 1 {
            seg.line_lengths = Some(lengths);
        }
        Ok(seg)
    }

    pub(crate) fn from_trusted(segments: Vec<String>) -> Self {
        debug_assert!(segments.iter().all(|s| !s.is_empty()));
        Self { segments, line_lengths: None }
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<String> {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn line_lengths(&self) -> Option<&[usize]> {
        self.line_lengths.as_deref()
    }

    /// Drop the line map, keeping only the segment sequence.
    pub fn flattened(&self) -> Segmentation {
        Segmentation { segments: self.segments.clone(), line_lengths: None }
    }

    pub fn join(&self) -> String {
        self.segments.concat()
    }

    /// Distinct segment strings.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        self.segments.iter().cloned().collect()
    }

    /// Segments grouped by output line.
    pub fn lines(&self) -> Vec<&[String]> {
        match &self.line_lengths {
            None => vec![&self.segments[..]],
            Some(lengths) => {
                let mut out = Vec::with_capacity(lengths.len());
                let mut start = 0;
                for &n in lengths {
                    out.push(&self.segments[start..start + n]);
                    start += n;
                }
                out
            }
        }
    }

    /// Checks the shared invariant that the segments concatenate to `flat`.
    pub fn validate(&self, flat: &str) -> Result<()> {
        let mut rest = flat;
        for (i, s) in self.segments.iter().enumerate() {
            match rest.strip_prefix(s.as_str()) {
                Some(r) => rest = r,
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "segment {i} ({s:?}) does not match the cipher at offset {}",
                        flat.len() - rest.len()
                    )))
                }
            }
        }
        if !rest.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "segmentation covers {} of {} bytes",
                flat.len() - rest.len(),
                flat.len()
            )));
        }
        Ok(())
    }

    /// Text form: space-joined segments, one line per stored line, each line
    /// terminated by a newline. The empty segmentation serializes to "".
    pub fn serialize(&self) -> String {
        if self.segments.is_empty() && self.line_lengths.is_none() {
            return String::new();
        }
        let mut out = String::new();
        for line in self.lines() {
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Cut points in symbol (char) offsets, including 0 and the total length.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut pos = 0;
        out.push(0);
        for s in &self.segments {
            pos += s.chars().count();
            out.push(pos);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(v: &[&str]) -> Segmentation {
        Segmentation::new(v.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn serializes_space_joined() {
        assert_eq!(seg(&["2", "22", "8"]).serialize(), "2 22 8\n");
        assert_eq!(seg(&[]).serialize(), "");
    }

    #[test]
    fn rejects_empty_segment() {
        assert!(Segmentation::new(vec!["2".into(), String::new()]).is_err());
    }

    #[test]
    fn validate_checks_concatenation() {
        let s = seg(&["25", "4", "22"]);
        assert!(s.validate("25422").is_ok());
        assert!(s.validate("254221").is_err());
        assert!(s.validate("2542").is_err());
    }

    #[test]
    fn single_line_map_is_normalized_away() {
        let a = Segmentation::from_lines(vec![vec!["1".into(), "23".into()]]).unwrap();
        assert_eq!(a, seg(&["1", "23"]));
        let b = Segmentation::from_lines(vec![vec!["1".into()], vec!["23".into()]]).unwrap();
        assert_ne!(a, b);
        assert_eq!(b.serialize(), "1\n23\n");
        assert_eq!(b.boundaries(), vec![0, 1, 3]);
    }
}
