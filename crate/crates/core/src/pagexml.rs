//! Minimal PAGE XML support: text line polygons only.
//!
//! Reading collects the `Coords` of every `TextLine` (both the `points`
//! attribute and legacy `Point` children). Everything else in the document
//! is ignored. Writing emits one `TextLine` per ring; rings of the same line
//! share a `custom="line:N"` tag so they can be grouped again on reading.

use std::fmt::Write as _;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::geometry::Ring;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageLine {
    pub id: String,
    /// Line group; several rings may belong to the same text line.
    pub line: u32,
    pub ring: Ring,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PageLines {
    /// Page size when the document declares it.
    pub image_size: Option<(u32, u32)>,
    pub lines: Vec<PageLine>,
}

impl PageLines {
    pub fn rings(&self) -> Vec<Ring> {
        self.lines.iter().map(|l| l.ring.clone()).collect()
    }

    /// Rings grouped by line, in order of first appearance.
    pub fn grouped(&self) -> Vec<(u32, Vec<Ring>)> {
        let mut out: Vec<(u32, Vec<Ring>)> = Vec::new();
        for l in &self.lines {
            match out.iter_mut().find(|(id, _)| *id == l.line) {
                Some((_, rings)) => rings.push(l.ring.clone()),
                None => out.push((l.line, vec![l.ring.clone()])),
            }
        }
        out
    }
}

fn attr(e: &BytesStart, name: &[u8]) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| Error::PageXml(err.to_string()))?;
        if a.key.local_name().as_ref() == name {
            let v = a
                .unescape_value()
                .map_err(|err| Error::PageXml(err.to_string()))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn parse_number(s: &str) -> Result<i64> {
    s.trim()
        .parse::<f64>()
        .map(|v| v.round() as i64)
        .map_err(|_| Error::PageXml(format!("bad coordinate {s:?}")))
}

fn parse_points(s: &str) -> Result<Vec<(i64, i64)>> {
    s.split_whitespace()
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| Error::PageXml(format!("bad point {pair:?}")))?;
            Ok((parse_number(x)?, parse_number(y)?))
        })
        .collect()
}

fn line_tag(custom: Option<&str>) -> Option<u32> {
    custom?
        .split(';')
        .filter_map(|kv| kv.trim().strip_prefix("line:"))
        .find_map(|v| v.trim().parse().ok())
}

/// (id, custom group, points) of the TextLine being read.
type OpenLine = (String, Option<u32>, Vec<(i64, i64)>);

pub fn parse_page_xml(xml: &str) -> Result<PageLines> {
    let mut reader = Reader::from_str(xml);
    let mut out = PageLines::default();
    let mut current: Option<OpenLine> = None;
    let mut in_coords = false;
    let mut depth_in_line = 0usize;
    let mut next_group = 1u32;
    let mut used_groups = std::collections::BTreeSet::new();

    let mut finish = |cur: (String, Option<u32>, Vec<(i64, i64)>), out: &mut PageLines| {
        let (id, group, points) = cur;
        let line = match group {
            Some(g) => g,
            None => {
                while used_groups.contains(&next_group) {
                    next_group += 1;
                }
                next_group
            }
        };
        used_groups.insert(line);
        out.lines.push(PageLine {
            id,
            line,
            ring: Ring::new(points),
        });
    };

    loop {
        let event = reader
            .read_event()
            .map_err(|e| Error::PageXml(e.to_string()))?;
        let (start, empty) = match &event {
            Event::Start(e) => (Some(e), false),
            Event::Empty(e) => (Some(e), true),
            _ => (None, false),
        };
        if let Some(e) = start {
            let name = e.local_name();
            match name.as_ref() {
                b"Page" => {
                    let w = attr(e, b"imageWidth")?.and_then(|v| v.parse().ok());
                    let h = attr(e, b"imageHeight")?.and_then(|v| v.parse().ok());
                    if let (Some(w), Some(h)) = (w, h) {
                        out.image_size = Some((w, h));
                    }
                }
                b"TextLine" if current.is_none() => {
                    let id =
                        attr(e, b"id")?.unwrap_or_else(|| format!("line_{}", out.lines.len() + 1));
                    let group = line_tag(attr(e, b"custom")?.as_deref());
                    current = Some((id, group, Vec::new()));
                    depth_in_line = 0;
                    if empty {
                        finish(current.take().unwrap(), &mut out);
                        continue;
                    }
                }
                b"Coords" if current.is_some() && depth_in_line == 0 => {
                    if let Some(points) = attr(e, b"points")? {
                        current.as_mut().unwrap().2 = parse_points(&points)?;
                    }
                    in_coords = !empty;
                }
                b"Point" if in_coords => {
                    let x =
                        attr(e, b"x")?.ok_or_else(|| Error::PageXml("Point without x".into()))?;
                    let y =
                        attr(e, b"y")?.ok_or_else(|| Error::PageXml("Point without y".into()))?;
                    current
                        .as_mut()
                        .unwrap()
                        .2
                        .push((parse_number(&x)?, parse_number(&y)?));
                }
                _ => {}
            }
            if !empty && current.is_some() && name.as_ref() != b"TextLine" {
                depth_in_line += (name.as_ref() != b"Coords") as usize;
            }
        }
        match event {
            Event::End(e) => match e.local_name().as_ref() {
                b"TextLine" if current.is_some() => finish(current.take().unwrap(), &mut out),
                b"Coords" => in_coords = false,
                _ if current.is_some() && depth_in_line > 0 => depth_in_line -= 1,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

pub fn read_page_xml(path: impl AsRef<Path>) -> Result<PageLines> {
    let path = path.as_ref();
    let xml = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    parse_page_xml(&xml)
}

/// Serializes rings per line; `lines` pairs a line id with its rings.
pub fn to_page_xml(image_name: &str, size: (u32, u32), lines: &[(u32, Vec<Ring>)]) -> String {
    let esc = |s: &str| quick_xml::escape::escape(s).into_owned();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<PcGts xmlns="http://schema.primaresearch.org/PAGE/gts/pagecontent/2013-07-15">"#
    );
    let _ = writeln!(
        s,
        r#"  <Page imageFilename="{}" imageWidth="{}" imageHeight="{}">"#,
        esc(image_name),
        size.0,
        size.1
    );
    let _ = writeln!(s, r#"    <TextRegion id="region_1">"#);
    let _ = writeln!(
        s,
        r#"      <Coords points="0,0 {w},0 {w},{h} 0,{h}"/>"#,
        w = size.0,
        h = size.1
    );
    for (line, rings) in lines {
        for (i, ring) in rings.iter().enumerate() {
            let id = if i == 0 {
                format!("line_{line}")
            } else {
                format!("line_{line}_{}", i + 1)
            };
            let points: Vec<String> = ring
                .points
                .iter()
                .map(|(x, y)| format!("{x},{y}"))
                .collect();
            let _ = writeln!(s, r#"      <TextLine id="{id}" custom="line:{line}">"#);
            let _ = writeln!(s, r#"        <Coords points="{}"/>"#, points.join(" "));
            let _ = writeln!(s, r#"      </TextLine>"#);
        }
    }
    let _ = writeln!(s, r#"    </TextRegion>"#);
    let _ = writeln!(s, r#"  </Page>"#);
    let _ = writeln!(s, r#"</PcGts>"#);
    s
}

pub fn write_page_xml(
    path: impl AsRef<Path>,
    image_name: &str,
    size: (u32, u32),
    lines: &[(u32, Vec<Ring>)],
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_page_xml(image_name, size, lines)).map_err(|e| Error::write(path, e))
}
