//! The `MLT1` binary container.
//!
//! All integers are little-endian. Layout:
//!
//! ```text
//! magic "MLT1" | version u16 | codec u8 | bits u8
//! meshlet count u32 | source vertices u32 | source triangles u32
//! group count u16 | per group: semantic u8, components u8, name len u8, name
//! per channel: min f64, delta f64, meshlet extent f64, global extent f64, guard steps u32
//! section lengths: meta, flags, indices, constants, attributes, vertex map (u64 each)
//! sections in the same order
//! ```
//!
//! A meta record is 28 bytes: flag, index and attribute offsets (u32, relative
//! to their section) followed by the cull cone axis and half-angle (f32).
//! Per-meshlet sizes follow from consecutive offsets. The vertex map holds
//! the global vertex id of every local vertex and is only used for
//! verification.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::{words_for, FlagBits};
use crate::codec::{GtsReuseStream, GtsStream, StripStream};
use crate::error::{Error, Result};
use crate::mesh::{AttributeLayout, ChannelGroup, Semantic};
use crate::meshlet::CullCone;
use crate::quantize::{code_bytes, ChannelGrid, QuantizationGrid, QuantizedMeshlet};

pub const MAGIC: [u8; 4] = *b"MLT1";
pub const VERSION: u16 = 1;
pub const META_RECORD_BYTES: usize = 28;
pub const VERTEX_PIPELINE_BPT: f64 = 96.0;
pub const BASIC_MESHLET_BPT: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Codec {
    Basic,
    Gts,
    GtsReuse,
}

impl Codec {
    pub fn id(self) -> u8 {
        match self {
            Codec::Basic => 0,
            Codec::Gts => 1,
            Codec::GtsReuse => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Some(match id {
            0 => Codec::Basic,
            1 => Codec::Gts,
            2 => Codec::GtsReuse,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Codec::Basic => "basic",
            Codec::Gts => "gts",
            Codec::GtsReuse => "gts-reuse",
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Codec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "basic" => Ok(Codec::Basic),
            "gts" => Ok(Codec::Gts),
            "gts-reuse" => Ok(Codec::GtsReuse),
            _ => Err(format!(
                "unknown codec '{s}' (expected basic, gts or gts-reuse)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshletStream {
    /// Three 8-bit local indices per triangle.
    Basic(Vec<[u8; 3]>),
    Gts(GtsStream),
    GtsReuse(GtsReuseStream),
}

impl MeshletStream {
    pub fn codec(&self) -> Codec {
        match self {
            MeshletStream::Basic(_) => Codec::Basic,
            MeshletStream::Gts(_) => Codec::Gts,
            MeshletStream::GtsReuse(_) => Codec::GtsReuse,
        }
    }

    /// Triangles in the stream, degenerates included.
    pub fn triangle_count(&self) -> usize {
        match self {
            MeshletStream::Basic(t) => t.len(),
            MeshletStream::Gts(s) => s.triangle_count,
            MeshletStream::GtsReuse(s) => s.triangle_count,
        }
    }

    fn flag_words(&self) -> Vec<u32> {
        match self {
            MeshletStream::Basic(_) => Vec::new(),
            MeshletStream::Gts(s) => s.flags.words().to_vec(),
            MeshletStream::GtsReuse(s) => {
                let mut w = s.flags.words().to_vec();
                w.extend_from_slice(s.increments.words());
                w
            }
        }
    }

    fn index_bytes(&self) -> Vec<u8> {
        match self {
            MeshletStream::Basic(t) => t.iter().flatten().copied().collect(),
            MeshletStream::Gts(s) => s.indices.clone(),
            MeshletStream::GtsReuse(s) => s.reuse.clone(),
        }
    }

    /// Flag plus index bits as serialized.
    pub fn size_bits(&self) -> usize {
        8 * (4 * self.flag_words().len() + self.index_bytes().len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMeshlet {
    pub stream: MeshletStream,
    pub cone: CullCone,
    pub quantized: QuantizedMeshlet,
    /// Global vertex id per local vertex.
    pub vertex_map: Vec<u32>,
}

impl EncodedMeshlet {
    pub fn vertex_count(&self) -> usize {
        self.vertex_map.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshletContainer {
    pub codec: Codec,
    pub source_vertex_count: u32,
    pub source_triangle_count: u32,
    pub layout: AttributeLayout,
    pub grid: QuantizationGrid,
    pub meshlets: Vec<EncodedMeshlet>,
}

/// Byte counts of every part of a serialized container, and derived rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub codec: Codec,
    pub meshlets: usize,
    pub source_triangles: usize,
    pub source_vertices: usize,
    pub header_bytes: usize,
    pub meta_bytes: usize,
    pub flag_bytes: usize,
    pub index_bytes: usize,
    pub constant_bytes: usize,
    pub attribute_bytes: usize,
    pub vertex_map_bytes: usize,
    pub total_bytes: usize,
    /// Flag plus index bits per source triangle.
    pub index_bpt: f64,
    /// Meta record bits per source triangle.
    pub meta_bpt: f64,
    /// Attribute plus per-meshlet constant bits per source vertex.
    pub vertex_bpv: f64,
    pub vertex_pipeline_bpt: f64,
    pub basic_meshlet_bpt: f64,
}

#[derive(Default)]
struct Sections {
    meta: Vec<u8>,
    flags: Vec<u8>,
    indices: Vec<u8>,
    constants: Vec<u8>,
    attributes: Vec<u8>,
    vertex_map: Vec<u8>,
}

impl Sections {
    fn lengths(&self) -> [usize; 6] {
        [
            self.meta.len(),
            self.flags.len(),
            self.indices.len(),
            self.constants.len(),
            self.attributes.len(),
            self.vertex_map.len(),
        ]
    }
}

fn offset(len: usize, what: &str) -> Result<u32> {
    u32::try_from(len).map_err(|_| Error::Container(format!("{what} section exceeds 4 GiB")))
}

impl MeshletContainer {
    fn check(&self) -> Result<()> {
        let channels = self.layout.channel_count();
        if self.grid.channels.len() != channels {
            return Err(Error::Container(format!(
                "grid has {} channels, layout has {channels}",
                self.grid.channels.len()
            )));
        }
        for (i, m) in self.meshlets.iter().enumerate() {
            if m.stream.codec() != self.codec {
                return Err(Error::Container(format!(
                    "meshlet {i} uses codec {}",
                    m.stream.codec()
                )));
            }
            if m.quantized.offsets.len() != channels
                || m.quantized.codes.len() != channels * m.vertex_count()
            {
                return Err(Error::Container(format!(
                    "meshlet {i} attribute block does not match the layout"
                )));
            }
            if let Some(&c) = m
                .quantized
                .codes
                .iter()
                .find(|&&c| c as u64 > self.grid.max_code())
            {
                return Err(Error::Container(format!(
                    "meshlet {i} code {c} exceeds {} bits",
                    self.grid.bits
                )));
            }
        }
        Ok(())
    }

    fn sections(&self) -> Result<Sections> {
        self.check()?;
        let width = code_bytes(self.grid.bits);
        let mut s = Sections::default();
        for m in &self.meshlets {
            s.meta.extend(offset(s.flags.len(), "flag")?.to_le_bytes());
            s.meta
                .extend(offset(s.indices.len(), "index")?.to_le_bytes());
            s.meta
                .extend(offset(s.attributes.len(), "attribute")?.to_le_bytes());
            for a in m.cone.axis {
                s.meta.extend(a.to_le_bytes());
            }
            s.meta.extend(m.cone.half_angle.to_le_bytes());
            for w in m.stream.flag_words() {
                s.flags.extend(w.to_le_bytes());
            }
            s.indices.extend(m.stream.index_bytes());
            for l in &m.quantized.offsets {
                s.constants.extend(l.to_le_bytes());
            }
            for &c in &m.quantized.codes {
                s.attributes.extend_from_slice(&c.to_le_bytes()[..width]);
            }
            for v in &m.vertex_map {
                s.vertex_map.extend(v.to_le_bytes());
            }
        }
        Ok(s)
    }

    fn header(&self, lengths: [usize; 6]) -> Result<Vec<u8>> {
        let mut h = Vec::new();
        h.extend(MAGIC);
        h.extend(VERSION.to_le_bytes());
        h.push(self.codec.id());
        h.push(self.grid.bits);
        h.extend(offset(self.meshlets.len(), "meshlet")?.to_le_bytes());
        h.extend(self.source_vertex_count.to_le_bytes());
        h.extend(self.source_triangle_count.to_le_bytes());
        let groups = self.layout.groups();
        h.extend((groups.len() as u16).to_le_bytes());
        for g in groups {
            let name = g.name.as_bytes();
            if name.len() > u8::MAX as usize {
                return Err(Error::Container(format!(
                    "channel group name '{}' too long",
                    g.name
                )));
            }
            h.push(g.semantic.code());
            h.push(g.components);
            h.push(name.len() as u8);
            h.extend(name);
        }
        for c in &self.grid.channels {
            for x in [c.min, c.delta, c.max_meshlet_extent, c.global_extent] {
                h.extend(x.to_le_bytes());
            }
            h.extend(c.guard_steps.to_le_bytes());
        }
        for len in lengths {
            h.extend((len as u64).to_le_bytes());
        }
        Ok(h)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let s = self.sections()?;
        let mut out = self.header(s.lengths())?;
        for part in [
            &s.meta,
            &s.flags,
            &s.indices,
            &s.constants,
            &s.attributes,
            &s.vertex_map,
        ] {
            out.extend_from_slice(part);
        }
        Ok(out)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(Error::Container("bad magic, not an MLT1 container".into()));
        }
        let version = r.u16("version")?;
        if version != VERSION {
            return Err(Error::Container(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let codec_id = r.u8("codec")?;
        let codec = Codec::from_id(codec_id)
            .ok_or_else(|| Error::Container(format!("unknown codec id {codec_id}")))?;
        let bits = r.u8("bit depth")?;
        if !(1..=32).contains(&bits) {
            return Err(Error::Container(format!(
                "bit depth {bits} outside [1, 32]"
            )));
        }
        let count = r.u32("meshlet count")? as usize;
        let source_vertex_count = r.u32("vertex count")?;
        let source_triangle_count = r.u32("triangle count")?;

        let group_count = r.u16("group count")?;
        let mut groups = Vec::with_capacity(group_count as usize);
        for _ in 0..group_count {
            let code = r.u8("semantic")?;
            let semantic = Semantic::from_code(code)
                .ok_or_else(|| Error::Container(format!("unknown semantic {code}")))?;
            let components = r.u8("components")?;
            let len = r.u8("name length")? as usize;
            let name = String::from_utf8(r.take(len, "group name")?.to_vec())
                .map_err(|_| Error::Container("group name is not UTF-8".into()))?;
            groups.push(ChannelGroup {
                name,
                components,
                semantic,
            });
        }
        let layout = AttributeLayout::new(groups)
            .map_err(|e| Error::Container(format!("bad layout: {e}")))?;
        let channels = layout.channel_count();
        let mut grid_channels = Vec::with_capacity(channels);
        for _ in 0..channels {
            grid_channels.push(ChannelGrid {
                min: r.f64("grid")?,
                delta: r.f64("grid")?,
                max_meshlet_extent: r.f64("grid")?,
                global_extent: r.f64("grid")?,
                guard_steps: r.u32("grid")?,
            });
        }
        if let Some(c) = grid_channels
            .iter()
            .find(|c| !(c.delta > 0.0) || !c.min.is_finite())
        {
            return Err(Error::Container(format!("invalid grid channel {c:?}")));
        }
        let grid = QuantizationGrid {
            bits,
            channels: grid_channels,
        };

        let mut lengths = [0usize; 6];
        for len in &mut lengths {
            *len = usize::try_from(r.u64("section length")?)
                .map_err(|_| Error::Container("section length overflows".into()))?;
        }
        let [meta, flags, indices, constants, attributes, vertex_map] =
            lengths.map(|len| r.take(len, "section").map(|s| s.to_vec()));
        let (meta, flags, indices, constants, attributes, vertex_map) = (
            meta?,
            flags?,
            indices?,
            constants?,
            attributes?,
            vertex_map?,
        );
        if r.pos != bytes.len() {
            return Err(Error::Container(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }

        if meta.len() != count * META_RECORD_BYTES {
            return Err(Error::Container(format!(
                "meta section is {} bytes, expected {} for {count} meshlets",
                meta.len(),
                count * META_RECORD_BYTES
            )));
        }
        if constants.len() != count * channels * 8 {
            return Err(Error::Container(
                "constant section size does not match meshlet count".into(),
            ));
        }
        let width = code_bytes(bits);
        let record = |i: usize| {
            let m = &meta[i * META_RECORD_BYTES..(i + 1) * META_RECORD_BYTES];
            let u = |k: usize| u32::from_le_bytes(m[4 * k..4 * k + 4].try_into().unwrap()) as usize;
            let f = |k: usize| f32::from_le_bytes(m[4 * k..4 * k + 4].try_into().unwrap());
            (
                [u(0), u(1), u(2)],
                CullCone {
                    axis: [f(3), f(4), f(5)],
                    half_angle: f(6),
                },
            )
        };
        let ends = [flags.len(), indices.len(), attributes.len()];

        let mut meshlets = Vec::with_capacity(count);
        let mut vertex_cursor = 0usize;
        for i in 0..count {
            let (start, cone) = record(i);
            let end = if i + 1 < count { record(i + 1).0 } else { ends };
            for k in 0..3 {
                if start[k] > end[k] || end[k] > ends[k] {
                    return Err(Error::Container(format!(
                        "meshlet {i} offsets are out of order or out of range"
                    )));
                }
            }
            let flag_bytes = &flags[start[0]..end[0]];
            let index_bytes = &indices[start[1]..end[1]];
            let attr_bytes = &attributes[start[2]..end[2]];
            if flag_bytes.len() % 4 != 0 || start[0] % 4 != 0 {
                return Err(Error::Container(format!(
                    "meshlet {i} flag block is not word aligned"
                )));
            }
            if attr_bytes.len() % (width * channels) != 0 {
                return Err(Error::Container(format!(
                    "meshlet {i} attribute block is not whole vertices"
                )));
            }
            let v = attr_bytes.len() / (width * channels);
            if !(3..=256).contains(&v) {
                return Err(Error::Container(format!("meshlet {i} has {v} vertices")));
            }
            let words: Vec<u32> = flag_bytes
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let stream = decode_stream(codec, &words, index_bytes, v)
                .map_err(|e| Error::Container(format!("meshlet {i}: {e}")))?;

            let codes = attr_bytes
                .chunks_exact(width)
                .map(|c| {
                    let mut b = [0u8; 4];
                    b[..width].copy_from_slice(c);
                    u32::from_le_bytes(b)
                })
                .collect::<Vec<_>>();
            if let Some(&c) = codes.iter().find(|&&c| c as u64 > grid.max_code()) {
                return Err(Error::Container(format!(
                    "meshlet {i} code {c} exceeds {bits} bits"
                )));
            }
            let offsets = constants[i * channels * 8..(i + 1) * channels * 8]
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let map_end = vertex_cursor + 4 * v;
            if map_end > vertex_map.len() {
                return Err(Error::Container(format!(
                    "vertex map is truncated at meshlet {i}"
                )));
            }
            let map = vertex_map[vertex_cursor..map_end]
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            vertex_cursor = map_end;
            meshlets.push(EncodedMeshlet {
                stream,
                cone,
                quantized: QuantizedMeshlet { offsets, codes },
                vertex_map: map,
            });
        }
        if vertex_cursor != vertex_map.len() {
            return Err(Error::Container("vertex map has extra entries".into()));
        }
        if count > 0 && record(0).0 != [0, 0, 0] {
            return Err(Error::Container(
                "first meshlet does not start at offset zero".into(),
            ));
        }
        Ok(Self {
            codec,
            source_vertex_count,
            source_triangle_count,
            layout,
            grid,
            meshlets,
        })
    }

    pub fn size_report(&self) -> Result<SizeReport> {
        let s = self.sections()?;
        let header_bytes = self.header(s.lengths())?.len();
        let [meta_bytes, flag_bytes, index_bytes, constant_bytes, attribute_bytes, vertex_map_bytes] =
            s.lengths();
        let t = self.source_triangle_count as f64;
        let v = self.source_vertex_count as f64;
        Ok(SizeReport {
            codec: self.codec,
            meshlets: self.meshlets.len(),
            source_triangles: self.source_triangle_count as usize,
            source_vertices: self.source_vertex_count as usize,
            header_bytes,
            meta_bytes,
            flag_bytes,
            index_bytes,
            constant_bytes,
            attribute_bytes,
            vertex_map_bytes,
            total_bytes: header_bytes + s.lengths().iter().sum::<usize>(),
            index_bpt: 8.0 * (flag_bytes + index_bytes) as f64 / t,
            meta_bpt: 8.0 * meta_bytes as f64 / t,
            vertex_bpv: 8.0 * (attribute_bytes + constant_bytes) as f64 / v,
            vertex_pipeline_bpt: VERTEX_PIPELINE_BPT,
            basic_meshlet_bpt: BASIC_MESHLET_BPT,
        })
    }
}

fn decode_stream(
    codec: Codec,
    words: &[u32],
    index_bytes: &[u8],
    v: usize,
) -> Result<MeshletStream> {
    let bad = |m: String| Error::Container(m);
    let stream = match codec {
        Codec::Basic => {
            if !words.is_empty() || !index_bytes.len().is_multiple_of(3) || index_bytes.is_empty() {
                return Err(bad("basic triangle block is malformed".into()));
            }
            let tris: Vec<[u8; 3]> = index_bytes
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect();
            if tris.iter().flatten().any(|&i| i as usize >= v) {
                return Err(bad("basic index out of range".into()));
            }
            MeshletStream::Basic(tris)
        }
        Codec::Gts => {
            let steps = index_bytes.len();
            let flags = FlagBits::from_words(words.to_vec(), steps)
                .ok_or_else(|| bad(format!("{} flag words for {steps} steps", words.len())))?;
            let s = GtsStream {
                triangle_count: steps + 1,
                flags,
                indices: index_bytes.to_vec(),
            };
            s.check_shape(v)?;
            MeshletStream::Gts(s)
        }
        Codec::GtsReuse => {
            // T' - 1 = reuse entries + new vertices beyond the first three.
            let steps = index_bytes.len() + v - 3;
            let per = words_for(steps);
            if words.len() != 2 * per {
                return Err(bad(format!(
                    "{} flag words, expected {}",
                    words.len(),
                    2 * per
                )));
            }
            let flags = FlagBits::from_words(words[..per].to_vec(), steps)
                .ok_or_else(|| bad("L/R flag padding is not zero".into()))?;
            let increments = FlagBits::from_words(words[per..].to_vec(), steps)
                .ok_or_else(|| bad("increment flag padding is not zero".into()))?;
            let s = GtsReuseStream {
                triangle_count: steps + 1,
                flags,
                increments,
                reuse: index_bytes.to_vec(),
            };
            s.check_shape(v)?;
            MeshletStream::GtsReuse(s)
        }
    };
    if stream.triangle_count() > 256 {
        return Err(bad(format!(
            "{} triangles exceed 256",
            stream.triangle_count()
        )));
    }
    Ok(stream)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Container(format!("truncated {what} at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}
