//! C interface to the meshlet codec.
//!
//! Meshes and containers are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! [`MlcStatus`]; on failure, [`mlc_last_error_message`] describes the error
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use meshlet_codec::container::Codec;
use meshlet_codec::obj::load_obj;
use meshlet_codec::verify::decode_meshlet;
use meshlet_codec::{
    compress, verify, AttributeLayout, CompressOptions, Error, MeshletContainer, MeshletLimits,
    SolverKind, TriangleMesh,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidMesh = 5,
    Encode = 6,
    Container = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlcCodec {
    Basic = 0,
    Gts = 1,
    GtsReuse = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlcSolver {
    Eta = 0,
    Exact = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MlcCompressOptions {
    pub codec: MlcCodec,
    pub solver: MlcSolver,
    pub max_vertices: u32,
    pub max_triangles: u32,
    pub bits: u8,
    pub time_budget_seconds: f64,
}

/// Opaque mesh handle.
pub struct MlcMesh(TriangleMesh);

/// Opaque container handle.
pub struct MlcContainer(MeshletContainer);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MlcStatus {
    match e {
        Error::Io(_) => MlcStatus::Io,
        Error::Parse { .. } | Error::Solution { .. } | Error::Json(_) => MlcStatus::Parse,
        Error::InvalidMesh(_) | Error::InvalidLayout(_) | Error::DegenerateTriangle(_) => {
            MlcStatus::InvalidMesh
        }
        Error::InvalidLimits(_) => MlcStatus::InvalidArgument,
        Error::Container(_) => MlcStatus::Container,
        _ => MlcStatus::Encode,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (MlcStatus, String)>) -> MlcStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MlcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MlcStatus::Panic
        }
    }
}

fn lift(e: Error) -> (MlcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MlcStatus, String) {
    (MlcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, (MlcStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (MlcStatus::InvalidArgument, "path is not UTF-8".into()))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mlc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn mlc_compress_options_default() -> MlcCompressOptions {
    let d = CompressOptions::default();
    MlcCompressOptions {
        codec: MlcCodec::Gts,
        solver: MlcSolver::Eta,
        max_vertices: d.limits.max_vertices as u32,
        max_triangles: d.limits.max_triangles as u32,
        bits: d.bits,
        time_budget_seconds: d.time_budget.as_secs_f64(),
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlc_mesh_load_obj(
    path: *const c_char,
    out: *mut *mut MlcMesh,
) -> MlcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = load_obj(path_arg(path)?).map_err(lift)?;
        *out = Box::into_raw(Box::new(MlcMesh(mesh)));
        Ok(())
    })
}

/// Builds a position-only mesh.
///
/// # Safety
/// `positions` must hold `3 * vertex_count` floats and `indices`
/// `3 * triangle_count` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mlc_mesh_from_positions(
    positions: *const f32,
    vertex_count: usize,
    indices: *const u32,
    triangle_count: usize,
    out: *mut *mut MlcMesh,
) -> MlcStatus {
    guard(|| {
        if out.is_null() || positions.is_null() || indices.is_null() {
            return Err(null("argument"));
        }
        let attrs = std::slice::from_raw_parts(positions, 3 * vertex_count).to_vec();
        let tris = std::slice::from_raw_parts(indices, 3 * triangle_count)
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        let mesh = TriangleMesh::new(AttributeLayout::positions(), attrs, tris).map_err(lift)?;
        *out = Box::into_raw(Box::new(MlcMesh(mesh)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mlc_mesh_triangle_count(mesh: *const MlcMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.triangle_count())
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mlc_mesh_vertex_count(mesh: *const MlcMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.vertex_count())
}

/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mlc_mesh_free(mesh: *mut MlcMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Compresses `mesh`. `options` may be null for defaults. When
/// `report_json` is non-null it receives the run report, to be released
/// with [`mlc_string_free`].
///
/// # Safety
/// Pointers must be valid or null where allowed.
#[no_mangle]
pub unsafe extern "C" fn mlc_compress(
    mesh: *const MlcMesh,
    options: *const MlcCompressOptions,
    out: *mut *mut MlcContainer,
    report_json: *mut *mut c_char,
) -> MlcStatus {
    guard(|| {
        let mesh = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| mlc_compress_options_default());
        if !(o.time_budget_seconds >= 0.0 && o.time_budget_seconds.is_finite())
            || !(1..=32).contains(&o.bits)
        {
            return Err((
                MlcStatus::InvalidArgument,
                "bits or time budget out of range".into(),
            ));
        }
        let options = CompressOptions {
            codec: match o.codec {
                MlcCodec::Basic => Codec::Basic,
                MlcCodec::Gts => Codec::Gts,
                MlcCodec::GtsReuse => Codec::GtsReuse,
            },
            solver: match o.solver {
                MlcSolver::Eta => SolverKind::Eta,
                MlcSolver::Exact => SolverKind::Exact,
            },
            limits: MeshletLimits::new(o.max_vertices as usize, o.max_triangles as usize)
                .map_err(lift)?,
            bits: o.bits,
            time_budget: Duration::from_secs_f64(o.time_budget_seconds),
        };
        let c = compress(&mesh.0, &options).map_err(lift)?;
        if !report_json.is_null() {
            let json = serde_json::to_string(&c.report).map_err(|e| lift(e.into()))?;
            *report_json = CString::new(json).map_or(ptr::null_mut(), CString::into_raw);
        }
        *out = Box::into_raw(Box::new(MlcContainer(c.container)));
        Ok(())
    })
}

/// # Safety
/// `container` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mlc_container_write(
    container: *const MlcContainer,
    path: *const c_char,
) -> MlcStatus {
    guard(|| {
        let c = container.as_ref().ok_or_else(|| null("container"))?;
        c.0.write(path_arg(path)?).map_err(lift)
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mlc_container_read(
    path: *const c_char,
    out: *mut *mut MlcContainer,
) -> MlcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = MeshletContainer::read(path_arg(path)?).map_err(lift)?;
        *out = Box::into_raw(Box::new(MlcContainer(c)));
        Ok(())
    })
}

/// # Safety
/// `container` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mlc_container_meshlet_count(container: *const MlcContainer) -> usize {
    container.as_ref().map_or(0, |c| c.0.meshlets.len())
}

/// Writes the non-degenerate triangles of meshlet `index` as global vertex
/// ids into `triangles` (3 values per triangle). `count` receives the
/// triangle count; if `capacity` triangles are too few nothing is written
/// and `MLC_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `triangles` must hold `3 * capacity` values (may be null if `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn mlc_container_decode_meshlet(
    container: *const MlcContainer,
    index: usize,
    triangles: *mut u32,
    capacity: usize,
    count: *mut usize,
) -> MlcStatus {
    guard(|| {
        let c = container.as_ref().ok_or_else(|| null("container"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        let m = c.0.meshlets.get(index).ok_or_else(|| {
            (
                MlcStatus::InvalidArgument,
                format!("meshlet {index} out of range"),
            )
        })?;
        let decoded: Vec<[u32; 3]> = decode_meshlet(m)
            .map_err(lift)?
            .into_iter()
            .filter(|t| !t.degenerate)
            .map(|t| t.indices.map(|l| m.vertex_map[l as usize]))
            .collect();
        *count = decoded.len();
        if decoded.len() > capacity {
            return Err((
                MlcStatus::BufferTooSmall,
                format!(
                    "meshlet {index} has {} triangles, buffer holds {capacity}",
                    decoded.len()
                ),
            ));
        }
        if !decoded.is_empty() {
            if triangles.is_null() {
                return Err(null("triangles"));
            }
            let out = std::slice::from_raw_parts_mut(triangles, 3 * decoded.len());
            for (dst, src) in out.chunks_exact_mut(3).zip(&decoded) {
                dst.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Runs the full decode and quantization checks. `passed` receives the verdict.
///
/// # Safety
/// Handles must be live and `passed` valid.
#[no_mangle]
pub unsafe extern "C" fn mlc_verify(
    container: *const MlcContainer,
    mesh: *const MlcMesh,
    passed: *mut bool,
) -> MlcStatus {
    guard(|| {
        let c = container.as_ref().ok_or_else(|| null("container"))?;
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let r = verify(&c.0, &m.0);
        *passed = r.passed;
        if !r.passed {
            set_error(r.failures.first().cloned().unwrap_or_default());
        }
        Ok(())
    })
}

/// # Safety
/// `container` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mlc_container_free(container: *mut MlcContainer) {
    if !container.is_null() {
        drop(Box::from_raw(container));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mlc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
