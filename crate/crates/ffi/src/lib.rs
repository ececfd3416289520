//! C ABI over `sgce`.
//!
//! Meshes and networks are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`SgceStatus`]; on failure the
//! message is available from [`sgce_last_error`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sgce::eval::{evaluate, EvalMode};
use sgce::losses::{loss_3d, total_loss, LossWeights};
use sgce::net::{load_checkpoint, Network};
use sgce::{Error, ErrorCategory, Mesh, RegionMask};

/// Status codes; the non-zero values match the `sgce` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    TopologyMismatch = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgceEvalMode {
    Metrical = 0,
    NonMetrical = 1,
}

/// Opaque triangle mesh.
pub struct SgceMesh(Mesh);

/// Opaque trained network.
pub struct SgceNetwork(Network);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgceLossWeights {
    pub lambda_2d: f64,
    pub lambda_3d: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SgceLossReport {
    pub total: f64,
    pub l_3d: f64,
    pub l_2d: f64,
    pub l_vertices: f64,
    pub l_3d_id: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SgceDistanceStats {
    pub median: f64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SgceStatus, msg: &str) -> SgceStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> SgceStatus {
    let status = match e.category() {
        ErrorCategory::Usage => SgceStatus::InvalidArgument,
        ErrorCategory::Numeric => SgceStatus::Numeric,
        ErrorCategory::Topology => SgceStatus::TopologyMismatch,
        ErrorCategory::Io => SgceStatus::Io,
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), SgceStatus>) -> SgceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SgceStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(SgceStatus::Panic, "internal panic"),
    }
}

fn null(what: &str) -> SgceStatus {
    fail(SgceStatus::NullPointer, &format!("{what} is null"))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, SgceStatus> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(SgceStatus::InvalidArgument, "path is not valid UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, SgceStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `sgce_*` call on this thread.
#[no_mangle]
pub extern "C" fn sgce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sgce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an OBJ or PLY mesh.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_load(
    path: *const c_char,
    out: *mut *mut SgceMesh,
) -> SgceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = Mesh::load(path_arg(path)?).map_err(from_error)?;
        *out = Box::into_raw(Box::new(SgceMesh(mesh)));
        Ok(())
    })
}

/// Builds a mesh from `n_vertices × 3` coordinates and `n_faces × 3` indices.
///
/// # Safety
/// The arrays must hold the stated number of elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_from_arrays(
    vertices: *const f64,
    n_vertices: usize,
    faces: *const u32,
    n_faces: usize,
    out: *mut *mut SgceMesh,
) -> SgceStatus {
    guard(|| {
        if vertices.is_null() || faces.is_null() || out.is_null() {
            return Err(null("vertices, faces or out"));
        }
        let (nv, nf) = match (n_vertices.checked_mul(3), n_faces.checked_mul(3)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(fail(SgceStatus::InvalidArgument, "array length overflow")),
        };
        let v = std::slice::from_raw_parts(vertices, nv);
        let f = std::slice::from_raw_parts(faces, nf);
        let mesh = Mesh::new(
            v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
            f.chunks_exact(3)
                .map(|c| [c[0] as usize, c[1] as usize, c[2] as usize])
                .collect(),
        )
        .map_err(from_error)?;
        *out = Box::into_raw(Box::new(SgceMesh(mesh)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_free(mesh: *mut SgceMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_vertex_count(mesh: *const SgceMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.vertex_count())
}

/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_face_count(mesh: *const SgceMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.face_count())
}

/// FNV-1a hash of the face list; 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_topology_hash(mesh: *const SgceMesh) -> u64 {
    mesh.as_ref().map_or(0, |m| m.0.topology_hash())
}

/// Copies the `vertex_count × 3` coordinates into `out`.
///
/// # Safety
/// `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sgce_mesh_vertices(
    mesh: *const SgceMesh,
    out: *mut f64,
    len: usize,
) -> SgceStatus {
    guard(|| {
        let m = handle(mesh, "mesh")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let need = m.0.vertex_count() * 3;
        if len != need {
            return Err(fail(
                SgceStatus::InvalidArgument,
                &format!("buffer holds {len} values, need {need}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, s) in dst.iter_mut().zip(m.0.vertices.iter().flatten()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Loads an SGCE checkpoint file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgce_network_load(
    path: *const c_char,
    out: *mut *mut SgceNetwork,
) -> SgceStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let bytes = std::fs::read(path_arg(path)?).map_err(|e| from_error(e.into()))?;
        let (net, _) = load_checkpoint(&bytes).map_err(from_error)?;
        *out = Box::into_raw(Box::new(SgceNetwork(net)));
        Ok(())
    })
}

/// Loads a checkpoint from memory.
///
/// # Safety
/// `data` must hold `len` bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgce_network_from_bytes(
    data: *const u8,
    len: usize,
    out: *mut *mut SgceNetwork,
) -> SgceStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return Err(null("data or out"));
        }
        let (net, _) =
            load_checkpoint(std::slice::from_raw_parts(data, len)).map_err(from_error)?;
        *out = Box::into_raw(Box::new(SgceNetwork(net)));
        Ok(())
    })
}

/// # Safety
/// `net` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sgce_network_free(net: *mut SgceNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sgce_network_latent_dim(net: *const SgceNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.latent_dim())
}

/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sgce_network_vertex_count(net: *const SgceNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.n_vertices())
}

fn check_topology(net: &Network, mesh: &Mesh) -> Result<(), SgceStatus> {
    if net.topology_hash() != mesh.topology_hash() {
        return Err(from_error(Error::TopologyMismatch {
            expected: net.topology_hash(),
            found: mesh.topology_hash(),
        }));
    }
    Ok(())
}

/// Writes the latent vector of `mesh` into `out` (`len` must equal the
/// latent dimension).
///
/// # Safety
/// Handles must be live and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sgce_encode(
    net: *const SgceNetwork,
    mesh: *const SgceMesh,
    out: *mut f64,
    len: usize,
) -> SgceStatus {
    guard(|| {
        let (n, m) = (handle(net, "network")?, handle(mesh, "mesh")?);
        if out.is_null() {
            return Err(null("out"));
        }
        if len != n.0.latent_dim() {
            return Err(fail(
                SgceStatus::InvalidArgument,
                &format!(
                    "latent buffer holds {len} values, need {}",
                    n.0.latent_dim()
                ),
            ));
        }
        check_topology(&n.0, &m.0)?;
        let z = n.0.encode(&m.0.vertices).map_err(from_error)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(z.values());
        Ok(())
    })
}

/// Default loss weights (0.4, 0.6, 0.5, 0.5).
#[no_mangle]
pub extern "C" fn sgce_loss_weights_default() -> SgceLossWeights {
    let w = LossWeights::default();
    SgceLossWeights {
        lambda_2d: w.lambda_2d,
        lambda_3d: w.lambda_3d,
        lambda_1: w.lambda_1,
        lambda_2: w.lambda_2,
    }
}

/// Evaluates the full loss. `mask` may be null for uniform weights,
/// otherwise it holds one weight per vertex. `weights` may be null for the
/// defaults.
///
/// # Safety
/// Handles must be live; non-null pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgce_loss(
    net: *const SgceNetwork,
    pred: *const SgceMesh,
    gt: *const SgceMesh,
    mask: *const f64,
    l_2d: f64,
    weights: *const SgceLossWeights,
    out: *mut SgceLossReport,
) -> SgceStatus {
    guard(|| {
        let (n, p, g) = (
            handle(net, "network")?,
            handle(pred, "pred")?,
            handle(gt, "gt")?,
        );
        if out.is_null() {
            return Err(null("out"));
        }
        check_topology(&n.0, &p.0)?;
        check_topology(&n.0, &g.0)?;
        let nv = g.0.vertex_count();
        let mask = if mask.is_null() {
            RegionMask::uniform(nv)
        } else {
            RegionMask::new(std::slice::from_raw_parts(mask, nv).to_vec()).map_err(from_error)?
        };
        let w = weights
            .as_ref()
            .copied()
            .unwrap_or_else(|| sgce_loss_weights_default());
        let w = LossWeights {
            lambda_2d: w.lambda_2d,
            lambda_3d: w.lambda_3d,
            lambda_1: w.lambda_1,
            lambda_2: w.lambda_2,
        };
        let parts = loss_3d(&p.0.vertices, &g.0.vertices, &mask, &n.0, &w).map_err(from_error)?;
        let r = total_loss(&parts, l_2d, &w).map_err(from_error)?;
        *out = SgceLossReport {
            total: r.total,
            l_3d: r.l_3d,
            l_2d: r.l_2d,
            l_vertices: r.l_vertices,
            l_3d_id: r.l_3d_id,
        };
        Ok(())
    })
}

/// Aligns `pred` to `gt` and measures ground-truth vertices against the
/// aligned surface. `pairs` holds `n_pairs` `(pred, gt)` index pairs
/// flattened; pass null/0 for identity correspondence.
///
/// # Safety
/// Handles must be live; `pairs` must hold `2·n_pairs` values when non-null.
#[no_mangle]
pub unsafe extern "C" fn sgce_evaluate(
    pred: *const SgceMesh,
    gt: *const SgceMesh,
    pairs: *const usize,
    n_pairs: usize,
    mode: SgceEvalMode,
    out: *mut SgceDistanceStats,
) -> SgceStatus {
    guard(|| {
        let (p, g) = (handle(pred, "pred")?, handle(gt, "gt")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let corr: Option<Vec<(usize, usize)>> = if pairs.is_null() || n_pairs == 0 {
            None
        } else {
            Some(
                std::slice::from_raw_parts(pairs, 2 * n_pairs)
                    .chunks_exact(2)
                    .map(|c| (c[0], c[1]))
                    .collect(),
            )
        };
        let mode = match mode {
            SgceEvalMode::Metrical => EvalMode::Metrical,
            SgceEvalMode::NonMetrical => EvalMode::NonMetrical,
        };
        let e = evaluate(&p.0, &g.0, corr.as_deref(), mode).map_err(from_error)?;
        *out = SgceDistanceStats {
            median: e.stats.median,
            mean: e.stats.mean,
            std: e.stats.std,
            count: e.stats.count,
        };
        Ok(())
    })
}
