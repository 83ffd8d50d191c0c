//! Binary profile cache. Little-endian layout:
//!
//! ```text
//! magic "TDPM" | u32 version | 32-byte SHA-256 of the native instance text
//! f64 horizon | u64 vertices | u64 origins | u64 origin ids...
//! u64 buckets (0 = default) | u8 use_buckets | u64 rounds | f64 build seconds
//! origins × vertices functions, then u64 services, per service u64 modes and
//! one function per mode; a function is u64 points followed by (t, value) f64 pairs
//! ```
//!
//! Bucket indexes and gaps are rebuilt on load.

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use super::{ProfileError, ProfileMatrix, ProfileOptions, ProfileTelemetry};
use crate::network::{serialize_instance, Instance};
use crate::pl_time::ArrivalFunction;

pub const CACHE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"TDPM";

/// SHA-256 of the native serialization of `inst`.
pub fn instance_hash(inst: &Instance) -> [u8; 32] {
    Sha256::digest(serialize_instance(inst).as_bytes()).into()
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_function(out: &mut Vec<u8>, f: &ArrivalFunction) {
    put_u64(out, f.points().len() as u64);
    for &(t, y) in f.points() {
        put_f64(out, t);
        put_f64(out, y);
    }
}

pub fn write_cache(pm: &ProfileMatrix, inst: &Instance, mut w: impl Write) -> Result<(), ProfileError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&instance_hash(inst));
    put_f64(&mut out, pm.horizon);
    put_u64(&mut out, pm.vertex_count as u64);
    put_u64(&mut out, pm.origins.len() as u64);
    for &o in &pm.origins {
        put_u64(&mut out, o as u64);
    }
    put_u64(&mut out, pm.options.buckets.unwrap_or(0) as u64);
    out.push(pm.options.use_buckets as u8);
    put_u64(&mut out, pm.telemetry.rounds as u64);
    put_f64(&mut out, pm.telemetry.build_seconds);
    let (psi, services) = pm.raw_functions();
    for f in psi {
        put_function(&mut out, &f.function);
    }
    put_u64(&mut out, services.len() as u64);
    for modes in services {
        put_u64(&mut out, modes.len() as u64);
        for m in modes {
            put_function(&mut out, &m.function.function);
        }
    }
    w.write_all(&out).map_err(|e| ProfileError::Cache(e.to_string()))
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], ProfileError> {
        if self.buf.len() < n {
            return Err(ProfileError::Cache("truncated file".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64, ProfileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self, limit: usize) -> Result<usize, ProfileError> {
        let v = self.u64()?;
        if v > limit as u64 {
            return Err(ProfileError::Cache(format!("count {v} exceeds {limit}")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64, ProfileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn function(&mut self, horizon: f64) -> Result<ArrivalFunction, ProfileError> {
        let n = self.usize(self.buf.len() / 16)?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            points.push((self.f64()?, self.f64()?));
        }
        if points.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(ProfileError::Cache("breakpoint times out of order".into()));
        }
        Ok(ArrivalFunction::from_points(points, horizon))
    }
}

/// Loads a cache written by `write_cache` for the same instance. Rejects
/// other versions and instances with a different content hash.
pub fn read_cache(inst: &Instance, mut r: impl Read) -> Result<ProfileMatrix, ProfileError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| ProfileError::Cache(e.to_string()))?;
    let mut rd = Reader { buf: &bytes };
    if rd.take(4)? != MAGIC {
        return Err(ProfileError::Cache("not a profile cache".into()));
    }
    let version = u32::from_le_bytes(rd.take(4)?.try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(ProfileError::Cache(format!("version {version}, expected {CACHE_VERSION}")));
    }
    if rd.take(32)? != instance_hash(inst) {
        return Err(ProfileError::Cache("cache belongs to a different instance".into()));
    }
    let horizon = rd.f64()?;
    let vertices = rd.usize(inst.vertex_count)?;
    let origin_count = rd.usize(vertices)?;
    let origins = (0..origin_count).map(|_| rd.usize(vertices - 1)).collect::<Result<Vec<_>, _>>()?;
    let buckets = rd.u64()?;
    let use_buckets = rd.take(1)?[0] != 0;
    let rounds = rd.u64()? as usize;
    let build_seconds = rd.f64()?;
    let mut functions = Vec::with_capacity(origin_count);
    for _ in 0..origin_count {
        functions.push((0..vertices).map(|_| rd.function(horizon)).collect::<Result<Vec<_>, _>>()?);
    }
    let service_count = rd.usize(inst.service_count())?;
    let mut services = Vec::with_capacity(service_count);
    for _ in 0..service_count {
        let modes = rd.usize(2)?;
        services.push((0..modes).map(|_| rd.function(horizon)).collect::<Result<Vec<_>, _>>()?);
    }
    let options = ProfileOptions { buckets: (buckets > 0).then_some(buckets as usize), use_buckets };
    let telemetry = ProfileTelemetry { rounds, build_seconds, ..Default::default() };
    Ok(ProfileMatrix::assemble(inst, origins, functions, services, options, telemetry))
}
