//! Media file serving with single byte-range support.

use std::io::SeekFrom;
use std::path::Path;

use axum::body::Body;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use tokio::io::{AsyncReadExt, AsyncSeekExt};

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteRange {
    /// The whole file.
    Full,
    /// Inclusive byte positions.
    Partial(u64, u64),
    Unsatisfiable,
}

/// Interprets a `Range` header against a file of `len` bytes. Malformed or
/// multi-range headers are ignored and the whole file is served.
pub fn parse_range(header: Option<&str>, len: u64) -> ByteRange {
    let Some(spec) = header.and_then(|h| h.trim().strip_prefix("bytes=")) else {
        return ByteRange::Full;
    };
    if spec.contains(',') {
        return ByteRange::Full;
    }
    let Some((first, last)) = spec.split_once('-') else {
        return ByteRange::Full;
    };
    let (first, last) = (first.trim(), last.trim());
    let parsed = match (first.is_empty(), last.is_empty()) {
        (true, true) => return ByteRange::Full,
        (true, false) => match last.parse::<u64>() {
            Ok(0) => return ByteRange::Unsatisfiable,
            Ok(n) => Some((len.saturating_sub(n), len.saturating_sub(1))),
            Err(_) => None,
        },
        (false, _) => match (first.parse::<u64>(), last.parse::<u64>()) {
            (Ok(a), _) if a >= len => return ByteRange::Unsatisfiable,
            (Ok(a), Ok(b)) if b >= a => Some((a, b.min(len - 1))),
            (Ok(a), Err(_)) if last.is_empty() => Some((a, len - 1)),
            _ => None,
        },
    };
    match parsed {
        Some(_) if len == 0 => ByteRange::Unsatisfiable,
        Some((a, b)) => ByteRange::Partial(a, b),
        None => ByteRange::Full,
    }
}

pub fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("wav") => "audio/wav",
        Some("mp3") => "audio/mpeg",
        Some("m4a") => "audio/mp4",
        Some("mp4") | Some("m4v") => "video/mp4",
        Some("webm") => "video/webm",
        Some("ogv") => "video/ogg",
        Some("mov") => "video/quicktime",
        _ => "application/octet-stream",
    }
}

pub async fn serve_file(path: &Path, headers: &HeaderMap) -> Result<Response, ApiError> {
    let io_error = |e: std::io::Error| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", e.to_string());
    let mut file = tokio::fs::File::open(path).await.map_err(io_error)?;
    let len = file.metadata().await.map_err(io_error)?.len();
    let range = parse_range(headers.get(header::RANGE).and_then(|v| v.to_str().ok()), len);
    let mut response_headers = HeaderMap::new();
    response_headers.insert(header::ACCEPT_RANGES, HeaderValue::from_static("bytes"));
    response_headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type(path)));
    let (status, start, end) = match range {
        ByteRange::Full => (StatusCode::OK, 0, len),
        ByteRange::Partial(a, b) => {
            let value = format!("bytes {a}-{b}/{len}");
            response_headers.insert(header::CONTENT_RANGE, HeaderValue::from_str(&value).expect("ascii header"));
            (StatusCode::PARTIAL_CONTENT, a, b + 1)
        }
        ByteRange::Unsatisfiable => {
            let value = format!("bytes */{len}");
            response_headers.insert(header::CONTENT_RANGE, HeaderValue::from_str(&value).expect("ascii header"));
            return Ok((StatusCode::RANGE_NOT_SATISFIABLE, response_headers).into_response());
        }
    };
    file.seek(SeekFrom::Start(start)).await.map_err(io_error)?;
    let mut body = Vec::with_capacity((end - start) as usize);
    file.take(end - start).read_to_end(&mut body).await.map_err(io_error)?;
    Ok((status, response_headers, Body::from(body)).into_response())
}
