//! HTTP query layer over a corpus store.
//!
//! | method | path                               | body                                   |
//! |--------|------------------------------------|----------------------------------------|
//! | GET    | `/videos?sort=&order=&q=`          | video summaries                        |
//! | GET    | `/videos/{id}`                     | metadata, barcode, coherence line      |
//! | GET    | `/videos/{id}/sankey`              | flow model with residual sentences     |
//! | GET    | `/videos/{id}/projection?mode=&perplexity=&seed=&iterations=` | sentence projection |
//! | GET    | `/videos/{id}/sentences/{sid}`     | sentence detail with context           |
//! | GET    | `/videos/{id}/words?sort=&q=`      | word table                             |
//! | POST   | `/videos/{id}/selection`           | sentence ids of one selector           |
//! | GET    | `/media/{id}`                      | media file, byte ranges supported      |
//!
//! Errors are `{code, message, path}` with a matching HTTP status.

pub mod api;
pub mod bodies;
pub mod error;
pub mod media;
pub mod query;

pub use api::{router, SharedStore};
pub use error::{ApiError, ErrorBody};
