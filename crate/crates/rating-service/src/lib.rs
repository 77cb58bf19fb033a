//! Blinded human rating of adaptation runs.
//!
//! Raters see source and adapted sentences under an opaque item id; which
//! system produced an item is only stored server-side and in the ratings file.

pub mod http;
pub mod service;

pub use http::{router, serve, ErrorBody};
pub use service::{
    BlindedSample, NextSample, Pool, PoolItem, Progress, RatingAck, RatingService, RatingSession, RatingSubmission, ServiceError,
    SessionCreated, StoredRating,
};
