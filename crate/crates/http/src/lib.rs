//! HTTP front ends over `edw-core`: the platform API, a mock company registry
//! that serves fixture files, and the blocking client the ETL and the platform
//! use to reach a registry over HTTP.

mod api;
mod client;
mod error;
mod mock_registry;
mod server;

pub use api::{
    platform_router, CardRequest, CardView, ConsentRequest, CreateCaseResponse, IdeaLinkRequest, IdeaView,
    MoveRequest, ObjectiveRequest, ParticipantRequest, RollRequest, SettingsRequest, TestRequest,
};
pub use client::{HttpRegistryClient, RetryPolicy};
pub use error::{ApiError, ErrorBody};
pub use mock_registry::registry_router;
pub use server::{serve, BackgroundServer};
