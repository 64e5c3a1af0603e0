//! Quiz delivery over HTTP.
//!
//! Sessions draw a seeded shuffle of bank questions above a gap threshold and
//! walk them with a strict cursor. In hint mode a wrong first answer reveals
//! the first letter of the target word and allows one more attempt. Every
//! submission is appended to an answer log that the analysis reads back.

pub mod api;
pub mod session;
pub mod store;

use std::sync::Arc;

pub use api::router;
pub use session::{select_questions, QuizSession, SessionError, Submission, Summary};
pub use store::{SessionParams, SessionRecord, Store, StoreError, ANSWERS_FILE, SESSIONS_FILE};

/// Serves the routes on an already bound listener until the future is
/// dropped or the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, store: Arc<Store>) -> std::io::Result<()> {
    axum::serve(listener, router(store)).await
}
