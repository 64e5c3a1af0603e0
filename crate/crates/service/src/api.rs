//! JSON routes over a [`Store`].

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clozer_core::analysis::{correlation, Metric};
use clozer_core::bank::{select, Order, Question, Selection};
use clozer_core::grading::{GradeResult, Hint};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::session::{QuizSession, SessionError, Submission};
use crate::store::{SessionParams, Store, StoreError};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, code) = match &e {
            StoreError::UnknownSession(_) => (StatusCode::NOT_FOUND, "session_not_found"),
            StoreError::InvalidParams(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            StoreError::Session(s) => match s {
                SessionError::Insufficient { .. } => {
                    (StatusCode::UNPROCESSABLE_ENTITY, "insufficient_questions")
                }
                SessionError::NoQuestionsRequested => (StatusCode::BAD_REQUEST, "bad_request"),
                SessionError::OutOfOrder { .. } => (StatusCode::CONFLICT, "out_of_order"),
                SessionError::AlreadyFinalized(_) => (StatusCode::CONFLICT, "already_finalized"),
                SessionError::Unfinished(_) => (StatusCode::CONFLICT, "session_unfinished"),
                SessionError::Grading(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            },
            StoreError::Io { .. } | StoreError::Replay { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/questions", get(list_questions))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/current", get(current))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/summary", get(summary))
        .route("/stats/questions", get(stats))
        .layer(CorsLayer::permissive())
        .with_state(store)
}

async fn healthz(State(store): State<Arc<Store>>) -> Json<Value> {
    Json(json!({"status": "ok", "questions": store.bank().len()}))
}

#[derive(Debug, Deserialize)]
struct QuestionQuery {
    min_gap: Option<f64>,
    target: Option<String>,
    limit: Option<usize>,
}

#[derive(Serialize)]
struct QuestionList {
    count: usize,
    questions: Vec<Question>,
}

async fn list_questions(
    State(store): State<Arc<Store>>,
    query: Result<Query<QuestionQuery>, QueryRejection>,
) -> ApiResult<QuestionList> {
    let Query(q) = query?;
    if let Some(m) = q.min_gap {
        if !(0.0..=1.0).contains(&m) {
            return Err(ApiError::bad_request(format!("min_gap {m} outside [0, 1]")));
        }
    }
    let questions = select(
        &store.bank().questions,
        &Selection {
            min_gap: q.min_gap,
            target_word: q.target.filter(|t| !t.trim().is_empty()),
            limit: q.limit,
            order: Order::PhiDesc,
        },
    );
    Ok(Json(QuestionList {
        count: questions.len(),
        questions,
    }))
}

#[derive(Serialize)]
struct SessionCreated {
    session_id: String,
    question_ids: Vec<String>,
    hint_mode: bool,
    min_gap: f64,
    seed: u64,
    created_at: String,
}

async fn create_session(
    State(store): State<Arc<Store>>,
    body: Result<Json<SessionParams>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let Json(params) = body?;
    let s = store.create_session(&params)?;
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id: s.session_id,
            question_ids: s.question_ids,
            hint_mode: s.hint_mode,
            min_gap: s.min_gap,
            seed: s.seed,
            created_at: s.created_at,
        }),
    ))
}

#[derive(Serialize)]
struct CurrentQuestion {
    question_id: String,
    masked_text: String,
    /// Number the next submission will carry.
    attempt_number: u8,
    hint: Option<Hint>,
}

#[derive(Serialize)]
struct CurrentView {
    session_id: String,
    hint_mode: bool,
    position: usize,
    total: usize,
    finished: bool,
    question: Option<CurrentQuestion>,
    answered: usize,
    exact_so_far: usize,
}

fn view(store: &Store, s: &QuizSession) -> CurrentView {
    let question = s.current_question().map(|id| {
        let state = s.current_state().expect("current state exists");
        let q = store.question(id).expect("session questions come from the bank");
        CurrentQuestion {
            question_id: id.to_string(),
            masked_text: q.masked_text.clone(),
            attempt_number: state.attempts_used + 1,
            hint: state
                .hint_issued
                .then(|| clozer_core::grading::make_hint(&q.target_word).ok())
                .flatten(),
        }
    });
    CurrentView {
        session_id: s.session_id.clone(),
        hint_mode: s.hint_mode,
        position: s.cursor,
        total: s.question_ids.len(),
        finished: s.is_finished(),
        question,
        answered: s.cursor,
        exact_so_far: s
            .states
            .iter()
            .filter(|st| st.final_grade.as_ref().is_some_and(|g| g.exact))
            .count(),
    }
}

async fn current(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<CurrentView> {
    let s = store.session(&id)?;
    Ok(Json(view(&store, &s)))
}

#[derive(Debug, Deserialize)]
struct AnswerBody {
    question_id: String,
    text: String,
}

#[derive(Serialize)]
struct AnswerResponse {
    grade: GradeResult,
    hint: Option<Hint>,
    finalized: bool,
    finished: bool,
}

async fn answer(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    body: Result<Json<AnswerBody>, JsonRejection>,
) -> ApiResult<AnswerResponse> {
    let Json(body) = body?;
    let Submission {
        grade,
        hint,
        finalized,
    } = store.submit_answer(&id, &body.question_id, &body.text)?;
    let finished = store.session(&id)?.is_finished();
    Ok(Json(AnswerResponse {
        grade,
        hint,
        finalized,
        finished,
    }))
}

async fn summary(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<crate::session::Summary> {
    Ok(Json(store.summary(&id)?))
}

async fn stats(State(store): State<Arc<Store>>) -> Json<Value> {
    let stats = store.question_stats();
    let r = |m| correlation(&stats, m).ok();
    Json(json!({
        "questions": stats,
        "correlation": {"exact": r(Metric::Exact), "stem": r(Metric::Stem)},
    }))
}
