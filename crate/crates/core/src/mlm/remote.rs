//! HTTP client for an external fill-mask server.
//!
//! Wire format (JSON bodies):
//!
//! ```text
//! POST {endpoint}/predict     {"masked_text": str, "mask_token": str, "top_m": int}
//!   -> {"candidates": [{"token": str, "confidence": number}, ...]}
//! POST {endpoint}/vocab_check {"word": str}
//!   -> {"in_vocab": bool}
//! ```

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    dispatch_text, BackendDescriptor, BackendError, Candidate, MaskPrediction, MaskPredictor,
    SORT_TOLERANCE,
};
use crate::text::MaskedSentence;

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub max_in_flight: usize,
    /// Extra attempts after the first for transport failures and 5xx.
    pub retries: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            max_in_flight: 8,
            retries: 2,
            backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    masked_text: &'a str,
    mask_token: &'a str,
    top_m: usize,
}

#[derive(Deserialize)]
struct WireCandidate {
    token: String,
    confidence: f64,
}

#[derive(Deserialize)]
struct PredictResponse {
    candidates: Vec<WireCandidate>,
}

#[derive(Serialize)]
struct VocabRequest<'a> {
    word: &'a str,
}

#[derive(Deserialize)]
struct VocabResponse {
    in_vocab: bool,
}

struct Slots {
    used: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.max {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteBackend {
    descriptor: BackendDescriptor,
    base: String,
    agent: ureq::Agent,
    config: RemoteConfig,
    slots: Slots,
}

enum Failure {
    Retryable(String),
    Fatal(BackendError),
}

impl RemoteBackend {
    pub fn new(descriptor: BackendDescriptor, config: RemoteConfig) -> Result<Self, BackendError> {
        descriptor.validate()?;
        let base = descriptor
            .endpoint
            .clone()
            .unwrap_or_default()
            .trim_end_matches('/')
            .to_string();
        if config.max_in_flight == 0 {
            return Err(BackendError::Config("max_in_flight must be positive".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            descriptor,
            base,
            agent,
            slots: Slots {
                used: Mutex::new(0),
                freed: Condvar::new(),
                max: config.max_in_flight,
            },
            config,
        })
    }

    fn post_once<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, Failure> {
        let url = format!("{}/{path}", self.base);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| Failure::Retryable(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        if status >= 500 {
            return Err(Failure::Retryable(format!("{url}: HTTP {status}")));
        }
        if status != 200 {
            return Err(Failure::Fatal(BackendError::Protocol(format!(
                "{url}: unexpected HTTP {status}"
            ))));
        }
        resp.body_mut()
            .read_json::<R>()
            .map_err(|e| Failure::Fatal(BackendError::Protocol(format!("{url}: bad body: {e}"))))
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, BackendError> {
        let _slot = self.slots.acquire();
        let mut attempt = 0;
        loop {
            match self.post_once(path, body) {
                Ok(r) => return Ok(r),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    if attempt >= self.config.retries {
                        return Err(BackendError::Transport(format!(
                            "{msg} (after {} attempts)",
                            attempt + 1
                        )));
                    }
                    thread::sleep(self.config.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

impl MaskPredictor for RemoteBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn predict(&self, masked: &MaskedSentence) -> Result<MaskPrediction, BackendError> {
        let text = dispatch_text(masked, &self.descriptor.mask_token)?;
        let resp: PredictResponse = self.post("predict", &PredictRequest {
            masked_text: &text,
            mask_token: &self.descriptor.mask_token,
            top_m: self.descriptor.top_m,
        })?;
        let candidates: Vec<Candidate> = resp
            .candidates
            .into_iter()
            .map(|c| Candidate::new(c.token, c.confidence))
            .collect();
        let prediction = MaskPrediction::from_nearly_sorted(candidates, SORT_TOLERANCE)?;
        if prediction.truncation_m() <= self.descriptor.top_m {
            return Ok(prediction);
        }
        Ok(MaskPrediction::new(
            prediction.candidates()[..self.descriptor.top_m].to_vec(),
        )?)
    }

    fn in_vocab(&self, word: &str) -> Result<bool, BackendError> {
        let resp: VocabResponse = self.post("vocab_check", &VocabRequest { word })?;
        Ok(resp.in_vocab)
    }
}
