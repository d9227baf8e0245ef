//! Translation over HTTP.
//!
//! Requests are `GET {endpoint}?key=…&lang=src-tgt&text=word`. A 200
//! response carries JSON `{"text": ["translation"]}`; 422 means the service
//! has no translation for the word. Anything else, including network
//! errors, is retried with exponential backoff.

use std::thread;
use std::time::Duration;

use lexalign::lexicon::{BackendError, TranslationBackend};
use serde::Deserialize;
use ureq::Agent;

pub const RETRIES: u32 = 3;

#[derive(Deserialize)]
struct Reply {
    #[serde(default)]
    text: Vec<String>,
}

pub struct RemoteBackend {
    agent: Agent,
    endpoint: String,
    api_key: String,
    lang: String,
    backoff: Duration,
}

enum Attempt {
    Done(Option<String>),
    Retry(String),
}

impl RemoteBackend {
    pub fn new(endpoint: &str, api_key: String, lang: String, backoff: Duration, timeout: Duration) -> Self {
        let agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteBackend {
            agent,
            endpoint: endpoint.to_owned(),
            api_key,
            lang,
            backoff,
        }
    }

    fn attempt(&self, word: &str) -> Attempt {
        let resp = self
            .agent
            .get(&self.endpoint)
            .query("key", &self.api_key)
            .query("lang", &self.lang)
            .query("text", word)
            .call();
        let mut resp = match resp {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        match resp.status().as_u16() {
            200 => match resp
                .body_mut()
                .read_to_string()
                .map_err(|e| e.to_string())
                .and_then(|body| serde_json::from_str::<Reply>(&body).map_err(|e| e.to_string()))
            {
                Ok(reply) => Attempt::Done(reply.text.into_iter().next().filter(|t| !t.trim().is_empty())),
                Err(e) => Attempt::Retry(format!("bad response body: {e}")),
            },
            422 => Attempt::Done(None),
            code => Attempt::Retry(format!("HTTP {code}")),
        }
    }
}

impl TranslationBackend for RemoteBackend {
    fn translate(&mut self, word: &str) -> Result<Option<String>, BackendError> {
        let mut delay = self.backoff;
        let mut last = String::new();
        for attempt in 0..=RETRIES {
            if attempt > 0 {
                log::debug!("retrying '{word}' in {delay:?}: {last}");
                thread::sleep(delay);
                delay *= 2;
            }
            match self.attempt(word) {
                Attempt::Done(answer) => return Ok(answer),
                Attempt::Retry(why) => last = why,
            }
        }
        Err(BackendError::Unavailable(last))
    }
}
