//! Chat-completion wire format for a live extraction backend.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BackendError, ExtractionPrompt};

pub const ENDPOINT_ENV: &str = "SCKG_LLM_ENDPOINT";
pub const API_KEY_ENV: &str = "SCKG_LLM_API_KEY";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn from_prompt(model: &str, prompt: &ExtractionPrompt) -> Self {
        Self {
            model: model.to_string(),
            messages: vec![
                ChatMessage {
                    role: "system".into(),
                    content: prompt.system_text.clone(),
                },
                ChatMessage {
                    role: "user".into(),
                    content: prompt.user_text(),
                },
            ],
            temperature: 0.0,
        }
    }
}

/// Pull `choices[0].message.content` out of a chat-completion response body.
pub fn parse_chat_response(body: &str) -> Result<String, BackendError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| BackendError::Failed(format!("response is not JSON: {e}")))?;
    if let Some(err) = value.get("error") {
        return Err(BackendError::Failed(err.to_string()));
    }
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::Failed("response has no choices[0].message.content".into()))
}
