use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use super::{Backend, BackendError, BackendRequest};

struct Route {
    name: String,
    needle: String,
    queue: VecDeque<String>,
}

#[derive(Default)]
struct Queues {
    keyed: HashMap<String, VecDeque<String>>,
    routes: Vec<Route>,
    default: VecDeque<String>,
}

/// Deterministic backend for tests, fixtures and replay.
///
/// Lookup order per request: a response recorded for the request's hash,
/// then the first route whose needle occurs in the system turn, then the
/// default queue. Every request is recorded for later assertions.
#[derive(Default)]
pub struct ScriptedBackend {
    queues: Mutex<Queues>,
    replay: bool,
    requests: Mutex<Vec<BackendRequest>>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let backend = ScriptedBackend::default();
        backend.queues.lock().unwrap().default = responses.into_iter().map(Into::into).collect();
        backend
    }

    /// Replay mode: only hash-keyed responses are served; anything else is a
    /// divergence from the recorded run.
    pub fn replay(keyed: HashMap<String, VecDeque<String>>) -> Self {
        let backend = ScriptedBackend {
            replay: true,
            ..Default::default()
        };
        backend.queues.lock().unwrap().keyed = keyed;
        backend
    }

    /// Adds a queue served to requests whose system turn contains `needle`.
    pub fn with_route<I, S>(self, name: &str, needle: &str, responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.queues.lock().unwrap().routes.push(Route {
            name: name.to_string(),
            needle: needle.to_string(),
            queue: responses.into_iter().map(Into::into).collect(),
        });
        self
    }

    pub fn with_keyed(self, request: &BackendRequest, response: impl Into<String>) -> Self {
        self.queues
            .lock()
            .unwrap()
            .keyed
            .entry(request.hash())
            .or_default()
            .push_back(response.into());
        self
    }

    pub fn requests(&self) -> Vec<BackendRequest> {
        self.requests.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError> {
        self.requests.lock().unwrap().push(request.clone());
        let hash = request.hash();
        let mut queues = self.queues.lock().unwrap();
        if let Some(response) = queues.keyed.get_mut(&hash).and_then(VecDeque::pop_front) {
            return Ok(response);
        }
        if self.replay {
            let preview = request
                .turns
                .iter()
                .rev()
                .find(|t| t.role != super::ChatRole::System)
                .map(|t| t.content.chars().take(80).collect())
                .unwrap_or_default();
            return Err(BackendError::UnknownRequest { hash, preview });
        }
        let system = request.system_text().unwrap_or("");
        if let Some(route) = queues
            .routes
            .iter_mut()
            .find(|r| !r.needle.is_empty() && system.contains(&r.needle))
        {
            return route
                .queue
                .pop_front()
                .ok_or_else(|| BackendError::RouteExhausted(route.name.clone()));
        }
        queues.default.pop_front().ok_or(BackendError::QueueExhausted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ChatTurn;

    fn req(system: &str, user: &str) -> BackendRequest {
        BackendRequest::new("m", vec![ChatTurn::system(system), ChatTurn::user(user)])
    }

    #[test]
    fn queue_serves_in_order() {
        let b = ScriptedBackend::new(["A", "B"]);
        assert_eq!(b.complete(&req("s", "1")).unwrap(), "A");
        assert_eq!(b.complete(&req("s", "2")).unwrap(), "B");
        assert_eq!(b.call_count(), 2);
    }

    #[test]
    fn empty_queue_errors() {
        let b = ScriptedBackend::new(Vec::<String>::new());
        assert!(matches!(b.complete(&req("s", "u")), Err(BackendError::QueueExhausted)));
    }

    #[test]
    fn routes_by_system_text() {
        let b = ScriptedBackend::new(["default"])
            .with_route("critic", "identify issues", ["looks fine"]);
        assert_eq!(b.complete(&req("please identify issues", "u")).unwrap(), "looks fine");
        assert_eq!(b.complete(&req("write code", "u")).unwrap(), "default");
        assert!(matches!(
            b.complete(&req("please identify issues", "u")),
            Err(BackendError::RouteExhausted(_))
        ));
    }

    #[test]
    fn keyed_responses_win() {
        let r = req("s", "u");
        let b = ScriptedBackend::new(["queued"]).with_keyed(&r, "keyed");
        assert_eq!(b.complete(&r).unwrap(), "keyed");
        assert_eq!(b.complete(&r).unwrap(), "queued");
    }

    #[test]
    fn replay_mode_reports_unknown_requests() {
        let b = ScriptedBackend::replay(HashMap::new());
        let err = b.complete(&req("s", "hello")).unwrap_err();
        match err {
            BackendError::UnknownRequest { preview, .. } => assert_eq!(preview, "hello"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
