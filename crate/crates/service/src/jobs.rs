use std::collections::BTreeMap;

use parking_lot::Mutex;
use serde::Serialize;
use serde_json::Value;

use adscribe_core::Timestamp;

use crate::error::ApiError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Ingest,
    Generate,
}

/// A background job as reported by `GET /jobs/{id}`.
#[derive(Clone, Debug, Serialize)]
pub struct Job {
    pub id: String,
    pub kind: JobKind,
    pub state: JobState,
    /// Fraction of work done, 0.0 to 1.0.
    pub progress: f64,
    pub result: Option<Value>,
    pub error: Option<ApiError>,
    pub created_at: Timestamp,
}

#[derive(Default)]
pub struct JobRegistry {
    jobs: Mutex<BTreeMap<String, Job>>,
}

impl JobRegistry {
    pub fn create(&self, kind: JobKind) -> String {
        let id = uuid::Uuid::new_v4().to_string();
        self.jobs.lock().insert(
            id.clone(),
            Job {
                id: id.clone(),
                kind,
                state: JobState::Queued,
                progress: 0.0,
                result: None,
                error: None,
                created_at: Timestamp::now(),
            },
        );
        id
    }

    pub fn get(&self, id: &str) -> Option<Job> {
        self.jobs.lock().get(id).cloned()
    }

    pub fn update(&self, id: &str, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.lock().get_mut(id) {
            f(job);
        }
    }

    pub fn start(&self, id: &str) {
        self.update(id, |j| j.state = JobState::Running);
    }

    pub fn progress(&self, id: &str, done: usize, total: usize) {
        let p = if total == 0 {
            1.0
        } else {
            done as f64 / total as f64
        };
        self.update(id, |j| j.progress = p);
    }

    pub fn finish(&self, id: &str, outcome: Result<Value, (ApiError, Option<Value>)>) {
        self.update(id, |j| match outcome {
            Ok(v) => {
                j.state = JobState::Done;
                j.progress = 1.0;
                j.result = Some(v);
            }
            Err((e, partial)) => {
                j.state = JobState::Failed;
                j.result = partial;
                j.error = Some(e);
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifecycle() {
        let r = JobRegistry::default();
        let id = r.create(JobKind::Generate);
        assert_eq!(r.get(&id).unwrap().state, JobState::Queued);
        r.start(&id);
        r.progress(&id, 1, 4);
        assert_eq!(r.get(&id).unwrap().progress, 0.25);
        r.finish(&id, Ok(Value::Null));
        let job = r.get(&id).unwrap();
        assert_eq!((job.state, job.progress), (JobState::Done, 1.0));
        let json = serde_json::to_value(&job).unwrap();
        assert_eq!(json["state"], "done");
        assert!(r.get("nope").is_none());
    }
}
