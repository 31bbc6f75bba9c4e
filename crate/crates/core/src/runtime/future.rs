//! Waitable handle for an asynchronously executing task.

use std::sync::{Arc, Condvar, Mutex};

use super::DataRef;
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FutureState {
    Pending,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug)]
enum Slot {
    Pending,
    Running,
    Done(DataRef),
    Failed(String),
}

pub(crate) struct FutureInner {
    slot: Mutex<Slot>,
    cond: Condvar,
}

impl FutureInner {
    pub fn new() -> Self {
        Self {
            slot: Mutex::new(Slot::Pending),
            cond: Condvar::new(),
        }
    }

    pub fn set_running(&self) {
        let mut slot = self.slot.lock().unwrap();
        if matches!(*slot, Slot::Pending) {
            *slot = Slot::Running;
        }
    }

    pub fn set_done(&self, result: DataRef) {
        let mut slot = self.slot.lock().unwrap();
        debug_assert!(matches!(*slot, Slot::Pending | Slot::Running));
        *slot = Slot::Done(result);
        self.cond.notify_all();
    }

    pub fn set_failed(&self, cause: String) {
        let mut slot = self.slot.lock().unwrap();
        debug_assert!(matches!(*slot, Slot::Pending | Slot::Running));
        *slot = Slot::Failed(cause);
        self.cond.notify_all();
    }
}

/// Shareable, waitable handle; resolves exactly once.
#[derive(Clone)]
pub struct TaskFuture {
    task_id: u64,
    kind: String,
    inner: Arc<FutureInner>,
}

impl TaskFuture {
    pub(crate) fn new(task_id: u64, kind: String) -> (Self, Arc<FutureInner>) {
        let inner = Arc::new(FutureInner::new());
        (
            Self {
                task_id,
                kind,
                inner: inner.clone(),
            },
            inner,
        )
    }

    pub fn task_id(&self) -> u64 {
        self.task_id
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn state(&self) -> FutureState {
        match *self.inner.slot.lock().unwrap() {
            Slot::Pending => FutureState::Pending,
            Slot::Running => FutureState::Running,
            Slot::Done(_) => FutureState::Done,
            Slot::Failed(_) => FutureState::Failed,
        }
    }

    /// Block until the task reaches a terminal state.
    pub fn wait(&self) -> Result<DataRef, Error> {
        let mut slot = self.inner.slot.lock().unwrap();
        loop {
            match &*slot {
                Slot::Done(r) => return Ok(*r),
                Slot::Failed(cause) => {
                    return Err(Error::TaskFailed {
                        task_id: self.task_id,
                        kind: self.kind.clone(),
                        cause: cause.clone(),
                    })
                }
                _ => slot = self.inner.cond.wait(slot).unwrap(),
            }
        }
    }
}
