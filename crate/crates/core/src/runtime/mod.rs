//! Single-process runtime simulating `P` memory locales.
//!
//! Each locale owns a compute worker and a copy engine, both fed by FIFO
//! queues. Tasks submitted to one locale run in submission order; tasks on
//! different locales run concurrently. Asynchronous copies run on the copy
//! engines so compute tasks may wait on them without stalling their own queue.

mod storage;

use std::any::Any;
use std::cell::Cell;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicU8, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle, ThreadId};

use storage::Registry;
pub use storage::{
    copy_from_host, copy_slices, copy_to_host, ElementRef, HandleSlice, SliceRead, SliceWrite, StorageHandle, StorageId,
};

use crate::error::{AggregateError, Error, Result, TaskError};
use crate::model::LocaleId;

/// Environment variable overriding the default locale count.
pub const LOCALES_ENV: &str = "SEGRANGE_LOCALES";

const MAX_DEFAULT_LOCALES: usize = 16;

/// Locale count from `SEGRANGE_LOCALES`, else the number of hardware threads
/// capped at 16.
pub fn default_locale_count() -> usize {
    std::env::var(LOCALES_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
                .min(MAX_DEFAULT_LOCALES)
        })
}

/// How worker threads are placed on CPUs.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum Binding {
    /// Let the OS schedule workers freely.
    #[default]
    Unbound,
    /// Pin locale `i`'s workers to CPU `i mod ncpu` (Linux only; elsewhere a no-op).
    Pinned,
}

/// Zip construction policy for non-aligned segmented inputs.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum ZipMode {
    /// Non-aligned zips are realigned into overlapping chunks.
    #[default]
    Relaxed,
    /// Non-aligned zips are rejected.
    Strict,
}

#[derive(Clone, Debug)]
pub struct RuntimeConfig {
    pub locales: usize,
    pub binding: Binding,
    pub zip_mode: ZipMode,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            locales: default_locale_count(),
            binding: Binding::Unbound,
            zip_mode: ZipMode::Relaxed,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum QueueKind {
    Compute,
    Copy,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct QueueTag {
    runtime: usize,
    locale: LocaleId,
    kind: QueueKind,
}

thread_local! {
    static CURRENT_QUEUE: Cell<Option<QueueTag>> = const { Cell::new(None) };
}

/// Locale whose compute worker is running the calling code, if any.
pub fn current_locale() -> Option<LocaleId> {
    CURRENT_QUEUE.with(|c| c.get().filter(|t| t.kind == QueueKind::Compute).map(|t| t.locale))
}

type Job = Box<dyn FnOnce() + Send + 'static>;

struct Worker {
    sender: Mutex<Option<Sender<Job>>>,
    thread: Mutex<Option<JoinHandle<()>>>,
    thread_id: ThreadId,
}

impl Worker {
    fn spawn(tag: QueueTag, binding: Binding) -> Result<Worker> {
        let (tx, rx) = mpsc::channel::<Job>();
        let name = match tag.kind {
            QueueKind::Compute => format!("locale-{}", tag.locale),
            QueueKind::Copy => format!("locale-{}-copy", tag.locale),
        };
        let handle = thread::Builder::new()
            .name(name)
            .spawn(move || {
                if binding == Binding::Pinned {
                    pin_current_thread(tag.locale.0);
                }
                CURRENT_QUEUE.with(|c| c.set(Some(tag)));
                while let Ok(job) = rx.recv() {
                    job();
                }
            })
            .map_err(|e| Error::RuntimeInit(e.to_string()))?;
        Ok(Worker {
            sender: Mutex::new(Some(tx)),
            thread_id: handle.thread().id(),
            thread: Mutex::new(Some(handle)),
        })
    }

    fn send(&self, job: Job) -> bool {
        match &*self.sender.lock().unwrap() {
            Some(tx) => tx.send(job).is_ok(),
            None => false,
        }
    }

    fn shutdown(&self) {
        self.sender.lock().unwrap().take();
        if thread::current().id() == self.thread_id {
            // Last runtime reference dropped inside one of its own tasks; the
            // thread exits on its own once the queue drains.
            return;
        }
        if let Some(handle) = self.thread.lock().unwrap().take() {
            let _ = handle.join();
        }
    }
}

#[cfg(target_os = "linux")]
fn pin_current_thread(index: usize) {
    let cpus = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    // SAFETY: cpu_set_t is plain data; sched_setaffinity(0, ..) targets the
    // calling thread and only reads the set.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(index % cpus, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set);
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_current_thread(_index: usize) {}

struct Locale {
    compute: Worker,
    copy: Worker,
}

struct RuntimeInner {
    id: usize,
    locales: Vec<Locale>,
    registry: Arc<Registry>,
    zip_mode: AtomicU8,
}

impl Drop for RuntimeInner {
    fn drop(&mut self) {
        for locale in &self.locales {
            locale.compute.shutdown();
            locale.copy.shutdown();
        }
    }
}

static NEXT_RUNTIME_ID: AtomicUsize = AtomicUsize::new(1);

/// Handle to a running set of simulated locales. Cheap to clone.
#[derive(Clone)]
pub struct Runtime {
    inner: Arc<RuntimeInner>,
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime")
            .field("id", &self.inner.id)
            .field("locales", &self.inner.locales.len())
            .finish()
    }
}

impl Runtime {
    pub fn new(locales: usize) -> Result<Runtime> {
        Self::with_config(RuntimeConfig {
            locales,
            ..RuntimeConfig::default()
        })
    }

    /// Runtime sized by [`default_locale_count`].
    pub fn from_env() -> Result<Runtime> {
        Self::with_config(RuntimeConfig::default())
    }

    pub fn with_config(config: RuntimeConfig) -> Result<Runtime> {
        if config.locales == 0 {
            return Err(Error::RuntimeInit("locale count must be at least 1".into()));
        }
        let id = NEXT_RUNTIME_ID.fetch_add(1, Ordering::Relaxed);
        let mut locales = Vec::with_capacity(config.locales);
        for i in 0..config.locales {
            let tag = |kind| QueueTag {
                runtime: id,
                locale: LocaleId(i),
                kind,
            };
            locales.push(Locale {
                compute: Worker::spawn(tag(QueueKind::Compute), config.binding)?,
                copy: Worker::spawn(tag(QueueKind::Copy), config.binding)?,
            });
        }
        Ok(Runtime {
            inner: Arc::new(RuntimeInner {
                id,
                registry: Arc::new(Registry::new(config.locales)),
                locales,
                zip_mode: AtomicU8::new(encode_mode(config.zip_mode)),
            }),
        })
    }

    pub fn locale_count(&self) -> usize {
        self.inner.locales.len()
    }

    pub fn locales(&self) -> impl Iterator<Item = LocaleId> {
        (0..self.locale_count()).map(LocaleId)
    }

    pub fn zip_mode(&self) -> ZipMode {
        match self.inner.zip_mode.load(Ordering::Relaxed) {
            1 => ZipMode::Strict,
            _ => ZipMode::Relaxed,
        }
    }

    pub fn set_zip_mode(&self, mode: ZipMode) {
        self.inner.zip_mode.store(encode_mode(mode), Ordering::Relaxed);
    }

    pub fn same_runtime(&self, other: &Runtime) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    fn check_locale(&self, locale: LocaleId) -> Result<()> {
        if locale.0 < self.locale_count() {
            Ok(())
        } else {
            Err(Error::InvalidLocale {
                locale,
                count: self.locale_count(),
            })
        }
    }

    /// Zero-initialised (`T::default()`) block on `locale`.
    pub fn allocate<T: Default + Clone>(&self, locale: LocaleId, len: usize) -> Result<StorageHandle<T>> {
        self.allocate_with(locale, len, T::default())
    }

    pub fn allocate_with<T: Clone>(&self, locale: LocaleId, len: usize, value: T) -> Result<StorageHandle<T>> {
        self.check_locale(locale)?;
        let bytes = len.saturating_mul(std::mem::size_of::<T>());
        let mut data = Vec::new();
        data.try_reserve_exact(len).map_err(|_| Error::OutOfMemory { bytes })?;
        data.resize(len, value);
        Ok(StorageHandle::new(
            Some(locale),
            data,
            Some(Arc::clone(&self.inner.registry)),
        ))
    }

    /// Moves `data` into a block owned by `locale`.
    pub fn allocate_from<T>(&self, locale: LocaleId, data: Vec<T>) -> Result<StorageHandle<T>> {
        self.check_locale(locale)?;
        Ok(StorageHandle::new(
            Some(locale),
            data,
            Some(Arc::clone(&self.inner.registry)),
        ))
    }

    pub fn allocated_bytes(&self, locale: LocaleId) -> usize {
        self.inner.registry.bytes(locale)
    }

    pub fn live_allocations(&self, locale: LocaleId) -> usize {
        self.inner.registry.live(locale)
    }

    /// Runs `task` on `locale`'s compute worker. A panic inside the task is
    /// reported through the ticket.
    pub fn submit<R, F>(&self, locale: LocaleId, task: F) -> Result<Ticket<R>>
    where
        F: FnOnce() -> R + Send + 'static,
        R: Send + 'static,
    {
        self.enqueue(locale, QueueKind::Compute, task)
    }

    /// Runs `task` on `locale`'s copy engine.
    pub(crate) fn submit_copy<R, F>(&self, locale: LocaleId, task: F) -> Result<Ticket<R>>
    where
        F: FnOnce() -> R + Send + 'static,
        R: Send + 'static,
    {
        self.enqueue(locale, QueueKind::Copy, task)
    }

    fn enqueue<R, F>(&self, locale: LocaleId, kind: QueueKind, task: F) -> Result<Ticket<R>>
    where
        F: FnOnce() -> R + Send + 'static,
        R: Send + 'static,
    {
        self.check_locale(locale)?;
        let (tx, rx) = mpsc::sync_channel(1);
        let job: Job = Box::new(move || {
            let outcome = panic::catch_unwind(AssertUnwindSafe(task)).map_err(|payload| TaskError::Panicked {
                locale,
                message: panic_message(payload),
            });
            let _ = tx.send(outcome);
        });
        let l = &self.inner.locales[locale.0];
        let worker = match kind {
            QueueKind::Compute => &l.compute,
            QueueKind::Copy => &l.copy,
        };
        if !worker.send(job) {
            return Err(TaskError::Lost(locale).into());
        }
        Ok(Ticket {
            locale,
            origin: Some(QueueTag {
                runtime: self.inner.id,
                locale,
                kind,
            }),
            state: TicketState::Pending(rx),
        })
    }

    /// Synchronous copy between two storage slices.
    pub fn copy<T: Clone>(&self, src: &HandleSlice<T>, dst: &HandleSlice<T>) -> Result<()> {
        copy_slices(src, dst)
    }

    /// Asynchronous copy, executed by the copy engine of the destination's
    /// locale (or the source's, or locale 0 for driver memory on both ends).
    /// Lengths are checked before anything is queued.
    pub fn copy_async<T>(&self, src: &HandleSlice<T>, dst: &HandleSlice<T>) -> Result<Ticket<Result<()>>>
    where
        T: Clone + Send + Sync + 'static,
    {
        if src.len() != dst.len() {
            return Err(Error::LengthMismatch {
                expected: dst.len(),
                found: src.len(),
            });
        }
        let engine = dst.locale().or(src.locale()).unwrap_or(LocaleId(0));
        let (src, dst) = (src.clone(), dst.clone());
        self.submit_copy(engine, move || copy_slices(&src, &dst))
    }
}

fn encode_mode(mode: ZipMode) -> u8 {
    match mode {
        ZipMode::Relaxed => 0,
        ZipMode::Strict => 1,
    }
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

enum TicketState<R> {
    Pending(Receiver<std::result::Result<R, TaskError>>),
    Done(std::result::Result<R, TaskError>),
}

/// Completion token for a submitted task.
///
/// Waiting twice is allowed and returns the cached outcome.
pub struct Ticket<R> {
    locale: LocaleId,
    origin: Option<QueueTag>,
    state: TicketState<R>,
}

impl<R> Ticket<R> {
    /// An already-resolved ticket.
    pub fn ready(locale: LocaleId, value: R) -> Self {
        Ticket {
            locale,
            origin: None,
            state: TicketState::Done(Ok(value)),
        }
    }

    pub fn locale(&self) -> LocaleId {
        self.locale
    }

    pub fn is_finished(&mut self) -> bool {
        if let TicketState::Pending(rx) = &self.state {
            match rx.try_recv() {
                Ok(outcome) => self.state = TicketState::Done(outcome),
                Err(mpsc::TryRecvError::Empty) => return false,
                Err(mpsc::TryRecvError::Disconnected) => {
                    self.state = TicketState::Done(Err(TaskError::Lost(self.locale)))
                }
            }
        }
        true
    }

    fn resolve(&mut self) {
        if let TicketState::Pending(rx) = &self.state {
            let own_queue = CURRENT_QUEUE.with(|c| c.get()) == self.origin;
            let outcome = if own_queue {
                // Only fails if the task has not already run.
                rx.try_recv()
                    .map_err(|_| TaskError::WouldDeadlock(self.locale))
                    .and_then(|r| r)
            } else {
                rx.recv().unwrap_or(Err(TaskError::Lost(self.locale)))
            };
            self.state = TicketState::Done(outcome);
        }
    }

    /// Blocks until the task finishes.
    pub fn wait(&mut self) -> std::result::Result<&R, TaskError> {
        self.resolve();
        match &self.state {
            TicketState::Done(Ok(v)) => Ok(v),
            TicketState::Done(Err(e)) => Err(e.clone()),
            TicketState::Pending(_) => unreachable!("resolve leaves no pending state"),
        }
    }

    pub fn into_result(mut self) -> std::result::Result<R, TaskError> {
        self.resolve();
        match self.state {
            TicketState::Done(outcome) => outcome,
            TicketState::Pending(_) => unreachable!("resolve leaves no pending state"),
        }
    }
}

/// Waits for every ticket and returns results in ticket order. All failures
/// are reported, not just the first.
pub fn wait_all<R, I>(tickets: I) -> std::result::Result<Vec<R>, AggregateError>
where
    I: IntoIterator<Item = Ticket<R>>,
{
    let mut values = Vec::new();
    let mut failures = Vec::new();
    for (i, ticket) in tickets.into_iter().enumerate() {
        match ticket.into_result() {
            Ok(v) => values.push(v),
            Err(e) => failures.push((i, e)),
        }
    }
    if failures.is_empty() {
        Ok(values)
    } else {
        Err(AggregateError { failures })
    }
}

/// [`wait_all`] for tasks that return `Result`; task-level errors are folded
/// into the aggregate alongside panics.
pub fn wait_all_ok<R, I>(tickets: I) -> Result<Vec<R>>
where
    I: IntoIterator<Item = Ticket<Result<R>>>,
{
    let mut values = Vec::new();
    let mut failures = Vec::new();
    for (i, ticket) in tickets.into_iter().enumerate() {
        let locale = ticket.locale();
        match ticket.into_result() {
            Ok(Ok(v)) => values.push(v),
            Ok(Err(e)) => failures.push((
                i,
                TaskError::Failed {
                    locale,
                    source: Arc::new(e),
                },
            )),
            Err(e) => failures.push((i, e)),
        }
    }
    if failures.is_empty() {
        Ok(values)
    } else {
        Err(AggregateError { failures }.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;
    use std::time::Duration;

    #[test]
    fn submit_and_wait() {
        let rt = Runtime::new(2).unwrap();
        let mut t = rt.submit(LocaleId(0), || 42).unwrap();
        assert_eq!(*t.wait().unwrap(), 42);
        // Cached second wait.
        assert_eq!(*t.wait().unwrap(), 42);
    }

    #[test]
    fn invalid_locale() {
        let rt = Runtime::new(2).unwrap();
        assert!(matches!(
            rt.submit(LocaleId(2), || ()),
            Err(Error::InvalidLocale { .. })
        ));
        assert!(rt.allocate::<u8>(LocaleId(2), 4).is_err());
        assert!(Runtime::new(0).is_err());
    }

    #[test]
    fn panic_is_reported_and_runtime_survives() {
        let rt = Runtime::new(2).unwrap();
        let bad = rt.submit(LocaleId(1), || -> u32 { panic!("boom") }).unwrap();
        let good = rt.submit(LocaleId(1), || 7u32).unwrap();
        let err = wait_all(vec![good, bad]).unwrap_err();
        assert_eq!(err.failures.len(), 1);
        assert_eq!(err.failures[0].0, 1);
        assert!(err.to_string().contains("boom"));
        assert_eq!(rt.submit(LocaleId(1), || 1).unwrap().into_result().unwrap(), 1);
    }

    #[test]
    fn fifo_per_locale() {
        let rt = Runtime::new(3).unwrap();
        let log = Arc::new(Mutex::new(Vec::new()));
        let tickets: Vec<_> = (0..50)
            .map(|i| {
                let log = Arc::clone(&log);
                rt.submit(LocaleId(1), move || {
                    if i % 7 == 0 {
                        thread::sleep(Duration::from_micros(200));
                    }
                    log.lock().unwrap().push(i);
                })
                .unwrap()
            })
            .collect();
        wait_all(tickets).unwrap();
        assert_eq!(*log.lock().unwrap(), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn wait_all_preserves_submission_order() {
        let rt = Runtime::new(2).unwrap();
        let slow = rt
            .submit(LocaleId(0), || {
                thread::sleep(Duration::from_millis(20));
                1
            })
            .unwrap();
        let fast = rt.submit(LocaleId(1), || 2).unwrap();
        assert_eq!(wait_all(vec![slow, fast]).unwrap(), vec![1, 2]);
        assert!(wait_all(Vec::<Ticket<u8>>::new()).unwrap().is_empty());
    }

    #[test]
    fn waiting_on_own_queue_is_detected() {
        let rt = Runtime::new(1).unwrap();
        let inner = rt.clone();
        let outcome = rt
            .submit(LocaleId(0), move || {
                let t = inner.submit(LocaleId(0), || 5).unwrap();
                t.into_result()
            })
            .unwrap()
            .into_result()
            .unwrap();
        assert!(matches!(outcome, Err(TaskError::WouldDeadlock(_))));
    }

    #[test]
    fn current_locale_inside_tasks() {
        let rt = Runtime::new(3).unwrap();
        assert_eq!(current_locale(), None);
        let seen = rt.submit(LocaleId(2), current_locale).unwrap().into_result().unwrap();
        assert_eq!(seen, Some(LocaleId(2)));
    }

    #[test]
    fn allocation_accounting() {
        let rt = Runtime::new(3).unwrap();
        let h = rt.allocate::<u64>(LocaleId(2), 1000).unwrap();
        assert_eq!(h.locale(), Some(LocaleId(2)));
        assert_eq!(rt.allocated_bytes(LocaleId(2)), 8000);
        assert_eq!(rt.live_allocations(LocaleId(2)), 1);
        let empty = rt.allocate::<u64>(LocaleId(0), 0).unwrap();
        assert!(empty.is_empty());
        h.free().unwrap();
        assert_eq!(rt.allocated_bytes(LocaleId(2)), 0);
        drop(h);
        assert_eq!(rt.live_allocations(LocaleId(2)), 0);
        drop(empty);
        assert_eq!(rt.live_allocations(LocaleId(0)), 0);
    }

    #[test]
    fn async_copy_matches_sync_copy() {
        let rt = Runtime::new(2).unwrap();
        let n = 1_000_000;
        let src = rt.allocate_from(LocaleId(0), (0..n as u64).collect()).unwrap();
        let a = rt.allocate::<u64>(LocaleId(1), n).unwrap();
        let b = rt.allocate::<u64>(LocaleId(1), n).unwrap();
        rt.copy(&src.full(), &a.full()).unwrap();
        rt.copy_async(&src.full(), &b.full())
            .unwrap()
            .into_result()
            .unwrap()
            .unwrap();
        assert_eq!(&*a.full().read().unwrap(), &*src.full().read().unwrap());
        assert_eq!(&*b.full().read().unwrap(), &*src.full().read().unwrap());
        let short = rt.allocate::<u64>(LocaleId(1), 3).unwrap();
        assert!(rt.copy_async(&src.full(), &short.full()).is_err());
    }

    #[test]
    fn tasks_on_distinct_locales_overlap() {
        let rt = Runtime::new(2).unwrap();
        let gate = Arc::new(AtomicUsize::new(0));
        let spin = |gate: Arc<AtomicUsize>| {
            move || {
                gate.fetch_add(1, Ordering::SeqCst);
                while gate.load(Ordering::SeqCst) < 2 {
                    thread::yield_now();
                }
            }
        };
        let a = rt.submit(LocaleId(0), spin(Arc::clone(&gate))).unwrap();
        let b = rt.submit(LocaleId(1), spin(Arc::clone(&gate))).unwrap();
        wait_all(vec![a, b]).unwrap();
    }
}
