use crate::error::Result;
use crate::model::LocaleId;
use crate::runtime::{wait_all_ok, Runtime, Ticket};

/// Runs each job on its locale's compute worker and collects the results in
/// job order. Jobs without a locale, or without a runtime, run inline on the
/// calling thread once the others are queued.
pub(crate) fn run_jobs<J, R>(runtime: Option<&Runtime>, jobs: Vec<(Option<LocaleId>, J)>) -> Result<Vec<R>>
where
    J: FnOnce() -> Result<R> + Send + 'static,
    R: Send + 'static,
{
    let mut tickets: Vec<Option<Ticket<Result<R>>>> = Vec::with_capacity(jobs.len());
    let mut inline = Vec::new();
    for (locale, job) in jobs {
        match (runtime, locale) {
            (Some(rt), Some(locale)) => tickets.push(Some(rt.submit(locale, job)?)),
            _ => {
                inline.push((tickets.len(), job));
                tickets.push(None);
            }
        }
    }
    for (index, job) in inline {
        tickets[index] = Some(Ticket::ready(LocaleId(0), job()));
    }
    wait_all_ok(tickets.into_iter().map(|t| t.expect("every job has a ticket")))
}
