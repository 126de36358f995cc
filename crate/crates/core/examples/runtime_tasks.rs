//! Locales, remote allocation, task submission and one-sided copies.

use segrange::model::LocaleId;
use segrange::runtime::{current_locale, wait_all, Runtime};

fn main() -> segrange::Result<()> {
    let rt = Runtime::new(3)?;
    let tickets = rt
        .locales()
        .map(|l| rt.submit(l, move || format!("hello from {:?}", current_locale())))
        .collect::<segrange::Result<Vec<_>>>()?;
    for msg in wait_all(tickets).expect("tasks") {
        println!("{msg}");
    }

    let src = rt.allocate_from(LocaleId(0), (0..8).collect::<Vec<u32>>())?;
    let dst = rt.allocate::<u32>(LocaleId(2), 8)?;
    rt.copy_async(&src.slice(2..6)?, &dst.slice(0..4)?)?
        .into_result()
        .expect("copy task")?;
    println!("dst on locale 2: {:?}", dst.full().read()?.to_vec());
    println!("bytes on locale 2: {}", rt.allocated_bytes(LocaleId(2)));
    Ok(())
}
