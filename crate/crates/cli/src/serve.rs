use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use clozer_core::bank::load_bank;
use clozer_service::Store;

use crate::exit::{runtime, usage, CmdResult, OrExit};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Question bank to serve (read-only).
    #[arg(long)]
    bank: PathBuf,
    /// Directory for sessions.jsonl and answers.jsonl.
    #[arg(long, env = "CLOZER_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

pub fn run(a: ServeArgs) -> CmdResult {
    if !a.bank.is_file() {
        return Err(usage(format!("bank {} does not exist", a.bank.display())));
    }
    let bank = load_bank(&a.bank).or_usage()?;
    let data_dir = crate::data_dir_arg(a.data_dir);
    let store = Arc::new(Store::open(bank, &data_dir).or_runtime()?);
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| usage(format!("invalid address {}:{}: {e}", a.host, a.port)))?;

    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .or_runtime()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| runtime(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().or_runtime()?;
        eprintln!(
            "serving {} question(s) on http://{local} (data in {})",
            store.bank().len(),
            data_dir.display()
        );
        clozer_service::serve(listener, store).await.or_runtime()
    })
}
