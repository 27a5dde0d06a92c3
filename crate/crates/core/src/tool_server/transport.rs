use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use super::{Session, SceneStore};

/// Serves one session over a line stream until `shutdown` or EOF.
/// Blank lines are ignored; every other line gets one response line.
pub fn run_session<R: BufRead, W: Write>(session: &mut Session, reader: R, mut writer: W) -> io::Result<()> {
    for line in reader.lines() {
        let line = match line {
            Ok(l) => l,
            // Non-UTF-8 input is still a request; answer it instead of dropping.
            Err(e) if e.kind() == io::ErrorKind::InvalidData => String::from("\u{fffd}"),
            Err(e) => return Err(e),
        };
        if line.trim().is_empty() {
            continue;
        }
        let response = session.handle_line(&line);
        writer.write_all(response.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

pub fn serve_stdio(store: Arc<SceneStore>) -> io::Result<()> {
    let mut session = Session::new(store);
    log::info!("stdio session {} started", session.id());
    let stdin = io::stdin();
    let stdout = io::stdout();
    run_session(&mut session, stdin.lock(), BufWriter::new(stdout.lock()))
}

fn handle_connection(stream: TcpStream, store: Arc<SceneStore>) {
    let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
    let mut session = Session::new(store);
    log::info!("session {} opened for {peer}", session.id());
    let result = stream
        .try_clone()
        .and_then(|read_half| run_session(&mut session, BufReader::new(read_half), BufWriter::new(stream)));
    match result {
        Ok(()) => log::info!("session {} closed ({} calls)", session.id(), session.trace().len()),
        Err(e) => log::warn!("session {} ended with transport error: {e}", session.id()),
    }
}

/// Accepts connections forever, one thread and one session per connection.
pub fn serve_tcp_listener(listener: TcpListener, store: Arc<SceneStore>) -> io::Result<()> {
    for stream in listener.incoming() {
        match stream {
            Ok(s) => {
                let store = Arc::clone(&store);
                thread::spawn(move || handle_connection(s, store));
            }
            Err(e) => log::warn!("accept failed: {e}"),
        }
    }
    Ok(())
}

pub fn serve_tcp(addr: impl ToSocketAddrs, store: Arc<SceneStore>) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    log::info!("listening on {}", listener.local_addr()?);
    serve_tcp_listener(listener, store)
}
