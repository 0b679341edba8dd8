//! Stdio session: a reader thread feeds lines to the analysis worker, and a
//! writer thread serializes every outbound message.

use std::io::{BufRead, Write};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{parse_client_line, ClientMessage, EngineMessage};
use super::session::Engine;

enum Inbound {
    Line(String),
    Eof,
}

/// Runs a session until the input closes. With virtual time the clock
/// starts at 0 and moves only on `advance` messages.
pub fn serve<R, W>(mut engine: Engine, input: R, output: W) -> std::io::Result<()>
where
    R: BufRead + Send + 'static,
    W: Write + Send + 'static,
{
    let (in_tx, in_rx) = mpsc::channel::<Inbound>();
    let (out_tx, out_rx) = mpsc::channel::<EngineMessage>();

    let reader = thread::spawn(move || {
        for line in input.lines() {
            match line {
                Ok(l) => {
                    if in_tx.send(Inbound::Line(l)).is_err() {
                        return;
                    }
                }
                Err(_) => break,
            }
        }
        let _ = in_tx.send(Inbound::Eof);
    });
    let writer = thread::spawn(move || -> std::io::Result<()> {
        let mut output = output;
        for msg in out_rx {
            writeln!(output, "{}", msg.to_line())?;
            output.flush()?;
        }
        Ok(())
    });

    let virtual_time = engine.config().virtual_time;
    let start = Instant::now();
    let mut vnow: u64 = 0;
    let clock = |vnow: u64| {
        if virtual_time {
            vnow
        } else {
            start.elapsed().as_millis() as u64
        }
    };
    let send = |msgs: Vec<EngineMessage>| {
        for m in msgs {
            let _ = out_tx.send(m);
        }
    };

    loop {
        let inbound = if virtual_time {
            in_rx.recv().unwrap_or(Inbound::Eof)
        } else {
            let wake = [engine.next_due(), engine.next_expiry()].into_iter().flatten().min();
            let wait = wake.map(|w| Duration::from_millis(w.saturating_sub(clock(vnow))));
            let got = match wait {
                Some(d) => in_rx.recv_timeout(d),
                None => in_rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
            };
            match got {
                Ok(i) => i,
                Err(RecvTimeoutError::Timeout) => {
                    send(engine.tick(clock(vnow)));
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => Inbound::Eof,
            }
        };
        let line = match inbound {
            Inbound::Line(l) => l,
            Inbound::Eof => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_client_line(&line) {
            Ok(ClientMessage::Advance { ms }) => {
                if virtual_time {
                    vnow = vnow.saturating_add(ms);
                } else {
                    send(vec![EngineMessage::error(None, "advance requires virtual time")]);
                }
            }
            Ok(msg) => send(engine.handle(msg, clock(vnow))),
            Err(e) => send(vec![EngineMessage::error(None, e.to_string())]),
        }
        send(engine.tick(clock(vnow)));
    }

    drop(out_tx);
    let _ = reader.join();
    writer.join().expect("writer thread")
}
