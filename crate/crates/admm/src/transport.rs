//! Delivery of boundary messages between regions.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use log::{debug, warn};

use crate::message::{decode_body, encode, Frame, FrameType, Message, WireError, HUB};

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("message from iteration {got} arrived during iteration {expected}")]
    Stale { expected: u64, got: u64 },
    #[error("region {sender} is not an end of tie {tie}")]
    UnknownRoute { sender: u32, tie: u32 },
    #[error("protocol violation: {0}")]
    Protocol(String),
}

/// Who sits at the two ends of each tie.
#[derive(Debug, Clone, PartialEq)]
pub struct Routes {
    /// Region ids in coordinator order.
    pub regions: Vec<u32>,
    /// `(from region, to region)` per tie.
    pub ties: Vec<(u32, u32)>,
}

impl Routes {
    pub fn from_partition(p: &gridopt_partition::Partition) -> Self {
        Self {
            regions: p.regions.iter().map(|r| r.region).collect(),
            ties: p.ties.iter().map(|t| t.regions).collect(),
        }
    }

    /// Region position of the receiver of a message.
    pub fn receiver(&self, sender: u32, tie: u32) -> Result<usize, TransportError> {
        let (a, b) = *self.ties.get(tie as usize).ok_or(TransportError::UnknownRoute { sender, tie })?;
        let to = if sender == a {
            b
        } else if sender == b {
            a
        } else {
            return Err(TransportError::UnknownRoute { sender, tie });
        };
        self.regions
            .iter()
            .position(|&r| r == to)
            .ok_or(TransportError::UnknownRoute { sender, tie })
    }

    fn position(&self, region: u32) -> Option<usize> {
        self.regions.iter().position(|&r| r == region)
    }
}

/// Bulk-synchronous exchange: every call is one barrier.
pub trait Transport: Send {
    /// Delivers `outgoing` and returns the inbox of every region, by region
    /// position, sorted by tie and class.
    fn exchange(&mut self, iteration: u64, outgoing: Vec<Message>) -> Result<Vec<Vec<Message>>, TransportError>;

    /// Ends the session.
    fn finish(&mut self, _converged: bool) -> Result<(), TransportError> {
        Ok(())
    }
}

fn sort_inbox(inbox: &mut [Message]) {
    inbox.sort_by_key(|m| (m.tie, m.class as u8));
}

/// Direct hand-over inside one process.
#[derive(Debug, Clone)]
pub struct InProcTransport {
    routes: Routes,
}

impl InProcTransport {
    pub fn new(routes: Routes) -> Self {
        Self { routes }
    }
}

impl Transport for InProcTransport {
    fn exchange(&mut self, iteration: u64, outgoing: Vec<Message>) -> Result<Vec<Vec<Message>>, TransportError> {
        let mut inboxes = vec![Vec::new(); self.routes.regions.len()];
        for m in outgoing {
            if m.iteration != iteration {
                return Err(TransportError::Stale { expected: iteration, got: m.iteration });
            }
            let to = self.routes.receiver(m.sender, m.tie)?;
            inboxes[to].push(m);
        }
        for inbox in &mut inboxes {
            sort_inbox(inbox);
        }
        Ok(inboxes)
    }
}

fn write_frame(stream: &mut TcpStream, frame: &Frame) -> Result<Vec<u8>, TransportError> {
    let bytes = encode(frame)?;
    stream.write_all(&bytes)?;
    Ok(bytes)
}

/// Reads one frame; returns it with its raw bytes.
fn read_frame(stream: &mut TcpStream) -> Result<(Frame, Vec<u8>), TransportError> {
    let mut len = [0u8; 4];
    stream.read_exact(&mut len)?;
    let n = u32::from_le_bytes(len) as usize;
    let mut raw = vec![0u8; 4 + n];
    raw[..4].copy_from_slice(&len);
    stream.read_exact(&mut raw[4..])?;
    let frame = decode_body(&raw[4..])?;
    Ok((frame, raw))
}

/// Length-prefixed frames over TCP: one stream per region, relayed by a hub
/// thread that enforces iteration tags and the barrier.
pub struct SocketTransport {
    routes: Routes,
    clients: Vec<TcpStream>,
    hub: Option<JoinHandle<Result<(), TransportError>>>,
    captured: Arc<Mutex<Vec<Vec<u8>>>>,
}

impl SocketTransport {
    /// Starts a hub on a loopback port and connects one client per region.
    pub fn connect(routes: Routes) -> Result<Self, TransportError> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let captured = Arc::new(Mutex::new(Vec::new()));
        let hub_routes = routes.clone();
        let hub_capture = Arc::clone(&captured);
        let hub = std::thread::spawn(move || run_hub(listener, hub_routes, hub_capture));
        let mut clients = Vec::with_capacity(routes.regions.len());
        for &region in &routes.regions {
            let mut s = TcpStream::connect(addr)?;
            s.set_nodelay(true)?;
            write_frame(&mut s, &Frame::control(FrameType::Hello, 0, region))?;
            let (reply, _) = read_frame(&mut s)?;
            if reply.kind != FrameType::Hello {
                return Err(TransportError::Protocol(format!("expected hello, got {:?}", reply.kind)));
            }
            clients.push(s);
        }
        debug!("socket transport connected {} regions via {addr}", clients.len());
        Ok(Self { routes, clients, hub: Some(hub), captured })
    }

    /// Raw bytes of every message frame the hub has relayed so far.
    pub fn captured(&self) -> Vec<Vec<u8>> {
        self.captured.lock().expect("capture lock").clone()
    }

    fn shutdown(&mut self, kind: FrameType) -> Result<(), TransportError> {
        let Some(hub) = self.hub.take() else { return Ok(()) };
        for (k, s) in self.clients.iter_mut().enumerate() {
            let _ = write_frame(s, &Frame::control(kind, 0, self.routes.regions[k]));
        }
        match hub.join() {
            Ok(r) => r,
            Err(_) => Err(TransportError::Protocol("hub thread panicked".into())),
        }
    }
}

impl Transport for SocketTransport {
    fn exchange(&mut self, iteration: u64, outgoing: Vec<Message>) -> Result<Vec<Vec<Message>>, TransportError> {
        let n = self.clients.len();
        let mut by_sender: Vec<Vec<Message>> = vec![Vec::new(); n];
        for m in outgoing {
            let k = self.routes.position(m.sender).ok_or(TransportError::UnknownRoute { sender: m.sender, tie: m.tie })?;
            by_sender[k].push(m);
        }
        for (k, s) in self.clients.iter_mut().enumerate() {
            let (start, _) = read_frame(s)?;
            match start.kind {
                FrameType::Start if start.iteration == iteration => {}
                FrameType::Start => return Err(TransportError::Stale { expected: iteration, got: start.iteration }),
                other => return Err(TransportError::Protocol(format!("expected start, got {other:?}"))),
            }
            for m in &by_sender[k] {
                write_frame(s, &Frame::from_message(m))?;
            }
            write_frame(s, &Frame::control(FrameType::BarrierAck, iteration, self.routes.regions[k]))?;
        }
        let mut inboxes = Vec::with_capacity(n);
        for s in &mut self.clients {
            let mut inbox = Vec::new();
            loop {
                let (f, _) = read_frame(s)?;
                match f.kind {
                    FrameType::Message => {
                        if f.iteration != iteration {
                            return Err(TransportError::Stale { expected: iteration, got: f.iteration });
                        }
                        inbox.push(f.into_message().expect("message frame"));
                    }
                    FrameType::BarrierAck => break,
                    FrameType::Abort => return Err(TransportError::Protocol("hub aborted".into())),
                    other => return Err(TransportError::Protocol(format!("unexpected {other:?} frame"))),
                }
            }
            sort_inbox(&mut inbox);
            inboxes.push(inbox);
        }
        Ok(inboxes)
    }

    fn finish(&mut self, converged: bool) -> Result<(), TransportError> {
        self.shutdown(if converged { FrameType::Converged } else { FrameType::Abort })
    }
}

impl Drop for SocketTransport {
    fn drop(&mut self) {
        if self.hub.is_some() {
            if let Err(e) = self.shutdown(FrameType::Abort) {
                warn!("socket transport shutdown: {e}");
            }
        }
    }
}

fn run_hub(listener: TcpListener, routes: Routes, captured: Arc<Mutex<Vec<Vec<u8>>>>) -> Result<(), TransportError> {
    let n = routes.regions.len();
    let mut streams: Vec<Option<TcpStream>> = (0..n).map(|_| None).collect();
    for _ in 0..n {
        let (mut s, _) = listener.accept()?;
        s.set_nodelay(true)?;
        let (hello, _) = read_frame(&mut s)?;
        let k = routes
            .position(hello.sender)
            .filter(|_| hello.kind == FrameType::Hello)
            .ok_or_else(|| TransportError::Protocol(format!("bad hello from {}", hello.sender)))?;
        write_frame(&mut s, &Frame::control(FrameType::Hello, 0, HUB))?;
        streams[k] = Some(s);
    }
    let mut streams: Vec<TcpStream> = streams.into_iter().map(|s| s.expect("every region connected")).collect();

    let abort_all = |streams: &mut [TcpStream], iteration: u64| {
        for s in streams.iter_mut() {
            let _ = write_frame(s, &Frame::control(FrameType::Abort, iteration, HUB));
        }
    };
    let mut iteration = 1u64;
    loop {
        for s in &mut streams {
            write_frame(s, &Frame::control(FrameType::Start, iteration, HUB))?;
        }
        let mut relay: Vec<Vec<Frame>> = vec![Vec::new(); n];
        for k in 0..n {
            loop {
                let (f, raw) = read_frame(&mut streams[k])?;
                match f.kind {
                    FrameType::Message => {
                        if f.iteration != iteration || f.sender != routes.regions[k] {
                            abort_all(&mut streams, iteration);
                            return Err(TransportError::Stale { expected: iteration, got: f.iteration });
                        }
                        let to = match routes.receiver(f.sender, f.tie) {
                            Ok(to) => to,
                            Err(e) => {
                                abort_all(&mut streams, iteration);
                                return Err(e);
                            }
                        };
                        captured.lock().expect("capture lock").push(raw);
                        relay[to].push(f);
                    }
                    FrameType::BarrierAck if f.iteration == iteration => break,
                    FrameType::Converged | FrameType::Abort => return Ok(()),
                    other => {
                        abort_all(&mut streams, iteration);
                        return Err(TransportError::Protocol(format!("hub got {other:?} during iteration {iteration}")));
                    }
                }
            }
        }
        for (k, frames) in relay.into_iter().enumerate() {
            for f in &frames {
                write_frame(&mut streams[k], f)?;
            }
            write_frame(&mut streams[k], &Frame::control(FrameType::BarrierAck, iteration, HUB))?;
        }
        iteration += 1;
    }
}
