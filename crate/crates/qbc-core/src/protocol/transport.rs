//! Message transports: an in-process queue pair for same-world sessions and
//! a byte-stream adapter that frames messages through the wire codec.
//! Both are ordered, reliable and loss-free, matching the ideal-channel
//! assumption the protocol is analyzed under.

use std::collections::VecDeque;
use std::io::{BufReader, BufWriter};
use std::net::TcpStream;
use std::sync::{Arc, Mutex};

use super::{codec, Message, ProtocolError};

pub trait Transport {
    fn send(&mut self, msg: Message) -> Result<(), ProtocolError>;
    fn recv(&mut self) -> Result<Message, ProtocolError>;
}

/// One endpoint of an in-process FIFO pair. Sessions are strictly
/// turn-based, so a receive on an empty queue is a protocol bug, reported as
/// [`ProtocolError::TransportExhausted`] rather than blocking.
pub struct LocalPipe {
    incoming: Arc<Mutex<VecDeque<Message>>>,
    outgoing: Arc<Mutex<VecDeque<Message>>>,
}

impl LocalPipe {
    pub fn pair() -> (LocalPipe, LocalPipe) {
        let a_to_b = Arc::new(Mutex::new(VecDeque::new()));
        let b_to_a = Arc::new(Mutex::new(VecDeque::new()));
        (
            LocalPipe {
                incoming: b_to_a.clone(),
                outgoing: a_to_b.clone(),
            },
            LocalPipe {
                incoming: a_to_b,
                outgoing: b_to_a,
            },
        )
    }
}

impl Transport for LocalPipe {
    fn send(&mut self, msg: Message) -> Result<(), ProtocolError> {
        self.outgoing.lock().expect("pipe lock").push_back(msg);
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        self.incoming
            .lock()
            .expect("pipe lock")
            .pop_front()
            .ok_or(ProtocolError::TransportExhausted)
    }
}

/// A TCP endpoint speaking the frame format of [`codec`]. Only messages
/// with classically representable payloads can cross it.
pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpTransport {
    pub fn new(stream: TcpStream) -> Result<Self, ProtocolError> {
        let reader = BufReader::new(stream.try_clone()?);
        let writer = BufWriter::new(stream);
        Ok(Self { reader, writer })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, msg: Message) -> Result<(), ProtocolError> {
        codec::write_message(&mut self.writer, &msg)
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        codec::read_message(&mut self.reader)
    }
}
