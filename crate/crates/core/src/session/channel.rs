//! Reliable ordered duplex frame channels: an in-process pair and TCP.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;

use thiserror::Error;

use super::codec::{check_length, decode_frame, encode_frame, CodecError, Frame};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("peer closed the channel{}", if *.partial_frame { " mid-frame" } else { "" })]
    PeerClosed { partial_frame: bool },
    #[error("could not connect to {address}: {source}")]
    Connect { address: String, source: io::Error },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub trait Channel {
    fn send(&mut self, frame: &Frame) -> Result<(), TransportError>;

    /// Blocks until a frame arrives or the peer goes away.
    fn receive(&mut self) -> Result<Frame, TransportError>;

    fn close(&mut self);
}

impl<C: Channel + ?Sized> Channel for Box<C> {
    fn send(&mut self, frame: &Frame) -> Result<(), TransportError> {
        (**self).send(frame)
    }

    fn receive(&mut self) -> Result<Frame, TransportError> {
        (**self).receive()
    }

    fn close(&mut self) {
        (**self).close()
    }
}

/// One end of an in-process channel. Frames travel encoded, so the codec's
/// limits apply exactly as they do on a socket.
#[derive(Debug)]
pub struct MemoryChannel {
    tx: Option<mpsc::Sender<Vec<u8>>>,
    rx: mpsc::Receiver<Vec<u8>>,
}

/// Two connected endpoints with unbounded buffering.
pub fn memory_channel_pair() -> (MemoryChannel, MemoryChannel) {
    let (tx_a, rx_b) = mpsc::channel();
    let (tx_b, rx_a) = mpsc::channel();
    (
        MemoryChannel {
            tx: Some(tx_a),
            rx: rx_a,
        },
        MemoryChannel {
            tx: Some(tx_b),
            rx: rx_b,
        },
    )
}

impl Channel for MemoryChannel {
    fn send(&mut self, frame: &Frame) -> Result<(), TransportError> {
        let bytes = encode_frame(frame)?;
        let tx = self.tx.as_ref().ok_or(TransportError::PeerClosed { partial_frame: false })?;
        tx.send(bytes)
            .map_err(|_| TransportError::PeerClosed { partial_frame: false })
    }

    fn receive(&mut self) -> Result<Frame, TransportError> {
        let bytes = self
            .rx
            .recv()
            .map_err(|_| TransportError::PeerClosed { partial_frame: false })?;
        let (frame, used) = decode_frame(&bytes)?;
        debug_assert_eq!(used, bytes.len());
        Ok(frame)
    }

    fn close(&mut self) {
        self.tx = None;
    }
}

#[derive(Debug)]
pub struct SocketChannel {
    stream: TcpStream,
}

/// Bound TCP listener that hands out one [`SocketChannel`] per accepted peer.
#[derive(Debug)]
pub struct SocketListener {
    listener: TcpListener,
}

impl SocketListener {
    pub fn bind(address: &str) -> Result<Self, TransportError> {
        Ok(SocketListener {
            listener: TcpListener::bind(address)?,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, TransportError> {
        Ok(self.listener.local_addr()?)
    }

    pub fn accept(&self) -> Result<SocketChannel, TransportError> {
        let (stream, _) = self.listener.accept()?;
        SocketChannel::from_stream(stream)
    }
}

impl SocketChannel {
    pub fn from_stream(stream: TcpStream) -> Result<Self, TransportError> {
        stream.set_nodelay(true)?;
        Ok(SocketChannel { stream })
    }

    /// Connects to `host:port`.
    pub fn dial(address: &str) -> Result<Self, TransportError> {
        let connect_err = |source| TransportError::Connect {
            address: address.to_string(),
            source,
        };
        let addrs: Vec<SocketAddr> = address.to_socket_addrs().map_err(connect_err)?.collect();
        let stream = TcpStream::connect(&addrs[..]).map_err(connect_err)?;
        Self::from_stream(stream)
    }

    /// Binds `host:port` and waits for a single peer.
    pub fn listen(address: &str) -> Result<Self, TransportError> {
        SocketListener::bind(address)?.accept()
    }

    /// Fills `buf`, reporting how many bytes arrived before EOF.
    fn read_full(&mut self, buf: &mut [u8]) -> Result<usize, TransportError> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.stream.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) if e.kind() == io::ErrorKind::ConnectionReset => break,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(filled)
    }
}

impl Channel for SocketChannel {
    fn send(&mut self, frame: &Frame) -> Result<(), TransportError> {
        let bytes = encode_frame(frame)?;
        self.stream.write_all(&bytes).map_err(|e| match e.kind() {
            io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset => {
                TransportError::PeerClosed { partial_frame: false }
            }
            _ => e.into(),
        })
    }

    fn receive(&mut self) -> Result<Frame, TransportError> {
        let mut header = [0u8; 4];
        match self.read_full(&mut header)? {
            4 => {}
            0 => return Err(TransportError::PeerClosed { partial_frame: false }),
            _ => return Err(TransportError::PeerClosed { partial_frame: true }),
        }
        let len = u32::from_be_bytes(header);
        check_length(len)?;
        let mut buf = vec![0u8; 4 + len as usize];
        buf[..4].copy_from_slice(&header);
        if self.read_full(&mut buf[4..])? < len as usize {
            return Err(TransportError::PeerClosed { partial_frame: true });
        }
        Ok(decode_frame(&buf)?.0)
    }

    fn close(&mut self) {
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}
