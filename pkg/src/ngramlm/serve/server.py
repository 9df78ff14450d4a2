"""TCP shard server: read-only, many concurrent connections."""

from __future__ import annotations

import signal
import socketserver
import threading

from ..errors import BindFailure
from . import codec
from .store import ShardStore


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        store: ShardStore = self.server.store  # type: ignore[attr-defined]
        sock = self.request
        while True:
            try:
                frame = codec.read_frame(sock)
            except (ConnectionError, OSError):
                return
            if frame is None:
                return
            msg_type, payload = frame
            if msg_type == codec.MSG_HELLO:
                if payload[0] != codec.PROTOCOL_VERSION:
                    sock.sendall(
                        codec.encode_error(
                            f"protocol version {payload[0]} unsupported"
                        )
                    )
                    return
                sock.sendall(codec.encode_hello_ok(store.entry_count()))
            elif msg_type == codec.MSG_GET:
                ngrams = codec.decode_ngrams(payload)
                sock.sendall(codec.encode_entries([store.get(g) for g in ngrams]))
            elif msg_type == codec.MSG_HEALTH:
                sock.sendall(codec.encode_health_ok(store.entry_count()))
            else:
                sock.sendall(codec.encode_error(f"unknown message type {msg_type}"))


class _Server(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class ShardServer:
    """Running server handle; shuts down gracefully on request."""

    def __init__(self, store: ShardStore, host: str, port: int):
        try:
            self._server = _Server((host, port), _Handler)
        except OSError as exc:
            raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
        self._server.store = store  # type: ignore[attr-defined]
        self.store = store
        self._thread: threading.Thread | None = None

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> "ShardServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def install_signal_handlers(self) -> None:
        for sig in (signal.SIGINT, signal.SIGTERM):
            signal.signal(sig, lambda *_: self.shutdown())


def serve_shard(store: ShardStore, endpoint: str) -> ShardServer:
    """Start serving ``store`` on ``host:port`` in a background thread.

    Port 0 binds an ephemeral port; read the actual one back off
    ``.endpoint``.
    """
    host, _, port = endpoint.rpartition(":")
    return ShardServer(store, host or "127.0.0.1", int(port)).start()
