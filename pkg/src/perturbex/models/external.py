"""Adapter for an external prediction process speaking the line protocol.

Request: a header line ``PREDICT <count> <width>`` followed by count lines of
width tab-separated decimal values. Response: count lines with one decimal
prediction each, then a line ``OK``. Anything else is a ProtocolError.

The child process is a single-lane resource: one request is in flight at a
time, enforced with a lock. Purity is the process's obligation; the adapter
spot-checks it once by replaying a duplicated row and comparing results.
"""

from __future__ import annotations

import subprocess
import threading
from typing import Sequence

import numpy as np

from ..errors import ProcessExit, ProtocolError
from .base import PredictorModel, fingerprint_params


class ExternalModel(PredictorModel):
    def __init__(self, command: Sequence[str], purity_probe: bool = True):
        self.command = list(command)
        self.model_id = fingerprint_params("external", {"command": self.command})
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None
        self._probe_pending = purity_probe

    def _process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            if self._proc is not None:
                raise ProcessExit(
                    f"external model exited with code {self._proc.returncode}"
                )
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._proc

    def _roundtrip(self, X: np.ndarray) -> np.ndarray:
        proc = self._process()
        n, width = X.shape
        lines = [f"PREDICT {n} {width}"]
        for row in X:
            lines.append("\t".join(repr(float(v)) for v in row))
        try:
            proc.stdin.write("\n".join(lines) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise ProcessExit(
                f"external model exited with code {proc.poll()}"
            ) from None
        out = np.empty(n)
        for i in range(n):
            line = proc.stdout.readline()
            if line == "":
                raise ProcessExit(
                    f"external model closed its output after {i} of {n} predictions"
                )
            text = line.strip()
            if text == "OK":
                raise ProtocolError(f"expected {n} predictions, got {i} before OK")
            try:
                out[i] = float(text)
            except ValueError:
                raise ProtocolError(f"malformed prediction line {text!r}") from None
        tail = proc.stdout.readline()
        if tail == "":
            raise ProcessExit("external model closed its output before the OK line")
        if tail.strip() != "OK":
            raise ProtocolError(f"expected OK terminator, got {tail.strip()!r}")
        return out

    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] == 0:
            return np.zeros(0)
        with self._lock:
            out = self._roundtrip(X)
            if self._probe_pending:
                self._probe_pending = False
                probe = self._roundtrip(np.vstack([X[:1], X[:1]]))
                if not (probe[0] == probe[1] == out[0]):
                    raise ProtocolError(
                        "external model is not pure: identical rows produced "
                        f"{probe[0]!r}, {probe[1]!r}, {out[0]!r}"
                    )
        return out

    def close(self) -> None:
        with self._lock:
            if self._proc is not None and self._proc.poll() is None:
                self._proc.stdin.close()
                try:
                    self._proc.wait(timeout=5)
                except subprocess.TimeoutExpired:
                    self._proc.kill()
                    self._proc.wait()

    def __enter__(self) -> "ExternalModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def external_model(command: Sequence[str], purity_probe: bool = True) -> ExternalModel:
    """PredictorModel backed by a child process speaking the line protocol."""
    return ExternalModel(command, purity_probe=purity_probe)
