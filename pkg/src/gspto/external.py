"""Line-protocol client for external black-box objectives.

The child process speaks a one-line-per-request protocol on its standard
streams: we send ``EVAL <d> <x1> ... <xd>\\n`` with decimal floats and it
answers either ``OK <v>\\n`` (scalar fitness) or ``LOGITS <k> <l1> ... <lk>\\n``
(classifier scores). Anything else is a protocol error carrying the raw line.
One request is in flight per handle, and a handle belongs to exactly one
trial at a time.
"""

from __future__ import annotations

import math
import select
import subprocess

import numpy as np

from .errors import ExternalObjectiveError, InvalidInputError
from .objectives import ObjectiveSpec


class ExternalScorer:
    """Owns one child process speaking the EVAL/OK/LOGITS protocol."""

    def __init__(self, command, timeout=10.0, cwd=None):
        self.command = list(command)
        self.timeout = float(timeout)
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
            cwd=cwd,
        )

    def _read_line(self) -> str:
        stdout = self._proc.stdout
        ready, _, _ = select.select([stdout], [], [], self.timeout)
        if not ready:
            raise ExternalObjectiveError(
                f"external objective timed out after {self.timeout:g}s"
            )
        line = stdout.readline()
        if line == "":
            raise ExternalObjectiveError("external objective closed its output stream")
        return line

    def evaluate(self, x):
        """Scalar fitness or logits vector for the point ``x``, unmodified."""
        if self._proc.poll() is not None:
            raise ExternalObjectiveError(
                f"external objective exited with code {self._proc.returncode}"
            )
        x = np.asarray(x, dtype=float)
        request = f"EVAL {x.shape[0]} " + " ".join(repr(float(v)) for v in x) + "\n"
        try:
            self._proc.stdin.write(request)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ExternalObjectiveError(f"external objective pipe broke: {exc}") from exc
        line = self._read_line()
        return self._parse(line)

    @staticmethod
    def _parse(line):
        tokens = line.strip().split()
        try:
            if tokens and tokens[0] == "OK" and len(tokens) == 2:
                value = float(tokens[1])
                if not math.isfinite(value):
                    raise ExternalObjectiveError("non-finite fitness", raw_line=line)
                return value
            if tokens and tokens[0] == "LOGITS" and len(tokens) >= 2:
                k = int(tokens[1])
                if k < 1 or len(tokens) != 2 + k:
                    raise ExternalObjectiveError("bad logits count", raw_line=line)
                values = np.array([float(t) for t in tokens[2:]], dtype=float)
                if not np.all(np.isfinite(values)):
                    raise ExternalObjectiveError("non-finite logits", raw_line=line)
                return values
        except ExternalObjectiveError:
            raise
        except ValueError:
            pass
        raise ExternalObjectiveError("malformed response", raw_line=line)

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def external_objective(scorer: ExternalScorer, dimension, box=math.inf, shift=0.0,
                       name="external") -> ObjectiveSpec:
    """Wrap a scalar-protocol scorer as an objective.

    A LOGITS response is an error here; compose classifier scorers with the
    attack loss instead.
    """
    if dimension < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {dimension}")

    def _eval(x):
        value = scorer.evaluate(x)
        if isinstance(value, np.ndarray):
            raise ExternalObjectiveError(
                "scalar objective got a LOGITS response; wrap it in an attack loss"
            )
        return value + shift

    return ObjectiveSpec(dimension=int(dimension), eval=_eval, box=box, name=name, shift=shift)
