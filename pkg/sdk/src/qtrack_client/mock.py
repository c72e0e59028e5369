"""Mock quantum backend for running the tracking workflow without hardware.

The mock stands in for a vendor provider: it carries a deterministic
synthetic calibration set and samples measurement counts from a seeded RNG,
so the same (seed, circuit, shots) triple always reproduces the same result.
Counts always sum to the requested shot number. None of this claims physical
fidelity; it exists so demos and tests exercise the full logging path with
realistic-looking payloads.
"""

from __future__ import annotations

import hashlib
import random
import re
import uuid
from collections import Counter
from copy import deepcopy
from dataclasses import dataclass
from typing import Any

from qtrack_client.errors import ClientError

# Deterministic mock calibration ids: the same (seed, n_qubits) pair always
# names the same set.
_CALIBRATION_NAMESPACE = uuid.uuid5(uuid.NAMESPACE_URL, "qtrack-client:mock-calibration")

# Mock calibration timestamps start at 2025-01-01T00:00:00Z and spread over
# roughly 30 days, keeping payloads stable across runs of the same seed.
_EPOCH_MS = 1_735_689_600_000

_QUBIT_REF = re.compile(r"\[\s*(\d+)\s*\]")

# Widths above this would make the flip-outcome list silly for a mock.
_MAX_WIDTH = 12


def synthetic_calibration_data(seed: int, n_qubits: int) -> dict[str, Any]:
    """Vendor-shaped calibration payload for a mock device.

    Same (seed, n_qubits) yields an identical dict including its id. T1
    falls in [20, 200] us, T2 never exceeds 2*T1, and every fidelity lies
    in (0.90, 0.9999]. Single-qubit entries use the "prx" gate; two-qubit
    "cz" entries connect neighbours on a line.
    """
    if n_qubits < 1:
        raise ClientError(f"n_qubits must be >= 1 (got {n_qubits})")
    rng = random.Random(f"qtrack-client-mock:{seed}:{n_qubits}")
    timestamp = _EPOCH_MS + rng.randrange(30 * 24 * 3600 * 1000)

    qubits = []
    gates = []
    for i in range(n_qubits):
        t1 = round(rng.uniform(20.0, 200.0), 3)
        t2 = round(min(t1 * rng.uniform(0.5, 2.0), 2.0 * t1), 3)
        qubits.append(
            {
                "qubit_index": i,
                "t1_us": t1,
                "t2_us": t2,
                "readout_fidelity": round(rng.uniform(0.90, 0.9999), 6),
            }
        )
        gates.append(
            {
                "gate_name": "prx",
                "qubit_indices": [i],
                "fidelity": round(rng.uniform(0.98, 0.9999), 6),
            }
        )
    for i in range(n_qubits - 1):
        gates.append(
            {
                "gate_name": "cz",
                "qubit_indices": [i, i + 1],
                "fidelity": round(rng.uniform(0.90, 0.999), 6),
            }
        )

    return {
        "calibration_set_id": str(uuid.uuid5(_CALIBRATION_NAMESPACE, f"{seed}:{n_qubits}")),
        "device_name": f"mock-{n_qubits}q",
        "qubit_count": n_qubits,
        "timestamp": timestamp,
        "qubits": qubits,
        "gates": gates,
    }


@dataclass(frozen=True)
class _ResultEntry:
    calibration_set_id: str


class MockResult:
    """Execution result shaped like the vendor objects demo code expects.

    Exposes both ``get_counts()`` and a ``results`` list whose entries carry
    the calibration set id, so code written against a hardware result object
    runs against the mock unchanged.
    """

    def __init__(self, counts: dict[str, int], calibration_set_id: str):
        self._counts = dict(sorted(counts.items()))
        self.calibration_set_id = calibration_set_id
        self.results = [_ResultEntry(calibration_set_id)]

    def get_counts(self) -> dict[str, int]:
        return dict(self._counts)

    def __repr__(self) -> str:
        return f"MockResult(counts={self._counts!r}, calibration_set_id={self.calibration_set_id!r})"


def _circuit_width(circuit_text: str, n_qubits: int) -> int:
    """Register width implied by the circuit: highest index referenced + 1.

    Falls back to 2 when the text names no indices, and never exceeds the
    device size or the mock's sanity cap.
    """
    indices = [int(m.group(1)) for m in _QUBIT_REF.finditer(circuit_text)]
    width = max(indices) + 1 if indices else 2
    return max(1, min(width, n_qubits, _MAX_WIDTH))


class MockBackend:
    """Deterministic stand-in for a quantum device.

    Holds one current synthetic calibration set and samples GHZ-flavoured
    counts: most shots land on the all-zeros and all-ones strings, and a
    small remainder, scaled by the calibration's mean readout error, lands
    on single-bit-flip neighbours.
    """

    def __init__(self, seed: int, n_qubits: int):
        if n_qubits < 1:
            raise ClientError(f"n_qubits must be >= 1 (got {n_qubits})")
        self.seed = seed
        self.n_qubits = n_qubits
        self.name = f"mock-{n_qubits}q"
        self.calibration_data = synthetic_calibration_data(seed, n_qubits)
        self.calibration_set_id = self.calibration_data["calibration_set_id"]

    @property
    def client(self) -> "MockBackend":
        """The backend doubles as its own data-access client."""
        return self

    def run(self, circuit_text: str, shots: int) -> MockResult:
        """Sample counts for the circuit; the counts always sum to shots."""
        if not isinstance(shots, int) or isinstance(shots, bool) or shots < 1:
            raise ClientError(f"shots must be a positive integer (got {shots!r})")
        width = _circuit_width(circuit_text, self.n_qubits)
        digest = hashlib.sha256(" ".join(circuit_text.split()).encode("utf-8")).hexdigest()
        rng = random.Random(f"qtrack-client-run:{self.seed}:{digest}:{shots}")

        readouts = [q["readout_fidelity"] for q in self.calibration_data["qubits"][:width]]
        error = max(1.0 - sum(readouts) / len(readouts), 1e-4)
        zeros, ones = "0" * width, "1" * width
        flips = [zeros[:i] + "1" + zeros[i + 1 :] for i in range(width)]
        flips += [ones[:i] + "0" + ones[i + 1 :] for i in range(width)]
        outcomes = [zeros, ones, *dict.fromkeys(flips)]
        ideal = (1.0 - error) / 2
        weights = [ideal, ideal] + [error / (len(outcomes) - 2)] * (len(outcomes) - 2)

        counts = Counter(rng.choices(outcomes, weights=weights, k=shots))
        return MockResult(dict(counts), self.calibration_set_id)

    def __repr__(self) -> str:
        return f"MockBackend(seed={self.seed}, n_qubits={self.n_qubits})"


class MockProvider:
    """Drop-in for a vendor provider object: construct, then get_backend()."""

    def __init__(self, seed: int, n_qubits: int):
        self._backend = MockBackend(seed, n_qubits)

    def get_backend(self) -> MockBackend:
        return self._backend


def mock_backend(seed: int, n_qubits: int) -> MockBackend:
    """Shorthand for MockProvider(seed, n_qubits).get_backend()."""
    return MockBackend(seed, n_qubits)


def get_calibration_data(client: MockBackend, calibration_set_id: str) -> dict[str, Any]:
    """Fetch the calibration payload for an id from a backend's client.

    The mock holds exactly one current set; asking for any other id is an
    error, mirroring how a real lookup of a stale id would fail.
    """
    if not isinstance(client, MockBackend):
        raise ClientError(f"expected a mock backend client (got {type(client).__name__})")
    if calibration_set_id != client.calibration_set_id:
        raise ClientError(f"unknown calibration set id {calibration_set_id!r}")
    return deepcopy(client.calibration_data)


def plot_histogram(counts: dict[str, int]) -> Any:
    """Bar-chart figure of measurement counts, ordered by bitstring.

    Returns a matplotlib Figure built without pyplot, so no global state or
    GUI backend is touched; pass it to log_figure to store the rendered PNG.
    """
    from matplotlib.figure import Figure

    if not counts:
        raise ClientError("counts must be non-empty")
    keys = sorted(counts)
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    ax.bar(range(len(keys)), [counts[k] for k in keys], color="#4878a8")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=45 if len(keys) > 8 else 0, ha="right" if len(keys) > 8 else "center")
    ax.set_xlabel("outcome")
    ax.set_ylabel("counts")
    fig.tight_layout()
    return fig
