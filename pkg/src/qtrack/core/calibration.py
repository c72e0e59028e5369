"""Calibration-set diffing and synthetic fixture generation."""

from __future__ import annotations

import random
import uuid

from qtrack.core.records import (
    CalibrationDiff,
    CalibrationSet,
    GateDelta,
    GateFidelity,
    QubitCalibration,
    QubitDelta,
)
from qtrack.errors import InvalidParameterError

# Namespace for deterministic fixture ids: regenerating with the same
# (seed, n_qubits) always yields the same calibration_set_id.
_FIXTURE_NAMESPACE = uuid.uuid5(uuid.NAMESPACE_URL, "qtrack:synthetic-calibration")

# Fixture timestamps start at 2025-01-01T00:00:00Z and spread over ~30 days.
_FIXTURE_EPOCH_MS = 1_735_689_600_000


def diff_calibration(base: CalibrationSet, other: CalibrationSet) -> CalibrationDiff:
    """Per-qubit and per-gate deltas of ``other`` relative to ``base``.

    Deltas are ``other - base`` over indices present in both sets; indices
    only in ``other`` are reported as added, only in ``base`` as removed.
    Gate entries are matched on (gate_name, qubit_indices). Antisymmetric:
    swapping the arguments negates every delta and swaps added/removed.
    """
    base_qubits = {q.qubit_index: q for q in base.qubits}
    other_qubits = {q.qubit_index: q for q in other.qubits}

    qubit_deltas = tuple(
        QubitDelta(
            qubit_index=i,
            d_t1_us=other_qubits[i].t1_us - base_qubits[i].t1_us,
            d_t2_us=other_qubits[i].t2_us - base_qubits[i].t2_us,
            d_readout_fidelity=other_qubits[i].readout_fidelity - base_qubits[i].readout_fidelity,
        )
        for i in sorted(base_qubits.keys() & other_qubits.keys())
    )

    base_gates = {(g.gate_name, g.qubit_indices): g for g in base.gates}
    other_gates = {(g.gate_name, g.qubit_indices): g for g in other.gates}
    gate_deltas = tuple(
        GateDelta(
            gate_name=name,
            qubit_indices=indices,
            d_fidelity=other_gates[(name, indices)].fidelity - base_gates[(name, indices)].fidelity,
        )
        for name, indices in sorted(base_gates.keys() & other_gates.keys())
    )

    return CalibrationDiff(
        base_id=base.calibration_set_id,
        other_id=other.calibration_set_id,
        qubit_deltas=qubit_deltas,
        gate_deltas=gate_deltas,
        added_qubits=tuple(sorted(other_qubits.keys() - base_qubits.keys())),
        removed_qubits=tuple(sorted(base_qubits.keys() - other_qubits.keys())),
    )


def generate_synthetic_calibration(seed: int, n_qubits: int) -> CalibrationSet:
    """Deterministic desk-scale stand-in for a vendor calibration payload.

    Same (seed, n_qubits) yields a structurally identical set, including
    its id. T1 falls in [20, 200] us, T2 never exceeds 2*T1, and all
    fidelities lie in [0.90, 0.9999]. Single-qubit entries use the "prx"
    gate; two-qubit "cz" entries connect neighbours on a line.
    """
    if n_qubits < 1:
        raise InvalidParameterError(f"n_qubits must be >= 1 (got {n_qubits})")
    rng = random.Random(f"qtrack-calibration:{seed}:{n_qubits}")
    timestamp = _FIXTURE_EPOCH_MS + rng.randrange(30 * 24 * 3600 * 1000)

    qubits: list[QubitCalibration] = []
    gates: list[GateFidelity] = []
    for i in range(n_qubits):
        t1 = round(rng.uniform(20.0, 200.0), 3)
        # Cap against the rounded t1; round() is monotone, so the rounded
        # t2 can never exceed 2*t1.
        t2 = round(min(t1 * rng.uniform(0.5, 2.0), 2.0 * t1), 3)
        qubits.append(
            QubitCalibration(
                qubit_index=i,
                t1_us=t1,
                t2_us=t2,
                readout_fidelity=round(rng.uniform(0.90, 0.9999), 6),
            )
        )
        gates.append(
            GateFidelity(
                gate_name="prx",
                qubit_indices=(i,),
                fidelity=round(rng.uniform(0.98, 0.9999), 6),
            )
        )
    for i in range(n_qubits - 1):
        gates.append(
            GateFidelity(
                gate_name="cz",
                qubit_indices=(i, i + 1),
                fidelity=round(rng.uniform(0.90, 0.999), 6),
            )
        )

    return CalibrationSet(
        calibration_set_id=str(uuid.uuid5(_FIXTURE_NAMESPACE, f"{seed}:{n_qubits}")),
        device_name=f"synthetic-{n_qubits}q",
        qubit_count=n_qubits,
        timestamp=timestamp,
        qubits=tuple(qubits),
        gates=tuple(gates),
    )
