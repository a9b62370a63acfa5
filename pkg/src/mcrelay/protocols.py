"""Per-protocol interval schedules.

A schedule is a template: it says which information bit the source emits in
each interval, when the relay listens, when it re-emits what it heard, and
which interval's destination decision resolves which information bit.  The
realized bits come later (drawn by the engines); helpers here map realized
information bits onto per-interval emission sequences.

Timing conventions shared by both engines:
  full-duplex kinds run L+1 intervals, the relay re-emits with one interval
  of delay (nothing in interval 1) and the destination resolves bit j in
  interval j+1; half-duplex runs 2L intervals with the source on odd and the
  relay on even intervals; the direct baseline needs exactly L intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProtocolKind

__all__ = [
    "IntervalAction",
    "BitTimeline",
    "build_schedule",
    "relay_forward",
    "interval_source_bits",
    "relay_emission_intervals",
]


@dataclass(frozen=True)
class IntervalAction:
    j: int  # 1-based interval index
    source_emits_info: int | None  # info bit index emitted at start of j
    relay_emits_detected_from: int | None  # detection interval re-emitted at j
    relay_detects: bool
    destination_detects: bool
    info_bit_index: int | None  # info bit resolved by this interval's decision


@dataclass(frozen=True)
class BitTimeline:
    """Realized sequences for one run: source emissions per interval (w_s),
    relay emissions per interval (w_r), relay detections keyed by detection
    interval (hat_w_r), and destination decisions per information bit.
    """

    l_bits: int
    actions: tuple[IntervalAction, ...]
    w_s: np.ndarray
    w_r: np.ndarray
    hat_w_r: dict[int, int]
    hat_w_d: np.ndarray

    @property
    def num_intervals(self) -> int:
        return len(self.actions)


def build_schedule(kind: ProtocolKind, l_bits: int) -> tuple[IntervalAction, ...]:
    if l_bits < 1:
        raise ValueError("need at least one information bit")
    actions: list[IntervalAction] = []
    if kind is ProtocolKind.BASELINE:
        for j in range(1, l_bits + 1):
            actions.append(IntervalAction(
                j=j, source_emits_info=j, relay_emits_detected_from=None,
                relay_detects=False, destination_detects=True,
                info_bit_index=j))
    elif kind is ProtocolKind.HD:
        for i in range(1, l_bits + 1):
            actions.append(IntervalAction(
                j=2 * i - 1, source_emits_info=i,
                relay_emits_detected_from=None, relay_detects=True,
                destination_detects=False, info_bit_index=None))
            actions.append(IntervalAction(
                j=2 * i, source_emits_info=None,
                relay_emits_detected_from=2 * i - 1, relay_detects=False,
                destination_detects=True, info_bit_index=i))
    else:  # full-duplex kinds share one timing pattern
        for j in range(1, l_bits + 2):
            actions.append(IntervalAction(
                j=j,
                source_emits_info=j if j <= l_bits else None,
                relay_emits_detected_from=j - 1 if j >= 2 else None,
                relay_detects=j <= l_bits,
                destination_detects=j >= 2,
                info_bit_index=j - 1 if j >= 2 else None))
    return tuple(actions)


def relay_forward(detected_bit: int, kind: ProtocolKind) -> int:
    """Decode-and-forward with ON/OFF keying: re-emit the detected bit as-is.
    Before the first detection the relay has nothing to send (treated as 0
    by the schedule, not by this map).
    """
    if detected_bit not in (0, 1):
        raise ValueError(f"detected bit must be 0 or 1, got {detected_bit}")
    if not isinstance(kind, ProtocolKind):
        raise ValueError(f"unknown protocol kind {kind!r}")
    return detected_bit


def interval_source_bits(actions: tuple[IntervalAction, ...],
                         info_bits) -> np.ndarray:
    """Map realized information bits onto the per-interval source emission
    sequence W_S (0 where the schedule keeps the source silent).
    """
    info = np.asarray(info_bits)
    w_s = np.zeros(len(actions), dtype=np.int64)
    for a in actions:
        if a.source_emits_info is not None:
            w_s[a.j - 1] = info[a.source_emits_info - 1]
    return w_s


def relay_emission_intervals(actions: tuple[IntervalAction, ...]) -> np.ndarray:
    """1-based interval indices in which the relay emits (schedule order)."""
    return np.array([a.j for a in actions
                     if a.relay_emits_detected_from is not None], dtype=np.int64)
