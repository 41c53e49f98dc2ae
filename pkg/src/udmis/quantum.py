"""Desk-scale emulation of the neutral-atom annealing pipeline.

Builds the Rydberg Hamiltonian with the full 1/r^6 pairwise tail (all atom
pairs, not just graph edges, so interaction leakage is reproduced), evolves
the state vector under a piecewise-linear schedule with a fixed-step
fourth-order integrator, samples bitstrings, and models classical readout
errors with a per-qubit confusion channel plus its exact inverse.

Units: positions in micrometers, times in microseconds, Omega and delta in
rad/us.  Basis convention throughout: character ``i`` of a bitstring is
qubit/vertex ``i``, and basis index ``b`` has qubit 0 as the most
significant bit, so ``format(b, f"0{n}b")`` is the bitstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .graph import Graph, Instance, default_alpha, qubo_cost

# C6/h = 138 GHz um^6 for the Rydberg state used; angular units, rad/us * um^6.
C6_OVER_H_GHZ_UM6 = 138.0
C6_RAD_PER_US_UM6 = 2.0 * math.pi * C6_OVER_H_GHZ_UM6 * 1e3

STATEVECTOR_MAX_N = 22
MITIGATION_MAX_N = 20

# Default drive scales (artifact choices, not published values): the peak
# Rabi frequency sits well below the nearest-neighbor interaction at 5 um
# spacing (blockade regime), and the detuning sweeps symmetrically.
DEFAULT_OMEGA_MAX = 2.0 * math.pi * 2.0   # rad/us  (2 MHz)
DEFAULT_DELTA_MAX = 2.0 * math.pi * 4.0   # rad/us  (4 MHz)
DEFAULT_DURATION_US = 4.0
DEFAULT_DT_US = 5e-5

NORM_TOL = 1e-8


class EvolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear control fields Omega(t) and delta(t) over [0, T]."""

    duration_us: float
    omega_points: tuple[tuple[float, float], ...]
    delta_points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if self.duration_us <= 0:
            raise ValueError(f"duration must be positive, got {self.duration_us}")
        for name, pts in (("omega", self.omega_points), ("delta", self.delta_points)):
            if len(pts) < 2:
                raise ValueError(f"{name} needs at least two control points")
            ts = [t for t, _ in pts]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError(f"{name} times must be strictly increasing")
            if abs(ts[0]) > 1e-12 or abs(ts[-1] - self.duration_us) > 1e-12:
                raise ValueError(f"{name} must span 0..duration exactly")

    def omega_at(self, t: float) -> float:
        ts, vs = zip(*self.omega_points)
        return float(np.interp(t, ts, vs))

    def delta_at(self, t: float) -> float:
        ts, vs = zip(*self.delta_points)
        return float(np.interp(t, ts, vs))

    def check_anneal_profile(self) -> None:
        """Enforce the adiabatic-protocol shape: Omega vanishes at both ends
        and the detuning sweeps from negative to positive."""
        if abs(self.omega_points[0][1]) > 1e-12 or abs(self.omega_points[-1][1]) > 1e-12:
            raise ValueError("annealing schedule must have Omega(0) = Omega(T) = 0")
        if not (self.delta_points[0][1] < 0.0 < self.delta_points[-1][1]):
            raise ValueError("annealing schedule needs delta(0) < 0 < delta(T)")

    def to_json_dict(self) -> dict:
        return {
            "duration_us": self.duration_us,
            "omega": [[t, v] for t, v in self.omega_points],
            "delta": [[t, v] for t, v in self.delta_points],
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, object]) -> "Schedule":
        return cls(
            duration_us=float(obj["duration_us"]),  # type: ignore[arg-type]
            omega_points=tuple((float(t), float(v)) for t, v in obj["omega"]),  # type: ignore[union-attr]
            delta_points=tuple((float(t), float(v)) for t, v in obj["delta"]),  # type: ignore[union-attr]
        )


def default_schedule(
    duration_us: float = DEFAULT_DURATION_US,
    omega_max: float = DEFAULT_OMEGA_MAX,
    delta_min: float = -DEFAULT_DELTA_MAX,
    delta_max: float = DEFAULT_DELTA_MAX,
) -> Schedule:
    """Ramp-plateau-ramp Omega (plateau over the middle 60%) and linear delta."""
    t = duration_us
    return Schedule(
        duration_us=t,
        omega_points=((0.0, 0.0), (0.2 * t, omega_max), (0.8 * t, omega_max), (t, 0.0)),
        delta_points=((0.0, delta_min), (t, delta_max)),
    )


@dataclass(frozen=True)
class HamiltonianSpec:
    """Atom count, full pairwise interaction table, site weights, schedule."""

    n: int
    interactions: np.ndarray  # (n, n) symmetric, rad/us, zero diagonal
    site_weights: tuple[float, ...]  # epsilon_i in [0, 1]
    schedule: Schedule


def build_hamiltonian(inst: Instance, schedule: Schedule) -> HamiltonianSpec:
    """Interaction table U_ij = C6 / |r_i - r_j|^6 over all pairs, plus site
    weights from the graph weights normalized into [0, 1]."""
    if inst.positions is None:
        raise ValueError("hamiltonian construction needs atom positions")
    n = inst.n
    if n > STATEVECTOR_MAX_N:
        raise ValueError(
            f"state-vector emulation capped at n <= {STATEVECTOR_MAX_N}, got {n}; "
            "larger systems are out of scope"
        )
    pts = np.asarray(inst.positions, dtype=float)
    u = np.zeros((n, n), dtype=float)
    for i in range(n):
        for j in range(i + 1, n):
            d2 = float(np.sum((pts[i] - pts[j]) ** 2))
            if d2 <= 0:
                raise ValueError(f"atoms {i} and {j} coincide")
            u[i, j] = u[j, i] = C6_RAD_PER_US_UM6 / d2**3
    wmax = max(inst.graph.weights, default=0.0)
    eps = tuple(w / wmax if wmax > 0 else 0.0 for w in inst.graph.weights)
    return HamiltonianSpec(n=n, interactions=u, site_weights=eps, schedule=schedule)


def _diag_vectors(spec: HamiltonianSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-basis-state weight sum and interaction sum (qubit 0 = MSB)."""
    n = spec.n
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    bits = [((idx >> (n - 1 - i)) & 1).astype(np.uint8) for i in range(n)]
    eps_vec = np.zeros(dim, dtype=np.float64)
    for i, e in enumerate(spec.site_weights):
        if e != 0.0:
            eps_vec += e * bits[i]
    u_vec = np.zeros(dim, dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            uij = spec.interactions[i, j]
            if uij != 0.0:
                u_vec += uij * (bits[i] & bits[j])
    return eps_vec, u_vec


def _flip_operator(n: int) -> sp.csr_matrix:
    """Sparse sum of single-qubit bit flips (sum_i sigma_x^i) on 2^n states."""
    dim = 1 << n
    rows = np.repeat(np.arange(dim, dtype=np.int64), n)
    flips = np.array([1 << (n - 1 - i) for i in range(n)], dtype=np.int64)
    cols = (np.arange(dim, dtype=np.int64)[:, None] ^ flips[None, :]).ravel()
    data = np.ones(dim * n, dtype=np.float64)
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def evolve(spec: HamiltonianSpec, dt: float = DEFAULT_DT_US) -> np.ndarray:
    """Integrate the Schrodinger equation from |0...0> to the final state.

    Classic fourth-order Runge-Kutta with a fixed step (the step is snapped
    so an integer number of steps covers the duration exactly); fixed-step
    keeps the result bit-reproducible for a given (spec, dt).  Raises
    EvolveError if the norm drifts beyond tolerance.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = spec.n
    dim = 1 << n
    duration = spec.schedule.duration_us
    steps = max(1, int(round(duration / dt)))
    h = duration / steps

    eps_vec, u_vec = _diag_vectors(spec)

    # one sparse matvec per drive application below n=17; above that the CSR
    # operator gets too large, so fall back to axis flips on a tensor view
    if n <= 16:
        flip = _flip_operator(n)

        def apply_flip(state: np.ndarray) -> np.ndarray:
            return flip @ state
    else:
        shape = (2,) * n

        def apply_flip(state: np.ndarray) -> np.ndarray:
            m = state.reshape(shape)
            acc = np.zeros(shape, dtype=state.dtype)
            for axis in range(n):
                acc += np.flip(m, axis=axis)
            return acc.reshape(-1)

    ts_o, vs_o = zip(*spec.schedule.omega_points)
    ts_d, vs_d = zip(*spec.schedule.delta_points)

    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0

    def deriv(t: float, state: np.ndarray) -> np.ndarray:
        om = np.interp(t, ts_o, vs_o)
        de = np.interp(t, ts_d, vs_d)
        hpsi = (0.5 * om) * apply_flip(state) + (u_vec - de * eps_vec) * state
        return -1j * hpsi

    check_every = max(1, steps // 64)
    for k in range(steps):
        t = k * h
        k1 = deriv(t, psi)
        k2 = deriv(t + 0.5 * h, psi + (0.5 * h) * k1)
        k3 = deriv(t + 0.5 * h, psi + (0.5 * h) * k2)
        k4 = deriv(t + h, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % check_every == 0 or k + 1 == steps:
            drift = abs(float(np.vdot(psi, psi).real) - 1.0)
            if drift > NORM_TOL:
                raise EvolveError(
                    f"norm drifted by {drift:.3e} (> {NORM_TOL:g}) at t = "
                    f"{(k + 1) * h:.4f} us; reduce dt"
                )
    return psi


@dataclass(frozen=True)
class SampleSet:
    """Multiset of measured bitstrings."""

    counts: Mapping[str, int]
    total_shots: int

    def __post_init__(self) -> None:
        total = sum(self.counts.values())
        if total != self.total_shots:
            raise ValueError(
                f"counts sum to {total} but total_shots is {self.total_shots}"
            )
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("counts must be nonnegative")

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "SampleSet":
        return cls(counts=dict(counts), total_shots=sum(counts.values()))

    @property
    def n(self) -> int:
        return len(next(iter(self.counts)))

    def items_sorted(self) -> list[tuple[str, int]]:
        return sorted(self.counts.items())

    def to_json_dict(self) -> dict:
        return {"shots": self.total_shots, "counts": dict(self.items_sorted())}

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, object]) -> "SampleSet":
        counts = {str(k): int(v) for k, v in obj["counts"].items()}  # type: ignore[union-attr]
        return cls(counts=counts, total_shots=int(obj["shots"]))  # type: ignore[arg-type]


def sample(state: np.ndarray, n_shots: int, seed: int) -> SampleSet:
    """Projective sampling: i.i.d. draws from the Born distribution."""
    probs = np.abs(np.asarray(state)) ** 2
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"state is not normalized (sum of |amp|^2 = {total})")
    return sample_distribution(probs / total, n_shots, seed)


def sample_distribution(probs: np.ndarray, n_shots: int, seed: int) -> SampleSet:
    """Seeded i.i.d. draws from a probability vector over basis states."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    dim = len(probs)
    n = int(round(math.log2(dim)))
    if 1 << n != dim:
        raise ValueError(f"distribution length {dim} is not a power of two")
    rng = np.random.default_rng(seed)
    draws = rng.choice(dim, size=n_shots, p=np.asarray(probs, dtype=float))
    idx, cnt = np.unique(draws, return_counts=True)
    counts = {format(int(b), f"0{n}b"): int(c) for b, c in zip(idx, cnt)}
    return SampleSet(counts=counts, total_shots=n_shots)


@dataclass(frozen=True)
class NoiseModel:
    """Classical per-qubit readout confusion: false-positive p, false-negative q."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p < 1.0 and 0.0 <= self.q < 1.0):
            raise ValueError(f"p and q must be in [0, 1), got p={self.p}, q={self.q}")
        if self.p + self.q >= 1.0:
            raise ValueError(
                f"p + q = {self.p + self.q} >= 1 makes the channel singular"
            )

    @property
    def confusion(self) -> np.ndarray:
        """Column-stochastic single-qubit channel: measured <- true."""
        return np.array([[1.0 - self.p, self.q], [self.p, 1.0 - self.q]])

    @property
    def correction(self) -> np.ndarray:
        """Exact inverse of the confusion matrix."""
        denom = 1.0 - self.p - self.q
        return (1.0 / denom) * np.array(
            [[1.0 - self.q, -self.q], [-self.p, 1.0 - self.p]]
        )


def _apply_single_qubit(dist: np.ndarray, mat: np.ndarray) -> np.ndarray:
    n = int(round(math.log2(len(dist))))
    if 1 << n != len(dist):
        raise ValueError(f"distribution length {len(dist)} is not a power of two")
    if n > MITIGATION_MAX_N:
        raise ValueError(f"full-vector channel capped at n <= {MITIGATION_MAX_N}")
    arr = np.asarray(dist, dtype=float).reshape((2,) * n)
    for axis in range(n):
        arr = np.moveaxis(np.tensordot(mat, arr, axes=([1], [axis])), 0, axis)
    return arr.reshape(-1)


def apply_readout_noise(dist: np.ndarray, nm: NoiseModel) -> np.ndarray:
    """Push a probability vector through the per-qubit confusion channel."""
    total = float(np.sum(dist))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {total}, expected 1")
    return _apply_single_qubit(np.asarray(dist, dtype=float), nm.confusion)


def mitigate_readout(
    dist: np.ndarray, nm: NoiseModel
) -> tuple[np.ndarray, np.ndarray]:
    """Apply the per-qubit correction matrix.

    Returns the raw quasi-probability vector (may contain negative entries)
    and a clipped-at-zero, renormalized distribution.
    """
    quasi = _apply_single_qubit(np.asarray(dist, dtype=float), nm.correction)
    clipped = np.clip(quasi, 0.0, None)
    clipped = clipped / clipped.sum()
    return quasi, clipped


def _repair_one(bits_mask: int, g: Graph) -> int:
    """Make one selection independent, then greedily extend it to maximal.

    Removal loop: among endpoints of violated edges, drop the vertex with
    the most violated incident edges; ties go to the lowest weight, then the
    highest index (so the lowest-indexed vertex survives).  Augmentation adds
    vertices by weight descending, index ascending.
    """
    masks = g.neighbor_masks
    w = g.weights
    sel = bits_mask
    while True:
        worst_v = -1
        worst_key: tuple[float, float, int] | None = None
        scan = sel
        while scan:
            lsb = scan & -scan
            scan ^= lsb
            v = lsb.bit_length() - 1
            viol = (masks[v] & sel).bit_count()
            if viol == 0:
                continue
            key = (float(viol), -w[v], v)
            if worst_key is None or key > worst_key:
                worst_key = key
                worst_v = v
        if worst_v < 0:
            break
        sel &= ~(1 << worst_v)
    for v in sorted(range(g.n), key=lambda u: (-w[u], u)):
        b = 1 << v
        if not sel & b and not masks[v] & sel:
            sel |= b
    return sel


def repair_bitstrings(samples: SampleSet, g: Graph) -> SampleSet:
    """Repair every sampled string into a maximal independent set.

    Counts are carried over per input string; strings repairing to the same
    output are merged.
    """
    out: dict[str, int] = {}
    cache: dict[str, str] = {}
    n = g.n
    for s, c in samples.items_sorted():
        if len(s) != n:
            raise ValueError(f"bitstring length {len(s)} != vertex count {n}")
        fixed = cache.get(s)
        if fixed is None:
            mask = 0
            for i, ch in enumerate(s):
                if ch == "1":
                    mask |= 1 << i
            repaired = _repair_one(mask, g)
            fixed = "".join("1" if repaired >> i & 1 else "0" for i in range(n))
            cache[s] = fixed
        out[fixed] = out.get(fixed, 0) + c
    return SampleSet(counts=out, total_shots=samples.total_shots)


def bitstring_cost(s: str, g: Graph, alpha: Optional[float] = None) -> float:
    return qubo_cost(g, [int(c) for c in s], alpha if alpha is not None else default_alpha(g))
