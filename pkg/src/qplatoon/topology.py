"""Communication topologies between the head vehicle and its followers.

Followers are indexed ``1..N`` in the literature; arrays here are 0-based,
so row ``i`` of the adjacency matrix belongs to follower ``i + 1``.  An
entry ``adjacency[i, j] = 1`` means follower ``i+1`` receives the state of
follower ``j+1``.  ``pinning[i] = 1`` means follower ``i+1`` receives the
head vehicle's state directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .numerics import Spectrum, eigenvalues

__all__ = [
    "TopologyKind",
    "CommTopology",
    "ValidationReport",
    "build_standard",
    "from_arrays",
    "validate",
    "laplacian_plus_pinning",
]


class TopologyKind(str, Enum):
    BD = "BD"
    BDL = "BDL"
    PF = "PF"
    PLF = "PLF"
    TPF = "TPF"
    TPLF = "TPLF"


@dataclass(frozen=True, eq=False)
class CommTopology:
    """Follower adjacency ``M`` and leader pinning vector ``s``."""

    adjacency: np.ndarray
    pinning: np.ndarray
    kind: TopologyKind | None = None

    def __post_init__(self):
        m = np.array(self.adjacency, dtype=float, ndmin=2)
        s = np.array(self.pinning, dtype=float).reshape(-1)
        if m.shape != (s.size, s.size):
            raise ConfigurationError(
                f"adjacency shape {m.shape} does not match pinning length {s.size}"
            )
        if s.size < 1:
            raise ConfigurationError("topology needs at least one follower")
        if not np.all(np.isin(m, (0.0, 1.0))) or not np.all(np.isin(s, (0.0, 1.0))):
            raise ConfigurationError("adjacency and pinning entries must be 0 or 1")
        if np.any(np.diag(m) != 0.0):
            raise ConfigurationError("adjacency must have a zero diagonal")
        m.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "adjacency", m)
        object.__setattr__(self, "pinning", s)

    @property
    def n_followers(self):
        return self.pinning.size

    @property
    def laplacian(self):
        m = self.adjacency
        return np.diag(m.sum(axis=1)) - m

    @property
    def pinning_matrix(self):
        return np.diag(self.pinning)

    def neighbors(self, i):
        """0-based indices of followers that follower ``i`` listens to."""
        return [int(j) for j in np.flatnonzero(self.adjacency[i])]

    def to_dict(self):
        if self.kind is not None:
            return {"kind": self.kind.value, "n": self.n_followers}
        return {
            "adjacency": self.adjacency.astype(int).tolist(),
            "pinning": self.pinning.astype(int).tolist(),
        }

    def __eq__(self, other):
        if not isinstance(other, CommTopology):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency) and np.array_equal(
            self.pinning, other.pinning
        )

    def __hash__(self):
        return hash((self.adjacency.tobytes(), self.pinning.tobytes()))


def build_standard(kind, n):
    """Build one of the six named topologies for ``n`` followers.

    BD/BDL link each follower to its immediate neighbours in both
    directions; PF/PLF listen to the predecessor; TPF/TPLF listen to the
    two predecessors.  The ``*L`` variants pin every follower to the
    leader.  In TPF the leader stands in for the missing predecessors of
    followers 1 and 2, so both are pinned.
    """
    kind = TopologyKind(kind)
    n = int(n)
    if n < 1:
        raise ConfigurationError(f"number of followers must be >= 1, got {n}")
    m = np.zeros((n, n))
    s = np.zeros(n)
    for i in range(n):
        if kind in (TopologyKind.BD, TopologyKind.BDL):
            if i > 0:
                m[i, i - 1] = 1
            if i < n - 1:
                m[i, i + 1] = 1
        else:
            if i > 0:
                m[i, i - 1] = 1
            if kind in (TopologyKind.TPF, TopologyKind.TPLF) and i > 1:
                m[i, i - 2] = 1
    s[0] = 1
    if kind is TopologyKind.TPF and n > 1:
        s[1] = 1
    if kind in (TopologyKind.BDL, TopologyKind.PLF, TopologyKind.TPLF):
        s[:] = 1
    return CommTopology(m, s, kind)


def from_arrays(adjacency, pinning):
    """Build a custom topology and reject it unless it validates."""
    topo = CommTopology(adjacency, pinning)
    report = validate(topo)
    if not report.passed:
        raise ConfigurationError("invalid topology: " + "; ".join(report.failures))
    return topo


@dataclass(frozen=True)
class ValidationReport:
    reachable: tuple
    has_pinned: bool
    spectrum: Spectrum | None
    spectrum_real_positive: bool
    failures: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return not self.failures


def _reachable_from_leader(topo):
    n = topo.n_followers
    seen = [bool(x) for x in topo.pinning]
    queue = deque(i for i in range(n) if seen[i])
    # edge (i, j) carries information j -> i
    listeners = [np.flatnonzero(topo.adjacency[:, j]) for j in range(n)]
    while queue:
        j = queue.popleft()
        for i in listeners[j]:
            if not seen[i]:
                seen[i] = True
                queue.append(int(i))
    return tuple(seen)


def validate(topo):
    """Check leader reachability and the spectral condition on ``L + S``."""
    failures = []
    has_pinned = bool(topo.pinning.any())
    if not has_pinned:
        failures.append("no follower is pinned to the leader")
    reach = _reachable_from_leader(topo)
    missing = [i + 1 for i, ok in enumerate(reach) if not ok]
    if missing:
        failures.append(f"followers {missing} are not reachable from the leader")
    spec = eigenvalues(topo.laplacian + topo.pinning_matrix, "L+S")
    ok_spec = spec.all_real and bool(spec.real[0] > 0.0)
    if not spec.all_real:
        failures.append("L+S has complex eigenvalues")
    elif not ok_spec:
        failures.append(f"L+S has a non-positive eigenvalue {spec.real[0]:.3g}")
    return ValidationReport(reach, has_pinned, spec, ok_spec, tuple(failures))


def laplacian_plus_pinning(topo):
    """Return ``L + S`` and its sorted (real) spectrum.

    Raises
    ------
    ConfigurationError
        If the spectrum is complex or not strictly positive.
    """
    ls = topo.laplacian + topo.pinning_matrix
    spec = eigenvalues(ls, "L+S")
    if not spec.all_real:
        raise ConfigurationError("L+S has complex eigenvalues; topology rejected")
    if spec.real[0] <= 0.0:
        raise ConfigurationError(f"L+S has non-positive eigenvalue {spec.real[0]:.3g}")
    return ls, spec
