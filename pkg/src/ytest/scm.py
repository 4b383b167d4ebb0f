"""Linear-Gaussian structural causal models and the bundled graph families.

The bundled generators follow the original R generators statement by
statement: coefficients are drawn first, then every variable is generated in
the order the reference code lists it.
"""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import DataError, EmptyRequest, InsufficientData, UnknownGraph

DEFAULT_SIGMA = 5.0
COEFFICIENT_SUPPORT = (-2.0, -1.0, 1.0, 2.0)


class GraphId(str, enum.Enum):
    EXAMPLE = "example"
    G1 = "g1"
    G2 = "g2"
    G3 = "g3"
    G4 = "g4"
    G5 = "g5"
    G6 = "g6"
    G7 = "g7"
    G8 = "g8"
    COUNTEREXAMPLE = "counterexample"

    @classmethod
    def parse(cls, name) -> "GraphId":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(g.value for g in cls)
            raise UnknownGraph(f"unknown graph {name!r} (choose from {choices})") from None

    @property
    def index(self) -> int:
        """Stable small integer used when deriving random streams."""
        return list(GraphId).index(self)

    @property
    def label(self) -> str:
        if self in STUDY_GRAPHS:
            return f"({self.value[1:]})"
        return self.value


STUDY_GRAPHS = (GraphId.G1, GraphId.G2, GraphId.G3, GraphId.G4,
                GraphId.G5, GraphId.G6, GraphId.G7, GraphId.G8)

COEFFICIENT_COUNTS = {
    GraphId.G1: 4, GraphId.G2: 6, GraphId.G3: 8, GraphId.G4: 6,
    GraphId.G5: 5, GraphId.G6: 4, GraphId.G7: 4, GraphId.G8: 5,
}


def make_rng(seed, *key) -> np.random.Generator:
    """Independent stream for ``(seed, *key)``.

    Streams for different keys are statistically independent and the
    derivation does not depend on how many other streams were created, which
    is what makes replicate-level parallelism deterministic.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)


def sample_coefficients(k: int, rng) -> np.ndarray:
    """k path coefficients, each uniform on {-2, -1, 1, 2}.

    Drawn as a random sign times a random magnitude in {1, 2}, in that order.
    """
    if k < 1:
        raise EmptyRequest("at least one coefficient must be requested")
    rng = _as_rng(rng)
    sign = rng.choice(np.array([-1.0, 1.0]), size=k)
    magnitude = rng.choice(np.array([1.0, 2.0]), size=k)
    return sign * magnitude


def _example(n, rng):
    N = lambda: rng.standard_normal(n)
    A = N()
    Z = A + N()
    W = A + N()
    B = Z + N()
    C = N()
    X = Z + W + C + N()
    Y = X + B + C + N()
    D = X + Y + N()
    return {"A": A, "Z": Z, "W": W, "B": B, "C": C, "X": X, "Y": Y, "D": D}


def _counterexample(n, rng):
    N = lambda: rng.standard_normal(n)
    # logical comparisons coerce to 0/1 before arithmetic
    z1 = (N() < 0.0).astype(float)
    z2 = (N() < 1.0).astype(float)
    z3 = (N() < -1.0).astype(float)
    i1 = z1 * z2
    i2 = z2 * z3
    e = i1 + i2 + z1 + z2 + z3 + N()
    o = e + z1 + z2 + z3 + N()
    return {"z1": z1, "z2": z2, "z3": z3, "i1": i1, "i2": i2, "e": e, "o": o}


def _study_graph(gid, a, n, rng, sigma, noise):
    def N():
        return noise * rng.standard_normal(n)

    if gid is GraphId.G1:
        A = sigma * rng.standard_normal(n)
        Z = a[0] * A + N()
        W = a[1] * A + N()
        X = a[2] * Z + a[3] * W + N()
    elif gid is GraphId.G2:
        A = N()
        B = N()
        Z = a[0] * A + a[1] * B + N()
        W = a[2] * A + N()
        X = a[3] * B + a[4] * W + a[5] * Z + N()
    elif gid is GraphId.G3:
        A = N()
        B = N()
        C = N()
        Z = a[0] * A + a[1] * B + N()
        W = a[2] * A + a[3] * C + N()
        X = a[4] * B + a[5] * C + a[6] * Z + a[7] * W + N()
    elif gid is GraphId.G4:
        A = N()
        B = N()
        C = N()
        Z = a[0] * A + a[1] * B + N()
        W = a[2] * A + a[3] * C + N()
        X = a[4] * B + a[5] * C + N()
    elif gid is GraphId.G5:
        A = N()
        B = N()
        Z = a[0] * A + a[1] * B + N()
        W = a[2] * A + N()
        X = a[3] * B + a[4] * W + N()
    elif gid is GraphId.G6:
        A = N()
        W = a[0] * A + N()
        X = a[1] * W + N()
        Z = a[2] * A + a[3] * X + N()
    elif gid is GraphId.G7:
        A = N()
        X = N()
        W = a[0] * A + a[1] * X + N()
        Z = a[2] * A + a[3] * X + N()
    elif gid is GraphId.G8:
        A = N()
        B = N()
        W = a[0] * A + a[1] * B + N()
        X = a[2] * B + N()
        Z = a[3] * A + a[4] * X + N()
    else:  # pragma: no cover
        raise UnknownGraph(gid)
    return {"Z": Z, "X": X, "W": W}


def generate_graph(gid, coefficients, n: int, rng, sigma: float = DEFAULT_SIGMA,
                   sigma_everywhere: bool = False) -> Dataset:
    """Sample one of G1..G8 with the given path coefficients.

    ``sigma`` scales the latent confounder of G1 only.  With
    ``sigma_everywhere`` every noise term of every graph is scaled by it.
    """
    gid = GraphId.parse(gid)
    if gid not in COEFFICIENT_COUNTS:
        raise UnknownGraph(f"{gid.value} has no path coefficients")
    if n < 1:
        raise InsufficientData("n must be at least 1")
    a = np.asarray(coefficients, dtype=float)
    if a.shape != (COEFFICIENT_COUNTS[gid],):
        raise DataError(
            f"{gid.value} needs {COEFFICIENT_COUNTS[gid]} coefficients, got {a.shape}")
    noise = sigma if sigma_everywhere else 1.0
    return Dataset(_study_graph(gid, a, n, _as_rng(rng), sigma, noise))


def sample_graph(gid, n: int, rng, sigma: float = DEFAULT_SIGMA,
                 sigma_everywhere: bool = False) -> Dataset:
    """Draw a sample of ``n`` rows from a bundled graph.

    For G1..G8 a fresh set of coefficients is drawn from ``rng`` on every
    call, before any noise.
    """
    gid = GraphId.parse(gid)
    if n < 1:
        raise InsufficientData("n must be at least 1")
    rng = _as_rng(rng)
    if gid is GraphId.EXAMPLE:
        return Dataset(_example(n, rng))
    if gid is GraphId.COUNTEREXAMPLE:
        return Dataset(_counterexample(n, rng))
    a = sample_coefficients(COEFFICIENT_COUNTS[gid], rng)
    return generate_graph(gid, a, n, rng, sigma=sigma, sigma_everywhere=sigma_everywhere)


@dataclass(frozen=True)
class LinearScm:
    """A linear DAG with Gaussian additive noise.

    ``edges`` holds ``(parent, child, coefficient)`` triples; every node
    missing from ``noise_scale`` gets scale 1.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...] = ()
    noise_scale: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise DataError("duplicate node names")
        edges = tuple((str(p), str(c), float(w)) for p, c, w in self.edges)
        known = set(nodes)
        for p, c, _ in edges:
            for end in (p, c):
                if end not in known:
                    raise DataError(f"edge endpoint {end!r} is not a declared node")
            if p == c:
                raise DataError(f"self-loop on {p!r}")
        scales = {nm: 1.0 for nm in nodes}
        for nm, s in dict(self.noise_scale).items():
            if nm not in known:
                raise DataError(f"noise scale given for unknown node {nm!r}")
            s = float(s)
            if not s > 0.0 or not np.isfinite(s):
                raise DataError(f"noise scale of {nm!r} must be positive, got {s}")
            scales[nm] = s
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "noise_scale", scales)
        object.__setattr__(self, "_order", self._topological_order())

    def _topological_order(self):
        ts = TopologicalSorter({nm: () for nm in self.nodes})
        for p, c, _ in self.edges:
            ts.add(c, p)
        try:
            order = list(ts.static_order())
        except CycleError as exc:
            raise DataError(f"model is cyclic: {exc.args[1]}") from None
        return tuple(order)

    @property
    def order(self) -> tuple[str, ...]:
        return self._order

    def parents(self, node: str) -> list[tuple[str, float]]:
        """Parents of ``node`` sorted by name, so sums are order independent."""
        return sorted((p, w) for p, c, w in self.edges if c == node)

    def weight_matrix(self) -> np.ndarray:
        """B with B[i, j] = coefficient of node j in the equation of node i,
        indexed in declaration order."""
        idx = {nm: i for i, nm in enumerate(self.nodes)}
        B = np.zeros((len(self.nodes), len(self.nodes)))
        for p, c, w in self.edges:
            B[idx[c], idx[p]] += w
        return B

    def covariance(self) -> np.ndarray:
        """Population covariance, (I - B)^-1 D (I - B)^-T, in declaration order."""
        k = len(self.nodes)
        inv = np.linalg.inv(np.eye(k) - self.weight_matrix())
        D = np.diag([self.noise_scale[nm] ** 2 for nm in self.nodes])
        return inv @ D @ inv.T


def _node_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def sample_custom(model: LinearScm, n: int, rng) -> Dataset:
    """Sample ``n`` rows from a LinearScm.

    Each node draws its noise from its own stream keyed by the node name, so
    the result does not depend on the order in which nodes were declared.
    """
    if n < 1:
        raise InsufficientData("n must be at least 1")
    rng = _as_rng(rng)
    base = int(rng.integers(0, 2**63 - 1))
    values = {}
    for nm in model.order:
        x = model.noise_scale[nm] * make_rng(base, _node_key(nm)).standard_normal(n)
        for p, w in model.parents(nm):
            x = x + w * values[p]
        values[nm] = x
    return Dataset({nm: values[nm] for nm in model.nodes})


def parse_model(text: str) -> LinearScm:
    """Parse the declarative model format.

    One node per line as ``name noise_scale`` and one edge per line as
    ``parent child coefficient``.  Blank lines and ``#`` comments are
    ignored.  Nodes must be declared before edges refer to them.
    """
    nodes, scales, edges = [], {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) == 2:
                nodes.append(parts[0])
                scales[parts[0]] = float(parts[1])
            elif len(parts) == 3:
                edges.append((parts[0], parts[1], float(parts[2])))
            else:
                raise ValueError
        except ValueError:
            raise DataError(f"model line {lineno}: cannot parse {raw.strip()!r}") from None
    return LinearScm(tuple(nodes), tuple(edges), scales)


def load_model(path) -> LinearScm:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    return parse_model(path.read_text())
