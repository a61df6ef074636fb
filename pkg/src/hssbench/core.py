"""Samples, losses, distributions and seeded randomness.

Everything here is immutable after construction. Samples are ordered
(the swap construction is index-wise) but every consumer downstream is
expected to be permutation-invariant.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np


class DimensionError(ValueError):
    """Raised when samples, sign vectors or weights disagree in length."""


# --------------------------------------------------------------------------
# randomness
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SeededRng:
    """Counter-based random stream identified by ``(seed, stream_id)``.

    Draw ``index`` of a stream is produced by ``generator(index)``; the
    same triple always yields the same numbers, so work can be chunked
    and scheduled in any order.
    """

    seed: int
    stream_id: int = 0

    def generator(self, index: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & (2**64 - 1),
            spawn_key=(int(self.stream_id) & (2**64 - 1), int(index)),
        )
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, key: int) -> "SeededRng":
        ss = np.random.SeedSequence([int(self.stream_id) & (2**64 - 1), int(key)])
        sid = int(ss.generate_state(1, dtype=np.uint64)[0])
        return SeededRng(self.seed, sid)

    def spawn(self, n: int) -> list["SeededRng"]:
        return [self.child(i) for i in range(n)]


def as_rng(rng: Union[SeededRng, int, None]) -> SeededRng:
    if isinstance(rng, SeededRng):
        return rng
    return SeededRng(0 if rng is None else int(rng))


# --------------------------------------------------------------------------
# samples
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledPoint:
    x: np.ndarray
    y: float

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if x.ndim != 1:
            raise DimensionError("feature vector must be one-dimensional")
        if not (np.all(np.isfinite(x)) and math.isfinite(float(self.y))):
            raise ValueError("non-finite coordinate in labeled point")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))

    def __eq__(self, other):
        if not isinstance(other, LabeledPoint):
            return NotImplemented
        return self.y == other.y and np.array_equal(self.x, other.x)

    def __hash__(self):
        return hash((self.x.tobytes(), self.y))


class LabeledSample:
    """Ordered multiset of labeled points, stored as ``X`` (m, d) and ``y`` (m,)."""

    __slots__ = ("X", "y")

    def __init__(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionError(f"X has shape {X.shape} but y has {y.shape[0]} labels")
        if X.shape[0] < 1:
            raise ValueError("a sample needs at least one point")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite coordinate in sample")
        X = X.copy()
        y = y.copy()
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("LabeledSample is immutable")

    @classmethod
    def from_points(cls, points: Sequence[LabeledPoint]) -> "LabeledSample":
        points = list(points)
        if not points:
            raise ValueError("a sample needs at least one point")
        dims = {p.x.shape[0] for p in points}
        if len(dims) != 1:
            raise DimensionError("points do not share a feature dimension")
        return cls(np.stack([p.x for p in points]), [p.y for p in points])

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> LabeledPoint:
        return LabeledPoint(self.X[i], self.y[i])

    def __iter__(self) -> Iterator[LabeledPoint]:
        for i in range(self.m):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, LabeledSample):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    def __repr__(self):
        return f"LabeledSample(m={self.m}, dim={self.dim})"

    def take(self, idx) -> "LabeledSample":
        idx = np.asarray(idx, dtype=int)
        return LabeledSample(self.X[idx], self.y[idx])

    def concat(self, other: "LabeledSample") -> "LabeledSample":
        if other.dim != self.dim:
            raise DimensionError("feature dimensions differ")
        return LabeledSample(np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]))

    def permuted(self, perm) -> "LabeledSample":
        return self.take(perm)


def swap_sample(S: LabeledSample, T: LabeledSample, sigma) -> LabeledSample:
    """Return ``S_{T,sigma}``: position i holds ``T[i]`` where ``sigma[i] == -1``."""
    sigma = np.asarray(sigma)
    if not (S.m == T.m == sigma.shape[0]):
        raise DimensionError(f"lengths differ: |S|={S.m}, |T|={T.m}, |sigma|={sigma.shape[0]}")
    if not np.all((sigma == 1) | (sigma == -1)):
        raise ValueError("sign vector entries must be +1 or -1")
    if S.dim != T.dim:
        raise DimensionError("feature dimensions differ")
    take_t = sigma == -1
    X = np.where(take_t[:, None], T.X, S.X)
    y = np.where(take_t, T.y, S.y)
    return LabeledSample(X, y)


def replace_point(S: LabeledSample, index: int, z: LabeledPoint) -> LabeledSample:
    """Return ``S^{z_index <-> z}``."""
    if not 0 <= index < S.m:
        raise IndexError(f"index {index} out of range for sample of size {S.m}")
    if z.x.shape[0] != S.dim:
        raise DimensionError("replacement point has the wrong feature dimension")
    X = np.array(S.X)
    y = np.array(S.y)
    X[index] = z.x
    y[index] = z.y
    return LabeledSample(X, y)


# --------------------------------------------------------------------------
# losses
# --------------------------------------------------------------------------


class LossKind(str, Enum):
    ABSOLUTE = "absolute-clipped"
    SQUARED = "squared-clipped"
    HINGE = "hinge-clipped"
    CUSTOM = "custom"


_DEFAULT_MU = {LossKind.ABSOLUTE: 1.0, LossKind.SQUARED: 2.0, LossKind.HINGE: 1.0}


@dataclass(frozen=True)
class LossFunction:
    """Bounded loss ``l(prediction, label)`` clipped into [0, 1].

    ``lipschitz_mu`` is metadata (the Lipschitz constant in the
    prediction); :meth:`check_lipschitz` verifies it on a probe grid.
    For ``hinge-clipped`` labels are expected in {-1, +1}.
    """

    kind: LossKind = LossKind.ABSOLUTE
    lipschitz_mu: Optional[float] = None
    func: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        kind = LossKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is LossKind.CUSTOM:
            if self.func is None:
                raise ValueError("custom loss needs a callable")
            if self.lipschitz_mu is None:
                raise ValueError("custom loss needs a declared Lipschitz constant")
        mu = _DEFAULT_MU.get(kind) if self.lipschitz_mu is None else float(self.lipschitz_mu)
        if mu < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        object.__setattr__(self, "lipschitz_mu", mu)

    def __call__(self, pred, y) -> np.ndarray:
        pred = np.asarray(pred, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind is LossKind.ABSOLUTE:
            raw = np.abs(pred - y)
        elif self.kind is LossKind.SQUARED:
            raw = (pred - y) ** 2
        elif self.kind is LossKind.HINGE:
            raw = np.maximum(0.0, 1.0 - y * pred)
        else:
            raw = np.asarray(self.func(pred, y), dtype=float)
        return np.clip(raw, 0.0, 1.0)

    @property
    def quasiconvex(self) -> bool:
        return self.kind is not LossKind.CUSTOM

    def interval_range(self, lo, hi, y) -> tuple[np.ndarray, np.ndarray, bool]:
        """Min and max of the loss over predictions in ``[lo, hi]``.

        Exact for the built-in kinds (each is quasiconvex in the
        prediction); for custom losses a 257-point grid is searched and
        the result is flagged inexact.
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.quasiconvex:
            at_lo, at_hi = self(lo, y), self(hi, y)
            hi_val = np.maximum(at_lo, at_hi)
            if self.kind is LossKind.HINGE:
                lo_val = np.minimum(at_lo, at_hi)
            else:
                lo_val = self(np.clip(y, lo, hi), y)
            return lo_val, hi_val, True
        t = np.linspace(0.0, 1.0, 257)
        grid = lo[..., None] + (hi - lo)[..., None] * t
        vals = self(grid, y[..., None])
        return vals.min(axis=-1), vals.max(axis=-1), False

    def check_lipschitz(self, preds=None, labels=None, tol: float = 1e-12) -> bool:
        """Check ``|l(a,y) - l(a',y)| <= mu |a - a'|`` on a probe grid."""
        preds = np.linspace(-2.0, 2.0, 81) if preds is None else np.asarray(preds, float)
        if labels is None:
            labels = [-1.0, 1.0] if self.kind is LossKind.HINGE else np.linspace(0.0, 1.0, 11)
        for y in labels:
            v = self(preds, y)
            dv = np.abs(v[:, None] - v[None, :])
            da = np.abs(preds[:, None] - preds[None, :])
            if np.any(dv > self.lipschitz_mu * da + tol):
                return False
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "mu": self.lipschitz_mu}


ABSOLUTE_LOSS = LossFunction(LossKind.ABSOLUTE)
SQUARED_LOSS = LossFunction(LossKind.SQUARED)
HINGE_LOSS = LossFunction(LossKind.HINGE)


def make_loss(kind: str = "absolute-clipped", mu: Optional[float] = None) -> LossFunction:
    return LossFunction(LossKind(kind), mu)


# --------------------------------------------------------------------------
# hypotheses and risk
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Hypothesis:
    """A deterministic predictor. ``evaluator`` maps an (n, d) array to (n,)."""

    evaluator: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    params: tuple = ()

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        out = np.asarray(self.evaluator(X), dtype=float).reshape(-1)
        if out.shape[0] != X.shape[0]:
            raise DimensionError("hypothesis returned the wrong number of predictions")
        return out

    def losses(self, sample: LabeledSample, loss: LossFunction) -> np.ndarray:
        return loss(self(sample.X), sample.y)


def constant_hypothesis(c: float) -> Hypothesis:
    c = float(c)
    return Hypothesis(lambda X, c=c: np.full(X.shape[0], c), ("const", c))


def linear_hypothesis(w, b: float = 0.0) -> Hypothesis:
    w = np.asarray(w, dtype=float).copy()
    w.setflags(write=False)
    return Hypothesis(lambda X, w=w, b=b: X @ w + b, ("linear", tuple(w), float(b)))


def empirical_risk(h: Hypothesis, S: LabeledSample, loss: LossFunction) -> float:
    return float(np.mean(h.losses(S, loss)))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support distribution over labeled points."""

    support: LabeledSample
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.shape[0] != self.support.m:
            raise DimensionError("one probability per atom is required")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to one")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, support: LabeledSample) -> "DiscreteDistribution":
        return cls(support, np.full(support.m, 1.0 / support.m))

    @property
    def n_atoms(self) -> int:
        return self.support.m

    def atom(self, k: int) -> LabeledPoint:
        return self.support[k]

    def to_dict(self) -> dict:
        return {
            "atoms": [
                {"x": [float(v) for v in self.support.X[k]], "y": float(self.support.y[k]),
                 "p": float(self.probs[k])}
                for k in range(self.n_atoms)
            ]
        }

    @classmethod
    def from_dict(cls, spec: dict) -> "DiscreteDistribution":
        atoms = spec["atoms"]
        X = [a["x"] for a in atoms]
        y = [a["y"] for a in atoms]
        if all("p" not in a for a in atoms):
            return cls.uniform(LabeledSample(X, y))
        p = np.asarray([a["p"] for a in atoms], dtype=float)
        if abs(p.sum() - 1.0) <= 1e-9:
            p = p / p.sum()
        return cls(LabeledSample(X, y), p)


def true_risk(h: Hypothesis, D: DiscreteDistribution, loss: LossFunction) -> float:
    return float(D.probs @ h.losses(D.support, loss))


def draw_indices(D: DiscreteDistribution, m: int, gen: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise ValueError("sample size must be at least 1")
    return gen.choice(D.n_atoms, size=m, p=D.probs)


def draw_sample(D: DiscreteDistribution, m: int, rng: Union[SeededRng, np.random.Generator]) -> LabeledSample:
    """Draw ``m`` i.i.d. points from ``D``."""
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    return D.support.take(draw_indices(D, m, gen))


# --------------------------------------------------------------------------
# I/O
# --------------------------------------------------------------------------


def write_sample_csv(S: LabeledSample, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j}" for j in range(S.dim)] + ["y"])
        for i in range(S.m):
            w.writerow([repr(float(v)) for v in S.X[i]] + [repr(float(S.y[i]))])


def read_sample_csv(path) -> LabeledSample:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[-1] != "y" or any(h != f"x{j}" for j, h in enumerate(header[:-1])):
        raise ValueError("expected header x0,...,xd,y")
    data = np.asarray(body, dtype=float)
    return LabeledSample(data[:, :-1], data[:, -1])


def load_distribution(path) -> DiscreteDistribution:
    return DiscreteDistribution.from_dict(json.loads(Path(path).read_text()))
