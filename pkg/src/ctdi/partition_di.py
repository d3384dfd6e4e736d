"""Exact mutual and directed information over finite-alphabet sequence pairs.

The joint law of a pair (X^n, Y^n) is held as a dense probability tensor and
every information quantity is an exact enumeration over it, in nats.  This
module is the trusted oracle for the continuous-time estimators, so there are
no approximations beyond floating point: KL-type sums use the conventions
0*ln(0/q) = 0 and p*ln(p/0) = +inf, and probabilities below 1e-15 are treated
as exact zeros inside logarithms.

Directed information here is the sum over i of I(X^i; Y_i | Y^{i-1}); its
reverse companion sums I(Y^{i-1}; X_i | X^{i-1}), and the two always add up
to the full mutual information I(X^n; Y^n).  Grouping consecutive indices
into blocks coarsens the time order: one block recovers mutual information,
singleton blocks recover directed information, and refining a grouping never
increases the value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_STATE_CAP = 1_000_000
_ZERO = 1e-15

__all__ = [
    "JointSequencePmf",
    "Grouping",
    "mutual_information",
    "directed_info",
    "reverse_directed_info",
    "conservation_residual",
    "grouped_directed_info",
    "empirical_joint",
    "prefix_joint",
    "random_joint",
    "random_no_feedback_joint",
    "DEFAULT_STATE_CAP",
]


@dataclass(frozen=True, eq=False)
class JointSequencePmf:
    """Joint law of two length-n sequences as a dense tensor.

    probs has shape x_sizes + y_sizes, row-major over (x_1..x_n, y_1..y_n);
    symbols are 0-based integers.  The total state count is capped to keep
    enumeration tractable.
    """

    x_sizes: tuple
    y_sizes: tuple
    probs: np.ndarray
    max_states: int = DEFAULT_STATE_CAP

    def __post_init__(self):
        xs = tuple(int(s) for s in self.x_sizes)
        ys = tuple(int(s) for s in self.y_sizes)
        if not xs or len(xs) != len(ys):
            raise ValueError("need matching, nonempty per-index alphabet size tuples")
        if min(xs + ys) < 1:
            raise ValueError("alphabet sizes must be at least 1")
        states = math.prod(xs) * math.prod(ys)
        if states > self.max_states:
            raise ValueError(f"state count {states} exceeds the enumeration cap {self.max_states}")
        p = np.array(self.probs, dtype=float).reshape(xs + ys)
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "x_sizes", xs)
        object.__setattr__(self, "y_sizes", ys)
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return len(self.x_sizes)

    @property
    def x_axes(self) -> tuple:
        return tuple(range(self.n))

    @property
    def y_axes(self) -> tuple:
        return tuple(range(self.n, 2 * self.n))

    def to_json(self) -> str:
        """Serialize as {"n", "x_alphabet_sizes", "y_alphabet_sizes", "probs"}.

        probs is the flat row-major probability list over (x^n, y^n).
        """
        return json.dumps(
            {
                "n": self.n,
                "x_alphabet_sizes": list(self.x_sizes),
                "y_alphabet_sizes": list(self.y_sizes),
                "probs": self.probs.ravel().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "JointSequencePmf":
        doc = json.loads(text)
        xs = tuple(doc["x_alphabet_sizes"])
        ys = tuple(doc["y_alphabet_sizes"])
        if doc.get("n") != len(xs):
            raise ValueError("inconsistent sequence length in serialized joint")
        return cls(xs, ys, np.asarray(doc["probs"], dtype=float))


def _conditional_mi(probs: np.ndarray, a_axes, b_axes, c_axes) -> float:
    """I(A; B | C) in nats for a dense joint tensor; remaining axes are summed out."""
    a_axes, b_axes, c_axes = tuple(a_axes), tuple(b_axes), tuple(c_axes)
    keep = set(a_axes) | set(b_axes) | set(c_axes)
    drop = tuple(ax for ax in range(probs.ndim) if ax not in keep)
    m_abc = probs.sum(axis=drop, keepdims=True) if drop else probs
    m_ac = m_abc.sum(axis=b_axes, keepdims=True)
    m_bc = m_abc.sum(axis=a_axes, keepdims=True)
    m_c = m_ac.sum(axis=a_axes, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = m_abc * (np.log(m_abc) + np.log(m_c) - np.log(m_ac) - np.log(m_bc))
    return float(np.where(m_abc > _ZERO, contrib, 0.0).sum())


def mutual_information(joint: JointSequencePmf) -> float:
    """I(X^n; Y^n), the exact relative entropy between joint and product-of-marginals."""
    return _conditional_mi(joint.probs, joint.x_axes, joint.y_axes, ())


@dataclass(frozen=True)
class Grouping:
    """Consecutive blocks covering positions 1..n, stored as 1-based block ends."""

    ends: tuple

    def __post_init__(self):
        ends = tuple(int(e) for e in self.ends)
        if not ends or ends[0] < 1 or any(b <= a for a, b in zip(ends, ends[1:])):
            raise ValueError("block ends must be strictly increasing positive integers")
        object.__setattr__(self, "ends", ends)

    @classmethod
    def singletons(cls, n: int) -> "Grouping":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def one_block(cls, n: int) -> "Grouping":
        return cls((n,))

    @property
    def n(self) -> int:
        return self.ends[-1]

    def refines(self, coarser: "Grouping") -> bool:
        """True iff this grouping splits the same range with every cut of `coarser`."""
        return self.n == coarser.n and set(coarser.ends) <= set(self.ends)


def grouped_directed_info(joint: JointSequencePmf, grouping: Grouping) -> float:
    """Directed information between the block-supersymbol sequences.

    Sum over blocks j of I(X_1..X_{e_j}; Y-block j | Y_1..Y_{e_{j-1}}).
    """
    if grouping.n != joint.n:
        raise ValueError("grouping does not cover the sequence length")
    total = 0.0
    prev = 0
    for end in grouping.ends:
        a = joint.x_axes[:end]
        b = joint.y_axes[prev:end]
        c = joint.y_axes[:prev]
        total += _conditional_mi(joint.probs, a, b, c)
        prev = end
    return total


def directed_info(joint: JointSequencePmf) -> float:
    """Sum over i of I(X^i; Y_i | Y^{i-1})."""
    return grouped_directed_info(joint, Grouping.singletons(joint.n))


def reverse_directed_info(joint: JointSequencePmf) -> float:
    """Sum over i of I(Y^{i-1}; X_i | X^{i-1}); the i = 1 term is zero."""
    total = 0.0
    for i in range(2, joint.n + 1):
        a = joint.y_axes[: i - 1]
        b = (joint.x_axes[i - 1],)
        c = joint.x_axes[: i - 1]
        total += _conditional_mi(joint.probs, a, b, c)
    return total


def conservation_residual(joint: JointSequencePmf) -> float:
    """directed + reverse-directed - mutual; exactly zero up to float rounding."""
    return directed_info(joint) + reverse_directed_info(joint) - mutual_information(joint)


def prefix_joint(joint: JointSequencePmf, m: int) -> JointSequencePmf:
    """Marginal law of the first m positions of both sequences."""
    if not 1 <= m <= joint.n:
        raise ValueError("prefix length out of range")
    drop = joint.x_axes[m:] + joint.y_axes[m:]
    p = joint.probs.sum(axis=drop) if drop else joint.probs
    return JointSequencePmf(joint.x_sizes[:m], joint.y_sizes[:m], p)


def empirical_joint(samples, x_sizes, y_sizes, max_states: int = DEFAULT_STATE_CAP) -> JointSequencePmf:
    """Empirical joint law from iid draws of ((x_1..x_n), (y_1..y_n)) pairs.

    samples may be any sequence of pairs of equal-length symbol tuples, or an
    (N, 2, n) integer array.
    """
    arr = np.asarray(samples, dtype=np.int64)
    if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[1] != 2:
        raise ValueError("samples must be a nonempty sequence of (x-seq, y-seq) pairs")
    xs = tuple(int(s) for s in x_sizes)
    ys = tuple(int(s) for s in y_sizes)
    n = len(xs)
    if arr.shape[2] != n or len(ys) != n:
        raise ValueError("sample length does not match the alphabet size tuples")
    sizes = xs + ys
    cols = [arr[:, 0, i] for i in range(n)] + [arr[:, 1, i] for i in range(n)]
    for col, size in zip(cols, sizes):
        if col.min() < 0 or col.max() >= size:
            raise ValueError("sample symbol out of alphabet range")
    flat = np.ravel_multi_index(cols, sizes)
    counts = np.bincount(flat, minlength=math.prod(sizes)).astype(float)
    return JointSequencePmf(xs, ys, counts / arr.shape[0], max_states=max_states)


def random_joint(rng: np.random.Generator, x_sizes, y_sizes) -> JointSequencePmf:
    """Uniformly random joint law (flat Dirichlet over the full state space)."""
    xs = tuple(int(s) for s in x_sizes)
    ys = tuple(int(s) for s in y_sizes)
    probs = rng.dirichlet(np.ones(math.prod(xs + ys)))
    return JointSequencePmf(xs, ys, probs)


def random_no_feedback_joint(rng: np.random.Generator, x_sizes, y_sizes) -> JointSequencePmf:
    """Random causal channel driven by an exogenous input law.

    The input sequence law p(x^n) is arbitrary, and each output is drawn from
    a random kernel p(y_i | x^i, y^{i-1}) that never looks at future inputs.
    Because the input ignores past outputs, directed information equals
    mutual information for these joints.
    """
    xs = tuple(int(s) for s in x_sizes)
    ys = tuple(int(s) for s in y_sizes)
    n = len(xs)
    if n != len(ys) or n == 0:
        raise ValueError("need matching, nonempty alphabet size tuples")
    joint = rng.dirichlet(np.ones(math.prod(xs))).reshape(xs + (1,) * n)
    for i in range(n):
        cond_shape = xs[: i + 1] + ys[:i]
        rows = rng.dirichlet(np.ones(ys[i]), size=math.prod(cond_shape))
        kern_shape = (
            xs[: i + 1]
            + (1,) * (n - i - 1)
            + ys[:i]
            + (ys[i],)
            + (1,) * (n - i - 1)
        )
        joint = joint * rows.reshape(kern_shape)
    return JointSequencePmf(xs, ys, joint)
