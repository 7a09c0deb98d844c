"""Dense potential tables and the pointwise algebra shared by all engines.

A potential is a non-negative real table over the configuration space of an
ordered tuple of variable ids.  Values are stored row-major with the *last*
domain variable varying fastest (numpy C order, one axis per variable).

Every arithmetic operation takes an OpCounter and charges it in binary-op
units: one multiplication per output cell for combination, one addition per
collapsed cell for marginalization, one division per numerator cell for
division.  Normalization is deliberately uncounted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from bnbench.counting import OpCounter


class PotentialError(ValueError):
    """Malformed potential construction or operand mismatch."""


class InconsistencyError(ArithmeticError):
    """Raised on x/0 with x > 0, which correct propagation never produces."""


@dataclass(frozen=True)
class Variable:
    """A discrete variable with a dense integer id and cardinality >= 2."""

    id: int
    name: str
    cardinality: int

    def __post_init__(self):
        if self.cardinality < 2:
            raise PotentialError(
                "variable %r needs cardinality >= 2, got %d" % (self.name, self.cardinality)
            )


class Potential:
    """Immutable dense table over an ordered variable-id domain.

    ``values.shape`` carries the per-variable cardinalities in domain order.
    ``is_identity`` is True only for tables built by :func:`identity_potential`;
    the mark never survives arithmetic.
    """

    __slots__ = ("domain", "values", "is_identity")

    def __init__(self, domain, values, is_identity=False):
        self.domain = tuple(domain)
        self.values = values
        self.is_identity = is_identity

    @property
    def size(self):
        return self.values.size

    def card(self, var):
        return self.values.shape[self.domain.index(var)]

    def __repr__(self):
        return "Potential(domain=%r, shape=%r)" % (self.domain, self.values.shape)


def make_potential(domain: Sequence[Variable], values) -> Potential:
    """Build a potential for ``domain`` from row-major ``values``."""
    ids = tuple(v.id for v in domain)
    if len(set(ids)) != len(ids):
        raise PotentialError("duplicate variable in domain %r" % (ids,))
    cards = tuple(v.cardinality for v in domain)
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    expected = int(np.prod(cards)) if cards else 1
    if arr.size != expected:
        raise PotentialError(
            "values length %d does not match domain size %d" % (arr.size, expected)
        )
    if np.any(arr < 0):
        raise PotentialError("negative value in potential")
    return Potential(ids, arr.reshape(cards))


def from_values(domain_ids: Sequence[int], cards: Sequence[int], values) -> Potential:
    """Internal constructor from raw ids and cardinalities."""
    arr = np.asarray(values, dtype=np.float64).reshape(tuple(cards))
    return Potential(tuple(domain_ids), arr)


def identity_potential(domain: Sequence[Variable]) -> Potential:
    """All-ones potential; carries the identity mark until arithmetic touches it."""
    ids = tuple(v.id for v in domain)
    cards = tuple(v.cardinality for v in domain)
    return Potential(ids, np.ones(cards), is_identity=True)


def identity_scalar() -> Potential:
    """The empty-domain unit element."""
    return Potential((), np.ones(()), is_identity=True)


def identity_over(domain: Sequence[int], cards: dict) -> Potential:
    """Identity potential from raw variable ids and a cardinality map."""
    dom = tuple(domain)
    return Potential(dom, np.ones(tuple(cards[v] for v in dom)), is_identity=True)


def embed(pot: Potential, domain: Sequence[int], cards: dict) -> Potential:
    """Broadcast ``pot`` onto a superset ``domain`` without counting anything.

    Numerically a multiplication by ones; used where an engine loads a
    potential into an empty working table, which costs no arithmetic.
    The result never carries the identity mark.
    """
    dom = tuple(domain)
    if not set(pot.domain) <= set(dom):
        raise PotentialError("cannot embed %r into %r" % (pot.domain, dom))
    shape = tuple(cards[v] for v in dom)
    arr = np.broadcast_to(_expand(pot, dom), shape)
    return Potential(dom, arr.copy())


def _expand(pot: Potential, out_domain: tuple) -> np.ndarray:
    """View of ``pot.values`` transposed/reshaped to broadcast over ``out_domain``."""
    perm = sorted(range(len(pot.domain)), key=lambda i: out_domain.index(pot.domain[i]))
    arr = pot.values.transpose(perm)
    shape = []
    k = 0
    ordered = [pot.domain[i] for i in perm]
    for var in out_domain:
        if k < len(ordered) and ordered[k] == var:
            shape.append(arr.shape[k])
            k += 1
        else:
            shape.append(1)
    return arr.reshape(shape)


def union_domain(a: Potential, b: Potential) -> tuple:
    return a.domain + tuple(v for v in b.domain if v not in a.domain)


def multiply(a: Potential, b: Potential, counter: OpCounter) -> Potential:
    """Pointwise product on the union domain (a's variables first)."""
    dom = union_domain(a, b)
    out = _expand(a, dom) * _expand(b, dom)
    counter.mults += out.size
    return Potential(dom, out)


def marginalize(a: Potential, keep: Iterable[int], counter: OpCounter) -> Potential:
    """Sum out all variables not in ``keep``; result keeps a's relative order."""
    keep = set(keep)
    if not keep <= set(a.domain):
        raise PotentialError("marginalization target %r not within %r" % (keep, a.domain))
    axes = tuple(i for i, v in enumerate(a.domain) if v not in keep)
    if not axes:
        return Potential(a.domain, a.values)
    out = a.values.sum(axis=axes)
    counter.adds += a.size - out.size
    return Potential(tuple(v for v in a.domain if v in keep), out)


def divide(num: Potential, den: Potential, counter: OpCounter) -> Potential:
    """Pointwise quotient with 0/0 := 0; identity-marked denominators are free."""
    if den.is_identity:
        return Potential(num.domain, num.values)
    if not set(den.domain) <= set(num.domain):
        raise PotentialError("denominator domain %r exceeds numerator %r" % (den.domain, num.domain))
    den_b = np.broadcast_to(_expand(den, num.domain), num.values.shape)
    zero = den_b == 0.0
    if np.any(num.values[zero] != 0.0):
        raise InconsistencyError("positive value divided by zero")
    out = np.zeros_like(num.values)
    np.divide(num.values, den_b, out=out, where=~zero)
    counter.divs += num.size
    return Potential(num.domain, out)


def normalize(a: Potential) -> Potential:
    """Scale values to sum to one.  Not charged to any counter."""
    total = float(a.values.sum())
    if total <= 0.0:
        raise PotentialError("cannot normalize zero-mass potential")
    return Potential(a.domain, a.values / total)


def iter_configurations(domain: Sequence[int], cards: dict) -> Iterator[dict]:
    """Yield assignments (var id -> state index) in row-major order, last fastest."""
    domain = tuple(domain)
    if not domain:
        yield {}
        return
    head, tail = domain[0], domain[1:]
    for state in range(cards[head]):
        for rest in iter_configurations(tail, cards):
            cfg = {head: state}
            cfg.update(rest)
            yield cfg


def value_at(pot: Potential, config: dict) -> float:
    """Look up a single configuration (projection of ``config`` to the domain)."""
    idx = tuple(config[v] for v in pot.domain)
    return float(pot.values[idx])
