"""Exact symbolic representation of product Bernoulli measures.

The measure lives on the pair shift space ``Sigma = I^inf x J^inf`` with
``I = {0..m-1}`` and ``J = {0..n-1}``, ``m < n``.  Digit pairs are i.i.d.
with law ``p[i][j]``; all cylinder masses are exact rationals.  The module
provides the weight table (:class:`BernoulliSpec`), finite words, cylinder
and fiber-cylinder masses, blow-ups to cylinders, and the two product
parametrizations of magnified measures (:func:`psi_measure`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    BadShape,
    DepthMismatch,
    IncompatibleSpecs,
    InsufficientDepth,
    OrderViolation,
    SumNotOne,
    ZeroMassCylinder,
)

RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def _as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise BadShape("weights must be exact rationals, not floats: %r" % (x,))
    return Fraction(x)


@dataclass(frozen=True)
class Word:
    """A finite word over the alphabet ``{0..alphabet-1}``."""

    digits: tuple[int, ...]
    alphabet: int

    def __post_init__(self) -> None:
        for d in self.digits:
            if not 0 <= d < self.alphabet:
                raise BadShape(f"digit {d} outside alphabet of size {self.alphabet}")

    def __len__(self) -> int:
        return len(self.digits)

    def __getitem__(self, idx):
        return self.digits[idx]

    def __iter__(self):
        return iter(self.digits)

    def shift(self, k: int = 1) -> "Word":
        """Drop the first ``k`` letters (the left shift sigma^k)."""
        return Word(self.digits[k:], self.alphabet)

    def prefix(self, k: int) -> "Word":
        if k > len(self.digits):
            raise InsufficientDepth(f"prefix {k} of a word of length {len(self.digits)}")
        return Word(self.digits[:k], self.alphabet)

    def concat(self, other: "Word") -> "Word":
        if other.alphabet != self.alphabet:
            raise IncompatibleSpecs("concatenating words over different alphabets")
        return Word(self.digits + other.digits, self.alphabet)

    def __add__(self, other: "Word") -> "Word":
        return self.concat(other)


def word(digits: Iterable[int], alphabet: int) -> Word:
    return Word(tuple(int(d) for d in digits), alphabet)


@dataclass(frozen=True)
class SymbolicPoint:
    """A point of Sigma truncated to working depth: one I-word, one J-word."""

    iword: Word
    jword: Word

    @property
    def depth(self) -> int:
        return min(len(self.iword), len(self.jword))


class BernoulliSpec:
    """Validated weight matrix ``p[i][j]`` together with derived data.

    Marginals ``q_i = sum_j p[i][j]`` and ``r_j = sum_i p[i][j]`` and the
    conditional rows ``p_i(j) = p[i][j]/q_i`` (zero row when ``q_i = 0``)
    are computed once from the exact weights and never stored separately.
    """

    def __init__(self, m: int, n: int, p: Sequence[Sequence[Fraction]]):
        self.m = int(m)
        self.n = int(n)
        self.p = tuple(tuple(row) for row in p)
        self.q = tuple(sum(row, ZERO) for row in self.p)
        self.r = tuple(sum(self.p[i][j] for i in range(self.m)) for j in range(self.n))
        self.rows = tuple(
            tuple(self.p[i][j] / self.q[i] for j in range(self.n)) if self.q[i] > 0
            else tuple(ZERO for _ in range(self.n))
            for i in range(self.m)
        )
        # line-supported: the measure sits on a single horizontal or vertical line
        self.line_supported = (
            sum(1 for qi in self.q if qi > 0) == 1
            or sum(1 for rj in self.r if rj > 0) == 1
        )
        # letters with identical conditional rows are interchangeable for the
        # fiber parametrization; give each its equivalence-class id
        classes: dict[tuple[Fraction, ...], int] = {}
        ids = []
        for i in range(self.m):
            ids.append(classes.setdefault(self.rows[i], len(classes)))
        self.row_class = tuple(ids)
        self._float_p = None

    # -- construction ------------------------------------------------------

    @staticmethod
    def build(m: int, n: int, weights: Sequence[Sequence[RationalLike]]) -> "BernoulliSpec":
        m = int(m)
        n = int(n)
        if m < 2 or m >= n:
            raise OrderViolation(f"need 2 <= m < n, got m={m}, n={n}")
        if len(weights) != m or any(len(row) != n for row in weights):
            raise BadShape(f"weight matrix must be {m}x{n}")
        p = [[_as_fraction(x) for x in row] for row in weights]
        for row in p:
            for x in row:
                if x < 0:
                    raise BadShape(f"negative weight {x}")
        total = sum(sum(row, ZERO) for row in p)
        if total != 1:
            raise SumNotOne(f"weights sum to {total}, expected 1")
        return BernoulliSpec(m, n, p)

    # -- helpers -----------------------------------------------------------

    def p_float(self) -> np.ndarray:
        if self._float_p is None:
            self._float_p = np.array(
                [[float(x) for x in row] for row in self.p], dtype=float
            )
        return self._float_p

    def min_row_gap(self) -> Optional[Fraction]:
        """Smallest nonzero gap |p_i(j) - p_i'(j)| between conditional rows."""
        gaps = [
            abs(self.rows[i][j] - self.rows[i2][j])
            for i in range(self.m)
            for i2 in range(i + 1, self.m)
            for j in range(self.n)
            if self.rows[i][j] != self.rows[i2][j]
        ]
        return min(gaps) if gaps else None

    def distinct_rows(self) -> bool:
        return len(set(self.rows)) == self.m

    def key(self) -> tuple:
        return (self.m, self.n, self.p)

    def __eq__(self, other) -> bool:
        return isinstance(other, BernoulliSpec) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"BernoulliSpec(m={self.m}, n={self.n})"


def build_spec(m: int, n: int, weights: Sequence[Sequence[RationalLike]]) -> BernoulliSpec:
    """Validate an ``m x n`` rational weight matrix and derive its marginals."""
    return BernoulliSpec.build(m, n, weights)


def uniform_spec(m: int, n: int) -> BernoulliSpec:
    w = [[Fraction(1, m * n)] * n for _ in range(m)]
    return build_spec(m, n, w)


def carpet_spec(m: int, n: int, cells: Iterable[tuple[int, int]]) -> BernoulliSpec:
    """Uniform digit weights on the given set of grid cells ``(i, j)``."""
    cells = list(cells)
    w = [[ZERO] * n for _ in range(m)]
    share = Fraction(1, len(cells))
    for i, j in cells:
        w[i][j] += share
    return build_spec(m, n, w)


def _check_words(spec: BernoulliSpec, i: Word, j: Word) -> None:
    if i.alphabet != spec.m or j.alphabet != spec.n:
        raise IncompatibleSpecs(
            f"words over alphabets ({i.alphabet},{j.alphabet}) "
            f"vs spec ({spec.m},{spec.n})"
        )


def cylinder_mass(spec: BernoulliSpec, i: Word, j: Word) -> Fraction:
    """Exact mass mu([i] x [j]).

    Paired positions contribute the joint weight, the unpaired tail of the
    longer word contributes the corresponding marginal:

        prod_{l < min} p[i_l][j_l] * prod q[i_l] * prod r[j_l].
    """
    _check_words(spec, i, j)
    a, b = len(i), len(j)
    mass = ONE
    for l in range(min(a, b)):
        mass *= spec.p[i[l]][j[l]]
        if mass == 0:
            return ZERO
    for l in range(b, a):
        mass *= spec.q[i[l]]
        if mass == 0:
            return ZERO
    for l in range(a, b):
        mass *= spec.r[j[l]]
        if mass == 0:
            return ZERO
    return mass


def fiber_cylinder_mass(spec: BernoulliSpec, i: Word, j: Word) -> Fraction:
    """Mass mu_i([j]) of the conditional measure on the fiber over ``i``."""
    _check_words(spec, i, j)
    if len(i) < len(j):
        raise DepthMismatch(f"fiber word of length {len(j)} over base of length {len(i)}")
    mass = ONE
    for l in range(len(j)):
        mass *= spec.rows[i[l]][j[l]]
        if mass == 0:
            return ZERO
    return mass


# ---------------------------------------------------------------------------
# Cylinder measures
# ---------------------------------------------------------------------------


class CylinderMeasure:
    """A probability measure on Sigma known exactly on finite cylinders.

    Concrete subclasses compute ``mass([i'] x [j'])`` from their defining
    parameters; tables are only materialized on demand.  ``generation`` is
    the depth up to which the representation is trusted.
    """

    spec: BernoulliSpec
    generation: int

    def mass(self, i: Word, j: Word) -> Fraction:
        raise NotImplementedError

    def psi_params(self) -> Optional[tuple[Optional[int], Word]]:
        """Return ``(k, prefix)`` when the measure is a Psi/Psi_k image."""
        return None

    def _check_generation(self, i: Word, j: Word) -> None:
        if max(len(i), len(j)) > self.generation:
            raise InsufficientDepth(
                f"cylinder of generation {max(len(i), len(j))} beyond cap {self.generation}"
            )

    def blowup(self, i: Word, j: Word) -> "CylinderMeasure":
        return BlowupMeasure(self, i, j)

    def slab(self, gen: int) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
        """All masses at exactly generation ``gen`` in both coordinates."""
        out = {}
        for idig in itertools.product(range(self.spec.m), repeat=gen):
            iw = Word(idig, self.spec.m)
            for jdig in itertools.product(range(self.spec.n), repeat=gen):
                out[(idig, jdig)] = self.mass(iw, Word(jdig, self.spec.n))
        return out

    def table(self, gen: int) -> dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction]:
        """All masses with both word lengths at most ``gen``."""
        out = {}
        for a in range(gen + 1):
            for b in range(gen + 1):
                for idig in itertools.product(range(self.spec.m), repeat=a):
                    iw = Word(idig, self.spec.m)
                    for jdig in itertools.product(range(self.spec.n), repeat=b):
                        out[(idig, jdig)] = self.mass(iw, Word(jdig, self.spec.n))
        return out


class BernoulliMeasure(CylinderMeasure):
    """The Bernoulli measure mu itself, exact at every generation."""

    def __init__(self, spec: BernoulliSpec, generation: int = 10**9):
        self.spec = spec
        self.generation = generation

    def mass(self, i: Word, j: Word) -> Fraction:
        self._check_generation(i, j)
        return cylinder_mass(self.spec, i, j)

    def psi_params(self):
        # mu equals Psi_0(w) for every w: before any fiber information is
        # pinned the parametrized form reduces to the product law itself.
        return (0, Word((), self.spec.m))

    def __repr__(self):
        return f"BernoulliMeasure({self.spec!r})"


class PsiMeasure(CylinderMeasure):
    """Parametrized magnified measure.

    ``k is None`` gives ``Psi(i) = pi_1(mu) x mu_i``: the product of the
    I-marginal with the fiber conditional at ``i``.  Finite ``k`` gives
    ``Psi_k(i)``, the fiber average over the generation-``k`` neighborhood:

        Psi_k(i)([i'] x [j']) =
            (1 / pi_1mu[i|_k]) * integral over [i|_k i'] of mu_v[j'].

    Both are evaluated in closed form: position ``l`` of ``j'`` contributes
    the conditional row of ``i`` (for ``l < k``), of ``i'`` (for
    ``k <= l < k + |i'|``), and the marginal ``r`` beyond.
    """

    def __init__(self, spec: BernoulliSpec, prefix: Word, k: Optional[int], generation: Optional[int] = None):
        if prefix.alphabet != spec.m:
            raise IncompatibleSpecs("Psi prefix must be a word over I")
        if k is not None and len(prefix) < k:
            raise InsufficientDepth(f"Psi_{k} needs a prefix of length >= {k}")
        pinned = len(prefix) if k is None else k
        for l in range(pinned):
            if spec.q[prefix[l]] == 0:
                raise ZeroMassCylinder(
                    f"letter {prefix[l]} at position {l} has zero marginal"
                )
        self.spec = spec
        self.prefix = prefix
        self.k = k
        if generation is None:
            # Psi(i) masses need rows of i up to |j'|; Psi_k only up to k.
            generation = len(prefix) if k is None else 10**9
        self.generation = generation

    def mass(self, i: Word, j: Word) -> Fraction:
        self._check_generation(i, j)
        spec = self.spec
        mass = ONE
        for l in range(len(i)):
            mass *= spec.q[i[l]]
            if mass == 0:
                return ZERO
        if self.k is None:
            if len(j) > len(self.prefix):
                raise InsufficientDepth(
                    f"Psi prefix of length {len(self.prefix)} cannot resolve "
                    f"a fiber cylinder of length {len(j)}"
                )
            for l in range(len(j)):
                mass *= spec.rows[self.prefix[l]][j[l]]
                if mass == 0:
                    return ZERO
            return mass
        k = self.k
        for l in range(len(j)):
            if l < k:
                row = spec.rows[self.prefix[l]]
                mass *= row[j[l]]
            elif l < k + len(i):
                mass *= spec.rows[i[l - k]][j[l]]
            else:
                mass *= spec.r[j[l]]
            if mass == 0:
                return ZERO
        return mass

    def psi_params(self):
        return (self.k, self.prefix)

    def __repr__(self):
        tag = "Psi" if self.k is None else f"Psi_{self.k}"
        return f"{tag}({self.prefix.digits!r})"


class BlowupMeasure(CylinderMeasure):
    """Measure renormalized to a cylinder: nu^C = nu([i .] x [j .]) / nu(C)."""

    def __init__(self, base: CylinderMeasure, i: Word, j: Word):
        _check_words(base.spec, i, j)
        self.base = base
        self.iword = i
        self.jword = j
        self.spec = base.spec
        self.generation = base.generation - max(len(i), len(j))
        if self.generation < 0:
            raise InsufficientDepth("blow-up exhausts the stored generation")
        self.norm = base.mass(i, j)
        if self.norm == 0:
            raise ZeroMassCylinder(
                f"cylinder [{i.digits}] x [{j.digits}] has measure zero"
            )

    def mass(self, i: Word, j: Word) -> Fraction:
        self._check_generation(i, j)
        return self.base.mass(self.iword + i, self.jword + j) / self.norm

    def blowup(self, i: Word, j: Word) -> "CylinderMeasure":
        # composing blow-ups concatenates the cylinders
        return BlowupMeasure(self.base, self.iword + i, self.jword + j)

    def __repr__(self):
        return f"Blowup({self.base!r}, {self.iword.digits!r}, {self.jword.digits!r})"


def blowup(nu: CylinderMeasure, i: Word, j: Word) -> CylinderMeasure:
    """Blow ``nu`` up on the cylinder ``[i] x [j]`` (exact renormalization)."""
    if len(i) == 0 and len(j) == 0:
        return nu
    return nu.blowup(i, j)


def psi_measure(
    spec: BernoulliSpec,
    i: Word,
    k: Optional[int] = None,
    h: Optional[int] = None,
) -> PsiMeasure:
    """Build ``Psi(i)`` (``k is None``) or ``Psi_k(i)``.

    ``h`` caps the trusted generation; for ``Psi`` the stored prefix must
    reach it, for ``Psi_k`` the prefix must reach ``k``.
    """
    if k is None:
        if h is not None and len(i) < h:
            raise InsufficientDepth(f"Psi at generation {h} needs |i| >= {h}")
        return PsiMeasure(spec, i, None, generation=h if h is not None else len(i))
    if len(i) < k:
        raise InsufficientDepth(f"Psi_{k} needs |i| >= {k}")
    return PsiMeasure(spec, i.prefix(k), k, generation=h)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def sample_point(spec: BernoulliSpec, seed, depth: int) -> SymbolicPoint:
    """Draw ``depth`` i.i.d. digit pairs with law ``p`` (deterministic in seed)."""
    if depth < 1:
        raise InsufficientDepth("depth must be >= 1")
    rng = _as_rng(seed)
    flat = spec.p_float().reshape(-1)
    flat = flat / flat.sum()
    idx = rng.choice(len(flat), size=depth, p=flat)
    idig = (idx // spec.n).astype(int)
    jdig = (idx % spec.n).astype(int)
    return SymbolicPoint(
        Word(tuple(int(d) for d in idig), spec.m),
        Word(tuple(int(d) for d in jdig), spec.n),
    )


def measures_agree_to(
    nu1: CylinderMeasure, nu2: CylinderMeasure, gen: int
) -> Optional[int]:
    """First generation ``g <= gen`` where the two measures disagree.

    Generation ``g`` compares every cylinder with both word lengths exactly
    ``g``; by additivity this covers all coarser cylinders.  Returns ``None``
    when no disagreement is found up to ``gen``.
    """
    if nu1.spec.m != nu2.spec.m or nu1.spec.n != nu2.spec.n:
        raise IncompatibleSpecs("measures over different alphabets")
    for g in range(1, gen + 1):
        if nu1.slab(g) != nu2.slab(g):
            return g
    return None
