"""Rotation-driven magnification dynamics.

The eccentricity of the approximate squares is governed by the circle
rotation by ``alpha = log m / log n``.  Phases are held exactly: as
fractions when ``alpha`` is rational (``m`` and ``n`` powers of a common
base) and as fixed-point integers at a configurable precision otherwise,
so that floor counts and threshold tests are reproducible and certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .errors import InsufficientDepth, OrderViolation, PrecisionExhausted
from .symbolic import (
    BernoulliMeasure,
    BernoulliSpec,
    CylinderMeasure,
    PsiMeasure,
    SymbolicPoint,
    Word,
    blowup,
    psi_measure,
)

DEFAULT_PRECISION = 256


@dataclass(frozen=True)
class RationalityCertificate:
    """Outcome of the exact rationality test for log m / log n."""

    rational: Optional[Fraction]
    base: Optional[int] = None

    @property
    def is_rational(self) -> bool:
        return self.rational is not None


def _power_exponent(x: int, b: int) -> Optional[int]:
    """Return e with b**e == x, or None."""
    e = 0
    while x > 1:
        if x % b:
            return None
        x //= b
        e += 1
    return e


def classify_alpha(m: int, n: int) -> RationalityCertificate:
    """Decide by integer arithmetic whether log m / log n is rational.

    It is rational exactly when m = b**u and n = b**v for a common base b;
    then alpha = u/v in lowest terms.
    """
    m, n = int(m), int(n)
    if m < 2 or m >= n:
        raise OrderViolation(f"need 2 <= m < n, got m={m}, n={n}")
    for b in range(2, m + 1):
        u = _power_exponent(m, b)
        if u is None:
            continue
        v = _power_exponent(n, b)
        if v is not None:
            return RationalityCertificate(Fraction(u, v), base=b)
    return RationalityCertificate(None)


def _alpha_fixed_point(m: int, n: int, prec: int) -> int:
    """floor(2**prec * log m / log n) via guarded multiprecision logs."""
    with mpmath.workprec(prec + 64):
        a = mpmath.log(m) / mpmath.log(n)
        return int(mpmath.floor(mpmath.ldexp(a, prec)))


class PhaseState:
    """Phase t in [0,1) together with the rotation angle alpha.

    Internally both t and alpha are integers over a common modulus: the
    denominator lattice in the rational case, ``2**prec`` otherwise.  In
    fixed-point mode the stored angle is ``floor(alpha * 2**prec)``, a
    one-sided approximation, and ``steps`` tracks accumulated drift so
    floor/threshold decisions can be certified (:class:`PrecisionExhausted`
    when the margin is smaller than the drift).
    """

    __slots__ = ("m", "n", "prec", "alpha_frac", "mod", "alpha_num", "t_num", "steps")

    def __init__(self, m, n, prec, alpha_frac, mod, alpha_num, t_num, steps):
        self.m = m
        self.n = n
        self.prec = prec
        self.alpha_frac = alpha_frac
        self.mod = mod
        self.alpha_num = alpha_num
        self.t_num = t_num
        self.steps = steps

    @staticmethod
    def create(m: int, n: int, t=0, prec: int = DEFAULT_PRECISION) -> "PhaseState":
        cert = classify_alpha(m, n)
        t = Fraction(t)
        if not 0 <= t < 1:
            t -= math.floor(t)
        if cert.is_rational:
            a = cert.rational
            mod = a.denominator * t.denominator // math.gcd(a.denominator, t.denominator)
            return PhaseState(
                m, n, prec, a, mod,
                a.numerator * (mod // a.denominator),
                t.numerator * (mod // t.denominator),
                0,
            )
        mod = 1 << prec
        t_num = (t.numerator * mod) // t.denominator
        return PhaseState(m, n, prec, None, mod, _alpha_fixed_point(m, n, prec), t_num, 0)

    # -- queries -----------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.alpha_frac is not None

    @property
    def t_float(self) -> float:
        return self.t_num / self.mod

    @property
    def t_fraction(self) -> Fraction:
        return Fraction(self.t_num, self.mod)

    @property
    def alpha_float(self) -> float:
        return self.alpha_num / self.mod

    def _certify(self, margin: int, extra: int) -> None:
        if not self.is_rational and margin <= self.steps + extra + 1:
            raise PrecisionExhausted(
                f"{self.prec}-bit phase cannot separate a floor/threshold "
                f"decision (margin {margin} ulp, drift {self.steps + extra})"
            )

    def splits_fiber(self) -> bool:
        """True when t >= 1 - alpha, i.e. this step also refines the J side."""
        thr = self.mod - self.alpha_num
        self._certify(abs(self.t_num - thr), 0)
        return self.t_num >= thr

    def advance(self, k: int = 1) -> "PhaseState":
        """The rotated phase phi^k(t) = t + k*alpha mod 1."""
        return PhaseState(
            self.m, self.n, self.prec, self.alpha_frac, self.mod,
            self.alpha_num, (self.t_num + k * self.alpha_num) % self.mod,
            self.steps + (0 if self.is_rational else k),
        )

    def ell(self, k: int) -> int:
        """Revolution count ell_t(k) = floor(alpha*k + t)."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        v = self.alpha_num * k + self.t_num
        rem = v % self.mod
        self._certify(self.mod - rem, k)
        return v // self.mod

    def ell_hitcount(self, k: int) -> int:
        """Same count, evaluated as #{k' < k : phi^k'(t) >= 1 - alpha}."""
        thr = self.mod - self.alpha_num
        t, a, mod = self.t_num, self.alpha_num, self.mod
        count = 0
        for _ in range(k):
            if t >= thr:
                count += 1
            t += a
            if t >= mod:
                t -= mod
        return count

    def orbit_floats(self, count: int, stride: int = 1) -> np.ndarray:
        """Phases phi^(stride*r)(t) for r < count, as floats."""
        out = np.empty(count)
        t, a, mod = self.t_num, self.alpha_num * stride, self.mod
        inv = 1.0 / mod
        for r in range(count):
            out[r] = t * inv
            t = (t + a) % mod
        return out

    def __repr__(self):
        kind = f"alpha={self.alpha_frac}" if self.is_rational else f"prec={self.prec}"
        return f"PhaseState(m={self.m}, n={self.n}, t={self.t_float:.6f}, {kind})"


def rotate_and_count(phase: PhaseState, k: int, verify: bool = False):
    """Return (phi^k(t), ell_t(k)).

    With ``verify=True`` the floor formula is cross-checked against the
    threshold hit count, which must agree exactly at working precision.
    """
    ell = phase.ell(k)
    if verify:
        hits = phase.ell_hitcount(k)
        if hits != ell:
            raise AssertionError(
                f"floor/hit-count mismatch at k={k}: {ell} vs {hits}"
            )
    return phase.advance(k), ell


# ---------------------------------------------------------------------------
# Approximate squares
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproxSquare:
    """Cell R(i|_k, j|_ell): width m^-k, height n^-ell, phase of its shape."""

    spec: BernoulliSpec
    iprefix: Word
    jprefix: Word
    x0: Fraction
    y0: Fraction
    phase: PhaseState

    @property
    def k(self) -> int:
        return len(self.iprefix)

    @property
    def ell(self) -> int:
        return len(self.jprefix)

    @property
    def width(self) -> Fraction:
        return Fraction(1, self.spec.m ** self.k)

    @property
    def height(self) -> Fraction:
        return Fraction(1, self.spec.n ** self.ell)

    @property
    def eccentricity(self) -> float:
        """Height/width ratio of the normalized shape, n^t in [1, n)."""
        return float(self.spec.n) ** self.phase.t_float

    def rect(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.x0, self.x0 + self.width, self.y0, self.y0 + self.height)

    @staticmethod
    def root(spec: BernoulliSpec, phase: PhaseState) -> "ApproxSquare":
        return ApproxSquare(
            spec, Word((), spec.m), Word((), spec.n), Fraction(0), Fraction(0), phase
        )

    @staticmethod
    def from_prefixes(spec, iprefix: Word, jprefix: Word, phase: PhaseState) -> "ApproxSquare":
        x0 = Fraction(0)
        for l, d in enumerate(iprefix):
            x0 += Fraction(d, spec.m ** (l + 1))
        y0 = Fraction(0)
        for l, d in enumerate(jprefix):
            y0 += Fraction(d, spec.n ** (l + 1))
        return ApproxSquare(spec, iprefix, jprefix, x0, y0, phase)


def partition_children(square: ApproxSquare) -> list[ApproxSquare]:
    """One application of the approximate-square partition operator.

    The cell splits into m columns of width 1/m; when t >= 1 - alpha each
    column splits further into n rows.  Children are upper-right half-open
    translates similar to the shape at phase phi(t).
    """
    spec = square.spec
    split_j = square.phase.splits_fiber()
    child_phase = square.phase.advance(1)
    cw = square.width / spec.m
    out = []
    if split_j:
        ch = square.height / spec.n
        for i in range(spec.m):
            for j in range(spec.n):
                out.append(
                    ApproxSquare(
                        spec,
                        square.iprefix + Word((i,), spec.m),
                        square.jprefix + Word((j,), spec.n),
                        square.x0 + i * cw,
                        square.y0 + j * ch,
                        child_phase,
                    )
                )
    else:
        for i in range(spec.m):
            out.append(
                ApproxSquare(
                    spec,
                    square.iprefix + Word((i,), spec.m),
                    square.jprefix,
                    square.x0 + i * cw,
                    square.y0,
                    child_phase,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Skew product orbit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SceneryState:
    """One state of the magnification orbit: Z^k(t, i, j, mu)."""

    spec: BernoulliSpec
    point: SymbolicPoint
    k: int
    ell: int
    phase: PhaseState  # phase phi^k(t) of the current shape

    def measure(self, h: Optional[int] = None) -> PsiMeasure:
        return minimeasure_psi(self.spec, self.point, self.k, self.ell, h)

    def cylinder(self) -> tuple[Word, Word]:
        return self.point.iword.prefix(self.k), self.point.jword.prefix(self.ell)


class SceneryOrbit:
    """The q-sparse orbit Z^{q r}(t, i, j, mu), r < N, stored compactly.

    Offsets into the base point's words are kept instead of copies, so a
    state costs O(1); phases are stepped exactly and exported as floats.
    """

    def __init__(self, spec: BernoulliSpec, phase: PhaseState, point: SymbolicPoint,
                 N: int, q: int = 1, h: int = 0):
        if N < 1 or q < 1:
            raise ValueError("need N >= 1 and q >= 1")
        kmax = q * (N - 1)
        if len(point.iword) < q * N:
            raise InsufficientDepth(
                f"i-word of length {len(point.iword)} < q*N = {q * N}"
            )
        ell_max = phase.ell(kmax)
        if len(point.jword) < ell_max + h:
            raise InsufficientDepth(
                f"j-word of length {len(point.jword)} < ell+h = {ell_max + h}"
            )
        self.spec = spec
        self.point = point
        self.q = q
        self.N = N
        self.phase0 = phase
        ks = np.arange(N, dtype=np.int64) * q
        ells = np.empty(N, dtype=np.int64)
        tfloats = np.empty(N, dtype=float)
        t_nums = []
        # incremental threshold stepping: this IS the hit-count formula,
        # while PhaseState.ell uses the floor formula; tests compare them
        t, a, mod = phase.t_num, phase.alpha_num, phase.mod
        thr = mod - a
        ell = 0
        inv = 1.0 / mod
        r = 0
        for k in range(kmax + 1):
            if k % q == 0:
                ells[r] = ell
                tfloats[r] = t * inv
                t_nums.append(t)
                r += 1
            if t >= thr:
                ell += 1
            t = t + a
            if t >= mod:
                t -= mod
        self.ks = ks
        self.ells = ells
        self.phase_floats = tfloats
        self._t_nums = t_nums
        self._mod = mod

    def __len__(self) -> int:
        return self.N

    def truncate(self, N: int) -> "SceneryOrbit":
        """View of the first N states (no recomputation)."""
        if N > self.N:
            raise InsufficientDepth(f"orbit has only {self.N} states")
        out = object.__new__(SceneryOrbit)
        out.spec = self.spec
        out.point = self.point
        out.q = self.q
        out.N = N
        out.phase0 = self.phase0
        out.ks = self.ks[:N]
        out.ells = self.ells[:N]
        out.phase_floats = self.phase_floats[:N]
        out._t_nums = self._t_nums[:N]
        out._mod = self._mod
        return out

    def phase_fractions(self) -> list[Fraction]:
        return [Fraction(t, self._mod) for t in self._t_nums]

    def state(self, r: int) -> SceneryState:
        k = int(self.ks[r])
        return SceneryState(
            self.spec, self.point, k, int(self.ells[r]), self.phase0.advance(k)
        )

    def states(self):
        return (self.state(r) for r in range(self.N))


def z_orbit(spec: BernoulliSpec, phase: PhaseState, point: SymbolicPoint,
            N: int, q: int = 1, h: int = 0) -> SceneryOrbit:
    """Run the magnification skew product; states r < N represent Z^{q r}."""
    return SceneryOrbit(spec, phase, point, N, q, h)


def minimeasure_psi(spec: BernoulliSpec, point: SymbolicPoint, k: int, ell: int,
                    h: Optional[int] = None) -> PsiMeasure:
    """Fast path: the measure coordinate of Z^k is Psi_{k-ell}(sigma^ell i)."""
    if ell > k:
        raise ValueError(f"ell={ell} exceeds k={k}")
    if len(point.iword) < k:
        raise InsufficientDepth("base i-word shorter than k")
    return psi_measure(spec, point.iword.shift(ell).prefix(k - ell), k - ell, h=h)


def minimeasure(spec: BernoulliSpec, phase: PhaseState, point: SymbolicPoint,
                k: int, h: Optional[int] = None) -> PsiMeasure:
    """Measure coordinate of Z^k(t, i, j, mu) in parametrized form."""
    ell = phase.ell(k)
    return minimeasure_psi(spec, point, k, ell, h)


def minimeasure_blowup(spec: BernoulliSpec, phase: PhaseState, point: SymbolicPoint,
                       k: int) -> CylinderMeasure:
    """Oracle path: direct cylinder-ratio blow-up of mu at [i|_k] x [j|_ell].

    Must agree exactly with :func:`minimeasure` on every stored cylinder.
    """
    ell = phase.ell(k)
    if len(point.jword) < ell:
        raise InsufficientDepth("base j-word shorter than ell")
    return blowup(
        BernoulliMeasure(spec),
        point.iword.prefix(k),
        point.jword.prefix(ell),
    )


# ---------------------------------------------------------------------------
# Geometric coding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rescaling:
    """The hyperbolic normalization S_s = diag(n^-s/2, n^s/2)."""

    n: int
    s: float

    @property
    def scale_x(self) -> float:
        return float(self.n) ** (-self.s / 2.0)

    @property
    def scale_y(self) -> float:
        return float(self.n) ** (self.s / 2.0)

    def apply(self, x, y):
        return self.scale_x * x, self.scale_y * y

    def normalized_box(self) -> tuple[float, float]:
        """Image of the unit square: the normalized shape R_s^*."""
        return self.scale_x, self.scale_y


def coded_point(point: SymbolicPoint, m: int, n: int) -> tuple[float, float]:
    """Adic coding xi(i,j) = (sum i_l m^-(l+1), sum j_l n^-(l+1)), truncated."""
    x = 0.0
    for l in range(len(point.iword) - 1, -1, -1):
        x = (x + point.iword[l]) / m
    y = 0.0
    for l in range(len(point.jword) - 1, -1, -1):
        y = (y + point.jword[l]) / n
    return x, y


@dataclass(frozen=True)
class EmbedResult:
    xy: tuple[float, float]
    square: ApproxSquare
    rescaling: Rescaling


def embed(spec: BernoulliSpec, point: SymbolicPoint, k: int, phase: PhaseState) -> EmbedResult:
    """Code the point into [0,1]^2 with its depth-k approximate square.

    Returns the truncated adic coordinates, the cell R(i|_k, j|_ell) that
    Delta^k assigns to the point, and the hyperbolic rescaling at the
    cell's phase phi^k(t).
    """
    ell = phase.ell(k)
    if len(point.iword) < k or len(point.jword) < ell:
        raise InsufficientDepth(f"embed needs |i| >= {k} and |j| >= {ell}")
    square = ApproxSquare.from_prefixes(
        spec, point.iword.prefix(k), point.jword.prefix(ell), phase.advance(k)
    )
    s = phase.advance(k).t_float
    return EmbedResult(coded_point(point, spec.m, spec.n), square, Rescaling(spec.n, s))
