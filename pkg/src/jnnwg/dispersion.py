"""Dispersion relations of long-range (JNN) hopping waveguides and their inverse design.

A waveguide with hoppings ``-h_j exp(i theta_j)`` between sites ``l`` and
``l + j`` has the band

    omega(k) = omega0 - sum_j 2 h_j cos(j k + theta_j).

The sine channel (``theta_j = pi/2``) produces odd powers of ``k`` and the
cosine channel (``theta_j = 0``) even powers, so matching Taylor coefficients
order by order turns dispersion design into a small linear system in the
``h_j``. Those systems are solved exactly over the rationals for ``J <= 8``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _rational
from ._rational import SingularSystemError

HALF_PI = math.pi / 2
EXACT_MAX_J = 8
WINDOW_SAMPLES = 4096
WINDOW_K_TOL = 1e-6

TARGET_KINDS = ("chiral_linear", "symmetric_linear", "quadratic", "cubic", "polynomial")

__all__ = [
    "HoppingSet",
    "DispersionTarget",
    "DispersionSummary",
    "TaylorSeries",
    "SingularSystemError",
    "omega_of_k",
    "group_velocity",
    "taylor_coefficients",
    "solve_chiral_linear",
    "solve_symmetric_linear",
    "solve_polynomial_target",
    "solve_target",
    "linear_window",
    "summarize",
]


@dataclass(frozen=True)
class HoppingSet:
    """Hopping amplitudes ``h_j`` and phases ``theta_j`` for offsets ``j``.

    ``terms`` holds ``(j, h, theta)`` triples sorted by ``j``. Rates are in
    units of the reference velocity named by ``units``.
    """

    omega0: float
    terms: tuple[tuple[int, float, float], ...]
    units: str = "v_g"

    def __post_init__(self):
        terms = tuple(sorted((int(j), float(h), float(th)) for j, h, th in self.terms))
        if not terms:
            raise ValueError("a hopping set needs at least one term")
        js = [j for j, _, _ in terms]
        if len(set(js)) != len(js):
            raise ValueError(f"hopping offsets must be distinct, got {js}")
        if js[0] < 1:
            raise ValueError("hopping offsets must be >= 1")
        vals = [self.omega0] + [x for _, h, th in terms for x in (h, th)]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("hopping amplitudes, phases and omega0 must be finite")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "omega0", float(self.omega0))

    @classmethod
    def from_arrays(cls, h: Sequence[float], theta: float | Sequence[float] = HALF_PI,
                    omega0: float = 0.0) -> "HoppingSet":
        """Build a set with offsets ``1..len(h)``; ``theta`` may be a scalar."""
        h = list(h)
        if np.ndim(theta) == 0:
            theta = [float(theta)] * len(h)
        if len(theta) != len(h):
            raise ValueError("h and theta must have the same length")
        return cls(omega0, tuple((j + 1, hj, tj) for j, (hj, tj) in enumerate(zip(h, theta))))

    @property
    def J(self) -> int:
        return self.terms[-1][0]

    @property
    def offsets(self) -> np.ndarray:
        return np.array([j for j, _, _ in self.terms], dtype=float)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([h for _, h, _ in self.terms])

    @property
    def phases(self) -> np.ndarray:
        return np.array([th for _, _, th in self.terms])

    def dense_amplitudes(self) -> np.ndarray:
        """Amplitudes indexed by ``j - 1`` with zeros for missing offsets."""
        out = np.zeros(self.J)
        for j, h, _ in self.terms:
            out[j - 1] = h
        return out

    def scaled(self, factor: float) -> "HoppingSet":
        return HoppingSet(self.omega0, tuple((j, factor * h, th) for j, h, th in self.terms), self.units)

    def to_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "units": self.units,
            "terms": [{"j": j, "h": h, "theta": th} for j, h, th in self.terms],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HoppingSet":
        try:
            terms = tuple((t["j"], t["h"], t.get("theta", 0.0)) for t in doc["terms"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed hopping document: {exc}") from None
        return cls(float(doc.get("omega0", 0.0)), terms, str(doc.get("units", "v_g")))


@dataclass(frozen=True)
class DispersionTarget:
    """What the designed band should look like near its expansion point.

    ``coefficient`` is the group velocity for the linear kinds and the
    prefactor ``q_g``/``c_g`` for quadratic/cubic; it defaults to 1 (the
    reference rate). ``coefficients`` holds ``alpha_0..alpha_n`` for the
    polynomial kind, measured relative to ``omega0``.
    """

    kind: str
    coefficient: float | None = None
    coefficients: tuple[float, ...] | None = None
    omega0: float = 0.0

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}; expected one of {TARGET_KINDS}")
        if self.kind == "polynomial":
            if self.coefficients is None:
                raise ValueError("polynomial target needs coefficients")
            coeffs = tuple(float(c) for c in self.coefficients)
            if not any(coeffs):
                raise ValueError("polynomial target is identically zero")
            object.__setattr__(self, "coefficients", coeffs)
        else:
            c = 1.0 if self.coefficient is None else float(self.coefficient)
            if c == 0.0 or not math.isfinite(c):
                raise ValueError(f"{self.kind} target needs a finite nonzero coefficient")
            object.__setattr__(self, "coefficient", c)

    @property
    def expansion_point(self) -> float:
        return HALF_PI if self.kind == "symmetric_linear" else 0.0

    @property
    def degree(self) -> int:
        if self.kind == "polynomial":
            nz = [i for i, c in enumerate(self.coefficients) if c != 0.0]
            return nz[-1]
        return {"chiral_linear": 1, "symmetric_linear": 1, "quadratic": 2, "cubic": 3}[self.kind]

    def evaluate(self, k) -> np.ndarray:
        """Target curve omega_target(k)."""
        k = np.asarray(k, dtype=float)
        if self.kind == "polynomial":
            return self.omega0 + np.polynomial.polynomial.polyval(k, self.coefficients)
        x = k - self.expansion_point
        return self.omega0 + self.coefficient * x ** self.degree

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "omega0": self.omega0}
        if self.kind == "polynomial":
            doc["coefficients"] = list(self.coefficients)
        else:
            doc["coefficient"] = self.coefficient
        return doc


@dataclass(frozen=True)
class TaylorSeries:
    """Power series of omega(k) about ``point``: ``omega = sum_n coeffs[n] (k - point)^n``.

    ``even`` and ``odd`` follow the usual sign bookkeeping: ``even[i]`` is
    ``D_i`` (``A_i`` at +-pi/2) with ``omega ~ omega0 - sum even[i] x^{2i}``,
    and ``odd[i-1]`` is ``C_i`` with ``omega ~ ... + sum C_i x^{2i-1}``. At
    +-pi/2 ``odd[0]`` is therefore the slope there (the ``B_0`` of the
    symmetric design, taken with the positive-slope sign convention).
    """

    point: float
    omega0: float
    coeffs: np.ndarray

    @property
    def even(self) -> np.ndarray:
        out = -self.coeffs[0::2].copy()
        out[0] += self.omega0
        return out

    @property
    def odd(self) -> np.ndarray:
        return self.coeffs[1::2].copy()

    # names used for the k = 0 expansion
    @property
    def C(self) -> np.ndarray:
        return self.odd

    @property
    def D(self) -> np.ndarray:
        return self.even

    # names used for the k = +-pi/2 expansion
    @property
    def A(self) -> np.ndarray:
        return self.even

    @property
    def B(self) -> np.ndarray:
        return self.odd


@dataclass(frozen=True)
class DispersionSummary:
    v_g: float
    v_h: float
    linear_window: tuple[float, float]
    samples: np.ndarray = field(repr=False)  # columns k, omega, d omega/dk


def omega_of_k(hops: HoppingSet, k):
    """Band frequency; ``k`` may be a scalar or an array."""
    k = np.asarray(k, dtype=float)
    phase = np.multiply.outer(k, hops.offsets) + hops.phases
    out = hops.omega0 - np.sum(2.0 * hops.amplitudes * np.cos(phase), axis=-1)
    return float(out) if out.ndim == 0 else out


def group_velocity(hops: HoppingSet, k):
    """Analytic d omega / dk."""
    k = np.asarray(k, dtype=float)
    phase = np.multiply.outer(k, hops.offsets) + hops.phases
    out = np.sum(2.0 * hops.amplitudes * hops.offsets * np.sin(phase), axis=-1)
    return float(out) if out.ndim == 0 else out


def _check_point(point: float) -> float:
    for p in (0.0, HALF_PI, -HALF_PI):
        if abs(point - p) < 1e-12:
            return p
    raise ValueError(f"unsupported expansion point {point}; use 0 or +-pi/2")


def taylor_coefficients(hops: HoppingSet, point: float = 0.0, max_order: int | None = None) -> TaylorSeries:
    """Exact Taylor coefficients of omega(k) about 0 or +-pi/2.

    Uses ``d^n/dk^n cos(jk + theta) = j^n cos(jk + theta + n pi/2)``.
    """
    point = _check_point(point)
    if max_order is None:
        max_order = 2 * hops.J
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    coeffs = np.zeros(max_order + 1)
    for n in range(max_order + 1):
        total = 0.0
        for j, h, th in hops.terms:
            total -= 2.0 * h * j ** n * math.cos(j * point + th + n * HALF_PI) / math.factorial(n)
        coeffs[n] = total
    coeffs[0] += hops.omega0
    # cos(x + n pi/2) leaves ~1e-17 residue where it should vanish
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    coeffs[np.abs(coeffs) < 1e-15 * scale] = 0.0
    return TaylorSeries(point, hops.omega0, coeffs)


# -- design systems -----------------------------------------------------------

def _sine_row(i: int, offsets: Iterable[int]) -> list[Fraction]:
    """Row of C_i = sum_j 2 h_j (-1)^{i+1} j^{2i-1} / (2i-1)! (theta = pi/2)."""
    return [Fraction(2 * (-1) ** (i + 1) * j ** (2 * i - 1), math.factorial(2 * i - 1)) for j in offsets]


def _cosine_row(i: int, offsets: Iterable[int]) -> list[Fraction]:
    """Row of D_i = sum_j 2 h_j (-1)^i j^{2i} / (2i)! (theta = 0)."""
    return [Fraction(2 * (-1) ** i * j ** (2 * i), math.factorial(2 * i)) for j in offsets]


def _solve_design(rows: list[list[Fraction]], rhs: Sequence[float]) -> np.ndarray:
    """Solve ``rows @ h = rhs``; exact inverse for small systems."""
    n = len(rows)
    if n <= EXACT_MAX_J:
        inv = _rational.inverse(rows)
        nz = [(c, float(v)) for c, v in enumerate(rhs) if v != 0.0]
        # products of exact rationals with one float keep homogeneity bit-exact
        return np.array([sum(float(row[c]) * v for c, v in nz) if nz else 0.0 for row in inv])
    a = np.array([[float(x) for x in row] for row in rows])
    if np.linalg.cond(a) > 1e14:
        raise SingularSystemError("design system is numerically singular")
    return np.linalg.solve(a, np.asarray(rhs, dtype=float))


def _check_J(J: int) -> int:
    if int(J) != J or J < 1:
        raise ValueError(f"J must be a positive integer, got {J!r}")
    return int(J)


def solve_chiral_linear(J: int, v_g: float = 1.0, omega0: float = 0.0) -> HoppingSet:
    """Sine-channel hoppings with C_1 = v_g and C_2..C_J = 0.

    >>> solve_chiral_linear(2).amplitudes.round(6).tolist()
    [0.666667, -0.083333]
    """
    J = _check_J(J)
    offsets = range(1, J + 1)
    rows = [_sine_row(i, offsets) for i in range(1, J + 1)]
    h = _solve_design(rows, [v_g] + [0.0] * (J - 1))
    return HoppingSet.from_arrays(h, HALF_PI, omega0)


def solve_symmetric_linear(J: int, v_g: float = 1.0, omega0: float = 0.0) -> HoppingSet:
    """Cosine-channel hoppings linear around k = +-pi/2.

    Even offsets only feed the even Taylor coefficients at pi/2 through a
    homogeneous system, so they vanish. The odd offsets solve
    ``B_0 = v_g, B_i = 0`` with one equation per odd offset; the sign is
    fixed so that the slope at ``k = +pi/2`` is ``+v_g``.
    """
    J = _check_J(J)
    odd = list(range(1, J + 1, 2))
    rows = []
    for i in range(len(odd)):
        # slope-positive odd coefficient at +pi/2: sum 2 h j^{2i+1} (-1)^i sin(j pi/2) / (2i+1)!
        rows.append([
            Fraction(2 * (-1) ** i * (-1) ** ((j - 1) // 2) * j ** (2 * i + 1), math.factorial(2 * i + 1))
            for j in odd
        ])
    h_odd = _solve_design(rows, [v_g] + [0.0] * (len(odd) - 1))
    h = np.zeros(J)
    h[0::2] = h_odd
    return HoppingSet.from_arrays(h, 0.0, omega0)


def _channel_solve(J: int, kind: str, conditions: dict[int, float]) -> np.ndarray:
    """Solve one channel given ``{order: value}`` conditions on the Taylor series at 0.

    ``kind`` is ``"cos"`` (orders are the i of D_i) or ``"sin"`` (i of C_i).
    """
    offsets = range(1, J + 1)
    row = _cosine_row if kind == "cos" else _sine_row
    orders = list(conditions)
    return _solve_design([row(i, offsets) for i in orders], [conditions[i] for i in orders])


def solve_polynomial_target(J: int, target: DispersionTarget) -> HoppingSet:
    """Hoppings whose Taylor series at k = 0 reproduces a polynomial target.

    Quadratic and cubic targets follow the textbook condition lists (for
    ``J >= 2`` the quadratic imposes D_0 = 0, D_1 = -q_g, D_2.. = 0; the
    cubic C_1 = 0, C_2 = c_g, C_3.. = 0), keeping the first J conditions with
    the retained order first. General polynomials of degree <= 2J - 1 are
    split into a cosine channel (even powers) and a sine channel (odd
    powers); when both are present each offset gets ``h_j >= 0`` and a phase
    from ``(h cos theta, h sin theta)``.
    """
    J = _check_J(J)
    if target.kind == "quadratic":
        orders = [1, 0] + list(range(2, J))
        conds = {i: (-target.coefficient if i == 1 else 0.0) for i in orders[:J]}
        h = _channel_solve(J, "cos", conds)
        return HoppingSet.from_arrays(h, 0.0, target.omega0)
    if target.kind == "cubic":
        orders = [2, 1] + list(range(3, J + 1))
        conds = {i: (target.coefficient if i == 2 else 0.0) for i in orders[:J]}
        h = _channel_solve(J, "sin", conds)
        return HoppingSet.from_arrays(h, HALF_PI, target.omega0)
    if target.kind != "polynomial":
        raise ValueError(f"solve_polynomial_target does not handle {target.kind!r}")

    alpha = list(target.coefficients)
    if target.degree > 2 * J - 1:
        raise ValueError(f"degree {target.degree} needs J >= {(target.degree + 2) // 2}, got J = {J}")
    alpha += [0.0] * (2 * J - len(alpha))
    even = {i: -alpha[2 * i] for i in range(J)}
    odd = {i: alpha[2 * i - 1] for i in range(1, J + 1)}
    has_even = any(even.values())
    has_odd = any(odd.values())
    cos_part = _channel_solve(J, "cos", even) if has_even else np.zeros(J)
    sin_part = _channel_solve(J, "sin", odd) if has_odd else np.zeros(J)
    if not has_odd:
        return HoppingSet.from_arrays(cos_part, 0.0, target.omega0)
    if not has_even:
        return HoppingSet.from_arrays(sin_part, HALF_PI, target.omega0)
    h = np.hypot(cos_part, sin_part)
    theta = np.arctan2(sin_part, cos_part)
    return HoppingSet.from_arrays(h, theta, target.omega0)


def solve_target(J: int, target: DispersionTarget) -> HoppingSet:
    """Dispatch on ``target.kind``."""
    if target.kind == "chiral_linear":
        return solve_chiral_linear(J, target.coefficient, target.omega0)
    if target.kind == "symmetric_linear":
        return solve_symmetric_linear(J, target.coefficient, target.omega0)
    return solve_polynomial_target(J, target)


def linear_window(hops: HoppingSet, target: DispersionTarget, rel_tol: float = 0.01,
                  n_samples: int = WINDOW_SAMPLES) -> tuple[float, float]:
    """Largest interval centred on the design point where the band tracks the target.

    The tolerance is ``rel_tol`` times the bandwidth of omega over the
    Brillouin zone. The half-width is scanned on ``n_samples`` points and the
    first violation is refined by bisection to 1e-6 in k. The interval never
    leaves [-pi, pi], so for the +pi/2 design point it is at most [0, pi].
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    n_samples = max(int(n_samples), WINDOW_SAMPLES)
    p = target.expansion_point
    grid = np.linspace(-math.pi, math.pi, n_samples + 1)
    band = omega_of_k(hops, grid)
    tol = rel_tol * float(band.max() - band.min())
    w_max = math.pi - abs(p)

    def deviation(w):
        k = np.array([p - w, p + w])
        return np.max(np.abs(omega_of_k(hops, k) - target.evaluate(k)), axis=0)

    ws = np.linspace(0.0, w_max, n_samples)
    dev = deviation(ws)
    bad = np.nonzero(dev > tol)[0]
    if bad.size == 0:
        return (p - w_max, p + w_max)
    i = int(bad[0])
    if i == 0:
        return (p, p)
    lo, hi = float(ws[i - 1]), float(ws[i])
    while hi - lo > WINDOW_K_TOL:
        mid = 0.5 * (lo + hi)
        if deviation(mid) > tol:
            hi = mid
        else:
            lo = mid
    return (p - lo, p + lo)


def summarize(hops: HoppingSet, target: DispersionTarget, rel_tol: float = 0.01,
              n_samples: int = 1025) -> DispersionSummary:
    """Design-point velocity, fast-branch speed near +-pi, window and BZ samples."""
    k = np.linspace(-math.pi, math.pi, n_samples)
    samples = np.column_stack([k, omega_of_k(hops, k), group_velocity(hops, k)])
    return DispersionSummary(
        v_g=group_velocity(hops, target.expansion_point),
        v_h=abs(group_velocity(hops, math.pi)),
        linear_window=linear_window(hops, target, rel_tol),
        samples=samples,
    )
