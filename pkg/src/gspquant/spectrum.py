"""Spectrum of the covariance operator.

On L^2([0, T]) the covariance operator of the process has eigenvalues

    lambda_ell = (T / x_ell)^2,

where x_ell is the unique root of  cot(x) = (k/T) x  in the interval
((ell - 1) pi, (2 ell - 1) pi / 2].  The matching eigenfunction is

    phi_ell(t) = norm * ( sin(t / sqrt(lambda)) + (k / sqrt(lambda)) cos(t / sqrt(lambda)) ),

with norm fixed so that phi_ell has unit L^2 norm.  Note the trig argument
is t / sqrt(lambda); the variant with T in the numerator that appears in
some derivations is a typo and does not satisfy the boundary conditions
(phi'(T) = 0 plus the value condition at t = 0), which is easy to confirm by
direct substitution into the integral equation.

For k = 0 the roots are exactly (2 ell - 1) pi / 2 and no iteration is
performed.  For k > 0 the default solver works on u = x - (ell - 1) pi with
cot(x) = cot(u), which keeps the residual evaluable to full precision at
large ell where cot is violently ill-conditioned near multiples of pi.
A separate undamped-Newton mode starting from 1e-5 + (ell - 1) pi is kept
for fidelity experiments; unlike the bracketed default it may escape its
interval, and that outcome is reported rather than hidden.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma

from .kernel import ProcessParams
from .validation import as_float, as_index

HALF_PI = math.pi / 2.0

__all__ = [
    "EigenPair",
    "Spectrum",
    "CSeqEntry",
    "PaperNewtonResult",
    "SolverError",
    "solve_root",
    "eigenvalue",
    "eigenfunction",
    "spectrum_batch",
    "c_sequence",
    "tail_bounds",
    "newton_paper_mode",
]


class SolverError(RuntimeError):
    """Root solve failed to converge (unreachable for the bracketed method).

    Carries the failing index and the bracketing interval so batch callers
    can report exactly where the spectrum computation broke.
    """

    def __init__(self, message, *, ell, k, T, bracket):
        super().__init__(
            f"{message} (ell={ell}, k={k}, T={T}, bracket=({bracket[0]!r}, {bracket[1]!r}))"
        )
        self.ell = ell
        self.k = k
        self.T = T
        self.bracket = bracket


@dataclass(frozen=True)
class EigenPair:
    """One eigenpair: index, root x, eigenvalue (T/x)^2, L^2 normalizer.

    ``residual`` is |cot(x) - (k/T) x| evaluated at the returned root via the
    shifted variable u = x - (ell - 1) pi, which is the only way to measure
    it accurately at large ell.
    """

    ell: int
    x: float
    lam: float
    norm: float
    residual: float


@dataclass(frozen=True)
class CSeqEntry:
    """Ratio c_ell = lambda_ell * ((2 ell - 1) pi / 2)^2 / T^2.

    Equals the eigenvalue divided by the k = 0 eigenvalue of the same index,
    so c_ell >= 1 always and c_ell = 1 exactly when k = 0.
    """

    ell: int
    c: float


@dataclass(frozen=True)
class PaperNewtonResult:
    """Outcome of the undamped Newton fidelity mode.

    ``in_bracket`` records whether the converged root landed inside
    ((ell - 1) pi, (2 ell - 1) pi / 2]; escapes are reported, not repaired.
    ``residual`` is |cot(x) - (k/T) x| evaluated directly at x (full-argument
    evaluation, so it degrades with ell; see module docstring).
    """

    ell: int
    x: float
    converged: bool
    in_bracket: bool
    iterations: int
    residual: float


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenpairs ell = 1..L for one parameter set."""

    params: ProcessParams
    pairs: tuple[EigenPair, ...]

    def __post_init__(self):
        lam = np.array([p.lam for p in self.pairs], dtype=float)
        if lam.size and not np.all(np.diff(lam) < 0.0):
            raise ValueError("eigenvalues must be strictly decreasing in ell")
        lam.setflags(write=False)
        object.__setattr__(self, "_lam", lam)

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def __iter__(self):
        return iter(self.pairs)

    @property
    def lambdas(self) -> np.ndarray:
        """Eigenvalues as a read-only array, index ell-1."""
        return self._lam

    def tail_after(self, m: int) -> tuple[float, float]:
        """Rigorous brackets for sum(lambda_ell, ell > m).

        Computed eigenvalues up to len(self) enter exactly; only the part
        beyond the computed spectrum uses the analytic interval enclosure,
        so the bracket tightens as the spectrum is extended.
        """
        m = as_index("m", m, minimum=0)
        if m > len(self):
            raise ValueError(f"m={m} exceeds spectrum length {len(self)}")
        exact = math.fsum(self._lam[m:])
        lo, hi = tail_bounds(self.params, len(self))
        return exact + lo, exact + hi


def _warm_start(kappa: float, offset: float) -> float:
    # Root of the small-u model cot(u) ~ 1/u - u/3 against kappa*(offset+u):
    # u^2 (kappa + 1/3) + kappa*offset*u - 1 = 0, in the rationalized form
    # 2 / (b + sqrt(b^2 + 4a)) that stays accurate for large b.
    a = kappa + 1.0 / 3.0
    b = kappa * offset
    disc = b * b + 4.0 * a
    u = 1.0 / b if math.isinf(disc) else 2.0 / (b + math.sqrt(disc))
    if not (0.0 < u < HALF_PI):
        u = 0.5 * HALF_PI
    return u


def _solve_u(kappa: float, offset: float, tol: float, max_iter: int):
    """Solve cot(u) = kappa * (offset + u) on (0, pi/2) for kappa > 0.

    Safeguarded Newton: g is strictly decreasing and convex here, Newton
    steps that leave the current sign bracket fall back to bisection.
    Returns (u, residual, iterations).
    """
    lo = 0.0  # virtual: g -> +inf as u -> 0+
    hi = HALF_PI
    u = _warm_start(kappa, offset)
    for it in range(1, max_iter + 1):
        cot = 1.0 / math.tan(u)
        x = offset + u
        g = cot - kappa * x
        if g > 0.0:
            lo = u
        else:
            hi = u
        # g' = -(1 + cot^2) - kappa
        du = g / (1.0 + cot * cot + kappa)
        if abs(g) <= tol * (1.0 + kappa * x) and abs(du) <= tol * x:
            return u, abs(g), it
        nxt = u + du
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi) if lo > 0.0 else 0.5 * hi
        u = nxt
    raise SolverError(
        f"no convergence within {max_iter} iterations",
        ell=int(round(offset / math.pi)) + 1,
        k=kappa,
        T=1.0,
        bracket=(lo, hi),
    )


def _root_record(params: ProcessParams, ell: int, tol: float):
    """Return (x, u, residual) for index ell; exact closed form when k = 0."""
    if params.k == 0.0:
        u = HALF_PI
        x = (2 * ell - 1) * HALF_PI
        residual = abs(1.0 / math.tan(HALF_PI))  # cot(pi/2) up to rounding
        return x, u, residual
    kappa = params.slope
    offset = (ell - 1) * math.pi
    try:
        u, residual, _ = _solve_u(kappa, offset, tol, 200)
    except SolverError as err:
        raise SolverError(
            "bracketed solve failed",
            ell=ell,
            k=params.k,
            T=params.T,
            bracket=err.bracket,
        ) from err
    return offset + u, u, residual


def solve_root(params: ProcessParams, ell: int, tol: float = 1e-12) -> float:
    """Root of cot(x) = (k/T) x in ((ell-1) pi, (2 ell - 1) pi/2].

    The residual |cot(x) - (k/T) x| at the returned root is at most
    tol * (1 + (k/T) x).  For k = 0 the closed form is returned directly.

    Representational limit: for extreme slopes, (k/T) * (ell-1) * pi above
    about 4e15, the root sits closer to the left endpoint than one ulp of
    it, so the returned double rounds onto (ell-1) pi; the solve itself is
    performed (and its residual reported) in the shifted variable and
    remains accurate.
    """
    ell = as_index("ell", ell)
    tol = as_float("tol", tol, minimum=0.0, exclusive_min=True)
    x, _, _ = _root_record(params, ell, tol)
    return x


def eigenvalue(params: ProcessParams, ell: int, tol: float = 1e-12) -> float:
    """Eigenvalue (T / x_ell)^2."""
    x = solve_root(params, ell, tol)
    return (params.T / x) ** 2


def _norm_const(k: float, T: float, x: float, u: float) -> float:
    # Closed form of 1 / sqrt(S) with
    # S = integral over [0, T] of (sin(w t) + k w cos(w t))^2 dt,  w = x / T.
    # sin(2x) = sin(2u) and cos(2x) = cos(2u) because x = (ell-1) pi + u.
    w = x / T
    kw = k * w
    s2 = math.sin(2.0 * u)
    c2 = math.cos(2.0 * u)
    S = 0.5 * T * (1.0 + kw * kw) + (kw * kw - 1.0) * s2 / (4.0 * w) + 0.5 * k * (1.0 - c2)
    return 1.0 / math.sqrt(S)


def _make_pair(params: ProcessParams, ell: int, tol: float) -> EigenPair:
    x, u, residual = _root_record(params, ell, tol)
    lam = (params.T / x) ** 2
    norm = _norm_const(params.k, params.T, x, u)
    return EigenPair(ell=ell, x=x, lam=lam, norm=norm, residual=residual)


def spectrum_batch(params: ProcessParams, count: int, tol: float = 1e-12) -> Spectrum:
    """First ``count`` eigenpairs, assembled in index order.

    Each solve is independent and deterministic, so the result does not
    depend on any execution schedule.
    """
    count = as_index("count", count)
    tol = as_float("tol", tol, minimum=0.0, exclusive_min=True)
    pairs = tuple(_make_pair(params, ell, tol) for ell in range(1, count + 1))
    return Spectrum(params=params, pairs=pairs)


def eigenfunction(pair: EigenPair, params: ProcessParams, t):
    """Evaluate the unit-norm eigenfunction at time(s) t in [0, T].

    Accepts a scalar or ndarray; vectorized over t.
    """
    w = pair.x / params.T
    kw = params.k * w
    arg = w * np.asarray(t, dtype=float)
    values = pair.norm * (np.sin(arg) + kw * np.cos(arg))
    if np.ndim(t) == 0:
        return float(values)
    return values


def _wiener_root(ell: int) -> float:
    return (2 * ell - 1) * HALF_PI


def c_sequence(params: ProcessParams, count: int, tol: float = 1e-12) -> list[CSeqEntry]:
    """c_ell = lambda_ell * ((2 ell - 1) pi / 2)^2 / T^2 for ell = 1..count.

    Computed as the squared root ratio so that k = 0 yields exactly 1.0.
    """
    count = as_index("count", count)
    entries = []
    for ell in range(1, count + 1):
        x = solve_root(params, ell, tol)
        ratio = _wiener_root(ell) / x
        entries.append(CSeqEntry(ell=ell, c=ratio * ratio))
    return entries


def tail_bounds(params: ProcessParams, after: int) -> tuple[float, float]:
    """Interval enclosure of sum(lambda_ell, ell > after) from the bracketing
    lambda_ell in [T^2/((2 ell - 1) pi/2)^2, T^2/((ell - 1) pi)^2).

    Both series tails are exact trigamma values:
    sum_{ell>L} (2 ell - 1)^-2 = psi'(L + 1/2) / 4 and
    sum_{ell>L} (ell - 1)^-2 = psi'(L).  For after = 0 the upper endpoint is
    infinite (the ell = 1 interval is unbounded above).
    """
    after = as_index("after", after, minimum=0)
    scale = (params.T / math.pi) ** 2
    lower = scale * float(polygamma(1, after + 0.5))
    upper = scale * float(polygamma(1, after)) if after >= 1 else math.inf
    return lower, upper


def newton_paper_mode(
    params: ProcessParams,
    ell: int,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> PaperNewtonResult:
    """Undamped Newton on g(x) = cot(x) - (k/T) x from x0 = 1e-5 + (ell-1) pi.

    Fidelity mode: iterates on the full variable x with no bracket
    safeguard.  Divergence within the budget and interval escapes are
    reported in the result instead of raising.
    """
    ell = as_index("ell", ell)
    tol = as_float("tol", tol, minimum=0.0, exclusive_min=True)
    max_iter = as_index("max_iter", max_iter)
    kappa = params.slope
    offset = (ell - 1) * math.pi
    x = 1e-5 + offset
    converged = False
    iterations = max_iter
    for it in range(1, max_iter + 1):
        cot = 1.0 / math.tan(x)
        g = cot - kappa * x
        if not math.isfinite(g):
            iterations = it
            break
        dx = g / (1.0 + cot * cot + kappa)
        x_next = x + dx
        if not math.isfinite(x_next) or x_next <= 0.0:
            iterations = it
            break
        if abs(dx) <= tol * max(1.0, abs(x_next)):
            x = x_next
            converged = True
            iterations = it
            break
        x = x_next
    in_bracket = bool(offset < x <= (2 * ell - 1) * HALF_PI)
    residual = abs(1.0 / math.tan(x) - kappa * x) if math.isfinite(x) else math.inf
    return PaperNewtonResult(
        ell=ell,
        x=x,
        converged=converged,
        in_bracket=in_bracket,
        iterations=iterations,
        residual=residual,
    )
