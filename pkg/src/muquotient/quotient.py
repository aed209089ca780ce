"""The quotient domains: projection, realization and membership oracles.

A quotient point is (x, y) in C^n x C^(n-1).  It is Inside when the zero set
of Q(z; y) - w P(z; x) misses the closed unit bidisc.  Several independent
oracles decide this:

* ``membership_char1``: root location of the (reduced) denominator plus the
  boundary maximum of |P/Q| on the unit circle (exact for n = 2, where P/Q
  is a Moebius map);
* ``membership_char2``: recursive reduction to dimension 2 over sampled xi;
* ``membership_reference``: mu of the realization matrix;
* ``membership_scan``: brute-force grid scan of the zero set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BothZero, InputError, PoleAtW, PoleAtXi, PoleAtZ, SizeTooSmall
from .matrices import (
    as_cmatrix,
    is_nonderogatory,
    minor_sums_split,
    theta,
    theta_tolerance,
    _square_stack,
)
from .mu import boundary_max, in_omega_batch, pair_coeffs, pair_from_point
from .numerics import (
    ComplexPoly,
    as_cvec,
    horner,
    match_roots,
    poly_roots,
    polar_grid_min,
    resultant,
    roots_rows,
    series_quotient,
)
from .verdict import DEFAULT_MARGIN, MembershipVerdict, Verdict, banded

POLE_TOL = 1e-12
XI_SAMPLES = 64


@dataclass(frozen=True)
class QuotientPoint:
    n: int
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_cvec(self.x)
        y = np.asarray(self.y, dtype=complex).reshape(-1)
        if self.n < 2:
            raise SizeTooSmall("quotient points need n >= 2")
        if len(x) != self.n or len(y) != self.n - 1:
            raise InputError(f"expected {self.n} x-entries and {self.n - 1} y-entries, got {len(x)} and {len(y)}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InputError("quotient point has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def of(cls, x, y) -> "QuotientPoint":
        x = as_cvec(x)
        return cls(len(x), x, y)

    @classmethod
    def zero(cls, n: int) -> "QuotientPoint":
        return cls(n, np.zeros(n, dtype=complex), np.zeros(n - 1, dtype=complex))

    def vector(self) -> np.ndarray:
        """(x, y) concatenated."""
        return np.concatenate([self.x, self.y])

    def distance(self, other: "QuotientPoint") -> float:
        return float(np.max(np.abs(self.vector() - other.vector())))


@dataclass(frozen=True)
class ReducedRational:
    num: ComplexPoly
    den: ComplexPoly
    cancelled: tuple[complex, ...] = ()
    resultant: complex | None = None

    def __call__(self, z):
        return self.num(z) / self.den(z)


@dataclass(frozen=True)
class GenericityReport:
    theta_value: complex
    nonderogatory: bool
    cyclic_first_column: bool
    generic: bool
    tolerance: float = 0.0


# -- projection and realization ---------------------------------------------


def pi_n_batch(A) -> tuple[np.ndarray, np.ndarray]:
    """Grouped minor sums of a stack of matrices: X (B, n) and Y (B, n-1)."""
    A = _square_stack(A)
    if A.shape[-1] < 2:
        raise SizeTooSmall("projection needs n >= 2")
    A = A.reshape((-1,) + A.shape[-2:])
    return minor_sums_split(A)


def pi_n(A) -> QuotientPoint:
    A = as_cmatrix(A)
    X, Y = pi_n_batch(A[None])
    return QuotientPoint(A.shape[0], X[0], Y[0])


def realize_batch(X, Y) -> np.ndarray:
    """Realization matrices B(x, y) for rows of X (B, n) and Y (B, n-1).

    The first-row entries p_1..p_{n-1} are the Taylor coefficients of P/Q at 0
    of orders 1..n-1; this is the forward substitution of the triangular system
    that makes the grouped minor sums of B reproduce x.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.asarray(Y, dtype=complex).reshape(X.shape[0], -1)
    B, n = X.shape
    Pc, Qc = pair_coeffs(X, Y)
    M = np.zeros((B, n, n), dtype=complex)
    M[:, 0, 0] = X[:, 0]
    M[:, 0, 1:] = series_quotient(Pc, Qc, n)[:, 1:]
    M[:, 1, 0] = 1.0
    # deleted block: companion form, ones below the diagonal, last column from y
    M[:, np.arange(2, n), np.arange(1, n - 1)] = 1.0
    j = np.arange(n - 1, 0, -1)  # row i of the block carries y_{n-1-i}
    M[:, 1:, -1] = ((-1.0) ** (j + 1)) * Y[:, j - 1]
    return M


def realize(q: QuotientPoint) -> np.ndarray:
    return realize_batch(q.x[None], q.y[None])[0]


def p_polys(q: QuotientPoint) -> np.ndarray:
    """The first-row entries p_1..p_{n-1} of the realization."""
    return realize(q)[0, 1:].copy()


# -- reduced rational function ----------------------------------------------


def psi_reduced(q: QuotientPoint, match_tol: float = 1e-8) -> ReducedRational:
    """P/Q with matched common roots cancelled."""
    pair = pair_from_point(q.x, q.y)
    P, Q = pair.P, pair.Q
    if P.is_zero and Q.is_zero:
        raise BothZero("both P and Q vanish identically")
    if P.is_zero:
        return ReducedRational(ComplexPoly([0.0]), ComplexPoly([1.0]), (), None)
    if P.degree < 1 or Q.degree < 1:
        return ReducedRational(P, Q, (), resultant(P, Q) if P.degree + Q.degree > 0 else None)
    rp, rq = poly_roots(P), poly_roots(Q)
    res = resultant(ComplexPoly(P.coeffs / P.scale), ComplexPoly(Q.coeffs / Q.scale))
    pairs = match_roots(rp, rq, match_tol)
    if not pairs:
        return ReducedRational(P, Q, (), res)
    used_p = {i for i, _ in pairs}
    used_q = {j for _, j in pairs}
    cancelled = tuple(complex(0.5 * (rp[i] + rq[j])) for i, j in pairs)
    num = ComplexPoly.from_roots([r for i, r in enumerate(rp) if i not in used_p], P.lead)
    den = ComplexPoly.from_roots([r for j, r in enumerate(rq) if j not in used_q], Q.lead)
    # normalize so that the reduced denominator is 1 at the origin when possible
    d0 = den.coeffs[0]
    if abs(d0) > 0:
        num, den = ComplexPoly(num.coeffs / d0), ComplexPoly(den.coeffs / d0)
    return ReducedRational(num, den, cancelled, res)


def reduced_at(red: ReducedRational, z) -> complex:
    z = complex(z)
    d = red.den(z)
    if abs(d) <= POLE_TOL * max(1.0, red.den.scale):
        raise PoleAtZ(f"reduced denominator vanishes at z={z}")
    return complex(red.num(z) / d)


def psi_at(q: QuotientPoint, z) -> complex:
    """Reduced rational function evaluated at z."""
    return reduced_at(psi_reduced(q), z)


def psi_values_batch(X, Y, Z) -> np.ndarray:
    """P/Q for rows of (X, Y) evaluated at points Z of shape (B, K) (no cancellation)."""
    Pc, Qc = pair_coeffs(X, Y)
    Z = np.asarray(Z, dtype=complex).reshape(Pc.shape[0], -1)
    return horner(Pc, Z) / horner(Qc, Z)


# -- char1 -------------------------------------------------------------------


def _moebius_slack(X, Y):
    """Exact char1 quantities for n = 2, where P/Q = (x1 - x2 z)/(1 - y1 z).

    The unit circle maps to a circle with centre (x1 - x2 conj(y1))/(1 - |y1|^2)
    and radius |x1 y1 - x2| / |1 - |y1|^2|.  Returns (root slack, boundary
    slack, worst z) with root slack 1/|y1| - 1.
    """
    x1, x2, y1 = X[:, 0], X[:, 1], Y[:, 0]
    d = 1.0 - np.abs(y1) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        root_slack = np.where(y1 != 0, 1.0 / np.abs(y1) - 1.0, np.inf)
        centre = (x1 - x2 * np.conj(y1)) / d
        radius = np.abs(x1 * y1 - x2) / np.abs(d)
        M = np.where(d != 0, np.abs(centre) + radius, np.inf)
        unit = np.where(centre != 0, centre / np.abs(centre), 1.0)
        wstar = centre + radius * unit
        den = x2 - wstar * y1
        zstar = np.where(np.abs(den) > 1e-300, (x1 - wstar) / den, 1.0)
    zstar = np.where(np.isfinite(zstar) & (np.abs(zstar) > 0), zstar / np.abs(zstar), 1.0)
    return root_slack, 1.0 - M, zstar


def char1_slack_batch(X, Y, exact_base: bool = True) -> dict:
    """Signed char1 slack for rows of quotient points.

    slack = min(smallest |Q root| - 1, 1 - max_{|z|=1} |P/Q|); positive means
    Inside.  Common roots of P and Q are roots of Q, so the cancelled-root
    condition is covered by the root term.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.asarray(Y, dtype=complex).reshape(X.shape[0], -1)
    B, n = X.shape
    Pc, Qc = pair_coeffs(X, Y)
    if n == 2 and exact_base:
        root_slack, bnd_slack, zstar = _moebius_slack(X, Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            nearest = np.where(Y[:, 0] != 0, 1.0 / Y[:, 0], np.nan)
    else:
        qroots = roots_rows(Qc)
        mods = np.where(np.isfinite(qroots), np.abs(qroots), np.inf)
        k = np.argmin(mods, axis=1) if mods.shape[1] else np.zeros(B, dtype=int)
        nearest = qroots[np.arange(B), k] if mods.shape[1] else np.full(B, np.nan + 0j)
        root_slack = (mods.min(axis=1) if mods.shape[1] else np.full(B, np.inf)) - 1.0
        bnd_slack = np.full(B, np.nan)
        zstar = np.full(B, np.nan + 0j)
        # the boundary maximum is only needed where the root test does not already fail
        need = root_slack > -0.5
        if need.any():
            M, z = boundary_max(Pc[need], Qc[need], np.ones(int(need.sum())), qroots[need])
            bnd_slack[need] = 1.0 - M
            zstar[need] = z
        bnd_slack = np.where(need, bnd_slack, np.inf)
    slack = np.minimum(root_slack, bnd_slack)
    return {
        "slack": slack,
        "root_slack": root_slack,
        "boundary_slack": bnd_slack,
        "worst_z": zstar,
        "nearest_root": nearest,
        "Pc": Pc,
        "Qc": Qc,
    }


def _char1_verdict(row: int, info: dict, margin: float, q: QuotientPoint | None = None) -> MembershipVerdict:
    slack = float(info["slack"][row])
    v = banded(slack, margin)
    root_slack = float(info["root_slack"][row])
    bnd_slack = float(info["boundary_slack"][row])
    cert: dict = {"oracle": "char1", "root_slack": root_slack, "boundary_slack": bnd_slack, "margin_used": margin}
    if v is Verdict.OUTSIDE:
        Pc, Qc = info["Pc"][row], info["Qc"][row]
        if root_slack <= bnd_slack:
            z = complex(info["nearest_root"][row])
            shared = bool(np.any(Pc)) and abs(horner(Pc, z)) <= 1e-8 * float(np.max(np.abs(Pc)))
            cert.update(reason="cancelled common root in the closed disc" if shared else "denominator root in the closed disc",
                        z=z, w=0j)
        else:
            z = complex(info["worst_z"][row])
            w = complex(horner(Qc, z) / horner(Pc, z))
            cert.update(reason="boundary value of |P/Q| exceeds 1", z=z, w=w,
                        pencil_residual=float(abs(horner(Qc, z) - w * horner(Pc, z))))
    elif v is Verdict.INSIDE:
        cert["worst_z"] = complex(info["worst_z"][row]) if np.isfinite(info["worst_z"][row]) else None
    if q is not None and v is not Verdict.BOUNDARY:
        red = psi_reduced(q)
        cert["cancelled"] = list(red.cancelled)
        if red.resultant is not None:
            cert["resultant"] = red.resultant
    return MembershipVerdict(v, abs(slack) if v is not Verdict.BOUNDARY else 0.0, cert)


def membership_char1_batch(X, Y, margin: float = DEFAULT_MARGIN) -> list[MembershipVerdict]:
    info = char1_slack_batch(X, Y)
    return [_char1_verdict(i, info, margin) for i in range(info["slack"].shape[0])]


def membership_char1(q: QuotientPoint, margin: float = DEFAULT_MARGIN) -> MembershipVerdict:
    """Denominator roots outside the closed disc and |P/Q| < 1 on the unit circle, margin-banded."""
    info = char1_slack_batch(q.x[None], q.y[None])
    return _char1_verdict(0, info, margin, q)


# -- symmetrized polydisc ----------------------------------------------------


def sympd_poly_rows(S) -> np.ndarray:
    """Ascending coefficients of z^N + sum_j (-1)^j s_j z^(N-j) for rows of S."""
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    B, N = S.shape
    rows = np.zeros((B, N + 1), dtype=complex)
    rows[:, N] = 1.0
    j = np.arange(1, N + 1)
    rows[:, N - j] = ((-1.0) ** j) * S
    return rows


def sympd_slack_batch(S) -> tuple[np.ndarray, np.ndarray]:
    """1 - max |root| for each row, and the offending root."""
    roots = roots_rows(sympd_poly_rows(S))
    mods = np.abs(roots)
    k = np.argmax(mods, axis=1)
    return 1.0 - mods.max(axis=1), roots[np.arange(roots.shape[0]), k]


def membership_sympd_point(s, margin: float = DEFAULT_MARGIN) -> MembershipVerdict:
    """Inside iff every root of z^N + sum (-1)^j s_j z^(N-j) lies in |z| < 1 - margin."""
    s = as_cvec(s)
    slack, root = sympd_slack_batch(s[None])
    v = banded(float(slack[0]), margin)
    cert = {"oracle": "sympd", "max_root_modulus": float(1 - slack[0]), "root": complex(root[0])}
    return MembershipVerdict(v, abs(float(slack[0])) if v is not Verdict.BOUNDARY else 0.0, cert)


def costara_reduce(s, z) -> np.ndarray:
    """s~_j = ((N - j) s_j - (j + 1) z s_{j+1}) / (N - z s_1), j = 1..N-1."""
    s = as_cvec(s)
    N = len(s)
    if N < 2:
        raise SizeTooSmall("reduction needs N >= 2")
    z = complex(z)
    den = N - z * s[0]
    if abs(den) <= POLE_TOL * N:
        raise PoleAtZ(f"1 - z s_1 / N vanishes at z={z}")
    j = np.arange(1, N)
    return ((N - j) * s[:-1] - (j + 1) * z * s[1:]) / den


def sympd_slice_batch(X, Y, W) -> np.ndarray:
    """Rows ((y_j - w x_{j+1}) / (1 - w x_1))_j for every (point, w) pair; shape (B, K, n-1)."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.asarray(Y, dtype=complex).reshape(X.shape[0], -1)
    W = np.asarray(W, dtype=complex).reshape(X.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = Y[:, None, :] - W[:, :, None] * X[:, None, 1:]
        return num / (1.0 - W * X[:, :1])[:, :, None]


def sympd_slice(q: QuotientPoint, w) -> np.ndarray:
    w = complex(w)
    den = 1.0 - w * q.x[0]
    if abs(den) <= POLE_TOL * max(1.0, abs(w * q.x[0])):
        raise PoleAtW(f"1 - w x_1 vanishes at w={w}")
    return (q.y - w * q.x[1:]) / den


# -- char2 ---------------------------------------------------------------------


def char2_reduce_batch(X, Y, Xi):
    """Reduced points for every (point, xi) pair: X~ (B, K, n-1), Y~ (B, K, n-2)."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.asarray(Y, dtype=complex).reshape(X.shape[0], -1)
    Xi = np.asarray(Xi, dtype=complex).reshape(X.shape[0], -1)
    n = X.shape[1]
    den = ((n - 1) - Xi * Y[:, :1])[:, :, None]
    jx = np.arange(1, n)
    jy = np.arange(1, n - 1)
    xi = Xi[:, :, None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        Xt = ((n - jx) * X[:, None, :-1] - jx * xi * X[:, None, 1:]) / den
        Yt = ((n - 1 - jy) * Y[:, None, :-1] - (jy + 1) * xi * Y[:, None, 1:]) / den
    return Xt, Yt


def char2_reduce(q: QuotientPoint, xi) -> QuotientPoint:
    if q.n < 3:
        raise SizeTooSmall("char2 reduction needs n >= 3")
    xi = complex(xi)
    if abs((q.n - 1) - xi * q.y[0]) <= POLE_TOL * (q.n - 1):
        raise PoleAtXi(f"(n-1) - xi y_1 vanishes at xi={xi}")
    Xt, Yt = char2_reduce_batch(q.x[None], q.y[None], np.array([[xi]]))
    return QuotientPoint(q.n - 1, Xt[0, 0], Yt[0, 0])


def xi_grid(samples: int) -> np.ndarray:
    """xi = 0 followed by ``samples`` equally spaced points of the unit circle."""
    return np.concatenate([[0.0], np.exp(2j * np.pi * np.arange(samples) / samples)])


def char2_slack_batch(X, Y, xi_samples: int = XI_SAMPLES):
    """Signed slack of the char2 recursion and the xi chain leading to the worst base case.

    A pole at xi0 = (n-1)/y_1 in the closed disc is itself a failure
    (Inside forces |y_1| < n-1); its slack is 1 - |y_1|/(n-1).
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.asarray(Y, dtype=complex).reshape(X.shape[0], -1)
    B, n = X.shape
    if n == 2:
        info = char1_slack_batch(X, Y)
        return info["slack"], np.zeros((B, 0), dtype=complex)
    pole_slack = 1.0 - np.abs(Y[:, 0]) / (n - 1)
    xis = xi_grid(xi_samples)
    K = len(xis)
    Xt, Yt = char2_reduce_batch(X, Y, np.broadcast_to(xis, (B, K)))
    flatX, flatY = Xt.reshape(B * K, n - 1), Yt.reshape(B * K, n - 2)
    finite = np.all(np.isfinite(flatX), axis=1) & np.all(np.isfinite(flatY), axis=1)
    sub = np.full(B * K, -np.inf)
    chain = np.zeros((B * K, n - 3), dtype=complex)
    if finite.any():
        sub[finite], chain[finite] = char2_slack_batch(flatX[finite], flatY[finite], xi_samples)
    sub = sub.reshape(B, K)
    k = np.argmin(sub, axis=1)
    rows = np.arange(B)
    worst = sub[rows, k]
    chain = np.concatenate([xis[k][:, None], chain.reshape(B, K, n - 3)[rows, k]], axis=1)
    use_pole = pole_slack < worst
    slack = np.where(use_pole, pole_slack, worst)
    with np.errstate(divide="ignore", invalid="ignore"):
        pole_xi = np.where(Y[:, 0] != 0, (n - 1) / Y[:, 0], np.nan)
    chain[use_pole] = np.nan
    chain[use_pole, 0] = pole_xi[use_pole]
    return slack, chain


def membership_char2_batch(X, Y, xi_samples: int = XI_SAMPLES, margin: float = DEFAULT_MARGIN) -> list[MembershipVerdict]:
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.shape[1] < 3:
        raise SizeTooSmall("char2 needs n >= 3")
    slack, chain = char2_slack_batch(X, Y, xi_samples)
    out = []
    for s, c in zip(slack, chain):
        v = banded(float(s), margin)
        cert = {"oracle": "char2", "xi_samples": xi_samples, "margin_used": margin}
        if v is Verdict.INSIDE:
            cert["sampled"] = True
        elif v is Verdict.OUTSIDE:
            cert["xi_chain"] = [complex(t) for t in c if np.isfinite(t)]
            cert["reason"] = "a reduced point (or a pole of the reduction) fails at the listed xi"
        out.append(MembershipVerdict(v, abs(float(s)) if v is not Verdict.BOUNDARY else 0.0, cert))
    return out


def membership_char2(q: QuotientPoint, xi_samples: int = XI_SAMPLES, margin: float = DEFAULT_MARGIN) -> MembershipVerdict:
    """Sampled recursive test; Outside verdicts carry the failing xi chain, Inside is sampled evidence."""
    return membership_char2_batch(q.x[None], q.y[None], xi_samples, margin)[0]


# -- mu-based reference and brute-force scan --------------------------------


def membership_reference_batch(X, Y, margin: float = DEFAULT_MARGIN) -> list[MembershipVerdict]:
    verdicts = in_omega_batch(realize_batch(X, Y), margin)
    out = []
    for v in verdicts:
        cert = dict(v.certificate, oracle="reference")
        out.append(MembershipVerdict(v.verdict, v.margin, cert))
    return out


def membership_reference(q: QuotientPoint, margin: float = DEFAULT_MARGIN) -> MembershipVerdict:
    """Inside iff mu of the realization matrix is below 1."""
    return membership_reference_batch(q.x[None], q.y[None], margin)[0]


def membership_scan(q: QuotientPoint, grid: int = 200, margin: float = DEFAULT_MARGIN) -> MembershipVerdict:
    """Brute-force scan: the smallest |w| = |Q(z)/P(z)| over a polar grid of the closed disc.

    The zero set meets the closed bidisc iff some root of Q lies in it or that
    minimum is at most 1.  Roots come from numpy's companion eigenvalues.
    """
    pair = pair_from_point(q.x, q.y)
    P, Q = pair.P, pair.Q
    root_mod = float(np.min(np.abs(np.roots(Q.coeffs[::-1])))) if Q.degree >= 1 else np.inf
    if P.is_zero:
        wmin = np.inf
    else:
        pscale = P.scale

        def h(Z):
            p, qv = horner(P.coeffs, Z), horner(Q.coeffs, Z)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(np.abs(p) > 1e-14 * pscale, np.abs(qv / p), np.inf)

        wmin = polar_grid_min(h, 1.0, grid, grow=False)
    slack = min(root_mod - 1.0, wmin - 1.0)
    v = banded(slack, margin)
    cert = {"oracle": "scan", "grid": grid, "min_root_modulus": root_mod, "min_w_modulus": wmin}
    return MembershipVerdict(v, abs(slack) if v is not Verdict.BOUNDARY else 0.0, cert)


# -- genericity ----------------------------------------------------------------


def genericity(A, rng=None) -> GenericityReport:
    """Whether the first sub-column of A is a cyclic vector of the deleted block."""
    A = as_cmatrix(A)
    if A.shape[0] < 2:
        raise SizeTooSmall("genericity needs n >= 2")
    At, a = A[1:, 1:], A[1:, 0]
    th = theta(At, a)
    tol = theta_tolerance(At, a)
    generic = abs(th) > tol
    nonderog = True if generic else is_nonderogatory(At, rng)
    return GenericityReport(th, nonderog, generic, generic, tol)
