"""Structured singular value for the block structure [w] (+) z I_{n-1}.

For this structure det(I - A([w] (+) z I)) = Q(z) - w P(z), where P and Q are
built from grouped principal-minor sums of A.  The zero set of that pencil
avoids the closed bidisc of radius r exactly when Q has no root in |z| <= r
and r * max_{|z|=r} |P/Q| < 1 (maximum modulus).  Feasibility is monotone in
r, so mu = 1 / sup{feasible r} is found by a bracketing search on r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Indeterminate, InputError, SizeTooSmall
from .matrices import _square_stack, as_cmatrix, minor_sums_split
from .numerics import (
    ComplexPoly,
    circle_max,
    horner,
    match_roots,
    polar_grid_min,
    polish_clusters,
    roots_rows,
    series_quotient,
    trimmed_degree,
)
from .verdict import DEFAULT_MARGIN, MembershipVerdict, Verdict

MAX_ITER = 60
_TAYLOR_EXTRA = 3
_CANCEL_TOL = 1e-7


@dataclass(frozen=True)
class WitnessPair:
    """P(z) = sum (-1)^j x_{j+1} z^j and Q(z) = 1 + sum (-1)^j y_j z^j."""

    P: ComplexPoly
    Q: ComplexPoly
    n: int

    def coeff_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Untrimmed length-n coefficient rows, as used by the batch engines."""
        Pc = np.zeros(self.n, dtype=complex)
        Qc = np.zeros(self.n, dtype=complex)
        Pc[: len(self.P.coeffs)] = self.P.coeffs
        Qc[: len(self.Q.coeffs)] = self.Q.coeffs
        return Pc, Qc

    def pencil(self, z, w):
        """Q(z) - w P(z)."""
        return self.Q(z) - w * self.P(z)


@dataclass(frozen=True)
class MuResult:
    value: float
    lower: float
    upper: float
    witness: tuple[complex, complex] | None = None
    iterations: int = 0


def pair_coeffs(X, Y) -> tuple[np.ndarray, np.ndarray]:
    """Batch coefficient rows (B, n) of P and Q from quotient coordinates."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.asarray(Y, dtype=complex).reshape(X.shape[0], -1)
    n = X.shape[1]
    if Y.shape[1] != n - 1:
        raise InputError(f"x has {n} entries but y has {Y.shape[1]} (expected {n - 1})")
    sign = (-1.0) ** np.arange(n)
    Pc = X * sign
    Qc = np.concatenate([np.ones((X.shape[0], 1), dtype=complex), Y * sign[1:]], axis=1)
    return Pc, Qc


def pair_from_point(x, y) -> WitnessPair:
    Pc, Qc = pair_coeffs(x, y)
    return WitnessPair(ComplexPoly(Pc[0]), ComplexPoly(Qc[0]), Pc.shape[1])


def witness_pair(A) -> WitnessPair:
    """Witness pencil of A, so that det(I - A([w] (+) zI)) = Q(z) - w P(z)."""
    A = as_cmatrix(A)
    if A.shape[0] < 2:
        raise SizeTooSmall("the structure needs n >= 2")
    first, rest = minor_sums_split(A)
    return pair_from_point(first, rest)


def _stack_coeffs(A_or_pair) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(A_or_pair, WitnessPair):
        Pc, Qc = A_or_pair.coeff_rows()
        return Pc[None, :], Qc[None, :]
    A = _square_stack(A_or_pair)
    if A.shape[-1] < 2:
        raise SizeTooSmall("the structure needs n >= 2")
    A = A.reshape((-1,) + A.shape[-2:])
    first, rest = minor_sums_split(A)
    return pair_coeffs(first, rest)


def _q_roots(Qc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Roots of each Q row (NaN padded) and the smallest root modulus (inf if none)."""
    roots = roots_rows(Qc)
    mods = np.where(np.isfinite(roots), np.abs(roots), np.inf)
    return roots, mods.min(axis=1) if mods.shape[1] else np.full(Qc.shape[0], np.inf)


def boundary_max(Pc, Qc, r, qroots=None):
    """max_{|z| = r} |P/Q| row-wise, with the maximizing z."""
    Pc = np.atleast_2d(Pc)
    Qc = np.atleast_2d(Qc)
    r = np.broadcast_to(np.asarray(r, dtype=float), (Pc.shape[0],))

    def ratio(z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(horner(Pc, z) / horner(Qc, z))

    extra = None if qroots is None else np.angle(qroots)
    return circle_max(ratio, r, extra_angles=extra)


def _log_gauge(Pc, Qc, qroots, r):
    """log(r * max_{|z|=r} |P/Q|); negative means feasible at radius r."""
    M, z = boundary_max(Pc, Qc, r, qroots)
    with np.errstate(divide="ignore"):
        return np.log(r * M), z


def taylor_radius_bound(Pc, Qc) -> np.ndarray:
    """Upper bound on the feasible radius from Cauchy estimates of P/Q's Taylor coefficients.

    |c_k| r^k <= max_{|z|=r} |P/Q|, so r * max >= 1 once |c_k| r^(k+1) >= 1.
    """
    terms = Pc.shape[1] + _TAYLOR_EXTRA
    c = np.abs(series_quotient(Pc, Qc, terms))
    k = np.arange(terms)
    with np.errstate(divide="ignore", over="ignore"):
        bounds = np.where(c > 0, c ** (-1.0 / (k + 1)), np.inf)
    return bounds.min(axis=1)


def _deflate_common(Pc, Qc, qroots, candidates):
    """Cancel matched roots of P and Q on the candidate rows.

    Returns (rows, reduced P rows, reduced Q rows, smallest cancelled root) for
    the rows where something cancelled; reduced rows are rescaled so Q(0) = 1.
    """
    rows, Pr, Qr, cmin = [], [], [], []
    L = Pc.shape[1]
    for b in np.nonzero(candidates)[0]:
        qf = qroots[b][np.isfinite(qroots[b])]
        pr = roots_rows(Pc[b][None])[0]
        pf = pr[np.isfinite(pr)]
        # multiple roots come out scattered; polish them to exact coincidence first
        qf = polish_clusters(Qc[b, : trimmed_degree(Qc[b]) + 1], qf)
        pf = polish_clusters(Pc[b, : trimmed_degree(Pc[b]) + 1], pf)
        pairs = match_roots(qf, pf, _CANCEL_TOL)
        if not pairs:
            continue
        iq, ip = {i for i, _ in pairs}, {j for _, j in pairs}
        cancelled = qf[sorted(iq)]
        P = ComplexPoly.from_roots([r for j, r in enumerate(pf) if j not in ip], Pc[b, trimmed_degree(Pc[b])])
        Q = ComplexPoly.from_roots([r for i, r in enumerate(qf) if i not in iq], Qc[b, trimmed_degree(Qc[b])])
        s = Q.coeffs[0]
        rows.append(b)
        Pr.append(np.pad(P.coeffs / s, (0, L - len(P.coeffs))))
        Qr.append(np.pad(Q.coeffs / s, (0, L - len(Q.coeffs))))
        cmin.append(cancelled[np.argmin(np.abs(cancelled))])
    if not rows:
        return None
    return np.array(rows), np.array(Pr), np.array(Qr), np.array(cmin)


def _with_common_roots(Pc, Qc, qroots, rho, pzero, tol, decide):
    """Handle rows where P and Q share roots, or return None if there are none.

    A common root c puts the whole line {z = c} in the zero set, so
    mu = max(1/|c|, mu of the reduced pair).  Cancelling first keeps the
    circle maxima away from removable singularities, where rounding would
    otherwise dominate the gauge.
    """
    B = Pc.shape[0]
    mods = np.where(np.isfinite(qroots), np.abs(qroots), np.inf)
    nearest = qroots[np.arange(B), np.argmin(mods, axis=1)] if qroots.shape[1] else np.full(B, np.nan + 0j)
    with np.errstate(invalid="ignore", over="ignore"):
        p_at = np.abs(horner(Pc, nearest[:, None])[:, 0])
        p_scale = np.abs(Pc).sum(axis=1) * np.maximum(1.0, rho) ** (Pc.shape[1] - 1)
    # only a cancelled nearest root can matter: an uncancelled one is a pole capping the radius
    found = _deflate_common(Pc, Qc, qroots, ~pzero & np.isfinite(rho) & (p_at <= 1e-4 * p_scale))
    if found is None:
        return None
    rows, Pr, Qr, cmin = found
    rest = np.setdiff1d(np.arange(B), rows)
    out = {"value": np.zeros(B), "lower": np.zeros(B), "upper": np.zeros(B),
           "z": np.zeros(B, dtype=complex), "w": np.zeros(B, dtype=complex), "iterations": np.zeros(B, dtype=int)}
    if rest.size:
        sub = mu_eval_batch((Pc[rest], Qc[rest]), tol, decide, _deflate=False)
        for key in out:
            out[key][rest] = sub[key]
    red = mu_eval_batch((Pr, Qr), tol, decide, _deflate=False)
    line = 1.0 / np.abs(cmin)
    on_line = line >= red["upper"]
    for key in ("value", "lower", "upper"):
        out[key][rows] = np.maximum(line, red[key])
    out["z"][rows] = np.where(on_line, cmin, red["z"])
    out["w"][rows] = np.where(on_line, 0.0, red["w"])
    out["iterations"][rows] = red["iterations"]
    return out


def mu_eval_batch(A_or_coeffs, tol: float = 1e-9, decide: tuple[float, float] | None = None, *,
                  _deflate: bool = True):
    """Vectorized mu for a stack of matrices or a (Pc, Qc) coefficient pair.

    Returns a dict of arrays: value, lower, upper, z, w (witness), iterations.
    With ``decide=(lo, hi)`` a row stops as soon as upper < lo or lower > hi.
    """
    if isinstance(A_or_coeffs, tuple):
        Pc, Qc = (np.atleast_2d(np.asarray(c, dtype=complex)) for c in A_or_coeffs)
    else:
        Pc, Qc = _stack_coeffs(A_or_coeffs)
    if tol <= 0:
        raise InputError("tol must be positive")
    finite = np.all(np.isfinite(Pc), axis=1) & np.all(np.isfinite(Qc), axis=1)
    if not finite.all():
        # overflowed inputs carry no information: report an unbounded bracket
        B = Pc.shape[0]
        out = {"value": np.full(B, np.nan), "lower": np.zeros(B), "upper": np.full(B, np.inf),
               "z": np.full(B, np.nan + 0j), "w": np.full(B, np.nan + 0j), "iterations": np.zeros(B, dtype=int)}
        if finite.any():
            sub = mu_eval_batch((Pc[finite], Qc[finite]), tol, decide, _deflate=_deflate)
            for key in out:
                out[key][finite] = sub[key]
        return out
    B = Pc.shape[0]
    qroots, rho = _q_roots(Qc)
    pzero = ~np.any(Pc != 0, axis=1)
    if _deflate:
        split = _with_common_roots(Pc, Qc, qroots, rho, pzero, tol, decide)
        if split is not None:
            return split

    rl = np.zeros(B)
    rh = np.full(B, np.inf)
    zl = np.full(B, np.nan + 0j)
    iters = np.zeros(B, dtype=int)
    done = np.zeros(B, dtype=bool)

    # P == 0: the zero set is {Q = 0} x C, so sup r is the smallest Q root.
    # If additionally Q has no roots the zero set is empty and mu = 0.
    mods = np.where(np.isfinite(qroots), np.abs(qroots), np.inf)
    nearest = qroots[np.arange(B), np.argmin(mods, axis=1)] if qroots.shape[1] else np.full(B, np.nan + 0j)
    root_witness = pzero & np.isfinite(rho)
    rl[pzero] = rh[pzero] = rho[pzero]
    done |= pzero

    rh = np.where(done, rh, np.minimum(rho, taylor_radius_bound(Pc, Qc)))

    zl[root_witness] = nearest[root_witness]

    # Find a feasible lower radius by halving from the upper bound.
    gl = np.zeros(B)
    gh = np.full(B, np.inf)
    sp = np.full(B, np.nan)  # previous infeasible point, for extrapolation
    gp = np.full(B, np.nan)
    search = ~done
    r = rh / 2
    for _ in range(200):
        idx = np.nonzero(search)[0]
        if idx.size == 0:
            break
        g, z = _log_gauge(Pc[idx], Qc[idx], qroots[idx], r[idx])
        ok = g < 0
        rl[idx[ok]], gl[idx[ok]], zl[idx[ok]] = r[idx[ok]], g[ok], z[ok]
        bad = idx[~ok]
        sp[bad], gp[bad] = np.log(rh[bad]), gh[bad]
        rh[bad], gh[bad] = r[bad], g[~ok]
        search[idx[ok]] = False
        r[bad] = r[bad] / 2
    if search.any():
        raise Indeterminate("no feasible radius found", {"rows": np.nonzero(search)[0].tolist()})

    # The gauge is convex and increasing in s = log r (three-circles), so the
    # chord through the bracket ends lands on the feasible side and the line
    # through the two latest infeasible points lands on the infeasible side.
    # Both are evaluated each round, so both ends of the bracket move.
    sl = np.log(np.where(rl > 0, rl, 1.0))
    sh = np.log(rh)

    def converged():
        with np.errstate(divide="ignore"):
            up, lo = 1.0 / rl, 1.0 / rh
        stop = (up - lo) <= tol * np.maximum(1.0, up)
        if decide is not None:
            stop |= (up < decide[0]) | (lo > decide[1])
        return stop

    def inside(s, a, b):
        return np.isfinite(s) & (s > a) & (s < b)

    for _ in range(MAX_ITER):
        idx = np.nonzero(~done & ~converged())[0]
        if idx.size == 0:
            break
        a, b, fa, fb = sl[idx], sh[idx], gl[idx], gh[idx]
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            s1 = b - fb * (b - a) / (fb - fa)
            s2 = b - fb * (b - sp[idx]) / (fb - gp[idx])
        mid = 0.5 * (a + b)
        s1 = np.where(inside(s1, a, b), s1, mid)
        s2 = np.where(inside(s2, s1, b), s2, 0.5 * (s1 + b))
        rows = np.concatenate([idx, idx])
        s = np.concatenate([s1, s2])
        g, z = _log_gauge(Pc[rows], Qc[rows], qroots[rows], np.exp(s))
        iters[idx] += 1
        for part in (slice(0, idx.size), slice(idx.size, None)):
            ri, si, gi, zi = rows[part], s[part], g[part], z[part]
            # a point outside the current bracket can only come from rounding noise; skip it
            ok = (gi < 0) & (si > sl[ri]) & (si < sh[ri])
            k = ri[ok]
            sl[k], gl[k], zl[k] = si[ok], gi[ok], zi[ok]
            bad = (gi >= 0) & (si < sh[ri]) & (si > sl[ri])
            k = ri[bad]
            sp[k], gp[k] = sh[k], gh[k]
            sh[k], gh[k] = si[bad], gi[bad]
        rl[idx], rh[idx] = np.exp(sl[idx]), np.exp(sh[idx])

    with np.errstate(divide="ignore"):
        lower = np.where(np.isfinite(rh), 1.0 / rh, 0.0)
        upper = np.where(rl > 0, 1.0 / rl, np.inf)
        mid = 0.5 * (rl + rh)
        value = np.where(np.isfinite(mid), 1.0 / mid, 0.0)
    value = np.clip(value, lower, upper)
    with np.errstate(divide="ignore", invalid="ignore"):
        wl = horner(Qc, zl[:, None])[:, 0] / horner(Pc, zl[:, None])[:, 0]
    wl = np.where(root_witness, 0.0, wl)
    return {"value": value, "lower": lower, "upper": upper, "z": zl, "w": wl, "iterations": iters}


def mu_eval(A_or_pair, tol: float = 1e-9) -> MuResult:
    """mu of a matrix (or of a precomputed witness pair) to relative bracket width tol."""
    out = mu_eval_batch(A_or_pair, tol=tol)
    z, w = out["z"][0], out["w"][0]
    witness = None if np.isnan(z) else (complex(z), complex(w))
    return MuResult(float(out["value"][0]), float(out["lower"][0]), float(out["upper"][0]), witness, int(out["iterations"][0]))


def mu_feasible(pair: WitnessPair, r: float, margin: float = DEFAULT_MARGIN) -> tuple[bool, dict]:
    """Whether the zero set of Q - wP misses the closed bidisc of radius r.

    Raises Indeterminate when the deciding quantity lies within ``margin``.
    """
    if r <= 0:
        raise InputError("radius must be positive")
    Pc, Qc = (c[None, :] for c in pair.coeff_rows())
    qroots, rho = _q_roots(Qc)
    band = margin * max(1.0, r)
    cert: dict = {"r": r, "margin": margin}
    if np.isfinite(rho[0]):
        root = qroots[0, np.nanargmin(np.abs(qroots[0]))]
        cert["nearest_q_root"] = complex(root)
        if rho[0] < r - band:
            cert["reason"] = "Q root inside the disc"
            return False, cert
        if rho[0] <= r + band:
            raise Indeterminate("Q root within the margin band of the circle", cert)
    if not np.any(Pc):
        cert["reason"] = "P vanishes; no Q root in the disc"
        return True, cert
    M, z = boundary_max(Pc, Qc, np.array([r]), qroots)
    attained = float(r * M[0])
    cert.update(worst_z=complex(z[0]), attained=attained)
    if attained <= 1 - margin:
        return True, cert
    if attained >= 1 + margin:
        cert["reason"] = "boundary value exceeds 1"
        return False, cert
    raise Indeterminate("boundary value within the margin band", cert)


def mu_brute(pair: WitnessPair, z_grid: int = 400) -> float:
    """Grid oracle: 1 / inf over the zero set of max(|z|, |w|), with w = Q(z)/P(z).

    Roots of Q (including roots shared with P) contribute the value |z|, since
    (z, 0) lies on the zero set.  Returns 0 when the zero set is empty.
    """
    if z_grid < 64:
        raise InputError("z_grid must be at least 64")
    P, Q = pair.P, pair.Q
    qroot_mod = np.inf
    if Q.degree >= 1:
        qroot_mod = float(np.min(np.abs(np.roots(Q.coeffs[::-1]))))
    if P.is_zero:
        return 0.0 if not np.isfinite(qroot_mod) else 1.0 / qroot_mod
    pscale = float(np.max(np.abs(P.coeffs)))

    def h(Z):
        p = horner(P.coeffs, Z)
        q = horner(Q.coeffs, Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(np.abs(p) > 1e-14 * pscale, np.abs(q / p), np.inf)
        return np.maximum(np.abs(Z), w)

    R0 = 1.0 if not np.isfinite(qroot_mod) else min(1.0, qroot_mod)
    best = min(polar_grid_min(h, R0, z_grid), qroot_mod)
    return 1.0 / best


def in_omega_batch(A, margin: float = DEFAULT_MARGIN, tol: float = 1e-9) -> list[MembershipVerdict]:
    """Omega membership (mu < 1) for a stack of matrices."""
    out = mu_eval_batch(A, tol=tol, decide=(1 - margin, 1 + margin))
    verdicts = []
    for lo, up, val in zip(out["lower"], out["upper"], out["value"]):
        cert = {"mu_lower": float(lo), "mu_upper": float(up), "mu": float(val)}
        if up < 1 - margin:
            verdicts.append(MembershipVerdict(Verdict.INSIDE, 1 - up, cert))
        elif lo > 1 + margin:
            verdicts.append(MembershipVerdict(Verdict.OUTSIDE, lo - 1, cert))
        else:
            verdicts.append(MembershipVerdict(Verdict.BOUNDARY, 0.0, cert))
    return verdicts


def in_omega(A, margin: float = DEFAULT_MARGIN) -> MembershipVerdict:
    """Inside iff the mu upper bound is below 1 - margin; Outside iff the lower bound exceeds 1 + margin."""
    A = as_cmatrix(A)
    if A.shape[0] < 2:
        raise SizeTooSmall("the structure needs n >= 2")
    return in_omega_batch(A[None], margin)[0]
