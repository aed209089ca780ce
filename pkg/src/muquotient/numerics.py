"""Complex scalars and univariate polynomials.

Polynomials are stored with ascending coefficients.  The root finder is a
simultaneous Aberth-Ehrlich iteration that works on a whole batch of
same-degree polynomials at once; the scalar helpers are thin wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BothConstant, DegreeZero, IndexOutOfRange, InputError, NonConvergence

TRIM_RTOL = 1e-13
EPS = np.finfo(float).eps

_DEFAULT_SEED = 20240917


def default_rng(rng=None) -> np.random.Generator:
    """Return ``rng`` or a fixed-seed generator so results are reproducible."""
    if rng is None:
        return np.random.default_rng(_DEFAULT_SEED)
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def as_cx(z) -> complex:
    """Coerce to a finite Python complex."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InputError(f"non-finite complex value {z!r}")
    return z


def as_cvec(values) -> np.ndarray:
    v = np.atleast_1d(np.asarray(values, dtype=complex))
    if v.ndim != 1:
        raise InputError("expected a 1-d vector")
    if not np.all(np.isfinite(v)):
        raise InputError("vector has non-finite entries")
    return v


def trimmed_degree(coeffs: np.ndarray) -> int:
    """Index of the last coefficient above the relative trim tolerance (0 for the zero polynomial)."""
    mags = np.abs(coeffs)
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        return 0
    keep = np.nonzero(mags > TRIM_RTOL * top)[0]
    return int(keep[-1])


@dataclass(frozen=True)
class ComplexPoly:
    """Univariate polynomial with complex coefficients in ascending order."""

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = as_cvec(self.coeffs) if np.size(self.coeffs) else np.zeros(1, dtype=complex)
        d = trimmed_degree(c)
        c = c[: d + 1].copy()
        if np.all(c == 0):
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "ComplexPoly":
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.concatenate([[0j], c]) - r * np.concatenate([c, [0j]])
        return cls(lead * c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    @property
    def scale(self) -> float:
        return float(np.abs(self.coeffs).max())

    def __call__(self, z):
        return poly_eval(self, z)

    def __repr__(self):
        terms = ", ".join(f"{c:.6g}" for c in self.coeffs)
        return f"ComplexPoly([{terms}])"


def horner(coeffs: np.ndarray, z):
    """Evaluate ascending ``coeffs`` at ``z``.

    With 2-d ``coeffs`` of shape (B, L) and ``z`` of shape (B, K), row b of the
    result holds polynomial b evaluated at z[b].
    """
    coeffs = np.asarray(coeffs)
    z = np.asarray(z)
    if coeffs.ndim == 1:
        out = np.full(np.shape(z), coeffs[-1], dtype=complex)
        for c in coeffs[-2::-1]:
            out = out * z + c
        return out
    out = np.broadcast_to(coeffs[:, -1:], z.shape).astype(complex)
    for k in range(coeffs.shape[1] - 2, -1, -1):
        out = out * z + coeffs[:, k : k + 1]
    return out


def horner_with_derivative(coeffs: np.ndarray, z: np.ndarray):
    """Batched value and first derivative; shapes as in :func:`horner` (2-d case)."""
    p = np.broadcast_to(coeffs[:, -1:], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(coeffs.shape[1] - 2, -1, -1):
        dp = dp * z + p
        p = p * z + coeffs[:, k : k + 1]
    return p, dp


def poly_eval(p: ComplexPoly, z):
    """Horner evaluation; accepts scalars or arrays."""
    if np.ndim(z) == 0:
        return complex(horner(p.coeffs, complex(z)))
    return horner(p.coeffs, np.asarray(z, dtype=complex))


def cauchy_bound(coeffs: np.ndarray) -> np.ndarray:
    """Unique positive root of |a_d| t^d - sum_{k<d} |a_k| t^k, row-wise.

    Every root of the polynomial lies in the closed disc of that radius.
    ``coeffs`` has shape (B, d+1) with nonzero last column.
    """
    a = np.abs(coeffs / coeffs[:, -1:])
    d = a.shape[1] - 1
    lo = np.zeros(a.shape[0])
    hi = 1.0 + a[:, :d].max(axis=1)
    powers = np.arange(d)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f = mid**d - (a[:, :d] * mid[:, None] ** powers).sum(axis=1)
        above = f > 0
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return hi


def _aberth(coeffs: np.ndarray, rng: np.random.Generator, tol: float, maxiter: int = 200, restarts: int = 3):
    """Aberth-Ehrlich iteration on rows of ``coeffs`` (B, d+1), nonzero leading terms."""
    a = coeffs / coeffs[:, -1:]
    B, d = a.shape[0], a.shape[1] - 1
    if d == 1:
        return -a[:, :1]
    absa = np.abs(a)
    radius = cauchy_bound(a)
    roots = np.empty((B, d), dtype=complex)
    todo = np.arange(B)
    base = 2 * np.pi * np.arange(d) / d
    for _attempt in range(restarts + 1):
        aa, ab, rad = a[todo], absa[todo], radius[todo]
        phase = rng.uniform(0, 2 * np.pi, size=(len(todo), 1)) + rng.uniform(-0.1, 0.1, size=(len(todo), d))
        z = rad[:, None] * np.exp(1j * (base[None, :] + phase + 0.4))
        done = np.zeros(z.shape, dtype=bool)
        for _ in range(maxiter):
            p, dp = horner_with_derivative(aa, z)
            scale = horner(ab, np.abs(z)).real
            done |= np.abs(p) <= 4 * EPS * scale
            if done.all():
                break
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(dp != 0, p / dp, 1e-3 * (1 + np.abs(z)))
                diff = z[:, :, None] - z[:, None, :]
                idx = np.arange(d)
                diff[:, idx, idx] = np.inf
                s = (1.0 / diff).sum(axis=2)
                corr = ratio / (1.0 - ratio * s)
            corr = np.where(np.isfinite(corr), corr, ratio)
            z = np.where(done, z, z - corr)
            done |= np.abs(corr) <= EPS * np.abs(z)
        p = horner(aa, z)
        scale = horner(ab, np.abs(z)).real
        ok = np.all(np.abs(p) <= tol * np.maximum(scale, 1e-300), axis=1)
        roots[todo[ok]] = z[ok]
        todo = todo[~ok]
        if todo.size == 0:
            return roots
    raise NonConvergence(f"Aberth iteration failed on {todo.size} polynomial(s) after {restarts} restarts")


def roots_rows(rows: np.ndarray, tol: float = 1e-10, rng=None) -> np.ndarray:
    """Roots of every row of ascending coefficients, NaN-padded to width L-1.

    Each row is trimmed on its own, so rows may have different true degrees.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    rng = default_rng(rng)
    B, L = rows.shape
    out = np.full((B, max(L - 1, 0)), np.nan + 0j, dtype=complex)
    degs = np.array([trimmed_degree(r) for r in rows])
    # exact zero roots are split off, as Aberth cannot certify them by residual
    low = np.array([int(np.argmax(r != 0)) if d >= 0 else 0 for r, d in zip(rows, degs)])
    for d, k in sorted({(int(d), int(k)) for d, k in zip(degs, low)}):
        if d < 1:
            continue
        idx = np.nonzero((degs == d) & (low == k))[0]
        out[idx, :k] = 0
        if d > k:
            out[idx, k:d] = _aberth(rows[idx, k : d + 1], rng, tol)
    return out


def poly_roots(p: ComplexPoly, tol: float = 1e-10, rng=None) -> np.ndarray:
    """All roots of ``p`` with multiplicity.

    Raises DegreeZero for constants and NonConvergence when the backward
    residual |p(root)| <= tol * sum|c_k||root|^k cannot be met.
    """
    if p.degree < 1:
        raise DegreeZero("constant polynomial has no roots")
    c = p.coeffs
    nz = int(np.nonzero(c)[0][0])
    zeros = np.zeros(nz, dtype=complex)
    c = c[nz:]
    if len(c) == 1:
        return zeros
    r = _aberth(c[None, :], default_rng(rng), tol)[0]
    return np.concatenate([zeros, r])


def polish_clusters(coeffs: np.ndarray, roots: np.ndarray, radius: float = 1e-2, rtol: float = 1e-8) -> np.ndarray:
    """Replace each cluster of k nearby roots by one polished k-fold root.

    Members of a k-fold root scatter by about eps^(1/k), but the root is a
    simple root of the (k-1)-th derivative, where Newton converges fast.  The
    polished centre is kept only if it is also a root of p to ``rtol``; other
    clusters are returned unchanged.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    roots = np.asarray(roots, dtype=complex).copy()
    m = len(roots)
    labels = np.arange(m)
    for i in range(m):
        for j in range(i):
            if abs(roots[i] - roots[j]) <= radius * max(1.0, abs(roots[i])):
                labels[labels == labels[i]] = labels[j]
    scale = np.abs(coeffs).sum()
    for lab in np.unique(labels):
        members = labels == lab
        k = int(members.sum())
        if k < 2:
            continue
        d = coeffs.copy()
        for _ in range(k - 1):
            d = d[1:] * np.arange(1, len(d))
        c = roots[members].mean()
        for _ in range(30):
            val, der = horner_with_derivative(d[None, :], np.array([[c]]))
            if der[0, 0] == 0:
                break
            step = val[0, 0] / der[0, 0]
            c -= step
            if abs(step) <= 1e-15 * max(1.0, abs(c)):
                break
        if abs(horner(coeffs, c)) <= rtol * scale * max(1.0, abs(c)) ** (len(coeffs) - 1):
            roots[members] = c
    return roots


def resultant(p: ComplexPoly, q: ComplexPoly) -> complex:
    """Determinant of the Sylvester matrix of (p, q).

    Uses the standard convention Res = lead(p)^deg q * lead(q)^deg p * prod(a_i - b_j).
    """
    m, n = p.degree, q.degree
    if m == 0 and n == 0:
        raise BothConstant("resultant of two constants is undefined here")
    size = m + n
    S = np.zeros((size, size), dtype=complex)
    pd, qd = p.coeffs[::-1], q.coeffs[::-1]
    for i in range(n):
        S[i, i : i + m + 1] = pd
    for i in range(m):
        S[n + i, i : i + n + 1] = qd
    return complex(np.linalg.det(S))


def elem_symmetric(values: Sequence[complex], j: int) -> complex:
    """j-th elementary symmetric polynomial of ``values`` (1 for j = 0)."""
    v = as_cvec(values) if len(values) else np.zeros(0, dtype=complex)
    if not 0 <= j <= len(v):
        raise IndexOutOfRange(f"j={j} outside 0..{len(v)}")
    e = np.zeros(len(v) + 1, dtype=complex)
    e[0] = 1.0
    for x in v:
        e[1:] = e[1:] + x * e[:-1]
    return complex(e[j])


def roots_in_closed_disc(p: ComplexPoly, r: float, boundary_tol: float = 1e-9, rng=None):
    """Count roots with |z| < r - tol and roots with ||z| - r| <= tol."""
    if r <= 0:
        raise InputError("radius must be positive")
    mods = np.abs(poly_roots(p, rng=rng))
    inside = int(np.sum(mods < r - boundary_tol))
    boundary = int(np.sum(np.abs(mods - r) <= boundary_tol))
    return inside, boundary


def match_roots(ra: np.ndarray, rb: np.ndarray, tol: float = 1e-8):
    """Greedy nearest matching of two root lists; returns index pairs closer than tol*max(1,|root|)."""
    ra = np.asarray(ra)[np.isfinite(ra)]
    rb = np.asarray(rb)[np.isfinite(rb)]
    if ra.size == 0 or rb.size == 0:
        return []
    dist = np.abs(ra[:, None] - rb[None, :])
    limit = tol * np.maximum(1.0, np.abs(ra))[:, None]
    pairs = []
    dist = np.where(dist <= limit, dist, np.inf)
    while np.isfinite(dist).any():
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        pairs.append((int(i), int(j)))
        dist[i, :] = np.inf
        dist[:, j] = np.inf
    return pairs


def circle_max(
    evaluate: Callable[[np.ndarray], np.ndarray],
    radius: np.ndarray,
    extra_angles: np.ndarray | None = None,
    samples: int = 256,
    refine: int = 8,
    iters: int = 16,
):
    """Row-wise maximum of a real function on circles |z| = radius[b].

    ``evaluate`` maps complex points of shape (B, K) to values of shape (B, K).
    Uniform samples (plus optional per-row ``extra_angles``) are followed by
    golden-section refinement around the ``refine`` best samples.  Returns
    ``(max_value, argmax_z)`` arrays of shape (B,).
    """
    radius = np.asarray(radius, dtype=float)
    B = radius.shape[0]
    theta = np.broadcast_to(2 * np.pi * np.arange(samples) / samples, (B, samples))
    if extra_angles is not None and extra_angles.size:
        extra = np.where(np.isfinite(extra_angles), extra_angles, 0.0) % (2 * np.pi)
        theta = np.concatenate([theta, extra, (extra + 1e-4) % (2 * np.pi), (extra - 1e-4) % (2 * np.pi)], axis=1)
    theta = np.sort(theta, axis=1)
    K = theta.shape[1]

    def f(t):
        v = evaluate(radius[:, None] * np.exp(1j * t))
        return np.where(np.isnan(v), np.inf, v)

    vals = f(theta)
    k = min(refine, K)
    # refine around the best local maxima, so one broad peak cannot crowd out a sharp one
    peak = (vals >= np.roll(vals, 1, axis=1)) & (vals >= np.roll(vals, -1, axis=1))
    top = np.argsort(-np.where(peak, vals, -np.inf), axis=1, kind="stable")[:, :k]
    rows = np.arange(B)[:, None]
    lo = theta[rows, (top - 1) % K]
    hi = theta[rows, (top + 1) % K]
    lo = np.where(top == 0, lo - 2 * np.pi, lo)
    hi = np.where(top == K - 1, hi + 2 * np.pi, hi)

    g = (math.sqrt(5) - 1) / 2
    c = hi - g * (hi - lo)
    d = lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        probe = np.where(left, hi - g * (hi - lo), lo + g * (hi - lo))
        fp = f(probe)
        c, d = np.where(left, probe, d), np.where(left, c, probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
    mid = 0.5 * (lo + hi)
    fmid = f(mid)
    # one parabolic step through (c, mid, d); c < mid < d always holds here
    with np.errstate(divide="ignore", invalid="ignore"):
        num = (mid - c) ** 2 * (fmid - fd) - (mid - d) ** 2 * (fmid - fc)
        den = (mid - c) * (fmid - fd) - (mid - d) * (fmid - fc)
        vert = mid - 0.5 * num / den
    vert = np.where(np.isfinite(vert) & (vert > lo) & (vert < hi), vert, mid)
    fvert = f(vert)
    cand_t = np.concatenate([theta, c, d, mid, vert], axis=1)
    cand_v = np.concatenate([vals, fc, fd, fmid, fvert], axis=1)
    best = np.argmax(cand_v, axis=1)
    bt = cand_t[np.arange(B), best]
    return cand_v[np.arange(B), best], radius * np.exp(1j * bt)


def series_quotient(num: np.ndarray, den: np.ndarray, terms: int) -> np.ndarray:
    """First ``terms`` Taylor coefficients at 0 of num/den, row-wise.

    ``num`` and ``den`` are ascending coefficient arrays of shape (B, L) (or 1-d);
    ``den[..., 0]`` must be nonzero.
    """
    num = np.atleast_2d(np.asarray(num, dtype=complex))
    den = np.atleast_2d(np.asarray(den, dtype=complex))
    d0 = den[:, 0]
    out = np.zeros((num.shape[0], terms), dtype=complex)
    for k in range(terms):
        acc = num[:, k].copy() if k < num.shape[1] else np.zeros(num.shape[0], dtype=complex)
        for i in range(1, min(k, den.shape[1] - 1) + 1):
            acc -= den[:, i] * out[:, k - i]
        out[:, k] = acc / d0
    return out


def polar_grid_min(h: Callable[[np.ndarray], np.ndarray], radius: float, grid: int, *, grow: bool = True,
                   rounds: int = 6, keep: int = 6) -> float:
    """Minimum of a real function over the disc |z| <= R by polar grid search.

    The grid has ``grid`` radii and ``grid`` angles; the ``keep`` best
    well-separated cells are then zoomed ``rounds`` times by a factor of 10.
    With ``grow`` the radius doubles until the grid minimum is at most R
    (useful when h(z) >= |z|); otherwise R is fixed and the grid includes z = 0.
    """
    R = float(radius)
    ang = 2 * np.pi * np.arange(grid) / grid
    for _ in range(80):
        rad = R * (np.arange(1, grid + 1) / grid if grow else np.linspace(0.0, 1.0, grid))
        V = h(rad[:, None] * np.exp(1j * ang[None, :]))
        best = float(np.min(V))
        if not grow or best <= R:
            break
        R *= 2
    seeds: list[tuple[int, int]] = []
    for flat in np.argsort(V, axis=None)[: keep * 8]:
        i, j = np.unravel_index(flat, V.shape)
        if all(abs(i - a) > 2 or min(abs(j - b), grid - abs(j - b)) > 2 for a, b in seeds):
            seeds.append((i, j))
        if len(seeds) == keep:
            break
    dr, da = R / grid, 2 * np.pi / grid
    for i, j in seeds:
        r0, a0, wr, wa = rad[i], ang[j], 2 * dr, 2 * da
        for _ in range(rounds):
            rr = np.clip(r0 + np.linspace(-wr, wr, 41), 0.0, None if grow else R)
            aa = a0 + np.linspace(-wa, wa, 41)
            Vl = h(rr[:, None] * np.exp(1j * aa[None, :]))
            k = np.unravel_index(np.argmin(Vl), Vl.shape)
            best = min(best, float(Vl[k]))
            r0, a0 = rr[k[0]], aa[k[1]]
            wr, wa = wr / 10, wa / 10
    return best
