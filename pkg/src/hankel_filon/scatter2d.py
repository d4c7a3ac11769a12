"""Plane-wave scattering by the sound-soft screen [-1, 1] x {0}.

The jump in the normal derivative on the screen is sought in the hybrid form

    phi(s) = V0(s) + sum_n  V_n^+(s) e^{i omega s} + V_n^-(s) e^{-i omega s}

with V0 the geometrical-optics term and V^+ (V^-) cubic B-splines on a mesh
graded towards s = -1 (s = +1).  Collocation of the single-layer equation

    (i/4) int_{-1}^{1} H0(omega |s - y|) phi(s) ds = psi_i(y)

at M = 3N points gives an oversampled system that is solved by least squares.

Conventions: the incident field is psi_i(x) = exp(i omega d.x) with
d = (cos theta, -sin theta), so it arrives from above and V0 =
-2 i omega sin(theta) exp(i omega s cos theta).

Every matrix entry is split at the B-spline knots, so the amplitude is a
cubic polynomial on each piece:

* pieces on the side of y where e^{+-i omega s} and the Hankel phase add
  (kernel like H0(omega x) e^{i omega x}) go to q1 with beta = 1, which is
  exact for polynomials, or to fcc_exp at frequency 2 omega once the piece
  is at least its own length away from y;
* pieces where the phases cancel are not oscillatory and use adaptive
  Gauss-Kronrod, graded towards y;
* entries classified ``nonosc`` are computed entirely by the adaptive oracle.

On rows far from the support (``nonsingular_osc``) the entry is tiny next
to its pieces, so summing pieces would cancel most digits.  There the
integrand is integrated by parts three times: the boundary terms survive
only at clamped spline ends and the remainder involves the (piecewise
constant) third derivative, which the piecewise rules above handle well.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.interpolate import BSpline, PPoly
from scipy.special import h1vp, hankel1e

from .filonq import AmplitudeSpec, fcc_exp, q1
from .moments1 import Params1, compute_sigma1
from .oracle import OracleError, ToleranceSpec, adaptive_gk
from .specfun import h0_scaled

TAGS = ("nonosc", "singular_osc", "nonsingular_osc")
DEFAULT_SIGMA = 0.3
DEFAULT_OMEGA0 = 2.0
DEFAULT_EPS = 1e-4
DEFAULT_THETA = math.pi / 4
OVERSAMPLING = 3

_Q1_NU = 4            # q1 interpolant has degree >= 5, exact on cubic pieces
_FCC_NU = 24          # fcc_exp nodes for pieces at least one length away from y
_DYADIC = 40          # grading levels towards a (near) singular point
_NEAR_FACTOR = 1       # rows this many support lengths away get their own oracle run
_ENTRY_TOL = ToleranceSpec(abs_tol=1e-15, rel_tol=1e-10)
_FAR_TOL = ToleranceSpec(abs_tol=1e-30, rel_tol=1e-9)
_L1_TOL = ToleranceSpec(abs_tol=1e-14, rel_tol=1e-9)


class AssemblyError(RuntimeError):
    def __init__(self, row, col, tag, cause):
        self.row, self.col, self.tag = row, col, tag
        super().__init__(f"entry ({row}, {col}) [{tag}] failed: {cause}")


# -- mesh ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedMesh:
    sigma: float
    N_g: int
    p: int
    points_plus: np.ndarray
    points_minus: np.ndarray
    J: tuple

    @property
    def n_basis(self):
        """Cubic B-splines per oscillation sign (knots + 2)."""
        return len(self.points_plus) + 2


def build_mesh(p: int, N_g: int, sigma: float = DEFAULT_SIGMA) -> GradedMesh:
    """Spline points graded towards -1 (plus mesh) and their reflection.

    The coarse points are t_{n,1} = -1 + 2 sigma^{N_g+1-n}, n = 1..N_g+1;
    cell n gets J_n equidistant points.  The endpoint -1 is added in front.
    """
    if p < 1 or N_g < 1:
        raise ValueError("p and N_g must be >= 1")
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    coarse = [-1 + 2 * sigma ** (N_g + 1 - n) for n in range(1, N_g + 2)]
    J = tuple(p - ((N_g + 2 - n) * p) // (N_g + 1) + 1 for n in range(1, N_g + 1))
    pts = [-1.0]
    for n in range(N_g):
        a, b = coarse[n], coarse[n + 1]
        pts.extend(a + (b - a) * np.arange(J[n]) / J[n])
    pts.append(1.0)
    plus = np.array(pts)
    if np.any(np.diff(plus) <= 0):
        raise ValueError("mesh is not strictly increasing; reduce N_g or increase sigma")
    minus = -plus[::-1]
    plus.setflags(write=False)
    minus.setflags(write=False)
    return GradedMesh(float(sigma), int(N_g), int(p), plus, minus, J)


def spline_knots(points):
    """Clamped cubic knot vector on the given points."""
    pts = np.asarray(points, dtype=float)
    return np.concatenate([[pts[0]] * 3, pts, [pts[-1]] * 3])


def collocation_points(mesh: GradedMesh, M: int) -> np.ndarray:
    """Union of both meshes, with M - K extra equispaced points in the gaps.

    Each gap gets the same number of extra points; the remainder goes to the
    widest gaps (ties by position) so the result is deterministic.
    """
    knots = np.unique(np.concatenate([mesh.points_plus, mesh.points_minus]))
    G = len(knots) - 1
    extra = M - len(knots)
    if extra < 0:
        raise ValueError("fewer collocation points than spline points")
    count = np.full(G, extra // G)
    widths = np.diff(knots)
    order = np.lexsort((np.arange(G), -widths))
    count[order[: extra - (extra // G) * G]] += 1
    out = [knots[:1]]
    for g in range(G):
        k = count[g] + 1
        out.append(knots[g] + widths[g] * np.arange(1, k + 1) / k)
    y = np.concatenate(out)
    y[-1] = knots[-1]
    return y


# -- incident wave and classification -------------------------------------------------

@dataclass(frozen=True)
class IncidentWave:
    omega: float
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def direction(self):
        return np.array([math.cos(self.theta), -math.sin(self.theta)])

    def trace(self, s):
        """psi_i on the screen."""
        return np.exp(1j * self.omega * math.cos(self.theta) * np.asarray(s, dtype=float))

    def go_density(self, s):
        """V0 = 2 d psi_i / dn with n = (0, 1)."""
        return -2j * self.omega * math.sin(self.theta) * self.trace(s)


def classify_entry(support, y_l, omega, omega0=DEFAULT_OMEGA0, eps=DEFAULT_EPS, sign=1):
    """nonosc, singular_osc or nonsingular_osc for the basis e^{sign i omega s} V(s)."""
    a, b = map(float, support)
    if omega * (b - a) <= omega0:
        return "nonosc"
    if a - eps < y_l < b + eps:
        return "singular_osc"
    if (sign > 0 and y_l >= b + eps) or (sign < 0 and y_l <= a - eps):
        return "nonosc"
    return "nonsingular_osc"


# -- basis --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Basis:
    """One B-spline: support, its polynomial pieces and an evaluator."""

    support: tuple
    pieces: tuple      # (left, right, coeffs in powers of (s - left), highest first)
    spline: BSpline
    knots: np.ndarray
    clamped: tuple     # (left, right): end knot repeated

    def poly(self, k):
        left, _, c = self.pieces[k]
        return lambda s: np.polyval(c, np.asarray(s) - left)


def _basis_set(points):
    T = spline_knots(points)
    n = len(T) - 4
    out = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        spl = BSpline(T, e, 3, extrapolate=False)
        a, b = T[j], T[j + 4]
        pp = PPoly.from_spline(BSpline(T, e, 3))
        pieces = []
        for i in range(len(pp.x) - 1):
            lo, hi = pp.x[i], pp.x[i + 1]
            if hi > lo and lo >= a and hi <= b:
                pieces.append((lo, hi, pp.c[:, i].copy()))
        inner = np.unique(T[j:j + 5])
        loc = T[j:j + 5]
        clamped = (bool(np.sum(loc == a) > 1), bool(np.sum(loc == b) > 1))
        out.append(_Basis((a, b), tuple(pieces), spl, inner, clamped))
    return out


# -- entry engines ------------------------------------------------------------------

def _graded(near, far, levels=_DYADIC):
    """Breakpoints from far to near, halving the distance to ``near``.

    Grading stops well above the float spacing at ``near``.
    """
    L = far - near
    floor = 64 * np.finfo(float).eps * max(1.0, abs(near))
    if abs(L) > floor:
        levels = min(levels, int(math.log2(abs(L) / floor)))
    else:
        levels = 0
    return np.unique(near + L * 2.0 ** -np.arange(levels + 1))


def _gk(fn, bp):
    return complex(adaptive_gk(fn, np.unique(bp), _ENTRY_TOL))


def _scaled_h(z):
    """h0 with the (integrable, measure-zero) point z = 0 mapped to 0."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape, dtype=complex)
    ok = z > 0
    out[ok] = h0_scaled(z[ok].astype(complex))
    return out


def _piece(P, u, v, y, sig, omega, stats):
    """int_u^v P(s) e^{i sig omega s} H0(omega |s - y|) ds, y outside (u, v)."""
    L = v - u
    if y <= u:
        d, dist = 1, u - y
    else:
        d, dist = -1, y - v
    beta = sig * d
    # H0(omega x) = e^{i omega x} h(omega x), x = d (s - y)
    phase = np.exp(-1j * omega * d * y)
    if beta < 0:
        stats["adaptive"] += 1
        near, far = (u, v) if d > 0 else (v, u)

        def g(s):
            return P(s) * _scaled_h(omega * d * (s - y))

        if dist >= L:
            return phase * _gk(g, np.array([u, v]))
        # graded towards the (near-)singular end; the last 2^-40 sliver is dropped when dist = 0
        levels = _DYADIC if dist == 0 else min(_DYADIC, int(math.ceil(math.log2(L / dist))) + 1)
        return phase * _gk(g, np.r_[_graded(near, far, levels), near if dist > 0 else []])
    if dist >= L:
        stats["fcc_exp"] += 1
        amp = AmplitudeSpec(lambda s: P(s) * _scaled_h(omega * d * (s - y)))
        return phase * fcc_exp(amp, _FCC_NU, 2 * sig * omega, (u, v))
    # near piece: difference of two one-sided integrals starting at y
    far = dist + L
    out = _one_sided_q1(P, y, d, far, sig, omega, stats)
    if dist > 0:
        out -= _one_sided_q1(P, y, d, dist, sig, omega, stats)
    return out


def _one_sided_q1(P, y, d, L, sig, omega, stats):
    """int over s = y + d x, x in [0, L], with the oscillatory (beta = 1) kernel."""
    stats["q1"] += 1
    amp = AmplitudeSpec(lambda t: P(y + d * L * np.asarray(t)))
    return np.exp(1j * sig * omega * y) * L * q1(amp, 0, _Q1_NU, Params1(omega * L, 1.0))


def _split_entry(basis, y, sig, omega, stats):
    total = 0j
    for k, (u, v, _) in enumerate(basis.pieces):
        P = basis.poly(k)
        if u < y < v:
            total += _piece(P, u, y, y, sig, omega, stats)
            total += _piece(P, y, v, y, sig, omega, stats)
        else:
            total += _piece(P, u, v, y, sig, omega, stats)
    return total


# -- far (non-singular oscillatory) entries by parts ----------------------------------
#
# On far rows an interior B-spline entry is many orders of magnitude smaller
# than its piece integrals, so summing pieces loses most digits.  With
# g = B F, F(s) = h(omega d (s - y)) and k = 2 sig omega, three integrations by
# parts give
#   int g e^{iks} = [e^{iks}(g/(ik) - g'/(ik)^2 + g''/(ik)^3)]_a^b
#                   - (ik)^{-3} sum_pieces int g''' e^{iks},
# since g, g', g'' are continuous at the knots.  No cancellation is left.

def _h_deriv_table(jmax):
    """h^(j)(z) = P_j(1/z) A(z) + Q_j(1/z) B(z) with A = e^{-iz}H0, B = e^{-iz}H1.

    Coefficients are in increasing powers of w = 1/z.
    """
    P, Q = [np.array([1.0 + 0j])], [np.array([0j])]
    for _ in range(jmax):
        n = max(len(P[-1]), len(Q[-1])) + 1
        p, q = np.zeros(n, complex), np.zeros(n, complex)
        p[: len(P[-1])] = P[-1]
        q[: len(Q[-1])] = Q[-1]
        dp, dq, wq = (np.zeros(n, complex) for _ in range(3))
        dp[1:] = -np.arange(n - 1) * p[:-1]          # d/dz w^m = -m w^{m+1}
        dq[1:] = -np.arange(n - 1) * q[:-1]
        wq[1:] = q[:-1]
        P.append(dp - 1j * p + q)
        Q.append(-p + dq - wq - 1j * q)
    return P, Q


_HTAB = _h_deriv_table(3)


def _h_derivs(z):
    """[h, h', h'', h'''] at real z > 0."""
    z = np.asarray(z, dtype=float)
    A = h0_scaled(z.astype(complex))
    B = hankel1e(1, z)
    w = 1.0 / z
    return [np.polyval(p[::-1], w) * A + np.polyval(q[::-1], w) * B for p, q in zip(*_HTAB)]


def _g_derivs(c, P, u, y, s, m_max):
    """g^(m)(s), m = 0..m_max, for g(s) = P(s - u) h(c (s - y))."""
    s = np.asarray(s, dtype=float)
    hd = _h_derivs(c * (s - y))
    Fd = [c ** j * hd[j] for j in range(4)]
    Pd = [P]
    for _ in range(3):
        Pd.append(np.polyder(Pd[-1]))
    return [sum(math.comb(m, j) * np.polyval(Pd[m - j], s - u) * Fd[j] for j in range(m + 1))
            for m in range(m_max + 1)]


def _boundary_terms(c, k, P, u, y, s):
    g = _g_derivs(c, P, u, y, np.array([s]), 2)
    ik = 1j * k
    return complex(np.exp(ik * s) * (g[0][0] / ik - g[1][0] / ik ** 2 + g[2][0] / ik ** 3))


def _far_entry(basis, y, sig, omega, stats):
    a, b = basis.support
    d = 1 if y < a else -1
    c, k = omega * d, 2 * sig * omega
    phase = np.exp(-1j * omega * d * y)
    pieces = basis.pieces
    # B, B', B'' vanish at simple end knots; only clamped ends leave terms
    total = 0j
    if basis.clamped[1]:
        total += _boundary_terms(c, k, pieces[-1][2], pieces[-1][0], y, b)
    if basis.clamped[0]:
        total -= _boundary_terms(c, k, pieces[0][2], pieces[0][0], y, a)
    ik3 = (1j * k) ** 3
    for i, (u, v, P) in enumerate(pieces):
        L = v - u
        dist = u - y if d > 0 else y - v
        if dist >= L:
            stats["fcc_exp"] += 1
            amp = AmplitudeSpec(lambda s, P=P, u=u: _g_derivs(c, P, u, y, s, 3)[3])
            total -= fcc_exp(amp, _FCC_NU, k, (u, v)) / ik3
        else:
            # near the singularity the plain piece integral is well conditioned
            piece = _piece(basis.poly(i), u, v, y, sig, omega, stats) / phase
            total += piece - (_boundary_terms(c, k, P, u, y, v) - _boundary_terms(c, k, P, u, y, u))
    return phase * total


def _oracle_breakpoints(basis, ys, sig, omega):
    a, b = basis.support
    ys = np.atleast_1d(ys)
    # the combined phase omega (|s - y| + sig s) moves at rate 1 + sig right of y and sig - 1 left of it
    rate = max(abs(1 + sig) if np.any(ys < b) else 0.0, abs(sig - 1) if np.any(ys > a) else 0.0)
    waves = max(rate, 0.25) * omega * (b - a) / (2 * math.pi)
    bp = [np.linspace(a, b, max(2, int(math.ceil(4 * waves)) + 1)), basis.knots]
    for y in np.atleast_1d(ys):
        if a < y < b:
            bp.extend([_graded(y, a), _graded(y, b), [y]])
        elif a - (b - a) < y <= a:
            bp.append(_graded(a, b)[1:] if y == a else [a + (a - y) * 2.0 ** k for k in range(_DYADIC)
                                                    if a + (a - y) * 2.0 ** k < b])
        elif b <= y < b + (b - a):
            bp.append(_graded(b, a)[1:] if y == b else [b - (y - b) * 2.0 ** k for k in range(_DYADIC)
                                                    if b - (y - b) * 2.0 ** k > a])
    return np.unique(np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)) for x in bp]))


def _oracle_batch(basis, ys, sig, omega, tol):
    bp = _oracle_breakpoints(basis, ys, sig, omega)
    spl = basis.spline

    def g(s):
        r = np.abs(s[None, :] - ys[:, None])
        h = np.zeros(r.shape, dtype=complex)
        ok = r > 0          # a node that rounds onto y is a measure-zero point
        h[ok] = hankel1e(0, omega * r[ok])
        # on the cancelling side r + sig s is constant, so the integrand is smooth
        return np.nan_to_num(spl(s))[None, :] * h * np.exp(1j * omega * (r + sig * s[None, :]))

    return np.atleast_1d(adaptive_gk(g, bp, tol))


def oracle_entries(basis, ys, sig, omega, tol: ToleranceSpec = _ENTRY_TOL):
    """int_supp B(s) e^{i sig omega s} H0(omega |s - y|) ds for each y (scipy Hankel).

    Rows within one support length get their own graded partition; the
    rest share one vector-valued adaptive run.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    a, b = basis.support
    near = (ys > a - _NEAR_FACTOR * (b - a)) & (ys < b + _NEAR_FACTOR * (b - a))
    out = np.zeros(len(ys), dtype=complex)
    if np.any(~near):
        out[~near] = _oracle_batch(basis, ys[~near], sig, omega, tol)
    for i in np.flatnonzero(near):
        out[i] = _oracle_batch(basis, ys[i:i + 1], sig, omega, tol)[0]
    return out


# -- assembly -------------------------------------------------------------------------

@dataclass
class CollocationSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    dof_map: list
    points: np.ndarray
    mesh: GradedMesh
    wave: IncidentWave
    tags: np.ndarray
    oversampling: int = OVERSAMPLING
    assembly_seconds: float = 0.0
    engine_counts: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.matrix.shape


def _bases(mesh):
    return _basis_set(mesh.points_plus), _basis_set(mesh.points_minus)


def _column(basis, sig, ys, omega, omega0, eps, col):
    stats = {"adaptive": 0, "fcc_exp": 0, "q1": 0, "oracle": 0}
    tags = np.array([TAGS.index(classify_entry(basis.support, y, omega, omega0, eps, sig)) for y in ys])
    out = np.zeros(len(ys), dtype=complex)
    nonosc = np.flatnonzero(tags == 0)
    if len(nonosc):
        stats["oracle"] += len(nonosc)
        try:
            out[nonosc] = oracle_entries(basis, ys[nonosc], sig, omega)
        except (OracleError, FloatingPointError, ValueError) as exc:
            raise AssemblyError(int(nonosc[0]), col, "nonosc", exc) from exc
    for l in np.flatnonzero(tags != 0):
        try:
            if tags[l] == 2:
                out[l] = _far_entry(basis, ys[l], sig, omega, stats)
            else:
                out[l] = _split_entry(basis, ys[l], sig, omega, stats)
        except Exception as exc:
            raise AssemblyError(int(l), col, TAGS[tags[l]], exc) from exc
        if not np.isfinite(out[l]):
            raise AssemblyError(int(l), col, TAGS[tags[l]], "non-finite value")
    return 0.25j * out, tags, stats


def go_integral(wave: IncidentWave, y):
    """(i/4) int_{-1}^{1} V0(s) H0(omega |s - y|) ds via sigma_0 moments."""
    c = math.cos(wave.theta)
    total = 0j
    for L, beta in ((1.0 - y, c), (1.0 + y, -c)):
        if L > 0:
            total += L * compute_sigma1(Params1(wave.omega * L, beta), 0).values[0]
    coef = -2j * wave.omega * math.sin(wave.theta)
    return 0.25j * coef * np.exp(1j * wave.omega * c * y) * total


def assemble(mesh: GradedMesh, wave: IncidentWave, omega0=DEFAULT_OMEGA0, eps=DEFAULT_EPS,
             workers: int = 1) -> CollocationSystem:
    """Collocation matrix and right-hand side; columns may be built in parallel."""
    t0 = time.perf_counter()
    plus, minus = _bases(mesh)
    jobs = [(b, 1, j) for j, b in enumerate(plus)] + [(b, -1, j) for j, b in enumerate(minus)]
    N = len(jobs)
    ys = collocation_points(mesh, OVERSAMPLING * N)
    omega = wave.omega

    def run(i):
        b, sig, _ = jobs[i]
        return _column(b, sig, ys, omega, omega0, eps, i)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            cols = list(ex.map(run, range(N)))
    else:
        cols = [run(i) for i in range(N)]
    A = np.column_stack([c[0] for c in cols])
    tags = np.column_stack([c[1] for c in cols])
    counts = {}
    for c in cols:
        for k, v in c[2].items():
            counts[k] = counts.get(k, 0) + v
    rhs = np.array([wave.trace(y) - go_integral(wave, y) for y in ys])
    dof_map = [("plus" if sig > 0 else "minus", j, sig) for _, sig, j in jobs]
    return CollocationSystem(A, rhs, dof_map, ys, mesh, wave, tags,
                             assembly_seconds=time.perf_counter() - t0, engine_counts=counts)


_ASYM_Z = 25.0


def _oracle_F_derivs(z, m_max):
    """d^j/dz^j [e^{-iz} H0(z)], j = 0..m_max, free of cancellation.

    Large z: the Hankel asymptotic series differentiated term by term.
    Small z: Leibniz on scipy's H0 derivatives (cancellation <= z^3 eps).
    """
    z = np.asarray(z, dtype=float)
    out = [np.zeros(z.shape, dtype=complex) for _ in range(m_max + 1)]
    big = z >= _ASYM_Z
    if np.any(big):
        zb = z[big]
        pref = math.sqrt(2 / math.pi) * np.exp(-0.25j * math.pi)
        coef, k = 1.0 + 0j, 0
        last = np.full(zb.shape, np.inf)
        while k < 60:
            mag = abs(coef) * zb ** (-0.5 - k)
            if np.all(mag < 1e-17 * zb ** -0.5) or np.any(mag > last):
                break
            for j in range(m_max + 1):
                fall = math.gamma(0.5 + k + j) / math.gamma(0.5 + k) * (-1) ** j
                out[j][big] += pref * coef * fall * zb ** (-0.5 - k - j)
            last = mag
            k += 1
            coef *= 1j * -((2 * k - 1) ** 2) / (k * 8.0)
    small = ~big
    if np.any(small):
        zs = z[small]
        e = np.exp(-1j * zs)
        H = [h1vp(0, zs, m) for m in range(m_max + 1)]
        for j in range(m_max + 1):
            out[j][small] = e * sum(math.comb(j, m) * H[m] * (-1j) ** (j - m) for m in range(j + 1))
    return out


def _oracle_far_entry(basis, y, sig, omega, tol: ToleranceSpec = _FAR_TOL):
    """Far entry through the same by-parts identity, with scipy Hankel derivatives
    and adaptive Gauss-Kronrod on every piece (an independent evaluation path)."""
    a, b = basis.support
    d = 1 if y < a else -1
    c, k = omega * d, 2 * sig * omega

    def derivs(P, u, s, m_max):
        s = np.asarray(s, dtype=float)
        F = _oracle_F_derivs(c * (s - y), m_max)
        F = [c ** j * F[j] for j in range(m_max + 1)]
        Pd = [np.polyder(P, m) for m in range(m_max + 1)]
        return [sum(math.comb(n, j) * np.polyval(Pd[n - j], s - u) * F[j] for j in range(n + 1))
                for n in range(m_max + 1)]

    def bterm(P, u, x):
        g = derivs(P, u, np.array([x]), 2)
        ik = 1j * k
        return complex(np.exp(ik * x) * (g[0][0] / ik - g[1][0] / ik ** 2 + g[2][0] / ik ** 3))

    total = 0j
    if basis.clamped[1]:
        total += bterm(basis.pieces[-1][2], basis.pieces[-1][0], b)
    if basis.clamped[0]:
        total -= bterm(basis.pieces[0][2], basis.pieces[0][0], a)
    for u, v, P in basis.pieces:
        waves = abs(k) * (v - u) / (2 * math.pi)
        bp = np.linspace(u, v, max(2, int(math.ceil(waves)) + 1))
        near = u if d > 0 else v
        if abs(near - y) < v - u:
            bp = np.unique(np.r_[bp, _graded(near, v if d > 0 else u)])
        rem = adaptive_gk(lambda s, P=P, u=u: derivs(P, u, s, 3)[3] * np.exp(1j * k * s), bp, tol)
        total -= rem / (1j * k) ** 3
    return np.exp(-1j * omega * d * y) * total


def reference_entry(system: CollocationSystem, row: int, col: int) -> complex:
    """Oracle value of one matrix entry (for audits).

    Far (non-singular oscillatory) entries are orders of magnitude smaller
    than the integral of |integrand|, which puts plain quadrature at its
    rounding floor; they go through the by-parts form instead.
    """
    plus, minus = _bases(system.mesh)
    kind, j, sig = system.dof_map[col]
    basis = (plus if kind == "plus" else minus)[j]
    y, omega = system.points[row], system.wave.omega
    if TAGS[system.tags[row, col]] == "nonsingular_osc":
        return complex(0.25j * _oracle_far_entry(basis, y, sig, omega))
    return complex(0.25j * oracle_entries(basis, [y], sig, omega)[0])


# -- solve and diagnostics ----------------------------------------------------------

@dataclass
class Solution:
    coeffs: np.ndarray
    residual: float
    rank: int
    cond: float
    rank_deficient: bool
    mesh: GradedMesh
    wave: IncidentWave

    def density(self, s):
        """Scattered part u(s) = sum V^+ e^{i omega s} + V^- e^{-i omega s}."""
        s = np.asarray(s, dtype=float)
        n = self.mesh.n_basis
        sp = BSpline(spline_knots(self.mesh.points_plus), self.coeffs[:n], 3)
        sm = BSpline(spline_knots(self.mesh.points_minus), self.coeffs[n:], 3)
        w = self.wave.omega
        return sp(s) * np.exp(1j * w * s) + sm(s) * np.exp(-1j * w * s)


def solve_system(system: CollocationSystem, rcond: float | None = None) -> Solution:
    """Least squares by QR with column pivoting; rank deficiency is reported, not raised."""
    A, b = system.matrix, system.rhs
    x, _, rank, _ = scipy.linalg.lstsq(A, b, cond=rcond, lapack_driver="gelsy")
    bnorm = np.linalg.norm(b)
    res = np.linalg.norm(A @ x - b) / (bnorm if bnorm > 0 else 1.0)
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    return Solution(x, float(res), int(rank), cond, int(rank) < A.shape[1], system.mesh, system.wave)


def _default_breakpoints():
    inner = np.linspace(-1, 1, 65)
    ends = np.concatenate([-1 + 2.0 ** -np.arange(1, _DYADIC), 1 - 2.0 ** -np.arange(1, _DYADIC)])
    return np.unique(np.concatenate([inner, ends]))


def rel_l1_error(u, u_ref, breakpoints=None, omega: float = 0.0) -> float:
    """||u - u_ref||_L1 / ||u_ref||_L1 on [-1, 1] by composite adaptive quadrature."""
    bp = _default_breakpoints() if breakpoints is None else np.unique(np.r_[-1.0, breakpoints, 1.0])
    if omega > 0:
        bp = np.unique(np.r_[bp, np.linspace(-1, 1, int(math.ceil(4 * omega / math.pi)) + 1)])

    def g(s):
        r = u_ref(s)
        return np.vstack([np.abs(u(s) - r), np.abs(r)])

    diff, ref = adaptive_gk(g, bp, _L1_TOL)
    if ref == 0:
        raise ValueError("reference density has zero L1 norm")
    return float(diff.real / ref.real)


# -- driver ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScatterRow:
    omega: float
    p: int
    Ng: int
    dofs: int
    assembly_seconds: float
    residual: float
    rel_l1_vs_ref: float


REPORT_HEADER = "omega,p,Ng,dofs,assembly_seconds,residual,rel_l1_vs_ref"


def run_scatter(omega, p, N_g=None, sigma=DEFAULT_SIGMA, theta=DEFAULT_THETA, omega0=DEFAULT_OMEGA0,
                eps=DEFAULT_EPS, reference: Solution | None = None, workers=1):
    """Assemble, solve and compare against ``reference`` (NaN when none)."""
    N_g = 2 * p if N_g is None else N_g
    mesh = build_mesh(p, N_g, sigma)
    sys_ = assemble(mesh, IncidentWave(omega, theta), omega0, eps, workers)
    sol = solve_system(sys_)
    err = math.nan
    if reference is not None:
        bp = np.r_[mesh.points_plus, mesh.points_minus, reference.mesh.points_plus, reference.mesh.points_minus]
        err = rel_l1_error(sol.density, reference.density, bp, omega)
    row = ScatterRow(float(omega), p, N_g, sys_.shape[1], sys_.assembly_seconds, sol.residual, err)
    return row, sol
