"""Pointwise Weyl remainders, the Duhamel expansion and its perturbation sums.

All spectral weights are written through g(u) = h(sqrt u) on squared
frequencies.  With u_j = |j|^2 (free modes) and v_l = tau_l^2 (perturbed
modes) the finite-dimensional identities are

    h(H_V)(x,x) - h(H_0)(x,x) = sum_{j,l} g[u_j, v_l] A_j Vt_{jl} conj(B_l)
                              = R1 + R2,
    R1 = sum_{j,k}   g[u_j, u_k]      A_j V_jk conj(A_k),
    R2 = sum_{j,k,l} g[u_j, u_k, v_l] A_j V_jk Vt_kl conj(B_l),

with A_j = e_j^0(x), B_l = e_{tau_l}(x), Vt = V C the overlap matrix and
g[...] confluent divided differences.  They are exact for finite matrices.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy import integrate

from .bessel import sphere_area
from .lattice import LatticeBasis, count_ball, unit_ball_volume
from .mollifier import MollifierSpec
from .quadrature import composite_gauss
from .potential import FourierTable, ModelTable
from .spectral import SpectralData, TruncationWarning, _reliability_check, overlap_matrix, potential_matrix

MERGE_TOL = 1e-8


class CostCapError(RuntimeError):
    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


# ---------------------------------------------------------------------------
# scalar identities


def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / math.pi)


def trig_kernel(t: float, tau: float, mu: float) -> float:
    """m(tau, mu) = (cos t tau - cos t mu) / (tau^2 - mu^2), -t sin(t tau)/(2 tau) at tau = mu.

    Written as -(t^2/2) sinc(t(tau+mu)/2) sinc(t(tau-mu)/2), which is the same
    function with no cancellation near coincidence or at 0.  The integral
    int_0^t sin((t-s) mu)/mu cos(s tau) ds equals -m(tau, mu).
    """
    return float(-0.5 * t * t * _sinc(0.5 * t * (tau + mu)) * _sinc(0.5 * t * (tau - mu)))


def duhamel_integral(t: float, tau: float, mu: float) -> float:
    """int_0^t sin((t-s) mu)/mu cos(s tau) ds by adaptive quadrature."""
    f = lambda s: (t - s) * _sinc((t - s) * mu) * math.cos(s * tau)
    return integrate.quad(f, 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


class CosineSqrt:
    """F(u) = cos(t sqrt u) with derivatives, as a divided-difference evaluator."""

    def __init__(self, t: float):
        self.t = float(t)

    def __call__(self, u, order: int = 0):
        t = self.t
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        r = np.sqrt(u)
        if order == 0:
            return np.cos(t * r)
        if order == 1:
            return -0.5 * t * t * _sinc(t * r)
        if order == 2:
            z = t * r
            small = z < 1e-2
            zz = np.where(small, 1.0, z)
            big = t**4 * (np.sin(zz) - zz * np.cos(zz)) / (4 * zz**3)
            ser = t**4 / 12 - t**6 * u / 120 + t**8 * u * u / 6720
            return np.where(small, ser, big)
        raise ValueError("order <= 2 supported")


def double_duhamel_closed_form(t: float, a1: float, a2: float, a3: float) -> float:
    """The closed form of the double Duhamel integral, i.e. F[a1^2, a2^2, a3^2]
    for F(u) = cos(t sqrt u), with confluent limits."""
    return divided_difference(CosineSqrt(t), [a1 * a1, a2 * a2, a3 * a3])


def double_duhamel_integral(t: float, a1: float, a2: float, a3: float) -> float:
    """int_0^t sin((t-s1)a1)/a1 int_0^s1 sin((s1-s2)a2)/a2 cos(s2 a3) ds2 ds1.

    Nested composite Gauss-Legendre on the triangle 0 <= s2 <= s1 <= t.  The
    integrand is entire, so 20-point panels of phase width <= 8 give roundoff
    accuracy; this is much faster than adaptive dblquad for batches.
    """
    t = float(t)
    if t == 0:
        return 0.0
    phase = t * (abs(a1) + abs(a2) + abs(a3))
    panels = max(2, int(math.ceil(phase / 8.0)))
    u, wu = composite_gauss(np.linspace(0.0, 1.0, panels + 1), 20)
    s1, w1 = t * u, t * wu
    s2 = s1[:, None] * u[None, :]
    w2 = w1[:, None] * s1[:, None] * wu[None, :]
    outer = (t - s1) * _sinc((t - s1) * a1)
    inner = (s1[:, None] - s2) * _sinc((s1[:, None] - s2) * a2) * np.cos(s2 * a3)
    return float((w2 * outer[:, None] * inner).sum())


def double_duhamel_identity_check(t: float, a1: float, a2: float, a3: float) -> float:
    """|closed form - nested quadrature|."""
    if t == 0:
        return 0.0
    return abs(double_duhamel_closed_form(t, a1, a2, a3) - double_duhamel_integral(t, a1, a2, a3))


# ---------------------------------------------------------------------------
# divided differences


def _merged(a, b, tol=MERGE_TOL):
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return np.abs(a - b) <= tol * scale


def divided_difference(g, nodes, tol: float = MERGE_TOL) -> float:
    """Confluent divided difference g[x0], g[x0,x1] or g[x0,x1,x2].

    ``g(u, order)`` returns the value or derivative of order 1 or 2; it is
    only asked for derivatives when nodes merge (|a-b| <= tol * scale).
    """
    x = [float(v) for v in nodes]
    if not 1 <= len(x) <= 3:
        raise ValueError("1 to 3 nodes supported")
    if len(x) == 1:
        return float(g(x[0]))
    if len(x) == 2:
        return float(dd1(np.array(x[0]), np.array(x[1]), g(x[0]), g(x[1]), g, tol))
    a, b, c = x
    gab = dd1(a, b, g(a), g(b), g, tol)
    gac = dd1(a, c, g(a), g(c), g, tol)
    gbc = dd1(b, c, g(b), g(c), g, tol)
    return float(dd2(a, b, c, gab, gac, gbc, g, tol))


def _call_derivative(g, u, order):
    try:
        return g(u, order)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"derivative of order {order} needed at merged nodes but unavailable") from exc


def dd1(a, b, ga, gb, g, tol: float = MERGE_TOL):
    """g[a, b] from tabulated g(a), g(b), broadcasting; merged pairs use g'."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    ga, gb = np.broadcast_arrays(np.asarray(ga, dtype=float), np.asarray(gb, dtype=float))
    m = _merged(a, b, tol)
    diff = np.where(m, 1.0, a - b)
    out = np.where(m, 0.0, (ga - gb) / diff)
    if m.any():
        mid = 0.5 * (a[m] + b[m])
        out = np.array(out, dtype=float)
        out[m] = _call_derivative(g, mid, 1)
    return out


def dd2(a, b, c, gab, gac, gbc, g, tol: float = MERGE_TOL):
    """g[a, b, c] from first differences, broadcasting.

    Primary rule (g[a,c] - g[a,b]) / (c - b); if c ~ b then
    (g[b,c] - g[a,b]) / (c - a); if all three merge g''/2.
    """
    a, b, c, gab, gac, gbc = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, gab, gac, gbc)))
    bc = _merged(b, c, tol)
    ac = _merged(a, c, tol)
    out = np.empty(a.shape)
    p = ~bc
    out[p] = (gac[p] - gab[p]) / (c[p] - b[p])
    q = bc & ~ac
    out[q] = (gbc[q] - gab[q]) / (c[q] - a[q])
    r = bc & ac
    if r.any():
        mid = (a[r] + b[r] + c[r]) / 3.0
        out[r] = 0.5 * _call_derivative(g, mid, 2)
    return out


# ---------------------------------------------------------------------------
# spectral sums


def _free_values(basis: LatticeBasis, x) -> np.ndarray:
    """A_j = e_j^0(x); real whenever x is a half-period point."""
    a = np.exp(1j * (basis.points @ np.asarray(x, dtype=float))) / (2 * math.pi) ** (basis.dim / 2)
    if np.abs(a.imag).max(initial=0.0) == 0.0:
        return a.real
    return a


def mollified_diag(S: SpectralData, spec: MollifierSpec, x) -> float:
    """h(P_V)(x,x) = sum_k h(tau_k) |e_{tau_k}(x)|^2."""
    _reliability_check(S, spec.lam)
    return float((spec.h(S.tau) * S.density_at(x)).sum())


def free_diag(basis: LatticeBasis, spec: MollifierSpec | None, lam: float | None = None) -> float:
    """h(P_0)(x,x) (or the sharp count when spec is None), x independent."""
    if spec is None:
        return float((basis.norm_sq <= lam * lam).sum()) / (2 * math.pi) ** basis.dim
    return float(spec.h(basis.norms).sum()) / (2 * math.pi) ** basis.dim


def _weight_diag(S, spec, x, mode, lam):
    if mode == "indicator":
        from .spectral import projector_diag
        return projector_diag(S, lam, x)
    if mode == "mollified":
        return mollified_diag(S, spec, x)
    raise ValueError("mode must be 'indicator' or 'mollified'")


def pointwise_remainder(S: SpectralData, spec: MollifierSpec, x, mode: str = "indicator") -> float:
    """R(lambda, x) = diagonal spectral sum - (2 pi)^(-n) omega_n lambda^n."""
    lam = spec.lam
    main = unit_ball_volume(S.dim) * lam**S.dim / (2 * math.pi) ** S.dim
    return _weight_diag(S, spec, x, mode, lam) - main


def perturbation_difference(S: SpectralData, spec: MollifierSpec, x, mode: str = "mollified",
                            basis: LatticeBasis | None = None) -> float:
    """D(lambda, x) = [diag sum of H_V] - [same sum for H_0 on the same basis]."""
    basis = basis or S.basis
    if basis is not S.basis and len(basis) != len(S.basis):
        raise ValueError("perturbed and free operators must share the basis")
    lam = spec.lam
    free = free_diag(basis, None if mode == "indicator" else spec, lam)
    return _weight_diag(S, spec, x, mode, lam) - free


def _shell_starts(norm_sq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # basis is sorted by |j|^2, so shells are contiguous
    starts = np.flatnonzero(np.r_[True, np.diff(norm_sq) != 0])
    return starts, norm_sq[starts].astype(float)


def _g_eval(spec_or_g):
    if isinstance(spec_or_g, MollifierSpec):
        return spec_or_g.g
    return spec_or_g


@dataclass
class TruncatedSum:
    value: float
    tail_bound: float
    truncation_warning: bool = False
    meta: dict = field(default_factory=dict)


def _envelope_constant(table, max_norm_sq: int, alpha: float) -> float:
    if isinstance(table, ModelTable):
        return 1.0
    ms = np.arange(max_norm_sq + 1)
    vals = np.abs(table.lookup_array(max_norm_sq))
    return float((vals * (1.0 + np.sqrt(ms)) ** alpha).max())


def _tail_integral(dim: int, eta: float, cutoff: float) -> float:
    """Bound for sum_{|k| > K} |k|^(-n-eta): each unit cube around k lies in |y| >= |k| - c, c = sqrt(n)/2."""
    c = math.sqrt(dim) / 2
    k0 = cutoff - c
    return sphere_area(dim) * (1 + c / k0) ** (dim - 1) * k0**-eta / eta


def r1_sum(basis: LatticeBasis, table: FourierTable, spec: MollifierSpec, x,
           vmat: np.ndarray | None = None, check_cutoff: bool = True) -> TruncatedSum:
    """R1(lambda, x) = sum_{j,k} g[|j|^2, |k|^2] e_j^0(x) V_jk conj(e_k^0(x)).

    Tail bound (terms with |k| > Lambda_max, |j| <= 2 lambda): with
    |k|^2 - |j|^2 >= 3|k|^2/4, |j - k| >= |k|/2 and |V^(xi)| <= C (1+|xi|)^-alpha,

        tail <= 2 * (2 pi)^(-2n) * (8/3) H 2^alpha C N0(2 lambda) sum_{|k|>Lambda} |k|^(-n-eta),

    H = sup |h|.  Rows with |j| > 2 lambda are dropped from the bound since
    h is below its sandwich tail there.
    """
    lam = spec.lam
    if check_cutoff and basis.cutoff < 4 * lam:
        raise ValueError(f"Lambda_max={basis.cutoff:g} below 4*lambda={4 * lam:g}")
    n = basis.dim
    g = _g_eval(spec)
    vm = potential_matrix(basis, table) if vmat is None else vmat
    starts, u = _shell_starts(basis.norm_sq)
    gu = g(u)
    G = dd1(u[:, None], u[None, :], gu[:, None], gu[None, :], g)
    A = _free_values(basis, x)
    M = A[:, None] * vm * np.conj(A)[None, :]
    T = np.add.reduceat(np.add.reduceat(M, starts, axis=0), starts, axis=1)
    value = float(np.real((G * T).sum()))
    alpha = n - 2 + spec.eta
    cenv = _envelope_constant(table, 4 * int(basis.cutoff**2) + 4, alpha) if not getattr(table, "is_zero", False) else 0.0
    hsup = float(np.abs(spec.h(np.linspace(0, basis.cutoff, 2001))).max())
    tail = (2 * (2 * math.pi) ** (-2 * n) * (8 / 3) * hsup * 2**alpha * cenv
            * count_ball(n, 2 * lam) * _tail_integral(n, spec.eta, basis.cutoff))
    warn = tail > 0.1 * abs(value)
    if warn:
        warnings.warn(f"R1 tail bound {tail:.3g} exceeds 10% of |value| {abs(value):.3g}", TruncationWarning, stacklevel=2)
    return TruncatedSum(value, tail, warn)


def _indicator_tail(n, eta, lam, cutoff, n_inner, cenv):
    alpha = n - 2 + eta
    return 2 * n_inner * cenv * (4 / 3) ** alpha * (16 / 15) * _tail_integral(n, eta, cutoff)


def _lower_direct(points, norm_sq, inner, U, block=256):
    J, a = points[inner], norm_sq[inner].astype(float)
    K, b = points[~inner], norm_sq[~inner].astype(float)
    total = 0.0
    for i in range(0, len(J), block):
        d2 = ((J[i : i + block, None, :] - K[None, :, :]) ** 2).sum(-1)
        total += float((U.values(d2) / (b[None, :] - a[i : i + block, None])).sum())
    return 2 * total


def _lower_fft(basis: LatticeBasis, lam: float, U, step: float = 0.35):
    """2 sum_{j in, k out} U(j-k)/(b_k - a_j) with 1/d = int exp(s - d e^s) ds.

    For every trapezoid node t = e^s the double sum factorizes into a lattice
    convolution of U with exp(-t(b_k - c)) dotted with exp(-t(c - a_j)),
    c = lambda^2.  All d are integers >= 1, so s in [log(1e-13/D), 3.4] and
    step 0.35 keep the quadrature error near 1e-12 relative.
    """
    n = basis.dim
    cut = int(math.floor(basis.cutoff))
    rad = cut + int(math.ceil(lam))
    L = scipy.fft.next_fast_len(2 * rad + 1, real=True)
    pts = basis.points
    idx = tuple((pts % L).T)
    c = lam * lam
    inner = basis.norm_sq < c
    a = basis.norm_sq[inner].astype(float)
    b = basis.norm_sq[~inner].astype(float)
    # U on the ball |m| <= rad, which holds every difference j - k
    g1 = np.arange(-rad, rad + 1)
    mesh = np.meshgrid(*([g1] * n), indexing="ij")
    m2 = sum(m * m for m in mesh)
    ubox = np.zeros((L,) * n)
    keep = m2 <= rad * rad
    mi = tuple(m[keep] % L for m in mesh)
    ubox[mi] = U.values(m2[keep])
    Uf = scipy.fft.rfftn(ubox, workers=-1)
    idx_in = tuple(ix[inner] for ix in idx)
    idx_out = tuple(ix[~inner] for ix in idx)
    D = max(float(b.max() - a.min()), 1.0)
    s_nodes = np.arange(math.log(1e-13 / D), 3.4 + step, step)
    total = 0.0
    gbox = np.zeros((L,) * n)
    for s in s_nodes:
        t = math.exp(s)
        gbox[idx_out] = np.exp(-t * (b - c))
        conv = scipy.fft.irfftn(Uf * scipy.fft.rfftn(gbox, workers=-1), s=(L,) * n, workers=-1)
        total += t * float(np.dot(np.exp(-t * (c - a)), conv[idx_in]))
    return 2 * step * total


def r1_indicator_lower(basis: LatticeBasis, U_table, lam: float, x0=None, method: str = "auto",
                       check_cutoff: bool = True) -> TruncatedSum:
    """|R~1'(lambda, x0)| = 2 sum_{|j|<lambda} sum_{|k|>=lambda} U_jk / (|k|^2 - |j|^2).

    U_jk is taken from the table (model coefficients or computed V^ values).
    `method` is "direct" (blocked double loop), "fft" or "auto".
    """
    n = basis.dim
    if check_cutoff and basis.cutoff < 4 * lam:
        raise ValueError(f"Lambda_max={basis.cutoff:g} below 4*lambda={4 * lam:g}")
    inner = basis.norm_sq < lam * lam
    n_in = int(inner.sum())
    if method == "auto":
        method = "direct" if n_in * (len(basis) - n_in) < 2e7 or not isinstance(U_table, ModelTable) else "fft"
    if n_in == 0:
        value = 0.0
    elif method == "direct":
        value = _lower_direct(basis.points, basis.norm_sq, inner, U_table)
    elif method == "fft":
        value = _lower_fft(basis, lam, U_table)
    else:
        raise ValueError("method must be 'direct', 'fft' or 'auto'")
    eta = U_table.eta
    alpha = n - 2 + eta
    cenv = _envelope_constant(U_table, 4 * int(basis.cutoff**2) + 4, alpha)
    tail = _indicator_tail(n, eta, lam, basis.cutoff, n_in, cenv)
    warn = tail > 0.1 * abs(value) if value else False
    if warn:
        warnings.warn(f"lower-sum tail bound {tail:.3g} exceeds 10% of value {value:.3g}", TruncationWarning, stacklevel=2)
    return TruncatedSum(value, tail, warn, {"method": method, "inner_points": n_in})


def r2_sum(basis: LatticeBasis, S: SpectralData, table: FourierTable | None, overlap: np.ndarray | None,
           spec, x, vmat: np.ndarray | None = None, max_points: int = 2500) -> float:
    """R2 = sum_{j,k,l} g[|j|^2, |k|^2, tau_l^2] e_j^0(x) V_jk Vt_kl conj(e_{tau_l}(x))."""
    N = len(basis)
    starts, u = _shell_starts(basis.norm_sq)
    if N > max_points:
        est = float(len(u)) ** 2 * N
        raise CostCapError(f"R2 over {N} basis points exceeds the cap {max_points} (~{est:.3g} kernel evaluations)", est)
    g = _g_eval(spec)
    vm = potential_matrix(basis, table) if vmat is None else vmat
    vt = overlap_matrix(S, table, vm) if overlap is None else overlap
    v = S.eigenvalues
    A = _free_values(basis, x)
    B = S.values_at(x)
    gu, gv = g(u), g(v)
    Guu = dd1(u[:, None], u[None, :], gu[:, None], gu[None, :], g)
    Guv = dd1(u[:, None], v[None, :], gu[:, None], gv[None, :], g)
    P = np.add.reduceat(A[:, None] * vm, starts, axis=0)  # (shells_j, k)
    Bc = np.conj(B)
    ends = np.r_[starts[1:], N]
    total = 0.0 + 0.0j
    for t, (s0, s1) in enumerate(zip(starts, ends)):
        Q = P[:, s0:s1] @ vt[s0:s1, :]
        G2 = dd2(u[:, None], u[t], v[None, :], Guu[:, t : t + 1], Guv, Guv[t : t + 1, :], g)
        total += ((G2 * Q) @ Bc).sum()
    return float(total.real)


@dataclass
class DuhamelCheck:
    res1: float
    res2: float
    hdiag_v: float
    hdiag_0: float
    r1: float
    r2: float
    first_order: float

    @property
    def relative(self) -> tuple[float, float]:
        s = abs(self.hdiag_v) or 1.0
        return self.res1 / s, self.res2 / s

    def passed(self, tol: float = 1e-8) -> bool:
        return max(self.relative) <= tol


def duhamel_identity_check(S: SpectralData, basis: LatticeBasis, table: FourierTable,
                           overlap: np.ndarray | None, spec, x, max_points: int = 2500) -> DuhamelCheck:
    """Residuals of the first-order and R1 + R2 forms of h(H_V) - h(H_0) at x.

    A positivity shift of S acts as the constant potential shift * I, so it
    is folded into V before the sums are formed.
    """
    g = _g_eval(spec)
    vm = potential_matrix(basis, table) + S.shift * np.eye(len(basis))
    vt = vm @ S.coefficients if overlap is None or S.shift else overlap
    u = basis.norm_sq.astype(float)
    v = S.eigenvalues
    A = _free_values(basis, x)
    B = S.values_at(x)
    hv = float((g(v) * (B.real**2 + B.imag**2)).sum())
    h0 = float((g(u) * np.abs(A) ** 2).sum())
    starts, us = _shell_starts(basis.norm_sq)
    gus, gv = g(us), g(v)
    Guv = dd1(us[:, None], v[None, :], gus[:, None], gv[None, :], g)
    T1 = np.add.reduceat(A[:, None] * vt, starts, axis=0)
    first = float(np.real(((Guv * T1) @ np.conj(B)).sum()))
    r1v = _r1_plain(basis, g, vm, A)
    r2 = r2_sum(basis, S, table, vt, spec, x, vmat=vm, max_points=max_points)
    diff = hv - h0
    return DuhamelCheck(abs(diff - first), abs(diff - r1v - r2), hv, h0, r1v, r2, first)


def _r1_plain(basis, g, vm, A):
    starts, u = _shell_starts(basis.norm_sq)
    gu = g(u)
    G = dd1(u[:, None], u[None, :], gu[:, None], gu[None, :], g)
    M = A[:, None] * vm * np.conj(A)[None, :]
    T = np.add.reduceat(np.add.reduceat(M, starts, axis=0), starts, axis=1)
    return float(np.real((G * T).sum()))


# ---------------------------------------------------------------------------
# exponent fits


@dataclass
class ScalingFit:
    points: list
    slope: float
    intercept: float
    residual: float
    window: tuple
    dropped: list = field(default_factory=list)
    sign: int = 0

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)

    def to_record(self, **extra) -> dict:
        rec = {"lambda_window": list(self.window), "slope": self.slope, "residual": self.residual,
               "intercept": self.intercept, "prefactor": self.prefactor, "sign": self.sign}
        rec.update(extra)
        return rec

    def to_json(self, **extra) -> str:
        return json.dumps(self.to_record(**extra), sort_keys=True)


def fit_exponent(points, window=None) -> ScalingFit:
    """Least-squares slope of log|value| against log lambda.

    Points with zero or non-finite value are dropped with a warning; at
    least four must survive.  ``sign`` is +1 or -1 when all kept values share
    that sign, else 0.
    """
    pts = [(float(l), float(v)) for l, v in points]
    if window is not None:
        lo, hi = window
        pts = [p for p in pts if lo <= p[0] <= hi]
    kept = [p for p in pts if p[0] > 0 and np.isfinite(p[1]) and p[1] != 0]
    dropped = [p for p in pts if p not in kept]
    if dropped:
        warnings.warn(f"fit_exponent dropped {len(dropped)} nonpositive or invalid points", UserWarning, stacklevel=2)
    if len(kept) < 4:
        raise ValueError(f"need at least 4 usable points, got {len(kept)}")
    lam = np.array([p[0] for p in kept])
    val = np.array([p[1] for p in kept])
    x, y = np.log(lam), np.log(np.abs(val))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    signs = set(np.sign(val).astype(int))
    sign = signs.pop() if len(signs) == 1 else 0
    win = (float(lam.min()), float(lam.max())) if window is None else tuple(map(float, window))
    return ScalingFit(kept, float(slope), float(intercept), resid, win, dropped, int(sign))
