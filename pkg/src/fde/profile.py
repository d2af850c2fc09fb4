"""Self-similar profile construction.

The radial profile f blows up at the origin like (log(1/r)/r^2)^{1/(1-m)} and
decays like r^{-(n-2)/m} at infinity.  Working with f directly is hopeless in
float64, so everything is computed through its inversion

    g(r) = r^{-(n-2)/m} f(1/r),

which is a bounded, strictly decreasing function with g(0) = eta.  The
pipeline is:

1. ``local_series_start``   -- one-term local solution near r = 0 that
   absorbs the r^{-delta1} derivative singularity,
2. ``integrate_inner``      -- adaptive RK45 on (g, g_r) up to r_switch,
3. ``integrate_far_field``  -- switch to s = log r and integrate the
   autonomous equation for w~(s) = r^{(n-2-nm)/m} g^{1-m} up to s_max
   (default 200, i.e. radii up to e^200, representable only through s),
4. ``estimate_K``           -- extract the limit constant K(eta, beta~) from
   the far-field trace using the closed-form tail corrections.

The assembled ``Profile`` evaluates g, f, the lambda-scaling family f_lambda
and the eternal solutions U_lambda anywhere in [0, e^{s_max}] (respectively
[e^{-s_max}, 1/r0] for f), using log-space arithmetic so that quantities like
f(e^{-200}) ~ e^{500} never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .params import DerivedConstants, ModelParams, derive_constants

__all__ = [
    "ProfileError",
    "ProfileRequest",
    "InnerProfile",
    "FarFieldTrace",
    "KEstimate",
    "Profile",
    "local_series_start",
    "integrate_inner",
    "integrate_far_field",
    "estimate_K",
    "compute_profile",
    "check_scaling_identities",
    "check_profile_invariants",
]


class ProfileError(RuntimeError):
    """Profile construction or evaluation failed."""


@dataclass(frozen=True)
class ProfileRequest:
    """Inputs for one profile run.

    eta is g(0), which equals the far-field amplitude A of f; r0 and
    r_switch bracket the inner integration; s_max is the far-field horizon
    in s = log r; tol is the per-step integration tolerance.
    """

    params: ModelParams
    eta: float
    r0: float = 1e-6
    r_switch: float = 10.0
    s_max: float = 200.0
    tol: float = 1e-10

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ProfileError(f"eta must be positive, got {self.eta!r}")
        if not (0.0 < self.r0 < self.r_switch):
            raise ProfileError(f"need 0 < r0 < r_switch, got r0={self.r0!r}, r_switch={self.r_switch!r}")
        if not self.r_switch > 1.0:
            raise ProfileError(f"r_switch must exceed 1 so the far field has s > 0, got {self.r_switch!r}")
        if not self.s_max > math.log(self.r_switch):
            raise ProfileError(f"s_max={self.s_max!r} must exceed log(r_switch)={math.log(self.r_switch)!r}")
        if not self.tol > 0.0:
            raise ProfileError(f"tol must be positive, got {self.tol!r}")


@dataclass(frozen=True)
class InnerProfile:
    """g and g_r sampled on a fixed log-spaced grid in [r0, r_switch]."""

    r: np.ndarray
    g: np.ndarray
    g_r: np.ndarray
    c_loc: float            # startup coefficient: g_r ~ c_loc * r^{-delta1} near 0
    startup_error: float    # a-posteriori bound on the neglected second-order startup term
    residual_max: float     # max scaled flux-form ODE residual over node triples


@dataclass(frozen=True)
class FarFieldTrace:
    """w~, w~_s and the subtracted quantities h, h1 on a fixed s grid."""

    s: np.ndarray
    w: np.ndarray
    w_s: np.ndarray
    h: np.ndarray
    h1: Optional[np.ndarray]   # None in the Yamabe case, where h1 == h
    residual_max: float


@dataclass(frozen=True)
class KEstimate:
    """Tail-corrected estimate of K(eta, beta~) = lim h1(s) (lim h(s) in the Yamabe case)."""

    K: float
    error_estimate: float
    method: str
    converged: bool


def _rhs_inner(n: float, m: float, at: float, bt: float, src_exp: float):
    """Right side of the inverted ODE as a first-order system in (g, g_r)."""

    def rhs(r, y):
        g, gr = y
        src = r ** src_exp * (at * g + bt * r * gr)
        grr = (1.0 - m) * gr * gr / g - (n - 1) * gr / r - g ** (1.0 - m) * src / (n - 1)
        return (gr, grr)

    return rhs


def local_series_start(req: ProfileRequest, c: Optional[DerivedConstants] = None):
    """Local solution at r0: g = eta + C_loc r^{1-delta1}/(1-delta1), g_r = C_loc r^{-delta1}.

    C_loc comes from freezing g at eta in the equation and integrating the
    flux (r^{n-1}(g^m)_r)_r once; the same formula covers both the bounded
    (delta1 < 0) and singular-derivative (delta1 in [0,1)) startup cases.
    Returns (g(r0), g_r(r0)).  Raises ProfileError when the a-posteriori
    estimate of the neglected second-order term exceeds tol.
    """
    if c is None:
        c = derive_constants(req.params)
    n, m = req.params.n, req.params.m
    eta, r0 = req.eta, req.r0
    d1 = c.delta1
    c_loc = -m * c.alpha_tilde * eta ** (2.0 - m) / ((n - 1) * (n - 2 - 2 * m))
    corr1 = c_loc * r0 ** (1.0 - d1) / (1.0 - d1)
    # the dropped second-order term is ~ (corr1/eta) * corr1 up to an O(1) factor
    second = abs(corr1) ** 2 / eta * (2.0 - m + c.beta_tilde / c.alpha_tilde * abs(1.0 - d1))
    if second > req.tol * eta:
        raise ProfileError(
            f"startup correction estimate {second:.3e} exceeds tol*eta={req.tol * eta:.3e}; "
            f"request a smaller r0 (got r0={r0!r})"
        )
    return eta + corr1, c_loc * r0 ** (-d1)


def _flux_residual_inner(req, c, r, g, g_r):
    """Scaled residual of the inverted ODE in integrated (flux) form.

    The equation is equivalent to
        d/dr [ r^{n-1} (g^m)_r ] = -(m/(n-1)) r^{(n-2)/m - 3} (at*g + bt*r*g_r),
    so on each node triple the flux difference must match the Simpson
    quadrature of the right side; the mismatch, scaled by the largest term,
    is the reported residual.  Works on the fixed grid, independent of the
    integrator's internal error control.
    """
    n, m = req.params.n, req.params.m
    at, bt = c.alpha_tilde, c.beta_tilde
    flux = r ** (n - 1) * m * g ** (m - 1.0) * g_r
    rhs = -(m / (n - 1)) * r ** ((n - 2) / m - 3.0) * (at * g + bt * r * g_r)
    # Simpson over [r_{2k}, r_{2k+2}] with the log-spaced grid treated in s
    s = np.log(r)
    integ = rhs * r  # d r = r d s
    k = np.arange(0, len(r) - 2, 2)
    ds = s[k + 1] - s[k]
    quad = ds / 3.0 * (integ[k] + 4.0 * integ[k + 1] + integ[k + 2])
    lhs = flux[k + 2] - flux[k]
    scale = np.maximum(np.abs(flux[k + 2]) + np.abs(flux[k]), np.abs(quad))
    return float(np.max(np.abs(lhs - quad) / scale))


def integrate_inner(req: ProfileRequest, c: Optional[DerivedConstants] = None,
                    n_nodes: int = 4097) -> InnerProfile:
    """Integrate the inverted ODE from r0 to r_switch with an embedded RK 4(5) pair."""
    if c is None:
        c = derive_constants(req.params)
    n, m = req.params.n, req.params.m
    g0, g0r = local_series_start(req, c)
    src_exp = (n - 2) / m - n - 2.0
    rhs = _rhs_inner(float(n), m, c.alpha_tilde, c.beta_tilde, src_exp)

    def hit_zero(r, y):
        return y[0] - 1e-300

    hit_zero.terminal = True

    # g stays O(eta) but g_r sweeps many decades without changing sign, so it
    # gets pure relative control; an absolute floor there would cap the flux
    # accuracy near r0 and pollute the residual check.
    sol = solve_ivp(
        rhs, (req.r0, req.r_switch), (g0, g0r), method="RK45",
        rtol=req.tol, atol=(req.tol * req.eta * 1e-3, 0.0),
        first_step=req.r0 / 10.0, dense_output=True, events=hit_zero,
    )
    if not sol.success or sol.t[-1] < req.r_switch:
        raise ProfileError(
            f"inner integration failed at r={sol.t[-1]:.6e}: "
            + (sol.message if not sol.success else "g reached 0 (step-size collapse)")
        )

    r = np.geomspace(req.r0, req.r_switch, n_nodes)
    y = sol.sol(r)
    g, g_r = y[0], y[1]
    if np.any(g <= 0.0):
        bad = r[np.argmax(g <= 0.0)]
        raise ProfileError(f"g non-positive at r={bad:.6e}")
    mono = g + (c.beta_tilde / c.alpha_tilde) * r * g_r
    if np.any(mono <= -10.0 * req.tol * req.eta):
        bad = r[np.argmax(mono <= -10.0 * req.tol * req.eta)]
        raise ProfileError(f"monotonicity expression g + (bt/at) r g_r violated at r={bad:.6e}")

    corr1 = abs(g0 - req.eta)
    startup_err = corr1 ** 2 / req.eta * (2.0 - m)
    res = _flux_residual_inner(req, c, r, g, g_r)
    return InnerProfile(r=r, g=g, g_r=g_r, c_loc=float(g0r * req.r0 ** c.delta1),
                        startup_error=startup_err, residual_max=res)


def _rhs_far(n: float, m: float, bt: float):
    """w~_ss as a function of (w~, w~_s); autonomous in s."""
    c_sq = (1.0 - 2.0 * m) / (1.0 - m)
    c_lin = ((n + 2.0) * m - (n - 2.0)) / (1.0 - m)
    c_w = 2.0 * (n - 2.0 - n * m) / (1.0 - m)
    c_adv = bt / (n - 1.0)

    def rhs(s, y):
        w, ws = y
        return (ws, c_sq * ws * ws / w - c_lin * ws + c_w * w - c_adv * w * ws)

    return rhs


def integrate_far_field(req: ProfileRequest, inner: InnerProfile,
                        c: Optional[DerivedConstants] = None,
                        ds_out: float = 0.02) -> FarFieldTrace:
    """Continue the profile in s = log r up to s_max via the w~ equation."""
    if c is None:
        c = derive_constants(req.params)
    n, m = req.params.n, req.params.m
    at, bt = c.alpha_tilde, c.beta_tilde
    wexp = (1.0 - m) * at / bt  # == (n-2-nm)/m
    rs = req.r_switch
    g_sw, gr_sw = inner.g[-1], inner.g_r[-1]
    s0 = math.log(rs)
    w0 = rs ** wexp * g_sw ** (1.0 - m)
    ws0 = (1.0 - m) * (at / bt) * rs ** wexp * g_sw ** (-m) * (g_sw + (bt / at) * rs * gr_sw)
    if ws0 <= 0.0:
        raise ProfileError(f"w_s(r_switch) = {ws0!r} <= 0; inner profile invalid at handoff")

    sol = solve_ivp(
        _rhs_far(float(n), m, bt), (s0, req.s_max), (w0, ws0),
        method="LSODA", rtol=req.tol, atol=req.tol, dense_output=True,
    )
    if not sol.success:
        raise ProfileError(f"far-field integration failed: {sol.message}")

    n_nodes = int(math.ceil((req.s_max - s0) / ds_out))
    n_nodes += (n_nodes + 1) % 2  # odd count for Simpson triples
    s = np.linspace(s0, req.s_max, n_nodes)
    y = sol.sol(s)
    w, w_s = y[0], y[1]
    if np.any(w_s <= 0.0):
        bad = s[np.argmax(w_s <= 0.0)]
        raise ProfileError(f"w~_s <= 0 at s={bad:.3f}; trace invalid")

    h = w - c.farfield_slope * s
    h1 = None if c.yamabe_case else h - c.h1_slope * np.log(s)

    # flux-style residual for the second-order system: w_s and its Simpson-integrated slope
    rhs = _rhs_far(float(n), m, bt)
    wss = rhs(s, (w, w_s))[1]
    k = np.arange(0, len(s) - 2, 2)
    ds = s[k + 1] - s[k]
    quad = ds / 3.0 * (wss[k] + 4.0 * wss[k + 1] + wss[k + 2])
    lhs = w_s[k + 2] - w_s[k]
    scale = np.maximum(np.abs(w_s[k + 2]) + np.abs(w_s[k]), np.abs(quad))
    res = float(np.max(np.abs(lhs - quad) / scale))

    return FarFieldTrace(s=s, w=w, w_s=w_s, h=h, h1=h1, residual_max=res)


def _a2_const_part(n: int, m: float) -> float:
    """K-independent part of the a2 coefficient."""
    return ((2.0 * (1.0 - 2.0 * m) * (n - 1) * (n - 2 - n * m)
             + (n - 1) * (n - 2 - (n + 2) * m) ** 2) / (1.0 - m) ** 2)


def _k_hat(trace: FarFieldTrace, c: DerivedConstants, n: int, m: float, s_eval: float) -> float:
    """Tail-corrected K estimate at a single s.

    Non-Yamabe: h1(s) = K(1 + llc/s) + h1_tail*(1+log s)/s - (1-m)*A2_0/(2q*bt*s) + o(1/s),
    with llc the log-log coefficient, q = n-2-nm and A2_0 the K-independent
    part of a2; solve the linear relation for K.  Yamabe: h(s) = K - tail/s.
    """
    idx = int(np.clip(np.searchsorted(trace.s, s_eval) - 1, 0, len(trace.s) - 2))
    frac = (s_eval - trace.s[idx]) / (trace.s[idx + 1] - trace.s[idx])
    if c.yamabe_case:
        h = trace.h[idx] * (1 - frac) + trace.h[idx + 1] * frac
        tail = (n - 1) * (1.0 - 2.0 * m) / ((1.0 - m) * c.beta_tilde)
        return h + tail / s_eval
    h1 = trace.h1[idx] * (1 - frac) + trace.h1[idx + 1] * frac
    q = n - 2 - n * m
    corr = (1.0 - m) * _a2_const_part(n, m) / (2.0 * q * c.beta_tilde * s_eval)
    num = h1 - c.h1_tail_coeff * (1.0 + math.log(s_eval)) / s_eval + corr
    return num / (1.0 + c.loglog_coeff / s_eval)


def estimate_K(trace: FarFieldTrace, c: DerivedConstants, n: int, m: float) -> KEstimate:
    """Extract K(eta, beta~) from the far-field trace.

    Uses the closed-form tail of the h1 expansion refined by the h2-level
    correction (which is linear in K and solved self-consistently); in the
    Yamabe case the 1/s tail of h itself.  error_estimate compares the
    values at s_max and s_max/2.
    """
    s_max = trace.s[-1]
    if s_max < 50.0:
        raise ProfileError(f"K extraction needs s_max >= 50, trace ends at {s_max!r}")
    k_full = _k_hat(trace, c, n, m, s_max)
    k_half = _k_hat(trace, c, n, m, s_max / 2.0)
    err = abs(k_full - k_half)
    method = ("h tail (yamabe)" if c.yamabe_case
              else "h1 tail with self-consistent a2 correction")
    converged = err <= 1e-2 * (1.0 + abs(k_full))
    return KEstimate(K=float(k_full), error_estimate=float(err), method=method,
                     converged=bool(converged))


class Profile:
    """A computed profile with piecewise evaluation.

    Regions: local series on (0, r0], interpolated inner solution on
    [r0, r_switch], far-field reconstruction on [r_switch, e^{s_max}].
    All evaluators are vectorized over r.  A constructed Profile is never
    mutated and is safe to share across threads; independent requests can
    be computed concurrently.
    """

    def __init__(self, request: ProfileRequest, constants: DerivedConstants,
                 inner: InnerProfile, far: FarFieldTrace, k_estimate: KEstimate):
        self.request = request
        self.constants = constants
        self.inner = inner
        self.far = far
        self.k_estimate = k_estimate
        c = constants
        self._wexp = (1.0 - request.params.m) * c.alpha_tilde / c.beta_tilde
        s_in = np.log(inner.r)
        self._ip_lng = PchipInterpolator(s_in, np.log(inner.g), extrapolate=False)
        self._ip_rat = PchipInterpolator(s_in, inner.r * inner.g_r / inner.g, extrapolate=False)
        self._ip_w = PchipInterpolator(far.s, far.w, extrapolate=False)
        self._ip_ws = PchipInterpolator(far.s, far.w_s, extrapolate=False)

    @property
    def eta(self) -> float:
        return self.request.eta

    # -- g ----------------------------------------------------------------

    def eval_g_log(self, r):
        """(log g(r), r g_r(r)/g(r)); the numerically safe primitive."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise ProfileError("g evaluation needs r > 0")
        smax = self.request.s_max
        if np.max(r) > math.exp(min(smax, 700.0)) * (1.0 + 1e-12):
            raise ProfileError(f"r beyond e^s_max = e^{smax}; no extrapolation")
        req, c = self.request, self.constants
        one_m = 1.0 - req.params.m
        s = np.log(r)
        lng = np.empty_like(s)
        rat = np.empty_like(s)

        lo = r <= req.r0
        mid = (r > req.r0) & (r <= req.r_switch)
        hi = r > req.r_switch

        if np.any(lo):
            d1 = c.delta1
            c_loc = -req.params.m * c.alpha_tilde * req.eta ** (2.0 - req.params.m) / (
                (req.params.n - 1) * (req.params.n - 2 - 2 * req.params.m))
            gv = req.eta + c_loc * r[lo] ** (1.0 - d1) / (1.0 - d1)
            lng[lo] = np.log(gv)
            rat[lo] = c_loc * r[lo] ** (1.0 - d1) / gv
        if np.any(mid):
            lng[mid] = self._ip_lng(s[mid])
            rat[mid] = self._ip_rat(s[mid])
        if np.any(hi):
            sh = np.minimum(s[hi], self.far.s[-1])  # clip 1-ulp overshoot
            w = self._ip_w(sh)
            ws = self._ip_ws(sh)
            lng[hi] = (np.log(w) - self._wexp * sh) / one_m
            rat[hi] = ws / (one_m * w) - c.alpha_tilde / c.beta_tilde
        return lng, rat

    def eval_g(self, r):
        """(g(r), g_r(r)); overflow-free since g <= eta."""
        lng, rat = self.eval_g_log(r)
        g = np.exp(lng)
        return g, g * rat / np.asarray(r, dtype=float)

    # -- f ----------------------------------------------------------------

    def eval_f_log(self, r):
        """(log f(r), r f_r(r)/f(r)) via the inversion f(r) = r^{-(n-2)/m} g(1/r)."""
        r = np.asarray(r, dtype=float)
        cexp = (self.request.params.n - 2) / self.request.params.m
        lng, rat = self.eval_g_log(1.0 / r)
        return lng - cexp * np.log(r), -cexp - rat

    def eval_f(self, r):
        """(f(r), f_r(r)).  May overflow for r so small that f exceeds float range;
        use eval_f_log there."""
        lnf, rat = self.eval_f_log(r)
        f = np.exp(lnf)
        return f, f * rat / np.asarray(r, dtype=float)

    # -- lambda family ------------------------------------------------------

    def _require_unit_eta(self):
        if abs(self.request.eta - 1.0) > 1e-14:
            raise ProfileError("lambda-family evaluation requires the eta = 1 profile")

    def eval_f_lambda_log(self, lam: float, r):
        self._require_unit_eta()
        if not lam > 0.0:
            raise ProfileError(f"lambda must be positive, got {lam!r}")
        one_m = 1.0 - self.request.params.m
        lnf, rat = self.eval_f_log(lam * np.asarray(r, dtype=float))
        return 2.0 / one_m * math.log(lam) + lnf, rat

    def eval_f_lambda(self, lam: float, r):
        """f_lambda(r) = lambda^{2/(1-m)} f_1(lambda r)."""
        lnf, _ = self.eval_f_lambda_log(lam, r)
        return np.exp(lnf)

    def eval_g_lambda(self, lam: float, r):
        """g_lambda(r) = lambda^{2/(1-m)-(n-2)/m} g_1(r/lambda)."""
        self._require_unit_eta()
        p = self.request.params
        lng, _ = self.eval_g_log(np.asarray(r, dtype=float) / lam)
        return np.exp((2.0 / (1.0 - p.m) - (p.n - 2) / p.m) * math.log(lam) + lng)

    def eval_U_lambda(self, lam: float, r, t: float):
        """U_lambda(r, t) = e^{-alpha t} f_lambda(e^{-beta t} r)."""
        c = self.constants
        beta = self.request.params.beta
        arg = math.exp(-beta * t) * np.asarray(r, dtype=float)
        lnf, _ = self.eval_f_lambda_log(lam, arg)
        return np.exp(-c.alpha * t + lnf)

    def eval_U_bar_lambda(self, lam: float, r, t: float):
        """U~bar_lambda(r, t) = e^{-alpha~ t} g_lambda(e^{-beta~ t} r)."""
        c = self.constants
        p = self.request.params
        arg = math.exp(-c.beta_tilde * t) * np.asarray(r, dtype=float) / lam
        lng, _ = self.eval_g_log(arg)
        scale = (2.0 / (1.0 - p.m) - (p.n - 2) / p.m) * math.log(lam)
        return np.exp(-c.alpha_tilde * t + scale + lng)


def compute_profile(req: ProfileRequest) -> Profile:
    """Run the full pipeline and verify handoff continuity."""
    c = derive_constants(req.params)
    inner = integrate_inner(req, c)
    far = integrate_far_field(req, inner, c)
    k = estimate_K(far, c, req.params.n, req.params.m)
    prof = Profile(req, c, inner, far, k)
    # continuity across the handoff: reconstruct g(r_switch) from the far field
    one_m = 1.0 - req.params.m
    g_far = (far.w[0] * math.exp(-prof._wexp * far.s[0])) ** (1.0 / one_m)
    if abs(g_far - inner.g[-1]) > 10.0 * req.tol * max(1.0, inner.g[-1]):
        raise ProfileError(
            f"handoff discontinuity at r_switch: inner g={inner.g[-1]!r}, far g={g_far!r}"
        )
    return prof


def check_profile_invariants(prof: Profile) -> dict:
    """Node-wise invariant checks and growth-limit diagnostics for a profile."""
    req, c = prof.request, prof.constants
    n, m = req.params.n, req.params.m
    inner, far = prof.inner, prof.far
    r, g, g_r = inner.r, inner.g, inner.g_r

    mono = g + (c.beta_tilde / c.alpha_tilde) * r * g_r
    # discrete second differences of g^m on the log grid: superharmonicity
    # (g^m)'' + (n-1)/r (g^m)' < 0  <=>  in s: phi_ss + (n-2) phi_s < 0, phi = g^m.
    # Compared in phi units: dividing by r^2 would blow the roundoff of the
    # second difference up by e^{-2s} where the true value is ~0.
    s = np.log(r)
    phi = g ** m
    ds = s[1] - s[0]
    phi_ss = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / ds ** 2
    phi_s = (phi[2:] - phi[:-2]) / (2.0 * ds)
    superharm = phi_ss + (n - 2) * phi_s
    superharm_tol = 128.0 * np.finfo(float).eps * float(np.max(np.abs(phi))) / ds ** 2

    # r w_r / w on both branches
    rw_inner = (1.0 - m) * (c.alpha_tilde / c.beta_tilde + r * g_r / g)
    rw_far = far.w_s / far.w

    # growth limits
    ws_end = far.w_s[-1]
    w_over_s = far.w[-1] / far.s[-1]
    lng20, _ = prof.eval_g_log(np.array([math.exp(-20.0)]))
    g_at_small = float(np.exp(lng20[0]))

    # f-decay inequality alpha f + beta r f_r > 0 on sampled radii
    rs = np.geomspace(math.exp(-0.9 * req.s_max), 0.5 / req.r0, 200)
    _, rff = prof.eval_f_log(rs)
    f_dec = c.alpha - c.beta_tilde * rff  # = (alpha f + beta r f_r)/f

    return {
        "g_min": float(np.min(g)),
        "monotone_min": float(np.min(mono)),
        "ws_min": float(np.min(far.w_s)),
        "superharmonic_max": float(np.max(superharm)),
        "superharmonic_tol": float(superharm_tol),
        "rwr_over_w_max": float(max(np.max(rw_inner), np.max(rw_far))),
        "residual_inner": inner.residual_max,
        "residual_far": far.residual_max,
        "ws_ratio": float(ws_end / c.farfield_slope),
        "w_over_s_ratio": float(w_over_s / c.farfield_slope),
        "g_origin_ratio": g_at_small / req.eta,
        "f_dec_min": float(np.min(f_dec)),
        "ok": bool(
            np.min(g) > 0.0
            and np.min(mono) > 0.0
            and np.min(far.w_s) > 0.0
            and np.max(superharm) < superharm_tol
            and np.min(f_dec) > 0.0
        ),
    }


def check_scaling_identities(params: ModelParams, eta1: float, eta2: float,
                             beta_tilde1: float, beta_tilde2: float,
                             n_samples: int = 50, tol: float = 1e-10) -> dict:
    """Verify the four profile transformation identities on independent runs.

    Computes profiles independently at the parameter pairs and evaluates
    each identity on a log-spaced sample spanning the inner and far-field
    branches; reports the max relative deviation per identity.
    """
    if n_samples < 2:
        raise ProfileError("need at least 2 sample radii")
    n, m = params.n, params.m
    one_m = 1.0 - m
    g1c = (n - 2) / m - 2.0 / one_m  # gamma1

    def prof_for(eta, bt):
        p = ModelParams(n=n, m=m, beta=-bt)
        return compute_profile(ProfileRequest(params=p, eta=eta, tol=tol))

    p_11 = prof_for(eta1, beta_tilde1)
    p_21 = prof_for(eta2, beta_tilde1)
    p_12 = prof_for(eta1, beta_tilde2)
    amp = (beta_tilde2 / beta_tilde1) ** (1.0 / one_m)
    p_amp = prof_for(amp * eta1, beta_tilde1)

    smax = p_11.request.s_max
    r_g = np.geomspace(2.0 * p_11.request.r0, math.exp(0.45 * smax), n_samples)
    r_f = 1.0 / r_g[::-1]

    out = {}

    # g identity in eta: g_{bt1,eta1}(r) = (eta1/eta2) g_{bt1,eta2}((eta1/eta2)^{m(1-m)/q} r)
    q = n - 2 - n * m
    fac = (eta1 / eta2) ** (m * one_m / q)
    lhs, _ = p_11.eval_g_log(r_g)
    rhs, _ = p_21.eval_g_log(fac * r_g)
    out["g_eta"] = float(np.max(np.abs(lhs - (math.log(eta1 / eta2) + rhs))))

    # g identity in beta~: g_{bt1, amp*eta1}(r) = amp * g_{bt2, eta1}(r)
    lhs, _ = p_amp.eval_g_log(r_g)
    rhs, _ = p_12.eval_g_log(r_g)
    out["g_beta"] = float(np.max(np.abs(lhs - (math.log(amp) + rhs))))

    # f identity in A (A = eta): f_{b1,A1}(r) = (A2/A1)^{2/((1-m)g1)} f_{b1,A2}((A2/A1)^{1/g1} r)
    ra = (eta2 / eta1) ** (1.0 / g1c)
    lhs, _ = p_11.eval_f_log(r_f)
    rhs, _ = p_21.eval_f_log(ra * r_f)
    out["f_A"] = float(np.max(np.abs(lhs - (2.0 / (one_m * g1c) * math.log(eta2 / eta1) + rhs))))

    # f identity in beta: f_{b1, amp*A1}(r) = amp * f_{b2, A1}(r)
    lhs, _ = p_amp.eval_f_log(r_f)
    rhs, _ = p_12.eval_f_log(r_f)
    out["f_beta"] = float(np.max(np.abs(lhs - (math.log(amp) + rhs))))

    out["max_deviation"] = max(out["g_eta"], out["g_beta"], out["f_A"], out["f_beta"])
    out["threshold"] = 100.0 * tol
    out["ok"] = out["max_deviation"] <= out["threshold"]
    return out
