"""Pure-Python/numpy implementation of the kernels in ``_kernels.pyx``.

Same algorithms, same counter-based stream. Outputs agree with the compiled
build to the last few ulps (libm and numpy ``log`` may round differently).
"""

import heapq
import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
_FPMIN = 1e-300
_EPS = 2.220446049250313e-16
_N_SLOTS = 16

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
# 15 abscissae on [-1, 1] and the matching Kronrod / Gauss weights
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_KW = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_GW = np.zeros(15)
for _j in (1, 3, 5):
    _GW[_j] = _GW[14 - _j] = _WG[_j // 2]
_GW[7] = _WG[3]
_MAX_INTERVALS = 2000


def _e1_series(x):
    term = 1.0
    total = 0.0
    for k in range(1, 60):
        term *= -x / k
        add = term / k
        total += add
        if abs(add) < 1e-18 * abs(total) + 1e-300:
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_cfrac(x):
    b = x + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        dl = c * d
        h *= dl
        if abs(dl - 1.0) < _EPS:
            break
    return h


def e1(x):
    if not x > 0.0:
        raise ValueError("E1 requires x > 0")
    if x <= 1.0:
        return _e1_series(x)
    return math.exp(-x) * _e1_cfrac(x)


def scaled_e1(x):
    if not x > 0.0:
        raise ValueError("scaled E1 requires x > 0")
    if math.isinf(x):
        return 0.0
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _e1_cfrac(x)


def _scaled_e1_vec(x):
    out = np.empty_like(x)
    small = x <= 1.0
    if small.any():
        xs = x[small]
        term = np.ones_like(xs)
        total = np.zeros_like(xs)
        live = np.ones(xs.shape, dtype=bool)
        for k in range(1, 60):
            term = np.where(live, term * (-xs / k), term)
            add = np.where(live, term / k, 0.0)
            total = total + add
            live &= ~(np.abs(add) < 1e-18 * np.abs(total) + 1e-300)
            if not live.any():
                break
        out[small] = np.exp(xs) * (-EULER_GAMMA - np.log(xs) - total)
    big = ~small
    if big.any():
        xb = x[big]
        b = xb + 1.0
        c = np.full_like(xb, 1.0 / _FPMIN)
        d = 1.0 / b
        h = d.copy()
        live = np.ones(xb.shape, dtype=bool)
        for i in range(1, 10000):
            an = -float(i * i)
            b = b + 2.0
            d_new = 1.0 / (an * d + b)
            c_new = b + an / c
            dl = c_new * d_new
            d = np.where(live, d_new, d)
            c = np.where(live, c_new, c)
            h = np.where(live, h * dl, h)
            live &= ~(np.abs(dl - 1.0) < _EPS)
            if not live.any():
                break
        out[big] = h
    return out


def _gk15(a, b, k):
    centr = 0.5 * (a + b)
    hlgth = 0.5 * (b - a)
    u = centr + hlgth * _NODES
    f = u * np.exp(-k * u) * _scaled_e1_vec(u)
    resk = float(np.dot(_KW, f))
    resg = float(np.dot(_GW, f))
    return resk * hlgth, abs((resk - resg) * hlgth)


def weight_u(x_max, k, epsabs=1e-11, epsrel=1e-13):
    """Mixing weight of r_u in dimensionless form; returns ``(weight, error)``."""
    if not (x_max > 0.0 and k > 0.0):
        raise ValueError("weight_u requires X > 0 and k > 0")
    norm = k / (-math.expm1(-k * x_max))
    upper = min(x_max, 45.0 / k)
    pieces = [(0.0, 1.0), (1.0, upper)] if upper > 1.0 else [(0.0, upper)]
    heap = []
    for a, b in pieces:
        val, err = _gk15(a, b, k)
        heapq.heappush(heap, (-err, a, b, val))
    while True:
        total = math.fsum(item[3] for item in heap)
        toterr = math.fsum(-item[0] for item in heap)
        tol = max(epsabs / norm, epsrel * abs(total))
        if toterr <= tol or len(heap) >= _MAX_INTERVALS:
            break
        _, a, b, _ = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            heapq.heappush(heap, (0.0, a, b, _gk15(a, b, k)[0]))
            break
        for lo, hi in ((a, mid), (mid, b)):
            val, err = _gk15(lo, hi, k)
            heapq.heappush(heap, (-err, lo, hi, val))
    return norm * total, norm * toterr


_M64 = (1 << 64) - 1


def _mix_int(z):
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _mix(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _uniform_vec(key, idx, slot):
    ctr = idx * np.uint64(_N_SLOTS) + np.uint64(slot)
    h = _mix(np.uint64(key) ^ _mix(ctr))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 1.1102230246251565e-16


def stream_key(seed):
    return _mix_int(int(seed) & _M64)


def uniform(seed, cycle, slot):
    key = _mix_int(int(seed) & _M64)
    h = _mix_int(key ^ _mix_int((int(cycle) * _N_SLOTS + int(slot)) & _M64))
    return (float(h >> 11) + 0.5) * 1.1102230246251565e-16


def _poisson_inv_vec(mu, u):
    p = np.exp(-mu)
    cdf = p.copy()
    k = np.zeros(mu.shape, dtype=np.int64)
    kmax = mu + 40.0 * np.sqrt(mu) + 50.0
    live = (u > cdf) & (k < kmax)
    while live.any():
        k = np.where(live, k + 1, k)
        p = np.where(live, p * (mu / np.maximum(k, 1)), p)
        cdf = np.where(live, cdf + p, cdf)
        live = (u > cdf) & (k < kmax)
    return k


def _poisson_vec(key, idx, mu):
    out = np.zeros(mu.shape, dtype=np.int64)
    common = (mu > 0.0) & (mu <= 500.0)
    if common.any():
        out[common] = _poisson_inv_vec(mu[common], _uniform_vec(key, idx[common], 6))
    for i in np.flatnonzero(mu > 500.0):
        pieces = int(math.floor(mu[i] / 500.0)) + 1
        sub = np.uint64(idx[i]) * np.uint64(1000003) + np.arange(pieces, dtype=np.uint64)
        out[i] = _poisson_inv_vec(np.full(pieces, mu[i] / pieces), _uniform_vec(key, sub, 8)).sum()
    return out


def cycle_batch(alpha, beta, gamma, rational, p1, p2, lambda1, t_cap, seed, start, n):
    """Sample ``n`` attack cycles; see ``_kernels.cycle_batch``."""
    key = stream_key(seed)
    idx = np.arange(start, start + n, dtype=np.uint64)
    ap1, ap2 = alpha * p1, alpha * p2
    a1, a2 = beta + ap1, beta + ap2
    a1p = ap1 / a1 if a1 > 0.0 else 0.0
    lambda2 = (1.0 - ap2) * lambda1
    solo2 = alpha * (1.0 - p2)

    ba = np.zeros(n)
    bp = np.zeros(n)
    br = np.zeros(n)
    bc = np.ones(n)
    bo = np.ones(n)
    share = np.full(n, np.nan)
    case = np.zeros(n, dtype=np.int8)

    x = _uniform_vec(key, idx, 0)
    t1 = -np.log(_uniform_vec(key, idx, 1)) / lambda1
    wall = t1.copy()

    solo = (x >= ap1) & (x < alpha)
    pool = (x >= alpha) & (x < alpha + beta)
    outside = x >= alpha + beta
    case[solo] = 1
    ba[solo] = 1.0
    case[pool] = 2
    share[pool] = a1p
    ba[pool] = a1p
    bp[pool] = 1.0 - a1p
    br[outside] = 1.0

    wh = np.flatnonzero(x < ap1)
    if wh.size == 0:
        return ba, bp, br, bc, bo, wall, share, case
    widx = idx[wh]
    t1w = t1[wh]
    t2 = -np.log(_uniform_vec(key, widx, 2)) / lambda2
    timed = t2 >= t_cap if not math.isinf(t_cap) else np.zeros(wh.size, dtype=bool)
    w = np.where(timed, t_cap, t2)
    s = (ap1 * t1w + ap2 * w) / (a1 * t1w + a2 * w)
    npois = _poisson_vec(key, widx, ap2 * lambda1 * w)
    share[wh] = s
    wall[wh] = t1w + w

    i_t = wh[timed]
    case[i_t] = 3
    ba[i_t] = s[timed]
    bp[i_t] = 1.0 - s[timed]
    bo[i_t] = 1.0 + npois[timed]

    late = ~timed
    i_l = wh[late]
    s_l = s[late]
    n_l = npois[late]
    bo[i_l] = 2.0 + n_l
    y = _uniform_vec(key, idx[i_l], 3) * (1.0 - ap2)
    adv = y < solo2
    pw = (y >= solo2) & (y < solo2 + beta)
    fork = y >= solo2 + beta
    case[i_l[adv]] = 4
    ba[i_l[adv]] = 1.0
    case[i_l[pw]] = 5
    ba[i_l[pw]] = s_l[pw]
    bp[i_l[pw]] = 1.0 - s_l[pw]

    i_f = i_l[fork]
    s_f = s_l[fork]
    bc[i_f] = 2.0
    bo[i_f] = 3.0 + n_l[fork]
    wall[i_f] = wall[i_f] - np.log(_uniform_vec(key, idx[i_f], 7)) / lambda1
    z = _uniform_vec(key, idx[i_f], 4)
    on_adv = z < alpha
    on_pool = (z >= alpha) & (z < alpha + beta)
    out = z >= alpha + beta
    g = _uniform_vec(key, idx[i_f], 5) < gamma
    case[i_f[on_adv]] = 6
    ba[i_f[on_adv]] = 1.0 + s_f[on_adv]
    bp[i_f[on_adv]] = 1.0 - s_f[on_adv]
    case[i_f[on_pool]] = 7
    if rational:
        ba[i_f[on_pool]] = s_f[on_pool]
        bp[i_f[on_pool]] = 2.0 - s_f[on_pool]
    else:
        bp[i_f[on_pool]] = 1.0
        br[i_f[on_pool]] = 1.0
    m8 = out & g
    case[i_f[m8]] = 8
    ba[i_f[m8]] = s_f[m8]
    bp[i_f[m8]] = 1.0 - s_f[m8]
    br[i_f[m8]] = 1.0
    m9 = out & ~g
    case[i_f[m9]] = 9
    br[i_f[m9]] = 2.0
    return ba, bp, br, bc, bo, wall, share, case
