# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: exponential integral, the r_u mixing-weight quadrature
and the batched attack-cycle sampler.

``_pykernels`` carries a numpy implementation of the same algorithms with the
same counter-based random stream; ``tpaw._backend`` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, expm1, isinf, sqrt, floor
from libc.stdint cimport uint64_t, int64_t, int8_t

cnp.import_array()

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double FPMIN = 1e-300
cdef double EPS = 2.220446049250313e-16

# Gauss-Kronrod 15/7 (QUADPACK qk15)
cdef double[8] XGK = [
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0]
cdef double[8] WGK = [
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
cdef double[4] WG = [
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327]

cdef enum:
    MAX_INTERVALS = 2000
    N_SLOTS = 16


cdef inline double _e1_series(double x) nogil:
    # -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    cdef double term = 1.0, total = 0.0, add
    cdef int k
    for k in range(1, 60):
        term *= -x / k
        add = term / k
        total += add
        if fabs(add) < 1e-18 * fabs(total) + 1e-300:
            break
    return -EULER_GAMMA - log(x) - total


cdef inline double _e1_cfrac(double x) nogil:
    # modified Lentz on the continued fraction for e^x E1(x); x > 1
    cdef double b = x + 1.0, c = 1.0 / FPMIN, d = 1.0 / b, h = d, an, dl
    cdef int i
    for i in range(1, 10000):
        an = -<double>(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        dl = c * d
        h *= dl
        if fabs(dl - 1.0) < EPS:
            break
    return h


cdef inline double c_scaled_e1(double x) nogil:
    if x <= 1.0:
        return exp(x) * _e1_series(x)
    return _e1_cfrac(x)


cdef inline double c_e1(double x) nogil:
    if x <= 1.0:
        return _e1_series(x)
    return exp(-x) * _e1_cfrac(x)


def e1(double x):
    if not x > 0.0:
        raise ValueError("E1 requires x > 0")
    return c_e1(x)


def scaled_e1(double x):
    if not x > 0.0:
        raise ValueError("scaled E1 requires x > 0")
    if isinf(x):
        return 0.0
    return c_scaled_e1(x)


cdef inline double _integrand(double u, double k) nogil:
    return u * exp(-k * u) * c_scaled_e1(u)


cdef void _gk15(double a, double b, double k, double* res, double* err) nogil:
    cdef double centr = 0.5 * (a + b), hlgth = 0.5 * (b - a)
    cdef double fc = _integrand(centr, k)
    cdef double resk = fc * WGK[7], resg = fc * WG[3]
    cdef double f1, f2, dx
    cdef int j
    for j in range(7):
        dx = hlgth * XGK[j]
        f1 = _integrand(centr - dx, k)
        f2 = _integrand(centr + dx, k)
        resk += WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += WG[j // 2] * (f1 + f2)
    res[0] = resk * hlgth
    err[0] = fabs((resk - resg) * hlgth)


def weight_u(double x_max, double k, double epsabs=1e-11, double epsrel=1e-13):
    """Mixing weight of r_u in dimensionless form.

    ``k/(1 - e^{-k X}) * int_0^X u e^{-k u} S(u) du`` with ``S(u) = e^u E1(u)``,
    ``X = lambda1' T'`` and ``k = lambda2'/lambda1'``. Returns ``(weight, error)``.
    """
    cdef double upper, norm, total, toterr, tol, r, e
    cdef double lo[MAX_INTERVALS]
    cdef double hi[MAX_INTERVALS]
    cdef double val[MAX_INTERVALS]
    cdef double er[MAX_INTERVALS]
    cdef int n = 0, i, worst
    cdef double mid, a, b
    if not (x_max > 0.0 and k > 0.0):
        raise ValueError("weight_u requires X > 0 and k > 0")
    norm = k / (-expm1(-k * x_max))
    upper = x_max
    if upper > 45.0 / k:
        upper = 45.0 / k
    with nogil:
        if upper > 1.0:
            _gk15(0.0, 1.0, k, &val[0], &er[0])
            lo[0] = 0.0; hi[0] = 1.0
            _gk15(1.0, upper, k, &val[1], &er[1])
            lo[1] = 1.0; hi[1] = upper
            n = 2
        else:
            _gk15(0.0, upper, k, &val[0], &er[0])
            lo[0] = 0.0; hi[0] = upper
            n = 1
        while True:
            total = 0.0
            toterr = 0.0
            worst = 0
            for i in range(n):
                total += val[i]
                toterr += er[i]
                if er[i] > er[worst]:
                    worst = i
            tol = epsabs / norm
            if epsrel * fabs(total) > tol:
                tol = epsrel * fabs(total)
            if toterr <= tol or n >= MAX_INTERVALS:
                break
            a = lo[worst]; b = hi[worst]
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            _gk15(a, mid, k, &r, &e)
            val[worst] = r; er[worst] = e; hi[worst] = mid
            _gk15(mid, b, k, &r, &e)
            val[n] = r; er[n] = e; lo[n] = mid; hi[n] = b
            n += 1
    return norm * total, norm * toterr


# counter-based stream: uniform(seed, cycle, slot) = splitmix64 hash chain
cdef inline uint64_t _mix(uint64_t z) nogil:
    z = z + <uint64_t>0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t cycle, uint64_t slot) nogil:
    cdef uint64_t h = _mix(key ^ _mix(cycle * N_SLOTS + slot))
    return (<double>(h >> 11) + 0.5) * 1.1102230246251565e-16


cdef inline int64_t _poisson_inv(double mu, double u) nogil:
    cdef double p = exp(-mu), cdf = p
    cdef int64_t k = 0
    cdef double kmax = mu + 40.0 * sqrt(mu) + 50.0
    while u > cdf and k < kmax:
        k += 1
        p *= mu / k
        cdf += p
    return k


cdef inline int64_t _poisson(uint64_t key, uint64_t cycle, double mu) nogil:
    # slot 6 for the common case; large means split over extra slots
    cdef int64_t total = 0, pieces, j
    if mu <= 0.0:
        return 0
    if mu <= 500.0:
        return _poisson_inv(mu, _uniform(key, cycle, 6))
    pieces = <int64_t>floor(mu / 500.0) + 1
    for j in range(pieces):
        total += _poisson_inv(mu / pieces, _uniform(key, cycle * 1000003ULL + <uint64_t>j, 8))
    return total


def stream_key(uint64_t seed):
    return _mix(seed)


def uniform(uint64_t seed, uint64_t cycle, uint64_t slot):
    return _uniform(_mix(seed), cycle, slot)


def cycle_batch(double alpha, double beta, double gamma, bint rational,
                double p1, double p2, double lambda1, double t_cap,
                uint64_t seed, int64_t start, int64_t n):
    """Sample ``n`` attack cycles with indices ``start .. start+n-1``.

    Returns ``(b_a, b_p, b_r, b_c, b_o, wall, share, case)``. ``share`` is the
    adversary's realized fraction of the withheld fPoW (``a1'`` when the pool
    wins before any withholding) and NaN in the remaining pre-withholding cases.
    """
    cdef cnp.ndarray[double] ba_a = np.zeros(n)
    cdef cnp.ndarray[double] bp_a = np.zeros(n)
    cdef cnp.ndarray[double] br_a = np.zeros(n)
    cdef cnp.ndarray[double] bc_a = np.zeros(n)
    cdef cnp.ndarray[double] bo_a = np.zeros(n)
    cdef cnp.ndarray[double] wall_a = np.zeros(n)
    cdef cnp.ndarray[double] share_a = np.full(n, np.nan)
    cdef cnp.ndarray[int8_t] case_a = np.zeros(n, dtype=np.int8)
    cdef double[::1] ba = ba_a, bp = bp_a, br = br_a, bc = bc_a, bo = bo_a
    cdef double[::1] wall = wall_a, share = share_a
    cdef int8_t[::1] case = case_a

    cdef uint64_t key = _mix(seed)
    cdef uint64_t idx
    cdef int64_t i, npois
    cdef double ap1 = alpha * p1, ap2 = alpha * p2
    cdef double a1 = beta + ap1, a2 = beta + ap2
    cdef double a1p = ap1 / a1 if a1 > 0.0 else 0.0
    cdef double rest = 1.0 - alpha - beta
    cdef double lambda2 = (1.0 - ap2) * lambda1
    cdef double solo2 = alpha * (1.0 - p2)
    cdef double x, t1, t2, w, s
    cdef bint capped = not isinf(t_cap)

    with nogil:
        for i in range(n):
            idx = <uint64_t>(start + i)
            x = _uniform(key, idx, 0)
            t1 = -log(_uniform(key, idx, 1)) / lambda1
            bc[i] = 1.0
            if x >= ap1:
                wall[i] = t1
                bo[i] = 1.0
                if x < alpha:
                    case[i] = 1
                    ba[i] = 1.0
                elif x < alpha + beta:
                    case[i] = 2
                    share[i] = a1p
                    ba[i] = a1p
                    bp[i] = 1.0 - a1p
                else:
                    case[i] = 0
                    br[i] = 1.0
                continue
            t2 = -log(_uniform(key, idx, 2)) / lambda2
            if capped and t2 >= t_cap:
                w = t_cap
                s = (ap1 * t1 + ap2 * w) / (a1 * t1 + a2 * w)
                npois = _poisson(key, idx, ap2 * lambda1 * w)
                case[i] = 3
                share[i] = s
                ba[i] = s
                bp[i] = 1.0 - s
                bo[i] = 1.0 + npois
                wall[i] = t1 + w
                continue
            w = t2
            s = (ap1 * t1 + ap2 * w) / (a1 * t1 + a2 * w)
            npois = _poisson(key, idx, ap2 * lambda1 * w)
            share[i] = s
            wall[i] = t1 + w
            bo[i] = 2.0 + npois
            x = _uniform(key, idx, 3) * (1.0 - ap2)
            if x < solo2:
                case[i] = 4
                ba[i] = 1.0
            elif x < solo2 + beta:
                case[i] = 5
                ba[i] = s
                bp[i] = 1.0 - s
            else:
                bc[i] = 2.0
                bo[i] = 3.0 + npois
                wall[i] = t1 + w - log(_uniform(key, idx, 7)) / lambda1
                x = _uniform(key, idx, 4)
                if x < alpha:
                    case[i] = 6
                    ba[i] = 1.0 + s
                    bp[i] = 1.0 - s
                elif x < alpha + beta:
                    case[i] = 7
                    if rational:
                        ba[i] = s
                        bp[i] = 2.0 - s
                    else:
                        bp[i] = 1.0
                        br[i] = 1.0
                elif _uniform(key, idx, 5) < gamma:
                    case[i] = 8
                    ba[i] = s
                    bp[i] = 1.0 - s
                    br[i] = 1.0
                else:
                    case[i] = 9
                    br[i] = 2.0
    return ba_a, bp_a, br_a, bc_a, bo_a, wall_a, share_a, case_a
