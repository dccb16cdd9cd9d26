# cython: language_level=3
"""Compiled kernel backend.

Mirror of ``_purekernels``: the same Gauss-Kronrod panel, the same
heap-driven adaptive bisection, the same continued fraction and
integrands, written against C doubles with function-pointer dispatch.
Keep edits here mirrored in the pure module; tests/test_backends.py
holds the two to near machine-precision agreement.
"""

from libc.math cimport (cos, erfc, exp, fabs, fmax, fmin, isfinite, lgamma,
                        log, log1p, pow, sin, sqrt)
from libc.stdlib cimport free, malloc

BACKEND_NAME = "c"

cdef double SQRT1_2 = sqrt(0.5)
cdef double HALF_PI = 3.141592653589793 / 2.0
cdef double INV_FOUR_PI = 1.0 / (4.0 * 3.141592653589793)
cdef double EPS = 2.220446049250313e-16
cdef double UFLOW = 2.2250738585072014e-308

cdef int CF_MAX_ITER = 400
cdef double CF_EPS = 1e-16
cdef double CF_TINY = 1e-300

cdef double[7] XGK = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
]
cdef double[8] WGK = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
]
cdef double[4] WG = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
]


# ---------------------------------------------------------------------------
# scalar kernels

cdef double _pochhammer(double x, long long n) noexcept nogil:
    cdef double out = 1.0
    cdef long long k
    for k in range(n):
        out *= x + k
    return out


cdef double _log_beta(double a, double b) noexcept nogil:
    return lgamma(a) + lgamma(b) - lgamma(a + b)


cdef double _beta_cf(double x, double a, double b) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int it, m2
    if fabs(d) < CF_TINY:
        d = CF_TINY
    d = 1.0 / d
    h = d
    for it in range(1, CF_MAX_ITER + 1):
        m2 = 2 * it
        aa = it * (b - it) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if fabs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if fabs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_EPS:
            return h
    return h


cdef double _betainc(double x, double a, double b) noexcept nogil:
    cdef double front
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(a * log(x) + b * log1p(-x) - _log_beta(a, b))
    if x <= a / (a + b):
        return front * _beta_cf(x, a, b) / a
    return 1.0 - front * _beta_cf(1.0 - x, b, a) / b


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod engine

ctypedef double (*integrand)(double, const double*) noexcept nogil

cdef struct Panel:
    double lo
    double hi
    double val
    double err
    long long order


cdef inline bint _worse(Panel* h, int i, int j) noexcept nogil:
    # priority: larger error first, insertion order breaking ties
    if h[i].err != h[j].err:
        return h[i].err > h[j].err
    return h[i].order < h[j].order


cdef void _heap_push(Panel* h, int* n, Panel p) noexcept nogil:
    cdef int i = n[0]
    cdef int parent
    cdef Panel tmp
    h[i] = p
    n[0] += 1
    while i > 0:
        parent = (i - 1) // 2
        if _worse(h, i, parent):
            tmp = h[i]
            h[i] = h[parent]
            h[parent] = tmp
            i = parent
        else:
            break


cdef Panel _heap_pop(Panel* h, int* n) noexcept nogil:
    cdef Panel top = h[0]
    cdef int i = 0
    cdef int child
    cdef Panel tmp
    n[0] -= 1
    h[0] = h[n[0]]
    while True:
        child = 2 * i + 1
        if child >= n[0]:
            break
        if child + 1 < n[0] and _worse(h, child + 1, child):
            child += 1
        if _worse(h, child, i):
            tmp = h[i]
            h[i] = h[child]
            h[child] = tmp
            i = child
        else:
            break
    return top


cdef int _gk15(integrand f, const double* pars, double lo, double hi,
               double* out_v, double* out_e) noexcept nogil:
    cdef double c = 0.5 * (lo + hi)
    cdef double h = 0.5 * (hi - lo)
    cdef double fc = f(c, pars)
    cdef double resg = WG[3] * fc
    cdef double resk = WGK[7] * fc
    cdef double resabs = fabs(resk)
    cdef double[7] fv1
    cdef double[7] fv2
    cdef double dx, f1, f2, s, reskh, resasc, value, err
    cdef int i
    for i in range(7):
        dx = h * XGK[i]
        f1 = f(c - dx, pars)
        f2 = f(c + dx, pars)
        fv1[i] = f1
        fv2[i] = f2
        s = f1 + f2
        resk += WGK[i] * s
        if i % 2 == 1:
            resg += WG[i // 2] * s
        resabs += WGK[i] * (fabs(f1) + fabs(f2))
    reskh = 0.5 * resk
    resasc = WGK[7] * fabs(fc - reskh)
    for i in range(7):
        resasc += WGK[i] * (fabs(fv1[i] - reskh) + fabs(fv2[i] - reskh))
    value = resk * h
    resabs *= fabs(h)
    resasc *= fabs(h)
    err = fabs((resk - resg) * h)
    if resasc != 0.0 and err != 0.0:
        err = resasc * fmin(1.0, pow(200.0 * err / resasc, 1.5))
    if resabs > UFLOW / (50.0 * EPS):
        err = fmax(err, 50.0 * EPS * resabs)
    if not (isfinite(value) and isfinite(err)):
        return -1
    out_v[0] = value
    out_e[0] = err
    return 0


cdef int _adapt(integrand f, const double* pars, double lo, double hi,
                double rel_tol, double abs_tol, int max_sub,
                double* out_v, double* out_e, int* out_evals,
                bint* out_conv) noexcept nogil:
    """Heap-adaptive bisection; returns 0, -1 on non-finite integrand,
    -2 on allocation failure.  Mirrors quad.integrate_finite."""
    cdef Panel* heap = <Panel*>malloc((max_sub + 4) * sizeof(Panel))
    cdef Panel* done = <Panel*>malloc((max_sub + 4) * sizeof(Panel))
    cdef int heap_n = 0
    cdef int done_n = 0
    cdef int splits = 0
    cdef int evals
    cdef long long counter = 1
    cdef double total_v, total_e, v, e, v1, e1, v2, e2, mid, a, b
    cdef Panel p
    cdef int i, j, total_n
    cdef int rc = 0

    if heap == NULL or done == NULL:
        if heap != NULL:
            free(heap)
        if done != NULL:
            free(done)
        return -2

    rc = _gk15(f, pars, lo, hi, &v, &e)
    if rc != 0:
        free(heap)
        free(done)
        return rc
    evals = 15
    total_v = v
    total_e = e
    p.lo = lo
    p.hi = hi
    p.val = v
    p.err = e
    p.order = 0
    _heap_push(heap, &heap_n, p)

    while total_e > fmax(abs_tol, rel_tol * fabs(total_v)):
        if splits >= max_sub or heap_n == 0:
            break
        p = _heap_pop(heap, &heap_n)
        a = p.lo
        b = p.hi
        mid = 0.5 * (a + b)
        if not (a < mid and mid < b):
            done[done_n] = p
            done_n += 1
            continue
        rc = _gk15(f, pars, a, mid, &v1, &e1)
        if rc == 0:
            rc = _gk15(f, pars, mid, b, &v2, &e2)
        if rc != 0:
            free(heap)
            free(done)
            return rc
        evals += 30
        splits += 1
        total_v += v1 + v2 - p.val
        total_e += e1 + e2 - p.err
        p.hi = mid
        p.val = v1
        p.err = e1
        p.order = counter
        counter += 1
        _heap_push(heap, &heap_n, p)
        p.lo = mid
        p.hi = b
        p.val = v2
        p.err = e2
        p.order = counter
        counter += 1
        _heap_push(heap, &heap_n, p)

    # gather all panels and sum left to right, as the pure engine does
    total_n = heap_n + done_n
    for i in range(done_n):
        heap[heap_n + i] = done[i]
    # insertion sort by lo; panel counts are small
    for i in range(1, total_n):
        p = heap[i]
        j = i - 1
        while j >= 0 and heap[j].lo > p.lo:
            heap[j + 1] = heap[j]
            j -= 1
        heap[j + 1] = p
    total_v = 0.0
    total_e = 0.0
    for i in range(total_n):
        total_v += heap[i].val
        total_e += heap[i].err
    out_v[0] = total_v
    out_e[0] = total_e
    out_evals[0] = evals
    out_conv[0] = total_e <= fmax(abs_tol, rel_tol * fabs(total_v))
    free(heap)
    free(done)
    return 0


# ---------------------------------------------------------------------------
# integrands

cdef double _f1_theta(double theta, const double* p) noexcept nogil:
    # p: [2a-1, 2(c-a)-1, b1, b2, x, y]
    cdef double ct = cos(theta)
    cdef double st = sin(theta)
    cdef double ct2 = ct * ct
    cdef double out = 2.0 * pow(ct, p[0]) * pow(1.0 - p[4] * ct2, -p[2]) \
        * pow(1.0 - p[5] * ct2, -p[3])
    if p[1] != 0.0:
        out *= pow(st, p[1])
    return out


cdef double _r2_scaled_theta(double theta, const double* p) noexcept nogil:
    # p: [2a-1, m, 1/b, n+1/2, 1+b]
    cdef double ct = cos(theta)
    cdef double t = ct * ct
    cdef double log_out = p[0] * log(ct) - p[1] * log(p[2] + t) \
        - p[3] * log1p(p[4] * t)
    return 2.0 * exp(log_out)


cdef double _r2_mapped(double t, const double* p) noexcept nogil:
    # p: [b, m]; rational fold x = t/(1-t) of the [0, inf) integral
    cdef double w = 1.0 - t
    if w <= 0.0:
        # a panel edge can round onto t = 1; the folded integrand
        # vanishes there
        return 0.0
    cdef double x = 0.0 + t / w
    cdef double ib = _betainc(1.0 / (p[0] + 2.0 + x), 0.5, p[1])
    cdef double fx
    if ib == 0.0:
        return 0.0
    fx = ib * exp(-p[1] * log1p((1.0 + x) / p[0])) / (sqrt(x) * (1.0 + x))
    if fx == 0.0:
        return 0.0
    return fx / (w * w)


# ---------------------------------------------------------------------------
# Python-visible API (signatures match _purekernels)


def log_gamma(double x):
    return lgamma(x)


def gauss_q(double z):
    return 0.5 * erfc(z * SQRT1_2)


def log_beta(double a, double b):
    return _log_beta(a, b)


def beta(double a, double b):
    return exp(_log_beta(a, b))


def pochhammer(double x, long long n):
    return _pochhammer(x, n)


def reg_inc_beta(double x, double a, double b):
    return _betainc(x, a, b)


cdef _run(integrand f, double* pars, double lo, double hi,
          double rel_tol, double abs_tol, int max_subdivisions,
          double scale):
    cdef double v = 0.0
    cdef double e = 0.0
    cdef int evals = 0
    cdef bint conv = 0
    cdef int rc
    with nogil:
        rc = _adapt(f, pars, lo, hi, rel_tol, abs_tol, max_subdivisions,
                    &v, &e, &evals, &conv)
    if rc == -1:
        raise ValueError("integrand produced a non-finite value")
    if rc == -2:
        raise MemoryError("could not allocate quadrature panels")
    return v * scale, e * scale, evals, bool(conv)


def appell_f1(double a, double b1, double b2, double c, double x, double y,
              double rel_tol, double abs_tol, int max_subdivisions):
    cdef double[6] pars
    pars[0] = 2.0 * a - 1.0
    pars[1] = 2.0 * (c - a) - 1.0
    pars[2] = b1
    pars[3] = b2
    pars[4] = x
    pars[5] = y
    return _run(_f1_theta, pars, 0.0, HALF_PI, rel_tol, abs_tol,
                max_subdivisions, exp(-_log_beta(a, c - a)))


def r2_term_scaled(long long n, double m, double b,
                   double rel_tol, double abs_tol, int max_subdivisions):
    cdef double a = n + m + 1.0
    cdef double[5] pars
    pars[0] = 2.0 * a - 1.0
    pars[1] = m
    pars[2] = 1.0 / b
    pars[3] = n + 0.5
    pars[4] = 1.0 + b
    return _run(_r2_scaled_theta, pars, 0.0, HALF_PI, rel_tol, abs_tol,
                max_subdivisions, exp(-_log_beta(a, 0.5)))


def r2_integral(double b, double m,
                double rel_tol, double abs_tol, int max_subdivisions):
    cdef double[2] pars
    pars[0] = b
    pars[1] = m
    return _run(_r2_mapped, pars, 0.0, 1.0, rel_tol, abs_tol,
                max_subdivisions, INV_FOUR_PI)
