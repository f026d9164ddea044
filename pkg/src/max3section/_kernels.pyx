# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Same surface as ``_pykernels``: scalar normal CDF/quantile, the bivariate
lower-quantile probability, and the pairwise separation probability.  The
bivariate CDF is the Gauss-Legendre scheme of Genz's BVND (tail-stabilised
Drezner-Wesolowsky); the quantile is Wichura's PPND16 rational approximation.
"""

from libc.math cimport asin, erfc, exp, fabs, INFINITY, isnan, log, NAN, sin, sqrt

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double SQRT1_2 = 0.70710678118654752440084436210485

# Gauss-Legendre nodes/weights (n = 6, 12, 20), positive half
cdef double[3] W6 = [0.1713244923791705, 0.3607615730481384, 0.4679139345726904]
cdef double[3] X6 = [0.9324695142031522, 0.6612093864662647, 0.2386191860831970]
cdef double[6] W12 = [0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                      0.2031674267230659, 0.2334925365383547, 0.2491470458134029]
cdef double[6] X12 = [0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                      0.5873179542866171, 0.3678314989981802, 0.1252334085114692]
cdef double[10] W20 = [0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                       0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
                       0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
                       0.1527533871307259]
cdef double[10] X20 = [0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                       0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                       0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                       0.07652652113349733]


cdef inline double _phi(double x) noexcept:
    return 0.5 * erfc(-x * SQRT1_2)


cdef double _ppnd16(double p) noexcept:
    # Wichura AS241, double-precision branch; p in (0, 1)
    cdef double q = p - 0.5
    cdef double r, num, den, x
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r
                    + 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r
                  + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r
                + 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0)
        den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r
                    + 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r
                  + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r
                + 4.2313330701600911252e+1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r
                  + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r
                + 4.63033784615654529590e+0) * r + 1.42343711074968357734e+0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r
                + 2.05319162663775882187e+0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r
                + 5.46378491116411436990e+0) * r + 6.65790464350110377720e+0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


cdef double _bvnd(double dh, double dk, double r) noexcept:
    # Genz: P[X > dh, Y > dk] for standard bivariate normal, correlation r
    cdef double h = dh, k = dk
    cdef double hk = h * k
    cdef double bvn = 0.0
    cdef double hs, asr, sn, a, b, aas, bs, c, d, xs, rs, sp, ep
    cdef int i, lg
    cdef double* w
    cdef double* xg
    if fabs(r) < 0.3:
        lg = 3; w = W6; xg = X6
    elif fabs(r) < 0.75:
        lg = 6; w = W12; xg = X12
    else:
        lg = 10; w = W20; xg = X20

    if fabs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = asin(r)
        for i in range(lg):
            sn = sin(asr * (1.0 - xg[i]) / 2.0)
            bvn += w[i] * exp((sn * hk - hs) / (1.0 - sn * sn))
            sn = sin(asr * (1.0 + xg[i]) / 2.0)
            bvn += w[i] * exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / (2.0 * TWO_PI) + _phi(-h) * _phi(-k)
    else:
        if r < 0.0:
            k = -k
            hk = -hk
        if fabs(r) < 1.0:
            aas = (1.0 - r) * (1.0 + r)
            a = sqrt(aas)
            bs = (h - k) * (h - k)
            c = (4.0 - hk) / 8.0
            d = (12.0 - hk) / 16.0
            asr = -(bs / aas + hk) / 2.0
            if asr > -100.0:
                bvn = a * exp(asr) * (1.0 - c * (bs - aas) * (1.0 - d * bs / 5.0) / 3.0
                                      + c * d * aas * aas / 5.0)
            if -hk < 100.0:
                b = sqrt(bs)
                sp = sqrt(TWO_PI) * _phi(-b / a)
                bvn -= exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
            a /= 2.0
            for i in range(lg):
                xs = (a * (-xg[i] + 1.0)) * (a * (-xg[i] + 1.0))
                rs = sqrt(1.0 - xs)
                asr = -(bs / xs + hk) / 2.0
                if asr > -100.0:
                    sp = 1.0 + c * xs * (1.0 + d * xs)
                    ep = exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                    bvn += a * w[i] * exp(asr) * (ep - sp)
                xs = (a * (xg[i] + 1.0)) * (a * (xg[i] + 1.0))
                rs = sqrt(1.0 - xs)
                asr = -(bs / xs + hk) / 2.0
                if asr > -100.0:
                    sp = 1.0 + c * xs * (1.0 + d * xs)
                    ep = exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                    bvn += a * w[i] * exp(asr) * (ep - sp)
            bvn = -bvn / TWO_PI
        if r > 0.0:
            bvn += _phi(-(h if h > k else k))
        else:
            bvn = -bvn
            if k > h:
                bvn += _phi(k) - _phi(h)
    if bvn < 0.0:
        bvn = 0.0
    elif bvn > 1.0:
        bvn = 1.0
    return bvn


def norm_cdf(double x):
    if isnan(x):
        return NAN
    return _phi(x)


def norm_ppf(double q):
    if q <= 0.0:
        return -INFINITY
    if q >= 1.0:
        return INFINITY
    return _ppnd16(q)


cdef double _gamma(double t, double q1, double q2) noexcept:
    if q1 < 0.0: q1 = 0.0
    elif q1 > 1.0: q1 = 1.0
    if q2 < 0.0: q2 = 0.0
    elif q2 > 1.0: q2 = 1.0
    if t < -1.0: t = -1.0
    elif t > 1.0: t = 1.0
    if q1 == 0.0 or q2 == 0.0:
        return 0.0
    if q1 == 1.0:
        return q2
    if q2 == 1.0:
        return q1
    if t == 1.0:
        return q1 if q1 < q2 else q2
    if t == -1.0:
        return q1 + q2 - 1.0 if q1 + q2 > 1.0 else 0.0
    # P[X <= h, Y <= k] = P[X > -h, Y > -k]
    return _bvnd(-_ppnd16(q1), -_ppnd16(q2), t)


def gamma_cdf(double t, double q1, double q2):
    return _gamma(t, q1, q2)


cdef inline double _cond(double num, double prev) noexcept:
    cdef double d = 1.0 - prev
    cdef double c
    if d <= 0.0:
        return 0.0
    c = num / d
    if c < 0.0:
        return 0.0
    if c > 1.0:
        return 1.0
    return c


cdef double _perm_term(double* x, double* w, double* t, int i, int j) noexcept:
    cdef double xc = _cond(x[j], x[i])
    cdef double wc = _cond(w[j], w[i])
    return _gamma(t[i], x[i], w[i]) + _gamma(t[i], 1.0 - x[i], 1.0 - w[i]) * (
        _gamma(t[j], 1.0 - xc, 1.0 - wc) + _gamma(t[j], xc, wc))


cdef int[6][2] PERM_IJ = [[0, 1], [0, 2], [1, 0], [1, 2], [2, 0], [2, 1]]


def perm_term(double x1, double x2, double x3,
              double w1, double w2, double w3,
              double t1, double t2, double t3, int i, int j):
    cdef double[3] x = [x1, x2, x3]
    cdef double[3] w = [w1, w2, w3]
    cdef double[3] t = [t1, t2, t3]
    return _perm_term(x, w, t, i, j)


def cut_prob(double x1, double x2, double w1, double w2,
             double t1, double t2, double t3):
    cdef double[3] x = [x1, x2, 1.0 - x1 - x2]
    cdef double[3] w = [w1, w2, 1.0 - w1 - w2]
    cdef double[3] t = [t1, t2, t3]
    cdef double s = 0.0
    cdef int p
    for p in range(6):
        s += _perm_term(x, w, t, PERM_IJ[p][0], PERM_IJ[p][1])
    return 1.0 - s / 6.0


def cut_prob_fixed(double x1, double x2, double w1, double w2,
                   double t1, double t2, double t3):
    cdef double[3] x = [x1, x2, 1.0 - x1 - x2]
    cdef double[3] w = [w1, w2, 1.0 - w1 - w2]
    cdef double[3] t = [t1, t2, t3]
    return 1.0 - _perm_term(x, w, t, 0, 1)


def cut_prob_fill(double[:, ::1] args, double[::1] out):
    """Rows of args: x1 x2 w1 w2 t1 t2 t3; writes f per row into out."""
    cdef Py_ssize_t i, n = args.shape[0]
    cdef int p
    cdef double s
    cdef double[3] x, w, t
    if out.shape[0] != n or args.shape[1] != 7:
        raise ValueError("args must be (n, 7) and out length n")
    for i in range(n):
        x[0] = args[i, 0]; x[1] = args[i, 1]; x[2] = 1.0 - x[0] - x[1]
        w[0] = args[i, 2]; w[1] = args[i, 3]; w[2] = 1.0 - w[0] - w[1]
        t[0] = args[i, 4]; t[1] = args[i, 5]; t[2] = args[i, 6]
        s = 0.0
        for p in range(6):
            s += _perm_term(x, w, t, PERM_IJ[p][0], PERM_IJ[p][1])
        out[i] = 1.0 - s / 6.0
