"""Hot numerical kernels.

Each kernel has a numba ``@njit`` implementation and a pure-numpy fallback
with identical semantics.  The numba path is used when numba imports and the
environment variable ``QMARKOV_DISABLE_NUMBA`` is not set to a truthy value.

Conventions: matrices are vectorized column-stacked, so ``vec(x)[j*n + i] =
x[i, j]``.  Superoperators act on such vectors.
"""

import os

import numpy as np


def _env_disables_numba():
    flag = os.environ.get("QMARKOV_DISABLE_NUMBA", "").strip().lower()
    return flag in ("1", "true", "yes", "on")


try:  # pragma: no cover - depends on environment
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _env_disables_numba()


def backend():
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------- numpy path


def apply_kraus_np(kraus, x):
    """sum_k l_k x l_k^*"""
    kx = np.matmul(kraus, x)
    return np.matmul(kx, np.conj(np.transpose(kraus, (0, 2, 1)))).sum(axis=0)


def word_products_np(kraus, m):
    """All products l_{i1} ... l_{im}, lexicographic with i1 most significant."""
    d, n, _ = kraus.shape
    words = np.broadcast_to(np.eye(n, dtype=np.complex128), (1, n, n)).copy()
    for _ in range(m):
        words = np.matmul(words[:, None, :, :], kraus[None, :, :, :]).reshape(-1, n, n)
    return words


def trace_norm_series_np(tstar, states, rho, horizon):
    """max_s || T_*^m psi_s - rho ||_1 for m = 1..horizon.

    ``states`` has shape (S, n, n).  Returns an array of length ``horizon``.
    """
    s_count, n, _ = states.shape
    vecs = np.transpose(states, (0, 2, 1)).reshape(s_count, n * n).T.copy()
    out = np.empty(horizon)
    for m in range(horizon):
        vecs = tstar @ vecs
        mats = vecs.T.reshape(s_count, n, n).transpose(0, 2, 1) - rho
        mats = 0.5 * (mats + np.conj(np.transpose(mats, (0, 2, 1))))
        ev = np.linalg.eigvalsh(mats)
        out[m] = np.abs(ev).sum(axis=1).max()
    return out


def two_point_series_np(tsup, rho, horizon):
    """K(m) = max_{a,b} |tr(rho t^m(e_a) t^m(e_b)) - tr(rho e_a) tr(rho e_b)|.

    ``e_a`` runs over the matrix units.  Returns K(1), ..., K(horizon).
    """
    n = rho.shape[0]
    nn = n * n
    # phi(e_a) for a = j*n + i, e_a = |i><j|: tr(rho e_a) = rho[j, i]
    f = rho.reshape(nn)
    base = np.outer(f, f)
    cur = np.eye(nn, dtype=np.complex128)
    out = np.empty(horizon)
    for m in range(horizon):
        cur = tsup @ cur
        mats = cur.T.reshape(nn, n, n).transpose(0, 2, 1)
        left = np.matmul(rho, mats)
        gram = np.einsum("aij,bji->ab", left, mats)
        out[m] = np.abs(gram - base).max()
    return out


def cluster_series_np(rmats, ymats, tsup, f, g, nmax):
    """sup over (ij, kl) of |tr(R_ij t^{n-1}(Y_kl)) - f_ij g_kl| for n = 1..nmax."""
    p, n, _ = ymats.shape
    base = np.outer(f, g)
    cur = np.transpose(ymats, (0, 2, 1)).reshape(p, n * n).T.copy()
    out = np.empty(nmax)
    for step in range(nmax):
        if step > 0:
            cur = tsup @ cur
        mats = cur.T.reshape(p, n, n).transpose(0, 2, 1)
        vals = np.einsum("aij,bji->ab", rmats, mats)
        out[step] = np.abs(vals - base).max()
    return out


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _matmul(a, b):
        n, k = a.shape
        m = b.shape[1]
        out = np.zeros((n, m), dtype=np.complex128)
        for i in range(n):
            for p in range(k):
                aip = a[i, p]
                if aip == 0:
                    continue
                for j in range(m):
                    out[i, j] += aip * b[p, j]
        return out

    @numba.njit(cache=True)
    def apply_kraus_nb(kraus, x):
        d, n, _ = kraus.shape
        out = np.zeros((n, n), dtype=np.complex128)
        for k in range(d):
            lx = _matmul(np.ascontiguousarray(kraus[k]), x)
            for i in range(n):
                for j in range(n):
                    acc = 0j
                    for p in range(n):
                        acc += lx[i, p] * np.conj(kraus[k, j, p])
                    out[i, j] += acc
        return out

    @numba.njit(cache=True)
    def word_products_nb(kraus, m):
        d, n, _ = kraus.shape
        count = 1
        for _ in range(m):
            count *= d
        words = np.zeros((count, n, n), dtype=np.complex128)
        for i in range(n):
            words[0, i, i] = 1.0
        size = 1
        for _ in range(m):
            new = np.zeros((count, n, n), dtype=np.complex128)
            for w in range(size):
                for k in range(d):
                    new[w * d + k] = _matmul(np.ascontiguousarray(words[w]), np.ascontiguousarray(kraus[k]))
            size *= d
            words = new
        return words[:size]

    @numba.njit(cache=True)
    def trace_norm_series_nb(tstar, states, rho, horizon):
        s_count, n, _ = states.shape
        nn = n * n
        vecs = np.zeros((nn, s_count), dtype=np.complex128)
        for s in range(s_count):
            for i in range(n):
                for j in range(n):
                    vecs[j * n + i, s] = states[s, i, j]
        out = np.empty(horizon)
        mat = np.zeros((n, n), dtype=np.complex128)
        for m in range(horizon):
            vecs = _matmul(tstar, vecs)
            best = 0.0
            for s in range(s_count):
                for i in range(n):
                    for j in range(n):
                        a = vecs[j * n + i, s] - rho[i, j]
                        b = vecs[i * n + j, s] - rho[j, i]
                        mat[i, j] = 0.5 * (a + np.conj(b))
                ev = np.linalg.eigvalsh(mat)
                tot = 0.0
                for v in ev:
                    tot += abs(v)
                if tot > best:
                    best = tot
            out[m] = best
        return out

    @numba.njit(cache=True)
    def two_point_series_nb(tsup, rho, horizon):
        n = rho.shape[0]
        nn = n * n
        f = np.empty(nn, dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                f[j * n + i] = rho[j, i]
        cur = np.eye(nn, dtype=np.complex128)
        out = np.empty(horizon)
        mats = np.zeros((nn, n, n), dtype=np.complex128)
        left = np.zeros((nn, n, n), dtype=np.complex128)
        for m in range(horizon):
            cur = _matmul(tsup, cur)
            for a in range(nn):
                for i in range(n):
                    for j in range(n):
                        mats[a, i, j] = cur[j * n + i, a]
                left[a] = _matmul(rho, np.ascontiguousarray(mats[a]))
            best = 0.0
            for a in range(nn):
                for b in range(nn):
                    acc = 0j
                    for i in range(n):
                        for j in range(n):
                            acc += left[a, i, j] * mats[b, j, i]
                    v = abs(acc - f[a] * f[b])
                    if v > best:
                        best = v
            out[m] = best
        return out

    @numba.njit(cache=True)
    def cluster_series_nb(rmats, ymats, tsup, f, g, nmax):
        p, n, _ = ymats.shape
        q = rmats.shape[0]
        nn = n * n
        cur = np.zeros((nn, p), dtype=np.complex128)
        for s in range(p):
            for i in range(n):
                for j in range(n):
                    cur[j * n + i, s] = ymats[s, i, j]
        out = np.empty(nmax)
        for step in range(nmax):
            if step > 0:
                cur = _matmul(tsup, cur)
            best = 0.0
            for a in range(q):
                for b in range(p):
                    acc = 0j
                    for i in range(n):
                        for j in range(n):
                            acc += rmats[a, i, j] * cur[i * n + j, b]
                    v = abs(acc - f[a] * g[b])
                    if v > best:
                        best = v
            out[step] = best
        return out


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def apply_kraus(kraus, x, use_numba=None):
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return apply_kraus_nb(_c(kraus), _c(x))
    return apply_kraus_np(np.asarray(kraus), np.asarray(x))


def word_products(kraus, m, use_numba=None):
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return word_products_nb(_c(kraus), int(m))
    return word_products_np(_c(kraus), int(m))


def trace_norm_series(tstar, states, rho, horizon, use_numba=None):
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return trace_norm_series_nb(_c(tstar), _c(states), _c(rho), int(horizon))
    return trace_norm_series_np(_c(tstar), _c(states), _c(rho), int(horizon))


def two_point_series(tsup, rho, horizon, use_numba=None):
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return two_point_series_nb(_c(tsup), _c(rho), int(horizon))
    return two_point_series_np(_c(tsup), _c(rho), int(horizon))


def cluster_series(rmats, ymats, tsup, f, g, nmax, use_numba=None):
    if use_numba is None:
        use_numba = USE_NUMBA
    args = (_c(rmats), _c(ymats), _c(tsup), _c(f), _c(g), int(nmax))
    if use_numba:
        return cluster_series_nb(*args)
    return cluster_series_np(*args)
