# cython: language_level=3
"""Compiled hot loops: free-tree scans, lemma sweeps with MPFR escalation,
and the family-search grid.  Mirrors ``_pykernels`` function by function."""

import math

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cnp.import_array()

NAME = "cython"


cdef extern from "mpfr.h":
    ctypedef struct __mpfr_struct:
        pass
    ctypedef __mpfr_struct* mpfr_ptr
    ctypedef long mpfr_prec_t
    ctypedef int mpfr_rnd_t
    mpfr_rnd_t MPFR_RNDN
    void mpfr_init2(mpfr_ptr x, mpfr_prec_t prec)
    void mpfr_clear(mpfr_ptr x)
    int mpfr_set(mpfr_ptr rop, mpfr_ptr op, mpfr_rnd_t rnd)
    int mpfr_set_si(mpfr_ptr rop, long op, mpfr_rnd_t rnd)
    int mpfr_div_si(mpfr_ptr rop, mpfr_ptr op1, long op2, mpfr_rnd_t rnd)
    int mpfr_add(mpfr_ptr rop, mpfr_ptr op1, mpfr_ptr op2, mpfr_rnd_t rnd)
    int mpfr_sub_si(mpfr_ptr rop, mpfr_ptr op1, long op2, mpfr_rnd_t rnd)
    int mpfr_mul(mpfr_ptr rop, mpfr_ptr op1, mpfr_ptr op2, mpfr_rnd_t rnd)
    int mpfr_mul_si(mpfr_ptr rop, mpfr_ptr op1, long op2, mpfr_rnd_t rnd)
    int mpfr_div(mpfr_ptr rop, mpfr_ptr op1, mpfr_ptr op2, mpfr_rnd_t rnd)
    int mpfr_ui_div(mpfr_ptr rop, unsigned long op1, mpfr_ptr op2, mpfr_rnd_t rnd)
    int mpfr_sqrt(mpfr_ptr rop, mpfr_ptr op, mpfr_rnd_t rnd)
    double mpfr_get_d(mpfr_ptr op, mpfr_rnd_t rnd)
    int mpfr_sgn(mpfr_ptr op)
    int mpfr_cmpabs(mpfr_ptr op1, mpfr_ptr op2)
    int mpfr_set_d(mpfr_ptr rop, double op, mpfr_rnd_t rnd)


# ---------------------------------------------------------------------------
# free trees (level sequences, see _pykernels for the algorithm notes)

cdef int _next_rooted(int* s, int n, int p) noexcept:
    cdef int q, i
    if p < 0:
        p = n - 1
        while s[p] == 1:
            p -= 1
    if p == 0:
        return 0
    q = p - 1
    while s[q] != s[p] - 1:
        q -= 1
    for i in range(p, n):
        s[i] = s[i - p + q]
    return 1


cdef int _split_m(int* s, int n) noexcept:
    cdef int i, seen = 0
    for i in range(n):
        if s[i] == 1:
            if seen:
                return i
            seen = 1
    return n


cdef void _next_free(int* s, int n) noexcept:
    cdef int m = _split_m(s, n)
    cdef int L = m - 1, R = n - m + 1
    cdef int lh = 0, rh = 0, i, j, a, b, old, h, valid
    cdef int left_greater = 0
    for i in range(1, m):
        if s[i] - 1 > lh:
            lh = s[i] - 1
    for i in range(m, n):
        if s[i] > rh:
            rh = s[i]
    valid = rh >= lh
    if valid and rh == lh:
        if L > R:
            valid = 0
        elif L == R:
            for j in range(L):
                a = s[1 + j] - 1
                b = 0 if j == 0 else s[m + j - 1]
                if a != b:
                    left_greater = a > b
                    break
            if left_greater:
                valid = 0
    if valid:
        return
    old = s[L]
    _next_rooted(s, n, L)
    if old > 2:
        m = _split_m(s, n)
        h = 0
        for i in range(1, m):
            if s[i] - 1 > h:
                h = s[i] - 1
        for j in range(h + 1):
            s[n - (h + 1) + j] = j + 1


cdef double _abc_seq(int* s, int n, int* par, int* deg, int* stack, double* tab, int w) noexcept:
    cdef int v, top = 0
    cdef double tot = 0.0
    for v in range(n):
        deg[v] = 0
    for v in range(n):
        top = s[v]
        stack[top] = v
        if top > 0:
            par[v] = stack[top - 1]
            deg[v] += 1
            deg[par[v]] += 1
        else:
            par[v] = -1
    for v in range(1, n):
        tot += tab[deg[v] * w + deg[par[v]]]
    return tot


cdef class _TreeScan:
    cdef int n
    cdef int* s
    cdef int* par
    cdef int* deg
    cdef int* stack
    cdef double* tab
    cdef int w
    cdef int started
    cdef int done

    def __cinit__(self, int n):
        cdef int i, x, y
        self.n = n
        self.s = <int*> malloc(n * sizeof(int))
        self.par = <int*> malloc(n * sizeof(int))
        self.deg = <int*> malloc(n * sizeof(int))
        self.stack = <int*> malloc((n + 1) * sizeof(int))
        self.w = n + 1
        self.tab = <double*> malloc(self.w * self.w * sizeof(double))
        for x in range(self.w):
            for y in range(self.w):
                self.tab[x * self.w + y] = sqrt((x + y - 2.0) / (x * y)) if x > 0 and y > 0 else 0.0
        for i in range(n // 2 + 1):
            self.s[i] = i
        for i in range(1, (n + 1) // 2):
            self.s[n // 2 + i] = i
        self.started = 0
        self.done = 0

    def __dealloc__(self):
        free(self.s); free(self.par); free(self.deg); free(self.stack); free(self.tab)

    cdef int advance(self) noexcept:
        """Move to the next free tree; 0 when exhausted."""
        if self.done:
            return 0
        if self.n <= 2:
            if self.started:
                self.done = 1
                return 0
            self.started = 1
            return 1
        if self.started:
            if not _next_rooted(self.s, self.n, -1):
                self.done = 1
                return 0
        self.started = 1
        _next_free(self.s, self.n)
        return 1

    cdef list seq(self):
        return [self.s[i] for i in range(self.n)]


def level_sequences(int n):
    cdef _TreeScan sc = _TreeScan(n)
    while sc.advance():
        yield sc.seq()


def count_trees(int n):
    cdef _TreeScan sc = _TreeScan(n)
    cdef long c = 0
    while sc.advance():
        c += 1
    return c


def brute_min(int n, double tol, int part=0, int nparts=1):
    cdef _TreeScan sc = _TreeScan(n)
    cdef double best = INFINITY, val
    cdef long idx = -1, count = 0
    wit = []
    while sc.advance():
        idx += 1
        if idx % nparts != part:
            continue
        count += 1
        val = _abc_seq(sc.s, n, sc.par, sc.deg, sc.stack, sc.tab, sc.w)
        if val < best:
            best = val
            wit = [(v, s) for v, s in wit if v <= best + tol]
            wit.append((val, sc.seq()))
        elif val <= best + tol:
            wit.append((val, sc.seq()))
    return best, [s for _, s in wit], count


def degree_class_min(int n):
    cdef _TreeScan sc = _TreeScan(n)
    cdef double val
    out = {}
    while sc.advance():
        val = _abc_seq(sc.s, n, sc.par, sc.deg, sc.stack, sc.tab, sc.w)
        key = tuple(sorted([sc.deg[i] for i in range(n)], reverse=True))
        cur = out.get(key)
        if cur is None or val < cur[0]:
            out[key] = (val, sc.seq())
    return out


# ---------------------------------------------------------------------------
# lemma sweeps

cdef class _Sweep:
    cdef int P, T, M, inner, n_outer, keep, prec
    cdef long long* xc
    cdef long long* xk
    cdef long long* xd
    cdef long long* xi
    cdef long long* yc
    cdef long long* yk
    cdef long long* yd
    cdef long long* mt
    cdef long long* mc
    cdef long long* me
    cdef int nlo, nhi
    cdef long long* lol
    cdef long long* loc
    cdef long long* lok
    cdef long long* lod
    cdef long long* hil
    cdef long long* hic
    cdef long long* hik
    cdef long long* hid
    cdef long long* step
    cdef long long* p
    # per-row affine data of inner terms
    cdef double* x0
    cdef double* x1
    cdef double* y0
    cdef double* y1
    cdef double* c0
    cdef double* c1
    cdef double* c2
    # results
    cdef public long long count, escalated, negative, inconclusive, invalid
    cdef public double min_value
    cdef long long* argmin
    cdef long long* first_neg
    cdef int has_neg, has_min
    cdef double esc, zero_tol
    # heap of the smallest |value| points
    cdef double* h_abs
    cdef double* h_val
    cdef long long* h_ord
    cdef long long* h_pt
    cdef int h_n
    cdef long long h_counter
    # mpfr scratch
    cdef __mpfr_struct* mp
    cdef int mp_ready
    cdef int row_hp_ready

    def __cinit__(self):
        self.mp_ready = 0
        self.h_n = 0

    cdef long long* _copy(self, a) except NULL:
        cdef cnp.ndarray[cnp.int64_t, ndim=1] flat = np.ascontiguousarray(np.asarray(a, dtype=np.int64).ravel())
        cdef long long* out = <long long*> malloc(max(1, flat.shape[0]) * sizeof(long long))
        cdef Py_ssize_t i
        for i in range(flat.shape[0]):
            out[i] = flat[i]
        return out

    def setup(self, cp, int keep, double esc, int prec, double zero_tol):
        cdef int i
        self.P = len(cp.names)
        self.T = len(cp.x_const)
        self.M = len(cp.mono_term)
        self.inner = self.P - 1
        self.n_outer = cp.n_outer
        self.xc = self._copy(cp.x_const); self.xk = self._copy(cp.x_coef)
        self.xd = self._copy(cp.x_den); self.xi = self._copy(cp.x_inf)
        self.yc = self._copy(cp.y_const); self.yk = self._copy(cp.y_coef); self.yd = self._copy(cp.y_den)
        self.mt = self._copy(cp.mono_term); self.mc = self._copy(cp.mono_c); self.me = self._copy(cp.mono_exp)
        self.nlo = len(cp.lo_level); self.nhi = len(cp.hi_level)
        self.lol = self._copy(cp.lo_level); self.loc = self._copy(cp.lo_const)
        self.lok = self._copy(cp.lo_coef); self.lod = self._copy(cp.lo_den)
        self.hil = self._copy(cp.hi_level); self.hic = self._copy(cp.hi_const)
        self.hik = self._copy(cp.hi_coef); self.hid = self._copy(cp.hi_den)
        self.step = self._copy(cp.step)
        self.p = <long long*> malloc(self.P * sizeof(long long))
        self.argmin = <long long*> malloc(self.P * sizeof(long long))
        self.first_neg = <long long*> malloc(self.P * sizeof(long long))
        for i in range(self.P):
            self.p[i] = 0
        self.x0 = <double*> malloc(self.T * sizeof(double)); self.x1 = <double*> malloc(self.T * sizeof(double))
        self.y0 = <double*> malloc(self.T * sizeof(double)); self.y1 = <double*> malloc(self.T * sizeof(double))
        self.c0 = <double*> malloc(self.T * sizeof(double)); self.c1 = <double*> malloc(self.T * sizeof(double))
        self.c2 = <double*> malloc(self.T * sizeof(double))
        for i in range(self.M):
            if self.me[i * self.P + self.inner] > 2:
                raise ValueError("coefficients may be at most quadratic in the innermost parameter")
        self.keep = keep
        self.h_abs = <double*> malloc(max(1, keep) * sizeof(double))
        self.h_val = <double*> malloc(max(1, keep) * sizeof(double))
        self.h_ord = <long long*> malloc(max(1, keep) * sizeof(long long))
        self.h_pt = <long long*> malloc(max(1, keep) * self.P * sizeof(long long))
        self.h_counter = 0
        self.esc = esc
        self.zero_tol = zero_tol
        self.prec = prec
        self.count = 0; self.escalated = 0; self.negative = 0; self.inconclusive = 0; self.invalid = 0
        self.min_value = INFINITY
        self.has_neg = 0; self.has_min = 0
        # scratch: 0..5 temporaries, 6 = row base, 7.. unused
        self.mp = <__mpfr_struct*> malloc(8 * sizeof(__mpfr_struct))
        for i in range(8):
            mpfr_init2(&self.mp[i], prec)
        self.mp_ready = 1

    def __dealloc__(self):
        cdef int i
        if self.mp_ready:
            for i in range(8):
                mpfr_clear(&self.mp[i])
            free(self.mp)
            free(self.xc); free(self.xk); free(self.xd); free(self.xi)
            free(self.yc); free(self.yk); free(self.yd)
            free(self.mt); free(self.mc); free(self.me)
            free(self.lol); free(self.loc); free(self.lok); free(self.lod)
            free(self.hil); free(self.hic); free(self.hik); free(self.hid)
            free(self.step); free(self.p); free(self.argmin); free(self.first_neg)
            free(self.x0); free(self.x1); free(self.y0); free(self.y1)
            free(self.c0); free(self.c1); free(self.c2)
            free(self.h_abs); free(self.h_val); free(self.h_ord); free(self.h_pt)

    cdef long long _floordiv(self, long long a, long long b) noexcept:
        cdef long long q = a // b
        if (a % b != 0) and ((a < 0) != (b < 0)):
            q -= 1
        return q

    cdef long long _lo(self, int level) noexcept:
        cdef long long best = -(1LL << 62), num, v
        cdef int r, j
        for r in range(self.nlo):
            if self.lol[r] != level:
                continue
            num = self.loc[r]
            for j in range(self.P):
                num += self.lok[r * self.P + j] * self.p[j]
            v = -self._floordiv(-num, self.lod[r])
            if v > best:
                best = v
        return best

    cdef long long _hi(self, int level) noexcept:
        cdef long long best = (1LL << 62), num, v
        cdef int r, j
        for r in range(self.nhi):
            if self.hil[r] != level:
                continue
            num = self.hic[r]
            for j in range(self.P):
                num += self.hik[r * self.P + j] * self.p[j]
            v = self._floordiv(num, self.hid[r])
            if v < best:
                best = v
        return best

    cdef long long _coef_int(self, int t) noexcept:
        cdef long long tot = 0, v
        cdef int m, j, e
        for m in range(self.M):
            if self.mt[m] != t:
                continue
            v = self.mc[m]
            for j in range(self.P):
                e = <int> self.me[m * self.P + j]
                while e > 0:
                    v *= self.p[j]
                    e -= 1
            tot += v
        return tot

    cdef void _prepare_row(self) noexcept:
        """Affine-in-q data for inner terms at the current outer point (p[inner] = 0)."""
        cdef int t, m, j, e, ei
        cdef long long base, v
        cdef double dd
        for t in range(self.n_outer, self.T):
            base = self.xc[t]
            for j in range(self.inner):
                base += self.xk[t * self.P + j] * self.p[j]
            self.x0[t] = <double> base / self.xd[t]
            self.x1[t] = <double> self.xk[t * self.P + self.inner] / self.xd[t]
            base = self.yc[t]
            for j in range(self.inner):
                base += self.yk[t * self.P + j] * self.p[j]
            self.y0[t] = <double> base / self.yd[t]
            self.y1[t] = <double> self.yk[t * self.P + self.inner] / self.yd[t]
            self.c0[t] = 0.0; self.c1[t] = 0.0; self.c2[t] = 0.0
        for m in range(self.M):
            t = <int> self.mt[m]
            if t < self.n_outer:
                continue
            v = self.mc[m]
            for j in range(self.inner):
                e = <int> self.me[m * self.P + j]
                while e > 0:
                    v *= self.p[j]
                    e -= 1
            ei = <int> self.me[m * self.P + self.inner]
            dd = <double> v
            if ei == 0:
                self.c0[t] += dd
            elif ei == 1:
                self.c1[t] += dd
            else:
                self.c2[t] += dd

    cdef double _outer_double(self) noexcept:
        cdef int t
        cdef long long c, num
        cdef double x, y, tot = 0.0
        cdef int j
        for t in range(self.n_outer):
            c = self._coef_int(t)
            if c == 0:
                continue
            num = self.yc[t]
            for j in range(self.P):
                num += self.yk[t * self.P + j] * self.p[j]
            y = <double> num / self.yd[t]
            if self.xi[t]:
                tot += c * sqrt(1.0 / y)
            else:
                num = self.xc[t]
                for j in range(self.P):
                    num += self.xk[t * self.P + j] * self.p[j]
                x = <double> num / self.xd[t]
                tot += c * sqrt((x + y - 2.0) / (x * y))
        return tot

    cdef void _mp_term(self, int t, __mpfr_struct* acc) noexcept:
        """acc += coef_t * f_t at the current point p, in multiple precision."""
        cdef long long c = self._coef_int(t), num
        cdef int j
        cdef __mpfr_struct* x = &self.mp[0]
        cdef __mpfr_struct* y = &self.mp[1]
        cdef __mpfr_struct* a = &self.mp[2]
        cdef __mpfr_struct* b = &self.mp[3]
        if c == 0:
            return
        num = self.yc[t]
        for j in range(self.P):
            num += self.yk[t * self.P + j] * self.p[j]
        mpfr_set_si(y, num, MPFR_RNDN)
        mpfr_div_si(y, y, self.yd[t], MPFR_RNDN)
        if self.xi[t]:
            mpfr_ui_div(a, 1, y, MPFR_RNDN)
            mpfr_sqrt(a, a, MPFR_RNDN)
        else:
            num = self.xc[t]
            for j in range(self.P):
                num += self.xk[t * self.P + j] * self.p[j]
            mpfr_set_si(x, num, MPFR_RNDN)
            mpfr_div_si(x, x, self.xd[t], MPFR_RNDN)
            mpfr_add(a, x, y, MPFR_RNDN)
            mpfr_sub_si(a, a, 2, MPFR_RNDN)
            mpfr_mul(b, x, y, MPFR_RNDN)
            mpfr_div(a, a, b, MPFR_RNDN)
            mpfr_sqrt(a, a, MPFR_RNDN)
        mpfr_mul_si(a, a, c, MPFR_RNDN)
        mpfr_add(acc, acc, a, MPFR_RNDN)

    cdef double _escalate(self, int* inconclusive, int* sign) noexcept:
        cdef int t
        cdef __mpfr_struct* base = &self.mp[6]
        cdef __mpfr_struct* acc = &self.mp[4]
        cdef __mpfr_struct* tol = &self.mp[5]
        if not self.row_hp_ready:
            mpfr_set_si(base, 0, MPFR_RNDN)
            for t in range(self.n_outer):
                self._mp_term(t, base)
            self.row_hp_ready = 1
        mpfr_set(acc, base, MPFR_RNDN)
        for t in range(self.n_outer, self.T):
            self._mp_term(t, acc)
        mpfr_set_d(tol, self.zero_tol, MPFR_RNDN)
        inconclusive[0] = mpfr_cmpabs(acc, tol) <= 0
        sign[0] = mpfr_sgn(acc)
        return mpfr_get_d(acc, MPFR_RNDN)

    cdef void _heap_push(self, double a, double v) noexcept:
        cdef int i, c, l, r, j
        cdef int P = self.P
        if self.keep <= 0:
            return
        if self.h_n < self.keep:
            i = self.h_n
            self.h_n += 1
        else:
            if not (a < self.h_abs[0]):
                return
            # replace root and sift down
            i = 0
            while True:
                l = 2 * i + 1
                r = l + 1
                c = -1
                if l < self.h_n and self._heap_gt(l, a, self.h_counter):
                    c = l
                if r < self.h_n and self._heap_gt(r, a, self.h_counter) and (c < 0 or self._heap_gt_idx(r, l)):
                    c = r
                if c < 0:
                    break
                self._heap_move(c, i)
                i = c
            self._heap_set(i, a, v)
            return
        # sift up
        while i > 0:
            c = (i - 1) // 2
            if self._heap_gt(c, a, self.h_counter):
                break
            self._heap_move(c, i)
            i = c
        self._heap_set(i, a, v)

    cdef int _heap_gt(self, int i, double a, long long order) noexcept:
        # is heap entry i "larger" than (a, order)?
        if self.h_abs[i] != a:
            return self.h_abs[i] > a
        return self.h_ord[i] < order

    cdef int _heap_gt_idx(self, int i, int j) noexcept:
        if self.h_abs[i] != self.h_abs[j]:
            return self.h_abs[i] > self.h_abs[j]
        return self.h_ord[i] < self.h_ord[j]

    cdef void _heap_move(self, int src, int dst) noexcept:
        self.h_abs[dst] = self.h_abs[src]
        self.h_val[dst] = self.h_val[src]
        self.h_ord[dst] = self.h_ord[src]
        memcpy(&self.h_pt[dst * self.P], &self.h_pt[src * self.P], self.P * sizeof(long long))

    cdef void _heap_set(self, int i, double a, double v) noexcept:
        self.h_abs[i] = a
        self.h_val[i] = v
        self.h_ord[i] = self.h_counter
        memcpy(&self.h_pt[i * self.P], self.p, self.P * sizeof(long long))
        self.h_counter += 1

    cdef void _row(self) noexcept:
        cdef long long lo = self._lo(self.inner), hi = self._hi(self.inner), q
        cdef long long st = self.step[self.inner]
        cdef double base, v, x, y, qd, a
        cdef int t, inc, sg, j
        if hi < lo:
            return
        self.p[self.inner] = 0
        base = self._outer_double()
        self._prepare_row()
        self.row_hp_ready = 0
        q = lo
        while q <= hi:
            qd = <double> q
            v = base
            for t in range(self.n_outer, self.T):
                y = self.y0[t] + self.y1[t] * qd
                if self.xi[t]:
                    v += (self.c0[t] + qd * (self.c1[t] + qd * self.c2[t])) * sqrt(1.0 / y)
                else:
                    x = self.x0[t] + self.x1[t] * qd
                    v += (self.c0[t] + qd * (self.c1[t] + qd * self.c2[t])) * sqrt((x + y - 2.0) / (x * y))
            self.count += 1
            self.p[self.inner] = q
            if not isfinite(v):
                self.invalid += 1
                q += st
                continue
            if fabs(v) < self.esc:
                self.escalated += 1
                v = self._escalate(&inc, &sg)
                if inc:
                    self.inconclusive += 1
                elif sg < 0:
                    self._neg()
            elif v <= 0:
                self._neg()
            if v < self.min_value:
                self.min_value = v
                memcpy(self.argmin, self.p, self.P * sizeof(long long))
                self.has_min = 1
            a = fabs(v)
            if self.keep > 0 and (self.h_n < self.keep or a < self.h_abs[0]):
                self._heap_push(a, v)
            q += st
        self.p[self.inner] = 0

    cdef void _neg(self) noexcept:
        self.negative += 1
        if not self.has_neg:
            memcpy(self.first_neg, self.p, self.P * sizeof(long long))
            self.has_neg = 1

    cdef void _rec(self, int level, int part, int nparts) noexcept:
        cdef long long lo, hi, v, st
        cdef long long i = 0
        if level == self.inner:
            self._row()
            return
        lo = self._lo(level)
        hi = self._hi(level)
        st = self.step[level]
        v = lo
        while v <= hi:
            if level == 0 and nparts > 1 and i % nparts != part:
                v += st
                i += 1
                continue
            self.p[level] = v
            self._rec(level + 1, part, nparts)
            v += st
            i += 1
        self.p[level] = 0

    def run(self, int part, int nparts):
        if self.P == 1:
            if part == 0:
                self._row()
        else:
            self._rec(0, part, nparts)

    def result(self):
        cdef int i, j
        out = {
            "count": self.count, "escalated": self.escalated, "negative": self.negative,
            "inconclusive": self.inconclusive, "invalid": self.invalid,
            "min_value": self.min_value,
            "argmin": tuple(self.argmin[j] for j in range(self.P)) if self.has_min else None,
            "first_negative": tuple(self.first_neg[j] for j in range(self.P)) if self.has_neg else None,
        }
        items = []
        for i in range(self.h_n):
            items.append((self.h_abs[i], self.h_val[i], tuple(self.h_pt[i * self.P + j] for j in range(self.P))))
        out["smallest"] = sorted(items, key=lambda z: (z[0], z[2]))
        return out


def sweep(cp, int part, int nparts, double esc, int prec_bits, int keep, double zero_tol):
    cdef _Sweep s = _Sweep()
    s.setup(cp, keep, esc, prec_bits, zero_tol)
    s.run(part, nparts)
    return s.result()


def eval_point_mp(cp, p, int dps):
    from ._pykernels import eval_point_mp as _f
    return _f(cp, p, dps)


# family-search grid -----------------------------------------------------------

cdef double _R2 = sqrt(2.0) / 2.0


cdef inline double _f(double x, double y) noexcept:
    return sqrt((x + y - 2.0) / (x * y))


cdef long _ccap(int k, long D, int constrained) noexcept:
    """Largest allowed number of C_k copies next to a root of degree D."""
    if not constrained:
        return 1 << 40
    if k >= 143:
        return 0
    if k >= 53:
        return 364
    if k <= 48 or (k == 49 and D >= 474) or (k == 50 and D >= 874) or (k == 51 and D >= 3273):
        return 7 * k + 7
    return 1 << 40


def family_grid(long base, int e, double eint, ecnt, int free_c, int nF, double fint, fcnt,
                int dlo, int dhi, int kmax, int constrained, long smax):
    """Best (cost, r, K, kf, s) for one placement of the extras.

    ``base`` = r + 7K + 7s (+ 7kf); regular C-branches are balanced, the free
    one has kf = k + delta B3 sons plus nF extras.  ``ecnt``/``fcnt`` count
    extras of attached degree 2..6 at the root / in the free C-branch.
    """
    cdef double ec[5]
    cdef double fc[5]
    cdef int i
    for i in range(5):
        ec[i] = ecnt[i]
        fc[i] = fcnt[i]
    cdef double best = INFINITY
    cdef long br = -1, bK = -1, bkf = -1, bs = -1
    cdef long r, k, kf, a, a_lo, a_hi, s, s0, D, df, rem, K, cap0, cap1, kk_hi
    cdef double cost, c6 = 6.0 * _R2, fpart, g
    cdef int d, dd, dlo2, dhi2
    # r = 0: no regular C-branches
    if base >= 0 and base % 7 == 0:
        if free_c:
            for kf in range(0, kmax + 1):
                if kf + nF == 0:
                    continue
                rem = base - 7 * kf
                if rem < 0:
                    break
                s = rem // 7
                D = s + e + 1
                if smax >= 0 and s > smax and D >= 2888:
                    continue
                df = kf + nF + 1
                cost = s * (_f(D, 4) + c6) + eint + _f(D, df) + kf * (_f(df, 4) + c6) + fint
                for d in range(5):
                    cost += ec[d] * _f(D, d + 2) + fc[d] * _f(df, d + 2)
                if cost < best:
                    best, br, bK, bkf, bs = cost, 0, 0, kf, s
        else:
            s = base // 7
            D = s + e
            if D >= 1 and not (smax >= 0 and s > smax and D >= 2888):
                cost = s * (_f(D, 4) + c6) + eint
                for d in range(5):
                    cost += ec[d] * _f(D, d + 2)
                if cost < best:
                    best, br, bK, bkf, bs = cost, 0, 0, -1, s
    r = base % 7
    if r == 0:
        r = 7
    dlo2 = dlo if free_c else 0
    dhi2 = dhi if free_c else 0
    while 8 * r <= base:
        for k in range(1, kmax + 1):
            if constrained and r > _ccap(k, 0, 1) + _ccap(k + 1, 0, 1):
                continue
            if r * (7 * k + 1) > base:
                break
            for dd in range(dlo2, dhi2 + 1):
                kf = k + dd if free_c else 0
                if free_c and (kf < 0 or kf > kmax or kf + nF == 0):
                    continue
                rem = base - r - 7 * k * r - 7 * kf
                if rem < 0:
                    continue
                s0 = rem // 7
                a_lo = 0
                a_hi = r - 1
                if s0 < a_hi:
                    a_hi = s0
                if smax >= 0 and s0 - 2887 > a_lo:
                    # s > smax is only allowed while D < 2888
                    a_lo = s0 - 2887
                if free_c:
                    df = kf + nF + 1
                    fpart = kf * (_f(df, 4) + c6) + fint
                    for d in range(5):
                        fpart += fc[d] * _f(df, d + 2)
                else:
                    df = 0
                    fpart = 0.0
                g = k * (_f(k + 1, 4) + c6)
                for a in range(a_lo, a_hi + 1):
                    s = s0 - a
                    D = s + r + e + free_c
                    if smax >= 0 and s > smax and D >= 2888:
                        continue
                    if constrained:
                        if r - a > _ccap(k, D, 1) or a > _ccap(k + 1, D, 1):
                            continue
                    cost = s * (_f(D, 4) + c6) + eint
                    cost += (r - a) * (_f(D, k + 1) + g)
                    if a:
                        cost += a * (_f(D, k + 2) + (k + 1) * (_f(k + 2, 4) + c6))
                    for d in range(5):
                        if ec[d] != 0.0:
                            cost += ec[d] * _f(D, d + 2)
                    if free_c:
                        cost += _f(D, df) + fpart
                    if cost < best:
                        best, br, bK, bkf, bs = cost, r, k * r + a, kf, s
        r += 7
    return best, br, bK, bkf, bs
