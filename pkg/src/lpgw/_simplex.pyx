# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled network simplex for the dense transportation problem.

Same pivot sequence as ``_simplex_py.transport_simplex``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef int STATE_UPPER = -1
cdef int STATE_TREE = 0
cdef int STATE_LOWER = 1
cdef double EPSILON = 2.2204460492503131e-15


cdef inline double _fmax4(double a, double b, double c, double d) noexcept nogil:
    if b > a:
        a = b
    if c > a:
        a = c
    if d > a:
        a = d
    return a


def transport_simplex(a, b, cost, long max_iter=0):
    """Solve min <cost, G> s.t. G >= 0, G 1 = a, G^T 1 = b.

    Returns ``(plan, status, n_pivots)``; status 0 optimal, 1 pivot cap,
    2 infeasible.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cv = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = cv.shape[0]
    cdef Py_ssize_t m = cv.shape[1]
    cdef Py_ssize_t n_nodes = n + m
    cdef Py_ssize_t n_arcs = n * m
    cdef Py_ssize_t all_arcs = n_arcs + n_nodes

    plan = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] out = plan
    if n_arcs == 0:
        return plan, 0, 0

    cdef long *source = <long *> malloc(all_arcs * sizeof(long))
    cdef long *target = <long *> malloc(all_arcs * sizeof(long))
    cdef double *c = <double *> malloc(all_arcs * sizeof(double))
    cdef double *flow = <double *> malloc(all_arcs * sizeof(double))
    cdef int *state = <int *> malloc(all_arcs * sizeof(int))
    cdef double *supply = <double *> malloc((n_nodes + 1) * sizeof(double))
    cdef long *parent = <long *> malloc((n_nodes + 1) * sizeof(long))
    cdef long *pred = <long *> malloc((n_nodes + 1) * sizeof(long))
    cdef long *thread = <long *> malloc((n_nodes + 1) * sizeof(long))
    cdef long *rev_thread = <long *> malloc((n_nodes + 1) * sizeof(long))
    cdef long *succ_num = <long *> malloc((n_nodes + 1) * sizeof(long))
    cdef long *last_succ = <long *> malloc((n_nodes + 1) * sizeof(long))
    cdef char *forward = <char *> malloc((n_nodes + 1) * sizeof(char))
    cdef double *pi = <double *> malloc((n_nodes + 1) * sizeof(double))
    cdef long *dirty = <long *> malloc((n_nodes + 2) * sizeof(long))

    cdef Py_ssize_t i, j, e, cnt, k
    cdef long u, v, w, root, join, first, second, u_in, v_in, u_out, v_out
    cdef long old_rev_thread, old_succ_num, old_last_succ, right, last
    cdef long stem, par_stem, new_stem, tmp_sc, tmp_ls, up_limit_in, up_limit_out
    cdef long end, in_arc, block, next_arc, pivots = 0, n_dirty
    cdef int status = 0, result, found
    cdef double cmin, cmax, val, net = 0.0, art_cost, r, best, d, delta, sigma, scale

    try:
        cmin = cv[0, 0]
        for i in range(n):
            for j in range(m):
                if cv[i, j] < cmin:
                    cmin = cv[i, j]
        cmax = 0.0
        for i in range(n):
            for j in range(m):
                e = i * m + j
                source[e] = i
                target[e] = n + j
                c[e] = cv[i, j] - cmin
                if c[e] > cmax:
                    cmax = c[e]
                flow[e] = 0.0
                state[e] = STATE_LOWER

        for i in range(n):
            supply[i] = av[i]
            net += av[i]
        for j in range(m):
            supply[n + j] = -bv[j]
            net -= bv[j]
        art_cost = (cmax + 1.0) * n_nodes

        root = n_nodes
        parent[root] = -1
        pred[root] = -1
        thread[root] = 0
        rev_thread[0] = root
        succ_num[root] = n_nodes + 1
        last_succ[root] = root - 1
        supply[root] = -net
        pi[root] = 0.0
        forward[root] = 0

        e = n_arcs
        for u in range(n_nodes):
            parent[u] = root
            pred[u] = e
            thread[u] = u + 1
            rev_thread[u + 1] = u
            succ_num[u] = 1
            last_succ[u] = u
            state[e] = STATE_TREE
            if supply[u] >= 0:
                forward[u] = 1
                pi[u] = 0.0
                source[e] = u
                target[e] = root
                flow[e] = supply[u]
                c[e] = 0.0
            else:
                forward[u] = 0
                pi[u] = art_cost
                source[e] = root
                target[e] = u
                flow[e] = -supply[u]
                c[e] = art_cost
            e += 1

        block = <long> sqrt(<double> n_arcs)
        if block < 10:
            block = 10
        next_arc = 0

        with nogil:
            while True:
                in_arc = -1
                best = 0.0
                cnt = block
                found = 0
                e = next_arc
                for k in range(n_arcs):
                    r = state[e] * (c[e] + pi[source[e]] - pi[target[e]])
                    if r < best:
                        best = r
                        in_arc = e
                    cnt -= 1
                    e += 1
                    if e == n_arcs:
                        e = 0
                    if cnt == 0:
                        if in_arc >= 0 and best < -EPSILON * _fmax4(
                                fabs(pi[source[in_arc]]), fabs(pi[target[in_arc]]),
                                fabs(c[in_arc]), 1.0):
                            found = 1
                            break
                        cnt = block
                if not found:
                    if in_arc < 0 or best >= -EPSILON * _fmax4(
                            fabs(pi[source[in_arc]]), fabs(pi[target[in_arc]]),
                            fabs(c[in_arc]), 1.0):
                        break
                next_arc = e

                pivots += 1
                if max_iter > 0 and pivots >= max_iter:
                    status = 1
                    break

                u = source[in_arc]
                v = target[in_arc]
                while u != v:
                    if succ_num[u] < succ_num[v]:
                        u = parent[u]
                    else:
                        v = parent[v]
                join = u

                if state[in_arc] == STATE_LOWER:
                    first = source[in_arc]
                    second = target[in_arc]
                else:
                    first = target[in_arc]
                    second = source[in_arc]
                delta = INFINITY
                result = 0
                u_out = -1
                u = first
                while u != join:
                    d = flow[pred[u]] if forward[u] else INFINITY
                    if d < delta:
                        delta = d
                        u_out = u
                        result = 1
                    u = parent[u]
                u = second
                while u != join:
                    d = INFINITY if forward[u] else flow[pred[u]]
                    if d <= delta:
                        delta = d
                        u_out = u
                        result = 2
                    u = parent[u]
                if result == 1:
                    u_in = first
                    v_in = second
                else:
                    u_in = second
                    v_in = first

                if delta > 0:
                    val = state[in_arc] * delta
                    flow[in_arc] += val
                    u = source[in_arc]
                    while u != join:
                        if forward[u]:
                            flow[pred[u]] -= val
                        else:
                            flow[pred[u]] += val
                        u = parent[u]
                    u = target[in_arc]
                    while u != join:
                        if forward[u]:
                            flow[pred[u]] += val
                        else:
                            flow[pred[u]] -= val
                        u = parent[u]

                if result == 0:
                    state[in_arc] = -state[in_arc]
                    continue
                state[in_arc] = STATE_TREE
                if flow[pred[u_out]] == 0:
                    state[pred[u_out]] = STATE_LOWER
                else:
                    state[pred[u_out]] = STATE_UPPER

                old_rev_thread = rev_thread[u_out]
                old_succ_num = succ_num[u_out]
                old_last_succ = last_succ[u_out]
                v_out = parent[u_out]

                u = last_succ[u_in]
                right = thread[u]
                if old_rev_thread == v_in:
                    last = thread[last_succ[u_out]]
                else:
                    last = thread[v_in]

                stem = u_in
                thread[v_in] = stem
                dirty[0] = v_in
                n_dirty = 1
                par_stem = v_in
                while stem != u_out:
                    new_stem = parent[stem]
                    thread[u] = new_stem
                    dirty[n_dirty] = u
                    n_dirty += 1
                    w = rev_thread[stem]
                    thread[w] = right
                    rev_thread[right] = w
                    parent[stem] = par_stem
                    par_stem = stem
                    stem = new_stem
                    if last_succ[stem] == last_succ[par_stem]:
                        u = rev_thread[par_stem]
                    else:
                        u = last_succ[stem]
                    right = thread[u]

                parent[u_out] = par_stem
                thread[u] = last
                rev_thread[last] = u
                last_succ[u_out] = u

                if old_rev_thread != v_in:
                    thread[old_rev_thread] = right
                    rev_thread[right] = old_rev_thread

                for k in range(n_dirty):
                    u = dirty[k]
                    rev_thread[thread[u]] = u

                tmp_sc = 0
                tmp_ls = last_succ[u_out]
                u = u_out
                while u != u_in:
                    w = parent[u]
                    pred[u] = pred[w]
                    forward[u] = not forward[w]
                    tmp_sc += succ_num[u] - succ_num[w]
                    succ_num[u] = tmp_sc
                    last_succ[w] = tmp_ls
                    u = w

                pred[u_in] = in_arc
                forward[u_in] = u_in == source[in_arc]
                succ_num[u_in] = old_succ_num

                up_limit_in = -1
                up_limit_out = -1
                if last_succ[join] == v_in:
                    up_limit_out = join
                else:
                    up_limit_in = join

                u = v_in
                while u != up_limit_in and last_succ[u] == v_in:
                    last_succ[u] = last_succ[u_out]
                    u = parent[u]

                if join != old_rev_thread and v_in != old_rev_thread:
                    u = v_out
                    while u != up_limit_out and last_succ[u] == old_last_succ:
                        last_succ[u] = old_rev_thread
                        u = parent[u]
                else:
                    u = v_out
                    while u != up_limit_out and last_succ[u] == old_last_succ:
                        last_succ[u] = last_succ[u_out]
                        u = parent[u]

                u = v_in
                while u != join:
                    succ_num[u] += old_succ_num
                    u = parent[u]
                u = v_out
                while u != join:
                    succ_num[u] -= old_succ_num
                    u = parent[u]

                if forward[u_in]:
                    sigma = pi[v_in] - pi[u_in] - c[pred[u_in]]
                else:
                    sigma = pi[v_in] - pi[u_in] + c[pred[u_in]]
                end = thread[last_succ[u_in]]
                u = u_in
                while u != end:
                    pi[u] += sigma
                    u = thread[u]

        if status == 0:
            scale = max(float(av.sum()), float(bv.sum()), 1.0)
            for e in range(n_arcs, all_arcs):
                if fabs(flow[e]) > 1e-9 * scale:
                    status = 2
                    break

        for i in range(n):
            for j in range(m):
                val = flow[i * m + j]
                out[i, j] = val if val > 0.0 else 0.0
        return plan, status, pivots
    finally:
        free(source); free(target); free(c); free(flow); free(state)
        free(supply); free(parent); free(pred); free(thread); free(rev_thread)
        free(succ_num); free(last_succ); free(forward); free(pi); free(dirty)
