"""Pure-Python network simplex for the dense transportation problem.

Mirrors ``_simplex.pyx`` statement for statement so both kernels pivot
identically; this one runs when the compiled extension is unavailable.
The tree bookkeeping (thread / rev_thread / succ_num / last_succ) follows
the LEMON network simplex with an artificial root and block pricing.
"""

import math

import numpy as np

STATE_UPPER = -1
STATE_TREE = 0
STATE_LOWER = 1

EPSILON = 2.2204460492503131e-15

OPTIMAL = 0
MAX_ITER_REACHED = 1
INFEASIBLE = 2


def transport_simplex(a, b, cost, max_iter=0):
    """Solve min <cost, G> s.t. G >= 0, G 1 = a, G^T 1 = b.

    Returns ``(plan, status, n_pivots)``. ``max_iter <= 0`` means no cap.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    n, m = cost.shape
    n_nodes = n + m
    n_arcs = n * m
    all_arcs = n_arcs + n_nodes

    source = [0] * all_arcs
    target = [0] * all_arcs
    c = [0.0] * all_arcs
    flow = [0.0] * all_arcs
    state = [STATE_LOWER] * all_arcs
    flat = cost.ravel().tolist()
    cmin = min(flat) if flat else 0.0
    cmax = 0.0
    for i in range(n):
        for j in range(m):
            e = i * m + j
            source[e] = i
            target[e] = n + j
            v = flat[e] - cmin
            c[e] = v
            if v > cmax:
                cmax = v

    supply = a.tolist() + (-b).tolist() + [0.0]
    net = sum(supply[:n_nodes])
    art_cost = (cmax + 1.0) * n_nodes

    parent = [0] * (n_nodes + 1)
    pred = [0] * (n_nodes + 1)
    thread = [0] * (n_nodes + 1)
    rev_thread = [0] * (n_nodes + 1)
    succ_num = [0] * (n_nodes + 1)
    last_succ = [0] * (n_nodes + 1)
    forward = [False] * (n_nodes + 1)
    pi = [0.0] * (n_nodes + 1)

    root = n_nodes
    parent[root] = -1
    pred[root] = -1
    thread[root] = 0
    rev_thread[0] = root
    succ_num[root] = n_nodes + 1
    last_succ[root] = root - 1
    supply[root] = -net

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
            forward[u] = True
            pi[u] = 0.0
            source[e] = u
            target[e] = root
            flow[e] = supply[u]
            c[e] = 0.0
        else:
            forward[u] = False
            pi[u] = art_cost
            source[e] = root
            target[e] = u
            flow[e] = -supply[u]
            c[e] = art_cost
        e += 1

    block = max(int(math.sqrt(n_arcs)), 10)
    next_arc = 0
    pivots = 0
    status = OPTIMAL

    while True:
        # block search pricing
        in_arc = -1
        best = 0.0
        cnt = block
        found = False
        e = next_arc
        for _ in range(n_arcs):
            r = state[e] * (c[e] + pi[source[e]] - pi[target[e]])
            if r < best:
                best = r
                in_arc = e
            cnt -= 1
            e += 1
            if e == n_arcs:
                e = 0
            if cnt == 0:
                if in_arc >= 0 and best < -EPSILON * max(
                    abs(pi[source[in_arc]]), abs(pi[target[in_arc]]), abs(c[in_arc]), 1.0
                ):
                    found = True
                    break
                cnt = block
        if not found:
            if in_arc < 0 or best >= -EPSILON * max(
                abs(pi[source[in_arc]]), abs(pi[target[in_arc]]), abs(c[in_arc]), 1.0
            ):
                break
        next_arc = e

        pivots += 1
        if max_iter > 0 and pivots >= max_iter:
            status = MAX_ITER_REACHED
            break

        # join node
        u = source[in_arc]
        v = target[in_arc]
        while u != v:
            if succ_num[u] < succ_num[v]:
                u = parent[u]
            else:
                v = parent[v]
        join = u

        # leaving arc
        if state[in_arc] == STATE_LOWER:
            first = source[in_arc]
            second = target[in_arc]
        else:
            first = target[in_arc]
            second = source[in_arc]
        delta = math.inf
        result = 0
        u_out = -1
        u = first
        while u != join:
            d = flow[pred[u]] if forward[u] else math.inf
            if d < delta:
                delta = d
                u_out = u
                result = 1
            u = parent[u]
        u = second
        while u != join:
            d = math.inf if forward[u] else flow[pred[u]]
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

        # augment
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
        state[pred[u_out]] = STATE_LOWER if flow[pred[u_out]] == 0 else STATE_UPPER

        # tree update
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
        dirty = [v_in]
        par_stem = v_in
        while stem != u_out:
            new_stem = parent[stem]
            thread[u] = new_stem
            dirty.append(u)
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

        for u in dirty:
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

        # potentials of the moved subtree
        if forward[u_in]:
            sigma = pi[v_in] - pi[u_in] - c[pred[u_in]]
        else:
            sigma = pi[v_in] - pi[u_in] + c[pred[u_in]]
        end = thread[last_succ[u_in]]
        u = u_in
        while u != end:
            pi[u] += sigma
            u = thread[u]

    if status == OPTIMAL:
        scale = max(float(a.sum()), float(b.sum()), 1.0)
        for e in range(n_arcs, all_arcs):
            if abs(flow[e]) > 1e-9 * scale:
                status = INFEASIBLE
                break

    plan = np.array(flow[:n_arcs], dtype=np.float64).reshape(n, m)
    np.maximum(plan, 0.0, out=plan)
    return plan, status, pivots
