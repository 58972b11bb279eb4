# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Mirrors ``_kernel_py.run_loop`` (and the protocol arithmetic in
``protocols``) operation for operation. The build disables floating
point contraction, so results are bit identical to the pure Python
kernel; any semantic change must be made in both places.
"""

from libc.math cimport fabs, sqrt

ctypedef unsigned long long u64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 MIX2 = 0x94D049BB133111EBULL

BACKEND_NAME = "compiled"

cdef inline u64 mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


def run_loop(
    double[::1] e,
    double[::1] w,
    double[::1] wn,
    double beta,
    int protocol_id,
    double d_eps,
    double threshold,
    long long budget,
    long long max_draws,
    unsigned long long seed,
    double[::1] reg_nrg,
    double[::1] reg_wt,
    long long[::1] out_draws,
    double[::1] out_total,
    double[::1] out_tvd,
    double[::1] out_loss,
):
    """See ``_kernel_py.run_loop``; same contract, same bits."""
    cdef Py_ssize_t m = e.shape[0]
    cdef u64 npairs = <u64> (m * (m - 1) // 2)
    cdef u64 state = seed
    cdef u64 reject_below = (<u64> 0 - npairs) % npairs
    cdef u64 x, t, jj
    cdef Py_ssize_t i, j, k
    cdef long long useful = 0
    cdef long long draws = 0
    cdef double cum_loss = 0.0
    cdef double eps_u, eps_v, w_u, w_v, delta, phi, amount
    cdef double new_u, new_v, transferred, total, s
    cdef double nrg_u_new, nrg_v_new, wt_u_new, wt_v_new
    cdef bint fired, above_u, above_v, is_useful

    while useful < budget and draws < max_draws:
        draws += 1
        while True:
            state = state + GOLDEN
            x = mix64(state)
            if x >= reject_below:
                t = x % npairs
                break
        jj = <u64> ((1.0 + sqrt(8.0 * <double> t + 1.0)) * 0.5)
        while jj * (jj - 1) // 2 > t:
            jj -= 1
        while (jj + 1) * jj // 2 <= t:
            jj += 1
        i = <Py_ssize_t> (t - jj * (jj - 1) // 2)
        j = <Py_ssize_t> jj

        eps_u = e[i]
        eps_v = e[j]
        w_u = w[i]
        w_v = w[j]
        is_useful = False
        transferred = 0.0
        new_u = eps_u
        new_v = eps_v

        if protocol_id == 0:  # OWS
            delta = fabs(w_v * eps_u - w_u * eps_v) / (w_u + w_v)
            if threshold > 0.0 and not (fabs(eps_u / w_u - eps_v / w_v) > threshold):
                pass
            elif not (delta > 0.0):
                pass
            else:
                if eps_u / w_u > eps_v / w_v:
                    new_u = eps_u - delta
                    new_v = eps_v + (1.0 - beta) * delta
                else:
                    new_u = eps_u + (1.0 - beta) * delta
                    new_v = eps_v - delta
                transferred = delta
                is_useful = True
        elif protocol_id == 1:  # SWT
            phi = fabs(eps_u / w_u - eps_v / w_v)
            amount = phi * d_eps
            fired = False
            if (eps_u - amount) / w_u >= (eps_v + amount) / w_v:
                new_u = eps_u - amount
                new_v = eps_v + (1.0 - beta) * amount
                fired = True
            elif (eps_u + amount) / w_u < (eps_v - amount) / w_v:
                new_u = eps_u + (1.0 - beta) * amount
                new_v = eps_v - amount
                fired = True
            if fired and amount > 0.0:
                transferred = amount
                is_useful = True
            else:
                new_u = eps_u
                new_v = eps_v
        elif protocol_id == 2:  # OWA
            nrg_u_new = reg_nrg[i] + eps_v
            wt_u_new = reg_wt[i] + w_v
            nrg_v_new = reg_nrg[j] + eps_u
            wt_v_new = reg_wt[j] + w_u
            reg_nrg[i] = nrg_u_new
            reg_wt[i] = wt_u_new
            reg_nrg[j] = nrg_v_new
            reg_wt[j] = wt_v_new
            above_u = eps_u > (w_u / wt_u_new) * nrg_u_new
            above_v = eps_v > (w_v / wt_v_new) * nrg_v_new
            if above_u != above_v:
                delta = fabs((w_v * eps_u - w_u * eps_v) / (w_u + w_v))
                if delta > 0.0:
                    if eps_u / w_u > eps_v / w_v:
                        new_u = eps_u - delta
                        new_v = eps_v + (1.0 - beta) * delta
                    else:
                        new_u = eps_u + (1.0 - beta) * delta
                        new_v = eps_v - delta
                    transferred = delta
                    is_useful = True
        else:
            raise ValueError(f"unknown protocol id {protocol_id}")

        if is_useful:
            e[i] = new_u
            e[j] = new_v
            cum_loss = cum_loss + beta * transferred
            total = 0.0
            for k in range(m):
                total += e[k]
            s = 0.0
            for k in range(m):
                s += fabs(e[k] / total - wn[k])
            out_draws[useful] = draws
            out_total[useful] = total
            out_tvd[useful] = 0.5 * s
            out_loss[useful] = cum_loss
            useful += 1

    return useful, draws
