"""Pure Python simulation kernel.

Fallback used when the compiled extension is unavailable, and the
reference its semantics are checked against: both kernels perform the
same IEEE double operations in the same order, so trajectories agree
bit for bit. Protocol arithmetic is delegated to ``protocols``; the
random stream, pair unranking and the sequential summations mirror the
compiled code exactly.
"""

from __future__ import annotations

import numpy as np

from . import protocols
from .rng import _GOLDEN, _MASK64, mix64
from .scheduler import unrank_pair

BACKEND_NAME = "python"

OWS = 0
SWT = 1
OWA = 2


def run_loop(
    e: np.ndarray,
    w: np.ndarray,
    wn: np.ndarray,
    beta: float,
    protocol_id: int,
    d_eps: float,
    threshold: float,
    budget: int,
    max_draws: int,
    seed: int,
    reg_nrg: np.ndarray,
    reg_wt: np.ndarray,
    out_draws: np.ndarray,
    out_total: np.ndarray,
    out_tvd: np.ndarray,
    out_loss: np.ndarray,
) -> tuple[int, int]:
    """Run interactions until ``budget`` useful ones happened or draws run out.

    ``e`` and the OWA registers are updated in place; per useful
    interaction one row is written into the ``out_*`` arrays. Returns
    (useful interactions recorded, scheduler draws consumed).
    """
    m = int(e.shape[0])
    npairs = m * (m - 1) // 2
    state = int(seed) & _MASK64
    reject_below = (1 << 64) % npairs

    el = [float(x) for x in e]
    wl = [float(x) for x in w]
    wnl = [float(x) for x in wn]
    nrgl = [float(x) for x in reg_nrg]
    wtl = [float(x) for x in reg_wt]
    swt_cfg = protocols.SwtConfig(d_eps) if protocol_id == SWT else None

    useful = 0
    draws = 0
    cum_loss = 0.0
    while useful < budget and draws < max_draws:
        draws += 1
        while True:
            state = (state + _GOLDEN) & _MASK64
            x = mix64(state)
            if x >= reject_below:
                t = x % npairs
                break
        i, j = unrank_pair(t)

        if protocol_id == OWS:
            out = protocols.ows_interact(el[i], wl[i], el[j], wl[j], beta, threshold)
        elif protocol_id == SWT:
            out = protocols.swt_interact(el[i], wl[i], el[j], wl[j], beta, swt_cfg)
        elif protocol_id == OWA:
            out, reg_i, reg_j = protocols.owa_interact(
                el[i],
                wl[i],
                protocols.OwaRegisters(nrgl[i], wtl[i]),
                el[j],
                wl[j],
                protocols.OwaRegisters(nrgl[j], wtl[j]),
                beta,
            )
            nrgl[i], wtl[i] = reg_i.nrg, reg_i.wt
            nrgl[j], wtl[j] = reg_j.nrg, reg_j.wt
        else:
            raise ValueError(f"unknown protocol id {protocol_id}")

        if out.useful:
            el[i] = out.new_energy_u
            el[j] = out.new_energy_v
            cum_loss = cum_loss + out.lost
            total = 0.0
            for k in range(m):
                total += el[k]
            s = 0.0
            for k in range(m):
                s += abs(el[k] / total - wnl[k])
            out_draws[useful] = draws
            out_total[useful] = total
            out_tvd[useful] = 0.5 * s
            out_loss[useful] = cum_loss
            useful += 1

    e[:] = el
    reg_nrg[:] = nrgl
    reg_wt[:] = wtl
    return useful, draws
