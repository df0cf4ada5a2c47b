"""Gauss-Legendre panels at multiprecision, used by the Stieltjes oracle."""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp


@lru_cache(maxsize=64)
def gauss_legendre(q: int, bits: int):
    """Nodes and weights of the q-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on P_q from the Tricomi initial guesses; only the
    nonnegative half is computed and mirrored.
    """
    with mp.workprec(bits + 20):
        nodes, weights = [], []
        tol = mp.ldexp(mp.mpf(1), -(bits + 10))
        for i in range(1, q // 2 + 1):
            x = mp.mpf(math.cos(math.pi * (i - 0.25) / (q + 0.5)))
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, q + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = q * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < tol:
                    break
            # recompute the derivative at the converged node
            p0, p1 = mp.mpf(1), x
            for k in range(2, q + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = q * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes += [x, -x]
            weights += [w, w]
        if q % 2:
            p0, p1 = mp.mpf(1), mp.mpf(0)
            for k in range(2, q + 1):
                p0, p1 = p1, (-(k - 1) * p0) / k
            # P_q'(0) = q P_{q-1}(0)
            dp = q * p0
            nodes.append(mp.mpf(0))
            weights.append(2 / (dp * dp))
    with mp.workprec(bits):
        return tuple(+x for x in nodes), tuple(+w for w in weights)


def panel_rule(breaks, width, q: int, bits: int):
    """Composite rule on consecutive intervals of ``breaks``, each split into
    equal panels no wider than ``width``."""
    gx, gw = gauss_legendre(q, bits)
    xs, ws = [], []
    with mp.workprec(bits):
        for a, b in zip(breaks[:-1], breaks[1:]):
            m = max(1, int(mp.ceil((b - a) / width)))
            hw = (b - a) / (2 * m)
            for j in range(m):
                c = a + (2 * j + 1) * hw
                for x, w in zip(gx, gw):
                    xs.append(c + hw * x)
                    ws.append(hw * w)
    return xs, ws
