"""Composite Gauss-Legendre rules and log-domain accumulation helpers."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def gauss_legendre(order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(edges, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Flattened nodes and weights of a composite rule over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    gx, gw = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * gx
    weights = half * gw
    return nodes.ravel(), weights.ravel()


def panel_nodes(edges, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`composite_nodes` but keeps the (panel, node) shape."""
    edges = np.asarray(edges, dtype=float)
    gx, gw = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * gx, half * gw


def uniform_edges(lo: float, hi: float, panels: int) -> np.ndarray:
    return np.linspace(lo, hi, panels + 1)


def log_integrate(log_f, weights, axis=-1):
    """``log(sum(weights * exp(log_f)))`` without overflow; weights must be >= 0."""
    log_f = np.asarray(log_f, dtype=float)
    weights = np.asarray(weights, dtype=float)
    m = np.max(log_f, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(weights * np.exp(log_f - m), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.log(s) + m
    return np.squeeze(out, axis=axis)


def log_cumsum(log_terms) -> np.ndarray:
    """Running ``log(sum(exp(log_terms[:k+1])))``."""
    return np.logaddexp.accumulate(np.asarray(log_terms, dtype=float))


def _log_panel_estimate(log_fn, a, b, order):
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x
    return log_integrate(log_fn(nodes), half[:, None] * w, axis=1)


def adaptive_log_quad(log_fn, edges, order: int = 8, rtol: float = 1e-12,
                      max_rounds: int = 40, max_panels: int = 1 << 18) -> float:
    """log of int exp(log_fn) over [edges[0], edges[-1]] by panel bisection.

    ``log_fn`` maps a 2-D node array to log integrand values.  A panel is kept
    once its one-level refinement changes it by less than ``rtol`` times the
    running total, so panels carrying negligible mass are never refined.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    coarse = _log_panel_estimate(log_fn, a, b, order)
    kept = []
    log_rtol = math.log(rtol)
    for _ in range(max_rounds):
        m = 0.5 * (a + b)
        left = _log_panel_estimate(log_fn, a, m, order)
        right = _log_panel_estimate(log_fn, m, b, order)
        fine = np.logaddexp(left, right)
        total = np.logaddexp.reduce(np.concatenate(kept + [fine]))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_err = fine + np.log(np.abs(-np.expm1(coarse - fine)))
        ok = (fine == -np.inf) | (log_err <= log_rtol + total) | np.isnan(log_err)
        kept.append(fine[ok])
        if np.all(ok):
            break
        bad = ~ok
        if 2 * int(bad.sum()) > max_panels:
            kept.append(fine[bad])
            break
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    else:
        kept.append(fine[~ok])
    return float(np.logaddexp.reduce(np.concatenate(kept)))
