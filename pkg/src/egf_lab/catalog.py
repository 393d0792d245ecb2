"""Named functionals and initial-data families exposed through the CLI.

The catalog is deliberately closed: each entry is a hand-written builder, not
an expression parser.  Adding a flow functional means adding a builder here.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .sym_curvature import FlowFunctional


def _zeros(tau):
    return np.zeros(tau.shape[:-1])


def _pad(first, n, first_tag, *, slot=0):
    """Coefficient list with one active slot, zeros elsewhere."""
    f = [_zeros] * n
    f[slot] = first
    tags = [f"f{j} = 0" for j in range(n)]
    tags[slot] = first_tag
    return FlowFunctional(n, tuple(f), tuple(tags))


def _build_b1(n: int, params: dict) -> FlowFunctional:
    if n == 1:
        return _pad(lambda tau: tau[..., 0], 1, "f0 = tau1")
    return _pad(lambda tau: np.ones(tau.shape[:-1]), n, "f1 = 1", slot=1)


def _build_tau1_minus_c(n: int, params: dict) -> FlowFunctional:
    c = float(params.get("c", 0.0))
    return _pad(lambda tau: tau[..., 0] - c, n, f"f0 = tau1 - {c:g}")


def _build_ext_ricci(n: int, params: dict) -> FlowFunctional:
    if n < 2:
        raise ValueError("ext_ricci needs leaf dimension n >= 2")
    if n == 2:
        return _pad(
            lambda tau: tau[..., 1] - tau[..., 0] ** 2, 2, "f0 = tau2 - tau1^2"
        )
    f = [_zeros] * n
    f[1] = lambda tau: -2.0 * tau[..., 0]
    f[2] = lambda tau: 2.0 * np.ones(tau.shape[:-1])
    tags = [f"f{j} = 0" for j in range(n)]
    tags[1] = "f1 = -2 tau1"
    tags[2] = "f2 = 2"
    return FlowFunctional(n, tuple(f), tuple(tags))


def _build_umbilical_square(n: int, params: dict) -> FlowFunctional:
    if n == 1:
        return _pad(lambda tau: tau[..., 0] ** 2, 1, "f0 = tau1^2")
    return _pad(lambda tau: tau[..., 1] / n, n, f"f0 = tau2 / {n}")


def _build_affine(n: int, params: dict) -> FlowFunctional:
    a = float(params.get("a", 1.0))
    b = float(params.get("b", 0.0))
    if a == 0.0 and b == 0.0:
        raise ValueError("affine functional needs a != 0 or b != 0")
    return _pad(
        lambda tau: a * tau[..., 0] / n + b, n,
        f"f0 = {a:g} tau1 / {n} + {b:g}",
    )


FUNCTIONALS: dict[str, Callable[[int, dict], FlowFunctional]] = {
    "b1": _build_b1,                        # psi(lam) = lam
    "tau1_minus_c": _build_tau1_minus_c,    # psi(lam) = n lam - c
    "ext_ricci": _build_ext_ricci,          # psi(lam) = (2 - 2n) lam^2
    "umbilical_square": _build_umbilical_square,  # psi(lam) = lam^2
    "affine": _build_affine,                # psi(lam) = a lam + b
}


def make_functional(name: str, n: int, params: dict | None = None) -> FlowFunctional:
    if name not in FUNCTIONALS:
        raise ValueError(
            f"unknown functional {name!r}; choose from {sorted(FUNCTIONALS)}"
        )
    if n < 1:
        raise ValueError("leaf dimension n must be >= 1")
    return FUNCTIONALS[name](n, params or {})


def make_initial(spec: dict, length: float) -> Callable[[np.ndarray], np.ndarray]:
    """Initial normal-curvature profile lam0(s) from its named description."""
    kind = spec.get("kind")
    if kind == "constant":
        value = float(spec.get("value", 0.0))
        return lambda s: value + 0.0 * np.asarray(s)
    if kind == "sine":
        amplitude = float(spec.get("amplitude", 1.0))
        mean = float(spec.get("mean", 0.0))
        periods = int(spec.get("periods", 1))
        return lambda s: mean + amplitude * np.sin(
            2.0 * np.pi * periods * np.asarray(s) / length
        )
    if kind == "random_fourier":
        amplitude = float(spec.get("amplitude", 1.0))
        modes = int(spec.get("modes", 3))
        seed = int(spec.get("seed", 0))
        rng = np.random.default_rng(seed)
        a = rng.normal(size=modes)
        b = rng.normal(size=modes)
        norm = np.sqrt(np.sum(a ** 2 + b ** 2)) or 1.0

        def lam0(s):
            s = np.asarray(s)
            out = np.zeros_like(s, dtype=float)
            for m in range(modes):
                phase = 2.0 * np.pi * (m + 1) * s / length
                out += a[m] * np.cos(phase) + b[m] * np.sin(phase)
            return amplitude * out / norm

        return lam0
    raise ValueError(
        f"unknown initial-data kind {kind!r}; "
        "choose from ['constant', 'sine', 'random_fourier']"
    )


BIREGULAR_METRICS = ("flat", "exp_x0")


def make_biregular_metric(name: str):
    """(g00, g11, periodic0) builders for the named surface metrics."""
    if name == "flat":
        return (lambda u, v: 1.0 + 0 * u, lambda u, v: 1.0 + 0 * u, True)
    if name == "exp_x0":
        return (lambda u, v: 1.0 + 0 * u, lambda u, v: np.exp(-2.0 * u), False)
    raise ValueError(
        f"unknown biregular metric {name!r}; choose from {list(BIREGULAR_METRICS)}"
    )
