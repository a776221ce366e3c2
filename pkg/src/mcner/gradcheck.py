"""Finite-difference gradient verification.

The checker perturbs parameters one entry at a time and compares central
differences of the loss against analytic gradients from backward().  The
difference quotient touches only forward evaluations, so it is an
independent oracle for the backward path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .autograd import Tensor, no_grad


@dataclass
class GradReport:
    max_rel_error: float
    worst_param: str
    n_checked: int

    def ok(self, tol: float) -> bool:
        return self.max_rel_error <= tol


def relative_error(a: float, b: float, floor: float = 1e-5) -> float:
    """|a-b| over max(|a|, |b|, floor).

    The floor keeps pure round-off on exactly-zero gradients (for instance
    the key-projection bias, which cancels in the softmax) from dominating;
    any genuine backward bug produces differences at gradient scale, far
    above floor * tolerance.
    """
    return abs(a - b) / max(abs(a), abs(b), floor)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    max_entries_per_tensor: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradReport:
    """Compare analytic gradients of ``loss_fn`` with central differences.

    ``loss_fn`` must rebuild the graph from ``params`` on every call.  With
    ``max_entries_per_tensor`` set, a deterministic random subset of entries
    is checked in each tensor (every tensor is still covered); otherwise
    every entry is checked.
    """
    for p in params.values():
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                for name, p in params.items()}

    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    worst_name = ""
    n_checked = 0
    with no_grad():
        for name, p in params.items():
            flat = p.data.reshape(-1)
            n = flat.size
            if max_entries_per_tensor is not None and n > max_entries_per_tensor:
                idx = rng.choice(n, size=max_entries_per_tensor, replace=False)
                idx.sort()
            else:
                idx = np.arange(n)
            grad_flat = analytic[name].reshape(-1)
            for i in idx:
                orig = flat[i]
                step = h * max(1.0, abs(orig))
                flat[i] = orig + step
                up = loss_fn().item()
                flat[i] = orig - step
                down = loss_fn().item()
                flat[i] = orig
                fd = (up - down) / (2.0 * step)
                err = relative_error(grad_flat[i], fd)
                n_checked += 1
                if err > worst:
                    worst = err
                    worst_name = f"{name}[{i}]"
    return GradReport(worst, worst_name, n_checked)
