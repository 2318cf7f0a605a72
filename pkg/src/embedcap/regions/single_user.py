"""Single-user embedding capacities as degenerate broadcast instances.

With the degraded output equal to the strong one and the second message
unused, the BC bounds collapse to the one-user formulas:

* irreversible (host not recovered): max I(V;Y) - I(V;S) over p(v,x|s),
  the A' inner bound with constant U, read off at lambda = 1;
* reversible (host recovered):       max I(X,S;Y) - H(S) over p(x|s),
  the C' bound b2 with Z = Y, read off at lambda = 0.
"""

from __future__ import annotations

from dataclasses import replace

from ..prob import Alphabet, DistortionMeasure, Kernel, Pmf
from .problems import BcProblem
from .region import support_function
from .search import SearchConfig, compute_region


def _as_bc(host: Pmf, channel: Kernel, d: DistortionMeasure, delta: float, case: str) -> BcProblem:
    y = channel.output_axes[0]
    z = Alphabet("Z", y.size)
    identity = Kernel.deterministic([y], [z], lambda v: v)
    return BcProblem(host, channel, identity, d, delta, case)


def irreversible_capacity(host: Pmf, channel: Kernel, d: DistortionMeasure, delta: float,
                          config: SearchConfig | None = None) -> float:
    """Largest message rate when only the message is decoded."""
    cfg = config or SearchConfig()
    aux = dict(cfg.aux_sizes)
    aux.setdefault("U", 1)
    aux.setdefault("V", channel.input_axes[0].size * host.alphabet.size)
    cfg = replace(cfg, aux_sizes=aux)
    region = compute_region(_as_bc(host, channel, d, delta, "A'"), cfg, bound="inner")
    best = 0.0 if region.empty else support_function(region, 1.0)
    if aux["V"] >= channel.input_axes[0].size * host.alphabet.size:
        # V = (X, S) is admissible and gives I(X,S;Y) - H(S); the grid may miss that point
        best = max(best, reversible_capacity(host, channel, d, delta, config))
    return best


def reversible_capacity(host: Pmf, channel: Kernel, d: DistortionMeasure, delta: float,
                        config: SearchConfig | None = None) -> float:
    """Largest message rate when the host must also be recovered exactly."""
    region = compute_region(_as_bc(host, channel, d, delta, "C'"), config or SearchConfig())
    return 0.0 if region.empty else support_function(region, 0.0)
