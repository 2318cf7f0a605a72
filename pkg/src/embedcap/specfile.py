"""Problem-spec files: TOML documents with explicit axis orders and flat tables.

A MAC file::

    network = "mac"
    case = "C"

    [alphabets]
    S1 = 2
    S2 = 2
    X1 = 2
    X2 = 2
    Y = 4

    [host]
    axes = ["S1", "S2"]
    probs = [0.25, 0.25, 0.25, 0.25]

    [channel]
    inputs = ["X1", "S1", "X2", "S2"]
    outputs = ["Y"]
    probs = [...]            # row-major over inputs, then outputs

    [distortion.d1]
    host = "S1"
    embed = "X1"
    table = [0, 1, 1, 0]

    [distortion.d2]
    ...

    [budget]
    delta1 = 0.5
    delta2 = 0.5

A BC file uses ``network = "bc"``, a host over ``["S"]``, sections
``[channel.forward]`` (X, S -> Y) and ``[channel.degrade]`` (Y -> Z),
``[distortion.d]`` and ``[budget] delta``.  Optional blocks: ``[search]``
(SearchConfig fields), ``[sim]`` (SimConfig fields plus ``lambda``) and
``[tuple]`` (encoder kernels for simulation; auxiliary alphabets such as Q,
U1, U are declared in ``[alphabets]`` like any other axis).
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import EmbedcapError, SpecError
from .prob import Alphabet, DistortionMeasure, JointPmf, Kernel, Pmf
from .regions import BcFeasibleTuple, BcProblem, MacFeasibleTuple, MacProblem, SearchConfig
from .regions.problems import normalize_case

_TOP = {"network", "case", "alphabets", "host", "channel", "distortion", "budget", "search", "sim", "tuple"}
_TABLE = {"axes", "probs"}
_KERNEL = {"inputs", "outputs", "probs"}
_DIST = {"host", "embed", "table"}
_SEARCH = {"grid_step", "directions", "max_grid", "coarse_grid", "row_budget", "chunk_size", "restarts",
           "sweeps", "refine", "refine_tol", "refine_iters", "aux_sizes", "seed"}
_SIM = {"n", "r1", "r2", "eps", "eps1", "trials", "seed", "decode_budget", "lambda"}


@dataclass(frozen=True, eq=False)
class SpecFile:
    """A parsed spec: the validated problem plus the optional blocks and the raw document."""

    problem: MacProblem | BcProblem
    doc: dict
    search: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    tuple: MacFeasibleTuple | BcFeasibleTuple | None = None

    def search_config(self, **overrides) -> SearchConfig:
        kw = dict(self.search)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        if "grid_step" in kw and kw["grid_step"] is not None:
            kw["grid_step"] = parse_step(kw["grid_step"])
        if "aux_sizes" in kw:
            kw["aux_sizes"] = dict(kw["aux_sizes"])
        return SearchConfig(**kw)


def parse_step(value) -> float:
    """Grid step from ``1/8``, ``"0.125"`` or 0.125."""
    try:
        return float(Fraction(str(value)))
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"grid step must be a number or a fraction like 1/8, got {value!r}",
                        section="search") from None


class _Ctx:
    """Locates sections in the source text so semantic errors carry a line number."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, section: str | None, key: str | None = None):
        """1-based line of ``key`` inside ``section`` (or of the section header)."""
        start = -1
        if section:
            pat = re.compile(r"^\s*\[\s*" + re.escape(section).replace(r"\.", r"\s*\.\s*") + r"\s*\]")
            start = next((i for i, ln in enumerate(self.lines) if pat.match(ln)), None)
            if start is None:
                return None
        if key is not None:
            kpat = re.compile(r"^\s*\"?" + re.escape(key) + r"\"?\s*=")
            for i in range(start + 1, len(self.lines)):
                if self.lines[i].lstrip().startswith("["):
                    break
                if kpat.match(self.lines[i]):
                    return i + 1
        return start + 1 if start >= 0 else None

    def error(self, msg, section=None, key=None):
        return SpecError(msg, section=section, line=self.line_of(section, key))


def _get(ctx, d, key, section, kind=None):
    if key not in d:
        raise ctx.error(f"missing key {key!r}", section)
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ctx.error(f"{key!r} has the wrong type ({type(v).__name__})", section, key)
    return v


def _no_unknown(ctx, d, allowed, section):
    if not isinstance(d, dict):
        raise ctx.error("expected a table", section)
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ctx.error(f"unknown key(s) {extra}", section, extra[0])


def _axes(ctx, alphabets, names, section, key):
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ctx.error(f"{key!r} must be a list of axis names", section, key)
    out = []
    for n in names:
        if n not in alphabets:
            raise ctx.error(f"axis {n!r} is not declared in [alphabets]", section, key)
        out.append(alphabets[n])
    return out


def _wrap(ctx, section, fn, *args):
    """Run a constructor and re-raise validation failures as SpecError naming the section."""
    try:
        return fn(*args)
    except SpecError:
        raise
    except (EmbedcapError, ValueError, TypeError) as exc:
        raise ctx.error(str(exc), section) from None


def _kernel(ctx, alphabets, d, section):
    _no_unknown(ctx, d, _KERNEL, section)
    ins = _axes(ctx, alphabets, _get(ctx, d, "inputs", section), section, "inputs")
    outs = _axes(ctx, alphabets, _get(ctx, d, "outputs", section), section, "outputs")
    probs = _get(ctx, d, "probs", section, list)
    return _wrap(ctx, section, Kernel, ins, outs, probs)


def _joint(ctx, alphabets, d, section):
    _no_unknown(ctx, d, _TABLE, section)
    axes = _axes(ctx, alphabets, _get(ctx, d, "axes", section), section, "axes")
    probs = _get(ctx, d, "probs", section, list)
    if len(axes) == 1:
        return _wrap(ctx, section, Pmf, axes[0], probs)
    return _wrap(ctx, section, JointPmf, axes, probs)


def _distortion(ctx, alphabets, d, section):
    _no_unknown(ctx, d, _DIST, section)
    host = _axes(ctx, alphabets, [_get(ctx, d, "host", section, str)], section, "host")[0]
    embed = _axes(ctx, alphabets, [_get(ctx, d, "embed", section, str)], section, "embed")[0]
    return _wrap(ctx, section, DistortionMeasure, host, embed, _get(ctx, d, "table", section, list))


def _number(ctx, d, key, section):
    v = _get(ctx, d, key, section)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ctx.error(f"{key!r} must be a number", section, key)
    return float(v)


def parse_text(text: str) -> SpecFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise SpecError(f"syntax error: {exc}", line=line, col=col) from None
    return parse_doc(doc, text)


def parse_spec(path) -> SpecFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    return parse_text(text)


def parse_doc(doc: dict, text: str | None = None) -> SpecFile:
    ctx = _Ctx(text if text is not None else dumps(doc))
    _no_unknown(ctx, doc, _TOP, None)
    network = _get(ctx, doc, "network", None, str).lower()
    if network not in ("mac", "bc"):
        raise ctx.error(f"network must be 'mac' or 'bc', got {network!r}", None, "network")
    case = normalize_case(_get(ctx, doc, "case", None, str))

    raw_alpha = _get(ctx, doc, "alphabets", None, dict)
    alphabets = {}
    for name, size in raw_alpha.items():
        if isinstance(size, bool) or not isinstance(size, int):
            raise ctx.error(f"alphabet size of {name!r} must be an integer", "alphabets", name)
        alphabets[name] = _wrap(ctx, "alphabets", Alphabet, name, size)

    host = _joint(ctx, alphabets, _get(ctx, doc, "host", None, dict), "host")
    channel = _get(ctx, doc, "channel", None, dict)
    dist = _get(ctx, doc, "distortion", None, dict)
    budget = _get(ctx, doc, "budget", None, dict)
    if network == "mac":
        _no_unknown(ctx, dist, {"d1", "d2"}, "distortion")
        _no_unknown(ctx, budget, {"delta1", "delta2"}, "budget")
        d1 = _distortion(ctx, alphabets, _get(ctx, dist, "d1", "distortion", dict), "distortion.d1")
        d2 = _distortion(ctx, alphabets, _get(ctx, dist, "d2", "distortion", dict), "distortion.d2")
        ch = _kernel(ctx, alphabets, channel, "channel")
        args = (host, ch, d1, d2, _number(ctx, budget, "delta1", "budget"),
                _number(ctx, budget, "delta2", "budget"), case)
        problem = _wrap(ctx, "channel", MacProblem, *args)
    else:
        _no_unknown(ctx, channel, {"forward", "degrade"}, "channel")
        _no_unknown(ctx, dist, {"d"}, "distortion")
        _no_unknown(ctx, budget, {"delta"}, "budget")
        fw = _kernel(ctx, alphabets, _get(ctx, channel, "forward", "channel", dict), "channel.forward")
        dg = _kernel(ctx, alphabets, _get(ctx, channel, "degrade", "channel", dict), "channel.degrade")
        d = _distortion(ctx, alphabets, _get(ctx, dist, "d", "distortion", dict), "distortion.d")
        if not isinstance(host, Pmf):
            raise ctx.error("a BC host is a pmf over the single axis S", "host")
        problem = _wrap(ctx, "channel", BcProblem, host, fw, dg, d, _number(ctx, budget, "delta", "budget"),
                        case)

    search = doc.get("search", {})
    _no_unknown(ctx, search, _SEARCH, "search")
    sim = doc.get("sim", {})
    _no_unknown(ctx, sim, _SIM, "sim")
    tup = None
    if "tuple" in doc:
        tup = _parse_tuple(ctx, alphabets, doc["tuple"], network)
    spec = SpecFile(problem, doc, dict(search), dict(sim), tup)
    _wrap(ctx, "search", spec.search_config)
    return spec


def _parse_tuple(ctx, alphabets, d, network):
    if network == "mac":
        _no_unknown(ctx, d, {"q", "enc1", "enc2", "joint_enc"}, "tuple")
        q = None
        if "q" in d:
            q = _joint(ctx, alphabets, d["q"], "tuple.q")
        kw = {k: _kernel(ctx, alphabets, d[k], f"tuple.{k}") for k in ("enc1", "enc2", "joint_enc") if k in d}
        return _wrap(ctx, "tuple", lambda: MacFeasibleTuple(q=q, **kw))
    _no_unknown(ctx, d, {"enc"}, "tuple")
    enc = _kernel(ctx, alphabets, _get(ctx, d, "enc", "tuple", dict), "tuple.enc")
    return _wrap(ctx, "tuple", BcFeasibleTuple, enc)


def dumps(doc: dict) -> str:
    """Serialise a spec document (the echo stored in run reports)."""
    return tomli_w.dumps(doc)
