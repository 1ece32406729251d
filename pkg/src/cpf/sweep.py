"""Parameter sweeps, figure presets and CSV output.

A sweep evaluates named quantities of one application over a 1D or 2D
grid. Probabilities are carried in log form and written both linearly and
as ``log10``; linear values below ``1e-300`` are left blank.
"""
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import yaml

from . import discrimination as d
from . import reading as rd
from . import target_finding as tf

LN10 = math.log(10.0)
LINEAR_FLOOR = 1e-300


class SpecError(ValueError):
    """Invalid sweep specification; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


# ---------------------------------------------------------------------------
# applications and their quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quantity:
    name: str
    # returns (natural-log value, clamped) for probabilities, plain value otherwise
    func: Callable
    probability: bool = True
    doc: str = ""


@dataclass(frozen=True)
class Application:
    name: str
    params: Dict[str, type]
    defaults: Dict[str, float]
    build: Callable
    quantities: Dict[str, Quantity]


def _q(name, fn, doc="", probability=True):
    return name, Quantity(name, fn, probability, doc)


def _plain(log_fn):
    return lambda p: (log_fn(p), False)


def _ub(log_fn):
    def f(p):
        val = log_fn(p, clamp=False)
        return min(val, 0.0), val > 0
    return f


def _clamp_log(log_fn):
    def f(p):
        val = log_fn(p)
        return min(val, 0.0), val > 0
    return f


def _log10_ratio(a, b):
    return lambda p: (a(p) - b(p)) / LN10


def _build_reading(kw):
    kw = dict(kw)
    if "MN_S" in kw:
        mns = kw.pop("MN_S")
        if kw.get("M") is None:
            if kw["N_S"] <= 0:
                raise ValueError("MN_S needs N_S > 0")
            kw["M"] = mns / kw["N_S"]
    kw.pop("trials", None), kw.pop("seed", None)
    return rd.ReadingParams(**kw)


def _build_tf(kw):
    kw = dict(kw)
    if "MN_S" in kw:
        mns = kw.pop("MN_S")
        if kw.get("M") is None:
            kw["M"] = mns / kw["N_S"]
    if kw.get("precision_bits") is not None:
        kw["precision_bits"] = int(kw["precision_bits"])
    return tf.TargetFindingParams(**kw)


@dataclass(frozen=True)
class GenericCN:
    m: int
    zeta1: float
    zeta2: float
    trials: int = 100_000
    seed: int = 0

    @property
    def pair(self):
        return d.ErrorPair(self.zeta1, self.zeta2)


def _build_generic(kw):
    kw = dict(kw)
    m = kw["m"]
    if int(m) != m or m < 1:
        raise ValueError("m must be an integer >= 1")
    kw["m"] = int(m)
    kw["trials"] = int(kw.get("trials", 100_000))
    kw["seed"] = int(kw.get("seed", 0))
    p = GenericCN(**kw)
    p.pair  # validates
    return p


def _generic_mc(p):
    r = d.cn_monte_carlo(p.m, p.pair, p.trials, p.seed)
    return r.log_value, False, r.detail["stderr"]


def _helstrom_generic(p):
    if p.m < 2:
        raise ValueError("the Helstrom limit needs m >= 2")
    return d.log_helstrom_gus_pure(p.m, d._log(p.zeta1))


_READING_PARAMS = {"m": int, "M": float, "N_S": float, "r_B": float, "r_T": float,
                   "N_B": float, "MN_S": float}
_READING_DEFAULTS = {"N_B": 0.0, "M": None}

_READING_Q = dict([
    _q("P_CN_QR", _plain(rd.log_cn_reading_error), "CN receiver with entangled probe"),
    _q("P_H_CR", _plain(rd.log_classical_helstrom), "Helstrom limit, coherent probe"),
    _q("P_HLB_CR", _plain(rd.log_classical_lb), "classical lower bound (any N_B)"),
    _q("P_UB_QR", _ub(rd.log_quantum_ub), "entangled fidelity upper bound (any N_B)"),
    _q("P_UB_QR_asym", _clamp_log(rd.log_quantum_ub_asymptotic), "small-N_S upper bound"),
    _q("P_CN_QR_asym_low_signal", _clamp_log(rd.log_cn_reading_asymptotic_low_signal)),
    _q("P_CN_QR_asym_high_reflectivity",
       _clamp_log(rd.log_cn_reading_asymptotic_high_reflectivity)),
    _q("log10_ratio_CN_H", _log10_ratio(rd.log_cn_reading_error, rd.log_classical_helstrom),
       "log10(P_CN_QR / P_H_CR)", probability=False),
    _q("noisy_exponent_ratio", rd.noisy_exponent_ratio,
       "quantum/classical exponent ratio with thermal noise", probability=False),
])

_STAR_Q = dict(_READING_Q)
_STAR_Q.update(dict([
    _q("P_CNstar_QR", _plain(rd.log_cn_star_error), "CN receiver counting idlers too"),
    _q("P_CNstar_QR_asym", _clamp_log(rd.log_cn_star_asymptotic)),
    _q("log10_ratio_CNstar_H",
       _log10_ratio(rd.log_cn_star_error, rd.log_classical_helstrom),
       "log10(P_CNstar_QR / P_H_CR)", probability=False),
]))


def _binary_cn(p):
    return rd.binary_reading_errors(p).log_cn, False


def _binary_star(p):
    res = rd.binary_reading_errors(p)
    if res.log_cn_star is None:
        raise ValueError("P_CNstar_binary needs r_B = 1")
    return res.log_cn_star, False


_BINARY_Q = dict([
    _q("P_CN_binary", _binary_cn, "binary reading with the b-POVM"),
    _q("P_CNstar_binary", _binary_star, "binary reading counting idlers (r_B = 1)"),
])

_TF_PARAMS = {"m": int, "M": float, "N_S": float, "eta": float, "N_B": float,
              "precision_bits": int, "MN_S": float}
_TF_Q = dict([
    _q("CTF_DD", _plain(tf.log_dd_error), "coherent probe, direct detection"),
    _q("CTF_DD_asym", _plain(tf.log_dd_error_asymptotic)),
    _q("CTF_DD_leading", _clamp_log(tf.log_dd_error_leading_term)),
    _q("CTF_LB", _plain(tf.log_ctf_lb), "classical lower bound"),
    _q("QTF_UB", _ub(tf.log_qtf_ub), "entangled fidelity upper bound"),
    _q("QTF_UB_asym", _clamp_log(tf.log_qtf_ub_asymptotic)),
    _q("QTF_CN", _plain(tf.log_qtf_cn_error), "SFG-based CN receiver"),
    _q("QTF_CN_asym", _clamp_log(tf.log_qtf_cn_asymptotic)),
])

_GENERIC_Q = dict([
    _q("P_CN", lambda p: (d.log_cn_error(p.m, p.pair), False)),
    _q("P_CN_recursive", lambda p: (d._log(d.cn_error_recursive(p.m, p.pair)), False)),
    _q("P_CN_asym", _clamp_log(lambda p: d.log_cn_asymptotic(p.m, p.pair))),
    _q("P_no_feedforward", lambda p: (d.log_no_feedforward(p.m, d._log(p.zeta2)), False)),
    _q("P_H_pure", lambda p: (_helstrom_generic(p), False),
       "pure-state Helstrom limit with overlap zeta1"),
    _q("P_CN_MC", _generic_mc, "Monte Carlo of the CN protocol"),
])

APPLICATIONS = {
    "reading": Application("reading", _READING_PARAMS, _READING_DEFAULTS, _build_reading,
                           _READING_Q),
    "reading_star": Application("reading_star", _READING_PARAMS, _READING_DEFAULTS,
                                _build_reading, _STAR_Q),
    "binary_reading": Application("binary_reading", _READING_PARAMS, _READING_DEFAULTS,
                                  _build_reading, _BINARY_Q),
    "target_finding": Application("target_finding", _TF_PARAMS,
                                  {"precision_bits": None, "M": None}, _build_tf, _TF_Q),
    "generic_cn": Application("generic_cn",
                              {"m": int, "zeta1": float, "zeta2": float, "trials": int,
                               "seed": int},
                              {"trials": 100_000, "seed": 0}, _build_generic, _GENERIC_Q),
}


# ---------------------------------------------------------------------------
# sweep specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RangeSpec:
    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"
    integer: bool = False

    def values(self):
        if self.points < 1:
            raise SpecError(f"sweep.{self.name}.points", "empty sweep range")
        if self.scale == "linear":
            v = np.linspace(self.start, self.stop, self.points)
        elif self.scale == "log":
            if self.start <= 0 or self.stop <= 0:
                raise SpecError(f"sweep.{self.name}", "log scale needs positive bounds")
            v = np.geomspace(self.start, self.stop, self.points)
        else:
            raise SpecError(f"sweep.{self.name}.scale", "must be 'linear' or 'log'")
        if self.integer:
            v = np.unique(np.round(v)).astype(int)
        return [x.item() for x in v]


@dataclass
class SweepSpec:
    application: str
    fixed: Dict[str, float]
    sweep: List[RangeSpec]
    quantities: List[str]
    output: Optional[str] = None
    title: str = ""
    notes: List[str] = field(default_factory=list)

    def validate(self, point_only=False):
        """Check the spec; ``point_only`` skips the sweep-axis checks."""
        app = APPLICATIONS.get(self.application)
        if app is None:
            raise SpecError("application",
                            f"unknown application; choose from {sorted(APPLICATIONS)}")
        if not point_only and not self.sweep:
            raise SpecError("sweep", "at least one sweep variable is required")
        if len(self.sweep) > 2:
            raise SpecError("sweep", "at most two sweep variables are supported")
        for key in self.fixed:
            if key not in app.params:
                raise SpecError(f"fixed.{key}", f"not a parameter of {self.application}")
        names = [r.name for r in self.sweep]
        if len(set(names)) != len(names):
            raise SpecError("sweep", "duplicate sweep variable")
        for r in self.sweep:
            if r.name not in app.params:
                raise SpecError(f"sweep.{r.name}", f"not a parameter of {self.application}")
            if r.name in self.fixed:
                raise SpecError(f"sweep.{r.name}", "also given as a fixed parameter")
            r.values()
        if not self.quantities:
            raise SpecError("quantities", "no quantities requested")
        for q in self.quantities:
            if q not in app.quantities:
                raise SpecError(f"quantities.{q}",
                                f"unknown for {self.application}; valid: {sorted(app.quantities)}")
        given = set(self.fixed) | set(names)
        missing = [k for k in app.params
                   if k not in given and k not in app.defaults and k != "MN_S"]
        if self.application in ("reading", "reading_star", "binary_reading", "target_finding"):
            if "M" in missing and "MN_S" in given:
                missing.remove("M")
        if missing:
            raise SpecError("fixed", f"missing parameters {missing}")
        if self.application == "reading_star" and any(q.startswith("P_CNstar") or
                                                      q.startswith("log10_ratio_CNstar")
                                                      for q in self.quantities):
            rb, rt = self.fixed.get("r_B"), self.fixed.get("r_T")
            if "r_B" not in names and "r_T" not in names and rb != 1 and rt != 1:
                raise SpecError("fixed", "cn_star quantities need r_B = 1 or r_T = 1")
        return self

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SpecError("<root>", "spec must be a mapping")
        unknown = set(data) - {"application", "fixed", "sweep", "quantities", "output",
                               "title", "notes"}
        if unknown:
            raise SpecError(sorted(unknown)[0], "unknown field")
        for key in ("application", "sweep", "quantities"):
            if key not in data:
                raise SpecError(key, "required field missing")
        raw = data["sweep"]
        if isinstance(raw, dict):
            raw = [raw]
        ranges = []
        for i, r in enumerate(raw):
            try:
                ranges.append(RangeSpec(name=r["name"], start=float(r["start"]),
                                        stop=float(r["stop"]), points=int(r["points"]),
                                        scale=r.get("scale", "linear"),
                                        integer=bool(r.get("integer", False))))
            except (KeyError, TypeError, ValueError) as exc:
                raise SpecError(f"sweep[{i}]", f"bad range spec ({exc})") from None
        quantities = data["quantities"]
        if isinstance(quantities, str):
            quantities = [quantities]
        fixed = data.get("fixed") or {}
        if not isinstance(fixed, dict):
            raise SpecError("fixed", "must be a mapping")
        return cls(application=data["application"], fixed=dict(fixed), sweep=ranges,
                   quantities=list(quantities), output=data.get("output"),
                   title=data.get("title", ""), notes=list(data.get("notes", [])))

    @classmethod
    def from_yaml(cls, text):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise SpecError("<file>", f"not valid YAML ({exc})") from None
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _coerce(app, kw):
    out = dict(app.defaults)
    for k, v in kw.items():
        typ = app.params[k]
        if typ is int and v is not None:
            if float(v) != int(float(v)):
                raise SpecError(k, "must be an integer")
            v = int(float(v))
        elif v is not None:
            v = float(v)
        out[k] = v
    return {k: v for k, v in out.items() if not (v is None and k not in ("M",
                                                                       "precision_bits"))}


def evaluate_point(application, params, quantities):
    """Evaluate quantities at one parameter point.

    Returns ``{name: (value, log_value_or_None, clamped, stderr)}``; for
    probabilities ``value`` is linear and ``log_value`` natural.
    """
    app = APPLICATIONS[application]
    try:
        p = app.build(_coerce(app, params))
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError("parameters", f"{exc} at {params}") from None
    out = {}
    for name in quantities:
        q = app.quantities[name]
        try:
            res = q.func(p)
        except tf.PrecisionError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise SpecError(f"quantities.{name}", f"{exc} at {params}") from None
        if not q.probability:
            out[name] = (float(res), None, False, None)
            continue
        stderr = res[2] if len(res) > 2 else None
        logv, clamped = float(res[0]), bool(res[1])
        out[name] = (d._exp(logv), logv, clamped, stderr)
    return out


def _eval_task(args):
    return evaluate_point(*args)


def grid_points(spec):
    axes = [r.values() for r in spec.sweep]
    if len(axes) == 1:
        return [{spec.sweep[0].name: v} for v in axes[0]]
    return [{spec.sweep[0].name: a, spec.sweep[1].name: b} for a in axes[0] for b in axes[1]]


def _fmt(x):
    return format(x, ".12g")


def run_sweep(spec, jobs=1):
    """Evaluate ``spec``; returns (csv_text, summary_text)."""
    spec.validate()
    points = grid_points(spec)
    tasks = [(spec.application, {**spec.fixed, **pt}, spec.quantities) for pt in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_eval_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_eval_task(t) for t in tasks]

    app = APPLICATIONS[spec.application]
    sweep_names = [r.name for r in spec.sweep]
    header = list(sweep_names)
    for q in spec.quantities:
        header.append(q)
        if app.quantities[q].probability:
            header.append(f"log10_{q}")
    buf = io.StringIO()
    if spec.title:
        buf.write(f"# {spec.title}\n")
    fixed_txt = ", ".join(f"{k}={v}" for k, v in spec.fixed.items())
    buf.write(f"# application={spec.application}; fixed: {fixed_txt}\n")
    for r in spec.sweep:
        buf.write(f"# grid {r.name}: {r.start:g}..{r.stop:g}, {r.points} points, {r.scale}"
                  f"{', rounded to integers' if r.integer else ''}\n")
    for note in spec.notes:
        buf.write(f"# {note}\n")
    buf.write(",".join(header) + "\n")

    clamps = {q: 0 for q in spec.quantities}
    stderrs = {}
    for pt, row in zip(points, rows):
        cells = [_fmt(pt[n]) for n in sweep_names]
        for q in spec.quantities:
            value, logv, clamped, se = row[q]
            if logv is None:
                cells.append(_fmt(value))
                continue
            cells.append(_fmt(value) if value >= LINEAR_FLOOR else "")
            cells.append(_fmt(logv / LN10) if logv > -math.inf else "-inf")
            clamps[q] += clamped
            if se is not None:
                stderrs.setdefault(q, []).append(se)
        buf.write(",".join(cells) + "\n")

    parts = [f"{len(points)} grid points"]
    clamped = [f"{q}: {n}" for q, n in clamps.items() if n]
    parts.append("clamped bounds: " + (", ".join(clamped) if clamped else "none"))
    for q, ses in stderrs.items():
        parts.append(f"{q} max standard error {max(ses):.3g}")
    return buf.getvalue(), "summary: " + "; ".join(parts)


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

_GRID_NOTE = "M grid: log-spaced integers over the plotted range"


def _m_grid(stop, points=60):
    return RangeSpec("M", 1, stop, points, "log", integer=True)


PRESETS = {
    "fig2a": lambda: SweepSpec(
        "reading", {"m": 100, "N_S": 5, "M": 10},
        [RangeSpec("r_B", 0.01, 0.99, 50), RangeSpec("r_T", 0.01, 0.99, 50)],
        ["P_CN_QR", "P_H_CR", "log10_ratio_CN_H"],
        title="reading: log10(P_CN_QR/P_H_CR) over (r_B, r_T), m=100, N_S=5, M=10",
        notes=["long format: one row per (r_B, r_T) cell"]),
    "fig2b": lambda: SweepSpec(
        "reading", {"m": 100, "N_S": 5, "r_B": 0.95, "r_T": 0.9}, [_m_grid(1000)],
        ["P_CN_QR", "P_H_CR", "P_HLB_CR"],
        title="reading vs M, m=100, N_S=5, r_B=0.95, r_T=0.9", notes=[_GRID_NOTE]),
    "fig2c": lambda: SweepSpec(
        "reading", {"m": 100, "N_S": 5, "r_B": 1.0, "r_T": 0.4}, [_m_grid(100)],
        ["P_CN_QR", "P_H_CR", "P_HLB_CR"],
        title="reading vs M, m=100, N_S=5, r_B=1, r_T=0.4", notes=[_GRID_NOTE]),
    "fig3a": lambda: SweepSpec(
        "reading_star", {"m": 100, "r_B": 1.0, "MN_S": 12},
        [RangeSpec("r_T", 0.01, 0.99, 50), RangeSpec("N_S", 0.01, 10, 50, "log")],
        ["P_CNstar_QR", "P_H_CR", "log10_ratio_CNstar_H"],
        title="ideal background: log10(P_CNstar_QR/P_H_CR) over (r_T, N_S) at M N_S = 12",
        notes=["long format: one row per (r_T, N_S) cell; M = 12 / N_S is not rounded"]),
    "fig3b": lambda: SweepSpec(
        "reading_star", {"m": 100, "N_S": 5, "r_B": 1.0, "r_T": 0.95}, [_m_grid(1000)],
        ["P_CNstar_QR", "P_CN_QR", "P_H_CR", "P_HLB_CR"],
        title="ideal background vs M, m=100, N_S=5, r_T=0.95", notes=[_GRID_NOTE]),
    "fig3c": lambda: SweepSpec(
        "reading_star", {"m": 100, "N_S": 5, "r_B": 1.0, "r_T": 0.4}, [_m_grid(100)],
        ["P_CNstar_QR", "P_CN_QR", "P_H_CR", "P_HLB_CR"],
        title="ideal background vs M, m=100, N_S=5, r_T=0.4", notes=[_GRID_NOTE]),
    "fig4a": lambda: SweepSpec(
        "binary_reading", {"m": 2, "N_S": 0.1, "r_B": 1.0, "r_T": 0.4}, [_m_grid(1000)],
        ["P_CN_binary", "P_CNstar_binary"],
        title="binary reading vs M, N_S=0.1, r_B=1, r_T=0.4",
        notes=[_GRID_NOTE, "Bell-receiver and quantum Chernoff curves are out of scope"]),
    "fig4b": lambda: SweepSpec(
        "binary_reading", {"m": 2, "N_S": 10, "r_B": 1.0, "r_T": 0.4}, [_m_grid(100)],
        ["P_CN_binary", "P_CNstar_binary"],
        title="binary reading vs M, N_S=10, r_B=1, r_T=0.4",
        notes=[_GRID_NOTE, "Bell-receiver and quantum Chernoff curves are out of scope"]),
    "fig5": lambda: SweepSpec(
        "target_finding", {"m": 50, "N_S": 1e-3, "N_B": 20, "eta": 0.1},
        [RangeSpec("M", 1e3, 1e8, 61, "log", integer=True)],
        ["CTF_DD", "CTF_LB", "QTF_UB", "QTF_CN"],
        title="target finding vs M, m=50, N_S=1e-3, N_B=20, eta=0.1",
        notes=["M grid: log-spaced integers over 1e3..1e8"]),
}


def fig_presets():
    return sorted(PRESETS)


def preset(name):
    try:
        return PRESETS[name]()
    except KeyError:
        raise SpecError("preset", f"unknown preset {name!r}; valid: {fig_presets()}") from None
