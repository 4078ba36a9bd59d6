"""INI scenario runner.

A scenario declares named objects in ``[phi.NAME]``, ``[grid.NAME]``,
``[field.NAME]``, ``[curves.NAME]`` and ``[sequence.NAME]`` sections and a
pipeline of ``[stage.NAME]`` sections executed in file order.  A stage
runs one operation (``op = ...``) and may declare expectations as
``expect.<path> = <check>`` where ``<path>`` is a dotted path into the
stage result and ``<check>`` is one of::

    <= x    >= x    < x    > x    == x    != x
    in [a, b]    approx x tol    is true    is false    contains x

Input problems raise :class:`ScenarioError` carrying ``file:line``.
"""

from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import generators as gen
from . import suites
from .acsob import acc_check, acl_check, fuglede_subsequence, gradient, sobolev_report
from .conditions import Condition, SampleSpec, check_condition, check_equivalence
from .curve import (CurveFamily, curve_integral, curves_meeting_set, diagonal_family, read_family,
                    segment_family, star_family, write_family)
from .errors import InputError, IntegrityError, OrliczKitError, UnsupportedError
from .field import (BoxGrid, ScalarField, holder_check, in_lphi, luxemburg_norm, modular,
                    norm_modular_bounds, read_field, write_field)
from .modulus import (METHODS, SolverOptions, estimate_modulus_modular, estimate_modulus_norm,
                      verify_exceptional_witness)
from .phi import phi_from_descriptor

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2
KINDS = ("scenario", "phi", "grid", "field", "curves", "sequence", "stage")


class ScenarioError(InputError):
    pass


# ---------------------------------------------------------------------------
# JSON


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become the strings ``inf``, ``-inf``, ``nan``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, ScalarField):
        return {"grid": obj.grid.spec(), "kind": obj.kind}
    return str(obj)


def dumps(report) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# config parsing


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


@dataclass
class Config:
    path: str
    sections: dict            # name -> {key: value}, in file order
    lines: dict               # (section, key or None) -> line number

    def where(self, section: str, key: Optional[str] = None) -> str:
        ln = self.lines.get((section, key)) or self.lines.get((section, None))
        return f"{self.path}:{ln}" if ln else self.path

    def error(self, section: str, key: Optional[str], msg: str) -> ScenarioError:
        return ScenarioError(f"{self.where(section, key)}: [{section}] {msg}")


def parse_config(text: str, path: str = "<scenario>") -> Config:
    cp = configparser.ConfigParser(interpolation=None, strict=True, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: key outside any section") from None
    except configparser.ParsingError as exc:
        ln = exc.errors[0][0] if exc.errors else "?"
        raise ScenarioError(f"{path}:{ln}: cannot parse line") from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.message if hasattr(exc, 'message') else exc}") from None
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    lines = {}
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1).strip()
            lines[(current, None)] = i
            continue
        if current is None or line.lstrip().startswith(("#", ";")) or line[:1].isspace():
            continue
        k = _KEY_RE.match(line)
        if k:
            lines[(current, k.group(1).strip())] = i
    sections = {name: dict(cp[name]) for name in cp.sections()}
    cfg = Config(path, sections, lines)
    for name in sections:
        kind = name.split(".", 1)[0]
        if kind not in KINDS or (kind != "scenario" and "." not in name):
            raise cfg.error(name, None, f"unknown section; expected one of {', '.join(KINDS)} "
                                         "(as [kind.NAME], or [scenario])")
    return cfg


# ---------------------------------------------------------------------------
# expectations


_EXPECT_RE = re.compile(r"^(<=|>=|==|!=|<|>)\s*(.+)$")
_IN_RE = re.compile(r"^in\s*\[\s*([^,\]]+)\s*,\s*([^\]]+)\]$")
_APPROX_RE = re.compile(r"^approx\s+(\S+)\s+(\S+)$")


def _literal(text: str):
    t = text.strip()
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("inf", "+inf", "-inf", "nan"):
        return float(low)
    try:
        return float(t)
    except ValueError:
        return t


def _number(x):
    if isinstance(x, str) and x in ("inf", "-inf", "nan"):
        return float(x)
    if isinstance(x, (bool, np.bool_)):
        return None
    if isinstance(x, (int, float, np.integer, np.floating)):
        return float(x)
    return None


@dataclass
class Expectation:
    stage: str
    path: str
    check: str
    line: str

    def parse(self):
        c = self.check.strip()
        low = c.lower()
        if low in ("is true", "is false"):
            return ("is", low == "is true")
        m = _IN_RE.match(c)
        if m:
            return ("in", float(_literal(m.group(1))), float(_literal(m.group(2))))
        m = _APPROX_RE.match(c)
        if m:
            return ("approx", float(_literal(m.group(1))), float(_literal(m.group(2))))
        if low.startswith("contains "):
            return ("contains", _literal(c[len("contains "):]))
        m = _EXPECT_RE.match(c)
        if m:
            return (m.group(1), _literal(m.group(2)))
        raise ValueError(f"unrecognised expectation {c!r}")

    def evaluate(self, actual) -> bool:
        spec = self.parse()
        op = spec[0]
        if op == "is":
            return isinstance(actual, (bool, np.bool_)) and bool(actual) == spec[1]
        if op == "contains":
            return isinstance(actual, (list, tuple)) and any(_same(a, spec[1]) for a in actual)
        if op in ("==", "!="):
            eq = _same(actual, spec[1])
            return eq if op == "==" else not eq
        x = _number(actual)
        if x is None or math.isnan(x):
            return False
        if op == "in":
            return spec[1] <= x <= spec[2]
        if op == "approx":
            return abs(x - spec[1]) <= spec[2]
        ref = spec[1]
        if not isinstance(ref, float):
            return False
        return {"<=": x <= ref, ">=": x >= ref, "<": x < ref, ">": x > ref}[op]


def _same(a, b) -> bool:
    if isinstance(b, bool):
        return isinstance(a, (bool, np.bool_)) and bool(a) == b
    na, nb = _number(a), _number(b)
    if na is not None and nb is not None:
        return na == nb
    return a == b


_MISSING = object()


def lookup(result, path: str):
    cur = result
    for part in path.split("."):
        if isinstance(cur, dict) and part in cur:
            cur = cur[part]
        elif isinstance(cur, (list, tuple)) and re.fullmatch(r"-?\d+", part) and -len(cur) <= int(part) < len(cur):
            cur = cur[int(part)]
        elif isinstance(cur, (list, tuple)) and part == "length":
            cur = len(cur)
        else:
            return _MISSING
    return cur


# ---------------------------------------------------------------------------
# the runner


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class Scenario:
    cfg: Config
    base: Path
    out_dir: Path
    phis: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    # -- parameter helpers ------------------------------------------------

    def _get(self, sec, params, key, default=_MISSING):
        if key in params:
            return params[key]
        if default is _MISSING:
            raise self.cfg.error(sec, None, f"missing key {key!r}")
        return default

    def _float(self, sec, params, key, default=_MISSING):
        raw = self._get(sec, params, key, default)
        if raw is None or isinstance(raw, float):
            return raw
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise self.cfg.error(sec, key, f"{key} = {raw!r} is not a number") from None

    def _int(self, sec, params, key, default=_MISSING):
        v = self._float(sec, params, key, default)
        if v is None:
            return None
        if v != int(v):
            raise self.cfg.error(sec, key, f"{key} must be an integer")
        return int(v)

    def _bool(self, sec, params, key, default=False):
        raw = params.get(key)
        if raw is None:
            return default
        low = str(raw).strip().lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise self.cfg.error(sec, key, f"{key} must be true or false")

    def _ref(self, sec, params, key, table, kind, default=_MISSING):
        name = self._get(sec, params, key, default)
        if name is None:
            return None
        name = name.strip()
        if name not in table:
            raise self.cfg.error(sec, key, f"{key} = {name!r} does not name a defined {kind}")
        return table[name]

    def _path(self, raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else self.base / p

    def _out(self, raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else self.out_dir / p

    # -- object sections --------------------------------------------------

    def build(self):
        for sec, params in self.cfg.sections.items():
            kind, _, name = sec.partition(".")
            try:
                if kind == "phi":
                    box = self._ref(sec, params, "grid", self.grids, "grid", None)
                    self.phis[name] = phi_from_descriptor(self._get(sec, params, "desc"),
                                                          box.extents if box else None)
                elif kind == "grid":
                    if "refine" in params:
                        self.grids[name] = self._ref(sec, params, "refine", self.grids, "grid").refine()
                    else:
                        self.grids[name] = BoxGrid.parse(self._get(sec, params, "spec"))
                elif kind == "field":
                    self.fields[name] = self._field(sec, params)
                elif kind == "curves":
                    self.families[name] = self._curves(sec, params)
                elif kind == "sequence":
                    self.sequences[name] = (sec, params)
            except ScenarioError:
                raise
            except OrliczKitError as exc:
                raise self.cfg.error(sec, None, str(exc)) from None
            except OSError as exc:
                raise self.cfg.error(sec, "file", f"cannot read {exc.filename}: {exc.strerror}") from None

    _FIELD_KEYS = {"gen", "file", "grid", "inf_is_null", "kind"}

    def _field(self, sec, params) -> ScalarField:
        if "file" in params:
            f = read_field(self._path(params["file"]), self._bool(sec, params, "inf_is_null"))
            g = self._ref(sec, params, "grid", self.grids, "grid", None)
            if g is not None and g != f.grid:
                raise self.cfg.error(sec, "file", f"field grid {f.grid.spec()} differs from {g.spec()}")
            return f
        g = self._ref(sec, params, "grid", self.grids, "grid")
        name = self._get(sec, params, "gen")
        kw = {k: v for k, v in params.items() if k not in self._FIELD_KEYS}
        return gen.generate(name, g, **kw)

    def _curves(self, sec, params) -> CurveFamily:
        if "file" in params:
            fam = read_family(self._path(params["file"]))
        else:
            kind = self._get(sec, params, "gen")
            if kind == "union":
                names = [n.strip() for n in self._get(sec, params, "of").split(",") if n.strip()]
                fams = []
                for n in names:
                    if n not in self.families:
                        raise self.cfg.error(sec, "of", f"{n!r} does not name a defined curve family")
                    fams.append(self.families[n])
                if not fams:
                    raise self.cfg.error(sec, "of", "union of nothing")
                fam = fams[0]
                for f in fams[1:]:
                    fam = fam.union(f)
                return fam
            if kind == "meeting":
                base = self._ref(sec, params, "of", self.families, "curve family")
                mask = self._ref(sec, params, "mask", self.fields, "field")
                return curves_meeting_set(base, mask)
            g = self._ref(sec, params, "grid", self.grids, "grid")
            box = g.extents
            count = self._int(sec, params, "count")
            if kind == "segments":
                fam = segment_family(self._int(sec, params, "axis"), count, box)
            elif kind == "diagonals":
                fam = diagonal_family(count, box, self._float(sec, params, "slope", 0.5),
                                      self._int(sec, params, "axis", 1))
            elif kind == "star":
                center = params.get("center")
                c = [float(v) for v in center.split(",")] if center else None
                fam = star_family(count, box, c, self._float(sec, params, "radius", None))
            else:
                raise self.cfg.error(sec, "gen", f"unknown curve generator {kind!r}; "
                                                  "known: segments, diagonals, star, union, meeting, or file =")
        g = self._ref(sec, params, "grid", self.grids, "grid", None)
        if g is not None:
            fam.check_inside(g)
        return fam

    def _sequence(self, sec_ref, params_ref, key):
        name = self._get(sec_ref, params_ref, key).strip()
        if name not in self.sequences:
            raise self.cfg.error(sec_ref, key, f"{key} = {name!r} does not name a defined sequence")
        sec, params = self.sequences[name]
        g = self._ref(sec, params, "grid", self.grids, "grid")
        kind = self._get(sec, params, "gen")
        if kind != "strip_sequence":
            raise self.cfg.error(sec, "gen", f"unknown sequence generator {kind!r}; known: strip_sequence")
        count = self._int(sec, params, "count")
        axis = self._int(sec, params, "axis", 0)
        center = self._float(sec, params, "center", 0.0)
        wp = self._float(sec, params, "width_power", 3.0)
        start = self._int(sec, params, "start", 1)
        if not 0 <= axis < g.n:
            raise self.cfg.error(sec, "axis", "axis out of range")
        return (gen.strip(g, axis, center, float(i) ** -wp, float(i)) for i in range(start, start + count))

    # -- stages -----------------------------------------------------------

    def _opts(self, sec, p) -> SolverOptions:
        o = SolverOptions()
        if "method" in p:
            if p["method"] not in METHODS:
                raise self.cfg.error(sec, "method", f"method must be one of {METHODS}")
            o.method = p["method"]
        for k in ("max_iter", "min_iter", "check_every", "patience"):
            if k in p:
                setattr(o, k, self._int(sec, p, k))
        for k in ("tol", "norm_rtol", "inner_slack", "step", "alpha0", "balance"):
            if k in p:
                setattr(o, k, self._float(sec, p, k))
        return o

    def _samples(self, sec, p) -> SampleSpec:
        g = self._ref(sec, p, "grid", self.grids, "grid", None)
        if g is not None:
            box = g.extents
        elif "box" in p:
            try:
                box = [tuple(float(v) for v in iv.split(":")) for iv in p["box"].split(",")]
            except ValueError:
                box = None
            if not box or any(len(iv) != 2 or not iv[0] < iv[1] for iv in box):
                raise self.cfg.error(sec, "box", "box must look like a:b,c:d with a < b, c < d")
        else:
            raise self.cfg.error(sec, None, "a condition check needs grid = or box = a:b,c:d")
        kw = {}
        for k in ("x_per_axis", "t_count", "beta_count"):
            if k in p:
                kw[k] = self._int(sec, p, k)
        for k in ("t_min", "t_max", "beta_min", "beta_max"):
            if k in p:
                kw[k] = self._float(sec, p, k)
        return SampleSpec(box, **kw)

    def run_stage(self, sec, p) -> dict:
        op = self._get(sec, p, "op").strip()
        handler = getattr(self, "_op_" + op.replace("-", "_"), None)
        if handler is None:
            raise self.cfg.error(sec, "op", f"unknown op {op!r}; known: {', '.join(OPS)}")
        return handler(sec, p)

    def _phi(self, sec, p, key="phi"):
        return self._ref(sec, p, key, self.phis, "phi")

    def _f(self, sec, p, key="field", default=_MISSING):
        return self._ref(sec, p, key, self.fields, "field", default)

    def _fam(self, sec, p, key="curves"):
        return self._ref(sec, p, key, self.families, "curve family")

    def _op_modular(self, sec, p):
        return {"value": modular(self._phi(sec, p), self._f(sec, p))}

    def _op_norm(self, sec, p):
        r = luxemburg_norm(self._phi(sec, p), self._f(sec, p), self._float(sec, p, "tol", 1e-10))
        return r.as_dict(self._bool(sec, p, "trace"))

    def _op_in_lphi(self, sec, p):
        return in_lphi(self._phi(sec, p), self._f(sec, p))

    def _op_holder(self, sec, p):
        return holder_check(self._phi(sec, p), self._f(sec, p, "f"), self._f(sec, p, "g"),
                            self._float(sec, p, "tol", 1e-6)).as_dict()

    def _op_norm_bounds(self, sec, p):
        return norm_modular_bounds(self._phi(sec, p), self._f(sec, p))

    def _op_condition(self, sec, p):
        name = self._get(sec, p, "condition")
        kw = {}
        for k in ("p", "L", "beta", "delta", "L_cap"):
            if k in p:
                kw[k] = self._float(sec, p, k)
        if "levels" in p:
            kw["levels"] = self._int(sec, p, "levels")
        cond = Condition(name, **kw)
        return check_condition(self._phi(sec, p), cond, self._samples(sec, p)).as_dict()

    def _op_equivalence(self, sec, p):
        return check_equivalence(self._phi(sec, p), self._phi(sec, p, "psi"), self._float(sec, p, "L"),
                                 self._samples(sec, p)).as_dict()

    def _op_curve_integral(self, sec, p):
        u, fam = self._f(sec, p), self._fam(sec, p)
        step = self._float(sec, p, "step", None)
        vals = [curve_integral(u, c, step) for c in fam]
        return {"values": vals, "min": min(vals) if vals else None, "max": max(vals) if vals else None,
                "curves": len(vals)}

    def _modulus(self, sec, p, norm: bool):
        phi, fam = self._phi(sec, p), self._fam(sec, p)
        g = self._ref(sec, p, "grid", self.grids, "grid")
        est = estimate_modulus_norm if norm else estimate_modulus_modular
        res = est(phi, fam, g, self._opts(sec, p))
        if "density_out" in p:
            path = self._out(p["density_out"])
            write_field(res.density, path)
            self.outputs.append(str(p["density_out"]))
        return res.as_dict(self._bool(sec, p, "with_density"))

    def _op_modulus_modular(self, sec, p):
        return self._modulus(sec, p, False)

    def _op_modulus_norm(self, sec, p):
        return self._modulus(sec, p, True)

    def _op_witness(self, sec, p):
        r = verify_exceptional_witness(self._f(sec, p), self._fam(sec, p), self._phi(sec, p),
                                       self._float(sec, p, "growth", 4.0), self._float(sec, p, "absolute", 1e3),
                                       self._float(sec, p, "step", None), self._f(sec, p, "field_fine", None))
        r["modular"] = modular(self._phi(sec, p), self._f(sec, p))
        r["norm"] = luxemburg_norm(self._phi(sec, p), self._f(sec, p)).value
        return r

    def _op_acl(self, sec, p):
        rep = acl_check(self._f(sec, p), self._f(sec, p, "field_fine"), self._float(sec, p, "jump_tol", None))
        if "csv_out" in p:
            write_slices_csv(rep, self._out(p["csv_out"]))
            self.outputs.append(str(p["csv_out"]))
        return rep.as_dict()

    def _op_sobolev(self, sec, p):
        return sobolev_report(self._phi(sec, p), self._f(sec, p), self._f(sec, p, "field_fine"),
                              self._float(sec, p, "jump_tol", None))

    def _op_gradient(self, sec, p):
        gr = gradient(self._f(sec, p))
        out = {"max_magnitude": float(np.max(gr.magnitude.values))}
        if "phi" in p:
            out["norm"] = luxemburg_norm(self._phi(sec, p), gr.magnitude).value
        return out

    def _op_acc(self, sec, p):
        phi = self._phi(sec, p) if "phi" in p else None
        return acc_check(self._f(sec, p), self._f(sec, p, "field_fine"), self._fam(sec, p), phi,
                         self._f(sec, p, "witness", None), self._f(sec, p, "witness_fine", None),
                         self._float(sec, p, "jump_tol", None), self._float(sec, p, "growth", 4.0),
                         self._float(sec, p, "absolute", 1e3), self._bool(sec, p, "estimate_modulus"),
                         self._ref(sec, p, "grid", self.grids, "grid", None), self._opts(sec, p))

    def _op_fuglede(self, sec, p):
        r = fuglede_subsequence(self._phi(sec, p), self._sequence(sec, p, "sequence"), self._fam(sec, p),
                                self._float(sec, p, "decay_tol", 1e-3), self._float(sec, p, "step", None),
                                self._int(sec, p, "max_k", None))
        r.pop("liminf_representative", None)
        return r

    def _op_write_field(self, sec, p):
        write_field(self._f(sec, p), self._out(self._get(sec, p, "path")))
        self.outputs.append(p["path"])
        return {"path": p["path"]}

    def _op_write_curves(self, sec, p):
        write_family(self._fam(sec, p), self._out(self._get(sec, p, "path")))
        self.outputs.append(p["path"])
        return {"path": p["path"]}

    def _op_suite(self, sec, p):
        name = self._get(sec, p, "name").strip()
        if name not in suites.SUITES:
            raise self.cfg.error(sec, "name", f"unknown suite {name!r}; known: {', '.join(sorted(suites.SUITES))}")
        fn = suites.SUITES[name]
        kw = {}
        for k, v in p.items():
            if k in ("op", "name") or k.startswith("expect."):
                continue
            if k in ("grid", "mod_grid"):
                kw[k] = self._ref(sec, p, k, self.grids, "grid")
            elif k in ("phi_desc", "witness_phi"):
                kw[k] = v
            elif k == "csv_out":
                kw["csv_path"] = str(self._out(v))
                self.outputs.append(v)
            elif k in ("counts", "ps"):
                try:
                    kw[k] = tuple(float(x) if k == "ps" else int(x) for x in v.split(","))
                except ValueError:
                    raise self.cfg.error(sec, k, f"{k} must be a comma-separated list of numbers") from None
            else:
                kw[k] = self._float(sec, p, k)
                if kw[k] == int(kw[k]) and k in ("count", "m", "m_y", "m_z", "curves", "families", "k_check"):
                    kw[k] = int(kw[k])
        try:
            return fn(**kw)
        except TypeError as exc:
            raise self.cfg.error(sec, None, f"suite {name}: {exc}") from None


OPS = sorted(n[4:] for n in dir(Scenario) if n.startswith("_op_"))


def write_slices_csv(rep, path) -> None:
    with open(path, "w") as fh:
        fh.write("axis,slice,verdict\n")
        for k, verdicts in rep.verdicts.items():
            for j, v in enumerate(verdicts):
                fh.write(f"{k},{j},{v}\n")


# ---------------------------------------------------------------------------


def builtin_scenarios() -> list:
    """Names of the scenarios shipped with the package."""
    root = resources.files("orlicz_kit") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def builtin_path(name: str):
    return resources.files("orlicz_kit") / "scenarios" / f"{name}.ini"


def resolve(target: str) -> tuple[str, str, Path]:
    """``(text, label, base_dir)`` for a path or a builtin scenario name."""
    p = Path(target)
    if p.is_file():
        return p.read_text(), str(p), p.resolve().parent
    if target in builtin_scenarios():
        return builtin_path(target).read_text(), f"builtin:{target}", Path.cwd()
    raise ScenarioError(f"{target}: no such file or builtin scenario (see 'orlicz-kit list')")


def run_scenario(target: str, out: Optional[str] = None, out_dir: Optional[str] = None) -> tuple[int, dict]:
    """Run a scenario file or builtin; return ``(exit_code, report)``.

    The report is written to ``out`` (or the scenario's ``report`` key) when
    given.  Input errors surface as :class:`ScenarioError`.
    """
    text, label, base = resolve(target)
    cfg = parse_config(text, label)
    head = cfg.sections.get("scenario", {})
    name = head.get("name", Path(target).stem)
    odir = Path(out_dir) if out_dir else base
    sc = Scenario(cfg, base, odir)
    sc.build()
    stages, expectations = {}, []
    for sec, params in cfg.sections.items():
        if not sec.startswith("stage."):
            continue
        stage = sec.split(".", 1)[1]
        exps = []
        for k, v in params.items():
            if k.startswith("expect."):
                e = Expectation(stage, k[len("expect."):], v, cfg.where(sec, k))
                try:
                    e.parse()
                except ValueError as exc:
                    raise cfg.error(sec, k, str(exc)) from None
                exps.append(e)
        try:
            result = sc.run_stage(sec, params)
        except ScenarioError:
            raise
        except (InputError, UnsupportedError, IntegrityError) as exc:
            raise cfg.error(sec, None, f"{type(exc).__name__}: {exc}") from None
        except OSError as exc:
            raise cfg.error(sec, None, f"cannot write {exc.filename}: {exc.strerror}") from None
        result = to_jsonable(result)
        stages[stage] = result
        for e in exps:
            actual = lookup(result, e.path)
            ok = actual is not _MISSING and e.evaluate(actual)
            expectations.append({"stage": stage, "path": e.path, "expect": e.check, "where": e.line,
                                 "actual": None if actual is _MISSING else actual,
                                 "missing": actual is _MISSING, "ok": bool(ok)})
    failed = [e for e in expectations if not e["ok"]]
    report = {"scenario": name, "stages": stages, "expectations": expectations,
              "outputs": sc.outputs, "status": "fail" if failed else "pass"}
    if "description" in head:
        report["description"] = head["description"]
    dest = out or head.get("report")
    if dest:
        path = Path(dest) if out else sc._out(dest)
        path.write_text(dumps(report))
    return (EXIT_FAILED if failed else EXIT_OK), report
