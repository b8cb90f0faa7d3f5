"""YAML scenario documents: parsing with located diagnostics, and serialisation.

A document declares a process (by builder name or as an explicit matrix),
the parties with their per-setting instruments, an optional depolarising
visibility and an optional inequality.  Complex entries are written as
``[re, im]`` pairs (a bare number means a real entry; the string form
``"(re, im)"`` is accepted too).  See ``stcorr/data/*.yaml`` for examples.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .correlations import InequalityFunctional, Party, Scenario, preset, PRESETS
from .operations import (CPMap, Instrument, InvalidOperationError, POVM,
                         BlochSetting, choi_from_kraus, povm_to_instrument)
from .optimize import projective_setting_instrument
from .processes import (InvalidProcessError, ProcessMatrix, Structure,
                        channel_to_process, cnot_process, depolarize,
                        ghz_process, identity_process, validate)
from .tensor import PSD_TOL, LayoutError, Operator, Port, SpaceLabel, inp, out

ROLES = ("instrument", "preparation", "measurement")


class ScenarioParseError(ValueError):
    """Malformed document; ``location`` names the line and field."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ScenarioValidationError(ValueError):
    """Well-formed document describing an invalid scenario."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class _Map(dict):
    """dict remembering the source line of each key."""

    lines: dict


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_map(loader, node):
    loader.flatten_mapping(node)
    m = _Map()
    m.lines = {}
    for k_node, v_node in node.value:
        key = loader.construct_object(k_node, deep=True)
        m[key] = loader.construct_object(v_node, deep=True)
        m.lines[key] = k_node.start_mark.line + 1
    m.line = node.start_mark.line + 1
    return m


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_map)


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    name: str = ""
    visibility: float = 1.0
    inequality: InequalityFunctional | None = None
    roles: tuple[tuple[str, str], ...] = ()

    def effective_scenario(self) -> Scenario:
        """The scenario with depolarising noise applied to the process."""
        if self.visibility == 1:
            return self.scenario
        return Scenario(depolarize(self.scenario.process, self.visibility),
                        self.scenario.parties)


class _Ctx:
    """Tracks the field path for diagnostics."""

    def __init__(self, path="", line=None):
        self.path, self.line = path, line

    def at(self, mapping, key):
        line = getattr(mapping, "lines", {}).get(key, self.line)
        sep = "." if self.path else ""
        return _Ctx(f"{self.path}{sep}{key}", line)

    def item(self, seq, i):
        item = seq[i]
        line = getattr(item, "line", self.line)
        return _Ctx(f"{self.path}[{i}]", line)

    @property
    def where(self):
        path = self.path or "document"
        return f"line {self.line} ({path})" if self.line else path

    def fail(self, msg):
        raise ScenarioParseError(msg, self.where)

    def invalid(self, msg):
        raise ScenarioValidationError(msg, self.where)


def _is_kind(v, kind) -> bool:
    if kind is bool:
        return isinstance(v, bool)
    if isinstance(v, bool):
        return False
    return isinstance(v, kind)


def _get(m, key, ctx, default=..., kind=None):
    if not isinstance(m, dict):
        ctx.fail("expected a mapping")
    if key not in m:
        if default is ...:
            ctx.fail(f"missing field {key!r}")
        return default, ctx.at(m, key)
    v, c = m[key], ctx.at(m, key)
    if kind is not None and not _is_kind(v, kind):
        name = "number" if kind == (int, float) else kind.__name__
        c.fail(f"expected {name}, got {type(v).__name__}")
    return v, c


_PAIR = re.compile(r"^\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)$")


def _complex(v, ctx) -> complex:
    if isinstance(v, bool):
        ctx.fail("boolean is not a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    if isinstance(v, str):
        m = _PAIR.match(v.strip())
        if m:
            try:
                return complex(float(m.group(1)), float(m.group(2)))
            except ValueError:
                pass
    ctx.fail(f"cannot read complex number from {v!r}; use [re, im]")


def _matrix(v, ctx) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        ctx.fail("matrix must be a list of rows")
    n = len(v)
    if any(len(r) != n for r in v):
        ctx.fail(f"matrix must be square ({n} rows)")
    return np.array([[_complex(x, ctx) for x in r] for r in v], dtype=complex)


def _angle(v, ctx):
    if not _is_kind(v, (int, float)):
        ctx.fail("angle must be a number (radians)")
    return float(v)


def _label(d, ctx) -> SpaceLabel:
    party, _ = _get(d, "party", ctx, kind=str)
    port, pc = _get(d, "port", ctx, "none", kind=str)
    dim, dc = _get(d, "dim", ctx, 2, kind=int)
    try:
        return SpaceLabel(party, Port(port.lower()), dim)
    except ValueError as exc:
        pc.fail(str(exc))


def _kraus_list(v, ctx):
    if not isinstance(v, list) or not v:
        ctx.fail("kraus must be a non-empty list of matrices")
    ks = []
    for i in range(len(v)):
        c = ctx.item(v, i)
        k = v[i]
        if not isinstance(k, list) or not k:
            c.fail("Kraus operator must be a list of rows")
        rows = [[_complex(x, c) for x in r] for r in k]
        if len({len(r) for r in rows}) != 1:
            c.fail("ragged Kraus operator")
        ks.append(np.array(rows))
    return ks


def _build_process(doc, ctx) -> ProcessMatrix:
    builder, bc = _get(doc, "builder", ctx, kind=str)
    try:
        if builder == "identity":
            d, _ = _get(doc, "d", ctx, 2, kind=int)
            first, _ = _get(doc, "first", ctx, "A", kind=str)
            second, _ = _get(doc, "second", ctx, "B", kind=str)
            return identity_process(d, first, second)
        if builder == "ghz_kappa":
            kappa, kc = _get(doc, "kappa", ctx, kind=(int, float))
            if not 0 <= kappa <= 1:
                kc.invalid(f"kappa must lie in [0, 1], got {kappa}")
            return ghz_process(float(kappa))
        if builder == "cnot":
            return cnot_process()
        if builder == "channel":
            src, _ = _get(doc, "source", ctx, "A", kind=str)
            tgt, _ = _get(doc, "target", ctx, "B", kind=str)
            kv, kc = _get(doc, "kraus", ctx)
            ks = _kraus_list(kv, kc)
            dout, din = ks[0].shape
            if any(k.shape != (dout, din) for k in ks):
                kc.fail("Kraus operators have inconsistent shapes")
            cp = choi_from_kraus(ks, inp("in", din), out("out", dout))
            if not cp.is_trace_preserving():
                kc.invalid("channel is not trace preserving: tr_{B_I} T = 1^{A_O} "
                           "(sum_k K^dagger K = 1) is violated")
            return channel_to_process(cp, src, tgt)
        if builder == "matrix":
            lv, lc = _get(doc, "layout", ctx)
            if not isinstance(lv, list) or not lv:
                lc.fail("layout must be a non-empty list")
            layout = [_label(lv[i], lc.item(lv, i)) for i in range(len(lv))]
            ev, ec = _get(doc, "entries", ctx)
            m = _matrix(ev, ec)
            sv, sc = _get(doc, "structure", ctx, "comb")
            order = None
            if isinstance(sv, dict):
                kind, kc = _get(sv, "kind", sc, kind=str)
                order, _ = _get(sv, "order", sc, None)
            else:
                kind = sv
            try:
                structure = Structure(kind)
            except ValueError:
                sc.fail(f"unknown structure {kind!r}; use one of "
                        f"{[s.value for s in Structure]}")
            try:
                return ProcessMatrix(Operator(m, layout), structure, order)
            except LayoutError as exc:
                ec.invalid(str(exc))
        bc.fail(f"unknown process builder {builder!r}")
    except (InvalidProcessError, LayoutError, InvalidOperationError) as exc:
        ctx.invalid(str(exc))


def _build_setting(s, role, party, ctx) -> Instrument:
    if not isinstance(s, dict):
        ctx.fail("setting must be a mapping")
    outcomes, _ = _get(s, "outcomes", ctx, None, kind=list)
    try:
        if "phi" in s:
            phi = _angle(s["phi"], ctx.at(s, "phi"))
            theta = _angle(s["theta"], ctx.at(s, "theta")) if "theta" in s else None
            if role not in ROLES:
                ctx.fail(f"projective settings need a role in {ROLES}")
            return projective_setting_instrument(role, party, BlochSetting(phi, theta))
        if "povm" in s:
            pv, pc = _get(s, "povm", ctx, kind=list)
            els = [_matrix(pv[i], pc.item(pv, i)) for i in range(len(pv))]
            d = els[0].shape[0]
            if role == "measurement":
                lab, d_out = inp(party, d), 1
            elif role == "preparation":
                lab, d_out = out(party, d), d
            else:
                d_out, _ = _get(s, "d_out", ctx, kind=int)
                lab = SpaceLabel(party, Port.NONE, d)
            povm = POVM([Operator(e, [lab]) for e in els], outcomes)
            return povm_to_instrument(povm, d_out, party=party)
        if "instrument" in s:
            iv, ic = _get(s, "instrument", ctx, kind=list)
            d_in, _ = _get(s, "d_in", ctx, kind=int)
            d_out, _ = _get(s, "d_out", ctx, kind=int)
            lin, lout = inp(party, d_in), out(party, d_out)
            branches = []
            for i in range(len(iv)):
                m = _matrix(iv[i], ic.item(iv, i))
                try:
                    branches.append(CPMap(Operator(m, (lin, lout)), lin, lout))
                except LayoutError as exc:
                    ic.item(iv, i).invalid(str(exc))
            return Instrument(branches, outcomes)
    except InvalidOperationError as exc:
        ctx.invalid(str(exc))
    ctx.fail("setting needs one of 'phi', 'povm' or 'instrument'")


def _build_inequality(v, ctx):
    if v is None:
        return None
    if isinstance(v, str):
        try:
            return preset(v)
        except KeyError as exc:
            ctx.fail(str(exc.args[0]))
    name, _ = _get(v, "name", ctx, "custom", kind=str)
    bound, _ = _get(v, "bound", ctx, kind=(int, float))
    absolute, _ = _get(v, "absolute", ctx, False, kind=bool)
    tv, tc = _get(v, "terms", ctx, kind=list)
    coeffs = {}
    for i in range(len(tv)):
        c = tc.item(tv, i)
        settings, _ = _get(tv[i], "settings", c, kind=list)
        coeff, _ = _get(tv[i], "coeff", c, kind=(int, float))
        coeffs[tuple(settings)] = coeff
    try:
        return InequalityFunctional(name, coeffs, float(bound), absolute)
    except ValueError as exc:
        tc.fail(str(exc))


def parse_scenario(text: str, tol: float = PSD_TOL) -> ScenarioFile:
    """Parse and validate a scenario document.

    Raises
    ------
    ScenarioParseError
        For YAML syntax errors and malformed or missing fields.
    ScenarioValidationError
        When the document is well formed but describes an invalid process,
        instrument or layout.
    """
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", where) from None
    ctx = _Ctx("", 1)
    if not isinstance(doc, dict):
        ctx.fail("document must be a mapping")
    name, _ = _get(doc, "name", ctx, "", kind=str)
    pv, pc = _get(doc, "process", ctx)
    process = _build_process(pv, pc)
    report = validate(process, tol)
    if not report.valid:
        pc.invalid("invalid process: " + "; ".join(report.failures()))

    parties_doc, ptc = _get(doc, "parties", ctx, kind=list)
    parties, roles = [], []
    for i in range(len(parties_doc)):
        c = ptc.item(parties_doc, i)
        pd = parties_doc[i]
        pname, _ = _get(pd, "name", c, kind=str)
        role, rc = _get(pd, "role", c, "instrument", kind=str)
        if role not in ROLES:
            rc.fail(f"role must be one of {ROLES}")
        sv, sc = _get(pd, "settings", c, kind=list)
        if not sv:
            sc.fail("at least one setting is required")
        ins = [_build_setting(sv[j], role, pname, sc.item(sv, j)) for j in range(len(sv))]
        try:
            parties.append(Party(pname, ins))
        except ValueError as exc:
            c.invalid(str(exc))
        roles.append((pname, role))
    try:
        scenario = Scenario(process, parties)
    except (LayoutError, ValueError) as exc:
        ptc.invalid(str(exc))

    vis, vc = _get(doc, "visibility", ctx, 1.0, kind=(int, float))
    if not 0 <= vis <= 1:
        vc.invalid(f"visibility must lie in [0, 1], got {vis}")
    iv, ic = _get(doc, "inequality", ctx, None)
    ineq = _build_inequality(iv, ic)
    return ScenarioFile(scenario, name, float(vis), ineq, tuple(roles))


def load_scenario(path, tol: float = PSD_TOL) -> ScenarioFile:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), tol)


def bundled(name: str) -> str:
    """Text of a bundled example scenario, e.g. ``bundled("identity_chsh")``."""
    return resources.files("stcorr.data").joinpath(f"{name}.yaml").read_text(encoding="utf-8")


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("stcorr.data").iterdir()
                  if p.name.endswith(".yaml"))


def _pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _label_doc(lab: SpaceLabel) -> dict:
    return {"party": lab.party, "port": lab.port.value, "dim": lab.dimension}


def to_document(sf: ScenarioFile) -> dict:
    """Explicit-matrix document that parses back to an identical scenario."""
    proc = sf.scenario.process
    structure = {"kind": proc.structure.value}
    if proc.order:
        structure["order"] = [list(g) if len(g) > 1 else g[0] for g in proc.order]
    doc = {"name": sf.name,
           "process": {"builder": "matrix",
                       "layout": [_label_doc(l) for l in proc.layout],
                       "structure": structure,
                       "entries": _pairs(proc.matrix)},
           "parties": []}
    roles = dict(sf.roles)
    for p in sf.scenario.parties:
        settings = []
        for ins in p.instruments:
            settings.append({"instrument": [_pairs(b.choi.matrix) for b in ins.branches],
                             "d_in": ins.input_label.dimension,
                             "d_out": ins.output_label.dimension,
                             "outcomes": list(ins.outcomes)})
        doc["parties"].append({"name": p.name, "role": roles.get(p.name, "instrument"),
                               "settings": settings})
    doc["visibility"] = sf.visibility
    f = sf.inequality
    if f is not None:
        if f.name in PRESETS and PRESETS[f.name]() == f:
            doc["inequality"] = f.name
        else:
            doc["inequality"] = {"name": f.name, "bound": f.bound, "absolute": f.absolute,
                                 "terms": [{"settings": list(k), "coeff": v}
                                           for k, v in f.coefficients.items()]}
    return doc


def serialize_scenario(sf: ScenarioFile) -> str:
    return yaml.safe_dump(to_document(sf), sort_keys=False, default_flow_style=None)
