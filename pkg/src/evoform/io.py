"""JSON documents for forms, charts, pseudostructures and relations.

Documents are saved with sorted keys so that save -> load -> save is
byte-stable.  Schema problems raise :class:`SchemaError` carrying a JSON
pointer to the offending value.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from . import expr as ex
from .closure import Pseudostructure
from .evolution import MaterialSystemSpec
from .forms import DifferentialForm, default_coords
from .geometry import Chart


class SchemaError(ValueError):
    def __init__(self, pointer, message):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _require(doc, key, pointer, kinds=None):
    if not isinstance(doc, dict):
        raise SchemaError(pointer, "expected an object")
    if key not in doc:
        raise SchemaError(f"{pointer}/{key}", "missing")
    v = doc[key]
    if kinds is not None and not isinstance(v, kinds):
        raise SchemaError(f"{pointer}/{key}", f"expected {_kind_name(kinds)}")
    return v


def _kind_name(kinds):
    kinds = kinds if isinstance(kinds, tuple) else (kinds,)
    return " or ".join(k.__name__ for k in kinds)


def _expr(text, coords, pointer):
    if isinstance(text, bool) or not isinstance(text, (str, int, float)):
        raise SchemaError(pointer, "expected an expression string")
    if not isinstance(text, str):
        return ex.as_expr(text)
    try:
        return ex.parse_expr(text, coords)
    except ex.ExprError as err:
        raise SchemaError(pointer, str(err)) from None


def expr_to_text(e) -> str:
    return ex.to_string(ex.simplify(e))


# forms ------------------------------------------------------------------


def form_to_doc(t: DifferentialForm, include_coords=True) -> dict:
    doc = {"dim": t.dim, "degree": t.degree,
           "terms": [{"indices": list(k), "coeff": expr_to_text(c)} for k, c in t.items()]}
    if include_coords and tuple(t.coords) != default_coords(t.dim):
        doc["coords"] = list(t.coords)
    return doc


def form_from_doc(doc, coords=None, pointer="") -> DifferentialForm:
    dim = _require(doc, "dim", pointer, int)
    degree = _require(doc, "degree", pointer, int)
    terms = _require(doc, "terms", pointer, list)
    if dim < 0:
        raise SchemaError(f"{pointer}/dim", "must be non-negative")
    if degree < 0:
        raise SchemaError(f"{pointer}/degree", "must be non-negative")
    if "coords" in doc:
        doc_coords = doc["coords"]
        if not isinstance(doc_coords, list) or not all(isinstance(c, str) for c in doc_coords):
            raise SchemaError(f"{pointer}/coords", "expected a list of names")
        if coords is not None and tuple(coords) != tuple(doc_coords):
            raise SchemaError(f"{pointer}/coords", "does not match the chart coordinates")
        coords = doc_coords
    if coords is None:
        coords = default_coords(dim)
    coords = tuple(coords)
    if len(coords) != dim:
        raise SchemaError(f"{pointer}/dim", f"chart has {len(coords)} coordinates")
    out = {}
    for i, term in enumerate(terms):
        tp = f"{pointer}/terms/{i}"
        idx = _require(term, "indices", tp, list)
        if not all(isinstance(j, int) and not isinstance(j, bool) for j in idx):
            raise SchemaError(f"{tp}/indices", "indices must be integers")
        if len(idx) != degree:
            raise SchemaError(f"{tp}/indices", f"expected {degree} indices")
        if any(j < 0 or j >= dim for j in idx):
            raise SchemaError(f"{tp}/indices", "index out of range")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise SchemaError(f"{tp}/indices", "indices must be strictly increasing")
        if tuple(idx) in out:
            raise SchemaError(f"{tp}/indices", "duplicate term")
        out[tuple(idx)] = _expr(_require(term, "coeff", tp), coords, f"{tp}/coeff")
    return DifferentialForm(coords, degree, out)


# charts -----------------------------------------------------------------


def chart_to_doc(c: Chart) -> dict:
    doc = {"dim": c.dim, "coords": list(c.coords),
           "metric": None if c.metric is None else [[expr_to_text(e) for e in row] for row in c.metric],
           "connection": None if c._connection is None or c.metric is not None and _is_levi_civita(c)
           else [[[expr_to_text(e) for e in r] for r in m] for m in c._connection],
           "sample_box": [list(b) for b in c.sample_box]}
    if not c.star_shaped:
        doc["star_shaped"] = False
    return doc


def _is_levi_civita(c):
    from .geometry import christoffel_from_metric
    return c._connection == christoffel_from_metric(c)


def chart_from_doc(doc, pointer="") -> Chart:
    coords = _require(doc, "coords", pointer, list)
    if not all(isinstance(x, str) and x.isidentifier() for x in coords):
        raise SchemaError(f"{pointer}/coords", "coordinate names must be identifiers")
    if len(set(coords)) != len(coords):
        raise SchemaError(f"{pointer}/coords", "duplicate coordinate name")
    n = len(coords)
    if "dim" in doc and doc["dim"] != n:
        raise SchemaError(f"{pointer}/dim", f"does not match {n} coordinates")
    metric = doc.get("metric")
    if metric is not None:
        if not isinstance(metric, list) or len(metric) != n:
            raise SchemaError(f"{pointer}/metric", f"expected {n} rows")
        rows = []
        for i, row in enumerate(metric):
            if not isinstance(row, list) or len(row) != n:
                raise SchemaError(f"{pointer}/metric/{i}", f"expected {n} entries")
            rows.append([_expr(v, coords, f"{pointer}/metric/{i}/{j}") for j, v in enumerate(row)])
        metric = rows
    conn = doc.get("connection")
    if conn is not None:
        if not isinstance(conn, list) or len(conn) != n:
            raise SchemaError(f"{pointer}/connection", f"expected {n} blocks")
        blocks = []
        for s, block in enumerate(conn):
            if not isinstance(block, list) or len(block) != n:
                raise SchemaError(f"{pointer}/connection/{s}", f"expected {n} rows")
            rows = []
            for b, row in enumerate(block):
                if not isinstance(row, list) or len(row) != n:
                    raise SchemaError(f"{pointer}/connection/{s}/{b}", f"expected {n} entries")
                rows.append([_expr(v, coords, f"{pointer}/connection/{s}/{b}/{a}") for a, v in enumerate(row)])
            blocks.append(rows)
        conn = blocks
    box = doc.get("sample_box")
    if box is not None:
        if not isinstance(box, list) or len(box) != n:
            raise SchemaError(f"{pointer}/sample_box", f"expected {n} intervals")
        for i, b in enumerate(box):
            if (not isinstance(b, list) or len(b) != 2 or not all(isinstance(v, (int, float)) for v in b)
                    or not b[0] < b[1]):
                raise SchemaError(f"{pointer}/sample_box/{i}", "expected [lo, hi] with lo < hi")
    try:
        return Chart(coords, metric, conn, box, star_shaped=doc.get("star_shaped", True))
    except ValueError as err:
        raise SchemaError(pointer, str(err)) from None


# pseudostructures ----------------------------------------------------------


def pseudo_to_doc(ps: Pseudostructure) -> dict:
    par = None
    if ps.has_parametrization:
        par = {"params": list(ps.params), "map": [expr_to_text(m) for m in ps.mapping],
               "param_box": [list(b) for b in ps.param_box]}
    return {"constraints": [expr_to_text(c) for c in ps.constraints], "parametrization": par}


def pseudo_from_doc(doc, chart: Chart, pointer="") -> Pseudostructure:
    cons = _require(doc, "constraints", pointer, list)
    constraints = [_expr(c, chart.coords, f"{pointer}/constraints/{i}") for i, c in enumerate(cons)]
    par = doc.get("parametrization")
    params = mapping = box = None
    if par is not None:
        pp = f"{pointer}/parametrization"
        params = _require(par, "params", pp, list)
        if not all(isinstance(p, str) and p.isidentifier() for p in params):
            raise SchemaError(f"{pp}/params", "parameter names must be identifiers")
        raw = _require(par, "map", pp, list)
        mapping = [_expr(m, params, f"{pp}/map/{i}") for i, m in enumerate(raw)]
        box = par.get("param_box")
        if box is not None:
            for i, b in enumerate(box):
                if not isinstance(b, list) or len(b) != 2 or not b[0] < b[1]:
                    raise SchemaError(f"{pp}/param_box/{i}", "expected [lo, hi] with lo < hi")
    try:
        return Pseudostructure(chart, constraints, params, mapping, box)
    except ValueError as err:
        raise SchemaError(pointer, str(err)) from None


# relations --------------------------------------------------------------


def relation_from_doc(doc, pointer="") -> MaterialSystemSpec:
    chart = chart_from_doc(_require(doc, "chart", pointer, dict), f"{pointer}/chart")
    p = _require(doc, "degree", pointer, int)
    psi_doc = doc.get("psi")
    psi = None if psi_doc is None else form_from_doc(psi_doc, chart.coords, f"{pointer}/psi")
    om = _require(doc, "omega", pointer, dict)
    try:
        if "A" in om:
            acts = om["A"]
            if not isinstance(acts, list) or len(acts) != chart.dim:
                raise SchemaError(f"{pointer}/omega/A", f"expected {chart.dim} coefficients")
            actions = [_expr(a, chart.coords, f"{pointer}/omega/A/{i}") for i, a in enumerate(acts)]
            return MaterialSystemSpec(chart, p, psi=psi, actions=actions)
        omega = form_from_doc(om, chart.coords, f"{pointer}/omega")
        return MaterialSystemSpec(chart, p, psi=psi, omega=omega)
    except SchemaError:
        raise
    except ValueError as err:
        raise SchemaError(pointer, str(err)) from None


def relation_to_doc(spec: MaterialSystemSpec) -> dict:
    return {"chart": chart_to_doc(spec.chart),
            "psi": None if spec.psi is None else form_to_doc(spec.psi),
            "omega": ({"A": [expr_to_text(a) for a in spec.actions]} if spec.actions is not None
                      else form_to_doc(spec.omega)),
            "degree": spec.degree}


# files ------------------------------------------------------------------

KINDS = ("form", "chart", "pseudo", "relation")


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, non-finite floats to strings."""
    import numpy as np
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise SchemaError("", f"malformed JSON: {err}") from None


def load_document(path, kind, chart: Chart | None = None):
    doc = read_json(path)
    return document_from_dict(doc, kind, chart)


def document_from_dict(doc, kind, chart=None):
    if kind == "form":
        return form_from_doc(doc, None if chart is None else chart.coords)
    if kind == "chart":
        return chart_from_doc(doc)
    if kind == "pseudo":
        if chart is None:
            raise ValueError("a pseudostructure document needs a chart")
        return pseudo_from_doc(doc, chart)
    if kind == "relation":
        return relation_from_doc(doc)
    raise ValueError(f"unknown document kind {kind!r}")


def document_to_dict(value) -> dict:
    if isinstance(value, DifferentialForm):
        return form_to_doc(value)
    if isinstance(value, Chart):
        return chart_to_doc(value)
    if isinstance(value, Pseudostructure):
        return pseudo_to_doc(value)
    if isinstance(value, MaterialSystemSpec):
        return relation_to_doc(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def save_document(path, value) -> str:
    text = dumps(document_to_dict(value))
    Path(path).write_text(text)
    return text
