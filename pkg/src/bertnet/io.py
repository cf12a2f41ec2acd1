"""JSON and CSV file formats.  Every JSON document carries ``"formatVersion": 1``."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .boundary_search import FreeBoundarySketch
from .errors import MalformedInput
from .network import Network
from .numerics import MalformedNumber, format_scalar, parse_scalar
from .sketch import Sketch, SketchSolution
from .strategy import PiecewiseCdf, Segment, StrategyProfile

FORMAT_VERSION = 1


def _check_version(doc: dict, kind: str) -> None:
    if not isinstance(doc, dict):
        raise MalformedInput(f"{kind} file must hold a JSON object")
    v = doc.get("formatVersion", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        raise MalformedInput(f"unsupported {kind} formatVersion {v!r}")


def _num(value, exact: bool, what: str):
    try:
        return parse_scalar(value, exact)
    except (MalformedNumber, TypeError, ValueError) as exc:
        raise MalformedInput(f"{what}: {exc}") from exc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc})") from exc


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


# -- networks ---------------------------------------------------------------


def network_to_json(net: Network) -> dict:
    return {
        "formatVersion": FORMAT_VERSION,
        "sellers": [{"id": net.labels[i], "alpha": format_scalar(net.alpha[i])} for i in range(net.n)],
        "markets": [
            {"a": net.labels[i], "b": net.labels[j], "beta": format_scalar(b)} for (i, j), b in sorted(net.beta.items())
        ],
    }


def network_from_json(doc: dict, exact: bool = True) -> Network:
    _check_version(doc, "network")
    try:
        sellers = doc["sellers"]
        markets = doc.get("markets", [])
        ids = [str(s["id"]) for s in sellers]
        alpha = [_alpha(s, exact) for s in sellers]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"network file is missing field {exc}") from exc
    index = {sid: k for k, sid in enumerate(ids)}
    if len(index) != len(ids):
        raise MalformedInput("seller ids must be unique")
    edges = []
    for m in markets:
        try:
            a, b = index[str(m["a"])], index[str(m["b"])]
        except KeyError as exc:
            raise MalformedInput(f"market references unknown seller {exc}") from exc
        edges.append((a, b, _num(m["beta"], exact, f"market {m['a']}-{m['b']} beta")))
    return Network.from_edges(alpha, edges, labels=ids)


def _alpha(seller: dict, exact: bool):
    # several captive markets of one seller act as a single market of the summed size
    raw = seller["alpha"]
    parts = raw if isinstance(raw, list) else [raw]
    vals = [_num(v, exact, f"seller {seller['id']} alpha") for v in parts]
    return sum(vals[1:], vals[0]) if vals else _num(0, exact, "alpha")


def load_network(path, exact: bool = True) -> Network:
    return network_from_json(read_json(path), exact)


# -- sketches ---------------------------------------------------------------


def seller_index(net: Network, sid) -> int:
    try:
        return net.labels.index(str(sid))
    except ValueError as exc:
        raise MalformedInput(f"unknown seller id {sid!r}") from exc


def sketch_to_json(net: Network, sketch: Sketch) -> dict:
    return {
        "formatVersion": FORMAT_VERSION,
        "supports": {
            net.labels[i]: [[format_scalar(lo), format_scalar(hi)] for lo, hi in sketch.supports[i]] for i in range(net.n)
        },
        "atoms": [net.labels[i] for i in sorted(sketch.atoms)],
    }


def sketch_from_json(net: Network, doc: dict, exact: bool = True) -> Sketch:
    _check_version(doc, "sketch")
    supports = [[] for _ in range(net.n)]
    for sid, ivs in doc.get("supports", {}).items():
        i = seller_index(net, sid)
        for iv in ivs:
            if len(iv) != 2:
                raise MalformedInput(f"seller {sid}: support pieces are [lo, hi] pairs")
            supports[i].append((_num(iv[0], exact, "support bound"), _num(iv[1], exact, "support bound")))
    atoms = {seller_index(net, sid) for sid in doc.get("atoms", [])}
    return Sketch(tuple(tuple(s) for s in supports), frozenset(atoms))


def free_sketch_to_json(net: Network, fbs: FreeBoundarySketch) -> dict:
    """Interval-index form: interval 0 is the top one, just below price 1."""
    return {
        "formatVersion": FORMAT_VERSION,
        "intervals": len(fbs.R),
        "supports": {net.labels[i]: sorted(j for j, r in enumerate(fbs.R) if i in r) for i in range(net.n)},
        "atoms": [net.labels[i] for i in sorted(fbs.atoms)],
    }


def free_sketch_from_json(net: Network, doc: dict) -> FreeBoundarySketch:
    _check_version(doc, "sketch")
    sup = {}
    for sid, js in doc.get("supports", {}).items():
        if not all(isinstance(j, int) and j >= 0 for j in js):
            raise MalformedInput(f"seller {sid}: interval indices must be non-negative integers")
        sup[seller_index(net, sid)] = list(js)
    atoms = [seller_index(net, sid) for sid in doc.get("atoms", [])]
    fbs = FreeBoundarySketch.from_supports(net.n, sup, atoms)
    if "intervals" in doc and doc["intervals"] != len(fbs.R):
        raise MalformedInput(f"declared {doc['intervals']} intervals but supports use {len(fbs.R)}")
    return fbs


def is_free_sketch(doc: dict) -> bool:
    sup = doc.get("supports", {})
    return any(isinstance(v, int) for vs in sup.values() for v in vs)


# -- profiles ---------------------------------------------------------------


def profile_to_json(net: Network, profile: StrategyProfile, utilities=None, boundary=None) -> dict:
    doc = {"formatVersion": FORMAT_VERSION, "kind": "profile", "sellers": []}
    for i, cdf in enumerate(profile):
        entry = {
            "id": net.labels[i],
            "atom": format_scalar(cdf.atom),
            "segments": [
                {"lo": format_scalar(s.lo), "hi": format_scalar(s.hi), "a": format_scalar(s.a), "b": format_scalar(s.b)}
                for s in cdf.segments
            ],
        }
        if cdf.zero_atom:
            entry["zeroAtom"] = format_scalar(cdf.zero_atom)
        if utilities is not None:
            entry["utility"] = format_scalar(utilities[i])
        doc["sellers"].append(entry)
    if boundary is not None:
        doc["boundary"] = [format_scalar(t) for t in boundary]
    return doc


def profile_from_json(net: Network, doc: dict) -> StrategyProfile:
    """Exact when every number is a string or int; floats stay floats."""
    _check_version(doc, "profile")
    cdfs: list = [None] * net.n
    for entry in doc.get("sellers", []):
        i = seller_index(net, entry["id"])
        exact = _all_exact(entry)
        segs = tuple(
            Segment(*(_num(s[k], exact, f"seller {entry['id']} segment {k}") for k in ("lo", "hi", "a", "b")))
            for s in entry.get("segments", [])
        )
        zero = _num(entry.get("zeroAtom", 0), exact, "zeroAtom")
        cdfs[i] = PiecewiseCdf(segs, _num(entry.get("atom", 0), exact, "atom"), zero)
    missing = [net.labels[i] for i, c in enumerate(cdfs) if c is None]
    if missing:
        raise MalformedInput(f"profile lacks sellers {missing}")
    return StrategyProfile(tuple(cdfs))


def _all_exact(entry: dict) -> bool:
    vals = [entry.get("atom", 0), entry.get("zeroAtom", 0)]
    for s in entry.get("segments", []):
        vals.extend(s.values())
    return all(isinstance(v, (str, int)) and not isinstance(v, bool) for v in vals)


def load_profile(net: Network, path) -> StrategyProfile:
    return profile_from_json(net, read_json(path))


def profile_csv(net: Network, profile: StrategyProfile, points: int = 512) -> str:
    """Columns seller, x, F(x) on ``points`` equally spaced prices in (0, 1]."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seller", "x", "F"])
    fp = profile.to_float()
    for i, cdf in enumerate(fp):
        for k in range(1, points + 1):
            x = k / points
            w.writerow([net.labels[i], repr(x), repr(float(cdf.eval(x, "F")))])
    return buf.getvalue()


def solution_to_json(net: Network, ss: SketchSolution) -> dict:
    doc = {
        "formatVersion": FORMAT_VERSION,
        "kind": "sketchSolution",
        "boundary": [format_scalar(t) for t in ss.T],
        "utilities": {net.labels[i]: format_scalar(u) for i, u in enumerate(ss.u)},
        "fbar": {net.labels[i]: [format_scalar(v) for v in row] for i, row in enumerate(ss.fbar)},
        "unique": ss.unique,
    }
    doc["sketch"] = sketch_to_json(net, ss.sketch)
    return doc
